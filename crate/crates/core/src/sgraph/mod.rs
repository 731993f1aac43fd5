//! Graphs in Serre's convention: arcs come with an involutive reversal and
//! self-reverse arcs are allowed.

mod dot;
mod iso;

pub use dot::DotStyle;
pub use iso::{for_each_isomorphism, isomorphism};

use crate::error::{Error, Result};
use std::collections::{HashMap, VecDeque};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcRecord {
    pub id: String,
    pub origin: usize,
    pub terminus: usize,
    pub reverse: usize,
}

/// A finite Serre graph with string ids kept in declaration order.
#[derive(Clone, Debug, Default)]
pub struct SerreGraph {
    vertices: Vec<String>,
    arcs: Vec<ArcRecord>,
    vertex_index: HashMap<String, usize>,
    arc_index: HashMap<String, usize>,
    stars: Vec<Vec<usize>>,
    star_invs: Vec<Vec<usize>>,
}

impl PartialEq for SerreGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.arcs == other.arcs
    }
}

impl Eq for SerreGraph {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphDiagnostic {
    ReverseNotInvolutive { arc: String },
    OriginNotReverseTerminus { arc: String },
}

impl fmt::Display for GraphDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphDiagnostic::ReverseNotInvolutive { arc } => {
                write!(f, "reverse-not-involutive: arc `{arc}`")
            }
            GraphDiagnostic::OriginNotReverseTerminus { arc } => {
                write!(f, "origin-not-reverse-terminus: arc `{arc}`")
            }
        }
    }
}

impl SerreGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: impl Into<String>) -> Result<usize> {
        let id = id.into();
        if self.vertex_index.contains_key(&id) {
            return Err(Error::InvalidGraph(format!("duplicate vertex `{id}`")));
        }
        let i = self.vertices.len();
        self.vertex_index.insert(id.clone(), i);
        self.vertices.push(id);
        self.stars.push(Vec::new());
        self.star_invs.push(Vec::new());
        Ok(i)
    }

    /// Adds an arc whose reverse is given by index; the reverse may be an arc
    /// added later. No invariant is checked here, see [`SerreGraph::validate`].
    pub fn add_arc_raw(
        &mut self,
        id: impl Into<String>,
        origin: usize,
        terminus: usize,
        reverse: usize,
    ) -> Result<usize> {
        let id = id.into();
        if origin >= self.vertices.len() || terminus >= self.vertices.len() {
            return Err(Error::InvalidGraph(format!("arc `{id}` names a missing vertex")));
        }
        if self.arc_index.contains_key(&id) {
            return Err(Error::InvalidGraph(format!("duplicate arc `{id}`")));
        }
        let a = self.arcs.len();
        self.arc_index.insert(id.clone(), a);
        self.arcs.push(ArcRecord { id, origin, terminus, reverse });
        self.stars[terminus].push(a);
        self.star_invs[origin].push(a);
        Ok(a)
    }

    /// Adds an arc `id: origin → terminus` and its reverse `rid`. Returns both indices.
    pub fn add_edge(
        &mut self,
        id: impl Into<String>,
        rid: impl Into<String>,
        origin: usize,
        terminus: usize,
    ) -> Result<(usize, usize)> {
        let a = self.arcs.len();
        self.add_arc_raw(id, origin, terminus, a + 1)?;
        if let Err(e) = self.add_arc_raw(rid, terminus, origin, a) {
            let rec = self.arcs.pop().unwrap();
            self.arc_index.remove(&rec.id);
            self.stars[terminus].pop();
            self.star_invs[origin].pop();
            return Err(e);
        }
        Ok((a, a + 1))
    }

    pub fn add_self_reverse(&mut self, id: impl Into<String>, vertex: usize) -> Result<usize> {
        let a = self.arcs.len();
        self.add_arc_raw(id, vertex, vertex, a)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn arc(&self, a: usize) -> &ArcRecord {
        &self.arcs[a]
    }

    pub fn arcs(&self) -> &[ArcRecord] {
        &self.arcs
    }

    pub fn arc_id(&self, a: usize) -> &str {
        &self.arcs[a].id
    }

    pub fn origin(&self, a: usize) -> usize {
        self.arcs[a].origin
    }

    pub fn terminus(&self, a: usize) -> usize {
        self.arcs[a].terminus
    }

    pub fn reverse(&self, a: usize) -> usize {
        self.arcs[a].reverse
    }

    pub fn is_self_reverse(&self, a: usize) -> bool {
        self.arcs[a].reverse == a
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn arc_index(&self, id: &str) -> Option<usize> {
        self.arc_index.get(id).copied()
    }

    /// Arcs with terminus `v`, in declaration order.
    pub fn star(&self, v: usize) -> &[usize] {
        &self.stars[v]
    }

    /// Arcs with origin `v`, in declaration order.
    pub fn star_inv(&self, v: usize) -> &[usize] {
        &self.star_invs[v]
    }

    pub fn validate(&self) -> Vec<GraphDiagnostic> {
        let mut out = Vec::new();
        for (a, rec) in self.arcs.iter().enumerate() {
            let r = rec.reverse;
            if r >= self.arcs.len() || self.arcs[r].reverse != a {
                out.push(GraphDiagnostic::ReverseNotInvolutive { arc: rec.id.clone() });
            } else if rec.origin != self.arcs[r].terminus {
                out.push(GraphDiagnostic::OriginNotReverseTerminus { arc: rec.id.clone() });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        self.bfs(0).0.len() == self.vertices.len()
    }

    /// Breadth-first order from `root` following arc origins to termini, with the
    /// arc used to reach each vertex (`None` for the root and unreached vertices).
    pub fn bfs(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut seen = vec![false; self.vertices.len()];
        let mut via = vec![None; self.vertices.len()];
        let mut order = vec![root];
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for &a in self.star_inv(v) {
                let w = self.arcs[a].terminus;
                if !seen[w] {
                    seen[w] = true;
                    via[w] = Some(a);
                    order.push(w);
                    q.push_back(w);
                }
            }
        }
        (order, via)
    }

    /// Simple (no loops, no parallel arcs), connected, and acyclic.
    pub fn is_tree(&self) -> bool {
        if !self.is_valid() || !self.connected() {
            return false;
        }
        let mut pairs = std::collections::HashSet::new();
        for rec in &self.arcs {
            if rec.origin == rec.terminus || !pairs.insert((rec.origin, rec.terminus)) {
                return false;
            }
        }
        self.arcs.len() == 2 * (self.vertices.len() - 1)
    }

    /// The arc from `u` to `v`, if there is exactly one such arc.
    pub fn arc_between(&self, u: usize, v: usize) -> Option<usize> {
        let mut it = self.star_invs[u].iter().filter(|&&a| self.arcs[a].terminus == v);
        let a = *it.next()?;
        if it.next().is_some() {
            None
        } else {
            Some(a)
        }
    }

    pub fn quotient(&self, e: &GraphEquivalence) -> Result<(SerreGraph, GraphMorphism)> {
        e.check(self)?;
        let (vmap, vnames) = class_layout(&e.vertex_class, &self.vertices);
        let arc_ids: Vec<String> = self.arcs.iter().map(|r| r.id.clone()).collect();
        let (amap, anames) = class_layout(&e.arc_class, &arc_ids);
        let mut q = SerreGraph::new();
        for n in vnames {
            q.add_vertex(n)?;
        }
        let mut reps = vec![usize::MAX; anames.len()];
        for (a, &c) in amap.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = a;
            }
        }
        for (c, n) in anames.into_iter().enumerate() {
            let r = reps[c];
            q.add_arc_raw(n, vmap[self.origin(r)], vmap[self.terminus(r)], amap[self.reverse(r)])?;
        }
        Ok((q, GraphMorphism { vertex_map: vmap, arc_map: amap }))
    }

    /// Contracts the arcs in `b`: each component of `(V, b)` becomes one vertex.
    /// Singleton components keep their id, merged ones are named `[least id]`.
    pub fn contract(&self, b: &[usize]) -> Result<SerreGraph> {
        let inb: std::collections::HashSet<usize> = b.iter().copied().collect();
        if let Some(&a) = b.iter().find(|&&a| a >= self.arcs.len() || !inb.contains(&self.reverse(a))) {
            return Err(Error::Precondition(format!(
                "contraction set is not closed under reversal at arc index {a}"
            )));
        }
        let mut uf = UnionFind::new(self.vertices.len());
        for &a in b {
            uf.union(self.origin(a), self.terminus(a));
        }
        let mut comp_of = vec![usize::MAX; self.vertices.len()];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.vertices.len() {
            let r = uf.find(v);
            if comp_of[r] == usize::MAX {
                comp_of[r] = members.len();
                members.push(Vec::new());
            }
            members[comp_of[r]].push(v);
        }
        let mut g = SerreGraph::new();
        for m in &members {
            let name = if m.len() == 1 {
                self.vertices[m[0]].clone()
            } else {
                format!("[{}]", m.iter().map(|&v| self.vertices[v].as_str()).min().unwrap())
            };
            g.add_vertex(name)?;
        }
        let kept: Vec<usize> = (0..self.arcs.len()).filter(|a| !inb.contains(a)).collect();
        let new_index: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        for &a in &kept {
            let rec = &self.arcs[a];
            g.add_arc_raw(
                rec.id.clone(),
                comp_of[uf.find(rec.origin)],
                comp_of[uf.find(rec.terminus)],
                new_index[&rec.reverse],
            )?;
        }
        Ok(g)
    }

    pub fn to_dot(&self, name: &str) -> String {
        DotStyle::default().render(self, name)
    }
}

/// Class index per element (classes numbered by first member) and class names
/// `[least member id]`.
fn class_layout(labels: &[usize], ids: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut number: HashMap<usize, usize> = HashMap::new();
    let mut least: Vec<&str> = Vec::new();
    let mut map = Vec::with_capacity(labels.len());
    for (i, &l) in labels.iter().enumerate() {
        let next = number.len();
        let c = *number.entry(l).or_insert(next);
        if c == least.len() {
            least.push(&ids[i]);
        } else if ids[i].as_str() < least[c] {
            least[c] = &ids[i];
        }
        map.push(c);
    }
    (map, least.into_iter().map(|s| format!("[{s}]")).collect())
}

/// A directed graph without reversal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Digraph {
    pub vertices: Vec<String>,
    /// `(id, origin, terminus)`.
    pub arcs: Vec<(String, usize, usize)>,
}

impl Digraph {
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.arcs.len()).filter(|&a| self.arcs[a].2 == v).collect()
    }

    /// `arc_labels`, when given, must have one entry per arc.
    pub fn to_dot(&self, name: &str, arc_labels: Option<&[String]>) -> String {
        use std::fmt::Write;
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", q(name));
        for v in &self.vertices {
            let _ = writeln!(out, "  {};", q(v));
        }
        for (i, (id, o, t)) in self.arcs.iter().enumerate() {
            let label = match arc_labels {
                Some(l) => format!("{} {}", id, l[i]),
                None => id.clone(),
            };
            let _ = writeln!(out, "  {} -> {} [label={}];", q(&self.vertices[*o]), q(&self.vertices[*t]), q(&label));
        }
        out.push_str("}\n");
        out
    }
}

/// Partition of vertices and arcs, each given by a class label per element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEquivalence {
    pub vertex_class: Vec<usize>,
    pub arc_class: Vec<usize>,
}

impl GraphEquivalence {
    pub fn trivial(g: &SerreGraph) -> Self {
        GraphEquivalence {
            vertex_class: (0..g.vertex_count()).collect(),
            arc_class: (0..g.arc_count()).collect(),
        }
    }

    /// Checks that equivalent arcs have equivalent origins, termini and reverses.
    pub fn check(&self, g: &SerreGraph) -> Result<()> {
        if self.vertex_class.len() != g.vertex_count() || self.arc_class.len() != g.arc_count() {
            return Err(Error::Precondition("equivalence does not cover the graph".into()));
        }
        let mut rep: HashMap<usize, usize> = HashMap::new();
        for a in 0..g.arc_count() {
            let r = *rep.entry(self.arc_class[a]).or_insert(a);
            let vc = &self.vertex_class;
            if vc[g.origin(a)] != vc[g.origin(r)]
                || vc[g.terminus(a)] != vc[g.terminus(r)]
                || self.arc_class[g.reverse(a)] != self.arc_class[g.reverse(r)]
            {
                return Err(Error::Precondition(format!(
                    "arcs `{}` and `{}` are equivalent but their ends or reverses are not",
                    g.arc_id(r),
                    g.arc_id(a)
                )));
            }
        }
        Ok(())
    }
}

/// Vertex and arc maps between two graphs, by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMorphism {
    pub vertex_map: Vec<usize>,
    pub arc_map: Vec<usize>,
}

impl GraphMorphism {
    pub fn is_digraph_morphism(&self, src: &SerreGraph, dst: &SerreGraph) -> bool {
        self.vertex_map.len() == src.vertex_count()
            && self.arc_map.len() == src.arc_count()
            && (0..src.arc_count()).all(|a| {
                let b = self.arc_map[a];
                b < dst.arc_count()
                    && dst.origin(b) == self.vertex_map[src.origin(a)]
                    && dst.terminus(b) == self.vertex_map[src.terminus(a)]
            })
    }

    pub fn is_graph_morphism(&self, src: &SerreGraph, dst: &SerreGraph) -> bool {
        self.is_digraph_morphism(src, dst)
            && (0..src.arc_count())
                .all(|a| self.arc_map[src.reverse(a)] == dst.reverse(self.arc_map[a]))
    }

    pub fn is_bijective(&self, dst: &SerreGraph) -> bool {
        fn bij(m: &[usize], n: usize) -> bool {
            let mut seen = vec![false; n];
            m.len() == n && m.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
        }
        bij(&self.vertex_map, dst.vertex_count()) && bij(&self.arc_map, dst.arc_count())
    }
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SerreGraph {
        let mut g = SerreGraph::new();
        for v in ["u", "v", "w"] {
            g.add_vertex(v).unwrap();
        }
        g.add_edge("a", "ab", 0, 1).unwrap();
        g.add_edge("b", "bb", 1, 2).unwrap();
        g
    }

    #[test]
    fn validate_examples() {
        let mut g = SerreGraph::new();
        g.add_vertex("v").unwrap();
        g.add_self_reverse("a", 0).unwrap();
        assert!(g.is_valid());
        assert!(path3().is_valid());

        let mut bad = SerreGraph::new();
        bad.add_vertex("v").unwrap();
        bad.add_vertex("w").unwrap();
        bad.add_arc_raw("a", 0, 1, 1).unwrap();
        bad.add_arc_raw("b", 1, 0, 1).unwrap();
        let d = bad.validate();
        // `b` is its own reverse but runs between distinct vertices
        assert_eq!(
            d,
            vec![
                GraphDiagnostic::ReverseNotInvolutive { arc: "a".into() },
                GraphDiagnostic::OriginNotReverseTerminus { arc: "b".into() },
            ]
        );
    }

    #[test]
    fn tree_examples() {
        let mut e = SerreGraph::new();
        e.add_vertex("u").unwrap();
        e.add_vertex("v").unwrap();
        e.add_edge("a", "ab", 0, 1).unwrap();
        assert!(e.is_tree());
        let mut tri = path3();
        tri.add_edge("c", "cb", 2, 0).unwrap();
        assert!(!tri.is_tree());
        let mut lp = SerreGraph::new();
        lp.add_vertex("v").unwrap();
        lp.add_edge("a", "ab", 0, 0).unwrap();
        assert!(!lp.is_tree());
        assert_eq!(lp.star(0), &[0, 1]);
        assert_eq!(lp.star_inv(0), &[0, 1]);
    }

    #[test]
    fn quotient_examples() {
        let g = path3();
        let (q, p) = g.quotient(&GraphEquivalence::trivial(&g)).unwrap();
        assert!(isomorphism(&g, &q).is_some());
        assert!(p.is_graph_morphism(&g, &q));
        let all = GraphEquivalence { vertex_class: vec![0, 0, 0], arc_class: vec![0, 1, 2, 3] };
        let (q, p) = g.quotient(&all).unwrap();
        assert_eq!(q.vertex_count(), 1);
        assert_eq!(q.vertex_id(0), "[u]");
        assert_eq!(q.arc_count(), 4);
        assert!(p.is_graph_morphism(&g, &q));
        let bad = GraphEquivalence { vertex_class: vec![0, 1, 2], arc_class: vec![0, 1, 0, 3] };
        assert!(g.quotient(&bad).is_err());
    }

    #[test]
    fn contract_examples() {
        let g = path3();
        assert!(isomorphism(&g, &g.contract(&[]).unwrap()).is_some());
        let one = g.contract(&[0, 1, 2, 3]).unwrap();
        assert_eq!((one.vertex_count(), one.arc_count()), (1, 0));
        let two = g.contract(&[0, 1]).unwrap();
        assert_eq!((two.vertex_count(), two.arc_count()), (2, 2));
        assert!(two.is_tree());
        assert!(g.contract(&[0]).is_err());
    }
}
