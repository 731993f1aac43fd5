//! Star-covering trees of the augmented base digraph, truncated at a radius.
//!
//! Vertex ids spell the label path from the root: the root is named after its
//! base vertex and a child reached through the `Δ+` arc `b` is `{parent}/{b}`.
//! The arc from a child to its parent is `{child}>`, its reverse `{child}<`.
//! A tree built at radius `R` is therefore an id-preserving subtree of the one
//! built at `R + 1`.

use crate::error::{Error, Result};
use crate::gga::{AugmentedDigraph, Gga};
use crate::sgraph::{DotStyle, GraphMorphism, SerreGraph};
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringTree {
    tree: SerreGraph,
    root: usize,
    radius: usize,
    depth: Vec<usize>,
    parent: Vec<Option<usize>>,
    vertex_label: Vec<usize>,
    arc_label: Vec<usize>,
    rho_label: Vec<usize>,
    complete: Vec<bool>,
    interior: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoveringDiagnostic {
    NotATree,
    LabelOutOfRange { item: String },
    NotAMorphism { arc: String },
    NotCompatible { arc: String },
    StarNotBijective { vertex: String },
}

impl fmt::Display for CoveringDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoveringDiagnostic::NotATree => write!(f, "not-a-tree"),
            CoveringDiagnostic::LabelOutOfRange { item } => write!(f, "label-out-of-range: `{item}`"),
            CoveringDiagnostic::NotAMorphism { arc } => write!(f, "not-a-morphism: arc `{arc}`"),
            CoveringDiagnostic::NotCompatible { arc } => write!(f, "not-compatible: arc `{arc}`"),
            CoveringDiagnostic::StarNotBijective { vertex } => {
                write!(f, "star-not-bijective: vertex `{vertex}`")
            }
        }
    }
}

impl CoveringTree {
    /// Breadth-first construction out to depth `radius` from a vertex of the base graph.
    pub fn build(g: &Gga, root: usize, radius: usize) -> Result<CoveringTree> {
        let aug = g.augmented();
        if root >= g.base().vertex_count() {
            return Err(Error::Precondition(format!("no base vertex with index {root}")));
        }
        let mut tree = SerreGraph::new();
        let mut depth = vec![0];
        let mut vertex_label = vec![root];
        let mut arc_label = Vec::new();
        // label of the arc from the parent into each vertex
        let mut down: Vec<Option<usize>> = vec![None];
        tree.add_vertex(g.base().vertex_id(root))?;
        let mut x = 0;
        while x < tree.vertex_count() {
            if depth[x] < radius {
                for &b in aug.star(vertex_label[x]) {
                    if down[x] == Some(b) {
                        continue;
                    }
                    let back = reverse_completion(g, aug, b);
                    let id = format!("{}/{}", tree.vertex_id(x), aug.arc_id(b));
                    let y = tree.add_vertex(id.clone())?;
                    tree.add_edge(format!("{id}>"), format!("{id}<"), y, x)?;
                    arc_label.push(b);
                    arc_label.push(back);
                    depth.push(depth[x] + 1);
                    vertex_label.push(aug.origin(b));
                    down.push(Some(back));
                }
            }
            x += 1;
        }
        Self::assemble(aug, tree, 0, radius, vertex_label, arc_label)
    }

    /// Wraps arbitrary labelled data; use [`CoveringTree::validate`] to check it.
    pub fn from_parts(
        aug: &AugmentedDigraph,
        tree: SerreGraph,
        root: usize,
        radius: usize,
        vertex_label: Vec<usize>,
        arc_label: Vec<usize>,
    ) -> Result<CoveringTree> {
        Self::assemble(aug, tree, root, radius, vertex_label, arc_label)
    }

    fn assemble(
        aug: &AugmentedDigraph,
        tree: SerreGraph,
        root: usize,
        radius: usize,
        vertex_label: Vec<usize>,
        arc_label: Vec<usize>,
    ) -> Result<CoveringTree> {
        if vertex_label.len() != tree.vertex_count() || arc_label.len() != tree.arc_count() || root >= tree.vertex_count()
        {
            return Err(Error::Precondition("labels do not match the tree".into()));
        }
        let n = tree.vertex_count();
        let mut depth = vec![usize::MAX; n];
        let mut parent = vec![None; n];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &c in tree.star(x) {
                let y = tree.origin(c);
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some(c);
                    queue.push_back(y);
                }
            }
        }
        let rho_label = arc_label.iter().map(|&b| aug.rho.get(b).copied().unwrap_or(usize::MAX)).collect();
        let complete = (0..n)
            .map(|x| vertex_label[x] < aug.plus.vertices.len() && tree.star(x).len() == aug.star(vertex_label[x]).len())
            .collect();
        let interior = depth.iter().map(|&d| d < radius).collect();
        Ok(CoveringTree { tree, root, radius, depth, parent, vertex_label, arc_label, rho_label, complete, interior })
    }

    pub fn graph(&self) -> &SerreGraph {
        &self.tree
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertex_count(&self) -> usize {
        self.tree.vertex_count()
    }

    pub fn arc_count(&self) -> usize {
        self.tree.arc_count()
    }

    pub fn vertex_id(&self, x: usize) -> &str {
        self.tree.vertex_id(x)
    }

    pub fn arc_id(&self, c: usize) -> &str {
        self.tree.arc_id(c)
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.tree.vertex_index(id)
    }

    pub fn depth(&self, x: usize) -> usize {
        self.depth[x]
    }

    /// The arc from `x` to its parent.
    pub fn parent_arc(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x].map(|c| self.tree.terminus(c))
    }

    /// `π(x)`: the base vertex under `x`.
    pub fn vertex_label(&self, x: usize) -> usize {
        self.vertex_label[x]
    }

    /// `π+(c)`: the `Δ+` arc under `c`.
    pub fn arc_label(&self, c: usize) -> usize {
        self.arc_label[c]
    }

    /// `ρπ+(c)`: the base arc under `c`.
    pub fn base_arc(&self, c: usize) -> usize {
        self.rho_label[c]
    }

    /// Strictly inside the truncation radius, unless overridden.
    pub fn is_interior(&self, x: usize) -> bool {
        self.interior[x]
    }

    /// Replaces the depth-based interior predicate.
    pub fn with_interior(mut self, interior: Vec<bool>) -> Result<CoveringTree> {
        if interior.len() != self.vertex_count() {
            return Err(Error::Precondition("interior flags do not match the tree".into()));
        }
        self.interior = interior;
        Ok(self)
    }

    /// Interior, or at least carrying a complete star: the vertices where
    /// local data is fully determined.
    pub fn is_settled(&self, x: usize) -> bool {
        self.interior[x] || self.complete[x]
    }

    /// The star of `x` covers the whole star of its label. Interior vertices
    /// always have complete stars; frontier vertices may too.
    pub fn has_complete_star(&self, x: usize) -> bool {
        self.complete[x]
    }

    /// Every vertex has a complete star, so the tree is the whole covering tree.
    pub fn is_complete(&self) -> bool {
        self.complete.iter().all(|&c| c)
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertex_count()).filter(|&x| self.depth[x] != usize::MAX).collect();
        order.sort_by_key(|&x| (self.depth[x], x));
        order
    }

    /// Distances from `x` to every vertex (`usize::MAX` if unreachable).
    pub fn distances_from(&self, x: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.vertex_count()];
        d[x] = 0;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            for &c in self.tree.star(u) {
                let w = self.tree.origin(c);
                if d[w] == usize::MAX {
                    d[w] = d[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    }

    pub fn validate(&self, aug: &AugmentedDigraph) -> Vec<CoveringDiagnostic> {
        let t = &self.tree;
        let mut out = Vec::new();
        if !t.is_tree() {
            out.push(CoveringDiagnostic::NotATree);
        }
        for x in 0..t.vertex_count() {
            if self.vertex_label[x] >= aug.plus.vertices.len() {
                out.push(CoveringDiagnostic::LabelOutOfRange { item: t.vertex_id(x).into() });
                return out;
            }
        }
        for c in 0..t.arc_count() {
            let b = self.arc_label[c];
            if b >= aug.arc_count() {
                out.push(CoveringDiagnostic::LabelOutOfRange { item: t.arc_id(c).into() });
                return out;
            }
            if aug.origin(b) != self.vertex_label[t.origin(c)] || aug.terminus(b) != self.vertex_label[t.terminus(c)] {
                out.push(CoveringDiagnostic::NotAMorphism { arc: t.arc_id(c).into() });
            }
        }
        for c in 0..t.arc_count() {
            let rb = self.arc_label[t.reverse(c)];
            let a = aug.rho[self.arc_label[c]];
            if aug.rho[rb] != base_reverse(aug, a) {
                out.push(CoveringDiagnostic::NotCompatible { arc: t.arc_id(c).into() });
            }
        }
        for x in 0..t.vertex_count() {
            if !self.is_interior(x) {
                continue;
            }
            let mut got: Vec<usize> = t.star(x).iter().map(|&c| self.arc_label[c]).collect();
            got.sort_unstable();
            let mut want = aug.star(self.vertex_label[x]).to_vec();
            want.sort_unstable();
            if got != want {
                out.push(CoveringDiagnostic::StarNotBijective { vertex: t.vertex_id(x).into() });
            }
        }
        out
    }

    /// A label-preserving isomorphism comparing vertex labels and `ρπ+` arc labels,
    /// matched level by level from the roots.
    pub fn isomorphism(&self, other: &CoveringTree) -> Result<Option<GraphMorphism>> {
        if self.radius != other.radius {
            return Err(Error::Precondition("covering trees have different radii".into()));
        }
        if self.vertex_count() != other.vertex_count() || self.arc_count() != other.arc_count() {
            return Ok(None);
        }
        let fa = self.shapes();
        let fb = other.shapes();
        if fa[self.root] != fb[other.root] {
            return Ok(None);
        }
        let mut vmap = vec![usize::MAX; self.vertex_count()];
        let mut amap = vec![usize::MAX; self.arc_count()];
        vmap[self.root] = other.root;
        let mut queue = VecDeque::from([self.root]);
        while let Some(x) = queue.pop_front() {
            let x2 = vmap[x];
            let mut pool: BTreeMap<(usize, &str), Vec<usize>> = BTreeMap::new();
            for c in other.children_arcs(x2) {
                pool.entry((other.rho_label[c], &fb[other.tree.origin(c)])).or_default().push(c);
            }
            for c in self.children_arcs(x) {
                let key = (self.rho_label[c], fa[self.tree.origin(c)].as_str());
                let Some(c2) = pool.get_mut(&key).and_then(|v| (!v.is_empty()).then(|| v.remove(0))) else {
                    return Ok(None);
                };
                amap[c] = c2;
                amap[self.tree.reverse(c)] = other.tree.reverse(c2);
                let y = self.tree.origin(c);
                vmap[y] = other.tree.origin(c2);
                queue.push_back(y);
            }
        }
        let m = GraphMorphism { vertex_map: vmap, arc_map: amap };
        Ok(m.is_graph_morphism(&self.tree, &other.tree).then_some(m))
    }

    /// Arcs from the children of `x` into `x`.
    fn children_arcs(&self, x: usize) -> Vec<usize> {
        self.tree.star(x).iter().copied().filter(|&c| self.parent[self.tree.origin(c)] == Some(c)).collect()
    }

    /// A string per vertex describing its labelled subtree.
    fn shapes(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.vertex_count()];
        let order = self.bfs_order();
        for &x in order.iter().rev() {
            let mut parts: Vec<String> = self
                .children_arcs(x)
                .into_iter()
                .map(|c| format!("{}:{}", self.rho_label[c], out[self.tree.origin(c)]))
                .collect();
            parts.sort();
            out[x] = format!("{}[{}]", self.vertex_label[x], parts.join(","));
        }
        out
    }

    pub fn to_dot(&self, g: &Gga) -> String {
        let aug = g.augmented();
        let style = DotStyle {
            vertex_labels: Some(
                (0..self.vertex_count()).map(|x| format!(": {}", g.base().vertex_id(self.vertex_label[x]))).collect(),
            ),
            arc_labels: Some((0..self.arc_count()).map(|c| aug.arc_id(self.arc_label[c]).to_string()).collect()),
        };
        style.render(&self.tree, &format!("{} tree", g.name()))
    }
}

/// Reverse of a base arc, read off `Δ+` (whose first fiber arc is the base arc).
fn base_reverse(aug: &AugmentedDigraph, a: usize) -> usize {
    aug.base_reverse[a]
}

/// The least `Δ+` arc over the reverse of `ρ(b)`, or `b` itself when `ρ(b)` is self-reverse.
fn reverse_completion(g: &Gga, aug: &AugmentedDigraph, b: usize) -> usize {
    if aug.self_reverse[b] {
        return b;
    }
    let r = g.base().reverse(aug.rho[b]);
    *aug.fiber(r).iter().min().expect("fibers are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn sizes() {
        let c3 = corpus::load("ex-c3-id").unwrap();
        for r in 1..4 {
            let t = CoveringTree::build(&c3, 0, r).unwrap();
            assert_eq!((t.vertex_count(), t.arc_count()), (2, 2));
            assert!(t.is_complete());
        }
        let small = corpus::load("ex-small").unwrap();
        let t = CoveringTree::build(&small, 0, 2).unwrap();
        assert_eq!(t.vertex_count(), 2);
        let bm = corpus::load("bm-c3").unwrap();
        let t = CoveringTree::build(&bm, 0, 2).unwrap();
        assert_eq!(t.vertex_count(), 10);
        assert!(!t.is_complete());
        assert!(t.validate(bm.augmented()).is_empty());
    }

    #[test]
    fn ids_nest_across_radii() {
        let bm = corpus::load("bm-s3").unwrap();
        let small = CoveringTree::build(&bm, 0, 1).unwrap();
        let big = CoveringTree::build(&bm, 0, 2).unwrap();
        for x in 0..small.vertex_count() {
            let y = big.vertex_index(small.vertex_id(x)).unwrap();
            assert_eq!(small.vertex_label(x), big.vertex_label(y));
        }
    }

    #[test]
    fn mutations_are_caught() {
        let bm = corpus::load("bm-c3").unwrap();
        let aug = bm.augmented();
        let t = CoveringTree::build(&bm, 0, 2).unwrap();

        // drop the last vertex together with its arcs
        let g = t.graph();
        let last = g.vertex_count() - 1;
        let mut cut = SerreGraph::new();
        for x in 0..last {
            cut.add_vertex(g.vertex_id(x)).unwrap();
        }
        let mut labels = Vec::new();
        for c in 0..g.arc_count() {
            if g.origin(c) == last || g.terminus(c) == last || g.reverse(c) < c {
                continue;
            }
            cut.add_edge(g.arc_id(c), g.arc_id(g.reverse(c)), g.origin(c), g.terminus(c)).unwrap();
            labels.push(t.arc_label(c));
            labels.push(t.arc_label(g.reverse(c)));
        }
        let vl = (0..last).map(|x| t.vertex_label(x)).collect();
        let m = CoveringTree::from_parts(aug, cut, 0, 2, vl, labels).unwrap();
        let d = m.validate(aug);
        assert!(d.iter().any(|d| matches!(d, CoveringDiagnostic::StarNotBijective { .. })), "{d:?}");

        let gog = corpus::load("gog-c2c2").unwrap();
        let aug = gog.augmented();
        let t = CoveringTree::build(&gog, 0, 2).unwrap();
        let mut al: Vec<usize> = (0..t.arc_count()).map(|c| t.arc_label(c)).collect();
        // move the first arc label into the fibre of the other base arc with the same terminus
        let b = al[0];
        let other = (0..aug.arc_count()).find(|&o| aug.rho[o] != aug.rho[b]).unwrap();
        al[0] = other;
        let vl = (0..t.vertex_count()).map(|x| t.vertex_label(x)).collect();
        let m = CoveringTree::from_parts(aug, t.graph().clone(), 0, 2, vl, al).unwrap();
        assert!(!m.validate(aug).is_empty());
    }

    #[test]
    fn isomorphisms() {
        let bm = corpus::load("bm-s3").unwrap();
        let t = CoveringTree::build(&bm, 0, 2).unwrap();
        let m = t.isomorphism(&t).unwrap().unwrap();
        assert!(m.is_bijective(t.graph()));
        let u = CoveringTree::build(&bm, 0, 1).unwrap();
        assert!(t.isomorphism(&u).is_err());

        let small = corpus::load("ex-small").unwrap();
        let a = CoveringTree::build(&small, 0, 1).unwrap();
        let b = CoveringTree::build(&small, 1, 1).unwrap();
        assert!(a.isomorphism(&b).unwrap().is_none());
    }

    #[test]
    fn neighbour_counts_match_indices() {
        for name in ["bm-s3", "a1-s3", "ex-parity", "gog-c2c2", "box-k21"] {
            let g = corpus::load(name).unwrap();
            let aug = g.augmented();
            let t = CoveringTree::build(&g, 0, 2).unwrap();
            for x in 0..t.vertex_count() {
                if !t.is_interior(x) {
                    continue;
                }
                for a in 0..g.base().arc_count() {
                    if g.base().terminus(a) != t.vertex_label(x) {
                        continue;
                    }
                    let n = t.graph().star(x).iter().filter(|&&c| t.base_arc(c) == a).count();
                    assert_eq!(n, g.index(a), "{name}");
                    assert_eq!(n, aug.fiber(a).len());
                }
            }
        }
    }
}
