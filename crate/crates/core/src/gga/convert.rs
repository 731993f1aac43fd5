use super::{Gga, GgaBuilder};
use crate::error::{Error, Result};
use crate::perm::{PermAction, Permutation, PointSet};
use crate::sgraph::SerreGraph;
use std::sync::Arc;

/// A finite group given by named elements and a multiplication table,
/// `table[i][j]` being the index of `names[i] · names[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub names: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    /// Checks closure, associativity, identity and inverses.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<FiniteGroup> {
        let n = names.len();
        let bad = |m: &str| Err(Error::Precondition(format!("not a group table: {m}")));
        if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return bad("wrong shape");
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return bad("not associative");
                    }
                }
            }
        }
        let Some(e) = (0..n).find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x)) else {
            return bad("no identity");
        };
        if (0..n).any(|a| !(0..n).any(|b| table[a][b] == e)) {
            return bad("missing inverse");
        }
        Ok(FiniteGroup { names, table })
    }

    /// The elements of a permutation group, named `g0, g1, ...` in canonical order.
    pub fn from_permutation_group(a: &PermAction) -> FiniteGroup {
        let els = a.elements();
        let table = els
            .iter()
            .map(|x| els.iter().map(|y| a.rank(&x.mul(y)).expect("closed")).collect())
            .collect();
        FiniteGroup { names: (0..els.len()).map(|i| format!("g{i}")).collect(), table }
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    /// The action of the group on its own elements by left multiplication.
    pub fn left_regular(&self) -> Result<PermAction> {
        let points = Arc::new(PointSet::new(self.names.clone())?);
        let gens = (0..self.order())
            .map(|g| Permutation::from_images(self.table[g].clone()))
            .filter(|p| !p.as_ref().is_ok_and(Permutation::is_identity))
            .collect::<Result<Vec<_>>>()?;
        PermAction::new(points, gens)
    }

    /// Whether `map` is an injective homomorphism from `self` into `to`.
    pub fn is_injective_hom(&self, to: &FiniteGroup, map: &[usize]) -> bool {
        let n = self.order();
        if map.len() != n || map.iter().any(|&x| x >= to.order()) {
            return false;
        }
        let mut seen = vec![false; to.order()];
        if map.iter().any(|&x| std::mem::replace(&mut seen[x], true)) {
            return false;
        }
        (0..n).all(|a| (0..n).all(|b| map[self.table[a][b]] == to.table[map[a]][map[b]]))
    }
}

/// A graph of finite groups without self-reverse arcs.
#[derive(Clone, Debug)]
pub struct GraphOfGroups {
    pub name: String,
    pub graph: SerreGraph,
    pub vertex_groups: Vec<FiniteGroup>,
    /// Per arc; an arc and its reverse carry the same group.
    pub arc_groups: Vec<FiniteGroup>,
    /// `θ_a: H(a) → G(t(a))`, elementwise.
    pub homs: Vec<Vec<usize>>,
}

impl GraphOfGroups {
    /// Regular actions everywhere, with `Φ_a = θ_a`.
    pub fn to_gga(&self) -> Result<Gga> {
        let g = &self.graph;
        if !g.is_valid() {
            return Err(Error::InvalidGraph("graph of groups base is not a Serre graph".into()));
        }
        let mut vertex_actions = Vec::new();
        for grp in &self.vertex_groups {
            vertex_actions.push(grp.left_regular()?);
        }
        let mut arc_actions: Vec<Option<PermAction>> = vec![None; g.arc_count()];
        for a in 0..g.arc_count() {
            let id = g.arc_id(a);
            if g.is_self_reverse(a) {
                return Err(Error::Precondition(format!("arc `{id}` is self-reverse")));
            }
            let r = g.reverse(a);
            if self.arc_groups[a] != self.arc_groups[r] {
                return Err(Error::Precondition(format!("arc `{id}` and its reverse carry different groups")));
            }
            if !self.arc_groups[a].is_injective_hom(&self.vertex_groups[g.terminus(a)], &self.homs[a]) {
                return Err(Error::Precondition(format!("map of arc `{id}` is not an injective homomorphism")));
            }
            if arc_actions[a].is_none() {
                let act = self.arc_groups[a].left_regular()?;
                arc_actions[r] = Some(act.clone());
                arc_actions[a] = Some(act);
            }
        }
        Gga::new(
            self.name.clone(),
            g.clone(),
            vertex_actions,
            arc_actions.into_iter().map(Option::unwrap).collect(),
            self.homs.clone(),
            vec![None; g.arc_count()],
        )
    }
}

/// Base graph with an action at each vertex whose point set is split into
/// one orbit per incoming arc.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalActionDiagram {
    pub name: String,
    pub graph: SerreGraph,
    pub vertex_actions: Vec<PermAction>,
    /// `X(a)` as sorted point indices in `X(t(a))`.
    pub arc_sets: Vec<Vec<usize>>,
}

impl LocalActionDiagram {
    /// `X(v)` is the disjoint union of the `X(a)`, `t(a) = v`, and each is an orbit.
    pub fn check(&self) -> Result<()> {
        let g = &self.graph;
        for v in 0..g.vertex_count() {
            let act = &self.vertex_actions[v];
            let mut covered = vec![0usize; act.degree()];
            let orbits = act.orbits();
            for &a in g.star(v) {
                let mut s = self.arc_sets[a].clone();
                s.sort_unstable();
                if s.is_empty() || !orbits.contains(&s) {
                    return Err(Error::Precondition(format!("X({}) is not an orbit", g.arc_id(a))));
                }
                for x in s {
                    covered[x] += 1;
                }
            }
            if covered.iter().any(|&c| c != 1) {
                return Err(Error::Precondition(format!(
                    "arc sets at `{}` do not partition the points",
                    g.vertex_id(v)
                )));
            }
        }
        Ok(())
    }

    /// Singleton trivial arc actions pointing at the least point of each `X(a)`.
    pub fn to_gga(&self) -> Result<Gga> {
        self.check()?;
        let g = &self.graph;
        let mut arc_actions: Vec<Option<PermAction>> = vec![None; g.arc_count()];
        let mut embeddings = Vec::new();
        for a in 0..g.arc_count() {
            let r = g.reverse(a);
            if arc_actions[a].is_none() {
                let owner = a.min(r);
                let x = self.arc_sets[owner][0];
                let name = self.vertex_actions[g.terminus(owner)].points().name(x).to_string();
                let act = PermAction::trivial(Arc::new(PointSet::new([name])?));
                arc_actions[r] = Some(act.clone());
                arc_actions[a] = Some(act);
            }
            embeddings.push(vec![self.arc_sets[a][0]]);
        }
        Gga::new(
            self.name.clone(),
            g.clone(),
            self.vertex_actions.clone(),
            arc_actions.into_iter().map(Option::unwrap).collect(),
            embeddings,
            vec![None; g.arc_count()],
        )
    }
}

impl Gga {
    /// One vertex carrying `f`, one self-reverse loop per orbit pointing at the
    /// orbit's least point.
    pub fn from_burger_mozes(name: &str, f: &PermAction) -> Result<Gga> {
        let mut b = GgaBuilder::new(name);
        b.vertex("v", f.clone())?;
        for (i, orbit) in f.orbits().iter().enumerate() {
            let x = orbit[0];
            let y = PermAction::trivial(Arc::new(PointSet::new([f.points().name(x)])?));
            b.self_reverse(format!("a{}", i + 1), "v", y, vec![x], None)?;
        }
        b.build()
    }

    /// Complete bipartite base: a vertex `m<j>` carrying `(M, X)` for each orbit
    /// `j` of `N`, a vertex `n<i>` carrying `(N, Y)` for each orbit `i` of `M`,
    /// and arcs `a<i>_<j>: n<i> → m<j>` hitting the least point of the `i`-th
    /// `M`-orbit, reversed by `b<i>_<j>` hitting the least point of the `j`-th
    /// `N`-orbit.
    pub fn from_box_product(name: &str, m: &PermAction, n: &PermAction) -> Result<Gga> {
        let (om, on) = (m.orbits(), n.orbits());
        let mut b = GgaBuilder::new(name);
        for j in 0..on.len() {
            b.vertex(format!("m{}", j + 1), m.clone())?;
        }
        for i in 0..om.len() {
            b.vertex(format!("n{}", i + 1), n.clone())?;
        }
        for (i, mo) in om.iter().enumerate() {
            for (j, no) in on.iter().enumerate() {
                let y = PermAction::trivial(Arc::new(PointSet::new(["z"])?));
                b.edge(
                    format!("a{}_{}", i + 1, j + 1),
                    format!("b{}_{}", i + 1, j + 1),
                    &format!("n{}", i + 1),
                    &format!("m{}", j + 1),
                    y,
                    vec![mo[0]],
                    vec![no[0]],
                )?;
            }
        }
        b.build()
    }

    pub fn from_local_action_diagram(lad: &LocalActionDiagram) -> Result<Gga> {
        lad.to_gga()
    }

    /// Inverse of [`Gga::from_local_action_diagram`] on free arc-reduced gga's.
    pub fn to_local_action_diagram(&self) -> Result<LocalActionDiagram> {
        if !self.is_free() {
            return Err(Error::Precondition("gga is not free".into()));
        }
        if !self.is_arc_reduced() {
            return Err(Error::Precondition("gga is not arc-reduced".into()));
        }
        let g = self.base();
        let arc_sets = (0..g.arc_count())
            .map(|a| {
                let x = self.embedding(a)[0];
                let act = self.vertex_action(g.terminus(a));
                act.orbits().into_iter().find(|o| o.contains(&x)).expect("orbit")
            })
            .collect();
        Ok(LocalActionDiagram {
            name: self.name().to_string(),
            graph: g.clone(),
            vertex_actions: (0..g.vertex_count()).map(|v| self.vertex_action(v).clone()).collect(),
            arc_sets,
        })
    }
}
