//! Scaffoldings over truncated covering trees.
//!
//! A scaffolding vertex is a pair (tree vertex `u`, point `x` of `X(π(u))`) and
//! is named `u@x`; a scaffolding arc is a pair (tree arc `c`, point `y` of
//! `Y(π(c))`) named `c@y`. Bundles are indexed by tree vertices and tree arcs.

use crate::covering::{CoveringDiagnostic, CoveringTree};
use crate::error::{Error, Result};
use crate::gga::Gga;
use crate::perm::{PermAction, Permutation};
use crate::sgraph::SerreGraph;
use std::collections::HashMap;
use std::fmt::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PsiClass {
    Adhesion,
    Twisted,
}

impl fmt::Display for PsiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsiClass::Adhesion => "adhesion",
            PsiClass::Twisted => "twisted",
        })
    }
}

/// `Ψ` of an arc bundle: `map[y]` is the point of `X(π(t(c)))` coloured at the
/// terminus of the arc coloured `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiMap {
    pub arc: usize,
    pub map: Vec<usize>,
    /// Every class the map belongs to; both when they coincide.
    pub classes: Vec<PsiClass>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransversalChoice {
    /// `γ_b` as chosen by the augmented digraph.
    First,
    /// The last element in canonical order mapping the base adhesion set onto each translate.
    Last,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScaffoldDiagnostic {
    ArcOutsideBundle { arc: String },
    BundleNotEmpty { bundle: String },
    QuotientNotTree,
    PiNotMorphism { detail: String },
    VertexColouringNotBijective { bundle: String },
    ArcColouringNotBijective { bundle: String },
    ReverseColourMismatch { arc: String },
    ArcBundleNotMatching { bundle: String },
    PsiNotAdhesion { bundle: String },
    PsiTwistMismatch { bundle: String },
    AdhesionUniqueness { vertex: String, arc: String, set: String, found: usize },
}

impl fmt::Display for ScaffoldDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScaffoldDiagnostic::*;
        match self {
            ArcOutsideBundle { arc } => write!(f, "arc-outside-bundle: `{arc}`"),
            BundleNotEmpty { bundle } => write!(f, "bundle-not-empty: `{bundle}`"),
            QuotientNotTree => write!(f, "quotient-not-tree"),
            PiNotMorphism { detail } => write!(f, "pi-not-morphism: {detail}"),
            VertexColouringNotBijective { bundle } => write!(f, "vertex-colouring-not-bijective: `{bundle}`"),
            ArcColouringNotBijective { bundle } => write!(f, "arc-colouring-not-bijective: `{bundle}`"),
            ReverseColourMismatch { arc } => write!(f, "reverse-colour-mismatch: `{arc}`"),
            ArcBundleNotMatching { bundle } => write!(f, "arc-bundle-not-matching: `{bundle}`"),
            PsiNotAdhesion { bundle } => write!(f, "psi-not-adhesion: `{bundle}`"),
            PsiTwistMismatch { bundle } => write!(f, "psi-twist-mismatch: `{bundle}`"),
            AdhesionUniqueness { vertex, arc, set, found } => {
                write!(f, "adhesion-uniqueness: vertex `{vertex}`, arc `{arc}`, set {{{set}}}: {found} bundles")
            }
        }
    }
}

impl ScaffoldDiagnostic {
    /// The kebab-case name, without details.
    pub fn kind(&self) -> &'static str {
        use ScaffoldDiagnostic::*;
        match self {
            ArcOutsideBundle { .. } => "arc-outside-bundle",
            BundleNotEmpty { .. } => "bundle-not-empty",
            QuotientNotTree => "quotient-not-tree",
            PiNotMorphism { .. } => "pi-not-morphism",
            VertexColouringNotBijective { .. } => "vertex-colouring-not-bijective",
            ArcColouringNotBijective { .. } => "arc-colouring-not-bijective",
            ReverseColourMismatch { .. } => "reverse-colour-mismatch",
            ArcBundleNotMatching { .. } => "arc-bundle-not-matching",
            PsiNotAdhesion { .. } => "psi-not-adhesion",
            PsiTwistMismatch { .. } => "psi-twist-mismatch",
            AdhesionUniqueness { .. } => "adhesion-uniqueness",
        }
    }
}

/// The graph `T_+`: one vertex per vertex bundle, every scaffolding arc kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedTree {
    pub graph: SerreGraph,
}

#[derive(Clone, Debug)]
pub struct Scaffolding {
    gga: Gga,
    tree: CoveringTree,
    graph: SerreGraph,
    vbundle: Vec<usize>,
    vcolour: Vec<usize>,
    abundle: Vec<usize>,
    acolour: Vec<usize>,
    vlookup: Vec<Vec<Option<usize>>>,
    bundle_arcs: Vec<Vec<usize>>,
    psi: Vec<Option<Vec<usize>>>,
    adhesion: Vec<Option<Vec<usize>>>,
    factors: Vec<Option<(Permutation, PsiClass)>>,
}

impl Scaffolding {
    /// The canonical scaffolding over `tree`.
    pub fn canonical(g: &Gga, tree: &CoveringTree) -> Result<Scaffolding> {
        Self::canonical_with(g, tree, TransversalChoice::First)
    }

    pub fn canonical_with(g: &Gga, tree: &CoveringTree, choice: TransversalChoice) -> Result<Scaffolding> {
        let aug = g.augmented();
        let diags = tree.validate(aug);
        if !diags.is_empty() {
            return Err(Error::InvalidScaffolding(format!(
                "covering tree does not fit the gga: {}",
                diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
            )));
        }
        let maps: Vec<Vec<usize>> = (0..aug.arc_count())
            .map(|b| match choice {
                TransversalChoice::First => aug.chosen_map[b].clone(),
                TransversalChoice::Last => {
                    let a = aug.rho[b];
                    let x = g.vertex_action(aug.terminus(b));
                    let base = g.embedding(a);
                    let gamma = x
                        .elements()
                        .iter()
                        .rev()
                        .find(|h| {
                            let mut img: Vec<usize> = base.iter().map(|&p| h.apply(p)).collect();
                            img.sort_unstable();
                            img == aug.adhesion[b]
                        })
                        .expect("adhesion sets are translates");
                    base.iter().map(|&p| gamma.apply(p)).collect()
                }
            })
            .collect();
        let t = tree.graph();
        let mut graph = SerreGraph::new();
        let (mut vbundle, mut vcolour, mut abundle, mut acolour) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut first = vec![0; t.vertex_count()];
        for u in 0..t.vertex_count() {
            first[u] = graph.vertex_count();
            let x = g.vertex_action(tree.vertex_label(u));
            for p in 0..x.degree() {
                graph.add_vertex(format!("{}@{}", t.vertex_id(u), x.points().name(p)))?;
                vbundle.push(u);
                vcolour.push(p);
            }
        }
        for c in 0..t.arc_count() {
            let d = t.reverse(c);
            if d < c {
                continue;
            }
            // the arc with the smaller id carries the twisted origin
            let (c, d) = if t.arc_id(c) <= t.arc_id(d) { (c, d) } else { (d, c) };
            let a = tree.base_arc(c);
            let y = g.arc_action(a);
            let h = if g.base().is_self_reverse(a) { g.inversion(a) } else { y.identity() };
            let into_c = &maps[tree.arc_label(c)];
            let into_d = &maps[tree.arc_label(d)];
            for q in 0..y.degree() {
                let o = first[t.origin(c)] + into_d[h.apply(q)];
                let tt = first[t.terminus(c)] + into_c[q];
                let name = y.points().name(q);
                graph.add_edge(format!("{}@{name}", t.arc_id(c)), format!("{}@{name}", t.arc_id(d)), o, tt)?;
                abundle.extend([c, d]);
                acolour.extend([q, q]);
            }
        }
        Self::from_parts(g, tree.clone(), graph, vbundle, vcolour, abundle, acolour)
    }

    /// Wraps arbitrary scaffolding data; [`Scaffolding::check`] says whether it is one.
    pub fn from_parts(
        g: &Gga,
        tree: CoveringTree,
        graph: SerreGraph,
        vbundle: Vec<usize>,
        vcolour: Vec<usize>,
        abundle: Vec<usize>,
        acolour: Vec<usize>,
    ) -> Result<Scaffolding> {
        let t = tree.graph();
        let bad = |m: &str| Err(Error::InvalidScaffolding(m.to_string()));
        if vbundle.len() != graph.vertex_count()
            || vcolour.len() != graph.vertex_count()
            || abundle.len() != graph.arc_count()
            || acolour.len() != graph.arc_count()
        {
            return bad("bundle and colour data do not match the graph");
        }
        if vbundle.iter().any(|&u| u >= t.vertex_count()) || abundle.iter().any(|&c| c >= t.arc_count()) {
            return bad("bundle index out of range");
        }
        for s in 0..graph.vertex_count() {
            if vcolour[s] >= g.vertex_action(tree.vertex_label(vbundle[s])).degree() {
                return bad("vertex colour out of range");
            }
        }
        for e in 0..graph.arc_count() {
            if acolour[e] >= g.arc_action(tree.base_arc(abundle[e])).degree() {
                return bad("arc colour out of range");
            }
        }
        let mut vlookup: Vec<Vec<Option<usize>>> = (0..t.vertex_count())
            .map(|u| vec![None; g.vertex_action(tree.vertex_label(u)).degree()])
            .collect();
        for s in 0..graph.vertex_count() {
            vlookup[vbundle[s]][vcolour[s]].get_or_insert(s);
        }
        let mut bundle_arcs = vec![Vec::new(); t.arc_count()];
        for e in 0..graph.arc_count() {
            bundle_arcs[abundle[e]].push(e);
        }
        let mut out = Scaffolding {
            gga: g.clone(),
            tree,
            graph,
            vbundle,
            vcolour,
            abundle,
            acolour,
            vlookup,
            bundle_arcs,
            psi: Vec::new(),
            adhesion: Vec::new(),
            factors: Vec::new(),
        };
        out.psi = (0..out.tree.arc_count()).map(|c| out.compute_psi(c)).collect();
        out.adhesion = out
            .psi
            .iter()
            .map(|p| {
                p.as_ref().map(|m| {
                    let mut s = m.clone();
                    s.sort_unstable();
                    s
                })
            })
            .collect();
        out.factors = (0..out.tree.arc_count()).map(|c| out.compute_factor(c)).collect();
        Ok(out)
    }

    /// `Ψ` of the bundle, if the bundle colouring is a bijection and the
    /// termini are distinct.
    fn compute_psi(&self, c: usize) -> Option<Vec<usize>> {
        let n = self.gga.arc_action(self.tree.base_arc(c)).degree();
        let arcs = &self.bundle_arcs[c];
        if arcs.len() != n {
            return None;
        }
        let mut map = vec![usize::MAX; n];
        let mut hit = vec![false; self.gga.vertex_action(self.tree.vertex_label(self.tree.graph().terminus(c))).degree()];
        for &e in arcs {
            let y = self.acolour[e];
            let x = self.vcolour[self.graph.terminus(e)];
            if map[y] != usize::MAX || hit[x] {
                return None;
            }
            map[y] = x;
            hit[x] = true;
        }
        Some(map)
    }

    /// First `h` in canonical order with `Ψ = h∘Φ_a` (adhesion) or, failing
    /// that, `Ψ = h∘Φ_a∘h_a` (twisted).
    fn compute_factor(&self, c: usize) -> Option<(Permutation, PsiClass)> {
        let psi = self.psi[c].as_ref()?;
        let a = self.tree.base_arc(c);
        let x = self.gga.vertex_action(self.gga.base().terminus(a));
        let phi = self.gga.embedding(a);
        let pairs: Vec<(usize, usize)> = (0..psi.len()).map(|y| (phi[y], psi[y])).collect();
        if let Some(h) = x.first_mapping(&pairs) {
            return Some((h, PsiClass::Adhesion));
        }
        if self.gga.base().is_self_reverse(a) {
            let ha = self.gga.inversion(a);
            let pairs: Vec<(usize, usize)> = (0..psi.len()).map(|y| (phi[ha.apply(y)], psi[y])).collect();
            if let Some(h) = x.first_mapping(&pairs) {
                return Some((h, PsiClass::Twisted));
            }
        }
        None
    }

    pub fn gga(&self) -> &Gga {
        &self.gga
    }

    pub fn tree(&self) -> &CoveringTree {
        &self.tree
    }

    pub fn graph(&self) -> &SerreGraph {
        &self.graph
    }

    pub fn vertex_bundle(&self, s: usize) -> usize {
        self.vbundle[s]
    }

    /// `p` on vertices: a point index of `X(π(bundle))`.
    pub fn vertex_colour(&self, s: usize) -> usize {
        self.vcolour[s]
    }

    pub fn arc_bundle(&self, e: usize) -> usize {
        self.abundle[e]
    }

    pub fn arc_colour(&self, e: usize) -> usize {
        self.acolour[e]
    }

    /// The scaffolding vertex in bundle `u` coloured `x`.
    pub fn vertex_at(&self, u: usize, x: usize) -> Option<usize> {
        self.vlookup[u].get(x).copied().flatten()
    }

    pub fn bundle_vertices(&self, u: usize) -> Vec<usize> {
        self.vlookup[u].iter().flatten().copied().collect()
    }

    pub fn bundle_arcs(&self, c: usize) -> &[usize] {
        &self.bundle_arcs[c]
    }

    /// The scaffolding arc in bundle `c` coloured `y`.
    pub fn arc_at(&self, c: usize, y: usize) -> Option<usize> {
        self.bundle_arcs[c].iter().copied().find(|&e| self.acolour[e] == y)
    }

    /// The action `(G(π(u)), X(π(u)))` at a tree vertex.
    pub fn vertex_action(&self, u: usize) -> &PermAction {
        self.gga.vertex_action(self.tree.vertex_label(u))
    }

    /// The action `(H(π(c)), Y(π(c)))` at a tree arc.
    pub fn arc_action(&self, c: usize) -> &PermAction {
        self.gga.arc_action(self.tree.base_arc(c))
    }

    pub fn psi_map(&self, c: usize) -> Option<&[usize]> {
        self.psi[c].as_deref()
    }

    /// `Ψ_c(Y)` as a sorted point set.
    pub fn adhesion_image(&self, c: usize) -> Option<&[usize]> {
        self.adhesion[c].as_deref()
    }

    /// `(h, class)` with `Ψ_c = h∘Φ_a` or `Ψ_c = h∘Φ_a∘h_a`, `h` least in canonical order.
    pub fn factor(&self, c: usize) -> Option<&(Permutation, PsiClass)> {
        self.factors[c].as_ref()
    }

    /// `Ψ` of a bundle and every class it belongs to.
    pub fn psi(&self, c: usize) -> Result<PsiMap> {
        let map = self.psi[c]
            .clone()
            .ok_or_else(|| Error::InvalidScaffolding(format!("bundle `{}` is not a matching", self.tree.arc_id(c))))?;
        let a = self.tree.base_arc(c);
        let x = self.gga.vertex_action(self.gga.base().terminus(a));
        let phi = self.gga.embedding(a);
        let mut classes = Vec::new();
        let pairs: Vec<(usize, usize)> = (0..map.len()).map(|y| (phi[y], map[y])).collect();
        if x.first_mapping(&pairs).is_some() {
            classes.push(PsiClass::Adhesion);
        }
        if self.gga.base().is_self_reverse(a) {
            let ha = self.gga.inversion(a);
            let pairs: Vec<(usize, usize)> = (0..map.len()).map(|y| (phi[ha.apply(y)], map[y])).collect();
            if x.first_mapping(&pairs).is_some() {
                classes.push(PsiClass::Twisted);
            }
        }
        if classes.is_empty() {
            return Err(Error::InvalidScaffolding(format!(
                "`Ψ` of bundle `{}` is neither an adhesion map nor a twisted one",
                self.tree.arc_id(c)
            )));
        }
        Ok(PsiMap { arc: c, map, classes })
    }

    /// Every failed condition; empty for a scaffolding. The existence and
    /// uniqueness of bundles per adhesion set is only asserted where the tree
    /// vertex is settled (interior, or with a complete star).
    pub fn check(&self) -> Vec<ScaffoldDiagnostic> {
        use ScaffoldDiagnostic::*;
        let t = self.tree.graph();
        let g = &self.gga;
        let mut out = Vec::new();
        for e in 0..self.graph.arc_count() {
            let c = self.abundle[e];
            let (o, tt) = (self.vbundle[self.graph.origin(e)], self.vbundle[self.graph.terminus(e)]);
            if o == tt {
                out.push(BundleNotEmpty { bundle: t.vertex_id(o).into() });
            }
            if o != t.origin(c) || tt != t.terminus(c) || self.abundle[self.graph.reverse(e)] != t.reverse(c) {
                out.push(ArcOutsideBundle { arc: self.graph.arc_id(e).into() });
            }
        }
        if !t.is_tree() || self.bundle_arcs.iter().any(|b| b.is_empty()) || !self.graph.is_valid() {
            out.push(QuotientNotTree);
        }
        for d in self.tree.validate(g.augmented()) {
            match d {
                CoveringDiagnostic::StarNotBijective { .. } | CoveringDiagnostic::NotATree => {}
                other => out.push(PiNotMorphism { detail: other.to_string() }),
            }
        }
        for u in 0..t.vertex_count() {
            let n = self.vertex_action(u).degree();
            let mut seen = vec![0; n];
            let members = self.vbundle.iter().enumerate().filter(|p| *p.1 == u).map(|p| p.0);
            for s in members {
                seen[self.vcolour[s]] += 1;
            }
            if seen.iter().any(|&k| k != 1) {
                out.push(VertexColouringNotBijective { bundle: t.vertex_id(u).into() });
            }
        }
        for c in 0..t.arc_count() {
            let n = self.arc_action(c).degree();
            let mut seen = vec![0; n];
            for &e in &self.bundle_arcs[c] {
                seen[self.acolour[e]] += 1;
            }
            if seen.iter().any(|&k| k != 1) {
                out.push(ArcColouringNotBijective { bundle: t.arc_id(c).into() });
            } else if self.psi[c].is_none() {
                out.push(ArcBundleNotMatching { bundle: t.arc_id(c).into() });
            }
        }
        for e in 0..self.graph.arc_count() {
            if self.acolour[e] != self.acolour[self.graph.reverse(e)] {
                out.push(ReverseColourMismatch { arc: self.graph.arc_id(e).into() });
            }
        }
        for c in 0..t.arc_count() {
            if self.psi[c].is_none() {
                continue;
            }
            let a = self.tree.base_arc(c);
            let classes = self.psi(c).map(|p| p.classes).unwrap_or_default();
            if classes.is_empty() {
                out.push(PsiNotAdhesion { bundle: t.arc_id(c).into() });
                continue;
            }
            if !g.base().is_self_reverse(a) {
                if !classes.contains(&PsiClass::Adhesion) {
                    out.push(PsiNotAdhesion { bundle: t.arc_id(c).into() });
                }
                continue;
            }
            let d = t.reverse(c);
            if d < c || self.psi[d].is_none() {
                continue;
            }
            let other = self.psi(d).map(|p| p.classes).unwrap_or_default();
            let fits = |x: PsiClass, y: PsiClass| classes.contains(&x) && other.contains(&y);
            if !other.is_empty() && !(fits(PsiClass::Adhesion, PsiClass::Twisted) || fits(PsiClass::Twisted, PsiClass::Adhesion)) {
                out.push(PsiTwistMismatch { bundle: t.arc_id(c).into() });
            }
        }
        for u in 0..t.vertex_count() {
            if !self.tree.is_settled(u) {
                continue;
            }
            let v = self.tree.vertex_label(u);
            let x = g.vertex_action(v);
            for a in 0..g.base().arc_count() {
                if g.base().terminus(a) != v {
                    continue;
                }
                for set in x.orbit_of_set(g.embedding(a)).unwrap_or_default() {
                    let found = t
                        .star(u)
                        .iter()
                        .filter(|&&c| self.tree.base_arc(c) == a && self.adhesion[c].as_deref() == Some(&set[..]))
                        .count();
                    if found != 1 {
                        let names: Vec<&str> = set.iter().map(|&p| x.points().name(p)).collect();
                        out.push(AdhesionUniqueness {
                            vertex: t.vertex_id(u).into(),
                            arc: g.base().arc_id(a).into(),
                            set: names.join(","),
                            found,
                        });
                    }
                }
            }
        }
        out
    }

    /// Collapses each vertex bundle to a vertex and keeps every arc.
    pub fn collapse_to_t_plus(&self) -> Result<AugmentedTree> {
        let t = self.tree.graph();
        let mut graph = SerreGraph::new();
        for u in 0..t.vertex_count() {
            graph.add_vertex(t.vertex_id(u))?;
        }
        for e in 0..self.graph.arc_count() {
            let (o, tt) = (self.vbundle[self.graph.origin(e)], self.vbundle[self.graph.terminus(e)]);
            graph.add_arc_raw(self.graph.arc_id(e), o, tt, self.graph.reverse(e))?;
        }
        Ok(AugmentedTree { graph })
    }

    /// Copy with the arc `e` and its reverse removed.
    pub fn without_arc(&self, e: usize) -> Result<Scaffolding> {
        let r = self.graph.reverse(e);
        let keep: Vec<usize> = (0..self.graph.arc_count()).filter(|&a| a != e && a != r).collect();
        self.rebuilt(&keep, |a| (self.graph.origin(a), self.graph.terminus(a)), self.vcolour.clone())
    }

    /// Copy with the colours of two vertices exchanged.
    pub fn with_swapped_colours(&self, s1: usize, s2: usize) -> Result<Scaffolding> {
        let mut colours = self.vcolour.clone();
        colours.swap(s1, s2);
        let all: Vec<usize> = (0..self.graph.arc_count()).collect();
        self.rebuilt(&all, |a| (self.graph.origin(a), self.graph.terminus(a)), colours)
    }

    /// Copy with the terminus of `e` (and the origin of its reverse) moved to `s`.
    pub fn with_rewired_terminus(&self, e: usize, s: usize) -> Result<Scaffolding> {
        let r = self.graph.reverse(e);
        let all: Vec<usize> = (0..self.graph.arc_count()).collect();
        self.rebuilt(
            &all,
            |a| {
                let (mut o, mut t) = (self.graph.origin(a), self.graph.terminus(a));
                if a == e {
                    t = s;
                }
                if a == r {
                    o = s;
                }
                (o, t)
            },
            self.vcolour.clone(),
        )
    }

    fn rebuilt(
        &self,
        keep: &[usize],
        ends: impl Fn(usize) -> (usize, usize),
        vcolour: Vec<usize>,
    ) -> Result<Scaffolding> {
        let mut graph = SerreGraph::new();
        for s in 0..self.graph.vertex_count() {
            graph.add_vertex(self.graph.vertex_id(s))?;
        }
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        for &a in keep {
            let (o, t) = ends(a);
            graph.add_arc_raw(self.graph.arc_id(a), o, t, pos[&self.graph.reverse(a)])?;
        }
        let abundle = keep.iter().map(|&a| self.abundle[a]).collect();
        let acolour = keep.iter().map(|&a| self.acolour[a]).collect();
        Scaffolding::from_parts(&self.gga, self.tree.clone(), graph, self.vbundle.clone(), vcolour, abundle, acolour)
    }

    /// Bundles as clusters, arcs pairs as edges, colours in the labels.
    pub fn to_dot(&self) -> String {
        let t = self.tree.graph();
        let q = |s: &str| format!("\"{}\"", s.replace('"', "\\\""));
        let mut s = String::new();
        let _ = writeln!(s, "graph {} {{", q(&format!("{} scaffolding", self.gga.name())));
        for u in 0..t.vertex_count() {
            let _ = writeln!(s, "  subgraph {} {{", q(&format!("cluster {}", t.vertex_id(u))));
            let _ = writeln!(
                s,
                "    label={};",
                q(&format!("{} : {}", t.vertex_id(u), self.gga.base().vertex_id(self.tree.vertex_label(u))))
            );
            for v in self.bundle_vertices(u) {
                let colour = self.vertex_action(u).points().name(self.vcolour[v]);
                let _ = writeln!(s, "    {} [label={}];", q(self.graph.vertex_id(v)), q(colour));
            }
            s.push_str("  }\n");
        }
        for e in 0..self.graph.arc_count() {
            let r = self.graph.reverse(e);
            if r < e {
                continue;
            }
            let colour = self.arc_action(self.abundle[e]).points().name(self.acolour[e]);
            let _ = writeln!(
                s,
                "  {} -- {} [label={}];",
                q(self.graph.vertex_id(self.graph.origin(e))),
                q(self.graph.vertex_id(self.graph.terminus(e))),
                q(colour)
            );
        }
        s.push_str("}\n");
        s
    }

    /// Text form, read back by [`Scaffolding::parse`].
    pub fn to_text(&self) -> String {
        let t = self.tree.graph();
        let g = &self.gga;
        let aug = g.augmented();
        let mut s = String::from("scaffolding\n");
        for u in 0..t.vertex_count() {
            let kind = if self.tree.is_interior(u) { "interior" } else { "frontier" };
            let _ = writeln!(
                s,
                "bundle {} label {} {kind}",
                t.vertex_id(u),
                g.base().vertex_id(self.tree.vertex_label(u))
            );
        }
        for c in 0..t.arc_count() {
            let _ = writeln!(
                s,
                "tree-arc {} from {} to {} reverse {} label {}",
                t.arc_id(c),
                t.vertex_id(t.origin(c)),
                t.vertex_id(t.terminus(c)),
                t.arc_id(t.reverse(c)),
                aug.arc_id(self.tree.arc_label(c))
            );
        }
        for v in 0..self.graph.vertex_count() {
            let u = self.vbundle[v];
            let _ = writeln!(
                s,
                "vertex {} bundle {} colour {}",
                self.graph.vertex_id(v),
                t.vertex_id(u),
                self.vertex_action(u).points().name(self.vcolour[v])
            );
        }
        for e in 0..self.graph.arc_count() {
            let c = self.abundle[e];
            let _ = writeln!(
                s,
                "arc {} from {} to {} reverse {} bundle {} colour {}",
                self.graph.arc_id(e),
                self.graph.vertex_id(self.graph.origin(e)),
                self.graph.vertex_id(self.graph.terminus(e)),
                self.graph.arc_id(self.graph.reverse(e)),
                t.arc_id(c),
                self.arc_action(c).points().name(self.acolour[e])
            );
        }
        s
    }

    /// Reads scaffolding data for `g`:
    ///
    /// ```text
    /// scaffolding
    /// bundle U label V interior|frontier
    /// tree-arc C from U to U2 reverse C2 label B
    /// vertex S bundle U colour X
    /// arc E from S to S2 reverse E2 bundle C colour Y
    /// ```
    ///
    /// The first bundle is the root. Structural problems are parse errors;
    /// scaffolding conditions are left to [`Scaffolding::check`].
    pub fn parse(g: &Gga, text: &str) -> Result<Scaffolding> {
        let aug = g.augmented();
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut tree = SerreGraph::new();
        let mut vlabel = Vec::new();
        let mut interior = Vec::new();
        let mut tree_arcs: Vec<(usize, Vec<String>)> = Vec::new();
        let mut sigma = SerreGraph::new();
        let (mut vbundle, mut vcolour) = (Vec::new(), Vec::new());
        let mut arcs: Vec<(usize, Vec<String>)> = Vec::new();
        let mut header = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let w: Vec<String> = raw.split('#').next().unwrap_or("").split_whitespace().map(str::to_string).collect();
            if w.is_empty() {
                continue;
            }
            if !header {
                if w[0] != "scaffolding" {
                    return Err(err(line, "expected `scaffolding`".into()));
                }
                header = true;
                continue;
            }
            let shape = |n: usize, keys: &[(usize, &str)]| w.len() == n && keys.iter().all(|&(k, s)| w[k] == s);
            match w[0].as_str() {
                "bundle" if shape(5, &[(2, "label")]) => {
                    let v = g.vertex_index(&w[3]).map_err(|e| err(line, e.to_string()))?;
                    tree.add_vertex(&w[1]).map_err(|e| err(line, e.to_string()))?;
                    vlabel.push(v);
                    interior.push(match w[4].as_str() {
                        "interior" => true,
                        "frontier" => false,
                        _ => return Err(err(line, "expected `interior` or `frontier`".into())),
                    });
                }
                "tree-arc" if shape(10, &[(2, "from"), (4, "to"), (6, "reverse"), (8, "label")]) => {
                    tree_arcs.push((line, w));
                }
                "vertex" if shape(6, &[(2, "bundle"), (4, "colour")]) => {
                    let u = tree.vertex_index(&w[3]).ok_or_else(|| err(line, format!("unknown bundle `{}`", w[3])))?;
                    let x = g
                        .vertex_action(vlabel[u])
                        .points()
                        .index_of(&w[5])
                        .ok_or_else(|| err(line, format!("unknown colour `{}`", w[5])))?;
                    sigma.add_vertex(&w[1]).map_err(|e| err(line, e.to_string()))?;
                    vbundle.push(u);
                    vcolour.push(x);
                }
                "arc" if shape(12, &[(2, "from"), (4, "to"), (6, "reverse"), (8, "bundle"), (10, "colour")]) => {
                    arcs.push((line, w));
                }
                _ => return Err(err(line, format!("unrecognised line `{}`", w.join(" ")))),
            }
        }
        if tree.vertex_count() == 0 {
            return Err(err(1, "no bundles".into()));
        }
        let tpos: HashMap<&str, usize> = tree_arcs.iter().enumerate().map(|(i, a)| (a.1[1].as_str(), i)).collect();
        let mut alabel = Vec::new();
        for (line, w) in &tree_arcs {
            let find = |id: &str| tree.vertex_index(id).ok_or_else(|| err(*line, format!("unknown bundle `{id}`")));
            let (o, t) = (find(&w[3])?, find(&w[5])?);
            let r = *tpos.get(w[7].as_str()).ok_or_else(|| err(*line, format!("unknown tree arc `{}`", w[7])))?;
            let b = aug.arc_index(&w[9]).ok_or_else(|| err(*line, format!("unknown augmented arc `{}`", w[9])))?;
            tree.add_arc_raw(&w[1], o, t, r).map_err(|e| err(*line, e.to_string()))?;
            alabel.push(b);
        }
        let ct = CoveringTree::from_parts(aug, tree, 0, usize::MAX, vlabel, alabel)?.with_interior(interior)?;
        let apos: HashMap<&str, usize> = arcs.iter().enumerate().map(|(i, a)| (a.1[1].as_str(), i)).collect();
        let (mut abundle, mut acolour) = (Vec::new(), Vec::new());
        for (line, w) in &arcs {
            let find = |id: &str| sigma.vertex_index(id).ok_or_else(|| err(*line, format!("unknown vertex `{id}`")));
            let (o, t) = (find(&w[3])?, find(&w[5])?);
            let r = *apos.get(w[7].as_str()).ok_or_else(|| err(*line, format!("unknown arc `{}`", w[7])))?;
            let c = ct.graph().arc_index(&w[9]).ok_or_else(|| err(*line, format!("unknown tree arc `{}`", w[9])))?;
            let y = g
                .arc_action(ct.base_arc(c))
                .points()
                .index_of(&w[11])
                .ok_or_else(|| err(*line, format!("unknown colour `{}`", w[11])))?;
            sigma.add_arc_raw(&w[1], o, t, r).map_err(|e| err(*line, e.to_string()))?;
            abundle.push(c);
            acolour.push(y);
        }
        Scaffolding::from_parts(g, ct, sigma, vbundle, vcolour, abundle, acolour)
    }

    /// Builds the canonical scaffolding of the subdivided gga and removes the
    /// subdivision bundles, joining the two arcs through each removed vertex.
    /// `radius` counts edges of the result.
    pub fn subdivided_transfer(g: &Gga, root: usize, radius: usize) -> Result<Scaffolding> {
        if !g.has_self_reverse() {
            return Err(Error::Precondition("the gga has no self-reverse arcs".into()));
        }
        let (g0, map) = g.subdivide_self_reverse()?;
        let tree0 = CoveringTree::build(&g0, map.vertex_image[root], 2 * radius)?;
        let sigma0 = Scaffolding::canonical(&g0, &tree0)?;
        let aug = g.augmented();
        let aug0 = g0.augmented();
        // Δ0+ arc -> Δ+ arc, for arcs ending at original vertices
        let plus_of = |b0: usize| -> usize {
            let a0 = aug0.rho[b0];
            let k = aug0.fiber(a0).iter().position(|&x| x == b0).expect("fibre member");
            aug.fiber(map.arc_origin[a0])[k]
        };
        let t0 = tree0.graph();
        let is_sub = |x: usize| map.subdivision_vertex[tree0.vertex_label(x)].is_some();
        let mut tree = SerreGraph::new();
        let mut new_of = vec![usize::MAX; t0.vertex_count()];
        let mut vlabel = Vec::new();
        for x in tree0.bfs_order() {
            if !is_sub(x) {
                new_of[x] = tree.add_vertex(t0.vertex_id(x))?;
                vlabel.push(tree0.vertex_label(x));
            }
        }
        let orig_vertex = |v0: usize| map.vertex_image.iter().position(|&v| v == v0).expect("original vertex");
        for l in vlabel.iter_mut() {
            *l = orig_vertex(*l);
        }
        let mut alabel = Vec::new();
        // (new arc, Σ0 arc on the terminus side) for the joined arcs
        let mut joined: Vec<(usize, usize, usize)> = Vec::new();
        for c in 0..t0.arc_count() {
            let (o, t) = (t0.origin(c), t0.terminus(c));
            if !is_sub(o) && !is_sub(t) {
                if t0.reverse(c) < c {
                    continue;
                }
                let (x, y) = tree.add_edge(t0.arc_id(c), t0.arc_id(t0.reverse(c)), new_of[o], new_of[t])?;
                alabel.push(plus_of(tree0.arc_label(c)));
                alabel.push(plus_of(tree0.arc_label(t0.reverse(c))));
                joined.push((x, c, usize::MAX));
                joined.push((y, t0.reverse(c), usize::MAX));
            }
        }
        for s in tree0.bfs_order() {
            if !is_sub(s) || t0.star(s).len() != 2 {
                continue;
            }
            let parent_arc = tree0.parent_arc(s).expect("subdivision vertices are never the root");
            let up = t0.terminus(parent_arc);
            let down_in = *t0.star(s).iter().find(|&&c| t0.origin(c) != up).expect("second neighbour");
            let child = t0.origin(down_in);
            // s -> up and s -> child
            let to_up = parent_arc;
            let to_child = t0.reverse(down_in);
            let id = t0.vertex_id(child);
            let (x, y) = tree.add_edge(format!("{id}>"), format!("{id}<"), new_of[child], new_of[up])?;
            alabel.push(plus_of(tree0.arc_label(to_up)));
            alabel.push(plus_of(tree0.arc_label(to_child)));
            // child -> up goes through s: child -> s (down_in) then s -> up
            joined.push((x, to_up, t0.reverse(to_child)));
            joined.push((y, to_child, t0.reverse(to_up)));
        }
        let ct = CoveringTree::from_parts(aug, tree, 0, radius, vlabel, alabel)?;

        let mut sigma = SerreGraph::new();
        let (mut vbundle, mut vcolour) = (Vec::new(), Vec::new());
        let mut sv = vec![usize::MAX; sigma0.graph().vertex_count()];
        for x0 in tree0.bfs_order() {
            if is_sub(x0) {
                continue;
            }
            for s0 in sigma0.bundle_vertices(x0) {
                sv[s0] = sigma.add_vertex(sigma0.graph().vertex_id(s0))?;
                vbundle.push(new_of[x0]);
                vcolour.push(sigma0.vertex_colour(s0));
            }
        }
        let (mut abundle, mut acolour) = (Vec::new(), Vec::new());
        let g0s = sigma0.graph();
        let mut done = vec![false; ct.arc_count()];
        for &(c, last, first) in &joined {
            if done[c] {
                continue;
            }
            let d = ct.graph().reverse(c);
            done[c] = true;
            done[d] = true;
            for &e_last in sigma0.bundle_arcs(last) {
                // e_last: s -> terminus side (or the whole arc when not joined)
                let (origin, colour) = if first == usize::MAX {
                    (sv[g0s.origin(e_last)], sigma0.arc_colour(e_last))
                } else {
                    // `+:y` at the subdivision vertex is joined to `-:y`
                    let at = g0s.origin(e_last);
                    let n = g0.vertex_action(tree0.vertex_label(sigma0.vertex_bundle(at))).degree() / 2;
                    let k = sigma0.vertex_colour(at);
                    let partner = if k < n { k + n } else { k - n };
                    let mid = sigma0
                        .vertex_at(sigma0.vertex_bundle(at), partner)
                        .ok_or_else(|| Error::InvalidScaffolding("subdivision bundle is incomplete".into()))?;
                    let e_first = sigma0
                        .bundle_arcs(first)
                        .iter()
                        .copied()
                        .find(|&e| g0s.terminus(e) == mid)
                        .ok_or_else(|| Error::InvalidScaffolding("subdivision bundle is not a matching".into()))?;
                    (sv[g0s.origin(e_first)], sigma0.arc_colour(e_last))
                };
                let terminus = sv[g0s.terminus(e_last)];
                let name = ct.graph().arc_id(c).to_string();
                let rname = ct.graph().arc_id(d).to_string();
                let cname = g.arc_action(ct.base_arc(c)).points().name(colour).to_string();
                sigma.add_edge(format!("{name}@{cname}"), format!("{rname}@{cname}"), origin, terminus)?;
                abundle.extend([c, d]);
                acolour.extend([colour, colour]);
            }
        }
        Scaffolding::from_parts(g, ct, sigma, vbundle, vcolour, abundle, acolour)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn pairs(s: &Scaffolding) -> Vec<(String, String)> {
        let g = s.graph();
        let mut out: Vec<(String, String)> = (0..g.arc_count())
            .filter(|&e| s.tree().depth(s.vertex_bundle(g.origin(e))) == 0)
            .map(|e| {
                let name = |v: usize| s.vertex_action(s.vertex_bundle(v)).points().name(s.vertex_colour(v)).to_string();
                (name(g.origin(e)), name(g.terminus(e)))
            })
            .collect();
        out.sort();
        out
    }

    fn p(a: &str, b: &str) -> (String, String) {
        (a.into(), b.into())
    }

    #[test]
    fn canonical_matchings() {
        let g = corpus::load("ex-c3-id").unwrap();
        let t = CoveringTree::build(&g, 0, 1).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        assert_eq!(s.graph().vertex_count(), 6);
        assert_eq!(pairs(&s), vec![p("1", "1"), p("2", "2"), p("3", "3")]);
        assert!(s.check().is_empty(), "{:?}", s.check());

        let g = corpus::load("ex-c3-twist").unwrap();
        let t = CoveringTree::build(&g, 0, 1).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        assert_eq!(pairs(&s), vec![p("1", "2"), p("2", "1"), p("3", "3")]);
        assert!(s.check().is_empty(), "{:?}", s.check());
        let mut classes: Vec<PsiClass> = (0..2).map(|c| s.factor(c).unwrap().1).collect();
        classes.sort();
        assert_eq!(classes, vec![PsiClass::Adhesion, PsiClass::Twisted]);
    }

    #[test]
    fn canonical_sizes_and_checks() {
        let g = corpus::load("ex-small").unwrap();
        let t = CoveringTree::build(&g, 0, 1).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        assert_eq!(s.tree().vertex_count(), 2);
        assert_eq!(s.graph().vertex_count(), 11);
        assert!(s.check().is_empty(), "{:?}", s.check());
        for name in ["bm-c3", "bm-s3", "a1-s3", "ex-parity", "gog-c2c2", "box-k21", "lad-c3", "ex-small"] {
            let g = corpus::load(name).unwrap();
            for r in 0..=3 {
                let t = CoveringTree::build(&g, 0, r).unwrap();
                for choice in [TransversalChoice::First, TransversalChoice::Last] {
                    let s = Scaffolding::canonical_with(&g, &t, choice).unwrap();
                    assert!(s.check().is_empty(), "{name} r{r}: {:?}", s.check());
                    let total: usize = (0..t.vertex_count()).map(|u| s.vertex_action(u).degree()).sum();
                    assert_eq!(s.graph().vertex_count(), total);
                }
            }
        }
    }

    #[test]
    fn mutations_are_caught() {
        let g = corpus::load("bm-s3").unwrap();
        let t = CoveringTree::build(&g, 0, 2).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        let kinds = |m: &Scaffolding| m.check().iter().map(|d| d.kind()).collect::<Vec<_>>();

        let m = s.without_arc(0).unwrap();
        assert!(kinds(&m).contains(&"arc-colouring-not-bijective"), "{:?}", kinds(&m));

        let c3 = corpus::load("ex-c3-id").unwrap();
        let s3 = Scaffolding::canonical(&c3, &CoveringTree::build(&c3, 0, 1).unwrap()).unwrap();
        let root = s3.bundle_vertices(0);
        let m = s3.with_swapped_colours(root[0], root[1]).unwrap();
        assert!(kinds(&m).contains(&"psi-not-adhesion"), "{:?}", kinds(&m));

        let e = 0;
        let u = s3.vertex_bundle(s3.graph().terminus(e));
        let other = s3.bundle_vertices(u).into_iter().find(|&v| v != s3.graph().terminus(e)).unwrap();
        let m = s3.with_rewired_terminus(e, other).unwrap();
        assert!(kinds(&m).contains(&"arc-bundle-not-matching"), "{:?}", kinds(&m));
    }

    #[test]
    fn twist_mismatch() {
        // use the identity scaffolding on the twisted gga
        let id = corpus::load("ex-c3-id").unwrap();
        let tw = corpus::load("ex-c3-twist").unwrap();
        let t = CoveringTree::build(&id, 0, 1).unwrap();
        let s = Scaffolding::canonical(&id, &t).unwrap();
        let text = s.to_text();
        let m = Scaffolding::parse(&tw, &text).unwrap();
        let kinds: Vec<&str> = m.check().iter().map(|d| d.kind()).collect();
        assert!(kinds.contains(&"psi-twist-mismatch"), "{kinds:?}");
    }

    #[test]
    fn text_round_trip() {
        let g = corpus::load("ex-small").unwrap();
        let t = CoveringTree::build(&g, 0, 2).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        let back = Scaffolding::parse(&g, &s.to_text()).unwrap();
        assert_eq!(back.to_text(), s.to_text());
        assert!(back.check().is_empty());
        assert!(matches!(Scaffolding::parse(&g, "scaffolding\nbundle v label nope interior\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn collapse_keeps_arcs() {
        let g = corpus::load("bm-c3").unwrap();
        let t = CoveringTree::build(&g, 0, 2).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        let c = s.collapse_to_t_plus().unwrap();
        assert_eq!(c.graph.vertex_count(), t.vertex_count());
        assert_eq!(c.graph.arc_count(), s.graph().arc_count());
        assert!(s.to_dot().contains("cluster"));
    }

    #[test]
    fn transfer_from_subdivision() {
        let mut seen = 0;
        for (name, _) in corpus::FILES {
            let g = corpus::load(name).unwrap();
            if !g.has_self_reverse() {
                continue;
            }
            seen += 1;
            for r in 1..=2 {
                let s = Scaffolding::subdivided_transfer(&g, 0, r).unwrap();
                assert!(s.check().is_empty(), "{name} r{r}: {:?}", s.check());
            }
        }
        assert!(seen >= 3);
        let g = corpus::load("gog-c2c2").unwrap();
        assert!(Scaffolding::subdivided_transfer(&g, 0, 1).is_err());
    }
}
