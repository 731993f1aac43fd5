use super::Gga;
use crate::perm::Permutation;
use crate::sgraph::Digraph;

/// The augmented base digraph `Δ+`.
///
/// For every arc `a` of the base graph there is one arc per distinct
/// `a`-adhesion set. The first of them is `a` itself (same id, `γ = 1`), the
/// others are named `a+1`, `a+2`, ... in the order the adhesion sets are met.
#[derive(Clone, Debug)]
pub struct AugmentedDigraph {
    pub plus: Digraph,
    /// Original base arc of each arc.
    pub rho: Vec<usize>,
    /// Adhesion set (sorted point indices in `X(t)`) of each arc.
    pub adhesion: Vec<Vec<usize>>,
    /// `Φ_b = γ_b ∘ Φ_{ρ(b)}`.
    pub chosen_map: Vec<Vec<usize>>,
    pub transversal: Vec<Permutation>,
    pub self_reverse: Vec<bool>,
    /// Reverse of each base arc.
    pub base_reverse: Vec<usize>,
    fibers: Vec<Vec<usize>>,
    stars: Vec<Vec<usize>>,
}

impl AugmentedDigraph {
    pub(crate) fn build(g: &Gga) -> Self {
        let base = g.base();
        let mut plus = Digraph { vertices: base.vertex_ids().to_vec(), arcs: Vec::new() };
        let mut out = AugmentedDigraph {
            plus: Digraph::default(),
            rho: Vec::new(),
            adhesion: Vec::new(),
            chosen_map: Vec::new(),
            transversal: Vec::new(),
            self_reverse: Vec::new(),
            base_reverse: (0..base.arc_count()).map(|a| base.reverse(a)).collect(),
            fibers: vec![Vec::new(); base.arc_count()],
            stars: vec![Vec::new(); base.vertex_count()],
        };
        for a in 0..base.arc_count() {
            let t = base.terminus(a);
            let ga = g.vertex_action(t);
            let phi = g.embedding(a);
            let sets = ga.orbit_of_set(phi).expect("embedding lands in X(t)");
            let first = &sets[0];
            for (k, set) in sets.iter().enumerate() {
                let gamma = if k == 0 {
                    ga.identity()
                } else {
                    let pairs_ok = |h: &&Permutation| {
                        let mut img: Vec<usize> = first.iter().map(|&x| h.apply(x)).collect();
                        img.sort_unstable();
                        img == *set
                    };
                    ga.elements().iter().find(pairs_ok).expect("translate is reached").clone()
                };
                let id = if k == 0 { base.arc_id(a).to_string() } else { format!("{}+{k}", base.arc_id(a)) };
                let b = plus.arcs.len();
                plus.arcs.push((id, base.origin(a), t));
                out.rho.push(a);
                out.adhesion.push(set.clone());
                out.chosen_map.push(phi.iter().map(|&y| gamma.apply(y)).collect());
                out.transversal.push(gamma);
                out.self_reverse.push(base.is_self_reverse(a));
                out.fibers[a].push(b);
                out.stars[t].push(b);
            }
        }
        out.plus = plus;
        out
    }

    pub fn arc_count(&self) -> usize {
        self.rho.len()
    }

    pub fn arc_id(&self, b: usize) -> &str {
        &self.plus.arcs[b].0
    }

    pub fn origin(&self, b: usize) -> usize {
        self.plus.arcs[b].1
    }

    pub fn terminus(&self, b: usize) -> usize {
        self.plus.arcs[b].2
    }

    /// Arcs of `Δ+` over the base arc `a`, in adhesion-set order.
    pub fn fiber(&self, a: usize) -> &[usize] {
        &self.fibers[a]
    }

    /// Arcs of `Δ+` with terminus `v`.
    pub fn star(&self, v: usize) -> &[usize] {
        &self.stars[v]
    }

    pub fn arc_index(&self, id: &str) -> Option<usize> {
        self.plus.arcs.iter().position(|a| a.0 == id)
    }
}
