use super::Gga;
use crate::perm::{all_action_isomorphisms, ActionIsomorphism, PermAction, Permutation};
use crate::sgraph::{for_each_isomorphism, GraphMorphism};
use std::collections::HashMap;

/// A base graph isomorphism with compatible isomorphisms of every vertex and arc action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GgaIsomorphism {
    pub theta: GraphMorphism,
    /// `Θ_v: X(v) → X'(θ(v))`.
    pub vertex_maps: Vec<ActionIsomorphism>,
    /// `Θ_a: Y(a) → Y'(θ(a))`, the same for `a` and its reverse.
    pub arc_maps: Vec<ActionIsomorphism>,
    /// `g'_a` with `Θ_{t(a)} ∘ Φ_a = g'_a ∘ Φ'_{θ(a)} ∘ Θ_a`, so `Ψ_a = g'_a ∘ Φ'_{θ(a)}`.
    pub adhesion_witness: Vec<Permutation>,
}

/// `g'` in `G'(θ(t(a)))` with `Θ_t Φ_a = g' Φ'_{θa} Θ_a`, if any.
fn adhesion_witness(
    target: &PermAction,
    phi: &[usize],
    phi2: &[usize],
    theta_t: &[usize],
    theta_a: &[usize],
) -> Option<Permutation> {
    let pairs: Vec<(usize, usize)> =
        (0..phi.len()).map(|y| (phi2[theta_a[y]], theta_t[phi[y]])).collect();
    target.first_mapping(&pairs)
}

fn inversion_ok(g: &Gga, h: &Gga, a: usize, a2: usize, theta_a: &[usize]) -> bool {
    if !g.base().is_self_reverse(a) {
        return true;
    }
    let moved = g.inversion(a).conjugate_by(theta_a);
    h.arc_action(a2).contains(&h.inversion(a2).inverse().mul(&moved))
}

impl GgaIsomorphism {
    /// Re-checks every condition of the witness.
    pub fn verify(&self, g: &Gga, h: &Gga) -> bool {
        let (bg, bh) = (g.base(), h.base());
        if !self.theta.is_graph_morphism(bg, bh) || !self.theta.is_bijective(bh) {
            return false;
        }
        let vertices_ok = (0..bg.vertex_count()).all(|v| {
            self.vertex_maps[v].verify(g.vertex_action(v), h.vertex_action(self.theta.vertex_map[v]))
        });
        vertices_ok
            && (0..bg.arc_count()).all(|a| {
                let a2 = self.theta.arc_map[a];
                let t = bg.terminus(a);
                let tm = &self.arc_maps[a];
                let w = &self.adhesion_witness[a];
                tm.point_map == self.arc_maps[bg.reverse(a)].point_map
                    && tm.verify(g.arc_action(a), h.arc_action(a2))
                    && h.vertex_action(bh.terminus(a2)).contains(w)
                    && (0..g.arc_action(a).degree()).all(|y| {
                        self.vertex_maps[t].point_map[g.embedding(a)[y]]
                            == w.apply(h.embedding(a2)[tm.point_map[y]])
                    })
                    && inversion_ok(g, h, a, a2, &tm.point_map)
            })
    }
}

/// Searches base graph isomorphisms and per-vertex and per-arc action
/// isomorphisms for one where every `Θ_{t(a)} ∘ Φ_a` is an adhesion map composed
/// with `Θ_a`, and inversion agents correspond up to the arc group.
pub fn gga_isomorphic(g: &Gga, h: &Gga) -> Option<GgaIsomorphism> {
    let (bg, bh) = (g.base(), h.base());
    let mut vcache: HashMap<(usize, usize), Vec<ActionIsomorphism>> = HashMap::new();
    let mut acache: HashMap<(usize, usize), Vec<ActionIsomorphism>> = HashMap::new();
    let reps: Vec<usize> = (0..bg.arc_count()).filter(|&a| bg.reverse(a) >= a).collect();
    let mut found = None;
    for_each_isomorphism(bg, bh, |theta| {
        let vc: Vec<Vec<ActionIsomorphism>> = (0..bg.vertex_count())
            .map(|v| {
                let w = theta.vertex_map[v];
                vcache
                    .entry((v, w))
                    .or_insert_with(|| all_action_isomorphisms(g.vertex_action(v), h.vertex_action(w)))
                    .clone()
            })
            .collect();
        let ac: Vec<Vec<ActionIsomorphism>> = reps
            .iter()
            .map(|&a| {
                let b = theta.arc_map[a];
                acache
                    .entry((a, b))
                    .or_insert_with(|| all_action_isomorphisms(g.arc_action(a), h.arc_action(b)))
                    .clone()
            })
            .collect();
        if vc.iter().any(Vec::is_empty) || ac.iter().any(Vec::is_empty) {
            return true;
        }
        let mut vchoice = vec![0usize; vc.len()];
        found = search_vertices(g, h, theta, &reps, &vc, &ac, 0, &mut vchoice);
        found.is_none()
    });
    found
}

#[allow(clippy::too_many_arguments)]
fn search_vertices(
    g: &Gga,
    h: &Gga,
    theta: &GraphMorphism,
    reps: &[usize],
    vc: &[Vec<ActionIsomorphism>],
    ac: &[Vec<ActionIsomorphism>],
    v: usize,
    choice: &mut Vec<usize>,
) -> Option<GgaIsomorphism> {
    if v == vc.len() {
        let vmaps: Vec<&ActionIsomorphism> = (0..vc.len()).map(|v| &vc[v][choice[v]]).collect();
        let mut arc_maps: Vec<Option<ActionIsomorphism>> = vec![None; g.base().arc_count()];
        let mut witness: Vec<Option<Permutation>> = vec![None; g.base().arc_count()];
        for (i, &a) in reps.iter().enumerate() {
            let bg = g.base();
            let ok = ac[i].iter().find_map(|cand| {
                let mut ws = Vec::new();
                for x in [a, bg.reverse(a)] {
                    let x2 = theta.arc_map[x];
                    let t2 = h.base().terminus(x2);
                    let w = adhesion_witness(
                        h.vertex_action(t2),
                        g.embedding(x),
                        h.embedding(x2),
                        &vmaps[bg.terminus(x)].point_map,
                        &cand.point_map,
                    )?;
                    ws.push((x, w));
                }
                inversion_ok(g, h, a, theta.arc_map[a], &cand.point_map).then_some((cand, ws))
            });
            let (cand, ws) = ok?;
            for (x, w) in ws {
                arc_maps[x] = Some(cand.clone());
                witness[x] = Some(w);
            }
        }
        return Some(GgaIsomorphism {
            theta: theta.clone(),
            vertex_maps: vmaps.into_iter().cloned().collect(),
            arc_maps: arc_maps.into_iter().map(Option::unwrap).collect(),
            adhesion_witness: witness.into_iter().map(Option::unwrap).collect(),
        });
    }
    for i in 0..vc[v].len() {
        choice[v] = i;
        if let Some(w) = search_vertices(g, h, theta, reps, vc, ac, v + 1, choice) {
            return Some(w);
        }
    }
    None
}
