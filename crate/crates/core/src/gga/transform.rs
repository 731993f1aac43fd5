use super::Gga;
use crate::error::Result;
use crate::perm::{PermAction, Permutation, PointSet};
use crate::sgraph::SerreGraph;
use std::collections::HashMap;
use std::sync::Arc;

/// Relates a subdivided gga to the one it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionMap {
    /// For each vertex of the subdivided gga: the self-reverse arc it replaces, if any.
    pub subdivision_vertex: Vec<Option<usize>>,
    /// For each arc of the subdivided gga: the arc of the original it comes from.
    pub arc_origin: Vec<usize>,
    /// For each original vertex: its index in the subdivided gga.
    pub vertex_image: Vec<usize>,
}

impl SubdivisionMap {
    pub fn is_identity(&self) -> bool {
        self.subdivision_vertex.iter().all(Option::is_none)
            && self.arc_origin.iter().enumerate().all(|(i, &a)| i == a)
    }
}

impl Gga {
    /// Replaces each self-reverse arc `a` at `v` by a vertex `a~` with points
    /// `{+1, -1} × Y(a)` (named `+:y`, `-:y`) and an arc pair `a: a~ → v`,
    /// `a~r: v → a~`.
    pub fn subdivide_self_reverse(&self) -> Result<(Gga, SubdivisionMap)> {
        let g = self.base();
        let mut base = SerreGraph::new();
        let mut vertex_actions = Vec::new();
        let mut arc_actions = Vec::new();
        let mut embeddings = Vec::new();
        let mut inversions = Vec::new();
        let mut map = SubdivisionMap {
            subdivision_vertex: Vec::new(),
            arc_origin: Vec::new(),
            vertex_image: Vec::new(),
        };
        for v in 0..g.vertex_count() {
            map.vertex_image.push(base.add_vertex(g.vertex_id(v))?);
            map.subdivision_vertex.push(None);
            vertex_actions.push(self.vertex_action(v).clone());
        }
        let mut new_index = vec![usize::MAX; g.arc_count()];
        for a in 0..g.arc_count() {
            if g.is_self_reverse(a) {
                continue;
            }
            let r = g.reverse(a);
            if r < a {
                continue;
            }
            let (x, y) = base.add_edge(g.arc_id(a), g.arc_id(r), g.origin(a), g.terminus(a))?;
            new_index[a] = x;
            new_index[r] = y;
        }
        // arcs were added pairwise, so lay out their data by new index
        let mut order: Vec<usize> = (0..g.arc_count()).filter(|&a| !g.is_self_reverse(a)).collect();
        order.sort_by_key(|&a| new_index[a]);
        let data: Vec<(PermAction, Vec<usize>, usize)> = order
            .iter()
            .map(|&a| (self.arc_action(a).clone(), self.embedding(a).to_vec(), a))
            .collect();
        for (h, e, a) in data {
            arc_actions.push(h);
            embeddings.push(e);
            inversions.push(None);
            map.arc_origin.push(a);
        }
        for a in 0..g.arc_count() {
            if !g.is_self_reverse(a) {
                continue;
            }
            let h = self.arc_action(a);
            let n = h.degree();
            let yn = h.points();
            let names: Vec<String> = (0..n)
                .map(|y| format!("+:{}", yn.name(y)))
                .chain((0..n).map(|y| format!("-:{}", yn.name(y))))
                .collect();
            let points = Arc::new(PointSet::new(names)?);
            let doubled = |k: &Permutation| {
                let imgs = (0..2 * n).map(|p| if p < n { k.apply(p) } else { n + k.apply(p - n) });
                Permutation::from_images(imgs.collect()).expect("bijection")
            };
            let ha = self.inversion(a);
            let h_plus = Permutation::from_images(
                (0..2 * n).map(|p| if p < n { n + ha.apply(p) } else { ha.apply(p - n) }).collect(),
            )?;
            let mut gens: Vec<Permutation> = h.generators().iter().map(doubled).collect();
            gens.push(h_plus);
            let va = base.add_vertex(format!("{}~", g.arc_id(a)))?;
            vertex_actions.push(PermAction::new(points, gens)?);
            map.subdivision_vertex.push(Some(a));
            base.add_edge(g.arc_id(a), format!("{}~r", g.arc_id(a)), va, g.terminus(a))?;
            arc_actions.push(h.clone());
            arc_actions.push(h.clone());
            embeddings.push(self.embedding(a).to_vec());
            embeddings.push((0..n).collect());
            inversions.push(None);
            inversions.push(None);
            map.arc_origin.push(a);
            map.arc_origin.push(a);
        }
        let out = Gga::new(self.name(), base, vertex_actions, arc_actions, embeddings, inversions)?;
        Ok((out, map))
    }

    /// Restricts every vertex action to the union of its adhesion sets.
    pub fn reduce(&self) -> Result<Gga> {
        let g = self.base();
        let aug = self.augmented();
        let mut keep: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
        for b in 0..aug.arc_count() {
            keep[aug.terminus(b)].extend(&aug.adhesion[b]);
        }
        let mut changed = false;
        let mut actions = Vec::new();
        let mut position: Vec<HashMap<usize, usize>> = Vec::new();
        for v in 0..g.vertex_count() {
            let k = &mut keep[v];
            k.sort_unstable();
            k.dedup();
            let act = self.vertex_action(v);
            if k.len() == act.degree() {
                actions.push(act.clone());
            } else {
                changed = true;
                actions.push(act.induced_action_on_subset(k)?);
            }
            position.push(k.iter().enumerate().map(|(i, &x)| (x, i)).collect());
        }
        if !changed {
            return Ok(self.clone());
        }
        let embeddings = (0..g.arc_count())
            .map(|a| self.embedding(a).iter().map(|x| position[g.terminus(a)][x]).collect())
            .collect();
        self.rebuilt(actions, embeddings)
    }

    /// Each point lies in exactly one adhesion set.
    pub fn is_arc_reduced(&self) -> bool {
        let aug = self.augmented();
        let mut count: Vec<Vec<usize>> =
            (0..self.base().vertex_count()).map(|v| vec![0; self.vertex_action(v).degree()]).collect();
        for b in 0..aug.arc_count() {
            for &x in &aug.adhesion[b] {
                count[aug.terminus(b)][x] += 1;
            }
        }
        count.iter().flatten().all(|&c| c == 1)
    }

    /// Replaces `X(v)` by the disjoint union of its adhesion sets, tagging each
    /// point by the `Δ+` arc owning the set (`b|x`).
    pub fn arc_reduce(&self) -> Result<Gga> {
        if self.is_arc_reduced() {
            return Ok(self.clone());
        }
        let g = self.base();
        let aug = self.augmented();
        let mut actions = Vec::new();
        // (b, x) -> new index, per vertex
        let mut slot: Vec<HashMap<(usize, usize), usize>> = Vec::new();
        for v in 0..g.vertex_count() {
            let mut names = Vec::new();
            let mut idx = HashMap::new();
            let act = self.vertex_action(v);
            for &b in aug.star(v) {
                for &x in &aug.adhesion[b] {
                    idx.insert((b, x), names.len());
                    names.push(format!("{}|{}", aug.arc_id(b), act.points().name(x)));
                }
            }
            let owner: HashMap<(usize, Vec<usize>), usize> = aug
                .star(v)
                .iter()
                .map(|&b| ((aug.rho[b], aug.adhesion[b].clone()), b))
                .collect();
            let mut gens = Vec::new();
            for gen in act.generators() {
                let mut images = vec![0; names.len()];
                for &b in aug.star(v) {
                    let mut img: Vec<usize> = aug.adhesion[b].iter().map(|&x| gen.apply(x)).collect();
                    img.sort_unstable();
                    let b2 = owner[&(aug.rho[b], img)];
                    for &x in &aug.adhesion[b] {
                        images[idx[&(b, x)]] = idx[&(b2, gen.apply(x))];
                    }
                }
                let p = Permutation::from_images(images)?;
                if !p.is_identity() && !gens.contains(&p) {
                    gens.push(p);
                }
            }
            actions.push(PermAction::new(Arc::new(PointSet::new(names)?), gens)?);
            slot.push(idx);
        }
        let embeddings = (0..g.arc_count())
            .map(|a| {
                let b = aug.fiber(a)[0];
                self.embedding(a).iter().map(|&x| slot[g.terminus(a)][&(b, x)]).collect()
            })
            .collect();
        self.rebuilt(actions, embeddings)
    }

    fn rebuilt(&self, actions: Vec<PermAction>, embeddings: Vec<Vec<usize>>) -> Result<Gga> {
        let g = self.base();
        Gga::new(
            self.name(),
            g.clone(),
            actions,
            (0..g.arc_count()).map(|a| self.arc_action(a).clone()).collect(),
            embeddings,
            (0..g.arc_count()).map(|a| self.raw_inversion(a).cloned()).collect(),
        )
    }
}
