use super::{PermAction, Permutation};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// An injection `Φ: Y → X` from a source action `(H, Y)` into a target `(G, X)`.
#[derive(Clone, Copy, Debug)]
pub struct ActionEmbedding<'a> {
    pub source: &'a PermAction,
    pub target: &'a PermAction,
    /// `point_map[y]` is the index of `Φ(y)` in the target points.
    pub point_map: &'a [usize],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingFailure {
    /// The point map has the wrong length, leaves the target, or is not injective.
    BadPointMap,
    /// This source element has no lift into the target group.
    NotLifted(Permutation),
    /// This target element stabilizes the image but restricts outside the source group.
    NotRestricted(Permutation),
}

impl<'a> ActionEmbedding<'a> {
    pub fn new(source: &'a PermAction, target: &'a PermAction, point_map: &'a [usize]) -> Self {
        ActionEmbedding { source, target, point_map }
    }

    /// Sorted image `Φ(Y)`.
    pub fn image(&self) -> Vec<usize> {
        let mut v = self.point_map.to_vec();
        v.sort_unstable();
        v
    }

    fn point_map_ok(&self) -> bool {
        if self.point_map.len() != self.source.degree() {
            return false;
        }
        let mut seen = vec![false; self.target.degree()];
        self.point_map.iter().all(|&x| x < seen.len() && !std::mem::replace(&mut seen[x], true))
    }

    /// Checks both directions of the embedding condition.
    pub fn check(&self) -> std::result::Result<(), EmbeddingFailure> {
        if !self.point_map_ok() {
            return Err(EmbeddingFailure::BadPointMap);
        }
        for h in self.source.generators() {
            let pairs: Vec<(usize, usize)> = (0..self.source.degree())
                .map(|y| (self.point_map[y], self.point_map[h.apply(y)]))
                .collect();
            if self.target.first_mapping(&pairs).is_none() {
                return Err(EmbeddingFailure::NotLifted(h.clone()));
            }
        }
        for g in self.target.setwise_stabilizer_elements(&self.image()) {
            let r = self.pull_back(&g);
            if !self.source.contains(&r) {
                return Err(EmbeddingFailure::NotRestricted(g));
            }
        }
        Ok(())
    }

    pub fn holds(&self) -> bool {
        self.check().is_ok()
    }

    /// `Φ⁻¹ g Φ`, assuming `g` stabilizes the image.
    fn pull_back(&self, g: &Permutation) -> Permutation {
        let inv: HashMap<usize, usize> =
            self.point_map.iter().enumerate().map(|(y, &x)| (x, y)).collect();
        let images = (0..self.source.degree()).map(|y| inv[&g.apply(self.point_map[y])]).collect();
        Permutation::from_images(images).expect("restriction of a bijection")
    }

    /// The unique `r` with `g ∘ Φ = Φ ∘ r`.
    pub fn restrict(&self, g: &Permutation) -> Result<Permutation> {
        if g.degree() != self.target.degree() {
            return Err(Error::DomainMismatch("element not on the target points".into()));
        }
        if !PermAction::stabilizes_set(g, self.point_map) {
            return Err(Error::NotStabilized(format!(
                "{} does not stabilize the embedded image",
                self.target.fmt_element(g)
            )));
        }
        let r = self.pull_back(g);
        if !self.source.contains(&r) {
            return Err(Error::Precondition(format!(
                "{} restricts outside the source group",
                self.target.fmt_element(g)
            )));
        }
        Ok(r)
    }

    /// `Φ r Φ⁻¹` as a partial map, listed as `(Φ(y), Φ(r(y)))` pairs.
    pub fn push_forward_pairs(&self, r: &Permutation) -> Vec<(usize, usize)> {
        (0..self.source.degree()).map(|y| (self.point_map[y], self.point_map[r.apply(y)])).collect()
    }
}

/// A point bijection conjugating one permutation group onto another, with the
/// induced bijection between canonical element lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionIsomorphism {
    /// `point_map[x]` is the image in the second action of point `x`.
    pub point_map: Vec<usize>,
    /// `group_map[i]` is the rank in the second action of the conjugate of element `i`.
    pub group_map: Vec<usize>,
}

impl ActionIsomorphism {
    /// Builds the group map from a point bijection, if it conjugates `a` onto `b`.
    pub fn from_point_map(a: &PermAction, b: &PermAction, point_map: Vec<usize>) -> Option<Self> {
        if a.degree() != b.degree() || a.order() != b.order() || point_map.len() != a.degree() {
            return None;
        }
        let mut seen = vec![false; b.degree()];
        for &y in &point_map {
            if y >= seen.len() || std::mem::replace(&mut seen[y], true) {
                return None;
            }
        }
        let group_map = a
            .elements()
            .iter()
            .map(|g| b.rank(&g.conjugate_by(&point_map)))
            .collect::<Option<Vec<_>>>()?;
        Some(ActionIsomorphism { point_map, group_map })
    }

    /// Checks `φ(h)(Φ(y)) = Φ(h(y))` for all `h`, `y` and bijectivity of both maps.
    pub fn verify(&self, a: &PermAction, b: &PermAction) -> bool {
        if self.group_map.len() != a.order() || a.order() != b.order() {
            return false;
        }
        let mut seen = vec![false; b.order()];
        for (i, h) in a.elements().iter().enumerate() {
            let j = self.group_map[i];
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return false;
            }
            let img = &b.elements()[j];
            if (0..a.degree()).any(|y| img.apply(self.point_map[y]) != self.point_map[h.apply(y)]) {
                return false;
            }
        }
        true
    }

    pub fn inverse(&self, a: &PermAction, b: &PermAction) -> Option<ActionIsomorphism> {
        let mut inv = vec![0; self.point_map.len()];
        for (x, &y) in self.point_map.iter().enumerate() {
            inv[y] = x;
        }
        ActionIsomorphism::from_point_map(b, a, inv)
    }
}

/// Per-point data preserved by any isomorphism of actions.
fn point_invariants(a: &PermAction) -> Vec<(usize, usize)> {
    let orbits = a.orbits();
    let mut orbit_len = vec![0; a.degree()];
    for o in &orbits {
        for &x in o {
            orbit_len[x] = o.len();
        }
    }
    (0..a.degree()).map(|x| (orbit_len[x], a.order() / orbit_len[x])).collect()
}

fn search(
    a: &PermAction,
    b: &PermAction,
    limit: usize,
) -> Vec<ActionIsomorphism> {
    let mut out = Vec::new();
    if a.degree() != b.degree() || a.order() != b.order() {
        return out;
    }
    let inv_a = point_invariants(a);
    let inv_b = point_invariants(b);
    let n = a.degree();
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    fn consistent(a: &PermAction, b: &PermAction, map: &[Option<usize>]) -> bool {
        for g in a.generators() {
            let pairs: Vec<(usize, usize)> = (0..map.len())
                .filter_map(|x| Some((map[x]?, map[g.apply(x)]?)))
                .collect();
            if b.first_mapping(&pairs).is_none() {
                return false;
            }
        }
        true
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        x: usize,
        a: &PermAction,
        b: &PermAction,
        inv_a: &[(usize, usize)],
        inv_b: &[(usize, usize)],
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        out: &mut Vec<ActionIsomorphism>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if x == map.len() {
            let pm: Vec<usize> = map.iter().map(|m| m.unwrap()).collect();
            if let Some(iso) = ActionIsomorphism::from_point_map(a, b, pm) {
                out.push(iso);
            }
            return;
        }
        for y in 0..map.len() {
            if used[y] || inv_a[x] != inv_b[y] {
                continue;
            }
            map[x] = Some(y);
            used[y] = true;
            if consistent(a, b, map) {
                go(x + 1, a, b, inv_a, inv_b, map, used, out, limit);
            }
            map[x] = None;
            used[y] = false;
        }
    }
    go(0, a, b, &inv_a, &inv_b, &mut map, &mut used, &mut out, limit);
    out
}

/// Some isomorphism of actions from `a` to `b`, found by backtracking over point
/// bijections. The first one in lexicographic order of point maps is returned.
pub fn actions_isomorphic(a: &PermAction, b: &PermAction) -> Option<ActionIsomorphism> {
    search(a, b, 1).pop()
}

/// Every isomorphism of actions from `a` to `b`, ordered by point map.
pub fn all_action_isomorphisms(a: &PermAction, b: &PermAction) -> Vec<ActionIsomorphism> {
    search(a, b, usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(points: &[&str], gens: &[&str]) -> PermAction {
        PermAction::from_cycles(points, gens).unwrap()
    }

    #[test]
    fn embedding_examples() {
        let c3 = act(&["1", "2", "3"], &["(1 2 3)"]);
        assert!(ActionEmbedding::new(&c3, &c3, &[0, 1, 2]).holds());
        let one = act(&["q"], &[]);
        for x in 0..3 {
            assert!(ActionEmbedding::new(&one, &c3, &[x]).holds());
        }
        let c2 = act(&["1", "2"], &["(1 2)"]);
        let e = ActionEmbedding::new(&c2, &c3, &[0, 1]);
        assert!(matches!(e.check(), Err(EmbeddingFailure::NotLifted(_))));
        // trivial group into S3 on two points fails the restriction direction
        let s3 = act(&["1", "2", "3"], &["(1 2)", "(1 2 3)"]);
        let triv2 = act(&["a", "b"], &[]);
        let e = ActionEmbedding::new(&triv2, &s3, &[0, 1]);
        assert!(matches!(e.check(), Err(EmbeddingFailure::NotRestricted(_))));
        assert_eq!(ActionEmbedding::new(&c2, &c3, &[0, 0]).check(), Err(EmbeddingFailure::BadPointMap));
    }

    #[test]
    fn restrict_examples() {
        let c3 = act(&["1", "2", "3"], &["(1 2 3)"]);
        let e = ActionEmbedding::new(&c3, &c3, &[0, 1, 2]);
        assert!(e.restrict(&c3.identity()).unwrap().is_identity());
        let g = c3.parse_element("(1 2 3)").unwrap();
        assert_eq!(e.restrict(&g).unwrap(), g);

        let signed = act(
            &["1p", "1m", "2p", "2m", "3p", "3m"],
            &["(1p 2m)(1m 2p)(3p 3m)", "(1p 2p 3p)(1m 2m 3m)"],
        );
        let y = act(&["p", "m"], &["(p m)"]);
        let e = ActionEmbedding::new(&y, &signed, &[0, 1]);
        assert!(e.holds());
        let rot = signed.parse_element("(1p 2p 3p)(1m 2m 3m)").unwrap();
        assert!(matches!(e.restrict(&rot), Err(Error::NotStabilized(_))));
    }

    #[test]
    fn isomorphism_examples() {
        let c3 = act(&["1", "2", "3"], &["(1 2 3)"]);
        let id = actions_isomorphic(&c3, &c3).unwrap();
        assert_eq!(id.point_map, vec![0, 1, 2]);
        assert!(id.verify(&c3, &c3));

        let regular = act(&["e", "r", "rr"], &["(e r rr)"]);
        let w = actions_isomorphic(&regular, &c3).unwrap();
        assert!(w.verify(&regular, &c3));

        let c4 = act(&["1", "2", "3", "4"], &["(1 2 3 4)"]);
        let v4 = act(&["1", "2", "3", "4"], &["(1 2)(3 4)", "(1 3)(2 4)"]);
        assert!(actions_isomorphic(&c4, &v4).is_none());

        let s3 = act(&["1", "2", "3"], &["(1 2)", "(1 2 3)"]);
        assert_eq!(all_action_isomorphisms(&s3, &s3).len(), 6);
        assert_eq!(all_action_isomorphisms(&c3, &c3).len(), 6);
    }

    #[test]
    fn isomorphism_inverse() {
        let a = act(&["e", "r", "rr"], &["(e r rr)"]);
        let b = act(&["1", "2", "3"], &["(1 3 2)"]);
        let w = actions_isomorphic(&a, &b).unwrap();
        let inv = w.inverse(&a, &b).unwrap();
        assert!(inv.verify(&b, &a));
    }
}
