use super::{Permutation, PointSet};
use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// A finite permutation group on an ordered point set, given by generators.
///
/// Cloning is cheap: the data sits behind an `Arc`.
#[derive(Clone)]
pub struct PermAction(Arc<Inner>);

struct Inner {
    points: Arc<PointSet>,
    generators: Vec<Permutation>,
    elements: OnceLock<Elements>,
}

struct Elements {
    list: Vec<Permutation>,
    rank: HashMap<Permutation, usize>,
}

impl PermAction {
    pub fn new(points: Arc<PointSet>, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            if g.degree() != points.len() {
                return Err(Error::DomainMismatch(format!(
                    "generator of degree {} on {} points",
                    g.degree(),
                    points.len()
                )));
            }
        }
        Ok(PermAction(Arc::new(Inner { points, generators, elements: OnceLock::new() })))
    }

    /// Build from point names and generators in cycle notation.
    pub fn from_cycles<S: AsRef<str>>(points: &[S], generators: &[S]) -> Result<Self> {
        let ps = PointSet::new(points.iter().map(|s| s.as_ref().to_string()))?;
        let gens = generators
            .iter()
            .map(|g| Permutation::parse(g.as_ref(), &ps))
            .collect::<Result<Vec<_>>>()?;
        PermAction::new(Arc::new(ps), gens)
    }

    pub fn trivial(points: Arc<PointSet>) -> Self {
        PermAction::new(points, Vec::new()).expect("no generators")
    }

    /// Subgroup given by an explicit element list (must be closed).
    fn from_element_list(points: Arc<PointSet>, mut list: Vec<Permutation>) -> Self {
        let id = Permutation::identity(points.len());
        list.retain(|g| *g != id);
        list.sort();
        list.dedup();
        let generators = list.clone();
        let mut all = Vec::with_capacity(list.len() + 1);
        all.push(id);
        all.extend(list);
        let rank = all.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let cell = OnceLock::new();
        let _ = cell.set(Elements { list: all, rank });
        PermAction(Arc::new(Inner { points, generators, elements: cell }))
    }

    pub fn points(&self) -> &Arc<PointSet> {
        &self.0.points
    }

    pub fn degree(&self) -> usize {
        self.0.points.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.0.generators
    }

    pub fn ptr_eq(&self, other: &PermAction) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn cache(&self) -> &Elements {
        self.0.elements.get_or_init(|| {
            let id = Permutation::identity(self.degree());
            let mut rank = HashMap::new();
            rank.insert(id.clone(), 0);
            let mut list = vec![id.clone()];
            let mut frontier = vec![id];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for e in &frontier {
                    for g in &self.0.generators {
                        let p = g.mul(e);
                        if !rank.contains_key(&p) {
                            rank.insert(p.clone(), usize::MAX);
                            next.push(p);
                        }
                    }
                }
                next.sort();
                for p in &next {
                    rank.insert(p.clone(), list.len());
                    list.push(p.clone());
                }
                frontier = next;
            }
            Elements { list, rank }
        })
    }

    /// All group elements in canonical order; the identity comes first.
    pub fn elements(&self) -> &[Permutation] {
        &self.cache().list
    }

    pub fn order(&self) -> usize {
        self.elements().len()
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        self.cache().rank.contains_key(g)
    }

    /// Position of `g` in the canonical order.
    pub fn rank(&self, g: &Permutation) -> Option<usize> {
        self.cache().rank.get(g).copied()
    }

    pub fn identity(&self) -> Permutation {
        Permutation::identity(self.degree())
    }

    pub fn parse_element(&self, text: &str) -> Result<Permutation> {
        Permutation::parse(text, &self.0.points)
    }

    pub fn fmt_element(&self, g: &Permutation) -> String {
        g.to_cycle_string(&self.0.points)
    }

    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.0.points.require(n.as_ref())).collect()
    }

    fn check_subset(&self, s: &[usize]) -> Result<()> {
        if let Some(&x) = s.iter().find(|&&x| x >= self.degree()) {
            return Err(Error::NotSubset(format!("point index {x} out of range")));
        }
        Ok(())
    }

    /// Orbits on points, each sorted, ordered by least point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut orb = vec![s];
            let mut i = 0;
            while i < orb.len() {
                let x = orb[i];
                for g in self.generators() {
                    let y = g.apply(x);
                    if !seen[y] {
                        seen[y] = true;
                        orb.push(y);
                    }
                }
                i += 1;
            }
            orb.sort_unstable();
            out.push(orb);
        }
        out
    }

    /// Distinct images `g(S)`, breadth first over the generators starting at `S`.
    /// Each set is returned sorted.
    pub fn orbit_of_set(&self, s: &[usize]) -> Result<Vec<Vec<usize>>> {
        self.check_subset(s)?;
        let mut start = s.to_vec();
        start.sort_unstable();
        start.dedup();
        let mut seen = HashSet::new();
        seen.insert(start.clone());
        let mut out = vec![start.clone()];
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            for g in self.generators() {
                let mut img: Vec<usize> = cur.iter().map(|&x| g.apply(x)).collect();
                img.sort_unstable();
                if seen.insert(img.clone()) {
                    out.push(img.clone());
                    queue.push_back(img);
                }
            }
        }
        Ok(out)
    }

    pub fn stabilizes_set(g: &Permutation, s: &[usize]) -> bool {
        let set: HashSet<usize> = s.iter().copied().collect();
        s.iter().all(|&x| set.contains(&g.apply(x)))
    }

    pub fn setwise_stabilizer_elements(&self, s: &[usize]) -> Vec<Permutation> {
        self.elements().iter().filter(|g| Self::stabilizes_set(g, s)).cloned().collect()
    }

    pub fn pointwise_stabilizer_elements(&self, s: &[usize]) -> Vec<Permutation> {
        self.elements().iter().filter(|g| s.iter().all(|&x| g.apply(x) == x)).cloned().collect()
    }

    pub fn setwise_stabilizer(&self, s: &[usize]) -> Result<PermAction> {
        self.check_subset(s)?;
        Ok(Self::from_element_list(self.points().clone(), self.setwise_stabilizer_elements(s)))
    }

    pub fn pointwise_stabilizer(&self, s: &[usize]) -> Result<PermAction> {
        self.check_subset(s)?;
        Ok(Self::from_element_list(self.points().clone(), self.pointwise_stabilizer_elements(s)))
    }

    /// The faithful action of the setwise stabilizer of `s` on `s`.
    ///
    /// The new point set lists `s` in the order of the original points and keeps
    /// their names. When `s` is invariant under every generator the restricted
    /// generators are used, so set orbits are traversed in the same order.
    pub fn induced_action_on_subset(&self, s: &[usize]) -> Result<PermAction> {
        self.check_subset(s)?;
        let mut sub = s.to_vec();
        sub.sort_unstable();
        sub.dedup();
        let names: Vec<String> = sub.iter().map(|&x| self.0.points.name(x).to_string()).collect();
        let points = Arc::new(PointSet::new(names)?);
        let restricted: Option<Vec<Permutation>> =
            self.generators().iter().map(|g| g.restrict(&sub)).collect();
        let gens = match restricted {
            Some(mut gens) => {
                let mut seen = HashSet::new();
                gens.retain(|g| !g.is_identity() && seen.insert(g.clone()));
                gens
            }
            None => {
                let mut gens: Vec<Permutation> = self
                    .setwise_stabilizer_elements(&sub)
                    .iter()
                    .filter_map(|g| g.restrict(&sub))
                    .filter(|g| !g.is_identity())
                    .collect();
                gens.sort();
                gens.dedup();
                return Ok(Self::from_element_list(points, gens));
            }
        };
        PermAction::new(points, gens)
    }

    /// All elements `g` with `g(x) = y` for every pair, in canonical order.
    pub fn elements_mapping(&self, pairs: &[(usize, usize)]) -> Vec<Permutation> {
        self.elements()
            .iter()
            .filter(|g| pairs.iter().all(|&(x, y)| g.apply(x) == y))
            .cloned()
            .collect()
    }

    pub fn first_mapping(&self, pairs: &[(usize, usize)]) -> Option<Permutation> {
        self.elements().iter().find(|g| pairs.iter().all(|&(x, y)| g.apply(x) == y)).cloned()
    }

    /// All group elements whose restriction to `s` is `sigma`, where `sigma`
    /// permutes positions in `s`. Empty when no element does.
    pub fn extend_partial(&self, s: &[usize], sigma: &Permutation) -> Result<Vec<Permutation>> {
        self.check_subset(s)?;
        if sigma.degree() != s.len() {
            return Err(Error::DomainMismatch(format!(
                "partial permutation of degree {} on a set of size {}",
                sigma.degree(),
                s.len()
            )));
        }
        let pairs: Vec<(usize, usize)> =
            s.iter().enumerate().map(|(i, &x)| (x, s[sigma.apply(i)])).collect();
        Ok(self.elements_mapping(&pairs))
    }

    /// Same point names and same set of group elements.
    pub fn same_action(&self, other: &PermAction) -> bool {
        self.points().names() == other.points().names()
            && self.order() == other.order()
            && other.generators().iter().all(|g| self.contains(g))
    }
}

impl PartialEq for PermAction {
    fn eq(&self, other: &Self) -> bool {
        self.points().names() == other.points().names() && self.generators() == other.generators()
    }
}

impl Eq for PermAction {}

impl fmt::Debug for PermAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators().iter().map(|g| self.fmt_element(g)).collect();
        f.debug_struct("PermAction")
            .field("points", &self.points().names())
            .field("generators", &gens)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> PermAction {
        PermAction::from_cycles(&["1", "2", "3"], &["(1 2)", "(1 2 3)"]).unwrap()
    }

    fn c3() -> PermAction {
        PermAction::from_cycles(&["1", "2", "3"], &["(1 2 3)"]).unwrap()
    }

    fn signed_s3() -> PermAction {
        PermAction::from_cycles(
            &["1p", "1m", "2p", "2m", "3p", "3m"],
            &["(1p 2m)(1m 2p)(3p 3m)", "(1p 2p 3p)(1m 2m 3m)"],
        )
        .unwrap()
    }

    /// Closure by repeated multiplication until nothing new appears.
    fn brute_closure(a: &PermAction) -> HashSet<Permutation> {
        let mut set: HashSet<Permutation> = HashSet::from([a.identity()]);
        loop {
            let cur: Vec<Permutation> = set.iter().cloned().collect();
            let before = set.len();
            for x in &cur {
                for y in &cur {
                    set.insert(x.mul(y));
                }
                for g in a.generators() {
                    set.insert(x.mul(g));
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    #[test]
    fn element_counts() {
        assert_eq!(c3().order(), 3);
        let s = s3();
        assert_eq!(s.order(), 6);
        assert_eq!(s.elements().iter().cloned().collect::<HashSet<_>>(), brute_closure(&s));
        assert!(s.elements()[0].is_identity());
        let one = PermAction::from_cycles::<&str>(&["1"], &[]).unwrap();
        assert_eq!(one.order(), 1);
    }

    #[test]
    fn canonical_order_is_by_level_then_images() {
        let s = s3();
        let e = s.elements();
        // level 1 holds the two generators, sorted by images
        let lvl1: Vec<String> = e[1..3].iter().map(|g| s.fmt_element(g)).collect();
        assert_eq!(lvl1, ["(1 2)", "(1 2 3)"]);
    }

    #[test]
    fn orbit_of_set_examples() {
        let c = c3();
        assert_eq!(c.orbit_of_set(&[0]).unwrap(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(c.orbit_of_set(&[0, 1, 2]).unwrap().len(), 1);
        let s = signed_s3();
        assert_eq!(s.orbit_of_set(&[0, 1]).unwrap().len(), 3);
        assert!(c.orbit_of_set(&[7]).is_err());
    }

    #[test]
    fn stabilizers() {
        let s = s3();
        assert_eq!(s.pointwise_stabilizer(&[0, 1, 2]).unwrap().order(), 1);
        assert_eq!(s.setwise_stabilizer(&[0, 1]).unwrap().order(), 2);
        assert_eq!(s.setwise_stabilizer(&[0, 1, 2]).unwrap().order(), 6);
    }

    #[test]
    fn induced_actions() {
        let s = s3();
        let ind = s.induced_action_on_subset(&[0, 1]).unwrap();
        assert_eq!(ind.order(), 2);
        assert_eq!(ind.points().names(), ["1", "2"]);
        let full = s.induced_action_on_subset(&[0, 1, 2]).unwrap();
        assert_eq!(full.order(), 6);
        let sign = signed_s3().induced_action_on_subset(&[0, 1]).unwrap();
        assert_eq!(sign.order(), 2);
    }

    #[test]
    fn extend_partial_examples() {
        let s = s3();
        let swap = Permutation::from_images(vec![1, 0]).unwrap();
        let got = s.extend_partial(&[0, 1], &swap).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(s.fmt_element(&got[0]), "(1 2)");
        let c = c3();
        let id1 = Permutation::identity(1);
        assert_eq!(c.extend_partial(&[0], &id1).unwrap().len(), 1);
        let id2 = Permutation::identity(2);
        assert_eq!(
            s.extend_partial(&[0, 1], &id2).unwrap(),
            s.pointwise_stabilizer_elements(&[0, 1])
        );
    }
}
