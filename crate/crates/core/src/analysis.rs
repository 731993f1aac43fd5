//! Property checks on truncated universal groups. Every verdict is a claim
//! about the truncation only.

use crate::error::{Error, Result};
use crate::gga::Gga;
use crate::perm::Permutation;
use crate::scaffold::Scaffolding;
use crate::universal::{self, compose, element_order, UniversalElement};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

impl Verdict {
    pub fn of(b: bool) -> Verdict {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Worst of two verdicts: any failure fails, then any undecided.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Undecided, _) | (_, Undecided) => Undecided,
            _ => Pass,
        }
    }

    /// Process exit code: 0 pass, 1 fail, 2 undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Undecided => 2,
        }
    }
}

/// The path of tree vertices from `u` to `w`.
pub fn tree_path(s: &Scaffolding, u: usize, w: usize) -> Vec<usize> {
    let t = s.tree();
    let up = |mut x: usize| {
        let mut chain = vec![x];
        while let Some(p) = t.parent(x) {
            chain.push(p);
            x = p;
        }
        chain
    };
    let (a, b) = (up(u), up(w));
    let meet = *a.iter().find(|x| b.contains(x)).expect("common root");
    let mut path: Vec<usize> = a.iter().copied().take_while(|&x| x != meet).collect();
    path.push(meet);
    let tail: Vec<usize> = b.iter().copied().take_while(|&x| x != meet).collect();
    path.extend(tail.into_iter().rev());
    path
}

/// Paths with at least one edge through the root whose vertices are all settled.
pub fn interior_paths_through_root(s: &Scaffolding) -> Vec<Vec<usize>> {
    let t = s.tree();
    let settled: Vec<usize> = t.bfs_order().into_iter().filter(|&u| t.is_settled(u)).collect();
    let mut out = Vec::new();
    for (i, &u) in settled.iter().enumerate() {
        for &w in &settled[i..] {
            let p = tree_path(s, u, w);
            if p.len() >= 2 && p.contains(&t.root()) && p.iter().all(|&x| t.is_settled(x)) {
                out.push(p);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PathFixatorData {
    pub path: Vec<usize>,
    /// Closest path vertex of each tree vertex.
    pub projection: Vec<usize>,
    /// Branch of each path vertex, in path order.
    pub branches: Vec<Vec<usize>>,
    /// Distinct tree maps of the pointwise fixator of the path.
    pub fixator: Vec<Vec<Option<usize>>>,
    /// Distinct branch restrictions, per branch.
    pub branch_actions: Vec<BTreeSet<Vec<Option<usize>>>>,
}

impl PathFixatorData {
    pub fn new(s: &Scaffolding, elements: &[UniversalElement], path: &[usize]) -> PathFixatorData {
        let t = s.tree();
        let n = t.vertex_count();
        let mut projection = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &x in path {
            projection[x] = x;
            queue.push_back(x);
        }
        while let Some(x) = queue.pop_front() {
            for &c in t.graph().star(x) {
                let y = t.graph().origin(c);
                if projection[y] == usize::MAX {
                    projection[y] = projection[x];
                    queue.push_back(y);
                }
            }
        }
        let branches: Vec<Vec<usize>> =
            path.iter().map(|&x| (0..n).filter(|&y| projection[y] == x).collect()).collect();
        let fixator: BTreeSet<Vec<Option<usize>>> = elements
            .iter()
            .filter(|g| path.iter().all(|&x| g.image[x] == Some(x)))
            .map(|g| g.image.clone())
            .collect();
        let branch_actions = branches
            .iter()
            .map(|b| {
                fixator
                    .iter()
                    .map(|img| b.iter().map(|&u| img[u]).collect())
                    .collect()
            })
            .collect();
        PathFixatorData { path: path.to_vec(), projection, branches, fixator: fixator.into_iter().collect(), branch_actions }
    }
}

#[derive(Clone, Debug)]
pub struct PropertyPReport {
    pub verdict: Verdict,
    pub fixator_size: usize,
    pub product_size: usize,
    /// Path vertex whose branch action, combined with the identity elsewhere, is not realized.
    pub counterexample: Option<(usize, Vec<Option<usize>>)>,
}

/// Whether the fixator of `path` is the product of its branch actions on the truncation.
pub fn property_p_check(s: &Scaffolding, elements: &[UniversalElement], path: &[usize]) -> PropertyPReport {
    let t = s.tree();
    if path.is_empty() || path.iter().any(|&x| !t.is_settled(x)) {
        return PropertyPReport { verdict: Verdict::Undecided, fixator_size: 0, product_size: 0, counterexample: None };
    }
    let data = PathFixatorData::new(s, elements, path);
    let product_size = data.branch_actions.iter().map(BTreeSet::len).product();
    let realized: BTreeSet<&Vec<Option<usize>>> = data.fixator.iter().collect();
    let n = t.vertex_count();
    let mut counterexample = None;
    'outer: for (i, branch) in data.branches.iter().enumerate() {
        for r in &data.branch_actions[i] {
            let mut img: Vec<Option<usize>> = (0..n).map(Some).collect();
            for (k, &u) in branch.iter().enumerate() {
                img[u] = r[k];
            }
            if !realized.contains(&img) {
                counterexample = Some((path[i], r.clone()));
                break 'outer;
            }
        }
    }
    PropertyPReport {
        verdict: Verdict::of(counterexample.is_none()),
        fixator_size: data.fixator.len(),
        product_size,
        counterexample,
    }
}

#[derive(Clone, Debug)]
pub struct IpkChain {
    pub arc: usize,
    /// `H_1, H_2, ...`, each a sorted set of permutations of the arc points.
    pub chain: Vec<Vec<Permutation>>,
    /// Least `i` with `H_i = H_{i+1}`, if seen.
    pub k: Option<usize>,
}

impl IpkChain {
    pub fn verdict(&self) -> Verdict {
        if self.k.is_some() {
            Verdict::Pass
        } else {
            Verdict::Undecided
        }
    }
}

/// Vertices within distance `r` of either end of the arc `c`.
pub fn arc_ball(s: &Scaffolding, c: usize, r: usize) -> Vec<usize> {
    let t = s.tree();
    let (a, b) = (t.distances_from(t.graph().origin(c)), t.distances_from(t.graph().terminus(c)));
    (0..t.vertex_count()).filter(|&u| a[u].min(b[u]) <= r).collect()
}

/// The chain of actions on the arc bundle `c` induced by the fixators of
/// growing balls around it, up to `max_k` terms or the truncation.
pub fn ipk_detect(s: &Scaffolding, elements: &[UniversalElement], c: usize, max_k: usize) -> Result<IpkChain> {
    let t = s.tree();
    let v = t.graph().terminus(c);
    let mut chain = Vec::new();
    let mut k = None;
    for i in 1..=max_k {
        let ball = arc_ball(s, c, i - 1);
        // vertices strictly inside the ball need their whole star in the tree
        let (da, db) = (t.distances_from(t.graph().origin(c)), t.distances_from(v));
        if ball.iter().any(|&u| da[u].min(db[u]) + 1 < i && !t.has_complete_star(u)) {
            break;
        }
        let mut h: BTreeSet<Permutation> = BTreeSet::new();
        for g in elements {
            if ball.iter().all(|&u| g.image[u] == Some(u)) {
                if g.local[v].is_none() {
                    return Err(Error::Truncation(format!("no local action at `{}`", t.vertex_id(v))));
                }
                h.insert(universal::arc_local_action(s, s, g, c)?);
            }
        }
        chain.push(h.into_iter().collect::<Vec<_>>());
        if chain.len() >= 2 && chain[chain.len() - 1] == chain[chain.len() - 2] {
            k = Some(chain.len() - 1);
            break;
        }
    }
    Ok(IpkChain { arc: c, chain, k })
}

/// All local actions of each element are the same permutation.
pub fn constant_local_action_check(elements: &[UniversalElement]) -> bool {
    elements.iter().all(|g| {
        let mut it = g.local.iter().flatten();
        match it.next() {
            Some(first) => it.all(|f| f == first),
            None => true,
        }
    })
}

/// All local actions of each element have the same sign.
pub fn parity_check(elements: &[UniversalElement]) -> bool {
    elements.iter().all(|g| {
        let signs: BTreeSet<bool> = g.local.iter().flatten().map(Permutation::is_even).collect();
        signs.len() <= 1
    })
}

/// Signs seen across the elements, by the sign at the root.
pub fn parities_present(elements: &[UniversalElement], root: usize) -> BTreeSet<bool> {
    elements.iter().filter_map(|g| g.local[root].as_ref().map(Permutation::is_even)).collect()
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    /// Filtered elements fixing the root that are not the identity.
    pub nontrivial_stabilizer: usize,
    /// Settled vertices with the root's label reached by a filtered witness.
    pub reached: usize,
    pub targets: usize,
}

impl RegularityReport {
    pub fn holds(&self) -> bool {
        self.nontrivial_stabilizer == 0 && self.reached == self.targets
    }
}

/// With `trivial_only`, keeps elements whose local actions are all trivial.
/// Checks that only the identity fixes the root, and builds witnesses
/// carrying the root to every settled vertex with its label.
pub fn regularity_check(s: &Scaffolding, elements: &[UniversalElement], trivial_only: bool) -> Result<RegularityReport> {
    let t = s.tree();
    let root = t.root();
    let keep = |g: &UniversalElement| !trivial_only || g.local.iter().flatten().all(Permutation::is_identity);
    let nontrivial_stabilizer =
        elements.iter().filter(|g| keep(g) && g.image[root] == Some(root) && !g.is_identity()).count();
    let targets: Vec<usize> =
        (0..t.vertex_count()).filter(|&u| t.is_settled(u) && t.vertex_label(u) == t.vertex_label(root)).collect();
    let mut reached = 0;
    for &u in &targets {
        let seed = UniversalElement::seed(s, root, u, s.vertex_action(root).identity());
        let w = universal::extend_full(s, s, &seed)?;
        if keep(&w) {
            reached += 1;
        }
    }
    Ok(RegularityReport { nontrivial_stabilizer, reached, targets: targets.len() })
}

/// Whether some subgroup is isomorphic to `S3`: an element `a` of order 3 and
/// `b` of order 2 with `b a b = a⁻¹`.
pub fn contains_s3(elements: &[UniversalElement]) -> Result<bool> {
    let mut threes = Vec::new();
    let mut twos = Vec::new();
    for g in elements {
        match element_order(g)? {
            3 => threes.push(g),
            2 => twos.push(g),
            _ => {}
        }
    }
    for a in &threes {
        let a_inv = compose(a, a)?;
        for b in &twos {
            if compose(b, &compose(a, b)?)? == a_inv {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[derive(Clone, Debug)]
pub struct SubdegreeReport {
    pub lines: Vec<String>,
    pub tree_finite: bool,
    pub scaffolding_finite: bool,
}

/// The three local conditions per vertex, and the two resulting verdicts.
pub fn subdegree_report(g: &Gga) -> Result<SubdegreeReport> {
    let aug = g.augmented();
    let mut lines = Vec::new();
    let mut tree_finite = true;
    let mut scaffolding_finite = true;
    for v in 0..g.base().vertex_count() {
        let x = g.vertex_action(v);
        let sets: Vec<Vec<usize>> = aug.star(v).iter().map(|&b| aug.adhesion[b].clone()).collect();
        let orbits_on_sets = sets.len();
        let suborbits = x.orbits().len();
        let mut stab_orbits = 0usize;
        let mut largest = 0usize;
        for p in 0..x.degree() {
            let st = x.pointwise_stabilizer_elements(&[p]);
            let mut seen = BTreeSet::new();
            for set in &sets {
                if seen.contains(set) {
                    continue;
                }
                let orbit: BTreeSet<Vec<usize>> = st
                    .iter()
                    .map(|h| {
                        let mut img: Vec<usize> = set.iter().map(|&q| h.apply(q)).collect();
                        img.sort_unstable();
                        img
                    })
                    .collect();
                largest = largest.max(orbit.len());
                seen.extend(orbit);
                stab_orbits += 1;
            }
        }
        // every count is finite for finite point sets
        let finite = x.degree() > 0;
        tree_finite &= finite;
        scaffolding_finite &= finite;
        lines.push(format!(
            "vertex {}: {} adhesion sets (finite), {} orbits on points (finite), point-stabilizer orbits on adhesion sets {} (largest {})",
            g.base().vertex_id(v),
            orbits_on_sets,
            suborbits,
            stab_orbits,
            largest
        ));
    }
    Ok(SubdegreeReport { lines, tree_finite, scaffolding_finite })
}

/// Sizes of the orbits of the elements on tree vertices, by least member.
pub fn orbit_sizes(s: &Scaffolding, elements: &[UniversalElement]) -> BTreeMap<usize, usize> {
    let n = s.tree().vertex_count();
    let mut out = BTreeMap::new();
    let mut done = vec![false; n];
    for u in 0..n {
        if done[u] {
            continue;
        }
        let orbit: BTreeSet<usize> = elements.iter().filter_map(|g| g.image[u]).chain([u]).collect();
        for &w in &orbit {
            done[w] = true;
        }
        out.insert(u, orbit.len());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::covering::CoveringTree;
    use crate::universal::{enumerate, Mode};

    fn setup(name: &str, r: usize) -> (Scaffolding, Vec<UniversalElement>) {
        let g = corpus::load(name).unwrap();
        let t = CoveringTree::build(&g, 0, r).unwrap();
        let s = Scaffolding::canonical(&g, &t).unwrap();
        let mode = if t.is_complete() { Mode::FullIfFinite } else { Mode::RootStabilizer };
        let els = enumerate(&s, mode, 1_000_000).unwrap();
        (s, els)
    }

    #[test]
    fn property_p() {
        let (s, els) = setup("bm-c3", 2);
        let paths = interior_paths_through_root(&s);
        assert_eq!(paths.len(), 6);
        for p in &paths {
            assert_eq!(property_p_check(&s, &els, p).verdict, Verdict::Pass);
        }
        let (s, els) = setup("bm-s3", 3);
        for p in interior_paths_through_root(&s) {
            assert_eq!(property_p_check(&s, &els, &p).verdict, Verdict::Pass);
        }
        let (s, els) = setup("a1-s3", 3);
        let edge = tree_path(&s, 0, 1);
        let rep = property_p_check(&s, &els, &edge);
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.counterexample.is_some());
        assert_eq!((rep.fixator_size, rep.product_size), (2, 4));
        assert_eq!(property_p_check(&s, &els, &[0]).verdict, Verdict::Pass);
    }

    #[test]
    fn ipk() {
        for name in ["bm-c3", "bm-s3", "lad-c3", "box-k21"] {
            let (s, els) = setup(name, 3);
            let c = s.tree().graph().star(0)[0];
            let chain = ipk_detect(&s, &els, c, 3).unwrap();
            assert_eq!(chain.k, Some(1), "{name}");
        }
        let (s, els) = setup("a1-s3", 3);
        let c = s.tree().graph().star(0)[0];
        let chain = ipk_detect(&s, &els, c, 3).unwrap();
        assert_eq!(chain.k, Some(2));
        assert_eq!(chain.chain.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 1, 1]);
        let (s, els) = setup("ex-c3-id", 1);
        let chain = ipk_detect(&s, &els, 0, 3).unwrap();
        assert!(chain.k.is_some());
    }

    #[test]
    fn appendix_invariants() {
        let (s, els) = setup("a1-s3", 3);
        assert!(constant_local_action_check(&els));
        let rep = regularity_check(&s, &els, true).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert!(!regularity_check(&s, &els, false).unwrap().holds());

        let (s, els) = setup("ex-parity", 2);
        assert!(parity_check(&els));
        assert_eq!(parities_present(&els, s.tree().root()).len(), 2);
        assert!(!constant_local_action_check(&setup("bm-s3", 2).1));
    }

    #[test]
    fn s3_search() {
        let (_, els) = setup("ex-small", 1);
        assert!(!contains_s3(&els).unwrap());
        let (_, els) = setup("ex-c3-twist", 1);
        assert!(contains_s3(&els).unwrap());
    }

    #[test]
    fn subdegrees() {
        for (name, _) in corpus::FILES {
            let g = corpus::load(name).unwrap();
            let r = subdegree_report(&g).unwrap();
            assert!(r.tree_finite && r.scaffolding_finite);
            assert_eq!(r.lines.len(), g.base().vertex_count());
        }
        let (s, els) = setup("bm-s3", 3);
        let sizes = orbit_sizes(&s, &els);
        assert!(sizes.values().all(|&k| k <= s.tree().vertex_count()));
        assert_eq!(sizes[&0], 1);
    }
}
