//! Elements of the universal group, restricted to finite scaffoldings.
//!
//! An element is a partial map on covering-tree vertices together with a
//! local permutation of `X(π(u))` at each settled vertex `u` in its domain.
//! On the scaffolding it acts as `(u, x) ↦ (image(u), g_u(x))`. Elements may
//! run between two scaffoldings `s → s2` of the same gga.

use crate::error::{Error, Result};
use crate::perm::{ActionIsomorphism, PermAction, Permutation};
use crate::scaffold::{PsiClass, Scaffolding};
use crate::sgraph::{self, SerreGraph, UnionFind};
use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UniversalElement {
    pub image: Vec<Option<usize>>,
    pub local: Vec<Option<Permutation>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every element of the group; needs a complete covering tree.
    FullIfFinite,
    /// Elements fixing the root tree vertex, restricted to the truncation.
    RootStabilizer,
}

/// The data of one extension step across a tree arc `c: w → v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionStep {
    /// Image of `c` in the target tree.
    pub arc: usize,
    pub w_image: usize,
    pub q_v: Permutation,
    pub r_v: Permutation,
    pub r_w: Permutation,
    /// Every valid `q_w`, canonical order.
    pub candidates: Vec<Permutation>,
    /// `h_w' q_w h_w⁻¹` for each candidate, same order.
    pub g_candidates: Vec<Permutation>,
    /// From the least candidate.
    pub chosen: Permutation,
}

#[derive(Clone, Debug)]
pub struct QuotientReport {
    /// Orbits of settled tree vertices, each sorted, listed by least member.
    pub vertex_orbits: Vec<Vec<usize>>,
    pub orbits_are_fibres: bool,
    /// `None` when the orbit relation does not give a graph.
    pub quotient: Option<SerreGraph>,
    pub isomorphic_to_base: bool,
}

impl QuotientReport {
    pub fn holds(&self) -> bool {
        self.orbits_are_fibres && self.isomorphic_to_base
    }
}

fn tau(s: &Scaffolding, c: usize, class: PsiClass) -> Permutation {
    let a = s.tree().base_arc(c);
    match class {
        PsiClass::Adhesion => s.gga().arc_action(a).identity(),
        PsiClass::Twisted => s.gga().inversion(a),
    }
}

fn factor(s: &Scaffolding, c: usize) -> Result<(Permutation, PsiClass)> {
    s.factor(c).cloned().ok_or_else(|| {
        Error::InvalidScaffolding(format!("`Ψ` of bundle `{}` has no factorisation", s.tree().arc_id(c)))
    })
}

fn psi(s: &Scaffolding, c: usize) -> Result<&[usize]> {
    s.psi_map(c)
        .ok_or_else(|| Error::InvalidScaffolding(format!("bundle `{}` is not a matching", s.tree().arc_id(c))))
}

fn invert_map(map: &[usize], n: usize) -> Vec<Option<usize>> {
    let mut inv = vec![None; n];
    for (y, &x) in map.iter().enumerate() {
        inv[x] = Some(y);
    }
    inv
}

/// `Ψ_{c2}⁻¹ g_v Ψ_c` on `Y`, when `g_v` carries the one adhesion image onto the other.
fn arc_map(s: &Scaffolding, s2: &Scaffolding, c: usize, c2: usize, g_v: &Permutation) -> Result<Permutation> {
    let p = psi(s, c)?;
    let p2 = invert_map(psi(s2, c2)?, g_v.degree());
    let images: Option<Vec<usize>> = p.iter().map(|&x| p2[g_v.apply(x)]).collect();
    let images = images.ok_or_else(|| {
        Error::Precondition(format!(
            "local action does not carry the adhesion image of `{}` onto that of `{}`",
            s.tree().arc_id(c),
            s2.tree().arc_id(c2)
        ))
    })?;
    Permutation::from_images(images)
}

impl UniversalElement {
    pub fn identity(s: &Scaffolding) -> UniversalElement {
        let t = s.tree();
        UniversalElement {
            image: (0..t.vertex_count()).map(Some).collect(),
            local: (0..t.vertex_count())
                .map(|u| t.is_settled(u).then(|| s.vertex_action(u).identity()))
                .collect(),
        }
    }

    /// Defined only at `u`.
    pub fn seed(s: &Scaffolding, u: usize, image: usize, local: Permutation) -> UniversalElement {
        let n = s.tree().vertex_count();
        let mut e = UniversalElement { image: vec![None; n], local: vec![None; n] };
        e.image[u] = Some(image);
        e.local[u] = Some(local);
        e
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(u, i)| i.is_none_or(|i| i == u))
            && self.local.iter().flatten().all(Permutation::is_identity)
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.image.len()).filter(|&u| self.image[u].is_some()).collect()
    }
}

/// The local permutation a scaffolding vertex map induces on the bundle `u`.
pub fn local_action(s: &Scaffolding, s2: &Scaffolding, sigma: &[Option<usize>], u: usize) -> Result<Permutation> {
    let n = s.vertex_action(u).degree();
    let mut images = vec![0; n];
    let mut bundle = None;
    for x in 0..n {
        let v = s.vertex_at(u, x).ok_or_else(|| Error::InvalidScaffolding("bundle is not full".into()))?;
        let w = sigma
            .get(v)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Precondition(format!("vertex `{}` has no image", s.graph().vertex_id(v))))?;
        let b = s2.vertex_bundle(w);
        if *bundle.get_or_insert(b) != b {
            return Err(Error::Precondition(format!("bundle `{}` is split by the map", s.tree().vertex_id(u))));
        }
        images[x] = s2.vertex_colour(w);
    }
    let b = bundle.expect("bundles are non-empty");
    if s2.tree().vertex_label(b) != s.tree().vertex_label(u) {
        return Err(Error::Precondition(format!(
            "bundle `{}` goes to a bundle with a different label",
            s.tree().vertex_id(u)
        )));
    }
    Permutation::from_images(images)
}

/// Whether a local permutation lies in the vertex group.
pub fn is_acceptable(s: &Scaffolding, u: usize, g: &Permutation) -> bool {
    s.vertex_action(u).contains(g)
}

/// `y ↦ y'` on the arc bundle `c`, required to lie in `H(π(c))` up to the twists of both bundles.
pub fn arc_local_action(s: &Scaffolding, s2: &Scaffolding, g: &UniversalElement, c: usize) -> Result<Permutation> {
    let t = s.tree().graph();
    let (w, v) = (t.origin(c), t.terminus(c));
    let missing = || Error::Truncation(format!("arc bundle `{}` is outside the domain", t.arc_id(c)));
    let (w2, v2) = (g.image[w].ok_or_else(missing)?, g.image[v].ok_or_else(missing)?);
    let g_v = g.local[v].as_ref().ok_or_else(missing)?;
    let c2 = s2
        .tree()
        .graph()
        .arc_between(w2, v2)
        .ok_or_else(|| Error::Precondition(format!("no image arc for `{}`", t.arc_id(c))))?;
    let r = arc_map(s, s2, c, c2, g_v)?;
    if !arc_map_acceptable(s, s2, c, c2, &r)? {
        return Err(Error::Precondition(format!("local action at arc bundle `{}` is outside its group", t.arc_id(c))));
    }
    Ok(r)
}

/// `τ_{c2} r τ_c⁻¹ ∈ H`: the arc map lies in `H`, or in `h_a H` when it
/// exchanges a twisted bundle with an untwisted one.
fn arc_map_acceptable(s: &Scaffolding, s2: &Scaffolding, c: usize, c2: usize, r: &Permutation) -> Result<bool> {
    let (_, k) = factor(s, c)?;
    let (_, k2) = factor(s2, c2)?;
    let untwisted = tau(s2, c2, k2).mul(r).mul(&tau(s, c, k).inverse());
    Ok(s.arc_action(c).contains(&untwisted))
}

/// The arc at `v2` that `c: w → v` must go to when `v ↦ v2` with local action `g_v`.
pub fn forced_arc_image(
    s: &Scaffolding,
    s2: &Scaffolding,
    v: usize,
    v2: usize,
    g_v: &Permutation,
    c: usize,
) -> Result<usize> {
    let t2 = s2.tree();
    if t2.vertex_label(v2) != s.tree().vertex_label(v) {
        return Err(Error::Precondition("image vertex has a different label".into()));
    }
    if s.tree().graph().terminus(c) != v {
        return Err(Error::Precondition(format!("arc `{}` does not end at the vertex", s.tree().arc_id(c))));
    }
    if !t2.has_complete_star(v2) {
        return Err(Error::Truncation(format!("star of `{}` is cut off", t2.vertex_id(v2))));
    }
    let a = s.tree().base_arc(c);
    let mut want: Vec<usize> = psi(s, c)?.iter().map(|&x| g_v.apply(x)).collect();
    want.sort_unstable();
    let found: Vec<usize> = t2
        .graph()
        .star(v2)
        .iter()
        .copied()
        .filter(|&c2| t2.base_arc(c2) == a && s2.adhesion_image(c2) == Some(&want[..]))
        .collect();
    match found[..] {
        [c2] => Ok(c2),
        _ => Err(Error::InvalidScaffolding(format!(
            "{} arcs at `{}` carry the required adhesion set",
            found.len(),
            t2.vertex_id(v2)
        ))),
    }
}

/// One extension step across `c: w → v`, via the factorisations `Ψ = h Φ τ`.
pub fn one_step_extend(
    s: &Scaffolding,
    s2: &Scaffolding,
    v: usize,
    v2: usize,
    g_v: &Permutation,
    c: usize,
) -> Result<ExtensionStep> {
    let g = s.gga();
    let c2 = forced_arc_image(s, s2, v, v2, g_v, c)?;
    let a = s.tree().base_arc(c);
    let cb = s.tree().graph().reverse(c);
    let cb2 = s2.tree().graph().reverse(c2);
    let ab = s.tree().base_arc(cb);
    let (h_v, k_c) = factor(s, c)?;
    let (h_v2, k_c2) = factor(s2, c2)?;
    let (h_w, k_cb) = factor(s, cb)?;
    let (h_w2, k_cb2) = factor(s2, cb2)?;
    let q_v = h_v2.inverse().mul(g_v).mul(&h_v);
    let r_v = g.embedding_of(a).restrict(&q_v)?;
    let r_w = tau(s2, cb2, k_cb2)
        .mul(&tau(s2, c2, k_c2).inverse())
        .mul(&r_v)
        .mul(&tau(s, c, k_c))
        .mul(&tau(s, cb, k_cb).inverse());
    let phi = g.embedding(ab);
    let pairs: Vec<(usize, usize)> = (0..phi.len()).map(|z| (phi[z], phi[r_w.apply(z)])).collect();
    let w = s.tree().graph().origin(c);
    let candidates = s.vertex_action(w).elements_mapping(&pairs);
    if candidates.is_empty() {
        return Err(Error::InvalidScaffolding(format!(
            "no local action extends across `{}`",
            s.tree().arc_id(c)
        )));
    }
    let h_w_inv = h_w.inverse();
    let g_candidates: Vec<Permutation> = candidates.iter().map(|q| h_w2.mul(q).mul(&h_w_inv)).collect();
    Ok(ExtensionStep {
        arc: c2,
        w_image: s2.tree().graph().origin(c2),
        q_v,
        r_v,
        r_w,
        chosen: g_candidates[0].clone(),
        candidates,
        g_candidates,
    })
}

/// The same candidates as [`one_step_extend`], read off the matchings directly.
pub fn direct_candidates(
    s: &Scaffolding,
    s2: &Scaffolding,
    v: usize,
    v2: usize,
    g_v: &Permutation,
    c: usize,
) -> Result<(usize, Vec<Permutation>)> {
    let c2 = forced_arc_image(s, s2, v, v2, g_v, c)?;
    let r = arc_map(s, s2, c, c2, g_v)?;
    let cb = s.tree().graph().reverse(c);
    let cb2 = s2.tree().graph().reverse(c2);
    let (p, p2) = (psi(s, cb)?, psi(s2, cb2)?);
    let pairs: Vec<(usize, usize)> = (0..p.len()).map(|y| (p[y], p2[r.apply(y)])).collect();
    let w = s.tree().graph().origin(c);
    Ok((c2, s.vertex_action(w).elements_mapping(&pairs)))
}

/// Extends a seed outward as far as the truncations allow, taking the
/// least candidate at every step. The result agrees with the seed.
pub fn extend_full(s: &Scaffolding, s2: &Scaffolding, seed: &UniversalElement) -> Result<UniversalElement> {
    let t = s.tree();
    let n = t.vertex_count();
    if seed.image.len() != n || seed.local.len() != n {
        return Err(Error::DomainMismatch("seed does not match the covering tree".into()));
    }
    let mut e = seed.clone();
    let mut queue = VecDeque::new();
    for u in 0..n {
        if let (Some(u2), Some(f)) = (e.image[u], &e.local[u]) {
            if s2.tree().vertex_label(u2) != t.vertex_label(u) || !is_acceptable(s, u, f) {
                return Err(Error::Precondition(format!("seed is not acceptable at `{}`", t.vertex_id(u))));
            }
            queue.push_back(u);
        }
    }
    while let Some(v) = queue.pop_front() {
        let (v2, g_v) = (e.image[v].expect("queued"), e.local[v].clone().expect("queued"));
        for &c in t.graph().star(v) {
            let w = t.graph().origin(c);
            if e.image[w].is_some() {
                continue;
            }
            let step = match one_step_extend(s, s2, v, v2, &g_v, c) {
                Ok(step) => step,
                Err(Error::Truncation(_)) => continue,
                Err(other) => return Err(other),
            };
            e.image[w] = Some(step.w_image);
            if t.is_settled(w) {
                e.local[w] = Some(step.chosen);
                queue.push_back(w);
            }
        }
    }
    Ok(e)
}

/// Checks the element directly against the matchings of both scaffoldings.
pub fn verify_element(s: &Scaffolding, s2: &Scaffolding, g: &UniversalElement) -> Result<()> {
    let (t, t2) = (s.tree(), s2.tree());
    let bad = |m: String| Err(Error::Precondition(format!("not an acceptable element: {m}")));
    if g.image.len() != t.vertex_count() || g.local.len() != t.vertex_count() {
        return bad("wrong domain size".into());
    }
    let mut hit = vec![false; t2.vertex_count()];
    for u in 0..t.vertex_count() {
        let Some(u2) = g.image[u] else {
            if g.local[u].is_some() {
                return bad(format!("local action without image at `{}`", t.vertex_id(u)));
            }
            continue;
        };
        if u2 >= t2.vertex_count() || std::mem::replace(&mut hit[u2], true) {
            return bad(format!("image of `{}` is out of range or repeated", t.vertex_id(u)));
        }
        if t2.vertex_label(u2) != t.vertex_label(u) {
            return bad(format!("`{}` changes label", t.vertex_id(u)));
        }
        if let Some(f) = &g.local[u] {
            if f.degree() != s.vertex_action(u).degree() || !is_acceptable(s, u, f) {
                return bad(format!("local action at `{}` is outside the vertex group", t.vertex_id(u)));
            }
        }
    }
    for c in 0..t.arc_count() {
        let (w, v) = (t.graph().origin(c), t.graph().terminus(c));
        let (Some(w2), Some(v2)) = (g.image[w], g.image[v]) else { continue };
        let Some(c2) = t2.graph().arc_between(w2, v2) else {
            return bad(format!("arc `{}` has no image", t.arc_id(c)));
        };
        if t2.base_arc(c2) != t.base_arc(c) {
            return bad(format!("arc `{}` changes label", t.arc_id(c)));
        }
        let Some(g_v) = &g.local[v] else { continue };
        let r = match arc_map(s, s2, c, c2, g_v) {
            Ok(r) => r,
            Err(e) => return bad(e.to_string()),
        };
        if !arc_map_acceptable(s, s2, c, c2, &r)? {
            return bad(format!("arc bundle `{}` is moved outside its group", t.arc_id(c)));
        }
        let Some(g_w) = &g.local[w] else { continue };
        let cb = t.graph().reverse(c);
        let cb2 = t2.graph().reverse(c2);
        let (p, p2) = (psi(s, cb)?, psi(s2, cb2)?);
        if (0..p.len()).any(|y| g_w.apply(p[y]) != p2[r.apply(y)]) {
            return bad(format!("matching at `{}` is not preserved", t.arc_id(c)));
        }
    }
    Ok(())
}

/// All elements on the truncation, sorted. Errors past `cap` elements.
pub fn enumerate(s: &Scaffolding, mode: Mode, cap: usize) -> Result<Vec<UniversalElement>> {
    let t = s.tree();
    let root = t.root();
    let roots: Vec<usize> = match mode {
        Mode::FullIfFinite => {
            if !t.is_complete() {
                return Err(Error::Precondition(
                    "the covering tree is truncated; use root-stabilizer mode".into(),
                ));
            }
            (0..t.vertex_count()).filter(|&u| t.vertex_label(u) == t.vertex_label(root)).collect()
        }
        Mode::RootStabilizer => vec![root],
    };
    let order = t.bfs_order();
    let n = t.vertex_count();
    let mut out = Vec::new();
    for r in roots {
        let locals: Vec<Option<Permutation>> = if t.is_settled(root) {
            s.vertex_action(root).elements().iter().cloned().map(Some).collect()
        } else {
            vec![None]
        };
        for f in locals {
            let mut e = UniversalElement { image: vec![None; n], local: vec![None; n] };
            e.image[root] = Some(r);
            e.local[root] = f;
            descend(s, &order, 1, &mut e, &mut out, cap)?;
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn descend(
    s: &Scaffolding,
    order: &[usize],
    k: usize,
    e: &mut UniversalElement,
    out: &mut Vec<UniversalElement>,
    cap: usize,
) -> Result<()> {
    let t = s.tree();
    if k == order.len() {
        if out.len() == cap {
            return Err(Error::CapExceeded(cap));
        }
        out.push(e.clone());
        return Ok(());
    }
    let w = order[k];
    let c = t.parent_arc(w).expect("non-root vertices have a parent");
    let v = t.graph().terminus(c);
    let step = match (e.image[v], e.local[v].clone()) {
        (Some(v2), Some(g_v)) => match one_step_extend(s, s, v, v2, &g_v, c) {
            Ok(step) => Some(step),
            Err(Error::Truncation(_)) => None,
            Err(other) => return Err(other),
        },
        _ => None,
    };
    let Some(step) = step else {
        return descend(s, order, k + 1, e, out, cap);
    };
    e.image[w] = Some(step.w_image);
    if t.is_settled(w) {
        for g_w in step.g_candidates {
            e.local[w] = Some(g_w);
            descend(s, order, k + 1, e, out, cap)?;
        }
        e.local[w] = None;
    } else {
        descend(s, order, k + 1, e, out, cap)?;
    }
    e.image[w] = None;
    Ok(())
}

/// `g ∘ h`: `h` first. `h` must land inside the domain of `g`.
pub fn compose(g: &UniversalElement, h: &UniversalElement) -> Result<UniversalElement> {
    let mut out = UniversalElement { image: vec![None; h.image.len()], local: vec![None; h.image.len()] };
    for u in 0..h.image.len() {
        let Some(u2) = h.image[u] else { continue };
        let u3 = g
            .image
            .get(u2)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Truncation(format!("tree vertex {u2} is outside the domain of the outer element")))?;
        out.image[u] = Some(u3);
        if let (Some(a), Some(b)) = (g.local[u2].as_ref(), h.local[u].as_ref()) {
            out.local[u] = Some(a.compose(b)?);
        }
    }
    Ok(out)
}

/// The inverse, on a tree with `n` vertices.
pub fn invert(g: &UniversalElement, n: usize) -> Result<UniversalElement> {
    let mut out = UniversalElement { image: vec![None; n], local: vec![None; n] };
    for (u, i) in g.image.iter().enumerate() {
        let Some(u2) = *i else { continue };
        if u2 >= n || out.image[u2].is_some() {
            return Err(Error::Precondition("element is not injective".into()));
        }
        out.image[u2] = Some(u);
        out.local[u2] = g.local[u].as_ref().map(Permutation::inverse);
    }
    Ok(out)
}

/// Order of an element mapping its domain into itself.
pub fn element_order(g: &UniversalElement) -> Result<usize> {
    let mut p = g.clone();
    for k in 1.. {
        if p.is_identity() {
            return Ok(k);
        }
        p = compose(g, &p)?;
        if k > 1_000_000 {
            break;
        }
    }
    Err(Error::Precondition("element order not found".into()))
}

/// `(u, x) ↦ (image(u), g_u(x))` on scaffolding vertices.
pub fn to_sigma_map(s: &Scaffolding, s2: &Scaffolding, g: &UniversalElement) -> Vec<Option<usize>> {
    let mut out = vec![None; s.graph().vertex_count()];
    for (v, slot) in out.iter_mut().enumerate() {
        let u = s.vertex_bundle(v);
        if let (Some(u2), Some(f)) = (g.image[u], &g.local[u]) {
            *slot = s2.vertex_at(u2, f.apply(s.vertex_colour(v)));
        }
    }
    out
}

/// The induced map on scaffolding arcs, where both endpoint bundles carry local actions.
pub fn to_sigma_arc_map(s: &Scaffolding, s2: &Scaffolding, g: &UniversalElement) -> Vec<Option<usize>> {
    let t = s.tree().graph();
    let mut out = vec![None; s.graph().arc_count()];
    for c in 0..t.arc_count() {
        let (w, v) = (t.origin(c), t.terminus(c));
        if g.local[w].is_none() {
            continue;
        }
        let Ok(r) = arc_local_action(s, s2, g, c) else { continue };
        let (Some(w2), Some(v2)) = (g.image[w], g.image[v]) else { continue };
        let Some(c2) = s2.tree().graph().arc_between(w2, v2) else { continue };
        for &e in s.bundle_arcs(c) {
            out[e] = s2.arc_at(c2, r.apply(s.arc_colour(e)));
        }
    }
    out
}

/// One line per tree vertex in the domain, sorted by id.
pub fn format_element(s: &Scaffolding, s2: &Scaffolding, g: &UniversalElement) -> String {
    let t = s.tree();
    let mut lines: Vec<String> = g
        .domain()
        .into_iter()
        .map(|u| {
            let u2 = g.image[u].expect("domain");
            let local = match &g.local[u] {
                Some(f) => s.vertex_action(u).fmt_element(f),
                None => "-".into(),
            };
            format!("{} -> {} : {local}", t.vertex_id(u), s2.tree().vertex_id(u2))
        })
        .collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    out
}

/// Elements built by extension: for each settled vertex, one carrying the
/// first vertex of its label to it and one per vertex-group generator fixing it.
pub fn orbit_witnesses(s: &Scaffolding) -> Result<Vec<UniversalElement>> {
    let t = s.tree();
    let settled: Vec<usize> = t.bfs_order().into_iter().filter(|&u| t.is_settled(u)).collect();
    let mut out = Vec::new();
    for &u in &settled {
        let first = *settled.iter().find(|&&r| t.vertex_label(r) == t.vertex_label(u)).expect("u itself");
        let id = s.vertex_action(u).identity();
        out.push(extend_full(s, s, &UniversalElement::seed(s, first, u, id))?);
        for gen in s.vertex_action(u).generators() {
            out.push(extend_full(s, s, &UniversalElement::seed(s, u, u, gen.clone()))?);
        }
    }
    Ok(out)
}

/// Orbits of the elements on settled tree vertices and arcs between them,
/// compared with the label fibres and the base graph.
pub fn quotient_check(s: &Scaffolding, elements: &[UniversalElement]) -> QuotientReport {
    let t = s.tree();
    let tg = t.graph();
    let n = t.vertex_count();
    let inside: Vec<bool> = (0..n).map(|u| t.is_settled(u)).collect();
    let arcs: Vec<usize> = (0..tg.arc_count()).filter(|&c| inside[tg.origin(c)] && inside[tg.terminus(c)]).collect();
    let mut vu = UnionFind::new(n);
    let mut au = UnionFind::new(tg.arc_count());
    for g in elements {
        for u in 0..n {
            if let Some(w) = g.image.get(u).copied().flatten() {
                if inside[u] && w < n && inside[w] {
                    vu.union(u, w);
                }
            }
        }
        for &c in &arcs {
            let (o, tt) = (g.image[tg.origin(c)], g.image[tg.terminus(c)]);
            if let (Some(o), Some(tt)) = (o, tt) {
                if let Some(c2) = tg.arc_between(o, tt) {
                    if inside[o] && inside[tt] {
                        au.union(c, c2);
                    }
                }
            }
        }
    }
    let settled: Vec<usize> = (0..n).filter(|&u| inside[u]).collect();
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut seen = BTreeSet::new();
    for &u in &settled {
        let r = vu.find(u);
        if seen.insert(r) {
            orbits.push(settled.iter().copied().filter(|&w| vu.find(w) == r).collect());
        }
    }
    let orbits_are_fibres = settled
        .iter()
        .all(|&u| settled.iter().all(|&w| (vu.find(u) == vu.find(w)) == (t.vertex_label(u) == t.vertex_label(w))));
    let quotient = quotient_graph(tg, &orbits, &arcs, &mut vu, &mut au);
    let isomorphic_to_base = quotient.as_ref().is_some_and(|q| sgraph::isomorphism(q, s.gga().base()).is_some());
    QuotientReport { vertex_orbits: orbits, orbits_are_fibres, quotient, isomorphic_to_base }
}

fn quotient_graph(
    tg: &SerreGraph,
    orbits: &[Vec<usize>],
    arcs: &[usize],
    vu: &mut UnionFind,
    au: &mut UnionFind,
) -> Option<SerreGraph> {
    let mut q = SerreGraph::new();
    let mut vclass = std::collections::HashMap::new();
    for (i, o) in orbits.iter().enumerate() {
        q.add_vertex(format!("o{i}")).ok()?;
        vclass.insert(vu.find(o[0]), i);
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut aclass = std::collections::HashMap::new();
    for &c in arcs {
        let r = au.find(c);
        if let std::collections::hash_map::Entry::Vacant(slot) = aclass.entry(r) {
            slot.insert(reps.len());
            reps.push(c);
        }
    }
    for &c in arcs {
        let k = aclass[&au.find(c)];
        let rep = reps[k];
        if vu.find(tg.origin(c)) != vu.find(tg.origin(rep)) || vu.find(tg.terminus(c)) != vu.find(tg.terminus(rep)) {
            return None;
        }
        if au.find(tg.reverse(c)) != au.find(tg.reverse(rep)) {
            return None;
        }
    }
    for (k, &c) in reps.iter().enumerate() {
        let rev = *aclass.get(&au.find(tg.reverse(c)))?;
        let o = vclass[&vu.find(tg.origin(c))];
        let t = vclass[&vu.find(tg.terminus(c))];
        q.add_arc_raw(format!("e{k}"), o, t, rev).ok()?;
    }
    q.is_valid().then_some(q)
}

/// The action of the bundle stabilizer on a vertex bundle, with the
/// colouring as the isomorphism onto the vertex action.
pub fn induced_bundle_action(
    s: &Scaffolding,
    elements: &[UniversalElement],
    u: usize,
) -> Result<(PermAction, ActionIsomorphism)> {
    let target = s.vertex_action(u);
    let mut gens: Vec<Permutation> = elements
        .iter()
        .filter(|g| g.image[u] == Some(u))
        .filter_map(|g| g.local[u].clone())
        .filter(|f| !f.is_identity())
        .collect();
    gens.sort();
    gens.dedup();
    let induced = PermAction::new(target.points().clone(), gens)?;
    let iso = ActionIsomorphism::from_point_map(&induced, target, (0..target.degree()).collect()).ok_or_else(|| {
        Error::Precondition(format!("bundle `{}` does not carry the vertex action", s.tree().vertex_id(u)))
    })?;
    Ok((induced, iso))
}

/// As [`induced_bundle_action`] for the arc bundle `c`, onto the arc action.
pub fn induced_arc_bundle_action(
    s: &Scaffolding,
    elements: &[UniversalElement],
    c: usize,
) -> Result<(PermAction, ActionIsomorphism)> {
    let tg = s.tree().graph();
    let (w, v) = (tg.origin(c), tg.terminus(c));
    let target = s.arc_action(c);
    let mut gens = Vec::new();
    for g in elements {
        if g.image[w] != Some(w) || g.image[v] != Some(v) {
            continue;
        }
        let Some(g_v) = &g.local[v] else { continue };
        let r = arc_map(s, s, c, c, g_v)?;
        if !r.is_identity() {
            gens.push(r);
        }
    }
    gens.sort();
    gens.dedup();
    let induced = PermAction::new(target.points().clone(), gens)?;
    let iso = ActionIsomorphism::from_point_map(&induced, target, (0..target.degree()).collect()).ok_or_else(|| {
        Error::Precondition(format!("arc bundle `{}` does not carry the arc action", tg.arc_id(c)))
    })?;
    Ok((induced, iso))
}

/// Extensions of every `(u ↦ u, f)` with `f` in the vertex group at `u`.
pub fn bundle_stabilizer_witnesses(s: &Scaffolding, u: usize) -> Result<Vec<UniversalElement>> {
    if !s.tree().is_settled(u) {
        return Err(Error::Truncation(format!("`{}` is not settled", s.tree().vertex_id(u))));
    }
    s.vertex_action(u)
        .elements()
        .iter()
        .map(|f| extend_full(s, s, &UniversalElement::seed(s, u, u, f.clone())))
        .collect()
}

/// An acceptable isomorphism `s → s2` extended from the identity at the roots.
pub fn build_acceptable_iso(s: &Scaffolding, s2: &Scaffolding) -> Result<UniversalElement> {
    let (r, r2) = (s.tree().root(), s2.tree().root());
    if s.tree().vertex_label(r) != s2.tree().vertex_label(r2) {
        return Err(Error::Precondition("roots have different labels".into()));
    }
    let seed = UniversalElement::seed(s, r, r2, s.vertex_action(r).identity());
    extend_full(s, s2, &seed)
}

/// `φ g φ⁻¹` for `φ: s → s2` and `g` on `s`, an element on `s2`.
pub fn conjugate(phi: &UniversalElement, g: &UniversalElement, n2: usize) -> Result<UniversalElement> {
    let inv = invert(phi, n2)?;
    let mut out = compose(phi, &compose(g, &inv)?)?;
    // outside the image of φ there is nothing to transport
    for u in 0..n2 {
        if inv.image[u].is_none() {
            out.image[u] = None;
            out.local[u] = None;
        }
    }
    Ok(out)
}

/// Summary line: order, commutativity and element orders as `{k:count,...}`.
pub fn group_summary(elements: &[UniversalElement]) -> Result<String> {
    let mut hist = std::collections::BTreeMap::new();
    for g in elements {
        *hist.entry(element_order(g)?).or_insert(0usize) += 1;
    }
    let abelian = is_abelian(elements)?;
    let orders: Vec<String> = hist.iter().map(|(k, c)| format!("{k}:{c}")).collect();
    Ok(format!(
        "order {}, {}, orders {{{}}}",
        elements.len(),
        if abelian { "abelian" } else { "non-abelian" },
        orders.join(",")
    ))
}

pub fn is_abelian(elements: &[UniversalElement]) -> Result<bool> {
    for (i, g) in elements.iter().enumerate() {
        for h in &elements[i + 1..] {
            if compose(g, h)? != compose(h, g)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::covering::CoveringTree;
    use crate::scaffold::TransversalChoice;

    fn scaffold(name: &str, r: usize) -> Scaffolding {
        let g = corpus::load(name).unwrap();
        let t = CoveringTree::build(&g, 0, r).unwrap();
        Scaffolding::canonical(&g, &t).unwrap()
    }

    fn full(s: &Scaffolding) -> Vec<UniversalElement> {
        enumerate(s, Mode::FullIfFinite, 1_000_000).unwrap()
    }

    #[test]
    fn small_groups() {
        let s = scaffold("ex-c3-id", 1);
        let els = full(&s);
        assert_eq!(group_summary(&els).unwrap(), "order 6, abelian, orders {1:1,2:1,3:2,6:2}");

        let s = scaffold("ex-c3-twist", 1);
        let els = full(&s);
        assert_eq!(els.len(), 6);
        assert!(!is_abelian(&els).unwrap());
        // distinct permutations of the three matching edges
        let edges: BTreeSet<Vec<Option<usize>>> = els.iter().map(|g| to_sigma_arc_map(&s, &s, g)).collect();
        assert_eq!(edges.len(), 6);

        let s = scaffold("ex-small", 1);
        let els = full(&s);
        assert_eq!(els.len(), 12);
        let involutions = els.iter().filter(|g| element_order(g).unwrap() == 2).count();
        assert_eq!(involutions, 1);
    }

    #[test]
    fn ex_small_matches_brute_force() {
        let s = scaffold("ex-small", 1);
        let (v, w) = (0, 1);
        let mut expect = BTreeSet::new();
        for gv in s.vertex_action(v).elements() {
            for gw in s.vertex_action(w).elements() {
                let sigma: Vec<Option<usize>> = (0..s.graph().vertex_count())
                    .map(|x| {
                        let u = s.vertex_bundle(x);
                        let f = if u == v { gv } else { gw };
                        s.vertex_at(u, f.apply(s.vertex_colour(x)))
                    })
                    .collect();
                let g = s.graph();
                let ok = (0..g.arc_count()).all(|e| {
                    let (o, t) = (sigma[g.origin(e)].unwrap(), sigma[g.terminus(e)].unwrap());
                    g.arc_between(o, t).is_some()
                });
                if ok {
                    expect.insert((gv.clone(), gw.clone()));
                }
            }
        }
        let got: BTreeSet<(Permutation, Permutation)> = full(&s)
            .iter()
            .map(|e| (e.local[v].clone().unwrap(), e.local[w].clone().unwrap()))
            .collect();
        assert_eq!(got, expect);
        assert_eq!(expect.len(), 12);
    }

    #[test]
    fn root_stabilizers() {
        let s = scaffold("bm-c3", 2);
        assert_eq!(enumerate(&s, Mode::RootStabilizer, 100).unwrap().len(), 3);
        let s = scaffold("bm-s3", 2);
        assert_eq!(enumerate(&s, Mode::RootStabilizer, 100).unwrap().len(), 48);
        assert!(matches!(enumerate(&s, Mode::RootStabilizer, 10), Err(Error::CapExceeded(10))));
        assert!(enumerate(&s, Mode::FullIfFinite, 10).is_err());
        for name in ["a1-s3", "ex-parity"] {
            let s = scaffold(name, 3);
            assert_eq!(enumerate(&s, Mode::RootStabilizer, 1000).unwrap().len(), 6, "{name}");
        }
    }

    #[test]
    fn truncations_are_consistent() {
        for name in ["bm-s3", "a1-s3", "ex-parity"] {
            let big = scaffold(name, 3);
            let small = scaffold(name, 2);
            let keep: Vec<usize> = (0..small.tree().vertex_count())
                .map(|u| big.tree().vertex_index(small.tree().vertex_id(u)).unwrap())
                .collect();
            let restricted: BTreeSet<Vec<Option<usize>>> = enumerate(&big, Mode::RootStabilizer, 100_000)
                .unwrap()
                .iter()
                .map(|g| {
                    keep.iter()
                        .map(|&u| g.image[u].map(|x| small.tree().vertex_index(big.tree().vertex_id(x)).unwrap()))
                        .collect()
                })
                .collect();
            let direct: BTreeSet<Vec<Option<usize>>> =
                enumerate(&small, Mode::RootStabilizer, 100_000).unwrap().into_iter().map(|g| g.image).collect();
            assert_eq!(restricted, direct, "{name}");
        }
    }

    #[test]
    fn elements_verify_and_routes_agree() {
        for (name, r, mode) in [
            ("ex-c3-id", 1, Mode::FullIfFinite),
            ("ex-c3-twist", 1, Mode::FullIfFinite),
            ("ex-small", 1, Mode::FullIfFinite),
            ("bm-s3", 2, Mode::RootStabilizer),
            ("a1-s3", 2, Mode::RootStabilizer),
            ("ex-parity", 2, Mode::RootStabilizer),
            ("gog-c2c2", 2, Mode::RootStabilizer),
        ] {
            let s = scaffold(name, r);
            let t = s.tree();
            for g in enumerate(&s, mode, 100_000).unwrap() {
                verify_element(&s, &s, &g).unwrap();
                for c in 0..t.arc_count() {
                    let v = t.graph().terminus(c);
                    let (Some(v2), Some(g_v)) = (g.image[v], g.local[v].as_ref()) else { continue };
                    let Ok(step) = one_step_extend(&s, &s, v, v2, g_v, c) else { continue };
                    let (c2, mut direct) = direct_candidates(&s, &s, v, v2, g_v, c).unwrap();
                    let mut chased = step.g_candidates.clone();
                    chased.sort();
                    direct.sort();
                    assert_eq!((step.arc, chased), (c2, direct), "{name}");
                    let w = t.graph().origin(c);
                    let phi_img = s.psi_map(t.graph().reverse(c)).unwrap();
                    let stab = s.vertex_action(w).pointwise_stabilizer_elements(phi_img).len();
                    assert_eq!(step.candidates.len(), stab);
                }
            }
        }
    }

    #[test]
    fn forced_arcs() {
        let s = scaffold("bm-c3", 2);
        let t = s.tree();
        let f = s.vertex_action(0).parse_element("(1 2 3)").unwrap();
        let id_of = |c: usize| t.arc_label(c);
        let into_root: Vec<usize> = t.graph().star(0).to_vec();
        for &c in &into_root {
            let c2 = forced_arc_image(&s, &s, 0, 0, &f, c).unwrap();
            let x = s.psi_map(c).unwrap()[0];
            assert_eq!(s.psi_map(c2).unwrap()[0], f.apply(x));
            assert_ne!(id_of(c2), id_of(c));
        }
        let id = s.vertex_action(0).identity();
        assert_eq!(forced_arc_image(&s, &s, 0, 0, &id, into_root[1]).unwrap(), into_root[1]);
        let frontier = (0..t.vertex_count()).find(|&u| !t.is_settled(u)).unwrap();
        let c = t.graph().star(frontier)[0];
        assert!(matches!(forced_arc_image(&s, &s, frontier, frontier, &id, c), Err(Error::Truncation(_))));
    }

    #[test]
    fn group_laws() {
        let s = scaffold("ex-c3-twist", 1);
        let els = full(&s);
        let n = s.tree().vertex_count();
        assert!(els.iter().any(UniversalElement::is_identity));
        for g in &els {
            let inv = invert(g, n).unwrap();
            assert!(els.contains(&inv));
            assert!(compose(g, &inv).unwrap().is_identity());
            for h in &els {
                let gh = compose(g, h).unwrap();
                assert!(els.contains(&gh));
                for k in &els {
                    assert_eq!(compose(&gh, k).unwrap(), compose(g, &compose(h, k).unwrap()).unwrap());
                }
            }
        }
        let sigma = to_sigma_map(&s, &s, &els[3]);
        for u in 0..n {
            assert_eq!(&local_action(&s, &s, &sigma, u).unwrap(), els[3].local[u].as_ref().unwrap());
        }
        assert!(!format_element(&s, &s, &els[3]).is_empty());
    }

    #[test]
    fn extension_from_seeds() {
        let s = scaffold("bm-s3", 3);
        for f in s.vertex_action(0).elements() {
            let e = extend_full(&s, &s, &UniversalElement::seed(&s, 0, 0, f.clone())).unwrap();
            verify_element(&s, &s, &e).unwrap();
            assert_eq!(e.local[0].as_ref(), Some(f));
            let settled = (0..s.tree().vertex_count()).filter(|&u| s.tree().is_settled(u));
            assert!(settled.clone().all(|u| e.local[u].is_some()));
        }
        let c3 = scaffold("bm-c3", 2);
        let odd = Permutation::parse("(1 2)", c3.vertex_action(0).points()).unwrap();
        assert!(extend_full(&c3, &c3, &UniversalElement::seed(&c3, 0, 0, odd)).is_err());
    }

    #[test]
    fn quotients() {
        for (name, r) in [("ex-c3-id", 1), ("ex-small", 1), ("bm-c3", 2), ("gog-c2c2", 3), ("box-k21", 3)] {
            let s = scaffold(name, r);
            let w = orbit_witnesses(&s).unwrap();
            for g in &w {
                verify_element(&s, &s, g).unwrap();
            }
            let rep = quotient_check(&s, &w);
            assert!(rep.holds(), "{name}: {:?}", rep.vertex_orbits);
        }
        let s = scaffold("ex-small", 1);
        let rep = quotient_check(&s, &[UniversalElement::identity(&s)]);
        assert_eq!(rep.vertex_orbits.len(), 2);
        let s = scaffold("bm-c3", 2);
        assert!(!quotient_check(&s, &[UniversalElement::identity(&s)]).holds());
    }

    #[test]
    fn bundle_actions() {
        for (name, r) in [("ex-c3-id", 1), ("ex-small", 1), ("ex-c3-twist", 1)] {
            let s = scaffold(name, r);
            let els = full(&s);
            for u in 0..s.tree().vertex_count() {
                let (act, iso) = induced_bundle_action(&s, &els, u).unwrap();
                assert!(iso.verify(&act, s.vertex_action(u)));
            }
            for c in 0..s.tree().arc_count() {
                let (act, iso) = induced_arc_bundle_action(&s, &els, c).unwrap();
                assert!(iso.verify(&act, s.arc_action(c)));
            }
        }
        let s = scaffold("bm-s3", 2);
        for u in (0..s.tree().vertex_count()).filter(|&u| s.tree().is_settled(u)) {
            let w = bundle_stabilizer_witnesses(&s, u).unwrap();
            assert!(induced_bundle_action(&s, &w, u).is_ok());
        }
    }

    #[test]
    fn acceptable_isomorphisms() {
        let g = corpus::load("bm-s3").unwrap();
        let t = CoveringTree::build(&g, 0, 2).unwrap();
        let a = Scaffolding::canonical(&g, &t).unwrap();
        let b = Scaffolding::canonical_with(&g, &t, TransversalChoice::Last).unwrap();
        let phi = build_acceptable_iso(&a, &b).unwrap();
        verify_element(&a, &b, &phi).unwrap();
        assert!(build_acceptable_iso(&a, &a).unwrap().is_identity());

        for name in ["ex-c3-id", "ex-c3-twist"] {
            let g = corpus::load(name).unwrap();
            let a = Scaffolding::canonical(&g, &CoveringTree::build(&g, 0, 1).unwrap()).unwrap();
            let b = Scaffolding::subdivided_transfer(&g, 0, 1).unwrap();
            let phi = build_acceptable_iso(&a, &b).unwrap();
            verify_element(&a, &b, &phi).unwrap();
            let n2 = b.tree().vertex_count();
            let moved: BTreeSet<UniversalElement> =
                full(&a).iter().map(|x| conjugate(&phi, x, n2).unwrap()).collect();
            let direct: BTreeSet<UniversalElement> = full(&b).into_iter().collect();
            assert_eq!(moved, direct, "{name}");
        }
    }
}
