use gga_core::analysis::{self, Verdict};
use gga_core::corpus;
use gga_core::covering::CoveringTree;
use gga_core::scaffold::Scaffolding;
use gga_core::universal::{self, Mode, UniversalElement};
use gga_core::{Gga, Permutation};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn scaffold(name: &str, r: usize) -> Result<Scaffolding, String> {
    let g = corpus::load(name).map_err(e2s)?;
    scaffold_of(&g, r)
}

fn scaffold_of(g: &Gga, r: usize) -> Result<Scaffolding, String> {
    let t = CoveringTree::build(g, 0, r).map_err(e2s)?;
    Scaffolding::canonical(g, &t).map_err(e2s)
}

fn group(s: &Scaffolding) -> Result<Vec<UniversalElement>, String> {
    let mode = if s.tree().is_complete() { Mode::FullIfFinite } else { Mode::RootStabilizer };
    universal::enumerate(s, mode, 1_000_000).map_err(e2s)
}

fn orders(els: &[UniversalElement]) -> Result<Vec<usize>, String> {
    let mut out = els.iter().map(|g| universal::element_order(g).map_err(e2s)).collect::<Result<Vec<_>, _>>()?;
    out.sort_unstable();
    Ok(out)
}

fn c1() -> Outcome {
    let s = scaffold("ex-c3-id", 1)?;
    let els = group(&s)?;
    ensure(els.len() == 6, format!("order {}", els.len()))?;
    ensure(universal::is_abelian(&els).map_err(e2s)?, "not abelian")?;
    let o = orders(&els)?;
    ensure(o == [1, 2, 3, 3, 6, 6], format!("orders {o:?}"))?;
    universal::group_summary(&els).map_err(e2s)
}

fn c2() -> Outcome {
    let s = scaffold("ex-c3-twist", 1)?;
    let els = group(&s)?;
    ensure(els.len() == 6, format!("order {}", els.len()))?;
    ensure(!universal::is_abelian(&els).map_err(e2s)?, "abelian")?;
    // permutations of the three matching edges, as maps on edge pairs
    let g = s.graph();
    let edges: Vec<usize> = (0..g.arc_count()).filter(|&e| e < g.reverse(e)).collect();
    ensure(edges.len() == 3, format!("{} matching edges", edges.len()))?;
    let mut perms = BTreeSet::new();
    for x in &els {
        let m = universal::to_sigma_arc_map(&s, &s, x);
        let p: Vec<usize> = edges
            .iter()
            .map(|&e| {
                let f = m[e].expect("edge in domain");
                let f = f.min(g.reverse(f));
                edges.iter().position(|&k| k == f).expect("edge")
            })
            .collect();
        perms.insert(p);
    }
    ensure(perms.len() == 6, format!("{} edge permutations", perms.len()))?;
    Ok("order 6, non-abelian, all 6 permutations of the matching edges".into())
}

/// Brute force over pairs of vertex-group elements, keeping those whose
/// induced vertex map carries every matching arc to an arc.
fn small_oracle(s: &Scaffolding) -> BTreeSet<(Permutation, Permutation)> {
    let g = s.graph();
    let mut out = BTreeSet::new();
    for gv in s.vertex_action(0).elements() {
        for gw in s.vertex_action(1).elements() {
            let sigma: Vec<usize> = (0..g.vertex_count())
                .map(|x| {
                    let u = s.vertex_bundle(x);
                    let f = if u == 0 { gv } else { gw };
                    s.vertex_at(u, f.apply(s.vertex_colour(x))).expect("colour")
                })
                .collect();
            let ok = (0..g.arc_count()).all(|e| {
                let (o, t) = (sigma[g.origin(e)], sigma[g.terminus(e)]);
                (0..g.arc_count()).any(|f| g.origin(f) == o && g.terminus(f) == t)
            });
            if ok {
                out.insert((gv.clone(), gw.clone()));
            }
        }
    }
    out
}

fn c3() -> Outcome {
    let s = scaffold("ex-small", 1)?;
    ensure(s.graph().vertex_count() == 11, format!("{} scaffolding vertices", s.graph().vertex_count()))?;
    let els = group(&s)?;
    let involutions = orders(&els)?.iter().filter(|&&k| k == 2).count();
    ensure(involutions == 1, format!("{involutions} involutions"))?;
    let oracle = small_oracle(&s);
    let got: BTreeSet<(Permutation, Permutation)> =
        els.iter().map(|e| (e.local[0].clone().unwrap(), e.local[1].clone().unwrap())).collect();
    ensure(got == oracle, "differs from brute force")?;
    ensure(els.len() == 12 && oracle.len() == 12, format!("order {}", els.len()))?;
    Ok("order 12, one element of order 2, equal to brute force".into())
}

fn c4() -> Outcome {
    let mut sizes = Vec::new();
    for (name, r) in [("ex-c3-id", 1), ("ex-c3-twist", 1), ("ex-small", 1), ("bm-c3", 2)] {
        let s = scaffold(name, r)?;
        let w = universal::orbit_witnesses(&s).map_err(e2s)?;
        for g in &w {
            universal::verify_element(&s, &s, g).map_err(|e| format!("{name}: {e}"))?;
        }
        let rep = universal::quotient_check(&s, &w);
        ensure(rep.orbits_are_fibres, format!("{name}: orbits are not the fibres"))?;
        ensure(rep.isomorphic_to_base, format!("{name}: quotient differs from the base"))?;
        sizes.push(format!("{name} {}", rep.vertex_orbits.len()));
    }
    Ok(format!("orbits {}", sizes.join(", ")))
}

fn c5() -> Outcome {
    let mut checked = 0;
    for (file, _) in corpus::FILES {
        let g = corpus::load(file).map_err(e2s)?;
        let s = scaffold_of(&g, 2)?;
        let t = s.tree();
        for u in (0..t.vertex_count()).filter(|&u| t.is_interior(u)) {
            let w = universal::bundle_stabilizer_witnesses(&s, u).map_err(|e| format!("{file}: {e}"))?;
            let (act, iso) = universal::induced_bundle_action(&s, &w, u).map_err(|e| format!("{file}: {e}"))?;
            ensure(iso.verify(&act, s.vertex_action(u)), format!("{file}: vertex bundle {}", t.vertex_id(u)))?;
            ensure(act.order() == s.vertex_action(u).order(), format!("{file}: bundle group too small"))?;
            checked += 1;
            for &c in t.graph().star(u) {
                let (act, iso) =
                    universal::induced_arc_bundle_action(&s, &w, c).map_err(|e| format!("{file}: {e}"))?;
                ensure(iso.verify(&act, s.arc_action(c)), format!("{file}: arc bundle {}", t.arc_id(c)))?;
                checked += 1;
            }
        }
    }
    let s = scaffold("ex-small", 1)?;
    let els = group(&s)?;
    ensure(!analysis::contains_s3(&els).map_err(e2s)?, "S3 embeds in the EX-SMALL group")?;
    Ok(format!("{checked} bundle actions verified, no S3 subgroup"))
}

/// Automorphisms of the radius-2 ball of the 3-regular tree, properly
/// edge-coloured by {1, 2, 3}, that fix the root and whose local actions on
/// colours lie in `f`. Vertices are colour words; maps are returned as word maps.
fn ball_oracle(f: &BTreeSet<Vec<usize>>) -> BTreeSet<BTreeMap<Vec<usize>, Vec<usize>>> {
    let s3: Vec<Vec<usize>> = vec![
        vec![0, 1, 2],
        vec![0, 2, 1],
        vec![1, 0, 2],
        vec![1, 2, 0],
        vec![2, 0, 1],
        vec![2, 1, 0],
    ];
    let mut out = BTreeSet::new();
    for root in &s3 {
        if !f.contains(root) {
            continue;
        }
        // a local action at neighbour `c` must send c to root[c]
        let options: Vec<Vec<&Vec<usize>>> =
            (0..3).map(|c| s3.iter().filter(|p| p[c] == root[c] && f.contains(*p)).collect()).collect();
        for a in &options[0] {
            for b in &options[1] {
                for d in &options[2] {
                    let locals = [a, b, d];
                    let mut m = BTreeMap::new();
                    m.insert(vec![], vec![]);
                    for c in 0..3 {
                        m.insert(vec![c], vec![root[c]]);
                        for e in (0..3).filter(|&e| e != c) {
                            m.insert(vec![c, e], vec![root[c], locals[c][e]]);
                        }
                    }
                    out.insert(m);
                }
            }
        }
    }
    out
}

fn tree_words(s: &Scaffolding) -> Result<Vec<Vec<usize>>, String> {
    let g = s.gga();
    let aug = g.augmented();
    let t = s.tree();
    let points = g.vertex_action(0).points();
    let mut out = Vec::new();
    for u in 0..t.vertex_count() {
        let mut w = Vec::new();
        for part in t.vertex_id(u).split('/').skip(1) {
            let b = aug.arc_index(part).ok_or(format!("unknown arc `{part}`"))?;
            let name = points.name(aug.adhesion[b][0]);
            w.push(name.parse::<usize>().map_err(e2s)? - 1);
        }
        out.push(w);
    }
    Ok(out)
}

fn c6() -> Outcome {
    let mut sizes = Vec::new();
    for name in ["bm-c3", "bm-s3"] {
        let s = scaffold(name, 2)?;
        let els = universal::enumerate(&s, Mode::RootStabilizer, 1_000_000).map_err(e2s)?;
        let words = tree_words(&s)?;
        let got: BTreeSet<BTreeMap<Vec<usize>, Vec<usize>>> = els
            .iter()
            .map(|g| (0..words.len()).map(|u| (words[u].clone(), words[g.image[u].unwrap()].clone())).collect())
            .collect();
        let f: BTreeSet<Vec<usize>> = s
            .vertex_action(0)
            .elements()
            .iter()
            .map(|p| (0..3).map(|x| p.apply(x)).collect())
            .collect();
        let oracle = ball_oracle(&f);
        ensure(got == oracle, format!("{name}: {} elements vs oracle {}", got.len(), oracle.len()))?;
        // |F| times |F_x|^3
        let stab = f.iter().filter(|p| p[0] == 0).count();
        ensure(oracle.len() == f.len() * stab.pow(3), format!("{name}: oracle size {}", oracle.len()))?;
        sizes.push(format!("{name} {}", got.len()));
    }
    Ok(format!("equal to the ball oracle: {}", sizes.join(", ")))
}

fn c7() -> Outcome {
    let s = scaffold("bm-c3", 2)?;
    let els = group(&s)?;
    let paths = analysis::interior_paths_through_root(&s);
    ensure(!paths.is_empty(), "no interior paths")?;
    for p in &paths {
        let r = analysis::property_p_check(&s, &els, p);
        ensure(r.verdict == Verdict::Pass, format!("bm-c3 path {p:?}: {}", r.verdict))?;
    }
    let s = scaffold("a1-s3", 3)?;
    let els = group(&s)?;
    let edge = analysis::tree_path(&s, 0, s.tree().graph().origin(s.tree().graph().star(0)[0]));
    let r = analysis::property_p_check(&s, &els, &edge);
    ensure(r.verdict == Verdict::Fail, format!("a1-s3: {}", r.verdict))?;
    ensure(r.counterexample.is_some(), "a1-s3: no counterexample")?;
    Ok(format!(
        "bm-c3 {} paths pass, a1-s3 fails (fixator {} vs product {})",
        paths.len(),
        r.fixator_size,
        r.product_size
    ))
}

fn c8() -> Outcome {
    let mut free = Vec::new();
    for (file, _) in corpus::FILES {
        let g = corpus::load(file).map_err(e2s)?;
        if !g.is_free() {
            continue;
        }
        let s = scaffold_of(&g, 3)?;
        let els = group(&s)?;
        for &c in s.tree().graph().star(0) {
            let chain = analysis::ipk_detect(&s, &els, c, 3).map_err(e2s)?;
            ensure(chain.k == Some(1), format!("{file}: k {:?}", chain.k))?;
        }
        free.push(*file);
    }
    ensure(!free.is_empty(), "no free gga in the corpus")?;
    let s = scaffold("a1-s3", 3)?;
    let els = group(&s)?;
    let mut ks = BTreeSet::new();
    for &c in s.tree().graph().star(0) {
        let chain = analysis::ipk_detect(&s, &els, c, 3).map_err(e2s)?;
        let k = chain.k.ok_or("a1-s3: chain did not stabilize")?;
        ks.insert(k);
    }
    Ok(format!("k = 1 for {}; a1-s3 k = {:?}", free.join(" "), ks))
}

fn c9() -> Outcome {
    let s = scaffold("ex-parity", 2)?;
    let els = group(&s)?;
    ensure(analysis::parity_check(&els), "mixed signs")?;
    let signs = analysis::parities_present(&els, s.tree().root());
    ensure(signs.len() == 2, "only one parity occurs")?;
    Ok(format!("{} elements, both parities", els.len()))
}

fn c10() -> Outcome {
    let s = scaffold("a1-s3", 3)?;
    let els = group(&s)?;
    ensure(analysis::constant_local_action_check(&els), "local actions differ")?;
    let rep = analysis::regularity_check(&s, &els, true).map_err(e2s)?;
    ensure(rep.holds(), format!("{rep:?}"))?;
    Ok(format!("{} elements, trivial-local part regular", els.len()))
}

fn restrictions(s: &Scaffolding) -> Result<BTreeSet<BTreeMap<String, String>>, String> {
    let t = s.tree();
    Ok(group(s)?
        .iter()
        .map(|g| {
            g.domain().into_iter().map(|u| (t.vertex_id(u).to_string(), t.vertex_id(g.image[u].unwrap()).to_string())).collect()
        })
        .collect())
}

fn same_augmented(a: &Gga, b: &Gga) -> bool {
    let (x, y) = (a.augmented(), b.augmented());
    x.plus.vertices == y.plus.vertices && x.plus.arcs == y.plus.arcs && x.rho == y.rho
}

fn c11() -> Outcome {
    let mut sizes = Vec::new();
    for (name, r) in [("ex-small", 1), ("ex-c3-twist", 1), ("a1-s3", 2), ("bm-s3", 2)] {
        let g = corpus::load(name).map_err(e2s)?;
        let base = restrictions(&scaffold_of(&g, r)?)?;
        for (what, h) in [("reduce", g.reduce().map_err(e2s)?), ("arc-reduce", g.arc_reduce().map_err(e2s)?)] {
            ensure(h.is_valid(), format!("{name} {what}: invalid"))?;
            ensure(same_augmented(&g, &h), format!("{name} {what}: augmented digraph differs"))?;
            ensure(restrictions(&scaffold_of(&h, r)?)? == base, format!("{name} {what}: tree action differs"))?;
        }
        sizes.push(format!("{name} {}", base.len()));
    }
    Ok(format!("tree maps preserved by both reductions: {}", sizes.join(", ")))
}

fn c12() -> Outcome {
    for name in ["ex-c3-id", "ex-c3-twist"] {
        let g = corpus::load(name).map_err(e2s)?;
        let a = scaffold_of(&g, 1)?;
        let b = Scaffolding::subdivided_transfer(&g, 0, 1).map_err(e2s)?;
        let phi = universal::build_acceptable_iso(&a, &b).map_err(e2s)?;
        universal::verify_element(&a, &b, &phi).map_err(e2s)?;
        let p = universal::to_sigma_map(&a, &b, &phi);
        let p: Vec<usize> = p.into_iter().map(|x| x.ok_or("partial transfer map")).collect::<Result<_, _>>()?;
        let kept: BTreeSet<usize> = p.iter().copied().collect();
        ensure(kept.len() == p.len(), "transfer map not injective")?;
        let moved: BTreeSet<BTreeMap<usize, usize>> = group(&a)?
            .iter()
            .map(|x| {
                let m = universal::to_sigma_map(&a, &a, x);
                (0..p.len()).map(|i| (p[i], p[m[i].unwrap()])).collect()
            })
            .collect();
        let direct: BTreeSet<BTreeMap<usize, usize>> = group(&b)?
            .iter()
            .map(|y| {
                let m = universal::to_sigma_map(&b, &b, y);
                kept.iter().map(|&i| (i, m[i].unwrap())).collect()
            })
            .collect();
        ensure(moved == direct, format!("{name}: groups differ on the kept bundles"))?;
    }
    Ok("both inversions agree on scaffolding vertices".into())
}

fn c13() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let names: Vec<&str> = corpus::FILES.iter().map(|f| f.0).collect();
    let mut cache: BTreeMap<&str, Scaffolding> = BTreeMap::new();
    let mut steps = 0;
    for round in 0..100 {
        let name = *names.choose(&mut rng).unwrap();
        if !cache.contains_key(name) {
            cache.insert(name, scaffold(name, 5)?);
        }
        let s = &cache[name];
        let t = s.tree();
        let settled: Vec<usize> = (0..t.vertex_count()).filter(|&u| t.is_settled(u)).collect();
        // seeds near the root, so their radius-3 balls map inside the truncation
        let near: Vec<usize> = settled.iter().copied().filter(|&x| t.depth(x) <= 1).collect();
        let u = *near.choose(&mut rng).unwrap();
        let same: Vec<usize> = near.iter().copied().filter(|&x| t.vertex_label(x) == t.vertex_label(u)).collect();
        let u2 = *same.choose(&mut rng).unwrap();
        let els = s.vertex_action(u).elements();
        let f = els[rng.random_range(0..els.len())].clone();
        let seed = UniversalElement::seed(s, u, u2, f);
        let e = universal::extend_full(s, s, &seed).map_err(|e| format!("round {round} {name}: {e}"))?;
        universal::verify_element(s, s, &e).map_err(|e| format!("round {round} {name}: {e}"))?;
        let dist = t.distances_from(u);
        let ball = settled.iter().filter(|&&x| dist[x] <= 3);
        ensure(ball.clone().all(|&x| e.local[x].is_some()), format!("round {round} {name}: not extended"))?;
        for c in 0..t.arc_count() {
            let v = t.graph().terminus(c);
            let (Some(v2), Some(g_v)) = (e.image[v], e.local[v].as_ref()) else { continue };
            if !t.has_complete_star(v) || !t.has_complete_star(v2) {
                continue;
            }
            let forced = universal::forced_arc_image(s, s, v, v2, g_v, c).map_err(e2s)?;
            // scan the image star in several orders for the arc whose adhesion image matches
            let want: BTreeSet<usize> = s.psi_map(c).unwrap().iter().map(|&x| g_v.apply(x)).collect();
            let mut star: Vec<usize> = t.graph().star(v2).to_vec();
            for pass in 0..3 {
                match pass {
                    1 => star.reverse(),
                    2 => star.rotate_left(1),
                    _ => {}
                }
                let hits: Vec<usize> = star
                    .iter()
                    .copied()
                    .filter(|&c2| {
                        t.arc_label(c2) == t.arc_label(forced)
                            && s.psi_map(c2).unwrap().iter().copied().collect::<BTreeSet<_>>() == want
                    })
                    .collect();
                ensure(hits == [forced], format!("round {round} {name}: forced arc not unique"))?;
            }
            let Ok(step) = universal::one_step_extend(s, s, v, v2, g_v, c) else { continue };
            let w = t.graph().origin(c);
            let image = s.psi_map(t.graph().reverse(c)).unwrap();
            let stab = s.vertex_action(w).pointwise_stabilizer_elements(image).len();
            ensure(step.candidates.len() == stab, format!("round {round} {name}: candidate count"))?;
            steps += 1;
        }
    }
    Ok(format!("100 seeds extended, {steps} extension steps checked"))
}

fn c14() -> Outcome {
    let kinds = |m: &Scaffolding| m.check().iter().map(|d| d.kind()).collect::<Vec<_>>();
    let mut n = 0;
    for (file, _) in corpus::FILES {
        for r in 0..=2 {
            let s = scaffold(file, r)?;
            ensure(s.check().is_empty(), format!("{file} r{r}: {:?}", kinds(&s)))?;
            n += 1;
        }
    }
    let s = scaffold("bm-s3", 2)?;
    let m = s.without_arc(0).map_err(e2s)?;
    ensure(kinds(&m).contains(&"arc-colouring-not-bijective"), format!("deleted arc: {:?}", kinds(&m)))?;

    let s = scaffold("ex-c3-id", 1)?;
    let root = s.bundle_vertices(0);
    let m = s.with_swapped_colours(root[0], root[1]).map_err(e2s)?;
    ensure(kinds(&m).contains(&"psi-not-adhesion"), format!("recoloured: {:?}", kinds(&m)))?;

    let tw = corpus::load("ex-c3-twist").map_err(e2s)?;
    let m = Scaffolding::parse(&tw, &s.to_text()).map_err(e2s)?;
    ensure(kinds(&m).contains(&"psi-twist-mismatch"), format!("broken psi: {:?}", kinds(&m)))?;
    Ok(format!("{n} canonical scaffoldings pass, 3 mutations caught"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("EX-C3 identity inversion group", c1),
        ("EX-C3 twisted inversion group", c2),
        ("EX-SMALL group", c3),
        ("orbit quotient is the base graph", c4),
        ("bundle actions", c5),
        ("Burger-Mozes ball oracle", c6),
        ("property (P)", c7),
        ("(IPk) chains", c8),
        ("parity invariant", c9),
        ("constant local action", c10),
        ("reduction invariance", c11),
        ("subdivision transfer", c12),
        ("extension property", c13),
        ("scaffolding checker", c14),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_millis();
        match out {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({ms} ms)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
