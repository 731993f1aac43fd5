use super::{GraphMorphism, SerreGraph};
use std::collections::HashMap;

type Counts = HashMap<(usize, usize), usize>;

fn arc_counts(g: &SerreGraph) -> Counts {
    let mut c = Counts::new();
    for r in g.arcs() {
        *c.entry((r.origin, r.terminus)).or_default() += 1;
    }
    c
}

fn vertex_signature(g: &SerreGraph, v: usize) -> (usize, usize, usize) {
    let loops = g.star(v).iter().filter(|&&a| g.origin(a) == v).count();
    let self_rev = g.star(v).iter().filter(|&&a| g.is_self_reverse(a)).count();
    (g.star(v).len(), loops, self_rev)
}

/// Representatives of edges: self-reverse arcs, and the first-declared arc of each pair.
fn edge_reps(g: &SerreGraph) -> Vec<usize> {
    (0..g.arc_count()).filter(|&a| g.reverse(a) >= a).collect()
}

/// Calls `visit` on every graph isomorphism from `g` to `h` until it returns `false`.
/// Vertex maps are explored in lexicographic order, then arc assignments.
pub fn for_each_isomorphism(
    g: &SerreGraph,
    h: &SerreGraph,
    mut visit: impl FnMut(&GraphMorphism) -> bool,
) {
    if g.vertex_count() != h.vertex_count() || g.arc_count() != h.arc_count() {
        return;
    }
    let cg = arc_counts(g);
    let ch = arc_counts(h);
    let sg: Vec<_> = (0..g.vertex_count()).map(|v| vertex_signature(g, v)).collect();
    let sh: Vec<_> = (0..h.vertex_count()).map(|v| vertex_signature(h, v)).collect();
    let n = g.vertex_count();
    let mut vmap = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let reps_g = edge_reps(g);
    let mut stop = false;

    struct Ctx<'a, F> {
        g: &'a SerreGraph,
        h: &'a SerreGraph,
        cg: &'a Counts,
        ch: &'a Counts,
        sg: &'a [(usize, usize, usize)],
        sh: &'a [(usize, usize, usize)],
        reps_g: &'a [usize],
        visit: F,
    }

    fn count(c: &Counts, k: (usize, usize)) -> usize {
        c.get(&k).copied().unwrap_or(0)
    }

    fn vertices<F: FnMut(&GraphMorphism) -> bool>(
        x: usize,
        cx: &mut Ctx<'_, F>,
        vmap: &mut Vec<usize>,
        used: &mut Vec<bool>,
        stop: &mut bool,
    ) {
        if *stop {
            return;
        }
        if x == vmap.len() {
            let mut amap = vec![usize::MAX; cx.g.arc_count()];
            let mut aused = vec![false; cx.h.arc_count()];
            arcs(0, cx, vmap, &mut amap, &mut aused, stop);
            return;
        }
        for y in 0..vmap.len() {
            if used[y] || cx.sg[x] != cx.sh[y] {
                continue;
            }
            let ok = (0..x).all(|z| {
                count(cx.cg, (x, z)) == count(cx.ch, (y, vmap[z]))
                    && count(cx.cg, (z, x)) == count(cx.ch, (vmap[z], y))
            }) && count(cx.cg, (x, x)) == count(cx.ch, (y, y));
            if !ok {
                continue;
            }
            vmap[x] = y;
            used[y] = true;
            vertices(x + 1, cx, vmap, used, stop);
            used[y] = false;
            vmap[x] = usize::MAX;
            if *stop {
                return;
            }
        }
    }

    fn arcs<F: FnMut(&GraphMorphism) -> bool>(
        i: usize,
        cx: &mut Ctx<'_, F>,
        vmap: &[usize],
        amap: &mut Vec<usize>,
        aused: &mut Vec<bool>,
        stop: &mut bool,
    ) {
        if *stop {
            return;
        }
        if i == cx.reps_g.len() {
            let m = GraphMorphism { vertex_map: vmap.to_vec(), arc_map: amap.clone() };
            if !(cx.visit)(&m) {
                *stop = true;
            }
            return;
        }
        let a = cx.reps_g[i];
        let (o, t) = (vmap[cx.g.origin(a)], vmap[cx.g.terminus(a)]);
        let sr = cx.g.is_self_reverse(a);
        for b in 0..cx.h.arc_count() {
            if aused[b]
                || cx.h.origin(b) != o
                || cx.h.terminus(b) != t
                || cx.h.is_self_reverse(b) != sr
                || aused[cx.h.reverse(b)]
            {
                continue;
            }
            let (ar, br) = (cx.g.reverse(a), cx.h.reverse(b));
            amap[a] = b;
            amap[ar] = br;
            aused[b] = true;
            aused[br] = true;
            arcs(i + 1, cx, vmap, amap, aused, stop);
            aused[b] = false;
            aused[br] = false;
            amap[a] = usize::MAX;
            amap[ar] = usize::MAX;
            if *stop {
                return;
            }
        }
    }

    let mut cx = Ctx { g, h, cg: &cg, ch: &ch, sg: &sg, sh: &sh, reps_g: &reps_g, visit: &mut visit };
    vertices(0, &mut cx, &mut vmap, &mut used, &mut stop);
}

/// The first isomorphism found by [`for_each_isomorphism`].
pub fn isomorphism(g: &SerreGraph, h: &SerreGraph) -> Option<GraphMorphism> {
    let mut found = None;
    for_each_isomorphism(g, h, |m| {
        found = Some(m.clone());
        false
    });
    found
}
