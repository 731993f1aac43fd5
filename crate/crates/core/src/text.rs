//! Line-oriented text formats: the gga format and the converter sub-formats.
//!
//! ```text
//! gga NAME
//! vertex ID
//! points: p1 p2 ...
//! gens: perm ; perm ...
//! arc ID from U to V reverse RID
//! points: ...
//! gens: ...
//! embed: q->p q->p ...
//! inversion: perm
//! ```
//!
//! `#` starts a comment. An arc and its reverse share one action, so `points:`
//! and `gens:` may be given on either of the two blocks (or on both, if equal).

use crate::error::{parse_err, Error, Result};
use crate::gga::{FiniteGroup, Gga, GraphOfGroups, LocalActionDiagram};
use crate::perm::{PermAction, Permutation, PointSet};
use crate::sgraph::SerreGraph;
use std::collections::HashMap;
use std::fmt::Write;
use std::sync::Arc;

/// One header line plus its `key: value` lines.
#[derive(Clone, Debug)]
struct Block {
    line: usize,
    words: Vec<String>,
    attrs: Vec<(String, String, usize)>,
}

impl Block {
    fn attr(&self, key: &str) -> Option<(&str, usize)> {
        self.attrs.iter().find(|a| a.0 == key).map(|a| (a.1.as_str(), a.2))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let mut seen = Vec::new();
        for (k, _, l) in &self.attrs {
            if !allowed.contains(&k.as_str()) {
                return parse_err(*l, format!("unexpected `{k}:` in `{}` block", self.words[0]));
            }
            if seen.contains(&k) {
                return parse_err(*l, format!("duplicate `{k}:`"));
            }
            seen.push(k);
        }
        Ok(())
    }
}

fn blocks(text: &str) -> Result<Vec<Block>> {
    let mut out: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let first = content.split_whitespace().next().unwrap();
        if let Some(key) = first.strip_suffix(':').or_else(|| content.split_once(':').map(|p| p.0)).filter(|k| {
            !k.contains(char::is_whitespace)
        }) {
            let value = content.split_once(':').map(|p| p.1).unwrap_or("").trim().to_string();
            match out.last_mut() {
                Some(b) => b.attrs.push((key.to_string(), value, line)),
                None => return parse_err(line, format!("`{key}:` before any header")),
            }
        } else {
            out.push(Block {
                line,
                words: content.split_whitespace().map(str::to_string).collect(),
                attrs: Vec::new(),
            });
        }
    }
    if out.is_empty() {
        return parse_err(1, "empty document");
    }
    Ok(out)
}

fn words(v: &str) -> Vec<String> {
    v.split_whitespace().map(str::to_string).collect()
}

fn perms(v: &str) -> Vec<String> {
    v.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn doc_header(b: &Block, kind: &str) -> Result<String> {
    if b.words[0] != kind || b.words.len() != 2 {
        return parse_err(b.line, format!("expected `{kind} NAME`"));
    }
    b.check_keys(&[])?;
    Ok(b.words[1].clone())
}

/// `arc ID from U to V reverse RID`, plus optional trailing `group G`.
fn arc_header(b: &Block) -> Result<(String, String, String, String, Option<String>)> {
    let w = &b.words;
    let ok = (w.len() == 8 || (w.len() == 10 && w[8] == "group"))
        && w[2] == "from"
        && w[4] == "to"
        && w[6] == "reverse";
    if !ok {
        return parse_err(b.line, "expected `arc ID from U to V reverse RID`");
    }
    Ok((w[1].clone(), w[3].clone(), w[5].clone(), w[7].clone(), w.get(9).cloned()))
}

fn make_action(points: &[String], gens: &[String], line: usize) -> Result<PermAction> {
    let ps = PointSet::new(points.to_vec()).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    let ps = Arc::new(ps);
    let gs = gens
        .iter()
        .map(|g| Permutation::parse(g, &ps))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    PermAction::new(ps, gs).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

/// Source lines of a block and its attributes, for error reporting.
#[derive(Clone, Copy, Debug, Default)]
struct Lines {
    head: usize,
    points: usize,
    gens: usize,
    embed: usize,
    inversion: usize,
}

impl Lines {
    fn of(b: &Block) -> Lines {
        let at = |k: &str| b.attr(k).map_or(b.line, |a| a.1);
        Lines { head: b.line, points: at("points"), gens: at("gens"), embed: at("embed"), inversion: at("inversion") }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexBlock {
    pub id: String,
    pub points: Vec<String>,
    pub gens: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcBlock {
    pub id: String,
    pub from: String,
    pub to: String,
    pub reverse: String,
    pub points: Option<Vec<String>>,
    pub gens: Option<Vec<String>>,
    pub embed: Vec<(String, String)>,
    pub inversion: Option<String>,
}

/// The parsed form of a gga file, before any group computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GgaDocument {
    pub name: String,
    pub vertices: Vec<VertexBlock>,
    pub arcs: Vec<ArcBlock>,
}

impl GgaDocument {
    /// Parses and resolves references; errors carry line numbers.
    pub fn parse(text: &str) -> Result<GgaDocument> {
        Ok(Self::parse_with_lines(text)?.0)
    }

    fn parse_with_lines(text: &str) -> Result<(GgaDocument, Vec<Lines>, Vec<Lines>)> {
        let bs = blocks(text)?;
        let name = doc_header(&bs[0], "gga")?;
        let mut doc = GgaDocument { name, vertices: Vec::new(), arcs: Vec::new() };
        let (mut vlines, mut alines) = (Vec::new(), Vec::new());
        for b in &bs[1..] {
            match b.words[0].as_str() {
                "vertex" => {
                    if b.words.len() != 2 {
                        return parse_err(b.line, "expected `vertex ID`");
                    }
                    b.check_keys(&["points", "gens"])?;
                    let Some((p, _)) = b.attr("points") else {
                        return parse_err(b.line, format!("vertex `{}` has no `points:`", b.words[1]));
                    };
                    doc.vertices.push(VertexBlock {
                        id: b.words[1].clone(),
                        points: words(p),
                        gens: b.attr("gens").map(|g| perms(g.0)).unwrap_or_default(),
                    });
                    vlines.push(Lines::of(b));
                }
                "arc" => {
                    let (id, from, to, reverse, group) = arc_header(b)?;
                    if group.is_some() {
                        return parse_err(b.line, "`group` is only allowed in gog documents");
                    }
                    b.check_keys(&["points", "gens", "embed", "inversion"])?;
                    let mut embed = Vec::new();
                    if let Some((e, l)) = b.attr("embed") {
                        for pair in e.split_whitespace() {
                            let Some((q, p)) = pair.split_once("->") else {
                                return parse_err(l, format!("bad embed entry `{pair}`"));
                            };
                            embed.push((q.to_string(), p.to_string()));
                        }
                    }
                    doc.arcs.push(ArcBlock {
                        id,
                        from,
                        to,
                        reverse,
                        points: b.attr("points").map(|p| words(p.0)),
                        gens: b.attr("gens").map(|g| perms(g.0)),
                        embed,
                        inversion: b.attr("inversion").map(|i| i.0.to_string()),
                    });
                    alines.push(Lines::of(b));
                }
                other => return parse_err(b.line, format!("unknown section `{other}`")),
            }
        }
        doc.resolve(&vlines, &alines)?;
        Ok((doc, vlines, alines))
    }

    /// Reference checks, then full construction to surface embedding and
    /// permutation errors with their lines.
    fn resolve(&self, vlines: &[Lines], alines: &[Lines]) -> Result<()> {
        self.build(vlines, alines).map(|_| ())
    }

    fn build(&self, vlines: &[Lines], alines: &[Lines]) -> Result<Gga> {
        let mut base = SerreGraph::new();
        let mut vactions = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            base.add_vertex(&v.id).map_err(|e| Error::Parse { line: vlines[i].head, msg: e.to_string() })?;
            vactions.push(make_action(&v.points, &v.gens, vlines[i].gens)?);
        }
        let arc_pos: HashMap<&str, usize> =
            self.arcs.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
        for (i, a) in self.arcs.iter().enumerate() {
            let l = alines[i].head;
            let o = base.vertex_index(&a.from);
            let t = base.vertex_index(&a.to);
            let (Some(o), Some(t)) = (o, t) else {
                return parse_err(l, format!("arc `{}` names an undeclared vertex", a.id));
            };
            let Some(&r) = arc_pos.get(a.reverse.as_str()) else {
                return parse_err(l, format!("reverse `{}` of arc `{}` is not declared", a.reverse, a.id));
            };
            let rb = &self.arcs[r];
            if r == i && a.from != a.to {
                return parse_err(l, format!("self-reverse arc `{}` must be a loop", a.id));
            }
            if rb.reverse != a.id || rb.from != a.to || rb.to != a.from {
                return parse_err(l, format!("arc `{}` and `{}` are not declared as reverses", a.id, rb.id));
            }
            if a.inversion.is_some() && r != i {
                return parse_err(l, format!("`inversion:` on arc `{}` which is not self-reverse", a.id));
            }
            base.add_arc_raw(&a.id, o, t, r).map_err(|e| Error::Parse { line: l, msg: e.to_string() })?;
        }
        let mut aactions: Vec<Option<PermAction>> = vec![None; self.arcs.len()];
        let mut embeddings = Vec::new();
        let mut inversions = Vec::new();
        for (i, a) in self.arcs.iter().enumerate() {
            let l = alines[i].head;
            let r = arc_pos[a.reverse.as_str()];
            if aactions[i].is_none() {
                let rb = &self.arcs[r];
                let (pts, gens, line) = match (&a.points, &rb.points) {
                    (Some(p), Some(q)) => {
                        if p != q {
                            return parse_err(alines[r].points, format!("arc `{}` and its reverse declare different points", a.id));
                        }
                        (p, a.gens.clone().or(rb.gens.clone()).unwrap_or_default(), alines[i].gens)
                    }
                    (Some(p), None) => (p, a.gens.clone().unwrap_or_default(), alines[i].gens),
                    (None, Some(q)) => (q, rb.gens.clone().unwrap_or_default(), alines[r].gens),
                    (None, None) => return parse_err(l, format!("arc `{}` has no `points:`", a.id)),
                };
                let act = make_action(pts, &gens, line)?;
                if let (Some(_), Some(g2)) = (&a.gens, &rb.gens) {
                    let other = make_action(pts, g2, alines[r].gens)?;
                    if !(act.same_action(&other) && other.same_action(&act)) {
                        return parse_err(alines[r].gens, format!("arc `{}` and its reverse declare different groups", a.id));
                    }
                }
                aactions[r] = Some(act.clone());
                aactions[i] = Some(act);
            }
            let act = aactions[i].as_ref().unwrap();
            let x = &vactions[base.terminus(i)];
            let mut map = vec![usize::MAX; act.degree()];
            let mut used = vec![false; x.degree()];
            for (q, p) in &a.embed {
                let Some(qi) = act.points().index_of(q) else {
                    return parse_err(alines[i].embed, format!("embed: `{q}` is not a point of arc `{}`", a.id));
                };
                let Some(pi) = x.points().index_of(p) else {
                    return parse_err(alines[i].embed, format!("embed: `{p}` is not a point of vertex `{}`", a.to));
                };
                if map[qi] != usize::MAX || used[pi] {
                    return parse_err(alines[i].embed, format!("embed of arc `{}` is not injective", a.id));
                }
                map[qi] = pi;
                used[pi] = true;
            }
            if map.contains(&usize::MAX) {
                return parse_err(alines[i].embed, format!("embed of arc `{}` does not cover every arc point", a.id));
            }
            embeddings.push(map);
            inversions.push(match &a.inversion {
                Some(h) => Some(act.parse_element(h).map_err(|e| Error::Parse { line: alines[i].inversion, msg: e.to_string() })?),
                None => None,
            });
        }
        Gga::new(
            &self.name,
            base,
            vactions,
            aactions.into_iter().map(Option::unwrap).collect(),
            embeddings,
            inversions,
        )
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })
    }

    pub fn to_gga(&self) -> Result<Gga> {
        let vl = vec![Lines::default(); self.vertices.len()];
        let al = vec![Lines::default(); self.arcs.len()];
        self.build(&vl, &al)
    }

    pub fn from_gga(g: &Gga) -> GgaDocument {
        let base = g.base();
        let vertices = (0..base.vertex_count())
            .map(|v| {
                let act = g.vertex_action(v);
                VertexBlock {
                    id: base.vertex_id(v).to_string(),
                    points: act.points().names().to_vec(),
                    gens: act.generators().iter().map(|p| act.fmt_element(p)).collect(),
                }
            })
            .collect();
        let arcs = (0..base.arc_count())
            .map(|a| {
                let act = g.arc_action(a);
                let owner = base.reverse(a) >= a;
                let x = g.vertex_action(base.terminus(a));
                ArcBlock {
                    id: base.arc_id(a).to_string(),
                    from: base.vertex_id(base.origin(a)).to_string(),
                    to: base.vertex_id(base.terminus(a)).to_string(),
                    reverse: base.arc_id(base.reverse(a)).to_string(),
                    points: owner.then(|| act.points().names().to_vec()),
                    gens: owner.then(|| act.generators().iter().map(|p| act.fmt_element(p)).collect()),
                    embed: g
                        .embedding(a)
                        .iter()
                        .enumerate()
                        .map(|(y, &p)| (act.points().name(y).to_string(), x.points().name(p).to_string()))
                        .collect(),
                    inversion: g.raw_inversion(a).map(|h| act.fmt_element(h)),
                }
            })
            .collect();
        GgaDocument { name: g.name().to_string(), vertices, arcs }
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "gga {}", self.name);
        for v in &self.vertices {
            let _ = writeln!(s, "vertex {}", v.id);
            let _ = writeln!(s, "points: {}", v.points.join(" "));
            let _ = writeln!(s, "gens: {}", v.gens.join(" ; "));
        }
        for a in &self.arcs {
            let _ = writeln!(s, "arc {} from {} to {} reverse {}", a.id, a.from, a.to, a.reverse);
            if let Some(p) = &a.points {
                let _ = writeln!(s, "points: {}", p.join(" "));
            }
            if let Some(g) = &a.gens {
                let _ = writeln!(s, "gens: {}", g.join(" ; "));
            }
            let e: Vec<String> = a.embed.iter().map(|(q, p)| format!("{q}->{p}")).collect();
            let _ = writeln!(s, "embed: {}", e.join(" "));
            if let Some(h) = &a.inversion {
                let _ = writeln!(s, "inversion: {h}");
            }
        }
        s
    }
}

/// Serializes a gga in the gga format.
pub fn to_text(g: &Gga) -> String {
    GgaDocument::from_gga(g).serialize()
}

/// Which format a document is in, from its first header word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Gga,
    Bm,
    Box,
    Gog,
    Lad,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Gga => "gga",
            Format::Bm => "bm",
            Format::Box => "box",
            Format::Gog => "gog",
            Format::Lad => "lad",
        }
    }
}

pub fn detect_format(text: &str) -> Result<Format> {
    let b = blocks(text)?;
    match b[0].words[0].as_str() {
        "gga" => Ok(Format::Gga),
        "bm" => Ok(Format::Bm),
        "box" => Ok(Format::Box),
        "gog" => Ok(Format::Gog),
        "lad" => Ok(Format::Lad),
        other => parse_err(b[0].line, format!("unknown document kind `{other}`")),
    }
}

/// Parses a document of any supported format into a gga.
pub fn parse_any(text: &str) -> Result<Gga> {
    match detect_format(text)? {
        Format::Gga => GgaDocument::parse(text)?.to_gga(),
        Format::Bm => parse_bm(text),
        Format::Box => parse_box(text),
        Format::Gog => parse_gog(text)?.to_gga(),
        Format::Lad => parse_lad(text)?.to_gga(),
    }
}

fn action_block(b: &Block) -> Result<PermAction> {
    let Some((p, _)) = b.attr("points") else {
        return parse_err(b.line, "missing `points:`");
    };
    let gens = b.attr("gens").map(|g| perms(g.0)).unwrap_or_default();
    make_action(&words(p), &gens, b.attr("gens").map_or(b.line, |g| g.1))
}

/// ```text
/// bm NAME
/// points: 1 2 3
/// gens: (1 2 3)
/// ```
pub fn parse_bm(text: &str) -> Result<Gga> {
    let bs = blocks(text)?;
    if bs.len() != 1 {
        return parse_err(bs[1].line, "a bm document has a single section");
    }
    let b = &bs[0];
    if b.words[0] != "bm" || b.words.len() != 2 {
        return parse_err(b.line, "expected `bm NAME`");
    }
    b.check_keys(&["points", "gens"])?;
    Gga::from_burger_mozes(&b.words[1], &action_block(b)?)
}

/// ```text
/// box NAME
/// action M
/// points: ...
/// gens: ...
/// action N
/// points: ...
/// gens: ...
/// ```
pub fn parse_box(text: &str) -> Result<Gga> {
    let bs = blocks(text)?;
    let name = doc_header(&bs[0], "box")?;
    let mut acts = HashMap::new();
    for b in &bs[1..] {
        if b.words.len() != 2 || b.words[0] != "action" || !["M", "N"].contains(&b.words[1].as_str()) {
            return parse_err(b.line, "expected `action M` or `action N`");
        }
        b.check_keys(&["points", "gens"])?;
        acts.insert(b.words[1].clone(), action_block(b)?);
    }
    let (Some(m), Some(n)) = (acts.get("M"), acts.get("N")) else {
        return parse_err(bs[0].line, "box documents need `action M` and `action N`");
    };
    Gga::from_box_product(&name, m, n)
}

/// ```text
/// gog NAME
/// group C2
/// elements: e s
/// table: e s ; s e
/// group C3
/// points: 1 2 3          # or a permutation group; elements become g0, g1, ...
/// gens: (1 2 3)
/// vertex v group C2
/// arc a from v to w reverse b group C1
/// hom: e->e
/// ```
pub fn parse_gog(text: &str) -> Result<GraphOfGroups> {
    let bs = blocks(text)?;
    let name = doc_header(&bs[0], "gog")?;
    let mut groups: HashMap<String, FiniteGroup> = HashMap::new();
    let mut graph = SerreGraph::new();
    let mut vgroups = Vec::new();
    let mut arcs: Vec<(&Block, String, String, String, String, String)> = Vec::new();
    for b in &bs[1..] {
        match b.words[0].as_str() {
            "group" => {
                if b.words.len() != 2 {
                    return parse_err(b.line, "expected `group NAME`");
                }
                let grp = if let Some((els, l)) = b.attr("elements") {
                    b.check_keys(&["elements", "table"])?;
                    let names = words(els);
                    let Some((tab, tl)) = b.attr("table") else {
                        return parse_err(l, "`elements:` without `table:`");
                    };
                    let pos: HashMap<&str, usize> =
                        names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
                    let mut table = Vec::new();
                    for row in tab.split(';') {
                        let r = row
                            .split_whitespace()
                            .map(|x| pos.get(x).copied().ok_or(x))
                            .collect::<std::result::Result<Vec<_>, _>>();
                        match r {
                            Ok(r) => table.push(r),
                            Err(x) => return parse_err(tl, format!("unknown element `{x}`")),
                        }
                    }
                    FiniteGroup::from_table(names, table).map_err(|e| Error::Parse { line: tl, msg: e.to_string() })?
                } else {
                    b.check_keys(&["points", "gens"])?;
                    FiniteGroup::from_permutation_group(&action_block(b)?)
                };
                groups.insert(b.words[1].clone(), grp);
            }
            "vertex" => {
                if b.words.len() != 4 || b.words[2] != "group" {
                    return parse_err(b.line, "expected `vertex ID group G`");
                }
                b.check_keys(&[])?;
                let Some(grp) = groups.get(&b.words[3]) else {
                    return parse_err(b.line, format!("unknown group `{}`", b.words[3]));
                };
                graph.add_vertex(&b.words[1]).map_err(|e| Error::Parse { line: b.line, msg: e.to_string() })?;
                vgroups.push(grp.clone());
            }
            "arc" => {
                let (id, from, to, rev, group) = arc_header(b)?;
                let Some(group) = group else {
                    return parse_err(b.line, "gog arcs need `group G`");
                };
                b.check_keys(&["hom"])?;
                arcs.push((b, id, from, to, rev, group));
            }
            other => return parse_err(b.line, format!("unknown section `{other}`")),
        }
    }
    let pos: HashMap<&str, usize> = arcs.iter().enumerate().map(|(i, a)| (a.1.as_str(), i)).collect();
    let mut arc_groups = Vec::new();
    let mut homs = Vec::new();
    for (b, id, from, to, rev, group) in &arcs {
        let (Some(o), Some(t)) = (graph.vertex_index(from), graph.vertex_index(to)) else {
            return parse_err(b.line, format!("arc `{id}` names an undeclared vertex"));
        };
        let Some(&r) = pos.get(rev.as_str()) else {
            return parse_err(b.line, format!("reverse `{rev}` is not declared"));
        };
        let Some(h) = groups.get(group) else {
            return parse_err(b.line, format!("unknown group `{group}`"));
        };
        graph.add_arc_raw(id, o, t, r).map_err(|e| Error::Parse { line: b.line, msg: e.to_string() })?;
        let g = &vgroups[t];
        let mut map = vec![usize::MAX; h.order()];
        let (hom, hl) = b.attr("hom").unwrap_or(("", b.line));
        for pair in hom.split_whitespace() {
            let Some((x, y)) = pair.split_once("->") else {
                return parse_err(hl, format!("bad hom entry `{pair}`"));
            };
            let (Ok(xi), Ok(yi)) = (h.index_of(x), g.index_of(y)) else {
                return parse_err(hl, format!("hom entry `{pair}` names unknown elements"));
            };
            map[xi] = yi;
        }
        if map.contains(&usize::MAX) {
            return parse_err(hl, format!("hom of arc `{id}` is not total"));
        }
        arc_groups.push(h.clone());
        homs.push(map);
    }
    if let Some(d) = graph.validate().first() {
        return parse_err(bs[0].line, d.to_string());
    }
    Ok(GraphOfGroups { name, graph, vertex_groups: vgroups, arc_groups, homs })
}

/// ```text
/// lad NAME
/// vertex v
/// points: 1 2 3
/// gens: (1 2 3)
/// arc a from v to v reverse a
/// orbit: 1 2 3
/// ```
pub fn parse_lad(text: &str) -> Result<LocalActionDiagram> {
    let bs = blocks(text)?;
    let name = doc_header(&bs[0], "lad")?;
    let mut graph = SerreGraph::new();
    let mut actions = Vec::new();
    let mut arcs = Vec::new();
    for b in &bs[1..] {
        match b.words[0].as_str() {
            "vertex" => {
                if b.words.len() != 2 {
                    return parse_err(b.line, "expected `vertex ID`");
                }
                b.check_keys(&["points", "gens"])?;
                graph.add_vertex(&b.words[1]).map_err(|e| Error::Parse { line: b.line, msg: e.to_string() })?;
                actions.push(action_block(b)?);
            }
            "arc" => {
                let (id, from, to, rev, group) = arc_header(b)?;
                if group.is_some() {
                    return parse_err(b.line, "`group` is only allowed in gog documents");
                }
                b.check_keys(&["orbit"])?;
                arcs.push((b, id, from, to, rev));
            }
            other => return parse_err(b.line, format!("unknown section `{other}`")),
        }
    }
    let pos: HashMap<&str, usize> = arcs.iter().enumerate().map(|(i, a)| (a.1.as_str(), i)).collect();
    let mut sets = Vec::new();
    for (b, id, from, to, rev) in &arcs {
        let (Some(o), Some(t)) = (graph.vertex_index(from), graph.vertex_index(to)) else {
            return parse_err(b.line, format!("arc `{id}` names an undeclared vertex"));
        };
        let Some(&r) = pos.get(rev.as_str()) else {
            return parse_err(b.line, format!("reverse `{rev}` is not declared"));
        };
        graph.add_arc_raw(id, o, t, r).map_err(|e| Error::Parse { line: b.line, msg: e.to_string() })?;
        let Some((orbit, l)) = b.attr("orbit") else {
            return parse_err(b.line, format!("arc `{id}` has no `orbit:`"));
        };
        let mut s = actions[t]
            .indices_of(&words(orbit))
            .map_err(|e| Error::Parse { line: l, msg: e.to_string() })?;
        s.sort_unstable();
        sets.push(s);
    }
    if let Some(d) = graph.validate().first() {
        return parse_err(bs[0].line, d.to_string());
    }
    Ok(LocalActionDiagram { name, graph, vertex_actions: actions, arc_sets: sets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn corpus_round_trips() {
        for (name, text) in corpus::FILES {
            let g = parse_any(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(g.is_valid(), "{name}: {:?}", g.validate());
            let doc = GgaDocument::from_gga(&g);
            let again = GgaDocument::parse(&doc.serialize()).unwrap();
            assert_eq!(doc, again, "{name}");
            assert_eq!(again.to_gga().unwrap(), g, "{name}");
            if name.ends_with(".gga") {
                let parsed = GgaDocument::parse(text).unwrap();
                assert_eq!(GgaDocument::parse(&parsed.serialize()).unwrap(), parsed);
            }
        }
    }

    #[test]
    fn errors_carry_lines() {
        let bad = "gga x\nvertex v\npoints: 1 2\narc a from v to v reverse a\npoints: 1 2\nembed: 1->1 2->1\n";
        match GgaDocument::parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let dangling = "gga x\nvertex v\npoints: 1\narc a from v to w reverse a\npoints: 1\nembed: 1->1\n";
        assert!(matches!(GgaDocument::parse(dangling), Err(Error::Parse { line: 4, .. })));
        let perm = "gga x\nvertex v\npoints: 1 2\ngens: (1 3)\n";
        assert!(matches!(GgaDocument::parse(perm), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(GgaDocument::parse("gga x\nfoo bar\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn missing_inversion_defaults_to_identity() {
        let g = corpus::load("ex-c3-id").unwrap();
        let a = g.arc_index("a").unwrap();
        assert!(g.inversion(a).is_identity());
    }
}
