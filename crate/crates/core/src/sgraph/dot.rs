use super::SerreGraph;
use std::fmt::Write;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Optional extra labels for DOT output, indexed like the graph.
#[derive(Default)]
pub struct DotStyle {
    pub vertex_labels: Option<Vec<String>>,
    pub arc_labels: Option<Vec<String>>,
}

impl DotStyle {
    /// Each arc pair becomes one undirected edge; a self-reverse arc becomes a loop.
    pub fn render(&self, g: &SerreGraph, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph {} {{", quote(name));
        for v in 0..g.vertex_count() {
            let mut label = g.vertex_id(v).to_string();
            if let Some(l) = self.vertex_labels.as_ref().map(|ls| &ls[v]) {
                let _ = write!(label, "\\n{l}");
            }
            let _ = writeln!(s, "  {} [label={}];", quote(g.vertex_id(v)), quote(&label));
        }
        for a in 0..g.arc_count() {
            let r = g.reverse(a);
            if r < a {
                continue;
            }
            let mut label = if r == a {
                g.arc_id(a).to_string()
            } else {
                format!("{}/{}", g.arc_id(a), g.arc_id(r))
            };
            if let Some(ls) = &self.arc_labels {
                let _ = write!(label, "\\n{}", ls[a]);
            }
            let _ = writeln!(
                s,
                "  {} -- {} [label={}];",
                quote(g.vertex_id(g.origin(a))),
                quote(g.vertex_id(g.terminus(a))),
                quote(&label)
            );
        }
        s.push_str("}\n");
        s
    }
}
