//! Graphs of group actions.

mod augment;
mod convert;
mod iso;
mod transform;


pub use augment::AugmentedDigraph;
pub use convert::{FiniteGroup, GraphOfGroups, LocalActionDiagram};
pub use iso::{gga_isomorphic, GgaIsomorphism};
pub use transform::SubdivisionMap;

use crate::error::{Error, Result};
use crate::perm::{ActionEmbedding, EmbeddingFailure, PermAction, Permutation};
use crate::sgraph::{GraphDiagnostic, SerreGraph};
use std::fmt;
use std::sync::OnceLock;

/// A base graph with a permutation action at every vertex and arc, embeddings
/// `Φ_a: Y(a) → X(t(a))`, and inversion agents at self-reverse arcs.
///
/// `a` and its reverse share one arc action. Structural consistency (sizes,
/// ranges) is enforced on construction; the group-theoretic conditions are
/// reported by [`Gga::validate`].
#[derive(Clone)]
pub struct Gga {
    name: String,
    base: SerreGraph,
    vertex_actions: Vec<PermAction>,
    arc_actions: Vec<PermAction>,
    embeddings: Vec<Vec<usize>>,
    inversions: Vec<Option<Permutation>>,
    augmented: OnceLock<AugmentedDigraph>,
}

impl fmt::Debug for Gga {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gga")
            .field("name", &self.name)
            .field("vertices", &self.base.vertex_ids())
            .field("arcs", &self.base.arcs().iter().map(|r| &r.id).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for Gga {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.vertex_actions == other.vertex_actions
            && self.arc_actions == other.arc_actions
            && self.embeddings == other.embeddings
            && (0..self.base.arc_count()).all(|a| self.inversion(a) == other.inversion(a))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GgaDiagnostic {
    EmptyBase,
    Disconnected,
    Graph(GraphDiagnostic),
    ArcActionNotShared { arc: String },
    Embedding { arc: String, failure: EmbeddingFailure },
    InversionNotNormalizing { arc: String },
    InversionSquareNotInGroup { arc: String },
    InversionOnOrdinaryArc { arc: String },
}

impl fmt::Display for GgaDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GgaDiagnostic::EmptyBase => write!(f, "empty-base: the base graph has no vertices"),
            GgaDiagnostic::Disconnected => write!(f, "disconnected-base: the base graph is not connected"),
            GgaDiagnostic::Graph(d) => write!(f, "{d}"),
            GgaDiagnostic::ArcActionNotShared { arc } => {
                write!(f, "arc-action-not-shared: arc `{arc}` and its reverse carry different actions")
            }
            GgaDiagnostic::Embedding { arc, failure } => {
                let what = match failure {
                    EmbeddingFailure::BadPointMap => "point map is not an injection".to_string(),
                    EmbeddingFailure::NotLifted(_) => "an arc group element has no lift".to_string(),
                    EmbeddingFailure::NotRestricted(_) => {
                        "a stabilizing vertex group element restricts outside the arc group".to_string()
                    }
                };
                write!(f, "not-an-embedding: arc `{arc}`: {what}")
            }
            GgaDiagnostic::InversionNotNormalizing { arc } => {
                write!(f, "inversion-not-normalizing: arc `{arc}`")
            }
            GgaDiagnostic::InversionSquareNotInGroup { arc } => {
                write!(f, "inversion-square-not-in-group: arc `{arc}`")
            }
            GgaDiagnostic::InversionOnOrdinaryArc { arc } => {
                write!(f, "inversion-on-ordinary-arc: arc `{arc}` is not self-reverse")
            }
        }
    }
}

impl Gga {
    /// Assembles a gga from per-vertex and per-arc data, indexed like `base`.
    pub fn new(
        name: impl Into<String>,
        base: SerreGraph,
        vertex_actions: Vec<PermAction>,
        arc_actions: Vec<PermAction>,
        embeddings: Vec<Vec<usize>>,
        inversions: Vec<Option<Permutation>>,
    ) -> Result<Gga> {
        let bad = |m: String| Err(Error::InvalidGga(m));
        if vertex_actions.len() != base.vertex_count()
            || arc_actions.len() != base.arc_count()
            || embeddings.len() != base.arc_count()
            || inversions.len() != base.arc_count()
        {
            return bad("per-vertex or per-arc data does not match the base graph".into());
        }
        if !base.is_valid() {
            let d: Vec<String> = base.validate().iter().map(|d| d.to_string()).collect();
            return bad(d.join("; "));
        }
        for a in 0..base.arc_count() {
            let id = base.arc_id(a);
            let y = arc_actions[a].degree();
            let x = vertex_actions[base.terminus(a)].degree();
            if embeddings[a].len() != y || embeddings[a].iter().any(|&p| p >= x) {
                return bad(format!("embedding of arc `{id}` has the wrong shape"));
            }
            if let Some(h) = &inversions[a] {
                if h.degree() != y {
                    return bad(format!("inversion agent of arc `{id}` has the wrong degree"));
                }
            }
        }
        Ok(Gga {
            name: name.into(),
            base,
            vertex_actions,
            arc_actions,
            embeddings,
            inversions,
            augmented: OnceLock::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &SerreGraph {
        &self.base
    }

    pub fn vertex_action(&self, v: usize) -> &PermAction {
        &self.vertex_actions[v]
    }

    pub fn arc_action(&self, a: usize) -> &PermAction {
        &self.arc_actions[a]
    }

    /// `Φ_a` as indices into `X(t(a))`.
    pub fn embedding(&self, a: usize) -> &[usize] {
        &self.embeddings[a]
    }

    pub fn embedding_of(&self, a: usize) -> ActionEmbedding<'_> {
        ActionEmbedding::new(
            &self.arc_actions[a],
            &self.vertex_actions[self.base.terminus(a)],
            &self.embeddings[a],
        )
    }

    /// The inversion agent `h_a`; the identity where none was given.
    pub fn inversion(&self, a: usize) -> Permutation {
        self.inversions[a].clone().unwrap_or_else(|| self.arc_actions[a].identity())
    }

    pub(crate) fn raw_inversion(&self, a: usize) -> Option<&Permutation> {
        self.inversions[a].as_ref()
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.base.vertex_index(id).ok_or_else(|| Error::InvalidGga(format!("no vertex `{id}`")))
    }

    pub fn arc_index(&self, id: &str) -> Result<usize> {
        self.base.arc_index(id).ok_or_else(|| Error::InvalidGga(format!("no arc `{id}`")))
    }

    pub fn has_self_reverse(&self) -> bool {
        (0..self.base.arc_count()).any(|a| self.base.is_self_reverse(a))
    }

    pub fn validate(&self) -> Vec<GgaDiagnostic> {
        let g = &self.base;
        let mut out = Vec::new();
        if g.vertex_count() == 0 {
            out.push(GgaDiagnostic::EmptyBase);
            return out;
        }
        out.extend(g.validate().into_iter().map(GgaDiagnostic::Graph));
        if !g.connected() {
            out.push(GgaDiagnostic::Disconnected);
        }
        for a in 0..g.arc_count() {
            let id = g.arc_id(a).to_string();
            let r = g.reverse(a);
            if r > a && !self.arc_actions[a].ptr_eq(&self.arc_actions[r]) {
                let (x, y) = (&self.arc_actions[a], &self.arc_actions[r]);
                if !(x.same_action(y) && y.same_action(x)) {
                    out.push(GgaDiagnostic::ArcActionNotShared { arc: id.clone() });
                }
            }
            if let Err(failure) = self.embedding_of(a).check() {
                out.push(GgaDiagnostic::Embedding { arc: id.clone(), failure });
            }
            if let Some(h) = &self.inversions[a] {
                if r != a {
                    if !h.is_identity() {
                        out.push(GgaDiagnostic::InversionOnOrdinaryArc { arc: id });
                    }
                    continue;
                }
                let hg = &self.arc_actions[a];
                let hinv = h.inverse();
                if hg.generators().iter().any(|k| !hg.contains(&h.mul(k).mul(&hinv))) {
                    out.push(GgaDiagnostic::InversionNotNormalizing { arc: id.clone() });
                }
                if !hg.contains(&h.mul(h)) {
                    out.push(GgaDiagnostic::InversionSquareNotInGroup { arc: id });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Like [`Gga::validate`] but as a `Result`.
    pub fn require_valid(&self) -> Result<()> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = d.iter().map(|d| d.to_string()).collect();
            Err(Error::InvalidGga(msgs.join("; ")))
        }
    }

    /// Number of distinct `a`-adhesion sets.
    pub fn index(&self, a: usize) -> usize {
        self.augmented().fiber(a).len()
    }

    /// The augmented base digraph, built once.
    pub fn augmented(&self) -> &AugmentedDigraph {
        self.augmented.get_or_init(|| AugmentedDigraph::build(self))
    }

    /// Every arc action is trivial on a single point.
    pub fn is_free(&self) -> bool {
        self.arc_actions.iter().all(|h| h.degree() == 1)
    }
}

/// Incremental construction of a [`Gga`] by ids.
pub struct GgaBuilder {
    name: String,
    base: SerreGraph,
    vertex_actions: Vec<PermAction>,
    arc_actions: Vec<PermAction>,
    embeddings: Vec<Vec<usize>>,
    inversions: Vec<Option<Permutation>>,
}

impl GgaBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        GgaBuilder {
            name: name.into(),
            base: SerreGraph::new(),
            vertex_actions: Vec::new(),
            arc_actions: Vec::new(),
            embeddings: Vec::new(),
            inversions: Vec::new(),
        }
    }

    pub fn vertex(&mut self, id: impl Into<String>, action: PermAction) -> Result<usize> {
        let v = self.base.add_vertex(id)?;
        self.vertex_actions.push(action);
        Ok(v)
    }

    fn vid(&self, id: &str) -> Result<usize> {
        self.base.vertex_index(id).ok_or_else(|| Error::InvalidGga(format!("no vertex `{id}`")))
    }

    /// Arc `id: from → to` with reverse `rid`; `embed` lands in `X(to)`,
    /// `embed_rev` in `X(from)`.
    #[allow(clippy::too_many_arguments)]
    pub fn edge(
        &mut self,
        id: impl Into<String>,
        rid: impl Into<String>,
        from: &str,
        to: &str,
        action: PermAction,
        embed: Vec<usize>,
        embed_rev: Vec<usize>,
    ) -> Result<(usize, usize)> {
        let (o, t) = (self.vid(from)?, self.vid(to)?);
        let pair = self.base.add_edge(id, rid, o, t)?;
        self.arc_actions.push(action.clone());
        self.arc_actions.push(action);
        self.embeddings.push(embed);
        self.embeddings.push(embed_rev);
        self.inversions.push(None);
        self.inversions.push(None);
        Ok(pair)
    }

    pub fn self_reverse(
        &mut self,
        id: impl Into<String>,
        at: &str,
        action: PermAction,
        embed: Vec<usize>,
        inversion: Option<Permutation>,
    ) -> Result<usize> {
        let v = self.vid(at)?;
        let a = self.base.add_self_reverse(id, v)?;
        self.arc_actions.push(action);
        self.embeddings.push(embed);
        self.inversions.push(inversion);
        Ok(a)
    }

    pub fn build(self) -> Result<Gga> {
        Gga::new(
            self.name,
            self.base,
            self.vertex_actions,
            self.arc_actions,
            self.embeddings,
            self.inversions,
        )
    }
}
