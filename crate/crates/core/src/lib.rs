//! Graphs of group actions and their universal groups, computed on finite truncations.

pub mod error;
pub mod perm;
pub mod sgraph;
pub mod gga;
pub mod text;
pub mod corpus;
pub mod covering;
pub mod scaffold;
pub mod universal;
pub mod analysis;

pub use error::{Error, Result};
pub use perm::{ActionEmbedding, ActionIsomorphism, PermAction, Permutation, PointSet};
pub use gga::{AugmentedDigraph, Gga, GgaBuilder, GgaIsomorphism};
pub use sgraph::{Digraph, GraphEquivalence, GraphMorphism, SerreGraph};
pub use covering::CoveringTree;
pub use scaffold::Scaffolding;
pub use universal::UniversalElement;
pub use analysis::Verdict;
