//! Discrete structural causal models and partial-identification bounds on an
//! agent's preference, fairness and harm gaps under distribution shift.
//!
//! The closed-form bounds in [`bounds`] are checked against exact linear
//! programs over canonical response-type models in [`oracle`].

pub mod bounds;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod lp;
pub mod oracle;
pub mod predict;
pub mod relax;
pub mod scm;
pub mod table;
pub mod value;

pub use bounds::{BoundSource, GapInterval, GapKind};
pub use dataset::{BehaviouralDataset, Domain, Policy};
pub use error::{Error, Result};
pub use predict::Verdict;
pub use scm::{ExoDistribution, Intervention, Mechanism, Scm, Shift};
pub use table::DistTable;
pub use value::{Assignment, Value, Variable};
