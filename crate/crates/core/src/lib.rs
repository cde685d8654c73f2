//! Computable dynamics of closed relations and multiflows on cubical grids.
//!
//! A compact box is discretized into closed cells; subsets of cells stand
//! in for closed subsets of the space, and finite relations (pairs of
//! cells) stand in for closed relations and for the fixed-time relations
//! of a multiflow. On top of that the crate computes omega limit sets,
//! classifies confinement and invariance, certifies attractor blocks and
//! attracting neighborhoods, and measures the robustness radius under
//! which a block survives perturbation of the relation.
//!
//! Everything here is conservative in the certification direction: sampled
//! relations are outer approximations of the true dynamics, interiors are
//! combinatorial under-approximations, and distances are exact box gaps,
//! so a granted certificate transfers to the underlying system.

pub mod attractor;
pub mod cellset;
pub mod continuation;
pub mod error;
pub mod geom;
pub mod grid;
pub mod models;
pub mod multiflow;
pub mod omega;
pub mod region;
pub mod relation;

pub use attractor::{
    certify_block_multiflow, find_block_in_neighborhood, is_attractor_block, maximality_check,
    BlockCertificate, BlockCheck, CertifyOptions, FindBlockError,
};
pub use cellset::{distance_field, set_distance, CellSet};
pub use continuation::{
    continuation_check, epsilon_sweep, fatten, one_sided_hausdorff, robustness_radius,
    ContinuationReport, ContinuationVerdict, RobustnessReport,
};
pub use error::{Error, Result};
pub use geom::{box_distance, product_distance, AxisBox, Metric};
pub use grid::GridSpace;
pub use models::{builtin_models, ModelKind, MultiflowModel, PwaBranch, PwaTable};
pub use multiflow::{
    check_semigroup, classify_multiflow, image_of_set, omega_fixed_time, omega_multiflow,
    sample_relation, FixedTimeOmega, MultiflowClassification, MultiflowOmegaReport,
    SemigroupReport, TimeGrid, TimeVerdict,
};
pub use omega::{kset_membership, maximal_invariant, omega, strict_omega, OmegaReport};
pub use region::{CoverMode, Region};
pub use relation::{FiniteRelation, InvarianceReport};
