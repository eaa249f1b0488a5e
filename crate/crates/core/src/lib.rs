//! Exact analysis of fully connected ReLU networks through a
//! rescaling-invariant path embedding.
//!
//! The crate computes the embedding itself, decides scaling and
//! permutation-scaling equivalence with checkable certificates, runs
//! structural diagnostics (admissibility, twin detection, irreducibility),
//! measures activation spaces and produces degeneracy certificates, builds
//! finite identification sets, generates the standard counterexample
//! families, and reconstructs shallow networks from black-box function
//! access. All core decisions run over arbitrary-precision rationals; an
//! `f64` mode exists for measured data.

pub mod actspace;
pub mod counterexamples;
pub mod diagnostics;
pub mod embedding;
pub mod equivalence;
pub mod error;
pub mod identset;
pub mod io;
pub mod linalg;
pub mod network;
pub mod paths;
pub mod recovery;
pub mod sampling;
pub mod scalar;

pub use actspace::{
    sample_activation_space, shallow_activation_space, v_space_structure, ActivationSpace,
    DegeneracyCertificate, DegeneracyVerdict, VSpaceStructure,
};
pub use counterexamples::{standard_pairs, ClaimedRelation, EqualityDomain, ExamplePair};
pub use diagnostics::{
    classify_shallow, find_twins, is_irreducible, Irreducibility, IrreducibilityReport,
    ShallowClassification, TwinClass, TwinReport, DEFAULT_SUBSET_CAP,
};
pub use embedding::{embed, embed_with_budget, Embedding};
pub use equivalence::{
    canonical_form, check_ps_equivalent, check_scaling_equivalent, permute, rescale, Permutation,
    PsDecision, Rescaling, ScalingDecision, DEFAULT_PS_BUDGET,
};
pub use error::{CoreError, Result};
pub use identset::{
    construct_identification_set, validate_identification_set, IdentificationReport,
};
pub use io::{network_from_json, network_to_json, Network};
pub use linalg::Mat;
pub use network::{Architecture, ConstraintSet, ForwardTrace, Params};
pub use paths::{ChainIndex, PathIndex};
pub use recovery::{
    count_units, detect_hyperplanes, params_oracle, recover_outer, recover_shallow,
    snap_canonical, snap_params, snap_rational, CountingOracle, Detection, Hyperplane, Oracle,
    RecoveredModel, UnitEstimate,
};
pub use scalar::{rat, Rat, Scalar};
