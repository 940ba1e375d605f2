//! Two-stage metasurface design: a semidefinite relaxation over the moment
//! covariance, extraction of a moment vector, and retraction onto feasible
//! Lorentzian resonance strengths.

mod extract;
pub mod nnls;
mod p1;
mod pipeline;
mod retract;
pub mod sdp;
mod subspace;

pub use extract::{best_sample, extract_moments, ExtractionMode, DEFAULT_SAMPLE_DRAWS};
pub use p1::{solve_p1, LambdaStructure, P1Options, P1Residuals, SdpSolution};
pub use pipeline::{
    design, evaluate_design, random_strength_peb, strength_peb, DesignContext, DesignEvaluation, DesignOptions,
    DesignResult, ModelChoice, TraceBudget,
};
pub use retract::{
    retract_p2, Retraction, RetractionModel, RetractionOptions, RetractionProblem, STRENGTH_FLOOR,
};
pub use sdp::{solve_sdp, BlockSdp, SdpOptions, SdpOutput, SdpStatus};
pub use subspace::{build_subspace, derivative_deviation, SubspaceBasis};
