//! Polytopic embeddings, vertex feasibility of the dissipation inequality,
//! bisection on `γ`, and multi-level certificate banks.

pub mod bank;
pub mod design;
pub mod embedding;
pub mod feasibility;
pub mod verify;

use thiserror::Error;

pub use bank::{
    fallback_period, minimum_dwell, synthesize_bank, BankDocument, CertificateBank,
    LevelCertificate, ParameterSet, SynthesisSpec,
};
pub use design::{design_lyapunov_matrix, LyapunovDesign};
pub use embedding::{compute_l_gain, embed_example1, embed_example2, PolytopicEmbedding, Vertex};
pub use feasibility::{feasibility_check, min_gamma, Bisection};
pub use verify::{verify_pointwise, SamplingRegion, VerificationReport};

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("embedding has no vertices")]
    EmptyEmbedding,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("P must be symmetric positive definite")]
    NotPositiveDefinite,
    #[error("no feasible positive ε (fall-back set) for level c = {0}")]
    NoFallback(f64),
    #[error("bank document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
