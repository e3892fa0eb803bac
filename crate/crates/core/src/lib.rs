//! Dynamic self-triggered control of perturbed nonlinear networked control
//! systems based on hybrid Lyapunov functions.
//!
//! - [`mati`]: closed-form MATI, Riccati solution and hybrid Lyapunov function
//! - [`certificates`]: polytopic embeddings, `γ` bisection and certificate banks
//! - [`triggering`]: dynamic variables and inter-event time selection
//! - [`sim`]: hybrid closed-loop simulation and flow-bound checks
//! - [`presets`]: the robot-arm and cubic reference systems
//!
//! The math and triggering layers are generic over [`Real`] (`f32`/`f64`);
//! simulation and persistence use `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod linalg;
pub mod mati;
pub mod presets;
pub mod scalar;
pub mod sim;
pub mod triggering;

pub use certificates::{
    compute_l_gain, embed_example1, embed_example2, fallback_period, feasibility_check, min_gamma,
    synthesize_bank, verify_pointwise, CertificateError,
};
pub use mati::{coupling_ratio, hybrid_u, mati, mati_tilde, phi_eval, MathError};
pub use scalar::Real;
pub use sim::{check_prop1_bound, jump, simulate, simulate_periodic};
pub use triggering::{c_value, gamma_iss, gamma_ras, s_update};

pub type MatiParams = mati::MatiParams<f64>;
pub type MatiParams32 = mati::MatiParams<f32>;
pub type FlowRateParams = mati::FlowRateParams<f64>;
pub type FlowRateParams32 = mati::FlowRateParams<f32>;
pub type CertificateBank = certificates::CertificateBank<f64>;
pub type CertificateBank32 = certificates::CertificateBank<f32>;
pub type ParameterSet = certificates::ParameterSet<f64>;
pub type PolytopicEmbedding = certificates::PolytopicEmbedding<f64>;
pub type TriggerConfig = triggering::TriggerConfig<f64>;
pub type TriggerConfig32 = triggering::TriggerConfig<f32>;
pub type MechanismState = triggering::MechanismState<f64>;
pub type MechanismState32 = triggering::MechanismState<f32>;
pub type MechanismKind = triggering::MechanismKind<f64>;

pub use sim::{DisturbanceSignal, HybridState, HybridTrajectory, NonlinearSystem};
