//! Hybrid closed-loop simulation: zero-order-hold flows, sampling jumps,
//! trajectory logging and the flow-bound verifier.

pub mod bounds;
pub mod disturbance;
pub mod hybrid;
pub mod system;
pub mod trajectory;

pub use bounds::{check_prop1_bound, BoundQuantity, BoundReport, BoundViolation};
pub use disturbance::{BoundExceeded, DisturbanceSignal, Pulse, Window};
pub use hybrid::{
    default_dt, flow, jump, simulate, simulate_periodic, FlowPoints, HybridState, Period, SimError,
    SimOptions,
};
pub use system::{CubicPlant, LinearSystem, NonlinearSystem, RobotArm};
pub use trajectory::{
    ActiveSet, BoundForm, DomainError, EventRecord, HybridTrajectory, Sample, TrajectorySummary,
};
