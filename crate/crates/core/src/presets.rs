//! Parameters of the two reference systems and helpers that build their
//! certificate banks.

use nalgebra::DMatrix;

use crate::certificates::{
    design_lyapunov_matrix, embed_example1, embed_example2, synthesize_bank, Bisection,
    CertificateBank, CertificateError, PolytopicEmbedding, SamplingRegion, SynthesisSpec,
};
use crate::sim::{DisturbanceSignal, RobotArm};
use crate::triggering::{MechanismKind, TriggerConfig};

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    end
                } else {
                    start + (end - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` geometrically spaced points from `start` to `end` inclusive.
pub fn geomspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), end.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, v)| match i {
            0 => start,
            _ if i + 1 == n => end,
            _ => v.exp(),
        })
        .collect()
}

/// Single-link robot arm under linearizing feedback.
pub mod example1 {
    use super::*;

    pub const A: f64 = 9.81 / 2.0;
    pub const B: f64 = 2.0;
    pub const THETA: f64 = 10.0;
    pub const EPS_REF: f64 = 0.2;
    pub const FIR_M: usize = 21;
    pub const IIR_R1: f64 = 0.9;
    pub const IIR_R2: f64 = 0.1;
    pub const X0: [f64; 2] = [0.5, 0.5];
    pub const BASELINE_PERIOD: f64 = 0.175;
    /// Rate at which `P` is designed (largest grid value).
    pub const DESIGN_EPSILON: f64 = 0.01;

    pub fn horizon() -> f64 {
        6.0 * std::f64::consts::PI
    }

    pub fn epsilon_grid() -> Vec<f64> {
        linspace(-20.0, 0.01, 21)
    }

    pub fn system() -> RobotArm {
        RobotArm { a: A, b: B }
    }

    pub fn embedding(_c: Option<f64>) -> Result<PolytopicEmbedding<f64>, CertificateError> {
        embed_example1(A, B)
    }

    pub fn disturbance() -> DisturbanceSignal {
        DisturbanceSignal::example1()
    }

    pub fn trigger() -> TriggerConfig<f64> {
        TriggerConfig::iss(EPS_REF)
    }

    pub fn mechanisms() -> [(&'static str, MechanismKind<f64>); 3] {
        [
            ("fir", MechanismKind::Fir { m: FIR_M }),
            (
                "iir",
                MechanismKind::Iir {
                    r1: IIR_R1,
                    r2: IIR_R2,
                },
            ),
            ("ref", MechanismKind::Ref),
        ]
    }

    /// `P` minimizing `γ` at [`DESIGN_EPSILON`].
    pub fn p_matrix() -> Result<DMatrix<f64>, CertificateError> {
        let emb = embedding(None)?;
        Ok(design_lyapunov_matrix(&emb, DESIGN_EPSILON, THETA, &Bisection::default())?.p_matrix)
    }

    pub fn synthesis_spec() -> SynthesisSpec<f64> {
        SynthesisSpec {
            epsilon_grid: epsilon_grid(),
            theta: THETA,
            c_levels: vec![],
            bisection: Bisection::default(),
        }
    }

    pub fn bank() -> Result<CertificateBank<f64>, CertificateError> {
        synthesize_bank(embedding, &p_matrix()?, &synthesis_spec())
    }

    /// The embedding is global; samples are drawn from a ball that covers the
    /// simulated trajectories.
    pub fn sampling_region(_c: Option<f64>) -> SamplingRegion {
        SamplingRegion {
            x_radius: 3.0,
            w_bound: 1.0,
        }
    }
}

/// Cubic planar system with level-dependent embeddings.
pub mod example2 {
    use super::*;
    use crate::certificates::embedding::example2_ranges;
    use crate::sim::CubicPlant;

    pub const THETA: f64 = 2.0;
    pub const P_DIAG: f64 = 1.5;
    pub const EPS_REF: f64 = 1.0;
    pub const W_BAR: f64 = 0.4;
    pub const C_W: f64 = 0.64;
    pub const C_MAX: f64 = 37.87;
    pub const N_LEVELS: usize = 40;
    pub const FIR_M: usize = 21;
    pub const IIR_R1: f64 = 0.9;
    pub const IIR_R2: f64 = 0.1;
    pub const X0: [f64; 2] = [4.0, -3.0];
    pub const HORIZON: f64 = 15.0;

    pub fn epsilon_grid() -> Vec<f64> {
        linspace(-15.0, 1.0, 20)
    }

    pub fn levels() -> Vec<f64> {
        geomspace(C_W, C_MAX, N_LEVELS)
    }

    pub fn system() -> CubicPlant {
        CubicPlant
    }

    pub fn embedding(c: Option<f64>) -> Result<PolytopicEmbedding<f64>, CertificateError> {
        embed_example2(c.ok_or(CertificateError::InvalidParameter(
            "example 2 embeddings need a level",
        ))?)
    }

    pub fn disturbance() -> DisturbanceSignal {
        DisturbanceSignal::example2()
    }

    pub fn trigger() -> TriggerConfig<f64> {
        TriggerConfig::ras(EPS_REF, W_BAR, C_W, C_MAX)
    }

    pub fn mechanisms() -> [(&'static str, MechanismKind<f64>); 3] {
        [
            ("fir", MechanismKind::Fir { m: FIR_M }),
            (
                "iir",
                MechanismKind::Iir {
                    r1: IIR_R1,
                    r2: IIR_R2,
                },
            ),
            ("ref", MechanismKind::Ref),
        ]
    }

    pub fn p_matrix() -> DMatrix<f64> {
        DMatrix::identity(2, 2) * P_DIAG
    }

    pub fn synthesis_spec() -> SynthesisSpec<f64> {
        SynthesisSpec {
            epsilon_grid: epsilon_grid(),
            theta: THETA,
            c_levels: levels(),
            bisection: Bisection::default(),
        }
    }

    pub fn bank() -> Result<CertificateBank<f64>, CertificateError> {
        synthesize_bank(embedding, &p_matrix(), &synthesis_spec())
    }

    /// Ball on which the level-`c` parameter box covers both `x` and `x̂`.
    pub fn sampling_region(c: Option<f64>) -> SamplingRegion {
        let c = c.unwrap_or(C_MAX);
        let (r1, _) = example2_ranges(c);
        SamplingRegion {
            x_radius: (r1 / 4.0).sqrt(),
            w_bound: W_BAR,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = linspace(-20.0, 0.01, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -20.0);
        assert_eq!(g[20], 0.01);
        let l = geomspace(0.64, 37.87, 40);
        assert_eq!(l[39], 37.87);
        assert!(l.windows(2).all(|p| p[1] > p[0]));
    }
}
