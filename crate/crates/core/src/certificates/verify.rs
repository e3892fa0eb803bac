//! Monte-Carlo confirmation of the certified inequalities on the true
//! nonlinear vector field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bank::CertificateBank;
use super::embedding::PolytopicEmbedding;
use super::CertificateError;
use crate::sim::system::NonlinearSystem;

/// Region from which `(x, x̂, w)` are drawn: `x` and `x̂` uniformly in the
/// ball of radius `x_radius`, each component of `w` in `[−w_bound, w_bound]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingRegion {
    pub x_radius: f64,
    pub w_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub level: usize,
    pub set: Option<usize>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub samples: usize,
    /// Worst `L|e| + H − ⟨∂W/∂e, g⟩`.
    pub worst_error_growth_margin: f64,
    /// Worst right-hand minus left-hand side of the `V` dissipation bound.
    pub worst_dissipation_margin: f64,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn worst_margin(&self) -> f64 {
        self.worst_error_growth_margin
            .min(self.worst_dissipation_margin)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.worst_margin() >= -tol
    }
}

fn ball_sample(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return v.into_iter().map(|c| c * radius).collect();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Draws `n_samples` points, spread over the levels round-robin, and checks
/// both certified inequalities for every parameter set of the level.
pub fn verify_pointwise<S, F, R>(
    bank: &CertificateBank<f64>,
    embedding_for: F,
    system: &S,
    region_for: R,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport, CertificateError>
where
    S: NonlinearSystem + ?Sized,
    F: Fn(Option<f64>) -> Result<PolytopicEmbedding<f64>, CertificateError>,
    R: Fn(Option<f64>) -> SamplingRegion,
{
    let n_x = system.n_x();
    if bank.n_x() != n_x {
        return Err(CertificateError::DimensionMismatch(format!(
            "bank has n_x = {}, system has n_x = {n_x}",
            bank.n_x()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = bank.p_matrix();
    let theta2 = bank.theta() * bank.theta();
    let mut report = VerificationReport {
        samples: n_samples,
        worst_error_growth_margin: f64::INFINITY,
        worst_dissipation_margin: f64::INFINITY,
        violations: Vec::new(),
    };

    let levels = bank.levels();
    let prepared: Vec<_> = levels
        .iter()
        .map(|l| {
            let c = l.c.is_finite().then_some(l.c);
            embedding_for(c).map(|emb| (emb, region_for(c)))
        })
        .collect::<Result<_, _>>()?;

    for k in 0..n_samples {
        let li = k % levels.len();
        let level = &levels[li];
        let (emb, region) = &prepared[li];
        let x = ball_sample(&mut rng, n_x, region.x_radius);
        let x_hat = ball_sample(&mut rng, n_x, region.x_radius);
        let e: Vec<f64> = x_hat.iter().zip(&x).map(|(h, xi)| h - xi).collect();
        let w: Vec<f64> = (0..system.n_w())
            .map(|_| rng.gen_range(-region.w_bound..=region.w_bound))
            .collect();
        let f = system.eval(&x, &e, &w);

        // H(x, e, w) = |Ax + Ew|
        let a = emb.drift();
        let ew = emb.disturbance_input();
        let h_vec: Vec<f64> = (0..n_x)
            .map(|i| {
                (0..n_x).map(|j| a[(i, j)] * x[j]).sum::<f64>()
                    + (0..w.len()).map(|j| ew[(i, j)] * w[j]).sum::<f64>()
            })
            .collect();
        let h = norm(&h_vec);
        let e_norm = norm(&e);
        let w_norm = norm(&w);

        let l_gain = level.sets[0].l_gain;
        if e_norm > 0.0 {
            let inner: f64 = -e.iter().zip(&f).map(|(ei, fi)| ei * fi).sum::<f64>() / e_norm;
            let margin = l_gain * e_norm + h - inner;
            report.worst_error_growth_margin = report.worst_error_growth_margin.min(margin);
            if margin < 0.0 {
                report.violations.push(Violation {
                    level: li,
                    set: None,
                    margin,
                });
            }
        }

        let mut px = vec![0.0; n_x];
        for i in 0..n_x {
            for j in 0..n_x {
                px[i] += p[(i, j)] * x[j];
            }
        }
        let v = px.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let v_dot = 2.0 * px.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        for (si, set) in level.sets.iter().enumerate() {
            let rhs = -set.epsilon * v - h * h
                + set.gamma * set.gamma * e_norm * e_norm
                + theta2 * w_norm * w_norm;
            let margin = rhs - v_dot;
            report.worst_dissipation_margin = report.worst_dissipation_margin.min(margin);
            if margin < 0.0 {
                report.violations.push(Violation {
                    level: li,
                    set: Some(si),
                    margin,
                });
            }
        }
    }
    Ok(report)
}
