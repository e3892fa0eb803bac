//! Choice of the quadratic Lyapunov matrix `P` for a given embedding.
//!
//! `P` is not a decision variable of the feasibility check, so it is chosen
//! beforehand by minimizing the bisected `γ` of the fall-back rate over the
//! Cholesky factor of `P` with a Nelder–Mead search. The search starts from
//! the best multiple of the Lyapunov-equation solution `AᵀP₀ + P₀A = −I`.

use nalgebra::DMatrix;

use super::embedding::PolytopicEmbedding;
use super::feasibility::{min_gamma, Bisection};
use super::CertificateError;
use crate::linalg::solve_lyapunov;

/// Objective value for an infeasible `P`.
const INFEASIBLE: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovDesign {
    pub p_matrix: DMatrix<f64>,
    pub gamma: f64,
}

/// Packs a lower-triangular factor with log-diagonal into a parameter vector.
fn pack(p: &DMatrix<f64>) -> Option<Vec<f64>> {
    let chol = p.clone().cholesky()?;
    let l = chol.l();
    let n = l.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            out.push(if i == j { l[(i, i)].ln() } else { l[(i, j)] });
        }
    }
    Some(out)
}

fn unpack(params: &[f64], n: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            l[(i, j)] = if i == j { params[k].exp() } else { params[k] };
            k += 1;
        }
    }
    let p = &l * l.transpose();
    (&p + p.transpose()) * 0.5
}

/// Minimal Nelder–Mead with the standard coefficients (1, 2, ½, ½).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: f64,
    max_evals: usize,
    f_tol: f64,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut evals = n + 1;
    let cmp = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| {
        a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)
    };
    while evals < max_evals {
        simplex.sort_by(cmp);
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= f_tol * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(p, _)| p[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + t * (simplex[n].0[d] - centroid[d]))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst { along(-0.5) } else { along(0.5) };
            let fc = f(&contracted);
            evals += 1;
            if fc < worst.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&anchor)
                        .map(|(x, a)| a + 0.5 * (x - a))
                        .collect();
                    let v = f(&p);
                    *entry = (p, v);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(cmp);
    simplex.swap_remove(0)
}

/// Designs `P` minimizing `γ` at the fall-back rate `epsilon`.
pub fn design_lyapunov_matrix(
    embedding: &PolytopicEmbedding<f64>,
    epsilon: f64,
    theta: f64,
    bisection: &Bisection<f64>,
) -> Result<LyapunovDesign, CertificateError> {
    let n = embedding.n_x();
    let p0 = solve_lyapunov(embedding.drift(), &DMatrix::identity(n, n))
        .filter(crate::linalg::is_positive_definite)
        .ok_or(CertificateError::NotPositiveDefinite)?;
    let gamma_of = |p: &DMatrix<f64>| -> Result<Option<f64>, CertificateError> {
        min_gamma(embedding, p, epsilon, theta, bisection)
    };

    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for k in 0..=40 {
        let scale = 2f64.powf(k as f64 / 2.0 - 4.0);
        let p = &p0 * scale;
        if let Some(g) = gamma_of(&p)? {
            if best.as_ref().is_none_or(|(bg, _)| g < *bg) {
                best = Some((g, p));
            }
        }
    }
    let (_, start) = best.ok_or(CertificateError::NoFallback(f64::INFINITY))?;

    let objective = |params: &[f64]| -> f64 {
        let p = unpack(params, n);
        match gamma_of(&p) {
            Ok(Some(g)) => g,
            _ => INFEASIBLE,
        }
    };
    let mut x = pack(&start).ok_or(CertificateError::NotPositiveDefinite)?;
    let mut fx = objective(&x);
    // restarts shake the simplex out of the bisection-induced plateaus
    for step in [1.0, 0.3, 0.1] {
        let (nx, nf) = nelder_mead(objective, &x, step, 600 * x.len(), 1e-9);
        if nf <= fx {
            x = nx;
            fx = nf;
        }
    }
    if fx >= INFEASIBLE {
        return Err(CertificateError::NoFallback(f64::INFINITY));
    }
    Ok(LyapunovDesign {
        p_matrix: unpack(&x, n),
        gamma: fx,
    })
}
