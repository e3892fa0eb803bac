use nalgebra::DMatrix;

use super::embedding::{PolytopicEmbedding, Vertex};
use super::CertificateError;
use crate::linalg::max_eigenvalue;
use crate::scalar::Real;

/// Bracket and relative tolerance for the bisection on `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection<T = f64> {
    pub gamma_lo: T,
    pub gamma_hi: T,
    pub tol: T,
}

impl<T: Real> Default for Bisection<T> {
    fn default() -> Self {
        Self {
            gamma_lo: T::lit(1e-6),
            gamma_hi: T::lit(1e6),
            tol: T::lit(1e-6),
        }
    }
}

/// Symmetric matrix whose negative semidefiniteness is equivalent to
/// `2xᵀP(Ax+Be+Ew) ≤ −εxᵀPx − |Ax+Ew|² + γ²|e|² + θ²|w|²` for all `(x, e, w)`.
pub fn dissipation_matrix<T: Real>(
    vertex: &Vertex<T>,
    p: &DMatrix<T>,
    epsilon: T,
    gamma: T,
    theta: T,
) -> DMatrix<T> {
    let (a, b, e) = (&vertex.a, &vertex.b, &vertex.e);
    let n_x = a.nrows();
    let n_e = b.ncols();
    let n_w = e.ncols();
    let n = n_x + n_e + n_w;
    let at = a.transpose();

    let xx = &at * p + p * a + p * epsilon + &at * a;
    let xe = p * b;
    let xw = p * e + &at * e;
    let ww = e.transpose() * e - DMatrix::identity(n_w, n_w) * (theta * theta);

    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (n_x, n_x)).copy_from(&xx);
    m.view_mut((0, n_x), (n_x, n_e)).copy_from(&xe);
    m.view_mut((n_x, 0), (n_e, n_x)).copy_from(&xe.transpose());
    m.view_mut((0, n_x + n_e), (n_x, n_w)).copy_from(&xw);
    m.view_mut((n_x + n_e, 0), (n_w, n_x))
        .copy_from(&xw.transpose());
    for i in 0..n_e {
        m[(n_x + i, n_x + i)] = -gamma * gamma;
    }
    m.view_mut((n_x + n_e, n_x + n_e), (n_w, n_w))
        .copy_from(&ww);
    m
}

fn check_dims<T: Real>(
    embedding: &PolytopicEmbedding<T>,
    p: &DMatrix<T>,
) -> Result<(), CertificateError> {
    if p.shape() != (embedding.n_x(), embedding.n_x()) {
        return Err(CertificateError::DimensionMismatch(format!(
            "P is {:?}, embedding has n_x = {}",
            p.shape(),
            embedding.n_x()
        )));
    }
    Ok(())
}

/// Largest eigenvalue of the dissipation matrix over all vertices.
pub fn worst_vertex_eigenvalue<T: Real>(
    embedding: &PolytopicEmbedding<T>,
    p: &DMatrix<T>,
    epsilon: T,
    gamma: T,
    theta: T,
) -> Result<T, CertificateError> {
    check_dims(embedding, p)?;
    Ok(embedding
        .vertices()
        .iter()
        .map(|v| max_eigenvalue(&dissipation_matrix(v, p, epsilon, gamma, theta)))
        .fold(T::neg_infinity(), T::max))
}

/// True iff the dissipation inequality holds at every vertex.
pub fn feasibility_check<T: Real>(
    embedding: &PolytopicEmbedding<T>,
    p: &DMatrix<T>,
    epsilon: T,
    gamma: T,
    theta: T,
) -> Result<bool, CertificateError> {
    Ok(worst_vertex_eigenvalue(embedding, p, epsilon, gamma, theta)? <= T::zero())
}

/// Smallest feasible `γ` within the relative tolerance, or `None` when even
/// the top of the bracket fails.
pub fn min_gamma<T: Real>(
    embedding: &PolytopicEmbedding<T>,
    p: &DMatrix<T>,
    epsilon: T,
    theta: T,
    bisection: &Bisection<T>,
) -> Result<Option<T>, CertificateError> {
    if !(bisection.tol > T::zero()) || !(bisection.gamma_lo > T::zero()) {
        return Err(CertificateError::InvalidParameter(
            "bisection needs positive tolerance and bracket",
        ));
    }
    let feasible = |g: T| feasibility_check(embedding, p, epsilon, g, theta);
    let (mut lo, mut hi) = (bisection.gamma_lo, bisection.gamma_hi);
    if !feasible(hi)? {
        return Ok(None);
    }
    if feasible(lo)? {
        return Ok(Some(lo));
    }
    let four = T::lit(4.0);
    while hi - lo > bisection.tol * hi {
        // geometric steps while the bracket spans decades
        let mid = if hi > four * lo {
            (lo * hi).sqrt()
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::embedding::{embed_example1, embed_example2};

    fn p_example2() -> DMatrix<f64> {
        DMatrix::identity(2, 2) * 1.5
    }

    #[test]
    fn extreme_parameters_are_feasible() {
        let emb = embed_example2(5.0).unwrap();
        assert!(feasibility_check(&emb, &p_example2(), -50.0, 1e3, 10.0).unwrap());
    }

    #[test]
    fn tiny_gamma_is_infeasible() {
        let emb = embed_example2(5.0).unwrap();
        assert!(!feasibility_check(&emb, &p_example2(), -50.0, 1e-9, 10.0).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let emb = embed_example2(5.0).unwrap();
        let p = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            feasibility_check(&emb, &p, 0.0, 1.0, 1.0),
            Err(CertificateError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bisection_contract() {
        let emb = embed_example2(3.0).unwrap();
        let bis = Bisection::default();
        let g = min_gamma(&emb, &p_example2(), 0.5, 2.0, &bis)
            .unwrap()
            .unwrap();
        assert!(feasibility_check(&emb, &p_example2(), 0.5, g, 2.0).unwrap());
        assert!(
            !feasibility_check(&emb, &p_example2(), 0.5, g * (1.0 - 10.0 * bis.tol), 2.0).unwrap()
        );
    }

    #[test]
    fn smaller_epsilon_admits_smaller_gamma() {
        let emb = embed_example2(3.0).unwrap();
        let bis = Bisection::default();
        let g_neg = min_gamma(&emb, &p_example2(), -5.0, 2.0, &bis)
            .unwrap()
            .unwrap();
        let g_pos = min_gamma(&emb, &p_example2(), 0.01, 2.0, &bis)
            .unwrap()
            .unwrap();
        assert!(g_neg <= g_pos);
    }

    #[test]
    fn epsilon_beyond_decay_rate_is_infeasible() {
        // A = −I decays with rate 2 in V = xᵀPx; ε = 3 cannot be certified.
        let emb = embed_example2(1.0).unwrap();
        let bis = Bisection::default();
        assert_eq!(
            min_gamma(&emb, &p_example2(), 3.0, 2.0, &bis).unwrap(),
            None
        );
        let ex1 = embed_example1(9.81 / 2.0, 2.0).unwrap();
        let p = DMatrix::identity(2, 2);
        assert_eq!(min_gamma(&ex1, &p, 5.0, 10.0, &bis).unwrap(), None);
    }

    #[test]
    fn single_precision_feasibility() {
        let emb = embed_example2(5.0f32).unwrap();
        let p = DMatrix::<f32>::identity(2, 2) * 1.5;
        assert!(feasibility_check(&emb, &p, -5.0, 100.0, 2.0).unwrap());
    }
}
