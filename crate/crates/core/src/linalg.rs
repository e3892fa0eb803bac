//! Small dense linear algebra: cyclic Jacobi for symmetric eigenvalues and a
//! Kronecker-form continuous Lyapunov solver.

use nalgebra::DMatrix;

use crate::scalar::Real;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// matrix norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in ascending
/// order. Only the upper triangle is read.
pub fn symmetric_eigenvalues<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "symmetric_eigenvalues needs a square matrix");
    let mut a = m.clone();
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    let norm = a.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    let threshold = T::lit(JACOBI_TOLERANCE) * norm.max(T::min_positive_value());

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eig
}

pub fn max_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    symmetric_eigenvalues(m)
        .last()
        .copied()
        .unwrap_or_else(T::neg_infinity)
}

pub fn is_symmetric<T: Real>(m: &DMatrix<T>, tol: T) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

pub fn is_positive_definite<T: Real>(m: &DMatrix<T>) -> bool {
    m.is_square()
        && m.nrows() > 0
        && symmetric_eigenvalues(m)
            .first()
            .is_some_and(|&lo| lo > T::zero())
}

/// Solves `AᵀP + PA = −Q` through the Kronecker form. Returns `None` when the
/// operator is singular (A has eigenvalues summing to zero).
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    // vec(AᵀP + PA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P) for column-major vec.
    let op = eye.kronecker(&a.transpose()) + a.transpose().kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, q.as_slice());
    let sol = op.lu().solve(&rhs)?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    Some((&p + p.transpose()) * 0.5)
}

/// Spectral norm `σ_max(B)` as the square root of the largest eigenvalue of
/// `BᵀB`.
pub fn spectral_norm<T: Real>(b: &DMatrix<T>) -> T {
    let gram = b.transpose() * b;
    max_eigenvalue(&gram).max(T::zero()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(symmetric_eigenvalues(&m), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigenvalues(&m);
        assert_relative_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(e[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_solution_for_closed_loop_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -1.0]);
        let p = solve_lyapunov(&a, &DMatrix::identity(2, 2)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.5, 0.5, 0.5, 1.0]);
        assert_relative_eq!(p, expected, epsilon = 1e-12);
        assert!(is_positive_definite(&p));
    }

    #[test]
    fn spectral_norm_of_row() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -5.905, 1.0]);
        assert_relative_eq!(
            spectral_norm(&b),
            (5.905f64 * 5.905 + 1.0).sqrt(),
            epsilon = 1e-12
        );
    }

    proptest! {
        // nalgebra's symmetric eigensolver serves as the independent route.
        #[test]
        fn jacobi_matches_nalgebra(vals in proptest::collection::vec(-10.0f64..10.0, 25)) {
            let raw = DMatrix::from_row_slice(5, 5, &vals);
            let sym = (&raw + raw.transpose()) * 0.5;
            let ours = symmetric_eigenvalues(&sym);
            let mut theirs: Vec<f64> = sym.clone().symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }
    }
}
