use nalgebra::DMatrix;

use super::CertificateError;
use crate::linalg::spectral_norm;
use crate::scalar::Real;

/// Floor applied to `L` so that it stays strictly positive.
pub const L_GAIN_FLOOR: f64 = 1e-9;

/// One vertex `ẋ = A x + B e + E w` of a polytopic embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T: Real = f64> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub e: DMatrix<T>,
}

/// Convex over-approximation of the closed loop `f(x, e, w)` by finitely many
/// linear vertex systems.
///
/// The drift `A` and disturbance input `E` are shared by all vertices of the
/// built-in embeddings; only `B` varies with the uncertain parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopicEmbedding<T: Real = f64> {
    n_x: usize,
    n_e: usize,
    n_w: usize,
    vertices: Vec<Vertex<T>>,
    level_c: Option<T>,
}

impl<T: Real> PolytopicEmbedding<T> {
    pub fn new(vertices: Vec<Vertex<T>>, level_c: Option<T>) -> Result<Self, CertificateError> {
        let first = vertices.first().ok_or(CertificateError::EmptyEmbedding)?;
        let n_x = first.a.nrows();
        let n_e = first.b.ncols();
        let n_w = first.e.ncols();
        for v in &vertices {
            let ok =
                v.a.shape() == (n_x, n_x) && v.b.shape() == (n_x, n_e) && v.e.shape() == (n_x, n_w);
            if !ok {
                return Err(CertificateError::DimensionMismatch(format!(
                    "vertex shapes A{:?} B{:?} E{:?} incompatible with n_x={n_x}, n_e={n_e}, n_w={n_w}",
                    v.a.shape(),
                    v.b.shape(),
                    v.e.shape()
                )));
            }
        }
        if let Some(c) = level_c {
            if c.is_nan() || c <= T::zero() {
                return Err(CertificateError::InvalidParameter(
                    "level_c must be positive",
                ));
            }
        }
        Ok(Self {
            n_x,
            n_e,
            n_w,
            vertices,
            level_c,
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn n_w(&self) -> usize {
        self.n_w
    }

    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn level_c(&self) -> Option<T> {
        self.level_c
    }

    /// Drift matrix used in `H(x, e, w) = |Ax + Ew|`.
    pub fn drift(&self) -> &DMatrix<T> {
        &self.vertices[0].a
    }

    pub fn disturbance_input(&self) -> &DMatrix<T> {
        &self.vertices[0].e
    }
}

fn mat<T: Real>(rows: usize, cols: usize, data: &[f64]) -> DMatrix<T> {
    DMatrix::from_row_iterator(rows, cols, data.iter().map(|&v| T::lit(v)))
}

/// Embedding of the perturbed single-link robot arm under the linearizing
/// state feedback: `A = [[0,1],[−1,−1]]`, `B(ã) = [[0,0],[ã−1,−1]]`,
/// `E = [0;1]` with `ã ∈ [−a, a]`.
///
/// `b` cancels out of the closed loop; it is only validated.
pub fn embed_example1<T: Real>(a: T, b: T) -> Result<PolytopicEmbedding<T>, CertificateError> {
    if !(a >= T::zero()) || !(b > T::zero()) {
        return Err(CertificateError::InvalidParameter(
            "example 1 needs a ≥ 0 and b > 0",
        ));
    }
    let drift = mat(2, 2, &[0.0, 1.0, -1.0, -1.0]);
    let input = mat(2, 1, &[0.0, 1.0]);
    let mut corners = vec![-a];
    if a > T::zero() {
        corners.push(a);
    }
    let vertices = corners
        .into_iter()
        .map(|s| Vertex {
            a: drift.clone(),
            b: DMatrix::from_row_slice(2, 2, &[T::zero(), T::zero(), s - T::one(), -T::one()]),
            e: input.clone(),
        })
        .collect();
    PolytopicEmbedding::new(vertices, None)
}

/// Half-widths `(c/7, 3c/14)` of the parameter box for level `c`.
pub fn example2_ranges<T: Real>(c_level: T) -> (T, T) {
    (c_level / T::lit(7.0), T::lit(3.0) * c_level / T::lit(14.0))
}

/// Level-`c` embedding of the cubic example: `A = −I`,
/// `B(ã₁, ã₂) = [[0,0],[ã₁, ã₂−1]]`, `E = [0;1]`.
pub fn embed_example2<T: Real>(c_level: T) -> Result<PolytopicEmbedding<T>, CertificateError> {
    if !(c_level > T::zero()) || !c_level.is_finite() {
        return Err(CertificateError::InvalidParameter(
            "example 2 needs a positive level",
        ));
    }
    let (r1, r2) = example2_ranges(c_level);
    let drift = mat(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
    let input = mat(2, 1, &[0.0, 1.0]);
    let mut vertices = Vec::with_capacity(4);
    for s1 in [-r1, r1] {
        for s2 in [-r2, r2] {
            vertices.push(Vertex {
                a: drift.clone(),
                b: DMatrix::from_row_slice(2, 2, &[T::zero(), T::zero(), s1, s2 - T::one()]),
                e: input.clone(),
            });
        }
    }
    PolytopicEmbedding::new(vertices, Some(c_level))
}

/// `L = max_vertex ‖B‖₂`, valid for `W(e) = |e|` and `H = |Ax + Ew|`.
pub fn compute_l_gain<T: Real>(embedding: &PolytopicEmbedding<T>) -> T {
    embedding
        .vertices()
        .iter()
        .map(|v| spectral_norm(&v.b))
        .fold(T::lit(L_GAIN_FLOOR), T::max)
}
