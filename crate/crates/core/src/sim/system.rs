use nalgebra::DMatrix;

/// Closed-loop vector field `ẋ = f(x, e, w)` where `e = x̂ − x` is the
/// sampling-induced error of the held values.
pub trait NonlinearSystem: Send + Sync {
    fn n_x(&self) -> usize;

    fn n_w(&self) -> usize;

    fn n_e(&self) -> usize {
        self.n_x()
    }

    fn vector_field(&self, x: &[f64], e: &[f64], w: &[f64], out: &mut [f64]);

    fn eval(&self, x: &[f64], e: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_x()];
        self.vector_field(x, e, w, &mut out);
        out
    }
}

/// Perturbed single-link robot arm with the feedback
/// `u = b⁻¹(a sin x̂₁ − x̂₁ − x̂₂)` applied through a zero-order hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotArm {
    pub a: f64,
    pub b: f64,
}

impl Default for RobotArm {
    fn default() -> Self {
        Self {
            a: 9.81 / 2.0,
            b: 2.0,
        }
    }
}

impl NonlinearSystem for RobotArm {
    fn n_x(&self) -> usize {
        2
    }

    fn n_w(&self) -> usize {
        1
    }

    fn vector_field(&self, x: &[f64], e: &[f64], w: &[f64], out: &mut [f64]) {
        let h1 = x[0] + e[0];
        let h2 = x[1] + e[1];
        let u = (self.a * h1.sin() - h1 - h2) / self.b;
        out[0] = x[1];
        out[1] = -self.a * x[0].sin() + self.b * u + w[0];
    }
}

/// `ẋ₁ = −x₁`, `ẋ₂ = (x₁² + x₂²)x₂ + û + w` with `u = −(1 + x₁² + x₂²)x₂`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CubicPlant;

impl NonlinearSystem for CubicPlant {
    fn n_x(&self) -> usize {
        2
    }

    fn n_w(&self) -> usize {
        1
    }

    fn vector_field(&self, x: &[f64], e: &[f64], w: &[f64], out: &mut [f64]) {
        let h1 = x[0] + e[0];
        let h2 = x[1] + e[1];
        let u = -(1.0 + h1 * h1 + h2 * h2) * h2;
        out[0] = -x[0];
        out[1] = (x[0] * x[0] + x[1] * x[1]) * x[1] + u + w[0];
    }
}

/// `ẋ = Ax + Be + Ew`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub e: DMatrix<f64>,
}

impl NonlinearSystem for LinearSystem {
    fn n_x(&self) -> usize {
        self.a.nrows()
    }

    fn n_w(&self) -> usize {
        self.e.ncols()
    }

    fn n_e(&self) -> usize {
        self.b.ncols()
    }

    fn vector_field(&self, x: &[f64], e: &[f64], w: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.a[(i, j)] * xj;
            }
            for (j, ej) in e.iter().enumerate() {
                acc += self.b[(i, j)] * ej;
            }
            for (j, wj) in w.iter().enumerate() {
                acc += self.e[(i, j)] * wj;
            }
            *o = acc;
        }
    }
}
