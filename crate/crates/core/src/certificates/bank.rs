use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::embedding::{compute_l_gain, PolytopicEmbedding};
use super::feasibility::{min_gamma, Bisection};
use super::CertificateError;
use crate::linalg::{is_positive_definite, is_symmetric};
use crate::mati::mati_unchecked;
use crate::scalar::Real;

/// One `(ε, γ, L)` triple satisfying the dissipation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet<T = f64> {
    pub epsilon: T,
    pub gamma: T,
    pub l_gain: T,
}

impl<T: Real> ParameterSet<T> {
    pub fn new(epsilon: T, gamma: T, l_gain: T) -> Result<Self, CertificateError> {
        if !(gamma > T::zero()) || !(l_gain > T::zero()) || !epsilon.is_finite() {
            return Err(CertificateError::InvalidParameter(
                "parameter sets need γ > 0, L > 0 and finite ε",
            ));
        }
        Ok(Self {
            epsilon,
            gamma,
            l_gain,
        })
    }

    /// `Λ = L + ε/2`, the rate used by the fall-back interval.
    pub fn matched_rate(&self) -> T {
        self.l_gain + self.epsilon / T::lit(2.0)
    }

    /// `Λ = max{L + ε/2, 1 − δ}`, the rate used by the dynamic branches.
    pub fn clamped_rate(&self, delta: T) -> T {
        self.matched_rate().max(T::one() - delta)
    }
}

/// Parameter sets certified on the sublevel set `{V ≤ c}`. `c = +∞` marks a
/// global certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCertificate<T = f64> {
    pub c: T,
    pub sets: Vec<ParameterSet<T>>,
}

impl<T: Real> LevelCertificate<T> {
    pub fn fallback_set(&self) -> &ParameterSet<T> {
        &self.sets[0]
    }

    pub fn is_global(&self) -> bool {
        self.c.is_infinite()
    }
}

/// A quadratic Lyapunov function `V(x) = xᵀPx`, the disturbance gain `θ`
/// (`α_w(s) = θ²s²`) and one or more levels of parameter sets sorted by `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateBank<T: Real = f64> {
    p_matrix: DMatrix<T>,
    theta: T,
    levels: Vec<LevelCertificate<T>>,
}

impl<T: Real> CertificateBank<T> {
    pub fn new(
        p_matrix: DMatrix<T>,
        theta: T,
        levels: Vec<LevelCertificate<T>>,
    ) -> Result<Self, CertificateError> {
        if !is_symmetric(
            &p_matrix,
            T::lit(1e-12) * p_matrix.iter().fold(T::one(), |m, v| m.max(v.abs())),
        ) || !is_positive_definite(&p_matrix)
        {
            return Err(CertificateError::NotPositiveDefinite);
        }
        if !(theta > T::zero()) {
            return Err(CertificateError::InvalidParameter("θ must be positive"));
        }
        if levels.is_empty() {
            return Err(CertificateError::InvalidParameter(
                "a bank needs at least one level",
            ));
        }
        for pair in levels.windows(2) {
            if !(pair[1].c > pair[0].c) {
                return Err(CertificateError::InvalidParameter(
                    "level bounds must be strictly increasing",
                ));
            }
        }
        for level in &levels {
            if !(level.c > T::zero()) {
                return Err(CertificateError::InvalidParameter(
                    "level bounds must be positive",
                ));
            }
            match level.sets.first() {
                Some(first) if first.epsilon > T::zero() => {}
                _ => return Err(CertificateError::NoFallback(level.c.to_f64_lossy())),
            }
            for s in &level.sets {
                ParameterSet::new(s.epsilon, s.gamma, s.l_gain)?;
            }
        }
        Ok(Self {
            p_matrix,
            theta,
            levels,
        })
    }

    pub fn p_matrix(&self) -> &DMatrix<T> {
        &self.p_matrix
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn levels(&self) -> &[LevelCertificate<T>] {
        &self.levels
    }

    pub fn n_x(&self) -> usize {
        self.p_matrix.nrows()
    }

    /// `α_w(s) = θ² s²`.
    pub fn alpha_w(&self, w_norm: T) -> T {
        self.theta * self.theta * w_norm * w_norm
    }

    /// `V(x) = xᵀPx`.
    pub fn lyapunov(&self, x: &[T]) -> T {
        let n = self.n_x();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += x[i] * self.p_matrix[(i, j)] * x[j];
            }
        }
        acc
    }

    pub fn max_level(&self) -> T {
        self.levels[self.levels.len() - 1].c
    }

    pub fn is_global(&self) -> bool {
        self.levels.len() == 1 && self.levels[0].is_global()
    }

    /// Index of the smallest level with `c_l ≥ bound`.
    pub fn select_level(&self, bound: T) -> Option<usize> {
        self.levels.iter().position(|l| l.c >= bound)
    }

    /// Copy with every `γ` multiplied by `factor`; used for negative controls.
    pub fn with_scaled_gamma(&self, factor: T) -> Self {
        let mut out = self.clone();
        for level in &mut out.levels {
            for s in &mut level.sets {
                s.gamma *= factor;
            }
        }
        out
    }
}

/// Guaranteed interval `δ·T_max(γ₁, L₁ + ε₁/2)` of a level's fall-back set.
pub fn fallback_period<T: Real>(
    bank: &CertificateBank<T>,
    level: usize,
    delta: T,
) -> Result<T, CertificateError> {
    let level = bank
        .levels()
        .get(level)
        .ok_or(CertificateError::InvalidParameter(
            "level index out of range",
        ))?;
    let set = level.fallback_set();
    Ok(delta * mati_unchecked(set.gamma, set.matched_rate()))
}

/// Shortest fall-back interval over all levels.
pub fn minimum_dwell<T: Real>(bank: &CertificateBank<T>, delta: T) -> T {
    (0..bank.levels().len())
        .filter_map(|l| fallback_period(bank, l, delta).ok())
        .fold(T::infinity(), T::min)
}

/// Synthesis inputs besides the embedding family and `P`.
#[derive(Debug, Clone)]
pub struct SynthesisSpec<T = f64> {
    pub epsilon_grid: Vec<T>,
    pub theta: T,
    /// Empty for a single global level.
    pub c_levels: Vec<T>,
    pub bisection: Bisection<T>,
}

/// Runs [`min_gamma`] for every `(level, ε)` pair and assembles the bank.
///
/// Set 1 of each level is the largest feasible positive `ε`. For leveled
/// banks the remaining sets are restricted to `ε < 0`, which the disturbance
/// shifted log bound requires.
pub fn synthesize_bank<T, F>(
    embedding_for: F,
    p_matrix: &DMatrix<T>,
    spec: &SynthesisSpec<T>,
) -> Result<CertificateBank<T>, CertificateError>
where
    T: Real,
    F: Fn(Option<T>) -> Result<PolytopicEmbedding<T>, CertificateError>,
{
    if spec.epsilon_grid.is_empty() {
        return Err(CertificateError::InvalidParameter("empty ε grid"));
    }
    if !spec.epsilon_grid.iter().any(|&e| e > T::zero()) {
        return Err(CertificateError::NoFallback(f64::INFINITY));
    }
    let leveled = !spec.c_levels.is_empty();
    let targets: Vec<Option<T>> = if leveled {
        spec.c_levels.iter().map(|&c| Some(c)).collect()
    } else {
        vec![None]
    };

    let mut grid = spec.epsilon_grid.clone();
    grid.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    grid.dedup();

    let mut levels = Vec::with_capacity(targets.len());
    for target in targets {
        let embedding = embedding_for(target)?;
        let l_gain = compute_l_gain(&embedding);
        let mut fallback = None;
        let mut dynamic = Vec::new();
        for &eps in &grid {
            let positive = eps > T::zero();
            if fallback.is_some() && positive && leveled {
                continue;
            }
            let Some(gamma) = min_gamma(&embedding, p_matrix, eps, spec.theta, &spec.bisection)?
            else {
                continue;
            };
            let set = ParameterSet::new(eps, gamma, l_gain)?;
            if fallback.is_none() && positive {
                fallback = Some(set);
            } else if !positive || !leveled {
                dynamic.push(set);
            }
        }
        let c = target.unwrap_or_else(T::infinity);
        let fallback = fallback.ok_or(CertificateError::NoFallback(c.to_f64_lossy()))?;
        let mut sets = vec![fallback];
        sets.extend(dynamic);
        levels.push(LevelCertificate { c, sets });
    }
    CertificateBank::new(p_matrix.clone(), spec.theta, levels)
}

/// On-disk representation. A global level stores `c` as `null`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BankDocument {
    pub p_matrix: Vec<Vec<f64>>,
    pub theta: f64,
    pub levels: Vec<LevelDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelDocument {
    pub c: Option<f64>,
    pub sets: Vec<ParameterSet<f64>>,
}

impl From<&CertificateBank<f64>> for BankDocument {
    fn from(bank: &CertificateBank<f64>) -> Self {
        let p = bank.p_matrix();
        Self {
            p_matrix: (0..p.nrows())
                .map(|i| (0..p.ncols()).map(|j| p[(i, j)]).collect())
                .collect(),
            theta: bank.theta(),
            levels: bank
                .levels()
                .iter()
                .map(|l| LevelDocument {
                    c: l.c.is_finite().then_some(l.c),
                    sets: l.sets.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<BankDocument> for CertificateBank<f64> {
    type Error = CertificateError;

    fn try_from(doc: BankDocument) -> Result<Self, Self::Error> {
        let n = doc.p_matrix.len();
        if doc.p_matrix.iter().any(|row| row.len() != n) {
            return Err(CertificateError::DimensionMismatch(
                "p_matrix must be square".into(),
            ));
        }
        let p = DMatrix::from_row_iterator(n, n, doc.p_matrix.into_iter().flatten());
        let levels = doc
            .levels
            .into_iter()
            .map(|l| LevelCertificate {
                c: l.c.unwrap_or(f64::INFINITY),
                sets: l.sets,
            })
            .collect();
        CertificateBank::new(p, doc.theta, levels)
    }
}

impl CertificateBank<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BankDocument::from(self)).expect("bank serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CertificateError> {
        let doc: BankDocument = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<(), CertificateError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CertificateError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::embedding::embed_example2;
    use crate::certificates::feasibility::feasibility_check;

    fn small_bank() -> CertificateBank<f64> {
        let spec = SynthesisSpec {
            epsilon_grid: vec![1.0, 0.5, -1.0, -5.0],
            theta: 2.0,
            c_levels: vec![0.64, 2.0, 6.0],
            bisection: Bisection::default(),
        };
        synthesize_bank(
            |c| embed_example2(c.unwrap()),
            &(DMatrix::identity(2, 2) * 1.5),
            &spec,
        )
        .unwrap()
    }

    #[test]
    fn leveled_bank_layout() {
        let bank = small_bank();
        assert_eq!(bank.levels().len(), 3);
        for level in bank.levels() {
            assert_eq!(level.sets[0].epsilon, 1.0);
            assert!(level.sets[1..].iter().all(|s| s.epsilon < 0.0));
        }
        assert_eq!(bank.select_level(1.0), Some(1));
        assert_eq!(bank.select_level(0.64), Some(0));
        assert_eq!(bank.select_level(7.0), None);
    }

    #[test]
    fn gamma_and_gain_grow_with_level() {
        let bank = small_bank();
        for pair in bank.levels().windows(2) {
            assert!(pair[1].sets[0].l_gain >= pair[0].sets[0].l_gain);
            assert!(pair[1].sets[0].gamma >= pair[0].sets[0].gamma);
        }
    }

    #[test]
    fn json_round_trip_is_exact_and_recertifies() {
        let bank = small_bank();
        let back = CertificateBank::from_json(&bank.to_json()).unwrap();
        assert_eq!(bank, back);
        for level in back.levels() {
            let emb = embed_example2(level.c).unwrap();
            for s in &level.sets {
                assert!(
                    feasibility_check(&emb, back.p_matrix(), s.epsilon, s.gamma, back.theta())
                        .unwrap()
                );
            }
        }
    }

    #[test]
    fn global_level_serializes_as_null() {
        let bank = CertificateBank::new(
            DMatrix::identity(2, 2),
            1.0,
            vec![LevelCertificate {
                c: f64::INFINITY,
                sets: vec![ParameterSet::new(0.1, 2.0, 1.0).unwrap()],
            }],
        )
        .unwrap();
        let text = bank.to_json();
        assert!(text.contains("\"c\": null"));
        let back = CertificateBank::from_json(&text).unwrap();
        assert!(back.is_global());
    }

    #[test]
    fn synthesis_without_positive_epsilon_fails() {
        let spec = SynthesisSpec {
            epsilon_grid: vec![-1.0, -2.0],
            theta: 2.0,
            c_levels: vec![],
            bisection: Bisection::default(),
        };
        let res = synthesize_bank(
            |_| embed_example2(1.0),
            &(DMatrix::identity(2, 2) * 1.5),
            &spec,
        );
        assert!(matches!(res, Err(CertificateError::NoFallback(_))));
    }

    #[test]
    fn single_epsilon_gives_fallback_only() {
        let spec = SynthesisSpec {
            epsilon_grid: vec![0.5],
            theta: 2.0,
            c_levels: vec![],
            bisection: Bisection::default(),
        };
        let bank = synthesize_bank(
            |_| embed_example2(1.0),
            &(DMatrix::identity(2, 2) * 1.5),
            &spec,
        )
        .unwrap();
        assert_eq!(bank.levels()[0].sets.len(), 1);
        assert!(bank.is_global());
    }

    #[test]
    fn rejects_invalid_banks() {
        let set = ParameterSet::new(0.1, 2.0, 1.0).unwrap();
        let not_pd = CertificateBank::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            1.0,
            vec![LevelCertificate {
                c: 1.0,
                sets: vec![set],
            }],
        );
        assert!(matches!(not_pd, Err(CertificateError::NotPositiveDefinite)));
        let unsorted = CertificateBank::new(
            DMatrix::identity(2, 2),
            1.0,
            vec![
                LevelCertificate {
                    c: 2.0,
                    sets: vec![set],
                },
                LevelCertificate {
                    c: 1.0,
                    sets: vec![set],
                },
            ],
        );
        assert!(unsorted.is_err());
        let no_fallback = CertificateBank::new(
            DMatrix::identity(2, 2),
            1.0,
            vec![LevelCertificate {
                c: 1.0,
                sets: vec![ParameterSet::new(-0.1, 2.0, 1.0).unwrap()],
            }],
        );
        assert!(matches!(no_fallback, Err(CertificateError::NoFallback(_))));
    }

    #[test]
    fn fallback_limit_delta_to_one() {
        let bank = small_bank();
        let s = bank.levels()[1].sets[0];
        let full = mati_unchecked(s.gamma, s.matched_rate());
        assert!((fallback_period(&bank, 1, 1.0).unwrap() - full).abs() < 1e-15);
        assert!(fallback_period(&bank, 9, 0.999).is_err());
    }
}
