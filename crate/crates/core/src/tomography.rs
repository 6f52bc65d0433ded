//! Two-qubit state reconstruction from coincidence counts at the nine
//! Pauli-axis analyzer settings.
//!
//! For setting `(i, j)` with coincidence counts `N(α, β)` the three
//! estimators are ratios of signed sums over the four joint outcomes:
//!
//! ```text
//! a_ij = [N(++) − N(+−) − N(−+) + N(−−)] / ΣN
//! a_i0 = [N(++) + N(+−) − N(−+) − N(−−)] / ΣN
//! a_0j = [N(++) − N(+−) + N(−+) − N(−−)] / ΣN
//! ```
//!
//! Each single-arm coefficient is therefore estimated three times, once per
//! partner axis, and the three values are merged by inverse-variance
//! weighting. Unequal port efficiencies are undone by dividing every count
//! by `η₁(α) η₂(β)` before forming the ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{AnalyzerSetting, CountsRecord, JointOutcome};
use crate::spin::{
    compose, fidelity, hermitian_eigen, trace_distance, CMatrix4, HermitianOp4, PauliCoefficients,
    TwoQubitState,
};
use num_complex::Complex64;

/// `(n₊ − n₋)/(n₊ + n₋)`.
pub fn bloch_from_counts(n_plus: u64, n_minus: u64) -> Result<f64> {
    bloch_from_counts_unbalanced(n_plus, n_minus, 1.0, 1.0)
}

/// Bloch component from port counts of a beamsplitter whose ports detect
/// with efficiencies `η₊`, `η₋`.
pub fn bloch_from_counts_unbalanced(
    n_plus: u64,
    n_minus: u64,
    eta_plus: f64,
    eta_minus: f64,
) -> Result<f64> {
    if n_plus + n_minus == 0 {
        return Err(Error::Tomography("zero total counts".into()));
    }
    for eta in [eta_plus, eta_minus] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "efficiency {eta} outside (0, 1]"
            )));
        }
    }
    let p = n_plus as f64 / eta_plus;
    let m = n_minus as f64 / eta_minus;
    Ok((p - m) / (p + m))
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Coincidence counts at the nine settings `(i, j) ∈ {1,2,3}²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyInput {
    /// `counts[i][j][α][β]` for axes `(i+1, j+1)`.
    pub counts: [[[[u64; 2]; 2]; 3]; 3],
    pub settings: [[AnalyzerSetting; 3]; 3],
}

impl TomographyInput {
    /// Selects the Pauli-axis settings from a record. Repeated entries for
    /// the same axis pair are summed; they must share port efficiencies.
    pub fn from_record(record: &CountsRecord) -> Result<Self> {
        record.validate()?;
        let mut counts = [[[[0u64; 2]; 2]; 3]; 3];
        let mut settings: [[Option<AnalyzerSetting>; 3]; 3] = [[None; 3]; 3];
        for (k, s) in record.settings.iter().enumerate() {
            let Some((i, j)) = s.as_pauli_pair() else {
                continue;
            };
            let slot = &mut settings[i - 1][j - 1];
            match slot {
                Some(prev) if prev.eta1 != s.eta1 || prev.eta2 != s.eta2 => {
                    return Err(Error::Tomography(format!(
                        "setting ({i},{j}) appears with different port efficiencies"
                    )))
                }
                _ => *slot = Some(*s),
            }
            for a in 0..2 {
                for b in 0..2 {
                    counts[i - 1][j - 1][a][b] += record.joint[k][a][b];
                }
            }
        }
        let mut full = [[AnalyzerSetting::pauli_axes(1, 1)?; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                full[i][j] = settings[i][j].ok_or_else(|| {
                    Error::Tomography(format!("setting ({},{}) is missing", i + 1, j + 1))
                })?;
                if counts[i][j].iter().flatten().sum::<u64>() == 0 {
                    return Err(Error::Tomography(format!(
                        "setting ({},{}) has no coincidences",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self {
            counts,
            settings: full,
        })
    }
}

/// Per-setting estimates before reconciliation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEstimates {
    /// `correlations[i][j]` estimates `a_{i+1, j+1}`.
    pub correlations: [[Estimate; 3]; 3],
    /// `first_arm[i][j]` estimates `a_{i+1, 0}` from the setting with
    /// partner axis `j+1`.
    pub first_arm: [[Estimate; 3]; 3],
    /// `second_arm[j][i]` estimates `a_{0, j+1}` from the setting with
    /// partner axis `i+1`.
    pub second_arm: [[Estimate; 3]; 3],
}

impl RawEstimates {
    /// Coefficient array with each single-arm entry set to the plain mean of
    /// its three estimates, and the matching standard errors.
    pub fn coefficients(&self) -> (PauliCoefficients, [[f64; 4]; 4]) {
        let mut a = PauliCoefficients::identity();
        let mut se = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                a.a[i + 1][j + 1] = self.correlations[i][j].value;
                se[i + 1][j + 1] = self.correlations[i][j].std_error;
            }
            let mean = |e: &[Estimate; 3]| {
                let v = e.iter().map(|x| x.value).sum::<f64>() / 3.0;
                let s = e.iter().map(|x| x.std_error.powi(2)).sum::<f64>().sqrt() / 3.0;
                (v, s)
            };
            (a.a[i + 1][0], se[i + 1][0]) = mean(&self.first_arm[i]);
            (a.a[0][i + 1], se[0][i + 1]) = mean(&self.second_arm[i]);
        }
        (a, se)
    }
}

/// Efficiency-corrected signed ratio `Σ c_k w_k / Σ w_k` with `w_k = N_k/η_k`,
/// and its delta-method multinomial standard error
/// `√(Σ (c_k − a)² N_k / (η_k W)²)`.
///
/// When every count sits on one sign the formula gives zero; the variance is
/// then floored at `1/N²` so that inverse-variance weights stay finite.
fn signed_ratio(
    counts: &[[u64; 2]; 2],
    s: &AnalyzerSetting,
    sign: impl Fn(JointOutcome) -> f64,
) -> Estimate {
    let mut weights = [0.0; 4];
    let mut raw = [0.0; 4];
    for o in JointOutcome::ALL {
        let n = counts[o.0.index()][o.1.index()] as f64;
        raw[o.index()] = n;
        weights[o.index()] = n / (s.eta(0, o.0) * s.eta(1, o.1));
    }
    let w_total: f64 = weights.iter().sum();
    let n_total: f64 = raw.iter().sum();
    let value = JointOutcome::ALL
        .iter()
        .map(|o| sign(*o) * weights[o.index()])
        .sum::<f64>()
        / w_total;
    let var = JointOutcome::ALL
        .iter()
        .map(|o| {
            let k = o.index();
            let eta = s.eta(0, o.0) * s.eta(1, o.1);
            (sign(*o) - value).powi(2) * raw[k] / (eta * w_total).powi(2)
        })
        .sum::<f64>()
        .max(1.0 / (n_total * n_total));
    Estimate {
        value,
        std_error: var.sqrt(),
    }
}

/// Per-setting ratio estimators with standard errors.
pub fn coefficients_from_coincidences(input: &TomographyInput) -> RawEstimates {
    let blank = Estimate {
        value: 0.0,
        std_error: 0.0,
    };
    let mut raw = RawEstimates {
        correlations: [[blank; 3]; 3],
        first_arm: [[blank; 3]; 3],
        second_arm: [[blank; 3]; 3],
    };
    for i in 0..3 {
        for j in 0..3 {
            let c = &input.counts[i][j];
            let s = &input.settings[i][j];
            raw.correlations[i][j] = signed_ratio(c, s, |o| o.0.sign() * o.1.sign());
            raw.first_arm[i][j] = signed_ratio(c, s, |o| o.0.sign());
            raw.second_arm[j][i] = signed_ratio(c, s, |o| o.1.sign());
        }
    }
    raw
}

/// Inverse-variance weighted mean of repeated estimates of one quantity.
pub fn reconcile_estimates(estimates: &[Estimate]) -> Result<Estimate> {
    if estimates.len() < 3 {
        return Err(Error::Tomography(format!(
            "need three estimates per single-arm coefficient, got {}",
            estimates.len()
        )));
    }
    let mut w_sum = 0.0;
    let mut acc = 0.0;
    for e in estimates {
        if !(e.std_error > 0.0 && e.std_error.is_finite()) {
            return Err(Error::Tomography(format!(
                "standard error {} must be positive and finite",
                e.std_error
            )));
        }
        let w = e.std_error.powi(-2);
        w_sum += w;
        acc += w * e.value;
    }
    Ok(Estimate {
        value: acc / w_sum,
        std_error: w_sum.powf(-0.5),
    })
}

/// Merged coefficient array and its standard errors. The correlation block
/// passes through unchanged.
pub fn reconcile(raw: &RawEstimates) -> Result<(PauliCoefficients, [[f64; 4]; 4])> {
    let mut a = PauliCoefficients::identity();
    let mut se = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            a.a[i + 1][j + 1] = raw.correlations[i][j].value;
            se[i + 1][j + 1] = raw.correlations[i][j].std_error;
        }
        let first = reconcile_estimates(&raw.first_arm[i])?;
        let second = reconcile_estimates(&raw.second_arm[i])?;
        a.a[i + 1][0] = first.value;
        se[i + 1][0] = first.std_error;
        a.a[0][i + 1] = second.value;
        se[0][i + 1] = second.std_error;
    }
    Ok((a, se))
}

/// Linear-inversion estimate together with its smallest eigenvalue, which
/// is negative when noise pushed the coefficients outside the state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub operator: HermitianOp4,
    pub min_eigenvalue: f64,
}

pub fn reconstruct(coeffs: &PauliCoefficients) -> Result<Reconstruction> {
    let operator = compose(coeffs)?;
    Ok(Reconstruction {
        min_eigenvalue: operator.min_eigenvalue(),
        operator,
    })
}

/// Euclidean projection of a vector onto the probability simplex.
fn project_simplex(v: [f64; 4]) -> [f64; 4] {
    let mut u = v;
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

/// Closest density operator in Frobenius norm: the eigenvalues are projected
/// onto the probability simplex, which clips negative ones and shifts the
/// rest uniformly to restore unit trace.
pub fn project_to_physical(m: &HermitianOp4) -> TwoQubitState {
    let (vals, vecs) = hermitian_eigen(m.matrix());
    let clipped = project_simplex(vals);
    let mut d = CMatrix4::zeros();
    for k in 0..4 {
        d[(k, k)] = Complex64::new(clipped[k], 0.0);
    }
    let rho = vecs * d * vecs.adjoint();
    let rho = HermitianOp4::from_hermitian_part(rho).into_matrix();
    TwoQubitState::from_matrix_unchecked(rho)
}

/// Every stage of the reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub raw_estimates: RawEstimates,
    pub raw_coefficients: PauliCoefficients,
    pub raw_std_errors: [[f64; 4]; 4],
    pub reconciled_coefficients: PauliCoefficients,
    pub reconciled_std_errors: [[f64; 4]; 4],
    pub linear_inversion: HermitianOp4,
    pub min_eigenvalue: f64,
    pub physical_state: TwoQubitState,
    pub coincidences_per_setting: [[u64; 3]; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_trace_distance: Option<f64>,
}

impl TomographyResult {
    /// Fills the comparison fields against a reference state.
    pub fn with_target(mut self, target: &TwoQubitState) -> Self {
        self.target_fidelity = Some(fidelity(&self.physical_state, target));
        self.target_trace_distance = Some(trace_distance(
            self.physical_state.matrix(),
            target.matrix(),
        ));
        self
    }

    /// Largest standard error over the 15 estimated coefficients.
    pub fn max_std_error(&self) -> f64 {
        self.reconciled_std_errors
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Counts → estimators → reconciliation → linear inversion → projection.
pub fn end_to_end(record: &CountsRecord) -> Result<TomographyResult> {
    let input = TomographyInput::from_record(record)?;
    let raw = coefficients_from_coincidences(&input);
    let (raw_coefficients, raw_std_errors) = raw.coefficients();
    let (reconciled, reconciled_se) = reconcile(&raw)?;
    let lin = reconstruct(&reconciled)?;
    let physical = project_to_physical(&lin.operator);
    let mut per_setting = [[0u64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            per_setting[i][j] = input.counts[i][j].iter().flatten().sum();
        }
    }
    Ok(TomographyResult {
        raw_estimates: raw,
        raw_coefficients,
        raw_std_errors,
        reconciled_coefficients: reconciled,
        reconciled_std_errors: reconciled_se,
        linear_inversion: lin.operator,
        min_eigenvalue: lin.min_eigenvalue,
        physical_state: physical,
        coincidences_per_setting: per_setting,
        target_fidelity: None,
        target_trace_distance: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{born_probabilities, RunMetadata};
    use crate::fermi::{pair_state, werner_visibility, DetectorProfile, PairQuery};
    use crate::spin::testutil::random_state;
    use crate::spin::{decompose, is_physical, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli_settings() -> Vec<AnalyzerSetting> {
        (1..=3)
            .flat_map(|i| (1..=3).map(move |j| AnalyzerSetting::pauli_axes(i, j).unwrap()))
            .collect()
    }

    /// Counts equal to `n ×` the Born probabilities, rounded.
    fn expected_record(rho: &TwoQubitState, n: f64) -> CountsRecord {
        let settings = pauli_settings();
        let joint: Vec<[[u64; 2]; 2]> = settings
            .iter()
            .map(|s| {
                let p = born_probabilities(rho, s);
                [
                    [(p[0] * n).round() as u64, (p[1] * n).round() as u64],
                    [(p[2] * n).round() as u64, (p[3] * n).round() as u64],
                ]
            })
            .collect();
        let singles = joint
            .iter()
            .map(|j| {
                [
                    [j[0][0] + j[0][1], j[1][0] + j[1][1]],
                    [j[0][0] + j[1][0], j[0][1] + j[1][1]],
                ]
            })
            .collect();
        CountsRecord {
            settings,
            joint,
            singles,
            metadata: RunMetadata::default(),
        }
    }

    #[test]
    fn bloch_ratio_examples() {
        assert_eq!(bloch_from_counts(75, 25).unwrap(), 0.5);
        assert_eq!(bloch_from_counts(40, 40).unwrap(), 0.0);
        assert_eq!(bloch_from_counts(12, 0).unwrap(), 1.0);
        assert!(bloch_from_counts(0, 0).is_err());
        assert_eq!(bloch_from_counts_unbalanced(75, 25, 1.0, 1.0).unwrap(), 0.5);
        assert!(
            bloch_from_counts_unbalanced(75, 25, 0.75, 0.25)
                .unwrap()
                .abs()
                < 1e-15
        );
        assert_eq!(bloch_from_counts_unbalanced(9, 9, 0.4, 0.4).unwrap(), 0.0);
        assert!(bloch_from_counts_unbalanced(9, 9, 0.0, 0.4).is_err());
    }

    #[test]
    fn singlet_expected_counts() {
        let rec = expected_record(&TwoQubitState::singlet(), 1e6);
        let raw = coefficients_from_coincidences(&TomographyInput::from_record(&rec).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { -1.0 } else { 0.0 };
                let e = raw.correlations[i][j];
                assert!((e.value - want).abs() <= 3.0 * e.std_error + 1e-12);
                assert!(raw.first_arm[i][j].value.abs() < 1e-12);
                assert!(raw.second_arm[j][i].value.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_counts_give_zero_coefficients() {
        let rec = expected_record(&TwoQubitState::maximally_mixed(), 400.0);
        let res = end_to_end(&rec).unwrap();
        assert!(
            res.reconciled_coefficients
                .max_abs_diff(&PauliCoefficients::identity())
                < 1e-15
        );
    }

    #[test]
    fn pair_state_expected_counts() {
        let q = PairQuery::new(1.0, DetectorProfile::PointLike).unwrap();
        let rho = pair_state(&q).unwrap();
        let v = werner_visibility(crate::fermi::kernel(1.0, q.profile).unwrap());
        // exact (unrounded) probabilities make the estimators exact
        let settings = pauli_settings();
        let input = TomographyInput {
            counts: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let p = born_probabilities(&rho, &settings[3 * i + j]);
                    let n = 1e12;
                    [
                        [(p[0] * n) as u64, (p[1] * n) as u64],
                        [(p[2] * n) as u64, (p[3] * n) as u64],
                    ]
                })
            }),
            settings: std::array::from_fn(|i| std::array::from_fn(|j| settings[3 * i + j])),
        };
        let raw = coefficients_from_coincidences(&input);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { -v } else { 0.0 };
                assert!((raw.correlations[i][j].value - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unbalanced_ports_are_corrected() {
        let rho = pair_state(&PairQuery::new(0.6, DetectorProfile::PointLike).unwrap()).unwrap();
        let eta1 = [0.9, 0.5];
        let eta2 = [0.7, 1.0];
        let settings: Vec<_> = pauli_settings()
            .into_iter()
            .map(|s| AnalyzerSetting::with_efficiencies(s.axis1, s.axis2, eta1, eta2).unwrap())
            .collect();
        let n = 1e12;
        let joint: Vec<[[u64; 2]; 2]> = settings
            .iter()
            .map(|s| {
                let p = born_probabilities(&rho, s);
                let c = |k: usize, a: usize, b: usize| (p[k] * eta1[a] * eta2[b] * n) as u64;
                [[c(0, 0, 0), c(1, 0, 1)], [c(2, 1, 0), c(3, 1, 1)]]
            })
            .collect();
        let rec = CountsRecord {
            singles: joint
                .iter()
                .map(|j| {
                    [
                        [j[0][0] + j[0][1], j[1][0] + j[1][1]],
                        [j[0][0] + j[1][0], j[0][1] + j[1][1]],
                    ]
                })
                .collect(),
            settings,
            joint,
            metadata: RunMetadata::default(),
        };
        let res = end_to_end(&rec).unwrap();
        assert!(res.reconciled_coefficients.max_abs_diff(&decompose(&rho)) < 1e-9);
    }

    #[test]
    fn missing_or_empty_setting_rejected() {
        let mut rec = expected_record(&TwoQubitState::singlet(), 100.0);
        rec.joint[4] = [[0, 0], [0, 0]];
        assert!(matches!(end_to_end(&rec), Err(Error::Tomography(_))));
        let mut rec = expected_record(&TwoQubitState::singlet(), 100.0);
        rec.settings.pop();
        rec.joint.pop();
        rec.singles.pop();
        assert!(end_to_end(&rec).is_err());
    }

    fn est(value: f64, std_error: f64) -> Estimate {
        Estimate { value, std_error }
    }

    #[test]
    fn reconcile_examples() {
        let r = reconcile_estimates(&[est(0.3, 0.1); 3]).unwrap();
        assert!((r.value - 0.3).abs() < 1e-15);
        let r = reconcile_estimates(&[est(0.1, 0.05), est(0.1, 0.05), est(0.4, 0.05)]).unwrap();
        assert!((r.value - 0.2).abs() < 1e-15);
        let r = reconcile_estimates(&[est(0.1, 0.05), est(0.3, 0.05), est(0.9, 1e8)]).unwrap();
        assert!((r.value - 0.2).abs() < 1e-12);
        assert!(reconcile_estimates(&[est(0.1, 0.05), est(0.3, 0.05)]).is_err());
    }

    #[test]
    fn reconciled_error_never_exceeds_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let e: Vec<Estimate> = (0..3)
                .map(|_| est(rng.random_range(-1.0..1.0), rng.random_range(0.001..1.0)))
                .collect();
            let r = reconcile_estimates(&e).unwrap();
            let min = e.iter().map(|x| x.std_error).fold(f64::INFINITY, f64::min);
            assert!(r.std_error <= min + 1e-15);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let back = reconstruct(&decompose(&TwoQubitState::singlet())).unwrap();
        assert!(max_abs_diff(back.operator.matrix(), TwoQubitState::singlet().matrix()) < 1e-12);
        let mixed = reconstruct(&PauliCoefficients::identity()).unwrap();
        assert!((mixed.min_eigenvalue - 0.25).abs() < 1e-15);
        let mut a = PauliCoefficients::identity();
        a.a[3][3] = -1.2;
        let r = reconstruct(&a).unwrap();
        assert!(r.min_eigenvalue < 0.0);
        assert!((r.min_eigenvalue + 0.05).abs() < 1e-12);
    }

    #[test]
    fn projection_idempotent_on_physical_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let rho = random_state(&mut rng);
            let p = project_to_physical(&rho.as_operator());
            assert!(max_abs_diff(p.matrix(), rho.matrix()) < 1e-12);
        }
    }

    #[test]
    fn projection_of_diagonal_matches_grid_search() {
        let m = HermitianOp4::new(CMatrix4::from_diagonal(&nalgebra::Vector4::new(
            Complex64::new(1.1, 0.0),
            Complex64::new(0.2, 0.0),
            Complex64::new(-0.2, 0.0),
            Complex64::new(-0.1, 0.0),
        )))
        .unwrap();
        let p = project_to_physical(&m);
        let (ok, _) = is_physical(&p.as_operator(), 1e-12);
        assert!(ok);
        // exhaustive minimization over diagonal states on a 0.01 grid
        let target = [1.1, 0.2, -0.2, -0.1];
        let mut best = (f64::INFINITY, [0.0; 4]);
        let steps = 100;
        for a in 0..=steps {
            for b in 0..=(steps - a) {
                for c in 0..=(steps - a - b) {
                    let d = steps - a - b - c;
                    let x = [a, b, c, d].map(|v| v as f64 / steps as f64);
                    let dist: f64 = x.iter().zip(target).map(|(u, t)| (u - t).powi(2)).sum();
                    if dist < best.0 {
                        best = (dist, x);
                    }
                }
            }
        }
        for k in 0..4 {
            assert!((p.matrix()[(k, k)].re - best.1[k]).abs() <= 0.01 + 1e-12);
        }
        assert!((p.matrix()[(0, 0)].re - 0.95).abs() < 1e-12);
        assert!((p.matrix()[(1, 1)].re - 0.05).abs() < 1e-12);
    }

    #[test]
    fn projection_beats_random_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut noisy = decompose(&TwoQubitState::singlet());
        noisy.a[1][1] = -1.15;
        noisy.a[2][3] = 0.2;
        let m = reconstruct(&noisy).unwrap().operator;
        assert!(m.min_eigenvalue() < 0.0);
        let p = project_to_physical(&m);
        let frob = |a: &CMatrix4| (a - m.matrix()).norm();
        let best = frob(p.matrix());
        for _ in 0..100 {
            let c = random_state(&mut rng);
            assert!(frob(c.matrix()) >= best);
        }
        let again = project_to_physical(&p.as_operator());
        assert!(max_abs_diff(again.matrix(), p.matrix()) < 1e-12);
        assert!((p.as_operator().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_of_noisy_singlet_keeps_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut noise = CMatrix4::zeros();
        for z in noise.iter_mut() {
            *z = Complex64::new(rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3));
        }
        let mut h = TwoQubitState::singlet().matrix()
            + (noise + noise.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = h.trace();
        h[(0, 0)] -= tr - Complex64::new(1.0, 0.0);
        let p = project_to_physical(&HermitianOp4::new(h).unwrap());
        assert!(fidelity(&p, &TwoQubitState::singlet()) > 0.99);
    }
}
