//! Conditional spin state of a fermion pair detected in a filled Fermi sea.
//!
//! Lengths are dimensionless, in units of `1/k_f`; momenta in units of `k_f`.
//! A detector with amplitude profile `D` weighs momentum `p` by `|D̃(p)|²`,
//! which for a Gaussian of width `σ` is `exp(−σ²p²)`. The equal-spin
//! one-body amplitude between two detectors a distance `x` apart is
//!
//! ```text
//! G(x) = ∫₀¹ p² e^{−σ²p²} sinc(p x) dp,      g(x) = G(x) / G(0)
//! ```
//!
//! and the normalized pair state is `(I − g² SWAP) / (4 − 2g²)`.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveQuad;
use crate::spin::{swap, CMatrix4, TwoQubitState};

/// Separations below this are treated as coincident detectors.
pub const SAME_POINT_CUTOFF: f64 = 1e-8;
/// Relative accuracy of the radial quadrature.
pub const KERNEL_REL_TOL: f64 = 1e-10;
/// Largest mode count the Fock-space oracle accepts.
pub const MAX_ORACLE_MODES: usize = 8;

/// Position-detector smearing profile, shared by both detectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorProfile {
    #[default]
    PointLike,
    Gaussian {
        sigma: f64,
    },
}

impl DetectorProfile {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let p = DetectorProfile::Gaussian { sigma };
        p.validate()?;
        Ok(p)
    }

    /// `σ = 0` maps to [`DetectorProfile::PointLike`].
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if sigma == 0.0 {
            Ok(DetectorProfile::PointLike)
        } else {
            Self::gaussian(sigma)
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            DetectorProfile::PointLike => 0.0,
            DetectorProfile::Gaussian { sigma } => sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.sigma();
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "detector width must be finite and non-negative, got {s}"
            )));
        }
        Ok(())
    }

    /// Momentum-space intensity weight `|D̃(p)|²` for `|p| = p`.
    pub fn intensity_weight(&self, p: f64) -> f64 {
        let s = self.sigma();
        (-s * s * p * p).exp()
    }

    /// Momentum-space amplitude `D̃(p)` (real and positive for a centred Gaussian).
    pub fn amplitude_weight(&self, p: f64) -> f64 {
        let s = self.sigma();
        (-0.5 * s * s * p * p).exp()
    }
}

/// A detector pair at dimensionless separation `x = k_f |r − r'|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairQuery {
    pub x: f64,
    pub profile: DetectorProfile,
}

impl PairQuery {
    pub fn new(x: f64, profile: DetectorProfile) -> Result<Self> {
        let q = Self { x, profile };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_separation(self.x)?;
        self.profile.validate()
    }
}

fn check_separation(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "separation must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

/// `3 (sin x − x cos x) / x³`, with a Taylor series near the origin where
/// the closed form cancels catastrophically.
pub fn point_kernel(x: f64) -> f64 {
    if x < SAME_POINT_CUTOFF {
        return 1.0;
    }
    if x < 0.5 {
        // 3 Σ_{k≥1} (−1)^{k+1} 2k x^{2k−2} / (2k+1)!
        let x2 = x * x;
        let mut term_pow = 1.0;
        let mut fact = 6.0; // (2k+1)! at k = 1
        let mut sum = 0.0;
        for k in 1..=10u32 {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * 2.0 * kf * term_pow / fact;
            term_pow *= x2;
            fact *= (2.0 * kf + 2.0) * (2.0 * kf + 3.0);
        }
        return 3.0 * sum;
    }
    3.0 * (x.sin() - x * x.cos()) / (x * x * x)
}

fn radial_quad() -> &'static AdaptiveQuad {
    static QUAD: OnceLock<AdaptiveQuad> = OnceLock::new();
    QUAD.get_or_init(|| AdaptiveQuad::new(10, 1.0))
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// Normalized equal-spin amplitude `g(x) ∈ [−1, 1]` for the given profile.
pub fn kernel(x: f64, profile: DetectorProfile) -> Result<f64> {
    check_separation(x)?;
    profile.validate()?;
    let sigma = profile.sigma();
    if sigma == 0.0 {
        return Ok(point_kernel(x));
    }
    if x < SAME_POINT_CUTOFF {
        return Ok(1.0);
    }
    let s2 = sigma * sigma;
    let base = radial_quad();
    // on p ≤ m = min(1, 1/σ) the exponent is ≥ −1, so the normalizer is at
    // least m³/(3e); that lower bound sets its absolute tolerance
    let m = sigma.recip().min(1.0);
    let norm_floor = m * m * m / (3.0 * std::f64::consts::E);
    let norm_quad = base.with_tolerance(KERNEL_REL_TOL * norm_floor);
    let norm = norm_quad.integrate(|p| p * p * (-s2 * p * p).exp(), 0.0, 1.0)?;
    let quad = base.with_tolerance(KERNEL_REL_TOL * norm);
    let val = quad.integrate(|p| p * p * (-s2 * p * p).exp() * sinc(p * x), 0.0, 1.0)?;
    Ok((val / norm).clamp(-1.0, 1.0))
}

/// The pair state for a known kernel value `g`: `(I − g² SWAP)/(4 − 2g²)`.
///
/// This is the Werner state with singlet visibility `v = g²/(2 − g²)`.
pub fn pair_state_from_kernel(g: f64) -> Result<TwoQubitState> {
    if !g.is_finite() || g.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "kernel value {g} outside [-1, 1]"
        )));
    }
    let g2 = (g * g).min(1.0);
    let m = (CMatrix4::identity() - swap() * Complex64::new(g2, 0.0))
        / Complex64::new(4.0 - 2.0 * g2, 0.0);
    Ok(TwoQubitState::from_matrix_unchecked(m))
}

/// Singlet visibility `v = g²/(2 − g²)` of the Werner form.
pub fn werner_visibility(g: f64) -> f64 {
    let g2 = g * g;
    g2 / (2.0 - g2)
}

/// Normalized conditional two-spin state of a pair detected at separation `q.x`.
pub fn pair_state(q: &PairQuery) -> Result<TwoQubitState> {
    q.validate()?;
    if q.x < SAME_POINT_CUTOFF {
        return Ok(TwoQubitState::singlet());
    }
    pair_state_from_kernel(kernel(q.x, q.profile)?)
}

/// A Fermi sea truncated to a handful of momentum modes, each doubly occupied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteModeGas {
    momenta: Vec<[f64; 3]>,
}

impl FiniteModeGas {
    pub fn new(momenta: Vec<[f64; 3]>) -> Result<Self> {
        if momenta.is_empty() {
            return Err(Error::InvalidArgument("momentum grid is empty".into()));
        }
        if momenta.len() > MAX_ORACLE_MODES {
            return Err(Error::InvalidArgument(format!(
                "{} modes exceed the oracle limit of {MAX_ORACLE_MODES}",
                momenta.len()
            )));
        }
        for k in &momenta {
            let n = norm3(k);
            if !n.is_finite() || n > 1.0 + 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "momentum {k:?} lies outside the Fermi sphere"
                )));
            }
        }
        Ok(Self { momenta })
    }

    pub fn momenta(&self) -> &[[f64; 3]] {
        &self.momenta
    }

    pub fn mode_count(&self) -> usize {
        self.momenta.len()
    }

    /// Complex normalized amplitude `Σ w² e^{i k_z x} / Σ w²` for detectors
    /// separated by `x` along z, with `w` the profile's amplitude weight.
    pub fn discrete_kernel(&self, x: f64, profile: DetectorProfile) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for k in &self.momenta {
            let w2 = profile.intensity_weight(norm3(k));
            num += Complex64::from_polar(w2, k[2] * x);
            den += w2;
        }
        num / den
    }

    /// Wick-factorized pair state on this grid: the continuum formula with
    /// `g` replaced by `|discrete_kernel|`.
    pub fn pair_state_discrete(&self, q: &PairQuery) -> Result<TwoQubitState> {
        q.validate()?;
        pair_state_from_kernel(self.discrete_kernel(q.x, q.profile).norm())
    }
}

fn norm3(k: &[f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Brute-force pair state: evaluates the four-field expectation value in the
/// full `4^M`-dimensional occupation-number space with explicit
/// anticommuting mode operators, then normalizes.
///
/// Detector 1 sits at the origin and detector 2 at `(0, 0, q.x)`.
pub fn wick_oracle(gas: &FiniteModeGas, q: &PairQuery) -> Result<TwoQubitState> {
    q.validate()?;
    let fock = fock::FockSpace::new(gas.mode_count())?;
    let field = |pos_z: f64, spin: usize| -> Vec<(usize, Complex64)> {
        gas.momenta
            .iter()
            .enumerate()
            .map(|(m, k)| {
                let w = q.profile.amplitude_weight(norm3(k));
                (
                    fock::mode_index(m, spin),
                    Complex64::from_polar(w, k[2] * pos_z),
                )
            })
            .collect()
    };
    let (r1, r2) = (0.0, q.x);
    let vacuum_filled = fock.filled();

    let mut rho = CMatrix4::zeros();
    for s in 0..2 {
        for s2 in 0..2 {
            // Ψ_{s'}(r') Ψ_s(r) |Φ₀⟩
            let ket = fock.annihilate_field(&field(r1, s), &vacuum_filled);
            let ket = fock.annihilate_field(&field(r2, s2), &ket);
            for t in 0..2 {
                for t2 in 0..2 {
                    // Ψ†_{t'}(r') Ψ†_t(r) applied to the ket, projected on ⟨Φ₀|
                    let v = fock.create_field(&field(r1, t), &ket);
                    let v = fock.create_field(&field(r2, t2), &v);
                    rho[(2 * s + s2, 2 * t + t2)] = fock.overlap(&vacuum_filled, &v);
                }
            }
        }
    }
    let tr = rho.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::InvalidState("vanishing pair amplitude".into()));
    }
    TwoQubitState::with_tolerance(rho / tr, 1e-10)
}

/// Occupation-number space for `2M` fermionic modes (M orbitals × 2 spins).
pub mod fock {
    use num_complex::Complex64;

    use super::MAX_ORACLE_MODES;
    use crate::error::{Error, Result};

    pub fn mode_index(orbital: usize, spin: usize) -> usize {
        2 * orbital + spin
    }

    pub struct FockSpace {
        modes: usize,
    }

    /// Dense amplitude vector over occupation bit strings.
    pub type FockVector = Vec<Complex64>;

    impl FockSpace {
        pub fn new(orbitals: usize) -> Result<Self> {
            if orbitals == 0 || orbitals > MAX_ORACLE_MODES {
                return Err(Error::InvalidArgument(format!(
                    "orbital count {orbitals} outside 1..={MAX_ORACLE_MODES}"
                )));
            }
            Ok(Self {
                modes: 2 * orbitals,
            })
        }

        pub fn dim(&self) -> usize {
            1 << self.modes
        }

        /// Every mode occupied.
        pub fn filled(&self) -> FockVector {
            let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
            v[self.dim() - 1] = Complex64::new(1.0, 0.0);
            v
        }

        /// Jordan–Wigner sign: parity of occupied modes below `mode`.
        fn sign(occ: usize, mode: usize) -> f64 {
            if (occ & ((1 << mode) - 1)).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        }

        /// `Σ_j c_j b_j |v⟩`.
        pub fn annihilate_field(&self, terms: &[(usize, Complex64)], v: &FockVector) -> FockVector {
            let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
            for (occ, amp) in v.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                for &(mode, c) in terms {
                    let bit = 1 << mode;
                    if occ & bit != 0 {
                        out[occ ^ bit] += c * *amp * Self::sign(occ, mode);
                    }
                }
            }
            out
        }

        /// `(Σ_j c_j b_j)† |v⟩ = Σ_j c_j* b†_j |v⟩`.
        pub fn create_field(&self, terms: &[(usize, Complex64)], v: &FockVector) -> FockVector {
            let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
            for (occ, amp) in v.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                for &(mode, c) in terms {
                    let bit = 1 << mode;
                    if occ & bit == 0 {
                        out[occ | bit] += c.conj() * *amp * Self::sign(occ, mode);
                    }
                }
            }
            out
        }

        pub fn overlap(&self, bra: &FockVector, ket: &FockVector) -> Complex64 {
            bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
        }
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn canonical_anticommutation() {
            // {b_i, b†_j} = δ_ij on random vectors of a 2-orbital space
            let fs = FockSpace::new(2).unwrap();
            let v: FockVector = (0..fs.dim())
                .map(|k| Complex64::new(k as f64 * 0.1 + 0.3, (k as f64).sin()))
                .collect();
            let one = Complex64::new(1.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    let bi = [(i, one)];
                    let bj = [(j, one)];
                    let a = fs.annihilate_field(&bi, &fs.create_field(&bj, &v));
                    let b = fs.create_field(&bj, &fs.annihilate_field(&bi, &v));
                    for k in 0..fs.dim() {
                        let want = if i == j {
                            v[k]
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        assert!((a[k] + b[k] - want).norm() < 1e-14);
                    }
                }
            }
        }

        #[test]
        fn rejects_oversized_space() {
            assert!(FockSpace::new(9).is_err());
            assert!(FockSpace::new(0).is_err());
        }
    }
}
