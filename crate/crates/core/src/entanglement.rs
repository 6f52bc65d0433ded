//! Two-qubit entanglement measures and the entanglement-distance solver.

use std::cell::RefCell;

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fermi::{kernel, DetectorProfile};
use crate::roots::bisect;
use crate::spin::{
    decompose, hermitian_eigenvalues, psd_sqrt, tensor_basis, CMatrix4, HermitianOp4, TwoQubitState,
};

/// Eigenvalues of magnitude below this are dropped when summing negativity.
pub const EIGEN_DUST: f64 = 1e-12;
/// Resolution of the entanglement-distance bisection.
pub const DISTANCE_XTOL: f64 = 1e-9;
/// Lower end of the entanglement-distance bracket.
pub const DISTANCE_LO: f64 = 1e-3;
/// Upper end of the bracket for point-like detectors; Gaussian detectors of
/// width σ use `DISTANCE_HI · (1 + σ)`.
pub const DISTANCE_HI: f64 = 4.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub negativity: f64,
    pub concurrence: f64,
    pub ppt_entangled: bool,
    pub chsh_max: f64,
}

impl EntanglementReport {
    pub fn of(rho: &TwoQubitState) -> Self {
        let negativity = negativity(rho);
        Self {
            negativity,
            concurrence: concurrence(rho),
            ppt_entangled: negativity > 0.0,
            chsh_max: chsh_max(rho),
        }
    }
}

/// Transpose on the second tensor factor.
pub fn partial_transpose(rho: &TwoQubitState) -> HermitianOp4 {
    let m = rho.matrix();
    let mut out = CMatrix4::zeros();
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    out[(2 * i1 + j2, 2 * j1 + i2)] = m[(2 * i1 + i2, 2 * j1 + j2)];
                }
            }
        }
    }
    HermitianOp4::from_hermitian_part(out)
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose.
pub fn negativity(rho: &TwoQubitState) -> f64 {
    partial_transpose(rho)
        .eigenvalues()
        .iter()
        .filter(|v| **v < -EIGEN_DUST)
        // fold from +0.0: an empty f64 sum is −0.0
        .fold(0.0, |acc, v| acc - v)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` where `λ` are the
/// decreasing eigenvalues of `√(√ρ ρ̃ √ρ)` and `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence(rho: &TwoQubitState) -> f64 {
    let yy = *tensor_basis(2, 2).expect("valid indices").matrix();
    let m = rho.matrix();
    let flipped = yy * m.map(|z| z.conj()) * yy;
    let s = psd_sqrt(m);
    let inner = s * flipped * s;
    let inner = (inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lam: Vec<f64> = hermitian_eigenvalues(&inner)
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    (lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0)
}

/// Maximal CHSH value `2 √(u₁ + u₂)` over all analyzer settings, with
/// `u₁ ≥ u₂` the two largest eigenvalues of `TᵀT` for the correlation
/// block `T`.
pub fn chsh_max(rho: &TwoQubitState) -> f64 {
    let t = decompose(rho).correlations();
    let tm = Matrix3::from_fn(|i, j| t[i][j]);
    let mut u: Vec<f64> = SymmetricEigen::new(tm.transpose() * tm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    u.sort_by(|a, b| b.total_cmp(a));
    2.0 * (u[0] + u[1]).max(0.0).sqrt()
}

/// Smallest separation at which the pair state stops being entangled: the
/// root of `g(x)² = 1/2`, found by bisection.
pub fn entanglement_distance(profile: DetectorProfile) -> Result<f64> {
    profile.validate()?;
    let hi = DISTANCE_HI * (1.0 + profile.sigma());
    // keep the first kernel failure instead of reporting a bad bracket
    let failure = RefCell::new(None);
    let f = |x: f64| match kernel(x, profile) {
        Ok(g) => g * g - 0.5,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let root = bisect(f, DISTANCE_LO, hi, DISTANCE_XTOL);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => root,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermi::{pair_state, pair_state_from_kernel, werner_visibility, PairQuery};
    use crate::spin::testutil::*;
    use crate::spin::{max_abs_diff, CMatrix2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt_min_eig(rho: &TwoQubitState) -> f64 {
        partial_transpose(rho).min_eigenvalue()
    }

    #[test]
    fn partial_transpose_cases() {
        let mix = TwoQubitState::maximally_mixed();
        assert!(max_abs_diff(partial_transpose(&mix).matrix(), mix.matrix()) < 1e-15);
        assert!((pt_min_eig(&TwoQubitState::singlet()) + 0.5).abs() < 1e-12);
        let pt = partial_transpose(&TwoQubitState::singlet());
        assert!((pt.trace() - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b1 = random_bloch(&mut rng);
        let b2 = random_bloch(&mut rng);
        let prod = TwoQubitState::product(b1, b2).unwrap();
        // ρ₂ᵀ flips the sign of the y component
        let expect = TwoQubitState::product(b1, [b2[0], -b2[1], b2[2]]).unwrap();
        assert!(max_abs_diff(partial_transpose(&prod).matrix(), expect.matrix()) < 1e-14);
        assert!(pt_min_eig(&prod) >= -1e-14);
    }

    #[test]
    fn negativity_cases() {
        assert!((negativity(&TwoQubitState::singlet()) - 0.5).abs() < 1e-12);
        assert_eq!(negativity(&TwoQubitState::maximally_mixed()), 0.0);
        assert!(negativity(&TwoQubitState::maximally_mixed()).is_sign_positive());
        let boundary = pair_state_from_kernel(0.5f64.sqrt()).unwrap();
        assert!(negativity(&boundary) < 1e-9);
        for g in [0.75, 0.8, 0.9, 0.99] {
            let v = werner_visibility(g);
            let rho = pair_state_from_kernel(g).unwrap();
            assert!((negativity(&rho) - ((3.0 * v - 1.0) / 4.0).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn concurrence_cases() {
        assert!((concurrence(&TwoQubitState::singlet()) - 1.0).abs() < 1e-9);
        assert!(concurrence(&TwoQubitState::maximally_mixed()) < 1e-12);
        let g = 0.8f64.sqrt();
        let v = werner_visibility(g);
        let c = concurrence(&pair_state_from_kernel(g).unwrap());
        assert!((c - ((3.0 * v - 1.0) / 2.0).max(0.0)).abs() < 1e-9);
    }

    #[test]
    fn chsh_cases() {
        let s = chsh_max(&TwoQubitState::singlet());
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-10);
        assert!(chsh_max(&TwoQubitState::maximally_mixed()) < 1e-12);
        let g_star = (2.0 / (1.0 + 2f64.sqrt())).sqrt();
        assert!((g_star - 0.9102).abs() < 1e-4);
        let at = chsh_max(&pair_state_from_kernel(g_star).unwrap());
        assert!((at - 2.0).abs() < 1e-10);
    }

    #[test]
    fn point_like_distance_matches_scan() {
        let x = entanglement_distance(DetectorProfile::PointLike).unwrap();
        assert!((x - 1.815).abs() < 1e-3);
        let neg = |x: f64| {
            negativity(
                &pair_state(&PairQuery::new(x, DetectorProfile::PointLike).unwrap()).unwrap(),
            )
        };
        assert!(neg(x - 1e-3) > 0.0);
        assert_eq!(neg(x + 1e-3), 0.0);
    }

    #[test]
    fn gaussian_distance_grows_and_has_point_limit() {
        let p0 = entanglement_distance(DetectorProfile::PointLike).unwrap();
        let g = entanglement_distance(DetectorProfile::gaussian(0.5).unwrap()).unwrap();
        assert!(g > p0);
        let tiny = entanglement_distance(DetectorProfile::gaussian(1e-5).unwrap()).unwrap();
        assert!((tiny - p0).abs() < 1e-4);
        // wide detectors leave the default [1e-3, 4.5] bracket
        let wide = entanglement_distance(DetectorProfile::gaussian(4.0).unwrap()).unwrap();
        assert!(wide > DISTANCE_HI);
        // very wide: g = e^{−x²/4σ²}, so x* = σ √(2 ln 2)
        for sigma in [8.0, 25.0] {
            let xs = entanglement_distance(DetectorProfile::gaussian(sigma).unwrap()).unwrap();
            let want = sigma * (2.0 * std::f64::consts::LN_2).sqrt();
            assert!((xs - want).abs() < 1e-6, "σ={sigma}: {xs} vs {want}");
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let rho = random_state(&mut rng);
            let u1: CMatrix2 = random_unitary2(&mut rng);
            let u2: CMatrix2 = random_unitary2(&mut rng);
            let rot = rho.conjugate_by(&u1.kronecker(&u2));
            assert!((negativity(&rho) - negativity(&rot)).abs() < 1e-9);
            assert!((concurrence(&rho) - concurrence(&rot)).abs() < 1e-9);
            assert!((chsh_max(&rho) - chsh_max(&rot)).abs() < 1e-9);
        }
    }

    #[test]
    fn product_states_not_entangled() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let rho =
                TwoQubitState::product(random_bloch(&mut rng), random_bloch(&mut rng)).unwrap();
            assert_eq!(negativity(&rho), 0.0);
            assert!(concurrence(&rho) < 1e-7);
        }
    }
}
