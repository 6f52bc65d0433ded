//! One- and two-qubit operator algebra in the Pauli product basis.
//!
//! Qubit 1 is always the left tensor factor. Two-qubit basis states are
//! ordered `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`, i.e. index `2·s₁ + s₂` with `↑ = 0`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMatrix2 = Matrix2<Complex64>;
pub type CMatrix4 = Matrix4<Complex64>;

/// Elementwise tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default tolerance used when validating density operators.
pub const PHYSICAL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn hermitian_deviation<const N: usize>(m: &nalgebra::SMatrix<Complex64, N, N>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..N {
        for c in 0..N {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// A 2×2 Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOp2(CMatrix2);

impl HermitianOp2 {
    pub fn new(m: CMatrix2) -> Result<Self> {
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_TOL || !dev.is_finite() {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMatrix2 {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

/// A 4×4 Hermitian operator. Unit trace and positivity are not implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOp4(CMatrix4);

impl HermitianOp4 {
    pub fn new(m: CMatrix4) -> Result<Self> {
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_TOL || !dev.is_finite() {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    /// Symmetrizes `m` as `(m + m†)/2` before wrapping it.
    pub fn from_hermitian_part(m: CMatrix4) -> Self {
        Self((m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix4 {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// A two-qubit density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState(CMatrix4);

impl TwoQubitState {
    /// Validates `m` at the default tolerance of 1e-10.
    pub fn new(m: CMatrix4) -> Result<Self> {
        Self::with_tolerance(m, PHYSICAL_TOL)
    }

    pub fn with_tolerance(m: CMatrix4, tol: f64) -> Result<Self> {
        let op = HermitianOp4::new(m)?;
        let (ok, min_eig) = is_physical(&op, tol);
        if !ok {
            return Err(Error::InvalidState(format!(
                "trace {:.12}, min eigenvalue {:.3e}",
                op.trace(),
                min_eig
            )));
        }
        Ok(Self(op.0))
    }

    /// Wraps a matrix already known to be a density operator.
    pub(crate) fn from_matrix_unchecked(m: CMatrix4) -> Self {
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(CMatrix4::identity() * Complex64::new(0.25, 0.0))
    }

    /// `|ψ⁻⟩⟨ψ⁻|` with `|ψ⁻⟩ = (|↑↓⟩ − |↓↑⟩)/√2`.
    pub fn singlet() -> Self {
        let mut m = CMatrix4::zeros();
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        m[(2, 2)] = Complex64::new(0.5, 0.0);
        m[(1, 2)] = Complex64::new(-0.5, 0.0);
        m[(2, 1)] = Complex64::new(-0.5, 0.0);
        Self(m)
    }

    /// Projector onto a normalized copy of `psi`.
    pub fn pure(psi: [Complex64; 4]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero norm".into()));
        }
        let mut m = CMatrix4::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m[(r, c)] = psi[r] * psi[c].conj() / norm2;
            }
        }
        Ok(Self(m))
    }

    /// `ρ₁ ⊗ ρ₂` for two one-qubit Bloch vectors.
    pub fn product(bloch1: [f64; 3], bloch2: [f64; 3]) -> Result<Self> {
        let r1 = one_qubit_state(bloch1)?;
        let r2 = one_qubit_state(bloch2)?;
        Ok(Self(r1.kronecker(&r2)))
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.0
    }

    pub fn as_operator(&self) -> HermitianOp4 {
        HermitianOp4(self.0)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues(&self.0)
    }

    /// Conjugation by a unitary `U`: `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix4) -> Self {
        let m = u * self.0 * u.adjoint();
        Self(HermitianOp4::from_hermitian_part(m).0)
    }
}

fn one_qubit_state(b: [f64; 3]) -> Result<CMatrix2> {
    let n2 = b.iter().map(|v| v * v).sum::<f64>();
    if n2 > 1.0 + PHYSICAL_TOL || !n2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Bloch vector norm {:.6} exceeds 1",
            n2.sqrt()
        )));
    }
    let mut m = PAULI[0];
    for (j, bj) in b.iter().enumerate() {
        m += PAULI[j + 1] * Complex64::new(*bj, 0.0);
    }
    Ok(m * Complex64::new(0.5, 0.0))
}

const PAULI: [CMatrix2; 4] = [
    CMatrix2::new(ONE, ZERO, ZERO, ONE),
    CMatrix2::new(ZERO, ONE, ONE, ZERO),
    CMatrix2::new(ZERO, Complex64::new(0.0, -1.0), I, ZERO),
    CMatrix2::new(ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)),
];

/// σ₀ = identity, σ₁..σ₃ = Pauli x, y, z.
pub fn pauli(mu: usize) -> Result<HermitianOp2> {
    PAULI
        .get(mu)
        .copied()
        .map(HermitianOp2)
        .ok_or(Error::IndexOutOfRange(mu))
}

/// `S_{μν} = σ_μ ⊗ σ_ν`.
pub fn tensor_basis(mu: usize, nu: usize) -> Result<HermitianOp4> {
    let a = pauli(mu)?;
    let b = pauli(nu)?;
    Ok(HermitianOp4(a.0.kronecker(&b.0)))
}

fn basis_unchecked(mu: usize, nu: usize) -> CMatrix4 {
    PAULI[mu].kronecker(&PAULI[nu])
}

/// Real coefficients `a[μ][ν]` of a two-qubit operator in the `S_{μν}` basis.
///
/// `a[i][0]` is the Bloch vector of qubit 1, `a[0][j]` that of qubit 2, and
/// the block `a[i][j]` (i, j ≥ 1) is the spin correlation tensor. Coefficients
/// estimated from noisy data may leave the unit interval; those of any
/// physical state satisfy `|a[μ][ν]| ≤ 1` (see [`PauliCoefficients::is_bounded`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub a: [[f64; 4]; 4],
}

impl PauliCoefficients {
    pub fn new(a: [[f64; 4]; 4]) -> Result<Self> {
        if a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        if (a[0][0] - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::BadNormalization(a[0][0]));
        }
        Ok(Self { a })
    }

    /// Coefficients of `I/4`.
    pub fn identity() -> Self {
        let mut a = [[0.0; 4]; 4];
        a[0][0] = 1.0;
        Self { a }
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.a[mu][nu]
    }

    pub fn bloch1(&self) -> [f64; 3] {
        [self.a[1][0], self.a[2][0], self.a[3][0]]
    }

    pub fn bloch2(&self) -> [f64; 3] {
        [self.a[0][1], self.a[0][2], self.a[0][3]]
    }

    /// The 3×3 correlation block `T[i][j] = a[i+1][j+1]`.
    pub fn correlations(&self) -> [[f64; 3]; 3] {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.a[i + 1][j + 1];
            }
        }
        t
    }

    pub fn is_bounded(&self) -> bool {
        self.a
            .iter()
            .flatten()
            .all(|v| v.abs() <= 1.0 + PHYSICAL_TOL)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.a
            .iter()
            .flatten()
            .zip(other.a.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// `a[μ][ν] = Tr(S_{μν} ρ)`.
pub fn decompose(rho: &TwoQubitState) -> PauliCoefficients {
    decompose_operator(&rho.as_operator())
}

/// Pauli coefficients of any Hermitian operator, normalized by nothing:
/// `a[0][0]` equals the trace.
pub fn decompose_operator(m: &HermitianOp4) -> PauliCoefficients {
    let mut a = [[0.0; 4]; 4];
    for (mu, row) in a.iter_mut().enumerate() {
        for (nu, v) in row.iter_mut().enumerate() {
            // Tr(S ρ) is real for Hermitian S and ρ
            *v = (basis_unchecked(mu, nu) * m.0).trace().re;
        }
    }
    PauliCoefficients { a }
}

/// `(1/4) Σ a[μ][ν] S_{μν}`. Positivity is not guaranteed.
pub fn compose(coeffs: &PauliCoefficients) -> Result<HermitianOp4> {
    let a = &coeffs.a;
    if (a[0][0] - 1.0).abs() > HERMITIAN_TOL {
        return Err(Error::BadNormalization(a[0][0]));
    }
    let mut m = CMatrix4::zeros();
    for (mu, row) in a.iter().enumerate() {
        for (nu, v) in row.iter().enumerate() {
            if *v != 0.0 {
                m += basis_unchecked(mu, nu) * Complex64::new(*v, 0.0);
            }
        }
    }
    Ok(HermitianOp4(m * Complex64::new(0.25, 0.0)))
}

/// Checks unit trace and positivity at `tol`; returns the verdict and the
/// minimum eigenvalue.
pub fn is_physical(m: &HermitianOp4, tol: f64) -> (bool, f64) {
    let min_eig = m.min_eigenvalue();
    let ok = (m.trace() - 1.0).abs() <= tol && min_eig >= -tol;
    (ok, min_eig)
}

/// Like [`is_physical`] for an arbitrary matrix; rejects non-Hermitian input.
pub fn check_physical(m: &CMatrix4, tol: f64) -> Result<(bool, f64)> {
    let op = HermitianOp4::new(*m)?;
    Ok(is_physical(&op, tol))
}

/// Ascending eigenvalues of a Hermitian 4×4 matrix.
pub fn hermitian_eigenvalues(m: &CMatrix4) -> [f64; 4] {
    let mut ev: Vec<f64> = SymmetricEigen::new(*m)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2], ev[3]]
}

/// Spectral decomposition `(eigenvalues, eigenvectors as columns)`, unsorted.
pub fn hermitian_eigen(m: &CMatrix4) -> ([f64; 4], CMatrix4) {
    let eig = SymmetricEigen::new(*m);
    let vals = eig.eigenvalues;
    ([vals[0], vals[1], vals[2], vals[3]], eig.eigenvectors)
}

/// Rebuilds `V diag(f(λ)) V†` from a spectral decomposition.
pub fn spectral_map(m: &CMatrix4, f: impl Fn(f64) -> f64) -> CMatrix4 {
    let (vals, vecs) = hermitian_eigen(m);
    let mut d = CMatrix4::zeros();
    for k in 0..4 {
        d[(k, k)] = Complex64::new(f(vals[k]), 0.0);
    }
    vecs * d * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; tiny negative eigenvalues
/// are clipped to zero.
pub fn psd_sqrt(m: &CMatrix4) -> CMatrix4 {
    spectral_map(m, |v| v.max(0.0).sqrt())
}

/// The qubit-exchange operator.
pub fn swap() -> CMatrix4 {
    let mut m = CMatrix4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &TwoQubitState, sigma: &TwoQubitState) -> f64 {
    let s = psd_sqrt(&rho.0);
    let inner = HermitianOp4::from_hermitian_part(s * sigma.0 * s);
    let root: f64 = inner.eigenvalues().iter().map(|v| v.max(0.0).sqrt()).sum();
    (root * root).min(1.0)
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &CMatrix4, sigma: &CMatrix4) -> f64 {
    let d = HermitianOp4::from_hermitian_part(rho - sigma);
    0.5 * d.eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
}

/// Largest elementwise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix4, b: &CMatrix4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row-major `[[re, im]; 4]` rows, the JSON layout for matrices.
pub fn matrix_to_rows(m: &CMatrix4) -> Vec<Vec<[f64; 2]>> {
    (0..4)
        .map(|r| (0..4).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix4> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(Error::Format(
            "matrix must be 4 rows of 4 [re, im] pairs".into(),
        ));
    }
    let mut m = CMatrix4::zeros();
    for (r, row) in rows.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            m[(r, c)] = Complex64::new(z[0], z[1]);
        }
    }
    Ok(m)
}

impl Serialize for HermitianOp4 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOp4 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = matrix_from_rows(&rows).map_err(serde::de::Error::custom)?;
        HermitianOp4::new(m).map_err(serde::de::Error::custom)
    }
}

impl Serialize for TwoQubitState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoQubitState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = matrix_from_rows(&rows).map_err(serde::de::Error::custom)?;
        TwoQubitState::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn random_state<R: Rng>(rng: &mut R) -> TwoQubitState {
        let mut a = CMatrix4::zeros();
        for z in a.iter_mut() {
            *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let m = a * a.adjoint();
        let tr = m.trace();
        let m = HermitianOp4::from_hermitian_part(m / tr).into_matrix();
        TwoQubitState::new(m).unwrap()
    }

    /// Haar-ish random SU(2) from a normalized quaternion.
    pub fn random_unitary2<R: Rng>(rng: &mut R) -> CMatrix2 {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [a, b, c, d] = q.map(|v| v / n);
        CMatrix2::new(
            Complex64::new(a, b),
            Complex64::new(c, d),
            Complex64::new(-c, d),
            Complex64::new(a, -b),
        )
    }

    pub fn random_bloch<R: Rng>(rng: &mut R) -> [f64; 3] {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let len: f64 = rng.random::<f64>();
        v.map(|x| x / n * len)
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_definitions() {
        assert_eq!(*pauli(0).unwrap().matrix(), CMatrix2::identity());
        let z = pauli(3).unwrap();
        assert_eq!(z.matrix()[(0, 0)], ONE);
        assert_eq!(z.matrix()[(1, 1)], -ONE);
        assert_eq!(z.matrix()[(0, 1)], ZERO);
        for j in 1..4 {
            assert_eq!(pauli(j).unwrap().trace(), ZERO);
        }
        assert!(matches!(pauli(4), Err(Error::IndexOutOfRange(4))));
    }

    #[test]
    fn tensor_basis_identity_and_zz() {
        assert_eq!(*tensor_basis(0, 0).unwrap().matrix(), CMatrix4::identity());
        let zz = tensor_basis(3, 3).unwrap();
        let expect = [1.0, -1.0, -1.0, 1.0];
        for r in 0..4 {
            for c in 0..4 {
                let v = if r == c { expect[r] } else { 0.0 };
                assert_eq!(zz.matrix()[(r, c)], Complex64::new(v, 0.0));
            }
        }
        assert!(tensor_basis(0, 7).is_err());
    }

    #[test]
    fn tensor_basis_orthogonality_all_256_pairs() {
        for m in 0..4 {
            for n in 0..4 {
                let s = tensor_basis(m, n).unwrap();
                assert!(hermitian_deviation(s.matrix()) == 0.0);
                let tr = s.trace();
                let want = if m == 0 && n == 0 { 4.0 } else { 0.0 };
                assert_eq!(tr, want);
                for m2 in 0..4 {
                    for n2 in 0..4 {
                        let t = tensor_basis(m2, n2).unwrap();
                        let ip = (s.matrix() * t.matrix()).trace();
                        let want = if (m, n) == (m2, n2) { 4.0 } else { 0.0 };
                        assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_mixed_and_singlet() {
        let a = decompose(&TwoQubitState::maximally_mixed());
        assert!(a.max_abs_diff(&PauliCoefficients::identity()) < 1e-15);

        let s = decompose(&TwoQubitState::singlet());
        for mu in 0..4 {
            for nu in 0..4 {
                let want = match (mu, nu) {
                    (0, 0) => 1.0,
                    (1, 1) | (2, 2) | (3, 3) => -1.0,
                    _ => 0.0,
                };
                assert!((s.a[mu][nu] - want).abs() < 1e-14, "({mu},{nu})");
            }
        }
    }

    #[test]
    fn compose_zz_anticorrelated() {
        let mut a = PauliCoefficients::identity();
        a.a[3][3] = -1.0;
        let m = compose(&a).unwrap();
        let ev = m.eigenvalues();
        let want = [0.0, 0.0, 0.5, 0.5];
        for (e, w) in ev.iter().zip(want) {
            assert!((e - w).abs() < 1e-12);
        }
        assert!(compose(&PauliCoefficients { a: [[0.5; 4]; 4] }).is_err());
        let mixed = compose(&PauliCoefficients::identity()).unwrap();
        assert!(max_abs_diff(mixed.matrix(), TwoQubitState::maximally_mixed().matrix()) < 1e-15);
    }

    #[test]
    fn compose_decompose_round_trip_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let rho = random_state(&mut rng);
            let a = decompose(&rho);
            assert!(a.is_bounded());
            let back = compose(&a).unwrap();
            assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn physicality_checks() {
        let (ok, min) = is_physical(&TwoQubitState::maximally_mixed().as_operator(), 1e-10);
        assert!(ok);
        assert!((min - 0.25).abs() < 1e-14);

        let mut a = PauliCoefficients::identity();
        a.a[3][0] = 1.5;
        let (ok, min) = is_physical(&compose(&a).unwrap(), 1e-10);
        assert!(!ok);
        assert!(min < 0.0);

        let (ok, min) = is_physical(&TwoQubitState::singlet().as_operator(), 1e-10);
        assert!(ok);
        assert!(min.abs() < 1e-14);

        let mut bad = CMatrix4::identity();
        bad[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(
            check_physical(&bad, 1e-10),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn product_state_margins_are_bloch_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let b1 = random_bloch(&mut rng);
            let b2 = random_bloch(&mut rng);
            let a = decompose(&TwoQubitState::product(b1, b2).unwrap());
            for j in 0..3 {
                assert!((a.bloch1()[j] - b1[j]).abs() < 1e-12);
                assert!((a.bloch2()[j] - b2[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fidelity_and_trace_distance() {
        let s = TwoQubitState::singlet();
        let mix = TwoQubitState::maximally_mixed();
        assert!((fidelity(&s, &s) - 1.0).abs() < 1e-9);
        assert!((fidelity(&s, &mix) - 0.25).abs() < 1e-9);
        assert!((trace_distance(s.matrix(), mix.matrix()) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn state_json_round_trip() {
        let s = TwoQubitState::singlet();
        let txt = serde_json::to_string(&s).unwrap();
        assert!(txt.starts_with("[[[0.0,0.0]"));
        let back: TwoQubitState = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<TwoQubitState>("[[[1.0,0.0]]]").is_err());
    }
}
