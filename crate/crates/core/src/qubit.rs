//! Qubit algebra: Bloch vectors, Pauli decompositions and dense Hermitian
//! operators.
//!
//! Two representations coexist on purpose. [`PauliDecomp`] carries the
//! closed forms (`tr[AB] = 2(a0 b0 + a·b)`, eigenvalues `c0 ± |c|`), while
//! [`HermitianOp`] holds the dense complex matrix and serves as the
//! brute-force oracle for them. The 4×4 case is used by the dilation module.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::tolerance::{EPS_NUM, EPS_POS};
use crate::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix `σ_k` for `k = 0..=3` (`σ_0` is the identity).
pub fn pauli(k: usize) -> Matrix2<C64> {
    match k {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Real 3-vector `s` of a qubit state `ρ = (σ0 + s·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Unchecked constructor. Use [`BlochVector::state`] for user input.
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Checked constructor: rejects non-finite components and `|s| > 1 + ε_pos`.
    pub fn state(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(x, y, z).validated()
    }

    pub fn validated(self) -> Result<Self> {
        let norm = self.norm();
        if !norm.is_finite() || norm > 1.0 + EPS_POS {
            return Err(Error::InvalidState { norm });
        }
        Ok(self)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.z - other.z];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn to_pauli(self) -> PauliDecomp {
        PauliDecomp::new(0.5, [self.x / 2.0, self.y / 2.0, self.z / 2.0])
    }

    pub fn to_matrix(self) -> HermitianOp {
        HermitianOp::from_pauli(&self.to_pauli())
    }

    /// Reads the Bloch vector `s_k = tr[ρ σ_k]` off a 2×2 density matrix.
    pub fn from_matrix(rho: &Matrix2<C64>) -> Self {
        let comp = |k| (rho * pauli(k)).trace().re;
        Self::new(comp(1), comp(2), comp(3))
    }
}

/// Operator `c0 σ0 + c·σ` on a qubit, with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliDecomp {
    pub c0: f64,
    pub c: [f64; 3],
}

impl PauliDecomp {
    pub const fn new(c0: f64, c: [f64; 3]) -> Self {
        Self { c0, c }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, [0.0; 3])
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.c0 * k, self.c.map(|v| v * k))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.c0 + other.c0,
            [
                self.c[0] + other.c[0],
                self.c[1] + other.c[1],
                self.c[2] + other.c[2],
            ],
        )
    }

    pub fn vector_norm(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.c0
    }

    /// Closed-form eigenvalues `(c0 - |c|, c0 + |c|)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = self.vector_norm();
        (self.c0 - r, self.c0 + r)
    }

    pub fn psd(&self, tol: f64) -> PsdVerdict {
        let min = self.eigenvalues().0;
        PsdVerdict {
            psd: min >= -tol,
            min_eigenvalue: min,
        }
    }

    pub fn to_matrix2(&self) -> Matrix2<C64> {
        let mut m = pauli(0) * C64::from(self.c0);
        for k in 0..3 {
            m += pauli(k + 1) * C64::from(self.c[k]);
        }
        m
    }

    /// Decomposes a 2×2 Hermitian matrix; fails on non-Hermitian input.
    pub fn from_matrix2(m: &Matrix2<C64>) -> Result<Self> {
        let defect = hermiticity_defect(&to_dynamic(m));
        if defect > EPS_NUM {
            return Err(Error::NotHermitian { defect });
        }
        let comp = |k| (m * pauli(k)).trace().re / 2.0;
        Ok(Self::new(comp(0), [comp(1), comp(2), comp(3)]))
    }
}

/// `tr[AB] = 2(a0 b0 + a·b)`.
pub fn trace_pair(a: &PauliDecomp, b: &PauliDecomp) -> f64 {
    2.0 * (a.c0 * b.c0 + a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2])
}

/// Outcome of a positivity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// Dense Hermitian operator of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    m: DMatrix<C64>,
}

impl HermitianOp {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        check_shape(&m)?;
        let defect = hermiticity_defect(&m);
        if defect > EPS_NUM {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { m })
    }

    pub fn from_pauli(p: &PauliDecomp) -> Self {
        Self {
            m: to_dynamic(&p.to_matrix2()),
        }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `tr[AB]` by dense multiplication.
    pub fn trace_product(&self, other: &HermitianOp) -> f64 {
        (&self.m * &other.m).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_hermitian(&self.m)
    }

    pub fn psd(&self, tol: f64) -> PsdVerdict {
        let min = self.eigenvalues()[0];
        PsdVerdict {
            psd: min >= -tol,
            min_eigenvalue: min,
        }
    }
}

/// Positivity oracle on a raw dense matrix. Non-Hermitian input is rejected.
pub fn psd_check(m: &DMatrix<C64>, tol: f64) -> Result<PsdVerdict> {
    Ok(HermitianOp::new(m.clone())?.psd(tol))
}

fn check_shape(m: &DMatrix<C64>) -> Result<()> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::Dimension(r.max(c)));
    }
    if r != 2 && r != 4 {
        return Err(Error::Dimension(r));
    }
    Ok(())
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Ascending eigenvalues of a Hermitian matrix. The 2×2 case is closed form.
pub(crate) fn eigenvalues_hermitian(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let mean = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        return vec![mean - r, mean + r];
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub(crate) fn to_dynamic(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

/// Sampling law for [`random_state`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Uniform in the unit ball (mixed states included).
    BallUniform,
    /// Uniform on the unit sphere (pure states).
    SphereUniform,
}

/// Draws a Bloch vector. Both modes reject from the cube `[-1, 1]³`; the
/// sphere mode then projects radially, which is uniform by symmetry.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, mode: SamplingMode) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        match mode {
            SamplingMode::BallUniform if n <= 1.0 => return v,
            SamplingMode::SphereUniform if n <= 1.0 && n > 1e-3 => {
                return BlochVector::new(v.x / n, v.y / n, v.z / n)
            }
            _ => continue,
        }
    }
}

/// The generator behind every seeded computation in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bloch_matrix_examples() {
        let m = BlochVector::ORIGIN.to_matrix();
        assert!(close(m.matrix()[(0, 0)].re, 0.5, 1e-15));
        assert!(close(m.matrix()[(1, 1)].re, 0.5, 1e-15));
        assert!(m.matrix()[(0, 1)].norm() < 1e-15);

        let m = BlochVector::new(0.0, 0.0, 1.0).to_matrix();
        assert_eq!(m.matrix()[(0, 0)], ONE);
        assert_eq!(m.matrix()[(1, 1)], ZERO);

        let m = BlochVector::new(1.0, 0.0, 0.0).to_matrix();
        for v in m.matrix().iter() {
            assert!((v - C64::from(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn trace_pair_identity() {
        let id = PauliDecomp::identity();
        assert_eq!(trace_pair(&id, &id), 2.0);
    }

    #[test]
    fn psd_examples() {
        let v = psd_check(&BlochVector::new(0.0, 0.0, 1.0).to_matrix().into_matrix(), EPS_POS).unwrap();
        assert!(v.psd);
        assert!(v.min_eigenvalue.abs() < 1e-15);

        let a = PauliDecomp::new(0.5, [0.625, 0.0, 0.0]);
        let closed = a.psd(EPS_POS);
        let dense = HermitianOp::from_pauli(&a).psd(EPS_POS);
        assert!(!closed.psd && !dense.psd);
        assert!(close(closed.min_eigenvalue, -0.125, 1e-15));
        assert!(close(dense.min_eigenvalue, -0.125, 1e-15));
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(psd_check(&m, EPS_POS), Err(Error::NotHermitian { .. })));
        let m3 = DMatrix::<C64>::identity(3, 3);
        assert!(matches!(psd_check(&m3, EPS_POS), Err(Error::Dimension(3))));
    }

    #[test]
    fn four_by_four_eigenvalues() {
        // diag(3, -1, 2, 0) conjugated by nothing
        let mut m = DMatrix::<C64>::zeros(4, 4);
        for (i, v) in [3.0, -1.0, 2.0, 0.0].iter().enumerate() {
            m[(i, i)] = C64::from(*v);
        }
        let ev = HermitianOp::new(m).unwrap().eigenvalues();
        assert_eq!(ev.len(), 4);
        for (a, b) in ev.iter().zip([-1.0, 0.0, 2.0, 3.0]) {
            assert!(close(*a, b, 1e-12));
        }
    }

    #[test]
    fn random_state_determinism_and_bounds() {
        let draw = |seed| {
            let mut rng = seeded_rng(seed);
            (0..64)
                .map(|_| random_state(&mut rng, SamplingMode::BallUniform))
                .collect::<Vec<_>>()
        };
        let a = draw(42);
        assert_eq!(a, draw(42));
        assert!(a.iter().all(|s| s.norm() <= 1.0));

        let mut rng = seeded_rng(3);
        for _ in 0..1000 {
            let s = random_state(&mut rng, SamplingMode::SphereUniform);
            assert!(close(s.norm(), 1.0, 1e-15));
        }
    }

    #[test]
    fn sphere_mean_is_centered() {
        let n = 100_000;
        let mut rng = seeded_rng(11);
        let mut sum = [0.0; 3];
        for _ in 0..n {
            let s = random_state(&mut rng, SamplingMode::SphereUniform).to_array();
            for k in 0..3 {
                sum[k] += s[k];
            }
        }
        let bound = 5.0 / (n as f64).sqrt();
        for v in sum {
            assert!((v / n as f64).abs() < bound);
        }
    }

    #[test]
    fn trace_pair_matches_dense_on_random_pairs() {
        let mut rng = seeded_rng(5);
        let mut coef = || rng.random_range(-2.0..2.0);
        for _ in 0..10_000 {
            let a = PauliDecomp::new(coef(), [coef(), coef(), coef()]);
            let b = PauliDecomp::new(coef(), [coef(), coef(), coef()]);
            let dense = HermitianOp::from_pauli(&a).trace_product(&HermitianOp::from_pauli(&b));
            assert!(close(trace_pair(&a, &b), dense, 1e-12));
        }
    }

    fn pauli_strategy() -> impl Strategy<Value = PauliDecomp> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(c0, a, b, c)| PauliDecomp::new(c0, [a, b, c]))
    }

    proptest! {
        #[test]
        fn closed_form_psd_matches_dense(a in pauli_strategy()) {
            let closed = a.psd(EPS_POS);
            let dense = HermitianOp::from_pauli(&a);
            let dense_min = nalgebra_min_eigenvalue(dense.matrix());
            prop_assert!((closed.min_eigenvalue - dense_min).abs() < 1e-12);
            prop_assert_eq!(closed.psd, a.c0 - a.vector_norm() >= -EPS_POS);
        }

        #[test]
        fn pauli_round_trip(a in pauli_strategy()) {
            let back = PauliDecomp::from_matrix2(&a.to_matrix2()).unwrap();
            prop_assert!((back.c0 - a.c0).abs() < 1e-12);
            for k in 0..3 {
                prop_assert!((back.c[k] - a.c[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn bloch_matrix_unit_trace(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let m = BlochVector::new(x, y, z).to_matrix();
            prop_assert!((m.trace() - 1.0).abs() < 1e-15);
        }
    }

    // General-purpose solver, bypassing the closed 2×2 path.
    fn nalgebra_min_eigenvalue(m: &DMatrix<C64>) -> f64 {
        m.clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}
