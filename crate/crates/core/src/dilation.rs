//! Two-qubit realization of the joint POVM (a photon in a Young
//! interferometer with path-marking phase plates).
//!
//! The system qubit carries the path: the aperture states are the `σ_Y`
//! eigenvectors and interference is read out in the `σ_X` eigenbasis. The
//! ancilla is the photon polarization, prepared right-circular (the `+1`
//! eigenvector of `Σ_3`, basis index 0) and read out along
//! `Σ_φ = cos φ Σ_1 + sin φ Σ_2`.
//!
//! Tensor ordering is system ⊗ ancilla with the system index slow, so the
//! composite index is `2·i_system + i_ancilla`. Partial traces are dense
//! sums over the ancilla basis and serve as the oracle for the closed forms.

use nalgebra::{Matrix2, Matrix4, Vector2};
use serde::Serialize;

use crate::conditional::{conditional_slice, solve_conditional_state};
use crate::povm::{Method, NoisyJointPovm, Observable, Outcome, OutcomeTable};
use crate::qubit::{eigenvalues_hermitian, pauli, to_dynamic, trace_pair, BlochVector, PauliDecomp, C64};
use crate::tolerance::{EPS_DEN, EPS_NUM};
use crate::{Error, Result};

pub type TwoQubitOp = Matrix4<C64>;

/// Phase-plate angle `θ` and polarizer-axis angle `φ`, in radians.
///
/// Non-negative accuracy factors require `θ, φ ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationConfig {
    pub theta: f64,
    pub phi: f64,
}

impl DilationConfig {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// `(cos θ, sin θ cos φ, sin θ sin φ)`, a point on the unit sphere.
    pub fn gammas(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [ct, st * cp, st * sp]
    }

    /// The closed-form POVM for these angles.
    pub fn closed_form_povm(&self) -> Result<NoisyJointPovm> {
        let [gx, gy, gxy] = self.gammas();
        NoisyJointPovm::new(gx, gy, gxy)
    }
}

fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> TwoQubitOp {
    let k = a.kronecker(b);
    Matrix4::from_fn(|i, j| k[(i, j)])
}

fn outer(v: &Vector2<C64>) -> Matrix2<C64> {
    v * v.adjoint()
}

/// Eigenvector of `σ_X` with eigenvalue `x`.
pub fn interference_ket(x: Outcome) -> Vector2<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Vector2::new(C64::from(r), C64::from(r * x.sign()))
}

/// Eigenvector of `Σ_φ` with eigenvalue `y`: `(1, y e^{iφ})/√2`.
pub fn polarizer_ket(phi: f64, y: Outcome) -> Vector2<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Vector2::new(C64::from(r), C64::from_polar(r * y.sign(), phi))
}

/// Right-circular polarization, the ancilla input.
pub fn ancilla_input() -> Vector2<C64> {
    Vector2::new(C64::from(1.0), C64::from(0.0))
}

/// `U = cos(θ/2) σ0⊗Σ0 − i sin(θ/2) σ_Y⊗Σ_2`.
pub fn dilation_unitary(theta: f64) -> TwoQubitOp {
    let (s, c) = (theta / 2.0).sin_cos();
    kron(&pauli(0), &pauli(0)) * C64::from(c) - kron(&pauli(2), &pauli(2)) * C64::new(0.0, s)
}

/// `tr_A[M]` for an operator on system ⊗ ancilla.
pub fn partial_trace_ancilla(m: &TwoQubitOp) -> Matrix2<C64> {
    Matrix2::from_fn(|i, j| (0..2).map(|a| m[(2 * i + a, 2 * j + a)]).sum())
}

/// `Δ(x,y) = tr_A[ρ_A U† (|x⟩⟨x| ⊗ |y⟩⟨y|) U]`, elementwise by partial trace.
pub fn dilated_elements(cfg: &DilationConfig) -> OutcomeTable<Matrix2<C64>> {
    let u = dilation_unitary(cfg.theta);
    let rho_a = kron(&pauli(0), &outer(&ancilla_input()));
    OutcomeTable::from_fn(|x, y| {
        let proj = kron(&outer(&interference_ket(x)), &outer(&polarizer_ket(cfg.phi, y)));
        partial_trace_ancilla(&(rho_a * u.adjoint() * proj * u))
    })
}

/// Reads the accuracy factors off the partial-trace elements.
pub fn derived_povm(cfg: &DilationConfig) -> Result<NoisyJointPovm> {
    let elements = dilated_elements(cfg);
    let e = PauliDecomp::from_matrix2(&elements[(Outcome::Plus, Outcome::Plus)])?;
    // rounding can leave −1e-17 where the closed form is exactly zero
    let snap = |v: f64| if v < 0.0 && v > -EPS_NUM { 0.0 } else { v };
    NoisyJointPovm::new(snap(4.0 * e.c[0]), snap(4.0 * e.c[1]), snap(4.0 * e.c[2]))
}

/// Largest entrywise gap between the partial-trace elements and the
/// closed-form elements for the same angles.
pub fn dilation_defect(cfg: &DilationConfig) -> Result<f64> {
    let closed = cfg.closed_form_povm()?;
    let dense = dilated_elements(cfg);
    Ok(dense
        .iter()
        .map(|(x, y, m)| {
            (m - closed.element(x, y).to_matrix2())
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

/// Measurement operator `Λ_y` on the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausOperator {
    pub y: Outcome,
    pub matrix: Matrix2<C64>,
}

impl KrausOperator {
    /// `Λ_y† Λ_y`.
    pub fn effect(&self) -> Matrix2<C64> {
        self.matrix.adjoint() * self.matrix
    }
}

/// `Λ_y = (y e^{iφ} cos(θ/2) σ0 + sin(θ/2) σ_Y)/√2`.
pub fn kraus_operator(cfg: &DilationConfig, y: Outcome) -> KrausOperator {
    let (s, c) = (cfg.theta / 2.0).sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let matrix = pauli(0) * C64::from_polar(r * y.sign() * c, cfg.phi) + pauli(2) * C64::from(r * s);
    KrausOperator { y, matrix }
}

/// `⟨y|U|↻⟩` computed from the dense unitary. Equal to [`kraus_operator`]
/// up to a global phase.
pub fn kraus_from_unitary(cfg: &DilationConfig, y: Outcome) -> KrausOperator {
    let u = dilation_unitary(cfg.theta);
    let bra = polarizer_ket(cfg.phi, y).adjoint();
    let ket = ancilla_input();
    let matrix = Matrix2::from_fn(|i, j| {
        let mut acc = C64::from(0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += bra[(0, a)] * u[(2 * i + a, 2 * j + b)] * ket[b];
            }
        }
        acc
    });
    KrausOperator { y, matrix }
}

/// Post-measurement state `Λ_y ρ Λ_y† / tr[Λ_y† Λ_y ρ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuedersState {
    pub y: Outcome,
    pub matrix: Matrix2<C64>,
    pub bloch: BlochVector,
    /// `tr[Λ_y† Λ_y ρ]`, i.e. `p_Y(y)`.
    pub normalization: f64,
}

impl LuedersState {
    pub fn min_eigenvalue(&self) -> f64 {
        eigenvalues_hermitian(&to_dynamic(&self.matrix))[0]
    }
}

pub fn lueders_state(s: &BlochVector, cfg: &DilationConfig, y: Outcome) -> Result<LuedersState> {
    let s = s.validated()?;
    let rho = s.to_pauli().to_matrix2();
    let k = kraus_operator(cfg, y);
    let normalization = (k.effect() * rho).trace().re;
    if normalization <= EPS_DEN {
        return Err(Error::UndefinedReduction(normalization));
    }
    let matrix = k.matrix * rho * k.matrix.adjoint() / C64::from(normalization);
    Ok(LuedersState {
        y,
        matrix,
        bloch: BlochVector::from_matrix(&matrix),
        normalization,
    })
}

/// Conditional state for a factorized POVM `Δ_X(x) ⊗ Δ_Y(y)`:
/// `ρ_y = tr_Y[ρ (I ⊗ Δ_Y)] / tr[ρ (I ⊗ Δ_Y)]`.
pub fn factorized_reduced_state(rho: &TwoQubitOp, delta_y: &Matrix2<C64>) -> Result<Matrix2<C64>> {
    let weighted = rho * kron(&pauli(0), delta_y);
    let norm = weighted.trace().re;
    if norm <= EPS_DEN {
        return Err(Error::UndefinedReduction(norm));
    }
    Ok(partial_trace_ancilla(&weighted) / C64::from(norm))
}

/// Side-by-side comparison of the Lüders state and the conditional state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistinctionReport {
    pub y: Outcome,
    pub gammas: [f64; 3],
    /// Bayes conditional `p(x|y)`, indexed by `x`.
    pub conditional: [f64; 2],
    /// `tr[ρ̃_y |x⟩⟨x|]`; always equal to `p(x|y)`.
    pub lueders_projective: [f64; 2],
    /// `tr[ρ̃_y Δ_X(x)]`; generically different from `p(x|y)`.
    pub lueders_smeared: [f64; 2],
    /// `max_x |tr[ρ̃_y Δ_X(x)] − p(x|y)|`.
    pub smeared_gap: f64,
    pub lueders_state: BlochVector,
    pub lueders_min_eigenvalue: f64,
    /// Conditional-state problem for the same inputs.
    pub t_x: f64,
    pub exists: bool,
    /// Bloch distance between `ρ̃_y` and the canonical `ρ_y`, when it exists.
    pub bloch_distance: Option<f64>,
}

pub fn distinction_report(s: &BlochVector, cfg: &DilationConfig, y: Outcome) -> Result<DistinctionReport> {
    let povm = derived_povm(cfg)?;
    let lueders = lueders_state(s, cfg, y)?;
    let d = povm.joint_distribution(s, Method::ClosedForm)?;
    let conditional = conditional_slice(&d, y)?.probs;

    let lueders_projective = Outcome::ALL.map(|x| {
        (lueders.matrix * outer(&interference_ket(x))).trace().re
    });
    let lueders_smeared = Outcome::ALL.map(|x| {
        trace_pair(&lueders.bloch.to_pauli(), &povm.marginal_element(Observable::X, x))
    });
    let smeared_gap = (0..2)
        .map(|i| (lueders_smeared[i] - conditional[i]).abs())
        .fold(0.0, f64::max);

    let (t_x, exists, bloch_distance) = match solve_conditional_state(&povm, s, y) {
        Ok(r) => (
            r.t_x,
            r.exists,
            r.canonical_state.map(|c| c.distance(&lueders.bloch)),
        ),
        Err(Error::DegenerateAccuracy(_)) => (f64::NAN, false, None),
        Err(e) => return Err(e),
    };

    Ok(DistinctionReport {
        y,
        gammas: povm.gammas(),
        conditional,
        lueders_projective,
        lueders_smeared,
        smeared_gap,
        lueders_state: lueders.bloch,
        lueders_min_eigenvalue: lueders.min_eigenvalue(),
        t_x,
        exists,
        bloch_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{random_density4, random_effect2};
    use crate::conditional::theorem2_witness;
    use crate::qubit::{random_state, seeded_rng, SamplingMode};
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
    use Outcome::{Minus, Plus};

    fn max_abs<const R: usize, const C: usize>(
        m: &nalgebra::SMatrix<C64, R, C>,
    ) -> f64 {
        m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn unitary_examples() {
        assert!(max_abs(&(dilation_unitary(0.0) - Matrix4::identity())) < 1e-15);
        let u = dilation_unitary(PI);
        let expected = kron(&pauli(2), &pauli(2)) * C64::new(0.0, -1.0);
        assert!(max_abs(&(u - expected)) < 1e-15);
        for theta in [0.0, 0.3, FRAC_PI_3, PI, 2.5] {
            let u = dilation_unitary(theta);
            assert!(max_abs(&(u * u.adjoint() - Matrix4::identity())) < 1e-12);
        }
    }

    #[test]
    fn unitary_marks_the_path() {
        let theta = 0.9;
        let u = dilation_unitary(theta);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // σ_Y eigenvectors |±⟩ = (1, ±i)/√2
        for sign in [1.0, -1.0] {
            let path = Vector2::new(C64::from(r), C64::new(0.0, sign * r));
            let input = path.kronecker(&ancilla_input());
            let out = u * nalgebra::Vector4::from_fn(|i, _| input[i]);
            let (s, c) = (theta / 2.0).sin_cos();
            let pol = Vector2::new(C64::from(c), C64::from(sign * s));
            let expected = path.kronecker(&pol);
            for i in 0..4 {
                assert!((out[i] - expected[i]).norm() < 1e-15);
            }
            // overlap with the input polarization
            assert!((pol[0].re - c).abs() < 1e-15);
        }
    }

    #[test]
    fn derived_povm_examples() {
        let p = derived_povm(&DilationConfig::new(0.0, 0.7)).unwrap();
        assert!((p.gamma_x() - 1.0).abs() < 1e-15);
        assert!(p.gamma_y().abs() < 1e-15 && p.gamma_xy().abs() < 1e-15);

        let p = derived_povm(&DilationConfig::new(FRAC_PI_3, FRAC_PI_4)).unwrap();
        let expected = [0.5, 0.6123724356957945, 0.6123724356957945];
        for (a, b) in p.gammas().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derived_povm_matches_closed_form_on_grid() {
        for i in 0..32 {
            for j in 0..32 {
                let cfg = DilationConfig::new(FRAC_PI_2 * i as f64 / 31.0, FRAC_PI_2 * j as f64 / 31.0);
                assert!(dilation_defect(&cfg).unwrap() < 1e-12);
                let p = derived_povm(&cfg).unwrap();
                let sum: f64 = p.gammas().iter().map(|g| g * g).sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_examples() {
        let cfg = DilationConfig::new(0.0, 0.4);
        for y in Outcome::ALL {
            let k = kraus_operator(&cfg, y);
            let expected = pauli(0) * C64::from_polar(y.sign() * std::f64::consts::FRAC_1_SQRT_2, 0.4);
            assert!(max_abs(&(k.matrix - expected)) < 1e-15);
            assert!(max_abs(&(k.effect() - pauli(0) * C64::from(0.5))) < 1e-15);
        }

        let cfg = DilationConfig::new(FRAC_PI_3, FRAC_PI_4);
        let gy = cfg.gammas()[1];
        let k = kraus_operator(&cfg, Plus);
        let expected = PauliDecomp::new(0.5, [0.0, gy / 2.0, 0.0]).to_matrix2();
        assert!(max_abs(&(k.effect() - expected)) < 1e-12);
        assert!((gy - 0.61237).abs() < 1e-5);

        let total = kraus_operator(&cfg, Plus).effect() + kraus_operator(&cfg, Minus).effect();
        assert!(max_abs(&(total - pauli(0))) < 1e-15);
    }

    #[test]
    fn kraus_matches_unitary_up_to_phase() {
        let mut rng = seeded_rng(8);
        for _ in 0..500 {
            let cfg = DilationConfig::new(rng.random_range(0.0..FRAC_PI_2), rng.random_range(0.0..FRAC_PI_2));
            for y in Outcome::ALL {
                let a = kraus_operator(&cfg, y).effect();
                let b = kraus_from_unitary(&cfg, y).effect();
                assert!(max_abs(&(a - b)) < 1e-12);
                let povm = cfg.closed_form_povm().unwrap();
                let dy = povm.marginal_element(Observable::Y, y).to_matrix2();
                assert!(max_abs(&(a - dy)) < 1e-12);
            }
        }
    }

    #[test]
    fn lueders_reproduces_projective_conditional() {
        let mut rng = seeded_rng(13);
        for _ in 0..100_000 {
            let cfg = DilationConfig::new(rng.random_range(0.0..FRAC_PI_2), rng.random_range(0.0..FRAC_PI_2));
            let s = random_state(&mut rng, SamplingMode::BallUniform);
            let y = if rng.random::<bool>() { Plus } else { Minus };
            let Ok(r) = distinction_report(&s, &cfg, y) else { continue };
            for i in 0..2 {
                assert!((r.lueders_projective[i] - r.conditional[i]).abs() < 1e-12);
            }
            assert!(r.lueders_min_eigenvalue >= -1e-12);
        }
    }

    #[test]
    fn lueders_mixed_state_at_theta_zero() {
        let cfg = DilationConfig::new(0.0, 0.3);
        for y in Outcome::ALL {
            let r = distinction_report(&BlochVector::ORIGIN, &cfg, y).unwrap();
            assert_eq!(r.conditional, [0.5, 0.5]);
            for i in 0..2 {
                assert!((r.lueders_projective[i] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn distinction_examples() {
        // projective X: both notions coincide
        let s = BlochVector::new(0.3, -0.2, 0.5);
        let r = distinction_report(&s, &DilationConfig::new(0.0, 1.1), Plus).unwrap();
        for i in 0..2 {
            assert!((r.lueders_smeared[i] - r.lueders_projective[i]).abs() < 1e-12);
        }

        let cfg = DilationConfig::new(FRAC_PI_3, FRAC_PI_4);
        let r = distinction_report(&BlochVector::new(0.0, 0.0, 1.0), &cfg, Plus).unwrap();
        assert!(r.smeared_gap > 0.01, "gap {}", r.smeared_gap);

        let povm = cfg.closed_form_povm().unwrap();
        let (w, y) = theorem2_witness(&povm).unwrap();
        let r = distinction_report(&w, &cfg, y).unwrap();
        assert!(!r.exists);
        assert!(r.lueders_min_eigenvalue >= -1e-12);
        assert!(r.bloch_distance.is_none());
    }

    #[test]
    fn factorized_examples() {
        let rho_s = BlochVector::new(0.2, -0.4, 0.1).to_pauli().to_matrix2();
        let rho_a = BlochVector::new(0.0, 0.5, 0.5).to_pauli().to_matrix2();
        let out = factorized_reduced_state(&kron(&rho_s, &rho_a), &pauli(0)).unwrap();
        assert!(max_abs(&(out - rho_s)) < 1e-15);

        // (|00⟩ + |11⟩)/√2 steered by |0⟩⟨0| on the second factor gives |0⟩⟨0|
        let mut bell = Matrix4::<C64>::zeros();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = C64::from(0.5);
        }
        let proj0 = Matrix2::new(C64::from(1.0), C64::from(0.0), C64::from(0.0), C64::from(0.0));
        let out = factorized_reduced_state(&bell, &proj0).unwrap();
        assert!(max_abs(&(out - proj0)) < 1e-15);

        let zero = Matrix2::zeros();
        assert!(matches!(
            factorized_reduced_state(&bell, &zero),
            Err(Error::UndefinedReduction(_))
        ));
    }

    #[test]
    fn factorized_state_is_psd_and_reproduces_statistics() {
        let mut rng = seeded_rng(21);
        for _ in 0..10_000 {
            let rho = random_density4(&mut rng);
            let delta_y = random_effect2(&mut rng);
            let delta_x = random_effect2(&mut rng);
            let Ok(out) = factorized_reduced_state(&rho, &delta_y) else { continue };
            assert!(eigenvalues_hermitian(&to_dynamic(&out))[0] >= -1e-12);
            let p_xy = (rho * kron(&delta_x, &delta_y)).trace().re;
            let p_y = (rho * kron(&pauli(0), &delta_y)).trace().re;
            let born = (out * delta_x).trace().re;
            assert!((born - p_xy / p_y).abs() < 1e-12);
        }
    }
}
