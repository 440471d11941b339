//! Kolmogorov-Bayes conditionals and the conditional-state problem.
//!
//! Given the observed `p(x, y)`, the conditional `p(x|y) = p(x,y)/p_Y(y)`
//! is reproduced by a qubit state `ρ_y = (σ0 + t·σ)/2` through the marginal
//! effect `Δ_X(x)` iff
//!
//! ```text
//! t_X = (s_X + y s_Z γ_XY/γ_X) / (1 + y γ_Y s_Y)
//! ```
//!
//! and `|t| ≤ 1`. `t_Y` and `t_Z` are unconstrained by the statistics, so a
//! state exists exactly when `|t_X| ≤ 1`; the canonical representative sets
//! `t_Y = t_Z = 0`.

use serde::Serialize;

use crate::povm::{JointDistribution, Method, NoisyJointPovm, Observable, Outcome};
use crate::qubit::{trace_pair, BlochVector};
use crate::tolerance::{EPS_DEN, EPS_POS};
use crate::{Error, Result};

/// `p(x|y)` for one conditioning outcome, indexed by [`Outcome::index`] of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalSlice {
    pub y: Outcome,
    pub p_y: f64,
    pub probs: [f64; 2],
}

impl ConditionalSlice {
    pub fn get(&self, x: Outcome) -> f64 {
        self.probs[x.index()]
    }
}

/// Bayes conditional `p(x|y) = p(x,y)/p_Y(y)`.
pub fn conditional_slice(d: &JointDistribution, y: Outcome) -> Result<ConditionalSlice> {
    let p_y = d.p_y(y);
    if p_y <= EPS_DEN {
        return Err(Error::UndefinedConditional { y: y.as_i8(), p_y });
    }
    Ok(ConditionalSlice {
        y,
        p_y,
        probs: Outcome::ALL.map(|x| d[(x, y)] / p_y),
    })
}

/// Solution of the conditional-state problem for one `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub y: Outcome,
    /// The Bloch component fixed by the statistics.
    pub t_x: f64,
    pub exists: bool,
    /// `(t_X, 0, 0)` when a state exists.
    pub canonical_state: Option<BlochVector>,
    /// Radius `sqrt(1 − t_X²)` of the disc of admissible `(t_Y, t_Z)`.
    pub free_radius: Option<f64>,
    /// The conditional distribution being reproduced, indexed by `x`.
    pub conditional: [f64; 2],
}

impl ConditionalReport {
    pub(crate) fn from_component(y: Outcome, t_x: f64, conditional: [f64; 2]) -> Self {
        let exists = t_x.abs() <= 1.0 + EPS_POS;
        Self {
            y,
            t_x,
            exists,
            canonical_state: exists.then(|| BlochVector::new(t_x, 0.0, 0.0)),
            free_radius: exists.then(|| (1.0 - t_x * t_x).max(0.0).sqrt()),
            conditional,
        }
    }
}

/// Solves for `ρ_y` reproducing `p(x|y)` through `Δ_X(x)`.
pub fn solve_conditional_state(
    povm: &NoisyJointPovm,
    s: &BlochVector,
    y: Outcome,
) -> Result<ConditionalReport> {
    let gx = povm.gamma_x();
    if gx <= 0.0 {
        return Err(Error::DegenerateAccuracy(gx));
    }
    let d = povm.joint_distribution(s, Method::ClosedForm)?;
    let slice = conditional_slice(&d, y)?;
    let ys = y.sign();
    let t_x = (s.x + ys * s.z * povm.gamma_xy() / gx) / (1.0 + ys * povm.gamma_y() * s.y);
    Ok(ConditionalReport::from_component(y, t_x, slice.probs))
}

/// `tr[ρ Δ_X(x)]` for a candidate conditional state.
pub fn born_conditional(povm: &NoisyJointPovm, state: &BlochVector, x: Outcome) -> f64 {
    trace_pair(&state.to_pauli(), &povm.marginal_element(Observable::X, x))
}

/// A pure state and outcome for which no conditional state exists:
/// `s = (sqrt(1 − γ_Y²), γ_Y, 0)` with `y = −1`, giving
/// `t_X = 1/sqrt(1 − γ_Y²) > 1` regardless of `γ_X` and `γ_XY`.
pub fn theorem2_witness(povm: &NoisyJointPovm) -> Result<(BlochVector, Outcome)> {
    let gy = povm.gamma_y();
    if !(gy > 0.0 && gy < 1.0) {
        return Err(Error::WitnessUnavailable(format!(
            "needs 0 < γ_Y < 1, got γ_Y = {gy}"
        )));
    }
    let s = BlochVector::new((1.0 - gy * gy).sqrt(), gy, 0.0);
    Ok((s, Outcome::Minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::random_povm;
    use crate::qubit::{random_state, seeded_rng, HermitianOp, SamplingMode};
    use Outcome::{Minus, Plus};

    fn povm(gx: f64, gy: f64, gxy: f64) -> NoisyJointPovm {
        NoisyJointPovm::new(gx, gy, gxy).unwrap()
    }

    #[test]
    fn slice_examples() {
        let u = conditional_slice(&JointDistribution::uniform(), Plus).unwrap();
        assert_eq!(u.probs, [0.5, 0.5]);

        let d = povm(0.6, 0.48, 0.64)
            .joint_distribution(&BlochVector::new(1.0, 0.0, 0.0), Method::ClosedForm)
            .unwrap();
        let c = conditional_slice(&d, Plus).unwrap();
        assert!((c.get(Plus) - 0.8).abs() < 1e-12);

        let d = povm(0.0, 1.0, 0.0)
            .joint_distribution(&BlochVector::new(0.0, -1.0, 0.0), Method::ClosedForm)
            .unwrap();
        assert!(matches!(
            conditional_slice(&d, Plus),
            Err(Error::UndefinedConditional { y: 1, .. })
        ));
    }

    #[test]
    fn maximally_mixed_has_mixed_conditional_state() {
        let r = solve_conditional_state(&povm(0.6, 0.48, 0.64), &BlochVector::ORIGIN, Plus).unwrap();
        assert_eq!(r.t_x, 0.0);
        assert!(r.exists);
        assert_eq!(r.canonical_state, Some(BlochVector::ORIGIN));
        assert_eq!(r.free_radius, Some(1.0));
    }

    #[test]
    fn small_gamma_x_breaks_existence() {
        let r = solve_conditional_state(&povm(0.6, 0.48, 0.64), &BlochVector::new(0.0, 0.0, 1.0), Plus)
            .unwrap();
        assert!((r.t_x - 0.64 / 0.6).abs() < 1e-15);
        assert!(!r.exists);
        assert!(r.canonical_state.is_none());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            solve_conditional_state(&povm(0.0, 0.5, 0.5), &BlochVector::ORIGIN, Plus),
            Err(Error::DegenerateAccuracy(_))
        ));
        assert!(matches!(
            solve_conditional_state(&povm(1e-3, 0.999, 0.0), &BlochVector::new(0.0, -1.0, 0.0), Plus),
            Ok(_)
        ));
        let p = NoisyJointPovm::new(0.0, 1.0, 0.0).unwrap();
        assert!(solve_conditional_state(&p, &BlochVector::new(0.0, -1.0, 0.0), Plus).is_err());
    }

    #[test]
    fn witness_examples() {
        let (s, y) = theorem2_witness(&povm(0.6, 0.6, 0.0)).unwrap();
        assert!((s.x - 0.8).abs() < 1e-15 && s.y == 0.6 && s.z == 0.0);
        assert_eq!(y, Minus);
        let r = solve_conditional_state(&povm(0.6, 0.6, 0.0), &s, y).unwrap();
        assert!((r.t_x - 1.25).abs() < 1e-12);
        assert!(!r.exists);

        let p = povm(0.1, 0.99, 0.0);
        let (s, y) = theorem2_witness(&p).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let r = solve_conditional_state(&p, &s, y).unwrap();
        assert!((r.t_x - 1.0 / (1.0f64 - 0.9801).sqrt()).abs() < 1e-12);
        assert!((r.t_x - 7.0888).abs() < 1e-4);

        for gy in [0.0, 1.0] {
            let p = NoisyJointPovm::new(0.0, gy, 0.0).unwrap();
            assert!(matches!(theorem2_witness(&p), Err(Error::WitnessUnavailable(_))));
        }
    }

    #[test]
    fn bayes_and_born_consistency() {
        let mut rng = seeded_rng(23);
        for _ in 0..20_000 {
            let p = random_povm(&mut rng);
            let s = random_state(&mut rng, SamplingMode::BallUniform);
            let y = if rng_bit(&mut rng) { Plus } else { Minus };
            let d = p.joint_distribution(&s, Method::ClosedForm).unwrap();
            let Ok(slice) = conditional_slice(&d, y) else { continue };
            for x in Outcome::ALL {
                assert!((slice.get(x) * slice.p_y - d[(x, y)]).abs() <= 1e-14);
            }
            let r = solve_conditional_state(&p, &s, y).unwrap();
            assert_eq!(r.exists, r.t_x.abs() <= 1.0 + EPS_POS);
            if let Some(state) = r.canonical_state {
                let rho = state.to_matrix();
                assert!(rho.psd(EPS_POS).psd);
                for x in Outcome::ALL {
                    let effect = HermitianOp::from_pauli(&p.marginal_element(Observable::X, x));
                    assert!((rho.trace_product(&effect) - slice.get(x)).abs() <= 1e-12);
                    // the free components do not affect the reproduced statistics
                    let radius = r.free_radius.unwrap();
                    let moved = BlochVector::new(state.x, 0.6 * radius, -0.8 * radius);
                    assert!((born_conditional(&p, &moved, x) - slice.get(x)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn conditional_state_depends_on_gamma_xy() {
        let s = BlochVector::new(0.1, 0.2, 0.5);
        let a = solve_conditional_state(&povm(0.5, 0.4, 0.1), &s, Plus).unwrap();
        let b = solve_conditional_state(&povm(0.5, 0.4, 0.7), &s, Plus).unwrap();
        assert!((a.t_x - b.t_x).abs() > 0.1);
        // while Δ_Y(y) is the same for both
        assert_eq!(
            povm(0.5, 0.4, 0.1).marginal_element(Observable::Y, Plus),
            povm(0.5, 0.4, 0.7).marginal_element(Observable::Y, Plus)
        );
    }

    fn rng_bit<R: rand::Rng>(rng: &mut R) -> bool {
        rng.random()
    }
}
