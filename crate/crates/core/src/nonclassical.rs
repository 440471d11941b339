//! Classical smearing model and its inversion.
//!
//! A classical account of the noisy statistics reads
//! `p(x,y) = Σ ν_X(x|x′) ν_Y(y|y′) P(x′,y′)` with the hidden label running over
//! the four exact value pairs `(x′, y′)` and `ν_W(w|w′) = (1 + γ_W w w′)/2`.
//! Inverting the kernels with `μ_W(w,w′) = (1 + w w′/γ_W)/2` recovers the
//! noise-free `P(x,y)`; a negative cell means no classical account exists.

use serde::Serialize;

use crate::conditional::{solve_conditional_state, ConditionalReport};
use crate::povm::{JointDistribution, Method, NoisyJointPovm, Outcome, OutcomeTable};
use crate::qubit::BlochVector;
use crate::tolerance::{BOUNDARY_BAND, EPS_DEN, EPS_NUM};
use crate::{Error, Result};

/// Forward and inverse noise kernels, each indexed `[w][w′]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmearingKernels {
    pub nu_x: [[f64; 2]; 2],
    pub nu_y: [[f64; 2]; 2],
    pub mu_x: [[f64; 2]; 2],
    pub mu_y: [[f64; 2]; 2],
}

fn forward_kernel(gamma: f64) -> [[f64; 2]; 2] {
    let k = |w: Outcome, wp: Outcome| 0.5 * (1.0 + gamma * w.sign() * wp.sign());
    Outcome::ALL.map(|w| Outcome::ALL.map(|wp| k(w, wp)))
}

fn inverse_kernel(gamma: f64) -> [[f64; 2]; 2] {
    let k = |w: Outcome, wp: Outcome| 0.5 * (1.0 + w.sign() * wp.sign() / gamma);
    Outcome::ALL.map(|w| Outcome::ALL.map(|wp| k(w, wp)))
}

impl SmearingKernels {
    /// Needs `γ_X, γ_Y > ε_den`, otherwise the noise is not invertible.
    pub fn new(povm: &NoisyJointPovm) -> Result<Self> {
        let (gx, gy) = (povm.gamma_x(), povm.gamma_y());
        if gx <= EPS_DEN || gy <= EPS_DEN {
            return Err(Error::InversionUndefined {
                gamma_x: gx,
                gamma_y: gy,
            });
        }
        Ok(Self {
            nu_x: forward_kernel(gx),
            nu_y: forward_kernel(gy),
            mu_x: inverse_kernel(gx),
            mu_y: inverse_kernel(gy),
        })
    }
}

/// A normalized real distribution over `{±1}²` that may go negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct QuasiDistribution(OutcomeTable);

impl QuasiDistribution {
    pub fn new(table: OutcomeTable) -> Result<Self> {
        Self::with_scale(table, 1.0)
    }

    /// Normalization is checked to `EPS_NUM · scale`, where `scale` bounds
    /// the amplification of rounding error in the computation of `table`.
    fn with_scale(table: OutcomeTable, scale: f64) -> Result<Self> {
        let sum = table.sum();
        if !sum.is_finite() || (sum - 1.0).abs() > EPS_NUM * scale.max(1.0) {
            return Err(Error::InvalidDistribution(format!(
                "quasi-distribution sums to {sum}, expected 1"
            )));
        }
        Ok(Self(table))
    }

    pub fn table(&self) -> &OutcomeTable {
        &self.0
    }

    pub fn get(&self, x: Outcome, y: Outcome) -> f64 {
        self.0[(x, y)]
    }

    pub fn min(&self) -> f64 {
        self.0.min()
    }

    pub fn is_nonclassical(&self) -> bool {
        self.min() < 0.0
    }

    /// `P_X(x)`, indexed by `x`.
    pub fn p_x(&self) -> [f64; 2] {
        self.0.row_sums()
    }

    /// `P_Y(y)`, indexed by `y`.
    pub fn p_y(&self) -> [f64; 2] {
        self.0.col_sums()
    }
}

/// `P(x,y) = Σ μ_X(x,x′) μ_Y(y,y′) p(x′,y′)`.
pub fn invert_distribution(povm: &NoisyJointPovm, d: &JointDistribution) -> Result<QuasiDistribution> {
    let k = SmearingKernels::new(povm)?;
    let scale = k.mu_x[0][1].abs().max(1.0) * k.mu_y[0][1].abs().max(1.0);
    QuasiDistribution::with_scale(apply_kernels(&k.mu_x, &k.mu_y, d.table()), scale)
}

/// Closed form of the inverted distribution for state `s`:
/// `P(x,y) = [1 + x s_X + y s_Y + xy s_Z γ_XY/(γ_X γ_Y)]/4`.
pub fn quasi_closed_form(povm: &NoisyJointPovm, s: &BlochVector) -> Result<QuasiDistribution> {
    let (gx, gy) = (povm.gamma_x(), povm.gamma_y());
    if gx <= EPS_DEN || gy <= EPS_DEN {
        return Err(Error::InversionUndefined {
            gamma_x: gx,
            gamma_y: gy,
        });
    }
    let s = s.validated()?;
    let ratio = povm.gamma_xy() / (gx * gy);
    QuasiDistribution::new(OutcomeTable::from_fn(|x, y| {
        let (xs, ys) = (x.sign(), y.sign());
        0.25 * (1.0 + xs * s.x + ys * s.y + xs * ys * s.z * ratio)
    }))
}

/// `p(x,y) = Σ ν_X(x|x′) ν_Y(y|y′) Q(x′,y′)`.
///
/// Fails if the smeared result is not a probability distribution, which
/// can happen for strongly negative `Q`.
pub fn forward_smear(povm: &NoisyJointPovm, q: &QuasiDistribution) -> Result<JointDistribution> {
    let nu_x = forward_kernel(povm.gamma_x());
    let nu_y = forward_kernel(povm.gamma_y());
    JointDistribution::new(apply_kernels(&nu_x, &nu_y, q.table()))
}

fn apply_kernels(kx: &[[f64; 2]; 2], ky: &[[f64; 2]; 2], t: &OutcomeTable) -> OutcomeTable {
    OutcomeTable::from_fn(|x, y| {
        t.iter()
            .map(|(xp, yp, v)| kx[x.index()][xp.index()] * ky[y.index()][yp.index()] * v)
            .sum()
    })
}

/// The conditional-state problem posed on the inverted statistics with the
/// sharp projectors `Ω_W(w) = (σ0 + wσ_W)/2`:
/// `t_X = (s_X + y s_Z γ_XY/(γ_X γ_Y)) / (1 + y s_Y)`.
pub fn inverted_conditional_state(
    povm: &NoisyJointPovm,
    s: &BlochVector,
    y: Outcome,
) -> Result<ConditionalReport> {
    let q = quasi_closed_form(povm, s)?;
    let ys = y.sign();
    let den = 1.0 + ys * s.y;
    if den <= EPS_DEN {
        return Err(Error::UndefinedConditional {
            y: y.as_i8(),
            p_y: den / 2.0,
        });
    }
    let p_y = q.p_y()[y.index()];
    let conditional = Outcome::ALL.map(|x| q.get(x, y) / p_y);
    let ratio = povm.gamma_xy() / (povm.gamma_x() * povm.gamma_y());
    let t_x = (s.x + ys * s.z * ratio) / den;
    Ok(ConditionalReport::from_component(y, t_x, conditional))
}

/// `tr[ρ Ω_X(x)]` for a Bloch vector.
pub fn projector_conditional(state: &BlochVector, x: Outcome) -> f64 {
    0.5 * (1.0 + x.sign() * state.x)
}

/// One instance of "no conditional state implies negative `P`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem3Verdict {
    pub y: Outcome,
    pub t_x: f64,
    pub exists: bool,
    pub min_quasi: f64,
    /// `exists || min_quasi < 0`.
    pub holds: bool,
}

pub fn theorem3_audit(povm: &NoisyJointPovm, s: &BlochVector, y: Outcome) -> Result<Theorem3Verdict> {
    let report = solve_conditional_state(povm, s, y)?;
    let min_quasi = quasi_closed_form(povm, s)?.min();
    Ok(Theorem3Verdict {
        y,
        t_x: report.t_x,
        exists: report.exists,
        min_quasi,
        holds: report.exists || min_quasi < 0.0,
    })
}

/// One instance of the equivalence between nonexistence after inversion
/// and negativity of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem4Verdict {
    /// Inverted-problem `t_X` per `y`; `None` where `P_Y(y)` vanishes.
    pub t_inverted: [Option<f64>; 2],
    /// Some `y` has `|t_X| > 1`.
    pub nonexistence: bool,
    pub min_quasi: f64,
    pub negative: bool,
    pub agree: bool,
    /// Within [`BOUNDARY_BAND`] of `|t_X| = 1` or `min P = 0`; such
    /// instances are not judged.
    pub in_boundary_band: bool,
}

pub fn theorem4_audit(povm: &NoisyJointPovm, s: &BlochVector) -> Result<Theorem4Verdict> {
    let q = quasi_closed_form(povm, s)?;
    let mut t_inverted = [None; 2];
    for y in Outcome::ALL {
        match inverted_conditional_state(povm, s, y) {
            Ok(r) => t_inverted[y.index()] = Some(r.t_x),
            Err(Error::UndefinedConditional { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let nonexistence = t_inverted.iter().flatten().any(|t| t.abs() > 1.0);
    let min_quasi = q.min();
    let negative = min_quasi < 0.0;
    let in_boundary_band = min_quasi.abs() <= BOUNDARY_BAND
        || t_inverted
            .iter()
            .flatten()
            .any(|t| (t.abs() - 1.0).abs() <= BOUNDARY_BAND);
    Ok(Theorem4Verdict {
        t_inverted,
        nonexistence,
        min_quasi,
        negative,
        agree: nonexistence == negative,
        in_boundary_band,
    })
}

/// A state with negative `P` for which the noisy problem still has a
/// conditional state for both `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverseWitness {
    pub state: BlochVector,
    /// Admissible `s_Z` interval `(lower, upper]`.
    pub interval: (f64, f64),
    pub min_quasi: f64,
    /// Noisy-problem `t_X` for `y = +1, −1`.
    pub noisy_t_x: [f64; 2],
}

/// Picks `s = (0, 0, s_Z)` at the midpoint of
/// `1 < s_Z γ_XY/(γ_X γ_Y) ≤ min(1/γ_Y, γ_XY/(γ_X γ_Y))`, i.e.
/// `s_Z ∈ (γ_X γ_Y/γ_XY, min(γ_X/γ_XY, 1)]`.
pub fn converse_witness(povm: &NoisyJointPovm) -> Result<ConverseWitness> {
    let [gx, gy, gxy] = povm.gammas();
    if gx <= 0.0 || gy <= 0.0 || gxy <= 0.0 {
        return Err(Error::WitnessUnavailable(
            "needs all accuracy factors positive".into(),
        ));
    }
    let lower = gx * gy / gxy;
    let upper = (gx / gxy).min(1.0);
    if lower >= upper {
        return Err(Error::WitnessUnavailable(format!(
            "empty interval for s_Z: ({lower}, {upper}]"
        )));
    }
    let state = BlochVector::new(0.0, 0.0, 0.5 * (lower + upper));
    let min_quasi = quasi_closed_form(povm, &state)?.min();
    let mut noisy_t_x = [0.0; 2];
    for y in Outcome::ALL {
        noisy_t_x[y.index()] = solve_conditional_state(povm, &state, y)?.t_x;
    }
    if !(min_quasi < 0.0 && noisy_t_x.iter().all(|t| t.abs() <= 1.0)) {
        return Err(Error::WitnessUnavailable(format!(
            "midpoint s_Z = {} failed verification",
            state.z
        )));
    }
    Ok(ConverseWitness {
        state,
        interval: (lower, upper),
        min_quasi,
        noisy_t_x,
    })
}

/// Convenience: observed statistics followed by kernel inversion.
pub fn invert_state(povm: &NoisyJointPovm, s: &BlochVector) -> Result<QuasiDistribution> {
    invert_distribution(povm, &povm.joint_distribution(s, Method::ClosedForm)?)
}
