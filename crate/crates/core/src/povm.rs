//! The unbiased joint POVM for a noisy simultaneous observation of `σ_X`
//! and `σ_Y`, and the statistics it produces.
//!
//! Elements are `Δ(x,y) = [σ0 + S(x,y)·σ]/4` with
//! `S(x,y) = xγ_X ê_x + yγ_Y ê_y + xyγ_XY ê_z`. The axes are fixed to the
//! coordinate axes; only the three accuracy factors are free.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::qubit::{trace_pair, BlochVector, HermitianOp, PauliDecomp, PsdVerdict};
use crate::tolerance::{EPS_NUM, EPS_POS};
use crate::{Error, Result};

/// A dichotomic outcome `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.as_i8()
    }
}

impl TryFrom<i8> for Outcome {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(format!("outcome must be +1 or -1, got {v}")),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// Values over the four outcome pairs `(x, y) ∈ {±1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutcomeTable<T = f64>(pub [[T; 2]; 2]);

impl<T: Copy> OutcomeTable<T> {
    pub fn from_fn(mut f: impl FnMut(Outcome, Outcome) -> T) -> Self {
        use Outcome::{Minus, Plus};
        let pp = f(Plus, Plus);
        let pm = f(Plus, Minus);
        let mp = f(Minus, Plus);
        let mm = f(Minus, Minus);
        Self([[pp, pm], [mp, mm]])
    }

    /// Cells in the fixed order `(+,+), (+,-), (-,+), (-,-)`.
    pub fn iter(&self) -> impl Iterator<Item = (Outcome, Outcome, T)> + '_ {
        Outcome::ALL
            .into_iter()
            .flat_map(move |x| Outcome::ALL.into_iter().map(move |y| (x, y, self[(x, y)])))
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> OutcomeTable<U> {
        OutcomeTable::from_fn(|x, y| f(self[(x, y)]))
    }

    /// Flattened in the same order as [`OutcomeTable::iter`].
    pub fn to_flat(&self) -> [T; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_flat(v: [T; 4]) -> Self {
        Self([[v[0], v[1]], [v[2], v[3]]])
    }
}

impl<T> OutcomeTable<T> {
    /// Position of `(x, y)` in [`OutcomeTable::to_flat`].
    pub fn flat_index(x: Outcome, y: Outcome) -> usize {
        2 * x.index() + y.index()
    }
}

impl OutcomeTable<f64> {
    pub fn sum(&self) -> f64 {
        self.iter().map(|(_, _, v)| v).sum()
    }

    pub fn min(&self) -> f64 {
        self.iter().map(|(_, _, v)| v).fold(f64::INFINITY, f64::min)
    }

    /// `Σ_y T(x, y)`, indexed by `x`.
    pub fn row_sums(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[0][1], self.0[1][0] + self.0[1][1]]
    }

    /// `Σ_x T(x, y)`, indexed by `y`.
    pub fn col_sums(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[1][0], self.0[0][1] + self.0[1][1]]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter()
            .map(|(x, y, v)| (v - other[(x, y)]).abs())
            .fold(0.0, f64::max)
    }
}

impl<T> Index<(Outcome, Outcome)> for OutcomeTable<T> {
    type Output = T;

    fn index(&self, (x, y): (Outcome, Outcome)) -> &T {
        &self.0[x.index()][y.index()]
    }
}

impl<T> IndexMut<(Outcome, Outcome)> for OutcomeTable<T> {
    fn index_mut(&mut self, (x, y): (Outcome, Outcome)) -> &mut T {
        &mut self.0[x.index()][y.index()]
    }
}

impl<T: Copy + Serialize> Serialize for OutcomeTable<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        for (x, y, v) in self.iter() {
            map.serialize_entry(&format!("{x},{y}"), &v)?;
        }
        map.end()
    }
}

/// Which of the two jointly observed quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    X,
    Y,
}

/// Noisy joint POVM, parametrized by the accuracy factors `(γ_X, γ_Y, γ_XY)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisyJointPovm {
    gamma_x: f64,
    gamma_y: f64,
    gamma_xy: f64,
}

impl NoisyJointPovm {
    /// Validates `γ ≥ 0` and `γ_X² + γ_Y² + γ_XY² ≤ 1`. Inputs are taken
    /// literally; nothing is renormalized or clamped.
    pub fn new(gamma_x: f64, gamma_y: f64, gamma_xy: f64) -> Result<Self> {
        for (name, value) in [("γ_X", gamma_x), ("γ_Y", gamma_y), ("γ_XY", gamma_xy)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeAccuracy { name, value });
            }
        }
        let sum = gamma_x * gamma_x + gamma_y * gamma_y + gamma_xy * gamma_xy;
        if sum > 1.0 + EPS_NUM {
            return Err(Error::AccuracyBound { sum });
        }
        Ok(Self {
            gamma_x,
            gamma_y,
            gamma_xy,
        })
    }

    pub fn gamma_x(&self) -> f64 {
        self.gamma_x
    }

    pub fn gamma_y(&self) -> f64 {
        self.gamma_y
    }

    pub fn gamma_xy(&self) -> f64 {
        self.gamma_xy
    }

    pub fn gammas(&self) -> [f64; 3] {
        [self.gamma_x, self.gamma_y, self.gamma_xy]
    }

    pub fn gamma(&self, w: Observable) -> f64 {
        match w {
            Observable::X => self.gamma_x,
            Observable::Y => self.gamma_y,
        }
    }

    /// `S(x, y)` for the fixed orthogonal axes.
    pub fn bloch_direction(&self, x: Outcome, y: Outcome) -> [f64; 3] {
        let (xs, ys) = (x.sign(), y.sign());
        [xs * self.gamma_x, ys * self.gamma_y, xs * ys * self.gamma_xy]
    }

    /// `Δ(x, y) = [σ0 + S(x,y)·σ]/4`.
    pub fn element(&self, x: Outcome, y: Outcome) -> PauliDecomp {
        PauliDecomp::new(0.25, self.bloch_direction(x, y).map(|v| v / 4.0))
    }

    pub fn elements(&self) -> OutcomeTable<PauliDecomp> {
        OutcomeTable::from_fn(|x, y| self.element(x, y))
    }

    /// `Δ_W(w) = (σ0 + wγ_W σ_W)/2`.
    pub fn marginal_element(&self, observable: Observable, w: Outcome) -> PauliDecomp {
        let mut c = [0.0; 3];
        match observable {
            Observable::X => c[0] = w.sign() * self.gamma_x / 2.0,
            Observable::Y => c[1] = w.sign() * self.gamma_y / 2.0,
        }
        PauliDecomp::new(0.5, c)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_elements(&self.elements())
    }

    /// Observed joint statistics `p(x, y)` for state `s`.
    pub fn joint_distribution(&self, s: &BlochVector, method: Method) -> Result<JointDistribution> {
        let s = s.validated()?;
        let table = match method {
            Method::ClosedForm => OutcomeTable::from_fn(|x, y| {
                let (xs, ys) = (x.sign(), y.sign());
                0.25 * (1.0
                    + xs * self.gamma_x * s.x
                    + ys * self.gamma_y * s.y
                    + xs * ys * self.gamma_xy * s.z)
            }),
            Method::TraceOracle => {
                let rho = s.to_matrix();
                OutcomeTable::from_fn(|x, y| {
                    rho.trace_product(&HermitianOp::from_pauli(&self.element(x, y)))
                })
            }
        };
        JointDistribution::new(table)
    }
}

/// Route used to compute a statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Pauli-algebra closed form.
    #[default]
    ClosedForm,
    /// Dense `tr[ρΔ]` with explicit complex matrices.
    TraceOracle,
}

/// Checks of the POVM axioms and unbiasedness for a set of four elements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub element_psd: OutcomeTable<PsdVerdict>,
    /// Frobenius norm of `Σ Δ(x,y) − I`, computed densely.
    pub completeness_defect: f64,
    /// `max |p(x,y) − 1/4|` for the maximally mixed state.
    pub unbiasedness_defect: f64,
    pub passed: bool,
}

/// Validates arbitrary elements, so callers can audit perturbed sets.
pub fn validate_elements(elements: &OutcomeTable<PauliDecomp>) -> ValidationReport {
    let element_psd = elements.map(|e| HermitianOp::from_pauli(&e).psd(EPS_POS));

    let mut total = nalgebra::DMatrix::zeros(2, 2);
    for (_, _, e) in elements.iter() {
        total += HermitianOp::from_pauli(&e).into_matrix();
    }
    total -= nalgebra::DMatrix::identity(2, 2);
    let completeness_defect = total.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();

    let mixed = BlochVector::ORIGIN.to_pauli();
    let unbiasedness_defect = elements
        .iter()
        .map(|(_, _, e)| (trace_pair(&mixed, &e) - 0.25).abs())
        .fold(0.0, f64::max);

    let passed = element_psd.iter().all(|(_, _, v)| v.psd)
        && completeness_defect <= EPS_NUM
        && unbiasedness_defect <= EPS_NUM;
    ValidationReport {
        element_psd,
        completeness_defect,
        unbiasedness_defect,
        passed,
    }
}

/// A normalized, non-negative distribution over `(x, y) ∈ {±1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct JointDistribution(OutcomeTable);

impl JointDistribution {
    pub fn new(table: OutcomeTable) -> Result<Self> {
        if table.iter().any(|(_, _, v)| !v.is_finite() || v < -EPS_NUM) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite cell in {:?}",
                table.0
            )));
        }
        let sum = table.sum();
        if (sum - 1.0).abs() > EPS_NUM {
            return Err(Error::InvalidDistribution(format!(
                "cells sum to {sum}, expected 1"
            )));
        }
        Ok(Self(table))
    }

    pub fn uniform() -> Self {
        Self(OutcomeTable([[0.25; 2]; 2]))
    }

    pub fn table(&self) -> &OutcomeTable {
        &self.0
    }

    pub fn get(&self, x: Outcome, y: Outcome) -> f64 {
        self.0[(x, y)]
    }

    pub fn p_x(&self, x: Outcome) -> f64 {
        self.0.row_sums()[x.index()]
    }

    pub fn p_y(&self, y: Outcome) -> f64 {
        self.0.col_sums()[y.index()]
    }

    pub fn marginals(&self) -> MarginalPair {
        MarginalPair {
            p_x: self.0.row_sums(),
            p_y: self.0.col_sums(),
        }
    }
}

impl Index<(Outcome, Outcome)> for JointDistribution {
    type Output = f64;

    fn index(&self, idx: (Outcome, Outcome)) -> &f64 {
        &self.0[idx]
    }
}

/// Marginals `p_X(x)` and `p_Y(y)`, each indexed by [`Outcome::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalPair {
    pub p_x: [f64; 2],
    pub p_y: [f64; 2],
}
