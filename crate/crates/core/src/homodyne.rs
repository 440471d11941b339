//! One-photon statistics under double homodyne detection and the Gaussian
//! deconvolution of the conditional quadrature distribution.
//!
//! The joint outcome density of the two quadratures is the Husimi function
//! of the one-photon state. Conditioning on `y` and asking for a state whose
//! smeared `X` statistics reproduce `p(x|y)` forces the sharp quadrature
//! distribution `p_y(x)`, obtained by undoing the Gaussian smearing kernel
//! `√(2/π) e^{−2(x−x′)²}`. For `y² < 1/2` the result dips below zero.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use rustfft::FftPlanner;
use serde::Serialize;

use crate::qubit::C64;
use crate::{Error, Result};

/// Kernel transforms below this fraction of their peak are discarded.
pub const KERNEL_CUTOFF: f64 = 1e-9;

/// Magnitude below which a deconvolved minimum is not called negative.
/// Matches the accuracy of the numerical path.
pub const NEGATIVITY_TOL: f64 = 1e-6;

fn sqrt_2_over_pi() -> f64 {
    (2.0 / PI).sqrt()
}

/// `p(x,y) = (x² + y²) e^{−x²−y²} / π`.
pub fn homodyne_joint(x: f64, y: f64) -> f64 {
    (x * x + y * y) * (-x * x - y * y).exp() / PI
}

/// `p_Y(y) = (1 + 2y²) e^{−y²} / (2√π)`.
pub fn homodyne_marginal_y(y: f64) -> f64 {
    (1.0 + 2.0 * y * y) * (-y * y).exp() / (2.0 * PI.sqrt())
}

/// `p(x|y) = (2/√π) (x² + y²)/(1 + 2y²) e^{−x²}`.
pub fn homodyne_conditional(x: f64, y: f64) -> f64 {
    FRAC_2_SQRT_PI * (x * x + y * y) / (1.0 + 2.0 * y * y) * (-x * x).exp()
}

/// Smearing kernel of the marginal `X` effect: `√(2/π) e^{−2(x−x′)²}`.
pub fn smeared_x_povm_weight(x: f64, x_prime: f64) -> f64 {
    let d = x - x_prime;
    sqrt_2_over_pi() * (-2.0 * d * d).exp()
}

/// Fourier transform of the smearing kernel, `e^{−k²/8}`.
pub fn kernel_transform(k: f64) -> f64 {
    (-k * k / 8.0).exp()
}

/// `p_y(x) = √(2/π) (8x² + 2y² − 1)/(1 + 2y²) e^{−2x²}`.
pub fn deconvolved_py_closed(x: f64, y: f64) -> f64 {
    sqrt_2_over_pi() * (8.0 * x * x + 2.0 * y * y - 1.0) / (1.0 + 2.0 * y * y) * (-2.0 * x * x).exp()
}

/// Whether `p_y` takes negative values: `y² < 1/2`.
pub fn negativity_region(y: f64) -> bool {
    y * y < 0.5
}

/// Half-width of the band in `y²` around `1/2` reported as [`Regime::Boundary`].
pub const THRESHOLD_BAND: f64 = 1e-4;

/// Analytic classification of `y` relative to the negativity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Negative,
    Boundary,
    NonNegative,
}

pub fn regime(y: f64) -> Regime {
    let d = y * y - 0.5;
    if d.abs() <= THRESHOLD_BAND {
        Regime::Boundary
    } else if d < 0.0 {
        Regime::Negative
    } else {
        Regime::NonNegative
    }
}

/// Uniform grid `x_k = −L + k h` on `[−L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub half_width: f64,
    pub step: f64,
    pub len: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::new(8.0, 0.005).expect("default grid is valid")
    }
}

impl QuadratureGrid {
    /// Requires `L ≥ 6`, `0 < h ≤ 0.01` and `2L/h` integral (to 1e-9).
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width >= 6.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be at least 6, got {half_width}"
            )));
        }
        if !(step > 0.0 && step <= 0.01) {
            return Err(Error::InvalidGrid(format!(
                "step must lie in (0, 0.01], got {step}"
            )));
        }
        let intervals = 2.0 * half_width / step;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > 1e-9 * rounded {
            return Err(Error::InvalidGrid(format!(
                "2L/h = {intervals} is not an integer"
            )));
        }
        Ok(Self {
            half_width,
            step,
            len: rounded as usize + 1,
        })
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.point(k))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }

    /// Riemann sum `h Σ f(x_k)`; spectrally accurate for the rapidly
    /// decaying integrands used here.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.step * values.iter().sum::<f64>()
    }
}

/// `(K ⋆ f)(x_k) = h Σ_j K(x_k − x_j) f(x_j)` by direct summation.
pub fn smear_on_grid(grid: &QuadratureGrid, values: &[f64]) -> Vec<f64> {
    grid.points()
        .map(|x| {
            let acc: f64 = grid
                .points()
                .zip(values)
                .map(|(xp, v)| smeared_x_povm_weight(x, xp) * v)
                .sum();
            grid.step * acc
        })
        .collect()
}

/// Sampled `p_y(x)` and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeconvolutionResult {
    pub y: f64,
    pub grid: QuadratureGrid,
    pub values: Vec<f64>,
    pub min_value: f64,
    pub min_location: f64,
    /// `|h Σ p_y(x_k) − 1|`.
    pub normalization_defect: f64,
    /// `min_value < −NEGATIVITY_TOL`.
    pub negative: bool,
    /// Frequency above which kernel modes were discarded, if any were.
    pub frequency_cutoff: Option<f64>,
    pub modes_discarded: usize,
}

impl DeconvolutionResult {
    fn from_values(y: f64, grid: QuadratureGrid, values: Vec<f64>) -> Self {
        let (min_idx, min_value) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
        let normalization_defect = (grid.integrate(&values) - 1.0).abs();
        Self {
            y,
            grid,
            min_location: grid.point(min_idx),
            min_value,
            normalization_defect,
            negative: min_value < -NEGATIVITY_TOL,
            frequency_cutoff: None,
            modes_discarded: 0,
            values,
        }
    }
}

/// Samples the closed-form `p_y` on the grid.
pub fn deconvolve_closed(y: f64, grid: &QuadratureGrid) -> DeconvolutionResult {
    DeconvolutionResult::from_values(y, *grid, grid.sample(|x| deconvolved_py_closed(x, y)))
}

/// Recovers `p_y` from `p(·|y)` by discrete Fourier division.
///
/// The DFT of the samples is divided by the analytic kernel transform at
/// each grid frequency `k_m = 2π m/(N h)`; modes where the transform drops
/// below [`KERNEL_CUTOFF`] of its peak are zeroed. The grid offset `−L`
/// contributes the same phase to the forward and inverse transforms and
/// cancels.
pub fn deconvolve_numeric(y: f64, grid: &QuadratureGrid) -> DeconvolutionResult {
    let n = grid.len;
    let mut buf: Vec<C64> = grid
        .points()
        .map(|x| C64::from(homodyne_conditional(x, y)))
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let dk = 2.0 * PI / (n as f64 * grid.step);
    let mut discarded = 0;
    let mut cutoff: Option<f64> = None;
    for (m, v) in buf.iter_mut().enumerate() {
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let k = signed * dk;
        let g = kernel_transform(k);
        if g < KERNEL_CUTOFF {
            *v = C64::from(0.0);
            discarded += 1;
            cutoff = Some(cutoff.map_or(k.abs(), |c: f64| c.min(k.abs())));
        } else {
            *v /= g;
        }
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    let values = buf.iter().map(|v| v.re / n as f64).collect();
    let mut out = DeconvolutionResult::from_values(y, *grid, values);
    out.frequency_cutoff = cutoff;
    out.modes_discarded = discarded;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn pointwise_examples() {
        assert_eq!(homodyne_joint(0.0, 0.0), 0.0);
        assert!((homodyne_joint(1.0, 0.0) - 0.11709966304863834).abs() < 1e-15);
        assert!((homodyne_marginal_y(0.0) - 0.28209479177387814).abs() < 1e-15);
        assert_eq!(homodyne_conditional(0.0, 0.0), 0.0);
        assert!((homodyne_conditional(1.0, 0.0) - 0.41510749742059471).abs() < 1e-15);
        assert!((smeared_x_povm_weight(0.3, 0.3) - 0.79788456080286541).abs() < 1e-15);
        assert_eq!(smeared_x_povm_weight(0.1, 0.7), smeared_x_povm_weight(0.7, 0.1));
        assert!((deconvolved_py_closed(0.0, 0.0) + 0.79788456080286541).abs() < 1e-15);
        assert!((deconvolved_py_closed(0.0, 1.0) - 0.26596152026762180).abs() < 1e-15);
    }

    #[test]
    fn grid_validation() {
        let g = QuadratureGrid::default();
        assert_eq!(g.len, 3201);
        assert_eq!(g.point(0), -8.0);
        assert!((g.point(3200) - 8.0).abs() < 1e-12);
        assert!(QuadratureGrid::new(5.0, 0.005).is_err());
        assert!(QuadratureGrid::new(8.0, 0.02).is_err());
        assert!(QuadratureGrid::new(8.0, 0.0).is_err());
        assert!(QuadratureGrid::new(6.0, 0.007).is_err());
    }

    #[test]
    fn normalizations() {
        let g = QuadratureGrid::new(6.0, 0.005).unwrap();
        // 2-D joint density on a product grid
        let total: f64 = g
            .points()
            .map(|x| g.integrate(&g.sample(|y| homodyne_joint(x, y))))
            .sum::<f64>()
            * g.step;
        assert!((total - 1.0).abs() < 1e-8);

        let g = QuadratureGrid::default();
        assert!((g.integrate(&g.sample(homodyne_marginal_y)) - 1.0).abs() < 1e-8);
        for y in [0.0, 0.4, 1.3, -2.0] {
            let marg = g.integrate(&g.sample(|x| homodyne_joint(x, y)));
            assert!((marg - homodyne_marginal_y(y)).abs() < 1e-8);
            assert!((g.integrate(&g.sample(|x| homodyne_conditional(x, y))) - 1.0).abs() < 1e-10);
            assert!((g.integrate(&g.sample(|x| deconvolved_py_closed(x, y))) - 1.0).abs() < 1e-10);
            assert!((g.integrate(&g.sample(|x| smeared_x_povm_weight(x, y))) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bayes_identity() {
        for x in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            for y in [-1.5, 0.0, 0.2, 0.9] {
                let lhs = homodyne_conditional(x, y) * homodyne_marginal_y(y);
                assert!((lhs - homodyne_joint(x, y)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smearing_the_closed_form_recovers_the_conditional() {
        let g = QuadratureGrid::default();
        for y in [0.0, 0.6, 1.0] {
            let py = g.sample(|x| deconvolved_py_closed(x, y));
            let smeared = smear_on_grid(&g, &py);
            for (x, v) in g.points().zip(&smeared) {
                assert!((v - homodyne_conditional(x, y)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn numeric_deconvolution_matches_closed_form() {
        let g = QuadratureGrid::default();
        for y in [0.0, 0.3, FRAC_1_SQRT_2, 1.0, 2.0] {
            let r = deconvolve_numeric(y, &g);
            let worst = g
                .points()
                .zip(&r.values)
                .filter(|(x, _)| x.abs() <= g.half_width / 2.0)
                .map(|(x, v)| (v - deconvolved_py_closed(x, y)).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-6, "y = {y}: {worst:e}");
            assert!(r.normalization_defect < 1e-6);
        }
        let r = deconvolve_numeric(0.0, &g);
        assert!(r.min_location.abs() < 1e-12);
        assert!((r.min_value + 0.79788456080286541).abs() < 1e-6);
        assert!(r.negative);
        assert!(!deconvolve_numeric(1.0, &g).negative);
    }

    #[test]
    fn negativity_threshold() {
        assert_eq!(regime(0.0), Regime::Negative);
        assert_eq!(regime(0.70710678), Regime::Boundary);
        assert_eq!(regime(1.0), Regime::NonNegative);
        assert!(negativity_region(0.0));
        assert!(!negativity_region(1.0));
        assert!(!negativity_region(FRAC_1_SQRT_2));
        assert!(deconvolved_py_closed(0.0, FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
