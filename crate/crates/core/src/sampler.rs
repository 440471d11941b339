//! Monte Carlo measurement records and their analysis.
//!
//! Draws are split into fixed shards of [`SHARD_SIZE`]; shard `i` uses a
//! ChaCha20 generator seeded from the master seed with stream id `i`. Counts
//! therefore do not depend on how many worker threads run the shards.

use rayon::prelude::*;
use rand::Rng;
use serde::Serialize;

use crate::conditional::conditional_slice;
use crate::nonclassical::SmearingKernels;
use crate::povm::{JointDistribution, NoisyJointPovm, Outcome, OutcomeTable};
use crate::qubit::seeded_rng;
use crate::{Error, Result};

/// Identifier embedded in sampled output.
pub const RNG_ALGORITHM: &str =
    "ChaCha20Rng (rand_chacha 0.9) seed_from_u64(seed), stream = shard index, shard size 2^20";

pub const SHARD_SIZE: u64 = 1 << 20;

/// Counts of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRun {
    pub seed: u64,
    pub draws: u64,
    pub counts: OutcomeTable<u64>,
    pub empirical: JointDistribution,
}

/// Inverse-CDF sampler over the cells in [`OutcomeTable::iter`] order.
struct CellSampler {
    cumulative: [f64; 4],
    fallback: usize,
}

impl CellSampler {
    fn new(d: &JointDistribution) -> Self {
        let flat = d.table().to_flat();
        let mut cumulative = [0.0; 4];
        let mut acc = 0.0;
        for (c, p) in cumulative.iter_mut().zip(flat) {
            acc += p.max(0.0);
            *c = acc;
        }
        // draws past the rounded total land on the last cell with mass
        let fallback = flat.iter().rposition(|&p| p > 0.0).unwrap_or(3);
        Self {
            cumulative,
            fallback,
        }
    }

    fn cell(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.fallback)
    }
}

/// Draws `draws` i.i.d. outcome pairs from `d`.
pub fn sample_joint(d: &JointDistribution, draws: u64, seed: u64) -> Result<SampleRun> {
    if draws == 0 {
        return Err(Error::EmptyRun);
    }
    let sampler = CellSampler::new(d);
    let shards = draws.div_ceil(SHARD_SIZE);
    let flat = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = seeded_rng(seed);
            rng.set_stream(shard);
            let n = SHARD_SIZE.min(draws - shard * SHARD_SIZE);
            let mut counts = [0u64; 4];
            for _ in 0..n {
                counts[sampler.cell(rng.random::<f64>())] += 1;
            }
            counts
        })
        .reduce(
            || [0u64; 4],
            |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
        );
    let counts = OutcomeTable::from_flat(flat);
    let empirical = JointDistribution::new(counts.map(|c| c as f64 / draws as f64))?;
    Ok(SampleRun {
        seed,
        draws,
        counts,
        empirical,
    })
}

/// An estimate with its first-order standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Multinomial delta method: `Var = gᵀ (diag(f) − f fᵀ) g / N`.
fn delta_method(freq: &[f64; 4], grad: &[f64; 4], draws: u64) -> f64 {
    let mean: f64 = grad.iter().zip(freq).map(|(g, f)| g * f).sum();
    let second: f64 = grad.iter().zip(freq).map(|(g, f)| g * g * f).sum();
    ((second - mean * mean).max(0.0) / draws as f64).sqrt()
}

/// Empirical conditional for one `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalConditional {
    pub y: Outcome,
    pub p_y: f64,
    pub conditional: [f64; 2],
    /// `t_X = (f(+,y) − f(−,y)) / (γ_X (f(+,y) + f(−,y)))`; absent when `γ_X = 0`.
    pub t_x: Option<Estimate>,
    /// `|t_X| ≤ 1` at the point estimate.
    pub exists: Option<bool>,
}

/// Results of feeding empirical frequencies through the analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalAnalysis {
    pub frequencies: JointDistribution,
    /// Per `y`; `None` when that `y` was never observed.
    pub conditionals: [Option<EmpiricalConditional>; 2],
    /// Inverted quasi-distribution; absent when the noise is not invertible.
    pub quasi: Option<OutcomeTable<Estimate>>,
    pub min_quasi: Option<Estimate>,
}

pub fn empirical_pipeline(run: &SampleRun, povm: &NoisyJointPovm) -> Result<EmpiricalAnalysis> {
    if run.draws == 0 {
        return Err(Error::EmptyRun);
    }
    let d = run.empirical;
    let freq = d.table().to_flat();
    let gx = povm.gamma_x();

    let conditionals = Outcome::ALL.map(|y| {
        let slice = conditional_slice(&d, y).ok()?;
        let t_x = (gx > 0.0).then(|| {
            let a = d[(Outcome::Plus, y)];
            let b = d[(Outcome::Minus, y)];
            let s = a + b;
            let value = (a - b) / (gx * s);
            let mut grad = [0.0; 4];
            grad[OutcomeTable::<f64>::flat_index(Outcome::Plus, y)] = 2.0 * b / (gx * s * s);
            grad[OutcomeTable::<f64>::flat_index(Outcome::Minus, y)] = -2.0 * a / (gx * s * s);
            Estimate {
                value,
                std_error: delta_method(&freq, &grad, run.draws),
            }
        });
        Some(EmpiricalConditional {
            y,
            p_y: slice.p_y,
            conditional: slice.probs,
            exists: t_x.map(|t| t.value.abs() <= 1.0),
            t_x,
        })
    });

    let (quasi, min_quasi) = match SmearingKernels::new(povm) {
        Ok(k) => {
            let table = OutcomeTable::from_fn(|x, y| {
                let grad = OutcomeTable::from_fn(|xp, yp| k.mu_x[x.index()][xp.index()] * k.mu_y[y.index()][yp.index()])
                    .to_flat();
                let value = grad.iter().zip(&freq).map(|(g, f)| g * f).sum();
                Estimate {
                    value,
                    std_error: delta_method(&freq, &grad, run.draws),
                }
            });
            let min = table
                .iter()
                .map(|(_, _, e)| e)
                .fold(None, |best: Option<Estimate>, e| match best {
                    Some(b) if b.value <= e.value => Some(b),
                    _ => Some(e),
                });
            (Some(table), min)
        }
        Err(Error::InversionUndefined { .. }) => (None, None),
        Err(e) => return Err(e),
    };

    Ok(EmpiricalAnalysis {
        frequencies: d,
        conditionals,
        quasi,
        min_quasi,
    })
}
