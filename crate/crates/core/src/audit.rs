//! Randomized and grid audits of the existence and negativity theorems,
//! plus the random generators they draw from.
//!
//! Randomized audits are split into chunks of [`CHUNK`] draws. Chunk `i`
//! runs its own ChaCha20 stream `i` of the master seed, so results are
//! identical whatever the thread count.

use nalgebra::{Matrix2, Matrix4};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditional::{solve_conditional_state, theorem2_witness};
use crate::nonclassical::{theorem3_audit, theorem4_audit};
use crate::povm::{NoisyJointPovm, Outcome};
use crate::qubit::{random_state, seeded_rng, BlochVector, PauliDecomp, SamplingMode, C64};
use crate::tolerance::EPS_POS;

pub const CHUNK: u64 = 1 << 14;

/// Counterexamples kept in a summary; the count is always exact.
pub const MAX_LOGGED: usize = 100;

/// Tolerance for the witness value `t_X = 1/sqrt(1 − γ_Y²)`.
pub const WITNESS_TOL: f64 = 1e-12;

/// A POVM with `(γ_X, γ_Y, γ_XY)` uniform in the positive octant of the unit ball.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R) -> NoisyJointPovm {
    let g = random_state(rng, SamplingMode::BallUniform);
    NoisyJointPovm::new(g.x.abs(), g.y.abs(), g.z.abs()).expect("ball sample is a valid POVM")
}

/// Random two-qubit density matrix `G G† / tr(G G†)` from a complex Ginibre `G`.
pub fn random_density4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    let g = Matrix4::from_fn(|_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random qubit effect `0 ≤ E ≤ I`.
pub fn random_effect2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let c0: f64 = rng.random_range(0.0..1.0);
    let r = c0.min(1.0 - c0);
    let v = random_state(rng, SamplingMode::BallUniform);
    PauliDecomp::new(c0, [v.x * r, v.y * r, v.z * r]).to_matrix2()
}

/// One input that the audit flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub gammas: [f64; 3],
    pub state: BlochVector,
    pub y: Option<Outcome>,
    pub t_x: Option<f64>,
    pub min_quasi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSummary {
    pub theorem: u8,
    pub draws: u64,
    pub seed: Option<u64>,
    /// Instances on which the statement was actually judged.
    pub evaluated: u64,
    /// Instances outside the statement's hypotheses (e.g. vanishing `p_Y`).
    pub skipped: u64,
    /// Instances inside the boundary band.
    pub boundary_excluded: u64,
    pub counterexamples: u64,
    /// At most [`MAX_LOGGED`] counterexamples, in draw order.
    pub logged: Vec<Counterexample>,
}

impl AuditSummary {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }

    fn empty(theorem: u8, draws: u64, seed: Option<u64>) -> Self {
        Self {
            theorem,
            draws,
            seed,
            evaluated: 0,
            skipped: 0,
            boundary_excluded: 0,
            counterexamples: 0,
            logged: Vec::new(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self.boundary_excluded += other.boundary_excluded;
        self.counterexamples += other.counterexamples;
        let room = MAX_LOGGED.saturating_sub(self.logged.len());
        self.logged.extend(other.logged.into_iter().take(room));
        self
    }

    fn record(&mut self, c: Counterexample) {
        self.counterexamples += 1;
        if self.logged.len() < MAX_LOGGED {
            self.logged.push(c);
        }
    }
}

fn chunked<F>(theorem: u8, draws: u64, seed: u64, per_draw: F) -> AuditSummary
where
    F: Fn(&mut rand_chacha::ChaCha20Rng, &mut AuditSummary) + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<AuditSummary> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seeded_rng(seed);
            rng.set_stream(chunk);
            let n = CHUNK.min(draws - chunk * CHUNK);
            let mut part = AuditSummary::empty(theorem, 0, None);
            for _ in 0..n {
                per_draw(&mut rng, &mut part);
            }
            part
        })
        .collect();
    // merge in chunk order so the counterexample log is deterministic
    parts
        .into_iter()
        .fold(AuditSummary::empty(theorem, draws, Some(seed)), AuditSummary::merge)
}

fn random_outcome<R: Rng + ?Sized>(rng: &mut R) -> Outcome {
    if rng.random::<bool>() {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Checks one POVM: the witness must give `t_X = 1/sqrt(1 − γ_Y²)` and no
/// conditional state.
fn check_witness(povm: &NoisyJointPovm, summary: &mut AuditSummary) {
    let Ok((s, y)) = theorem2_witness(povm) else {
        summary.skipped += 1;
        return;
    };
    let expected = 1.0 / (1.0 - povm.gamma_y().powi(2)).sqrt();
    match solve_conditional_state(povm, &s, y) {
        // t_X exceeds 1 by about γ_Y²/2, which tiny γ_Y hides in the band
        Ok(_) if expected - 1.0 <= EPS_POS => summary.boundary_excluded += 1,
        Ok(r) => {
            summary.evaluated += 1;
            if r.exists || (r.t_x - expected).abs() > WITNESS_TOL * expected {
                summary.record(Counterexample {
                    gammas: povm.gammas(),
                    state: s,
                    y: Some(y),
                    t_x: Some(r.t_x),
                    min_quasi: None,
                });
            }
        }
        Err(_) => summary.skipped += 1,
    }
}

/// Witness check on an `n × n` grid: `γ_Y = (i+1)/(n+1)`,
/// `γ_X = (j+1)/n · sqrt(1 − γ_Y²)` and `γ_XY` completing the unit sphere.
pub fn audit_theorem2_grid(n: usize) -> AuditSummary {
    let mut summary = AuditSummary::empty(2, (n * n) as u64, None);
    for i in 0..n {
        let gy = (i + 1) as f64 / (n + 1) as f64;
        let room = (1.0 - gy * gy).sqrt();
        for j in 0..n {
            let gx = (j + 1) as f64 / n as f64 * room;
            let gxy = (1.0 - gx * gx - gy * gy).max(0.0).sqrt();
            match NoisyJointPovm::new(gx, gy, gxy) {
                Ok(p) => check_witness(&p, &mut summary),
                Err(_) => summary.skipped += 1,
            }
        }
    }
    summary
}

/// Witness check on random POVMs.
pub fn audit_theorem2_random(draws: u64, seed: u64) -> AuditSummary {
    chunked(2, draws, seed, |rng, part| {
        let p = random_povm(rng);
        check_witness(&p, part);
    })
}

/// Counts draws with no conditional state yet non-negative `P`.
pub fn audit_theorem3(draws: u64, seed: u64) -> AuditSummary {
    chunked(3, draws, seed, |rng, part| {
        let p = random_povm(rng);
        let s = random_state(rng, SamplingMode::BallUniform);
        let y = random_outcome(rng);
        match theorem3_audit(&p, &s, y) {
            Ok(v) => {
                part.evaluated += 1;
                if !v.holds {
                    part.record(Counterexample {
                        gammas: p.gammas(),
                        state: s,
                        y: Some(y),
                        t_x: Some(v.t_x),
                        min_quasi: Some(v.min_quasi),
                    });
                }
            }
            Err(_) => part.skipped += 1,
        }
    })
}

/// Counts draws where nonexistence after inversion and negativity of `P`
/// disagree, away from the boundary band.
pub fn audit_theorem4(draws: u64, seed: u64) -> AuditSummary {
    chunked(4, draws, seed, |rng, part| {
        let p = random_povm(rng);
        let s = random_state(rng, SamplingMode::BallUniform);
        match theorem4_audit(&p, &s) {
            Ok(v) if v.in_boundary_band => part.boundary_excluded += 1,
            Ok(v) => {
                part.evaluated += 1;
                if !v.agree {
                    let t = v.t_inverted.iter().flatten().copied().fold(0.0, |a: f64, b| {
                        if b.abs() > a.abs() {
                            b
                        } else {
                            a
                        }
                    });
                    part.record(Counterexample {
                        gammas: p.gammas(),
                        state: s,
                        y: None,
                        t_x: Some(t),
                        min_quasi: Some(v.min_quasi),
                    });
                }
            }
            Err(_) => part.skipped += 1,
        }
    })
}
