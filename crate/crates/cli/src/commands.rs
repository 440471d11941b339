use std::io::Write;

use qcond::audit::{audit_theorem2_grid, audit_theorem2_random, audit_theorem3, audit_theorem4, AuditSummary};
use qcond::conditional::{conditional_slice, solve_conditional_state, ConditionalReport};
use qcond::homodyne::{deconvolve_closed, deconvolve_numeric, regime, DeconvolutionResult, QuadratureGrid, Regime};
use qcond::nonclassical::{inverted_conditional_state, quasi_closed_form, theorem4_audit, QuasiDistribution, Theorem4Verdict};
use qcond::povm::{MarginalPair, Method, ValidationReport};
use qcond::sampler::{empirical_pipeline, sample_joint, EmpiricalAnalysis, RNG_ALGORITHM, SHARD_SIZE};
use qcond::{BlochVector, JointDistribution, NoisyJointPovm, Outcome, OutcomeTable};
use serde::Serialize;

use crate::args::{AnalyzeArgs, AuditArgs, Format, HomodyneArgs, RunConfig, SampleArgs};
use crate::output::{cell, flag, float, write_json};
use crate::{CliError, Status};

/// A value, or the reason it could not be computed.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Maybe<T> {
    Value(T),
    Unavailable { unavailable: String },
}

impl<T> From<qcond::Result<T>> for Maybe<T> {
    fn from(r: qcond::Result<T>) -> Self {
        match r {
            Ok(v) => Maybe::Value(v),
            Err(e) => Maybe::Unavailable { unavailable: e.to_string() },
        }
    }
}

#[derive(Debug, Serialize)]
struct PovmReport {
    gamma_x: f64,
    gamma_y: f64,
    gamma_xy: f64,
    validation: ValidationReport,
}

impl PovmReport {
    fn new(p: &NoisyJointPovm) -> Self {
        Self {
            gamma_x: p.gamma_x(),
            gamma_y: p.gamma_y(),
            gamma_xy: p.gamma_xy(),
            validation: p.validate(),
        }
    }
}

#[derive(Debug, Serialize)]
struct PerOutcome {
    y: Outcome,
    p_y: f64,
    noisy: Maybe<ConditionalReport>,
    inverted: Maybe<ConditionalReport>,
}

#[derive(Debug, Serialize)]
struct QuasiReport {
    distribution: QuasiDistribution,
    min: f64,
    nonclassical: bool,
}

#[derive(Debug, Serialize)]
struct AnalyzeResults {
    povm: PovmReport,
    state: BlochVector,
    joint: JointDistribution,
    marginals: MarginalPair,
    conditionals: [PerOutcome; 2],
    quasi: Maybe<QuasiReport>,
    equivalence: Maybe<Theorem4Verdict>,
}

/// One line of the sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_xy: f64,
    pub s_x: f64,
    pub s_y: f64,
    pub s_z: f64,
    pub y: Outcome,
    pub t_x_noisy: Option<f64>,
    pub exists_noisy: Option<bool>,
    pub t_x_inverted: Option<f64>,
    pub exists_inverted: Option<bool>,
    #[serde(rename = "min_P")]
    pub min_p: Option<f64>,
    pub nonclassical: Option<bool>,
}

pub const CSV_HEADER: &str =
    "gamma_x,gamma_y,gamma_xy,s_x,s_y,s_z,y,t_x_noisy,exists_noisy,t_x_inverted,exists_inverted,min_P,nonclassical";

impl Row {
    pub fn new(povm: &NoisyJointPovm, s: &BlochVector, y: Outcome) -> Self {
        let noisy = solve_conditional_state(povm, s, y).ok();
        let inverted = inverted_conditional_state(povm, s, y).ok();
        let quasi = quasi_closed_form(povm, s).ok();
        Self {
            gamma_x: povm.gamma_x(),
            gamma_y: povm.gamma_y(),
            gamma_xy: povm.gamma_xy(),
            s_x: s.x,
            s_y: s.y,
            s_z: s.z,
            y,
            t_x_noisy: noisy.map(|r| r.t_x),
            exists_noisy: noisy.map(|r| r.exists),
            t_x_inverted: inverted.map(|r| r.t_x),
            exists_inverted: inverted.map(|r| r.exists),
            min_p: quasi.map(|q| q.min()),
            nonclassical: quasi.map(|q| q.is_nonclassical()),
        }
    }

    pub fn csv(&self) -> String {
        [
            float(self.gamma_x),
            float(self.gamma_y),
            float(self.gamma_xy),
            float(self.s_x),
            float(self.s_y),
            float(self.s_z),
            self.y.as_i8().to_string(),
            cell(self.t_x_noisy),
            flag(self.exists_noisy).into(),
            cell(self.t_x_inverted),
            flag(self.exists_inverted).into(),
            cell(self.min_p),
            flag(self.nonclassical).into(),
        ]
        .join(",")
    }
}

pub fn analyze(args: &AnalyzeArgs, config: &RunConfig, w: &mut dyn Write) -> Result<Status, CliError> {
    let povm = args.povm.resolve()?;
    let (s, _) = args.state.resolve(&povm)?;
    if config.format == Format::Csv {
        writeln!(w, "{CSV_HEADER}")?;
        for y in Outcome::ALL {
            writeln!(w, "{}", Row::new(&povm, &s, y).csv())?;
        }
        return Ok(Status::Success);
    }

    let joint = povm.joint_distribution(&s, Method::ClosedForm)?;
    let conditionals = Outcome::ALL.map(|y| PerOutcome {
        y,
        p_y: joint.p_y(y),
        noisy: conditional_slice(&joint, y)
            .and_then(|_| solve_conditional_state(&povm, &s, y))
            .into(),
        inverted: inverted_conditional_state(&povm, &s, y).into(),
    });
    let quasi = quasi_closed_form(&povm, &s).map(|q| QuasiReport {
        min: q.min(),
        nonclassical: q.is_nonclassical(),
        distribution: q,
    });
    let results = AnalyzeResults {
        povm: PovmReport::new(&povm),
        state: s,
        marginals: joint.marginals(),
        joint,
        conditionals,
        quasi: quasi.into(),
        equivalence: theorem4_audit(&povm, &s).into(),
    };
    write_json(w, config, &results)?;
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct AuditResults {
    passed: bool,
    #[serde(flatten)]
    summary: AuditSummary,
}

pub fn audit(args: &AuditArgs, config: &RunConfig, w: &mut dyn Write) -> Result<Status, CliError> {
    if config.format == Format::Csv {
        return Err(CliError::Invalid("audit output is json only".into()));
    }
    if args.grid.is_some() && args.theorem != 2 {
        return Err(CliError::Invalid("--grid applies to theorem 2 only".into()));
    }
    let summary = match (args.theorem, args.grid) {
        (2, Some(0)) => return Err(CliError::Invalid("--grid must be at least 1".into())),
        (2, Some(n)) => audit_theorem2_grid(n),
        (_, None) if args.draws == 0 => {
            return Err(CliError::Invalid("--draws must be at least 1".into()))
        }
        (2, None) => audit_theorem2_random(args.draws, args.seed),
        (3, None) => audit_theorem3(args.draws, args.seed),
        (4, None) => audit_theorem4(args.draws, args.seed),
        (t, _) => return Err(CliError::Invalid(format!("no audit for theorem {t}"))),
    };
    let status = audit_status(&summary);
    write_json(w, config, &AuditResults { passed: summary.passed(), summary })?;
    Ok(status)
}

pub fn audit_status(summary: &AuditSummary) -> Status {
    if summary.passed() {
        Status::Success
    } else {
        Status::Counterexample
    }
}

#[derive(Debug, Serialize)]
struct DeconvolutionSummary {
    min_value: f64,
    min_location: f64,
    normalization_defect: f64,
    negative: bool,
    frequency_cutoff: Option<f64>,
    modes_discarded: usize,
}

impl From<&DeconvolutionResult> for DeconvolutionSummary {
    fn from(r: &DeconvolutionResult) -> Self {
        Self {
            min_value: r.min_value,
            min_location: r.min_location,
            normalization_defect: r.normalization_defect,
            negative: r.negative,
            frequency_cutoff: r.frequency_cutoff,
            modes_discarded: r.modes_discarded,
        }
    }
}

#[derive(Debug, Serialize)]
struct Samples {
    x: Vec<f64>,
    closed: Vec<f64>,
    numeric: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct HomodyneResults {
    y: f64,
    grid: QuadratureGrid,
    /// Analytic classification relative to `y² = 1/2`.
    regime: Regime,
    /// Verdict of the numerical path.
    negative: bool,
    closed: DeconvolutionSummary,
    numeric: DeconvolutionSummary,
    max_deviation: f64,
    samples: Samples,
}

pub fn homodyne(args: &HomodyneArgs, config: &RunConfig, w: &mut dyn Write) -> Result<Status, CliError> {
    if !args.y.is_finite() {
        return Err(CliError::Invalid(format!("y must be finite, got {}", args.y)));
    }
    let grid = QuadratureGrid::new(args.half_width, args.step)?;
    let closed = deconvolve_closed(args.y, &grid);
    let numeric = deconvolve_numeric(args.y, &grid);
    let x: Vec<f64> = grid.points().collect();

    if config.format == Format::Csv {
        writeln!(w, "x,p_y_closed,p_y_numeric")?;
        for ((x, c), n) in x.iter().zip(&closed.values).zip(&numeric.values) {
            writeln!(w, "{},{},{}", float(*x), float(*c), float(*n))?;
        }
        return Ok(Status::Success);
    }

    let max_deviation = closed
        .values
        .iter()
        .zip(&numeric.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let results = HomodyneResults {
        y: args.y,
        grid,
        regime: regime(args.y),
        negative: numeric.negative,
        closed: (&closed).into(),
        numeric: (&numeric).into(),
        max_deviation,
        samples: Samples {
            x,
            closed: closed.values,
            numeric: numeric.values,
        },
    };
    write_json(w, config, &results)?;
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct Analytic {
    joint: JointDistribution,
    t_x: [Option<f64>; 2],
    min_quasi: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SampleResults {
    rng_algorithm: &'static str,
    shard_size: u64,
    povm: PovmReport,
    state: BlochVector,
    witness_outcome: Option<Outcome>,
    seed: u64,
    draws: u64,
    counts: OutcomeTable<u64>,
    empirical: EmpiricalAnalysis,
    analytic: Analytic,
    max_abs_deviation: f64,
}

pub fn sample(args: &SampleArgs, config: &RunConfig, w: &mut dyn Write) -> Result<Status, CliError> {
    if config.format == Format::Csv {
        return Err(CliError::Invalid("sample output is json only".into()));
    }
    let povm = args.povm.resolve()?;
    let (s, witness_outcome) = args.state.resolve(&povm)?;
    let d = povm.joint_distribution(&s, Method::ClosedForm)?;
    let run = sample_joint(&d, args.draws, args.seed)?;
    let empirical = empirical_pipeline(&run, &povm)?;
    let analytic = Analytic {
        joint: d,
        t_x: Outcome::ALL.map(|y| solve_conditional_state(&povm, &s, y).ok().map(|r| r.t_x)),
        min_quasi: quasi_closed_form(&povm, &s).ok().map(|q| q.min()),
    };
    let results = SampleResults {
        rng_algorithm: RNG_ALGORITHM,
        shard_size: SHARD_SIZE,
        povm: PovmReport::new(&povm),
        state: s,
        witness_outcome,
        seed: run.seed,
        draws: run.draws,
        counts: run.counts,
        max_abs_deviation: run.empirical.table().max_abs_diff(d.table()),
        empirical,
        analytic,
    };
    write_json(w, config, &results)?;
    Ok(Status::Success)
}
