//! Grid sweeps over accuracy factors, state and conditioning outcome.
//!
//! Grid points vary fastest in the last axis (`y`) and slowest in `γ_X`.
//! Points with an invalid POVM or state are skipped. Rows are computed in
//! parallel blocks and written in grid order, so the output does not depend
//! on the thread count.

use std::io::Write;

use qcond::{BlochVector, NoisyJointPovm, Outcome};
use rayon::prelude::*;

use crate::args::{Axis, Format, RunConfig, SweepArgs, YChoice};
use crate::commands::{Row, CSV_HEADER};
use crate::output::write_json;
use crate::{CliError, Status};

pub const MAX_ROWS: u128 = 10_000_000;

const BLOCK: usize = 1 << 14;

struct Grid {
    axes: [Axis; 6],
    ys: Vec<Outcome>,
}

impl Grid {
    fn new(args: &SweepArgs) -> Self {
        let ys = match args.y {
            YChoice::Plus => vec![Outcome::Plus],
            YChoice::Minus => vec![Outcome::Minus],
            YChoice::Both => vec![Outcome::Plus, Outcome::Minus],
        };
        Self {
            axes: [args.gamma_x, args.gamma_y, args.gamma_xy, args.s_x, args.s_y, args.s_z],
            ys,
        }
    }

    fn len(&self) -> u128 {
        self.axes.iter().map(|a| a.count as u128).product::<u128>() * self.ys.len() as u128
    }

    /// Row for flat index `i`, or `None` when the point is invalid.
    fn row(&self, mut i: usize) -> Option<Row> {
        let y = self.ys[i % self.ys.len()];
        i /= self.ys.len();
        let mut v = [0.0; 6];
        for (slot, axis) in v.iter_mut().zip(&self.axes).rev() {
            *slot = axis.value(i % axis.count);
            i /= axis.count;
        }
        let povm = NoisyJointPovm::new(v[0], v[1], v[2]).ok()?;
        let s = BlochVector::state(v[3], v[4], v[5]).ok()?;
        Some(Row::new(&povm, &s, y))
    }
}

pub fn sweep(args: &SweepArgs, config: &RunConfig, w: &mut dyn Write) -> Result<Status, CliError> {
    let grid = Grid::new(args);
    let len = grid.len();
    if len > MAX_ROWS {
        return Err(CliError::Invalid(format!(
            "grid has {len} rows, above the limit of {MAX_ROWS}; reduce an axis count or fix y"
        )));
    }
    let len = len as usize;

    let mut skipped = 0usize;
    let mut json_rows = Vec::new();
    if config.format == Format::Csv {
        writeln!(w, "{CSV_HEADER}")?;
    }
    for start in (0..len).step_by(BLOCK) {
        let block: Vec<Option<Row>> = (start..(start + BLOCK).min(len))
            .into_par_iter()
            .map(|i| grid.row(i))
            .collect();
        for row in block {
            match row {
                None => skipped += 1,
                Some(r) if config.format == Format::Csv => writeln!(w, "{}", r.csv())?,
                Some(r) => json_rows.push(r),
            }
        }
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} grid rows with an invalid POVM or state");
    }
    if config.format == Format::Json {
        write_json(w, config, &json_rows)?;
    }
    Ok(Status::Success)
}
