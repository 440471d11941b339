//! JSON and CSV emitters.
//!
//! Floating-point values are written with 17 significant digits in
//! scientific notation so that they round-trip exactly; non-finite values
//! become `null` in JSON and empty cells in CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::args::RunConfig;

/// Pretty-printing formatter with round-trip float output.
struct ExactFloats(PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{}", float(v))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `v` with 17 significant digits, e.g. `2.5000000000000000e-1`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV cell: empty when the value is missing or not finite.
pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => float(v),
        _ => String::new(),
    }
}

pub fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    config: &'a RunConfig<'a>,
    library_version: &'static str,
    results: &'a R,
}

pub fn write_json<W: Write + ?Sized, R: Serialize>(w: &mut W, config: &RunConfig, results: &R) -> io::Result<()> {
    let envelope = Envelope {
        config,
        library_version: qcond::VERSION,
        results,
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut *w, ExactFloats(PrettyFormatter::new()));
    envelope.serialize(&mut ser).map_err(io::Error::other)?;
    writeln!(w)
}

/// Stdout or a buffered file.
pub fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}
