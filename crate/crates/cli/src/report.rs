//! Text and delimited reports. Every number is printed straight from the
//! solver records with 17 significant digits; nothing is recomputed here.
//!
//! The delimited form is comma separated with the header
//! `section,index,value`; indices are 1-based and empty for scalars.

use std::fmt::Write as _;

use boxdual::markov::{ReconstructionCase, Reconstruction};
use boxdual::{NoisySolution, SensitivityReport, Solution};

use crate::format::number;

/// Report layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Aligned `key: value` lines and indented vectors.
    Text,
    /// Comma-separated `section,index,value` rows.
    Delimited,
}

/// Accumulates one report in the chosen layout.
pub struct Report {
    format: Format,
    out: String,
}

impl Report {
    /// Empty report.
    pub fn new(format: Format) -> Self {
        let out = match format {
            Format::Text => String::new(),
            Format::Delimited => "section,index,value\n".to_string(),
        };
        Self { format, out }
    }

    /// Named scalar or word.
    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        match self.format {
            Format::Text => writeln!(self.out, "{key}: {value}"),
            Format::Delimited => writeln!(self.out, "{key},,{value}"),
        }
        .unwrap();
    }

    /// Named real number.
    pub fn real(&mut self, key: &str, value: f64) {
        self.field(key, number(value));
    }

    /// Named vector, one entry per line.
    pub fn vector(&mut self, key: &str, values: &[f64]) {
        if self.format == Format::Text {
            writeln!(self.out, "{key}:").unwrap();
        }
        for (i, &v) in values.iter().enumerate() {
            match self.format {
                Format::Text => writeln!(self.out, "  {:>4} {}", i + 1, number(v)),
                Format::Delimited => writeln!(self.out, "{key},{},{}", i + 1, number(v)),
            }
            .unwrap();
        }
    }

    /// Named matrix given by rows; delimited indices are `row:col`.
    pub fn matrix(&mut self, key: &str, rows: usize, cols: usize, entry: impl Fn(usize, usize) -> f64) {
        if self.format == Format::Text {
            writeln!(self.out, "{key}:").unwrap();
        }
        for i in 0..rows {
            match self.format {
                Format::Text => {
                    let row: Vec<String> = (0..cols).map(|k| number(entry(i, k))).collect();
                    writeln!(self.out, "  {}", row.join(" ")).unwrap();
                }
                Format::Delimited => {
                    for k in 0..cols {
                        writeln!(self.out, "{key},{}:{},{}", i + 1, k + 1, number(entry(i, k))).unwrap();
                    }
                }
            }
        }
    }

    /// Table with a header; text columns are space separated.
    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) {
        let sep = match self.format {
            Format::Text => " ",
            Format::Delimited => ",",
        };
        writeln!(self.out, "{}", header.join(sep)).unwrap();
        for r in rows {
            writeln!(self.out, "{}", r.join(sep)).unwrap();
        }
    }

    /// The finished report.
    pub fn finish(self) -> String {
        self.out
    }
}

/// Status word for a solution record.
pub fn status(solution: &Solution) -> &'static str {
    if solution.converged {
        "converged"
    } else {
        "not converged"
    }
}

/// Summary and vectors of a clean solve.
pub fn solution(r: &mut Report, s: &Solution) {
    r.field("status", status(s));
    r.field("iterations", s.iterations);
    r.real("dual_value", s.dual_value);
    r.real("primal_value", s.primal_value);
    r.real("gap", s.gap);
    r.real("residual", s.residual);
    r.vector("x", &s.primal);
    r.vector("lambda", &s.multiplier);
}

/// A noisy solve: the joint summary, then signal and noise separately.
pub fn noisy_solution(r: &mut Report, s: &NoisySolution) {
    let j = &s.joint;
    r.field("status", status(j));
    r.field("iterations", j.iterations);
    r.real("dual_value", j.dual_value);
    r.real("primal_value", j.primal_value);
    r.real("gap", j.gap);
    r.real("residual", j.residual);
    r.vector("x", &s.signal);
    r.vector("noise", &s.noise);
    r.vector("lambda", &j.multiplier);
}

/// Curvature weights, condition estimate and both Jacobians.
pub fn sensitivity(r: &mut Report, s: &SensitivityReport) {
    r.field("sensitivity", "available");
    r.real("condition", s.conditioning);
    r.vector("curvature", &s.weights);
    let dx = &s.primal_jacobian;
    let diag: Vec<f64> = (0..dx.rows().min(dx.cols())).map(|i| dx[(i, i)]).collect();
    r.vector("dx_dy_diagonal", &diag);
    let dl = &s.multiplier_jacobian;
    r.matrix("dlambda_dy", dl.rows(), dl.cols(), |i, k| dl[(i, k)]);
    r.matrix("dx_dy", dx.rows(), dx.cols(), |i, k| dx[(i, k)]);
}

/// State table of a Markov reconstruction, preceded in text form by a
/// summary. States are numbered from 1.
pub fn markov(r: &mut Report, case: &ReconstructionCase, rec: &Reconstruction) {
    if r.format == Format::Delimited {
        // the table replaces the section,index,value layout
        r.out.clear();
    } else {
        let rows: Vec<String> = case.observed_rows().iter().map(|i| (i + 1).to_string()).collect();
        r.field("states", case.chain().states());
        r.field("observed", rows.join(" "));
        r.real("bound", case.bound());
        r.field("status", status(&rec.solution));
        r.field("iterations", rec.solution.iterations);
        r.real("residual", rec.solution.residual);
        r.real("gap", rec.solution.gap);
        r.real("closed_form_deviation", rec.closed_form_deviation);
        if let Some(q) = rec.quality {
            r.real("sup_error", q.sup_error);
            r.real("bregman_to_truth", q.bregman);
        }
        r.out.push('\n');
    }
    let b = case.bound();
    let rows: Vec<Vec<String>> = rec
        .f
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            let truth = case.true_f().map_or(String::from("-"), |t| number(t[j]));
            vec![(j + 1).to_string(), truth, number(f), number(f), number(b - f)]
        })
        .collect();
    r.table(&["state", "true_f", "f_star", "gap_lower", "gap_upper"], &rows);
}
