//! The plain-text problem file.
//!
//! ```text
//! # comments run to the end of the line
//! dimensions M N
//! matrix
//! <M lines of N numbers>
//! bounds
//! <N lines: lower upper>
//! data
//! <M lines: y_i>
//! noise              (optional)
//! <M lines: lower upper>
//! ```
//!
//! Blocks appear in this order. Numbers are separated by spaces or tabs and
//! may use any form accepted by Rust's `f64` parser except infinities and
//! NaN. Blank lines are ignored.

use std::fmt;

use boxdual::{BoxDomain, InverseProblem, Matrix, NoisyInverseProblem};

/// Syntax error with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Line number.
    pub line: usize,
    /// Column of the offending token.
    pub column: usize,
    /// What went wrong.
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Why a problem file was rejected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    /// Not in the grammar.
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    /// Well formed but not a valid instance.
    #[error("invalid problem: {0}")]
    Invalid(#[from] boxdual::Error),
}

/// A parsed problem; the noisy form is chosen by the presence of a noise
/// block.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemFile {
    /// `A x = y`.
    Clean(InverseProblem),
    /// `A x + ε = y`.
    Noisy(NoisyInverseProblem),
}

impl ProblemFile {
    /// The `A x = y` part.
    pub fn base(&self) -> &InverseProblem {
        match self {
            ProblemFile::Clean(p) => p,
            ProblemFile::Noisy(p) => p.base(),
        }
    }
}

const KEYWORDS: [&str; 5] = ["dimensions", "matrix", "bounds", "data", "noise"];

struct Token<'a> {
    column: usize,
    text: &'a str,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl Line<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn is_keyword(&self) -> bool {
        KEYWORDS.contains(&self.tokens[0].text)
    }

    fn numbers(&self, expected: usize, block: &str) -> Result<Vec<f64>, ParseError> {
        if self.tokens.len() != expected {
            let column = self.tokens.get(expected).map_or(self.tokens[0].column, |t| t.column);
            return Err(self.error(
                column,
                format!("{block} row has {} values, expected {expected}", self.tokens.len()),
            ));
        }
        self.tokens
            .iter()
            .map(|t| match t.text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(self.error(t.column, format!("`{}` is not a finite number", t.text))),
            })
            .collect()
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (pos, c) in body.char_indices().chain([(body.len(), ' ')]) {
                match (c.is_whitespace(), start) {
                    (false, None) => start = Some(pos),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            column: body[..s].chars().count() + 1,
                            text: &body[s..pos],
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
            (!tokens.is_empty()).then_some(Line { number: i + 1, tokens })
        })
        .collect()
}

struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    at: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn eof_error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.last_line,
            column: 1,
            message: message.into(),
        }
    }

    /// Consumes a line holding exactly `name`.
    fn expect_keyword(&mut self, name: &str) -> Result<(), ParseError> {
        let Some(line) = self.lines.get(self.at) else {
            return Err(self.eof_error(format!("missing `{name}` block")));
        };
        if line.tokens[0].text != name {
            return Err(line.error(line.tokens[0].column, format!("expected `{name}`, found `{}`", line.tokens[0].text)));
        }
        if let Some(extra) = line.tokens.get(1) {
            return Err(line.error(extra.column, format!("unexpected `{}` after `{name}`", extra.text)));
        }
        self.at += 1;
        Ok(())
    }

    /// Reads the rows up to the next keyword or the end of input.
    fn block(&mut self, name: &str, rows: usize, width: usize) -> Result<Vec<Vec<f64>>, ParseError> {
        let header = self.lines[self.at - 1].number;
        let start = self.at;
        while self.at < self.lines.len() && !self.lines[self.at].is_keyword() {
            self.at += 1;
        }
        let body = &self.lines[start..self.at];
        if body.len() != rows {
            let (line, column) = match body.get(rows) {
                Some(extra) => (extra.number, extra.tokens[0].column),
                None => (body.last().map_or(header, |l| l.number), 1),
            };
            return Err(ParseError {
                line,
                column,
                message: format!("`{name}` block has {} rows, expected {rows}", body.len()),
            });
        }
        body.iter().map(|l| l.numbers(width, name)).collect()
    }
}

fn dimension(line: &Line<'_>, index: usize, what: &str) -> Result<usize, ParseError> {
    let Some(tok) = line.tokens.get(index) else {
        return Err(line.error(1, format!("`dimensions` needs M and N, {what} is missing")));
    };
    match tok.text.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(line.error(tok.column, format!("{what} must be a positive integer, found `{}`", tok.text))),
    }
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, FormatError> {
    let lines = tokenize(text);
    let last_line = lines.last().map_or(1, |l| l.number);
    let mut cur = Cursor { lines, at: 0, last_line };

    let Some(head) = cur.lines.first() else {
        return Err(cur.eof_error("empty problem file").into());
    };
    if head.tokens[0].text != "dimensions" {
        return Err(head.error(head.tokens[0].column, "file must start with `dimensions M N`").into());
    }
    let m = dimension(head, 1, "M")?;
    let n = dimension(head, 2, "N")?;
    if let Some(extra) = head.tokens.get(3) {
        return Err(head.error(extra.column, format!("unexpected `{}` after the dimensions", extra.text)).into());
    }
    cur.at = 1;

    cur.expect_keyword("matrix")?;
    let rows = cur.block("matrix", m, n)?;
    cur.expect_keyword("bounds")?;
    let bounds = cur.block("bounds", n, 2)?;
    cur.expect_keyword("data")?;
    let data = cur.block("data", m, 1)?;
    let noise = if cur.at < cur.lines.len() {
        cur.expect_keyword("noise")?;
        Some(cur.block("noise", m, 2)?)
    } else {
        None
    };
    if let Some(line) = cur.lines.get(cur.at) {
        return Err(line.error(line.tokens[0].column, format!("unexpected `{}`", line.tokens[0].text)).into());
    }

    let matrix = Matrix::new(m, n, rows.concat())?;
    let split = |pairs: Vec<Vec<f64>>| -> (Vec<f64>, Vec<f64>) { pairs.into_iter().map(|r| (r[0], r[1])).unzip() };
    let (lower, upper) = split(bounds);
    let problem = InverseProblem::new(matrix, data.concat(), BoxDomain::new(lower, upper)?)?;
    Ok(match noise {
        None => ProblemFile::Clean(problem),
        Some(pairs) => {
            let (lower, upper) = split(pairs);
            ProblemFile::Noisy(NoisyInverseProblem::new(problem, BoxDomain::new(lower, upper)?)?)
        }
    })
}

/// Exact decimal form of a double: 17 significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `problem` in the grammar accepted by [`parse_problem`]; parsing
/// the output gives back the same instance bit for bit.
pub fn render_problem(problem: &ProblemFile) -> String {
    let base = problem.base();
    let a = base.matrix();
    let mut out = format!("dimensions {} {}\nmatrix\n", a.rows(), a.cols());
    let join = |vals: &[f64]| vals.iter().map(|&v| number(v)).collect::<Vec<_>>().join(" ");
    for i in 0..a.rows() {
        out.push_str(&join(a.row(i)));
        out.push('\n');
    }
    let pairs = |out: &mut String, dom: &BoxDomain| {
        for (lo, hi) in dom.lower().iter().zip(dom.upper()) {
            out.push_str(&join(&[*lo, *hi]));
            out.push('\n');
        }
    };
    out.push_str("bounds\n");
    pairs(&mut out, base.domain());
    out.push_str("data\n");
    for &y in base.data() {
        out.push_str(&number(y));
        out.push('\n');
    }
    if let ProblemFile::Noisy(p) = problem {
        out.push_str("noise\n");
        pairs(&mut out, p.noise_domain());
    }
    out
}
