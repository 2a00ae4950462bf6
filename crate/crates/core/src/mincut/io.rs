use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SignedWeightMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    /// `n` lines of `n` comma-separated values.
    Dense,
    /// `i,j,w` lines with 0-based indices; each line sets both `W[i,j]` and `W[j,i]`.
    Triples,
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

fn parse<T: std::str::FromStr>(s: &str, row: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| Error::Parse {
        row,
        message: format!("{s:?}: {e}"),
    })
}

/// Parses a matrix file; blank lines and `#` comments are skipped.
pub fn read_matrix<T: Scalar>(text: &str, format: MatrixFormat) -> Result<SignedWeightMatrix<T>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    match format {
        MatrixFormat::Dense => {
            let n = lines.len();
            let mut data = Vec::with_capacity(n * n);
            for &(row, line) in &lines {
                let before = data.len();
                for f in fields(line) {
                    data.push(T::of(parse::<f64>(f, row)?));
                }
                if data.len() - before != n {
                    return Err(Error::Parse {
                        row,
                        message: format!("expected {n} values, found {}", data.len() - before),
                    });
                }
            }
            SignedWeightMatrix::new(n, data)
        }
        MatrixFormat::Triples => {
            let mut entries = Vec::with_capacity(lines.len());
            for &(row, line) in &lines {
                let f: Vec<&str> = fields(line).collect();
                if f.len() != 3 {
                    return Err(Error::Parse {
                        row,
                        message: format!("expected i,j,w, found {} fields", f.len()),
                    });
                }
                let i: usize = parse(f[0], row)?;
                let j: usize = parse(f[1], row)?;
                let w: f64 = parse(f[2], row)?;
                entries.push((row, i, j, w));
            }
            let n = entries.iter().map(|&(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0);
            let mut data = vec![None; n * n];
            for (row, i, j, w) in entries {
                for (a, b) in [(i, j), (j, i)] {
                    match data[a * n + b] {
                        Some(prev) if prev != w => {
                            return Err(Error::Parse {
                                row,
                                message: format!("conflicting weights for pair ({i}, {j})"),
                            })
                        }
                        _ => data[a * n + b] = Some(w),
                    }
                }
            }
            SignedWeightMatrix::new(n, data.into_iter().map(|v| T::of(v.unwrap_or(0.0))).collect())
        }
    }
}

pub fn write_matrix_dense<T: Scalar>(w: &SignedWeightMatrix<T>) -> String {
    let mut out = String::new();
    for i in 0..w.n() {
        let row: Vec<String> = w.row(i).iter().map(|v| format!("{}", v.widen())).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
