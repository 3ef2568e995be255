//! Plain-text CSV exchange for matrices: one row per line, comma separated,
//! complex entries written as `re+imj`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matdecomp::{ComplexMatrix, RealMatrix};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn fmt_complex(z: Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", fmt_f64(z.re), sign, fmt_f64(im.abs()))
}

fn rows(text: &str) -> Vec<Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::trim).collect())
        .collect()
}

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite)
    }
}

/// Parses `re`, `imj`, `re+imj` or `re-imj` (a trailing `i` is accepted too).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let body = match s.strip_suffix('j').or_else(|| s.strip_suffix('i')) {
        Some(b) => b,
        None => return Ok(Complex64::new(parse_real(s)?, 0.0)),
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (parse_real(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other)?,
    };
    Ok(Complex64::new(re, im))
}

fn assemble<T: Clone + nalgebra::Scalar>(
    text: &str,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<nalgebra::DMatrix<T>> {
    let rows = rows(text);
    if rows.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }
    let ncols = rows[0].len();
    let mut data = Vec::with_capacity(rows.len() * ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {ncols}",
                i + 1,
                row.len()
            )));
        }
        for entry in row {
            data.push(parse(entry)?);
        }
    }
    Ok(nalgebra::DMatrix::from_row_slice(rows.len(), ncols, &data))
}

pub fn parse_real_csv(text: &str) -> Result<RealMatrix> {
    assemble(text, parse_real)
}

pub fn parse_complex_csv(text: &str) -> Result<ComplexMatrix> {
    assemble(text, parse_complex)
}

pub fn format_real_csv(m: &RealMatrix) -> String {
    let mut out = String::new();
    for r in m.row_iter() {
        let line: Vec<String> = r.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn format_complex_csv(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for r in m.row_iter() {
        let line: Vec<String> = r.iter().map(|&z| fmt_complex(z)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn read_real_csv(path: &Path) -> Result<RealMatrix> {
    parse_real_csv(&fs::read_to_string(path)?)
}

pub fn read_complex_csv(path: &Path) -> Result<ComplexMatrix> {
    parse_complex_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_is_exact() {
        let m = RealMatrix::from_row_slice(2, 3, &[0.1, -2.5e-300, 1.0 / 3.0, 7.0, -0.0, 1e300]);
        let back = parse_real_csv(&format_real_csv(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn complex_entries() {
        assert_eq!(parse_complex("1+2j").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(
            parse_complex("-1.5e-3-2e+2j").unwrap(),
            Complex64::new(-1.5e-3, -200.0)
        );
        assert_eq!(parse_complex("3j").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(parse_complex("-j").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("4").unwrap(), Complex64::new(4.0, 0.0));
        let z = Complex64::new(-0.25, 1.0 / 7.0);
        assert_eq!(parse_complex(&fmt_complex(z)).unwrap(), z);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matches!(parse_real_csv("1,2\n3\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_real_csv("1,x\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_real_csv("\n\n"), Err(Error::Parse(_))));
    }
}
