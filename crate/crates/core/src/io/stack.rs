//! Matrix-stack text format.
//!
//! ```text
//! # optional comments
//! c=2,r=3,N=2
//! 1,2,3
//! 4,5,6
//!
//! 7,8,9
//! 10,11,12
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::format_float;
use crate::dataset::MatrixDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn read_matrix_stack<T: Scalar>(path: impl AsRef<Path>) -> Result<MatrixDataset<T>> {
    parse_matrix_stack(&std::fs::read_to_string(path)?)
}

pub fn write_matrix_stack<T: Scalar>(data: &MatrixDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_matrix_stack(data))?;
    Ok(())
}

/// Header `(c, r, N)`.
fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize, usize)> {
    let (mut c, mut r, mut n) = (None, None, None);
    for field in line.split(',') {
        let (key, value) = field.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("expected header c=<int>,r=<int>,N=<int>, found {line:?}"),
        })?;
        let value: usize = value.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("header value {:?} is not a non-negative integer", value.trim()),
        })?;
        let slot = match key.trim() {
            "c" => &mut c,
            "r" => &mut r,
            "N" => &mut n,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown header key {other:?}"),
                })
            }
        };
        if slot.replace(value).is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("duplicate header key {:?}", key.trim()),
            });
        }
    }
    match (c, r, n) {
        (Some(c), Some(r), Some(n)) if c > 0 && r > 0 && n > 0 => Ok((c, r, n)),
        (Some(_), Some(_), Some(_)) => Err(Error::Parse {
            line: lineno,
            message: "c, r and N must all be positive".into(),
        }),
        _ => Err(Error::Parse {
            line: lineno,
            message: "header must declare c, r and N".into(),
        }),
    }
}

pub fn parse_matrix_stack<T: Scalar>(text: &str) -> Result<MatrixDataset<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('#'));
    let (c, r, n) = loop {
        match lines.next() {
            Some((_, "")) => continue,
            Some((no, l)) => break parse_header(l, no)?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        }
    };
    let mut data = Vec::with_capacity(n * c * r);
    let mut blocks = 0;
    let mut rows_in_block = 0;
    let mut last_line = 0;
    for (no, line) in lines {
        last_line = no;
        if line.is_empty() {
            if rows_in_block > 0 {
                if rows_in_block != c {
                    return Err(Error::ShapeMismatch {
                        line: no,
                        message: format!("block {} has {rows_in_block} rows, expected {c}", blocks + 1),
                    });
                }
                blocks += 1;
                rows_in_block = 0;
            }
            continue;
        }
        if blocks == n {
            return Err(Error::ShapeMismatch {
                line: no,
                message: format!("more than the declared N = {n} blocks"),
            });
        }
        if rows_in_block == c {
            return Err(Error::ShapeMismatch {
                line: no,
                message: format!("block {} has more than c = {c} rows", blocks + 1),
            });
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: no,
                message: format!("{:?} is not a number", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { line: no });
            }
            data.push(T::lit(v));
        }
        let found = data.len() - before;
        if found != r {
            return Err(Error::ShapeMismatch {
                line: no,
                message: format!("row has {found} values, expected r = {r}"),
            });
        }
        rows_in_block += 1;
    }
    if rows_in_block > 0 {
        if rows_in_block != c {
            return Err(Error::ShapeMismatch {
                line: last_line,
                message: format!("block {} has {rows_in_block} rows, expected {c}", blocks + 1),
            });
        }
        blocks += 1;
    }
    if blocks != n {
        return Err(Error::ShapeMismatch {
            line: last_line.max(1),
            message: format!("found {blocks} blocks, header declares N = {n}"),
        });
    }
    MatrixDataset::from_buffer(c, r, data)
}

/// Serializes with 17 significant digits, so parsing recovers every `f64`
/// exactly.
pub fn format_matrix_stack<T: Scalar>(data: &MatrixDataset<T>) -> String {
    let (c, r) = (data.n_rows(), data.n_cols());
    let mut out = format!("c={c},r={r},N={}\n", data.n_samples());
    for (k, s) in data.samples().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for row in s.chunks(r) {
            for (j, &x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", format_float(x));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalar_blocks_with_comments() {
        let ds: MatrixDataset<f64> = parse_matrix_stack("# two samples\nc=1,r=1,N=2\n3.0\n\n4.0\n").unwrap();
        assert_eq!(ds.as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn short_row_is_a_shape_mismatch() {
        let err = parse_matrix_stack::<f64>("c=2,r=2,N=1\n1,2\n3\n").unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { line: 3, .. }));
        let err = parse_matrix_stack::<f64>("c=1,r=1,N=2\n1\n").unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
        let err = parse_matrix_stack::<f64>("c=1,r=1,N=1\nx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_matrix_stack::<f64>("c=1,r=2,N=1\n1,inf\n").unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { line: 2 }));
    }

    #[test]
    fn round_trip_is_exact() {
        let vals: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin() / 3.0).collect();
        let ds = MatrixDataset::from_buffer(2, 3, vals).unwrap();
        let text = format_matrix_stack(&ds);
        assert_eq!(parse_matrix_stack::<f64>(&text).unwrap(), ds);
        assert_eq!(format_matrix_stack(&parse_matrix_stack::<f64>(&text).unwrap()), text);
    }
}
