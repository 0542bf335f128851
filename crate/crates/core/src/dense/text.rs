//! Plain-text matrix format: a header line `m n`, then `m` lines of `n`
//! whitespace-separated decimals. Values are written in shortest
//! round-trip form, so parsing the output recovers every bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::matrix::RealMatrix;
use crate::error::{Error, Result};

pub fn format_matrix(a: &RealMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", a.rows(), a.cols()).unwrap();
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn write_matrix<W: Write>(mut w: W, a: &RealMatrix) -> Result<()> {
    w.write_all(format_matrix(a).as_bytes())?;
    Ok(())
}

/// Parses the text format. Lines starting with `#` are skipped, which is
/// how metadata headers ride along with generated instances.
pub fn read_matrix<R: BufRead>(r: R) -> Result<RealMatrix> {
    let mut lines = r
        .lines()
        .map(|l| l.map_err(Error::from))
        .filter(|l| l.as_ref().map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#')).unwrap_or(true));
    let header = lines.next().ok_or_else(|| Error::Parse("missing header line".into()))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("bad dimension {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    let [m, n] = dims[..] else {
        return Err(Error::Parse(format!("header must be `m n`, got {header:?}")));
    };
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad value {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!("row {i} has {} values, expected {n}", row.len())));
        }
        data.extend(row);
    }
    RealMatrix::new(m, n, data)
}

pub fn parse_matrix(s: &str) -> Result<RealMatrix> {
    read_matrix(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_comments() {
        let a = parse_matrix("# seed=1\n2 2\n1 2\n3.5 -4e-3\n").unwrap();
        assert_eq!(a, RealMatrix::from_rows(&[[1.0, 2.0], [3.5, -4e-3]]));
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("2 2\n1 2\n3\n").is_err());
        assert!(parse_matrix("2\n1 2\n").is_err());
        assert!(parse_matrix("1 1\nx\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(vals in proptest::collection::vec(-1e300f64..1e300, 6)) {
            let a = RealMatrix::new(2, 3, vals).unwrap();
            let b = parse_matrix(&format_matrix(&a)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
