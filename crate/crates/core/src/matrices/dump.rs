//! Plain-text banded matrix dumps.
//!
//! Header `p b`, then `2b + 1` lines of whitespace-separated reals: the main
//! diagonal, super-diagonals `1..=b`, then sub-diagonals `1..=b`. Readers
//! check that each sub-diagonal mirrors its super-diagonal.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::BandedMatrix;

pub fn write_dump(m: &BandedMatrix) -> String {
    let mut out = String::new();
    let b = m.bandwidth();
    writeln!(out, "{} {}", m.dim(), b).unwrap();
    let line = |out: &mut String, d: usize| {
        let cells: Vec<String> = m.diagonal(d).iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    };
    for d in 0..=b {
        line(&mut out, d);
    }
    for d in 1..=b {
        line(&mut out, d);
    }
    out
}

pub fn read_dump(text: &str) -> Result<BandedMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix dump".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    let [p, b] = dims[..] else {
        return Err(Error::Parse(format!("header must be `p b`, got `{header}`")));
    };
    if p > 0 && b >= p {
        return Err(Error::Parse(format!("bandwidth {b} does not fit dimension {p}")));
    }
    let mut parse_line = |d: usize| -> Result<Vec<f64>> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing diagonal line (offset {d})")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != p - d {
            return Err(Error::Parse(format!(
                "diagonal {d} has {} entries, expected {}",
                vals.len(),
                p - d
            )));
        }
        Ok(vals)
    };
    let upper: Vec<Vec<f64>> = (0..=b).map(&mut parse_line).collect::<Result<_>>()?;
    for d in 1..=b {
        let lower = parse_line(d)?;
        if lower != upper[d] {
            return Err(Error::Parse(format!("sub-diagonal {d} does not mirror super-diagonal {d}")));
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing lines after the last diagonal".into()));
    }
    BandedMatrix::from_diagonals(p, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = BandedMatrix::from_diagonals(
            4,
            vec![vec![1.0, 2.0, 3.0, 4.0], vec![0.1, -0.2, 1e-17], vec![5.5, 6.25]],
        )
        .unwrap();
        let text = write_dump(&m);
        assert_eq!(text.lines().count(), 1 + 5);
        assert_eq!(read_dump(&text).unwrap(), m);
    }

    #[test]
    fn rejects_malformed_dumps() {
        assert!(read_dump("").is_err());
        assert!(read_dump("2\n1 1\n").is_err());
        assert!(read_dump("2 1\n1 1\n0.5\n").is_err());
        assert!(read_dump("2 1\n1 1\n0.5\n0.4\n").is_err());
        assert!(read_dump("2 0\n1 1 1\n").is_err());
        assert!(read_dump("2 0\n1 x\n").is_err());
        assert!(read_dump("2 0\n1 1\n1 1\n").is_err());
        assert!(read_dump("2 1\n1 1\n0.5\n0.5\n").is_ok());
    }
}
