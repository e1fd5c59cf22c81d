//! Dense complex matrix file format: a header line holding `dim`, then `dim`
//! rows of `dim` whitespace-separated `re im` pairs.

use std::fmt::Write as _;

use faer::{c64, Mat};

use crate::dynamics::fmt17;
use crate::error::{Error, Result};
use crate::lattice::CMat;

pub fn write_dense_matrix(m: &CMat) -> String {
    let n = m.nrows();
    let mut s = String::with_capacity(n * n * 48 + 16);
    writeln!(s, "{n}").unwrap();
    for i in 0..n {
        for j in 0..m.ncols() {
            if j > 0 {
                s.push(' ');
            }
            let z = m[(i, j)];
            write!(s, "{} {}", fmt17(z.re), fmt17(z.im)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn read_dense_matrix(text: &str) -> Result<CMat> {
    let bad = |msg: String| Error::param("matrix_file", msg);
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .parse()
        .map_err(|e| bad(format!("bad dimension header: {e}")))?;
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut next = || -> Result<f64> {
                tokens
                    .next()
                    .ok_or_else(|| bad(format!("file ends before entry ({i}, {j})")))?
                    .parse::<f64>()
                    .map_err(|e| bad(format!("entry ({i}, {j}): {e}")))
            };
            let re = next()?;
            let im = next()?;
            m[(i, j)] = c64::new(re, im);
        }
    }
    if tokens.next().is_some() {
        return Err(bad("trailing data after the last row".into()));
    }
    Ok(m)
}
