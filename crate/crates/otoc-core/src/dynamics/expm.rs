//! Scaling-and-squaring matrix exponential with a degree-13 Padé approximant.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lattice::CMat;

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn lincomb(terms: &[(f64, &CMat)], identity: f64, n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        let mut z = c64::new(if i == j { identity } else { 0.0 }, 0.0);
        for (k, m) in terms {
            z += m[(i, j)] * *k;
        }
        z
    })
}

/// `exp(a)`.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("expm needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let nrm = norm1(a);
    if !nrm.is_finite() {
        return Err(Error::Numerical("expm argument is not finite".into()));
    }
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(s);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let u_inner = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0, n);
    let u_tail = lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1], n);
    let u_poly = &a6 * &u_inner;
    let u_sum = lincomb(&[(1.0, &u_poly), (1.0, &u_tail)], 0.0, n);
    let u = &a * &u_sum;
    let v_inner = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0, n);
    let v_poly = &a6 * &v_inner;
    let v = lincomb(&[(1.0, &v_poly), (b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0], n);

    let q = lincomb(&[(1.0, &v), (-1.0, &u)], 0.0, n);
    let mut r = lincomb(&[(1.0, &v), (1.0, &u)], 0.0, n);
    q.partial_piv_lu().solve_in_place(r.as_mut());
    for _ in 0..s {
        r = &r * &r;
    }
    if !(0..n).all(|j| (0..n).all(|i| r[(i, j)].re.is_finite() && r[(i, j)].im.is_finite())) {
        return Err(Error::Numerical("expm produced non-finite entries".into()));
    }
    Ok(r)
}

/// `exp(-i t a)`.
pub fn expm_minus_i(a: &CMat, t: f64) -> Result<CMat> {
    let n = a.nrows();
    let m = Mat::from_fn(n, a.ncols(), |i, j| a[(i, j)] * c64::new(0.0, -t));
    expm(&m)
}
