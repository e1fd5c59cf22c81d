//! Spectral propagators and OTOC time series.
//!
//! `O(t) = |s(t)|²` with `s(t) = ⟨ψ₀| e^{iHt} W e^{−iHt} |ψ₀⟩`, where
//! `e^{iHt}` is always the exact inverse of `e^{−iHt}` (this is what makes the
//! non-Hermitian case well defined).

mod balance;
pub mod expm;

use std::io::Write;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{max_abs, CMat, HamiltonianMatrix};
use crate::operators::{OperatorMatrix, StateVector};

pub use balance::balance;
pub use expm::{expm, expm_minus_i};

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
const CHUNK: usize = 512;

/// Eigenvector condition estimate above which the spectral path is abandoned.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorKind {
    HermitianSpectral,
    GeneralSpectral,
    ScaledExpm,
}

/// Time-evolution engine for one Hamiltonian.
///
/// Non-Hermitian generators are balanced first, `H = D B D⁻¹`, and every
/// spectral quantity (`eigenvectors`, `inverse_eigenvectors`, `generator`)
/// refers to `B`. For Hermitian input `D = I`.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub kind: PropagatorKind,
    pub eigenvalues: Vec<c64>,
    pub eigenvectors: CMat,
    pub inverse_eigenvectors: CMat,
    pub condition_estimate: f64,
    /// Diagonal of the balancing similarity `D`, if any.
    pub balance: Option<Vec<f64>>,
    /// Balanced generator, kept for the matrix-exponential path.
    pub generator: Option<CMat>,
    real_vectors: Option<Mat<f64>>,
}

#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    pub condition_threshold: f64,
    /// Skip the eigensolver and use the matrix exponential directly.
    pub force_expm: bool,
    /// Use the real symmetric solver when a Hermitian matrix is real.
    pub real_fast_path: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            force_expm: false,
            real_fast_path: true,
        }
    }
}

pub fn spectral_decompose(h: &HamiltonianMatrix) -> Result<Propagator> {
    spectral_decompose_with(h, DecomposeOptions::default())
}

pub fn spectral_decompose_with(h: &HamiltonianMatrix, opts: DecomposeOptions) -> Result<Propagator> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty Hamiltonian".into()));
    }
    if h.entries.ncols() != n {
        return Err(Error::DimensionMismatch("Hamiltonian must be square".into()));
    }
    if h.hermitian && !opts.force_expm {
        let res = h.hermiticity_residual();
        if res > 1e-12 * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian(res));
        }
        return hermitian(h, opts.real_fast_path && h.is_real());
    }
    general(h, opts)
}

fn hermitian(h: &HamiltonianMatrix, real: bool) -> Result<Propagator> {
    let n = h.dim();
    let (lam, v, rv) = if real {
        let hr = Mat::<f64>::from_fn(n, n, |i, j| h.entries[(i, j)].re);
        let e = hr
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let lam: Vec<c64> = e.S().column_vector().iter().map(|&x| c64::new(x, 0.0)).collect();
        let u = e.U().to_owned();
        let v = Mat::from_fn(n, n, |i, j| c64::new(u[(i, j)], 0.0));
        (lam, v, Some(u))
    } else {
        let e = h
            .entries
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let lam: Vec<c64> = e.S().column_vector().iter().map(|x| c64::new(x.re, 0.0)).collect();
        (lam, e.U().to_owned(), None)
    };
    let vinv = v.adjoint().to_owned();
    Ok(Propagator {
        kind: PropagatorKind::HermitianSpectral,
        eigenvalues: lam,
        eigenvectors: v,
        inverse_eigenvectors: vinv,
        condition_estimate: 1.0,
        balance: None,
        generator: None,
        real_vectors: rv,
    })
}

fn frobenius(m: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn all_finite(m: &CMat) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

fn general(h: &HamiltonianMatrix, opts: DecomposeOptions) -> Result<Propagator> {
    let n = h.dim();
    let bal = balance(&h.entries);
    let d = if bal.d.iter().all(|&x| x == 1.0) { None } else { Some(bal.d) };
    let b = bal.b;
    let expm_fallback = |lam: Vec<c64>, cond: f64, b: CMat, d: Option<Vec<f64>>| Propagator {
        kind: PropagatorKind::ScaledExpm,
        eigenvalues: lam,
        eigenvectors: Mat::zeros(0, 0),
        inverse_eigenvectors: Mat::zeros(0, 0),
        condition_estimate: cond,
        balance: d,
        generator: Some(b),
        real_vectors: None,
    };
    if opts.force_expm {
        return Ok(expm_fallback(Vec::new(), f64::NAN, b, d));
    }
    let is_real = (0..n).all(|j| (0..n).all(|i| b[(i, j)].im == 0.0));
    let e = if is_real {
        let br = Mat::<f64>::from_fn(n, n, |i, j| b[(i, j)].re);
        br.eigen()
    } else {
        b.eigen()
    }
    .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let lam: Vec<c64> = e.S().column_vector().iter().copied().collect();
    let mut v = e.U().to_owned();
    for j in 0..n {
        let nrm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= nrm;
            }
        }
    }
    let vinv = v.partial_piv_lu().inverse();
    let cond = if all_finite(&vinv) {
        frobenius(&v) * frobenius(&vinv) / n as f64
    } else {
        f64::INFINITY
    };
    if !(cond <= opts.condition_threshold) {
        return Ok(expm_fallback(lam, cond, b, d));
    }
    Ok(Propagator {
        kind: PropagatorKind::GeneralSpectral,
        eigenvalues: lam,
        eigenvectors: v,
        inverse_eigenvectors: vinv,
        condition_estimate: cond,
        balance: d,
        generator: None,
        real_vectors: None,
    })
}

fn matvec(a: &CMat, x: &[c64]) -> Vec<c64> {
    let mut y = vec![ZERO; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == ZERO {
            continue;
        }
        for i in 0..a.nrows() {
            y[i] += a[(i, j)] * xj;
        }
    }
    y
}

fn phase(lam: c64, t: f64) -> c64 {
    (c64::new(0.0, -t) * lam).exp()
}

impl Propagator {
    pub fn dim(&self) -> usize {
        match &self.generator {
            Some(g) => g.nrows(),
            None => self.eigenvectors.nrows(),
        }
    }

    /// `H` expressed in the frame the propagator works in (`D⁻¹ H D`).
    pub fn frame_matrix(&self, h: &CMat) -> CMat {
        match &self.balance {
            None => h.clone(),
            Some(d) => Mat::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * (d[j] / d[i])),
        }
    }

    /// `max |V Λ V⁻¹ − B| / max |B|` in the working frame.
    pub fn reconstruction_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let b = self.frame_matrix(&h.entries);
        self.residual_against(&b, None)
    }

    /// Same residual but measured against the original `H`.
    pub fn reconstruction_residual_original(&self, h: &HamiltonianMatrix) -> f64 {
        self.residual_against(&h.entries, self.balance.as_deref())
    }

    fn residual_against(&self, target: &CMat, d: Option<&[f64]>) -> f64 {
        if self.kind == PropagatorKind::ScaledExpm {
            return f64::NAN;
        }
        let n = self.dim();
        let vl = Mat::from_fn(n, n, |i, k| self.eigenvectors[(i, k)] * self.eigenvalues[k]);
        let mut r = &vl * &self.inverse_eigenvectors;
        if let Some(d) = d {
            r = Mat::from_fn(n, n, |i, j| r[(i, j)] * (d[i] / d[j]));
        }
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((r[(i, j)] - target[(i, j)]).norm());
            }
        }
        worst / max_abs(target).max(f64::MIN_POSITIVE)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {n} against propagator of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `e^{−iBt} x` in the working frame.
    fn evolve_frame(&self, x: &[c64], t: f64) -> Result<Vec<c64>> {
        match self.kind {
            PropagatorKind::ScaledExpm => {
                let u = expm_minus_i(self.generator.as_ref().unwrap(), t)?;
                Ok(matvec(&u, x))
            }
            _ => {
                let mut c = matvec(&self.inverse_eigenvectors, x);
                for (ck, &l) in c.iter_mut().zip(&self.eigenvalues) {
                    *ck *= phase(l, t);
                }
                Ok(matvec(&self.eigenvectors, &c))
            }
        }
    }

    fn to_ket_frame(&self, psi: &[c64]) -> Vec<c64> {
        match &self.balance {
            None => psi.to_vec(),
            Some(d) => psi.iter().zip(d).map(|(a, &di)| *a / di).collect(),
        }
    }

    fn to_bra_frame(&self, psi: &[c64]) -> Vec<c64> {
        match &self.balance {
            None => psi.to_vec(),
            Some(d) => psi.iter().zip(d).map(|(a, &di)| *a * di).collect(),
        }
    }

    fn operator_frame(&self, w: &OperatorMatrix) -> CMat {
        self.frame_matrix(&w.entries)
    }

    /// `e^{−iHt} ψ`; negative `t` evolves backwards.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.check_dim(psi.dim())?;
        let x = self.to_ket_frame(&psi.amplitudes);
        let mut y = self.evolve_frame(&x, t)?;
        if let Some(d) = &self.balance {
            for (a, &di) in y.iter_mut().zip(d) {
                *a *= di;
            }
        }
        let out = StateVector::new(y);
        Ok(out)
    }
}

fn apply(w: &CMat, diag: Option<&[c64]>, x: &[c64]) -> Vec<c64> {
    match diag {
        Some(dg) => x.iter().zip(dg).map(|(a, b)| *a * *b).collect(),
        None => matvec(w, x),
    }
}

fn diag_of(m: &CMat) -> Option<Vec<c64>> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)] != ZERO {
                return None;
            }
        }
    }
    Some((0..m.nrows()).map(|i| m[(i, i)]).collect())
}

fn dot_conj(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * *y)
}

/// `s(t)` by forward evolution, application of `W`, backward evolution and a
/// final inner product with `ψ₀`.
pub fn otoc_amplitude(p: &Propagator, w: &OperatorMatrix, psi0: &StateVector, t: f64) -> Result<c64> {
    p.check_dim(psi0.dim())?;
    p.check_dim(w.dim())?;
    let wb = p.operator_frame(w);
    let dg = diag_of(&wb);
    let ket = p.to_ket_frame(&psi0.amplitudes);
    let bra = p.to_bra_frame(&psi0.amplitudes);
    let fwd = p.evolve_frame(&ket, t)?;
    let mid = apply(&wb, dg.as_deref(), &fwd);
    let back = p.evolve_frame(&mid, -t)?;
    Ok(dot_conj(&bra, &back))
}

/// Uniform time grid `t_k = k·dt`, `k = 0..=round(t_max/dt)`, in units of
/// the inverse energy scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { t_max: 200.0, dt: 0.2 }
    }
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        let g = TimeGrid { t_max, dt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::param("time_grid.t_max", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("time_grid.dt", "must be positive"));
        }
        if self.t_max / self.dt > 1e7 {
            return Err(Error::param("time_grid.dt", "grid has more than 1e7 samples"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtocSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub amplitudes: Option<Vec<c64>>,
    pub fingerprint: Option<String>,
}

impl OtocSeries {
    fn from_amplitudes(times: Vec<f64>, s: Vec<c64>) -> Self {
        OtocSeries {
            values: s.iter().map(|z| z.norm_sqr()).collect(),
            times,
            amplitudes: Some(s),
            fingerprint: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with header `t,otoc[,re_s,im_s]`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W, with_amplitudes: bool) -> std::io::Result<()> {
        let amps = if with_amplitudes { self.amplitudes.as_ref() } else { None };
        if amps.is_some() {
            writeln!(out, "t,otoc,re_s,im_s")?;
        } else {
            writeln!(out, "t,otoc")?;
        }
        for (k, (t, v)) in self.times.iter().zip(&self.values).enumerate() {
            match amps {
                Some(a) => writeln!(out, "{},{},{},{}", fmt17(*t), fmt17(*v), fmt17(a[k].re), fmt17(a[k].im))?,
                None => writeln!(out, "{},{}", fmt17(*t), fmt17(*v))?,
            }
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `O(t)` on the whole grid.
///
/// Spectral propagators batch the forward and backward stages over blocks of
/// times as matrix products; the matrix-exponential path steps two vectors by
/// `e^{−iB dt}` and `e^{−iB† dt}`.
pub fn otoc_series(p: &Propagator, w: &OperatorMatrix, psi0: &StateVector, grid: &TimeGrid) -> Result<OtocSeries> {
    grid.validate()?;
    p.check_dim(psi0.dim())?;
    p.check_dim(w.dim())?;
    let times = grid.times();
    let wb = p.operator_frame(w);
    let dg = diag_of(&wb);
    let ket = p.to_ket_frame(&psi0.amplitudes);
    let bra = p.to_bra_frame(&psi0.amplitudes);
    let n = p.dim();

    let s = if p.kind == PropagatorKind::ScaledExpm {
        let b = p.generator.as_ref().unwrap();
        let e = expm_minus_i(b, grid.dt)?;
        let badj = b.adjoint().to_owned();
        let g = expm_minus_i(&badj, grid.dt)?;
        let (mut phi, mut zeta) = (ket, bra);
        let mut s = Vec::with_capacity(times.len());
        for k in 0..times.len() {
            if k > 0 {
                phi = matvec(&e, &phi);
                zeta = matvec(&g, &zeta);
            }
            s.push(dot_conj(&zeta, &apply(&wb, dg.as_deref(), &phi)));
        }
        s
    } else {
        let c = matvec(&p.inverse_eigenvectors, &ket);
        // r_k = Σ_i conj(bra_i) V_ik
        let r: Vec<c64> = (0..n)
            .map(|k| (0..n).fold(ZERO, |acc, i| acc + bra[i].conj() * p.eigenvectors[(i, k)]))
            .collect();
        let mut s = Vec::with_capacity(times.len());
        for block in times.chunks(CHUNK) {
            let m = block.len();
            let coeff = Mat::from_fn(n, m, |k, j| c[k] * phase(p.eigenvalues[k], block[j]));
            let mut phi = left_mul(p, &coeff, false);
            match &dg {
                Some(d) => {
                    for j in 0..m {
                        for i in 0..n {
                            phi[(i, j)] *= d[i];
                        }
                    }
                }
                None => phi = &wb * &phi,
            }
            let y = left_mul(p, &phi, true);
            for j in 0..m {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += r[k] * phase(p.eigenvalues[k], -block[j]) * y[(k, j)];
                }
                s.push(acc);
            }
        }
        s
    };
    Ok(OtocSeries::from_amplitudes(times, s))
}

/// `V X` (or `V⁻¹ X` when `inverse`), using two real products when the
/// eigenbasis is real.
fn left_mul(p: &Propagator, x: &CMat, inverse: bool) -> CMat {
    if let Some(vr) = &p.real_vectors {
        let (n, m) = (x.nrows(), x.ncols());
        let xr = Mat::<f64>::from_fn(n, m, |i, j| x[(i, j)].re);
        let xi = Mat::<f64>::from_fn(n, m, |i, j| x[(i, j)].im);
        let (yr, yi) = if inverse {
            (vr.transpose() * &xr, vr.transpose() * &xi)
        } else {
            (vr * &xr, vr * &xi)
        };
        return Mat::from_fn(vr.nrows(), m, |i, j| c64::new(yr[(i, j)], yi[(i, j)]));
    }
    if inverse {
        &p.inverse_eigenvectors * x
    } else {
        &p.eigenvectors * x
    }
}

/// Largest dimension accepted by [`otoc_trace_oracle`].
pub const ORACLE_MAX_DIM: usize = 64;

/// `tr[ρ₀ W†(t) ρ₀ W(t)]` with `W(t) = e^{iHt} W e^{−iHt}`, by dense
/// products of matrix exponentials (independent of the spectral path).
///
/// Hermitian `H`: the trace is real and its imaginary residual must stay
/// below 1e-10. Non-Hermitian `H`: the modulus is returned, which equals
/// `|s(t)|²` for Hermitian `W`.
pub fn otoc_trace_oracle(h: &HamiltonianMatrix, w: &OperatorMatrix, rho0: &CMat, t: f64) -> Result<f64> {
    let n = h.dim();
    if n > ORACLE_MAX_DIM {
        return Err(Error::param("dim", format!("trace oracle capped at {ORACLE_MAX_DIM}, got {n}")));
    }
    if w.dim() != n || rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::DimensionMismatch("oracle operands must share the Hamiltonian dimension".into()));
    }
    let u = expm_minus_i(&h.entries, t)?;
    let ui = expm_minus_i(&h.entries, -t)?;
    let wt = &(&ui * &w.entries) * &u;
    let wdt = &(&ui * w.entries.adjoint()) * &u;
    let prod = &(&(rho0 * &wdt) * rho0) * &wt;
    let tr = (0..n).fold(ZERO, |acc, i| acc + prod[(i, i)]);
    if h.hermitian {
        if tr.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!("trace has imaginary residual {:e}", tr.im)));
        }
        Ok(tr.re)
    } else {
        Ok(tr.norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTime {
    pub mean: f64,
    pub std: f64,
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Mean and (population) standard deviation over the final `tail_fraction`
/// of the grid, endpoints included.
pub fn long_time_limit(series: &OtocSeries, tail_fraction: f64) -> Result<LongTime> {
    if series.is_empty() {
        return Err(Error::param("series", "empty series"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::param("tail_fraction", "must lie in (0, 1]"));
    }
    let n = series.len();
    let start = ((n - 1) as f64 * (1.0 - tail_fraction)).floor() as usize;
    let tail = &series.values[start..];
    let mean = shifted_mean(tail);
    let var = tail.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / tail.len() as f64;
    Ok(LongTime { mean, std: var.sqrt() })
}

/// Arithmetic mean over the full grid.
pub fn time_average(series: &OtocSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::param("series", "empty series"));
    }
    Ok(shifted_mean(&series.values))
}

/// Mean computed about the first sample, so constant input is reproduced
/// exactly.
pub(crate) fn shifted_mean(v: &[f64]) -> f64 {
    let c = v[0];
    c + v.iter().map(|x| x - c).sum::<f64>() / v.len() as f64
}

/// Pure-state density matrix `|ψ⟩⟨ψ|`.
pub fn density_matrix(psi: &StateVector) -> CMat {
    let n = psi.dim();
    Mat::from_fn(n, n, |i, j| psi.amplitudes[i] * psi.amplitudes[j].conj())
}
