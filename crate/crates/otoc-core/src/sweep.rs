//! Parameter-grid sweeps and zero-to-finite transition detection.
//!
//! The work unit is one grid point: build, decompose once, sample, reduce.
//! Points run on a rayon pool and land in pre-sized slots by index, so the
//! grid is bit-identical for any worker count.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Pipeline;
use crate::dynamics::{fmt17, otoc_amplitude, spectral_decompose};
use crate::error::{Error, Result};

/// Name of the pseudo-parameter that turns an axis into sample times.
pub const TIME_AXIS: &str = "t";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl AxisSpec {
    pub fn values(name: &str, values: Vec<f64>) -> Self {
        AxisSpec {
            name: name.to_string(),
            values: Some(values),
            start: None,
            stop: None,
            step: None,
        }
    }

    /// `start, start+step, …` up to `stop` inclusive (with a small slack).
    pub fn range(name: &str, start: f64, stop: f64, step: f64) -> Self {
        AxisSpec {
            name: name.to_string(),
            values: None,
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
        }
    }

    pub fn resolve(&self) -> Result<Axis> {
        let field = format!("sweep.axis[{}]", self.name);
        let values = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0 && h.is_finite()) || !(b >= a) {
                    return Err(Error::param(field, "need step > 0 and stop >= start"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize + 1;
                if n > 1_000_000 {
                    return Err(Error::param(field, "axis has more than 1e6 values"));
                }
                (0..n).map(|k| a + k as f64 * h).collect()
            }
            _ => return Err(Error::param(field, "give either `values` or `start`/`stop`/`step`")),
        };
        if values.is_empty() {
            return Err(Error::param(field, "axis is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(field, "axis values must be finite"));
        }
        Ok(Axis {
            name: self.name.clone(),
            values,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Threshold {
    Absolute { value: f64 },
    RelativeToMax { fraction: f64 },
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::RelativeToMax { fraction: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis1: AxisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Threshold>,
}

impl SweepSpec {
    pub fn one(axis: AxisSpec) -> Self {
        SweepSpec {
            axis1: axis,
            axis2: None,
            threshold: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.axis1.resolve()?;
        if let Some(b) = &self.axis2 {
            let b = b.resolve()?;
            if a.name == b.name {
                return Err(Error::param("sweep.axis2", "axes must differ"));
            }
            if b.name == TIME_AXIS && a.name == TIME_AXIS {
                return Err(Error::param("sweep.axis2", "only one time axis"));
            }
        }
        if let Some(t) = self.threshold {
            match t {
                Threshold::Absolute { value } if !(value > 0.0) => {
                    return Err(Error::param("sweep.threshold.value", "must be positive"))
                }
                Threshold::RelativeToMax { fraction } if !(fraction > 0.0) => {
                    return Err(Error::param("sweep.threshold.fraction", "must be positive"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub model: String,
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_configs: Option<usize>,
    /// Spectral decompositions performed.
    pub decompositions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    /// `grid[i][j]` at `(axis1[i], axis2[j])`; one column for 1D sweeps.
    pub grid: Vec<Vec<f64>>,
    pub observable: String,
    pub metadata: SweepMetadata,
}

/// Run `f` on a pool of `workers` threads, or on the current pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn apply_axis(pl: &mut Pipeline, name: &str, x: f64) -> Result<()> {
    match name {
        "d" | "d1" | "d2" => match pl.disorder.as_mut() {
            Some(d) => d.set(name, x),
            None => Err(Error::param("sweep.axis", "disorder axis needs a disorder section")),
        },
        _ => pl.model.set(name, x),
    }
}

/// Scalar observable at one parameter point; disordered pipelines average
/// over `n_configs` seeds starting at the configured seed.
fn point_value(pl: &Pipeline, counter: &AtomicUsize) -> Result<f64> {
    let configs = match &pl.disorder {
        Some(d) => (d.seed, d.n_configs),
        None => (0, 1),
    };
    let mut acc = Vec::with_capacity(configs.1);
    for i in 0..configs.1 {
        let seed = pl.disorder.as_ref().map(|_| configs.0.wrapping_add(i as u64));
        let r = pl.run(seed, Some(counter))?;
        acc.push(r.value.ok_or_else(|| {
            Error::param("observable", "a sweep without a time axis needs a scalar observable")
        })?);
    }
    let c = acc[0];
    Ok(c + acc.iter().map(|x| x - c).sum::<f64>() / acc.len() as f64)
}

/// `O(t)` at each requested time, one decomposition.
fn time_column(pl: &Pipeline, times: &[f64], counter: &AtomicUsize) -> Result<Vec<f64>> {
    if pl.disorder.as_ref().map_or(false, |d| d.n_configs > 1) {
        return Err(Error::param("sweep", "time axes are not supported for disorder ensembles"));
    }
    let h = pl.build_hamiltonian(None)?;
    let p = spectral_decompose(&h)?;
    counter.fetch_add(1, Ordering::Relaxed);
    let w = pl.operator(&h)?;
    let psi = pl.state(&h, &p)?;
    times
        .iter()
        .map(|&t| otoc_amplitude(&p, &w, &psi, t).map(|s| s.norm_sqr()))
        .collect()
}

pub fn sweep(pipeline: &Pipeline, spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let a1 = spec.axis1.resolve()?;
    let a2 = spec.axis2.as_ref().map(|a| a.resolve()).transpose()?;
    let counter = AtomicUsize::new(0);

    let time_on_1 = a1.name == TIME_AXIS;
    let time_on_2 = a2.as_ref().map_or(false, |a| a.name == TIME_AXIS);
    let n1 = a1.values.len();
    let n2 = a2.as_ref().map_or(1, |a| a.values.len());

    let grid: Vec<Vec<f64>> = if time_on_1 || time_on_2 {
        let (times, params) = if time_on_1 { (&a1, a2.as_ref()) } else { (a2.as_ref().unwrap(), Some(&a1)) };
        let pvals: Vec<Option<f64>> = match params {
            Some(p) => p.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        };
        let pname = params.map(|p| p.name.clone());
        let cols: Vec<Result<Vec<f64>>> = with_workers(workers, || {
            pvals
                .par_iter()
                .enumerate()
                .map(|(j, v)| {
                    let mut pl = pipeline.clone();
                    if let (Some(name), Some(x)) = (&pname, v) {
                        apply_axis(&mut pl, name, *x)?;
                    }
                    time_column(&pl, &times.values, &counter).map_err(|e| Error::SweepPoint {
                        index: if time_on_1 { (0, j) } else { (j, 0) },
                        source: Box::new(e),
                    })
                })
                .collect()
        })?;
        let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
        if time_on_1 {
            (0..n1).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
        } else {
            cols
        }
    } else {
        let points: Vec<(usize, usize)> = (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
        let vals: Vec<Result<f64>> = with_workers(workers, || {
            points
                .par_iter()
                .map(|&(i, j)| {
                    let mut pl = pipeline.clone();
                    let mut eval = || -> Result<f64> {
                        apply_axis(&mut pl, &a1.name, a1.values[i])?;
                        if let Some(b) = &a2 {
                            apply_axis(&mut pl, &b.name, b.values[j])?;
                        }
                        point_value(&pl, &counter)
                    };
                    eval().map_err(|e| Error::SweepPoint {
                        index: (i, j),
                        source: Box::new(e),
                    })
                })
                .collect()
        })?;
        let mut grid = vec![vec![0.0; n2]; n1];
        for ((i, j), v) in points.into_iter().zip(vals) {
            grid[i][j] = v?;
        }
        grid
    };

    let observable = if time_on_1 || time_on_2 {
        "otoc".to_string()
    } else {
        pipeline.observable.name().to_string()
    };
    Ok(SweepResult {
        axis1: a1,
        axis2: a2,
        grid,
        observable,
        metadata: SweepMetadata {
            model: pipeline.model.family().to_string(),
            params: pipeline.model.params_value(),
            fingerprint: None,
            seed0: pipeline.disorder.as_ref().map(|d| d.seed),
            n_configs: pipeline.disorder.as_ref().map(|d| d.n_configs),
            decompositions: counter.load(Ordering::Relaxed),
        },
    })
}

impl SweepResult {
    pub fn is_1d(&self) -> bool {
        self.axis2.is_none()
    }

    /// Observable values of a 1D sweep.
    pub fn column(&self) -> Vec<f64> {
        self.grid.iter().map(|r| r[0]).collect()
    }

    pub fn max(&self) -> f64 {
        self.grid.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Long-format CSV, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match &self.axis2 {
            None => {
                writeln!(out, "{},{}", self.axis1.name, self.observable)?;
                for (x, row) in self.axis1.values.iter().zip(&self.grid) {
                    writeln!(out, "{},{}", fmt17(*x), fmt17(row[0]))?;
                }
            }
            Some(b) => {
                writeln!(out, "{},{},{}", self.axis1.name, b.name, self.observable)?;
                for (x, row) in self.axis1.values.iter().zip(&self.grid) {
                    for (y, v) in b.values.iter().zip(row) {
                        writeln!(out, "{},{},{}", fmt17(*x), fmt17(*y), fmt17(*v))?;
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn resolve_threshold(result: &SweepResult, threshold: Threshold) -> f64 {
    match threshold {
        Threshold::Absolute { value } => value,
        Threshold::RelativeToMax { fraction } => fraction * result.max(),
    }
}

/// Axis positions where a 1D grid crosses `threshold`, located by linear
/// interpolation between the bracketing grid points.
pub fn detect_transition(result: &SweepResult, threshold: Threshold) -> Result<Vec<f64>> {
    if !result.is_1d() {
        return Err(Error::param("sweep", "transition detection needs a 1D sweep"));
    }
    let thr = resolve_threshold(result, threshold);
    Ok(crossings(&result.axis1.values, &result.column(), thr))
}

pub fn crossings(xs: &[f64], ys: &[f64], thr: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(thr > 0.0) || ys.len() < 2 {
        return out;
    }
    for k in 0..ys.len() - 1 {
        let (a, b) = (ys[k], ys[k + 1]);
        if (a >= thr) != (b >= thr) {
            let f = (thr - a) / (b - a);
            out.push(xs[k] + f * (xs[k + 1] - xs[k]));
        }
    }
    out
}
