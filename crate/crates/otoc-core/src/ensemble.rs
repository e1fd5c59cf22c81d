//! Seeded disorder draws and disorder-averaged observables.
//!
//! Generator: SplitMix64 (tag `"splitmix64"`), state initialised to the seed
//! itself. A draw is `(u64 >> 11)·2⁻⁵³ − 0.5`. Within one configuration the
//! `N−1` intercell values `r` are drawn first, then the `N` intracell
//! values `r′`. Configuration `i` of an ensemble uses seed `seed0 + i`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ObservableSpec, Pipeline};
use crate::error::{Error, Result};
use crate::lattice::DisorderConfig;

pub const PRNG_TAG: &str = "splitmix64";

pub fn rng_for_seed(seed: u64) -> SplitMix64 {
    SplitMix64::from_seed(seed.to_le_bytes())
}

/// Uniform draw on `[−0.5, 0.5)` from the top 53 bits.
pub fn centered_uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5
}

pub fn draw_disorder(seed: u64, n: usize, d1: f64, d2: f64) -> Result<DisorderConfig> {
    if n < 2 {
        return Err(Error::param("n", "disorder needs at least 2 cells"));
    }
    for (k, v) in [("d1", d1), ("d2", d2)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::param(k, format!("must be non-negative, got {v}")));
        }
    }
    let mut rng = rng_for_seed(seed);
    let r = (0..n - 1).map(|_| centered_uniform(&mut rng)).collect();
    let r_prime = (0..n).map(|_| centered_uniform(&mut rng)).collect();
    Ok(DisorderConfig {
        r,
        r_prime,
        seed,
        d1,
        d2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stat {
    Scalar(f64),
    Series(Vec<f64>),
}

impl Stat {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Stat::Scalar(x) => Some(*x),
            Stat::Series(_) => None,
        }
    }
}

/// JSON envelope of an ensemble run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub model: String,
    pub params: Value,
    pub d: Option<f64>,
    pub d1: f64,
    pub d2: f64,
    pub n_configs: usize,
    pub seed0: u64,
    pub prng: String,
    pub observable: String,
    pub mean: Stat,
    pub std: Stat,
    pub per_config: Vec<Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let c = xs[0];
    let mean = c + xs.iter().map(|x| x - c).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Run the pipeline for seeds `seed0, seed0+1, …` and aggregate the
/// observable (mean and sample standard deviation). Results are ordered by
/// configuration index whatever the execution order; the first failing
/// index aborts the run.
pub fn ensemble_average(
    pipeline: &Pipeline,
    n_configs: usize,
    seed0: u64,
    observable: ObservableSpec,
    workers: Option<usize>,
) -> Result<EnsembleResult> {
    if n_configs == 0 {
        return Err(Error::param("n_configs", "must be at least 1"));
    }
    let dis = pipeline
        .disorder
        .clone()
        .ok_or_else(|| Error::param("disorder", "an ensemble needs a disorder section"))?;
    let (d1, d2) = dis.strengths()?;
    let mut pl = pipeline.clone();
    pl.observable = observable;

    let job = |i: usize| {
        let seed = seed0.wrapping_add(i as u64);
        pl.run(Some(seed), None).map_err(|e| Error::Ensemble {
            index: i,
            seed,
            source: Box::new(e),
        })
    };
    let results: Vec<_> = crate::sweep::with_workers(workers, || (0..n_configs).into_par_iter().map(job).collect())?;
    let mut points = Vec::with_capacity(n_configs);
    for r in results {
        points.push(r?);
    }

    let times = points[0].series.times.clone();
    let (mean, std, per_config, times) = match observable {
        ObservableSpec::FullSeries => {
            let len = times.len();
            let mut m = Vec::with_capacity(len);
            let mut s = Vec::with_capacity(len);
            for k in 0..len {
                let col: Vec<f64> = points.iter().map(|p| p.series.values[k]).collect();
                let (a, b) = mean_std(&col);
                m.push(a);
                s.push(b);
            }
            let per = points.iter().map(|p| Stat::Series(p.series.values.clone())).collect();
            (Stat::Series(m), Stat::Series(s), per, Some(times))
        }
        _ => {
            let xs: Vec<f64> = points.iter().map(|p| p.value.expect("scalar observable")).collect();
            let (a, b) = mean_std(&xs);
            (Stat::Scalar(a), Stat::Scalar(b), xs.into_iter().map(Stat::Scalar).collect(), None)
        }
    };
    Ok(EnsembleResult {
        model: pipeline.model.family().to_string(),
        params: pipeline.model.params_value(),
        d: dis.d,
        d1,
        d2,
        n_configs,
        seed0,
        prng: PRNG_TAG.to_string(),
        observable: observable.name().to_string(),
        mean,
        std,
        per_config,
        times,
        fingerprint: None,
    })
}
