//! Closed form versus dynamics engine for the clean NN SSH chain.

use std::io::Write;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::analytic::{chiral_decomposition, otoc_site_series};
use crate::config::{build_operator, build_state, ModelSpec, OperatorSpec, RunConfig, SiteLabel, StateSpec};
use crate::dynamics::{fmt17, otoc_series, spectral_decompose};
use crate::error::{Error, Result};
use crate::lattice::{self, HamiltonianMatrix};
use crate::operators::StaggeredFlavor;

/// Which chain the numerics run on. The closed forms are exact on the
/// extended `2N+1` chain; `Plain` compares against the `2N`-site chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainMode {
    Extended,
    Plain,
}

/// Symmetric perturbation `H[i][j] += δ`, `H[j][i] += δ` (test hook).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corruption {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Site { l: usize },
    Chiral,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub times: Vec<f64>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_diff: f64,
}

impl ValidationReport {
    pub fn diff(&self, i: usize) -> f64 {
        (self.analytic[i] - self.numeric[i]).abs()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,analytic,numeric,diff")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt17(self.times[i]),
                fmt17(self.analytic[i]),
                fmt17(self.numeric[i]),
                fmt17(self.diff(i))
            )?;
        }
        Ok(())
    }
}

fn form_of(w: &OperatorSpec) -> Result<Form> {
    match w {
        OperatorSpec::SiteProjector { sites } => {
            for (k, s) in sites.iter().enumerate() {
                match s {
                    SiteLabel::Chain(n, sub) if *n == k + 1 && sub == "A" => {}
                    _ => {
                        return Err(Error::param(
                            "w_operator.sites",
                            "closed form needs the A sites of cells 1..=L in order",
                        ))
                    }
                }
            }
            Ok(Form::Site { l: sites.len() })
        }
        OperatorSpec::ChiralSum { j: 3, cells: None } => Ok(Form::Chiral),
        _ => Err(Error::param(
            "w_operator",
            "closed form exists for leading A-site projectors and the σ3 chiral sum only",
        )),
    }
}

fn m_of(s: &StateSpec) -> Result<usize> {
    match s {
        StateSpec::Basis {
            site: SiteLabel::Chain(1, sub),
        } if sub == "A" => Ok(1),
        StateSpec::Staggered {
            m,
            flavor: StaggeredFlavor::SshA,
        } => Ok(*m),
        _ => Err(Error::param(
            "initial_state",
            "closed form needs |1,A> or the staggered A state",
        )),
    }
}

/// Compare the closed form with the numerics on the configured time grid.
pub fn validate(cfg: &RunConfig, mode: ChainMode, corrupt: Option<Corruption>) -> Result<ValidationReport> {
    let p = cfg.pipeline()?;
    if p.disorder.is_some() {
        return Err(Error::param("disorder", "validation is defined for the clean chain"));
    }
    let (n, nu, eps) = match &p.model {
        ModelSpec::Ssh(s) if s.eta == 0.0 => (s.n, s.nu, s.epsilon),
        ModelSpec::Ssh(_) => return Err(Error::param("eta", "validation needs eta = 0")),
        ModelSpec::SshExtended(s) => (s.n, s.nu, s.epsilon),
        _ => return Err(Error::param("model", "validation is defined for the NN SSH chain")),
    };
    if !(nu > 0.0) {
        return Err(Error::param("nu", format!("closed form requires nu > 0, got {nu}")));
    }
    let form = form_of(&p.w_operator)?;
    let m = m_of(&p.initial_state)?;
    let times = p.time_grid.times();

    let analytic = match form {
        Form::Site { l } => otoc_site_series(n, nu, eps, &times, l, m)?,
        Form::Chiral => chiral_decomposition(n, nu, eps, m, &times)?.values(),
    };

    let mut h: HamiltonianMatrix = match mode {
        ChainMode::Extended => lattice::build_ssh_extended(n, nu, eps)?,
        ChainMode::Plain => lattice::build_ssh(n, nu, 0.0, eps, None)?,
    };
    if let Some(c) = corrupt {
        let d = h.dim();
        if c.i >= d || c.j >= d {
            return Err(Error::param("corrupt", format!("index out of range for dimension {d}")));
        }
        h.entries[(c.i, c.j)] += c64::new(c.delta, 0.0);
        if c.i != c.j {
            h.entries[(c.j, c.i)] += c64::new(c.delta, 0.0);
        }
    }
    let prop = spectral_decompose(&h)?;
    let w = build_operator(&p.w_operator, &h)?;
    let psi = build_state(&p.initial_state, &h, &prop)?;
    let numeric = otoc_series(&prop, &w, &psi, &p.time_grid)?.values;

    let max_diff = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !max_diff.is_finite() {
        return Err(Error::Numerical("non-finite difference".into()));
    }
    Ok(ValidationReport {
        times,
        analytic,
        numeric,
        max_diff,
    })
}
