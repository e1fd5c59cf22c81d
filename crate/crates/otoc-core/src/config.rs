//! JSON run configuration and the single-point OTOC pipeline.
//!
//! A configuration has the sections `model`, `params`, `disorder`,
//! `initial_state`, `w_operator`, `time_grid`, `observable` and `sweep`.
//! Unknown keys are rejected everywhere so that a typo in a physics
//! parameter can never be silently ignored.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dynamics::{
    long_time_limit, otoc_series, spectral_decompose, time_average, OtocSeries, Propagator, TimeGrid,
    DEFAULT_TAIL_FRACTION,
};
use crate::ensemble::{draw_disorder, PRNG_TAG};
use crate::error::{Error, Result};
use crate::lattice::{self, DisorderConfig, HamiltonianMatrix, LayoutKind};
use crate::operators::{
    self, lowest_abs_eigenstate_from, project_qs, OperatorMatrix, Site, StaggeredFlavor, StateVector,
};
use crate::sweep::SweepSpec;

/// Deserialisation error located by its path inside `section`.
fn located<E: std::fmt::Display>(section: &str, e: serde_path_to_error::Error<E>) -> Error {
    let path = e.path().to_string();
    let field = match (section, path.as_str()) {
        (s, ".") => s.to_string(),
        ("", p) => p.to_string(),
        (s, p) => format!("{s}.{p}"),
    };
    let field = if field.is_empty() { "config".to_string() } else { field };
    Error::param(field, e.into_inner().to_string())
}

fn default_epsilon() -> f64 {
    1.0
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SshParams {
    pub n: usize,
    pub nu: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SshExtendedParams {
    pub n: usize,
    pub nu: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreutzParams {
    pub n: usize,
    pub eta0: f64,
    #[serde(default = "one")]
    pub eta0p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaldaneParams {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub eta1: f64,
    #[serde(default = "one")]
    pub eta2: f64,
    #[serde(default = "half_pi")]
    pub phi: f64,
    pub mu: f64,
}

fn half_pi() -> f64 {
    std::f64::consts::FRAC_PI_2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QwzParams {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub eta0: f64,
    pub mu_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ssh2dParams {
    pub nx: usize,
    pub ny: usize,
    pub nu_p: f64,
    #[serde(default = "one")]
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonHermitianSshParams {
    pub n: usize,
    pub nu: f64,
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

/// Model family with typed parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Ssh(SshParams),
    SshExtended(SshExtendedParams),
    Creutz(CreutzParams),
    Haldane(HaldaneParams),
    Qwz(QwzParams),
    Ssh2d(Ssh2dParams),
    NonHermitianSsh(NonHermitianSshParams),
}

pub const MODEL_NAMES: [&str; 7] = [
    "ssh",
    "ssh_extended",
    "creutz",
    "haldane",
    "qwz",
    "ssh2d",
    "nonhermitian_ssh",
];

impl ModelSpec {
    pub fn from_parts(family: &str, params: &Value) -> Result<Self> {
        fn p<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
            serde_path_to_error::deserialize(v).map_err(|e| located("params", e))
        }
        Ok(match family {
            "ssh" => ModelSpec::Ssh(p(params)?),
            "ssh_extended" => ModelSpec::SshExtended(p(params)?),
            "creutz" => ModelSpec::Creutz(p(params)?),
            "haldane" => ModelSpec::Haldane(p(params)?),
            "qwz" => ModelSpec::Qwz(p(params)?),
            "ssh2d" => ModelSpec::Ssh2d(p(params)?),
            "nonhermitian_ssh" => ModelSpec::NonHermitianSsh(p(params)?),
            other => {
                return Err(Error::param(
                    "model",
                    format!("unknown model {other:?}; expected one of {MODEL_NAMES:?}"),
                ))
            }
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Ssh(_) => "ssh",
            ModelSpec::SshExtended(_) => "ssh_extended",
            ModelSpec::Creutz(_) => "creutz",
            ModelSpec::Haldane(_) => "haldane",
            ModelSpec::Qwz(_) => "qwz",
            ModelSpec::Ssh2d(_) => "ssh2d",
            ModelSpec::NonHermitianSsh(_) => "nonhermitian_ssh",
        }
    }

    pub fn params_value(&self) -> Value {
        let v = match self {
            ModelSpec::Ssh(p) => serde_json::to_value(p),
            ModelSpec::SshExtended(p) => serde_json::to_value(p),
            ModelSpec::Creutz(p) => serde_json::to_value(p),
            ModelSpec::Haldane(p) => serde_json::to_value(p),
            ModelSpec::Qwz(p) => serde_json::to_value(p),
            ModelSpec::Ssh2d(p) => serde_json::to_value(p),
            ModelSpec::NonHermitianSsh(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs always serialise")
    }

    /// Overwrite one real parameter by name (sweep axes).
    pub fn set(&mut self, name: &str, x: f64) -> Result<()> {
        let slot: Option<&mut f64> = match self {
            ModelSpec::Ssh(p) => match name {
                "nu" => Some(&mut p.nu),
                "eta" => Some(&mut p.eta),
                "epsilon" => Some(&mut p.epsilon),
                _ => None,
            },
            ModelSpec::SshExtended(p) => match name {
                "nu" => Some(&mut p.nu),
                "epsilon" => Some(&mut p.epsilon),
                _ => None,
            },
            ModelSpec::Creutz(p) => match name {
                "eta0" => Some(&mut p.eta0),
                "eta0p" => Some(&mut p.eta0p),
                _ => None,
            },
            ModelSpec::Haldane(p) => match name {
                "eta1" => Some(&mut p.eta1),
                "eta2" => Some(&mut p.eta2),
                "phi" => Some(&mut p.phi),
                "mu" => Some(&mut p.mu),
                _ => None,
            },
            ModelSpec::Qwz(p) => match name {
                "eta0" => Some(&mut p.eta0),
                "mu_p" => Some(&mut p.mu_p),
                _ => None,
            },
            ModelSpec::Ssh2d(p) => match name {
                "nu_p" => Some(&mut p.nu_p),
                "w" => Some(&mut p.w),
                _ => None,
            },
            ModelSpec::NonHermitianSsh(p) => match name {
                "nu" => Some(&mut p.nu),
                "delta" => Some(&mut p.delta),
                "epsilon" => Some(&mut p.epsilon),
                _ => None,
            },
        };
        match slot {
            Some(s) => {
                *s = x;
                Ok(())
            }
            None => Err(Error::param(
                "sweep.axis",
                format!("model {} has no real parameter {name:?}", self.family()),
            )),
        }
    }

    pub fn build(&self, disorder: Option<&DisorderConfig>) -> Result<HamiltonianMatrix> {
        if disorder.is_some() && !matches!(self, ModelSpec::Ssh(_)) {
            return Err(Error::param("disorder", "disorder is only defined for the ssh model"));
        }
        match self {
            ModelSpec::Ssh(p) => lattice::build_ssh(p.n, p.nu, p.eta, p.epsilon, disorder),
            ModelSpec::SshExtended(p) => lattice::build_ssh_extended(p.n, p.nu, p.epsilon),
            ModelSpec::Creutz(p) => lattice::build_creutz(p.n, p.eta0, p.eta0p),
            ModelSpec::Haldane(p) => lattice::build_haldane(p.nx, p.ny, p.eta1, p.eta2, p.phi, p.mu),
            ModelSpec::Qwz(p) => lattice::build_qwz(p.nx, p.ny, p.eta0, p.mu_p),
            ModelSpec::Ssh2d(p) => lattice::build_ssh2d(p.nx, p.ny, p.nu_p, p.w),
            ModelSpec::NonHermitianSsh(p) => lattice::build_nonhermitian_ssh(p.n, p.nu, p.delta, p.epsilon),
        }
    }

    /// Number of cells along the chain (chains only).
    pub fn chain_cells(&self) -> Option<usize> {
        match self {
            ModelSpec::Ssh(p) => Some(p.n),
            ModelSpec::SshExtended(p) => Some(p.n),
            ModelSpec::Creutz(p) => Some(p.n),
            ModelSpec::NonHermitianSsh(p) => Some(p.n),
            _ => None,
        }
    }
}

/// Disorder section. Either `d` (meaning `d2 = 2·d1 = d`) or explicit
/// `d1`/`d2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    /// Seed of a single run, or `seed0` of an ensemble.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_configs")]
    pub n_configs: usize,
    #[serde(default = "default_prng")]
    pub prng: String,
}

fn default_configs() -> usize {
    30
}

fn default_prng() -> String {
    PRNG_TAG.to_string()
}

impl DisorderSpec {
    pub fn with_strength(d: f64) -> Self {
        DisorderSpec {
            d: Some(d),
            d1: None,
            d2: None,
            seed: 0,
            n_configs: default_configs(),
            prng: default_prng(),
        }
    }

    /// `(d1, d2)`.
    pub fn strengths(&self) -> Result<(f64, f64)> {
        let (d1, d2) = match (self.d, self.d1, self.d2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::param("disorder.d", "give either d or d1/d2, not both"))
            }
            (Some(d), None, None) => (0.5 * d, d),
            (None, a, b) => (a.unwrap_or(0.0), b.unwrap_or(0.0)),
        };
        for (k, v) in [("disorder.d1", d1), ("disorder.d2", d2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(k, format!("must be a non-negative number, got {v}")));
            }
        }
        Ok((d1, d2))
    }

    pub fn validate(&self) -> Result<()> {
        self.strengths()?;
        if self.prng != PRNG_TAG {
            return Err(Error::param(
                "disorder.prng",
                format!("unsupported generator {:?}; only {PRNG_TAG:?}", self.prng),
            ));
        }
        if self.n_configs == 0 {
            return Err(Error::param("disorder.n_configs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn set(&mut self, name: &str, x: f64) -> Result<()> {
        match name {
            "d" => {
                self.d = Some(x);
                self.d1 = None;
                self.d2 = None;
            }
            "d1" => {
                self.d = None;
                self.d1 = Some(x);
            }
            "d2" => {
                self.d = None;
                self.d2 = Some(x);
            }
            _ => return Err(Error::param("sweep.axis", format!("unknown disorder parameter {name:?}"))),
        }
        Ok(())
    }
}

/// Site label: `[n, "A"]` on chains, `[x, y, "A"]` on 2D lattices, or
/// `[X, Y]` square-lattice coordinates of the 2D SSH flake.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteLabel {
    Chain(usize, String),
    Cell(usize, usize, String),
    Square(usize, usize),
}

impl SiteLabel {
    pub fn row(&self, h: &HamiltonianMatrix) -> Result<usize> {
        let layout = &h.layout;
        match self {
            SiteLabel::Chain(n, s) => {
                if layout.kind != LayoutKind::Chain1d {
                    return Err(Error::param("site", "[n, sublattice] labels need a chain model"));
                }
                Site::chain(*n, s).index(layout)
            }
            SiteLabel::Cell(x, y, s) => Site {
                x: *x,
                y: *y,
                sub: s.clone(),
            }
            .index(layout),
            SiteLabel::Square(x, y) => {
                if layout.kind != LayoutKind::Square2d || layout.n_sub() != 4 {
                    return Err(Error::param("site", "[X, Y] labels need the ssh2d model"));
                }
                lattice::ssh2d_site(layout, *x, *y)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Basis {
        site: SiteLabel,
    },
    Staggered {
        m: usize,
        #[serde(default = "default_flavor")]
        flavor: StaggeredFlavor,
    },
    /// Lowest-|E| eigenstate, optionally projected on the A sublattice.
    LowestAbsEigenstate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degeneracy_tol: Option<f64>,
        #[serde(default = "yes")]
        project_qs: bool,
        /// Renormalise after projection.
        #[serde(default = "yes")]
        renormalize: bool,
    },
}

fn default_flavor() -> StaggeredFlavor {
    StaggeredFlavor::SshA
}

fn yes() -> bool {
    true
}

fn default_j() -> u8 {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    SiteProjector {
        sites: Vec<SiteLabel>,
    },
    SublatticeProjector {
        sublattice: String,
    },
    /// `Σ a_n† σ_j a_n` over `cells` (default `1..=N−1`).
    ChiralSum {
        #[serde(default = "default_j")]
        j: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cells: Option<[usize; 2]>,
    },
    Identity,
    /// Dense matrix file: header `dim`, then rows of `re im` pairs.
    MatrixFile {
        path: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    LongTimeLimit {
        #[serde(default = "default_tail")]
        tail_fraction: f64,
    },
    TimeAverage,
    FullSeries,
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_FRACTION
}

impl Default for ObservableSpec {
    fn default() -> Self {
        ObservableSpec::LongTimeLimit {
            tail_fraction: DEFAULT_TAIL_FRACTION,
        }
    }
}

impl ObservableSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableSpec::LongTimeLimit { .. } => "long_time_limit",
            ObservableSpec::TimeAverage => "time_average",
            ObservableSpec::FullSeries => "full_series",
        }
    }
}

/// The raw document; `params` is interpreted according to `model`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    pub initial_state: StateSpec,
    pub w_operator: OperatorSpec,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub observable: ObservableSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(s);
        let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| located("", e))?;
        cfg.pipeline()?;
        if let Some(sw) = &cfg.sweep {
            sw.validate()?;
        }
        Ok(cfg)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        Self::from_json_str(&v.to_string())
    }

    /// Canonical form: defaults filled in, parameter keys sorted.
    pub fn normalized(&self) -> Result<Value> {
        let p = self.pipeline()?;
        let mut c = self.clone();
        c.params = p.model.params_value();
        serde_json::to_value(&c).map_err(|e| Error::Numerical(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> Result<String> {
        let v = self.normalized()?;
        Ok(sha256_hex(v.to_string().as_bytes()))
    }

    pub fn pipeline(&self) -> Result<Pipeline> {
        let model = ModelSpec::from_parts(&self.model, &self.params)?;
        if let Some(d) = &self.disorder {
            d.validate()?;
        }
        self.time_grid.validate()?;
        if let ObservableSpec::LongTimeLimit { tail_fraction } = self.observable {
            if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
                return Err(Error::param("observable.tail_fraction", "must lie in (0, 1]"));
            }
        }
        let p = Pipeline {
            model,
            disorder: self.disorder.clone(),
            initial_state: self.initial_state.clone(),
            w_operator: self.w_operator.clone(),
            time_grid: self.time_grid,
            observable: self.observable,
        };
        // Builders carry the parameter-range checks.
        p.build_hamiltonian(None)?;
        Ok(p)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One fully-specified OTOC evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline {
    pub model: ModelSpec,
    pub disorder: Option<DisorderSpec>,
    pub initial_state: StateSpec,
    pub w_operator: OperatorSpec,
    pub time_grid: TimeGrid,
    pub observable: ObservableSpec,
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub series: OtocSeries,
    /// Scalar observable (`None` for `full_series`).
    pub value: Option<f64>,
    /// Spread of the tail for `long_time_limit`.
    pub std: Option<f64>,
}

impl Pipeline {
    pub fn new(model: ModelSpec, initial_state: StateSpec, w_operator: OperatorSpec) -> Self {
        Pipeline {
            model,
            disorder: None,
            initial_state,
            w_operator,
            time_grid: TimeGrid::default(),
            observable: ObservableSpec::default(),
        }
    }

    /// Disorder draw for this run; `seed` overrides the configured seed.
    pub fn disorder_config(&self, seed: Option<u64>) -> Result<Option<DisorderConfig>> {
        let Some(d) = &self.disorder else { return Ok(None) };
        let n = match &self.model {
            ModelSpec::Ssh(p) => p.n,
            _ => return Err(Error::param("disorder", "disorder is only defined for the ssh model")),
        };
        let (d1, d2) = d.strengths()?;
        Ok(Some(draw_disorder(seed.unwrap_or(d.seed), n, d1, d2)?))
    }

    pub fn build_hamiltonian(&self, seed: Option<u64>) -> Result<HamiltonianMatrix> {
        let dis = self.disorder_config(seed)?;
        self.model.build(dis.as_ref())
    }

    pub fn operator(&self, h: &HamiltonianMatrix) -> Result<OperatorMatrix> {
        build_operator(&self.w_operator, h)
    }

    pub fn state(&self, h: &HamiltonianMatrix, p: &Propagator) -> Result<StateVector> {
        build_state(&self.initial_state, h, p)
    }

    /// Build, decompose once, sample the series and reduce it.
    pub fn run(&self, seed: Option<u64>, decompositions: Option<&AtomicUsize>) -> Result<PointResult> {
        let h = self.build_hamiltonian(seed)?;
        let p = spectral_decompose(&h)?;
        if let Some(c) = decompositions {
            c.fetch_add(1, Ordering::Relaxed);
        }
        let w = self.operator(&h)?;
        let psi = self.state(&h, &p)?;
        let series = otoc_series(&p, &w, &psi, &self.time_grid)?;
        reduce(series, &self.observable)
    }
}

pub fn reduce(series: OtocSeries, obs: &ObservableSpec) -> Result<PointResult> {
    let (value, std) = match *obs {
        ObservableSpec::LongTimeLimit { tail_fraction } => {
            let lt = long_time_limit(&series, tail_fraction)?;
            (Some(lt.mean), Some(lt.std))
        }
        ObservableSpec::TimeAverage => (Some(time_average(&series)?), None),
        ObservableSpec::FullSeries => (None, None),
    };
    if let Some(v) = value {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("observable is not finite ({v})")));
        }
    }
    Ok(PointResult { series, value, std })
}

pub fn build_operator(spec: &OperatorSpec, h: &HamiltonianMatrix) -> Result<OperatorMatrix> {
    let layout = &h.layout;
    match spec {
        OperatorSpec::SiteProjector { sites } => {
            let rows = sites.iter().map(|s| s.row(h)).collect::<Result<Vec<_>>>()?;
            operators::projector_rows(h.dim(), &rows)
        }
        OperatorSpec::SublatticeProjector { sublattice } => operators::sublattice_projector(layout, sublattice),
        OperatorSpec::ChiralSum { j, cells } => match cells {
            Some([a, b]) => operators::chiral_partial(layout, *j, *a..=*b),
            None => operators::chiral_sum(layout, *j),
        },
        OperatorSpec::Identity => Ok(OperatorMatrix::identity(h.dim())),
        OperatorSpec::MatrixFile { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::param("w_operator.path", format!("{path}: {e}")))?;
            let m = crate::io::read_dense_matrix(&text)?;
            if m.nrows() != h.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "operator file has dimension {}, model has {}",
                    m.nrows(),
                    h.dim()
                )));
            }
            OperatorMatrix::from_matrix(m)
        }
    }
}

pub fn build_state(spec: &StateSpec, h: &HamiltonianMatrix, p: &Propagator) -> Result<StateVector> {
    let layout = &h.layout;
    match spec {
        StateSpec::Basis { site } => operators::basis_state_row(h.dim(), site.row(h)?),
        StateSpec::Staggered { m, flavor } => operators::staggered_state(layout, *m, *flavor),
        StateSpec::LowestAbsEigenstate {
            degeneracy_tol,
            project_qs: proj,
            renormalize,
        } => {
            let tol = degeneracy_tol.unwrap_or(1e-8 * h.energy_unit);
            let psi = lowest_abs_eigenstate_from(p, layout, tol)?;
            if !proj {
                return Ok(psi);
            }
            let mut q = project_qs(layout, &psi);
            if *renormalize {
                q.normalize()?;
            }
            Ok(q)
        }
    }
}
