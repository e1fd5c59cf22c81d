//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every tolerance is a named constant below. Failing criteria are printed
//! and counted but do not abort the run; set `OTOC_ACCEPTANCE_STRICT=1` to
//! turn any failure into a non-zero exit.

use std::time::Instant;

use serde_json::{json, Value};

use otoc_core::analytic::analytic_eigenpairs;
use otoc_core::config::{Pipeline, RunConfig};
use otoc_core::dynamics::{
    density_matrix, long_time_limit, otoc_amplitude, otoc_series, otoc_trace_oracle, spectral_decompose, TimeGrid,
};
use otoc_core::ensemble::ensemble_average;
use otoc_core::lattice::{self, ChiralModel, HamiltonianMatrix};
use otoc_core::operators::{basis_state_row, projector_rows, OperatorMatrix};
use otoc_core::sweep::{crossings, sweep, AxisSpec, SweepSpec, Threshold};
use otoc_core::validate::{validate, ChainMode};
use otoc_core::c64;

/// Absolute detection threshold for the zero-to-finite transition.
const DETECT: f64 = 1e-6;
const N: usize = 200;

const C1_MIN_PLATEAU: f64 = 0.25;
const C1_TARGET: f64 = 0.316;
const C1_REL: f64 = 0.10;
const TRIVIAL_MAX: f64 = 1e-3;
const CRIT_TOL: f64 = 0.05;
const C2_REL: f64 = 0.10;
const C3_TOL: f64 = 1e-6;
const C4_TOL: f64 = 1e-9;
const C5_TOP_TOL: f64 = 1e-6;
const C5_BOTTOM: f64 = 0.375;
const C5_BOTTOM_TOL: f64 = 0.01;
const C8_MIN_PLATEAU: f64 = 0.01;
const C8_RATIO: f64 = 1e-2;
const C8_CRIT_TOL: f64 = 0.5;
const C10_CONTRAST: f64 = 100.0;
const C11_REL: f64 = 0.20;
const C11_CONFIGS: usize = 10;
const C11_STEP_THRESHOLD: f64 = (1.0 + 0.375) / 2.0;
const ORACLE_TOL: f64 = 1e-12;
const ECHO_TOL: f64 = 1e-10;
const SYM_TOL: f64 = 1e-12;
const O0_TOL: f64 = 1e-12;

struct Suite {
    passed: usize,
    failed: Vec<String>,
}

impl Suite {
    fn report(&mut self, id: &str, ok: bool, detail: String, started: Instant) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {detail} ({:.1}s)", started.elapsed().as_secs_f64());
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }
}

fn pipeline(v: Value) -> Pipeline {
    RunConfig::from_value(v).expect("valid config").pipeline().expect("pipeline")
}

fn site_a1() -> Value {
    json!({"kind": "site_projector", "sites": [[1, "A"]]})
}

fn basis_a1() -> Value {
    json!({"kind": "basis", "site": [1, "A"]})
}

fn value(p: &Pipeline) -> f64 {
    p.run(None, None).expect("run").value.expect("scalar")
}

fn sweep1(p: &Pipeline, axis: AxisSpec) -> (Vec<f64>, Vec<f64>) {
    let r = sweep(p, &SweepSpec::one(axis), None).expect("sweep");
    (r.axis1.values.clone(), r.column())
}

fn near(xs: &[f64], target: f64, tol: f64) -> bool {
    xs.iter().any(|x| (x - target).abs() <= tol)
}

fn fmt_list(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", v.join(", "))
}

fn c1(s: &mut Suite) {
    let t = Instant::now();
    let mk = |nu: f64| {
        pipeline(json!({"model": "ssh", "params": {"n": N, "nu": nu},
            "initial_state": basis_a1(), "w_operator": site_a1()}))
    };
    let lo = value(&mk(0.5));
    let hi = value(&mk(1.5));
    let (xs, ys) = sweep1(&mk(1.0), AxisSpec::range("nu", 0.2, 2.0, 0.05));
    let cr = crossings(&xs, &ys, DETECT);
    let ok = lo >= C1_MIN_PLATEAU
        && (lo - C1_TARGET).abs() <= C1_REL * C1_TARGET
        && hi <= TRIVIAL_MAX
        && cr.len() == 1
        && near(&cr, 1.0, CRIT_TOL);
    s.report(
        "1 NN SSH site operator",
        ok,
        format!("O(nu=0.5)={lo:.4} O(nu=1.5)={hi:.2e} crossings={}", fmt_list(&cr)),
        t,
    );
}

fn c2(s: &mut Suite) {
    let t = Instant::now();
    let mk = |nu: f64| {
        pipeline(json!({"model": "ssh", "params": {"n": N, "nu": nu},
            "initial_state": basis_a1(), "w_operator": {"kind": "chiral_sum", "j": 3}}))
    };
    let target = (1.0f64 - 0.25).powi(2);
    let lo = value(&mk(0.5));
    let hi = value(&mk(1.5));
    let ok = (lo - target).abs() <= C2_REL * target && hi <= TRIVIAL_MAX;
    s.report(
        "2 NN SSH chiral-sum operator",
        ok,
        format!("O(nu=0.5)={lo:.4} (target {target:.4}) O(nu=1.5)={hi:.2e}"),
        t,
    );
}

fn c3(s: &mut Suite) {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for w in [site_a1(), json!({"kind": "chiral_sum", "j": 3})] {
        for nu in [0.5, 1.5] {
            let cfg = RunConfig::from_value(json!({"model": "ssh_extended", "params": {"n": N, "nu": nu},
                "initial_state": basis_a1(), "w_operator": w.clone(),
                "time_grid": {"t_max": 400.0, "dt": 0.2}}))
            .unwrap();
            let r = validate(&cfg, ChainMode::Extended, None).expect("validate");
            worst = worst.max(r.max_diff);
            parts.push(format!("{}@{nu}:{:.1e}", w["kind"].as_str().unwrap(), r.max_diff));
        }
    }
    s.report(
        "3 closed form vs numerics",
        worst <= C3_TOL,
        format!("max|diff|={worst:.2e} {}", parts.join(" ")),
        t,
    );
}

fn c4(s: &mut Suite) {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for nu in [0.5, 1.0, 1.5] {
        let sys = analytic_eigenpairs(N, nu, 1.0).unwrap();
        let h = lattice::build_ssh_extended(N, nu, 1.0).unwrap();
        let p = spectral_decompose(&h).unwrap();
        let mut num: Vec<f64> = p.eigenvalues.iter().map(|z| z.re).collect();
        num.sort_by(f64::total_cmp);
        let ana = sys.eigenvalues_sorted();
        for (a, b) in ana.iter().zip(&num) {
            worst = worst.max((a - b).abs());
        }
    }
    s.report("4 eigenpair formulas", worst <= C4_TOL, format!("max|dlambda|={worst:.2e}"), t);
}

fn eigen_pipeline(nu: f64) -> Pipeline {
    pipeline(json!({"model": "ssh", "params": {"n": N, "nu": nu},
        "initial_state": {"kind": "lowest_abs_eigenstate"},
        "w_operator": {"kind": "sublattice_projector", "sublattice": "A"},
        "observable": {"kind": "time_average"}}))
}

fn c5(s: &mut Suite) {
    let t = Instant::now();
    let top = value(&eigen_pipeline(0.5));
    let bottom = value(&eigen_pipeline(2.0));
    let ok = (top - 1.0).abs() <= C5_TOP_TOL && (bottom - C5_BOTTOM).abs() <= C5_BOTTOM_TOL;
    s.report(
        "5 eigenstate initial state",
        ok,
        format!("Obar(nu=0.5)={top:.8} Obar(nu=2)={bottom:.4}"),
        t,
    );
}

fn c6(s: &mut Suite) {
    let t = Instant::now();
    let p = pipeline(json!({"model": "creutz", "params": {"n": N, "eta0": 1.0, "eta0p": 1.0},
        "initial_state": basis_a1(), "w_operator": site_a1()}));
    let (xs, ys) = sweep1(&p, AxisSpec::range("eta0", 0.2, 2.0, 0.05));
    let cr = crossings(&xs, &ys, DETECT);
    let left = xs.iter().zip(&ys).filter(|(x, _)| **x <= 1.0 - 2.0 * CRIT_TOL).map(|(_, y)| *y);
    let right = xs.iter().zip(&ys).filter(|(x, _)| **x >= 1.0 + 2.0 * CRIT_TOL).map(|(_, y)| *y);
    let left_min = left.fold(f64::INFINITY, f64::min);
    let right_max = right.fold(0.0, f64::max);
    let ok = cr.len() == 1 && near(&cr, 1.0, CRIT_TOL) && left_min >= DETECT && right_max < DETECT;
    s.report(
        "6 Creutz ladder",
        ok,
        format!(
            "crossings={} min O(eta0<0.9)={left_min:.2e} max O(eta0>1.1)={right_max:.2e}",
            fmt_list(&cr)
        ),
        t,
    );
}

fn c7(s: &mut Suite) {
    let t = Instant::now();
    let p = pipeline(json!({"model": "ssh", "params": {"n": N, "nu": 1.0, "eta": 0.0},
        "initial_state": basis_a1(), "w_operator": site_a1()}));
    let (xs, ys) = sweep1(&p, AxisSpec::range("eta", -0.5, 2.0, 0.05));
    let cr = crossings(&xs, &ys, DETECT);
    let at = |x0: f64| ys[xs.iter().position(|x| (x - x0).abs() < 1e-9).unwrap()];
    let ok = near(&cr, 0.0, CRIT_TOL) && near(&cr, 1.0, CRIT_TOL);
    s.report(
        "7 NNNN SSH",
        ok,
        format!(
            "crossings={} plateaus O(-0.3)={:.2e} O(0.5)={:.2e} O(1.5)={:.2e}",
            fmt_list(&cr),
            at(-0.3),
            at(0.5),
            at(1.5)
        ),
        t,
    );
}

fn c8(s: &mut Suite) {
    let t = Instant::now();
    let mus = [0.0, 1.0, 2.0, 3.0, 4.0, 4.5, 5.0, 5.5, 6.0, 7.0];
    let p = pipeline(json!({"model": "haldane",
        "params": {"nx": 20, "ny": 20, "eta1": 1.0, "eta2": 1.0, "phi": std::f64::consts::FRAC_PI_2, "mu": 0.0},
        "initial_state": {"kind": "basis", "site": [1, 1, "A"]},
        "w_operator": {"kind": "sublattice_projector", "sublattice": "B"}}));
    let (xs, ys) = sweep1(&p, AxisSpec::values("mu", mus.to_vec()));
    let at3 = ys[3];
    let at7 = ys[9];
    let cr = crossings(&xs, &ys, DETECT);
    let cr_rel = crossings(&xs, &ys, 0.05 * ys.iter().cloned().fold(0.0, f64::max));
    let mu_c = 3.0 * 3f64.sqrt();
    let ok = at3 >= C8_MIN_PLATEAU && at7 <= C8_RATIO * at3 && near(&cr, mu_c, C8_CRIT_TOL);
    s.report(
        "8 Haldane flake",
        ok,
        format!(
            "O(mu=3)={at3:.3e} O(mu=7)={at7:.3e} ratio={:.2e} crossings={} (0.05*max: {})",
            at7 / at3,
            fmt_list(&cr),
            fmt_list(&cr_rel)
        ),
        t,
    );
}

fn ssh2d_point(nu_p: f64, ws: &[OperatorMatrix], psi_row: usize) -> Vec<f64> {
    let h = lattice::build_ssh2d(20, 20, nu_p, 1.0).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let psi = basis_state_row(h.dim(), psi_row).unwrap();
    ws.iter()
        .map(|w| {
            let series = otoc_series(&p, w, &psi, &TimeGrid::default()).unwrap();
            long_time_limit(&series, 0.5).unwrap().mean
        })
        .collect()
}

fn c9(s: &mut Suite) {
    let t = Instant::now();
    let layout = lattice::build_ssh2d(20, 20, 1.0, 1.0).unwrap().layout;
    let site = |x, y| lattice::ssh2d_site(&layout, x, y).unwrap();
    let dim = layout.dim();
    let ws = [
        projector_rows(dim, &[site(1, 1)]).unwrap(),
        projector_rows(dim, &[site(1, 1), site(1, 3), site(3, 1)]).unwrap(),
    ];
    let xs: Vec<f64> = (0..=20).map(|k| 0.5 + 0.05 * k as f64).collect();
    let vals: Vec<Vec<f64>> = xs.iter().map(|&x| ssh2d_point(x, &ws, site(1, 1))).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, name) in ["W=a11", "W=a11+a13+a31"].iter().enumerate() {
        let ys: Vec<f64> = vals.iter().map(|v| v[k]).collect();
        let cr = crossings(&xs, &ys, DETECT);
        let cr_rel = crossings(&xs, &ys, 0.05 * ys.iter().cloned().fold(0.0, f64::max));
        ok &= near(&cr, 1.0, CRIT_TOL);
        parts.push(format!(
            "{name}: O(0.5)={:.2e} O(1)={:.2e} O(1.5)={:.2e} crossings={} (0.05*max: {})",
            ys[0],
            ys[10],
            ys[20],
            fmt_list(&cr),
            fmt_list(&cr_rel)
        ));
    }
    s.report("9 2D SSH corner", ok, parts.join("; "), t);
}

fn c10(s: &mut Suite) {
    let t = Instant::now();
    let delta = 0.4;
    let nu_c = (1.0f64 + delta * delta).sqrt();
    let p = pipeline(json!({"model": "nonhermitian_ssh", "params": {"n": N, "nu": 1.0, "delta": delta},
        "initial_state": basis_a1(), "w_operator": site_a1()}));
    let (xs, ys) = sweep1(&p, AxisSpec::range("nu", 0.6, 1.6, 0.05));
    let cr = crossings(&xs, &ys, DETECT);
    let left_min = xs.iter().zip(&ys).filter(|(x, _)| **x <= nu_c - 0.1).map(|(_, y)| *y).fold(f64::INFINITY, f64::min);
    let right_max = xs.iter().zip(&ys).filter(|(x, _)| **x >= nu_c + 0.1).map(|(_, y)| *y).fold(0.0, f64::max);
    let ok = cr.len() == 1 && near(&cr, nu_c, CRIT_TOL) && left_min >= C10_CONTRAST * right_max;
    s.report(
        "10 non-Hermitian SSH",
        ok,
        format!(
            "nu_c={nu_c:.4} crossings={} min O(left)={left_min:.2e} max O(right)={right_max:.2e}",
            fmt_list(&cr)
        ),
        t,
    );
}

fn c11(s: &mut Suite) {
    let t = Instant::now();
    let mut p = pipeline(json!({"model": "ssh", "params": {"n": N, "nu": 0.2},
        "disorder": {"d": 1.0, "seed": 0, "n_configs": C11_CONFIGS},
        "initial_state": basis_a1(), "w_operator": site_a1()}));
    let obs = p.observable;
    let dirty = ensemble_average(&p, C11_CONFIGS, 0, obs, None).unwrap().mean.scalar().unwrap();
    p.disorder = None;
    let clean = value(&p);
    let rel = (dirty - clean).abs() / clean;
    let ok_a = rel <= C11_REL;

    let axis = AxisSpec::range("nu", 0.8, 1.5, 0.05);
    let th = Threshold::Absolute {
        value: C11_STEP_THRESHOLD,
    };
    let crit = |p: &Pipeline| {
        let r = sweep(p, &SweepSpec::one(axis.clone()), None).unwrap();
        let cr = otoc_core::sweep::detect_transition(&r, th).unwrap();
        cr.last().copied()
    };
    let clean_c = crit(&eigen_pipeline(1.0));
    let mut dp = eigen_pipeline(1.0);
    dp.disorder = Some(otoc_core::config::DisorderSpec {
        n_configs: C11_CONFIGS,
        ..otoc_core::config::DisorderSpec::with_strength(2.0)
    });
    let dirty_c = crit(&dp);
    let ok_b = matches!((clean_c, dirty_c), (Some(a), Some(b)) if b > a);
    s.report(
        "11 disorder robustness and TAI shift",
        ok_a && ok_b,
        format!(
            "(a) O(d=0)={clean:.4} O(d=1)={dirty:.4} rel={rel:.3}; (b) nu_c(d=0)={clean_c:?} nu_c(d=2)={dirty_c:?}"
        ),
        t,
    );
}

fn oracle_models() -> Vec<HamiltonianMatrix> {
    vec![
        lattice::build_ssh(4, 0.6, 0.3, 1.0, None).unwrap(),
        lattice::build_creutz(4, 0.7, 1.0).unwrap(),
        lattice::build_haldane(2, 2, 1.0, 0.4, 1.1, 0.5).unwrap(),
        lattice::build_qwz(2, 2, 1.0, 0.8).unwrap(),
        lattice::build_ssh2d(2, 2, 0.6, 1.0).unwrap(),
        lattice::build_nonhermitian_ssh(4, 1.2, 0.4, 1.0).unwrap(),
        lattice::build_ssh_extended(3, 0.5, 1.0).unwrap(),
    ]
}

fn c12(s: &mut Suite) {
    let t = Instant::now();
    let mut oracle: f64 = 0.0;
    let mut echo: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for h in oracle_models() {
        let d = h.dim();
        assert!(d <= 16);
        let p = spectral_decompose(&h).unwrap();
        let w = projector_rows(d, &[0, d / 2]).unwrap();
        let mut amps: Vec<c64> = (0..d).map(|i| c64::new(1.0 + i as f64 * 0.1, 0.3 - 0.05 * i as f64)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|z| *z /= norm);
        let psi = otoc_core::operators::StateVector::new(amps);
        let rho = density_matrix(&psi);
        for tt in [0.0, 0.7, 3.1] {
            let a = otoc_amplitude(&p, &w, &psi, tt).unwrap().norm_sqr();
            let b = otoc_trace_oracle(&h, &w, &rho, tt).unwrap();
            oracle = oracle.max((a - b).abs());
            let fwd = p.evolve(&psi, tt).unwrap();
            let back = p.evolve(&fwd, -tt).unwrap();
            let e = back
                .amplitudes
                .iter()
                .zip(&psi.amplitudes)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            echo = echo.max(e);
            if h.hermitian {
                echo = echo.max((fwd.norm_sqr() - 1.0).abs());
            }
        }
        if h.hermitian {
            herm = herm.max(h.hermiticity_residual());
        }
    }
    let ssh = lattice::build_ssh(N, 0.5, 0.0, 1.0, None).unwrap();
    let cr = lattice::build_creutz(N, 0.7, 1.0).unwrap();
    let chiral = lattice::symmetry_residual(&ssh, &lattice::chiral_operator(ChiralModel::Ssh, N).unwrap())
        .unwrap()
        .max(lattice::symmetry_residual(&cr, &lattice::chiral_operator(ChiralModel::Creutz, N).unwrap()).unwrap());

    // O(0) = 1 whenever the initial state lies inside the operator's support.
    let standard = [
        json!({"model": "ssh", "params": {"n": N, "nu": 0.5}, "initial_state": basis_a1(), "w_operator": site_a1()}),
        json!({"model": "ssh", "params": {"n": N, "nu": 1.5}, "initial_state": basis_a1(),
               "w_operator": {"kind": "chiral_sum", "j": 3}}),
        json!({"model": "creutz", "params": {"n": N, "eta0": 0.5}, "initial_state": basis_a1(), "w_operator": site_a1()}),
        json!({"model": "nonhermitian_ssh", "params": {"n": N, "nu": 1.2, "delta": 0.4},
               "initial_state": basis_a1(), "w_operator": site_a1()}),
        json!({"model": "ssh2d", "params": {"nx": 6, "ny": 6, "nu_p": 0.5},
               "initial_state": {"kind": "basis", "site": [1, 1]},
               "w_operator": {"kind": "site_projector", "sites": [[1, 1]]}}),
    ];
    let mut o0: f64 = 0.0;
    for cfg in standard {
        let mut p = pipeline(cfg);
        p.time_grid = TimeGrid::new(1.0, 0.5).unwrap();
        let r = p.run(None, None).unwrap();
        o0 = o0.max((r.series.values[0] - 1.0).abs());
    }

    let small = pipeline(json!({"model": "ssh", "params": {"n": 30, "nu": 0.8},
        "initial_state": basis_a1(), "w_operator": site_a1()}));
    let spec = SweepSpec {
        axis1: AxisSpec::range("nu", 0.5, 1.5, 0.25),
        axis2: Some(AxisSpec::values("epsilon", vec![0.5, 1.0])),
        threshold: None,
    };
    let g1 = sweep(&small, &spec, Some(1)).unwrap().grid;
    let g4 = sweep(&small, &spec, Some(4)).unwrap().grid;
    let bits = |g: &Vec<Vec<f64>>| g.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
    let sweep_same = bits(&g1) == bits(&g4);

    let mut dis = small.clone();
    dis.disorder = Some(otoc_core::config::DisorderSpec::with_strength(1.0));
    let obs = dis.observable;
    let e1 = ensemble_average(&dis, 6, 42, obs, Some(1)).unwrap();
    let e2 = ensemble_average(&dis, 6, 42, obs, Some(3)).unwrap();
    let ens_same = serde_json::to_string(&e1).unwrap() == serde_json::to_string(&e2).unwrap();

    let ok = oracle <= ORACLE_TOL
        && echo <= ECHO_TOL
        && herm <= SYM_TOL
        && chiral <= SYM_TOL
        && o0 <= O0_TOL
        && sweep_same
        && ens_same;
    s.report(
        "12 property suites",
        ok,
        format!(
            "oracle={oracle:.1e} echo={echo:.1e} herm={herm:.1e} chiral={chiral:.1e} |O(0)-1|={o0:.1e} \
             sweep_bits_equal={sweep_same} ensemble_bits_equal={ens_same}"
        ),
        t,
    );
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a name filter
    // that matches nothing here skips the suite.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let mut s = Suite {
        passed: 0,
        failed: Vec::new(),
    };
    let all: [fn(&mut Suite); 12] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12];
    for f in all {
        f(&mut s);
    }
    println!(
        "acceptance: {} passed, {} failed{}",
        s.passed,
        s.failed.len(),
        if s.failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", s.failed.join("; "))
        }
    );
    if std::env::var("OTOC_ACCEPTANCE_STRICT").map_or(false, |v| v == "1") && !s.failed.is_empty() {
        std::process::exit(1);
    }
}
