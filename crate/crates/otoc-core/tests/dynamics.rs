use faer::Mat;
use otoc_core::c64;
use otoc_core::dynamics::*;
use otoc_core::lattice::{build_nonhermitian_ssh, build_ssh, HamiltonianMatrix, LatticeLayout};
use otoc_core::operators::*;

fn two_level() -> HamiltonianMatrix {
    let mut m = Mat::<c64>::zeros(2, 2);
    m[(0, 0)] = c64::new(1.0, 0.0);
    m[(1, 1)] = c64::new(-1.0, 0.0);
    HamiltonianMatrix {
        entries: m,
        hermitian: true,
        layout: LatticeLayout::chain(1),
        energy_unit: 1.0,
    }
}

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

#[test]
fn two_level_phases() {
    let h = two_level();
    let p = spectral_decompose(&h).unwrap();
    let psi = StateVector::new(vec![c64::new(1.0, 0.0), c64::new(0.0, 0.0)]);
    let t = 0.7;
    let out = p.evolve(&psi, t).unwrap();
    assert!((out.amplitudes[0] - c64::new(t.cos(), -t.sin())).norm() < 1e-14);
    assert!(out.amplitudes[1].norm() < 1e-14);
}

#[test]
fn evolution_is_unitary() {
    let h = build_ssh(40, 0.7, 0.0, 1.0, None).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let psi = basis_state_row(80, 3).unwrap();
    let out = p.evolve(&psi, 400.0).unwrap();
    assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
    let back = p.evolve(&out, -400.0).unwrap();
    let err = back.amplitudes.iter().zip(&psi.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-10, "{err}");
}

#[test]
fn decoupled_cells_freeze_the_otoc() {
    // ν = 0 isolates |1,A⟩ (no intracell bond): W commutes with the dynamics
    let h = build_ssh(5, 0.0, 0.0, 1.0, None).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let w = projector_rows(10, &[0]).unwrap();
    let psi = basis_state_row(10, 0).unwrap();
    let s = otoc_series(&p, &w, &psi, &TimeGrid::new(50.0, 0.5).unwrap()).unwrap();
    for v in &s.values {
        assert!((v - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn random_operator_against_trace_oracle() {
    let mut seed = 17;
    let h = build_ssh(3, 0.6, 0.0, 1.0, None).unwrap();
    let mut a = Mat::<c64>::zeros(6, 6);
    for i in 0..6 {
        for j in 0..=i {
            let z = c64::new(lcg(&mut seed), if i == j { 0.0 } else { lcg(&mut seed) });
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let w = OperatorMatrix::from_matrix(a).unwrap();
    let mut psi = StateVector::new((0..6).map(|_| c64::new(lcg(&mut seed), lcg(&mut seed))).collect());
    psi.normalize().unwrap();
    let p = spectral_decompose(&h).unwrap();
    let rho = density_matrix(&psi);
    for t in [0.0, 0.3, 2.5, 11.0] {
        let s = otoc_amplitude(&p, &w, &psi, t).unwrap().norm_sqr();
        let o = otoc_trace_oracle(&h, &w, &rho, t).unwrap();
        assert!((s - o).abs() <= 1e-12, "t={t}: {s} vs {o}");
    }
}

#[test]
fn identity_operator_gives_one() {
    let h = build_ssh(4, 1.3, 0.0, 1.0, None).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let w = OperatorMatrix::identity(8);
    let psi = staggered_state(&h.layout, 3, StaggeredFlavor::SshA).unwrap();
    let s = otoc_series(&p, &w, &psi, &TimeGrid::new(20.0, 1.0).unwrap()).unwrap();
    assert!(s.values.iter().all(|v| (v - 1.0).abs() <= 1e-12));
    let o = otoc_trace_oracle(&h, &w, &density_matrix(&psi), 3.0).unwrap();
    assert!((o - 1.0).abs() <= 1e-12);
}

#[test]
fn nonhermitian_reconstruction() {
    let h = build_nonhermitian_ssh(30, 1.5, 0.4, 1.0).unwrap();
    let p = spectral_decompose(&h).unwrap();
    assert_ne!(p.kind, PropagatorKind::HermitianSpectral);
    assert!(p.reconstruction_residual_original(&h) <= 1e-9);
}

#[test]
fn nonhermitian_series_matches_oracle() {
    let h = build_nonhermitian_ssh(4, 1.5, 0.4, 1.0).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let w = projector_rows(8, &[0]).unwrap();
    let psi = basis_state_row(8, 0).unwrap();
    let rho = density_matrix(&psi);
    let s = otoc_series(&p, &w, &psi, &TimeGrid::new(5.0, 0.5).unwrap()).unwrap();
    for (t, v) in s.times.iter().zip(&s.values) {
        let o = otoc_trace_oracle(&h, &w, &rho, *t).unwrap();
        assert!((v - o).abs() <= 1e-9 * o.max(1.0), "t={t}");
    }
}

#[test]
fn forced_expm_agrees_with_spectral() {
    let h = build_nonhermitian_ssh(6, 1.2, 0.3, 1.0).unwrap();
    let a = spectral_decompose(&h).unwrap();
    let b = spectral_decompose_with(
        &h,
        DecomposeOptions {
            force_expm: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(b.kind, PropagatorKind::ScaledExpm);
    let w = projector_rows(12, &[0, 2]).unwrap();
    let psi = basis_state_row(12, 0).unwrap();
    let g = TimeGrid::new(10.0, 0.25).unwrap();
    let sa = otoc_series(&a, &w, &psi, &g).unwrap();
    let sb = otoc_series(&b, &w, &psi, &g).unwrap();
    for (x, y) in sa.values.iter().zip(&sb.values) {
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn csv_has_one_row_per_sample() {
    let h = build_ssh(5, 0.5, 0.0, 1.0, None).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let g = TimeGrid::new(400.0, 0.2).unwrap();
    let w = projector_rows(10, &[0]).unwrap();
    let s = otoc_series(&p, &w, &basis_state_row(10, 0).unwrap(), &g).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf, false).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,otoc");
    assert_eq!(lines.len(), 2002);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() <= 1e-12);
    let mut buf = Vec::new();
    s.write_csv(&mut buf, true).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,otoc,re_s,im_s\n"));
}

#[test]
fn long_time_of_constant_is_exact() {
    let s = OtocSeries {
        times: (0..11).map(|k| k as f64).collect(),
        values: vec![0.3; 11],
        amplitudes: None,
        fingerprint: None,
    };
    let lt = long_time_limit(&s, 0.5).unwrap();
    assert_eq!(lt.mean, 0.3);
    assert_eq!(lt.std, 0.0);
    assert_eq!(time_average(&s).unwrap(), 0.3);
    assert!(long_time_limit(&s, 0.0).is_err());
    assert!(long_time_limit(&s, 1.5).is_err());
}

#[test]
fn long_time_stable_under_dt_halving() {
    let h = build_ssh(30, 0.6, 0.0, 1.0, None).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let w = projector_rows(60, &[0]).unwrap();
    let psi = basis_state_row(60, 0).unwrap();
    let a = otoc_series(&p, &w, &psi, &TimeGrid::new(200.0, 0.2).unwrap()).unwrap();
    let b = otoc_series(&p, &w, &psi, &TimeGrid::new(200.0, 0.1).unwrap()).unwrap();
    let (la, lb) = (long_time_limit(&a, 0.5).unwrap(), long_time_limit(&b, 0.5).unwrap());
    assert!((la.mean - lb.mean).abs() < 1e-3);
}

#[test]
fn grid_validation() {
    assert!(TimeGrid::new(0.0, 0.1).is_err());
    assert!(TimeGrid::new(1.0, -0.1).is_err());
    assert!(TimeGrid::new(1.0, 1e-8).is_err());
    assert_eq!(TimeGrid::new(1.0, 0.5).unwrap().len(), 3);
    assert_eq!(TimeGrid::default().len(), 1001);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let h = build_ssh(3, 0.5, 0.0, 1.0, None).unwrap();
    let p = spectral_decompose(&h).unwrap();
    let w = projector_rows(4, &[0]).unwrap();
    assert!(otoc_amplitude(&p, &w, &basis_state_row(6, 0).unwrap(), 1.0).is_err());
    assert!(otoc_trace_oracle(&build_ssh(40, 0.5, 0.0, 1.0, None).unwrap(), &OperatorMatrix::identity(80), &Mat::zeros(80, 80), 1.0).is_err());
}
