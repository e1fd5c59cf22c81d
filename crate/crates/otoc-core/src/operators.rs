//! OTOC operators `W`, projectors and initial states.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::dynamics::{spectral_decompose, Propagator, PropagatorKind};
use crate::error::{Error, Result};
use crate::lattice::{CMat, HamiltonianMatrix, LatticeLayout, LayoutKind};

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub entries: CMat,
    /// Upper bound on the operator norm.
    pub opnorm_bound: f64,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix {
            entries: Mat::identity(dim, dim),
            opnorm_bound: 1.0,
        }
    }

    /// Wrap an arbitrary square matrix; the bound is `sqrt(‖A‖₁‖A‖∞)`.
    pub fn from_matrix(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let (mut c1, mut cinf) = (0.0f64, vec![0.0f64; m.nrows()]);
        for j in 0..m.ncols() {
            let mut s = 0.0;
            for i in 0..m.nrows() {
                let a = m[(i, j)].norm();
                s += a;
                cinf[i] += a;
            }
            c1 = c1.max(s);
        }
        let rinf = cinf.into_iter().fold(0.0, f64::max);
        Ok(OperatorMatrix {
            entries: m,
            opnorm_bound: (c1 * rinf).sqrt(),
        })
    }

    /// Diagonal entries when the operator is diagonal, `None` otherwise.
    pub fn diagonal(&self) -> Option<Vec<c64>> {
        let m = &self.entries;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if i != j && m[(i, j)] != ZERO {
                    return None;
                }
            }
        }
        Some((0..m.nrows()).map(|i| m[(i, i)]).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<c64>,
    pub normalized: bool,
}

impl StateVector {
    /// Wrap amplitudes, recording whether they have unit norm.
    pub fn new(amplitudes: Vec<c64>) -> Self {
        let n2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        StateVector {
            amplitudes,
            normalized: (n2 - 1.0).abs() <= 1e-12,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::Numerical("cannot normalize the zero vector".into()));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        self.normalized = true;
        Ok(())
    }
}

/// A site given by 1-based cell coordinates and a sublattice label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    pub x: usize,
    pub y: usize,
    pub sub: String,
}

impl Site {
    pub fn chain(n: usize, sub: &str) -> Self {
        Site { x: n, y: 1, sub: sub.to_string() }
    }

    pub fn index(&self, layout: &LatticeLayout) -> Result<usize> {
        let s = layout.sublattice_index(&self.sub)?;
        layout.index_of(self.x, self.y, s)
    }
}

/// Diagonal 0/1 projector onto the given rows.
pub fn projector_rows(dim: usize, rows: &[usize]) -> Result<OperatorMatrix> {
    if rows.is_empty() {
        return Err(Error::param("sites", "projector needs at least one site"));
    }
    let mut m = Mat::zeros(dim, dim);
    for &r in rows {
        if r >= dim {
            return Err(Error::param("sites", format!("row {r} outside dimension {dim}")));
        }
        if m[(r, r)] != ZERO {
            return Err(Error::param("sites", format!("duplicate site at row {r}")));
        }
        m[(r, r)] = c64::new(1.0, 0.0);
    }
    Ok(OperatorMatrix {
        entries: m,
        opnorm_bound: 1.0,
    })
}

pub fn site_projector(layout: &LatticeLayout, sites: &[Site]) -> Result<OperatorMatrix> {
    let rows = sites
        .iter()
        .map(|s| s.index(layout))
        .collect::<Result<Vec<_>>>()?;
    projector_rows(layout.dim(), &rows)
}

/// Projector on every site of one sublattice (the extra A sites of an
/// extended chain count as A).
pub fn sublattice_projector(layout: &LatticeLayout, sub: &str) -> Result<OperatorMatrix> {
    let s = layout.sublattice_index(sub)?;
    let rows: Vec<usize> = (0..layout.dim())
        .filter(|&i| layout.label_of(i).map(|l| l.2) == Some(s))
        .collect();
    projector_rows(layout.dim(), &rows)
}

/// `Σ_{n ∈ cells} a_n† σ_j a_n` on a chain, `j ∈ {2, 3}`; zero elsewhere.
pub fn chiral_partial(
    layout: &LatticeLayout,
    j: u8,
    cells: std::ops::RangeInclusive<usize>,
) -> Result<OperatorMatrix> {
    if layout.kind != LayoutKind::Chain1d || layout.n_sub() != 2 {
        return Err(Error::param("w_operator", "chiral_partial needs a two-sublattice chain"));
    }
    let p: [[c64; 2]; 2] = match j {
        2 => [[ZERO, c64::new(0.0, -1.0)], [c64::new(0.0, 1.0), ZERO]],
        3 => [[c64::new(1.0, 0.0), ZERO], [ZERO, c64::new(-1.0, 0.0)]],
        _ => return Err(Error::param("j", format!("Pauli index must be 2 or 3, got {j}"))),
    };
    if *cells.start() < 1 || *cells.end() > layout.cells_x {
        return Err(Error::param("cells", "cell range outside the chain"));
    }
    let mut m = Mat::zeros(layout.dim(), layout.dim());
    for n in cells {
        let a = layout.site(n, 0);
        for r in 0..2 {
            for s in 0..2 {
                m[(a + r, a + s)] = p[r][s];
            }
        }
    }
    Ok(OperatorMatrix {
        entries: m,
        opnorm_bound: 1.0,
    })
}

/// Default chiral-sum operator over cells `1..=N-1`.
pub fn chiral_sum(layout: &LatticeLayout, j: u8) -> Result<OperatorMatrix> {
    if layout.cells_x < 2 {
        return Err(Error::param("n", "chiral sum needs N >= 2"));
    }
    chiral_partial(layout, j, 1..=layout.cells_x - 1)
}

pub fn basis_state_row(dim: usize, row: usize) -> Result<StateVector> {
    if row >= dim {
        return Err(Error::param("initial_state", format!("row {row} outside dimension {dim}")));
    }
    let mut v = vec![ZERO; dim];
    v[row] = c64::new(1.0, 0.0);
    Ok(StateVector {
        amplitudes: v,
        normalized: true,
    })
}

pub fn basis_state(layout: &LatticeLayout, site: &Site) -> Result<StateVector> {
    basis_state_row(layout.dim(), site.index(layout)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaggeredFlavor {
    SshA,
    CreutzAb,
}

/// `Σ_{m≤M} (−1)^{m−1}|m,A⟩/√M` or `Σ (−1)^{m−1}(|m,A⟩ + i|m,B⟩)/√(2M)`.
pub fn staggered_state(layout: &LatticeLayout, m: usize, flavor: StaggeredFlavor) -> Result<StateVector> {
    if layout.kind != LayoutKind::Chain1d {
        return Err(Error::param("initial_state", "staggered states live on chains"));
    }
    if m < 1 || m > layout.cells_x {
        return Err(Error::param("m", format!("M must lie in 1..={}, got {m}", layout.cells_x)));
    }
    let mut v = vec![ZERO; layout.dim()];
    let norm = match flavor {
        StaggeredFlavor::SshA => (m as f64).sqrt(),
        StaggeredFlavor::CreutzAb => (2.0 * m as f64).sqrt(),
    };
    for k in 1..=m {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        v[layout.site(k, 0)] = c64::new(sign / norm, 0.0);
        if flavor == StaggeredFlavor::CreutzAb {
            v[layout.site(k, 1)] = c64::new(0.0, sign / norm);
        }
    }
    Ok(StateVector::new(v))
}

/// Zero every non-A amplitude. The result is not renormalised.
pub fn project_qs(layout: &LatticeLayout, state: &StateVector) -> StateVector {
    let amps = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| match layout.label_of(i) {
            Some((_, _, 0)) => *a,
            _ => ZERO,
        })
        .collect();
    StateVector::new(amps)
}

fn a_weight(layout: &LatticeLayout, v: &[c64]) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(i, _)| matches!(layout.label_of(*i), Some((_, _, 0))))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

pub fn lowest_abs_eigenstate(h: &HamiltonianMatrix, degeneracy_tol: f64) -> Result<StateVector> {
    if !h.hermitian {
        return Err(Error::NotHermitian(h.hermiticity_residual()));
    }
    let p = spectral_decompose(h)?;
    lowest_abs_eigenstate_from(&p, &h.layout, degeneracy_tol)
}

/// Eigenvector of minimal `|λ|`, reusing an existing decomposition.
///
/// When the runner-up eigenvalue lies within `degeneracy_tol` of the minimum
/// (a hybridised pair of edge modes) the combination of the two that
/// maximises the A-sublattice weight is returned.
pub fn lowest_abs_eigenstate_from(
    p: &Propagator,
    layout: &LatticeLayout,
    degeneracy_tol: f64,
) -> Result<StateVector> {
    if p.kind != PropagatorKind::HermitianSpectral {
        return Err(Error::NotHermitian(f64::NAN));
    }
    let n = p.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        p.eigenvalues[a]
            .re
            .abs()
            .total_cmp(&p.eigenvalues[b].re.abs())
            .then(a.cmp(&b))
    });
    let k0 = order[0];
    let col = |k: usize| -> Vec<c64> { (0..n).map(|i| p.eigenvectors[(i, k)]).collect() };
    let u = col(k0);
    if n < 2 {
        return Ok(StateVector::new(u));
    }
    let k1 = order[1];
    if (p.eigenvalues[k0].re - p.eigenvalues[k1].re).abs() > degeneracy_tol {
        return Ok(StateVector::new(u));
    }
    let v = col(k1);
    // 2x2 Gram matrix of the A-projector in span{u, v}
    let mut g01 = ZERO;
    let (mut g00, mut g11) = (0.0, 0.0);
    for i in 0..n {
        if matches!(layout.label_of(i), Some((_, _, 0))) {
            g00 += u[i].norm_sqr();
            g11 += v[i].norm_sqr();
            g01 += u[i].conj() * v[i];
        }
    }
    // top eigenvector of [[g00, g01], [conj g01, g11]]
    let half_diff = 0.5 * (g00 - g11);
    let r = (half_diff * half_diff + g01.norm_sqr()).sqrt();
    let (a, b) = if r == 0.0 {
        (c64::new(1.0, 0.0), ZERO)
    } else if half_diff >= 0.0 {
        let x = c64::new(half_diff + r, 0.0);
        let y = g01.conj();
        let nn = (x.norm_sqr() + y.norm_sqr()).sqrt();
        (x / nn, y / nn)
    } else {
        let x = g01;
        let y = c64::new(r - half_diff, 0.0);
        let nn = (x.norm_sqr() + y.norm_sqr()).sqrt();
        (x / nn, y / nn)
    };
    let mut w: Vec<c64> = (0..n).map(|i| a * u[i] + b * v[i]).collect();
    let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut w {
        *z /= nrm;
    }
    debug_assert!(a_weight(layout, &w) + 1e-9 >= g00.max(g11));
    Ok(StateVector::new(w))
}

/// A-sublattice weight `‖Q_s ψ‖²`.
pub fn qs_weight(layout: &LatticeLayout, state: &StateVector) -> f64 {
    a_weight(layout, &state.amplitudes)
}
