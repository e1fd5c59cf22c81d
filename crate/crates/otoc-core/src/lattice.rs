//! Real-space single-particle Hamiltonians with open boundaries.
//!
//! Every builder populates directed bonds and then adds the conjugate
//! transpose (Hermitian models), so the stated amplitude is always the one
//! that moves a particle from the source site to the destination site:
//! `H[dest][src]`.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Chain1d,
    Square2d,
    Honeycomb2d,
}

/// Bijection between physical labels and matrix rows.
///
/// Cells are 1-based, ordered row-major (x fastest), and the sublattice index
/// varies fastest within a cell. A chain may carry `extra_sites` trailing
/// A-type sites after its last full cell (used by the odd-length chain on
/// which the closed forms live).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeLayout {
    pub kind: LayoutKind,
    pub cells_x: usize,
    pub cells_y: usize,
    pub sublattices: Vec<String>,
    #[serde(default)]
    pub extra_sites: usize,
}

impl LatticeLayout {
    pub fn chain(n: usize) -> Self {
        Self::new(LayoutKind::Chain1d, n, 1, &["A", "B"])
    }

    /// Chain of `n` full cells plus one dangling A site, `2n+1` rows.
    pub fn chain_extended(n: usize) -> Self {
        LatticeLayout {
            extra_sites: 1,
            ..Self::chain(n)
        }
    }

    pub fn square(nx: usize, ny: usize, sublattices: &[&str]) -> Self {
        Self::new(LayoutKind::Square2d, nx, ny, sublattices)
    }

    pub fn honeycomb(nx: usize, ny: usize) -> Self {
        Self::new(LayoutKind::Honeycomb2d, nx, ny, &["A", "B"])
    }

    fn new(kind: LayoutKind, nx: usize, ny: usize, subs: &[&str]) -> Self {
        LatticeLayout {
            kind,
            cells_x: nx,
            cells_y: ny,
            sublattices: subs.iter().map(|s| s.to_string()).collect(),
            extra_sites: 0,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells_x * self.cells_y
    }

    pub fn n_sub(&self) -> usize {
        self.sublattices.len()
    }

    pub fn dim(&self) -> usize {
        self.n_cells() * self.n_sub() + self.extra_sites
    }

    pub fn sublattice_index(&self, label: &str) -> Result<usize> {
        self.sublattices
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::param("sublattice", format!("unknown sublattice label {label:?}")))
    }

    /// Row index of sublattice `sub` in cell `(x, y)` (both 1-based).
    pub fn index_of(&self, x: usize, y: usize, sub: usize) -> Result<usize> {
        let ns = self.n_sub();
        if sub >= ns {
            return Err(Error::param("sublattice", format!("index {sub} out of range")));
        }
        if self.extra_sites > 0 && y == 1 && x > self.cells_x {
            // trailing A sites of an extended chain
            let k = x - self.cells_x;
            if sub == 0 && k <= self.extra_sites {
                return Ok(self.n_cells() * ns + k - 1);
            }
        }
        if x == 0 || y == 0 || x > self.cells_x || y > self.cells_y {
            return Err(Error::param(
                "site",
                format!("cell ({x}, {y}) outside {}x{} lattice", self.cells_x, self.cells_y),
            ));
        }
        Ok(((y - 1) * self.cells_x + (x - 1)) * ns + sub)
    }

    /// Chain shorthand: row of `(n, sub)`.
    pub fn site(&self, n: usize, sub: usize) -> usize {
        self.index_of(n, 1, sub).expect("site outside layout")
    }

    /// Inverse of [`index_of`](Self::index_of): `(x, y, sub)`.
    pub fn label_of(&self, i: usize) -> Option<(usize, usize, usize)> {
        let ns = self.n_sub();
        let full = self.n_cells() * ns;
        if i >= self.dim() {
            return None;
        }
        if i >= full {
            return Some((self.cells_x + (i - full) + 1, 1, 0));
        }
        let cell = i / ns;
        Some((cell % self.cells_x + 1, cell / self.cells_x + 1, i % ns))
    }
}

/// Quenched disorder on an SSH chain: `r` perturbs the `N-1` intercell bonds,
/// `r_prime` the `N` intracell bonds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    pub r: Vec<f64>,
    pub r_prime: Vec<f64>,
    pub seed: u64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: CMat,
    pub hermitian: bool,
    pub layout: LatticeLayout,
    pub energy_unit: f64,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// max |H_ij - conj(H_ji)|
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.entries)
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        let h = &self.entries;
        (0..h.ncols()).all(|j| (0..h.nrows()).all(|i| h[(i, j)].im == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut r = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            r = r.max(m[(i, j)].norm());
        }
    }
    r
}

pub fn hermiticity_residual(h: &CMat) -> f64 {
    let n = h.nrows();
    let mut r = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            r = r.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    r
}

struct Builder {
    h: CMat,
}

impl Builder {
    fn new(dim: usize) -> Self {
        Builder { h: Mat::zeros(dim, dim) }
    }

    /// Directed hop `src -> dest` plus its Hermitian conjugate.
    fn hop(&mut self, dest: usize, src: usize, amp: c64) {
        self.h[(dest, src)] += amp;
        self.h[(src, dest)] += amp.conj();
    }

    fn onsite(&mut self, i: usize, e: f64) {
        self.h[(i, i)] += c64::new(e, 0.0);
    }
}

fn require_cells(name: &str, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param(name, format!("need at least 2 cells, got {n}")));
    }
    Ok(())
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::param(name, "must be finite"));
    }
    Ok(())
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::param(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

/// SSH chain with optional next-next-nearest-neighbour hopping `eta` and
/// bond disorder. `2N x 2N`, Hermitian.
pub fn build_ssh(
    n: usize,
    nu: f64,
    eta: f64,
    epsilon: f64,
    disorder: Option<&DisorderConfig>,
) -> Result<HamiltonianMatrix> {
    require_cells("n", n)?;
    require_finite("nu", nu)?;
    require_finite("eta", eta)?;
    require_positive("epsilon", epsilon)?;
    if let Some(d) = disorder {
        if d.r.len() != n - 1 {
            return Err(Error::param(
                "disorder.r",
                format!("expected {} intercell draws, got {}", n - 1, d.r.len()),
            ));
        }
        if d.r_prime.len() != n {
            return Err(Error::param(
                "disorder.r_prime",
                format!("expected {n} intracell draws, got {}", d.r_prime.len()),
            ));
        }
    }
    let layout = LatticeLayout::chain(n);
    let mut b = Builder::new(layout.dim());
    ssh_bonds(&mut b, &layout, n, nu, eta, epsilon, disorder);
    Ok(HamiltonianMatrix {
        entries: b.h,
        hermitian: true,
        layout,
        energy_unit: epsilon,
    })
}

fn ssh_bonds(
    b: &mut Builder,
    layout: &LatticeLayout,
    n: usize,
    nu: f64,
    eta: f64,
    epsilon: f64,
    disorder: Option<&DisorderConfig>,
) {
    let (a, bs) = (0, 1);
    for c in 1..=n {
        let v = match disorder {
            Some(d) => epsilon * (nu + d.d2 * d.r_prime[c - 1]),
            None => epsilon * nu,
        };
        b.hop(layout.site(c, bs), layout.site(c, a), re(v));
    }
    for c in 1..n {
        let w = match disorder {
            Some(d) => epsilon * (1.0 + d.d1 * d.r[c - 1]),
            None => epsilon,
        };
        b.hop(layout.site(c + 1, a), layout.site(c, bs), re(w));
    }
    if eta != 0.0 {
        for c in 1..n.saturating_sub(1) {
            b.hop(layout.site(c + 2, a), layout.site(c, bs), re(epsilon * eta));
        }
    }
}

/// Clean NN SSH chain of `N` cells with one extra A site bonded to `(N, B)`
/// by the intercell hop, `(2N+1) x (2N+1)`. This is the geometry on which the
/// closed forms of [`crate::analytic`] are exact.
pub fn build_ssh_extended(n: usize, nu: f64, epsilon: f64) -> Result<HamiltonianMatrix> {
    require_cells("n", n)?;
    require_finite("nu", nu)?;
    require_positive("epsilon", epsilon)?;
    let layout = LatticeLayout::chain_extended(n);
    let mut b = Builder::new(layout.dim());
    ssh_bonds(&mut b, &layout, n, nu, 0.0, epsilon, None);
    b.hop(layout.site(n + 1, 0), layout.site(n, 1), re(epsilon));
    Ok(HamiltonianMatrix {
        entries: b.h,
        hermitian: true,
        layout,
        energy_unit: epsilon,
    })
}

/// Creutz ladder: intracell `eta0 σ1`, intercell block
/// `H[n+1][n] = eta0p (σ1 - iσ3)/2`.
pub fn build_creutz(n: usize, eta0: f64, eta0p: f64) -> Result<HamiltonianMatrix> {
    require_cells("n", n)?;
    require_finite("eta0", eta0)?;
    require_finite("eta0p", eta0p)?;
    let layout = LatticeLayout::chain(n);
    let mut b = Builder::new(layout.dim());
    let half = 0.5 * eta0p;
    for c in 1..=n {
        b.hop(layout.site(c, 1), layout.site(c, 0), re(eta0));
    }
    for c in 1..n {
        let (a0, b0) = (layout.site(c, 0), layout.site(c, 1));
        let (a1, b1) = (layout.site(c + 1, 0), layout.site(c + 1, 1));
        b.hop(a1, a0, c64::new(0.0, -half));
        b.hop(a1, b0, re(half));
        b.hop(b1, a0, re(half));
        b.hop(b1, b0, c64::new(0.0, half));
    }
    let unit = if eta0p != 0.0 { eta0p.abs() } else { eta0.abs().max(1.0) };
    Ok(HamiltonianMatrix {
        entries: b.h,
        hermitian: true,
        layout,
        energy_unit: unit,
    })
}

/// Planar positions of the honeycomb flake: A at `x a1 + y a2`, B displaced
/// by `(a1 + a2)/3`, with `a1 = (1, 0)` and `a2 = (1/2, √3/2)`.
pub fn honeycomb_position(x: usize, y: usize, sub: usize) -> [f64; 2] {
    let (fx, fy) = (x as f64, y as f64);
    let s3 = 3f64.sqrt();
    let mut p = [fx + 0.5 * fy, 0.5 * s3 * fy];
    if sub == 1 {
        p[0] += 0.5;
        p[1] += s3 / 6.0;
    }
    p
}

/// Haldane flake on a parallelogram of `nx x ny` honeycomb cells.
///
/// NN hops `eta1`; NNN hops `eta2 e^{i s φ}` within each sublattice where
/// `s = +1` when the two-bond path from source to destination turns
/// counterclockwise; onsite `+mu` on A and `-mu` on B.
pub fn build_haldane(
    nx: usize,
    ny: usize,
    eta1: f64,
    eta2: f64,
    phi: f64,
    mu: f64,
) -> Result<HamiltonianMatrix> {
    require_cells("nx", nx)?;
    require_cells("ny", ny)?;
    for (k, v) in [("eta1", eta1), ("eta2", eta2), ("phi", phi), ("mu", mu)] {
        require_finite(k, v)?;
    }
    let layout = LatticeLayout::honeycomb(nx, ny);
    let mut b = Builder::new(layout.dim());
    let idx = |x: usize, y: usize, s: usize| layout.index_of(x, y, s).unwrap();
    // A(x,y) + these cell offsets = its three B neighbours
    const A_TO_B: [(isize, isize); 3] = [(0, 0), (-1, 0), (0, -1)];
    const NNN: [(isize, isize); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let inside = |x: isize, y: isize| x >= 1 && y >= 1 && x <= nx as isize && y <= ny as isize;

    for y in 1..=ny {
        for x in 1..=nx {
            b.onsite(idx(x, y, 0), mu);
            b.onsite(idx(x, y, 1), -mu);
            for &(dx, dy) in &A_TO_B {
                let (bx, by) = (x as isize + dx, y as isize + dy);
                if inside(bx, by) {
                    b.hop(idx(bx as usize, by as usize, 1), idx(x, y, 0), re(eta1));
                }
            }
        }
    }

    // Directed NNN amplitudes are set one direction at a time; the reverse
    // direction is visited separately and receives the conjugate phase.
    let mut h = b.h;
    for s in 0..2 {
        // NN bond vectors leaving a site of sublattice s
        let nn: Vec<[f64; 2]> = A_TO_B
            .iter()
            .map(|&(dx, dy)| {
                let pa = honeycomb_position(5, 5, 0);
                let pb = honeycomb_position((5 + dx) as usize, (5 + dy) as usize, 1);
                let v = [pb[0] - pa[0], pb[1] - pa[1]];
                if s == 0 { v } else { [-v[0], -v[1]] }
            })
            .collect();
        for y in 1..=ny {
            for x in 1..=nx {
                for &(dx, dy) in &NNN {
                    let (tx, ty) = (x as isize + dx, y as isize + dy);
                    if !inside(tx, ty) {
                        continue;
                    }
                    let ps = honeycomb_position(x, y, s);
                    let pt = honeycomb_position(tx as usize, ty as usize, s);
                    let d = [pt[0] - ps[0], pt[1] - ps[1]];
                    let sign = nnn_sign(&nn, d);
                    let amp = c64::from_polar(eta2, sign * phi);
                    h[(idx(tx as usize, ty as usize, s), idx(x, y, s))] += amp;
                }
            }
        }
    }
    Ok(HamiltonianMatrix {
        entries: h,
        hermitian: true,
        layout,
        energy_unit: if eta1 != 0.0 { eta1.abs() } else { 1.0 },
    })
}

/// Orientation of the two-bond path realising the NNN displacement `d`:
/// `u` leaves the source along one of its NN bonds, `v = d - u` must be a bond
/// of the other sublattice (i.e. `-v` is in `nn`).
fn nnn_sign(nn: &[[f64; 2]], d: [f64; 2]) -> f64 {
    for u in nn {
        let v = [d[0] - u[0], d[1] - u[1]];
        if nn
            .iter()
            .any(|w| (v[0] + w[0]).abs() < 1e-9 && (v[1] + w[1]).abs() < 1e-9)
        {
            let cz = u[0] * v[1] - u[1] * v[0];
            return cz.signum();
        }
    }
    unreachable!("displacement is not a next-nearest-neighbour vector")
}

/// Qi-Wu-Zhang square lattice: `H[R+x][R] = eta0 (σ3 + iσ1)/2`,
/// `H[R+y][R] = eta0 (σ3 + iσ2)/2`, onsite `mu_p σ3`.
pub fn build_qwz(nx: usize, ny: usize, eta0: f64, mu_p: f64) -> Result<HamiltonianMatrix> {
    require_cells("nx", nx)?;
    require_cells("ny", ny)?;
    require_finite("eta0", eta0)?;
    require_finite("mu_p", mu_p)?;
    let h = 0.5 * eta0;
    let i = c64::new(0.0, 1.0);
    // H[R+δ][R] blocks; the builder below expects H[R][R+δ], so conjugate-transpose.
    let tx_fwd = [[re(h), i * h], [i * h, re(-h)]];
    let ty_fwd = [[re(h), re(h)], [re(-h), re(-h)]];
    let dag = |m: [[c64; 2]; 2]| mat_from(2, |r, c| m[c][r].conj());
    let h0 = mat_from(2, |r, c| if r == c { re(if r == 0 { mu_p } else { -mu_p }) } else { ZERO });
    let layout = LatticeLayout::square(nx, ny, &["A", "B"]);
    let mut out = lattice_from_blocks(layout, &h0, &dag(tx_fwd), &dag(ty_fwd))?;
    out.energy_unit = if eta0 != 0.0 { eta0.abs() } else { 1.0 };
    Ok(out)
}

fn mat_from(n: usize, f: impl Fn(usize, usize) -> c64) -> CMat {
    Mat::from_fn(n, n, f)
}

/// Open-boundary lattice from Bloch blocks: `H[R][R] = H0`,
/// `H[R][R+x] = Tx`, `H[R][R+y] = Ty`, plus conjugate transposes, so that
/// `H(k) = H0 + Tx e^{ikx} + Ty e^{iky} + h.c.`.
pub fn bloch_to_realspace(
    h0: &CMat,
    tx: &CMat,
    ty: &CMat,
    nx: usize,
    ny: usize,
) -> Result<HamiltonianMatrix> {
    let m = h0.nrows();
    let labels: Vec<String> = (0..m).map(|k| orbital_label(k)).collect();
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let layout = LatticeLayout::square(nx, ny, &refs);
    lattice_from_blocks(layout, h0, tx, ty)
}

fn orbital_label(k: usize) -> String {
    if k < 26 {
        ((b'A' + k as u8) as char).to_string()
    } else {
        format!("O{k}")
    }
}

fn lattice_from_blocks(
    layout: LatticeLayout,
    h0: &CMat,
    tx: &CMat,
    ty: &CMat,
) -> Result<HamiltonianMatrix> {
    let m = h0.nrows();
    if h0.ncols() != m || tx.nrows() != m || tx.ncols() != m || ty.nrows() != m || ty.ncols() != m {
        return Err(Error::DimensionMismatch("Bloch blocks must be square and equal-sized".into()));
    }
    let res = hermiticity_residual(h0);
    if res > 1e-12 {
        return Err(Error::NotHermitian(res));
    }
    if layout.cells_x == 0 || layout.cells_y == 0 {
        return Err(Error::param("nx", "need at least one cell"));
    }
    let (nx, ny) = (layout.cells_x, layout.cells_y);
    let mut b = Builder::new(layout.dim());
    let base = |x: usize, y: usize| layout.index_of(x, y, 0).unwrap();
    for y in 1..=ny {
        for x in 1..=nx {
            let r = base(x, y);
            for i in 0..m {
                for j in 0..m {
                    b.h[(r + i, r + j)] += h0[(i, j)];
                }
            }
            for (blk, nb) in [(tx, (x + 1, y)), (ty, (x, y + 1))] {
                if nb.0 > nx || nb.1 > ny {
                    continue;
                }
                let q = base(nb.0, nb.1);
                for i in 0..m {
                    for j in 0..m {
                        // H[R][R+δ] = T, i.e. a hop from R+δ to R
                        let v = blk[(i, j)];
                        if v != ZERO {
                            b.hop(r + i, q + j, v);
                        }
                    }
                }
            }
        }
    }
    Ok(HamiltonianMatrix {
        entries: b.h,
        hermitian: true,
        layout,
        energy_unit: 1.0,
    })
}

fn pauli(k: usize) -> [[c64; 2]; 2] {
    let (o, z, i) = (re(1.0), ZERO, c64::new(0.0, 1.0));
    match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        3 => [[o, z], [z, -o]],
        _ => unreachable!(),
    }
}

/// `τ_a ⊗ σ_b` with the orbital index `2·τ + σ`.
fn kron_pauli(a: usize, b: usize) -> CMat {
    let (ta, sb) = (pauli(a), pauli(b));
    mat_from(4, |r, c| ta[r / 2][c / 2] * sb[r % 2][c % 2])
}

fn lin(terms: &[(c64, &CMat)], n: usize) -> CMat {
    mat_from(n, |r, c| terms.iter().fold(ZERO, |acc, (k, m)| acc + *k * m[(r, c)]))
}

/// Bloch blocks `(H0, Tx, Ty)` of the π-flux 2D SSH model,
/// `H(k) = (ν' + w cos ky) τ0σ1 − w sin ky τ3σ2 − (ν' + w cos kx) τ2σ2 − w sin kx τ1σ2`.
pub fn ssh2d_blocks(nu_p: f64, w: f64) -> (CMat, CMat, CMat) {
    let (t0s1, t2s2, t1s2, t3s2) = (
        kron_pauli(0, 1),
        kron_pauli(2, 2),
        kron_pauli(1, 2),
        kron_pauli(3, 2),
    );
    let hw = 0.5 * w;
    let i = c64::new(0.0, 1.0);
    let h0 = lin(&[(re(nu_p), &t0s1), (re(-nu_p), &t2s2)], 4);
    let tx = lin(&[(re(-hw), &t2s2), (i * hw, &t1s2)], 4);
    let ty = lin(&[(re(hw), &t0s1), (i * hw, &t3s2)], 4);
    (h0, tx, ty)
}

/// Direct evaluation of the 2D SSH Bloch Hamiltonian.
pub fn ssh2d_bloch(nu_p: f64, w: f64, kx: f64, ky: f64) -> CMat {
    lin(
        &[
            (re(nu_p + w * ky.cos()), &kron_pauli(0, 1)),
            (re(-w * ky.sin()), &kron_pauli(3, 2)),
            (re(-(nu_p + w * kx.cos())), &kron_pauli(2, 2)),
            (re(-w * kx.sin()), &kron_pauli(1, 2)),
        ],
        4,
    )
}

/// Real-space π-flux 2D SSH flake of `nx x ny` four-orbital cells. The
/// matrix is real.
pub fn build_ssh2d(nx: usize, ny: usize, nu_p: f64, w: f64) -> Result<HamiltonianMatrix> {
    require_cells("nx", nx)?;
    require_cells("ny", ny)?;
    require_finite("nu_p", nu_p)?;
    require_finite("w", w)?;
    let (h0, tx, ty) = ssh2d_blocks(nu_p, w);
    let mut h = bloch_to_realspace(&h0, &tx, &ty, nx, ny)?;
    h.energy_unit = if w != 0.0 { w.abs() } else { 1.0 };
    Ok(h)
}

/// Map a 1-based square-lattice site `(X, Y)` of the 2D SSH flake to its
/// row. Orbitals sit at local offsets C→(0,0), B→(1,0), D→(0,1), A→(1,1),
/// which makes every intracell bond a nearest-neighbour bond of magnitude ν'.
pub fn ssh2d_site(layout: &LatticeLayout, big_x: usize, big_y: usize) -> Result<usize> {
    if big_x == 0 || big_y == 0 {
        return Err(Error::param("site", "square-lattice coordinates are 1-based"));
    }
    let (cx, dx) = ((big_x - 1) / 2, (big_x - 1) % 2);
    let (cy, dy) = ((big_y - 1) / 2, (big_y - 1) % 2);
    let orb = match (dx, dy) {
        (0, 0) => 2,
        (1, 0) => 1,
        (0, 1) => 3,
        _ => 0,
    };
    layout.index_of(cx + 1, cy + 1, orb)
}

/// SSH chain with non-reciprocal intracell hopping: `A -> B` carries
/// `ε(ν+δ)`, `B -> A` carries `ε(ν−δ)`; intercell hops stay `ε`.
pub fn build_nonhermitian_ssh(n: usize, nu: f64, delta: f64, epsilon: f64) -> Result<HamiltonianMatrix> {
    require_cells("n", n)?;
    require_finite("nu", nu)?;
    require_finite("delta", delta)?;
    require_positive("epsilon", epsilon)?;
    let layout = LatticeLayout::chain(n);
    let mut h = Mat::zeros(layout.dim(), layout.dim());
    for c in 1..=n {
        let (a, b) = (layout.site(c, 0), layout.site(c, 1));
        h[(a, b)] = re(epsilon * (nu + delta));
        h[(b, a)] = re(epsilon * (nu - delta));
    }
    for c in 1..n {
        let (b, a) = (layout.site(c, 1), layout.site(c + 1, 0));
        h[(a, b)] = re(epsilon);
        h[(b, a)] = re(epsilon);
    }
    Ok(HamiltonianMatrix {
        entries: h,
        hermitian: false,
        layout,
        energy_unit: epsilon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiralModel {
    Ssh,
    Creutz,
}

/// `Σ_n a_n† σ3 a_n` (SSH) or `Σ_n a_n† σ2 a_n` (Creutz) on `N` cells.
pub fn chiral_operator(model: ChiralModel, n: usize) -> Result<CMat> {
    if n < 1 {
        return Err(Error::param("n", "need at least one cell"));
    }
    let p = pauli(match model {
        ChiralModel::Ssh => 3,
        ChiralModel::Creutz => 2,
    });
    let mut c = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        for r in 0..2 {
            for s in 0..2 {
                c[(2 * k + r, 2 * k + s)] = p[r][s];
            }
        }
    }
    Ok(c)
}

/// `max |C H C⁻¹ + H|` for a unitary involution `C` (so `C⁻¹ = C†`).
pub fn symmetry_residual(h: &HamiltonianMatrix, c: &CMat) -> Result<f64> {
    let n = h.dim();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, Hamiltonian is {n}x{n}",
            c.nrows(),
            c.ncols()
        )));
    }
    let chc = c * &h.entries * c.adjoint();
    let mut r = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            r = r.max((chc[(i, j)] + h.entries[(i, j)]).norm());
        }
    }
    Ok(r)
}
