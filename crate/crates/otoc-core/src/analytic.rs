//! Closed forms for the clean NN SSH chain extended to `2N+1` sites
//! (`N` full cells plus a trailing A site).
//!
//! With `θ_k = kπ/(N+1)` the spectrum is `0` and
//! `λ±(k) = ±ε√(1 + ν² + 2ν cos θ_k)`. The A components of mode `k` on cell
//! `m = 1..N+1` are `g_m(k) = sin((m−1)θ_k)/ν + sin(mθ_k)`, the B components
//! `±λ sin(mθ_k)/(εν)`, and the squared norm is
//! `A(k) = (N+1)λ²/(ε²ν²)`. The zero mode has A components `(−ν)^{m−1}` and
//! squared norm `A0 = Σ_{n=0}^{N} ν^{2n}`.
//!
//! All k-sums run in ascending `k` with compensated accumulation.

use crate::error::{Error, Result};

/// Kahan-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Clone, Debug)]
pub struct AnalyticEigenSystem {
    pub n: usize,
    pub nu: f64,
    pub epsilon: f64,
    pub lambda0: f64,
    /// `λ₊(k)`, `k = 1..=N`; `λ₋(k) = −λ₊(k)`.
    pub lambda_plus: Vec<f64>,
    pub a0: f64,
    /// `A±(k)`, identical for both branches.
    pub a_pm: Vec<f64>,
    theta: Vec<f64>,
}

fn check(n: usize, nu: f64, epsilon: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::param("n", format!("need N >= 2, got {n}")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param("nu", format!("closed forms require nu > 0, got {nu}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    Ok(())
}

/// `Σ_{n=0}^{N} ν^{2n}`: geometric closed form away from `ν = 1`, direct
/// summation close to it where the closed form cancels.
pub fn a0_norm(n: usize, nu: f64) -> f64 {
    let q = nu * nu;
    if (1.0 - q).abs() < 1e-3 {
        let mut k = Kahan::default();
        let mut p = 1.0;
        for _ in 0..=n {
            k.add(p);
            p *= q;
        }
        k.value()
    } else {
        (1.0 - q.powi(n as i32 + 1)) / (1.0 - q)
    }
}

/// `ln A0`, finite even when `A0` overflows.
fn ln_a0(n: usize, nu: f64) -> f64 {
    if nu <= 1.0 {
        return a0_norm(n, nu).ln();
    }
    let r = 1.0 / (nu * nu);
    2.0 * n as f64 * nu.ln() + ((1.0 - r.powi(n as i32 + 1)) / (1.0 - r)).ln()
}

pub fn analytic_eigenpairs(n: usize, nu: f64, epsilon: f64) -> Result<AnalyticEigenSystem> {
    check(n, nu, epsilon)?;
    let np1 = (n + 1) as f64;
    let theta: Vec<f64> = (1..=n).map(|k| k as f64 * std::f64::consts::PI / np1).collect();
    let lambda_plus: Vec<f64> = theta
        .iter()
        .map(|&th| epsilon * (1.0 + nu * nu + 2.0 * nu * th.cos()).sqrt())
        .collect();
    let a_pm = lambda_plus
        .iter()
        .map(|&l| np1 * l * l / (epsilon * epsilon * nu * nu))
        .collect();
    Ok(AnalyticEigenSystem {
        n,
        nu,
        epsilon,
        lambda0: 0.0,
        lambda_plus,
        a0: a0_norm(n, nu),
        a_pm,
        theta,
    })
}

impl AnalyticEigenSystem {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn lambda_minus(&self) -> Vec<f64> {
        self.lambda_plus.iter().map(|l| -l).collect()
    }

    /// All `2N+1` eigenvalues in ascending order.
    pub fn eigenvalues_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lambda_minus();
        v.push(self.lambda0);
        v.extend(self.lambda_plus.iter().copied());
        v.sort_by(f64::total_cmp);
        v
    }

    /// `g_m(k)` for `m = 1..=N+1`, `k = 1..=N`.
    pub fn g(&self, m: usize, k: usize) -> f64 {
        let th = self.theta[k - 1];
        ((m - 1) as f64 * th).sin() / self.nu + (m as f64 * th).sin()
    }

    /// Unnormalised eigenvector of `λ±(k)` (`plus` selects the branch) on the
    /// extended chain; its squared norm is `A±(k)`.
    pub fn eigenvector(&self, k: usize, plus: bool) -> Vec<f64> {
        let n = self.n;
        let th = self.theta[k - 1];
        let lam = self.lambda_plus[k - 1] * if plus { 1.0 } else { -1.0 };
        let mut v = vec![0.0; 2 * n + 1];
        for m in 1..=n + 1 {
            v[2 * (m - 1)] = self.g(m, k);
        }
        for m in 1..=n {
            v[2 * m - 1] = lam * (m as f64 * th).sin() / (self.epsilon * self.nu);
        }
        v
    }

    /// Unnormalised zero mode, squared norm `A0`.
    pub fn zero_mode(&self) -> Vec<f64> {
        let mut v = vec![0.0; 2 * self.n + 1];
        let mut p = 1.0;
        for m in 1..=self.n + 1 {
            v[2 * (m - 1)] = p;
            p *= -self.nu;
        }
        v
    }

    /// Signed `(−ν)^p / A0`, evaluated in log space when either factor would
    /// overflow.
    fn neg_pow_over_a0(&self, p: usize) -> f64 {
        let direct = (-self.nu).powi(p as i32);
        if direct.is_finite() && self.a0.is_finite() {
            return direct / self.a0;
        }
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        sign * (p as f64 * self.nu.ln() - ln_a0(self.n, self.nu)).exp()
    }
}

/// Per-`(N, ν, ε, M)` data shared by all sample times.
struct Kernel {
    sys: AnalyticEigenSystem,
    m: usize,
    sqrt_m: f64,
    /// `Σ_{m'≤M} ν^{m'−1}`
    geo: f64,
    /// `S(k) = Σ_{m'≤M} (−1)^{m'−1} g_{m'}(k)`
    s: Vec<f64>,
}

impl Kernel {
    fn new(n: usize, nu: f64, epsilon: f64, m: usize) -> Result<Self> {
        let sys = analytic_eigenpairs(n, nu, epsilon)?;
        if m < 1 || m > n {
            return Err(Error::param("m", format!("M must lie in 1..={n}, got {m}")));
        }
        let mut geo = Kahan::default();
        let mut p = 1.0;
        for _ in 0..m {
            geo.add(p);
            p *= nu;
        }
        let s = (1..=n)
            .map(|k| {
                let mut acc = Kahan::default();
                for mm in 1..=m {
                    let sign = if mm % 2 == 1 { 1.0 } else { -1.0 };
                    acc.add(sign * sys.g(mm, k));
                }
                acc.value()
            })
            .collect();
        Ok(Kernel {
            sys,
            m,
            sqrt_m: (m as f64).sqrt(),
            geo: geo.value(),
            s,
        })
    }

    /// A amplitude on cell `l` (`1..=N+1`) at time `t`; real for the
    /// staggered initial state.
    fn a_amp(&self, l: usize, t: f64) -> f64 {
        let sys = &self.sys;
        let head = if l == 1 {
            1.0 / (sys.a0 * self.sqrt_m) * self.geo
        } else {
            sys.neg_pow_over_a0(l - 1) / self.sqrt_m * self.geo
        };
        let mut acc = Kahan::default();
        for k in 1..=sys.n {
            let (lam, ak) = (sys.lambda_plus[k - 1], sys.a_pm[k - 1]);
            let gm_sum = self.s[k - 1] / self.sqrt_m;
            acc.add(2.0 * (lam * t).cos() / ak * sys.g(l, k) * gm_sum);
        }
        head + acc.value()
    }

    /// Modulus of the B amplitude on cell `l` (`1..=N`).
    fn b_amp(&self, l: usize, t: f64) -> f64 {
        let sys = &self.sys;
        let mut acc = Kahan::default();
        for k in 1..=sys.n {
            let (lam, ak, th) = (sys.lambda_plus[k - 1], sys.a_pm[k - 1], sys.theta[k - 1]);
            acc.add(
                2.0 * lam * (lam * t).sin() / (self.sqrt_m * ak * sys.epsilon * sys.nu)
                    * self.s[k - 1]
                    * (l as f64 * th).sin(),
            );
        }
        acc.value()
    }

    fn o1(&self) -> f64 {
        self.geo * self.geo / (self.m as f64 * self.sys.a0)
    }

    fn o2(&self, t: f64) -> f64 {
        let sys = &self.sys;
        let mut acc = Kahan::default();
        for k in 1..=sys.n {
            let (lam, ak) = (sys.lambda_plus[k - 1], sys.a_pm[k - 1]);
            let s = self.s[k - 1];
            acc.add(2.0 * (2.0 * lam * t).cos() / (self.m as f64 * ak) * s * s);
        }
        acc.value()
    }
}

/// `O(t)` for `W = Σ_{l≤L} a†_{l,A}a_{l,A}` and the staggered `M`-cell
/// initial state: `|Σ_l a_l(t)²|²`.
pub fn otoc_site_closed_form(n: usize, nu: f64, epsilon: f64, t: f64, l: usize, m: usize) -> Result<f64> {
    let ker = Kernel::new(n, nu, epsilon, m)?;
    if l < 1 || l > n {
        return Err(Error::param("l", format!("L must lie in 1..={n}, got {l}")));
    }
    Ok(site_value(&ker, l, t))
}

fn site_value(ker: &Kernel, l: usize, t: f64) -> f64 {
    let mut tot = Kahan::default();
    for ll in 1..=l {
        let z = ker.a_amp(ll, t);
        tot.add(z * z);
    }
    let v = tot.value();
    v * v
}

/// Site-projector closed form sampled at many times.
pub fn otoc_site_series(n: usize, nu: f64, epsilon: f64, times: &[f64], l: usize, m: usize) -> Result<Vec<f64>> {
    let ker = Kernel::new(n, nu, epsilon, m)?;
    if l < 1 || l > n {
        return Err(Error::param("l", format!("L must lie in 1..={n}, got {l}")));
    }
    Ok(times.iter().map(|&t| site_value(&ker, l, t)).collect())
}

/// The `L = M = 1` formula,
/// `O(t) = [1/A0 + Σ_k 2 cos(λ_k t) sin²θ_k / A(k)]⁴`, written with the
/// same operation order as the general expression so both agree bit for bit.
pub fn otoc_site_single(n: usize, nu: f64, epsilon: f64, t: f64) -> Result<f64> {
    let sys = analytic_eigenpairs(n, nu, epsilon)?;
    let mut acc = Kahan::default();
    for k in 1..=n {
        let (lam, ak) = (sys.lambda_plus[k - 1], sys.a_pm[k - 1]);
        let s = sys.theta[k - 1].sin();
        acc.add(2.0 * (lam * t).cos() / ak * s * s);
    }
    let z = 1.0 / sys.a0 + acc.value();
    let mut tot = Kahan::default();
    tot.add(z * z);
    let v = tot.value();
    Ok(v * v)
}

/// Terms of the chiral-operator OTOC for `W = Σ_{n≤N−1} a_n†σ3 a_n`:
/// `s(t) = O1 + O2(t) − O3(t) + O4(t) − O5(t)`.
///
/// `O1 + O2` is the full A-minus-B weight of the evolved state; `O3`, `O4` are
/// the A and B weights on cell `N` (excluded from the operator) and `O5` the
/// weight on the trailing site.
#[derive(Clone, Debug, PartialEq)]
pub struct OtocDecomposition {
    pub times: Vec<f64>,
    pub o1: f64,
    pub o2: Vec<f64>,
    pub o3: Vec<f64>,
    pub o4: Vec<f64>,
    pub o5: Vec<f64>,
    /// `R12(t) = O1 / O2(t)`
    pub r12: Vec<f64>,
}

impl OtocDecomposition {
    pub fn amplitude(&self, i: usize) -> f64 {
        self.o1 + self.o2[i] - self.o3[i] + self.o4[i] - self.o5[i]
    }

    /// Full value `|O1 + O2 − O3 + O4 − O5|²`.
    pub fn value(&self, i: usize) -> f64 {
        let s = self.amplitude(i);
        s * s
    }

    /// Bulk approximation `|O1 + O2|²`.
    pub fn approx(&self, i: usize) -> f64 {
        let s = self.o1 + self.o2[i];
        s * s
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.value(i)).collect()
    }
}

pub fn chiral_decomposition(n: usize, nu: f64, epsilon: f64, m: usize, times: &[f64]) -> Result<OtocDecomposition> {
    let ker = Kernel::new(n, nu, epsilon, m)?;
    let o1 = ker.o1();
    let mut d = OtocDecomposition {
        times: times.to_vec(),
        o1,
        o2: Vec::with_capacity(times.len()),
        o3: Vec::with_capacity(times.len()),
        o4: Vec::with_capacity(times.len()),
        o5: Vec::with_capacity(times.len()),
        r12: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let o2 = ker.o2(t);
        let a_n = ker.a_amp(n, t);
        let b_n = ker.b_amp(n, t);
        let a_x = ker.a_amp(n + 1, t);
        d.o2.push(o2);
        d.o3.push(a_n * a_n);
        d.o4.push(b_n * b_n);
        d.o5.push(a_x * a_x);
        d.r12.push(o1 / o2);
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiralClosedForm {
    pub value: f64,
    pub approx: f64,
    pub decomposition: OtocDecomposition,
}

/// Chiral-operator OTOC at a single time together with its decomposition.
pub fn otoc_chiral_closed_form(n: usize, nu: f64, epsilon: f64, t: f64, m: usize) -> Result<ChiralClosedForm> {
    let d = chiral_decomposition(n, nu, epsilon, m, &[t])?;
    Ok(ChiralClosedForm {
        value: d.value(0),
        approx: d.approx(0),
        decomposition: d,
    })
}
