//! Diagonal similarity balancing for non-normal generators.
//!
//! Finds `D` so that `B = D⁻¹ H D` has matching row and column norms. A
//! spanning-tree pass first symmetrises the magnitudes of the tree bonds
//! exactly (for chains this gives the full symmetriser in one shot, where
//! Osborne's iteration alone converges only diffusively), then a few
//! Osborne sweeps polish the remaining imbalance.

use faer::Mat;

use crate::lattice::CMat;

pub struct Balanced {
    /// Diagonal of `D`.
    pub d: Vec<f64>,
    pub b: CMat,
}

const OSBORNE_SWEEPS: usize = 30;

pub fn balance(h: &CMat) -> Balanced {
    let n = h.nrows();
    let mut d = vec![1.0f64; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if seen[j] || j == i {
                    continue;
                }
                let (hij, hji) = (h[(i, j)].norm(), h[(j, i)].norm());
                if hij == 0.0 && hji == 0.0 {
                    continue;
                }
                seen[j] = true;
                d[j] = if hij > 0.0 && hji > 0.0 {
                    d[i] * (hji / hij).sqrt()
                } else {
                    d[i]
                };
                queue.push_back(j);
            }
        }
    }
    let mut b = Mat::from_fn(n, n, |i, j| h[(i, j)] * (d[j] / d[i]));

    for _ in 0..OSBORNE_SWEEPS {
        let mut changed = false;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].norm_sqr();
                    r += b[(i, j)].norm_sqr();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let f = (r.sqrt() / c.sqrt()).sqrt();
            if (f - 1.0).abs() < 1e-3 {
                continue;
            }
            changed = true;
            d[i] *= f;
            for j in 0..n {
                if j != i {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Balanced { d, b }
}
