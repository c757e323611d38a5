//! Real SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy `G = S·Q` are rotated pairwise until mutually
//! orthogonal to relative precision; then `σ_i = ‖g_i‖`, `u_i = g_i / σ_i` and
//! the right singular vectors are the columns of the accumulated `Q`.

use alloc::vec;
use alloc::vec::Vec;

use super::{fix_sign, Mat};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Factorization `U · S · Vᵗ = diag(sigma)`, i.e. `S = Uᵗ · diag(sigma) · V`.
///
/// Row `i` of `u` (resp. `v`) is the left (resp. right) singular vector that
/// belongs to `sigma[i]`; `S vᵢ = σᵢ uᵢ`.
#[derive(Debug, Clone)]
pub struct RealSVD {
    pub u: Mat,
    pub v: Mat,
    /// Non-negative, ascending.
    pub sigma: Vec<f64>,
}

impl RealSVD {
    /// `‖U·S·Vᵗ - diag(sigma)‖_max`.
    pub fn residual(&self, s: &Mat) -> f64 {
        self.u
            .matmul(s)
            .matmul(&self.v.transpose())
            .max_abs_diff(&Mat::from_diag(&self.sigma))
    }
}

/// Singular value decomposition of a square real matrix, singular values
/// ascending.
pub fn real_svd(s: &Mat) -> Result<RealSVD> {
    if !s.is_square() {
        return Err(Error::contract("real_svd expects a square matrix"));
    }
    if !s.all_finite() {
        return Err(Error::contract("real_svd input has non-finite entries"));
    }
    let n = s.rows();
    // column-major working storage
    let mut g: Vec<Vec<f64>> = (0..n).map(|j| s.column(j)).collect();
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (gp, gr) = (&g[p], &g[r]);
                    let mut a = 0.0;
                    let mut b = 0.0;
                    let mut c = 0.0;
                    for (x, y) in gp.iter().zip(gr) {
                        a += x * x;
                        b += y * y;
                        c += x * y;
                    }
                    (a, b, c)
                };
                if gamma == 0.0 || gamma.abs() <= eps * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let sn = c * t;
                rotate(&mut g, p, r, c, sn);
                rotate(&mut q, p, r, c, sn);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical {
            what: "one-sided Jacobi SVD did not converge",
            residual: f64::NAN,
            tolerance: eps,
        });
    }

    let sigma_raw: Vec<f64> = g
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|x| x * x).sum::<f64>()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma_raw[a].total_cmp(&sigma_raw[b]));

    let mut left: Vec<Option<Vec<f64>>> = g
        .iter()
        .zip(&sigma_raw)
        .map(|(col, &sg)| {
            if sg > 0.0 {
                Some(col.iter().map(|x| x / sg).collect())
            } else {
                None
            }
        })
        .collect();
    complete_basis(&mut left, n);

    let mut u = Mat::zeros(n, n);
    let mut v = Mat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (row, &idx) in order.iter().enumerate() {
        let mut lu = left[idx].take().expect("basis completed");
        let mut rv = q[idx].clone();
        if fix_sign(&mut lu) {
            rv.iter_mut().for_each(|x| *x = -*x);
        }
        u.row_mut(row).copy_from_slice(&lu);
        v.row_mut(row).copy_from_slice(&rv);
        sigma.push(sigma_raw[idx]);
    }
    Ok(RealSVD { u, v, sigma })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, r: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(r);
    let (cp, cr) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cr.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills missing left vectors (exactly zero singular values) with an
/// orthonormal completion via Gram-Schmidt over the canonical basis.
fn complete_basis(left: &mut [Option<Vec<f64>>], n: usize) {
    let missing: Vec<usize> = (0..n).filter(|&i| left[i].is_none()).collect();
    let mut candidate = 0;
    for slot in missing {
        loop {
            assert!(candidate < n, "canonical basis exhausted");
            let mut w = vec![0.0; n];
            w[candidate] = 1.0;
            candidate += 1;
            // two passes of Gram-Schmidt for stability
            for _ in 0..2 {
                for u in left.iter().flatten() {
                    let dot: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
                    w.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
                }
            }
            let norm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
            if norm > 1e-8 {
                w.iter_mut().for_each(|x| *x /= norm);
                left[slot] = Some(w);
                break;
            }
        }
    }
}
