use alloc::format;

use super::Mat;
use crate::{Error, Result};

/// Pfaffian of a real antisymmetric matrix.
///
/// Parlett-Reid reduction to tridiagonal form with partial pivoting; each
/// pivot swap flips the sign. Odd dimensions return 0.
pub fn pfaffian(a: &Mat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::contract("pfaffian expects a square matrix"));
    }
    let defect = a.antisymmetry_defect();
    if defect > 1e-12 {
        return Err(Error::contract(format!(
            "pfaffian input not antisymmetric: ‖A + Aᵗ‖_max = {defect:e}"
        )));
    }
    let n = a.rows();
    if n % 2 == 1 {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut m = a.clone();
    let mut pf = 1.0;
    for k in (0..n - 1).step_by(2) {
        // pivot: largest entry in column k below row k
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].abs();
        for i in k + 2..n {
            if m[(i, k)].abs() > best {
                best = m[(i, k)].abs();
                kp = i;
            }
        }
        if kp != k + 1 {
            swap_rows_cols(&mut m, k + 1, kp);
            pf = -pf;
        }
        let pivot = m[(k, k + 1)];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            // tau = A[k, k+2:] / A[k, k+1]
            // A[k+2:, k+2:] += tau ⊗ A[k+2:, k+1] - A[k+2:, k+1] ⊗ tau
            for i in k + 2..n {
                let tau_i = m[(k, i)] / pivot;
                let col_i = m[(i, k + 1)];
                for j in k + 2..n {
                    let tau_j = m[(k, j)] / pivot;
                    let col_j = m[(j, k + 1)];
                    m[(i, j)] += tau_i * col_j - col_i * tau_j;
                }
            }
        }
    }
    Ok(pf)
}

fn swap_rows_cols(m: &mut Mat, a: usize, b: usize) {
    let n = m.rows();
    for j in 0..n {
        let t = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = t;
    }
    for i in 0..n {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}
