//! Symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration (Bowdler, Martin, Reinsch and Wilkinson; EISPACK tred2/tql2).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{fix_sign, Mat, SYMMETRY_TOL};
use crate::{Error, Result};

/// Eigendecomposition `input = Q · diag(values) · Qᵗ` of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Mat,
}

impl SymEig {
    /// `Q · diag(values) · Qᵗ`.
    pub fn reconstruct(&self) -> Mat {
        matrix_function(self, |x| x)
    }

    /// Eigenvector belonging to `values[i]`.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }
}

fn check_symmetric(a: &Mat) -> Result<()> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::contract(format!(
            "sym_eig needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(Error::contract(format!(
            "sym_eig input not symmetric: ‖A - Aᵗ‖_max = {asym:e}"
        )));
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Values come out ascending; each eigenvector column has its first
/// non-negligible component positive.
pub fn sym_eig(a: &Mat) -> Result<SymEig> {
    check_symmetric(a)?;
    let n = a.rows();
    // symmetrize so the reduction only ever sees exact symmetry
    let mut v = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql(&mut d, &mut e, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        let mut col = v.column(old);
        fix_sign(&mut col);
        for (i, x) in col.into_iter().enumerate() {
            vectors[(i, new)] = x;
        }
    }
    Ok(SymEig { values, vectors })
}

/// Eigenvalues only, ascending. Cheaper than [`sym_eig`] by skipping the
/// accumulation of transformations.
pub fn sym_eigvals(a: &Mat) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let (mut d, mut e) = householder_tridiagonal(a);
    tql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// `Q · diag(g(values)) · Qᵗ`.
pub fn matrix_function(eig: &SymEig, g: impl Fn(f64) -> f64) -> Mat {
    let n = eig.values.len();
    let q = &eig.vectors;
    let gv: Vec<f64> = eig.values.iter().map(|&x| g(x)).collect();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for (k, &gk) in gv.iter().enumerate() {
                if gk != 0.0 {
                    s += q[(i, k)] * gk * q[(j, k)];
                }
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

/// Householder tridiagonalization returning (diagonal, subdiagonal) with
/// `e[0] = 0` and `e[i]` coupling rows `i-1` and `i`.
fn householder_tridiagonal(a: &Mat) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut m = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let alpha_norm = libm::sqrt((lo..n).map(|i| m[(i, k)] * m[(i, k)]).sum::<f64>());
        if alpha_norm == 0.0 {
            e[lo] = 0.0;
            continue;
        }
        let x0 = m[(lo, k)];
        let alpha = if x0 > 0.0 { -alpha_norm } else { alpha_norm };
        for i in lo..n {
            v[i] = m[(i, k)];
        }
        v[lo] -= alpha;
        let vnorm2: f64 = (lo..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            e[lo] = x0;
            continue;
        }
        let beta = 2.0 / vnorm2;
        // p = beta * A22 v
        for (i, pi) in p.iter_mut().enumerate().take(n).skip(lo) {
            let row = &m.row(i)[lo..n];
            *pi = beta * row.iter().zip(&v[lo..n]).map(|(a, b)| a * b).sum::<f64>();
        }
        let pv: f64 = (lo..n).map(|i| p[i] * v[i]).sum();
        let c = 0.5 * beta * pv;
        for i in lo..n {
            p[i] -= c * v[i];
        }
        for i in lo..n {
            let (vi, wi) = (v[i], p[i]);
            let row = m.row_mut(i);
            for j in lo..n {
                row[j] -= vi * p[j] + wi * v[j];
            }
        }
        e[lo] = alpha;
        m[(lo, k)] = alpha;
        m[(k, lo)] = alpha;
    }
    if n >= 2 {
        e[n - 1] = m[(n - 1, n - 2)];
    }
    let d = m.diagonal();
    (d, e)
}

/// EISPACK tred2: reduces `v` (holding a symmetric matrix) to tridiagonal form,
/// leaving the accumulated orthogonal transformation in `v`.
fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal (d, e) with `e[i]` coupling `i-1` and `i`.
/// Accumulates rotations into `v` when given.
fn tql(d: &mut [f64], e: &mut [f64], mut v: Option<&mut Mat>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Numerical {
                        what: "tridiagonal QL iteration",
                        residual: e[l].abs(),
                        tolerance: eps * tst1,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            h = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * h;
                            v[(k, i)] = c * v[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        a
    }

    fn assert_valid(a: &Mat, eig: &SymEig) {
        let scale = a.max_abs().max(1.0);
        assert!(eig.reconstruct().max_abs_diff(a) <= 1e-10 * scale);
        assert!(eig.vectors.orthogonality_defect() <= 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn diagonal_input_gives_permutation_vectors() {
        let a = Mat::from_diag(&[3.0, 1.0, 2.0]);
        let eig = sym_eig(&a).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        let expected = Mat::from_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(eig.vectors.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let a = Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let eig = sym_eig(&a).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        assert_valid(&a, &eig);
    }

    #[test]
    fn random_symmetric_residuals() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (20, 4), (64, 5)] {
            let a = random_symmetric(n, seed);
            let eig = sym_eig(&a).unwrap();
            assert_valid(&a, &eig);
            let vals = sym_eigvals(&a).unwrap();
            for (x, y) in vals.iter().zip(&eig.values) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn sign_convention_first_component_positive() {
        let a = random_symmetric(12, 9);
        let eig = sym_eig(&a).unwrap();
        for i in 0..12 {
            let col = eig.vector(i);
            let lead = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn degenerate_spectrum_still_orthogonal() {
        // clean hopping chain has ± symmetric spectrum and exact zero modes
        let n = 9;
        let a = Mat::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let eig = sym_eig(&a).unwrap();
        assert_valid(&a, &eig);
        let identity = Mat::identity(4);
        let eig = sym_eig(&identity).unwrap();
        assert_valid(&identity, &eig);
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = Mat::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(sym_eig(&a), Err(Error::Contract(_))));
        assert!(matches!(sym_eigvals(&a), Err(Error::Contract(_))));
    }

    #[test]
    fn projection_from_indicator_is_idempotent() {
        let a = random_symmetric(16, 11);
        let eig = sym_eig(&a).unwrap();
        let g = matrix_function(&eig, |x| if x > 0.0 { 1.0 } else { 0.0 });
        assert!(g.matmul(&g).max_abs_diff(&g) <= 1e-9);
    }

    #[test]
    fn cos_sin_pieces_preserve_norm() {
        // exp(-itA) = cos(tA) - i sin(tA); |exp(-itA)x|² = |cos(tA)x|² + |sin(tA)x|²
        let a = random_symmetric(10, 12);
        let eig = sym_eig(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm_x: f64 = x.iter().map(|v| v * v).sum();
        for t in [0.3, 1.7, 25.0] {
            let c = matrix_function(&eig, |l| libm::cos(t * l)).mat_vec(&x);
            let s = matrix_function(&eig, |l| libm::sin(t * l)).mat_vec(&x);
            let norm: f64 = c.iter().chain(&s).map(|v| v * v).sum();
            assert!((norm - norm_x).abs() <= 1e-9);
        }
    }
}
