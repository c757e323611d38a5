//! Brute-force reference implementation on the full `2^n`-dimensional space.
//!
//! Tensor layout: site 1 is the most significant bit of a basis index, and a
//! single site has basis `e_0 = (1, 0)`, `e_1 = (0, 1)` with `σᶻ e_0 = e_0`.
//! The annihilator `a = [[0, 0], [1, 0]]` maps `e_0 ↦ e_1`, so the fermionic
//! vacuum `Ω_c = e_1^{⊗n}` is the basis vector with every bit set.
//!
//! For a connected subchain `Λ_1 = {s, ..., s+ℓ-1}` (zero-based) a basis
//! index splits as `(L, S, R)` with `L` the top `s` bits, `S` the next `ℓ`
//! bits and `R` the remaining `n-s-ℓ` bits. The reduced density matrix is
//! `ρ_1[S, S'] = Σ_{L,R} ρ[(L,S,R), (L,S',R)]`, which traces out both
//! segments of the complement at once.

mod cmat;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use cmat::{inner, ONE, ZERO};
pub use cmat::{CMat, C64};

use crate::freefermion::{
    BogoliubovDecomposition, CorrelationMatrix, OccupationPattern, SubInterval,
};
use crate::linalg::{pfaffian, sym_eig, Mat};
use crate::model::{build_m, ChainParams};
use crate::{Error, Result};

/// Largest chain the oracle accepts.
pub const ORACLE_CAP: usize = 12;
/// Tolerance for `H = C* M C`, relative to `‖H‖_max`.
pub const QUADRATIC_FORM_TOL: f64 = 1e-10;
/// Tolerance for the sorted spectrum comparison, relative to `max(1, ‖H‖_max)`.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Tolerance for correlation matrices and Wick's rule.
pub const CORRELATION_TOL: f64 = 1e-8;
/// Tolerance for entropies.
pub const ENTROPY_TOL: f64 = 1e-7;
/// Tolerance for canonical anticommutation relations.
pub const CAR_TOL: f64 = 1e-12;
/// Tolerance for density-matrix validity and trace identities.
pub const STATE_TOL: f64 = 1e-10;
/// Minimal relative distance of an eigenvalue to its neighbors before its
/// eigenvector is considered well defined.
pub const ISOLATION_FACTOR: f64 = 1e-8;

/// Operator on `(C²)^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: CMat,
    n: usize,
}

fn check_cap(n: usize) -> Result<()> {
    if n > ORACLE_CAP {
        return Err(Error::TooLarge {
            what: "dense oracle chain length",
            size: n,
            limit: ORACLE_CAP,
        });
    }
    Ok(())
}

impl DenseOperator {
    pub fn new(matrix: CMat, n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::contract(format!(
                "operator on {n} sites must be {dim}x{dim}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(DenseOperator { matrix, n })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            matrix: self.matrix.adjoint(),
            n: self.n,
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.mat_vec(v)
    }

    /// `⟨ψ, A ψ⟩`.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        inner(psi, &self.apply(psi))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> CMat {
    CMat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_y() -> CMat {
    let mut y = CMat::zeros(2, 2);
    y[(0, 1)] = c(0.0, -1.0);
    y[(1, 0)] = c(0.0, 1.0);
    y
}

pub fn pauli_z() -> CMat {
    let mut z = CMat::identity(2);
    z[(1, 1)] = c(-1.0, 0.0);
    z
}

/// `a = ½(σˣ - iσʸ) = [[0, 0], [1, 0]]`.
pub fn annihilator() -> CMat {
    pauli_x()
        .sub(&pauli_y().scale(c(0.0, 1.0)))
        .scale(c(0.5, 0.0))
}

/// `op_0 ⊗ op_1 ⊗ ... ⊗ op_{n-1}`, with `None` standing for the identity.
pub fn tensor(factors: &[Option<&CMat>]) -> Result<DenseOperator> {
    let n = factors.len();
    check_cap(n)?;
    let id = CMat::identity(2);
    let mut out = CMat::identity(1);
    for f in factors {
        out = out.kron(f.unwrap_or(&id));
    }
    DenseOperator::new(out, n)
}

/// `op` acting on zero-based `site` of an `n`-site chain.
pub fn site_operator(n: usize, site: usize, op: &CMat) -> Result<DenseOperator> {
    if site >= n {
        return Err(Error::contract(format!("site {site} outside {n} sites")));
    }
    let mut factors = vec![None; n];
    factors[site] = Some(op);
    tensor(&factors)
}

/// `H = -Σ μ_j [(1+γ_j) σˣ_j σˣ_{j+1} + (1-γ_j) σʸ_j σʸ_{j+1}] - Σ ν_j σᶻ_j`
/// assembled from Pauli tensor products.
pub fn build_h(params: &ChainParams) -> Result<DenseOperator> {
    let n = params.n();
    check_cap(n)?;
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    for j in 0..n.saturating_sub(1) {
        let (mu, g) = (params.mu()[j], params.gamma()[j]);
        let mut f = vec![None; n];
        f[j] = Some(&x);
        f[j + 1] = Some(&x);
        h.add_scaled(tensor(&f)?.matrix(), c(-mu * (1.0 + g), 0.0));
        f[j] = Some(&y);
        f[j + 1] = Some(&y);
        h.add_scaled(tensor(&f)?.matrix(), c(-mu * (1.0 - g), 0.0));
    }
    for (j, &nu) in params.nu().iter().enumerate() {
        h.add_scaled(site_operator(n, j, &z)?.matrix(), c(-nu, 0.0));
    }
    DenseOperator::new(h, n)
}

/// Jordan-Wigner fermions `c_j = σᶻ_1 ⋯ σᶻ_{j-1} a_j`, `j = 1..n`.
pub fn jordan_wigner(n: usize) -> Result<Vec<DenseOperator>> {
    check_cap(n)?;
    let (z, a) = (pauli_z(), annihilator());
    (0..n)
        .map(|j| {
            let factors: Vec<Option<&CMat>> = (0..n)
                .map(|k| match k.cmp(&j) {
                    core::cmp::Ordering::Less => Some(&z),
                    core::cmp::Ordering::Equal => Some(&a),
                    core::cmp::Ordering::Greater => None,
                })
                .collect();
            tensor(&factors)
        })
        .collect()
}

/// `max ‖{c_j, c_k*} - δ_jk I‖, ‖{c_j, c_k}‖` over all pairs.
pub fn car_residual(ops: &[DenseOperator]) -> f64 {
    let Some(first) = ops.first() else {
        return 0.0;
    };
    let id = CMat::identity(first.dim());
    let adj: Vec<CMat> = ops.iter().map(|o| o.matrix.adjoint()).collect();
    let mut worst: f64 = 0.0;
    for (j, cj) in ops.iter().enumerate() {
        for (k, ck) in ops.iter().enumerate() {
            let mixed = cj.matrix.anticommutator(&adj[k]);
            let r = if j == k {
                mixed.max_abs_diff(&id)
            } else {
                mixed.max_abs()
            };
            worst = worst
                .max(r)
                .max(cj.matrix.anticommutator(&ck.matrix).max_abs());
        }
    }
    worst
}

/// `C = (c_1, c_1*, ..., c_n, c_n*)`.
pub fn interleaved(c_ops: &[DenseOperator]) -> Vec<DenseOperator> {
    c_ops
        .iter()
        .flat_map(|op| [op.clone(), op.adjoint()])
        .collect()
}

/// `‖H - Σ_{ab} (C*)_a M_ab C_b‖_max` with `C* = (c_1*, c_1, ...)`.
pub fn verify_quadratic_form(params: &ChainParams) -> Result<f64> {
    let h = build_h(params)?;
    let cs = interleaved(&jordan_wigner(params.n())?);
    let m = build_m(params).matrix;
    let dual: Vec<&DenseOperator> = (0..cs.len()).map(|a| &cs[a ^ 1]).collect();
    let mut q = CMat::zeros(h.dim(), h.dim());
    for a in 0..cs.len() {
        for b in 0..cs.len() {
            let mab = m[(a, b)];
            if mab != 0.0 {
                q.add_scaled(&dual[a].matrix.matmul(&cs[b].matrix), c(mab, 0.0));
            }
        }
    }
    Ok(h.matrix.max_abs_diff(&q))
}

/// Full diagonalization of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns.
    pub states: CMat,
}

impl ExactSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn state(&self, i: usize) -> Vec<C64> {
        (0..self.states.rows())
            .map(|r| self.states[(r, i)])
            .collect()
    }

    /// Distance from `energies[i]` to the nearest other eigenvalue.
    pub fn isolation(&self, i: usize) -> f64 {
        let e = &self.energies;
        let below = if i > 0 {
            e[i] - e[i - 1]
        } else {
            f64::INFINITY
        };
        let above = if i + 1 < e.len() {
            e[i + 1] - e[i]
        } else {
            f64::INFINITY
        };
        below.min(above)
    }

    /// `‖H V - V diag(E)‖_max`.
    pub fn residual(&self, h: &DenseOperator) -> f64 {
        let hv = h.matrix.matmul(&self.states);
        let vd = CMat::from_fn(self.states.rows(), self.states.cols(), |r, i| {
            self.states[(r, i)] * self.energies[i]
        });
        hv.max_abs_diff(&vd)
    }
}

/// Diagonalizes a real symmetric Hamiltonian; each eigenvector is normalized
/// so that its largest-magnitude component (first on ties) is real positive.
pub fn exact_spectrum(h: &DenseOperator) -> Result<ExactSpectrum> {
    let scale = h.matrix.max_abs().max(1.0);
    if h.matrix.max_imag() > 1e-14 * scale {
        return Err(Error::contract(
            "oracle diagonalization expects a real Hamiltonian",
        ));
    }
    let eig = sym_eig(&h.matrix.real_part())?;
    let dim = h.dim();
    let mut states = CMat::zeros(dim, dim);
    for i in 0..dim {
        let mut v = eig.vector(i);
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lead = v.iter().copied().find(|x| x.abs() >= peak * (1.0 - 1e-12));
        if matches!(lead, Some(x) if x < 0.0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        for (r, x) in v.into_iter().enumerate() {
            states[(r, i)] = c(x, 0.0);
        }
    }
    let spectrum = ExactSpectrum {
        energies: eig.values,
        states,
    };
    let res = spectrum.residual(h);
    if res > 1e-9 * scale {
        return Err(Error::Numerical {
            what: "exact eigen-decomposition of H",
            residual: res,
            tolerance: 1e-9 * scale,
        });
    }
    Ok(spectrum)
}

/// Sorted comparison of the `2^n` free-fermion energies with exact
/// diagonalization; returns the largest absolute mismatch.
pub fn match_spectra(params: &ChainParams) -> Result<f64> {
    let decomp = crate::freefermion::decompose_params(params)?;
    let mut ff = decomp.all_energies()?;
    ff.sort_by(f64::total_cmp);
    let exact = exact_spectrum(&build_h(params)?)?;
    Ok(ff
        .iter()
        .zip(&exact.energies)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// `|ψ⟩⟨ψ|`.
pub fn density_matrix(psi: &[C64]) -> CMat {
    CMat::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
}

/// Checks unit trace, Hermiticity and positivity to [`STATE_TOL`].
pub fn validate_density_matrix(rho: &CMat) -> Result<()> {
    let tr = rho.trace();
    if (tr - ONE).norm() > STATE_TOL {
        return Err(Error::contract(format!("density matrix trace {tr} != 1")));
    }
    let herm = rho.hermiticity_defect();
    if herm > STATE_TOL {
        return Err(Error::contract(format!(
            "density matrix not Hermitian: {herm:e}"
        )));
    }
    let min = rho.hermitian_eigvals()?[0];
    if min < -STATE_TOL {
        return Err(Error::contract(format!(
            "density matrix not positive: eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// Reduced density matrix on `sub` of a density matrix on `sub.chain_len()` sites.
pub fn partial_trace(rho: &CMat, sub: &SubInterval) -> Result<CMat> {
    let n = sub.chain_len();
    check_cap(n)?;
    if rho.rows() != 1 << n || rho.cols() != 1 << n {
        return Err(Error::contract(
            "density matrix dimension does not match chain",
        ));
    }
    let (s, l) = (sub.start(), sub.len());
    let r_bits = n - s - l;
    let mut out = CMat::zeros(1 << l, 1 << l);
    let index = |left: usize, mid: usize, right: usize| (left << (n - s)) | (mid << r_bits) | right;
    for left in 0..1usize << s {
        for right in 0..1usize << r_bits {
            for a in 0..1usize << l {
                for b in 0..1usize << l {
                    out[(a, b)] += rho[(index(left, a, right), index(left, b, right))];
                }
            }
        }
    }
    Ok(out)
}

/// Reduced density matrix on `sub` of the pure state `psi`, without forming
/// `|ψ⟩⟨ψ|`.
pub fn reduced_state(psi: &[C64], sub: &SubInterval) -> Result<CMat> {
    let n = sub.chain_len();
    check_cap(n)?;
    if psi.len() != 1 << n {
        return Err(Error::contract("state dimension does not match chain"));
    }
    let (s, l) = (sub.start(), sub.len());
    let r_bits = n - s - l;
    // Ψ[a][(left, right)] so that ρ_1 = Ψ Ψ†
    let env = 1usize << (s + r_bits);
    let psi_m = CMat::from_fn(1 << l, env, |a, e| {
        let (left, right) = (e >> r_bits, e & ((1 << r_bits) - 1));
        psi[(left << (n - s)) | (a << r_bits) | right]
    });
    Ok(psi_m.matmul(&psi_m.adjoint()))
}

/// `-Tr ρ log ρ` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    let ev = rho.hermitian_eigvals()?;
    if ev[0] < -STATE_TOL {
        return Err(Error::contract("entropy of a non-positive matrix"));
    }
    Ok(ev
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * libm::log(p))
        .sum())
}

fn require_isolated(spectrum: &ExactSpectrum, index: usize, scale: f64) -> Result<()> {
    let threshold = ISOLATION_FACTOR * scale.max(1.0);
    let gap = spectrum.isolation(index);
    if gap <= threshold {
        return Err(Error::Degenerate {
            min_gap: gap,
            threshold,
        });
    }
    Ok(())
}

/// Entanglement entropy of exact eigenstate `state_index` (ascending energy
/// order) with respect to `sub`.
pub fn exact_entanglement(
    params: &ChainParams,
    state_index: usize,
    sub: &SubInterval,
) -> Result<f64> {
    let h = build_h(params)?;
    let spectrum = exact_spectrum(&h)?;
    if state_index >= spectrum.len() {
        return Err(Error::contract("state index out of range"));
    }
    require_isolated(&spectrum, state_index, h.matrix.max_abs())?;
    von_neumann_entropy(&reduced_state(&spectrum.state(state_index), sub)?)
}

/// Exact eigenvector whose energy matches `E_α`; refused if that level is
/// not isolated.
pub fn eigenstate_for_pattern(
    decomp: &BogoliubovDecomposition,
    spectrum: &ExactSpectrum,
    alpha: &OccupationPattern,
    h_scale: f64,
) -> Result<Vec<C64>> {
    let e = decomp.many_body_energy(alpha);
    let (idx, dist) = spectrum
        .energies
        .iter()
        .enumerate()
        .map(|(i, x)| (i, (x - e).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::contract("empty spectrum"))?;
    let tol = SPECTRUM_TOL * h_scale.max(1.0);
    if dist > tol {
        return Err(Error::Numerical {
            what: "no exact eigenvalue matches the free-fermion energy",
            residual: dist,
            tolerance: tol,
        });
    }
    require_isolated(spectrum, idx, h_scale)?;
    Ok(spectrum.state(idx))
}

fn real_correlation(g: CMat) -> Result<CorrelationMatrix> {
    let imag = g.max_imag();
    if imag > STATE_TOL {
        return Err(Error::contract(format!(
            "correlation matrix has imaginary part {imag:e}"
        )));
    }
    CorrelationMatrix::new(g.real_part())
}

/// `Γ_ab = Tr(C_a C_b* ρ)` for a density matrix `ρ` and fermions `c_ops`.
pub fn correlation_from_state(
    rho: &DenseOperator,
    c_ops: &[DenseOperator],
) -> Result<CorrelationMatrix> {
    validate_density_matrix(&rho.matrix)?;
    let cs = interleaved(c_ops);
    let adj: Vec<CMat> = cs.iter().map(|o| o.matrix.adjoint()).collect();
    let dim = cs.len();
    let g = CMat::from_fn(dim, dim, |a, b| {
        cs[a].matrix.matmul(&adj[b]).trace_product(&rho.matrix)
    });
    real_correlation(g)
}

/// `Γ_ab = ⟨C_a* ψ, C_b* ψ⟩` for a normalized pure state `psi`.
pub fn correlation_from_vector(psi: &[C64], c_ops: &[DenseOperator]) -> Result<CorrelationMatrix> {
    let norm = inner(psi, psi).re;
    if (norm - 1.0).abs() > STATE_TOL {
        return Err(Error::contract("state vector not normalized"));
    }
    let cs = interleaved(c_ops);
    let images: Vec<Vec<C64>> = cs.iter().map(|o| o.adjoint().apply(psi)).collect();
    let dim = cs.len();
    real_correlation(CMat::from_fn(dim, dim, |a, b| {
        inner(&images[a], &images[b])
    }))
}

/// Outcome of [`wick_check`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WickReport {
    /// `max |⟨Π D⟩ - pf(D^{(m)})|` over even tuples.
    pub max_residual: f64,
    /// `max |⟨Π D⟩|` over odd tuples.
    pub max_odd_expectation: f64,
    pub tuples: usize,
}

/// `⟨ψ, D_{t_m} ⋯ D_{t_1} ψ⟩` with `D = (c_1, c_1*, ...)`.
pub fn product_expectation(psi: &[C64], ops: &[DenseOperator], tuple: &[usize]) -> C64 {
    let mut phi = psi.to_vec();
    for &t in tuple {
        phi = ops[t].apply(&phi);
    }
    inner(psi, &phi)
}

/// Wick's rule on exact eigenstate `state_index`: each tuple `(t_1, ..., t_m)`
/// indexes `D = (c_1, c_1*, ..., c_n, c_n*)`; the product `D_{t_m}⋯D_{t_1}`
/// is compared with the Pfaffian of `A_{s,r} = ⟨D_{t_r} D_{t_s}⟩` (`s < r`).
pub fn wick_check(
    params: &ChainParams,
    state_index: usize,
    tuples: &[Vec<usize>],
) -> Result<WickReport> {
    let h = build_h(params)?;
    let spectrum = exact_spectrum(&h)?;
    if state_index >= spectrum.len() {
        return Err(Error::contract("state index out of range"));
    }
    require_isolated(&spectrum, state_index, h.matrix.max_abs())?;
    let psi = spectrum.state(state_index);
    let ops = interleaved(&jordan_wigner(params.n())?);
    wick_check_state(&psi, &ops, tuples)
}

/// [`wick_check`] for an arbitrary state vector and interleaved operators.
pub fn wick_check_state(
    psi: &[C64],
    ops: &[DenseOperator],
    tuples: &[Vec<usize>],
) -> Result<WickReport> {
    let mut report = WickReport {
        tuples: tuples.len(),
        ..WickReport::default()
    };
    for tuple in tuples {
        if let Some(&bad) = tuple.iter().find(|&&t| t >= ops.len()) {
            return Err(Error::contract(format!(
                "operator index {bad} out of range"
            )));
        }
        let lhs = product_expectation(psi, ops, tuple);
        let m = tuple.len();
        if m % 2 == 1 {
            report.max_odd_expectation = report.max_odd_expectation.max(lhs.norm());
            continue;
        }
        let mut pair = Mat::zeros(m, m);
        for s in 0..m {
            for r in s + 1..m {
                let v = product_expectation(psi, ops, &[tuple[s], tuple[r]]);
                if v.im.abs() > STATE_TOL {
                    return Err(Error::contract("complex pair expectation in a real state"));
                }
                pair[(s, r)] = v.re;
                pair[(r, s)] = -v.re;
            }
        }
        let rhs = pfaffian(&pair)?;
        report.max_residual = report.max_residual.max((lhs - c(rhs, 0.0)).norm());
    }
    Ok(report)
}

/// `b_k = Σ_a W_{2k,a} C_a`, the Bogoliubov annihilators.
pub fn bogoliubov_b_ops(
    decomp: &BogoliubovDecomposition,
    c_ops: &[DenseOperator],
) -> Result<Vec<DenseOperator>> {
    let n = decomp.n();
    if c_ops.len() != n {
        return Err(Error::contract("need one fermion per site"));
    }
    let cs = interleaved(c_ops);
    let w = decomp.w();
    (0..n)
        .map(|k| {
            let dim = cs[0].dim();
            let mut b = CMat::zeros(dim, dim);
            for (a, op) in cs.iter().enumerate() {
                let coeff = w[(2 * k, a)];
                if coeff != 0.0 {
                    b.add_scaled(&op.matrix, c(coeff, 0.0));
                }
            }
            DenseOperator::new(b, c_ops[0].n())
        })
        .collect()
}

/// Residuals of the Bogoliubov fermions against `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovOpsReport {
    /// CAR residual of `b_1..b_n`.
    pub car: f64,
    /// `‖H - (2 Σ λ_j b_j* b_j - E_0)‖_max`.
    pub hamiltonian: f64,
    /// `max_j ‖[H, b_j* b_j]‖_max`.
    pub commutator: f64,
}

pub fn check_bogoliubov_ops(params: &ChainParams) -> Result<BogoliubovOpsReport> {
    let decomp = crate::freefermion::decompose_params(params)?;
    let h = build_h(params)?;
    let b = bogoliubov_b_ops(&decomp, &jordan_wigner(params.n())?)?;
    let dim = h.dim();
    let mut free = CMat::identity(dim).scale(c(-decomp.e0(), 0.0));
    let mut commutator: f64 = 0.0;
    for (bj, &l) in b.iter().zip(decomp.lambdas()) {
        let number = bj.matrix.adjoint().matmul(&bj.matrix);
        free.add_scaled(&number, c(2.0 * l, 0.0));
        commutator = commutator.max(h.matrix.commutator(&number).max_abs());
    }
    Ok(BogoliubovOpsReport {
        car: car_residual(&b),
        hamiltonian: h.matrix.max_abs_diff(&free),
        commutator,
    })
}

/// `ρ = ⊗_j diag(η_j, 1-η_j)`.
pub fn diagonal_product_state(eta: &[f64]) -> Result<DenseOperator> {
    let n = eta.len();
    check_cap(n)?;
    if eta.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
        return Err(Error::contract("η must lie in [0, 1]"));
    }
    let dim = 1usize << n;
    let mut rho = CMat::zeros(dim, dim);
    for i in 0..dim {
        let p: f64 = eta
            .iter()
            .enumerate()
            .map(|(j, &e)| {
                if (i >> (n - 1 - j)) & 1 == 0 {
                    e
                } else {
                    1.0 - e
                }
            })
            .product();
        rho[(i, i)] = c(p, 0.0);
    }
    DenseOperator::new(rho, n)
}

fn x_log_x(x: f64) -> f64 {
    if x > 0.0 {
        x * libm::log(x)
    } else {
        0.0
    }
}

/// `|Tr ρ log ρ - tr Γ log Γ|` for the diagonal product state with
/// parameters `eta`, with `Γ` measured from the state.
pub fn diagonal_trace_identity(eta: &[f64]) -> Result<f64> {
    let rho = diagonal_product_state(eta)?;
    let lhs: f64 = (0..rho.dim()).map(|i| x_log_x(rho.matrix[(i, i)].re)).sum();
    let gamma = correlation_from_state(&rho, &jordan_wigner(eta.len())?)?;
    let rhs: f64 = gamma
        .eigenvalues()?
        .into_iter()
        .map(|x| x_log_x(x.max(0.0)))
        .sum();
    Ok((lhs - rhs).abs())
}

/// Vacuum `Ω_c` of the Jordan-Wigner fermions.
pub fn fermion_vacuum(n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; 1 << n];
    v[(1 << n) - 1] = ONE;
    v
}

#[cfg(test)]
mod tests;
