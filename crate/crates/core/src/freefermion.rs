//! Bogoliubov diagonalization of `M` and the entanglement of many-body
//! eigenstates.
//!
//! With `USVᵗ = Λ` the SVD of `S = A + B`, the orthogonal matrix
//!
//! ```text
//! Ŵ = ½ [[V+U, V-U], [V-U, V+U]],   W = Pᵗ Ŵ P
//! ```
//!
//! satisfies `W M Wᵗ = ⊕_j diag(λ_j, -λ_j)` and `W J Wᵗ = J`, `J = (σˣ)^{⊕n}`.
//! Row `2j` of `W` (zero-based) is the eigenvector of `M` for `+λ_j`, row
//! `2j+1` the one for `-λ_j`.
//!
//! The eigenstate `ψ_α` has correlation matrix `Γ_α = Wᵗ D_α W`,
//! `D_α = ⊕_k diag(1-α_k, α_k)`, the spectral projection of `M` onto
//! `Δ_α = {λ_j : α_j = 0} ∪ {-λ_j : α_j = 1}`. Its entanglement with a
//! subchain is the entropy of the 2ℓ×2ℓ principal block of `Γ_α` belonging to
//! that subchain.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{norm2x2, real_svd, sym_eigvals, Mat};
use crate::localization::{correlator_sum_bound, CorrelatorMatrix};
use crate::model::{build_m, conjugate_by_p, ChainParams, EffectiveHamiltonian};
use crate::{Error, Result};

/// Tolerance on orthogonality, `WJWᵗ = J` and block diagonalization.
pub const BOGOLIUBOV_TOL: f64 = 1e-9;
/// Relative gap below which the one-particle spectrum counts as degenerate.
pub const DEFAULT_GAP_FACTOR: f64 = 1e-12;
/// Eigenvalues of a restricted correlation matrix may stray this far outside
/// `[0, 1]` before it is treated as broken rather than rounded.
pub const CLAMP_WINDOW: f64 = 1e-8;
/// Maximum mismatch in the `(ξ, 1-ξ)` pairing of correlation eigenvalues.
pub const PAIRING_TOL: f64 = 1e-7;
/// Projection tolerance for full eigenstate correlation matrices.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Default cap on `2^n` for exhaustive enumeration of occupation patterns.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 4096;

/// Connected subchain `{start, ..., start + len - 1}` of an `n`-site chain,
/// zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubInterval {
    start: usize,
    len: usize,
    n: usize,
}

impl SubInterval {
    /// Zero-based start.
    pub fn new(start: usize, len: usize, n: usize) -> Result<Self> {
        if len == 0 || start + len > n {
            return Err(Error::contract(format!(
                "subinterval start {start}, length {len} does not fit in {n} sites"
            )));
        }
        Ok(SubInterval { start, len, n })
    }

    /// One-based first site `r` and length `ℓ`, i.e. `{r, ..., r+ℓ-1}`.
    pub fn from_one_based(r: usize, ell: usize, n: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::contract("one-based start r must be >= 1"));
        }
        Self::new(r - 1, ell, n)
    }

    /// Subchain starting at the left edge.
    pub fn left_edge(ell: usize, n: usize) -> Result<Self> {
        Self::new(0, ell, n)
    }

    /// Subchain centered in the chain (rounded left).
    pub fn centered(ell: usize, n: usize) -> Result<Self> {
        if ell > n {
            return Self::new(0, ell, n);
        }
        Self::new((n - ell) / 2, ell, n)
    }

    pub fn full(n: usize) -> Self {
        SubInterval {
            start: 0,
            len: n,
            n,
        }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// One-based first site.
    pub fn r(&self) -> usize {
        self.start + 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn chain_len(&self) -> usize {
        self.n
    }

    pub fn contains(&self, site: usize) -> bool {
        (self.start..self.start + self.len).contains(&site)
    }

    pub fn sites(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.len
    }

    /// Sites outside the subchain, ascending.
    pub fn complement(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&k| !self.contains(k))
    }

    /// Rows/columns `{2j, 2j+1 : j ∈ Λ_1}` of a 2n×2n correlation matrix.
    pub fn matrix_indices(&self) -> Vec<usize> {
        (2 * self.start..2 * (self.start + self.len)).collect()
    }

    /// The complement as a subinterval, when it is connected and non-empty.
    pub fn connected_complement(&self) -> Option<SubInterval> {
        if self.len == self.n {
            None
        } else if self.start == 0 {
            SubInterval::new(self.len, self.n - self.len, self.n).ok()
        } else if self.start + self.len == self.n {
            SubInterval::new(0, self.start, self.n).ok()
        } else {
            None
        }
    }
}

/// Occupation pattern `α ∈ {0,1}^n` labeling `ψ_α = (b_1*)^{α_1}⋯(b_n*)^{α_n} Ω`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OccupationPattern {
    bits: Vec<bool>,
}

impl OccupationPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        OccupationPattern { bits }
    }

    /// All modes empty: the ground state.
    pub fn vacuum(n: usize) -> Self {
        OccupationPattern {
            bits: vec![false; n],
        }
    }

    /// `α_{j+1} = bit j of index` (zero-based `j`).
    pub fn from_index(n: usize, index: u64) -> Self {
        OccupationPattern {
            bits: (0..n).map(|j| j < 64 && (index >> j) & 1 == 1).collect(),
        }
    }

    /// Inverse of [`OccupationPattern::from_index`] for `n <= 64`.
    pub fn index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |acc, (j, _)| acc | (1u64 << j))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn flip(&mut self, j: usize) {
        self.bits[j] = !self.bits[j];
    }

    pub fn flipped(&self, j: usize) -> Self {
        let mut out = self.clone();
        out.flip(j);
        out
    }

    /// Every bit flipped.
    pub fn complement(&self) -> Self {
        OccupationPattern {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl fmt::Debug for OccupationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Real symmetric correlation matrix `Γ = ⟨C C*⟩` in the interleaved
/// ordering `C = (c_1, c_1*, ..., c_m, c_m*)`; block `(j, k)` is
/// `[[⟨c_j c_k*⟩, ⟨c_j c_k⟩], [⟨c_j* c_k*⟩, ⟨c_j* c_k⟩]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    matrix: Mat,
}

impl CorrelationMatrix {
    /// Wraps a matrix after checking it is square, even-sized and symmetric.
    pub fn new(matrix: Mat) -> Result<Self> {
        if !matrix.is_square() || !matrix.rows().is_multiple_of(2) {
            return Err(Error::contract(
                "correlation matrix must be square with even dimension",
            ));
        }
        let asym = matrix.asymmetry();
        if asym > 1e-10 {
            return Err(Error::contract(format!(
                "correlation matrix not symmetric: {asym:e}"
            )));
        }
        Ok(CorrelationMatrix { matrix })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    /// Number of sites `m` (the matrix is 2m×2m).
    pub fn sites(&self) -> usize {
        self.matrix.rows() / 2
    }

    /// 2×2 block `(j, k)` as `[g00, g01, g10, g11]`.
    pub fn block(&self, j: usize, k: usize) -> [f64; 4] {
        let g = &self.matrix;
        [
            g[(2 * j, 2 * k)],
            g[(2 * j, 2 * k + 1)],
            g[(2 * j + 1, 2 * k)],
            g[(2 * j + 1, 2 * k + 1)],
        ]
    }

    /// Spectral norm of block `(j, k)`.
    pub fn block_norm(&self, j: usize, k: usize) -> f64 {
        let [a, b, c, d] = self.block(j, k);
        norm2x2(a, b, c, d)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        sym_eigvals(&self.matrix)
    }

    /// `‖Γ² - Γ‖_max`.
    pub fn projection_defect(&self) -> f64 {
        self.matrix.matmul(&self.matrix).max_abs_diff(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Result of [`bogoliubov_decompose`].
#[derive(Debug, Clone)]
pub struct BogoliubovDecomposition {
    n: usize,
    lambdas: Vec<f64>,
    w: Mat,
    u: Mat,
    v: Mat,
    min_gap: f64,
}

/// Residuals of the three defining properties of a Bogoliubov diagonalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovResiduals {
    /// `‖W Wᵗ - I‖_max`
    pub orthogonality: f64,
    /// `‖W J Wᵗ - J‖_max`
    pub symplectic: f64,
    /// `‖W M Wᵗ - ⊕ diag(λ_j, -λ_j)‖_max`
    pub diagonalization: f64,
}

/// `J = (σˣ)^{⊕n}`.
pub fn j_matrix(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = 1.0;
    }
    j
}

/// Computes the residuals for a candidate `W` against `M` and `λ`.
pub fn bogoliubov_residuals(w: &Mat, m: &Mat, lambdas: &[f64]) -> BogoliubovResiduals {
    let n = lambdas.len();
    let orthogonality = w.matmul(&w.transpose()).max_abs_diff(&Mat::identity(2 * n));
    let j = j_matrix(n);
    let symplectic = w.matmul(&j).matmul(&w.transpose()).max_abs_diff(&j);
    let mut target = Mat::zeros(2 * n, 2 * n);
    for (k, &l) in lambdas.iter().enumerate() {
        target[(2 * k, 2 * k)] = l;
        target[(2 * k + 1, 2 * k + 1)] = -l;
    }
    let diagonalization = w.matmul(m).matmul(&w.transpose()).max_abs_diff(&target);
    BogoliubovResiduals {
        orthogonality,
        symplectic,
        diagonalization,
    }
}

impl BogoliubovResiduals {
    /// Fails on the first property exceeding its tolerance; the
    /// diagonalization residual is scaled by `max(1, ‖M‖_max)`.
    pub fn check(&self, m_scale: f64) -> Result<()> {
        if self.orthogonality > BOGOLIUBOV_TOL {
            return Err(Error::Numerical {
                what: "W orthogonality",
                residual: self.orthogonality,
                tolerance: BOGOLIUBOV_TOL,
            });
        }
        if self.symplectic > BOGOLIUBOV_TOL {
            return Err(Error::Numerical {
                what: "Bogoliubov condition W J Wᵗ = J",
                residual: self.symplectic,
                tolerance: BOGOLIUBOV_TOL,
            });
        }
        let tol = BOGOLIUBOV_TOL * m_scale.max(1.0);
        if self.diagonalization > tol {
            return Err(Error::Numerical {
                what: "block diagonalization W M Wᵗ",
                residual: self.diagonalization,
                tolerance: tol,
            });
        }
        Ok(())
    }
}

/// Diagonalizes `M` through the SVD of `S = A + B`.
pub fn bogoliubov_decompose(m: &EffectiveHamiltonian) -> Result<BogoliubovDecomposition> {
    let n = m.n;
    let tilde = conjugate_by_p(&m.matrix);
    let a = tilde.submatrix(0, 0, n, n);
    let b = tilde.submatrix(0, n, n, n);
    let s = a.add(&b);
    let svd = real_svd(&s)?;
    let (u, v) = (svd.u, svd.v);

    let mut w_hat = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let plus = 0.5 * (v[(i, j)] + u[(i, j)]);
            let minus = 0.5 * (v[(i, j)] - u[(i, j)]);
            w_hat[(i, j)] = plus;
            w_hat[(i, j + n)] = minus;
            w_hat[(i + n, j)] = minus;
            w_hat[(i + n, j + n)] = plus;
        }
    }
    let w = crate::model::conjugate_by_pt(&w_hat);
    let lambdas = svd.sigma;

    bogoliubov_residuals(&w, &m.matrix, &lambdas).check(m.matrix.max_abs())?;

    let min_gap = lambdas
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(lambdas[0], f64::min);
    Ok(BogoliubovDecomposition {
        n,
        lambdas,
        w,
        u,
        v,
        min_gap,
    })
}

/// Builds `M` from the parameters and decomposes it.
pub fn decompose_params(params: &ChainParams) -> Result<BogoliubovDecomposition> {
    bogoliubov_decompose(&build_m(params))
}

impl BogoliubovDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `0 ≤ λ_1 ≤ ... ≤ λ_n`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn w(&self) -> &Mat {
        &self.w
    }

    pub fn u(&self) -> &Mat {
        &self.u
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    /// Smallest spacing in the sorted `{±λ_j}`, or `λ_1` if smaller.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Ground-state energy magnitude `E_0 = Σ λ_j`.
    pub fn e0(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// `1e-12 · max(1, λ_n)`.
    pub fn default_gap_threshold(&self) -> f64 {
        DEFAULT_GAP_FACTOR * self.lambdas.last().copied().unwrap_or(0.0).max(1.0)
    }

    /// True iff the one-particle spectrum `{±λ_j}` is simple at `threshold`.
    pub fn check_simple_spectrum(&self, threshold: f64) -> bool {
        self.min_gap > threshold
    }

    /// [`check_simple_spectrum`](Self::check_simple_spectrum) at the default threshold.
    pub fn has_simple_spectrum(&self) -> bool {
        self.check_simple_spectrum(self.default_gap_threshold())
    }

    pub(crate) fn require_simple(&self) -> Result<()> {
        let threshold = self.default_gap_threshold();
        if self.check_simple_spectrum(threshold) {
            Ok(())
        } else {
            Err(Error::Degenerate {
                min_gap: self.min_gap,
                threshold,
            })
        }
    }

    /// `E_α = Σ_{α_j=1} λ_j - Σ_{α_j=0} λ_j`.
    pub fn many_body_energy(&self, alpha: &OccupationPattern) -> f64 {
        self.check_len(alpha);
        self.lambdas
            .iter()
            .zip(alpha.bits())
            .map(|(&l, &occupied)| if occupied { l } else { -l })
            .sum()
    }

    /// All `2^n` many-body energies indexed by [`OccupationPattern::index`].
    pub fn all_energies(&self) -> Result<Vec<f64>> {
        if self.n >= 31 {
            return Err(Error::TooLarge {
                what: "many-body spectrum enumeration",
                size: self.n,
                limit: 30,
            });
        }
        Ok((0..1u64 << self.n)
            .map(|idx| self.many_body_energy(&OccupationPattern::from_index(self.n, idx)))
            .collect())
    }

    /// Eigenvector of `M` that enters `Δ_α` for mode `k`.
    fn occupied_row(&self, k: usize, alpha: &OccupationPattern) -> &[f64] {
        self.w.row(2 * k + usize::from(alpha.get(k)))
    }

    /// `Γ_α = Wᵗ D_α W`, the projection of `M` onto `Δ_α`.
    pub fn correlation_matrix(&self, alpha: &OccupationPattern) -> Result<CorrelationMatrix> {
        self.check_len(alpha);
        self.require_simple()?;
        let dim = 2 * self.n;
        let mut g = Mat::zeros(dim, dim);
        for k in 0..self.n {
            let row = self.occupied_row(k, alpha);
            for i in 0..dim {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                let out = g.row_mut(i);
                for (o, &rj) in out.iter_mut().zip(row) {
                    *o += ri * rj;
                }
            }
        }
        symmetrize(&mut g);
        Ok(CorrelationMatrix { matrix: g })
    }

    /// Restricted correlation matrix of `ψ_α` on `sub` without forming the
    /// full 2n×2n projection.
    pub fn restricted_correlation(
        &self,
        alpha: &OccupationPattern,
        sub: &SubInterval,
    ) -> Result<CorrelationMatrix> {
        self.check_len(alpha);
        self.check_sub(sub)?;
        self.require_simple()?;
        Ok(RestrictedBuilder::new(self, sub).build(alpha))
    }

    fn check_len(&self, alpha: &OccupationPattern) {
        assert_eq!(alpha.len(), self.n, "occupation pattern length mismatch");
    }

    fn check_sub(&self, sub: &SubInterval) -> Result<()> {
        if sub.chain_len() != self.n {
            return Err(Error::contract(format!(
                "subinterval belongs to a {}-site chain, decomposition has {}",
                sub.chain_len(),
                self.n
            )));
        }
        Ok(())
    }
}

fn symmetrize(g: &mut Mat) {
    let d = g.rows();
    for i in 0..d {
        for j in i + 1..d {
            let s = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
}

/// Free function form of [`BogoliubovDecomposition::check_simple_spectrum`].
pub fn check_simple_spectrum(decomp: &BogoliubovDecomposition, gap_threshold: f64) -> bool {
    decomp.check_simple_spectrum(gap_threshold)
}

/// The 2ℓ×2ℓ principal block of `gamma` on `sub`.
pub fn restrict(gamma: &CorrelationMatrix, sub: &SubInterval) -> Result<CorrelationMatrix> {
    if sub.chain_len() != gamma.sites() {
        return Err(Error::contract(format!(
            "subinterval of a {}-site chain applied to a {}-site correlation matrix",
            sub.chain_len(),
            gamma.sites()
        )));
    }
    Ok(CorrelationMatrix {
        matrix: gamma
            .matrix
            .submatrix(2 * sub.start, 2 * sub.start, 2 * sub.len, 2 * sub.len),
    })
}

/// Binary entropy `-x log x - (1-x) log(1-x)` with `0 log 0 = 0`.
fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * libm::log(p) } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Entropy from the 2ℓ eigenvalues of a restricted correlation matrix.
///
/// Eigenvalues are sorted and paired head-to-tail as `(ξ, 1-ξ)`; each pair
/// contributes the binary entropy of `ξ` (natural log).
pub fn entropy_from_eigenvalues(values: &[f64]) -> Result<f64> {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if !m.is_multiple_of(2) {
        return Err(Error::contract(
            "correlation spectrum must have even length",
        ));
    }
    for &x in &xs {
        if !(-CLAMP_WINDOW..=1.0 + CLAMP_WINDOW).contains(&x) {
            return Err(Error::Numerical {
                what: "correlation eigenvalue outside [0, 1]",
                residual: if x < 0.0 { -x } else { x - 1.0 },
                tolerance: CLAMP_WINDOW,
            });
        }
    }
    let mut total = 0.0;
    for i in 0..m / 2 {
        let (lo, hi) = (xs[i], xs[m - 1 - i]);
        let mismatch = (lo + hi - 1.0).abs();
        if mismatch > PAIRING_TOL {
            return Err(Error::Numerical {
                what: "(ξ, 1-ξ) pairing of correlation eigenvalues",
                residual: mismatch,
                tolerance: PAIRING_TOL,
            });
        }
        total += binary_entropy(lo.clamp(0.0, 1.0));
    }
    Ok(total)
}

/// `-tr Γ_1 log Γ_1` of a restricted correlation matrix.
pub fn entanglement_entropy(gamma1: &CorrelationMatrix) -> Result<f64> {
    entropy_from_eigenvalues(&gamma1.eigenvalues()?)
}

fn require_projection(gamma: &CorrelationMatrix) -> Result<()> {
    let defect = gamma.projection_defect();
    if defect > PROJECTION_TOL {
        return Err(Error::contract(format!(
            "expected an eigenstate correlation matrix (projection), ‖Γ² - Γ‖_max = {defect:e}"
        )));
    }
    Ok(())
}

fn boundary_block_sum(gamma: &CorrelationMatrix, sub: &SubInterval) -> f64 {
    let mut total = 0.0;
    for j in sub.sites() {
        for k in sub.complement() {
            total += gamma.block_norm(j, k);
        }
    }
    total
}

/// `2 log 2 Σ_{j∈Λ_1} Σ_{k∉Λ_1} ‖Γ_jk‖` for an eigenstate correlation matrix.
pub fn arealaw_upper_bound(gamma: &CorrelationMatrix, sub: &SubInterval) -> Result<f64> {
    require_projection(gamma)?;
    if sub.chain_len() != gamma.sites() {
        return Err(Error::contract(
            "subinterval does not match correlation matrix",
        ));
    }
    Ok(2.0 * LN_2 * boundary_block_sum(gamma, sub))
}

/// The chain of upper bounds on the entanglement of a pure quasi-free state,
/// each term dominating the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundChain {
    /// `-tr Γ_1 log Γ_1`
    pub entropy: f64,
    /// `log 2 · tr (Γ_1 (I - Γ_1))^{1/2}`
    pub sqrt_trace: f64,
    /// `√2 log 2 Σ_{j∈Λ_1} (tr (Γ_1 (I - Γ_1))_jj)^{1/2}`
    pub diagonal: f64,
    /// `2 log 2 Σ_{j∈Λ_1} Σ_{k∉Λ_1} ‖Γ_jk‖`
    pub block_norm: f64,
}

impl BoundChain {
    /// True when `entropy ≤ sqrt_trace ≤ diagonal ≤ block_norm` up to `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.entropy <= self.sqrt_trace + tol
            && self.sqrt_trace <= self.diagonal + tol
            && self.diagonal <= self.block_norm + tol
    }
}

/// Evaluates every step of the entropy bound chain for an eigenstate
/// correlation matrix `gamma` and subchain `sub`.
pub fn entropy_bound_chain(gamma: &CorrelationMatrix, sub: &SubInterval) -> Result<BoundChain> {
    let block_norm = arealaw_upper_bound(gamma, sub)?;
    let g1 = restrict(gamma, sub)?;
    let values = g1.eigenvalues()?;
    let entropy = entropy_from_eigenvalues(&values)?;
    let sqrt_trace = LN_2
        * values
            .iter()
            .map(|&x| {
                let x = x.clamp(0.0, 1.0);
                libm::sqrt(x * (1.0 - x))
            })
            .sum::<f64>();
    let ell = sub.len();
    let g1m = g1.matrix();
    let complement = Mat::identity(2 * ell).sub(g1m);
    let product = g1m.matmul(&complement);
    let diagonal = core::f64::consts::SQRT_2
        * LN_2
        * (0..ell)
            .map(|j| {
                libm::sqrt((product[(2 * j, 2 * j)] + product[(2 * j + 1, 2 * j + 1)]).max(0.0))
            })
            .sum::<f64>();
    Ok(BoundChain {
        entropy,
        sqrt_trace,
        diagonal,
        block_norm,
    })
}

/// `max_{j∈Λ_1} ‖(Γ_1(I-Γ_1))_jj - Σ_{k∉Λ_1} Γ_jk Γ_jkᵗ‖_max`, which vanishes
/// whenever `Γ` is a symmetric projection.
pub fn boundary_identity_residual(gamma: &CorrelationMatrix, sub: &SubInterval) -> Result<f64> {
    let g1 = restrict(gamma, sub)?;
    let ell = sub.len();
    let g1m = g1.matrix();
    let product = g1m.matmul(&Mat::identity(2 * ell).sub(g1m));
    let mut worst: f64 = 0.0;
    for (local, j) in sub.sites().enumerate() {
        let mut rhs = [0.0; 4];
        for k in sub.complement() {
            let [a, b, c, d] = gamma.block(j, k);
            // [[a,b],[c,d]] · [[a,c],[b,d]]
            rhs[0] += a * a + b * b;
            rhs[1] += a * c + b * d;
            rhs[2] += c * a + d * b;
            rhs[3] += c * c + d * d;
        }
        let lhs = [
            product[(2 * local, 2 * local)],
            product[(2 * local, 2 * local + 1)],
            product[(2 * local + 1, 2 * local)],
            product[(2 * local + 1, 2 * local + 1)],
        ];
        for (l, r) in lhs.iter().zip(&rhs) {
            worst = worst.max((l - r).abs());
        }
    }
    Ok(worst)
}

/// How the supremum over eigenstates is explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Every `α ∈ {0,1}^n`; refused when `2^n > limit`.
    Exhaustive { limit: usize },
    /// `count` uniformly random patterns, then single-bit-flip hill climbing
    /// from the best one until no flip improves the entropy.
    Sample { count: usize, seed: u64 },
}

impl SearchStrategy {
    pub fn exhaustive() -> Self {
        SearchStrategy::Exhaustive {
            limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }
}

/// Outcome of [`max_entropy_over_states`].
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySearch {
    /// Largest entanglement entropy found.
    pub max_entropy: f64,
    /// Pattern attaining it.
    pub argmax: OccupationPattern,
    /// `2 log 2 Σ_{j∈Λ_1, k∉Λ_1} Q_jk` with `Q` the sum-bound correlator; this
    /// dominates the entropy of every eigenstate, sampled or not.
    pub rigorous_bound: f64,
    /// Number of entropy evaluations performed.
    pub evaluated: usize,
    /// True when every pattern was visited (`max_entropy` is the true sup).
    pub exhaustive: bool,
}

/// Maximizes the entanglement entropy over eigenstates and reports the
/// correlator bound that dominates every eigenstate.
pub fn max_entropy_over_states(
    decomp: &BogoliubovDecomposition,
    sub: &SubInterval,
    strategy: SearchStrategy,
) -> Result<EntropySearch> {
    let q = correlator_sum_bound(decomp)?;
    max_entropy_with_correlator(decomp, sub, strategy, &q)
}

/// [`max_entropy_over_states`] with a precomputed sum-bound correlator.
pub fn max_entropy_with_correlator(
    decomp: &BogoliubovDecomposition,
    sub: &SubInterval,
    strategy: SearchStrategy,
    q: &CorrelatorMatrix,
) -> Result<EntropySearch> {
    decomp.check_sub(sub)?;
    decomp.require_simple()?;
    let n = decomp.n();
    if q.n() != n {
        return Err(Error::contract(
            "correlator size does not match decomposition",
        ));
    }
    let mut boundary = 0.0;
    for j in sub.sites() {
        for k in sub.complement() {
            boundary += q.get(j, k);
        }
    }
    let rigorous_bound = 2.0 * LN_2 * boundary;
    let builder = RestrictedBuilder::new(decomp, sub);

    match strategy {
        SearchStrategy::Exhaustive { limit } => {
            let size = if n >= usize::BITS as usize - 1 {
                usize::MAX
            } else {
                1usize << n
            };
            if size > limit {
                return Err(Error::TooLarge {
                    what: "exhaustive eigenstate enumeration (use Sample instead)",
                    size,
                    limit,
                });
            }
            let mut best = (f64::NEG_INFINITY, OccupationPattern::vacuum(n));
            for idx in 0..size as u64 {
                let alpha = OccupationPattern::from_index(n, idx);
                let s = entanglement_entropy(&builder.build(&alpha))?;
                if s > best.0 {
                    best = (s, alpha);
                }
            }
            Ok(EntropySearch {
                max_entropy: best.0,
                argmax: best.1,
                rigorous_bound,
                evaluated: size,
                exhaustive: true,
            })
        }
        SearchStrategy::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = (f64::NEG_INFINITY, OccupationPattern::vacuum(n));
            let mut evaluated = 0;
            for _ in 0..count.max(1) {
                let alpha = OccupationPattern::new((0..n).map(|_| rng.gen::<bool>()).collect());
                let s = entanglement_entropy(&builder.build(&alpha))?;
                evaluated += 1;
                if s > best.0 {
                    best = (s, alpha);
                }
            }
            let (value, alpha, steps) = builder.hill_climb(best.1, best.0)?;
            Ok(EntropySearch {
                max_entropy: value,
                argmax: alpha,
                rigorous_bound,
                evaluated: evaluated + steps,
                exhaustive: false,
            })
        }
    }
}

/// Assembles `Γ_1(α) = Σ_k r_k(α) r_k(α)ᵗ` from the columns of `W` that
/// belong to a subchain.
struct RestrictedBuilder {
    dim: usize,
    /// `rows[2k]` / `rows[2k+1]`: restriction of W rows for `+λ_k` / `-λ_k`.
    rows: Vec<Vec<f64>>,
}

const MAX_CLIMB_SWEEPS: usize = 200;
const CLIMB_MIN_GAIN: f64 = 1e-12;

impl RestrictedBuilder {
    fn new(decomp: &BogoliubovDecomposition, sub: &SubInterval) -> Self {
        let lo = 2 * sub.start();
        let dim = 2 * sub.len();
        let rows = (0..2 * decomp.n())
            .map(|r| decomp.w().row(r)[lo..lo + dim].to_vec())
            .collect();
        RestrictedBuilder { dim, rows }
    }

    fn row(&self, k: usize, occupied: bool) -> &[f64] {
        &self.rows[2 * k + usize::from(occupied)]
    }

    fn build(&self, alpha: &OccupationPattern) -> CorrelationMatrix {
        let mut g = Mat::zeros(self.dim, self.dim);
        for (k, &occ) in alpha.bits().iter().enumerate() {
            add_outer(&mut g, self.row(k, occ), 1.0);
        }
        mirror_upper(&mut g);
        CorrelationMatrix { matrix: g }
    }

    /// Γ_1 after flipping mode `k` of a pattern whose matrix is `base`.
    fn flipped(&self, base: &Mat, alpha: &OccupationPattern, k: usize) -> CorrelationMatrix {
        let occ = alpha.get(k);
        let mut g = base.clone();
        add_outer(&mut g, self.row(k, occ), -1.0);
        add_outer(&mut g, self.row(k, !occ), 1.0);
        mirror_upper(&mut g);
        CorrelationMatrix { matrix: g }
    }

    fn hill_climb(
        &self,
        mut alpha: OccupationPattern,
        mut value: f64,
    ) -> Result<(f64, OccupationPattern, usize)> {
        let mut evaluated = 0;
        for _ in 0..MAX_CLIMB_SWEEPS {
            let mut improved = false;
            // rebuild each sweep so rank-two updates never accumulate drift
            let mut base = self.build(&alpha).into_matrix();
            for k in 0..alpha.len() {
                let candidate = self.flipped(&base, &alpha, k);
                let s = entanglement_entropy(&candidate)?;
                evaluated += 1;
                if s > value + CLIMB_MIN_GAIN {
                    value = s;
                    alpha.flip(k);
                    base = candidate.into_matrix();
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        Ok((value, alpha, evaluated))
    }
}

fn mirror_upper(g: &mut Mat) {
    let d = g.rows();
    for i in 0..d {
        for j in i + 1..d {
            g[(j, i)] = g[(i, j)];
        }
    }
}

fn add_outer(g: &mut Mat, r: &[f64], sign: f64) {
    for (i, &ri) in r.iter().enumerate() {
        if ri == 0.0 {
            continue;
        }
        let s = sign * ri;
        // upper triangle only; mirrored afterwards
        let row = &mut g.row_mut(i)[i..];
        for (o, &rj) in row.iter_mut().zip(&r[i..]) {
            *o += s * rj;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingSpec, DisorderEnsemble};
    use alloc::vec;

    fn random_params(n: usize, gamma: f64, seed: u64) -> ChainParams {
        let e = DisorderEnsemble::new(
            CouplingSpec::Uniform { lo: 0.5, hi: 1.5 },
            CouplingSpec::Constant(gamma),
            CouplingSpec::Uniform { lo: -2.0, hi: 2.0 },
            seed,
        )
        .unwrap();
        e.sample(n, 0).unwrap()
    }

    #[test]
    fn decoupled_chain_lambdas_are_field_magnitudes() {
        let p = ChainParams::new(vec![0.0; 3], vec![0.3; 3], vec![2.0, -0.5, 1.0, -3.0]).unwrap();
        let d = decompose_params(&p).unwrap();
        assert_eq!(d.lambdas(), &[0.5, 1.0, 2.0, 3.0]);
        assert!((d.min_gap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clean_three_site_chain_is_degenerate() {
        // A = tridiag(1, 0, 1) has eigenvalues 0, ±√2
        let p = ChainParams::uniform(3, 1.0, 0.0, 0.0).unwrap();
        let d = decompose_params(&p).unwrap();
        let l = d.lambdas();
        assert!(l[0].abs() < 1e-12);
        assert!((l[1] - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((l[2] - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(d.min_gap() < 1e-12);
        assert!(!d.has_simple_spectrum());
        assert!(matches!(
            d.correlation_matrix(&OccupationPattern::vacuum(3)),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn clean_four_site_chain_fails_gap_check() {
        let p = ChainParams::uniform(4, 1.0, 0.0, 0.0).unwrap();
        assert!(!decompose_params(&p).unwrap().has_simple_spectrum());
    }

    #[test]
    fn simple_spectrum_threshold() {
        let p = ChainParams::new(vec![0.0; 2], vec![0.0; 2], vec![1.0, 2.0, 3.0]).unwrap();
        let d = decompose_params(&p).unwrap();
        assert!(check_simple_spectrum(&d, d.default_gap_threshold()));
        let p = ChainParams::new(vec![0.0; 2], vec![0.0; 2], vec![1.0, 2.0, -2.0]).unwrap();
        assert!(!decompose_params(&p).unwrap().has_simple_spectrum());
    }

    #[test]
    fn random_instances_satisfy_bogoliubov_invariants() {
        for (seed, gamma) in [(1, 0.0), (2, 0.5), (3, -1.3), (4, 0.9)] {
            let p = random_params(8, gamma, seed);
            let m = build_m(&p);
            let d = bogoliubov_decompose(&m).unwrap();
            let r = bogoliubov_residuals(d.w(), &m.matrix, d.lambdas());
            assert!(r.orthogonality <= 1e-12);
            assert!(r.symplectic <= 1e-12);
            assert!(r.diagonalization <= 1e-12 * m.matrix.max_abs().max(1.0));
        }
    }

    #[test]
    fn corrupted_w_fails_symplectic_check() {
        let p = random_params(5, 0.6, 9);
        let m = build_m(&p);
        let d = bogoliubov_decompose(&m).unwrap();
        let mut w = d.w().clone();
        // negate one entry
        w[(0, 1)] = -w[(0, 1)];
        let r = bogoliubov_residuals(&w, &m.matrix, d.lambdas());
        assert!(matches!(
            r.check(m.matrix.max_abs()),
            Err(Error::Numerical { .. })
        ));
        assert!(r.symplectic > 1e-6 || r.orthogonality > 1e-6);
    }

    #[test]
    fn many_body_energy_extremes() {
        let d = decompose_params(&random_params(6, 0.4, 5)).unwrap();
        let sum: f64 = d.lambdas().iter().sum();
        assert!((d.many_body_energy(&OccupationPattern::vacuum(6)) + sum).abs() < 1e-14);
        let full = OccupationPattern::vacuum(6).complement();
        assert!((d.many_body_energy(&full) - sum).abs() < 1e-14);
    }

    #[test]
    fn correlation_matrices_are_rank_n_projections() {
        let d = decompose_params(&random_params(6, 0.7, 6)).unwrap();
        for idx in [0u64, 1, 17, 42, 63] {
            let alpha = OccupationPattern::from_index(6, idx);
            let g = d.correlation_matrix(&alpha).unwrap();
            assert!(g.projection_defect() <= 1e-9);
            assert!((g.trace() - 6.0).abs() < 1e-10);
            let flipped = d.correlation_matrix(&alpha.complement()).unwrap();
            assert!(
                g.matrix()
                    .add(flipped.matrix())
                    .max_abs_diff(&Mat::identity(12))
                    <= 1e-9
            );
        }
    }

    #[test]
    fn particle_hole_block_structure() {
        let d = decompose_params(&random_params(5, -0.8, 7)).unwrap();
        let g = d
            .correlation_matrix(&OccupationPattern::from_index(5, 13))
            .unwrap();
        let t = conjugate_by_p(g.matrix())
            .sub(&Mat::identity(10).scale(0.5))
            .scale(2.0);
        let x = t.submatrix(0, 0, 5, 5);
        let y = t.submatrix(0, 5, 5, 5);
        assert!(x.asymmetry() < 1e-12);
        assert!(y.antisymmetry_defect() < 1e-12);
        assert!(t.submatrix(5, 0, 5, 5).add(&y).max_abs() < 1e-12);
        assert!(t.submatrix(5, 5, 5, 5).add(&x).max_abs() < 1e-12);
    }

    #[test]
    fn decoupled_chain_correlations_are_site_local() {
        let p = ChainParams::new(vec![0.0; 2], vec![0.0; 2], vec![1.0, -2.0, 3.0]).unwrap();
        let d = decompose_params(&p).unwrap();
        let alpha = OccupationPattern::new(vec![true, false, true]);
        let g = d.correlation_matrix(&alpha).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert_eq!(g.block_norm(j, k), 0.0);
                }
            }
            let [a, b, c, dd] = g.block(j, j);
            assert_eq!((b, c), (0.0, 0.0));
            assert!((a + dd - 1.0).abs() < 1e-15 && a * dd == 0.0);
        }
        let sub = SubInterval::new(1, 2, 3).unwrap();
        assert_eq!(arealaw_upper_bound(&g, &sub).unwrap(), 0.0);
        assert_eq!(
            entanglement_entropy(&restrict(&g, &sub).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn restrict_edge_cases() {
        let d = decompose_params(&random_params(4, 0.3, 8)).unwrap();
        let g = d
            .correlation_matrix(&OccupationPattern::from_index(4, 5))
            .unwrap();
        assert_eq!(restrict(&g, &SubInterval::full(4)).unwrap(), g);
        let one = restrict(&g, &SubInterval::new(2, 1, 4).unwrap()).unwrap();
        let ev = one.eigenvalues().unwrap();
        assert!((ev[0] + ev[1] - 1.0).abs() < 1e-12);
        assert!(SubInterval::new(3, 2, 4).is_err());
        assert!(SubInterval::new(0, 0, 4).is_err());
        assert!(restrict(&g, &SubInterval::new(0, 2, 5).unwrap()).is_err());
        let fast = d
            .restricted_correlation(
                &OccupationPattern::from_index(4, 5),
                &SubInterval::new(1, 2, 4).unwrap(),
            )
            .unwrap();
        let slow = restrict(&g, &SubInterval::new(1, 2, 4).unwrap()).unwrap();
        assert!(fast.matrix().max_abs_diff(slow.matrix()) < 1e-12);
    }

    #[test]
    fn entropy_of_pure_and_maximally_mixed() {
        let pure = CorrelationMatrix::new(Mat::from_diag(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(entanglement_entropy(&pure).unwrap(), 0.0);
        let mixed = CorrelationMatrix::new(Mat::identity(2).scale(0.5)).unwrap();
        assert!((entanglement_entropy(&mixed).unwrap() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_broken_spectra() {
        assert!(entropy_from_eigenvalues(&[-1e-6, 1.0 + 1e-6]).is_err());
        assert!(entropy_from_eigenvalues(&[0.2, 0.3]).is_err());
        // roundoff inside the clamp window is tolerated
        assert_eq!(
            entropy_from_eigenvalues(&[-1e-10, 1.0 + 1e-10]).unwrap(),
            0.0
        );
    }

    #[test]
    fn bound_chain_and_boundary_identity() {
        let d = decompose_params(&random_params(8, 0.5, 10)).unwrap();
        let sub = SubInterval::new(2, 3, 8).unwrap();
        for idx in [0u64, 7, 100, 255] {
            let g = d
                .correlation_matrix(&OccupationPattern::from_index(8, idx))
                .unwrap();
            assert!(boundary_identity_residual(&g, &sub).unwrap() <= 1e-9);
            let chain = entropy_bound_chain(&g, &sub).unwrap();
            assert!(chain.is_monotone(1e-12), "{chain:?}");
            assert!(chain.entropy <= 3.0 * LN_2 + 1e-12);
        }
        let not_projection = CorrelationMatrix::new(Mat::identity(16).scale(0.5)).unwrap();
        assert!(matches!(
            arealaw_upper_bound(&not_projection, &sub),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn complementary_subchains_have_equal_entropy() {
        let d = decompose_params(&random_params(7, 0.6, 11)).unwrap();
        let alpha = OccupationPattern::from_index(7, 77);
        let g = d.correlation_matrix(&alpha).unwrap();
        let left = SubInterval::new(0, 3, 7).unwrap();
        let right = left.connected_complement().unwrap();
        let a = entanglement_entropy(&restrict(&g, &left).unwrap()).unwrap();
        let b = entanglement_entropy(&restrict(&g, &right).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn exhaustive_search_refuses_beyond_limit() {
        let d = decompose_params(&random_params(13, 0.2, 12)).unwrap();
        let sub = SubInterval::centered(4, 13).unwrap();
        assert!(matches!(
            max_entropy_over_states(&d, &sub, SearchStrategy::exhaustive()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn sampled_search_never_beats_exhaustive() {
        let d = decompose_params(&random_params(10, 0.0, 13)).unwrap();
        let sub = SubInterval::new(0, 5, 10).unwrap();
        let full = max_entropy_over_states(&d, &sub, SearchStrategy::exhaustive()).unwrap();
        assert!(full.exhaustive && full.evaluated == 1024);
        assert!(full.max_entropy <= full.rigorous_bound);
        let sampled = max_entropy_over_states(
            &d,
            &sub,
            SearchStrategy::Sample {
                count: 256,
                seed: 1,
            },
        )
        .unwrap();
        assert!(sampled.max_entropy <= full.max_entropy + 1e-12);
        assert_eq!(sampled.rigorous_bound, full.rigorous_bound);
    }

    #[test]
    fn subinterval_helpers() {
        let s = SubInterval::centered(4, 10).unwrap();
        assert_eq!((s.start(), s.r(), s.len()), (3, 4, 4));
        assert_eq!(s.matrix_indices(), (6..14).collect::<Vec<_>>());
        assert_eq!(s.complement().count(), 6);
        assert!(s.connected_complement().is_none());
        assert_eq!(
            SubInterval::from_one_based(1, 3, 5)
                .unwrap()
                .connected_complement(),
            Some(SubInterval::new(3, 2, 5).unwrap())
        );
    }

    #[test]
    fn pattern_index_round_trip() {
        let a = OccupationPattern::from_index(6, 0b101101);
        assert_eq!(a.index(), 0b101101);
        assert_eq!(alloc::format!("{a:?}"), "101101");
    }
}
