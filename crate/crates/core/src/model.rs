//! Chain parameters, disorder ensembles and the effective one-particle
//! Hamiltonian `M`.

use alloc::format;
use alloc::vec::Vec;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Mat;
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Default bound `C` on `sup_j |μ_j| + |γ_j| + |ν_j|`.
pub const DEFAULT_COUPLING_BOUND: f64 = 100.0;

/// Couplings of an open `n`-site XY chain.
///
/// `mu[j]` and `gamma[j]` couple sites `j` and `j+1` (zero-based), `nu[j]` is
/// the transversal field at site `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    mu: Vec<f64>,
    gamma: Vec<f64>,
    nu: Vec<f64>,
}

impl ChainParams {
    pub fn new(mu: Vec<f64>, gamma: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        Self::with_bound(mu, gamma, nu, DEFAULT_COUPLING_BOUND)
    }

    /// Validates lengths, finiteness and `|μ_j| + |γ_j| + |ν_j| ≤ bound`.
    pub fn with_bound(mu: Vec<f64>, gamma: Vec<f64>, nu: Vec<f64>, bound: f64) -> Result<Self> {
        let n = nu.len();
        if n == 0 {
            return Err(Error::config("chain needs at least one site"));
        }
        if mu.len() != n - 1 || gamma.len() != n - 1 {
            return Err(Error::config(format!(
                "n = {n} sites needs {} couplings, got mu: {}, gamma: {}",
                n - 1,
                mu.len(),
                gamma.len()
            )));
        }
        if mu.iter().chain(&gamma).chain(&nu).any(|x| !x.is_finite()) {
            return Err(Error::config("chain parameters must be finite"));
        }
        for j in 0..n {
            let bond = |v: &[f64]| if j + 1 < n { v[j].abs() } else { 0.0 };
            let s = bond(&mu) + bond(&gamma) + nu[j].abs();
            if s > bound {
                return Err(Error::config(format!(
                    "|mu| + |gamma| + |nu| = {s} at site {j} exceeds bound {bound}"
                )));
            }
        }
        Ok(ChainParams { mu, gamma, nu })
    }

    /// Uniform couplings on `n` sites.
    pub fn uniform(n: usize, mu: f64, gamma: f64, nu: f64) -> Result<Self> {
        let bonds = n.saturating_sub(1);
        Self::new(
            alloc::vec![mu; bonds],
            alloc::vec![gamma; bonds],
            alloc::vec![nu; n],
        )
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Stable 64-bit digest of the exact parameter bit patterns.
    pub fn digest(&self) -> u64 {
        let mut h = crate::seed::mix64(self.n() as u64);
        for x in self.mu.iter().chain(&self.gamma).chain(&self.nu) {
            h = crate::seed::mix64(h ^ x.to_bits());
        }
        h
    }
}

/// How one family of couplings is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSpec {
    Constant(f64),
    /// i.i.d. uniform on `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl CouplingSpec {
    fn validate(&self, name: &str) -> Result<()> {
        match *self {
            CouplingSpec::Constant(v) if !v.is_finite() => {
                Err(Error::config(format!("{name}: constant must be finite")))
            }
            CouplingSpec::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(Error::config(format!(
                    "{name}: uniform distribution needs finite lo < hi, got [{lo}, {hi})"
                )))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            CouplingSpec::Constant(v) => alloc::vec![v; len],
            CouplingSpec::Uniform { lo, hi } => {
                let dist = Uniform::new(lo, hi);
                (0..len).map(|_| dist.sample(rng)).collect()
            }
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, CouplingSpec::Uniform { .. })
    }
}

/// Disorder distribution of `(μ_j, γ_j, ν_j)` plus the master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderEnsemble {
    pub mu: CouplingSpec,
    pub gamma: CouplingSpec,
    pub nu: CouplingSpec,
    pub master_seed: u64,
    pub bound: f64,
}

impl DisorderEnsemble {
    pub fn new(
        mu: CouplingSpec,
        gamma: CouplingSpec,
        nu: CouplingSpec,
        master_seed: u64,
    ) -> Result<Self> {
        let e = DisorderEnsemble {
            mu,
            gamma,
            nu,
            master_seed,
            bound: DEFAULT_COUPLING_BOUND,
        };
        e.validate()?;
        Ok(e)
    }

    /// Isotropic chain (`γ ≡ 0`) with constant hopping and the given field law.
    pub fn isotropic(mu: f64, nu: CouplingSpec, master_seed: u64) -> Result<Self> {
        Self::new(
            CouplingSpec::Constant(mu),
            CouplingSpec::Constant(0.0),
            nu,
            master_seed,
        )
    }

    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        self.bound = bound;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.mu.validate("mu")?;
        self.gamma.validate("gamma")?;
        self.nu.validate("nu")?;
        if !(self.bound.is_finite() && self.bound > 0.0) {
            return Err(Error::config("coupling bound must be positive and finite"));
        }
        Ok(())
    }

    /// True when every realization is the same chain.
    pub fn is_deterministic(&self) -> bool {
        !(self.mu.is_random() || self.gamma.is_random() || self.nu.is_random())
    }

    /// Parameters of realization `index`; see [`DisorderEnsemble::sample_attempt`].
    pub fn sample(&self, n: usize, index: u64) -> Result<ChainParams> {
        self.sample_attempt(n, index, 0)
    }

    /// Parameters of realization `index` after `attempt` resamples. A pure
    /// function of `(master_seed, index, attempt)`: μ, γ, ν are drawn in that
    /// order from a ChaCha8 stream seeded by [`derive_seed`].
    pub fn sample_attempt(&self, n: usize, index: u64, attempt: u64) -> Result<ChainParams> {
        self.validate()?;
        if n == 0 {
            return Err(Error::config("chain needs at least one site"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.master_seed, index, attempt));
        let mu = self.mu.sample(n - 1, &mut rng);
        let gamma = self.gamma.sample(n - 1, &mut rng);
        let nu = self.nu.sample(n, &mut rng);
        ChainParams::with_bound(mu, gamma, nu, self.bound)
    }
}

/// Free function form of [`DisorderEnsemble::sample`].
pub fn sample_params(ensemble: &DisorderEnsemble, n: usize, index: u64) -> Result<ChainParams> {
    ensemble.sample(n, index)
}

/// The real symmetric 2n×2n block Jacobi matrix `M` with `H = C* M C`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: Mat,
    pub n: usize,
}

impl EffectiveHamiltonian {
    /// 2×2 block `(j, k)` as `[m00, m01, m10, m11]`.
    pub fn block(&self, j: usize, k: usize) -> [f64; 4] {
        let m = &self.matrix;
        [
            m[(2 * j, 2 * k)],
            m[(2 * j, 2 * k + 1)],
            m[(2 * j + 1, 2 * k)],
            m[(2 * j + 1, 2 * k + 1)],
        ]
    }
}

/// Assembles `M`: diagonal blocks `-ν_j σᶻ`, super-diagonal blocks
/// `μ_j S(γ_j)` with `S(γ) = [[1, γ], [-γ, -1]]`, sub-diagonal blocks their
/// transposes.
pub fn build_m(params: &ChainParams) -> EffectiveHamiltonian {
    let n = params.n();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (j, &nu) in params.nu().iter().enumerate() {
        m[(2 * j, 2 * j)] = -nu;
        m[(2 * j + 1, 2 * j + 1)] = nu;
    }
    for j in 0..n - 1 {
        let mu = params.mu()[j];
        let g = params.gamma()[j];
        let s = [[mu, mu * g], [-mu * g, -mu]];
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * j + a, 2 * (j + 1) + b)] = s[a][b];
                m[(2 * (j + 1) + b, 2 * j + a)] = s[a][b];
            }
        }
    }
    EffectiveHamiltonian { matrix: m, n }
}

/// `(A, B)` with `A` symmetric tridiagonal (diagonal `-ν_j`, off-diagonal `μ_j`)
/// and `B` antisymmetric (super-diagonal `γ_j μ_j`).
pub fn build_blocks(params: &ChainParams) -> (Mat, Mat) {
    let n = params.n();
    let mut a = Mat::zeros(n, n);
    let mut b = Mat::zeros(n, n);
    for (j, &nu) in params.nu().iter().enumerate() {
        a[(j, j)] = -nu;
    }
    for j in 0..n - 1 {
        let mu = params.mu()[j];
        let gm = params.gamma()[j] * mu;
        a[(j, j + 1)] = mu;
        a[(j + 1, j)] = mu;
        b[(j, j + 1)] = gm;
        b[(j + 1, j)] = -gm;
    }
    (a, b)
}

/// The permutation `P` with `P e_{2j-1} = e_j`, `P e_{2j} = e_{n+j}`
/// (one-based), returned zero-based as `perm[a] = P(a)`.
///
/// Conjugation `P M Pᵗ` moves the interleaved `(c_1, c_1*, ..., c_n, c_n*)`
/// ordering to `(c_1, ..., c_n, c_1*, ..., c_n*)`.
pub fn permutation_p(n: usize) -> Vec<usize> {
    (0..2 * n)
        .map(|a| if a % 2 == 0 { a / 2 } else { n + a / 2 })
        .collect()
}

/// `P` as a 0/1 matrix, `P[perm[a], a] = 1`.
pub fn permutation_matrix(n: usize) -> Mat {
    let perm = permutation_p(n);
    let mut p = Mat::zeros(2 * n, 2 * n);
    for (a, &pa) in perm.iter().enumerate() {
        p[(pa, a)] = 1.0;
    }
    p
}

/// `P X Pᵗ` by index permutation (exact).
pub fn conjugate_by_p(x: &Mat) -> Mat {
    let n = x.rows() / 2;
    let perm = permutation_p(n);
    let mut out = Mat::zeros(2 * n, 2 * n);
    for a in 0..2 * n {
        for b in 0..2 * n {
            out[(perm[a], perm[b])] = x[(a, b)];
        }
    }
    out
}

/// `Pᵗ X P` by index permutation (exact).
pub fn conjugate_by_pt(x: &Mat) -> Mat {
    let n = x.rows() / 2;
    let perm = permutation_p(n);
    Mat::from_fn(2 * n, 2 * n, |a, b| x[(perm[a], perm[b])])
}
