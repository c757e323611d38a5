//! Eigenfunction correlators of `M` and fits of their spatial decay.
//!
//! For a rank-one eigenprojection `P_i = w_i w_iᵗ` of `M` the 2×2 block
//! `(P_i)_{jk}` is itself rank one with norm `a_ij a_ik`, where `a_ij` is the
//! Euclidean norm of the site-`j` pair of components of `w_i`. Any bounded
//! spectral function `g(M) = Σ_i g(λ_i) P_i` with `|g| ≤ 1` therefore obeys
//!
//! ```text
//! ‖g(M)_{jk}‖ ≤ Q_{jk} := Σ_i a_ij a_ik
//! ```
//!
//! which is the `SumBound` correlator. `SignSup` maximizes over `g = ±1` on
//! every eigenvalue exactly, and `ProjectionSup` maximizes over the spectral
//! projections `χ_{Δ_α}(M)` that appear as eigenstate correlation matrices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::freefermion::{BogoliubovDecomposition, OccupationPattern};
use crate::linalg::{norm2x2, Mat};
use crate::model::DisorderEnsemble;
use crate::{Error, Result};

/// Default cap on `2n` for sign-vector enumeration.
pub const DEFAULT_SIGN_LIMIT: usize = 20;
/// Values below this are floored before taking logarithms.
pub const FIT_FLOOR: f64 = 1e-16;
/// Minimum number of distances in a fit window.
pub const MIN_FIT_POINTS: usize = 6;
/// Resamples allowed per realization before the ensemble is declared
/// pathological.
pub const MAX_RESAMPLES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelatorKind {
    SumBound,
    SignSup,
    ProjectionSup,
}

/// Nonnegative symmetric n×n correlator `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorMatrix {
    q: Mat,
    kind: CorrelatorKind,
}

impl CorrelatorMatrix {
    pub fn new(q: Mat, kind: CorrelatorKind) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::contract("correlator must be square"));
        }
        if q.as_slice().iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::contract("correlator entries must be nonnegative"));
        }
        if q.asymmetry() > 1e-10 * q.max_abs().max(1.0) {
            return Err(Error::contract("correlator must be symmetric"));
        }
        Ok(CorrelatorMatrix { q, kind })
    }

    pub fn n(&self) -> usize {
        self.q.rows()
    }

    pub fn kind(&self) -> CorrelatorKind {
        self.kind
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.q[(j, k)]
    }

    pub fn matrix(&self) -> &Mat {
        &self.q
    }

    /// Mean of `Q_{jk}` over pairs with `|j-k| = d`, for `d = 0..n`.
    pub fn distance_profile(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|d| (0..n - d).map(|j| self.q[(j, j + d)]).sum::<f64>() / (n - d) as f64)
            .collect()
    }

    /// True when `self ≥ other` entrywise up to `tol`.
    pub fn dominates(&self, other: &CorrelatorMatrix, tol: f64) -> bool {
        self.n() == other.n()
            && self
                .q
                .as_slice()
                .iter()
                .zip(other.q.as_slice())
                .all(|(a, b)| *a + tol >= *b)
    }
}

/// `a[i][j]`: norm of the site-`j` components of eigenvector `i` of `M`.
fn site_weights(decomp: &BogoliubovDecomposition) -> Mat {
    let n = decomp.n();
    let w = decomp.w();
    Mat::from_fn(2 * n, n, |i, j| {
        let (x, y) = (w[(i, 2 * j)], w[(i, 2 * j + 1)]);
        libm::hypot(x, y)
    })
}

/// `Q_{jk} = Σ_i ‖(P_i)_{jk}‖` over the 2n rank-one eigenprojections of `M`.
pub fn correlator_sum_bound(decomp: &BogoliubovDecomposition) -> Result<CorrelatorMatrix> {
    decomp.require_simple()?;
    let a = site_weights(decomp);
    let mut q = a.tr_matmul(&a);
    let n = q.rows();
    for j in 0..n {
        for k in j + 1..n {
            let s = 0.5 * (q[(j, k)] + q[(k, j)]);
            q[(j, k)] = s;
            q[(k, j)] = s;
        }
    }
    Ok(CorrelatorMatrix {
        q,
        kind: CorrelatorKind::SumBound,
    })
}

fn projection_block(w: &Mat, i: usize, j: usize, k: usize) -> [f64; 4] {
    let (x0, x1) = (w[(i, 2 * j)], w[(i, 2 * j + 1)]);
    let (y0, y1) = (w[(i, 2 * k)], w[(i, 2 * k + 1)]);
    [x0 * y0, x0 * y1, x1 * y0, x1 * y1]
}

/// `max_{s ∈ {±1}^{2n}} ‖Σ_i s_i (P_i)_{jk}‖`, by Gray-code enumeration with
/// `s_1 = +1` fixed (the norm is invariant under a global sign).
pub fn correlator_sign_sup(
    decomp: &BogoliubovDecomposition,
    j: usize,
    k: usize,
    n_limit: usize,
) -> Result<f64> {
    decomp.require_simple()?;
    let n = decomp.n();
    let dim = 2 * n;
    if dim > n_limit || dim > 40 {
        return Err(Error::TooLarge {
            what: "sign-vector enumeration (2n)",
            size: dim,
            limit: n_limit.min(40),
        });
    }
    if j >= n || k >= n {
        return Err(Error::contract(format!(
            "site pair ({j}, {k}) outside {n} sites"
        )));
    }
    let w = decomp.w();
    let blocks: Vec<[f64; 4]> = (0..dim).map(|i| projection_block(w, i, j, k)).collect();
    let mut signs = vec![1.0f64; dim];
    let mut acc = [0.0; 4];
    for b in &blocks {
        for t in 0..4 {
            acc[t] += b[t];
        }
    }
    let mut best = norm2x2(acc[0], acc[1], acc[2], acc[3]);
    let free = dim - 1;
    let total: u64 = 1 << free;
    for step in 1..total {
        // Gray code: flip the bit at the lowest set position of `step`
        let i = 1 + step.trailing_zeros() as usize;
        signs[i] = -signs[i];
        let b = &blocks[i];
        for t in 0..4 {
            acc[t] += 2.0 * signs[i] * b[t];
        }
        if step % 4096 == 0 {
            acc = [0.0; 4];
            for (s, b) in signs.iter().zip(&blocks) {
                for t in 0..4 {
                    acc[t] += s * b[t];
                }
            }
        }
        best = best.max(norm2x2(acc[0], acc[1], acc[2], acc[3]));
    }
    Ok(best)
}

/// Full `SignSup` correlator matrix.
pub fn correlator_sign_sup_matrix(
    decomp: &BogoliubovDecomposition,
    n_limit: usize,
) -> Result<CorrelatorMatrix> {
    let n = decomp.n();
    let mut q = Mat::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = correlator_sign_sup(decomp, j, k, n_limit)?;
            q[(j, k)] = v;
            q[(k, j)] = v;
        }
    }
    Ok(CorrelatorMatrix {
        q,
        kind: CorrelatorKind::SignSup,
    })
}

/// `max_α ‖χ_{Δ_α}(M)_{jk}‖` over all `2^n` patterns (refused when
/// `2^n > limit`).
pub fn correlator_projection_sup(
    decomp: &BogoliubovDecomposition,
    limit: usize,
) -> Result<CorrelatorMatrix> {
    let n = decomp.n();
    let size = if n >= 63 { u64::MAX } else { 1u64 << n };
    if size > limit as u64 {
        return Err(Error::TooLarge {
            what: "projection enumeration (2^n)",
            size: size.min(usize::MAX as u64) as usize,
            limit,
        });
    }
    let mut q = Mat::zeros(n, n);
    for idx in 0..size {
        let g = decomp.correlation_matrix(&OccupationPattern::from_index(n, idx))?;
        for j in 0..n {
            for k in j..n {
                let v = g.block_norm(j, k);
                if v > q[(j, k)] {
                    q[(j, k)] = v;
                    q[(k, j)] = v;
                }
            }
        }
    }
    Ok(CorrelatorMatrix {
        q,
        kind: CorrelatorKind::ProjectionSup,
    })
}

/// Block norms of `χ_{(0,∞)}(M)`, the ground-state correlation matrix.
pub fn positive_projection_norms(decomp: &BogoliubovDecomposition) -> Result<Mat> {
    let n = decomp.n();
    let g = decomp.correlation_matrix(&OccupationPattern::vacuum(n))?;
    Ok(Mat::from_fn(n, n, |j, k| g.block_norm(j, k)))
}

/// Disorder-averaged correlator profile `q(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub d: Vec<usize>,
    pub q_mean: Vec<f64>,
    /// Standard error of the mean across realizations (0 for one realization).
    pub q_stderr: Vec<f64>,
    /// Number of `(j, k)` pairs with `j ≤ k`, `|j-k| = d`, summed over realizations.
    pub n_pairs: Vec<usize>,
}

impl DecayProfile {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Profile with the given means and no error information.
    pub fn from_values(q: &[f64]) -> Self {
        DecayProfile {
            d: (0..q.len()).collect(),
            q_mean: q.to_vec(),
            q_stderr: vec![0.0; q.len()],
            n_pairs: vec![1; q.len()],
        }
    }
}

/// Result of [`ensemble_correlator`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCorrelator {
    pub mean: CorrelatorMatrix,
    pub profile: DecayProfile,
    pub realizations: usize,
    /// Total number of resamples triggered by the gap check.
    pub resampled: u64,
}

/// Decomposes realization `index` of `ensemble` at size `n`, resampling until
/// the one-particle spectrum is simple. Returns the decomposition and the
/// number of resamples used.
pub fn sample_simple(
    ensemble: &DisorderEnsemble,
    n: usize,
    index: u64,
) -> Result<(BogoliubovDecomposition, u64)> {
    let mut last_gap = 0.0;
    let mut last_threshold = 0.0;
    for attempt in 0..=MAX_RESAMPLES {
        let params = ensemble.sample_attempt(n, index, attempt)?;
        let decomp = crate::freefermion::decompose_params(&params)?;
        if decomp.has_simple_spectrum() {
            return Ok((decomp, attempt));
        }
        last_gap = decomp.min_gap();
        last_threshold = decomp.default_gap_threshold();
        if ensemble.is_deterministic() {
            break;
        }
    }
    Err(Error::Degenerate {
        min_gap: last_gap,
        threshold: last_threshold,
    })
}

/// Sum-bound correlator of one realization, with its resample count.
pub fn realization_correlator(
    ensemble: &DisorderEnsemble,
    n: usize,
    index: u64,
) -> Result<(CorrelatorMatrix, u64)> {
    let (decomp, attempts) = sample_simple(ensemble, n, index)?;
    Ok((correlator_sum_bound(&decomp)?, attempts))
}

/// Averages per-realization correlators, in the given order, into a mean
/// matrix and a distance profile.
pub fn aggregate_correlators(
    samples: &[CorrelatorMatrix],
    resampled: u64,
) -> Result<EnsembleCorrelator> {
    let first = samples
        .first()
        .ok_or_else(|| Error::contract("no realizations to aggregate"))?;
    let n = first.n();
    let r = samples.len();
    let mut mean = Mat::zeros(n, n);
    let mut profiles = Vec::with_capacity(r);
    for s in samples {
        if s.n() != n {
            return Err(Error::contract("realizations of different sizes"));
        }
        mean = mean.add(&s.q);
        profiles.push(s.distance_profile());
    }
    let mean = mean.scale(1.0 / r as f64);
    let rf = r as f64;
    let q_mean: Vec<f64> = (0..n)
        .map(|d| profiles.iter().map(|p| p[d]).sum::<f64>() / rf)
        .collect();
    let q_stderr = (0..n)
        .map(|d| {
            if r < 2 {
                return 0.0;
            }
            let var = profiles
                .iter()
                .map(|p| (p[d] - q_mean[d]) * (p[d] - q_mean[d]))
                .sum::<f64>()
                / (rf - 1.0);
            libm::sqrt(var / rf)
        })
        .collect();
    Ok(EnsembleCorrelator {
        mean: CorrelatorMatrix {
            q: mean,
            kind: first.kind,
        },
        profile: DecayProfile {
            d: (0..n).collect(),
            q_mean,
            q_stderr,
            n_pairs: (0..n).map(|d| (n - d) * r).collect(),
        },
        realizations: r,
        resampled,
    })
}

/// Sequential ensemble average of the sum-bound correlator over realizations
/// `0..realizations`.
pub fn ensemble_correlator(
    ensemble: &DisorderEnsemble,
    n: usize,
    realizations: usize,
) -> Result<EnsembleCorrelator> {
    if realizations == 0 {
        return Err(Error::config("realizations must be >= 1"));
    }
    let mut samples = Vec::with_capacity(realizations);
    let mut resampled = 0;
    for index in 0..realizations as u64 {
        let (q, attempts) = realization_correlator(ensemble, n, index)?;
        resampled += attempts;
        samples.push(q);
    }
    aggregate_correlators(&samples, resampled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecayModelKind {
    Exponential,
    Stretched,
    PowerLaw,
}

impl DecayModelKind {
    pub const ALL: [DecayModelKind; 3] = [
        DecayModelKind::Exponential,
        DecayModelKind::Stretched,
        DecayModelKind::PowerLaw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecayModelKind::Exponential => "exponential",
            DecayModelKind::Stretched => "stretched",
            DecayModelKind::PowerLaw => "power_law",
        }
    }

    fn param_count(self) -> usize {
        match self {
            DecayModelKind::Stretched => 3,
            _ => 2,
        }
    }
}

/// Fitted decay law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayModel {
    /// `C e^{-η d}`
    Exponential { c: f64, eta: f64 },
    /// `C e^{-η d^ξ}`
    Stretched { c: f64, eta: f64, xi: f64 },
    /// `C / (1 + d^β)`
    PowerLaw { c: f64, beta: f64 },
}

impl DecayModel {
    pub fn kind(&self) -> DecayModelKind {
        match self {
            DecayModel::Exponential { .. } => DecayModelKind::Exponential,
            DecayModel::Stretched { .. } => DecayModelKind::Stretched,
            DecayModel::PowerLaw { .. } => DecayModelKind::PowerLaw,
        }
    }

    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            DecayModel::Exponential { c, eta } => c * libm::exp(-eta * d),
            DecayModel::Stretched { c, eta, xi } => c * libm::exp(-eta * libm::pow(d, xi)),
            DecayModel::PowerLaw { c, beta } => c / (1.0 + libm::pow(d, beta)),
        }
    }
}

/// A fitted model with uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Root-mean-square residual of the log-space fit.
    pub residual: f64,
    /// Inclusive distance window used.
    pub fit_range: (usize, usize),
    pub points: usize,
    /// Standard error of the decay rate (`η` or `β`).
    pub rate_stderr: f64,
    /// Lower edge of the two-sided 95% confidence interval of the rate.
    pub rate_lower_95: f64,
}

impl DecayFit {
    /// Decay rate: `η` for exponential/stretched, `β` for power law.
    pub fn rate(&self) -> f64 {
        match self.model {
            DecayModel::Exponential { eta, .. } | DecayModel::Stretched { eta, .. } => eta,
            DecayModel::PowerLaw { beta, .. } => beta,
        }
    }

    /// Rate positive at the lower 95% confidence edge.
    pub fn localized(&self) -> bool {
        self.residual.is_finite() && self.rate_lower_95 > 0.0
    }

    /// Power law with `β > 2` at the lower 95% confidence edge.
    pub fn beta_exceeds_two(&self) -> bool {
        matches!(self.model, DecayModel::PowerLaw { .. })
            && self.residual.is_finite()
            && self.rate_lower_95 > 2.0
    }
}

/// Two-sided 95% Student-t critical value.
pub fn t_critical_95(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
        2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
        2.052, 2.048, 2.045, 2.042,
    ];
    match df {
        0 => f64::INFINITY,
        1..=30 => TABLE[df - 1],
        31..=40 => 2.021,
        41..=60 => 2.000,
        61..=120 => 1.980,
        _ => 1.960,
    }
}

/// Default fit window `[3, n/2]` for a profile over `d = 0..n`.
pub fn default_fit_range(profile: &DecayProfile) -> (usize, usize) {
    let n = profile.d.iter().max().map_or(0, |&m| m + 1);
    (3, n / 2)
}

struct LinFit {
    intercept: f64,
    slope: f64,
    rss: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> LinFit {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    LinFit {
        intercept,
        slope,
        rss,
    }
}

/// Minimizes `f` on `[lo, hi]`: coarse grid, then golden-section refinement
/// around the best grid point.
fn minimize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const GRID: usize = 400;
    let h = (hi - lo) / GRID as f64;
    let (mut best_x, mut best_f) = (lo, f(lo));
    for i in 1..=GRID {
        let x = lo + h * i as f64;
        let v = f(x);
        if v < best_f {
            best_x = x;
            best_f = v;
        }
    }
    let (mut a, mut b) = ((best_x - h).max(lo), (best_x + h).min(hi));
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    if f(x) <= best_f {
        x
    } else {
        best_x
    }
}

/// Standard errors from the Gauss-Newton covariance `σ² (JᵗJ)⁻¹`,
/// `σ² = RSS / (m - p)`, for the log-space residual Jacobian `jac` (m×p).
fn gauss_newton_stderr(jac: &Mat, rss: f64) -> Vec<f64> {
    let (m, p) = (jac.rows(), jac.cols());
    if m <= p {
        return vec![f64::INFINITY; p];
    }
    let sigma2 = rss / (m - p) as f64;
    let jtj = jac.tr_matmul(jac);
    match invert_spd(&jtj) {
        Some(inv) => (0..p)
            .map(|i| libm::sqrt((sigma2 * inv[(i, i)]).max(0.0)))
            .collect(),
        None => vec![f64::INFINITY; p],
    }
}

/// Inverse of a small symmetric positive definite matrix by Gauss-Jordan.
fn invert_spd(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = Mat::identity(n);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))?;
        if m[(p, k)].abs() < 1e-300 {
            return None;
        }
        for j in 0..n {
            let (t, u) = (m[(k, j)], inv[(k, j)]);
            m[(k, j)] = m[(p, j)];
            inv[(k, j)] = inv[(p, j)];
            m[(p, j)] = t;
            inv[(p, j)] = u;
        }
        let piv = m[(k, k)];
        for j in 0..n {
            m[(k, j)] /= piv;
            inv[(k, j)] /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = m[(i, k)];
                for j in 0..n {
                    m[(i, j)] -= f * m[(k, j)];
                    inv[(i, j)] -= f * inv[(k, j)];
                }
            }
        }
    }
    Some(inv)
}

/// Least-squares fit of each requested model to `log q(d)` over `range`
/// (default `[3, n/2]`).
pub fn fit_decay(
    profile: &DecayProfile,
    models: &[DecayModelKind],
    range: Option<(usize, usize)>,
) -> Result<Vec<DecayFit>> {
    let (lo, hi) = range.unwrap_or_else(|| default_fit_range(profile));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&d, &q) in profile.d.iter().zip(&profile.q_mean) {
        if d >= lo && d <= hi {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::contract(format!(
                    "profile value q({d}) = {q} invalid"
                )));
            }
            xs.push(d as f64);
            ys.push(libm::log(q.max(FIT_FLOOR)));
        }
    }
    let m = xs.len();
    if m < MIN_FIT_POINTS {
        return Err(Error::contract(format!(
            "fit window [{lo}, {hi}] holds {m} distances, need at least {MIN_FIT_POINTS}"
        )));
    }
    models
        .iter()
        .map(|&kind| {
            let (model, rss, jac) = match kind {
                DecayModelKind::Exponential => fit_exponential(&xs, &ys),
                DecayModelKind::Stretched => fit_stretched(&xs, &ys),
                DecayModelKind::PowerLaw => fit_power_law(&xs, &ys),
            };
            let se = gauss_newton_stderr(&jac, rss);
            // the rate is always the second parameter
            let rate_stderr = se[1];
            let t = t_critical_95(m.saturating_sub(kind.param_count()));
            let fit = DecayFit {
                model,
                residual: libm::sqrt(rss / m as f64),
                fit_range: (lo, hi),
                points: m,
                rate_stderr,
                rate_lower_95: 0.0,
            };
            let rate = fit.rate();
            Ok(DecayFit {
                rate_lower_95: rate - t * rate_stderr,
                ..fit
            })
        })
        .collect()
}

fn fit_exponential(xs: &[f64], ys: &[f64]) -> (DecayModel, f64, Mat) {
    let lf = linear_fit(xs, ys);
    let model = DecayModel::Exponential {
        c: libm::exp(lf.intercept),
        eta: -lf.slope,
    };
    // parameters (log C, η): ∂/∂logC = 1, ∂/∂η = -d
    let jac = Mat::from_fn(xs.len(), 2, |i, p| if p == 0 { 1.0 } else { -xs[i] });
    (model, lf.rss, jac)
}

fn fit_stretched(xs: &[f64], ys: &[f64]) -> (DecayModel, f64, Mat) {
    let at = |xi: f64| {
        let t: Vec<f64> = xs.iter().map(|&d| libm::pow(d, xi)).collect();
        linear_fit(&t, ys)
    };
    let xi = minimize_1d(|xi| at(xi).rss, 0.05, 4.0);
    let lf = at(xi);
    let eta = -lf.slope;
    let model = DecayModel::Stretched {
        c: libm::exp(lf.intercept),
        eta,
        xi,
    };
    // parameters (log C, η, ξ)
    let jac = Mat::from_fn(xs.len(), 3, |i, p| {
        let d = xs[i];
        let dx = libm::pow(d, xi);
        match p {
            0 => 1.0,
            1 => -dx,
            _ => -eta * dx * libm::log(d),
        }
    });
    (model, lf.rss, jac)
}

fn fit_power_law(xs: &[f64], ys: &[f64]) -> (DecayModel, f64, Mat) {
    let m = xs.len() as f64;
    let at = |beta: f64| {
        // log q = log C - log(1 + d^β); log C is the mean offset
        let r: Vec<f64> = xs
            .iter()
            .zip(ys)
            .map(|(&d, &y)| y + libm::log1p(libm::pow(d, beta)))
            .collect();
        let log_c = r.iter().sum::<f64>() / m;
        let rss: f64 = r.iter().map(|v| (v - log_c) * (v - log_c)).sum();
        (log_c, rss)
    };
    let beta = minimize_1d(|b| at(b).1, 0.0, 40.0);
    let (log_c, rss) = at(beta);
    let model = DecayModel::PowerLaw {
        c: libm::exp(log_c),
        beta,
    };
    let jac = Mat::from_fn(xs.len(), 2, |i, p| {
        let d = xs[i];
        if p == 0 {
            1.0
        } else {
            let db = libm::pow(d, beta);
            -db * libm::log(d) / (1.0 + db)
        }
    });
    (model, rss, jac)
}
