//! Monte Carlo drivers.
//!
//! Realizations run in parallel on the rayon pool; results are collected in
//! realization order so every output is independent of scheduling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use xychain_core::freefermion::{
    bogoliubov_residuals, decompose_params, entanglement_entropy, max_entropy_with_correlator,
    BogoliubovDecomposition, OccupationPattern, SubInterval, BOGOLIUBOV_TOL, PROJECTION_TOL,
};
use xychain_core::localization::{
    aggregate_correlators, correlator_sum_bound, fit_decay, realization_correlator, sample_simple,
    DecayModel, DecayModelKind, DecayProfile, MAX_RESAMPLES,
};
use xychain_core::model::{build_m, ChainParams, DisorderEnsemble};
use xychain_core::oracle;
use xychain_core::seed::derive_seed;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};

/// Slack allowed when checking `max_entropy <= bound` on a record.
const RECORD_SLACK: f64 = 1e-9;

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub realization: u64,
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub max_entropy: f64,
    pub bound: f64,
    pub gs_entropy: f64,
    pub min_gap: f64,
    pub resampled: bool,
}

/// One row of `params.csv`: which disorder draw a realization ended up with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamsRecord {
    pub realization: u64,
    pub n: usize,
    pub attempts: u64,
    pub params_digest: String,
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let stderr = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
            (var / m).sqrt()
        };
        Estimate { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArealawSummaryEntry {
    pub n: usize,
    pub ell: usize,
    pub r: usize,
    pub realizations: usize,
    pub max_entropy: Estimate,
    pub bound: Estimate,
    pub gs_entropy: Estimate,
    pub resampled: usize,
}

/// Ground-state entropy of a clean chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlRecord {
    pub n: usize,
    pub ell: usize,
    pub gs_entropy: f64,
}

/// `S(ℓ) ≈ coefficient · ln ℓ + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    pub coefficient: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub ell_min: usize,
    pub ell_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArealawOutcome {
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
    #[serde(skip)]
    pub params: Vec<ParamsRecord>,
    /// Keyed by `n`, then by `ell`.
    pub summary: BTreeMap<usize, BTreeMap<usize, ArealawSummaryEntry>>,
    #[serde(skip)]
    pub control: Vec<ControlRecord>,
    pub control_fit: BTreeMap<String, LogFit>,
    pub resampled_realizations: usize,
}

impl ArealawOutcome {
    pub fn entry(&self, n: usize, ell: usize) -> Option<&ArealawSummaryEntry> {
        self.summary.get(&n)?.get(&ell)
    }
}

struct RealizationOutcome {
    records: Vec<ExperimentRecord>,
    params: ParamsRecord,
}

fn degenerate_abort(n: usize, index: u64, err: xychain_core::Error) -> AppError {
    match err {
        xychain_core::Error::Degenerate { min_gap, threshold } => AppError::Contract(format!(
            "realization {index} at n={n}: one-particle spectrum still degenerate after \
             {MAX_RESAMPLES} resamples (min gap {min_gap:e} <= threshold {threshold:e})"
        )),
        other => other.into(),
    }
}

fn search_seed(ensemble: &DisorderEnsemble, n: usize, index: u64, attempt: u64, ell: usize) -> u64 {
    derive_seed(
        derive_seed(ensemble.master_seed, index, attempt),
        n as u64,
        ell as u64,
    )
}

fn arealaw_realization(
    config: &ExperimentConfig,
    ensemble: &DisorderEnsemble,
    n: usize,
    index: u64,
    subs: &[SubInterval],
) -> AppResult<RealizationOutcome> {
    let (decomp, attempts) =
        sample_simple(ensemble, n, index).map_err(|e| degenerate_abort(n, index, e))?;
    let params = ensemble.sample_attempt(n, index, attempts)?;
    let q = correlator_sum_bound(&decomp)?;
    let vacuum = OccupationPattern::vacuum(n);
    let mut records = Vec::with_capacity(subs.len());
    for sub in subs {
        let strategy = config.search_strategy(search_seed(ensemble, n, index, attempts, sub.len()));
        let search = max_entropy_with_correlator(&decomp, sub, strategy, &q)?;
        let gs = entanglement_entropy(&decomp.restricted_correlation(&vacuum, sub)?)?;
        if search.max_entropy > search.rigorous_bound + RECORD_SLACK {
            return Err(AppError::Contract(format!(
                "realization {index}, n={n}, ell={}: entropy {} exceeds bound {}",
                sub.len(),
                search.max_entropy,
                search.rigorous_bound
            )));
        }
        records.push(ExperimentRecord {
            realization: index,
            n,
            r: sub.r(),
            ell: sub.len(),
            max_entropy: search.max_entropy,
            bound: search.rigorous_bound,
            gs_entropy: gs,
            min_gap: decomp.min_gap(),
            resampled: attempts > 0,
        });
    }
    Ok(RealizationOutcome {
        records,
        params: ParamsRecord {
            realization: index,
            n,
            attempts,
            params_digest: format!("{:016x}", params.digest()),
        },
    })
}

/// Ground-state entropies `S(ℓ)` of the clean chain `μ ≡ mu`, `γ ≡ 0`,
/// `ν ≡ nu` for centered subchains `ℓ = 1..=ell_max`.
pub fn clean_ground_state_profile(
    n: usize,
    mu: f64,
    nu: f64,
    ell_max: usize,
) -> AppResult<Vec<ControlRecord>> {
    let params = ChainParams::uniform(n, mu, 0.0, nu)?;
    let decomp = decompose_params(&params)?;
    let vacuum = OccupationPattern::vacuum(n);
    (1..=ell_max.min(n))
        .map(|ell| {
            let sub = SubInterval::centered(ell, n)?;
            let s = entanglement_entropy(&decomp.restricted_correlation(&vacuum, &sub)?)?;
            Ok(ControlRecord {
                n,
                ell,
                gs_entropy: s,
            })
        })
        .collect()
}

/// Least-squares fit of `S = a ln ℓ + b` over `ℓ ∈ [ell_min, ell_max]`.
pub fn fit_log_growth(control: &[ControlRecord], ell_min: usize, ell_max: usize) -> Option<LogFit> {
    let pts: Vec<(f64, f64)> = control
        .iter()
        .filter(|c| c.ell >= ell_min && c.ell <= ell_max)
        .map(|c| ((c.ell as f64).ln(), c.gs_entropy))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum();
    Some(LogFit {
        coefficient: a,
        intercept: b,
        rms_residual: (rss / m).sqrt(),
        ell_min,
        ell_max,
    })
}

/// Area-law study: sup over eigenstates of the entanglement entropy versus
/// subchain length, with the correlator bound and ground-state entropy.
pub fn run_arealaw(config: &ExperimentConfig) -> AppResult<ArealawOutcome> {
    config.validate()?;
    let ensemble = config.ensemble()?;
    let mut records = Vec::new();
    let mut params = Vec::new();
    let mut summary = BTreeMap::new();
    let mut control = Vec::new();
    let mut control_fit = BTreeMap::new();
    let mut resampled_realizations = 0;

    for &n in &config.n_values {
        let subs = config.subintervals(n)?;
        let outcomes: Vec<AppResult<RealizationOutcome>> = (0..config.realizations as u64)
            .into_par_iter()
            .map(|i| arealaw_realization(config, &ensemble, n, i, &subs))
            .collect();
        let outcomes: Vec<RealizationOutcome> = outcomes.into_iter().collect::<AppResult<_>>()?;
        resampled_realizations += outcomes.iter().filter(|o| o.params.attempts > 0).count();

        for (k, sub) in subs.iter().enumerate() {
            let rows: Vec<&ExperimentRecord> = outcomes.iter().map(|o| &o.records[k]).collect();
            let pick = |f: fn(&ExperimentRecord) -> f64| -> Vec<f64> {
                rows.iter().map(|r| f(r)).collect()
            };
            summary.entry(n).or_insert_with(BTreeMap::new).insert(
                sub.len(),
                ArealawSummaryEntry {
                    n,
                    ell: sub.len(),
                    r: sub.r(),
                    realizations: rows.len(),
                    max_entropy: Estimate::of(&pick(|r| r.max_entropy)),
                    bound: Estimate::of(&pick(|r| r.bound)),
                    gs_entropy: Estimate::of(&pick(|r| r.gs_entropy)),
                    resampled: rows.iter().filter(|r| r.resampled).count(),
                },
            );
        }
        for o in outcomes {
            records.extend(o.records);
            params.push(o.params);
        }

        if let Some(c) = &config.control {
            let ell_max = subs.iter().map(SubInterval::len).max().unwrap_or(1);
            let profile = clean_ground_state_profile(n, c.mu, c.nu, ell_max)?;
            if let Some(fit) = fit_log_growth(&profile, 4.min(ell_max), ell_max) {
                control_fit.insert(format!("n={n}"), fit);
            }
            control.extend(profile);
        }
    }
    Ok(ArealawOutcome {
        records,
        params,
        summary,
        control,
        control_fit,
        resampled_realizations,
    })
}

/// A fitted decay model in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub model: &'static str,
    pub c: f64,
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    pub rate_stderr: f64,
    pub rate_lower_95: f64,
    pub residual: f64,
    pub fit_min: usize,
    pub fit_max: usize,
    pub localized: bool,
    pub beta_exceeds_two: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorRun {
    pub n: usize,
    pub realizations: usize,
    pub resampled: u64,
    #[serde(skip)]
    pub profile: DecayProfile,
    pub fits: Vec<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

impl CorrelatorRun {
    pub fn fit(&self, kind: DecayModelKind) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.model == kind.name())
    }
}

/// Disorder-averaged sum-bound correlator profile and decay fits for every
/// configured chain length.
pub fn run_correlator(config: &ExperimentConfig) -> AppResult<Vec<CorrelatorRun>> {
    config.validate()?;
    let ensemble = config.ensemble()?;
    config
        .n_values
        .iter()
        .map(|&n| {
            let samples: Vec<AppResult<_>> = (0..config.realizations as u64)
                .into_par_iter()
                .map(|i| {
                    realization_correlator(&ensemble, n, i).map_err(|e| degenerate_abort(n, i, e))
                })
                .collect();
            let samples: Vec<_> = samples.into_iter().collect::<AppResult<_>>()?;
            let resampled = samples.iter().map(|s| s.1).sum();
            let matrices: Vec<_> = samples.into_iter().map(|s| s.0).collect();
            let avg = aggregate_correlators(&matrices, resampled)?;
            let lo = config.correlator.fit_min.unwrap_or(3);
            let hi = config.correlator.fit_max.unwrap_or(n / 2);
            let (fits, fit_error) =
                match fit_decay(&avg.profile, &DecayModelKind::ALL, Some((lo, hi))) {
                    Ok(fits) => (fits.iter().map(summarize_fit).collect(), None),
                    Err(e) => (Vec::new(), Some(e.to_string())),
                };
            Ok(CorrelatorRun {
                n,
                realizations: avg.realizations,
                resampled,
                profile: avg.profile,
                fits,
                fit_error,
            })
        })
        .collect()
}

fn summarize_fit(f: &xychain_core::DecayFit) -> FitSummary {
    let (c, xi) = match f.model {
        DecayModel::Exponential { c, .. } | DecayModel::PowerLaw { c, .. } => (c, None),
        DecayModel::Stretched { c, xi, .. } => (c, Some(xi)),
    };
    FitSummary {
        model: f.model.kind().name(),
        c,
        rate: f.rate(),
        xi,
        rate_stderr: f.rate_stderr,
        rate_lower_95: f.rate_lower_95,
        residual: f.residual,
        fit_min: f.fit_range.0,
        fit_max: f.fit_range.1,
        localized: f.localized(),
        beta_exceeds_two: f.beta_exceeds_two(),
    }
}

/// Worst residual of one oracle cross-check across all instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub instances: usize,
    pub skipped: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

/// Residuals are recorded relative to their tolerance so checks with
/// instance-dependent tolerances aggregate correctly.
#[derive(Default)]
struct Tally {
    worst_ratio: f64,
    worst_residual: f64,
    worst_tolerance: f64,
    instances: usize,
    skipped: usize,
}

impl Tally {
    fn add(&mut self, residual: f64, tolerance: f64) {
        let ratio = if tolerance > 0.0 {
            residual / tolerance
        } else if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if self.instances == 0 || ratio > self.worst_ratio || residual.is_nan() {
            self.worst_ratio = if residual.is_nan() {
                f64::INFINITY
            } else {
                ratio
            };
            self.worst_residual = residual;
            self.worst_tolerance = tolerance;
        }
        self.instances += 1;
    }

    fn merge(&mut self, other: Tally) {
        if other.instances > 0 && (self.instances == 0 || other.worst_ratio > self.worst_ratio) {
            self.worst_ratio = other.worst_ratio;
            self.worst_residual = other.worst_residual;
            self.worst_tolerance = other.worst_tolerance;
        }
        self.instances += other.instances;
        self.skipped += other.skipped;
    }
}

pub const CHECK_NAMES: [&str; 10] = [
    "quadratic_form",
    "spectrum",
    "bogoliubov",
    "correlation",
    "projection",
    "restricted_entropy",
    "wick",
    "wick_odd",
    "b_operators",
    "diagonal_trace_identity",
];

type Tallies = BTreeMap<&'static str, Tally>;

/// Patterns used for the correlation and entropy cross-checks.
fn patterns(n: usize, rng: &mut ChaCha8Rng) -> Vec<OccupationPattern> {
    if n <= 6 {
        (0..1u64 << n)
            .map(|i| OccupationPattern::from_index(n, i))
            .collect()
    } else {
        (0..16)
            .map(|_| OccupationPattern::new((0..n).map(|_| rng.gen()).collect()))
            .collect()
    }
}

fn all_subintervals(n: usize) -> Vec<SubInterval> {
    (1..=n)
        .flat_map(|ell| (0..=n - ell).map(move |s| SubInterval::new(s, ell, n).unwrap()))
        .collect()
}

fn injected_fault(decomp: &BogoliubovDecomposition) -> xychain_core::Mat {
    let mut w = decomp.w().clone();
    let row = w.row(0).to_vec();
    let k = (0..row.len())
        .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()))
        .unwrap_or(0);
    w[(0, k)] = -w[(0, k)];
    w
}

fn verify_instance(
    config: &ExperimentConfig,
    params: &ChainParams,
    decomp: &BogoliubovDecomposition,
    seed: u64,
) -> AppResult<Tallies> {
    let n = params.n();
    let mut t: Tallies = CHECK_NAMES.iter().map(|&k| (k, Tally::default())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = oracle::build_h(params)?;
    let h_max = h.matrix().max_abs();
    let scale = h_max.max(1.0);

    t.get_mut("quadratic_form").unwrap().add(
        oracle::verify_quadratic_form(params)?,
        oracle::QUADRATIC_FORM_TOL * h_max,
    );
    t.get_mut("spectrum")
        .unwrap()
        .add(oracle::match_spectra(params)?, oracle::SPECTRUM_TOL * scale);

    let m = build_m(params);
    let w = if config.verify.inject_w_fault {
        injected_fault(decomp)
    } else {
        decomp.w().clone()
    };
    let res = bogoliubov_residuals(&w, &m.matrix, decomp.lambdas());
    let bog = t.get_mut("bogoliubov").unwrap();
    bog.add(res.orthogonality, BOGOLIUBOV_TOL);
    bog.add(res.symplectic, BOGOLIUBOV_TOL);
    bog.add(
        res.diagonalization,
        BOGOLIUBOV_TOL * m.matrix.max_abs().max(1.0),
    );

    let spectrum = oracle::exact_spectrum(&h)?;
    let cs = oracle::jordan_wigner(n)?;
    let subs = all_subintervals(n);
    let mut states = Vec::new();
    for alpha in patterns(n, &mut rng) {
        match oracle::eigenstate_for_pattern(decomp, &spectrum, &alpha, h_max) {
            Ok(psi) => states.push((alpha, psi)),
            Err(xychain_core::Error::Degenerate { .. }) => {
                t.get_mut("correlation").unwrap().skipped += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    for (alpha, psi) in &states {
        let gamma = decomp.correlation_matrix(alpha)?;
        let exact = oracle::correlation_from_vector(psi, &cs)?;
        t.get_mut("correlation").unwrap().add(
            exact.matrix().max_abs_diff(gamma.matrix()),
            oracle::CORRELATION_TOL,
        );
        t.get_mut("projection")
            .unwrap()
            .add(gamma.projection_defect(), PROJECTION_TOL);
        for sub in &subs {
            let s_exact = oracle::von_neumann_entropy(&oracle::reduced_state(psi, sub)?)?;
            let s_ff = entanglement_entropy(&decomp.restricted_correlation(alpha, sub)?)?;
            t.get_mut("restricted_entropy")
                .unwrap()
                .add((s_exact - s_ff).abs(), oracle::ENTROPY_TOL);
        }
    }

    if let Some((_, psi)) = states.choose(&mut rng) {
        let ops = oracle::interleaved(&cs);
        let lengths = [2usize, 3, 4, 6];
        let tuples: Vec<Vec<usize>> = (0..config.verify.wick_tuples)
            .map(|k| {
                let m = lengths[k % lengths.len()];
                (0..m).map(|_| rng.gen_range(0..2 * n)).collect()
            })
            .collect();
        let report = oracle::wick_check_state(psi, &ops, &tuples)?;
        t.get_mut("wick")
            .unwrap()
            .add(report.max_residual, oracle::CORRELATION_TOL);
        t.get_mut("wick_odd")
            .unwrap()
            .add(report.max_odd_expectation, 1e-12);
    }

    let b = oracle::check_bogoliubov_ops(params)?;
    let bt = t.get_mut("b_operators").unwrap();
    bt.add(b.car, 1e-10);
    bt.add(b.hamiltonian, 1e-9 * scale);
    bt.add(b.commutator, 1e-9 * scale);

    let eta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    t.get_mut("diagonal_trace_identity")
        .unwrap()
        .add(oracle::diagonal_trace_identity(&eta)?, oracle::STATE_TOL);
    Ok(t)
}

/// Runs every oracle cross-check on each realization.
pub fn run_verify(config: &ExperimentConfig) -> AppResult<VerifyReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Verify {
        return Err(AppError::Config(
            "run_verify needs kind = \"verify\"".into(),
        ));
    }
    let ensemble = config.ensemble()?;
    let mut totals: Tallies = CHECK_NAMES.iter().map(|&k| (k, Tally::default())).collect();
    for &n in &config.n_values {
        let per: Vec<AppResult<Tallies>> = (0..config.realizations as u64)
            .into_par_iter()
            .map(|i| {
                let (decomp, attempts) =
                    sample_simple(&ensemble, n, i).map_err(|e| degenerate_abort(n, i, e))?;
                let params = ensemble.sample_attempt(n, i, attempts)?;
                verify_instance(
                    config,
                    &params,
                    &decomp,
                    derive_seed(!ensemble.master_seed, i, n as u64),
                )
            })
            .collect();
        for tallies in per {
            for (k, v) in tallies? {
                totals.get_mut(k).unwrap().merge(v);
            }
        }
    }
    let checks = CHECK_NAMES
        .iter()
        .map(|&name| {
            let t = &totals[name];
            CheckResult {
                name,
                max_residual: t.worst_residual,
                tolerance: t.worst_tolerance,
                instances: t.instances,
                skipped: t.skipped,
                passed: t.worst_residual <= t.worst_tolerance,
            }
        })
        .collect();
    Ok(VerifyReport { checks })
}
