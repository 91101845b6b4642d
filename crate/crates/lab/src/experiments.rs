//! The verification experiments behind each CLI command.
//!
//! Every chain gets its own seed derived from `(seed, n, stream)`, chains
//! run on the rayon pool, and results are gathered in `(n, chain)` order,
//! so a report depends only on the config and the seed.

use std::path::Path;
use std::time::Instant;

use ergm_core::graph::hom_count;
use ergm_core::model::{solve_fixed_point, small_phi_prime, big_phi_prime, PatternKind};
use ergm_core::sampler::{
    estimate_ptilde, exact_conditional, run_chain, run_chain_with, ChainKind, PtildeEstimate, MAX_EXACT_VERTICES,
};
use ergm_core::stats::{
    batch_means, dkw_epsilon, fit_rate, kolmogorov_distance, local_distance, pearson_correlation, smoothing_bound_check,
    smoothness_d, standardized_sample_tests, BatchMeans, Pmf, RateFit,
};
use ergm_core::theory::{
    c_star, edge_clt_at, fixed_point, general_subgraph_moments, two_star_moments, FIXED_POINT_TOL,
};
use ergm_core::{ErgmParams, SubgraphSpec};
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig};
use crate::io::{sha256_hex, write_streams, FormatError, RunSidecar, StreamRecord};
use crate::plot::{write_plot, Plot, Series};
use crate::report::{Check, ExperimentReport, FitEcho, Measured, RegionEcho, Row};

/// Significance level of the KS band: the band holds with probability 0.999.
pub const KS_ALPHA: f64 = 0.001;
/// Allowed relative error of the conditional variance of `V` at the largest `n`.
pub const VARIANCE_TOLERANCE: f64 = 0.15;
/// Allowed relative gap between the sampled mean of `V` and `μ_V` in the
/// edge-only case.
pub const MEAN_GAP_TOLERANCE: f64 = 0.002;
/// Bound on `|r(Ṽ, Δ̃)|` at the largest `n`.
pub const CORRELATION_BOUND: f64 = 0.35;
/// Accepted interval for the fitted exponent of `|p̂̃ - p|`.
pub const PTILDE_SLOPE_RANGE: (f64, f64) = (-1.4, -0.6);
/// Local CLT exponent of the envelope `c · n^{-9/8}`.
pub const LCLT_EXPONENT: f64 = -9.0 / 8.0;
/// Constant bounding `lhs / sqrt(d_K (D(U) + D(V)))` in the smoothing
/// inequality.
pub const SMOOTHING_CONSTANT: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ergm_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl RunError {
    /// 2 for bad input, 3 for parameters outside a formula's range, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use ergm_core::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Precondition(_) => 3,
            RunError::Model(E::NotSubcritical(_) | E::DegenerateParameters(_)) => 3,
            RunError::Model(_) => 2,
            RunError::Io(_) | RunError::Format(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Moments,
    VerifyConditionalClt,
    VerifyLclt,
    VerifyPtilde,
    VerifyConjecture,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Moments => "moments",
            Command::VerifyConditionalClt => "verify-conditional-clt",
            Command::VerifyLclt => "verify-lclt",
            Command::VerifyPtilde => "verify-ptilde",
            Command::VerifyConjecture => "verify-conjecture",
        }
    }
}

/// Command-line overrides of the config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub n_list: Option<Vec<usize>>,
    pub samples: Option<usize>,
    /// Conditioning density for `moments` and the conditional experiments.
    pub p_tilde: Option<f64>,
    /// Pattern for `verify-conjecture`.
    pub pattern: Option<SubgraphSpec>,
}

/// A finished run: the report plus everything written next to it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub streams: Vec<StreamRecord>,
    pub plots: Vec<Plot>,
    /// Human-readable summary lines printed before the check lines.
    pub lines: Vec<String>,
    pub sidecar: RunSidecar,
}

/// Mixes `(seed, n, stream)` into an independent chain seed (splitmix64
/// finalizer).
pub fn derive_seed(seed: u64, n: usize, stream: u64) -> u64 {
    let mut z = seed
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ stream.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    opts: &'a RunOptions,
    seed: u64,
    n_list: Vec<usize>,
    samples: usize,
}

impl Ctx<'_> {
    fn params(&self, n: usize) -> Result<ErgmParams> {
        Ok(self.config.params(n)?)
    }

    fn base_params(&self) -> Result<ErgmParams> {
        self.params(self.n_list[0])
    }
}

pub fn run(command: Command, config: &ExperimentConfig, config_text: &str, opts: &RunOptions) -> Result<Outcome> {
    let started = Instant::now();
    let mut n_list = config.n_list(opts.n_list.as_deref());
    n_list.sort_unstable();
    n_list.dedup();
    let min_n = config.min_n()?;
    if let Some(&n) = n_list.iter().find(|&&n| n < min_n) {
        return Err(ConfigError::Invalid(format!("n = {n} is smaller than the largest pattern ({min_n} vertices)")).into());
    }
    let samples = opts.samples.unwrap_or(config.chain.samples);
    if samples < 4 {
        return Err(ConfigError::Invalid(format!("samples = {samples}, need at least 4")).into());
    }
    if let Some(p) = opts.p_tilde {
        if !(p > 0.0 && p < 1.0) {
            return Err(ConfigError::Invalid(format!("p_tilde = {p} must lie in (0, 1)")).into());
        }
    }
    let ctx = Ctx {
        config,
        opts,
        seed: opts.seed.unwrap_or(config.chain.seed),
        n_list,
        samples,
    };
    let config_sha256 = sha256_hex(config_text.as_bytes());
    let mut report = ExperimentReport::new(command.name(), ctx.seed, &config_sha256, &ctx.base_params()?);
    let mut outcome = Outcome {
        report: report.clone(),
        streams: Vec::new(),
        plots: Vec::new(),
        lines: Vec::new(),
        sidecar: RunSidecar {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.name().to_string(),
            seed: ctx.seed,
            n_list: ctx.n_list.clone(),
            samples: opts.samples,
            p_tilde: opts.p_tilde,
            pattern: opts.pattern.as_ref().map(|h| h.edges().iter().map(|&(a, b)| [a, b]).collect()),
            config_sha256,
            config: config_text.to_string(),
        },
    };
    match command {
        Command::Analyze => analyze(&ctx, &mut report, &mut outcome)?,
        Command::Moments => moments(&ctx, &mut report, &mut outcome)?,
        Command::VerifyConditionalClt => conditional_clt(&ctx, &mut report, &mut outcome)?,
        Command::VerifyLclt => lclt(&ctx, &mut report, &mut outcome)?,
        Command::VerifyPtilde => ptilde(&ctx, &mut report, &mut outcome)?,
        Command::VerifyConjecture => conjecture(&ctx, &mut report, &mut outcome)?,
    }
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    outcome.report = report;
    Ok(outcome)
}

/// Writes `report.json`, `samples.csv`, `run.toml` and `plots/`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), outcome.report.to_json())?;
    let file = std::fs::File::create(dir.join("samples.csv"))?;
    write_streams(&outcome.streams, std::io::BufWriter::new(file))?;
    outcome.sidecar.write(&dir.join("run.toml"))?;
    let plots = dir.join("plots");
    for plot in &outcome.plots {
        write_plot(plot, &plots)?;
    }
    Ok(())
}

/// The fixed point, or a precondition failure naming the classification.
fn require_subcritical(params: &ErgmParams) -> Result<f64> {
    fixed_point(params).map_err(|e| RunError::Precondition(e.to_string()))
}

fn measured(bm: &BatchMeans) -> Measured {
    Measured::new(bm.mean, bm.standard_error)
}

/// Sample variance, with the batch-means error of the mean squared deviation.
fn variance_estimate(xs: &[f64]) -> Result<Measured> {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let bm = batch_means(&dev)?;
    let scale = xs.len() as f64 / (xs.len() as f64 - 1.0);
    Ok(Measured::new(bm.mean * scale, bm.standard_error * scale))
}

fn fit_points(points: &[(f64, f64)]) -> Option<RateFit> {
    fit_rate(points).ok()
}

fn rate_plot(name: &str, title: &str, y_label: &str, points: &[(f64, f64)], fit: Option<&RateFit>) -> Plot {
    let mut series = vec![Series::points("measured", points.to_vec())];
    if let Some(fit) = fit {
        let line = points.iter().map(|&(n, _)| (n, fit.predict(n))).collect();
        series.push(Series::line(format!("fit, slope {:.3}", fit.slope), line));
    }
    Plot {
        name: name.into(),
        title: title.into(),
        x_label: "n".into(),
        y_label: y_label.into(),
        log_log: true,
        series,
    }
}

/// At most `max_points` evenly spaced points of the empirical CDF.
fn ecdf_points(sorted: &[f64], max_points: usize) -> Vec<(f64, f64)> {
    let m = sorted.len();
    let step = m.div_ceil(max_points).max(1);
    let mut pts: Vec<(f64, f64)> =
        (0..m).step_by(step).map(|i| (sorted[i], (i + 1) as f64 / m as f64)).collect();
    if let Some(&last) = sorted.last() {
        if pts.last().map(|p| p.1) != Some(1.0) {
            pts.push((last, 1.0));
        }
    }
    pts
}

fn analyze(ctx: &Ctx, report: &mut ExperimentReport, out: &mut Outcome) -> Result<()> {
    let params = ctx.base_params()?;
    let region = solve_fixed_point(&params, FIXED_POINT_TOL)?;
    let p = region.p;
    out.lines.push(match p {
        Some(p) => format!("p = {p}"),
        None => "p = none".to_string(),
    });
    if let Some(p) = p {
        out.lines.push(format!("phi'(p) = {}", small_phi_prime(&params, p)));
    } else {
        out.lines.push(format!("max phi' over roots = {}", region.phi_prime_at_p));
    }
    out.lines.push(format!("Phi'(1) = {}", big_phi_prime(&params, 1.0)));
    out.lines.push(format!("roots = {:?}", region.roots));
    out.lines.push(format!("classification = {}", region.classification));
    report.region = Some(RegionEcho::from(&region));
    Ok(())
}

fn moments(ctx: &Ctx, report: &mut ExperimentReport, out: &mut Outcome) -> Result<()> {
    let base = ctx.base_params()?;
    let region = solve_fixed_point(&base, FIXED_POINT_TOL)?;
    report.region = Some(RegionEcho::from(&region));
    let p_tilde = match (ctx.opts.p_tilde, region.p) {
        (Some(pt), _) => pt,
        (None, Some(p)) => p,
        (None, None) => {
            return Err(RunError::Precondition(format!(
                "no fixed point to default p_tilde to (classification {}); pass --p-tilde",
                region.classification
            )))
        }
    };
    for &n in &ctx.n_list {
        let params = ctx.params(n)?;
        let m = two_star_moments(&params, p_tilde)?;
        let mut row = Row::new(n);
        row.theory("p_tilde", m.p_tilde)
            .theory("mu_v", m.mu_v)
            .theory("sigma2_v", m.sigma2_v)
            .theory("mu_vt", m.mu_vt)
            .theory("mu_tt", m.mu_tt)
            .theory("sigma2_tt", m.sigma2_tt)
            .theory("denom", m.denom);
        out.lines.push(format!(
            "n = {n}: p_tilde = {p_tilde}, mu_V = {}, sigma2_V = {}, mu_Vt = {}, mu_Tt = {}, sigma2_Tt = {}",
            m.mu_v, m.sigma2_v, m.mu_vt, m.mu_tt, m.sigma2_tt
        ));
        if let Some(p) = region.p {
            if let Ok(c) = c_star(&params, p) {
                row.theory("p", p).theory("c_star", c.value);
                out.lines.push(format!("n = {n}: c* = {}", c.value));
            }
            if let Ok(clt) = edge_clt_at(&params, p) {
                row.theory("sigma2_edges", clt.sigma2);
                out.lines.push(format!("n = {n}: sigma_n^2 = {}", clt.sigma2));
            }
        }
        if n <= MAX_EXACT_VERTICES {
            let k = slice_edges(params.pair_count(), p_tilde);
            let table = exact_conditional(&params, k)?;
            row.theory("k", k as f64);
            row.empirical("exact_mean_v", Measured::exact(table.expectation(|c| c.two_stars as f64)));
        }
        report.rows.push(row);
    }
    Ok(())
}

/// `round(N p̃)` kept inside `[1, N - 1]`.
fn slice_edges(pairs: usize, p_tilde: f64) -> usize {
    ((pairs as f64 * p_tilde).round() as usize).clamp(1, pairs.saturating_sub(1).max(1))
}

/// The conditioning slice at one `n`.
struct Slice {
    estimate: Option<PtildeEstimate>,
    k: usize,
    p_tilde: f64,
}

/// `p̃` from `--p-tilde`, from `p` itself when the model is edge-only (then
/// `E` is binomial and `p̃ = p`), or from an unconditional chain.
fn conditioning_slice(ctx: &Ctx, params: &ErgmParams, p: f64) -> Result<Slice> {
    let pairs = params.pair_count();
    let estimate = match ctx.opts.p_tilde {
        Some(_) => None,
        None if params.is_edge_only() => None,
        None => {
            let config = ctx.config.chain.chain_config(
                derive_seed(ctx.seed, params.n(), 0),
                ctx.config.chain.ptilde_samples.max(4),
                p,
            );
            Some(estimate_ptilde(params, &config)?)
        }
    };
    let target = ctx.opts.p_tilde.or(estimate.map(|e| e.p_tilde)).unwrap_or(p);
    let k = slice_edges(pairs, target);
    Ok(Slice { estimate, k, p_tilde: k as f64 / pairs as f64 })
}

fn slice_row(row: &mut Row, p: f64, slice: &Slice) {
    row.theory("p", p).theory("k", slice.k as f64).theory("p_tilde", slice.p_tilde);
    if let Some(e) = slice.estimate {
        row.empirical("p_tilde_hat", Measured::new(e.p_tilde, e.standard_error));
    }
}

struct CltRun {
    n: usize,
    p: f64,
    slice: Slice,
    records: Vec<ergm_core::SampleRecord>,
}

fn conditional_runs(ctx: &Ctx) -> Result<Vec<CltRun>> {
    let jobs: Vec<usize> = ctx.n_list.clone();
    jobs.par_iter()
        .map(|&n| {
            let params = ctx.params(n)?;
            let p = require_subcritical(&params)?;
            let slice = conditioning_slice(ctx, &params, p)?;
            let config = ctx.config.chain.chain_config(derive_seed(ctx.seed, n, 1), ctx.samples, slice.p_tilde);
            let records = run_chain(&params, &config, ChainKind::Conditional { edges: slice.k })?;
            Ok(CltRun { n, p, slice, records })
        })
        .collect()
}

fn conditional_clt(ctx: &Ctx, report: &mut ExperimentReport, out: &mut Outcome) -> Result<()> {
    require_subcritical(&ctx.base_params()?)?;
    let runs = conditional_runs(ctx)?;
    let band = dkw_epsilon(ctx.samples, KS_ALPHA);
    let largest = *ctx.n_list.last().expect("nonempty n list");
    let mut ks_points = Vec::new();
    let mut w_points = Vec::new();
    let mut cdf_series = Vec::new();
    for run in &runs {
        let n = run.n;
        let params = ctx.params(n)?;
        let pairs = params.pair_count() as f64;
        let m = two_star_moments(&params, run.slice.p_tilde)?;
        let v: Vec<f64> = run.records.iter().map(|r| r.two_stars as f64).collect();
        let bm = batch_means(&v)?;
        let var = variance_estimate(&v)?;
        let sigma = m.sigma2_v.sqrt();
        let tests = standardized_sample_tests(&v, m.mu_v, sigma)?;
        out.streams.extend(run.records.iter().map(|r| StreamRecord::new(n, 0, r)));

        let mut row = Row::new(n);
        slice_row(&mut row, run.p, &run.slice);
        row.theory("mu_v", m.mu_v)
            .theory("sigma2_v", m.sigma2_v)
            .theory("mu_vt", m.mu_vt)
            .theory("denom", m.denom)
            .theory("dkw_band", band);
        row.empirical("mean_v", measured(&bm))
            .empirical("variance_v", var)
            .empirical("variance_ratio", Measured::new(var.value / m.sigma2_v, var.standard_error / m.sigma2_v))
            .empirical("ks", Measured::new(tests.ks_statistic, band / 3.0))
            .empirical("wasserstein", Measured::new(tests.wasserstein, tests.mean.standard_error))
            .empirical("z_mean", Measured::new(tests.mean.value, tests.mean.standard_error))
            .empirical("z_variance", Measured::new(tests.variance.value, tests.variance.standard_error))
            .empirical("skewness", Measured::new(tests.skewness.value, tests.skewness.standard_error));
        report.checks.push(Check::below(format!("ks_below_dkw_band_n{n}"), tests.ks_statistic, band));

        if params.is_edge_only() {
            // Under G(n, m) each two-star needs two specific edges among k.
            let k = run.slice.k as f64;
            let exact = pairs * (n as f64 - 2.0) * run.slice.p_tilde * (k - 1.0) / (pairs - 1.0);
            row.theory("exact_gnm_mean_v", exact);
            let z = (bm.mean - exact).abs() / bm.standard_error;
            report.checks.push(Check::at_most(format!("mean_v_within_3se_of_gnm_n{n}"), z, 3.0));
            let gap = (bm.mean - m.mu_v).abs() / m.mu_v;
            report.checks.push(Check::below(format!("mean_v_relative_gap_n{n}"), gap, MEAN_GAP_TOLERANCE));
        }
        if n <= MAX_EXACT_VERTICES {
            let exact = exact_conditional(&params, run.slice.k)?.expectation(|c| c.two_stars as f64);
            row.theory("exact_conditional_mean_v", exact);
            let z = (bm.mean - exact).abs() / bm.standard_error.max(f64::MIN_POSITIVE);
            report.checks.push(Check::at_most(format!("mean_v_within_3se_of_exact_n{n}"), z, 3.0));
        }
        if n == largest {
            let rel = (var.value / m.sigma2_v - 1.0).abs();
            report.checks.push(Check::at_most(format!("variance_v_relative_error_n{n}"), rel, VARIANCE_TOLERANCE));
        }
        out.lines.push(format!(
            "n = {n}: k = {}, mean V = {:.3} +- {:.3} (mu_V = {:.3}), var ratio = {:.4}, KS = {:.4} (band {:.4}), skew = {:.3}",
            run.slice.k, bm.mean, bm.standard_error, m.mu_v, var.value / m.sigma2_v, tests.ks_statistic, band,
            tests.skewness.value
        ));
        report.rows.push(row);

        ks_points.push((n as f64, tests.ks_statistic));
        w_points.push((n as f64, tests.wasserstein));
        let mut z: Vec<f64> = v.iter().map(|x| (x - m.mu_v) / sigma).collect();
        z.sort_by(f64::total_cmp);
        cdf_series.push(Series::line(format!("n = {n}"), ecdf_points(&z, 400)));
    }

    let normal: Vec<(f64, f64)> = (0..=160).map(|i| {
        let x = -4.0 + 0.05 * i as f64;
        (x, ergm_core::stats::normal_cdf(x))
    }).collect();
    cdf_series.push(Series::line("N(0, 1)", normal));
    out.plots.push(Plot {
        name: "cdf_standardized_v".into(),
        title: "Standardized two-star count".into(),
        x_label: "z".into(),
        y_label: "CDF".into(),
        log_log: false,
        series: cdf_series,
    });
    for (name, points, label, reference) in
        [("ks_rate", &ks_points, "KS distance", -0.5), ("wasserstein_rate", &w_points, "Wasserstein distance", -0.5)]
    {
        let fit = fit_points(points);
        if let Some(fit) = &fit {
            report.rate_fits.push(FitEcho::new(name, fit, Some(reference), points));
        }
        out.plots.push(rate_plot(name, label, label, points, fit.as_ref()));
    }
    if ks_points.len() < 3 {
        report.notes.push("rate fits need at least three values of n".into());
    }
    report.notes.push("rate slopes are reported, not asserted".into());
    Ok(())
}

fn lclt(ctx: &Ctx, report: &mut ExperimentReport, out: &mut Outcome) -> Result<()> {
    let base = ctx.base_params()?;
    let p = require_subcritical(&base)?;
    let exact = base.is_edge_only();
    let replicates = ctx.config.chain.replicates;

    // Empirical or exact law of E, per n, in n order.
    let laws: Vec<(usize, Pmf, Option<BatchMeans>)> = if exact {
        ctx.n_list
            .iter()
            .map(|&n| {
                let params = ctx.params(n)?;
                Ok((n, Pmf::binomial(params.pair_count() as u64, p), None))
            })
            .collect::<Result<_>>()?
    } else {
        let jobs: Vec<(usize, u64)> =
            ctx.n_list.iter().flat_map(|&n| (0..replicates as u64).map(move |r| (n, r))).collect();
        let streams: Vec<(usize, u64, Vec<ergm_core::SampleRecord>)> = jobs
            .par_iter()
            .map(|&(n, r)| {
                let params = ctx.params(n)?;
                let config = ctx.config.chain.chain_config(derive_seed(ctx.seed, n, 2 + r), ctx.samples, p);
                Ok((n, r, run_chain(&params, &config, ChainKind::Unconditional)?))
            })
            .collect::<Result<_>>()?;
        let mut laws = Vec::new();
        for &n in &ctx.n_list {
            let mut edges = Vec::new();
            for (_, r, recs) in streams.iter().filter(|s| s.0 == n) {
                out.streams.extend(recs.iter().map(|rec| StreamRecord::new(n, *r, rec)));
                edges.extend(recs.iter().map(|rec| rec.edges as i64));
            }
            let as_f64: Vec<f64> = edges.iter().map(|&e| e as f64).collect();
            laws.push((n, Pmf::from_samples(&edges)?, Some(batch_means(&as_f64)?)));
        }
        laws
    };

    let mut dloc_points = Vec::new();
    for (n, law, bm) in &laws {
        let n = *n;
        let params = ctx.params(n)?;
        let clt = edge_clt_at(&params, p)?;
        // The exact law has mean Np; for sampled laws the centering uses the
        // sample mean, since p̃ - p = O(1/n) shifts E by O(n).
        let mu = match bm {
            Some(bm) => bm.mean,
            None => params.pair_count() as f64 * p,
        };
        let z = Pmf::discretized_normal(mu, clt.sigma2)?;
        let d_loc = local_distance(law, &z);
        let d_k = kolmogorov_distance(law, &z);
        let bound = smoothing_bound_check(law, &z);
        let mut row = Row::new(n);
        row.theory("p", p).theory("mu", mu).theory("sigma2", clt.sigma2).theory("smoothness_normal", smoothness_d(&z));
        // Sampled laws have no closed-form error; the DKW band of the pooled
        // sample serves as a conservative scale for every distance.
        let se = if exact { 0.0 } else { dkw_epsilon(ctx.samples * replicates, KS_ALPHA) };
        row.empirical("d_loc", Measured::new(d_loc, se))
            .empirical("d_k", Measured::new(d_k, se))
            .empirical("smoothness", Measured::new(smoothness_d(law), se))
            .empirical("smoothing_lhs", Measured::new(bound.lhs, se))
            .empirical("smoothing_rhs", Measured::new(bound.rhs, se))
            .empirical("smoothing_ratio", Measured::new(bound.ratio(), se));
        if let Some(bm) = bm {
            row.empirical("mean_edges", measured(bm));
        }
        report.checks.push(Check::at_most(format!("smoothing_ratio_n{n}"), bound.ratio(), SMOOTHING_CONSTANT));
        out.lines.push(format!(
            "n = {n}: d_loc = {d_loc:.6e}, d_K = {d_k:.6e}, D = {:.6e}, smoothing ratio = {:.4}",
            smoothness_d(law),
            bound.ratio()
        ));
        report.rows.push(row);
        dloc_points.push((n as f64, d_loc));
    }

    if exact {
        for w in dloc_points.windows(2) {
            report.checks.push(Check::below(
                format!("d_loc_decreasing_n{}", w[1].0 as usize),
                w[1].1,
                w[0].1,
            ));
        }
        let (n0, d0) = dloc_points[0];
        let c = d0 * n0.powf(-LCLT_EXPONENT);
        for &(n, d) in &dloc_points[1..] {
            report.checks.push(Check::at_most(format!("d_loc_envelope_n{}", n as usize), d, c * n.powf(LCLT_EXPONENT)));
        }
        report.notes.push(format!("envelope c * n^(-9/8) with c = {c} fitted at n = {n0}"));
    } else {
        report.notes.push("sampled laws are centered at the sample mean; d_loc includes sampling noise".into());
    }
    let fit = fit_points(&dloc_points);
    if let Some(fit) = &fit {
        report.rate_fits.push(FitEcho::new("d_loc_rate", fit, Some(LCLT_EXPONENT), &dloc_points));
    }
    out.plots.push(rate_plot("d_loc_rate", "Local distance to the discretized normal", "d_loc", &dloc_points, fit.as_ref()));
    Ok(())
}

fn ptilde(ctx: &Ctx, report: &mut ExperimentReport, out: &mut Outcome) -> Result<()> {
    let base = ctx.base_params()?;
    let p = require_subcritical(&base)?;
    let replicates = ctx.config.chain.replicates;
    let jobs: Vec<(usize, u64)> = ctx.n_list.iter().flat_map(|&n| (0..replicates as u64).map(move |r| (n, r))).collect();
    let chains: Vec<(usize, u64, Vec<ergm_core::SampleRecord>)> = jobs
        .par_iter()
        .map(|&(n, r)| {
            let params = ctx.params(n)?;
            let config = ctx.config.chain.chain_config(derive_seed(ctx.seed, n, 2 + r), ctx.samples, p);
            Ok((n, r, run_chain(&params, &config, ChainKind::Unconditional)?))
        })
        .collect::<Result<_>>()?;

    let mut diff_points = Vec::new();
    let mut prediction = Vec::new();
    for &n in &ctx.n_list {
        let params = ctx.params(n)?;
        let pairs = params.pair_count() as f64;
        let cs = c_star(&params, p)?;
        let mut chain_means = Vec::new();
        for (_, r, recs) in chains.iter().filter(|c| c.0 == n) {
            out.streams.extend(recs.iter().map(|rec| StreamRecord::new(n, *r, rec)));
            chain_means.push(recs.iter().map(|rec| rec.edges as f64).sum::<f64>() / (recs.len() as f64 * pairs));
        }
        let reps = chain_means.len() as f64;
        let mean = chain_means.iter().sum::<f64>() / reps;
        let se = if chain_means.len() > 1 {
            (chain_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (reps - 1.0) / reps).sqrt()
        } else {
            let recs = &chains.iter().find(|c| c.0 == n).expect("one chain").2;
            let dens: Vec<f64> = recs.iter().map(|rec| rec.edges as f64 / pairs).collect();
            batch_means(&dens)?.standard_error
        };
        let diff = mean - p;
        let predicted = cs.value / n as f64;
        let residual = diff - predicted;
        let mut row = Row::new(n);
        row.theory("p", p).theory("c_star", cs.value).theory("c_star_over_n", predicted);
        row.empirical("p_tilde_hat", Measured::new(mean, se))
            .empirical("diff", Measured::new(diff, se))
            .empirical("residual", Measured::new(residual, se))
            .empirical("scaled_diff", Measured::new(n as f64 * diff, n as f64 * se));
        if se < diff.abs() / 3.0 {
            report.checks.push(Check::below(format!("residual_below_diff_n{n}"), residual.abs(), diff.abs()));
        } else {
            report.notes.push(format!("n = {n}: standard error {se:.3e} is not below |diff|/3, residual check skipped"));
        }
        out.lines.push(format!(
            "n = {n}: p_tilde_hat = {mean:.6} +- {se:.2e}, diff = {diff:.3e}, c*/n = {predicted:.3e}, residual = {residual:.3e}"
        ));
        report.rows.push(row);
        diff_points.push((n as f64, diff.abs()));
        prediction.push((n as f64, predicted.abs()));
    }
    match fit_points(&diff_points) {
        Some(fit) => {
            report.checks.push(Check::within("diff_slope", fit.slope, PTILDE_SLOPE_RANGE.0, PTILDE_SLOPE_RANGE.1));
            report.rate_fits.push(FitEcho::new("diff_rate", &fit, Some(-1.0), &diff_points));
            let mut plot = rate_plot("ptilde_rate", "Edge density offset", "|p_tilde - p|", &diff_points, Some(&fit));
            plot.series.push(Series::line("|c*| / n", prediction));
            out.plots.push(plot);
        }
        None => report.notes.push("slope fit needs at least three values of n with nonzero offset".into()),
    }
    Ok(())
}

/// Number of copies of `h` in the sampled graph.
fn pattern_copies(h: &SubgraphSpec, rec: &ergm_core::SampleRecord, g: &ergm_core::DenseGraph) -> f64 {
    match h.kind() {
        PatternKind::Edge => rec.edges as f64,
        PatternKind::TwoStar => rec.two_stars as f64,
        PatternKind::Triangle => rec.triangles as f64,
        PatternKind::General => (hom_count(h, g) / h.automorphisms()) as f64,
    }
}

fn conjecture(ctx: &Ctx, report: &mut ExperimentReport, out: &mut Outcome) -> Result<()> {
    require_subcritical(&ctx.base_params()?)?;
    report.conjecture = true;
    report.notes.push("CONJECTURE: theoretical values for general patterns are conjectured, not proven".into());
    let h = match (&ctx.opts.pattern, ctx.config.pattern_spec()?) {
        (Some(h), _) => h.clone(),
        (None, Some(h)) => h,
        (None, None) => SubgraphSpec::triangle(),
    };
    let largest = *ctx.n_list.last().expect("nonempty n list");
    if let Some(&n) = ctx.n_list.iter().find(|&&n| n < h.vertex_count()) {
        return Err(ConfigError::Invalid(format!("n = {n} is smaller than the pattern")).into());
    }

    struct Sampled {
        n: usize,
        p: f64,
        slice: Slice,
        copies: Vec<f64>,
        vt: Vec<f64>,
        tt: Vec<f64>,
        records: Vec<ergm_core::SampleRecord>,
    }
    let runs: Vec<Sampled> = ctx
        .n_list
        .par_iter()
        .map(|&n| {
            let params = ctx.params(n)?;
            let p = require_subcritical(&params)?;
            let slice = conditioning_slice(ctx, &params, p)?;
            let config = ctx.config.chain.chain_config(derive_seed(ctx.seed, n, 1), ctx.samples, slice.p_tilde);
            let (pairs, nf, pt) = (params.pair_count() as f64, n as f64, slice.p_tilde);
            let mut s = Sampled { n, p, slice, copies: Vec::new(), vt: Vec::new(), tt: Vec::new(), records: Vec::new() };
            run_chain_with(&params, &config, ChainKind::Conditional { edges: s.slice.k }, |rec, g| {
                let (e, v, t) = (rec.edges as f64, rec.two_stars as f64, rec.triangles as f64);
                s.copies.push(pattern_copies(&h, rec, g));
                s.vt.push(v - pairs * (nf - 2.0) * pt * pt);
                s.tt.push(t - pt * v + pt * pt * (nf - 2.0) * e - pt * pt * pt * nf * (nf - 1.0) * (nf - 2.0) / 6.0);
                s.records.push(*rec);
            })?;
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let mut prev_r: Option<(usize, f64)> = None;
    let mut r_points = Vec::new();
    for s in &runs {
        let n = s.n;
        let params = ctx.params(n)?;
        out.streams.extend(s.records.iter().map(|r| StreamRecord::new(n, 0, r)));
        let theory = general_subgraph_moments(&h, &params, s.slice.p_tilde)?;
        let m = two_star_moments(&params, s.slice.p_tilde)?;
        let f_bm = batch_means(&s.copies)?;
        let mut row = Row::new(n);
        slice_row(&mut row, s.p, &s.slice);
        row.theory("mu_f", theory.mean)
            .theory("sigma2_f", theory.variance)
            .theory("mu_vt", m.mu_vt)
            .theory("sigma2_v", m.sigma2_v)
            .theory("mu_tt", m.mu_tt)
            .theory("sigma2_tt", m.sigma2_tt);
        row.empirical("mean_f", measured(&f_bm))
            .empirical("mean_vt", measured(&batch_means(&s.vt)?))
            .empirical("variance_vt", variance_estimate(&s.vt)?)
            .empirical("mean_tt", measured(&batch_means(&s.tt)?))
            .empirical("variance_tt", variance_estimate(&s.tt)?);
        if theory.variance > 0.0 {
            row.empirical("variance_f", variance_estimate(&s.copies)?);
        }
        let r = pearson_correlation(&s.vt, &s.tt).map_err(|e| RunError::Precondition(format!("n = {n}: {e}")))?;
        // Fisher-z standard error, inflated by nothing: samples are thinned.
        let r_se = (1.0 - r * r) / (s.vt.len() as f64 - 3.0).sqrt();
        row.empirical("correlation_vt_tt", Measured::new(r, r_se));
        if let Some((pn, pr)) = prev_r {
            report.checks.push(Check::below(format!("abs_correlation_decreasing_n{pn}_to_n{n}"), r.abs(), pr.abs()));
        }
        if n == largest {
            report.checks.push(Check::below(format!("abs_correlation_n{n}"), r.abs(), CORRELATION_BOUND));
        }
        out.lines.push(format!(
            "n = {n}: k = {}, mean F = {:.3} +- {:.3} (conjectured {:.3}), r(Vt, Tt) = {r:.4}",
            s.slice.k, f_bm.mean, f_bm.standard_error, theory.mean
        ));
        prev_r = Some((n, r));
        r_points.push((n as f64, r.abs()));
        report.rows.push(row);
    }
    let fit = fit_points(&r_points);
    if let Some(fit) = &fit {
        report.rate_fits.push(FitEcho::new("correlation_rate", fit, Some(-0.5), &r_points));
    }
    out.plots.push(rate_plot("correlation_rate", "Correlation of centered counts", "|r|", &r_points, fit.as_ref()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(text).unwrap()
    }

    #[test]
    fn synthetic_inverse_rate_recovers_slope() {
        let points: Vec<(f64, f64)> = [16.0, 24.0, 32.0, 48.0, 64.0].iter().map(|&n| (n, 0.7 / n)).collect();
        let fit = fit_points(&points).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = std::collections::BTreeSet::new();
        for n in [5, 16, 24, 32] {
            for stream in 0..20 {
                assert!(seen.insert(derive_seed(1, n, stream)));
            }
        }
        assert_ne!(derive_seed(1, 16, 0), derive_seed(2, 16, 0));
    }

    #[test]
    fn analyze_reports_region() {
        let c = config("beta = [0.0]\ngraphs = [\"edge\"]\nn = 10");
        let out = run(Command::Analyze, &c, "", &RunOptions::default()).unwrap();
        let region = out.report.region.unwrap();
        assert_eq!(region.p, Some(0.5));
        assert_eq!(region.classification, "DobrushinSubcritical");

        let c = config("beta = [-1.0, 2.0]\ngraphs = [\"edge\", \"triangle\"]\nn = 10");
        let out = run(Command::Analyze, &c, "", &RunOptions::default()).unwrap();
        assert_eq!(out.report.region.unwrap().classification, "NotSubcritical");
    }

    #[test]
    fn moments_edge_only_matches_closed_form() {
        let c = config("beta = [0.3]\ngraphs = [\"edge\"]\nn = 40");
        let opts = RunOptions { p_tilde: Some(0.5), ..Default::default() };
        let out = run(Command::Moments, &c, "", &opts).unwrap();
        let row = out.report.row(40).unwrap();
        assert!((row.theory["mu_v"] - 780.0 * 38.0 * 0.25).abs() < 1e-9);
        assert_eq!(row.theory["mu_vt"], 0.0);
    }

    #[test]
    fn conditional_clt_tiny_n_matches_enumeration() {
        let c = config(
            "beta = [-0.2, 0.1]\ngraphs = [\"edge\", \"two-star\"]\nn = 5\n[chain]\nseed = 3\nsamples = 4000\nthinning_sweeps = 1\nptilde_samples = 2000",
        );
        let out = run(Command::VerifyConditionalClt, &c, "", &RunOptions::default()).unwrap();
        let check = out.report.check("mean_v_within_3se_of_exact_n5").unwrap();
        assert!(check.passed, "{}", check.line());
        assert_eq!(out.streams.len(), 4000);
    }

    #[test]
    fn not_subcritical_is_a_precondition_failure() {
        let c = config("beta = [-1.0, 2.0]\ngraphs = [\"edge\", \"triangle\"]\nn = 10");
        let err = run(Command::VerifyPtilde, &c, "", &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let err = run(Command::Moments, &c, "", &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn n_below_pattern_size_is_a_config_error() {
        let c = config("beta = [0.0, 0.1]\ngraphs = [\"edge\", \"triangle\"]\nn = 2");
        let err = run(Command::Analyze, &c, "", &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn ecdf_ends_at_one() {
        let xs: Vec<f64> = (0..1001).map(|i| i as f64).collect();
        let pts = ecdf_points(&xs, 400);
        assert!(pts.len() <= 402);
        assert_eq!(*pts.last().unwrap(), (1000.0, 1.0));
    }
}
