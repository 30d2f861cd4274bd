//! Monte Carlo harness over transmit/decode trials and critical-phase fits.
//!
//! Series are indexed by iteration `l`: `c1[l]` is the deg-1 CN count after
//! `l` iterations and `lde[l]` the number of VNs resolved in iteration `l`
//! (so `lde[0] = 0`), both divided by `M`. Trials of unequal length are
//! zero-padded on the right.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{residual_graph, transmit};
use crate::decoders::{bp, ppd, DecoderKind, DecoderTrace};
use crate::ensemble::{BaseMatrix, CoupledEnsembleSpec, TannerGraph, Variant};
use crate::plateau::{self, Plateau};
use crate::seed::{self, TAG_LIFT, TAG_TRANSMIT};
use crate::{Error, Result};

/// BP iteration cap used by the harness; decoding always ends long before.
pub const BP_MAX_ITERS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub spec: CoupledEnsembleSpec,
    /// VNs per chain position.
    pub m: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub decoder: DecoderKind,
    /// Reuse the graph of trial 0 for every trial.
    pub fixed_graph: bool,
}

impl TrialConfig {
    pub fn new(spec: CoupledEnsembleSpec, m: usize, epsilon: f64, trials: usize, base_seed: u64) -> Self {
        TrialConfig {
            spec,
            m,
            epsilon,
            trials,
            base_seed,
            decoder: DecoderKind::Ppd,
            fixed_graph: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon {} outside [0,1]", self.epsilon)));
        }
        if self.m == 0 || self.m % self.spec.k() != 0 {
            return Err(Error::InvalidParameter(format!(
                "M = {} must be a positive multiple of k = {}",
                self.m,
                self.spec.k()
            )));
        }
        Ok(())
    }
}

/// Builds graphs for one configuration.
pub struct GraphSource {
    spec: CoupledEnsembleSpec,
    m: usize,
    base: Option<BaseMatrix>,
}

impl GraphSource {
    pub fn new(spec: &CoupledEnsembleSpec, m: usize) -> Result<Self> {
        let base = match spec.variant {
            Variant::RandomU => None,
            _ => Some(BaseMatrix::build(spec)?),
        };
        Ok(GraphSource {
            spec: spec.clone(),
            m,
            base,
        })
    }

    pub fn graph(&self, seed: u64) -> Result<TannerGraph> {
        match &self.base {
            Some(b) => TannerGraph::lift(b, self.m / self.spec.k(), seed),
            None => TannerGraph::random_u(&self.spec, self.m, seed),
        }
    }
}

/// Outcome of one transmit/decode trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub c1: Vec<f64>,
    pub lde: Vec<f64>,
    pub success: bool,
    pub upper_bound_ok: bool,
    pub remaining: usize,
}

impl TrialRecord {
    pub fn from_trace(trace: &DecoderTrace, m: usize) -> Self {
        let norm = m as f64;
        // an iteration that resolves nothing started without deg-1 CNs
        let active = trace.active_iterations();
        let its = &trace.iterations[..active];
        let mut c1: Vec<f64> = its.iter().map(|r| r.deg1_count as f64 / norm).collect();
        c1.push(0.0);
        let mut lde = vec![0.0];
        lde.extend(its.iter().map(|r| r.resolved.len() as f64 / norm));
        TrialRecord {
            c1,
            lde,
            success: trace.is_success(),
            upper_bound_ok: trace.upper_bound_holds(),
            remaining: trace.remaining.len(),
        }
    }
}

fn decode(cfg: &TrialConfig, source: &GraphSource, fixed: Option<&TannerGraph>, i: u64) -> Result<DecoderTrace> {
    let owned;
    let graph = match fixed {
        Some(g) => g,
        None => {
            owned = source.graph(seed::derive(cfg.base_seed, &[i, TAG_LIFT]))?;
            &owned
        }
    };
    let pattern = transmit(graph.vn_count(), cfg.epsilon, seed::derive(cfg.base_seed, &[i, TAG_TRANSMIT]))?;
    let residual = residual_graph(graph, &pattern)?;
    Ok(match cfg.decoder {
        DecoderKind::Ppd => ppd(&residual),
        DecoderKind::Bp => bp(&residual, BP_MAX_ITERS),
    })
}

/// Runs `f` on every trial index on `workers` threads (all available when
/// `None`), returning results in trial order.
fn for_trials<T: Send>(
    trials: usize,
    workers: Option<usize>,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let run = || (0..trials as u64).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

pub fn simulate_records(cfg: &TrialConfig, workers: Option<usize>) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let source = GraphSource::new(&cfg.spec, cfg.m)?;
    let fixed = if cfg.fixed_graph {
        Some(source.graph(seed::derive(cfg.base_seed, &[0, TAG_LIFT]))?)
    } else {
        None
    };
    for_trials(cfg.trials, workers, |i| {
        Ok(TrialRecord::from_trace(&decode(cfg, &source, fixed.as_ref(), i)?, cfg.m))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialBatchResult {
    pub config: TrialConfig,
    pub mean_c1: Vec<f64>,
    pub var_c1: Vec<f64>,
    pub mean_lde: Vec<f64>,
    pub var_lde: Vec<f64>,
    /// Full covariance matrix of the `lde` series.
    pub cov_lde: Vec<Vec<f64>>,
    pub successes: usize,
    pub upper_bound_violations: usize,
    pub mean_remaining: f64,
}

fn padded(v: &[f64], len: usize) -> impl Iterator<Item = f64> + '_ {
    v.iter().copied().chain(std::iter::repeat(0.0)).take(len)
}

impl TrialBatchResult {
    /// Aggregates trial records in the order given.
    pub fn from_records(config: TrialConfig, records: &[TrialRecord]) -> Result<Self> {
        let n = records.len();
        if n < 2 {
            return Err(Error::InvalidParameter("at least two trials are needed for variances".into()));
        }
        let len = records.iter().map(|r| r.c1.len().max(r.lde.len())).max().unwrap_or(0);
        let nf = n as f64;
        let mut mean_c1 = vec![0.0; len];
        let mut mean_lde = vec![0.0; len];
        for r in records {
            for (m, x) in mean_c1.iter_mut().zip(padded(&r.c1, len)) {
                *m += x;
            }
            for (m, x) in mean_lde.iter_mut().zip(padded(&r.lde, len)) {
                *m += x;
            }
        }
        mean_c1.iter_mut().chain(mean_lde.iter_mut()).for_each(|m| *m /= nf);
        let mut var_c1 = vec![0.0; len];
        let mut cov = vec![vec![0.0; len]; len];
        let mut d = vec![0.0; len];
        for r in records {
            for ((v, x), m) in var_c1.iter_mut().zip(padded(&r.c1, len)).zip(&mean_c1) {
                *v += (x - m) * (x - m);
            }
            for ((di, x), m) in d.iter_mut().zip(padded(&r.lde, len)).zip(&mean_lde) {
                *di = x - m;
            }
            for a in 0..len {
                if d[a] == 0.0 {
                    continue;
                }
                let row = &mut cov[a];
                for b in a..len {
                    row[b] += d[a] * d[b];
                }
            }
        }
        for a in 0..len {
            for b in a..len {
                cov[a][b] /= nf - 1.0;
                cov[b][a] = cov[a][b];
            }
        }
        var_c1.iter_mut().for_each(|v| *v /= nf - 1.0);
        Ok(TrialBatchResult {
            config,
            var_lde: (0..len).map(|a| cov[a][a]).collect(),
            mean_c1,
            var_c1,
            mean_lde,
            cov_lde: cov,
            successes: records.iter().filter(|r| r.success).count(),
            upper_bound_violations: records.iter().filter(|r| !r.upper_bound_ok).count(),
            mean_remaining: records.iter().map(|r| r.remaining as f64).sum::<f64>() / nf,
        })
    }

    pub fn len(&self) -> usize {
        self.mean_lde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_lde.is_empty()
    }

    pub fn trials(&self) -> usize {
        self.config.trials
    }

    /// Standard error of the mean `lde` at each iteration.
    pub fn se_lde(&self) -> Vec<f64> {
        let n = self.trials() as f64;
        self.var_lde.iter().map(|v| (v / n).sqrt()).collect()
    }

    /// Mean of `lde` over a window and its standard error, using the full
    /// covariance matrix.
    pub fn window_mean_lde(&self, range: std::ops::Range<usize>) -> (f64, f64) {
        let w = range.len() as f64;
        let mean = self.mean_lde[range.clone()].iter().sum::<f64>() / w;
        let var: f64 = range
            .clone()
            .map(|a| range.clone().map(|b| self.cov_lde[a][b]).sum::<f64>())
            .sum::<f64>()
            / (w * w);
        (mean, (var / self.trials() as f64).sqrt())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,mean_c1,var_c1,mean_L_delta_eps,var_L_delta_eps\n");
        for l in 0..self.len() {
            out.push_str(&format!(
                "{l},{},{},{},{}\n",
                self.mean_c1[l], self.var_c1[l], self.mean_lde[l], self.var_lde[l]
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn run_trials(cfg: &TrialConfig, workers: Option<usize>) -> Result<TrialBatchResult> {
    if cfg.trials < 2 {
        return Err(Error::InvalidParameter("at least two trials are needed for variances".into()));
    }
    let records = simulate_records(cfg, workers)?;
    TrialBatchResult::from_records(cfg.clone(), &records)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest `|tau - tau'|` entering the covariance fit. Lags are also cut
    /// where the correlation with the anchor drops below 1/e.
    pub max_lag_tau: f64,
    /// Anchor positions inside the plateau, as fractions of its length.
    pub anchors: [f64; 2],
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_lag_tau: 1.0,
            anchors: [0.25, 0.75],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaFit {
    pub anchor: usize,
    pub theta: f64,
    pub points: usize,
    /// Non-positive covariances left out of the log fit.
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPhaseFit {
    pub window_start: usize,
    pub window_end: usize,
    pub tau_start: f64,
    pub tau_end: f64,
    pub epsilon_star: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Scale-free ratios: plateau mean of E/sqrt(Var) over sqrt(M)(eps* - eps).
    pub alpha_c1: f64,
    pub alpha_delta_eps: f64,
    /// Plateau means of E/sqrt(Var) as measured.
    pub alpha_c1_raw: f64,
    pub alpha_delta_eps_raw: f64,
    pub theta: f64,
    pub theta_anchors: Vec<ThetaFit>,
    pub b: f64,
    pub sigma: f64,
    pub c1_plateau: f64,
}

fn mean_ratio(mean: &[f64], var: &[f64], p: &Plateau) -> f64 {
    p.range().map(|i| mean[i] / var[i].sqrt()).sum::<f64>() / p.len() as f64
}

/// Least-squares decay rate of `log Cov[lde(a), lde(b)]` against
/// `|tau_a - tau_b|` for `b` in the window, `b != a`.
pub fn fit_theta(batch: &TrialBatchResult, window: std::ops::Range<usize>, anchor: usize, gap: f64, max_lag_tau: f64) -> ThetaFit {
    let mut pts = Vec::new();
    let mut excluded = 0;
    let va = batch.var_lde[anchor];
    // Walk outwards on each side and stop once the correlation with the
    // anchor falls below 1/e.
    let sides: [Box<dyn Iterator<Item = usize>>; 2] = [
        Box::new((window.start..anchor).rev()),
        Box::new(anchor + 1..window.end),
    ];
    for side in sides {
        for b in side {
            let lag = (b as f64 - anchor as f64).abs() * gap;
            if lag > max_lag_tau {
                break;
            }
            let c = batch.cov_lde[anchor][b];
            if c <= 0.0 {
                excluded += 1;
                break;
            }
            if c / (va * batch.var_lde[b]).sqrt() < (-1.0f64).exp() {
                break;
            }
            pts.push((lag, c.ln()));
        }
    }
    pts.push((0.0, va.ln()));
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    ThetaFit {
        anchor,
        theta: if pts.len() >= 2 && sxx > 0.0 { -sxy / sxx } else { f64::NAN },
        points: pts.len(),
        excluded,
    }
}

pub fn fit_critical_phase(batch: &TrialBatchResult, epsilon_star: f64, opts: FitOptions) -> Result<CriticalPhaseFit> {
    let gap = epsilon_star - batch.config.epsilon;
    if gap <= 0.0 {
        return Err(Error::NoPlateau(format!(
            "epsilon {} is not below eps* {epsilon_star}",
            batch.config.epsilon
        )));
    }
    // the critical phase is where both the mean and the variance are flat;
    // at its end the spread of decoding times inflates the variance first
    let p = plateau::detect(&batch.mean_lde, plateau::DEFAULT_BAND)
        .ok_or_else(|| Error::NoPlateau("mean L*delta eps has no plateau".into()))?;
    let p = plateau::narrow(&p, &batch.mean_lde, &batch.var_lde, plateau::VARIANCE_BAND);
    let pc = plateau::detect(&batch.mean_c1, plateau::DEFAULT_BAND)
        .ok_or_else(|| Error::NoPlateau("mean c1 has no plateau".into()))?;
    let pc = plateau::narrow(&pc, &batch.mean_c1, &batch.var_c1, plateau::VARIANCE_BAND);
    let m = batch.config.m as f64;
    let gamma = p.mean / gap;
    let delta = m * p.mean_of(&batch.var_lde);
    let theta_anchors: Vec<ThetaFit> = opts
        .anchors
        .iter()
        .map(|f| {
            let a = p.start + ((p.len() - 1) as f64 * f).round() as usize;
            fit_theta(batch, p.range(), a, gap, opts.max_lag_tau)
        })
        .collect();
    let finite: Vec<f64> = theta_anchors.iter().map(|t| t.theta).filter(|t| t.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Numerical("covariance fit had too few positive points".into()));
    }
    let theta = finite.iter().sum::<f64>() / finite.len() as f64;
    let b = theta * delta / m;
    let scale = m.sqrt() * gap;
    let alpha_c1_raw = mean_ratio(&batch.mean_c1, &batch.var_c1, &pc);
    let alpha_delta_eps_raw = mean_ratio(&batch.mean_lde, &batch.var_lde, &p);
    Ok(CriticalPhaseFit {
        window_start: p.start,
        window_end: p.end,
        tau_start: p.start as f64 * gap,
        tau_end: p.end as f64 * gap,
        epsilon_star,
        gamma,
        delta,
        alpha_c1: alpha_c1_raw / scale,
        alpha_delta_eps: alpha_delta_eps_raw / scale,
        alpha_c1_raw,
        alpha_delta_eps_raw,
        theta,
        theta_anchors,
        b,
        sigma: (2.0 * b).sqrt(),
        c1_plateau: pc.mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerResult {
    pub errors: usize,
    pub trials: usize,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Wilson score interval at 95%.
pub fn wilson(errors: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Frame-error rate: a frame fails when decoding stalls with erasures left.
pub fn fer_measure(cfg: &TrialConfig, workers: Option<usize>) -> Result<FerResult> {
    cfg.validate()?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let source = GraphSource::new(&cfg.spec, cfg.m)?;
    let fixed = if cfg.fixed_graph {
        Some(source.graph(seed::derive(cfg.base_seed, &[0, TAG_LIFT]))?)
    } else {
        None
    };
    let fails = for_trials(cfg.trials, workers, |i| {
        Ok(!decode(cfg, &source, fixed.as_ref(), i)?.is_success())
    })?;
    let errors = fails.iter().filter(|&&f| f).count();
    let (lower, upper) = wilson(errors, cfg.trials);
    Ok(FerResult {
        errors,
        trials: cfg.trials,
        rate: errors as f64 / cfg.trials as f64,
        lower,
        upper,
    })
}

/// Outcome of decoding the same residual graphs with PPD, BP and SPD.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub cases: usize,
    /// Cases where PPD and BP resolved different sets in some iteration.
    pub mismatches: usize,
    /// SPD runs whose terminal residual differs from PPD's.
    pub spd_mismatches: usize,
    pub spd_runs: usize,
    /// Traces (PPD or BP) resolving more VNs than deg-1 CNs in an iteration.
    pub upper_bound_violations: usize,
    pub first_mismatch: Option<u64>,
}

impl EquivalenceReport {
    pub fn all_hold(&self) -> bool {
        self.mismatches == 0 && self.spd_mismatches == 0 && self.upper_bound_violations == 0
    }

    fn merge(mut self, other: EquivalenceReport) -> Self {
        self.cases += other.cases;
        self.mismatches += other.mismatches;
        self.spd_mismatches += other.spd_mismatches;
        self.spd_runs += other.spd_runs;
        self.upper_bound_violations += other.upper_bound_violations;
        self.first_mismatch = self.first_mismatch.or(other.first_mismatch);
        self
    }
}

/// Runs PPD and BP (and `spd_runs` seeded SPD runs) on one residual graph.
pub fn audit_residual(residual: &crate::channel::ResidualGraph, case: u64, spd_runs: usize, spd_seed: u64) -> EquivalenceReport {
    let p = ppd(residual);
    let b = bp(residual, BP_MAX_ITERS);
    let same = p.resolved_sets() == b.resolved_sets() && p.remaining == b.remaining;
    let spd_bad = (0..spd_runs as u64)
        .filter(|&k| crate::decoders::spd(residual, seed::derive(spd_seed, &[case, k])).remaining != p.remaining)
        .count();
    EquivalenceReport {
        cases: 1,
        mismatches: usize::from(!same),
        spd_mismatches: spd_bad,
        spd_runs,
        upper_bound_violations: usize::from(!p.upper_bound_holds()) + usize::from(!b.upper_bound_holds()),
        first_mismatch: (!same).then_some(case),
    }
}

/// Equivalence audit over `cfg.trials` random transmissions.
pub fn equivalence_trials(cfg: &TrialConfig, spd_runs: usize, workers: Option<usize>) -> Result<EquivalenceReport> {
    cfg.validate()?;
    let source = GraphSource::new(&cfg.spec, cfg.m)?;
    let reports = for_trials(cfg.trials, workers, |i| {
        let graph = source.graph(seed::derive(cfg.base_seed, &[i, TAG_LIFT]))?;
        let pattern = transmit(graph.vn_count(), cfg.epsilon, seed::derive(cfg.base_seed, &[i, TAG_TRANSMIT]))?;
        let residual = residual_graph(&graph, &pattern)?;
        Ok(audit_residual(&residual, i, spd_runs, cfg.base_seed))
    })?;
    Ok(reports.into_iter().fold(EquivalenceReport::default(), EquivalenceReport::merge))
}

/// Equivalence audit over every erasure pattern of a small graph.
pub fn equivalence_exhaustive(graph: &TannerGraph, spd_runs: usize, base_seed: u64) -> Result<EquivalenceReport> {
    let n = graph.vn_count();
    if n > 24 {
        return Err(Error::InvalidParameter(format!("2^{n} patterns is too many to enumerate")));
    }
    let reports = for_trials(1 << n, None, |bits| {
        let mask = (0..n).map(|v| bits >> v & 1 == 1).collect();
        let pattern = crate::channel::ErasurePattern { mask, epsilon: 0.5 };
        let residual = residual_graph(graph, &pattern)?;
        Ok(audit_residual(&residual, bits, spd_runs, base_seed))
    })?;
    Ok(reports.into_iter().fold(EquivalenceReport::default(), EquivalenceReport::merge))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64, trials: usize) -> TrialConfig {
        TrialConfig::new(CoupledEnsembleSpec::protograph(3, 6, 6).unwrap(), 40, eps, trials, 7)
    }

    #[test]
    fn identical_traces_have_zero_variance() {
        let mut c = cfg(0.4, 2);
        c.fixed_graph = true;
        let rec = simulate_records(&c, Some(1)).unwrap();
        let b = TrialBatchResult::from_records(c, &[rec[0].clone(), rec[0].clone()]).unwrap();
        assert!(b.var_lde.iter().chain(&b.var_c1).all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let c = cfg(0.42, 24);
        let a = run_trials(&c, Some(1)).unwrap();
        let b = run_trials(&c, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), run_trials(&c, None).unwrap().to_json().unwrap());
        for i in 0..a.len() {
            assert_eq!(a.cov_lde[i][i], a.var_lde[i]);
        }
        assert_eq!(a.upper_bound_violations, 0);
        assert!(run_trials(&cfg(0.4, 1), None).is_err());
    }

    #[test]
    fn series_sum_to_erased_count() {
        let c = cfg(0.3, 3);
        let rec = simulate_records(&c, None).unwrap();
        for r in &rec {
            assert_eq!(r.lde[0], 0.0);
            assert_eq!(*r.c1.last().unwrap(), 0.0);
            assert_eq!(r.c1.len(), r.lde.len());
        }
    }

    #[test]
    fn fer_extremes() {
        assert_eq!(fer_measure(&cfg(0.0, 20), None).unwrap().rate, 0.0);
        assert_eq!(fer_measure(&cfg(1.0, 20), None).unwrap().rate, 1.0);
    }

    #[test]
    fn wilson_interval() {
        let (lo, hi) = wilson(0, 20);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.1 && hi < 0.2);
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn equivalence_audits_pass() {
        let r = equivalence_trials(&cfg(0.45, 10), 2, None).unwrap();
        assert!(r.all_hold() && r.cases == 10 && r.spd_runs == 20, "{r:?}");
        let spec = CoupledEnsembleSpec::protograph(3, 6, 1).unwrap();
        let g = GraphSource::new(&spec, 2).unwrap().graph(3).unwrap();
        let r = equivalence_exhaustive(&g, 1, 0).unwrap();
        assert_eq!(r.cases, 1 << g.vn_count());
        assert!(r.all_hold());
    }

    #[test]
    fn bp_and_ppd_batches_agree() {
        let mut c = cfg(0.45, 6);
        let a = run_trials(&c, None).unwrap();
        c.decoder = DecoderKind::Bp;
        let b = run_trials(&c, None).unwrap();
        assert_eq!(a.mean_lde, b.mean_lde);
        assert_eq!(a.mean_c1, b.mean_c1);
    }
}
