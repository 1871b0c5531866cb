use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_rate, LogArgument, RateReport};
use super::{excess_risk_on, generate_labeled, Population, RegressionTask};
use crate::distributions::{dre_threshold, pm_threshold};
use crate::error::{Error, Result};
use crate::estimators::{EllRule, LabeledDataset, LocalParams, NeighborSpec, Regressor};
use crate::neighbors::PointCloud;
use crate::rates::{
    standard_k_schedule, standard_target_k_schedule, theoretical_rate, RateSetting, TheoreticalRate,
};
use crate::rng::{derive_seed, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Standard,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    OneSample,
    TwoSample,
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

/// Estimator choice and tuning constants.
///
/// `gamma` defaults to 0.9 times the density-ratio threshold of the task
/// and `rho` to the pseudo-moment threshold of the target design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub kappa_target: f64,
    #[serde(default = "three")]
    pub ell_multiplier: f64,
    #[serde(default)]
    pub normalize_volume: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Replaces the ℓ-NN density estimate of the local schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_override: Option<f64>,
    /// Replaces the neighbour-count schedule of the standard estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_k: Option<usize>,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind, sampling: Sampling) -> Self {
        Self {
            kind,
            sampling,
            name: None,
            kappa: 1.0,
            kappa_target: 1.0,
            ell_multiplier: 3.0,
            normalize_volume: false,
            gamma: None,
            rho: None,
            density_override: None,
            fixed_k: None,
        }
    }

    pub fn local() -> Self {
        Self::new(EstimatorKind::Local, Sampling::OneSample)
    }

    pub fn standard() -> Self {
        Self::new(EstimatorKind::Standard, Sampling::OneSample)
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let kind = match self.kind {
            EstimatorKind::Standard => "standard",
            EstimatorKind::Local => "local",
        };
        match self.sampling {
            Sampling::OneSample => kind.to_string(),
            Sampling::TwoSample => format!("{kind}-two-sample"),
        }
    }

    pub fn log_argument(&self) -> LogArgument {
        match self.sampling {
            Sampling::OneSample => LogArgument::N,
            Sampling::TwoSample => LogArgument::NPlusM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("kappa_target", self.kappa_target),
            ("ell_multiplier", self.ell_multiplier),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("rho", self.rho)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::invalid(name, format!("must be positive, got {v}")));
                }
            }
        }
        if let Some(p) = self.density_override {
            if !(p >= 0.0) {
                return Err(Error::invalid(
                    "density_override",
                    format!("must be nonnegative, got {p}"),
                ));
            }
        }
        if self.fixed_k == Some(0) {
            return Err(Error::invalid("fixed_k", "must be at least 1"));
        }
        Ok(())
    }

    /// `(γ, ρ)` used by the schedules and the theoretical exponents.
    pub fn exponents(&self, task: &RegressionTask) -> Result<(f64, f64)> {
        let gamma = match self.gamma {
            Some(g) => g,
            None => 0.9 * dre_threshold(&task.source, &task.target).map_err(|_| {
                Error::invalid(
                    "gamma",
                    format!(
                        "no closed-form density ratio exponent for a {} source and {} target; set gamma explicitly",
                        task.source.family_name(),
                        task.target.family_name()
                    ),
                )
            })?,
        };
        let rho = self.rho.unwrap_or_else(|| pm_threshold(&task.target));
        Ok((gamma, rho))
    }

    /// Theoretical source exponent, plus the target exponent for two-sample
    /// estimators.
    pub fn theoretical_rates(
        &self,
        task: &RegressionTask,
    ) -> Result<(TheoreticalRate, Option<TheoreticalRate>)> {
        let (gamma, rho) = self.exponents(task)?;
        let (src, tgt) = match self.kind {
            EstimatorKind::Standard => (
                RateSetting::StandardOneSample,
                RateSetting::StandardTwoSampleTarget,
            ),
            EstimatorKind::Local => (
                RateSetting::LocalOneSample,
                RateSetting::LocalTwoSampleTarget,
            ),
        };
        let (beta, d) = (task.beta(), task.dim());
        let source = theoretical_rate(src, beta, d, gamma, rho)?;
        let target = match self.sampling {
            Sampling::OneSample => None,
            Sampling::TwoSample => Some(theoretical_rate(tgt, beta, d, gamma, rho)?),
        };
        Ok((source, target))
    }

    fn local_params(&self, kappa: f64, beta: f64) -> LocalParams<f64> {
        LocalParams {
            kappa,
            beta,
            ell: EllRule::Multiplier(self.ell_multiplier),
            normalize_volume: self.normalize_volume,
            density_override: self.density_override,
        }
    }

    /// Fits the configured regressor on the given samples.
    pub fn build(
        &self,
        task: &RegressionTask,
        source: LabeledDataset<f64>,
        target: Option<LabeledDataset<f64>>,
    ) -> Result<Regressor<f64>> {
        let (gamma, rho) = self.exponents(task)?;
        let (beta, d) = (task.beta(), task.dim());
        let n = source.len();
        let m = target.as_ref().map_or(0, |t| t.len());
        let aux = n + m;
        let source_spec = match self.kind {
            EstimatorKind::Standard => NeighborSpec::Constant(match self.fixed_k {
                Some(k) => k.min(n),
                None if n < 2 => 1,
                None => standard_k_schedule(n, aux, beta, d, gamma, self.kappa)?,
            }),
            EstimatorKind::Local => NeighborSpec::Local(self.local_params(self.kappa, beta)),
        };
        match self.sampling {
            Sampling::OneSample => {
                if target.is_some() {
                    return Err(Error::invalid(
                        "sampling",
                        "one-sample estimator given a target sample",
                    ));
                }
                Regressor::one_sample(source, &source_spec)
            }
            Sampling::TwoSample => {
                let target = target.map(|t| -> Result<_> {
                    let spec = match self.kind {
                        EstimatorKind::Standard => NeighborSpec::Constant(match self.fixed_k {
                            Some(k) => k.min(m),
                            None if m < 2 => 1,
                            None => {
                                standard_target_k_schedule(m, aux, beta, d, rho, self.kappa_target)?
                            }
                        }),
                        EstimatorKind::Local => {
                            NeighborSpec::Local(self.local_params(self.kappa_target, beta))
                        }
                    };
                    Ok((t, spec))
                });
                Regressor::two_sample(Some((source, source_spec)), target.transpose()?)
            }
        }
    }
}

/// Sample sizes: strictly increasing `n`, with optional paired target
/// sizes `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
}

impl SampleGrid {
    pub fn one_sample(n: Vec<usize>) -> Self {
        Self { n, m: None }
    }

    pub fn two_sample(n: Vec<usize>, m: Vec<usize>) -> Self {
        Self { n, m: Some(m) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(Error::DegenerateGrid("the n grid is empty".into()));
        }
        if self.n[0] == 0 {
            return Err(Error::invalid("n_grid", "sample sizes must be positive"));
        }
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("n_grid", "must be strictly increasing"));
        }
        if let Some(m) = &self.m {
            if m.len() != self.n.len() {
                return Err(Error::invalid(
                    "m_grid",
                    format!(
                        "has {} entries but the n grid has {}",
                        m.len(),
                        self.n.len()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// `(n_i, m_i)` pairs, with `m_i = 0` when there is no target grid.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        match &self.m {
            Some(m) => self.n.iter().copied().zip(m.iter().copied()).collect(),
            None => self.n.iter().map(|&n| (n, 0)).collect(),
        }
    }
}

/// Where excess-risk test points come from.
#[derive(Debug, Clone)]
pub enum TestDesign {
    /// Fresh draws from the target design for every replicate.
    Sampled(usize),
    /// A fixed, externally supplied set of points.
    Fixed(Arc<PointCloud<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRisk {
    pub replicate: usize,
    pub seed: u64,
    pub risk: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub n: usize,
    pub m: usize,
    pub replicates: Vec<ReplicateRisk>,
}

impl RiskPoint {
    pub fn from_risks(n: usize, m: usize, risks: &[f64]) -> Self {
        Self {
            n,
            m,
            replicates: risks
                .iter()
                .enumerate()
                .map(|(i, &risk)| ReplicateRisk {
                    replicate: i,
                    seed: 0,
                    risk,
                    wall_time_ms: 0.0,
                })
                .collect(),
        }
    }

    pub fn risks(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.risk).collect()
    }

    pub fn median_risk(&self) -> f64 {
        let mut v = self.risks();
        if v.is_empty() {
            return f64::NAN;
        }
        v.sort_by(f64::total_cmp);
        let h = v.len() / 2;
        if v.len() % 2 == 1 {
            v[h]
        } else {
            0.5 * (v[h - 1] + v[h])
        }
    }
}

/// Monte Carlo excess risks of one estimator over a sample-size grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub estimator: String,
    pub points: Vec<RiskPoint>,
}

impl RiskCurve {
    pub fn new(estimator: impl Into<String>, points: Vec<RiskPoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::invalid(
                "points",
                "sample sizes must be strictly increasing",
            ));
        }
        for p in &points {
            if let Some(r) = p
                .replicates
                .iter()
                .find(|r| !(r.risk >= 0.0) || !r.risk.is_finite())
            {
                return Err(Error::invalid(
                    "risk",
                    format!("must be finite and nonnegative, got {}", r.risk),
                ));
            }
        }
        Ok(Self {
            estimator: estimator.into(),
            points,
        })
    }

    pub fn n_grid(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.n).collect()
    }

    pub fn medians(&self) -> Vec<f64> {
        self.points.iter().map(RiskPoint::median_risk).collect()
    }
}

/// Runs several estimators on identical data.
///
/// For grid point `g` and replicate `r` the stream is derived from
/// `(seed, g, r)` and split, in order, into source data, target data and
/// test points. Jobs run on the current rayon pool; results are assembled
/// in grid and replicate order, so the output does not depend on the
/// number of threads.
pub fn run_paired_experiment(
    task: &RegressionTask,
    estimators: &[EstimatorConfig],
    grid: &SampleGrid,
    replicates: usize,
    test: &TestDesign,
    seed: u64,
) -> Result<Vec<RiskCurve>> {
    task.validate()?;
    grid.validate()?;
    if replicates == 0 {
        return Err(Error::invalid("replicates", "must be at least 1"));
    }
    if estimators.is_empty() {
        return Err(Error::invalid("estimators", "need at least one"));
    }
    for (i, e) in estimators.iter().enumerate() {
        e.validate()?;
        e.exponents(task)?;
        if grid.m.is_some() && e.sampling == Sampling::OneSample {
            return Err(Error::invalid(
                "m_grid",
                format!("{} is a one-sample estimator", e.label()),
            ));
        }
        if estimators[..i].iter().any(|o| o.label() == e.label()) {
            return Err(Error::invalid(
                "estimators",
                format!("duplicate label {}", e.label()),
            ));
        }
    }
    match test {
        TestDesign::Sampled(0) => return Err(Error::invalid("test_count", "must be at least 1")),
        TestDesign::Fixed(p) if p.dim() != task.dim() => {
            return Err(Error::DimensionMismatch {
                expected: task.dim(),
                found: p.dim(),
            })
        }
        _ => {}
    }

    let pairs = grid.pairs();
    let jobs: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|g| (0..replicates).map(move |r| (g, r)))
        .collect();
    // (seed, per-estimator (risk, wall ms))
    type Job = Result<(u64, Vec<(f64, f64)>)>;
    let results: Vec<Job> = jobs
        .par_iter()
        .map(|&(g, r)| {
            let (n, m) = pairs[g];
            run_replicate(task, estimators, n, m, test, seed, g, r).map_err(|e| Error::Experiment {
                n,
                m,
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect();

    let mut points: Vec<Vec<RiskPoint>> = vec![Vec::with_capacity(pairs.len()); estimators.len()];
    let mut results = results.into_iter();
    for &(n, m) in &pairs {
        let mut per_est: Vec<Vec<ReplicateRisk>> =
            vec![Vec::with_capacity(replicates); estimators.len()];
        for r in 0..replicates {
            let (rep_seed, risks) = results.next().expect("one result per job")?;
            for (e, (risk, ms)) in risks.into_iter().enumerate() {
                per_est[e].push(ReplicateRisk {
                    replicate: r,
                    seed: rep_seed,
                    risk,
                    wall_time_ms: ms,
                });
            }
        }
        for (e, reps) in per_est.into_iter().enumerate() {
            points[e].push(RiskPoint {
                n,
                m,
                replicates: reps,
            });
        }
    }
    estimators
        .iter()
        .zip(points)
        .map(|(e, p)| RiskCurve::new(e.label(), p))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_replicate(
    task: &RegressionTask,
    estimators: &[EstimatorConfig],
    n: usize,
    m: usize,
    test: &TestDesign,
    seed: u64,
    g: usize,
    r: usize,
) -> Result<(u64, Vec<(f64, f64)>)> {
    let rep_seed = derive_seed(seed, &[g as u64, r as u64]);
    let mut stream = RngStream::from_seed(rep_seed);
    let mut src_stream = stream.split();
    let mut tgt_stream = stream.split();
    let mut test_stream = stream.split();
    let source = generate_labeled(task, Population::Source, n, &mut src_stream)?;
    let target = if m > 0 {
        Some(generate_labeled(
            task,
            Population::Target,
            m,
            &mut tgt_stream,
        )?)
    } else {
        None
    };
    let points = match test {
        TestDesign::Sampled(t) => Arc::new(task.target.sample(*t, &mut test_stream)?),
        TestDesign::Fixed(p) => p.clone(),
    };
    let mut out = Vec::with_capacity(estimators.len());
    for est in estimators {
        let start = Instant::now();
        let target = match est.sampling {
            Sampling::OneSample => None,
            Sampling::TwoSample => target.clone(),
        };
        let reg = est.build(task, source.clone(), target)?;
        let risk = excess_risk_on(&reg, task, &points)?;
        out.push((risk, start.elapsed().as_secs_f64() * 1e3));
    }
    Ok((rep_seed, out))
}

/// Runs one estimator over the grid and fits its empirical exponent.
///
/// Fails with a degenerate-grid error, before any simulation, when there
/// are fewer than 3 grid points or 5 replicates.
pub fn run_rate_experiment(
    task: &RegressionTask,
    estimator: &EstimatorConfig,
    grid: &SampleGrid,
    replicates: usize,
    test: &TestDesign,
    seed: u64,
) -> Result<(RiskCurve, RateReport)> {
    if grid.len() < 3 || replicates < 5 {
        return Err(Error::DegenerateGrid(format!(
            "rate fitting needs at least 3 grid points and 5 replicates, got {} and {replicates}",
            grid.len()
        )));
    }
    let curve = run_paired_experiment(
        task,
        std::slice::from_ref(estimator),
        grid,
        replicates,
        test,
        seed,
    )?
    .pop()
    .expect("one curve per estimator");
    let fit = fit_rate(&curve, estimator.log_argument())?;
    let (source, target) = estimator.theoretical_rates(task)?;
    Ok((curve, RateReport::new(&fit, source, target)))
}

pub const CSV_HEADER: [&str; 7] = [
    "n",
    "m",
    "replicate",
    "estimator",
    "risk",
    "seed",
    "wall_time_ms",
];

/// Writes curves as tidy CSV, ordered by grid point, replicate, then curve.
///
/// Wall times are written as 0 unless `record_timing` is set, which keeps
/// the file reproducible byte for byte.
pub fn write_risk_csv<W: Write>(
    writer: W,
    curves: &[RiskCurve],
    record_timing: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    let Some(first) = curves.first() else {
        w.flush()?;
        return Ok(());
    };
    for c in curves {
        let same = c.points.len() == first.points.len()
            && c.points
                .iter()
                .zip(&first.points)
                .all(|(a, b)| a.n == b.n && a.m == b.m && a.replicates.len() == b.replicates.len());
        if !same {
            return Err(Error::invalid(
                "curves",
                "curves must share grid and replicates",
            ));
        }
    }
    for (pi, p) in first.points.iter().enumerate() {
        for ri in 0..p.replicates.len() {
            for c in curves {
                let rep = &c.points[pi].replicates[ri];
                let time = if record_timing {
                    format!("{:.3}", rep.wall_time_ms)
                } else {
                    "0".to_string()
                };
                w.write_record([
                    p.n.to_string(),
                    p.m.to_string(),
                    rep.replicate.to_string(),
                    c.estimator.clone(),
                    rep.risk.to_string(),
                    rep.seed.to_string(),
                    time,
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
