use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use shiftknn::distributions::{
    check_dre_numeric, check_mass_properties, check_pseudo_moment, default_r_grid, default_x_grid,
    dre_threshold, family_mass_constants, pm_threshold, DiagnosticReport, DistributionSpec,
    MassPropertyConstants, QuadratureBudget,
};
use shiftknn::rates::{smoothness_exponent, theoretical_rate, RateSetting, Regime};
use shiftknn::risk::{fit_rate, run_paired_experiment, write_risk_csv, RiskCurve};

use crate::config::ExperimentConfig;
use crate::{CmdResult, Failure};

fn io_err(e: std::io::Error) -> Failure {
    Failure::runtime(e)
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::SourceLimited => "source-limited",
        Regime::SmoothnessLimited => "smoothness-limited",
    }
}

/// Parses `family:p1[:p2[:dim]]` (e.g. `exponential:2`, `pareto:3`,
/// `gaussian:0:1`, `uniform:0:1`) or a JSON object.
pub fn parse_family(text: &str) -> anyhow::Result<DistributionSpec> {
    let text = text.trim();
    let spec = if text.starts_with('{') {
        serde_json::from_str(text)?
    } else {
        let mut parts = text.split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .with_context(|| format!("bad number `{p}` in `{text}`"))
            })
            .collect::<anyhow::Result<_>>()?;
        let need = |k: usize| -> anyhow::Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(anyhow!(
                    "`{family}` takes {k} parameter(s), got {} in `{text}`",
                    nums.len()
                ))
            }
        };
        match family.as_str() {
            "exponential" | "exp" => {
                need(1)?;
                DistributionSpec::exponential(nums[0])
            }
            "pareto" => {
                need(1)?;
                DistributionSpec::pareto(nums[0])
            }
            "gaussian" | "normal" => {
                need(2)?;
                DistributionSpec::gaussian(nums[0], nums[1])
            }
            "uniform" => {
                if nums.len() == 3 {
                    if nums[2].fract() != 0.0 || nums[2] < 1.0 {
                        return Err(anyhow!("dimension must be a positive integer in `{text}`"));
                    }
                    DistributionSpec::uniform(nums[0], nums[1], nums[2] as usize)
                } else {
                    need(2)?;
                    DistributionSpec::uniform(nums[0], nums[1], 1)
                }
            }
            other => return Err(anyhow!("unknown family `{other}`")),
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Prints the four theoretical exponents and the gap region.
///
/// Missing `gamma`/`rho` are derived from a source/target pair when one is
/// given: γ is the density-ratio threshold and ρ the pseudo-moment one.
pub fn cmd_rates(
    beta: f64,
    d: usize,
    gamma: Option<f64>,
    rho: Option<f64>,
    pair: Option<(DistributionSpec, DistributionSpec)>,
    out: &mut dyn Write,
) -> CmdResult {
    let gamma = match (gamma, &pair) {
        (Some(g), _) => g,
        (None, Some((s, t))) => dre_threshold(s, t).map_err(Failure::from_core)?,
        (None, None) => {
            return Err(Failure::usage(anyhow!(
                "give --gamma or a --source/--target pair"
            )))
        }
    };
    let rho = match (rho, &pair) {
        (Some(r), _) => r,
        (None, Some((_, t))) => pm_threshold(t),
        (None, None) => {
            return Err(Failure::usage(anyhow!(
                "give --rho or a --source/--target pair"
            )))
        }
    };
    if d == 0 {
        return Err(Failure::usage(anyhow!("d must be positive")));
    }
    let mut rows = Vec::new();
    for setting in RateSetting::ALL {
        let r = theoretical_rate(setting, beta, d, gamma, rho).map_err(Failure::from_core)?;
        rows.push((setting, r));
    }
    let r0 = smoothness_exponent(beta, d);
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "beta = {beta}, d = {d}, gamma = {gamma}, rho = {rho}")?;
        writeln!(out, "smoothness exponent 2β/(2β+d) = {r0:.6}")?;
        writeln!(out, "{:<32} {:>9}  regime", "setting", "rate")?;
        for (s, r) in &rows {
            writeln!(
                out,
                "{:<32} {:>9.6}  {}",
                s.name(),
                r.rate,
                regime_name(r.regime)
            )?;
        }
        writeln!(
            out,
            "local-vs-standard gap region: ({}, {})",
            fmt_num(r0),
            fmt_num(2.0 * beta / d as f64)
        )
    };
    w(out).map_err(io_err)
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v}")
    } else {
        format!("{v:.6}")
    }
}

/// Overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub replicates: Option<usize>,
    pub test_count: Option<usize>,
}

fn prepare(path: &Path, opts: &RunOptions) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let mut cfg = ExperimentConfig::load(path).map_err(Failure::usage)?;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(o) = &opts.output {
        cfg.output_path = Some(o.clone());
    }
    if let Some(r) = opts.replicates {
        cfg.replicates = r;
    }
    if let Some(t) = opts.test_count {
        cfg.test_count = t;
    }
    cfg.validate().map_err(Failure::usage)?;
    if cfg.n_grid.len() < 3 || cfg.replicates < 5 {
        return Err(Failure::usage(anyhow!(
            "degenerate grid: rate fitting needs at least 3 grid points and 5 replicates, got {} and {}",
            cfg.n_grid.len(),
            cfg.replicates
        )));
    }
    let output = cfg.output_path.clone().ok_or_else(|| {
        Failure::usage(anyhow!("no output path: set output_path or pass --output"))
    })?;
    Ok((cfg, output))
}

fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<RiskCurve>, Failure> {
    let test = cfg.test_design().map_err(Failure::usage)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(Failure::runtime)?;
    let grid = cfg.grid();
    let curves = pool
        .install(|| {
            run_paired_experiment(
                &cfg.task,
                &cfg.estimators,
                &grid,
                cfg.replicates,
                &test,
                cfg.seed,
            )
        })
        .map_err(Failure::from_core)?;
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let medians: Vec<String> = curves
            .iter()
            .map(|c| format!("{} {:.6e}", c.estimator, c.points[i].median_risk()))
            .collect();
        eprintln!(
            "n={n} m={}: median risk {}",
            curves[0].points[i].m,
            medians.join(", ")
        );
    }
    Ok(curves)
}

fn write_csv(path: &Path, curves: &[RiskCurve], timing: bool) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let file = File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(Failure::runtime)?;
    write_risk_csv(BufWriter::new(file), curves, timing).map_err(Failure::runtime)
}

struct Summary {
    label: String,
    slope: f64,
    std_err: f64,
    theoretical: f64,
    regime: Regime,
}

fn summarize(cfg: &ExperimentConfig, curves: &[RiskCurve]) -> Result<Vec<Summary>, Failure> {
    cfg.estimators
        .iter()
        .zip(curves)
        .map(|(e, c)| {
            let fit = fit_rate(c, e.log_argument()).map_err(Failure::from_core)?;
            let (src, _) = e.theoretical_rates(&cfg.task).map_err(Failure::from_core)?;
            Ok(Summary {
                label: c.estimator.clone(),
                slope: fit.slope,
                std_err: fit.std_err,
                theoretical: src.rate,
                regime: src.regime,
            })
        })
        .collect()
}

/// Runs the configured estimators, writes the CSV and prints one summary
/// line per estimator.
pub fn cmd_simulate(path: &Path, opts: &RunOptions, out: &mut dyn Write) -> CmdResult {
    let (cfg, output) = prepare(path, opts)?;
    let curves = run(&cfg, opts.threads)?;
    let summaries = summarize(&cfg, &curves)?;
    write_csv(&output, &curves, cfg.record_timing)?;
    for s in &summaries {
        writeln!(
            out,
            "{}: fitted slope {:.4} ± {:.4} (theoretical {:.4}, {})",
            s.label,
            s.slope,
            s.std_err,
            s.theoretical,
            regime_name(s.regime)
        )
        .map_err(io_err)?;
    }
    writeln!(out, "wrote {}", output.display()).map_err(io_err)
}

/// Runs at least two estimators on identical data and prints their slopes
/// side by side, with a paired comparison at the largest sample size.
pub fn cmd_compare(path: &Path, opts: &RunOptions, out: &mut dyn Write) -> CmdResult {
    let (cfg, output) = prepare(path, opts)?;
    if cfg.estimators.len() < 2 {
        return Err(Failure::usage(anyhow!(
            "compare needs at least two estimators in the config"
        )));
    }
    let curves = run(&cfg, opts.threads)?;
    let summaries = summarize(&cfg, &curves)?;
    write_csv(&output, &curves, cfg.record_timing)?;
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            out,
            "{:<24} {:>8} {:>8} {:>11}  regime",
            "estimator", "slope", "stderr", "theoretical"
        )?;
        for s in &summaries {
            writeln!(
                out,
                "{:<24} {:>8.4} {:>8.4} {:>11.4}  {}",
                s.label,
                s.slope,
                s.std_err,
                s.theoretical,
                regime_name(s.regime)
            )?;
        }
        let (a, b) = (&summaries[0], &summaries[1]);
        writeln!(
            out,
            "slope difference {} − {}: {:.4} (joint stderr {:.4})",
            b.label,
            a.label,
            b.slope - a.slope,
            a.std_err.hypot(b.std_err)
        )?;
        let last = curves[0].points.len() - 1;
        let (pa, pb) = (&curves[0].points[last], &curves[1].points[last]);
        let wins = pa
            .replicates
            .iter()
            .zip(&pb.replicates)
            .filter(|(x, y)| y.risk < x.risk)
            .count();
        writeln!(
            out,
            "at n={}: {} has lower risk than {} in {}/{} paired replicates",
            pa.n,
            b.label,
            a.label,
            wins,
            pa.replicates.len()
        )?;
        writeln!(out, "wrote {}", output.display())
    };
    w(out).map_err(io_err)
}

fn print_report(
    out: &mut dyn Write,
    title: &str,
    report: &DiagnosticReport,
) -> std::io::Result<()> {
    writeln!(out, "{title}: {report}")
}

/// Runs the assumption diagnostics for a source/target pair.
///
/// Fails with exit code 1 when any check is violated.
pub fn cmd_check(
    source: &DistributionSpec,
    target: &DistributionSpec,
    gamma: Option<f64>,
    rho: Option<f64>,
    out: &mut dyn Write,
) -> CmdResult {
    for s in [source, target] {
        if s.dim() != 1 {
            return Err(Failure::usage(anyhow!(
                "diagnostics support one-dimensional designs only, got d = {}",
                s.dim()
            )));
        }
    }
    let budget = QuadratureBudget::default();
    let mut violated = false;
    let threshold = dre_threshold(source, target).ok();
    match threshold {
        Some(t) => writeln!(out, "density ratio exponent threshold: {t}"),
        None => writeln!(
            out,
            "density ratio exponent threshold: no closed form for this pair"
        ),
    }
    .map_err(io_err)?;

    let gamma = gamma.or_else(|| threshold.map(|t| if t.is_finite() { 0.9 * t } else { 1.0 }));
    match gamma {
        Some(g) => {
            let rep = check_dre_numeric(source, target, g, &budget).map_err(Failure::from_core)?;
            violated |= rep.is_violated();
            print_report(out, &format!("DRE at gamma = {g}"), &rep).map_err(io_err)?;
        }
        None => writeln!(out, "DRE: skipped (pass --gamma)").map_err(io_err)?,
    }

    let pm = pm_threshold(target);
    let rho = rho.unwrap_or(if pm.is_finite() { 0.9 * pm } else { 1.0 });
    let rep = check_pseudo_moment(target, rho, &budget).map_err(Failure::from_core)?;
    violated |= rep.is_violated();
    print_report(out, &format!("PM at rho = {rho}"), &rep).map_err(io_err)?;

    let designs: Vec<(&str, &DistributionSpec)> = if source == target {
        vec![("source = target", source)]
    } else {
        vec![("source", source), ("target", target)]
    };
    for (label, spec) in designs {
        let (constants, origin) = match family_mass_constants(spec) {
            Some(c) => (c, "family constants"),
            None => (MassPropertyConstants::reference(), "reference constants"),
        };
        let rep = check_mass_properties(
            spec,
            &constants,
            &default_x_grid(spec, 481),
            &default_r_grid(),
        )
        .map_err(Failure::from_core)?;
        violated |= rep.is_violated();
        print_report(
            out,
            &format!(
                "mass properties of {label} {} ({origin} a- = {:.6}, r- = {}, a+ = {:.6}, r+ = {})",
                spec.family_name(),
                constants.a_minus,
                constants.r_minus,
                constants.a_plus,
                constants.r_plus
            ),
            &rep,
        )
        .map_err(io_err)?;
    }
    if violated {
        return Err(Failure::runtime(anyhow!(
            "one or more conditions are violated"
        )));
    }
    Ok(())
}
