//! Command-line front end: argument model, command implementations and
//! report rendering. The `roy` binary only maps outcomes to exit codes.

pub mod args;
pub mod report;
pub mod tables;

use std::fs;
use std::path::Path;

use roy_core::betadist::{f_largest_cdf, power_report, Distribution, ManovaDesign, SeriesResult, Statistic};
use roy_core::montecarlo::{
    build_means_rank1, build_means_rank2, empirical_quantile, simulate_stats, SimulationPlan, GENERATOR,
};
use roy_core::zonal::{kushner_g, zonal_product_g, ZonalStore};
use roy_core::Partition;
use serde::Serialize;

use args::{Cli, Command, DistArgs, PowerArgs, SimulateArgs, StatArg, TablesArgs, TestStat, ZonalDebugArgs};
pub use report::{CliError, Outcome};
use report::finish;
use tables::Status;

/// Parses `argv` and runs the selected command. Help and version requests
/// come back as `Ok` with the text to print.
pub fn run_from_args<I, T>(argv: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(&cli),
        Err(e) if !e.use_stderr() => Ok(Outcome { stdout: e.to_string(), diagnostics: Vec::new(), failure: None }),
        Err(e) => Err(CliError::Usage(e.to_string().trim_start_matches("error: ").trim_end().to_string())),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(dir) = &cli.cache_dir {
        let wanted = ZonalStore::persistent(dir.clone());
        if ZonalStore::init_global(wanted).is_err() && ZonalStore::global().dir() != Some(dir.as_path()) {
            return Err(CliError::Usage("the coefficient cache is already configured".into()));
        }
    }
    match &cli.command {
        Command::Dist(a) => dist(cli, a),
        Command::Power(a) => power(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Tables(a) => tables_cmd(cli, a),
        Command::ZonalDebug(a) => zonal_debug(cli, a),
        Command::Replay(a) => replay(&a.report),
    }
}

fn statistic(s: TestStat) -> Statistic {
    match s {
        TestStat::Roy => Statistic::Roy,
        TestStat::Pillai => Statistic::Pillai,
    }
}

fn convergence_note(what: String, r: &SeriesResult, diagnostics: &mut Vec<String>) {
    if !r.converged {
        diagnostics.push(format!(
            "{what}: series not converged after K = {}, t = {} (last block {:.3e})",
            r.k_terms_used, r.t_terms_used, r.last_block_magnitude
        ));
    }
}

fn convergence_failure(diagnostics: &[String]) -> Option<CliError> {
    let count = diagnostics.iter().filter(|d| d.contains("not converged")).count();
    (count > 0).then(|| CliError::Convergence(format!("{count} evaluation(s) did not converge")))
}

#[derive(Debug, Serialize)]
struct DistRow {
    statistic: StatArg,
    kind: &'static str,
    x: f64,
    probability: f64,
    k_terms_used: u32,
    t_terms_used: u32,
    last_block_magnitude: f64,
    exact_t_termination: bool,
    converged: bool,
}

impl DistRow {
    fn new(statistic: StatArg, kind: &'static str, x: f64, probability: f64, r: &SeriesResult) -> Self {
        DistRow {
            statistic,
            kind,
            x,
            probability,
            k_terms_used: r.k_terms_used,
            t_terms_used: r.t_terms_used,
            last_block_magnitude: r.last_block_magnitude,
            exact_t_termination: r.exact_t_termination,
            converged: r.converged,
        }
    }
}

fn dist(cli: &Cli, a: &DistArgs) -> Result<Outcome, CliError> {
    let design = a.design.design()?;
    let control = a.control.control(&design)?;
    let base = match a.stat {
        StatArg::Pillai => Statistic::Pillai,
        StatArg::Roy | StatArg::F => Statistic::Roy,
    };
    let dist = Distribution::new(base, &design, &control)?;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for &x in &a.at {
        let r = match a.stat {
            StatArg::F => f_largest_cdf(x, &design, &control)?,
            _ => dist.cdf(x)?,
        };
        convergence_note(format!("cdf at {x}"), &r, &mut diagnostics);
        rows.push(DistRow::new(a.stat, "cdf", x, r.value, &r));
    }
    for &p in &a.quantile {
        let root = dist.quantile(p)?;
        let r = dist.cdf(root)?;
        convergence_note(format!("quantile {p}"), &r, &mut diagnostics);
        let x = match a.stat {
            StatArg::F => root / (1.0 - root),
            _ => root,
        };
        rows.push(DistRow::new(a.stat, "quantile", x, p, &r));
    }
    let failure = convergence_failure(&diagnostics);
    finish(cli, &rows, diagnostics, failure)
}

#[derive(Debug, Serialize)]
struct PowerRow {
    statistic: TestStat,
    m: usize,
    n_h: usize,
    n_e: usize,
    alpha: f64,
    critical_value: f64,
    power: f64,
    k_terms_used: u32,
    converged: bool,
}

fn parse_sweep(s: &str) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let bad = || CliError::Usage(format!("--sweep expects a..b with a <= b, got {s:?}"));
    let (a, b) = s.trim_start_matches("m=").split_once("..").ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn power(cli: &Cli, a: &PowerArgs) -> Result<Outcome, CliError> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha {} outside (0, 1)", a.alpha)));
    }
    let designs: Vec<ManovaDesign> = match &a.sweep {
        Some(s) => parse_sweep(s)?.map(|m| a.design.design_with_m(Some(m))).collect::<Result<_, _>>()?,
        None => vec![a.design.design()?],
    };
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for design in &designs {
        let control = a.control.control(design)?;
        let report = power_report(design, a.alpha, statistic(a.stat), &control)?;
        convergence_note(format!("power at m = {}", design.m()), &report.alternative, &mut diagnostics);
        rows.push(PowerRow {
            statistic: a.stat,
            m: design.m(),
            n_h: design.n_h(),
            n_e: design.n_e(),
            alpha: a.alpha,
            critical_value: report.critical_value,
            power: report.power,
            k_terms_used: report.alternative.k_terms_used,
            converged: report.alternative.converged,
        });
    }
    let failure = convergence_failure(&diagnostics);
    finish(cli, &rows, diagnostics, failure)
}

#[derive(Debug, Serialize)]
struct SimRow {
    statistic: TestStat,
    probability: f64,
    empirical: f64,
    exact: Option<f64>,
    difference: Option<f64>,
}

#[derive(Serialize)]
struct SampleRecord {
    replicate: usize,
    l1: f64,
    #[serde(rename = "V")]
    v: f64,
}

#[derive(Serialize)]
struct SampleMetadata<'a> {
    generator: &'static str,
    seed: u64,
    replications: usize,
    n_h: usize,
    n_e: usize,
    theta: &'a [f64],
    plan: &'a SimulationPlan,
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<Outcome, CliError> {
    if a.replications == 0 {
        return Err(CliError::Usage("--R must be positive".into()));
    }
    if let Some(p) = a.quantiles.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(CliError::Usage(format!("quantile probability {p} outside (0, 1)")));
    }
    let design = a.design.design()?;
    let sizes = design
        .group_sizes()
        .ok_or_else(|| CliError::Usage("simulation needs --groups and --ni".into()))?
        .to_vec();
    let m = design.m();
    let means = match *design.theta() {
        [] => vec![vec![0.0; m]; sizes.len()],
        [t1] => build_means_rank1(t1, &sizes, m)?,
        [t1, t2] => build_means_rank2(t1, t2, &sizes, m).map_err(|e| CliError::Usage(e.to_string()))?,
        _ => return Err(CliError::Usage("simulation supports noncentrality of rank at most 2".into())),
    };
    let plan = SimulationPlan::new(m, sizes, means, a.replications, a.seed)
        .map_err(|e| CliError::Usage(format!("invalid simulation plan: {e}")))?;
    let samples = simulate_stats(&plan)?;
    write_samples(&a.out, &samples)?;
    let meta = SampleMetadata {
        generator: GENERATOR,
        seed: a.seed,
        replications: a.replications,
        n_h: design.n_h(),
        n_e: design.n_e(),
        theta: design.theta(),
        plan: &plan,
    };
    let meta_json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Domain(e.to_string()))?;
    fs::write(a.out.with_extension("json"), meta_json + "\n").map_err(|e| CliError::Domain(e.to_string()))?;

    let control = a.control.control(&design)?;
    let l1: Vec<f64> = samples.iter().map(|s| s.l1).collect();
    let v: Vec<f64> = samples.iter().map(|s| s.v).collect();
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (stat, values) in [(TestStat::Roy, &l1), (TestStat::Pillai, &v)] {
        let dist = Distribution::new(statistic(stat), &design, &control)?;
        for &p in &a.quantiles {
            let empirical = empirical_quantile(values, p)?;
            let exact = match dist.quantile(p) {
                Ok(q) => Some(q),
                Err(e) => {
                    diagnostics.push(format!("{stat:?} quantile {p} has no exact value: {e}"));
                    None
                }
            };
            rows.push(SimRow { statistic: stat, probability: p, empirical, exact, difference: exact.map(|q| empirical - q) });
        }
    }
    finish(cli, &rows, diagnostics, None)
}

fn write_samples(path: &Path, samples: &[roy_core::montecarlo::Sample]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Domain(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for (replicate, s) in samples.iter().enumerate() {
        w.serialize(SampleRecord { replicate, l1: s.l1, v: s.v }).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Domain(e.to_string()))
}

fn tables_cmd(cli: &Cli, a: &TablesArgs) -> Result<Outcome, CliError> {
    let rows = tables::compute(a.table)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| {
            let published = r.published.map_or_else(|| "-".to_string(), |p| p.to_string());
            format!("m = {}, theta = {}, {} {}: computed {} vs published {published}", r.m, r.theta, r.statistic, r.quantity, r.computed)
        })
        .collect();
    let failure = (!failed.is_empty()).then(|| CliError::Mismatch(format!("{} row(s) outside tolerance", failed.len())));
    finish(cli, &rows, failed, failure)
}

#[derive(Debug, Serialize)]
struct ZonalRow {
    kind: &'static str,
    kappa: String,
    tau: String,
    basis: String,
    coefficient: String,
    kushner: Option<String>,
}

fn parse_partition(s: &str) -> Result<Partition, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("bad partition {s:?}: {e}")))
}

fn zonal_debug(cli: &Cli, a: &ZonalDebugArgs) -> Result<Outcome, CliError> {
    if a.m == 0 {
        return Err(CliError::Usage("--m must be positive".into()));
    }
    let mut rows = Vec::new();
    if let (Some(k), Some(s)) = (&a.kappa, &a.tau) {
        let (kappa, tau) = (parse_partition(k)?, parse_partition(s)?);
        let row_factor = match (kappa.len(), tau.len()) {
            (1, _) => Some((kappa.weight(), &tau)),
            (_, 1) => Some((tau.weight(), &kappa)),
            _ => None,
        };
        for (delta, g) in zonal_product_g(&kappa, &tau, a.m)? {
            let kushner = match row_factor {
                Some((w, other)) => Some(kushner_g(w, other, &delta)?.to_string()),
                None => None,
            };
            rows.push(ZonalRow {
                kind: "product",
                kappa: kappa.to_string(),
                tau: tau.to_string(),
                basis: delta.to_string(),
                coefficient: g.to_string(),
                kushner,
            });
        }
    } else {
        let k = a.k.ok_or_else(|| CliError::Usage("--k is required without --kappa/--tau".into()))?;
        let table = ZonalStore::global().table(k, a.m);
        for (kappa, mu, c) in table.entries() {
            rows.push(ZonalRow {
                kind: "zonal",
                kappa: kappa.to_string(),
                tau: String::new(),
                basis: format!("E({mu})"),
                coefficient: c.to_string(),
                kushner: None,
            });
        }
    }
    finish(cli, &rows, Vec::new(), None)
}

fn replay(path: &Path) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not JSON: {e}", path.display())))?;
    let config = value.get("config").cloned().ok_or_else(|| CliError::Usage("report has no config".into()))?;
    let cli: Cli = serde_json::from_value(config).map_err(|e| CliError::Usage(format!("bad embedded config: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a replay report cannot be replayed".into()));
    }
    run(&cli)
}
