use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use roy_core::betadist::{ManovaDesign, SeriesControl};
use serde::{Deserialize, Serialize};

use crate::report::CliError;

/// Exact distributions, quantiles and powers of MANOVA test statistics.
#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(name = "roy", version)]
pub struct Cli {
    /// Directory for persisted coefficient tables (overrides ROY_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate a CDF or its quantiles.
    Dist(DistArgs),
    /// Critical value and power of a level-alpha test.
    Power(PowerArgs),
    /// Simulate the MANOVA model and compare empirical with exact quantiles.
    Simulate(SimulateArgs),
    /// Recompute published tables and compare.
    Tables(TablesArgs),
    /// Print zonal polynomials in the elementary basis, or product coefficients.
    ZonalDebug(ZonalDebugArgs),
    /// Re-run the configuration embedded in a JSON report.
    Replay(ReplayArgs),
}

/// Degrees of freedom, either directly or through groups, plus noncentrality.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DesignArgs {
    /// Dimension of the observations.
    #[arg(long)]
    pub m: Option<usize>,

    /// Hypothesis degrees of freedom.
    #[arg(long = "nH", alias = "nh", requires = "n_e", conflicts_with_all = ["groups", "ni"])]
    pub n_h: Option<usize>,

    /// Error degrees of freedom.
    #[arg(long = "nE", alias = "ne", requires = "n_h")]
    pub n_e: Option<usize>,

    /// Number of groups.
    #[arg(long, requires = "ni")]
    pub groups: Option<usize>,

    /// Group size, or a comma-separated list of sizes.
    #[arg(long, value_delimiter = ',')]
    pub ni: Vec<usize>,

    /// Noncentrality eigenvalues, comma-separated and descending.
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
}

impl DesignArgs {
    pub fn group_sizes(&self) -> Result<Option<Vec<usize>>, CliError> {
        match (self.groups, self.ni.as_slice()) {
            (_, []) => Ok(None),
            (Some(p), [n]) => Ok(Some(vec![*n; p])),
            (None, sizes) => Ok(Some(sizes.to_vec())),
            (Some(p), sizes) if sizes.len() == p => Ok(Some(sizes.to_vec())),
            (Some(p), sizes) => Err(CliError::Usage(format!(
                "--groups {p} does not match {} group sizes",
                sizes.len()
            ))),
        }
    }

    /// The design at dimension `m` (or `--m`).
    pub fn design_with_m(&self, m: Option<usize>) -> Result<ManovaDesign, CliError> {
        let m = m.or(self.m).ok_or_else(|| CliError::Usage("--m is required".into()))?;
        let base = match (self.n_h, self.n_e, self.group_sizes()?) {
            (Some(n_h), Some(n_e), None) => ManovaDesign::new(m, n_h, n_e),
            (None, None, Some(sizes)) => ManovaDesign::from_groups(m, &sizes),
            _ => {
                return Err(CliError::Usage(
                    "give either --nH and --nE or --groups and --ni".into(),
                ))
            }
        };
        base.and_then(|d| d.with_theta(&self.theta))
            .map_err(|e| CliError::Usage(format!("invalid design: {e}")))
    }

    pub fn design(&self) -> Result<ManovaDesign, CliError> {
        self.design_with_m(None)
    }
}

/// Series truncation controls.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ControlArgs {
    /// Highest degree of the noncentrality series [default: grows with theta, at least 20].
    #[arg(long = "K")]
    pub k_max: Option<u32>,

    /// Relative tolerance for cutting a non-terminating t-series.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,

    /// Largest t evaluated in a non-terminating t-series.
    #[arg(long, default_value_t = 200)]
    pub t_cap: u32,
}

impl ControlArgs {
    pub fn control(&self, design: &ManovaDesign) -> Result<SeriesControl, CliError> {
        let mut c = match self.k_max {
            Some(k) => SeriesControl::with_k(k),
            None => SeriesControl::auto_for(design.theta().iter().sum()),
        };
        c.rel_tol = self.rel_tol;
        c.t_cap = self.t_cap;
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatArg {
    /// Largest root of the Beta matrix.
    Roy,
    /// Pillai trace.
    Pillai,
    /// Largest root of the F matrix, ℓ/(1 − ℓ).
    F,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("mode").required(true).multiple(true).args(["at", "quantile"])))]
pub struct DistArgs {
    #[arg(long, value_enum, default_value_t = StatArg::Roy)]
    pub stat: StatArg,

    #[command(flatten)]
    pub design: DesignArgs,

    #[command(flatten)]
    pub control: ControlArgs,

    /// Points at which to evaluate the CDF.
    #[arg(long, value_delimiter = ',')]
    pub at: Vec<f64>,

    /// Probabilities whose quantiles are wanted.
    #[arg(long, value_delimiter = ',')]
    pub quantile: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestStat {
    Roy,
    Pillai,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PowerArgs {
    #[arg(long, value_enum, default_value_t = TestStat::Roy)]
    pub stat: TestStat,

    #[command(flatten)]
    pub design: DesignArgs,

    #[command(flatten)]
    pub control: ControlArgs,

    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Range of dimensions `a..b` (inclusive), one power per dimension.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,

    #[command(flatten)]
    pub control: ControlArgs,

    /// Number of replicates.
    #[arg(long = "R", default_value_t = 100_000)]
    pub replications: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Probabilities of the reported quantiles.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.5,0.9,0.95")]
    pub quantiles: Vec<f64>,

    /// Sample file; metadata goes next to it with a .json extension.
    #[arg(long, default_value = "samples.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum TableSelector {
    #[value(name = "1a")]
    #[serde(rename = "1a")]
    T1a,
    #[value(name = "1b")]
    #[serde(rename = "1b")]
    T1b,
    #[value(name = "2")]
    #[serde(rename = "2")]
    T2,
    #[value(name = "3")]
    #[serde(rename = "3")]
    T3,
    #[value(name = "4")]
    #[serde(rename = "4")]
    T4,
    #[value(name = "eq11")]
    #[serde(rename = "eq11")]
    Eq11,
    #[value(name = "fig1")]
    #[serde(rename = "fig1")]
    Fig1,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TablesArgs {
    #[arg(value_enum)]
    pub table: TableSelector,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("product").args(["kappa", "tau"]).multiple(true).requires_all(["kappa", "tau"])))]
pub struct ZonalDebugArgs {
    /// Degree of the zonal table.
    #[arg(long, required_unless_present = "kappa")]
    pub k: Option<u32>,

    /// Number of variables.
    #[arg(long)]
    pub m: usize,

    /// Left factor of a product, e.g. 2 or 3,2.
    #[arg(long)]
    pub kappa: Option<String>,

    /// Right factor of a product.
    #[arg(long)]
    pub tau: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A JSON report written by an earlier run.
    pub report: PathBuf,
}
