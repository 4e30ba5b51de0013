use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use revshare::{normalize, DemandCurve, RawDemand, RhoTable, StrategyProfile};

#[derive(Parser)]
#[command(
    name = "revshare",
    about = "Shared-revenue Bertrand game solver: prices, fees, equilibria, and a grid oracle",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Scenario report: key prices, threshold fees, equilibrium families and outcomes (JSON)
    Report(ScenarioArgs),
    /// Refined-outcome region map over a cost/fee lattice (CSV)
    RegionMap(RegionMapArgs),
    /// Payoff curves over price, or equilibrium payoffs over the fee (CSV)
    PayoffCurves(PayoffCurvesArgs),
    /// Solve the fee optimization game, optionally with an outside option (JSON)
    FeeSweep(ScenarioArgs),
    /// Compare analytic equilibria against the brute-force grid oracle (JSON)
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
pub struct ScenarioArgs {
    /// Retailer unit cost in (0, 1)
    #[arg(long)]
    pub cr: Option<f64>,
    /// Seller unit cost in (0, c_r)
    #[arg(long)]
    pub cs: Option<f64>,
    /// Referral fee in (0, 1)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Outside-option cost differential in (0, c_r - c_s)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Tie-split share served by the retailer
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// "linear" or a path to a price,quantity CSV in raw units
    #[arg(long, default_value = "linear")]
    pub demand: String,
    /// Maximum price of the raw demand table (required with a CSV table)
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Continuum price selection: "low", "high", or an alpha,price CSV
    #[arg(long, default_value = "low")]
    pub rho: String,
    /// Price grid resolution
    #[arg(long, default_value_t = 2001)]
    pub grid_n: usize,
    /// Fee grid resolution
    #[arg(long, default_value_t = 1000)]
    pub alpha_grid_n: usize,
    /// Payoff slack for oracle deviation tests
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for random draws
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output format; each command has a fixed one (reports are JSON,
    /// curve and map data are CSV)
    #[arg(long)]
    pub format: Option<String>,
    /// Output path (atomic write); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RegionMapArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Swept cost axis: "cr" (fix --cs) or "cs" (fix --cr)
    #[arg(long)]
    pub axis: String,
    /// Lattice resolution along the cost axis
    #[arg(long, default_value_t = 400)]
    pub nx: usize,
    /// Lattice resolution along the fee axis
    #[arg(long, default_value_t = 400)]
    pub nalpha: usize,
}

#[derive(Args)]
pub struct PayoffCurvesArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// "price" (payoffs vs price at fixed fee) or "alpha" (equilibrium
    /// payoffs vs fee); inferred from --alpha when omitted
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of random parameter draws
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    /// Sweep the fee axis at fixed --cr/--cs instead of random draws
    #[arg(long)]
    pub slice: bool,
    /// Test hook: corrupt the analytic side by this fee offset
    #[arg(long)]
    pub perturb_fee: Option<f64>,
}

/// A config error exits with code 2 and names the violated invariant.
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl ScenarioArgs {
    pub fn check_format(&self, emitted: &str) -> Result<(), ConfigError> {
        match self.format.as_deref() {
            None => Ok(()),
            Some(f) if f == emitted => Ok(()),
            Some(other) => Err(ConfigError(format!(
                "this command emits {emitted}, not {other}"
            ))),
        }
    }

    pub fn costs(&self) -> Result<(f64, f64), ConfigError> {
        let c_r = self.cr.ok_or(ConfigError("--cr is required".into()))?;
        let c_s = self.cs.ok_or(ConfigError("--cs is required".into()))?;
        if !(0.0 < c_s && c_s < c_r && c_r < 1.0) {
            return Err(ConfigError(format!(
                "0 < c_s < c_r < 1 violated (c_r = {c_r}, c_s = {c_s})"
            )));
        }
        Ok((c_r, c_s))
    }

    pub fn curve(&self) -> Result<DemandCurve, ConfigError> {
        if self.demand == "linear" {
            return Ok(DemandCurve::linear());
        }
        let p_max = self.p_max.ok_or(ConfigError(
            "--p-max is required with a demand CSV".into(),
        ))?;
        let samples = read_two_column_csv(&self.demand, "price", "quantity")?;
        if samples.is_empty() {
            return Err(ConfigError(format!("demand table {} is empty", self.demand)));
        }
        let q_at_zero = samples[0].1;
        let raw = RawDemand::new(p_max, q_at_zero, samples)
            .map_err(|e| ConfigError(format!("demand table: {e}")))?;
        let curve = normalize(&raw).map_err(|e| ConfigError(format!("demand table: {e}")))?;
        let report = curve.validate();
        if !report.is_valid() {
            return Err(ConfigError(format!(
                "demand table violates curve invariants: {:?}",
                report.violations
            )));
        }
        Ok(curve)
    }

    pub fn strategy_profile(&self) -> Result<StrategyProfile, ConfigError> {
        match self.rho.as_str() {
            "low" => Ok(StrategyProfile::RhoLow),
            "high" => Ok(StrategyProfile::RhoHigh),
            path => {
                let points = read_two_column_csv(path, "alpha", "price")?;
                let table = RhoTable::new(points)
                    .map_err(|e| ConfigError(format!("rho table: {e}")))?;
                Ok(StrategyProfile::Custom(table))
            }
        }
    }

    pub fn alpha(&self) -> Result<f64, ConfigError> {
        let alpha = self.alpha.ok_or(ConfigError("--alpha is required".into()))?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ConfigError(format!("alpha in (0, 1) violated (alpha = {alpha})")));
        }
        Ok(alpha)
    }

    pub fn delta_checked(&self, c_r: f64, c_s: f64) -> Result<Option<f64>, ConfigError> {
        match self.delta {
            None => Ok(None),
            Some(d) => {
                if !(d > 0.0 && d < c_r - c_s) {
                    return Err(ConfigError(format!(
                        "delta in (0, c_r - c_s) violated (delta = {d}, c_r - c_s = {})",
                        c_r - c_s
                    )));
                }
                Ok(Some(d))
            }
        }
    }
}

fn read_two_column_csv(
    path: &str,
    first: &str,
    second: &str,
) -> Result<Vec<(f64, f64)>, ConfigError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| ConfigError(format!("{path}: {e}")))?
        .clone();
    if headers.len() < 2 || headers[0].trim() != first || headers[1].trim() != second {
        return Err(ConfigError(format!(
            "{path}: expected header {first},{second}, got {headers:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ConfigError(format!("{path}: {e}")))?;
        let a: f64 = record[0]
            .trim()
            .parse()
            .map_err(|e| ConfigError(format!("{path}: bad {first} value: {e}")))?;
        let b: f64 = record[1]
            .trim()
            .parse()
            .map_err(|e| ConfigError(format!("{path}: bad {second} value: {e}")))?;
        rows.push((a, b));
    }
    Ok(rows)
}
