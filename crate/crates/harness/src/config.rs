//! Experiment configuration: a flat TOML file whose keys can all be overridden
//! from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Price,
    Ad,
    Fd,
    Cd,
    Ad2,
    Fdad,
    Cdad,
    Dist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Unilateral,
    Bilateral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Censored,
    SurvivorFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DiscountKind {
    /// Stochastic short-rate deflator along each path.
    Pathwise,
    /// Zero-curve discount factor D(0,τ).
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Credit,
    Rates,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub rates_file: PathBuf,
    pub credit_file: PathBuf,
    /// Own credit curve for bilateral runs.
    pub second_credit_file: Option<PathBuf>,
    pub mode: Mode,
    pub rho: f64,
    pub weight_scheme: WeightKind,
    pub lgd: f64,
    pub discounting: DiscountKind,
    pub kappa: f64,
    pub sigma: f64,
    pub notional: f64,
    pub fixed_rate: f64,
    pub maturity_years: u32,
    pub receive_fixed: bool,
    pub steps_per_year: usize,
    pub paths: usize,
    pub seed: u64,
    pub workers: usize,
    pub estimator: Vec<Estimator>,
    pub bump_bp: Vec<f64>,
    pub bump_target: Target,
    pub out_dir: PathBuf,
    pub record_timing: bool,
    pub store_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            rates_file: "fixtures/ESTR.csv".into(),
            credit_file: "fixtures/INDUSTRIAL_Ba.csv".into(),
            second_credit_file: None,
            mode: Mode::Unilateral,
            rho: 0.0,
            weight_scheme: WeightKind::Censored,
            lgd: 0.6,
            discounting: DiscountKind::Pathwise,
            kappa: 0.0744,
            sigma: 0.0125,
            notional: 1e8,
            fixed_rate: 0.00947,
            maturity_years: 10,
            receive_fixed: true,
            steps_per_year: 12,
            paths: 100_000,
            seed: 1,
            workers: 1,
            estimator: vec![Estimator::Price],
            bump_bp: vec![1.0, 10.0],
            bump_target: Target::Credit,
            out_dir: "out".into(),
            record_timing: true,
            store_cap: 4_000_000,
        }
    }
}

impl Config {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.paths == 0 {
            bail!("paths must be at least 1");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if !(self.lgd > 0.0 && self.lgd <= 1.0) {
            bail!("lgd {} outside (0, 1]", self.lgd);
        }
        if !(self.rho.abs() < 1.0) {
            bail!("rho {} outside (-1, 1)", self.rho);
        }
        if self.estimator.is_empty() {
            bail!("no estimator selected");
        }
        if let Some(b) = self.bump_bp.iter().find(|b| !(**b > 0.0)) {
            bail!("bump size {b}bp must be positive");
        }
        let bumps = [Estimator::Fd, Estimator::Cd, Estimator::Fdad, Estimator::Cdad];
        if self.bump_bp.is_empty() && self.estimator.iter().any(|e| bumps.contains(e)) {
            bail!("finite-difference estimators need at least one bump size");
        }
        if self.steps_per_year == 0 {
            bail!("steps_per_year must be at least 1");
        }
        match (self.mode, &self.second_credit_file) {
            (Mode::Bilateral, None) => bail!("bilateral mode needs second_credit_file"),
            (Mode::Bilateral, _) if self.estimator.contains(&Estimator::Dist) => {
                bail!("the distributional estimator is single-name unilateral only")
            }
            (Mode::Unilateral, _) if self.weight_scheme == WeightKind::SurvivorFree => {
                bail!("survivor_free weights need bilateral mode")
            }
            _ => {}
        }
        let files = [
            Some(&self.rates_file),
            Some(&self.credit_file),
            self.second_credit_file.as_ref(),
        ];
        for f in files.into_iter().flatten() {
            if !f.is_file() {
                bail!("fixture {} not found", f.display());
            }
        }
        Ok(())
    }
}

/// Command line; every flag overrides the config key of the same name.
#[derive(Clone, Debug, Default, Parser)]
#[command(
    name = "cva-greeks",
    about = "Monte Carlo CVA sensitivities with adjoint and finite-difference estimators"
)]
pub struct Cli {
    /// TOML config file; flags win over its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub estimator: Vec<Estimator>,
    /// Bump sizes in basis points, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub bump_bp: Vec<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub rates_file: Option<PathBuf>,
    #[arg(long)]
    pub credit_file: Option<PathBuf>,
    #[arg(long)]
    pub second_credit_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, value_enum)]
    pub weight_scheme: Option<WeightKind>,
    #[arg(long)]
    pub lgd: Option<f64>,
    #[arg(long, value_enum)]
    pub discounting: Option<DiscountKind>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub notional: Option<f64>,
    #[arg(long)]
    pub fixed_rate: Option<f64>,
    #[arg(long)]
    pub maturity_years: Option<u32>,
    #[arg(long)]
    pub receive_fixed: Option<bool>,
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    #[arg(long, value_enum)]
    pub bump_target: Option<Target>,
    #[arg(long)]
    pub record_timing: Option<bool>,
    #[arg(long)]
    pub store_cap: Option<usize>,
}

impl Cli {
    /// Config file (or defaults) with the flags applied, validated.
    pub fn resolve(&self) -> anyhow::Result<Config> {
        let mut c = match &self.config {
            Some(p) => Config::from_file(p)?,
            None => Config::default(),
        };
        if !self.estimator.is_empty() {
            c.estimator = self.estimator.clone();
        }
        if !self.bump_bp.is_empty() {
            c.bump_bp = self.bump_bp.clone();
        }
        macro_rules! apply {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$f = v.clone();
                }
            )*};
        }
        apply!(
            paths,
            seed,
            workers,
            out_dir,
            rates_file,
            credit_file,
            mode,
            rho,
            weight_scheme,
            lgd,
            discounting,
            kappa,
            sigma,
            notional,
            fixed_rate,
            maturity_years,
            receive_fixed,
            steps_per_year,
            bump_target,
            record_timing,
            store_cap
        );
        if self.second_credit_file.is_some() {
            c.second_credit_file = self.second_credit_file.clone();
        }
        c.validate()?;
        Ok(c)
    }
}
