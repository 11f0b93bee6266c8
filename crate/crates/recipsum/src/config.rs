//! Command-line configuration. The parsed [`Cli`] doubles as the config echo:
//! it is written as JSON next to the outputs and `replay` reads it back.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use recipsum_core::counting::DEFAULT_BUDGET;
use recipsum_core::lattice::{BoxSpec, SystemMatrix};
use recipsum_core::numerics::{check_precision, parse_matrix, parse_real, DecimalMode, RealScalar, DEFAULT_PRECISION};
use recipsum_core::sums::BoxShape;

use crate::error::{CliError, CliResult};

pub const PRECISION_ENV: &str = "RECIPSUM_PRECISION";

#[derive(Parser, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[command(name = "recipsum", version, about = "Sums of reciprocals of fractional parts over aligned boxes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct GlobalOpts {
    /// Working precision in bits. Defaults to $RECIPSUM_PRECISION, then 192.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Enumeration budget (lattice nodes or box points).
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    pub emit_gnuplot: bool,
    /// Accept matrix rows whose irrationality cannot be checked exactly.
    #[arg(long, global = true)]
    pub assume_irrational: bool,
    /// Read decimal literals as floats instead of exact rationals.
    #[arg(long, global = true)]
    pub float_decimals: bool,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    /// S_L(Q) with its envelopes and dyadic bound for one box.
    Sum(SumArgs),
    /// Sums over a grid of geometric means and box shapes.
    Sweep(SweepArgs),
    /// Number of integer solutions of the counting problem.
    Count(CountArgs),
    /// Successive minima and the normalized basis of a lattice.
    Minima(MinimaArgs),
    /// Cells of the partition of the hyperbolic region.
    PartitionDump(PartitionArgs),
    /// Exact check of the weight recursion.
    WeightsCheck(WeightsArgs),
    /// Empirical profile of prod max(1,|q_j|) prod ||L_i q||.
    PhiProfile(PhiArgs),
    /// Per-cell ratios of minima products against the case bounds.
    RatioBounds(RatioArgs),
    /// Run the exact invariant suite.
    Verify(VerifyArgs),
    /// Re-run a configuration from its echo.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sum(_) => "sum",
            Command::Sweep(_) => "sweep",
            Command::Count(_) => "count",
            Command::Minima(_) => "minima",
            Command::PartitionDump(_) => "partition-dump",
            Command::WeightsCheck(_) => "weights-check",
            Command::PhiProfile(_) => "phi-profile",
            Command::RatioBounds(_) => "ratio-bounds",
            Command::Verify(_) => "verify",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct SumArgs {
    /// Matrix, rows separated by ';' and entries by ','.
    #[arg(long)]
    pub matrix: String,
    /// Box sides: one value for all columns or one per column.
    #[arg(long = "Q")]
    pub q: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct SweepArgs {
    #[arg(long)]
    pub matrix: String,
    /// Geometric means: `a..b` (doubling), or a comma list.
    #[arg(long = "Qgeo")]
    pub q_geo: String,
    /// Comma list of sym, skew, rskew.
    #[arg(long, default_value = "sym")]
    pub shapes: String,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Direct,
    Lattice,
    Both,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CountArgs {
    #[arg(long)]
    pub matrix: String,
    #[arg(long)]
    pub eps: String,
    #[arg(long = "T")]
    pub t: String,
    #[arg(long = "Q")]
    pub q: String,
    #[arg(long, value_enum, default_value_t = CountMethod::Both)]
    pub method: CountMethod,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct MinimaArgs {
    /// Basis vectors as rows, e.g. "1,0;1/2,1/2".
    #[arg(long, conflicts_with = "matrix")]
    pub basis: Option<String>,
    /// Use the unipotent lattice of this matrix instead.
    #[arg(long)]
    pub matrix: Option<String>,
    /// With --matrix: rescale by a partition cell (needs --eps, --T, --Q).
    #[arg(long, requires_all = ["eps", "t", "q"])]
    pub cell: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long = "Q")]
    pub q: Option<String>,
    /// Number of leading coordinates treated as `x` when normalizing.
    #[arg(long = "M")]
    pub m: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct PartitionArgs {
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long)]
    pub eps: String,
    #[arg(long = "T")]
    pub t: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct WeightsArgs {
    /// Check every valid support matrix of the given shape.
    #[arg(long, conflicts_with = "table")]
    pub exhaustive: bool,
    /// A single support matrix, rows separated by ';', e.g. "10;11".
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct PhiArgs {
    #[arg(long)]
    pub matrix: String,
    /// Heights: `a..b` (doubling), or a comma list.
    #[arg(long = "X")]
    pub x: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct RatioArgs {
    #[arg(long)]
    pub matrix: String,
    #[arg(long)]
    pub eps: String,
    #[arg(long = "T")]
    pub t: String,
    #[arg(long = "Q")]
    pub q: String,
    /// Asserted value of phi(Q); the empirical profile is used when absent.
    #[arg(long)]
    pub phi: Option<String>,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Small randomized instances, a few seconds.
    Desk,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Desk)]
    pub suite: Suite,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct ReplayArgs {
    /// Config echo written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
}

/// Settings shared by every command once the globals are validated.
#[derive(Clone, Debug)]
pub struct Settings {
    pub prec: u32,
    pub budget: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub emit_gnuplot: bool,
    pub assume_irrational: bool,
    pub mode: DecimalMode,
}

/// Precision from the flag, then the environment, then the default.
pub fn resolve_precision(flag: Option<u32>) -> CliResult<u32> {
    let bits = match flag {
        Some(b) => b,
        None => match std::env::var(PRECISION_ENV) {
            Ok(s) => s
                .trim()
                .parse::<u32>()
                .map_err(|_| CliError::Config(format!("{PRECISION_ENV}='{s}' is not a bit count")))?,
            Err(_) => DEFAULT_PRECISION,
        },
    };
    check_precision(bits).map_err(CliError::from)
}

impl Cli {
    /// Validates the globals and pins the precision so the echo replays
    /// the same way regardless of the environment.
    pub fn settings(&mut self) -> CliResult<Settings> {
        let prec = resolve_precision(self.global.precision)?;
        self.global.precision = Some(prec);
        if self.global.budget == 0 {
            return Err(CliError::Config("budget must be positive".into()));
        }
        if self.global.threads == Some(0) {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        Ok(Settings {
            prec,
            budget: self.global.budget,
            seed: self.global.seed,
            out: self.global.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            emit_gnuplot: self.global.emit_gnuplot,
            assume_irrational: self.global.assume_irrational,
            mode: if self.global.float_decimals { DecimalMode::Float(prec) } else { DecimalMode::Exact },
        })
    }

    pub fn to_echo(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_echo(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config echo: {e}")))
    }

    pub fn load_echo(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_echo(&text)
    }
}

pub fn parse_system(s: &str, mode: DecimalMode) -> CliResult<SystemMatrix> {
    Ok(SystemMatrix::new(parse_matrix(s.trim(), mode)?)?)
}

pub fn parse_scalar(s: &str, mode: DecimalMode, name: &str) -> CliResult<RealScalar> {
    parse_real(s.trim(), mode).map_err(|e| CliError::Config(format!("--{name}: {e}")))
}

pub fn parse_positive(s: &str, mode: DecimalMode, name: &str) -> CliResult<RealScalar> {
    let v = parse_scalar(s, mode, name)?;
    if v.signum() <= 0 {
        return Err(CliError::Config(format!("--{name} must be positive")));
    }
    Ok(v)
}

/// One side for every column, or one per column; each must be at least 1.
pub fn parse_box(s: &str, n: usize, mode: DecimalMode) -> CliResult<BoxSpec> {
    let vals: Vec<RealScalar> = s.split(',').map(|e| parse_scalar(e, mode, "Q")).collect::<CliResult<_>>()?;
    let sides = match vals.len() {
        1 => vec![vals[0].clone(); n],
        k if k == n => vals,
        k => return Err(CliError::Config(format!("--Q has {k} values for {n} columns"))),
    };
    if sides.iter().any(|x| x.lt(&RealScalar::int(1))) {
        return Err(CliError::Config("box sides must be at least 1".into()));
    }
    Ok(BoxSpec::new(sides)?)
}

/// `a..b` doubles from `a` up to `b`; otherwise a comma list.
pub fn parse_int_grid(s: &str, name: &str) -> CliResult<Vec<i64>> {
    let bad = || CliError::Config(format!("--{name}: cannot parse '{s}'"));
    let vals: Vec<i64> = if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if a < 1 || b < a {
            return Err(bad());
        }
        let mut v = Vec::new();
        let mut x = a;
        while x <= b {
            v.push(x);
            x = x.checked_mul(2).ok_or_else(bad)?;
        }
        v
    } else {
        s.split(',').map(|e| e.trim().parse::<i64>().map_err(|_| bad())).collect::<CliResult<_>>()?
    };
    if vals.is_empty() || vals.iter().any(|&x| x < 1) {
        return Err(CliError::Config(format!("--{name} values must be at least 1")));
    }
    Ok(vals)
}

pub fn parse_shapes(s: &str) -> CliResult<Vec<BoxShape>> {
    s.split(',').map(|e| BoxShape::parse(e.trim()).map_err(CliError::from)).collect()
}

/// Rejects matrices whose rows are known to be rational, and rows without an
/// exact single-field evaluation unless the user vouches for them.
pub fn require_irrational(l: &SystemMatrix, assume: bool) -> CliResult<()> {
    if !l.rows_exact() {
        if assume {
            return Ok(());
        }
        return Err(CliError::Config(
            "matrix rows cannot be evaluated exactly (float entries or mixed quadratic fields); pass --assume-irrational to accept them".into(),
        ));
    }
    for (i, row) in l.rows().iter().enumerate() {
        if row.iter().all(|x| x.as_exact().is_some_and(|q| q.is_rational())) {
            return Err(CliError::Config(format!("row {} is rational, so ||L q|| vanishes in the box", i + 1)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_int_grid("4..64", "Qgeo").unwrap(), vec![4, 8, 16, 32, 64]);
        assert_eq!(parse_int_grid("4..100", "Qgeo").unwrap(), vec![4, 8, 16, 32, 64]);
        assert_eq!(parse_int_grid("3, 5", "Qgeo").unwrap(), vec![3, 5]);
        assert!(parse_int_grid("0..4", "Qgeo").is_err());
        assert!(parse_int_grid("x", "Qgeo").is_err());
    }

    #[test]
    fn boxes() {
        let b = parse_box("16", 2, DecimalMode::Exact).unwrap();
        assert_eq!(b.int_bounds(), vec![16, 16]);
        let b = parse_box("4,9", 2, DecimalMode::Exact).unwrap();
        assert_eq!(b.int_bounds(), vec![4, 9]);
        assert!(matches!(parse_box("1/2", 1, DecimalMode::Exact), Err(CliError::Config(_))));
        assert!(parse_box("1,2,3", 2, DecimalMode::Exact).is_err());
    }

    #[test]
    fn echo_round_trip() {
        let mut cli = Cli::parse_from([
            "recipsum", "--seed", "7", "count", "--matrix", "sqrt(2)", "--eps", "0.3", "--T", "0.5", "--Q", "5",
        ]);
        cli.settings().unwrap();
        let back = Cli::from_echo(&cli.to_echo().unwrap()).unwrap();
        assert_eq!(back, cli);
    }

    #[test]
    fn rational_rows_rejected() {
        let l = parse_system("1/2", DecimalMode::Exact).unwrap();
        assert!(require_irrational(&l, false).is_err());
        let l = parse_system("golden", DecimalMode::Exact).unwrap();
        assert!(require_irrational(&l, false).is_ok());
        let l = parse_system("1.5", DecimalMode::Float(128)).unwrap();
        assert!(require_irrational(&l, false).is_err());
        assert!(require_irrational(&l, true).is_ok());
    }
}
