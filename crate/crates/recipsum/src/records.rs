//! Serializable records written to the `.jsonl` outputs, and the number
//! formatting shared with the CSV writers.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use recipsum_core::counting::{case_label, RatioBoundReport};
use recipsum_core::lattice::MinimaReport;
use recipsum_core::normal::{LadderReport, NormalizedBasis};
use recipsum_core::numerics::{format_real, BigFloat, RealScalar};
use recipsum_core::partition::{Partition, PartitionCell};
use recipsum_core::sums::{DyadicReport, SweepRow};
use recipsum_core::weights::{bits_string, rational_string, ExhaustiveReport, LemmaReport, Validity, WeightTable};

/// Version of every CSV layout; bump when columns change.
pub const SCHEMA_VERSION: u32 = 1;

/// Decimal rendering with `digits` significant digits, e.g. `1.2345e3`.
pub fn decimal(x: &BigFloat, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let digits = digits.max(1);
    let p = x.prec() + 16;
    let ten = |k: i64| BigFloat::from_bigint(&BigInt::from(10).pow(k.unsigned_abs() as u32), p);
    // the estimate from the leading bit is exact or one too small
    let mut e10 = ((x.abs().top() - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let (s, neg) = loop {
        let shift = digits as i64 - 1 - e10;
        let scaled = if shift >= 0 { x.with_prec(p).mul(&ten(shift)) } else { x.with_prec(p).div(&ten(shift)) };
        let r = scaled.round();
        let neg = r < BigInt::from(0);
        let s = if neg { (-r).to_string() } else { r.to_string() };
        if s.len() > digits && s.trim_end_matches('0') != "1" {
            e10 += 1;
            continue;
        }
        break (s, neg);
    };
    let exp = e10 + s.len() as i64 - digits as i64;
    let (head, tail) = s.split_at(1);
    let tail = tail[..digits - 1].trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Exact scalars in the input grammar, floats as 25-digit decimals.
pub fn scalar_string(x: &RealScalar) -> String {
    match x {
        RealScalar::Exact(_) => format_real(x),
        RealScalar::Approx(f) => decimal(f, 25),
    }
}

fn strings(v: &[RealScalar]) -> Vec<String> {
    v.iter().map(scalar_string).collect()
}

fn rationals(v: &[BigRational]) -> Vec<String> {
    v.iter().map(rational_string).collect()
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MinimaRecord {
    pub lambdas: Vec<String>,
    pub witnesses: Vec<Vec<String>>,
    pub nodes: u64,
    pub coefficients: Vec<Vec<i64>>,
    pub minkowski_ratio: f64,
    pub normalized: NormalizedRecord,
}

impl MinimaRecord {
    pub fn new(rep: &MinimaReport, minkowski_ratio: f64, nb: &NormalizedBasis, ladder: &LadderReport) -> Self {
        MinimaRecord {
            lambdas: strings(&rep.lambdas),
            witnesses: rep.witnesses.iter().map(|w| strings(w)).collect(),
            nodes: rep.nodes,
            coefficients: rep.coefficients.clone(),
            minkowski_ratio,
            normalized: NormalizedRecord::new(nb, ladder),
        }
    }
}

/// Everything needed to rebuild a normalized basis from its source lattice.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct NormalizedRecord {
    pub m: usize,
    pub permutation: Vec<usize>,
    pub c: Vec<u64>,
    pub coefficients: Vec<Vec<i64>>,
    pub vectors: Vec<Vec<String>>,
    /// One-based support indices of each vector.
    pub supports: Vec<Vec<usize>>,
    pub case: String,
    pub ladder: Vec<bool>,
    pub mahler_weyl: Vec<bool>,
    pub nesting_bound: Vec<bool>,
    pub nested: bool,
    pub zero_threshold_used: bool,
}

impl NormalizedRecord {
    pub fn new(nb: &NormalizedBasis, ladder: &LadderReport) -> Self {
        NormalizedRecord {
            m: nb.m,
            permutation: nb.permutation.clone(),
            c: nb.c.clone(),
            coefficients: nb.coefficients.clone(),
            vectors: nb.vectors.iter().map(|v| strings(v)).collect(),
            supports: nb.supports.iter().map(|s| s.indices()).collect(),
            case: case_label(&ladder.case),
            ladder: ladder.holds.clone(),
            mahler_weyl: nb.mahler_weyl_certificate(),
            nesting_bound: nb.nesting_certificate(),
            nested: nb.is_nested(),
            zero_threshold_used: nb.zero_threshold_used,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CellRecord {
    pub index: usize,
    pub k: Vec<u32>,
    pub regime: String,
    /// Exponents `a_i` as `c + a*log(T) + b*log(eps)`.
    pub a: Vec<String>,
    pub log_scales: Vec<String>,
    /// Log of the bound on `|x_i|` over the cell.
    pub log_upper: Vec<String>,
    pub upper: Vec<f64>,
    pub kappa: f64,
}

impl CellRecord {
    pub fn new(index: usize, cell: &PartitionCell, partition: &Partition, prec: u32) -> Self {
        let logs = partition.region.logs(prec);
        CellRecord {
            index,
            k: cell.k.clone(),
            regime: format!("{:?}", cell.regime).to_lowercase(),
            a: cell.exponents.iter().map(|r| r.to_string()).collect(),
            log_scales: cell.log_scales.iter().map(|r| r.to_string()).collect(),
            log_upper: cell.log_upper.iter().map(|r| r.to_string()).collect(),
            upper: cell.log_upper.iter().map(|r| r.eval(&logs).exp().to_f64()).collect(),
            kappa: partition.kappa,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PartitionSummary {
    pub m: usize,
    pub eps: String,
    pub t: String,
    pub cells: usize,
    pub k_cap: u32,
    pub kappa: f64,
    pub cardinality_bound: f64,
    pub count_constant: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ValidityRecord {
    pub prefix_rows: bool,
    pub nested_rows: bool,
    pub first_column: bool,
    pub ladder: bool,
}

impl From<&Validity> for ValidityRecord {
    fn from(v: &Validity) -> Self {
        ValidityRecord {
            prefix_rows: v.prefix_rows,
            nested_rows: v.nested_rows,
            first_column: v.first_column,
            ladder: v.ladder,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct WeightTableRecord {
    pub m: usize,
    pub n: usize,
    pub table: String,
    pub h: Vec<usize>,
    pub k: Vec<String>,
    pub alpha: Vec<String>,
    pub alpha_sj: Vec<Vec<String>>,
    pub validity: ValidityRecord,
    pub passed: bool,
    pub lower_bound_failures: Vec<usize>,
    pub identity_failures: Vec<usize>,
    pub alpha_failures: Vec<usize>,
    pub balance_failures: Vec<usize>,
    pub dominance_failures: Vec<usize>,
}

impl WeightTableRecord {
    pub fn new(t: &WeightTable, validity: &Validity, rep: &LemmaReport) -> Self {
        WeightTableRecord {
            m: t.m,
            n: t.n,
            table: bits_string(&t.t),
            h: t.h.clone(),
            k: rationals(&t.k),
            alpha: rationals(&t.alpha),
            alpha_sj: t.alpha_sj.iter().map(|r| rationals(r)).collect(),
            validity: validity.into(),
            passed: rep.passed(),
            lower_bound_failures: rep.lower_bound_failures.clone(),
            identity_failures: rep.identity_failures.clone(),
            alpha_failures: rep.alpha_failures.clone(),
            balance_failures: rep.balance_failures.clone(),
            dominance_failures: rep.dominance_failures.clone(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ExhaustiveRecord {
    pub m: usize,
    pub n: usize,
    pub examined: usize,
    pub valid: usize,
    pub passed: usize,
    pub outside_ladder_failures: usize,
    pub failures: Vec<String>,
}

impl From<&ExhaustiveReport> for ExhaustiveRecord {
    fn from(r: &ExhaustiveReport) -> Self {
        ExhaustiveRecord {
            m: r.m,
            n: r.n,
            examined: r.examined,
            valid: r.valid,
            passed: r.passed,
            outside_ladder_failures: r.outside_ladder_failures,
            failures: r.failures.iter().map(|t| bits_string(t)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CountRecord {
    pub matrix: String,
    pub eps: String,
    pub t: String,
    pub q: Vec<String>,
    pub method: String,
    pub count: u64,
    pub count_direct: Option<u64>,
    pub count_lattice: Option<u64>,
    /// Lattice points on `y = 0`, which the identity excludes.
    pub count_on_c: u64,
    pub elapsed_ms: u64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SumRecord {
    pub matrix: String,
    pub shape: String,
    pub q: Vec<i64>,
    pub q_geo: f64,
    pub s: String,
    pub terms: u64,
    pub phi: String,
    pub lower: String,
    pub upper: String,
    pub dyadic: String,
    pub dyadic_k_max: i64,
    pub dyadic_counts: Vec<u64>,
    pub c_low: f64,
    pub c_up: f64,
    pub dyadic_dominates: bool,
}

impl SumRecord {
    pub fn new(matrix: &str, row: &SweepRow, terms: u64, dy: &DyadicReport) -> Self {
        SumRecord {
            matrix: matrix.to_string(),
            shape: row.shape.clone(),
            q: row.q.clone(),
            q_geo: row.q_geo,
            s: decimal(&row.s, 25),
            terms,
            phi: scalar_string(&row.phi),
            lower: decimal(&row.lower, 25),
            upper: decimal(&row.upper, 25),
            dyadic: row.dyadic.to_string(),
            dyadic_k_max: row.dyadic_k_max,
            dyadic_counts: dy.counts.clone(),
            c_low: row.c_low,
            c_up: row.c_up,
            dyadic_dominates: row.dyadic_dominates(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PhiRecord {
    pub x: String,
    pub phi: String,
    pub argmin: Vec<i64>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RatioSummary {
    pub matrix: String,
    pub cells: usize,
    pub phi: String,
    pub phi_source: String,
    pub fitted_max: f64,
    pub fitted_total_max: f64,
}

impl RatioSummary {
    pub fn new(matrix: &str, cells: usize, rep: &RatioBoundReport) -> Self {
        RatioSummary {
            matrix: matrix.to_string(),
            cells,
            phi: scalar_string(rep.phi.value()),
            phi_source: rep.phi.label().to_string(),
            fitted_max: rep.fitted_max,
            fitted_total_max: rep.fitted_total_max,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CheckRecord {
    pub check: String,
    pub instances: usize,
    pub failures: usize,
    pub detail: Vec<String>,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}
