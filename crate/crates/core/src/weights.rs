//! Exact weight sums `k_s` and accumulators `alpha_s`, `alpha_sj` attached to
//! a support matrix `t`, with the checks of their well-definedness.
//!
//! Indices follow the one-based convention of the formulas: row `s` of `t`
//! is `t[s - 1]`, column `j` is `t[..][j - 1]`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::normal::NormalizedBasis;

/// Bit matrix `t_sj = [q^s_j != 0]`, `s = 1..M+N-1`, in the relabeled order.
pub fn support_matrix(nb: &NormalizedBasis) -> Vec<Vec<bool>> {
    let (m, n) = (nb.m, nb.n_y());
    (0..m + n - 1).map(|s| (0..n).map(|j| nb.supports[s].contains(m + j)).collect()).collect()
}

/// Largest `j` with `t_sj = 1`, zero for an empty row.
pub fn prefix_lengths(t: &[Vec<bool>]) -> Vec<usize> {
    t.iter().map(|row| row.iter().rposition(|&b| b).map_or(0, |j| j + 1)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validity {
    pub prefix_rows: bool,
    pub nested_rows: bool,
    pub first_column: bool,
    /// `h_s >= s + 1 - M` for `M <= s <= M+N-1`: the support of `v^s`
    /// reaches coordinate `s + 1`.
    pub ladder: bool,
}

impl Validity {
    pub fn structural(&self) -> bool {
        self.prefix_rows && self.nested_rows && self.first_column
    }

    pub fn all(&self) -> bool {
        self.structural() && self.ladder
    }
}

pub fn validity(m: usize, t: &[Vec<bool>]) -> Validity {
    let h = prefix_lengths(t);
    let prefix_rows = t.iter().zip(&h).all(|(row, &hs)| row.iter().enumerate().all(|(j, &b)| b == (j < hs)));
    let nested_rows = t.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| !a || *b));
    let first_column = t.iter().all(|row| row.first().copied().unwrap_or(false));
    let ladder = (m..=t.len()).all(|s| h[s - 1] + m > s);
    Validity { prefix_rows, nested_rows, first_column, ladder }
}

/// One step of the recursion: `k_s = (M + h_s) / (1 - sum_{s'<s} (1 - t_{s'j}) / k_{s'})`
/// where `column[s'-1] = t_{s'j}` for the column `j = s + 1 - M` read at level `s`.
pub fn weight_step(m: usize, h_s: usize, column: &[bool], k_prev: &[BigRational]) -> Result<BigRational> {
    let base = BigRational::from_integer(BigInt::from(m + h_s));
    let missing =
        column.iter().zip(k_prev).filter(|(b, _)| !**b).fold(BigRational::zero(), |acc, (_, k)| acc + k.recip());
    let denom = BigRational::one() - missing;
    if !denom.is_positive() {
        return Err(Error::InvariantViolation(format!("weight denominator {denom} is not positive")));
    }
    Ok(base / denom)
}

pub fn weight_sums(m: usize, t: &[Vec<bool>]) -> Result<Vec<BigRational>> {
    let h = prefix_lengths(t);
    let mut k: Vec<BigRational> = Vec::with_capacity(t.len());
    for s in 1..=t.len() {
        let ks = if s <= m {
            BigRational::from_integer(BigInt::from(m + h[s - 1]))
        } else {
            let j = s + 1 - m;
            let column: Vec<bool> = t[..s - 1].iter().map(|row| row.get(j - 1).copied().unwrap_or(false)).collect();
            weight_step(m, h[s - 1], &column, &k)?
        };
        k.push(ks);
    }
    Ok(k)
}

/// `alpha_s = sum_{s'<=s} 1/k_s'` and `alpha_sj = sum_{s'<=s} t_s'j / k_s'`.
pub fn alphas(k: &[BigRational], t: &[Vec<bool>]) -> (Vec<BigRational>, Vec<Vec<BigRational>>) {
    let n = t.first().map_or(0, |r| r.len());
    let mut alpha = Vec::with_capacity(k.len());
    let mut alpha_sj = Vec::with_capacity(k.len());
    let mut acc = BigRational::zero();
    let mut acc_j = alloc::vec![BigRational::zero(); n];
    for (ks, row) in k.iter().zip(t) {
        let r = ks.recip();
        acc += &r;
        for (a, &b) in acc_j.iter_mut().zip(row) {
            if b {
                *a += &r;
            }
        }
        alpha.push(acc.clone());
        alpha_sj.push(acc_j.clone());
    }
    (alpha, alpha_sj)
}

#[derive(Clone, Debug)]
pub struct WeightTable {
    pub m: usize,
    pub n: usize,
    pub t: Vec<Vec<bool>>,
    pub h: Vec<usize>,
    pub k: Vec<BigRational>,
    pub alpha: Vec<BigRational>,
    pub alpha_sj: Vec<Vec<BigRational>>,
}

impl WeightTable {
    pub fn new(m: usize, n: usize, t: Vec<Vec<bool>>) -> Result<Self> {
        if m == 0 || n == 0 || t.len() != m + n - 1 || t.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("support matrix must be {}x{}", m + n - 1, n)));
        }
        let h = prefix_lengths(&t);
        let k = weight_sums(m, &t)?;
        let (alpha, alpha_sj) = alphas(&k, &t);
        Ok(WeightTable { m, n, t, h, k, alpha, alpha_sj })
    }

    pub fn from_basis(nb: &NormalizedBasis) -> Result<Self> {
        Self::new(nb.m, nb.n_y(), support_matrix(nb))
    }
}

#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    /// `s` with `k_s < M + h_s`.
    pub lower_bound_failures: Vec<usize>,
    /// `s` where `alpha_s (s+1) + sum_{j > s+1-M} alpha_sj != s`.
    pub identity_failures: Vec<usize>,
    /// `s` with `alpha_s > s/(s+1)`.
    pub alpha_failures: Vec<usize>,
    /// `s` where the extra-plus-single weight balance fails.
    pub balance_failures: Vec<usize>,
    /// `s` with some `alpha_sj > alpha_s`.
    pub dominance_failures: Vec<usize>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.lower_bound_failures.is_empty()
            && self.identity_failures.is_empty()
            && self.alpha_failures.is_empty()
            && self.balance_failures.is_empty()
            && self.dominance_failures.is_empty()
    }
}

pub fn verify_weight_lemma(table: &WeightTable) -> LemmaReport {
    let (m, n) = (table.m, table.n);
    let mut rep = LemmaReport::default();
    for s in 1..=table.k.len() {
        let ks = &table.k[s - 1];
        let base = BigRational::from_integer(BigInt::from(m + table.h[s - 1]));
        if ks < &base {
            rep.lower_bound_failures.push(s);
        }
        let a = &table.alpha[s - 1];
        if table.alpha_sj[s - 1].iter().any(|x| x > a) {
            rep.dominance_failures.push(s);
        }
        if s >= m {
            // columns j > s + 1 - M; empty when s + 1 - M = N
            let tail = table.alpha_sj[s - 1].iter().skip(s + 1 - m).fold(BigRational::zero(), |acc, x| acc + x);
            let lhs = a * BigRational::from_integer(BigInt::from(s + 1)) + tail;
            if lhs != BigRational::from_integer(BigInt::from(s)) {
                rep.identity_failures.push(s);
            }
            if a > &BigRational::new(BigInt::from(s), BigInt::from(s + 1)) {
                rep.alpha_failures.push(s);
            }
        }
        if s > m && s + 1 - m <= n {
            let j = s + 1 - m;
            let extra = table.t[..s - 1]
                .iter()
                .zip(&table.k)
                .filter(|(row, _)| !row[j - 1])
                .fold(BigRational::zero(), |acc, (_, k)| acc + k.recip());
            let lhs = extra + ks.recip();
            let rhs = (BigRational::one() + ks - &base) / ks;
            if lhs != rhs {
                rep.balance_failures.push(s);
            }
        }
    }
    rep
}

/// Every `(M+N-1) x N` bit matrix, in counting order.
pub fn all_tables(m: usize, n: usize) -> impl Iterator<Item = Vec<Vec<bool>>> {
    let rows = m + n - 1;
    let bits = rows * n;
    (0u64..1 << bits)
        .map(move |code| (0..rows).map(|s| (0..n).map(|j| code >> (s * n + j) & 1 == 1).collect()).collect())
}

#[derive(Clone, Debug, Default)]
pub struct ExhaustiveReport {
    pub m: usize,
    pub n: usize,
    pub examined: usize,
    pub valid: usize,
    pub passed: usize,
    /// Structurally valid tables outside the ladder hypothesis that fail.
    pub outside_ladder_failures: usize,
    pub failures: Vec<Vec<Vec<bool>>>,
}

pub fn exhaustive_check(m: usize, n: usize) -> ExhaustiveReport {
    let mut rep = ExhaustiveReport { m, n, ..Default::default() };
    for t in all_tables(m, n) {
        rep.examined += 1;
        let v = validity(m, &t);
        if !v.structural() {
            continue;
        }
        let ok = WeightTable::new(m, n, t.clone()).map(|tab| verify_weight_lemma(&tab).passed()).unwrap_or(false);
        if v.ladder {
            rep.valid += 1;
            if ok {
                rep.passed += 1;
            } else {
                rep.failures.push(t);
            }
        } else if !ok {
            rep.outside_ladder_failures += 1;
        }
    }
    rep
}

/// `p/q`, with `q = 1` written out.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn bits_string(t: &[Vec<bool>]) -> String {
    let rows: Vec<String> = t.iter().map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect()).collect();
    rows.join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn tbl(rows: &[&[u8]]) -> Vec<Vec<bool>> {
        rows.iter().map(|r| r.iter().map(|&b| b == 1).collect()).collect()
    }

    #[test]
    fn fully_supported_one_by_two() {
        let w = WeightTable::new(1, 2, tbl(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!(w.k, vec![r(3, 1), r(3, 1)]);
        assert_eq!(w.alpha[1], r(2, 3));
        assert!(verify_weight_lemma(&w).passed());
    }

    #[test]
    fn partial_support_one_by_two() {
        let w = WeightTable::new(1, 2, tbl(&[&[1, 0], &[1, 1]])).unwrap();
        assert_eq!(w.h, vec![1, 2]);
        assert_eq!(w.k, vec![r(2, 1), r(6, 1)]);
        assert_eq!(w.alpha[1], r(2, 3));
        assert_eq!(w.alpha_sj[1][0], w.alpha[1]);
        assert!(verify_weight_lemma(&w).passed());
    }

    #[test]
    fn two_by_one() {
        let w = WeightTable::new(2, 1, tbl(&[&[1], &[1]])).unwrap();
        assert_eq!(w.k, vec![r(3, 1), r(3, 1)]);
        assert!(verify_weight_lemma(&w).passed());
    }

    #[test]
    fn ladder_hypothesis_is_needed() {
        // v^2 misses coordinate 3: structurally fine, identity fails
        let t = tbl(&[&[1, 0], &[1, 0]]);
        let v = validity(1, &t);
        assert!(v.structural() && !v.ladder);
        let w = WeightTable::new(1, 2, t).unwrap();
        assert_eq!(w.k, vec![r(2, 1), r(4, 1)]);
        assert_eq!(verify_weight_lemma(&w).identity_failures, vec![2]);
    }

    #[test]
    fn malformed_table_is_reported() {
        // no prefix structure: first column empty drives the denominator to zero
        let t = tbl(&[&[0, 0], &[0, 0], &[0, 1]]);
        assert!(!validity(1, &t).structural());
        assert!(matches!(
            WeightTable::new(1, 3, tbl(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 1]])),
            Err(Error::InvariantViolation(_))
        ));
        assert!(WeightTable::new(1, 2, tbl(&[&[1, 1]])).is_err());
    }

    #[test]
    fn all_ones_tables_satisfy_the_identity() {
        for m in 1..=4 {
            for n in 1..=4 {
                let t = vec![vec![true; n]; m + n - 1];
                let w = WeightTable::new(m, n, t).unwrap();
                assert!(verify_weight_lemma(&w).passed(), "M={m} N={n}");
            }
        }
    }

    #[test]
    fn exhaustive_small_shapes() {
        for (m, n) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
            let rep = exhaustive_check(m, n);
            assert!(rep.valid > 0);
            assert_eq!(rep.valid, rep.passed, "{:?}", rep.failures);
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(rational_string(&r(6, 1)), "6/1");
        assert_eq!(rational_string(&r(2, 3)), "2/3");
        assert_eq!(bits_string(&tbl(&[&[1, 0], &[1, 1]])), "10;11");
    }
}
