//! Normalized bases: Mahler-Weyl quality, nested supports and the
//! triangular relabeling of the last `N` coordinates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{int_det, norm_sq, LatticeBasis, MinimaReport};
use crate::numerics::RealScalar;

/// Coordinates `h` with `v_h != 0`, as a bitmask (bit 0 is coordinate 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SupportSet(pub u32);

impl SupportSet {
    /// Support of `v`. The flag reports whether the float zero threshold was used.
    pub fn of(v: &[RealScalar]) -> (Self, bool) {
        let mut bits = 0u32;
        let mut thresholded = false;
        for (h, x) in v.iter().enumerate() {
            let (zero, used) = x.is_zero_thresholded();
            thresholded |= used;
            if !zero {
                bits |= 1 << h;
            }
        }
        (SupportSet(bits), thresholded)
    }

    /// `{1..k}` in one-based coordinates.
    pub fn prefix(k: usize) -> Self {
        SupportSet(if k >= 32 { u32::MAX } else { (1u32 << k) - 1 })
    }

    pub fn contains(&self, h: usize) -> bool {
        self.0 >> h & 1 == 1
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// One-based coordinate list, for display.
    pub fn indices(&self) -> Vec<usize> {
        (0..32).filter(|&h| self.contains(h)).map(|h| h + 1).collect()
    }
}

#[derive(Clone, Debug)]
pub struct NormalizedBasis {
    /// Number of leading `x` coordinates; the remaining ones are `y`.
    pub m: usize,
    pub vectors: Vec<Vec<RealScalar>>,
    /// Integer coefficients of each vector in the input basis. For the
    /// lattice of a system matrix these are `(p, q)` in original order.
    pub coefficients: Vec<Vec<i64>>,
    pub supports: Vec<SupportSet>,
    /// `permutation[j] = j'` places original `y_{j'}` at position `j` (zero-based).
    pub permutation: Vec<usize>,
    /// Nesting constants; `c[0] = 0` by convention.
    pub c: Vec<u64>,
    pub lambdas: Vec<RealScalar>,
    pub lambda_sq: Vec<RealScalar>,
    /// True when some support used the float zero threshold.
    pub zero_threshold_used: bool,
}

impl NormalizedBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn n_y(&self) -> usize {
        self.dim() - self.m
    }

    /// `q^s` in permuted order, read from the integer preimage.
    pub fn q_of(&self, s: usize) -> Vec<i64> {
        let z = &self.coefficients[s];
        self.permutation.iter().map(|&j| z[self.m + j]).collect()
    }

    pub fn p_of(&self, s: usize) -> Vec<i64> {
        self.coefficients[s][..self.m].to_vec()
    }

    /// `|v^s|^2 <= (factor * lambda_s)^2` with `factor = max(1, s/2)` times `mult`.
    fn norm_within(&self, s: usize, mult: i64) -> bool {
        let s1 = (s + 1) as i64;
        // factor^2 = max(1, s^2/4) * mult^2
        let f2 = if s1 <= 2 { RealScalar::int(mult * mult) } else { RealScalar::ratio(s1 * s1 * mult * mult, 4) };
        norm_sq(&self.vectors[s]).le(&f2.mul(&self.lambda_sq[s]))
    }

    /// `|v^s| <= max(1, s/2) lambda_s` for every `s`.
    pub fn mahler_weyl_certificate(&self) -> Vec<bool> {
        (0..self.dim()).map(|s| self.norm_within(s, 1)).collect()
    }

    /// `|v^s| <= (n+2) max(1, s/2) lambda_s` for every `s`.
    pub fn nesting_certificate(&self) -> Vec<bool> {
        let n = self.dim() as i64;
        (0..self.dim()).map(|s| self.norm_within(s, n + 2)).collect()
    }

    /// `|v^s| <= (n+2) max(1, n/2) lambda_s` for every `s`.
    pub fn uniform_certificate(&self) -> Vec<bool> {
        let n = self.dim() as i64;
        let f2 =
            if n <= 2 { RealScalar::int((n + 2) * (n + 2)) } else { RealScalar::ratio((n + 2) * (n + 2) * n * n, 4) };
        (0..self.dim()).map(|s| norm_sq(&self.vectors[s]).le(&f2.mul(&self.lambda_sq[s]))).collect()
    }

    pub fn is_nested(&self) -> bool {
        self.supports.windows(2).all(|w| w[0].is_subset(&w[1]))
    }

    /// `|det|` of the integer coefficient matrix; 1 for a basis.
    pub fn coefficient_det(&self) -> BigInt {
        int_det(&self.coefficients).abs()
    }

    fn refresh_supports(&mut self) {
        let mut used = false;
        self.supports = self
            .vectors
            .iter()
            .map(|v| {
                let (s, u) = SupportSet::of(v);
                used |= u;
                s
            })
            .collect();
        self.zero_threshold_used |= used;
    }
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn invert(w: &[Vec<i64>]) -> Option<Vec<Vec<BigRational>>> {
    let n = w.len();
    let mut a: Vec<Vec<BigRational>> = w.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        inv.swap(p, col);
        let piv = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &piv;
            inv[col][c] /= &piv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
                let t = &f * &inv[col][c];
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

/// Rows `h_0..h_{n-1}` spanning the same integer row lattice as `g`, with
/// `h_s[t] = 0` for `t > s` and positive diagonal.
fn lower_hermite(mut g: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let n = g.len();
    let mut out: Vec<Vec<BigInt>> = vec![Vec::new(); n];
    for col in (0..n).rev() {
        loop {
            let nz: Vec<usize> = (0..g.len()).filter(|&r| !g[r][col].is_zero()).collect();
            assert!(!nz.is_empty(), "singular witness matrix");
            if nz.len() == 1 {
                let mut row = g.remove(nz[0]);
                if row[col].is_negative() {
                    for x in row.iter_mut() {
                        *x = -&*x;
                    }
                }
                out[col] = row;
                break;
            }
            let piv = *nz.iter().min_by(|&&a, &&b| g[a][col].abs().cmp(&g[b][col].abs())).unwrap();
            for &r in &nz {
                if r == piv {
                    continue;
                }
                let f = g[r][col].div_floor(&g[piv][col]);
                let prow = g[piv].clone();
                for (x, y) in g[r].iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
    }
    out
}

fn round_rat(x: &BigRational) -> BigInt {
    (x + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

/// A basis of the lattice with `|v^s| <= max(1, s/2) lambda_s`, completed
/// from the minima witnesses: `v^s` lies in the span of `w^1..w^s`, equals
/// `w^s` when that keeps it a basis, and is size-reduced otherwise.
pub fn mahler_weyl_basis(basis: &LatticeBasis, report: &MinimaReport, m: usize) -> Result<NormalizedBasis> {
    let n = basis.dim();
    if m == 0 || m > n {
        return Err(Error::Dimension(format!("M = {m} for a lattice of dimension {n}")));
    }
    let w = &report.coefficients;
    let winv = invert(w).ok_or_else(|| Error::InvariantViolation("witnesses are dependent".into()))?;
    let den = winv.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let g: Vec<Vec<BigInt>> = winv
        .iter()
        .map(|r| r.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect())
        .collect();
    let h = lower_hermite(g);
    let d = BigRational::from_integer(den);
    let mut nu: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for s in 0..n {
        let row: Vec<BigRational> = h[s].iter().map(|x| BigRational::from_integer(x.clone()) / &d).collect();
        if row[s].is_one() {
            let mut e = vec![BigRational::zero(); n];
            e[s] = BigRational::one();
            nu.push(e);
            continue;
        }
        let mut row = row;
        for t in (0..s).rev() {
            let r = round_rat(&(&row[t] / &nu[t][t]));
            if !r.is_zero() {
                let rr = BigRational::from_integer(r);
                for c in 0..=t {
                    let x = &rr * &nu[t][c];
                    row[c] -= x;
                }
            }
        }
        nu.push(row);
    }
    // coefficient vectors x_s = nu_s W
    let mut coefficients = Vec::with_capacity(n);
    for s in 0..n {
        let mut x = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = BigRational::zero();
            for t in 0..=s {
                acc += &nu[s][t] * rat(w[t][i]);
            }
            if !acc.is_integer() {
                return Err(Error::InvariantViolation("completion produced a non-lattice vector".into()));
            }
            x.push(acc.to_integer().to_i64().ok_or_else(|| Error::InvariantViolation("coefficient overflow".into()))?);
        }
        coefficients.push(x);
    }
    if !int_det(&coefficients).abs().is_one() {
        return Err(Error::InvariantViolation("completed vectors do not form a basis".into()));
    }
    let vectors: Vec<Vec<RealScalar>> = coefficients.iter().map(|z| basis.lattice_vector(z)).collect();
    let mut nb = NormalizedBasis {
        m,
        vectors,
        coefficients,
        supports: Vec::new(),
        permutation: (0..n - m).collect(),
        c: vec![0; n],
        lambdas: report.lambdas.clone(),
        lambda_sq: report.lambda_sq.clone(),
        zero_threshold_used: false,
    };
    nb.refresh_supports();
    if let Some(s) = nb.mahler_weyl_certificate().iter().position(|ok| !ok) {
        return Err(Error::InvariantViolation(format!("Mahler-Weyl bound fails at s = {}", s + 1)));
    }
    Ok(nb)
}

/// Replaces `v^s` by `v^s + c_s v~^{s-1}` with the smallest `c_s >= 0` that
/// makes the supports nested.
pub fn nest_supports(basis: &LatticeBasis, nb: &NormalizedBasis) -> Result<NormalizedBasis> {
    let n = nb.dim();
    let mut out = nb.clone();
    out.c = vec![0; n];
    for s in 1..n {
        let prev_support = out.supports[s - 1];
        let prev = out.coefficients[s - 1].clone();
        let mut found = false;
        for c in 0..=(n as i64 + 1) {
            let z: Vec<i64> = out.coefficients[s].iter().zip(&prev).map(|(a, b)| a + c * b).collect();
            let v = if c == 0 { out.vectors[s].clone() } else { basis.lattice_vector(&z) };
            let (supp, used) = SupportSet::of(&v);
            if prev_support.is_subset(&supp) {
                out.zero_threshold_used |= used;
                out.coefficients[s] = z;
                out.vectors[s] = v;
                out.supports[s] = supp;
                out.c[s] = c as u64;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::InvariantViolation(format!("no nesting constant up to n+1 works at s = {}", s + 1)));
        }
    }
    Ok(out)
}

/// Relabels the last `N` coordinates so that every support meets them in a prefix.
pub fn triangular_permutation(nb: &NormalizedBasis) -> Result<NormalizedBasis> {
    let (m, n) = (nb.m, nb.dim());
    let x_mask = SupportSet::prefix(m);
    let mut order: Vec<usize> = Vec::with_capacity(n - m);
    let mut seen = 0u32;
    for (s, supp) in nb.supports.iter().enumerate() {
        if !x_mask.is_subset(supp) || supp.len() <= m {
            return Err(Error::PrecondViolation(format!(
                "support of v^{} is {:?}, which does not strictly contain {{1..{m}}}",
                s + 1,
                supp.indices()
            )));
        }
        for j in 0..n - m {
            if supp.contains(m + j) && seen >> j & 1 == 0 {
                seen |= 1 << j;
                order.push(j);
            }
        }
    }
    if order.len() != n - m {
        return Err(Error::InvariantViolation("some y coordinate vanishes on the whole basis".into()));
    }
    let mut out = nb.clone();
    // compose with any permutation already applied
    out.permutation = order.iter().map(|&j| nb.permutation[j]).collect();
    for v in out.vectors.iter_mut() {
        let ys: Vec<RealScalar> = order.iter().map(|&j| v[m + j].clone()).collect();
        for (pos, y) in ys.into_iter().enumerate() {
            v[m + pos] = y;
        }
    }
    out.refresh_supports();
    // prefix property within the y coordinates
    for (s, supp) in out.supports.iter().enumerate() {
        let ylen = supp.len() - m;
        if !SupportSet::prefix(m + ylen).is_subset(supp) || supp.len() != m + ylen {
            return Err(Error::InvariantViolation(format!("support of v^{} is not a prefix after relabeling", s + 1)));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportCase {
    /// Every `v^s`, `s < M+N`, has `{1..s+1}` in its support.
    Quick,
    /// `supp(v^{s0}) = {1..s0}` for some `M+1 <= s0 < M+N` (smallest such
    /// `s0`, one-based). The last vector always has full support, so
    /// `s0 = M+N` is implicit for the top index and not reported here.
    Slow(usize),
    /// `q^{s0} = 0`; `s0` is the largest such index (one-based).
    ZeroQ(usize),
}

#[derive(Clone, Debug)]
pub struct LadderReport {
    /// Whether `{1..max(M+1, s)}` lies in the support of `v^s`.
    pub holds: Vec<bool>,
    /// Length of the prefix of `y` coordinates in each support.
    pub h: Vec<usize>,
    pub case: SupportCase,
}

impl LadderReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&b| b)
    }
}

pub fn verify_support_ladder(nb: &NormalizedBasis) -> LadderReport {
    let (m, n) = (nb.m, nb.dim());
    let mut holds = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for (s, supp) in nb.supports.iter().enumerate() {
        let need = SupportSet::prefix((m + 1).max(s + 1).min(n));
        holds.push(need.is_subset(supp));
        let mut k = 0;
        while m + k < n && supp.contains(m + k) {
            k += 1;
        }
        h.push(k);
    }
    let y_mask = SupportSet(SupportSet::prefix(n).0 & !SupportSet::prefix(m).0);
    let zero_q = (0..n).filter(|&s| nb.supports[s].0 & y_mask.0 == 0).max();
    let case = if let Some(s) = zero_q {
        SupportCase::ZeroQ(s + 1)
    } else if let Some(s0) = (m + 1..n).find(|&s0| nb.supports[s0 - 1] == SupportSet::prefix(s0)) {
        SupportCase::Slow(s0)
    } else {
        SupportCase::Quick
    };
    LadderReport { holds, h, case }
}

/// Mahler-Weyl completion, nesting, then relabeling when the instance is
/// not a `q = 0` case.
pub fn normalize(basis: &LatticeBasis, report: &MinimaReport, m: usize) -> Result<(NormalizedBasis, LadderReport)> {
    let mw = mahler_weyl_basis(basis, report, m)?;
    let nested = nest_supports(basis, &mw)?;
    let pre = verify_support_ladder(&nested);
    if let SupportCase::ZeroQ(_) = pre.case {
        return Ok((nested, pre));
    }
    match triangular_permutation(&nested) {
        Ok(perm) => {
            let ladder = verify_support_ladder(&perm);
            Ok((perm, ladder))
        }
        Err(Error::PrecondViolation(_)) => Ok((nested, pre)),
        Err(e) => Err(e),
    }
}

/// Lexicographic order helper for supports (used in tests and reports).
pub fn support_cmp(a: &SupportSet, b: &SupportSet) -> Ordering {
    a.0.cmp(&b.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::successive_minima;
    use alloc::vec;

    fn ints(cols: &[Vec<i64>]) -> LatticeBasis {
        LatticeBasis::from_int_columns(cols).unwrap()
    }

    fn nb_from(cols: &[Vec<i64>], m: usize) -> (LatticeBasis, NormalizedBasis) {
        let b = ints(cols);
        let r = successive_minima(&b, 100_000).unwrap();
        let nb = mahler_weyl_basis(&b, &r, m).unwrap();
        (b, nb)
    }

    #[test]
    fn standard_lattices() {
        let (_, nb) = nb_from(&[vec![1, 0], vec![0, 1]], 1);
        assert_eq!(nb.coefficient_det(), BigInt::one());
        assert!(nb.mahler_weyl_certificate().iter().all(|&b| b));
        let b = LatticeBasis::new(vec![
            vec![RealScalar::ratio(1, 2), RealScalar::int(0)],
            vec![RealScalar::int(0), RealScalar::int(3)],
        ])
        .unwrap();
        let r = successive_minima(&b, 1000).unwrap();
        let nb = mahler_weyl_basis(&b, &r, 1).unwrap();
        assert_eq!(nb.vectors[0][0].cmp(&RealScalar::ratio(1, 2)), Ordering::Equal);
        assert_eq!(nb.vectors[1][1].cmp(&RealScalar::int(3)), Ordering::Equal);
    }

    #[test]
    fn witnesses_not_a_basis() {
        // D4-like: the minima witnesses of this lattice span an index-2 sublattice
        let cols = vec![vec![2, 0, 0, 0], vec![0, 2, 0, 0], vec![0, 0, 2, 0], vec![1, 1, 1, 1]];
        let (_, nb) = nb_from(&cols, 1);
        assert_eq!(nb.coefficient_det(), BigInt::one());
        assert!(nb.mahler_weyl_certificate().iter().all(|&b| b));
    }

    #[test]
    fn nesting_examples() {
        let b = ints(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let mk = |cols: Vec<Vec<i64>>| NormalizedBasis {
            m: 1,
            vectors: cols.iter().map(|c| c.iter().map(|&x| RealScalar::int(x)).collect()).collect(),
            supports: cols
                .iter()
                .map(|c| SupportSet::of(&c.iter().map(|&x| RealScalar::int(x)).collect::<Vec<_>>()).0)
                .collect(),
            coefficients: cols,
            permutation: vec![0, 1],
            c: vec![0; 3],
            lambdas: vec![RealScalar::int(1); 3],
            lambda_sq: vec![RealScalar::int(1); 3],
            zero_threshold_used: false,
        };
        let nb = mk(vec![vec![1, 0, 1], vec![-1, 1, -1], vec![0, 0, 1]]);
        let out = nest_supports(&b, &nb).unwrap();
        assert_eq!(out.c[1], 0);
        // c = 1 cancels the third coordinate, c = 2 is the first that works
        assert_eq!(out.c[2], 2);
        assert!(out.is_nested());
        assert_eq!(out.coefficient_det(), BigInt::one());
    }

    #[test]
    fn relabeling_swaps_y() {
        let b = ints(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let vecs = vec![vec![1i64, 0, 1], vec![1, 1, 1], vec![0, 0, 1]];
        let nb = NormalizedBasis {
            m: 1,
            vectors: vecs.iter().map(|c| c.iter().map(|&x| RealScalar::int(x)).collect()).collect(),
            supports: vec![SupportSet(0b101), SupportSet(0b111), SupportSet(0b100)],
            coefficients: vecs,
            permutation: vec![0, 1],
            c: vec![0; 3],
            lambdas: vec![RealScalar::int(1); 3],
            lambda_sq: vec![RealScalar::int(1); 3],
            zero_threshold_used: false,
        };
        let nested = nest_supports(&b, &nb).unwrap();
        let p = triangular_permutation(&nested).unwrap();
        assert_eq!(p.permutation, vec![1, 0]);
        assert_eq!(p.supports[0], SupportSet(0b011));
        let ladder = verify_support_ladder(&p);
        assert_eq!(ladder.h, vec![1, 2, 2]);
        assert_eq!(ladder.case, SupportCase::Quick);
    }

    #[test]
    fn classification() {
        let mk = |supports: Vec<u32>| {
            let n = supports.len();
            NormalizedBasis {
                m: 1,
                vectors: vec![vec![RealScalar::int(0); n]; n],
                coefficients: vec![vec![0; n]; n],
                supports: supports.into_iter().map(SupportSet).collect(),
                permutation: (0..n - 1).collect(),
                c: vec![0; n],
                lambdas: vec![],
                lambda_sq: vec![],
                zero_threshold_used: false,
            }
        };
        assert_eq!(verify_support_ladder(&mk(vec![0b111, 0b111, 0b111])).case, SupportCase::Quick);
        assert_eq!(verify_support_ladder(&mk(vec![0b011, 0b011, 0b111])).case, SupportCase::Slow(2));
        assert_eq!(verify_support_ladder(&mk(vec![0b001, 0b011, 0b111])).case, SupportCase::ZeroQ(1));
        let l = verify_support_ladder(&mk(vec![0b001, 0b011, 0b111]));
        assert!(!l.holds[0] && l.holds[1] && l.holds[2]);
    }
}
