//! Partition of the hyperbolic region `H+ = {x : prod |x_i| < eps, 0 < |x_i| <= T}`
//! into cells, each carried into the cube `[-delta, delta]^M` (`delta = eps^(1/M)`)
//! by a diagonal map of fixed determinant.
//!
//! Layer coordinates `k_1..k_(M-1)` record `|x_i|` in `(T e^-(k+1), T e^-k]`, the
//! last layer `K_cap = ceil(Lambda)` holding everything below `T e^-K_cap`, where
//! `Lambda = M log(T/delta) - (M-1)`. Cells with `sum k < Lambda` get the scales
//! forced by their bounding box; the others are water-filled so that every cell
//! has `prod mu_i = e^-(M-1)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{
    build_unipotent_lattice, scale_lattice, theta, BoxSpec, LatticeBasis, MinimaReport, SystemMatrix,
};
use crate::numerics::{BigFloat, RealScalar};

/// `constant + log_t * log(T) + log_eps * log(eps)` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogLinear {
    pub constant: BigRational,
    pub log_t: BigRational,
    pub log_eps: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl LogLinear {
    pub fn zero() -> Self {
        LogLinear { constant: BigRational::zero(), log_t: BigRational::zero(), log_eps: BigRational::zero() }
    }

    pub fn new(constant: BigRational, log_t: BigRational, log_eps: BigRational) -> Self {
        LogLinear { constant, log_t, log_eps }
    }

    pub fn constant(c: BigRational) -> Self {
        LogLinear { constant: c, ..Self::zero() }
    }

    pub fn add(&self, o: &Self) -> Self {
        LogLinear {
            constant: &self.constant + &o.constant,
            log_t: &self.log_t + &o.log_t,
            log_eps: &self.log_eps + &o.log_eps,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        LogLinear { constant: &self.constant * r, log_t: &self.log_t * r, log_eps: &self.log_eps * r }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.log_t.is_zero() && self.log_eps.is_zero()
    }

    pub fn eval(&self, logs: &Logs) -> BigFloat {
        let p = logs.prec;
        let r = |x: &BigRational| BigFloat::from_ratio(x.numer(), x.denom(), p);
        r(&self.constant).add(&r(&self.log_t).mul(&logs.log_t)).add(&r(&self.log_eps).mul(&logs.log_eps))
    }
}

impl fmt::Display for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*log(T) + {}*log(eps)", self.constant, self.log_t, self.log_eps)
    }
}

/// `log T` and `log eps` at a working precision.
#[derive(Clone, Debug)]
pub struct Logs {
    pub log_t: BigFloat,
    pub log_eps: BigFloat,
    pub prec: u32,
}

#[derive(Clone, Debug)]
pub struct HyperbolicRegion {
    m: usize,
    eps: RealScalar,
    t: RealScalar,
}

impl HyperbolicRegion {
    pub fn new(m: usize, eps: RealScalar, t: RealScalar) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("M must be at least 1".into()));
        }
        if eps.signum() <= 0 || t.signum() <= 0 {
            return Err(Error::Domain("eps and T must be positive".into()));
        }
        Ok(HyperbolicRegion { m, eps, t })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> &RealScalar {
        &self.eps
    }

    pub fn t(&self) -> &RealScalar {
        &self.t
    }

    pub fn logs(&self, prec: u32) -> Logs {
        let p = prec + 32;
        Logs { log_t: self.t.to_bigfloat(p).ln(), log_eps: self.eps.to_bigfloat(p).ln(), prec: p }
    }

    /// `log(T^M / eps) - M`; the partition needs this to be positive.
    pub fn excess(&self, prec: u32) -> BigFloat {
        let logs = self.logs(prec);
        self.log_ratio().eval(&logs).sub(&BigFloat::from_i64(self.m as i64, logs.prec))
    }

    /// `log(T^M / eps)` as a record.
    pub fn log_ratio(&self) -> LogLinear {
        LogLinear::new(BigRational::zero(), rat(self.m as i64, 1), rat(-1, 1))
    }

    /// `log delta = log(eps) / M`.
    pub fn log_delta(&self) -> LogLinear {
        LogLinear::new(BigRational::zero(), BigRational::zero(), rat(1, self.m as i64))
    }

    /// Membership in `H+`, evaluated in double precision.
    pub fn contains_f64(&self, x: &[f64]) -> bool {
        let (t, e) = (self.t.to_f64(), self.eps.to_f64());
        x.len() == self.m
            && x.iter().all(|v| *v != 0.0 && v.abs() <= t)
            && x.iter().map(|v| v.abs()).product::<f64>() < e
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Scales forced by the cell's bounding box.
    Product,
    /// Water-filled scales for cells deep in the spikes.
    WaterFill,
}

#[derive(Clone, Debug)]
pub struct PartitionCell {
    pub k: Vec<u32>,
    pub regime: Regime,
    /// `a_i`, summing to zero.
    pub exponents: Vec<LogLinear>,
    /// `log mu_i = a_i - c`.
    pub log_scales: Vec<LogLinear>,
    /// Log of the supremum of `|x_i|` over the cell.
    pub log_upper: Vec<LogLinear>,
    pub scales_f64: Vec<f64>,
}

impl PartitionCell {
    pub fn exponent_sum(&self) -> LogLinear {
        self.exponents.iter().fold(LogLinear::zero(), |acc, a| acc.add(a))
    }

    /// `exp(a_i - c)` at the given precision.
    pub fn scales(&self, region: &HyperbolicRegion, prec: u32) -> Vec<RealScalar> {
        let logs = region.logs(prec);
        self.log_scales
            .iter()
            .map(
                |r| {
                    if r.is_zero() {
                        RealScalar::int(1)
                    } else {
                        RealScalar::Approx(r.eval(&logs).exp().with_prec(prec))
                    }
                },
            )
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Partition {
    pub region: HyperbolicRegion,
    pub k_cap: u32,
    /// `c = (M-1)/M`.
    pub c: BigRational,
    pub cells: Vec<PartitionCell>,
    /// Smallest `exp(a_i - c) / (delta / T)` over all cells.
    pub kappa: f64,
    /// `#cells / log(T/delta)^(M-1)`.
    pub count_constant: f64,
    /// `T e^-k` for `k = 0..=k_cap`, shared by every layer test.
    boundaries: Vec<f64>,
}

/// Sign of a record, certified when it is symbolically zero and otherwise
/// decided at the working precision.
fn record_sign(r: &LogLinear, logs: &Logs) -> Result<i32> {
    if r.is_zero() {
        return Ok(0);
    }
    let v = r.eval(logs);
    if v.is_zero() || v.abs().top() < -(logs.prec as i64) + 48 {
        return Err(Error::InvariantViolation(format!("cannot decide the sign of {r}")));
    }
    Ok(v.signum())
}

pub fn build_partition(region: &HyperbolicRegion, prec: u32) -> Result<Partition> {
    let m = region.m;
    if region.excess(prec).signum() <= 0 {
        return Err(Error::PrecondViolation("partition needs T^M/eps > e^M".into()));
    }
    let logs = region.logs(prec);
    let log_delta = region.log_delta();
    let log_t = LogLinear::new(BigRational::zero(), BigRational::one(), BigRational::zero());
    let mm1 = rat(m as i64 - 1, 1);
    // Lambda = M log(T/delta) - (M-1) = log(T^M/eps) - (M-1)
    let lambda = region.log_ratio().sub(&LogLinear::constant(mm1.clone()));
    let lambda_val = lambda.eval(&logs);
    let k_cap = lambda_val.ceil().to_u32().ok_or_else(|| Error::Domain("too many layers".into()))?;
    let c = rat(m as i64 - 1, m as i64);
    let base = log_delta.sub(&log_t);

    let radix = k_cap as usize + 1;
    let total = radix.checked_pow(m as u32 - 1).ok_or_else(|| Error::Domain("too many cells".into()))?;
    let mut cells = Vec::with_capacity(total);
    let mut min_lift: Option<BigFloat> = None;
    for idx in 0..total {
        let mut k = vec![0u32; m - 1];
        let mut r = idx;
        for i in (0..m - 1).rev() {
            k[i] = (r % radix) as u32;
            r /= radix;
        }
        let sum_k: i64 = k.iter().map(|&x| x as i64).sum();
        let below = lambda.sub(&LogLinear::constant(rat(sum_k, 1)));
        let regime = if record_sign(&below, &logs)? > 0 { Regime::Product } else { Regime::WaterFill };

        let mut log_scales = Vec::with_capacity(m);
        let mut log_upper = Vec::with_capacity(m);
        for &ki in &k {
            log_upper.push(log_t.sub(&LogLinear::constant(rat(ki as i64, 1))));
        }
        match regime {
            Regime::Product => {
                for &ki in &k {
                    log_scales.push(base.add(&LogLinear::constant(rat(ki as i64, 1))));
                }
                // U_M = eps e^(M-1+sum k) / T^(M-1)
                let u_m = LogLinear::new(rat(m as i64 - 1 + sum_k, 1), -mm1.clone(), BigRational::one());
                log_scales.push(log_delta.sub(&u_m));
                log_upper.push(u_m);
            }
            Regime::WaterFill => {
                let level = water_level(&k, &lambda, &logs)?;
                for &ki in &k {
                    let ki_rec = LogLinear::constant(rat(ki as i64, 1));
                    let lvl = match &level {
                        Some(t) if record_sign(&t.sub(&ki_rec), &logs)? < 0 => t.clone(),
                        _ => ki_rec,
                    };
                    log_scales.push(base.add(&lvl));
                }
                log_scales.push(base.clone());
                log_upper.push(log_t.clone());
            }
        }
        let exponents: Vec<LogLinear> = log_scales.iter().map(|s| s.add(&LogLinear::constant(c.clone()))).collect();
        for (s, u) in log_scales.iter().zip(&log_upper) {
            // mu_i * sup|x_i| <= delta
            if record_sign(&s.add(u).sub(&log_delta), &logs)? > 0 {
                return Err(Error::InvariantViolation(format!("cell {k:?} is not carried into the cube")));
            }
            let lift = s.sub(&base).eval(&logs);
            if min_lift.as_ref().is_none_or(|v| lift.cmp_value(v).is_lt()) {
                min_lift = Some(lift);
            }
        }
        let scales_f64 = log_scales.iter().map(|s| libm::exp(s.eval(&logs).to_f64())).collect();
        let cell = PartitionCell { k, regime, exponents, log_scales, log_upper, scales_f64 };
        if !cell.exponent_sum().is_zero() {
            return Err(Error::InvariantViolation(format!("exponents of cell {:?} do not sum to zero", cell.k)));
        }
        cells.push(cell);
    }
    let kappa = libm::exp(min_lift.map_or(0.0, |v| v.to_f64()));
    let ell = log_t.sub(&log_delta).eval(&logs).to_f64();
    let count_constant = cells.len() as f64 / libm::pow(ell, m as f64 - 1.0);
    let t = region.t.to_f64();
    let boundaries = (0..=k_cap).map(|k| t * libm::exp(-(k as f64))).collect();
    Ok(Partition { region: region.clone(), k_cap, c, cells, kappa, count_constant, boundaries })
}

/// Level `t` with `sum_i min(k_i, t) = Lambda`, as a record, or `None` when
/// every `k_i` lies below it (only possible when `sum k = Lambda`).
fn water_level(k: &[u32], lambda: &LogLinear, logs: &Logs) -> Result<Option<LogLinear>> {
    let mut sorted: Vec<u32> = k.to_vec();
    sorted.sort_unstable();
    let mut filled = 0i64;
    for (j, &kj) in sorted.iter().enumerate() {
        let rest = (sorted.len() - j) as i64;
        let t = lambda.sub(&LogLinear::constant(rat(filled, 1))).scale(&rat(1, rest));
        if record_sign(&LogLinear::constant(rat(kj as i64, 1)).sub(&t), logs)? >= 0 {
            return Ok(Some(t));
        }
        filled += kj as i64;
    }
    Ok(None)
}

impl Partition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The right-hand side `4^M log(T/delta)^(M-1)` of the cardinality bound.
    pub fn cardinality_bound(&self, prec: u32) -> f64 {
        let logs = self.region.logs(prec);
        let log_t = LogLinear::new(BigRational::zero(), BigRational::one(), BigRational::zero());
        let ell = log_t.sub(&self.region.log_delta()).eval(&logs).to_f64();
        let m = self.region.m as f64;
        libm::pow(4.0, m) * libm::pow(ell, m - 1.0)
    }

    fn layer(&self, v: f64) -> u32 {
        let a = v.abs();
        // largest k with a <= boundaries[k]
        let mut k = 0;
        while (k as u32) < self.k_cap && a <= self.boundaries[k + 1] {
            k += 1;
        }
        k as u32
    }

    /// Whether `x` satisfies the layer predicate of `cell`.
    pub fn claims(&self, cell: &PartitionCell, x: &[f64]) -> bool {
        cell.k.iter().zip(x).all(|(&k, &v)| {
            let a = v.abs();
            let ku = k as usize;
            if k < self.k_cap {
                self.boundaries[ku + 1] < a && a <= self.boundaries[ku]
            } else {
                a <= self.boundaries[ku]
            }
        })
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: &[f64]) -> Result<usize> {
        if !self.region.contains_f64(x) {
            return Err(Error::NotInRegion);
        }
        let radix = self.k_cap as usize + 1;
        let m = self.region.m;
        Ok(x[..m - 1].iter().fold(0usize, |acc, &v| acc * radix + self.layer(v) as usize))
    }

    /// `max_i mu_i |x_i| / delta` for a point of cell `idx`, in double precision.
    pub fn image_ratio(&self, idx: usize, x: &[f64]) -> f64 {
        let delta = libm::pow(self.region.eps.to_f64(), 1.0 / self.region.m as f64);
        self.cells[idx].scales_f64.iter().zip(x).map(|(s, v)| s * v.abs() / delta).fold(0.0, f64::max)
    }
}

/// Basis of the image of the unipotent lattice of `l` under the cell map
/// extended by the identity, the box-equalizing map and the cube scaling.
pub fn extend_and_compose(
    partition: &Partition,
    cell: &PartitionCell,
    l: &SystemMatrix,
    q: &BoxSpec,
    prec: u32,
) -> Result<LatticeBasis> {
    let region = &partition.region;
    let (m, n) = (l.m(), l.n());
    if m != region.m || n != q.n() {
        return Err(Error::Dimension("matrix, region and box dimensions disagree".into()));
    }
    let p = prec + 32;
    let q_geo = q.q_geo(p);
    let th = theta(&region.eps, &q_geo, m, n, p)?;
    let th_f = th.to_bigfloat(p);
    let mu: Vec<RealScalar> = cell.scales(region, p).iter().map(|s| s.mul(&th)).collect();
    let th_y = th_f.pow(&BigFloat::from_ratio(&BigInt::from(-(m as i64)), &BigInt::from(n as i64), p));
    let qg = q_geo.to_bigfloat(p);
    let nu: Vec<RealScalar> =
        q.sides().iter().map(|qj| RealScalar::Approx(th_y.mul(&qg).div(&qj.to_bigfloat(p)))).collect();

    // corners of the reference box land on the cube of side (eps Q^N)^(1/(M+N))
    let radius = region.eps.to_bigfloat(p).mul(&qg.powi(n as i64)).pow(&BigFloat::from_ratio(
        &BigInt::one(),
        &BigInt::from((m + n) as i64),
        p,
    ));
    let slack = BigFloat::from_i64(1, p).ldexp(-(prec as i64) + 16);
    let tol = radius.mul(&slack);
    let logs = region.logs(prec);
    for (s, u) in mu.iter().zip(&cell.log_upper) {
        let corner = s.to_bigfloat(p).mul(&u.eval(&logs).exp());
        if corner.sub(&radius).cmp_value(&tol).is_gt() {
            return Err(Error::InvariantViolation("x-corner leaves the cube".into()));
        }
    }
    for (v, qj) in nu.iter().zip(q.sides()) {
        let corner = v.to_bigfloat(p).mul(&qj.to_bigfloat(p));
        if corner.sub(&radius).abs().cmp_value(&tol).is_gt() {
            return Err(Error::InvariantViolation("y-corner misses the cube face".into()));
        }
    }
    scale_lattice(&build_unipotent_lattice(l), &mu, &nu)
}

/// `1 + sum_s V_s / (lambda_1 ... lambda_s)`, where `V_s` is the largest
/// product of `s` distinct half-widths.
pub fn davenport_count_bound(report: &MinimaReport, half_widths: &[RealScalar]) -> Result<RealScalar> {
    if report.lambdas.len() != half_widths.len() {
        return Err(Error::Dimension(format!(
            "{} half-widths for a lattice of dimension {}",
            half_widths.len(),
            report.lambdas.len()
        )));
    }
    let mut p: Vec<RealScalar> = half_widths.to_vec();
    p.sort_by(|a, b| b.cmp(a));
    let mut total = RealScalar::int(1);
    let mut vol = RealScalar::int(1);
    let mut lam = RealScalar::int(1);
    for (ps, ls) in p.iter().zip(&report.lambdas) {
        vol = vol.mul(ps);
        lam = lam.mul(ls);
        total = total.add(&vol.div(&lam)?);
    }
    Ok(total)
}

/// One line per cell: `k`, regime, exponents and scales.
pub fn dump_cell(cell: &PartitionCell) -> String {
    let a: Vec<String> = cell.exponents.iter().map(|r| format!("[{r}]")).collect();
    format!("k={:?} regime={:?} a={}", cell.k, cell.regime, a.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::successive_minima;
    use crate::numerics::DEFAULT_PRECISION;
    use rand::{Rng, SeedableRng};

    const P: u32 = DEFAULT_PRECISION;

    fn region(m: usize, eps: (i64, i64), t: i64) -> HyperbolicRegion {
        HyperbolicRegion::new(m, RealScalar::ratio(eps.0, eps.1), RealScalar::int(t)).unwrap()
    }

    #[test]
    fn single_cell_when_m_is_one() {
        let p = build_partition(&region(1, (1, 4), 1), P).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.cells[0].exponents[0].is_zero());
        assert!(p.cells[0].log_scales[0].is_zero());
        assert_eq!(p.cell_of(&[0.1]).unwrap(), 0);
        assert!(matches!(p.cell_of(&[0.3]), Err(Error::NotInRegion)));
    }

    #[test]
    fn rejects_thin_regions() {
        // T/eps = 2 < e
        assert!(matches!(build_partition(&region(1, (1, 2), 1), P), Err(Error::PrecondViolation(_))));
        // T^2/eps = 9 > e^2
        assert!(build_partition(&region(2, (1, 1), 3), P).is_ok());
    }

    #[test]
    fn every_cell_has_balanced_exponents_and_fixed_determinant() {
        for (m, eps, t) in [(2, (1, 1), 8), (2, (1, 64), 2), (3, (1, 1024), 3), (3, (1, 2), 5)] {
            let p = build_partition(&region(m, eps, t), P).unwrap();
            let target = LogLinear::constant(rat(1 - m as i64, 1));
            for cell in &p.cells {
                assert!(cell.exponent_sum().is_zero());
                let prod = cell.log_scales.iter().fold(LogLinear::zero(), |a, s| a.add(s));
                assert_eq!(prod, target);
            }
            assert!(p.kappa >= 1.0 - 1e-12);
            assert!((p.len() as f64) <= p.cardinality_bound(P));
        }
    }

    #[test]
    fn first_layer_is_the_top_shell() {
        let p = build_partition(&region(2, (1, 1), 8), P).unwrap();
        let idx = p.cell_of(&[7.0, 0.01]).unwrap();
        assert_eq!(p.cells[idx].k, vec![0]);
        let idx = p.cell_of(&[8.0 / core::f64::consts::E - 1e-9, 0.01]).unwrap();
        assert_eq!(p.cells[idx].k, vec![1]);
    }

    #[test]
    fn sampled_points_have_one_cell_and_land_in_the_cube() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (m, eps, t) in [(2, (1, 1), 8), (3, (1, 100), 4)] {
            let r = region(m, eps, t);
            let p = build_partition(&r, P).unwrap();
            let (tf, ef) = (r.t().to_f64(), r.eps().to_f64());
            let mut hits = 0;
            while hits < 2000 {
                // log-uniform magnitudes reach the spikes
                let x: Vec<f64> = (0..m)
                    .map(|_| {
                        let mag = tf * libm::exp(-rng.gen::<f64>() * 12.0);
                        if rng.gen() {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .collect();
                if x.iter().map(|v| v.abs()).product::<f64>() >= ef {
                    continue;
                }
                hits += 1;
                let claims = p.cells.iter().filter(|c| p.claims(c, &x)).count();
                assert_eq!(claims, 1);
                let idx = p.cell_of(&x).unwrap();
                assert!(p.claims(&p.cells[idx], &x));
                assert!(p.image_ratio(idx, &x) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn composed_map_for_one_by_one() {
        // eps = 1/4, Q = 4: theta = 4, mu = 4, nu = 1/4
        let r = region(1, (1, 4), 1);
        let p = build_partition(&r, P).unwrap();
        let l = SystemMatrix::new(vec![vec![RealScalar::sqrt_int(2)]]).unwrap();
        let q = BoxSpec::new(vec![RealScalar::int(4)]).unwrap();
        let b = extend_and_compose(&p, &p.cells[0], &l, &q, P).unwrap();
        let v0 = b.vector(0);
        assert!((v0[0].to_f64() - 4.0).abs() < 1e-30);
        let v1 = b.vector(1);
        assert!((v1[1].to_f64() - 0.25).abs() < 1e-30);
        assert!((v1[0].to_f64() - 4.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((b.det().to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn composed_determinant_is_cell_independent() {
        let r = region(2, (1, 16), 3);
        let p = build_partition(&r, P).unwrap();
        let l = SystemMatrix::new(vec![vec![RealScalar::sqrt_int(2)], vec![RealScalar::sqrt_int(3)]]).unwrap();
        let q = BoxSpec::new(vec![RealScalar::int(9)]).unwrap();
        let expected = libm::exp(-1.0);
        for cell in &p.cells {
            let b = extend_and_compose(&p, cell, &l, &q, P).unwrap();
            let d = b.det().to_bigfloat(P).sub(&BigFloat::from_i64(1, P).neg().exp()).abs();
            assert!(d.to_f64() < 1e-40, "det {} vs {expected}", b.det().to_f64());
        }
    }

    #[test]
    fn davenport_bound_examples() {
        let z2 = LatticeBasis::from_int_columns(&[vec![1, 0], vec![0, 1]]).unwrap();
        let rep = successive_minima(&z2, 100_000).unwrap();
        let b = davenport_count_bound(&rep, &[RealScalar::int(1), RealScalar::int(1)]).unwrap();
        assert_eq!(b.to_f64(), 3.0);
        let b = davenport_count_bound(&rep, &[RealScalar::int(2), RealScalar::int(3)]).unwrap();
        assert_eq!(b.to_f64(), 10.0);
        assert!(davenport_count_bound(&rep, &[RealScalar::int(1)]).is_err());
    }

    #[test]
    fn record_display() {
        let r = LogLinear::new(rat(1, 2), rat(-1, 1), rat(1, 3));
        assert_eq!(alloc::string::ToString::to_string(&r), "1/2 + -1*log(T) + 1/3*log(eps)");
        let cell = &build_partition(&region(1, (1, 4), 1), P).unwrap().cells[0];
        assert!(dump_cell(cell).starts_with("k=[] regime=Product"));
    }
}
