//! Seeded instance generators and exact checks, shared by `verify` and the
//! acceptance run.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use recipsum_core::counting::{
    corner_determinant, count_m_direct, count_triangular_box, count_via_lattice, slow_case_determinant, CountInstance,
};
use recipsum_core::lattice::{
    build_unipotent_lattice, minkowski_check, scale_lattice, successive_minima, theta, BoxSpec, LatticeBasis,
    MinimaReport, SystemMatrix,
};
use recipsum_core::normal::normalize;
use recipsum_core::numerics::{BigFloat, QuadSurd, RealScalar};
use recipsum_core::partition::{build_partition, davenport_count_bound, extend_and_compose, HyperbolicRegion};
use recipsum_core::sums::phi_profile;
use recipsum_core::weights::exhaustive_check;
use recipsum_core::Result;

use crate::records::CheckRecord;

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const FIELDS: [u64; 5] = [2, 3, 5, 6, 7];

/// Node budget for minima enumeration in the suites.
pub const MINIMA_NODES: u64 = 50_000_000;

/// `(a + b sqrt(d)) / c` with small coefficients and `b != 0`.
pub fn random_surd(rng: &mut SuiteRng, d: u64) -> RealScalar {
    let a = rng.gen_range(-4..=4);
    let b = *[-3, -2, -1, 1, 2, 3].choose(rng).unwrap();
    let c = rng.gen_range(1..=6);
    RealScalar::Exact(QuadSurd::new(BigInt::from(a), BigInt::from(b), BigInt::from(c), d))
}

/// Random `m x n` matrix over one quadratic field, with occasional
/// rational entries.
pub fn random_matrix(rng: &mut SuiteRng, m: usize, n: usize) -> SystemMatrix {
    let d = *FIELDS.choose(rng).unwrap();
    let rows = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen_ratio(1, 6) {
                        RealScalar::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))
                    } else {
                        random_surd(rng, d)
                    }
                })
                .collect()
        })
        .collect();
    SystemMatrix::new(rows).expect("non-empty matrix")
}

/// Counting instance with `M, N <= max_dim`, `Q_j <= max_q`, `T <= 3` and
/// `eps = 2^-k`, `k <= 8`.
pub fn random_count_instance(rng: &mut SuiteRng, max_dim: usize, max_q: i64) -> CountInstance {
    let m = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(1..=max_dim);
    let l = random_matrix(rng, m, n);
    let q = BoxSpec::new((0..n).map(|_| RealScalar::int(rng.gen_range(1..=max_q))).collect()).unwrap();
    let t = RealScalar::ratio(rng.gen_range(1..=12), 4);
    let eps = RealScalar::ratio(1, 1 << rng.gen_range(0..=8));
    CountInstance::new(l, eps, t, q).unwrap()
}

/// Direct count against the lattice count on each instance.
pub fn check_identity(instances: &[CountInstance], budget: u64, prec: u32) -> CheckRecord {
    let results: Vec<Result<(u64, u64)>> = instances
        .par_iter()
        .map(|inst| Ok((count_m_direct(inst, budget, prec)?, count_via_lattice(inst, budget)?)))
        .collect();
    let mut detail = Vec::new();
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok((a, b)) if a == b => {}
            Ok((a, b)) => detail.push(format!("instance {i}: direct {a}, lattice {b}")),
            Err(e) => detail.push(format!("instance {i}: {e}")),
        }
    }
    CheckRecord { check: "identity".into(), instances: instances.len(), failures: detail.len(), detail }
}

/// For `L = [golden]`: `eps Q < phi(Q)` forces an empty count, with `phi`
/// taken from the profile and `eps` just below `phi(Q)/Q`.
pub fn check_emptiness(q_max: i64, budget: u64, prec: u32) -> CheckRecord {
    let l = SystemMatrix::new(vec![vec![RealScalar::golden()]]).unwrap();
    let grid: Vec<RealScalar> = (2..=q_max).map(RealScalar::int).collect();
    let mut detail = Vec::new();
    let prof = match phi_profile(&l, &grid, budget, prec) {
        Ok(p) => p,
        Err(e) => {
            return CheckRecord { check: "emptiness".into(), instances: 0, failures: 1, detail: vec![e.to_string()] };
        }
    };
    let shrink = RealScalar::int(1).sub(&RealScalar::ratio(1, 1 << 20));
    let mut instances = 0;
    for (x, phi) in grid.iter().zip(&prof.values) {
        let eps = phi.div(x).expect("Q > 0").mul(&shrink);
        for t in [RealScalar::ratio(1, 2), RealScalar::int(2)] {
            instances += 1;
            let q = BoxSpec::new(vec![x.clone()]).unwrap();
            let inst = CountInstance::new(l.clone(), eps.clone(), t.clone(), q).unwrap();
            match count_m_direct(&inst, budget, prec) {
                Ok(0) => {}
                Ok(c) => detail.push(format!("Q = {}, T = {}: count {c}", x.to_f64(), t.to_f64())),
                Err(e) => detail.push(format!("Q = {}: {e}", x.to_f64())),
            }
        }
    }
    CheckRecord { check: "emptiness".into(), instances, failures: detail.len(), detail }
}

/// Exhaustive weight recursion check over the given shapes.
pub fn check_weights(shapes: &[(usize, usize)]) -> CheckRecord {
    let reps: Vec<_> = shapes.par_iter().map(|&(m, n)| exhaustive_check(m, n)).collect();
    let mut detail = Vec::new();
    let mut instances = 0;
    let mut failures = 0;
    for r in &reps {
        instances += r.valid;
        failures += r.valid - r.passed;
        detail.push(format!(
            "(M,N)=({},{}): {} valid of {}, {} passed, {} failing outside the ladder condition",
            r.m, r.n, r.valid, r.examined, r.passed, r.outside_ladder_failures
        ));
    }
    CheckRecord { check: "weights".into(), instances, failures, detail }
}

/// Lattice of a random system matrix mapped through a random partition
/// cell; returns the basis and `M`.
pub fn random_pipeline_lattice(rng: &mut SuiteRng, dim: usize, prec: u32) -> Result<(LatticeBasis, usize)> {
    let m = rng.gen_range(1..dim);
    let n = dim - m;
    let l = random_matrix(rng, m, n);
    let k = rng.gen_range(2 * m as u32 + 1..=2 * m as u32 + 6);
    let eps = RealScalar::ratio(1, 1 << k);
    let region = HyperbolicRegion::new(m, eps, RealScalar::int(1))?;
    let partition = build_partition(&region, prec)?;
    let cell = &partition.cells[rng.gen_range(0..partition.len())];
    let q = BoxSpec::new((0..n).map(|_| RealScalar::int(rng.gen_range(2..=50))).collect())?;
    Ok((extend_and_compose(&partition, cell, &l, &q, prec)?, m))
}

/// Nonsingular integer lattice with entries in `[-6, 6]`.
pub fn random_integer_lattice(rng: &mut SuiteRng, dim: usize) -> LatticeBasis {
    loop {
        let cols: Vec<Vec<i64>> = (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-6..=6)).collect()).collect();
        if let Ok(b) = LatticeBasis::from_int_columns(&cols) {
            if !b.det().is_exact_zero() {
                return b;
            }
        }
    }
}

/// Half pipeline lattices, half integer lattices, dimensions 2 to `max_dim`.
pub fn random_lattices(
    rng: &mut SuiteRng,
    count: usize,
    max_dim: usize,
    prec: u32,
) -> Result<Vec<(LatticeBasis, usize)>> {
    (0..count)
        .map(|i| {
            let dim = rng.gen_range(2..=max_dim);
            if i % 2 == 0 {
                random_pipeline_lattice(rng, dim, prec)
            } else {
                Ok((random_integer_lattice(rng, dim), (dim / 2).max(1)))
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct MinimaOutcome {
    pub report: Option<MinimaReport>,
    pub minkowski_ratio: Option<f64>,
    pub errors: Vec<String>,
    pub nesting_ok: bool,
}

/// Minima, normalized basis certificates and the Minkowski sandwich for
/// each lattice.
pub fn examine_lattices(lattices: &[(LatticeBasis, usize)], prec: u32) -> Vec<MinimaOutcome> {
    lattices
        .par_iter()
        .map(|(b, m)| {
            let mut out = MinimaOutcome { report: None, minkowski_ratio: None, errors: Vec::new(), nesting_ok: false };
            let rep = match successive_minima(b, MINIMA_NODES) {
                Ok(r) => r,
                Err(e) => {
                    out.errors.push(format!("minima: {e}"));
                    return out;
                }
            };
            match minkowski_check(&rep, b.det(), prec) {
                Ok(r) => out.minkowski_ratio = Some(r.to_f64()),
                Err(e) => out.errors.push(format!("minkowski: {e}")),
            }
            match normalize(b, &rep, *m) {
                Ok((nb, _)) => {
                    let bound = nb.nesting_certificate().iter().all(|&x| x);
                    let unimodular = nb.coefficient_det() == BigInt::from(1);
                    out.nesting_ok = bound && nb.is_nested() && unimodular;
                    if !out.nesting_ok {
                        out.errors.push(format!(
                            "normalized basis: bound {bound}, nested {}, unimodular {unimodular}",
                            nb.is_nested()
                        ));
                    }
                }
                Err(e) => out.errors.push(format!("normalize: {e}")),
            }
            out.report = Some(rep);
            out
        })
        .collect()
}

/// Splits lattice outcomes into the nesting check and the Minkowski check.
pub fn minima_checks(outcomes: &[MinimaOutcome]) -> (CheckRecord, CheckRecord) {
    let mut nest = Vec::new();
    let mut mink = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        if !o.nesting_ok {
            nest.push(format!("lattice {i}: {}", o.errors.join("; ")));
        }
        if o.minkowski_ratio.is_none() {
            mink.push(format!("lattice {i}: {}", o.errors.join("; ")));
        }
    }
    let n = outcomes.len();
    (
        CheckRecord { check: "nesting".into(), instances: n, failures: nest.len(), detail: nest },
        CheckRecord { check: "minkowski".into(), instances: n, failures: mink.len(), detail: mink },
    )
}

/// Upper-triangular lattice over one quadratic field with positive
/// diagonal, plus random half-widths in `[1, 5]`.
pub fn random_triangular(rng: &mut SuiteRng, n: usize) -> (LatticeBasis, Vec<RealScalar>) {
    let d = *FIELDS.choose(rng).unwrap();
    let cols: Vec<Vec<RealScalar>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|h| {
                    if h > k {
                        RealScalar::int(0)
                    } else if h == k {
                        RealScalar::ratio(rng.gen_range(1..=9), rng.gen_range(1..=3))
                    } else if rng.gen_bool(0.5) {
                        RealScalar::ratio(rng.gen_range(-6..=6), 4)
                    } else {
                        random_surd(rng, d)
                    }
                })
                .collect()
        })
        .collect();
    let widths = (0..n).map(|_| RealScalar::ratio(rng.gen_range(4..=20), 4)).collect();
    (LatticeBasis::new(cols).expect("nonsingular"), widths)
}

/// Exact box count over the Davenport bound, plus the minima report.
pub fn davenport_ratio(basis: &LatticeBasis, widths: &[RealScalar], budget: u64) -> Result<(u64, f64, MinimaReport)> {
    let count = count_triangular_box(basis, widths, budget, |_, _, _, _| true)?;
    let rep = successive_minima(basis, MINIMA_NODES)?;
    let bound = davenport_count_bound(&rep, widths)?;
    Ok((count, count as f64 / bound.to_f64(), rep))
}

#[derive(Clone, Debug)]
pub struct SlowInstance {
    pub basis: LatticeBasis,
    pub eps: RealScalar,
    pub q: BoxSpec,
    pub m: usize,
    pub s0: usize,
}

/// Scaled unipotent lattice with balanced `x` scales and a unimodular change
/// of the first `s0` columns giving `supp(v^{s0}) = {1..s0}`.
pub fn random_slow_instance(rng: &mut SuiteRng, prec: u32) -> Result<SlowInstance> {
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(2..=3);
    let s0 = rng.gen_range(m + 1..=m + n);
    let l = random_matrix(rng, m, n);
    let q = BoxSpec::new((0..n).map(|_| RealScalar::int(rng.gen_range(1..=30))).collect())?;
    let eps = RealScalar::ratio(1, 1 << rng.gen_range(1..=10));
    let p = prec + 32;
    let q_geo = q.q_geo(p);
    let th = theta(&eps, &q_geo, m, n, p)?.to_bigfloat(p);
    // exponents a_i with sum exactly zero
    let mut a: Vec<i64> = (0..m).map(|_| rng.gen_range(-8..=8)).collect();
    let total: i64 = a.iter().sum();
    a[m - 1] -= total;
    let mu: Vec<RealScalar> = a
        .iter()
        .map(|&ai| {
            RealScalar::Approx(th.mul(&BigFloat::from_ratio(&BigInt::from(ai), &BigInt::from(4), p).exp()).with_prec(p))
        })
        .collect();
    let th_y = th.pow(&BigFloat::from_ratio(&BigInt::from(-(m as i64)), &BigInt::from(n as i64), p));
    let qg = q_geo.to_bigfloat(p);
    let nu: Vec<RealScalar> =
        q.sides().iter().map(|qj| RealScalar::Approx(th_y.mul(&qg).div(&qj.to_bigfloat(p)))).collect();
    let scaled = scale_lattice(&build_unipotent_lattice(&l), &mu, &nu)?;
    let dim = m + n;
    let mut u: Vec<Vec<i64>> = (0..dim).map(|k| (0..dim).map(|h| i64::from(h == k)).collect()).collect();
    for h in 0..s0 - 1 {
        u[s0 - 1][h] = *[-2, -1, 1, 2].choose(rng).unwrap();
    }
    Ok(SlowInstance { basis: scaled.transformed(&u)?, eps, q, m, s0 })
}

/// Relative error of the leading `s0 x s0` determinant against the closed
/// form; `None` when `v^{s0}` does not have support `{1..s0}`.
pub fn slow_relative_error(inst: &SlowInstance, prec: u32) -> Result<Option<f64>> {
    let v = inst.basis.vector(inst.s0 - 1);
    let support_ok = v.iter().enumerate().all(|(h, x)| (h < inst.s0) != x.is_exact_zero());
    if !support_ok {
        return Ok(None);
    }
    let p = prec + 32;
    let corner = corner_determinant(&inst.basis, inst.s0).abs().to_bigfloat(p);
    let formula = slow_case_determinant(&inst.eps, &inst.q, inst.m, inst.s0, prec)?.with_prec(p);
    Ok(Some(corner.sub(&formula).abs().div(&formula).to_f64()))
}

/// The fast suite behind `verify --suite desk`.
pub fn desk_suite(seed: u64, budget: u64, prec: u32) -> Result<Vec<CheckRecord>> {
    let mut r = rng(seed);
    let instances: Vec<CountInstance> = (0..24).map(|_| random_count_instance(&mut r, 2, 8)).collect();
    let lattices = random_lattices(&mut r, 16, 4, prec)?;
    let outcomes = examine_lattices(&lattices, prec);
    let (nesting, minkowski) = minima_checks(&outcomes);
    Ok(vec![
        check_identity(&instances, budget, prec),
        check_weights(&[(1, 2), (1, 3), (2, 2)]),
        minkowski,
        nesting,
        check_emptiness(16, budget, prec),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use recipsum_core::numerics::DEFAULT_PRECISION;

    #[test]
    fn generators_are_seeded() {
        let a: Vec<String> = (0..5).map(|_| format!("{:?}", random_surd(&mut rng(3), 5))).collect();
        let b: Vec<String> = (0..5).map(|_| format!("{:?}", random_surd(&mut rng(3), 5))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn slow_instances_match() {
        let mut r = rng(11);
        for _ in 0..4 {
            let inst = random_slow_instance(&mut r, DEFAULT_PRECISION).unwrap();
            let err = slow_relative_error(&inst, DEFAULT_PRECISION).unwrap().expect("support");
            assert!(err < 1e-40, "{err}");
        }
    }

    #[test]
    fn desk_suite_passes() {
        for c in desk_suite(1, 1_000_000_000, DEFAULT_PRECISION).unwrap() {
            assert!(c.passed(), "{c:?}");
        }
    }
}
