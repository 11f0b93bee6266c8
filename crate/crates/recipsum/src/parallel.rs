//! Chunked drivers. Work is split into fixed ranges of the first coordinate,
//! mapped on the rayon pool and merged in range order, so results do not
//! depend on the thread count.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use recipsum_core::counting::{cell_ratio_rows, count_m_direct_chunk, CountInstance, PhiSource, RatioBoundReport};
use recipsum_core::lattice::{BoxSpec, SystemMatrix};
use recipsum_core::numerics::{BigFloat, RealScalar};
use recipsum_core::partition::Partition;
use recipsum_core::sums::{
    dyadic_upper, envelope, phi_profile, sum_reciprocals_chunk, DyadicReport, SumReport, SweepRow,
};
use recipsum_core::{Error, Result};

/// Width of each range of `q_1` handed to a worker.
pub const CHUNK_WIDTH: i64 = 16;

/// `[-b, b]` cut into consecutive ranges of `width`.
pub fn chunks(b: i64, width: i64) -> Vec<RangeInclusive<i64>> {
    let mut out = Vec::new();
    let mut lo = -b;
    while lo <= b {
        let hi = (lo + width - 1).min(b);
        out.push(lo..=hi);
        lo = hi + 1;
    }
    out
}

pub fn sum_reciprocals_par(l: &SystemMatrix, q: &BoxSpec, budget: u64, prec: u32) -> Result<SumReport> {
    if l.n() != q.n() {
        return Err(Error::Dimension("box and matrix disagree".into()));
    }
    let bounds = q.int_bounds();
    let size: f64 = bounds.iter().map(|&b| 2.0 * b as f64 + 1.0).product();
    if size > budget as f64 {
        return Err(Error::BudgetExceeded { budget });
    }
    let parts: Vec<(BigFloat, u64)> = chunks(bounds[0], CHUNK_WIDTH)
        .into_par_iter()
        .map(|r| sum_reciprocals_chunk(l, q, r, prec))
        .collect::<Result<_>>()?;
    let mut total = BigFloat::zero(parts[0].0.prec());
    let mut terms = 0;
    for (v, t) in &parts {
        total = total.add(v);
        terms += t;
    }
    Ok(SumReport { q: q.sides().to_vec(), value: total.with_prec(prec), terms })
}

pub fn count_direct_par(inst: &CountInstance, budget: u64, prec: u32) -> Result<u64> {
    inst.check_budget(budget)?;
    let b = inst.q.int_bounds()[0];
    Ok(chunks(b, CHUNK_WIDTH).into_par_iter().map(|r| count_m_direct_chunk(inst, r, prec)).sum())
}

/// Ratio rows for every cell, computed in parallel and kept in cell order.
pub fn ratio_bounds_par(
    inst: &CountInstance,
    partition: &Partition,
    phi: PhiSource,
    max_nodes: u64,
    prec: u32,
) -> Result<RatioBoundReport> {
    let per_cell: Vec<_> = (0..partition.len())
        .into_par_iter()
        .map(|idx| cell_ratio_rows(inst, partition, idx, phi.value(), max_nodes, prec))
        .collect::<Result<_>>()?;
    Ok(RatioBoundReport::from_rows(per_cell.into_iter().flatten().collect(), phi))
}

/// A sweep point with the sum evaluated in parallel; also returns the term
/// count and the dyadic detail.
pub fn sweep_point_par(
    l: &SystemMatrix,
    sides: &[i64],
    shape: &str,
    budget: u64,
    prec: u32,
) -> Result<(SweepRow, u64, DyadicReport)> {
    let q = BoxSpec::new(sides.iter().map(|&x| RealScalar::int(x)).collect())?;
    let q_geo = q.q_geo(prec);
    let prof = phi_profile(l, std::slice::from_ref(&q_geo), budget, prec)?;
    let phi = prof.values[0].clone();
    let sum = sum_reciprocals_par(l, &q, budget, prec)?;
    let (lower, upper) = envelope(l.m(), &q, &phi, prec)?;
    let dy = dyadic_upper(l, &q, &phi, budget, prec)?;
    let row = SweepRow {
        q: sides.to_vec(),
        q_geo: q_geo.to_f64(),
        shape: shape.to_string(),
        c_low: sum.value.div(&lower).to_f64(),
        c_up: sum.value.div(&upper).to_f64(),
        s: sum.value,
        phi,
        lower,
        upper,
        dyadic: dy.value.clone(),
        dyadic_k_max: dy.k_max,
    };
    Ok((row, sum.terms, dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use recipsum_core::counting::count_m_direct;
    use recipsum_core::numerics::{parse_matrix, DecimalMode, DEFAULT_PRECISION};
    use recipsum_core::sums::sum_reciprocals;

    #[test]
    fn chunks_cover() {
        let c = chunks(20, 16);
        assert_eq!(c, vec![-20..=-5, -4..=11, 12..=20]);
        assert_eq!(chunks(0, 16), vec![0..=0]);
    }

    proptest::proptest! {
        #[test]
        fn chunks_partition_the_range(b in 0i64..500, width in 1i64..40) {
            let c = chunks(b, width);
            proptest::prop_assert_eq!(*c[0].start(), -b);
            proptest::prop_assert_eq!(*c[c.len() - 1].end(), b);
            for w in c.windows(2) {
                proptest::prop_assert_eq!(*w[0].end() + 1, *w[1].start());
            }
            proptest::prop_assert!(c.iter().all(|r| r.end() - r.start() < width && r.start() <= r.end()));
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let l = SystemMatrix::new(parse_matrix("sqrt(2),sqrt(3)", DecimalMode::Exact).unwrap()).unwrap();
        let q = BoxSpec::new(vec![RealScalar::int(40), RealScalar::int(3)]).unwrap();
        let a = sum_reciprocals_par(&l, &q, u64::MAX, DEFAULT_PRECISION).unwrap();
        let b = sum_reciprocals(&l, &q, u64::MAX, DEFAULT_PRECISION).unwrap();
        assert_eq!(a.terms, b.terms);
        assert!((a.value.to_f64() / b.value.to_f64() - 1.0).abs() < 1e-30);

        let inst = CountInstance::new(l, RealScalar::ratio(1, 8), RealScalar::int(1), q).unwrap();
        assert_eq!(
            count_direct_par(&inst, u64::MAX, DEFAULT_PRECISION).unwrap(),
            count_m_direct(&inst, u64::MAX, DEFAULT_PRECISION).unwrap()
        );
    }
}
