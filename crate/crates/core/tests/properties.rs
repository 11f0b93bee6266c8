use core::cmp::Ordering;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recipsum_core::counting::{count_for_q, count_m_direct, count_via_lattice, CountInstance};
use recipsum_core::lattice::{
    int_det, minkowski_check, scale_diagonal, successive_minima, BoxSpec, LatticeBasis, SystemMatrix,
};
use recipsum_core::numerics::{surd_sign, BigFloat, QuadSurd, RealScalar, DEFAULT_PRECISION};
use recipsum_core::weights::{all_tables, prefix_lengths, validity, weight_sums};

const PREC: u32 = DEFAULT_PRECISION;

fn surd_value(a: i64, b: i64, d: u64) -> BigFloat {
    let p = 512;
    let r = BigFloat::from_i64(d as i64, p).sqrt();
    BigFloat::from_i64(a, p).add(&BigFloat::from_i64(b, p).mul(&r))
}

fn irrational_entry(rng: &mut ChaCha8Rng) -> RealScalar {
    let d = [2u64, 3, 5, 6, 7][rng.gen_range(0..5)];
    let b = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let a = rng.gen_range(-3..=3);
    let c = rng.gen_range(1..=4);
    RealScalar::int(a).add(&RealScalar::sqrt_int(d).mul_int(b)).div(&RealScalar::int(c)).unwrap()
}

fn instance(seed: u64, eps: RealScalar, t: RealScalar) -> CountInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=2);
    let rows = (0..m).map(|_| (0..n).map(|_| irrational_entry(&mut rng)).collect()).collect();
    let sides = (0..n).map(|_| RealScalar::int(rng.gen_range(1..=6))).collect();
    CountInstance::new(SystemMatrix::new(rows).unwrap(), eps, t, BoxSpec::new(sides).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surd_sign_matches_wide_float(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000, d in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
        let s = surd_sign(&BigInt::from(a), &BigInt::from(b), d);
        let expect = match surd_value(a, b, d).signum() {
            x if x < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        };
        prop_assert_eq!(s, expect);
    }

    #[test]
    fn exact_arithmetic_matches_floats(a in -50i64..50, b in -50i64..50, c in 1i64..20, e in -50i64..50, f in -50i64..50) {
        let x = QuadSurd::new(BigInt::from(a), BigInt::from(b), BigInt::from(c), 5);
        let y = QuadSurd::new(BigInt::from(e), BigInt::from(f), BigInt::from(1), 5);
        let r5 = 5f64.sqrt();
        let xf = (a as f64 + b as f64 * r5) / c as f64;
        let yf = e as f64 + f as f64 * r5;
        prop_assert!((x.add(&y).unwrap().to_f64() - (xf + yf)).abs() < 1e-9);
        prop_assert!((x.mul(&y).unwrap().to_f64() - xf * yf).abs() < 1e-9 * (1.0 + (xf * yf).abs()));
        let floor = x.floor();
        prop_assert_eq!(floor, BigInt::from(xf.floor() as i64));
    }

    #[test]
    fn count_identity(seed in any::<u64>(), ek in 1u32..6, tk in 1i64..8) {
        let inst = instance(seed, RealScalar::ratio(1, 1 << ek), RealScalar::ratio(tk, 2));
        let direct = count_m_direct(&inst, u64::MAX, PREC).unwrap();
        prop_assert_eq!(direct, count_via_lattice(&inst, u64::MAX).unwrap());
    }

    #[test]
    fn count_grows_with_eps_and_t(seed in any::<u64>(), ek in 2u32..6, tk in 1i64..6) {
        let small = instance(seed, RealScalar::ratio(1, 1 << ek), RealScalar::ratio(tk, 2));
        let wider_eps = instance(seed, RealScalar::ratio(1, 1 << (ek - 1)), RealScalar::ratio(tk, 2));
        let wider_t = instance(seed, RealScalar::ratio(1, 1 << ek), RealScalar::ratio(tk + 1, 2));
        let c = count_m_direct(&small, u64::MAX, PREC).unwrap();
        prop_assert!(c <= count_m_direct(&wider_eps, u64::MAX, PREC).unwrap());
        prop_assert!(c <= count_m_direct(&wider_t, u64::MAX, PREC).unwrap());
    }

    #[test]
    fn count_is_even_in_q(seed in any::<u64>(), q0 in -6i64..=6, q1 in -6i64..=6) {
        let inst = instance(seed, RealScalar::ratio(1, 4), RealScalar::int(1));
        let q: Vec<i64> = [q0, q1][..inst.n()].to_vec();
        let neg: Vec<i64> = q.iter().map(|x| -x).collect();
        prop_assert_eq!(count_for_q(&inst, &q, PREC), count_for_q(&inst, &neg, PREC));
    }
}

fn int_lattice(rng: &mut ChaCha8Rng, n: usize) -> LatticeBasis {
    loop {
        let cols: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-4..=4)).collect()).collect();
        if int_det(&cols) != BigInt::from(0) {
            return LatticeBasis::from_int_columns(&cols).unwrap();
        }
    }
}

fn unimodular(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|k| (0..n).map(|i| i64::from(i == k)).collect()).collect();
    for _ in 0..2 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            let c = rng.gen_range(-1..=1);
            for r in 0..n {
                u[i][r] += c * u[j][r];
            }
        }
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn minima_ignore_the_basis(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = int_lattice(&mut rng, n);
        let moved = b.transformed(&unimodular(&mut rng, n)).unwrap();
        let r = successive_minima(&b, 1_000_000).unwrap();
        let s = successive_minima(&moved, 1_000_000).unwrap();
        for (x, y) in r.lambda_sq.iter().zip(&s.lambda_sq) {
            prop_assert_eq!(x.cmp(y), Ordering::Equal);
        }
        prop_assert!(minkowski_check(&s, moved.det(), PREC).is_ok());
    }

    #[test]
    fn minima_scale_linearly(seed in any::<u64>(), n in 2usize..=4, k in 2i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = int_lattice(&mut rng, n);
        let scaled = scale_diagonal(&b, &vec![RealScalar::ratio(k, 3); n]).unwrap();
        let r = successive_minima(&b, 1_000_000).unwrap();
        let s = successive_minima(&scaled, 1_000_000).unwrap();
        for (x, y) in r.lambdas.iter().zip(&s.lambdas) {
            prop_assert_eq!(x.mul(&RealScalar::ratio(k, 3)).cmp(y), Ordering::Equal);
        }
    }
}

#[test]
fn total_count_is_even() {
    for seed in 0..20 {
        let inst = instance(seed, RealScalar::ratio(1, 8), RealScalar::int(1));
        assert_eq!(count_m_direct(&inst, u64::MAX, PREC).unwrap() % 2, 0, "seed {seed}");
    }
}

#[test]
fn weights_dominate_their_base() {
    // a valid table never shrinks k_s below M + h_s
    for (m, n) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        for t in all_tables(m, n) {
            if !validity(m, &t).all() {
                continue;
            }
            let k = weight_sums(m, &t).unwrap();
            for (ks, h) in k.iter().zip(prefix_lengths(&t)) {
                assert!(*ks >= num_rational::BigRational::from_integer(BigInt::from(m + h)));
            }
        }
    }
}
