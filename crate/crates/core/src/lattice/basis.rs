//! Lattice bases, the unipotent lattice of a system matrix and diagonal scalings.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::numerics::{BigFloat, RealScalar};

/// An `M x N` real matrix, stored by rows.
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    rows: Vec<Vec<RealScalar>>,
}

impl SystemMatrix {
    pub fn new(rows: Vec<Vec<RealScalar>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Dimension("system matrix needs at least one row and column".into()));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged system matrix".into()));
        }
        Ok(SystemMatrix { rows })
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[RealScalar] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<RealScalar>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &RealScalar {
        &self.rows[i][j]
    }

    pub fn is_exact(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_exact())
    }

    /// Every row lives in a single quadratic field, so row values are exact.
    pub fn rows_exact(&self) -> bool {
        self.rows.iter().all(|r| {
            let q = alloc::vec![1i64; r.len()];
            crate::numerics::row_value(r, &q).is_ok() && r.iter().all(|x| x.is_exact())
        })
    }

    /// For rows that each live in one quadratic field: whether every row is
    /// linearly independent of 1 over the rationals, i.e. `L_i q` is never an
    /// integer for `q != 0`. Inside a single field this needs `N = 1` and an
    /// irrational entry. `None` when the question cannot be settled exactly.
    pub fn rows_irrational(&self) -> Option<bool> {
        if !self.rows_exact() {
            return None;
        }
        Some(self.rows.iter().all(|r| r.len() == 1 && !r[0].as_exact().unwrap().is_rational()))
    }
}

/// Axis lengths `Q_1..Q_N` of the box for the `q` variables.
#[derive(Clone, Debug)]
pub struct BoxSpec {
    q: Vec<RealScalar>,
}

impl BoxSpec {
    pub fn new(q: Vec<RealScalar>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Dimension("box needs at least one side".into()));
        }
        if q.iter().any(|x| x.lt(&RealScalar::int(1))) {
            return Err(Error::Domain("box sides must be at least 1".into()));
        }
        Ok(BoxSpec { q })
    }

    pub fn uniform(q: RealScalar, n: usize) -> Result<Self> {
        Self::new(alloc::vec![q; n])
    }

    pub fn sides(&self) -> &[RealScalar] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `Q_1 ... Q_N`, which equals `Q_geo^N`.
    pub fn product(&self) -> RealScalar {
        self.q.iter().fold(RealScalar::int(1), |acc, x| acc.mul(x))
    }

    pub fn q_geo(&self, prec: u32) -> RealScalar {
        let p = self.product();
        if self.q.len() == 1 {
            return p;
        }
        RealScalar::Approx(p.to_bigfloat(prec + 16).root(self.q.len() as u32).with_prec(prec))
    }

    pub fn q_max(&self) -> RealScalar {
        let mut m = self.q[0].clone();
        for x in &self.q[1..] {
            if m.lt(x) {
                m = x.clone();
            }
        }
        m
    }

    /// Integer bounds `floor(Q_j)`.
    pub fn int_bounds(&self) -> Vec<i64> {
        use num_traits::ToPrimitive;
        self.q.iter().map(|x| x.floor().to_i64().expect("box side too large")).collect()
    }
}

#[derive(Clone, Debug)]
pub enum Provenance {
    Raw,
    UnipotentFromL {
        m: usize,
        n: usize,
    },
    /// Image of `source` under `diag(scale)`; `source` is never itself scaled.
    ScaledImage {
        source: Box<LatticeBasis>,
        scale: Vec<RealScalar>,
    },
}

/// Basis vectors are stored as columns: lattice point = sum_k z_k vectors[k].
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    vectors: Vec<Vec<RealScalar>>,
    provenance: Provenance,
    det: RealScalar,
}

impl LatticeBasis {
    pub fn new(vectors: Vec<Vec<RealScalar>>) -> Result<Self> {
        let n = vectors.len();
        if n == 0 || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension("basis must be n vectors of length n".into()));
        }
        let det = determinant(&transpose(&vectors));
        if det.is_zero() {
            return Err(Error::Domain("basis vectors are linearly dependent".into()));
        }
        Ok(LatticeBasis { vectors, provenance: Provenance::Raw, det })
    }

    /// Integer basis given by columns.
    pub fn from_int_columns(cols: &[Vec<i64>]) -> Result<Self> {
        Self::new(cols.iter().map(|c| c.iter().map(|&x| RealScalar::int(x)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<RealScalar>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[RealScalar] {
        &self.vectors[k]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn det(&self) -> &RealScalar {
        &self.det
    }

    /// The lattice point with integer coefficients `z`.
    ///
    /// For scaled images the point is computed in the exact source lattice
    /// first, so coordinates that vanish there are exactly zero here.
    pub fn lattice_vector(&self, z: &[i64]) -> Vec<RealScalar> {
        if let Provenance::ScaledImage { source, scale } = &self.provenance {
            return source.lattice_vector(z).iter().zip(scale).map(|(x, s)| x.mul(s)).collect();
        }
        let n = self.dim();
        let mut out = alloc::vec![RealScalar::int(0); n];
        for (k, &zk) in z.iter().enumerate() {
            if zk == 0 {
                continue;
            }
            for h in 0..n {
                out[h] = out[h].add(&self.vectors[k][h].mul_int(zk));
            }
        }
        out
    }

    /// Basis of the same lattice given by integer column operations `U`
    /// (columns of `u` are coefficient vectors). Provenance is kept.
    pub fn transformed(&self, u: &[Vec<i64>]) -> Result<Self> {
        let vectors: Vec<Vec<RealScalar>> = u.iter().map(|z| self.lattice_vector(z)).collect();
        let det_u = int_det(u);
        if det_u.abs() != BigInt::one() {
            return Err(Error::Domain("transform is not unimodular".into()));
        }
        let det = self.det.mul(&RealScalar::bigint(det_u));
        let provenance = match &self.provenance {
            Provenance::ScaledImage { source, scale } => {
                Provenance::ScaledImage { source: Box::new(source.transformed(u)?), scale: scale.clone() }
            }
            _ => Provenance::Raw,
        };
        Ok(LatticeBasis { vectors, provenance, det })
    }
}

/// Columns of `[[I_M, L], [0, I_N]]`.
pub fn build_unipotent_lattice(l: &SystemMatrix) -> LatticeBasis {
    let (m, n) = (l.m(), l.n());
    let dim = m + n;
    let mut vectors = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut v = alloc::vec![RealScalar::int(0); dim];
        if k < m {
            v[k] = RealScalar::int(1);
        } else {
            let j = k - m;
            for i in 0..m {
                v[i] = l.entry(i, j).clone();
            }
            v[k] = RealScalar::int(1);
        }
        vectors.push(v);
    }
    LatticeBasis { vectors, provenance: Provenance::UnipotentFromL { m, n }, det: RealScalar::int(1) }
}

/// `(eps Q^N)^(1/(M+N)) / eps^(1/M)`.
pub fn theta(eps: &RealScalar, q_geo: &RealScalar, m: usize, n: usize, prec: u32) -> Result<RealScalar> {
    if eps.signum() <= 0 {
        return Err(Error::Domain("eps must be positive".into()));
    }
    if q_geo.lt(&RealScalar::int(1)) {
        return Err(Error::Domain("Q_geo must be at least 1".into()));
    }
    let p = prec + 32;
    let e = eps.to_bigfloat(p);
    let qn = q_geo.to_bigfloat(p).powi(n as i64);
    let num = e.mul(&qn).pow(&BigFloat::from_ratio(&BigInt::one(), &BigInt::from(m + n), p));
    let den = e.pow(&BigFloat::from_ratio(&BigInt::one(), &BigInt::from(m), p));
    Ok(RealScalar::Approx(num.div(&den).with_prec(prec)))
}

/// Image of `basis` under `diag(mu, nu)`.
pub fn scale_lattice(basis: &LatticeBasis, mu: &[RealScalar], nu: &[RealScalar]) -> Result<LatticeBasis> {
    let scale: Vec<RealScalar> = mu.iter().chain(nu).cloned().collect();
    scale_diagonal(basis, &scale)
}

pub fn scale_diagonal(basis: &LatticeBasis, scale: &[RealScalar]) -> Result<LatticeBasis> {
    if scale.len() != basis.dim() {
        return Err(Error::Dimension(format!("{} scale factors for dimension {}", scale.len(), basis.dim())));
    }
    if scale.iter().any(|s| s.signum() <= 0) {
        return Err(Error::Domain("scale factors must be positive".into()));
    }
    let vectors = basis.vectors.iter().map(|v| v.iter().zip(scale).map(|(x, s)| x.mul(s)).collect()).collect();
    let factor = scale.iter().fold(RealScalar::int(1), |acc, s| acc.mul(s));
    let det = basis.det.mul(&factor);
    let (source, total) = match &basis.provenance {
        Provenance::ScaledImage { source, scale: inner } => {
            (source.clone(), inner.iter().zip(scale).map(|(a, b)| a.mul(b)).collect())
        }
        _ => (Box::new(basis.clone()), scale.to_vec()),
    };
    Ok(LatticeBasis { vectors, provenance: Provenance::ScaledImage { source, scale: total }, det })
}

pub fn transpose(cols: &[Vec<RealScalar>]) -> Vec<Vec<RealScalar>> {
    let n = cols.len();
    let m = cols[0].len();
    (0..m).map(|i| (0..n).map(|k| cols[k][i].clone()).collect()).collect()
}

/// Determinant by Gaussian elimination, exact whenever the entries share a field.
pub fn determinant(rows: &[Vec<RealScalar>]) -> RealScalar {
    let n = rows.len();
    let mut a: Vec<Vec<RealScalar>> = rows.to_vec();
    let mut det = RealScalar::int(1);
    for col in 0..n {
        // pivot: largest magnitude, exact zeros never chosen
        let mut best: Option<(usize, f64)> = None;
        for r in col..n {
            if a[r][col].is_zero() {
                continue;
            }
            let mag = a[r][col].to_f64().abs();
            if best.is_none_or(|(_, m)| mag > m) {
                best = Some((r, mag));
            }
        }
        let Some((p, _)) = best else {
            return RealScalar::int(0);
        };
        if p != col {
            a.swap(p, col);
            det = det.neg();
        }
        let piv = a[col][col].clone();
        det = det.mul(&piv);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].div(&piv).unwrap();
            for c in col..n {
                let t = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
            }
        }
    }
    det
}

/// Exact determinant of a small integer matrix (given by columns).
pub fn int_det(cols: &[Vec<i64>]) -> BigInt {
    use num_rational::BigRational;
    use num_traits::Zero;
    let n = cols.len();
    let mut a: Vec<Vec<BigRational>> =
        (0..n).map(|i| (0..n).map(|k| BigRational::from_integer(BigInt::from(cols[k][i]))).collect()).collect();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigInt::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det *= &piv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &piv;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det.to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION;
    use core::cmp::Ordering;

    fn l(rows: &[&[RealScalar]]) -> SystemMatrix {
        SystemMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn unipotent_lattice_shape() {
        let b = build_unipotent_lattice(&l(&[&[RealScalar::sqrt_int(2), RealScalar::sqrt_int(3)]]));
        assert_eq!(b.dim(), 3);
        let v = b.vector(1);
        assert_eq!(v[0].cmp(&RealScalar::sqrt_int(2)), Ordering::Equal);
        assert_eq!(v[1].cmp(&RealScalar::int(1)), Ordering::Equal);
        assert!(v[2].is_zero());
        assert_eq!(determinant(&transpose(b.vectors())).cmp(&RealScalar::int(1)), Ordering::Equal);
    }

    #[test]
    fn theta_values() {
        let t = theta(&RealScalar::ratio(1, 4), &RealScalar::int(4), 1, 1, DEFAULT_PRECISION).unwrap();
        assert!((t.to_f64() - 4.0).abs() < 1e-30_f64.max(1e-15));
        let t = theta(&RealScalar::int(1), &RealScalar::int(1), 2, 3, DEFAULT_PRECISION).unwrap();
        assert!((t.to_f64() - 1.0).abs() < 1e-15);
        // (0.1 * 64)^(1/3) / 0.1
        let t = theta(&RealScalar::ratio(1, 10), &RealScalar::int(8), 1, 2, DEFAULT_PRECISION).unwrap();
        let oracle = libm::cbrt(6.4) / 0.1;
        assert!((t.to_f64() - oracle).abs() < 1e-12);
        assert!((t.to_f64() - 18.5664).abs() < 1e-4);
        assert!(theta(&RealScalar::int(0), &RealScalar::int(2), 1, 1, 192).is_err());
    }

    #[test]
    fn scaling_tracks_determinant() {
        let b = build_unipotent_lattice(&l(&[&[RealScalar::sqrt_int(2)]]));
        let s = scale_lattice(&b, &[RealScalar::int(2)], &[RealScalar::ratio(1, 2)]).unwrap();
        assert_eq!(s.det().cmp(&RealScalar::int(1)), Ordering::Equal);
        assert_eq!(s.vector(1)[0].cmp(&RealScalar::sqrt_int(8)), Ordering::Equal);
        assert_eq!(s.vector(1)[1].cmp(&RealScalar::ratio(1, 2)), Ordering::Equal);
        let s2 = scale_lattice(&s, &[RealScalar::int(3)], &[RealScalar::int(5)]).unwrap();
        assert_eq!(s2.det().cmp(&RealScalar::int(15)), Ordering::Equal);
        match s2.provenance() {
            Provenance::ScaledImage { source, scale } => {
                assert!(matches!(source.provenance(), Provenance::UnipotentFromL { .. }));
                assert_eq!(scale[0].cmp(&RealScalar::int(6)), Ordering::Equal);
            }
            _ => panic!("expected scaled provenance"),
        }
        assert!(scale_lattice(&b, &[RealScalar::int(-1)], &[RealScalar::int(1)]).is_err());
    }

    #[test]
    fn dependent_basis_rejected() {
        assert!(LatticeBasis::from_int_columns(&[alloc::vec![1, 2], alloc::vec![2, 4]]).is_err());
        assert_eq!(int_det(&[alloc::vec![2, 1], alloc::vec![1, 3]]), BigInt::from(5));
    }
}
