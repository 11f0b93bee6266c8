//! Floating-point LLL and Gram-Schmidt data used to bound the enumeration.
//!
//! Nothing here is reported; the transform is integral, so rounding only
//! affects efficiency, never correctness.

use alloc::vec;
use alloc::vec::Vec;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt coefficients `mu[i][j]` (j < i) and squared lengths of the
/// orthogonalized vectors.
pub struct GramSchmidt {
    pub mu: Vec<Vec<f64>>,
    pub bstar_sq: Vec<f64>,
}

pub fn gram_schmidt(cols: &[Vec<f64>]) -> GramSchmidt {
    let n = cols.len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar_sq = vec![0.0; n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = if bstar_sq[j] > 0.0 { dot(&cols[i], &bstar[j]) / bstar_sq[j] } else { 0.0 };
            mu[i][j] = m;
            for (x, y) in v.iter_mut().zip(&bstar[j]) {
                *x -= m * y;
            }
        }
        bstar_sq[i] = dot(&v, &v);
        bstar.push(v);
    }
    GramSchmidt { mu, bstar_sq }
}

/// LLL with parameter 0.99. Returns the integer transform: column `k` of the
/// result holds the coefficients of reduced vector `k` in the input basis.
pub fn lll(cols: &[Vec<f64>]) -> Vec<Vec<i64>> {
    let n = cols.len();
    let mut b: Vec<Vec<f64>> = cols.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|k| (0..n).map(|i| i64::from(i == k)).collect()).collect();
    if n <= 1 {
        return u;
    }
    let delta = 0.99;
    let mut k = 1;
    let mut steps = 0usize;
    while k < n && steps < 100_000 {
        steps += 1;
        // size reduction leaves the orthogonalized vectors alone, so one
        // Gram-Schmidt pass per step is enough
        let mut gs = gram_schmidt(&b);
        for j in (0..k).rev() {
            let r = libm::round(gs.mu[k][j]);
            if r != 0.0 && libm::fabs(r) < 9.0e15 {
                let ri = r as i64;
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= r * y;
                }
                let uj = u[j].clone();
                for (x, y) in u[k].iter_mut().zip(&uj) {
                    *x -= ri * y;
                }
                gs.mu[k][j] -= r;
                for i in 0..j {
                    gs.mu[k][i] -= r * gs.mu[j][i];
                }
            }
        }
        let lhs = gs.bstar_sq[k];
        let rhs = (delta - gs.mu[k][k - 1] * gs.mu[k][k - 1]) * gs.bstar_sq[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    u
}

/// Near-shortest vectors outside a sublattice, with their float squared norms.
pub struct Shortest {
    pub points: Vec<(Vec<i64>, f64)>,
    pub nodes: u64,
}

/// Shortest `y` with `y_k != 0` for some `k >= fixed`, i.e. lattice vectors
/// outside the span of the first `fixed` basis vectors. The radius shrinks
/// to the best norm found times `1 + slack`; every point within the final
/// radius is returned, one of each `+-y`.
pub fn enumerate_outside(
    gs: &GramSchmidt,
    fixed: usize,
    radius_sq: f64,
    slack: f64,
    budget: u64,
    nodes_so_far: u64,
) -> Option<Shortest> {
    let n = gs.bstar_sq.len();
    let mut st =
        Outside { gs, fixed, slack, radius_sq, y: vec![0i64; n], out: Vec::new(), nodes: nodes_so_far, budget };
    if !st.rec(n, 0.0, true) {
        return None;
    }
    let r = st.radius_sq;
    let points = st.out.into_iter().filter(|(_, p)| *p <= r).collect();
    Some(Shortest { points, nodes: st.nodes })
}

struct Outside<'a> {
    gs: &'a GramSchmidt,
    fixed: usize,
    slack: f64,
    radius_sq: f64,
    y: Vec<i64>,
    out: Vec<(Vec<i64>, f64)>,
    nodes: u64,
    budget: u64,
}

impl Outside<'_> {
    fn rec(&mut self, level: usize, partial: f64, all_zero_above: bool) -> bool {
        if level == 0 {
            if !all_zero_above {
                self.out.push((self.y.clone(), partial));
                let shrunk = partial * (1.0 + self.slack);
                if shrunk < self.radius_sq {
                    self.radius_sq = shrunk;
                }
            }
            return true;
        }
        if level <= self.fixed && all_zero_above {
            // the whole subtree lies in the sublattice
            return true;
        }
        let k = level - 1;
        let n = self.y.len();
        let mut c = 0.0;
        for j in k + 1..n {
            c -= self.y[j] as f64 * self.gs.mu[j][k];
        }
        let rem = self.radius_sq - partial;
        if rem < 0.0 {
            return true;
        }
        let b = self.gs.bstar_sq[k];
        let w = libm::sqrt(rem / b);
        let mut lo = libm::ceil(c - w) as i64;
        let hi = libm::floor(c + w) as i64;
        if all_zero_above {
            lo = lo.max(0);
        }
        if lo > hi {
            return true;
        }
        // visit candidates in order of distance from the center
        let mut up = (libm::round(c) as i64).clamp(lo, hi);
        let mut down = up - 1;
        loop {
            let take_up = match (up <= hi, down >= lo) {
                (false, false) => break,
                (true, false) => true,
                (false, true) => false,
                (true, true) => (up as f64 - c).abs() <= (c - down as f64).abs(),
            };
            let v = if take_up { up } else { down };
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            let d = v as f64 - c;
            let p = partial + d * d * b;
            if p > self.radius_sq {
                // everything further out on this side is longer
                if take_up {
                    up = hi + 1;
                } else {
                    down = lo - 1;
                }
                continue;
            }
            self.y[k] = v;
            if !self.rec(k, p, all_zero_above && v == 0) {
                return false;
            }
            if take_up {
                up += 1;
            } else {
                down -= 1;
            }
        }
        self.y[k] = 0;
        true
    }
}
