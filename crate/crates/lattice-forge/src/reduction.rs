//! Exact LLL reduction and Gram-Schmidt machinery over the rationals.
//!
//! Reduction runs on the integer Gram matrix alone and returns the
//! unimodular transform, so it applies uniformly to every scaled-lattice
//! representation. No floating point anywhere.

use crate::matrix::{int_identity, IMat, QMat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Lovász parameter as an exact rational; the crate-wide default is 99/100.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delta {
    pub num: i64,
    pub den: i64,
}

impl Delta {
    pub const DEFAULT: Delta = Delta { num: 99, den: 100 };

    pub fn new(num: i64, den: i64) -> Option<Delta> {
        // require 1/4 < num/den < 1
        if den > 0 && 4 * num > den && num < den {
            Some(Delta { num, den })
        } else {
            None
        }
    }

    fn as_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }
}

fn round_rational(x: &BigRational) -> BigInt {
    // nearest integer, ties toward zero are fine for size reduction
    let two = BigInt::from(2);
    let num = x.numer() * &two + x.denom();
    num.div_floor(&(x.denom() * &two))
}

use num_integer::Integer as _;

/// LLL-reduce the lattice described by an integer Gram matrix.
/// Returns `(u, reduced_gram)` with `reduced_gram = u * gram * u^T` and
/// `u` unimodular.
pub fn lll_gram(gram: &IMat, delta: Delta) -> (IMat, IMat) {
    let n = gram.len();
    let mut g: IMat = gram.to_vec();
    let mut u = int_identity(n);
    if n <= 1 {
        return (u, g);
    }

    let rat = |x: &BigInt| BigRational::from_integer(x.clone());
    let mut mu: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    let mut b: Vec<BigRational> = vec![BigRational::zero(); n];
    let delta_r = delta.as_rational();

    // incremental Gram-Schmidt of row k from the current Gram matrix
    let gso_row = |g: &IMat, mu: &mut Vec<Vec<BigRational>>, b: &mut Vec<BigRational>, k: usize| {
        for j in 0..k {
            let mut v = rat(&g[k][j]);
            for i in 0..j {
                let t = &mu[j][i] * &mu[k][i] * &b[i];
                v -= t;
            }
            mu[k][j] = v / &b[j];
        }
        let mut v = rat(&g[k][k]);
        for j in 0..k {
            let t = &mu[k][j] * &mu[k][j] * &b[j];
            v -= t;
        }
        b[k] = v;
    };

    // b_k -= q * b_l applied to g and u
    let row_op = |g: &mut IMat, u: &mut IMat, k: usize, l: usize, q: &BigInt| {
        let old_gkk = g[k][k].clone();
        let old_gkl = g[k][l].clone();
        let gll = g[l][l].clone();
        for j in 0..g.len() {
            let t = q * &g[l][j];
            g[k][j] -= t;
        }
        g[k][k] = old_gkk - BigInt::from(2) * q * &old_gkl + q * q * gll;
        for i in 0..g.len() {
            if i != k {
                g[i][k] = g[k][i].clone();
            }
        }
        for j in 0..u[k].len() {
            let t = q * &u[l][j];
            u[k][j] -= t;
        }
    };

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let reduce = |g: &mut IMat,
                      u: &mut IMat,
                      mu: &mut Vec<Vec<BigRational>>,
                      k: usize,
                      l: usize| {
        if mu[k][l].abs() > half {
            let q = round_rational(&mu[k][l]);
            row_op(g, u, k, l, &q);
            let qr = BigRational::from_integer(q);
            for i in 0..l {
                let t = &qr * &mu[l][i];
                mu[k][i] -= t;
            }
            mu[k][l] -= qr;
        }
    };

    gso_row(&g, &mut mu, &mut b, 0);
    let mut kmax = 0usize;
    let mut k = 1usize;
    while k < n {
        if k > kmax {
            kmax = k;
            gso_row(&g, &mut mu, &mut b, k);
        }
        reduce(&mut g, &mut u, &mut mu, k, k - 1);
        let lhs = b[k].clone();
        let rhs = (&delta_r - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if lhs < rhs {
            // swap rows k-1 and k, then patch the GSO data in place
            g.swap(k - 1, k);
            for row in g.iter_mut() {
                row.swap(k - 1, k);
            }
            u.swap(k - 1, k);

            let mu_k = mu[k][k - 1].clone();
            let b_new = &b[k] + &mu_k * &mu_k * &b[k - 1];
            mu[k][k - 1] = &mu_k * &b[k - 1] / &b_new;
            b[k] = &b[k - 1] * &b[k] / &b_new;
            b[k - 1] = b_new;
            for i in 0..k - 1 {
                let t = mu[k][i].clone();
                mu[k][i] = mu[k - 1][i].clone();
                mu[k - 1][i] = t;
            }
            for i in k + 1..=kmax {
                let t = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &mu_k * &t;
                mu[i][k - 1] = &t + &mu[k][k - 1] * &mu[i][k];
            }
            k = k.max(2) - 1;
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                reduce(&mut g, &mut u, &mut mu, k, l);
            }
            k += 1;
        }
    }
    (u, g)
}

/// Floating-point Gram-Schmidt of an integer Gram matrix. Only used to
/// steer block reduction; nothing exact depends on it.
fn gso_f64(gram: &IMat) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = gram.len();
    let mut mu = vec![vec![0f64; n]; n];
    let mut b = vec![0f64; n];
    for k in 0..n {
        for j in 0..k {
            let mut v = crate::matrix::big_to_f64(&gram[k][j]);
            for i in 0..j {
                v -= mu[j][i] * mu[k][i] * b[i];
            }
            mu[k][j] = v / b[j];
        }
        let mut v = crate::matrix::big_to_f64(&gram[k][k]);
        for j in 0..k {
            v -= mu[k][j] * mu[k][j] * b[j];
        }
        b[k] = v;
    }
    (mu, b)
}

/// Shortest nonzero vector of the projected block [k, l), by full
/// Schnorr-Euchner enumeration in floating point. Returns block-relative
/// coefficients when something beats `radius`.
fn block_shortest(
    mu: &[Vec<f64>],
    b: &[f64],
    k: usize,
    l: usize,
    radius: f64,
) -> Option<Vec<i64>> {
    let m = l - k;
    let mut x = vec![0i64; m];
    let mut best = radius;
    let mut bestx: Option<Vec<i64>> = None;

    fn rec(
        i: usize,
        m: usize,
        k: usize,
        mu: &[Vec<f64>],
        b: &[f64],
        dist: f64,
        x: &mut Vec<i64>,
        best: &mut f64,
        bestx: &mut Option<Vec<i64>>,
    ) {
        let c: f64 = -(i + 1..m)
            .map(|j| x[j] as f64 * mu[k + j][k + i])
            .sum::<f64>();
        let base = c.round() as i64;
        // zigzag outward from the center; distances are nondecreasing per side
        let mut up_done = false;
        let mut down_done = false;
        for t in 0.. {
            if up_done && down_done {
                break;
            }
            let xi = if t % 2 == 0 { base + (t / 2) } else { base - (t / 2 + 1) };
            let going_up = t % 2 == 0;
            if going_up && up_done || !going_up && down_done {
                continue;
            }
            let d = xi as f64 - c;
            let nd = dist + d * d * b[k + i];
            if nd >= *best {
                if going_up {
                    up_done = true;
                } else {
                    down_done = true;
                }
                continue;
            }
            x[i] = xi;
            if i == 0 {
                if x.iter().any(|&v| v != 0) {
                    *best = nd;
                    *bestx = Some(x.clone());
                }
            } else {
                rec(i - 1, m, k, mu, b, nd, x, best, bestx);
            }
        }
        x[i] = 0;
    }

    rec(m - 1, m, k, mu, b, 0.0, &mut x, &mut best, &mut bestx);
    bestx
}

/// Block reduction in the style of Korkine-Zolotarev: LLL plus block-wise
/// shortest-vector insertions. The block search runs in floating point,
/// but every basis update is an exact unimodular row operation, so the
/// output is exact regardless of rounding. Returns `(u, reduced_gram)`.
///
/// This exists because enumeration cost at a fixed radius is governed by
/// the Gram-Schmidt profile; on the dimension-52 lattices here it shrinks
/// the search tree by several orders of magnitude over plain LLL.
pub fn bkz_gram(gram: &IMat, delta: Delta, beta: usize, max_tours: usize) -> (IMat, IMat) {
    let n = gram.len();
    let (mut u, mut g) = lll_gram(gram, delta);
    if n < 3 || beta < 2 {
        return (u, g);
    }
    for _ in 0..max_tours {
        let mut changed = false;
        for k in 0..n - 1 {
            let l = (k + beta).min(n);
            if l - k < 2 {
                continue;
            }
            let (mu, b) = gso_f64(&g);
            let Some(x) = block_shortest(&mu, &b, k, l, 0.99 * b[k]) else {
                continue;
            };
            // replacing a row whose coefficient is a unit keeps a basis
            let Some(j) = (0..x.len()).rev().find(|&j| x[j].abs() == 1) else {
                continue;
            };
            let xi: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
            let row: Vec<BigInt> = (0..n)
                .map(|t| (0..x.len()).map(|i| &xi[i] * &g[k + i][t]).sum())
                .collect();
            let diag: BigInt = (0..x.len()).map(|i| &xi[i] * &row[k + i]).sum();
            for t in 0..n {
                g[k + j][t] = row[t].clone();
                g[t][k + j] = row[t].clone();
            }
            g[k + j][k + j] = diag;
            let urow: Vec<BigInt> = (0..n)
                .map(|t| (0..x.len()).map(|i| &xi[i] * &u[k + i][t]).sum())
                .collect();
            u[k + j] = urow;
            let (u2, g2) = lll_gram(&g, delta);
            g = g2;
            u = crate::matrix::mat_mul(&u2, &u);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (u, g)
}

/// Exact Gram-Schmidt data of an integer Gram matrix: `(mu, bstar)` with
/// `bstar[i]` the squared GS norms.
pub fn gso_of_gram(gram: &IMat) -> (QMat, Vec<BigRational>) {
    let n = gram.len();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for k in 0..n {
        for j in 0..k {
            let mut v = BigRational::from_integer(gram[k][j].clone());
            for i in 0..j {
                let t = &mu[j][i] * &mu[k][i] * &b[i];
                v -= t;
            }
            mu[k][j] = v / &b[j];
        }
        let mut v = BigRational::from_integer(gram[k][k].clone());
        for j in 0..k {
            let t = &mu[k][j] * &mu[k][j] * &b[j];
            v -= t;
        }
        b[k] = v;
        assert!(b[k] > BigRational::zero(), "Gram matrix not positive definite");
    }
    (mu, b)
}

/// Babai nearest-plane: reduce a rational target vector modulo the row
/// span of `basis` (ambient coordinates). Returns the size-reduced
/// representative of `target + span`.
pub fn babai_reduce(basis: &IMat, target: &[BigRational]) -> Vec<BigRational> {
    let n = basis.len();
    let dim = if n == 0 { 0 } else { basis[0].len() };
    // ambient Gram-Schmidt vectors of the basis rows
    let mut gs: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: Vec<BigRational> = basis[i]
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        for j in 0..i {
            let dot: BigRational = (0..dim).map(|t| &v[t] * &gs[j][t]).sum();
            let c = dot / &norms[j];
            for t in 0..dim {
                let s = &c * &gs[j][t];
                v[t] -= s;
            }
        }
        let nrm: BigRational = (0..dim).map(|t| &v[t] * &v[t]).sum();
        assert!(nrm > BigRational::zero(), "basis rows must be independent");
        gs.push(v);
        norms.push(nrm);
    }
    let mut x: Vec<BigRational> = target.to_vec();
    for i in (0..n).rev() {
        let dot: BigRational = (0..dim).map(|t| &x[t] * &gs[i][t]).sum();
        let c = round_rational(&(dot / &norms[i]));
        if !c.is_zero() {
            for t in 0..dim {
                let s = BigRational::from_integer(&c * &basis[i][t]);
                x[t] -= s;
            }
        }
    }
    x
}
