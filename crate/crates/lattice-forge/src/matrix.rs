//! Exact dense linear algebra over the integers and rationals.
//!
//! Everything here is small (n <= 64) and exactness matters more than
//! asymptotics, so the algorithms are the classical ones: Kannan-Bachem
//! style Hermite normal form, Bareiss fraction-free determinants and
//! Gauss-Jordan inversion over `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IMat = Vec<Vec<BigInt>>;
pub type QMat = Vec<Vec<BigRational>>;

/// Lossy conversion for float-guided heuristics; saturates out of range.
pub fn big_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::MAX)
}

pub fn int_identity(n: usize) -> IMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn int_mat_from_i64(m: &[Vec<i64>]) -> IMat {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn int_mat_to_i64(m: &IMat) -> Option<Vec<Vec<i64>>> {
    m.iter()
        .map(|r| r.iter().map(|x| i64::try_from(x).ok()).collect())
        .collect()
}

pub fn transpose(m: &IMat) -> IMat {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i][j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let inner = if n == 0 { 0 } else { a[0].len() };
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    assert_eq!(inner, b.len(), "dimension mismatch in mat_mul");
    let mut out = vec![vec![BigInt::zero(); cols]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

/// `a * b^T`, the Gram product used throughout.
pub fn mat_mul_transpose(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let m = b.len();
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = BigInt::zero();
            for k in 0..a[i].len() {
                acc += &a[i][k] * &b[j][k];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn row_vec_mat_mul(x: &[BigInt], m: &IMat) -> Vec<BigInt> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let mut out = vec![BigInt::zero(); cols];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for j in 0..cols {
            out[j] += xi * &m[i][j];
        }
    }
    out
}

/// Fraction-free determinant (Bareiss).
pub fn det_bareiss(m: &IMat) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IMat = m.to_vec();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let swap = (k + 1..n).find(|&i| !a[i][k].is_zero());
            match swap {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Row-style Hermite normal form: returns H with the zero rows dropped,
/// pivots positive, entries above each pivot reduced into [0, pivot).
pub fn hnf(m: &IMat) -> IMat {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: IMat = m.to_vec();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        // reduce all rows below pivot_row in this column by gcd steps
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..rows {
                if !a[i][col].is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) => {
                            if a[i][col].abs() < a[b][col].abs() {
                                Some(i)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let b = match best {
                None => break,
                Some(b) => b,
            };
            a.swap(pivot_row, b);
            let mut done = true;
            for i in pivot_row + 1..rows {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = div_round(&a[i][col], &a[pivot_row][col]);
                if !q.is_zero() {
                    for j in 0..cols {
                        let t = &a[pivot_row][j] * &q;
                        a[i][j] -= t;
                    }
                }
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if pivot_row < rows && !a[pivot_row][col].is_zero() {
            if a[pivot_row][col].is_negative() {
                for j in 0..cols {
                    a[pivot_row][j] = -a[pivot_row][j].clone();
                }
            }
            // reduce the rows above into [0, pivot)
            for i in 0..pivot_row {
                let q = num_integer::Integer::div_floor(&a[i][col], &a[pivot_row][col]);
                if !q.is_zero() {
                    for j in 0..cols {
                        let t = &a[pivot_row][j] * &q;
                        a[i][j] -= t;
                    }
                }
            }
            pivot_row += 1;
        }
    }
    a.truncate(pivot_row);
    a
}

/// Nearest-integer division, ties toward zero.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if (&r * &two).abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

pub fn rat_identity(n: usize) -> QMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn rat_mat_mul(a: &QMat, b: &QMat) -> QMat {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let mut acc = BigRational::zero();
                    for k in 0..inner {
                        if !a[i][k].is_zero() {
                            acc += &a[i][k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn int_to_rat(m: &IMat) -> QMat {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inverse; None if singular.
pub fn rat_inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut inv = rat_identity(n);
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        inv.swap(col, p);
        let pv = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &pv;
            inv[col][j] /= &pv;
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                let t1 = &a[col][j] * &f;
                a[i][j] -= t1;
                let t2 = &inv[col][j] * &f;
                inv[i][j] -= t2;
            }
        }
    }
    Some(inv)
}

/// Solve x * M = rhs for a row vector x over the rationals; None if singular.
pub fn solve_left(m: &QMat, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let inv = rat_inverse(m)?;
    let n = m.len();
    let mut out = vec![BigRational::zero(); n];
    for j in 0..n {
        let mut acc = BigRational::zero();
        for (i, r) in rhs.iter().enumerate() {
            acc += r * &inv[i][j];
        }
        out[j] = acc;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IMat {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn det_small() {
        assert_eq!(det_bareiss(&m(&[&[2, 0], &[0, 3]])), BigInt::from(6));
        assert_eq!(det_bareiss(&m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(
            det_bareiss(&m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])),
            BigInt::zero()
        );
    }

    #[test]
    fn hnf_reduces() {
        let h = hnf(&m(&[&[1, 0], &[1000, 1]]));
        assert_eq!(h, m(&[&[1, 0], &[0, 1]]));
        let h = hnf(&m(&[&[2, 4], &[4, 2]]));
        // row lattice of det 12, HNF is [[2,4],[0,6]] reduced to [[2,4],[0,6]]
        assert_eq!(det_bareiss(&h).abs(), BigInt::from(12));
        assert!(h[1][0].is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = int_to_rat(&m(&[&[2, 1], &[7, 4]]));
        let inv = rat_inverse(&a).unwrap();
        let prod: Vec<Vec<BigRational>> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| {
                        (0..2).map(|k| &a[i][k] * &inv[k][j]).sum::<BigRational>()
                    })
                    .collect()
            })
            .collect();
        assert_eq!(prod, rat_identity(2));
    }
}
