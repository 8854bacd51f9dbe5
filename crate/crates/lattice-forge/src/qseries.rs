//! Formal power series in q^(1/4) with exact integer coefficients.
//!
//! Grade g stores the coefficient of q^(g/4); integer-exponent series are
//! supported on grades divisible by 4. This single quarter-integer grading
//! covers the Jacobi theta series (theta2 has quarter-integer exponents),
//! Delta8, the unimodular theta expansion and the shadow transform.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series is not in the span of the expansion basis: {0}")]
    Inconsistent(String),
    #[error("truncation {have} too small, need at least grade {need}")]
    TruncTooSmall { have: usize, need: usize },
}

/// Default truncation: grade 160 = q^40, ample for every coefficient used.
pub const DEFAULT_TRUNC: usize = 160;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    /// coeffs[g] is the coefficient of q^(g/4); length trunc + 1.
    pub coeffs: Vec<BigInt>,
    /// Highest reliable grade.
    pub trunc: usize,
}

impl QSeries {
    pub fn zero(trunc: usize) -> Self {
        QSeries {
            coeffs: vec![BigInt::zero(); trunc + 1],
            trunc,
        }
    }

    pub fn one(trunc: usize) -> Self {
        let mut s = Self::zero(trunc);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// c * q^(g/4)
    pub fn monomial(c: BigInt, grade: usize, trunc: usize) -> Self {
        let mut s = Self::zero(trunc);
        if grade <= trunc {
            s.coeffs[grade] = c;
        }
        s
    }

    pub fn coeff_grade(&self, g: usize) -> BigInt {
        self.coeffs.get(g).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Coefficient of q^k (integer exponent).
    pub fn coeff_q(&self, k: usize) -> BigInt {
        self.coeff_grade(4 * k)
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let trunc = self.trunc.min(other.trunc);
        let mut out = QSeries::zero(trunc);
        for g in 0..=trunc {
            out.coeffs[g] = self.coeff_grade(g) + other.coeff_grade(g);
        }
        out
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        let trunc = self.trunc.min(other.trunc);
        let mut out = QSeries::zero(trunc);
        for g in 0..=trunc {
            out.coeffs[g] = self.coeff_grade(g) - other.coeff_grade(g);
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> QSeries {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v *= c;
        }
        out
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let trunc = self.trunc.min(other.trunc);
        let mut out = QSeries::zero(trunc);
        for (i, a) in self.coeffs.iter().enumerate().take(trunc + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(trunc + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> QSeries {
        let mut result = QSeries::one(self.trunc);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// theta3 = sum over m in Z of q^(m^2)
pub fn theta3(trunc: usize) -> QSeries {
    let mut s = QSeries::zero(trunc);
    s.coeffs[0] = BigInt::one();
    let mut m = 1usize;
    while 4 * m * m <= trunc {
        s.coeffs[4 * m * m] = BigInt::from(2);
        m += 1;
    }
    s
}

/// theta4 = sum of (-1)^m q^(m^2)
pub fn theta4(trunc: usize) -> QSeries {
    let mut s = QSeries::zero(trunc);
    s.coeffs[0] = BigInt::one();
    let mut m = 1usize;
    while 4 * m * m <= trunc {
        s.coeffs[4 * m * m] = if m % 2 == 1 {
            BigInt::from(-2)
        } else {
            BigInt::from(2)
        };
        m += 1;
    }
    s
}

/// theta2 = sum over m of q^((m+1/2)^2); grade of the m-th term is (2m+1)^2.
pub fn theta2(trunc: usize) -> QSeries {
    let mut s = QSeries::zero(trunc);
    let mut m = 0usize;
    while (2 * m + 1) * (2 * m + 1) <= trunc {
        s.coeffs[(2 * m + 1) * (2 * m + 1)] = BigInt::from(2);
        m += 1;
    }
    s
}

/// theta4(q^2): grades 8 m^2 with sign (-1)^m.
pub fn theta4_q2(trunc: usize) -> QSeries {
    let mut s = QSeries::zero(trunc);
    s.coeffs[0] = BigInt::one();
    let mut m = 1usize;
    while 8 * m * m <= trunc {
        s.coeffs[8 * m * m] = if m % 2 == 1 {
            BigInt::from(-2)
        } else {
            BigInt::from(2)
        };
        m += 1;
    }
    s
}

/// Delta8(q) = q * prod_{m>=1} (1 - q^(2m-1))^8 (1 - q^(4m))^8
pub fn delta8(trunc: usize) -> QSeries {
    assert!(trunc >= 4, "delta8 needs truncation grade >= 4");
    let mut s = QSeries::monomial(BigInt::one(), 4, trunc);
    let mut m = 1usize;
    loop {
        let e_odd = 4 * (2 * m - 1); // grade of q^(2m-1)
        let e_four = 4 * (4 * m); // grade of q^(4m)
        if e_odd > trunc && e_four > trunc {
            break;
        }
        if e_odd <= trunc {
            let f = QSeries::one(trunc).sub(&QSeries::monomial(BigInt::one(), e_odd, trunc));
            s = s.mul(&f.pow(8));
        }
        if e_four <= trunc {
            let f = QSeries::one(trunc).sub(&QSeries::monomial(BigInt::one(), e_four, trunc));
            s = s.mul(&f.pow(8));
        }
        m += 1;
    }
    s
}

/// The expansion basis element theta3^(n-8j) * Delta8^j.
fn basis_element(n: usize, j: usize, trunc: usize) -> QSeries {
    theta3(trunc).pow(n - 8 * j).mul(&delta8(trunc).pow(j))
}

/// Solve theta = sum_j a_j theta3^(n-8j) Delta8^j for the unique a_j,
/// j = 0..floor(n/8). The system is triangular: basis element j first
/// contributes at q^j. Consistency of all remaining reliable grades is
/// checked before returning.
pub fn expand_in_basis(theta: &QSeries, n: usize) -> Result<Vec<BigInt>, SeriesError> {
    let jmax = n / 8;
    let need = 4 * jmax;
    if theta.trunc < need {
        return Err(SeriesError::TruncTooSmall {
            have: theta.trunc,
            need,
        });
    }
    let trunc = theta.trunc.min(DEFAULT_TRUNC);
    let basis: Vec<QSeries> = (0..=jmax).map(|j| basis_element(n, j, trunc)).collect();
    let mut residual = theta.clone();
    residual.trunc = trunc;
    residual.coeffs.truncate(trunc + 1);
    residual.coeffs.resize(trunc + 1, BigInt::zero());
    let mut a = Vec::with_capacity(jmax + 1);
    for (j, b) in basis.iter().enumerate() {
        let aj = residual.coeff_q(j);
        residual = residual.sub(&b.scale(&aj));
        a.push(aj);
    }
    if !residual.is_zero() {
        let g = (0..=trunc)
            .find(|&g| !residual.coeff_grade(g).is_zero())
            .unwrap();
        return Err(SeriesError::Inconsistent(format!(
            "residual coefficient {} at grade {} (q^{}/4)",
            residual.coeff_grade(g),
            g,
            g
        )));
    }
    Ok(a)
}

/// Shadow transform: sum_j (-1)^j / 16^j a_j theta2^(n-8j) theta4(q^2)^(8j).
/// The division by 16^j is applied to the aggregate and must be exact.
pub fn shadow_theta(a: &[BigInt], n: usize) -> Result<QSeries, SeriesError> {
    let jmax = n / 8;
    assert!(
        a.len() == jmax + 1,
        "coefficient sequence must have length floor(n/8)+1"
    );
    let trunc = DEFAULT_TRUNC;
    let sixteen = BigInt::from(16);
    let mut acc = QSeries::zero(trunc);
    for (j, aj) in a.iter().enumerate() {
        if aj.is_zero() {
            continue;
        }
        let term = theta2(trunc).pow(n - 8 * j).mul(&theta4_q2(trunc).pow(8 * j));
        let mut c = aj * sixteen.pow((jmax - j) as u32);
        if j % 2 == 1 {
            c = -c;
        }
        acc = acc.add(&term.scale(&c));
    }
    let denom = sixteen.pow(jmax as u32);
    let mut out = QSeries::zero(trunc);
    for g in 0..=trunc {
        let v = acc.coeff_grade(g);
        let (q, r) = num_integer::Integer::div_rem(&v, &denom);
        if !r.is_zero() {
            return Err(SeriesError::Inconsistent(format!(
                "shadow coefficient at grade {} not divisible by 16^{}",
                g, jmax
            )));
        }
        out.coeffs[g] = q;
    }
    Ok(out)
}

/// Coefficients a_0..a_{mu-1} forced by theta = 1 + 0*q + ... + 0*q^(mu-1).
pub fn solve_min_norm_constraints(n: usize, mu: usize) -> Result<Vec<BigInt>, SeriesError> {
    let jmax = n / 8;
    if mu > jmax + 1 {
        return Err(SeriesError::Inconsistent(format!(
            "mu = {} exceeds the {} free coefficients for n = {}",
            mu,
            jmax + 1,
            n
        )));
    }
    let trunc = DEFAULT_TRUNC;
    let mut residual = QSeries::one(trunc);
    let mut a = Vec::with_capacity(mu);
    for j in 0..mu {
        let b = basis_element(n, j, trunc);
        let aj = residual.coeff_q(j);
        residual = residual.sub(&b.scale(&aj));
        a.push(aj);
    }
    Ok(a)
}

/// The dimension-52 coefficient sequence (1, -104, 3016, -22464, 19656,
/// -256 alpha, 1048576 beta) and the resulting lattice/shadow theta pair.
pub fn optimal52_family(alpha: i64, beta: i64) -> (QSeries, QSeries) {
    let a = optimal52_coefficients(alpha, beta);
    let trunc = DEFAULT_TRUNC;
    let mut theta_l = QSeries::zero(trunc);
    for (j, aj) in a.iter().enumerate() {
        if aj.is_zero() {
            continue;
        }
        theta_l = theta_l.add(&basis_element(52, j, trunc).scale(aj));
    }
    let theta_s = shadow_theta(&a, 52).expect("dimension-52 shadow transform is integral");
    (theta_l, theta_s)
}

pub fn optimal52_coefficients(alpha: i64, beta: i64) -> Vec<BigInt> {
    vec![
        BigInt::one(),
        BigInt::from(-104),
        BigInt::from(3016),
        BigInt::from(-22464),
        BigInt::from(19656),
        BigInt::from(-256) * BigInt::from(alpha),
        BigInt::from(1048576) * BigInt::from(beta),
    ]
}
