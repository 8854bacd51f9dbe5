//! Exact lattices with a scaled inner product.
//!
//! A `ScaledLattice` is the integer row span of `basis / denom` with inner
//! product `<x,y> = x.y / scale`. Construction A over GF(5) lands on
//! `scale = 5, denom = 1`; shadow cosets and neighbors introduce `denom = 2`.
//! The square root of the scale is never materialized: every norm is the
//! exact rational `raw / (denom^2 * scale)`.

use crate::gf5::{self, F5Matrix};
use crate::matrix::{self, IMat, QMat};
use crate::reduction::{self, Delta};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

type ReducedCache = Mutex<HashMap<String, (IMat, IMat)>>;

fn reduced_cache() -> &'static ReducedCache {
    static CACHE: OnceLock<ReducedCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("code is not self-dual; Construction A would not give a unimodular lattice")]
    NotSelfDual,
    #[error("{0}")]
    Code(#[from] gf5::CodeError),
    #[error("basis is singular")]
    Singular,
    #[error("lattice is not integral")]
    NotIntegral,
    #[error("lattice is not unimodular")]
    NotUnimodular,
    #[error("lattice is already even; the even sublattice would be the lattice itself")]
    AlreadyEven,
    #[error("dimension {0} is not divisible by 4; neighbor construction unsupported")]
    DimensionNotDivBy4(usize),
    #[error("scale and denom must be positive")]
    BadScaling,
    #[error("basis must be square ({0} rows, dimension {1})")]
    NotSquare(usize, usize),
    #[error("lattice file entry out of range for i64")]
    EntryOverflow,
}

/// Integer basis with a norm divisor: points are `x * basis / denom`,
/// norms are `raw / (denom^2 * scale)`.
#[derive(Debug, Clone)]
pub struct ScaledLattice {
    pub n: usize,
    pub scale: i64,
    pub denom: i64,
    pub basis: IMat,
}

/// A lattice translated by a rational shift, `shift + base`.
#[derive(Debug, Clone)]
pub struct CosetLattice {
    pub base: ScaledLattice,
    /// Shift in ambient coordinates: `shift_num / shift_den`.
    pub shift_num: Vec<BigInt>,
    pub shift_den: BigInt,
}

/// `L0* = L0 u L1 u L2 u L3` with `L = L0 u L2` and `S(L) = L1 u L3`.
#[derive(Debug, Clone)]
pub struct ShadowDecomposition {
    pub l0: ScaledLattice,
    pub l1: CosetLattice,
    pub l2: CosetLattice,
    pub l3: CosetLattice,
}

impl ScaledLattice {
    pub fn new(scale: i64, denom: i64, basis: IMat) -> Result<Self, LatticeError> {
        if scale <= 0 || denom <= 0 {
            return Err(LatticeError::BadScaling);
        }
        let n = basis.len();
        if basis.iter().any(|r| r.len() != n) {
            return Err(LatticeError::NotSquare(n, n));
        }
        if matrix::det_bareiss(&basis).is_zero() {
            return Err(LatticeError::Singular);
        }
        Ok(ScaledLattice {
            n,
            scale,
            denom,
            basis,
        })
    }

    pub fn zn(n: usize) -> Self {
        ScaledLattice {
            n,
            scale: 1,
            denom: 1,
            basis: matrix::int_identity(n),
        }
    }

    /// `basis * basis^T`, before dividing by `denom^2 * scale`.
    pub fn gram_raw(&self) -> IMat {
        matrix::mat_mul_transpose(&self.basis, &self.basis)
    }

    pub fn gram_divisor(&self) -> BigInt {
        BigInt::from(self.denom) * BigInt::from(self.denom) * BigInt::from(self.scale)
    }

    /// Exact rational Gram matrix.
    pub fn gram(&self) -> QMat {
        let div = self.gram_divisor();
        self.gram_raw()
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| BigRational::new(v, div.clone()))
                    .collect()
            })
            .collect()
    }

    /// Integer Gram matrix, if the lattice is integral.
    pub fn gram_int(&self) -> Result<IMat, LatticeError> {
        let div = self.gram_divisor();
        let raw = self.gram_raw();
        let mut out = vec![vec![BigInt::zero(); self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                let (q, r) = raw[i][j].div_rem(&div);
                if !r.is_zero() {
                    return Err(LatticeError::NotIntegral);
                }
                out[i][j] = q;
            }
        }
        Ok(out)
    }

    pub fn is_integral(&self) -> bool {
        self.gram_int().is_ok()
    }

    pub fn is_unimodular(&self) -> bool {
        match self.gram_int() {
            Ok(g) => matrix::det_bareiss(&g).is_one(),
            Err(_) => false,
        }
    }

    /// True if some basis-integral lattice vector has odd norm.
    /// Only meaningful for integral lattices.
    pub fn is_odd(&self) -> Result<bool, LatticeError> {
        let g = self.gram_int()?;
        Ok((0..self.n).any(|i| g[i][i].is_odd()))
    }

    /// Divide out any common content of the basis and the denominator.
    fn normalize(mut self) -> Self {
        let mut g = BigInt::from(self.denom);
        for row in &self.basis {
            for v in row {
                g = g.gcd(v);
                if g.is_one() {
                    return self;
                }
            }
        }
        if !g.is_one() {
            for row in &mut self.basis {
                for v in row.iter_mut() {
                    *v /= &g;
                }
            }
            self.denom = i64::try_from(BigInt::from(self.denom) / &g).unwrap();
        }
        self
    }

    /// Hermite-normal-form basis, the canonical representative used for
    /// equality tests and file output.
    pub fn hnf_basis(&self) -> IMat {
        matrix::hnf(&self.basis)
    }

    pub fn same_lattice(&self, other: &ScaledLattice) -> bool {
        if self.n != other.n || self.scale != other.scale {
            return false;
        }
        let d1 = BigInt::from(self.denom);
        let d2 = BigInt::from(other.denom);
        let l = d1.lcm(&d2);
        let scale_rows = |b: &IMat, f: &BigInt| -> IMat {
            b.iter()
                .map(|r| r.iter().map(|v| v * f).collect())
                .collect()
        };
        let b1 = scale_rows(&self.basis, &(&l / &d1));
        let b2 = scale_rows(&other.basis, &(&l / &d2));
        matrix::hnf(&b1) == matrix::hnf(&b2)
    }

    /// Membership test for a rational ambient point `num / den`.
    pub fn contains(&self, num: &[BigInt], den: &BigInt) -> bool {
        let basis_q = matrix::int_to_rat(&self.basis);
        let rhs: Vec<BigRational> = num
            .iter()
            .map(|v| BigRational::new(v * BigInt::from(self.denom), den.clone()))
            .collect();
        match matrix::solve_left(&basis_q, &rhs) {
            Some(x) => x.iter().all(|c| c.is_integer()),
            None => false,
        }
    }

    /// LLL-reduce the basis in place (same lattice, new basis).
    pub fn lll_reduced(&self, delta: Delta) -> (ScaledLattice, IMat) {
        let g = self.gram_raw();
        let (u, _) = reduction::lll_gram(&g, delta);
        let nb = matrix::mat_mul(&u, &self.basis);
        (
            ScaledLattice {
                n: self.n,
                scale: self.scale,
                denom: self.denom,
                basis: nb,
            },
            u,
        )
    }

    /// Strongest reduction worth its cost before enumeration: plain LLL in
    /// small dimensions, block reduction beyond that (the enumeration tree
    /// shrinks by orders of magnitude with a flatter profile).
    pub fn enum_reduced(&self, delta: Delta) -> (ScaledLattice, IMat) {
        if self.n < 32 || std::env::var_os("LATTICE_FORGE_LLL_ONLY").is_some() {
            return self.lll_reduced(delta);
        }
        // block reduction of a 52-dimensional basis takes over a minute, and
        // radius escalation rebuilds the enumeration context several times
        // per lattice, so memoize it process-wide
        let key = format!("{:?}|{:?}", self.basis, delta);
        {
            let cache = reduced_cache().lock().expect("reduction cache poisoned");
            if let Some((nb, u)) = cache.get(&key) {
                return (
                    ScaledLattice {
                        n: self.n,
                        scale: self.scale,
                        denom: self.denom,
                        basis: nb.clone(),
                    },
                    u.clone(),
                );
            }
        }
        let g = self.gram_raw();
        let (u, _) = reduction::bkz_gram(&g, delta, 20, 16);
        let nb = matrix::mat_mul(&u, &self.basis);
        reduced_cache()
            .lock()
            .expect("reduction cache poisoned")
            .insert(key, (nb.clone(), u.clone()));
        (
            ScaledLattice {
                n: self.n,
                scale: self.scale,
                denom: self.denom,
                basis: nb,
            },
            u,
        )
    }

    /// Dual lattice: `{x : <x,y> in Z for all y in L}`, via exact inversion.
    pub fn dual_lattice(&self) -> ScaledLattice {
        let basis_q = matrix::int_to_rat(&self.basis);
        let inv = matrix::rat_inverse(&basis_q).expect("lattice basis is nonsingular");
        let f = BigRational::from_integer(BigInt::from(self.scale) * BigInt::from(self.denom));
        // dual rows are scale * denom * (B^{-1})^T
        let n = self.n;
        let mut den = BigInt::one();
        let rows: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| &inv[j][i] * &f).collect())
            .collect();
        for row in &rows {
            for v in row {
                den = den.lcm(v.denom());
            }
        }
        let basis: IMat = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.numer() * (&den / v.denom()))
                    .collect()
            })
            .collect();
        let denom = i64::try_from(&den).expect("dual denominator fits i64");
        ScaledLattice {
            n,
            scale: self.scale,
            denom,
            basis: matrix::hnf(&basis),
        }
        .normalize()
    }

    /// Kernel of `v -> <v,v> mod 2` on an odd integral unimodular lattice.
    pub fn even_sublattice(&self) -> Result<ScaledLattice, LatticeError> {
        let g = self.gram_int()?;
        if !self.is_unimodular() {
            return Err(LatticeError::NotUnimodular);
        }
        let odd: Vec<usize> = (0..self.n).filter(|&i| g[i][i].is_odd()).collect();
        let Some(&p) = odd.first() else {
            return Err(LatticeError::AlreadyEven);
        };
        let mut k = vec![vec![BigInt::zero(); self.n]; self.n];
        for i in 0..self.n {
            if i == p {
                k[i][p] = BigInt::from(2);
            } else {
                k[i][i] = BigInt::one();
                if g[i][i].is_odd() {
                    k[i][p] = BigInt::one();
                }
            }
        }
        let basis = matrix::mat_mul(&k, &self.basis);
        Ok(ScaledLattice {
            n: self.n,
            scale: self.scale,
            denom: self.denom,
            basis,
        })
    }

    /// The coset split of `L0*` for an odd unimodular lattice in dimension
    /// divisible by 4, labeled per the canonical rule: `L2` is the coset
    /// meeting `L`; of the two shadow cosets, `L1` has the lexicographically
    /// smaller Babai-reduced representative.
    pub fn shadow_decomposition(&self) -> Result<ShadowDecomposition, LatticeError> {
        if self.n % 4 != 0 {
            return Err(LatticeError::DimensionNotDivBy4(self.n));
        }
        if !self.is_odd()? {
            return Err(LatticeError::AlreadyEven);
        }
        let l0 = self.even_sublattice()?;
        let l0_dual = l0.dual_lattice();

        // rows of L0 in the coordinates of L0*: integral with |det| = 4
        let dual_q = matrix::int_to_rat(&l0_dual.basis);
        let inv = matrix::rat_inverse(&dual_q).expect("dual basis nonsingular");
        let f = BigRational::new(
            BigInt::from(l0_dual.denom),
            BigInt::from(l0.denom),
        );
        let mut coords = vec![vec![BigInt::zero(); self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = BigRational::zero();
                for t in 0..self.n {
                    acc += BigRational::from_integer(l0.basis[i][t].clone()) * &inv[t][j];
                }
                acc *= &f;
                assert!(acc.is_integer(), "L0 is not contained in L0*");
                coords[i][j] = acc.to_integer();
            }
        }
        let h = matrix::hnf(&coords);
        assert_eq!(
            matrix::det_bareiss(&h).abs(),
            BigInt::from(4),
            "index of L0 in L0* must be 4"
        );

        // the four coset representatives: digit tuples below the HNF diagonal
        let mut reps: Vec<Vec<BigInt>> = Vec::new();
        let mut digits = vec![BigInt::zero(); self.n];
        loop {
            let amb = matrix::row_vec_mat_mul(&digits, &l0_dual.basis);
            reps.push(amb);
            // increment mixed-radix counter over the diagonal
            let mut i = 0;
            loop {
                if i == self.n {
                    break;
                }
                digits[i] += 1;
                if digits[i] < h[i][i] {
                    break;
                }
                digits[i] = BigInt::zero();
                i += 1;
            }
            if digits.iter().all(|d| d.is_zero()) {
                break;
            }
        }
        assert_eq!(reps.len(), 4, "quotient has order 4");
        let dual_den = BigInt::from(l0_dual.denom);

        let nonzero: Vec<Vec<BigInt>> = reps
            .into_iter()
            .filter(|r| !r.iter().all(|v| v.is_zero()))
            .collect();
        let mut in_l: Vec<Vec<BigInt>> = Vec::new();
        let mut shadow: Vec<Vec<BigInt>> = Vec::new();
        for r in nonzero {
            if self.contains(&r, &dual_den) {
                in_l.push(r);
            } else {
                shadow.push(r);
            }
        }
        assert_eq!(in_l.len(), 1, "exactly one nontrivial coset meets L");
        assert_eq!(shadow.len(), 2);

        // Babai-reduce representatives against the LLL-reduced basis of L0
        let (l0_red, _) = l0.lll_reduced(Delta::DEFAULT);
        let reduce = |num: &[BigInt]| -> (Vec<BigInt>, BigInt) {
            let target: Vec<BigRational> = num
                .iter()
                .map(|v| BigRational::new(v * BigInt::from(l0.denom), dual_den.clone()))
                .collect();
            let red = reduction::babai_reduce(&l0_red.basis, &target);
            // back to ambient: divide by l0.denom, then to (num, den)
            let mut den = BigInt::one();
            for v in &red {
                den = den.lcm(v.denom());
            }
            den *= BigInt::from(l0.denom);
            let g0 = den.clone();
            let num: Vec<BigInt> = red
                .iter()
                .map(|v| v.numer() * (&g0 / (v.denom() * BigInt::from(l0.denom))))
                .collect();
            // reduce the fraction
            let mut g = den.clone();
            for v in &num {
                g = g.gcd(v);
            }
            if g.is_one() {
                (num, den)
            } else {
                (num.iter().map(|v| v / &g).collect(), den / g)
            }
        };

        let (n2, d2) = reduce(&in_l[0]);
        let (na, da) = reduce(&shadow[0]);
        let (nb, db) = reduce(&shadow[1]);
        // lexicographic comparison of the reduced rational vectors
        let lex_le = {
            let va: Vec<BigRational> = na
                .iter()
                .map(|v| BigRational::new(v.clone(), da.clone()))
                .collect();
            let vb: Vec<BigRational> = nb
                .iter()
                .map(|v| BigRational::new(v.clone(), db.clone()))
                .collect();
            va <= vb
        };
        let ((n1, d1), (n3, d3)) = if lex_le {
            ((na, da), (nb, db))
        } else {
            ((nb, db), (na, da))
        };
        let coset = |num: Vec<BigInt>, den: BigInt| CosetLattice {
            base: l0.clone(),
            shift_num: num,
            shift_den: den,
        };
        Ok(ShadowDecomposition {
            l0: l0.clone(),
            l1: coset(n1, d1),
            l2: coset(n2, d2),
            l3: coset(n3, d3),
        })
    }

    /// The two unimodular neighbors `N1 = L0 u L1` and `N2 = L0 u L3`.
    pub fn neighbors(&self) -> Result<(ScaledLattice, ScaledLattice), LatticeError> {
        let sd = self.shadow_decomposition()?;
        let n1 = adjoin(&sd.l0, &sd.l1.shift_num, &sd.l1.shift_den)?;
        let n3 = adjoin(&sd.l0, &sd.l3.shift_num, &sd.l3.shift_den)?;
        debug_assert!(n1.is_unimodular());
        debug_assert!(n3.is_unimodular());
        Ok((n1, n3))
    }
}

/// Lattice generated by `base` together with one extra rational vector.
fn adjoin(base: &ScaledLattice, num: &[BigInt], den: &BigInt) -> Result<ScaledLattice, LatticeError> {
    let d0 = BigInt::from(base.denom);
    let common = d0.lcm(den);
    let f0 = &common / &d0;
    let fr = &common / den;
    let mut rows: IMat = base
        .basis
        .iter()
        .map(|r| r.iter().map(|v| v * &f0).collect())
        .collect();
    rows.push(num.iter().map(|v| v * &fr).collect());
    let h = matrix::hnf(&rows);
    assert_eq!(h.len(), base.n, "adjoined lattice must stay full rank");
    let denom = i64::try_from(&common).expect("denominator fits i64");
    Ok(ScaledLattice {
        n: base.n,
        scale: base.scale,
        denom,
        basis: h,
    }
    .normalize())
}

impl CosetLattice {
    /// The coset with zero shift: the lattice itself.
    pub fn trivial(base: ScaledLattice) -> Self {
        let n = base.n;
        CosetLattice {
            base,
            shift_num: vec![BigInt::zero(); n],
            shift_den: BigInt::one(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.shift_num.iter().all(|v| v.is_zero())
    }
}

/// Construction A: `(1/sqrt 5) {x in Z^n : x mod 5 in C}` for a self-dual
/// code. Basis: lifted echelon generator rows plus `5 e_i` on non-pivot
/// coordinates.
pub fn construction_a(gen: &F5Matrix) -> Result<ScaledLattice, LatticeError> {
    if !gf5::is_self_dual(gen)? {
        return Err(LatticeError::NotSelfDual);
    }
    let n = gen.cols;
    let (rref, pivots) = gen.rref();
    let piv_set = {
        let mut s = vec![false; n];
        for &p in &pivots {
            s[p] = true;
        }
        s
    };
    let mut basis: IMat = Vec::with_capacity(n);
    for i in 0..rref.rows {
        basis.push((0..n).map(|j| BigInt::from(rref.get(i, j).0)).collect());
    }
    for (j, &is_piv) in piv_set.iter().enumerate() {
        if !is_piv {
            let mut row = vec![BigInt::zero(); n];
            row[j] = BigInt::from(5);
            basis.push(row);
        }
    }
    let lat = ScaledLattice::new(5, 1, basis)?;
    debug_assert!(lat.is_unimodular());
    Ok(lat)
}

/// Serialized lattice file: exact integers, HNF basis.
#[derive(Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub n: usize,
    pub scale: i64,
    pub denom: i64,
    pub basis: Vec<Vec<i64>>,
}

impl LatticeFile {
    pub fn from_lattice(l: &ScaledLattice) -> Result<Self, LatticeError> {
        let h = l.hnf_basis();
        let basis = matrix::int_mat_to_i64(&h).ok_or(LatticeError::EntryOverflow)?;
        Ok(LatticeFile {
            n: l.n,
            scale: l.scale,
            denom: l.denom,
            basis,
        })
    }

    pub fn to_lattice(&self) -> Result<ScaledLattice, LatticeError> {
        ScaledLattice::new(self.scale, self.denom, matrix::int_mat_from_i64(&self.basis))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf5::{four_negacirculant_generator, FourNegacirculantSpec, F5};

    fn code_12() -> F5Matrix {
        F5Matrix::from_rows(&[vec![F5(1), F5(2)]])
    }

    #[test]
    fn construction_a_dim2() {
        let l = construction_a(&code_12()).unwrap();
        assert_eq!(l.n, 2);
        assert_eq!(l.scale, 5);
        assert!(l.is_unimodular());
        // minimum norm 1 via (1,2): raw norm 5, divisor 5
        let raw = matrix::row_vec_mat_mul(
            &[BigInt::one(), BigInt::zero()],
            &l.basis,
        );
        let norm: BigInt = raw.iter().map(|v| v * v).sum();
        assert_eq!(norm, BigInt::from(5));
    }

    #[test]
    fn construction_a_rejects_non_self_dual() {
        let g = F5Matrix::from_rows(&[vec![F5(1), F5(1)]]);
        assert!(matches!(
            construction_a(&g),
            Err(LatticeError::NotSelfDual)
        ));
    }

    #[test]
    fn construction_a_c52_is_unimodular() {
        let spec = gf5::c52_spec();
        let gen = four_negacirculant_generator(&spec).unwrap();
        let l = construction_a(&gen).unwrap();
        assert_eq!(l.n, 52);
        assert!(l.is_unimodular());
        // integer basis determinant is 5^26
        assert_eq!(
            matrix::det_bareiss(&l.basis).abs(),
            BigInt::from(5).pow(26)
        );
    }

    #[test]
    fn zn_gram_is_identity() {
        let l = ScaledLattice::zn(4);
        assert_eq!(l.gram_int().unwrap(), matrix::int_identity(4));
        assert!(l.is_unimodular());
        assert!(l.is_odd().unwrap());
    }

    #[test]
    fn non_unimodular_detected() {
        // 2Z + Z: det 4
        let basis = matrix::int_mat_from_i64(&[vec![2, 0], vec![0, 1]]);
        let l = ScaledLattice::new(1, 1, basis).unwrap();
        assert!(!l.is_unimodular());
    }

    #[test]
    fn dual_of_2z() {
        let basis = matrix::int_mat_from_i64(&[vec![2]]);
        let l = ScaledLattice::new(1, 1, basis).unwrap();
        let d = l.dual_lattice();
        // (2Z)* = (1/2)Z
        assert_eq!(d.denom, 2);
        assert_eq!(d.basis, matrix::int_mat_from_i64(&[vec![1]]));
        // involution
        assert!(d.dual_lattice().same_lattice(&l));
    }

    #[test]
    fn dual_of_unimodular_is_itself() {
        let spec = FourNegacirculantSpec::new(&[0], &[2]).unwrap();
        let gen = four_negacirculant_generator(&spec).unwrap();
        let l = construction_a(&gen).unwrap();
        assert!(l.dual_lattice().same_lattice(&l));
    }

    #[test]
    fn even_sublattice_of_z4_is_d4() {
        let l = ScaledLattice::zn(4);
        let l0 = l.even_sublattice().unwrap();
        // D4: vectors with even coordinate sum; index 2, det 4
        assert_eq!(
            matrix::det_bareiss(&l0.basis).abs(),
            BigInt::from(2)
        );
        let g = l0.gram_int().unwrap();
        for i in 0..4 {
            assert!(g[i][i].is_even());
        }
        // det(Gram of D4) = 4, so |D4*/D4| = 4
        assert_eq!(matrix::det_bareiss(&l0.gram_int().unwrap()), BigInt::from(4));
    }

    #[test]
    fn even_sublattice_of_z1() {
        let l = ScaledLattice::zn(1);
        let l0 = l.even_sublattice().unwrap();
        assert_eq!(l0.basis, matrix::int_mat_from_i64(&[vec![2]]));
    }

    #[test]
    fn even_sublattice_rejects_even_lattice() {
        // D4 itself is even but not unimodular; use E8-like trick via Z^4 even
        // sublattice: must be refused because it is not unimodular.
        let l = ScaledLattice::zn(4).even_sublattice().unwrap();
        assert!(matches!(
            l.even_sublattice(),
            Err(LatticeError::NotUnimodular) | Err(LatticeError::AlreadyEven)
        ));
    }

    #[test]
    fn shadow_of_z4() {
        let l = ScaledLattice::zn(4);
        let sd = l.shadow_decomposition().unwrap();
        // L2 rep is integral and has odd norm; shadows are half-integral
        assert!(!sd.l2.is_trivial());
        let s1 = &sd.l1;
        assert_eq!(s1.shift_den, BigInt::from(2));
        // shadow vectors of Z^4: all-halves, norm 1 = n/4
        let norm4: BigInt = s1.shift_num.iter().map(|v| v * v).sum();
        assert_eq!(norm4, BigInt::from(4)); // (1/2)^2 * 4 = 1, raw over den 2
    }

    #[test]
    fn shadow_requires_dim_div_4() {
        let l = ScaledLattice::zn(5);
        assert!(matches!(
            l.shadow_decomposition(),
            Err(LatticeError::DimensionNotDivBy4(5))
        ));
    }

    #[test]
    fn neighbors_of_z4_are_unimodular() {
        let (n1, n2) = ScaledLattice::zn(4).neighbors().unwrap();
        assert!(n1.is_unimodular());
        assert!(n2.is_unimodular());
        assert!(!n1.same_lattice(&n2));
    }

    #[test]
    fn neighbors_of_z8_include_even_lattice() {
        let (n1, n2) = ScaledLattice::zn(8).neighbors().unwrap();
        assert!(n1.is_unimodular());
        assert!(n2.is_unimodular());
        // shadow norms of Z^8 are even, so both neighbors are even lattices
        // (both are copies of E8, from the two glue vectors of D8)
        assert!(!n1.is_odd().unwrap());
        assert!(!n2.is_odd().unwrap());
    }

    #[test]
    fn lattice_file_roundtrip() {
        let spec = FourNegacirculantSpec::new(&[0], &[2]).unwrap();
        let gen = four_negacirculant_generator(&spec).unwrap();
        let l = construction_a(&gen).unwrap();
        let f = LatticeFile::from_lattice(&l).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let f2: LatticeFile = serde_json::from_str(&json).unwrap();
        let l2 = f2.to_lattice().unwrap();
        assert!(l.same_lattice(&l2));
    }

    #[test]
    fn construction_a_membership_of_basis_rows() {
        // every basis row reduces mod 5 to a codeword
        let spec = gf5::c52_spec();
        let gen = four_negacirculant_generator(&spec).unwrap();
        let l = construction_a(&gen).unwrap();
        let dual = gf5::dual_code(&gen);
        // basis row mod 5 must be orthogonal to the dual = in the code
        for row in &l.basis {
            for r in 0..dual.rows {
                let mut acc = 0i64;
                for j in 0..52 {
                    let v = i64::try_from(&row[j]).unwrap();
                    acc += v * dual.get(r, j).0 as i64;
                }
                assert_eq!(acc % 5, 0);
            }
        }
    }
}
