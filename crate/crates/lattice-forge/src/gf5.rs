//! Codes over the field with five elements.
//!
//! Generator matrices are dense row-major matrices of elements 0..4.
//! The four-negacirculant form `[I | [[A,B],[-B^T,A^T]]]` is the shape the
//! search and the bundled length-52 code use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("first row of a negacirculant block must be nonempty")]
    EmptyRow,
    #[error("a_row and b_row must have equal length (got {0} and {1})")]
    MismatchedRows(usize, usize),
    #[error("entry {0} is not a GF(5) element")]
    BadElement(i64),
    #[error("generator matrix is not a valid generator: {0}")]
    NotAGenerator(String),
    #[error("codeword enumeration refused: dimension {k} exceeds guard {guard} (5^{k} words)")]
    EnumerationGuard { k: usize, guard: usize },
}

/// An element of GF(5), stored as 0..4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct F5(pub u8);

impl F5 {
    pub fn new(v: i64) -> Self {
        F5(v.rem_euclid(5) as u8)
    }
    pub fn checked(v: i64) -> Result<Self, CodeError> {
        if (0..5).contains(&v) {
            Ok(F5(v as u8))
        } else {
            Err(CodeError::BadElement(v))
        }
    }
    pub fn add(self, o: F5) -> F5 {
        F5((self.0 + o.0) % 5)
    }
    pub fn sub(self, o: F5) -> F5 {
        F5((self.0 + 5 - o.0) % 5)
    }
    pub fn mul(self, o: F5) -> F5 {
        F5((self.0 * o.0) % 5)
    }
    pub fn neg(self) -> F5 {
        F5((5 - self.0) % 5)
    }
    pub fn inv(self) -> Option<F5> {
        // 1,2,3,4 -> 1,3,2,4
        match self.0 {
            1 => Some(F5(1)),
            2 => Some(F5(3)),
            3 => Some(F5(2)),
            4 => Some(F5(4)),
            _ => None,
        }
    }
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Dense matrix over GF(5).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F5Matrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<F5>,
}

impl F5Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        F5Matrix {
            rows,
            cols,
            entries: vec![F5(0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, F5(1));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F5>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend_from_slice(row);
        }
        F5Matrix {
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> F5 {
        self.entries[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: F5) {
        self.entries[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[F5] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> F5Matrix {
        let mut t = F5Matrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &F5Matrix) -> F5Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = F5Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, cur.add(a.mul(other.get(k, j))));
                }
            }
        }
        out
    }

    /// Reduced row echelon form with first-nonzero-pivot tie-breaking,
    /// together with the pivot columns. Zero rows are dropped.
    pub fn rref(&self) -> (F5Matrix, Vec<usize>) {
        let mut rows: Vec<Vec<F5>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for col in 0..self.cols {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r][col].inv().unwrap();
            for j in 0..self.cols {
                rows[r][j] = rows[r][j].mul(inv);
            }
            for i in 0..rows.len() {
                if i != r && !rows[i][col].is_zero() {
                    let f = rows[i][col];
                    for j in 0..self.cols {
                        let t = f.mul(rows[r][j]);
                        rows[i][j] = rows[i][j].sub(t);
                    }
                }
            }
            pivots.push(col);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        let mut m = F5Matrix::zero(r, self.cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().0.rows
    }
}

/// First rows of the two negacirculant blocks of a four-negacirculant code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourNegacirculantSpec {
    pub m: usize,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

impl FourNegacirculantSpec {
    pub fn new(a: &[u8], b: &[u8]) -> Result<Self, CodeError> {
        if a.is_empty() {
            return Err(CodeError::EmptyRow);
        }
        if a.len() != b.len() {
            return Err(CodeError::MismatchedRows(a.len(), b.len()));
        }
        for &v in a.iter().chain(b.iter()) {
            F5::checked(v as i64)?;
        }
        Ok(FourNegacirculantSpec {
            m: a.len(),
            a: a.to_vec(),
            b: b.to_vec(),
        })
    }

    pub fn a_row(&self) -> Vec<F5> {
        self.a.iter().map(|&v| F5(v)).collect()
    }
    pub fn b_row(&self) -> Vec<F5> {
        self.b.iter().map(|&v| F5(v)).collect()
    }
}

/// The length-52 code of the bundled data file.
pub fn c52_spec() -> FourNegacirculantSpec {
    let json = include_str!("../data/c52.json");
    serde_json::from_str(json).expect("bundled c52.json is well-formed")
}

/// m x m negacirculant matrix from its first row: each row is the previous
/// one shifted right, with the wrapped entry negated.
pub fn negacirculant(first_row: &[F5]) -> Result<F5Matrix, CodeError> {
    let m = first_row.len();
    if m == 0 {
        return Err(CodeError::EmptyRow);
    }
    let mut out = F5Matrix::zero(m, m);
    for i in 0..m {
        for j in 0..m {
            let v = if j >= i {
                first_row[j - i]
            } else {
                first_row[m + j - i].neg()
            };
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// `[ I_{2m} | [[A, B], [-B^T, A^T]] ]`.
pub fn four_negacirculant_generator(spec: &FourNegacirculantSpec) -> Result<F5Matrix, CodeError> {
    let m = spec.m;
    let a = negacirculant(&spec.a_row())?;
    let b = negacirculant(&spec.b_row())?;
    let at = a.transpose();
    let bt = b.transpose();
    let mut gen = F5Matrix::zero(2 * m, 4 * m);
    for i in 0..2 * m {
        gen.set(i, i, F5(1));
    }
    for i in 0..m {
        for j in 0..m {
            gen.set(i, 2 * m + j, a.get(i, j));
            gen.set(i, 3 * m + j, b.get(i, j));
            gen.set(m + i, 2 * m + j, bt.get(i, j).neg());
            gen.set(m + i, 3 * m + j, at.get(i, j));
        }
    }
    Ok(gen)
}

fn inner_product(x: &[F5], y: &[F5]) -> F5 {
    let mut acc = F5(0);
    for (a, b) in x.iter().zip(y.iter()) {
        acc = acc.add(a.mul(*b));
    }
    acc
}

/// Self-duality of the code generated by `gen`: requires full row rank k
/// with 2k = length, and gen . gen^T = 0.
pub fn is_self_dual(gen: &F5Matrix) -> Result<bool, CodeError> {
    let k = gen.rank();
    if k != gen.rows {
        return Err(CodeError::NotAGenerator(format!(
            "rank {} below row count {}",
            k, gen.rows
        )));
    }
    if 2 * k != gen.cols {
        return Ok(false);
    }
    for i in 0..gen.rows {
        for j in i..gen.rows {
            if !inner_product(gen.row(i), gen.row(j)).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Algebraic self-duality test on the spec: A A^T + B B^T = -I over GF(5).
pub fn self_dual_condition(spec: &FourNegacirculantSpec) -> Result<bool, CodeError> {
    let a = negacirculant(&spec.a_row())?;
    let b = negacirculant(&spec.b_row())?;
    let prod_a = a.mul(&a.transpose());
    let prod_b = b.mul(&b.transpose());
    for i in 0..spec.m {
        for j in 0..spec.m {
            let sum = prod_a.get(i, j).add(prod_b.get(i, j));
            let want = if i == j { F5(4) } else { F5(0) };
            if sum != want {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Generator of the dual code (null space of `gen` under the standard
/// inner product), from the reduced echelon form.
pub fn dual_code(gen: &F5Matrix) -> F5Matrix {
    let (rref, pivots) = gen.rref();
    let n = gen.cols;
    let k = rref.rows;
    let piv_set: Vec<bool> = {
        let mut s = vec![false; n];
        for &p in &pivots {
            s[p] = true;
        }
        s
    };
    let free: Vec<usize> = (0..n).filter(|&j| !piv_set[j]).collect();
    let mut rows = Vec::with_capacity(free.len());
    for &f in &free {
        let mut row = vec![F5(0); n];
        row[f] = F5(1);
        for (r, &p) in pivots.iter().enumerate().take(k) {
            row[p] = rref.get(r, f).neg();
        }
        rows.push(row);
    }
    F5Matrix::from_rows(&rows)
}

pub const ENUMERATION_GUARD_DEFAULT: usize = 12;

/// All 5^k codewords of the code generated by `gen`, each exactly once.
pub fn enumerate_codewords(
    gen: &F5Matrix,
    max_dim: usize,
) -> Result<impl Iterator<Item = Vec<F5>> + '_, CodeError> {
    let (rref, _) = gen.rref();
    let k = rref.rows;
    if k > max_dim {
        return Err(CodeError::EnumerationGuard { k, guard: max_dim });
    }
    let n = rref.cols;
    let total = 5usize.pow(k as u32);
    Ok((0..total).map(move |mut idx| {
        let mut word = vec![F5(0); n];
        for r in 0..k {
            let coef = F5((idx % 5) as u8);
            idx /= 5;
            if !coef.is_zero() {
                for j in 0..n {
                    word[j] = word[j].add(coef.mul(rref.get(r, j)));
                }
            }
        }
        word
    }))
}
