//! Complete short-vector enumeration on lattices and cosets.
//!
//! Schnorr-Euchner depth-first enumeration over the integer quadratic form
//! `Q(y) = y * B B^T * y^T`, with the norm divisor applied only at
//! reporting time. The Cholesky data is computed once in exact rational
//! arithmetic and then rounded to integer fixed point (scale 2^40). The
//! pruning test uses single fixed-point values plus a certified slack: the
//! per-path rounding error is bounded a priori from the coefficient ranges
//! and added to the pruning radius, so a true vector inside the radius can
//! never be pruned. Every surviving leaf is verified with an exact integer
//! norm computation before it is counted, so reported counts are exact and
//! complete.

use crate::lattice::{CosetLattice, ScaledLattice};
use crate::matrix;
use crate::reduction::{self, Delta};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnumError {
    #[error("radius must be nonnegative")]
    NegativeRadius,
    #[error("enumeration refused: count exceeded the cap of {0} vectors (partial run)")]
    CountCap(u64),
    #[error("basis entries too large for the enumeration engine")]
    EntryOverflow,
    #[error("fixed-point precision exhausted: Gram-Schmidt norm below 2^-20")]
    PrecisionLoss,
    #[error("lattice error: {0}")]
    Lattice(#[from] crate::lattice::LatticeError),
}

/// Runtime guard on the center magnitude (true centers of reduced bases
/// stay far below this). Together with the guard on passing z it caps
/// every operand of the floating-point products, which is what the
/// precomputed error slack assumes.
const CENTER_BOUND: f64 = 256.0;

#[derive(Debug, Clone)]
pub struct EnumOptions {
    pub delta: Delta,
    pub keep_vectors: bool,
    /// Beyond this many retained vectors only counts are kept.
    pub retention_cap: usize,
    /// Hard cap on the total number of counted vectors.
    pub count_cap: u64,
    /// Stop as soon as one nonzero vector within the radius is found.
    pub stop_at_first: bool,
    /// How many top levels are split into independent parallel subtrees.
    pub split_depth: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            delta: Delta::DEFAULT,
            keep_vectors: false,
            retention_cap: 1 << 21,
            count_cap: 1 << 28,
            stop_at_first: false,
            split_depth: 2,
        }
    }
}

/// A vector retained from enumeration, in ambient coordinates `num / den`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RetainedVector {
    pub num: Vec<i64>,
    pub den: i64,
}

/// Exact norm-by-norm counts within a radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationReport {
    /// Norm bound, as an exact rational.
    pub radius: BigRational,
    /// Norms are `key / divisor` for the keys of `counts`.
    pub divisor: BigInt,
    pub counts: BTreeMap<i64, u64>,
    pub vectors: Option<Vec<RetainedVector>>,
    pub aborted: bool,
    pub nodes: u64,
}

impl EnumerationReport {
    pub fn norm_of_key(&self, key: i64) -> BigRational {
        BigRational::new(BigInt::from(key), self.divisor.clone())
    }

    pub fn count_at(&self, norm: &BigRational) -> u64 {
        let key = norm * BigRational::from_integer(self.divisor.clone());
        if !key.is_integer() {
            return 0;
        }
        match key.to_integer().to_i64() {
            Some(k) => self.counts.get(&k).copied().unwrap_or(0),
            None => 0,
        }
    }

    pub fn min_nonzero(&self) -> Option<BigRational> {
        self.counts
            .keys()
            .find(|&&k| k > 0)
            .map(|&k| self.norm_of_key(k))
    }

    /// Ordered (norm, count) pairs.
    pub fn coefficient_pairs(&self) -> Vec<(BigRational, u64)> {
        self.counts
            .iter()
            .map(|(&k, &c)| (self.norm_of_key(k), c))
            .collect()
    }
}

/// Per-subtree result, the unit of checkpointing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskResult {
    pub counts: BTreeMap<i64, u64>,
    pub nodes: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vectors: Option<Vec<RetainedVector>>,
}

/// Nearest f64 to a rational, within half an ulp of the exact value.
fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational fits f64 range")
}

/// Static data shared by all subtrees of one enumeration run.
struct EnumContext {
    n: usize,
    /// Reduced basis rows (i64), lattice denominator.
    basis: Vec<Vec<i64>>,
    lattice_denom: i64,
    /// Integer Gram of the reduced basis.
    gram: Vec<Vec<i64>>,
    /// q_kk rounded to f64.
    qd: Vec<f64>,
    /// q_kj = mu[j][k] rounded to f64, indexed [k][j - k - 1].
    qmu: Vec<Vec<f64>>,
    /// Shift in basis coordinates: exact numerators over `shift_den`,
    /// plus rounded values per level.
    shift_num: Vec<i64>,
    shift_den: i64,
    shift_f: Vec<f64>,
    shift_is_zero: bool,
    /// Coordinates of the negation involution `x -> -x - t` when it maps
    /// the coset to itself (always for zero shift; for shifts with
    /// `shift_den | 2 * shift_num` componentwise). Lets the search keep one
    /// vector per +-pair and count it twice.
    invol_t: Option<Vec<i64>>,
    /// Exact leaf threshold: accept iff z G z^T <= threshold with
    /// z = shift_den * x + shift_num.
    threshold: i128,
    /// Pruning radius threshold / shift_den^2, already inflated by the
    /// certified rounding slack for one root-to-leaf path.
    radius_f: f64,
    /// Bound on the center error: a computed z with |z| below this may
    /// have either true sign, so direction closing must wait.
    zguard_f: f64,
    /// Runtime cap on |z| at passing nodes, assumed by the error budget.
    z_bound_f: f64,
}

struct SearchState {
    x: Vec<i64>,
    /// sigma[k * (n + 1) + i] = sum_{j >= i} q_kj y_j; entry i = n is zero.
    sigma: Vec<f64>,
    /// Highest level whose x changed since sigma row k was refreshed.
    maxvisit: Vec<usize>,
    c: Vec<f64>,
    rho: Vec<f64>,
    spine: Vec<bool>,
    nodes: u64,
    counts: BTreeMap<i64, u64>,
    counted: u64,
    vectors: Option<Vec<RetainedVector>>,
    retention_cap: usize,
    aborted: bool,
}

impl SearchState {
    fn new(ctx: &EnumContext, keep: bool, cap: usize) -> Self {
        let n = ctx.n;
        SearchState {
            x: vec![0; n],
            sigma: vec![0.0; n * (n + 1)],
            maxvisit: vec![n; n],
            c: vec![0.0; n],
            rho: vec![0.0; n + 1],
            spine: vec![true; n + 1],
            nodes: 0,
            counts: BTreeMap::new(),
            counted: 0,
            vectors: if keep { Some(Vec::new()) } else { None },
            retention_cap: cap,
            aborted: false,
        }
    }
}

/// Per-level iteration state: the certified interval [lo, hi] of surviving
/// x values, walked outward from the rounded center `mid`.
#[derive(Clone, Copy, Default)]
struct Slot {
    c: f64,
    lo: i64,
    hi: i64,
    mid: i64,
    pos: i64,
    neg: i64,
}

impl Slot {
    #[inline(always)]
    fn next(&mut self) -> Option<i64> {
        // outward zigzag from mid; the first call returns mid itself
        if self.pos <= self.hi && (self.neg < self.lo || self.pos - self.mid <= self.mid - self.neg)
        {
            let x = self.pos;
            self.pos += 1;
            Some(x)
        } else if self.neg >= self.lo {
            let x = self.neg;
            self.neg -= 1;
            Some(x)
        } else {
            None
        }
    }
}

impl EnumContext {
    #[inline(always)]
    fn y_f(&self, level: usize, x: i64) -> f64 {
        (x as f64) + self.shift_f[level]
    }

    /// Smallest x on the kept side of the involution at `level`, and whether
    /// that x is the involution's own fixed point (so the spine continues).
    fn spine_base(&self, level: usize) -> (i64, bool) {
        let t = self.invol_t.as_ref().expect("spine requires involution")[level];
        if t % 2 == 0 {
            (-t / 2, true)
        } else {
            ((-t + 1) / 2, false)
        }
    }

    /// A leaf is its own involution image iff z = -z, i.e. 2x = -t at every
    /// level; such a leaf must be counted once, not twice.
    fn leaf_self_paired(&self, x: &[i64]) -> bool {
        match &self.invol_t {
            Some(t) => x.iter().zip(t).all(|(&xi, &ti)| 2 * xi == -ti),
            None => false,
        }
    }

    /// Refresh sigma rows for `level` and compute its center interval.
    ///
    /// `maxvisit[k]` bounds the highest level whose x changed since
    /// sigma[.][k] was last refreshed. The record is pushed one level down
    /// before it is consumed and reset, so staleness reaches deeper targets
    /// transitively along the descent path.
    #[inline(always)]
    fn descend(&self, st: &mut SearchState, level: usize) {
        let n = self.n;
        let from = st.maxvisit[level].min(n - 1);
        if level > 0 {
            st.maxvisit[level - 1] = st.maxvisit[level - 1].max(st.maxvisit[level]);
        }
        let row = &mut st.sigma[level * (n + 1)..(level + 1) * (n + 1)];
        let qrow = &self.qmu[level];
        for i in (level + 1..=from).rev() {
            let y = (st.x[i] as f64) + self.shift_f[i];
            row[i] = row[i + 1] + qrow[i - level - 1] * y;
        }
        st.maxvisit[level] = level;
        let c = row[level + 1];
        assert!(
            c.abs() <= CENTER_BOUND,
            "enumeration center exceeded its certified magnitude bound"
        );
        st.c[level] = c;
    }

    /// Exact leaf verification; returns the scaled raw norm if accepted.
    fn leaf_norm(&self, x: &[i64]) -> Option<i64> {
        let n = self.n;
        let mut z = vec![0i128; n];
        for i in 0..n {
            z[i] = (x[i] as i128) * (self.shift_den as i128) + self.shift_num[i] as i128;
        }
        let mut acc: i128 = 0;
        for i in 0..n {
            if z[i] == 0 {
                continue;
            }
            let gi = &self.gram[i];
            let mut row: i128 = 0;
            for j in 0..n {
                row += (gi[j] as i128) * z[j];
            }
            acc += z[i] * row;
        }
        if acc <= self.threshold {
            Some(acc as i64)
        } else {
            None
        }
    }

    fn ambient_vector(&self, x: &[i64]) -> RetainedVector {
        let n = self.n;
        let mut num = vec![0i64; n];
        for i in 0..n {
            let zi = x[i] * self.shift_den + self.shift_num[i];
            if zi == 0 {
                continue;
            }
            for j in 0..n {
                num[j] += zi * self.basis[i][j];
            }
        }
        RetainedVector {
            num,
            den: self.lattice_denom * self.shift_den,
        }
    }

    /// Depth-first zigzag enumeration below a fixed prefix.
    /// `start_level` is the highest unassigned level.
    fn run_subtree(
        &self,
        st: &mut SearchState,
        start_level: usize,
        count_cap: u64,
        stop: &AtomicBool,
        stop_at_first: bool,
    ) {
        let n = self.n;
        let mut slots = vec![Slot::default(); n];
        let invol = self.invol_t.as_deref();

        let mut level = start_level;
        self.expand(st, &mut slots, level);

        loop {
            if st.aborted || (st.nodes & 0x3ff == 0 && stop.load(Ordering::Relaxed)) {
                return;
            }
            let Some(x) = slots[level].next() else {
                // level exhausted, go up
                if level + 1 > start_level {
                    return;
                }
                level += 1;
                continue;
            };

            st.x[level] = x;
            if level > 0 {
                st.maxvisit[level - 1] = st.maxvisit[level - 1].max(level);
            }
            st.nodes += 1;

            if level == 0 {
                if let Some(raw) = self.leaf_norm(&st.x) {
                    let mult: u64 = if self.invol_t.is_some() && !self.leaf_self_paired(&st.x) {
                        2
                    } else {
                        1
                    };
                    st.counted += mult;
                    *st.counts.entry(raw).or_insert(0) += mult;
                    if let Some(vs) = st.vectors.as_mut() {
                        if vs.len() + (mult as usize) <= st.retention_cap {
                            let v = self.ambient_vector(&st.x);
                            if mult == 2 {
                                let neg = RetainedVector {
                                    num: v.num.iter().map(|&a| -a).collect(),
                                    den: v.den,
                                };
                                vs.push(neg);
                            }
                            vs.push(v);
                        }
                    }
                    if st.counted > count_cap {
                        st.aborted = true;
                        stop.store(true, Ordering::Relaxed);
                        return;
                    }
                    if stop_at_first && (raw > 0 || !self.shift_is_zero) {
                        st.aborted = true;
                        stop.store(true, Ordering::Relaxed);
                        return;
                    }
                }
                continue;
            }

            // descend: interval membership already certifies the bound
            let z = (x as f64) + self.shift_f[level] + slots[level].c;
            st.rho[level] = st.rho[level + 1] + self.qd[level] * (z * z);
            st.spine[level] =
                st.spine[level + 1] && invol.map_or(false, |t| 2 * x == -t[level]);
            level -= 1;
            self.expand(st, &mut slots, level);
        }
    }

    /// Compute the certified interval of surviving x values at `level` and
    /// prime its iteration slot. Membership is defined by the pruning
    /// predicate rho + q * z^2 <= radius_f exactly as the replay path
    /// evaluates it. The width seed deliberately over-estimates the true
    /// half-width (relative and absolute padding dominate every rounding
    /// error in the predicate, see the budget derivation in build_context),
    /// so the seeded endpoints enclose all predicate-true x and only the
    /// inward direction needs certification by the predicate itself.
    #[inline(always)]
    fn expand(&self, st: &mut SearchState, slots: &mut [Slot], level: usize) {
        self.descend(st, level);
        let c = st.c[level];
        let s = self.shift_f[level];
        let q = self.qd[level];
        let rho_below = st.rho[level + 1];
        let rem = self.radius_f - rho_below;
        if rem < 0.0 {
            slots[level] = Slot {
                c,
                lo: 1,
                hi: 0,
                mid: 0,
                pos: 1,
                neg: 0,
            };
            return;
        }
        let pred = |x: i64| -> bool {
            let z = (x as f64) + s + c;
            rho_below + q * (z * z) <= self.radius_f
        };
        let base = -(c + s);
        let w = (rem / q).sqrt() * (1.0 + 1e-12) + 1e-6;
        let mut hi = (base + w).floor() as i64;
        let mut lo = (base - w).ceil() as i64;
        if st.spine[level + 1] && self.invol_t.is_some() {
            lo = lo.max(self.spine_base(level).0);
        }
        while hi >= lo && !pred(hi) {
            hi -= 1;
        }
        while lo <= hi && !pred(lo) {
            lo += 1;
        }
        if lo > hi {
            slots[level] = Slot {
                c,
                lo: 1,
                hi: 0,
                mid: 0,
                pos: 1,
                neg: 0,
            };
            return;
        }
        // the interval ends bound |z| for every member in between
        for e in [lo, hi] {
            let z = (e as f64) + s + c;
            assert!(
                z.abs() <= self.z_bound_f,
                "enumeration coordinate exceeded its certified magnitude bound"
            );
        }
        let mid = (base.round() as i64).clamp(lo, hi);
        slots[level] = Slot {
            c,
            lo,
            hi,
            mid,
            pos: mid,
            neg: mid - 1,
        };
    }
}

/// Prefixes of the top `depth` levels, each a parallel subtree.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TaskPrefix {
    /// Values for levels n-1 down to n-len, in that order.
    pub xs: Vec<i64>,
}

fn build_context(
    lattice: &ScaledLattice,
    shift_num_ambient: Option<(&[BigInt], &BigInt)>,
    radius: &BigRational,
    delta: Delta,
) -> Result<EnumContext, EnumError> {
    if radius.is_negative() {
        return Err(EnumError::NegativeRadius);
    }
    let (reduced, _) = lattice.enum_reduced(delta);
    let n = reduced.n;
    let basis_big = reduced.basis.clone();
    let basis =
        matrix::int_mat_to_i64(&basis_big).ok_or(EnumError::EntryOverflow)?;
    let gram_big = reduced.gram_raw();
    let gram = matrix::int_mat_to_i64(&gram_big).ok_or(EnumError::EntryOverflow)?;

    // shift in basis coordinates
    let (shift_num, shift_den, shift_f, shift_is_zero);
    match shift_num_ambient {
        None => {
            shift_num = vec![0i64; n];
            shift_den = 1i64;
            shift_f = vec![0.0f64; n];
            shift_is_zero = true;
        }
        Some((num, den)) => {
            let basis_q = matrix::int_to_rat(&basis_big);
            let rhs: Vec<BigRational> = num
                .iter()
                .map(|v| BigRational::new(v * BigInt::from(reduced.denom), den.clone()))
                .collect();
            let coords = matrix::solve_left(&basis_q, &rhs)
                .expect("reduced basis nonsingular");
            let mut d = BigInt::one();
            for c in &coords {
                d = d.lcm(c.denom());
            }
            let dd = d.to_i64().ok_or(EnumError::EntryOverflow)?;
            let nums: Option<Vec<i64>> = coords
                .iter()
                .map(|c| (c.numer() * (&d / c.denom())).to_i64())
                .collect();
            let nums = nums.ok_or(EnumError::EntryOverflow)?;
            shift_f = coords.iter().map(rat_to_f64).collect();
            shift_is_zero = nums.iter().all(|&v| v == 0);
            shift_num = nums;
            shift_den = dd;
        }
    }

    // negation involution x -> -x - t on the coset, if it exists
    let invol_t: Option<Vec<i64>> = if shift_is_zero {
        Some(vec![0i64; n])
    } else if shift_num.iter().all(|&s| (2 * s) % shift_den == 0) {
        Some(shift_num.iter().map(|&s| 2 * s / shift_den).collect())
    } else {
        None
    };

    // exact Cholesky data from the Gram matrix
    let (mu, bstar) = reduction::gso_of_gram(&gram_big);
    let mut qd = Vec::with_capacity(n);
    for b in &bstar {
        let q = rat_to_f64(b);
        if q < (2f64).powi(-20) {
            return Err(EnumError::PrecisionLoss);
        }
        qd.push(q);
    }
    let mut qmu = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = Vec::with_capacity(n - k - 1);
        for j in k + 1..n {
            row.push(rat_to_f64(&mu[j][k]));
        }
        qmu.push(row);
    }

    // exact acceptance threshold: z G z <= radius * divisor * shift_den^2
    let divisor = lattice.gram_divisor();
    let thr = radius
        * BigRational::from_integer(&divisor * BigInt::from(shift_den) * BigInt::from(shift_den));
    let threshold = thr
        .floor()
        .to_integer()
        .to_i128()
        .ok_or(EnumError::EntryOverflow)?;

    // Certified error budget for one root-to-leaf path. All floating
    // point operands are bounded at runtime: passing nodes satisfy
    // q * z^2 <= radius_f (hence |z| <= z_bound) and centers are checked
    // against CENTER_BOUND in descend, which caps |y| = |z - c|. Each f64
    // operation on values of magnitude at most M adds at most M * 2^-52
    // of absolute error, so the accumulated error of rho along one path
    // is at most `slack`, which is added to the pruning radius: a vector
    // whose true norm is within the radius can then never be pruned.
    // Leaves are re-verified exactly, so the slack only admits a handful
    // of extra nodes near the boundary.
    let eps = (2f64).powi(-52);
    let nf = n as f64;
    let radius_y = (threshold as f64) / ((shift_den * shift_den) as f64);
    let qmin = qd.iter().cloned().fold(f64::MAX, f64::min);
    let qmax = qd.iter().cloned().fold(0.0f64, f64::max) + 1.0;
    let mu_max = qmu
        .iter()
        .flatten()
        .map(|m| m.abs())
        .fold(0.0f64, f64::max)
        + 1.0;
    if mu_max > 8.0 {
        return Err(EnumError::PrecisionLoss);
    }
    let z_bound = 2.0 * (radius_y.max(1.0) / qmin).sqrt() + 8.0;
    let y_bound = z_bound + CENTER_BOUND + 2.0;
    let sig_mag = nf * mu_max * y_bound;
    let e_center = nf * eps * (3.0 * mu_max * y_bound + sig_mag);
    let e_z = eps * y_bound + e_center;
    let e_sq = 2.0 * (z_bound + 1.0) * e_z + e_z * e_z;
    let e_term = qmax * (e_sq + 2.0 * eps * (z_bound + 1.0) * (z_bound + 1.0));
    let slack = 2.0 * nf * (e_term + eps * (radius_y.abs() + 1.0));
    let radius_f = radius_y * (1.0 + 4.0 * eps) + slack;
    if !radius_f.is_finite() || !sig_mag.is_finite() {
        return Err(EnumError::EntryOverflow);
    }
    let zguard_f = 4.0 * e_z;
    let z_bound_f = z_bound;

    Ok(EnumContext {
        n,
        basis,
        lattice_denom: reduced.denom,
        gram,
        qd,
        qmu,
        shift_num,
        shift_den,
        shift_f,
        shift_is_zero,
        invol_t,
        threshold,
        radius_f,
        zguard_f,
        z_bound_f,
    })
}

/// Enumerate the prefixes for the top `depth` levels: every assignment of
/// the top coordinates that passes the interval pruning test.
fn collect_prefixes(ctx: &EnumContext, depth: usize) -> Vec<TaskPrefix> {
    let n = ctx.n;
    let depth = depth.min(n.saturating_sub(1));
    if depth == 0 {
        return vec![TaskPrefix { xs: vec![] }];
    }
    let mut out = Vec::new();
    let mut st = SearchState::new(ctx, false, 0);
    // simple recursive scan over the top levels
    fn rec(
        ctx: &EnumContext,
        st: &mut SearchState,
        level: usize,
        stop_level: usize,
        prefix: &mut Vec<i64>,
        out: &mut Vec<TaskPrefix>,
    ) {
        ctx.descend(st, level);
        let c = st.c[level];
        let on_spine = st.spine[level + 1] && ctx.invol_t.is_some();
        let x0 = if on_spine {
            ctx.spine_base(level).0
        } else {
            (-(c + ctx.shift_f[level])).round() as i64
        };
        let mut offs: Vec<i64> = Vec::new();
        // walk outward in both directions until the pruning test closes
        let q = ctx.qd[level];
        let probe = |off: i64, done: &mut bool| -> bool {
            let x = x0 + off;
            let z = ctx.y_f(level, x) + c;
            let term = q * (z * z);
            if st.rho[level + 1] + term > ctx.radius_f {
                if off >= 0 && z > ctx.zguard_f {
                    *done = true;
                }
                if off <= 0 && z < -ctx.zguard_f {
                    *done = true;
                }
                false
            } else {
                true
            }
        };
        let mut done = false;
        if probe(0, &mut done) {
            offs.push(0);
        }
        let mut d = false;
        let mut o = 1i64;
        while !d {
            if probe(o, &mut d) {
                offs.push(o);
            }
            o += 1;
        }
        if !on_spine {
            d = false;
            o = 1;
            while !d {
                if probe(-o, &mut d) {
                    offs.push(-o);
                }
                o += 1;
            }
        }
        for off in offs {
            let x = x0 + off;
            st.x[level] = x;
            st.maxvisit[level.saturating_sub(1)] =
                st.maxvisit[level.saturating_sub(1)].max(level + 1);
            prefix.push(x);
            if level == stop_level {
                out.push(TaskPrefix { xs: prefix.clone() });
            } else {
                // recompute rho for the chosen x before descending
                let z = ctx.y_f(level, x) + st.c[level];
                st.rho[level] = st.rho[level + 1] + ctx.qd[level] * (z * z);
                st.spine[level] = st.spine[level + 1]
                    && match &ctx.invol_t {
                        Some(t) => 2 * x == -t[level],
                        None => false,
                    };
                rec(ctx, st, level - 1, stop_level, prefix, out);
            }
            prefix.pop();
        }
    }
    rec(ctx, &mut st, n - 1, n - depth, &mut Vec::new(), &mut out);
    out
}

fn run_task(ctx: &EnumContext, prefix: &TaskPrefix, opts: &EnumOptions, stop: &AtomicBool) -> TaskResult {
    let n = ctx.n;
    let mut st = SearchState::new(ctx, opts.keep_vectors, opts.retention_cap);
    // replay the prefix
    let mut level = n;
    let mut ok = true;
    for (i, &x) in prefix.xs.iter().enumerate() {
        let k = n - 1 - i;
        ctx.descend(&mut st, k);
        st.x[k] = x;
        if k > 0 {
            st.maxvisit[k - 1] = st.maxvisit[k - 1].max(k + 1);
        }
        let z = ctx.y_f(k, x) + st.c[k];
        let rho_new = st.rho[k + 1] + ctx.qd[k] * (z * z);
        if rho_new > ctx.radius_f {
            ok = false;
            break;
        }
        if k == 0 {
            // fully determined leaf prefix
            if let Some(raw) = ctx.leaf_norm(&st.x) {
                let mult: u64 = if ctx.invol_t.is_some() && !ctx.leaf_self_paired(&st.x) {
                    2
                } else {
                    1
                };
                *st.counts.entry(raw).or_insert(0) += mult;
                st.counted += mult;
                if let Some(vs) = st.vectors.as_mut() {
                    let v = ctx.ambient_vector(&st.x);
                    if mult == 2 {
                        vs.push(RetainedVector {
                            num: v.num.iter().map(|&a| -a).collect(),
                            den: v.den,
                        });
                    }
                    vs.push(v);
                }
            }
            ok = false;
            break;
        }
        st.rho[k] = rho_new;
        st.spine[k] = st.spine[k + 1]
            && match &ctx.invol_t {
                Some(t) => 2 * x == -t[k],
                None => false,
            };
        level = k;
        st.nodes += 1;
    }
    if ok && level > 0 {
        ctx.run_subtree(&mut st, level - 1, opts.count_cap, stop, opts.stop_at_first);
    }
    TaskResult {
        counts: st.counts,
        nodes: st.nodes,
        vectors: st.vectors,
    }
}

/// Core entry point: complete enumeration of all `v` in `target + L` with
/// `<v,v> <= radius`. Subtrees already present in `completed` are skipped;
/// `on_task` fires after each newly finished subtree (checkpoint hook).
#[allow(clippy::too_many_arguments)]
pub fn enumerate_with_checkpoint(
    lattice: &ScaledLattice,
    shift: Option<(&[BigInt], &BigInt)>,
    radius: &BigRational,
    opts: &EnumOptions,
    completed: &BTreeMap<usize, TaskResult>,
    mut on_task: impl FnMut(usize, &TaskResult) + Send,
) -> Result<EnumerationReport, EnumError> {
    let ctx = build_context(lattice, shift, radius, opts.delta)?;
    let prefixes = collect_prefixes(&ctx, opts.split_depth);
    let stop = AtomicBool::new(false);

    let pending: Vec<(usize, &TaskPrefix)> = prefixes
        .iter()
        .enumerate()
        .filter(|(i, _)| !completed.contains_key(i))
        .collect();
    let on_task = std::sync::Mutex::new(&mut on_task);
    let results: Vec<(usize, TaskResult)> = pending
        .par_iter()
        .map(|&(i, p)| {
            let r = run_task(&ctx, p, opts, &stop);
            (on_task.lock().expect("checkpoint callback poisoned"))(i, &r);
            (i, r)
        })
        .collect();

    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    let mut vectors: Option<Vec<RetainedVector>> =
        if opts.keep_vectors { Some(Vec::new()) } else { None };
    let mut nodes = 0u64;
    let mut counted = 0u64;
    for (_, r) in completed.iter() {
        for (&k, &c) in &r.counts {
            *counts.entry(k).or_insert(0) += c;
            counted += c;
        }
        nodes += r.nodes;
        if let (Some(vs), Some(rv)) = (vectors.as_mut(), r.vectors.as_ref()) {
            vs.extend(rv.iter().cloned());
        }
    }
    for (_, r) in &results {
        for (&k, &c) in &r.counts {
            *counts.entry(k).or_insert(0) += c;
            counted += c;
        }
        nodes += r.nodes;
        if let (Some(vs), Some(rv)) = (vectors.as_mut(), r.vectors.as_ref()) {
            vs.extend(rv.iter().cloned());
        }
    }
    let aborted = stop.load(Ordering::Relaxed);
    if counted > opts.count_cap {
        return Err(EnumError::CountCap(opts.count_cap));
    }
    if let Some(vs) = vectors.as_mut() {
        vs.sort();
        if vs.len() > opts.retention_cap {
            vs.truncate(opts.retention_cap);
        }
    }
    let divisor = lattice.gram_divisor()
        * BigInt::from(ctx.shift_den)
        * BigInt::from(ctx.shift_den);
    Ok(EnumerationReport {
        radius: radius.clone(),
        divisor,
        counts,
        vectors,
        aborted,
        nodes,
    })
}

pub fn enumerate_lattice(
    lattice: &ScaledLattice,
    radius: &BigRational,
    opts: &EnumOptions,
) -> Result<EnumerationReport, EnumError> {
    enumerate_with_checkpoint(lattice, None, radius, opts, &BTreeMap::new(), |_, _| {})
}

pub fn enumerate_coset(
    coset: &CosetLattice,
    radius: &BigRational,
    opts: &EnumOptions,
) -> Result<EnumerationReport, EnumError> {
    enumerate_with_checkpoint(
        &coset.base,
        Some((&coset.shift_num, &coset.shift_den)),
        radius,
        opts,
        &BTreeMap::new(),
        |_, _| {},
    )
}

/// Smallest Gram diagonal after reduction: an upper bound on the minimum.
pub fn diag_bound(lattice: &ScaledLattice, delta: Delta) -> BigRational {
    let (red, _) = lattice.enum_reduced(delta);
    let g = red.gram_raw();
    let d = (0..red.n).map(|i| g[i][i].clone()).min().unwrap();
    BigRational::new(d, lattice.gram_divisor())
}

/// Escalating radii for an integral lattice: every integer up to the
/// reduced diagonal bound. Enumerating small radii first is vastly cheaper
/// when the diagonal bound overshoots the true minimum, because the
/// enumeration tree grows exponentially with the radius.
pub fn integral_radius_schedule(diag: &BigRational) -> Vec<BigRational> {
    let top = diag.floor().to_integer();
    let mut out = Vec::new();
    let mut k = BigInt::one();
    while k <= top {
        out.push(BigRational::from_integer(k.clone()));
        k += 1;
    }
    out
}

/// Radii on which shadow norms can lie: a characteristic vector w satisfies
/// w.w = n (mod 8), so shadow vectors w/2 have norm in n/4 + 2Z.
pub fn shadow_radius_schedule(n: usize, cap: &BigRational) -> Vec<BigRational> {
    let quarter = BigRational::new(BigInt::from(n as i64), BigInt::from(4));
    let two = BigRational::from_integer(BigInt::from(2));
    let mut r = &quarter - (&quarter / &two).floor() * &two;
    if r.is_zero() {
        r = two.clone();
    }
    let mut out = Vec::new();
    while &r < cap {
        out.push(r.clone());
        r += &two;
    }
    out.push(cap.clone());
    out
}

pub fn min_norm(lattice: &ScaledLattice) -> Result<BigRational, EnumError> {
    let opts = EnumOptions::default();
    let diag = diag_bound(lattice, opts.delta);
    if lattice.is_integral() {
        for r in integral_radius_schedule(&diag) {
            let report = enumerate_lattice(lattice, &r, &opts)?;
            if let Some(m) = report.min_nonzero() {
                return Ok(m);
            }
        }
    }
    let report = enumerate_lattice(lattice, &diag, &opts)?;
    Ok(report
        .min_nonzero()
        .expect("diagonal bound guarantees a nonzero vector"))
}

pub fn kissing_number(lattice: &ScaledLattice) -> Result<u64, EnumError> {
    let opts = EnumOptions::default();
    let m = min_norm(lattice)?;
    let report = enumerate_lattice(lattice, &m, &opts)?;
    Ok(report.count_at(&m))
}

/// True iff a nonzero vector of norm strictly below `bound` exists.
pub fn has_vector_below(
    lattice: &ScaledLattice,
    bound: &BigRational,
) -> Result<bool, EnumError> {
    let witness = has_vector_below_witness(lattice, bound)?;
    Ok(witness.is_some())
}

/// Early-abort existence check; returns a witness vector when one exists.
/// The witness norm is re-verified exactly before returning.
pub fn has_vector_below_witness(
    lattice: &ScaledLattice,
    bound: &BigRational,
) -> Result<Option<RetainedVector>, EnumError> {
    assert!(bound.is_positive(), "bound must be positive");
    // norms are multiples of 1/divisor; "strictly below" = radius bound - ulp
    let div = lattice.gram_divisor();
    let scaled = bound * BigRational::from_integer(div.clone());
    let radius_key = scaled.ceil().to_integer() - BigInt::one();
    if radius_key.is_negative() {
        return Ok(None);
    }
    let radius = BigRational::new(radius_key, div.clone());
    let opts = EnumOptions {
        stop_at_first: true,
        keep_vectors: true,
        retention_cap: 1 << 12,
        ..EnumOptions::default()
    };
    let report = enumerate_lattice(lattice, &radius, &opts)?;
    let witness = report.vectors.as_ref().and_then(|vs| {
        vs.iter()
            .find(|v| v.num.iter().any(|&a| a != 0))
            .cloned()
    });
    if let Some(w) = &witness {
        // exact re-verification of the witness norm
        let raw: i128 = w.num.iter().map(|&a| (a as i128) * (a as i128)).sum();
        let norm = BigRational::new(
            BigInt::from(raw),
            BigInt::from(w.den) * BigInt::from(w.den) * BigInt::from(lattice.scale),
        );
        assert!(&norm < bound, "witness must be below the bound");
    }
    Ok(witness)
}

/// Minimum norm over the shadow S(L) = L1 u L3.
pub fn shadow_min_norm(lattice: &ScaledLattice) -> Result<BigRational, EnumError> {
    let sd = lattice.shadow_decomposition()?;
    let opts = EnumOptions::default();
    let mut best: Option<BigRational> = None;
    for coset in [&sd.l1, &sd.l3] {
        // the reduced representative is itself a coset vector: its norm
        // caps the coset minimum, and the congruence grid lets the radius
        // escalate from far below that cap
        let rep_raw: BigInt = coset
            .shift_num
            .iter()
            .map(|v| v * v)
            .sum();
        let rep_norm = BigRational::new(
            rep_raw,
            &coset.shift_den * &coset.shift_den * BigInt::from(lattice.scale),
        );
        let mut found: Option<BigRational> = None;
        for r in shadow_radius_schedule(lattice.n, &rep_norm) {
            let report = enumerate_coset(coset, &r, &opts)?;
            if let Some(m) = report.min_nonzero() {
                found = Some(m);
                break;
            }
        }
        let m = found.expect("coset contains its representative");
        best = Some(match best {
            None => m,
            Some(b) => b.min(m),
        });
    }
    Ok(best.unwrap())
}

/// Ordered (norm, count) pairs up to a bound; wrapper over `enumerate`.
pub fn theta_coefficients_empirical(
    lattice: &ScaledLattice,
    up_to: &BigRational,
) -> Result<Vec<(BigRational, u64)>, EnumError> {
    let report = enumerate_lattice(lattice, up_to, &EnumOptions::default())?;
    Ok(report.coefficient_pairs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf5;
    use crate::lattice::construction_a;
    use num_traits::Zero;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn z2_radius_1() {
        let l = ScaledLattice::zn(2);
        let r = enumerate_lattice(&l, &rat(1), &EnumOptions::default()).unwrap();
        assert_eq!(r.counts.get(&0), Some(&1));
        assert_eq!(r.counts.get(&1), Some(&4));
        assert_eq!(r.counts.len(), 2);
    }

    #[test]
    fn z2_theta_matches_theta3_squared() {
        let l = ScaledLattice::zn(2);
        let pairs = theta_coefficients_empirical(&l, &rat(4)).unwrap();
        let t = crate::qseries::theta3(16).pow(2);
        for (norm, count) in pairs {
            assert!(norm.is_integer());
            let k = norm.to_integer().to_usize().unwrap();
            assert_eq!(BigInt::from(count), t.coeff_q(k), "norm {k}");
        }
    }

    #[test]
    fn zn_min_and_kissing() {
        for n in [1usize, 2, 3, 4, 6] {
            let l = ScaledLattice::zn(n);
            assert_eq!(min_norm(&l).unwrap(), rat(1));
            assert_eq!(kissing_number(&l).unwrap(), 2 * n as u64);
        }
    }

    #[test]
    fn radius_zero() {
        let l = ScaledLattice::zn(3);
        let r = enumerate_lattice(&l, &rat(0), &EnumOptions::default()).unwrap();
        assert_eq!(r.counts.get(&0), Some(&1));
        assert_eq!(r.counts.len(), 1);
    }

    #[test]
    fn small_construction_a_min_norm() {
        // dim-2 lattice from the code (1,2): minimum norm 1
        let g = gf5::F5Matrix::from_rows(&[vec![gf5::F5(1), gf5::F5(2)]]);
        let l = construction_a(&g).unwrap();
        assert_eq!(min_norm(&l).unwrap(), rat(1));
    }

    #[test]
    fn has_vector_below_works() {
        let l = ScaledLattice::zn(4);
        assert!(has_vector_below(&l, &rat(2)).unwrap());
        assert!(!has_vector_below(&l, &rat(1)).unwrap());
    }

    #[test]
    fn shadow_of_z4_min_and_counts() {
        let l = ScaledLattice::zn(4);
        assert_eq!(shadow_min_norm(&l).unwrap(), rat(1));
        // shadow coset counts at radius 3: brute force over {±1/2, ±3/2}^4
        let sd = l.shadow_decomposition().unwrap();
        let mut total_1 = 0u64;
        let mut total_3 = 0u64;
        for c in [&sd.l1, &sd.l3] {
            let r = enumerate_coset(c, &rat(3), &EnumOptions::default()).unwrap();
            total_1 += r.count_at(&rat(1));
            total_3 += r.count_at(&rat(3));
        }
        // brute force: vectors in (1/2 + Z)^4 with norm <= 3:
        // norm 1: all-halves = 16; norm 3 needs one 3/2: content 9/4+3/4 = 3,
        // choose position (4) and sign (2) and signs of others (8) = 64
        assert_eq!(total_1, 16);
        assert_eq!(total_3, 64);
    }

    #[test]
    fn counts_are_even_for_nonzero_norms() {
        let l = ScaledLattice::zn(5);
        let r = enumerate_lattice(&l, &rat(3), &EnumOptions::default()).unwrap();
        for (&k, &c) in &r.counts {
            if k > 0 {
                assert_eq!(c % 2, 0);
            }
        }
    }

    #[test]
    fn retained_vectors_match_counts() {
        let l = ScaledLattice::zn(3);
        let opts = EnumOptions {
            keep_vectors: true,
            ..EnumOptions::default()
        };
        let r = enumerate_lattice(&l, &rat(2), &opts).unwrap();
        let vs = r.vectors.unwrap();
        let total: u64 = r.counts.values().sum();
        assert_eq!(vs.len() as u64, total);
        // each vector's exact norm agrees with its count bucket
        for v in &vs {
            let raw: i64 = v.num.iter().map(|&a| a * a).sum();
            assert!(r.counts.contains_key(&raw));
        }
    }

    #[test]
    fn brute_force_agreement_small_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 30 {
            let n = rng.gen_range(2..=4);
            let basis: Vec<Vec<i64>> = loop {
                let b: Vec<Vec<i64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect())
                    .collect();
                let ib = matrix::int_mat_from_i64(&b);
                if !matrix::det_bareiss(&ib).is_zero() {
                    break b;
                }
            };
            let radius = rng.gen_range(1..=8);
            // skip near-singular bases whose oracle box would be huge
            let Some(bounds) = box_bounds(&basis, radius) else {
                continue;
            };
            done += 1;
            let l = ScaledLattice::new(1, 1, matrix::int_mat_from_i64(&basis)).unwrap();
            let report = enumerate_lattice(&l, &rat(radius), &EnumOptions::default()).unwrap();
            let brute = brute_force_counts(&basis, &bounds, radius);
            assert_eq!(report.counts, brute, "basis {basis:?} radius {radius}");
        }
    }

    /// Per-coordinate bounds |x_i| <= sqrt(radius * (G^-1)_ii) for the box
    /// oracle; None when the search box would be too large.
    fn box_bounds(basis: &[Vec<i64>], radius: i64) -> Option<Vec<i64>> {
        let n = basis.len();
        let b = matrix::int_mat_from_i64(basis);
        let g = matrix::mat_mul_transpose(&b, &b);
        let ginv = matrix::rat_inverse(&matrix::int_to_rat(&g)).unwrap();
        let mut bounds = vec![0i64; n];
        let mut cells = 1f64;
        for i in 0..n {
            let v = &ginv[i][i] * BigRational::from_integer(BigInt::from(radius));
            let f = v.numer().to_f64().unwrap() / v.denom().to_f64().unwrap();
            bounds[i] = f.sqrt().ceil() as i64 + 1;
            cells *= (2 * bounds[i] + 1) as f64;
        }
        (cells <= 2e6).then_some(bounds)
    }

    /// Independent oracle: exhaustive box search with exact integer norms.
    fn brute_force_counts(basis: &[Vec<i64>], bounds: &[i64], radius: i64) -> BTreeMap<i64, u64> {
        let n = basis.len();
        let b = matrix::int_mat_from_i64(basis);
        let g = matrix::mat_mul_transpose(&b, &b);
        let mut counts = BTreeMap::new();
        let mut x = vec![0i64; n];
        #[allow(clippy::too_many_arguments)]
        fn rec(
            g: &[Vec<BigInt>],
            bounds: &[i64],
            x: &mut Vec<i64>,
            i: usize,
            radius: i64,
            counts: &mut BTreeMap<i64, u64>,
        ) {
            if i == x.len() {
                let n = x.len();
                let mut acc: i128 = 0;
                for a in 0..n {
                    for b in 0..n {
                        acc += (x[a] as i128)
                            * (x[b] as i128)
                            * g[a][b].to_i128().unwrap();
                    }
                }
                if acc <= radius as i128 {
                    *counts.entry(acc as i64).or_insert(0) += 1;
                }
                return;
            }
            for v in -bounds[i]..=bounds[i] {
                x[i] = v;
                rec(g, bounds, x, i + 1, radius, counts);
            }
            x[i] = 0;
        }
        rec(&g, bounds, &mut x, 0, radius, &mut counts);
        counts
    }

    #[test]
    fn lll_invariance() {
        // enumeration results identical for a skewed basis of Z^3
        let skew = matrix::int_mat_from_i64(&[
            vec![1, 7, -3],
            vec![0, 1, 9],
            vec![0, 0, 1],
        ]);
        let l = ScaledLattice::new(1, 1, skew).unwrap();
        let r = enumerate_lattice(&l, &rat(2), &EnumOptions::default()).unwrap();
        let r2 = enumerate_lattice(&ScaledLattice::zn(3), &rat(2), &EnumOptions::default())
            .unwrap();
        assert_eq!(r.counts, r2.counts);
    }

    #[test]
    fn split_depth_does_not_change_counts() {
        let l = ScaledLattice::zn(4);
        let mut reports = Vec::new();
        for d in [0usize, 1, 2, 3] {
            let opts = EnumOptions {
                split_depth: d,
                ..EnumOptions::default()
            };
            reports.push(enumerate_lattice(&l, &rat(4), &opts).unwrap().counts);
        }
        for w in reports.windows(2) {
            assert_eq!(w[0], w[1]);
        }
    }
}
