//! Certification: the s-extremality bound, the dimension-52 lemmas, and
//! machine-readable certificates for the three-lattice construction.
//!
//! Everything here composes quantities that were computed exactly by the
//! enumeration and series modules; the certificate records those inputs
//! (radius, counts) so a third party can re-verify without re-running the
//! enumeration. The canonical SHA-256 of a certificate excludes timing.

use crate::checkpoint::{CheckpointSink, NullCheckpoint};
use crate::enumeration::{self, EnumOptions, EnumerationReport};
use crate::gf5::{self, FourNegacirculantSpec};
use crate::isometry;
use crate::lattice::{construction_a, LatticeFile, ScaledLattice};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("refused: the bound excludes the case n = 23, min(L) = 3")]
    ExceptionCase,
    #[error("bound violated: 8 min(L) + 4 min(S) = {lhs} > {rhs} = 8 + n; upstream computation is inconsistent")]
    BoundViolation { lhs: String, rhs: String },
    #[error("stage '{stage}' failed: {detail}")]
    Stage { stage: &'static str, detail: String },
    #[error("refused: expects an optimal odd unimodular lattice in dimension 52 (got n = {n}, min = {min})")]
    WrongInput { n: usize, min: String },
    #[error("Lemma 3.1 consistency violated: kissing = {kissing}, shadow min = {shadow_min}")]
    LemmaInconsistency { kissing: u64, shadow_min: String },
    #[error("enumeration failed: {0}")]
    Enumeration(#[from] enumeration::EnumError),
    #[error("lattice error: {0}")]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error("code error: {0}")]
    Code(#[from] gf5::CodeError),
    #[error("isometry engine failed: {0}")]
    Isometry(#[from] isometry::IsometryError),
}

/// Largest possible minimum norm of a unimodular lattice, per dimension.
/// A data table, not a derivation; dimensions outside it get no
/// optimality verdict.
pub fn optimal_min_norm(n: usize) -> Option<BigRational> {
    match n {
        52 | 54 => Some(BigRational::from_integer(BigInt::from(5))),
        _ => None,
    }
}

fn rat_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The s-extremality bound 8 min(L) + 4 min(S(L)) <= 8 + n.
/// Returns (lhs, rhs, s_extremal) with s_extremal = equality.
pub fn gaborit_check(
    min_l: &BigRational,
    min_s: &BigRational,
    n: usize,
) -> Result<(BigRational, BigRational, bool), CertifyError> {
    let three = BigRational::from_integer(BigInt::from(3));
    if n == 23 && *min_l == three {
        return Err(CertifyError::ExceptionCase);
    }
    let lhs = min_l * BigRational::from_integer(BigInt::from(8))
        + min_s * BigRational::from_integer(BigInt::from(4));
    let rhs = BigRational::from_integer(BigInt::from(8 + n as i64));
    if lhs > rhs {
        return Err(CertifyError::BoundViolation {
            lhs: rat_str(&lhs),
            rhs: rat_str(&rhs),
        });
    }
    let s_extremal = lhs == rhs;
    Ok((lhs, rhs, s_extremal))
}

/// Exact quantities computed for one lattice; the expensive part of
/// certification, reusable by the isometry stage.
pub struct Analysis {
    pub lattice: ScaledLattice,
    pub min_norm: BigRational,
    pub kissing: u64,
    pub min_report: EnumerationReport,
    pub shadow_min: BigRational,
    pub shadow_reports: Vec<EnumerationReport>,
}

impl Analysis {
    /// Total shadow count at a given norm, across both cosets.
    pub fn shadow_count_at(&self, norm: &BigRational) -> u64 {
        self.shadow_reports.iter().map(|r| r.count_at(norm)).sum()
    }
}

/// Enumerate the minimum, kissing number, and shadow minimum exactly.
pub fn analyze_lattice(lattice: &ScaledLattice) -> Result<Analysis, CertifyError> {
    analyze_lattice_with(lattice, &NullCheckpoint)
}

/// Like [`analyze_lattice`], but the three enumeration jobs resume from and
/// write to a checkpoint sink. Job labels derive from the basis hash, so a
/// sink directory can safely be shared between lattices.
pub fn analyze_lattice_with(
    lattice: &ScaledLattice,
    sink: &dyn CheckpointSink,
) -> Result<Analysis, CertifyError> {
    if !lattice.is_unimodular() {
        return Err(CertifyError::Stage {
            stage: "unimodularity",
            detail: "lattice is not unimodular".into(),
        });
    }
    let key = basis_hash(lattice)?;
    let key = &key[..16];
    let opts = EnumOptions {
        keep_vectors: true,
        split_depth: 3,
        ..EnumOptions::default()
    };

    // Escalate integer radii: the first nonempty complete pass both
    // establishes the minimum (nothing below it survives) and retains its
    // vectors. Starting low matters; the tree at the diagonal bound can be
    // orders of magnitude larger than the tree at the true minimum.
    let diag = enumeration::diag_bound(lattice, opts.delta);
    let mut min_report = None;
    for r in enumeration::integral_radius_schedule(&diag) {
        let label = format!("{key}-min-r{}-d{}", r.numer(), opts.split_depth);
        let completed = sink.load(&label);
        let report = enumeration::enumerate_with_checkpoint(
            lattice,
            None,
            &r,
            &opts,
            &completed,
            |i, t| sink.save(&label, i, t),
        )?;
        if report.min_nonzero().is_some() {
            min_report = Some(report);
            break;
        }
    }
    let min_report = min_report.ok_or(CertifyError::Stage {
        stage: "minimum",
        detail: "no nonzero vector up to the diagonal bound".into(),
    })?;
    let min_norm = min_report
        .min_nonzero()
        .expect("report was selected as nonempty");
    let kissing = min_report.count_at(&min_norm);

    let sd = lattice.shadow_decomposition()?;
    let mut shadow_reports = Vec::with_capacity(2);
    let mut shadow_min: Option<BigRational> = None;
    for (coset, tag) in [(&sd.l1, "s1"), (&sd.l3, "s3")] {
        // the reduced representative lies in the coset, so its norm bounds
        // the coset minimum and one enumeration pass suffices
        let rep_raw: BigInt = coset.shift_num.iter().map(|v| v * v).sum();
        let rep_norm = BigRational::new(
            rep_raw,
            &coset.shift_den * &coset.shift_den * BigInt::from(lattice.scale),
        );
        let coset_opts = EnumOptions {
            keep_vectors: false,
            ..opts.clone()
        };
        // escalate along the congruence grid of possible shadow norms
        let mut hit = None;
        for r in enumeration::shadow_radius_schedule(lattice.n, &rep_norm) {
            let label = format!(
                "{key}-{tag}-r{}-{}-d{}",
                r.numer(),
                r.denom(),
                opts.split_depth
            );
            let completed = sink.load(&label);
            let report = enumeration::enumerate_with_checkpoint(
                &coset.base,
                Some((&coset.shift_num, &coset.shift_den)),
                &r,
                &coset_opts,
                &completed,
                |i, t| sink.save(&label, i, t),
            )?;
            if report.min_nonzero().is_some() {
                hit = Some(report);
                break;
            }
        }
        let report = hit.expect("coset contains its representative");
        let m = report
            .min_nonzero()
            .expect("report was selected as nonempty");
        shadow_min = Some(match shadow_min {
            None => m,
            Some(b) => b.min(m),
        });
        shadow_reports.push(report);
    }
    Ok(Analysis {
        lattice: lattice.clone(),
        min_norm,
        kissing,
        min_report,
        shadow_min: shadow_min.unwrap(),
        shadow_reports,
    })
}

/// Lemma 3.1: for an optimal (min 5) odd unimodular lattice in dimension
/// 52, kissing = 157248 iff the shadow minimum is 5. Both sides are
/// computed and the equivalence itself is checked.
pub fn kissing_criterion_52(lattice: &ScaledLattice) -> Result<bool, CertifyError> {
    let a = analyze_lattice(lattice)?;
    kissing_criterion_52_analysis(&a)
}

pub fn kissing_criterion_52_analysis(a: &Analysis) -> Result<bool, CertifyError> {
    let five = BigRational::from_integer(BigInt::from(5));
    if a.lattice.n != 52 || a.min_norm != five {
        return Err(CertifyError::WrongInput {
            n: a.lattice.n,
            min: rat_str(&a.min_norm),
        });
    }
    let lhs = a.kissing == 157_248;
    let rhs = a.shadow_min == five;
    if lhs != rhs {
        return Err(CertifyError::LemmaInconsistency {
            kissing: a.kissing,
            shadow_min: rat_str(&a.shadow_min),
        });
    }
    Ok(lhs)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EnumSummary {
    pub radius: String,
    /// Counts keyed by exact norm (reduced-fraction string).
    pub counts: BTreeMap<String, u64>,
    pub nodes: u64,
}

impl EnumSummary {
    fn from_report(r: &EnumerationReport) -> Self {
        let counts = r
            .coefficient_pairs()
            .into_iter()
            .map(|(norm, c)| (rat_str(&norm), c))
            .collect();
        EnumSummary {
            radius: rat_str(&r.radius),
            counts,
            nodes: r.nodes,
        }
    }

    fn merged(reports: &[EnumerationReport]) -> Self {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut nodes = 0;
        let mut radius = BigRational::from_integer(BigInt::from(0));
        for r in reports {
            for (norm, c) in r.coefficient_pairs() {
                *counts.entry(rat_str(&norm)).or_insert(0) += c;
            }
            nodes += r.nodes;
            if r.radius > radius {
                radius = r.radius.clone();
            }
        }
        EnumSummary {
            radius: rat_str(&radius),
            counts,
            nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Certificate {
    pub schema: u32,
    pub identity: String,
    /// SHA-256 over the canonical (HNF) basis file of the lattice.
    pub basis_sha256: String,
    pub n: usize,
    pub unimodular: bool,
    pub odd: bool,
    pub min_norm: String,
    pub kissing: u64,
    pub shadow_min: String,
    pub bound_lhs: String,
    pub bound_rhs: String,
    pub s_extremal: bool,
    /// Dimension-rule verdict; absent when the dimension is not tabled.
    pub optimal: Option<bool>,
    pub enumeration: EnumSummary,
    pub shadow_enumeration: EnumSummary,
    pub tool_version: String,
    /// Wall time in milliseconds; excluded from the canonical hash.
    pub timing_ms: u64,
}

impl Certificate {
    /// Canonical SHA-256: serialization with the timing field zeroed.
    pub fn canonical_sha256(&self) -> String {
        let mut c = self.clone();
        c.timing_ms = 0;
        let bytes = serde_json::to_vec(&c).expect("certificate serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn basis_hash(lattice: &ScaledLattice) -> Result<String, CertifyError> {
    let file = LatticeFile::from_lattice(lattice)?;
    let bytes = serde_json::to_vec(&file).expect("lattice file serializes");
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn certificate_from_analysis(
    a: &Analysis,
    identity: &str,
    timing_ms: u64,
) -> Result<Certificate, CertifyError> {
    let (lhs, rhs, s_extremal) = gaborit_check(&a.min_norm, &a.shadow_min, a.lattice.n)?;
    let optimal = optimal_min_norm(a.lattice.n).map(|m| a.min_norm == m);
    // Lemma 3.1 internal consistency in its applicability range
    if a.lattice.n == 52 && a.min_norm == BigRational::from_integer(BigInt::from(5)) {
        kissing_criterion_52_analysis(a)?;
    }
    Ok(Certificate {
        schema: 1,
        identity: identity.to_string(),
        basis_sha256: basis_hash(&a.lattice)?,
        n: a.lattice.n,
        unimodular: a.lattice.is_unimodular(),
        odd: a.lattice.is_odd()?,
        min_norm: rat_str(&a.min_norm),
        kissing: a.kissing,
        shadow_min: rat_str(&a.shadow_min),
        bound_lhs: rat_str(&lhs),
        bound_rhs: rat_str(&rhs),
        s_extremal,
        optimal,
        enumeration: EnumSummary::from_report(&a.min_report),
        shadow_enumeration: EnumSummary::merged(&a.shadow_reports),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timing_ms,
    })
}

/// Certify a single lattice end to end.
pub fn certify_lattice(
    lattice: &ScaledLattice,
    identity: &str,
) -> Result<Certificate, CertifyError> {
    certify_lattice_with(lattice, identity, &NullCheckpoint)
}

pub fn certify_lattice_with(
    lattice: &ScaledLattice,
    identity: &str,
    sink: &dyn CheckpointSink,
) -> Result<Certificate, CertifyError> {
    let t0 = std::time::Instant::now();
    let a = analyze_lattice_with(lattice, sink)?;
    certificate_from_analysis(&a, identity, t0.elapsed().as_millis() as u64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub schema: u32,
    pub certificates: Vec<Certificate>,
    /// Symmetric boolean matrix; entry (i, j) = lattices i and j isometric.
    pub isometry_matrix: Vec<Vec<bool>>,
    pub pairwise_nonisometric: bool,
    pub automorphism_orders: Vec<u64>,
    /// Theorem 1's conclusion: three s-extremal optimal unimodular
    /// lattices, pairwise nonisometric.
    pub theorem1: bool,
}

impl CertificateBundle {
    pub fn canonical_sha256(&self) -> String {
        let mut c = self.clone();
        for cert in &mut c.certificates {
            cert.timing_ms = 0;
        }
        let bytes = serde_json::to_vec(&c).expect("bundle serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// The full Theorem 1 pipeline: code checks, Construction A, certification
/// of the lattice and both unimodular neighbors, pairwise isometry tests,
/// and automorphism group orders.
pub fn certify_theorem1(spec: &FourNegacirculantSpec) -> Result<CertificateBundle, CertifyError> {
    certify_theorem1_with(spec, &NullCheckpoint)
}

/// [`certify_theorem1`] with resumable enumeration stages.
pub fn certify_theorem1_with(
    spec: &FourNegacirculantSpec,
    sink: &dyn CheckpointSink,
) -> Result<CertificateBundle, CertifyError> {
    let gen = gf5::four_negacirculant_generator(spec).map_err(|e| CertifyError::Stage {
        stage: "code-build",
        detail: e.to_string(),
    })?;
    let algebraic = gf5::self_dual_condition(spec).map_err(|e| CertifyError::Stage {
        stage: "self-dual-condition",
        detail: e.to_string(),
    })?;
    if !algebraic {
        return Err(CertifyError::Stage {
            stage: "self-dual-condition",
            detail: "A A^T + B B^T != -I over GF(5)".into(),
        });
    }
    match gf5::is_self_dual(&gen) {
        Ok(true) => {}
        Ok(false) => {
            return Err(CertifyError::Stage {
                stage: "self-duality",
                detail: "generator matrix is not self-dual".into(),
            })
        }
        Err(e) => {
            return Err(CertifyError::Stage {
                stage: "self-duality",
                detail: e.to_string(),
            })
        }
    }
    let lattice = construction_a(&gen)?;
    let (n1, n2) = lattice.neighbors()?;

    let mut analyses = Vec::with_capacity(3);
    let mut certificates = Vec::with_capacity(3);
    for (l, name) in [
        (&lattice, "A5(C)"),
        (&n1, "N1(A5(C))"),
        (&n2, "N2(A5(C))"),
    ] {
        let t0 = std::time::Instant::now();
        let a = analyze_lattice_with(l, sink)?;
        let cert = certificate_from_analysis(&a, name, t0.elapsed().as_millis() as u64)?;
        if !(cert.s_extremal && cert.optimal == Some(true)) {
            return Err(CertifyError::Stage {
                stage: "s-extremal-optimal",
                detail: format!("{name} failed: {cert:?}"),
            });
        }
        analyses.push(a);
        certificates.push(cert);
    }

    // pairwise isometry and automorphism orders, reusing minimal vectors
    let mut systems = Vec::with_capacity(3);
    for a in &analyses {
        systems.push(isometry::system_from_min_report(
            &a.lattice,
            &a.min_norm,
            a.min_report.clone(),
        )?);
    }
    let mut isometry_matrix = vec![vec![false; 3]; 3];
    for i in 0..3 {
        isometry_matrix[i][i] = true;
        for j in i + 1..3 {
            let iso = isometry::is_isometric_systems(&systems[i], &systems[j])?.is_some();
            isometry_matrix[i][j] = iso;
            isometry_matrix[j][i] = iso;
        }
    }
    let pairwise_nonisometric =
        !isometry_matrix[0][1] && !isometry_matrix[0][2] && !isometry_matrix[1][2];
    let mut automorphism_orders = Vec::with_capacity(3);
    for s in &systems {
        automorphism_orders.push(isometry::automorphism_order_system(s)?);
    }
    let theorem1 = pairwise_nonisometric
        && certificates
            .iter()
            .all(|c| c.s_extremal && c.optimal == Some(true));
    Ok(CertificateBundle {
        schema: 1,
        certificates,
        isometry_matrix,
        pairwise_nonisometric,
        automorphism_orders,
        theorem1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rat2(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gaborit_paper_values() {
        let (lhs, rhs, s) = gaborit_check(&rat(5), &rat(5), 52).unwrap();
        assert_eq!(lhs, rat(60));
        assert_eq!(rhs, rat(60));
        assert!(s);
    }

    #[test]
    fn gaborit_zn_is_s_extremal() {
        for n in [4usize, 8, 12, 52] {
            let (lhs, rhs, s) = gaborit_check(&rat(1), &rat2(n as i64, 4), n).unwrap();
            assert_eq!(lhs, rat(8 + n as i64));
            assert_eq!(rhs, rat(8 + n as i64));
            assert!(s);
        }
    }

    #[test]
    fn gaborit_strict_inequality() {
        let (lhs, rhs, s) = gaborit_check(&rat(4), &rat(2), 52).unwrap();
        assert_eq!(lhs, rat(40));
        assert_eq!(rhs, rat(60));
        assert!(!s);
    }

    #[test]
    fn gaborit_exception_case_refused() {
        assert!(matches!(
            gaborit_check(&rat(3), &rat(1), 23),
            Err(CertifyError::ExceptionCase)
        ));
    }

    #[test]
    fn gaborit_violation_is_hard_error() {
        assert!(matches!(
            gaborit_check(&rat(10), &rat(10), 4),
            Err(CertifyError::BoundViolation { .. })
        ));
    }

    #[test]
    fn z4_certificate() {
        let l = ScaledLattice::zn(4);
        let c = certify_lattice(&l, "Z^4").unwrap();
        assert_eq!(c.min_norm, "1");
        assert_eq!(c.kissing, 8);
        assert_eq!(c.shadow_min, "1");
        assert!(c.s_extremal);
        assert_eq!(c.optimal, None);
        assert!(c.unimodular);
        assert!(c.odd);
        assert_eq!(c.enumeration.counts.get("1"), Some(&8));
        // shadow has 2^4 = 16 minimal vectors
        assert_eq!(c.shadow_enumeration.counts.get("1"), Some(&16));
    }

    #[test]
    fn canonical_hash_ignores_timing() {
        let l = ScaledLattice::zn(4);
        let mut c1 = certify_lattice(&l, "Z^4").unwrap();
        let mut c2 = c1.clone();
        c1.timing_ms = 1;
        c2.timing_ms = 99999;
        assert_eq!(c1.canonical_sha256(), c2.canonical_sha256());
        c2.kissing = 9;
        assert_ne!(c1.canonical_sha256(), c2.canonical_sha256());
    }

    #[test]
    fn kissing_criterion_refuses_wrong_dimension() {
        let l = ScaledLattice::zn(4);
        assert!(matches!(
            kissing_criterion_52(&l),
            Err(CertifyError::WrongInput { .. })
        ));
    }

    #[test]
    fn theorem1_rejects_non_self_dual_code() {
        let spec = FourNegacirculantSpec {
            m: 1,
            a: vec![1],
            b: vec![1],
        };
        let err = certify_theorem1(&spec).unwrap_err();
        match err {
            CertifyError::Stage { stage, .. } => {
                assert!(stage == "self-dual-condition" || stage == "self-duality")
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn optimal_rule_table() {
        assert_eq!(optimal_min_norm(52), Some(rat(5)));
        assert_eq!(optimal_min_norm(54), Some(rat(5)));
        assert_eq!(optimal_min_norm(24), None);
    }
}
