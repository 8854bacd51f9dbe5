//! Reproducible randomized search over four-negacirculant self-dual codes
//! whose Construction-A lattices have minimum norm 5.
//!
//! Candidates are drawn uniformly from F5^m x F5^m with a seeded ChaCha
//! stream, so an identical config yields an identical candidate stream.
//! Filtering is staged cheap-to-expensive: the algebraic self-duality
//! condition, then an early-abort short-vector check below norm 5, then
//! full certification. A stage-2 rejection always carries an exactly
//! re-verified witness vector, so no candidate is lost to a false alarm.

use crate::certify::{self, Certificate};
use crate::enumeration;
use crate::gf5::{self, FourNegacirculantSpec};
use crate::lattice::construction_a;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("code error: {0}")]
    Code(#[from] gf5::CodeError),
    #[error("lattice error: {0}")]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error("enumeration failed: {0}")]
    Enumeration(#[from] enumeration::EnumError),
    #[error("certification failed: {0}")]
    Certify(#[from] certify::CertifyError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub m: usize,
    pub seed: u64,
    pub max_candidates: u64,
    /// Stop stage 3 after this many certified survivors (0 = no limit).
    pub stop_after: u64,
    /// Pinned candidates evaluated before any random ones.
    #[serde(default)]
    pub pinned: Vec<FourNegacirculantSpec>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            m: 13,
            seed: 0,
            max_candidates: 100,
            stop_after: 1,
            pinned: Vec::new(),
        }
    }
}

/// How far a candidate made it through the filter pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageOutcome {
    /// A A^T + B B^T != -I over GF(5).
    Stage1Fail,
    /// A nonzero vector of norm < 5 exists; the exact witness norm is kept.
    Stage2Fail { witness_norm: String },
    /// Full certification failed (with the failing stage's message).
    Stage3Fail { detail: String },
    /// Certified: s-extremal optimal.
    Stage3Pass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchRecord {
    pub index: u64,
    pub spec: FourNegacirculantSpec,
    pub outcome: StageOutcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
}

fn random_spec(rng: &mut ChaCha20Rng, m: usize) -> FourNegacirculantSpec {
    let a = (0..m).map(|_| rng.gen_range(0..5u8)).collect();
    let b = (0..m).map(|_| rng.gen_range(0..5u8)).collect();
    FourNegacirculantSpec { m, a, b }
}

fn evaluate(spec: &FourNegacirculantSpec) -> Result<(StageOutcome, Option<Certificate>), SearchError> {
    // stage 1: algebraic self-duality
    if !gf5::self_dual_condition(spec)? {
        return Ok((StageOutcome::Stage1Fail, None));
    }
    // stage 2: early-abort short-vector check below norm 5
    let gen = gf5::four_negacirculant_generator(spec)?;
    let lattice = construction_a(&gen)?;
    let five = BigRational::from_integer(BigInt::from(5));
    if let Some(w) = enumeration::has_vector_below_witness(&lattice, &five)? {
        let raw: i128 = w.num.iter().map(|&a| (a as i128) * (a as i128)).sum();
        let norm = BigRational::new(
            BigInt::from(raw),
            BigInt::from(w.den) * BigInt::from(w.den) * BigInt::from(lattice.scale),
        );
        let norm_str = if norm.is_integer() {
            norm.to_integer().to_string()
        } else {
            format!("{}/{}", norm.numer(), norm.denom())
        };
        return Ok((StageOutcome::Stage2Fail { witness_norm: norm_str }, None));
    }
    // stage 3: full certification
    match certify::certify_lattice(&lattice, "search candidate") {
        Ok(cert) => {
            if cert.s_extremal && cert.optimal == Some(true) {
                Ok((StageOutcome::Stage3Pass, Some(cert)))
            } else {
                Ok((
                    StageOutcome::Stage3Fail {
                        detail: format!(
                            "s_extremal = {}, optimal = {:?}",
                            cert.s_extremal, cert.optimal
                        ),
                    },
                    None,
                ))
            }
        }
        Err(e) => Ok((
            StageOutcome::Stage3Fail {
                detail: e.to_string(),
            },
            None,
        )),
    }
}

/// Run the staged search; records are emitted in candidate order through
/// the callback (NDJSON writing lives in the CLI).
pub fn run_search(
    config: &SearchConfig,
    mut emit: impl FnMut(&SearchRecord),
) -> Result<Vec<SearchRecord>, SearchError> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();
    let mut passes = 0u64;
    for index in 0..config.max_candidates {
        let spec = match config.pinned.get(index as usize) {
            Some(p) => p.clone(),
            None => random_spec(&mut rng, config.m),
        };
        let (outcome, certificate) = evaluate(&spec)?;
        if outcome == StageOutcome::Stage3Pass {
            passes += 1;
        }
        let record = SearchRecord {
            index,
            spec,
            outcome,
            certificate,
        };
        emit(&record);
        records.push(record);
        if config.stop_after > 0 && passes >= config.stop_after {
            break;
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStatistics {
    pub total: u64,
    pub stage1_fail: u64,
    pub stage2_fail: u64,
    pub stage3_fail: u64,
    pub stage3_pass: u64,
}

pub fn stage_statistics(records: &[SearchRecord]) -> StageStatistics {
    let mut s = StageStatistics::default();
    for r in records {
        s.total += 1;
        match &r.outcome {
            StageOutcome::Stage1Fail => s.stage1_fail += 1,
            StageOutcome::Stage2Fail { .. } => s.stage2_fail += 1,
            StageOutcome::Stage3Fail { .. } => s.stage3_fail += 1,
            StageOutcome::Stage3Pass => s.stage3_pass += 1,
        }
    }
    s
}
