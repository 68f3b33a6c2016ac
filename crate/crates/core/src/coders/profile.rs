use serde::Serialize;

use super::{box_tree, BoxPair, CoderError};
use crate::baf::{Kind, RankOracle};
use crate::model::{Element, FiniteStructure};

/// Per-sort threshold data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SortProfile {
    pub n: u32,
    pub f: u32,
    /// `β_j` for `j < f`: least level carrying an E-box in both the left box
    /// row `j + 1` and the right box row `j`. These are also the `m_i`.
    pub thresholds: Vec<u32>,
    /// Right spine indices `j ≥ f` checked to be all-A, together with the
    /// left rows `j + 1` and row 0.
    pub all_a_tail: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdProfile {
    pub sorts: Vec<SortProfile>,
    /// Boxes classified along the way.
    pub classify_calls: usize,
}

fn row(oracle: &RankOracle, s: &FiniteStructure, owner: Element, levels: u32) -> Result<Vec<Kind>, CoderError> {
    (1..=levels)
        .map(|m| Ok(oracle.classify(&box_tree(s, owner, m)?.0, m)?))
        .collect()
}

/// Classifies every box and checks the threshold split: for `j < f(n)` the
/// left row `j + 1` and the right row `j` agree and are A strictly below one
/// level and E from it on; for `j ≥ f(n)` they are all A, as is left row 0.
/// Also checks that the thresholds never decrease.
pub fn threshold_profile(pair: &BoxPair) -> Result<ThresholdProfile, CoderError> {
    const CLAIM: &str = "threshold split";
    let oracle = RankOracle::new();
    let levels = pair.caps.levels;
    let mut sorts = Vec::new();
    for n in 0..pair.sorts() {
        let f = pair.limit(n);
        let spine = &pair.spine[n as usize];
        let left: Vec<Vec<Kind>> = spine.iter().map(|&a| row(&oracle, &pair.m, a, levels)).collect::<Result<_, _>>()?;
        let right: Vec<Vec<Kind>> = spine.iter().map(|&b| row(&oracle, &pair.n, b, levels)).collect::<Result<_, _>>()?;
        for (i, (l, r)) in left.iter().zip(&right).enumerate() {
            if *l != pair.kinds_m[n as usize][i] || *r != pair.kinds_n[n as usize][i] {
                return Err(CoderError::ClaimViolated {
                    claim: "box construction",
                    detail: format!("sort {n}, spine {i}: classified boxes differ from the intended kinds"),
                });
            }
        }
        if left[0].contains(&Kind::E) {
            return Err(CoderError::ClaimViolated { claim: CLAIM, detail: format!("sort {n}: left row 0 has an E-box") });
        }
        let mut thresholds = Vec::new();
        let mut all_a_tail = Vec::new();
        for j in 0..spine.len() - 1 {
            let (l, r) = (&left[j + 1], &right[j]);
            if l != r {
                return Err(CoderError::ClaimViolated {
                    claim: CLAIM,
                    detail: format!("sort {n}: left row {} and right row {j} differ", j + 1),
                });
            }
            let first_e = r.iter().position(|&k| k == Kind::E);
            if (j as u32) < f {
                let beta = first_e.ok_or_else(|| CoderError::ClaimViolated {
                    claim: CLAIM,
                    detail: format!("sort {n}: row {j} below f = {f} has no E-box"),
                })?;
                if r[beta..].contains(&Kind::A) {
                    return Err(CoderError::ClaimViolated {
                        claim: CLAIM,
                        detail: format!("sort {n}: row {j} returns to A above level {}", beta + 1),
                    });
                }
                thresholds.push(beta as u32 + 1);
            } else {
                if first_e.is_some() {
                    return Err(CoderError::ClaimViolated {
                        claim: CLAIM,
                        detail: format!("sort {n}: row {j} at or above f = {f} has an E-box"),
                    });
                }
                all_a_tail.push(j as u32);
            }
        }
        if let Some(w) = thresholds.windows(2).position(|w| w[0] > w[1]) {
            return Err(CoderError::ClaimViolated {
                claim: "nondecreasing thresholds",
                detail: format!("sort {n}: m_{w} = {} > m_{} = {}", thresholds[w], w + 1, thresholds[w + 1]),
            });
        }
        for (j, &beta) in thresholds.iter().enumerate() {
            let expected = (1..=levels).find(|&m| pair.approx.reaches(n, m, j as u32 + 1));
            if expected != Some(beta) {
                return Err(CoderError::ClaimViolated {
                    claim: CLAIM,
                    detail: format!("sort {n}: threshold {beta} of row {j} disagrees with the approximation"),
                });
            }
        }
        sorts.push(SortProfile { n, f, thresholds, all_a_tail });
    }
    Ok(ThresholdProfile { sorts, classify_calls: oracle.calls() })
}
