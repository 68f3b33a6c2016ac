use std::fmt;

use serde::{Deserialize, Serialize};

use super::BafError;

/// How "infinitely many" and "for every index" are cut down to finite size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationParams {
    /// Copies kept of each repeated child.
    pub w: u32,
    /// Largest index kept in the children of a limit-level helper tree.
    pub limit_index_cap: u32,
    /// Largest finite rank that may be built.
    pub rank_cap: u32,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams { w: 3, limit_index_cap: 4, rank_cap: 4 }
    }
}

impl TruncationParams {
    pub fn new(w: u32, limit_index_cap: u32, rank_cap: u32) -> Result<Self, BafError> {
        let t = TruncationParams { w, limit_index_cap, rank_cap };
        t.validate()?;
        Ok(t)
    }

    pub fn with_width(w: u32) -> Self {
        TruncationParams { w, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), BafError> {
        for (name, v) in [("w", self.w), ("limit_index_cap", self.limit_index_cap), ("rank_cap", self.rank_cap)] {
            if v == 0 {
                return Err(BafError::InvalidParams(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

/// Index of a limit-level helper tree: a finite `k` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitIndex {
    Finite(u32),
    Infinity,
}

impl fmt::Display for LimitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitIndex::Finite(k) => write!(f, "{k}"),
            LimitIndex::Infinity => f.write_str("∞"),
        }
    }
}

/// The two halves of a back-and-forth pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    A,
    E,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::A => "A",
            Kind::E => "E",
        })
    }
}

/// Which tree to build. The limit level is ω with fundamental sequence
/// `β_i = i + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    A(u32),
    E(u32),
    /// `L(ω, k)`: children `A(1) .. A(k+1)` then `E(k+2) ..`.
    L(LimitIndex),
    AOmegaPlusOne,
    EOmegaPlusOne,
}

impl TreeKind {
    pub fn finite(kind: Kind, n: u32) -> Self {
        match kind {
            Kind::A => TreeKind::A(n),
            Kind::E => TreeKind::E(n),
        }
    }

    /// Rank of a finite-rank kind.
    pub fn rank(&self) -> Option<u32> {
        match *self {
            TreeKind::A(n) | TreeKind::E(n) => Some(n),
            _ => None,
        }
    }

    pub fn half(&self) -> Option<Kind> {
        match self {
            TreeKind::A(_) | TreeKind::AOmegaPlusOne => Some(Kind::A),
            TreeKind::E(_) | TreeKind::EOmegaPlusOne => Some(Kind::E),
            TreeKind::L(_) => None,
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeKind::A(n) => write!(f, "A({n})"),
            TreeKind::E(n) => write!(f, "E({n})"),
            TreeKind::L(k) => write!(f, "L(ω,{k})"),
            TreeKind::AOmegaPlusOne => f.write_str("A(ω+1)"),
            TreeKind::EOmegaPlusOne => f.write_str("E(ω+1)"),
        }
    }
}

/// Fundamental sequence for ω used throughout: `β_i = i + 1`.
pub fn fundamental(i: u32) -> u32 {
    i + 1
}

pub const FUNDAMENTAL_SEQUENCE: &str = "beta_i = i + 1";
