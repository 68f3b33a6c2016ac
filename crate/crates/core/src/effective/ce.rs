use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EffectiveError;

/// A finitely presented c.e. set: which numbers enter, and at which stage.
/// Nothing changes after `horizon`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeSetSpec {
    /// `n → s`: `n` enters at stage `s`.
    pub entries: BTreeMap<u32, u32>,
    pub horizon: u32,
    pub index_cap: u32,
}

impl CeSetSpec {
    pub fn new(entries: impl IntoIterator<Item = (u32, u32)>, horizon: u32, index_cap: u32) -> Result<Self, EffectiveError> {
        let d = CeSetSpec { entries: entries.into_iter().collect(), horizon, index_cap };
        d.validate()?;
        Ok(d)
    }

    pub fn empty(horizon: u32, index_cap: u32) -> Self {
        CeSetSpec { entries: BTreeMap::new(), horizon, index_cap }
    }

    pub fn validate(&self) -> Result<(), EffectiveError> {
        for (&n, &s) in &self.entries {
            if n >= self.index_cap {
                return Err(EffectiveError::Invalid(format!("entry {n} is not below index_cap {}", self.index_cap)));
            }
            if s > self.horizon {
                return Err(EffectiveError::Invalid(format!(
                    "entry {n} enters at stage {s}, after horizon {}",
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    /// `D_s(n)`.
    pub fn at_stage(&self, n: u32, s: u32) -> bool {
        self.entries.get(&n).is_some_and(|&e| e <= s)
    }

    /// `D(n)`.
    pub fn contains(&self, n: u32) -> bool {
        self.entries.contains_key(&n)
    }

    pub fn entry_stage(&self, n: u32) -> Option<u32> {
        self.entries.get(&n).copied()
    }

    /// Stage at which `n` enters, if it enters at exactly `s`.
    pub fn enters_at(&self, n: u32, s: u32) -> bool {
        self.entries.get(&n) == Some(&s)
    }

    pub fn members(&self) -> BTreeSet<u32> {
        self.entries.keys().copied().collect()
    }
}

impl fmt::Display for CeSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, s)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}@{s}")?;
        }
        write!(f, "}} H={} N={}", self.horizon, self.index_cap)
    }
}

/// A function `n → stage` on `n < len`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Modulus {
    pub values: Vec<u32>,
}

impl Modulus {
    pub fn get(&self, n: u32) -> u32 {
        self.values[n as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `f(n) = μs (D_s(n) = D(n))`: the entry stage for members, 0 otherwise.
pub fn self_modulus(d: &CeSetSpec) -> Modulus {
    Modulus { values: (0..d.index_cap).map(|n| d.entry_stage(n).unwrap_or(0)).collect() }
}

/// First index where `g` falls below `f`, if any, scanning `n < upto`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Domination {
    pub holds: bool,
    pub first_violation: Option<u32>,
}

pub fn dominates(g: &[u32], f: &Modulus, upto: u32) -> Domination {
    let first_violation = (0..upto).find(|&n| g.get(n as usize).copied().unwrap_or(0) < f.get(n));
    Domination { holds: first_violation.is_none(), first_violation }
}

/// Recovers `D` from any `g` dominating its self-modulus: `n ∈ D` iff
/// `D_{g(n)}(n)`.
pub fn modulus_decode(g: &[u32], d: &CeSetSpec) -> Result<BTreeSet<u32>, EffectiveError> {
    if g.len() < d.index_cap as usize {
        return Err(EffectiveError::Invalid(format!("g has {} values, need {}", g.len(), d.index_cap)));
    }
    let f = self_modulus(d);
    if let Some(n) = dominates(g, &f, d.index_cap).first_violation {
        return Err(EffectiveError::NotDominating { n, g: g[n as usize], f: f.get(n) });
    }
    Ok((0..d.index_cap).filter(|&n| d.at_stage(n, g[n as usize])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_examples() {
        assert_eq!(self_modulus(&CeSetSpec::empty(5, 4)).values, vec![0; 4]);
        let d = CeSetSpec::new([(3, 5)], 6, 5).unwrap();
        assert_eq!(self_modulus(&d).values, vec![0, 0, 0, 5, 0]);
        let d = CeSetSpec::new([(0, 1), (1, 4)], 6, 3).unwrap();
        assert_eq!(self_modulus(&d).values, vec![1, 4, 0]);
    }

    #[test]
    fn decode_and_violation() {
        let d = CeSetSpec::new([(3, 5)], 8, 5).unwrap();
        let f = self_modulus(&d);
        assert_eq!(modulus_decode(&f.values, &d).unwrap(), BTreeSet::from([3]));
        assert_eq!(modulus_decode(&[8; 5], &d).unwrap(), BTreeSet::from([3]));
        let err = modulus_decode(&[0, 0, 0, 4, 0], &d).unwrap_err();
        assert_eq!(err, EffectiveError::NotDominating { n: 3, g: 4, f: 5 });
    }

    #[test]
    fn domination_witness() {
        let f = Modulus { values: vec![0, 4] };
        assert_eq!(dominates(&[5, 3], &f, 2), Domination { holds: false, first_violation: Some(1) });
        assert!(dominates(&[1, 5], &f, 2).holds);
    }

    #[test]
    fn validation_names_horizon() {
        let err = CeSetSpec::new([(1, 9)], 7, 4).unwrap_err();
        assert!(err.to_string().contains("horizon 7"));
    }
}
