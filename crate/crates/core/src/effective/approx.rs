use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CeSetSpec, EffectiveError, Modulus};

/// One approximation step: the value and the least oracle level it reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub value: u32,
    pub level: u32,
}

/// `Φ(n, s)` for `n < index_cap`, `s ≤ horizon`, nondecreasing in `s`. At
/// oracle level `m` the step converges exactly when `level ≤ m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneApprox {
    pub index_cap: u32,
    pub horizon: u32,
    pub level_cap: u32,
    /// `table[n][s]`
    pub table: Vec<Vec<Cell>>,
}

impl MonotoneApprox {
    pub fn validate(&self) -> Result<(), EffectiveError> {
        if self.table.len() != self.index_cap as usize {
            return Err(EffectiveError::Invalid(format!(
                "table has {} rows, index_cap is {}",
                self.table.len(),
                self.index_cap
            )));
        }
        for (n, row) in self.table.iter().enumerate() {
            if row.len() != self.horizon as usize + 1 {
                return Err(EffectiveError::Invalid(format!(
                    "row {n} has {} stages, horizon {} needs {}",
                    row.len(),
                    self.horizon,
                    self.horizon + 1
                )));
            }
            for (s, c) in row.iter().enumerate() {
                if c.level > self.level_cap {
                    return Err(EffectiveError::Invalid(format!(
                        "level {} at ({n},{s}) exceeds level_cap {}",
                        c.level, self.level_cap
                    )));
                }
                if s > 0 && c.value < row[s - 1].value {
                    return Err(EffectiveError::Invalid(format!("value decreases at ({n},{s})")));
                }
            }
        }
        Ok(())
    }

    pub fn cell(&self, n: u32, s: u32) -> Cell {
        self.table[n as usize][s as usize]
    }

    /// `F(n)`, the value at the horizon.
    pub fn limit(&self, n: u32) -> u32 {
        self.table[n as usize][self.horizon as usize].value
    }

    pub fn limits(&self) -> Modulus {
        Modulus { values: (0..self.index_cap).map(|n| self.limit(n)).collect() }
    }

    pub fn max_limit(&self) -> u32 {
        (0..self.index_cap).map(|n| self.limit(n)).max().unwrap_or(0)
    }

    /// Does some stage converge at level `m` with value at least `i`?
    pub fn reaches(&self, n: u32, m: u32, i: u32) -> bool {
        (0..=self.horizon).any(|s| phi_at_level(self, n, s, m).is_some_and(|v| v >= i))
    }

    /// Least level `m ≤ level_cap` at which some stage reaches `i`.
    pub fn least_level_reaching(&self, n: u32, i: u32) -> Option<u32> {
        (0..=self.level_cap).find(|&m| self.reaches(n, m, i))
    }

    /// Constant-zero approximation.
    pub fn zero(index_cap: u32, horizon: u32, level_cap: u32) -> Self {
        MonotoneApprox {
            index_cap,
            horizon,
            level_cap,
            table: vec![vec![Cell { value: 0, level: 0 }; horizon as usize + 1]; index_cap as usize],
        }
    }
}

/// `Φ(n, s)` as seen with oracle level `m`: the value if its level is at most
/// `m`, otherwise divergent.
pub fn phi_at_level(a: &MonotoneApprox, n: u32, s: u32, m: u32) -> Option<u32> {
    let c = a.cell(n, s);
    (c.level <= m).then_some(c.value)
}

/// How use levels are assigned when approximating a self-modulus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LevelPolicy {
    /// Level `n mod (level_cap + 1)` for every stage of sort `n`.
    ByIndex,
    /// Independent draws in `0..=level_cap` per `(n, s)`.
    Seeded(u64),
    /// Explicit level per sort; missing sorts get 0.
    PerSort(BTreeMap<u32, u32>),
}

/// The canonical approximation of the self-modulus of `d`: 0 until `n`
/// enters, then its entry stage.
pub fn monotone_from_ce(d: &CeSetSpec, policy: &LevelPolicy, level_cap: u32) -> Result<MonotoneApprox, EffectiveError> {
    d.validate()?;
    let mut rng = match policy {
        LevelPolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut table = Vec::with_capacity(d.index_cap as usize);
    for n in 0..d.index_cap {
        let mut row = Vec::with_capacity(d.horizon as usize + 1);
        for s in 0..=d.horizon {
            let value = if d.at_stage(n, s) { d.entry_stage(n).expect("member") } else { 0 };
            let level = match policy {
                LevelPolicy::ByIndex => n % (level_cap + 1),
                LevelPolicy::Seeded(_) => rng.as_mut().expect("seeded").gen_range(0..=level_cap),
                LevelPolicy::PerSort(map) => map.get(&n).copied().unwrap_or(0),
            };
            row.push(Cell { value, level });
        }
        table.push(row);
    }
    let a = MonotoneApprox { index_cap: d.index_cap, horizon: d.horizon, level_cap, table };
    a.validate()?;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::self_modulus;

    #[test]
    fn empty_set_is_constant_zero() {
        let a = monotone_from_ce(&CeSetSpec::empty(4, 3), &LevelPolicy::ByIndex, 2).unwrap();
        assert!(a.table.iter().flatten().all(|c| c.value == 0));
        assert_eq!(a.table[0][0], Cell { value: 0, level: 0 });
    }

    #[test]
    fn single_entry_row() {
        let d = CeSetSpec::new([(3, 5)], 7, 4).unwrap();
        let a = monotone_from_ce(&d, &LevelPolicy::Seeded(1), 4).unwrap();
        let row: Vec<u32> = a.table[3].iter().map(|c| c.value).collect();
        assert_eq!(row, vec![0, 0, 0, 0, 0, 5, 5, 5]);
        assert_eq!(a.limits(), self_modulus(&d));
    }

    #[test]
    fn levels_gate_convergence() {
        let mut a = MonotoneApprox::zero(1, 0, 4);
        a.table[0][0] = Cell { value: 3, level: 2 };
        assert_eq!(phi_at_level(&a, 0, 0, 1), None);
        assert_eq!(phi_at_level(&a, 0, 0, 2), Some(3));
        assert_eq!(phi_at_level(&a, 0, 0, 3), Some(3));
        assert_eq!(phi_at_level(&a, 0, 0, 4), Some(3));
        assert_eq!(a.least_level_reaching(0, 1), Some(2));
    }

    #[test]
    fn decreasing_table_is_rejected() {
        let mut a = MonotoneApprox::zero(1, 1, 1);
        a.table[0][0].value = 2;
        assert!(a.validate().is_err());
    }
}
