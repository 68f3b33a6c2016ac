use serde::{Deserialize, Serialize};

use super::CliError;
use crate::coders::{BoxCaps, PipelineCaps, SOmegaCaps, WarmupCaps};
use crate::effective::{monotone_from_ce, self_modulus, CeSetSpec, LevelPolicy, Modulus, MonotoneApprox};
use crate::model::{brute_cap, BRUTE_CAP_ENV};

/// Truncation and search caps shared by every suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    /// Copies per "infinitely many", in box trees and in the E-tree union.
    pub w: u32,
    /// Children kept in a limit-level helper tree.
    #[serde(rename = "I")]
    pub limit_index_cap: u32,
    /// Box levels `1..=M`, and the level cap of derived approximations.
    #[serde(rename = "M")]
    pub levels: u32,
    /// Ranks of the E-tree union, and of the trees in the logic suite.
    #[serde(rename = "N_max")]
    pub n_max: u32,
    /// Stage horizon: no entry stage may exceed it.
    #[serde(rename = "H")]
    pub horizon: u32,
    /// Spine length per sort; `null` gives `f(n) + 3`.
    #[serde(rename = "I_max", deserialize_with = "Option::deserialize")]
    pub i_max: Option<u32>,
    /// Largest combined size for exhaustive enumeration.
    pub brute_cap: usize,
}

/// Input of the box suites: either a table or a set to derive one from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoxesInput {
    Approx(MonotoneApprox),
    Ce(CeSetSpec),
}

/// A scenario document. Exactly one of `warmup`, `boxes`, `composite`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub caps: Caps,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<CeSetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<BoxesInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<CeSetSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Warmup,
    Boxes,
    Composite,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid { field: field.to_string(), message: msg.to_string() }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn kind(&self) -> ScenarioKind {
        match (&self.warmup, &self.boxes) {
            (Some(_), _) => ScenarioKind::Warmup,
            (None, Some(_)) => ScenarioKind::Boxes,
            _ => ScenarioKind::Composite,
        }
    }

    /// Field that holds the input, for messages.
    fn field(&self) -> &'static str {
        match self.kind() {
            ScenarioKind::Warmup => "warmup",
            ScenarioKind::Boxes => "boxes",
            ScenarioKind::Composite => "composite",
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let given = [self.warmup.is_some(), self.boxes.is_some(), self.composite.is_some()];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(invalid("warmup|boxes|composite", "exactly one input must be given"));
        }
        let c = &self.caps;
        for (field, v) in [("caps.w", c.w), ("caps.I", c.limit_index_cap), ("caps.M", c.levels), ("caps.N_max", c.n_max)] {
            if v == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        if c.brute_cap == 0 {
            return Err(invalid("caps.brute_cap", "must be at least 1"));
        }
        if let Some(d) = self.spec() {
            let field = self.field();
            d.validate().map_err(|e| invalid(field, e))?;
            if let Some((&n, &s)) = d.entries.iter().find(|(_, &s)| s > c.horizon) {
                return Err(invalid("caps.H", format!("H = {} is below the entry stage {s} of {n} in {field}", c.horizon)));
            }
            if d.horizon > c.horizon {
                return Err(invalid("caps.H", format!("H = {} is below the horizon {} of {field}", c.horizon, d.horizon)));
            }
        }
        if let Some(BoxesInput::Approx(a)) = &self.boxes {
            a.validate().map_err(|e| invalid("boxes.approx", e))?;
            if a.level_cap > c.levels {
                return Err(invalid("caps.M", format!("M = {} is below the level cap {} of boxes.approx", c.levels, a.level_cap)));
            }
            if a.horizon > c.horizon {
                return Err(invalid("caps.H", format!("H = {} is below the horizon {} of boxes.approx", c.horizon, a.horizon)));
            }
        }
        if let Some(i_max) = c.i_max {
            let f = self.limits();
            if let Some(n) = (0..f.len() as u32).find(|&n| f.get(n) >= i_max) {
                return Err(invalid(
                    "caps.I_max",
                    format!("I_max = {i_max} does not exceed the limit {} of sort {n}; the spine would hide the all-A tail", f.get(n)),
                ));
            }
        }
        Ok(())
    }

    /// The c.e. set behind the scenario, when there is one.
    pub fn spec(&self) -> Option<&CeSetSpec> {
        match (&self.warmup, &self.boxes, &self.composite) {
            (Some(d), _, _) | (_, Some(BoxesInput::Ce(d)), _) | (_, _, Some(d)) => Some(d),
            _ => None,
        }
    }

    /// The approximation the box suites run on.
    pub fn approx(&self) -> Result<MonotoneApprox, CliError> {
        match (&self.boxes, self.spec()) {
            (Some(BoxesInput::Approx(a)), _) => Ok(a.clone()),
            (_, Some(d)) => monotone_from_ce(d, &LevelPolicy::Seeded(self.seed), self.caps.levels).map_err(|e| invalid(self.field(), e)),
            (_, None) => unreachable!("validated scenarios carry an input"),
        }
    }

    fn limits(&self) -> Modulus {
        match (&self.boxes, self.spec()) {
            (Some(BoxesInput::Approx(a)), _) => a.limits(),
            (_, Some(d)) => self_modulus(d),
            (_, None) => Modulus { values: Vec::new() },
        }
    }

    pub fn box_caps(&self) -> BoxCaps {
        BoxCaps { w: self.caps.w, levels: self.caps.levels, i_max: self.caps.i_max }
    }

    pub fn s_omega_caps(&self) -> SOmegaCaps {
        SOmegaCaps { n_max: self.caps.n_max, w: self.caps.w }
    }

    pub fn pipeline_caps(&self) -> PipelineCaps {
        PipelineCaps { boxes: self.box_caps(), s_omega: self.s_omega_caps() }
    }

    /// Two elements past the stage horizon, so every `b_s` exists.
    pub fn warmup_caps(&self) -> WarmupCaps {
        WarmupCaps { per_sort: self.caps.horizon + 2 }
    }

    /// The scenario's cap unless the environment overrides it.
    pub fn brute_cap(&self) -> usize {
        match std::env::var(BRUTE_CAP_ENV) {
            Ok(_) => brute_cap(),
            Err(_) => self.caps.brute_cap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "name": "t", "seed": 3,
        "caps": {"w": 2, "I": 4, "M": 3, "N_max": 2, "H": 8, "I_max": null, "brute_cap": 14},
        "warmup": {"entries": {"5": 7}, "horizon": 8, "index_cap": 6}
    }"#;

    #[test]
    fn parses_and_validates() {
        let s = Scenario::parse(GOOD).unwrap();
        assert_eq!(s.kind(), ScenarioKind::Warmup);
        assert_eq!(s.spec().unwrap().entry_stage(5), Some(7));
        assert_eq!(s.warmup_caps().per_sort, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = GOOD.replace("\"brute_cap\"", "\"brute_cpa\"");
        assert!(matches!(Scenario::parse(&text), Err(CliError::Parse(m)) if m.contains("brute_cpa")));
    }

    #[test]
    fn missing_i_max_is_rejected() {
        let text = GOOD.replace("\"I_max\": null, ", "");
        assert!(matches!(Scenario::parse(&text), Err(CliError::Parse(m)) if m.contains("I_max")));
    }

    #[test]
    fn horizon_below_entry_names_h() {
        let text = GOOD.replace("\"H\": 8", "\"H\": 4");
        match Scenario::parse(&text) {
            Err(CliError::Invalid { field, message }) => {
                assert_eq!(field, "caps.H");
                assert!(message.contains("entry stage 7"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spine_cap_must_exceed_limits() {
        let text = GOOD.replace("\"I_max\": null", "\"I_max\": 7");
        assert!(matches!(Scenario::parse(&text), Err(CliError::Invalid { field, .. }) if field == "caps.I_max"));
        let text = GOOD.replace("\"I_max\": null", "\"I_max\": 9");
        assert!(Scenario::parse(&text).is_ok());
    }

    #[test]
    fn two_inputs_are_rejected() {
        let text = GOOD.replace(
            "\"warmup\"",
            "\"composite\": {\"entries\": {}, \"horizon\": 1, \"index_cap\": 1}, \"warmup\"",
        );
        assert!(matches!(Scenario::parse(&text), Err(CliError::Invalid { .. })));
    }

    #[test]
    fn approx_input_checks_levels() {
        let text = r#"{
            "name": "a", "seed": 0,
            "caps": {"w": 1, "I": 4, "M": 1, "N_max": 1, "H": 2, "I_max": null, "brute_cap": 14},
            "boxes": {"approx": {"index_cap": 1, "horizon": 1, "level_cap": 2,
                      "table": [[{"value": 0, "level": 0}, {"value": 1, "level": 2}]]}}
        }"#;
        assert!(matches!(Scenario::parse(text), Err(CliError::Invalid { field, .. }) if field == "caps.M"));
    }
}
