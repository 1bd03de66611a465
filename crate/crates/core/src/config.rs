//! Scenario configuration files and the bundled scenario library.

use serde::{Deserialize, Serialize};

use crate::dynamics::{CurrentModel, EdgeKey, RunSettings};
use crate::error::{Error, Result};
use crate::minkowski::{BoundaryStrategy, HitPair, LorentzFrame};
use crate::rules::{apply_reduction, ReductionEvent};
use crate::state::{
    build_objective_template, build_observed_template, CaptureSet, MeasurementMode, Superposition, TemplateOptions,
    DETECTORS,
};

fn default_strategy() -> BoundaryStrategy {
    BoundaryStrategy::HellwigKraus
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: MeasurementMode,
    #[serde(default)]
    pub allow_direct_fourth: bool,
    #[serde(default)]
    pub profiles: CurrentModel,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_strategy")]
    pub strategy: BoundaryStrategy,
    /// Frame velocities for invariance checks and Aharonov-Albert maps.
    #[serde(default)]
    pub frames: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub x_a: f64,
    pub x_b: f64,
    /// Detectors whose capture was already observed before the run starts.
    #[serde(default)]
    pub preceding_captures: Vec<usize>,
    /// Explicit hits for region maps, bypassing simulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hits: Option<HitPair>,
}

impl ScenarioConfig {
    /// Parse and validate. Parse errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return err(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return err(format!("t_end must be positive, got {}", self.t_end));
        }
        for &v in &self.frames {
            LorentzFrame::new(v).map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(self.x_a.is_finite() && self.x_b.is_finite()) || self.x_a == self.x_b {
            return err("detector positions x_a and x_b must be finite and distinct".into());
        }
        if self.allow_direct_fourth && self.mode == MeasurementMode::Observed {
            return err("allow_direct_fourth only applies to objective mode".into());
        }
        for (key, profile) in &self.profiles.profiles {
            profile.validate()?;
            if key.to.len() - key.from.len() > 1 && !self.allow_direct_fourth {
                return err(format!("edge {key} needs allow_direct_fourth"));
            }
        }
        let mut seen = CaptureSet::NONE;
        for &d in &self.preceding_captures {
            if d >= DETECTORS || seen.contains(d) {
                return err(format!("bad preceding capture {d}"));
            }
            seen = seen.with(d);
        }
        Ok(())
    }

    pub fn sites(&self) -> [f64; DETECTORS] {
        [self.x_a, self.x_b]
    }

    pub fn frames(&self) -> Vec<LorentzFrame> {
        self.frames.iter().filter_map(|&v| LorentzFrame::new(v).ok()).collect()
    }

    pub fn model(&self) -> &CurrentModel {
        &self.profiles
    }

    /// The starting superposition, with any preceding captures already
    /// reduced at t = 0.
    pub fn initial_state(&self) -> Result<Superposition> {
        let mut state = match self.mode {
            MeasurementMode::Observed => build_observed_template(self.sites()),
            MeasurementMode::Objective => build_objective_template(
                DETECTORS,
                &TemplateOptions {
                    allow_direct_fourth: self.allow_direct_fourth,
                    sites: self.sites(),
                },
            )?,
        };
        for &d in &self.preceding_captures {
            let target = state.settled.with(d);
            let idx = state
                .find(target)
                .ok_or_else(|| Error::Config(format!("capture {target} unreachable")))?;
            let ev = ReductionEvent::new(&state, idx, state.time, self.strategy)?;
            state = apply_reduction(&state, &ev)?;
        }
        Ok(state)
    }

    pub fn settings(&self, seed: u64) -> RunSettings {
        RunSettings {
            strategy: self.strategy,
            t_end: self.t_end,
            dt: self.dt,
            seed,
            record_every: Some(1),
            stop_at_first_hit: false,
        }
    }

    /// Edges that can carry current from the initial state.
    pub fn race_edges(&self) -> Result<Vec<EdgeKey>> {
        let st = self.initial_state()?;
        Ok(st
            .edges
            .iter()
            .filter(|e| e.active)
            .map(|e| EdgeKey::new(st.components[e.from].captures(), st.components[e.to].captures()))
            .collect())
    }
}

/// Scenario files shipped with the crate, by file name.
pub mod scenarios {
    use super::ScenarioConfig;

    pub const ALL: &[(&str, &str)] = &[
        (
            "objective_branching.json",
            include_str!("../scenarios/objective_branching.json"),
        ),
        (
            "observed_sequential.json",
            include_str!("../scenarios/observed_sequential.json"),
        ),
        ("no_capture.json", include_str!("../scenarios/no_capture.json")),
        ("single_hit_a.json", include_str!("../scenarios/single_hit_a.json")),
        ("objective_dual.json", include_str!("../scenarios/objective_dual.json")),
        ("hk_two_hits.json", include_str!("../scenarios/hk_two_hits.json")),
        ("aa_event_x.json", include_str!("../scenarios/aa_event_x.json")),
        ("race_symmetric.json", include_str!("../scenarios/race_symmetric.json")),
        ("race_ratio.json", include_str!("../scenarios/race_ratio.json")),
        ("race_gaussian.json", include_str!("../scenarios/race_gaussian.json")),
        ("race_window.json", include_str!("../scenarios/race_window.json")),
        ("race_mixed.json", include_str!("../scenarios/race_mixed.json")),
    ];

    pub const RACES: &[&str] = &[
        "race_symmetric.json",
        "race_ratio.json",
        "race_gaussian.json",
        "race_window.json",
        "race_mixed.json",
    ];

    pub fn text(name: &str) -> Option<&'static str> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
    }

    /// Panics on unknown names; bundled files are validated by tests.
    pub fn load(name: &str) -> ScenarioConfig {
        let text = text(name).unwrap_or_else(|| panic!("no bundled scenario {name}"));
        ScenarioConfig::from_json(text).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}
