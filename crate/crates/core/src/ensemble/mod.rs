//! Monte Carlo ensembles of seeded runs and the ensemble-only visibility of
//! probability shifts between spacelike detectors.

mod oracle;

pub use oracle::{selection_probability_oracle, OracleResult};

use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::dynamics::{run_scenario, CurrentModel, EdgeKey, Profile, RunSettings};
use crate::error::{Error, Result};
use crate::minkowski::{interval, Interval, SpacetimeEvent};
use crate::state::{total_modulus, MeasurementMode};

/// Key used for runs that end without any hit.
pub const NO_HIT: &str = "none";

/// Fewer runs than this per arm never support a conclusion.
pub const MIN_RUNS_FOR_VERDICT: usize = 100;

/// Three binomial standard errors.
pub fn three_sigma(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `i` in an ensemble.
pub fn run_seed(base_seed: u64, i: usize) -> u64 {
    mix(mix(base_seed) ^ i as u64)
}

/// First-hit outcome of one run: capture key and time.
type Outcome = Option<(String, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_runs: usize,
    /// First-hit counts by capture key, plus [`NO_HIT`].
    pub counts: BTreeMap<String, u64>,
    pub no_hit_count: u64,
    pub frequencies: BTreeMap<String, f64>,
    /// 3-sigma binomial radius of each frequency.
    pub sigma: BTreeMap<String, f64>,
    pub mean_hit_time: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResult>,
}

impl EnsembleStats {
    fn from_outcomes(outcomes: &[Outcome]) -> Self {
        let n_runs = outcomes.len();
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut time_sums: BTreeMap<String, f64> = BTreeMap::new();
        let mut no_hit_count = 0;
        for o in outcomes {
            match o {
                Some((key, t)) => {
                    *counts.entry(key.clone()).or_default() += 1;
                    *time_sums.entry(key.clone()).or_default() += t;
                }
                None => no_hit_count += 1,
            }
        }
        let mean_hit_time = time_sums
            .iter()
            .map(|(k, sum)| (k.clone(), sum / counts[k] as f64))
            .collect();
        counts.insert(NO_HIT.to_string(), no_hit_count);
        let frequencies: BTreeMap<String, f64> = counts
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / n_runs as f64))
            .collect();
        let sigma = frequencies
            .iter()
            .map(|(k, &p)| (k.clone(), three_sigma(p, n_runs)))
            .collect();
        EnsembleStats {
            n_runs,
            counts,
            no_hit_count,
            frequencies,
            sigma,
            mean_hit_time,
            oracle: None,
        }
    }

    pub fn frequency(&self, key: &str) -> f64 {
        self.frequencies.get(key).copied().unwrap_or(0.0)
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }
}

fn first_hit(cfg: &ScenarioConfig, settings: &RunSettings) -> Result<Outcome> {
    let initial = cfg.initial_state()?;
    let log = run_scenario(&initial, cfg.model(), settings)?;
    Ok(log.first_hit().map(|h| (h.captures_key.clone(), h.time)))
}

/// `n_runs` independent runs of `config`, recording the first hit of each.
/// The result depends only on `base_seed`, not on scheduling.
pub fn run_ensemble(config: &ScenarioConfig, n_runs: usize, base_seed: u64) -> Result<EnsembleStats> {
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be at least 1".into()));
    }
    config.validate()?;
    let settings = |i: usize| RunSettings {
        record_every: None,
        stop_at_first_hit: true,
        ..config.settings(run_seed(base_seed, i))
    };

    #[cfg(feature = "parallel")]
    let outcomes: Result<Vec<Outcome>> = (0..n_runs)
        .into_par_iter()
        .map(|i| first_hit(config, &settings(i)))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Result<Vec<Outcome>> = (0..n_runs).map(|i| first_hit(config, &settings(i))).collect();

    Ok(EnsembleStats::from_outcomes(&outcomes?))
}

/// Ensemble stats with the quadrature prediction for the same race attached.
pub fn run_ensemble_with_oracle(config: &ScenarioConfig, n_runs: usize, base_seed: u64) -> Result<EnsembleStats> {
    let mut stats = run_ensemble(config, n_runs, base_seed)?;
    let s = total_modulus(&config.initial_state()?);
    let edges = config.race_edges()?;
    stats.oracle = Some(selection_probability_oracle(config.model(), &edges, s, config.t_end)?);
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalityConfig {
    /// Inflow into A's capture before any reduction at B.
    pub a_profile: Profile,
    /// Factor applied to A's inflow once B has been reduced first.
    pub reduction_factor: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_runs: usize,
    pub base_seed: u64,
    /// Nominal A and B events; they must be spacelike separated.
    pub event_a: SpacetimeEvent,
    pub event_b: SpacetimeEvent,
}

impl CausalityConfig {
    fn arm(&self, b_first: bool) -> ScenarioConfig {
        let (key, profile, preceding) = if b_first {
            ("01->11", self.a_profile.scaled(self.reduction_factor), vec![1])
        } else {
            ("00->10", self.a_profile, vec![])
        };
        ScenarioConfig {
            name: None,
            mode: MeasurementMode::Observed,
            allow_direct_fourth: false,
            profiles: CurrentModel::new().with(key, profile),
            t_end: self.horizon,
            dt: self.dt,
            strategy: crate::minkowski::BoundaryStrategy::HellwigKraus,
            frames: Vec::new(),
            seed: self.base_seed,
            x_a: self.event_a.x,
            x_b: self.event_b.x,
            preceding_captures: preceding,
            hits: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Inconclusive,
    NoSignificantDifference,
    SignificantShift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub b_reduced_first: bool,
    pub a_count: u64,
    pub a_frequency: f64,
    /// 3-sigma radius around the oracle prediction.
    pub sigma: f64,
    pub oracle: f64,
    pub matches_oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalityReport {
    pub n_runs: usize,
    pub without_b: ArmReport,
    pub with_b: ArmReport,
    pub difference: f64,
    /// 3-sigma radius of the difference of the two frequencies.
    pub difference_sigma: f64,
    pub verdict: Verdict,
    /// Whether a single A observation could tell the arms apart; it can only
    /// if some outcome is impossible in one arm.
    pub single_run_distinguishable: bool,
}

/// Compare A-capture frequencies with and without a preceding reduction at
/// a spacelike-separated B.
pub fn causality_demo(cfg: &CausalityConfig) -> Result<CausalityReport> {
    if !matches!(interval(cfg.event_a, cfg.event_b), Interval::Spacelike) {
        return Err(Error::TimelikeGeometry(format!(
            "A {:?} and B {:?} are not spacelike separated",
            cfg.event_a, cfg.event_b
        )));
    }
    if !(cfg.reduction_factor.is_finite() && cfg.reduction_factor >= 0.0) {
        return Err(Error::Config(format!("reduction factor {}", cfg.reduction_factor)));
    }
    let arm = |b_first: bool| -> Result<ArmReport> {
        let scenario = cfg.arm(b_first);
        let seed = if b_first { !cfg.base_seed } else { cfg.base_seed };
        let stats = run_ensemble(&scenario, cfg.n_runs, seed)?;
        let edge: EdgeKey = if b_first { "01->11" } else { "00->10" }.parse()?;
        let a_key = edge.to.to_string();
        let oracle = selection_probability_oracle(scenario.model(), &[edge], 1.0, cfg.horizon)?.probabilities[&a_key];
        let a_count = stats.count(&a_key);
        let a_frequency = stats.frequency(&a_key);
        let sigma = three_sigma(oracle, cfg.n_runs);
        Ok(ArmReport {
            b_reduced_first: b_first,
            a_count,
            a_frequency,
            sigma,
            oracle,
            matches_oracle: (a_frequency - oracle).abs() <= sigma,
        })
    };
    let without_b = arm(false)?;
    let with_b = arm(true)?;

    let n = cfg.n_runs;
    let difference = without_b.a_frequency - with_b.a_frequency;
    let pooled = (without_b.a_count + with_b.a_count) as f64 / (2 * n) as f64;
    let difference_sigma = 3.0 * (2.0 * pooled * (1.0 - pooled) / n as f64).sqrt();
    let verdict = if n < MIN_RUNS_FOR_VERDICT {
        Verdict::Inconclusive
    } else if difference.abs() > difference_sigma {
        Verdict::SignificantShift
    } else {
        Verdict::NoSignificantDifference
    };
    let open = |p: f64| p > 0.0 && p < 1.0;
    let single_run_distinguishable =
        !(open(without_b.oracle) && open(with_b.oracle)) && without_b.oracle != with_b.oracle;

    Ok(CausalityReport {
        n_runs: n,
        without_b,
        with_b,
        difference,
        difference_sigma,
        verdict,
        single_run_distinguishable,
    })
}
