//! Browser bindings. Every export takes plain values and returns a JSON
//! string, so the page needs nothing beyond `JSON.parse`.

use reduxsim::config::{scenarios, ScenarioConfig};
use reduxsim::ensemble::run_ensemble_with_oracle;
use reduxsim::minkowski::{invariance_report, region_map, GridSpec};
use reduxsim::{run_scenario, BoundaryStrategy, HitPair, LorentzFrame, SpacetimeEvent};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Browsers have no spare threads here, so ensembles stay small.
pub const MAX_BROWSER_RUNS: usize = 50_000;

#[derive(Serialize)]
struct RegionGrid {
    nt: usize,
    nx: usize,
    /// Row-major region codes: 0 pre both, 1 after A only, 2 after B only,
    /// 3 after both.
    codes: Vec<u8>,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn scenario(name: &str) -> Result<ScenarioConfig, String> {
    let file = format!("{name}.json");
    let text = scenarios::text(&file).ok_or_else(|| format!("unknown scenario {name}"))?;
    ScenarioConfig::from_json(text).map_err(|e| e.to_string())
}

/// Names of the bundled scenarios, without extension.
pub fn scenario_names() -> Vec<&'static str> {
    scenarios::ALL
        .iter()
        .map(|(n, _)| n.trim_end_matches(".json"))
        .collect()
}

/// Label an `nt` x `nx` grid over `[t0,t1] x [x0,x1]` for hits at A and B.
/// A NaN time means that detector never fired.
#[allow(clippy::too_many_arguments)]
pub fn region_codes(
    strategy: &str,
    velocity: f64,
    a: (f64, f64),
    b: (f64, f64),
    t_range: (f64, f64),
    x_range: (f64, f64),
    nt: usize,
    nx: usize,
) -> Result<String, String> {
    let strategy = match strategy {
        "hk" | "hellwig_kraus" => BoundaryStrategy::HellwigKraus,
        "aa" | "aharonov_albert" => BoundaryStrategy::AharonovAlbert,
        other => return Err(format!("unknown strategy {other}")),
    };
    let frame = LorentzFrame::new(velocity).map_err(|e| e.to_string())?;
    let hit = |(t, x): (f64, f64)| (!t.is_nan()).then(|| SpacetimeEvent::new(t, x));
    let hits = HitPair::new(hit(a), hit(b));
    if nt == 0 || nx == 0 || nt * nx > 1 << 20 {
        return Err(format!("grid {nt} x {nx} out of range"));
    }
    let grid = GridSpec {
        t0: t_range.0,
        t1: t_range.1,
        x0: x_range.0,
        x1: x_range.1,
        nt,
        nx,
    };
    let codes = region_map(&grid, strategy, &hits, &frame)
        .iter()
        .map(|s| s.label.code())
        .collect();
    Ok(json(&RegionGrid { nt, nx, codes }))
}

/// Ensemble statistics with the quadrature prediction for a bundled race.
pub fn race_json(name: &str, runs: usize, seed: u64) -> Result<String, String> {
    if runs == 0 || runs > MAX_BROWSER_RUNS {
        return Err(format!("runs must be between 1 and {MAX_BROWSER_RUNS}"));
    }
    let cfg = scenario(name)?;
    run_ensemble_with_oracle(&cfg, runs, seed)
        .map(|s| json(&s))
        .map_err(|e| e.to_string())
}

/// Simulate a bundled scenario and count reduction boundaries per frame.
pub fn invariance_json(name: &str, seed: u64, velocities: &[f64]) -> Result<String, String> {
    let cfg = scenario(name)?;
    let frames = velocities
        .iter()
        .map(|&v| LorentzFrame::new(v))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let initial = cfg.initial_state().map_err(|e| e.to_string())?;
    let settings = reduxsim::RunSettings {
        record_every: None,
        ..cfg.settings(seed)
    };
    let log = run_scenario(&initial, cfg.model(), &settings).map_err(|e| e.to_string())?;
    #[derive(Serialize)]
    struct Out<'a> {
        hits: &'a [reduxsim::ReductionEvent],
        report: reduxsim::minkowski::InvarianceReport,
    }
    Ok(json(&Out {
        hits: &log.hits,
        report: invariance_report(&log, &frames),
    }))
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = scenarioNames)]
pub fn scenario_names_js() -> String {
    json(&scenario_names())
}

#[wasm_bindgen(js_name = regionMap)]
#[allow(clippy::too_many_arguments)]
pub fn region_map_js(
    strategy: &str,
    velocity: f64,
    a_t: f64,
    a_x: f64,
    b_t: f64,
    b_x: f64,
    t0: f64,
    t1: f64,
    x0: f64,
    x1: f64,
    nt: usize,
    nx: usize,
) -> Result<String, JsValue> {
    js(region_codes(
        strategy,
        velocity,
        (a_t, a_x),
        (b_t, b_x),
        (t0, t1),
        (x0, x1),
        nt,
        nx,
    ))
}

#[wasm_bindgen(js_name = runRace)]
pub fn race_js(name: &str, runs: usize, seed: u64) -> Result<String, JsValue> {
    js(race_json(name, runs, seed))
}

#[wasm_bindgen(js_name = hitInvariance)]
pub fn invariance_js(name: &str, seed: u64, velocities: Vec<f64>) -> Result<String, JsValue> {
    js(invariance_json(name, seed, &velocities))
}
