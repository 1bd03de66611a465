//! Weight transfer along transition edges and stochastic hit sampling.
//!
//! Each edge carries a configured current profile. A step moves
//! `J(t) * dt` of square modulus from source to target (explicit Euler), and
//! a hit is drawn with probability `hazard * dt` where the hazard is the sum
//! of positive net inflows over the total modulus.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::minkowski::BoundaryStrategy;
use crate::rules::{apply_reduction, ReductionEvent};
use crate::state::{total_modulus, CaptureSet, Superposition};

/// Largest allowed `hazard * dt` for a single step.
pub const MAX_STEP_HAZARD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        rate: f64,
    },
    GaussianPulse {
        peak: f64,
        center: f64,
        width: f64,
    },
    /// `rate` on `[start, stop)`, zero elsewhere.
    Window {
        rate: f64,
        start: f64,
        stop: f64,
    },
}

impl Profile {
    pub fn current(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant { rate } => rate,
            Profile::GaussianPulse { peak, center, width } => {
                let z = (t - center) / width;
                peak * (-0.5 * z * z).exp()
            }
            Profile::Window { rate, start, stop } => {
                if t >= start && t < stop {
                    rate
                } else {
                    0.0
                }
            }
        }
    }

    /// True when no current flows at any time from `t` on.
    pub fn exhausted_after(&self, t: f64) -> bool {
        match *self {
            Profile::Constant { rate } => rate == 0.0,
            Profile::GaussianPulse { peak, .. } => peak == 0.0,
            Profile::Window { rate, stop, .. } => rate == 0.0 || t >= stop,
        }
    }

    /// Points where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Profile::Window { start, stop, .. } => vec![start, stop],
            _ => Vec::new(),
        }
    }

    pub fn peak_rate(&self) -> f64 {
        match *self {
            Profile::Constant { rate } | Profile::Window { rate, .. } => rate,
            Profile::GaussianPulse { peak, .. } => peak,
        }
    }

    pub fn scaled(&self, factor: f64) -> Profile {
        match *self {
            Profile::Constant { rate } => Profile::Constant { rate: rate * factor },
            Profile::GaussianPulse { peak, center, width } => Profile::GaussianPulse {
                peak: peak * factor,
                center,
                width,
            },
            Profile::Window { rate, start, stop } => Profile::Window {
                rate: rate * factor,
                start,
                stop,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Constant { rate } => rate.is_finite() && rate >= 0.0,
            Profile::GaussianPulse { peak, center, width } => {
                peak.is_finite() && peak >= 0.0 && center.is_finite() && width.is_finite() && width > 0.0
            }
            Profile::Window { rate, start, stop } => {
                rate.is_finite() && rate >= 0.0 && start.is_finite() && stop.is_finite() && start <= stop
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid current profile {self:?}")))
        }
    }
}

/// Transition between two capture sets, written `"00->10"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub from: CaptureSet,
    pub to: CaptureSet,
}

impl EdgeKey {
    pub fn new(from: CaptureSet, to: CaptureSet) -> Self {
        EdgeKey { from, to }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

impl std::str::FromStr for EdgeKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("->")
            .ok_or_else(|| Error::Config(format!("edge {s:?} must look like \"00->10\"")))?;
        let key = EdgeKey::new(a.trim().parse()?, b.trim().parse()?);
        if key.from == key.to || !key.to.is_superset_of(key.from) {
            return Err(Error::Config(format!("edge {s:?} must add at least one capture")));
        }
        Ok(key)
    }
}

impl Serialize for EdgeKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EdgeKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Current profiles keyed by edge; edges without a profile carry nothing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurrentModel {
    pub profiles: BTreeMap<EdgeKey, Profile>,
}

impl CurrentModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, profile: Profile) -> Self {
        self.profiles.insert(key.parse().expect("edge key"), profile);
        self
    }

    pub fn profile(&self, key: &EdgeKey) -> Option<&Profile> {
        self.profiles.get(key)
    }

    pub fn current(&self, key: &EdgeKey, t: f64) -> f64 {
        self.profile(key).map_or(0.0, |p| p.current(t))
    }
}

fn edge_key(state: &Superposition, from: usize, to: usize) -> EdgeKey {
    EdgeKey::new(state.components[from].captures(), state.components[to].captures())
}

/// Profiles resolved once per graph, plus scratch buffers.
struct Flow<'m> {
    profiles: Vec<Option<&'m Profile>>,
    currents: Vec<f64>,
    net: Vec<f64>,
    requested: Vec<f64>,
}

impl<'m> Flow<'m> {
    fn new(state: &Superposition, model: &'m CurrentModel) -> Self {
        let profiles = state
            .edges
            .iter()
            .map(|e| model.profile(&edge_key(state, e.from, e.to)))
            .collect();
        Flow {
            profiles,
            currents: vec![0.0; state.edges.len()],
            net: vec![0.0; state.components.len()],
            requested: vec![0.0; state.components.len()],
        }
    }

    /// Fill edge currents and per-component net inflow at time `t`.
    fn evaluate(&mut self, state: &Superposition, t: f64) {
        self.net.iter_mut().for_each(|n| *n = 0.0);
        for (i, edge) in state.edges.iter().enumerate() {
            let (src, dst) = (&state.components[edge.from], &state.components[edge.to]);
            let j = match self.profiles[i] {
                Some(p) if edge.active && !src.phantom && !dst.phantom && src.weight > 0.0 => p.current(t),
                _ => 0.0,
            };
            self.currents[i] = j;
            self.net[edge.to] += j;
            self.net[edge.from] -= j;
        }
    }

    /// Positive net inflow of component `n` (zero for phantoms).
    fn inflow(&self, state: &Superposition, n: usize) -> f64 {
        if state.components[n].phantom {
            0.0
        } else {
            self.net[n].max(0.0)
        }
    }

    fn total_inflow(&self, state: &Superposition) -> f64 {
        (0..state.components.len()).map(|n| self.inflow(state, n)).sum()
    }

    /// Move weight along every edge for `dt`, scaling down outflows that
    /// would drive a source negative.
    fn transfer(&mut self, state: &mut Superposition, dt: f64) {
        let requested = &mut self.requested;
        requested.iter_mut().for_each(|r| *r = 0.0);
        for (i, edge) in state.edges.iter().enumerate() {
            requested[edge.from] += self.currents[i] * dt;
        }
        for (r, c) in requested.iter_mut().zip(&state.components) {
            // fraction of the requested outflow the source can supply
            *r = if *r > c.weight { c.weight / *r } else { 1.0 };
        }
        for (i, edge) in state.edges.iter().enumerate() {
            let j = self.currents[i];
            if j == 0.0 {
                continue;
            }
            let amount = j * dt * requested[edge.from];
            state.components[edge.from].weight -= amount;
            state.components[edge.to].weight += amount;
        }
        for c in &mut state.components {
            if c.weight < 0.0 {
                c.weight = 0.0;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hazard {
    pub total: f64,
    /// Indexed by component.
    pub per_component: Vec<f64>,
}

/// Probability per unit time of a stochastic choice at time `t`.
pub fn hazard(state: &Superposition, model: &CurrentModel, t: f64) -> Result<Hazard> {
    let s = total_modulus(state);
    if s <= 0.0 {
        return Err(Error::ZeroModulus);
    }
    let mut flow = Flow::new(state, model);
    flow.evaluate(state, t);
    let per_component: Vec<f64> = (0..state.components.len()).map(|n| flow.inflow(state, n) / s).collect();
    Ok(Hazard {
        total: per_component.iter().sum(),
        per_component,
    })
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidStep(dt))
    }
}

fn guard(total_hazard: f64, dt: f64, t: f64) -> Result<()> {
    let product = total_hazard * dt;
    if product >= MAX_STEP_HAZARD {
        Err(Error::StepTooLarge { product, t })
    } else {
        Ok(())
    }
}

/// One explicit-Euler step of length `dt` from `state.time`.
pub fn step(state: &Superposition, model: &CurrentModel, dt: f64) -> Result<Superposition> {
    check_dt(dt)?;
    let s = total_modulus(state);
    if s <= 0.0 {
        return Err(Error::ZeroModulus);
    }
    let mut next = state.clone();
    let mut flow = Flow::new(&next, model);
    flow.evaluate(&next, next.time);
    guard(flow.total_inflow(&next) / s, dt, next.time)?;
    flow.transfer(&mut next, dt);
    next.time += dt;
    Ok(next)
}

/// Draw at most one hit in `[state.time, state.time + dt)`.
pub fn sample_hit<R: Rng + ?Sized>(
    state: &Superposition,
    model: &CurrentModel,
    dt: f64,
    rng: &mut R,
) -> Result<Option<(usize, f64)>> {
    check_dt(dt)?;
    let h = hazard(state, model, state.time)?;
    guard(h.total, dt, state.time)?;
    Ok(draw(&h.per_component, h.total, state.time, dt, rng))
}

fn draw<R: Rng + ?Sized>(per: &[f64], total: f64, t: f64, dt: f64, rng: &mut R) -> Option<(usize, f64)> {
    let u: f64 = rng.random();
    if total <= 0.0 || u >= total * dt {
        return None;
    }
    // conditioned on a hit, u / dt is uniform on [0, total)
    let mut target = u / dt;
    let mut chosen = per.len() - 1;
    for (n, &h) in per.iter().enumerate() {
        if h > 0.0 {
            chosen = n;
            if target < h {
                break;
            }
            target -= h;
        }
    }
    let offset: f64 = rng.random();
    Some((chosen, t + offset * dt))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub strategy: BoundaryStrategy,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    /// Record weights every this many steps; `None` records nothing.
    pub record_every: Option<usize>,
    pub stop_at_first_hit: bool,
}

impl RunSettings {
    pub fn new(t_end: f64, dt: f64, seed: u64) -> Self {
        RunSettings {
            strategy: BoundaryStrategy::HellwigKraus,
            t_end,
            dt,
            seed,
            record_every: Some(1),
            stop_at_first_hit: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSample {
    pub t: f64,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomMark {
    pub t: f64,
    pub idx: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub hits: Vec<ReductionEvent>,
    pub weight_trajectory: Vec<WeightSample>,
    pub phantoms: Vec<PhantomMark>,
    /// Largest change of total modulus over a single step.
    pub max_step_drift: f64,
    /// Change of total modulus from start to finish.
    pub total_drift: f64,
    pub final_state: Superposition,
}

impl RunLog {
    pub fn dual_hits(&self) -> impl Iterator<Item = &ReductionEvent> {
        self.hits.iter().filter(|h| h.is_dual())
    }

    pub fn first_hit(&self) -> Option<&ReductionEvent> {
        self.hits.first()
    }
}

fn step_count(t_end: f64, dt: f64) -> usize {
    let r = t_end / dt;
    let n = if (r - r.round()).abs() < 1e-9 * r.max(1.0) {
        r.round()
    } else {
        r.ceil()
    };
    n.max(0.0) as usize
}

/// Phantom criterion: a never-chosen component fed by at least one edge,
/// none of which can ever carry current again.
fn mark_phantoms(state: &mut Superposition, model: &CurrentModel, t: f64, log: &mut Vec<PhantomMark>) -> bool {
    let mut marked = false;
    for n in 0..state.components.len() {
        let comp = &state.components[n];
        if comp.phantom {
            continue;
        }
        let mut incoming = state.edges.iter().filter(|e| e.to == n).peekable();
        if incoming.peek().is_none() {
            continue;
        }
        let dead = incoming.all(|e| {
            !e.active
                || state.components[e.from].phantom
                || model
                    .profile(&edge_key(state, e.from, e.to))
                    .is_none_or(|p| p.exhausted_after(t))
        });
        if dead {
            state.set_phantom(n).expect("index in range");
            log.push(PhantomMark {
                t,
                idx: n,
                label: state.components[n].label(),
            });
            marked = true;
        }
    }
    marked
}

pub fn run_scenario(initial: &Superposition, model: &CurrentModel, settings: &RunSettings) -> Result<RunLog> {
    run_scenario_with(initial, model, settings, |_| {})
}

/// Like [`run_scenario`], calling `inspect` with the state at the start of
/// every step and once at the end.
pub fn run_scenario_with<F>(
    initial: &Superposition,
    model: &CurrentModel,
    settings: &RunSettings,
    mut inspect: F,
) -> Result<RunLog>
where
    F: FnMut(&Superposition),
{
    let dt = settings.dt;
    check_dt(dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut state = initial.clone();
    let s0 = total_modulus(&state);
    if s0 <= 0.0 {
        return Err(Error::ZeroModulus);
    }
    let t0 = state.time;
    let steps = step_count(settings.t_end - t0, dt);

    let mut hits = Vec::new();
    let mut phantoms = Vec::new();
    let mut trajectory = Vec::new();
    let mut max_step_drift = 0.0f64;
    let mut flow = Flow::new(&state, model);
    let mut per = vec![0.0; state.components.len()];

    let record = |state: &Superposition, out: &mut Vec<WeightSample>| {
        out.push(WeightSample {
            t: state.time,
            labels: state.labels(),
            weights: state.weights(),
        });
    };

    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        state.time = t;
        mark_phantoms(&mut state, model, t, &mut phantoms);
        if let Some(every) = settings.record_every {
            if k % every.max(1) == 0 {
                record(&state, &mut trajectory);
            }
        }
        inspect(&state);

        let before = total_modulus(&state);
        flow.evaluate(&state, t);
        per.clear();
        per.extend((0..state.components.len()).map(|n| flow.inflow(&state, n) / before));
        let total: f64 = per.iter().sum();
        guard(total, dt, t)?;
        let hit = draw(&per, total, t, dt, &mut rng);

        flow.transfer(&mut state, dt);
        state.time = t0 + (k + 1) as f64 * dt;
        max_step_drift = max_step_drift.max((total_modulus(&state) - before).abs());

        if let Some((idx, at)) = hit {
            let ev = ReductionEvent::new(&state, idx, at, settings.strategy)?;
            state = apply_reduction(&state, &ev)?;
            hits.push(ev);
            flow = Flow::new(&state, model);
            if settings.stop_at_first_hit {
                break;
            }
        }
    }
    let end = state.time;
    mark_phantoms(&mut state, model, end, &mut phantoms);
    if settings.record_every.is_some() {
        record(&state, &mut trajectory);
    }
    inspect(&state);

    Ok(RunLog {
        seed: settings.seed,
        dt,
        t_end: settings.t_end,
        hits,
        weight_trajectory: trajectory,
        phantoms,
        max_step_drift,
        total_drift: (total_modulus(&state) - s0).abs(),
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{build_objective_template, build_observed_template, TemplateOptions};

    fn observed() -> Superposition {
        build_observed_template([0.0, 10.0])
    }

    #[test]
    fn euler_step_moves_weight() {
        let model = CurrentModel::new().with("00->10", Profile::Constant { rate: 1.0 });
        let next = step(&observed(), &model, 0.01).unwrap();
        assert!((next.components[1].weight - 0.01).abs() < 1e-15);
        assert!((next.components[0].weight - 0.99).abs() < 1e-15);
        assert_eq!(next.time, 0.01);
    }

    #[test]
    fn forbidden_and_closed_edges_carry_nothing() {
        // 10 -> 11 does not exist in the observed graph
        let model = CurrentModel::new().with("10->11", Profile::Constant { rate: 1.0 });
        let mut st = observed();
        st.components[0].weight = 0.5;
        st.components[1].weight = 0.5;
        let next = step(&st, &model, 0.01).unwrap();
        assert_eq!(next.weights(), st.weights());

        let window = CurrentModel::new().with(
            "00->10",
            Profile::Window {
                rate: 1.0,
                start: 1.0,
                stop: 2.0,
            },
        );
        let next = step(&observed(), &window, 0.01).unwrap();
        assert_eq!(next.weights(), observed().weights());
    }

    #[test]
    fn outflow_is_clipped_at_empty_source() {
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 0.9 })
            .with("00->01", Profile::Constant { rate: 0.9 });
        let mut st = observed();
        st.components[0].weight = 0.001;
        st.components[1].weight = 0.999;
        let next = step(&st, &model, 0.05).unwrap();
        assert_eq!(next.components[0].weight, 0.0);
        assert!((total_modulus(&next) - 1.0).abs() < 1e-15);
        assert!((next.components[2].weight - 0.0005).abs() < 1e-15);
    }

    #[test]
    fn step_guard() {
        let model = CurrentModel::new().with("00->10", Profile::Constant { rate: 5.0 });
        assert!(matches!(
            step(&observed(), &model, 0.02),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(step(&observed(), &model, 0.019).is_ok());
        assert_eq!(step(&observed(), &model, 0.0), Err(Error::InvalidStep(0.0)));
    }

    #[test]
    fn hazard_examples() {
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 0.5 })
            .with("00->01", Profile::Constant { rate: 0.5 });
        let h = hazard(&observed(), &model, 0.0).unwrap();
        assert_eq!(h.total, 1.0);
        assert_eq!(h.per_component, vec![0.0, 0.5, 0.5]);

        let single = CurrentModel::new().with("00->10", Profile::Constant { rate: 1.0 });
        let mut st = observed();
        st.components[0].weight = 2.0;
        assert_eq!(hazard(&st, &single, 0.0).unwrap().total, 0.5);

        // 10 gains 0.3 and loses 0.5 to 11: only 11 counts
        let opts = TemplateOptions::default();
        let mut obj = build_objective_template(2, &opts).unwrap();
        obj.components[0].weight = 0.5;
        obj.components[1].weight = 0.5;
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 0.3 })
            .with("10->11", Profile::Constant { rate: 0.5 });
        let h = hazard(&obj, &model, 0.0).unwrap();
        assert_eq!(h.per_component, vec![0.0, 0.0, 0.0, 0.5]);

        let mut zero = observed();
        zero.components[0].weight = 0.0;
        assert_eq!(hazard(&zero, &model, 0.0), Err(Error::ZeroModulus));
    }

    #[test]
    fn no_hazard_no_hit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = CurrentModel::new();
        for _ in 0..1000 {
            assert_eq!(sample_hit(&observed(), &model, 0.01, &mut rng).unwrap(), None);
        }
    }

    #[test]
    fn sampled_choice_is_proportional() {
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 2.0 })
            .with("00->01", Profile::Constant { rate: 1.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = observed();
        let mut counts = [0usize; 3];
        let mut hits = 0;
        for _ in 0..200_000 {
            if let Some((i, t)) = sample_hit(&st, &model, 0.01, &mut rng).unwrap() {
                assert!((0.0..0.01).contains(&t));
                counts[i] += 1;
                hits += 1;
            }
        }
        // P(hit) = 0.03
        let p = hits as f64 / 200_000.0;
        assert!((p - 0.03).abs() < 3.0 * (0.03f64 * 0.97 / 200_000.0).sqrt());
        let frac = counts[1] as f64 / hits as f64;
        let sigma = (2.0 / 9.0 / hits as f64).sqrt();
        assert!((frac - 2.0 / 3.0).abs() < 3.0 * sigma, "{frac}");
        assert_eq!(counts[0], 0);
    }

    fn windows() -> CurrentModel {
        let w = Profile::Window {
            rate: 0.5,
            start: 0.0,
            stop: 1.0,
        };
        CurrentModel::new().with("00->10", w).with("00->01", w)
    }

    #[test]
    fn quiet_run_leaves_phantoms() {
        let model = windows();
        // find a seed with no hit at all
        let log = (0..200)
            .map(|seed| run_scenario(&observed(), &model, &RunSettings::new(2.0, 0.01, seed)).unwrap())
            .find(|log| log.hits.is_empty())
            .expect("some run without a hit");
        let st = &log.final_state;
        assert!(st.components[1].phantom && st.components[2].phantom);
        assert!(!st.components[0].phantom);
        let marks: Vec<usize> = log.phantoms.iter().map(|p| p.idx).collect();
        assert_eq!(marks, vec![1, 2]);
        assert!(log.phantoms.iter().all(|p| p.t >= 1.0 && p.t < 1.02));
        // weights frozen after marking
        let frozen: Vec<&WeightSample> = log.weight_trajectory.iter().filter(|w| w.t >= 1.01).collect();
        assert!(frozen.windows(2).all(|w| w[0].weights == w[1].weights));
    }

    #[test]
    fn runs_replay_bit_exactly() {
        let model = windows().with("10->11", Profile::Constant { rate: 1.0 });
        let settings = RunSettings::new(3.0, 0.01, 42);
        let a = run_scenario(&observed(), &model, &settings).unwrap();
        let b = run_scenario(&observed(), &model, &settings).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn hits_increase_and_conserve() {
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 2.0 })
            .with("00->01", Profile::Constant { rate: 2.0 })
            .with("10->11", Profile::Constant { rate: 2.0 })
            .with("01->11", Profile::Constant { rate: 2.0 });
        for seed in 0..50 {
            let log = run_scenario(&observed(), &model, &RunSettings::new(5.0, 0.01, seed)).unwrap();
            assert!(log.hits.len() <= 2);
            assert!(log.hits.windows(2).all(|w| w[0].time < w[1].time));
            assert!(log.hits.iter().all(|h| !h.is_dual()));
            assert!(log.max_step_drift <= 1e-9);
            assert!(log.total_drift <= 1e-6);
        }
    }

    #[test]
    fn edge_key_text() {
        let k: EdgeKey = "00->10".parse().unwrap();
        assert_eq!(k.to_string(), "00->10");
        assert!("10->00".parse::<EdgeKey>().is_err());
        assert!("10->10".parse::<EdgeKey>().is_err());
        assert!("10-11".parse::<EdgeKey>().is_err());
        let json = serde_json::to_string(&windows()).unwrap();
        assert!(json.contains("\"00->10\":{\"kind\":\"window\""));
        let back: CurrentModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, windows());
    }

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 0.001), 1000);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(step_count(0.0, 0.1), 0);
    }
}
