//! Component algebra for the two-detector superposition.
//!
//! A superposition is a list of labeled components, each carrying a square
//! modulus (its weight) rather than a spatial amplitude, plus the transition
//! edges the Hamiltonian may drive current along. Observer `i` watches
//! detector `i`, so a brain's perceived level is always the level of its
//! detector.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::TransitionEdge;

pub const DETECTORS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum DetectorState {
    Ground,
    /// Excited detector holding its particle at the given position.
    Capture {
        at: f64,
    },
}

impl DetectorState {
    pub fn is_captured(&self) -> bool {
        matches!(self, DetectorState::Capture { .. })
    }

    pub fn capture_coordinate(&self) -> Option<f64> {
        match *self {
            DetectorState::Ground => None,
            DetectorState::Capture { at } => Some(at),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrainStatus {
    /// No observer present (objective measurement).
    Absent,
    Ready,
    Conscious,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BrainState {
    pub observer: usize,
    pub status: BrainStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementMode {
    Observed,
    Objective,
}

impl MeasurementMode {
    /// Brain status carried by a freshly branched component.
    pub fn fresh_status(self) -> BrainStatus {
        match self {
            MeasurementMode::Observed => BrainStatus::Ready,
            MeasurementMode::Objective => BrainStatus::Absent,
        }
    }
}

/// Bitmask of captured detectors; bit `i` is detector `i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaptureSet(u8);

impl CaptureSet {
    pub const NONE: CaptureSet = CaptureSet(0);
    pub const ALL: CaptureSet = CaptureSet((1 << DETECTORS) - 1);

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits <= Self::ALL.0).then_some(CaptureSet(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, detector: usize) -> bool {
        self.0 & (1 << detector) != 0
    }

    pub fn with(self, detector: usize) -> Self {
        CaptureSet(self.0 | (1 << detector))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_superset_of(self, other: CaptureSet) -> bool {
        self.0 & other.0 == other.0
    }

    /// Detectors captured here but not in `base`.
    pub fn difference(self, base: CaptureSet) -> impl Iterator<Item = usize> {
        (0..DETECTORS).filter(move |&d| self.contains(d) && !base.contains(d))
    }
}

/// Written detector A first: `"10"` means only detector A has captured.
impl fmt::Display for CaptureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in 0..DETECTORS {
            f.write_str(if self.contains(d) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CaptureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != DETECTORS {
            return Err(Error::Config(format!("capture key {s:?} must have {DETECTORS} digits")));
        }
        let mut set = CaptureSet::NONE;
        for (d, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => set = set.with(d),
                _ => return Err(Error::Config(format!("capture key {s:?} must be 0/1 digits"))),
            }
        }
        Ok(set)
    }
}

impl Serialize for CaptureSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CaptureSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub detectors: Vec<DetectorState>,
    pub brains: Vec<BrainState>,
    /// Square modulus.
    pub weight: f64,
    pub phantom: bool,
    pub born_at: f64,
    /// Eligible for objective reduction.
    pub decoherent: bool,
}

impl Component {
    pub fn new(captures: CaptureSet, sites: [f64; DETECTORS], status: BrainStatus, born_at: f64) -> Self {
        let detectors = (0..DETECTORS)
            .map(|d| {
                if captures.contains(d) {
                    DetectorState::Capture { at: sites[d] }
                } else {
                    DetectorState::Ground
                }
            })
            .collect();
        let brains = (0..DETECTORS).map(|observer| BrainState { observer, status }).collect();
        Component {
            detectors,
            brains,
            weight: 0.0,
            phantom: false,
            born_at,
            decoherent: !captures.is_empty(),
        }
    }

    pub fn captures(&self) -> CaptureSet {
        self.detectors
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_captured())
            .fold(CaptureSet::NONE, |set, (i, _)| set.with(i))
    }

    pub fn has_ready(&self, observer: usize) -> bool {
        self.brains
            .iter()
            .any(|b| b.observer == observer && b.status == BrainStatus::Ready)
    }

    pub fn brain_statuses(&self) -> Vec<BrainStatus> {
        self.brains.iter().map(|b| b.status).collect()
    }

    /// Detector and brain label, e.g. `D1_B1D0_B0` where `_` marks a
    /// conscious brain and absent brains are omitted.
    pub fn label(&self) -> String {
        let mut out = String::new();
        for (i, det) in self.detectors.iter().enumerate() {
            let level = u8::from(det.is_captured());
            out.push_str(&format!("D{level}"));
            for brain in self.brains.iter().filter(|b| b.observer == i) {
                match brain.status {
                    BrainStatus::Absent => {}
                    BrainStatus::Ready => out.push_str(&format!("B{level}")),
                    BrainStatus::Conscious => out.push_str(&format!("_B{level}")),
                }
            }
        }
        out
    }

    pub fn same_label(&self, other: &Component) -> bool {
        self.captures() == other.captures() && self.brain_statuses() == other.brain_statuses()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Superposition {
    pub components: Vec<Component>,
    pub edges: Vec<TransitionEdge>,
    pub time: f64,
    pub mode: MeasurementMode,
    /// Detector positions; a capture by detector `i` happens at `sites[i]`.
    pub sites: [f64; DETECTORS],
    /// Captures already fixed by earlier reductions.
    pub settled: CaptureSet,
    pub allow_direct_fourth: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemplateOptions {
    pub allow_direct_fourth: bool,
    pub sites: [f64; DETECTORS],
}

impl Default for TemplateOptions {
    fn default() -> Self {
        TemplateOptions {
            allow_direct_fourth: false,
            sites: [0.0, 10.0],
        }
    }
}

/// Sum of all weights, phantoms included.
pub fn total_modulus(state: &Superposition) -> f64 {
    state.components.iter().map(|c| c.weight).sum()
}

/// Four components `D0D0, D1D0, D0D1, D1D1` with no observers present.
pub fn build_objective_template(n_detectors: usize, opts: &TemplateOptions) -> Result<Superposition> {
    if n_detectors != DETECTORS {
        return Err(Error::UnsupportedDetectorCount(n_detectors));
    }
    let keys = [0b00, 0b01, 0b10, 0b11].map(|b| CaptureSet::from_bits(b).unwrap());
    let mut components: Vec<Component> = keys
        .iter()
        .map(|&k| Component::new(k, opts.sites, BrainStatus::Absent, 0.0))
        .collect();
    components[0].weight = 1.0;
    let mut edges = vec![
        TransitionEdge::new(0, 1),
        TransitionEdge::new(0, 2),
        TransitionEdge::new(1, 3),
        TransitionEdge::new(2, 3),
    ];
    if opts.allow_direct_fourth {
        edges.push(TransitionEdge::new(0, 3));
    }
    Ok(Superposition {
        components,
        edges,
        time: 0.0,
        mode: MeasurementMode::Objective,
        sites: opts.sites,
        settled: CaptureSet::NONE,
        allow_direct_fourth: opts.allow_direct_fourth,
    })
}

/// Both detectors watched from the start: the conscious ground component
/// and two ready single-capture branches. The double capture is never
/// instantiated since no admissible route reaches it.
pub fn build_observed_template(sites: [f64; DETECTORS]) -> Superposition {
    let mut root = Component::new(CaptureSet::NONE, sites, BrainStatus::Conscious, 0.0);
    root.weight = 1.0;
    let mut components = vec![root];
    for d in 0..DETECTORS {
        components.push(Component::new(CaptureSet::NONE.with(d), sites, BrainStatus::Ready, 0.0));
    }
    Superposition {
        components,
        edges: vec![TransitionEdge::new(0, 1), TransitionEdge::new(0, 2)],
        time: 0.0,
        mode: MeasurementMode::Observed,
        sites,
        settled: CaptureSet::NONE,
        allow_direct_fourth: false,
    }
}

impl Superposition {
    pub fn find(&self, captures: CaptureSet) -> Option<usize> {
        self.components.iter().position(|c| c.captures() == captures)
    }

    /// Weight of the component with these captures, zero if it does not exist.
    pub fn weight_of(&self, captures: CaptureSet) -> f64 {
        self.find(captures).map_or(0.0, |i| self.components[i].weight)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(Component::label).collect()
    }

    pub fn check_index(&self, idx: usize) -> Result<()> {
        if idx < self.components.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                idx,
                len: self.components.len(),
            })
        }
    }

    /// Freeze component `idx`: no current flows into or out of it until a
    /// reduction removes it. Idempotent.
    pub fn set_phantom(&mut self, idx: usize) -> Result<()> {
        self.check_index(idx)?;
        self.components[idx].phantom = true;
        for edge in self.edges.iter_mut().filter(|e| e.from == idx || e.to == idx) {
            edge.active = false;
        }
        Ok(())
    }
}

pub fn mark_phantom(state: &Superposition, idx: usize) -> Result<Superposition> {
    let mut next = state.clone();
    next.set_phantom(idx)?;
    Ok(next)
}
