//! Transition admissibility, ready-state tagging and state reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{BoundaryStrategy, SpacetimeEvent};
use crate::state::{BrainStatus, CaptureSet, Component, MeasurementMode, Superposition, DETECTORS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionEdge {
    pub from: usize,
    pub to: usize,
    /// Inactive edges carry no current.
    pub active: bool,
}

impl TransitionEdge {
    pub fn new(from: usize, to: usize) -> Self {
        assert_ne!(from, to, "self-loop edge");
        TransitionEdge { from, to, active: true }
    }
}

/// A transition is forbidden when both ends hold a ready brain of the same
/// observer.
pub fn forbids(a: &Component, b: &Component) -> bool {
    a.brains
        .iter()
        .any(|brain| brain.status == BrainStatus::Ready && b.has_ready(brain.observer))
}

pub fn is_forbidden(edge: &TransitionEdge, state: &Superposition) -> bool {
    forbids(&state.components[edge.from], &state.components[edge.to])
}

/// Newly branched components carry ready brains when observed and no
/// brains at all otherwise.
pub fn tag_new_components(state: &Superposition, new_idxs: &[usize]) -> Superposition {
    let mut next = state.clone();
    tag_in_place(&mut next, new_idxs);
    next
}

fn tag_in_place(state: &mut Superposition, new_idxs: &[usize]) {
    let status = state.mode.fresh_status();
    for &i in new_idxs {
        for brain in &mut state.components[i].brains {
            brain.status = status;
        }
    }
}

/// Grow the transition graph from every live component, skipping forbidden
/// transitions, then refresh each edge's `active` flag.
pub fn rederive(state: &mut Superposition) {
    let mut i = 0;
    while i < state.components.len() {
        if !state.components[i].phantom {
            let from = state.components[i].captures();
            let mut targets: Vec<CaptureSet> = (0..DETECTORS)
                .filter(|&d| !from.contains(d))
                .map(|d| from.with(d))
                .collect();
            if state.allow_direct_fourth && CaptureSet::ALL.len() - from.len() >= 2 {
                targets.push(CaptureSet::ALL);
            }
            for target in targets {
                let j = match state.find(target) {
                    Some(j) => j,
                    None => {
                        let born = Component::new(target, state.sites, BrainStatus::Absent, state.time);
                        state.components.push(born);
                        let j = state.components.len() - 1;
                        tag_in_place(state, &[j]);
                        if forbids(&state.components[i], &state.components[j]) {
                            state.components.pop();
                            continue;
                        }
                        j
                    }
                };
                if forbids(&state.components[i], &state.components[j]) {
                    continue;
                }
                if !state.edges.iter().any(|e| e.from == i && e.to == j) {
                    state.edges.push(TransitionEdge::new(i, j));
                }
            }
        }
        i += 1;
    }
    let comps = &state.components;
    for edge in &mut state.edges {
        let (a, b) = (&comps[edge.from], &comps[edge.to]);
        edge.active = !forbids(a, b) && !a.phantom && !b.phantom;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capture {
    pub detector: usize,
    pub event: SpacetimeEvent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionEvent {
    pub chosen_idx: usize,
    pub chosen: String,
    pub captures_key: String,
    pub time: f64,
    /// Detector captures newly fixed by this hit; two for a dual hit.
    pub captures: Vec<Capture>,
    pub strategy: BoundaryStrategy,
}

impl ReductionEvent {
    pub fn new(state: &Superposition, idx: usize, time: f64, strategy: BoundaryStrategy) -> Result<Self> {
        state.check_index(idx)?;
        let comp = &state.components[idx];
        let captures = comp
            .captures()
            .difference(state.settled)
            .map(|detector| Capture {
                detector,
                event: SpacetimeEvent::new(time, state.sites[detector]),
            })
            .collect();
        Ok(ReductionEvent {
            chosen_idx: idx,
            chosen: comp.label(),
            captures_key: comp.captures().to_string(),
            time,
            captures,
            strategy,
        })
    }

    pub fn is_dual(&self) -> bool {
        self.captures.len() >= 2
    }

    /// Location of the first capture fixed by this hit.
    pub fn event(&self) -> Option<SpacetimeEvent> {
        self.captures.first().map(|c| c.event)
    }
}

/// Keep only the chosen component, carrying the whole pre-hit modulus, then
/// rebuild the transition graph. Observed reductions make the chosen
/// component's ready brains conscious.
pub fn apply_reduction(state: &Superposition, ev: &ReductionEvent) -> Result<Superposition> {
    let idx = ev.chosen_idx;
    state.check_index(idx)?;
    let chosen = &state.components[idx];
    if chosen.phantom {
        return Err(Error::PhantomChosen(idx));
    }
    let has_inflow = state.edges.iter().any(|e| e.active && e.to == idx);
    if chosen.weight == 0.0 && !has_inflow {
        return Err(Error::EmptyChoice(idx));
    }
    if state.mode == MeasurementMode::Objective && !chosen.decoherent {
        return Err(Error::NotDecoherent(idx));
    }

    let total = crate::state::total_modulus(state);
    let mut survivor = chosen.clone();
    survivor.weight = total;
    if state.mode == MeasurementMode::Observed {
        for brain in &mut survivor.brains {
            if brain.status == BrainStatus::Ready {
                brain.status = BrainStatus::Conscious;
            }
        }
    }
    let mut next = Superposition {
        settled: survivor.captures(),
        components: vec![survivor],
        edges: Vec::new(),
        ..state.clone()
    };
    rederive(&mut next);
    Ok(next)
}
