//! Rule-based stochastic state reduction for a pair of correlated particles
//! captured by two detectors, with the Minkowski geometry of the reduction
//! boundaries.
//!
//! - [`state`]: labeled components, weights, phantom status, templates.
//! - [`rules`]: the ready-state selection rule and reduction.
//! - [`dynamics`]: current-driven weight transfer and hit sampling.
//! - [`minkowski`]: boosts, light-cone and constant-time boundaries, region
//!   maps and hit-count invariance.
//! - [`ensemble`]: Monte Carlo ensembles and the quadrature oracle.
//! - [`config`]: scenario files.

pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod minkowski;
pub mod rules;
pub mod state;

pub use config::ScenarioConfig;
pub use dynamics::{hazard, run_scenario, sample_hit, step, CurrentModel, EdgeKey, Profile, RunLog, RunSettings};
pub use error::{Error, Result};
pub use minkowski::{BoundaryStrategy, HitPair, LorentzFrame, RegionLabel, SpacetimeEvent};
pub use rules::{apply_reduction, is_forbidden, ReductionEvent, TransitionEdge};
pub use state::{
    build_objective_template, build_observed_template, mark_phantom, total_modulus, CaptureSet, MeasurementMode,
    Superposition,
};
