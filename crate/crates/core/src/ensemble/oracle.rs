//! Selection probabilities of the first stochastic hit by quadrature.
//!
//! For competitors `n` with hazard `h_n(t) = max(J_n(t), 0) / s`, the chance
//! that `n` is chosen first before the horizon `T` is
//!
//! ```text
//! P_n = ∫_0^T h_n(t) exp(-H(t)) dt,   H(t) = ∫_0^t Σ_m h_m(u) du
//! ```
//!
//! and the chance of no hit is `exp(-H(T))`. Both integrals use composite
//! 5-point Gauss-Legendre rules on panels split at profile breakpoints, with
//! the panel count doubled until the results settle. This never touches the
//! time-stepping code.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{CurrentModel, EdgeKey};
use crate::error::{Error, Result};
use crate::state::CaptureSet;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    128.0 / 225.0,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

const TOLERANCE: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// First-hit probability by capture key (e.g. `"10"`).
    pub probabilities: BTreeMap<String, f64>,
    pub survival: f64,
}

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(&x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

struct Race<'a> {
    model: &'a CurrentModel,
    edges: &'a [EdgeKey],
    competitors: Vec<CaptureSet>,
    s: f64,
}

impl Race<'_> {
    fn rate(&self, n: usize, t: f64) -> f64 {
        let c = self.competitors[n];
        let net: f64 = self
            .edges
            .iter()
            .map(|e| {
                let j = self.model.current(e, t);
                if e.to == c {
                    j
                } else if e.from == c {
                    -j
                } else {
                    0.0
                }
            })
            .sum();
        net.max(0.0) / self.s
    }

    fn total(&self, t: f64) -> f64 {
        (0..self.competitors.len()).map(|n| self.rate(n, t)).sum()
    }

    /// Probabilities and survival using `panels` panels per smooth piece.
    fn integrate(&self, pieces: &[(f64, f64)], panels: usize) -> (Vec<f64>, f64) {
        let mut probs = vec![0.0; self.competitors.len()];
        let mut cumulative = 0.0;
        for &(a, b) in pieces {
            let h = (b - a) / panels as f64;
            for k in 0..panels {
                let lo = a + k as f64 * h;
                let hi = lo + h;
                let half = 0.5 * h;
                let mid = lo + half;
                for (&x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                    let t = mid + half * x;
                    let inner = cumulative + gauss_legendre(|u| self.total(u), lo, t);
                    let survive = (-inner).exp();
                    for (n, p) in probs.iter_mut().enumerate() {
                        *p += w * half * self.rate(n, t) * survive;
                    }
                }
                cumulative += gauss_legendre(|u| self.total(u), lo, hi);
            }
        }
        (probs, (-cumulative).exp())
    }
}

/// First-hit probabilities over `[0, horizon]` for a race along `edges`
/// with constant total modulus `s`. Every edge target is a competitor.
pub fn selection_probability_oracle(
    model: &CurrentModel,
    edges: &[EdgeKey],
    s: f64,
    horizon: f64,
) -> Result<OracleResult> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::ZeroModulus);
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::NonIntegrable(format!("horizon {horizon}")));
    }
    let mut competitors: Vec<CaptureSet> = edges.iter().map(|e| e.to).collect();
    competitors.sort();
    competitors.dedup();
    let race = Race {
        model,
        edges,
        competitors,
        s,
    };

    let mut cuts = vec![0.0, horizon];
    for e in edges {
        if let Some(p) = model.profile(e) {
            cuts.extend(p.breakpoints().into_iter().filter(|&b| b > 0.0 && b < horizon));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();

    let mut panels = 4;
    let mut prev = race.integrate(&pieces, panels);
    loop {
        panels *= 2;
        let next = race.integrate(&pieces, panels);
        let change = next
            .0
            .iter()
            .zip(&prev.0)
            .map(|(a, b)| (a - b).abs())
            .fold((next.1 - prev.1).abs(), f64::max);
        if !change.is_finite() || next.0.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonIntegrable("non-finite hazard".into()));
        }
        prev = next;
        if change < TOLERANCE {
            break;
        }
        if panels >= MAX_PANELS {
            return Err(Error::NonIntegrable(format!("no convergence (change {change:e})")));
        }
    }

    let probabilities = race
        .competitors
        .iter()
        .zip(prev.0)
        .map(|(c, p)| (c.to_string(), p))
        .collect();
    Ok(OracleResult {
        probabilities,
        survival: prev.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Profile;

    fn keys(list: &[&str]) -> Vec<EdgeKey> {
        list.iter().map(|k| k.parse().unwrap()).collect()
    }

    #[test]
    fn symmetric_window_closed_form() {
        let w = Profile::Window {
            rate: 0.5,
            start: 0.0,
            stop: 1.0,
        };
        let model = CurrentModel::new().with("00->10", w).with("00->01", w);
        let r = selection_probability_oracle(&model, &keys(&["00->10", "00->01"]), 1.0, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((r.survival - e).abs() < 1e-12);
        assert!((r.probabilities["10"] - (1.0 - e) / 2.0).abs() < 1e-10);
        assert!((r.probabilities["01"] - (1.0 - e) / 2.0).abs() < 1e-10);
        // a longer horizon adds nothing once the window has closed
        let r2 = selection_probability_oracle(&model, &keys(&["00->10", "00->01"]), 1.0, 3.0).unwrap();
        assert!((r2.survival - e).abs() < 1e-12);
    }

    #[test]
    fn zero_edge_never_fires() {
        let model = CurrentModel::new().with("00->10", Profile::Constant { rate: 0.0 });
        let r = selection_probability_oracle(&model, &keys(&["00->10"]), 1.0, 2.0).unwrap();
        assert_eq!(r.probabilities["10"], 0.0);
        assert_eq!(r.survival, 1.0);
    }

    #[test]
    fn proportional_hazards() {
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 0.8 })
            .with("00->01", Profile::Constant { rate: 0.4 });
        let r = selection_probability_oracle(&model, &keys(&["00->10", "00->01"]), 1.0, 1.5).unwrap();
        assert!((r.probabilities["10"] - 2.0 * r.probabilities["01"]).abs() < 1e-12);
        // closed form: (2/3) (1 - e^{-1.8})
        assert!((r.probabilities["10"] - 2.0 / 3.0 * (1.0 - (-1.8f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn gaussian_pulse_mass() {
        // a full pulse integrates to peak * width * sqrt(2 pi)
        let g = Profile::GaussianPulse {
            peak: 0.5,
            center: 5.0,
            width: 0.5,
        };
        let model = CurrentModel::new().with("00->10", g);
        let r = selection_probability_oracle(&model, &keys(&["00->10"]), 1.0, 10.0).unwrap();
        let mass = 0.5 * 0.5 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.survival - (-mass).exp()).abs() < 1e-9);
        assert!((r.probabilities["10"] + r.survival - 1.0).abs() < 1e-9);
    }

    #[test]
    fn outflow_cancels_inflow() {
        let model = CurrentModel::new()
            .with("00->10", Profile::Constant { rate: 0.3 })
            .with("10->11", Profile::Constant { rate: 0.5 });
        let r = selection_probability_oracle(&model, &keys(&["00->10", "10->11"]), 1.0, 1.0).unwrap();
        assert_eq!(r.probabilities["10"], 0.0);
        assert!((r.probabilities["11"] - (1.0 - (-0.5f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let model = CurrentModel::new();
        assert!(selection_probability_oracle(&model, &[], 0.0, 1.0).is_err());
        assert!(selection_probability_oracle(&model, &[], 1.0, f64::NAN).is_err());
        let bad = CurrentModel::new().with("00->10", Profile::Constant { rate: f64::INFINITY });
        assert!(selection_probability_oracle(&bad, &keys(&["00->10"]), 1.0, 1.0).is_err());
    }
}
