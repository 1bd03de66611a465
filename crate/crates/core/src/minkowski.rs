//! 1+1 Minkowski geometry in units with c = 1: boosts, intervals, and the
//! two ways of drawing reduction boundaries around stochastic hits.
//!
//! Hellwig-Kraus boundaries follow the backward light cone of each hit and
//! are the same in every inertial frame. Aharonov-Albert boundaries follow
//! the constant-time line through the hit in the evaluation frame, so the
//! label of a given event can change with the frame.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::RunLog;
use crate::error::{Error, Result};
use crate::rules::ReductionEvent;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: f64,
}

impl SpacetimeEvent {
    pub const fn new(t: f64, x: f64) -> Self {
        SpacetimeEvent { t, x }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzFrame {
    v: f64,
}

impl LorentzFrame {
    pub const REST: LorentzFrame = LorentzFrame { v: 0.0 };

    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && v.abs() < 1.0 {
            Ok(LorentzFrame { v })
        } else {
            Err(Error::Superluminal(v))
        }
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.v * self.v).sqrt()
    }

    pub fn inverse(&self) -> LorentzFrame {
        LorentzFrame { v: -self.v }
    }

    /// Coordinates of `ev` as seen from this frame.
    pub fn boost(&self, ev: SpacetimeEvent) -> SpacetimeEvent {
        let g = self.gamma();
        SpacetimeEvent {
            t: g * (ev.t - self.v * ev.x),
            x: g * (ev.x - self.v * ev.t),
        }
    }
}

pub fn boost(ev: SpacetimeEvent, v: f64) -> Result<SpacetimeEvent> {
    Ok(LorentzFrame::new(v)?.boost(ev))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interval {
    Timelike { proper_time: f64 },
    Lightlike,
    Spacelike,
}

pub fn interval(a: SpacetimeEvent, b: SpacetimeEvent) -> Interval {
    let dt = b.t - a.t;
    let dx = b.x - a.x;
    let (tt, xx) = (dt * dt, dx * dx);
    let scale = tt + xx;
    let sq = tt - xx;
    if sq.abs() <= 1e-12 * scale {
        Interval::Lightlike
    } else if sq > 0.0 {
        Interval::Timelike { proper_time: sq.sqrt() }
    } else {
        Interval::Spacelike
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStrategy {
    AharonovAlbert,
    HellwigKraus,
}

/// Which of the four solution regions an event lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    PreBoth,
    PostAOnly,
    PostBOnly,
    PostBoth,
}

impl RegionLabel {
    pub fn from_flags(post_a: bool, post_b: bool) -> Self {
        match (post_a, post_b) {
            (false, false) => RegionLabel::PreBoth,
            (true, false) => RegionLabel::PostAOnly,
            (false, true) => RegionLabel::PostBOnly,
            (true, true) => RegionLabel::PostBoth,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::PreBoth => "pre_both",
            RegionLabel::PostAOnly => "post_a_only",
            RegionLabel::PostBOnly => "post_b_only",
            RegionLabel::PostBoth => "post_both",
        }
    }

    pub fn code(&self) -> u8 {
        *self as u8
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hit on detector A and hit on detector B; `None` when that detector never
/// fired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HitPair {
    pub a: Option<SpacetimeEvent>,
    pub b: Option<SpacetimeEvent>,
}

impl HitPair {
    pub fn new(a: Option<SpacetimeEvent>, b: Option<SpacetimeEvent>) -> Self {
        HitPair { a, b }
    }

    pub fn boosted(&self, frame: &LorentzFrame) -> HitPair {
        HitPair {
            a: self.a.map(|h| frame.boost(h)),
            b: self.b.map(|h| frame.boost(h)),
        }
    }

    /// First capture of each detector recorded in a run.
    pub fn from_hits(hits: &[ReductionEvent]) -> HitPair {
        let mut pair = HitPair::default();
        for cap in hits.iter().flat_map(|h| &h.captures) {
            let slot = if cap.detector == 0 { &mut pair.a } else { &mut pair.b };
            slot.get_or_insert(cap.event);
        }
        pair
    }
}

/// Time of the backward light cone of `hit` at position `x`.
pub fn hk_boundary_time(hit: SpacetimeEvent, x: f64) -> f64 {
    hit.t - (x - hit.x).abs()
}

/// Light-cone surfaces belong to the reduced region.
pub fn classify_hk(ev: SpacetimeEvent, hits: &HitPair) -> RegionLabel {
    let post = |h: Option<SpacetimeEvent>| h.is_some_and(|h| ev.t >= hk_boundary_time(h, ev.x));
    RegionLabel::from_flags(post(hits.a), post(hits.b))
}

pub fn classify_aa(ev: SpacetimeEvent, hits: &HitPair, frame: &LorentzFrame) -> RegionLabel {
    let ev = frame.boost(ev);
    let hits = hits.boosted(frame);
    let post = |h: Option<SpacetimeEvent>| h.is_some_and(|h| ev.t >= h.t);
    RegionLabel::from_flags(post(hits.a), post(hits.b))
}

pub fn classify(strategy: BoundaryStrategy, ev: SpacetimeEvent, hits: &HitPair, frame: &LorentzFrame) -> RegionLabel {
    match strategy {
        BoundaryStrategy::HellwigKraus => classify_hk(ev, hits),
        BoundaryStrategy::AharonovAlbert => classify_aa(ev, hits, frame),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCount {
    pub velocity: f64,
    pub count: usize,
}

/// A hit whose boundary count in some frame differs from its home frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub hit: usize,
    pub home_count: usize,
    pub velocity: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub frames: Vec<FrameCount>,
    pub invariant: bool,
    /// The common count, when invariant.
    pub count: Option<usize>,
    pub anomalies: Vec<Anomaly>,
}

/// Boundaries generated by one hit as seen from `frame`: captures that are
/// simultaneous there form a single boundary.
fn boundaries_of(hit: &ReductionEvent, frame: &LorentzFrame) -> usize {
    let mut times: Vec<f64> = hit.captures.iter().map(|c| frame.boost(c.event).t).collect();
    times.sort_by(f64::total_cmp);
    let distinct = times
        .windows(2)
        .filter(|w| (w[1] - w[0]).abs() > 1e-12 * (1.0 + w[0].abs().max(w[1].abs())))
        .count()
        + usize::from(!times.is_empty());
    distinct.max(1)
}

pub fn boundary_count(hits: &[ReductionEvent], frame: &LorentzFrame) -> usize {
    hits.iter().map(|h| boundaries_of(h, frame)).sum()
}

/// Count the reduction boundaries a run implies in each frame. With no
/// frames given, only the rest frame of the log is used.
pub fn invariance_report(log: &RunLog, frames: &[LorentzFrame]) -> InvarianceReport {
    hit_invariance(&log.hits, frames)
}

pub fn hit_invariance(hits: &[ReductionEvent], frames: &[LorentzFrame]) -> InvarianceReport {
    let frames: Vec<LorentzFrame> = if frames.is_empty() {
        vec![LorentzFrame::REST]
    } else {
        frames.to_vec()
    };
    let counts: Vec<FrameCount> = frames
        .iter()
        .map(|f| FrameCount {
            velocity: f.velocity(),
            count: boundary_count(hits, f),
        })
        .collect();
    let mut anomalies = Vec::new();
    for (i, hit) in hits.iter().enumerate() {
        let home = boundaries_of(hit, &LorentzFrame::REST);
        for f in &frames {
            let count = boundaries_of(hit, f);
            if count != home {
                anomalies.push(Anomaly {
                    hit: i,
                    home_count: home,
                    velocity: f.velocity(),
                    count,
                });
            }
        }
    }
    let home = boundary_count(hits, &LorentzFrame::REST);
    let invariant = anomalies.is_empty() && counts.iter().all(|c| c.count == home);
    InvarianceReport {
        frames: counts,
        invariant,
        count: invariant.then_some(home),
        anomalies,
    }
}

/// Rectangular sampling grid in home-frame coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
    pub nt: usize,
    pub nx: usize,
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// `t0,t1,x0,x1,nt,nx`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("grid {s:?} must be t0,t1,x0,x1,nt,nx"));
        if parts.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| parts[i].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        let n = |i: usize| parts[i].parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(bad);
        Ok(GridSpec {
            t0: f(0)?,
            t1: f(1)?,
            x0: f(2)?,
            x1: f(3)?,
            nt: n(4)?,
            nx: n(5)?,
        })
    }
}

fn lerp(a: f64, b: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        a
    } else {
        a + (b - a) * i as f64 / (n - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSample {
    pub t: f64,
    pub x: f64,
    pub label: RegionLabel,
}

/// Row-major over time, then position.
pub fn region_map(
    grid: &GridSpec,
    strategy: BoundaryStrategy,
    hits: &HitPair,
    frame: &LorentzFrame,
) -> Vec<RegionSample> {
    let mut out = Vec::with_capacity(grid.nt * grid.nx);
    for i in 0..grid.nt {
        let t = lerp(grid.t0, grid.t1, i, grid.nt);
        for j in 0..grid.nx {
            let x = lerp(grid.x0, grid.x1, j, grid.nx);
            let label = classify(strategy, SpacetimeEvent::new(t, x), hits, frame);
            out.push(RegionSample { t, x, label });
        }
    }
    out
}

pub fn write_region_csv<W: Write>(mut w: W, samples: &[RegionSample]) -> io::Result<()> {
    writeln!(w, "t,x,label")?;
    for s in samples {
        writeln!(w, "{},{},{}", s.t, s.x, s.label)?;
    }
    Ok(())
}

/// Weights of every component observed at one event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldlinePoint {
    pub event: SpacetimeEvent,
    pub weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalChange {
    /// Change of the component's weight over the total modulus at the start.
    pub ds_over_s: f64,
    pub proper_time: Option<f64>,
    /// `ds_over_s` per unit proper time, for timelike separations.
    pub rate: Option<f64>,
}

/// Weights are frame scalars; only the separation of the two events is
/// transformed.
pub fn fractional_change(
    from: &WorldlinePoint,
    to: &WorldlinePoint,
    component: usize,
    frame: &LorentzFrame,
) -> FractionalChange {
    let s: f64 = from.weights.iter().sum();
    let ds_over_s = (to.weights[component] - from.weights[component]) / s;
    let proper_time = match interval(frame.boost(from.event), frame.boost(to.event)) {
        Interval::Timelike { proper_time } => Some(proper_time),
        _ => None,
    };
    FractionalChange {
        ds_over_s,
        proper_time,
        rate: proper_time.map(|tau| ds_over_s / tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(t: f64, x: f64) -> SpacetimeEvent {
        SpacetimeEvent::new(t, x)
    }

    #[test]
    fn boost_examples() {
        let e = ev(5.0, 2.0);
        assert_eq!(boost(e, 0.0).unwrap(), e);
        assert_eq!(boost(ev(0.0, 0.0), 0.73).unwrap(), ev(0.0, 0.0));
        // gamma = 1.25: t' = 1.25 * (5 - 1.2), x' = 1.25 * (2 - 3)
        let b = boost(e, 0.6).unwrap();
        assert!((b.t - 4.75).abs() < 1e-12);
        assert!((b.x + 1.25).abs() < 1e-12);
        assert_eq!(boost(e, 1.0), Err(Error::Superluminal(1.0)));
        assert!(boost(e, -1.5).is_err());
        assert!(LorentzFrame::new(f64::NAN).is_err());
    }

    #[test]
    fn interval_examples() {
        assert_eq!(
            interval(ev(0.0, 0.0), ev(1.0, 0.0)),
            Interval::Timelike { proper_time: 1.0 }
        );
        assert_eq!(interval(ev(0.0, 0.0), ev(1.0, 1.0)), Interval::Lightlike);
        assert_eq!(interval(ev(0.0, 0.0), ev(1.0, 2.0)), Interval::Spacelike);
    }

    #[test]
    fn hk_boundary_examples() {
        assert_eq!(hk_boundary_time(ev(5.0, 2.0), 2.0), 5.0);
        assert_eq!(hk_boundary_time(ev(5.0, 2.0), 6.0), 1.0);
        assert_eq!(hk_boundary_time(ev(0.0, 0.0), -3.0), -3.0);
    }

    #[test]
    fn hk_classification() {
        let hits = HitPair::new(Some(ev(5.0, 2.0)), Some(ev(6.0, 10.0)));
        assert_eq!(classify_hk(ev(0.0, 6.0), &hits), RegionLabel::PreBoth);
        assert_eq!(classify_hk(ev(3.0, 4.0), &hits), RegionLabel::PostBoth);
        // on A's cone surface, still inside B's backward cone
        let late_b = HitPair::new(Some(ev(5.0, 2.0)), Some(ev(30.0, 10.0)));
        assert_eq!(classify_hk(ev(4.0, 3.0), &late_b), RegionLabel::PostAOnly);
        assert_eq!(classify_hk(ev(3.999, 3.0), &late_b), RegionLabel::PreBoth);
        assert_eq!(classify_hk(ev(40.0, 0.0), &late_b), RegionLabel::PostBoth);

        let single = HitPair::new(Some(ev(5.0, 2.0)), None);
        for t in [-10.0, 0.0, 3.0, 5.0, 20.0] {
            for x in [-5.0, 2.0, 9.0] {
                assert_ne!(classify_hk(ev(t, x), &single), RegionLabel::PostBOnly);
            }
        }
    }

    #[test]
    fn aa_classification() {
        let hits = HitPair::new(Some(ev(1.0, 0.0)), Some(ev(2.0, 10.0)));
        assert_eq!(
            classify_aa(ev(3.0, 5.0), &hits, &LorentzFrame::REST),
            RegionLabel::PostBoth
        );
        assert_eq!(
            classify_aa(ev(1.0, -4.0), &hits, &LorentzFrame::REST),
            RegionLabel::PostAOnly
        );

        let a = ev(0.0, 0.0);
        let b = ev(1.0, 10.0);
        let x = ev(-0.01, 0.0);
        let hits = HitPair::new(Some(a), Some(b));
        assert_eq!(classify_aa(x, &hits, &LorentzFrame::REST), RegionLabel::PreBoth);
        let moving = LorentzFrame::new(0.5).unwrap();
        assert_eq!(classify_aa(x, &hits, &moving), RegionLabel::PostBOnly);
    }

    fn fake_hit(captures: &[(usize, f64, f64)]) -> ReductionEvent {
        ReductionEvent {
            chosen_idx: 0,
            chosen: String::new(),
            captures_key: String::new(),
            time: captures[0].1,
            captures: captures
                .iter()
                .map(|&(detector, t, x)| crate::rules::Capture {
                    detector,
                    event: ev(t, x),
                })
                .collect(),
            strategy: BoundaryStrategy::HellwigKraus,
        }
    }

    #[test]
    fn invariance_counts() {
        let frames: Vec<LorentzFrame> = [-0.8, -0.4, 0.0, 0.4, 0.8]
            .iter()
            .map(|&v| LorentzFrame::new(v).unwrap())
            .collect();
        let seq = vec![fake_hit(&[(0, 1.0, 0.0)]), fake_hit(&[(1, 1.5, 10.0)])];
        let rep = hit_invariance(&seq, &frames);
        assert!(rep.invariant);
        assert_eq!(rep.count, Some(2));

        let dual = vec![fake_hit(&[(0, 1.0, 0.0), (1, 1.0, 10.0)])];
        let rep = hit_invariance(&dual, &[LorentzFrame::REST, LorentzFrame::new(0.5).unwrap()]);
        assert!(!rep.invariant);
        assert_eq!(rep.frames[0].count, 1);
        assert_eq!(rep.frames[1].count, 2);
        assert_eq!(rep.anomalies.len(), 1);
        assert_eq!(rep.anomalies[0].home_count, 1);

        let rep = hit_invariance(&[], &frames);
        assert!(rep.invariant);
        assert_eq!(rep.count, Some(0));

        let rep = hit_invariance(&dual, &[]);
        assert!(rep.invariant);
        assert_eq!(rep.frames.len(), 1);
    }

    #[test]
    fn grid_parsing_and_csv() {
        let g: GridSpec = "0,10,-5,5,3,2".parse().unwrap();
        assert_eq!(g.nt, 3);
        assert!("0,10,-5,5,3".parse::<GridSpec>().is_err());
        assert!("0,10,-5,5,0,2".parse::<GridSpec>().is_err());
        assert!("a,10,-5,5,3,2".parse::<GridSpec>().is_err());
        let hits = HitPair::new(Some(ev(5.0, 0.0)), None);
        let samples = region_map(&g, BoundaryStrategy::HellwigKraus, &hits, &LorentzFrame::REST);
        assert_eq!(samples.len(), 6);
        assert_eq!(samples[5].t, 10.0);
        assert_eq!(samples[5].x, 5.0);
        let mut buf = Vec::new();
        write_region_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,label\n0,-5,post_a_only\n0,5,post_a_only\n5,-5,post_a_only\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn fractional_change_basics() {
        let a = WorldlinePoint {
            event: ev(0.0, 1.0),
            weights: vec![0.75, 0.25],
        };
        let b = WorldlinePoint {
            event: ev(2.0, 1.0),
            weights: vec![0.5, 0.5],
        };
        let fc = fractional_change(&a, &b, 1, &LorentzFrame::REST);
        assert_eq!(fc.ds_over_s, 0.25);
        assert_eq!(fc.proper_time, Some(2.0));
        assert_eq!(fc.rate, Some(0.125));
        let c = WorldlinePoint {
            event: ev(0.0, 5.0),
            ..b
        };
        assert_eq!(fractional_change(&a, &c, 1, &LorentzFrame::REST).rate, None);
    }

    proptest! {
        #[test]
        fn boost_round_trip(t in -100.0..100.0f64, x in -100.0..100.0f64, v in -0.99..0.99f64) {
            let f = LorentzFrame::new(v).unwrap();
            let back = f.inverse().boost(f.boost(ev(t, x)));
            prop_assert!((back.t - t).abs() <= 1e-12 * (1.0 + t.abs().max(x.abs())) * 100.0);
            prop_assert!((back.x - x).abs() <= 1e-12 * (1.0 + t.abs().max(x.abs())) * 100.0);
        }

        #[test]
        fn interval_is_invariant(t1 in -10.0..10.0f64, x1 in -10.0..10.0f64,
                                 t2 in -10.0..10.0f64, x2 in -10.0..10.0f64, v in -0.9..0.9f64) {
            let f = LorentzFrame::new(v).unwrap();
            let (a, b) = (ev(t1, x1), ev(t2, x2));
            let home = interval(a, b);
            let moved = interval(f.boost(a), f.boost(b));
            match (home, moved) {
                (Interval::Timelike { proper_time: p }, Interval::Timelike { proper_time: q }) => {
                    prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p) * 1e3);
                }
                (h, m) => prop_assert_eq!(h, m),
            }
        }

        #[test]
        fn hk_labels_survive_boosts(t in -20.0..20.0f64, x in -20.0..20.0f64,
                                   ta in -20.0..20.0f64, xa in -20.0..20.0f64,
                                   tb in -20.0..20.0f64, xb in -20.0..20.0f64, v in -0.99..0.99f64) {
            let f = LorentzFrame::new(v).unwrap();
            let hits = HitPair::new(Some(ev(ta, xa)), Some(ev(tb, xb)));
            prop_assert_eq!(classify_hk(f.boost(ev(t, x)), &hits.boosted(&f)), classify_hk(ev(t, x), &hits));
        }
    }
}
