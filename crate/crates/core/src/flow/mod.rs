//! Directional billiard flow, its K-fold product, and first-return flows.
//!
//! A particle moves at unit speed in one member of its [`DirectionClass`],
//! reflecting elastically off obstacle edges. Hitting a corner (within the
//! table's corner tolerance) stops the orbit, and reaching the escape
//! horizon ends it.

mod induced;
mod region;
mod sweep;

pub use induced::{induced_flow, run_induced, InducedOutcome, NEVER_RETURNS_FACTOR};
pub use region::Region;
pub use sweep::{Piece, Segment, Snapshot, Sweep, SweepObserver};

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{DirIndex, DirectionClass, InternalPoint};
use crate::table::{HitKind, InsideObstacle, Table};

/// Default cap on events per flow call.
pub const DEFAULT_MAX_EVENTS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    StoppedAtCorner,
    EscapedHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub pos: InternalPoint,
    pub dir: DirIndex,
    pub status: Status,
    /// Flow time consumed so far.
    pub clock: f64,
}

impl ParticleState {
    pub fn new(pos: InternalPoint, dir: DirIndex) -> Self {
        ParticleState {
            pos,
            dir,
            status: Status::Running,
            clock: 0.0,
        }
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    /// Same point, opposite velocity.
    pub fn reversed(&self) -> Self {
        ParticleState {
            dir: self.dir.reverse(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Reflection,
    CornerStop,
    RegionEntry,
    RegionExit,
    Horizon,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Reflection => "reflection",
            EventKind::CornerStop => "corner-stop",
            EventKind::RegionEntry => "region-entry",
            EventKind::RegionExit => "region-exit",
            EventKind::Horizon => "horizon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    /// Absolute flow time.
    pub t: f64,
    pub kind: EventKind,
    pub pos: InternalPoint,
    pub dir_before: DirIndex,
    pub dir_after: DirIndex,
}

/// Receives events as a flow produces them. `particle` is the component
/// index (always 0 for single-particle flows).
pub trait EventSink {
    fn record(&mut self, particle: usize, ev: &EventRecord);
}

impl EventSink for Vec<EventRecord> {
    fn record(&mut self, _particle: usize, ev: &EventRecord) {
        self.push(*ev);
    }
}

impl EventSink for Vec<(usize, EventRecord)> {
    fn record(&mut self, particle: usize, ev: &EventRecord) {
        self.push((particle, *ev));
    }
}

/// Discards everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullSink;

impl EventSink for NullSink {
    #[inline]
    fn record(&mut self, _particle: usize, _ev: &EventRecord) {}
}

/// Counts events by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountingSink {
    pub reflections: u64,
    pub corner_stops: u64,
    pub horizons: u64,
    pub region_crossings: u64,
}

impl EventSink for CountingSink {
    fn record(&mut self, _particle: usize, ev: &EventRecord) {
        match ev.kind {
            EventKind::Reflection => self.reflections += 1,
            EventKind::CornerStop => self.corner_stops += 1,
            EventKind::Horizon => self.horizons += 1,
            EventKind::RegionEntry | EventKind::RegionExit => self.region_crossings += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Euclidean escape distance from the origin; `None` uses `10^6 a`.
    pub horizon: Option<f64>,
    pub max_events: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            horizon: None,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

impl FlowOptions {
    pub fn horizon_for(&self, table: &Table) -> f64 {
        self.horizon.unwrap_or_else(|| table.default_horizon())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("position ({}, {}) is inside an obstacle (depth {})", .0.pos.u, .0.pos.v, .0.depth)]
    InconsistentState(InsideObstacle),
    #[error("particle is not running")]
    NotRunning,
    #[error("event budget of {budget} exceeded")]
    EventBudgetExceeded { budget: u64, state: ParticleState },
    #[error("product state and direction list differ in length ({particles} vs {classes})")]
    LengthMismatch { particles: usize, classes: usize },
    #[error("product state is empty")]
    Empty,
    #[error("component {0} starts outside the region")]
    StartOutsideRegion(usize),
    #[error("no return to the region within ambient time {budget}")]
    NeverReturns { budget: f64 },
    #[error("negative or non-finite time {0}")]
    BadTime(f64),
}

impl From<InsideObstacle> for FlowError {
    fn from(e: InsideObstacle) -> Self {
        FlowError::InconsistentState(e)
    }
}

/// The next obstacle event for a running particle, without applying it.
pub fn next_event(table: &Table, dc: &DirectionClass, st: &ParticleState, horizon: f64) -> Result<EventRecord, FlowError> {
    if !st.is_running() {
        return Err(FlowError::NotRunning);
    }
    let d = dc.member(st.dir);
    let hit = table.cast_ray(st.pos, d, horizon)?;
    let (kind, dir_after) = match hit.kind {
        HitKind::Reflection(axis) => (EventKind::Reflection, st.dir.reflect(axis)),
        HitKind::Corner => (EventKind::CornerStop, st.dir),
        HitKind::Horizon => (EventKind::Horizon, st.dir),
    };
    Ok(EventRecord {
        t: st.clock + hit.t,
        kind,
        pos: hit.pos,
        dir_before: st.dir,
        dir_after,
    })
}

/// Applies an event returned by [`next_event`].
#[inline]
pub fn apply_event(st: &mut ParticleState, ev: &EventRecord) {
    st.pos = ev.pos;
    st.clock = ev.t;
    st.dir = ev.dir_after;
    match ev.kind {
        EventKind::CornerStop => st.status = Status::StoppedAtCorner,
        EventKind::Horizon => st.status = Status::EscapedHorizon,
        _ => {}
    }
}

/// Advances `st` by flow time `t_total`, stopping early on a corner or the
/// horizon. Every event goes to `sink`.
pub fn flow(
    table: &Table,
    dc: &DirectionClass,
    st: &ParticleState,
    t_total: f64,
    opts: &FlowOptions,
    sink: &mut impl EventSink,
) -> Result<ParticleState, FlowError> {
    flow_component(table, dc, st, t_total, opts, 0, sink)
}

fn flow_component(
    table: &Table,
    dc: &DirectionClass,
    st: &ParticleState,
    t_total: f64,
    opts: &FlowOptions,
    index: usize,
    sink: &mut impl EventSink,
) -> Result<ParticleState, FlowError> {
    if !(t_total >= 0.0 && t_total.is_finite()) {
        return Err(FlowError::BadTime(t_total));
    }
    let mut st = *st;
    if !st.is_running() || t_total == 0.0 {
        return Ok(st);
    }
    let horizon = opts.horizon_for(table);
    let end = st.clock + t_total;
    let mut events = 0u64;
    loop {
        let ev = next_event(table, dc, &st, horizon)?;
        if ev.t > end {
            let d = dc.member(st.dir);
            st.pos = st.pos.advance(d, end - st.clock);
            st.clock = end;
            return Ok(st);
        }
        if events == opts.max_events {
            return Err(FlowError::EventBudgetExceeded {
                budget: opts.max_events,
                state: st,
            });
        }
        events += 1;
        apply_event(&mut st, &ev);
        sink.record(index, &ev);
        if !st.is_running() {
            return Ok(st);
        }
    }
}

/// State of the K-fold product flow.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub particles: Vec<ParticleState>,
    pub classes: Vec<DirectionClass>,
    /// Set once any component has stopped; statistics exclude flagged tuples
    /// from the stop time on.
    pub flagged: bool,
}

impl ProductState {
    pub fn new(particles: Vec<ParticleState>, classes: Vec<DirectionClass>) -> Result<Self, FlowError> {
        if particles.len() != classes.len() {
            return Err(FlowError::LengthMismatch {
                particles: particles.len(),
                classes: classes.len(),
            });
        }
        if particles.is_empty() {
            return Err(FlowError::Empty);
        }
        let flagged = particles.iter().any(|p| !p.is_running());
        Ok(ProductState { particles, classes, flagged })
    }

    /// All components in the same class.
    pub fn uniform(particles: Vec<ParticleState>, dc: DirectionClass) -> Result<Self, FlowError> {
        let n = particles.len();
        ProductState::new(particles, alloc::vec![dc; n])
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn running(&self) -> usize {
        self.particles.iter().filter(|p| p.is_running()).count()
    }
}

/// Product flow by the same time `t_total` in every component. A component
/// that stops stays frozen while the others continue, and the tuple is
/// flagged.
pub fn flow_product(
    table: &Table,
    ps: &ProductState,
    t_total: f64,
    opts: &FlowOptions,
    sink: &mut impl EventSink,
) -> Result<ProductState, FlowError> {
    let mut out = ps.clone();
    for (k, (p, dc)) in ps.particles.iter().zip(&ps.classes).enumerate() {
        let next = flow_component(table, dc, p, t_total, opts, k, sink)?;
        out.particles[k] = if next.is_running() {
            next
        } else {
            // a frozen component keeps accruing ambient time
            ParticleState {
                clock: p.clock + t_total,
                ..next
            }
        };
    }
    out.flagged = out.particles.iter().any(|p| !p.is_running());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Configuration;
    use crate::geometry::PaperPoint;
    use alloc::vec;

    fn class() -> DirectionClass {
        DirectionClass::new(1.0).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let t = Table::new(&Configuration::empty(1.0).unwrap());
        let st = ParticleState::new(InternalPoint::new(0.3, 0.2), DirIndex::I2);
        let out = flow(&t, &class(), &st, 0.0, &FlowOptions::default(), &mut NullSink).unwrap();
        assert_eq!(out, st);
    }

    #[test]
    fn free_flight_in_empty_table() {
        let t = Table::new(&Configuration::empty(1.0).unwrap());
        let dc = class();
        let st = ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I1);
        let mut evs: Vec<EventRecord> = Vec::new();
        let out = flow(&t, &dc, &st, 5.0, &FlowOptions::default(), &mut evs).unwrap();
        assert!(evs.is_empty());
        assert!((out.pos.u - 5.0 * 1f64.cos()).abs() < 1e-12);
        assert!((out.pos.v - 5.0 * 1f64.sin()).abs() < 1e-12);
        assert_eq!(out.clock, 5.0);
    }

    #[test]
    fn ring_traps_orbit() {
        let g = Configuration::make_ringed(&Configuration::empty(1.0).unwrap(), 1).unwrap();
        let t = Table::new(&g);
        let st = ParticleState::new(InternalPoint::new(0.1, -0.05), DirIndex::I1);
        let mut evs: Vec<EventRecord> = Vec::new();
        let out = flow(&t, &class(), &st, 1e3, &FlowOptions::default(), &mut evs).unwrap();
        assert!(out.is_running());
        assert!(evs.len() > 500);
        for e in &evs {
            assert!(e.pos.to_paper().l1_norm() <= 2.0);
            assert_eq!(e.kind, EventKind::Reflection);
        }
        let mut last = 0.0;
        for e in &evs {
            assert!(e.t > last);
            last = e.t;
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = Configuration::make_ringed(&Configuration::empty(1.0).unwrap(), 1).unwrap();
        let t = Table::new(&g);
        let st = ParticleState::new(InternalPoint::new(0.1, -0.05), DirIndex::I1);
        let opts = FlowOptions {
            max_events: 10,
            ..FlowOptions::default()
        };
        match flow(&t, &class(), &st, 1e3, &opts, &mut NullSink) {
            Err(FlowError::EventBudgetExceeded { budget, state }) => {
                assert_eq!(budget, 10);
                assert!(state.clock > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horizon_ends_flight() {
        let t = Table::new(&Configuration::explicit(1.0, vec![PaperPoint::new(40.0, 0.0)]).unwrap());
        let st = ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I2);
        let opts = FlowOptions {
            horizon: Some(10.0),
            ..FlowOptions::default()
        };
        let mut evs: Vec<EventRecord> = Vec::new();
        let out = flow(&t, &class(), &st, 100.0, &opts, &mut evs).unwrap();
        assert_eq!(out.status, Status::EscapedHorizon);
        assert_eq!(evs.len(), 1);
        assert!((out.pos.norm() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn stopped_component_freezes() {
        let t = Table::new(&Configuration::empty(1.0).unwrap());
        let dc = class();
        let stopped = ParticleState {
            status: Status::StoppedAtCorner,
            ..ParticleState::new(InternalPoint::new(1.0, 1.0), DirIndex::I1)
        };
        let moving = ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I1);
        let ps = ProductState::uniform(vec![stopped, moving], dc).unwrap();
        assert!(ps.flagged);
        let out = flow_product(&t, &ps, 2.0, &FlowOptions::default(), &mut NullSink).unwrap();
        assert_eq!(out.particles[0].pos, stopped.pos);
        assert_eq!(out.particles[0].clock, 2.0);
        assert!((out.particles[1].pos.u - 2.0 * 1f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn not_running_is_an_error() {
        let t = Table::new(&Configuration::empty(1.0).unwrap());
        let st = ParticleState {
            status: Status::EscapedHorizon,
            ..ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I1)
        };
        assert_eq!(next_event(&t, &class(), &st, 1.0), Err(FlowError::NotRunning));
    }
}
