//! Time-ordered sweep over the K components of a product flow.
//!
//! Each component's path is a sequence of segments: free flights cut at its
//! own obstacle events and region crossings. Between two consecutive cuts
//! of any component every observable of the tuple (direction census, region
//! occupancy) is constant, so estimators can integrate piecewise exactly.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::{apply_event, next_event, EventKind, EventRecord, EventSink, FlowError, FlowOptions, ParticleState, ProductState, Region};
use crate::geometry::{DirIndex, DirectionClass, DirectionVector, InternalPoint, PaperPoint};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    t: f64,
    k: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t.total_cmp(&other.t).then(self.k.cmp(&other.k))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
struct Cursor {
    // state at the start of the current leg
    st: ParticleState,
    d: DirectionVector,
    next: Option<EventRecord>,
    cuts: Vec<f64>,
    cut: usize,
    inside: bool,
    seg_t: f64,
}

impl Cursor {
    #[inline]
    fn pos_at(&self, t: f64) -> InternalPoint {
        if self.st.is_running() {
            self.st.pos.advance(self.d, t - self.st.clock)
        } else {
            self.st.pos
        }
    }

    fn next_change(&self) -> Option<f64> {
        if let Some(&t) = self.cuts.get(self.cut) {
            return Some(t);
        }
        self.next.map(|e| e.t)
    }
}

/// Tuple observables, constant between consecutive changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snapshot {
    /// Running components by direction slot.
    pub counts: [u32; 4],
    pub running: u32,
    /// Components (running or frozen) inside the region.
    pub inside: u32,
    pub k: u32,
    pub flagged: bool,
}

impl Snapshot {
    pub fn all_inside(&self) -> bool {
        self.inside == self.k
    }
}

/// The tuple on `[t0, t1]`, during which the snapshot is constant.
pub struct Piece<'a> {
    pub t0: f64,
    pub t1: f64,
    pub snap: &'a Snapshot,
    cursors: &'a [Cursor],
}

impl Piece<'_> {
    /// Paper-frame positions of every component at `t` (in `[t0, t1]`).
    pub fn positions_at(&self, t: f64, out: &mut Vec<PaperPoint>) {
        out.clear();
        out.extend(self.cursors.iter().map(|c| c.pos_at(t).to_paper()));
    }

    pub fn dir(&self, k: usize) -> DirIndex {
        self.cursors[k].st.dir
    }
}

/// One component's straight motion over `[t0, t1]` with fixed direction and
/// region occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub particle: usize,
    pub dir: DirIndex,
    pub t0: f64,
    pub t1: f64,
    /// Position at `t0`.
    pub start: InternalPoint,
    pub d: DirectionVector,
    pub inside: bool,
}

/// Callbacks driven by [`Sweep::advance_to`].
pub trait SweepObserver {
    fn piece(&mut self, _piece: &Piece<'_>) {}
    fn segment(&mut self, _seg: &Segment) {}
}

impl SweepObserver for () {}

pub struct Sweep<'t> {
    table: &'t Table,
    classes: Vec<DirectionClass>,
    region: Option<Region>,
    horizon: f64,
    max_events: u64,
    events: u64,
    now: f64,
    cursors: Vec<Cursor>,
    heap: BinaryHeap<Reverse<Key>>,
    snap: Snapshot,
    stopped_at: Option<f64>,
}

impl<'t> Sweep<'t> {
    /// Starts a sweep at the common clock of `ps` (taken from component 0).
    pub fn new(table: &'t Table, ps: &ProductState, region: Option<Region>, opts: &FlowOptions) -> Result<Self, FlowError> {
        if ps.particles.len() != ps.classes.len() {
            return Err(FlowError::LengthMismatch {
                particles: ps.particles.len(),
                classes: ps.classes.len(),
            });
        }
        if ps.particles.is_empty() {
            return Err(FlowError::Empty);
        }
        let now = ps.particles[0].clock;
        let mut sw = Sweep {
            table,
            classes: ps.classes.clone(),
            region,
            horizon: opts.horizon_for(table),
            max_events: opts.max_events,
            events: 0,
            now,
            cursors: Vec::with_capacity(ps.len()),
            heap: BinaryHeap::with_capacity(ps.len()),
            snap: Snapshot {
                counts: [0; 4],
                running: 0,
                inside: 0,
                k: ps.len() as u32,
                flagged: ps.flagged,
            },
            stopped_at: if ps.flagged { Some(now) } else { None },
        };
        for (k, p) in ps.particles.iter().enumerate() {
            let mut st = *p;
            st.clock = now;
            let d = sw.classes[k].member(st.dir);
            let mut c = Cursor {
                st,
                d,
                next: None,
                cuts: Vec::new(),
                cut: 0,
                inside: false,
                seg_t: now,
            };
            if st.is_running() {
                sw.snap.counts[st.dir.slot()] += 1;
                sw.snap.running += 1;
                c.next = Some(next_event(table, &sw.classes[k], &st, sw.horizon)?);
                sw.plan_leg(&mut c);
            }
            c.inside = sw.region_at(&c, now);
            if c.inside {
                sw.snap.inside += 1;
            }
            if let Some(t) = c.next_change() {
                sw.heap.push(Reverse(Key { t, k }));
            }
            sw.cursors.push(c);
        }
        Ok(sw)
    }

    fn plan_leg(&self, c: &mut Cursor) {
        c.cut = 0;
        c.cuts.clear();
        if let (Some(r), Some(ev)) = (&self.region, &c.next) {
            r.crossings(c.st.pos, c.d, c.st.clock, ev.t, &mut c.cuts);
        }
    }

    // occupancy on the stretch that starts at `t`
    fn region_at(&self, c: &Cursor, t: f64) -> bool {
        let Some(r) = &self.region else {
            return true;
        };
        if !c.st.is_running() {
            return r.contains(c.st.pos);
        }
        let end = c.next_change().unwrap_or(t);
        if end > t {
            r.contains(c.pos_at(0.5 * (t + end)))
        } else {
            r.contains(c.pos_at(t))
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snap
    }

    /// Time of the first component stop, if any.
    pub fn stopped_at(&self) -> Option<f64> {
        self.stopped_at
    }

    /// Obstacle events processed so far.
    pub fn events(&self) -> u64 {
        self.events
    }

    /// Time of the next change of any component.
    pub fn next_change(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0.t)
    }

    /// Current product state.
    pub fn state(&self) -> ProductState {
        let particles = self
            .cursors
            .iter()
            .map(|c| ParticleState {
                pos: c.pos_at(self.now),
                clock: self.now,
                ..c.st
            })
            .collect();
        ProductState {
            particles,
            classes: self.classes.clone(),
            flagged: self.snap.flagged,
        }
    }

    /// The segment each running component has traversed since its last
    /// change, up to the current time.
    pub fn open_segments(&self, mut f: impl FnMut(&Segment)) {
        for (k, c) in self.cursors.iter().enumerate() {
            if c.st.is_running() && self.now > c.seg_t {
                f(&Segment {
                    particle: k,
                    dir: c.st.dir,
                    t0: c.seg_t,
                    t1: self.now,
                    start: c.pos_at(c.seg_t),
                    d: c.d,
                    inside: c.inside,
                });
            }
        }
    }

    /// Runs the sweep to time `t` (no-op if `t` is not ahead).
    pub fn advance_to(&mut self, t: f64, obs: &mut impl SweepObserver, sink: &mut impl EventSink) -> Result<(), FlowError> {
        loop {
            let tc = self.next_change().unwrap_or(f64::INFINITY);
            if tc > t {
                if t > self.now {
                    obs.piece(&Piece {
                        t0: self.now,
                        t1: t,
                        snap: &self.snap,
                        cursors: &self.cursors,
                    });
                    self.now = t;
                }
                return Ok(());
            }
            if tc > self.now {
                obs.piece(&Piece {
                    t0: self.now,
                    t1: tc,
                    snap: &self.snap,
                    cursors: &self.cursors,
                });
                self.now = tc;
            }
            let Reverse(key) = self.heap.pop().unwrap();
            self.process(key.k, obs, sink)?;
        }
    }

    fn process(&mut self, k: usize, obs: &mut impl SweepObserver, sink: &mut impl EventSink) -> Result<(), FlowError> {
        let tc = self.now;
        let mut c = core::mem::replace(
            &mut self.cursors[k],
            Cursor {
                st: ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I1),
                d: DirectionVector::new(0.0, 0.0),
                next: None,
                cuts: Vec::new(),
                cut: 0,
                inside: false,
                seg_t: 0.0,
            },
        );
        if tc > c.seg_t {
            obs.segment(&Segment {
                particle: k,
                dir: c.st.dir,
                t0: c.seg_t,
                t1: tc,
                start: c.pos_at(c.seg_t),
                d: c.d,
                inside: c.inside,
            });
        }
        c.seg_t = tc;

        if c.cut < c.cuts.len() {
            c.cut += 1;
        } else if let Some(ev) = c.next.take() {
            if self.events == self.max_events {
                let mut st = c.st;
                st.pos = c.pos_at(tc);
                st.clock = tc;
                self.cursors[k] = c;
                return Err(FlowError::EventBudgetExceeded {
                    budget: self.max_events,
                    state: st,
                });
            }
            self.events += 1;
            self.snap.counts[ev.dir_before.slot()] -= 1;
            apply_event(&mut c.st, &ev);
            c.d = self.classes[k].member(c.st.dir);
            sink.record(k, &ev);
            if c.st.is_running() {
                self.snap.counts[c.st.dir.slot()] += 1;
                c.next = Some(next_event(self.table, &self.classes[k], &c.st, self.horizon)?);
                self.plan_leg(&mut c);
            } else {
                self.snap.running -= 1;
                self.snap.flagged = true;
                if self.stopped_at.is_none() {
                    self.stopped_at = Some(tc);
                }
            }
        }

        let inside = self.region_at(&c, tc);
        if inside != c.inside {
            c.inside = inside;
            if inside {
                self.snap.inside += 1;
            } else {
                self.snap.inside -= 1;
            }
            let ev = EventRecord {
                t: tc,
                kind: if inside { EventKind::RegionEntry } else { EventKind::RegionExit },
                pos: c.pos_at(tc),
                dir_before: c.st.dir,
                dir_after: c.st.dir,
            };
            sink.record(k, &ev);
        }
        if let Some(t) = c.next_change() {
            self.heap.push(Reverse(Key { t, k }));
        }
        self.cursors[k] = c;
        Ok(())
    }
}
