use alloc::vec::Vec;

use super::{AverageSeries, SeriesMeta, StatsError};
use crate::flow::{run_induced, EventSink, FlowOptions, Piece, ProductState, Region, Sweep, SweepObserver};
use crate::geometry::{DirIndex, PaperPoint};
use crate::quad::adaptive_simpson;
use crate::table::Table;

/// Induced-time averages of the restricted direction counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffRun {
    /// Induced times of the samples.
    pub taus: Vec<f64>,
    /// `(1/τ) ∫ f_i^A dτ`, between 0 and K.
    pub raw: Vec<[f64; 4]>,
    /// `raw / K`; the four entries sum to one.
    pub fractions: Vec<[f64; 4]>,
    /// Ambient time consumed.
    pub full_time: f64,
    /// Induced time reached (short of the target only if censored).
    pub internal_time: f64,
    pub censored_at: Option<f64>,
    pub events: u64,
    pub k: usize,
}

impl BirkhoffRun {
    /// Series for direction `i`: raw average as the value, fractions as the
    /// per-direction columns.
    pub fn series(&self, i: DirIndex, digest: u64) -> AverageSeries {
        AverageSeries {
            times: self.taus.clone(),
            values: self.raw.iter().map(|r| Some(r[i.slot()])).collect(),
            per_direction: self.fractions.clone(),
            meta: SeriesMeta {
                t_total: self.internal_time,
                k: self.k,
                seed: None,
                config_digest: digest,
            },
        }
    }

    pub fn final_fractions(&self) -> Option<[f64; 4]> {
        self.fractions.last().copied()
    }
}

struct InducedCounts {
    acc: [f64; 4],
}

impl SweepObserver for InducedCounts {
    #[inline]
    fn piece(&mut self, p: &Piece<'_>) {
        if p.snap.all_inside() && !p.snap.flagged {
            let dt = p.t1 - p.t0;
            for s in 0..4 {
                self.acc[s] += p.snap.counts[s] as f64 * dt;
            }
        }
    }
}

/// Birkhoff averages of `f_i^A` along the first-return flow to
/// `region × … × region`, sampled every `sample_dtau` of induced time.
pub fn induced_birkhoff(
    table: &Table,
    ps0: &ProductState,
    region: &Region,
    tau_total: f64,
    sample_dtau: f64,
    opts: &FlowOptions,
    sink: &mut impl EventSink,
) -> Result<BirkhoffRun, StatsError> {
    if !(tau_total >= 0.0 && tau_total.is_finite()) {
        return Err(StatsError::BadParameter("tau must be non-negative and finite"));
    }
    for (k, p) in ps0.particles.iter().enumerate() {
        if !region.contains(p.pos) {
            return Err(crate::flow::FlowError::StartOutsideRegion(k).into());
        }
    }
    let k = ps0.len();
    let start = ps0.particles.first().map(|p| p.clock).unwrap_or(0.0);
    let mut sweep = Sweep::new(table, ps0, Some(region.clone()), opts)?;
    let mut o = InducedCounts { acc: [0.0; 4] };
    let mut run = BirkhoffRun {
        taus: Vec::new(),
        raw: Vec::new(),
        fractions: Vec::new(),
        full_time: 0.0,
        internal_time: 0.0,
        censored_at: None,
        events: 0,
        k,
    };
    let mut tau = 0.0;
    for target in super::sample_grid(tau_total, sample_dtau) {
        let got = run_induced(&mut sweep, target - tau, &mut o, sink)?;
        let done = got >= target - tau;
        tau = if done { target } else { tau + got };
        if tau > 0.0 {
            let raw = o.acc.map(|x| x / tau);
            run.taus.push(tau);
            run.raw.push(raw);
            run.fractions.push(raw.map(|x| x / k as f64));
        }
        if !done {
            break;
        }
    }
    run.full_time = sweep.now() - start;
    run.internal_time = tau;
    run.censored_at = sweep.stopped_at().map(|t| t - start);
    run.events = sweep.events();
    Ok(run)
}

struct Cesaro<'h> {
    h: &'h dyn Fn(&[PaperPoint]) -> f64,
    tol_per_time: f64,
    acc: f64,
    buf: Vec<PaperPoint>,
}

impl SweepObserver for Cesaro<'_> {
    fn piece(&mut self, p: &Piece<'_>) {
        if p.snap.all_inside() && !p.snap.flagged {
            let h = self.h;
            let buf = &mut self.buf;
            let mut f = |t: f64| {
                p.positions_at(t, buf);
                h(buf)
            };
            let tol = f64::max(self.tol_per_time * (p.t1 - p.t0), 1e-15);
            self.acc += adaptive_simpson(&mut f, p.t0, p.t1, tol);
        }
    }
}

/// Cesàro average `(1/ℓ) ∫_0^ℓ h` along the first-return flow to the
/// window `B_n × … × B_n`.
pub fn cesaro_average(
    table: &Table,
    ps0: &ProductState,
    n: u32,
    ell: f64,
    h: &dyn Fn(&[PaperPoint]) -> f64,
    opts: &FlowOptions,
) -> Result<f64, StatsError> {
    if n == 0 {
        return Err(StatsError::BadParameter("window index must be at least 1"));
    }
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(StatsError::BadParameter("ell must be positive and finite"));
    }
    let region = Region::window(n, table.s());
    for (k, p) in ps0.particles.iter().enumerate() {
        if !region.contains(p.pos) {
            return Err(crate::flow::FlowError::StartOutsideRegion(k).into());
        }
    }
    let mut sweep = Sweep::new(table, ps0, Some(region), opts)?;
    let mut o = Cesaro {
        h,
        tol_per_time: 1e-8 / ell,
        acc: 0.0,
        buf: Vec::with_capacity(ps0.len()),
    };
    let got = run_induced(&mut sweep, ell, &mut o, &mut crate::flow::NullSink)?;
    if got < ell {
        return Err(StatsError::Censored(sweep.stopped_at().unwrap_or(sweep.now())));
    }
    Ok(o.acc / ell)
}
