use alloc::vec::Vec;

use super::{sample_grid, segment_weight_integral, AverageSeries, Ratio, SeriesMeta, StatsError, WeightForm};
use crate::flow::{EventSink, FlowOptions, Piece, ProductState, Region, Segment, Sweep, SweepObserver};
use crate::geometry::DirIndex;
use crate::table::Table;

/// Integrable observable for the ratio estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum HopfObservable {
    /// `f_i` times the indicator that every particle is in the region.
    Restricted(Region),
    /// `Σ_k [dir_k = i] w(z_k)`.
    Weighted(WeightForm),
}

/// Time integrals `∫_0^t O_i` for the four directions at each sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfRun {
    pub times: Vec<f64>,
    pub integrals: Vec<[f64; 4]>,
    /// First stop of any component; integrals are frozen from then on.
    pub censored_at: Option<f64>,
    pub events: u64,
}

impl HopfRun {
    /// Running ratio of direction `i` to direction `j` at sample `n`.
    pub fn ratio_at(&self, n: usize, i: DirIndex, j: DirIndex) -> Ratio {
        let v = &self.integrals[n];
        Ratio::new(v[i.slot()], v[j.slot()])
    }

    pub fn final_integrals(&self) -> [f64; 4] {
        self.integrals.last().copied().unwrap_or([0.0; 4])
    }

    pub fn final_ratio(&self, i: DirIndex, j: DirIndex) -> Ratio {
        let v = self.final_integrals();
        Ratio::new(v[i.slot()], v[j.slot()])
    }
}

struct Restricted {
    acc: [f64; 4],
}

impl SweepObserver for Restricted {
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

struct Weighted {
    form: WeightForm,
    acc: [f64; 4],
    censor: f64,
}

impl Weighted {
    #[inline]
    fn add(&mut self, s: &Segment) -> [f64; 4] {
        let mut out = [0.0; 4];
        let t1 = f64::min(s.t1, self.censor);
        if t1 > s.t0 {
            out[s.dir.slot()] = segment_weight_integral(self.form, s.start, s.d, t1 - s.t0);
        }
        out
    }
}

impl SweepObserver for Weighted {
    fn piece(&mut self, p: &Piece<'_>) {
        if p.snap.flagged && self.censor.is_infinite() {
            self.censor = p.t0;
        }
    }

    fn segment(&mut self, s: &Segment) {
        let v = self.add(s);
        for (a, x) in self.acc.iter_mut().zip(v) {
            *a += x;
        }
    }
}

/// Runs the product flow to `t_total` and records the integrals of the
/// observable per direction every `sample_dt`.
pub fn hopf_integrals(
    table: &Table,
    ps0: &ProductState,
    obs: &HopfObservable,
    t_total: f64,
    sample_dt: f64,
    opts: &FlowOptions,
    sink: &mut impl EventSink,
) -> Result<HopfRun, StatsError> {
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(StatsError::BadParameter("T must be positive and finite"));
    }
    let times = sample_grid(t_total, sample_dt);
    let start = ps0.particles.first().map(|p| p.clock).unwrap_or(0.0);
    let mut integrals = Vec::with_capacity(times.len());
    match obs {
        HopfObservable::Restricted(region) => {
            let mut sweep = Sweep::new(table, ps0, Some(region.clone()), opts)?;
            let mut o = Restricted { acc: [0.0; 4] };
            for &t in &times {
                sweep.advance_to(start + t, &mut o, sink)?;
                integrals.push(o.acc);
            }
            Ok(HopfRun {
                times,
                integrals,
                censored_at: sweep.stopped_at().map(|t| t - start),
                events: sweep.events(),
            })
        }
        HopfObservable::Weighted(form) => {
            let mut sweep = Sweep::new(table, ps0, None, opts)?;
            let mut o = Weighted {
                form: *form,
                acc: [0.0; 4],
                censor: if ps0.flagged { start } else { f64::INFINITY },
            };
            for &t in &times {
                sweep.advance_to(start + t, &mut o, sink)?;
                if o.censor.is_infinite() {
                    if let Some(ts) = sweep.stopped_at() {
                        o.censor = ts;
                    }
                }
                let mut row = o.acc;
                sweep.open_segments(|s| {
                    let v = o.add(s);
                    for k in 0..4 {
                        row[k] += v[k];
                    }
                });
                integrals.push(row);
            }
            Ok(HopfRun {
                times,
                integrals,
                censored_at: sweep.stopped_at().map(|t| t - start),
                events: sweep.events(),
            })
        }
    }
}

/// Running Hopf ratio `∫ O_i / ∫ O_j` sampled every `sample_dt`. The
/// per-direction columns of the series hold the four integrals.
#[allow(clippy::too_many_arguments)]
pub fn hopf_ratio(
    table: &Table,
    ps0: &ProductState,
    i: DirIndex,
    j: DirIndex,
    t_total: f64,
    obs: &HopfObservable,
    sample_dt: f64,
    opts: &FlowOptions,
) -> Result<AverageSeries, StatsError> {
    let run = hopf_integrals(table, ps0, obs, t_total, sample_dt, opts, &mut crate::flow::NullSink)?;
    let values: Vec<Option<f64>> = (0..run.times.len()).map(|n| run.ratio_at(n, i, j).value()).collect();
    if values.last().copied().flatten().is_none() {
        return Err(StatsError::ZeroDenominator(t_total));
    }
    Ok(AverageSeries {
        times: run.times,
        values,
        per_direction: run.integrals,
        meta: SeriesMeta {
            t_total,
            k: ps0.len(),
            seed: None,
            config_digest: table.config().digest(),
        },
    })
}
