//! Observables and estimators along product flows.
//!
//! Counting observables are piecewise constant between the cuts of a
//! [`Sweep`](crate::flow::Sweep), so their time integrals are accumulated
//! exactly piece by piece. Weighted observables are integrated in closed
//! form along each free-flight segment.

mod birkhoff;
mod equalize;
mod hopf;
mod weight;

pub use birkhoff::{cesaro_average, induced_birkhoff, BirkhoffRun};
pub use equalize::{
    assemble, equalization_experiment, run_seed, sample_starts, ClassSpec, EqualizationReport, EqualizationSpec, Estimator,
    SeedResult, StartDir, StartSpec,
};
pub use hopf::{hopf_integrals, hopf_ratio, HopfObservable, HopfRun};
pub use weight::{segment_weight_integral, weight, weight_with, WeightForm};

use alloc::vec::Vec;

use thiserror::Error;

use crate::config::ConfigError;
use crate::flow::{FlowError, ProductState};
use crate::geometry::DirIndex;

/// How particles are binned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// By member index of each particle's own class.
    #[default]
    Member,
    /// By quadrant of the velocity (1: `(+,+)`, 2: `(−,+)`, 3: `(−,−)`,
    /// 4: `(+,−)`).
    Quadrant,
}

impl CountMode {
    #[inline]
    pub fn bin(self, dir: DirIndex) -> usize {
        match self {
            CountMode::Member => dir.slot(),
            CountMode::Quadrant => dir.quadrant() as usize - 1,
        }
    }

    /// Rebins member-indexed totals.
    pub fn rebin(self, by_member: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for d in DirIndex::ALL {
            out[self.bin(d)] += by_member[d.slot()];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionCounts {
    pub counts: [u32; 4],
    pub k: u32,
}

impl DirectionCounts {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Census of running particles by direction.
pub fn direction_counts(ps: &ProductState, mode: CountMode) -> DirectionCounts {
    let mut counts = [0u32; 4];
    for p in ps.particles.iter().filter(|p| p.is_running()) {
        counts[mode.bin(p.dir)] += 1;
    }
    DirectionCounts {
        counts,
        k: ps.len() as u32,
    }
}

/// A quotient kept as numerator and denominator, so that
/// `ratio(i, j) * ratio(j, i)` is exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub num: f64,
    pub den: f64,
}

impl Ratio {
    pub fn new(num: f64, den: f64) -> Self {
        Ratio { num, den }
    }

    pub fn is_defined(&self) -> bool {
        self.den > 0.0
    }

    pub fn value(&self) -> Option<f64> {
        self.is_defined().then(|| self.num / self.den)
    }

    pub fn recip(&self) -> Ratio {
        Ratio {
            num: self.den,
            den: self.num,
        }
    }
}

impl core::ops::Mul for Ratio {
    type Output = Ratio;

    fn mul(self, rhs: Ratio) -> Ratio {
        Ratio {
            num: self.num * rhs.num,
            den: self.den * rhs.den,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesMeta {
    pub t_total: f64,
    pub k: usize,
    pub seed: Option<u64>,
    pub config_digest: u64,
}

/// Sampled running estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AverageSeries {
    pub times: Vec<f64>,
    /// Headline value per sample, `None` while undefined.
    pub values: Vec<Option<f64>>,
    /// Per-direction columns per sample.
    pub per_direction: Vec<[f64; 4]>,
    pub meta: SeriesMeta,
}

impl AverageSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_value(&self) -> Option<f64> {
        self.values.last().copied().flatten()
    }
}

/// Sample grid `dt, 2 dt, …` ending exactly at `t_total`.
pub(crate) fn sample_grid(t_total: f64, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if t_total <= 0.0 {
        return out;
    }
    let dt = if dt > 0.0 && dt.is_finite() { dt } else { t_total };
    let n = libm::ceil(t_total / dt) as u64;
    for k in 1..n {
        let t = k as f64 * dt;
        if t < t_total {
            out.push(t);
        }
    }
    out.push(t_total);
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("ratio undefined: the denominator integral is zero at T = {0}")]
    ZeroDenominator(f64),
    #[error("invalid parameter: {0}")]
    BadParameter(&'static str),
    #[error("tuple stopped at t = {0} before the requested time")]
    Censored(f64),
    #[error("could not draw a start outside the obstacles")]
    NoFreeStart,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Configuration;
    use crate::flow::{flow, EventRecord, FlowOptions, ParticleState, Status};
    use crate::geometry::{DirectionClass, InternalPoint};
    use crate::table::Table;
    use alloc::vec;

    #[test]
    fn census_fixtures() {
        let dc = DirectionClass::new(1.0).unwrap();
        let p = ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I1);
        let ps = ProductState::uniform(vec![p; 4], dc).unwrap();
        assert_eq!(direction_counts(&ps, CountMode::Member).counts, [4, 0, 0, 0]);
        let stopped = ParticleState {
            status: Status::StoppedAtCorner,
            ..p
        };
        let ps = ProductState::uniform(vec![p, stopped], dc).unwrap();
        assert_eq!(direction_counts(&ps, CountMode::Member).total(), 1);
    }

    #[test]
    fn vertical_reflection_moves_count() {
        let g = Configuration::explicit(1.0, vec![crate::geometry::PaperPoint::new(2.0, 2.0)]).unwrap();
        let t = Table::new(&g);
        let dc = DirectionClass::new(0.05).unwrap();
        let st = ParticleState::new(InternalPoint::new(0.0, 0.0), DirIndex::I1);
        let mut evs: Vec<EventRecord> = Vec::new();
        let out = flow(&t, &dc, &st, 3.0, &FlowOptions::default(), &mut evs).unwrap();
        assert_eq!(evs.len(), 1);
        let before = direction_counts(&ProductState::uniform(vec![st], dc).unwrap(), CountMode::Member);
        let after = direction_counts(&ProductState::uniform(vec![out], dc).unwrap(), CountMode::Member);
        assert_eq!(before.counts, [1, 0, 0, 0]);
        assert_eq!(after.counts, [0, 1, 0, 0]);
    }

    #[test]
    fn quadrant_bins() {
        assert_eq!(CountMode::Quadrant.bin(DirIndex::I4), 2);
        assert_eq!(CountMode::Quadrant.rebin([1.0, 2.0, 3.0, 4.0]), [1.0, 2.0, 4.0, 3.0]);
    }

    #[test]
    fn ratio_identity_is_exact() {
        let mut x = 0.3f64;
        for _ in 0..1000 {
            x = (x * 997.0 + 0.123).fract();
            let a = Ratio::new(x * 1e5, (1.0 - x) * 3e4 + 1e-3);
            let p = a * a.recip();
            assert_eq!(p.value(), Some(1.0));
        }
        assert_eq!(Ratio::new(1.0, 0.0).value(), None);
    }

    #[test]
    fn grid_ends_at_total() {
        assert_eq!(sample_grid(1.0, 0.3), vec![0.3, 0.6, 0.8999999999999999, 1.0]);
        assert_eq!(sample_grid(1.0, 0.5), vec![0.5, 1.0]);
        assert!(sample_grid(0.0, 0.5).is_empty());
    }
}
