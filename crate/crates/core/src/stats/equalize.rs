use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{hopf_integrals, induced_birkhoff, AverageSeries, HopfObservable, SeriesMeta, StatsError};
use crate::config::uniform_l1_ball;
use crate::flow::{FlowOptions, NullSink, ParticleState, ProductState, Region};
use crate::geometry::{to_internal, DirIndex, DirectionClass, PaperPoint};
use crate::table::Table;

/// Attempts per particle when drawing a start outside the obstacles.
pub const START_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassSpec {
    /// Every particle in the class of one angle.
    Single(f64),
    /// One angle per particle.
    PerParticle(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartDir {
    Fixed(DirIndex),
    Random,
}

/// Seeded initial conditions: positions uniform in `|x| + |y| <= radius`
/// outside the obstacles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartSpec {
    pub radius: f64,
    pub dir: StartDir,
    /// Give every particle the same start (one drawn trajectory, K copies).
    pub cloned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// Induced-flow Birkhoff averages of the direction census.
    Induced { region: Region, tau: f64, sample_dtau: f64 },
    /// Hopf ratios of integrable observables along the product flow.
    Hopf { observable: HopfObservable, t_total: f64, sample_dt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizationSpec {
    pub classes: ClassSpec,
    pub k: usize,
    pub start: StartSpec,
    pub estimator: Estimator,
    pub seeds: Vec<u64>,
    pub opts: FlowOptions,
}

/// Outcome for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    /// Terminal per-direction fractions.
    pub fractions: [f64; 4],
    /// Terminal per-direction integrals (Hopf) or raw averages (induced).
    pub totals: [f64; 4],
    /// Fractions per sample; the value column is the fraction of direction 1.
    pub series: AverageSeries,
    pub censored_at: Option<f64>,
    /// Time actually covered (induced or ambient).
    pub covered: f64,
    pub events: u64,
}

impl SeedResult {
    /// `totals[i] / totals[j]` as a ratio with exact reciprocal products.
    pub fn ratio(&self, i: DirIndex, j: DirIndex) -> super::Ratio {
        super::Ratio::new(self.totals[i.slot()], self.totals[j.slot()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizationReport {
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedResult>,
    pub mean: [f64; 4],
    /// Sample standard deviation across seeds (0 for a single seed).
    pub std: [f64; 4],
    /// Fraction of seeds whose tuple stopped before the end.
    pub censored_fraction: f64,
    pub config_digest: u64,
    pub caveat: String,
}

/// Draws the product start for one seed.
pub fn sample_starts(table: &Table, spec: &EqualizationSpec, seed: u64) -> Result<ProductState, StatsError> {
    if spec.k == 0 {
        return Err(StatsError::BadParameter("K must be at least 1"));
    }
    let classes: Vec<DirectionClass> = match &spec.classes {
        ClassSpec::Single(theta) => {
            let dc = DirectionClass::new(*theta).map_err(|_| StatsError::BadParameter("degenerate direction"))?;
            alloc::vec![dc; spec.k]
        }
        ClassSpec::PerParticle(thetas) => {
            if thetas.len() != spec.k {
                return Err(StatsError::BadParameter("need one angle per particle"));
            }
            thetas
                .iter()
                .map(|t| DirectionClass::new(*t).map_err(|_| StatsError::BadParameter("degenerate direction")))
                .collect::<Result<_, _>>()?
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<ParticleState, StatsError> {
        for _ in 0..START_ATTEMPTS {
            let (x, y) = uniform_l1_ball(rng, spec.start.radius);
            let q = to_internal(PaperPoint::new(x, y));
            if !table.inside_obstacle(q) && !on_obstacle(table, q) {
                let dir = match spec.start.dir {
                    StartDir::Fixed(d) => d,
                    StartDir::Random => DirIndex::ALL[(rng.next_u32() % 4) as usize],
                };
                return Ok(ParticleState::new(q, dir));
            }
        }
        Err(StatsError::NoFreeStart)
    };
    let particles = if spec.start.cloned {
        let p = draw(&mut rng)?;
        alloc::vec![p; spec.k]
    } else {
        (0..spec.k).map(|_| draw(&mut rng)).collect::<Result<_, _>>()?
    };
    Ok(ProductState::new(particles, classes)?)
}

// closed obstacles, so a start never sits on an edge
fn on_obstacle(table: &Table, q: crate::geometry::InternalPoint) -> bool {
    let h = table.side() / 2.0;
    let mut hit = false;
    table.config().for_each_center_in(&crate::geometry::Rect::square(q, h), |_, c| {
        if q.linf(c) <= h {
            hit = true;
        }
    });
    hit
}

/// Runs the estimator for one seed.
pub fn run_seed(table: &Table, spec: &EqualizationSpec, seed: u64) -> Result<SeedResult, StatsError> {
    let ps = sample_starts(table, spec, seed)?;
    let digest = table.config().digest();
    match &spec.estimator {
        Estimator::Induced { region, tau, sample_dtau } => {
            let run = induced_birkhoff(table, &ps, region, *tau, *sample_dtau, &spec.opts, &mut NullSink)?;
            let fractions = run.final_fractions().unwrap_or([0.0; 4]);
            let totals = run.raw.last().copied().unwrap_or([0.0; 4]);
            let series = AverageSeries {
                times: run.taus.clone(),
                values: run.fractions.iter().map(|f| Some(f[0])).collect(),
                per_direction: run.fractions.clone(),
                meta: SeriesMeta {
                    t_total: *tau,
                    k: spec.k,
                    seed: Some(seed),
                    config_digest: digest,
                },
            };
            Ok(SeedResult {
                seed,
                fractions,
                totals,
                series,
                censored_at: run.censored_at,
                covered: run.internal_time,
                events: run.events,
            })
        }
        Estimator::Hopf {
            observable,
            t_total,
            sample_dt,
        } => {
            let run = hopf_integrals(table, &ps, observable, *t_total, *sample_dt, &spec.opts, &mut NullSink)?;
            let frac = |row: &[f64; 4]| {
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    row.map(|x| x / sum)
                } else {
                    [0.0; 4]
                }
            };
            let per_direction: Vec<[f64; 4]> = run.integrals.iter().map(frac).collect();
            let totals = run.final_integrals();
            Ok(SeedResult {
                seed,
                fractions: frac(&totals),
                totals,
                series: AverageSeries {
                    times: run.times.clone(),
                    values: per_direction.iter().map(|f| Some(f[0])).collect(),
                    per_direction,
                    meta: SeriesMeta {
                        t_total: *t_total,
                        k: spec.k,
                        seed: Some(seed),
                        config_digest: digest,
                    },
                },
                censored_at: run.censored_at,
                covered: run.censored_at.unwrap_or(*t_total),
                events: run.events,
            })
        }
    }
}

/// Combines per-seed results, in the given order, into a report.
pub fn assemble(table: &Table, per_seed: Vec<SeedResult>) -> EqualizationReport {
    let n = per_seed.len();
    let mut mean = [0.0; 4];
    for r in &per_seed {
        for (m, f) in mean.iter_mut().zip(r.fractions) {
            *m += f;
        }
    }
    if n > 0 {
        mean = mean.map(|m| m / n as f64);
    }
    let mut std = [0.0; 4];
    if n > 1 {
        for r in &per_seed {
            for s in 0..4 {
                let d = r.fractions[s] - mean[s];
                std[s] += d * d;
            }
        }
        std = std.map(|v| libm::sqrt(v / (n - 1) as f64));
    }
    let censored = per_seed.iter().filter(|r| r.censored_at.is_some()).count();
    EqualizationReport {
        seeds: per_seed.iter().map(|r| r.seed).collect(),
        mean,
        std,
        censored_fraction: if n > 0 { censored as f64 / n as f64 } else { 0.0 },
        config_digest: table.config().digest(),
        caveat: String::from(
            "finite-time estimate of an almost-sure asymptotic statement; \
             fractions near 1/4 are consistent with equalization but do not establish it",
        ),
        per_seed,
    }
}

/// Runs every seed sequentially and assembles the report.
pub fn equalization_experiment(table: &Table, spec: &EqualizationSpec) -> Result<EqualizationReport, StatsError> {
    let mut per_seed = Vec::with_capacity(spec.seeds.len());
    for &seed in &spec.seeds {
        per_seed.push(run_seed(table, spec, seed)?);
    }
    Ok(assemble(table, per_seed))
}
