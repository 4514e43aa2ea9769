//! Uniform-grid obstacle index and exact ray casting.
//!
//! Cells have side `a`, the obstacle side length, so a square overlaps at
//! most four cells and a ray visits O(1) candidates per cell. Finite cores
//! (and, for periodic configurations, a patch of the lattice around the
//! origin) are stored in a dense CSR grid; lattice sites outside the patch
//! are enumerated on the fly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::config::Configuration;
use crate::geometry::{to_internal, Axis, DirectionVector, InternalPoint, Rect};
use crate::math;

/// Largest dense grid, in cells.
const MAX_DENSE_CELLS: i64 = 1 << 22;

/// Half-width, in cells, of the lattice patch cached around the origin.
const LATTICE_PATCH_CELLS: i64 = 256;

/// Corner tolerance relative to the obstacle side.
pub const CORNER_TOL: f64 = 1e-9;

/// What ends a free flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HitKind {
    Reflection(Axis),
    Corner,
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    /// Flight time (distance, for unit directions).
    pub t: f64,
    pub pos: InternalPoint,
    pub kind: HitKind,
}

/// The start point lies in the interior of an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsideObstacle {
    pub pos: InternalPoint,
    pub center: InternalPoint,
    pub depth: f64,
}

#[derive(Debug, Clone)]
struct Dense {
    i0: i64,
    j0: i64,
    nx: i64,
    ny: i64,
    offsets: Vec<u32>,
    items: Vec<u32>,
}

#[derive(Debug, Clone)]
enum Store {
    Empty,
    Dense(Dense),
    Sparse(BTreeMap<(i64, i64), Vec<u32>>),
}

/// A configuration together with its obstacle index, shared read-only by
/// all flows.
#[derive(Debug, Clone)]
pub struct Table {
    config: Configuration,
    a: f64,
    h: f64,
    inv_a: f64,
    tol: f64,
    centers: Vec<InternalPoint>,
    store: Store,
    // cell range whose lattice sites are already in `store`
    cached: Option<(i64, i64, i64, i64)>,
    // cell range containing every stored obstacle (finite configurations)
    bounds: Option<(i64, i64, i64, i64)>,
}

#[derive(Clone, Copy)]
struct Best {
    hit: Option<RayHit>,
}

impl Best {
    #[inline]
    fn offer(&mut self, cand: RayHit, tol: f64) {
        match &self.hit {
            None => self.hit = Some(cand),
            Some(b) => {
                let better = if cand.t < b.t - tol {
                    true
                } else if cand.t <= b.t + tol {
                    match (cand.kind, b.kind) {
                        (HitKind::Corner, HitKind::Corner) => cand.t < b.t,
                        (HitKind::Corner, _) => true,
                        (_, HitKind::Corner) => false,
                        _ => cand.t < b.t,
                    }
                } else {
                    false
                };
                if better {
                    self.hit = Some(cand);
                }
            }
        }
    }
}

impl Table {
    pub fn new(config: &Configuration) -> Table {
        let a = config.side();
        let h = a / 2.0;
        let inv_a = 1.0 / a;
        let tol = CORNER_TOL * a;
        let mut centers: Vec<InternalPoint> = config.core().iter().map(|&p| to_internal(p)).collect();

        let cell_range = |q: &InternalPoint| {
            (
                math::floor((q.u - h - tol) * inv_a) as i64,
                math::floor((q.v - h - tol) * inv_a) as i64,
                math::floor((q.u + h + tol) * inv_a) as i64,
                math::floor((q.v + h + tol) * inv_a) as i64,
            )
        };

        let mut bbox: Option<(i64, i64, i64, i64)> = None;
        for q in &centers {
            let (a0, b0, a1, b1) = cell_range(q);
            bbox = Some(match bbox {
                None => (a0, b0, a1, b1),
                Some((x0, y0, x1, y1)) => (x0.min(a0), y0.min(b0), x1.max(a1), y1.max(b1)),
            });
        }

        let mut cached = None;
        if let Some(ext) = config.extension() {
            let l = LATTICE_PATCH_CELLS;
            let patch = match bbox {
                None => (-l, -l, l - 1, l - 1),
                Some((x0, y0, x1, y1)) => (x0.min(-l), y0.min(-l), x1.max(l - 1), y1.max(l - 1)),
            };
            let cells = (patch.2 - patch.0 + 1) * (patch.3 - patch.1 + 1);
            if cells <= MAX_DENSE_CELLS {
                let r = Rect::new(
                    patch.0 as f64 * a,
                    patch.1 as f64 * a,
                    (patch.2 + 1) as f64 * a,
                    (patch.3 + 1) as f64 * a,
                )
                .expand(h + 2.0 * tol);
                ext.for_each_site_in(&r, |site, _, q| {
                    if !ext.is_deleted(&site) {
                        centers.push(q);
                    }
                });
                cached = Some(patch);
                bbox = Some(patch);
            }
        }

        let store = match bbox {
            None => Store::Empty,
            Some((x0, y0, x1, y1)) => {
                let (nx, ny) = (x1 - x0 + 1, y1 - y0 + 1);
                let clip = |r: (i64, i64, i64, i64)| (r.0.max(x0), r.1.max(y0), r.2.min(x1), r.3.min(y1));
                if nx * ny <= MAX_DENSE_CELLS {
                    let mut counts = alloc::vec![0u32; (nx * ny) as usize + 1];
                    for q in &centers {
                        let (a0, b0, a1, b1) = clip(cell_range(q));
                        for j in b0..=b1 {
                            for i in a0..=a1 {
                                counts[((j - y0) * nx + (i - x0)) as usize + 1] += 1;
                            }
                        }
                    }
                    for k in 1..counts.len() {
                        counts[k] += counts[k - 1];
                    }
                    let mut items = alloc::vec![0u32; *counts.last().unwrap() as usize];
                    let mut fill = counts.clone();
                    for (idx, q) in centers.iter().enumerate() {
                        let (a0, b0, a1, b1) = clip(cell_range(q));
                        for j in b0..=b1 {
                            for i in a0..=a1 {
                                let c = ((j - y0) * nx + (i - x0)) as usize;
                                items[fill[c] as usize] = idx as u32;
                                fill[c] += 1;
                            }
                        }
                    }
                    Store::Dense(Dense {
                        i0: x0,
                        j0: y0,
                        nx,
                        ny,
                        offsets: counts,
                        items,
                    })
                } else {
                    let mut map: BTreeMap<(i64, i64), Vec<u32>> = BTreeMap::new();
                    for (idx, q) in centers.iter().enumerate() {
                        let (a0, b0, a1, b1) = cell_range(q);
                        for j in b0..=b1 {
                            for i in a0..=a1 {
                                map.entry((i, j)).or_default().push(idx as u32);
                            }
                        }
                    }
                    Store::Sparse(map)
                }
            }
        };

        let bounds = if config.extension().is_none() { bbox } else { None };
        Table {
            config: config.clone(),
            a,
            h,
            inv_a,
            tol,
            centers,
            store,
            cached,
            bounds,
        }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    /// Obstacle side in the internal frame.
    pub fn side(&self) -> f64 {
        self.a
    }

    /// Absolute corner tolerance.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Default escape horizon, `10^6 a`.
    pub fn default_horizon(&self) -> f64 {
        1e6 * self.a
    }

    /// Probes one square; `Err` if `p` is deeper than the tolerance inside it.
    #[inline]
    fn probe(&self, p: InternalPoint, d: DirectionVector, c: InternalPoint, best: &mut Best) -> Result<(), InsideObstacle> {
        let h = self.h;
        let tol = self.tol;
        let (ulo, uhi, vlo, vhi) = (c.u - h, c.u + h, c.v - h, c.v + h);

        let (tu0, tu1) = if d.du > 0.0 {
            ((ulo - p.u) / d.du, (uhi - p.u) / d.du)
        } else if d.du < 0.0 {
            ((uhi - p.u) / d.du, (ulo - p.u) / d.du)
        } else if p.u >= ulo - tol && p.u <= uhi + tol {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            return Ok(());
        };
        let (tv0, tv1) = if d.dv > 0.0 {
            ((vlo - p.v) / d.dv, (vhi - p.v) / d.dv)
        } else if d.dv < 0.0 {
            ((vhi - p.v) / d.dv, (vlo - p.v) / d.dv)
        } else if p.v >= vlo - tol && p.v <= vhi + tol {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            return Ok(());
        };

        let t_exit = f64::min(tu1, tv1);
        if t_exit <= 0.0 {
            return Ok(());
        }
        let vertical = tu0 >= tv0;
        let t_enter = if vertical { tu0 } else { tv0 };

        if t_enter > t_exit {
            // the ray passes the corner outside the square
            let along = if vertical { math::abs(d.dv) } else { math::abs(d.du) };
            if (t_enter - t_exit) * along <= tol {
                best.offer(self.corner_hit(p, d, c, t_enter), tol);
            }
            return Ok(());
        }

        let t = if t_enter < 0.0 {
            let depth = f64::min(f64::min(p.u - ulo, uhi - p.u), f64::min(p.v - vlo, vhi - p.v));
            if t_exit <= tol {
                // on the surface and leaving
                return Ok(());
            }
            if depth > tol {
                return Err(InsideObstacle { pos: p, center: c, depth });
            }
            0.0
        } else {
            t_enter
        };

        let (pos, near_corner) = if vertical {
            let u = if d.du > 0.0 { ulo } else { uhi };
            let v = p.v + t * d.dv;
            (InternalPoint::new(u, v), f64::min(math::abs(v - vlo), math::abs(vhi - v)) <= tol)
        } else {
            let v = if d.dv > 0.0 { vlo } else { vhi };
            let u = p.u + t * d.du;
            (InternalPoint::new(u, v), f64::min(math::abs(u - ulo), math::abs(uhi - u)) <= tol)
        };
        if near_corner {
            best.offer(self.corner_hit(p, d, c, t), tol);
        } else {
            let axis = if vertical { Axis::VerticalEdge } else { Axis::HorizontalEdge };
            best.offer(RayHit { t, pos, kind: HitKind::Reflection(axis) }, tol);
        }
        Ok(())
    }

    fn corner_hit(&self, p: InternalPoint, d: DirectionVector, c: InternalPoint, t: f64) -> RayHit {
        let q = p.advance(d, t);
        let h = self.h;
        let u = if q.u < c.u { c.u - h } else { c.u + h };
        let v = if q.v < c.v { c.v - h } else { c.v + h };
        RayHit {
            t,
            pos: InternalPoint::new(u, v),
            kind: HitKind::Corner,
        }
    }

    #[inline]
    fn probe_cell(&self, i: i64, j: i64, p: InternalPoint, d: DirectionVector, best: &mut Best) -> Result<(), InsideObstacle> {
        match &self.store {
            Store::Empty => {}
            Store::Dense(g) => {
                let (ci, cj) = (i - g.i0, j - g.j0);
                if ci >= 0 && cj >= 0 && ci < g.nx && cj < g.ny {
                    let c = (cj * g.nx + ci) as usize;
                    let (s, e) = (g.offsets[c] as usize, g.offsets[c + 1] as usize);
                    for &k in &g.items[s..e] {
                        self.probe(p, d, self.centers[k as usize], best)?;
                    }
                }
            }
            Store::Sparse(map) => {
                if let Some(list) = map.get(&(i, j)) {
                    for &k in list {
                        self.probe(p, d, self.centers[k as usize], best)?;
                    }
                }
            }
        }
        if let Some(ext) = self.config.extension() {
            let in_cache = matches!(self.cached, Some((x0, y0, x1, y1)) if i >= x0 && i <= x1 && j >= y0 && j <= y1);
            if !in_cache {
                let a = self.a;
                let r = Rect::new(i as f64 * a, j as f64 * a, (i + 1) as f64 * a, (j + 1) as f64 * a).expand(self.h + 2.0 * self.tol);
                let mut err = None;
                ext.for_each_site_in(&r, |site, _, q| {
                    if err.is_none() && !ext.is_deleted(&site) {
                        if let Err(e) = self.probe(p, d, q, best) {
                            err = Some(e);
                        }
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        Ok(())
    }

    /// Time at which `p + t d` first reaches Euclidean distance `horizon`
    /// from the origin (`0` if already there).
    fn horizon_time(p: InternalPoint, d: DirectionVector, horizon: f64) -> f64 {
        let dd = d.du * d.du + d.dv * d.dv;
        let b = p.u * d.du + p.v * d.dv;
        let c = p.u * p.u + p.v * p.v - horizon * horizon;
        if c >= 0.0 {
            return 0.0;
        }
        let disc = math::sqrt(b * b - dd * c);
        // positive root of dd t^2 + 2 b t + c = 0, in the stable form
        if b >= 0.0 {
            -c / (b + disc)
        } else {
            (disc - b) / dd
        }
    }

    /// First event along the ray `p + t d`, `t > 0`: a reflection, a corner
    /// stop, or reaching distance `horizon` from the origin.
    pub fn cast_ray(&self, p: InternalPoint, d: DirectionVector, horizon: f64) -> Result<RayHit, InsideObstacle> {
        let t_h = Table::horizon_time(p, d, horizon);
        let horizon_hit = RayHit {
            t: t_h,
            pos: p.advance(d, t_h),
            kind: HitKind::Horizon,
        };
        if t_h == 0.0 {
            return Ok(horizon_hit);
        }
        let a = self.a;
        let mut t_start = 0.0;
        let mut t_limit = t_h;
        if let Some((x0, y0, x1, y1)) = self.bounds {
            let r = Rect::new(x0 as f64 * a, y0 as f64 * a, (x1 + 1) as f64 * a, (y1 + 1) as f64 * a);
            match r.clip_line(p, d) {
                Some((t0, t1)) if t1 >= 0.0 && t0 < t_h => {
                    t_start = f64::max(t0, 0.0);
                    t_limit = f64::min(t1, t_h);
                }
                _ => return Ok(horizon_hit),
            }
        } else if matches!(self.store, Store::Empty) && self.config.extension().is_none() {
            return Ok(horizon_hit);
        }

        let q = p.advance(d, t_start);
        let mut i = math::floor(q.u * self.inv_a) as i64;
        let mut j = math::floor(q.v * self.inv_a) as i64;
        if let Some((x0, y0, x1, y1)) = self.bounds {
            i = i.clamp(x0, x1);
            j = j.clamp(y0, y1);
        }
        let (si, ti_delta, mut ti_max) = if d.du > 0.0 {
            (1, a / d.du, ((i + 1) as f64 * a - p.u) / d.du)
        } else if d.du < 0.0 {
            (-1, -a / d.du, (i as f64 * a - p.u) / d.du)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        };
        let (sj, tj_delta, mut tj_max) = if d.dv > 0.0 {
            (1, a / d.dv, ((j + 1) as f64 * a - p.v) / d.dv)
        } else if d.dv < 0.0 {
            (-1, -a / d.dv, (j as f64 * a - p.v) / d.dv)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        };

        let mut best = Best { hit: None };
        loop {
            self.probe_cell(i, j, p, d, &mut best)?;
            let cell_exit = f64::min(ti_max, tj_max);
            if let Some(b) = best.hit {
                if b.t <= cell_exit + self.tol {
                    return Ok(if b.t <= t_h { b } else { horizon_hit });
                }
            }
            if cell_exit > t_limit {
                return Ok(best.hit.filter(|b| b.t <= t_h).unwrap_or(horizon_hit));
            }
            if ti_max < tj_max {
                i += si;
                ti_max += ti_delta;
            } else {
                j += sj;
                tj_max += tj_delta;
            }
        }
    }

    /// Whether `p` is in the interior of some obstacle (deeper than the
    /// corner tolerance).
    pub fn inside_obstacle(&self, p: InternalPoint) -> bool {
        let mut inside = false;
        let r = Rect::square(p, self.h);
        self.config.for_each_center_in(&r, |_, c| {
            if p.linf(c) < self.h - self.tol {
                inside = true;
            }
        });
        inside
    }

    /// Paper-frame diameter `s`.
    pub fn s(&self) -> f64 {
        self.config.s()
    }
}
