//! Obstacle configurations.
//!
//! A configuration is a set of obstacle centers (paper frame) whose
//! pairwise L1 distance is at least the obstacle diameter `s`. It is stored
//! as a finite core plus an optional periodic extension with a finite list
//! of deleted lattice sites.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::geometry::{to_internal, InternalPoint, PaperPoint, Rect};
use crate::math;

/// Attempts per center before [`Configuration::perturb`] gives up.
pub const PERTURB_ATTEMPTS: usize = 100;

/// Attempts per center before [`Configuration::scatter`] gives up.
pub const SCATTER_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("obstacle diameter must be positive and finite, got {0}")]
    BadDiameter(f64),
    #[error("non-finite center ({}, {})", .0.x, .0.y)]
    NonFinite(PaperPoint),
    #[error("lattice basis is degenerate")]
    DegenerateBasis,
    #[error("{0}")]
    HardCore(ViolationReport),
    #[error("ring center ({}, {}) conflicts with inner center ({}, {}): L1 distance {distance} < s", ring.x, ring.y, inner.x, inner.y)]
    SpacingConflict {
        inner: PaperPoint,
        ring: PaperPoint,
        distance: f64,
    },
    #[error("could not place center #{index} at ({}, {}) within the attempt budget", center.x, center.y)]
    Infeasible { index: usize, center: PaperPoint },
    #[error("({}, {}) is not a lattice site", .0.x, .0.y)]
    NotALatticeSite(PaperPoint),
    #[error("ring index must be at least 1")]
    EmptyRing,
}

/// One pair of realized centers closer than `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub a: PaperPoint,
    pub b: PaperPoint,
    pub distance: f64,
}

/// Offending pairs found by [`Configuration::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViolationReport {
    pub s: f64,
    pub pairs: Vec<Violation>,
}

impl core::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} hard-core violation(s)", self.pairs.len())?;
        for v in self.pairs.iter().take(8) {
            write!(
                f,
                "; ({}, {}) - ({}, {}) at L1 distance {} < {}",
                v.a.x, v.a.y, v.b.x, v.b.y, v.distance, self.s
            )?;
        }
        Ok(())
    }
}

/// Lattice coordinates of a periodic site: `base_centers[base] + i*b1 + j*b2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeSite {
    pub base: u32,
    pub i: i64,
    pub j: i64,
}

/// Periodic extension: a lattice of translates of finitely many base centers,
/// with finitely many sites removed.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpec {
    basis: [PaperPoint; 2],
    base_centers: Vec<PaperPoint>,
    deletions: BTreeSet<LatticeSite>,
    // paper-frame inverse basis, rows give (i, j) from a displacement
    inv: [[f64; 2]; 2],
}

impl PeriodicSpec {
    pub fn new(basis: [PaperPoint; 2], base_centers: Vec<PaperPoint>) -> Result<Self, ConfigError> {
        let det = basis[0].x * basis[1].y - basis[0].y * basis[1].x;
        if !(det.is_finite() && det != 0.0) {
            return Err(ConfigError::DegenerateBasis);
        }
        for p in basis.iter().chain(base_centers.iter()) {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(ConfigError::NonFinite(*p));
            }
        }
        let inv = [
            [basis[1].y / det, -basis[1].x / det],
            [-basis[0].y / det, basis[0].x / det],
        ];
        Ok(PeriodicSpec {
            basis,
            base_centers,
            deletions: BTreeSet::new(),
            inv,
        })
    }

    /// The square lattice `Z^2` scaled by `step`, one base center at the origin.
    pub fn square(step: f64) -> Result<Self, ConfigError> {
        PeriodicSpec::new(
            [PaperPoint::new(step, 0.0), PaperPoint::new(0.0, step)],
            alloc::vec![PaperPoint::ORIGIN],
        )
    }

    pub fn basis(&self) -> [PaperPoint; 2] {
        self.basis
    }

    pub fn base_centers(&self) -> &[PaperPoint] {
        &self.base_centers
    }

    pub fn deletions(&self) -> &BTreeSet<LatticeSite> {
        &self.deletions
    }

    /// Paper-frame center of a site.
    #[inline]
    pub fn site_center(&self, site: LatticeSite) -> PaperPoint {
        let b = self.base_centers[site.base as usize];
        let (i, j) = (site.i as f64, site.j as f64);
        PaperPoint::new(
            b.x + i * self.basis[0].x + j * self.basis[1].x,
            b.y + i * self.basis[0].y + j * self.basis[1].y,
        )
    }

    /// Site whose center is `p` (within `1e-9` in L1), if any.
    pub fn site_at(&self, p: PaperPoint) -> Option<LatticeSite> {
        for (bi, b) in self.base_centers.iter().enumerate() {
            let (dx, dy) = (p.x - b.x, p.y - b.y);
            let fi = self.inv[0][0] * dx + self.inv[0][1] * dy;
            let fj = self.inv[1][0] * dx + self.inv[1][1] * dy;
            let site = LatticeSite {
                base: bi as u32,
                i: libm::round(fi) as i64,
                j: libm::round(fj) as i64,
            };
            if self.site_center(site).l1(p) <= 1e-9 {
                return Some(site);
            }
        }
        None
    }

    /// Removes the site centered at `p`.
    pub fn delete_at(&mut self, p: PaperPoint) -> Result<(), ConfigError> {
        let site = self.site_at(p).ok_or(ConfigError::NotALatticeSite(p))?;
        self.deletions.insert(site);
        Ok(())
    }

    pub fn delete_site(&mut self, site: LatticeSite) {
        self.deletions.insert(site);
    }

    #[inline]
    pub fn is_deleted(&self, site: &LatticeSite) -> bool {
        !self.deletions.is_empty() && self.deletions.contains(site)
    }

    /// Calls `f` for every lattice site (deleted or not) whose center lies in
    /// the closed internal-frame rectangle `r`.
    #[inline]
    pub(crate) fn for_each_site_in(&self, r: &Rect, mut f: impl FnMut(LatticeSite, PaperPoint, InternalPoint)) {
        let corners = r.corners().map(|c| c.to_paper());
        for (bi, b) in self.base_centers.iter().enumerate() {
            let (mut i0, mut i1, mut j0, mut j1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for c in &corners {
                let (dx, dy) = (c.x - b.x, c.y - b.y);
                let fi = self.inv[0][0] * dx + self.inv[0][1] * dy;
                let fj = self.inv[1][0] * dx + self.inv[1][1] * dy;
                i0 = f64::min(i0, fi);
                i1 = f64::max(i1, fi);
                j0 = f64::min(j0, fj);
                j1 = f64::max(j1, fj);
            }
            let (i0, i1) = (math::floor(i0) as i64, math::ceil(i1) as i64);
            let (j0, j1) = (math::floor(j0) as i64, math::ceil(j1) as i64);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let site = LatticeSite { base: bi as u32, i, j };
                    let p = self.site_center(site);
                    let q = to_internal(p);
                    if r.contains(q) {
                        f(site, p, q);
                    }
                }
            }
        }
    }
}

/// The window `{(x, y) : |x| + |y| <= n s}`; an axis-aligned square of
/// half-width `n s / sqrt 2` in the internal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub n: u32,
    pub s: f64,
}

impl Window {
    pub fn new(n: u32, s: f64) -> Self {
        assert!(n >= 1, "window index must be positive");
        Window { n, s }
    }

    pub fn radius(&self) -> f64 {
        self.n as f64 * self.s
    }

    pub fn contains(&self, p: PaperPoint) -> bool {
        p.l1_norm() <= self.radius()
    }

    pub fn to_rect(&self) -> Rect {
        Rect::square(InternalPoint::new(0.0, 0.0), self.radius() * FRAC_1_SQRT_2)
    }
}

/// Obstacle configuration: diameter `s`, finite core, optional periodic part.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    s: f64,
    core: Vec<PaperPoint>,
    extension: Option<PeriodicSpec>,
}

impl Configuration {
    /// Builds a configuration without checking the hard-core condition.
    pub fn new_unchecked(s: f64, core: Vec<PaperPoint>, extension: Option<PeriodicSpec>) -> Result<Self, ConfigError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(ConfigError::BadDiameter(s));
        }
        if let Some(p) = core.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(ConfigError::NonFinite(*p));
        }
        Ok(Configuration { s, core, extension })
    }

    /// Finite configuration, validated.
    pub fn explicit(s: f64, core: Vec<PaperPoint>) -> Result<Self, ConfigError> {
        let g = Configuration::new_unchecked(s, core, None)?;
        g.validate().map_err(ConfigError::HardCore)?;
        Ok(g)
    }

    pub fn empty(s: f64) -> Result<Self, ConfigError> {
        Configuration::new_unchecked(s, Vec::new(), None)
    }

    /// Periodic configuration, validated.
    pub fn lattice(spec: PeriodicSpec, s: f64) -> Result<Self, ConfigError> {
        let g = Configuration::new_unchecked(s, Vec::new(), Some(spec))?;
        g.validate().map_err(ConfigError::HardCore)?;
        Ok(g)
    }

    /// Obstacle L1 diameter.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Internal-frame side of each square obstacle.
    pub fn side(&self) -> f64 {
        self.s * FRAC_1_SQRT_2
    }

    pub fn core(&self) -> &[PaperPoint] {
        &self.core
    }

    pub fn extension(&self) -> Option<&PeriodicSpec> {
        self.extension.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.extension.is_none()
    }

    /// Calls `f` with every realized center (paper and internal frame) whose
    /// internal-frame position lies in the closed rectangle `r`.
    pub fn for_each_center_in(&self, r: &Rect, mut f: impl FnMut(PaperPoint, InternalPoint)) {
        for &p in &self.core {
            let q = to_internal(p);
            if r.contains(q) {
                f(p, q);
            }
        }
        if let Some(ext) = &self.extension {
            ext.for_each_site_in(r, |site, p, q| {
                if !ext.is_deleted(&site) {
                    f(p, q)
                }
            });
        }
    }

    /// Realized centers within L1 distance `< radius` of `z`.
    fn centers_near(&self, z: PaperPoint, radius: f64) -> Vec<PaperPoint> {
        let mut out = Vec::new();
        let r = Rect::square(to_internal(z), radius * FRAC_1_SQRT_2);
        self.for_each_center_in(&r, |p, _| {
            if p.l1(z) < radius {
                out.push(p)
            }
        });
        out.sort_by(PaperPoint::lex_cmp);
        out
    }

    /// Checks the hard-core condition over all realized pairs. The periodic
    /// part is checked on the undeleted lattice around one fundamental domain,
    /// which covers every translate.
    pub fn validate(&self) -> Result<(), ViolationReport> {
        let s = self.s;
        let a = self.side();
        let mut pairs = Vec::new();

        let mut order: Vec<(InternalPoint, PaperPoint)> = self.core.iter().map(|&p| (to_internal(p), p)).collect();
        order.sort_by(|x, y| x.0.u.total_cmp(&y.0.u));
        for (k, &(qa, pa)) in order.iter().enumerate() {
            for &(qb, pb) in &order[k + 1..] {
                if qb.u - qa.u > a * 1.000_001 {
                    break;
                }
                let d = pa.l1(pb);
                if d < s {
                    pairs.push(Violation { a: pa, b: pb, distance: d });
                }
            }
        }

        if let Some(ext) = &self.extension {
            let probe = a * 1.000_001;
            for (bi, &b) in ext.base_centers.iter().enumerate() {
                let own = LatticeSite { base: bi as u32, i: 0, j: 0 };
                let r = Rect::square(to_internal(b), probe);
                ext.for_each_site_in(&r, |site, p, _| {
                    if site != own {
                        let d = b.l1(p);
                        // each unordered pair of bases is reported once
                        if d < s && (site.base as usize > bi || (site.base as usize == bi && (site.i, site.j) > (0, 0))) {
                            pairs.push(Violation { a: b, b: p, distance: d });
                        }
                    }
                });
            }
            for &c in &self.core {
                let r = Rect::square(to_internal(c), probe);
                ext.for_each_site_in(&r, |site, p, _| {
                    if !ext.is_deleted(&site) {
                        let d = c.l1(p);
                        if d < s {
                            pairs.push(Violation { a: c, b: p, distance: d });
                        }
                    }
                });
            }
        }

        if pairs.is_empty() {
            Ok(())
        } else {
            Err(ViolationReport { s, pairs })
        }
    }

    /// Realized centers whose (closed) obstacle meets the internal-frame
    /// rectangle `rect`, in lexicographic order.
    pub fn obstacles_in_window(&self, rect: &Rect) -> Vec<PaperPoint> {
        let mut out = Vec::new();
        self.for_each_center_in(&rect.expand(self.side() / 2.0), |p, _| out.push(p));
        out.sort_by(PaperPoint::lex_cmp);
        out.dedup();
        out
    }

    /// The `8n` ring centers on `|x| + |y| = n s` at consecutive L1 spacing
    /// `s`: adjacent ring obstacles share a whole side.
    pub fn ring_centers(n: u32, s: f64) -> Vec<PaperPoint> {
        let r = n as f64 * s;
        let h = s / 2.0;
        let steps = 2 * n as usize;
        let mut out = Vec::with_capacity(8 * n as usize);
        for k in 0..steps {
            let t = k as f64 * h;
            out.push(PaperPoint::new(r - t, t));
        }
        for k in 0..steps {
            let t = k as f64 * h;
            out.push(PaperPoint::new(-t, r - t));
        }
        for k in 0..steps {
            let t = k as f64 * h;
            out.push(PaperPoint::new(-r + t, -t));
        }
        for k in 0..steps {
            let t = k as f64 * h;
            out.push(PaperPoint::new(t, -r + t));
        }
        out
    }

    /// `inner` together with an `n`-ring: the boundary of `|x| + |y| <= n s`
    /// completely covered by obstacles.
    pub fn make_ringed(inner: &Configuration, n: u32) -> Result<Configuration, ConfigError> {
        if n == 0 {
            return Err(ConfigError::EmptyRing);
        }
        let s = inner.s;
        let ring = Configuration::ring_centers(n, s);
        for &rc in &ring {
            if let Some(&ic) = inner.centers_near(rc, s).first() {
                return Err(ConfigError::SpacingConflict {
                    inner: ic,
                    ring: rc,
                    distance: ic.l1(rc),
                });
            }
        }
        let mut core = inner.core.clone();
        core.extend(ring);
        Ok(Configuration {
            s,
            core,
            extension: inner.extension.clone(),
        })
    }

    /// Periodic configuration from a lattice description.
    pub fn make_lattice(spec: PeriodicSpec, s: f64) -> Result<Configuration, ConfigError> {
        Configuration::lattice(spec, s)
    }

    /// Moves every realized lattice site with `|x| + |y| <= radius` into the
    /// finite core (deleting it from the periodic part), so that it can be
    /// perturbed.
    pub fn materialize(&self, radius: f64) -> Configuration {
        let mut out = self.clone();
        if let Some(ext) = &mut out.extension {
            let r = Rect::square(InternalPoint::new(0.0, 0.0), radius * FRAC_1_SQRT_2 * 1.000_001);
            let mut found = Vec::new();
            ext.for_each_site_in(&r, |site, p, _| {
                if !ext.is_deleted(&site) && p.l1_norm() <= radius {
                    found.push((site, p));
                }
            });
            found.sort_by(|a, b| a.1.lex_cmp(&b.1));
            for (site, p) in found {
                ext.delete_site(site);
                out.core.push(p);
            }
        }
        out
    }

    /// The finite configuration of realized centers with `|x| + |y| <= radius`.
    pub fn patch(&self, radius: f64) -> Configuration {
        let mut core: Vec<PaperPoint> = self.core.iter().copied().filter(|p| p.l1_norm() <= radius).collect();
        if let Some(ext) = &self.extension {
            let r = Rect::square(InternalPoint::new(0.0, 0.0), radius * FRAC_1_SQRT_2 * 1.000_001);
            ext.for_each_site_in(&r, |site, p, _| {
                if !ext.is_deleted(&site) && p.l1_norm() <= radius {
                    core.push(p);
                }
            });
        }
        core.sort_by(|a, b| a.lex_cmp(b));
        Configuration {
            s: self.s,
            core,
            extension: None,
        }
    }

    // core centers with `live[k] == false` are ignored
    fn conflicts(&self, cand: PaperPoint, live: &[bool]) -> bool {
        let s = self.s;
        if self.core.iter().zip(live).any(|(c, &on)| on && c.l1(cand) < s) {
            return true;
        }
        if let Some(ext) = &self.extension {
            let mut hit = false;
            let r = Rect::square(to_internal(cand), self.side() * 1.000_001);
            ext.for_each_site_in(&r, |site, p, _| {
                if !hit && !ext.is_deleted(&site) && p.l1(cand) < s {
                    hit = true;
                }
            });
            if hit {
                return true;
            }
        }
        false
    }

    /// Displaces every core center by a seeded uniform draw from the L1 ball
    /// of radius `magnitude`, redrawing (up to [`PERTURB_ATTEMPTS`] times)
    /// while the hard-core condition fails against the centers already
    /// placed and the periodic sites. Centers are visited from the outside
    /// in. Periodic sites are untouched;
    /// use [`Configuration::materialize`] first to perturb a lattice patch.
    pub fn perturb(&self, magnitude: f64, seed: u64) -> Result<Configuration, ConfigError> {
        let mut out = self.clone();
        if magnitude == 0.0 {
            return Ok(out);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // outermost first, so that centers pinned against the periodic
        // extension move before their inner neighbors close in
        let mut order: Vec<usize> = (0..out.core.len()).collect();
        order.sort_by(|&i, &j| {
            let (p, q) = (self.core[i], self.core[j]);
            q.l1_norm().total_cmp(&p.l1_norm()).then(p.lex_cmp(&q))
        });
        let mut live = alloc::vec![false; out.core.len()];
        for k in order {
            let orig = out.core[k];
            let mut placed = false;
            for _ in 0..PERTURB_ATTEMPTS {
                let (dx, dy) = uniform_l1_ball(&mut rng, magnitude);
                let cand = PaperPoint::new(orig.x + dx, orig.y + dy);
                if !out.conflicts(cand, &live) {
                    out.core[k] = cand;
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(ConfigError::Infeasible { index: k, center: orig });
            }
            live[k] = true;
        }
        Ok(out)
    }

    /// Adds `count` obstacles with centers drawn uniformly from
    /// `|x| + |y| <= radius`, each placed by rejection against everything
    /// already present.
    pub fn scatter(&self, radius: f64, count: usize, seed: u64) -> Result<Configuration, ConfigError> {
        let mut out = self.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut live = alloc::vec![true; out.core.len()];
        for k in 0..count {
            let mut placed = false;
            for _ in 0..SCATTER_ATTEMPTS {
                let (x, y) = uniform_l1_ball(&mut rng, radius);
                let cand = PaperPoint::new(x, y);
                if !out.conflicts(cand, &live) {
                    out.core.push(cand);
                    live.push(true);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(ConfigError::Infeasible {
                    index: self.core.len() + k,
                    center: PaperPoint::ORIGIN,
                });
            }
        }
        Ok(out)
    }

    /// Whether `z` lies in the interior of some obstacle.
    pub fn in_obstacle_interior(&self, z: PaperPoint) -> bool {
        !self.centers_near(z, self.s / 2.0).is_empty()
    }

    /// 64-bit FNV-1a digest of the exact configuration description.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.f64(self.s);
        h.u64(self.core.len() as u64);
        for p in &self.core {
            h.f64(p.x);
            h.f64(p.y);
        }
        if let Some(ext) = &self.extension {
            h.u64(1);
            for b in &ext.basis {
                h.f64(b.x);
                h.f64(b.y);
            }
            h.u64(ext.base_centers.len() as u64);
            for b in &ext.base_centers {
                h.f64(b.x);
                h.f64(b.y);
            }
            h.u64(ext.deletions.len() as u64);
            for d in &ext.deletions {
                h.u64(d.base as u64);
                h.u64(d.i as u64);
                h.u64(d.j as u64);
            }
        }
        h.0
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn f64(&mut self, x: f64) {
        self.u64(x.to_bits())
    }
}

/// Uniform draw in `[0, 1)` with 53 random bits.
#[inline]
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform point of the L1 ball of radius `r`, by rejection from its
/// bounding square.
pub(crate) fn uniform_l1_ball(rng: &mut impl RngCore, r: f64) -> (f64, f64) {
    loop {
        let x = (2.0 * unit_f64(rng) - 1.0) * r;
        let y = (2.0 * unit_f64(rng) - 1.0) * r;
        if math::abs(x) + math::abs(y) <= r {
            return (x, y);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PsiError {
    #[error("point ({}, {}) is inside an obstacle of the source configuration", .0.x, .0.y)]
    NotInTable(PaperPoint),
    #[error("no obstacle of the source configuration matches the target obstacle at ({}, {})", .0.x, .0.y)]
    Unmatched(PaperPoint),
    #[error("matched obstacles at ({}, {}) and ({}, {}) admit no corner segment", a.x, a.y, b.x, b.y)]
    NoValidDirection { a: PaperPoint, b: PaperPoint },
}

impl Configuration {
    /// Comparison map from the table of `self` (`g`) to the table of `f`.
    ///
    /// Points outside the obstacles of `f` are fixed. A point inside an
    /// obstacle `O2` of `f` but not inside its matched obstacle `O1` of `g`
    /// is pushed along the displacement `ξ` from `O1` to `O2` until it leaves
    /// `O2`. Obstacles are matched to the nearest center within `s / 2`.
    pub fn psi_map(&self, f: &Configuration, z: PaperPoint) -> Result<PaperPoint, PsiError> {
        let s = self.s;
        if self.in_obstacle_interior(z) {
            return Err(PsiError::NotInTable(z));
        }
        let Some(&c2) = f.centers_near(z, f.s / 2.0).first() else {
            return Ok(z);
        };
        let Some(&c1) = self.centers_near(c2, s / 2.0).first() else {
            return Err(PsiError::Unmatched(c2));
        };
        let q1 = to_internal(c1);
        let q2 = to_internal(c2);
        let (du, dv) = (q2.u - q1.u, q2.v - q1.v);
        let a = f.side();
        // the corner segment from O1 to O2 lies in O2 \ O1 iff the shift
        // stays within one side length
        if (du == 0.0 && dv == 0.0) || f64::max(math::abs(du), math::abs(dv)) > a {
            return Err(PsiError::NoValidDirection { a: c1, b: c2 });
        }
        let zq = to_internal(z);
        let h = a / 2.0;
        let mut t = f64::INFINITY;
        if du != 0.0 {
            let edge = if du > 0.0 { q2.u + h } else { q2.u - h };
            t = f64::min(t, (edge - zq.u) / du);
        }
        if dv != 0.0 {
            let edge = if dv > 0.0 { q2.v + h } else { q2.v - h };
            t = f64::min(t, (edge - zq.v) / dv);
        }
        let t = f64::max(t, 0.0);
        let out = InternalPoint::new(zq.u + t * du, zq.v + t * dv);
        Ok(out.to_paper())
    }
}
