#![allow(dead_code)]

use windtree_core::{
    Configuration, DirIndex, DirectionClass, InternalPoint, PaperPoint, ParticleState,
};

/// What the marcher saw at a contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contact {
    Reflection { t: f64, pos: InternalPoint, dir_after: DirIndex },
    Corner { t: f64, pos: InternalPoint },
    Escaped,
}

/// Brute-force small-step integrator over a finite list of obstacle
/// centers. Each step advances by the L∞ clearance to the nearest obstacle
/// still ahead, capped at `cap`, so a step can never penetrate; contact is
/// declared once the clearance falls below `eps`.
pub struct Marcher {
    pub centers: Vec<InternalPoint>,
    pub h: f64,
    pub eps: f64,
    pub cap: f64,
    pub far: f64,
}

impl Marcher {
    pub fn new(g: &Configuration) -> Marcher {
        let a = g.side();
        Marcher {
            centers: g.core().iter().map(|p| p.to_internal()).collect(),
            h: a / 2.0,
            eps: 1e-13 * a,
            cap: 0.25 * a,
            far: g.core().iter().map(|p| p.to_internal().norm()).fold(0.0, f64::max) + 4.0 * a,
        }
    }

    /// Marches until the next contact.
    pub fn next(&self, dc: &DirectionClass, pos: &mut InternalPoint, dir: DirIndex, clock: &mut f64) -> Contact {
        let d = dc.member(dir);
        loop {
            let mut step = self.cap;
            for c in &self.centers {
                let (ou, ov) = (pos.u - c.u, pos.v - c.v);
                let (gu, gv) = (ou.abs() - self.h, ov.abs() - self.h);
                let r = gu.max(gv).max(0.0);
                if r >= self.eps {
                    step = step.min(r);
                    continue;
                }
                let (on_u, on_v) = (gu.abs() < self.eps, gv.abs() < self.eps);
                let into_u = on_u && ou * d.du < 0.0;
                let into_v = on_v && ov * d.dv < 0.0;
                if on_u && on_v && (into_u || into_v) {
                    return Contact::Corner { t: *clock, pos: *pos };
                }
                if into_u {
                    let dir_after = DirIndex::from_signs(-d.du, d.dv);
                    return Contact::Reflection { t: *clock, pos: *pos, dir_after };
                }
                if into_v {
                    let dir_after = DirIndex::from_signs(d.du, -d.dv);
                    return Contact::Reflection { t: *clock, pos: *pos, dir_after };
                }
                // touching but moving away: cannot be hit
            }
            let step = step.max(self.eps * 0.5);
            *pos = InternalPoint::new(pos.u + d.du * step, pos.v + d.dv * step);
            *clock += step;
            if pos.norm() > self.far {
                return Contact::Escaped;
            }
        }
    }

    /// The first `n` contacts from `st`.
    pub fn run(&self, dc: &DirectionClass, st: &ParticleState, n: usize) -> Vec<Contact> {
        let mut pos = st.pos;
        let mut dir = st.dir;
        let mut clock = st.clock;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let c = self.next(dc, &mut pos, dir, &mut clock);
            out.push(c);
            match c {
                Contact::Reflection { dir_after, .. } => dir = dir_after,
                _ => break,
            }
        }
        out
    }
}

/// Minimal 64-bit LCG for test inputs, so that tests depend on nothing
/// under test for their randomness.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// An angle whose internal-frame components both exceed `min` in size.
pub fn generic_theta(rng: &mut Lcg, min: f64) -> f64 {
    loop {
        let th = rng.range(0.05, std::f64::consts::FRAC_PI_2 - 0.05);
        let d = DirectionClass::new(th).unwrap().member(DirIndex::I1);
        if d.du.abs() > min && d.dv.abs() > min {
            return th;
        }
    }
}

/// A uniform start strictly inside `|x| + |y| < r` at clearance at least
/// `gap` from every obstacle.
pub fn free_start(g: &Configuration, rng: &mut Lcg, r: f64, gap: f64) -> InternalPoint {
    let h = g.side() / 2.0;
    loop {
        let p = PaperPoint::new(rng.range(-r, r), rng.range(-r, r));
        if p.l1_norm() >= r {
            continue;
        }
        let q = p.to_internal();
        let clear = g
            .core()
            .iter()
            .map(|c| {
                let c = c.to_internal();
                ((q.u - c.u).abs() - h).max((q.v - c.v).abs() - h)
            })
            .fold(f64::INFINITY, f64::min);
        if clear > gap {
            return q;
        }
    }
}

/// Ring of index `n` around `count` scattered obstacles.
pub fn ringed_scatter(n: u32, s: f64, count: usize, seed: u64) -> Configuration {
    let inner = Configuration::empty(s).unwrap().scatter((n as f64 - 1.2) * s, count, seed).unwrap();
    Configuration::make_ringed(&inner, n).unwrap()
}
