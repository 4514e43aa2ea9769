mod common;

use common::{free_start, generic_theta, ringed_scatter, Contact, Lcg, Marcher};
use windtree_core::flow::{flow, flow_product, CountingSink, NullSink};
use windtree_core::stats::{hopf_integrals, HopfObservable};
use windtree_core::{
    Configuration, DirIndex, DirectionClass, EventKind, EventRecord, FlowOptions, ParticleState, ProductState, Region,
    Table,
};

#[test]
fn matches_marching_oracle() {
    let mut rng = Lcg(17);
    let mut compared = 0;
    for cfg in 0..6 {
        let g = ringed_scatter(7, 1.0, 15 + 5 * cfg, 100 + cfg as u64);
        let t = Table::new(&g);
        let dc = DirectionClass::new(generic_theta(&mut rng, 0.15)).unwrap();
        let st = ParticleState::new(free_start(&g, &mut rng, 6.0, 0.05), DirIndex::ALL[cfg % 4]);
        let want = Marcher::new(&g).run(&dc, &st, 300);
        let mut got: Vec<EventRecord> = Vec::new();
        let total = match want.last() {
            Some(Contact::Reflection { t, .. }) | Some(Contact::Corner { t, .. }) => *t + 1e-3,
            _ => unreachable!("ringed tables trap every orbit"),
        };
        flow(&t, &dc, &st, total, &FlowOptions::default(), &mut got).unwrap();
        assert_eq!(got.len(), want.len(), "config {cfg}");
        for (e, w) in got.iter().zip(&want) {
            match *w {
                Contact::Reflection { t: wt, pos, dir_after } => {
                    assert_eq!(e.kind, EventKind::Reflection);
                    assert_eq!(e.dir_after, dir_after);
                    assert!(e.pos.linf(pos) < 1e-6 * g.side(), "{e:?} vs {w:?}");
                    assert!((e.t - wt).abs() < 1e-6);
                }
                Contact::Corner { pos, .. } => {
                    assert_eq!(e.kind, EventKind::CornerStop);
                    assert!(e.pos.linf(pos) < 1e-6 * g.side());
                }
                Contact::Escaped => unreachable!(),
            }
            compared += 1;
        }
    }
    assert!(compared >= 1000);
}

#[test]
fn time_reversal_returns_to_start() {
    let mut rng = Lcg(5);
    for trial in 0..200 {
        let g = ringed_scatter(4, 1.0, 15, trial);
        let t = Table::new(&g);
        let dc = DirectionClass::new(generic_theta(&mut rng, 0.05)).unwrap();
        let st = ParticleState::new(free_start(&g, &mut rng, 3.0, 1e-3), DirIndex::ALL[trial as usize % 4]);
        let big_t = rng.range(1.0, 200.0);
        let fwd = flow(&t, &dc, &st, big_t, &FlowOptions::default(), &mut NullSink).unwrap();
        if !fwd.is_running() {
            continue;
        }
        let back = flow(&t, &dc, &fwd.reversed(), big_t, &FlowOptions::default(), &mut NullSink).unwrap();
        assert!(back.is_running());
        assert!(back.pos.linf(st.pos) < 1e-9 * (1.0 + big_t), "trial {trial}");
        assert_eq!(back.dir, st.dir.reverse());
    }
}

#[test]
fn ring_contains_every_event() {
    let mut rng = Lcg(99);
    for (n, s) in [(1u32, 1.0), (2, 0.5), (3, 1.0)] {
        let g = Configuration::make_ringed(&Configuration::empty(s).unwrap(), n).unwrap();
        let t = Table::new(&g);
        for k in 0..10 {
            let dc = DirectionClass::new(generic_theta(&mut rng, 0.02)).unwrap();
            let st = ParticleState::new(free_start(&g, &mut rng, n as f64 * s * 0.9, 1e-6), DirIndex::ALL[k % 4]);
            let mut evs: Vec<EventRecord> = Vec::new();
            let out = flow(&t, &dc, &st, 1e3, &FlowOptions::default(), &mut evs).unwrap();
            for e in evs.iter().chain(std::iter::once(&EventRecord {
                t: out.clock,
                kind: EventKind::Reflection,
                pos: out.pos,
                dir_before: out.dir,
                dir_after: out.dir,
            })) {
                assert!(e.pos.to_paper().l1_norm() <= n as f64 * s + 1e-9);
            }
        }
    }
}

#[test]
fn liouville_proxy() {
    // uniform phase-space samples stay uniform under the flow
    let g = ringed_scatter(3, 1.0, 4, 3);
    let t = Table::new(&g);
    let dc = DirectionClass::new(0.83).unwrap();
    let mut rng = Lcg(1234);
    let boxes = [
        windtree_core::geometry::Rect::new(-1.5, -1.5, -0.2, -0.2),
        windtree_core::geometry::Rect::new(0.3, -1.0, 1.6, 0.1),
        windtree_core::geometry::Rect::new(-0.5, 0.6, 1.2, 1.9),
    ];
    let n = 20_000;
    let count = |pts: &[ParticleState], b: &windtree_core::geometry::Rect| pts.iter().filter(|p| b.contains(p.pos)).count();
    // uniform over the whole trapped domain with uniform directions
    let full: Vec<ParticleState> = (0..n)
        .map(|k| ParticleState::new(free_start(&g, &mut rng, 2.99, 0.0), DirIndex::ALL[k % 4]))
        .collect();
    let moved: Vec<ParticleState> = full
        .iter()
        .map(|p| flow(&t, &dc, p, 7.3, &FlowOptions::default(), &mut NullSink).unwrap())
        .collect();
    for b in &boxes {
        let before = count(&full, b) as f64;
        let after = count(&moved, b) as f64;
        let p = before / n as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((after - before).abs() < 3.0 * sigma * std::f64::consts::SQRT_2, "{before} {after}");
    }
}

#[test]
fn direction_closure_over_many_events() {
    let g = ringed_scatter(4, 1.0, 20, 8);
    let t = Table::new(&g);
    let dc = DirectionClass::new(1.1).unwrap();
    let st = ParticleState::new(free_start(&g, &mut Lcg(3), 3.0, 0.01), DirIndex::I2);
    let mut evs: Vec<EventRecord> = Vec::new();
    flow(&t, &dc, &st, 5e3, &FlowOptions::default(), &mut evs).unwrap();
    assert!(evs.len() > 1000);
    for w in evs.windows(2) {
        assert!(w[1].t > w[0].t);
        assert_eq!(w[1].dir_before, w[0].dir_after);
    }
}

#[test]
fn restricted_integrals_match_trace_sojourn() {
    let g = ringed_scatter(4, 1.0, 10, 21);
    let t = Table::new(&g);
    let dc = DirectionClass::new(0.7).unwrap();
    let mut rng = Lcg(8);
    let parts: Vec<ParticleState> = (0..3)
        .map(|k| ParticleState::new(free_start(&g, &mut rng, 1.5, 0.01), DirIndex::ALL[k]))
        .collect();
    let ps = ProductState::uniform(parts, dc).unwrap();
    let region = Region::window(2, 1.0);
    let total = 400.0;
    let mut evs: Vec<(usize, EventRecord)> = Vec::new();
    let run = hopf_integrals(&t, &ps, &HopfObservable::Restricted(region.clone()), total, 50.0, &FlowOptions::default(), &mut evs).unwrap();
    // replay the crossings: all-inside time times the running count
    let mut inside: Vec<bool> = ps.particles.iter().map(|p| region.contains(p.pos)).collect();
    let mut crossings: Vec<(f64, usize, bool)> = evs
        .iter()
        .filter_map(|(k, e)| match e.kind {
            EventKind::RegionEntry => Some((e.t, *k, true)),
            EventKind::RegionExit => Some((e.t, *k, false)),
            _ => None,
        })
        .collect();
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut last = 0.0;
    let mut want = 0.0;
    for (tc, k, state) in crossings {
        if inside.iter().all(|&x| x) {
            want += 3.0 * (tc - last);
        }
        inside[k] = state;
        last = tc;
    }
    if inside.iter().all(|&x| x) {
        want += 3.0 * (total - last);
    }
    let got: f64 = run.final_integrals().iter().sum();
    assert!(run.censored_at.is_none());
    assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    assert!(want > 0.0 && want < 3.0 * total);
}

#[test]
fn product_of_clones_counts_events_k_times() {
    let g = ringed_scatter(3, 1.0, 5, 2);
    let t = Table::new(&g);
    let dc = DirectionClass::new(0.5).unwrap();
    let st = ParticleState::new(free_start(&g, &mut Lcg(1), 2.0, 0.01), DirIndex::I1);
    let mut solo = CountingSink::default();
    flow(&t, &dc, &st, 100.0, &FlowOptions::default(), &mut solo).unwrap();
    let mut both = CountingSink::default();
    let ps = ProductState::uniform(vec![st; 3], dc).unwrap();
    flow_product(&t, &ps, 100.0, &FlowOptions::default(), &mut both).unwrap();
    assert_eq!(both.reflections, 3 * solo.reflections);
    assert_eq!(both.corner_stops, 3 * solo.corner_stops);
}
