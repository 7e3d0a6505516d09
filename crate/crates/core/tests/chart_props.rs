mod common;

use pacemaker::chart::{BeatId, EdgeId, ExperienceChart, Position, SpecId};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Picks an existing id most of the time and a bogus one otherwise.
fn pick<T: Clone>(rng: &mut StdRng, items: &[T], bogus: T) -> T {
    if items.is_empty() || rng.gen_bool(0.1) {
        bogus
    } else {
        items[rng.gen_range(0..items.len())].clone()
    }
}

fn random_op(
    rng: &mut StdRng,
    chart: &mut ExperienceChart,
) -> Result<(), pacemaker::chart::ChartError> {
    let beats: Vec<BeatId> = chart.beats().map(|b| b.id.clone()).collect();
    let edges: Vec<EdgeId> = chart.edges().map(|e| e.id.clone()).collect();
    let specs: Vec<SpecId> = chart.specs().map(|s| s.id.clone()).collect();
    let beat = |rng: &mut StdRng| pick(rng, &beats, BeatId::new("beat-0"));
    let spec = |rng: &mut StdRng| pick(rng, &specs, SpecId::new("spec-0"));
    match rng.gen_range(0..11) {
        0 | 1 => {
            let spec = rng.gen_bool(0.5).then(|| spec(rng));
            chart
                .add_beat(format!("n{}", rng.gen_range(0..5)), spec)
                .map(drop)
        }
        2 => chart.remove_beat(&beat(rng)).map(drop),
        3 => chart.rename_beat(&beat(rng), "renamed"),
        4 => chart
            .set_position(&beat(rng), Some(Position { x: 1.0, y: 2.0 }))
            .map(drop),
        5 | 6 => {
            let (a, b) = (beat(rng), beat(rng));
            chart.add_edge(&a, &b).map(drop)
        }
        7 => {
            let e = pick(rng, &edges, EdgeId::new("edge-0"));
            let from = rng.gen_bool(0.5).then(|| beat(rng));
            let to = rng.gen_bool(0.5).then(|| beat(rng));
            chart.reconnect_edge(&e, from, to)
        }
        8 => chart
            .remove_edge(&pick(rng, &edges, EdgeId::new("edge-0")))
            .map(drop),
        9 => {
            let mut draft = common::random_draft(rng, 0);
            if rng.gen_bool(0.2) {
                draft.gameplay_intensity = 101.0;
            }
            if rng.gen_bool(0.5) {
                chart.add_spec(draft).map(drop)
            } else {
                chart.update_spec(&spec(rng), draft)
            }
        }
        _ => {
            if rng.gen_bool(0.5) {
                chart.remove_spec(&spec(rng)).map(drop)
            } else {
                let s = rng.gen_bool(0.7).then(|| spec(rng));
                chart.assign_spec(&beat(rng), s).map(drop)
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Every operation either succeeds and keeps the chart valid, or fails
    /// and leaves it exactly as it was.
    #[test]
    fn operations_preserve_invariants(seed in any::<u64>(), steps in 1usize..60) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut chart = ExperienceChart::new();
        for _ in 0..steps {
            let before = chart.clone();
            match random_op(&mut rng, &mut chart) {
                Ok(()) => prop_assert!(chart.validate().is_empty(), "{:?}", chart.validate()),
                Err(_) => prop_assert_eq!(&chart, &before),
            }
        }
    }

    #[test]
    fn ids_are_never_reused(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut chart = ExperienceChart::new();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..40 {
            if rng.gen_bool(0.6) || chart.beats().len() == 0 {
                let id = chart.add_beat("x", None).unwrap();
                prop_assert!(seen.insert(id));
            } else {
                let victim = chart.beats().next().unwrap().id.clone();
                chart.remove_beat(&victim).unwrap();
            }
        }
    }
}
