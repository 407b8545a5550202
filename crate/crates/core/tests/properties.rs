use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use heilbronn::anneal::{optimize, AnnealParams, IncrementalMinArea};
use heilbronn::ball::{admissible_points_on_circle, check_decider, check_nesting, induce_ball};
use heilbronn::compression::{compress, PointN, Scale};
use heilbronn::configuration::{
    normalize_to_unit_disc, Configuration, Point2, Provenance, Transform,
};
use heilbronn::generators::{
    construct_configuration, random_disc, sector_area, CircleConstruction, ConstructionParams,
};
use heilbronn::oracle::{min_triangle_area, min_triangle_naive};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn valid_tuple(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PointN> {
    prop::collection::vec((-3.0f64..3.0, any::<bool>()), n).prop_filter_map("distinct", |v| {
        PointN::new(
            v.into_iter()
                .map(|(e, neg)| if neg { -(10f64.powf(e)) } else { 10f64.powf(e) })
                .collect(),
        )
        .ok()
    })
}

fn planar_integer() -> impl Strategy<Value = PointN> {
    (1u32..=60, 1u32..=60)
        .prop_filter("distinct", |(a, b)| a != b)
        .prop_map(|(a, b)| PointN::new(vec![a as f64, b as f64]).unwrap())
}

fn scale() -> impl Strategy<Value = Scale> {
    (1e-3f64..=1.0).prop_map(|m| Scale::new(m).unwrap())
}

fn disc_points() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), 3..16).prop_filter_map(
        "distinct",
        |v| {
            let pts: Vec<Point2> = v
                .into_iter()
                .map(|(u, t)| [u.sqrt() * t.cos(), u.sqrt() * t.sin()])
                .collect();
            Configuration::new(pts.clone(), Provenance::GridDisc)
                .ok()
                .map(|_| pts)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn source_and_image_are_admissible_and_antipodal(x in valid_tuple(2..=12), m in scale()) {
        let ball = induce_ball(&x, m);
        let image = compress(&x, m).unwrap();
        let r = ball.radius();
        prop_assert!(rel(ball.distance_to_center(x.coords()).unwrap(), r) <= 1e-12);
        prop_assert!(rel(ball.distance_to_center(image.coords()).unwrap(), r) <= 1e-12);
        prop_assert!(ball.is_admissible(x.coords()).unwrap());
        prop_assert!(ball.is_admissible(image.coords()).unwrap());
        let span: f64 = x.coords().iter().zip(image.coords()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(rel(span, 2.0 * r) <= 1e-12);
        if r > 0.0 {
            prop_assert!(!ball.contains(x.coords()).unwrap());
        }
    }

    #[test]
    fn circle_points_are_equally_spaced(x in planar_integer(), m in scale(), half in 1usize..12) {
        let k = 2 * half;
        let ball = induce_ball(&x, m);
        let pts = admissible_points_on_circle(&x, m, k).unwrap();
        prop_assert_eq!(pts.len(), k);
        let c = ball.center();
        let mut all: Vec<Point2> = pts.clone();
        all.push([x.coords()[0], x.coords()[1]]);
        let image = compress(&x, m).unwrap();
        all.push([image.coords()[0], image.coords()[1]]);
        all.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
        let chord = |a: Point2, b: Point2| (a[0] - b[0]).hypot(a[1] - b[1]);
        let first = chord(all[0], all[1]);
        for j in 0..all.len() {
            prop_assert!(rel(chord(all[j], all[(j + 1) % all.len()]), first) <= 1e-12);
        }
        for p in &pts {
            prop_assert!(ball.is_admissible(p).unwrap());
        }
    }

    #[test]
    fn audit_checks_are_deterministic(x in planar_integer(), z in planar_integer(), seed in any::<u64>()) {
        let m = Scale::new(1.0).unwrap();
        prop_assert_eq!(check_decider(&x, &z, m).unwrap(), check_decider(&x, &z, m).unwrap());
        let ball = induce_ball(&x, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = loop {
            if let Ok(y) = PointN::new(ball.sample_uniform(&mut rng)) {
                if ball.contains(y.coords()).unwrap() {
                    break y;
                }
            }
        };
        let run = |s: u64| check_nesting(&x, &y, m, 64, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        let a = run(seed);
        prop_assert_eq!(&a, &run(seed));
        prop_assert_eq!(a.record.passes + a.record.failures, a.record.samples);
    }

    #[test]
    fn normalization_touches_unit_circle(pts in disc_points(), tx in -5.0f64..5.0, ty in -5.0f64..5.0, lambda in 0.1f64..20.0) {
        let moved: Vec<Point2> = pts.iter().map(|p| [lambda * p[0] + tx, lambda * p[1] + ty]).collect();
        let config = Configuration::new(moved, Provenance::GridDisc).unwrap();
        let normalized = normalize_to_unit_disc(&config).unwrap();
        prop_assert!((normalized.max_norm() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(normalized.s(), config.s());
    }

    #[test]
    fn area_scales_with_square_of_factor(pts in disc_points(), lambda in 0.05f64..1.0) {
        let config = Configuration::new(pts, Provenance::GridDisc).unwrap();
        let base = min_triangle_area(&config).min_area;
        let scaled = config.transformed(&Transform { tx: 0.0, ty: 0.0, lambda }).unwrap();
        let area = min_triangle_area(&scaled).min_area;
        prop_assert!((area - lambda * lambda * base).abs() <= 1e-12 * (lambda * lambda * base).max(1e-3));
    }

    #[test]
    fn configuration_json_round_trip(pts in disc_points()) {
        let config = Configuration::new(pts, Provenance::RandomDisc { seed: 4 }).unwrap();
        prop_assert_eq!(Configuration::from_json(&config.to_json()).unwrap(), config);
    }

    #[test]
    fn incremental_matches_full_on_random_moves(pts in disc_points(), moves in prop::collection::vec((0usize..16, 0.0f64..1.0, 0.0f64..6.3, any::<bool>()), 1..60)) {
        let n = pts.len();
        let mut state = IncrementalMinArea::new(pts).unwrap();
        for (i, u, t, keep) in moves {
            let r = u.sqrt();
            state.propose(i % n, [r * t.cos(), r * t.sin()]).unwrap();
            if keep { state.commit() } else { state.rollback() }
            prop_assert_eq!(state.min(), min_triangle_naive(state.points()));
            prop_assert!(state.points().iter().all(|p| p[0].hypot(p[1]) <= 1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn annealing_stays_feasible_and_monotone(s in 3usize..9, seed in any::<u64>()) {
        let params = AnnealParams { iterations: 3000, ..AnnealParams::defaults_for(s, seed) };
        let out = optimize(s, &params, None).unwrap();
        prop_assert!(out.config.points().iter().all(|p| p[0].hypot(p[1]) <= 1.0));
        prop_assert!(out.trace.windows(2).all(|w| w[0].best_area <= w[1].best_area));
        prop_assert_eq!(out.report.min_area, out.trace.last().unwrap().best_area);
    }
}

#[test]
fn construction_cardinality_and_equal_triangles() {
    for s in (5..=101).step_by(2) {
        let c = construct_configuration(s, 1e-2, 1e-6).unwrap();
        assert_eq!(c.s(), s);
        let built =
            CircleConstruction::build(ConstructionParams::new(s, 1e-2, 1e-6).unwrap()).unwrap();
        let target = sector_area(s, built.gap).unwrap();
        for a in built.sector_areas() {
            assert!(rel(a, target) <= 1e-9, "s={s}");
        }
        let tri = built.center_triangle_areas();
        for &a in &tri {
            assert!(rel(a, tri[0]) <= 1e-9, "s={s}");
            assert!(a < target);
        }
    }
}

#[test]
fn center_triangle_to_sector_ratio_increases() {
    let ratios: Vec<f64> = [9, 17, 33, 65, 129]
        .iter()
        .map(|&s| {
            let built =
                CircleConstruction::build(ConstructionParams::new(s, 1e-2, 1e-6).unwrap()).unwrap();
            built.center_triangle_areas()[0] / sector_area(s, built.gap).unwrap()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[0] < w[1]), "{ratios:?}");
    assert!(*ratios.last().unwrap() > 0.999);
}

#[test]
fn optimizer_beats_random_at_eight_points() {
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        0.5 * (v[9] + v[10])
    };
    let optimized = median(
        (0..20u64)
            .map(|seed| {
                optimize(8, &AnnealParams::defaults_for(8, seed), None)
                    .unwrap()
                    .report
                    .min_area
            })
            .collect(),
    );
    let random = median(
        (0..20u64)
            .map(|seed| min_triangle_area(&random_disc(8, seed).unwrap()).min_area)
            .collect(),
    );
    assert!(optimized > random, "{optimized} vs {random}");
}
