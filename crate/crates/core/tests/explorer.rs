mod common;

use common::{explore_with_checks, lattice_flood, square_template};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vantage::explorer::{point_free, Exploration, ExploreParams, Termination};
use vantage::geometry::{Aabb, Vec3};
use vantage::template::LevelTemplate;

fn explore_checked(t: &LevelTemplate, occluders: &[Aabb]) -> Exploration {
    let (ex, violations) = explore_with_checks(t, occluders);
    assert!(violations.is_empty(), "{violations:?}");
    ex
}

#[test]
fn open_map_is_fully_covered() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for seed in 0..10 {
        let size = rng.random_range(8..=20) as f64;
        let start = [rng.random_range(0.0..size), rng.random_range(0.0..size)];
        let t = square_template(size, start, [size - start[0] * 0.5, size - start[1] * 0.5]);
        let ex = explore_checked(&t, &[]);
        let r = &ex.report;
        assert_eq!(r.coverage, 1.0, "seed {seed}");
        assert_eq!(r.points_observed_fraction, 1.0);
        assert_eq!(r.termination, Termination::FrontierExhausted);
        assert!(r.ticks_used <= 10 * r.total_points);
    }
}

#[test]
fn bisected_map_covers_the_reachable_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for seed in 0..10 {
        let x = rng.random_range(6.0..14.0);
        let wall = Aabb::new(Vec3::new(x - 0.25, 0.0, 0.0), Vec3::new(x + 0.25, 3.0, 20.0)).unwrap();
        let start = if rng.random_bool(0.5) {
            [rng.random_range(0.5..x - 1.5), rng.random_range(0.5..19.5)]
        } else {
            [rng.random_range(x + 1.5..19.5), rng.random_range(0.5..19.5)]
        };
        let t = square_template(20.0, start, [0.0, 0.0]);
        let ex = explore_checked(&t, &[wall]);
        let r = &ex.report;

        let start_idx = ex.points.nearest(start[0], start[1]);
        let flood = lattice_flood(&ex.true_grid, &ex.points, start_idx);
        let reachable = flood.iter().filter(|f| **f).count();
        let free = ex.points.points.iter().filter(|p| point_free(&ex.true_grid, p)).count();
        let expected = reachable as f64 / free as f64;
        assert!(
            (r.coverage - expected).abs() <= 1.0 / free as f64 + 1e-12,
            "seed {seed}: coverage {} vs reachable fraction {expected}",
            r.coverage
        );
        assert!(r.coverage < 0.9);
        assert!(r.ticks_used <= 10 * r.total_points);
    }
}

#[test]
fn cluttered_maps_keep_the_state_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..5 {
        let boxes: Vec<Aabb> = (0..8)
            .map(|_| {
                let c = [rng.random_range(3.0..17.0), rng.random_range(3.0..17.0)];
                let h = [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)];
                Aabb::new(
                    Vec3::new(c[0] - h[0], 0.0, c[1] - h[1]),
                    Vec3::new(c[0] + h[0], rng.random_range(0.5..3.0), c[1] + h[1]),
                )
                .unwrap()
            })
            .collect();
        let t = square_template(20.0, [0.5, 0.5], [19.5, 19.5]);
        let ex = explore_checked(&t, &boxes);
        assert!(ex.report.points_observed_fraction > 0.0);
    }
}

#[test]
fn exploration_is_repeatable() {
    let t = square_template(12.0, [2.0, 3.0], [10.0, 10.0]);
    let wall = Aabb::new(Vec3::new(5.0, 0.0, 0.0), Vec3::new(5.5, 3.0, 9.0)).unwrap();
    let params = ExploreParams::default();
    let a = vantage::explorer::run_exploration(&t, &[wall], &params).unwrap();
    let b = vantage::explorer::run_exploration(&t, &[wall], &params).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.report, b.report);
}
