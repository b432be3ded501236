mod common;

use std::time::Instant;

use common::{bfs_distance, square_template};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vantage::geometry::Rect;
use vantage::navgrid::{astar, build_navgrid, sample_walk, Cell, NavGrid};

fn random_grid(rng: &mut ChaCha8Rng, size: usize, blocked: f64) -> NavGrid {
    let mut g = NavGrid::open(size, size, 1.0);
    for row in 0..size {
        for col in 0..size {
            if rng.random_bool(blocked) {
                g.set_blocked(Cell::new(row, col), true);
            }
        }
    }
    g
}

fn random_cell(rng: &mut ChaCha8Rng, size: usize) -> Cell {
    Cell::new(rng.random_range(0..size), rng.random_range(0..size))
}

fn assert_valid_path(g: &NavGrid, path: &[Cell], start: Cell, goal: Cell) {
    assert_eq!(path.first(), Some(&start));
    assert_eq!(path.last(), Some(&goal));
    for c in path {
        assert!(!g.is_blocked(*c));
    }
    for w in path.windows(2) {
        assert_eq!(w[0].manhattan(w[1]), 1, "non-adjacent step {:?} -> {:?}", w[0], w[1]);
    }
}

#[test]
fn astar_matches_bfs_on_random_grids() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut found, mut missing) = (0, 0);
    for _ in 0..100 {
        let g = random_grid(&mut rng, 40, 0.2);
        for _ in 0..5 {
            let (s, t) = (random_cell(&mut rng, 40), random_cell(&mut rng, 40));
            let want = bfs_distance(&g, s, t);
            let got = astar(&g, s, t);
            match (&got, want) {
                (Some(path), Some(d)) => {
                    assert_valid_path(&g, path, s, t);
                    assert_eq!(path.len() - 1, d);
                    found += 1;
                }
                (None, None) => missing += 1,
                _ => panic!("A* {:?} vs BFS {want:?} for {s:?} -> {t:?}", got.map(|p| p.len() - 1)),
            }
        }
    }
    assert!(found > 100 && missing > 10, "found {found}, missing {missing}");
    assert!(clock.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn astar_is_repeatable() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let g = random_grid(&mut rng, 30, 0.15);
    let (s, t) = (Cell::new(0, 0), Cell::new(29, 29));
    assert_eq!(astar(&g, s, t), astar(&g, s, t));
}

#[test]
fn footprints_block_exactly_the_overlapping_cells() {
    let t = square_template(20.0, [1.0, 1.0], [19.0, 19.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let fps: Vec<Rect> = (0..rng.random_range(1..5))
            .map(|_| {
                Rect::from_center(
                    [rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)],
                    [rng.random_range(0.3..5.0), rng.random_range(0.3..5.0)],
                )
            })
            .collect();
        let radius = rng.random_range(0.0..0.8);
        let cell = [0.25, 0.5, 1.0][rng.random_range(0..3)];
        let g = build_navgrid(&t, &fps, cell, radius).unwrap();
        for row in 0..g.height {
            for col in 0..g.width {
                // Interval-overlap oracle on the cell square grown by the radius.
                let (x0, z0) = (col as f64 * cell - radius, row as f64 * cell - radius);
                let (x1, z1) = ((col + 1) as f64 * cell + radius, (row + 1) as f64 * cell + radius);
                let want = fps.iter().any(|f| {
                    let ox = x1.min(f.max[0]) - x0.max(f.min[0]);
                    let oz = z1.min(f.max[1]) - z0.max(f.min[1]);
                    ox > 0.0 && oz > 0.0
                });
                assert_eq!(g.is_blocked(Cell::new(row, col)), want, "cell ({row}, {col})");
            }
        }
    }
}

#[test]
fn blocked_endpoint_marks_grid_infeasible() {
    let t = square_template(10.0, [1.0, 1.0], [9.0, 9.0]);
    let g = build_navgrid(&t, &[Rect::from_center([1.0, 1.0], [1.0, 1.0])], 0.5, 0.4).unwrap();
    assert!(g.infeasible);
    assert!(astar(&g, g.start_cell, g.end_cell).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn walk_samples_follow_the_path(seed in 0u64..10_000, spacing in 0.05..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_grid(&mut rng, 25, 0.15);
        let (s, t) = (random_cell(&mut rng, 25), random_cell(&mut rng, 25));
        prop_assume!(!g.is_blocked(s) && !g.is_blocked(t));
        let Some(path) = astar(&g, s, t) else { return Ok(()); };
        let samples = sample_walk(&path, &g, 1.6, spacing);
        let total = (path.len() - 1) as f64 * g.cell_size;

        let first = samples[0].pose.position;
        let last = samples.last().unwrap().pose.position;
        let (sx, sz) = g.cell_center(s);
        let (tx, tz) = g.cell_center(t);
        prop_assert!((first.x - sx).abs() < 1e-9 && (first.z - sz).abs() < 1e-9);
        prop_assert!((last.x - tx).abs() < 1e-9 && (last.z - tz).abs() < 1e-9);
        prop_assert!((samples.last().unwrap().arc_length - total).abs() < 1e-9);
        let expected = if path.len() == 1 { 1 } else { (total / spacing + 1e-9).floor() as usize + 1
            + usize::from(total - (total / spacing + 1e-9).floor() * spacing > 1e-9) };
        prop_assert_eq!(samples.len(), expected);
        for w in samples.windows(2) {
            let gap = w[1].arc_length - w[0].arc_length;
            prop_assert!(gap > 0.0 && gap <= spacing + 1e-9);
            let d = (w[1].pose.position - w[0].pose.position).length();
            prop_assert!(d <= gap + 1e-9);
        }
        for smp in &samples {
            prop_assert_eq!(smp.pose.position.y, 1.6);
            let c = g.cell_of(smp.pose.position.x, smp.pose.position.z).unwrap();
            prop_assert!(!g.is_blocked(c));
        }
    }
}
