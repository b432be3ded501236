mod common;

use common::fixture;
use proptest::prelude::*;
use vantage::evolve::{
    aesthetic_score, blended_shaping, crossover, evaluate_genome, evolve, genome_to_json, parse_genome,
    AestheticConfig, EvolutionConfig, Genome, GenomeSpace, Mode, ModelLibrary, ModelTarget,
};
use vantage::rng::{stream, Domain};

fn models_config() -> EvolutionConfig {
    EvolutionConfig {
        mode: Mode::Models,
        ..EvolutionConfig::default()
    }
}

/// Whether every gene of `child` can be matched to a distinct gene of the
/// parents.
fn is_sub_multiset<T: PartialEq + Clone>(child: &[T], a: &[T], b: &[T]) -> bool {
    let mut pool: Vec<T> = a.iter().chain(b).cloned().collect();
    child.iter().all(|g| match pool.iter().position(|p| p == g) {
        Some(k) => {
            pool.swap_remove(k);
            true
        }
        None => false,
    })
}

fn sweep(config: &EvolutionConfig, library: Option<&ModelLibrary>) {
    let t = fixture("top_only.json");
    let space = GenomeSpace::new(config, &t, library).unwrap();
    let mut rng = stream(99, Domain::Init, 7, 7);
    let genomes: Vec<Genome> = (0..1000).map(|_| space.random_genome(&mut rng)).collect();
    for g in &genomes {
        assert!(space.violations(g).is_empty(), "{:?}", space.violations(g));
    }

    let mut g = genomes[0].clone();
    for k in 0..10_000 {
        g = space.mutate(&g, &mut rng);
        assert!(
            space.violations(&g).is_empty(),
            "mutation {k}: {:?}",
            space.violations(&g)
        );
    }

    for pair in genomes.chunks(2).take(500) {
        let child = crossover(&pair[0], &pair[1], &mut rng).unwrap();
        let (lo, hi) = (pair[0].len().min(pair[1].len()), pair[0].len().max(pair[1].len()));
        assert!((lo..=hi).contains(&child.len()));
        assert!(space.violations(&child).is_empty());
        let inherited = match (&child, &pair[0], &pair[1]) {
            (Genome::Blocks { blocks: c }, Genome::Blocks { blocks: a }, Genome::Blocks { blocks: b }) => {
                is_sub_multiset(c, a, b)
            }
            (Genome::Models { placements: c }, Genome::Models { placements: a }, Genome::Models { placements: b }) => {
                is_sub_multiset(c, a, b)
            }
            _ => false,
        };
        assert!(inherited, "child has genes from neither parent");
    }
}

#[test]
fn block_operators_preserve_invariants() {
    sweep(&EvolutionConfig::default(), None);
}

#[test]
fn model_operators_preserve_invariants() {
    let lib = ModelLibrary::rocks_and_trees();
    sweep(&models_config(), Some(&lib));
}

#[test]
fn crossing_modes_is_an_error() {
    let lib = ModelLibrary::rocks_and_trees();
    let t = fixture("top_only.json");
    let blocks = EvolutionConfig::default();
    let models = models_config();
    let mut rng = stream(1, Domain::Init, 0, 0);
    let a = GenomeSpace::new(&blocks, &t, None).unwrap().random_genome(&mut rng);
    let b = GenomeSpace::new(&models, &t, Some(&lib))
        .unwrap()
        .random_genome(&mut rng);
    assert!(crossover(&a, &b, &mut rng).is_err());
}

fn small(seed: u64) -> EvolutionConfig {
    EvolutionConfig {
        population_size: 16,
        generations: 6,
        master_seed: seed,
        check_invariants: true,
        ..EvolutionConfig::default()
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let t = fixture("top_only.json");
    let lib = ModelLibrary::rocks_and_trees();
    for seed in [3, 4] {
        let c = small(seed);
        assert_eq!(evolve(&t, &c, None, 1).unwrap(), evolve(&t, &c, None, 8).unwrap());
        let m = EvolutionConfig {
            mode: Mode::Models,
            ..small(seed)
        };
        assert_eq!(
            evolve(&t, &m, Some(&lib), 1).unwrap(),
            evolve(&t, &m, Some(&lib), 8).unwrap()
        );
    }
}

#[test]
fn best_fitness_never_decreases_and_matches_reevaluation() {
    let t = fixture("both_visible.json");
    let c = EvolutionConfig {
        generations: 15,
        ..small(5)
    };
    let r = evolve(&t, &c, None, 0).unwrap();
    for w in r.history.windows(2) {
        assert!(w[1].best_fitness >= w[0].best_fitness, "elitism lost the leader");
    }
    let again = evaluate_genome(&t, &r.best.genome, &c, None).unwrap();
    assert_eq!(again, r.best);
    let best_seen = r.history.iter().map(|h| h.best_fitness).fold(f64::MIN, f64::max);
    assert_eq!(r.best.score, best_seen);
}

#[test]
fn stops_once_every_constraint_is_met() {
    let t = fixture("open_20.json");
    let r = evolve(&t, &small(6), None, 0).unwrap();
    assert_eq!(r.history.len(), 1);
    assert_eq!(r.best.score, 1.0);
}

#[test]
fn genome_json_round_trips() {
    let t = fixture("top_only.json");
    let lib = ModelLibrary::rocks_and_trees();
    let m = models_config();
    let mut rng = stream(8, Domain::Init, 0, 0);
    for g in [
        GenomeSpace::new(&EvolutionConfig::default(), &t, None)
            .unwrap()
            .random_genome(&mut rng),
        GenomeSpace::new(&m, &t, Some(&lib)).unwrap().random_genome(&mut rng),
    ] {
        let text = genome_to_json(&g);
        assert_eq!(parse_genome(&text).unwrap(), g);
    }
}

#[test]
fn aesthetic_penalty_is_zero_on_target() {
    let lib = ModelLibrary::rocks_and_trees();
    let id = lib.models()[0].id.clone();
    let genome = parse_genome(&format!(
        r#"{{"mode": "models", "placements": [{{"model": "{id}", "pos": [2.0, 2.0], "yaw_deg": 0}}, {{"model": "{id}", "pos": [5.0, 6.0], "yaw_deg": 90}}]}}"#
    ))
    .unwrap();
    let Genome::Models { placements } = genome else {
        panic!("expected a models genome")
    };
    let mut a = AestheticConfig {
        weight_quantity: 1.0,
        weight_spacing: 1.0,
        ..AestheticConfig::default()
    };
    a.targets.insert(
        id,
        ModelTarget {
            count: Some(2),
            nn_distance: Some(5.0),
        },
    );
    assert!(aesthetic_score(&placements, &a).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn blended_shaping_stays_in_the_sub_unit_band(s in 0.0..=1.0f64, p in 0.0..100.0f64, share in 0.0..0.999f64) {
        let v = blended_shaping(s, p, share);
        prop_assert!((0.0..1.0).contains(&v) || (v == 1.0 && s == 1.0));
    }
}
