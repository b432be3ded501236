//! Generational evolutionary search over level layouts, maximizing the
//! walkthrough visibility fitness from [`crate::visibility`].
//!
//! Each generation is evaluated in parallel; every individual draws from its
//! own RNG stream keyed by `(master_seed, generation, slot)`, so results do
//! not depend on the number of worker threads.

mod aesthetic;
mod genome;
mod operators;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aesthetic::{aesthetic_score, blended_shaping, AestheticConfig, ModelTarget};
pub use genome::{
    genome_to_json, genome_to_occluders, genome_to_scene, model_ids, parse_genome, rotate_ground, rotate_rect, Block,
    Genome, Mode, ModelDef, ModelLibrary, Placement, Scene, YAW_STEPS_DEG,
};
pub use operators::{crossover, GenomeSpace, REROLL_LIMIT};

use crate::navgrid::NavError;
use crate::rng::{stream, Domain};
use crate::template::{format_violations, LevelTemplate, TemplateError, Violation};
use crate::visibility::{evaluate_scene, EvalError, EvalParams, FitnessReport};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid evolution config: {0}")]
    BadConfig(String),
    #[error("invalid model definition: {0}")]
    BadModel(String),
    #[error("unknown model id {0:?}")]
    UnknownModel(String),
    #[error("yaw {0} is not one of 0, 90, 180, 270")]
    BadYaw(u16),
    #[error("cannot cross a blocks genome with a models genome")]
    ModeMismatch,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("template is invalid: {}", format_violations(.0))]
    InvalidTemplate(Vec<Violation>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error("genome invariant violated in generation {generation}, slot {slot}: {detail}")]
    Invariant {
        generation: usize,
        slot: usize,
        detail: String,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl From<TemplateError> for EvolveError {
    fn from(e: TemplateError) -> Self {
        match e {
            TemplateError::Invalid(v) => EvolveError::InvalidTemplate(v),
            TemplateError::Parse { line, column, message } => EvolveError::Parse { line, column, message },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutationRates {
    pub add: f64,
    pub remove: f64,
    #[serde(rename = "move")]
    pub shift: f64,
    pub resize: f64,
}

impl Default for MutationRates {
    fn default() -> Self {
        MutationRates {
            add: 0.2,
            remove: 0.2,
            shift: 0.6,
            resize: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Gene count range; applies to blocks and to model placements.
    pub min_blocks: usize,
    pub max_blocks: usize,
    /// Per-axis block size range `[width, depth, height]`.
    pub min_dim: [f64; 3],
    pub max_dim: [f64; 3],
    pub rates: MutationRates,
    pub sigma_move: f64,
    pub sigma_size: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub master_seed: u64,
    pub mode: Mode,
    pub aesthetic: Option<AestheticConfig>,
    /// Stop as soon as some individual meets every constraint.
    pub stop_when_solved: bool,
    /// Stop after this many generations without a best-fitness improvement.
    pub stall_generations: Option<usize>,
    /// Fail with [`EvolveError::Invariant`] if any produced genome breaks the
    /// layout rules.
    pub check_invariants: bool,
    pub evaluation: EvalParams,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 50,
            generations: 200,
            min_blocks: 1,
            max_blocks: 12,
            min_dim: [0.5, 0.5, 0.5],
            max_dim: [6.0, 6.0, 4.0],
            rates: MutationRates::default(),
            sigma_move: 1.5,
            sigma_size: 0.75,
            tournament_size: 3,
            elite_count: 2,
            master_seed: 0,
            mode: Mode::Blocks,
            aesthetic: None,
            stop_when_solved: false,
            stall_generations: None,
            check_invariants: false,
            evaluation: EvalParams::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |m: &str| Err(EvolveError::BadConfig(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.elite_count >= self.population_size {
            return bad("elite_count must be smaller than population_size");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be at least 1");
        }
        if self.min_blocks > self.max_blocks {
            return bad("min_blocks exceeds max_blocks");
        }
        for i in 0..3 {
            if !(self.min_dim[i] > 0.0) || self.min_dim[i] > self.max_dim[i] || !self.max_dim[i].is_finite() {
                return bad("require 0 < min_dim <= max_dim on every axis");
            }
        }
        let r = &self.rates;
        if [r.add, r.remove, r.shift, r.resize]
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return bad("mutation rates must lie in [0, 1]");
        }
        if !(self.sigma_move >= 0.0
            && self.sigma_move.is_finite()
            && self.sigma_size >= 0.0
            && self.sigma_size.is_finite())
        {
            return bad("mutation sigmas must be finite and non-negative");
        }
        if let Some(a) = &self.aesthetic {
            if !(0.0..1.0).contains(&a.share) || a.weight_quantity < 0.0 || a.weight_spacing < 0.0 {
                return bad("aesthetic share must lie in [0, 1) and weights must be non-negative");
            }
        }
        self.evaluation.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_constraints_met: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub genome: Genome,
    pub report: FitnessReport,
    /// Layout penalty, when aesthetic scoring is enabled in models mode.
    pub penalty: Option<f64>,
    /// Selection score: the report's fitness, or with aesthetics enabled the
    /// constraint count plus the blended sub-unit term.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub best: Evaluated,
    pub history: Vec<GenerationStats>,
}

/// Evaluates one layout against the template.
pub fn evaluate_genome(
    template: &LevelTemplate,
    genome: &Genome,
    config: &EvolutionConfig,
    library: Option<&ModelLibrary>,
) -> Result<Evaluated, EvolveError> {
    let scene = genome_to_scene(genome, library)?;
    let (report, _) = evaluate_scene(template, &scene.occluders, &scene.footprints, &config.evaluation)?;
    let (penalty, score) = match (&config.aesthetic, genome) {
        (Some(a), Genome::Models { placements }) if report.path_found => {
            let p = aesthetic_score(placements, a);
            (
                Some(p),
                report.constraints_met as f64 + blended_shaping(report.shaping, p, a.share),
            )
        }
        _ => (None, report.fitness),
    };
    Ok(Evaluated {
        genome: genome.clone(),
        report,
        penalty,
        score,
    })
}

fn tournament<'p, R: Rng + ?Sized>(pop: &'p [Evaluated], size: usize, rng: &mut R) -> &'p Evaluated {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let i = rng.random_range(0..pop.len());
        if pop[i].score > pop[best].score || (pop[i].score == pop[best].score && i < best) {
            best = i;
        }
    }
    &pop[best]
}

/// Runs the generational loop on `workers` threads (0 = rayon default).
pub fn evolve(
    template: &LevelTemplate,
    config: &EvolutionConfig,
    library: Option<&ModelLibrary>,
    workers: usize,
) -> Result<EvolutionResult, EvolveError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvolveError::Pool(e.to_string()))?;
    pool.install(|| run(template, config, library))
}

fn check(space: &GenomeSpace<'_>, g: &Genome, generation: usize, slot: usize) -> Result<(), EvolveError> {
    if !space.config.check_invariants {
        return Ok(());
    }
    let v = space.violations(g);
    if v.is_empty() {
        Ok(())
    } else {
        Err(EvolveError::Invariant {
            generation,
            slot,
            detail: v.join("; "),
        })
    }
}

fn run(
    template: &LevelTemplate,
    config: &EvolutionConfig,
    library: Option<&ModelLibrary>,
) -> Result<EvolutionResult, EvolveError> {
    let space = GenomeSpace::new(config, template, library)?;
    let seed = config.master_seed;
    let max_score = template.markers.len() as f64 + 1.0;

    let mut genomes: Vec<Genome> = (0..config.population_size)
        .into_par_iter()
        .map(|slot| {
            let g = space.random_genome(&mut stream(seed, Domain::Init, 0, slot as u64));
            check(&space, &g, 0, slot).map(|_| g)
        })
        .collect::<Result<_, _>>()?;

    let mut history = Vec::new();
    let mut best: Option<Evaluated> = None;
    let mut stall = 0usize;
    let mut generation = 0usize;
    loop {
        let pop: Vec<Evaluated> = genomes
            .par_iter()
            .map(|g| evaluate_genome(template, g, config, library))
            .collect::<Result<_, _>>()?;

        let leader = pop
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.score.total_cmp(&b.score).then(j.cmp(i)))
            .map(|(_, e)| e)
            .expect("population is non-empty");
        let mean = pop.iter().map(|e| e.score).sum::<f64>() / pop.len() as f64;
        history.push(GenerationStats {
            generation,
            best_fitness: leader.score,
            mean_fitness: mean,
            best_constraints_met: leader.report.constraints_met,
        });
        let improved = best.as_ref().is_none_or(|b| leader.score > b.score);
        if improved {
            best = Some(leader.clone());
            stall = 0;
        } else {
            stall += 1;
        }
        let champion = best.as_ref().expect("set above");

        let done = generation + 1 >= config.generations
            || champion.score >= max_score
            || (config.stop_when_solved && champion.report.all_met())
            || config.stall_generations.is_some_and(|k| stall >= k);
        if done {
            break;
        }

        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&i, &j| pop[j].score.total_cmp(&pop[i].score).then(i.cmp(&j)));
        let next_gen = generation + 1;
        let elites: Vec<Genome> = order[..config.elite_count]
            .iter()
            .map(|&i| pop[i].genome.clone())
            .collect();
        let children: Vec<Genome> = (config.elite_count..config.population_size)
            .into_par_iter()
            .map(|slot| {
                let mut rng = stream(seed, Domain::Breed, next_gen as u64, slot as u64);
                let a = tournament(&pop, config.tournament_size, &mut rng);
                let b = tournament(&pop, config.tournament_size, &mut rng);
                let child = crossover(&a.genome, &b.genome, &mut rng)?;
                let child = space.mutate(&child, &mut rng);
                check(&space, &child, next_gen, slot).map(|_| child)
            })
            .collect::<Result<_, _>>()?;
        genomes = elites.into_iter().chain(children).collect();
        generation = next_gen;
    }

    Ok(EvolutionResult {
        best: best.expect("at least one generation ran"),
        history,
    })
}

/// CSV with columns `generation, best_fitness, mean_fitness, best_constraints_met`.
pub fn history_to_csv(history: &[GenerationStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["generation", "best_fitness", "mean_fitness", "best_constraints_met"])
        .expect("in-memory write");
    for h in history {
        w.write_record([
            h.generation.to_string(),
            h.best_fitness.to_string(),
            h.mean_fitness.to_string(),
            h.best_constraints_met.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::load_template;

    fn open_template() -> LevelTemplate {
        load_template(r#"{"surface": {"x": 20.0, "z": 20.0}, "start": [1.0, 1.0], "end": [19.0, 19.0], "markers": []}"#)
            .unwrap()
    }

    fn space_config(min: usize, max: usize) -> EvolutionConfig {
        EvolutionConfig {
            min_blocks: min,
            max_blocks: max,
            check_invariants: true,
            ..EvolutionConfig::default()
        }
    }

    #[test]
    fn fixed_count_genome() {
        let cfg = space_config(5, 5);
        let t = open_template();
        let space = GenomeSpace::new(&cfg, &t, None).unwrap();
        let g = space.random_genome(&mut stream(1, Domain::Init, 0, 0));
        assert_eq!(g.len(), 5);
        assert!(space.violations(&g).is_empty());
    }

    #[test]
    fn random_genome_is_seeded() {
        let cfg = space_config(1, 12);
        let t = open_template();
        let space = GenomeSpace::new(&cfg, &t, None).unwrap();
        let a = space.random_genome(&mut stream(9, Domain::Init, 0, 3));
        let b = space.random_genome(&mut stream(9, Domain::Init, 0, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_rates_leave_genome_unchanged() {
        let mut cfg = space_config(1, 12);
        cfg.rates = MutationRates {
            add: 0.0,
            remove: 0.0,
            shift: 0.0,
            resize: 0.0,
        };
        let t = open_template();
        let space = GenomeSpace::new(&cfg, &t, None).unwrap();
        let mut rng = stream(2, Domain::Breed, 0, 0);
        let g = space.random_genome(&mut rng);
        assert_eq!(space.mutate(&g, &mut rng), g);
    }

    #[test]
    fn removal_respects_minimum() {
        let mut cfg = space_config(3, 12);
        cfg.rates = MutationRates {
            add: 0.0,
            remove: 1.0,
            shift: 0.0,
            resize: 0.0,
        };
        let t = open_template();
        let space = GenomeSpace::new(&cfg, &t, None).unwrap();
        let mut rng = stream(3, Domain::Breed, 0, 0);
        let g = loop {
            let g = space.random_genome(&mut rng);
            if g.len() == 3 {
                break g;
            }
        };
        assert_eq!(space.mutate(&g, &mut rng), g);
    }

    #[test]
    fn crossover_of_identical_parents() {
        let cfg = space_config(1, 12);
        let t = open_template();
        let space = GenomeSpace::new(&cfg, &t, None).unwrap();
        let mut rng = stream(4, Domain::Breed, 0, 0);
        let g = space.random_genome(&mut rng);
        assert_eq!(crossover(&g, &g, &mut rng).unwrap(), g);
    }

    #[test]
    fn crossover_rejects_mixed_modes() {
        let a = Genome::empty_blocks();
        let b = Genome::Models { placements: vec![] };
        assert!(matches!(
            crossover(&a, &b, &mut stream(0, Domain::Breed, 0, 0)),
            Err(EvolveError::ModeMismatch)
        ));
    }

    #[test]
    fn zero_marker_template_plateaus_immediately() {
        let t = open_template();
        let cfg = EvolutionConfig {
            population_size: 6,
            generations: 50,
            ..EvolutionConfig::default()
        };
        let r = evolve(&t, &cfg, None, 1).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best.score, 1.0);
    }

    #[test]
    fn config_validation() {
        let mut c = EvolutionConfig::default();
        assert!(c.validate().is_ok());
        c.elite_count = c.population_size;
        assert!(c.validate().is_err());
        let c = EvolutionConfig {
            min_blocks: 5,
            max_blocks: 2,
            ..EvolutionConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<EvolutionConfig>(r#"{"population_size": 10, "colour": 1}"#).is_err());
        let c: EvolutionConfig = serde_json::from_str(r#"{"population_size": 10, "rates": {"move": 0.3}}"#).unwrap();
        assert_eq!(c.rates.shift, 0.3);
        assert_eq!(c.rates.add, MutationRates::default().add);
    }

    #[test]
    fn history_csv_header() {
        let csv = history_to_csv(&[GenerationStats {
            generation: 0,
            best_fitness: 1.5,
            mean_fitness: 0.5,
            best_constraints_met: 1,
        }]);
        assert_eq!(
            csv,
            "generation,best_fitness,mean_fitness,best_constraints_met\n0,1.5,0.5,1\n"
        );
    }
}
