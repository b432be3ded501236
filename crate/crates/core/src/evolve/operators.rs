//! Initialization, mutation and crossover over block and model layouts.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::genome::{Block, Genome, ModelLibrary, Placement, YAW_STEPS_DEG};
use super::{EvolutionConfig, EvolveError, Mode};
use crate::geometry::Rect;
use crate::navgrid::build_navgrid;
use crate::template::LevelTemplate;

/// Attempts at drawing a gene that satisfies the placement rules.
pub const REROLL_LIMIT: usize = 16;
/// Extra whole-gene draws allowed when a genome is still below the minimum
/// count after rerolls.
const TOP_UP_LIMIT: usize = 64;

/// The feasible region for genes on one template: surface bounds plus the
/// start and end cells (grown by the agent radius), which no gene may cover.
#[derive(Debug, Clone)]
pub struct GenomeSpace<'a> {
    pub config: &'a EvolutionConfig,
    pub library: Option<&'a ModelLibrary>,
    surface: Rect,
    keepout: [Rect; 2],
    model_ids: Vec<&'a str>,
}

impl<'a> GenomeSpace<'a> {
    pub fn new(
        config: &'a EvolutionConfig,
        template: &LevelTemplate,
        library: Option<&'a ModelLibrary>,
    ) -> Result<Self, EvolveError> {
        config.validate()?;
        template.ensure_valid()?;
        let eval = &config.evaluation;
        let grid = build_navgrid(template, &[], eval.cell_size, eval.agent_radius)?;
        let keepout = [
            grid.cell_rect(grid.start_cell).inflate(eval.agent_radius),
            grid.cell_rect(grid.end_cell).inflate(eval.agent_radius),
        ];
        let surface = template.surface.rect();
        if config.max_dim[0] > surface.width() || config.max_dim[1] > surface.depth() {
            return Err(EvolveError::BadConfig(
                "max_dim footprint does not fit on the surface".into(),
            ));
        }
        let model_ids: Vec<&str> = match config.mode {
            Mode::Blocks => Vec::new(),
            Mode::Models => {
                let lib = library
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| EvolveError::BadConfig("models mode needs a non-empty model library".into()))?;
                for m in lib.models() {
                    let fp = m.footprint;
                    let long = fp.width().max(fp.depth());
                    if long > surface.width() || long > surface.depth() {
                        return Err(EvolveError::BadConfig(format!(
                            "model {:?} does not fit on the surface",
                            m.id
                        )));
                    }
                }
                lib.models().iter().map(|m| m.id.as_str()).collect()
            }
        };
        Ok(GenomeSpace {
            config,
            library,
            surface,
            keepout,
            model_ids,
        })
    }

    fn clear_of_endpoints(&self, fp: &Rect) -> bool {
        !self.keepout.iter().any(|k| k.overlaps(fp))
    }

    pub fn block_ok(&self, b: &Block) -> bool {
        let dims_ok = (0..3).all(|i| b.size[i] >= self.config.min_dim[i] && b.size[i] <= self.config.max_dim[i]);
        let fp = b.footprint();
        dims_ok && self.surface.contains_rect(&fp) && self.clear_of_endpoints(&fp)
    }

    pub fn placement_ok(&self, p: &Placement) -> bool {
        let Some(model) = self.library.and_then(|l| l.get(&p.model)) else {
            return false;
        };
        if !YAW_STEPS_DEG.contains(&p.yaw_deg) {
            return false;
        }
        let fp = model.placed_footprint(p.pos, p.yaw_deg);
        self.surface.contains_rect(&fp) && self.clear_of_endpoints(&fp)
    }

    /// Every way the genome breaks the layout invariants, as messages.
    pub fn violations(&self, genome: &Genome) -> Vec<String> {
        let mut out = Vec::new();
        if genome.mode() != self.config.mode {
            out.push(format!("genome mode {:?} does not match config", genome.mode()));
        }
        let n = genome.len();
        if n < self.config.min_blocks || n > self.config.max_blocks {
            out.push(format!(
                "gene count {n} outside [{}, {}]",
                self.config.min_blocks, self.config.max_blocks
            ));
        }
        match genome {
            Genome::Blocks { blocks } => {
                for (i, b) in blocks.iter().enumerate() {
                    if !self.block_ok(b) {
                        out.push(format!("block {i} breaks size, surface or endpoint rules: {b:?}"));
                    }
                }
            }
            Genome::Models { placements } => {
                for (i, p) in placements.iter().enumerate() {
                    if !self.placement_ok(p) {
                        out.push(format!("placement {i} breaks model, surface or endpoint rules: {p:?}"));
                    }
                }
            }
        }
        out
    }

    fn clamp_block(&self, mut b: Block) -> Block {
        for i in 0..3 {
            b.size[i] = b.size[i].clamp(self.config.min_dim[i], self.config.max_dim[i]);
        }
        b.center[0] = b.center[0].clamp(b.size[0] / 2.0, self.surface.max[0] - b.size[0] / 2.0);
        b.center[1] = b.center[1].clamp(b.size[1] / 2.0, self.surface.max[1] - b.size[1] / 2.0);
        b
    }

    fn clamp_placement(&self, mut p: Placement) -> Placement {
        if let Some(model) = self.library.and_then(|l| l.get(&p.model)) {
            let local = model.placed_footprint([0.0, 0.0], p.yaw_deg);
            p.pos[0] = p.pos[0].clamp(-local.min[0], self.surface.max[0] - local.max[0]);
            p.pos[1] = p.pos[1].clamp(-local.min[1], self.surface.max[1] - local.max[1]);
        }
        p
    }

    fn draw_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Block {
        let c = self.config;
        let size = [
            rng.random_range(c.min_dim[0]..=c.max_dim[0]),
            rng.random_range(c.min_dim[1]..=c.max_dim[1]),
            rng.random_range(c.min_dim[2]..=c.max_dim[2]),
        ];
        let center = [
            rng.random_range(size[0] / 2.0..=self.surface.max[0] - size[0] / 2.0),
            rng.random_range(size[1] / 2.0..=self.surface.max[1] - size[1] / 2.0),
        ];
        Block { center, size }
    }

    fn draw_placement<R: Rng + ?Sized>(&self, rng: &mut R) -> Placement {
        let model_id = *self.model_ids.choose(rng).expect("library is non-empty");
        let yaw_deg = *YAW_STEPS_DEG.choose(rng).expect("four yaws");
        let model = self.library.and_then(|l| l.get(model_id)).expect("id from library");
        let local = model.placed_footprint([0.0, 0.0], yaw_deg);
        let pos = [
            rng.random_range(-local.min[0]..=self.surface.max[0] - local.max[0]),
            rng.random_range(-local.min[1]..=self.surface.max[1] - local.max[1]),
        ];
        Placement {
            model: model_id.to_string(),
            pos,
            yaw_deg,
        }
    }

    fn fresh_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Block> {
        (0..REROLL_LIMIT)
            .map(|_| self.draw_block(rng))
            .find(|b| self.block_ok(b))
    }

    fn fresh_placement<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Placement> {
        (0..REROLL_LIMIT)
            .map(|_| self.draw_placement(rng))
            .find(|p| self.placement_ok(p))
    }

    /// Uniform gene count in range, uniform sizes and positions. Genes that
    /// cover the start or end are rerolled up to [`REROLL_LIMIT`] times and
    /// then dropped; a genome left short of the minimum is topped up.
    pub fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let c = self.config;
        let count = rng.random_range(c.min_blocks..=c.max_blocks);
        match c.mode {
            Mode::Blocks => {
                let mut blocks: Vec<Block> = (0..count).filter_map(|_| self.fresh_block(rng)).collect();
                for _ in 0..TOP_UP_LIMIT {
                    if blocks.len() >= c.min_blocks {
                        break;
                    }
                    blocks.extend(self.fresh_block(rng));
                }
                Genome::Blocks { blocks }
            }
            Mode::Models => {
                let mut placements: Vec<Placement> = (0..count).filter_map(|_| self.fresh_placement(rng)).collect();
                for _ in 0..TOP_UP_LIMIT {
                    if placements.len() >= c.min_blocks {
                        break;
                    }
                    placements.extend(self.fresh_placement(rng));
                }
                Genome::Models { placements }
            }
        }
    }

    /// Applies each operator independently with its configured rate: add a
    /// gene, remove one, Gaussian-shift one, resize (blocks) or re-orient
    /// (models) one. A changed gene that breaks the placement rules is
    /// redrawn up to [`REROLL_LIMIT`] times, else the original is kept.
    pub fn mutate<R: Rng + ?Sized>(&self, genome: &Genome, rng: &mut R) -> Genome {
        let c = self.config;
        let r = &c.rates;
        let move_noise = Normal::new(0.0, c.sigma_move).expect("sigma validated");
        let size_noise = Normal::new(0.0, c.sigma_size).expect("sigma validated");
        match genome {
            Genome::Blocks { blocks } => {
                let mut blocks = blocks.clone();
                if rng.random::<f64>() < r.add && blocks.len() < c.max_blocks {
                    blocks.extend(self.fresh_block(rng));
                }
                if rng.random::<f64>() < r.remove && blocks.len() > c.min_blocks {
                    let i = rng.random_range(0..blocks.len());
                    blocks.remove(i);
                }
                if rng.random::<f64>() < r.shift && !blocks.is_empty() {
                    let i = rng.random_range(0..blocks.len());
                    let old = blocks[i];
                    let moved = (0..REROLL_LIMIT)
                        .map(|_| {
                            let mut b = old;
                            b.center[0] += move_noise.sample(rng);
                            b.center[1] += move_noise.sample(rng);
                            self.clamp_block(b)
                        })
                        .find(|b| self.block_ok(b));
                    blocks[i] = moved.unwrap_or(old);
                }
                if rng.random::<f64>() < r.resize && !blocks.is_empty() {
                    let i = rng.random_range(0..blocks.len());
                    let old = blocks[i];
                    let resized = (0..REROLL_LIMIT)
                        .map(|_| {
                            let mut b = old;
                            for s in b.size.iter_mut() {
                                *s += size_noise.sample(rng);
                            }
                            self.clamp_block(b)
                        })
                        .find(|b| self.block_ok(b));
                    blocks[i] = resized.unwrap_or(old);
                }
                Genome::Blocks { blocks }
            }
            Genome::Models { placements } => {
                let mut placements = placements.clone();
                if rng.random::<f64>() < r.add && placements.len() < c.max_blocks {
                    placements.extend(self.fresh_placement(rng));
                }
                if rng.random::<f64>() < r.remove && placements.len() > c.min_blocks {
                    let i = rng.random_range(0..placements.len());
                    placements.remove(i);
                }
                if rng.random::<f64>() < r.shift && !placements.is_empty() {
                    let i = rng.random_range(0..placements.len());
                    let old = placements[i].clone();
                    let moved = (0..REROLL_LIMIT)
                        .map(|_| {
                            let mut p = old.clone();
                            p.pos[0] += move_noise.sample(rng);
                            p.pos[1] += move_noise.sample(rng);
                            self.clamp_placement(p)
                        })
                        .find(|p| self.placement_ok(p));
                    placements[i] = moved.unwrap_or(old);
                }
                if rng.random::<f64>() < r.resize && !placements.is_empty() {
                    let i = rng.random_range(0..placements.len());
                    let old = placements[i].clone();
                    let turned = (0..REROLL_LIMIT)
                        .map(|_| {
                            let mut p = old.clone();
                            let step = rng.random_range(1..4usize);
                            let k = YAW_STEPS_DEG.iter().position(|&y| y == p.yaw_deg).unwrap_or(0);
                            p.yaw_deg = YAW_STEPS_DEG[(k + step) % 4];
                            self.clamp_placement(p)
                        })
                        .find(|p| self.placement_ok(p));
                    placements[i] = turned.unwrap_or(old);
                }
                Genome::Models { placements }
            }
        }
    }
}

/// Uniform crossover over the shared index range; each gene past the shorter
/// parent's length is inherited from the longer parent with probability 1/2.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome, EvolveError> {
    fn mix<T: Clone, R: Rng + ?Sized>(a: &[T], b: &[T], rng: &mut R) -> Vec<T> {
        let shared = a.len().min(b.len());
        let mut child: Vec<T> = (0..shared)
            .map(|i| {
                if rng.random_bool(0.5) {
                    a[i].clone()
                } else {
                    b[i].clone()
                }
            })
            .collect();
        let longer = if a.len() >= b.len() { a } else { b };
        for gene in &longer[shared..] {
            if rng.random_bool(0.5) {
                child.push(gene.clone());
            }
        }
        child
    }
    match (a, b) {
        (Genome::Blocks { blocks: x }, Genome::Blocks { blocks: y }) => Ok(Genome::Blocks { blocks: mix(x, y, rng) }),
        (Genome::Models { placements: x }, Genome::Models { placements: y }) => Ok(Genome::Models {
            placements: mix(x, y, rng),
        }),
        _ => Err(EvolveError::ModeMismatch),
    }
}
