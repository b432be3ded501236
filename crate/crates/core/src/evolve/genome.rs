//! Level layouts that evolution operates on, the fixed-shape model library,
//! and conversion of a layout into occluder geometry.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvolveError;
use crate::geometry::{Aabb, Rect, Vec3};

/// A box standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    /// Ground-plane center `[x, z]`.
    pub center: [f64; 2],
    /// `[width (x), depth (z), height (y)]`.
    pub size: [f64; 3],
}

impl Block {
    pub fn footprint(&self) -> Rect {
        Rect::from_center(self.center, [self.size[0], self.size[1]])
    }

    pub fn to_aabb(&self) -> Aabb {
        let fp = self.footprint();
        Aabb {
            min: Vec3::new(fp.min[0], 0.0, fp.min[1]),
            max: Vec3::new(fp.max[0], self.size[2], fp.max[1]),
        }
    }
}

/// Quarter-turn orientations a model may be placed at.
pub const YAW_STEPS_DEG: [u16; 4] = [0, 90, 180, 270];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub model: String,
    pub pos: [f64; 2],
    pub yaw_deg: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Genome {
    Blocks { blocks: Vec<Block> },
    Models { placements: Vec<Placement> },
}

impl Genome {
    pub fn empty_blocks() -> Self {
        Genome::Blocks { blocks: Vec::new() }
    }

    pub fn len(&self) -> usize {
        match self {
            Genome::Blocks { blocks } => blocks.len(),
            Genome::Models { placements } => placements.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> Mode {
        match self {
            Genome::Blocks { .. } => Mode::Blocks,
            Genome::Models { .. } => Mode::Models,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Blocks,
    Models,
}

/// Rotates a local ground point by a quarter-turn yaw, using the same
/// handedness as [`crate::geometry::Pose`] (`+z` turns towards `+x`).
pub fn rotate_ground(x: f64, z: f64, yaw_deg: u16) -> (f64, f64) {
    match yaw_deg % 360 {
        0 => (x, z),
        90 => (z, -x),
        180 => (-x, -z),
        270 => (-z, x),
        other => panic!("yaw {other} is not a quarter turn"),
    }
}

pub fn rotate_rect(r: &Rect, yaw_deg: u16) -> Rect {
    let (ax, az) = rotate_ground(r.min[0], r.min[1], yaw_deg);
    let (bx, bz) = rotate_ground(r.max[0], r.max[1], yaw_deg);
    Rect {
        min: [ax.min(bx), az.min(bz)],
        max: [ax.max(bx), az.max(bz)],
    }
}

fn translate_rect(r: &Rect, pos: [f64; 2]) -> Rect {
    Rect {
        min: [r.min[0] + pos[0], r.min[1] + pos[1]],
        max: [r.max[0] + pos[0], r.max[1] + pos[1]],
    }
}

/// A non-reshapable object: a set of occluder boxes and the ground area it
/// blocks, both in the model's local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDef {
    pub id: String,
    pub occluders: Vec<Aabb>,
    pub footprint: Rect,
}

impl ModelDef {
    pub fn placed_footprint(&self, pos: [f64; 2], yaw_deg: u16) -> Rect {
        translate_rect(&rotate_rect(&self.footprint, yaw_deg), pos)
    }

    pub fn placed_occluders(&self, pos: [f64; 2], yaw_deg: u16) -> impl Iterator<Item = Aabb> + '_ {
        self.occluders.iter().map(move |b| {
            let r = translate_rect(&rotate_rect(&b.footprint(), yaw_deg), pos);
            Aabb {
                min: Vec3::new(r.min[0], b.min.y, r.min[1]),
                max: Vec3::new(r.max[0], b.max.y, r.max[1]),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelLibrary {
    models: Vec<ModelDef>,
    by_id: BTreeMap<String, usize>,
}

impl ModelLibrary {
    pub fn new(models: Vec<ModelDef>) -> Result<Self, EvolveError> {
        let mut by_id = BTreeMap::new();
        for (i, m) in models.iter().enumerate() {
            if m.occluders.is_empty() {
                return Err(EvolveError::BadModel(format!("model {:?} has no occluders", m.id)));
            }
            for b in &m.occluders {
                if b.min.x > b.max.x || b.min.y > b.max.y || b.min.z > b.max.z {
                    return Err(EvolveError::BadModel(format!("model {:?} has an inverted box", m.id)));
                }
                if !m.footprint.contains_rect(&b.footprint()) {
                    return Err(EvolveError::BadModel(format!(
                        "footprint of model {:?} does not cover all of its occluders",
                        m.id
                    )));
                }
            }
            if by_id.insert(m.id.clone(), i).is_some() {
                return Err(EvolveError::BadModel(format!("duplicate model id {:?}", m.id)));
            }
        }
        Ok(ModelLibrary { models, by_id })
    }

    /// Parses a JSON list of model definitions.
    pub fn from_json(text: &str) -> Result<Self, EvolveError> {
        let models: Vec<ModelDef> = serde_json::from_str(text).map_err(|e| EvolveError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        ModelLibrary::new(models)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.models).expect("library serializes") + "\n"
    }

    pub fn get(&self, id: &str) -> Option<&ModelDef> {
        self.by_id.get(id).map(|&i| &self.models[i])
    }

    pub fn models(&self) -> &[ModelDef] {
        &self.models
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// A small library with a boulder, a low rock and a tree whose canopy
    /// sits above eye height.
    pub fn rocks_and_trees() -> Self {
        let b = |min: [f64; 3], max: [f64; 3]| Aabb {
            min: Vec3::new(min[0], min[1], min[2]),
            max: Vec3::new(max[0], max[1], max[2]),
        };
        let models = vec![
            ModelDef {
                id: "boulder".into(),
                occluders: vec![
                    b([-1.2, 0.0, -0.9], [1.2, 1.4, 0.9]),
                    b([-0.7, 1.4, -0.5], [0.5, 2.2, 0.6]),
                ],
                footprint: Rect {
                    min: [-1.2, -0.9],
                    max: [1.2, 0.9],
                },
            },
            ModelDef {
                id: "rock".into(),
                occluders: vec![b([-0.6, 0.0, -0.5], [0.6, 0.8, 0.5])],
                footprint: Rect {
                    min: [-0.6, -0.5],
                    max: [0.6, 0.5],
                },
            },
            ModelDef {
                id: "tree".into(),
                occluders: vec![
                    b([-0.2, 0.0, -0.2], [0.2, 2.4, 0.2]),
                    b([-1.3, 2.0, -1.3], [1.3, 4.5, 1.3]),
                ],
                footprint: Rect {
                    min: [-1.3, -1.3],
                    max: [1.3, 1.3],
                },
            },
        ];
        ModelLibrary::new(models).expect("built-in library is valid")
    }
}

/// Occluder boxes plus the ground areas that block walking.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub occluders: Vec<Aabb>,
    pub footprints: Vec<Rect>,
}

/// Instantiates a layout: one grounded box per block, or each placed
/// model's boxes rotated about its origin and translated to its position.
pub fn genome_to_scene(genome: &Genome, library: Option<&ModelLibrary>) -> Result<Scene, EvolveError> {
    match genome {
        Genome::Blocks { blocks } => Ok(Scene {
            occluders: blocks.iter().map(Block::to_aabb).collect(),
            footprints: blocks.iter().map(Block::footprint).collect(),
        }),
        Genome::Models { placements } => {
            let mut scene = Scene::default();
            for p in placements {
                let model = library
                    .and_then(|l| l.get(&p.model))
                    .ok_or_else(|| EvolveError::UnknownModel(p.model.clone()))?;
                if !YAW_STEPS_DEG.contains(&p.yaw_deg) {
                    return Err(EvolveError::BadYaw(p.yaw_deg));
                }
                scene.occluders.extend(model.placed_occluders(p.pos, p.yaw_deg));
                scene.footprints.push(model.placed_footprint(p.pos, p.yaw_deg));
            }
            Ok(scene)
        }
    }
}

pub fn genome_to_occluders(genome: &Genome, library: Option<&ModelLibrary>) -> Result<Vec<Aabb>, EvolveError> {
    genome_to_scene(genome, library).map(|s| s.occluders)
}

pub fn parse_genome(text: &str) -> Result<Genome, EvolveError> {
    let g: Genome = serde_json::from_str(text).map_err(|e| EvolveError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Genome::Models { placements } = &g {
        if let Some(p) = placements.iter().find(|p| !YAW_STEPS_DEG.contains(&p.yaw_deg)) {
            return Err(EvolveError::BadYaw(p.yaw_deg));
        }
    }
    Ok(g)
}

pub fn genome_to_json(genome: &Genome) -> String {
    serde_json::to_string_pretty(genome).expect("genome serializes") + "\n"
}

/// Model ids used by a layout, sorted.
pub fn model_ids(genome: &Genome) -> BTreeSet<&str> {
    match genome {
        Genome::Blocks { .. } => BTreeSet::new(),
        Genome::Models { placements } => placements.iter().map(|p| p.model.as_str()).collect(),
    }
}
