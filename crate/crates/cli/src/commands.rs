use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use vantage::evolve::{
    evolve, genome_to_json, genome_to_scene, history_to_csv, parse_genome, EvolutionConfig, Genome, Mode, ModelLibrary,
};
use vantage::explorer::{run_exploration_scene, snapshots_to_csv, trajectory_to_csv, ExploreParams};
use vantage::geometry::CameraModel;
use vantage::islandgen::{generate_island, polyline_walk, simulate_dog, DogParams, IslandMap, IslandParams};
use vantage::render::{occluders_to_obj, render_island_svg, render_level_svg, LevelView};
use vantage::template::{load_template, LevelTemplate, DEFAULT_EYE_HEIGHT};
use vantage::visibility::{evaluate_scene, trace_to_csv, EvalParams, FitnessReport};

use crate::error::CliError;
use crate::{Cli, Command};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: format!("line {}, column {}: {e}", e.line(), e.column()),
    })
}

/// Defaults overridden by the `--config` file, if any.
fn config<T: DeserializeOwned + Default>(cli: &Cli) -> Result<T, CliError> {
    match &cli.common.config {
        Some(path) => parse_json(path, &read(path)?),
        None => Ok(T::default()),
    }
}

fn template(path: &Path) -> Result<LevelTemplate, CliError> {
    load_template(&read(path)?).map_err(|e| CliError::template(path, e))
}

fn genome(path: Option<&Path>) -> Result<Genome, CliError> {
    match path {
        Some(p) => parse_genome(&read(p)?).map_err(|e| CliError::evolve(Some(p), e)),
        None => Ok(Genome::empty_blocks()),
    }
}

fn library(cli: &Cli) -> Result<ModelLibrary, CliError> {
    match &cli.common.models {
        Some(p) => ModelLibrary::from_json(&read(p)?).map_err(|e| CliError::evolve(Some(p), e)),
        None => Ok(ModelLibrary::rocks_and_trees()),
    }
}

fn library_for(cli: &Cli, mode: Mode) -> Result<Option<ModelLibrary>, CliError> {
    match mode {
        Mode::Blocks => Ok(None),
        Mode::Models => library(cli).map(Some),
    }
}

fn require_seed(cli: &Cli, command: &str) -> Result<u64, CliError> {
    cli.common
        .seed
        .ok_or_else(|| CliError::Validation(format!("`{command}` is stochastic and needs --seed")))
}

fn level_svg(
    t: &LevelTemplate,
    g: &Genome,
    lib: Option<&ModelLibrary>,
    report: Option<&FitnessReport>,
    path: &[[f64; 2]],
) -> Result<String, CliError> {
    let scene = genome_to_scene(g, lib).map_err(|e| CliError::evolve(None, e))?;
    let view = LevelView {
        occluders: &scene.occluders,
        marker_met: report.map(|r| r.marker_met.as_slice()),
        path,
        ..LevelView::new(t)
    };
    Ok(render_level_svg(&view))
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    let out = &cli.common.out;
    match &cli.command {
        Command::Evaluate {
            template: tp,
            genome: gp,
        } => {
            let t = template(tp)?;
            let g = genome(gp.as_deref())?;
            let params: EvalParams = config(cli)?;
            let lib = library_for(cli, g.mode())?;
            let scene = genome_to_scene(&g, lib.as_ref()).map_err(|e| CliError::evolve(gp.as_deref(), e))?;
            let (report, trace) = evaluate_scene(&t, &scene.occluders, &scene.footprints, &params)?;
            let path: Vec<[f64; 2]> = trace
                .samples
                .iter()
                .map(|s| [s.pose.position.x, s.pose.position.z])
                .collect();
            write(out, "report.json", &pretty(&report))?;
            write(out, "trace.csv", &trace_to_csv(&trace))?;
            write(
                out,
                "level.svg",
                &level_svg(&t, &g, lib.as_ref(), Some(&report), &path)?,
            )?;
            Ok(format!(
                "path_found={} constraints_met={}/{} fitness={:.4}",
                report.path_found,
                report.constraints_met,
                report.marker_ids.len(),
                report.fitness
            ))
        }
        Command::Evolve { template: tp, workers } => {
            let t = template(tp)?;
            let mut cfg: EvolutionConfig = config(cli)?;
            cfg.master_seed = require_seed(cli, "evolve")?;
            let lib = library_for(cli, cfg.mode)?;
            let result = evolve(&t, &cfg, lib.as_ref(), *workers).map_err(|e| CliError::evolve(Some(tp), e))?;
            let best = &result.best;
            let scene = genome_to_scene(&best.genome, lib.as_ref()).map_err(|e| CliError::evolve(None, e))?;
            let (_, trace) = evaluate_scene(&t, &scene.occluders, &scene.footprints, &cfg.evaluation)?;
            let path: Vec<[f64; 2]> = trace
                .samples
                .iter()
                .map(|s| [s.pose.position.x, s.pose.position.z])
                .collect();
            write(out, "best_genome.json", &genome_to_json(&best.genome))?;
            write(out, "best_report.json", &pretty(&best.report))?;
            write(out, "history.csv", &history_to_csv(&result.history))?;
            write(
                out,
                "best.svg",
                &level_svg(&t, &best.genome, lib.as_ref(), Some(&best.report), &path)?,
            )?;
            Ok(format!(
                "generations={} constraints_met={}/{} score={:.4}",
                result.history.len(),
                best.report.constraints_met,
                best.report.marker_ids.len(),
                best.score
            ))
        }
        Command::Explore {
            template: tp,
            genome: gp,
            frame_every,
        } => {
            let t = template(tp)?;
            let g = genome(gp.as_deref())?;
            let params: ExploreParams = config(cli)?;
            let lib = library_for(cli, g.mode())?;
            let scene = genome_to_scene(&g, lib.as_ref()).map_err(|e| CliError::evolve(gp.as_deref(), e))?;
            let ex = run_exploration_scene(&t, &scene.occluders, &scene.footprints, &params)?;
            write(out, "exploration.json", &pretty(&ex.report))?;
            write(out, "trajectory.csv", &trajectory_to_csv(&ex.trajectory))?;
            write(out, "beliefs.csv", &snapshots_to_csv(&ex.snapshots))?;
            if *frame_every > 0 {
                let frames = out.join("frames");
                let last = ex.snapshots.len() - 1;
                let walked: Vec<[f64; 2]> = ex.trajectory.iter().map(|p| [p.x, p.z]).collect();
                for (tick, states) in ex.snapshots.iter().enumerate() {
                    if tick % frame_every != 0 && tick != last {
                        continue;
                    }
                    let view = LevelView {
                        occluders: &scene.occluders,
                        path: &walked[..=tick],
                        beliefs: Some((&ex.points, states)),
                        agent: Some(walked[tick]),
                        ..LevelView::new(&t)
                    };
                    write(&frames, &format!("frame_{tick:05}.svg"), &render_level_svg(&view))?;
                }
            }
            Ok(format!(
                "ticks={} coverage={:.4} observed_reachable={:.4} stuck={} termination={:?}",
                ex.report.ticks_used,
                ex.report.coverage,
                ex.report.points_observed_fraction,
                ex.report.stuck_events,
                ex.report.termination
            ))
        }
        Command::Island { dog } => {
            let seed = require_seed(cli, "island")?;
            let cfg: IslandRunConfig = config(cli)?;
            let map = generate_island(&cfg.island, seed)?;
            let trace = if *dog { Some(run_dog(&map, &cfg, seed)?) } else { None };
            write(out, "island.json", &pretty(&map))?;
            write(out, "island.svg", &render_island_svg(&map, trace.as_ref()))?;
            let mut summary = format!(
                "cells={} land={} decorations={} path_cells={}",
                map.cells.len(),
                map.land_count(),
                map.decorations.len(),
                map.path_cells.len()
            );
            if let Some(trace) = trace {
                write(out, "dog.csv", &trace.to_csv())?;
                summary.push_str(&format!(" dog_in_view={:.4}", trace.in_view_fraction));
            }
            Ok(summary)
        }
        Command::Render {
            template: tp,
            genome: gp,
            report,
            island,
            obj,
        } => {
            if let Some(ip) = island {
                let map: IslandMap = parse_json(ip, &read(ip)?)?;
                let path = write(out, "island.svg", &render_island_svg(&map, None))?;
                return Ok(format!("wrote {}", path.display()));
            }
            let Some(tp) = tp else {
                return Err(CliError::Validation("render needs a template or --island".into()));
            };
            let t = template(tp)?;
            let g = genome(gp.as_deref())?;
            let lib = library_for(cli, g.mode())?;
            let report: Option<FitnessReport> = match report {
                Some(rp) => Some(parse_json(rp, &read(rp)?)?),
                None => None,
            };
            let path = write(
                out,
                "level.svg",
                &level_svg(&t, &g, lib.as_ref(), report.as_ref(), &[])?,
            )?;
            if *obj {
                let scene = genome_to_scene(&g, lib.as_ref()).map_err(|e| CliError::evolve(None, e))?;
                write(out, "occluders.obj", &occluders_to_obj(&scene.occluders))?;
            }
            Ok(format!("wrote {}", path.display()))
        }
    }
}

/// Settings for the `island` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IslandRunConfig {
    pub island: IslandParams,
    pub dog: DogParams,
    pub camera: CameraModel,
    /// Player walking speed in metres per second.
    pub player_speed: f64,
    /// Ticks the player stands at the campsite after arriving.
    pub hold_ticks: usize,
    pub eye_height: f64,
}

impl Default for IslandRunConfig {
    fn default() -> Self {
        IslandRunConfig {
            island: IslandParams::default(),
            dog: DogParams::default(),
            camera: CameraModel::default(),
            player_speed: 1.4,
            hold_ticks: 50,
            eye_height: DEFAULT_EYE_HEIGHT,
        }
    }
}

fn run_dog(map: &IslandMap, cfg: &IslandRunConfig, seed: u64) -> Result<vantage::islandgen::DogTrace, CliError> {
    cfg.camera.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    if !(cfg.player_speed > 0.0 && cfg.dog.speed > 0.0 && cfg.dog.tick_seconds > 0.0) {
        return Err(CliError::Validation(
            "player_speed, dog.speed and dog.tick_seconds must be positive".into(),
        ));
    }
    let land_cell = |c: Option<usize>| c.or_else(|| map.land.iter().position(|&l| l));
    let Some(from) = land_cell(map.spawn) else {
        return Err(CliError::Validation("island has no land for the player".into()));
    };
    let to = land_cell(map.campsite).unwrap_or(from);
    let waypoints: Vec<[f64; 2]> = if map.path_cells.is_empty() {
        vec![map.cells[from].centroid, map.cells[to].centroid]
    } else {
        map.path_cells.iter().map(|&c| map.cells[c].centroid).collect()
    };
    let step = cfg.player_speed * cfg.dog.tick_seconds;
    let walk = polyline_walk(&waypoints, step, cfg.eye_height, cfg.hold_ticks);
    let a = waypoints[0];
    Ok(simulate_dog(map, &walk, &cfg.camera, &cfg.dog, a, seed))
}
