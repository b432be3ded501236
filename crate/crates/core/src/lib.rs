//! Search-based design and evaluation of explorable 3D spaces.
//!
//! * [`geometry`], [`template`], [`navgrid`] and [`visibility`] evaluate a
//!   level by walking an agent along its shortest path and checking which
//!   objective markers it sees.
//! * [`evolve`] searches over block or model layouts for that fitness.
//! * [`explorer`] runs a curiosity-driven agent that only knows what it sees.
//! * [`islandgen`] builds Voronoi islands with paths and a companion dog.
//! * [`render`] draws all of the above as top-down SVG.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evolve;
pub mod explorer;
pub mod geometry;
pub mod islandgen;
pub mod navgrid;
pub mod render;
pub mod rng;
pub mod template;
pub mod visibility;
