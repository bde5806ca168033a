//! Deterministic desk-scale grasping simulator and evaluation harness.
//!
//! The crate is organized as a pipeline: [`scene`] holds the simulated
//! world, [`render`] produces ground-truth depth/mask/stereo images,
//! [`stereo`] recovers depth from synthetic stereo pairs, [`perception`]
//! turns depth+masks into voxel sets, centroids and orthographic
//! projections, [`spotlight`] compresses those into the 64x64x3 policy
//! observation, [`control`] dispatches between idle/PID/policy
//! sub-controllers, and [`harness`] closes the loop into seeded episodes
//! with metrics and replay logs. [`domain_rand`] supplies the
//! sim-to-real randomization samplers.

pub mod config;
pub mod control;
pub mod domain_rand;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod img;
pub mod perception;
pub mod render;
pub mod rng;
pub mod scene;
pub mod spotlight;
pub mod stereo;
pub mod task;

pub use error::{Error, Result};
