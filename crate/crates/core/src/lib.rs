//! Synthetic LiDAR dataset generation and evaluation.
//!
//! Procedural scenes are scanned into dense intermediate
//! frames carrying both returns of a glass-penetrating double trace, and a
//! processing stage turns those into any of eight KITTI-format sensor
//! variants. A KITTI-style evaluator (AP with 40 recall positions, AOS)
//! scores detector output against the generated labels.
//!
//! Module map:
//!
//! * [`scene`]: procedural scenes with parametric vehicles and props.
//! * [`raycast`]: BVH ray casting, scan patterns, dense frames.
//! * [`shading`]: intensity model, retro-reflectors, raydrop, range noise.
//! * [`labels`]: box shrinking, visibility, difficulty, KITTI label assembly.
//! * [`kitti_io`]: velodyne/label/calib files and the dense container.
//! * [`eval`]: rotated IoU, matching, AP40, AOS, reports.
//! * [`pipeline`]: `generate`, `process`, `evaluate` and `stats` stages.
//!
//! Data-parallel loops go through [`par::Executor`], which uses rayon when
//! the `parallel` feature is enabled and runs sequentially otherwise. All
//! randomness is keyed by explicit seeds so output does not depend on the
//! worker count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod geometry;
pub mod kitti_io;
pub mod labels;
pub mod par;
pub mod pipeline;
pub mod presets;
pub mod raycast;
pub mod scene;
pub mod seed;
pub mod shading;

pub use error::{Error, Result};
pub use geometry::{Box3D, Pose, Vec3};
pub use par::Executor;
