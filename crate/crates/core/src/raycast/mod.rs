//! Ray casting: acceleration structure, sensor models, glass-aware tracing
//! and frame scanning.

pub mod bvh;
pub mod frame;
pub mod scan;
pub mod sensor;
pub mod trace;

pub use bvh::{Accel, Hit, Surface};
pub use frame::{ActorSummary, BeamSet, DenseFrame, DenseHit, DensePoint};
pub use scan::{
    render_depth_image, sample_depth_image, sample_depth_pseudolidar, scan_frame, scan_rays, DepthImage, DepthPixel,
    Scanner,
};
pub use sensor::{
    azimuth_columns, block_rays, direction, gen_scan_pattern, randomize_sensor_pose, BeamBlock, DepthCamera,
    DualBlocks, PoseNoise, SensorKind, SensorModel,
};
pub use trace::{trace, trace_first, DualHit, HitRecord, Ray, RAY_T_MIN};
