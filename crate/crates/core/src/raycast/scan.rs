//! Scanning scenes into dense frames.

use std::collections::HashMap;

use super::bvh::Accel;
use super::frame::{BeamSet, DenseFrame, DenseHit, DensePoint};
use super::sensor::{block_rays, randomize_sensor_pose, DepthCamera, SensorModel};
use super::trace::{record, trace, HitRecord, Ray};
use crate::error::Result;
use crate::geometry::{Pose, Vec3};
use crate::par::Executor;
use crate::scene::Scene;

/// A scene together with its acceleration structure. Immutable and safe to
/// share between threads.
pub struct Scanner<'a> {
    pub scene: &'a Scene,
    pub accel: Accel,
}

impl<'a> Scanner<'a> {
    pub fn new(scene: &'a Scene) -> Result<Self> {
        Ok(Scanner {
            scene,
            accel: Accel::build(scene)?,
        })
    }

    /// Randomizes the sensor pose with `seed`, then scans every beam set of
    /// `model` at the model's azimuth step.
    pub fn scan_frame(
        &self,
        model: &SensorModel,
        base_pose: &Pose,
        seed: u64,
        frame_id: u64,
        exec: &Executor,
    ) -> Result<DenseFrame> {
        model.validate()?;
        let pose = randomize_sensor_pose(base_pose, &model.pose_randomization, seed);
        self.scan_sets(model, model.beam_sets(), model.azimuth_step_deg, &pose, frame_id, exec)
    }

    /// Scans the given beam sets at a fixed pose. Used by the generate stage
    /// to collect every pattern into one dense frame.
    pub fn scan_sets(
        &self,
        model: &SensorModel,
        sets: &[BeamSet],
        azimuth_step_deg: f64,
        pose: &Pose,
        frame_id: u64,
        exec: &Executor,
    ) -> Result<DenseFrame> {
        let mut frame = DenseFrame::new(frame_id, *pose, azimuth_step_deg, self.scene);
        for &set in sets {
            let rays = block_rays(model.block(set), model.channel_base(set), azimuth_step_deg)?;
            let points = if set == BeamSet::Depth {
                sample_depth_pseudolidar(&self.accel, pose, &model.depth_camera, &rays, model.max_range, exec)
            } else {
                scan_rays(&self.accel, &rays, pose, set, model.max_range, exec)
            };
            frame.points.extend(points);
        }
        frame.tally_visibility();
        Ok(frame)
    }
}

/// Casts sensor-frame rays from `pose`; misses are dropped, order is kept.
pub fn scan_rays(
    accel: &Accel,
    rays: &[Ray],
    pose: &Pose,
    set: BeamSet,
    max_range: f64,
    exec: &Executor,
) -> Vec<DensePoint> {
    let rot = pose.rotation();
    let hits = exec.map_slice(rays, |_, r| {
        let world = Ray {
            origin: rot * r.origin + pose.translation,
            direction: rot * r.direction,
            ..*r
        };
        trace(accel, &world, max_range).map(|h| DensePoint::from_dual(set, r.channel, r.azimuth, &h, pose))
    });
    hits.into_iter().flatten().collect()
}

/// One depth-camera pixel: planar depth along the optical axis plus the
/// surface record. Glass is invisible to the depth camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPixel {
    pub depth: f64,
    pub hit: HitRecord,
}

/// Pinhole model at the sensor origin looking along +x. Pixel (u, v) has
/// its center at (u + 0.5, v + 0.5); u grows to the right (−y), v
/// downwards (−z).
#[derive(Debug, Clone, Copy)]
struct Pinhole {
    width: u32,
    height: u32,
    focal: f64,
}

impl Pinhole {
    fn new(cam: &DepthCamera) -> Self {
        Pinhole {
            width: cam.width,
            height: cam.height,
            focal: cam.focal(),
        }
    }

    fn pixel_ray(&self, u: u32, v: u32) -> Vec3 {
        let cx = 0.5 * self.width as f64;
        let cy = 0.5 * self.height as f64;
        Vec3::new(self.focal, -(u as f64 + 0.5 - cx), -(v as f64 + 0.5 - cy)).normalize()
    }

    /// Pixel containing the projection of a sensor-frame direction.
    fn pixel_of(&self, d: &Vec3) -> Option<(u32, u32)> {
        if d.x <= 0.0 {
            return None;
        }
        let u = 0.5 * self.width as f64 - self.focal * d.y / d.x;
        let v = 0.5 * self.height as f64 - self.focal * d.z / d.x;
        if u < 0.0 || v < 0.0 || u >= self.width as f64 || v >= self.height as f64 {
            return None;
        }
        Some((u as u32, v as u32))
    }
}

fn render_pixel(accel: &Accel, pose: &Pose, cam: &Pinhole, u: u32, v: u32, max_range: f64) -> Option<DepthPixel> {
    let d = cam.pixel_ray(u, v);
    let ray = Ray {
        origin: pose.translation,
        direction: pose.transform_vector(&d),
        channel: 0,
        azimuth: 0,
    };
    // planar depth never exceeds the ray length, so this bound keeps every
    // pixel whose depth is within max_range
    let limit = max_range / d.x;
    let h = accel.intersect(&ray.origin, &ray.direction, super::trace::RAY_T_MIN, limit, true)?;
    Some(DepthPixel {
        depth: h.t * d.x,
        hit: record(accel, &ray, h),
    })
}

/// Full depth image, row-major.
#[derive(Debug, Clone)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Option<DepthPixel>>,
}

impl DepthImage {
    pub fn get(&self, u: u32, v: u32) -> Option<&DepthPixel> {
        self.pixels[(v * self.width + u) as usize].as_ref()
    }
}

pub fn render_depth_image(
    accel: &Accel,
    pose: &Pose,
    camera: &DepthCamera,
    max_range: f64,
    exec: &Executor,
) -> DepthImage {
    let cam = Pinhole::new(camera);
    let n = (camera.width * camera.height) as usize;
    let pixels = exec.map_range(n, |i| {
        let (u, v) = (i as u32 % camera.width, i as u32 / camera.width);
        render_pixel(accel, pose, &cam, u, v, max_range)
    });
    DepthImage {
        width: camera.width,
        height: camera.height,
        pixels,
    }
}

fn depth_point(r: &Ray, px: &DepthPixel, pose: &Pose, max_range: f64) -> Option<DensePoint> {
    let range = px.depth / r.direction.x;
    if range > max_range {
        return None;
    }
    let p = r.direction * range;
    let n = pose.inverse_transform_vector(&px.hit.normal);
    let hit = DenseHit {
        point: [p.x as f32, p.y as f32, p.z as f32],
        range: range as f32,
        normal: [n.x as f32, n.y as f32, n.z as f32],
        grayscale: px.hit.grayscale as f32,
        actor_id: px.hit.actor_id,
        material: px.hit.material,
    };
    Some(DensePoint {
        beam_set: BeamSet::Depth,
        channel: r.channel,
        azimuth: r.azimuth,
        first: hit,
        last: hit,
    })
}

/// Samples a depth image at the directions of `pattern` (sensor frame, the
/// camera shares the sensor origin). Each ray takes its nearest pixel and is
/// back-projected along its own direction; rays outside the image or on
/// empty pixels yield no point.
///
/// Only pixels hit by the pattern are rendered; the result equals sampling
/// [`render_depth_image`].
pub fn sample_depth_pseudolidar(
    accel: &Accel,
    pose: &Pose,
    camera: &DepthCamera,
    pattern: &[Ray],
    max_range: f64,
    exec: &Executor,
) -> Vec<DensePoint> {
    let cam = Pinhole::new(camera);
    let wanted: Vec<Option<(u32, u32)>> = pattern.iter().map(|r| cam.pixel_of(&r.direction)).collect();
    let mut unique: Vec<(u32, u32)> = wanted.iter().flatten().copied().collect();
    unique.sort_unstable_by_key(|&(u, v)| (v, u));
    unique.dedup();
    let rendered = exec.map_slice(&unique, |_, &(u, v)| render_pixel(accel, pose, &cam, u, v, max_range));
    let lookup: HashMap<(u32, u32), Option<DepthPixel>> = unique.into_iter().zip(rendered).collect();
    pattern
        .iter()
        .zip(&wanted)
        .filter_map(|(r, px)| {
            let px = lookup.get(px.as_ref()?)?.as_ref()?;
            depth_point(r, px, pose, max_range)
        })
        .collect()
}

/// Samples a pre-rendered depth image; reference path for
/// [`sample_depth_pseudolidar`].
pub fn sample_depth_image(
    image: &DepthImage,
    camera: &DepthCamera,
    pattern: &[Ray],
    pose: &Pose,
    max_range: f64,
) -> Vec<DensePoint> {
    let cam = Pinhole::new(camera);
    pattern
        .iter()
        .filter_map(|r| {
            let (u, v) = cam.pixel_of(&r.direction)?;
            depth_point(r, image.get(u, v)?, pose, max_range)
        })
        .collect()
}

/// Builds the acceleration structure and scans one frame.
pub fn scan_frame(
    scene: &Scene,
    model: &SensorModel,
    base_pose: &Pose,
    seed: u64,
    exec: &Executor,
) -> Result<DenseFrame> {
    Scanner::new(scene)?.scan_frame(model, base_pose, seed, 0, exec)
}
