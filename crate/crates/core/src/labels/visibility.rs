use serde::{Deserialize, Serialize};

use crate::geometry::{Box3D, Vec3};
use crate::kitti_io::{CalibBlock, IMAGE_HEIGHT, IMAGE_WIDTH};
use crate::raycast::DenseFrame;

/// Corners closer than this to the camera plane make a box unlabelable.
pub const MIN_CAMERA_DEPTH: f64 = 0.1;

/// Blocked-ray fractions at which the occlusion level steps up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcclusionThresholds {
    pub partly: f64,
    pub largely: f64,
}

impl Default for OcclusionThresholds {
    fn default() -> Self {
        OcclusionThresholds {
            partly: 0.2,
            largely: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityStats {
    pub num_points: usize,
    pub truncation: f64,
    pub occlusion_fraction: f64,
    pub occlusion_level: u8,
}

/// Unclipped image rectangle `[left, top, right, bottom]` of a sensor-frame
/// box, or `None` when any corner is too close to or behind the camera.
pub fn projected_rect(b: &Box3D, calib: &CalibBlock) -> Option<[f64; 4]> {
    let mut r = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for c in b.corners() {
        let cam = calib.velo_to_cam(&c);
        if cam.z <= MIN_CAMERA_DEPTH {
            return None;
        }
        let [u, v] = calib.project(&cam)?;
        r = [r[0].min(u), r[1].min(v), r[2].max(u), r[3].max(v)];
    }
    Some(r)
}

pub fn clip_to_image(r: &[f64; 4]) -> [f64; 4] {
    [
        r[0].clamp(0.0, IMAGE_WIDTH),
        r[1].clamp(0.0, IMAGE_HEIGHT),
        r[2].clamp(0.0, IMAGE_WIDTH),
        r[3].clamp(0.0, IMAGE_HEIGHT),
    ]
}

fn rect_area(r: &[f64; 4]) -> f64 {
    (r[2] - r[0]).max(0.0) * (r[3] - r[1]).max(0.0)
}

/// Fraction of the projected rectangle lying outside the image; 1 when the
/// box cannot be projected.
pub fn truncation(b: &Box3D, calib: &CalibBlock) -> f64 {
    match projected_rect(b, calib) {
        Some(r) if rect_area(&r) > 0.0 => 1.0 - rect_area(&clip_to_image(&r)) / rect_area(&r),
        _ => 1.0,
    }
}

/// Share of the rays towards an actor that end on another actor in front
/// of it. A ray counts towards the actor when its return lies on the actor,
/// or when it ends on a different actor before entering the actor's box.
pub fn occlusion_fraction(actor_id: u32, b: &Box3D, frame: &DenseFrame) -> f64 {
    let grown = Box3D {
        dims: b.dims.add_scalar(0.1),
        ..*b
    };
    let origin = Vec3::zeros();
    let (mut visible, mut blocked) = (0usize, 0usize);
    for p in &frame.points {
        match p.last.actor_id {
            Some(id) if id == actor_id => visible += 1,
            Some(_) => {
                let pos = p.last.position();
                let range = pos.norm();
                if range == 0.0 {
                    continue;
                }
                if let Some((t0, _)) = grown.ray_interval(&origin, &(pos / range)) {
                    if t0 > range {
                        blocked += 1;
                    }
                }
            }
            None => {}
        }
    }
    if visible + blocked == 0 {
        return 0.0;
    }
    blocked as f64 / (visible + blocked) as f64
}

pub fn occlusion_level(fraction: f64, t: &OcclusionThresholds) -> u8 {
    if fraction < t.partly {
        0
    } else if fraction < t.largely {
        1
    } else {
        2
    }
}

/// Points on `actor_id` within `b` (with a 0.2 m margin for range noise),
/// truncation and occlusion. `b` and the frame are in the sensor frame.
pub fn visibility_stats(
    actor_id: u32,
    b: &Box3D,
    frame: &DenseFrame,
    calib: &CalibBlock,
    thresholds: &OcclusionThresholds,
) -> VisibilityStats {
    let num_points = frame
        .points
        .iter()
        .filter(|p| p.last.actor_id == Some(actor_id) && b.contains(&p.last.position(), 0.2))
        .count();
    let occlusion_fraction = occlusion_fraction(actor_id, b, frame);
    VisibilityStats {
        num_points,
        truncation: truncation(b, calib),
        occlusion_fraction,
        occlusion_level: occlusion_level(occlusion_fraction, thresholds),
    }
}
