//! Ground-truth boxes for scanned frames.
//!
//! Raw actor boxes are lifted slightly, the points inside are collected and
//! the box is shrunk towards them the way human annotators draw tight boxes.
//! Each surviving box is then projected into the KITTI camera to get its 2D
//! box, truncation, occlusion level and difficulty.

mod shrink;
mod visibility;

pub use shrink::{points_in_box, shift_up, shrink_box, AxisShrink, ShrinkOutcome, ShrinkParams};
pub use visibility::{
    clip_to_image, occlusion_fraction, occlusion_level, projected_rect, truncation, visibility_stats,
    OcclusionThresholds, VisibilityStats, MIN_CAMERA_DEPTH,
};

pub use crate::geometry::Box3D;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Vec3};
use crate::kitti_io::CalibBlock;
use crate::raycast::DenseFrame;
use crate::scene::ActorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Difficulty {
    Easy = 0,
    Moderate = 1,
    Hard = 2,
    Ignored = 3,
}

impl Difficulty {
    pub const EVALUATED: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Moderate => "moderate",
            Difficulty::Hard => "hard",
            Difficulty::Ignored => "ignored",
        }
    }
}

/// Minimum 2D height, maximum occlusion level and maximum truncation per
/// difficulty.
pub const DIFFICULTY_TABLE: [(Difficulty, f64, i8, f64); 3] = [
    (Difficulty::Easy, 40.0, 0, 0.15),
    (Difficulty::Moderate, 25.0, 1, 0.30),
    (Difficulty::Hard, 25.0, 2, 0.50),
];

/// One object of a KITTI label file.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub class: String,
    pub truncation: f64,
    pub occlusion: i8,
    pub alpha: f64,
    /// left, top, right, bottom in pixels.
    pub bbox: [f64; 4],
    /// height, width, length.
    pub dims: [f64; 3],
    /// Bottom center in the rectified camera frame.
    pub location: [f64; 3],
    pub rotation_y: f64,
    pub score: Option<f64>,
}

impl LabelRecord {
    pub fn height_px(&self) -> f64 {
        self.bbox[3] - self.bbox[1]
    }

    pub fn difficulty(&self) -> Difficulty {
        assign_difficulty(self)
    }

    /// The box in a camera-aligned frame with x forward, y left, z up and
    /// the box center at mid-height. Rigid in the label coordinates, so
    /// IoUs computed here equal IoUs in the camera frame.
    pub fn to_eval_box(&self) -> Box3D {
        let [h, w, l] = self.dims;
        let [x, y, z] = self.location;
        Box3D {
            center: Vec3::new(z, -x, -y + 0.5 * h),
            dims: Vec3::new(l.max(1e-6), w.max(1e-6), h.max(1e-6)),
            yaw: normalize_angle(-self.rotation_y - FRAC_PI_2),
        }
    }
}

/// The easiest KITTI category whose height, occlusion and truncation limits
/// the label satisfies.
pub fn assign_difficulty(label: &LabelRecord) -> Difficulty {
    let h = label.height_px();
    DIFFICULTY_TABLE
        .iter()
        .find(|(_, min_h, max_occ, max_trunc)| {
            h >= *min_h && label.occlusion >= 0 && label.occlusion <= *max_occ && label.truncation <= *max_trunc
        })
        .map_or(Difficulty::Ignored, |row| row.0)
}

/// Converts a sensor-frame box to a camera-frame label. `None` when the box
/// reaches behind the camera or misses the image.
pub fn box_to_label(b: &Box3D, stats: &VisibilityStats, calib: &CalibBlock) -> Option<LabelRecord> {
    let rect = projected_rect(b, calib)?;
    let bbox = clip_to_image(&rect);
    if bbox[2] <= bbox[0] || bbox[3] <= bbox[1] {
        return None;
    }
    let bottom = Vec3::new(b.center.x, b.center.y, b.z_min());
    let loc = calib.velo_to_cam(&bottom);
    let v = calib.velo_to_cam_vector(&b.heading());
    let rotation_y = normalize_angle((-v.z).atan2(v.x));
    let alpha = normalize_angle(rotation_y - loc.x.atan2(loc.z));
    Some(LabelRecord {
        class: "Car".into(),
        truncation: stats.truncation.clamp(0.0, 1.0),
        occlusion: stats.occlusion_level as i8,
        alpha,
        bbox,
        dims: [b.height(), b.width(), b.length()],
        location: [loc.x, loc.y, loc.z],
        rotation_y,
        score: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxMode {
    /// Lift, collect points and shrink.
    Shrunk,
    /// Raw actor boxes.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelParams {
    pub box_mode: BoxMode,
    pub shrink: ShrinkParams,
    /// Vehicles with fewer points are left out of the ground truth.
    pub min_points: usize,
    pub occlusion: OcclusionThresholds,
}

impl Default for LabelParams {
    fn default() -> Self {
        LabelParams {
            box_mode: BoxMode::Shrunk,
            shrink: ShrinkParams::default(),
            min_points: 5,
            occlusion: OcclusionThresholds::default(),
        }
    }
}

impl LabelParams {
    pub fn validate(&self) -> Result<()> {
        self.shrink.validate()?;
        let o = &self.occlusion;
        if !(0.0 <= o.partly && o.partly <= o.largely && o.largely <= 1.0) {
            return Err(Error::range("occlusion thresholds", "need 0 <= partly <= largely <= 1"));
        }
        Ok(())
    }
}

/// Box in the world frame that a label is derived from, together with the
/// number of points that shaped it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelBox {
    pub actor_id: u32,
    pub world_box: Box3D,
    pub points_inside: usize,
}

/// World-frame label box for one actor: the raw box, or the raw box shrunk
/// towards the frame's points inside it after the upward shift. `None` when
/// shrinking finds no points.
pub fn label_box(raw: &Box3D, world_points: &[Vec3], params: &LabelParams) -> Option<(Box3D, usize)> {
    match params.box_mode {
        BoxMode::Original => Some((*raw, 0)),
        BoxMode::Shrunk => {
            let lifted = shift_up(raw, params.shrink.upward_shift);
            let inside = points_in_box(&lifted, world_points.iter().copied());
            let out = shrink_box(&lifted, &inside, &params.shrink);
            (!out.empty).then_some((out.boxed, inside.len()))
        }
    }
}

/// Labels for every sufficiently visible vehicle of a frame, ordered by
/// actor id.
pub fn frame_labels(frame: &DenseFrame, calib: &CalibBlock, params: &LabelParams) -> Vec<LabelRecord> {
    let pose = &frame.sensor_pose;
    let world_points: Vec<Vec3> = if params.box_mode == BoxMode::Shrunk {
        frame
            .points
            .iter()
            .map(|p| pose.transform_point(&p.last.position()))
            .collect()
    } else {
        Vec::new()
    };
    let mut actors: Vec<_> = frame.actors.iter().filter(|a| a.kind == ActorKind::Vehicle).collect();
    actors.sort_by_key(|a| a.id);
    let mut out = Vec::new();
    for a in actors {
        let raw_sensor = a.world_box.relative_to(pose);
        let stats = visibility_stats(a.id, &raw_sensor, frame, calib, &params.occlusion);
        if stats.num_points < params.min_points {
            continue;
        }
        let Some((world_box, _)) = label_box(&a.world_box, &world_points, params) else {
            continue;
        };
        let sensor_box = world_box.relative_to(pose);
        let stats = VisibilityStats {
            truncation: truncation(&sensor_box, calib),
            ..stats
        };
        if let Some(l) = box_to_label(&sensor_box, &stats, calib) {
            out.push(l);
        }
    }
    out
}
