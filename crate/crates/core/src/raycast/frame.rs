//! The dense intermediate frame produced by the scan stage.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::trace::{DualHit, HitRecord};
use crate::geometry::{Box3D, Pose, Vec3};
use crate::scene::{ActorKind, MaterialKind, Scene};

/// Which beam pattern produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum BeamSet {
    Uniform = 0,
    DualUpper = 1,
    DualLower = 2,
    Depth = 3,
}

impl BeamSet {
    pub const ALL: [BeamSet; 4] = [BeamSet::Uniform, BeamSet::DualUpper, BeamSet::DualLower, BeamSet::Depth];

    pub fn from_u8(v: u8) -> Option<Self> {
        BeamSet::ALL.get(v as usize).copied()
    }
}

/// One return in the sensor frame, stored at single precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseHit {
    pub point: [f32; 3],
    pub range: f32,
    pub normal: [f32; 3],
    pub grayscale: f32,
    pub actor_id: Option<u32>,
    pub material: MaterialKind,
}

impl DenseHit {
    /// Converts a world-frame hit into the sensor frame of `pose`.
    pub fn from_world(hit: &HitRecord, pose: &Pose) -> Self {
        let p = pose.inverse_transform_point(&hit.point);
        let n = pose.inverse_transform_vector(&hit.normal);
        DenseHit {
            point: [p.x as f32, p.y as f32, p.z as f32],
            range: hit.range as f32,
            normal: [n.x as f32, n.y as f32, n.z as f32],
            grayscale: hit.grayscale as f32,
            actor_id: hit.actor_id,
            material: hit.material,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.point[0] as f64, self.point[1] as f64, self.point[2] as f64)
    }

    pub fn normal_vec(&self) -> Vec3 {
        Vec3::new(self.normal[0] as f64, self.normal[1] as f64, self.normal[2] as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensePoint {
    pub beam_set: BeamSet,
    pub channel: u16,
    pub azimuth: u32,
    pub first: DenseHit,
    pub last: DenseHit,
}

impl DensePoint {
    pub fn from_dual(set: BeamSet, channel: u16, azimuth: u32, hit: &DualHit, pose: &Pose) -> Self {
        let first = DenseHit::from_world(&hit.first, pose);
        let last = if hit.is_penetrating() {
            DenseHit::from_world(&hit.last, pose)
        } else {
            first
        };
        DensePoint {
            beam_set: set,
            channel,
            azimuth,
            first,
            last,
        }
    }
}

/// Per-actor data the processing stage needs: the raw world box and the
/// per-actor shading scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActorSummary {
    pub id: u32,
    pub kind: ActorKind,
    pub world_box: Box3D,
    pub reflectivity_scale: f64,
    pub brightness_scale: f64,
    /// Points whose last return lies on this actor.
    pub visible_points: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseFrame {
    pub frame_id: u64,
    /// Sensor pose in the world frame.
    pub sensor_pose: Pose,
    /// Azimuth step of the point grid, degrees.
    pub azimuth_step_deg: f64,
    pub actors: Vec<ActorSummary>,
    /// Points in canonical order: beam set, then channel, then azimuth.
    pub points: Vec<DensePoint>,
}

impl DenseFrame {
    pub fn new(frame_id: u64, sensor_pose: Pose, azimuth_step_deg: f64, scene: &Scene) -> Self {
        let actors = scene
            .actors
            .iter()
            .map(|a| ActorSummary {
                id: a.id,
                kind: a.kind,
                world_box: a.world_box(),
                reflectivity_scale: a.reflectivity_scale,
                brightness_scale: a.brightness_scale,
                visible_points: 0,
            })
            .collect();
        DenseFrame {
            frame_id,
            sensor_pose,
            azimuth_step_deg,
            actors,
            points: Vec::new(),
        }
    }

    pub fn actor(&self, id: u32) -> Option<&ActorSummary> {
        self.actors.iter().find(|a| a.id == id)
    }

    /// Id → index lookup for the actor table.
    pub fn actor_index(&self) -> HashMap<u32, usize> {
        self.actors.iter().enumerate().map(|(i, a)| (a.id, i)).collect()
    }

    /// Recounts `visible_points` from the current points.
    pub fn tally_visibility(&mut self) {
        let index = self.actor_index();
        for a in &mut self.actors {
            a.visible_points = 0;
        }
        for p in &self.points {
            if let Some(i) = p.last.actor_id.and_then(|id| index.get(&id)) {
                self.actors[*i].visible_points += 1;
            }
        }
    }

    /// A copy holding only points of the given beam sets whose azimuth index
    /// is a multiple of `decimation`. With `first_return`, each point's last
    /// return is replaced by its first.
    pub fn select(&self, sets: &[BeamSet], decimation: u32, first_return: bool) -> DenseFrame {
        let decimation = decimation.max(1);
        let points = self
            .points
            .iter()
            .filter(|p| sets.contains(&p.beam_set) && p.azimuth % decimation == 0)
            .map(|p| {
                let mut q = *p;
                if first_return {
                    q.last = q.first;
                }
                q.azimuth /= decimation;
                q
            })
            .collect();
        let mut out = DenseFrame {
            frame_id: self.frame_id,
            sensor_pose: self.sensor_pose,
            azimuth_step_deg: self.azimuth_step_deg * decimation as f64,
            actors: self.actors.clone(),
            points,
        };
        out.tally_visibility();
        out
    }
}
