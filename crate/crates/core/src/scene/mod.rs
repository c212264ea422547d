//! Procedural scenes: parametric vehicles with glass panels, props, static
//! structures and a ground plane.

mod material;
mod mesh;
mod random;
mod vehicle;

pub use material::{classify_material, Material, MaterialClassifier, MaterialKind};
pub use mesh::{Mesh, Triangle};
pub use random::{randomize_scene, MapStyle, RandomizationConfig, Span, YawDistribution};
pub use vehicle::{make_parametric_vehicle, VEHICLE_HEIGHT_RANGE, VEHICLE_LENGTH_RANGE, VEHICLE_WIDTH_RANGE};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Box3D, Pose, Vec3};

/// Maximum footprint interpenetration allowed between two actors, meters.
pub const INTERPENETRATION_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum ActorKind {
    Vehicle = 0,
    Prop = 1,
    Static = 2,
}

impl ActorKind {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(ActorKind::Vehicle),
            1 => Some(ActorKind::Prop),
            2 => Some(ActorKind::Static),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub id: u32,
    pub kind: ActorKind,
    /// Geometry in the actor frame.
    pub mesh: Mesh,
    pub pose: Pose,
    /// Tight box around the mesh, actor frame.
    pub raw_box: Box3D,
    pub reflectivity_scale: f64,
    pub brightness_scale: f64,
}

impl Actor {
    /// Raw box in the world frame. Actors are placed with yaw-only poses.
    pub fn world_box(&self) -> Box3D {
        self.raw_box.transformed(&self.pose)
    }

    pub fn world_triangles(&self) -> impl Iterator<Item = ([Vec3; 3], &Material)> + '_ {
        let rot = self.pose.rotation();
        let t = self.pose.translation;
        self.mesh.triangles.iter().map(move |tri| {
            let v = tri.vertices.map(|p| rot * p + t);
            (v, &self.mesh.materials[tri.material as usize])
        })
    }
}

/// Horizontal ground square centered on the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ground {
    pub height: f64,
    pub half_extent: f64,
    pub material: Material,
}

impl Ground {
    pub fn triangles(&self) -> [[Vec3; 3]; 2] {
        let (h, z) = (self.half_extent, self.height);
        let a = Vec3::new(-h, -h, z);
        let b = Vec3::new(h, -h, z);
        let c = Vec3::new(h, h, z);
        let d = Vec3::new(-h, h, z);
        [[a, b, c], [a, c, d]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub seed: u64,
    pub ground: Option<Ground>,
    pub actors: Vec<Actor>,
}

impl Scene {
    pub fn empty(seed: u64) -> Self {
        Scene {
            seed,
            ground: None,
            actors: Vec::new(),
        }
    }

    pub fn actor(&self, id: u32) -> Option<&Actor> {
        self.actors.iter().find(|a| a.id == id)
    }

    pub fn triangle_count(&self) -> usize {
        self.ground.as_ref().map_or(0, |_| 2) + self.actors.iter().map(|a| a.mesh.triangles.len()).sum::<usize>()
    }

    /// Checks the scene invariants: unique ids, boxes enclosing their meshes
    /// and no vehicle pair interpenetrating beyond tolerance.
    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<u32> = self.actors.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate actor id".into()));
        }
        for a in &self.actors {
            if !a.mesh.fits_in(&a.raw_box, 1e-9) {
                return Err(Error::Config(format!("actor {} raw box misses vertices", a.id)));
            }
        }
        let vehicles: Vec<Box3D> = self
            .actors
            .iter()
            .filter(|a| a.kind == ActorKind::Vehicle)
            .map(Actor::world_box)
            .collect();
        for (i, a) in vehicles.iter().enumerate() {
            for b in &vehicles[i + 1..] {
                if crate::geometry::bev_penetration(a, b) > INTERPENETRATION_TOLERANCE {
                    return Err(Error::Config("vehicles interpenetrate".into()));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scene: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scene::from_json(&text)
    }
}

/// Flat wall facing the origin: a static box whose near face is the plane
/// x = `distance`, spanning y in ±`half_width` and z in [0, `height`], over
/// a ground plane at z = 0.
pub fn wall_scene(distance: f64, half_width: f64, height: f64) -> Result<Scene> {
    if !(distance > 0.0 && half_width > 0.0 && height > 0.0) {
        return Err(Error::range("wall", "distance, width and height must be positive"));
    }
    let mut mesh = Mesh::default();
    let m = mesh.add_material(Material::named("Wall_Concrete", 0.5)?);
    let depth = 0.3;
    mesh.push_box(
        Vec3::new(-0.5 * depth, -half_width, 0.0),
        Vec3::new(0.5 * depth, half_width, height),
        m,
        true,
    );
    let raw_box = Box3D::new(
        Vec3::new(0.0, 0.0, 0.5 * height),
        Vec3::new(depth, 2.0 * half_width, height),
        0.0,
    )?;
    Ok(Scene {
        seed: 0,
        ground: Some(Ground {
            height: 0.0,
            half_extent: distance + 50.0,
            material: Material::named("Ground_Asphalt", 0.3)?,
        }),
        actors: vec![Actor {
            id: 1,
            kind: ActorKind::Static,
            mesh,
            pose: Pose::from_translation_yaw(Vec3::new(distance + 0.5 * depth, 0.0, 0.0), 0.0),
            raw_box,
            reflectivity_scale: 1.0,
            brightness_scale: 1.0,
        }],
    })
}
