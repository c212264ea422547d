//! Rigid poses and oriented boxes shared by the scene, label and
//! evaluation code.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Wraps an angle into (-π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Rigid transform: translation in meters, intrinsic yaw-pitch-roll in
/// radians (R = Rz(yaw) · Ry(pitch) · Rx(roll)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub translation: Vec3,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub pitch: f64,
    #[serde(default)]
    pub roll: f64,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            translation: Vec3::zeros(),
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
        }
    }

    pub fn from_translation_yaw(translation: Vec3, yaw: f64) -> Self {
        Pose {
            translation,
            yaw,
            ..Pose::identity()
        }
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation() * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation() * v
    }

    pub fn inverse_transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation().inverse() * (p - self.translation)
    }

    pub fn inverse_transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation().inverse() * v
    }
}

/// Oriented 3D box: geometric center, dimensions (length along local x,
/// width along local y, height along z) and yaw about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub center: Vec3,
    pub dims: Vec3,
    pub yaw: f64,
}

impl Box3D {
    pub fn new(center: Vec3, dims: Vec3, yaw: f64) -> Result<Self> {
        if !(dims.iter().all(|d| d.is_finite() && *d > 0.0)) {
            return Err(Error::range("box dimensions", format!("{dims:?} must be positive")));
        }
        if !center.iter().all(|c| c.is_finite()) || !yaw.is_finite() {
            return Err(Error::range("box pose", "non-finite value"));
        }
        Ok(Box3D {
            center,
            dims,
            yaw: normalize_angle(yaw),
        })
    }

    pub fn length(&self) -> f64 {
        self.dims.x
    }

    pub fn width(&self) -> f64 {
        self.dims.y
    }

    pub fn height(&self) -> f64 {
        self.dims.z
    }

    pub fn z_min(&self) -> f64 {
        self.center.z - 0.5 * self.dims.z
    }

    pub fn z_max(&self) -> f64 {
        self.center.z + 0.5 * self.dims.z
    }

    pub fn volume(&self) -> f64 {
        self.dims.x * self.dims.y * self.dims.z
    }

    /// Unit heading vector (local +x) in the parent frame.
    pub fn heading(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    /// Expresses a parent-frame point in box-local coordinates (origin at the
    /// center, axes along length/width/height).
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center;
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    pub fn from_local(&self, p: &Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        self.center + Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= 0.5 * self.dims.x + tol
            && l.y.abs() <= 0.5 * self.dims.y + tol
            && l.z.abs() <= 0.5 * self.dims.z + tol
    }

    /// The eight corners: bottom face counter-clockwise starting at
    /// (+l/2, +w/2), then the top face in the same order.
    pub fn corners(&self) -> [Vec3; 8] {
        let (hl, hw, hh) = (0.5 * self.dims.x, 0.5 * self.dims.y, 0.5 * self.dims.z);
        let xy = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)];
        let mut out = [Vec3::zeros(); 8];
        for (i, &(x, y)) in xy.iter().enumerate() {
            out[i] = self.from_local(&Vec3::new(x, y, -hh));
            out[i + 4] = self.from_local(&Vec3::new(x, y, hh));
        }
        out
    }

    /// Ground-plane footprint, counter-clockwise.
    pub fn bev_corners(&self) -> [[f64; 2]; 4] {
        let c = self.corners();
        [[c[0].x, c[0].y], [c[1].x, c[1].y], [c[2].x, c[2].y], [c[3].x, c[3].y]]
    }

    /// Applies a rigid transform whose rotation is assumed to be a pure yaw
    /// (pitch and roll are ignored for the orientation).
    pub fn transformed(&self, pose: &Pose) -> Box3D {
        Box3D {
            center: pose.transform_point(&self.center),
            dims: self.dims,
            yaw: normalize_angle(self.yaw + pose.yaw),
        }
    }

    /// Re-expresses a box given in the parent frame of `pose` in the frame
    /// `pose` describes. The new yaw is the heading direction projected onto
    /// the local ground plane.
    pub fn relative_to(&self, pose: &Pose) -> Box3D {
        let h = pose.inverse_transform_vector(&self.heading());
        Box3D {
            center: pose.inverse_transform_point(&self.center),
            dims: self.dims,
            yaw: h.y.atan2(h.x),
        }
    }

    /// Slab test. Returns the parametric entry and exit distances of the ray
    /// `origin + t·dir` through the box, if it hits.
    pub fn ray_interval(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let o = self.to_local(origin);
        let (s, c) = self.yaw.sin_cos();
        let d = Vec3::new(c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z);
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            let half = 0.5 * self.dims[k];
            if d[k].abs() < 1e-15 {
                if o[k].abs() > half {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d[k];
            let (mut a, mut b) = ((-half - o[k]) * inv, (half - o[k]) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Minimum translation distance separating two footprints along the
/// separating-axis candidates. Zero or negative when the footprints do not
/// overlap.
pub fn bev_penetration(a: &Box3D, b: &Box3D) -> f64 {
    let pa = a.bev_corners();
    let pb = b.bev_corners();
    let axes = [
        [a.yaw.cos(), a.yaw.sin()],
        [-a.yaw.sin(), a.yaw.cos()],
        [b.yaw.cos(), b.yaw.sin()],
        [-b.yaw.sin(), b.yaw.cos()],
    ];
    let project = |pts: &[[f64; 2]; 4], ax: &[f64; 2]| {
        pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let v = p[0] * ax[0] + p[1] * ax[1];
            (lo.min(v), hi.max(v))
        })
    };
    axes.iter()
        .map(|ax| {
            let (a0, a1) = project(&pa, ax);
            let (b0, b1) = project(&pb, ax);
            a1.min(b1) - a0.max(b0)
        })
        .fold(f64::INFINITY, f64::min)
}
