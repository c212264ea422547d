use super::bvh::{Accel, Hit};
use crate::geometry::Vec3;
use crate::scene::MaterialKind;

/// Rays start slightly past their origin so surfaces through the origin are
/// not reported.
pub const RAY_T_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub direction: Vec3,
    pub channel: u16,
    pub azimuth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub point: Vec3,
    /// Distance from the ray origin, meters.
    pub range: f64,
    /// Unit surface normal facing the ray origin.
    pub normal: Vec3,
    pub material: MaterialKind,
    pub actor_id: Option<u32>,
    /// Camera-style grayscale value of the surface in [0, 1].
    pub grayscale: f64,
    pub triangle: u32,
}

/// First and last return of one ray. `first` differs from `last` only when
/// the first surface is glass and an opaque surface lies behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualHit {
    pub first: HitRecord,
    pub last: HitRecord,
}

impl DualHit {
    pub fn is_penetrating(&self) -> bool {
        self.first.triangle != self.last.triangle
    }
}

pub(crate) fn record(accel: &Accel, ray: &Ray, hit: Hit) -> HitRecord {
    let s = accel.surface(hit.triangle);
    let mut normal = accel.normal(hit.triangle);
    if normal.dot(&ray.direction) > 0.0 {
        normal = -normal;
    }
    HitRecord {
        point: ray.origin + ray.direction * hit.t,
        range: hit.t,
        normal,
        material: s.kind,
        actor_id: s.actor_id,
        grayscale: s.albedo,
        triangle: hit.triangle,
    }
}

/// Casts one ray. Returns `None` on a miss. When the nearest surface is
/// glass, a second query along the same line skips all glass and reports the
/// nearest non-glass surface behind it as `last`; without one, `last` equals
/// `first`.
pub fn trace(accel: &Accel, ray: &Ray, max_range: f64) -> Option<DualHit> {
    let hit = accel.intersect(&ray.origin, &ray.direction, RAY_T_MIN, max_range, false)?;
    let first = record(accel, ray, hit);
    let last = if first.material == MaterialKind::Glass {
        accel
            .intersect(&ray.origin, &ray.direction, hit.t, max_range, true)
            .map(|h| record(accel, ray, h))
            .unwrap_or(first)
    } else {
        first
    };
    Some(DualHit { first, last })
}

/// Single-return trace: the nearest surface.
pub fn trace_first(accel: &Accel, ray: &Ray, max_range: f64) -> Option<HitRecord> {
    accel
        .intersect(&ray.origin, &ray.direction, RAY_T_MIN, max_range, false)
        .map(|h| record(accel, ray, h))
}
