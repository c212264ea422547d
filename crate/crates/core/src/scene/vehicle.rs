//! Parametric car mesh.
//!
//! Actor frame: x forward, y left, z up, origin at the center of the ground
//! footprint. The mesh consists of
//!
//! * wheels reaching down to z = 0,
//! * a closed lower body between the ground clearance and the beltline,
//! * a cabin whose four walls are opaque frames around glass windows and
//!   whose roof is opaque,
//! * an opaque interior block inset `INTERIOR_DEPTH` behind every window,
//! * retro-reflective plates flush with the front and rear extremes.
//!
//! Pillars are wider than twice the interior depth and the top rail is
//! deeper than the interior depth, so every straight line entering through
//! one window meets the interior block, roof or body before leaving through
//! another window.

use rand::Rng;

use super::{Actor, ActorKind, Material, Mesh};
use crate::error::{Error, Result};
use crate::geometry::{Box3D, Pose, Vec3};
use crate::seed;

pub const VEHICLE_LENGTH_RANGE: (f64, f64) = (3.0, 6.0);
pub const VEHICLE_WIDTH_RANGE: (f64, f64) = (1.5, 2.2);
pub const VEHICLE_HEIGHT_RANGE: (f64, f64) = (1.3, 2.1);

const PLATE_OFFSET: f64 = 0.01;
const CABIN_INSET: f64 = 0.06;
pub(crate) const INTERIOR_DEPTH: f64 = 0.15;
const PILLAR: f64 = 0.34;
const TOP_RAIL: f64 = 0.18;
const SILL: f64 = 0.06;
const WHEEL_RADIUS: f64 = 0.32;

fn check(what: &'static str, v: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::range(what, format!("{v} not in [{lo}, {hi}]")))
    }
}

/// Builds a closed car mesh with the given outer dimensions. The actor has
/// id 0, an identity pose and unit reflectivity/brightness scales; scene
/// generation overrides those.
pub fn make_parametric_vehicle(length: f64, width: f64, height: f64, seed: u64) -> Result<Actor> {
    check("vehicle length", length, VEHICLE_LENGTH_RANGE)?;
    check("vehicle width", width, VEHICLE_WIDTH_RANGE)?;
    check("vehicle height", height, VEHICLE_HEIGHT_RANGE)?;

    let mut rng = seed::rng(seed);
    let clearance = height * rng.random_range(0.10..0.14);
    let beltline = clearance + (height - clearance) * rng.random_range(0.42..0.50);
    let cabin_len = length * rng.random_range(0.45..0.55);
    let cabin_shift = length * rng.random_range(-0.08..0.0);
    let paint = rng.random_range(0.05..0.85);

    let (hl, hw) = (0.5 * length, 0.5 * width);
    let mut mesh = Mesh::default();
    let body = mesh.add_material(Material::named("Body_Paint", paint)?);
    let tire = mesh.add_material(Material::named("Tire_Rubber", 0.05)?);
    let interior = mesh.add_material(Material::named("Interior_Seats", 0.15)?);
    let plate = mesh.add_material(Material::named("LicensePlate", 0.9)?);
    let side_glass = mesh.add_material(Material::named("Window_Side", 0.1)?);
    let front_glass = mesh.add_material(Material::named("Window_Front", 0.1)?);
    let rear_glass = mesh.add_material(Material::named("Window_Rear", 0.1)?);

    // wheels
    let axle = hl - 0.18 * length;
    for ax in [-axle, axle] {
        for side in [-1.0, 1.0] {
            let (y0, y1) = (hw - 0.24, hw - 0.02);
            let (ylo, yhi) = if side > 0.0 { (y0, y1) } else { (-y1, -y0) };
            mesh.push_box(
                Vec3::new(ax - WHEEL_RADIUS, ylo, 0.0),
                Vec3::new(ax + WHEEL_RADIUS, yhi, clearance + 0.12),
                tire,
                false,
            );
        }
    }

    // lower body
    mesh.push_box(
        Vec3::new(-hl + PLATE_OFFSET, -hw, clearance),
        Vec3::new(hl - PLATE_OFFSET, hw, beltline),
        body,
        false,
    );

    // plates
    let (pz0, pz1) = (clearance + 0.05, clearance + 0.16);
    for x in [-hl, hl] {
        let p = |y: f64, z: f64| Vec3::new(x, y, z);
        mesh.push_quad(p(-0.26, pz0), p(0.26, pz0), p(0.26, pz1), p(-0.26, pz1), plate);
    }

    // cabin shell
    let (x0, x1) = (cabin_shift - 0.5 * cabin_len, cabin_shift + 0.5 * cabin_len);
    let cw = hw - CABIN_INSET;
    let (z0, z1) = (beltline, height);
    let wall_h = z1 - z0;
    let t_win = (SILL / wall_h, 1.0 - TOP_RAIL / wall_h);
    let sides = [
        // left (+y) and right (-y) walls run along x
        (Vec3::new(x0, cw, z0), Vec3::new(x1 - x0, 0.0, 0.0), x1 - x0, side_glass),
        (
            Vec3::new(x0, -cw, z0),
            Vec3::new(x1 - x0, 0.0, 0.0),
            x1 - x0,
            side_glass,
        ),
        // front (+x) and rear (-x) walls run along y
        (
            Vec3::new(x1, -cw, z0),
            Vec3::new(0.0, 2.0 * cw, 0.0),
            2.0 * cw,
            front_glass,
        ),
        (
            Vec3::new(x0, -cw, z0),
            Vec3::new(0.0, 2.0 * cw, 0.0),
            2.0 * cw,
            rear_glass,
        ),
    ];
    for (origin, u, span, glass) in sides {
        let s = PILLAR / span;
        mesh.push_framed_panel(origin, u, Vec3::new(0.0, 0.0, wall_h), (s, 1.0 - s), t_win, body, glass);
    }
    let r = |x: f64, y: f64| Vec3::new(x, y, z1);
    mesh.push_quad(r(x0, -cw), r(x1, -cw), r(x1, cw), r(x0, cw), body);

    // interior occluder
    mesh.push_box(
        Vec3::new(x0 + INTERIOR_DEPTH, -cw + INTERIOR_DEPTH, z0),
        Vec3::new(x1 - INTERIOR_DEPTH, cw - INTERIOR_DEPTH, z1 - INTERIOR_DEPTH),
        interior,
        true,
    );

    let raw_box = Box3D::new(Vec3::new(0.0, 0.0, 0.5 * height), Vec3::new(length, width, height), 0.0)?;
    Ok(Actor {
        id: 0,
        kind: ActorKind::Vehicle,
        mesh,
        pose: Pose::identity(),
        raw_box,
        reflectivity_scale: 1.0,
        brightness_scale: 1.0,
    })
}
