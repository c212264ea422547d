//! Randomized scene layouts.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    make_parametric_vehicle, Actor, ActorKind, Ground, Material, Mesh, Scene, INTERPENETRATION_TOLERANCE,
    VEHICLE_HEIGHT_RANGE, VEHICLE_LENGTH_RANGE, VEHICLE_WIDTH_RANGE,
};
use crate::error::{Error, Result};
use crate::geometry::{bev_penetration, Box3D, Pose, Vec3};
use crate::seed;

/// Consecutive rejected placements after which generation stops.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

/// Closed interval `[min, max]`, written as a two element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span<T>(pub T, pub T);

impl Span<f64> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.0 == self.1 {
            self.0
        } else {
            rng.random_range(self.0..=self.1)
        }
    }

    fn valid(&self) -> bool {
        self.0.is_finite() && self.1.is_finite() && self.0 <= self.1
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.0..=self.1).contains(&v)
    }
}

impl Span<u32> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        rng.random_range(self.0..=self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapStyle {
    /// Four-lane road along x with parking shoulders and building rows.
    StraightRoad,
    /// Two crossing roads with buildings in the quadrants.
    Intersection,
    /// Open parking lot, uniform positions and headings.
    OpenLot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum YawDistribution {
    /// Uniform in [0, 2π) for every actor.
    Uniform,
    /// Vehicles on roads follow their lane direction plus Gaussian jitter;
    /// open lots stay uniform.
    LaneAligned { jitter_deg: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomizationConfig {
    /// Layout generators to pick from, uniformly.
    pub map_styles: Vec<MapStyle>,
    pub vehicle_count: Span<u32>,
    pub prop_count: Span<u32>,
    /// Spawn rectangle in world meters (sensor at the origin, x forward).
    pub spawn_x: Span<f64>,
    pub spawn_y: Span<f64>,
    pub vehicle_length: Span<f64>,
    pub vehicle_width: Span<f64>,
    pub vehicle_height: Span<f64>,
    pub yaw_distribution: YawDistribution,
    pub reflectivity_scale: Span<f64>,
    pub brightness_scale: Span<f64>,
    /// Building rows along roads.
    pub static_structures: bool,
    pub ground_half_extent: f64,
    pub ground_albedo: Span<f64>,
    /// Footprint kept free around the ego vehicle at the origin (length,
    /// width).
    pub ego_footprint: [f64; 2],
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            map_styles: vec![MapStyle::StraightRoad, MapStyle::Intersection, MapStyle::OpenLot],
            vehicle_count: Span(6, 20),
            prop_count: Span(0, 8),
            spawn_x: Span(-25.0, 70.0),
            spawn_y: Span(-30.0, 30.0),
            vehicle_length: Span(3.6, 5.2),
            vehicle_width: Span(1.6, 2.0),
            vehicle_height: Span(1.35, 1.8),
            yaw_distribution: YawDistribution::LaneAligned { jitter_deg: 6.0 },
            reflectivity_scale: Span(0.75, 1.0),
            brightness_scale: Span(0.75, 1.0),
            static_structures: true,
            ground_half_extent: 150.0,
            ground_albedo: Span(0.25, 0.45),
            ego_footprint: [5.0, 2.4],
        }
    }
}

impl RandomizationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("randomization: {what}")));
        if self.map_styles.is_empty() {
            return bad("map_styles is empty");
        }
        if self.vehicle_count.0 > self.vehicle_count.1 || self.prop_count.0 > self.prop_count.1 {
            return bad("count range is empty");
        }
        for (name, s) in [
            ("spawn_x", self.spawn_x),
            ("spawn_y", self.spawn_y),
            ("vehicle_length", self.vehicle_length),
            ("vehicle_width", self.vehicle_width),
            ("vehicle_height", self.vehicle_height),
            ("reflectivity_scale", self.reflectivity_scale),
            ("brightness_scale", self.brightness_scale),
            ("ground_albedo", self.ground_albedo),
        ] {
            if !s.valid() {
                return bad(&format!("{name} range is empty or not finite"));
            }
        }
        let within = |s: Span<f64>, (lo, hi): (f64, f64)| s.0 >= lo && s.1 <= hi;
        if !within(self.vehicle_length, VEHICLE_LENGTH_RANGE)
            || !within(self.vehicle_width, VEHICLE_WIDTH_RANGE)
            || !within(self.vehicle_height, VEHICLE_HEIGHT_RANGE)
        {
            return bad("vehicle dimensions exceed the parametric vehicle limits");
        }
        for s in [self.reflectivity_scale, self.brightness_scale] {
            if s.0 <= 0.0 || s.1 > 1.0 {
                return bad("scale ranges must lie in (0, 1]");
            }
        }
        if !within(self.ground_albedo, (0.0, 1.0)) {
            return bad("ground albedo must lie in [0, 1]");
        }
        if !(self.ground_half_extent > 0.0) {
            return bad("ground_half_extent must be positive");
        }
        if let YawDistribution::LaneAligned { jitter_deg } = self.yaw_distribution {
            if !(jitter_deg >= 0.0) {
                return bad("jitter_deg must be non-negative");
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(format!("randomization: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

const LANES: [f64; 4] = [-5.25, -1.75, 1.75, 5.25];
const PARKING: f64 = 8.4;
const SIDEWALK: Span<f64> = Span(9.8, 11.5);
const BUILDING_SETBACK: f64 = 12.5;

struct Layout<'a> {
    cfg: &'a RandomizationConfig,
    style: MapStyle,
    rng: ChaCha8Rng,
    placed: Vec<Box3D>,
    actors: Vec<Actor>,
    exhausted: bool,
}

impl Layout<'_> {
    fn next_id(&self) -> u32 {
        self.actors.len() as u32 + 1
    }

    fn fits(&self, b: &Box3D) -> bool {
        self.placed
            .iter()
            .all(|p| bev_penetration(p, b) <= INTERPENETRATION_TOLERANCE)
    }

    fn in_region(&self, p: &Vec3) -> bool {
        self.cfg.spawn_x.contains(p.x) && self.cfg.spawn_y.contains(p.y)
    }

    fn scales(&mut self) -> (f64, f64) {
        let r = self.cfg.reflectivity_scale.sample(&mut self.rng);
        let b = self.cfg.brightness_scale.sample(&mut self.rng);
        (r, b)
    }

    fn lane_yaw(&mut self, base: f64) -> f64 {
        match self.cfg.yaw_distribution {
            YawDistribution::Uniform => self.rng.random_range(0.0..2.0 * PI),
            YawDistribution::LaneAligned { jitter_deg } => {
                let j: f64 = self.rng.sample(rand_distr::StandardNormal);
                base + j * jitter_deg.to_radians()
            }
        }
    }

    /// Candidate vehicle pose for the current layout.
    fn vehicle_pose(&mut self) -> (f64, f64, f64) {
        let x = self.cfg.spawn_x.sample(&mut self.rng);
        match self.style {
            MapStyle::OpenLot => {
                let y = self.cfg.spawn_y.sample(&mut self.rng);
                (x, y, self.rng.random_range(0.0..2.0 * PI))
            }
            MapStyle::StraightRoad | MapStyle::Intersection => {
                let parked = self.rng.random_bool(0.3);
                let (lateral, base) = if parked {
                    let side = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let facing = if self.rng.random_bool(0.5) { 0.0 } else { PI };
                    (side * PARKING, facing)
                } else {
                    let lane = *LANES.choose(&mut self.rng).unwrap();
                    (lane, if lane < 0.0 { 0.0 } else { PI })
                };
                let lateral = lateral + self.rng.random_range(-0.2..0.2);
                let yaw = self.lane_yaw(base);
                let crossing = self.style == MapStyle::Intersection && self.rng.random_bool(0.5);
                if crossing {
                    // along the y road: swap roles and rotate the heading
                    let along = self.cfg.spawn_y.sample(&mut self.rng);
                    (lateral + 20.0, along, yaw + FRAC_PI_2)
                } else {
                    (x, lateral, yaw)
                }
            }
        }
    }

    fn prop_position(&mut self) -> (f64, f64) {
        let x = self.cfg.spawn_x.sample(&mut self.rng);
        let side = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let band = side * SIDEWALK.sample(&mut self.rng);
        match self.style {
            MapStyle::OpenLot => (x, self.cfg.spawn_y.sample(&mut self.rng)),
            MapStyle::StraightRoad => (x, band),
            MapStyle::Intersection => {
                if self.rng.random_bool(0.5) {
                    (x, band)
                } else {
                    (20.0 + band, self.cfg.spawn_y.sample(&mut self.rng))
                }
            }
        }
    }

    /// Tries to place `make(pose)` until it fits. Returns false after
    /// `MAX_PLACEMENT_ATTEMPTS` consecutive failures.
    fn place(&mut self, mut candidate: impl FnMut(&mut Self) -> Option<Actor>) -> bool {
        if self.exhausted {
            return false;
        }
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let Some(actor) = candidate(self) else { continue };
            let b = actor.world_box();
            if self.in_region(&b.center) && self.fits(&b) {
                self.placed.push(b);
                self.actors.push(actor);
                return true;
            }
        }
        self.exhausted = true;
        false
    }
}

fn box_actor(
    id: u32,
    kind: ActorKind,
    dims: Vec3,
    pose: Pose,
    material: Material,
    (reflectivity_scale, brightness_scale): (f64, f64),
) -> Result<Actor> {
    let mut mesh = Mesh::default();
    let m = mesh.add_material(material);
    let h = Vec3::new(0.5 * dims.x, 0.5 * dims.y, 0.0);
    mesh.push_box(-h, h + Vec3::new(0.0, 0.0, dims.z), m, true);
    Ok(Actor {
        id,
        kind,
        mesh,
        pose,
        raw_box: Box3D::new(Vec3::new(0.0, 0.0, 0.5 * dims.z), dims, 0.0)?,
        reflectivity_scale,
        brightness_scale,
    })
}

/// Building footprints for road layouts: (center x, center y, length along
/// x, depth along y).
fn building_rows(style: MapStyle, cfg: &RandomizationConfig, rng: &mut ChaCha8Rng) -> Vec<[f64; 4]> {
    let mut out = Vec::new();
    let row = |rng: &mut ChaCha8Rng, x_span: Span<f64>, side: f64, out: &mut Vec<[f64; 4]>| {
        let mut x = x_span.0 + rng.random_range(0.0..6.0);
        while x < x_span.1 {
            let len = rng.random_range(8.0..20.0);
            let depth = rng.random_range(6.0..12.0);
            let cx = x + 0.5 * len;
            if cx < x_span.1 {
                out.push([cx, side * (BUILDING_SETBACK + 0.5 * depth), len, depth]);
            }
            x += len + rng.random_range(2.0..10.0);
        }
    };
    match style {
        MapStyle::StraightRoad => {
            for side in [-1.0, 1.0] {
                row(rng, cfg.spawn_x, side, &mut out);
            }
        }
        MapStyle::Intersection => {
            // rows along the x road, interrupted by the crossing road at x = 20
            for side in [-1.0, 1.0] {
                row(rng, Span(cfg.spawn_x.0, 20.0 - BUILDING_SETBACK), side, &mut out);
                row(rng, Span(20.0 + BUILDING_SETBACK, cfg.spawn_x.1), side, &mut out);
            }
        }
        MapStyle::OpenLot => {}
    }
    out
}

/// Builds a randomized scene. Deterministic in `(config, seed)`.
pub fn randomize_scene(config: &RandomizationConfig, seed: u64) -> Result<Scene> {
    config.validate()?;
    let mut rng = seed::rng(seed);
    let style = *config.map_styles.choose(&mut rng).unwrap();
    let ground_albedo = config.ground_albedo.sample(&mut rng);
    let ground = Ground {
        height: 0.0,
        half_extent: config.ground_half_extent,
        material: Material::named("Road_Asphalt", ground_albedo)?,
    };
    let ego = Box3D::new(
        Vec3::new(0.0, 0.0, 0.75),
        Vec3::new(config.ego_footprint[0], config.ego_footprint[1], 1.5),
        0.0,
    )?;
    let mut layout = Layout {
        cfg: config,
        style,
        rng,
        placed: vec![ego],
        actors: Vec::new(),
        exhausted: false,
    };

    if config.static_structures {
        let rows = building_rows(style, config, &mut layout.rng);
        for [cx, cy, len, depth] in rows {
            let height = layout.rng.random_range(4.0..12.0);
            let albedo = layout.rng.random_range(0.2..0.7);
            let scales = layout.scales();
            let actor = box_actor(
                layout.next_id(),
                ActorKind::Static,
                Vec3::new(len, depth, height),
                Pose::from_translation_yaw(Vec3::new(cx, cy, 0.0), 0.0),
                Material::named("Building_Facade", albedo)?,
                scales,
            )?;
            let b = actor.world_box();
            if layout.fits(&b) {
                layout.placed.push(b);
                layout.actors.push(actor);
            }
        }
    }

    let n_vehicles = config.vehicle_count.sample(&mut layout.rng);
    for _ in 0..n_vehicles {
        let l = config.vehicle_length.sample(&mut layout.rng);
        let w = config.vehicle_width.sample(&mut layout.rng);
        let h = config.vehicle_height.sample(&mut layout.rng);
        let mesh_seed: u64 = layout.rng.random();
        let scales = layout.scales();
        let mut template = make_parametric_vehicle(l, w, h, mesh_seed)?;
        template.reflectivity_scale = scales.0;
        template.brightness_scale = scales.1;
        let placed = layout.place(|lay| {
            let (x, y, yaw) = lay.vehicle_pose();
            let mut a = template.clone();
            a.id = lay.next_id();
            a.pose = Pose::from_translation_yaw(Vec3::new(x, y, 0.0), yaw);
            Some(a)
        });
        if !placed {
            break;
        }
    }

    const PROPS: [(&str, f64); 5] = [
        ("Prop_TrashBin", 0.3),
        ("GlassContainer", 0.45),
        ("Prop_Box", 0.55),
        ("Bush_Foliage", 0.25),
        ("Prop_Table", 0.4),
    ];
    let n_props = config.prop_count.sample(&mut layout.rng);
    for _ in 0..n_props {
        let &(name, albedo) = PROPS.choose(&mut layout.rng).unwrap();
        let dims = Vec3::new(
            layout.rng.random_range(0.4..1.6),
            layout.rng.random_range(0.4..1.6),
            layout.rng.random_range(0.5..1.3),
        );
        let scales = layout.scales();
        let material = Material::named(name, albedo)?;
        let placed = layout.place(|lay| {
            let (x, y) = lay.prop_position();
            let yaw = lay.rng.random_range(0.0..2.0 * PI);
            box_actor(
                lay.next_id(),
                ActorKind::Prop,
                dims,
                Pose::from_translation_yaw(Vec3::new(x, y, 0.0), yaw),
                material.clone(),
                scales,
            )
            .ok()
        });
        if !placed {
            break;
        }
    }

    Ok(Scene {
        seed,
        ground: Some(ground),
        actors: layout.actors,
    })
}
