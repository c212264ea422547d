//! Scan geometry: beam blocks, sensor models, pose randomization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::Ray;
use super::BeamSet;
use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    /// One block of linearly spaced channels.
    Uniform64,
    /// Upper narrow-FOV and lower wide-FOV blocks with separate optical
    /// centers.
    DualVelodyne,
    /// Pseudo-LiDAR sampled from a depth camera at the `Uniform64` pattern.
    DepthSampled,
}

/// A set of channels sharing an optical center. Elevations are spaced
/// linearly from `fov_deg[0]` (top) down to `fov_deg[1]` (bottom).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamBlock {
    pub channels: u16,
    pub fov_deg: [f64; 2],
    /// Optical center relative to the sensor origin, meters.
    #[serde(default)]
    pub optical_center_offset: [f64; 3],
}

impl BeamBlock {
    pub fn elevations_deg(&self) -> Vec<f64> {
        let n = self.channels as usize;
        if n == 1 {
            return vec![self.fov_deg[0]];
        }
        let step = (self.fov_deg[0] - self.fov_deg[1]) / (n - 1) as f64;
        (0..n).map(|i| self.fov_deg[0] - step * i as f64).collect()
    }

    pub fn span_deg(&self) -> f64 {
        self.fov_deg[0] - self.fov_deg[1]
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::Config(format!("{what}: zero channels")));
        }
        let [top, bottom] = self.fov_deg;
        if !(top.is_finite() && bottom.is_finite()) || (self.channels > 1 && top <= bottom) {
            return Err(Error::Config(format!(
                "{what}: elevation table must be strictly decreasing"
            )));
        }
        if top > 90.0 || bottom < -90.0 {
            return Err(Error::Config(format!("{what}: elevations beyond ±90°")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualBlocks {
    pub upper: BeamBlock,
    pub lower: BeamBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseNoise {
    pub pitch_sigma_deg: f64,
    pub roll_sigma_deg: f64,
    pub yaw_sigma_deg: f64,
    pub z_sigma_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthCamera {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
}

impl Default for DepthCamera {
    fn default() -> Self {
        DepthCamera {
            width: 2048,
            height: 512,
            hfov_deg: 120.0,
        }
    }
}

impl DepthCamera {
    /// Focal length in pixels (square pixels).
    pub fn focal(&self) -> f64 {
        0.5 * self.width as f64 / (0.5 * self.hfov_deg.to_radians()).tan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorModel {
    pub kind: SensorKind,
    pub azimuth_step_deg: f64,
    pub uniform: BeamBlock,
    pub dual: DualBlocks,
    pub max_range: f64,
    pub pose_randomization: PoseNoise,
    pub depth_camera: DepthCamera,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            kind: SensorKind::Uniform64,
            azimuth_step_deg: 0.18,
            uniform: BeamBlock {
                channels: 64,
                fov_deg: [2.0, -24.8],
                optical_center_offset: [0.0; 3],
            },
            dual: DualBlocks {
                upper: BeamBlock {
                    channels: 32,
                    fov_deg: [2.0, -8.33],
                    optical_center_offset: [0.0, 0.0, 0.0254],
                },
                lower: BeamBlock {
                    channels: 32,
                    fov_deg: [-8.83, -24.33],
                    optical_center_offset: [0.0, 0.0, -0.0254],
                },
            },
            max_range: 120.0,
            pose_randomization: PoseNoise {
                pitch_sigma_deg: 1.0,
                roll_sigma_deg: 0.5,
                yaw_sigma_deg: 2.0,
                z_sigma_m: 0.05,
            },
            depth_camera: DepthCamera::default(),
        }
    }
}

impl SensorModel {
    pub fn with_kind(kind: SensorKind) -> Self {
        SensorModel {
            kind,
            ..SensorModel::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        azimuth_columns(self.azimuth_step_deg)?;
        self.uniform.validate("uniform block")?;
        self.dual.upper.validate("dual upper block")?;
        self.dual.lower.validate("dual lower block")?;
        if self.dual.upper.span_deg() >= self.dual.lower.span_deg() {
            return Err(Error::Config(
                "dual upper block FOV must be narrower than the lower block".into(),
            ));
        }
        if self.dual.upper.fov_deg[1] <= self.dual.lower.fov_deg[0] {
            return Err(Error::Config("dual blocks overlap in elevation".into()));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::Config("max_range must be positive".into()));
        }
        let p = &self.pose_randomization;
        if [p.pitch_sigma_deg, p.roll_sigma_deg, p.yaw_sigma_deg, p.z_sigma_m]
            .iter()
            .any(|s| !(*s >= 0.0))
        {
            return Err(Error::Config("pose sigmas must be non-negative".into()));
        }
        if self.depth_camera.width == 0
            || self.depth_camera.height == 0
            || !(self.depth_camera.hfov_deg > 0.0 && self.depth_camera.hfov_deg < 180.0)
        {
            return Err(Error::Config("invalid depth camera".into()));
        }
        Ok(())
    }

    /// Beam sets scanned by this model.
    pub fn beam_sets(&self) -> &'static [BeamSet] {
        match self.kind {
            SensorKind::Uniform64 => &[BeamSet::Uniform],
            SensorKind::DualVelodyne => &[BeamSet::DualUpper, BeamSet::DualLower],
            SensorKind::DepthSampled => &[BeamSet::Depth],
        }
    }

    pub fn block(&self, set: BeamSet) -> &BeamBlock {
        match set {
            BeamSet::Uniform | BeamSet::Depth => &self.uniform,
            BeamSet::DualUpper => &self.dual.upper,
            BeamSet::DualLower => &self.dual.lower,
        }
    }

    /// First global channel index of a block (dual lower channels follow the
    /// upper ones).
    pub fn channel_base(&self, set: BeamSet) -> u16 {
        match set {
            BeamSet::DualLower => self.dual.upper.channels,
            _ => 0,
        }
    }
}

/// Number of azimuth columns for a step; the step must divide 360°.
pub fn azimuth_columns(step_deg: f64) -> Result<u32> {
    if !(step_deg > 0.0) || !step_deg.is_finite() {
        return Err(Error::Config(format!("azimuth step {step_deg} must be positive")));
    }
    let n = 360.0 / step_deg;
    let r = n.round();
    if (n - r).abs() > 1e-6 * n.max(1.0) || r < 1.0 {
        return Err(Error::Config(format!("azimuth step {step_deg}° does not divide 360°")));
    }
    Ok(r as u32)
}

/// Unit direction in the sensor frame (x forward, y left, z up).
pub fn direction(elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    Vec3::new(ce * ca, ce * sa, se)
}

/// Rays of one beam block in canonical order (channel-major, azimuth-minor),
/// sensor frame.
pub fn block_rays(block: &BeamBlock, channel_base: u16, azimuth_step_deg: f64) -> Result<Vec<Ray>> {
    let cols = azimuth_columns(azimuth_step_deg)?;
    let origin = Vec3::from(block.optical_center_offset);
    let mut rays = Vec::with_capacity(block.channels as usize * cols as usize);
    for (c, elev) in block.elevations_deg().into_iter().enumerate() {
        for a in 0..cols {
            rays.push(Ray {
                origin,
                direction: direction(elev, a as f64 * azimuth_step_deg),
                channel: channel_base + c as u16,
                azimuth: a,
            });
        }
    }
    Ok(rays)
}

/// Ray directions for a sensor model, sensor frame, canonical order. The
/// depth-sampled kind samples the `Uniform64` pattern.
pub fn gen_scan_pattern(model: &SensorModel) -> Result<Vec<Ray>> {
    azimuth_columns(model.azimuth_step_deg)?;
    let mut rays = Vec::new();
    for &set in model.beam_sets() {
        rays.extend(block_rays(
            model.block(set),
            model.channel_base(set),
            model.azimuth_step_deg,
        )?);
    }
    Ok(rays)
}

/// Perturbs pitch, roll, yaw and height with zero-mean Gaussian draws.
/// Zero sigmas leave the corresponding component untouched.
pub fn randomize_sensor_pose(base: &Pose, noise: &PoseNoise, seed: u64) -> Pose {
    let mut rng = seed::rng(seed);
    let mut draw = |sigma: f64| -> f64 {
        // always consume one draw so each component has a fixed stream slot
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        if sigma > 0.0 {
            z * sigma
        } else {
            0.0
        }
    };
    let pitch = draw(noise.pitch_sigma_deg.to_radians());
    let roll = draw(noise.roll_sigma_deg.to_radians());
    let yaw = draw(noise.yaw_sigma_deg.to_radians());
    let z = draw(noise.z_sigma_m);
    let mut pose = *base;
    pose.pitch += pitch;
    pose.roll += roll;
    pose.yaw += yaw;
    pose.translation.z += z;
    pose
}
