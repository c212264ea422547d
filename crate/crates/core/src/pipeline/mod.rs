//! The dataset stages: `generate` scans randomized scenes into dense
//! frames, `process` turns dense frames into a KITTI dataset for one preset,
//! `evaluate` scores detections and `stats` summarizes a dataset.
//!
//! Every frame draws its randomness from seeds derived from the master seed
//! and the frame id, so frames can be produced in any order, by any number
//! of workers, and regenerated individually.

mod evaluate;
mod stats;

pub use evaluate::{cmd_evaluate, load_label_dir};
pub use stats::{cmd_intensity_histogram, cmd_stats, StatsSummary};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::kitti_io::{
    read_dense_frame, write_dense_frame, write_label, write_pointcloud, write_split, CalibBlock, DatasetLayout,
    PointXYZI, Split,
};
use crate::labels::{frame_labels, LabelRecord};
use crate::par::Executor;
use crate::presets::{HitSelection, Preset};
use crate::raycast::{randomize_sensor_pose, BeamSet, DenseFrame, Scanner, SensorModel};
use crate::scene::{randomize_scene, RandomizationConfig};
use crate::seed::{self, stage};
use crate::shading::{apply_range_noise, apply_raydrop, quantize_intensity, shade_frame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub frame_count: u64,
    /// Share of frames in the training split.
    pub split_ratio: f64,
    pub seed: u64,
    /// Preset name or path used by `process`.
    pub preset: String,
    /// Azimuth step of the dense scan, degrees.
    pub dense_azimuth_step_deg: f64,
    /// Sensor height above the ground, meters.
    pub sensor_height: f64,
    pub scene: RandomizationConfig,
    pub sensor: SensorModel,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            frame_count: 15000,
            split_ratio: 0.5,
            seed: 0,
            preset: "intensity".into(),
            dense_azimuth_step_deg: 0.09,
            sensor_height: 1.73,
            scene: RandomizationConfig::default(),
            sensor: SensorModel::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(Error::range("frame_count", "must be positive"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::range(
                "split_ratio",
                format!("{} not in (0, 1)", self.split_ratio),
            ));
        }
        if !(self.sensor_height > 0.0 && self.sensor_height.is_finite()) {
            return Err(Error::range("sensor_height", "must be positive"));
        }
        crate::raycast::azimuth_columns(self.dense_azimuth_step_deg)?;
        self.scene.validate()?;
        self.sensor.validate()?;
        Preset::resolve(&self.preset)?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(format!("pipeline: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::from_toml(&text)
    }

    pub fn base_pose(&self) -> Pose {
        Pose::from_translation_yaw(Vec3::new(0.0, 0.0, self.sensor_height), 0.0)
    }
}

/// Train and val ids for frames `ids` (ascending): the first
/// `round(n·ratio)` go to training.
pub fn split_ids(ids: &[u64], ratio: f64) -> (Vec<u64>, Vec<u64>) {
    let n_train = ((ids.len() as f64 * ratio).round() as usize).min(ids.len());
    (ids[..n_train].to_vec(), ids[n_train..].to_vec())
}

/// Scans one frame with every beam set at the dense step.
pub fn generate_frame(cfg: &PipelineConfig, frame_id: u64, exec: &Executor) -> Result<DenseFrame> {
    let scene = randomize_scene(&cfg.scene, seed::derive(cfg.seed, &[frame_id, stage::SCENE]))?;
    let pose = randomize_sensor_pose(
        &cfg.base_pose(),
        &cfg.sensor.pose_randomization,
        seed::derive(cfg.seed, &[frame_id, stage::POSE]),
    );
    let scanner = Scanner::new(&scene)?;
    scanner.scan_sets(
        &cfg.sensor,
        &BeamSet::ALL,
        cfg.dense_azimuth_step_deg,
        &pose,
        frame_id,
        exec,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerateSummary {
    pub generated: u64,
    pub skipped: u64,
}

/// Writes `dense/NNNNNN.df` for frames `0..frame_count` plus the split
/// lists. Frames whose file already exists are skipped.
pub fn cmd_generate(cfg: &PipelineConfig, out: &Path, exec: &Executor) -> Result<GenerateSummary> {
    cfg.validate()?;
    let layout = DatasetLayout::new(out);
    layout.create_dense_dir()?;
    let ids: Vec<u64> = (0..cfg.frame_count).collect();
    let pending: Vec<u64> = ids.iter().copied().filter(|id| !layout.dense(*id).is_file()).collect();
    let inner = Executor::sequential();
    exec.try_for_each(pending.len(), |k| {
        let id = pending[k];
        let frame = generate_frame(cfg, id, &inner).map_err(|e| e.in_frame(id))?;
        write_dense_frame(&frame, &layout.dense(id)).map_err(|e| e.in_frame(id))
    })?;
    write_splits(&layout, &ids, cfg.split_ratio)?;
    Ok(GenerateSummary {
        generated: pending.len() as u64,
        skipped: (ids.len() - pending.len()) as u64,
    })
}

fn write_splits(layout: &DatasetLayout, ids: &[u64], ratio: f64) -> Result<()> {
    let dir = layout.root.join("ImageSets");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let (train, val) = split_ids(ids, ratio);
    write_split(&train, &layout.split(Split::Train))?;
    write_split(&val, &layout.split(Split::Val))
}

/// A processed frame ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedFrame {
    pub points: Vec<PointXYZI>,
    /// Modeled intensities of the written points, when the preset shades.
    pub intensity: Option<Vec<f64>>,
    pub labels: Vec<LabelRecord>,
}

/// Applies a preset to one dense frame. `seed` is the master seed; shading
/// and noise seeds derive from it and the frame id only, so presets sharing
/// a chain draw identical randomness.
pub fn process_frame(
    dense: &DenseFrame,
    preset: &Preset,
    calib: &CalibBlock,
    seed: u64,
    exec: &Executor,
) -> Result<ProcessedFrame> {
    let ratio = preset.azimuth_step_deg / dense.azimuth_step_deg;
    let decimation = ratio.round();
    if decimation < 1.0 || (ratio - decimation).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "preset step {}° is not a multiple of the dense step {}°",
            preset.azimuth_step_deg, dense.azimuth_step_deg
        )));
    }
    let mut frame = dense.select(&preset.beam_sets, decimation as u32, preset.hit == HitSelection::First);
    let id = dense.frame_id;
    if preset.range_noise {
        frame = apply_range_noise(
            &frame,
            preset.shading.noise_sigma,
            seed::derive(seed, &[id, stage::NOISE]),
            exec,
        );
    }
    let mut intensity = None;
    if preset.shade {
        let mut shaded = shade_frame(&frame, &preset.shading, seed::derive(seed, &[id, stage::SHADING]), exec);
        if preset.raydrop {
            shaded = apply_raydrop(shaded, preset.shading.epsilon);
        }
        shaded = quantize_intensity(shaded, preset.shading.quantization_step);
        let (kept, values) = shaded.into_retained();
        frame = kept;
        intensity = Some(values);
    }
    let labels = frame_labels(&frame, calib, &preset.labels);
    let points = frame
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| PointXYZI {
            x: p.last.point[0],
            y: p.last.point[1],
            z: p.last.point[2],
            intensity: match (&intensity, preset.write_intensity) {
                (Some(v), true) => v[i] as f32,
                _ => 0.0,
            },
        })
        .collect();
    Ok(ProcessedFrame {
        points,
        intensity,
        labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProcessSummary {
    pub frames: u64,
    pub points: u64,
    pub labels: u64,
}

/// Processes every dense frame under `input` into a KITTI dataset at `out`.
pub fn cmd_process(
    input: &Path,
    out: &Path,
    preset: &Preset,
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<ProcessSummary> {
    preset.validate()?;
    let src = DatasetLayout::new(input);
    let ids = src.dense_ids()?;
    if ids.is_empty() {
        return Err(Error::MissingFrames {
            missing: vec![format!("{}/dense/*.df", input.display())],
        });
    }
    let dst = DatasetLayout::new(out);
    dst.create_kitti_dirs()?;
    let calib = CalibBlock::default();
    let inner = Executor::sequential();
    let counts = std::sync::Mutex::new((0u64, 0u64));
    exec.try_for_each(ids.len(), |k| {
        let id = ids[k];
        let run = || -> Result<()> {
            let dense = read_dense_frame(&src.dense(id))?;
            let p = process_frame(&dense, preset, &calib, cfg.seed, &inner)?;
            write_pointcloud(&p.points, &dst.velodyne(id))?;
            write_label(&p.labels, &dst.label(id))?;
            calib.write(&dst.calib(id))?;
            let mut c = counts.lock().expect("counter lock");
            c.0 += p.points.len() as u64;
            c.1 += p.labels.len() as u64;
            Ok(())
        };
        run().map_err(|e| e.in_frame(id))
    })?;
    write_splits(&dst, &ids, cfg.split_ratio)?;
    let (points, labels) = counts.into_inner().expect("counter lock");
    Ok(ProcessSummary {
        frames: ids.len() as u64,
        points,
        labels,
    })
}
