//! End-to-end runs over a tiny dataset.

use std::path::Path;

use synthlidar::eval::{EvalConfig, Metric};
use synthlidar::kitti_io::{
    read_label, read_pointcloud, read_split, validate_dataset, write_label, DatasetLayout, Split,
};
use synthlidar::labels::Difficulty;
use synthlidar::pipeline::{
    cmd_evaluate, cmd_generate, cmd_intensity_histogram, cmd_process, cmd_stats, PipelineConfig,
};
use synthlidar::presets::{Preset, PRESET_NAMES};
use synthlidar::{Error, Executor};

fn generate(root: &Path, frames: u64) -> PipelineConfig {
    let cfg = PipelineConfig {
        frame_count: frames,
        seed: 21,
        ..PipelineConfig::default()
    };
    let s = cmd_generate(&cfg, root, &Executor::available()).unwrap();
    assert_eq!(s.generated, frames);
    cfg
}

#[test]
fn every_preset_produces_a_valid_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let dense = tmp.path().join("dense_root");
    let cfg = generate(&dense, 3);
    let again = cmd_generate(&cfg, &dense, &Executor::available()).unwrap();
    assert_eq!((again.generated, again.skipped), (0, 3));
    for name in PRESET_NAMES {
        let out = tmp.path().join(name);
        let preset = Preset::builtin(name).unwrap();
        let s = cmd_process(&dense, &out, &preset, &cfg, &Executor::available()).unwrap();
        assert_eq!(s.frames, 3, "{name}");
        assert!(s.points > 1000, "{name}: {} points", s.points);
        let set = validate_dataset(&out).unwrap();
        assert_eq!(set.train.len() + set.val.len(), 3);
        let layout = DatasetLayout::new(&out);
        for id in 0..3 {
            let pts = read_pointcloud(&layout.velodyne(id)).unwrap();
            if name != "intensity" {
                assert!(pts.iter().all(|p| p.intensity == 0.0), "{name}");
            } else {
                assert!(pts.iter().any(|p| p.intensity > 0.0));
            }
            for l in read_label(&layout.label(id)).unwrap() {
                assert_eq!(l.class, "Car");
                assert!(l.dims.iter().all(|d| *d > 0.0));
                assert!(l.bbox[0] <= l.bbox[2] && l.bbox[1] <= l.bbox[3]);
            }
        }
    }
}

#[test]
fn ground_truth_scores_itself_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("ds");
    let cfg = generate(&root, 4);
    cmd_process(
        &root,
        &root,
        &Preset::builtin("strongest").unwrap(),
        &cfg,
        &Executor::sequential(),
    )
    .unwrap();
    let layout = DatasetLayout::new(&root);
    let val = read_split(&layout.split(Split::Val)).unwrap();
    let det = tmp.path().join("det");
    std::fs::create_dir_all(&det).unwrap();
    for &id in &val {
        let mut labels = read_label(&layout.label(id)).unwrap();
        for l in &mut labels {
            l.score = Some(0.5);
        }
        write_label(&labels, &det.join(format!("{id:06}.txt"))).unwrap();
    }
    let out = tmp.path().join("report");
    let report = cmd_evaluate(&root, &det, Some(&out), &EvalConfig::default(), &Executor::sequential()).unwrap();
    let mut seen = 0;
    for m in Metric::ALL {
        for d in Difficulty::EVALUATED {
            if let Some(v) = report.get(m, d) {
                assert!((v - 100.0).abs() < 1e-9, "{m:?} {d:?}: {v}");
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
    assert!(out.join("report.txt").is_file() && out.join("report.csv").is_file());

    std::fs::remove_file(det.join(format!("{:06}.txt", val[0]))).unwrap();
    let err = cmd_evaluate(&root, &det, None, &EvalConfig::default(), &Executor::sequential()).unwrap_err();
    assert!(matches!(err, Error::MissingFrames { .. }));
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn stats_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("ds");
    let cfg = generate(&root, 2);
    cmd_process(
        &root,
        &root,
        &Preset::builtin("intensity").unwrap(),
        &cfg,
        &Executor::available(),
    )
    .unwrap();
    let out = tmp.path().join("stats");
    let s = cmd_stats(&root, &out).unwrap();
    assert_eq!(s.frames, 2);
    assert!(s.intensity_mean.unwrap() > 0.0);
    for f in [
        "boxes_bev.csv",
        "boxes_side.csv",
        "difficulty_counts.csv",
        "intensity_histogram.csv",
        "summary.csv",
        "boxes_bev.svg",
        "boxes_side.svg",
        "intensity_histogram.svg",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let hist = cmd_intensity_histogram(&root, 10).unwrap();
    let total: u64 = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, s.points);

    let empty = tmp.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let s = cmd_stats(&empty, &tmp.path().join("empty_stats")).unwrap();
    assert_eq!((s.frames, s.points), (0, 0));
    assert!(s.intensity_mean.is_none());
}

#[test]
fn process_without_dense_frames_fails() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(tmp.path().join("dense")).unwrap();
    let err = cmd_process(
        tmp.path(),
        &tmp.path().join("out"),
        &Preset::builtin("dual").unwrap(),
        &PipelineConfig::default(),
        &Executor::sequential(),
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn corrupt_dense_frame_is_reported_with_its_id() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let cfg = generate(root, 1);
    let layout = DatasetLayout::new(root);
    std::fs::write(layout.dense(0), b"not a dense frame").unwrap();
    let err = cmd_process(
        root,
        &root.join("out"),
        &Preset::builtin("dual").unwrap(),
        &cfg,
        &Executor::sequential(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Frame { frame_id: 0, .. }), "{err}");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn example_config_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/pipeline.toml");
    assert_eq!(PipelineConfig::load(&path).unwrap(), PipelineConfig::default());
}
