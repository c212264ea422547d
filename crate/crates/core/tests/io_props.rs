//! File format round trips.

use proptest::prelude::*;
use std::path::Path;
use synthlidar::kitti_io::{
    decode_dense_frame, decode_pointcloud, encode_dense_frame, encode_pointcloud, format_label_line, parse_label_text,
    validate_dataset, write_split, CalibBlock, DatasetLayout, PointXYZI, Split,
};
use synthlidar::labels::LabelRecord;
use synthlidar::raycast::DenseFrame;
use synthlidar::Error;

fn label() -> impl Strategy<Value = LabelRecord> {
    (
        prop::sample::select(vec!["Car", "Van", "Pedestrian", "DontCare"]),
        0.0..1.0f64,
        -1i8..=3,
        -3.1..3.1f64,
        prop::array::uniform4(0.0..1242.0f64),
        prop::array::uniform3(0.3..10.0f64),
        (-50.0..50.0f64, -3.0..3.0f64, 0.0..90.0f64),
        -3.1..3.1f64,
        prop::option::of(0.0..1.0f64),
    )
        .prop_map(|(c, t, o, a, bb, d, loc, ry, s)| LabelRecord {
            class: c.into(),
            truncation: t,
            occlusion: o,
            alpha: a,
            bbox: bb,
            dims: d,
            location: [loc.0, loc.1, loc.2],
            rotation_y: ry,
            score: s,
        })
}

proptest! {
    #[test]
    fn pointcloud_round_trip(v in prop::collection::vec(prop::array::uniform4(-1e3f32..1e3), 0..200)) {
        let pts: Vec<PointXYZI> = v.iter().map(|a| PointXYZI { x: a[0], y: a[1], z: a[2], intensity: a[3] }).collect();
        let bytes = encode_pointcloud(&pts);
        prop_assert_eq!(bytes.len(), 16 * pts.len());
        prop_assert_eq!(decode_pointcloud(&bytes, Path::new("x")).unwrap(), pts);
    }

    #[test]
    fn label_text_is_stable(ls in prop::collection::vec(label(), 0..10)) {
        let text: String = ls.iter().map(|l| format_label_line(l) + "\n").collect();
        let back = parse_label_text(&text, Path::new("x")).unwrap();
        prop_assert_eq!(back.len(), ls.len());
        let again: String = back.iter().map(|l| format_label_line(l) + "\n").collect();
        prop_assert_eq!(again, text);
        for (a, b) in ls.iter().zip(&back) {
            prop_assert!((a.location[2] - b.location[2]).abs() <= 0.005 + 1e-9);
            prop_assert_eq!(a.score.is_some(), b.score.is_some());
        }
    }

    #[test]
    fn truncated_pointcloud_rejected(n in 1usize..50, cut in 1usize..16) {
        let bytes = vec![0u8; 16 * n - cut];
        let bad = matches!(decode_pointcloud(&bytes, Path::new("x")), Err(Error::Format { .. }));
        prop_assert!(bad);
    }
}

#[test]
fn dense_rejects_garbage() {
    let f = DenseFrame::new(3, Default::default(), 0.09, &synthlidar::scene::Scene::empty(0));
    let bytes = encode_dense_frame(&f);
    assert_eq!(decode_dense_frame(&bytes, Path::new("x")).unwrap(), f);
    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert!(matches!(
        decode_dense_frame(&bad, Path::new("x")),
        Err(Error::Incompatible { .. })
    ));
    assert!(matches!(
        decode_dense_frame(&bytes[..bytes.len() - 1], Path::new("x")),
        Err(Error::Format { .. })
    ));
    let mut long = bytes;
    long.push(0);
    assert!(matches!(
        decode_dense_frame(&long, Path::new("x")),
        Err(Error::Format { .. })
    ));
}

#[test]
fn calib_text_round_trip() {
    let c = CalibBlock::default();
    let text = c.to_text();
    let back = CalibBlock::from_text(&text, Path::new("c")).unwrap();
    assert_eq!(back.to_text(), text);
    assert!(CalibBlock::from_text("P0: 1 2 3\n", Path::new("c")).is_err());
}

#[test]
fn dataset_validation_reports_missing_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let layout = DatasetLayout::new(tmp.path());
    layout.create_kitti_dirs().unwrap();
    write_split(&[0, 1], &layout.split(Split::Train)).unwrap();
    write_split(&[2], &layout.split(Split::Val)).unwrap();
    match validate_dataset(tmp.path()) {
        Err(Error::MissingFrames { missing }) => assert!(!missing.is_empty()),
        other => panic!("{other:?}"),
    }
}
