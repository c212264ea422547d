use std::path::Path;

use crate::error::{Error, Result};

/// One velodyne record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointXYZI {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub intensity: f32,
}

pub fn encode_pointcloud(points: &[PointXYZI]) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * 16);
    for p in points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_pointcloud(bytes: &[u8], path: &Path) -> Result<Vec<PointXYZI>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::format(
            path,
            format!("length {} is not a multiple of 16", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let f = |k: usize| f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().expect("4 bytes"));
            PointXYZI {
                x: f(0),
                y: f(1),
                z: f(2),
                intensity: f(3),
            }
        })
        .collect())
}

pub fn write_pointcloud(points: &[PointXYZI], path: &Path) -> Result<()> {
    super::write_atomic(path, &encode_pointcloud(points))
}

pub fn read_pointcloud(path: &Path) -> Result<Vec<PointXYZI>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pointcloud(&bytes, path)
}
