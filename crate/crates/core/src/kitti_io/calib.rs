//! `calib/NNNNNN.txt` blocks and the velodyne/camera transforms.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Matrix3x4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Camera image size of the label geometry, pixels.
pub const IMAGE_WIDTH: f64 = 1242.0;
pub const IMAGE_HEIGHT: f64 = 375.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibBlock {
    pub p: [Matrix3x4<f64>; 4],
    pub r0_rect: Matrix3<f64>,
    pub tr_velo_to_cam: Matrix3x4<f64>,
    pub tr_imu_to_velo: Matrix3x4<f64>,
}

fn projection(f: f64, cx: f64, cy: f64, t: [f64; 3]) -> Matrix3x4<f64> {
    Matrix3x4::new(f, 0.0, cx, t[0], 0.0, f, cy, t[1], 0.0, 0.0, 1.0, t[2])
}

impl Default for CalibBlock {
    /// KITTI-like rig: camera 0.08 m below and 0.27 m behind the velodyne,
    /// axes permuted from forward-left-up to right-down-forward.
    fn default() -> Self {
        let (f, cx, cy) = (721.5377, 609.5593, 172.854);
        CalibBlock {
            p: [
                projection(f, cx, cy, [0.0, 0.0, 0.0]),
                projection(f, cx, cy, [-387.5744, 0.0, 0.0]),
                projection(f, cx, cy, [44.85728, 0.2163791, 0.002745884]),
                projection(f, cx, cy, [-339.5242, 2.199936, 0.002729905]),
            ],
            r0_rect: Matrix3::identity(),
            tr_velo_to_cam: Matrix3x4::new(
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, -0.08, //
                1.0, 0.0, 0.0, -0.27,
            ),
            tr_imu_to_velo: Matrix3x4::new(
                1.0, 0.0, 0.0, -0.81, //
                0.0, 1.0, 0.0, 0.32, //
                0.0, 0.0, 1.0, -0.8,
            ),
        }
    }
}

fn rigid_parts(m: &Matrix3x4<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    (m.fixed_view::<3, 3>(0, 0).into_owned(), m.column(3).into_owned())
}

fn write_row(out: &mut String, key: &str, values: impl Iterator<Item = f64>) {
    out.push_str(key);
    out.push(':');
    for v in values {
        out.push(' ');
        push_sci(out, v);
    }
    out.push('\n');
}

/// `%.12e` in C notation: mantissa with 12 decimals, signed two-digit
/// exponent.
fn push_sci(out: &mut String, v: f64) {
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    let _ = write!(out, "{mant}e{sign}{:02}", exp.abs());
}

fn row_major<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> impl Iterator<Item = f64> + '_ {
    (0..R).flat_map(move |r| (0..C).map(move |c| m[(r, c)]))
}

impl CalibBlock {
    pub fn validate(&self) -> Result<()> {
        let finite = self.p.iter().all(|m| m.iter().all(|v| v.is_finite()))
            && self.r0_rect.iter().all(|v| v.is_finite())
            && self.tr_velo_to_cam.iter().all(|v| v.is_finite())
            && self.tr_imu_to_velo.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("calibration has non-finite entries".into()));
        }
        let (r, _) = rigid_parts(&self.tr_velo_to_cam);
        if (r.transpose() * r - Matrix3::identity()).abs().max() > 1e-6 || (r.determinant() - 1.0).abs() > 1e-6 {
            return Err(Error::Config("Tr_velo_to_cam is not a rigid transform".into()));
        }
        Ok(())
    }

    /// Velodyne point to the rectified camera frame.
    pub fn velo_to_cam(&self, p: &Vec3) -> Vec3 {
        let (r, t) = rigid_parts(&self.tr_velo_to_cam);
        self.r0_rect * (r * p + t)
    }

    pub fn velo_to_cam_vector(&self, v: &Vec3) -> Vec3 {
        let (r, _) = rigid_parts(&self.tr_velo_to_cam);
        self.r0_rect * (r * v)
    }

    /// Rectified camera point back to the velodyne frame.
    pub fn cam_to_velo(&self, p: &Vec3) -> Vec3 {
        let (r, t) = rigid_parts(&self.tr_velo_to_cam);
        let unrect = self.r0_rect.try_inverse().unwrap_or_else(Matrix3::identity) * p;
        r.transpose() * (unrect - t)
    }

    /// Pixel coordinates of a rectified camera point through P2; `None` at or
    /// behind the image plane.
    pub fn project(&self, p: &Vec3) -> Option<[f64; 2]> {
        let q = self.p[2] * p.push(1.0);
        if q.z <= 1e-9 {
            return None;
        }
        Some([q.x / q.z, q.y / q.z])
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.p.iter().enumerate() {
            write_row(&mut out, &format!("P{i}"), row_major(m));
        }
        write_row(&mut out, "R0_rect", row_major(&self.r0_rect));
        write_row(&mut out, "Tr_velo_to_cam", row_major(&self.tr_velo_to_cam));
        write_row(&mut out, "Tr_imu_to_velo", row_major(&self.tr_imu_to_velo));
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut rows: Vec<(String, Vec<f64>, usize)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |detail: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                detail,
            };
            let (key, rest) = line.split_once(':').ok_or_else(|| parse_err("missing ':'".into()))?;
            let values = rest
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(format!("bad number {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push((key.trim().to_string(), values, i + 1));
        }
        let take = |key: &str, n: usize| -> Result<Vec<f64>> {
            let (_, v, line) = rows
                .iter()
                .find(|(k, _, _)| k == key)
                .ok_or_else(|| Error::format(path, format!("missing {key}")))?;
            if v.len() != n {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: *line,
                    detail: format!("{key} needs {n} values, found {}", v.len()),
                });
            }
            Ok(v.clone())
        };
        let m34 = |v: Vec<f64>| Matrix3x4::from_row_slice(&v);
        let calib = CalibBlock {
            p: [
                m34(take("P0", 12)?),
                m34(take("P1", 12)?),
                m34(take("P2", 12)?),
                m34(take("P3", 12)?),
            ],
            r0_rect: Matrix3::from_row_slice(&take("R0_rect", 9)?),
            tr_velo_to_cam: m34(take("Tr_velo_to_cam", 12)?),
            tr_imu_to_velo: m34(take("Tr_imu_to_velo", 12)?),
        };
        calib.validate().map_err(|e| Error::format(path, e.to_string()))?;
        Ok(calib)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CalibBlock::from_text(&text, path)
    }
}
