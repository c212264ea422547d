use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Box3D, Vec3};

/// Reduction `a + b·d` for one box dimension, where `d` is the gap between
/// the box and the extent of the points inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisShrink {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShrinkParams {
    pub length: AxisShrink,
    pub width: AxisShrink,
    pub height: AxisShrink,
    /// Lift applied to the raw box before collecting points, so ground
    /// returns under the vehicle stay outside.
    pub upward_shift: f64,
}

impl Default for ShrinkParams {
    fn default() -> Self {
        ShrinkParams {
            length: AxisShrink { a: 0.2, b: 0.25 },
            width: AxisShrink { a: 0.05, b: 0.25 },
            height: AxisShrink { a: 0.05, b: 0.05 },
            upward_shift: 0.05,
        }
    }
}

impl ShrinkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("length", self.length), ("width", self.width), ("height", self.height)] {
            if !(s.a >= 0.0 && s.a.is_finite() && (0.0..1.0).contains(&s.b)) {
                return Err(Error::range("shrink", format!("{name}: need a >= 0 and b in [0, 1)")));
            }
        }
        if !(self.upward_shift >= 0.0 && self.upward_shift.is_finite()) {
            return Err(Error::range("upward_shift", "must be >= 0"));
        }
        Ok(())
    }

    fn axes(&self) -> [AxisShrink; 3] {
        [self.length, self.width, self.height]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkOutcome {
    pub boxed: Box3D,
    /// No points were inside; `boxed` is the input box.
    pub empty: bool,
}

/// Raises a box by `shift` without changing its size.
pub fn shift_up(b: &Box3D, shift: f64) -> Box3D {
    Box3D {
        center: b.center + Vec3::new(0.0, 0.0, shift),
        ..*b
    }
}

pub fn points_in_box(b: &Box3D, points: impl IntoIterator<Item = Vec3>) -> Vec<Vec3> {
    points.into_iter().filter(|p| b.contains(p, 0.0)).collect()
}

/// Shrinks `b` towards the points inside it.
///
/// Per axis the new size is `dims - (a + b·d)` with `d = dims - extent`,
/// never smaller than the point extent. Length and width are recentered on
/// the middle of the point extent; the bottom moves to the lowest point.
pub fn shrink_box(b: &Box3D, points_inside: &[Vec3], params: &ShrinkParams) -> ShrinkOutcome {
    if points_inside.is_empty() {
        return ShrinkOutcome { boxed: *b, empty: true };
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points_inside {
        let l = b.to_local(p);
        lo = lo.inf(&l);
        hi = hi.sup(&l);
    }
    let extent = hi - lo;
    let mut dims = b.dims;
    for (k, s) in params.axes().iter().enumerate() {
        let d = (b.dims[k] - extent[k]).max(0.0);
        dims[k] = (b.dims[k] - (s.a + s.b * d)).max(extent[k]);
    }
    // degenerate extents (a single point) would give a zero-size box
    dims = dims.map(|v| v.max(1e-3));
    let local_center = Vec3::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y), lo.z + 0.5 * dims.z);
    ShrinkOutcome {
        boxed: Box3D {
            center: b.from_local(&local_center),
            dims,
            yaw: b.yaw,
        },
        empty: false,
    }
}
