//! Dense frame container. All values little-endian.
//!
//! ```text
//! header (80 bytes)
//!   0  magic "LDNS"         4  version u16        6  reserved u16
//!   8  frame_id u64        16  azimuth_step f64
//!  24  pose tx ty tz yaw pitch roll (f64 each)
//!  72  actor_count u32     76  point_count u32
//! actor (84 bytes)
//!   id u32, kind u8, pad[3], center 3×f64, dims 3×f64, yaw f64,
//!   reflectivity f64, brightness f64, visible_points u32
//! point (8 + 37 or 8 + 74 bytes)
//!   beam_set u8, flags u8 (bit 0: separate last return), channel u16,
//!   azimuth u32, first hit, [last hit]
//! hit (37 bytes)
//!   point 3×f32, range f32, normal 3×f32, grayscale f32,
//!   actor u32 (u32::MAX for none), material u8
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Box3D, Pose, Vec3};
use crate::raycast::{ActorSummary, BeamSet, DenseFrame, DenseHit, DensePoint};
use crate::scene::{ActorKind, MaterialKind};

pub const DENSE_MAGIC: [u8; 4] = *b"LDNS";
pub const DENSE_VERSION: u16 = 1;

const HEADER_LEN: usize = 80;
const ACTOR_LEN: usize = 84;
const HIT_LEN: usize = 37;
const NO_ACTOR: u32 = u32::MAX;

fn put_hit(out: &mut Vec<u8>, h: &DenseHit) {
    for v in h
        .point
        .iter()
        .chain([h.range].iter())
        .chain(h.normal.iter())
        .chain([h.grayscale].iter())
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&h.actor_id.unwrap_or(NO_ACTOR).to_le_bytes());
    out.push(h.material as u8);
}

pub fn encode_dense_frame(frame: &DenseFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + frame.actors.len() * ACTOR_LEN + frame.points.len() * 50);
    out.extend_from_slice(&DENSE_MAGIC);
    out.extend_from_slice(&DENSE_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&frame.frame_id.to_le_bytes());
    let pose = &frame.sensor_pose;
    for v in [
        frame.azimuth_step_deg,
        pose.translation.x,
        pose.translation.y,
        pose.translation.z,
        pose.yaw,
        pose.pitch,
        pose.roll,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(frame.actors.len() as u32).to_le_bytes());
    out.extend_from_slice(&(frame.points.len() as u32).to_le_bytes());

    for a in &frame.actors {
        out.extend_from_slice(&a.id.to_le_bytes());
        out.extend_from_slice(&[a.kind as u8, 0, 0, 0]);
        let b = &a.world_box;
        for v in [
            b.center.x,
            b.center.y,
            b.center.z,
            b.dims.x,
            b.dims.y,
            b.dims.z,
            b.yaw,
            a.reflectivity_scale,
            a.brightness_scale,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&a.visible_points.to_le_bytes());
    }

    let mut first = Vec::with_capacity(HIT_LEN);
    let mut last = Vec::with_capacity(HIT_LEN);
    for p in &frame.points {
        first.clear();
        last.clear();
        put_hit(&mut first, &p.first);
        put_hit(&mut last, &p.last);
        let separate = first != last;
        out.push(p.beam_set as u8);
        out.push(separate as u8);
        out.extend_from_slice(&p.channel.to_le_bytes());
        out.extend_from_slice(&p.azimuth.to_le_bytes());
        out.extend_from_slice(&first);
        if separate {
            out.extend_from_slice(&last);
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(self.path, format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn bad(&self, detail: String) -> Error {
        Error::format(self.path, format!("{detail} at byte {}", self.pos))
    }

    fn hit(&mut self) -> Result<DenseHit> {
        let point = [self.f32()?, self.f32()?, self.f32()?];
        let range = self.f32()?;
        let normal = [self.f32()?, self.f32()?, self.f32()?];
        let grayscale = self.f32()?;
        let actor = self.u32()?;
        let m = self.u8()?;
        let material = MaterialKind::from_u8(m).ok_or_else(|| self.bad(format!("unknown material {m}")))?;
        Ok(DenseHit {
            point,
            range,
            normal,
            grayscale,
            actor_id: (actor != NO_ACTOR).then_some(actor),
            material,
        })
    }
}

pub fn decode_dense_frame(bytes: &[u8], path: &Path) -> Result<DenseFrame> {
    let mut r = Reader { bytes, pos: 0, path };
    if r.take(4)? != DENSE_MAGIC {
        return Err(Error::Incompatible {
            path: path.to_path_buf(),
            detail: "not a dense frame (bad magic)".into(),
        });
    }
    let version = r.u16()?;
    if version != DENSE_VERSION {
        return Err(Error::Incompatible {
            path: path.to_path_buf(),
            detail: format!("dense format version {version}, expected {DENSE_VERSION}"),
        });
    }
    r.u16()?;
    let frame_id = r.u64()?;
    let azimuth_step_deg = r.f64()?;
    let translation = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
    let sensor_pose = Pose {
        translation,
        yaw: r.f64()?,
        pitch: r.f64()?,
        roll: r.f64()?,
    };
    let actor_count = r.u32()? as usize;
    let point_count = r.u32()? as usize;
    if actor_count.saturating_mul(ACTOR_LEN) > bytes.len() || point_count.saturating_mul(8 + HIT_LEN) > bytes.len() {
        return Err(r.bad("counts exceed file size".into()));
    }

    let mut actors = Vec::with_capacity(actor_count);
    for _ in 0..actor_count {
        let id = r.u32()?;
        let k = r.take(4)?[0];
        let kind = ActorKind::from_u8(k).ok_or_else(|| r.bad(format!("unknown actor kind {k}")))?;
        let center = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
        let dims = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
        let yaw = r.f64()?;
        let world_box = Box3D::new(center, dims, yaw).map_err(|e| r.bad(e.to_string()))?;
        actors.push(ActorSummary {
            id,
            kind,
            world_box,
            reflectivity_scale: r.f64()?,
            brightness_scale: r.f64()?,
            visible_points: r.u32()?,
        });
    }

    let mut points = Vec::with_capacity(point_count);
    for _ in 0..point_count {
        let s = r.u8()?;
        let beam_set = BeamSet::from_u8(s).ok_or_else(|| r.bad(format!("unknown beam set {s}")))?;
        let flags = r.u8()?;
        if flags > 1 {
            return Err(r.bad(format!("unknown point flags {flags:#x}")));
        }
        let channel = r.u16()?;
        let azimuth = r.u32()?;
        let first = r.hit()?;
        let last = if flags & 1 == 1 { r.hit()? } else { first };
        points.push(DensePoint {
            beam_set,
            channel,
            azimuth,
            first,
            last,
        });
    }
    if r.pos != bytes.len() {
        return Err(r.bad(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(DenseFrame {
        frame_id,
        sensor_pose,
        azimuth_step_deg,
        actors,
        points,
    })
}

pub fn write_dense_frame(frame: &DenseFrame, path: &Path) -> Result<()> {
    super::write_atomic(path, &encode_dense_frame(frame))
}

pub fn read_dense_frame(path: &Path) -> Result<DenseFrame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dense_frame(&bytes, path)
}
