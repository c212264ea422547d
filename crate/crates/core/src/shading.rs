//! Intensity modeling over dense frames.
//!
//! Each point gets a base brightness `B = r1·G + r2` from its grayscale `G`,
//! attenuated by the incidence term `(N·L)^n` with per-point random `r1`,
//! `r2` and `n`. Per-actor brightness and reflectivity scale the result, a
//! global falloff `min(1, (d0/range)^gamma)` darkens distant points, and
//! retro-reflective surfaces are replaced by a bright uniform draw. Gaussian
//! noise is added last and the value clamped to `[0, 1]`.
//!
//! Raydrop then subtracts a small epsilon and removes points that go
//! negative; quantization maps the survivors onto the sensor's intensity
//! grid, which turns the smallest survivors into exact zeros.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Executor;
use crate::raycast::{DenseFrame, DensePoint};
use crate::scene::MaterialKind;
use crate::seed;

pub const R1_BOUNDS: [f64; 2] = [0.25, 0.5];
pub const R2_BOUNDS: [f64; 2] = [0.2, 0.3];
pub const N_BOUNDS: [f64; 2] = [0.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Falloff {
    /// Reference distance in meters; no attenuation closer than this.
    pub d0: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadingParams {
    pub r1_range: [f64; 2],
    pub r2_range: [f64; 2],
    pub n_range: [f64; 2],
    /// `n = lo + (hi - lo)·u^n_shape` for uniform `u`; 1 is uniform, larger
    /// values favor small exponents.
    pub n_shape: f64,
    /// Raydrop offset subtracted from every intensity.
    pub epsilon: f64,
    pub falloff: Falloff,
    /// Grayscale quantile above which a point counts as a brightness peak.
    pub retro_threshold: f64,
    pub retro_intensity_range: [f64; 2],
    /// Standard deviation of the additive intensity noise.
    pub intensity_noise_sigma: f64,
    /// Standard deviation of the along-ray range noise, meters.
    pub noise_sigma: f64,
    /// Intensity resolution of the written point cloud; 0 disables
    /// quantization.
    pub quantization_step: f64,
}

impl Default for ShadingParams {
    fn default() -> Self {
        ShadingParams {
            r1_range: R1_BOUNDS,
            r2_range: R2_BOUNDS,
            n_range: N_BOUNDS,
            n_shape: 12.0,
            epsilon: 0.02,
            falloff: Falloff { d0: 20.0, gamma: 0.5 },
            retro_threshold: 0.995,
            retro_intensity_range: [0.7, 1.0],
            intensity_noise_sigma: 0.03,
            noise_sigma: 0.1,
            quantization_step: 0.01,
        }
    }
}

fn check_range(what: &'static str, r: [f64; 2], bounds: [f64; 2]) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && bounds[0] <= r[0] && r[0] <= r[1] && r[1] <= bounds[1]) {
        return Err(Error::range(what, format!("{r:?} not within {bounds:?}")));
    }
    Ok(())
}

impl ShadingParams {
    pub fn validate(&self) -> Result<()> {
        check_range("r1_range", self.r1_range, R1_BOUNDS)?;
        check_range("r2_range", self.r2_range, R2_BOUNDS)?;
        check_range("n_range", self.n_range, N_BOUNDS)?;
        check_range("retro_intensity_range", self.retro_intensity_range, [0.0, 1.0])?;
        if !(self.n_shape > 0.0 && self.n_shape.is_finite()) {
            return Err(Error::range("n_shape", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::range("epsilon", format!("{} not in (0, 1)", self.epsilon)));
        }
        if !(self.falloff.d0 > 0.0 && self.falloff.gamma >= 0.0 && self.falloff.gamma.is_finite()) {
            return Err(Error::range("falloff", "d0 must be positive and gamma non-negative"));
        }
        if !(0.0..=1.0).contains(&self.retro_threshold) {
            return Err(Error::range("retro_threshold", "must be a quantile in [0, 1]"));
        }
        for (what, v) in [
            ("intensity_noise_sigma", self.intensity_noise_sigma),
            ("noise_sigma", self.noise_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::range(what, format!("{v} must be >= 0")));
            }
        }
        if !(0.0..=0.5).contains(&self.quantization_step) {
            return Err(Error::range("quantization_step", "must be in [0, 0.5]"));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: ShadingParams = toml::from_str(text).map_err(|e| Error::Config(format!("shading: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ShadingParams::from_toml(&text)
    }
}

/// `r1·G + r2`, rejecting coefficients outside their admissible ranges.
pub fn base_brightness(g: f64, r1: f64, r2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::range("grayscale", format!("{g} not in [0, 1]")));
    }
    if !(R1_BOUNDS[0]..=R1_BOUNDS[1]).contains(&r1) {
        return Err(Error::range("r1", format!("{r1} not in {R1_BOUNDS:?}")));
    }
    if !(R2_BOUNDS[0]..=R2_BOUNDS[1]).contains(&r2) {
        return Err(Error::range("r2", format!("{r2} not in {R2_BOUNDS:?}")));
    }
    Ok(r1 * g + r2)
}

/// `B·(N·L)^n` with `N·L` clamped to `[0, 1]` and `0^0 = 1`.
pub fn point_intensity(b: f64, cos_incidence: f64, n: f64) -> f64 {
    // powf already gives 0^0 = 1
    b * cos_incidence.clamp(0.0, 1.0).powf(n)
}

/// Nearest-rank quantile of `values` (need not be sorted).
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).max(1);
    Some(v[rank - 1])
}

/// Flags brightness peaks (grayscale strictly above the `threshold`
/// quantile of the frame) and retro-reflective materials. Uses each
/// point's last return.
pub fn detect_retroreflectors(frame: &DenseFrame, threshold: f64) -> Vec<bool> {
    let gray: Vec<f64> = frame.points.iter().map(|p| p.last.grayscale as f64).collect();
    let Some(peak) = quantile(&gray, threshold) else {
        return Vec::new();
    };
    frame
        .points
        .iter()
        .zip(&gray)
        .map(|(p, &g)| g > peak || p.last.material == MaterialKind::RetroReflective)
        .collect()
}

/// A dense frame with per-point intensity. Dropped points keep their
/// (negative) post-epsilon intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadedFrame {
    pub frame: DenseFrame,
    pub intensity: Vec<f64>,
    pub dropped: Vec<bool>,
}

impl ShadedFrame {
    pub fn retained_count(&self) -> usize {
        self.dropped.iter().filter(|d| !**d).count()
    }

    /// Surviving points with their intensities, in order.
    pub fn retained(&self) -> impl Iterator<Item = (&DensePoint, f64)> + '_ {
        self.frame
            .points
            .iter()
            .zip(&self.intensity)
            .zip(&self.dropped)
            .filter(|(_, d)| !**d)
            .map(|((p, i), _)| (p, *i))
    }

    /// Frame holding only the surviving points.
    pub fn into_retained(self) -> (DenseFrame, Vec<f64>) {
        let mut frame = self.frame;
        let mut intensity = Vec::with_capacity(self.intensity.len());
        let mut points = Vec::with_capacity(frame.points.len());
        for ((p, i), d) in frame.points.iter().zip(&self.intensity).zip(&self.dropped) {
            if !d {
                points.push(*p);
                intensity.push(*i);
            }
        }
        frame.points = points;
        frame.tally_visibility();
        (frame, intensity)
    }
}

fn draw(rng: &mut impl Rng, r: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    r[0] + (r[1] - r[0]) * u
}

/// Computes intensities for every point of `frame` from its last return.
pub fn shade_frame(frame: &DenseFrame, params: &ShadingParams, seed: u64, exec: &Executor) -> ShadedFrame {
    let retro = detect_retroreflectors(frame, params.retro_threshold);
    let index = frame.actor_index();
    let intensity = exec.map_slice(&frame.points, |i, p| {
        let mut rng = seed::item_rng(seed, i as u64);
        let r1 = draw(&mut rng, params.r1_range);
        let r2 = draw(&mut rng, params.r2_range);
        let u: f64 = rng.random();
        let n = params.n_range[0] + (params.n_range[1] - params.n_range[0]) * u.powf(params.n_shape);
        let retro_value = draw(&mut rng, params.retro_intensity_range);
        let noise: f64 = rng.sample(StandardNormal);

        let hit = &p.last;
        let (bright, refl) = hit.actor_id.and_then(|id| index.get(&id)).map_or((1.0, 1.0), |&k| {
            (frame.actors[k].brightness_scale, frame.actors[k].reflectivity_scale)
        });
        let value = if retro[i] {
            retro_value
        } else {
            let pos = hit.position();
            let range = hit.range as f64;
            let cos = if range > 0.0 {
                -hit.normal_vec().dot(&pos) / pos.norm()
            } else {
                1.0
            };
            let g = (hit.grayscale as f64).clamp(0.0, 1.0);
            let b = r1 * g + r2;
            let falloff = if range > params.falloff.d0 {
                (params.falloff.d0 / range).powf(params.falloff.gamma)
            } else {
                1.0
            };
            point_intensity(b, cos, n) * bright * refl * falloff
        };
        (value + params.intensity_noise_sigma * noise).clamp(0.0, 1.0)
    });
    ShadedFrame {
        frame: frame.clone(),
        dropped: vec![false; intensity.len()],
        intensity,
    }
}

/// Subtracts `epsilon` from every surviving intensity; points that become
/// negative are dropped.
pub fn apply_raydrop(mut shaded: ShadedFrame, epsilon: f64) -> ShadedFrame {
    for (i, d) in shaded.intensity.iter_mut().zip(shaded.dropped.iter_mut()) {
        if *d {
            continue;
        }
        *i -= epsilon;
        if *i < 0.0 {
            *d = true;
        }
    }
    shaded
}

/// Rounds surviving intensities to multiples of `step`.
pub fn quantize_intensity(mut shaded: ShadedFrame, step: f64) -> ShadedFrame {
    if step <= 0.0 {
        return shaded;
    }
    for (i, d) in shaded.intensity.iter_mut().zip(&shaded.dropped) {
        if !d {
            *i = ((*i / step).round() * step).min(1.0);
        }
    }
    shaded
}

/// Moves every point along its ray by a zero-mean Gaussian offset with
/// standard deviation `sigma` meters. Both returns share the offset.
pub fn apply_range_noise(frame: &DenseFrame, sigma: f64, seed: u64, exec: &Executor) -> DenseFrame {
    let mut out = frame.clone();
    if sigma == 0.0 {
        return out;
    }
    out.points = exec.map_slice(&frame.points, |i, p| {
        let z: f64 = seed::item_rng(seed, i as u64).sample(StandardNormal);
        let delta = z * sigma;
        let mut q = *p;
        for h in [&mut q.first, &mut q.last] {
            let pos = h.position();
            let norm = pos.norm();
            if norm > 0.0 {
                let moved = pos * ((norm + delta) / norm);
                h.point = [moved.x as f32, moved.y as f32, moved.z as f32];
                h.range = (h.range as f64 + delta) as f32;
            }
        }
        q
    });
    out
}

/// Counts of `values` in `bins` equal-width bins over `[0, 1]`; 1.0 falls
/// into the last bin.
pub fn intensity_histogram(values: &[f64], bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins.max(1)];
    let n = h.len();
    for &v in values {
        let k = ((v.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1);
        h[k] += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box3D, Pose, Vec3};
    use crate::raycast::{ActorSummary, BeamSet, DenseHit};
    use crate::scene::ActorKind;

    fn hit(p: [f32; 3], n: [f32; 3], g: f32, actor: Option<u32>, material: MaterialKind) -> DenseHit {
        let range = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        DenseHit {
            point: p,
            range,
            normal: n,
            grayscale: g,
            actor_id: actor,
            material,
        }
    }

    fn frame_of(hits: Vec<DenseHit>, bright: f64, refl: f64) -> DenseFrame {
        let points = hits
            .into_iter()
            .enumerate()
            .map(|(i, h)| DensePoint {
                beam_set: BeamSet::Uniform,
                channel: 0,
                azimuth: i as u32,
                first: h,
                last: h,
            })
            .collect();
        DenseFrame {
            frame_id: 0,
            sensor_pose: Pose::identity(),
            azimuth_step_deg: 0.18,
            actors: vec![ActorSummary {
                id: 1,
                kind: ActorKind::Vehicle,
                world_box: Box3D::new(Vec3::new(5.0, 0.0, 0.75), Vec3::new(4.5, 1.8, 1.5), 0.0).unwrap(),
                reflectivity_scale: refl,
                brightness_scale: bright,
                visible_points: 0,
            }],
            points,
        }
    }

    #[test]
    fn brightness_examples() {
        assert!((base_brightness(0.5, 0.4, 0.25).unwrap() - 0.45).abs() < 1e-15);
        assert_eq!(base_brightness(0.0, 0.3, 0.22).unwrap(), 0.22);
        assert!((base_brightness(1.0, 0.5, 0.3).unwrap() - 0.8).abs() < 1e-15);
        assert!(base_brightness(0.5, 0.6, 0.25).is_err());
        assert!(base_brightness(0.5, 0.3, 0.1).is_err());
        assert!(base_brightness(1.2, 0.3, 0.25).is_err());
    }

    #[test]
    fn intensity_examples() {
        assert_eq!(point_intensity(0.45, 1.0, 5.0), 0.45);
        assert!((point_intensity(0.45, 0.5, 2.0) - 0.1125).abs() < 1e-15);
        assert_eq!(point_intensity(0.45, 0.0, 8.0), 0.0);
        assert_eq!(point_intensity(0.45, 0.0, 0.0), 0.45);
        assert_eq!(point_intensity(0.45, -0.3, 2.0), 0.0);
    }

    #[test]
    fn monotone_in_incidence() {
        for b in [0.2, 0.5, 0.8] {
            for n in [0.0, 0.5, 1.0, 3.0, 8.0] {
                let mut prev = -1.0;
                for k in 0..=100 {
                    let v = point_intensity(b, k as f64 / 100.0, n);
                    assert!(v >= prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn degenerate_params_reduce_to_closed_form() {
        let params = ShadingParams {
            r1_range: [0.4, 0.4],
            r2_range: [0.25, 0.25],
            n_range: [0.0, 0.0],
            falloff: Falloff { d0: 10.0, gamma: 0.0 },
            intensity_noise_sigma: 0.0,
            retro_threshold: 1.0,
            ..Default::default()
        };
        let hits: Vec<DenseHit> = (0..50)
            .map(|k| {
                let g = k as f32 / 50.0;
                hit(
                    [10.0 + k as f32, 1.0, -1.0],
                    [-0.6, 0.0, 0.8],
                    g,
                    Some(1),
                    MaterialKind::Opaque,
                )
            })
            .collect();
        let frame = frame_of(hits, 0.8, 0.9);
        let s = shade_frame(&frame, &params, 3, &Executor::sequential());
        for (p, i) in frame.points.iter().zip(&s.intensity) {
            let want = (0.4 * p.last.grayscale as f64 + 0.25) * 0.8 * 0.9;
            assert!((i - want).abs() < 1e-12);
        }
    }

    #[test]
    fn shading_is_deterministic_and_bounded() {
        let hits: Vec<DenseHit> = (0..500)
            .map(|k| {
                let a = k as f32 * 0.01;
                hit(
                    [20.0 * a.cos(), 20.0 * a.sin(), -1.7],
                    [0.0, 0.0, 1.0],
                    0.4,
                    None,
                    MaterialKind::Opaque,
                )
            })
            .collect();
        let frame = frame_of(hits, 1.0, 1.0);
        let p = ShadingParams::default();
        let a = shade_frame(&frame, &p, 11, &Executor::sequential());
        let b = shade_frame(&frame, &p, 11, &Executor::with_workers(3));
        assert_eq!(a, b);
        assert!(a.intensity.iter().all(|i| (0.0..=1.0).contains(i)));
        let c = shade_frame(&frame, &p, 12, &Executor::sequential());
        assert_ne!(a.intensity, c.intensity);
    }

    #[test]
    fn retro_peaks_and_materials() {
        let body = |g| hit([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], g, Some(1), MaterialKind::Opaque);
        let mut hits: Vec<DenseHit> = (0..400).map(|_| body(0.3)).collect();
        hits.extend((0..2).map(|_| body(1.0)));
        let flags = detect_retroreflectors(&frame_of(hits, 1.0, 1.0), 0.99);
        assert_eq!(flags.iter().filter(|f| **f).count(), 2);
        assert!(flags[400] && flags[401]);

        let mut hits: Vec<DenseHit> = (0..10).map(|_| body(0.5)).collect();
        hits[3].material = MaterialKind::RetroReflective;
        let flags = detect_retroreflectors(&frame_of(hits, 1.0, 1.0), 0.5);
        assert_eq!(flags, (0..10).map(|k| k == 3).collect::<Vec<_>>());

        assert!(detect_retroreflectors(&frame_of(Vec::new(), 1.0, 1.0), 0.9).is_empty());
    }

    #[test]
    fn retro_points_take_bright_draw() {
        let mut hits: Vec<DenseHit> = (0..20)
            .map(|_| hit([50.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 0.1, Some(1), MaterialKind::Opaque))
            .collect();
        hits[7].material = MaterialKind::RetroReflective;
        let params = ShadingParams {
            intensity_noise_sigma: 0.0,
            retro_threshold: 1.0,
            ..Default::default()
        };
        let s = shade_frame(&frame_of(hits, 1.0, 1.0), &params, 0, &Executor::sequential());
        assert!((0.7..=1.0).contains(&s.intensity[7]));
    }

    fn shaded_with(values: &[f64]) -> ShadedFrame {
        let hits = values
            .iter()
            .map(|_| hit([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 0.5, None, MaterialKind::Opaque))
            .collect();
        ShadedFrame {
            frame: frame_of(hits, 1.0, 1.0),
            intensity: values.to_vec(),
            dropped: vec![false; values.len()],
        }
    }

    #[test]
    fn raydrop_rule() {
        let s = apply_raydrop(shaded_with(&[0.01, 0.02, 0.5, 0.0]), 0.02);
        assert_eq!(s.dropped, vec![true, false, false, true]);
        assert_eq!(s.intensity[1], 0.0);
        assert!((s.intensity[2] - 0.48).abs() < 1e-15);
        assert!(s.intensity[0] < 0.0);
        let (frame, kept) = s.into_retained();
        assert_eq!(frame.points.len(), 2);
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn quantization_makes_zeros() {
        let s = quantize_intensity(apply_raydrop(shaded_with(&[0.024, 0.3, 0.03]), 0.02), 0.01);
        assert_eq!(s.intensity[0], 0.0);
        assert!((s.intensity[1] - 0.28).abs() < 1e-12);
        assert!((s.intensity[2] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn range_noise_statistics() {
        let hits: Vec<DenseHit> = (0..100_000)
            .map(|k| {
                let a = k as f32 * 1e-4;
                hit(
                    [30.0 * a.cos(), 30.0 * a.sin(), 2.0],
                    [-1.0, 0.0, 0.0],
                    0.5,
                    None,
                    MaterialKind::Opaque,
                )
            })
            .collect();
        let frame = frame_of(hits, 1.0, 1.0);
        let exec = Executor::sequential();
        assert_eq!(apply_range_noise(&frame, 0.0, 1, &exec), frame);
        let noisy = apply_range_noise(&frame, 0.1, 1, &exec);
        assert_eq!(noisy, apply_range_noise(&frame, 0.1, 1, &exec));
        let d: Vec<f64> = frame
            .points
            .iter()
            .zip(&noisy.points)
            .map(|(a, b)| {
                let (pa, pb) = (a.last.position(), b.last.position());
                assert!(pa.normalize().dot(&pb.normalize()) > 1.0 - 1e-9);
                pb.norm() - pa.norm()
            })
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
        assert!(mean.abs() < 0.002);
        assert!((sd - 0.1).abs() / 0.1 < 0.02, "sd {sd}");
    }

    #[test]
    fn params_validation_and_toml() {
        let p = ShadingParams::default();
        p.validate().unwrap();
        let text = toml::to_string(&p).unwrap();
        assert_eq!(ShadingParams::from_toml(&text).unwrap(), p);
        assert!(ShadingParams::from_toml("epsilon = 0.0").is_err());
        assert!(ShadingParams::from_toml("r1_range = [0.1, 0.5]").is_err());
        assert!(ShadingParams::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(
            intensity_histogram(&[0.0, 0.05, 0.1, 0.99, 1.0], 10),
            vec![2, 1, 0, 0, 0, 0, 0, 0, 0, 2]
        );
    }
}
