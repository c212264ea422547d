//! Intensity model invariants over synthetic dense frames.

use proptest::prelude::*;
use synthlidar::geometry::Pose;
use synthlidar::raycast::{BeamSet, DenseFrame, DenseHit, DensePoint};
use synthlidar::scene::{MaterialKind, Scene};
use synthlidar::shading::{
    apply_range_noise, apply_raydrop, base_brightness, point_intensity, quantize_intensity, shade_frame, ShadingParams,
};
use synthlidar::Executor;

fn frame(hits: &[(f32, f32, f32, bool)]) -> DenseFrame {
    let mut f = DenseFrame::new(0, Pose::identity(), 0.18, &Scene::empty(0));
    for (i, &(range, g, cos, retro)) in hits.iter().enumerate() {
        let dir = [1.0f32, 0.0, 0.0];
        let hit = DenseHit {
            point: dir.map(|d| d * range),
            range,
            normal: [-cos, (1.0 - cos * cos).max(0.0).sqrt(), 0.0],
            grayscale: g,
            actor_id: None,
            material: if retro {
                MaterialKind::RetroReflective
            } else {
                MaterialKind::Opaque
            },
        };
        f.points.push(DensePoint {
            beam_set: BeamSet::Uniform,
            channel: 0,
            azimuth: i as u32,
            first: hit,
            last: hit,
        });
    }
    f
}

fn hits() -> impl Strategy<Value = Vec<(f32, f32, f32, bool)>> {
    prop::collection::vec(
        (1.0..100.0f32, 0.0..1.0f32, 0.0..1.0f32, prop::bool::weighted(0.05)),
        1..300,
    )
}

proptest! {
    #[test]
    fn raydrop_rules(h in hits(), seed in any::<u64>(), eps in 0.0..0.2f64) {
        let f = frame(&h);
        let shaded = shade_frame(&f, &ShadingParams::default(), seed, &Executor::sequential());
        let pre = shaded.intensity.clone();
        for v in &pre {
            prop_assert!((0.0..=1.0).contains(v));
        }
        let out = apply_raydrop(shaded, eps);
        for (i, &p) in pre.iter().enumerate() {
            prop_assert_eq!(out.dropped[i], p - eps < 0.0);
            if !out.dropped[i] {
                prop_assert!(out.intensity[i] >= 0.0);
                prop_assert!((out.intensity[i] - (p - eps)).abs() < 1e-15);
            }
        }
        let q = quantize_intensity(out, 0.01);
        for (v, d) in q.intensity.iter().zip(&q.dropped) {
            if !*d {
                prop_assert!(*v >= 0.0);
                prop_assert!(((v * 100.0).round() - v * 100.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shading_is_deterministic(h in hits(), seed in any::<u64>()) {
        let f = frame(&h);
        let p = ShadingParams::default();
        let a = shade_frame(&f, &p, seed, &Executor::sequential());
        let b = shade_frame(&f, &p, seed, &Executor::with_workers(3));
        prop_assert_eq!(a.intensity, b.intensity);
    }

    #[test]
    fn intensity_model_bounds(g in 0.0..1.0f64, r1 in 0.25..0.5f64, r2 in 0.2..0.3f64, c in 0.0..1.0f64, n in 0.0..8.0f64) {
        let b = base_brightness(g, r1, r2).unwrap();
        prop_assert!(b >= r2 && b <= r1 + r2);
        let i = point_intensity(b, c, n);
        prop_assert!(i >= 0.0 && i <= b + 1e-15);
        // glancing incidence never brightens a point
        prop_assert!(point_intensity(b, c * 0.5, n) <= i + 1e-15);
    }

    #[test]
    fn range_noise_moves_along_ray(h in hits(), seed in any::<u64>()) {
        let f = frame(&h);
        let noisy = apply_range_noise(&f, 0.1, seed, &Executor::sequential());
        for (a, b) in f.points.iter().zip(&noisy.points) {
            let delta = b.last.range - a.last.range;
            prop_assert!((b.first.range - a.first.range - delta).abs() < 1e-4);
            // the point stays on the x axis ray
            prop_assert!(b.last.point[1].abs() < 1e-6 && b.last.point[2].abs() < 1e-6);
            prop_assert!((b.last.point[0] - b.last.range).abs() < 1e-3);
        }
    }
}
