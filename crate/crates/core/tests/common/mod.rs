//! Reference implementations used by the integration tests. None of this
//! calls into the crate's matching, AP or IoU code.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use synthlidar::labels::LabelRecord;
use synthlidar::Vec3;

// ---------------------------------------------------------------- AP oracle

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OMetric {
    Box3D,
    Bev,
    Box2D,
    Aos,
}

pub const OMETRICS: [OMetric; 4] = [OMetric::Box3D, OMetric::Bev, OMetric::Box2D, OMetric::Aos];

/// 0 easy, 1 moderate, 2 hard, 3 none.
pub fn odifficulty(l: &LabelRecord) -> usize {
    let h = l.bbox[3] - l.bbox[1];
    let rows = [(40.0, 0, 0.15), (25.0, 1, 0.30), (25.0, 2, 0.50)];
    for (k, (mh, occ, tr)) in rows.iter().enumerate() {
        if h >= *mh && l.occlusion <= *occ && l.truncation <= *tr {
            return k;
        }
    }
    3
}

fn min_height(d: usize) -> f64 {
    [40.0, 25.0, 25.0][d]
}

fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Camera-frame extents of a label whose heading is a multiple of 90°.
fn extents(l: &LabelRecord) -> [(f64, f64); 3] {
    let [h, w, len] = l.dims;
    let [x, y, z] = l.location;
    let along_x = (l.rotation_y.sin()).abs() < 0.5;
    let (ex, ez) = if along_x { (len, w) } else { (w, len) };
    [(x - ex / 2.0, x + ex / 2.0), (y - h, y), (z - ez / 2.0, z + ez / 2.0)]
}

pub fn oiou(metric: OMetric, a: &LabelRecord, b: &LabelRecord) -> f64 {
    match metric {
        OMetric::Box2D | OMetric::Aos => {
            let ix = interval_overlap(a.bbox[0], a.bbox[2], b.bbox[0], b.bbox[2]);
            let iy = interval_overlap(a.bbox[1], a.bbox[3], b.bbox[1], b.bbox[3]);
            let area = |r: &[f64; 4]| (r[2] - r[0]) * (r[3] - r[1]);
            let i = ix * iy;
            i / (area(&a.bbox) + area(&b.bbox) - i)
        }
        OMetric::Bev | OMetric::Box3D => {
            let (ea, eb) = (extents(a), extents(b));
            let axes: &[usize] = if metric == OMetric::Bev { &[0, 2] } else { &[0, 1, 2] };
            let mut i = 1.0;
            let mut va = 1.0;
            let mut vb = 1.0;
            for &k in axes {
                i *= interval_overlap(ea[k].0, ea[k].1, eb[k].0, eb[k].1);
                va *= ea[k].1 - ea[k].0;
                vb *= eb[k].1 - eb[k].0;
            }
            i / (va + vb - i)
        }
    }
}

fn coverage(det: &[f64; 4], region: &[f64; 4]) -> f64 {
    let i =
        interval_overlap(det[0], det[2], region[0], region[2]) * interval_overlap(det[1], det[3], region[1], region[3]);
    i / ((det[2] - det[0]) * (det[3] - det[1]))
}

/// Counts (tp, fp, similarity sum) for detections scoring at least `cut`.
fn count_at(dets: &[LabelRecord], gts: &[LabelRecord], metric: OMetric, d: usize, cut: f64) -> (usize, usize, f64) {
    let mut idx: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].score.unwrap() >= cut).collect();
    idx.sort_by(|&a, &b| dets[b].score.unwrap().total_cmp(&dets[a].score.unwrap()));
    let valid = |g: &LabelRecord| g.class == "Car" && odifficulty(g) <= d;
    let dontcare_obj = |g: &LabelRecord| (g.class == "Car" && odifficulty(g) > d) || g.class == "Van";
    let mut used = vec![false; gts.len()];
    let (mut tp, mut fp, mut sim) = (0, 0, 0.0);
    for i in idx {
        let det = &dets[i];
        if det.class != "Car" || det.bbox[3] - det.bbox[1] < min_height(d) {
            continue;
        }
        let mut best = None::<(usize, f64)>;
        for (j, g) in gts.iter().enumerate() {
            if used[j] || !valid(g) {
                continue;
            }
            let o = oiou(metric, det, g);
            if o >= 0.7 && best.is_none_or(|(_, b)| o > b) {
                best = Some((j, o));
            }
        }
        if let Some((j, _)) = best {
            used[j] = true;
            tp += 1;
            sim += (1.0 + (det.alpha - gts[j].alpha).cos()) / 2.0;
            continue;
        }
        let absorbed = gts.iter().any(|g| {
            (dontcare_obj(g) && oiou(metric, det, g) >= 0.7)
                || (g.class == "DontCare" && coverage(&det.bbox, &g.bbox) >= 0.5)
        });
        if !absorbed {
            fp += 1;
        }
    }
    (tp, fp, sim)
}

/// Brute-force AP40 (or AOS) in `[0, 1]`: rematch from scratch at every
/// distinct score, then take the best precision right of each recall mark.
pub fn oracle_ap(
    dets: &BTreeMap<u64, Vec<LabelRecord>>,
    gts: &BTreeMap<u64, Vec<LabelRecord>>,
    metric: OMetric,
    d: usize,
) -> Option<f64> {
    let total: usize = gts
        .values()
        .flat_map(|g| g.iter())
        .filter(|g| g.class == "Car" && odifficulty(g) <= d)
        .count();
    if total == 0 {
        return None;
    }
    let mut cuts: Vec<f64> = dets.values().flat_map(|v| v.iter().map(|l| l.score.unwrap())).collect();
    cuts.sort_by(|a, b| b.total_cmp(a));
    cuts.dedup();
    let mut pts = Vec::new();
    for c in cuts {
        let (mut tp, mut fp, mut sim) = (0, 0, 0.0);
        for (id, g) in gts {
            let r = count_at(&dets[id], g, metric, d, c);
            tp += r.0;
            fp += r.1;
            sim += r.2;
        }
        if tp + fp == 0 {
            continue;
        }
        let n = (tp + fp) as f64;
        let y = if metric == OMetric::Aos { sim / n } else { tp as f64 / n };
        pts.push((tp as f64 / total as f64, y));
    }
    let mut acc = 0.0;
    for k in 1..=40 {
        let r = k as f64 / 40.0;
        let best = pts.iter().filter(|p| p.0 >= r - 1e-12).map(|p| p.1).fold(0.0, f64::max);
        acc += best;
    }
    Some(acc / 40.0)
}

// ------------------------------------------------------- random micro-evals

fn label(class: &str) -> LabelRecord {
    LabelRecord {
        class: class.into(),
        truncation: 0.0,
        occlusion: 0,
        alpha: 0.0,
        bbox: [0.0; 4],
        dims: [1.5, 1.7, 4.2],
        location: [0.0; 3],
        rotation_y: 0.0,
        score: None,
    }
}

fn random_gt(rng: &mut SmallRng) -> LabelRecord {
    let u: f64 = rng.random();
    let class = if u < 0.75 {
        "Car"
    } else if u < 0.85 {
        "Van"
    } else if u < 0.95 {
        "DontCare"
    } else {
        "Pedestrian"
    };
    let mut l = label(class);
    l.truncation = [0.0, 0.1, 0.25, 0.4, 0.7][rng.random_range(0..5)];
    l.occlusion = rng.random_range(0..=2);
    l.alpha = rng.random_range(-3.1..3.1);
    let x1 = rng.random_range(0.0..1100.0);
    let y1 = rng.random_range(120.0..250.0);
    let h = rng.random_range(15.0..110.0);
    let w = h * rng.random_range(1.0..2.5);
    l.bbox = [x1, y1, x1 + w, y1 + h];
    l.dims = [
        rng.random_range(1.4..1.7),
        rng.random_range(1.6..1.9),
        rng.random_range(3.6..4.8),
    ];
    l.location = [
        rng.random_range(-12.0..12.0),
        rng.random_range(1.5..1.8),
        rng.random_range(5.0..45.0),
    ];
    l.rotation_y = FRAC_PI_2 * rng.random_range(-1i32..=2) as f64;
    l
}

fn score(rng: &mut SmallRng) -> f64 {
    (rng.random_range(0.0..1.0f64) * 20.0).round() / 20.0
}

fn jitter_det(g: &LabelRecord, rng: &mut SmallRng) -> LabelRecord {
    let mut d = g.clone();
    d.class = "Car".into();
    let s = rng.random_range(0.02..0.4);
    for k in [0, 2] {
        d.location[k] += rng.random_range(-s..s);
    }
    d.location[1] += rng.random_range(-0.1..0.1);
    for k in 0..3 {
        d.dims[k] *= rng.random_range(0.9..1.1);
    }
    let px = rng.random_range(0.0..12.0);
    for k in 0..4 {
        d.bbox[k] += rng.random_range(-px..px);
    }
    if d.bbox[2] <= d.bbox[0] + 1.0 || d.bbox[3] <= d.bbox[1] + 1.0 {
        d.bbox = g.bbox;
    }
    d.alpha += rng.random_range(-1.0..1.0);
    d.truncation = 0.0;
    d.occlusion = 0;
    d.score = Some(score(rng));
    d
}

pub type Frames = BTreeMap<u64, Vec<LabelRecord>>;

/// Random ground truth and detections: up to 20 frames, up to 10 boxes
/// each, headings on multiples of 90°, scores on a coarse grid (ties).
pub fn micro_eval(seed: u64) -> (Frames, Frames) {
    let mut rng = SmallRng::seed_from_u64(seed);
    let n = rng.random_range(1..=20);
    let mut gts = BTreeMap::new();
    let mut dets = BTreeMap::new();
    for id in 0..n {
        let k = rng.random_range(0..=10);
        let g: Vec<LabelRecord> = (0..k).map(|_| random_gt(&mut rng)).collect();
        let mut d = Vec::new();
        for gt in &g {
            if gt.class != "DontCare" && gt.class != "Pedestrian" && rng.random_bool(0.85) && d.len() < 10 {
                d.push(jitter_det(gt, &mut rng));
            }
        }
        while d.len() < 10 && rng.random_bool(0.3) {
            let mut fp = random_gt(&mut rng);
            fp.class = if rng.random_bool(0.9) { "Car" } else { "Pedestrian" }.into();
            fp.score = Some(score(&mut rng));
            d.push(fp);
        }
        gts.insert(id, g);
        dets.insert(id, d);
    }
    (dets, gts)
}

// ------------------------------------------------------------- geometry

/// Distance from `p` to triangle `t` (closest-point construction).
pub fn point_triangle_distance(p: &Vec3, t: &[Vec3; 3]) -> f64 {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (p - a).norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (p - b).norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (p - c).norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

/// Monte-Carlo BEV IoU: `n` uniform samples over `a`'s footprint, each
/// tested against `b`. Returns the estimate and its standard error under
/// the supplied true IoU.
pub fn monte_carlo_bev_iou(a: &synthlidar::Box3D, b: &synthlidar::Box3D, n: u64, seed: u64, truth: f64) -> (f64, f64) {
    let mut rng = SmallRng::seed_from_u64(seed);
    let (la, wa) = (a.dims.x, a.dims.y);
    let (ca, sa) = (a.yaw.cos(), a.yaw.sin());
    let (cb, sb) = (b.yaw.cos(), b.yaw.sin());
    let (hlb, hwb) = (0.5 * b.dims.x, 0.5 * b.dims.y);
    let (ox, oy) = (a.center.x - b.center.x, a.center.y - b.center.y);
    let mut hits = 0u64;
    for _ in 0..n {
        let u = (rng.random::<f64>() - 0.5) * la;
        let v = (rng.random::<f64>() - 0.5) * wa;
        let x = ox + ca * u - sa * v;
        let y = oy + sa * u + ca * v;
        let lu = cb * x + sb * y;
        let lv = -sb * x + cb * y;
        if lu.abs() <= hlb && lv.abs() <= hwb {
            hits += 1;
        }
    }
    let area_a = la * wa;
    let area_b = b.dims.x * b.dims.y;
    let inter = area_a * hits as f64 / n as f64;
    let est = inter / (area_a + area_b - inter);
    // sampling error propagated through I -> I / (A + B - I) at the true I
    let i_true = truth * (area_a + area_b) / (1.0 + truth);
    let p = (i_true / area_a).clamp(0.0, 1.0);
    let se_i = area_a * (p * (1.0 - p) / n as f64).sqrt();
    let denom = area_a + area_b - i_true;
    (est, se_i * (area_a + area_b) / (denom * denom))
}
