//! KITTI-style detection metrics: rotated IoU, greedy matching, AP over 40
//! recall positions and average orientation similarity.
//!
//! Matching runs per frame and difficulty. Detections are visited in
//! descending score order; each claims the unclaimed ground truth of the
//! evaluated difficulty with the highest IoU at or above the threshold.
//! Ground truths that are harder than the evaluated difficulty, or of a
//! neighboring class, swallow overlapping detections without counting them,
//! as do `DontCare` regions and detections shorter than the difficulty's
//! minimum height.

mod iou;

pub use iou::{bev_intersection, clip_convex, coverage_2d, iou_2d, iou_3d, iou_bev, polygon_area};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::normalize_angle;
use crate::kitti_io::frame_name;
use crate::labels::{Difficulty, LabelRecord, DIFFICULTY_TABLE};
use crate::par::Executor;

pub const RECALL_POSITIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Box3D,
    Bev,
    Box2D,
    Aos,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Box3D, Metric::Bev, Metric::Box2D, Metric::Aos];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Box3D => "3d",
            Metric::Bev => "bev",
            Metric::Box2D => "2d",
            Metric::Aos => "aos",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub class: String,
    /// Classes whose boxes neither count nor penalize, e.g. `Van` for `Car`.
    pub neighbor_classes: Vec<String>,
    pub iou_3d: f64,
    pub iou_bev: f64,
    pub iou_2d: f64,
    /// Minimum share of a detection inside a `DontCare` region to ignore it.
    pub dontcare_coverage: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            class: "Car".into(),
            neighbor_classes: vec!["Van".into()],
            iou_3d: 0.7,
            iou_bev: 0.7,
            iou_2d: 0.7,
            dontcare_coverage: 0.5,
        }
    }
}

impl EvalConfig {
    fn threshold(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Box3D => self.iou_3d,
            Metric::Bev => self.iou_bev,
            Metric::Box2D | Metric::Aos => self.iou_2d,
        }
    }
}

fn overlap(metric: Metric, a: &LabelRecord, b: &LabelRecord) -> f64 {
    match metric {
        Metric::Box3D => iou_3d(&a.to_eval_box(), &b.to_eval_box()),
        Metric::Bev => iou_bev(&a.to_eval_box(), &b.to_eval_box()),
        Metric::Box2D | Metric::Aos => iou_2d(&a.bbox, &b.bbox),
    }
}

fn min_height(d: Difficulty) -> f64 {
    DIFFICULTY_TABLE.iter().find(|r| r.0 == d).map_or(0.0, |r| r.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Matched the ground truth with this index.
    TruePositive(usize),
    FalsePositive,
    /// Not counted: other class, too small, or on a don't-care object.
    Ignored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatch {
    /// One outcome per input detection, in input order.
    pub outcomes: Vec<Outcome>,
    /// Orientation similarity per detection; 0 unless a true positive.
    pub similarity: Vec<f64>,
    /// Ground truths of the evaluated difficulty.
    pub num_gt: usize,
}

impl FrameMatch {
    pub fn true_positives(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, Outcome::TruePositive(_)))
            .count()
    }

    pub fn false_positives(&self) -> usize {
        self.outcomes.iter().filter(|o| **o == Outcome::FalsePositive).count()
    }

    /// Evaluated ground truths left unmatched.
    pub fn missed(&self) -> usize {
        self.num_gt - self.true_positives()
    }
}

/// Matches one frame's detections against its ground truth.
pub fn match_frame(
    dets: &[LabelRecord],
    gts: &[LabelRecord],
    metric: Metric,
    difficulty: Difficulty,
    cfg: &EvalConfig,
) -> FrameMatch {
    #[derive(PartialEq)]
    enum Gt {
        Valid,
        DontCareObject,
        DontCareRegion,
        Other,
    }
    let kinds: Vec<Gt> = gts
        .iter()
        .map(|g| {
            if g.class == cfg.class {
                if g.difficulty() <= difficulty {
                    Gt::Valid
                } else {
                    Gt::DontCareObject
                }
            } else if cfg.neighbor_classes.contains(&g.class) {
                Gt::DontCareObject
            } else if g.class == "DontCare" {
                Gt::DontCareRegion
            } else {
                Gt::Other
            }
        })
        .collect();
    let num_gt = kinds.iter().filter(|k| **k == Gt::Valid).count();
    let threshold = cfg.threshold(metric);
    let floor = min_height(difficulty);

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.unwrap_or(0.0).total_cmp(&dets[a].score.unwrap_or(0.0)));

    let mut claimed = vec![false; gts.len()];
    let mut outcomes = vec![Outcome::Ignored; dets.len()];
    let mut similarity = vec![0.0; dets.len()];
    for i in order {
        let d = &dets[i];
        if d.class != cfg.class || d.height_px() < floor {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gts.iter().enumerate() {
            if kinds[j] != Gt::Valid || claimed[j] {
                continue;
            }
            let iou = overlap(metric, d, g);
            if iou >= threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((j, iou));
            }
        }
        if let Some((j, _)) = best {
            claimed[j] = true;
            outcomes[i] = Outcome::TruePositive(j);
            similarity[i] = 0.5 * (1.0 + normalize_angle(d.alpha - gts[j].alpha).cos());
            continue;
        }
        let absorbed = gts.iter().zip(&kinds).any(|(g, k)| match k {
            Gt::DontCareObject => overlap(metric, d, g) >= threshold,
            Gt::DontCareRegion => coverage_2d(&d.bbox, &g.bbox) >= cfg.dontcare_coverage,
            _ => false,
        });
        if !absorbed {
            outcomes[i] = Outcome::FalsePositive;
        }
    }
    FrameMatch {
        outcomes,
        similarity,
        num_gt,
    }
}

/// One counted detection of a PR stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDet {
    pub score: f64,
    pub true_positive: bool,
    /// Orientation similarity in `[0, 1]`; only read for AOS.
    pub similarity: f64,
}

/// Mean over `r = 1/40 … 40/40` of the best value among curve points with
/// recall at least `r` (0 where none exists).
pub fn interpolate40(curve: &[(f64, f64)]) -> f64 {
    let mut sum = 0.0;
    for k in 1..=RECALL_POSITIONS {
        let r = k as f64 / RECALL_POSITIONS as f64;
        let best = curve
            .iter()
            .filter(|(rec, _)| *rec >= r - 1e-12)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
        sum += best;
    }
    sum / RECALL_POSITIONS as f64
}

/// Precision-recall points at every distinct score, plus the matching
/// orientation-similarity points: `(recall, precision)` and
/// `(recall, similarity / detections)`.
type Curve = Vec<(f64, f64)>;

fn curves(stream: &[ScoredDet], total_gt: usize) -> (Curve, Curve) {
    let mut s = stream.to_vec();
    s.sort_by(|a, b| b.score.total_cmp(&a.score));
    let (mut tp, mut n, mut sim) = (0usize, 0usize, 0.0);
    let mut pr = Vec::new();
    let mut os = Vec::new();
    for (i, d) in s.iter().enumerate() {
        n += 1;
        if d.true_positive {
            tp += 1;
            sim += d.similarity;
        }
        if i + 1 == s.len() || s[i + 1].score != d.score {
            let recall = tp as f64 / total_gt as f64;
            pr.push((recall, tp as f64 / n as f64));
            os.push((recall, sim / n as f64));
        }
    }
    (pr, os)
}

/// AP over 40 recall positions; `None` without ground truth.
pub fn ap40(stream: &[ScoredDet], total_gt: usize) -> Option<f64> {
    (total_gt > 0).then(|| interpolate40(&curves(stream, total_gt).0))
}

/// Average orientation similarity with the same interpolation as [`ap40`].
pub fn aos(stream: &[ScoredDet], total_gt: usize) -> Option<f64> {
    (total_gt > 0).then(|| interpolate40(&curves(stream, total_gt).1))
}

/// Percentages per metric (3D, BEV, 2D, AOS) and difficulty (easy,
/// moderate, hard). `None` where no ground truth exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub cells: [[Option<f64>; 3]; 4],
}

impl EvalReport {
    pub fn get(&self, metric: Metric, difficulty: Difficulty) -> Option<f64> {
        let m = Metric::ALL.iter().position(|x| *x == metric)?;
        let d = Difficulty::EVALUATED.iter().position(|x| *x == difficulty)?;
        self.cells[m][d]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6}{:>10}{:>10}{:>10}", "", "easy", "moderate", "hard");
        for (m, row) in Metric::ALL.iter().zip(&self.cells) {
            let _ = write!(s, "{:<6}", m.name());
            for v in row {
                match v {
                    Some(v) => {
                        let _ = write!(s, "{v:>10.2}");
                    }
                    None => {
                        let _ = write!(s, "{:>10}", "-");
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,easy,moderate,hard\n");
        for (m, row) in Metric::ALL.iter().zip(&self.cells) {
            s.push_str(m.name());
            for v in row {
                s.push(',');
                if let Some(v) = v {
                    let _ = write!(s, "{v:.4}");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Scores detections against ground truth over a set of frames. Both maps
/// must hold the same frame ids.
pub fn evaluate(
    dets: &BTreeMap<u64, Vec<LabelRecord>>,
    gts: &BTreeMap<u64, Vec<LabelRecord>>,
    cfg: &EvalConfig,
    exec: &Executor,
) -> Result<EvalReport> {
    let missing: Vec<String> = gts
        .keys()
        .filter(|k| !dets.contains_key(k))
        .chain(dets.keys().filter(|k| !gts.contains_key(k)))
        .map(|k| frame_name(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFrames { missing });
    }
    let frames: Vec<(&Vec<LabelRecord>, &Vec<LabelRecord>)> = gts.iter().map(|(k, g)| (&dets[k], g)).collect();
    let mut cells = [[None; 3]; 4];
    for (mi, &metric) in Metric::ALL.iter().enumerate() {
        for (di, &difficulty) in Difficulty::EVALUATED.iter().enumerate() {
            let matches = exec.map_slice(&frames, |_, (d, g)| match_frame(d, g, metric, difficulty, cfg));
            let mut stream = Vec::new();
            let mut total_gt = 0;
            for ((d, _), m) in frames.iter().zip(&matches) {
                total_gt += m.num_gt;
                for (k, o) in m.outcomes.iter().enumerate() {
                    if *o == Outcome::Ignored {
                        continue;
                    }
                    stream.push(ScoredDet {
                        score: d[k].score.unwrap_or(0.0),
                        true_positive: matches!(o, Outcome::TruePositive(_)),
                        similarity: m.similarity[k],
                    });
                }
            }
            let v = if metric == Metric::Aos {
                aos(&stream, total_gt)
            } else {
                ap40(&stream, total_gt)
            };
            cells[mi][di] = v.map(|x| 100.0 * x);
        }
    }
    Ok(EvalReport { cells })
}
