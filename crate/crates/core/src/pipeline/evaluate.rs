use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalConfig, EvalReport};
use crate::kitti_io::{read_label, read_split, DatasetLayout, Split};
use crate::labels::LabelRecord;
use crate::par::Executor;

fn label_dir(root: &Path) -> PathBuf {
    let nested = root.join("label_2");
    if nested.is_dir() {
        nested
    } else {
        root.to_path_buf()
    }
}

/// Reads every `NNNNNN.txt` of a label directory (or of `root/label_2`).
/// With `ids`, exactly those frames are read and absent files are reported.
pub fn load_label_dir(root: &Path, ids: Option<&[u64]>) -> Result<BTreeMap<u64, Vec<LabelRecord>>> {
    let dir = label_dir(root);
    let ids: Vec<u64> = match ids {
        Some(ids) => ids.to_vec(),
        None => {
            let mut found = Vec::new();
            for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                let name = entry.file_name();
                let name = name.to_string_lossy();
                if let Some(id) = name.strip_suffix(".txt").and_then(|s| s.parse::<u64>().ok()) {
                    found.push(id);
                }
            }
            found.sort_unstable();
            found
        }
    };
    let mut out = BTreeMap::new();
    let mut missing = Vec::new();
    for id in ids {
        let path = dir.join(format!("{}.txt", crate::kitti_io::frame_name(id)));
        if !path.is_file() {
            missing.push(path.display().to_string());
            continue;
        }
        out.insert(id, read_label(&path)?);
    }
    if !missing.is_empty() {
        return Err(Error::MissingFrames { missing });
    }
    Ok(out)
}

/// Evaluates detections in `det_root` against the ground truth of the
/// dataset at `gt_root`. Uses the val split when the dataset has one,
/// otherwise every ground-truth label file. Writes `report.txt` and
/// `report.csv` to `out`.
pub fn cmd_evaluate(
    gt_root: &Path,
    det_root: &Path,
    out: Option<&Path>,
    cfg: &EvalConfig,
    exec: &Executor,
) -> Result<EvalReport> {
    let split = DatasetLayout::new(gt_root).split(Split::Val);
    let ids = if split.is_file() {
        Some(read_split(&split)?)
    } else {
        None
    };
    let gts = load_label_dir(gt_root, ids.as_deref())?;
    let ids: Vec<u64> = gts.keys().copied().collect();
    let dets = load_label_dir(det_root, Some(&ids))?;
    for (id, d) in &dets {
        if let Some(k) = d.iter().position(|l| l.score.is_none_or(|s| !s.is_finite())) {
            return Err(Error::Parse {
                path: label_dir(det_root).join(format!("{}.txt", crate::kitti_io::frame_name(*id))),
                line: k + 1,
                detail: "detections need a finite score column".into(),
            });
        }
    }
    let report = evaluate(&dets, &gts, cfg, exec)?;
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        for (name, text) in [("report.txt", report.to_text()), ("report.csv", report.to_csv())] {
            let p = out.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
    }
    Ok(report)
}
