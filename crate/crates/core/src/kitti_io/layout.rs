use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Six-digit zero-padded frame name.
pub fn frame_name(id: u64) -> String {
    format!("{id:06}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn file_name(self) -> &'static str {
        match self {
            Split::Train => "train.txt",
            Split::Val => "val.txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetLayout {
    pub root: PathBuf,
}

impl DatasetLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DatasetLayout { root: root.into() }
    }

    pub fn velodyne(&self, id: u64) -> PathBuf {
        self.root.join("velodyne").join(format!("{}.bin", frame_name(id)))
    }

    pub fn label(&self, id: u64) -> PathBuf {
        self.root.join("label_2").join(format!("{}.txt", frame_name(id)))
    }

    pub fn calib(&self, id: u64) -> PathBuf {
        self.root.join("calib").join(format!("{}.txt", frame_name(id)))
    }

    pub fn dense(&self, id: u64) -> PathBuf {
        self.root.join("dense").join(format!("{}.df", frame_name(id)))
    }

    pub fn split(&self, split: Split) -> PathBuf {
        self.root.join("ImageSets").join(split.file_name())
    }

    pub fn create_kitti_dirs(&self) -> Result<()> {
        for d in ["velodyne", "label_2", "calib", "ImageSets"] {
            let p = self.root.join(d);
            std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }

    pub fn create_dense_dir(&self) -> Result<()> {
        let p = self.root.join("dense");
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))
    }

    /// Ids of all `dense/*.df` files, ascending.
    pub fn dense_ids(&self) -> Result<Vec<u64>> {
        let dir = self.root.join("dense");
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Some(stem) = name.strip_suffix(".df") {
                if let Ok(id) = stem.parse::<u64>() {
                    ids.push(id);
                }
            }
        }
        ids.sort_unstable();
        Ok(ids)
    }
}

pub fn write_split(ids: &[u64], path: &Path) -> Result<()> {
    let mut text = String::new();
    for id in ids {
        text.push_str(&frame_name(*id));
        text.push('\n');
    }
    super::write_atomic(path, text.as_bytes())
}

pub fn read_split(path: &Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let id = t.parse::<u64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail: format!("bad frame id {t:?}"),
        })?;
        ids.push(id);
    }
    Ok(ids)
}

/// A checked KITTI dataset: split lists whose frames all have velodyne,
/// label and calib files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KittiFrameSet {
    pub layout: DatasetLayout,
    pub train: Vec<u64>,
    pub val: Vec<u64>,
}

pub fn validate_dataset(root: &Path) -> Result<KittiFrameSet> {
    let layout = DatasetLayout::new(root);
    let train = read_split(&layout.split(Split::Train))?;
    let val = read_split(&layout.split(Split::Val))?;
    let mut seen = BTreeSet::new();
    for id in train.iter().chain(&val) {
        if !seen.insert(*id) {
            return Err(Error::format(
                layout.root.join("ImageSets"),
                format!("frame {} listed twice", frame_name(*id)),
            ));
        }
    }
    let missing: Vec<String> = seen
        .iter()
        .flat_map(|id| [layout.velodyne(*id), layout.label(*id), layout.calib(*id)])
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFrames { missing });
    }
    Ok(KittiFrameSet { layout, train, val })
}
