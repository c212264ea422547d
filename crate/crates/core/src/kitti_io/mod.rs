//! KITTI dataset files and the dense intermediate container.
//!
//! Layout under a dataset root:
//!
//! ```text
//! velodyne/NNNNNN.bin   f32 x, y, z, intensity records
//! label_2/NNNNNN.txt    one object per line
//! calib/NNNNNN.txt      projection and rig matrices
//! ImageSets/train.txt   frame ids, one per line
//! ImageSets/val.txt
//! dense/NNNNNN.df       dense intermediate frames
//! ```
//!
//! Every writer goes through a temporary file and a rename, so readers never
//! observe partially written files.

mod calib;
mod dense;
mod label;
mod layout;
mod velodyne;

pub use calib::{CalibBlock, IMAGE_HEIGHT, IMAGE_WIDTH};
pub use dense::{
    decode_dense_frame, encode_dense_frame, read_dense_frame, write_dense_frame, DENSE_MAGIC, DENSE_VERSION,
};
pub use label::{format_label_line, parse_label_text, read_label, write_label};
pub use layout::{frame_name, read_split, validate_dataset, write_split, DatasetLayout, KittiFrameSet, Split};
pub use velodyne::{decode_pointcloud, encode_pointcloud, read_pointcloud, write_pointcloud, PointXYZI};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("no file name")))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
