use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::labels::LabelRecord;

/// One label line: floats at two decimals, the optional score at four.
pub fn format_label_line(l: &LabelRecord) -> String {
    let mut s = String::with_capacity(96);
    let _ = write!(
        s,
        "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
        l.class,
        l.truncation,
        l.occlusion,
        l.alpha,
        l.bbox[0],
        l.bbox[1],
        l.bbox[2],
        l.bbox[3],
        l.dims[0],
        l.dims[1],
        l.dims[2],
        l.location[0],
        l.location[1],
        l.location[2],
        l.rotation_y,
    );
    if let Some(score) = l.score {
        let _ = write!(s, " {score:.4}");
    }
    s
}

pub fn parse_label_text(text: &str, path: &Path) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |detail: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 15 && fields.len() != 16 {
            return Err(err(format!("expected 15 or 16 fields, found {}", fields.len())));
        }
        let num = |k: usize| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|_| err(format!("field {} is not a number: {:?}", k + 1, fields[k])))
        };
        let occlusion = fields[2]
            .parse::<i64>()
            .ok()
            .or_else(|| {
                fields[2]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0)
                    .map(|v| v as i64)
            })
            .filter(|v| (-1..=3).contains(v))
            .ok_or_else(|| err(format!("bad occlusion {:?}", fields[2])))?;
        out.push(LabelRecord {
            class: fields[0].to_string(),
            truncation: num(1)?,
            occlusion: occlusion as i8,
            alpha: num(3)?,
            bbox: [num(4)?, num(5)?, num(6)?, num(7)?],
            dims: [num(8)?, num(9)?, num(10)?],
            location: [num(11)?, num(12)?, num(13)?],
            rotation_y: num(14)?,
            score: if fields.len() == 16 { Some(num(15)?) } else { None },
        });
    }
    Ok(out)
}

pub fn write_label(labels: &[LabelRecord], path: &Path) -> Result<()> {
    let mut text = String::new();
    for l in labels {
        text.push_str(&format_label_line(l));
        text.push('\n');
    }
    super::write_atomic(path, text.as_bytes())
}

pub fn read_label(path: &Path) -> Result<Vec<LabelRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_label_text(&text, path)
}
