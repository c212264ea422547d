use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kitti_io::{read_label, read_pointcloud, read_split, DatasetLayout, Split};
use crate::labels::{Difficulty, LabelRecord};
use crate::shading::intensity_histogram;

const HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StatsSummary {
    pub frames: usize,
    pub labels: usize,
    pub points: u64,
    pub intensity_mean: Option<f64>,
    pub zero_fraction: Option<f64>,
    /// Easy, moderate, hard, ignored.
    pub difficulty_counts: [usize; 4],
}

fn frame_ids(layout: &DatasetLayout) -> Result<Vec<u64>> {
    let mut ids = Vec::new();
    for s in [Split::Train, Split::Val] {
        let p = layout.split(s);
        if p.is_file() {
            ids.extend(read_split(&p)?);
        }
    }
    if ids.is_empty() {
        let dir = layout.root.join("label_2");
        if dir.is_dir() {
            for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                let name = entry.file_name();
                if let Some(id) = name.to_string_lossy().strip_suffix(".txt").and_then(|s| s.parse().ok()) {
                    ids.push(id);
                }
            }
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
}

fn scatter_svg(title: &str, xlabel: &str, ylabel: &str, pts: &[(f64, f64)], xr: (f64, f64), yr: (f64, f64)) -> String {
    let (w, h, m) = (480.0, 360.0, 40.0);
    let sx = |x: f64| m + (x - xr.0) / (xr.1 - xr.0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - yr.0) / (yr.1 - yr.0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        w / 2.0,
        h - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">{ylabel}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for &(x, y) in pts {
        if (xr.0..=xr.1).contains(&x) && (yr.0..=yr.1).contains(&y) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="1.5" fill="steelblue"/>"#,
                sx(x),
                sy(y)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn histogram_svg(counts: &[u64]) -> String {
    let (w, h, m) = (480.0, 360.0, 40.0);
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bw = (w - 2.0 * m) / counts.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">intensity</text>"#,
        w / 2.0
    );
    for (i, &c) in counts.iter().enumerate() {
        let bh = c as f64 / max * (h - 2.0 * m);
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="steelblue"/>"#,
            m + i as f64 * bw,
            h - m - bh,
            bw,
            bh
        );
    }
    s.push_str("</svg>\n");
    s
}

fn histogram_csv(counts: &[u64]) -> String {
    let mut s = String::from("bin_lo,bin_hi,count\n");
    let n = counts.len() as f64;
    for (i, c) in counts.iter().enumerate() {
        let _ = writeln!(s, "{:.4},{:.4},{c}", i as f64 / n, (i + 1) as f64 / n);
    }
    s
}

/// Writes box-center scatter data (BEV and side view), per-difficulty
/// label counts, the intensity histogram and a summary for the dataset at
/// `root` into `out`, plus SVG plots of each.
pub fn cmd_stats(root: &Path, out: &Path) -> Result<StatsSummary> {
    let layout = DatasetLayout::new(root);
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ids = frame_ids(&layout)?;

    let mut bev = String::from("frame,x,z\n");
    let mut side = String::from("frame,z,y\n");
    let mut bev_pts = Vec::new();
    let mut side_pts = Vec::new();
    let mut summary = StatsSummary {
        frames: ids.len(),
        ..Default::default()
    };
    let mut intensities = Vec::new();
    for &id in &ids {
        let lp = layout.label(id);
        let labels: Vec<LabelRecord> = if lp.is_file() { read_label(&lp)? } else { Vec::new() };
        for l in &labels {
            let [x, y, z] = l.location;
            let _ = writeln!(bev, "{id},{x},{z}");
            let _ = writeln!(side, "{id},{z},{y}");
            bev_pts.push((x, z));
            side_pts.push((z, -y));
            summary.labels += 1;
            summary.difficulty_counts[l.difficulty() as usize] += 1;
        }
        let vp = layout.velodyne(id);
        if vp.is_file() {
            intensities.extend(read_pointcloud(&vp)?.iter().map(|p| p.intensity as f64));
        }
    }
    summary.points = intensities.len() as u64;
    if !intensities.is_empty() {
        let n = intensities.len() as f64;
        summary.intensity_mean = Some(intensities.iter().sum::<f64>() / n);
        summary.zero_fraction = Some(intensities.iter().filter(|v| **v == 0.0).count() as f64 / n);
    }
    let hist = intensity_histogram(&intensities, HISTOGRAM_BINS);

    let mut diff = String::from("difficulty,count\n");
    for d in [
        Difficulty::Easy,
        Difficulty::Moderate,
        Difficulty::Hard,
        Difficulty::Ignored,
    ] {
        let _ = writeln!(diff, "{},{}", d.name(), summary.difficulty_counts[d as usize]);
    }
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut sum = String::from("key,value\n");
    let _ = writeln!(sum, "frames,{}", summary.frames);
    let _ = writeln!(sum, "labels,{}", summary.labels);
    let _ = writeln!(sum, "points,{}", summary.points);
    let _ = writeln!(sum, "intensity_mean,{}", opt(summary.intensity_mean));
    let _ = writeln!(sum, "zero_fraction,{}", opt(summary.zero_fraction));

    write(out, "boxes_bev.csv", &bev)?;
    write(out, "boxes_side.csv", &side)?;
    write(out, "difficulty_counts.csv", &diff)?;
    write(out, "intensity_histogram.csv", &histogram_csv(&hist))?;
    write(out, "summary.csv", &sum)?;
    write(
        out,
        "boxes_bev.svg",
        &scatter_svg(
            "box centers, top view",
            "x [m]",
            "z [m]",
            &bev_pts,
            (-40.0, 40.0),
            (0.0, 80.0),
        ),
    )?;
    write(
        out,
        "boxes_side.svg",
        &scatter_svg(
            "box centers, side view",
            "z [m]",
            "height [m]",
            &side_pts,
            (0.0, 80.0),
            (-4.0, 4.0),
        ),
    )?;
    write(out, "intensity_histogram.svg", &histogram_svg(&hist))?;
    Ok(summary)
}

/// Histogram CSV of all velodyne intensities under `root`.
pub fn cmd_intensity_histogram(root: &Path, bins: usize) -> Result<String> {
    let layout = DatasetLayout::new(root);
    let mut values = Vec::new();
    for id in frame_ids(&layout)? {
        let vp = layout.velodyne(id);
        if vp.is_file() {
            values.extend(read_pointcloud(&vp)?.iter().map(|p| p.intensity as f64));
        }
    }
    Ok(histogram_csv(&intensity_histogram(&values, bins)))
}
