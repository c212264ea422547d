//! Processing variants.
//!
//! A preset selects the beam sets and return taken from the dense frames,
//! the post-processing chain and the label boxes. The eight built-in
//! presets are embedded from `presets/*.toml`; custom presets use the same
//! format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::LabelParams;
use crate::raycast::BeamSet;
use crate::shading::ShadingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitSelection {
    /// The first surface, glass included.
    First,
    /// The surface behind any glass.
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub beam_sets: Vec<BeamSet>,
    pub hit: HitSelection,
    /// Azimuth step of the output clouds, degrees.
    #[serde(default = "default_step")]
    pub azimuth_step_deg: f64,
    #[serde(default)]
    pub range_noise: bool,
    /// Compute intensities.
    #[serde(default)]
    pub shade: bool,
    /// Remove points whose intensity falls below zero after the offset.
    #[serde(default)]
    pub raydrop: bool,
    /// Write modeled intensities instead of zeros.
    #[serde(default)]
    pub write_intensity: bool,
    #[serde(default)]
    pub shading: ShadingParams,
    #[serde(default)]
    pub labels: LabelParams,
}

fn default_step() -> f64 {
    0.18
}

const BUILTIN: [(&str, &str); 8] = [
    ("first_hit", include_str!("../presets/first_hit.toml")),
    ("strongest", include_str!("../presets/strongest.toml")),
    (
        "strongest_origboxes",
        include_str!("../presets/strongest_origboxes.toml"),
    ),
    ("depth", include_str!("../presets/depth.toml")),
    ("dual", include_str!("../presets/dual.toml")),
    ("noise", include_str!("../presets/noise.toml")),
    ("intensity", include_str!("../presets/intensity.toml")),
    ("raydrop", include_str!("../presets/raydrop.toml")),
];

pub const PRESET_NAMES: [&str; 8] = [
    "first_hit",
    "strongest",
    "strongest_origboxes",
    "depth",
    "dual",
    "noise",
    "intensity",
    "raydrop",
];

impl Preset {
    pub fn builtin(name: &str) -> Result<Preset> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.join(", "),
            })?;
        Preset::from_toml(text)
    }

    pub fn builtin_text(name: &str) -> Option<&'static str> {
        BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
    }

    pub fn from_toml(text: &str) -> Result<Preset> {
        let p: Preset = toml::from_str(text).map_err(|e| Error::Config(format!("preset: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Preset> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Preset::from_toml(&text)
    }

    /// A built-in name, or else a path to a preset file.
    pub fn resolve(name_or_path: &str) -> Result<Preset> {
        if PRESET_NAMES.contains(&name_or_path) {
            return Preset::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        if name_or_path.ends_with(".toml") || path.is_file() {
            return Preset::load(path);
        }
        Preset::builtin(name_or_path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("preset name must be nonempty".into()));
        }
        if self.beam_sets.is_empty() {
            return Err(Error::Config(format!("preset {}: no beam sets", self.name)));
        }
        if self.beam_sets.contains(&BeamSet::Depth) && self.beam_sets.len() > 1 {
            return Err(Error::Config(format!(
                "preset {}: depth cannot be mixed with scanned sets",
                self.name
            )));
        }
        if !(self.azimuth_step_deg > 0.0 && self.azimuth_step_deg.is_finite()) {
            return Err(Error::range("azimuth_step_deg", "must be positive"));
        }
        if (self.raydrop || self.write_intensity) && !self.shade {
            return Err(Error::Config(format!(
                "preset {}: raydrop and write_intensity need shade = true",
                self.name
            )));
        }
        self.shading.validate()?;
        self.labels.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::BoxMode;

    #[test]
    fn all_builtins_parse() {
        for name in PRESET_NAMES {
            let p = Preset::builtin(name).unwrap();
            assert_eq!(p.name, name);
        }
        assert_eq!(
            Preset::builtin("strongest_origboxes").unwrap().labels.box_mode,
            BoxMode::Original
        );
        assert_eq!(Preset::builtin("first_hit").unwrap().hit, HitSelection::First);
        let i = Preset::builtin("intensity").unwrap();
        let r = Preset::builtin("raydrop").unwrap();
        assert!(i.write_intensity && !r.write_intensity);
        assert_eq!(i.shading, r.shading);
        assert_eq!(i.shading, crate::shading::ShadingParams::default());
    }

    #[test]
    fn unknown_name_lists_valid_names() {
        match Preset::resolve("lidar9000") {
            Err(Error::UnknownPreset { valid, .. }) => {
                for n in PRESET_NAMES {
                    assert!(valid.contains(n));
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_combinations() {
        let base = Preset::builtin_text("dual").unwrap();
        assert!(Preset::from_toml(&base.replace("hit = \"last\"", "hit = \"last\"\nraydrop = true")).is_err());
        assert!(Preset::from_toml(&base.replace("\"dual_lower\"]", "\"depth\"]")).is_err());
        assert!(Preset::from_toml(&format!("{base}\nextra = 1")).is_err());
    }
}
