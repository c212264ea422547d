use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Broad material category used by the sensor model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum MaterialKind {
    Opaque = 0,
    Glass = 1,
    RetroReflective = 2,
}

impl MaterialKind {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(MaterialKind::Opaque),
            1 => Some(MaterialKind::Glass),
            2 => Some(MaterialKind::RetroReflective),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub kind: MaterialKind,
    /// Grayscale reflectance in [0, 1].
    pub albedo: f64,
}

impl Material {
    /// Builds a material whose kind comes from the default name classifier.
    pub fn named(name: &str, albedo: f64) -> Result<Self> {
        Material::classified(name, albedo, &MaterialClassifier::default())
    }

    pub fn classified(name: &str, albedo: f64, classifier: &MaterialClassifier) -> Result<Self> {
        if name.is_empty() {
            return Err(Error::Config("material name must be nonempty".into()));
        }
        if !(0.0..=1.0).contains(&albedo) {
            return Err(Error::range("albedo", format!("{albedo} not in [0, 1]")));
        }
        Ok(Material {
            name: name.to_string(),
            kind: classifier.classify(name),
            albedo,
        })
    }
}

/// Name-based lookup tables.
///
/// A name is split into lowercase alphanumeric tokens. It is glass when a
/// token starts with one of `glass_prefixes` and no token starts with one of
/// `glass_exceptions`; otherwise it is retro-reflective when a token contains
/// one of `retro_tokens`; otherwise opaque.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialClassifier {
    pub glass_prefixes: Vec<String>,
    pub glass_exceptions: Vec<String>,
    pub retro_tokens: Vec<String>,
}

impl Default for MaterialClassifier {
    fn default() -> Self {
        MaterialClassifier {
            glass_prefixes: vec!["glass".into(), "window".into()],
            glass_exceptions: vec!["glasscontainer".into()],
            retro_tokens: vec!["plate".into(), "signface".into()],
        }
    }
}

impl MaterialClassifier {
    pub fn classify(&self, name: &str) -> MaterialKind {
        let lower = name.to_ascii_lowercase();
        let tokens: Vec<&str> = lower
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|t| !t.is_empty())
            .collect();
        let starts = |list: &[String]| {
            tokens
                .iter()
                .any(|t| list.iter().any(|k| t.starts_with(k.to_ascii_lowercase().as_str())))
        };
        if starts(&self.glass_prefixes) && !starts(&self.glass_exceptions) {
            return MaterialKind::Glass;
        }
        let retro = tokens.iter().any(|t| {
            self.retro_tokens
                .iter()
                .any(|k| t.contains(k.to_ascii_lowercase().as_str()))
        });
        if retro {
            MaterialKind::RetroReflective
        } else {
            MaterialKind::Opaque
        }
    }
}

/// Classifies a material name with the default tables. Unknown names are
/// opaque.
pub fn classify_material(name: &str) -> MaterialKind {
    MaterialClassifier::default().classify(name)
}
