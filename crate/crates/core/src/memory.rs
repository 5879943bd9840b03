//! Instance-based category memory with nearest-neighbour recognition.
//!
//! Teaching only ever appends; stored instances are never rewritten, so new
//! categories can be added at any point without touching existing knowledge.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::descriptor::GlobalFeature;
use crate::error::{Error, Result};

/// Denominator guard for the chi-square distance.
pub const CHI_SQUARE_EPSILON: f64 = 1e-12;

pub const SNAPSHOT_FORMAT: &str = "orthoview-memory";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    #[default]
    Cosine,
    ChiSquare,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Euclidean, Metric::Cosine, Metric::ChiSquare];

    /// Distance between two equal-length vectors.
    ///
    /// Cosine distance is evaluated as `½‖f − g‖²`, which equals `1 − f·g`
    /// for unit vectors and is exactly zero for identical inputs. Chi-square
    /// uses absolute values in the denominator so it stays non-negative on
    /// signed (externally computed) features.
    pub fn distance(self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        match self {
            Metric::Euclidean => f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Metric::Cosine => 0.5 * f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
            Metric::ChiSquare => f
                .iter()
                .zip(g)
                .map(|(a, b)| (a - b) * (a - b) / (a.abs() + b.abs() + CHI_SQUARE_EPSILON))
                .sum(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
            Metric::ChiSquare => "chisquare",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            "chisquare" | "chi-square" | "chi2" => Ok(Metric::ChiSquare),
            _ => Err(Error::ConfigInvalid(format!("unknown metric `{s}`"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub distance: f64,
    /// Distance to the closest instance of any other category.
    pub runner_up_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Known(Prediction),
    Unknown,
}

impl Classification {
    pub fn label(&self) -> Option<&str> {
        match self {
            Classification::Known(p) => Some(&p.label),
            Classification::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryStats {
    /// Instance count per label, in creation order.
    pub counts: Vec<(String, usize)>,
    pub categories: usize,
    pub total_instances: usize,
    pub average_instances: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryMemory {
    categories: HashMap<String, Vec<GlobalFeature>>,
    creation_order: Vec<String>,
}

impl CategoryMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.creation_order.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.creation_order
    }

    pub fn instances(&self, label: &str) -> Option<&[GlobalFeature]> {
        self.categories.get(label).map(Vec::as_slice)
    }

    fn reference(&self) -> Option<&GlobalFeature> {
        self.creation_order
            .first()
            .and_then(|l| self.categories.get(l))
            .and_then(|v| v.first())
    }

    pub fn dimension(&self) -> Option<usize> {
        self.reference().map(GlobalFeature::dim)
    }

    pub fn descriptor_id(&self) -> Option<&str> {
        self.reference().map(GlobalFeature::descriptor_id)
    }

    fn check_compatible(&self, feature: &GlobalFeature) -> Result<()> {
        if let Some(reference) = self.reference() {
            if reference.dim() != feature.dim() {
                return Err(Error::DimensionMismatch {
                    expected: reference.dim(),
                    found: feature.dim(),
                });
            }
            if reference.descriptor_id() != feature.descriptor_id() {
                return Err(Error::DescriptorMismatch {
                    expected: reference.descriptor_id().to_owned(),
                    found: feature.descriptor_id().to_owned(),
                });
            }
        }
        Ok(())
    }

    /// Appends an instance, creating the category if needed.
    pub fn teach(&mut self, label: &str, feature: GlobalFeature) -> Result<()> {
        self.check_compatible(&feature)?;
        match self.categories.get_mut(label) {
            Some(instances) => instances.push(feature),
            None => {
                self.categories.insert(label.to_owned(), vec![feature]);
                self.creation_order.push(label.to_owned());
            }
        }
        Ok(())
    }

    pub fn forget(&mut self, label: &str) -> Result<()> {
        if self.categories.remove(label).is_none() {
            return Err(Error::UnknownLabel(label.to_owned()));
        }
        self.creation_order.retain(|l| l != label);
        Ok(())
    }

    /// Nearest stored instance under `metric`. Exact distance ties go to the
    /// lexicographically smallest label; anything farther than `tau_unknown`
    /// is reported as unknown.
    pub fn classify(&self, feature: &GlobalFeature, metric: Metric, tau_unknown: f64) -> Result<Classification> {
        self.check_compatible(feature)?;
        self.classify_values(feature.values(), metric, tau_unknown)
    }

    /// [`classify`](Self::classify) on a raw query vector; only the
    /// dimension is checked.
    pub fn classify_values(&self, query: &[f64], metric: Metric, tau_unknown: f64) -> Result<Classification> {
        let Some(dim) = self.dimension() else {
            return Ok(Classification::Unknown);
        };
        if query.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: query.len(),
            });
        }

        let mut best: Option<(&str, f64)> = None;
        let mut second: Option<f64> = None;
        for label in &self.creation_order {
            let nearest = self.categories[label]
                .iter()
                .map(|inst| metric.distance(query, inst.values()))
                .fold(f64::INFINITY, f64::min);
            match best {
                Some((best_label, best_d))
                    if nearest > best_d || (nearest == best_d && label.as_str() > best_label) =>
                {
                    second = Some(second.map_or(nearest, |s| s.min(nearest)));
                }
                _ => {
                    if let Some((_, d)) = best {
                        second = Some(second.map_or(d, |s| s.min(d)));
                    }
                    best = Some((label, nearest));
                }
            }
        }
        let (label, distance) = best.expect("memory is non-empty");
        if distance > tau_unknown {
            return Ok(Classification::Unknown);
        }
        Ok(Classification::Known(Prediction {
            label: label.to_owned(),
            distance,
            runner_up_distance: second,
        }))
    }

    pub fn stats(&self) -> MemoryStats {
        let counts: Vec<(String, usize)> = self
            .creation_order
            .iter()
            .map(|l| (l.clone(), self.categories[l].len()))
            .collect();
        let total: usize = counts.iter().map(|(_, n)| n).sum();
        let categories = counts.len();
        MemoryStats {
            counts,
            categories,
            total_instances: total,
            average_instances: if categories == 0 {
                0.0
            } else {
                total as f64 / categories as f64
            },
        }
    }

    /// Raw bit patterns of every stored value, in creation order.
    pub fn feature_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for label in &self.creation_order {
            for inst in &self.categories[label] {
                for v in inst.values() {
                    out.extend_from_slice(&v.to_bits().to_le_bytes());
                }
            }
        }
        out
    }

    pub fn to_snapshot(&self) -> MemorySnapshot {
        MemorySnapshot {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            descriptor_id: self.descriptor_id().map(str::to_owned),
            dimension: self.dimension(),
            categories: self
                .creation_order
                .iter()
                .map(|l| SnapshotCategory {
                    label: l.clone(),
                    instances: self.categories[l].iter().map(|f| f.values().to_vec()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_snapshot(snapshot: MemorySnapshot) -> Result<Self> {
        if snapshot.format != SNAPSHOT_FORMAT || snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::UnsupportedSnapshot(format!(
                "{} v{}",
                snapshot.format, snapshot.version
            )));
        }
        let mut memory = Self::new();
        if snapshot.categories.is_empty() {
            return Ok(memory);
        }
        let id = snapshot
            .descriptor_id
            .ok_or_else(|| Error::UnsupportedSnapshot("missing descriptor_id".into()))?;
        for category in snapshot.categories {
            if category.instances.is_empty() {
                return Err(Error::UnsupportedSnapshot(format!(
                    "category `{}` has no instances",
                    category.label
                )));
            }
            if memory.categories.contains_key(&category.label) {
                return Err(Error::UnsupportedSnapshot(format!(
                    "duplicate category `{}`",
                    category.label
                )));
            }
            for values in category.instances {
                memory.teach(&category.label, GlobalFeature::from_normalized(values, id.clone())?)?;
            }
        }
        Ok(memory)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_snapshot())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Versioned JSON document for save/resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySnapshot {
    pub format: String,
    pub version: u32,
    pub descriptor_id: Option<String>,
    pub dimension: Option<usize>,
    pub categories: Vec<SnapshotCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotCategory {
    pub label: String,
    pub instances: Vec<Vec<f64>>,
}
