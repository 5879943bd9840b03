//! Dataset loading (`<root>/<category>/<instance>.<ext>`) and synthetic
//! category datasets built from desk-scale shapes.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::{
    apply_transform, generate_shape, read_cloud, write_cloud, CloudFormat, PointCloud, RigidScaleTransform, ShapeKind,
};
use crate::descriptor::{external_global_feature, global_feature, FeatureConfig};
use crate::error::{Error, Result};
use crate::protocol::{FeatureDataset, Instance};

/// Where instance features come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureSource {
    /// Clouds on disk, described in-process.
    Clouds(FeatureConfig),
    /// Precomputed `<instance>.<view>.feat` files of the given dimension.
    External { dim: usize },
}

#[derive(Debug, Clone)]
pub struct LabeledCloud {
    pub label: String,
    pub instance_id: String,
    pub cloud: PointCloud,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    Ok(entries)
}

fn category_dirs(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !root.is_dir() {
        return Err(Error::DatasetTooSmall(format!("{} is not a directory", root.display())));
    }
    Ok(sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .filter_map(|p| {
            let label = p.file_name()?.to_str()?.to_owned();
            Some((label, p))
        })
        .collect())
}

/// Every parseable cloud below `root`, in sorted path order.
pub fn load_cloud_dataset(root: &Path) -> Result<Vec<LabeledCloud>> {
    let mut out = Vec::new();
    for (label, dir) in category_dirs(root)? {
        for path in sorted_entries(&dir)? {
            if !path.is_file() || CloudFormat::from_path(&path).is_none() {
                continue;
            }
            let cloud = read_cloud(&path)?;
            let instance_id = format!("{label}/{}", path.file_stem().unwrap_or_default().to_string_lossy());
            out.push(LabeledCloud {
                label: label.clone(),
                instance_id,
                cloud,
            });
        }
    }
    Ok(out)
}

/// Describes every cloud. Clouds without a usable reference frame are
/// rejected with their instance id attached.
pub fn describe_clouds(
    clouds: &[LabeledCloud],
    config: &FeatureConfig,
    context: Option<&str>,
) -> Result<FeatureDataset> {
    let mut dataset = FeatureDataset::new();
    for c in clouds {
        let feature = global_feature(&c.cloud, config).map_err(|e| match e {
            Error::DegenerateCloud(m) => Error::DegenerateCloud(format!("{}: {m}", c.instance_id)),
            other => other,
        })?;
        dataset.push(
            &c.label,
            Instance {
                id: c.instance_id.clone(),
                context: context.map(str::to_owned),
                feature,
            },
        );
    }
    Ok(dataset)
}

/// Pools `<root>/<category>/<instance>.{front,top,right}.feat`.
pub fn load_external_dataset(root: &Path, dim: usize, context: Option<&str>) -> Result<FeatureDataset> {
    let mut dataset = FeatureDataset::new();
    for (label, dir) in category_dirs(root)? {
        for path in sorted_entries(&dir)? {
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let Some(stem) = name.strip_suffix(".front.feat") else {
                continue;
            };
            let feature = external_global_feature(&dir.join(stem), dim)?;
            dataset.push(
                &label,
                Instance {
                    id: format!("{label}/{stem}"),
                    context: context.map(str::to_owned),
                    feature,
                },
            );
        }
    }
    Ok(dataset)
}

pub fn load_dataset(root: &Path, source: FeatureSource, context: Option<&str>) -> Result<FeatureDataset> {
    match source {
        FeatureSource::Clouds(config) => describe_clouds(&load_cloud_dataset(root)?, &config, context),
        FeatureSource::External { dim } => load_external_dataset(root, dim, context),
    }
}

/// Merges datasets category by category, keeping first-seen category order.
pub fn merge(datasets: Vec<FeatureDataset>) -> FeatureDataset {
    let mut out = FeatureDataset::new();
    for d in datasets {
        for c in d.categories {
            for inst in c.instances {
                out.push(&c.label, inst);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Synthetic categories
// ---------------------------------------------------------------------------

/// Ten shape categories whose canonical views are mutually distinct.
pub fn synthetic_categories() -> Vec<(String, ShapeKind)> {
    [
        (
            "brick",
            ShapeKind::Box {
                wx: 4.0,
                wy: 2.0,
                wz: 1.0,
            },
        ),
        (
            "slab",
            ShapeKind::Box {
                wx: 6.0,
                wy: 2.0,
                wz: 0.5,
            },
        ),
        (
            "plate",
            ShapeKind::Box {
                wx: 3.0,
                wy: 2.0,
                wz: 0.2,
            },
        ),
        (
            "rod",
            ShapeKind::Cylinder {
                radius: 0.25,
                height: 4.0,
            },
        ),
        (
            "can",
            ShapeKind::Cylinder {
                radius: 1.0,
                height: 3.0,
            },
        ),
        (
            "disc",
            ShapeKind::Cylinder {
                radius: 1.0,
                height: 0.4,
            },
        ),
        (
            "drum",
            ShapeKind::Cylinder {
                radius: 1.0,
                height: 1.2,
            },
        ),
        (
            "bracket",
            ShapeKind::LShape {
                arm: 1.0,
                thickness: 0.2,
            },
        ),
        (
            "corner",
            ShapeKind::LShape {
                arm: 1.0,
                thickness: 0.45,
            },
        ),
        (
            "block_l",
            ShapeKind::LShape {
                arm: 1.0,
                thickness: 0.6,
            },
        ),
    ]
    .into_iter()
    .map(|(l, k)| (l.to_owned(), k))
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub categories: Vec<(String, ShapeKind)>,
    pub instances_per_category: usize,
    pub n_points: usize,
    /// Sensor noise relative to the shape's own size (before random scaling).
    pub noise_sigma: f64,
    pub seed: u64,
    /// Uniform scale range applied to every instance.
    pub scale_range: (f64, f64),
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            categories: synthetic_categories(),
            instances_per_category: 30,
            n_points: 2000,
            noise_sigma: 0.01,
            seed: 1,
            scale_range: (0.05, 0.3),
        }
    }
}

/// Each instance is a freshly sampled shape under a random pose and scale.
pub fn synthetic_clouds(spec: &SyntheticSpec) -> Result<Vec<LabeledCloud>> {
    let mut out = Vec::new();
    for (ci, (label, kind)) in spec.categories.iter().enumerate() {
        for k in 0..spec.instances_per_category {
            let seed = spec
                .seed
                .wrapping_mul(1_000_003)
                .wrapping_add((ci as u64) << 20)
                .wrapping_add(k as u64);
            let shape = generate_shape(*kind, spec.n_points, spec.noise_sigma, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
            let pose = RigidScaleTransform::random(&mut rng, spec.scale_range, 1.0);
            out.push(LabeledCloud {
                label: label.clone(),
                instance_id: format!("{label}/{label}_{k:03}"),
                cloud: apply_transform(&shape, &pose),
            });
        }
    }
    Ok(out)
}

/// Writes clouds to `<root>/<category>/<instance>.<ext>`.
pub fn write_cloud_dataset(root: &Path, clouds: &[LabeledCloud], format: CloudFormat) -> Result<()> {
    for c in clouds {
        let name = c.instance_id.rsplit('/').next().unwrap_or(&c.instance_id);
        let dir = root.join(&c.label);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(
            dir.join(format!("{name}.{}", format.extension())),
            write_cloud(&c.cloud, format)?,
        )?;
    }
    Ok(())
}
