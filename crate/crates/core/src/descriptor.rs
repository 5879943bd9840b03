//! View features, element-wise max pooling and the end-to-end global
//! feature pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::frame::{apply_canonicalization, canonicalization, compute_reference_frame, Canonicalization};
use crate::ortho::{project_all, Resolution, View, ViewGrid};

/// Gradient orientation bins per block.
pub const ORIENTATION_BINS: usize = 8;

/// Values emitted per block: mean, occupancy, then the orientation histogram.
pub const BLOCK_LEN: usize = 2 + ORIENTATION_BINS;

pub const DEFAULT_BLOCKS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewFeature {
    pub values: Vec<f64>,
    pub descriptor_id: String,
}

impl ViewFeature {
    pub fn new(values: Vec<f64>, descriptor_id: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("feature value {v}")));
        }
        Ok(Self {
            values,
            descriptor_id: descriptor_id.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Unit-norm pooled object descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalFeature {
    values: Vec<f64>,
    descriptor_id: String,
}

impl GlobalFeature {
    /// Normalizes `values` to unit L2 norm.
    pub fn from_unnormalized(values: Vec<f64>, descriptor_id: impl Into<String>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("feature value {v}")));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / norm).collect(),
            descriptor_id: descriptor_id.into(),
        })
    }

    /// Accepts stored values as-is after checking they are unit length.
    pub fn from_normalized(values: Vec<f64>, descriptor_id: impl Into<String>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("feature value {v}")));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::BadConfig(format!("stored feature has norm {norm}, expected 1")));
        }
        Ok(Self {
            values,
            descriptor_id: descriptor_id.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn descriptor_id(&self) -> &str {
        &self.descriptor_id
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Whitespace separated decimals on a single line.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        parts.join(" ") + "\n"
    }
}

/// Turns one view grid into a fixed-length feature.
pub trait ViewDescriptor {
    fn descriptor_id(&self, resolution: Resolution) -> String;

    fn describe(&self, grid: &ViewGrid) -> Result<ViewFeature>;
}

/// Block mean, block occupancy and a magnitude-weighted gradient
/// orientation histogram per block, over a `blocks × blocks` partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGrad {
    pub blocks: usize,
}

impl Default for BlockGrad {
    fn default() -> Self {
        Self { blocks: DEFAULT_BLOCKS }
    }
}

impl BlockGrad {
    pub fn feature_len(&self) -> usize {
        self.blocks * self.blocks * BLOCK_LEN
    }

    pub fn check(&self, resolution: Resolution) -> Result<()> {
        let b = self.blocks;
        if b == 0 || !resolution.width.is_multiple_of(b) || !resolution.height.is_multiple_of(b) {
            return Err(Error::BadConfig(format!(
                "{b} blocks do not divide a {}x{} grid",
                resolution.width, resolution.height
            )));
        }
        Ok(())
    }
}

/// Central-difference gradient `(gx, gy)`. Border cells have no full
/// neighbourhood and get a zero gradient. `gy` points down the rows.
pub fn gradient(grid: &ViewGrid, row: usize, col: usize) -> (f64, f64) {
    let (w, h) = (grid.width(), grid.height());
    if row == 0 || col == 0 || row + 1 >= h || col + 1 >= w {
        return (0.0, 0.0);
    }
    let gx = (grid.get(row, col + 1) - grid.get(row, col - 1)) * 0.5;
    let gy = (grid.get(row + 1, col) - grid.get(row - 1, col)) * 0.5;
    (gx, gy)
}

/// Orientation bin of a gradient over the full circle.
pub fn orientation_bin(gx: f64, gy: f64) -> usize {
    let angle = gy.atan2(gx);
    let t = (angle + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
    ((t * ORIENTATION_BINS as f64).floor() as usize) % ORIENTATION_BINS
}

impl ViewDescriptor for BlockGrad {
    fn descriptor_id(&self, resolution: Resolution) -> String {
        format!("block-grad:{}x{}:b{}", resolution.width, resolution.height, self.blocks)
    }

    fn describe(&self, grid: &ViewGrid) -> Result<ViewFeature> {
        let resolution = grid.resolution();
        self.check(resolution)?;
        let b = self.blocks;
        let (bw, bh) = (resolution.width / b, resolution.height / b);
        let cells = (bw * bh) as f64;
        let mut out = Vec::with_capacity(self.feature_len());
        for brow in 0..b {
            for bcol in 0..b {
                let mut sum = 0.0;
                let mut occupied = 0usize;
                let mut hist = [0.0; ORIENTATION_BINS];
                for row in brow * bh..(brow + 1) * bh {
                    for col in bcol * bw..(bcol + 1) * bw {
                        let v = grid.get(row, col);
                        sum += v;
                        if v > 0.0 {
                            occupied += 1;
                        }
                        let (gx, gy) = gradient(grid, row, col);
                        let magnitude = (gx * gx + gy * gy).sqrt();
                        if magnitude > 0.0 {
                            hist[orientation_bin(gx, gy)] += magnitude;
                        }
                    }
                }
                out.push(sum / cells);
                out.push(occupied as f64 / cells);
                out.extend(hist.iter().map(|m| m / cells));
            }
        }
        ViewFeature::new(out, self.descriptor_id(resolution))
    }
}

/// Baseline block-gradient descriptor of one grid.
pub fn describe_view(grid: &ViewGrid, blocks: usize) -> Result<ViewFeature> {
    BlockGrad { blocks }.describe(grid)
}

/// Reads a precomputed view embedding: reals separated by whitespace or commas.
pub fn load_external_view_feature(path: &Path, expected_dim: usize) -> Result<ViewFeature> {
    let text = std::fs::read_to_string(path)?;
    let values = parse_feature_text(&text)?;
    if values.len() != expected_dim {
        return Err(Error::DimensionMismatch {
            expected: expected_dim,
            found: values.len(),
        });
    }
    let basename = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    ViewFeature::new(values, format!("external:{basename}"))
}

pub fn parse_feature_text(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for token in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let v: f64 = token.parse().map_err(|_| Error::MalformedData {
                line: i + 1,
                reason: format!("`{token}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue(format!("`{token}` on line {}", i + 1)));
            }
            values.push(v);
        }
    }
    Ok(values)
}

/// Element-wise maximum of two equal-length vectors.
pub fn elementwise_max(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.max(*y)).collect())
}

/// Pooled vector before normalization.
pub fn pool_max_raw(front: &ViewFeature, top: &ViewFeature, right: &ViewFeature) -> Result<Vec<f64>> {
    for other in [top, right] {
        if other.descriptor_id != front.descriptor_id {
            return Err(Error::DescriptorMismatch {
                expected: front.descriptor_id.clone(),
                found: other.descriptor_id.clone(),
            });
        }
    }
    elementwise_max(&elementwise_max(&front.values, &top.values)?, &right.values)
}

/// Element-wise max of the three view features, L2-normalized.
pub fn pool_max(front: &ViewFeature, top: &ViewFeature, right: &ViewFeature) -> Result<GlobalFeature> {
    let pooled = pool_max_raw(front, top, right)?;
    GlobalFeature::from_unnormalized(pooled, front.descriptor_id.clone())
}

/// Pools `<base>.front.feat`, `<base>.top.feat` and `<base>.right.feat`.
/// The views are retagged `external:d<D>` so that every instance of a
/// dataset shares one descriptor id.
pub fn external_global_feature(base: &Path, dim: usize) -> Result<GlobalFeature> {
    let id = format!("external:d{dim}");
    let load = |view: View| -> Result<ViewFeature> {
        let mut name = base.file_name().unwrap_or_default().to_os_string();
        name.push(format!(".{}.feat", view.name()));
        let mut f = load_external_view_feature(&base.with_file_name(name), dim)?;
        f.descriptor_id = id.clone();
        Ok(f)
    };
    pool_max(&load(View::Front)?, &load(View::Top)?, &load(View::Right)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub resolution: Resolution,
    pub blocks: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            resolution: Resolution::default(),
            blocks: DEFAULT_BLOCKS,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.resolution.validate()?;
        BlockGrad { blocks: self.blocks }.check(self.resolution)
    }

    pub fn descriptor_id(&self) -> String {
        BlockGrad { blocks: self.blocks }.descriptor_id(self.resolution)
    }
}

/// Every intermediate of the global feature pipeline for one cloud.
#[derive(Debug, Clone)]
pub struct ObjectAnalysis {
    pub canonicalization: Canonicalization,
    pub views: [ViewGrid; 3],
    pub view_features: [ViewFeature; 3],
    pub feature: GlobalFeature,
}

impl ObjectAnalysis {
    pub fn front(&self) -> &ViewGrid {
        &self.views[0]
    }
}

/// Reference frame → canonical cloud → three projections → per-view
/// descriptors → max pooling.
pub fn analyze(cloud: &PointCloud, config: &FeatureConfig) -> Result<ObjectAnalysis> {
    config.validate()?;
    let frame = compute_reference_frame(cloud)?;
    let canon = canonicalization(cloud, &frame)?;
    let canonical = apply_canonicalization(cloud, &canon);
    let views = project_all(&canonical, config.resolution)?;
    let descriptor = BlockGrad { blocks: config.blocks };
    let [f, t, r] = [&views[0], &views[1], &views[2]].map(|g| descriptor.describe(g));
    let view_features = [f?, t?, r?];
    let feature = pool_max(&view_features[0], &view_features[1], &view_features[2])?;
    Ok(ObjectAnalysis {
        canonicalization: canon,
        views,
        view_features,
        feature,
    })
}

pub fn global_feature(cloud: &PointCloud, config: &FeatureConfig) -> Result<GlobalFeature> {
    Ok(analyze(cloud, config)?.feature)
}
