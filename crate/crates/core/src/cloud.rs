//! Point clouds: ASCII PCD/PLY/XYZ parsing and writing, rigid+scale
//! transforms and synthetic surface-sampled shapes.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, Point3, Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// Tolerance used when validating rotation matrices.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Smallest point count accepted by [`generate_shape`].
pub const MIN_GENERATED_POINTS: usize = 50;

/// A set of 3D points in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    source_id: Option<String>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3<f64>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFiniteValue(format!("point {p:?}")));
        }
        Ok(Self {
            points,
            source_id: None,
        })
    }

    pub fn from_xyz(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
    }

    pub(crate) fn from_trusted(points: Vec<Point3<f64>>, source_id: Option<String>) -> Self {
        debug_assert!(points.iter().all(|p| p.iter().all(|c| c.is_finite())));
        Self { points, source_id }
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = Some(id.into());
        self
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ensure_non_empty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }

    /// Adds isotropic Gaussian noise, deterministic in `seed`.
    pub fn with_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidDimension(format!("noise sigma {sigma}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = self.points.clone();
        add_noise(&mut points, sigma, &mut rng);
        Ok(Self::from_trusted(points, self.source_id.clone()))
    }
}

/// Uniform scale, then rotation, then translation: `p ↦ s·R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidScaleTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    scale: f64,
}

impl RigidScaleTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidTransform(format!("scale {scale} must be positive")));
        }
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidTransform("non-finite translation".into()));
        }
        let gram = rotation.transpose() * rotation;
        if (gram - Matrix3::identity()).abs().max() > ROTATION_TOLERANCE {
            return Err(Error::InvalidTransform("rotation is not orthonormal".into()));
        }
        if (rotation.determinant() - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::InvalidTransform("rotation determinant is not +1".into()));
        }
        Ok(Self {
            rotation,
            translation,
            scale,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    pub fn from_rotation(rotation: UnitQuaternion<f64>) -> Self {
        Self {
            rotation: rotation.to_rotation_matrix().into_inner(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    /// Random rotation (uniform on SO(3)), scale uniform in `scale_range`,
    /// translation uniform in `[-max_translation, max_translation]³`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, scale_range: (f64, f64), max_translation: f64) -> Self {
        let rotation = random_rotation(rng);
        let scale = if scale_range.0 == scale_range.1 {
            scale_range.0
        } else {
            rng.random_range(scale_range.0..scale_range.1)
        };
        let translation = if max_translation > 0.0 {
            Vector3::from_fn(|_, _| rng.random_range(-max_translation..max_translation))
        } else {
            Vector3::zeros()
        };
        Self {
            rotation: rotation.to_rotation_matrix().into_inner(),
            translation,
            scale,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_matrix(&self.rotation)
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.scale * (self.rotation * p.coords) + self.translation)
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn compose(&self, first: &RigidScaleTransform) -> Self {
        Self {
            rotation: self.rotation * first.rotation,
            translation: self.scale * (self.rotation * first.translation) + self.translation,
            scale: self.scale * first.scale,
        }
    }
}

/// Uniformly distributed rotation from a normalized 4D Gaussian sample.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        if quat.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(quat);
        }
    }
}

/// Maps every point through `t`.
pub fn apply_transform(cloud: &PointCloud, t: &RigidScaleTransform) -> PointCloud {
    let points = cloud.points.iter().map(|p| t.transform_point(p)).collect();
    PointCloud::from_trusted(points, cloud.source_id.clone())
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CloudFormat {
    PcdAscii,
    PlyAscii,
    Xyz,
}

impl CloudFormat {
    pub const ALL: [CloudFormat; 3] = [CloudFormat::PcdAscii, CloudFormat::PlyAscii, CloudFormat::Xyz];

    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pcd" => Some(Self::PcdAscii),
            "ply" => Some(Self::PlyAscii),
            "xyz" | "txt" => Some(Self::Xyz),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::PcdAscii => "pcd",
            Self::PlyAscii => "ply",
            Self::Xyz => "xyz",
        }
    }
}

/// Parses an ASCII cloud body. Attributes other than x, y, z are ignored.
pub fn parse_cloud(text: &str, format: CloudFormat) -> Result<PointCloud> {
    let points = match format {
        CloudFormat::PcdAscii => parse_pcd(text)?,
        CloudFormat::PlyAscii => parse_ply(text)?,
        CloudFormat::Xyz => parse_xyz(text)?,
    };
    Ok(PointCloud::from_trusted(points, None))
}

/// Reads a cloud file, choosing the format by extension. The file stem
/// becomes the source id.
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    let format = CloudFormat::from_path(path)
        .ok_or_else(|| Error::MalformedHeader(format!("unrecognized cloud extension: {}", path.display())))?;
    let text = std::fs::read_to_string(path)?;
    let cloud = parse_cloud(&text, format)?;
    Ok(match path.file_stem().and_then(|s| s.to_str()) {
        Some(stem) => cloud.with_source_id(stem),
        None => cloud,
    })
}

pub fn write_cloud(cloud: &PointCloud, format: CloudFormat) -> Result<String> {
    cloud.ensure_non_empty()?;
    let n = cloud.len();
    let mut out = String::new();
    match format {
        CloudFormat::PcdAscii => {
            out.push_str("# .PCD v0.7 - Point Cloud Data file format\n");
            out.push_str("VERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n");
            let _ = writeln!(
                out,
                "WIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\nDATA ascii"
            );
        }
        CloudFormat::PlyAscii => {
            out.push_str("ply\nformat ascii 1.0\n");
            let _ = writeln!(out, "element vertex {n}");
            out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
        }
        CloudFormat::Xyz => {}
    }
    // `Display` for f64 emits the shortest decimal that parses back to the same bits.
    for p in cloud.points() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    Ok(out)
}

fn parse_coord(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::MalformedData {
        line,
        reason: format!("`{token}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue(format!("`{token}` on line {line}")));
    }
    Ok(v)
}

fn parse_xyz(text: &str) -> Result<Vec<Point3<f64>>> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() < 3 {
            return Err(Error::MalformedData {
                line: i + 1,
                reason: format!("expected 3 coordinates, found {}", tokens.len()),
            });
        }
        points.push(Point3::new(
            parse_coord(tokens[0], i + 1)?,
            parse_coord(tokens[1], i + 1)?,
            parse_coord(tokens[2], i + 1)?,
        ));
    }
    Ok(points)
}

fn parse_count(value: &str, key: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("{key} expects a count, got `{value}`")))
}

fn parse_pcd(text: &str) -> Result<Vec<Point3<f64>>> {
    let mut fields: Option<Vec<String>> = None;
    let mut sizes: Option<usize> = None;
    let mut types: Option<usize> = None;
    let mut counts: Option<Vec<usize>> = None;
    let mut width: Option<usize> = None;
    let mut height: Option<usize> = None;
    let mut declared: Option<usize> = None;
    let mut data_line = None;

    let lines: Vec<&str> = text.lines().collect();
    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap_or_default().to_ascii_uppercase();
        let values: Vec<&str> = tokens.collect();
        match key.as_str() {
            "VERSION" | "VIEWPOINT" => {}
            "FIELDS" => fields = Some(values.iter().map(|s| s.to_string()).collect()),
            "SIZE" => sizes = Some(values.len()),
            "TYPE" => types = Some(values.len()),
            "COUNT" => counts = Some(values.iter().map(|v| parse_count(v, "COUNT")).collect::<Result<_>>()?),
            "WIDTH" | "HEIGHT" | "POINTS" => {
                let [v] = values[..] else {
                    return Err(Error::MalformedHeader(format!("{key} expects one value")));
                };
                let v = parse_count(v, &key)?;
                match key.as_str() {
                    "WIDTH" => width = Some(v),
                    "HEIGHT" => height = Some(v),
                    _ => declared = Some(v),
                }
            }
            "DATA" => {
                match values.first().map(|s| s.to_ascii_lowercase()) {
                    Some(kind) if kind == "ascii" => {}
                    other => {
                        return Err(Error::MalformedHeader(format!(
                            "only DATA ascii is supported, got {}",
                            other.unwrap_or_else(|| "nothing".into())
                        )))
                    }
                }
                data_line = Some(i + 1);
                break;
            }
            _ => return Err(Error::MalformedHeader(format!("unknown PCD header key `{key}`"))),
        }
    }

    let data_start = data_line.ok_or_else(|| Error::MalformedHeader("missing DATA line".into()))?;
    let fields = fields.ok_or_else(|| Error::MalformedHeader("missing FIELDS".into()))?;
    let counts = counts.unwrap_or_else(|| vec![1; fields.len()]);
    for (name, len) in [("SIZE", sizes), ("TYPE", types), ("COUNT", Some(counts.len()))] {
        if let Some(len) = len {
            if len != fields.len() {
                return Err(Error::MalformedHeader(format!(
                    "{name} has {len} entries but FIELDS has {}",
                    fields.len()
                )));
            }
        }
    }
    let declared = match (declared, width, height) {
        (Some(p), Some(w), Some(h)) if p != w * h => {
            return Err(Error::MalformedHeader(format!(
                "POINTS {p} disagrees with WIDTH×HEIGHT {}",
                w * h
            )))
        }
        (Some(p), _, _) => p,
        (None, Some(w), h) => w * h.unwrap_or(1),
        (None, None, _) => return Err(Error::MalformedHeader("missing POINTS".into())),
    };

    // Column offsets account for multi-count fields.
    let mut offsets = Vec::with_capacity(fields.len());
    let mut acc = 0;
    for c in &counts {
        offsets.push(acc);
        acc += c;
    }
    let columns = acc;
    let column_of = |name: &str| -> Result<usize> {
        fields
            .iter()
            .position(|f| f == name)
            .map(|i| offsets[i])
            .ok_or_else(|| Error::MalformedHeader(format!("FIELDS lacks `{name}`")))
    };
    let (cx, cy, cz) = (column_of("x")?, column_of("y")?, column_of("z")?);

    let rows: Vec<(usize, &str)> = lines[data_start..]
        .iter()
        .enumerate()
        .map(|(k, l)| (data_start + k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if rows.len() != declared {
        return Err(Error::CountMismatch {
            declared,
            found: rows.len(),
        });
    }
    rows.into_iter()
        .map(|(line, row)| {
            let tokens: Vec<&str> = row.split_whitespace().collect();
            if tokens.len() != columns {
                return Err(Error::MalformedData {
                    line,
                    reason: format!("expected {columns} columns, found {}", tokens.len()),
                });
            }
            Ok(Point3::new(
                parse_coord(tokens[cx], line)?,
                parse_coord(tokens[cy], line)?,
                parse_coord(tokens[cz], line)?,
            ))
        })
        .collect()
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

fn parse_ply(text: &str) -> Result<Vec<Point3<f64>>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut iter = lines.iter().enumerate();
    match iter.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(Error::MalformedHeader("missing `ply` magic".into())),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut format_seen = false;
    let mut body_start = None;
    for (i, raw) in iter {
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.first().copied() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                if tokens.get(1) != Some(&"ascii") {
                    return Err(Error::MalformedHeader(format!(
                        "only ascii PLY is supported, got `{}`",
                        raw.trim()
                    )));
                }
                format_seen = true;
            }
            Some("element") => {
                let (Some(name), Some(count)) = (tokens.get(1), tokens.get(2)) else {
                    return Err(Error::MalformedHeader(format!("bad element line `{}`", raw.trim())));
                };
                elements.push(PlyElement {
                    name: name.to_string(),
                    count: parse_count(count, "element")?,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::MalformedHeader("property before any element".into()))?;
                let name = tokens
                    .last()
                    .filter(|_| tokens.len() >= 3)
                    .ok_or_else(|| Error::MalformedHeader(format!("bad property line `{}`", raw.trim())))?;
                if tokens[1] == "list" {
                    element.has_list = true;
                }
                element.properties.push(name.to_string());
            }
            Some("end_header") => {
                body_start = Some(i + 1);
                break;
            }
            Some(other) => return Err(Error::MalformedHeader(format!("unknown PLY header keyword `{other}`"))),
        }
    }
    if !format_seen {
        return Err(Error::MalformedHeader("missing format line".into()));
    }
    let body_start = body_start.ok_or_else(|| Error::MalformedHeader("missing end_header".into()))?;
    let vertex_index = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::MalformedHeader("no vertex element".into()))?;
    let vertex = &elements[vertex_index];
    if vertex.has_list {
        return Err(Error::MalformedHeader(
            "list properties on vertex are unsupported".into(),
        ));
    }
    let column_of = |name: &str| -> Result<usize> {
        vertex
            .properties
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::MalformedHeader(format!("vertex lacks property `{name}`")))
    };
    let (cx, cy, cz) = (column_of("x")?, column_of("y")?, column_of("z")?);

    let rows: Vec<(usize, &str)> = lines[body_start..]
        .iter()
        .enumerate()
        .map(|(k, l)| (body_start + k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let total: usize = elements.iter().map(|e| e.count).sum();
    if rows.len() != total {
        return Err(Error::CountMismatch {
            declared: total,
            found: rows.len(),
        });
    }
    let skip: usize = elements[..vertex_index].iter().map(|e| e.count).sum();
    rows[skip..skip + vertex.count]
        .iter()
        .map(|&(line, row)| {
            let tokens: Vec<&str> = row.split_whitespace().collect();
            if tokens.len() != vertex.properties.len() {
                return Err(Error::MalformedData {
                    line,
                    reason: format!(
                        "expected {} vertex properties, found {}",
                        vertex.properties.len(),
                        tokens.len()
                    ),
                });
            }
            Ok(Point3::new(
                parse_coord(tokens[cx], line)?,
                parse_coord(tokens[cy], line)?,
                parse_coord(tokens[cz], line)?,
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Synthetic shapes
// ---------------------------------------------------------------------------

/// Axis-aligned synthetic shapes, centered on their bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    /// Full widths along x, y, z.
    Box {
        wx: f64,
        wy: f64,
        wz: f64,
    },
    /// Closed cylinder with its axis along z.
    Cylinder {
        radius: f64,
        height: f64,
    },
    Sphere {
        radius: f64,
    },
    /// L-shaped bar: two legs of length `arm` along x and y, with a square
    /// `thickness`×`thickness` cross-section, extruded along z.
    LShape {
        arm: f64,
        thickness: f64,
    },
}

impl ShapeKind {
    fn dimensions(&self) -> Vec<f64> {
        match *self {
            Self::Box { wx, wy, wz } => vec![wx, wy, wz],
            Self::Cylinder { radius, height } => vec![radius, height],
            Self::Sphere { radius } => vec![radius],
            Self::LShape { arm, thickness } => vec![arm, thickness],
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(d) = self.dimensions().into_iter().find(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidDimension(format!(
                "{self}: dimension {d} must be positive"
            )));
        }
        if let Self::LShape { arm, thickness } = *self {
            if thickness >= arm {
                return Err(Error::InvalidDimension(format!(
                    "{self}: thickness must be smaller than arm"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::Box { wx, wy, wz } => write!(f, "box:{wx},{wy},{wz}"),
            Self::Cylinder { radius, height } => write!(f, "cylinder:{radius},{height}"),
            Self::Sphere { radius } => write!(f, "sphere:{radius}"),
            Self::LShape { arm, thickness } => write!(f, "lshape:{arm},{thickness}"),
        }
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    /// Parses `box:4,2,1`, `cylinder:1,3`, `sphere:1` or `lshape:1,0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let dims: Vec<f64> = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| {
                a.trim()
                    .parse()
                    .map_err(|_| Error::InvalidDimension(format!("`{a}` in shape `{s}`")))
            })
            .collect::<Result<_>>()?;
        let shape = match (name.trim().to_ascii_lowercase().as_str(), dims.as_slice()) {
            ("box", &[wx, wy, wz]) => Self::Box { wx, wy, wz },
            ("cylinder", &[radius, height]) => Self::Cylinder { radius, height },
            ("sphere", &[radius]) => Self::Sphere { radius },
            ("lshape", &[arm, thickness]) => Self::LShape { arm, thickness },
            _ => return Err(Error::InvalidDimension(format!("unrecognized shape `{s}`"))),
        };
        shape.validate()?;
        Ok(shape)
    }
}

/// Samples `n_points` uniformly over the surface of `kind`, then adds
/// isotropic Gaussian noise of std `noise_sigma`.
pub fn generate_shape(kind: ShapeKind, n_points: usize, noise_sigma: f64, seed: u64) -> Result<PointCloud> {
    kind.validate()?;
    if n_points < MIN_GENERATED_POINTS {
        return Err(Error::InvalidDimension(format!(
            "n_points {n_points} is below {MIN_GENERATED_POINTS}"
        )));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidDimension(format!("noise sigma {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point3<f64>> = (0..n_points)
        .map(|_| match kind {
            ShapeKind::Box { wx, wy, wz } => sample_box([wx, wy, wz], &mut rng),
            ShapeKind::Cylinder { radius, height } => sample_cylinder(radius, height, &mut rng),
            ShapeKind::Sphere { radius } => sample_sphere(radius, &mut rng),
            ShapeKind::LShape { arm, thickness } => sample_lshape(arm, thickness, &mut rng),
        })
        .collect();
    add_noise(&mut points, noise_sigma, &mut rng);
    Ok(PointCloud::from_trusted(points, Some(kind.to_string())))
}

fn add_noise<R: Rng>(points: &mut [Point3<f64>], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for p in points {
        for c in p.iter_mut() {
            *c += normal.sample(rng);
        }
    }
}

fn sample_box<R: Rng>(w: [f64; 3], rng: &mut R) -> Point3<f64> {
    // Face pair normal to axis k has area w[(k+1)%3]·w[(k+2)%3].
    let areas = [w[1] * w[2], w[2] * w[0], w[0] * w[1]];
    let total: f64 = areas.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut axis = 2;
    for (k, a) in areas.iter().enumerate() {
        if pick < *a {
            axis = k;
            break;
        }
        pick -= a;
    }
    let mut p = [0.0; 3];
    for (k, c) in p.iter_mut().enumerate() {
        *c = if k == axis {
            if rng.random::<bool>() {
                w[k] / 2.0
            } else {
                -w[k] / 2.0
            }
        } else {
            (rng.random::<f64>() - 0.5) * w[k]
        };
    }
    Point3::from(p)
}

fn sample_cylinder<R: Rng>(radius: f64, height: f64, rng: &mut R) -> Point3<f64> {
    let side = 2.0 * std::f64::consts::PI * radius * height;
    let cap = std::f64::consts::PI * radius * radius;
    let theta = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
    if rng.random::<f64>() * (side + 2.0 * cap) < side {
        let z = (rng.random::<f64>() - 0.5) * height;
        Point3::new(radius * theta.cos(), radius * theta.sin(), z)
    } else {
        let r = radius * rng.random::<f64>().sqrt();
        let z = if rng.random::<bool>() {
            height / 2.0
        } else {
            -height / 2.0
        };
        Point3::new(r * theta.cos(), r * theta.sin(), z)
    }
}

fn sample_sphere<R: Rng>(radius: f64, rng: &mut R) -> Point3<f64> {
    loop {
        let v = Vector3::<f64>::from_fn(|_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-9 {
            return Point3::from(v * (radius / n));
        }
    }
}

fn sample_lshape<R: Rng>(arm: f64, t: f64, rng: &mut R) -> Point3<f64> {
    // Polygon (0,0) (arm,0) (arm,t) (t,t) (t,arm) (0,arm), extruded over z ∈ [0, t].
    let outline = [[0.0, 0.0], [arm, 0.0], [arm, t], [t, t], [t, arm], [0.0, arm]];
    let cap_area = arm * t + t * (arm - t);
    let perimeter = 4.0 * arm;
    let wall_area = perimeter * t;
    let (x, y, z) = if rng.random::<f64>() * (2.0 * cap_area + wall_area) < 2.0 * cap_area {
        // Cap: split into [0,arm]×[0,t] and [0,t]×[t,arm].
        let (x, y) = if rng.random::<f64>() * cap_area < arm * t {
            (rng.random::<f64>() * arm, rng.random::<f64>() * t)
        } else {
            (rng.random::<f64>() * t, t + rng.random::<f64>() * (arm - t))
        };
        (x, y, if rng.random::<bool>() { t } else { 0.0 })
    } else {
        let mut s = rng.random::<f64>() * perimeter;
        let mut xy = outline[0];
        for k in 0..outline.len() {
            let a = outline[k];
            let b = outline[(k + 1) % outline.len()];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            if s <= len || k == outline.len() - 1 {
                let f = (s / len).min(1.0);
                xy = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
                break;
            }
            s -= len;
        }
        (xy[0], xy[1], rng.random::<f64>() * t)
    };
    // Center on the bounding box [0,arm]×[0,arm]×[0,t].
    Point3::new(x - arm / 2.0, y - arm / 2.0, z - t / 2.0)
}
