//! PCA object reference frames and canonicalization into them.
//!
//! The frame origin is the centroid; axes are covariance eigenvectors in
//! descending eigenvalue order. X and Y signs are chosen so that at least
//! half of the points project positively (ties fall back to the sign of the
//! summed cubed projections), and Z = X × Y keeps the frame right-handed.

use nalgebra::{Matrix3, Point3, SymmetricEigen, UnitQuaternion, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// `λ2/λ1` below this means the cloud is effectively collinear.
pub const COLLINEAR_RATIO: f64 = 1e-6;

/// Eigenvalue ratio separating "distinct" axes. A cloud whose largest and
/// smallest eigenvalues are within this ratio has no preferred axis at all.
pub const DISTINCT_AXIS_RATIO: f64 = 1.15;

const FRAME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFrame {
    origin: Point3<f64>,
    axes: Matrix3<f64>,
    eigenvalues: [f64; 3],
}

impl ReferenceFrame {
    /// Validates orthonormality, handedness and eigenvalue order.
    pub fn new(origin: Point3<f64>, axes: Matrix3<f64>, eigenvalues: [f64; 3]) -> Result<Self> {
        if ((axes.transpose() * axes) - Matrix3::identity()).abs().max() > FRAME_TOLERANCE
            || (axes.determinant() - 1.0).abs() > FRAME_TOLERANCE
        {
            return Err(Error::InvalidTransform("frame axes are not a rotation".into()));
        }
        let [l1, l2, l3] = eigenvalues;
        if !(l1 >= l2 && l2 >= l3 && l3 >= 0.0) {
            return Err(Error::InvalidTransform(format!(
                "eigenvalues {eigenvalues:?} are not sorted and non-negative"
            )));
        }
        Ok(Self {
            origin,
            axes,
            eigenvalues,
        })
    }

    pub fn origin(&self) -> &Point3<f64> {
        &self.origin
    }

    /// Columns are the X, Y, Z object axes expressed in world coordinates.
    pub fn axes(&self) -> &Matrix3<f64> {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> Vector3<f64> {
        self.axes.column(i).into_owned()
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigenvalues
    }

    /// Rotation taking object-frame vectors to world vectors.
    pub fn rotation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_matrix(&self.axes)
    }

    /// Whether both eigenvalue gaps are wide enough for the axes to be stable.
    pub fn is_well_separated(&self) -> bool {
        let [l1, l2, l3] = self.eigenvalues;
        l1 >= DISTINCT_AXIS_RATIO * l2 && l2 >= DISTINCT_AXIS_RATIO * l3
    }

    /// Expresses a world point in the (unscaled) object frame.
    pub fn to_local(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.axes.tr_mul(&(p - self.origin)))
    }

    pub fn to_world(&self, p: &Point3<f64>) -> Point3<f64> {
        self.origin + self.axes * p.coords
    }
}

/// Frame plus the bounding-cube scale that maps the cloud into `[-1, 1]³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canonicalization {
    pub frame: ReferenceFrame,
    /// Largest absolute object-frame coordinate; canonical = local / scale.
    pub scale: f64,
}

impl Canonicalization {
    pub fn to_canonical(&self, p: &Point3<f64>) -> Point3<f64> {
        self.frame.to_local(p) / self.scale
    }

    pub fn to_world(&self, p: &Point3<f64>) -> Point3<f64> {
        self.frame.to_world(&(p * self.scale))
    }
}

pub fn centroid(cloud: &PointCloud) -> Result<Point3<f64>> {
    cloud.ensure_non_empty()?;
    let sum = cloud.points().iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Ok(Point3::from(sum / cloud.len() as f64))
}

/// Population covariance of the points about `center`.
fn covariance(cloud: &PointCloud, center: &Point3<f64>) -> Matrix3<f64> {
    let sum = cloud.points().iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - center;
        acc + d * d.transpose()
    });
    sum / cloud.len() as f64
}

/// True when the sign of `axis` should be flipped.
fn needs_flip(cloud: &PointCloud, origin: &Point3<f64>, axis: &Vector3<f64>) -> bool {
    let mut positive = 0usize;
    let mut negative = 0usize;
    let mut cubed = 0.0;
    for p in cloud.points() {
        let proj = (p - origin).dot(axis);
        if proj > 0.0 {
            positive += 1;
        } else if proj < 0.0 {
            negative += 1;
        }
        cubed += proj * proj * proj;
    }
    if positive != negative {
        positive < negative
    } else {
        cubed < 0.0
    }
}

pub fn compute_reference_frame(cloud: &PointCloud) -> Result<ReferenceFrame> {
    let origin = centroid(cloud)?;
    if cloud.len() < 4 {
        return Err(Error::DegenerateCloud(format!(
            "{} points, at least 4 required",
            cloud.len()
        )));
    }
    let eigen = SymmetricEigen::new(covariance(cloud, &origin));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let lambda = order.map(|i| eigen.eigenvalues[i].max(0.0));

    if lambda[0] <= 0.0 || lambda[1] / lambda[0] < COLLINEAR_RATIO {
        return Err(Error::DegenerateCloud(format!(
            "points are (nearly) collinear, eigenvalues {lambda:?}"
        )));
    }
    if lambda[0] < DISTINCT_AXIS_RATIO * lambda[2] {
        return Err(Error::DegenerateCloud(format!(
            "covariance is isotropic, eigenvalues {lambda:?}"
        )));
    }

    let mut x: Vector3<f64> = eigen.eigenvectors.column(order[0]).normalize();
    let mut y: Vector3<f64> = eigen.eigenvectors.column(order[1]).normalize();
    if needs_flip(cloud, &origin, &x) {
        x = -x;
    }
    if needs_flip(cloud, &origin, &y) {
        y = -y;
    }
    let z = x.cross(&y);
    let axes = Matrix3::from_columns(&[x, y, z]);
    Ok(ReferenceFrame {
        origin,
        axes,
        eigenvalues: lambda,
    })
}

/// Largest absolute coordinate of the cloud expressed in `frame`.
pub fn canonical_scale(cloud: &PointCloud, frame: &ReferenceFrame) -> Result<f64> {
    cloud.ensure_non_empty()?;
    Ok(cloud
        .points()
        .iter()
        .map(|p| frame.to_local(p).coords.amax())
        .fold(0.0, f64::max))
}

pub fn canonicalization(cloud: &PointCloud, frame: &ReferenceFrame) -> Result<Canonicalization> {
    let scale = canonical_scale(cloud, frame)?;
    Ok(Canonicalization {
        frame: *frame,
        scale: if scale > 0.0 { scale } else { 1.0 },
    })
}

/// Maps the cloud into `frame` and rescales so the largest absolute
/// coordinate is 1.
pub fn canonicalize(cloud: &PointCloud, frame: &ReferenceFrame) -> Result<PointCloud> {
    let canon = canonicalization(cloud, frame)?;
    Ok(apply_canonicalization(cloud, &canon))
}

pub fn apply_canonicalization(cloud: &PointCloud, canon: &Canonicalization) -> PointCloud {
    let points = cloud.points().iter().map(|p| canon.to_canonical(p)).collect();
    PointCloud::from_trusted(points, cloud.source_id().map(str::to_owned))
}
