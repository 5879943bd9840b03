//! Grasp templates: demonstrated gripper poses stored in the object frame
//! next to the object's global feature and a local front-view feature
//! around the grasp point. Familiar objects reuse the closest template's
//! pose, mapped back through their own frame.

use std::path::Path;

use nalgebra::{Point3, Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::descriptor::{
    analyze, BlockGrad, FeatureConfig, GlobalFeature, ObjectAnalysis, ViewDescriptor, ViewFeature,
};
use crate::error::{Error, Result};
use crate::memory::Metric;
use crate::ortho::{cell_index_unclamped, ViewGrid};

/// Object-frame positions must stay inside this cube (canonical units).
pub const POSE_BOUND: f64 = 1.5;

/// Gripper position and orientation; the frame depends on context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 7]", try_from = "[f64; 7]")]
pub struct GripperPose {
    pub position: Point3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl GripperPose {
    pub fn new(position: Point3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation }
    }

    /// `[px, py, pz, qw, qx, qy, qz]`. The quaternion must be unit length
    /// to within 1e-6. Anything further than rounding error from unit
    /// length is renormalized; otherwise the components are kept verbatim so
    /// stored poses round-trip bit for bit.
    pub fn from_array(v: [f64; 7]) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidPose("non-finite component".into()));
        }
        let q = Quaternion::new(v[3], v[4], v[5], v[6]);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidPose(format!("quaternion norm {} is not 1", q.norm())));
        }
        let orientation = if (q.norm() - 1.0).abs() <= 1e-12 {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::from_quaternion(q)
        };
        Ok(Self {
            position: Point3::new(v[0], v[1], v[2]),
            orientation,
        })
    }

    pub fn to_array(&self) -> [f64; 7] {
        let q = self.orientation.quaternion();
        [self.position.x, self.position.y, self.position.z, q.w, q.i, q.j, q.k]
    }

    /// Largest position difference and rotation angle between two poses.
    pub fn difference(&self, other: &GripperPose) -> (f64, f64) {
        (
            (self.position - other.position).amax(),
            self.orientation.angle_to(&other.orientation),
        )
    }
}

impl From<GripperPose> for [f64; 7] {
    fn from(p: GripperPose) -> Self {
        p.to_array()
    }
}

impl TryFrom<[f64; 7]> for GripperPose {
    type Error = Error;

    fn try_from(v: [f64; 7]) -> Result<Self> {
        Self::from_array(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspConfig {
    pub features: FeatureConfig,
    /// Side of the square front-view window used for the local feature.
    pub local_size: usize,
    pub local_blocks: usize,
    /// Weight of the global term; the local term gets the rest.
    pub global_weight: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            local_size: 16,
            local_blocks: 4,
            global_weight: 0.5,
        }
    }
}

impl GraspConfig {
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if self.local_size == 0 || self.local_blocks == 0 || !self.local_size.is_multiple_of(self.local_blocks) {
            return Err(Error::BadConfig(format!(
                "{} local blocks do not divide a {}-cell window",
                self.local_blocks, self.local_size
            )));
        }
        if !(0.0..=1.0).contains(&self.global_weight) {
            return Err(Error::BadConfig(format!("global weight {}", self.global_weight)));
        }
        Ok(())
    }

    /// Local descriptor of the front-view window centred on the projection
    /// of `position` (canonical object coordinates).
    pub fn local_feature(&self, front: &ViewGrid, position: &Point3<f64>) -> Result<ViewFeature> {
        let col = cell_index_unclamped(position.y, front.width());
        let row = front.height() as isize - 1 - cell_index_unclamped(position.z, front.height());
        let half = (self.local_size / 2) as isize;
        let window = front.window(row - half, col - half, self.local_size);
        BlockGrad {
            blocks: self.local_blocks,
        }
        .describe(&window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspTemplate {
    pub affordance_label: String,
    /// Pose in canonical object coordinates.
    pub pose: GripperPose,
    pub global_feature: GlobalFeature,
    pub local_feature: ViewFeature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspMatch {
    pub affordance_label: String,
    pub world_pose: GripperPose,
    /// Combined global/local cosine distance; 0 for an identical object.
    pub distance: f64,
    pub template_index: usize,
}

impl GraspMatch {
    pub fn similarity(&self) -> f64 {
        1.0 - self.distance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraspOutcome {
    Familiar(GraspMatch),
    /// Best combined distance exceeded the familiarity threshold.
    NotFamiliar {
        best_distance: f64,
    },
}

/// Cosine distance between possibly unnormalized vectors; a zero vector is
/// at distance 0 from another zero vector and 1 from anything else.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => {
            let an: Vec<f64> = a.iter().map(|v| v / na).collect();
            let bn: Vec<f64> = b.iter().map(|v| v / nb).collect();
            Metric::Cosine.distance(&an, &bn)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateStore {
    pub config: GraspConfig,
    pub templates: Vec<GraspTemplate>,
}

impl Default for TemplateStore {
    fn default() -> Self {
        Self::new(GraspConfig::default())
    }
}

impl TemplateStore {
    pub fn new(config: GraspConfig) -> Self {
        Self {
            config,
            templates: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Stores a demonstrated grasp given in world coordinates.
    pub fn learn_grasp(
        &mut self,
        cloud: &PointCloud,
        affordance_label: &str,
        world_pose: &GripperPose,
    ) -> Result<&GraspTemplate> {
        self.config.validate()?;
        let analysis = analyze(cloud, &self.config.features)?;
        let canon = &analysis.canonicalization;
        let position = canon.to_canonical(&world_pose.position);
        if position.coords.amax() > POSE_BOUND {
            return Err(Error::PoseOutsideObject([position.x, position.y, position.z]));
        }
        let orientation = canon.frame.rotation().inverse() * world_pose.orientation;
        let local_feature = self.config.local_feature(analysis.front(), &position)?;
        self.templates.push(GraspTemplate {
            affordance_label: affordance_label.to_owned(),
            pose: GripperPose::new(position, orientation),
            global_feature: analysis.feature,
            local_feature,
        });
        Ok(self.templates.last().expect("just pushed"))
    }

    /// Combined distance of `template` to an analysed query.
    pub fn template_distance(&self, analysis: &ObjectAnalysis, template: &GraspTemplate) -> Result<f64> {
        let w = self.config.global_weight;
        let global = cosine_distance(analysis.feature.values(), template.global_feature.values());
        let local = self.config.local_feature(analysis.front(), &template.pose.position)?;
        if local.dim() != template.local_feature.dim() {
            return Err(Error::DimensionMismatch {
                expected: template.local_feature.dim(),
                found: local.dim(),
            });
        }
        let local = cosine_distance(&local.values, &template.local_feature.values);
        Ok(w * global + (1.0 - w) * local)
    }

    pub fn recognize_grasp(&self, cloud: &PointCloud, tau_familiar: f64) -> Result<GraspOutcome> {
        if self.templates.is_empty() {
            return Err(Error::EmptyStore);
        }
        let analysis = analyze(cloud, &self.config.features)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in self.templates.iter().enumerate() {
            let d = self.template_distance(&analysis, t)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (index, distance) = best.expect("store is non-empty");
        if distance > tau_familiar {
            return Ok(GraspOutcome::NotFamiliar {
                best_distance: distance,
            });
        }
        let template = &self.templates[index];
        let canon = &analysis.canonicalization;
        let world_pose = GripperPose::new(
            canon.to_world(&template.pose.position),
            canon.frame.rotation() * template.pose.orientation,
        );
        Ok(GraspOutcome::Familiar(GraspMatch {
            affordance_label: template.affordance_label.clone(),
            world_pose,
            distance,
            template_index: index,
        }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let store: Self = serde_json::from_str(text)?;
        store.config.validate()?;
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{generate_shape, ShapeKind};

    fn brick() -> PointCloud {
        generate_shape(
            ShapeKind::Box {
                wx: 4.0,
                wy: 2.0,
                wz: 1.0,
            },
            4000,
            0.0,
            11,
        )
        .unwrap()
    }

    #[test]
    fn pose_array_round_trip() {
        let p = GripperPose::from_array([1.0, 2.0, 3.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.to_array(), [1.0, 2.0, 3.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(GripperPose::from_array([0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn cosine_distance_handles_zero() {
        assert_eq!(cosine_distance(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]), 1.0);
        assert_eq!(cosine_distance(&[2.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((cosine_distance(&[1.0, 0.0], &[0.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn top_center_grasp_lands_on_frame_z() {
        let cloud = brick();
        let mut store = TemplateStore::default();
        let pose = GripperPose::new(Point3::new(0.0, 0.0, 0.5), UnitQuaternion::identity());
        let t = store.learn_grasp(&cloud, "top", &pose).unwrap().clone();
        // The brick's half-extents are (2, 1, 0.5); the bounding-cube scale is 2.
        assert!(t.pose.position.x.abs() < 0.02);
        assert!(t.pose.position.y.abs() < 0.02);
        assert!((t.pose.position.z.abs() - 0.25).abs() < 0.02);
    }

    #[test]
    fn teaching_twice_gives_identical_templates() {
        let cloud = brick();
        let mut store = TemplateStore::default();
        let pose = GripperPose::new(Point3::new(0.3, 0.1, 0.5), UnitQuaternion::identity());
        store.learn_grasp(&cloud, "top", &pose).unwrap();
        store.learn_grasp(&cloud, "top", &pose).unwrap();
        assert_eq!(store.templates[0], store.templates[1]);
    }

    #[test]
    fn far_pose_rejected() {
        let mut store = TemplateStore::default();
        let pose = GripperPose::new(Point3::new(10.0, 0.0, 0.0), UnitQuaternion::identity());
        assert!(matches!(
            store.learn_grasp(&brick(), "x", &pose),
            Err(Error::PoseOutsideObject(_))
        ));
        assert!(store.is_empty());
    }

    #[test]
    fn empty_store() {
        assert!(matches!(
            TemplateStore::default().recognize_grasp(&brick(), 1.0),
            Err(Error::EmptyStore)
        ));
    }

    #[test]
    fn store_json_round_trip() {
        let mut store = TemplateStore::default();
        let pose = GripperPose::new(
            Point3::new(0.2, -0.1, 0.5),
            UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3),
        );
        store.learn_grasp(&brick(), "top", &pose).unwrap();
        let back = TemplateStore::from_json(&store.to_json().unwrap()).unwrap();
        assert_eq!(back.templates[0].global_feature, store.templates[0].global_feature);
        let (dp, da) = back.templates[0].pose.difference(&store.templates[0].pose);
        assert!(dp < 1e-15 && da < 1e-12);
    }
}
