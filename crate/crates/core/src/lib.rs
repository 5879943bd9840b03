//! Open-ended 3D object category learning from orthographic views.
//!
//! A cloud is put into a PCA reference frame, scaled into the unit cube and
//! rendered as front, top and right-side depth grids. Each grid is described
//! independently and the three view features are max-pooled into one global
//! feature, which an instance-based nearest-neighbour memory learns from
//! incrementally. [`protocol`] evaluates such a learner with a simulated
//! teacher, and [`grasp`] reuses demonstrated grasps on familiar objects.

pub mod cloud;
pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod frame;
pub mod grasp;
pub mod memory;
pub mod ortho;
pub mod protocol;

pub use cloud::{
    apply_transform, generate_shape, parse_cloud, read_cloud, write_cloud, CloudFormat, PointCloud,
    RigidScaleTransform, ShapeKind,
};
pub use descriptor::{describe_view, global_feature, pool_max, FeatureConfig, GlobalFeature, ViewFeature};
pub use error::{Error, Result};
pub use frame::{canonicalize, centroid, compute_reference_frame, ReferenceFrame};
pub use grasp::{GraspOutcome, GripperPose, TemplateStore};
pub use memory::{CategoryMemory, Classification, Metric, Prediction};
pub use ortho::{project, project_all, Resolution, View, ViewGrid};
pub use protocol::{compute_apa, compute_gca, run_experiment, summarize, ExperimentReport, ProtocolConfig};
