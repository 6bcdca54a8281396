//! Forward kinematics over the robot tree and shape adaptation of source
//! skeletons.

mod correspondence;
mod fk;
mod shape;

pub use correspondence::{CorrespondenceEntry, JointCorrespondence, JointPair};
pub use fk::{
    fk_jacobian, forward_kinematics, forward_kinematics_motion, point_jacobian, rest_pose, FkResult, FramePose,
    ROOT_DOF,
};
pub use shape::{adapt_source_shape, bone_scales, rigid_scale_source};
