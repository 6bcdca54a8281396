use nalgebra::Vector3;

use super::correspondence::JointCorrespondence;
use super::fk::rest_pose;
use crate::error::{Error, Result};
use crate::motion::SourceMotion;
use crate::robot::RobotModel;

/// Robot rest length over mean source length for every correspondence bone.
pub fn bone_scales(source: &SourceMotion, corr: &JointCorrespondence, model: &RobotModel) -> Result<Vec<f64>> {
    let rest = rest_pose(model);
    let pairs = corr.pairs();
    corr.bones()
        .iter()
        .map(|&(a, b)| {
            let (pa, pb) = (pairs[a], pairs[b]);
            let robot = (rest.body_pos[pb.body] - rest.body_pos[pa.body]).norm();
            let mean = source
                .joints()
                .iter()
                .map(|f| (f[pb.source] - f[pa.source]).norm())
                .sum::<f64>()
                / source.frame_count() as f64;
            if mean <= 1e-9 {
                let names = source.joint_names();
                return Err(Error::ZeroLengthBone {
                    from: names[pa.source].clone(),
                    to: names[pb.source].clone(),
                    frame: 0,
                });
            }
            Ok(robot / mean)
        })
        .collect()
}

/// Rescales every corresponded source bone to the robot's rest length,
/// propagating outward from the tree roots so the root joint trajectory is
/// unchanged. Uncorresponded joints and contact markers are left as is.
pub fn adapt_source_shape(
    source: &SourceMotion,
    corr: &JointCorrespondence,
    model: &RobotModel,
) -> Result<SourceMotion> {
    let scales = bone_scales(source, corr, model)?;
    let pairs = corr.pairs();
    let joints = source
        .joints()
        .iter()
        .map(|frame| {
            let mut out = frame.clone();
            // Bones are ordered parents first, so each parent is final
            // before its children are placed.
            for (&(a, b), s) in corr.bones().iter().zip(&scales) {
                let (ia, ib) = (pairs[a].source, pairs[b].source);
                out[ib] = out[ia] + (frame[ib] - frame[ia]) * *s;
            }
            out
        })
        .collect();
    source.with_joints(joints)
}

/// Uniform scaling by the ratio of total robot to total source bone length,
/// about the first-frame root position projected to the ground. This is the
/// proportion-agnostic preprocessing used by the plain IK baseline.
pub fn rigid_scale_source(
    source: &SourceMotion,
    corr: &JointCorrespondence,
    model: &RobotModel,
) -> Result<SourceMotion> {
    let rest = rest_pose(model);
    let pairs = corr.pairs();
    let (mut robot, mut human) = (0.0, 0.0);
    for &(a, b) in corr.bones() {
        let (pa, pb) = (pairs[a], pairs[b]);
        robot += (rest.body_pos[pb.body] - rest.body_pos[pa.body]).norm();
        human += source
            .joints()
            .iter()
            .map(|f| (f[pb.source] - f[pa.source]).norm())
            .sum::<f64>()
            / source.frame_count() as f64;
    }
    if human <= 1e-9 {
        return Err(Error::Shape("source skeleton has zero total bone length".into()));
    }
    let s = robot / human;
    let root = pairs.first().map_or(0, |p| p.source);
    let r0 = source.frame(0)[root];
    let anchor = Vector3::new(r0.x, r0.y, 0.0);
    source.map_points(|p| anchor + (p - anchor) * s)
}
