use nalgebra::{DMatrix, DVector, Matrix3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::motion::{FootRegion, RetargetedMotion};
use crate::robot::RobotModel;

/// Global pose of every body and foot site for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePose {
    pub body_pos: Vec<Vector3<f64>>,
    pub body_rot: Vec<UnitQuaternion<f64>>,
    /// World-frame rotation axis of each joint.
    pub joint_axis: Vec<Vector3<f64>>,
    pub sites: [Vector3<f64>; 4],
}

impl FramePose {
    pub fn site(&self, region: FootRegion) -> Vector3<f64> {
        self.sites[region.index()]
    }

    pub fn root_pos(&self) -> Vector3<f64> {
        self.body_pos[0]
    }
}

/// Per-frame forward kinematics of a whole motion.
#[derive(Debug, Clone, PartialEq)]
pub struct FkResult {
    pub frames: Vec<FramePose>,
}

impl FkResult {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

/// Places the root at `(root_pos, root_rot)`, then walks the tree: each
/// body's frame is its parent's frame translated by the body offset and
/// rotated about the body's joint axis by that joint's angle.
pub fn forward_kinematics(
    model: &RobotModel,
    q: &[f64],
    root_pos: &Vector3<f64>,
    root_rot: &UnitQuaternion<f64>,
) -> Result<FramePose> {
    if q.len() != model.joint_count() {
        return Err(Error::Shape(format!(
            "expected {} joint angles, got {}",
            model.joint_count(),
            q.len()
        )));
    }
    let n = model.body_count();
    let mut body_pos = Vec::with_capacity(n);
    let mut body_rot = Vec::with_capacity(n);
    let mut joint_axis = vec![Vector3::zeros(); model.joint_count()];
    body_pos.push(*root_pos);
    body_rot.push(*root_rot);
    for (b, body) in model.bodies().iter().enumerate().skip(1) {
        let parent = body.parent.expect("validated tree");
        let parent_rot = body_rot[parent];
        let pos = body_pos[parent] + parent_rot * body.offset;
        let rot = match model.body_joint(b) {
            Some(j) => {
                let joint = &model.joints()[j];
                joint_axis[j] = parent_rot * joint.axis.into_inner();
                parent_rot * UnitQuaternion::from_axis_angle(&joint.axis, q[j])
            }
            None => parent_rot,
        };
        body_pos.push(pos);
        body_rot.push(rot);
    }
    let sites = FootRegion::ALL.map(|r| {
        let s = model.foot_site(r);
        body_pos[s.body] + body_rot[s.body] * s.offset
    });
    Ok(FramePose {
        body_pos,
        body_rot,
        joint_axis,
        sites,
    })
}

pub fn forward_kinematics_motion(model: &RobotModel, motion: &RetargetedMotion) -> Result<FkResult> {
    let frames = (0..motion.frame_count())
        .map(|t| {
            forward_kinematics(
                model,
                motion.q()[t].as_slice(),
                &motion.root_pos()[t],
                &motion.root_rot()[t],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FkResult { frames })
}

/// Column layout of kinematic Jacobians: root translation, root rotation
/// (world-frame rotation increment), then one column per joint.
pub const ROOT_DOF: usize = 6;

/// Geometric Jacobian of a point rigidly attached to `body` (given in world
/// coordinates as `point`) with respect to the generalized coordinates.
pub fn point_jacobian(model: &RobotModel, pose: &FramePose, body: usize, point: &Vector3<f64>) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(3, ROOT_DOF + model.joint_count());
    jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
    let lever = point - pose.root_pos();
    for k in 0..3 {
        let col = Vector3::ith(k, 1.0).cross(&lever);
        jac.fixed_view_mut::<3, 1>(0, 3 + k).copy_from(&col);
    }
    let mut b = Some(body);
    while let Some(i) = b {
        if let Some(j) = model.body_joint(i) {
            let col = pose.joint_axis[j].cross(&(point - pose.body_pos[i]));
            jac.fixed_view_mut::<3, 1>(0, ROOT_DOF + j).copy_from(&col);
        }
        b = model.bodies()[i].parent;
    }
    jac
}

/// Jacobian of the global position of `body`, shape `3 x (6 + joints)`.
pub fn fk_jacobian(
    model: &RobotModel,
    q: &[f64],
    root_pos: &Vector3<f64>,
    root_rot: &UnitQuaternion<f64>,
    body: usize,
) -> Result<DMatrix<f64>> {
    if body >= model.body_count() {
        return Err(Error::BodyOutOfRange {
            index: body,
            count: model.body_count(),
        });
    }
    let pose = forward_kinematics(model, q, root_pos, root_rot)?;
    Ok(point_jacobian(model, &pose, body, &pose.body_pos[body]))
}

/// Rest pose: all joints at zero, identity root at the origin.
pub fn rest_pose(model: &RobotModel) -> FramePose {
    forward_kinematics(
        model,
        DVector::zeros(model.joint_count()).as_slice(),
        &Vector3::zeros(),
        &UnitQuaternion::identity(),
    )
    .expect("zero vector has the right length")
}
