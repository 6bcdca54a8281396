//! Individual objective terms. Each has a public value-only entry point and
//! a crate-internal variant that also accumulates its weighted gradient.

use nalgebra::Vector3;
use rayon::prelude::*;

use super::variables::{DecisionVariables, Gradient};
use crate::error::{Error, Result};
use crate::kinematics::{FkResult, JointCorrespondence, JointPair};
use crate::motion::{ContactSchedule, FootRegion, SourceMotion};
use crate::robot::RobotModel;

/// Loss gradients with respect to world positions of body origins and foot
/// sites, per frame.
#[derive(Debug, Clone)]
pub(crate) struct PointGradients {
    pub body: Vec<Vec<Vector3<f64>>>,
    pub site: Vec<[Vector3<f64>; 4]>,
}

impl PointGradients {
    pub fn zeros(frames: usize, bodies: usize) -> Self {
        Self {
            body: vec![vec![Vector3::zeros(); bodies]; frames],
            site: vec![[Vector3::zeros(); 4]; frames],
        }
    }
}

fn check_frames(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Shape(format!(
            "{what} has {got} frames, robot motion has {expected}"
        )));
    }
    Ok(())
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// L1 distance between corresponded source joints and robot bodies, summed
/// over all pairs and frames.
pub fn loss_global_match(fk: &FkResult, source: &SourceMotion, corr: &JointCorrespondence) -> Result<f64> {
    global_match(fk, source, corr.pairs(), 1.0, None)
}

pub(crate) fn global_match(
    fk: &FkResult,
    source: &SourceMotion,
    pairs: &[JointPair],
    weight: f64,
    mut grads: Option<&mut PointGradients>,
) -> Result<f64> {
    check_frames("source", fk.frame_count(), source.frame_count())?;
    let mut total = 0.0;
    for (t, pose) in fk.frames.iter().enumerate() {
        let frame = source.frame(t);
        for p in pairs {
            let d = pose.body_pos[p.body] - frame[p.source];
            total += d.abs().sum();
            if let Some(g) = grads.as_deref_mut() {
                g.body[t][p.body] += d.map(sign) * weight;
            }
        }
    }
    Ok(total)
}

/// Bone-vector agreement between adjacent corresponded pairs: squared
/// difference of the vectors plus `1 - cos` of the angle between them.
/// Each bone counts once.
pub fn loss_local_match(fk: &FkResult, source: &SourceMotion, corr: &JointCorrespondence) -> Result<f64> {
    local_match(fk, source, corr, 1.0, None)
}

pub(crate) fn local_match(
    fk: &FkResult,
    source: &SourceMotion,
    corr: &JointCorrespondence,
    weight: f64,
    mut grads: Option<&mut PointGradients>,
) -> Result<f64> {
    check_frames("source", fk.frame_count(), source.frame_count())?;
    let pairs = corr.pairs();
    let mut total = 0.0;
    for (t, pose) in fk.frames.iter().enumerate() {
        let frame = source.frame(t);
        for &(a, b) in corr.bones() {
            let (pa, pb) = (&pairs[a], &pairs[b]);
            let ds = frame[pb.source] - frame[pa.source];
            let dr = pose.body_pos[pb.body] - pose.body_pos[pa.body];
            let (ns, nr) = (ds.norm(), dr.norm());
            if ns < 1e-12 || nr < 1e-12 {
                return Err(Error::ZeroLengthBone {
                    from: format!("pair {a} (body {})", pa.body),
                    to: format!("pair {b} (body {})", pb.body),
                    frame: t,
                });
            }
            let (us, ur) = (ds / ns, dr / nr);
            let diff = dr - ds;
            let cos = us.dot(&ur);
            total += diff.norm_squared() + (1.0 - cos);
            if let Some(g) = grads.as_deref_mut() {
                // d(1 - us.ur)/d(dr) = -(I - ur ur^T) us / |dr|
                let g_dir = -(us - ur * cos) / nr;
                let g_bone = (diff * 2.0 + g_dir) * weight;
                g.body[t][pb.body] += g_bone;
                g.body[t][pa.body] -= g_bone;
            }
        }
    }
    Ok(total)
}

/// Coefficients of `x_t .. x_{t+3}` in the third difference.
const JERK_STENCIL: [f64; 4] = [-1.0, 3.0, -3.0, 1.0];

/// L1 norm of the second difference of joint and root velocities.
pub fn loss_smooth(vars: &DecisionVariables, fps: f64) -> Result<f64> {
    smooth(vars, fps, 1.0, None)
}

pub(crate) fn smooth(vars: &DecisionVariables, fps: f64, weight: f64, mut grad: Option<&mut Gradient>) -> Result<f64> {
    let n = vars.frame_count();
    if n < 4 {
        return Err(Error::TooFewFrames { needed: 4, got: n });
    }
    let mut total = 0.0;
    for t in 0..n - 3 {
        for j in 0..vars.joint_count() {
            let q = |k: usize| vars.q[t + k][j];
            let s = ((q(3) - q(0)) - 3.0 * (q(2) - q(1))) * fps;
            total += s.abs();
            if let Some(g) = grad.as_deref_mut() {
                for k in 0..4 {
                    g.q[t + k][j] += weight * fps * JERK_STENCIL[k] * sign(s);
                }
            }
        }
        let p = &vars.root_pos[t..t + 4];
        let s = ((p[3] - p[0]) - (p[2] - p[1]) * 3.0) * fps;
        total += s.abs().sum();
        if let Some(g) = grad.as_deref_mut() {
            for k in 0..4 {
                g.root_pos[t + k] += s.map(sign) * (weight * fps * JERK_STENCIL[k]);
            }
        }
    }
    Ok(total)
}

/// Hinge penalty on joint positions and forward-difference velocities
/// leaving the margin-adjusted limit bands.
pub fn loss_feasibility(vars: &DecisionVariables, model: &RobotModel, margin: f64, fps: f64) -> f64 {
    let (p, v) = feasibility(vars, model, margin, fps, 1.0, None, true);
    p + v
}

/// Returns the position and velocity parts separately. The position hinge
/// contributes to `grad` only when `position_grad` is set.
pub(crate) fn feasibility(
    vars: &DecisionVariables,
    model: &RobotModel,
    margin: f64,
    fps: f64,
    weight: f64,
    mut grad: Option<&mut Gradient>,
    position_grad: bool,
) -> (f64, f64) {
    let n = vars.frame_count();
    let (mut pos, mut vel) = (0.0, 0.0);
    for (j, joint) in model.joints().iter().enumerate() {
        let (lo, hi) = joint.position_band(margin);
        let (vlo, vhi) = joint.velocity_band(margin);
        for t in 0..n {
            let q = vars.q[t][j];
            let h = (q - hi).max(0.0) + (lo - q).max(0.0);
            pos += h;
            if position_grad {
                if let Some(g) = grad.as_deref_mut() {
                    g.q[t][j] += weight * (f64::from(u8::from(q > hi)) - f64::from(u8::from(q < lo)));
                }
            }
            if t + 1 < n {
                let v = (vars.q[t + 1][j] - q) * fps;
                vel += (v - vhi).max(0.0) + (vlo - v).max(0.0);
                let dv = f64::from(u8::from(v > vhi)) - f64::from(u8::from(v < vlo));
                if dv != 0.0 {
                    if let Some(g) = grad.as_deref_mut() {
                        g.q[t + 1][j] += weight * fps * dv;
                        g.q[t][j] -= weight * fps * dv;
                    }
                }
            }
        }
    }
    (pos, vel)
}

/// Contact-weighted squared height of each foot site.
pub fn loss_ground(fk: &FkResult, contacts: &ContactSchedule) -> Result<f64> {
    ground(fk, contacts, 1.0, None)
}

pub(crate) fn ground(
    fk: &FkResult,
    contacts: &ContactSchedule,
    weight: f64,
    mut grads: Option<&mut PointGradients>,
) -> Result<f64> {
    check_frames("contact schedule", fk.frame_count(), contacts.frame_count())?;
    let mut total = 0.0;
    for (t, pose) in fk.frames.iter().enumerate() {
        for r in FootRegion::ALL {
            let c = contacts.get(r, t);
            let z = pose.site(r).z;
            total += c * z * z;
            if let Some(g) = grads.as_deref_mut() {
                g.site[t][r.index()].z += weight * 2.0 * c * z;
            }
        }
    }
    Ok(total)
}

/// Contact-weighted horizontal speed of each foot site.
pub fn loss_skate(fk: &FkResult, contacts: &ContactSchedule, fps: f64) -> Result<f64> {
    skate(fk, contacts, fps, 1.0, None)
}

pub(crate) fn skate(
    fk: &FkResult,
    contacts: &ContactSchedule,
    fps: f64,
    weight: f64,
    mut grads: Option<&mut PointGradients>,
) -> Result<f64> {
    let n = fk.frame_count();
    if n < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: n });
    }
    check_frames("contact schedule", n, contacts.frame_count())?;
    let mut total = 0.0;
    for t in 0..n - 1 {
        for r in FootRegion::ALL {
            let c = contacts.get(r, t);
            let d = (fk.frames[t + 1].site(r) - fk.frames[t].site(r)) * fps;
            let speed = d.xy().norm();
            total += c * speed;
            if speed > 0.0 && c > 0.0 {
                if let Some(g) = grads.as_deref_mut() {
                    let dir = Vector3::new(d.x, d.y, 0.0) * (weight * c * fps / speed);
                    g.site[t + 1][r.index()] += dir;
                    g.site[t][r.index()] -= dir;
                }
            }
        }
    }
    Ok(total)
}

/// Chain rule from point gradients to the decision variables.
///
/// Each joint sees the summed force `F` and moment `M = sum p x g` of every
/// point in its subtree, and `dL/dq = a . (M - o x F)` for axis `a` through
/// origin `o`. The root translation takes the total force and the root
/// rotation increment the total moment about the root.
pub(crate) fn backpropagate(model: &RobotModel, fk: &FkResult, points: &PointGradients, grad: &mut Gradient) {
    let n = model.body_count();
    let per_frame: Vec<_> = fk
        .frames
        .par_iter()
        .enumerate()
        .map(|(t, pose)| {
            let mut force = points.body[t].clone();
            let mut moment: Vec<Vector3<f64>> = (0..n).map(|b| pose.body_pos[b].cross(&force[b])).collect();
            for r in FootRegion::ALL {
                let g = points.site[t][r.index()];
                let b = model.foot_site(r).body;
                force[b] += g;
                moment[b] += pose.site(r).cross(&g);
            }
            for b in (1..n).rev() {
                let p = model.bodies()[b].parent.expect("validated tree");
                let (f, m) = (force[b], moment[b]);
                force[p] += f;
                moment[p] += m;
            }
            let mut dq = vec![0.0; model.joint_count()];
            for (j, joint) in model.joints().iter().enumerate() {
                let b = joint.body;
                dq[j] = pose.joint_axis[j].dot(&(moment[b] - pose.body_pos[b].cross(&force[b])));
            }
            let root = pose.root_pos();
            (dq, force[0], moment[0] - root.cross(&force[0]))
        })
        .collect();
    for (t, (dq, f, m)) in per_frame.into_iter().enumerate() {
        for (j, d) in dq.into_iter().enumerate() {
            grad.q[t][j] += d;
        }
        grad.root_pos[t] += f;
        grad.root_rot[t] += m;
    }
}
