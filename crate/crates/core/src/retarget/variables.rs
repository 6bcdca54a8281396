use nalgebra::{DVector, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, FkResult, ROOT_DOF};
use crate::motion::RetargetedMotion;
use crate::robot::RobotModel;

/// Optimization variables for every frame of a clip.
///
/// Root orientation is stored as a quaternion; the optimizer moves it by
/// world-frame rotation increments, which is also the coordinate that
/// [`Gradient::root_rot`] is expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVariables {
    pub q: Vec<DVector<f64>>,
    pub root_pos: Vec<Vector3<f64>>,
    pub root_rot: Vec<UnitQuaternion<f64>>,
}

/// Derivative of a scalar loss with respect to [`DecisionVariables`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub q: Vec<DVector<f64>>,
    pub root_pos: Vec<Vector3<f64>>,
    /// With respect to a world-frame rotation increment `w`, applied as
    /// `exp(w) * root_rot`.
    pub root_rot: Vec<Vector3<f64>>,
}

impl DecisionVariables {
    pub fn from_motion(motion: &RetargetedMotion) -> Self {
        Self {
            q: motion.q().to_vec(),
            root_pos: motion.root_pos().to_vec(),
            root_rot: motion.root_rot().to_vec(),
        }
    }

    pub fn frame_count(&self) -> usize {
        self.q.len()
    }

    pub fn joint_count(&self) -> usize {
        self.q.first().map_or(0, |q| q.len())
    }

    pub fn check_shape(&self, model: &RobotModel) -> Result<()> {
        let t = self.q.len();
        if self.root_pos.len() != t || self.root_rot.len() != t {
            return Err(Error::Shape(format!(
                "{} joint frames, {} root positions, {} root orientations",
                t,
                self.root_pos.len(),
                self.root_rot.len()
            )));
        }
        if let Some(f) = self.q.iter().position(|q| q.len() != model.joint_count()) {
            return Err(Error::Shape(format!(
                "frame {f} has {} joint angles, model has {}",
                self.q[f].len(),
                model.joint_count()
            )));
        }
        Ok(())
    }

    pub fn forward_kinematics(&self, model: &RobotModel) -> Result<FkResult> {
        let frames = (0..self.frame_count())
            .map(|t| forward_kinematics(model, self.q[t].as_slice(), &self.root_pos[t], &self.root_rot[t]))
            .collect::<Result<Vec<_>>>()?;
        Ok(FkResult { frames })
    }

    pub fn into_motion(self, fps: f64, model: &RobotModel) -> Result<RetargetedMotion> {
        RetargetedMotion::new(fps, model.joint_names(), self.q, self.root_pos, self.root_rot)
    }

    /// Scalar parameters per frame: root translation, root rotation
    /// increment, joint angles.
    pub fn params_per_frame(&self) -> usize {
        ROOT_DOF + self.joint_count()
    }

    pub fn param_count(&self) -> usize {
        self.frame_count() * self.params_per_frame()
    }

    /// Copy with flat parameter `index` moved by `h` (rotation parameters
    /// as a world-frame increment).
    pub fn perturbed(&self, index: usize, h: f64) -> Self {
        let mut out = self.clone();
        let (t, k) = (index / self.params_per_frame(), index % self.params_per_frame());
        match k {
            0..=2 => out.root_pos[t][k] += h,
            3..=5 => out.root_rot[t] = UnitQuaternion::from_scaled_axis(Vector3::ith(k - 3, h)) * out.root_rot[t],
            _ => out.q[t][k - ROOT_DOF] += h,
        }
        out
    }
}

impl Gradient {
    pub fn zeros(frames: usize, joints: usize) -> Self {
        Self {
            q: vec![DVector::zeros(joints); frames],
            root_pos: vec![Vector3::zeros(); frames],
            root_rot: vec![Vector3::zeros(); frames],
        }
    }

    /// Flat layout matching [`DecisionVariables::perturbed`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q.len() * (ROOT_DOF + self.q.first().map_or(0, |q| q.len())));
        for t in 0..self.q.len() {
            out.extend(self.root_pos[t].iter());
            out.extend(self.root_rot[t].iter());
            out.extend(self.q[t].iter());
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for t in 0..self.q.len() {
            self.q[t] *= s;
            self.root_pos[t] *= s;
            self.root_rot[t] *= s;
        }
    }

    pub fn add_scaled(&mut self, other: &Gradient, s: f64) {
        for t in 0..self.q.len() {
            self.q[t].axpy(s, &other.q[t], 1.0);
            self.root_pos[t] += other.root_pos[t] * s;
            self.root_rot[t] += other.root_rot[t] * s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_flat().iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Central finite-difference gradient of `f` in the flat layout of
/// [`DecisionVariables::perturbed`].
pub fn numerical_gradient(
    vars: &DecisionVariables,
    h: f64,
    f: impl Fn(&DecisionVariables) -> Result<f64>,
) -> Result<Vec<f64>> {
    (0..vars.param_count())
        .map(|i| Ok((f(&vars.perturbed(i, h))? - f(&vars.perturbed(i, -h))?) / (2.0 * h)))
        .collect()
}
