use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Mode, OptimizerConfig};
use super::losses::{self, PointGradients};
use super::variables::{DecisionVariables, Gradient};
use crate::error::Result;
use crate::kinematics::{forward_kinematics, FkResult, JointCorrespondence, JointPair};
use crate::motion::{ContactSchedule, SourceMotion};
use crate::robot::RobotModel;

/// Unweighted value of every objective term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub global_match: f64,
    pub local_match: f64,
    pub smooth: f64,
    pub feasibility: f64,
    pub ground: f64,
    pub skate: f64,
}

impl LossTerms {
    pub const NAMES: [&'static str; 6] = [
        "global_match",
        "local_match",
        "smooth",
        "feasibility",
        "ground",
        "skate",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.global_match,
            self.local_match,
            self.smooth,
            self.feasibility,
            self.ground,
            self.skate,
        ]
    }

    pub fn first_non_finite(&self) -> Option<&'static str> {
        Self::NAMES
            .iter()
            .zip(self.values())
            .find(|(_, v)| !v.is_finite())
            .map(|(n, _)| *n)
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Weighted sum of the terms active in the configured mode.
    pub total: f64,
    /// All six terms, including inactive ones (reported, not optimized).
    pub terms: LossTerms,
    pub gradient: Gradient,
}

/// The weighted objective for one clip with fixed targets and contacts.
pub(crate) struct Objective<'a> {
    pub model: &'a RobotModel,
    pub targets: &'a SourceMotion,
    pub corr: &'a JointCorrespondence,
    pub contacts: &'a ContactSchedule,
    pub cfg: &'a OptimizerConfig,
    match_pairs: Vec<JointPair>,
}

impl<'a> Objective<'a> {
    pub fn new(
        model: &'a RobotModel,
        targets: &'a SourceMotion,
        corr: &'a JointCorrespondence,
        contacts: &'a ContactSchedule,
        cfg: &'a OptimizerConfig,
    ) -> Self {
        let match_pairs = if cfg.mode == Mode::Ik {
            corr.end_effectors().copied().collect()
        } else {
            corr.pairs().to_vec()
        };
        Self {
            model,
            targets,
            corr,
            contacts,
            cfg,
            match_pairs,
        }
    }

    pub fn forward_kinematics(&self, vars: &DecisionVariables) -> Result<FkResult> {
        let frames = (0..vars.frame_count())
            .into_par_iter()
            .map(|t| forward_kinematics(self.model, vars.q[t].as_slice(), &vars.root_pos[t], &vars.root_rot[t]))
            .collect::<Result<Vec<_>>>()?;
        Ok(FkResult { frames })
    }

    /// Evaluates every term and the gradient of the weighted total. With
    /// `position_hinge_grad == false` the joint-position hinge is left out of
    /// the gradient (the optimizer applies it as a proximal step instead);
    /// its value is still included in the total.
    pub fn evaluate(&self, vars: &DecisionVariables, position_hinge_grad: bool) -> Result<Evaluation> {
        self.evaluate_ramped(vars, position_hinge_grad, 1.0)
    }

    /// As [`Self::evaluate`], with the ground and skate contributions to the
    /// gradient (not to the reported total) scaled by `contact_ramp`.
    pub fn evaluate_ramped(
        &self,
        vars: &DecisionVariables,
        position_hinge_grad: bool,
        contact_ramp: f64,
    ) -> Result<Evaluation> {
        vars.check_shape(self.model)?;
        let (mode, w, fps) = (self.cfg.mode, &self.cfg.weights, self.targets.fps());
        let fk = self.forward_kinematics(vars)?;
        let mut points = PointGradients::zeros(vars.frame_count(), self.model.body_count());
        let mut grad = Gradient::zeros(vars.frame_count(), self.model.joint_count());

        // Inactive terms are evaluated for reporting with zero weight and no gradient.
        let active = |on: bool, weight: f64| if on { weight } else { 0.0 };
        let w_global = w.w_global_match;
        let w_local = active(mode.uses_local_match(), w.w_local_match);
        let w_smooth = active(mode.uses_smooth(), w.w_smooth);
        let w_feas = active(mode.uses_feasibility(), w.w_feasibility);
        let w_ground = active(mode.uses_ground(), w.w_ground);
        let w_skate = active(mode.uses_skate(), w.w_skate);

        let global_match = losses::global_match(&fk, self.targets, &self.match_pairs, w_global, Some(&mut points))?;
        let local_match = losses::local_match(
            &fk,
            self.targets,
            self.corr,
            w_local,
            (w_local > 0.0).then_some(&mut points),
        )?;
        let smooth = losses::smooth(vars, fps, w_smooth, (w_smooth > 0.0).then_some(&mut grad))?;
        let (pos, vel) = losses::feasibility(
            vars,
            self.model,
            self.cfg.limit_margin,
            fps,
            w_feas,
            (w_feas > 0.0).then_some(&mut grad),
            position_hinge_grad,
        );
        let ground = losses::ground(
            &fk,
            self.contacts,
            w_ground * contact_ramp,
            (w_ground > 0.0).then_some(&mut points),
        )?;
        let skate = losses::skate(
            &fk,
            self.contacts,
            fps,
            w_skate * contact_ramp,
            (w_skate > 0.0).then_some(&mut points),
        )?;
        losses::backpropagate(self.model, &fk, &points, &mut grad);

        let terms = LossTerms {
            global_match,
            local_match,
            smooth,
            feasibility: pos + vel,
            ground,
            skate,
        };
        let total = w_global * global_match
            + w_local * local_match
            + w_smooth * smooth
            + w_feas * (pos + vel)
            + w_ground * ground
            + w_skate * skate;
        Ok(Evaluation {
            total,
            terms,
            gradient: grad,
        })
    }
}

/// Weighted objective of the configured mode and its analytic gradient.
///
/// `targets` is the source the robot is matched against (shape-adapted for
/// every mode except IK, which expects the rigidly scaled source) and
/// `contacts` the frozen contact schedule.
pub fn total_loss(
    vars: &DecisionVariables,
    model: &RobotModel,
    targets: &SourceMotion,
    corr: &JointCorrespondence,
    contacts: &ContactSchedule,
    cfg: &OptimizerConfig,
) -> Result<(f64, Gradient)> {
    let e = Objective::new(model, targets, corr, contacts, cfg).evaluate(vars, true)?;
    Ok((e.total, e.gradient))
}

/// Like [`total_loss`] but also returns every unweighted term.
pub fn evaluate_objective(
    vars: &DecisionVariables,
    model: &RobotModel,
    targets: &SourceMotion,
    corr: &JointCorrespondence,
    contacts: &ContactSchedule,
    cfg: &OptimizerConfig,
) -> Result<Evaluation> {
    Objective::new(model, targets, corr, contacts, cfg).evaluate(vars, true)
}
