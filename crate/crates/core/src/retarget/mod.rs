//! Trajectory optimization that fits robot joint angles and root pose to a
//! source clip.
//!
//! The objective combines position and bone-direction matching with
//! smoothness, joint-limit, grounding and anti-skating penalties; [`Mode`]
//! selects which of them are active. All frames are optimized jointly with
//! an Adam-style first-order method.

mod config;
mod losses;
mod objective;
mod variables;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DVector, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{LossWeights, Mode, OptimizerConfig};
pub use losses::{loss_feasibility, loss_global_match, loss_ground, loss_local_match, loss_skate, loss_smooth};
pub use objective::{evaluate_objective, total_loss, Evaluation, LossTerms};
pub use variables::{numerical_gradient, DecisionVariables, Gradient};

use crate::curation::contact_scores;
use crate::error::{Error, Result};
use crate::kinematics::{adapt_source_shape, rest_pose, rigid_scale_source, JointCorrespondence, ROOT_DOF};
use crate::motion::{ContactSchedule, RetargetedMotion, SourceMotion};
use crate::robot::RobotModel;
use objective::Objective;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;
/// Final step size as a fraction of the configured one.
const FINAL_STEP_FRACTION: f64 = 0.01;
/// Share of the iterations over which the ground and skate gradients are
/// blended in, so that fidelity settles before the contact terms engage.
const CONTACT_RAMP_FRACTION: f64 = 0.3;
/// Amplitude of the seeded perturbation of the initial joint angles, rad.
const INIT_JITTER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub total: f64,
    pub best: f64,
    pub terms: LossTerms,
}

/// Objective value at every iterate. Row 0 is the initialization and row
/// `k` the iterate after `k` steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTrace {
    pub rows: Vec<TraceRow>,
}

impl LossTrace {
    pub const CSV_HEADER: [&'static str; 9] = [
        "iteration",
        "total",
        "best",
        "global_match",
        "local_match",
        "smooth",
        "feasibility",
        "ground",
        "skate",
    ];

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            let mut rec = vec![r.iteration.to_string(), r.total.to_string(), r.best.to_string()];
            rec.extend(r.terms.values().iter().map(f64::to_string));
            out.write_record(rec)?;
        }
        out.flush().map_err(|e| Error::Io {
            path: "<trace>".into(),
            source: e,
        })
    }

    pub fn best(&self) -> Option<f64> {
        self.rows.last().map(|r| r.best)
    }
}

/// Everything produced by one retargeting run.
#[derive(Debug, Clone)]
pub struct RetargetOutput {
    pub motion: RetargetedMotion,
    pub trace: LossTrace,
    /// Shape-adapted source, the reference for fidelity metrics.
    pub adapted: SourceMotion,
    /// Contacts derived from the adapted source's markers.
    pub contacts: ContactSchedule,
}

/// Initial variables: joints at zero (or mid-range when zero is outside the
/// limits) plus a small seeded perturbation, root on the source root joint,
/// root heading from the horizontal directions of the bones leaving the
/// root.
pub fn initialize(
    targets: &SourceMotion,
    model: &RobotModel,
    corr: &JointCorrespondence,
    seed: u64,
) -> DecisionVariables {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = model
        .joints()
        .iter()
        .map(|j| {
            if j.q_min < 0.0 && 0.0 < j.q_max {
                0.0
            } else {
                0.5 * (j.q_min + j.q_max)
            }
        })
        .collect();
    let frames = targets.frame_count();
    let q = (0..frames)
        .map(|_| {
            DVector::from_iterator(
                base.len(),
                model.joints().iter().zip(&base).map(|(j, b)| {
                    let v = b + rng.gen_range(-INIT_JITTER..=INIT_JITTER);
                    v.clamp(j.q_min, j.q_max)
                }),
            )
        })
        .collect();

    let pairs = corr.pairs();
    let root_pair = pairs.iter().position(|p| p.body == 0);
    let rest = rest_pose(model);
    let mut root_pos = Vec::with_capacity(frames);
    let mut root_rot = Vec::with_capacity(frames);
    for t in 0..frames {
        let frame = targets.frame(t);
        match root_pair {
            Some(rp) => {
                root_pos.push(frame[pairs[rp].source]);
                let (mut dot, mut cross) = (0.0, 0.0);
                for &(a, b) in corr.bones().iter().filter(|(a, _)| *a == rp) {
                    let r = rest.body_pos[pairs[b].body] - rest.body_pos[pairs[a].body];
                    let s = frame[pairs[b].source] - frame[pairs[a].source];
                    dot += r.x * s.x + r.y * s.y;
                    cross += r.x * s.y - r.y * s.x;
                }
                let yaw = if dot == 0.0 && cross == 0.0 {
                    0.0
                } else {
                    cross.atan2(dot)
                };
                root_rot.push(UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw));
            }
            None => {
                let p = pairs.first().map_or_else(Vector3::zeros, |p| frame[p.source]);
                root_pos.push(p);
                root_rot.push(UnitQuaternion::identity());
            }
        }
    }
    DecisionVariables { q, root_pos, root_rot }
}

fn step_size_at(cfg: &OptimizerConfig, iteration: usize) -> f64 {
    let progress = iteration as f64 / cfg.iterations.max(1) as f64;
    let decay = 0.5 * (1.0 + (PI * progress).cos());
    cfg.step_size * (FINAL_STEP_FRACTION + (1.0 - FINAL_STEP_FRACTION) * decay)
}

fn check_finite(e: &Evaluation, iteration: usize) -> Result<()> {
    if let Some(term) = e.terms.first_non_finite() {
        return Err(Error::NonFiniteLoss { iteration, term });
    }
    if !e.total.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration,
            term: "total",
        });
    }
    if e.gradient.to_flat().iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteLoss {
            iteration,
            term: "gradient",
        });
    }
    Ok(())
}

/// Runs `cfg.iterations` optimizer steps from `init` against fixed targets
/// and contacts, returning the best iterate and the trace.
pub fn optimize(
    init: DecisionVariables,
    model: &RobotModel,
    targets: &SourceMotion,
    corr: &JointCorrespondence,
    contacts: &ContactSchedule,
    cfg: &OptimizerConfig,
) -> Result<(DecisionVariables, LossTrace)> {
    cfg.validate()?;
    let objective = Objective::new(model, targets, corr, contacts, cfg);
    let feasibility = cfg.mode.uses_feasibility();
    let bands: Vec<(f64, f64)> = model
        .joints()
        .iter()
        .map(|j| j.position_band(cfg.limit_margin))
        .collect();
    let w_feas = cfg.weights.w_feasibility;

    let mut vars = init;
    vars.check_shape(model)?;
    let n = vars.param_count();
    let per_frame = vars.params_per_frame();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut trace = LossTrace::default();
    let mut best_vars = vars.clone();
    let mut best = f64::INFINITY;

    for it in 0..=cfg.iterations {
        let ramp = (it as f64 / (CONTACT_RAMP_FRACTION * cfg.iterations as f64)).min(1.0);
        let eval = objective.evaluate_ramped(&vars, !feasibility, ramp)?;
        check_finite(&eval, it)?;
        if eval.total < best {
            best = eval.total;
            best_vars = vars.clone();
        }
        trace.rows.push(TraceRow {
            iteration: it,
            total: eval.total,
            best,
            terms: eval.terms,
        });
        if it == cfg.iterations {
            break;
        }

        let lr = step_size_at(cfg, it);
        let k = (it + 1) as i32;
        let (c1, c2) = (1.0 - BETA1.powi(k), 1.0 - BETA2.powi(k));
        let g = eval.gradient.to_flat();
        for t in 0..vars.frame_count() {
            let mut step = [0.0; ROOT_DOF];
            for i in 0..per_frame {
                let idx = t * per_frame + i;
                m[idx] = BETA1 * m[idx] + (1.0 - BETA1) * g[idx];
                v[idx] = BETA2 * v[idx] + (1.0 - BETA2) * g[idx] * g[idx];
                let denom = (v[idx] / c2).sqrt() + EPSILON;
                let delta = lr * (m[idx] / c1) / denom;
                if i < ROOT_DOF {
                    step[i] = delta;
                    continue;
                }
                let j = i - ROOT_DOF;
                let joint = &model.joints()[j];
                let mut q = vars.q[t][j] - delta;
                if feasibility {
                    // Proximal step of the position hinge: shrink towards the band.
                    let tau = lr / denom * w_feas;
                    let (lo, hi) = bands[j];
                    if q > hi {
                        q = (q - tau).max(hi);
                    } else if q < lo {
                        q = (q + tau).min(lo);
                    }
                }
                vars.q[t][j] = q.clamp(joint.q_min, joint.q_max);
            }
            vars.root_pos[t] -= Vector3::new(step[0], step[1], step[2]);
            let w = Vector3::new(step[3], step[4], step[5]);
            let r = UnitQuaternion::from_scaled_axis(-w) * vars.root_rot[t];
            vars.root_rot[t] = UnitQuaternion::new_normalize(r.into_inner());
        }
    }
    Ok((best_vars, trace))
}

/// Retargets `source` onto `model`: shape adaptation (rigid scaling in IK
/// mode), contact extraction, initialization and optimization.
pub fn retarget(
    source: &SourceMotion,
    model: &RobotModel,
    corr: &JointCorrespondence,
    cfg: &OptimizerConfig,
) -> Result<RetargetOutput> {
    cfg.validate()?;
    if source.frame_count() < 4 {
        return Err(Error::TooFewFrames {
            needed: 4,
            got: source.frame_count(),
        });
    }
    let adapted = adapt_source_shape(source, corr, model)?;
    let contacts = contact_scores(&adapted, cfg.contact_ramp_top)?;
    let targets = if cfg.mode.uses_shape_adaptation() {
        adapted.clone()
    } else {
        rigid_scale_source(source, corr, model)?
    };
    let init = initialize(&targets, model, corr, cfg.seed);
    let (vars, trace) = optimize(init, model, &targets, corr, &contacts, cfg)?;
    Ok(RetargetOutput {
        motion: vars.into_motion(source.fps(), model)?,
        trace,
        adapted,
        contacts,
    })
}
