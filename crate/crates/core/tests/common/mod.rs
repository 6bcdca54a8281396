//! Fixtures shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use motion_retarget::kinematics::{forward_kinematics, JointCorrespondence};
use motion_retarget::retarget::{numerical_gradient, total_loss, DecisionVariables, OptimizerConfig};
use motion_retarget::synth::{source_joint_names, test_correspondence, test_humanoid};
use motion_retarget::{ContactSchedule, FootRegion, RobotModel, SourceMotion};
use nalgebra::{DVector, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FPS: f64 = 30.0;

pub fn humanoid() -> (RobotModel, JointCorrespondence) {
    let model = test_humanoid();
    let corr = test_correspondence(&model);
    (model, corr)
}

/// Joint angles drawn inside the limits, root near standing height with a
/// random orientation.
pub fn random_vars(model: &RobotModel, frames: usize, rng: &mut impl Rng) -> DecisionVariables {
    let mut q = Vec::new();
    let mut root_pos = Vec::new();
    let mut root_rot = Vec::new();
    for _ in 0..frames {
        q.push(DVector::from_iterator(
            model.joint_count(),
            model.joints().iter().map(|j| {
                let span = j.q_max - j.q_min;
                rng.gen_range(j.q_min + 0.1 * span..j.q_max - 0.1 * span)
            }),
        ));
        root_pos.push(Vector3::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(0.6..0.9),
        ));
        let axis = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        root_rot.push(UnitQuaternion::from_scaled_axis(axis * 0.4));
    }
    DecisionVariables { q, root_pos, root_rot }
}

/// Source joints rendered from `vars` plus uniform noise of `noise` m, with
/// one marker per region at the foot site.
pub fn render_targets(model: &RobotModel, vars: &DecisionVariables, noise: f64, rng: &mut impl Rng) -> SourceMotion {
    let corr = test_correspondence(model);
    let names = source_joint_names();
    let mut joints = Vec::new();
    let mut markers: [Vec<Vec<Vector3<f64>>>; 4] = Default::default();
    for t in 0..vars.frame_count() {
        let pose = forward_kinematics(model, vars.q[t].as_slice(), &vars.root_pos[t], &vars.root_rot[t]).unwrap();
        let mut frame = vec![Vector3::zeros(); names.len()];
        for p in corr.pairs() {
            let jitter = Vector3::new(
                rng.gen_range(-noise..=noise),
                rng.gen_range(-noise..=noise),
                rng.gen_range(-noise..=noise),
            );
            frame[p.source] = pose.body_pos[p.body] + jitter;
        }
        joints.push(frame);
        for r in FootRegion::ALL {
            markers[r.index()].push(vec![pose.site(r)]);
        }
    }
    SourceMotion::new(FPS, names, joints, markers).unwrap()
}

pub fn random_contacts(frames: usize, rng: &mut impl Rng) -> ContactSchedule {
    ContactSchedule::new(std::array::from_fn(|_| {
        (0..frames).map(|_| rng.gen_range(0.0..=1.0)).collect()
    }))
    .unwrap()
}

/// Configuration with every term active and only the named weight set
/// (or all weights when `only` is `None`).
pub fn single_term_config(only: Option<&str>) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::default();
    let w = &mut cfg.weights;
    let all = [
        ("global_match", &mut w.w_global_match),
        ("local_match", &mut w.w_local_match),
        ("smooth", &mut w.w_smooth),
        ("feasibility", &mut w.w_feasibility),
        ("ground", &mut w.w_ground),
        ("skate", &mut w.w_skate),
    ];
    for (name, weight) in all {
        *weight = match only {
            None => 1.0,
            Some(o) if o == name => 1.0,
            Some(_) => 0.0,
        };
    }
    cfg
}

/// Relative L2 error between analytic and numeric gradients.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

/// A random objective instance for gradient checks.
pub struct Problem {
    pub model: RobotModel,
    pub corr: JointCorrespondence,
    pub vars: DecisionVariables,
    pub targets: SourceMotion,
    pub contacts: ContactSchedule,
}

/// Random variables with about 15% of joints pushed past the limit band
/// (but not onto a kink) so the hinge is exercised, noisy targets and
/// random contacts.
pub fn random_problem(seed: u64, frames: usize) -> Problem {
    let (model, corr) = humanoid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = random_vars(&model, frames, &mut rng);
    for q in &mut vars.q {
        for (j, joint) in model.joints().iter().enumerate() {
            if rng.gen_bool(0.15) {
                let (_, hi) = joint.position_band(0.98);
                q[j] = hi + rng.gen_range(0.2..0.8) * (joint.q_max - hi);
            }
        }
    }
    let targets = render_targets(&model, &random_vars(&model, frames, &mut rng), 0.02, &mut rng);
    let contacts = random_contacts(frames, &mut rng);
    Problem {
        model,
        corr,
        vars,
        targets,
        contacts,
    }
}

/// Relative error between the analytic gradient of one weighted term (or
/// of the full objective for `None`) and central differences with
/// `h = 1e-6`.
pub fn gradient_error(p: &Problem, only: Option<&str>) -> f64 {
    let cfg = single_term_config(only);
    let (_, g) = total_loss(&p.vars, &p.model, &p.targets, &p.corr, &p.contacts, &cfg).unwrap();
    let numeric = numerical_gradient(&p.vars, 1e-6, |v| {
        total_loss(v, &p.model, &p.targets, &p.corr, &p.contacts, &cfg).map(|(l, _)| l)
    })
    .unwrap();
    relative_error(&g.to_flat(), &numeric)
}

pub const TERMS: [Option<&str>; 7] = [
    None,
    Some("global_match"),
    Some("local_match"),
    Some("smooth"),
    Some("feasibility"),
    Some("ground"),
    Some("skate"),
];
