//! Procedural test humanoid and motion suite.
//!
//! Motions are generated on the robot itself: a pelvis path and a footstep
//! plan are turned into joint angles with analytic leg inverse kinematics,
//! so planted feet are exactly static and flat. Source clips are rendered
//! from the robot's forward kinematics, optionally with injected defects.

use std::f64::consts::PI;

use nalgebra::{DVector, Rotation3, Unit, UnitQuaternion, Vector2, Vector3};

use crate::kinematics::{forward_kinematics, CorrespondenceEntry, JointCorrespondence};
use crate::motion::{FootRegion, RetargetedMotion, SourceMotion};
use crate::robot::{Body, FootSite, Joint, RobotModel};

const THIGH: f64 = 0.36;
const SHANK: f64 = 0.36;
const HIP_LATERAL: f64 = 0.09;
const HIP_DROP: f64 = 0.06;
/// Ankle joint height above the sole.
const ANKLE_HEIGHT: f64 = 0.045;
/// Ankle placed this far behind the pelvis so the pelvis sits over mid-foot.
const FOOT_BACK: f64 = 0.04;
const MARKER_OFFSETS: [(f64, f64); 4] = [(0.015, 0.02), (0.015, -0.02), (-0.015, 0.02), (-0.015, -0.02)];

struct JointSpec {
    name: &'static str,
    parent: &'static str,
    offset: [f64; 3],
    axis: [f64; 3],
    limits: (f64, f64),
}

const fn j(
    name: &'static str,
    parent: &'static str,
    offset: [f64; 3],
    axis: [f64; 3],
    limits: (f64, f64),
) -> JointSpec {
    JointSpec {
        name,
        parent,
        offset,
        axis,
        limits,
    }
}

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const NEG_Y: [f64; 3] = [0.0, -1.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

/// Body/joint layout of the test humanoid; `axis == [0; 3]` marks a fixed body.
const LAYOUT: &[JointSpec] = &[
    j(
        "left_hip_roll_link",
        "pelvis",
        [0.0, HIP_LATERAL, -HIP_DROP],
        X,
        (-0.5, 2.9),
    ),
    j("left_hip_yaw_link", "left_hip_roll_link", [0.0; 3], Z, (-2.7, 2.7)),
    j("left_hip_pitch_link", "left_hip_yaw_link", [0.0; 3], Y, (-2.5, 2.5)),
    j(
        "left_knee_link",
        "left_hip_pitch_link",
        [0.0, 0.0, -THIGH],
        Y,
        (-0.087, 2.8),
    ),
    j(
        "left_ankle_pitch_link",
        "left_knee_link",
        [0.0, 0.0, -SHANK],
        Y,
        (-0.87, 0.52),
    ),
    j(
        "left_ankle_roll_link",
        "left_ankle_pitch_link",
        [0.0; 3],
        X,
        (-0.26, 0.26),
    ),
    j(
        "left_toe",
        "left_ankle_roll_link",
        [0.13, 0.0, -0.03],
        [0.0; 3],
        (0.0, 0.0),
    ),
    j(
        "right_hip_roll_link",
        "pelvis",
        [0.0, -HIP_LATERAL, -HIP_DROP],
        X,
        (-2.9, 0.5),
    ),
    j("right_hip_yaw_link", "right_hip_roll_link", [0.0; 3], Z, (-2.7, 2.7)),
    j("right_hip_pitch_link", "right_hip_yaw_link", [0.0; 3], Y, (-2.5, 2.5)),
    j(
        "right_knee_link",
        "right_hip_pitch_link",
        [0.0, 0.0, -THIGH],
        Y,
        (-0.087, 2.8),
    ),
    j(
        "right_ankle_pitch_link",
        "right_knee_link",
        [0.0, 0.0, -SHANK],
        Y,
        (-0.87, 0.52),
    ),
    j(
        "right_ankle_roll_link",
        "right_ankle_pitch_link",
        [0.0; 3],
        X,
        (-0.26, 0.26),
    ),
    j(
        "right_toe",
        "right_ankle_roll_link",
        [0.13, 0.0, -0.03],
        [0.0; 3],
        (0.0, 0.0),
    ),
    j("torso_link", "pelvis", [0.0, 0.0, 0.1], Z, (-2.6, 2.6)),
    j("head", "torso_link", [0.0, 0.0, 0.45], [0.0; 3], (0.0, 0.0)),
    j(
        "left_shoulder_pitch_link",
        "torso_link",
        [0.0, 0.17, 0.32],
        Y,
        (-3.0, 2.6),
    ),
    j(
        "left_shoulder_roll_link",
        "left_shoulder_pitch_link",
        [0.0; 3],
        X,
        (-1.5, 2.2),
    ),
    j(
        "left_shoulder_yaw_link",
        "left_shoulder_roll_link",
        [0.0; 3],
        Z,
        (-2.6, 2.6),
    ),
    j(
        "left_elbow_link",
        "left_shoulder_yaw_link",
        [0.0, 0.0, -0.22],
        NEG_Y,
        (-0.2, 2.1),
    ),
    j("left_hand", "left_elbow_link", [0.0, 0.0, -0.2], [0.0; 3], (0.0, 0.0)),
    j(
        "right_shoulder_pitch_link",
        "torso_link",
        [0.0, -0.17, 0.32],
        Y,
        (-3.0, 2.6),
    ),
    j(
        "right_shoulder_roll_link",
        "right_shoulder_pitch_link",
        [0.0; 3],
        X,
        (-2.2, 1.5),
    ),
    j(
        "right_shoulder_yaw_link",
        "right_shoulder_roll_link",
        [0.0; 3],
        Z,
        (-2.6, 2.6),
    ),
    j(
        "right_elbow_link",
        "right_shoulder_yaw_link",
        [0.0, 0.0, -0.22],
        NEG_Y,
        (-0.2, 2.1),
    ),
    j("right_hand", "right_elbow_link", [0.0, 0.0, -0.2], [0.0; 3], (0.0, 0.0)),
];

/// A small 21-DoF humanoid with the proportions of a ~1.3 m robot.
pub fn test_humanoid() -> RobotModel {
    let mut bodies = vec![Body {
        name: "pelvis".into(),
        parent: None,
        offset: Vector3::zeros(),
    }];
    let mut joints = Vec::new();
    for spec in LAYOUT {
        let parent = bodies.iter().position(|b| b.name == spec.parent).expect("layout order");
        bodies.push(Body {
            name: spec.name.into(),
            parent: Some(parent),
            offset: Vector3::from(spec.offset),
        });
        if spec.axis != [0.0; 3] {
            let name = spec.name.trim_end_matches("_link");
            joints.push(Joint {
                name: format!("{name}_joint"),
                body: bodies.len() - 1,
                axis: Unit::new_normalize(Vector3::from(spec.axis)),
                q_min: spec.limits.0,
                q_max: spec.limits.1,
                v_max: 20.0,
            });
        }
    }
    let index = |n: &str| bodies.iter().position(|b| b.name == n).unwrap();
    let heel = Vector3::new(-0.05, 0.0, -ANKLE_HEIGHT);
    let toe = Vector3::new(0.13, 0.0, -ANKLE_HEIGHT);
    let sites = [
        FootSite {
            body: index("left_ankle_roll_link"),
            offset: heel,
        },
        FootSite {
            body: index("left_ankle_roll_link"),
            offset: toe,
        },
        FootSite {
            body: index("right_ankle_roll_link"),
            offset: heel,
        },
        FootSite {
            body: index("right_ankle_roll_link"),
            offset: toe,
        },
    ];
    RobotModel::new(bodies, joints, sites, ["pelvis".into(), "torso_link".into()]).expect("valid layout")
}

/// Source joint name, robot body, end-effector flag.
const CORRESPONDENCE: &[(&str, &str, bool)] = &[
    ("pelvis", "pelvis", false),
    ("left_hip", "left_hip_roll_link", false),
    ("left_knee", "left_knee_link", false),
    ("left_ankle", "left_ankle_roll_link", false),
    ("left_foot", "left_toe", true),
    ("right_hip", "right_hip_roll_link", false),
    ("right_knee", "right_knee_link", false),
    ("right_ankle", "right_ankle_roll_link", false),
    ("right_foot", "right_toe", true),
    ("spine1", "torso_link", false),
    ("head", "head", true),
    ("left_shoulder", "left_shoulder_pitch_link", false),
    ("left_elbow", "left_elbow_link", false),
    ("left_wrist", "left_hand", true),
    ("right_shoulder", "right_shoulder_pitch_link", false),
    ("right_elbow", "right_elbow_link", false),
    ("right_wrist", "right_hand", true),
];

pub fn source_joint_names() -> Vec<String> {
    CORRESPONDENCE.iter().map(|c| c.0.to_owned()).collect()
}

pub fn test_correspondence_entries() -> Vec<CorrespondenceEntry> {
    CORRESPONDENCE
        .iter()
        .map(|&(s, r, ee)| CorrespondenceEntry {
            source: s.into(),
            robot_body: r.into(),
            end_effector: ee,
        })
        .collect()
}

pub fn test_correspondence(model: &RobotModel) -> JointCorrespondence {
    JointCorrespondence::resolve(&test_correspondence_entries(), &source_joint_names(), model)
        .expect("test correspondence matches the test humanoid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionKind {
    /// Stepping gait along a (possibly curved) path.
    Walk {
        speed: f64,
        turn_rate: f64,
        cycle: f64,
        step_height: f64,
    },
    /// Feet planted, pelvis dips by `depth` once per `period`.
    Squat { depth: f64, period: f64 },
    /// Repeated vertical hops of `height` with flight phases.
    Hop { height: f64, period: f64 },
    /// Feet planted, upper-body gestures and waist twist.
    Stand { amplitude: f64 },
}

struct Plan {
    kind: MotionKind,
    pelvis_height: f64,
}

impl Plan {
    fn heading(&self, t: f64) -> f64 {
        match self.kind {
            MotionKind::Walk { turn_rate, .. } => turn_rate * t,
            _ => 0.0,
        }
    }

    fn pelvis_xy(&self, t: f64) -> Vector2<f64> {
        match self.kind {
            MotionKind::Walk { speed, turn_rate, .. } => {
                if turn_rate.abs() < 1e-9 {
                    Vector2::new(speed * t, 0.0)
                } else {
                    let r = speed / turn_rate;
                    let psi = turn_rate * t;
                    Vector2::new(r * psi.sin(), r * (1.0 - psi.cos()))
                }
            }
            _ => Vector2::zeros(),
        }
    }

    fn pelvis_z(&self, t: f64) -> f64 {
        match self.kind {
            MotionKind::Walk { cycle, .. } => self.pelvis_height + 0.008 * (4.0 * PI * t / cycle).cos(),
            MotionKind::Squat { depth, period } => {
                self.pelvis_height - depth * 0.5 * (1.0 - (2.0 * PI * t / period).cos())
            }
            MotionKind::Hop { height, period } => self.pelvis_height + height * (PI * t / period).sin().powi(2),
            MotionKind::Stand { .. } => self.pelvis_height,
        }
    }

    /// Ankle-point world position for the foot on `side` (+1 left, -1 right).
    fn ankle(&self, side: f64, t: f64) -> Vector3<f64> {
        let stance_point = |tm: f64| {
            let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), self.heading(tm));
            let p = self.pelvis_xy(tm);
            let local = rot * Vector3::new(-FOOT_BACK, side * HIP_LATERAL, 0.0);
            Vector3::new(p.x + local.x, p.y + local.y, ANKLE_HEIGHT)
        };
        match self.kind {
            MotionKind::Walk { cycle, step_height, .. } => {
                const SWING: f64 = 0.4;
                let offset = if side > 0.0 { 0.0 } else { 0.5 };
                let u = t / cycle - offset;
                let n = u.floor();
                let s = u - n;
                // Mid-stance instant of the stance phase that starts at phase SWING.
                let mid = |k: f64| (k + offset + (1.0 + SWING) / 2.0) * cycle;
                if s >= SWING {
                    stance_point(mid(n))
                } else {
                    let from = stance_point(mid(n - 1.0));
                    let to = stance_point(mid(n));
                    let w = 0.5 * (1.0 - (PI * s / SWING).cos());
                    let mut p = from + (to - from) * w;
                    p.z += step_height * (PI * s / SWING).sin();
                    p
                }
            }
            MotionKind::Hop { .. } => {
                let mut p = stance_point(0.0);
                p.z += (self.pelvis_z(t) - (self.pelvis_height + 0.03)).max(0.0);
                p
            }
            _ => stance_point(0.0),
        }
    }
}

/// Leg angles `[hip_roll, hip_yaw, hip_pitch, knee, ankle_pitch, ankle_roll]`
/// placing the ankle at `d` (relative to the hip, root frame) with the
/// sole parallel to the pelvis.
fn leg_ik(d: Vector3<f64>) -> [f64; 6] {
    let roll = d.y.atan2(-d.z);
    let down = (d.y * d.y + d.z * d.z).sqrt();
    let reach = (d.x * d.x + down * down).sqrt().min(0.999 * (THIGH + SHANK));
    let cos_inner = ((THIGH * THIGH + SHANK * SHANK - reach * reach) / (2.0 * THIGH * SHANK)).clamp(-1.0, 1.0);
    let knee = PI - cos_inner.acos();
    let direction = (-d.x).atan2(down);
    let pitch = direction - knee / 2.0;
    [roll, 0.0, pitch, knee, -(pitch + knee), -roll]
}

/// Ground-truth robot motion of `kind` for `seconds` at `fps`.
pub fn generate(model: &RobotModel, kind: MotionKind, seconds: f64, fps: f64) -> RetargetedMotion {
    let pelvis_height = match kind {
        MotionKind::Walk { .. } => 0.78,
        MotionKind::Squat { .. } => 0.80,
        MotionKind::Hop { .. } => 0.76,
        MotionKind::Stand { .. } => 0.79,
    };
    let plan = Plan { kind, pelvis_height };
    let frames = (seconds * fps).round() as usize;
    let idx = |name: &str| {
        model
            .joint_names()
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("joint {name}"))
    };
    let leg_joints = |side: &str| {
        ["hip_roll", "hip_yaw", "hip_pitch", "knee", "ankle_pitch", "ankle_roll"]
            .map(|j| idx(&format!("{side}_{j}_joint")))
    };
    let (left_leg, right_leg) = (leg_joints("left"), leg_joints("right"));
    let arm = |side: &str| {
        ["shoulder_pitch", "shoulder_roll", "shoulder_yaw", "elbow"].map(|j| idx(&format!("{side}_{j}_joint")))
    };
    let (left_arm, right_arm) = (arm("left"), arm("right"));
    let waist = idx("torso_joint");

    let (mut qs, mut pos, mut rot) = (Vec::new(), Vec::new(), Vec::new());
    for f in 0..frames {
        let t = f as f64 / fps;
        let heading = plan.heading(t);
        let root_rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), heading);
        let xy = plan.pelvis_xy(t);
        let root_pos = Vector3::new(xy.x, xy.y, plan.pelvis_z(t));
        let mut q = DVector::zeros(model.joint_count());
        for (side, leg) in [(1.0, &left_leg), (-1.0, &right_leg)] {
            let hip = root_pos + root_rot * Vector3::new(0.0, side * HIP_LATERAL, -HIP_DROP);
            let d = root_rot.inverse() * (plan.ankle(side, t) - hip);
            for (j, v) in leg.iter().zip(leg_ik(d)) {
                q[*j] = v;
            }
        }
        let (swing, gesture) = match kind {
            MotionKind::Walk { cycle, .. } => ((2.0 * PI * t / cycle).sin() * 0.35, 0.0),
            MotionKind::Stand { amplitude } => (0.0, amplitude),
            _ => (0.0, 0.15),
        };
        let g = (2.0 * PI * 0.4 * t).sin();
        for (side, a) in [(1.0, &left_arm), (-1.0, &right_arm)] {
            q[a[0]] = side * swing - gesture * (1.0 + g);
            q[a[1]] = side * (0.18 + 0.5 * gesture * (1.0 - g));
            q[a[2]] = side * 0.15 * g;
            q[a[3]] = 0.7 + 0.25 * g + gesture * (1.0 + side * g);
        }
        q[waist] = 0.12 * (2.0 * PI * 0.3 * t).sin() + gesture * 0.5 * g;
        qs.push(q);
        pos.push(root_pos);
        rot.push(root_rot);
    }
    RetargetedMotion::new(fps, model.joint_names(), qs, pos, rot).expect("generated motion is well formed")
}

/// Renders corresponded body positions as source joints and four contact
/// markers around each foot site.
pub fn render_source(model: &RobotModel, motion: &RetargetedMotion) -> SourceMotion {
    let pairs: Vec<usize> = CORRESPONDENCE
        .iter()
        .map(|c| model.body_index(c.1).expect("corresponded body"))
        .collect();
    let mut joints = Vec::with_capacity(motion.frame_count());
    let mut markers: [Vec<Vec<Vector3<f64>>>; 4] = Default::default();
    for t in 0..motion.frame_count() {
        let pose = forward_kinematics(
            model,
            motion.q()[t].as_slice(),
            &motion.root_pos()[t],
            &motion.root_rot()[t],
        )
        .expect("motion matches model");
        joints.push(pairs.iter().map(|&b| pose.body_pos[b]).collect());
        for region in FootRegion::ALL {
            let site = model.foot_site(region);
            let r = pose.body_rot[site.body];
            markers[region.index()].push(
                MARKER_OFFSETS
                    .iter()
                    .map(|(dx, dy)| pose.site(region) + r * Vector3::new(*dx, *dy, 0.0))
                    .collect(),
            );
        }
    }
    SourceMotion::new(motion.fps(), source_joint_names(), joints, markers).expect("rendered motion is well formed")
}

/// Artifacts injected into otherwise clean clips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Defect {
    /// Drives both elbows to `inset` radians above their lower hard limit
    /// during the middle half of the clip. The pose stays reachable but sits
    /// inside the safety margin of any limit margin below one.
    ElbowOverExtension { inset: f64 },
    /// Skeleton shifted vertically by `dz` relative to unchanged contact
    /// markers: positive floats, negative penetrates.
    VerticalOffset { dz: f64 },
    /// Whole body (markers included) oscillates horizontally, so planted
    /// feet slide.
    Slide { amplitude: f64, frequency: f64 },
    /// Whole body jumps horizontally by `distance` at `at_seconds`.
    RootJump { distance: f64, at_seconds: f64 },
    /// Pelvis and spine lowered by `dz` for the whole clip.
    LowPelvis { dz: f64 },
    /// Pelvis alone displaced backwards by `dx`.
    PelvisOffset { dx: f64 },
    /// Everything rises smoothly by `dz` over one second starting at
    /// `at_seconds` and stays there.
    FloatingFeet { dz: f64, at_seconds: f64 },
}

/// Duration of the lift of [`Defect::FloatingFeet`], s.
const FLOAT_RAMP_SECONDS: f64 = 1.0;

/// Moves every joint and marker of frame `t` by `shift(t)`.
fn translate_frames(motion: &SourceMotion, shift: impl Fn(usize) -> Vector3<f64>) -> SourceMotion {
    let joints = motion
        .joints()
        .iter()
        .enumerate()
        .map(|(t, f)| f.iter().map(|p| p + shift(t)).collect())
        .collect();
    let markers = motion.all_markers().clone().map(|r| {
        r.into_iter()
            .enumerate()
            .map(|(t, f)| f.into_iter().map(|p| p + shift(t)).collect())
            .collect()
    });
    SourceMotion::new(motion.fps(), motion.joint_names().to_vec(), joints, markers).expect("same shape")
}

pub fn apply_defect(model: &RobotModel, truth: &RetargetedMotion, defect: Defect) -> (RetargetedMotion, SourceMotion) {
    let names = source_joint_names();
    let joint = |n: &str| names.iter().position(|s| s == n).unwrap();
    match defect {
        Defect::ElbowOverExtension { inset } => {
            let (start, end) = (truth.frame_count() / 4, 3 * truth.frame_count() / 4);
            let elbows: Vec<usize> = model
                .joint_names()
                .iter()
                .enumerate()
                .filter(|(_, n)| n.contains("elbow"))
                .map(|(i, _)| i)
                .collect();
            let mut q = truth.q().to_vec();
            for (t, qt) in q.iter_mut().enumerate().take(end).skip(start) {
                let s = (PI * (t - start) as f64 / (end - start) as f64).sin();
                for &e in &elbows {
                    let lim = model.joints()[e].q_min;
                    let base = qt[e];
                    qt[e] = base + (lim + inset - base) * s.min(1.0).powf(0.25);
                }
            }
            let bad = RetargetedMotion::new(
                truth.fps(),
                truth.joint_names().to_vec(),
                q,
                truth.root_pos().to_vec(),
                truth.root_rot().to_vec(),
            )
            .expect("same shape");
            let source = render_source(model, &bad);
            (bad, source)
        }
        Defect::VerticalOffset { dz } => {
            let clean = render_source(model, truth);
            let joints = clean
                .joints()
                .iter()
                .map(|f| f.iter().map(|p| p + Vector3::new(0.0, 0.0, dz)).collect())
                .collect();
            (truth.clone(), clean.with_joints(joints).expect("same shape"))
        }
        Defect::Slide { amplitude, frequency } => {
            let clean = render_source(model, truth);
            let fps = clean.fps();
            let src = translate_frames(&clean, |t| {
                Vector3::new(amplitude * (2.0 * PI * frequency * t as f64 / fps).sin(), 0.0, 0.0)
            });
            (truth.clone(), src)
        }
        Defect::RootJump { distance, at_seconds } => {
            let clean = render_source(model, truth);
            let cut = (at_seconds * clean.fps()).round() as usize;
            let src = translate_frames(&clean, |t| {
                Vector3::new(if t >= cut { distance } else { 0.0 }, 0.0, 0.0)
            });
            (truth.clone(), src)
        }
        Defect::LowPelvis { dz } => {
            let clean = render_source(model, truth);
            let (pelvis, spine) = (joint("pelvis"), joint("spine1"));
            let joints = clean
                .joints()
                .iter()
                .map(|f| {
                    let mut f = f.clone();
                    f[pelvis].z -= dz;
                    f[spine].z -= dz;
                    f
                })
                .collect();
            (truth.clone(), clean.with_joints(joints).expect("same shape"))
        }
        Defect::PelvisOffset { dx } => {
            let clean = render_source(model, truth);
            let pelvis = joint("pelvis");
            let joints = clean
                .joints()
                .iter()
                .map(|f| {
                    let mut f = f.clone();
                    f[pelvis].x -= dx;
                    f
                })
                .collect();
            (truth.clone(), clean.with_joints(joints).expect("same shape"))
        }
        Defect::FloatingFeet { dz, at_seconds } => {
            let clean = render_source(model, truth);
            let fps = clean.fps();
            let src = translate_frames(&clean, |t| {
                let u = ((t as f64 / fps - at_seconds) / FLOAT_RAMP_SECONDS).clamp(0.0, 1.0);
                Vector3::new(0.0, 0.0, dz * 0.5 * (1.0 - (PI * u).cos()))
            });
            (truth.clone(), src)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticClip {
    pub name: String,
    pub kind: MotionKind,
    pub defect: Option<Defect>,
    /// Robot motion the source was rendered from (before any defect that
    /// only touches the source).
    pub truth: RetargetedMotion,
    pub source: SourceMotion,
}

pub fn walk(speed: f64, turn_rate: f64) -> MotionKind {
    MotionKind::Walk {
        speed,
        turn_rate,
        cycle: 1.1,
        step_height: 0.06,
    }
}

/// The clean base motions of the suite.
pub fn clean_kinds() -> Vec<(&'static str, MotionKind)> {
    vec![
        ("walk_slow", walk(0.25, 0.0)),
        ("walk", walk(0.4, 0.0)),
        (
            "walk_fast",
            MotionKind::Walk {
                speed: 0.5,
                turn_rate: 0.0,
                cycle: 1.0,
                step_height: 0.07,
            },
        ),
        ("turn_left", walk(0.3, 0.35)),
        ("turn_right", walk(0.3, -0.35)),
        ("turn_in_place", walk(0.0, 0.5)),
        (
            "squat",
            MotionKind::Squat {
                depth: 0.12,
                period: 2.0,
            },
        ),
        (
            "squat_deep",
            MotionKind::Squat {
                depth: 0.17,
                period: 4.0,
            },
        ),
        (
            "hop",
            MotionKind::Hop {
                height: 0.09,
                period: 1.0,
            },
        ),
        (
            "hop_slow",
            MotionKind::Hop {
                height: 0.08,
                period: 1.33,
            },
        ),
        ("stand", MotionKind::Stand { amplitude: 0.2 }),
        ("stand_wave", MotionKind::Stand { amplitude: 0.4 }),
    ]
}

pub fn clip(
    model: &RobotModel,
    name: &str,
    kind: MotionKind,
    defect: Option<Defect>,
    seconds: f64,
    fps: f64,
) -> SyntheticClip {
    let truth = generate(model, kind, seconds, fps);
    let (truth, source) = match defect {
        Some(d) => apply_defect(model, &truth, d),
        None => {
            let s = render_source(model, &truth);
            (truth, s)
        }
    };
    SyntheticClip {
        name: name.into(),
        kind,
        defect,
        truth,
        source,
    }
}

/// Four-second clips at 30 fps: every clean base motion plus defect
/// variants for the feasibility, grounding and skating ablations.
pub fn synthetic_suite(model: &RobotModel) -> Vec<SyntheticClip> {
    let fps = 30.0;
    let mut out: Vec<SyntheticClip> = clean_kinds()
        .into_iter()
        .map(|(name, kind)| clip(model, name, kind, None, 4.0, fps))
        .collect();
    let defects = [
        ("overextend", Defect::ElbowOverExtension { inset: 0.01 }),
        ("float", Defect::VerticalOffset { dz: 0.04 }),
        ("penetrate", Defect::VerticalOffset { dz: -0.03 }),
        (
            "slide",
            Defect::Slide {
                amplitude: 0.03,
                frequency: 1.5,
            },
        ),
    ];
    for base in ["walk", "squat", "stand"] {
        let kind = clean_kinds().into_iter().find(|(n, _)| *n == base).unwrap().1;
        for (tag, d) in defects {
            out.push(clip(model, &format!("{base}_{tag}"), kind, Some(d), 4.0, fps));
        }
    }
    out
}
