//! Physical-reliability metrics of a retargeted motion.
//!
//! Every metric is the percentage of qualifying frames (or contact
//! region-frames) over a reported denominator. Contact metrics without any
//! contact frame are undefined and reported as `None`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics_motion, FkResult, JointCorrespondence};
use crate::motion::{ContactSchedule, FootRegion, RetargetedMotion, SourceMotion};
use crate::robot::RobotModel;

/// Mean joint position error below which a frame counts as faithful, m.
pub const FIDELITY_POSITION_TOL: f64 = 0.10;
/// Mean bone direction error below which a frame counts as faithful, deg.
pub const FIDELITY_ANGLE_TOL_DEG: f64 = 10.0;
/// Graded contact score at or above which a region-frame is a contact.
pub const CONTACT_THRESHOLD: f64 = 0.5;
pub const FLOAT_TOL: f64 = 0.01;
pub const PENETRATION_TOL: f64 = 0.01;
/// Horizontal foot speed below which a contact is not skating, m/s.
pub const SKATE_SPEED_TOL: f64 = 0.10;

/// Qualifying count over a denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub count: usize,
    pub total: usize,
}

impl Ratio {
    pub fn pct(self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.count as f64 / self.total as f64)
    }
}

fn check_frames(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!(
            "{what} has {b} frames, retargeted motion has {a}"
        )));
    }
    Ok(())
}

fn fidelity_ratio(fk: &FkResult, source: &SourceMotion, corr: &JointCorrespondence) -> Result<Ratio> {
    check_frames(fk.frame_count(), source.frame_count(), "source")?;
    let pairs = corr.pairs();
    let mut ok = 0;
    for (t, pose) in fk.frames.iter().enumerate() {
        let frame = source.frame(t);
        let pos_err = pairs
            .iter()
            .map(|p| (pose.body_pos[p.body] - frame[p.source]).norm())
            .sum::<f64>()
            / pairs.len().max(1) as f64;
        let mut angle_sum = 0.0;
        for &(a, b) in corr.bones() {
            let (pa, pb) = (&pairs[a], &pairs[b]);
            let ds = frame[pb.source] - frame[pa.source];
            let dr = pose.body_pos[pb.body] - pose.body_pos[pa.body];
            if ds.norm() < 1e-12 || dr.norm() < 1e-12 {
                return Err(Error::ZeroLengthBone {
                    from: format!("pair {a}"),
                    to: format!("pair {b}"),
                    frame: t,
                });
            }
            let cos = ds.normalize().dot(&dr.normalize()).clamp(-1.0, 1.0);
            angle_sum += cos.acos().to_degrees();
        }
        let angle_err = angle_sum / corr.bones().len().max(1) as f64;
        if pos_err < FIDELITY_POSITION_TOL && angle_err < FIDELITY_ANGLE_TOL_DEG {
            ok += 1;
        }
    }
    Ok(Ratio {
        count: ok,
        total: fk.frame_count(),
    })
}

/// Frames whose mean joint position error is under 10 cm and mean bone
/// angle error under 10 degrees.
pub fn motion_fidelity_pct(
    retargeted: &RetargetedMotion,
    source: &SourceMotion,
    corr: &JointCorrespondence,
    model: &RobotModel,
) -> Result<f64> {
    let fk = forward_kinematics_motion(model, retargeted)?;
    Ok(fidelity_ratio(&fk, source, corr)?.pct().unwrap_or(100.0))
}

fn feasibility_ratio(retargeted: &RetargetedMotion, model: &RobotModel, margin: f64, fps: f64) -> Ratio {
    let q = retargeted.q();
    let n = q.len();
    let bands: Vec<_> = model
        .joints()
        .iter()
        .map(|j| (j.position_band(margin), j.velocity_band(margin)))
        .collect();
    let ok = (0..n)
        .filter(|&t| {
            // The last frame reuses the final forward difference.
            let (a, b) = if t + 1 < n {
                (t, t + 1)
            } else {
                (t.saturating_sub(1), t)
            };
            bands.iter().enumerate().all(|(j, &((lo, hi), (vlo, vhi)))| {
                let v = (q[b][j] - q[a][j]) * fps;
                let pos_ok = lo <= q[t][j] && q[t][j] <= hi;
                pos_ok && (n < 2 || (vlo <= v && v <= vhi))
            })
        })
        .count();
    Ratio { count: ok, total: n }
}

/// Frames where every joint position and velocity lies inside its
/// margin-adjusted band.
pub fn joint_feasibility_pct(retargeted: &RetargetedMotion, model: &RobotModel, margin: f64, fps: f64) -> f64 {
    feasibility_ratio(retargeted, model, margin, fps).pct().unwrap_or(100.0)
}

fn contact_ratio(
    fk: &FkResult,
    contacts: &ContactSchedule,
    frames: usize,
    mut ok: impl FnMut(FootRegion, usize) -> bool,
) -> Ratio {
    let mut r = Ratio::default();
    for region in FootRegion::ALL {
        for t in 0..frames.min(fk.frame_count()) {
            if contacts.get(region, t) >= CONTACT_THRESHOLD {
                r.total += 1;
                if ok(region, t) {
                    r.count += 1;
                }
            }
        }
    }
    r
}

fn floating_ratio(fk: &FkResult, contacts: &ContactSchedule) -> Ratio {
    contact_ratio(fk, contacts, fk.frame_count(), |r, t| {
        fk.frames[t].site(r).z <= FLOAT_TOL
    })
}

fn penetration_ratio(fk: &FkResult, contacts: &ContactSchedule) -> Ratio {
    contact_ratio(fk, contacts, fk.frame_count(), |r, t| {
        fk.frames[t].site(r).z >= -PENETRATION_TOL
    })
}

fn skating_ratio(fk: &FkResult, contacts: &ContactSchedule, fps: f64) -> Ratio {
    let frames = fk.frame_count().saturating_sub(1);
    contact_ratio(fk, contacts, frames, |r, t| {
        let d = (fk.frames[t + 1].site(r) - fk.frames[t].site(r)) * fps;
        d.xy().norm() < SKATE_SPEED_TOL
    })
}

fn contact_fk(retargeted: &RetargetedMotion, model: &RobotModel, contacts: &ContactSchedule) -> Result<FkResult> {
    check_frames(retargeted.frame_count(), contacts.frame_count(), "contact schedule")?;
    forward_kinematics_motion(model, retargeted)
}

/// Contact region-frames with the foot site at most 1 cm above ground.
pub fn non_floating_pct(
    retargeted: &RetargetedMotion,
    model: &RobotModel,
    contacts: &ContactSchedule,
) -> Result<Option<f64>> {
    Ok(floating_ratio(&contact_fk(retargeted, model, contacts)?, contacts).pct())
}

/// Contact region-frames with the foot site at most 1 cm below ground.
pub fn non_penetration_pct(
    retargeted: &RetargetedMotion,
    model: &RobotModel,
    contacts: &ContactSchedule,
) -> Result<Option<f64>> {
    Ok(penetration_ratio(&contact_fk(retargeted, model, contacts)?, contacts).pct())
}

/// Contact region-frames (all but the last frame) whose horizontal foot
/// speed is under 10 cm/s.
pub fn non_skating_pct(
    retargeted: &RetargetedMotion,
    model: &RobotModel,
    contacts: &ContactSchedule,
    fps: f64,
) -> Result<Option<f64>> {
    if retargeted.frame_count() < 2 {
        return Err(Error::TooFewFrames {
            needed: 2,
            got: retargeted.frame_count(),
        });
    }
    Ok(skating_ratio(&contact_fk(retargeted, model, contacts)?, contacts, fps).pct())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub motion_fidelity_pct: f64,
    pub joint_feasibility_pct: f64,
    pub non_floating_pct: Option<f64>,
    pub non_penetration_pct: Option<f64>,
    pub non_skating_pct: Option<f64>,
    pub frames: usize,
    pub fidelity: Ratio,
    pub feasibility: Ratio,
    pub non_floating: Ratio,
    pub non_penetration: Ratio,
    pub non_skating: Ratio,
}

pub const METRIC_NAMES: [&str; 5] = [
    "motion_fidelity_pct",
    "joint_feasibility_pct",
    "non_floating_pct",
    "non_penetration_pct",
    "non_skating_pct",
];

impl QualityReport {
    pub fn values(&self) -> [Option<f64>; 5] {
        [
            Some(self.motion_fidelity_pct),
            Some(self.joint_feasibility_pct),
            self.non_floating_pct,
            self.non_penetration_pct,
            self.non_skating_pct,
        ]
    }
}

/// All five metrics with their backing counts.
pub fn quality_report(
    retargeted: &RetargetedMotion,
    source: &SourceMotion,
    corr: &JointCorrespondence,
    model: &RobotModel,
    contacts: &ContactSchedule,
    margin: f64,
    fps: f64,
) -> Result<QualityReport> {
    if retargeted.frame_count() < 2 {
        return Err(Error::TooFewFrames {
            needed: 2,
            got: retargeted.frame_count(),
        });
    }
    let fk = contact_fk(retargeted, model, contacts)?;
    let fidelity = fidelity_ratio(&fk, source, corr)?;
    let feasibility = feasibility_ratio(retargeted, model, margin, fps);
    let non_floating = floating_ratio(&fk, contacts);
    let non_penetration = penetration_ratio(&fk, contacts);
    let non_skating = skating_ratio(&fk, contacts, fps);
    Ok(QualityReport {
        motion_fidelity_pct: fidelity.pct().unwrap_or(100.0),
        joint_feasibility_pct: feasibility.pct().unwrap_or(100.0),
        non_floating_pct: non_floating.pct(),
        non_penetration_pct: non_penetration.pct(),
        non_skating_pct: non_skating.pct(),
        frames: retargeted.frame_count(),
        fidelity,
        feasibility,
        non_floating,
        non_penetration,
        non_skating,
    })
}

/// Mean and median of one metric over the clips where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub clips: usize,
}

fn summarize(values: impl Iterator<Item = Option<f64>>) -> MetricSummary {
    let mut v: Vec<f64> = values.flatten().collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = (n > 0).then(|| v.iter().sum::<f64>() / n as f64);
    let median = (n > 0).then(|| {
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    });
    MetricSummary { mean, median, clips: n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub clips: usize,
    pub motion_fidelity_pct: MetricSummary,
    pub joint_feasibility_pct: MetricSummary,
    pub non_floating_pct: MetricSummary,
    pub non_penetration_pct: MetricSummary,
    pub non_skating_pct: MetricSummary,
}

impl CorpusSummary {
    pub fn metrics(&self) -> [(&'static str, &MetricSummary); 5] {
        [
            (METRIC_NAMES[0], &self.motion_fidelity_pct),
            (METRIC_NAMES[1], &self.joint_feasibility_pct),
            (METRIC_NAMES[2], &self.non_floating_pct),
            (METRIC_NAMES[3], &self.non_penetration_pct),
            (METRIC_NAMES[4], &self.non_skating_pct),
        ]
    }
}

pub fn summarize_corpus<'a>(reports: impl IntoIterator<Item = &'a QualityReport>) -> CorpusSummary {
    let reports: Vec<&QualityReport> = reports.into_iter().collect();
    let col = |k: usize| summarize(reports.iter().map(|r| r.values()[k]));
    CorpusSummary {
        clips: reports.len(),
        motion_fidelity_pct: col(0),
        joint_feasibility_pct: col(1),
        non_floating_pct: col(2),
        non_penetration_pct: col(3),
        non_skating_pct: col(4),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

pub const METRICS_CSV_HEADER: [&str; 12] = [
    "clip",
    "frames",
    "motion_fidelity_pct",
    "joint_feasibility_pct",
    "non_floating_pct",
    "non_penetration_pct",
    "non_skating_pct",
    "fidelity_frames",
    "feasible_frames",
    "contact_frames",
    "non_floating_frames",
    "non_skating_frames",
];

/// One row per clip followed by `mean` and `median` rows. Undefined values
/// are left empty.
pub fn write_metrics_csv<W: Write>(rows: &[(String, QualityReport)], summary: &CorpusSummary, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(METRICS_CSV_HEADER)?;
    for (name, r) in rows {
        let mut rec = vec![name.clone(), r.frames.to_string()];
        rec.extend(r.values().iter().map(|v| fmt_opt(*v)));
        rec.extend(
            [
                r.fidelity.count,
                r.feasibility.count,
                r.non_floating.total,
                r.non_floating.count,
                r.non_skating.count,
            ]
            .iter()
            .map(usize::to_string),
        );
        out.write_record(rec)?;
    }
    for (label, pick) in [("mean", 0), ("median", 1)] {
        let mut rec = vec![label.to_string(), String::new()];
        rec.extend(
            summary
                .metrics()
                .iter()
                .map(|(_, m)| fmt_opt(if pick == 0 { m.mean } else { m.median })),
        );
        rec.extend(std::iter::repeat_n(String::new(), 5));
        out.write_record(rec)?;
    }
    out.flush().map_err(|e| Error::Io {
        path: "<metrics csv>".into(),
        source: e,
    })
}
