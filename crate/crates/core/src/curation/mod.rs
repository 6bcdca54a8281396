//! Physics-aware curation: ground alignment, contact scoring, chunking and
//! per-clip plausibility filtering.

mod contact;
mod ground;
mod hull;

use std::fmt;
use std::io::Write;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub use contact::{contact_scores, foot_contact_score, DEFAULT_RAMP_TOP};
pub use ground::{align_to_ground, estimate_ground_plane, DEFAULT_GROUND_TOLERANCE};
pub use hull::{base_of_support, distance_to_support, Point2};

use crate::diff::finite_difference;
use crate::error::{Error, Result};
use crate::motion::SourceMotion;
use crate::signal::{smooth_motion, FilterSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterThresholds {
    /// m/s^3
    pub max_root_jerk: f64,
    pub min_contact_score: f64,
    /// m
    pub min_pelvis_height: f64,
    /// m
    pub max_pelvis_height: f64,
    /// m
    pub max_pelvis_bos_dist: f64,
    /// m
    pub max_spine_bos_dist: f64,
    /// s
    pub clip_seconds: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            max_root_jerk: 50.0,
            min_contact_score: 0.6,
            min_pelvis_height: 0.6,
            max_pelvis_height: 1.5,
            max_pelvis_bos_dist: 0.06,
            max_spine_bos_dist: 0.11,
            clip_seconds: 4.0,
        }
    }
}

impl FilterThresholds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("max_root_jerk", self.max_root_jerk),
            ("min_contact_score", self.min_contact_score),
            ("min_pelvis_height", self.min_pelvis_height),
            ("max_pelvis_height", self.max_pelvis_height),
            ("max_pelvis_bos_dist", self.max_pelvis_bos_dist),
            ("max_spine_bos_dist", self.max_spine_bos_dist),
            ("clip_seconds", self.clip_seconds),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if self.min_pelvis_height >= self.max_pelvis_height {
            return Err(Error::param("min_pelvis_height", "must be below max_pelvis_height"));
        }
        Ok(())
    }
}

/// Source joint names and contact parameters used by curation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    pub root_joint: String,
    pub spine_joint: String,
    /// Joints whose horizontal projections span the base of support.
    pub support_joints: Vec<String>,
    /// Contact ramp height, m.
    pub ramp_top: f64,
    /// Ground vote band half-width, m.
    pub ground_tolerance: f64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            root_joint: "pelvis".into(),
            spine_joint: "spine1".into(),
            support_joints: ["left_foot", "right_foot", "left_ankle", "right_ankle"]
                .map(String::from)
                .to_vec(),
            ramp_top: DEFAULT_RAMP_TOP,
            ground_tolerance: DEFAULT_GROUND_TOLERANCE,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ramp_top > 0.0) {
            return Err(Error::param("ramp_top", "must be positive"));
        }
        if !(self.ground_tolerance > 0.0) {
            return Err(Error::param("ground_tolerance", "must be positive"));
        }
        if self.support_joints.is_empty() {
            return Err(Error::param("support_joints", "at least one joint is required"));
        }
        Ok(())
    }
}

/// Largest magnitude of the root joint's third time derivative.
pub fn root_jerk_max(motion: &SourceMotion, root_joint: &str) -> Result<f64> {
    let root = motion.require_joint(root_joint)?;
    if motion.frame_count() < 4 {
        return Err(Error::TooFewFrames {
            needed: 4,
            got: motion.frame_count(),
        });
    }
    let jerk = finite_difference(&motion.joint_track(root), 3, motion.fps())?;
    Ok(jerk.iter().map(Vector3::norm).fold(0.0, f64::max))
}

/// Number of frames per clip for the given duration.
pub fn clip_frames(clip_seconds: f64, fps: f64) -> usize {
    (clip_seconds * fps).round() as usize
}

/// Consecutive non-overlapping clips; a short remainder is dropped.
pub fn chunk(motion: &SourceMotion, clip_seconds: f64) -> Result<Vec<SourceMotion>> {
    if !(clip_seconds > 0.0) {
        return Err(Error::param("clip_seconds", "must be positive"));
    }
    chunk_ranges(motion.frame_count(), clip_frames(clip_seconds, motion.fps()))
        .map(|(start, end)| motion.slice(start, end))
        .collect()
}

fn chunk_ranges(frames: usize, len: usize) -> impl Iterator<Item = (usize, usize)> {
    let count = frames.checked_div(len).unwrap_or(0);
    (0..count).map(move |k| (k * len, (k + 1) * len))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    RootJerk,
    FootContactScore,
    MinPelvisHeight,
    MaxPelvisHeight,
    PelvisBaseOfSupport,
    SpineBaseOfSupport,
}

impl Criterion {
    pub fn label(self) -> &'static str {
        match self {
            Criterion::RootJerk => "root jerk",
            Criterion::FootContactScore => "foot contact score",
            Criterion::MinPelvisHeight => "min pelvis height",
            Criterion::MaxPelvisHeight => "max pelvis height",
            Criterion::PelvisBaseOfSupport => "pelvis distance to base of support",
            Criterion::SpineBaseOfSupport => "spine distance to base of support",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureReason {
    pub criterion: Criterion,
    pub measured: f64,
    pub threshold: f64,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.criterion {
            Criterion::FootContactScore | Criterion::MinPelvisHeight => "<=",
            _ => ">=",
        };
        write!(
            f,
            "{} {:.4} {op} {}",
            self.criterion.label(),
            self.measured,
            self.threshold
        )
    }
}

/// Values measured on one clip for each filtering criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipMeasurements {
    pub root_jerk: f64,
    pub contact_score: f64,
    pub min_pelvis_z: f64,
    pub max_pelvis_z: f64,
    pub pelvis_bos: f64,
    pub spine_bos: f64,
}

pub fn measure_clip(clip: &SourceMotion, cfg: &CurationConfig) -> Result<ClipMeasurements> {
    let root = clip.require_joint(&cfg.root_joint)?;
    let spine = clip.require_joint(&cfg.spine_joint)?;
    let support = cfg
        .support_joints
        .iter()
        .map(|n| clip.require_joint(n))
        .collect::<Result<Vec<_>>>()?;

    let root_jerk = root_jerk_max(clip, &cfg.root_joint)?;
    let contact_score = foot_contact_score(&contact_scores(clip, cfg.ramp_top)?)?;
    let mut m = ClipMeasurements {
        root_jerk,
        contact_score,
        min_pelvis_z: f64::INFINITY,
        max_pelvis_z: f64::NEG_INFINITY,
        pelvis_bos: 0.0,
        spine_bos: 0.0,
    };
    let mut feet = Vec::with_capacity(support.len());
    for frame in clip.joints() {
        let pelvis = frame[root];
        m.min_pelvis_z = m.min_pelvis_z.min(pelvis.z);
        m.max_pelvis_z = m.max_pelvis_z.max(pelvis.z);
        feet.clear();
        feet.extend(support.iter().map(|&i| frame[i]));
        let hull = base_of_support(&feet);
        m.pelvis_bos = m.pelvis_bos.max(distance_to_support(&pelvis, &hull));
        m.spine_bos = m.spine_bos.max(distance_to_support(&frame[spine], &hull));
    }
    Ok(m)
}

/// Applies every threshold; returns the measurements and the violated
/// criteria (empty when the clip passes).
pub fn filter_clip(
    clip: &SourceMotion,
    th: &FilterThresholds,
    cfg: &CurationConfig,
) -> Result<(ClipMeasurements, Vec<FailureReason>)> {
    let m = measure_clip(clip, cfg)?;
    let checks = [
        (
            Criterion::RootJerk,
            m.root_jerk,
            th.max_root_jerk,
            m.root_jerk < th.max_root_jerk,
        ),
        (
            Criterion::FootContactScore,
            m.contact_score,
            th.min_contact_score,
            m.contact_score > th.min_contact_score,
        ),
        (
            Criterion::MinPelvisHeight,
            m.min_pelvis_z,
            th.min_pelvis_height,
            m.min_pelvis_z > th.min_pelvis_height,
        ),
        (
            Criterion::MaxPelvisHeight,
            m.max_pelvis_z,
            th.max_pelvis_height,
            m.max_pelvis_z < th.max_pelvis_height,
        ),
        (
            Criterion::PelvisBaseOfSupport,
            m.pelvis_bos,
            th.max_pelvis_bos_dist,
            m.pelvis_bos < th.max_pelvis_bos_dist,
        ),
        (
            Criterion::SpineBaseOfSupport,
            m.spine_bos,
            th.max_spine_bos_dist,
            m.spine_bos < th.max_spine_bos_dist,
        ),
    ];
    let reasons = checks
        .into_iter()
        .filter(|c| !c.3)
        .map(|(criterion, measured, threshold, _)| FailureReason {
            criterion,
            measured,
            threshold,
        })
        .collect();
    Ok((m, reasons))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipEntry {
    pub clip_index: usize,
    pub start_frame: usize,
    /// Exclusive.
    pub end_frame: usize,
    pub pass: bool,
    pub measurements: ClipMeasurements,
    pub reasons: Vec<FailureReason>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurationTotals {
    pub kept: usize,
    pub discarded: usize,
    pub retained_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub frames: usize,
    pub fps: f64,
    pub clip_frames: usize,
    pub ground_height: f64,
    pub clips: Vec<ClipEntry>,
    pub totals: CurationTotals,
}

pub const CURATION_CSV_HEADER: [&str; 12] = [
    "source",
    "clip_index",
    "start_frame",
    "end_frame",
    "pass",
    "jerk",
    "contact_score",
    "min_pelvis_z",
    "max_pelvis_z",
    "pelvis_bos",
    "spine_bos",
    "reasons",
];

impl CurationReport {
    /// Appends one row per clip, tagged with `source`.
    pub fn write_csv_rows<W: Write>(&self, source: &str, w: &mut csv::Writer<W>) -> Result<()> {
        for c in &self.clips {
            let m = &c.measurements;
            let reasons: Vec<String> = c.reasons.iter().map(|r| r.criterion.label().to_owned()).collect();
            w.write_record([
                source.to_owned(),
                c.clip_index.to_string(),
                c.start_frame.to_string(),
                c.end_frame.to_string(),
                c.pass.to_string(),
                m.root_jerk.to_string(),
                m.contact_score.to_string(),
                m.min_pelvis_z.to_string(),
                m.max_pelvis_z.to_string(),
                m.pelvis_bos.to_string(),
                m.spine_bos.to_string(),
                reasons.join(";"),
            ])?;
        }
        Ok(())
    }
}

/// Full curation: smooth, estimate and align ground, chunk, filter.
pub fn curate(
    motion: &SourceMotion,
    th: &FilterThresholds,
    spec: &FilterSpec,
    cfg: &CurationConfig,
) -> Result<(Vec<SourceMotion>, CurationReport)> {
    th.validate()?;
    cfg.validate()?;
    let smoothed = smooth_motion(motion, spec, &cfg.root_joint)?;
    let plane = estimate_ground_plane(&smoothed, cfg.ground_tolerance)?;
    let aligned = align_to_ground(&smoothed, &plane)?;
    let len = clip_frames(th.clip_seconds, aligned.fps());

    let mut kept = Vec::new();
    let mut clips = Vec::new();
    for (k, (start, end)) in chunk_ranges(aligned.frame_count(), len).enumerate() {
        let clip = aligned.slice(start, end)?;
        let (measurements, reasons) = filter_clip(&clip, th, cfg)?;
        let pass = reasons.is_empty();
        if pass {
            kept.push(clip);
        }
        clips.push(ClipEntry {
            clip_index: k,
            start_frame: start,
            end_frame: end,
            pass,
            measurements,
            reasons,
        });
    }
    let totals = CurationTotals {
        kept: kept.len(),
        discarded: clips.len() - kept.len(),
        retained_seconds: kept.iter().map(|c| c.frame_count() as f64 / c.fps()).sum(),
    };
    Ok((
        kept,
        CurationReport {
            frames: motion.frame_count(),
            fps: motion.fps(),
            clip_frames: len,
            ground_height: plane.height,
            clips,
            totals,
        },
    ))
}
