//! Core motion containers shared by every stage of the pipeline.
//!
//! World frame is z-up, units are meters and seconds. All containers are
//! validated on construction and immutable afterwards; stages that change a
//! motion build a new one.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of frames a source motion must carry.
pub const MIN_FRAMES: usize = 3;

/// The four foot contact regions: left heel, left toe, right heel, right toe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FootRegion {
    LH,
    LT,
    RH,
    RT,
}

impl FootRegion {
    pub const ALL: [FootRegion; 4] = [FootRegion::LH, FootRegion::LT, FootRegion::RH, FootRegion::RT];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FootRegion::LH => "LH",
            FootRegion::LT => "LT",
            FootRegion::RH => "RH",
            FootRegion::RT => "RT",
        }
    }
}

impl fmt::Display for FootRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FootRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LH" => Ok(FootRegion::LH),
            "LT" => Ok(FootRegion::LT),
            "RH" => Ok(FootRegion::RH),
            "RT" => Ok(FootRegion::RT),
            other => Err(Error::schema("foot region", format!("unknown region `{other}`"))),
        }
    }
}

/// Time series of global joint positions plus per-region foot contact markers.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceMotion {
    fps: f64,
    joint_names: Vec<String>,
    /// `joints[t][i]`
    joints: Vec<Vec<Vector3<f64>>>,
    /// `markers[r][t][k]`
    markers: [Vec<Vec<Vector3<f64>>>; 4],
}

impl SourceMotion {
    pub fn new(
        fps: f64,
        joint_names: Vec<String>,
        joints: Vec<Vec<Vector3<f64>>>,
        markers: [Vec<Vec<Vector3<f64>>>; 4],
    ) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::schema("fps", format!("must be positive and finite, got {fps}")));
        }
        if joints.len() < MIN_FRAMES {
            return Err(Error::TooFewFrames {
                needed: MIN_FRAMES,
                got: joints.len(),
            });
        }
        let frames = joints.len();
        for (t, frame) in joints.iter().enumerate() {
            if frame.len() != joint_names.len() {
                return Err(Error::schema(
                    format!("frame {t}"),
                    format!("expected {} joints, found {}", joint_names.len(), frame.len()),
                ));
            }
            for (i, p) in frame.iter().enumerate() {
                if !p.iter().all(|v| v.is_finite()) {
                    return Err(Error::schema(
                        format!("frame {t}"),
                        format!("joint {i} (`{}`) has a non-finite coordinate", joint_names[i]),
                    ));
                }
            }
        }
        for region in FootRegion::ALL {
            let track = &markers[region.index()];
            if track.len() != frames {
                return Err(Error::schema(
                    format!("markers {region}"),
                    format!("expected {frames} frames, found {}", track.len()),
                ));
            }
            let count = track.first().map_or(0, Vec::len);
            for (t, frame) in track.iter().enumerate() {
                if frame.len() != count {
                    return Err(Error::schema(
                        format!("frame {t}"),
                        format!("region {region} has {} markers, expected {count}", frame.len()),
                    ));
                }
                if frame.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
                    return Err(Error::schema(
                        format!("frame {t}"),
                        format!("region {region} marker has a non-finite coordinate"),
                    ));
                }
            }
        }
        Ok(Self {
            fps,
            joint_names,
            joints,
            markers,
        })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_count(&self) -> usize {
        self.joints.len()
    }

    pub fn duration(&self) -> f64 {
        (self.frame_count() - 1) as f64 / self.fps
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    pub fn require_joint(&self, name: &str) -> Result<usize> {
        self.joint_index(name)
            .ok_or_else(|| Error::MissingJoint(name.to_owned()))
    }

    pub fn joints(&self) -> &[Vec<Vector3<f64>>] {
        &self.joints
    }

    pub fn frame(&self, t: usize) -> &[Vector3<f64>] {
        &self.joints[t]
    }

    /// Trajectory of a single joint.
    pub fn joint_track(&self, joint: usize) -> Vec<Vector3<f64>> {
        self.joints.iter().map(|f| f[joint]).collect()
    }

    pub fn markers(&self, region: FootRegion) -> &[Vec<Vector3<f64>>] {
        &self.markers[region.index()]
    }

    pub fn all_markers(&self) -> &[Vec<Vec<Vector3<f64>>>; 4] {
        &self.markers
    }

    pub fn marker_count(&self) -> usize {
        self.markers.iter().map(|r| r.first().map_or(0, Vec::len)).sum()
    }

    /// Frames `[start, end)` as a new motion.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        let markers = self.markers.clone().map(|r| r[start..end].to_vec());
        Self::new(
            self.fps,
            self.joint_names.clone(),
            self.joints[start..end].to_vec(),
            markers,
        )
    }

    /// Applies `f` to every joint and marker position.
    pub fn map_points(&self, mut f: impl FnMut(Vector3<f64>) -> Vector3<f64>) -> Result<Self> {
        let joints = self
            .joints
            .iter()
            .map(|frame| frame.iter().map(|p| f(*p)).collect())
            .collect();
        let markers = self.markers.clone().map(|r| {
            r.into_iter()
                .map(|frame| frame.into_iter().map(&mut f).collect())
                .collect()
        });
        Self::new(self.fps, self.joint_names.clone(), joints, markers)
    }

    /// Rebuilds the motion with replaced joint tracks, keeping markers.
    pub fn with_joints(&self, joints: Vec<Vec<Vector3<f64>>>) -> Result<Self> {
        Self::new(self.fps, self.joint_names.clone(), joints, self.markers.clone())
    }

    pub fn with_markers(&self, markers: [Vec<Vec<Vector3<f64>>>; 4]) -> Result<Self> {
        Self::new(self.fps, self.joint_names.clone(), self.joints.clone(), markers)
    }
}

/// Per-frame joint angles and floating-root pose for a robot.
#[derive(Debug, Clone, PartialEq)]
pub struct RetargetedMotion {
    fps: f64,
    joint_names: Vec<String>,
    q: Vec<DVector<f64>>,
    root_pos: Vec<Vector3<f64>>,
    root_rot: Vec<UnitQuaternion<f64>>,
}

impl RetargetedMotion {
    pub fn new(
        fps: f64,
        joint_names: Vec<String>,
        q: Vec<DVector<f64>>,
        root_pos: Vec<Vector3<f64>>,
        root_rot: Vec<UnitQuaternion<f64>>,
    ) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::schema("fps", format!("must be positive and finite, got {fps}")));
        }
        if q.is_empty() {
            return Err(Error::TooFewFrames { needed: 1, got: 0 });
        }
        if root_pos.len() != q.len() || root_rot.len() != q.len() {
            return Err(Error::Shape(format!(
                "{} joint frames, {} root positions, {} root orientations",
                q.len(),
                root_pos.len(),
                root_rot.len()
            )));
        }
        for (t, qt) in q.iter().enumerate() {
            if qt.len() != joint_names.len() {
                return Err(Error::schema(
                    format!("frame {t}"),
                    format!("expected {} joint angles, found {}", joint_names.len(), qt.len()),
                ));
            }
            if !qt.iter().all(|v| v.is_finite()) || !root_pos[t].iter().all(|v| v.is_finite()) {
                return Err(Error::schema(format!("frame {t}"), "non-finite value"));
            }
            let n = root_rot[t].quaternion().norm();
            if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
                return Err(Error::schema(
                    format!("frame {t}"),
                    format!("root_rot is not a unit quaternion (norm {n})"),
                ));
            }
        }
        Ok(Self {
            fps,
            joint_names,
            q,
            root_pos,
            root_rot,
        })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_count(&self) -> usize {
        self.q.len()
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn q(&self) -> &[DVector<f64>] {
        &self.q
    }

    pub fn root_pos(&self) -> &[Vector3<f64>] {
        &self.root_pos
    }

    pub fn root_rot(&self) -> &[UnitQuaternion<f64>] {
        &self.root_rot
    }
}

/// Graded per-frame contact scores in `[0, 1]` for each foot region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSchedule {
    c: [Vec<f64>; 4],
}

impl ContactSchedule {
    pub fn new(c: [Vec<f64>; 4]) -> Result<Self> {
        let frames = c[0].len();
        for region in FootRegion::ALL {
            let track = &c[region.index()];
            if track.len() != frames {
                return Err(Error::Shape(format!(
                    "contact region {region} has {} frames, expected {frames}",
                    track.len()
                )));
            }
            if let Some(t) = track.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::schema(
                    format!("contact {region} frame {t}"),
                    format!("score {} outside [0, 1]", track[t]),
                ));
            }
        }
        Ok(Self { c })
    }

    /// A schedule with every region at the same constant score.
    pub fn uniform(frames: usize, score: f64) -> Result<Self> {
        Self::new(std::array::from_fn(|_| vec![score; frames]))
    }

    pub fn frame_count(&self) -> usize {
        self.c[0].len()
    }

    pub fn region(&self, region: FootRegion) -> &[f64] {
        &self.c[region.index()]
    }

    pub fn get(&self, region: FootRegion, t: usize) -> f64 {
        self.c[region.index()][t]
    }
}

/// Estimated ground height and the tolerance band used to vote for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPlane {
    pub height: f64,
    pub tolerance: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize, joints: usize) -> Vec<Vec<Vector3<f64>>> {
        vec![vec![Vector3::zeros(); joints]; n]
    }

    fn markers(n: usize) -> [Vec<Vec<Vector3<f64>>>; 4] {
        std::array::from_fn(|_| vec![vec![Vector3::zeros()]; n])
    }

    #[test]
    fn rejects_two_frames() {
        let err = SourceMotion::new(30.0, vec!["a".into()], frames(2, 1), markers(2)).unwrap_err();
        assert!(err.to_string().contains("too few frames"), "{err}");
    }

    #[test]
    fn rejects_ragged_markers() {
        let mut m = markers(4);
        m[2][3].push(Vector3::zeros());
        let err = SourceMotion::new(30.0, vec!["a".into()], frames(4, 1), m).unwrap_err();
        assert!(err.to_string().contains("frame 3"), "{err}");
    }

    #[test]
    fn rejects_nan_joint() {
        let mut j = frames(10, 2);
        j[7][1].y = f64::NAN;
        let err = SourceMotion::new(30.0, vec!["a".into(), "b".into()], j, markers(10)).unwrap_err();
        assert!(err.to_string().contains("frame 7"), "{err}");
    }

    #[test]
    fn contact_schedule_bounds() {
        assert!(ContactSchedule::new([vec![0.5], vec![1.0], vec![0.0], vec![1.2]]).is_err());
        assert!(ContactSchedule::new([vec![0.5], vec![1.0], vec![0.0], vec![0.2, 0.1]]).is_err());
        assert!(ContactSchedule::uniform(3, 0.7).is_ok());
    }

    #[test]
    fn retargeted_rejects_non_unit_quaternion() {
        let q = nalgebra::Quaternion::new(2.0, 0.0, 0.0, 0.0);
        let err = RetargetedMotion::new(
            30.0,
            vec![],
            vec![DVector::zeros(0)],
            vec![Vector3::zeros()],
            vec![UnitQuaternion::new_unchecked(q)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("unit quaternion"));
    }
}
