//! JSON file formats for source motions, retargeted motions and robot models.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DVector, Quaternion, Unit, UnitQuaternion, Vector3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{FootRegion, RetargetedMotion, SourceMotion};
use crate::robot::{Body, FootSite, Joint, RobotModel};

type Point = [Option<f64>; 3];

#[derive(Serialize, Deserialize)]
struct SourceFile {
    fps: f64,
    joint_names: Vec<String>,
    frames: Vec<SourceFrame>,
}

#[derive(Serialize, Deserialize)]
struct SourceFrame {
    joints: Vec<Point>,
    markers: BTreeMap<String, Vec<Point>>,
}

#[derive(Serialize, Deserialize)]
struct RetargetedFile {
    fps: f64,
    joint_names: Vec<String>,
    frames: Vec<RetargetedFrame>,
}

#[derive(Serialize, Deserialize)]
struct RetargetedFrame {
    q: Vec<Option<f64>>,
    root_pos: Point,
    root_rot: [Option<f64>; 4],
}

#[derive(Serialize, Deserialize)]
struct RobotFile {
    bodies: Vec<BodyEntry>,
    joints: Vec<JointEntry>,
    foot_sites: BTreeMap<String, SiteEntry>,
    #[serde(default = "default_balance")]
    balance_bodies: [String; 2],
}

#[derive(Serialize, Deserialize)]
struct BodyEntry {
    name: String,
    parent: Option<String>,
    offset: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct JointEntry {
    name: String,
    body: String,
    axis: [f64; 3],
    q_min: f64,
    q_max: f64,
    v_max: f64,
}

#[derive(Serialize, Deserialize)]
struct SiteEntry {
    body: String,
    offset: [f64; 3],
}

fn default_balance() -> [String; 2] {
    ["pelvis".into(), "spine".into()]
}

/// Replaces bare `NaN`, `Infinity` and `-Infinity` tokens (as emitted by
/// some JSON writers) with `null` so they surface as located validation
/// errors instead of opaque parse failures.
fn sanitize_non_finite(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
        } else {
            let token = ["-Infinity", "Infinity", "NaN"]
                .into_iter()
                .find(|t| rest.starts_with(t));
            if let Some(token) = token {
                out.push_str("null");
                rest = &rest[token.len()..];
                continue;
            }
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&sanitize_non_finite(&text)).map_err(|source| Error::Parse {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    let bytes = if pretty {
        serde_json::to_vec_pretty(value)
    } else {
        serde_json::to_vec(value)
    }
    .expect("in-memory serialization cannot fail");
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn point(p: &Point, location: impl FnOnce() -> String) -> Result<Vector3<f64>> {
    match p {
        [Some(x), Some(y), Some(z)] if x.is_finite() && y.is_finite() && z.is_finite() => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(Error::schema(location(), "coordinate is missing or not finite")),
    }
}

fn wrap(p: &Vector3<f64>) -> Point {
    [Some(p.x), Some(p.y), Some(p.z)]
}

fn with_path(path: &Path, err: Error) -> Error {
    match err {
        Error::Schema { location, message } => Error::Schema {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    }
}

pub fn load_source_motion(path: impl AsRef<Path>) -> Result<SourceMotion> {
    let path = path.as_ref();
    let file: SourceFile = read_json(path)?;
    source_from_file(file).map_err(|e| with_path(path, e))
}

/// Parses a source motion from JSON text.
pub fn parse_source_motion(text: &str) -> Result<SourceMotion> {
    let file: SourceFile = serde_json::from_str(&sanitize_non_finite(text)).map_err(|source| Error::Parse {
        path: "<memory>".into(),
        source,
    })?;
    source_from_file(file)
}

fn source_from_file(file: SourceFile) -> Result<SourceMotion> {
    let mut joints = Vec::with_capacity(file.frames.len());
    let mut markers: [Vec<Vec<Vector3<f64>>>; 4] = Default::default();
    for (t, frame) in file.frames.iter().enumerate() {
        let row = frame
            .joints
            .iter()
            .enumerate()
            .map(|(i, p)| {
                point(p, || {
                    let name = file.joint_names.get(i).map_or("?", String::as_str);
                    format!("frame {t}: joint {i} (`{name}`)")
                })
            })
            .collect::<Result<Vec<_>>>()?;
        joints.push(row);
        for key in frame.markers.keys() {
            key.parse::<FootRegion>()
                .map_err(|_| Error::schema(format!("frame {t}: markers"), format!("unknown region `{key}`")))?;
        }
        for region in FootRegion::ALL {
            let pts = frame
                .markers
                .get(region.as_str())
                .ok_or_else(|| Error::schema(format!("frame {t}: markers"), format!("missing region {region}")))?;
            let row = pts
                .iter()
                .enumerate()
                .map(|(k, p)| point(p, || format!("frame {t}: marker {region}[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            markers[region.index()].push(row);
        }
    }
    SourceMotion::new(file.fps, file.joint_names, joints, markers)
}

fn source_to_file(motion: &SourceMotion) -> SourceFile {
    let frames = (0..motion.frame_count())
        .map(|t| SourceFrame {
            joints: motion.frame(t).iter().map(wrap).collect(),
            markers: FootRegion::ALL
                .iter()
                .map(|r| (r.as_str().to_owned(), motion.markers(*r)[t].iter().map(wrap).collect()))
                .collect(),
        })
        .collect();
    SourceFile {
        fps: motion.fps(),
        joint_names: motion.joint_names().to_vec(),
        frames,
    }
}

pub fn save_source_motion(motion: &SourceMotion, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &source_to_file(motion), false)
}

pub fn source_motion_to_string(motion: &SourceMotion) -> String {
    serde_json::to_string(&source_to_file(motion)).expect("in-memory serialization cannot fail")
}

pub fn save_retargeted_motion(motion: &RetargetedMotion, path: impl AsRef<Path>) -> Result<()> {
    let frames = (0..motion.frame_count())
        .map(|t| {
            let q = motion.root_rot()[t].into_inner();
            RetargetedFrame {
                q: motion.q()[t].iter().map(|v| Some(*v)).collect(),
                root_pos: wrap(&motion.root_pos()[t]),
                root_rot: [Some(q.w), Some(q.i), Some(q.j), Some(q.k)],
            }
        })
        .collect();
    let file = RetargetedFile {
        fps: motion.fps(),
        joint_names: motion.joint_names().to_vec(),
        frames,
    };
    write_json(path.as_ref(), &file, false)
}

pub fn load_retargeted_motion(path: impl AsRef<Path>) -> Result<RetargetedMotion> {
    let path = path.as_ref();
    let file: RetargetedFile = read_json(path)?;
    retargeted_from_file(file).map_err(|e| with_path(path, e))
}

fn retargeted_from_file(file: RetargetedFile) -> Result<RetargetedMotion> {
    let n = file.frames.len();
    let (mut q, mut root_pos, mut root_rot) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (t, frame) in file.frames.into_iter().enumerate() {
        let angles = frame
            .q
            .iter()
            .enumerate()
            .map(|(j, v)| match v {
                Some(v) if v.is_finite() => Ok(*v),
                _ => Err(Error::schema(format!("frame {t}: q[{j}]"), "missing or not finite")),
            })
            .collect::<Result<Vec<_>>>()?;
        q.push(DVector::from_vec(angles));
        root_pos.push(point(&frame.root_pos, || format!("frame {t}: root_pos"))?);
        let [Some(w), Some(x), Some(y), Some(z)] = frame.root_rot else {
            return Err(Error::schema(format!("frame {t}: root_rot"), "missing component"));
        };
        let quat = Quaternion::new(w, x, y, z);
        let norm = quat.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::schema(
                format!("frame {t}: root_rot"),
                format!("not a unit quaternion (norm {norm})"),
            ));
        }
        // Exact bits are kept so load(save(m)) reproduces m.
        root_rot.push(UnitQuaternion::new_unchecked(quat));
    }
    RetargetedMotion::new(file.fps, file.joint_names, q, root_pos, root_rot)
}

pub fn load_robot_model(path: impl AsRef<Path>) -> Result<RobotModel> {
    let path = path.as_ref();
    let file: RobotFile = read_json(path)?;
    robot_from_file(file).map_err(|e| with_path(path, e))
}

pub fn parse_robot_model(text: &str) -> Result<RobotModel> {
    let file: RobotFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: "<memory>".into(),
        source,
    })?;
    robot_from_file(file)
}

fn robot_from_file(file: RobotFile) -> Result<RobotModel> {
    let index_of = |name: &str| -> Result<usize> {
        file.bodies
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::MissingBody(name.to_owned()))
    };
    let bodies = file
        .bodies
        .iter()
        .map(|b| {
            Ok(Body {
                name: b.name.clone(),
                parent: b.parent.as_deref().map(index_of).transpose()?,
                offset: Vector3::from(b.offset),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let joints = file
        .joints
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let axis = Vector3::from(e.axis);
            if !(axis.norm() > 1e-12) {
                return Err(Error::schema(format!("joints[{j}]"), "zero rotation axis"));
            }
            Ok(Joint {
                name: e.name.clone(),
                body: index_of(&e.body)?,
                axis: Unit::new_normalize(axis),
                q_min: e.q_min,
                q_max: e.q_max,
                v_max: e.v_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sites = Vec::with_capacity(4);
    for region in FootRegion::ALL {
        let entry = file
            .foot_sites
            .get(region.as_str())
            .ok_or_else(|| Error::schema("foot_sites", format!("missing region {region}")))?;
        sites.push(FootSite {
            body: index_of(&entry.body)?,
            offset: Vector3::from(entry.offset),
        });
    }
    let foot_sites: [FootSite; 4] = sites.try_into().expect("four regions");
    RobotModel::new(bodies, joints, foot_sites, file.balance_bodies)
}

fn robot_to_file(model: &RobotModel) -> RobotFile {
    let bodies = model.bodies();
    RobotFile {
        bodies: bodies
            .iter()
            .map(|b| BodyEntry {
                name: b.name.clone(),
                parent: b.parent.map(|p| bodies[p].name.clone()),
                offset: b.offset.into(),
            })
            .collect(),
        joints: model
            .joints()
            .iter()
            .map(|j| JointEntry {
                name: j.name.clone(),
                body: bodies[j.body].name.clone(),
                axis: j.axis.into_inner().into(),
                q_min: j.q_min,
                q_max: j.q_max,
                v_max: j.v_max,
            })
            .collect(),
        foot_sites: FootRegion::ALL
            .iter()
            .map(|r| {
                let s = model.foot_site(*r);
                (
                    r.as_str().to_owned(),
                    SiteEntry {
                        body: bodies[s.body].name.clone(),
                        offset: s.offset.into(),
                    },
                )
            })
            .collect(),
        balance_bodies: model.balance_bodies().clone(),
    }
}

pub fn save_robot_model(model: &RobotModel, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &robot_to_file(model), true)
}

pub fn robot_model_to_string(model: &RobotModel) -> String {
    serde_json::to_string_pretty(&robot_to_file(model)).expect("in-memory serialization cannot fail")
}

/// Reads any JSON document, reporting the path on failure.
pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    read_json(path.as_ref())
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), value, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitizer_leaves_strings_alone() {
        let s = r#"{"NaN": [NaN, -Infinity, 1.0], "x": "a\"NaN"}"#;
        assert_eq!(sanitize_non_finite(s), r#"{"NaN": [null, null, 1.0], "x": "a\"NaN"}"#);
    }

    fn frame_json(z: &str) -> String {
        format!(
            r#"{{"joints": [[0, 0, {z}]], "markers": {{"LH": [[0,0,0]], "LT": [[0,0,0]], "RH": [[0,0,0]], "RT": [[0,0,0]]}}}}"#
        )
    }

    #[test]
    fn nan_is_reported_with_frame() {
        let frames: Vec<String> = (0..10)
            .map(|t| frame_json(if t == 7 { "NaN" } else { "1.0" }))
            .collect();
        let text = format!(
            r#"{{"fps": 30, "joint_names": ["pelvis"], "frames": [{}]}}"#,
            frames.join(",")
        );
        let err = parse_source_motion(&text).unwrap_err().to_string();
        assert!(err.contains("frame 7"), "{err}");
        assert!(err.contains("pelvis"), "{err}");
    }

    #[test]
    fn unknown_region_is_rejected() {
        let frame = r#"{"joints": [[0,0,0]], "markers": {"LH": [], "LT": [], "RH": [], "RT": [], "XX": []}}"#;
        let text = format!(r#"{{"fps": 30, "joint_names": ["a"], "frames": [{frame},{frame},{frame}]}}"#);
        let err = parse_source_motion(&text).unwrap_err().to_string();
        assert!(err.contains("XX"), "{err}");
    }

    #[test]
    fn two_frames_is_too_few() {
        let f = frame_json("0");
        let text = format!(r#"{{"fps": 30, "joint_names": ["a"], "frames": [{f},{f}]}}"#);
        let err = parse_source_motion(&text).unwrap_err().to_string();
        assert!(err.contains("too few frames"), "{err}");
    }
}
