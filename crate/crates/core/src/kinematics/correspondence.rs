use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot::RobotModel;

/// One line of a correspondence file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceEntry {
    pub source: String,
    pub robot_body: String,
    /// Matched by the plain IK baseline (hands, feet, head).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub end_effector: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointPair {
    pub source: usize,
    pub body: usize,
    pub end_effector: bool,
}

/// Resolved source-joint to robot-body pairs plus the bones joining them.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCorrespondence {
    pairs: Vec<JointPair>,
    /// `(parent pair, child pair)`, parents listed before their children.
    bones: Vec<(usize, usize)>,
    body_count: usize,
}

impl JointCorrespondence {
    pub fn resolve(entries: &[CorrespondenceEntry], source_joints: &[String], model: &RobotModel) -> Result<Self> {
        let mut pairs = Vec::with_capacity(entries.len());
        for e in entries {
            let source = source_joints
                .iter()
                .position(|n| n == &e.source)
                .ok_or_else(|| Error::MissingJoint(e.source.clone()))?;
            let body = model.require_body(&e.robot_body)?;
            if pairs.iter().any(|p: &JointPair| p.body == body) {
                return Err(Error::schema(
                    "correspondence",
                    format!("robot body `{}` mapped more than once", e.robot_body),
                ));
            }
            pairs.push(JointPair {
                source,
                body,
                end_effector: e.end_effector,
            });
        }
        // Sort by body index so that tree parents come first.
        pairs.sort_by_key(|p| p.body);

        let mut pair_of_body = vec![None; model.body_count()];
        for (k, p) in pairs.iter().enumerate() {
            pair_of_body[p.body] = Some(k);
        }
        let mut bones = Vec::new();
        for (k, p) in pairs.iter().enumerate() {
            let mut b = model.bodies()[p.body].parent;
            while let Some(i) = b {
                if let Some(parent_pair) = pair_of_body[i] {
                    bones.push((parent_pair, k));
                    break;
                }
                b = model.bodies()[i].parent;
            }
        }
        Ok(Self {
            pairs,
            bones,
            body_count: model.body_count(),
        })
    }

    pub fn pairs(&self) -> &[JointPair] {
        &self.pairs
    }

    /// Adjacent corresponded pairs: a child's nearest corresponded ancestor.
    pub fn bones(&self) -> &[(usize, usize)] {
        &self.bones
    }

    /// Symmetric body-by-body adjacency mask with an empty diagonal.
    pub fn adjacency_mask(&self) -> DMatrix<bool> {
        let mut m = DMatrix::from_element(self.body_count, self.body_count, false);
        for &(a, b) in &self.bones {
            let (i, j) = (self.pairs[a].body, self.pairs[b].body);
            m[(i, j)] = true;
            m[(j, i)] = true;
        }
        m
    }

    pub fn end_effectors(&self) -> impl Iterator<Item = &JointPair> {
        self.pairs.iter().filter(|p| p.end_effector)
    }
}
