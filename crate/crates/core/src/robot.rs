//! Kinematic description of the target humanoid.

use nalgebra::{Unit, Vector3};

use crate::error::{Error, Result};
use crate::motion::FootRegion;

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub name: String,
    /// `None` only for body 0, the floating root.
    pub parent: Option<usize>,
    /// Fixed translation from the parent frame, in the parent frame.
    pub offset: Vector3<f64>,
}

/// A single-DoF revolute joint that rotates `body` about `axis` (body frame).
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub body: usize,
    pub axis: Unit<Vector3<f64>>,
    pub q_min: f64,
    pub q_max: f64,
    pub v_max: f64,
}

impl Joint {
    /// Position band shrunk toward the interior by `1 - margin` of the
    /// joint's range at each end, which behaves the same for limits of
    /// either sign.
    pub fn position_band(&self, margin: f64) -> (f64, f64) {
        let slack = (1.0 - margin) * (self.q_max - self.q_min);
        (self.q_min + slack, self.q_max - slack)
    }

    /// Symmetric velocity band `[-margin * v_max, margin * v_max]`.
    pub fn velocity_band(&self, margin: f64) -> (f64, f64) {
        (-margin * self.v_max, margin * self.v_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootSite {
    pub body: usize,
    pub offset: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    bodies: Vec<Body>,
    joints: Vec<Joint>,
    foot_sites: [FootSite; 4],
    balance_bodies: [String; 2],
    /// Joint index driving each body, if any.
    body_joint: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl RobotModel {
    /// Validates and assembles a model. Bodies must be listed parents-first:
    /// every body's parent index is smaller than its own.
    pub fn new(
        bodies: Vec<Body>,
        joints: Vec<Joint>,
        foot_sites: [FootSite; 4],
        balance_bodies: [String; 2],
    ) -> Result<Self> {
        if bodies.is_empty() {
            return Err(Error::schema("bodies", "model has no bodies"));
        }
        for (b, body) in bodies.iter().enumerate() {
            match (b, body.parent) {
                (0, None) => {}
                (0, Some(_)) => return Err(Error::schema("bodies[0]", "root body must not have a parent")),
                (_, None) => return Err(Error::schema(format!("bodies[{b}]"), "only the root may lack a parent")),
                (_, Some(p)) if p >= b => {
                    return Err(Error::schema(
                        format!("bodies[{b}]"),
                        format!("parent {p} must precede the body"),
                    ))
                }
                _ => {}
            }
            if !body.offset.iter().all(|v| v.is_finite()) {
                return Err(Error::schema(format!("bodies[{b}]"), "non-finite offset"));
            }
            if bodies[..b].iter().any(|o| o.name == body.name) {
                return Err(Error::schema(
                    format!("bodies[{b}]"),
                    format!("duplicate name `{}`", body.name),
                ));
            }
        }
        let mut body_joint = vec![None; bodies.len()];
        for (j, joint) in joints.iter().enumerate() {
            if joint.body == 0 || joint.body >= bodies.len() {
                return Err(Error::schema(
                    format!("joints[{j}]"),
                    format!("joint `{}` must drive a non-root body", joint.name),
                ));
            }
            if body_joint[joint.body].replace(j).is_some() {
                return Err(Error::schema(
                    format!("joints[{j}]"),
                    format!("body {} already has a joint", joint.body),
                ));
            }
            if !(joint.q_min < joint.q_max) {
                return Err(Error::InfeasibleLimits {
                    joint: joint.name.clone(),
                    q_min: joint.q_min,
                    q_max: joint.q_max,
                });
            }
            if !(joint.v_max > 0.0) {
                return Err(Error::schema(format!("joints[{j}]"), "v_max must be positive"));
            }
        }
        for (r, site) in foot_sites.iter().enumerate() {
            if site.body >= bodies.len() {
                return Err(Error::schema(
                    format!("foot_sites.{}", FootRegion::ALL[r]),
                    format!("body {} out of range", site.body),
                ));
            }
        }
        for name in &balance_bodies {
            if !bodies.iter().any(|b| &b.name == name) {
                return Err(Error::MissingBody(name.clone()));
            }
        }
        let mut children = vec![Vec::new(); bodies.len()];
        for (b, body) in bodies.iter().enumerate().skip(1) {
            children[body.parent.unwrap()].push(b);
        }
        Ok(Self {
            bodies,
            joints,
            foot_sites,
            balance_bodies,
            body_joint,
            children,
        })
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn body_count(&self) -> usize {
        self.bodies.len()
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn joint_names(&self) -> Vec<String> {
        self.joints.iter().map(|j| j.name.clone()).collect()
    }

    pub fn foot_site(&self, region: FootRegion) -> FootSite {
        self.foot_sites[region.index()]
    }

    pub fn foot_sites(&self) -> &[FootSite; 4] {
        &self.foot_sites
    }

    pub fn balance_bodies(&self) -> &[String; 2] {
        &self.balance_bodies
    }

    pub fn body_joint(&self, body: usize) -> Option<usize> {
        self.body_joint[body]
    }

    pub fn children(&self, body: usize) -> &[usize] {
        &self.children[body]
    }

    pub fn body_index(&self, name: &str) -> Option<usize> {
        self.bodies.iter().position(|b| b.name == name)
    }

    pub fn require_body(&self, name: &str) -> Result<usize> {
        self.body_index(name).ok_or_else(|| Error::MissingBody(name.to_owned()))
    }

    /// True if `ancestor` lies on the path from `body` to the root (inclusive).
    pub fn is_ancestor(&self, ancestor: usize, body: usize) -> bool {
        let mut b = Some(body);
        while let Some(i) = b {
            if i == ancestor {
                return true;
            }
            b = self.bodies[i].parent;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(name: &str, parent: Option<usize>) -> Body {
        Body {
            name: name.into(),
            parent,
            offset: Vector3::zeros(),
        }
    }

    fn joint(body: usize, q_min: f64, q_max: f64) -> Joint {
        Joint {
            name: format!("j{body}"),
            body,
            axis: Vector3::z_axis(),
            q_min,
            q_max,
            v_max: 1.0,
        }
    }

    fn sites() -> [FootSite; 4] {
        [FootSite {
            body: 0,
            offset: Vector3::zeros(),
        }; 4]
    }

    fn balance() -> [String; 2] {
        ["root".into(), "root".into()]
    }

    #[test]
    fn band_shrinks_each_end_by_a_share_of_the_range() {
        let j = joint(1, -1.0, 1.0);
        let (lo, hi) = j.position_band(0.98);
        assert!((hi - 0.96).abs() < 1e-15);
        assert!((lo + 0.96).abs() < 1e-15);
    }

    #[test]
    fn band_stays_inside_for_negative_limits() {
        let j = joint(1, -2.0, -0.5);
        let (lo, hi) = j.position_band(0.98);
        assert!(lo > j.q_min && hi < j.q_max && lo < hi);
    }

    #[test]
    fn rejects_parent_after_child() {
        let err = RobotModel::new(
            vec![body("root", None), body("a", Some(2)), body("b", Some(0))],
            vec![],
            sites(),
            balance(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("precede"));
    }

    #[test]
    fn rejects_inverted_limits() {
        let err = RobotModel::new(
            vec![body("root", None), body("a", Some(0))],
            vec![joint(1, 1.0, -1.0)],
            sites(),
            balance(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleLimits { .. }));
    }

    #[test]
    fn rejects_joint_on_root() {
        assert!(RobotModel::new(vec![body("root", None)], vec![joint(0, -1.0, 1.0)], sites(), balance()).is_err());
    }
}
