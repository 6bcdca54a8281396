//! Graded foot contact from marker proximity to the ground.

use crate::error::{Error, Result};
use crate::motion::{ContactSchedule, FootRegion, SourceMotion};

/// Height above which a marker contributes no contact, meters.
pub const DEFAULT_RAMP_TOP: f64 = 0.025;

/// Linear ramp: a marker at or below the ground scores 1, at or above
/// `ramp_top` scores 0. A region's score is the mean over its markers;
/// regions without markers score 0.
pub fn contact_scores(motion: &SourceMotion, ramp_top: f64) -> Result<ContactSchedule> {
    if !(ramp_top > 0.0) {
        return Err(Error::param("ramp_top", format!("must be positive, got {ramp_top}")));
    }
    let scores = FootRegion::ALL.map(|region| {
        motion
            .markers(region)
            .iter()
            .map(|frame| {
                if frame.is_empty() {
                    return 0.0;
                }
                let sum: f64 = frame
                    .iter()
                    .map(|p| ((ramp_top - p.z) / ramp_top).clamp(0.0, 1.0))
                    .sum();
                (sum / frame.len() as f64).clamp(0.0, 1.0)
            })
            .collect()
    });
    ContactSchedule::new(scores)
}

/// Mean over frames of the strongest region's contact.
pub fn foot_contact_score(schedule: &ContactSchedule) -> Result<f64> {
    let frames = schedule.frame_count();
    if frames == 0 {
        return Err(Error::TooFewFrames { needed: 1, got: 0 });
    }
    let total: f64 = (0..frames)
        .map(|t| FootRegion::ALL.iter().map(|r| schedule.get(*r, t)).fold(0.0, f64::max))
        .sum();
    Ok(total / frames as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn with_marker_heights(z: [f64; 4]) -> SourceMotion {
        let markers = std::array::from_fn(|r| vec![vec![Vector3::new(0.0, 0.0, z[r]); 3]; 3]);
        SourceMotion::new(30.0, vec!["p".into()], vec![vec![Vector3::zeros()]; 3], markers).unwrap()
    }

    #[test]
    fn ramp_endpoints_and_midpoint() {
        let c = contact_scores(&with_marker_heights([0.0, 0.025, 0.0125, -0.01]), 0.025).unwrap();
        assert_eq!(c.get(FootRegion::LH, 0), 1.0);
        assert_eq!(c.get(FootRegion::LT, 0), 0.0);
        assert!((c.get(FootRegion::RH, 0) - 0.5).abs() < 1e-12);
        assert_eq!(c.get(FootRegion::RT, 0), 1.0);
    }

    #[test]
    fn foot_score_uses_max_over_regions() {
        let full = ContactSchedule::uniform(10, 1.0).unwrap();
        assert_eq!(foot_contact_score(&full).unwrap(), 1.0);
        let one = ContactSchedule::new([vec![1.0; 10], vec![0.0; 10], vec![0.0; 10], vec![0.0; 10]]).unwrap();
        assert_eq!(foot_contact_score(&one).unwrap(), 1.0);
        let mut half = vec![0.0; 10];
        half[5..].fill(1.0);
        let s = ContactSchedule::new([vec![0.0; 10], vec![0.0; 10], half, vec![0.0; 10]]).unwrap();
        // Direct sum: five frames at 1, five at 0.
        assert_eq!(foot_contact_score(&s).unwrap(), 0.5);
    }

    proptest! {
        #[test]
        fn scores_bounded_and_monotone(z in proptest::array::uniform4(-0.1..0.1f64), bump in 0.0..0.05f64, r in 0usize..4) {
            let base = contact_scores(&with_marker_heights(z), 0.025).unwrap();
            let mut raised = z;
            raised[r] += bump;
            let up = contact_scores(&with_marker_heights(raised), 0.025).unwrap();
            for region in FootRegion::ALL {
                let (a, b) = (base.get(region, 0), up.get(region, 0));
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn foot_score_permutation_invariant(c in proptest::collection::vec(proptest::array::uniform4(0.0..1.0f64), 1..20), rot in 0usize..4) {
            let tracks: [Vec<f64>; 4] = std::array::from_fn(|r| c.iter().map(|f| f[r]).collect());
            let rotated: [Vec<f64>; 4] = std::array::from_fn(|r| tracks[(r + rot) % 4].clone());
            let a = foot_contact_score(&ContactSchedule::new(tracks).unwrap()).unwrap();
            let b = foot_contact_score(&ContactSchedule::new(rotated).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
