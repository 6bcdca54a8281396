use std::collections::HashSet;

use motion_retarget::curation::contact_scores;
use motion_retarget::kinematics::forward_kinematics_motion;
use motion_retarget::metrics::{joint_feasibility_pct, quality_report};
use motion_retarget::synth::{synthetic_suite, test_correspondence, test_humanoid, Defect};
use motion_retarget::FootRegion;

#[test]
fn suite_has_unique_names_and_fixed_length() {
    let model = test_humanoid();
    let suite = synthetic_suite(&model);
    assert_eq!(suite.len(), 24);
    let names: HashSet<_> = suite.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names.len(), suite.len());
    for c in &suite {
        assert_eq!(c.source.frame_count(), 120, "{}", c.name);
        assert_eq!(c.truth.frame_count(), 120, "{}", c.name);
    }
}

#[test]
fn clean_truth_is_feasible_grounded_and_faithful() {
    let model = test_humanoid();
    let corr = test_correspondence(&model);
    for c in synthetic_suite(&model).iter().filter(|c| c.defect.is_none()) {
        let contacts = contact_scores(&c.source, 0.025).unwrap();
        let r = quality_report(&c.truth, &c.source, &corr, &model, &contacts, 0.98, 30.0).unwrap();
        assert_eq!(r.motion_fidelity_pct, 100.0, "{}", c.name);
        assert_eq!(r.joint_feasibility_pct, 100.0, "{}", c.name);
        assert_eq!(r.non_penetration_pct, Some(100.0), "{}", c.name);
        // Take-off and landing frames between 1 and 1.25 cm still score at
        // least one half, so these two are not exactly 100.
        assert!(
            r.non_floating_pct.unwrap() >= 85.0,
            "{}: {:?}",
            c.name,
            r.non_floating_pct
        );
        assert!(
            r.non_skating_pct.unwrap() >= 85.0,
            "{}: {:?}",
            c.name,
            r.non_skating_pct
        );

        let fk = forward_kinematics_motion(&model, &c.truth).unwrap();
        for pose in &fk.frames {
            for r in FootRegion::ALL {
                assert!(pose.site(r).z > -1e-6, "{} site below ground", c.name);
            }
        }
    }
}

#[test]
fn overextension_defect_stays_reachable_but_leaves_the_band() {
    let model = test_humanoid();
    for c in synthetic_suite(&model) {
        if let Some(Defect::ElbowOverExtension { .. }) = c.defect {
            let jf = joint_feasibility_pct(&c.truth, &model, 0.98, 30.0);
            assert!(jf < 97.0, "{}: {jf}", c.name);
            for q in c.truth.q() {
                for (j, joint) in model.joints().iter().enumerate() {
                    assert!((joint.q_min..=joint.q_max).contains(&q[j]), "{} joint {j}", c.name);
                }
            }
        }
    }
}
