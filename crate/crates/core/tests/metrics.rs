mod common;

use common::{humanoid, FPS};
use motion_retarget::kinematics::JointCorrespondence;
use motion_retarget::metrics::{
    joint_feasibility_pct, motion_fidelity_pct, non_floating_pct, non_penetration_pct, non_skating_pct, quality_report,
    summarize_corpus, write_metrics_csv, QualityReport, METRICS_CSV_HEADER,
};
use motion_retarget::synth::{generate, render_source, MotionKind};
use motion_retarget::{ContactSchedule, RetargetedMotion, RobotModel, SourceMotion};
use nalgebra::Vector3;
use proptest::prelude::*;

const FRAMES: usize = 120;
const MARGIN: f64 = 0.98;

fn standing(model: &RobotModel) -> RetargetedMotion {
    let m = generate(model, MotionKind::Stand { amplitude: 0.0 }, FRAMES as f64 / FPS, FPS);
    assert_eq!(m.frame_count(), FRAMES);
    m
}

/// Root translated by `shift(t)` at every frame.
fn moved(m: &RetargetedMotion, shift: impl Fn(usize) -> Vector3<f64>) -> RetargetedMotion {
    let root = m.root_pos().iter().enumerate().map(|(t, p)| p + shift(t)).collect();
    RetargetedMotion::new(
        m.fps(),
        m.joint_names().to_vec(),
        m.q().to_vec(),
        root,
        m.root_rot().to_vec(),
    )
    .unwrap()
}

fn with_q(m: &RetargetedMotion, f: impl Fn(usize, usize, f64) -> f64) -> RetargetedMotion {
    let q = m
        .q()
        .iter()
        .enumerate()
        .map(|(t, q)| q.map_with_location(|j, _, v| f(t, j, v)))
        .collect();
    RetargetedMotion::new(
        m.fps(),
        m.joint_names().to_vec(),
        q,
        m.root_pos().to_vec(),
        m.root_rot().to_vec(),
    )
    .unwrap()
}

fn shifted_source(src: &SourceMotion, shift: impl Fn(usize) -> Vector3<f64>) -> SourceMotion {
    let joints = src
        .joints()
        .iter()
        .enumerate()
        .map(|(t, f)| f.iter().map(|p| p + shift(t)).collect())
        .collect();
    src.with_joints(joints).unwrap()
}

fn setup() -> (RobotModel, JointCorrespondence, RetargetedMotion, SourceMotion) {
    let (model, corr) = humanoid();
    let truth = standing(&model);
    let source = render_source(&model, &truth);
    (model, corr, truth, source)
}

fn all_contact() -> ContactSchedule {
    ContactSchedule::uniform(FRAMES, 1.0).unwrap()
}

#[test]
fn self_retargeted_clip_scores_100_everywhere() {
    let (model, corr, truth, source) = setup();
    let r = quality_report(&truth, &source, &corr, &model, &all_contact(), MARGIN, FPS).unwrap();
    assert_eq!(r.values(), [Some(100.0); 5]);
    assert_eq!(r.frames, FRAMES);
    assert_eq!(r.non_floating.total, 4 * FRAMES);
    assert_eq!(r.non_skating.total, 4 * (FRAMES - 1));
}

#[test]
fn fidelity_examples() {
    let (model, corr, truth, source) = setup();
    let far = shifted_source(&source, |_| Vector3::new(0.2, 0.0, 0.0));
    assert_eq!(motion_fidelity_pct(&truth, &far, &corr, &model).unwrap(), 0.0);

    let some = shifted_source(&source, |t| {
        Vector3::new(if (30..42).contains(&t) { 0.2 } else { 0.0 }, 0.0, 0.0)
    });
    assert_eq!(motion_fidelity_pct(&truth, &some, &corr, &model).unwrap(), 90.0);

    let half = shifted_source(&source, |t| Vector3::new(0.0, if t % 2 == 0 { 0.15 } else { 0.0 }, 0.0));
    assert_eq!(motion_fidelity_pct(&truth, &half, &corr, &model).unwrap(), 50.0);

    let near = shifted_source(&source, |_| Vector3::new(0.05, 0.03, 0.0));
    assert_eq!(motion_fidelity_pct(&truth, &near, &corr, &model).unwrap(), 100.0);
}

#[test]
fn feasibility_counts_frames_with_band_violations() {
    let (model, _, truth, _) = setup();
    let (_, hi) = model.joints()[0].position_band(MARGIN);
    let edge = with_q(&truth, |t, j, v| match j {
        0 if (60..72).contains(&t) => hi + 1e-3,
        0 => hi - 1e-3,
        _ => v,
    });
    assert_eq!(joint_feasibility_pct(&edge, &model, MARGIN, FPS), 90.0);
    assert_eq!(joint_feasibility_pct(&edge, &model, 1.0, FPS), 100.0);

    // A single jump over the velocity band flags the frame before it.
    let vmax = model.joints()[1].v_max;
    let jump = with_q(&truth, |t, j, v| if j == 1 && t >= 60 { v + vmax / FPS } else { v });
    let pct = joint_feasibility_pct(&jump, &model, MARGIN, FPS);
    assert!((pct - 100.0 * 119.0 / 120.0).abs() < 1e-9, "{pct}");
}

#[test]
fn contact_height_examples() {
    let (model, _, truth, _) = setup();
    let c = all_contact();
    let hover = moved(&truth, |_| Vector3::new(0.0, 0.0, 0.05));
    assert_eq!(non_floating_pct(&hover, &model, &c).unwrap(), Some(0.0));
    assert_eq!(non_penetration_pct(&hover, &model, &c).unwrap(), Some(100.0));

    let sunk = moved(&truth, |_| Vector3::new(0.0, 0.0, -0.03));
    assert_eq!(non_floating_pct(&sunk, &model, &c).unwrap(), Some(100.0));
    assert_eq!(non_penetration_pct(&sunk, &model, &c).unwrap(), Some(0.0));

    let within = moved(&truth, |t| {
        Vector3::new(0.0, 0.0, if t % 2 == 0 { 0.009 } else { -0.009 })
    });
    assert_eq!(non_floating_pct(&within, &model, &c).unwrap(), Some(100.0));
    assert_eq!(non_penetration_pct(&within, &model, &c).unwrap(), Some(100.0));

    let half = moved(&truth, |t| Vector3::new(0.0, 0.0, if t < 60 { 0.05 } else { 0.0 }));
    assert_eq!(non_floating_pct(&half, &model, &c).unwrap(), Some(50.0));
}

#[test]
fn skating_examples() {
    let (model, _, truth, _) = setup();
    let c = all_contact();
    let slide = moved(&truth, |t| Vector3::new(0.5 * t as f64 / FPS, 0.0, 0.0));
    assert_eq!(non_skating_pct(&slide, &model, &c, FPS).unwrap(), Some(0.0));
    let creep = moved(&truth, |t| Vector3::new(0.05 * t as f64 / FPS, 0.0, 0.0));
    assert_eq!(non_skating_pct(&creep, &model, &c, FPS).unwrap(), Some(100.0));
    // Vertical motion is not skating.
    let bob = moved(&truth, |t| Vector3::new(0.0, 0.0, 0.005 * (t % 2) as f64));
    assert_eq!(non_skating_pct(&bob, &model, &c, FPS).unwrap(), Some(100.0));
}

#[test]
fn contact_metrics_are_undefined_without_contacts() {
    let (model, corr, truth, source) = setup();
    let none = ContactSchedule::uniform(FRAMES, 0.49).unwrap();
    let r = quality_report(&truth, &source, &corr, &model, &none, MARGIN, FPS).unwrap();
    assert_eq!(r.values()[2..], [None, None, None]);
    assert_eq!(r.motion_fidelity_pct, 100.0);
}

#[test]
fn only_scores_at_or_above_one_half_count_as_contact() {
    let (model, _, truth, _) = setup();
    let hover = moved(&truth, |_| Vector3::new(0.0, 0.0, 0.05));
    let mut regions: [Vec<f64>; 4] = Default::default();
    for (k, r) in regions.iter_mut().enumerate() {
        *r = (0..FRAMES).map(|t| if k == 0 && t < 30 { 0.5 } else { 0.2 }).collect();
    }
    let c = ContactSchedule::new(regions).unwrap();
    let r = non_floating_pct(&hover, &model, &c).unwrap();
    assert_eq!(r, Some(0.0));
}

#[test]
fn mismatched_frame_counts_are_rejected() {
    let (model, corr, truth, source) = setup();
    let short = ContactSchedule::uniform(FRAMES - 1, 1.0).unwrap();
    assert!(non_floating_pct(&truth, &model, &short).is_err());
    let clipped = source.slice(0, FRAMES - 1).unwrap();
    assert!(motion_fidelity_pct(&truth, &clipped, &corr, &model).is_err());
}

#[test]
fn corpus_summary_skips_undefined_values_and_writes_summary_rows() {
    let (model, corr, truth, source) = setup();
    let full = quality_report(&truth, &source, &corr, &model, &all_contact(), MARGIN, FPS).unwrap();
    let hover = moved(&truth, |_| Vector3::new(0.0, 0.0, 0.05));
    let floating = quality_report(&hover, &source, &corr, &model, &all_contact(), MARGIN, FPS).unwrap();
    let none = ContactSchedule::uniform(FRAMES, 0.0).unwrap();
    let blind = quality_report(&truth, &source, &corr, &model, &none, MARGIN, FPS).unwrap();

    let reports = [full, floating, blind];
    let summary = summarize_corpus(&reports);
    assert_eq!(summary.clips, 3);
    assert_eq!(summary.non_floating_pct.clips, 2);
    assert_eq!(summary.non_floating_pct.mean, Some(50.0));
    assert_eq!(summary.non_floating_pct.median, Some(50.0));
    assert_eq!(summary.joint_feasibility_pct.median, Some(100.0));

    let rows: Vec<(String, QualityReport)> = ["a", "b", "c"]
        .iter()
        .map(|s| s.to_string())
        .zip(reports.iter().cloned())
        .collect();
    let mut buf = Vec::new();
    write_metrics_csv(&rows, &summary, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], METRICS_CSV_HEADER.join(","));
    assert!(lines[3].starts_with("c,120,100.0000,100.0000,,,,"));
    assert!(lines[4].starts_with("mean,"));
    assert!(lines[5].starts_with("median,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Fidelity equals a direct enumeration of frames whose uniform source
    /// offset stays under the position tolerance.
    #[test]
    fn fidelity_matches_enumeration(offsets in prop::collection::vec(0.0f64..0.2, FRAMES)) {
        let (model, corr, truth, source) = setup();
        let src = shifted_source(&source, |t| Vector3::new(offsets[t], 0.0, 0.0));
        let expected = offsets.iter().filter(|&&d| d < 0.1).count() as f64 / FRAMES as f64 * 100.0;
        let got = motion_fidelity_pct(&truth, &src, &corr, &model).unwrap();
        prop_assert!((got - expected).abs() < 1e-9, "{} vs {}", got, expected);
    }

    /// Shifting the retargeted motion and the source together horizontally
    /// changes nothing.
    #[test]
    fn metrics_are_horizontally_translation_invariant(dx in -5.0f64..5.0, dy in -5.0f64..5.0, lift in 0.0f64..0.04) {
        let (model, corr, truth, source) = setup();
        let c = all_contact();
        let base = moved(&truth, |t| Vector3::new(0.0, 0.0, if t % 3 == 0 { lift } else { 0.0 }));
        let shift = Vector3::new(dx, dy, 0.0);
        let a = quality_report(&base, &source, &corr, &model, &c, MARGIN, FPS).unwrap();
        let b = quality_report(&moved(&base, |_| shift), &shifted_source(&source, |_| shift), &corr, &model, &c, MARGIN, FPS).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    /// Raising the feet never improves the floating score.
    #[test]
    fn floating_is_monotone_in_height(h in 0.0f64..0.05, extra in 0.0f64..0.05) {
        let (model, _, truth, _) = setup();
        let c = all_contact();
        let low = non_floating_pct(&moved(&truth, |t| Vector3::new(0.0, 0.0, h * (t % 2) as f64)), &model, &c).unwrap();
        let high = non_floating_pct(&moved(&truth, |t| Vector3::new(0.0, 0.0, (h + extra) * (t % 2) as f64)), &model, &c).unwrap();
        prop_assert!(high <= low);
    }
}
