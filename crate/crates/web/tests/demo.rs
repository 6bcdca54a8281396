use motion_retarget_web::{demo_options, lowpass, retarget_clip, support};

#[test]
fn lowpass_keeps_slow_signals_and_rejects_bad_cutoffs() {
    let slow: Vec<f64> = (0..120).map(|i| (i as f64 * 0.05).sin()).collect();
    let out = lowpass(&slow, 30.0, 6.0).unwrap();
    let worst = slow.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
    assert!(lowpass(&slow, 30.0, 20.0).is_err());
}

#[test]
fn support_polygon_and_distance() {
    let square = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.5, 0.5];
    let inside = support(&square, 0.5, 0.5).unwrap();
    assert_eq!(inside.hull.len(), 4);
    assert_eq!(inside.distance, 0.0);
    let outside = support(&square, 1.5, 0.5).unwrap();
    assert!((outside.distance - 0.5).abs() < 1e-12);
    assert!(support(&[1.0], 0.0, 0.0).is_err());
}

#[test]
fn retarget_clip_reports_metrics_and_traces() {
    let (kinds, defects) = demo_options();
    assert!(kinds.contains(&"walk"));
    assert!(defects.contains(&"penetrate"));
    let r = retarget_clip("stand", "penetrate", "physink", 40).unwrap();
    assert_eq!(r.foot_height.len(), 60);
    assert_eq!(r.contact.len(), 60);
    assert_eq!(r.loss.len(), 41);
    assert!(r.report.motion_fidelity_pct >= 0.0);

    assert!(retarget_clip("moonwalk", "none", "sink", 5)
        .unwrap_err()
        .contains("moonwalk"));
    assert!(retarget_clip("walk", "wobble", "sink", 5).is_err());
    assert!(retarget_clip("walk", "none", "fk", 5).is_err());
}
