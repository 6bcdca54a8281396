mod common;

use common::{humanoid, FPS};
use motion_retarget::kinematics::rest_pose;
use motion_retarget::metrics::non_penetration_pct;
use motion_retarget::retarget::{initialize, optimize, retarget, LossTrace, LossWeights, Mode, OptimizerConfig};
use motion_retarget::synth::{clip, generate, render_source, walk, Defect, MotionKind};
use motion_retarget::{ContactSchedule, Error};
use nalgebra::{DVector, UnitQuaternion};

fn quick(mode: Mode, iterations: usize) -> OptimizerConfig {
    OptimizerConfig {
        iterations,
        ..OptimizerConfig::default().with_mode(mode)
    }
}

#[test]
fn mode_parsing_accepts_canonical_names_and_aliases() {
    for m in Mode::ALL {
        assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        assert_eq!(m.to_string(), m.as_str());
    }
    assert_eq!("+feasibility".parse::<Mode>().unwrap(), Mode::SinkFeasibility);
    assert_eq!("+ground".parse::<Mode>().unwrap(), Mode::SinkFeasibilityGround);
    assert_eq!("+skate".parse::<Mode>().unwrap(), Mode::PhySink);
    assert_eq!("PhySINK".parse::<Mode>().unwrap(), Mode::PhySink);
    assert!(matches!(
        "fk".parse::<Mode>(),
        Err(Error::InvalidParameter { name: "mode", .. })
    ));
}

#[test]
fn modes_add_terms_cumulatively() {
    let flags = |m: Mode| {
        [
            m.uses_local_match(),
            m.uses_smooth(),
            m.uses_feasibility(),
            m.uses_ground(),
            m.uses_skate(),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    };
    let counts: Vec<_> = Mode::ALL.iter().map(|&m| flags(m)).collect();
    assert_eq!(counts, vec![0, 2, 3, 4, 5]);
}

#[test]
fn config_round_trips_through_json_and_rejects_unknown_fields() {
    let cfg = quick(Mode::SinkFeasibility, 17);
    let text = serde_json::to_string(&cfg).unwrap();
    assert!(text.contains("\"sink+feasibility\""));
    let back: OptimizerConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);

    let partial: OptimizerConfig = serde_json::from_str(r#"{"mode": "ik"}"#).unwrap();
    assert_eq!(partial.iterations, OptimizerConfig::default().iterations);
    assert!(serde_json::from_str::<OptimizerConfig>(r#"{"iterationz": 3}"#).is_err());
}

#[test]
fn config_validation() {
    assert!(OptimizerConfig::default().validate().is_ok());
    let bad = [
        OptimizerConfig {
            iterations: 0,
            ..Default::default()
        },
        OptimizerConfig {
            step_size: 0.0,
            ..Default::default()
        },
        OptimizerConfig {
            limit_margin: 1.2,
            ..Default::default()
        },
        OptimizerConfig {
            contact_ramp_top: -1.0,
            ..Default::default()
        },
        OptimizerConfig {
            weights: LossWeights {
                w_skate: -0.1,
                ..Default::default()
            },
            ..Default::default()
        },
        OptimizerConfig {
            weights: LossWeights {
                w_ground: f64::NAN,
                ..Default::default()
            },
            ..Default::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { .. })), "{cfg:?}");
    }
}

#[test]
fn too_short_source_is_rejected() {
    let (model, corr) = humanoid();
    let truth = generate(&model, MotionKind::Stand { amplitude: 0.0 }, 0.1, FPS);
    let source = render_source(&model, &truth).slice(0, 3).unwrap();
    let err = retarget(&source, &model, &corr, &quick(Mode::Sink, 5)).unwrap_err();
    assert!(matches!(err, Error::TooFewFrames { needed: 4, got: 3 }));
}

#[test]
fn overflowing_weights_report_non_finite_loss() {
    let (model, corr) = humanoid();
    let c = clip(&model, "stand", MotionKind::Stand { amplitude: 0.0 }, None, 0.5, FPS);
    let mut cfg = quick(Mode::Sink, 5);
    cfg.weights.w_global_match = 1e308;
    cfg.weights.w_local_match = 1e308;
    let err = retarget(&c.source, &model, &corr, &cfg).unwrap_err();
    assert!(matches!(err, Error::NonFiniteLoss { iteration: 0, .. }), "{err}");
}

#[test]
fn retargeting_is_bit_identical_for_a_fixed_seed() {
    let (model, corr) = humanoid();
    let c = clip(&model, "walk", walk(1.0, 0.0), None, 1.0, FPS);
    let cfg = quick(Mode::PhySink, 40);
    let a = retarget(&c.source, &model, &corr, &cfg).unwrap();
    let b = retarget(&c.source, &model, &corr, &cfg).unwrap();
    assert_eq!(a.motion, b.motion);
    assert_eq!(a.trace, b.trace);

    let other = retarget(&c.source, &model, &corr, &OptimizerConfig { seed: 9, ..cfg }).unwrap();
    assert_ne!(a.motion, other.motion);
}

#[test]
fn trace_has_one_row_per_iterate_and_a_monotone_best() {
    let (model, corr) = humanoid();
    let c = clip(
        &model,
        "squat",
        MotionKind::Squat {
            depth: 0.15,
            period: 2.0,
        },
        None,
        1.0,
        FPS,
    );
    let out = retarget(&c.source, &model, &corr, &quick(Mode::PhySink, 60)).unwrap();
    let rows = &out.trace.rows;
    assert_eq!(rows.len(), 61);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r.iteration, k);
        assert!(r.best <= r.total);
    }
    assert!(rows.windows(2).all(|w| w[1].best <= w[0].best));
    assert!(out.trace.best().unwrap() < rows[0].total);

    let mut csv = Vec::new();
    out.trace.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 62);
    assert_eq!(text.lines().next().unwrap(), LossTrace::CSV_HEADER.join(","));
}

#[test]
fn static_rest_pose_is_recovered() {
    let (model, corr) = humanoid();
    let rest = rest_pose(&model);
    let frames = 12;
    let truth = motion_retarget::RetargetedMotion::new(
        FPS,
        model.joint_names(),
        vec![DVector::zeros(model.joint_count()); frames],
        vec![rest.root_pos(); frames],
        vec![UnitQuaternion::identity(); frames],
    )
    .unwrap();
    let source = render_source(&model, &truth);
    let out = retarget(&source, &model, &corr, &quick(Mode::Sink, 400)).unwrap();
    for t in 0..frames {
        let q = &out.motion.q()[t];
        assert!(q.amax() < 0.02, "frame {t}: max |q| = {}", q.amax());
        assert!((out.motion.root_pos()[t] - rest.root_pos()).norm() < 0.01);
    }
}

#[test]
fn initialization_places_root_on_source_pelvis() {
    let (model, corr) = humanoid();
    let c = clip(&model, "turn", walk(0.5, 0.8), None, 1.0, FPS);
    let init = initialize(&c.source, &model, &corr, 3);
    let pelvis = c.source.require_joint("pelvis").unwrap();
    for t in 0..c.source.frame_count() {
        assert_eq!(init.root_pos[t], c.source.frame(t)[pelvis]);
        let yaw_err = init.root_rot[t].angle_to(&c.truth.root_rot()[t]);
        assert!(yaw_err < 0.1, "frame {t}: heading off by {yaw_err}");
    }
    for (t, q) in init.q.iter().enumerate() {
        for (j, joint) in model.joints().iter().enumerate() {
            assert!((joint.q_min..=joint.q_max).contains(&q[j]), "frame {t} joint {j}");
        }
    }
}

#[test]
fn optimize_rejects_mismatched_variables() {
    let (model, corr) = humanoid();
    let c = clip(&model, "stand", MotionKind::Stand { amplitude: 0.0 }, None, 0.5, FPS);
    let mut init = initialize(&c.source, &model, &corr, 0);
    init.root_pos.pop();
    let contacts = ContactSchedule::uniform(c.source.frame_count(), 0.0).unwrap();
    let err = optimize(init, &model, &c.source, &corr, &contacts, &quick(Mode::Sink, 3)).unwrap_err();
    assert!(matches!(err, Error::Shape(_)));
}

#[test]
fn physink_repairs_penetration_that_sink_reproduces() {
    let (model, corr) = humanoid();
    let c = clip(
        &model,
        "stand_penetrate",
        MotionKind::Stand { amplitude: 0.02 },
        Some(Defect::VerticalOffset { dz: -0.03 }),
        1.5,
        FPS,
    );
    let score = |mode| {
        let out = retarget(&c.source, &model, &corr, &quick(mode, 600)).unwrap();
        non_penetration_pct(&out.motion, &model, &out.contacts)
            .unwrap()
            .unwrap()
    };
    let sink = score(Mode::Sink);
    let physink = score(Mode::PhySink);
    assert!(sink < 50.0, "sink non-penetration {sink}");
    assert!(physink > 95.0, "physink non-penetration {physink}");
}
