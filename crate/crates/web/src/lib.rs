//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function has a plain Rust twin returning
//! `Result<_, String>` so the logic can be tested natively; the exported
//! wrappers only convert errors into JavaScript exceptions.

use motion_retarget::curation::{base_of_support, distance_to_support};
use motion_retarget::kinematics::forward_kinematics_motion;
use motion_retarget::metrics::{quality_report, QualityReport};
use motion_retarget::retarget::{retarget, Mode, OptimizerConfig};
use motion_retarget::signal::{butterworth_zero_phase, FilterSpec};
use motion_retarget::synth::{clean_kinds, clip, test_correspondence, test_humanoid, Defect};
use motion_retarget::FootRegion;
use nalgebra::Vector3;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Zero-phase low-pass of `samples` taken at `fs` Hz.
pub fn lowpass(samples: &[f64], fs: f64, cutoff: f64) -> Result<Vec<f64>, String> {
    let spec = FilterSpec {
        fs,
        ..FilterSpec::default()
    };
    butterworth_zero_phase(samples, &spec, cutoff).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct SupportResult {
    pub hull: Vec<[f64; 2]>,
    /// Zero inside the polygon.
    pub distance: f64,
}

/// Support polygon of ground points given as `[x0, y0, x1, y1, ...]` and
/// the distance of `(px, py)` to it.
pub fn support(xy: &[f64], px: f64, py: f64) -> Result<SupportResult, String> {
    if xy.is_empty() || !xy.len().is_multiple_of(2) {
        return Err(format!(
            "expected a nonempty even number of coordinates, got {}",
            xy.len()
        ));
    }
    let points: Vec<Vector3<f64>> = xy.chunks(2).map(|c| Vector3::new(c[0], c[1], 0.0)).collect();
    let hull = base_of_support(&points);
    let distance = distance_to_support(&Vector3::new(px, py, 0.0), &hull);
    Ok(SupportResult {
        hull: hull.iter().map(|p| [p.x, p.y]).collect(),
        distance,
    })
}

#[derive(Debug, Serialize)]
pub struct RetargetResult {
    pub fps: f64,
    pub report: QualityReport,
    /// Lowest foot site height of the robot, per frame.
    pub foot_height: Vec<f64>,
    /// Largest contact score over the foot regions, per frame.
    pub contact: Vec<f64>,
    /// Objective at every iterate.
    pub loss: Vec<f64>,
}

/// Names accepted by [`retarget_clip`] for the motion and the defect.
pub fn demo_options() -> (Vec<&'static str>, Vec<&'static str>) {
    let kinds = clean_kinds().into_iter().map(|(n, _)| n).collect();
    (kinds, vec!["none", "overextend", "float", "penetrate", "slide"])
}

fn defect(tag: &str) -> Result<Option<Defect>, String> {
    Ok(match tag {
        "none" => None,
        "overextend" => Some(Defect::ElbowOverExtension { inset: 0.01 }),
        "float" => Some(Defect::VerticalOffset { dz: 0.04 }),
        "penetrate" => Some(Defect::VerticalOffset { dz: -0.03 }),
        "slide" => Some(Defect::Slide {
            amplitude: 0.03,
            frequency: 1.5,
        }),
        other => return Err(format!("unknown defect `{other}`")),
    })
}

/// Generates a two-second synthetic clip on the test humanoid, retargets it
/// in `mode` and scores the result.
pub fn retarget_clip(kind: &str, defect_tag: &str, mode: &str, iterations: usize) -> Result<RetargetResult, String> {
    const FPS: f64 = 30.0;
    let model = test_humanoid();
    let corr = test_correspondence(&model);
    let motion = clean_kinds()
        .into_iter()
        .find(|(n, _)| *n == kind)
        .map(|(_, k)| k)
        .ok_or_else(|| format!("unknown motion `{kind}`"))?;
    let c = clip(&model, kind, motion, defect(defect_tag)?, 2.0, FPS);
    let mode: Mode = mode.parse().map_err(|e: motion_retarget::Error| e.to_string())?;
    let cfg = OptimizerConfig {
        iterations,
        ..OptimizerConfig::default().with_mode(mode)
    };
    let out = retarget(&c.source, &model, &corr, &cfg).map_err(|e| e.to_string())?;
    let report = quality_report(
        &out.motion,
        &out.adapted,
        &corr,
        &model,
        &out.contacts,
        cfg.limit_margin,
        FPS,
    )
    .map_err(|e| e.to_string())?;
    let fk = forward_kinematics_motion(&model, &out.motion).map_err(|e| e.to_string())?;
    let foot_height = fk
        .frames
        .iter()
        .map(|pose| {
            FootRegion::ALL
                .iter()
                .map(|&r| pose.site(r).z)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let contact = (0..out.contacts.frame_count())
        .map(|t| {
            FootRegion::ALL
                .iter()
                .map(|&r| out.contacts.get(r, t))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(RetargetResult {
        fps: FPS,
        report,
        foot_height,
        contact,
        loss: out.trace.rows.iter().map(|r| r.total).collect(),
    })
}

fn js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = lowpass)]
pub fn lowpass_js(samples: Vec<f64>, fs: f64, cutoff: f64) -> Result<Vec<f64>, JsError> {
    lowpass(&samples, fs, cutoff).map_err(|e| JsError::new(&e))
}

/// JSON `{hull: [[x, y], ...], distance}`.
#[wasm_bindgen(js_name = support)]
pub fn support_js(xy: Vec<f64>, px: f64, py: f64) -> Result<String, JsError> {
    js(support(&xy, px, py))
}

/// JSON `[motions, defects]`.
#[wasm_bindgen(js_name = demoOptions)]
pub fn demo_options_js() -> String {
    serde_json::to_string(&demo_options()).expect("plain strings serialize")
}

/// JSON form of [`RetargetResult`].
#[wasm_bindgen(js_name = retargetClip)]
pub fn retarget_clip_js(kind: &str, defect: &str, mode: &str, iterations: usize) -> Result<String, JsError> {
    js(retarget_clip(kind, defect, mode, iterations))
}
