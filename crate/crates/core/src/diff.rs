//! Finite differences and time resampling.

use std::ops::{Mul, Sub};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::motion::SourceMotion;

/// `order`-th time derivative by repeated forward differences, scaled by
/// `fps^order`. The output is `order` samples shorter than the input.
pub fn finite_difference<V>(series: &[V], order: usize, fps: f64) -> Result<Vec<V>>
where
    V: Clone + Sub<Output = V> + Mul<f64, Output = V>,
{
    if !(1..=3).contains(&order) {
        return Err(Error::param("order", format!("must be 1, 2 or 3, got {order}")));
    }
    if !(fps > 0.0) {
        return Err(Error::param("fps", "must be positive"));
    }
    if series.len() <= order {
        return Err(Error::TooShort {
            needed: order,
            got: series.len(),
        });
    }
    let mut out = series.to_vec();
    for _ in 0..order {
        out = out.windows(2).map(|w| (w[1].clone() - w[0].clone()) * fps).collect();
    }
    Ok(out)
}

fn lerp_track(track: &[Vector3<f64>], u: f64) -> Vector3<f64> {
    let last = track.len() - 1;
    let i = (u.floor() as usize).min(last - 1);
    let frac = u - i as f64;
    track[i] + (track[i + 1] - track[i]) * frac
}

/// Linear resampling of every position track onto a uniform grid spanning
/// the original first and last timestamps. The new frame count is
/// `round(duration * target_fps) + 1`.
pub fn resample(motion: &SourceMotion, target_fps: f64) -> Result<SourceMotion> {
    if !(target_fps.is_finite() && target_fps > 0.0) {
        return Err(Error::param(
            "target_fps",
            format!("must be positive, got {target_fps}"),
        ));
    }
    let n_src = motion.frame_count();
    let duration = motion.duration();
    let n = ((duration * target_fps).round() as usize + 1).max(2);
    // Fractional source index of each output sample.
    let positions: Vec<f64> = (0..n)
        .map(|k| {
            if k == n - 1 {
                (n_src - 1) as f64
            } else {
                (k as f64 * duration / (n - 1) as f64 * motion.fps()).min((n_src - 1) as f64)
            }
        })
        .collect();

    let joint_tracks: Vec<Vec<Vector3<f64>>> = (0..motion.joint_names().len()).map(|i| motion.joint_track(i)).collect();
    let joints = positions
        .iter()
        .map(|&u| joint_tracks.iter().map(|tr| lerp_track(tr, u)).collect())
        .collect();

    let markers = motion.all_markers().clone().map(|region| {
        let count = region.first().map_or(0, Vec::len);
        let tracks: Vec<Vec<Vector3<f64>>> = (0..count).map(|k| region.iter().map(|f| f[k]).collect()).collect();
        positions
            .iter()
            .map(|&u| tracks.iter().map(|tr| lerp_track(tr, u)).collect())
            .collect()
    });
    SourceMotion::new(target_fps, motion.joint_names().to_vec(), joints, markers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_has_zero_velocity() {
        let s = vec![2.5; 10];
        assert!(finite_difference(&s, 1, 30.0).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ramp_velocity() {
        let s: Vec<f64> = (0..20).map(|t| 2.0 * t as f64).collect();
        let d = finite_difference(&s, 1, 30.0).unwrap();
        assert_eq!(d.len(), 19);
        assert!(d.iter().all(|v| (v - 60.0).abs() < 1e-12));
    }

    #[test]
    fn cubic_third_derivative_matches_symbolic() {
        // d^3/dt^3 of t^3 is 6 for any step; t sampled at k / fps.
        let fps = 30.0;
        let s: Vec<f64> = (0..40).map(|k| (k as f64 / fps).powi(3)).collect();
        let d = finite_difference(&s, 3, fps).unwrap();
        for v in d {
            assert!((v - 6.0).abs() < 1e-6, "{v}");
        }
        // Same cubic measured in frames: x = k^3 has third difference 6 per
        // frame^3, i.e. 6 * fps^3 per second^3.
        let s: Vec<f64> = (0..10).map(|k| (k as f64).powi(3)).collect();
        let d = finite_difference(&s, 3, fps).unwrap();
        assert!(d.iter().all(|v| (v - 6.0 * fps.powi(3)).abs() < 1e-6));
    }

    #[test]
    fn too_short_series() {
        assert!(matches!(
            finite_difference(&[1.0, 2.0, 3.0], 3, 30.0),
            Err(Error::TooShort { .. })
        ));
        assert!(finite_difference(&[1.0, 2.0, 3.0], 4, 30.0).is_err());
    }

    proptest! {
        #[test]
        fn difference_is_linear(
            x in proptest::collection::vec(-10.0..10.0f64, 8),
            y in proptest::collection::vec(-10.0..10.0f64, 8),
            a in -3.0..3.0f64,
            b in -3.0..3.0f64,
            order in 1usize..=3,
        ) {
            let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = finite_difference(&mix, order, 30.0).unwrap();
            let dx = finite_difference(&x, order, 30.0).unwrap();
            let dy = finite_difference(&y, order, 30.0).unwrap();
            for i in 0..lhs.len() {
                let rhs = a * dx[i] + b * dy[i];
                prop_assert!((lhs[i] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn annihilates_low_degree_polynomials(
            coeffs in proptest::collection::vec(-2.0..2.0f64, 3),
            order in 1usize..=3,
        ) {
            // Polynomial of degree order - 1 in seconds.
            let fps = 30.0;
            let s: Vec<f64> = (0..12)
                .map(|k| {
                    let t = k as f64 / fps;
                    coeffs.iter().take(order).enumerate().map(|(p, c)| c * t.powi(p as i32)).sum()
                })
                .collect();
            for v in finite_difference(&s, order, fps).unwrap() {
                prop_assert!(v.abs() < 1e-6);
            }
        }
    }
}
