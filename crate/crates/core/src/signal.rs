//! Zero-phase Butterworth low-pass filtering of motion channels.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::SourceMotion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSpec {
    pub order: usize,
    /// Cutoff for the root translation channel, Hz.
    pub cutoff_root: f64,
    /// Cutoff for every other channel, Hz.
    pub cutoff_pose: f64,
    /// Sampling rate, Hz.
    pub fs: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            order: 4,
            cutoff_root: 3.0,
            cutoff_pose: 6.0,
            fs: 30.0,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || !self.order.is_multiple_of(2) {
            return Err(Error::param(
                "order",
                format!("must be even and >= 2, got {}", self.order),
            ));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::param("fs", "must be positive"));
        }
        for (name, c) in [("cutoff_root", self.cutoff_root), ("cutoff_pose", self.cutoff_pose)] {
            if !(c > 0.0 && c < self.fs / 2.0) {
                return Err(Error::param(name, format!("{c} Hz is outside (0, fs/2)")));
            }
        }
        Ok(())
    }
}

/// Second-order section in direct form II transposed, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that holds the output at `gain * x` for a constant input `x`.
    fn steady_state(&self, x: f64) -> [f64; 2] {
        let y = self.dc_gain() * x;
        let s2 = self.b[2] * x - self.a[1] * y;
        let s1 = self.b[1] * x - self.a[0] * y + s2;
        [s1, s2]
    }

    fn run(&self, data: &mut [f64]) {
        let Some(&first) = data.first() else { return };
        let [mut s1, mut s2] = self.steady_state(first);
        for x in data.iter_mut() {
            let input = *x;
            let y = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * y + s2;
            s2 = self.b[2] * input - self.a[1] * y;
            *x = y;
        }
    }
}

/// Digital Butterworth low-pass as cascaded biquads, designed by bilinear
/// transform with the cutoff prewarped.
pub fn butterworth_sections(order: usize, cutoff: f64, fs: f64) -> Result<Vec<Biquad>> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Error::param("order", format!("must be even and >= 2, got {order}")));
    }
    if !(cutoff > 0.0 && cutoff < fs / 2.0) {
        return Err(Error::param(
            "cutoff",
            format!("{cutoff} Hz must lie in (0, {} Hz)", fs / 2.0),
        ));
    }
    let w = (PI * cutoff / fs).tan();
    let w2 = w * w;
    Ok((0..order / 2)
        .map(|k| {
            // Each conjugate pole pair of the analog prototype: s^2 + 2 sin(theta) s + 1.
            let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
            let damping = 2.0 * theta.sin();
            let norm = 1.0 + damping * w + w2;
            let b0 = w2 / norm;
            Biquad {
                b: [b0, 2.0 * b0, b0],
                a: [2.0 * (w2 - 1.0) / norm, (1.0 - damping * w + w2) / norm],
            }
        })
        .collect())
}

fn forward_backward(sections: &[Biquad], padded: &mut [f64]) {
    for s in sections {
        s.run(padded);
    }
    padded.reverse();
    for s in sections {
        s.run(padded);
    }
    padded.reverse();
}

/// Zero-phase low-pass: forward-backward filtering with odd reflective
/// padding of `3 * order` samples and steady-state initial conditions.
///
/// The result is the average of filtering the series and filtering its time
/// reversal, so it commutes exactly with time reversal even at the edges.
pub fn butterworth_zero_phase(series: &[f64], spec: &FilterSpec, cutoff: f64) -> Result<Vec<f64>> {
    let sections = butterworth_sections(spec.order, cutoff, spec.fs)?;
    let needed = 3 * spec.order;
    if series.len() < needed {
        return Err(Error::TooShort {
            needed: needed - 1,
            got: series.len(),
        });
    }
    let n = series.len();
    let pad = needed.min(n - 1);
    let first = series[0];
    let last = series[n - 1];

    let mut padded = Vec::with_capacity(n + 2 * pad);
    padded.extend((1..=pad).rev().map(|i| 2.0 * first - series[i]));
    padded.extend_from_slice(series);
    padded.extend((1..=pad).map(|i| 2.0 * last - series[n - 1 - i]));

    let mut reversed = padded.clone();
    reversed.reverse();
    forward_backward(&sections, &mut padded);
    forward_backward(&sections, &mut reversed);
    Ok((0..n)
        .map(|i| 0.5 * (padded[pad + i] + reversed[pad + n - 1 - i]))
        .collect())
}

fn filter_track(track: &[Vector3<f64>], spec: &FilterSpec, cutoff: f64) -> Result<Vec<Vector3<f64>>> {
    let axes = (0..3)
        .map(|a| {
            let s: Vec<f64> = track.iter().map(|p| p[a]).collect();
            butterworth_zero_phase(&s, spec, cutoff)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..track.len())
        .map(|t| Vector3::new(axes[0][t], axes[1][t], axes[2][t]))
        .collect())
}

/// Smooths every joint and marker track per axis. The `root_joint` track is
/// filtered at `cutoff_root`, all others at `cutoff_pose`.
pub fn smooth_motion(motion: &SourceMotion, spec: &FilterSpec, root_joint: &str) -> Result<SourceMotion> {
    spec.validate()?;
    let root = motion.require_joint(root_joint)?;
    let joint_count = motion.joint_names().len();
    let mut tracks = Vec::with_capacity(joint_count);
    for i in 0..joint_count {
        let cutoff = if i == root { spec.cutoff_root } else { spec.cutoff_pose };
        tracks.push(filter_track(&motion.joint_track(i), spec, cutoff)?);
    }
    let joints = (0..motion.frame_count())
        .map(|t| tracks.iter().map(|tr| tr[t]).collect())
        .collect();

    let mut markers: [Vec<Vec<Vector3<f64>>>; 4] = Default::default();
    for (r, region) in motion.all_markers().iter().enumerate() {
        let count = region.first().map_or(0, Vec::len);
        let smoothed = (0..count)
            .map(|k| {
                let tr: Vec<Vector3<f64>> = region.iter().map(|f| f[k]).collect();
                filter_track(&tr, spec, spec.cutoff_pose)
            })
            .collect::<Result<Vec<_>>>()?;
        markers[r] = (0..motion.frame_count())
            .map(|t| smoothed.iter().map(|tr| tr[t]).collect())
            .collect();
    }
    SourceMotion::new(motion.fps(), motion.joint_names().to_vec(), joints, markers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> FilterSpec {
        FilterSpec::default()
    }

    #[test]
    fn sections_have_unit_dc_gain() {
        for s in butterworth_sections(4, 3.0, 30.0).unwrap() {
            assert!((s.dc_gain() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_preserved() {
        let x = vec![1.75; 50];
        for y in butterworth_zero_phase(&x, &spec(), 3.0).unwrap() {
            assert!((y - 1.75).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_short_series_and_nyquist() {
        assert!(matches!(
            butterworth_zero_phase(&[0.0; 11], &spec(), 3.0),
            Err(Error::TooShort { .. })
        ));
        assert!(butterworth_zero_phase(&[0.0; 40], &spec(), 15.0).is_err());
        assert!(butterworth_zero_phase(&[0.0; 12], &spec(), 3.0).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(FilterSpec { order: 3, ..spec() }.validate().is_err());
        assert!(FilterSpec {
            cutoff_pose: 16.0,
            ..spec()
        }
        .validate()
        .is_err());
        assert!(spec().validate().is_ok());
    }

    proptest! {
        #[test]
        fn zero_phase_reversal_symmetry(x in proptest::collection::vec(-1.0..1.0f64, 12..80)) {
            let y = butterworth_zero_phase(&x, &spec(), 6.0).unwrap();
            let mut xr = x.clone();
            xr.reverse();
            let mut yr = butterworth_zero_phase(&xr, &spec(), 6.0).unwrap();
            yr.reverse();
            for (a, b) in y.iter().zip(&yr) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn filtering_is_linear(
            x in proptest::collection::vec(-1.0..1.0f64, 40),
            y in proptest::collection::vec(-1.0..1.0f64, 40),
            a in -2.0..2.0f64,
            b in -2.0..2.0f64,
        ) {
            let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let fm = butterworth_zero_phase(&mix, &spec(), 3.0).unwrap();
            let fx = butterworth_zero_phase(&x, &spec(), 3.0).unwrap();
            let fy = butterworth_zero_phase(&y, &spec(), 3.0).unwrap();
            for i in 0..40 {
                prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
            }
        }
    }
}
