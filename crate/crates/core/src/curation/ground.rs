//! Majority-vote ground plane estimation.

use crate::error::{Error, Result};
use crate::motion::{GroundPlane, SourceMotion};

/// Default half-width of the voting band, meters.
pub const DEFAULT_GROUND_TOLERANCE: f64 = 0.025;

/// Every frame nominates its lowest marker height as a candidate; the
/// candidate with the most markers (over all frames) within `delta` of it
/// wins. Ties go to the lowest candidate.
pub fn estimate_ground_plane(motion: &SourceMotion, delta: f64) -> Result<GroundPlane> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let mut heights = Vec::with_capacity(motion.frame_count() * motion.marker_count());
    let mut candidates = Vec::with_capacity(motion.frame_count());
    for t in 0..motion.frame_count() {
        let frame_min = motion
            .all_markers()
            .iter()
            .flat_map(|region| region[t].iter().map(|p| p.z))
            .inspect(|z| heights.push(*z))
            .fold(f64::INFINITY, f64::min);
        if frame_min == f64::INFINITY {
            return Err(Error::NoMarkers);
        }
        candidates.push(frame_min);
    }
    heights.sort_by(f64::total_cmp);

    let mut best: Option<(usize, f64)> = None;
    for &g in &candidates {
        // `z - g` is monotone in `z`, so the band is a contiguous run.
        let lo = heights.partition_point(|z| z - g < -delta);
        let hi = heights.partition_point(|z| z - g <= delta);
        let votes = hi - lo;
        best = match best {
            Some((v, h)) if v > votes || (v == votes && h <= g) => Some((v, h)),
            _ => Some((votes, g)),
        };
    }
    let (_, height) = best.expect("at least three frames");
    Ok(GroundPlane {
        height,
        tolerance: delta,
    })
}

/// Shifts every position so the plane sits at `z = 0`.
pub fn align_to_ground(motion: &SourceMotion, plane: &GroundPlane) -> Result<SourceMotion> {
    let dz = plane.height;
    motion.map_points(|mut p| {
        p.z -= dz;
        p
    })
}
