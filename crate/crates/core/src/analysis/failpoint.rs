use serde::{Deserialize, Serialize};

use super::profile::{locate_critical_points, BoundaryProfile, CriticalKind, CriticalPoint, MIN_SAMPLES};
use crate::error::Result;
use crate::geometry::TriangleLandmarks;

/// Relative tolerance under which two side maxima count as tied.
pub const TIE_TOLERANCE: f64 = 1e-6;

/// Position of the fail point on the longest side relative to `F` and `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarksCheck {
    pub longest_side_id: usize,
    pub is_on_longest_side: bool,
    /// Arc length of the maximum on the longest side.
    pub s_fail: f64,
    pub s_foot: f64,
    pub s_midpoint: f64,
    pub slack: f64,
    pub between_f_and_m: bool,
    pub dist_to_foot: f64,
    pub dist_to_midpoint: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailPointReport {
    pub global: CriticalPoint,
    /// All per-side maxima tied with the global one, lowest side first.
    pub fail_points: Vec<CriticalPoint>,
    /// Largest local maximum of each side; the largest sample, flagged flat,
    /// when the side has none.
    pub per_side: Vec<CriticalPoint>,
    /// Number of local maxima found on each side.
    pub maxima_per_side: Vec<usize>,
    pub landmarks_check: Option<LandmarksCheck>,
}

fn best_on_side(profile: &BoundaryProfile, side: usize) -> Result<(CriticalPoint, usize)> {
    let sp = &profile.sides[side];
    let found = if sp.samples.len() >= MIN_SAMPLES { locate_critical_points(profile, side)? } else { Vec::new() };
    let maxima: Vec<&CriticalPoint> = found.iter().filter(|c| c.kind == CriticalKind::Max).collect();
    let raw = sp.max_sample();
    let best = maxima.iter().max_by(|a, b| a.grad_sq.total_cmp(&b.grad_sq)).map(|c| (*c).clone());
    let cp = best.unwrap_or(CriticalPoint {
        side_id: side,
        s: raw.s,
        point: raw.point,
        grad_sq: raw.grad_sq,
        kind: CriticalKind::Flat,
        curvature: 0.0,
    });
    Ok((cp, maxima.len()))
}

/// Global maximum of `|∇u|` on the boundary, with per-side maxima and, for
/// triangles, the position relative to the altitude foot and midpoint.
pub fn fail_point(profile: &BoundaryProfile, landmarks: Option<&TriangleLandmarks>) -> Result<FailPointReport> {
    let mut per_side = Vec::with_capacity(profile.sides.len());
    let mut maxima_per_side = Vec::with_capacity(profile.sides.len());
    for side in 0..profile.sides.len() {
        let (cp, n) = best_on_side(profile, side)?;
        per_side.push(cp);
        maxima_per_side.push(n);
    }
    let top = per_side.iter().map(|c| c.grad_sq).fold(f64::NEG_INFINITY, f64::max);
    let fail_points: Vec<CriticalPoint> =
        per_side.iter().filter(|c| c.grad_sq >= top * (1.0 - TIE_TOLERANCE)).cloned().collect();
    let global = fail_points[0].clone();
    let landmarks_check = landmarks.map(|lm| {
        let k = lm.longest_side_id;
        let s_fail = per_side[k].s;
        let slack = 1.5 * profile.h;
        let (lo, hi) = (lm.s_foot.min(lm.s_midpoint), lm.s_foot.max(lm.s_midpoint));
        LandmarksCheck {
            longest_side_id: k,
            is_on_longest_side: lm.is_longest(global.side_id),
            s_fail,
            s_foot: lm.s_foot,
            s_midpoint: lm.s_midpoint,
            slack,
            between_f_and_m: s_fail >= lo - slack && s_fail <= hi + slack,
            dist_to_foot: (s_fail - lm.s_foot).abs(),
            dist_to_midpoint: (s_fail - lm.s_midpoint).abs(),
        }
    });
    Ok(FailPointReport { global, fail_points, per_side, maxima_per_side, landmarks_check })
}
