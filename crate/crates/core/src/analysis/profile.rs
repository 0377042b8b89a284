use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{boundary_flux, BoundaryFlux, TorsionSolution};
use crate::geometry::Point;
use crate::numeric::{brent_root, least_squares};

/// Half-width, in samples, of the local cubic fit around a candidate.
const FIT_HALF_WIDTH: usize = 4;
/// Samples excluded next to each end of an open side.
const GUARD: usize = 2;
/// Minimum number of samples on a side for critical-point scanning.
pub const MIN_SAMPLES: usize = 8;
/// Critical points less prominent than this fraction of the side maximum
/// are classified flat.
const PROMINENCE_FRACTION: f64 = 1e-3;
/// Critical points must also be this many times more prominent than the
/// median local-fit residual.
const NOISE_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub point: Point,
    pub dudn: f64,
    pub grad_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideProfile {
    pub side_id: usize,
    pub name: String,
    pub closed: bool,
    pub length: f64,
    /// Sorted by strictly increasing `s`.
    pub samples: Vec<ProfileSample>,
}

impl SideProfile {
    pub fn max_sample(&self) -> &ProfileSample {
        self.samples.iter().max_by(|a, b| a.grad_sq.total_cmp(&b.grad_sq)).expect("sides are never empty")
    }
}

/// `|∇u|²` along every side, sampled at the boundary nodes.
#[derive(Clone, Debug)]
pub struct BoundaryProfile {
    pub sides: Vec<SideProfile>,
    pub flux: BoundaryFlux,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Max,
    Min,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub side_id: usize,
    pub s: f64,
    pub point: Point,
    pub grad_sq: f64,
    pub kind: CriticalKind,
    /// Second derivative of the fitted local cubic in `s`.
    pub curvature: f64,
}

pub fn boundary_profile(solution: &TorsionSolution) -> Result<BoundaryProfile> {
    Ok(profile_from_flux(boundary_flux(solution)?))
}

pub fn profile_from_flux(flux: BoundaryFlux) -> BoundaryProfile {
    let mesh = flux.mesh.clone();
    let sides = mesh
        .sides
        .iter()
        .map(|info| SideProfile {
            side_id: info.id,
            name: info.name.clone(),
            closed: info.closed,
            length: info.length,
            samples: flux
                .side_samples(info.id)
                .into_iter()
                .map(|p| ProfileSample { s: p.s, point: p.point, dudn: p.dudn, grad_sq: p.dudn * p.dudn })
                .collect(),
        })
        .collect();
    BoundaryProfile { sides, flux, h: mesh.h }
}

impl BoundaryProfile {
    /// `|∇u|²` from the interpolated flux at arc length `s`.
    pub fn grad_sq_at(&self, side: usize, s: f64) -> f64 {
        self.flux.at(side, s).powi(2)
    }

    pub fn dudn_at(&self, side: usize, s: f64) -> f64 {
        self.flux.at(side, s)
    }

    pub fn side(&self, side: usize) -> &SideProfile {
        &self.sides[side]
    }

    /// CSV `side,s,x,y,dudn,gradsq`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "side,s,x,y,dudn,gradsq")?;
        for side in &self.sides {
            for p in &side.samples {
                writeln!(w, "{},{:?},{:?},{:?},{:?},{:?}", side.side_id, p.s, p.point.x, p.point.y, p.dudn, p.grad_sq)?;
            }
        }
        Ok(())
    }
}

/// Least-squares cubic through samples `lo..=hi` (unwrapped indices) in the
/// local variable `t = (s - s0) / scale`.
struct LocalCubic {
    c: Vec<f64>,
    s0: f64,
    scale: f64,
}

impl LocalCubic {
    fn t(&self, s: f64) -> f64 {
        (s - self.s0) / self.scale
    }

    fn value(&self, t: f64) -> f64 {
        self.c[0] + t * (self.c[1] + t * (self.c[2] + t * self.c[3]))
    }

    /// `dp/dt`.
    fn slope(&self, t: f64) -> f64 {
        self.c[1] + 2.0 * self.c[2] * t + 3.0 * self.c[3] * t * t
    }

    /// `d²p/dt²`.
    fn bend(&self, t: f64) -> f64 {
        2.0 * self.c[2] + 6.0 * self.c[3] * t
    }
}

/// Sample access along one side with unwrapped indices on closed sides.
struct SideSeries<'a> {
    arc: &'a [f64],
    closed: bool,
    length: f64,
    values: &'a [f64],
}

impl SideSeries<'_> {
    fn m(&self) -> isize {
        self.arc.len() as isize
    }

    fn s(&self, i: isize) -> f64 {
        let m = self.m();
        if self.closed {
            self.arc[i.rem_euclid(m) as usize] + self.length * i.div_euclid(m) as f64
        } else {
            self.arc[i as usize]
        }
    }

    fn v(&self, i: isize) -> f64 {
        self.values[i.rem_euclid(self.m()) as usize]
    }

    /// Window of `len` samples starting near `start`, kept inside open sides.
    fn window(&self, start: isize, len: isize) -> (isize, isize) {
        if self.closed {
            (start, start + len - 1)
        } else {
            let lo = start.clamp(0, (self.m() - len).max(0));
            (lo, (lo + len - 1).min(self.m() - 1))
        }
    }

    fn fit(&self, lo: isize, hi: isize, s0: f64) -> Result<LocalCubic> {
        let scale = (self.s(hi) - self.s(lo)).max(f64::MIN_POSITIVE);
        let rows: Vec<Vec<f64>> = (lo..=hi)
            .map(|k| {
                let t = (self.s(k) - s0) / scale;
                vec![1.0, t, t * t, t * t * t]
            })
            .collect();
        let rhs: Vec<f64> = (lo..=hi).map(|k| self.v(k)).collect();
        let (c, _) = least_squares(&rows, &rhs)?;
        Ok(LocalCubic { c, s0, scale })
    }

    /// Cubic centred on sample `i`.
    fn fit_at(&self, i: isize) -> Result<LocalCubic> {
        let w = FIT_HALF_WIDTH as isize;
        let (lo, hi) = self.window(i - w, 2 * w + 1);
        self.fit(lo, hi, self.s(i))
    }

    /// Height of sample `i` above the higher of the two lowest points reached
    /// before meeting a higher sample on either side.
    fn prominence(&self, i: isize) -> f64 {
        let m = self.m();
        let gi = self.v(i);
        let walk = |step: isize| -> Option<f64> {
            let mut lowest = gi;
            let mut k = i + step;
            loop {
                if self.closed {
                    if (k - i).abs() >= m {
                        return None;
                    }
                } else if k < 0 || k >= m {
                    return Some(lowest);
                }
                let v = self.v(k);
                if v > gi {
                    return Some(lowest);
                }
                lowest = lowest.min(v);
                k += step;
            }
        };
        match (walk(-1), walk(1)) {
            (Some(a), Some(b)) => gi - a.max(b),
            (Some(a), None) | (None, Some(a)) => gi - a,
            (None, None) => gi - (0..m).map(|k| self.v(k)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Derivative with respect to arc length of `values` sampled at increasing
/// arc lengths `arc`, from a least-squares cubic over nearby samples.
/// Closed sides wrap around at `length`.
pub fn smoothed_slopes(arc: &[f64], length: f64, closed: bool, values: &[f64]) -> Result<Vec<f64>> {
    if arc.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { side: 0, count: arc.len(), required: MIN_SAMPLES });
    }
    let series = SideSeries { arc, closed, length, values };
    (0..series.m())
        .map(|i| {
            let fit = series.fit_at(i)?;
            Ok(fit.slope(0.0) / fit.scale)
        })
        .collect()
}

/// Local stationary points of `|∇u|²` along a side.
///
/// The derivative in `s` is estimated at every sample by a least-squares
/// cubic over nearby samples, which suppresses the alternation between
/// vertex and mid-edge flux values. Sign changes of that derivative (zero
/// counted as positive), away from a guard band at the ends of open sides,
/// bracket the stationary points; each is refined with Brent's method on the
/// derivative of a cubic centred on the bracket.
///
/// A point is flat unless its prominence exceeds both a fraction of the side
/// maximum and a multiple of the local-fit residual (the flux noise level).
pub fn locate_critical_points(profile: &BoundaryProfile, side_id: usize) -> Result<Vec<CriticalPoint>> {
    let side = profile.sides.get(side_id).ok_or_else(|| Error::InvalidArgument(format!("no side {side_id}")))?;
    let m = side.samples.len();
    if m < MIN_SAMPLES {
        return Err(Error::TooFewSamples { side: side_id, count: m, required: MIN_SAMPLES });
    }
    let g: Vec<f64> = side.samples.iter().map(|p| p.grad_sq).collect();
    let arc: Vec<f64> = side.samples.iter().map(|p| p.s).collect();
    let series = SideSeries { arc: &arc, closed: side.closed, length: side.length, values: &g };
    let mi = m as isize;
    let w = FIT_HALF_WIDTH as isize;
    let side_max = g.iter().cloned().fold(0.0, f64::max);

    let fits: Vec<LocalCubic> = (0..mi).map(|i| series.fit_at(i)).collect::<Result<_>>()?;
    let mut residuals: Vec<f64> = fits.iter().zip(&g).map(|(f, v)| (f.value(0.0) - v).abs()).collect();
    residuals.sort_by(f64::total_cmp);
    let noise = residuals[m / 2];
    let floor = (PROMINENCE_FRACTION * side_max).max(NOISE_FACTOR * noise);

    let slope = |i: isize| fits[i.rem_euclid(mi) as usize].slope(0.0);
    let (first, last) = if side.closed { (0, mi) } else { (GUARD as isize, mi - 1 - GUARD as isize) };
    let mut out: Vec<CriticalPoint> = Vec::new();
    for i in first..last {
        let (d0, d1) = (slope(i), slope(i + 1));
        if (d0 >= 0.0) == (d1 >= 0.0) {
            continue;
        }
        let (sa, sb) = (series.s(i), series.s(i + 1));
        let (lo, hi) = series.window(i + 1 - w, 2 * w);
        let fit = series.fit(lo, hi, 0.5 * (sa + sb))?;
        let (ta, tb) = (fit.t(sa), fit.t(sb));
        let t_star = if fit.slope(ta) * fit.slope(tb) < 0.0 {
            brent_root(|t| fit.slope(t), ta, tb, 1e-14)?
        } else {
            // Zero of the linearly interpolated sample slopes.
            ta + (tb - ta) * d0 / (d0 - d1)
        };
        let is_max = d0 > d1;
        let curvature = fit.bend(t_star) / (fit.scale * fit.scale);
        let mut s = fit.s0 + t_star * fit.scale;
        if side.closed {
            s = s.rem_euclid(side.length);
        }
        let grad_sq = fit.value(t_star);
        // Extreme raw sample of the window; noise can shift it off the bracket.
        let sign = if is_max { 1.0 } else { -1.0 };
        let peak = (lo..=hi).max_by(|a, b| (sign * series.v(*a)).total_cmp(&(sign * series.v(*b)))).unwrap_or(i);
        let signed: Vec<f64> = g.iter().map(|v| sign * v).collect();
        let prominence = SideSeries { values: &signed, ..series }.prominence(peak);
        let kind = if prominence < floor {
            CriticalKind::Flat
        } else if is_max {
            CriticalKind::Max
        } else {
            CriticalKind::Min
        };
        let point = profile.flux.mesh.point_on_side(side_id, s);
        out.push(CriticalPoint { side_id, s, point, grad_sq, kind, curvature });
    }
    Ok(out)
}

/// Number of local maxima (excluding flat points) on a side.
pub fn count_maxima(points: &[CriticalPoint]) -> usize {
    points.iter().filter(|p| p.kind == CriticalKind::Max).count()
}
