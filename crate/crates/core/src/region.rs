//! Rate-region boundaries for the two-user MAC.
//!
//! Every region is a down-set in the nonnegative quadrant: it is described by
//! its upper-right boundary, a polyline running from `(0, r2max)` to
//! `(r1max, 0)` with `r1` nondecreasing and `r2` nonincreasing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::gap::{power_for_integer_rate, rate_fixed_point, rate_with_gap};
use crate::scheduler::{lambda1_and_point_b1, point_b, point_c, point_c1, Scenario};

/// Default number of samples on curved or sampled boundary pieces.
pub const DEFAULT_SAMPLES: usize = 256;

/// A rate pair in bits per real dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(MacError::Domain(format!("rate pair ({r1}, {r2}) must be finite and nonnegative")));
        }
        Ok(Self { r1, r2 })
    }

    pub(crate) fn new_unchecked(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

impl fmt::Display for RatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.r1, self.r2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussianCapacity,
    GapOuter,
    SuperposNoPc,
    SuperposPc,
    TdmaNaive,
    TdmaPc,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::GaussianCapacity,
        Scheme::GapOuter,
        Scheme::SuperposNoPc,
        Scheme::SuperposPc,
        Scheme::TdmaNaive,
        Scheme::TdmaPc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::GaussianCapacity => "gaussian_capacity",
            Scheme::GapOuter => "gap_outer",
            Scheme::SuperposNoPc => "superpos_no_pc",
            Scheme::SuperposPc => "superpos_pc",
            Scheme::TdmaNaive => "tdma_naive",
            Scheme::TdmaPc => "tdma_pc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = MacError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s.trim())
            .ok_or_else(|| MacError::Parse(format!("unknown scheme `{s}`")))
    }
}

/// A scheme-labelled region boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    scheme: Scheme,
    vertices: Vec<RatePoint>,
}

impl RateRegion {
    /// Checks the boundary runs from the `r2` axis to the `r1` axis monotonically.
    pub fn new(scheme: Scheme, vertices: Vec<RatePoint>) -> Result<Self> {
        let (first, last) = match (vertices.first(), vertices.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(MacError::Domain(format!("{scheme} region has no vertices"))),
        };
        if first.r1 != 0.0 || last.r2 != 0.0 {
            return Err(MacError::Domain(format!("{scheme} boundary must start on the r2 axis and end on the r1 axis")));
        }
        for w in vertices.windows(2) {
            if w[1].r1 < w[0].r1 || w[1].r2 > w[0].r2 {
                return Err(MacError::Domain(format!("{scheme} boundary not monotone at {} -> {}", w[0], w[1])));
            }
        }
        Ok(Self { scheme, vertices })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn vertices(&self) -> &[RatePoint] {
        &self.vertices
    }

    /// Boundary closed through the origin; consecutive duplicates removed.
    pub fn polygon(&self) -> Vec<RatePoint> {
        let mut out: Vec<RatePoint> = Vec::with_capacity(self.vertices.len() + 1);
        for &v in self.vertices.iter().chain(std::iter::once(&RatePoint::new_unchecked(0.0, 0.0))) {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn max_sum_rate(&self) -> f64 {
        self.vertices.iter().map(RatePoint::sum).fold(0.0, f64::max)
    }

    pub fn r1_max(&self) -> f64 {
        self.vertices.last().map_or(0.0, |v| v.r1)
    }

    pub fn r2_max(&self) -> f64 {
        self.vertices.first().map_or(0.0, |v| v.r2)
    }

    /// Largest `r2` on the boundary above `r1`; `None` beyond `r1_max`.
    pub fn upper_r2(&self, r1: f64) -> Option<f64> {
        if r1 < 0.0 || r1 > self.r1_max() {
            return None;
        }
        let mut best: Option<f64> = None;
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            if r1 < a.r1 || r1 > b.r1 {
                continue;
            }
            let y = if b.r1 == a.r1 { a.r2.max(b.r2) } else { a.r2 + (b.r2 - a.r2) * (r1 - a.r1) / (b.r1 - a.r1) };
            best = Some(best.map_or(y, |v: f64| v.max(y)));
        }
        best.or_else(|| (self.vertices.len() == 1).then(|| self.vertices[0].r2))
    }

    /// Whether `p` lies in the closed region, with slack `tol` on each coordinate.
    pub fn contains_point(&self, p: &RatePoint, tol: f64) -> bool {
        if p.r1 < -tol || p.r2 < -tol || p.r1 > self.r1_max() + tol {
            return false;
        }
        let x = p.r1.clamp(0.0, self.r1_max());
        match self.upper_r2(x) {
            Some(y) => p.r2 <= y + tol,
            None => false,
        }
    }
}

/// Upper-right boundary of the time-sharing hull of `points` and their
/// projections onto the axes.
pub(crate) fn hull_boundary(points: &[RatePoint]) -> Vec<RatePoint> {
    let r1_max = points.iter().map(|p| p.r1).fold(0.0, f64::max);
    let r2_max = points.iter().map(|p| p.r2).fold(0.0, f64::max);
    let mut pts: Vec<RatePoint> = points.to_vec();
    pts.push(RatePoint::new_unchecked(0.0, r2_max));
    pts.push(RatePoint::new_unchecked(r1_max, 0.0));
    pts.sort_by(|a, b| a.r1.total_cmp(&b.r1).then(b.r2.total_cmp(&a.r2)));
    pts.dedup();

    // Monotone-chain upper hull, dropping points strictly inside.
    let cross = |o: &RatePoint, a: &RatePoint, b: &RatePoint| (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1);
    let mut hull: Vec<RatePoint> = Vec::new();
    for p in pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) > 1e-15 {
            hull.pop();
        }
        hull.push(p);
    }
    // Keep only the Pareto part from the r2 axis down to the r1 axis.
    let start = hull.iter().rposition(|p| p.r1 == 0.0).unwrap_or(0);
    let end = hull.iter().position(|p| p.r2 == 0.0 && p.r1 == r1_max).unwrap_or(hull.len() - 1);
    let mut out: Vec<RatePoint> = hull[start..=end].to_vec();
    out.dedup();
    out
}

fn straight_pentagon(scheme: Scheme, a1: f64, a2: f64, sum: f64, samples: usize) -> Result<RateRegion> {
    if sum >= a1 + a2 {
        let vertices = if a2 == 0.0 || a1 == 0.0 {
            vec![RatePoint::new(0.0, a2)?, RatePoint::new(a1, 0.0)?]
        } else {
            vec![RatePoint::new(0.0, a2)?, RatePoint::new(a1, a2)?, RatePoint::new(a1, 0.0)?]
        };
        return RateRegion::new(scheme, vertices);
    }
    let corner_a = RatePoint::new((sum - a2).max(0.0), a2)?;
    let corner_b = RatePoint::new(a1, (sum - a1).max(0.0))?;
    let mut vertices = vec![RatePoint::new(0.0, a2)?];
    if corner_a.r1 > 0.0 {
        vertices.push(corner_a);
    }
    for i in 1..samples.saturating_sub(1) {
        let t = i as f64 / (samples - 1) as f64;
        let r1 = corner_a.r1 + t * (corner_b.r1 - corner_a.r1);
        vertices.push(RatePoint::new(r1, (sum - r1).max(0.0))?);
    }
    if corner_b.r2 > 0.0 {
        vertices.push(corner_b);
    }
    vertices.push(RatePoint::new(a1, 0.0)?);
    RateRegion::new(scheme, vertices)
}

/// Capacity region with Gaussian codebooks.
pub fn gaussian_capacity_region(scenario: &Scenario) -> Result<RateRegion> {
    let snr1 = scenario.p1() / scenario.n0();
    let snr2 = scenario.p2() / scenario.n0();
    let c1 = rate_with_gap(snr1, 1.0);
    let c2 = rate_with_gap(snr2, 1.0);
    let c12 = rate_with_gap(snr1 + snr2, 1.0);
    straight_pentagon(Scheme::GaussianCapacity, c1, c2, c12, 2)
}

/// Outer bound from the rate-dependent gap on each user and on the sum.
/// The sum-rate face carries `samples` evenly spaced points.
pub fn gap_outer_region(scenario: &Scenario, samples: usize) -> Result<RateRegion> {
    let (a1, a2, s) = gap_outer_bounds(scenario)?;
    straight_pentagon(Scheme::GapOuter, a1, a2, s, samples)
}

/// `(user-1 bound, user-2 bound, sum bound)` of the gap outer region.
pub fn gap_outer_bounds(scenario: &Scenario) -> Result<(f64, f64, f64)> {
    let params = scenario.gap_params();
    let n0 = scenario.n0();
    Ok((
        rate_fixed_point(scenario.p1(), n0, params)?,
        rate_fixed_point(scenario.p2(), n0, params)?,
        rate_fixed_point(scenario.p1() + scenario.p2(), n0, params)?,
    ))
}

/// Superposition without power control: corners `b` and `c` plus the axes.
pub fn superpos_no_pc_region(scenario: &Scenario) -> Result<RateRegion> {
    let r2 = scenario.r2()? as f64;
    let b = point_b(scenario)?;
    let c = point_c(scenario)?;
    RateRegion::new(Scheme::SuperposNoPc, hull_boundary(&[RatePoint::new(0.0, r2)?, b, c]))
}

/// Superposition with power control: `(0, R₂)`, `b₁`, `c₁`, `(R₁, 0)`.
pub fn superpos_pc_region(scenario: &Scenario) -> Result<RateRegion> {
    let r1 = scenario.r1()? as f64;
    let r2 = scenario.r2()? as f64;
    let b1 = lambda1_and_point_b1(scenario)?.point;
    let c1 = point_c1(scenario)?;
    let points = [RatePoint::new(0.0, r2)?, b1, c1, RatePoint::new(r1, 0.0)?];
    RateRegion::new(Scheme::SuperposPc, hull_boundary(&points))
}

/// Time division where each user keeps its average power inside its slot.
pub fn tdma_naive_region(scenario: &Scenario) -> Result<RateRegion> {
    let r1 = scenario.r1()? as f64;
    let r2 = scenario.r2()? as f64;
    RateRegion::new(Scheme::TdmaNaive, hull_boundary(&[RatePoint::new(0.0, r2)?, RatePoint::new(r1, 0.0)?]))
}

/// Rate of a lone user with average power `power` given slot share `share`.
///
/// Inside the slot the user spends `power / share` and time-shares between the
/// two neighbouring integer-bit constellations so the slot power is met exactly.
pub fn tdma_pc_rate(share: f64, power: f64, scenario: &Scenario) -> Result<f64> {
    if share <= 0.0 {
        return Ok(0.0);
    }
    let slot_power = power / share;
    let params = scenario.gap_params();
    let n0 = scenario.n0();
    let k = crate::gap::max_integer_rate(slot_power, n0, params)?;
    let lo = power_for_integer_rate(k, n0, params)?;
    let hi = power_for_integer_rate(k + 1, n0, params)?;
    let frac = ((slot_power - lo) / (hi - lo)).clamp(0.0, 1.0);
    Ok(share * (k as f64 + frac))
}

/// TDMA with power control sampled on a uniform grid of `samples` slot shares.
pub fn tdma_pc_region(scenario: &Scenario, samples: usize) -> Result<RateRegion> {
    if samples < 2 {
        return Err(MacError::Domain(format!("tdma_pc needs at least 2 samples, got {samples}")));
    }
    let mut vertices: Vec<RatePoint> = Vec::with_capacity(samples);
    for i in 0..samples {
        let tau = i as f64 / (samples - 1) as f64;
        let mut r1 = tdma_pc_rate(tau, scenario.p1(), scenario)?;
        let mut r2 = tdma_pc_rate(1.0 - tau, scenario.p2(), scenario)?;
        // ρ is flat while the slot stays below the first level; drop rounding wobble
        if let Some(prev) = vertices.last() {
            r1 = r1.max(prev.r1);
            r2 = r2.min(prev.r2);
        }
        let v = RatePoint::new(r1, r2)?;
        if vertices.last() != Some(&v) {
            vertices.push(v);
        }
    }
    RateRegion::new(Scheme::TdmaPc, vertices)
}

/// Computes the region for `scheme`; `samples` applies to sampled boundaries.
pub fn region_for(scheme: Scheme, scenario: &Scenario, samples: usize) -> Result<RateRegion> {
    match scheme {
        Scheme::GaussianCapacity => gaussian_capacity_region(scenario),
        Scheme::GapOuter => gap_outer_region(scenario, samples),
        Scheme::SuperposNoPc => superpos_no_pc_region(scenario),
        Scheme::SuperposPc => superpos_pc_region(scenario),
        Scheme::TdmaNaive => tdma_naive_region(scenario),
        Scheme::TdmaPc => tdma_pc_region(scenario, samples),
    }
}

/// True iff every vertex of `inner` lies in `outer` within `tol`.
pub fn region_contains(outer: &RateRegion, inner: &RateRegion, tol: f64) -> bool {
    inner.vertices().iter().all(|v| outer.contains_point(v, tol))
}

/// Outer-bound sum rate minus the best sum rate of superposition with power control.
pub fn sum_rate_gap(scenario: &Scenario) -> Result<f64> {
    let (a1, a2, s) = gap_outer_bounds(scenario)?;
    Ok(s.min(a1 + a2) - superpos_pc_region(scenario)?.max_sum_rate())
}
