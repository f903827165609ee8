//! The limiting measured lamination of a quadratic differential: mass of a
//! box of geodesics as the transverse integral of `1/l` over the vertical
//! leaves whose endpoints separate into the box arcs.
//!
//! Everything happens in the natural chart of `e^{-i theta} phi`, where the
//! vertical leaves are exactly the connected components of a vertical line
//! intersected with the chart image of the disk. A leaf's phi-length is its
//! Euclidean height there, and its circle endpoints are read off the chart
//! boundary polyline.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::disk::{BoundaryPoint, GeodesicBox, ANGLE_EPS};
use crate::error::{Error, Result};
use crate::quad_diff::QuadraticDifferential;

/// Mass of a box of geodesics with its refinement-based error estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaminationMass {
    pub r#box: GeodesicBox,
    pub theta: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub samples_used: usize,
    /// Set when no transversal sample met the box (zero mass by coverage).
    #[serde(skip)]
    pub empty_coverage: bool,
}

/// Boundary polyline of the chart image of the disk under
/// `zeta -> e^{-i theta/2} int sqrt(phi)`, tagged with the circle angle of
/// every vertex.
pub(crate) struct ChartBoundary {
    pub angles: Vec<f64>,
    pub points: Vec<Complex64>,
}

impl ChartBoundary {
    pub fn new(phi: &QuadraticDifferential, theta: f64, samples: usize) -> Self {
        let rot = Complex64::from_polar(1.0, -0.5 * theta);
        let mut angles = Vec::with_capacity(samples);
        let mut points = Vec::with_capacity(samples);
        for k in 0..samples {
            let alpha = TAU * k as f64 / samples as f64;
            angles.push(alpha);
            points.push(rot * phi.natural_parameter(Complex64::from_polar(1.0, alpha)));
        }
        Self { angles, points }
    }

    pub fn x_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.points {
            lo = lo.min(p.re);
            hi = hi.max(p.re);
        }
        (lo, hi)
    }
}

struct Crossing {
    y: f64,
    angle: f64,
}

/// One vertical leaf: height interval and the two circle endpoints.
struct Leaf {
    length: f64,
    lo: BoundaryPoint,
    hi: BoundaryPoint,
}

/// Collect, for each transversal sample `x_j`, the vertical-line components
/// of the chart domain as leaves.
fn leaves_at_samples(boundary: &ChartBoundary, xs: &[f64]) -> Vec<Vec<Leaf>> {
    let m = boundary.points.len();
    let mut buckets: Vec<Vec<Crossing>> = (0..xs.len()).map(|_| Vec::new()).collect();
    let (x0, dx) = if xs.len() > 1 {
        (xs[0], xs[1] - xs[0])
    } else {
        (xs.first().copied().unwrap_or(0.0), 1.0)
    };
    for k in 0..m {
        let p = boundary.points[k];
        let q = boundary.points[(k + 1) % m];
        let a0 = boundary.angles[k];
        let a1 = if k + 1 < m { boundary.angles[k + 1] } else { TAU };
        let (lo, hi) = (p.re.min(q.re), p.re.max(q.re));
        if hi - lo == 0.0 {
            continue;
        }
        // indices j with lo < xs[j] < hi
        let j_lo = ((lo - x0) / dx).ceil().max(0.0) as usize;
        let j_hi = (((hi - x0) / dx).floor() as isize).min(xs.len() as isize - 1);
        for j in j_lo as isize..=j_hi {
            if j < 0 {
                continue;
            }
            let x = xs[j as usize];
            if x <= lo || x >= hi {
                continue;
            }
            let t = (x - p.re) / (q.re - p.re);
            buckets[j as usize].push(Crossing {
                y: p.im + t * (q.im - p.im),
                angle: a0 + t * (a1 - a0),
            });
        }
    }
    buckets
        .into_iter()
        .map(|mut cr| {
            cr.sort_by(|a, b| a.y.total_cmp(&b.y));
            cr.chunks(2)
                .filter(|pair| pair.len() == 2)
                .map(|pair| Leaf {
                    length: pair[1].y - pair[0].y,
                    lo: BoundaryPoint::new(pair[0].angle),
                    hi: BoundaryPoint::new(pair[1].angle),
                })
                .collect()
        })
        .collect()
}

fn in_arc_pair(leaf: &Leaf, b: &GeodesicBox) -> bool {
    let first = leaf.lo.in_arc(b.a, b.b) && leaf.hi.in_arc(b.c, b.d);
    let second = leaf.lo.in_arc(b.c, b.d) && leaf.hi.in_arc(b.a, b.b);
    first || second
}

fn near_corner(p: BoundaryPoint, b: &GeodesicBox) -> bool {
    b.angles().iter().any(|&corner| {
        let d = (p.angle() - corner).rem_euclid(TAU);
        d <= ANGLE_EPS || d >= TAU - ANGLE_EPS
    })
}

struct Pass {
    value: f64,
    corner_error: f64,
    kept: usize,
}

fn midpoint_pass(boundary: &ChartBoundary, b: &GeodesicBox, n: usize) -> Pass {
    let (x_lo, x_hi) = boundary.x_range();
    let dx = (x_hi - x_lo) / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| x_lo + (j as f64 + 0.5) * dx).collect();
    let all_leaves = leaves_at_samples(boundary, &xs);
    let mut value = 0.0;
    let mut corner_error = 0.0;
    let mut kept = 0;
    for leaves in &all_leaves {
        for leaf in leaves {
            if leaf.length <= 0.0 {
                continue;
            }
            if !in_arc_pair(leaf, b) {
                continue;
            }
            // Corner cells are excluded; the lamination has no atoms, so
            // they vanish under refinement and only widen the estimate.
            if near_corner(leaf.lo, b) || near_corner(leaf.hi, b) {
                corner_error += dx / leaf.length;
                continue;
            }
            value += dx / leaf.length;
            kept += 1;
        }
    }
    Pass {
        value,
        corner_error,
        kept,
    }
}

/// Mass of a box of geodesics under the measured lamination of
/// `e^{-i theta} phi`, by the midpoint rule over `n_samples` transversal
/// positions with one internal refinement for the error estimate.
///
/// Deterministic for fixed inputs. Empty transversal coverage yields zero
/// mass with the coverage flag set.
pub fn lamination_mass(
    phi: &QuadraticDifferential,
    theta: f64,
    b: &GeodesicBox,
    n_samples: usize,
) -> Result<LaminationMass> {
    if n_samples < 16 {
        return Err(Error::InvalidParameter(format!(
            "n_samples must be at least 16, got {n_samples}"
        )));
    }
    let m = (8 * n_samples).clamp(8192, 1 << 20);
    let boundary = ChartBoundary::new(phi, theta, m);
    let coarse = midpoint_pass(&boundary, b, n_samples);
    let refined = midpoint_pass(&boundary, b, 2 * n_samples);
    let value = refined.value;
    let error_estimate = (refined.value - coarse.value).abs() + refined.corner_error;
    Ok(LaminationMass {
        r#box: *b,
        theta,
        value,
        error_estimate,
        samples_used: 2 * n_samples,
        empty_coverage: refined.kept == 0 && coarse.kept == 0,
    })
}

/// Masses of nested boxes shrinking onto a single geodesic; the sequence
/// must tend to zero because the lamination has no atoms.
///
/// Each width `w` builds the box `[g1 - w, g1 + w] x [g2 - w, g2 + w]`
/// around the geodesic's endpoints. Sample counts scale with `1/w` so the
/// shrinking window stays resolved.
pub fn atom_scan(
    phi: &QuadraticDifferential,
    theta: f64,
    geodesic: (BoundaryPoint, BoundaryPoint),
    widths: &[f64],
) -> Result<Vec<f64>> {
    if widths.is_empty() {
        return Err(Error::InvalidParameter("widths must be non-empty".into()));
    }
    for w in widths.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidParameter(
                "widths must be strictly decreasing".into(),
            ));
        }
    }
    if widths[widths.len() - 1] <= 0.0 {
        return Err(Error::InvalidParameter("widths must be positive".into()));
    }
    let (g1, g2) = geodesic;
    let mut out = Vec::with_capacity(widths.len());
    for &w in widths {
        let b = GeodesicBox::new(
            g1.angle() - w,
            g1.angle() + w,
            g2.angle() - w,
            g2.angle() + w,
        )?;
        let n = ((128.0 / w).ceil() as usize).clamp(2048, 1 << 18);
        out.push(lamination_mass(phi, theta, &b, n)?.value);
    }
    Ok(out)
}
