//! Modulus of curve families connecting two marked boundary arcs: exact
//! rectangle oracles, the numerical quadrilateral solver, image-domain
//! construction under the affine deformations, and the parallelogram lower
//! bound.

mod solver;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;

use crate::disk::GeodesicBox;
use crate::error::{Error, Result};
use crate::quad_diff::QuadraticDifferential;
use crate::teich::{AffineTeichMap, DeformationParameter};

/// A polygonal Jordan domain with four marked boundary arcs.
///
/// The boundary is a closed counterclockwise polyline; `marks` are four
/// strictly increasing vertex indices splitting it into side A, a free
/// side, side B, and the other free side, in order. The modulus solver
/// computes the family of curves connecting A to B.
#[derive(Debug, Clone)]
pub struct Quadrilateral {
    boundary: Vec<Complex64>,
    marks: [usize; 4],
}

impl Quadrilateral {
    pub fn new(boundary: Vec<Complex64>, marks: [usize; 4]) -> Result<Self> {
        if boundary.len() < 8 {
            return Err(Error::InvalidParameter(format!(
                "boundary needs at least 8 vertices, got {}",
                boundary.len()
            )));
        }
        if boundary.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite boundary vertex".into()));
        }
        for w in marks.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter(format!(
                    "marks must be strictly increasing, got {marks:?}"
                )));
            }
        }
        if marks[3] >= boundary.len() {
            return Err(Error::InvalidParameter(format!(
                "mark {} out of range for {} vertices",
                marks[3],
                boundary.len()
            )));
        }
        if let Some((i, j)) = first_self_intersection(&boundary) {
            return Err(Error::InvalidParameter(format!(
                "boundary polyline self-intersects (segments {i} and {j})"
            )));
        }
        Ok(Self { boundary, marks })
    }

    /// Axis-aligned rectangle `[0,a] x [0,b]` with side A the right vertical
    /// edge and side B the left one, each side sampled `per_side` times.
    /// The connecting family is the horizontal crossing family of modulus `b/a`.
    pub fn rectangle(a: f64, b: f64, per_side: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rectangle sides must be positive, got {a} x {b}"
            )));
        }
        let n = per_side.max(2);
        let corners = [
            Complex64::new(a, 0.0),
            Complex64::new(a, b),
            Complex64::new(0.0, b),
            Complex64::new(0.0, 0.0),
        ];
        let mut boundary = Vec::with_capacity(4 * n);
        for k in 0..4 {
            let p = corners[k];
            let q = corners[(k + 1) % 4];
            for i in 0..n {
                let t = i as f64 / n as f64;
                boundary.push(p + t * (q - p));
            }
        }
        Self::new(boundary, [0, n, 2 * n, 3 * n])
    }

    pub fn boundary(&self) -> &[Complex64] {
        &self.boundary
    }

    pub fn marks(&self) -> [usize; 4] {
        self.marks
    }

    /// The conjugate quadrilateral: roles of the marked and free arcs
    /// exchanged. Its modulus is the reciprocal of this one's.
    pub fn swapped(&self) -> Quadrilateral {
        let len = self.boundary.len();
        let [m0, m1, m2, m3] = self.marks;
        let boundary: Vec<Complex64> = (0..len)
            .map(|k| self.boundary[(k + m1) % len])
            .collect();
        Quadrilateral {
            boundary,
            marks: [0, m2 - m1, m3 - m1, m0 + len - m1],
        }
    }

    /// Apply a pointwise map to every boundary vertex, keeping the marks.
    pub fn map_boundary<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Result<Quadrilateral> {
        Quadrilateral::new(self.boundary.iter().map(|&p| f(p)).collect(), self.marks)
    }
}

impl Serialize for Quadrilateral {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            boundary: Vec<[f64; 2]>,
            marks: &'a [usize; 4],
        }
        Repr {
            boundary: self.boundary.iter().map(|p| [p.re, p.im]).collect(),
            marks: &self.marks,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quadrilateral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            boundary: Vec<[f64; 2]>,
            marks: [usize; 4],
        }
        let r = Repr::deserialize(d)?;
        Quadrilateral::new(
            r.boundary
                .iter()
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
            r.marks,
        )
        .map_err(D::Error::custom)
    }
}

/// Modulus value with its grid resolution and refinement-based error
/// estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusResult {
    pub value: f64,
    pub grid: usize,
    pub error_estimate: f64,
}

/// Exact modulus of the family crossing `[0,a] x [0,b]` between the
/// vertical sides: `b/a`.
pub fn rect_modulus(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rectangle sides must be positive, got {a}, {b}"
        )));
    }
    Ok(b / a)
}

/// Numerical modulus of the family connecting side A to side B of `q`.
///
/// Solves the harmonic mixed boundary-value problem (potential 0 on A, 1 on
/// B, natural condition on the free sides) on a rasterized interior and
/// returns the Dirichlet energy. The value is conformally invariant up to
/// discretization error; `error_estimate` is `|value(grid) - value(grid/2)|`.
pub fn quad_modulus(q: &Quadrilateral, grid: usize) -> Result<ModulusResult> {
    solver::solve(q, grid)
}

/// Boundary polyline of the disk under the natural chart of
/// `e^{-i theta} phi` followed by `f_{s+ti}`, marked at the images of the
/// box corners.
///
/// The circle is sampled at `n_boundary` angles distributed over the four
/// arcs, with the corner angles included exactly.
pub fn image_quadrilateral_rotated(
    phi: &QuadraticDifferential,
    theta: f64,
    param: &DeformationParameter,
    b: &GeodesicBox,
    n_boundary: usize,
) -> Result<Quadrilateral> {
    if n_boundary < 256 {
        return Err(Error::InvalidParameter(format!(
            "n_boundary must be at least 256, got {n_boundary}"
        )));
    }
    let corners = [b.a, b.b, b.c, b.d];
    let gaps = [
        b.a.ccw_to(b.b),
        b.b.ccw_to(b.c),
        b.c.ccw_to(b.d),
        b.d.ccw_to(b.a),
    ];
    let chart_rot = Complex64::from_polar(1.0, -0.5 * theta);
    let f = AffineTeichMap::new(*param);
    let mut boundary = Vec::with_capacity(n_boundary + 4);
    let mut marks = [0usize; 4];
    for arc in 0..4 {
        marks[arc] = boundary.len();
        let count = ((n_boundary as f64 * gaps[arc] / TAU).round() as usize).max(2);
        let start = corners[arc].angle();
        for i in 0..count {
            let alpha = start + gaps[arc] * i as f64 / count as f64;
            let zeta = Complex64::from_polar(1.0, alpha);
            boundary.push(f.apply(chart_rot * phi.natural_parameter(zeta)));
        }
    }
    Quadrilateral::new(boundary, marks).map_err(|e| match e {
        Error::InvalidParameter(msg) if msg.contains("self-intersects") => {
            Error::ChartInjectivity(msg)
        }
        other => other,
    })
}

/// [`image_quadrilateral_rotated`] with no rotation of the differential.
pub fn image_quadrilateral(
    phi: &QuadraticDifferential,
    param: &DeformationParameter,
    b: &GeodesicBox,
    n_boundary: usize,
) -> Result<Quadrilateral> {
    image_quadrilateral_rotated(phi, 0.0, param, b, n_boundary)
}

/// Lower bound for the modulus of the image under `f_{s+ti}` of the family
/// crossing `[0,a] x [0,b]`, allowing an exceptional endpoint set of
/// measure `m_a` on each vertical side:
/// `(b/a)(s + t^2/s) - |t|/s - (2 m_a / a)(s^2 + t^2)/s`.
///
/// The bound may be non-positive, in which case it carries no information
/// and is reported as-is.
pub fn parallelogram_lower_bound(s: f64, t: f64, a: f64, b: f64, m_a: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("need s > 0, got {s}")));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need positive rectangle sides, got {a}, {b}"
        )));
    }
    if m_a < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "exceptional measure must be non-negative, got {m_a}"
        )));
    }
    let d = s + t * t / s;
    Ok((b / a) * d - t.abs() / s - (2.0 * m_a / a) * (s * s + t * t) / s)
}

/// First pair of properly intersecting non-adjacent segments, if any.
fn first_self_intersection(poly: &[Complex64]) -> Option<(usize, usize)> {
    let n = poly.len();
    let seg = |k: usize| (poly[k], poly[(k + 1) % n]);
    let cross = |o: Complex64, p: Complex64, q: Complex64| {
        (p.re - o.re) * (q.im - o.im) - (p.im - o.im) * (q.re - o.re)
    };
    let bbox = |p: Complex64, q: Complex64| {
        (
            p.re.min(q.re),
            p.re.max(q.re),
            p.im.min(q.im),
            p.im.max(q.im),
        )
    };
    for i in 0..n {
        let (p1, p2) = seg(i);
        let (ixl, ixh, iyl, iyh) = bbox(p1, p2);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // adjacent through the wrap
            }
            let (q1, q2) = seg(j);
            let (jxl, jxh, jyl, jyh) = bbox(q1, q2);
            if jxl > ixh || jxh < ixl || jyl > iyh || jyh < iyl {
                continue;
            }
            let d1 = cross(q1, q2, p1);
            let d2 = cross(q1, q2, p2);
            let d3 = cross(p1, p2, q1);
            let d4 = cross(p1, p2, q2);
            if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
                && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
            {
                return Some((i, j));
            }
        }
    }
    None
}
