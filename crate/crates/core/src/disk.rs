//! Geodesics of the hyperbolic disk: boundary points, boxes of geodesics,
//! Möbius maps, circle homeomorphisms, and the Liouville measure in its
//! cross-ratio and double-integral forms.
//!
//! A box `[a,b] x [c,d]` (quadruple counterclockwise on the circle) indexes
//! the geodesics with one endpoint in the arc `[a,b]` and the other in
//! `[c,d]`. Its Liouville mass is the log of a cross-ratio of the four
//! endpoints; equivalently the double integral of `1/|e^{ia}-e^{ib}|^2`
//! over the two arcs.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson_2d;

/// Angular comparison epsilon shared by all boundary-angle decisions.
pub const ANGLE_EPS: f64 = 1e-12;

/// A point of the unit circle, stored as an angle normalized to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        // rem_euclid can return TAU itself when the input is a tiny negative.
        if a >= TAU {
            a -= TAU;
        }
        Self { angle: a }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The point `e^{i angle}` as a complex number.
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    pub fn from_point(z: Complex64) -> Self {
        Self::new(z.arg())
    }

    /// Counterclockwise angular distance from `self` to `other`, in `[0, 2pi)`.
    pub fn ccw_to(&self, other: BoundaryPoint) -> f64 {
        (other.angle - self.angle).rem_euclid(TAU)
    }

    /// Whether this point lies on the closed counterclockwise arc from
    /// `start` to `end`, up to [`ANGLE_EPS`].
    pub fn in_arc(&self, start: BoundaryPoint, end: BoundaryPoint) -> bool {
        let span = start.ccw_to(end);
        let off = start.ccw_to(*self);
        off <= span + ANGLE_EPS
    }
}

/// A box of geodesics `[a,b] x [c,d]` with the quadruple in strict
/// counterclockwise order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicBox {
    pub a: BoundaryPoint,
    pub b: BoundaryPoint,
    pub c: BoundaryPoint,
    pub d: BoundaryPoint,
}

impl GeodesicBox {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let pts = [
            BoundaryPoint::new(a),
            BoundaryPoint::new(b),
            BoundaryPoint::new(c),
            BoundaryPoint::new(d),
        ];
        Self::from_points(pts[0], pts[1], pts[2], pts[3])
    }

    pub fn from_points(
        a: BoundaryPoint,
        b: BoundaryPoint,
        c: BoundaryPoint,
        d: BoundaryPoint,
    ) -> Result<Self> {
        let gaps = [a.ccw_to(b), b.ccw_to(c), c.ccw_to(d), d.ccw_to(a)];
        for (i, g) in gaps.iter().enumerate() {
            if *g <= ANGLE_EPS {
                return Err(Error::InvalidBox(format!(
                    "gap {i} between consecutive points is {g:.3e} <= {ANGLE_EPS:.0e}"
                )));
            }
        }
        // Strict counterclockwise order means the four gaps wind exactly once.
        let total: f64 = gaps.iter().sum();
        if (total - TAU).abs() > 1e-9 {
            return Err(Error::InvalidBox(format!(
                "points not in counterclockwise order (gap sum {total:.12} != 2pi)"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn angles(&self) -> [f64; 4] {
        [
            self.a.angle(),
            self.b.angle(),
            self.c.angle(),
            self.d.angle(),
        ]
    }

    /// The box with the roles of the two arcs exchanged; same geodesic family.
    pub fn swapped(&self) -> GeodesicBox {
        GeodesicBox {
            a: self.c,
            b: self.d,
            c: self.a,
            d: self.b,
        }
    }
}

impl Serialize for GeodesicBox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.angles().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeodesicBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 4]>::deserialize(d)?;
        GeodesicBox::new(v[0], v[1], v[2], v[3]).map_err(D::Error::custom)
    }
}

/// Liouville measure of a box from the cross-ratio formula
/// `L = log[(c-a)(d-b) / ((d-a)(c-b))]` with the four points on the circle.
pub fn liouville_box(b: &GeodesicBox) -> f64 {
    let (pa, pb, pc, pd) = (b.a.point(), b.b.point(), b.c.point(), b.d.point());
    let ratio = ((pc - pa) * (pd - pb)) / ((pd - pa) * (pc - pb));
    // The cross-ratio of a counterclockwise quadruple is real and > 1;
    // ln|ratio| discards the rounding-level imaginary residue.
    ratio.norm().ln()
}

/// Liouville measure of a box as the double integral
/// `iint da db / |e^{ia} - e^{ib}|^2` over `[a,b] x [c,d]`,
/// evaluated by adaptive quadrature.
///
/// Off the diagonal the integrand `1 / (4 sin^2((a-b)/2))` is smooth, which
/// a valid box guarantees. Budget exhaustion surfaces as an accuracy error
/// carrying the best estimate.
pub fn liouville_integral(b: &GeodesicBox, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let a0 = b.a.angle();
    let a1 = a0 + b.a.ccw_to(b.b);
    let c0 = a0 + b.a.ccw_to(b.c);
    let c1 = a0 + b.a.ccw_to(b.d);
    adaptive_simpson_2d(
        |alpha, beta| {
            let s = 0.5 * (alpha - beta);
            1.0 / (4.0 * s.sin().powi(2))
        },
        a0,
        a1,
        c0,
        c1,
        tol,
    )
}

/// A Möbius self-map of the disk, `z -> (p z + q) / (conj(q) z + conj(p))`
/// with `|p|^2 - |q|^2 = 1`. Composition and inversion stay in the type.
#[derive(Debug, Clone, Copy)]
pub struct MoebiusMap {
    p: Complex64,
    q: Complex64,
}

impl MoebiusMap {
    pub fn new(p: Complex64, q: Complex64) -> Result<Self> {
        let det = p.norm_sqr() - q.norm_sqr();
        if det <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "|p|^2 - |q|^2 = {det} must be positive"
            )));
        }
        let scale = det.sqrt();
        Ok(Self {
            p: p / scale,
            q: q / scale,
        })
    }

    pub fn identity() -> Self {
        Self {
            p: Complex64::new(1.0, 0.0),
            q: Complex64::new(0.0, 0.0),
        }
    }

    /// Rotation `z -> e^{i theta} z`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            p: Complex64::from_polar(1.0, 0.5 * theta),
            q: Complex64::new(0.0, 0.0),
        }
    }

    /// The map `z -> (z + w) / (1 + conj(w) z)` sending `-w` to 0; requires `|w| < 1`.
    pub fn blaschke(w: Complex64) -> Result<Self> {
        if w.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "blaschke parameter must lie in the open disk, got |w| = {}",
                w.norm()
            )));
        }
        let scale = (1.0 - w.norm_sqr()).sqrt();
        Ok(Self {
            p: Complex64::new(1.0 / scale, 0.0),
            q: w / scale,
        })
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.p * z + self.q) / (self.q.conj() * z + self.p.conj())
    }

    pub fn apply_boundary(&self, pt: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::from_point(self.apply(pt.point()))
    }

    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        // SU(1,1) matrix product [[p,q],[conj q, conj p]].
        MoebiusMap {
            p: self.p * other.p + self.q * other.q.conj(),
            q: self.p * other.q + self.q * other.p.conj(),
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap {
            p: self.p.conj(),
            q: -self.q,
        }
    }
}

/// Image of a box of geodesics under a Möbius disk map. Disk maps preserve
/// orientation, so the image quadruple stays counterclockwise.
pub fn apply_moebius(m: &MoebiusMap, b: &GeodesicBox) -> GeodesicBox {
    GeodesicBox::from_points(
        m.apply_boundary(b.a),
        m.apply_boundary(b.b),
        m.apply_boundary(b.c),
        m.apply_boundary(b.d),
    )
    .expect("Möbius disk maps preserve counterclockwise order")
}

/// A monotone degree-1 circle homeomorphism sampled at `n` uniform angles,
/// stored through a strictly increasing lift with `lift(a + 2pi) = lift(a) + 2pi`.
///
/// Evaluation between samples is monotone linear interpolation of the lift;
/// accuracy is owned by whoever produced the samples.
#[derive(Debug, Clone)]
pub struct CircleMap {
    lift: Vec<f64>,
}

impl CircleMap {
    /// Build from lift values at the uniform angles `2pi k / n`, `k = 0..n`.
    pub fn from_lift(lift: Vec<f64>) -> Result<Self> {
        if lift.len() < 4 {
            return Err(Error::InvalidParameter(
                "circle map needs at least 4 samples".into(),
            ));
        }
        for w in lift.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter(format!(
                    "lift not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let n = lift.len();
        let span = lift[n - 1] - lift[0];
        if span >= TAU {
            return Err(Error::InvalidParameter(format!(
                "lift spans {span:.6} over one period; degree-1 requires span < 2pi"
            )));
        }
        Ok(Self { lift })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            lift: (0..n).map(|k| TAU * k as f64 / n as f64).collect(),
        }
    }

    /// Sample the boundary restriction of a Möbius disk map, unwrapping the
    /// argument into a monotone lift.
    pub fn from_moebius(m: &MoebiusMap, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter(
                "circle map needs at least 4 samples".into(),
            ));
        }
        let mut lift = Vec::with_capacity(n);
        let mut prev = 0.0f64;
        for k in 0..n {
            let alpha = TAU * k as f64 / n as f64;
            let beta = m.apply(Complex64::from_polar(1.0, alpha)).arg();
            let val = if k == 0 {
                beta.rem_euclid(TAU)
            } else {
                prev + (beta - prev).rem_euclid(TAU)
            };
            lift.push(val);
            prev = val;
        }
        Self::from_lift(lift)
    }

    pub fn samples(&self) -> usize {
        self.lift.len()
    }

    /// Evaluate the lift at an arbitrary angle (degree-1 extension).
    pub fn eval(&self, angle: f64) -> f64 {
        let n = self.lift.len();
        let winding = (angle / TAU).floor();
        let frac_angle = angle - winding * TAU;
        let pos = frac_angle / TAU * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let t = pos - k as f64;
        let lo = self.lift[k];
        let hi = if k + 1 < n {
            self.lift[k + 1]
        } else {
            self.lift[0] + TAU
        };
        lo + t * (hi - lo) + winding * TAU
    }

    pub fn apply_boundary(&self, pt: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::new(self.eval(pt.angle()))
    }
}

/// Pull-back Liouville measure `L(h)(B) = L(h(a), h(b), h(c), h(d))`.
///
/// For `h` the boundary restriction of a Möbius disk map this equals
/// `liouville_box(B)`. Image points that collide at the sampling
/// resolution are reported as a resolution error.
pub fn pullback_liouville(h: &CircleMap, b: &GeodesicBox) -> Result<f64> {
    let image = GeodesicBox::from_points(
        h.apply_boundary(b.a),
        h.apply_boundary(b.b),
        h.apply_boundary(b.c),
        h.apply_boundary(b.d),
    )
    .map_err(|e| Error::Resolution(format!("image quadruple degenerate: {e}")))?;
    Ok(liouville_box(&image))
}
