//! Deformation parameters and the affine maps they induce in natural
//! coordinates.
//!
//! A parameter lives in two charts at once: `s + ti` in the right
//! half-plane and `lambda` in the unit disk, exchanged by the involution
//! `A(z) = (-z + 1)/(z + 1)`. The affine representative acts on the
//! natural parameter `z = x + yi` as `f(z) = x/s - (t/s) y + yi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The involution exchanging the half-plane and disk charts: `A(1) = 0`,
/// `A(0) = 1`, `A(inf) = -1`, and `A(A(z)) = z`.
fn chart_involution(z: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - z) / (Complex64::new(1.0, 0.0) + z)
}

/// A deformation parameter holding both charts, kept mutually consistent.
///
/// JSON form is either chart: `{"lambda":[re,im]}` or
/// `{"half_plane":[s,t]}`; serialization emits the disk chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParameter {
    half_plane: [f64; 2],
    disk: [f64; 2],
}

impl Serialize for DeformationParameter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            lambda: [f64; 2],
        }
        Repr { lambda: self.disk }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DeformationParameter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields, untagged)]
        enum Repr {
            Disk { lambda: [f64; 2] },
            HalfPlane { half_plane: [f64; 2] },
        }
        match Repr::deserialize(d)? {
            Repr::Disk { lambda } => {
                DeformationParameter::from_disk(Complex64::new(lambda[0], lambda[1]))
            }
            Repr::HalfPlane { half_plane } => DeformationParameter::from_half_plane(
                Complex64::new(half_plane[0], half_plane[1]),
            ),
        }
        .map_err(D::Error::custom)
    }
}

impl DeformationParameter {
    pub fn from_half_plane(w: Complex64) -> Result<Self> {
        if !(w.re > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "half-plane parameter must have s > 0, got {w}"
            )));
        }
        let lambda = chart_involution(w);
        Ok(Self {
            half_plane: [w.re, w.im],
            disk: [lambda.re, lambda.im],
        })
    }

    pub fn from_disk(lambda: Complex64) -> Result<Self> {
        if lambda.norm() >= 1.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "disk parameter must satisfy |lambda| < 1, got {lambda}"
            )));
        }
        let w = chart_involution(lambda);
        Ok(Self {
            half_plane: [w.re, w.im],
            disk: [lambda.re, lambda.im],
        })
    }

    pub fn identity() -> Self {
        Self {
            half_plane: [1.0, 0.0],
            disk: [0.0, 0.0],
        }
    }

    pub fn s(&self) -> f64 {
        self.half_plane[0]
    }

    pub fn t(&self) -> f64 {
        self.half_plane[1]
    }

    pub fn half_plane(&self) -> Complex64 {
        Complex64::new(self.half_plane[0], self.half_plane[1])
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.disk[0], self.disk[1])
    }

    /// `s / (s^2 + t^2)`, the normalizer of the main convergence statement.
    pub fn normalizer(&self) -> f64 {
        let (s, t) = (self.s(), self.t());
        s / (s * s + t * t)
    }
}

/// Half-plane chart from the disk chart. Boundary inputs are rejected.
pub fn half_plane_from_disk(lambda: Complex64) -> Result<Complex64> {
    Ok(DeformationParameter::from_disk(lambda)?.half_plane())
}

/// Disk chart from the half-plane chart. Boundary inputs are rejected.
pub fn disk_from_half_plane(w: Complex64) -> Result<Complex64> {
    Ok(DeformationParameter::from_half_plane(w)?.lambda())
}

/// The rotation `B_theta(lambda) = -e^{-i theta} lambda`; sends
/// `lambda -> e^{i theta}` to `-1`.
pub fn rotate_parameter(theta: f64, lambda: Complex64) -> Complex64 {
    -Complex64::from_polar(1.0, -theta) * lambda
}

/// The affine representative `f_{s+ti}` acting on natural coordinates.
#[derive(Debug, Clone, Copy)]
pub struct AffineTeichMap {
    parameter: DeformationParameter,
}

impl AffineTeichMap {
    pub fn new(parameter: DeformationParameter) -> Self {
        Self { parameter }
    }

    pub fn parameter(&self) -> DeformationParameter {
        self.parameter
    }

    /// `f(z) = x/s - (t/s) y + yi`; preserves the imaginary part exactly.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let (s, t) = (self.parameter.s(), self.parameter.t());
        Complex64::new(z.re / s - (t / s) * z.im, z.im)
    }
}

pub fn apply_deformation(map: &AffineTeichMap, z: Complex64) -> Complex64 {
    map.apply(z)
}

/// Beltrami coefficient of `f_{s+ti}`: `(1 - (s+ti)) / (1 + (s+ti))`.
pub fn beltrami(w: Complex64) -> Result<Complex64> {
    if !(w.re > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beltrami requires s > 0, got {w}"
        )));
    }
    Ok(chart_involution(w))
}

/// Maximal dilatation `K(f_{s+ti})`, computed through the Beltrami modulus
/// `(1 + |mu|) / (1 - |mu|)`.
///
/// The equivalent radical quotient cancels catastrophically for large `s`,
/// so it is kept to the tests as an independent oracle.
pub fn dilatation(w: Complex64) -> Result<f64> {
    let mu = beltrami(w)?.norm();
    Ok((1.0 + mu) / (1.0 - mu))
}

/// The geodesic family `g_t(z) = x + ((1-t)/(1+t)) y i` for `0 <= t < 1`.
pub fn geodesic_map(t: f64, z: Complex64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "geodesic parameter must lie in [0,1), got {t}"
        )));
    }
    Ok(Complex64::new(z.re, (1.0 - t) / (1.0 + t) * z.im))
}

/// `K(g_t) = (1 + t) / (1 - t)`; the Beltrami coefficient of `g_t` is `t`.
pub fn geodesic_dilatation(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "geodesic parameter must lie in [0,1), got {t}"
        )));
    }
    Ok((1.0 + t) / (1.0 - t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chart_fixed_points() {
        // A(1) = 0 and the degenerate limit A(0) = 1.
        assert!((disk_from_half_plane(c(1.0, 0.0)).unwrap()).norm() < 1e-15);
        let near_zero = chart_involution(c(1e-12, 0.0));
        assert!((near_zero - c(1.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn lambda_minus_half_maps_to_three() {
        let w = half_plane_from_disk(c(-0.5, 0.0)).unwrap();
        assert!((w - c(3.0, 0.0)).norm() < 1e-14);
        // s |1 + lambda|^2 = 1 - |lambda|^2: here 3 * (1/4) = 3/4.
        let lambda = c(-0.5, 0.0);
        let lhs = w.re * (c(1.0, 0.0) + lambda).norm_sqr();
        assert!((lhs - (1.0 - lambda.norm_sqr())).abs() < 1e-14);
    }

    #[test]
    fn charts_are_mutually_inverse() {
        for &(re, im) in &[(0.3, 0.2), (-0.7, 0.1), (0.0, -0.9), (0.05, 0.0)] {
            let lambda = c(re, im);
            let w = half_plane_from_disk(lambda).unwrap();
            assert!(w.re > 0.0);
            let back = disk_from_half_plane(w).unwrap();
            assert!((back - lambda).norm() < 1e-12);
            // s in terms of lambda
            let s_id = (1.0 - lambda.norm_sqr()) / (c(1.0, 0.0) + lambda).norm_sqr();
            assert!((w.re - s_id).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_inputs_rejected() {
        assert!(half_plane_from_disk(c(1.0, 0.0)).is_err());
        assert!(disk_from_half_plane(c(0.0, 1.0)).is_err());
        assert!(disk_from_half_plane(c(-0.1, 0.0)).is_err());
    }

    #[test]
    fn rotate_parameter_cases() {
        let lambda = c(0.3, 0.4);
        assert!((rotate_parameter(0.0, lambda) + lambda).norm() < 1e-15);
        assert!((rotate_parameter(std::f64::consts::PI, lambda) - lambda).norm() < 1e-15);
        // theta = pi/2 on the imaginary radius: -e^{-i pi/2} (i r) = -r.
        let r = 0.6;
        let out = rotate_parameter(0.5 * std::f64::consts::PI, c(0.0, r));
        assert!((out - c(-r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn affine_map_examples() {
        let id = AffineTeichMap::new(DeformationParameter::identity());
        let z = c(0.4, -1.7);
        assert!((id.apply(z) - z).norm() < 1e-15);

        let f2 = AffineTeichMap::new(
            DeformationParameter::from_half_plane(c(2.0, 0.0)).unwrap(),
        );
        assert!((f2.apply(c(1.0, 1.0)) - c(0.5, 1.0)).norm() < 1e-15);

        let f11 = AffineTeichMap::new(
            DeformationParameter::from_half_plane(c(1.0, 1.0)).unwrap(),
        );
        assert!((f11.apply(c(1.0, 1.0)) - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn imaginary_part_preserved_exactly() {
        let f = AffineTeichMap::new(
            DeformationParameter::from_half_plane(c(17.25, -3.5)).unwrap(),
        );
        for &(re, im) in &[(0.1, 0.9), (-2.0, -0.3), (5.0, 0.0)] {
            assert_eq!(f.apply(c(re, im)).im, im);
        }
    }

    #[test]
    fn beltrami_values() {
        assert!(beltrami(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        let b = beltrami(c(3.0, 0.0)).unwrap();
        assert!((b - c(-0.5, 0.0)).norm() < 1e-15);
        // s -> 0 with t = 1 tends to -i in the algebra, but is rejected as input.
        assert!(beltrami(c(0.0, 1.0)).is_err());
        let near = beltrami(c(1e-9, 1.0)).unwrap();
        assert!((near - c(0.0, -1.0)).norm() < 1e-8);
    }

    #[test]
    fn dilatation_matches_radical_formula() {
        let radical = |s: f64, t: f64| {
            let plus = ((1.0 + s).powi(2) + t * t).sqrt();
            let minus = ((1.0 - s).powi(2) + t * t).sqrt();
            (plus + minus) / (plus - minus)
        };
        assert!((dilatation(c(1.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((dilatation(c(4.0, 0.0)).unwrap() - 4.0).abs() < 1e-12);
        let k = dilatation(c(3.0, 4.0)).unwrap();
        assert!((k - radical(3.0, 4.0)).abs() < 1e-10);
        // (4 sqrt2 + 2 sqrt5) / (4 sqrt2 - 2 sqrt5)
        let exact = (4.0 * 2f64.sqrt() + 2.0 * 5f64.sqrt())
            / (4.0 * 2f64.sqrt() - 2.0 * 5f64.sqrt());
        assert!((k - exact).abs() < 1e-10, "{k} vs {exact}");

        for &(s, t) in &[(0.5, 0.0), (2.0, 3.0), (10.0, -7.0), (0.1, 0.9)] {
            let k = dilatation(c(s, t)).unwrap();
            assert!(k >= 1.0);
            assert!((k - radical(s, t)).abs() < 1e-10, "s={s} t={t}");
        }
    }

    #[test]
    fn dilatation_asymptotic_normalization() {
        // K(f) * s/(s^2+t^2) -> 1; the correction decays like 1/(s^2+t^2),
        // so the 1% band needs s^2 + t^2 large, not just (s^2+t^2)/s.
        for &(s, t) in &[(200.0, 0.0), (2.0, 40.0), (300.0, 300.0), (0.05, 25.0)] {
            assert!((s * s + t * t) / s >= 200.0, "test point not in regime");
            assert!(s * s + t * t >= 120.0, "test point not in regime");
            let ratio = dilatation(c(s, t)).unwrap() * s / (s * s + t * t);
            assert!((0.99..=1.01).contains(&ratio), "ratio {ratio} at s={s},t={t}");
        }
        // Tangential-flavor counterexample to the bare (s^2+t^2)/s threshold:
        // at (0.1, 8) that quotient is 640 yet the ratio misses the band by
        // about 1/(s^2+t^2).
        let (s, t) = (0.1, 8.0);
        let ratio = dilatation(c(s, t)).unwrap() * s / (s * s + t * t);
        assert!(ratio > 1.01);
        assert!((ratio - 1.0 - 1.0 / (s * s + t * t)).abs() < 2e-3, "ratio {ratio}");
    }

    #[test]
    fn bridge_identity_along_lambda_to_minus_one() {
        // ((s^2+t^2)/s) / (2/(1-|lambda|)) -> 1 as lambda -> -1.
        for &r in &[0.99, 0.999, 0.9999] {
            let lambda = c(-r, 0.0);
            let w = half_plane_from_disk(lambda).unwrap();
            let lhs = (w.norm_sqr()) / w.re;
            let rhs = 2.0 / (1.0 - lambda.norm());
            assert!(
                (lhs / rhs - 1.0).abs() < 1.5 * (1.0 - r),
                "r={r}: {lhs} vs {rhs}"
            );
        }
        let lambda = c(-0.995, 0.004);
        let w = half_plane_from_disk(lambda).unwrap();
        let ratio = (w.norm_sqr() / w.re) / (2.0 / (1.0 - lambda.norm()));
        assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn parameter_json_accepts_either_chart() {
        let p: DeformationParameter =
            serde_json::from_str(r#"{"lambda":[-0.5,0.0]}"#).unwrap();
        assert!((p.half_plane() - c(3.0, 0.0)).norm() < 1e-14);
        let q: DeformationParameter =
            serde_json::from_str(r#"{"half_plane":[3.0,0.0]}"#).unwrap();
        assert!((q.lambda() - c(-0.5, 0.0)).norm() < 1e-14);
        assert_eq!(
            serde_json::to_string(&q).unwrap(),
            r#"{"lambda":[-0.5,0.0]}"#
        );
        assert!(serde_json::from_str::<DeformationParameter>(r#"{"lambda":[1.0,0.0]}"#).is_err());
    }

    #[test]
    fn geodesic_family() {
        let z = c(0.3, 0.8);
        assert!((geodesic_map(0.0, z).unwrap() - z).norm() < 1e-15);
        assert!((geodesic_dilatation(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((geodesic_dilatation(1.0 / 3.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((geodesic_dilatation(0.9).unwrap() - 19.0).abs() < 1e-12);
        assert!(geodesic_dilatation(1.0).is_err());

        // Beltrami coefficient of g_t equals t: mu = (1 - c)/(1 + c) with
        // c = (1-t)/(1+t).
        let t: f64 = 0.37;
        let shrink = (1.0 - t) / (1.0 + t);
        let mu = (1.0 - shrink) / (1.0 + shrink);
        assert!((mu - t).abs() < 1e-14);
        let gt = geodesic_map(t, z).unwrap();
        assert!((gt.im - shrink * z.im).abs() < 1e-15);
    }
}
