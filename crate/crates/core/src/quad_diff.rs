//! Integrable holomorphic quadratic differentials on the disk, their natural
//! parameter, trajectory tracing, and phi-lengths.
//!
//! The v1 kinds carry a globally single-valued nonvanishing square root:
//! positive constants, and squares `psi^2` of complex polynomials that are
//! zero-free on the closed disk. This sidesteps prong singularities while
//! keeping the geometry non-trivial.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::disk::BoundaryPoint;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Dense polynomial with complex coefficients, constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Polynomial {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Complex64::new(0.0, 0.0));
        for (k, &c) in self.coeffs.iter().enumerate() {
            out.push(c / (k as f64 + 1.0));
        }
        Polynomial::new(out)
    }
}

/// Configuration shape for a differential: `{"kind":"constant","c":1.0}` or
/// `{"kind":"psi_squared","coeffs":[[re,im],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DifferentialSpec {
    Constant { c: f64 },
    PsiSquared { coeffs: Vec<[f64; 2]> },
}

enum Kind {
    /// `phi = c > 0`, square root `sqrt(c)`.
    Constant(f64),
    /// `phi = psi^2`, square root `psi` itself (single-valued branch).
    PsiSquared {
        psi: Polynomial,
        antiderivative: Polynomial,
    },
}

/// An integrable holomorphic quadratic differential with an evaluable
/// single-valued square root. Immutable and shareable.
pub struct QuadraticDifferential {
    kind: Kind,
    spec: DifferentialSpec,
    /// Radius bound of the natural-chart image, used for step budgets.
    chart_radius: f64,
}

impl QuadraticDifferential {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidDifferential(format!(
                "constant differential needs c > 0, got {c}"
            )));
        }
        Ok(Self {
            kind: Kind::Constant(c),
            spec: DifferentialSpec::Constant { c },
            chart_radius: c.sqrt(),
        })
    }

    /// `phi = psi^2` with `psi` given by its coefficients, constant term
    /// first. `psi` must be zero-free on the closed disk; this is checked
    /// numerically (boundary minimum modulus plus winding number).
    pub fn psi_squared(coeffs: Vec<Complex64>) -> Result<Self> {
        let psi = Polynomial::new(coeffs.clone());
        if psi.coeffs().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDifferential(
                "non-finite polynomial coefficient".into(),
            ));
        }
        let samples = 4096;
        let mut min_mod = f64::INFINITY;
        let mut winding = 0.0f64;
        let mut prev_arg = psi.eval(Complex64::new(1.0, 0.0)).arg();
        for k in 1..=samples {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / samples as f64);
            let v = psi.eval(z);
            min_mod = min_mod.min(v.norm());
            let arg = v.arg();
            let mut d = arg - prev_arg;
            while d > std::f64::consts::PI {
                d -= TAU;
            }
            while d < -std::f64::consts::PI {
                d += TAU;
            }
            winding += d;
            prev_arg = arg;
        }
        if min_mod < 1e-9 {
            return Err(Error::InvalidDifferential(format!(
                "psi vanishes on the boundary (min |psi| = {min_mod:.3e})"
            )));
        }
        let turns = winding / TAU;
        if turns.round().abs() > 0.1 || turns.abs() > 0.4 {
            return Err(Error::InvalidDifferential(format!(
                "psi has zeros inside the disk (winding {turns:.3})"
            )));
        }
        let antiderivative = psi.antiderivative();
        let chart_radius = (0..256)
            .map(|k| {
                antiderivative
                    .eval(Complex64::from_polar(1.0, TAU * k as f64 / 256.0))
                    .norm()
            })
            .fold(0.0f64, f64::max);
        let spec = DifferentialSpec::PsiSquared {
            coeffs: coeffs.iter().map(|c| [c.re, c.im]).collect(),
        };
        let q = Self {
            kind: Kind::PsiSquared {
                psi,
                antiderivative,
            },
            spec,
            chart_radius,
        };
        // Integrability is automatic for polynomials; confirm numerically.
        let norm = q.integrability_norm(1e-3)?;
        if !norm.is_finite() {
            return Err(Error::InvalidDifferential(
                "integrability norm is not finite".into(),
            ));
        }
        Ok(q)
    }

    pub fn from_spec(spec: &DifferentialSpec) -> Result<Self> {
        match spec {
            DifferentialSpec::Constant { c } => Self::constant(*c),
            DifferentialSpec::PsiSquared { coeffs } => Self::psi_squared(
                coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            ),
        }
    }

    pub fn spec(&self) -> &DifferentialSpec {
        &self.spec
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            Kind::Constant(c) => Complex64::new(*c, 0.0),
            Kind::PsiSquared { psi, .. } => {
                let v = psi.eval(z);
                v * v
            }
        }
    }

    /// The chosen continuous branch of `sqrt(phi)`, nonvanishing on the
    /// closed disk.
    pub fn sqrt_phi(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            Kind::Constant(c) => Complex64::new(c.sqrt(), 0.0),
            Kind::PsiSquared { psi, .. } => psi.eval(z),
        }
    }

    /// Natural parameter `z = int_0^zeta sqrt(phi)`; path independence is
    /// automatic since `sqrt(phi)` is single-valued and holomorphic.
    pub fn natural_parameter(&self, zeta: Complex64) -> Complex64 {
        match &self.kind {
            Kind::Constant(c) => c.sqrt() * zeta,
            Kind::PsiSquared { antiderivative, .. } => antiderivative.eval(zeta),
        }
    }

    /// Radius bound for the natural-chart image of the closed disk.
    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    /// `int_D |phi|` by adaptive quadrature in polar coordinates.
    pub fn integrability_norm(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {tol}"
            )));
        }
        let ring = |r: f64| -> f64 {
            // trapezoid on the periodic angle, refined until stable
            let mut n = 32usize;
            let mut prev = f64::INFINITY;
            loop {
                let mut sum = 0.0;
                for k in 0..n {
                    let theta = TAU * k as f64 / n as f64;
                    sum += self.phi(Complex64::from_polar(r, theta)).norm();
                }
                let val = sum * TAU / n as f64;
                if (val - prev).abs() < 0.1 * tol || n >= 4096 {
                    return val * r;
                }
                prev = val;
                n *= 2;
            }
        };
        adaptive_simpson(ring, 0.0, 1.0, 0.5 * tol)
    }
}

/// A traced trajectory: ordered samples through the disk, the rotation
/// angle, the two extrapolated boundary endpoints, and the accumulated
/// phi-length.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Complex64>,
    pub theta: f64,
    pub endpoints: [BoundaryPoint; 2],
    pub phi_length: f64,
    pub step: f64,
    pub shell: f64,
}

/// Default integration step in phi-length.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default boundary-stopping shell.
pub const DEFAULT_SHELL: f64 = 1e-4;

/// Trace the vertical trajectory of `e^{-i theta} phi` through `seed`.
///
/// The curve satisfies `e^{-i theta} phi dzeta^2 < 0`, realized by running
/// a fixed-step RK4 scheme on the unit-phi-speed field
/// `i e^{i theta/2} / sqrt(phi)` both ways from the seed, stopping once
/// `|zeta| >= 1 - shell`. Endpoints are extrapolated linearly to the circle.
/// For `theta = pi` the traced curves are the horizontal trajectories of
/// `phi`.
pub fn trace_trajectory(
    phi: &QuadraticDifferential,
    theta: f64,
    seed: Complex64,
    step: f64,
    shell: f64,
) -> Result<Trajectory> {
    if !(step > 0.0) || !(shell > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step and shell must be positive, got step={step}, shell={shell}"
        )));
    }
    if seed.norm() >= 1.0 - shell {
        return Err(Error::InvalidParameter(format!(
            "seed must satisfy |seed| < 1 - shell, got |seed| = {}",
            seed.norm()
        )));
    }
    let phase = Complex64::from_polar(1.0, 0.5 * theta) * Complex64::new(0.0, 1.0);
    let field = |z: Complex64| phase / phi.sqrt_phi(z);
    let budget = ((4.0 * phi.chart_radius() / step).ceil() as usize).max(64) + 16;

    let half = |dir: f64| -> Result<(Vec<Complex64>, f64, BoundaryPoint)> {
        let mut z = seed;
        let mut pts = Vec::new();
        let mut length = 0.0;
        for n in 0..=budget {
            if n == budget {
                return Err(Error::NonTerminatingTrajectory {
                    steps: budget,
                    seed_re: seed.re,
                    seed_im: seed.im,
                });
            }
            let h = dir * step;
            let k1 = field(z);
            let k2 = field(z + 0.5 * h * k1);
            let k3 = field(z + 0.5 * h * k2);
            let k4 = field(z + h * k3);
            let next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            pts.push(next);
            length += step;
            if next.norm() >= 1.0 - shell {
                let prev = z;
                let boundary = extend_to_circle(prev, next);
                length += phi.sqrt_phi(next).norm() * (boundary - next).norm();
                return Ok((pts, length, BoundaryPoint::from_point(boundary)));
            }
            z = next;
        }
        unreachable!()
    };

    let (fwd, len_fwd, end_fwd) = half(1.0)?;
    let (bwd, len_bwd, end_bwd) = half(-1.0)?;

    let mut samples: Vec<Complex64> = bwd.into_iter().rev().collect();
    samples.push(seed);
    samples.extend(fwd);

    Ok(Trajectory {
        samples,
        theta,
        endpoints: [end_bwd, end_fwd],
        phi_length: len_fwd + len_bwd,
        step,
        shell,
    })
}

/// Continue the ray from `prev` through `last` until it meets the unit
/// circle.
fn extend_to_circle(prev: Complex64, last: Complex64) -> Complex64 {
    let d = last - prev;
    let dn = d.norm_sqr();
    if dn == 0.0 {
        return last / last.norm();
    }
    // |last + t d|^2 = 1, smallest t >= 0
    let b = last.re * d.re + last.im * d.im;
    let c = last.norm_sqr() - 1.0;
    let disc = (b * b - dn * c).max(0.0).sqrt();
    let t = (-b + disc) / dn;
    last + t.max(0.0) * d
}
