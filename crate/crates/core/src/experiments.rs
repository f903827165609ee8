//! Convergence drivers tying the modules together: normalized-modulus
//! convergence along approach paths, the modulus-Liouville bridge on the
//! identity configuration, and the Liouville-measure asymptotics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::disk::{liouville_box, GeodesicBox};
use crate::error::{Error, Result};
use crate::lamination::lamination_mass;
use crate::modulus::{image_quadrilateral_rotated, quad_modulus};
use crate::quad_diff::QuadraticDifferential;
use crate::teich::DeformationParameter;

/// Families of approach paths to the boundary parameter, by half-plane
/// recipe. The schedule parameter is `s` for radial and ray paths and `t`
/// for horocyclic and tangential ones.
#[derive(Debug, Clone, PartialEq)]
pub enum PathKind {
    /// `t = 0`, the Teichmüller geodesic.
    Radial,
    /// `t = kappa s`.
    Ray { kappa: f64 },
    /// `s = s0` fixed.
    Horocyclic { s0: f64 },
    /// `s = 1/|t|`: leaves every horoball.
    Tangential,
}

/// An approach path with its increasing schedule of path parameters.
///
/// JSON shape: `{"kind":"radial","schedule":[...]}` with `kappa` required
/// for `ray` and `s0` for `horocyclic`; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachPath {
    pub kind: PathKind,
    pub schedule: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s0: Option<f64>,
    schedule: Vec<f64>,
}

impl Serialize for ApproachPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, kappa, s0) = match &self.kind {
            PathKind::Radial => ("radial", None, None),
            PathKind::Ray { kappa } => ("ray", Some(*kappa), None),
            PathKind::Horocyclic { s0 } => ("horocyclic", None, Some(*s0)),
            PathKind::Tangential => ("tangential", None, None),
        };
        PathRepr {
            kind: kind.into(),
            kappa,
            s0,
            schedule: self.schedule.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ApproachPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = PathRepr::deserialize(d)?;
        let kind = match (r.kind.as_str(), r.kappa, r.s0) {
            ("radial", None, None) => PathKind::Radial,
            ("ray", Some(kappa), None) => PathKind::Ray { kappa },
            ("horocyclic", None, Some(s0)) => PathKind::Horocyclic { s0 },
            ("tangential", None, None) => PathKind::Tangential,
            (k, _, _) => {
                return Err(D::Error::custom(format!(
                    "path kind '{k}' with mismatched parameters (kappa only for ray, s0 only for horocyclic)"
                )))
            }
        };
        Ok(ApproachPath {
            kind,
            schedule: r.schedule,
        })
    }
}

impl ApproachPath {
    pub fn new(kind: PathKind, schedule: Vec<f64>) -> Result<Self> {
        let path = Self { kind, schedule };
        path.points()?;
        Ok(path)
    }

    fn point(&self, param: f64) -> Result<DeformationParameter> {
        let (s, t) = match &self.kind {
            PathKind::Radial => (param, 0.0),
            PathKind::Ray { kappa } => (param, kappa * param),
            PathKind::Horocyclic { s0 } => (*s0, param),
            PathKind::Tangential => (1.0 / param.abs(), param),
        };
        DeformationParameter::from_half_plane(Complex64::new(s, t))
    }

    /// The scheduled parameters; `s > 0` everywhere and `s + |t|` strictly
    /// increasing.
    pub fn points(&self) -> Result<Vec<DeformationParameter>> {
        if self.schedule.is_empty() {
            return Err(Error::InvalidParameter("empty path schedule".into()));
        }
        let pts: Result<Vec<_>> = self.schedule.iter().map(|&p| self.point(p)).collect();
        let pts = pts?;
        for w in pts.windows(2) {
            let a = w[0].s() + w[0].t().abs();
            let b = w[1].s() + w[1].t().abs();
            if b <= a {
                return Err(Error::InvalidParameter(format!(
                    "s + |t| must strictly increase along the schedule ({a} then {b})"
                )));
            }
        }
        Ok(pts)
    }
}

/// One row of a convergence experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub parameter: DeformationParameter,
    pub raw_modulus: f64,
    pub normalizer: f64,
    pub normalized: f64,
    pub target: f64,
    pub residual: f64,
    /// `pi * raw_modulus - 2 log 4`, the bridge estimate of the pulled-back
    /// Liouville measure of the box.
    pub bridge_liouville: f64,
    /// Solver error estimate propagated from the modulus solve.
    pub solver_error: f64,
    /// Set when the solve failed; numeric fields are NaN then, never
    /// fabricated values.
    pub error: Option<String>,
}

impl ConvergenceRecord {
    pub const CSV_HEADER: &'static str =
        "s,t,lambda_re,lambda_im,raw_modulus,normalized,target,residual,bridge_liouville";

    pub fn csv_row(&self) -> String {
        let lambda = self.parameter.lambda();
        [
            self.parameter.s(),
            self.parameter.t(),
            lambda.re,
            lambda.im,
            self.raw_modulus,
            self.normalized,
            self.target,
            self.residual,
            self.bridge_liouville,
        ]
        .iter()
        .map(|v| format_sig(*v))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// 12 significant digits, deterministic.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.11e}")
    }
}

/// Knobs shared by the experiment drivers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Circle samples for the image quadrilateral boundary.
    pub n_boundary: usize,
    /// Transversal samples for the lamination target.
    pub n_samples: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            n_boundary: 1024,
            n_samples: 4096,
        }
    }
}

const BRIDGE_CONSTANT: f64 = 2.0 * 1.3862943611198906; // 2 log 4

fn record_for_point(
    phi: &QuadraticDifferential,
    chart_theta: f64,
    b: &GeodesicBox,
    grid: usize,
    opts: &ExperimentOptions,
    target: f64,
    param: DeformationParameter,
    asymptotics: bool,
) -> ConvergenceRecord {
    let solve = image_quadrilateral_rotated(phi, chart_theta, &param, b, opts.n_boundary)
        .and_then(|q| quad_modulus(&q, grid));
    match solve {
        Ok(r) => {
            let bridge = PI * r.value - BRIDGE_CONSTANT;
            let (normalizer, normalized) = if asymptotics {
                let n = (1.0 - param.lambda().norm()) / TAU;
                (n, n * bridge)
            } else {
                let n = param.normalizer();
                (n, n * r.value)
            };
            ConvergenceRecord {
                parameter: param,
                raw_modulus: r.value,
                normalizer,
                normalized,
                target,
                residual: (normalized - target).abs(),
                bridge_liouville: bridge,
                solver_error: r.error_estimate,
                error: None,
            }
        }
        Err(e) => ConvergenceRecord {
            parameter: param,
            raw_modulus: f64::NAN,
            normalizer: f64::NAN,
            normalized: f64::NAN,
            target,
            residual: f64::NAN,
            bridge_liouville: f64::NAN,
            solver_error: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// Normalized-modulus convergence toward the lamination mass: per schedule
/// point, the modulus of the deformed image of the box family, normalized
/// by `s/(s^2+t^2)`, against the mass of the box under the vertical
/// foliation of `-e^{-i theta} phi`.
///
/// Records with failed solves carry an error flag instead of values.
pub fn run_modulus_convergence(
    phi: &QuadraticDifferential,
    theta: f64,
    b: &GeodesicBox,
    path: &ApproachPath,
    grid: usize,
    opts: &ExperimentOptions,
) -> Result<Vec<ConvergenceRecord>> {
    let target = lamination_mass(phi, theta + PI, b, opts.n_samples)?.value;
    let points = path.points()?;
    Ok(points
        .into_par_iter()
        .map(|param| record_for_point(phi, theta, b, grid, opts, target, param, false))
        .collect())
}

/// Liouville-measure asymptotics: per schedule point, estimate the
/// pulled-back Liouville mass of the box through the bridge
/// `pi * mod - 2 log 4`, scale by `(1-|lambda|)/(2 pi)`, and compare to the
/// lamination mass of `e^{-i theta} phi`.
///
/// `theta` is the boundary angle approached by `lambda`; the deformation
/// acts in the chart of `-e^{-i theta} phi`, so the rotation passed down
/// is `theta + pi`.
pub fn run_liouville_asymptotics(
    phi: &QuadraticDifferential,
    theta: f64,
    b: &GeodesicBox,
    path: &ApproachPath,
    grid: usize,
    opts: &ExperimentOptions,
) -> Result<Vec<ConvergenceRecord>> {
    let target = lamination_mass(phi, theta, b, opts.n_samples)?.value;
    let points = path.points()?;
    Ok(points
        .into_par_iter()
        .map(|param| record_for_point(phi, theta + PI, b, grid, opts, target, param, true))
        .collect())
}

/// One row of the modulus-Liouville bridge run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BridgeRecord {
    pub liouville: f64,
    pub modulus: f64,
    pub defect: f64,
}

impl BridgeRecord {
    pub const CSV_HEADER: &'static str = "liouville,modulus,defect";

    pub fn csv_row(&self) -> String {
        [self.liouville, self.modulus, self.defect]
            .iter()
            .map(|v| format_sig(*v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Bridge defects `mod - L/pi - (2/pi) log 4` for the identity
/// configuration (unit disk, no deformation), over boxes of strictly
/// increasing Liouville measure.
///
/// The modulus is the duality-symmetrized value
/// `sqrt(mod(q) / mod(swapped q))`: the solver's arc-transition error
/// enters the two conjugate solves with opposite effect and largely
/// cancels, which matters once the free arcs span only a few cells.
pub fn run_bridge_defects(
    boxes: &[GeodesicBox],
    grid: usize,
    n_boundary: usize,
) -> Result<Vec<BridgeRecord>> {
    if boxes.is_empty() {
        return Err(Error::InvalidParameter("empty box family".into()));
    }
    let measures: Vec<f64> = boxes.iter().map(liouville_box).collect();
    for w in measures.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter(
                "boxes must have strictly increasing Liouville measure".into(),
            ));
        }
    }
    let phi = QuadraticDifferential::constant(1.0)?;
    let id = DeformationParameter::identity();
    boxes
        .par_iter()
        .zip(measures.par_iter())
        .map(|(b, &l)| {
            let q = image_quadrilateral_rotated(&phi, 0.0, &id, b, n_boundary)?;
            let primal = quad_modulus(&q, grid)?;
            let dual = quad_modulus(&q.swapped(), grid)?;
            let modulus = (primal.value / dual.value).sqrt();
            Ok(BridgeRecord {
                liouville: l,
                modulus,
                defect: modulus - l / PI - BRIDGE_CONSTANT / PI,
            })
        })
        .collect()
}

/// Least-squares slope of `ln residual` against `ln(s + |t|)`; negative
/// slopes certify a decreasing residual trend. Failed records are skipped;
/// exact zeros are floored to keep the logs finite.
pub fn log_residual_slope(records: &[ConvergenceRecord]) -> f64 {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.error.is_none() && r.residual.is_finite())
        .map(|r| {
            let x = (r.parameter.s() + r.parameter.t().abs()).ln();
            let y = r.residual.max(1e-300).ln();
            (x, y)
        })
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// The box whose geodesics straighten the horizontal chords
/// `y in [-half_width, half_width]` of the unit differential; its mass
/// under the horizontal foliation is `arcsin(half_width)`.
pub fn horizontal_chord_box(half_width: f64) -> Result<GeodesicBox> {
    if !(half_width > 0.0 && half_width < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "half width must lie in (0,1), got {half_width}"
        )));
    }
    let alpha = half_width.asin();
    GeodesicBox::new(-alpha, alpha, PI - alpha, PI + alpha)
}

/// Symmetric box `[-alpha, alpha] x [pi - alpha, pi + alpha]` with
/// prescribed Liouville measure `l`, using `L = -2 ln cos(alpha)`.
pub fn symmetric_box_with_measure(l: f64) -> Result<GeodesicBox> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "measure must be positive, got {l}"
        )));
    }
    let alpha = (-l / 2.0).exp().acos();
    GeodesicBox::new(-alpha, alpha, PI - alpha, PI + alpha)
}
