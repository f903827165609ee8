//! Adaptive quadrature used by the measure and norm computations.

use crate::error::{Error, Result};

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The budget counts interval subdivisions; when it runs out the best
/// estimate so far is returned inside [`Error::Accuracy`].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_simpson_budget(f, a, b, tol, 200_000)
}

pub fn adaptive_simpson_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut budget_left = budget;
    let mut exhausted = false;
    let value = simpson_rec(
        &f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        40,
        &mut budget_left,
        &mut exhausted,
    );
    if exhausted {
        Err(Error::Accuracy {
            best_estimate: value,
            error_estimate: tol,
        })
    } else {
        Ok(value)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    budget: &mut usize,
    exhausted: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *exhausted = true;
        }
        return left + right + delta / 15.0;
    }
    if *budget == 0 {
        *exhausted = true;
        return left + right + delta / 15.0;
    }
    *budget -= 1;
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget, exhausted)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget, exhausted)
}

/// Iterated adaptive Simpson over the rectangle `[ax,bx] x [ay,by]`.
///
/// The inner tolerance is apportioned so the combined error stays below
/// `tol`; budget exhaustion anywhere surfaces the best estimate.
pub fn adaptive_simpson_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    tol: f64,
) -> Result<f64> {
    let span = (bx - ax).abs().max(1e-300);
    let inner_tol = 0.25 * tol / span;
    let inner_failed = std::cell::Cell::new(false);
    let outer = adaptive_simpson_budget(
        |x| match adaptive_simpson_budget(|y| f(x, y), ay, by, inner_tol, 20_000) {
            Ok(v) => v,
            Err(Error::Accuracy { best_estimate, .. }) => {
                inner_failed.set(true);
                best_estimate
            }
            Err(_) => {
                inner_failed.set(true);
                f64::NAN
            }
        },
        ax,
        bx,
        0.5 * tol,
        200_000,
    );
    match outer {
        Ok(v) if !inner_failed.get() => Ok(v),
        Ok(v) => Err(Error::Accuracy {
            best_estimate: v,
            error_estimate: tol,
        }),
        Err(e) => Err(e),
    }
}
