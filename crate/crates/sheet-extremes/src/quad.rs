//! Adaptive quadrature for the entropy integral of the generic bound.
//!
//! The integrand behaves like `u^{-q}` with `q < 1` near zero (covering
//! numbers blow up as the radius shrinks), so the interval is split into
//! dyadic panels accumulating toward 0; each panel is smooth and handled
//! by adaptive Simpson, and the leftover mass below the last panel is
//! bounded by geometric extrapolation of the panel sequence.

use crate::error::{Error, Result};

const MAX_PANELS: usize = 4000;
const MAX_DEPTH: u32 = 40;

/// Integrate `f` over (0, b] to the requested relative tolerance,
/// allowing an integrable power singularity at 0.
pub(crate) fn integrate_zero_singular<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParam {
            name: "integration bound",
            msg: format!("must be positive and finite, got {b}"),
        });
    }
    let mut total = 0.0f64;
    let mut hi = b;
    let mut prev_panel = f64::NAN;
    for _ in 0..MAX_PANELS {
        let lo = hi / 2.0;
        let panel = adaptive_simpson(&f, lo, hi, rel_tol / 8.0)?;
        if !panel.is_finite() {
            return Err(Error::QuadratureFailed(format!(
                "non-finite panel value over [{lo}, {hi}]"
            )));
        }
        total += panel;
        // geometric extrapolation of the remaining dyadic panels
        if prev_panel.is_finite() && prev_panel > 0.0 {
            let ratio = panel / prev_panel;
            if ratio < 0.999 {
                let remaining = panel * ratio / (1.0 - ratio);
                if remaining.abs() <= rel_tol * total.abs() {
                    return Ok(total + remaining);
                }
            }
        }
        if panel == 0.0 || lo < 1e-300 {
            return Ok(total);
        }
        prev_panel = panel;
        hi = lo;
    }
    Err(Error::QuadratureFailed(format!(
        "panel sequence did not converge after {MAX_PANELS} dyadic panels (b = {b})"
    )))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let scale = whole.abs().max(1e-300);
    simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 0)
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
    abs_tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * abs_tol {
        return Ok(left + right + err / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailed(format!(
            "adaptive refinement exceeded depth {MAX_DEPTH} on [{a}, {b}]"
        )));
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, abs_tol / 2.0, depth + 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, abs_tol / 2.0, depth + 1)?;
    Ok(l + r)
}
