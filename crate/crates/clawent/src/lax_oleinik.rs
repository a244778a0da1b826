//! Variational solution formula for convex fluxes, used as an independent
//! check on the front-tracking evolution.
//!
//! The value at (t, x) is recovered from the minimizer of
//! `y -> U0(y) + t f*((x - y)/t)` where `U0` is the primitive of the data
//! and `f*` the convex conjugate restricted to the working range. The
//! minimization scans a uniform grid of candidates and refines around the
//! best bracket.

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::pwc::PiecewiseConstantFn;
use crate::util::{bisect_increasing, golden_min};

fn inv_fprime(flux: &FluxModel, xi: f64) -> f64 {
    let m_bound = flux.bound();
    let xi = xi.clamp(flux.f1(-m_bound), flux.f1(m_bound));
    if let Some(c) = flux.single_term_coeff() {
        let a = c.abs() * (flux.degeneracy() + 1) as f64;
        let mag = (xi.abs() / a).powf(1.0 / flux.degeneracy() as f64);
        return xi.signum() * mag;
    }
    bisect_increasing(|u| flux.f1(u) - xi, -m_bound, m_bound, 1e-15 * m_bound)
}

/// Convex conjugate sup_{|u| <= M} (xi u - f(u)); the supremum sits at the
/// clamped preimage of xi under f'.
fn conjugate(flux: &FluxModel, xi: f64) -> f64 {
    let w = inv_fprime(flux, xi);
    xi * w - flux.f(w)
}

/// Pointwise entropy-solution value at (t, x) by candidate minimization.
pub fn lax_oleinik(flux: &FluxModel, u0: &PiecewiseConstantFn, t: f64, x: f64) -> Result<f64> {
    if !flux.kind().is_convex() {
        return Err(Error::Kind(
            "variational formula requires a convex flux".into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::Invalid("evaluation time must be positive".into()));
    }
    let reach = t * flux.fprime_max();
    let (lo, hi) = (x - reach, x + reach);
    if u0.is_zero() {
        return Ok(inv_fprime(flux, 0.0));
    }
    let prefix = u0.primitive_at_breakpoints();
    let objective = |y: f64| u0.primitive(&prefix, y) + t * conjugate(flux, (x - y) / t);

    let n: usize = 4000;
    let mut best_k: usize = 0;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let y = lo + (hi - lo) * k as f64 / n as f64;
        let g = objective(y);
        if g < best {
            best = g;
            best_k = k;
        }
    }
    let span = hi - lo;
    let bl = lo + span * best_k.saturating_sub(1) as f64 / n as f64;
    let bh = lo + span * (best_k + 1).min(n) as f64 / n as f64;
    let y_star = golden_min(objective, bl, bh, 1e-13 * span.max(1.0));
    Ok(inv_fprime(flux, (x - y_star) / t))
}
