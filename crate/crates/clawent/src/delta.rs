//! Oscillation maps of the flux derivative and their inverses.
//!
//! `delta` takes the infimum of the absolute difference quotient of `f'` over
//! same-sign pairs at separation at least `s`, scaled by `s`; `delta_hat`
//! admits opposite-sign pairs as well. Both are strictly increasing with
//! nondecreasing `map(s)/s`, which makes them invertible by bisection.
//!
//! Same-sign pairs in `[-M, M]` separate by at most `M`, so on `(M, 2M]` the
//! plain map is continued linearly from its value at `M` (the infimum is kept
//! at the maximal feasible separation). Single-term fluxes `c u^(m+1)` use
//! the closed forms attained at extremal pairs; general fluxes fall back to a
//! dense grid with golden-section refinement.

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::util::golden_min;

fn check_s(flux: &FluxModel, s: f64) -> Result<()> {
    if !(s > 0.0) || s > 2.0 * flux.bound() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "separation {s} outside (0, {}]",
            2.0 * flux.bound()
        )));
    }
    Ok(())
}

/// Smallest same-sign difference quotient of `f'` at separation `>= s`,
/// scanned over one sign side `[0, side * M]` on a grid with refinement.
fn min_quotient_same_sign(flux: &FluxModel, s: f64, side: f64) -> f64 {
    let m_bound = flux.bound();
    debug_assert!(s <= m_bound);
    let q = |u: f64, g: f64| ((flux.f1(u + side * g) - flux.f1(u)) / (side * g)).abs();
    let n_g = 160;
    let n_u = 160;
    let mut best = f64::INFINITY;
    let mut arg = (0.0f64, s);
    for i in 0..=n_g {
        let g = s + (m_bound - s) * i as f64 / n_g as f64;
        let u_max = m_bound - g;
        for j in 0..=n_u {
            let u = side * u_max * j as f64 / n_u as f64;
            let v = q(u, g);
            if v < best {
                best = v;
                arg = (u, g);
            }
        }
    }
    // Alternate one-dimensional refinements around the grid minimum.
    let (mut u, mut g) = arg;
    for _ in 0..3 {
        let gw = (m_bound - s) / n_g as f64;
        let (glo, ghi) = ((g - gw).max(s), (g + gw).min(m_bound));
        if ghi > glo {
            g = golden_min(|gg| q(u, gg), glo, ghi, 1e-13 * m_bound);
        }
        let u_max = m_bound - g;
        let uw = u_max / n_u as f64;
        let (ulo, uhi) = if side > 0.0 {
            ((u - uw).max(0.0), (u + uw).min(u_max))
        } else {
            ((u - uw).max(-u_max), (u + uw).min(0.0))
        };
        if uhi > ulo {
            u = golden_min(|uu| q(uu, g), ulo, uhi, 1e-13 * m_bound);
        }
        best = best.min(q(u, g));
    }
    best
}

/// The same-sign oscillation map `delta(s)`.
///
/// Strictly positive on the domain `(0, 2M]`; returns a `Domain` error
/// outside it. Single-term fluxes evaluate in closed form (`s^m` scaled by
/// the leading coefficient); other fluxes use grid minimization.
pub fn delta(flux: &FluxModel, s: f64) -> Result<f64> {
    check_s(flux, s)?;
    let m_bound = flux.bound();
    if let Some(c) = flux.single_term_coeff() {
        let m = flux.degeneracy() as f64;
        let a = c.abs() * (m + 1.0);
        // Infimum attained at the pair (0, s); beyond separation M continue
        // linearly from the value at M.
        if s <= m_bound {
            return Ok(a * s.powf(m));
        }
        return Ok(s * a * m_bound.powf(m - 1.0));
    }
    let cap = s.min(m_bound);
    let q = min_quotient_same_sign(flux, cap, 1.0).min(min_quotient_same_sign(flux, cap, -1.0));
    Ok(s * q)
}

/// The all-pairs oscillation map `delta_hat(s)`, defined for the convex kinds.
///
/// Returns a `Kind` error for the inflection kind (opposite-sign quotients
/// vanish there) and a `Domain` error for `s` outside `(0, 2M]`.
pub fn delta_hat(flux: &FluxModel, s: f64) -> Result<f64> {
    if !flux.kind().is_convex() {
        return Err(Error::Kind(
            "delta_hat is defined for the convex kinds only".into(),
        ));
    }
    check_s(flux, s)?;
    let m_bound = flux.bound();
    if let Some(c) = flux.single_term_coeff() {
        // Odd f' here (m odd): the infimum over v - u = s sits at the
        // symmetric pair (-s/2, s/2), giving (s/2)^(m-1) for the quotient.
        let m = flux.degeneracy() as f64;
        let a = c.abs() * (m + 1.0);
        return Ok(a * s.powf(m) / 2.0f64.powf(m - 1.0));
    }
    // Opposite-sign scan: u in [-M, M - g], separation g in [s, 2M].
    let q = |u: f64, g: f64| ((flux.f1(u + g) - flux.f1(u)) / g).abs();
    let n = 200;
    let mut best = f64::INFINITY;
    let mut arg = (-s / 2.0, s);
    for i in 0..=n {
        let g = s + (2.0 * m_bound - s) * i as f64 / n as f64;
        for j in 0..=n {
            let u = -m_bound + (2.0 * m_bound - g) * j as f64 / n as f64;
            let v = q(u, g);
            if v < best {
                best = v;
                arg = (u, g);
            }
        }
    }
    let (mut u, mut g) = arg;
    for _ in 0..3 {
        let gw = (2.0 * m_bound - s) / n as f64;
        let (glo, ghi) = ((g - gw).max(s), (g + gw).min(2.0 * m_bound));
        if ghi > glo {
            g = golden_min(|gg| q(u, gg), glo, ghi, 1e-13 * m_bound);
        }
        let uw = (2.0 * m_bound - g) / n as f64;
        let (ulo, uhi) = ((u - uw).max(-m_bound), (u + uw).min(m_bound - g));
        if uhi > ulo {
            u = golden_min(|uu| q(uu, g), ulo, uhi, 1e-13 * m_bound);
        }
        best = best.min(q(u, g));
    }
    Ok(s * best)
}

/// Inverts `delta` (or `delta_hat` when `hatted`) by bisection on the
/// monotone map over `(0, 2M]`.
///
/// Returns a `Range` error when `y` exceeds the map's value at `2M` or is
/// not positive.
pub fn delta_inverse(flux: &FluxModel, y: f64, hatted: bool) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Range(format!("target {y} must be positive")));
    }
    let eval = |s: f64| -> Result<f64> {
        if hatted {
            delta_hat(flux, s)
        } else {
            delta(flux, s)
        }
    };
    let m_bound = flux.bound();
    if let Some(c) = flux.single_term_coeff() {
        let m = flux.degeneracy() as f64;
        let a = c.abs() * (m + 1.0);
        let scale = if hatted { a / 2.0f64.powf(m - 1.0) } else { a };
        let s_pow = (y / scale).powf(1.0 / m);
        let s = if !hatted && s_pow > m_bound {
            // Linear continuation beyond separation M.
            y / (a * m_bound.powf(m - 1.0))
        } else {
            s_pow
        };
        if s > 2.0 * m_bound * (1.0 + 1e-12) {
            return Err(Error::Range(format!(
                "target {y} exceeds the map value at 2M"
            )));
        }
        return Ok(s.min(2.0 * m_bound));
    }
    let top = eval(2.0 * m_bound)?;
    if y > top * (1.0 + 1e-12) {
        return Err(Error::Range(format!("target {y} exceeds {top} at s = 2M")));
    }
    let mut lo = 0.0f64;
    let mut hi = 2.0 * m_bound;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Enforced at call sites that rely on the comparable-maps property: the
/// convex kinds satisfy `delta(s/2) <= delta_hat(s) <= delta(s)`.
pub fn comparability_holds(flux: &FluxModel, s: f64, tol: f64) -> Result<bool> {
    if !flux.kind().is_convex() {
        return Err(Error::Kind("comparability concerns the convex kinds".into()));
    }
    let d_half = delta(flux, 0.5 * s)?;
    let d_hat = delta_hat(flux, s)?;
    let d = delta(flux, s)?;
    Ok(d_half <= d_hat + tol && d_hat <= d + tol)
}
