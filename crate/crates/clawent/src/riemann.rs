//! Riemann problems: admissible wave fans from envelope structure.
//!
//! For the convex kinds the fan is either a single chord shock (decreasing
//! jump) or a rarefaction (increasing jump). For the inflection kind, jumps
//! staying on one side of the origin reduce to the convex or concave rules,
//! while straddling jumps split at the tangency point where the chord from
//! the left state touches `f` on the opposite branch; the tangency is the
//! root of a monotone function and is found by bisection. Rarefactions are
//! chopped into small fronts on the global value lattice (integer multiples
//! of `delta`), each moving at its exact chord speed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{FluxKind, FluxModel};
use crate::util::bisect_increasing;

/// A single front of a fan: the jump from `left` to `right` traveling at
/// `speed`. Shocks are admissible discontinuities; rarefaction pieces are the
/// lattice-chopped approximation of a continuous fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Shock,
    RarefactionPiece,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Wave {
    pub kind: WaveKind,
    pub left: f64,
    pub right: f64,
    pub speed: f64,
}

/// Ordered solution of a Riemann problem: wave speeds nondecreasing from
/// left to right, states chaining from the left datum to the right datum.
#[derive(Debug, Clone, Default, Serialize)]
pub struct WaveFan {
    pub waves: Vec<Wave>,
}

impl WaveFan {
    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    /// Worst Oleinik admissibility slack over all shocks, probing
    /// `n_intermediate` interior states per shock. Admissible fans give a
    /// nonnegative value up to rounding; rarefaction pieces are exempt.
    pub fn shock_admissibility_slack(&self, flux: &FluxModel, n_intermediate: usize) -> f64 {
        let mut worst = f64::INFINITY;
        for w in &self.waves {
            if w.kind != WaveKind::Shock {
                continue;
            }
            let (ul, ur) = (w.left, w.right);
            for k in 1..=n_intermediate {
                let u = ul + (ur - ul) * k as f64 / (n_intermediate + 1) as f64;
                let sl = (flux.f(ul) - flux.f(u)) / (ul - u);
                let sr = (flux.f(ur) - flux.f(u)) / (ur - u);
                worst = worst.min(sl - sr);
            }
        }
        worst
    }

    /// True when speeds are nondecreasing left to right.
    pub fn speeds_sorted(&self) -> bool {
        self.waves.windows(2).all(|w| w[0].speed <= w[1].speed + 1e-12)
    }
}

fn chord_speed(flux: &FluxModel, a: f64, b: f64) -> f64 {
    (flux.f(b) - flux.f(a)) / (b - a)
}

/// Speed of a rarefaction piece. The chord quotient cancels catastrophically
/// on narrow pieces (a tangency landing next to a lattice state leaves a
/// sliver), so below a width floor the midpoint derivative stands in; the two
/// agree to second order in the width.
fn piece_speed(flux: &FluxModel, a: f64, b: f64) -> f64 {
    if (b - a).abs() < 1e-4 * flux.bound().max(1.0) {
        flux.f1(0.5 * (a + b))
    } else {
        chord_speed(flux, a, b)
    }
}

/// Lattice states strictly between `a` and `b` (multiples of `delta`), in
/// traversal order from `a` to `b`, with the endpoints attached. Lattice
/// points within a rounding guard of an endpoint are skipped: a sliver
/// piece would get a chord speed dominated by cancellation noise.
fn lattice_states(a: f64, b: f64, delta: f64) -> Vec<f64> {
    let guard = 1e-9 * delta;
    let mut states = vec![a];
    if b > a {
        let mut k = (a / delta).floor() + 1.0;
        while k * delta < b - guard {
            if k * delta > a + guard {
                states.push(k * delta);
            }
            k += 1.0;
        }
    } else {
        let mut k = (a / delta).ceil() - 1.0;
        while k * delta > b + guard {
            if k * delta < a - guard {
                states.push(k * delta);
            }
            k -= 1.0;
        }
    }
    states.push(b);
    states
}

fn push_rarefaction(fan: &mut WaveFan, flux: &FluxModel, a: f64, b: f64, delta: f64) {
    let states = lattice_states(a, b, delta);
    for pair in states.windows(2) {
        fan.waves.push(Wave {
            kind: WaveKind::RarefactionPiece,
            left: pair[0],
            right: pair[1],
            speed: piece_speed(flux, pair[0], pair[1]),
        });
    }
}

fn push_shock(fan: &mut WaveFan, flux: &FluxModel, a: f64, b: f64) {
    fan.waves.push(Wave {
        kind: WaveKind::Shock,
        left: a,
        right: b,
        speed: chord_speed(flux, a, b),
    });
}

/// Tangency state on the branch between `lo` and `hi` for the chord anchored
/// at `anchor`: the root of `f'(t) (anchor - t) - f(anchor) + f(t)`, which is
/// strictly monotone on a single-curvature branch.
fn tangency(flux: &FluxModel, anchor: f64, lo: f64, hi: f64) -> f64 {
    let g = |t: f64| flux.f1(t) * (anchor - t) - flux.f(anchor) + flux.f(t);
    let (glo, ghi) = (g(lo), g(hi));
    let tol = 1e-14 * flux.bound().max(1.0);
    if glo <= ghi {
        bisect_increasing(g, lo, hi, tol)
    } else {
        bisect_increasing(|t| -g(t), lo, hi, tol)
    }
}

/// Solves the Riemann problem with left state `uL` and right state `uR`.
///
/// Rarefactions are chopped at value resolution `delta` on the global
/// lattice, so fronts from restarted evolutions reproduce identically.
/// States must lie within the working bound `M`.
pub fn riemann(flux: &FluxModel, ul: f64, ur: f64, delta: f64) -> Result<WaveFan> {
    let m_bound = flux.bound();
    if ul.abs() > m_bound * (1.0 + 1e-12) || ur.abs() > m_bound * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "states ({ul}, {ur}) exceed the working bound {m_bound}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::Invalid("lattice resolution delta must be positive".into()));
    }
    let mut fan = WaveFan::default();
    if ul == ur {
        return Ok(fan);
    }
    match flux.kind() {
        FluxKind::Convex | FluxKind::ConvexDegenerate => {
            if ul < ur {
                push_rarefaction(&mut fan, flux, ul, ur, delta);
            } else {
                push_shock(&mut fan, flux, ul, ur);
            }
        }
        FluxKind::NonConvexInflection => {
            if flux.orientation() > 0.0 {
                solve_inflection(&mut fan, flux, ul, ur, delta);
            } else {
                // Mirror through u -> -u, x -> -x: solve for the reflected
                // flux with swapped, negated states and map the fan back.
                let refl = flux.reflected();
                let mut inner = WaveFan::default();
                solve_inflection(&mut inner, &refl, -ur, -ul, delta);
                for w in inner.waves.iter().rev() {
                    fan.waves.push(Wave {
                        kind: w.kind,
                        left: -w.right,
                        right: -w.left,
                        speed: -w.speed,
                    });
                }
            }
        }
    }
    debug_assert!(
        fan.speeds_sorted(),
        "unsorted fan for ({ul}, {ur}) at delta {delta}: {:?}",
        fan.waves
    );
    Ok(fan)
}

/// Inflection kind with the convex side on `u > 0` (`f'' u > 0` off the
/// origin, so `f' >= 0` with its minimum at the origin).
fn solve_inflection(fan: &mut WaveFan, flux: &FluxModel, ul: f64, ur: f64, delta: f64) {
    if ul >= 0.0 && ur >= 0.0 {
        // Convex branch rules.
        if ul < ur {
            push_rarefaction(fan, flux, ul, ur, delta);
        } else {
            push_shock(fan, flux, ul, ur);
        }
    } else if ul <= 0.0 && ur <= 0.0 {
        // Concave branch rules: decreasing jumps rarefy.
        if ul > ur {
            push_rarefaction(fan, flux, ul, ur, delta);
        } else {
            push_shock(fan, flux, ul, ur);
        }
    } else if ul > 0.0 {
        // ul > 0 > ur: chord from the left state touches f on the concave
        // branch; the sign of g at ur decides whether the tangency is inside.
        let g_ur = flux.f1(ur) * (ul - ur) - flux.f(ul) + flux.f(ur);
        if g_ur <= 0.0 {
            push_shock(fan, flux, ul, ur);
        } else {
            let t = tangency(flux, ul, ur, 0.0);
            push_shock(fan, flux, ul, t);
            push_rarefaction(fan, flux, t, ur, delta);
        }
    } else {
        // ul < 0 < ur: tangency on the convex branch.
        let h_ur = flux.f1(ur) * (ur - ul) - flux.f(ur) + flux.f(ul);
        if h_ur <= 0.0 {
            push_shock(fan, flux, ul, ur);
        } else {
            let t = tangency(flux, ul, 0.0, ur);
            push_shock(fan, flux, ul, t);
            push_rarefaction(fan, flux, t, ur, delta);
        }
    }
}
