//! Shared oracles for the integration suites: brute-force evaluations that
//! deliberately avoid the library's closed forms.

#![allow(dead_code)]

use clawent::{FluxModel, PiecewiseConstantFn};

/// Oscillation of `f'` at separation `s` by exhaustive grid search: `s` times
/// the smallest absolute difference quotient over grid pairs at distance at
/// least `s`, restricted to same-sign pairs unless `hatted`.
pub fn brute_delta(flux: &FluxModel, s: f64, hatted: bool, n: usize) -> f64 {
    let m = flux.bound();
    let xs: Vec<f64> = (0..=n).map(|i| -m + 2.0 * m * i as f64 / n as f64).collect();
    let f1: Vec<f64> = xs.iter().map(|&u| flux.f1(u)).collect();
    let mut inf = f64::INFINITY;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let (u, v) = (xs[i], xs[j]);
            if v - u < s - 1e-12 {
                continue;
            }
            if !hatted && u < 0.0 && v > 0.0 {
                continue;
            }
            let q = (f1[j] - f1[i]).abs() / (v - u);
            if q < inf {
                inf = q;
            }
        }
    }
    s * inf
}

/// Closed-form entropy solution of Burgers' equation for box data of height
/// `h > 0` on `[a, b]`: a rarefaction ramp from `a`, a plateau, and a shock
/// from `b` that the ramp overtakes at `t = 2(b - a)/h`, after which the
/// profile is the decaying N-wave with conserved area `h (b - a)`.
pub fn burgers_box(h: f64, a: f64, b: f64, t: f64, x: f64) -> f64 {
    assert!(h > 0.0 && b > a);
    let area = h * (b - a);
    if t <= 0.0 {
        return if x >= a && x < b { h } else { 0.0 };
    }
    let merge = 2.0 * (b - a) / h;
    if x <= a {
        return 0.0;
    }
    if t <= merge {
        let ramp_head = a + h * t;
        let shock = b + 0.5 * h * t;
        if x < ramp_head {
            (x - a) / t
        } else if x < shock {
            h
        } else {
            0.0
        }
    } else {
        let shock = a + (2.0 * area * t).sqrt();
        if x < shock {
            (x - a) / t
        } else {
            0.0
        }
    }
}

/// L1 distance by midpoint quadrature over the union of breakpoints,
/// independent of the library's merge-scan distance.
pub fn l1_midpoint(f: &PiecewiseConstantFn, g: &PiecewiseConstantFn) -> f64 {
    let mut xs: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut acc = 0.0;
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        acc += (f.eval_right(mid) - g.eval_right(mid)).abs() * (w[1] - w[0]);
    }
    acc
}

/// The four flux shapes every batch criterion runs over.
pub fn flux_suite() -> Vec<(&'static str, FluxModel)> {
    vec![
        ("burgers", FluxModel::burgers(1.0).unwrap()),
        ("cubic", FluxModel::cubic(1.0).unwrap()),
        ("quartic", FluxModel::quartic(1.0).unwrap()),
        ("mixed_quartic", FluxModel::mixed_quartic(1.0).unwrap()),
    ]
}
