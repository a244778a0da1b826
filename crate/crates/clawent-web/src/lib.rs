//! Browser bindings for the solver. Each export takes plain scalars and JSON
//! strings and returns a JSON string, so the page needs no generated glue
//! types beyond the module itself. The JSON-producing cores are ordinary
//! functions exercised by host-side tests; the `wasm_bindgen` wrappers only
//! translate errors into JavaScript exceptions.

use clawent::entropy::{entropy_scan, ExperimentConfig};
use clawent::flux::{FluxModel, FluxSpec};
use clawent::riemann::riemann;
use clawent::tracking::evolve;
use clawent::{Error, PiecewiseConstantFn, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_FRAMES: u32 = 400;
const FLUX_CURVE_POINTS: usize = 129;

fn flux_spec(spec: &str, m_bound: f64) -> Result<FluxSpec> {
    let t = spec.trim();
    let (name, m) = match t.split_once(':') {
        Some((n, order)) => {
            let m = order
                .parse()
                .map_err(|_| Error::Invalid(format!("flux order {order} is not an integer")))?;
            (n.to_string(), Some(m))
        }
        None => (t.to_string(), None),
    };
    Ok(FluxSpec::Named { name, m, m_bound })
}

fn named_flux(spec: &str, m_bound: f64) -> Result<FluxModel> {
    flux_spec(spec, m_bound)?.build()
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Invalid(format!("serializing output: {e}")))
}

#[derive(Serialize)]
struct FanView {
    left: f64,
    right: f64,
    m_bound: f64,
    speeds_sorted: bool,
    /// Worst shock admissibility slack; absent when the fan has no shock.
    admissibility_slack: Option<f64>,
    fan: clawent::riemann::WaveFan,
    /// Sampled graph of the flux on `[-M, M]` for the chord plot.
    flux_curve: Vec<(f64, f64)>,
}

fn fan_json(flux: &str, m_bound: f64, left: f64, right: f64, delta: f64) -> Result<String> {
    let flux = named_flux(flux, m_bound)?;
    let fan = riemann(&flux, left, right, delta)?;
    let slack = fan.shock_admissibility_slack(&flux, 64);
    let m = flux.bound();
    let flux_curve = (0..FLUX_CURVE_POINTS)
        .map(|i| {
            let u = -m + 2.0 * m * i as f64 / (FLUX_CURVE_POINTS - 1) as f64;
            (u, flux.f(u))
        })
        .collect();
    to_json(&FanView {
        left,
        right,
        m_bound: m,
        speeds_sorted: fan.speeds_sorted(),
        admissibility_slack: slack.is_finite().then_some(slack),
        fan,
        flux_curve,
    })
}

#[derive(Serialize)]
struct FrameView {
    t: f64,
    mass: f64,
    tv: f64,
    sup_norm: f64,
    profile: PiecewiseConstantFn,
}

#[derive(Serialize)]
struct FramesView {
    t_final: f64,
    delta: f64,
    frames: Vec<FrameView>,
}

fn frames_json(
    flux: &str,
    m_bound: f64,
    data_json: &str,
    t_final: f64,
    frames: u32,
    delta: f64,
) -> Result<String> {
    if !(1..=MAX_FRAMES).contains(&frames) {
        return Err(Error::Invalid(format!("frames = {frames} not in 1..={MAX_FRAMES}")));
    }
    let flux = named_flux(flux, m_bound)?;
    let u0: PiecewiseConstantFn = serde_json::from_str(data_json)
        .map_err(|e| Error::Invalid(format!("datum JSON: {e}")))?;
    let mut out = Vec::with_capacity(frames as usize + 1);
    for j in 0..=frames {
        let t = t_final * j as f64 / frames as f64;
        let profile = evolve(&flux, &u0, t, delta)?;
        out.push(FrameView {
            t,
            mass: profile.mass(),
            tv: profile.tv(),
            sup_norm: profile.sup_norm(),
            profile,
        });
    }
    to_json(&FramesView { t_final, delta, frames: out })
}

#[allow(clippy::too_many_arguments)]
fn curve_json(
    flux: &str,
    m_bound: f64,
    l_dom: f64,
    t_final: f64,
    eps_csv: &str,
    samples: u32,
    seed: u32,
    delta: f64,
) -> Result<String> {
    let spec = flux_spec(flux, m_bound)?;
    let resolved_m = spec.build()?.bound();
    let eps_grid = if eps_csv.trim().is_empty() {
        None
    } else {
        let grid = eps_csv
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Invalid(format!("radius {s} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Some(grid)
    };
    let config = ExperimentConfig {
        flux: spec,
        l_dom,
        m_bound: resolved_m,
        t_final,
        eps_grid,
        samples: samples as usize,
        seed: seed as u64,
        delta,
        out_csv: None,
        out_json: None,
    };
    to_json(&entropy_scan(&config)?)
}

fn js_err(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Solves a single Riemann problem and reports the wave fan together with a
/// sampled flux graph for the chord construction.
#[wasm_bindgen]
pub fn riemann_fan(
    flux: &str,
    m_bound: f64,
    left: f64,
    right: f64,
    delta: f64,
) -> std::result::Result<String, JsValue> {
    fan_json(flux, m_bound, left, right, delta).map_err(js_err)
}

/// Evolves a piecewise-constant datum and returns equally spaced time frames
/// with mass, variation, and sup-norm per frame.
#[wasm_bindgen]
pub fn evolve_frames(
    flux: &str,
    m_bound: f64,
    data_json: &str,
    t_final: f64,
    frames: u32,
    delta: f64,
) -> std::result::Result<String, JsValue> {
    frames_json(flux, m_bound, data_json, t_final, frames, delta).map_err(js_err)
}

/// Runs a small covering/packing scan over a radius grid and returns the
/// measured counts with the analytic bounds.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn entropy_curve(
    flux: &str,
    m_bound: f64,
    l_dom: f64,
    t_final: f64,
    eps_csv: &str,
    samples: u32,
    seed: u32,
    delta: f64,
) -> std::result::Result<String, JsValue> {
    curve_json(flux, m_bound, l_dom, t_final, eps_csv, samples, seed, delta).map_err(js_err)
}
