//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each operation has a plain Rust form returning `Result<_, String>` so it
//! can be tested natively, plus a thin `wasm_bindgen` wrapper.

use lengyel_core::cycles::{self, CycleSearch};
use lengyel_core::integrate::{self, IntegratorConfig};
use lengyel_core::model::{self, RegionKind, DEFAULT_TOL_CURVE};
use lengyel_core::{Params, State};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Upper bound on the points returned for one orbit.
pub const MAX_ORBIT_POINTS: usize = 4000;

/// Region codes in the byte map returned by [`region_map`].
pub const REGION_CODES: [&str; 8] = [
    "InA",
    "InBNotA",
    "OnHminus",
    "OnHplus",
    "AtBautin",
    "InD",
    "UnstableOutsideD",
    "OnSapprox",
];

fn region_code(k: RegionKind) -> u8 {
    match k {
        RegionKind::InA => 0,
        RegionKind::InBNotA => 1,
        RegionKind::OnHminus => 2,
        RegionKind::OnHplus => 3,
        RegionKind::AtBautin => 4,
        RegionKind::InD => 5,
        RegionKind::UnstableOutsideD => 6,
        RegionKind::OnSapprox => 7,
    }
}

fn params(a: f64, b: f64) -> Result<Params, String> {
    Params::new(a, b).map_err(|e| e.to_string())
}

/// Orbit from `(x0, y0)` as JSON `{fate, t_end, points: [x0, y0, x1, y1, ...]}`,
/// thinned to at most [`MAX_ORBIT_POINTS`] points.
pub fn orbit_json(a: f64, b: f64, x0: f64, y0: f64, t_max: f64) -> Result<String, String> {
    let p = params(a, b)?;
    let cfg = IntegratorConfig {
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        max_time: t_max,
        ..Default::default()
    };
    let orbit = integrate::integrate(&p, State::new(x0, y0).map_err(|e| e.to_string())?, &cfg)
        .map_err(|e| e.to_string())?;
    let stride = orbit.samples.len().div_ceil(MAX_ORBIT_POINTS - 1).max(1);
    let mut points: Vec<f64> = orbit
        .samples
        .iter()
        .step_by(stride)
        .flat_map(|(_, s)| [s.x, s.y])
        .collect();
    if let Some((_, last)) = orbit.samples.last() {
        points.extend([last.x, last.y]);
    }
    let eq = model::equilibrium(&p);
    Ok(json!({
        "fate": orbit.fate,
        "t_end": orbit.t_end,
        "equilibrium": [eq.x, eq.y],
        "points": points,
    })
    .to_string())
}

/// Row-major `ny x nx` grid of region codes over `[a0, a1] x [b0, b1]`, row 0
/// at `b1`. Cells sample the centre; invalid parameters get code 255.
pub fn region_map(a0: f64, a1: f64, b0: f64, b1: f64, nx: usize, ny: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let b = b1 - (j as f64 + 0.5) / ny as f64 * (b1 - b0);
        for i in 0..nx {
            let a = a0 + (i as f64 + 0.5) / nx as f64 * (a1 - a0);
            let code = Params::new(a, b)
                .map(|p| region_code(model::region_membership(&p, DEFAULT_TOL_CURVE).kind))
                .unwrap_or(u8::MAX);
            out.push(code);
        }
    }
    out
}

/// Equilibrium type, region label with cycles counted, and the closed
/// orbits themselves as JSON.
pub fn cycles_json(a: f64, b: f64) -> Result<String, String> {
    let p = params(a, b)?;
    let eq = model::classify_equilibrium(&p);
    let found = cycles::detect_cycles(&p, &CycleSearch::default()).map_err(|e| e.to_string())?;
    let label = cycles::region_with_cycles(&p, DEFAULT_TOL_CURVE).map_err(|e| e.to_string())?;
    let orbits: Vec<serde_json::Value> = found
        .iter()
        .map(|c| {
            let stride = c.orbit.len().div_ceil(800).max(1);
            let pts: Vec<f64> = c.orbit.iter().step_by(stride).flat_map(|(_, s)| [s.x, s.y]).collect();
            json!({ "stability": c.stability, "period": c.period, "floquet": c.floquet, "points": pts })
        })
        .collect();
    Ok(json!({
        "equilibrium_kind": eq.kind,
        "region": label.kind,
        "b_hopf": label.b_h_at_a,
        "b_basin": label.b_a_at_a,
        "cycles": orbits,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn orbit(a: f64, b: f64, x0: f64, y0: f64, t_max: f64) -> Result<String, JsError> {
    orbit_json(a, b, x0, y0, t_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn regions(a0: f64, a1: f64, b0: f64, b1: f64, nx: usize, ny: usize) -> Vec<u8> {
    region_map(a0, a1, b0, b1, nx, ny)
}

#[wasm_bindgen]
pub fn cycles(a: f64, b: f64) -> Result<String, JsError> {
    cycles_json(a, b).map_err(|e| JsError::new(&e))
}
