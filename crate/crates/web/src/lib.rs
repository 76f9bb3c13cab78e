//! Browser bindings: evaluate a single bound, tabulate the comparison curves,
//! and simulate the extremal sum.

use tailbound::bounds::{be, bh, ca, en, pin, pu};
use tailbound::distributions::BoundParams;
use tailbound::oracle::{extremal_sum_spec, mc_tail};
use wasm_bindgen::prelude::*;

/// Columns per row of [`compare`]: x, BH, PU, Be, Pin, Ca, EN.
pub const COMPARE_COLUMNS: usize = 7;

fn params(sigma: f64, y: f64, eps: f64) -> Result<BoundParams, String> {
    BoundParams::new(sigma, y, eps).map_err(|e| e.to_string())
}

pub fn evaluate_bound(bound: &str, sigma: f64, y: f64, eps: f64, x: f64) -> Result<f64, String> {
    let p = params(sigma, y, eps)?;
    let v = match bound {
        "bh" => bh(sigma, y, x).map(|r| r.value),
        "pu" => pu(&p, x).map(|r| r.value),
        "be" => be(&p, x).map(|r| r.value),
        "pin" => pin(&p, x).map(|r| r.value),
        "ca" => Ok(ca(sigma, x)),
        "en" => Ok(en(sigma, x)),
        other => return Err(format!("unknown bound '{other}'")),
    };
    v.map_err(|e| e.to_string())
}

/// Row-major table of [`COMPARE_COLUMNS`] values at `x = x_max * i / points`, `i = 1..=points`.
pub fn compare_table(
    sigma: f64,
    y: f64,
    eps: f64,
    x_max: f64,
    points: u32,
) -> Result<Vec<f64>, String> {
    let p = params(sigma, y, eps)?;
    if x_max.is_nan() || x_max <= 0.0 || points == 0 || points > 2000 {
        return Err("need x_max > 0 and 1 to 2000 points".into());
    }
    let mut out = Vec::with_capacity(points as usize * COMPARE_COLUMNS);
    for i in 1..=points {
        let x = x_max * i as f64 / points as f64;
        let row = (|| -> tailbound::Result<[f64; COMPARE_COLUMNS]> {
            Ok([
                x,
                bh(sigma, y, x)?.value,
                pu(&p, x)?.value,
                be(&p, x)?.value,
                pin(&p, x)?.value,
                ca(sigma, x),
                en(sigma, x),
            ])
        })()
        .map_err(|e| e.to_string())?;
        out.extend_from_slice(&row);
    }
    Ok(out)
}

/// `[p_hat, stderr, Pin(x)]` for the extremal sum with `2m` summands.
pub fn extremal_estimate(
    sigma: f64,
    y: f64,
    eps: f64,
    m: u32,
    x: f64,
    samples: u32,
    seed: u32,
) -> Result<Vec<f64>, String> {
    let p = params(sigma, y, eps)?;
    let run = || -> tailbound::Result<Vec<f64>> {
        let spec = extremal_sum_spec(&p, m as usize)?;
        let est = mc_tail(&spec, x, samples as u64, seed as u64)?;
        Ok(vec![est.p_hat, est.stderr, pin(&p, x)?.value])
    };
    run().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn evaluate(bound: &str, sigma: f64, y: f64, eps: f64, x: f64) -> Result<f64, JsError> {
    evaluate_bound(bound, sigma, y, eps, x).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare(sigma: f64, y: f64, eps: f64, x_max: f64, points: u32) -> Result<Vec<f64>, JsError> {
    compare_table(sigma, y, eps, x_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn extremal(
    sigma: f64,
    y: f64,
    eps: f64,
    m: u32,
    x: f64,
    samples: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    extremal_estimate(sigma, y, eps, m, x, samples, seed).map_err(|e| JsError::new(&e))
}
