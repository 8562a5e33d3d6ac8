//! Browser bindings for the conflict-resolution solver.
//!
//! Every export takes and returns strings so the page can stay plain
//! JavaScript. Instances travel as the same JSON that `deconflict generate`
//! writes.

use deconflict_core::geometry::all_pair_params;
use deconflict_core::instance::{instance_from_str, instance_to_string};
use deconflict_core::plot::plot_svg;
use deconflict_core::terms::compute_bigm;
use deconflict_core::{gen_cp, gen_rcp, is_feasible, solve, CpConfig, HeadingVector, RcpConfig, SolverConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

type Res<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn generate_impl(family: &str, n: usize, seed: u64) -> Res<String> {
    let inst = match family {
        "cp" => gen_cp(&CpConfig::with_n(n)),
        "rcp" => gen_rcp(&RcpConfig::new(n, seed)),
        other => return Err(format!("unknown family `{other}`")),
    }
    .map_err(err)?;
    Ok(instance_to_string(&inst))
}

fn plot_impl(instance: &str, theta: &[f64]) -> Res<String> {
    let inst = instance_from_str(instance).map_err(err)?;
    let theta = if theta.is_empty() {
        inst.zero_heading()
    } else {
        HeadingVector(theta.to_vec())
    };
    plot_svg(&inst, &theta).map_err(err)
}

fn solve_impl(instance: &str, time_limit_s: f64) -> Res<String> {
    let inst = instance_from_str(instance).map_err(err)?;
    let cfg = SolverConfig {
        time_limit_s,
        ..SolverConfig::default()
    };
    let res = solve(&inst, &cfg).map_err(err)?;
    let svg = match &res.theta {
        Some(theta) => Some(plot_svg(&inst, theta).map_err(err)?),
        None => None,
    };
    Ok(json!({
        "status": res.status.as_str(),
        "primal": res.primal,
        "dual": res.dual,
        "gap": res.gap,
        "nodes": res.nodes,
        "time_s": res.time_s,
        "theta": res.theta.as_ref().map(|t| t.0.clone()),
        "svg": svg,
    })
    .to_string())
}

fn bigm_impl(instance: &str, theta: &[f64]) -> Res<String> {
    let inst = instance_from_str(instance).map_err(err)?;
    let theta = if theta.is_empty() {
        inst.zero_heading()
    } else {
        HeadingVector(theta.to_vec())
    };
    let report = is_feasible(&inst, &theta).map_err(err)?;
    let rows: Vec<_> = all_pair_params(&inst)
        .iter()
        .map(|pg| {
            let b = compute_bigm(pg, &inst);
            let violation = report.violations.iter().find(|v| v.i == pg.i && v.j == pg.j);
            json!({
                "i": pg.i + 1,
                "j": pg.j + 1,
                "m": b.m,
                "m_minus": b.m_minus,
                "m_plus": b.m_plus,
                "conflict": violation.is_some(),
                "miss": violation.map(|v| v.miss_distance),
            })
        })
        .collect();
    Ok(json!({ "feasible": report.feasible, "pairs": rows }).to_string())
}

/// Instance JSON for a circle (`"cp"`) or perturbed circle (`"rcp"`) problem.
#[wasm_bindgen]
pub fn generate(family: &str, n: usize, seed: u32) -> Result<String, JsError> {
    generate_impl(family, n, u64::from(seed)).map_err(|e| JsError::new(&e))
}

/// SVG of the trajectories under `theta`; an empty slice means no deviation.
#[wasm_bindgen]
pub fn plot(instance: &str, theta: &[f64]) -> Result<String, JsError> {
    plot_impl(instance, theta).map_err(|e| JsError::new(&e))
}

/// Run the global solver and return its result, with a drawing, as JSON.
#[wasm_bindgen(js_name = solveInstance)]
pub fn solve_instance(instance: &str, time_limit_s: f64) -> Result<String, JsError> {
    solve_impl(instance, time_limit_s).map_err(|e| JsError::new(&e))
}

/// Per-pair BigM constants and the conflict status at `theta`, as JSON.
#[wasm_bindgen(js_name = pairTable)]
pub fn pair_table(instance: &str, theta: &[f64]) -> Result<String, JsError> {
    bigm_impl(instance, theta).map_err(|e| JsError::new(&e))
}
