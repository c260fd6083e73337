//! Browser bindings. Each exported function wraps a plain Rust function of
//! the same shape so the numbers can be tested natively.

use fama::copula::{MvnSettings, Tolerance};
use fama::geometry::{CorrelationKernel, PortGrid};
use fama::marginals::LinkBudget;
use fama::metrics::{
    expected_max_heuristic, harmonic, outage_probability, outage_probability_asymptotic, RateThresholds, Scenario,
};
use fama::montecarlo::{estimate_expected_max, McConfig, PortVariable};
use wasm_bindgen::prelude::*;

/// Columns of each row returned by [`op_curve`].
pub const OP_COLUMNS: usize = 5;

fn grid(n1: usize, n2: usize, w1: f64, w2: f64, cylindrical: bool) -> fama::Result<PortGrid> {
    let kernel = if cylindrical {
        CorrelationKernel::Cylindrical
    } else {
        CorrelationKernel::Spherical
    };
    Ok(PortGrid::new(n1, n2, w1, w2)?.with_kernel(kernel))
}

/// Row-major `N x N` port correlation matrix.
pub fn heatmap(n1: usize, n2: usize, w1: f64, w2: f64, cylindrical: bool) -> fama::Result<Vec<f64>> {
    Ok(grid(n1, n2, w1, w2, cylindrical)?.correlation_matrix()?.entries().to_vec())
}

/// Outage probability against average SNR for TAS and the given grid.
/// Rows are `[snr_db, tas, tas_asymptotic, fama, fama_asymptotic]`.
#[allow(clippy::too_many_arguments)]
pub fn op_curve(
    n1: usize,
    n2: usize,
    w1: f64,
    w2: f64,
    snr_start_db: f64,
    snr_stop_db: f64,
    points: usize,
    inr_offset_db: f64,
    rate_bits: f64,
) -> fama::Result<Vec<f64>> {
    let fama_grid = PortGrid::new(n1, n2, w1, w2)?;
    let th = RateThresholds::new(rate_bits, rate_bits)?;
    let mvn = MvnSettings::new(Tolerance::adaptive(1e-4, 0.05, 1e-8), 0);
    let mut out = Vec::with_capacity(points * OP_COLUMNS);
    for i in 0..points {
        let snr = if points > 1 {
            snr_start_db + (snr_stop_db - snr_start_db) * i as f64 / (points - 1) as f64
        } else {
            snr_start_db
        };
        let b = LinkBudget::from_db(snr, snr + inr_offset_db)?;
        out.push(snr);
        for g in [PortGrid::fixed(), fama_grid] {
            let s = Scenario::symmetric(g, b)?.with_mvn(mvn);
            out.push(outage_probability(&s, &th)?.value);
            out.push(outage_probability_asymptotic(&s, &th)?.value);
        }
    }
    Ok(out)
}

/// `[heuristic, mc_mean, mc_stderr, harmonic_number]` for the maximum of
/// unit-mean exponential gains over the grid.
pub fn expected_max(n1: usize, n2: usize, w1: f64, w2: f64, trials: u64, seed: u64) -> fama::Result<Vec<f64>> {
    let r = PortGrid::new(n1, n2, w1, w2)?.correlation_matrix()?;
    let h = expected_max_heuristic(1.0, &r)?;
    let mc = estimate_expected_max(&r, PortVariable::Exponential { mean: 1.0 }, &McConfig::new(trials, seed))?;
    Ok(vec![h, mc.value, mc.stderr, harmonic(r.dim())])
}

fn js(e: fama::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = correlationHeatmap)]
pub fn correlation_heatmap(n1: usize, n2: usize, w1: f64, w2: f64, cylindrical: bool) -> Result<Vec<f64>, JsError> {
    heatmap(n1, n2, w1, w2, cylindrical).map_err(js)
}

#[wasm_bindgen(js_name = outageCurve)]
#[allow(clippy::too_many_arguments)]
pub fn outage_curve(
    n1: usize,
    n2: usize,
    w1: f64,
    w2: f64,
    snr_start_db: f64,
    snr_stop_db: f64,
    points: usize,
    inr_offset_db: f64,
    rate_bits: f64,
) -> Result<Vec<f64>, JsError> {
    op_curve(n1, n2, w1, w2, snr_start_db, snr_stop_db, points, inr_offset_db, rate_bits).map_err(js)
}

#[wasm_bindgen(js_name = expectedMax)]
pub fn expected_max_js(n1: usize, n2: usize, w1: f64, w2: f64, trials: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    expected_max(n1, n2, w1, w2, u64::from(trials), u64::from(seed)).map_err(js)
}
