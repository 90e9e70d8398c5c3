//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function has a plain-Rust twin returning
//! `conceptor_debias::Result`, so the numbers can be tested natively.

use conceptor_debias::seat::{evaluate, PermutationConfig, PermutationMethod};
use conceptor_debias::subspace::{filter_outliers, Projection};
use conceptor_debias::synthetic::{PlantedBias, PlantedBiasConfig};
use conceptor_debias::{
    and_op, compute_conceptor, negate, or_op, CollectionKind, Conceptor, DataMatrix, EmbeddingCollection, Error, Result,
};
use wasm_bindgen::prelude::*;

fn points_2d(flat: &[f64]) -> Result<DataMatrix> {
    if flat.len() < 2 || !flat.len().is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "expected x,y pairs, got {} numbers",
            flat.len()
        )));
    }
    let cols: Vec<&[f64]> = flat.chunks_exact(2).collect();
    DataMatrix::from_columns(&cols)
}

fn push_2x2(out: &mut Vec<f64>, c: &Conceptor) {
    let m = c.matrix();
    out.extend_from_slice(&[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]);
}

/// Conceptors of two 2D point clouds and their combinations, as five
/// row-major 2×2 matrices: A, B, A∧B, A∨B, ¬A.
pub fn boolean_ops(a: &[f64], b: &[f64], aperture: f64) -> Result<Vec<f64>> {
    let ca = compute_conceptor(&points_2d(a)?, aperture)?;
    let cb = compute_conceptor(&points_2d(b)?, aperture)?;
    let mut out = Vec::with_capacity(20);
    for c in [&ca, &cb, &and_op(&ca, &cb)?, &or_op(&ca, &cb)?, &negate(&ca)] {
        push_2x2(&mut out, c);
    }
    Ok(out)
}

/// Runs the percentile outlier filter on 2D points (one word each).
///
/// Returns `[x_lo, x_hi, y_lo, y_hi]` followed by `x, y, kept` per point, in
/// the filter's own (principal-axis) coordinates.
pub fn outlier_fences(points: &[f64], p: f64) -> Result<Vec<f64>> {
    let data = points_2d(points)?;
    let mut c = EmbeddingCollection::new(2, CollectionKind::Token);
    for j in 0..data.count() {
        c.push_f64(format!("w{j:04}"), &data.column(j))?;
    }
    let (_, report) = filter_outliers(&c, p, Projection::Pca2d)?;
    let mut out = Vec::with_capacity(4 + 3 * report.coordinates.len());
    match report.fences {
        Some([fx, fy]) => out.extend_from_slice(&[fx.lower, fx.upper, fy.lower, fy.upper]),
        None => out.extend_from_slice(&[f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY]),
    }
    for pt in &report.coordinates {
        let kept = report.kept.binary_search(&pt.word).is_ok();
        out.extend_from_slice(&[pt.x, pt.y, if kept { 1.0 } else { 0.0 }]);
    }
    Ok(out)
}

/// Plants a bias direction in synthetic 50-dimensional embeddings, builds the
/// bias conceptor from the gendered tokens and evaluates SEAT before and
/// after projecting with its negation.
///
/// Returns `[d_before, p_before, d_after, p_after]`.
pub fn planted_debias(aperture: f64, sentence_bias: f64, seed: u64) -> Result<Vec<f64>> {
    let planted = PlantedBias::generate(&PlantedBiasConfig {
        sentence_bias,
        seed,
        ..Default::default()
    })?;
    let c = compute_conceptor(&planted.tokens.to_data_matrix()?, aperture)?;
    let test = planted.test()?;
    let cfg = PermutationConfig {
        n_permutations: 2000,
        seed,
        method: PermutationMethod::Sampled,
        ..Default::default()
    };
    let before = evaluate(&test, &cfg)?;
    let after = evaluate(&test.project(&negate(&c))?, &cfg)?;
    Ok(vec![before.d, before.p_value, after.d, after.p_value])
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = booleanOps)]
pub fn boolean_ops_js(a: &[f64], b: &[f64], aperture: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(boolean_ops(a, b, aperture))
}

#[wasm_bindgen(js_name = outlierFences)]
pub fn outlier_fences_js(points: &[f64], p: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(outlier_fences(points, p))
}

#[wasm_bindgen(js_name = plantedDebias)]
pub fn planted_debias_js(aperture: f64, sentence_bias: f64, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(planted_debias(aperture, sentence_bias, seed as u64))
}
