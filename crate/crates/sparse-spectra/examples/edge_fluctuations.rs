//! Edge universality with the random centering: calibrate the
//! sample-dependent edge L + z on a stream of centered matrices, then
//! compare the rescaled second eigenvalue of the shifted sparse ensemble
//! against a fresh GOE stream's rescaled top eigenvalue.
//!
//! Run: cargo run --release -p sparse-spectra --example edge_fluctuations

use sparse_spectra::edge_stats::{edge_samples, estimate_edge, EdgeRef, EdgeStatistic};
use sparse_spectra::ensemble::{self, EnsembleSpec};
use sparse_spectra::stat_tests::{ks_threshold_two, ks_two_sample};

fn main() -> sparse_spectra::Result<()> {
    faer::set_global_parallelism(faer::Par::Seq);

    let spec = EnsembleSpec::sparse_er(150, 0.2, 3);
    println!("sparse-er: N = {}, p = 0.2, f = {:.2}", spec.n, spec.f());

    // calibration phase: samples 0..120 of the centered matrix H
    let mut h_stream = Vec::with_capacity(120);
    for idx in 0..120 {
        h_stream.push(ensemble::sample_h(&spec, idx)?);
    }
    let est = estimate_edge(h_stream)?;
    let (z_mean, z_se) = est.z_mean_se();
    println!("calibrated edge: L_det = {:.5}, z mean = {z_mean:.2e} ({:.2} SE)", est.l_det, z_mean.abs() / z_se);

    // measurement phase: fresh indices, lambda_2 of A centered by L + z
    let a_set = edge_samples(&spec, 120, 300, EdgeStatistic::ALambda2, EdgeRef::Estimate(&est))?;
    let goe = EnsembleSpec::goe(spec.n, 99);
    let goe_set = edge_samples(&goe, 0, 300, EdgeStatistic::GoeMu1, EdgeRef::Fixed(2.0))?;

    let ks = ks_two_sample(&center(&a_set.rescaled_edges), &center(&goe_set.rescaled_edges))?;
    println!();
    println!("two-sample KS({}, {}) = {ks:.4}", a_set.ensemble_tag, goe_set.ensemble_tag);
    println!("  (5% null threshold for these sizes: {:.4})", ks_threshold_two(300));

    // level repulsion on the GOE stream: the rescaled gap N^(2/3)(mu_1 - mu_2)
    // rarely drops below N^(-epsilon)
    let epsilon = 0.2;
    let cutoff = (spec.n as f64).powf(-epsilon);
    let close = goe_set.gaps.iter().filter(|&&g| g <= cutoff).count();
    println!();
    println!("GOE level repulsion: {} of {} rescaled gaps at or below N^(-{epsilon}) = {cutoff:.4}", close, goe_set.gaps.len());
    Ok(())
}

/// Remove the finite-size centering offset before comparing shapes.
fn center(xs: &[f64]) -> Vec<f64> {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| x - mean).collect()
}
