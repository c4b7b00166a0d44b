//! Empirical spectral distribution of one sparse sample against the
//! semicircle law, plus classical locations at a glance.
//!
//! Run: cargo run --release -p sparse-spectra --example semicircle_law

use sparse_spectra::ensemble::{self, EnsembleSpec};
use sparse_spectra::spectral::{eigenvalues_desc, gamma_sc, semicircle_cdf};
use sparse_spectra::stat_tests::ks_one_sample;

fn main() -> sparse_spectra::Result<()> {
    faer::set_global_parallelism(faer::Par::Seq);

    let spec = EnsembleSpec::sparse_er(1000, 0.05, 1);
    let h = ensemble::sample_h(&spec, 0)?;
    let evals = eigenvalues_desc(&h)?;
    let ks = ks_one_sample(&evals, semicircle_cdf)?;

    println!("sparse-er sample: N = {}, p = 0.05, q = {:.2}", spec.n, spec.q());
    println!("KS(ESD of H, semicircle cdf) = {ks:.4}");
    println!();
    println!("rigidity at a glance (lambda_k vs classical location gamma_k):");
    println!("{:>6}  {:>10}  {:>10}  {:>10}", "k", "lambda_k", "gamma_k", "residual");
    for k in [1usize, 10, 100, 250, 500, 750, 900, 990, 1000] {
        let gamma = gamma_sc(k, spec.n)?;
        let lambda = evals[k - 1];
        println!("{k:>6}  {lambda:>10.5}  {gamma:>10.5}  {:>10.2e}", lambda - gamma);
    }
    Ok(())
}
