//! Particle convergence in N against the mollified grid solution.
//! A reduced ladder; `mot n-rate` runs the full one.

use mot_core::experiments::{n_rate, Preset};

fn main() -> mot_core::Result<()> {
    let mut config = Preset::NRate.default_config();
    config.t_end = 0.2;
    let report = n_rate(&config, &[250, 1000], &[0, 1])?;
    for (n, w) in report.mean_w1_sliced() {
        println!("N={n:>5}: sliced W1 {w:.4}");
    }
    for (n, e) in report.covariance_error() {
        println!("N={n:>5}: RMS covariance_stat gap {e:.5}");
    }
    for r in &report.runs {
        println!("N={} seed={} coarse exact W1 {:.4}", r.n, r.seed, r.w1_exact_coarse);
    }
    Ok(())
}
