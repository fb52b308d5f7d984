//! Interacting particle run, with its deposited density compared to the
//! mollified grid solution.

use mot_core::diagnostics::l1_distance;
use mot_core::particles::{mollified_density, run_particles};
use mot_core::{fv, ForceMode, SimConfig};

fn main() -> mot_core::Result<()> {
    let mut config = SimConfig::new(0.15, 0.1, 0.5);
    config.n_particles = 2000;
    config.dt = 5e-3;
    config.force_mode = ForceMode::Regularized;
    let run = run_particles(&config)?;
    for r in &run.records {
        println!("t={:.2} m2={:.4} covariance_stat={:+.5}", r.time, r.m2, r.covariance_stat);
    }
    let grid = fv::run(&config)?.state.rho;
    let kde = mollified_density(&run.ensemble, config.grid, config.bandwidth)?;
    println!("L1(particles, grid) at t_end: {:.4}", l1_distance(&kde, &grid)?);
    Ok(())
}
