//! Particles coupled to the nonlinear process through shared noise.

use mot_core::experiments::{coupling, Preset};

fn main() -> mot_core::Result<()> {
    let mut config = Preset::Coupling.default_config();
    config.t_end = 0.3;
    let report = coupling(&config, &[200, 800], &[0, 1, 2])?;
    for (n, g) in report.mean_terminal_gap() {
        println!("N={n:>4}: mean gap at t={} is {g:.5}", config.t_end);
    }
    let s = &report.series[0];
    for g in s.gaps.iter().step_by(2) {
        println!("  N={} t={:.2} mean {:.5} max {:.5}", s.n, g.time, g.mean, g.max);
    }
    Ok(())
}
