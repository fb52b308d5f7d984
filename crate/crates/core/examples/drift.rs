//! Particle drift: direct pair loop against the cell list.

use std::time::Instant;

use mot_core::ic::make_ic;
use mot_core::particles::DriftEvaluator;
use mot_core::{sample_particles_from_density, DriftMode, SimConfig};

fn main() -> mot_core::Result<()> {
    let config = SimConfig::new(0.15, 0.1, 1.0);
    let rho = make_ic(&config)?;
    for n in [500, 2000] {
        let e = sample_particles_from_density(&rho, n, 7)?;
        let mut out = Vec::new();
        for mode in [DriftMode::Direct, DriftMode::CellList] {
            let ev = DriftEvaluator::new(config.eps, mode, config.cutoff)?;
            let t = Instant::now();
            out.push(ev.drift(e.positions()));
            println!("N={n} {mode:?}: {:.1} ms", t.elapsed().as_secs_f64() * 1e3);
        }
        let diff = out[0]
            .iter()
            .zip(&out[1])
            .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
            .fold(0.0, f64::max);
        let sum = out[0].iter().fold([0.0, 0.0], |s, v| [s[0] + v[0], s[1] + v[1]]);
        println!("  max componentwise difference {diff:.2e}, direct drift sum ({:.1e}, {:.1e})", sum[0], sum[1]);
    }
    Ok(())
}
