//! Singular-force grid run with a diagnostics table.

use mot_core::{fv, SimConfig};

fn main() -> mot_core::Result<()> {
    let mut config = SimConfig::new(0.15, 0.1, 2.0);
    config.output_interval = 0.25;
    let run = fv::run(&config)?;
    println!("{:>6} {:>12} {:>10} {:>10} {:>10} {:>10}", "t", "mass", "l2", "linf", "m2", "sym");
    for r in &run.records {
        println!(
            "{:>6.2} {:>12.9} {:>10.5} {:>10.5} {:>10.5} {:>10.1e}",
            r.time,
            r.mass,
            r.l2,
            r.linf,
            r.m2,
            r.symmetry_defect.unwrap_or(f64::NAN)
        );
    }
    println!("{} steps, largest clipped fraction {:.1e}", run.state.step_count, run.state.clipped_max_rel);
    Ok(())
}
