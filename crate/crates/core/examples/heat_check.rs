//! Force-off grid run against the analytic heat kernel on two grids.

use mot_core::experiments::{heat_check, Preset};

fn main() -> mot_core::Result<()> {
    let config = Preset::HeatCheck.default_config();
    let r = heat_check(&config)?;
    for (n, err) in r.errors {
        println!("{n:>4}^2 cells: relative L2 error {err:.3e}");
    }
    println!("ratio {:.3}, {:.1}s, {}", r.ratio, r.seconds, if r.passed() { "pass" } else { "fail" });
    Ok(())
}
