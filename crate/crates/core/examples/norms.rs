//! L2 and Linf histories for three diffusion coefficients.

use mot_core::experiments::{Overrides, Plan, Preset};

fn main() -> mot_core::Result<()> {
    let mut plan = Plan::new(Preset::Norms);
    plan.apply(&Overrides {
        t_end: Some(1.0),
        ..Default::default()
    })?;
    let out = std::env::temp_dir().join("mot-example-norms");
    let outcome = plan.execute(&out)?;
    outcome.summary.iter().for_each(|l| println!("{l}"));
    println!("files in {}", out.display());
    Ok(())
}
