//! Grid density next to a seed-averaged particle density, written as
//! snapshot files with a contour-plot script.

use mot_core::experiments::{Overrides, Plan, Preset};

fn main() -> mot_core::Result<()> {
    let mut plan = Plan::new(Preset::Contour);
    plan.apply(&Overrides {
        t_end: Some(0.5),
        n: Some(vec![1000]),
        seeds: Some(2),
        ..Default::default()
    })?;
    let out = std::env::temp_dir().join("mot-example-contour");
    for l in plan.execute(&out)?.summary {
        println!("{l}");
    }
    println!("python3 {}/plot_contour.py", out.display());
    Ok(())
}
