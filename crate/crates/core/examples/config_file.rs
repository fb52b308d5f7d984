//! Parse a config, tweak it and print it back in file form.

use mot_core::{DriftMode, SimConfig};

const TEXT: &str = "
# cloud at moderate diffusion
D = 0.25
eps = 0.05
t_end = 2
n_particles = 4000
drift_mode = cell_list
";

fn main() -> mot_core::Result<()> {
    let mut c: SimConfig = TEXT.parse()?;
    assert_eq!(c.drift_mode, DriftMode::CellList);
    c.seed = 11;
    let text = c.to_config_string();
    print!("{text}");
    assert_eq!(text.parse::<SimConfig>()?, c);
    match "D = 0.1\nt_end = 1\n".parse::<SimConfig>() {
        Err(e) => println!("# rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
