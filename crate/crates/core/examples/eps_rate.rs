//! Mollified grid solutions along an eps ladder.

use mot_core::experiments::{eps_rate, Preset};

fn main() -> mot_core::Result<()> {
    let mut config = Preset::EpsRate.default_config();
    config.t_end = 0.5;
    let report = eps_rate(&config, &[0.4, 0.2, 0.1])?;
    for r in &report.rows {
        let half = r.l1_half.map_or("-".to_string(), |v| format!("{v:.5}"));
        println!("eps={:<5} L1(eps, eps/2)={half:<8} L1(eps, singular)={:.5}", r.eps, r.l1_singular);
    }
    println!("slope {:?}", report.slope);
    Ok(())
}
