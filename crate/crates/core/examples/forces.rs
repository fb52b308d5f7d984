//! Singular and mollified forces of a Gaussian cloud and how well their
//! discrete divergence matches -4 rho.

use mot_core::forces::{divergence_defect, gaussian_mollify, regularized_force, singular_force};
use mot_core::ic::make_gaussian_ic;
use mot_core::Grid2D;

fn main() -> mot_core::Result<()> {
    let eps = 0.2;
    for n in [50, 100, 200] {
        let rho = make_gaussian_ic(Grid2D::symmetric(n, 2.5)?, 0.5, 1.0)?;
        let f = singular_force(&rho);
        let fe = regularized_force(&rho, eps)?;
        let smooth = gaussian_mollify(&rho, eps)?;
        let (fx, fy) = f.max_abs();
        println!(
            "dx={:.4}: max|F|=({fx:.3},{fy:.3}) div defect singular {:.2e} mollified {:.2e}",
            rho.grid().dx(),
            divergence_defect(&f, &rho),
            divergence_defect(&fe, &smooth)
        );
    }
    Ok(())
}
