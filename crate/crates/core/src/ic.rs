//! Initial densities. All are centered at the origin and even in `x` and `y`.

use std::f64::consts::PI;

use crate::config::{InitialCondition, SimConfig};
use crate::error::{ensure_positive, MotError, Result};
use crate::grid::{DensityField, Grid2D};

/// Required distance from the origin to every domain edge, in standard deviations.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 5.0;

fn check_extent(grid: &Grid2D, name: &'static str, half_x: f64, half_y: f64) -> Result<()> {
    let room_x = grid.x_max().min(-grid.x_min());
    let room_y = grid.y_max().min(-grid.y_min());
    // Small slack so that e.g. sigma = 0.5 on [-2.5, 2.5] passes.
    if room_x < half_x * (1.0 - 1e-12) || room_y < half_y * (1.0 - 1e-12) {
        return Err(MotError::param(
            name,
            format!(
                "domain too small: needs half-widths >= ({half_x}, {half_y}), has ({room_x}, {room_y})"
            ),
        ));
    }
    Ok(())
}

/// Isotropic Gaussian of total mass `total_mass`, renormalized on the grid.
pub fn make_gaussian_ic(grid: Grid2D, sigma: f64, total_mass: f64) -> Result<DensityField> {
    make_anisotropic_gaussian_ic(grid, sigma, sigma, total_mass)
}

pub fn make_anisotropic_gaussian_ic(
    grid: Grid2D,
    sigma_x: f64,
    sigma_y: f64,
    total_mass: f64,
) -> Result<DensityField> {
    ensure_positive("sigma", sigma_x)?;
    ensure_positive("sigma", sigma_y)?;
    ensure_positive("total_mass", total_mass)?;
    check_extent(
        &grid,
        "sigma",
        GAUSSIAN_SUPPORT_SIGMAS * sigma_x,
        GAUSSIAN_SUPPORT_SIGMAS * sigma_y,
    )?;
    let norm = total_mass / (2.0 * PI * sigma_x * sigma_y);
    let mut values = vec![0.0; grid.len()];
    for j in 0..grid.ny() {
        let y = grid.y_center(j);
        for i in 0..grid.nx() {
            let x = grid.x_center(i);
            let q = x * x / (2.0 * sigma_x * sigma_x) + y * y / (2.0 * sigma_y * sigma_y);
            values[grid.idx(i, j)] = norm * (-q).exp();
        }
    }
    let mut rho = DensityField::from_raw(grid, values, 0.0);
    rho.normalize_to(total_mass)?;
    Ok(rho)
}

/// Free-space solution of the heat equation `d_t rho = D lap rho` started
/// from an isotropic Gaussian of width `sigma0`, sampled at cell centers. No
/// extent check and no renormalization: the tails may leave the domain.
pub fn heat_solution(grid: Grid2D, sigma0: f64, d: f64, t: f64, total_mass: f64) -> Result<DensityField> {
    ensure_positive("sigma0", sigma0)?;
    let s2 = sigma0 * sigma0 + 2.0 * d * t;
    let norm = total_mass / (2.0 * PI * s2);
    let mut values = vec![0.0; grid.len()];
    for j in 0..grid.ny() {
        let y = grid.y_center(j);
        for i in 0..grid.nx() {
            let x = grid.x_center(i);
            values[grid.idx(i, j)] = norm * (-(x * x + y * y) / (2.0 * s2)).exp();
        }
    }
    DensityField::new(grid, values, t)
}

/// Uniform density on the disc of the given radius (cell centers inside).
pub fn make_disc_ic(grid: Grid2D, radius: f64, total_mass: f64) -> Result<DensityField> {
    ensure_positive("radius", radius)?;
    ensure_positive("total_mass", total_mass)?;
    check_extent(&grid, "radius", radius, radius)?;
    let mut values = vec![0.0; grid.len()];
    for j in 0..grid.ny() {
        let y = grid.y_center(j);
        for i in 0..grid.nx() {
            let x = grid.x_center(i);
            if x * x + y * y <= radius * radius {
                values[grid.idx(i, j)] = 1.0;
            }
        }
    }
    let mut rho = DensityField::from_raw(grid, values, 0.0);
    rho.normalize_to(total_mass)
        .map_err(|_| MotError::param("radius", "disc contains no cell center"))?;
    Ok(rho)
}

/// Build the initial density described by `config`.
pub fn make_ic(config: &SimConfig) -> Result<DensityField> {
    match config.ic {
        InitialCondition::Gaussian { sigma } => make_gaussian_ic(config.grid, sigma, config.mass),
        InitialCondition::AnisotropicGaussian { sigma_x, sigma_y } => {
            make_anisotropic_gaussian_ic(config.grid, sigma_x, sigma_y, config.mass)
        }
        InitialCondition::Disc { radius } => make_disc_ic(config.grid, radius, config.mass),
    }
}
