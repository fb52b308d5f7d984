//! Scalar observables of grid densities and particle ensembles.
//!
//! Grid quantities use the same midpoint rectangle rule as the solver.
//! Ensemble quantities are plain averages over particles (unit total mass).

use crate::ensemble::ParticleEnsemble;
use crate::error::{MotError, Result};
use crate::grid::DensityField;

/// Density below which a cell is treated as vacuum (entropy, logarithms):
/// `1e-12 * M0 / area`.
pub fn density_floor(rho: &DensityField) -> f64 {
    1e-12 * rho.mass() / rho.grid().area()
}

pub fn mass(rho: &DensityField) -> f64 {
    rho.mass()
}

pub fn lp_norm(rho: &DensityField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(MotError::param("p", format!("must be >= 1, got {p}")));
    }
    let s: f64 = rho.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((s * rho.grid().cell_area()).powf(1.0 / p))
}

pub fn l2_norm(rho: &DensityField) -> f64 {
    let s: f64 = rho.values().iter().map(|v| v * v).sum();
    (s * rho.grid().cell_area()).sqrt()
}

pub fn linf(rho: &DensityField) -> f64 {
    rho.values().iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn check_moment_order(k: u32) -> Result<()> {
    if k == 2 || k == 4 {
        Ok(())
    } else {
        Err(MotError::param("k", format!("moment order must be 2 or 4, got {k}")))
    }
}

/// `m_k = iint (|x|^k + |y|^k) rho`.
pub fn moment_k(rho: &DensityField, k: u32) -> Result<f64> {
    check_moment_order(k)?;
    let g = rho.grid();
    let wy: Vec<f64> = g.y_centers().iter().map(|y| y.abs().powi(k as i32)).collect();
    let wx: Vec<f64> = g.x_centers().iter().map(|x| x.abs().powi(k as i32)).collect();
    let mut s = 0.0;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            s += (wx[i] + wy[j]) * rho.get(i, j);
        }
    }
    Ok(s * g.cell_area())
}

/// Same moment for the empirical measure `(1/N) sum delta_{Z_i}`.
pub fn ensemble_moment_k(e: &ParticleEnsemble, k: u32) -> Result<f64> {
    check_moment_order(k)?;
    let s: f64 = e
        .positions()
        .iter()
        .map(|p| p[0].abs().powi(k as i32) + p[1].abs().powi(k as i32))
        .sum();
    Ok(s / e.len() as f64)
}

/// `iint rho ln rho`, skipping cells below [`density_floor`].
pub fn entropy(rho: &DensityField) -> f64 {
    let floor = density_floor(rho);
    let s: f64 = rho
        .values()
        .iter()
        .filter(|v| **v > floor)
        .map(|v| v * v.ln())
        .sum();
    s * rho.grid().cell_area()
}

/// `ln iint exp(lambda sqrt(1 + x^2 + y^2)) rho`, by log-sum-exp so large
/// `lambda` cannot overflow. `lambda = 0` gives `ln(mass)`.
pub fn log_exp_moment(rho: &DensityField, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(MotError::param("lambda", format!("must be >= 0, got {lambda}")));
    }
    let g = rho.grid();
    let terms: Vec<f64> = (0..g.ny())
        .flat_map(|j| (0..g.nx()).map(move |i| (i, j)))
        .filter_map(|(i, j)| {
            let v = rho.get(i, j);
            (v > 0.0).then(|| {
                let (x, y) = (g.x_center(i), g.y_center(j));
                lambda * (1.0 + x * x + y * y).sqrt() + (v * g.cell_area()).ln()
            })
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

pub fn exp_moment(rho: &DensityField, lambda: f64) -> Result<f64> {
    log_exp_moment(rho, lambda).map(f64::exp)
}

pub fn ensemble_exp_moment(e: &ParticleEnsemble, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(MotError::param("lambda", format!("must be >= 0, got {lambda}")));
    }
    let terms: Vec<f64> = e
        .positions()
        .iter()
        .map(|p| lambda * (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt())
        .collect();
    Ok((log_sum_exp(&terms) - (e.len() as f64).ln()).exp())
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `<|xy|> - <|x|><|y|>` with `<.>` the average against `rho / mass(rho)`.
pub fn covariance_stat(rho: &DensityField) -> f64 {
    let g = rho.grid();
    let (mut m, mut axy, mut ax, mut ay) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..g.ny() {
        let y = g.y_center(j).abs();
        for i in 0..g.nx() {
            let x = g.x_center(i).abs();
            let v = rho.get(i, j);
            m += v;
            axy += x * y * v;
            ax += x * v;
            ay += y * v;
        }
    }
    axy / m - (ax / m) * (ay / m)
}

pub fn ensemble_covariance_stat(e: &ParticleEnsemble) -> f64 {
    let n = e.len() as f64;
    let (mut axy, mut ax, mut ay) = (0.0, 0.0, 0.0);
    for p in e.positions() {
        let (x, y) = (p[0].abs(), p[1].abs());
        axy += x * y;
        ax += x;
        ay += y;
    }
    axy / n - (ax / n) * (ay / n)
}

/// `max |rho(x,y) - rho(-x,y)|, |rho(x,y) - rho(x,-y)|` via index mirrors.
pub fn symmetry_defect(rho: &DensityField) -> Result<f64> {
    let g = rho.grid();
    if !g.is_symmetric() {
        return Err(MotError::Unsupported(
            "symmetry defect requires a grid centered at the origin".into(),
        ));
    }
    let (nx, ny) = (g.nx(), g.ny());
    let mut d = 0.0f64;
    for j in 0..ny {
        for i in 0..nx {
            let v = rho.get(i, j);
            d = d.max((v - rho.get(nx - 1 - i, j)).abs());
            d = d.max((v - rho.get(i, ny - 1 - j)).abs());
        }
    }
    Ok(d)
}

/// `iint |a - b|` on a common grid.
pub fn l1_distance(a: &DensityField, b: &DensityField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(MotError::param("grid", "fields live on different grids"));
    }
    let s: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    Ok(s * a.grid().cell_area())
}

/// Relative discrete L2 distance `|a - b| / |b|`.
pub fn relative_l2(a: &DensityField, b: &DensityField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(MotError::param("grid", "fields live on different grids"));
    }
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    Ok((num / den).sqrt())
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub m2: f64,
    pub m4: f64,
    pub entropy: f64,
    pub exp_moment: f64,
    pub covariance_stat: f64,
    /// `None` on grids not centered at the origin, and for ensembles.
    pub symmetry_defect: Option<f64>,
    pub w1_sliced: Option<f64>,
    pub w1_exact_coarse: Option<f64>,
}

impl DiagnosticsRecord {
    pub fn from_density(rho: &DensityField, lambda: f64) -> Result<Self> {
        Ok(Self {
            time: rho.time,
            mass: rho.mass(),
            l1: lp_norm(rho, 1.0)?,
            l2: l2_norm(rho),
            linf: linf(rho),
            m2: moment_k(rho, 2)?,
            m4: moment_k(rho, 4)?,
            entropy: entropy(rho),
            exp_moment: exp_moment(rho, lambda)?,
            covariance_stat: covariance_stat(rho),
            symmetry_defect: symmetry_defect(rho).ok(),
            w1_sliced: None,
            w1_exact_coarse: None,
        })
    }

    /// Grid-free observables of an ensemble; norms and entropy are not
    /// defined for a sum of Diracs and are reported as NaN.
    pub fn from_ensemble(e: &ParticleEnsemble, lambda: f64) -> Result<Self> {
        Ok(Self {
            time: e.time,
            mass: 1.0,
            l1: 1.0,
            l2: f64::NAN,
            linf: f64::NAN,
            m2: ensemble_moment_k(e, 2)?,
            m4: ensemble_moment_k(e, 4)?,
            entropy: f64::NAN,
            exp_moment: ensemble_exp_moment(e, lambda)?,
            covariance_stat: ensemble_covariance_stat(e),
            symmetry_defect: None,
            w1_sliced: None,
            w1_exact_coarse: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_particles_from_density;
    use crate::grid::Grid2D;
    use crate::ic::{make_anisotropic_gaussian_ic, make_gaussian_ic};
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::symmetric(100, 2.5).unwrap()
    }

    #[test]
    fn uniform_density_norms_and_entropy() {
        let g = grid();
        let c = 0.7;
        let rho = DensityField::new(g, vec![c; g.len()], 0.0).unwrap();
        let a = g.area();
        for p in [1.0, 2.0, 3.5] {
            let expect = (c.powf(p) * a).powf(1.0 / p);
            assert!((lp_norm(&rho, p).unwrap() - expect).abs() < 1e-12 * expect);
        }
        assert!((entropy(&rho) - c * a * c.ln()).abs() < 1e-12 * a);
        assert_eq!(linf(&rho), c);
        assert!(lp_norm(&rho, 0.5).is_err());
    }

    #[test]
    fn gaussian_moments_and_entropy() {
        let sigma = 0.5;
        let rho = make_gaussian_ic(grid(), sigma, 1.0).unwrap();
        assert!((moment_k(&rho, 2).unwrap() - 2.0 * sigma * sigma).abs() < 1e-3);
        let h = -(1.0 + (2.0 * PI * sigma * sigma).ln());
        assert!((entropy(&rho) - h).abs() < 1e-3, "{} vs {h}", entropy(&rho));
        assert!(moment_k(&rho, 3).is_err());
    }

    #[test]
    fn point_mass_observables() {
        let g = Grid2D::symmetric(101, 2.525).unwrap();
        let mut rho = DensityField::zeros(g);
        rho.values_mut()[g.idx(50, 50)] = 2.0 / g.cell_area();
        assert!(moment_k(&rho, 2).unwrap().abs() < 1e-20);
        let e = exp_moment(&rho, 1.0).unwrap();
        assert!((e - 2.0 * 1f64.exp()).abs() < 1e-12);
        assert!((exp_moment(&rho, 0.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exp_moment_small_lambda_is_mass() {
        let rho = make_gaussian_ic(grid(), 0.5, 1.3).unwrap();
        assert!((exp_moment(&rho, 1e-8).unwrap() - 1.3).abs() < 1e-7);
        // no overflow for huge lambda
        assert!(log_exp_moment(&rho, 800.0).unwrap().is_finite());
    }

    #[test]
    fn covariance_of_product_measure_vanishes() {
        let rho = make_anisotropic_gaussian_ic(grid(), 0.3, 0.45, 1.0).unwrap();
        assert!(covariance_stat(&rho).abs() < 1e-12);
        let rho = make_gaussian_ic(grid(), 0.5, 2.0).unwrap();
        assert!(covariance_stat(&rho).abs() < 1e-12);
    }

    #[test]
    fn symmetry_defect_detects_shift() {
        let rho = make_gaussian_ic(grid(), 0.4, 1.0).unwrap();
        assert_eq!(symmetry_defect(&rho).unwrap(), 0.0);
        let g = Grid2D::new(100, 100, -2.4, 2.6, -2.5, 2.5).unwrap();
        assert!(symmetry_defect(&DensityField::zeros(g)).is_err());
        // shift by one cell
        let g = grid();
        let mut v = vec![0.0; g.len()];
        for j in 0..100 {
            for i in 1..100 {
                v[g.idx(i, j)] = rho.get(i - 1, j);
            }
        }
        let shifted = DensityField::new(g, v, 0.0).unwrap();
        assert!(symmetry_defect(&shifted).unwrap() > 0.0);
    }

    #[test]
    fn ensemble_matches_grid_within_monte_carlo_error() {
        let rho = make_anisotropic_gaussian_ic(grid(), 0.35, 0.5, 1.0).unwrap();
        let n = 100_000;
        let e = sample_particles_from_density(&rho, n, 11).unwrap();
        let se = |f: &dyn Fn(&[f64; 2]) -> f64| {
            let v: Vec<f64> = e.positions().iter().map(f).collect();
            let m = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            (m, (var / n as f64).sqrt())
        };
        // cell-uniform sampling adds h^2/12 per axis to the second moment
        let h2 = 2.0 * 0.05f64.powi(2) / 12.0;
        let (m, s) = se(&|p| p[0] * p[0] + p[1] * p[1]);
        assert!((m - moment_k(&rho, 2).unwrap() - h2).abs() < 3.0 * s);
        let (m, s) = se(&|p| (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt().exp());
        assert!((m - exp_moment(&rho, 1.0).unwrap()).abs() < 3.0 * s + 1e-4);
        assert!((ensemble_exp_moment(&e, 1.0).unwrap() - m).abs() < 1e-9 * m);
        assert!((ensemble_covariance_stat(&e) - covariance_stat(&rho)).abs() < 0.01);
    }

    #[test]
    fn record_from_density() {
        let rho = make_gaussian_ic(grid(), 0.5, 1.0).unwrap();
        let r = DiagnosticsRecord::from_density(&rho, 1.0).unwrap();
        assert!((r.mass - 1.0).abs() < 1e-14);
        assert_eq!(r.symmetry_defect, Some(0.0));
        assert!(r.l2 > 0.0 && r.linf > 0.0 && r.exp_moment > 1.0);
    }
}
