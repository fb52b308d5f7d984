//! Sign-kernel forces on the grid, Gaussian mollification, the scalar
//! potentials used by the finite-volume fluxes, and the smoothed pair kernel
//! used by the particle system.
//!
//! Every sweep accumulates left-to-right and right-to-left partial sums
//! separately, and every symmetric stencil adds its `+k`/`-k` terms as a pair.
//! With cell centers that are exact mirrors this makes all operators commute
//! bit-for-bit with the reflections `x -> -x` and `y -> -y`.

use std::f64::consts::PI;

use crate::error::{ensure_positive, Result};
use crate::grid::{DensityField, ForceField, Grid2D};

/// Kernel truncation radius in units of `eps` for grid mollification.
pub const MOLLIFIER_TRUNCATION: f64 = 6.0;

/// Smoothed sign function and matching Gaussian:
/// `sgn_eps(u) = erf(u / (eps sqrt 2))`, `delta_eps(u) = (1/2) d/du sgn_eps(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothKernel {
    eps: f64,
    inv_eps_sqrt2: f64,
    inv_two_eps2: f64,
    peak: f64,
}

impl SmoothKernel {
    pub fn new(eps: f64) -> Result<Self> {
        ensure_positive("eps", eps)?;
        Ok(Self {
            eps,
            inv_eps_sqrt2: 1.0 / (eps * std::f64::consts::SQRT_2),
            inv_two_eps2: 1.0 / (2.0 * eps * eps),
            peak: 1.0 / (eps * (2.0 * PI).sqrt()),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn sgn(&self, u: f64) -> f64 {
        libm::erf(u * self.inv_eps_sqrt2)
    }

    #[inline]
    pub fn delta(&self, u: f64) -> f64 {
        self.peak * (-u * u * self.inv_two_eps2).exp()
    }

    /// `delta_eps(0) = 1 / (eps sqrt(2 pi))`, the sup of the kernel.
    pub fn peak(&self) -> f64 {
        self.peak
    }
}

/// `K_eps(dz) = (-sgn_eps(dx) delta_eps(dy), -sgn_eps(dy) delta_eps(dx))`.
#[inline]
pub fn pair_kernel(kernel: &SmoothKernel, dx: f64, dy: f64) -> (f64, f64) {
    (-kernel.sgn(dx) * kernel.delta(dy), -kernel.sgn(dy) * kernel.delta(dx))
}

/// Forward (strictly-left) and backward (strictly-right) partial sums of a
/// strided line, written into `left` and `right`.
#[inline]
fn side_sums(line: impl Fn(usize) -> f64, n: usize, left: &mut [f64], right: &mut [f64]) {
    let mut acc = 0.0;
    for k in 0..n {
        left[k] = acc;
        acc += line(k);
    }
    acc = 0.0;
    for k in (0..n).rev() {
        right[k] = acc;
        acc += line(k);
    }
}

/// `F_x(x_i, y_j) = -sum_{i'} sgn(x_i - x_{i'}) rho(x_{i'}, y_j) dx`, with
/// `sgn(0) = 0`, and likewise for `F_y` along columns. O(nx ny).
pub fn singular_force(rho: &DensityField) -> ForceField {
    let g = *rho.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let v = rho.values();
    let mut fx = vec![0.0; g.len()];
    let mut fy = vec![0.0; g.len()];

    let mut left = vec![0.0; nx.max(ny)];
    let mut right = vec![0.0; nx.max(ny)];
    for j in 0..ny {
        side_sums(|i| v[g.idx(i, j)], nx, &mut left, &mut right);
        for i in 0..nx {
            fx[g.idx(i, j)] = -(left[i] - right[i]) * g.dx();
        }
    }
    for i in 0..nx {
        side_sums(|j| v[g.idx(i, j)], ny, &mut left, &mut right);
        for j in 0..ny {
            fy[g.idx(i, j)] = -(left[j] - right[j]) * g.dy();
        }
    }
    ForceField::new(g, fx, fy)
}

/// Potentials `U = int |x - x'| rho dx'` (per row) and `V = int |y - y'| rho dy'`
/// (per column) by the rectangle rule. The forward difference of `U` across an
/// interface equals minus the interface value of `F_x`.
pub fn potentials_uv(rho: &DensityField) -> (Vec<f64>, Vec<f64>) {
    let g = *rho.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let v = rho.values();
    let xs = g.x_centers();
    let ys = g.y_centers();
    let mut u = vec![0.0; g.len()];
    let mut w = vec![0.0; g.len()];
    let n = nx.max(ny);
    let (mut l, mut r, mut xl, mut xr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    for j in 0..ny {
        side_sums(|i| v[g.idx(i, j)], nx, &mut l, &mut r);
        side_sums(|i| xs[i] * v[g.idx(i, j)], nx, &mut xl, &mut xr);
        for i in 0..nx {
            u[g.idx(i, j)] = g.dx() * ((xs[i] * l[i] - xl[i]) + (xr[i] - xs[i] * r[i]));
        }
    }
    for i in 0..nx {
        side_sums(|j| v[g.idx(i, j)], ny, &mut l, &mut r);
        side_sums(|j| ys[j] * v[g.idx(i, j)], ny, &mut xl, &mut xr);
        for j in 0..ny {
            w[g.idx(i, j)] = g.dy() * ((ys[j] * l[j] - xl[j]) + (xr[j] - ys[j] * r[j]));
        }
    }
    (u, w)
}

/// Discrete 1D Gaussian weights `w_0..=w_K`, normalized so `w_0 + 2 sum w_k = 1`.
fn gaussian_weights(eps: f64, h: f64) -> Vec<f64> {
    let reach = (MOLLIFIER_TRUNCATION * eps / h).floor() as usize;
    let mut w: Vec<f64> = (0..=reach)
        .map(|k| {
            let u = k as f64 * h;
            (-u * u / (2.0 * eps * eps)).exp()
        })
        .collect();
    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Mass-conserving Gaussian smoothing of one strided line. Each source cell
/// spreads its mass over the in-domain part of the stencil, renormalized.
fn mollify_line(src: &[f64], w: &[f64], dst: &mut [f64], scaled: &mut [f64]) {
    let n = src.len();
    let reach = w.len() - 1;
    for s in 0..n {
        let mut total = w[0];
        for (k, wk) in w.iter().enumerate().skip(1) {
            let a = if s + k < n { *wk } else { 0.0 };
            let b = if s >= k { *wk } else { 0.0 };
            total += a + b;
        }
        scaled[s] = src[s] / total;
    }
    for t in 0..n {
        let mut acc = w[0] * scaled[t];
        for k in 1..=reach {
            let a = if t >= k { w[k] * scaled[t - k] } else { 0.0 };
            let b = if t + k < n { w[k] * scaled[t + k] } else { 0.0 };
            acc += a + b;
        }
        dst[t] = acc;
    }
}

/// Peak normalized weight the mollifier can assign to a cell (1D), i.e. the
/// largest `w_0 / S` over boundary renormalizations.
fn peak_line_weight(w: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|s| {
            let mut total = w[0];
            for (k, wk) in w.iter().enumerate().skip(1) {
                if s + k < n {
                    total += wk;
                }
                if s >= k {
                    total += wk;
                }
            }
            w[0] / total
        })
        .fold(0.0, f64::max)
}

/// Separable convolution with the normalized 2D Gaussian of width `eps`,
/// truncated at `6 eps`. Mass is conserved exactly (to round-off).
pub fn gaussian_mollify(rho: &DensityField, eps: f64) -> Result<DensityField> {
    ensure_positive("eps", eps)?;
    let g = *rho.grid();
    if eps < g.dx().min(g.dy()) / 10.0 {
        log::warn!(
            "mollifier width {eps} under-resolved on grid with spacing ({}, {})",
            g.dx(),
            g.dy()
        );
    }
    let (nx, ny) = (g.nx(), g.ny());
    let wx = gaussian_weights(eps, g.dx());
    let wy = gaussian_weights(eps, g.dy());
    let n = nx.max(ny);
    let (mut src, mut dst, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    let mut stage = vec![0.0; g.len()];
    let v = rho.values();
    for j in 0..ny {
        src[..nx].copy_from_slice(&v[j * nx..(j + 1) * nx]);
        mollify_line(&src[..nx], &wx, &mut dst[..nx], &mut tmp[..nx]);
        stage[j * nx..(j + 1) * nx].copy_from_slice(&dst[..nx]);
    }
    let mut out = vec![0.0; g.len()];
    for i in 0..nx {
        for j in 0..ny {
            src[j] = stage[g.idx(i, j)];
        }
        mollify_line(&src[..ny], &wy, &mut dst[..ny], &mut tmp[..ny]);
        for j in 0..ny {
            out[g.idx(i, j)] = dst[j];
        }
    }
    Ok(DensityField::from_raw(g, out, rho.time))
}

/// `F_eps[rho] = sgn *_x (T_eps rho)`, evaluated as the singular force of the
/// mollified density.
pub fn regularized_force(rho: &DensityField, eps: f64) -> Result<ForceField> {
    let smooth = gaussian_mollify(rho, eps)?;
    let f = singular_force(&smooth);
    debug_assert!({
        let (bx, by) = regularized_force_bound(rho.grid(), eps, rho.mass());
        let (mx, my) = f.max_abs();
        mx <= bx * (1.0 + 1e-9) && my <= by * (1.0 + 1e-9)
    });
    Ok(f)
}

/// Sup bound on `|F_eps_x|`, `|F_eps_y|` for a field of the given mass. Equal
/// to `mass / (eps sqrt(2 pi))` up to the discrete kernel's boundary
/// renormalization.
pub fn regularized_force_bound(grid: &Grid2D, eps: f64, mass: f64) -> (f64, f64) {
    let wx = gaussian_weights(eps, grid.dx());
    let wy = gaussian_weights(eps, grid.dy());
    (
        mass * peak_line_weight(&wy, grid.ny()) / grid.dy(),
        mass * peak_line_weight(&wx, grid.nx()) / grid.dx(),
    )
}

/// Centered-difference divergence at interior cells (boundary cells are 0).
pub fn discrete_divergence(f: &ForceField) -> Vec<f64> {
    let g = *f.grid();
    let mut div = vec![0.0; g.len()];
    for j in 1..g.ny().saturating_sub(1) {
        for i in 1..g.nx().saturating_sub(1) {
            let ddx = (f.fx[g.idx(i + 1, j)] - f.fx[g.idx(i - 1, j)]) / (2.0 * g.dx());
            let ddy = (f.fy[g.idx(i, j + 1)] - f.fy[g.idx(i, j - 1)]) / (2.0 * g.dy());
            div[g.idx(i, j)] = ddx + ddy;
        }
    }
    div
}

/// Relative discrete L2 mismatch `|div F + 4 target| / |4 target|` over
/// interior cells.
pub fn divergence_defect(f: &ForceField, target: &DensityField) -> f64 {
    let g = *f.grid();
    let div = discrete_divergence(f);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 1..g.ny() - 1 {
        for i in 1..g.nx() - 1 {
            let k = g.idx(i, j);
            let t = 4.0 * target.values()[k];
            num += (div[k] + t).powi(2);
            den += t * t;
        }
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic::make_gaussian_ic;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid2D {
        Grid2D::symmetric(n, 2.5).unwrap()
    }

    fn gaussian(n: usize) -> DensityField {
        make_gaussian_ic(grid(n), 0.5, 1.0).unwrap()
    }

    fn direct_singular(rho: &DensityField) -> (Vec<f64>, Vec<f64>) {
        let g = *rho.grid();
        let mut fx = vec![0.0; g.len()];
        let mut fy = vec![0.0; g.len()];
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let mut sx = 0.0;
                for k in 0..g.nx() {
                    sx += (g.x_center(i) - g.x_center(k)).signum()
                        * if k == i { 0.0 } else { 1.0 }
                        * rho.get(k, j);
                }
                fx[g.idx(i, j)] = -sx * g.dx();
                let mut sy = 0.0;
                for k in 0..g.ny() {
                    if k != j {
                        sy += (g.y_center(j) - g.y_center(k)).signum() * rho.get(i, k);
                    }
                }
                fy[g.idx(i, j)] = -sy * g.dy();
            }
        }
        (fx, fy)
    }

    fn random_field(seed: u64, n: usize) -> DensityField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid2D::new(n, n, -1.0, 1.5, -0.5, 2.0).unwrap();
        let v = (0..g.len()).map(|_| rng.gen::<f64>()).collect();
        DensityField::new(g, v, 0.0).unwrap()
    }

    #[test]
    fn prefix_sum_force_matches_direct_double_sum() {
        for seed in 0..5 {
            let rho = random_field(seed, 16);
            let f = singular_force(&rho);
            let (dx, dy) = direct_singular(&rho);
            for k in 0..rho.grid().len() {
                assert!((f.fx[k] - dx[k]).abs() < 1e-12);
                assert!((f.fy[k] - dy[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn point_mass_force() {
        let g = grid(20);
        let mut rho = DensityField::zeros(g);
        let (i0, j0) = (6, 11);
        rho.values_mut()[g.idx(i0, j0)] = 1.0 / g.cell_area();
        let m0 = rho.mass();
        let f = singular_force(&rho);
        for j in 0..20 {
            for i in 0..20 {
                let expect = if j == j0 {
                    -m0 * (i as f64 - i0 as f64).signum() * if i == i0 { 0.0 } else { 1.0 } / g.dy()
                } else {
                    0.0
                };
                assert!((f.fx[g.idx(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_density_gives_antisymmetric_force() {
        let rho = gaussian(100);
        let g = *rho.grid();
        let f = singular_force(&rho);
        for j in 0..100 {
            for i in 0..100 {
                assert_eq!(f.fx[g.idx(i, j)], -f.fx[g.idx(99 - i, j)]);
                assert_eq!(f.fy[g.idx(i, j)], -f.fy[g.idx(i, 99 - j)]);
            }
            assert_eq!(f.fx[g.idx(49, j)] + f.fx[g.idx(50, j)], 0.0);
        }
    }

    #[test]
    fn singular_divergence_converges() {
        let e100 = divergence_defect(&singular_force(&gaussian(100)), &gaussian(100));
        let e200 = divergence_defect(&singular_force(&gaussian(200)), &gaussian(200));
        assert!(e100 < 0.05, "{e100}");
        assert!(e100 / e200 >= 1.5, "{e100} {e200}");
    }

    #[test]
    fn mollify_conserves_mass_and_symmetry() {
        let rho = random_field(3, 30);
        let m = gaussian_mollify(&rho, 0.2).unwrap();
        assert!((m.mass() - rho.mass()).abs() < 1e-12 * rho.mass());

        let rho = gaussian(100);
        let m = gaussian_mollify(&rho, 0.1).unwrap();
        assert_eq!(crate::diagnostics::symmetry_defect(&m).unwrap(), 0.0);
    }

    #[test]
    fn mollified_point_mass_peak() {
        let g = Grid2D::symmetric(101, 2.525).unwrap();
        let mut rho = DensityField::zeros(g);
        rho.values_mut()[g.idx(50, 50)] = 1.0 / g.cell_area();
        let eps = 0.1;
        let m = gaussian_mollify(&rho, eps).unwrap();
        let analytic = 1.0 / (2.0 * PI * eps * eps);
        let peak = m.get(50, 50);
        assert!((peak - analytic).abs() / analytic < 0.02, "{peak} vs {analytic}");
    }

    #[test]
    fn mollifier_semigroup() {
        let rho = gaussian(100);
        let eps = 0.1;
        let twice = gaussian_mollify(&gaussian_mollify(&rho, eps).unwrap(), eps).unwrap();
        let once = gaussian_mollify(&rho, eps * 2f64.sqrt()).unwrap();
        let num: f64 = twice.values().iter().zip(once.values()).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = once.values().iter().map(|a| a * a).sum();
        assert!((num / den).sqrt() < 1e-3);
    }

    #[test]
    fn regularized_divergence_identity() {
        let rho = gaussian(100);
        let eps = 0.1;
        let f = regularized_force(&rho, eps).unwrap();
        let target = gaussian_mollify(&rho, eps).unwrap();
        assert!(divergence_defect(&f, &target) < 0.05);
    }

    #[test]
    fn regularized_force_respects_sup_bound() {
        let rho = gaussian(100);
        for eps in [0.05, 0.1, 0.4] {
            let (mx, my) = regularized_force(&rho, eps).unwrap().max_abs();
            let bound = rho.mass() / (eps * (2.0 * PI).sqrt());
            assert!(mx <= bound * (1.0 + 1e-6) && my <= bound * (1.0 + 1e-6));
        }
    }

    #[test]
    fn eps_ladder_approaches_singular_force() {
        let rho = gaussian(100);
        let s = singular_force(&rho);
        let mut last = f64::INFINITY;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let f = regularized_force(&rho, eps).unwrap();
            let l1: f64 = f
                .fx
                .iter()
                .zip(&s.fx)
                .chain(f.fy.iter().zip(&s.fy))
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * rho.grid().cell_area();
            assert!(l1 < last, "eps {eps}: {l1} !< {last}");
            last = l1;
        }
    }

    #[test]
    fn uniform_density_regularized_force_antisymmetric() {
        let g = grid(40);
        let rho = DensityField::new(g, vec![0.04; g.len()], 0.0).unwrap();
        let f = regularized_force(&rho, 0.2).unwrap();
        for j in 0..40 {
            for i in 0..40 {
                assert!((f.fx[g.idx(i, j)] + f.fx[g.idx(39 - i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn potential_of_concentrated_row() {
        let g = grid(20);
        let mut rho = DensityField::zeros(g);
        let (i0, j0) = (4, 7);
        rho.values_mut()[g.idx(i0, j0)] = 3.0;
        let m = 3.0 * g.dx();
        let (u, v) = potentials_uv(&rho);
        for i in 0..20 {
            let expect = m * (g.x_center(i) - g.x_center(i0)).abs();
            assert!((u[g.idx(i, j0)] - expect).abs() < 1e-12);
        }
        assert!(u.iter().chain(&v).all(|x| *x >= 0.0));
    }

    #[test]
    fn potential_gradient_is_minus_force() {
        let rho = gaussian(100);
        let g = *rho.grid();
        let (u, _) = potentials_uv(&rho);
        let f = singular_force(&rho);
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..100 {
            for i in 1..99 {
                let du = (u[g.idx(i + 1, j)] - u[g.idx(i - 1, j)]) / (2.0 * g.dx());
                num += (du + f.fx[g.idx(i, j)]).powi(2);
                den += f.fx[g.idx(i, j)].powi(2);
            }
        }
        assert!((num / den).sqrt() < 0.05);
    }

    #[test]
    fn kernel_basics() {
        let k = SmoothKernel::new(0.1).unwrap();
        assert_eq!(k.sgn(0.0), 0.0);
        assert_eq!(pair_kernel(&k, 0.0, 0.37).0, 0.0);
        let h = 1e-5;
        for u in [-0.3, -0.05, 0.0, 0.02, 0.25] {
            let fd = (k.sgn(u + h) - k.sgn(u - h)) / (2.0 * h);
            assert!((0.5 * fd - k.delta(u)).abs() < 1e-6);
            assert!(k.sgn(u).abs() < 1.0);
            assert_eq!(k.delta(u), k.delta(-u));
        }
        // Riemann sum of delta over [-8 eps, 8 eps]
        let n = 16_000;
        let s: f64 = (0..n).map(|m| k.delta(-0.8 + (m as f64 + 0.5) * 1.6 / n as f64)).sum::<f64>() * 1.6 / n as f64;
        assert!((s - 1.0).abs() < 1e-9);
    }

    /// `sgn_eps` from its defining integral by composite Simpson quadrature.
    fn sgn_by_quadrature(eps: f64, u: f64) -> f64 {
        let n = 2000;
        let h = u / n as f64;
        let f = |v: f64| (-v * v / (2.0 * eps * eps)).exp();
        let mut s = f(0.0) + f(u);
        for m in 1..n {
            s += if m % 2 == 1 { 4.0 } else { 2.0 } * f(m as f64 * h);
        }
        2.0 / (eps * (2.0 * PI).sqrt()) * s * h / 3.0
    }

    #[test]
    fn pair_kernel_matches_quadrature_of_smoothed_force() {
        // Two unit point masses: force of the mass at the origin on a
        // particle displaced by (x, y).
        let eps = 0.1;
        let k = SmoothKernel::new(eps).unwrap();
        for (x, y) in [(0.05, 0.0), (0.13, 0.02), (0.4, -0.07), (-0.2, 0.15)] {
            let (kx, ky) = pair_kernel(&k, x, y);
            let delta = |u: f64| (-u * u / (2.0 * eps * eps)).exp() / (eps * (2.0 * PI).sqrt());
            let ox = -sgn_by_quadrature(eps, x) * delta(y);
            let oy = -sgn_by_quadrature(eps, y) * delta(x);
            assert!((kx - ox).abs() < 1e-10, "{kx} vs {ox}");
            assert!((ky - oy).abs() < 1e-10);
        }
        let (kx, _) = pair_kernel(&k, 0.3, 0.0);
        assert!(kx < 0.0);
    }

    proptest! {
        #[test]
        fn pair_kernel_is_odd(dx in -3.0f64..3.0, dy in -3.0f64..3.0, eps in 0.01f64..1.0) {
            let k = SmoothKernel::new(eps).unwrap();
            let (a, b) = pair_kernel(&k, dx, dy);
            let (c, d) = pair_kernel(&k, -dx, -dy);
            prop_assert_eq!(a, -c);
            prop_assert_eq!(b, -d);
        }
    }
}
