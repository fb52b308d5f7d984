//! Uniform Cartesian grid and the scalar/vector fields that live on it.
//!
//! Storage is row-major with `x` fastest: the value of cell `(i, j)` sits at
//! `j * nx + i`. Row `j` is therefore a contiguous slice of `nx` values.

use crate::error::{ensure_finite, MotError, Result};

/// Uniform cell-centered grid on `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    dx: f64,
    dy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(MotError::param("grid", "cell counts must be >= 1"));
        }
        for (name, v) in [("x_min", x_min), ("x_max", x_max), ("y_min", y_min), ("y_max", y_max)] {
            ensure_finite(name, v)?;
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(MotError::param("grid", "domain bounds must satisfy min < max"));
        }
        Ok(Self {
            nx,
            ny,
            x_min,
            x_max,
            y_min,
            y_max,
            dx: (x_max - x_min) / nx as f64,
            dy: (y_max - y_min) / ny as f64,
        })
    }

    /// `n x n` cells on `[-half_width, half_width]^2`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, n, -half_width, half_width, -half_width, half_width)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// True when the domain is centered at the origin in both axes, so that
    /// `i -> nx-1-i` and `j -> ny-1-j` are exact reflections.
    pub fn is_symmetric(&self) -> bool {
        self.x_min == -self.x_max && self.y_min == -self.y_max
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    // Centers are measured from the domain midpoint so that mirrored cells
    // get exactly negated coordinates on a symmetric grid.
    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        0.5 * (self.x_min + self.x_max) + (i as f64 + 0.5 - 0.5 * self.nx as f64) * self.dx
    }

    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        0.5 * (self.y_min + self.y_max) + (j as f64 + 0.5 - 0.5 * self.ny as f64) * self.dy
    }

    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_center(i)).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y_center(j)).collect()
    }

    /// Cell containing `(x, y)`, or `None` outside the domain.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max) {
            return None;
        }
        let i = (((x - self.x_min) / self.dx).floor() as usize).min(self.nx - 1);
        let j = (((y - self.y_min) / self.dy).floor() as usize).min(self.ny - 1);
        Some((i, j))
    }

    /// Grid with every cell merged 2x2 (odd trailing cells are merged into a
    /// wider last cell by extending the domain by one fine cell).
    pub fn coarsened(&self) -> Grid2D {
        let nx = self.nx.div_ceil(2);
        let ny = self.ny.div_ceil(2);
        let x_max = self.x_min + 2.0 * nx as f64 * self.dx;
        let y_max = self.y_min + 2.0 * ny as f64 * self.dy;
        Grid2D {
            nx,
            ny,
            x_min: self.x_min,
            x_max,
            y_min: self.y_min,
            y_max,
            dx: 2.0 * self.dx,
            dy: 2.0 * self.dy,
        }
    }
}

/// Non-negative density samples (mass per unit area) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid2D,
    values: Vec<f64>,
    pub time: f64,
}

impl DensityField {
    pub fn new(grid: Grid2D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MotError::param(
                "values",
                format!("expected {} cells, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(MotError::param(
                "values",
                format!("cell {k} holds {} (must be finite and >= 0)", values[k]),
            ));
        }
        ensure_finite("time", time)?;
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            time: 0.0,
        }
    }

    /// Crate-internal constructor for solver output already known to be valid.
    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, time }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn mass(&self) -> f64 {
        compensated_sum(&self.values) * self.grid.cell_area()
    }

    /// Multiply every value so the discrete mass equals `target`.
    pub fn normalize_to(&mut self, target: f64) -> Result<()> {
        let m = self.mass();
        if m <= 0.0 {
            return Err(MotError::param("density", "cannot normalize a zero-mass field"));
        }
        let s = target / m;
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    /// Sum 2x2 blocks of cell masses onto [`Grid2D::coarsened`].
    pub fn coarsened(&self) -> DensityField {
        let g = self.grid;
        let cg = g.coarsened();
        let mut out = vec![0.0; cg.len()];
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                out[cg.idx(i / 2, j / 2)] += self.get(i, j);
            }
        }
        // mass per fine cell -> density on the coarse cell
        out.iter_mut().for_each(|v| *v *= g.cell_area() / cg.cell_area());
        DensityField::from_raw(cg, out, self.time)
    }
}

/// Two-component vector field sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    grid: Grid2D,
    pub fx: Vec<f64>,
    pub fy: Vec<f64>,
}

impl ForceField {
    pub(crate) fn new(grid: Grid2D, fx: Vec<f64>, fy: Vec<f64>) -> Self {
        debug_assert_eq!(fx.len(), grid.len());
        debug_assert_eq!(fy.len(), grid.len());
        Self { grid, fx, fy }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn max_abs(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (m(&self.fx), m(&self.fy))
    }

    /// Bilinear interpolation between cell centers; positions outside the
    /// center lattice are clamped to the nearest boundary center.
    pub fn sample(&self, x: f64, y: f64) -> (f64, f64) {
        let g = &self.grid;
        let (i0, i1, tx) = bracket(x, g.x_center(0), g.dx(), g.nx());
        let (j0, j1, ty) = bracket(y, g.y_center(0), g.dy(), g.ny());
        let lerp = |v: &[f64]| {
            let a = v[g.idx(i0, j0)] * (1.0 - tx) + v[g.idx(i1, j0)] * tx;
            let b = v[g.idx(i0, j1)] * (1.0 - tx) + v[g.idx(i1, j1)] * tx;
            a * (1.0 - ty) + b * ty
        };
        (lerp(&self.fx), lerp(&self.fy))
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn bracket(x: f64, first_center: f64, h: f64, n: usize) -> (usize, usize, f64) {
    let s = (x - first_center) / h;
    if n == 1 || s <= 0.0 {
        return (0, 0, 0.0);
    }
    let last = (n - 1) as f64;
    if s >= last {
        return (n - 1, n - 1, 0.0);
    }
    let k = s.floor() as usize;
    (k, k + 1, s - k as f64)
}
