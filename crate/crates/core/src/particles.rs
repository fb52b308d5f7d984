//! Mean-field interacting particles driven by the smoothed pair kernel, and
//! the synchronously coupled nonlinear process driven by a grid solution.
//!
//! The drift on particle `i` is `(1/N) sum_{j != i} K_eps(Z_i - Z_j)`. Both
//! evaluation modes visit each unordered pair once and add the kernel to one
//! particle and subtract it from the other.

use crate::config::{DriftMode, ForceMode, SimConfig};
use crate::diagnostics::DiagnosticsRecord;
use crate::ensemble::{sample_particles_from_density, ParticleEnsemble};
use crate::error::{ensure_positive, MotError, Result};
use crate::forces::{pair_kernel, regularized_force, SmoothKernel, MOLLIFIER_TRUNCATION};
use crate::grid::{DensityField, ForceField, Grid2D};
use crate::ic::make_ic;

/// Beyond this many `eps`, `erf(u / (eps sqrt 2))` equals `sign(u)` to 1e-15.
const SIGN_SATURATION: f64 = 8.0;

/// Upper limit on cell-list bins per axis.
const MAX_BINS: usize = 512;

/// Table nodes per `eps` for the cell-list kernel; the cubic Hermite error
/// is below 2e-10 at this spacing.
const TABLE_NODES_PER_EPS: f64 = 128.0;

/// Cubic Hermite tables of `sgn_eps` and `delta_eps` on `[0, 8 eps]`,
/// sharing one node set so a coordinate difference is located once. Beyond
/// the last node the pair is `(1, 0)`.
#[derive(Debug, Clone, PartialEq)]
struct PairTable {
    inv_h: f64,
    last: f64,
    /// Per interval: `sgn` then `delta`, each as `[f(a), h f'(a), f(b), h f'(b)]`.
    cells: Vec<[f64; 8]>,
}

impl PairTable {
    fn new(kernel: &SmoothKernel) -> Self {
        let eps = kernel.eps();
        let h = eps / TABLE_NODES_PER_EPS;
        let n = (SIGN_SATURATION * TABLE_NODES_PER_EPS).ceil() as usize;
        let sgn = |u: f64| (kernel.sgn(u), h * 2.0 * kernel.delta(u));
        let delta = |u: f64| (kernel.delta(u), -h * u / (eps * eps) * kernel.delta(u));
        let mut cells: Vec<[f64; 8]> = (0..n)
            .map(|k| {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                let (sa, dsa) = sgn(a);
                let (sb, dsb) = sgn(b);
                let (ga, dga) = delta(a);
                let (gb, dgb) = delta(b);
                [sa, dsa, sb, dsb, ga, dga, gb, dgb]
            })
            .collect();
        // saturated sentinel, reached with t = 0
        cells.push([1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        Self {
            inv_h: 1.0 / h,
            last: n as f64,
            cells,
        }
    }

    /// `(sgn_eps(|u|), delta_eps(u))`.
    #[inline]
    fn eval(&self, u: f64) -> (f64, f64) {
        let a = (u.abs() * self.inv_h).min(self.last);
        let k = a as usize;
        let c = &self.cells[k];
        let t = a - k as f64;
        let s = 1.0 - t;
        let h00 = (1.0 + 2.0 * t) * s * s;
        let h10 = t * s * s;
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = -t * t * s;
        (
            h00 * c[0] + h10 * c[1] + h01 * c[2] + h11 * c[3],
            h00 * c[4] + h10 * c[5] + h01 * c[6] + h11 * c[7],
        )
    }
}

/// Fixed-point resolution of the direct pair sum.
const ACCUMULATOR_BITS: u32 = 60;

/// Largest `b` with `n * peak * 2^b < 2^52`, so every partial sum of the
/// drifts is an exact multiple of `2^-b`.
fn output_bits(n: usize, peak: f64) -> u32 {
    let b = 52.0 - (n as f64 * peak.max(1.0)).log2().ceil() - 1.0;
    b.clamp(0.0, ACCUMULATOR_BITS as f64) as u32
}

fn round_div(a: i128, b: i128) -> i128 {
    let q = a.div_euclid(b);
    let r = a.rem_euclid(b);
    if 2 * r >= b {
        q + 1
    } else {
        q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftEvaluator {
    kernel: SmoothKernel,
    mode: DriftMode,
    cutoff: f64,
    table: PairTable,
}

impl DriftEvaluator {
    /// `cutoff` is the truncation radius in units of `eps` (cell-list mode).
    pub fn new(eps: f64, mode: DriftMode, cutoff: f64) -> Result<Self> {
        let kernel = SmoothKernel::new(eps)?;
        ensure_positive("cutoff", cutoff)?;
        Ok(Self {
            kernel,
            mode,
            cutoff: cutoff * eps,
            table: PairTable::new(&kernel),
        })
    }

    pub fn eps(&self) -> f64 {
        self.kernel.eps()
    }

    pub fn mode(&self) -> DriftMode {
        self.mode
    }

    /// Drift of every particle. In direct mode the result is a multiple of a
    /// power of two small enough that the drifts sum to exactly zero in any
    /// summation order.
    pub fn drift(&self, positions: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = positions.len();
        let mut out = vec![[0.0; 2]; n];
        if n < 2 {
            return out;
        }
        match self.mode {
            DriftMode::Direct => self.direct(positions, &mut out),
            DriftMode::CellList => {
                self.cell_list(positions, &mut out);
                let inv = 1.0 / n as f64;
                for d in &mut out {
                    d[0] *= inv;
                    d[1] *= inv;
                }
            }
        }
        debug_assert!({
            let bound = (n - 1) as f64 / n as f64 * self.kernel.peak() * (1.0 + 1e-9);
            out.iter().all(|d| d[0].abs() <= bound && d[1].abs() <= bound)
        });
        out
    }

    fn direct(&self, p: &[[f64; 2]], out: &mut [[f64; 2]]) {
        let n = p.len();
        let fine = (ACCUMULATOR_BITS as f64).exp2();
        let mut acc = vec![[0i128; 2]; n];
        for i in 0..n {
            let (xi, yi) = (p[i][0], p[i][1]);
            let (mut ax, mut ay) = (0i128, 0i128);
            for j in i + 1..n {
                let (kx, ky) = pair_kernel(&self.kernel, xi - p[j][0], yi - p[j][1]);
                let (qx, qy) = ((kx * fine).round() as i128, (ky * fine).round() as i128);
                ax += qx;
                ay += qy;
                acc[j][0] -= qx;
                acc[j][1] -= qy;
            }
            acc[i][0] += ax;
            acc[i][1] += ay;
        }
        let bits = output_bits(n, self.kernel.peak());
        let divisor = n as i128 * (1i128 << (ACCUMULATOR_BITS - bits));
        let quantum = (-(bits as f64)).exp2();
        for c in 0..2 {
            let mut r: Vec<i128> = acc.iter().map(|a| round_div(a[c], divisor)).collect();
            let residual: i128 = r.iter().sum();
            for v in r.iter_mut().take(residual.unsigned_abs() as usize) {
                *v -= residual.signum();
            }
            for (o, v) in out.iter_mut().zip(&r) {
                o[c] = *v as f64 * quantum;
            }
        }
    }

    /// Tabulated pair kernel.
    #[inline]
    fn tabulated_pair(&self, dx: f64, dy: f64) -> (f64, f64) {
        let (sx, gx) = self.table.eval(dx);
        let (sy, gy) = self.table.eval(dy);
        (-sx.copysign(dx) * gy, -sy.copysign(dy) * gx)
    }

    /// Bins of side `>= cutoff`; pairs of bins that are two or more apart in
    /// both directions are skipped. The x component needs every pair in a band
    /// of adjacent bin rows and the y component every pair in a band of
    /// adjacent bin columns, so a bin interacts with its two bands, not just
    /// its 3x3 neighborhood.
    fn cell_list(&self, p: &[[f64; 2]], out: &mut [[f64; 2]]) {
        let bins = Bins::build(p, self.cutoff);
        let (bx, by) = (bins.nx, bins.ny);
        let mut fx = vec![0.0; p.len()];
        let mut fy = vec![0.0; p.len()];
        let xs = &bins.xs;
        let ys = &bins.ys;

        let cell_pair = |a: usize, b: usize, fx: &mut [f64], fy: &mut [f64]| {
            let ra = bins.range(a);
            let rb = bins.range(b);
            for i in ra.clone() {
                let (xi, yi) = (xs[i], ys[i]);
                let (mut ax, mut ay) = (0.0, 0.0);
                let start = if a == b { i + 1 } else { rb.start };
                for j in start..rb.end {
                    let (kx, ky) = self.tabulated_pair(xi - xs[j], yi - ys[j]);
                    ax += kx;
                    ay += ky;
                    fx[j] -= kx;
                    fy[j] -= ky;
                }
                fx[i] += ax;
                fy[i] += ay;
            }
        };

        for cy in 0..by {
            for cx in 0..bx {
                let a = cy * bx + cx;
                if bins.range(a).is_empty() {
                    continue;
                }
                // same row, to the right
                for ox in cx..bx {
                    cell_pair(a, cy * bx + ox, &mut fx, &mut fy);
                }
                // next row, every column
                if cy + 1 < by {
                    for ox in 0..bx {
                        cell_pair(a, (cy + 1) * bx + ox, &mut fx, &mut fy);
                    }
                }
                // rows further up, adjacent columns only
                for oy in cy + 2..by {
                    for ox in cx.saturating_sub(1)..(cx + 2).min(bx) {
                        cell_pair(a, oy * bx + ox, &mut fx, &mut fy);
                    }
                }
            }
        }
        for (k, &orig) in bins.order.iter().enumerate() {
            out[orig] = [fx[k], fy[k]];
        }
    }
}

/// Particles sorted by bin, with coordinates copied contiguously.
struct Bins {
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    order: Vec<usize>,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Bins {
    fn build(p: &[[f64; 2]], side: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for q in p {
            x0 = x0.min(q[0]);
            x1 = x1.max(q[0]);
            y0 = y0.min(q[1]);
            y1 = y1.max(q[1]);
        }
        let axis = |lo: f64, hi: f64| {
            let n = (((hi - lo) / side).floor() as usize + 1).min(MAX_BINS);
            // widen the bins if capped so they stay at least `side` wide
            let w = ((hi - lo) / n as f64).max(side);
            (n, w)
        };
        let (nx, wx) = axis(x0, x1);
        let (ny, wy) = axis(y0, y1);
        let bin = |q: &[f64; 2]| {
            let i = (((q[0] - x0) / wx) as usize).min(nx - 1);
            let j = (((q[1] - y0) / wy) as usize).min(ny - 1);
            j * nx + i
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for q in p {
            counts[bin(q) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let starts = counts.clone();
        let mut order = vec![0; p.len()];
        for (i, q) in p.iter().enumerate() {
            let b = bin(q);
            order[counts[b]] = i;
            counts[b] += 1;
        }
        let xs = order.iter().map(|&i| p[i][0]).collect();
        let ys = order.iter().map(|&i| p[i][1]).collect();
        Self {
            nx,
            ny,
            starts,
            order,
            xs,
            ys,
        }
    }

    #[inline]
    fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.starts[b]..self.starts[b + 1]
    }
}

/// Explicit Euler-Maruyama stepper; `drift = None` gives free Brownian motion.
#[derive(Debug, Clone)]
pub struct EulerMaruyama {
    pub drift: Option<DriftEvaluator>,
    pub dt: f64,
    pub d: f64,
}

impl EulerMaruyama {
    pub fn new(drift: Option<DriftEvaluator>, dt: f64, d: f64) -> Result<Self> {
        ensure_positive("dt", dt)?;
        if !(d >= 0.0) || !d.is_finite() {
            return Err(MotError::param("D", format!("must be >= 0, got {d}")));
        }
        Ok(Self { drift, dt, d })
    }

    pub fn from_config(config: &SimConfig) -> Result<Self> {
        let drift = match config.force_mode {
            ForceMode::Off => None,
            _ => Some(DriftEvaluator::new(config.eps, config.drift_mode, config.cutoff)?),
        };
        Self::new(drift, config.dt, config.d)
    }

    /// `Z_i += d_i dt + sqrt(2 D dt) xi_i`, advancing time by `dt`.
    pub fn step(&self, e: &mut ParticleEnsemble) -> Result<()> {
        self.step_by(e, self.dt)
    }

    fn step_by(&self, e: &mut ParticleEnsemble, dt: f64) -> Result<()> {
        let drift = self.drift.as_ref().map(|d| d.drift(e.positions()));
        let amp = (2.0 * self.d * dt).sqrt();
        let t = e.time;
        for i in 0..e.len() {
            let xi = e.gaussian_pair(i);
            let d = drift.as_ref().map_or([0.0; 2], |v| v[i]);
            let p = &mut e.positions_mut()[i];
            p[0] += d[0] * dt + amp * xi[0];
            p[1] += d[1] * dt + amp * xi[1];
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(MotError::Numerical {
                    time: t,
                    reason: format!("particle {i} left the finite range"),
                });
            }
        }
        e.time = t + dt;
        Ok(())
    }
}

/// Step sizes that reach `t_end` from 0: full steps of `dt` and a shorter
/// last one if needed.
fn step_plan(dt: f64, t_end: f64) -> (u64, f64) {
    let full = (t_end / dt * (1.0 + 1e-12)).floor() as u64;
    let rest = t_end - full as f64 * dt;
    (full, if rest > 1e-12 * dt { rest } else { 0.0 })
}

fn output_stride(config: &SimConfig) -> u64 {
    ((config.output_interval / config.dt).round() as u64).max(1)
}

#[derive(Debug, Clone)]
pub struct ParticleRun {
    pub ensemble: ParticleEnsemble,
    pub records: Vec<DiagnosticsRecord>,
}

/// Sample `n_particles` from the configured initial density and integrate to
/// `t_end`, recording ensemble diagnostics every `output_interval`.
pub fn run_particles(config: &SimConfig) -> Result<ParticleRun> {
    config.validate()?;
    let rho0 = make_ic(config)?;
    let e = sample_particles_from_density(&rho0, config.n_particles, config.seed)?;
    run_particles_from(config, e)
}

pub fn run_particles_from(config: &SimConfig, mut e: ParticleEnsemble) -> Result<ParticleRun> {
    let em = EulerMaruyama::from_config(config)?;
    let lambda = config.exp_lambda;
    let stride = output_stride(config);
    let (full, rest) = step_plan(config.dt, config.t_end);
    let mut records = vec![DiagnosticsRecord::from_ensemble(&e, lambda)?];
    for k in 1..=full {
        em.step(&mut e)?;
        if k % stride == 0 || (k == full && rest == 0.0) {
            records.push(DiagnosticsRecord::from_ensemble(&e, lambda)?);
        }
    }
    if rest > 0.0 {
        em.step_by(&mut e, rest)?;
        records.push(DiagnosticsRecord::from_ensemble(&e, lambda)?);
    }
    Ok(ParticleRun { ensemble: e, records })
}

/// Regularized grid forces of a time series of densities, interpolated
/// bilinearly in space and linearly in time.
#[derive(Debug, Clone)]
pub struct ForceHistory {
    times: Vec<f64>,
    forces: Vec<ForceField>,
}

impl ForceHistory {
    pub fn from_snapshots(snapshots: &[DensityField], eps: f64) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(MotError::param("snapshots", "need at least one density snapshot"));
        }
        let times: Vec<f64> = snapshots.iter().map(|s| s.time).collect();
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MotError::param("snapshots", "times must be strictly increasing"));
        }
        let forces = snapshots
            .iter()
            .map(|s| regularized_force(s, eps))
            .collect::<Result<_>>()?;
        Ok(Self { times, forces })
    }

    pub fn window(&self) -> &Grid2D {
        self.forces[0].grid()
    }

    /// Fails unless the snapshots cover `[0, t_end]` with gaps `<= max_gap`.
    pub fn check_coverage(&self, t_end: f64, max_gap: f64) -> Result<()> {
        let tol = 1e-9 * t_end.max(1.0);
        let first = self.times[0];
        let last = *self.times.last().unwrap();
        if first > tol || last < t_end - tol {
            return Err(MotError::param(
                "snapshots",
                format!("cover [{first}, {last}], need [0, {t_end}]"),
            ));
        }
        if let Some(w) = self.times.windows(2).find(|w| w[1] - w[0] > max_gap * (1.0 + 1e-9)) {
            return Err(MotError::param(
                "snapshots",
                format!("gap {} between t={} and t={} exceeds {max_gap}", w[1] - w[0], w[0], w[1]),
            ));
        }
        Ok(())
    }

    pub fn sample(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        let k = self.times.partition_point(|s| *s <= t);
        if k == 0 {
            return self.forces[0].sample(x, y);
        }
        if k == self.times.len() {
            return self.forces[k - 1].sample(x, y);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        let (a0, b0) = self.forces[k - 1].sample(x, y);
        if w == 0.0 {
            return (a0, b0);
        }
        let (a1, b1) = self.forces[k].sample(x, y);
        ((1.0 - w) * a0 + w * a1, (1.0 - w) * b0 + w * b1)
    }
}

/// Interacting particles `z` and nonlinear-process copies `z_tilde`, started
/// at the same positions and driven by the same Brownian increments.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub z: ParticleEnsemble,
    pub z_tilde: Vec<[f64; 2]>,
}

impl CoupledPair {
    pub fn new(positions: Vec<[f64; 2]>, seed: u64) -> Result<Self> {
        let z = ParticleEnsemble::new(positions.clone(), seed)?;
        Ok(Self { z, z_tilde: positions })
    }

    pub fn time(&self) -> f64 {
        self.z.time
    }

    /// One step of length `dt`: the increment drawn for `z[i]` is reused
    /// for `z_tilde[i]`.
    pub fn step(&mut self, drift: &DriftEvaluator, history: &ForceHistory, dt: f64, d: f64) -> Result<()> {
        let t = self.z.time;
        let dz = drift.drift(self.z.positions());
        let amp = (2.0 * d * dt).sqrt();
        for i in 0..self.z.len() {
            let xi = self.z.gaussian_pair(i);
            let p = &mut self.z.positions_mut()[i];
            p[0] += dz[i][0] * dt + amp * xi[0];
            p[1] += dz[i][1] * dt + amp * xi[1];
            let q = &mut self.z_tilde[i];
            let (fx, fy) = history.sample(t, q[0], q[1]);
            q[0] += fx * dt + amp * xi[0];
            q[1] += fy * dt + amp * xi[1];
            if !(p[0].is_finite() && p[1].is_finite() && q[0].is_finite() && q[1].is_finite()) {
                return Err(MotError::Numerical {
                    time: t,
                    reason: format!("coupled particle {i} left the finite range"),
                });
            }
        }
        self.z.time = t + dt;
        Ok(())
    }

    pub fn gap(&self) -> GapRecord {
        let (mut sum, mut max) = (0.0, 0.0f64);
        for (p, q) in self.z.positions().iter().zip(&self.z_tilde) {
            let g = (p[0] - q[0]).hypot(p[1] - q[1]);
            sum += g;
            max = max.max(g);
        }
        GapRecord {
            time: self.z.time,
            mean: sum / self.z.len() as f64,
            max,
            escaped: 0.0,
        }
    }
}

/// Coupling distance at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord {
    pub time: f64,
    /// `(1/N) sum_i |Z_i - Z~_i|`.
    pub mean: f64,
    /// `max_i |Z_i - Z~_i|`.
    pub max: f64,
    /// Fraction of `Z~` outside the grid window.
    pub escaped: f64,
}

#[derive(Debug, Clone)]
pub struct CouplingRun {
    pub pair: CoupledPair,
    pub gaps: Vec<GapRecord>,
}

/// Couple `n_particles` interacting particles to the nonlinear process whose
/// law is given by `snapshots` (a grid solution of the regularized equation
/// with the same `D` and `eps`). Snapshots must cover `[0, t_end]` with gaps
/// of at most `10 dt`.
pub fn run_coupled(config: &SimConfig, snapshots: &[DensityField]) -> Result<CouplingRun> {
    config.validate()?;
    let history = ForceHistory::from_snapshots(snapshots, config.eps)?;
    history.check_coverage(config.t_end, 10.0 * config.dt)?;
    let positions = crate::ensemble::sample_positions(&snapshots[0], config.n_particles, config.seed)?;
    let pair = CoupledPair::new(positions, config.seed)?;
    run_coupled_from(config, pair, &history)
}

pub fn run_coupled_from(config: &SimConfig, mut pair: CoupledPair, history: &ForceHistory) -> Result<CouplingRun> {
    let drift = DriftEvaluator::new(config.eps, config.drift_mode, config.cutoff)?;
    let window = *history.window();
    let stride = output_stride(config);
    let (full, rest) = step_plan(config.dt, config.t_end);
    let record = |pair: &CoupledPair| {
        let mut g = pair.gap();
        let out = pair
            .z_tilde
            .iter()
            .filter(|q| window.cell_of(q[0], q[1]).is_none())
            .count();
        g.escaped = out as f64 / pair.z_tilde.len() as f64;
        if out > 0 {
            log::info!("t={:.4}: {out} nonlinear-process particles outside the grid window", g.time);
        }
        g
    };
    let mut gaps = vec![record(&pair)];
    for k in 1..=full {
        pair.step(&drift, history, config.dt, config.d)?;
        if k % stride == 0 || (k == full && rest == 0.0) {
            gaps.push(record(&pair));
        }
    }
    if rest > 0.0 {
        pair.step(&drift, history, rest, config.d)?;
        gaps.push(record(&pair));
    }
    Ok(CouplingRun { pair, gaps })
}

/// Deposit mass `1/N` per particle with a normalized Gaussian of width
/// `bandwidth`, truncated at `6 bandwidth` and renormalized over the cells
/// it reaches. Particles outside the grid are deposited from the nearest
/// point of the domain, so the total mass is 1.
pub fn mollified_density(e: &ParticleEnsemble, grid: Grid2D, bandwidth: f64) -> Result<DensityField> {
    ensure_positive("bandwidth", bandwidth)?;
    let mut values = vec![0.0; grid.len()];
    let share = 1.0 / (e.len() as f64 * grid.cell_area());
    let rx = (MOLLIFIER_TRUNCATION * bandwidth / grid.dx()).ceil() as usize;
    let ry = (MOLLIFIER_TRUNCATION * bandwidth / grid.dy()).ceil() as usize;
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut wx = Vec::with_capacity(2 * rx + 1);
    let mut wy = Vec::with_capacity(2 * ry + 1);
    for p in e.positions() {
        let x = p[0].clamp(grid.x_min(), grid.x_max());
        let y = p[1].clamp(grid.y_min(), grid.y_max());
        let (ci, cj) = grid.cell_of(x, y).expect("clamped into the grid");
        let (i0, i1) = (ci.saturating_sub(rx), (ci + rx).min(grid.nx() - 1));
        let (j0, j1) = (cj.saturating_sub(ry), (cj + ry).min(grid.ny() - 1));
        weights(&mut wx, i0..=i1, ci, |i| grid.x_center(i) - x, inv);
        weights(&mut wy, j0..=j1, cj, |j| grid.y_center(j) - y, inv);
        for (b, w2) in wy.iter().enumerate() {
            let row = grid.idx(0, j0 + b);
            for (a, w1) in wx.iter().enumerate() {
                values[row + i0 + a] += share * w1 * w2;
            }
        }
    }
    Ok(DensityField::from_raw(grid, values, e.time))
}

/// Normalized Gaussian weights over `range`; all weight on `center` if the
/// Gaussian underflows everywhere.
fn weights(out: &mut Vec<f64>, range: std::ops::RangeInclusive<usize>, center: usize, dist: impl Fn(usize) -> f64, inv: f64) {
    out.clear();
    let start = *range.start();
    out.extend(range.map(|k| (-dist(k).powi(2) * inv).exp()));
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|w| *w /= s);
    } else {
        out.iter_mut().for_each(|w| *w = 0.0);
        out[center - start] = 1.0;
    }
}
