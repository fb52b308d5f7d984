//! Finite-volume solver for `d_t rho = div(D grad rho - F[rho] rho)` on a
//! closed box.
//!
//! The right-hand side is written as `div(rho * grad(D ln rho + U, D ln rho + V))`
//! with `grad U = -F_x`, `grad V = -F_y`. At each interface the transport
//! velocity is the negated centered difference of `D ln rho + U`, and the flux
//! is upwinded on its sign. Optional minmod (MUSCL) reconstruction replaces
//! the donor cell value by its interface extrapolation. Time stepping is
//! Heun's method (two-stage SSP Runge-Kutta). Boundary fluxes are zero.

use crate::config::{ForceMode, Limiter, SimConfig};
use crate::diagnostics::{density_floor, DiagnosticsRecord};
use crate::error::{MotError, Result};
use crate::forces::{gaussian_mollify, potentials_uv};
use crate::grid::{DensityField, Grid2D};
use crate::ic::make_ic;

/// Interface speeds (positive = towards increasing index).
///
/// `ax[j * (nx + 1) + i]` is the velocity across the interface left of cell
/// `(i, j)`; `ay[j * nx + i]` the one below it. Boundary entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceVelocity {
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
}

impl InterfaceVelocity {
    pub fn max_abs(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (m(&self.ax), m(&self.ay))
    }
}

/// Interface fluxes in the same layout as [`InterfaceVelocity`].
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    pub f_half: Vec<f64>,
    pub g_half: Vec<f64>,
}

#[inline]
fn xi(g: &Grid2D, i: usize, j: usize) -> usize {
    j * (g.nx() + 1) + i
}

#[inline]
fn yi(g: &Grid2D, i: usize, j: usize) -> usize {
    j * g.nx() + i
}

/// Transport velocity `-(D (ln rho_R - ln rho_L) + U_R - U_L) / dx` at every
/// interior x-interface, likewise in y with `V`. Densities below `floor` are
/// raised to it before taking logarithms.
pub fn interface_velocity(rho: &DensityField, u: &[f64], v: &[f64], d: f64, floor: f64) -> InterfaceVelocity {
    let g = *rho.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let logs: Vec<f64> = rho.values().iter().map(|r| r.max(floor).ln()).collect();
    let mut ax = vec![0.0; (nx + 1) * ny];
    let mut ay = vec![0.0; nx * (ny + 1)];
    for j in 0..ny {
        for i in 1..nx {
            let (l, r) = (g.idx(i - 1, j), g.idx(i, j));
            ax[xi(&g, i, j)] = -(d * (logs[r] - logs[l]) + (u[r] - u[l])) / g.dx();
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (b, t) = (g.idx(i, j - 1), g.idx(i, j));
            ay[yi(&g, i, j)] = -(d * (logs[t] - logs[b]) + (v[t] - v[b])) / g.dy();
        }
    }
    InterfaceVelocity { ax, ay }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a > 0.0 {
        a.min(b)
    } else {
        a.max(b)
    }
}

/// Minmod-limited interface values of one line: `(east, west)` faces of each
/// cell. End cells use zero slope.
pub fn minmod_reconstruct(line: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = line.len();
    let mut east = line.to_vec();
    let mut west = line.to_vec();
    for k in 1..n.saturating_sub(1) {
        let s = minmod(line[k + 1] - line[k], line[k] - line[k - 1]);
        east[k] = line[k] + 0.5 * s;
        west[k] = line[k] - 0.5 * s;
    }
    (east, west)
}

/// `F = [a]+ rho_L + [a]- rho_R` on every interface.
pub fn upwind_flux(rho: &DensityField, vel: &InterfaceVelocity, limiter: Limiter) -> FluxSet {
    let g = *rho.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let vals = rho.values();
    let mut f_half = vec![0.0; (nx + 1) * ny];
    let mut g_half = vec![0.0; nx * (ny + 1)];

    let mut line = vec![0.0; nx.max(ny)];
    for j in 0..ny {
        let row = &vals[j * nx..(j + 1) * nx];
        let (east, west) = match limiter {
            Limiter::None => (row.to_vec(), row.to_vec()),
            Limiter::Minmod => minmod_reconstruct(row),
        };
        for i in 1..nx {
            let a = vel.ax[xi(&g, i, j)];
            f_half[xi(&g, i, j)] = a.max(0.0) * east[i - 1] + a.min(0.0) * west[i];
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            line[j] = vals[g.idx(i, j)];
        }
        let col = &line[..ny];
        let (north, south) = match limiter {
            Limiter::None => (col.to_vec(), col.to_vec()),
            Limiter::Minmod => minmod_reconstruct(col),
        };
        for j in 1..ny {
            let a = vel.ay[yi(&g, i, j)];
            g_half[yi(&g, i, j)] = a.max(0.0) * north[j - 1] + a.min(0.0) * south[j];
        }
    }
    FluxSet { f_half, g_half }
}

/// `-(F_{i+1/2} - F_{i-1/2}) / dx - (G_{j+1/2} - G_{j-1/2}) / dy`.
pub fn flux_divergence(g: &Grid2D, flux: &FluxSet) -> Vec<f64> {
    let mut rate = vec![0.0; g.len()];
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let fx = (flux.f_half[xi(g, i + 1, j)] - flux.f_half[xi(g, i, j)]) / g.dx();
            let fy = (flux.g_half[yi(g, i, j + 1)] - flux.g_half[yi(g, i, j)]) / g.dy();
            rate[g.idx(i, j)] = -fx - fy;
        }
    }
    rate
}

/// Solver state between steps.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub rho: DensityField,
    pub step_count: u64,
    /// Last accepted time step.
    pub dt_actual: f64,
    pub config: SimConfig,
    /// Mass removed by clipping negative values in the last step.
    pub clipped_last: f64,
    /// Largest per-step clipped mass relative to the total, over the run.
    pub clipped_max_rel: f64,
    floor: f64,
    mass0: f64,
}

struct Rate {
    rate: Vec<f64>,
    max_speed: (f64, f64),
}

impl SolverState {
    pub fn new(config: SimConfig, rho: DensityField) -> Result<Self> {
        config.validate()?;
        if rho.grid() != &config.grid {
            return Err(MotError::param("rho", "density grid differs from config grid"));
        }
        let floor = density_floor(&rho);
        let mass0 = rho.mass();
        Ok(Self {
            rho,
            step_count: 0,
            dt_actual: 0.0,
            config,
            clipped_last: 0.0,
            clipped_max_rel: 0.0,
            floor,
            mass0,
        })
    }

    pub fn from_config(config: SimConfig) -> Result<Self> {
        let rho = make_ic(&config)?;
        Self::new(config, rho)
    }

    pub fn time(&self) -> f64 {
        self.rho.time
    }

    /// Initial mass, the reference for conservation checks.
    pub fn initial_mass(&self) -> f64 {
        self.mass0
    }

    /// Potentials `(U, V)` that drive the advective part for the current mode.
    pub fn potentials(&self, rho: &DensityField) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = rho.grid().len();
        Ok(match self.config.force_mode {
            ForceMode::Off => (vec![0.0; n], vec![0.0; n]),
            ForceMode::Singular => potentials_uv(rho),
            ForceMode::Regularized => potentials_uv(&gaussian_mollify(rho, self.config.eps)?),
        })
    }

    fn rate(&self, rho: &DensityField) -> Result<Rate> {
        let (u, v) = self.potentials(rho)?;
        let vel = interface_velocity(rho, &u, &v, self.config.d, self.floor);
        let flux = upwind_flux(rho, &vel, self.config.limiter);
        Ok(Rate {
            rate: flux_divergence(rho.grid(), &flux),
            max_speed: vel.max_abs(),
        })
    }

    fn cfl_dt(&self, max_speed: (f64, f64)) -> f64 {
        let g = &self.config.grid;
        let mut lim = g.dx().min(g.dy()).powi(2) / (4.0 * self.config.d);
        if max_speed.0 > 0.0 {
            lim = lim.min(g.dx() / max_speed.0);
        }
        if max_speed.1 > 0.0 {
            lim = lim.min(g.dy() / max_speed.1);
        }
        self.config.cfl * lim
    }

    /// Largest step the CFL rule accepts for the current state.
    pub fn stable_dt(&self) -> Result<f64> {
        Ok(self.cfl_dt(self.rate(&self.rho)?.max_speed))
    }

    /// One Heun step of exactly `dt`; fails if `dt` exceeds [`Self::stable_dt`].
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let r0 = self.rate(&self.rho)?;
        let limit = self.cfl_dt(r0.max_speed);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(MotError::param(
                "dt",
                format!("{dt} outside (0, {limit}] allowed by the CFL rule"),
            ));
        }
        self.heun(r0, dt)
    }

    /// One Heun step of `min(stable_dt, dt_cap)`; returns the step taken.
    pub fn step_adaptive(&mut self, dt_cap: f64) -> Result<f64> {
        let r0 = self.rate(&self.rho)?;
        let dt = self.cfl_dt(r0.max_speed).min(dt_cap);
        self.heun(r0, dt)?;
        Ok(dt)
    }

    fn heun(&mut self, r0: Rate, dt: f64) -> Result<()> {
        let g = *self.rho.grid();
        let t = self.rho.time;
        let mut clipped = 0.0;

        let mut stage: Vec<f64> = self
            .rho
            .values()
            .iter()
            .zip(&r0.rate)
            .map(|(p, r)| p + dt * r)
            .collect();
        clipped += clip(&mut stage, t, self.step_count)?;
        let stage_field = DensityField::from_raw(g, stage, t + dt);
        let r1 = self.rate(&stage_field)?;
        let mut next: Vec<f64> = self
            .rho
            .values()
            .iter()
            .zip(stage_field.values())
            .zip(&r1.rate)
            .map(|((p0, p1), r)| 0.5 * p0 + 0.5 * (p1 + dt * r))
            .collect();
        clipped += clip(&mut next, t, self.step_count)?;

        self.clipped_last = clipped * g.cell_area();
        self.clipped_max_rel = self.clipped_max_rel.max(self.clipped_last / self.mass0);
        if self.clipped_last > 1e-10 * self.mass0 {
            log::warn!(
                "step {}: clipped {:.3e} of mass {:.3e}",
                self.step_count,
                self.clipped_last,
                self.mass0
            );
        }
        self.rho.values_mut().copy_from_slice(&next);
        self.rho.time = t + dt;
        self.dt_actual = dt;
        self.step_count += 1;
        Ok(())
    }
}

/// Zero out negative entries, returning the removed (negative) density sum.
fn clip(values: &mut [f64], time: f64, step: u64) -> Result<f64> {
    let mut removed = 0.0;
    for (k, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(MotError::Numerical {
                time,
                reason: format!("non-finite density {v} in cell {k} at step {step}"),
            });
        }
        if *v < 0.0 {
            removed -= *v;
            *v = 0.0;
        }
    }
    Ok(removed)
}

/// What [`run_with`] should keep besides diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep a density snapshot every this much time (and at `t = 0`, `t_end`).
    pub snapshot_interval: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FvRun {
    pub state: SolverState,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<DensityField>,
}

/// Integrate from the configured initial condition to `t_end`.
pub fn run(config: &SimConfig) -> Result<FvRun> {
    run_with(config, RunOptions::default())
}

pub fn run_with(config: &SimConfig, opts: RunOptions) -> Result<FvRun> {
    let state = SolverState::from_config(config.clone())?;
    run_from(state, opts)
}

/// Event times `k * interval` up to `t_end`, with `t_end` itself appended.
fn event_times(interval: f64, t_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1u64;
    loop {
        let t = k as f64 * interval;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    if t_end > 0.0 {
        out.push(t_end);
    }
    out
}

pub fn run_from(mut state: SolverState, opts: RunOptions) -> Result<FvRun> {
    let t_end = state.config.t_end;
    let lambda = state.config.exp_lambda;
    let outputs = event_times(state.config.output_interval, t_end);
    let snaps = match opts.snapshot_interval {
        Some(s) if s > 0.0 => event_times(s, t_end),
        Some(_) => return Err(MotError::param("snapshot_interval", "must be > 0")),
        None => Vec::new(),
    };
    let mut events: Vec<(f64, bool, bool)> = Vec::new();
    let (mut a, mut b) = (0, 0);
    while a < outputs.len() || b < snaps.len() {
        let ta = outputs.get(a).copied().unwrap_or(f64::INFINITY);
        let tb = snaps.get(b).copied().unwrap_or(f64::INFINITY);
        if (ta - tb).abs() <= 1e-12 * ta.max(1.0) {
            events.push((ta, true, true));
            a += 1;
            b += 1;
        } else if ta < tb {
            events.push((ta, true, false));
            a += 1;
        } else {
            events.push((tb, false, true));
            b += 1;
        }
    }

    let mut records = vec![DiagnosticsRecord::from_density(&state.rho, lambda)?];
    let mut snapshots = Vec::new();
    if opts.snapshot_interval.is_some() {
        snapshots.push(state.rho.clone());
    }
    for (target, record, snap) in events {
        while state.time() < target {
            let remaining = target - state.time();
            state.step_adaptive(remaining)?;
            if target - state.time() <= 1e-12 * target.max(1.0) {
                state.rho.time = target;
            }
        }
        if record {
            records.push(DiagnosticsRecord::from_density(&state.rho, lambda)?);
        }
        if snap {
            snapshots.push(state.rho.clone());
        }
    }
    Ok(FvRun {
        state,
        records,
        snapshots,
    })
}
