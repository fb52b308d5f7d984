//! Wasserstein-1 distances with Euclidean cost.
//!
//! - [`w1_exact_1d`]: equal-weight samples on a line, by order statistics.
//! - [`w1_exact_small`]: exact transport LP for measures with at most
//!   [`EXACT_ATOM_CAP`] atoms, solved by successive shortest paths.
//! - [`sliced_w1`]: mean of 1D distances over random projections, a lower
//!   bound of the exact distance that scales to large ensembles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::{mix_seed, ParticleEnsemble};
use crate::error::{MotError, Result};
use crate::grid::{DensityField, Grid2D};

/// Largest support size accepted by [`w1_exact_small`].
pub const EXACT_ATOM_CAP: usize = 512;

/// Accepted relative duality gap of the exact solver.
pub const DUALITY_TOLERANCE: f64 = 1e-9;

const RESAMPLE_TAG: u64 = 0x7265_7361_6d70_6c65;
const PROJECTION_TAG: u64 = 0x7072_6f6a_6563_7473;

/// Weighted point cloud with unit total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Weights are rescaled to sum to one; zero-weight atoms are dropped.
    pub fn new(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(MotError::param("weights", "need one weight per point"));
        }
        if let Some(k) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(MotError::param("points", format!("point {k} is not finite")));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(MotError::param("weights", format!("weight {k} is {}", weights[k])));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(MotError::param("weights", "total weight must be positive"));
        }
        let (points, weights) = points
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(p, w)| (p, w / total))
            .unzip();
        Ok(Self { points, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<[f64; 2]>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn from_ensemble(e: &ParticleEnsemble) -> Self {
        let n = e.len() as f64;
        Self {
            points: e.positions().to_vec(),
            weights: vec![1.0 / n; e.len()],
        }
    }

    /// Cell centers carrying cell masses.
    pub fn from_density(rho: &DensityField) -> Result<Self> {
        let g = rho.grid();
        let mut points = Vec::with_capacity(g.len());
        let mut weights = Vec::with_capacity(g.len());
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                points.push([g.x_center(i), g.y_center(j)]);
                weights.push(rho.get(i, j));
            }
        }
        Self::new(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> [f64; 2] {
        self.points
            .iter()
            .zip(&self.weights)
            .fold([0.0, 0.0], |a, (p, w)| [a[0] + w * p[0], a[1] + w * p[1]])
    }

    /// Same measure moved by `v`.
    pub fn translated(&self, v: [f64; 2]) -> Self {
        Self {
            points: self.points.iter().map(|p| [p[0] + v[0], p[1] + v[1]]).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Coarsen `rho` by 2x2 blocks until it has at most `cap` cells, then
/// convert to a measure.
pub fn coarse_measure(rho: &DensityField, cap: usize) -> Result<DiscreteMeasure> {
    let mut r = rho.clone();
    while r.grid().len() > cap {
        if r.grid().nx() == 1 && r.grid().ny() == 1 {
            break;
        }
        r = r.coarsened();
    }
    DiscreteMeasure::from_density(&r)
}

/// Grid that [`coarse_measure`] would use for `grid`.
pub fn coarse_grid(grid: &Grid2D, cap: usize) -> Grid2D {
    let mut g = *grid;
    while g.len() > cap && g.len() > 1 {
        g = g.coarsened();
    }
    g
}

/// Histogram of an ensemble on `grid` (cell centers, particle counts).
/// Particles outside the grid are assigned to the nearest boundary cell.
pub fn binned_measure(e: &ParticleEnsemble, grid: &Grid2D) -> Result<DiscreteMeasure> {
    let mut counts = vec![0.0; grid.len()];
    for p in e.positions() {
        let x = p[0].clamp(grid.x_min(), grid.x_max());
        let y = p[1].clamp(grid.y_min(), grid.y_max());
        let (i, j) = grid.cell_of(x, y).expect("clamped into the grid");
        counts[grid.idx(i, j)] += 1.0;
    }
    let points = (0..grid.ny())
        .flat_map(|j| (0..grid.nx()).map(move |i| (i, j)))
        .map(|(i, j)| [grid.x_center(i), grid.y_center(j)])
        .collect();
    DiscreteMeasure::new(points, counts)
}

/// `(1/N) sum |a_(i) - b_(i)|` over order statistics.
pub fn w1_exact_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MotError::param(
            "samples",
            format!("unequal counts {} and {}; resample first", a.len(), b.len()),
        ));
    }
    if a.is_empty() {
        return Err(MotError::param("samples", "need at least one sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let s: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / a.len() as f64)
}

/// `int |F_a - F_b|` for weighted point sets on a line (each of unit mass).
fn w1_weighted_1d(a: &mut [(f64, f64)], b: &mut [(f64, f64)]) -> f64 {
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    b.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut x = a[0].0.min(b[0].0);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let xa = a.get(i).map_or(f64::INFINITY, |p| p.0);
        let xb = b.get(j).map_or(f64::INFINITY, |p| p.0);
        let next = xa.min(xb);
        total += (fa - fb).abs() * (next - x);
        x = next;
        while i < a.len() && a[i].0 == next {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == next {
            fb += b[j].1;
            j += 1;
        }
    }
    total
}

/// Estimate, standard error and the per-direction values.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub per_direction: Vec<f64>,
}

/// Mean of the 1D distances between the projections of `mu` and `nu` onto
/// `n_proj` directions drawn uniformly on the half circle.
pub fn sliced_w1(mu: &DiscreteMeasure, nu: &DiscreteMeasure, n_proj: usize, seed: u64) -> Result<SlicedEstimate> {
    if n_proj == 0 {
        return Err(MotError::param("n_proj", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, PROJECTION_TAG));
    let mut pa: Vec<(f64, f64)> = Vec::with_capacity(mu.len());
    let mut pb: Vec<(f64, f64)> = Vec::with_capacity(nu.len());
    let per_direction: Vec<f64> = (0..n_proj)
        .map(|_| {
            let theta = rng.gen::<f64>() * PI;
            let (s, c) = theta.sin_cos();
            pa.clear();
            pb.clear();
            pa.extend(mu.points.iter().zip(&mu.weights).map(|(p, w)| (c * p[0] + s * p[1], *w)));
            pb.extend(nu.points.iter().zip(&nu.weights).map(|(p, w)| (c * p[0] + s * p[1], *w)));
            w1_weighted_1d(&mut pa, &mut pb)
        })
        .collect();
    let n = n_proj as f64;
    let estimate = per_direction.iter().sum::<f64>() / n;
    let stderr = if n_proj > 1 {
        let var = per_direction.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    Ok(SlicedEstimate {
        estimate,
        stderr,
        per_direction,
    })
}

/// `n` i.i.d. draws from `mu`, deterministic in `seed`.
pub fn resample_to_equal(mu: &DiscreteMeasure, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut cumulative = Vec::with_capacity(mu.len());
    let mut acc = 0.0;
    for w in &mu.weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, RESAMPLE_TAG));
    (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let k = cumulative.partition_point(|c| *c <= u).min(mu.len() - 1);
            mu.points[k]
        })
        .collect()
}

/// `n` i.i.d. draws from the piecewise-constant density `rho`, uniform
/// within each cell.
pub fn resample_density(rho: &DensityField, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    let pts = crate::ensemble::sample_positions(rho, n, mix_seed(seed, RESAMPLE_TAG))?;
    DiscreteMeasure::uniform(pts)
}

/// Optimal transport plan summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactW1 {
    /// Primal cost `sum f_ij |x_i - y_j|`.
    pub value: f64,
    /// Dual objective `sum a_i u_i + sum b_j v_j`.
    pub dual: f64,
    /// Nonzero flows `(i, j, mass)`.
    pub plan: Vec<(usize, usize, f64)>,
}

impl ExactW1 {
    pub fn gap(&self) -> f64 {
        self.value - self.dual
    }
}

/// Exact `W_1(mu, nu)`.
pub fn w1_exact_small(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    Ok(solve_transport(mu, nu)?.value)
}

/// Transportation LP by successive shortest paths with Dijkstra on reduced
/// costs. Fails if either support exceeds [`EXACT_ATOM_CAP`] or if the final
/// duality gap exceeds [`DUALITY_TOLERANCE`].
pub fn solve_transport(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<ExactW1> {
    let (n, m) = (mu.len(), nu.len());
    if n > EXACT_ATOM_CAP || m > EXACT_ATOM_CAP {
        return Err(MotError::Unsupported(format!(
            "exact transport is limited to {EXACT_ATOM_CAP} atoms (got {n} and {m}); use sliced_w1 or coarse_measure"
        )));
    }
    let cost: Vec<f64> = mu
        .points
        .iter()
        .flat_map(|p| nu.points.iter().map(move |q| (p[0] - q[0]).hypot(p[1] - q[1])))
        .collect();
    let c = |i: usize, j: usize| cost[i * m + j];

    let mut supply = mu.weights.clone();
    let mut demand = nu.weights.clone();
    let mut flow = vec![0.0; n * m];
    // potentials: sources 0..n, sinks n..n+m
    let mut pot = vec![0.0; n + m];
    let tiny = 1e-15;

    let mut dist = vec![0.0; n + m];
    let mut prev = vec![usize::MAX; n + m];
    let mut done = vec![false; n + m];
    loop {
        if supply.iter().all(|s| *s <= tiny) || demand.iter().all(|d| *d <= tiny) {
            break;
        }
        dist.fill(f64::INFINITY);
        prev.fill(usize::MAX);
        done.fill(false);
        for i in 0..n {
            if supply[i] > tiny {
                dist[i] = 0.0;
            }
        }
        // dense Dijkstra
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (v, d) in dist.iter().enumerate() {
                if !done[v] && *d < best {
                    best = *d;
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < n {
                for j in 0..m {
                    let v = n + j;
                    let nd = best + (c(u, j) + pot[u] - pot[v]).max(0.0);
                    if nd < dist[v] {
                        dist[v] = nd;
                        prev[v] = u;
                    }
                }
            } else {
                let j = u - n;
                for i in 0..n {
                    if flow[i * m + j] > 0.0 {
                        let nd = best + (-c(i, j) + pot[u] - pot[i]).max(0.0);
                        if nd < dist[i] {
                            dist[i] = nd;
                            prev[i] = u;
                        }
                    }
                }
            }
        }
        let target = (0..m)
            .filter(|j| demand[*j] > tiny)
            .min_by(|a, b| dist[n + a].total_cmp(&dist[n + b]));
        let Some(jt) = target else { break };
        let dt = dist[n + jt];
        if !dt.is_finite() {
            return Err(MotError::Numerical {
                time: 0.0,
                reason: "transport solver found no augmenting path".into(),
            });
        }
        for v in 0..n + m {
            pot[v] += dist[v].min(dt);
        }
        // bottleneck along the path back to a source with supply
        let mut amount = demand[jt];
        let mut v = n + jt;
        let src = loop {
            let u = prev[v];
            if v < n {
                if u == usize::MAX {
                    break v;
                }
                amount = amount.min(flow[v * m + (u - n)]);
            }
            v = u;
        };
        amount = amount.min(supply[src]);
        let mut v = n + jt;
        while v != src {
            let u = prev[v];
            if v >= n {
                flow[u * m + (v - n)] += amount;
            } else {
                let k = v * m + (u - n);
                flow[k] = (flow[k] - amount).max(0.0);
            }
            v = u;
        }
        supply[src] -= amount;
        demand[jt] -= amount;
    }

    let mut value = 0.0;
    let mut plan = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let f = flow[i * m + j];
            if f > 0.0 {
                value += f * c(i, j);
                plan.push((i, j, f));
            }
        }
    }
    // feasible dual from the sink potentials
    let v: Vec<f64> = (0..m).map(|j| pot[n + j]).collect();
    let mut dual: f64 = v.iter().zip(&nu.weights).map(|(v, b)| v * b).sum();
    for i in 0..n {
        let u = (0..m).map(|j| c(i, j) - v[j]).fold(f64::INFINITY, f64::min);
        dual += mu.weights[i] * u;
    }
    let out = ExactW1 { value, dual, plan };
    if out.gap().abs() > DUALITY_TOLERANCE * value.max(1.0) {
        return Err(MotError::Tolerance(format!(
            "transport duality gap {:.3e} exceeds {DUALITY_TOLERANCE:e}",
            out.gap()
        )));
    }
    Ok(out)
}
