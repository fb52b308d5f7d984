//! Particle containers and seeded sampling from grid densities.
//!
//! Each particle owns a ChaCha8 stream selected by its index, so every draw
//! depends only on `(seed, particle index, draw count)` and never on the
//! order in which particles are visited.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{MotError, Result};
use crate::grid::DensityField;

const NOISE_TAG: u64 = 0x6e6f_6973_655f_7374;
const SAMPLE_TAG: u64 = 0x7361_6d70_6c65_5f69;

/// splitmix64 finalizer, used to derive independent sub-seeds.
pub(crate) fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn particle_stream(seed: u64, tag: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, tag));
    rng.set_stream(index as u64);
    rng
}

/// `n` particle positions, the current time and one noise stream per particle.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    positions: Vec<[f64; 2]>,
    pub time: f64,
    streams: Vec<ChaCha8Rng>,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<[f64; 2]>, seed: u64) -> Result<Self> {
        if positions.is_empty() {
            return Err(MotError::param("n", "ensemble needs at least one particle"));
        }
        if let Some(k) = positions.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(MotError::param("positions", format!("particle {k} is not finite")));
        }
        let streams = (0..positions.len())
            .map(|i| particle_stream(seed, NOISE_TAG, i))
            .collect();
        Ok(Self {
            positions,
            time: 0.0,
            streams,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.positions
    }

    /// Next standard 2D normal increment for particle `i`.
    #[inline]
    pub(crate) fn gaussian_pair(&mut self, i: usize) -> [f64; 2] {
        let r = &mut self.streams[i];
        [r.sample(StandardNormal), r.sample(StandardNormal)]
    }

    /// Mean position and second moments, mostly for quick inspection.
    pub fn mean(&self) -> [f64; 2] {
        let n = self.len() as f64;
        let s = self.positions.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }
}

/// `n` i.i.d. draws from the piecewise-constant density `rho`: a cell is
/// picked with probability proportional to its mass, then a uniform point
/// inside it. Deterministic in `(rho, n, seed)`.
pub fn sample_particles_from_density(rho: &DensityField, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(MotError::param("n", "must be >= 1"));
    }
    let positions = sample_positions(rho, n, seed)?;
    ParticleEnsemble::new(positions, seed)
}

pub(crate) fn sample_positions(rho: &DensityField, n: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    let g = *rho.grid();
    let mut cumulative = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    for v in rho.values() {
        acc += v;
        cumulative.push(acc);
    }
    if !(acc > 0.0) {
        return Err(MotError::param("rho", "cannot sample from a zero-mass density"));
    }
    let positions = (0..n)
        .map(|i| {
            let mut rng = particle_stream(seed, SAMPLE_TAG, i);
            let u = rng.gen::<f64>() * acc;
            let k = cumulative.partition_point(|c| *c <= u).min(g.len() - 1);
            let (ci, cj) = (k % g.nx(), k / g.nx());
            let x = g.x_center(ci) + (rng.gen::<f64>() - 0.5) * g.dx();
            let y = g.y_center(cj) + (rng.gen::<f64>() - 0.5) * g.dy();
            [x, y]
        })
        .collect();
    Ok(positions)
}
