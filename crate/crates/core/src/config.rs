//! Simulation parameters and the `key = value` config format.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! `D`, `eps` and `t_end` are required; every other key has a default (see
//! [`SimConfig::new`]). Unknown keys and repeated keys are rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ensure_finite, ensure_positive, MotError, Result};
use crate::grid::Grid2D;

/// Centered, reflection-symmetric initial densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Gaussian { sigma: f64 },
    AnisotropicGaussian { sigma_x: f64, sigma_y: f64 },
    Disc { radius: f64 },
}

/// Which force drives the grid solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceMode {
    /// Row/column sums of the sign kernel.
    Singular,
    /// Sign kernel applied to the Gaussian-mollified density.
    Regularized,
    /// Pure diffusion (heat equation).
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limiter {
    None,
    Minmod,
}

/// Pair-sum strategy for the particle drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftMode {
    Direct,
    CellList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Diffusion coefficient.
    pub d: f64,
    /// Regularization length.
    pub eps: f64,
    /// Particle time step.
    pub dt: f64,
    pub t_end: f64,
    pub grid: Grid2D,
    pub n_particles: usize,
    pub seed: u64,
    pub ic: InitialCondition,
    pub mass: f64,
    pub force_mode: ForceMode,
    pub limiter: Limiter,
    pub drift_mode: DriftMode,
    /// Kernel truncation radius in units of `eps` (cell-list drift only).
    pub cutoff: f64,
    /// Time between diagnostics rows.
    pub output_interval: f64,
    /// Gaussian deposition width for particle density estimates.
    pub bandwidth: f64,
    /// CFL safety factor of the grid solver.
    pub cfl: f64,
    /// Random directions for sliced transport estimates.
    pub n_proj: usize,
    /// Exponent of the exponential-moment diagnostic.
    pub exp_lambda: f64,
}

pub const REQUIRED_KEYS: [&str; 3] = ["D", "eps", "t_end"];

impl SimConfig {
    /// Defaults: 100x100 grid on `[-2.5, 2.5]^2`, unit-mass Gaussian with
    /// `sigma = 0.5`, singular force, no limiter, `dt = 1e-3`.
    pub fn new(d: f64, eps: f64, t_end: f64) -> Self {
        Self {
            d,
            eps,
            dt: 1e-3,
            t_end,
            grid: Grid2D::symmetric(100, 2.5).expect("default grid is valid"),
            n_particles: 10_000,
            seed: 0,
            ic: InitialCondition::Gaussian { sigma: 0.5 },
            mass: 1.0,
            force_mode: ForceMode::Singular,
            limiter: Limiter::None,
            drift_mode: DriftMode::CellList,
            cutoff: 6.0,
            output_interval: 0.1,
            bandwidth: 0.1,
            cfl: 0.4,
            n_proj: 64,
            exp_lambda: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("D", self.d)?;
        ensure_positive("eps", self.eps)?;
        ensure_positive("dt", self.dt)?;
        ensure_finite("t_end", self.t_end)?;
        if self.t_end < 0.0 {
            return Err(MotError::param("t_end", "must be >= 0"));
        }
        ensure_positive("mass", self.mass)?;
        ensure_positive("cutoff", self.cutoff)?;
        ensure_positive("output_interval", self.output_interval)?;
        ensure_positive("bandwidth", self.bandwidth)?;
        ensure_positive("cfl", self.cfl)?;
        ensure_positive("exp_lambda", self.exp_lambda)?;
        if self.n_particles == 0 {
            return Err(MotError::param("n_particles", "must be >= 1"));
        }
        if self.n_proj == 0 {
            return Err(MotError::param("n_proj", "must be >= 1"));
        }
        match self.ic {
            InitialCondition::Gaussian { sigma } => {
                ensure_positive("ic_sigma", sigma)?;
            }
            InitialCondition::AnisotropicGaussian { sigma_x, sigma_y } => {
                ensure_positive("ic_sigma_x", sigma_x)?;
                ensure_positive("ic_sigma_y", sigma_y)?;
            }
            InitialCondition::Disc { radius } => {
                ensure_positive("ic_radius", radius)?;
            }
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| MotError::io(path, e))?;
        text.parse()
    }

    /// Render in the config format; parsing the result yields `self` again.
    pub fn to_config_string(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            writeln!(s, "{k} = {v}").unwrap();
        };
        kv("D", fmt_f(self.d));
        kv("eps", fmt_f(self.eps));
        kv("dt", fmt_f(self.dt));
        kv("t_end", fmt_f(self.t_end));
        kv("nx", g.nx().to_string());
        kv("ny", g.ny().to_string());
        kv("x_min", fmt_f(g.x_min()));
        kv("x_max", fmt_f(g.x_max()));
        kv("y_min", fmt_f(g.y_min()));
        kv("y_max", fmt_f(g.y_max()));
        kv("n_particles", self.n_particles.to_string());
        kv("seed", self.seed.to_string());
        match self.ic {
            InitialCondition::Gaussian { sigma } => {
                kv("ic", "gaussian".into());
                kv("ic_sigma", fmt_f(sigma));
            }
            InitialCondition::AnisotropicGaussian { sigma_x, sigma_y } => {
                kv("ic", "anisotropic".into());
                kv("ic_sigma_x", fmt_f(sigma_x));
                kv("ic_sigma_y", fmt_f(sigma_y));
            }
            InitialCondition::Disc { radius } => {
                kv("ic", "disc".into());
                kv("ic_radius", fmt_f(radius));
            }
        }
        kv("mass", fmt_f(self.mass));
        kv(
            "force_mode",
            match self.force_mode {
                ForceMode::Singular => "singular",
                ForceMode::Regularized => "regularized",
                ForceMode::Off => "off",
            }
            .into(),
        );
        kv(
            "limiter",
            match self.limiter {
                Limiter::None => "none",
                Limiter::Minmod => "minmod",
            }
            .into(),
        );
        kv(
            "drift_mode",
            match self.drift_mode {
                DriftMode::Direct => "direct",
                DriftMode::CellList => "cell_list",
            }
            .into(),
        );
        kv("cutoff", fmt_f(self.cutoff));
        kv("output_interval", fmt_f(self.output_interval));
        kv("bandwidth", fmt_f(self.bandwidth));
        kv("cfl", fmt_f(self.cfl));
        kv("n_proj", self.n_proj.to_string());
        kv("exp_lambda", fmt_f(self.exp_lambda));
        s
    }
}

// `{:?}` on f64 prints the shortest representation that round-trips.
fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

impl FromStr for SimConfig {
    type Err = MotError;

    fn from_str(text: &str) -> Result<Self> {
        let mut map: HashMap<String, (usize, String)> = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let lineno = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| MotError::ConfigSyntax {
                line: lineno,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(MotError::ConfigSyntax {
                    line: lineno,
                    reason: "empty key or value".into(),
                });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(MotError::UnknownKey(key.to_string()));
            }
            if map.insert(key.to_string(), (lineno, value.to_string())).is_some() {
                return Err(MotError::ConfigSyntax {
                    line: lineno,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        let mut p = Parser { map };
        let d = p.required("D")?;
        let eps = p.required("eps")?;
        let t_end = p.required("t_end")?;
        let mut c = SimConfig::new(d, eps, t_end);

        c.dt = p.get("dt")?.unwrap_or(c.dt);
        let nx = p.get("nx")?.unwrap_or(c.grid.nx());
        let ny = p.get("ny")?.unwrap_or(c.grid.ny());
        let x_min = p.get("x_min")?.unwrap_or(c.grid.x_min());
        let x_max = p.get("x_max")?.unwrap_or(c.grid.x_max());
        let y_min = p.get("y_min")?.unwrap_or(c.grid.y_min());
        let y_max = p.get("y_max")?.unwrap_or(c.grid.y_max());
        c.grid = Grid2D::new(nx, ny, x_min, x_max, y_min, y_max)?;
        c.n_particles = p.get("n_particles")?.unwrap_or(c.n_particles);
        c.seed = p.get("seed")?.unwrap_or(c.seed);
        c.mass = p.get("mass")?.unwrap_or(c.mass);

        let ic_name: String = p.get("ic")?.unwrap_or_else(|| "gaussian".to_string());
        let sigma = p.get::<f64>("ic_sigma")?;
        let sigma_x = p.get::<f64>("ic_sigma_x")?;
        let sigma_y = p.get::<f64>("ic_sigma_y")?;
        let radius = p.get::<f64>("ic_radius")?;
        c.ic = match ic_name.as_str() {
            "gaussian" => InitialCondition::Gaussian {
                sigma: sigma.unwrap_or(0.5),
            },
            "anisotropic" => InitialCondition::AnisotropicGaussian {
                sigma_x: sigma_x.ok_or(MotError::MissingKey("ic_sigma_x"))?,
                sigma_y: sigma_y.ok_or(MotError::MissingKey("ic_sigma_y"))?,
            },
            "disc" => InitialCondition::Disc {
                radius: radius.ok_or(MotError::MissingKey("ic_radius"))?,
            },
            other => return Err(MotError::param("ic", format!("unknown initial condition `{other}`"))),
        };

        if let Some(v) = p.get::<String>("force_mode")? {
            c.force_mode = match v.as_str() {
                "singular" => ForceMode::Singular,
                "regularized" => ForceMode::Regularized,
                "off" => ForceMode::Off,
                o => return Err(MotError::param("force_mode", format!("unknown mode `{o}`"))),
            };
        }
        if let Some(v) = p.get::<String>("limiter")? {
            c.limiter = match v.as_str() {
                "none" => Limiter::None,
                "minmod" => Limiter::Minmod,
                o => return Err(MotError::param("limiter", format!("unknown limiter `{o}`"))),
            };
        }
        if let Some(v) = p.get::<String>("drift_mode")? {
            c.drift_mode = match v.as_str() {
                "direct" => DriftMode::Direct,
                "cell_list" => DriftMode::CellList,
                o => return Err(MotError::param("drift_mode", format!("unknown mode `{o}`"))),
            };
        }
        c.cutoff = p.get("cutoff")?.unwrap_or(c.cutoff);
        c.output_interval = p.get("output_interval")?.unwrap_or(c.output_interval);
        c.bandwidth = p.get("bandwidth")?.unwrap_or(c.bandwidth);
        c.cfl = p.get("cfl")?.unwrap_or(c.cfl);
        c.n_proj = p.get("n_proj")?.unwrap_or(c.n_proj);
        c.exp_lambda = p.get("exp_lambda")?.unwrap_or(c.exp_lambda);
        c.validate()?;
        Ok(c)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "D",
    "eps",
    "dt",
    "t_end",
    "nx",
    "ny",
    "x_min",
    "x_max",
    "y_min",
    "y_max",
    "n_particles",
    "seed",
    "ic",
    "ic_sigma",
    "ic_sigma_x",
    "ic_sigma_y",
    "ic_radius",
    "mass",
    "force_mode",
    "limiter",
    "drift_mode",
    "cutoff",
    "output_interval",
    "bandwidth",
    "cfl",
    "n_proj",
    "exp_lambda",
];

struct Parser {
    map: HashMap<String, (usize, String)>,
}

impl Parser {
    fn get<T: FromStr>(&mut self, key: &'static str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| MotError::ConfigSyntax {
                line,
                reason: format!("cannot parse value `{v}` for key `{key}`"),
            }),
        }
    }

    fn required<T: FromStr>(&mut self, key: &'static str) -> Result<T> {
        self.get(key)?.ok_or(MotError::MissingKey(key))
    }
}
