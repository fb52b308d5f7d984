//! Ready-made studies. Each preset fixes a base configuration and the
//! parameter ladder it sweeps; [`Plan::execute`] runs it and writes CSV or
//! snapshot files plus a matplotlib script that reads only those files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::config::{ForceMode, Limiter, SimConfig};
use crate::diagnostics::{l1_distance, relative_l2, DiagnosticsRecord};
use crate::ensemble::sample_particles_from_density;
use crate::error::{MotError, Result};
use crate::fv::{self, RunOptions};
use crate::grid::{DensityField, Grid2D};
use crate::ic::{heat_solution, make_ic};
use crate::io::{write_csv, write_density, write_diagnostics};
use crate::particles::{mollified_density, run_coupled, run_particles_from, GapRecord};
use crate::transport::{
    binned_measure, coarse_grid, coarse_measure, resample_density, sliced_w1, w1_exact_small, DiscreteMeasure,
    EXACT_ATOM_CAP,
};

/// Reference sample size when a grid density is compared with particles.
pub const REFERENCE_SAMPLES: usize = 200_000;

/// Heat-check tolerances.
pub const HEAT_MAX_ERROR: f64 = 0.02;
pub const HEAT_MIN_RATIO: f64 = 1.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Contour,
    Norms,
    NRate,
    EpsRate,
    Coupling,
    HeatCheck,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Contour,
        Preset::Norms,
        Preset::NRate,
        Preset::EpsRate,
        Preset::Coupling,
        Preset::HeatCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Contour => "contour",
            Preset::Norms => "norms",
            Preset::NRate => "n-rate",
            Preset::EpsRate => "eps-rate",
            Preset::Coupling => "coupling",
            Preset::HeatCheck => "heat-check",
        }
    }

    /// Base configuration used when no config file is given.
    pub fn default_config(self) -> SimConfig {
        match self {
            Preset::Contour => {
                let mut c = SimConfig::new(0.15, 0.1, 5.0);
                c.dt = 5e-3;
                c.output_interval = 0.5;
                c
            }
            Preset::Norms => {
                let mut c = SimConfig::new(0.15, 0.1, 5.0);
                c.output_interval = 0.1;
                c
            }
            Preset::NRate => {
                let mut c = SimConfig::new(0.15, 0.1, 0.5);
                c.force_mode = ForceMode::Regularized;
                c.limiter = Limiter::Minmod;
                c.dt = 5e-3;
                c.output_interval = 0.05;
                c
            }
            Preset::EpsRate => {
                let mut c = SimConfig::new(0.15, 0.1, 1.0);
                c.force_mode = ForceMode::Regularized;
                c.output_interval = 0.5;
                c
            }
            Preset::Coupling => {
                let mut c = SimConfig::new(0.15, 0.1, 1.0);
                c.force_mode = ForceMode::Regularized;
                c.limiter = Limiter::Minmod;
                c.dt = 5e-3;
                c.output_interval = 0.1;
                c
            }
            Preset::HeatCheck => {
                let mut c = SimConfig::new(0.15, 0.1, 1.0);
                c.force_mode = ForceMode::Off;
                c.output_interval = 0.5;
                c
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = MotError;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                MotError::param("preset", format!("unknown preset `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Command-line overrides; list values replace the preset's ladder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub d: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub grid: Option<usize>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
}

/// A preset with its base configuration and ladders.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub preset: Preset,
    pub config: SimConfig,
    pub d_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Plan {
    pub fn new(preset: Preset) -> Self {
        Self::with_config(preset, preset.default_config())
    }

    /// Preset ladders around a user-supplied base configuration. The
    /// heat check always switches the force off.
    pub fn with_config(preset: Preset, mut config: SimConfig) -> Self {
        let base = config.seed;
        let seeds = |k: u64| (base..base + k).collect::<Vec<_>>();
        if preset == Preset::HeatCheck {
            config.force_mode = ForceMode::Off;
        }
        let (d_list, eps_list, n_list, seeds) = match preset {
            Preset::Contour => (vec![config.d], vec![config.eps], vec![10_000], seeds(10)),
            Preset::Norms => (vec![0.15, 0.25, 0.35], vec![config.eps], vec![config.n_particles], seeds(1)),
            Preset::NRate => (vec![config.d], vec![config.eps], vec![2000, 4000, 8000], seeds(5)),
            Preset::EpsRate => (vec![config.d], vec![0.4, 0.2, 0.1, 0.05], vec![config.n_particles], seeds(1)),
            Preset::Coupling => (vec![config.d], vec![config.eps], vec![1000, 4000], seeds(5)),
            Preset::HeatCheck => (vec![config.d], vec![config.eps], vec![config.n_particles], seeds(1)),
        };
        let mut plan = Self {
            preset,
            config,
            d_list,
            eps_list,
            n_list,
            seeds,
        };
        plan.sync_scalars();
        plan
    }

    fn sync_scalars(&mut self) {
        self.config.d = self.d_list[0];
        self.config.eps = self.eps_list[0];
        self.config.n_particles = self.n_list[0];
        self.config.seed = self.seeds[0];
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        fn nonempty<T: Clone>(name: &'static str, v: &Option<Vec<T>>) -> Result<Option<Vec<T>>> {
            match v {
                Some(v) if v.is_empty() => Err(MotError::param(name, "empty list")),
                other => Ok(other.clone()),
            }
        }
        if let Some(v) = nonempty("D", &o.d)? {
            self.d_list = v;
        }
        if let Some(v) = nonempty("eps", &o.eps)? {
            self.eps_list = v;
        }
        if let Some(v) = nonempty("N", &o.n)? {
            self.n_list = v;
        }
        if let Some(n) = o.grid {
            let g = self.config.grid;
            self.config.grid = Grid2D::new(n, n, g.x_min(), g.x_max(), g.y_min(), g.y_max())?;
        }
        if let Some(t) = o.t_end {
            self.config.t_end = t;
        }
        let base = o.seed.unwrap_or(self.seeds[0]);
        let count = o.seeds.unwrap_or(self.seeds.len());
        if count == 0 {
            return Err(MotError::param("seeds", "must be >= 1"));
        }
        self.seeds = (base..base + count as u64).collect();
        self.sync_scalars();
        self.config.validate()?;
        for &d in &self.d_list {
            crate::error::ensure_positive("D", d)?;
        }
        for &e in &self.eps_list {
            crate::error::ensure_positive("eps", e)?;
        }
        if self.n_list.contains(&0) {
            return Err(MotError::param("N", "must be >= 1"));
        }
        Ok(())
    }

    /// Run the preset and write its files into `out`.
    pub fn execute(&self, out: &Path) -> Result<Outcome> {
        std::fs::create_dir_all(out).map_err(|e| MotError::io(out, e))?;
        let c = &self.config;
        match self.preset {
            Preset::HeatCheck => {
                let r = heat_check(c)?;
                r.write(out)
            }
            Preset::Norms => norms(c, &self.d_list)?.write(out),
            Preset::Contour => contour(c, &self.seeds)?.write(out),
            Preset::NRate => n_rate(c, &self.n_list, &self.seeds)?.write(out),
            Preset::EpsRate => eps_rate(c, &self.eps_list)?.write(out),
            Preset::Coupling => coupling(c, &self.n_list, &self.seeds)?.write(out),
        }
    }
}

/// Files written by a preset and a short human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    /// False when a built-in tolerance check failed.
    pub passed: bool,
}

fn write_script(out: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = out.join(name);
    let script = format!(
        "import csv\nimport os\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\nHERE = os.path.dirname(os.path.abspath(__file__))\n\n\ndef rows(name):\n    with open(os.path.join(HERE, name)) as f:\n        next(f)\n        return list(csv.DictReader(f))\n\n\n{body}"
    );
    std::fs::write(&p, script).map_err(|e| MotError::io(&p, e))?;
    files.push(p);
    Ok(())
}

// ---------------------------------------------------------------- heat check

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport {
    /// `(cells per side, relative L2 error at t_end)` for the base grid and
    /// the grid refined by 2.
    pub errors: [(usize, f64); 2],
    pub ratio: f64,
    pub seconds: f64,
}

impl HeatReport {
    pub fn passed(&self) -> bool {
        self.errors[0].1 <= HEAT_MAX_ERROR && self.ratio >= HEAT_MIN_RATIO
    }

    fn write(&self, out: &Path) -> Result<Outcome> {
        let p = out.join("heat_check.csv");
        write_csv(&p, &["n", "rel_l2_error"], self.errors.iter().map(|(n, e)| [n.to_string(), e.to_string()]))?;
        Ok(Outcome {
            files: vec![p],
            summary: vec![
                format!("n={} rel L2 error {:.4e}", self.errors[0].0, self.errors[0].1),
                format!("n={} rel L2 error {:.4e}", self.errors[1].0, self.errors[1].1),
                format!("refinement ratio {:.3} (need >= {HEAT_MIN_RATIO})", self.ratio),
                format!("{}", if self.passed() { "PASS" } else { "FAIL" }),
            ],
            passed: self.passed(),
        })
    }
}

/// Force-off grid runs on the configured grid and on one twice as fine,
/// compared with the free-space Gaussian heat kernel. The initial condition
/// must be an isotropic Gaussian.
pub fn heat_check(config: &SimConfig) -> Result<HeatReport> {
    let sigma = match config.ic {
        crate::config::InitialCondition::Gaussian { sigma } => sigma,
        _ => return Err(MotError::Unsupported("heat check needs a Gaussian initial condition".into())),
    };
    let start = Instant::now();
    let g = config.grid;
    let mut errors = [(0, 0.0); 2];
    for (k, n) in [g.nx(), 2 * g.nx()].into_iter().enumerate() {
        let mut c = config.clone();
        c.force_mode = ForceMode::Off;
        c.grid = Grid2D::new(n, n * g.ny() / g.nx(), g.x_min(), g.x_max(), g.y_min(), g.y_max())?;
        c.output_interval = c.t_end.max(f64::MIN_POSITIVE);
        let run = fv::run(&c)?;
        let exact = heat_solution(c.grid, sigma, c.d, c.t_end, c.mass)?;
        errors[k] = (n, relative_l2(&run.state.rho, &exact)?);
    }
    Ok(HeatReport {
        ratio: errors[0].1 / errors[1].1,
        errors,
        seconds: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------- norms

#[derive(Debug, Clone)]
pub struct NormsReport {
    pub series: Vec<(f64, fv::FvRun)>,
}

impl NormsReport {
    fn write(&self, out: &Path) -> Result<Outcome> {
        let mut files = Vec::new();
        let p = out.join("norms.csv");
        write_csv(
            &p,
            &["D", "time", "l2", "linf"],
            self.series.iter().flat_map(|(d, run)| {
                run.records
                    .iter()
                    .map(move |r| [d.to_string(), r.time.to_string(), r.l2.to_string(), r.linf.to_string()])
            }),
        )?;
        files.push(p);
        let mut summary = Vec::new();
        for (d, run) in &self.series {
            let p = out.join(format!("diagnostics_D{d}.csv"));
            write_diagnostics(&p, &run.records)?;
            files.push(p);
            let last = run.records.last().expect("at least one record");
            summary.push(format!("D={d}: L2(t_end)={:.5} Linf(t_end)={:.5}", last.l2, last.linf));
        }
        write_script(
            out,
            "plot_norms.py",
            "data = rows(\"norms.csv\")\nfig, ax = plt.subplots(1, 2, figsize=(10, 4))\nfor d in sorted({r[\"D\"] for r in data}, key=float):\n    sel = [r for r in data if r[\"D\"] == d]\n    t = [float(r[\"time\"]) for r in sel]\n    ax[0].plot(t, [float(r[\"l2\"]) for r in sel], label=\"D=\" + d)\n    ax[1].plot(t, [float(r[\"linf\"]) for r in sel], label=\"D=\" + d)\nax[0].set_title(\"L2 norm\")\nax[1].set_title(\"Linf norm\")\nfor a in ax:\n    a.set_xlabel(\"t\")\n    a.legend()\nfig.savefig(os.path.join(HERE, \"norms.png\"), dpi=120)\n",
            &mut files,
        )?;
        Ok(Outcome {
            files,
            summary,
            passed: true,
        })
    }
}

/// Grid runs of the configured force mode, one per diffusion coefficient.
pub fn norms(config: &SimConfig, d_list: &[f64]) -> Result<NormsReport> {
    let series = d_list
        .iter()
        .map(|&d| {
            let mut c = config.clone();
            c.d = d;
            log::info!("norms: D={d}");
            fv::run(&c).map(|r| (d, r))
        })
        .collect::<Result<_>>()?;
    Ok(NormsReport { series })
}

// ---------------------------------------------------------------- contour

#[derive(Debug, Clone, PartialEq)]
pub struct ContourReport {
    pub fv: DensityField,
    /// Seed average of the mollified particle densities.
    pub particles: DensityField,
}

impl ContourReport {
    fn write(&self, out: &Path) -> Result<Outcome> {
        let mut files = Vec::new();
        for (name, rho) in [("contour_fv.txt", &self.fv), ("contour_particles.txt", &self.particles)] {
            let p = out.join(name);
            write_density(&p, rho)?;
            files.push(p);
        }
        write_script(
            out,
            "plot_contour.py",
            "def density(name):\n    with open(os.path.join(HERE, name)) as f:\n        f.readline()\n        nx, ny = map(int, f.readline().split())\n        x0, x1, y0, y1 = map(float, f.readline().split())\n        f.readline()\n        vals = [list(map(float, f.readline().split())) for _ in range(ny)]\n    xs = [x0 + (i + 0.5) * (x1 - x0) / nx for i in range(nx)]\n    ys = [y0 + (j + 0.5) * (y1 - y0) / ny for j in range(ny)]\n    return xs, ys, vals\n\n\nfig, ax = plt.subplots(1, 2, figsize=(11, 5))\nfor a, name, title in zip(ax, [\"contour_fv.txt\", \"contour_particles.txt\"], [\"finite volume\", \"particles\"]):\n    xs, ys, v = density(name)\n    c = a.contour(xs, ys, v, 12)\n    a.set_title(title)\n    a.set_aspect(\"equal\")\n    fig.colorbar(c, ax=a)\nfig.savefig(os.path.join(HERE, \"contour.png\"), dpi=120)\n",
            &mut files,
        )?;
        Ok(Outcome {
            files,
            summary: vec![
                format!("grid density at t={}", self.fv.time),
                format!(
                    "L1 distance grid vs particles: {:.4}",
                    l1_distance(&self.fv, &self.particles)?
                ),
            ],
            passed: true,
        })
    }
}

/// Grid solution at `t_end` next to the seed-averaged mollified particle
/// density (`n_particles` per seed, deposited with `bandwidth`).
pub fn contour(config: &SimConfig, seeds: &[u64]) -> Result<ContourReport> {
    let fv = fv::run(config)?.state.rho;
    let rho0 = make_ic(config)?;
    let g = config.grid;
    let mut acc = vec![0.0; g.len()];
    for &seed in seeds {
        log::info!("contour: particle run seed {seed}");
        let mut c = config.clone();
        c.seed = seed;
        let e = sample_particles_from_density(&rho0, c.n_particles, seed)?;
        let run = run_particles_from(&c, e)?;
        let m = mollified_density(&run.ensemble, g, c.bandwidth)?;
        for (a, v) in acc.iter_mut().zip(m.values()) {
            *a += v / seeds.len() as f64;
        }
    }
    let particles = DensityField::new(g, acc, config.t_end)?;
    Ok(ContourReport { fv, particles })
}

// ---------------------------------------------------------------- n-rate

#[derive(Debug, Clone, PartialEq)]
pub struct NRateRun {
    pub n: usize,
    pub seed: u64,
    pub records: Vec<DiagnosticsRecord>,
    pub w1_sliced: f64,
    pub w1_sliced_stderr: f64,
    pub w1_exact_coarse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NRateReport {
    pub eps: f64,
    pub t_end: f64,
    pub fv_records: Vec<DiagnosticsRecord>,
    pub runs: Vec<NRateRun>,
}

impl NRateReport {
    pub fn ladder(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.runs.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// Seed average of the terminal sliced distance for each `N`.
    pub fn mean_w1_sliced(&self) -> Vec<(usize, f64)> {
        self.ladder()
            .into_iter()
            .map(|n| (n, mean(self.runs.iter().filter(|r| r.n == n).map(|r| r.w1_sliced))))
            .collect()
    }

    /// Seed average of the RMS gap between particle and grid
    /// `covariance_stat` over the output times, for each `N`.
    pub fn covariance_error(&self) -> Vec<(usize, f64)> {
        self.ladder()
            .into_iter()
            .map(|n| {
                let per_seed = self.runs.iter().filter(|r| r.n == n).map(|r| {
                    let s: f64 = r
                        .records
                        .iter()
                        .zip(&self.fv_records)
                        .map(|(p, g)| (p.covariance_stat - g.covariance_stat).powi(2))
                        .sum();
                    (s / r.records.len() as f64).sqrt()
                });
                (n, mean(per_seed))
            })
            .collect()
    }

    fn write(&self, out: &Path) -> Result<Outcome> {
        let mut files = Vec::new();
        let p = out.join("n_rate.csv");
        write_csv(
            &p,
            &["eps", "N", "seed", "w1_sliced", "w1_exact_coarse", "t"],
            self.runs.iter().map(|r| {
                [
                    self.eps.to_string(),
                    r.n.to_string(),
                    r.seed.to_string(),
                    r.w1_sliced.to_string(),
                    r.w1_exact_coarse.to_string(),
                    self.t_end.to_string(),
                ]
            }),
        )?;
        files.push(p);
        let p = out.join("n_rate_covariance.csv");
        let mut rows: Vec<[String; 4]> = self
            .fv_records
            .iter()
            .map(|r| ["fv".into(), String::new(), r.time.to_string(), r.covariance_stat.to_string()])
            .collect();
        for run in &self.runs {
            rows.extend(run.records.iter().map(|r| {
                [
                    run.n.to_string(),
                    run.seed.to_string(),
                    r.time.to_string(),
                    r.covariance_stat.to_string(),
                ]
            }));
        }
        write_csv(&p, &["N", "seed", "time", "covariance_stat"], rows)?;
        files.push(p);
        write_script(
            out,
            "plot_n_rate.py",
            "cov = rows(\"n_rate_covariance.csv\")\nrate = rows(\"n_rate.csv\")\nfig, ax = plt.subplots(1, 2, figsize=(11, 4))\nfv = [r for r in cov if r[\"N\"] == \"fv\"]\nax[0].plot([float(r[\"time\"]) for r in fv], [float(r[\"covariance_stat\"]) for r in fv], \"k\", label=\"grid\")\nfor n in sorted({r[\"N\"] for r in cov if r[\"N\"] != \"fv\"}, key=int):\n    seed = min(r[\"seed\"] for r in cov if r[\"N\"] == n)\n    sel = [r for r in cov if r[\"N\"] == n and r[\"seed\"] == seed]\n    ax[0].plot([float(r[\"time\"]) for r in sel], [float(r[\"covariance_stat\"]) for r in sel], label=\"N=\" + n)\nax[0].set_xlabel(\"t\")\nax[0].set_title(\"<|xy|> - <|x|><|y|>\")\nax[0].legend()\nns = sorted({int(r[\"N\"]) for r in rate})\nw = [sum(float(r[\"w1_sliced\"]) for r in rate if int(r[\"N\"]) == n) / sum(1 for r in rate if int(r[\"N\"]) == n) for n in ns]\nax[1].loglog(ns, w, \"o-\")\nax[1].set_xlabel(\"N\")\nax[1].set_title(\"terminal sliced W1\")\nfig.savefig(os.path.join(HERE, \"n_rate.png\"), dpi=120)\n",
            &mut files,
        )?;
        let mut summary: Vec<String> = self
            .mean_w1_sliced()
            .iter()
            .map(|(n, w)| format!("N={n}: mean sliced W1 {w:.5}"))
            .collect();
        summary.extend(
            self.covariance_error()
                .iter()
                .map(|(n, e)| format!("N={n}: RMS covariance_stat gap {e:.5}")),
        );
        Ok(Outcome {
            files,
            summary,
            passed: true,
        })
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = it.fold((0.0, 0usize), |(s, k), v| (s + v, k + 1));
    s / k as f64
}

/// Particle runs over `n_list` x `seeds` against the regularized grid
/// solution with the same `eps`, `D` and initial density.
pub fn n_rate(config: &SimConfig, n_list: &[usize], seeds: &[u64]) -> Result<NRateReport> {
    let mut fv_config = config.clone();
    fv_config.force_mode = ForceMode::Regularized;
    let fv_run = fv::run(&fv_config)?;
    let rho_end = &fv_run.state.rho;
    let coarse = coarse_grid(rho_end.grid(), EXACT_ATOM_CAP);
    let fv_coarse = coarse_measure(rho_end, EXACT_ATOM_CAP)?;
    let rho0 = make_ic(config)?;
    let mut runs = Vec::new();
    for &seed in seeds {
        let reference = resample_density(rho_end, REFERENCE_SAMPLES, seed)?;
        for &n in n_list {
            let start = Instant::now();
            let mut c = config.clone();
            c.n_particles = n;
            c.seed = seed;
            let e = sample_particles_from_density(&rho0, n, seed)?;
            let run = run_particles_from(&c, e)?;
            let mu = DiscreteMeasure::from_ensemble(&run.ensemble);
            let s = sliced_w1(&mu, &reference, c.n_proj, seed)?;
            let exact = w1_exact_small(&binned_measure(&run.ensemble, &coarse)?, &fv_coarse)?;
            log::info!(
                "n-rate: N={n} seed={seed} sliced W1 {:.5} ({:.1}s)",
                s.estimate,
                start.elapsed().as_secs_f64()
            );
            runs.push(NRateRun {
                n,
                seed,
                records: run.records,
                w1_sliced: s.estimate,
                w1_sliced_stderr: s.stderr,
                w1_exact_coarse: exact,
            });
        }
    }
    Ok(NRateReport {
        eps: config.eps,
        t_end: config.t_end,
        fv_records: fv_run.records,
        runs,
    })
}

// ---------------------------------------------------------------- eps-rate

#[derive(Debug, Clone, PartialEq)]
pub struct EpsRow {
    pub eps: f64,
    /// `L1(rho_eps - rho_{eps/2})` when `eps/2` is on the ladder.
    pub l1_half: Option<f64>,
    pub w1_sliced_half: Option<f64>,
    pub w1_exact_coarse_half: Option<f64>,
    /// `L1(rho_eps - rho_singular)`.
    pub l1_singular: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsRateReport {
    pub t_end: f64,
    pub rows: Vec<EpsRow>,
    /// Least-squares slope of `ln l1_half` against `ln eps`.
    pub slope: Option<f64>,
}

impl EpsRateReport {
    fn write(&self, out: &Path) -> Result<Outcome> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let p = out.join("eps_rate.csv");
        write_csv(
            &p,
            &["eps", "l1_half", "w1_sliced_half", "w1_exact_coarse_half", "l1_singular", "t"],
            self.rows.iter().map(|r| {
                [
                    r.eps.to_string(),
                    opt(r.l1_half),
                    opt(r.w1_sliced_half),
                    opt(r.w1_exact_coarse_half),
                    r.l1_singular.to_string(),
                    self.t_end.to_string(),
                ]
            }),
        )?;
        let q = out.join("eps_rate_fit.csv");
        write_csv(&q, &["slope"], [[opt(self.slope)]])?;
        let mut files = vec![p, q];
        write_script(
            out,
            "plot_eps_rate.py",
            "data = [r for r in rows(\"eps_rate.csv\") if r[\"l1_half\"]]\nfig, ax = plt.subplots(figsize=(5, 4))\nax.loglog([float(r[\"eps\"]) for r in data], [float(r[\"l1_half\"]) for r in data], \"o-\", label=\"L1(eps vs eps/2)\")\nax.set_xlabel(\"eps\")\nax.legend()\nfig.savefig(os.path.join(HERE, \"eps_rate.png\"), dpi=120)\n",
            &mut files,
        )?;
        let mut summary: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("eps={}: L1 to eps/2 {} L1 to singular {:.5}", r.eps, opt(r.l1_half), r.l1_singular))
            .collect();
        summary.push(format!("log-log slope {}", opt(self.slope)));
        Ok(Outcome {
            files,
            summary,
            passed: true,
        })
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` for fewer than two
/// points or non-positive values.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Regularized grid runs along `eps_list` and one singular run, compared
/// at `t_end`.
pub fn eps_rate(config: &SimConfig, eps_list: &[f64]) -> Result<EpsRateReport> {
    let mut singular = config.clone();
    singular.force_mode = ForceMode::Singular;
    let rho_s = fv::run(&singular)?.state.rho;
    let mut finals = Vec::new();
    for &eps in eps_list {
        let mut c = config.clone();
        c.eps = eps;
        c.force_mode = ForceMode::Regularized;
        log::info!("eps-rate: eps={eps}");
        finals.push((eps, fv::run(&c)?.state.rho));
    }
    let mut rows = Vec::new();
    for (eps, rho) in &finals {
        let half = finals.iter().find(|(e, _)| (e - eps / 2.0).abs() <= 1e-12 * eps);
        let (l1_half, w1s, w1e) = match half {
            Some((_, r2)) => {
                let a = resample_density(rho, REFERENCE_SAMPLES, config.seed)?;
                let b = resample_density(r2, REFERENCE_SAMPLES, config.seed.wrapping_add(1))?;
                let s = sliced_w1(&a, &b, config.n_proj, config.seed)?.estimate;
                let e = w1_exact_small(&coarse_measure(rho, EXACT_ATOM_CAP)?, &coarse_measure(r2, EXACT_ATOM_CAP)?)?;
                (Some(l1_distance(rho, r2)?), Some(s), Some(e))
            }
            None => (None, None, None),
        };
        rows.push(EpsRow {
            eps: *eps,
            l1_half,
            w1_sliced_half: w1s,
            w1_exact_coarse_half: w1e,
            l1_singular: l1_distance(rho, &rho_s)?,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.l1_half.map(|l| (r.eps, l))).collect();
    Ok(EpsRateReport {
        t_end: config.t_end,
        slope: loglog_slope(&pts),
        rows,
    })
}

// ---------------------------------------------------------------- coupling

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSeries {
    pub n: usize,
    pub seed: u64,
    pub gaps: Vec<GapRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    pub series: Vec<CouplingSeries>,
}

impl CouplingReport {
    /// Seed average of the terminal mean gap for each `N`.
    pub fn mean_terminal_gap(&self) -> Vec<(usize, f64)> {
        let mut ns: Vec<usize> = self.series.iter().map(|s| s.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns.into_iter()
            .map(|n| {
                let v = self
                    .series
                    .iter()
                    .filter(|s| s.n == n)
                    .map(|s| s.gaps.last().expect("at least one record").mean);
                (n, mean(v))
            })
            .collect()
    }

    fn write(&self, out: &Path) -> Result<Outcome> {
        let p = out.join("coupling.csv");
        write_csv(
            &p,
            &["N", "seed", "time", "mean_gap", "max_gap", "escaped"],
            self.series.iter().flat_map(|s| {
                s.gaps.iter().map(move |g| {
                    [
                        s.n.to_string(),
                        s.seed.to_string(),
                        g.time.to_string(),
                        g.mean.to_string(),
                        g.max.to_string(),
                        g.escaped.to_string(),
                    ]
                })
            }),
        )?;
        let mut files = vec![p];
        write_script(
            out,
            "plot_coupling.py",
            "data = rows(\"coupling.csv\")\nfig, ax = plt.subplots(figsize=(6, 4))\nfor n in sorted({r[\"N\"] for r in data}, key=int):\n    sel = [r for r in data if r[\"N\"] == n]\n    times = sorted({float(r[\"time\"]) for r in sel})\n    avg = [sum(float(r[\"mean_gap\"]) for r in sel if float(r[\"time\"]) == t) / sum(1 for r in sel if float(r[\"time\"]) == t) for t in times]\n    ax.plot(times, avg, label=\"N=\" + n)\nax.set_xlabel(\"t\")\nax.set_ylabel(\"mean |Z - Z~|\")\nax.legend()\nfig.savefig(os.path.join(HERE, \"coupling.png\"), dpi=120)\n",
            &mut files,
        )?;
        Ok(Outcome {
            files,
            summary: self
                .mean_terminal_gap()
                .iter()
                .map(|(n, g)| format!("N={n}: mean terminal gap {g:.5}"))
                .collect(),
            passed: true,
        })
    }
}

/// Coupled runs over `n_list` x `seeds`, all driven by one regularized grid
/// solution stored every `5 dt`.
pub fn coupling(config: &SimConfig, n_list: &[usize], seeds: &[u64]) -> Result<CouplingReport> {
    let mut fv_config = config.clone();
    fv_config.force_mode = ForceMode::Regularized;
    let fv_run = fv::run_with(
        &fv_config,
        RunOptions {
            snapshot_interval: Some(5.0 * config.dt),
        },
    )?;
    let mut series = Vec::new();
    for &seed in seeds {
        for &n in n_list {
            let mut c = config.clone();
            c.n_particles = n;
            c.seed = seed;
            let r = run_coupled(&c, &fv_run.snapshots)?;
            log::info!(
                "coupling: N={n} seed={seed} terminal mean gap {:.5}",
                r.gaps.last().map_or(0.0, |g| g.mean)
            );
            series.push(CouplingSeries { n, seed, gaps: r.gaps });
        }
    }
    Ok(CouplingReport { series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig9".parse::<Preset>().is_err());
    }

    #[test]
    fn overrides_replace_ladders() {
        let mut plan = Plan::new(Preset::Norms);
        assert_eq!(plan.d_list, vec![0.15, 0.25, 0.35]);
        plan.apply(&Overrides {
            d: Some(vec![0.2]),
            grid: Some(40),
            t_end: Some(0.5),
            seed: Some(3),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(plan.d_list, vec![0.2]);
        assert_eq!(plan.config.d, 0.2);
        assert_eq!(plan.config.grid.nx(), 40);
        assert_eq!(plan.config.t_end, 0.5);
        assert_eq!(plan.seeds, vec![3]);
        assert!(plan.apply(&Overrides { d: Some(vec![]), ..Default::default() }).is_err());
        assert!(plan.apply(&Overrides { d: Some(vec![-1.0]), ..Default::default() }).is_err());
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1].iter().map(|e: &f64| (*e, 3.0 * e.powf(0.7))).collect();
        assert!((loglog_slope(&pts).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn single_eps_degenerates_to_a_plain_run() {
        let mut c = Preset::EpsRate.default_config();
        c.grid = Grid2D::symmetric(40, 2.5).unwrap();
        c.t_end = 0.05;
        let r = eps_rate(&c, &[0.2]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].l1_half.is_none());
        assert!(r.slope.is_none());
    }
}
