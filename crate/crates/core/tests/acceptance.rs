//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

use std::time::Instant;

use mot_core::diagnostics::DiagnosticsRecord;
use mot_core::experiments::{coupling, eps_rate, heat_check, n_rate, Preset};
use mot_core::forces::{divergence_defect, gaussian_mollify, regularized_force, singular_force};
use mot_core::fv::{self, FvRun};
use mot_core::ic::make_gaussian_ic;
use mot_core::particles::DriftEvaluator;
use mot_core::transport::{sliced_w1, solve_transport, w1_exact_1d, DiscreteMeasure};
use mot_core::{DriftMode, ForceMode, Grid2D, Limiter, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

/// Minimum-cost perfect matching (Hungarian algorithm, O(n^3)).
fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    let cx = rng.gen_range(-1.0..1.0);
    let s = rng.gen_range(0.2..2.0);
    (0..n)
        .map(|_| [cx + s * rng.gen::<f64>(), s * rng.gen::<f64>() - 0.5])
        .collect()
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
    let pts = random_cloud(rng, n);
    let w = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    DiscreteMeasure::new(pts, w).unwrap()
}

fn mass_and_clip(run: &FvRun) -> (f64, f64) {
    let m0 = run.records[0].mass;
    let dm = run
        .records
        .iter()
        .map(|r| ((r.mass - m0) / m0).abs())
        .fold(0.0, f64::max);
    (dm, run.state.clipped_max_rel)
}

fn all_finite(records: &[DiagnosticsRecord]) -> bool {
    records
        .iter()
        .all(|r| r.mass.is_finite() && r.l2.is_finite() && r.linf.is_finite() && r.m2.is_finite())
}

struct Shared {
    norms: Vec<(f64, FvRun)>,
    norms_seconds: f64,
    heat_minmod: FvRun,
}

fn shared() -> Shared {
    let start = Instant::now();
    let norms = [0.15, 0.25, 0.35]
        .into_iter()
        .map(|d| {
            let mut c = Preset::Norms.default_config();
            c.d = d;
            (d, fv::run(&c).expect("norms run"))
        })
        .collect();
    let norms_seconds = start.elapsed().as_secs_f64();
    let mut c = Preset::HeatCheck.default_config();
    c.limiter = Limiter::Minmod;
    c.output_interval = 0.1;
    let heat_minmod = fv::run(&c).expect("force-off run");
    Shared {
        norms,
        norms_seconds,
        heat_minmod,
    }
}

fn c1_heat() -> Verdict {
    let c = Preset::HeatCheck.default_config();
    let mut failures = Vec::new();
    if c.d != 0.15 || c.grid != Grid2D::symmetric(100, 2.5).unwrap() || c.t_end != 1.0 {
        failures.push("preset does not match the required setup".to_string());
    }
    let r = heat_check(&c).expect("heat check");
    if r.errors[0].1 > 0.02 {
        failures.push(format!("error {:.3e} > 2%", r.errors[0].1));
    }
    if r.ratio < 1.8 {
        failures.push(format!("ratio {:.3} < 1.8", r.ratio));
    }
    if r.seconds >= 30.0 {
        failures.push(format!("took {:.1}s", r.seconds));
    }
    verdict(
        failures.is_empty(),
        format!(
            "err100={:.3e} err200={:.3e} ratio={:.3} {:.1}s {}",
            r.errors[0].1,
            r.errors[1].1,
            r.ratio,
            r.seconds,
            failures.join("; ")
        ),
    )
}

fn c2_conservation(s: &Shared, extra: &[(&str, &[DiagnosticsRecord])]) -> Verdict {
    let mut worst_dm = 0.0f64;
    let mut worst_clip = 0.0f64;
    for (_, run) in &s.norms {
        let (dm, clip) = mass_and_clip(run);
        worst_dm = worst_dm.max(dm);
        worst_clip = worst_clip.max(clip);
    }
    let (dm, clip) = mass_and_clip(&s.heat_minmod);
    worst_dm = worst_dm.max(dm);
    worst_clip = worst_clip.max(clip);
    for (_, recs) in extra {
        let m0 = recs[0].mass;
        for r in recs.iter() {
            worst_dm = worst_dm.max(((r.mass - m0) / m0).abs());
        }
    }
    verdict(
        worst_dm <= 1e-10 && worst_clip <= 1e-10,
        format!("max |dmass|/mass={worst_dm:.2e} max clipped/mass per step={worst_clip:.2e}"),
    )
}

fn c3_divergence() -> Verdict {
    let eps = 0.1;
    let mut sing = Vec::new();
    let mut reg = Vec::new();
    for n in [50, 100, 200] {
        let rho = make_gaussian_ic(Grid2D::symmetric(n, 2.5).unwrap(), 0.5, 1.0).unwrap();
        sing.push(divergence_defect(&singular_force(&rho), &rho));
        let fe = regularized_force(&rho, eps).unwrap();
        reg.push(divergence_defect(&fe, &gaussian_mollify(&rho, eps).unwrap()));
    }
    let ok = sing[1] <= 0.05 && reg[1] <= 0.05 && sing[2] < sing[1] && reg[2] < reg[1] && sing[1] < sing[0] && reg[1] < reg[0];
    verdict(
        ok,
        format!(
            "singular dx=.1/.05/.025: {:.2e} {:.2e} {:.2e}; mollified: {:.2e} {:.2e} {:.2e}",
            sing[0], sing[1], sing[2], reg[0], reg[1], reg[2]
        ),
    )
}

fn c4_norms(s: &Shared) -> Verdict {
    let mut failures = Vec::new();
    for (d, run) in &s.norms {
        if !all_finite(&run.records) || (run.state.time() - 5.0).abs() > 1e-9 {
            failures.push(format!("D={d} did not complete"));
        }
    }
    let g = Preset::Norms.default_config().grid;
    if (g.dx() - 0.05).abs() > 1e-12 || (g.dy() - 0.05).abs() > 1e-12 {
        failures.push("grid spacing is not 0.05".into());
    }
    let l2 = |d: f64| -> Vec<(f64, f64)> {
        let run = &s.norms.iter().find(|(x, _)| *x == d).unwrap().1;
        run.records.iter().map(|r| (r.time, r.l2)).collect()
    };
    let hi = l2(0.35);
    let after: Vec<f64> = hi.iter().filter(|(t, _)| *t >= 0.5 - 1e-12).map(|p| p.1).collect();
    let decreasing = after.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    if !decreasing {
        failures.push("D=0.35 L2 increases after t=0.5".into());
    }
    let lo = l2(0.15);
    let vals: Vec<f64> = lo.iter().map(|p| p.1).collect();
    let rises = vals.windows(2).any(|w| w[1] > w[0]);
    let falls = vals.windows(2).any(|w| w[1] < w[0]);
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    if !(rises && falls) {
        failures.push("D=0.15 L2 is monotone".into());
    }
    if !(peak.is_finite() && peak < 10.0 * vals[0]) {
        failures.push(format!("D=0.15 L2 peak {peak}"));
    }
    if s.norms_seconds >= 600.0 {
        failures.push(format!("took {:.0}s", s.norms_seconds));
    }
    verdict(
        failures.is_empty(),
        format!(
            "D=0.15 L2 {:.3}->peak {:.3}->{:.3}; D=0.35 L2 {:.3}->{:.3}; {:.1}s {}",
            vals[0],
            peak,
            vals.last().unwrap(),
            hi[0].1,
            hi.last().unwrap().1,
            s.norms_seconds,
            failures.join("; ")
        ),
    )
}

fn c5_moments(s: &Shared) -> Verdict {
    let d = Preset::HeatCheck.default_config().d;
    let recs = &s.heat_minmod.records;
    let (first, last) = (&recs[0], recs.last().unwrap());
    let slope = (last.m2 - first.m2) / (last.time - first.time);
    let target = 4.0 * d * first.mass;
    let rel = (slope - target).abs() / target;
    let mut worst = f64::NEG_INFINITY;
    for (d, run) in &s.norms {
        let r0 = &run.records[0];
        for r in &run.records {
            worst = worst.max(r.m2 - (r0.m2 + 4.0 * d * r0.mass * r.time));
        }
    }
    verdict(
        rel <= 0.01 && worst <= 1e-12,
        format!("force-off slope {slope:.5} vs {target:.5} (rel {rel:.2e}); max m2 - bound with force {worst:.3e}"),
    )
}

fn c6_exp_moment(s: &Shared) -> Verdict {
    let run = &s.norms.iter().find(|(d, _)| *d == 0.35).unwrap().1;
    let lambda = Preset::Norms.default_config().exp_lambda;
    let d = 0.35;
    let e0 = run.records[0].exp_moment;
    let worst = run
        .records
        .iter()
        .map(|r| r.exp_moment / (e0 * (d * (lambda * lambda + 2.0 * lambda) * r.time).exp()))
        .fold(0.0, f64::max);
    verdict(
        lambda == 1.0 && worst <= 1.0,
        format!("max E(t)/bound(t) = {worst:.6}"),
    )
}

fn c7_symmetry(s: &Shared) -> Verdict {
    let mut worst = 0.0f64;
    let mut missing = false;
    for run in s.norms.iter().map(|(_, r)| r).chain([&s.heat_minmod]) {
        for r in &run.records {
            match r.symmetry_defect {
                Some(v) => worst = worst.max(v),
                None => missing = true,
            }
        }
    }
    verdict(!missing && worst <= 1e-10, format!("max symmetry defect {worst:.2e}"))
}

fn c8_transport() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_1d = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=64);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect();
        let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).abs()).collect()).collect();
        let lp = assignment_cost(&cost) / n as f64;
        worst_1d = worst_1d.max((w1_exact_1d(&a, &b).unwrap() - lp).abs());
    }
    let mut worst_match = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(1..=40);
        let a = random_cloud(&mut rng, n);
        let b = random_cloud(&mut rng, n);
        let cost: Vec<Vec<f64>> = a
            .iter()
            .map(|p| b.iter().map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).collect())
            .collect();
        let lp = assignment_cost(&cost) / n as f64;
        let ours = solve_transport(
            &DiscreteMeasure::uniform(a).unwrap(),
            &DiscreteMeasure::uniform(b).unwrap(),
        )
        .unwrap()
        .value;
        worst_match = worst_match.max((ours - lp).abs());
    }
    let mut worst_axiom = 0.0f64;
    for _ in 0..100 {
        let sizes: [usize; 3] = [rng.gen_range(1..=24), rng.gen_range(1..=24), rng.gen_range(1..=24)];
        let [a, b, c] = sizes.map(|n| random_measure(&mut rng, n));
        let w = |x: &DiscreteMeasure, y: &DiscreteMeasure| solve_transport(x, y).unwrap().value;
        let (ab, ba, bc, ac, aa) = (w(&a, &b), w(&b, &a), w(&b, &c), w(&a, &c), w(&a, &a));
        worst_axiom = worst_axiom.max((ab - ba).abs()).max(ac - ab - bc).max(aa.abs());
    }
    let mut worst_ratio = 0.0f64;
    for k in 0..40 {
        let (na, nb) = (rng.gen_range(1..=128), rng.gen_range(1..=128));
        let a = random_measure(&mut rng, na);
        let b = random_measure(&mut rng, nb);
        let exact = solve_transport(&a, &b).unwrap().value;
        let s = sliced_w1(&a, &b, 64, k).unwrap().estimate;
        if exact > 0.0 {
            worst_ratio = worst_ratio.max(s / exact);
        }
    }
    verdict(
        worst_1d <= 1e-9 && worst_match <= 1e-9 && worst_axiom <= 1e-9 && worst_ratio <= 1.0 + 1e-9,
        format!(
            "1D vs assignment {worst_1d:.1e}; 2D vs assignment {worst_match:.1e}; axioms {worst_axiom:.1e}; max sliced/exact {worst_ratio:.4}"
        ),
    )
}

fn c9_drift() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eps_choices = [0.05, 0.1, 0.2];
    let mut worst = 0.0f64;
    let mut worst_sum = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=512);
        let eps = eps_choices[rng.gen_range(0..eps_choices.len())];
        let spread = rng.gen_range(0.2..3.0);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [spread * rng.gen_range(-1.0..1.0), spread * rng.gen_range(-1.0..1.0)])
            .collect();
        let direct = DriftEvaluator::new(eps, DriftMode::Direct, 6.0).unwrap().drift(&pts);
        let cells = DriftEvaluator::new(eps, DriftMode::CellList, 6.0).unwrap().drift(&pts);
        for (a, b) in direct.iter().zip(&cells) {
            worst = worst.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
        }
        let sum = direct.iter().fold([0.0, 0.0], |s, v| [s[0] + v[0], s[1] + v[1]]);
        worst_sum = worst_sum.max(sum[0].abs()).max(sum[1].abs());
    }
    verdict(
        worst <= 1e-8 && worst_sum == 0.0,
        format!("max |cell - direct| {worst:.2e}; max |sum direct| {worst_sum:.2e}"),
    )
}

fn c10_n_rate() -> (Verdict, Vec<DiagnosticsRecord>) {
    let start = Instant::now();
    let c = Preset::NRate.default_config();
    let seeds: Vec<u64> = (0..5).collect();
    let r = n_rate(&c, &[2000, 4000, 8000], &seeds).expect("n-rate");
    let secs = start.elapsed().as_secs_f64();
    let w = r.mean_w1_sliced();
    let cov = r.covariance_error();
    let w_dec = w.windows(2).all(|p| p[1].1 < p[0].1);
    let cov_ok = cov.last().unwrap().1 < cov[0].1;
    let fmt = |v: &[(usize, f64)]| v.iter().map(|(n, x)| format!("{n}:{x:.4}")).collect::<Vec<_>>().join(" ");
    (
        verdict(
            c.eps == 0.1 && c.d == 0.15 && w_dec && cov_ok && secs < 1200.0,
            format!("W1 {}; cov gap {}; {secs:.0}s", fmt(&w), fmt(&cov)),
        ),
        r.fv_records,
    )
}

fn c11_eps() -> Verdict {
    let c = Preset::EpsRate.default_config();
    let r = eps_rate(&c, &[0.4, 0.2, 0.1, 0.05]).expect("eps-rate");
    let gaps: Vec<(f64, f64)> = r.rows.iter().filter_map(|row| row.l1_half.map(|l| (row.eps, l))).collect();
    let dec = gaps.len() == 3 && gaps.windows(2).all(|p| p[1].1 < p[0].1);
    let slope = r.slope.unwrap_or(f64::NAN);
    verdict(
        c.t_end == 1.0 && dec && slope > 0.0,
        format!(
            "L1(eps, eps/2) {}; slope {slope:.3}",
            gaps.iter().map(|(e, l)| format!("{e}:{l:.4e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn c12_coupling() -> Verdict {
    let c = Preset::Coupling.default_config();
    let seeds: Vec<u64> = (0..5).collect();
    let r = coupling(&c, &[1000, 4000], &seeds).expect("coupling");
    let zero_start = r
        .series
        .iter()
        .all(|s| s.gaps[0].time == 0.0 && s.gaps[0].mean == 0.0 && s.gaps[0].max == 0.0);
    let at_end = r.series.iter().all(|s| (s.gaps.last().unwrap().time - 1.0).abs() < 1e-9);
    let g = r.mean_terminal_gap();
    verdict(
        c.eps == 0.1 && zero_start && at_end && g[1].1 < g[0].1,
        format!("gap(0)=0: {zero_start}; mean gap at t=1: N=1000 {:.5}, N=4000 {:.5}", g[0].1, g[1].1),
    )
}

fn main() {
    let total = Instant::now();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |k: u32, name: &'static str, v: Verdict| {
        println!("criterion {k:>2} {name:<26} {} {}", if v.ok { "PASS" } else { "FAIL" }, v.detail);
        results.push((k, name, v));
    };
    report(1, "heat oracle", c1_heat());
    let s = shared();
    let (v10, fv_records) = c10_n_rate();
    let mut regularized = SimConfig::new(0.25, 0.1, 1.0);
    regularized.force_mode = ForceMode::Regularized;
    regularized.limiter = Limiter::Minmod;
    let reg_run = fv::run(&regularized).expect("regularized run");
    report(
        2,
        "conservation+positivity",
        c2_conservation(&s, &[("n-rate grid", &fv_records), ("regularized", &reg_run.records)]),
    );
    report(3, "divergence identities", c3_divergence());
    report(4, "norm histories", c4_norms(&s));
    report(5, "moment law", c5_moments(&s));
    report(6, "exponential moment", c6_exp_moment(&s));
    report(7, "symmetry", c7_symmetry(&s));
    report(8, "transport oracles", c8_transport());
    report(9, "drift oracle", c9_drift());
    report(10, "N convergence", v10);
    report(11, "eps Cauchy", c11_eps());
    report(12, "coupling", c12_coupling());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.ok).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed ({:.0}s)",
        results.len() - failed.len(),
        failed.len(),
        total.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
