//! End-to-end figure recipes. Each writes CSV tables and SVG plots under
//! `<output_dir>/<figure>/` and evaluates its embedded assertions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use unruh_core::evolution::transition_probability;
use unruh_core::hamiltonians::Variant;
use unruh_core::params::{Process, Switching};

use crate::config::{ModelKind, RunConfig};
use crate::error::{LabError, LabResult};
use crate::output::{check_csv, check_svg, num, opt_num, Plot, Style, Table};
use crate::simulate::{ensemble, oracle_series, simulate};
use crate::sweep::{run_sweep, sweep_point, zone_of, SweepResult};
use crate::validate::APPROXIMATION_P_FINAL;

/// Observation windows (µs) whose peak-to-peak excursion must shrink.
pub const OSCILLATION_WINDOWS_US: [(f64, f64); 3] = [(0.0, 80.0), (200.0, 280.0), (400.0, 480.0)];
/// Accelerations of the variant-comparison panels, s⁻¹.
pub const VARIANT_ALPHAS: [f64; 2] = [1e6, 1e9];
pub const RABI_LIMIT: f64 = 5e-3;
/// Columns that hold text in any recipe table.
const TEXT_COLUMNS: [&str; 2] = ["process", "error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Trajectories, oracle and noise band at one operating point.
    Fig2,
    /// p_eff and η against β.
    Fig3,
    /// Emission at both phonon frequencies with the zone boundary.
    FigS1,
    /// C = 0 against C = 1 closed forms, with the noise band.
    FigS2,
    /// Rabi, ue01 and ue1exp variants.
    FigS3,
}

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::FigS1,
        Figure::FigS2,
        Figure::FigS3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::FigS1 => "figS1",
            Figure::FigS2 => "figS2",
            Figure::FigS3 => "figS3",
        }
    }
}

impl FromStr for Figure {
    type Err = LabError;
    fn from_str(s: &str) -> LabResult<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LabError::Config(format!("unknown figure `{s}`")))
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// An emitted file and the schema it was written with.
#[derive(Debug, Clone, PartialEq)]
pub enum Emitted {
    Csv {
        path: PathBuf,
        columns: Vec<String>,
        text_columns: Vec<&'static str>,
    },
    Svg {
        path: PathBuf,
    },
}

impl Emitted {
    pub fn path(&self) -> &Path {
        match self {
            Emitted::Csv { path, .. } | Emitted::Svg { path } => path,
        }
    }

    /// Re-read the file and check it against its schema.
    pub fn check(&self) -> LabResult<()> {
        let text = std::fs::read_to_string(self.path()).map_err(|source| LabError::Io {
            action: "read",
            path: self.path().to_path_buf(),
            source,
        })?;
        match self {
            Emitted::Csv {
                columns,
                text_columns,
                ..
            } => {
                let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
                check_csv(&text, &cols, text_columns).map(|_| ())
            }
            Emitted::Svg { .. } => check_svg(&text),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureReport {
    pub figure: Figure,
    pub files: Vec<Emitted>,
    pub assertions: Vec<Assertion>,
}

impl FigureReport {
    fn new(figure: Figure) -> Self {
        Self {
            figure,
            files: Vec::new(),
            assertions: Vec::new(),
        }
    }

    pub fn failed(&self) -> usize {
        self.assertions.iter().filter(|a| !a.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    /// `Err` listing the count when any assertion failed.
    pub fn into_result(self) -> LabResult<Self> {
        match self.failed() {
            0 => Ok(self),
            failed => Err(LabError::Assertions {
                figure: self.figure.name().into(),
                failed,
            }),
        }
    }

    fn table(&mut self, dir: &Path, name: &str, table: &Table) -> LabResult<()> {
        let text_columns = TEXT_COLUMNS
            .iter()
            .copied()
            .filter(|c| table.column_index(c).is_some())
            .collect();
        self.files.push(Emitted::Csv {
            path: table.write(&dir.join(name))?,
            columns: table.columns.clone(),
            text_columns,
        });
        Ok(())
    }

    fn plot(&mut self, dir: &Path, name: &str, plot: &Plot) -> LabResult<()> {
        self.files.push(Emitted::Svg {
            path: plot.write(&dir.join(name))?,
        });
        Ok(())
    }
}

/// Run one recipe with `cfg` as the base configuration.
pub fn reproduce(figure: Figure, cfg: &RunConfig) -> LabResult<FigureReport> {
    cfg.validate()?;
    let dir = cfg.output_dir.join(figure.name());
    let mut report = FigureReport::new(figure);
    match figure {
        Figure::Fig2 => fig2(cfg, &dir, &mut report)?,
        Figure::Fig3 => fig3(cfg, &dir, &mut report)?,
        Figure::FigS1 => fig_s1(cfg, &dir, &mut report)?,
        Figure::FigS2 => fig_s2(cfg, &dir, &mut report)?,
        Figure::FigS3 => fig_s3(cfg, &dir, &mut report)?,
    }
    Ok(report)
}

/// Peak-to-peak of `y` over samples with t in [lo, hi] µs.
pub fn window_ptp(times: &[f64], y: &[f64], lo_us: f64, hi_us: f64) -> Option<f64> {
    let vals: Vec<f64> = times
        .iter()
        .zip(y)
        .filter(|(t, _)| (lo_us..=hi_us).contains(&(*t * 1e6)))
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return None;
    }
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Some(max - min)
}

/// First-order tolerance between full dynamics and the oracle.
pub fn oracle_tolerance(oracle: f64) -> f64 {
    (0.1 * oracle).max(0.003)
}

const FIG2_COLUMNS: [&str; 8] = [
    "t_us",
    "p_sim",
    "p_oracle",
    "noise_mean",
    "noise_low",
    "noise_high",
    "mean_n",
    "norm",
];

fn fig2(base: &RunConfig, dir: &Path, report: &mut FigureReport) -> LabResult<()> {
    for process in Process::BOTH {
        let mut cfg = base.clone();
        cfg.kind = ModelKind::HExp;
        cfg.process = process;
        let traj = simulate(&cfg)?;
        let series = transition_probability(&traj, process)?;
        let oracle = oracle_series(&cfg, &traj.times)?.expect("h_exp has an oracle");
        let ens = ensemble(&cfg)?;
        let us: Vec<f64> = traj.times.iter().map(|t| t * 1e6).collect();

        let mut t = Table::new(cfg.describe(), &FIG2_COLUMNS);
        t.push_meta("noise_shots", ens.shots());
        for k in 0..traj.len() {
            t.push(vec![
                num(us[k]),
                num(series[k]),
                num(oracle[k]),
                num(ens.mean[k]),
                num(ens.band_low[k]),
                num(ens.band_high[k]),
                num(traj.mean_n[k]),
                num(traj.norm_or_trace[k]),
            ]);
        }
        let name = process.name();
        report.table(dir, &format!("{name}.csv"), &t)?;
        let plot = Plot::new(
            &format!("{name}, alpha = {:.1e} /s", cfg.params.alpha),
            "t (us)",
            "transition probability",
        )
        .band("noise band", &us, &ens.band_low, &ens.band_high)
        .line("simulation", &us, &series)
        .styled("first-order oracle", &us, &oracle, Style::Dashed);
        report.plot(dir, &format!("{name}.svg"), &plot)?;

        let (sim, orc) = (*series.last().unwrap(), *oracle.last().unwrap());
        report.assertions.push(Assertion::new(
            format!("{name}: final value within first-order tolerance"),
            (sim - orc).abs() <= oracle_tolerance(orc),
            format!(
                "sim {sim:.5}, oracle {orc:.5}, tolerance {:.5}",
                oracle_tolerance(orc)
            ),
        ));
        let ptp: Vec<Option<f64>> = OSCILLATION_WINDOWS_US
            .iter()
            .map(|(lo, hi)| window_ptp(&traj.times, &series, *lo, *hi))
            .collect();
        let damped = ptp.iter().all(Option::is_some) && ptp.windows(2).all(|w| w[1] < w[0]);
        report.assertions.push(Assertion::new(
            format!("{name}: oscillation decays across the observation windows"),
            damped,
            format!(
                "peak-to-peak {}",
                ptp.iter()
                    .map(|p| p.map_or("none".into(), |v| format!("{v:.4}")))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ));
        report.assertions.push(Assertion::new(
            format!("{name}: norm drift below 1e-8"),
            traj.max_norm_drift() < 1e-8,
            format!("{:e}", traj.max_norm_drift()),
        ));
    }
    Ok(())
}

const ETA_COLUMNS: [&str; 8] = [
    "alpha_per_s",
    "beta",
    "eta_exact",
    "eta_damped_c0",
    "eta_translated",
    "eta_oracle",
    "eta_sim",
    "beta_fit_sim",
];

fn pair_ratio(exc: Option<f64>, emi: Option<f64>) -> Option<f64> {
    Some(emi? / exc?)
}

fn sweep_plots(
    res: &SweepResult,
    report: &mut FigureReport,
    dir: &Path,
    stem: &str,
) -> LabResult<()> {
    let mut plot = Plot {
        log_x: true,
        log_y: true,
        hlines: vec![(1.0, "p_eff = 1".into())],
        ..Plot::new("effective transition probability", "beta", "p_eff")
    };
    for process in Process::BOTH {
        let rows: Vec<_> = res.rows_for(process).collect();
        if rows.is_empty() {
            continue;
        }
        let beta: Vec<f64> = rows.iter().map(|r| r.beta).collect();
        let get = |f: &dyn Fn(&crate::sweep::SweepRow) -> Option<f64>| -> Vec<f64> {
            rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect()
        };
        let name = process.name();
        plot = plot
            .line(&format!("{name} ideal"), &beta, &get(&|r| r.p_eff_ideal()))
            .styled(
                &format!("{name} closed form"),
                &beta,
                &get(&|r| r.p_eff_translated()),
                Style::Dashed,
            )
            .styled(
                &format!("{name} simulation"),
                &beta,
                &get(&|r| r.p_eff_sim()),
                Style::Markers,
            );
    }
    report.plot(dir, &format!("{stem}.svg"), &plot)
}

fn fig3(base: &RunConfig, dir: &Path, report: &mut FigureReport) -> LabResult<()> {
    let mut cfg = base.clone();
    cfg.sweep.processes = Process::BOTH.to_vec();
    cfg.sweep.simulate = true;
    cfg.sweep.noise = true;
    let res = run_sweep(&cfg)?;
    report.table(dir, "sweep.csv", &res.table(&cfg))?;
    sweep_plots(&res, report, dir, "p_eff")?;

    let mut eta = Table::new(cfg.describe(), &ETA_COLUMNS);
    eta.push_meta("zone_boundary_alpha_per_s", opt_num(res.crossover));
    let exc: Vec<_> = res.rows_for(Process::Excitation).collect();
    let emi: Vec<_> = res.rows_for(Process::Emission).collect();
    let (mut beta, mut exact, mut sim) = (Vec::new(), Vec::new(), Vec::new());
    for (x, e) in exc.iter().zip(&emi) {
        let eta_sim = pair_ratio(x.p_eff_sim(), e.p_eff_sim());
        let fit = eta_sim.filter(|r| *r > 1.0).map(|r| 1.0 / r.ln());
        eta.push(vec![
            num(x.alpha),
            num(x.beta),
            num((1.0 / x.beta).exp()),
            opt_num(pair_ratio(x.p_eff_damped_c0(), e.p_eff_damped_c0())),
            opt_num(pair_ratio(x.p_eff_translated(), e.p_eff_translated())),
            opt_num(pair_ratio(x.p_eff_oracle(), e.p_eff_oracle())),
            opt_num(eta_sim),
            opt_num(fit),
        ]);
        beta.push(x.beta);
        exact.push((1.0 / x.beta).exp());
        sim.push(eta_sim.unwrap_or(f64::NAN));
    }
    report.table(dir, "eta.csv", &eta)?;
    let plot = Plot {
        log_x: true,
        log_y: true,
        ..Plot::new("detailed balance", "beta", "eta = p_eff,emi / p_eff,exc")
    }
    .line("exp(1/beta)", &beta, &exact)
    .styled("simulation", &beta, &sim, Style::Markers);
    report.plot(dir, "eta.svg", &plot)?;

    let bad: Vec<String> = exc
        .iter()
        .zip(&emi)
        .filter(|(x, e)| {
            !(x.p_eff_ideal().unwrap_or(f64::NAN) < 1.0
                && 1.0 < e.p_eff_ideal().unwrap_or(f64::NAN))
        })
        .map(|(x, _)| format!("{:.3}", x.beta))
        .collect();
    report.assertions.push(Assertion::new(
        "ideal p_eff,exc < 1 < p_eff,emi at every beta",
        bad.is_empty() && !exc.is_empty(),
        if bad.is_empty() {
            format!("{} points", exc.len())
        } else {
            format!("violated at beta {}", bad.join(" "))
        },
    ));
    report.assertions.push(Assertion::new(
        "every sweep point evaluated",
        res.failed() == 0,
        format!("{} failed point(s)", res.failed()),
    ));
    Ok(())
}

const S1_COLUMNS: [&str; 11] = [
    "alpha_per_s",
    "beta",
    "zone",
    "p_ideal_zone2",
    "p_translated_zone2",
    "p_sim_zone2",
    "p_ideal_zone1",
    "p_translated_zone1",
    "p_sim_zone1",
    "p_selected_ideal",
    "error",
];

fn fig_s1(base: &RunConfig, dir: &Path, report: &mut FigureReport) -> LabResult<()> {
    let mut cfg = base.clone();
    cfg.sweep.processes = vec![Process::Emission];
    cfg.sweep.simulate = true;
    cfg.sweep.noise = false;
    let spec = cfg.sweep.clone();
    let crossover = crate::sweep::crossover_alpha(&cfg.params, spec.zone2_omega_p)?;
    let alphas = spec.alphas();
    let rows: Vec<_> = alphas
        .par_iter()
        .map(|&alpha| {
            let zone = zone_of(alpha, crossover);
            let at = |omega_p| {
                sweep_point(
                    &cfg,
                    cfg.params.with_alpha(alpha).with_omega_p(omega_p),
                    Process::Emission,
                    zone,
                )
            };
            (at(spec.zone2_omega_p), at(spec.zone1_omega_p))
        })
        .collect();

    let mut t = Table::new(cfg.describe(), &S1_COLUMNS);
    t.push_meta("zone_boundary_alpha_per_s", opt_num(crossover));
    t.push_meta(
        "zone1_nu_p_khz",
        num(unruh_core::params::rad_per_s_to_khz(spec.zone1_omega_p)),
    );
    t.push_meta(
        "zone2_nu_p_khz",
        num(unruh_core::params::rad_per_s_to_khz(spec.zone2_omega_p)),
    );
    let mut selected = Vec::new();
    for (z2, z1) in &rows {
        let sel = if z2.zone == crate::sweep::Zone::I {
            z1.p_ideal
        } else {
            z2.p_ideal
        };
        selected.push(sel.unwrap_or(f64::NAN));
        let errors: Vec<String> = z2.errors.iter().chain(&z1.errors).cloned().collect();
        t.push(vec![
            num(z2.alpha),
            num(z2.beta),
            z2.zone.number().to_string(),
            opt_num(z2.p_ideal),
            opt_num(z2.p_translated_corrected),
            opt_num(z2.p_sim),
            opt_num(z1.p_ideal),
            opt_num(z1.p_translated_corrected),
            opt_num(z1.p_sim),
            opt_num(sel),
            errors.join("; ").replace([',', '\n'], ";"),
        ]);
    }
    report.table(dir, "emission_zones.csv", &t)?;
    let col = |f: &dyn Fn(&crate::sweep::SweepRow) -> Option<f64>, z1: bool| -> Vec<f64> {
        rows.iter()
            .map(|(a, b)| f(if z1 { b } else { a }).unwrap_or(f64::NAN))
            .collect()
    };
    let mut plot = Plot {
        log_x: true,
        hlines: vec![(APPROXIMATION_P_FINAL, "first-order bound".into())],
        ..Plot::new(
            "emission at two phonon frequencies",
            "alpha (1/s)",
            "p_final",
        )
    };
    if let Some(c) = crossover {
        plot.vlines.push((c, "zone boundary".into()));
    }
    let plot = plot
        .line(
            "ideal, zone II phonon",
            &alphas,
            &col(&|r| r.p_ideal, false),
        )
        .styled(
            "simulation, zone II phonon",
            &alphas,
            &col(&|r| r.p_sim, false),
            Style::Markers,
        )
        .line("ideal, zone I phonon", &alphas, &col(&|r| r.p_ideal, true))
        .styled(
            "simulation, zone I phonon",
            &alphas,
            &col(&|r| r.p_sim, true),
            Style::Markers,
        );
    report.plot(dir, "emission_zones.svg", &plot)?;

    let in_range = crossover.is_some_and(|c| (spec.alpha_min..=spec.alpha_max).contains(&c));
    report.assertions.push(Assertion::new(
        "zone boundary lies inside the sweep range",
        in_range,
        format!("boundary {crossover:?}"),
    ));
    if let Some(c) = crossover {
        let p = unruh_core::analytic::p_final_ideal(
            &cfg.params.with_alpha(c).with_omega_p(spec.zone2_omega_p),
            Process::Emission,
        )?
        .p_final;
        report.assertions.push(Assertion::new(
            "ideal emission equals the first-order bound at the boundary",
            (p - APPROXIMATION_P_FINAL).abs() < 1e-9,
            format!("p = {p:.12}"),
        ));
    }
    let worst = selected.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    report.assertions.push(Assertion::new(
        "zone rule keeps ideal emission below the first-order bound",
        worst < APPROXIMATION_P_FINAL,
        format!("largest selected p_final {worst:.5}"),
    ));
    Ok(())
}

const S2_COLUMNS: [&str; 13] = [
    "alpha_per_s",
    "process",
    "zone",
    "beta",
    "p_ideal",
    "p_damped_c0",
    "p_translated_c",
    "p_translated_literal",
    "deviation",
    "noise_low",
    "noise_high",
    "band_width",
    "deviation_over_band",
];

fn fig_s2(base: &RunConfig, dir: &Path, report: &mut FigureReport) -> LabResult<()> {
    let mut cfg = base.clone();
    cfg.sweep.processes = Process::BOTH.to_vec();
    cfg.sweep.simulate = false;
    cfg.sweep.noise = true;
    if cfg.params.switching != Switching::ExponentialDamped || !(cfg.params.c > 0.0) {
        return Err(LabError::Config(
            "figS2 compares C = 0 with C > 0 under exponential switching".into(),
        ));
    }
    let res = run_sweep(&cfg)?;
    let mut t = Table::new(cfg.describe(), &S2_COLUMNS);
    t.push_meta("zone_boundary_alpha_per_s", opt_num(res.crossover));
    t.push_meta("noise_model", "C > 0 effective model");
    let mut bad = Vec::new();
    for r in &res.rows {
        let dev = match (r.p_translated_corrected, r.p_damped_c0) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::NAN,
        };
        let width = r.noise.map_or(f64::NAN, |n| n.2 - n.1);
        if !(dev < width) {
            bad.push(format!("{} alpha {:.2e}", r.process.name(), r.alpha));
        }
        t.push(vec![
            num(r.alpha),
            r.process.name().into(),
            r.zone.number().to_string(),
            num(r.beta),
            opt_num(r.p_ideal),
            opt_num(r.p_damped_c0),
            opt_num(r.p_translated_corrected),
            opt_num(r.p_translated_literal),
            num(dev),
            opt_num(r.noise.map(|n| n.1)),
            opt_num(r.noise.map(|n| n.2)),
            num(width),
            num(dev / width),
        ]);
    }
    report.table(dir, "c0_vs_c.csv", &t)?;
    for process in Process::BOTH {
        let rows: Vec<_> = res.rows_for(process).collect();
        let a: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
        let get = |f: &dyn Fn(&crate::sweep::SweepRow) -> Option<f64>| -> Vec<f64> {
            rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect()
        };
        let plot = Plot {
            log_x: true,
            ..Plot::new(
                &format!("{} closed forms", process.name()),
                "alpha (1/s)",
                "p_final",
            )
        }
        .band(
            "noise band",
            &a,
            &get(&|r| r.noise.map(|n| n.1)),
            &get(&|r| r.noise.map(|n| n.2)),
        )
        .line("ideal", &a, &get(&|r| r.p_ideal))
        .styled("C = 0 damped", &a, &get(&|r| r.p_damped_c0), Style::Dashed)
        .styled(
            &format!("C = {} translated", cfg.params.c),
            &a,
            &get(&|r| r.p_translated_corrected),
            Style::Markers,
        );
        report.plot(dir, &format!("{}.svg", process.name()), &plot)?;
    }
    report.assertions.push(Assertion::new(
        "C = 0 vs C > 0 deviation smaller than the noise band width",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} points", res.rows.len())
        } else {
            format!("exceeded at {}", bad.join("; "))
        },
    ));
    Ok(())
}

const S3_COLUMNS: [&str; 5] = ["t_us", "rabi", "ue1exp", "t_ue01_us", "ue01"];

fn fig_s3(base: &RunConfig, dir: &Path, report: &mut FigureReport) -> LabResult<()> {
    let jobs: Vec<(Process, f64, Variant)> = Process::BOTH
        .iter()
        .flat_map(|&p| {
            VARIANT_ALPHAS
                .iter()
                .flat_map(move |&a| Variant::ALL.iter().map(move |&v| (p, a, v)))
        })
        .collect();
    let runs: Vec<LabResult<(Vec<f64>, Vec<f64>)>> = jobs
        .par_iter()
        .map(|&(process, alpha, variant)| {
            let mut cfg = base.clone();
            cfg.kind = ModelKind::Variant(variant);
            cfg.process = process;
            cfg.params = cfg.params.with_alpha(alpha);
            cfg.lindblad = Default::default();
            let traj = simulate(&cfg)?;
            Ok((traj.times.clone(), transition_probability(&traj, process)?))
        })
        .collect();
    let mut runs = runs.into_iter();
    for process in Process::BOTH {
        for alpha in VARIANT_ALPHAS {
            let mut by_variant = Vec::new();
            for _ in Variant::ALL {
                by_variant.push(runs.next().expect("one run per job")?);
            }
            let [(t_rabi, rabi), (t_ue01, ue01), (_, ue1exp)] =
                <[_; 3]>::try_from(by_variant).expect("three variants");
            let panel = format!("{}_alpha_{alpha:.0e}", process.name());
            let mut cfg = base.clone();
            cfg.process = process;
            cfg.params = cfg.params.with_alpha(alpha);
            let mut t = Table::new(cfg.describe(), &S3_COLUMNS);
            t.push_meta("ue01_start_s", format!("{:e}", t_ue01[0]));
            for k in 0..t_rabi.len() {
                t.push(vec![
                    num(t_rabi[k] * 1e6),
                    num(rabi[k]),
                    num(ue1exp[k]),
                    num(t_ue01[k] * 1e6),
                    num(ue01[k]),
                ]);
            }
            report.table(dir, &format!("{panel}.csv"), &t)?;
            let us: Vec<f64> = t_rabi.iter().map(|t| t * 1e6).collect();
            let us01: Vec<f64> = t_ue01.iter().map(|t| t * 1e6).collect();
            let plot = Plot::new(
                &format!("{}, alpha = {alpha:.0e} /s", process.name()),
                "t (us)",
                "transition probability",
            )
            .line("rabi", &us, &rabi)
            .line("ue01", &us01, &ue01)
            .line("ue1exp", &us, &ue1exp);
            report.plot(dir, &format!("{panel}.svg"), &plot)?;
            let max = rabi.iter().cloned().fold(0.0, f64::max);
            report.assertions.push(Assertion::new(
                format!("{panel}: rabi control stays below {RABI_LIMIT}"),
                max < RABI_LIMIT,
                format!("max {max:.3e}"),
            ));
        }
    }
    Ok(())
}
