//! Acceleration sweeps.
//!
//! Each grid point gets β, every closed form, the quadrature oracle at
//! t → ∞ and optionally a full simulation (and noise band) read at
//! `t_final`. Emission uses the zone-I phonon frequency below the computed
//! crossover and the zone-II frequency above it; excitation always uses
//! zone II.

use rayon::prelude::*;
use unruh_core::analytic::{p_final_damped, p_final_ideal, p_final_translated, TranslatedFormula};
use unruh_core::evolution::{evolve_schrodinger, transition_probability, uniform_grid};
use unruh_core::hamiltonians::build_h_exp;
use unruh_core::noise::{run_ensemble, EffectiveFamily};
use unruh_core::oracle::transition_probability_quadrature;
use unruh_core::params::{rad_per_s_to_khz, ModelParams, Process, Switching};
use unruh_core::quantum::QuantumState;

use crate::config::{RunConfig, SweepSpec};
use crate::error::LabResult;
use crate::output::{num, opt_num, Table};
use crate::validate::APPROXIMATION_P_FINAL;

/// Samples on [0, t_final] for simulated points; only the last is used.
const SIM_SAMPLES: usize = 10;
/// Bracket for the crossover search, s⁻¹.
const CROSSOVER_BRACKET: (f64, f64) = (1e2, 1e14);

pub const COLUMNS: [&str; 21] = [
    "alpha_per_s",
    "process",
    "zone",
    "nu_p_khz",
    "beta",
    "p_ideal",
    "p_damped_c0",
    "p_translated_literal",
    "p_translated_corrected",
    "p_oracle_inf",
    "oracle_abs_err",
    "p_sim",
    "noise_mean",
    "noise_low",
    "noise_high",
    "p_eff_ideal",
    "p_eff_damped_c0",
    "p_eff_translated_corrected",
    "p_eff_oracle",
    "p_eff_sim",
    "error",
];
pub const TEXT_COLUMNS: [&str; 2] = ["process", "error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    /// Below the crossover; emission runs at the zone-I phonon frequency.
    I,
    II,
}

impl Zone {
    pub fn number(self) -> u8 {
        match self {
            Zone::I => 1,
            Zone::II => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub process: Process,
    pub zone: Zone,
    pub params: ModelParams,
    pub beta: f64,
    pub p_ideal: Option<f64>,
    pub p_damped_c0: Option<f64>,
    pub p_translated_literal: Option<f64>,
    pub p_translated_corrected: Option<f64>,
    pub p_oracle_inf: Option<f64>,
    pub oracle_abs_err: Option<f64>,
    pub p_sim: Option<f64>,
    /// `(mean, low, high)` at t_final.
    pub noise: Option<(f64, f64, f64)>,
    pub errors: Vec<String>,
}

impl SweepRow {
    fn eff(&self, p: Option<f64>) -> Option<f64> {
        p.map(|p| p * self.params.omega_p.powi(2) / self.params.g0.powi(2))
    }

    pub fn p_eff_ideal(&self) -> Option<f64> {
        self.eff(self.p_ideal)
    }

    pub fn p_eff_damped_c0(&self) -> Option<f64> {
        self.eff(self.p_damped_c0)
    }

    pub fn p_eff_translated(&self) -> Option<f64> {
        self.eff(self.p_translated_corrected)
    }

    pub fn p_eff_oracle(&self) -> Option<f64> {
        self.eff(self.p_oracle_inf)
    }

    pub fn p_eff_sim(&self) -> Option<f64> {
        self.eff(self.p_sim)
    }

    fn cells(&self) -> Vec<String> {
        let noise = |k: usize| opt_num(self.noise.map(|n| [n.0, n.1, n.2][k]));
        let error = self.errors.join("; ").replace([',', '\n'], ";");
        vec![
            num(self.alpha),
            self.process.name().into(),
            self.zone.number().to_string(),
            num(rad_per_s_to_khz(self.params.omega_p)),
            num(self.beta),
            opt_num(self.p_ideal),
            opt_num(self.p_damped_c0),
            opt_num(self.p_translated_literal),
            opt_num(self.p_translated_corrected),
            opt_num(self.p_oracle_inf),
            opt_num(self.oracle_abs_err),
            opt_num(self.p_sim),
            noise(0),
            noise(1),
            noise(2),
            opt_num(self.p_eff_ideal()),
            opt_num(self.p_eff_damped_c0()),
            opt_num(self.p_eff_translated()),
            opt_num(self.p_eff_oracle()),
            opt_num(self.p_eff_sim()),
            error,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub alphas: Vec<f64>,
    /// Smallest α with ideal p_emi(zone II) < the first-order bound.
    pub crossover: Option<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_for(&self, process: Process) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.process == process)
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.errors.is_empty()).count()
    }

    pub fn table(&self, cfg: &RunConfig) -> Table {
        let mut t = Table::new(cfg.describe(), &COLUMNS);
        let s = &cfg.sweep;
        t.push_meta(
            "sweep_alpha_range_per_s",
            format!("[{:e}, {:e}]", s.alpha_min, s.alpha_max),
        );
        t.push_meta("sweep_points", s.points);
        t.push_meta("zone1_nu_p_khz", rad_per_s_to_khz(s.zone1_omega_p));
        t.push_meta("zone2_nu_p_khz", rad_per_s_to_khz(s.zone2_omega_p));
        t.push_meta(
            "zone_boundary_alpha_per_s",
            self.crossover
                .map(|a| format!("{a:.6e}"))
                .unwrap_or_else(|| "none".into()),
        );
        t.push_meta(
            "zone_rule",
            "emission uses zone1 below the boundary; excitation always zone2",
        );
        t.push_meta("t_final_ms", s.t_final * 1e3);
        t.push_meta("simulated", s.simulate);
        t.push_meta("noise_band", s.noise);
        for r in &self.rows {
            t.push(r.cells());
        }
        t
    }
}

/// Smallest α at which the ideal emission p_final at `omega_p` drops below
/// the first-order bound; p_emi decreases monotonically in α.
pub fn crossover_alpha(params: &ModelParams, omega_p: f64) -> LabResult<Option<f64>> {
    let p = params.with_omega_p(omega_p);
    let f = |alpha: f64| -> LabResult<f64> {
        Ok(p_final_ideal(&p.with_alpha(alpha), Process::Emission)?.p_final - APPROXIMATION_P_FINAL)
    };
    let (mut lo, mut hi) = (CROSSOVER_BRACKET.0.ln(), CROSSOVER_BRACKET.1.ln());
    if f(hi.exp())? >= 0.0 {
        return Ok(None);
    }
    if f(lo.exp())? < 0.0 {
        return Ok(Some(lo.exp()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp())? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(Some(hi.exp()))
}

pub fn zone_of(alpha: f64, crossover: Option<f64>) -> Zone {
    match crossover {
        Some(c) if alpha < c => Zone::I,
        Some(_) => Zone::II,
        None => Zone::I,
    }
}

/// Phonon frequency for one sweep point.
pub fn zone_omega_p(spec: &SweepSpec, process: Process, zone: Zone) -> f64 {
    match (process, zone) {
        (Process::Emission, Zone::I) => spec.zone1_omega_p,
        _ => spec.zone2_omega_p,
    }
}

/// Run the sweep in `cfg.sweep` around `cfg.params`.
pub fn run_sweep(cfg: &RunConfig) -> LabResult<SweepResult> {
    cfg.sweep.validate()?;
    let spec = &cfg.sweep;
    let crossover = crossover_alpha(&cfg.params, spec.zone2_omega_p)?;
    let alphas = spec.alphas();
    let tasks: Vec<(f64, Process)> = alphas
        .iter()
        .flat_map(|&a| spec.processes.iter().map(move |&p| (a, p)))
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(alpha, process)| {
            let zone = zone_of(alpha, crossover);
            let params = cfg
                .params
                .with_alpha(alpha)
                .with_omega_p(zone_omega_p(spec, process, zone));
            sweep_point(cfg, params, process, zone)
        })
        .collect();
    Ok(SweepResult {
        alphas,
        crossover,
        rows,
    })
}

fn keep<T>(errors: &mut Vec<String>, what: &str, r: unruh_core::Result<T>) -> Option<T> {
    r.map_err(|e| errors.push(format!("{what}: {e}"))).ok()
}

/// Evaluate one (α, process) point; failures are recorded, not raised.
pub fn sweep_point(cfg: &RunConfig, params: ModelParams, process: Process, zone: Zone) -> SweepRow {
    let mut errors = Vec::new();
    let e = &mut errors;
    let damped = params.switching == Switching::ExponentialDamped;
    let p_ideal = keep(e, "ideal", p_final_ideal(&params, process)).map(|r| r.p_final);
    let p_damped_c0 = if damped {
        keep(e, "damped", p_final_damped(&params.with_c(0.0), process)).map(|r| r.p_final)
    } else {
        None
    };
    let translated = |f| {
        if damped && params.c > 0.0 {
            Some(p_final_translated(&params, process, f).map(|r| r.p_final))
        } else {
            None
        }
    };
    let p_translated_literal =
        translated(TranslatedFormula::LiteralArgument).and_then(|r| keep(e, "literal", r));
    let p_translated_corrected =
        translated(TranslatedFormula::CorrectedSubstitution).and_then(|r| keep(e, "translated", r));
    let oracle = if damped {
        keep(
            e,
            "oracle",
            transition_probability_quadrature(process, &params, f64::INFINITY),
        )
    } else {
        None
    };
    let t_final = cfg.sweep.t_final;
    let p_sim = if cfg.sweep.simulate {
        keep(
            e,
            "simulation",
            simulate_final(cfg, &params, process, t_final),
        )
    } else {
        None
    };
    let noise = if cfg.sweep.noise {
        match noise_final(cfg, &params, process, t_final) {
            Ok(n) => Some(n),
            Err(err) => {
                e.push(format!("noise: {err}"));
                None
            }
        }
    } else {
        None
    };
    SweepRow {
        alpha: params.alpha,
        process,
        zone,
        params,
        beta: params.beta(),
        p_ideal,
        p_damped_c0,
        p_translated_literal,
        p_translated_corrected,
        p_oracle_inf: oracle.map(|o| o.probability),
        oracle_abs_err: oracle.map(|o| o.abs_error),
        p_sim,
        noise,
        errors,
    }
}

fn simulate_final(
    cfg: &RunConfig,
    params: &ModelParams,
    process: Process,
    t_final: f64,
) -> unruh_core::Result<f64> {
    let spec = cfg.spec().map_err(lab_to_core)?;
    let psi = QuantumState::basis(spec, process.initial_spin(), 0)?;
    let h = build_h_exp(params, spec)?;
    let traj = evolve_schrodinger(
        &h,
        &psi,
        &uniform_grid(0.0, t_final, SIM_SAMPLES),
        &cfg.integrator,
    )?;
    Ok(*transition_probability(&traj, process)?
        .last()
        .expect("grid is non-empty"))
}

fn noise_final(
    cfg: &RunConfig,
    params: &ModelParams,
    process: Process,
    t_final: f64,
) -> LabResult<(f64, f64, f64)> {
    let family = EffectiveFamily {
        params: *params,
        spec: cfg.spec()?,
        integrator: cfg.integrator,
    };
    let ens = run_ensemble(
        &family,
        process,
        &cfg.noise_config()?,
        &uniform_grid(0.0, t_final, SIM_SAMPLES),
    )?;
    let k = ens.times.len() - 1;
    Ok((ens.mean[k], ens.band_low[k], ens.band_high[k]))
}

fn lab_to_core(e: crate::error::LabError) -> unruh_core::Error {
    match e {
        crate::error::LabError::Core(c) => c,
        other => unruh_core::Error::InvalidState(other.to_string()),
    }
}
