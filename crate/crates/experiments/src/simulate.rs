//! Single-model runs driven by a [`RunConfig`].

use unruh_core::evolution::{
    evolve_lindblad, evolve_schrodinger, transition_probability, Trajectory,
};
use unruh_core::hamiltonians::{
    build_h_exp, build_ion_rotframe, build_ion_rwa, build_variant, interaction_v,
    TimeDependentHamiltonian, Variant,
};
use unruh_core::noise::{run_ensemble, EffectiveFamily, EnsembleResult, IonFamily};
use unruh_core::oracle::transition_probability_series;
use unruh_core::quantum::QuantumState;

use crate::config::{ModelKind, RunConfig};
use crate::error::{LabError, LabResult};
use crate::output::{num, Table};

pub const TRAJECTORY_COLUMNS: [&str; 7] = [
    "t_us",
    "P_g",
    "P_e",
    "mean_n",
    "norm",
    "P_transition",
    "P_oracle",
];
pub const ENSEMBLE_COLUMNS: [&str; 4] = ["t_us", "mean", "band_low", "band_high"];

pub fn hamiltonian(cfg: &RunConfig, kind: ModelKind) -> LabResult<TimeDependentHamiltonian> {
    let spec = cfg.spec()?;
    let p = &cfg.params;
    Ok(match kind {
        ModelKind::HExp => build_h_exp(p, spec)?,
        ModelKind::Interaction => interaction_v(p, spec)?,
        ModelKind::Variant(v) => build_variant(v, p, spec)?,
        ModelKind::IonRotframe => build_ion_rotframe(&cfg.ion_params(), spec)?,
        ModelKind::IonRwa => build_ion_rwa(&cfg.ion_params(), spec)?,
    })
}

/// Time grid for `kind`: ue01 is singular at t = 0 and starts at
/// t₀ = ue01_alpha_t0/α instead.
pub fn grid_for(cfg: &RunConfig, kind: ModelKind) -> LabResult<Vec<f64>> {
    let mut grid = cfg.grid.times();
    if kind == ModelKind::Variant(Variant::Ue01) {
        let t0 = cfg.ue01_alpha_t0 / cfg.params.alpha;
        if grid[0] < t0 {
            grid.retain(|t| *t > t0);
            grid.insert(0, t0);
        }
        if grid.len() < 2 {
            return Err(LabError::Config(format!(
                "ue01 start time {t0:e} s leaves no grid points"
            )));
        }
    }
    Ok(grid)
}

/// Evolve `|s, 0⟩` with s set by the process. Nonzero Lindblad rates switch
/// to the master equation.
pub fn simulate(cfg: &RunConfig) -> LabResult<Trajectory> {
    let spec = cfg.spec()?;
    let h = hamiltonian(cfg, cfg.kind)?;
    let grid = grid_for(cfg, cfg.kind)?;
    let psi = QuantumState::basis(spec, cfg.process.initial_spin(), 0)?;
    let integrator = cfg.integrator_for(cfg.kind);
    if cfg.lindblad.is_zero() {
        Ok(evolve_schrodinger(&h, &psi, &grid, &integrator)?)
    } else {
        let rho = QuantumState::density(spec, psi.to_density())?;
        Ok(evolve_lindblad(
            &h,
            &rho,
            &cfg.lindblad.terms(spec)?,
            &grid,
            &integrator,
        )?)
    }
}

/// First-order oracle along the trajectory grid; only the chirped-gap models
/// with C > 0 or t > 0 have one.
pub fn oracle_series(cfg: &RunConfig, times: &[f64]) -> LabResult<Option<Vec<f64>>> {
    if !matches!(
        cfg.kind,
        ModelKind::HExp | ModelKind::Interaction | ModelKind::IonRotframe | ModelKind::IonRwa
    ) {
        return Ok(None);
    }
    Ok(Some(
        transition_probability_series(cfg.process, &cfg.params, times)?
            .into_iter()
            .map(|o| o.probability)
            .collect(),
    ))
}

pub fn trajectory_table(
    cfg: &RunConfig,
    traj: &Trajectory,
    oracle: Option<&[f64]>,
) -> LabResult<Table> {
    let series = transition_probability(traj, cfg.process)?;
    let mut t = Table::new(cfg.describe(), &TRAJECTORY_COLUMNS);
    t.push_meta("integrator_steps", traj.steps);
    t.push_meta("max_norm_drift", format!("{:e}", traj.max_norm_drift()));
    t.push_meta(
        "warnings",
        if traj.warnings.is_empty() {
            "none".into()
        } else {
            traj.warnings.join("; ")
        },
    );
    for k in 0..traj.len() {
        t.push(vec![
            num(traj.times[k] * 1e6),
            num(traj.p_g[k]),
            num(traj.p_e[k]),
            num(traj.mean_n[k]),
            num(traj.norm_or_trace[k]),
            num(series[k]),
            num(oracle.map_or(f64::NAN, |o| o[k])),
        ]);
    }
    Ok(t)
}

/// Noise ensemble for the effective or ion-rotating-frame model.
pub fn ensemble(cfg: &RunConfig) -> LabResult<EnsembleResult> {
    let spec = cfg.spec()?;
    let noise = cfg.noise_config()?;
    let grid = grid_for(cfg, cfg.kind)?;
    Ok(match cfg.kind {
        ModelKind::HExp => {
            let family = EffectiveFamily {
                params: cfg.params,
                spec,
                integrator: cfg.integrator,
            };
            run_ensemble(&family, cfg.process, &noise, &grid)?
        }
        ModelKind::IonRotframe => {
            let mut family = IonFamily::new(cfg.ion_params(), spec);
            family.integrator = cfg.integrator_for(ModelKind::IonRotframe);
            run_ensemble(&family, cfg.process, &noise, &grid)?
        }
        other => {
            return Err(LabError::Config(format!(
                "noise ensembles run on h_exp or ion_rotframe, not {}",
                other.name()
            )))
        }
    })
}

pub fn ensemble_table(cfg: &RunConfig, ens: &EnsembleResult) -> Table {
    let mut t = Table::new(cfg.describe(), &ENSEMBLE_COLUMNS);
    t.push_meta("ensemble_label", &ens.label);
    t.push_meta("shots", ens.shots());
    if !ens.warnings.is_empty() {
        t.push_meta("warnings", ens.warnings.join("; "));
    }
    for k in 0..ens.times.len() {
        t.push(vec![
            num(ens.times[k] * 1e6),
            num(ens.mean[k]),
            num(ens.band_low[k]),
            num(ens.band_high[k]),
        ]);
    }
    t
}
