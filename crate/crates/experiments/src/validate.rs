//! Operating-point constraints of the trapped-ion implementation.
//!
//! Physically meaningless values (negative or non-finite frequencies,
//! C < 0) are hard errors. Everything else is reported as a [`Finding`]
//! with a signed margin so that marginal points can be spotted in a sweep.

use std::fmt;

use serde::Serialize;
use unruh_core::analytic::p_final_ideal;
use unruh_core::params::{Process, MAX_LAMB_DICKE, RWA_RATIO_LIMIT};

use crate::config::RunConfig;
use crate::error::{LabError, LabResult};

/// Lower edge of the measurable window for p_final.
pub const MEASURABLE_P_FINAL: f64 = 0.02;
/// First-order validity: p_final must stay below this.
pub const APPROXIMATION_P_FINAL: f64 = 0.1;
/// ω_q/ω_p below which the spin and phonon resonances are hard to separate.
pub const OBSERVABILITY_RATIO: f64 = 4.0;
/// ω_p T_d below which damped switching is far from the ideal limit.
pub const MIN_OMEGA_P_T_D: f64 = 10.0;
/// Observation window in units of T_d needed for the coupling to switch off.
pub const MIN_WINDOW_IN_T_D: f64 = 4.0;
pub const BETA_RANGE: (f64, f64) = (0.1, 100.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Pass,
    Warning,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub constraint: &'static str,
    pub severity: Severity,
    pub value: f64,
    pub limit: f64,
    /// Relative distance to the limit; negative when violated.
    pub margin: f64,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Pass => "ok",
            Severity::Warning => "WARN",
            Severity::Info => "info",
        };
        write!(
            f,
            "[{tag:>4}] {:<16} value {:.4e} limit {:.4e} margin {:+.3}  {}",
            self.constraint, self.value, self.limit, self.margin, self.message
        )
    }
}

fn upper(constraint: &'static str, value: f64, limit: f64, message: String) -> Finding {
    let margin = (limit - value) / limit;
    Finding {
        constraint,
        severity: if value <= limit {
            Severity::Pass
        } else {
            Severity::Warning
        },
        value,
        limit,
        margin,
        message,
    }
}

fn lower(constraint: &'static str, value: f64, limit: f64, message: String) -> Finding {
    let margin = (value - limit) / limit;
    Finding {
        constraint,
        severity: if value >= limit {
            Severity::Pass
        } else {
            Severity::Warning
        },
        value,
        limit,
        margin,
        message,
    }
}

/// Evaluate every operating-point constraint for `cfg`.
pub fn validate_params(cfg: &RunConfig) -> LabResult<Vec<Finding>> {
    let p = &cfg.params;
    p.validate()?;
    if !(cfg.ion.omega_z > 0.0) || !cfg.ion.omega_z.is_finite() {
        return Err(LabError::Config(format!(
            "omega_z must be > 0, got {}",
            cfg.ion.omega_z
        )));
    }
    if !(cfg.ion.lamb_dicke > 0.0) || !cfg.ion.lamb_dicke.is_finite() {
        return Err(LabError::Config(format!(
            "lamb_dicke must be > 0, got {}",
            cfg.ion.lamb_dicke
        )));
    }
    let positive = p.alpha > 0.0 && p.omega_q > 0.0 && p.omega_p > 0.0;
    let mut out = Vec::new();

    if p.omega_p > 0.0 {
        out.push(lower(
            "observability",
            p.omega_q / p.omega_p,
            OBSERVABILITY_RATIO,
            "omega_q/omega_p separates spin and phonon resonances".into(),
        ));
    }

    let omega_z = cfg.ion.omega_z;
    out.push(upper(
        "rwa_qubit",
        p.omega_q / omega_z,
        RWA_RATIO_LIMIT,
        format!(
            "omega_q/omega_z with omega_z/2pi = {:.1} kHz",
            omega_z / (2e3 * std::f64::consts::PI)
        ),
    ));
    out.push(upper(
        "rwa_phonon",
        p.omega_p / omega_z,
        RWA_RATIO_LIMIT,
        "omega_p/omega_z".into(),
    ));
    if p.c > 0.0 {
        out.push(upper(
            "rwa_initial_gap",
            p.omega_q / (p.c * omega_z),
            RWA_RATIO_LIMIT,
            "largest gap omega_q/C against omega_z".into(),
        ));
    } else {
        out.push(Finding {
            constraint: "rwa_initial_gap",
            severity: Severity::Warning,
            value: f64::INFINITY,
            limit: RWA_RATIO_LIMIT,
            margin: f64::NEG_INFINITY,
            message: "C = 0 makes the gap diverge at t = 0; only the effective model can run it"
                .into(),
        });
    }

    if positive && p.g0 > 0.0 {
        let exc = p_final_ideal(p, Process::Excitation)?.p_final;
        let emi = p_final_ideal(p, Process::Emission)?.p_final;
        out.push(lower(
            "measurability",
            exc.min(emi),
            MEASURABLE_P_FINAL,
            format!("ideal p_final: excitation {exc:.4}, emission {emi:.4}"),
        ));
        out.push(upper(
            "approximation",
            exc.max(emi),
            APPROXIMATION_P_FINAL,
            format!(
                "first order needs p_final << 1; g0/omega_p = {:.3}",
                p.g0 / p.omega_p
            ),
        ));
    }

    if positive {
        let beta = p.beta();
        let (lo, hi) = BETA_RANGE;
        let inside = (lo..=hi).contains(&beta);
        out.push(Finding {
            constraint: "beta_range",
            severity: if inside {
                Severity::Pass
            } else {
                Severity::Info
            },
            value: beta,
            limit: if beta < lo { lo } else { hi },
            margin: if beta < lo {
                (beta - lo) / lo
            } else {
                (hi - beta) / hi
            },
            message: format!("beta = alpha/(2 pi omega_q) within [{lo}, {hi}]"),
        });
    }

    if p.t_d.is_finite() && p.t_d > 0.0 {
        out.push(lower(
            "switching_time",
            p.omega_p_t_d(),
            MIN_OMEGA_P_T_D,
            "omega_p T_d >> 1 keeps damped switching near the ideal limit".into(),
        ));
        out.push(lower(
            "window",
            cfg.grid.t_end / p.t_d,
            MIN_WINDOW_IN_T_D,
            "t_end/T_d: the coupling must have switched off".into(),
        ));
    }

    out.push(upper(
        "lamb_dicke",
        cfg.ion.lamb_dicke,
        MAX_LAMB_DICKE,
        "first-order Lamb-Dicke expansion".into(),
    ));
    Ok(out)
}

pub fn warnings(findings: &[Finding]) -> impl Iterator<Item = &Finding> {
    findings.iter().filter(|f| f.severity == Severity::Warning)
}
