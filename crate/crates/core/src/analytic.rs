//! Closed-form first-order transition probabilities and thermometry.
//!
//! With `x = 2πω_q/α = 1/β`:
//!
//! * ideal switching (T_d → ∞, C = 0):
//!   `P_exc = (g₀/ω_p)² x/(eˣ − 1)`, `P_emi = (g₀/ω_p)² x/(1 − e⁻ˣ)`;
//! * exponential switching, C = 0, with `θ = arctan(ω_p T_d)`:
//!   `P_exc = g₀²/(ω_p² + T_d⁻²) · x e^{(π−2θ)ν}/(eˣ − 1)`,
//!   `P_emi = g₀²/(ω_p² + T_d⁻²) · x e^{(2θ−π)ν}/(1 − e⁻ˣ)`;
//! * exponential switching, C > 0, with `w = 1/T_d − iω_p`:
//!   `P = g₀² e^{2C/(αT_d)} e^{∓2νθ} |Γ(1 ± iν, ζ)|² / |w|²`, where the upper
//!   sign is excitation and ζ is either `wC/α` (the change of variables
//!   `u = w(t + C/α)`) or the bare constant `C`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::params::{ModelParams, Process, HBAR, K_B};
use crate::quantum::C64;
use crate::special::{upper_incomplete_gamma, ComplexSpecialValue};

/// Second argument of the incomplete gamma function in the time-translated
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TranslatedFormula {
    /// ζ = C, as the formula is commonly quoted.
    LiteralArgument,
    /// ζ = (1/T_d − iω_p)·C/α, from the change of variables.
    CorrectedSubstitution,
}

impl TranslatedFormula {
    pub fn name(self) -> &'static str {
        match self {
            TranslatedFormula::LiteralArgument => "literal",
            TranslatedFormula::CorrectedSubstitution => "corrected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormVariant {
    Ideal,
    DampedC0,
    Translated(TranslatedFormula),
}

impl ClosedFormVariant {
    pub fn name(self) -> &'static str {
        match self {
            ClosedFormVariant::Ideal => "ideal",
            ClosedFormVariant::DampedC0 => "damped-c0",
            ClosedFormVariant::Translated(TranslatedFormula::LiteralArgument) => {
                "translated-literal"
            }
            ClosedFormVariant::Translated(TranslatedFormula::CorrectedSubstitution) => {
                "translated-corrected"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormResult {
    pub process: Process,
    pub variant: ClosedFormVariant,
    pub p_final: f64,
    /// `p_final · ω_p² / g₀²`
    pub p_eff: f64,
    pub beta: f64,
    /// Emission over excitation `p_eff` for the same variant and parameters.
    pub eta_pair: Option<f64>,
    /// θ = arctan(ω_p T_d) ∈ [0, π/2]; π/2 for the ideal variant.
    pub theta: f64,
    /// A = √(ω_p² + T_d⁻²)/α, dimensionless.
    pub a_scale: f64,
    /// Incomplete-gamma evaluation behind a translated result.
    pub special: Option<ComplexSpecialValue>,
    /// Validity assumption the formula rests on.
    pub assumption: &'static str,
}

fn check(params: &ModelParams) -> Result<()> {
    params.validate_positive()?;
    if !(params.g0 > 0.0) {
        return Err(invalid("g0", "closed forms need g₀ > 0"));
    }
    Ok(())
}

fn check_damped(params: &ModelParams) -> Result<()> {
    check(params)?;
    if !(params.t_d > 0.0 && params.t_d.is_finite()) {
        return Err(invalid("t_d", "damped closed forms need a finite T_d > 0"));
    }
    Ok(())
}

/// `x/(eˣ − 1)` for excitation, `x/(1 − e⁻ˣ)` for emission, without overflow.
fn planck_factor(process: Process, x: f64) -> f64 {
    match process {
        Process::Excitation => x / x.exp_m1(),
        Process::Emission => x / -(-x).exp_m1(),
    }
}

fn theta(params: &ModelParams) -> f64 {
    params.omega_p_t_d().atan()
}

fn a_scale(params: &ModelParams) -> f64 {
    (params.omega_p.powi(2) + params.t_d.powi(-2)).sqrt() / params.alpha
}

fn ideal_value(params: &ModelParams, process: Process) -> f64 {
    let x = 1.0 / params.beta();
    (params.g0 / params.omega_p).powi(2) * planck_factor(process, x)
}

fn damped_value(params: &ModelParams, process: Process) -> f64 {
    let nu = params.nu();
    let x = 2.0 * PI * nu;
    let th = theta(params);
    let prefactor = params.g0.powi(2) / (params.omega_p.powi(2) + params.t_d.powi(-2));
    // e^{(π−2θ)ν}/(eˣ − 1) = e^{−(π+2θ)ν}/(1 − e⁻ˣ)
    let exponent = match process {
        Process::Excitation => -(PI + 2.0 * th) * nu,
        Process::Emission => (2.0 * th - PI) * nu,
    };
    prefactor * x * exponent.exp() / -(-x).exp_m1()
}

fn translated_value(
    params: &ModelParams,
    process: Process,
    formula: TranslatedFormula,
) -> Result<(f64, ComplexSpecialValue)> {
    let nu = params.nu();
    let w = C64::new(1.0 / params.t_d, -params.omega_p);
    let zeta = match formula {
        TranslatedFormula::CorrectedSubstitution => w * (params.c / params.alpha),
        TranslatedFormula::LiteralArgument => C64::new(params.c, 0.0),
    };
    let sign = process.phase_sign();
    let g = upper_incomplete_gamma(C64::new(1.0, sign * nu), zeta)?;
    let th = theta(params);
    let log_scale = 2.0 * params.c / (params.alpha * params.t_d) - 2.0 * sign * nu * th;
    let p = params.g0.powi(2) * log_scale.exp() * g.value.norm_sqr() / w.norm_sqr();
    Ok((p, g))
}

fn p_eff_of(params: &ModelParams, p_final: f64) -> f64 {
    p_final * params.omega_p.powi(2) / params.g0.powi(2)
}

fn other(process: Process) -> Process {
    match process {
        Process::Excitation => Process::Emission,
        Process::Emission => Process::Excitation,
    }
}

fn eta_from(process: Process, p_eff: f64, partner_eff: f64) -> f64 {
    match process {
        Process::Excitation => partner_eff / p_eff,
        Process::Emission => p_eff / partner_eff,
    }
}

/// Ideal-switching Planck law.
pub fn p_final_ideal(params: &ModelParams, process: Process) -> Result<ClosedFormResult> {
    check(params)?;
    let p_final = ideal_value(params, process);
    let partner = ideal_value(params, other(process));
    let p_eff = p_eff_of(params, p_final);
    Ok(ClosedFormResult {
        process,
        variant: ClosedFormVariant::Ideal,
        p_final,
        p_eff,
        beta: params.beta(),
        eta_pair: Some(eta_from(process, p_eff, p_eff_of(params, partner))),
        theta: PI / 2.0,
        a_scale: params.omega_p / params.alpha,
        special: None,
        assumption: "omega_p*T_d >> 1",
    })
}

/// Exponential switching starting from αt = 0 (C = 0). `params.c` is ignored.
pub fn p_final_damped(params: &ModelParams, process: Process) -> Result<ClosedFormResult> {
    check_damped(params)?;
    let p_final = damped_value(params, process);
    let partner = damped_value(params, other(process));
    let p_eff = p_eff_of(params, p_final);
    Ok(ClosedFormResult {
        process,
        variant: ClosedFormVariant::DampedC0,
        p_final,
        p_eff,
        beta: params.beta(),
        eta_pair: Some(eta_from(process, p_eff, p_eff_of(params, partner))),
        theta: theta(params),
        a_scale: a_scale(params),
        special: None,
        assumption: "C = 0",
    })
}

/// Exponential switching with gap ω_q/(αt + C), C > 0.
pub fn p_final_translated(
    params: &ModelParams,
    process: Process,
    formula: TranslatedFormula,
) -> Result<ClosedFormResult> {
    check_damped(params)?;
    if !(params.c > 0.0) {
        return Err(invalid("c", "the translated closed form needs C > 0"));
    }
    let (p_final, special) = translated_value(params, process, formula)?;
    let (partner, _) = translated_value(params, other(process), formula)?;
    let p_eff = p_eff_of(params, p_final);
    Ok(ClosedFormResult {
        process,
        variant: ClosedFormVariant::Translated(formula),
        p_final,
        p_eff,
        beta: params.beta(),
        eta_pair: Some(eta_from(process, p_eff, p_eff_of(params, partner))),
        theta: theta(params),
        a_scale: a_scale(params),
        special: Some(special),
        assumption: "C > 0",
    })
}

/// Ratio of the damped (C = 0) to the ideal result:
/// `ω_p²/(ω_p² + T_d⁻²) · e^{±(π−2θ)ν}` (+ for excitation).
pub fn damping_factor(params: &ModelParams, process: Process) -> Result<f64> {
    check_damped(params)?;
    let ratio = params.omega_p.powi(2) / (params.omega_p.powi(2) + params.t_d.powi(-2));
    Ok(ratio * (process.phase_sign() * (PI - 2.0 * theta(params)) * params.nu()).exp())
}

/// Temperature read off a pair of effective probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermometry {
    pub beta_fit: f64,
    /// K
    pub t_u_fit: f64,
    pub eta: f64,
}

/// `η = p_eff,emi/p_eff,exc`, `β = 1/ln η`, `T_U = β ħω_q/k_B`.
pub fn thermometry(p_eff_exc: f64, p_eff_emi: f64, omega_q: f64) -> Result<Thermometry> {
    if !(p_eff_exc > 0.0) || !p_eff_emi.is_finite() || !p_eff_exc.is_finite() {
        return Err(Error::NonThermal(format!(
            "need finite p_eff with p_eff,exc > 0 (exc = {p_eff_exc}, emi = {p_eff_emi})"
        )));
    }
    let eta = p_eff_emi / p_eff_exc;
    if !(eta > 1.0) {
        return Err(Error::NonThermal(format!(
            "emission/excitation ratio {eta} ≤ 1 has no positive temperature"
        )));
    }
    let beta_fit = 1.0 / eta.ln();
    Ok(Thermometry {
        beta_fit,
        t_u_fit: beta_fit * HBAR * omega_q / K_B,
        eta,
    })
}
