//! First-order transition probabilities by direct quadrature of the
//! amplitude `A(t) = ∫₀ᵗ g₀χ(s) e^{i(ω_p s ± ν ln(αs + C))} ds`, with the
//! upper sign for excitation and ν = ω_q/α.
//!
//! The time axis is cut into fixed panels whose width follows the local
//! oscillation period, the damping time and (near s = 0) the distance to
//! the logarithmic singularity. Each panel is integrated by adaptive
//! Gauss-Kronrod. Panel boundaries do not depend on the upper limit, so a
//! series of upper limits reproduces single-shot values exactly.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::params::{ModelParams, Process, Switching};
use crate::quadrature;
use crate::quantum::{C64, I, ONE, ZERO};

/// Lower cut-off for C = 0; `[0, T_MIN]` is integrated analytically.
const T_MIN: f64 = 1e-20;
/// Tail cut-off for infinite upper limits: `g₀ T_d e^{−t/T_d}`.
const TAIL_BOUND: f64 = 1e-14;
const PANEL_REL_TOL: f64 = 1e-15;
const PANEL_MAX_INTERVALS: usize = 64;

/// The unimodular-phase integrand of the first-order amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeIntegrand {
    pub process: Process,
    pub params: ModelParams,
}

impl AmplitudeIntegrand {
    pub fn new(process: Process, params: ModelParams) -> Result<Self> {
        params.validate()?;
        if !(params.alpha > 0.0) {
            return Err(invalid("alpha", "the oracle needs α > 0"));
        }
        Ok(Self { process, params })
    }

    /// `g₀χ(t)`
    pub fn envelope(&self, t: f64) -> f64 {
        let p = &self.params;
        match p.switching {
            Switching::Constant => p.g0,
            Switching::ExponentialDamped => p.g0 * (-t / p.t_d).exp(),
        }
    }

    /// `ω_p t ± ν ln(αt + C)`
    pub fn phase(&self, t: f64) -> f64 {
        let p = &self.params;
        p.omega_p * t + self.process.phase_sign() * p.nu() * (p.alpha * t + p.c).ln()
    }

    pub fn value(&self, t: f64) -> C64 {
        C64::from_polar(self.envelope(t), self.phase(t))
    }

    /// Width of the panel starting at `t`.
    fn panel_width(&self, t: f64) -> f64 {
        let p = &self.params;
        let chirp = p.omega_q / (p.alpha * t + p.c);
        let mut w = 2.0 * PI / (10.0 * (p.omega_p + chirp));
        if p.switching == Switching::ExponentialDamped {
            w = w.min(p.t_d / 50.0);
        }
        w.min(0.5 * (t + p.c / p.alpha))
    }

    /// `∫₀^{t} value` for `t ≤ T_MIN` when C = 0, with χ ≈ 1 and
    /// `e^{iω_p s} ≈ 1`.
    fn singular_head(&self, t: f64) -> C64 {
        let p = &self.params;
        let s = self.process.phase_sign();
        let exponent = ONE + I * (s * p.nu());
        // g₀ α^{±iν} t^{1±iν} / (1 ± iν)
        let log = I * (s * p.nu() * p.alpha.ln()) + exponent * t.ln();
        p.g0 * log.exp() / exponent
    }
}

/// Outcome of one quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub t_end: f64,
    pub amplitude: C64,
    /// `|amplitude|²`
    pub probability: f64,
    /// Absolute error estimate on `probability`.
    pub abs_error: f64,
    pub panels: usize,
}

/// `P(t_end) = |A(t_end)|²`. `t_end = f64::INFINITY` needs exponential
/// switching.
pub fn transition_probability_quadrature(
    process: Process,
    params: &ModelParams,
    t_end: f64,
) -> Result<OracleResult> {
    Ok(accumulate(process, params, &[t_end])?.remove(0))
}

/// `P(tᵢ)` along an increasing grid, bit-identical to single-shot calls.
pub fn transition_probability_series(
    process: Process,
    params: &ModelParams,
    grid: &[f64],
) -> Result<Vec<OracleResult>> {
    accumulate(process, params, grid)
}

fn finish(t_end: f64, amplitude: C64, amp_error: f64, panels: usize) -> OracleResult {
    let probability = amplitude.norm_sqr();
    OracleResult {
        t_end,
        amplitude,
        probability,
        abs_error: 2.0 * amplitude.norm() * amp_error + amp_error * amp_error,
        panels,
    }
}

fn accumulate(
    process: Process,
    params: &ModelParams,
    targets: &[f64],
) -> Result<Vec<OracleResult>> {
    let f = AmplitudeIntegrand::new(process, *params)?;
    for (k, &t) in targets.iter().enumerate() {
        if !(t >= 0.0) || t.is_nan() {
            return Err(invalid(
                "t_end",
                format!("upper limits must be ≥ 0, got {t}"),
            ));
        }
        if k > 0 && !(t > targets[k - 1]) {
            return Err(invalid("grid", "upper limits must be strictly increasing"));
        }
        if t.is_infinite() && (params.switching == Switching::Constant || k + 1 != targets.len()) {
            return Err(invalid(
                "t_end",
                "an infinite upper limit needs exponential switching and must come last",
            ));
        }
    }
    let g = params.g0;
    let integrand = |t: f64| f.value(t);
    let panel = |a: f64, b: f64| -> Result<(C64, f64)> {
        let abs_tol = 1e-14 * g * (b - a);
        let r = quadrature::integrate(
            &integrand,
            a,
            b,
            abs_tol,
            PANEL_REL_TOL,
            PANEL_MAX_INTERVALS,
        )?;
        Ok((r.value, r.error))
    };

    let mut out = Vec::with_capacity(targets.len());
    let mut remaining = targets.iter().copied().peekable();
    let mut acc = ZERO;
    let mut err = 0.0;
    let mut panels = 0;
    let mut lo = 0.0;
    if params.c == 0.0 {
        while let Some(&t) = remaining.peek() {
            if t > T_MIN {
                break;
            }
            let head = if t == 0.0 { ZERO } else { f.singular_head(t) };
            out.push(finish(t, head, 0.0, 0));
            remaining.next();
        }
        acc = f.singular_head(T_MIN);
        lo = T_MIN;
    }
    while let Some(&target) = remaining.peek() {
        let hi = lo + f.panel_width(lo);
        if target.is_infinite() {
            if g * params.t_d * (-lo / params.t_d).exp() < TAIL_BOUND {
                out.push(finish(target, acc, err + TAIL_BOUND, panels));
                remaining.next();
                continue;
            }
        } else if target <= hi {
            let (v, e) = if target > lo {
                panel(lo, target)?
            } else {
                (ZERO, 0.0)
            };
            out.push(finish(target, acc + v, err + e, panels + 1));
            remaining.next();
            continue;
        }
        let (v, e) = panel(lo, hi)?;
        acc += v;
        err += e;
        panels += 1;
        lo = hi;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::p_final_damped;

    #[test]
    fn integrand_is_unimodular_phase_times_envelope() {
        let f = AmplitudeIntegrand::new(Process::Emission, ModelParams::default()).unwrap();
        for k in 0..50 {
            let t = k as f64 * 2.1e-5;
            assert!((f.value(t).norm() - f.envelope(t)).abs() < 1e-12 * f.params.g0);
            assert!(f.value(t).norm() <= f.params.g0 * (1.0 + 1e-15));
        }
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let mut p = ModelParams::default();
        p.g0 = 0.0;
        for process in Process::BOTH {
            let r = transition_probability_quadrature(process, &p, 1e-3).unwrap();
            assert_eq!(r.probability, 0.0);
        }
    }

    #[test]
    fn vanishing_spin_frequency_is_elementary() {
        let mut p = ModelParams::default();
        p.omega_q = 0.0;
        let r = transition_probability_quadrature(Process::Excitation, &p, f64::INFINITY).unwrap();
        let expected = p.g0.powi(2) / (p.t_d.powi(-2) + p.omega_p.powi(2));
        assert!((r.probability - expected).abs() < 1e-10 * expected);
        assert!(r.abs_error < 1e-10);
    }

    #[test]
    fn matches_damped_closed_form_at_c_zero() {
        let p = ModelParams::default().with_c(0.0);
        for process in Process::BOTH {
            let r = transition_probability_quadrature(process, &p, f64::INFINITY).unwrap();
            let cf = p_final_damped(&p, process).unwrap().p_final;
            assert!(((r.probability - cf) / cf).abs() < 1e-6, "{process:?}");
        }
    }

    #[test]
    fn series_reproduces_single_shots() {
        let p = ModelParams::default();
        let grid: Vec<f64> = (0..=10)
            .map(|k| k as f64 * 1e-4)
            .chain([f64::INFINITY])
            .collect();
        let series = transition_probability_series(Process::Excitation, &p, &grid).unwrap();
        assert_eq!(series[0].probability, 0.0);
        for (t, r) in grid.iter().zip(&series) {
            let single = transition_probability_quadrature(Process::Excitation, &p, *t).unwrap();
            assert_eq!(single.probability, r.probability, "t = {t}");
        }
    }

    #[test]
    fn rejects_bad_limits() {
        let mut p = ModelParams::default();
        assert!(transition_probability_series(Process::Excitation, &p, &[1e-4, 1e-4]).is_err());
        assert!(transition_probability_quadrature(Process::Excitation, &p, -1.0).is_err());
        p.switching = Switching::Constant;
        assert!(transition_probability_quadrature(Process::Excitation, &p, f64::INFINITY).is_err());
        transition_probability_quadrature(Process::Excitation, &p, 1e-3).unwrap();
    }
}
