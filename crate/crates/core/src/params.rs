//! Physical parameters of the detector-field model and the trapped-ion
//! implementation. All frequencies are angular (rad/s), times in seconds,
//! and ħ = 1 inside the dynamics.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::quantum::Spin;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Convert an ordinary frequency in kHz to angular frequency in rad/s.
pub fn khz_to_rad_per_s(nu_khz: f64) -> f64 {
    2.0 * PI * 1e3 * nu_khz
}

pub fn rad_per_s_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

/// Envelope χ(t) of the detector-field coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Switching {
    Constant,
    /// χ(t) = exp(−t/T_d)
    ExponentialDamped,
}

/// Direction of the detector transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Process {
    /// Start in |g,0⟩, measure P_e.
    Excitation,
    /// Start in |e,0⟩, measure P_g.
    Emission,
}

impl Process {
    pub const BOTH: [Process; 2] = [Process::Excitation, Process::Emission];

    pub fn initial_spin(self) -> Spin {
        match self {
            Process::Excitation => Spin::Ground,
            Process::Emission => Spin::Excited,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Process::Excitation => "excitation",
            Process::Emission => "emission",
        }
    }

    /// +1 for excitation, −1 for emission: the sign of the spin phase in
    /// the first-order amplitude.
    pub fn phase_sign(self) -> f64 {
        match self {
            Process::Excitation => 1.0,
            Process::Emission => -1.0,
        }
    }
}

impl std::str::FromStr for Process {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excitation" | "exc" => Ok(Process::Excitation),
            "emission" | "emi" => Ok(Process::Emission),
            other => Err(invalid("process", format!("unknown process `{other}`"))),
        }
    }
}

/// Knobs of the effective spin-boson model
/// `H(t) = ω_q/(2(αt+C)) σ_z + ω_p b†b + g₀χ(t) σ_x(b + b†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Effective acceleration α, s⁻¹.
    pub alpha: f64,
    pub omega_q: f64,
    pub omega_p: f64,
    pub g0: f64,
    /// Time-translation constant C (dimensionless).
    pub c: f64,
    /// Damping time T_d, s.
    pub t_d: f64,
    pub switching: Switching,
}

impl Default for ModelParams {
    /// The experimental operating point: ω_q/2π = 200 kHz, ω_p/2π = 25 kHz,
    /// g₀/2π = 5 kHz, C = 1, T_d = 0.2 ms, α = 10⁷ s⁻¹, damped switching.
    fn default() -> Self {
        Self {
            alpha: 1e7,
            omega_q: khz_to_rad_per_s(200.0),
            omega_p: khz_to_rad_per_s(25.0),
            g0: khz_to_rad_per_s(5.0),
            c: 1.0,
            t_d: 0.2e-3,
            switching: Switching::ExponentialDamped,
        }
    }
}

impl ModelParams {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_omega_p(mut self, omega_p: f64) -> Self {
        self.omega_p = omega_p;
        self
    }

    /// Dimensionless Unruh temperature β = α/(2π ω_q).
    pub fn beta(&self) -> f64 {
        self.alpha / (2.0 * PI * self.omega_q)
    }

    /// Unruh temperature T_U = ħα/(2π k_B), K.
    pub fn unruh_temperature(&self) -> f64 {
        HBAR * self.alpha / (2.0 * PI * K_B)
    }

    /// Chirp strength ν = ω_q/α.
    pub fn nu(&self) -> f64 {
        self.omega_q / self.alpha
    }

    /// Product ω_p·T_d controlling the distance from the ideal limit.
    pub fn omega_p_t_d(&self) -> f64 {
        self.omega_p * self.t_d
    }

    /// Finite, non-negative parameters. α = 0 is allowed here: it is the
    /// fixed-gap limit of the lab-frame Hamiltonian.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("omega_q", self.omega_q),
            ("omega_p", self.omega_p),
            ("g0", self.g0),
            ("c", self.c),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(invalid(
                    name,
                    format!("must be finite and ≥ 0, got {value}"),
                ));
            }
        }
        if self.switching == Switching::ExponentialDamped
            && !(self.t_d > 0.0 && self.t_d.is_finite())
        {
            return Err(invalid(
                "t_d",
                format!("damped switching needs T_d > 0, got {}", self.t_d),
            ));
        }
        Ok(())
    }

    /// Stricter check used by the closed forms and the quadrature oracle.
    pub(crate) fn validate_positive(&self) -> Result<()> {
        self.validate()?;
        for (name, value) in [
            ("alpha", self.alpha),
            ("omega_q", self.omega_q),
            ("omega_p", self.omega_p),
        ] {
            if !(value > 0.0) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Trap angular frequency of the axial mode used in the experiment.
pub fn default_omega_z() -> f64 {
    khz_to_rad_per_s(1096.0)
}

/// Lamb-Dicke parameter used when none is given. Not quoted by the
/// experiment; a typical resolved-sideband value.
pub const DEFAULT_LAMB_DICKE: f64 = 0.1;

/// Largest Lamb-Dicke parameter for which the first-order expansion of the
/// laser exponentials is accepted.
pub const MAX_LAMB_DICKE: f64 = 0.2;

/// Ratio ω/ω_z above which the rotating-wave approximation is flagged.
pub const RWA_RATIO_LIMIT: f64 = 0.25;

/// Trapped-ion implementation of the effective model: two chirped sideband
/// tones with common intensity Ω₀χ(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonParams {
    pub model: ModelParams,
    pub omega_z: f64,
    pub lamb_dicke: f64,
    /// Carrier Rabi frequency Ω₀, rad/s.
    pub rabi_omega0: f64,
    /// Laser phases (φ_blue, φ_red), rad.
    pub phases: (f64, f64),
}

impl IonParams {
    /// Choose Ω₀ = 2g₀/η so that the sideband coupling reproduces `model.g0`.
    pub fn from_model(model: ModelParams, lamb_dicke: f64) -> Self {
        Self {
            model,
            omega_z: default_omega_z(),
            lamb_dicke,
            rabi_omega0: 2.0 * model.g0 / lamb_dicke,
            phases: (0.0, 0.0),
        }
    }

    pub fn with_phases(mut self, blue: f64, red: f64) -> Self {
        self.phases = (blue, red);
        self
    }

    /// Sideband coupling η Ω₀ / 2.
    pub fn sideband_coupling(&self) -> f64 {
        self.lamb_dicke * self.rabi_omega0 / 2.0
    }

    /// Motional detuning δ = ω_z − ω_p of the sideband tones.
    pub fn sideband_detuning(&self) -> f64 {
        self.omega_z - self.model.omega_p
    }

    /// `(ω_q/ω_z, ω_p/ω_z)`.
    pub fn rwa_ratios(&self) -> (f64, f64) {
        (
            self.model.omega_q / self.omega_z,
            self.model.omega_p / self.omega_z,
        )
    }

    /// Hard validation: Lamb-Dicke range and g₀ = ηΩ₀/2 consistency.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.lamb_dicke > 0.0) || self.lamb_dicke > MAX_LAMB_DICKE {
            return Err(invalid(
                "lamb_dicke",
                format!(
                    "first-order expansion needs 0 < η ≤ {MAX_LAMB_DICKE}, got {}",
                    self.lamb_dicke
                ),
            ));
        }
        if !(self.omega_z > 0.0) {
            return Err(invalid("omega_z", "must be > 0"));
        }
        let g = self.sideband_coupling();
        if (g - self.model.g0).abs() > 1e-12 * self.model.g0.abs().max(f64::MIN_POSITIVE) {
            return Err(invalid(
                "rabi_omega0",
                format!("ηΩ₀/2 = {g} does not reproduce g₀ = {}", self.model.g0),
            ));
        }
        if !(self.model.c > 0.0) {
            return Err(invalid("c", "chirped drives need C > 0"));
        }
        Ok(())
    }

    /// Soft RWA-margin findings (ratio to ω_z above [`RWA_RATIO_LIMIT`]).
    pub fn rwa_warnings(&self) -> Vec<String> {
        let (rq, rp) = self.rwa_ratios();
        let mut out = Vec::new();
        if rq > RWA_RATIO_LIMIT {
            out.push(format!(
                "omega_q/omega_z = {rq:.3} exceeds {RWA_RATIO_LIMIT}"
            ));
        }
        if rp > RWA_RATIO_LIMIT {
            out.push(format!(
                "omega_p/omega_z = {rp:.3} exceeds {RWA_RATIO_LIMIT}"
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_temperatures() {
        let p = ModelParams::default();
        assert!((p.beta() - 1.266_514_795_529_222).abs() < 1e-12);
        // T_U = ħα/(2πk_B) at α = 10⁷ s⁻¹
        let expected = 1.054_571_817e-34 * 1e7 / (2.0 * PI * 1.380_649e-23);
        assert!((p.unruh_temperature() - expected).abs() < 1e-25);
    }

    #[test]
    fn unit_round_trip() {
        for nu in [0.001, 5.0, 25.0, 200.0, 1096.0, 12345.678] {
            let back = rad_per_s_to_khz(khz_to_rad_per_s(nu));
            assert!(((back - nu) / nu).abs() < 1e-12);
        }
    }

    #[test]
    fn ion_coupling_consistency() {
        let ion = IonParams::from_model(ModelParams::default(), DEFAULT_LAMB_DICKE);
        assert!((ion.sideband_coupling() - ion.model.g0).abs() < 1e-12 * ion.model.g0);
        ion.validate().unwrap();
        assert!(ion.rwa_warnings().is_empty());

        let mut bad = ion;
        bad.rabi_omega0 *= 1.01;
        assert!(bad.validate().is_err());

        let too_strong = IonParams::from_model(ModelParams::default(), 0.3);
        assert!(too_strong.validate().is_err());

        let mut fast = ion;
        fast.model.omega_q = khz_to_rad_per_s(500.0);
        let w = fast.rwa_warnings();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("0.456"));
    }

    #[test]
    fn rejects_negative_values() {
        assert!(ModelParams::default().with_c(-1.0).validate().is_err());
        let mut p = ModelParams::default();
        p.t_d = 0.0;
        assert!(p.validate().is_err());
        p.switching = Switching::Constant;
        assert!(p.validate().is_ok());
    }
}
