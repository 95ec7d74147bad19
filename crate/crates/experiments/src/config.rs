//! Run configuration.
//!
//! The file format is TOML. Frequencies are entered as ν = ω/2π in kHz,
//! times in ms and α in s⁻¹; everything is converted to rad/s and seconds
//! on load. Every field is optional and falls back to the experimental
//! operating point.
//!
//! ```toml
//! [model]
//! kind = "h_exp"            # h_exp | interaction | rabi | ue01 | ue1exp | ion_rotframe | ion_rwa
//! process = "excitation"    # excitation | emission
//! alpha_per_s = 1e7
//! nu_q_khz = 200.0
//! nu_p_khz = 25.0
//! g0_khz = 5.0
//! c = 1.0
//! t_d_ms = 0.2
//! switching = "exponential" # exponential | constant
//! fock_cutoff = 12
//!
//! [ion]
//! nu_z_khz = 1096.0
//! lamb_dicke = 0.1
//! phase_blue_rad = 0.0
//! phase_red_rad = 0.0
//!
//! [grid]
//! t_start_ms = 0.0
//! t_end_ms = 1.0
//! points = 1001
//! ue01_alpha_t0 = 0.01      # ue01 starts at t₀ = ue01_alpha_t0 / α
//!
//! [integrator]
//! method = "adaptive"       # adaptive | fixed
//! rel_tol = 1e-9
//! abs_tol = 1e-11
//! max_step_ms = 0.01
//! fixed_step_ms = 1e-5      # used by method = "fixed"
//! max_steps = 50000000
//!
//! [lindblad]                # rates in s⁻¹
//! dephasing = 0.0
//! decay = 0.0
//! heating = 0.0
//! damping = 0.0
//!
//! [noise]
//! n_bar_low = 0.02
//! n_bar_high = 0.07
//! phase = "uniform"         # uniform | fixed
//! fixed_phase_rad = 0.0
//! shots = 200
//! base_seed = 0
//! band = "minmax"           # minmax | percentile
//! percentile_low = 5.0
//! percentile_high = 95.0
//!
//! [sweep]
//! alpha_min_per_s = 1e6
//! alpha_max_per_s = 1e9
//! points = 25
//! zone1_nu_p_khz = 50.0
//! zone2_nu_p_khz = 25.0
//! processes = ["excitation", "emission"]
//! simulate = true
//! noise = false
//! t_final_ms = 1.0
//!
//! [output]
//! dir = "out"
//! ```
//!
//! The output directory can also be set through `UNRUH_LAB_OUT_DIR`; a
//! command-line flag takes precedence over both.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unruh_core::evolution::{IntegratorConfig, LindbladTerms, Method};
use unruh_core::hamiltonians::Variant;
use unruh_core::noise::{BandKind, NoiseConfig, PhaseJitter};
use unruh_core::params::{
    default_omega_z, khz_to_rad_per_s, rad_per_s_to_khz, IonParams, ModelParams, Process,
    Switching, DEFAULT_LAMB_DICKE,
};
use unruh_core::quantum::{HilbertSpec, DEFAULT_FOCK_CUTOFF};

use crate::error::{LabError, LabResult};

pub const VERSION_TAG: &str = concat!("unruh-lab ", env!("CARGO_PKG_VERSION"));
pub const OUT_DIR_ENV: &str = "UNRUH_LAB_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    HExp,
    Interaction,
    Variant(Variant),
    IonRotframe,
    IonRwa,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::HExp => "h_exp",
            ModelKind::Interaction => "interaction",
            ModelKind::Variant(v) => v.name(),
            ModelKind::IonRotframe => "ion_rotframe",
            ModelKind::IonRwa => "ion_rwa",
        }
    }

    pub fn is_ion(self) -> bool {
        matches!(self, ModelKind::IonRotframe | ModelKind::IonRwa)
    }
}

impl FromStr for ModelKind {
    type Err = LabError;
    fn from_str(s: &str) -> LabResult<Self> {
        Ok(match s {
            "h_exp" => ModelKind::HExp,
            "interaction" => ModelKind::Interaction,
            "ion_rotframe" => ModelKind::IonRotframe,
            "ion_rwa" => ModelKind::IonRwa,
            other => ModelKind::Variant(
                other
                    .parse()
                    .map_err(|_| LabError::Config(format!("unknown model kind `{other}`")))?,
            ),
        })
    }
}

/// Ion-trap settings layered on top of the effective model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonSettings {
    pub omega_z: f64,
    pub lamb_dicke: f64,
    pub phases: (f64, f64),
}

impl Default for IonSettings {
    fn default() -> Self {
        Self {
            omega_z: default_omega_z(),
            lamb_dicke: DEFAULT_LAMB_DICKE,
            phases: (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl Default for GridSpec {
    /// 1 µs sampling over [0, 1 ms].
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 1e-3,
            points: 1001,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> LabResult<()> {
        if self.points < 2
            || !(self.t_end > self.t_start)
            || !(self.t_start >= 0.0)
            || !self.t_end.is_finite()
        {
            return Err(LabError::Config(format!(
                "grid needs 0 ≤ t_start < t_end and ≥ 2 points, got [{}, {}] with {}",
                self.t_start, self.t_end, self.points
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        unruh_core::evolution::uniform_grid(self.t_start, self.t_end, self.points - 1)
    }
}

/// Lindblad rates in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LindbladRates {
    pub dephasing: f64,
    pub decay: f64,
    pub heating: f64,
    pub damping: f64,
}

impl LindbladRates {
    pub fn terms(&self, spec: HilbertSpec) -> LabResult<LindbladTerms> {
        Ok(LindbladTerms::standard(
            spec,
            self.dephasing,
            self.decay,
            self.heating,
            self.damping,
        )?)
    }

    pub fn is_zero(&self) -> bool {
        [self.dephasing, self.decay, self.heating, self.damping]
            .iter()
            .all(|r| *r == 0.0)
    }
}

/// Noise settings; the collapse operators are attached once the Hilbert
/// space is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSettings {
    pub n_bar_range: (f64, f64),
    pub phase_jitter: PhaseJitter,
    pub shots: usize,
    pub base_seed: u64,
    pub band: BandKind,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        let d = NoiseConfig::default();
        Self {
            n_bar_range: d.n_bar_range,
            phase_jitter: d.phase_jitter,
            shots: d.shots,
            base_seed: d.base_seed,
            band: d.band,
        }
    }
}

impl NoiseSettings {
    pub fn to_config(&self, lindblad: LindbladTerms) -> NoiseConfig {
        NoiseConfig {
            n_bar_range: self.n_bar_range,
            phase_jitter: self.phase_jitter,
            lindblad,
            shots: self.shots,
            base_seed: self.base_seed,
            band: self.band,
        }
    }
}

/// Acceleration sweep with the two-zone phonon frequency rule for emission.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
    /// ω_p for emission below the crossover, rad/s.
    pub zone1_omega_p: f64,
    /// ω_p for excitation, and for emission above the crossover, rad/s.
    pub zone2_omega_p: f64,
    pub processes: Vec<Process>,
    pub simulate: bool,
    pub noise: bool,
    /// Time at which simulated probabilities are read, s.
    pub t_final: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            alpha_min: 1e6,
            alpha_max: 1e9,
            points: 25,
            zone1_omega_p: khz_to_rad_per_s(50.0),
            zone2_omega_p: khz_to_rad_per_s(25.0),
            processes: Process::BOTH.to_vec(),
            simulate: true,
            noise: false,
            t_final: 1e-3,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> LabResult<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(self.alpha_min > 0.0)
            || !(self.alpha_max >= self.alpha_min)
            || !self.alpha_max.is_finite()
        {
            return bad(format!(
                "sweep needs 0 < alpha_min ≤ alpha_max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            ));
        }
        if self.points == 0 || (self.points > 1 && self.alpha_max == self.alpha_min) {
            return bad("sweep grid must be strictly increasing".into());
        }
        if !(self.zone1_omega_p > 0.0) || !(self.zone2_omega_p > 0.0) {
            return bad("zone phonon frequencies must be > 0".into());
        }
        if self.processes.is_empty() {
            return bad("sweep needs at least one process".into());
        }
        if !(self.t_final > 0.0) {
            return bad("t_final must be > 0".into());
        }
        Ok(())
    }

    /// Log-spaced α grid.
    pub fn alphas(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.alpha_min];
        }
        let (lo, hi) = (self.alpha_min.log10(), self.alpha_max.log10());
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.alpha_max
                } else {
                    10f64.powf(lo + (hi - lo) * k as f64 / (self.points - 1) as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ModelKind,
    pub process: Process,
    pub params: ModelParams,
    pub fock_cutoff: usize,
    pub ion: IonSettings,
    /// ue01 starts at αt₀ = this value.
    pub ue01_alpha_t0: f64,
    pub grid: GridSpec,
    pub integrator: IntegratorConfig,
    pub lindblad: LindbladRates,
    /// Explicit noise section; figure recipes fall back to the defaults.
    pub noise: Option<NoiseSettings>,
    pub sweep: SweepSpec,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::HExp,
            process: Process::Excitation,
            params: ModelParams::default(),
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            ion: IonSettings::default(),
            ue01_alpha_t0: 1e-2,
            grid: GridSpec::default(),
            integrator: IntegratorConfig::default(),
            lindblad: LindbladRates::default(),
            noise: None,
            sweep: SweepSpec::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        file.resolve()
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            action: "read config",
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Inverse of [`RunConfig::from_toml`].
    pub fn to_toml(&self) -> String {
        toml::to_string(&FileConfig::from(self)).expect("config sections are plain data")
    }

    pub fn spec(&self) -> LabResult<HilbertSpec> {
        Ok(HilbertSpec::new(self.fock_cutoff)?)
    }

    pub fn ion_params(&self) -> IonParams {
        let mut ion = IonParams::from_model(self.params, self.ion.lamb_dicke);
        ion.omega_z = self.ion.omega_z;
        ion.with_phases(self.ion.phases.0, self.ion.phases.1)
    }

    pub fn noise_settings(&self) -> NoiseSettings {
        self.noise.unwrap_or_default()
    }

    pub fn noise_config(&self) -> LabResult<NoiseConfig> {
        Ok(self
            .noise_settings()
            .to_config(self.lindblad.terms(self.spec()?)?))
    }

    /// Integrator for `kind`; the ion models cap the step at 5 ns.
    pub fn integrator_for(&self, kind: ModelKind) -> IntegratorConfig {
        let mut cfg = self.integrator;
        if kind.is_ion() && cfg.max_step > IntegratorConfig::ION_MAX_STEP {
            cfg.max_step = IntegratorConfig::ION_MAX_STEP;
            if let Method::FixedStepMidpointExponential { step } = cfg.method {
                cfg.method = Method::FixedStepMidpointExponential {
                    step: step.min(IntegratorConfig::ION_MAX_STEP),
                };
            }
        }
        cfg
    }

    /// Resolve the output directory: flag, then environment, then file.
    pub fn resolve_output_dir(&mut self, flag: Option<PathBuf>) {
        if let Some(dir) = flag {
            self.output_dir = dir;
        } else if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        self.params.validate()?;
        self.spec()?;
        self.grid.validate()?;
        self.integrator.validate()?;
        self.sweep.validate()?;
        self.lindblad.terms(self.spec()?)?;
        self.noise_config()?.validate()?;
        if !(self.ue01_alpha_t0 > 0.0) {
            return Err(LabError::Config("ue01_alpha_t0 must be > 0".into()));
        }
        Ok(())
    }

    /// `(key, value)` pairs of the resolved parameters, in display units.
    pub fn describe(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let mut out: Vec<(String, String)> = vec![
            ("version".into(), VERSION_TAG.into()),
            ("model".into(), self.kind.name().into()),
            ("process".into(), self.process.name().into()),
            ("alpha_per_s".into(), format!("{:e}", p.alpha)),
            (
                "nu_q_khz".into(),
                format!("{}", rad_per_s_to_khz(p.omega_q)),
            ),
            (
                "nu_p_khz".into(),
                format!("{}", rad_per_s_to_khz(p.omega_p)),
            ),
            ("g0_khz".into(), format!("{}", rad_per_s_to_khz(p.g0))),
            ("c".into(), format!("{}", p.c)),
            ("t_d_ms".into(), format!("{}", p.t_d * 1e3)),
            ("switching".into(), switching_name(p.switching).into()),
            ("beta".into(), format!("{}", p.beta())),
            ("fock_cutoff".into(), self.fock_cutoff.to_string()),
            (
                "nu_z_khz".into(),
                format!("{}", rad_per_s_to_khz(self.ion.omega_z)),
            ),
            ("lamb_dicke".into(), format!("{}", self.ion.lamb_dicke)),
            ("rel_tol".into(), format!("{:e}", self.integrator.rel_tol)),
            ("abs_tol".into(), format!("{:e}", self.integrator.abs_tol)),
            (
                "max_step_s".into(),
                format!("{:e}", self.integrator.max_step),
            ),
            (
                "lindblad_per_s".into(),
                format!(
                    "dephasing={} decay={} heating={} damping={}",
                    self.lindblad.dephasing,
                    self.lindblad.decay,
                    self.lindblad.heating,
                    self.lindblad.damping
                ),
            ),
        ];
        let n = self.noise_settings();
        out.push((
            "noise_n_bar".into(),
            format!("[{}, {}]", n.n_bar_range.0, n.n_bar_range.1),
        ));
        out.push(("noise_phase".into(), phase_name(n.phase_jitter)));
        out.push(("noise_shots".into(), n.shots.to_string()));
        out.push(("base_seed".into(), n.base_seed.to_string()));
        out
    }
}

fn switching_name(s: Switching) -> &'static str {
    match s {
        Switching::Constant => "constant",
        Switching::ExponentialDamped => "exponential",
    }
}

fn phase_name(p: PhaseJitter) -> String {
    match p {
        PhaseJitter::UniformOnCircle => "uniform".into(),
        PhaseJitter::Fixed(phi) => format!("fixed({phi})"),
    }
}

// On-disk layout, in display units.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    model: ModelSection,
    ion: IonSection,
    grid: GridSection,
    integrator: IntegratorSection,
    lindblad: LindbladRates,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSection>,
    sweep: SweepSection,
    output: OutputSection,
}

impl Default for FileConfig {
    fn default() -> Self {
        FileConfig::from(&RunConfig::default())
    }
}

macro_rules! section_default {
    ($ty:ident, $field:ident) => {
        impl Default for $ty {
            fn default() -> Self {
                FileConfig::default().$field
            }
        }
    };
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelSection {
    kind: String,
    process: String,
    alpha_per_s: f64,
    nu_q_khz: f64,
    nu_p_khz: f64,
    g0_khz: f64,
    c: f64,
    t_d_ms: f64,
    switching: String,
    fock_cutoff: usize,
}
section_default!(ModelSection, model);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IonSection {
    nu_z_khz: f64,
    lamb_dicke: f64,
    phase_blue_rad: f64,
    phase_red_rad: f64,
}
section_default!(IonSection, ion);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    t_start_ms: f64,
    t_end_ms: f64,
    points: usize,
    ue01_alpha_t0: f64,
}
section_default!(GridSection, grid);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IntegratorSection {
    method: String,
    rel_tol: f64,
    abs_tol: f64,
    max_step_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_step_ms: Option<f64>,
    max_steps: usize,
}
section_default!(IntegratorSection, integrator);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NoiseSection {
    n_bar_low: f64,
    n_bar_high: f64,
    phase: String,
    fixed_phase_rad: f64,
    shots: usize,
    #[serde(with = "seed_repr")]
    base_seed: u64,
    band: String,
    percentile_low: f64,
    percentile_high: f64,
}

/// TOML integers are signed, so seeds past `i64::MAX` travel as decimal
/// strings.
mod seed_repr {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => u64::try_from(v)
                .map_err(|_| de::Error::custom(format!("base_seed {v} is negative"))),
            Repr::Text(t) => t
                .parse()
                .map_err(|_| de::Error::custom(format!("base_seed `{t}` is not a u64"))),
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection::from(&NoiseSettings::default())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepSection {
    alpha_min_per_s: f64,
    alpha_max_per_s: f64,
    points: usize,
    zone1_nu_p_khz: f64,
    zone2_nu_p_khz: f64,
    processes: Vec<String>,
    simulate: bool,
    noise: bool,
    t_final_ms: f64,
}
section_default!(SweepSection, sweep);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    dir: PathBuf,
}
section_default!(OutputSection, output);

impl From<&NoiseSettings> for NoiseSection {
    fn from(n: &NoiseSettings) -> Self {
        let (phase, fixed_phase_rad) = match n.phase_jitter {
            PhaseJitter::UniformOnCircle => ("uniform", 0.0),
            PhaseJitter::Fixed(phi) => ("fixed", phi),
        };
        let (band, percentile_low, percentile_high) = match n.band {
            BandKind::MinMax => ("minmax", 5.0, 95.0),
            BandKind::Percentile { low, high } => ("percentile", low, high),
        };
        Self {
            n_bar_low: n.n_bar_range.0,
            n_bar_high: n.n_bar_range.1,
            phase: phase.into(),
            fixed_phase_rad,
            shots: n.shots,
            base_seed: n.base_seed,
            band: band.into(),
            percentile_low,
            percentile_high,
        }
    }
}

impl From<&RunConfig> for FileConfig {
    fn from(c: &RunConfig) -> Self {
        let p = &c.params;
        let (method, fixed_step_ms) = match c.integrator.method {
            Method::AdaptiveRk853 => ("adaptive", None),
            Method::FixedStepMidpointExponential { step } => ("fixed", Some(step * 1e3)),
        };
        FileConfig {
            model: ModelSection {
                kind: c.kind.name().into(),
                process: c.process.name().into(),
                alpha_per_s: p.alpha,
                nu_q_khz: rad_per_s_to_khz(p.omega_q),
                nu_p_khz: rad_per_s_to_khz(p.omega_p),
                g0_khz: rad_per_s_to_khz(p.g0),
                c: p.c,
                t_d_ms: p.t_d * 1e3,
                switching: switching_name(p.switching).into(),
                fock_cutoff: c.fock_cutoff,
            },
            ion: IonSection {
                nu_z_khz: rad_per_s_to_khz(c.ion.omega_z),
                lamb_dicke: c.ion.lamb_dicke,
                phase_blue_rad: c.ion.phases.0,
                phase_red_rad: c.ion.phases.1,
            },
            grid: GridSection {
                t_start_ms: c.grid.t_start * 1e3,
                t_end_ms: c.grid.t_end * 1e3,
                points: c.grid.points,
                ue01_alpha_t0: c.ue01_alpha_t0,
            },
            integrator: IntegratorSection {
                method: method.into(),
                rel_tol: c.integrator.rel_tol,
                abs_tol: c.integrator.abs_tol,
                max_step_ms: c.integrator.max_step * 1e3,
                fixed_step_ms,
                max_steps: c.integrator.max_steps,
            },
            lindblad: c.lindblad,
            noise: c.noise.as_ref().map(NoiseSection::from),
            sweep: SweepSection {
                alpha_min_per_s: c.sweep.alpha_min,
                alpha_max_per_s: c.sweep.alpha_max,
                points: c.sweep.points,
                zone1_nu_p_khz: rad_per_s_to_khz(c.sweep.zone1_omega_p),
                zone2_nu_p_khz: rad_per_s_to_khz(c.sweep.zone2_omega_p),
                processes: c
                    .sweep
                    .processes
                    .iter()
                    .map(|p| p.name().to_string())
                    .collect(),
                simulate: c.sweep.simulate,
                noise: c.sweep.noise,
                t_final_ms: c.sweep.t_final * 1e3,
            },
            output: OutputSection {
                dir: c.output_dir.clone(),
            },
        }
    }
}

fn parse_process(s: &str) -> LabResult<Process> {
    s.parse()
        .map_err(|_| LabError::Config(format!("unknown process `{s}`")))
}

impl FileConfig {
    fn resolve(self) -> LabResult<RunConfig> {
        let m = &self.model;
        let switching = match m.switching.as_str() {
            "exponential" => Switching::ExponentialDamped,
            "constant" => Switching::Constant,
            other => return Err(LabError::Config(format!("unknown switching `{other}`"))),
        };
        let params = ModelParams {
            alpha: m.alpha_per_s,
            omega_q: khz_to_rad_per_s(m.nu_q_khz),
            omega_p: khz_to_rad_per_s(m.nu_p_khz),
            g0: khz_to_rad_per_s(m.g0_khz),
            c: m.c,
            t_d: m.t_d_ms * 1e-3,
            switching,
        };
        let i = &self.integrator;
        let method = match (i.method.as_str(), i.fixed_step_ms) {
            ("adaptive", _) => Method::AdaptiveRk853,
            ("fixed", Some(step)) => Method::FixedStepMidpointExponential { step: step * 1e-3 },
            ("fixed", None) => {
                return Err(LabError::Config(
                    "method = \"fixed\" needs fixed_step_ms".into(),
                ))
            }
            (other, _) => {
                return Err(LabError::Config(format!(
                    "unknown integrator method `{other}`"
                )))
            }
        };
        let integrator = IntegratorConfig {
            method,
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step_ms * 1e-3,
            max_steps: i.max_steps,
        };
        let noise = match self.noise {
            None => None,
            Some(n) => Some(NoiseSettings {
                n_bar_range: (n.n_bar_low, n.n_bar_high),
                phase_jitter: match n.phase.as_str() {
                    "uniform" => PhaseJitter::UniformOnCircle,
                    "fixed" => PhaseJitter::Fixed(n.fixed_phase_rad),
                    other => {
                        return Err(LabError::Config(format!("unknown phase jitter `{other}`")))
                    }
                },
                shots: n.shots,
                base_seed: n.base_seed,
                band: match n.band.as_str() {
                    "minmax" => BandKind::MinMax,
                    "percentile" => BandKind::Percentile {
                        low: n.percentile_low,
                        high: n.percentile_high,
                    },
                    other => return Err(LabError::Config(format!("unknown band kind `{other}`"))),
                },
            }),
        };
        let s = &self.sweep;
        let cfg = RunConfig {
            kind: m.kind.parse()?,
            process: parse_process(&m.process)?,
            params,
            fock_cutoff: m.fock_cutoff,
            ion: IonSettings {
                omega_z: khz_to_rad_per_s(self.ion.nu_z_khz),
                lamb_dicke: self.ion.lamb_dicke,
                phases: (self.ion.phase_blue_rad, self.ion.phase_red_rad),
            },
            ue01_alpha_t0: self.grid.ue01_alpha_t0,
            grid: GridSpec {
                t_start: self.grid.t_start_ms * 1e-3,
                t_end: self.grid.t_end_ms * 1e-3,
                points: self.grid.points,
            },
            integrator,
            lindblad: self.lindblad,
            noise,
            sweep: SweepSpec {
                alpha_min: s.alpha_min_per_s,
                alpha_max: s.alpha_max_per_s,
                points: s.points,
                zone1_omega_p: khz_to_rad_per_s(s.zone1_nu_p_khz),
                zone2_omega_p: khz_to_rad_per_s(s.zone2_nu_p_khz),
                processes: s
                    .processes
                    .iter()
                    .map(|p| parse_process(p))
                    .collect::<LabResult<_>>()?,
                simulate: s.simulate,
                noise: s.noise,
                t_final: s.t_final_ms * 1e-3,
            },
            output_dir: self.output.dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
