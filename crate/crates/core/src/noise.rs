//! Seeded Monte Carlo over experimental imperfections: a thermal initial
//! phonon occupation drawn uniformly from a range and a random relative
//! phase between the two sideband tones.
//!
//! Each shot starts from `|s⟩⟨s| ⊗ ρ_th(n̄)`. Since ρ_th is diagonal in the
//! Fock basis and populations are linear in ρ₀, a shot is propagated as the
//! weighted sum of the trajectories started from `|s, n⟩`. Models that do
//! not depend on the relative phase share one set of these components
//! across all shots.

use std::io::{self, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::evolution::{self, IntegratorConfig, LindbladTerms, Trajectory, Truncation};
use crate::hamiltonians::{build_h_exp, build_ion_rotframe, TimeDependentHamiltonian};
use crate::params::{IonParams, ModelParams, Process};
use crate::quantum::{thermal_state, HilbertSpec, QuantumState, StateData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseJitter {
    /// Uniform on [0, 2π).
    UniformOnCircle,
    Fixed(f64),
}

/// How the band around the mean is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandKind {
    MinMax,
    /// Nearest-rank percentiles, each in [0, 100].
    Percentile {
        low: f64,
        high: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub n_bar_range: (f64, f64),
    pub phase_jitter: PhaseJitter,
    pub lindblad: LindbladTerms,
    pub shots: usize,
    pub base_seed: u64,
    pub band: BandKind,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            n_bar_range: (0.02, 0.07),
            phase_jitter: PhaseJitter::UniformOnCircle,
            lindblad: LindbladTerms::new(),
            shots: 200,
            base_seed: 0,
            band: BandKind::MinMax,
        }
    }
}

impl NoiseConfig {
    /// Every noise source switched off.
    pub fn noiseless(shots: usize, base_seed: u64) -> Self {
        Self {
            n_bar_range: (0.0, 0.0),
            phase_jitter: PhaseJitter::Fixed(0.0),
            shots,
            base_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (low, high) = self.n_bar_range;
        if !(low >= 0.0 && low <= high && high.is_finite()) {
            return Err(invalid(
                "n_bar_range",
                format!("need 0 ≤ low ≤ high < ∞, got [{low}, {high}]"),
            ));
        }
        if self.shots == 0 {
            return Err(invalid("shots", "must be ≥ 1"));
        }
        if let PhaseJitter::Fixed(phi) = self.phase_jitter {
            if !phi.is_finite() {
                return Err(invalid("phase_jitter", "fixed phase must be finite"));
            }
        }
        if let BandKind::Percentile { low, high } = self.band {
            if !(0.0..=100.0).contains(&low) || !(low..=100.0).contains(&high) {
                return Err(invalid(
                    "band",
                    format!("percentiles must satisfy 0 ≤ {low} ≤ {high} ≤ 100"),
                ));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-shot seed: `splitmix64(base_seed ^ splitmix64(index))`.
pub fn shot_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(index as u64))
}

/// Uniform on [0, 1) from the top 53 bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotDraw {
    pub index: usize,
    pub seed: u64,
    pub n_bar: f64,
    /// Relative phase between the blue and red tones, rad.
    pub rel_phase: f64,
}

/// Draws of shot `index`; a pure function of `(base_seed, index)` and the
/// ranges in `cfg`.
pub fn sample_shot(cfg: &NoiseConfig, index: usize) -> Result<ShotDraw> {
    cfg.validate()?;
    if index >= cfg.shots {
        return Err(invalid(
            "index",
            format!("shot {index} ≥ shots = {}", cfg.shots),
        ));
    }
    let seed = shot_seed(cfg.base_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (low, high) = cfg.n_bar_range;
    let u_n = unit(&mut rng);
    let u_phi = unit(&mut rng);
    let n_bar = if high > low {
        low + (high - low) * u_n
    } else {
        low
    };
    let rel_phase = match cfg.phase_jitter {
        PhaseJitter::UniformOnCircle => std::f64::consts::TAU * u_phi,
        PhaseJitter::Fixed(phi) => phi,
    };
    Ok(ShotDraw {
        index,
        seed,
        n_bar,
        rel_phase,
    })
}

/// A Hamiltonian family indexed by the relative tone phase.
pub trait ModelFamily: Sync {
    fn spec(&self) -> HilbertSpec;
    fn label(&self) -> &str;
    /// False when [`ModelFamily::hamiltonian`] ignores the phase.
    fn phase_sensitive(&self) -> bool;
    fn hamiltonian(&self, rel_phase: f64) -> Result<TimeDependentHamiltonian>;
    fn integrator(&self) -> IntegratorConfig;
}

/// The lab-frame chirped-gap model; it has no laser phase.
#[derive(Debug, Clone)]
pub struct EffectiveFamily {
    pub params: ModelParams,
    pub spec: HilbertSpec,
    pub integrator: IntegratorConfig,
}

impl ModelFamily for EffectiveFamily {
    fn spec(&self) -> HilbertSpec {
        self.spec
    }
    fn label(&self) -> &str {
        "h_exp"
    }
    fn phase_sensitive(&self) -> bool {
        false
    }
    fn hamiltonian(&self, _rel_phase: f64) -> Result<TimeDependentHamiltonian> {
        build_h_exp(&self.params, self.spec)
    }
    fn integrator(&self) -> IntegratorConfig {
        self.integrator
    }
}

/// The bichromatic ion model in the motional rotating frame with tone
/// phases `(φ, 0)`.
#[derive(Debug, Clone)]
pub struct IonFamily {
    pub ion: IonParams,
    pub spec: HilbertSpec,
    pub integrator: IntegratorConfig,
}

impl IonFamily {
    pub fn new(ion: IonParams, spec: HilbertSpec) -> Self {
        Self {
            ion,
            spec,
            integrator: IntegratorConfig::ion(),
        }
    }
}

impl ModelFamily for IonFamily {
    fn spec(&self) -> HilbertSpec {
        self.spec
    }
    fn label(&self) -> &str {
        "ion_rotframe"
    }
    fn phase_sensitive(&self) -> bool {
        true
    }
    fn hamiltonian(&self, rel_phase: f64) -> Result<TimeDependentHamiltonian> {
        build_ion_rotframe(&self.ion.with_phases(rel_phase, 0.0), self.spec)
    }
    fn integrator(&self) -> IntegratorConfig {
        self.integrator
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub label: String,
    pub process: Process,
    pub base_seed: u64,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub band_low: Vec<f64>,
    pub band_high: Vec<f64>,
    pub draws: Vec<ShotDraw>,
    /// Transition probability of each shot, indexed like `draws`.
    pub curves: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl EnsembleResult {
    pub fn shots(&self) -> usize {
        self.draws.len()
    }

    pub fn max_band_width(&self) -> f64 {
        self.band_low
            .iter()
            .zip(&self.band_high)
            .fold(0.0, |m, (lo, hi)| m.max(hi - lo))
    }

    /// Whether `curve` lies inside the band at every sample.
    pub fn contains(&self, curve: &[f64]) -> bool {
        curve.len() == self.times.len()
            && curve
                .iter()
                .zip(self.band_low.iter().zip(&self.band_high))
                .all(|(c, (lo, hi))| lo <= c && c <= hi)
    }

    /// CSV with columns `t_us,mean,band_low,band_high,shots,base_seed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_us,mean,band_low,band_high,shots,base_seed")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{:.11e},{},{}",
                self.times[k] * 1e6,
                self.mean[k],
                self.band_low[k],
                self.band_high[k],
                self.shots(),
                self.base_seed
            )?;
        }
        Ok(())
    }
}

/// Trajectories from `|s, n⟩` for n = 0..N under one Hamiltonian.
fn fock_components(
    h: &TimeDependentHamiltonian,
    process: Process,
    lindblad: &LindbladTerms,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Trajectory>> {
    let spec = h.spec();
    (0..spec.fock_cutoff())
        .into_par_iter()
        .map(|n| {
            let psi = QuantumState::basis(spec, process.initial_spin(), n)?;
            if lindblad.is_zero() {
                evolution::propagate_pure(h, &psi, grid, cfg, Truncation::Deferred)
            } else {
                let rho = QuantumState::from_data(spec, StateData::Density(psi.to_density()));
                evolution::propagate_mixed(h, &rho, lindblad, grid, cfg, Truncation::Deferred)
            }
        })
        .collect()
}

fn shot_trajectory(
    label: &str,
    spec: HilbertSpec,
    n_bar: f64,
    components: &[Trajectory],
) -> Result<Trajectory> {
    let thermal = thermal_state(spec, n_bar)?;
    let weighted: Vec<(f64, &Trajectory)> = thermal
        .probabilities()
        .iter()
        .zip(components)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, c)| (*p, c))
        .collect();
    evolution::mixture(label, &weighted)
}

/// Run `cfg.shots` noisy realisations of `family` and aggregate the
/// transition probability of `process`.
pub fn run_ensemble(
    family: &dyn ModelFamily,
    process: Process,
    cfg: &NoiseConfig,
    grid: &[f64],
) -> Result<EnsembleResult> {
    cfg.validate()?;
    let spec = family.spec();
    let integrator = family.integrator();
    let draws: Vec<ShotDraw> = (0..cfg.shots)
        .map(|i| sample_shot(cfg, i))
        .collect::<Result<_>>()?;
    for d in &draws {
        thermal_state(spec, d.n_bar)?;
    }
    let wrap = |d: &ShotDraw| {
        let (index, seed) = (d.index, d.seed);
        move |e: Error| Error::Shot {
            index,
            seed,
            source: Box::new(e),
        }
    };

    let shots: Vec<Trajectory> = if family.phase_sensitive() {
        draws
            .iter()
            .map(|d| {
                let h = family.hamiltonian(d.rel_phase)?;
                let comps = fock_components(&h, process, &cfg.lindblad, grid, &integrator)?;
                shot_trajectory(family.label(), spec, d.n_bar, &comps)
            })
            .enumerate()
            .map(|(i, r)| r.map_err(wrap(&draws[i])))
            .collect::<Result<_>>()?
    } else {
        let h = family.hamiltonian(0.0)?;
        let comps = fock_components(&h, process, &cfg.lindblad, grid, &integrator)
            .map_err(wrap(&draws[0]))?;
        draws
            .par_iter()
            .map(|d| shot_trajectory(family.label(), spec, d.n_bar, &comps).map_err(wrap(d)))
            .collect::<Result<_>>()?
    };

    let curves: Vec<Vec<f64>> = shots
        .iter()
        .map(|t| evolution::transition_probability(t, process))
        .collect::<Result<_>>()?;
    let mut warnings: Vec<String> = Vec::new();
    for w in shots.iter().flat_map(|t| &t.warnings) {
        if !warnings.contains(w) {
            warnings.push(w.clone());
        }
    }
    let times = shots[0].times.clone();
    let (mean, band_low, band_high) = aggregate(&curves, cfg.band);
    Ok(EnsembleResult {
        label: family.label().to_string(),
        process,
        base_seed: cfg.base_seed,
        times,
        mean,
        band_low,
        band_high,
        draws,
        curves,
        warnings,
    })
}

/// Pointwise mean and band over shots, reduced in index order.
fn aggregate(curves: &[Vec<f64>], band: BandKind) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let len = curves[0].len();
    let shots = curves.len();
    let mut mean = Vec::with_capacity(len);
    let mut low = Vec::with_capacity(len);
    let mut high = Vec::with_capacity(len);
    let mut column = vec![0.0; shots];
    for k in 0..len {
        for (slot, c) in column.iter_mut().zip(curves) {
            *slot = c[k];
        }
        let sum: f64 = column.iter().sum();
        let (lo, hi) = match band {
            BandKind::MinMax => column
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                    (a.min(x), b.max(x))
                }),
            BandKind::Percentile { low, high } => {
                let mut sorted = column.clone();
                sorted.sort_by(f64::total_cmp);
                (nearest_rank(&sorted, low), nearest_rank(&sorted, high))
            }
        };
        let m = sum / shots as f64;
        // The mean of equal values can round one ulp outside them.
        mean.push(if band == BandKind::MinMax {
            m.clamp(lo, hi)
        } else {
            m
        });
        low.push(lo);
        high.push(hi);
    }
    (mean, low, high)
}

fn nearest_rank(sorted: &[f64], percent: f64) -> f64 {
    let rank = ((percent / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// `Σₙ pₙ(n̄) Pₙ` for precomputed Fock-component curves.
pub fn thermal_average(spec: HilbertSpec, n_bar: f64, components: &[Vec<f64>]) -> Result<Vec<f64>> {
    let thermal = thermal_state(spec, n_bar)?;
    let len = components.first().map_or(0, Vec::len);
    Ok((0..len)
        .map(|k| {
            thermal
                .probabilities()
                .iter()
                .zip(components)
                .map(|(p, c)| p * c[k])
                .sum()
        })
        .collect())
}
