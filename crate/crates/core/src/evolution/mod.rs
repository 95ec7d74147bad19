//! Propagation of pure and mixed states under a [`TimeDependentHamiltonian`].
//!
//! Two integrators are available for the Schrödinger equation: adaptive
//! DOP853 (default) and a fixed-step exponential midpoint rule, which is
//! unitary up to the Taylor truncation of each step exponential. The
//! master equation uses DOP853 only.

mod dop853;

use std::io::{self, Write};

use ndarray::{Array1, Array2};

use crate::error::{invalid, Error, Result};
use crate::hamiltonians::TimeDependentHamiltonian;
use crate::params::Process;
use crate::quantum::{
    is_positive_semidefinite, ladder_ops, spin_ops, HilbertSpec, Operator, QuantumState, Spin,
    StateData, C64, I, ZERO,
};

use dop853::{Dop853, OdeSystem, StepperSettings};

/// Top-Fock population above which a truncation warning is attached.
pub const TRUNCATION_WARNING: f64 = 1e-6;
/// Top-Fock population above which propagation aborts.
pub const TRUNCATION_ERROR: f64 = 1e-2;
/// Eigenvalue floor below which a density matrix gets a positivity warning.
pub const POSITIVITY_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Dormand-Prince 8(5,3) with embedded error control.
    AdaptiveRk853,
    /// `ψ(t+h) = exp(−i H(t+h/2) h) ψ(t)` with a fixed step.
    FixedStepMidpointExponential { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step, s.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk853,
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 1e-5,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Step cap for the rotating-frame ion model, whose fastest term
    /// oscillates at about 2π × 2 MHz.
    pub const ION_MAX_STEP: f64 = 5e-9;

    pub fn ion() -> Self {
        Self {
            max_step: Self::ION_MAX_STEP,
            ..Self::default()
        }
    }

    pub fn fixed_step(step: f64) -> Self {
        Self {
            method: Method::FixedStepMidpointExponential { step },
            max_step: step,
            ..Self::default()
        }
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(invalid("tolerance", "rel_tol and abs_tol must be > 0"));
        }
        if !(self.max_step > 0.0) {
            return Err(invalid("max_step", "must be > 0"));
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be ≥ 1"));
        }
        if let Method::FixedStepMidpointExponential { step } = self.method {
            if !(step > 0.0) || step > self.max_step {
                return Err(invalid(
                    "step",
                    format!("fixed step must lie in (0, max_step], got {step}"),
                ));
            }
        }
        Ok(())
    }

    fn settings(&self) -> StepperSettings {
        StepperSettings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

/// Physical role of a collapse operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DissipatorRole {
    /// σ_z
    SpinDephasing,
    /// σ₋
    SpinDecay,
    /// b†
    Heating,
    /// b
    PhononDamping,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub role: DissipatorRole,
    pub operator: Operator,
    /// s⁻¹
    pub rate: f64,
}

/// Collapse operators and rates of a Lindblad master equation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LindbladTerms {
    terms: Vec<Dissipator>,
}

impl LindbladTerms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, role: DissipatorRole, operator: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(invalid(
                "rate",
                format!("Lindblad rates must be finite and ≥ 0, got {rate}"),
            ));
        }
        self.terms.push(Dissipator {
            role,
            operator,
            rate,
        });
        Ok(self)
    }

    /// The four standard channels at the given rates, s⁻¹.
    pub fn standard(
        spec: HilbertSpec,
        dephasing: f64,
        decay: f64,
        heating: f64,
        damping: f64,
    ) -> Result<Self> {
        let s = spin_ops(spec);
        let (b, b_dag) = ladder_ops(spec);
        Self::new()
            .push(DissipatorRole::SpinDephasing, s.sigma_z, dephasing)?
            .push(DissipatorRole::SpinDecay, s.sigma_minus, decay)?
            .push(DissipatorRole::Heating, b_dag, heating)?
            .push(DissipatorRole::PhononDamping, b, damping)
    }

    pub fn terms(&self) -> &[Dissipator] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|d| d.rate == 0.0)
    }
}

/// Observables sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: String,
    pub times: Vec<f64>,
    pub p_g: Vec<f64>,
    pub p_e: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub norm_or_trace: Vec<f64>,
    pub top_fock_pop: Vec<f64>,
    /// Spin of the initial state when it is a spin eigenstate.
    pub initial_spin: Option<Spin>,
    pub final_state: QuantumState,
    pub warnings: Vec<String>,
    pub steps: usize,
}

impl Trajectory {
    fn new(label: &str, initial: &QuantumState, capacity: usize) -> Self {
        let (pg, pe) = crate::quantum::spin_populations(initial);
        let initial_spin = if pe.abs() < 1e-12 {
            Some(Spin::Ground)
        } else if pg.abs() < 1e-12 {
            Some(Spin::Excited)
        } else {
            None
        };
        Self {
            label: label.to_string(),
            times: Vec::with_capacity(capacity),
            p_g: Vec::with_capacity(capacity),
            p_e: Vec::with_capacity(capacity),
            mean_n: Vec::with_capacity(capacity),
            norm_or_trace: Vec::with_capacity(capacity),
            top_fock_pop: Vec::with_capacity(capacity),
            initial_spin,
            final_state: initial.clone(),
            warnings: Vec::new(),
            steps: 0,
        }
    }

    /// Record observables from the diagonal of ρ (or |ψ|²).
    fn record(
        &mut self,
        spec: HilbertSpec,
        t: f64,
        diag: impl Fn(usize) -> f64,
        monitor: Truncation,
    ) -> Result<()> {
        let n_max = spec.fock_cutoff();
        let (mut pg, mut pe, mut mean_n) = (0.0, 0.0, 0.0);
        for n in 0..n_max {
            let g = diag(spec.index(Spin::Ground, n));
            let e = diag(spec.index(Spin::Excited, n));
            pg += g;
            pe += e;
            mean_n += n as f64 * (g + e);
        }
        let top =
            diag(spec.index(Spin::Ground, n_max - 1)) + diag(spec.index(Spin::Excited, n_max - 1));
        self.times.push(t);
        self.p_g.push(pg);
        self.p_e.push(pe);
        self.mean_n.push(mean_n);
        self.norm_or_trace.push(pg + pe);
        self.top_fock_pop.push(top);
        if monitor == Truncation::Monitor {
            self.check_truncation(t, top)?;
        }
        Ok(())
    }

    fn check_truncation(&mut self, t: f64, top: f64) -> Result<()> {
        if top > TRUNCATION_ERROR {
            return Err(Error::TruncationOverflow { t, population: top });
        }
        if top > TRUNCATION_WARNING && !self.warnings.iter().any(|w| w.starts_with("truncation")) {
            self.warnings.push(format!(
                "truncation: top Fock population {top:.3e} exceeds {TRUNCATION_WARNING:e} at t = {t:.6e} s"
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest |norm − 1| over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.norm_or_trace
            .iter()
            .fold(0.0, |m, n| m.max((n - 1.0).abs()))
    }

    /// CSV with columns `t_us,P_g,P_e,mean_n,norm`, 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_us,P_g,P_e,mean_n,norm")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                self.times[k] * 1e6,
                self.p_g[k],
                self.p_e[k],
                self.mean_n[k],
                self.norm_or_trace[k]
            )?;
        }
        Ok(())
    }
}

/// P_e series for excitation (start in g), P_g series for emission (start in e).
pub fn transition_probability(traj: &Trajectory, process: Process) -> Result<Vec<f64>> {
    let expected = process.initial_spin();
    if traj.initial_spin != Some(expected) {
        return Err(Error::ProcessMismatch {
            process: process.name(),
            expected: expected.label(),
            found: traj
                .initial_spin
                .map(|s| s.label().to_string())
                .unwrap_or_else(|| "a spin superposition".into()),
        });
    }
    Ok(match process {
        Process::Excitation => traj.p_e.clone(),
        Process::Emission => traj.p_g.clone(),
    })
}

fn check_grid(h: &TimeDependentHamiltonian, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid", "needs at least one time"));
    }
    if !(grid[0] >= 0.0) {
        return Err(invalid("grid", "times must start at t₀ ≥ 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid(
            "grid",
            "times must be finite and strictly increasing",
        ));
    }
    h.check_time(grid[0])
}

/// Merged sparse `H(t)`: `(row, col)` pattern and a scratch buffer for values.
struct SparseH<'a> {
    h: &'a TimeDependentHamiltonian,
    pattern: Vec<(usize, usize)>,
}

impl<'a> SparseH<'a> {
    fn new(h: &'a TimeDependentHamiltonian) -> Self {
        let pattern = h.entries().iter().map(|e| (e.row, e.col)).collect();
        Self { h, pattern }
    }

    fn values(&self, t: f64) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.pattern.len());
        self.h.sparse_values(t, &mut v);
        v
    }
}

struct Schrodinger<'a> {
    h: SparseH<'a>,
}

impl OdeSystem for Schrodinger<'_> {
    fn dim(&self) -> usize {
        self.h.h.spec().dim()
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy.fill(ZERO);
        let values = self.h.values(t);
        for (&(r, c), v) in self.h.pattern.iter().zip(&values) {
            dy[r] += v * y[c];
        }
        for z in dy.iter_mut() {
            *z *= -I;
        }
    }
}

type SparseList = Vec<(usize, usize, C64)>;

fn sparse_of(m: &Array2<C64>) -> SparseList {
    m.indexed_iter()
        .filter(|(_, z)| **z != ZERO)
        .map(|((i, j), z)| (i, j, *z))
        .collect()
}

/// `dρ/dt = −i[H, ρ] − ½{K, ρ} + Σ γ L ρ L†` with `K = Σ γ L†L`; ρ is
/// stored row-major.
struct Master<'a> {
    h: SparseH<'a>,
    d: usize,
    anticommutator: SparseList,
    jumps: Vec<(f64, SparseList)>,
}

impl<'a> Master<'a> {
    fn new(h: &'a TimeDependentHamiltonian, terms: &LindbladTerms) -> Self {
        let d = h.spec().dim();
        let mut k = Array2::<C64>::zeros((d, d));
        let mut jumps = Vec::new();
        for term in terms.terms().iter().filter(|t| t.rate > 0.0) {
            let l = term.operator.matrix();
            k = k + l.t().mapv(|z| z.conj()).dot(l) * term.rate;
            jumps.push((term.rate, sparse_of(l)));
        }
        Self {
            h: SparseH::new(h),
            d,
            anticommutator: sparse_of(&k),
            jumps,
        }
    }
}

impl OdeSystem for Master<'_> {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn rhs(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.d;
        out.fill(ZERO);
        let values = self.h.values(t);
        for (&(i, j), &v) in self.h.pattern.iter().zip(&values) {
            // −i (Hρ)_{i,c} and +i (ρH)_{r,j}
            let mi_v = -I * v;
            let pi_v = I * v;
            for c in 0..d {
                out[i * d + c] += mi_v * rho[j * d + c];
            }
            for r in 0..d {
                out[r * d + j] += rho[r * d + i] * pi_v;
            }
        }
        for &(i, j, k) in &self.anticommutator {
            let half = -0.5 * k;
            for c in 0..d {
                out[i * d + c] += half * rho[j * d + c];
            }
            for r in 0..d {
                out[r * d + j] += rho[r * d + i] * half;
            }
        }
        for (rate, l) in &self.jumps {
            for &(a, i, la) in l {
                let left = la * *rate;
                for &(b, j, lb) in l {
                    out[a * d + b] += left * rho[i * d + j] * lb.conj();
                }
            }
        }
    }
}

/// Unitary propagation of a pure state, sampled at every grid time.
pub fn evolve_schrodinger(
    h: &TimeDependentHamiltonian,
    psi0: &QuantumState,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    propagate_pure(h, psi0, grid, cfg, Truncation::Monitor)
}

/// Whether the top-Fock population is checked at every sample. Mixture
/// components skip the check; the weighted mixture is checked instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Truncation {
    Monitor,
    Deferred,
}

pub(crate) fn propagate_pure(
    h: &TimeDependentHamiltonian,
    psi0: &QuantumState,
    grid: &[f64],
    cfg: &IntegratorConfig,
    monitor: Truncation,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_grid(h, grid)?;
    let spec = h.spec();
    if psi0.spec() != spec {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: psi0.spec().dim(),
        });
    }
    let ket = psi0
        .as_ket()
        .ok_or_else(|| Error::InvalidState("Schrödinger propagation needs a pure state".into()))?;
    psi0.validate()?;
    let mut y: Vec<C64> = ket.to_vec();
    let mut traj = Trajectory::new(h.label(), psi0, grid.len());
    let mut t = grid[0];
    traj.record(spec, t, |k| y[k].norm_sqr(), monitor)?;

    match cfg.method {
        Method::AdaptiveRk853 => {
            let sys = Schrodinger { h: SparseH::new(h) };
            let mut stepper = Dop853::new(sys.dim(), cfg.settings());
            for &target in &grid[1..] {
                stepper.advance(&sys, &mut t, &mut y, target)?;
                traj.record(spec, t, |k| y[k].norm_sqr(), monitor)?;
            }
            traj.steps = stepper.steps;
        }
        Method::FixedStepMidpointExponential { step } => {
            let sparse = SparseH::new(h);
            let mut steps = 0;
            for &target in &grid[1..] {
                let n = ((target - t) / step).ceil().max(1.0) as usize;
                let dt = (target - t) / n as f64;
                let t0 = t;
                for k in 0..n {
                    let mid = t0 + (k as f64 + 0.5) * dt;
                    apply_step_exponential(&sparse, mid, dt, &mut y);
                }
                steps += n;
                if steps > cfg.max_steps {
                    return Err(Error::TooManySteps {
                        t: target,
                        steps: cfg.max_steps,
                    });
                }
                t = target;
                traj.record(spec, t, |k| y[k].norm_sqr(), monitor)?;
            }
            traj.steps = steps;
        }
    }
    let drift = traj.max_norm_drift();
    if drift > 1e-8 {
        traj.warnings
            .push(format!("norm drift {drift:.3e} exceeds 1e-8"));
    }
    traj.final_state = QuantumState::from_data(spec, StateData::Ket(Array1::from(y)));
    Ok(traj)
}

/// `y ← exp(−i H(t) dt) y` by a Taylor series, split so that each
/// sub-exponent has norm ≤ 1/2.
fn apply_step_exponential(h: &SparseH<'_>, t: f64, dt: f64, y: &mut [C64]) {
    let values = h.values(t);
    let d = y.len();
    let mut row_sums = vec![0.0; d];
    for (&(r, _), v) in h.pattern.iter().zip(&values) {
        row_sums[r] += v.norm();
    }
    let bound = row_sums.iter().fold(0.0_f64, |m, &x| m.max(x)) * dt;
    let pieces = (bound / 0.5).ceil().max(1.0) as usize;
    let tau = dt / pieces as f64;
    let mut term = vec![ZERO; d];
    let mut next = vec![ZERO; d];
    for _ in 0..pieces {
        term.copy_from_slice(y);
        for k in 1..40 {
            next.fill(ZERO);
            for (&(r, c), v) in h.pattern.iter().zip(&values) {
                next[r] += v * term[c];
            }
            let factor = -I * (tau / k as f64);
            let mut size = 0.0_f64;
            for i in 0..d {
                term[i] = next[i] * factor;
                y[i] += term[i];
                size = size.max(term[i].norm());
            }
            if size < 1e-18 {
                break;
            }
        }
    }
}

/// Master-equation propagation of a density matrix.
pub fn evolve_lindblad(
    h: &TimeDependentHamiltonian,
    rho0: &QuantumState,
    terms: &LindbladTerms,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    propagate_mixed(h, rho0, terms, grid, cfg, Truncation::Monitor)
}

pub(crate) fn propagate_mixed(
    h: &TimeDependentHamiltonian,
    rho0: &QuantumState,
    terms: &LindbladTerms,
    grid: &[f64],
    cfg: &IntegratorConfig,
    monitor: Truncation,
) -> Result<Trajectory> {
    cfg.validate()?;
    if let Method::FixedStepMidpointExponential { .. } = cfg.method {
        return Err(invalid(
            "method",
            "the master equation is integrated with the adaptive method only",
        ));
    }
    check_grid(h, grid)?;
    let spec = h.spec();
    if rho0.spec() != spec {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho0.spec().dim(),
        });
    }
    for term in terms.terms() {
        if term.operator.spec() != spec {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: term.operator.spec().dim(),
            });
        }
    }
    rho0.validate()?;
    let d = spec.dim();
    let mut y: Vec<C64> = rho0.to_density().iter().copied().collect();
    let mut traj = Trajectory::new(h.label(), rho0, grid.len());
    let mut t = grid[0];
    traj.record(spec, t, |k| y[k * d + k].re, monitor)?;
    let sys = Master::new(h, terms);
    let mut stepper = Dop853::new(sys.dim(), cfg.settings());
    let mut positivity_flagged = false;
    for &target in &grid[1..] {
        stepper.advance(&sys, &mut t, &mut y, target)?;
        traj.record(spec, t, |k| y[k * d + k].re, monitor)?;
        if !positivity_flagged {
            let rho =
                Array2::from_shape_fn((d, d), |(i, j)| 0.5 * (y[i * d + j] + y[j * d + i].conj()));
            if !is_positive_semidefinite(&rho, POSITIVITY_WARNING) {
                traj.warnings.push(format!(
                    "positivity: eigenvalue below −{POSITIVITY_WARNING:e} at t = {t:.6e} s"
                ));
                positivity_flagged = true;
            }
        }
    }
    traj.steps = stepper.steps;
    let drift = traj.max_norm_drift();
    if drift > 1e-7 {
        traj.warnings
            .push(format!("trace drift {drift:.3e} exceeds 1e-7"));
    }
    let rho = Array2::from_shape_vec((d, d), y).expect("d² entries");
    traj.final_state = QuantumState::from_data(spec, StateData::Density(rho));
    Ok(traj)
}

/// Convex combination of trajectories sampled on the same grid, as produced
/// by propagating each term of a diagonal initial mixture separately.
/// Truncation is checked on the combined populations.
pub(crate) fn mixture(label: &str, components: &[(f64, &Trajectory)]) -> Result<Trajectory> {
    let (_, first) = components
        .first()
        .ok_or_else(|| invalid("components", "empty mixture"))?;
    let spec = first.final_state.spec();
    let len = first.len();
    if components
        .iter()
        .any(|(_, c)| c.len() != len || c.times != first.times)
    {
        return Err(invalid(
            "components",
            "mixture components must share the time grid",
        ));
    }
    let combine = |series: fn(&Trajectory) -> &Vec<f64>| -> Vec<f64> {
        (0..len)
            .map(|k| components.iter().map(|(w, c)| w * series(c)[k]).sum())
            .collect()
    };
    let d = spec.dim();
    let mut rho = Array2::<C64>::zeros((d, d));
    for (w, c) in components {
        rho = rho + c.final_state.to_density() * *w;
    }
    let spins: Vec<Option<Spin>> = components.iter().map(|(_, c)| c.initial_spin).collect();
    let mut traj = Trajectory {
        label: label.to_string(),
        times: first.times.clone(),
        p_g: combine(|c| &c.p_g),
        p_e: combine(|c| &c.p_e),
        mean_n: combine(|c| &c.mean_n),
        norm_or_trace: combine(|c| &c.norm_or_trace),
        top_fock_pop: combine(|c| &c.top_fock_pop),
        initial_spin: if spins.iter().all(|s| *s == spins[0]) {
            spins[0]
        } else {
            None
        },
        final_state: QuantumState::from_data(spec, StateData::Density(rho)),
        warnings: Vec::new(),
        steps: components.iter().map(|(_, c)| c.steps).sum(),
    };
    for (w, c) in components {
        for warning in &c.warnings {
            if !warning.starts_with("truncation") && !traj.warnings.contains(warning) && *w > 0.0 {
                traj.warnings.push(warning.clone());
            }
        }
    }
    for k in 0..len {
        let (t, top) = (traj.times[k], traj.top_fock_pop[k]);
        traj.check_truncation(t, top)?;
    }
    Ok(traj)
}

/// `n + 1` equally spaced times on `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| t0 + (t1 - t0) * k as f64 / n as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::HamiltonianBuilder;
    use crate::quantum::{number_op, Operator, ONE};

    fn spec() -> HilbertSpec {
        HilbertSpec::new(4).unwrap()
    }

    #[test]
    fn eigenstate_is_stationary() {
        let sp = spec();
        let w = 2.0 * std::f64::consts::PI * 25e3;
        let h = HamiltonianBuilder::new(sp, "free")
            .real_term(number_op(sp), move |_| w)
            .build();
        let psi = QuantumState::basis(sp, Spin::Ground, 1).unwrap();
        let grid = uniform_grid(0.0, 1e-3, 20);
        for cfg in [
            IntegratorConfig::default(),
            IntegratorConfig::fixed_step(1e-7),
        ] {
            let traj = evolve_schrodinger(&h, &psi, &grid, &cfg).unwrap();
            for k in 0..traj.len() {
                assert!((traj.p_g[k] - 1.0).abs() < 1e-12);
                assert!((traj.mean_n[k] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resonant_exchange_rabi_oscillation() {
        let sp = spec();
        let g0 = 2.0 * std::f64::consts::PI * 5e3;
        let s = spin_ops(sp);
        let (b, b_dag) = ladder_ops(sp);
        let exchange = &s.sigma_plus.dot(&b) + &s.sigma_minus.dot(&b_dag);
        let h = HamiltonianBuilder::new(sp, "jc")
            .real_term(exchange, move |_| g0)
            .build();
        let psi = QuantumState::basis(sp, Spin::Excited, 0).unwrap();
        let t_half = std::f64::consts::FRAC_PI_2 / g0;
        let grid = uniform_grid(0.0, t_half, 50);
        let traj = evolve_schrodinger(&h, &psi, &grid, &IntegratorConfig::default()).unwrap();
        for (t, pg) in traj.times.iter().zip(&traj.p_g) {
            assert!((pg - (g0 * t).sin().powi(2)).abs() < 1e-9);
        }
        assert!((traj.p_g.last().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn process_metadata_is_checked() {
        let sp = spec();
        let h = HamiltonianBuilder::new(sp, "zero")
            .real_term(Operator::zeros(sp), |_| 0.0)
            .build();
        let grid = [0.0, 1e-6];
        let g = evolve_schrodinger(
            &h,
            &QuantumState::basis(sp, Spin::Ground, 0).unwrap(),
            &grid,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let e = evolve_schrodinger(
            &h,
            &QuantumState::basis(sp, Spin::Excited, 0).unwrap(),
            &grid,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(
            transition_probability(&g, Process::Excitation).unwrap()[0],
            0.0
        );
        assert_eq!(
            transition_probability(&e, Process::Emission).unwrap()[0],
            0.0
        );
        assert!(matches!(
            transition_probability(&g, Process::Emission),
            Err(Error::ProcessMismatch { .. })
        ));
        assert!(matches!(
            transition_probability(&e, Process::Excitation),
            Err(Error::ProcessMismatch { .. })
        ));
    }

    #[test]
    fn pure_dephasing_decays_coherence() {
        let sp = spec();
        let gamma = 3e3;
        let h = HamiltonianBuilder::new(sp, "zero")
            .real_term(Operator::zeros(sp), |_| 0.0)
            .build();
        let mut v = Array1::zeros(sp.dim());
        v[sp.index(Spin::Ground, 0)] = ONE / 2f64.sqrt();
        v[sp.index(Spin::Excited, 0)] = ONE / 2f64.sqrt();
        let psi = QuantumState::ket(sp, v).unwrap();
        let rho0 = QuantumState::density(sp, psi.to_density()).unwrap();
        let terms = LindbladTerms::standard(sp, gamma, 0.0, 0.0, 0.0).unwrap();
        let t_end = 2e-4;
        let traj = evolve_lindblad(
            &h,
            &rho0,
            &terms,
            &[0.0, t_end],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let rho = traj.final_state.to_density();
        let coh = rho[[sp.index(Spin::Ground, 0), sp.index(Spin::Excited, 0)]].norm();
        assert!((coh - 0.5 * (-2.0 * gamma * t_end).exp()).abs() < 1e-9);
        assert!(traj.max_norm_drift() < 1e-7);
    }

    #[test]
    fn heating_rate_limit() {
        let sp = HilbertSpec::new(6).unwrap();
        let kappa = 50.0;
        let h = HamiltonianBuilder::new(sp, "zero")
            .real_term(Operator::zeros(sp), |_| 0.0)
            .build();
        let rho0 = QuantumState::density(
            sp,
            QuantumState::basis(sp, Spin::Ground, 0)
                .unwrap()
                .to_density(),
        )
        .unwrap();
        let terms = LindbladTerms::standard(sp, 0.0, 0.0, kappa, 0.0).unwrap();
        let t_end = 1e-4;
        let traj = evolve_lindblad(
            &h,
            &rho0,
            &terms,
            &[0.0, t_end],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let n = *traj.mean_n.last().unwrap();
        // ⟨n⟩ = e^{κt} − 1 in the untruncated space
        assert!((n - kappa * t_end).abs() < (kappa * t_end).powi(2));
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let sp = spec();
        let h = HamiltonianBuilder::new(sp, "zero")
            .real_term(Operator::zeros(sp), |_| 0.0)
            .build();
        let psi = QuantumState::basis(sp, Spin::Ground, 0).unwrap();
        let cfg = IntegratorConfig::default();
        assert!(evolve_schrodinger(&h, &psi, &[0.0, 0.0], &cfg).is_err());
        assert!(evolve_schrodinger(&h, &psi, &[-1.0, 0.0], &cfg).is_err());
        let mut bad = cfg;
        bad.rel_tol = 0.0;
        assert!(evolve_schrodinger(&h, &psi, &[0.0, 1.0], &bad).is_err());
        let mut fixed = IntegratorConfig::fixed_step(1e-6);
        fixed.max_step = 1e-7;
        assert!(fixed.validate().is_err());
        let rho = QuantumState::density(sp, psi.to_density()).unwrap();
        assert!(evolve_schrodinger(&h, &rho, &[0.0, 1.0], &cfg).is_err());
        assert!(LindbladTerms::new()
            .push(DissipatorRole::Custom, Operator::zeros(sp), -1.0)
            .is_err());
    }

    #[test]
    fn csv_has_fixed_columns() {
        let sp = spec();
        let h = HamiltonianBuilder::new(sp, "zero")
            .real_term(Operator::zeros(sp), |_| 0.0)
            .build();
        let psi = QuantumState::basis(sp, Spin::Ground, 0).unwrap();
        let traj =
            evolve_schrodinger(&h, &psi, &[0.0, 1e-6], &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t_us,P_g,P_e,mean_n,norm");
        assert_eq!(
            lines[2],
            "1.00000000000e0,1.00000000000e0,0.00000000000e0,0.00000000000e0,1.00000000000e0"
        );
    }
}
