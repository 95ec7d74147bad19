//! Time-dependent Hamiltonians of the detector-field model.
//!
//! Every Hamiltonian is stored as a short sum `H(t) = Σ_k c_k(t) A_k` of
//! fixed operators with scalar coefficients. [`TimeDependentHamiltonian::evaluate`]
//! assembles the dense matrix; the integrators use the merged sparsity
//! pattern instead, which keeps a matrix-vector product at O(nnz).

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{invalid, Error, Result};
use crate::params::{IonParams, ModelParams, Switching};
use crate::quantum::{ladder_ops, number_op, spin_ops, HilbertSpec, Operator, C64, I, ZERO};

type Coefficient = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Left end of the time domain on which a Hamiltonian is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDomain {
    /// `t ≥ start`
    Closed(f64),
    /// `t > start`
    Open(f64),
}

impl TimeDomain {
    pub fn contains(&self, t: f64) -> bool {
        match *self {
            TimeDomain::Closed(s) => t >= s,
            TimeDomain::Open(s) => t > s,
        }
    }
}

struct Term {
    op: Operator,
    coeff: Coefficient,
}

/// Non-zero entry of the summed operator: position plus the list of
/// `(term, value)` contributions.
#[derive(Debug, Clone)]
pub(crate) struct SparseEntry {
    pub row: usize,
    pub col: usize,
    contributions: Vec<(usize, C64)>,
}

/// Evaluable map `t ↦ H(t)`.
#[derive(Clone)]
pub struct TimeDependentHamiltonian {
    spec: HilbertSpec,
    label: String,
    domain: TimeDomain,
    terms: Arc<Vec<Term>>,
    entries: Arc<Vec<SparseEntry>>,
}

impl fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("label", &self.label)
            .field("spec", &self.spec)
            .field("domain", &self.domain)
            .field("terms", &self.terms.len())
            .field("nnz", &self.entries.len())
            .finish()
    }
}

/// Builder that accumulates `coefficient × operator` terms.
pub struct HamiltonianBuilder {
    spec: HilbertSpec,
    label: String,
    domain: TimeDomain,
    terms: Vec<Term>,
}

impl HamiltonianBuilder {
    pub fn new(spec: HilbertSpec, label: impl Into<String>) -> Self {
        Self {
            spec,
            label: label.into(),
            domain: TimeDomain::Closed(0.0),
            terms: Vec::new(),
        }
    }

    pub fn domain(mut self, domain: TimeDomain) -> Self {
        self.domain = domain;
        self
    }

    /// Add `c(t)·A`.
    pub fn term(
        mut self,
        op: Operator,
        coeff: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        self.terms.push(Term {
            op,
            coeff: Arc::new(coeff),
        });
        self
    }

    /// Add `f(t)·A` for a real, Hermitian-preserving scalar `f`.
    pub fn real_term(self, op: Operator, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.term(op, move |t| C64::new(f(t), 0.0))
    }

    /// Add `c(t)·A + c(t)*·A†`.
    pub fn hermitian_pair(
        self,
        op: Operator,
        coeff: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        let coeff = Arc::new(coeff);
        let conj = Arc::clone(&coeff);
        let adj = op.adjoint();
        self.term(op, move |t| coeff(t))
            .term(adj, move |t| conj(t).conj())
    }

    pub fn build(self) -> TimeDependentHamiltonian {
        let d = self.spec.dim();
        let mut slots: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d * d];
        for (k, term) in self.terms.iter().enumerate() {
            for ((i, j), &v) in term.op.matrix().indexed_iter() {
                if v != ZERO {
                    slots[i * d + j].push((k, v));
                }
            }
        }
        let entries = slots
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(idx, contributions)| SparseEntry {
                row: idx / d,
                col: idx % d,
                contributions,
            })
            .collect();
        TimeDependentHamiltonian {
            spec: self.spec,
            label: self.label,
            domain: self.domain,
            terms: Arc::new(self.terms),
            entries: Arc::new(entries),
        }
    }
}

impl TimeDependentHamiltonian {
    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || !self.domain.contains(t) {
            return Err(Error::TimeDomain {
                model: self.label.clone(),
                t,
                reason: match self.domain {
                    TimeDomain::Closed(_) => "before the start of the model's domain",
                    TimeDomain::Open(_) => "the model diverges at the domain start",
                },
            });
        }
        Ok(())
    }

    /// Dense `H(t)`.
    pub fn evaluate(&self, t: f64) -> Result<Operator> {
        self.check_time(t)?;
        let d = self.spec.dim();
        let mut m = Array2::zeros((d, d));
        let mut values = Vec::new();
        self.sparse_values(t, &mut values);
        for (e, v) in self.entries.iter().zip(&values) {
            m[[e.row, e.col]] = *v;
        }
        Operator::from_matrix(self.spec, m)
    }

    pub(crate) fn entries(&self) -> &[SparseEntry] {
        &self.entries
    }

    /// Values of the merged sparse entries at time `t`, in the order of
    /// [`Self::entries`]. The time domain is not checked.
    pub(crate) fn sparse_values(&self, t: f64, out: &mut Vec<C64>) {
        let coeffs: Vec<C64> = self.terms.iter().map(|term| (term.coeff)(t)).collect();
        out.clear();
        out.extend(self.entries.iter().map(|e| {
            e.contributions
                .iter()
                .fold(ZERO, |acc, &(k, v)| acc + coeffs[k] * v)
        }));
    }
}

/// Switching function χ(t).
pub fn switching_chi(params: &ModelParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(
            "t",
            format!("switching is defined for t ≥ 0, got {t}"),
        ));
    }
    Ok(chi_unchecked(params.switching, params.t_d, t))
}

fn chi_unchecked(switching: Switching, t_d: f64, t: f64) -> f64 {
    match switching {
        Switching::Constant => 1.0,
        Switching::ExponentialDamped => (-t / t_d).exp(),
    }
}

/// Shared operator set for the spin-boson builders.
struct ModelOps {
    sigma_z: Operator,
    number: Operator,
    coupling: Operator,
}

impl ModelOps {
    fn new(spec: HilbertSpec) -> Self {
        let s = spin_ops(spec);
        let (b, b_dag) = ladder_ops(spec);
        Self {
            coupling: s.sigma_x.dot(&(&b + &b_dag)),
            sigma_z: s.sigma_z,
            number: number_op(spec),
        }
    }
}

/// Lab-frame Hamiltonian with time-translated gap
/// `H(t) = ω_q/(2(αt+C)) σ_z + ω_p b†b + g₀χ(t) σ_x(b + b†)`.
///
/// α = 0 is accepted and gives the fixed-gap model with splitting ω_q/C.
pub fn build_h_exp(params: &ModelParams, spec: HilbertSpec) -> Result<TimeDependentHamiltonian> {
    params.validate()?;
    if !(params.c > 0.0) {
        return Err(invalid(
            "c",
            "C = 0 diverges at t = 0; use the oracle or closed forms",
        ));
    }
    let ops = ModelOps::new(spec);
    let ModelParams {
        alpha,
        omega_q,
        omega_p,
        g0,
        c,
        t_d,
        switching,
    } = *params;
    Ok(HamiltonianBuilder::new(spec, "h_exp")
        .real_term(ops.sigma_z, move |t| 0.5 * omega_q / (alpha * t + c))
        .real_term(ops.number, move |_| omega_p)
        .real_term(ops.coupling, move |t| g0 * chi_unchecked(switching, t_d, t))
        .build())
}

/// Comparison models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Fixed gap ω_q, constant coupling.
    Rabi,
    /// Gap ω_q/(αt), constant coupling; diverges at t = 0.
    Ue01,
    /// Gap ω_q/(αt+1), coupling g₀e^{−t/T_d}.
    Ue1Exp,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Rabi, Variant::Ue01, Variant::Ue1Exp];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Rabi => "rabi",
            Variant::Ue01 => "ue01",
            Variant::Ue1Exp => "ue1exp",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rabi" => Ok(Variant::Rabi),
            "ue01" => Ok(Variant::Ue01),
            "ue1exp" => Ok(Variant::Ue1Exp),
            other => Err(invalid("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// Build one of the three comparison models. Only ω_q, ω_p, g₀, α and T_d
/// are read from `params`; C and the switching kind are fixed by the variant.
pub fn build_variant(
    kind: Variant,
    params: &ModelParams,
    spec: HilbertSpec,
) -> Result<TimeDependentHamiltonian> {
    params.validate()?;
    let ops = ModelOps::new(spec);
    let ModelParams {
        alpha,
        omega_q,
        omega_p,
        g0,
        t_d,
        ..
    } = *params;
    let builder = HamiltonianBuilder::new(spec, kind.name());
    let builder = match kind {
        Variant::Rabi => builder
            .real_term(ops.sigma_z, move |_| 0.5 * omega_q)
            .real_term(ops.number, move |_| omega_p)
            .real_term(ops.coupling, move |_| g0),
        Variant::Ue01 => {
            if !(alpha > 0.0) {
                return Err(invalid("alpha", "ue01 needs α > 0"));
            }
            builder
                .domain(TimeDomain::Open(0.0))
                .real_term(ops.sigma_z, move |t| 0.5 * omega_q / (alpha * t))
                .real_term(ops.number, move |_| omega_p)
                .real_term(ops.coupling, move |_| g0)
        }
        Variant::Ue1Exp => {
            if !(t_d > 0.0) {
                return Err(invalid("t_d", "ue1exp needs T_d > 0"));
            }
            builder
                .real_term(ops.sigma_z, move |t| 0.5 * omega_q / (alpha * t + 1.0))
                .real_term(ops.number, move |_| omega_p)
                .real_term(ops.coupling, move |t| g0 * (-t / t_d).exp())
        }
    };
    Ok(builder.build())
}

/// Spin phase ν ln(αt + C) accumulated in the interaction picture.
fn interaction_spin_phase(params: &ModelParams, t: f64) -> f64 {
    params.nu() * (params.alpha * t + params.c).ln()
}

/// Interaction-picture coupling
/// `V(t) = g₀χ(t)(b†e^{iω_p t} + b e^{−iω_p t})(σ₊e^{iφ(t)} + σ₋e^{−iφ(t)})`
/// with `φ(t) = (ω_q/α) ln(αt + C)`.
///
/// C = 0 is allowed; the domain is then `t > 0`.
pub fn interaction_v(params: &ModelParams, spec: HilbertSpec) -> Result<TimeDependentHamiltonian> {
    params.validate()?;
    if !(params.alpha > 0.0) {
        return Err(invalid("alpha", "the interaction picture needs α > 0"));
    }
    let s = spin_ops(spec);
    let (b, b_dag) = ladder_ops(spec);
    let p = *params;
    let envelope = move |t: f64| p.g0 * chi_unchecked(p.switching, p.t_d, t);
    let domain = if p.c > 0.0 {
        TimeDomain::Closed(0.0)
    } else {
        TimeDomain::Open(0.0)
    };
    Ok(HamiltonianBuilder::new(spec, "interaction_v")
        .domain(domain)
        .hermitian_pair(s.sigma_plus.dot(&b_dag), move |t| {
            C64::from_polar(envelope(t), p.omega_p * t + interaction_spin_phase(&p, t))
        })
        .hermitian_pair(s.sigma_plus.dot(&b), move |t| {
            C64::from_polar(envelope(t), interaction_spin_phase(&p, t) - p.omega_p * t)
        })
        .build())
}

/// Diagonal frame rotation `U(t) = exp(−i φ(t) σ_z/2) exp(−i ω_p t b†b)`
/// linking the lab frame to the interaction picture: `ψ_lab = U ψ_int`.
pub fn interaction_frame(params: &ModelParams, spec: HilbertSpec, t: f64) -> Result<Operator> {
    if !(params.alpha * t + params.c > 0.0) {
        return Err(invalid("t", "αt + C must be positive"));
    }
    let phi = interaction_spin_phase(params, t);
    let d = spec.dim();
    let mut m = Array2::zeros((d, d));
    for k in 0..d {
        let (spin, n) = spec.decompose(k);
        let sz = if spin.index() == 0 { -1.0 } else { 1.0 };
        m[[k, k]] = C64::from_polar(1.0, -0.5 * phi * sz - params.omega_p * t * n as f64);
    }
    Operator::from_matrix(spec, m)
}

/// Fixed spin rotation `exp(−i θ σ_z / 2)`.
pub fn spin_phase_rotation(spec: HilbertSpec, theta: f64) -> Operator {
    let s = spin_ops(spec);
    let d = spec.dim();
    let m = Array2::from_shape_fn((d, d), |(i, j)| {
        if i == j {
            C64::from_polar(1.0, -0.5 * theta * s.sigma_z.get(i, i).re)
        } else {
            ZERO
        }
    });
    Operator::from_matrix(spec, m).expect("dimension is fixed by spec")
}

/// Angle of the spin rotation mapping `g₀σ_x(b+b†)` onto the coupling
/// produced by two in-phase sideband tones, `−g₀σ_y(b+b†)`.
pub const RWA_SPIN_ROTATION: f64 = 2.0 * FRAC_PI_4;

/// Sideband tone of the chirped drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tone {
    /// Detuned by +(ω_z − ω_p); drives |g,n⟩ → |e,n+1⟩.
    Blue,
    /// Detuned by −(ω_z − ω_p); drives |g,n⟩ → |e,n−1⟩.
    Red,
}

impl Tone {
    fn sign(self) -> f64 {
        match self {
            Tone::Blue => 1.0,
            Tone::Red => -1.0,
        }
    }
}

/// Accumulated laser phase relative to the carrier, `Φ(t) − ω₀t`:
///
/// `−(ω_q/α) ln((αt + C)/C) ± (ω_z − ω_p) t`.
///
/// The full optical phase is `ω₀t` plus this value; ω₀ itself never enters
/// the numerics because the rotating frame removes it.
pub fn laser_phase(ion: &IonParams, tone: Tone, t: f64) -> Result<f64> {
    let m = &ion.model;
    if !(m.c > 0.0) || !(m.alpha > 0.0) {
        return Err(invalid("c", "chirped drives need α > 0 and C > 0"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t", "laser phase is defined for t ≥ 0"));
    }
    Ok(-m.nu() * (m.alpha * t / m.c).ln_1p() + tone.sign() * ion.sideband_detuning() * t)
}

/// Mean frequency over `[0, t]` relative to the carrier, `(Φ(t) − ω₀t)/t`;
/// the limit `−ω_q/C ± (ω_z − ω_p)` at t = 0.
pub fn laser_mean_frequency(ion: &IonParams, tone: Tone, t: f64) -> Result<f64> {
    let m = &ion.model;
    if t == 0.0 {
        laser_phase(ion, tone, 0.0)?;
        return Ok(-m.omega_q / m.c + tone.sign() * ion.sideband_detuning());
    }
    Ok(laser_phase(ion, tone, t)? / t)
}

/// Instantaneous frequency relative to the carrier, `−ω_q/(αt + C) ± (ω_z − ω_p)`.
pub fn laser_instantaneous_frequency(ion: &IonParams, tone: Tone, t: f64) -> Result<f64> {
    laser_phase(ion, tone, t)?;
    let m = &ion.model;
    Ok(-m.omega_q / (m.alpha * t + m.c) + tone.sign() * ion.sideband_detuning())
}

/// Spin phase of the rotating frame relative to ω₀t,
/// `−∫₀ᵗ ω_q/(αs + C) ds`.
fn frame_spin_phase(m: &ModelParams, t: f64) -> f64 {
    -m.nu() * (m.alpha * t / m.c).ln_1p()
}

/// Trapped-ion Hamiltonian in the frame rotating with
/// `H₀ = (ω_z − ω_p) b†b + ½(ω₀ − ω_q/(αt + C)) σ_z`, with the laser
/// exponentials expanded to first order in the Lamb-Dicke parameter.
///
/// Both tones keep their carrier term and both motional sidebands with the
/// full time dependence; nothing is dropped by a rotating-wave
/// approximation. Each tone contributes
/// `(Ω₀χ/2) σ₊ e^{i(θ(t) − Φ_j(t) − φ_j)} [1 + iη(b e^{−iδt} + b† e^{iδt})] + h.c.`
/// where θ is the frame's spin phase and δ = ω_z − ω_p.
pub fn build_ion_rotframe(ion: &IonParams, spec: HilbertSpec) -> Result<TimeDependentHamiltonian> {
    ion.validate()?;
    let m = ion.model;
    let s = spin_ops(spec);
    let (b, b_dag) = ladder_ops(spec);
    let ops = ModelOps::new(spec);
    let delta = ion.sideband_detuning();
    let eta = ion.lamb_dicke;
    let ion_c = *ion;
    // Σ_j (Ω₀χ/2) e^{i(θ − Φ_j − φ_j)}
    let drive = move |t: f64| -> C64 {
        let theta = frame_spin_phase(&ion_c.model, t);
        let half_rabi = 0.5 * ion_c.rabi_omega0 * chi_unchecked(m.switching, m.t_d, t);
        let mut sum = ZERO;
        for (tone, phi) in [(Tone::Blue, ion_c.phases.0), (Tone::Red, ion_c.phases.1)] {
            let phase = ion_phase_unchecked(&ion_c, tone, t);
            sum += C64::from_polar(half_rabi, theta - phase - phi);
        }
        sum
    };
    let drive = Arc::new(drive);
    let (d1, d2, d3) = (Arc::clone(&drive), Arc::clone(&drive), Arc::clone(&drive));
    Ok(HamiltonianBuilder::new(spec, "ion_rotframe")
        .real_term(ops.sigma_z, move |t| 0.5 * m.omega_q / (m.alpha * t + m.c))
        .real_term(ops.number, move |_| m.omega_p)
        .hermitian_pair(s.sigma_plus.clone(), move |t| d1(t))
        .hermitian_pair(s.sigma_plus.dot(&b), move |t| {
            d2(t) * I * eta * C64::from_polar(1.0, -delta * t)
        })
        .hermitian_pair(s.sigma_plus.dot(&b_dag), move |t| {
            d3(t) * I * eta * C64::from_polar(1.0, delta * t)
        })
        .build())
}

fn ion_phase_unchecked(ion: &IonParams, tone: Tone, t: f64) -> f64 {
    -ion.model.nu() * (ion.model.alpha * t / ion.model.c).ln_1p()
        + tone.sign() * ion.sideband_detuning() * t
}

/// The ion Hamiltonian after the rotating-wave approximation: the resonant
/// sideband terms `iηΩ₀χ/2 (e^{−iφ_blue} σ₊b† + e^{−iφ_red} σ₊b) + h.c.`
/// on top of the frame remainder.
pub fn build_ion_rwa(ion: &IonParams, spec: HilbertSpec) -> Result<TimeDependentHamiltonian> {
    ion.validate()?;
    let m = ion.model;
    let s = spin_ops(spec);
    let (b, b_dag) = ladder_ops(spec);
    let ops = ModelOps::new(spec);
    let g = ion.sideband_coupling();
    let (phi_blue, phi_red) = ion.phases;
    Ok(HamiltonianBuilder::new(spec, "ion_rwa")
        .real_term(ops.sigma_z, move |t| 0.5 * m.omega_q / (m.alpha * t + m.c))
        .real_term(ops.number, move |_| m.omega_p)
        .hermitian_pair(s.sigma_plus.dot(&b_dag), move |t| {
            I * C64::from_polar(g * chi_unchecked(m.switching, m.t_d, t), -phi_blue)
        })
        .hermitian_pair(s.sigma_plus.dot(&b), move |t| {
            I * C64::from_polar(g * chi_unchecked(m.switching, m.t_d, t), -phi_red)
        })
        .build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{khz_to_rad_per_s, DEFAULT_LAMB_DICKE};
    use crate::quantum::Spin;

    fn spec() -> HilbertSpec {
        HilbertSpec::new(6).unwrap()
    }

    fn max_diff(a: &Operator, b: &Operator) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn switching_values() {
        let p = ModelParams::default();
        assert_eq!(switching_chi(&p, 0.0).unwrap(), 1.0);
        assert!((switching_chi(&p, p.t_d).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let c = ModelParams {
            switching: Switching::Constant,
            ..p
        };
        assert_eq!(switching_chi(&c, 12.5).unwrap(), 1.0);
        assert!(switching_chi(&p, -1e-9).is_err());
    }

    #[test]
    fn h_exp_gap_and_coupling() {
        let p = ModelParams::default();
        let h = build_h_exp(&p, spec()).unwrap();
        let h0 = h.evaluate(0.0).unwrap();
        let gap = h0.element((Spin::Excited, 0), (Spin::Excited, 0))
            - h0.element((Spin::Ground, 0), (Spin::Ground, 0));
        assert!((gap.re - khz_to_rad_per_s(200.0)).abs() < 1e-9);
        // coupling prefactor g₀χ(t) on ⟨e,1|H|g,0⟩
        let t = 0.13e-3;
        let ht = h.evaluate(t).unwrap();
        let coupling = ht.element((Spin::Excited, 1), (Spin::Ground, 0));
        assert!((coupling.re - p.g0 * (-t / p.t_d).exp()).abs() < 1e-9);

        // spin prefactor 1/(αt + C) at α = 10⁷, t = 0.1 ms
        let t = 1e-4;
        let ht = h.evaluate(t).unwrap();
        let gap = ht.element((Spin::Excited, 0), (Spin::Excited, 0))
            - ht.element((Spin::Ground, 0), (Spin::Ground, 0));
        assert!((gap.re / p.omega_q - 1.0 / 1001.0).abs() < 1e-15);

        assert!(build_h_exp(&p.with_c(0.0), spec()).is_err());
    }

    #[test]
    fn h_exp_late_time_limit() {
        let p = ModelParams::default();
        let h = build_h_exp(&p, spec()).unwrap();
        let late = h.evaluate(1.0).unwrap();
        let free = &number_op(spec()) * p.omega_p;
        assert!(max_diff(&late, &free) < 1e-6 * p.omega_p);
    }

    #[test]
    fn variants() {
        let p = ModelParams::default();
        let rabi = build_variant(Variant::Rabi, &p, spec()).unwrap();
        let r0 = rabi.evaluate(0.0).unwrap();
        assert_eq!(r0, rabi.evaluate(0.7e-3).unwrap());

        let ue01 = build_variant(Variant::Ue01, &p, spec()).unwrap();
        assert!(ue01.evaluate(0.0).is_err());
        let t = 1.0 / p.alpha;
        let h = ue01.evaluate(t).unwrap();
        let gap = h.element((Spin::Excited, 0), (Spin::Excited, 0))
            - h.element((Spin::Ground, 0), (Spin::Ground, 0));
        assert!((gap.re / p.omega_q - 1.0).abs() < 1e-15);

        let ue1 = build_variant(Variant::Ue1Exp, &p, spec()).unwrap();
        let hexp = build_h_exp(&p, spec()).unwrap();
        for k in 0..20 {
            let t = k as f64 * 5e-5;
            let d = max_diff(&ue1.evaluate(t).unwrap(), &hexp.evaluate(t).unwrap());
            assert!(d < 1e-12, "t = {t}: {d}");
        }
    }

    #[test]
    fn zero_acceleration_is_rabi() {
        let p = ModelParams {
            alpha: 0.0,
            switching: Switching::Constant,
            ..ModelParams::default()
        };
        let h = build_h_exp(&p, spec()).unwrap();
        let rabi = build_variant(Variant::Rabi, &p, spec()).unwrap();
        for t in [0.0, 1e-6, 3.3e-4, 1e-3] {
            assert_eq!(h.evaluate(t).unwrap(), rabi.evaluate(t).unwrap());
        }
    }

    #[test]
    fn interaction_matrix_element() {
        let p = ModelParams::default();
        let v = interaction_v(&p, spec()).unwrap();
        let v0 = v.evaluate(0.0).unwrap();
        let m = v0.element((Spin::Excited, 1), (Spin::Ground, 0));
        assert!((m - C64::new(p.g0, 0.0)).norm() < 1e-9);
        for t in [1e-7, 3e-5, 2.2e-4, 9e-4] {
            let vt = v.evaluate(t).unwrap();
            let m = vt.element((Spin::Excited, 1), (Spin::Ground, 0));
            let expected = C64::from_polar(
                p.g0 * (-t / p.t_d).exp(),
                p.omega_p * t + p.nu() * (p.alpha * t + 1.0).ln(),
            );
            assert!((m - expected).norm() < 1e-9 * p.g0);
            assert!((m.norm() - p.g0 * (-t / p.t_d).exp()).abs() < 1e-9 * p.g0);
        }
        let c0 = interaction_v(&p.with_c(0.0), spec()).unwrap();
        assert!(c0.evaluate(0.0).is_err());
        assert!(c0.evaluate(1e-9).is_ok());
    }

    /// Oracle: `V = U†HU − iU†U̇` with the derivative of U taken by central
    /// finite differences.
    #[test]
    fn interaction_frame_consistency() {
        let p = ModelParams::default();
        let sp = spec();
        let h = build_h_exp(&p, sp).unwrap();
        let v = interaction_v(&p, sp).unwrap();
        for t in [2e-6, 4e-5, 3.1e-4, 8e-4] {
            let u = interaction_frame(&p, sp, t).unwrap();
            // five-point stencil
            let dt = 1e-10;
            let at = |k: f64| interaction_frame(&p, sp, t + k * dt).unwrap();
            let du =
                &(&(&at(-2.0) - &at(2.0)) + &(&(&at(1.0) - &at(-1.0)) * 8.0)) * (1.0 / (12.0 * dt));
            let rotated = u.adjoint().dot(&h.evaluate(t).unwrap()).dot(&u);
            let frame = u.adjoint().dot(&du).scale(-I);
            let reconstructed = &rotated + &frame;
            let diff = max_diff(&reconstructed, &v.evaluate(t).unwrap());
            assert!(
                diff < 1e-9 * h.evaluate(t).unwrap().max_abs(),
                "t = {t}: {diff}"
            );
        }
    }

    #[test]
    fn builders_are_hermitian() {
        let p = ModelParams::default();
        let sp = spec();
        let ion = IonParams::from_model(p, DEFAULT_LAMB_DICKE).with_phases(0.3, 1.9);
        let models = [
            build_h_exp(&p, sp).unwrap(),
            build_variant(Variant::Rabi, &p, sp).unwrap(),
            build_variant(Variant::Ue01, &p, sp).unwrap(),
            build_variant(Variant::Ue1Exp, &p, sp).unwrap(),
            interaction_v(&p, sp).unwrap(),
            build_ion_rotframe(&ion, sp).unwrap(),
            build_ion_rwa(&ion, sp).unwrap(),
        ];
        // deterministic pseudo-random sample of times in (0, 1 ms]
        let mut x: u64 = 0x9E37_79B9_7F4A_7C15;
        for _ in 0..100 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let t = 1e-3 * ((x >> 11) as f64 / (1u64 << 53) as f64) + 1e-12;
            for h in &models {
                let op = h.evaluate(t).unwrap();
                assert!(op.is_hermitian(1e-12), "{} at t = {t}", h.label());
            }
        }
    }

    #[test]
    fn laser_phase_properties() {
        let ion = IonParams::from_model(ModelParams::default(), DEFAULT_LAMB_DICKE);
        let m = ion.model;
        assert_eq!(laser_phase(&ion, Tone::Blue, 0.0).unwrap(), 0.0);
        assert_eq!(laser_phase(&ion, Tone::Red, 0.0).unwrap(), 0.0);

        for t in [1e-7, 1e-5, 4e-4, 1e-3] {
            // chirp part of the mean frequency equals ω_q ln(αt+1)/(αt) at C = 1
            let blue = laser_mean_frequency(&ion, Tone::Blue, t).unwrap();
            let chirp = -(blue - ion.sideband_detuning());
            let expected = m.omega_q * (m.alpha * t + 1.0).ln() / (m.alpha * t);
            assert!((chirp - expected).abs() < 1e-9 * expected);
            // mean frequency × t reproduces the phase
            let phi = laser_phase(&ion, Tone::Red, t).unwrap();
            let mean = laser_mean_frequency(&ion, Tone::Red, t).unwrap();
            assert!((mean * t - phi).abs() <= 1e-12 * phi.abs());

            // finite-difference derivative vs instantaneous frequency
            for tone in [Tone::Blue, Tone::Red] {
                let h = 1e-6 * t;
                let fd = (laser_phase(&ion, tone, t + h).unwrap()
                    - laser_phase(&ion, tone, t - h).unwrap())
                    / (2.0 * h);
                let inst = laser_instantaneous_frequency(&ion, tone, t).unwrap();
                assert!((fd - inst).abs() < 1e-6 * inst.abs(), "{tone:?} t = {t}");
            }
        }
        // the blue detuning phase (and any full optical phase) grows monotonically
        let omega0 = 2.0 * std::f64::consts::PI * 411.042e12;
        let mut prev_blue = f64::NEG_INFINITY;
        let mut prev_full = f64::NEG_INFINITY;
        for k in 0..=1000 {
            let t = k as f64 * 1e-6;
            let blue = laser_phase(&ion, Tone::Blue, t).unwrap();
            let full = omega0 * t + laser_phase(&ion, Tone::Red, t).unwrap();
            assert!(blue >= prev_blue && full >= prev_full);
            prev_blue = blue;
            prev_full = full;
        }
    }

    #[test]
    fn ion_without_drive_is_diagonal() {
        let mut ion = IonParams::from_model(ModelParams::default(), DEFAULT_LAMB_DICKE);
        ion.rabi_omega0 = 0.0;
        ion.model.g0 = 0.0;
        let h = build_ion_rotframe(&ion, spec()).unwrap();
        let op = h.evaluate(2e-4).unwrap();
        for ((i, j), z) in op.matrix().indexed_iter() {
            if i != j {
                assert_eq!(*z, ZERO);
            }
        }
    }

    #[test]
    fn rwa_reduction_matches_effective_model() {
        let p = ModelParams::default();
        let sp = spec();
        let ion = IonParams::from_model(p, DEFAULT_LAMB_DICKE);
        let rwa = build_ion_rwa(&ion, sp).unwrap();
        let eff = build_h_exp(&p, sp).unwrap();
        let r = spin_phase_rotation(sp, RWA_SPIN_ROTATION);
        for t in [0.0, 1e-5, 2e-4, 7e-4] {
            let rotated = r.adjoint().dot(&eff.evaluate(t).unwrap()).dot(&r);
            let d = max_diff(&rotated, &rwa.evaluate(t).unwrap());
            assert!(d < 1e-9, "t = {t}: {d}");
        }

        // With a constant envelope, averaging the full first-order
        // Hamiltonian over one period of the sideband detuning removes every
        // off-resonant term exactly.
        let mut ion = ion;
        ion.model.switching = Switching::Constant;
        let rwa = build_ion_rwa(&ion, sp).unwrap();
        let full = build_ion_rotframe(&ion, sp).unwrap();
        let delta = ion.sideband_detuning();
        let period = 2.0 * std::f64::consts::PI / delta;
        let t0 = 3e-4;
        let samples = 400;
        let mut avg = Operator::zeros(sp);
        let mut ref_avg = Operator::zeros(sp);
        for k in 0..samples {
            let t = t0 + period * (k as f64 + 0.5) / samples as f64;
            avg = &avg + &(&full.evaluate(t).unwrap() * (1.0 / samples as f64));
            ref_avg = &ref_avg + &(&rwa.evaluate(t).unwrap() * (1.0 / samples as f64));
        }
        assert!(max_diff(&avg, &ref_avg) < 1e-6 * ion.rabi_omega0);
    }
}
