//! Dense linear algebra on the truncated spin ⊗ Fock space.
//!
//! Basis ordering is spin-major: the basis vector `|s, n⟩` sits at index
//! `s·N + n`, with `s = 0` for the ground state `|g⟩`, `s = 1` for the
//! excited state `|e⟩`, and `n ∈ 0..N` the phonon number.
//!
//! The creation operator is truncated at the top level, `b†|N−1⟩ = 0`, so the
//! commutator `[b, b†]` equals the identity everywhere except in the
//! `|N−1⟩` block, where it is `1 − N`. Evolution monitors the top-level
//! population to catch states that feel this defect.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Default phonon cutoff for couplings at the g₀/ω_p ≈ 0.2 scale.
pub const DEFAULT_FOCK_CUTOFF: usize = 12;

/// Tolerance on ‖ψ‖² − 1 and Tr ρ − 1 accepted by state validation.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Most negative eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// Truncation of the two-level ⊗ single-mode Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    fock_cutoff: usize,
}

impl HilbertSpec {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff == 0 {
            return Err(invalid(
                "fock_cutoff",
                "at least one Fock level is required",
            ));
        }
        Ok(Self { fock_cutoff })
    }

    /// Number of Fock levels N; the phonon number runs over `0..N`.
    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    /// Total dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.fock_cutoff
    }

    pub fn index(&self, spin: Spin, n: usize) -> usize {
        debug_assert!(n < self.fock_cutoff);
        spin.index() * self.fock_cutoff + n
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn decompose(&self, index: usize) -> (Spin, usize) {
        let spin = if index < self.fock_cutoff {
            Spin::Ground
        } else {
            Spin::Excited
        };
        (spin, index % self.fock_cutoff)
    }
}

impl Default for HilbertSpec {
    fn default() -> Self {
        Self {
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Ground,
    Excited,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Ground => 0,
            Spin::Excited => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Ground => Spin::Excited,
            Spin::Excited => Spin::Ground,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Spin::Ground => "g",
            Spin::Excited => "e",
        }
    }
}

/// A dense complex operator on the full 2N-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    spec: HilbertSpec,
    entries: Array2<C64>,
}

impl Operator {
    pub fn zeros(spec: HilbertSpec) -> Self {
        let d = spec.dim();
        Self {
            spec,
            entries: Array2::zeros((d, d)),
        }
    }

    pub fn identity(spec: HilbertSpec) -> Self {
        Self {
            spec,
            entries: Array2::eye(spec.dim()),
        }
    }

    pub fn from_matrix(spec: HilbertSpec, entries: Array2<C64>) -> Result<Self> {
        let d = spec.dim();
        if entries.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows(),
            });
        }
        Ok(Self { spec, entries })
    }

    /// Lift `spin ⊗ fock` onto the full space, where `spin` is 2×2 in the
    /// `(g, e)` basis and `fock` is N×N.
    pub fn from_kron(spec: HilbertSpec, spin: [[C64; 2]; 2], fock: &Array2<C64>) -> Self {
        let n = spec.fock_cutoff();
        debug_assert_eq!(fock.dim(), (n, n));
        let mut entries = Array2::zeros((2 * n, 2 * n));
        for (s, row) in spin.iter().enumerate() {
            for (s2, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for ((i, j), &b) in fock.indexed_iter() {
                    entries[[s * n + i, s2 * n + j]] = a * b;
                }
            }
        }
        Self { spec, entries }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[[row, col]]
    }

    /// Matrix element `⟨s, n| A |s', n'⟩`.
    pub fn element(&self, bra: (Spin, usize), ket: (Spin, usize)) -> C64 {
        self.entries[[self.spec.index(bra.0, bra.1), self.spec.index(ket.0, ket.1)]]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            spec: self.spec,
            entries: self.entries.t().mapv(|z| z.conj()),
        }
    }

    pub fn dot(&self, other: &Operator) -> Self {
        debug_assert_eq!(self.spec, other.spec);
        Self {
            spec: self.spec,
            entries: self.entries.dot(&other.entries),
        }
    }

    pub fn apply(&self, ket: &Array1<C64>) -> Array1<C64> {
        self.entries.dot(ket)
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &self.dot(other) - &other.dot(self)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            spec: self.spec,
            entries: &self.entries * factor,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A − A†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.spec.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let diff = self.entries[[i, j]] - self.entries[[j, i]].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    /// Hermitian to within `rel_tol` of the operator's own scale.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// Row-major text dump, one matrix row per line, entries written as
    /// `re,im` with round-trip float formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.entries.rows() {
            let line: Vec<String> = row.iter().map(format_c64).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(spec: HilbertSpec, text: &str) -> Result<Self> {
        let d = spec.dim();
        let mut entries = Array2::zeros((d, d));
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rows.len(),
            });
        }
        for (i, line) in rows.iter().enumerate() {
            let values = parse_c64_row(line)?;
            if values.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: values.len(),
                });
            }
            for (j, z) in values.into_iter().enumerate() {
                entries[[i, j]] = z;
            }
        }
        Ok(Self { spec, entries })
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        debug_assert_eq!(self.spec, rhs.spec);
        Operator {
            spec: self.spec,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        debug_assert_eq!(self.spec, rhs.spec);
        Operator {
            spec: self.spec,
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

fn format_c64(z: &C64) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

fn parse_c64_row(line: &str) -> Result<Vec<C64>> {
    line.split_whitespace()
        .map(|pair| {
            let (re, im) = pair
                .split_once(',')
                .ok_or_else(|| Error::InvalidState(format!("malformed entry `{pair}`")))?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidState(format!("malformed number `{s}`: {e}")))
            };
            Ok(C64::new(parse(re)?, parse(im)?))
        })
        .collect()
}

fn fock_annihilation(n: usize) -> Array2<C64> {
    let mut b = Array2::zeros((n, n));
    for k in 1..n {
        b[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    b
}

/// Annihilation and creation operators `(b, b†)` lifted to the full space.
pub fn ladder_ops(spec: HilbertSpec) -> (Operator, Operator) {
    let b = Operator::from_kron(
        spec,
        [[ONE, ZERO], [ZERO, ONE]],
        &fock_annihilation(spec.fock_cutoff()),
    );
    let b_dag = b.adjoint();
    (b, b_dag)
}

/// Phonon number operator `b†b`.
pub fn number_op(spec: HilbertSpec) -> Operator {
    let n = spec.fock_cutoff();
    let fock = Array2::from_diag(&Array1::from_iter((0..n).map(|k| C64::new(k as f64, 0.0))));
    Operator::from_kron(spec, [[ONE, ZERO], [ZERO, ONE]], &fock)
}

/// Spin operators lifted to the full space.
#[derive(Debug, Clone)]
pub struct SpinOps {
    pub sigma_z: Operator,
    pub sigma_x: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
}

/// Pauli operators in the `(g, e)` basis: `σ_z|g⟩ = −|g⟩`, `σ₊|g⟩ = |e⟩`.
pub fn spin_ops(spec: HilbertSpec) -> SpinOps {
    let id = Array2::eye(spec.fock_cutoff());
    let sigma_z = Operator::from_kron(spec, [[-ONE, ZERO], [ZERO, ONE]], &id);
    // Row = bra, column = ket: σ₊ = |e⟩⟨g| has its entry at (e, g).
    let sigma_plus = Operator::from_kron(spec, [[ZERO, ZERO], [ONE, ZERO]], &id);
    let sigma_minus = sigma_plus.adjoint();
    let sigma_x = &sigma_plus + &sigma_minus;
    SpinOps {
        sigma_z,
        sigma_x,
        sigma_plus,
        sigma_minus,
    }
}

/// Payload of a [`QuantumState`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Ket(Array1<C64>),
    Density(Array2<C64>),
}

/// Pure or mixed state on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    spec: HilbertSpec,
    data: StateData,
}

impl QuantumState {
    /// Basis ket `|s, n⟩`.
    pub fn basis(spec: HilbertSpec, spin: Spin, n: usize) -> Result<Self> {
        if n >= spec.fock_cutoff() {
            return Err(invalid(
                "n",
                format!("Fock level {n} beyond cutoff {}", spec.fock_cutoff()),
            ));
        }
        let mut v = Array1::zeros(spec.dim());
        v[spec.index(spin, n)] = ONE;
        Ok(Self {
            spec,
            data: StateData::Ket(v),
        })
    }

    /// Validated pure state.
    pub fn ket(spec: HilbertSpec, amplitudes: Array1<C64>) -> Result<Self> {
        let state = Self {
            spec,
            data: StateData::Ket(amplitudes),
        };
        state.validate()?;
        Ok(state)
    }

    /// Validated density matrix.
    pub fn density(spec: HilbertSpec, rho: Array2<C64>) -> Result<Self> {
        let state = Self {
            spec,
            data: StateData::Density(rho),
        };
        state.validate()?;
        Ok(state)
    }

    /// Unchecked construction for propagated states, whose invariants are
    /// monitored by the integrator rather than enforced here.
    pub(crate) fn from_data(spec: HilbertSpec, data: StateData) -> Self {
        Self { spec, data }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Ket(_))
    }

    pub fn as_ket(&self) -> Option<&Array1<C64>> {
        match &self.data {
            StateData::Ket(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn to_density(&self) -> Array2<C64> {
        match &self.data {
            StateData::Ket(v) => {
                let d = v.len();
                Array2::from_shape_fn((d, d), |(i, j)| v[i] * v[j].conj())
            }
            StateData::Density(rho) => rho.clone(),
        }
    }

    /// ‖ψ‖² for kets, Re Tr ρ for density matrices.
    pub fn norm_or_trace(&self) -> f64 {
        match &self.data {
            StateData::Ket(v) => v.iter().map(|z| z.norm_sqr()).sum(),
            StateData::Density(rho) => rho.diag().iter().map(|z| z.re).sum(),
        }
    }

    /// Diagonal of the state in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Ket(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Density(rho) => rho.diag().iter().map(|z| z.re).collect(),
        }
    }

    /// Summed population of the highest Fock level `N−1` over both spins.
    pub fn top_fock_population(&self) -> f64 {
        let pops = self.populations();
        let top = self.spec.fock_cutoff() - 1;
        pops[self.spec.index(Spin::Ground, top)] + pops[self.spec.index(Spin::Excited, top)]
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.spec.dim();
        match &self.data {
            StateData::Ket(v) => {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    });
                }
                let norm = self.norm_or_trace();
                if (norm - 1.0).abs() > NORM_TOLERANCE {
                    return Err(Error::InvalidState(format!("‖ψ‖² = {norm}")));
                }
            }
            StateData::Density(rho) => {
                if rho.dim() != (d, d) {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: rho.nrows(),
                    });
                }
                let tr = self.norm_or_trace();
                if (tr - 1.0).abs() > NORM_TOLERANCE {
                    return Err(Error::InvalidState(format!("Tr ρ = {tr}")));
                }
                let scale = rho.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
                for i in 0..d {
                    for j in i..d {
                        if (rho[[i, j]] - rho[[j, i]].conj()).norm() > 1e-12 * scale.max(1.0) {
                            return Err(Error::InvalidState("ρ is not Hermitian".into()));
                        }
                    }
                }
                if !is_positive_semidefinite(rho, POSITIVITY_TOLERANCE) {
                    return Err(Error::InvalidState(format!(
                        "ρ has an eigenvalue below −{POSITIVITY_TOLERANCE:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        match &self.data {
            StateData::Ket(v) => {
                let mut out = String::new();
                for z in v {
                    let _ = writeln!(out, "{}", format_c64(z));
                }
                out
            }
            StateData::Density(rho) => Operator {
                spec: self.spec,
                entries: rho.clone(),
            }
            .to_text(),
        }
    }
}

/// True when every eigenvalue of the Hermitian matrix exceeds `−shift`.
///
/// Runs a Cholesky factorization of `ρ + shift·I`, which succeeds exactly when
/// the shifted matrix is positive definite.
pub fn is_positive_semidefinite(rho: &Array2<C64>, shift: f64) -> bool {
    let d = rho.nrows();
    let mut l: Array2<C64> = Array2::zeros((d, d));
    for j in 0..d {
        let mut diag = rho[[j, j]].re + shift;
        for k in 0..j {
            diag -= l[[j, k]].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let ljj = diag.sqrt();
        l[[j, j]] = C64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut s = rho[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / ljj;
        }
    }
    true
}

/// Largest mean phonon number accepted relative to the cutoff, `n̄ < N/4`.
pub const THERMAL_CUTOFF_FRACTION: f64 = 0.25;

/// Thermal phonon distribution on the truncated Fock factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    spec: HilbertSpec,
    n_bar: f64,
    probabilities: Vec<f64>,
}

impl ThermalState {
    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    /// Occupation probabilities `p_n`, renormalized over `0..N`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Fock-factor density matrix (N×N, diagonal).
    pub fn fock_density(&self) -> Array2<C64> {
        Array2::from_diag(&Array1::from_iter(
            self.probabilities.iter().map(|&p| C64::new(p, 0.0)),
        ))
    }

    /// `|s⟩⟨s| ⊗ ρ_n̄` on the full space.
    pub fn with_spin(&self, spin: Spin) -> QuantumState {
        let d = self.spec.dim();
        let mut rho = Array2::zeros((d, d));
        for (n, &p) in self.probabilities.iter().enumerate() {
            let k = self.spec.index(spin, n);
            rho[[k, k]] = C64::new(p, 0.0);
        }
        QuantumState::from_data(self.spec, StateData::Density(rho))
    }
}

/// Geometric (Bose-Einstein) phonon distribution `p_n ∝ n̄ⁿ/(1+n̄)ⁿ⁺¹`.
///
/// Rejects `n̄ ≥ N/4`, where the truncated tail would visibly distort the
/// distribution.
pub fn thermal_state(spec: HilbertSpec, n_bar: f64) -> Result<ThermalState> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(invalid(
            "n_bar",
            format!("must be finite and ≥ 0, got {n_bar}"),
        ));
    }
    let limit = THERMAL_CUTOFF_FRACTION * spec.fock_cutoff() as f64;
    if n_bar >= limit {
        return Err(invalid(
            "n_bar",
            format!("{n_bar} ≥ N/4 = {limit}; raise the Fock cutoff"),
        ));
    }
    let ratio = n_bar / (1.0 + n_bar);
    let mut probabilities: Vec<f64> = (0..spec.fock_cutoff())
        .scan(1.0 / (1.0 + n_bar), |p, _| {
            let current = *p;
            *p *= ratio;
            Some(current)
        })
        .collect();
    let z: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= z);
    Ok(ThermalState {
        spec,
        n_bar,
        probabilities,
    })
}

/// Spin populations `(P_g, P_e)` with the phonon mode traced out.
pub fn spin_populations(state: &QuantumState) -> (f64, f64) {
    let pops = state.populations();
    let n = state.spec().fock_cutoff();
    let p_g: f64 = pops[..n].iter().sum();
    let p_e: f64 = pops[n..].iter().sum();
    (p_g, p_e)
}

/// `⟨ψ|A|ψ⟩` for kets, `Tr(ρA)` for density matrices.
pub fn expectation(op: &Operator, state: &QuantumState) -> Result<C64> {
    if op.spec() != state.spec() {
        return Err(Error::DimensionMismatch {
            expected: op.spec().dim(),
            found: state.spec().dim(),
        });
    }
    let a = op.matrix();
    Ok(match state.data() {
        StateData::Ket(v) => {
            let av = a.dot(v);
            v.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum()
        }
        StateData::Density(rho) => {
            let d = rho.nrows();
            let mut tr = ZERO;
            for i in 0..d {
                for k in 0..d {
                    tr += rho[[i, k]] * a[[k, i]];
                }
            }
            tr
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(n: usize) -> HilbertSpec {
        HilbertSpec::new(n).unwrap()
    }

    #[test]
    fn rejects_empty_fock_space() {
        assert!(HilbertSpec::new(0).is_err());
    }

    #[test]
    fn ladder_matrix_elements() {
        let s = spec(2);
        let (b, b_dag) = ladder_ops(s);
        assert_eq!(b.element((Spin::Ground, 0), (Spin::Ground, 1)), ONE);
        assert_eq!(b.element((Spin::Excited, 0), (Spin::Excited, 1)), ONE);
        let nonzero = b.matrix().iter().filter(|z| z.norm() > 0.0).count();
        // one entry per spin block
        assert_eq!(nonzero, 2);
        assert_eq!(b_dag, b.adjoint());

        let s = spec(4);
        let (b, _) = ladder_ops(s);
        assert_abs_diff_eq!(
            b.element((Spin::Ground, 2), (Spin::Ground, 3)).re,
            1.7320508075688772,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ladder_commutator_truncation_defect() {
        let s = spec(4);
        let (b, b_dag) = ladder_ops(s);
        let comm = b.commutator(&b_dag);
        for spin in [Spin::Ground, Spin::Excited] {
            for n in 0..3 {
                let k = s.index(spin, n);
                assert!((comm.get(k, k) - ONE).norm() < 1e-14);
            }
            let top = s.index(spin, 3);
            assert!((comm.get(top, top) - C64::new(-3.0, 0.0)).norm() < 1e-14);
        }
        let off: f64 = comm
            .matrix()
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, z)| z.norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn pauli_algebra() {
        let s = spec(3);
        let ops = spin_ops(s);
        let id = Operator::identity(s);
        assert_eq!(ops.sigma_x.dot(&ops.sigma_x), id);

        let g0 = QuantumState::basis(s, Spin::Ground, 0).unwrap();
        let raised = ops.sigma_plus.apply(g0.as_ket().unwrap());
        let e0 = QuantumState::basis(s, Spin::Excited, 0).unwrap();
        assert_eq!(&raised, e0.as_ket().unwrap());

        let c_plus = ops.sigma_z.commutator(&ops.sigma_plus);
        assert_eq!(c_plus, ops.sigma_plus.scale(C64::new(2.0, 0.0)));
        let c_minus = ops.sigma_z.commutator(&ops.sigma_minus);
        assert_eq!(c_minus, ops.sigma_minus.scale(C64::new(-2.0, 0.0)));

        assert_eq!(expectation(&ops.sigma_z, &g0).unwrap(), -ONE);
        assert_eq!(expectation(&ops.sigma_z, &e0).unwrap(), ONE);
    }

    #[test]
    fn thermal_distribution() {
        let s = spec(8);
        let zero = thermal_state(s, 0.0).unwrap();
        assert_eq!(zero.probabilities()[0], 1.0);
        assert!(zero.probabilities()[1..].iter().all(|&p| p == 0.0));

        // Oracle: explicit geometric weights and their normalization sum.
        let n_bar: f64 = 0.05;
        let raw: Vec<f64> = (0..8)
            .map(|n| n_bar.powi(n) / (1.0 + n_bar).powi(n + 1))
            .collect();
        let z: f64 = raw.iter().sum();
        let th = thermal_state(s, n_bar).unwrap();
        assert_abs_diff_eq!(th.probabilities()[0], (1.0 / 1.05) / z, epsilon = 1e-15);
        assert_abs_diff_eq!(th.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-15);

        let th = thermal_state(spec(30), 1.0).unwrap();
        assert_abs_diff_eq!(th.probabilities()[0], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(th.probabilities()[1], 0.25, epsilon = 1e-8);
    }

    #[test]
    fn thermal_rejects_heavy_tail() {
        assert!(thermal_state(spec(8), 2.0).is_err());
        assert!(thermal_state(spec(8), 1.99).is_ok());
        assert!(thermal_state(spec(8), -0.1).is_err());
    }

    #[test]
    fn thermal_mean_number() {
        let s = spec(12);
        let rho = thermal_state(s, 0.05).unwrap().with_spin(Spin::Ground);
        rho.validate().unwrap();
        let n = expectation(&number_op(s), &rho).unwrap();
        assert_abs_diff_eq!(n.re, 0.05, epsilon = 1e-6);
        assert!(n.im.abs() < 1e-15);

        // Convergence in the cutoff.
        let n2 = expectation(
            &number_op(spec(24)),
            &thermal_state(spec(24), 0.05)
                .unwrap()
                .with_spin(Spin::Ground),
        )
        .unwrap();
        assert!((n.re - n2.re).abs() < 1e-8);
    }

    #[test]
    fn populations_of_simple_states() {
        let s = spec(4);
        let g0 = QuantumState::basis(s, Spin::Ground, 0).unwrap();
        assert_eq!(spin_populations(&g0), (1.0, 0.0));

        let mut v = Array1::zeros(s.dim());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        v[s.index(Spin::Ground, 0)] = C64::new(h, 0.0);
        v[s.index(Spin::Excited, 1)] = C64::new(h, 0.0);
        let sup = QuantumState::ket(s, v).unwrap();
        let (pg, pe) = spin_populations(&sup);
        assert_abs_diff_eq!(pg, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pe, 0.5, epsilon = 1e-15);

        let mut rho = Array2::zeros((s.dim(), s.dim()));
        rho[[s.index(Spin::Ground, 0), s.index(Spin::Ground, 0)]] = C64::new(0.5, 0.0);
        rho[[s.index(Spin::Excited, 3), s.index(Spin::Excited, 3)]] = C64::new(0.5, 0.0);
        let mixed = QuantumState::density(s, rho).unwrap();
        assert_eq!(spin_populations(&mixed), (0.5, 0.5));

        let g1 = QuantumState::basis(s, Spin::Ground, 1).unwrap();
        assert_eq!(expectation(&number_op(s), &g1).unwrap(), ONE);
    }

    #[test]
    fn state_validation() {
        let s = spec(2);
        assert!(QuantumState::ket(s, Array1::zeros(s.dim())).is_err());
        let mut rho = Array2::zeros((4, 4));
        rho[[0, 0]] = C64::new(1.5, 0.0);
        rho[[1, 1]] = C64::new(-0.5, 0.0);
        assert!(QuantumState::density(s, rho).is_err());
        assert!(expectation(
            &Operator::identity(spec(3)),
            &QuantumState::basis(s, Spin::Ground, 0).unwrap()
        )
        .is_err());
    }

    #[test]
    fn text_dump_round_trips() {
        let s = spec(3);
        let (b, _) = ladder_ops(s);
        let h = &spin_ops(s).sigma_x.dot(&b) * 0.3;
        let parsed = Operator::from_text(s, &h.to_text()).unwrap();
        assert_eq!(parsed, h);
    }
}
