//! Truncated Fock-space value types and basis operations.
//!
//! Amplitude conventions: all Fock amplitudes are dimensionless, with a
//! phase-space point `(q, p)` mapping to the coherent label
//! `alpha = (q + i p) / sqrt(2 hbar)`. Per-mode cutoffs come from the
//! Poisson tail rule: the smallest `N` whose tail mass falls below the
//! requested tolerance. Everything here is an immutable value; operations
//! are pure and safe to evaluate concurrently.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on any single-mode cutoff. Constructions that would need
/// more Fock levels than this fail with a resource error instead of
/// allocating unbounded tables.
pub const HARD_CUTOFF_LIMIT: usize = 4096;

/// Physical constants of the two-mode model: common mode frequency, the
/// photon-exchange coupling, the Kerr constant and the action quantum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub omega0: f64,
    pub lambda: f64,
    pub g: f64,
    pub hbar: f64,
}

impl ModelParams {
    pub fn new(omega0: f64, lambda: f64, g: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [
            ("omega0", omega0),
            ("lambda", lambda),
            ("g", g),
            ("hbar", hbar),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if omega0 < 0.0 || lambda < 0.0 || g < 0.0 {
            return Err(Error::invalid(
                "omega0, lambda and g must be non-negative".to_string(),
            ));
        }
        if hbar <= 0.0 {
            return Err(Error::invalid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(ModelParams {
            omega0,
            lambda,
            g,
            hbar,
        })
    }

    /// Frequency of the nonlinear term, `omega_g = hbar * g`. Always
    /// recomputed from the stored constants.
    pub fn omega_g(&self) -> f64 {
        self.hbar * self.g
    }
}

/// A point in a single mode's quadrature plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !q.is_finite() || !p.is_finite() {
            return Err(Error::invalid(format!(
                "phase point components must be finite, got ({q}, {p})"
            )));
        }
        Ok(PhasePoint { q, p })
    }

    /// Dimensionless coherent label `(q + i p) / sqrt(2 hbar)`.
    pub fn alpha(&self, hbar: f64) -> C64 {
        C64::new(self.q, self.p) / (2.0 * hbar).sqrt()
    }

    /// Phase-space action `q^2 + p^2` carried by this mode.
    pub fn action(&self) -> f64 {
        self.q * self.q + self.p * self.p
    }
}

/// Which of the two modes an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    One,
    Two,
}

/// Complex amplitudes of a single mode over Fock levels `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeAmplitudes {
    amps: Vec<C64>,
}

impl SingleModeAmplitudes {
    /// Wraps a raw amplitude vector. The squared norm may fall below one
    /// (truncation) but must not exceed it beyond rounding.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("amplitude vector must be non-empty"));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "single-mode norm^2 = {norm_sq} exceeds 1"
            )));
        }
        Ok(SingleModeAmplitudes { amps })
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Smallest `N` such that the Poisson(`mu`) tail mass beyond `N` is below
/// `tail_tol`.
pub fn poisson_cutoff(mu: f64, tail_tol: f64) -> Result<usize> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::invalid(format!(
            "tail_tol must lie in (0, 1), got {tail_tol}"
        )));
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::invalid(format!(
            "Poisson mean must be finite and non-negative, got {mu}"
        )));
    }
    if mu == 0.0 {
        return Ok(0);
    }
    let mut term = (-mu).exp();
    let mut cum = term;
    let mut n = 0usize;
    while 1.0 - cum >= tail_tol {
        n += 1;
        if n > HARD_CUTOFF_LIMIT {
            return Err(Error::resource(
                "fock",
                format!("Poisson cutoff for mean {mu} exceeds {HARD_CUTOFF_LIMIT}"),
            ));
        }
        term *= mu / n as f64;
        cum += term;
    }
    Ok(n)
}

/// Coherent-state Fock amplitudes `e^{-|alpha|^2/2} alpha^n / sqrt(n!)`,
/// truncated by the Poisson tail rule. Amplitude magnitudes are evaluated
/// in log space so large `|alpha|` stays finite.
pub fn coherent_amplitudes(alpha: C64, tail_tol: f64) -> Result<SingleModeAmplitudes> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    let mu = alpha.norm_sqr();
    let cutoff = poisson_cutoff(mu, tail_tol)?;
    Ok(SingleModeAmplitudes {
        amps: coherent_amplitudes_fixed(alpha, cutoff),
    })
}

/// Coherent amplitudes over an externally chosen cutoff.
pub(crate) fn coherent_amplitudes_fixed(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mu = alpha.norm_sqr();
    if mu == 0.0 {
        amps.push(C64::new(1.0, 0.0));
        amps.resize(cutoff + 1, C64::new(0.0, 0.0));
        return amps;
    }
    let ln_mod_alpha = alpha.norm().ln();
    let arg = alpha.arg();
    let mut ln_fact = 0.0;
    for n in 0..=cutoff {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_mod = -0.5 * mu + n as f64 * ln_mod_alpha - 0.5 * ln_fact;
        amps.push(C64::from_polar(ln_mod.exp(), n as f64 * arg));
    }
    amps
}

/// Two-mode amplitude table over the truncated basis `|n, m>`,
/// `n <= cutoff1`, `m <= cutoff2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amps: Array2<C64>,
    norm_deficit: f64,
}

impl TwoModeState {
    /// Wraps an amplitude table, recording the truncation deficit
    /// `1 - sum |amps|^2`. Tiny negative deficits from rounding clamp to
    /// zero; a genuinely super-normalized table is rejected.
    pub fn from_amplitudes(amps: Array2<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("amplitude table must be non-empty"));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 1.0 + 1e-10 {
            return Err(Error::invalid(format!(
                "two-mode norm^2 = {norm_sq} exceeds 1"
            )));
        }
        Ok(TwoModeState {
            amps,
            norm_deficit: (1.0 - norm_sq).max(0.0),
        })
    }

    pub fn cutoff1(&self) -> usize {
        self.amps.nrows() - 1
    }

    pub fn cutoff2(&self) -> usize {
        self.amps.ncols() - 1
    }

    pub fn amplitudes(&self) -> &Array2<C64> {
        &self.amps
    }

    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    /// Expectation of the total photon number over the truncated table.
    pub fn mean_total_number(&self) -> f64 {
        self.amps
            .indexed_iter()
            .map(|((n, m), a)| (n + m) as f64 * a.norm_sqr())
            .sum()
    }

    /// Expectation of one mode's photon number.
    pub fn mean_occupation(&self, mode: Mode) -> f64 {
        self.amps
            .indexed_iter()
            .map(|((n, m), a)| {
                let k = match mode {
                    Mode::One => n,
                    Mode::Two => m,
                };
                k as f64 * a.norm_sqr()
            })
            .sum()
    }
}

/// Product state `a (x) b`: `amps[n][m] = a[n] b[m]`.
pub fn tensor_product(a: &SingleModeAmplitudes, b: &SingleModeAmplitudes) -> TwoModeState {
    let (na, nb) = (a.amps.len(), b.amps.len());
    let mut amps = Array2::zeros((na, nb));
    for (n, &an) in a.amps.iter().enumerate() {
        for (m, &bm) in b.amps.iter().enumerate() {
            amps[(n, m)] = an * bm;
        }
    }
    let norm_sq: f64 = a.norm_sq() * b.norm_sq();
    TwoModeState {
        amps,
        norm_deficit: (1.0 - norm_sq).max(0.0),
    }
}

/// Hermitian single-mode density matrix in the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    rho: Array2<C64>,
}

impl ReducedDensity {
    /// Wraps a Hermitian matrix, enforcing `rho = rho^dagger` within 1e-12.
    pub fn from_matrix(rho: Array2<C64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.is_empty() {
            return Err(Error::invalid("density matrix must be square"));
        }
        let mut max_dev: f64 = 0.0;
        for n in 0..rho.nrows() {
            for m in n..rho.ncols() {
                max_dev = max_dev.max((rho[(n, m)] - rho[(m, n)].conj()).norm());
            }
        }
        if max_dev > 1e-12 {
            return Err(Error::numerical(
                "fock",
                format!("density matrix deviates from Hermiticity by {max_dev:.3e}"),
            ));
        }
        Ok(ReducedDensity { rho })
    }

    pub fn cutoff(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        (0..self.rho.nrows()).map(|n| self.rho[(n, n)].re).sum()
    }

    /// Occupation of the last retained Fock level; large values flag a
    /// cutoff chosen too small for moment computations.
    pub fn boundary_occupation(&self) -> f64 {
        let d = self.rho.nrows() - 1;
        self.rho[(d, d)].re
    }

    /// Copy into a larger cutoff, zero-filling the new levels.
    pub fn pad_to(&self, cutoff: usize) -> ReducedDensity {
        let d = self.rho.nrows();
        if cutoff + 1 <= d {
            return self.clone();
        }
        let mut rho = Array2::zeros((cutoff + 1, cutoff + 1));
        rho.slice_mut(ndarray::s![..d, ..d]).assign(&self.rho);
        ReducedDensity { rho }
    }
}

/// Trace out one mode of a pure two-mode state, keeping `keep`.
pub fn partial_trace(state: &TwoModeState, keep: Mode) -> ReducedDensity {
    let a = &state.amps;
    let rho = match keep {
        // rho[n][m] = sum_k a[n][k] conj(a[m][k])
        Mode::One => {
            let d = a.nrows();
            let mut rho = Array2::zeros((d, d));
            for n in 0..d {
                for m in 0..=n {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..a.ncols() {
                        acc += a[(n, k)] * a[(m, k)].conj();
                    }
                    rho[(n, m)] = acc;
                    rho[(m, n)] = acc.conj();
                }
            }
            rho
        }
        Mode::Two => {
            let d = a.ncols();
            let mut rho = Array2::zeros((d, d));
            for n in 0..d {
                for m in 0..=n {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..a.nrows() {
                        acc += a[(k, n)] * a[(k, m)].conj();
                    }
                    rho[(n, m)] = acc;
                    rho[(m, n)] = acc.conj();
                }
            }
            rho
        }
    };
    ReducedDensity { rho }
}

/// Overlap magnitude `|<a|b>|`, invariant under global phases. States with
/// different cutoffs are compared on the common zero-padded table.
pub fn fidelity(a: &TwoModeState, b: &TwoModeState) -> f64 {
    let rows = a.amps.nrows().min(b.amps.nrows());
    let cols = a.amps.ncols().min(b.amps.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..rows {
        for m in 0..cols {
            acc += a.amps[(n, m)].conj() * b.amps[(n, m)];
        }
    }
    acc.norm()
}

/// Single-mode operators available as dense matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeOperator {
    Annihilation,
    Creation,
    /// Position quadrature `sqrt(hbar/2) (a + a^dagger)`.
    Q,
    /// Momentum quadrature `-i sqrt(hbar/2) (a - a^dagger)`.
    P,
}

/// Dense matrix of a ladder or quadrature operator on levels `0..=cutoff`.
pub fn mode_operator_matrix(kind: ModeOperator, cutoff: usize, hbar: f64) -> Array2<C64> {
    let d = cutoff + 1;
    let mut out = Array2::zeros((d, d));
    let scale = (hbar / 2.0).sqrt();
    for n in 0..cutoff {
        let elem = ((n + 1) as f64).sqrt();
        match kind {
            // <n| a |n+1> = sqrt(n+1)
            ModeOperator::Annihilation => out[(n, n + 1)] = C64::new(elem, 0.0),
            ModeOperator::Creation => out[(n + 1, n)] = C64::new(elem, 0.0),
            ModeOperator::Q => {
                out[(n, n + 1)] = C64::new(scale * elem, 0.0);
                out[(n + 1, n)] = C64::new(scale * elem, 0.0);
            }
            ModeOperator::P => {
                out[(n, n + 1)] = C64::new(0.0, -scale * elem);
                out[(n + 1, n)] = C64::new(0.0, scale * elem);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn model_params_rejects_bad_values() {
        assert!(ModelParams::new(1.0, 0.2, 0.1, 1.0).is_ok());
        assert!(ModelParams::new(-1.0, 0.2, 0.1, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.2, 0.1, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.2, 0.1, 1.0).is_err());
    }

    #[test]
    fn omega_g_is_derived() {
        let p = ModelParams::new(1.0, 0.2, 0.25, 0.5).unwrap();
        assert_eq!(p.omega_g(), 0.125);
    }

    #[test]
    fn vacuum_coherent_amplitudes() {
        let a = coherent_amplitudes(C64::new(0.0, 0.0), 1e-12).unwrap();
        assert_eq!(a.cutoff(), 0);
        assert_eq!(a.amplitudes()[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn coherent_unit_alpha_ground_amplitude() {
        // direct evaluation of e^{-|alpha|^2/2} alpha^n / sqrt(n!)
        let a = coherent_amplitudes(C64::new(1.0, 0.0), 1e-12).unwrap();
        assert_relative_eq!(a.amplitudes()[0].re, (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(a.amplitudes()[1].re, (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(
            a.amplitudes()[3].re,
            (-0.5f64).exp() / 6.0f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(a.norm_sq() > 1.0 - 1e-12);
    }

    #[test]
    fn coherent_two_i_is_poisson_mean_four() {
        let a = coherent_amplitudes(C64::new(0.0, 2.0), 1e-12).unwrap();
        let probs: Vec<f64> = a.amplitudes().iter().map(|c| c.norm_sqr()).collect();
        // Poisson(4) mode is tied between n = 3 and n = 4.
        assert_relative_eq!(probs[3], probs[4], epsilon = 1e-15);
        for (n, &p) in probs.iter().enumerate() {
            if n != 3 && n != 4 {
                assert!(p < probs[3]);
            }
        }
        // direct pmf check at n = 2: e^{-4} 4^2 / 2!
        assert_relative_eq!(probs[2], (-4.0f64).exp() * 8.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_rejects_non_finite() {
        assert!(coherent_amplitudes(C64::new(f64::INFINITY, 0.0), 1e-12).is_err());
        assert!(coherent_amplitudes(C64::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn tensor_product_of_vacua() {
        let v = coherent_amplitudes(C64::new(0.0, 0.0), 1e-12).unwrap();
        let s = tensor_product(&v, &v);
        assert_eq!(s.amplitudes()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(s.norm_deficit(), 0.0);
    }

    #[test]
    fn tensor_product_number_states() {
        // |1> (x) |0>
        let one = SingleModeAmplitudes::from_amplitudes(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ])
        .unwrap();
        let zero = SingleModeAmplitudes::from_amplitudes(vec![C64::new(1.0, 0.0)]).unwrap();
        let s = tensor_product(&one, &zero);
        assert_eq!(s.amplitudes()[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(s.amplitudes()[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn tensor_product_coherent_closed_form() {
        let a = coherent_amplitudes(C64::new(1.0, 0.0), 1e-12).unwrap();
        let s = tensor_product(&a, &a);
        // amps[n][m] = e^{-1} / sqrt(n! m!)
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        for n in 0..4 {
            for m in 0..4 {
                assert_relative_eq!(
                    s.amplitudes()[(n, m)].re,
                    (-1.0f64).exp() / (fact(n) * fact(m)).sqrt(),
                    epsilon = 1e-14
                );
            }
        }
        assert!(s.norm_deficit() <= 2e-12 + 1e-14);
    }

    #[test]
    fn partial_trace_bell_like() {
        // (|0,1> + |1,0>) / sqrt(2)
        let mut amps = Array2::zeros((2, 2));
        let r = 1.0 / 2.0f64.sqrt();
        amps[(0, 1)] = C64::new(r, 0.0);
        amps[(1, 0)] = C64::new(r, 0.0);
        let state = TwoModeState::from_amplitudes(amps).unwrap();
        for keep in [Mode::One, Mode::Two] {
            let rho = partial_trace(&state, keep);
            assert_relative_eq!(rho.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
            assert_relative_eq!(rho.matrix()[(1, 1)].re, 0.5, epsilon = 1e-15);
            assert_eq!(rho.matrix()[(0, 1)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn partial_trace_product_state_is_pure() {
        let a = coherent_amplitudes(C64::new(0.7, -0.3), 1e-12).unwrap();
        let b = coherent_amplitudes(C64::new(-0.2, 1.1), 1e-12).unwrap();
        let s = tensor_product(&a, &b);
        let rho = partial_trace(&s, Mode::One);
        let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(purity, 1.0, epsilon = 1e-10);
        assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fidelity_basics() {
        let one_zero = {
            let mut amps = Array2::zeros((2, 2));
            amps[(1, 0)] = C64::new(1.0, 0.0);
            TwoModeState::from_amplitudes(amps).unwrap()
        };
        let zero_one = {
            let mut amps = Array2::zeros((2, 2));
            amps[(0, 1)] = C64::new(1.0, 0.0);
            TwoModeState::from_amplitudes(amps).unwrap()
        };
        assert_eq!(fidelity(&one_zero, &zero_one), 0.0);
        assert_relative_eq!(fidelity(&one_zero, &one_zero), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ladder_matrix_elements() {
        let a = mode_operator_matrix(ModeOperator::Annihilation, 2, 1.0);
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert_relative_eq!(a[(1, 2)].re, 2.0f64.sqrt(), epsilon = 1e-15);
        assert_eq!(a[(1, 0)], C64::new(0.0, 0.0));

        let q = mode_operator_matrix(ModeOperator::Q, 2, 1.0);
        assert_relative_eq!(q[(0, 1)].re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(q[(1, 0)].re, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn truncated_commutator_is_identity_on_interior() {
        let cutoff = 6;
        let a = mode_operator_matrix(ModeOperator::Annihilation, cutoff, 1.0);
        let adag = mode_operator_matrix(ModeOperator::Creation, cutoff, 1.0);
        let comm = a.dot(&adag) - adag.dot(&a);
        for n in 0..cutoff {
            for m in 0..cutoff {
                let expect = if n == m { 1.0 } else { 0.0 };
                assert_relative_eq!(comm[(n, m)].re, expect, epsilon = 1e-13);
                assert_relative_eq!(comm[(n, m)].im, 0.0, epsilon = 1e-13);
            }
        }
        // truncation corrupts the last diagonal entry
        assert_relative_eq!(comm[(cutoff, cutoff)].re, -(cutoff as f64), epsilon = 1e-12);
    }

    #[test]
    fn reduced_density_rejects_non_hermitian() {
        let mut rho = Array2::zeros((2, 2));
        rho[(0, 1)] = C64::new(0.3, 0.0);
        rho[(1, 0)] = C64::new(0.1, 0.0);
        assert!(ReducedDensity::from_matrix(rho).is_err());
    }
}
