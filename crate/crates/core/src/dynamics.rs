//! Closed-form time evolution for the two soluble initial families.
//!
//! Number products evolve under the exchange coupling alone (the nonlinear
//! term contributes only a global phase); coherent products pick up the
//! Kerr phase `e^{-i hbar g t (n+m)^2}` on rotated coherent labels. Global
//! phases are omitted throughout: every phase-sensitive observable exposed
//! by this crate is derived from this one convention, and state comparisons
//! go through the phase-invariant fidelity.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    coherent_amplitudes_fixed, poisson_cutoff, Mode, ModelParams, PhasePoint, ReducedDensity,
    TwoModeState, HARD_CUTOFF_LIMIT,
};
use crate::math::{ln_binomial, ln_factorials};

/// Initially disentangled number states `|n1, n2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NumberProduct {
    pub n1: usize,
    pub n2: usize,
}

impl NumberProduct {
    pub fn new(n1: usize, n2: usize) -> Self {
        NumberProduct { n1, n2 }
    }

    /// Conserved total photon number.
    pub fn total(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Initially disentangled product of two coherent states, specified by a
/// phase-space point per mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentProduct {
    pub mode1: PhasePoint,
    pub mode2: PhasePoint,
}

impl CoherentProduct {
    pub fn new(mode1: PhasePoint, mode2: PhasePoint) -> Self {
        CoherentProduct { mode1, mode2 }
    }

    /// Dimensionless coherent labels of both modes.
    pub fn alphas(&self, hbar: f64) -> (C64, C64) {
        (self.mode1.alpha(hbar), self.mode2.alpha(hbar))
    }

    /// Characteristic phase-space action `Lambda = sum_k (q_k^2 + p_k^2)`.
    pub fn lambda_action(&self) -> f64 {
        self.mode1.action() + self.mode2.action()
    }

    /// Total mean photon number `Lambda / (2 hbar)`.
    pub fn mean_total_number(&self, hbar: f64) -> f64 {
        self.lambda_action() / (2.0 * hbar)
    }

    /// The quadrature combination `q1 q2 + p1 p2` whose vanishing admits
    /// the extra exchange-driven disentanglement instants.
    pub fn orthogonality_defect(&self) -> f64 {
        self.mode1.q * self.mode2.q + self.mode1.p * self.mode2.p
    }
}

/// Coefficients connecting the bare-mode number basis to the basis of the
/// normal modes that diagonalize the exchange coupling.
#[derive(Debug, Clone)]
pub struct BasisChangeTable {
    pub n1: usize,
    pub n2: usize,
    /// `coeffs[(i, j)]` for `i <= n1`, `j <= n2`; all real.
    pub coeffs: Array2<f64>,
}

impl BasisChangeTable {
    /// Amplitude on the normal-mode ket with `k` quanta in the second
    /// normal mode, obtained by collecting all `(i, j)` with `i + j = k`.
    pub fn induced_amplitudes(&self) -> Vec<f64> {
        let total = self.n1 + self.n2;
        let mut out = vec![0.0; total + 1];
        for ((i, j), &c) in self.coeffs.indexed_iter() {
            out[i + j] += c;
        }
        out
    }
}

/// Basis-change coefficients
/// `c_{i,j} = (-1)^j C(n1,i) C(n2,j) sqrt((N-(i+j))! (i+j)! / (2^N n1! n2!))`,
/// evaluated in log space.
pub fn basis_change_coeffs(n1: usize, n2: usize) -> BasisChangeTable {
    let total = n1 + n2;
    let lf = ln_factorials(total.max(1));
    let ln2 = std::f64::consts::LN_2;
    let mut coeffs = Array2::zeros((n1 + 1, n2 + 1));
    for i in 0..=n1 {
        for j in 0..=n2 {
            let k = i + j;
            let ln_mod = ln_binomial(&lf, n1, i)
                + ln_binomial(&lf, n2, j)
                + 0.5 * (lf[total - k] + lf[k] - total as f64 * ln2 - lf[n1] - lf[n2]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[(i, j)] = sign * ln_mod.exp();
        }
    }
    BasisChangeTable { n1, n2, coeffs }
}

/// Evolve `|n1, n2>` for time `t`. The result is the binomial expansion of
/// the two dressed creation-operator factors
/// `(cos(lt) a1^+ - i sin(lt) a2^+)^{n1} (cos(lt) a2^+ - i sin(lt) a1^+)^{n2} |0,0>`,
/// supported entirely on `n + m = n1 + n2`; the global phase is omitted.
pub fn evolve_number_product(init: &NumberProduct, params: &ModelParams, t: f64) -> TwoModeState {
    let (n1, n2) = (init.n1, init.n2);
    let total = n1 + n2;
    let lf = ln_factorials(total.max(1));
    let c = C64::new((params.lambda * t).cos(), 0.0);
    let s = C64::new(0.0, -(params.lambda * t).sin()); // -i sin(lambda t)

    let mut c_pows = vec![C64::new(1.0, 0.0); total + 1];
    let mut s_pows = vec![C64::new(1.0, 0.0); total + 1];
    for k in 1..=total {
        c_pows[k] = c_pows[k - 1] * c;
        s_pows[k] = s_pows[k - 1] * s;
    }

    let mut amps = Array2::zeros((total + 1, total + 1));
    for r in 0..=n1 {
        for w in 0..=n2 {
            // r creations land in mode 1 from the first factor, w in mode 2
            // from the second; the cross terms fill the rest.
            let n = r + n2 - w;
            let m = n1 - r + w;
            let ln_mod = ln_binomial(&lf, n1, r) + ln_binomial(&lf, n2, w)
                + 0.5 * (lf[n] + lf[m] - lf[n1] - lf[n2]);
            amps[(n, m)] += c_pows[r + w] * s_pows[total - r - w] * ln_mod.exp();
        }
    }
    TwoModeState::from_amplitudes(amps).expect("number evolution preserves the norm")
}

/// Rotated coherent labels
/// `beta1(t) = (a1 cos(lt) - i a2 sin(lt)) e^{-i w0 t}` and the mirrored
/// expression for mode 2, in the dimensionless convention.
pub fn beta_t(init: &CoherentProduct, params: &ModelParams, t: f64) -> (C64, C64) {
    let (a1, a2) = init.alphas(params.hbar);
    let c = (params.lambda * t).cos();
    let s = (params.lambda * t).sin();
    let rot = C64::from_polar(1.0, -params.omega0 * t);
    let i = C64::new(0.0, 1.0);
    ((a1 * c - i * a2 * s) * rot, (a2 * c - i * a1 * s) * rot)
}

/// Kerr-dressed labels `gamma_k = beta_k(t) e^{-2 i g hbar t}` entering the
/// evolved coherent-product state.
pub fn gamma_t(init: &CoherentProduct, params: &ModelParams, t: f64) -> (C64, C64) {
    let (b1, b2) = beta_t(init, params, t);
    let twist = C64::from_polar(1.0, -2.0 * params.g * params.hbar * t);
    (b1 * twist, b2 * twist)
}

/// Evolve a coherent product for time `t`:
/// `amps[n][m] = c_n(gamma1) c_m(gamma2) e^{-i hbar g t (n+m)^2}`
/// with per-mode cutoffs from the Poisson tail rule. Global phase omitted.
pub fn evolve_coherent_product(
    init: &CoherentProduct,
    params: &ModelParams,
    t: f64,
    tail_tol: f64,
) -> Result<TwoModeState> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    let (g1, g2) = gamma_t(init, params, t);
    let cut1 = poisson_cutoff(g1.norm_sqr(), tail_tol)?;
    let cut2 = poisson_cutoff(g2.norm_sqr(), tail_tol)?;
    if cut1 > HARD_CUTOFF_LIMIT || cut2 > HARD_CUTOFF_LIMIT {
        return Err(Error::resource(
            "dynamics",
            format!("cutoffs ({cut1}, {cut2}) exceed the hard limit {HARD_CUTOFF_LIMIT}"),
        ));
    }
    let c1 = coherent_amplitudes_fixed(g1, cut1);
    let c2 = coherent_amplitudes_fixed(g2, cut2);
    let theta = params.omega_g() * t;
    let mut amps = Array2::zeros((cut1 + 1, cut2 + 1));
    for (n, &cn) in c1.iter().enumerate() {
        for (m, &cm) in c2.iter().enumerate() {
            let total_sq = ((n + m) * (n + m)) as f64;
            amps[(n, m)] = cn * cm * C64::from_polar(1.0, -theta * total_sq);
        }
    }
    TwoModeState::from_amplitudes(amps)
}

/// Closed-form reduced density operator of the kept mode at time `t`:
/// `rho[n][m] = c_n(g_keep) conj(c_m(g_keep)) e^{-i hbar g t (n^2 - m^2)}
///  e^{-|g_other|^2} exp(|g_other|^2 e^{-2 i hbar g t (n - m)})`,
/// the result of summing the traced mode exactly. Agrees with
/// `partial_trace(evolve_coherent_product(..))` up to truncation.
pub fn reduced_density_coherent(
    init: &CoherentProduct,
    params: &ModelParams,
    t: f64,
    keep: Mode,
    tail_tol: f64,
) -> Result<ReducedDensity> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    let (g1, g2) = gamma_t(init, params, t);
    let (g_keep, g_other) = match keep {
        Mode::One => (g1, g2),
        Mode::Two => (g2, g1),
    };
    let cut = poisson_cutoff(g_keep.norm_sqr(), tail_tol)?;
    let c = coherent_amplitudes_fixed(g_keep, cut);
    let x_other = g_other.norm_sqr();
    let theta = params.omega_g() * t;
    let d = cut + 1;
    let mut rho = Array2::zeros((d, d));
    for n in 0..d {
        for m in 0..=n {
            let kerr = C64::from_polar(1.0, -theta * ((n * n) as f64 - (m * m) as f64));
            let drift = C64::from_polar(1.0, -2.0 * theta * (n as f64 - m as f64));
            let env = ((drift - 1.0) * x_other).exp();
            let val = c[n] * c[m].conj() * kerr * env;
            rho[(n, m)] = val;
            rho[(m, n)] = val.conj();
        }
    }
    ReducedDensity::from_matrix(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, partial_trace};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(omega0: f64, lambda: f64, g: f64, hbar: f64) -> ModelParams {
        ModelParams::new(omega0, lambda, g, hbar).unwrap()
    }

    fn coherent_qp(q1: f64, p1: f64, q2: f64, p2: f64) -> CoherentProduct {
        CoherentProduct::new(
            PhasePoint::new(q1, p1).unwrap(),
            PhasePoint::new(q2, p2).unwrap(),
        )
    }

    #[test]
    fn basis_change_one_zero() {
        let table = basis_change_coeffs(1, 0);
        let r = 0.5f64.sqrt();
        assert_relative_eq!(table.coeffs[(0, 0)], r, epsilon = 1e-15);
        assert_relative_eq!(table.coeffs[(1, 0)], r, epsilon = 1e-15);
    }

    #[test]
    fn basis_change_zero_one_has_sign() {
        let table = basis_change_coeffs(0, 1);
        let r = 0.5f64.sqrt();
        assert_relative_eq!(table.coeffs[(0, 0)], r, epsilon = 1e-15);
        assert_relative_eq!(table.coeffs[(0, 1)], -r, epsilon = 1e-15);
    }

    #[test]
    fn basis_change_induced_norm_is_unit() {
        for (n1, n2) in [(1, 0), (2, 1), (3, 3), (5, 2), (8, 4)] {
            let induced = basis_change_coeffs(n1, n2).induced_amplitudes();
            let norm: f64 = induced.iter().map(|d| d * d).sum();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        }
        // The alternating binomial sums cancel heavily at large totals;
        // unit norm survives, at reduced floating-point accuracy.
        for (n1, n2) in [(12, 9), (40, 25)] {
            let induced = basis_change_coeffs(n1, n2).induced_amplitudes();
            let norm: f64 = induced.iter().map(|d| d * d).sum();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn number_evolution_quarter_period_swap_amplitudes() {
        let p = params(0.0, 1.0, 0.0, 1.0);
        let state = evolve_number_product(&NumberProduct::new(1, 0), &p, PI / 4.0);
        let r = 0.5f64.sqrt();
        let amps = state.amplitudes();
        assert_relative_eq!(amps[(1, 0)].re, r, epsilon = 1e-14);
        assert_relative_eq!(amps[(1, 0)].im, 0.0, epsilon = 1e-14);
        assert_relative_eq!(amps[(0, 1)].re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(amps[(0, 1)].im, -r, epsilon = 1e-14);
    }

    #[test]
    fn number_evolution_swap_two_one() {
        let p = params(0.0, 1.0, 0.0, 1.0);
        let state = evolve_number_product(&NumberProduct::new(2, 1), &p, PI / 2.0);
        let mut expect = Array2::zeros((4, 4));
        expect[(1, 2)] = C64::new(1.0, 0.0);
        let target = TwoModeState::from_amplitudes(expect).unwrap();
        assert_relative_eq!(fidelity(&state, &target), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn number_evolution_recurrence_at_full_period() {
        let p = params(0.3, 0.2, 0.7, 1.0);
        for (n1, n2) in [(1, 0), (2, 1), (3, 3)] {
            let init = NumberProduct::new(n1, n2);
            let t0 = evolve_number_product(&init, &p, 0.0);
            let t1 = evolve_number_product(&init, &p, PI / p.lambda);
            assert_relative_eq!(fidelity(&t0, &t1), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn number_evolution_conserves_total_and_norm() {
        let p = params(0.0, 0.37, 0.0, 1.0);
        let init = NumberProduct::new(3, 2);
        for t in [0.1, 0.9, 4.2] {
            let state = evolve_number_product(&init, &p, t);
            assert!(state.norm_deficit() < 1e-12);
            for ((n, m), a) in state.amplitudes().indexed_iter() {
                if n + m != 5 {
                    assert_eq!(*a, C64::new(0.0, 0.0), "support leak at ({n},{m})");
                }
            }
        }
    }

    #[test]
    fn number_evolution_matches_normal_mode_route() {
        // Independent route: expand into the normal-mode basis, apply the
        // diagonal phases e^{2 i k lambda t}, and map back with the same
        // (involutive) coefficient table.
        let p = params(0.0, 0.41, 0.0, 1.0);
        let (n1, n2) = (3, 2);
        let total = n1 + n2;
        let t = 0.77;
        let table = basis_change_coeffs(n1, n2);
        let induced = table.induced_amplitudes();
        let mut amps = Array2::zeros((total + 1, total + 1));
        for k in 0..=total {
            let phase = C64::from_polar(induced[k], 2.0 * k as f64 * p.lambda * t);
            // |N-k, k> in normal modes maps back through the same table
            let back = basis_change_coeffs(total - k, k);
            for ((i, j), &c) in back.coeffs.indexed_iter() {
                amps[(total - (i + j), i + j)] += phase * c;
            }
        }
        let via_normal_modes = TwoModeState::from_amplitudes(amps).unwrap();
        let direct = evolve_number_product(&NumberProduct::new(n1, n2), &p, t);
        assert_relative_eq!(fidelity(&direct, &via_normal_modes), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_t_limits() {
        let p = params(0.0, 1.0, 0.0, 1.0);
        let init = coherent_qp(1.0, 0.0, 0.0, 1.0);
        let (a1, a2) = init.alphas(p.hbar);
        let (b1, b2) = beta_t(&init, &p, 0.0);
        assert_eq!((b1, b2), (a1, a2));

        let i = C64::new(0.0, 1.0);
        let (b1, b2) = beta_t(&init, &p, PI / 2.0);
        assert_relative_eq!((b1 + i * a2).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((b2 + i * a1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn beta_t_preserves_total_action() {
        let p = params(0.9, 0.35, 0.0, 1.0);
        let init = coherent_qp(1.0, -0.4, 0.3, 0.8);
        let (a1, a2) = init.alphas(p.hbar);
        let total = a1.norm_sqr() + a2.norm_sqr();
        for t in [0.0, 0.31, 2.7, 12.0] {
            let (b1, b2) = beta_t(&init, &p, t);
            assert_relative_eq!(b1.norm_sqr() + b2.norm_sqr(), total, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_evolution_vacuum_stays_vacuum() {
        let p = params(1.0, 0.2, 0.1, 1.0);
        let init = coherent_qp(0.0, 0.0, 0.0, 0.0);
        let state = evolve_coherent_product(&init, &p, 3.3, 1e-12).unwrap();
        assert_eq!(state.amplitudes()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(state.cutoff1(), 0);
    }

    #[test]
    fn coherent_evolution_without_kerr_is_product() {
        let p = params(1.0, 0.2, 0.0, 1.0);
        let init = coherent_qp(1.0, 1.0, 1.0, 1.0);
        for t in [0.5, 3.0, 11.0] {
            let state = evolve_coherent_product(&init, &p, t, 1e-12).unwrap();
            let rho = partial_trace(&state, Mode::One);
            let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
            assert_relative_eq!(purity, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn coherent_evolution_recoheres_at_t1() {
        // Kerr phases unwind whenever hbar g t is a multiple of pi.
        let p = params(1.0, 0.2, 0.1, 1.0);
        let init = coherent_qp(1.0, 1.0, 1.0, 1.0);
        let t1 = PI / p.omega_g();
        let state = evolve_coherent_product(&init, &p, t1, 1e-12).unwrap();
        let rho = partial_trace(&state, Mode::One);
        let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(purity, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn reduced_density_matches_partial_trace() {
        let p = params(1.0, 0.2, 0.1, 1.0);
        let init = coherent_qp(1.0, 1.0, 1.0, 1.0);
        for t in [0.37, 0.5, 2.0] {
            let state = evolve_coherent_product(&init, &p, t, 1e-12).unwrap();
            for keep in [Mode::One, Mode::Two] {
                let traced = partial_trace(&state, keep);
                let closed = reduced_density_coherent(&init, &p, t, keep, 1e-12).unwrap();
                let d = traced.cutoff().min(closed.cutoff()) + 1;
                let mut worst = 0.0f64;
                for n in 0..d {
                    for m in 0..d {
                        worst = worst
                            .max((traced.matrix()[(n, m)] - closed.matrix()[(n, m)]).norm());
                    }
                }
                assert!(worst < 1e-10, "entrywise deviation {worst:.3e} at t={t}");
            }
        }
    }

    #[test]
    fn reduced_density_diagonal_is_poisson() {
        let p = params(1.0, 0.2, 0.1, 1.0);
        let init = coherent_qp(1.0, 1.0, 1.0, 1.0);
        let t = 1.3;
        let (b1, _) = beta_t(&init, &p, t);
        let mu = b1.norm_sqr();
        let rho = reduced_density_coherent(&init, &p, t, Mode::One, 1e-12).unwrap();
        let mut pmf = (-mu).exp();
        for n in 0..=rho.cutoff().min(8) {
            if n > 0 {
                pmf *= mu / n as f64;
            }
            assert_relative_eq!(rho.matrix()[(n, n)].re, pmf, epsilon = 1e-13);
        }
    }

    #[test]
    fn reduced_density_at_zero_is_projector() {
        let p = params(1.0, 0.2, 0.1, 1.0);
        let init = coherent_qp(0.6, -0.2, 0.0, 0.0);
        let rho = reduced_density_coherent(&init, &p, 0.0, Mode::One, 1e-12).unwrap();
        let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(purity, 1.0, epsilon = 1e-10);
        assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-10);
    }
}
