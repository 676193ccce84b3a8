//! Decomposition of the reduced state at rational fractions of the
//! re-coherence time into a mixture of superpositions of coherent states.
//!
//! At `t = (r/s) pi / (hbar g)` the quadratic Kerr phase factors through a
//! discrete Fourier identity, turning the entangled two-mode state into a
//! finite sum over rotated coherent labels. Tracing the partner mode then
//! leaves a weighted mixture of cat-like superpositions. Components are
//! stored unnormalized, exactly as the identity produces them, with the
//! normalization folded into the density-matrix reconstruction.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::{gamma_t, CoherentProduct};
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes_fixed, poisson_cutoff, ModelParams, ReducedDensity};

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn validate_ratio(r: u32, s: u32) -> Result<()> {
    if r == 0 || r >= s {
        return Err(Error::invalid(format!(
            "need 0 < r < s, got r = {r}, s = {s}"
        )));
    }
    if gcd(r, s) != 1 {
        return Err(Error::invalid(format!("r = {r} and s = {s} share a factor")));
    }
    Ok(())
}

/// DFT period of the quadratic phase sequence `e^{-i pi n^2 r/s}`:
/// `s` when exactly one of `r`, `s` is even, `2s` when both are odd.
pub fn l_rule(r: u32, s: u32) -> Result<u32> {
    validate_ratio(r, s)?;
    Ok(if (r % 2) != (s % 2) { s } else { 2 * s })
}

/// Coefficients `a_q = (1/l) sum_k e^{-i pi k (k r/s - 2 q/l)}` satisfying
/// the reconstruction identity
/// `e^{-i pi n^2 r/s} = sum_q a_q e^{-2 pi i n q / l}` for every integer n.
pub fn dft_coeffs(r: u32, s: u32) -> Result<Vec<C64>> {
    let l = l_rule(r, s)? as usize;
    let mut out = Vec::with_capacity(l);
    for q in 0..l {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..l {
            let phase = -std::f64::consts::PI
                * k as f64
                * (k as f64 * r as f64 / s as f64 - 2.0 * q as f64 / l as f64);
            acc += C64::from_polar(1.0, phase);
        }
        out.push(acc / l as f64);
    }
    Ok(out)
}

/// One coherent component of a cat state: coefficient and label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatTerm {
    pub coeff: C64,
    pub label: C64,
}

/// An (unnormalized) superposition of coherent states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatState {
    pub terms: Vec<CatTerm>,
}

impl CatState {
    /// Expand the superposition over Fock levels `0..=cutoff`.
    pub fn fock_amplitudes(&self, cutoff: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); cutoff + 1];
        for term in &self.terms {
            let comp = coherent_amplitudes_fixed(term.label, cutoff);
            for (o, c) in out.iter_mut().zip(comp) {
                *o += term.coeff * c;
            }
        }
        out
    }

    pub fn norm_sq(&self, cutoff: usize) -> f64 {
        self.fock_amplitudes(cutoff)
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }
}

/// The full decomposition at `t_{r,s}`.
#[derive(Debug, Clone, Serialize)]
pub struct CatDecomposition {
    pub r: u32,
    pub s: u32,
    pub l: u32,
    /// The instant `t_{r,s} = (r/s) pi / (hbar g)`.
    pub time: f64,
    /// DFT coefficients `a_q`.
    pub dft: Vec<C64>,
    /// Rotated labels `eta_{1q}`, `eta_{2q}` of the two modes.
    pub eta1: Vec<C64>,
    pub eta2: Vec<C64>,
    /// Mixture weights `xi_m = |sum_q a_q c_m(eta_{2q})|^2`, one per
    /// retained partner-mode level.
    pub weights: Vec<f64>,
    /// Unnormalized cat components, one per retained level.
    pub cats: Vec<CatState>,
    /// Fock cutoff used for reconstruction.
    pub cutoff: usize,
}

impl CatDecomposition {
    /// Assemble `rho_1 = sum_m xi_m |C_m><C_m|` over the stored cutoff.
    pub fn reconstruct_reduced(&self) -> Result<ReducedDensity> {
        let d = self.cutoff + 1;
        let mut rho: Array2<C64> = Array2::zeros((d, d));
        for (cat, &w) in self.cats.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let amps = cat.fock_amplitudes(self.cutoff);
            for n in 0..d {
                for m in 0..d {
                    rho[(n, m)] += w * amps[n] * amps[m].conj();
                }
            }
        }
        // enforce exact Hermitian symmetry against rounding
        for n in 0..d {
            for m in 0..n {
                let avg = 0.5 * (rho[(n, m)] + rho[(m, n)].conj());
                rho[(n, m)] = avg;
                rho[(m, n)] = avg.conj();
            }
            rho[(n, n)] = C64::new(rho[(n, n)].re, 0.0);
        }
        ReducedDensity::from_matrix(rho)
    }
}

/// Decompose the mode-1 reduced state at `t_{r,s}` into a cat mixture and
/// reconstruct the resulting density matrix. Partner-mode levels are
/// truncated by the Poisson tail of `|eta_2|^2`.
pub fn cat_mixture(
    init: &CoherentProduct,
    params: &ModelParams,
    r: u32,
    s: u32,
    tail_tol: f64,
) -> Result<(CatDecomposition, ReducedDensity)> {
    if params.g <= 0.0 {
        return Err(Error::invalid(
            "cat decomposition needs g > 0: the instants t_{r,s} scale as 1/(hbar g)",
        ));
    }
    let l = l_rule(r, s)?;
    let dft = dft_coeffs(r, s)?;
    let time = (r as f64 / s as f64) * std::f64::consts::PI / params.omega_g();
    let (g1, g2) = gamma_t(init, params, time);
    let spin = |k: u32| -> C64 {
        C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / l as f64)
    };
    let eta1: Vec<C64> = (0..l).map(|q| g1 * spin(q)).collect();
    let eta2: Vec<C64> = (0..l).map(|q| g2 * spin(q)).collect();

    let cutoff1 = poisson_cutoff(g1.norm_sqr(), tail_tol)?;
    let cutoff2 = poisson_cutoff(g2.norm_sqr(), tail_tol)?;

    // per-component Fock expansions of the partner mode
    let comps2: Vec<Vec<C64>> = eta2
        .iter()
        .map(|&e| coherent_amplitudes_fixed(e, cutoff2))
        .collect();

    let rotation = C64::from_polar(
        1.0,
        -2.0 * std::f64::consts::PI * r as f64 / s as f64,
    );
    let mut weights = Vec::with_capacity(cutoff2 + 1);
    let mut cats = Vec::with_capacity(cutoff2 + 1);
    let mut label_spin = C64::new(1.0, 0.0); // e^{-2 pi i m r / s}
    for m in 0..=cutoff2 {
        let w_amp: C64 = dft
            .iter()
            .zip(&comps2)
            .map(|(&aq, comp)| aq * comp[m])
            .sum();
        weights.push(w_amp.norm_sqr());
        cats.push(CatState {
            terms: dft
                .iter()
                .zip(&eta1)
                .map(|(&aq, &e1)| CatTerm {
                    coeff: aq,
                    label: e1 * label_spin,
                })
                .collect(),
        });
        label_spin *= rotation;
    }

    let decomposition = CatDecomposition {
        r,
        s,
        l,
        time,
        dft,
        eta1,
        eta2,
        weights,
        cats,
        cutoff: cutoff1,
    };
    let rho = decomposition.reconstruct_reduced()?;
    Ok((decomposition, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_coherent_product, reduced_density_coherent};
    use crate::entropy::{purity, sle_coherent_closed, trace_distance};
    use crate::fock::{partial_trace, Mode, PhasePoint};
    use approx::assert_relative_eq;

    fn fig5_setup() -> (CoherentProduct, ModelParams) {
        (
            CoherentProduct::new(
                PhasePoint::new(1.0, 1.0).unwrap(),
                PhasePoint::new(1.0, 1.0).unwrap(),
            ),
            ModelParams::new(1.0, 0.2, 0.1, 0.1).unwrap(),
        )
    }

    #[test]
    fn l_rule_cases() {
        assert_eq!(l_rule(1, 2).unwrap(), 2);
        assert_eq!(l_rule(1, 3).unwrap(), 6);
        assert_eq!(l_rule(2, 3).unwrap(), 3);
        assert_eq!(l_rule(3, 4).unwrap(), 4);
        assert!(l_rule(2, 4).is_err());
        assert!(l_rule(0, 3).is_err());
        assert!(l_rule(3, 3).is_err());
    }

    #[test]
    fn dft_half_case() {
        let a = dft_coeffs(1, 2).unwrap();
        assert_relative_eq!(a[0].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(a[0].im, -0.5, epsilon = 1e-14);
        assert_relative_eq!(a[1].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(a[1].im, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn dft_parseval_and_reconstruction() {
        for (r, s) in [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (2, 5), (5, 8)] {
            let a = dft_coeffs(r, s).unwrap();
            let l = a.len();
            let norm: f64 = a.iter().map(|c| c.norm_sqr()).sum();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
            // brute-force reconstruction identity over n in [0, 4l)
            for n in 0..(4 * l) {
                let lhs = C64::from_polar(
                    1.0,
                    -std::f64::consts::PI * (n * n) as f64 * r as f64 / s as f64,
                );
                let rhs: C64 = a
                    .iter()
                    .enumerate()
                    .map(|(q, &aq)| {
                        aq * C64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * (n * q) as f64 / l as f64,
                        )
                    })
                    .sum();
                assert!(
                    (lhs - rhs).norm() < 1e-12,
                    "({r},{s}) reconstruction fails at n={n}"
                );
            }
        }
    }

    #[test]
    fn mixture_reconstructs_partial_trace() {
        let (init, params) = fig5_setup();
        for (r, s) in [(1, 2), (2, 3)] {
            let (decomp, rho) = cat_mixture(&init, &params, r, s, 1e-12).unwrap();
            let state = evolve_coherent_product(&init, &params, decomp.time, 1e-12).unwrap();
            let direct = partial_trace(&state, Mode::One);
            let dist = trace_distance(&rho, &direct);
            assert!(dist < 1e-8, "({r},{s}): trace distance {dist:.3e}");
            let xi_sum: f64 = decomp.weights.iter().sum();
            assert!((xi_sum - 1.0).abs() < 1e-10);
            assert!(decomp.weights.iter().all(|&w| w >= -1e-12));
        }
    }

    #[test]
    fn mixture_purity_complements_entropy() {
        let (init, params) = fig5_setup();
        let (decomp, rho) = cat_mixture(&init, &params, 1, 2, 1e-12).unwrap();
        let delta = sle_coherent_closed(&init, &params, decomp.time, 1e-12).unwrap();
        assert!((purity(&rho) - (1.0 - delta)).abs() < 1e-8);
        // two-component standing wave sits near delta = 1/2
        assert!((delta - 0.5).abs() < 0.05);
    }

    #[test]
    fn vacuum_partner_leaves_single_pure_cat() {
        let init = CoherentProduct::new(
            PhasePoint::new(1.0, 1.0).unwrap(),
            PhasePoint::new(0.0, 0.0).unwrap(),
        );
        let params = ModelParams::new(1.0, 0.2, 0.1, 0.1).unwrap();
        let (decomp, rho) = cat_mixture(&init, &params, 1, 2, 1e-12).unwrap();
        assert_eq!(decomp.weights.len(), 1);
        assert!((purity(&rho) - 1.0).abs() < 1e-10);
        // matches the closed-form reduced density as well
        let direct = reduced_density_coherent(&init, &params, decomp.time, Mode::One, 1e-12)
            .unwrap();
        assert!(trace_distance(&rho, &direct) < 1e-10);
    }

    #[test]
    fn rejects_zero_kerr() {
        let (init, _) = fig5_setup();
        let params = ModelParams::new(1.0, 0.2, 0.0, 1.0).unwrap();
        assert!(cat_mixture(&init, &params, 1, 2, 1e-12).is_err());
    }
}
