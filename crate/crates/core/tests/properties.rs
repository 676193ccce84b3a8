//! Property tests for the structural invariants: norm bookkeeping,
//! subsystem symmetry, phase invariance and the Fourier reconstruction
//! identity, over randomized inputs.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use kerr_core::{
    basis_change_coeffs, beta_t, dft_coeffs, evolve_number_product, fidelity, l_rule,
    linear_entropy, number_entropy_spectrum, partial_trace, purity, sle_coherent_closed,
    von_neumann_entropy, CoherentProduct, Mode, ModelParams, NumberProduct, PhasePoint,
    TwoModeState,
};

fn normalized_state(raw: Vec<(f64, f64)>, rows: usize, cols: usize) -> TwoModeState {
    let mut amps: Array2<C64> = Array2::zeros((rows, cols));
    for (idx, (re, im)) in raw.iter().enumerate() {
        let (n, m) = (idx / cols, idx % cols);
        amps[(n, m)] = C64::new(*re, *im);
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        amps.mapv_inplace(|a| a / norm);
    } else {
        amps[(0, 0)] = C64::new(1.0, 0.0);
    }
    TwoModeState::from_amplitudes(amps).unwrap()
}

fn state_strategy() -> impl Strategy<Value = TwoModeState> {
    (2usize..5, 2usize..5).prop_flat_map(|(rows, cols)| {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
            .prop_map(move |raw| normalized_state(raw, rows, cols))
    })
}

fn coherent_strategy() -> impl Strategy<Value = CoherentProduct> {
    (-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5).prop_map(|(q1, p1, q2, p2)| {
        CoherentProduct::new(
            PhasePoint::new(q1, p1).unwrap(),
            PhasePoint::new(q2, p2).unwrap(),
        )
    })
}

proptest! {
    #[test]
    fn reduced_spectra_agree_for_pure_states(state in state_strategy()) {
        let rho1 = partial_trace(&state, Mode::One);
        let rho2 = partial_trace(&state, Mode::Two);
        prop_assert!((purity(&rho1) - purity(&rho2)).abs() < 1e-10);
        let s1 = von_neumann_entropy(&rho1).unwrap();
        let s2 = von_neumann_entropy(&rho2).unwrap();
        prop_assert!((s1 - s2).abs() < 1e-9);
        // entropy ordering and range
        let d = (rho1.cutoff() + 1) as f64;
        let delta = linear_entropy(&rho1);
        prop_assert!(delta >= -1e-12 && delta <= 1.0 - 1.0 / d + 1e-12);
        prop_assert!(delta <= s1 + 1e-9);
        prop_assert!(s1 <= d.ln() + 1e-9);
    }

    #[test]
    fn partial_trace_is_hermitian_and_trace_correct(state in state_strategy()) {
        for keep in [Mode::One, Mode::Two] {
            let rho = partial_trace(&state, keep);
            let m = rho.matrix();
            for n in 0..m.nrows() {
                for k in 0..m.ncols() {
                    prop_assert!((m[(n, k)] - m[(k, n)].conj()).norm() < 1e-12);
                }
            }
            prop_assert!((rho.trace() - (1.0 - state.norm_deficit())).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_symmetric_and_phase_invariant(
        state_a in state_strategy(),
        state_b in state_strategy(),
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let f_ab = fidelity(&state_a, &state_b);
        let f_ba = fidelity(&state_b, &state_a);
        prop_assert!((f_ab - f_ba).abs() < 1e-12);
        prop_assert!(f_ab <= 1.0 + 1e-12);

        let rotated = {
            let mut amps = state_b.amplitudes().clone();
            let u = C64::from_polar(1.0, phase);
            amps.mapv_inplace(|a| a * u);
            TwoModeState::from_amplitudes(amps).unwrap()
        };
        prop_assert!((fidelity(&state_a, &rotated) - f_ab).abs() < 1e-12);
    }

    #[test]
    fn number_evolution_preserves_support_and_period(
        n1 in 0usize..4,
        n2 in 0usize..4,
        lambda in 0.05f64..2.0,
        t in 0.0f64..20.0,
    ) {
        let params = ModelParams::new(0.9, lambda, 0.3, 1.0).unwrap();
        let init = NumberProduct::new(n1, n2);
        let state = evolve_number_product(&init, &params, t);
        prop_assert!(state.norm_deficit() < 1e-10);
        for ((n, m), a) in state.amplitudes().indexed_iter() {
            if n + m != n1 + n2 {
                prop_assert!(a.norm() == 0.0);
            }
        }
        // evolving one reversibility period later reproduces the state
        let later = evolve_number_product(&init, &params, t + std::f64::consts::PI / lambda);
        prop_assert!(fidelity(&state, &later) >= 1.0 - 1e-9);
        // spectrum route agrees with the traced state
        let spec = number_entropy_spectrum(&init, lambda, t);
        let rho = partial_trace(&state, Mode::One);
        prop_assert!((spec.linear_entropy() - linear_entropy(&rho)).abs() < 1e-10);
        let sum: f64 = spec.eigenvalues.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_change_stays_normalized(n1 in 0usize..7, n2 in 0usize..7) {
        let induced = basis_change_coeffs(n1, n2).induced_amplitudes();
        let norm: f64 = induced.iter().map(|d| d * d).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beta_rotation_preserves_action(init in coherent_strategy(), t in 0.0f64..30.0) {
        let params = ModelParams::new(1.0, 0.2, 0.1, 1.0).unwrap();
        let (a1, a2) = init.alphas(params.hbar);
        let (b1, b2) = beta_t(&init, &params, t);
        prop_assert!(
            ((b1.norm_sqr() + b2.norm_sqr()) - (a1.norm_sqr() + a2.norm_sqr())).abs() < 1e-10
        );
    }

    #[test]
    fn coherent_sle_stays_in_range(init in coherent_strategy(), t in 0.0f64..40.0) {
        let params = ModelParams::new(1.0, 0.2, 0.1, 1.0).unwrap();
        let delta = sle_coherent_closed(&init, &params, t, 1e-12).unwrap();
        prop_assert!((0.0..1.0).contains(&delta));
    }

    #[test]
    fn dft_reconstruction_identity(r in 1u32..12, s in 2u32..13) {
        prop_assume!(r < s);
        prop_assume!({
            let (mut a, mut b) = (r, s);
            while b != 0 { (a, b) = (b, a % b); }
            a == 1
        });
        let l = l_rule(r, s).unwrap() as usize;
        let coeffs = dft_coeffs(r, s).unwrap();
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        for n in 0..(4 * l) {
            let lhs = C64::from_polar(
                1.0,
                -std::f64::consts::PI * (n * n) as f64 * r as f64 / s as f64,
            );
            let rhs: C64 = coeffs
                .iter()
                .enumerate()
                .map(|(q, &aq)| {
                    aq * C64::from_polar(
                        1.0,
                        -std::f64::consts::TAU * (n * q) as f64 / l as f64,
                    )
                })
                .sum();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}
