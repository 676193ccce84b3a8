//! Exactly soluble dynamics of two bosonic modes exchanging photons under
//! a shared Kerr nonlinearity.
//!
//! The model couples two resonant oscillators through a photon-exchange
//! term and a nonlinearity proportional to the squared total photon
//! number, which keeps the total number conserved and the evolution
//! solvable in closed form for products of number states and products of
//! coherent states. This crate provides:
//!
//! * [`fock`] — truncated Fock-space value types and basis operations;
//! * [`dynamics`] — the closed-form evolutions and reduced densities;
//! * [`entropy`] — subsystem linear and Von Neumann entropies along
//!   several independent routes;
//! * [`phase_space`] — quadrature observables, Husimi grids and the
//!   standing-wave peak detector;
//! * [`timescales`] — re-coherence, recurrence and break-time predictors;
//! * [`cat`] — decomposition of the reduced state into a mixture of
//!   coherent-state superpositions at rational fractions of the
//!   re-coherence time;
//! * [`oracle`] — a block-diagonal brute-force propagator, kept free of
//!   the closed forms so the two routes check each other.
//!
//! All types are immutable values and all operations are pure, so sweeps
//! parallelize trivially.

pub mod cat;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod fock;
pub mod math;
pub mod oracle;
pub mod phase_space;
pub mod timescales;

pub use cat::{cat_mixture, dft_coeffs, l_rule, CatDecomposition, CatState, CatTerm};
pub use dynamics::{
    basis_change_coeffs, beta_t, evolve_coherent_product, evolve_number_product,
    reduced_density_coherent, BasisChangeTable, CoherentProduct, NumberProduct,
};
pub use entropy::{
    hermitian_eigenvalues, linear_entropy, number_entropy_spectrum, purity, sle_coherent_closed,
    trace_distance, von_neumann_entropy, EntropySample, NumberEntropySpectrum,
};
pub use error::{Error, Result};
pub use fock::{
    coherent_amplitudes, fidelity, mode_operator_matrix, partial_trace, poisson_cutoff,
    tensor_product, Mode, ModeOperator, ModelParams, PhasePoint, ReducedDensity,
    SingleModeAmplitudes, TwoModeState, HARD_CUTOFF_LIMIT,
};
pub use oracle::{
    block_hamiltonian_eigensystem, default_n_max_coherent, Block, BlockSpectrum,
};
pub use phase_space::{
    angular_peaks, husimi_grid, husimi_point, quadrature_envelope, quadrature_mean_closed,
    quadrature_moments_numeric, AngularPeaks, GridSpec, QGrid, QuadratureMoments,
};
pub use timescales::{
    break_time_estimate, coherent_recoherence_times, number_state_times, recurrence_check,
    Family, RecurrenceVerdict, TimescaleReport,
};
