//! Quadrature observables and Husimi distributions for subsystems.
//!
//! Mean values come in closed form; variances go through dense operator
//! traces on a reduced density matrix. Husimi grids evaluate
//! `Q(q, p) = <gamma| rho |gamma> / pi` per node, with nodes independent
//! and evaluated in parallel.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{beta_t, CoherentProduct};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_amplitudes_fixed, mode_operator_matrix, Mode, ModeOperator, ModelParams,
    ReducedDensity,
};

/// Boundary occupation above which operator traces on a truncated matrix
/// stop being trustworthy.
const MOMENT_BOUNDARY_TOL: f64 = 1e-8;

/// Angular resolution of the peak detector (1 degree).
const ANGULAR_SAMPLES: usize = 360;
/// Radii scanned when locating the annulus of maximum radial mass.
const RADIAL_SAMPLES: usize = 240;
/// A local maximum counts as a peak when its circular prominence exceeds
/// this fraction of the profile maximum.
const PEAK_PROMINENCE_FRACTION: f64 = 0.05;

/// Husimi distribution sampled on a rectangular quadrature grid.
#[derive(Debug, Clone, Serialize)]
pub struct QGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
    pub hbar: f64,
    /// Row-major over `(q, p)`: `values[iq * np + ip]`.
    pub values: Vec<f64>,
}

impl QGrid {
    pub fn value(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.np + ip]
    }

    pub fn q_at(&self, iq: usize) -> f64 {
        grid_coord(self.q_min, self.q_max, self.nq, iq)
    }

    pub fn p_at(&self, ip: usize) -> f64 {
        grid_coord(self.p_min, self.p_max, self.np, ip)
    }

    /// Riemann sum `sum Q dq dp / (2 hbar)`; close to one whenever the
    /// window captures the distribution.
    pub fn riemann_sum(&self) -> f64 {
        let dq = (self.q_max - self.q_min) / (self.nq - 1) as f64;
        let dp = (self.p_max - self.p_min) / (self.np - 1) as f64;
        self.values.iter().sum::<f64>() * dq * dp / (2.0 * self.hbar)
    }
}

fn grid_coord(min: f64, max: f64, n: usize, i: usize) -> f64 {
    min + (max - min) * i as f64 / (n - 1) as f64
}

/// Rectangular grid request. `GridSpec::centered` builds the default
/// window: a square of half-width `3 sqrt(Lambda)` at 201x201 nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

/// Hard ceiling on grid size to keep a single frame desk-scale.
pub const MAX_GRID_NODES: usize = 4_000_000;

impl GridSpec {
    pub fn centered(half_width: f64, nodes: usize) -> Self {
        GridSpec {
            q_min: -half_width,
            q_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nq: nodes,
            np: nodes,
        }
    }

    /// Default window for a state of phase-space action `Lambda`.
    pub fn default_for_action(lambda_action: f64) -> Self {
        GridSpec::centered(3.0 * lambda_action.sqrt(), 201)
    }

    fn validate(&self) -> Result<()> {
        for v in [self.q_min, self.q_max, self.p_min, self.p_max] {
            if !v.is_finite() {
                return Err(Error::invalid("grid bounds must be finite"));
            }
        }
        if self.q_max <= self.q_min || self.p_max <= self.p_min {
            return Err(Error::invalid("grid bounds must be ordered"));
        }
        if self.nq < 2 || self.np < 2 {
            return Err(Error::invalid("grids need at least 2 nodes per axis"));
        }
        if self.nq * self.np > MAX_GRID_NODES {
            return Err(Error::resource(
                "phase-space",
                format!("grid of {} nodes exceeds {MAX_GRID_NODES}", self.nq * self.np),
            ));
        }
        Ok(())
    }
}

/// Closed-form quadrature means of one mode at time `t`:
/// `<Q> + i <P> = sqrt(2 hbar) beta_k(t) e^{-3 i w_g t}
///                e^{-nbar (1 - e^{-2 i w_g t})}`
/// with `nbar` the total mean photon number.
pub fn quadrature_mean_closed(
    init: &CoherentProduct,
    params: &ModelParams,
    t: f64,
    mode: Mode,
) -> (f64, f64) {
    let a = mean_mode_amplitude(init, params, t, mode);
    let scaled = a * (2.0 * params.hbar).sqrt();
    (scaled.re, scaled.im)
}

/// `<a_k>(t)` in the dimensionless convention.
fn mean_mode_amplitude(init: &CoherentProduct, params: &ModelParams, t: f64, mode: Mode) -> C64 {
    let (b1, b2) = beta_t(init, params, t);
    let b = match mode {
        Mode::One => b1,
        Mode::Two => b2,
    };
    let nbar = b1.norm_sqr() + b2.norm_sqr();
    let wg = params.omega_g();
    let decay = C64::from_polar(1.0, -2.0 * wg * t) - 1.0;
    b * C64::from_polar(1.0, -3.0 * wg * t) * (decay * nbar).exp()
}

/// Collapse/revival envelope `|<a_k>| / |beta_k|`, equal to
/// `e^{-2 nbar sin^2(w_g t)}` and periodic with period `pi / w_g`.
pub fn quadrature_envelope(init: &CoherentProduct, params: &ModelParams, t: f64) -> f64 {
    let (b1, b2) = beta_t(init, params, t);
    let nbar = b1.norm_sqr() + b2.norm_sqr();
    let s = (params.omega_g() * t).sin();
    (-2.0 * nbar * s * s).exp()
}

/// First and second quadrature moments of a reduced density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureMoments {
    pub q_mean: f64,
    pub p_mean: f64,
    pub q_spread: f64,
    pub p_spread: f64,
}

/// Moments by tracing against dense quadrature operators. Fails when the
/// cutoff is too small for the boundary occupation to be negligible.
pub fn quadrature_moments_numeric(rho: &ReducedDensity, hbar: f64) -> Result<QuadratureMoments> {
    let boundary = rho.boundary_occupation();
    if boundary > MOMENT_BOUNDARY_TOL {
        return Err(Error::numerical(
            "phase-space",
            format!(
                "boundary occupation {boundary:.3e} exceeds {MOMENT_BOUNDARY_TOL:.0e}; \
                 increase the cutoff before computing moments"
            ),
        ));
    }
    let cutoff = rho.cutoff();
    let q = mode_operator_matrix(ModeOperator::Q, cutoff, hbar);
    let p = mode_operator_matrix(ModeOperator::P, cutoff, hbar);
    let q_mean = trace_product(rho.matrix(), &q).re;
    let p_mean = trace_product(rho.matrix(), &p).re;
    let q2 = trace_product(rho.matrix(), &q.dot(&q)).re;
    let p2 = trace_product(rho.matrix(), &p.dot(&p)).re;
    Ok(QuadratureMoments {
        q_mean,
        p_mean,
        q_spread: (q2 - q_mean * q_mean).max(0.0).sqrt(),
        p_spread: (p2 - p_mean * p_mean).max(0.0).sqrt(),
    })
}

fn trace_product(rho: &Array2<C64>, op: &Array2<C64>) -> C64 {
    let d = rho.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..d {
        for m in 0..d {
            acc += rho[(n, m)] * op[(m, n)];
        }
    }
    acc
}

/// Husimi value `Q(q, p) = <gamma| rho |gamma> / pi` at a single node.
/// Rounding can push the quadratic form a hair below zero; that is clamped.
pub fn husimi_point(rho: &ReducedDensity, hbar: f64, q: f64, p: f64) -> f64 {
    let gamma = C64::new(q, p) / (2.0 * hbar).sqrt();
    let v = coherent_amplitudes_fixed(gamma, rho.cutoff());
    let m = rho.matrix();
    let d = v.len();
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..d {
        let mut row = C64::new(0.0, 0.0);
        for k in 0..d {
            row += m[(n, k)] * v[k];
        }
        acc += v[n].conj() * row;
    }
    (acc.re / std::f64::consts::PI).max(0.0)
}

/// Evaluate the Husimi distribution of `rho` over a grid. Nodes are
/// independent and computed in parallel; assembly order is fixed, so the
/// output is deterministic.
pub fn husimi_grid(rho: &ReducedDensity, spec: &GridSpec, hbar: f64) -> Result<QGrid> {
    spec.validate()?;
    let nodes: Vec<(usize, usize)> = (0..spec.nq)
        .flat_map(|iq| (0..spec.np).map(move |ip| (iq, ip)))
        .collect();
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&(iq, ip)| {
            let q = grid_coord(spec.q_min, spec.q_max, spec.nq, iq);
            let p = grid_coord(spec.p_min, spec.p_max, spec.np, ip);
            husimi_point(rho, hbar, q, p)
        })
        .collect();
    Ok(QGrid {
        q_min: spec.q_min,
        q_max: spec.q_max,
        p_min: spec.p_min,
        p_max: spec.p_max,
        nq: spec.nq,
        np: spec.np,
        hbar,
        values,
    })
}

/// Result of the angular ridge detector.
#[derive(Debug, Clone, Serialize)]
pub struct AngularPeaks {
    /// Radius of maximum radial mass.
    pub radius: f64,
    /// Number of prominent angular peaks on that circle.
    pub count: usize,
    /// The sampled profile `Q(radius, theta)` (one entry per degree).
    pub profile: Vec<f64>,
}

/// Count standing-wave peaks of the Husimi distribution: locate the circle
/// of maximum radial mass inside `r_max`, sample it at one-degree
/// resolution and count circular local maxima of prominence at least 5% of
/// the profile maximum.
pub fn angular_peaks(rho: &ReducedDensity, hbar: f64, r_max: f64) -> Result<AngularPeaks> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::invalid(format!(
            "peak search radius must be positive, got {r_max}"
        )));
    }
    let radii: Vec<f64> = (1..=RADIAL_SAMPLES)
        .map(|i| r_max * i as f64 / RADIAL_SAMPLES as f64)
        .collect();
    let masses: Vec<f64> = radii
        .par_iter()
        .map(|&r| r * circle_profile(rho, hbar, r, 120).iter().sum::<f64>())
        .collect();
    let best = masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .expect("non-empty radius scan");
    let radius = radii[best];
    let profile = circle_profile(rho, hbar, radius, ANGULAR_SAMPLES);
    let count = count_circular_peaks(&profile, PEAK_PROMINENCE_FRACTION);
    Ok(AngularPeaks {
        radius,
        count,
        profile,
    })
}

fn circle_profile(rho: &ReducedDensity, hbar: f64, radius: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            husimi_point(rho, hbar, radius * theta.cos(), radius * theta.sin())
        })
        .collect()
}

/// Local maxima on a circular profile, kept when the drop to the higher of
/// the two flanking valleys is at least `prominence_frac` of the profile
/// maximum.
fn count_circular_peaks(profile: &[f64], prominence_frac: f64) -> usize {
    let n = profile.len();
    let top = profile.iter().cloned().fold(f64::MIN, f64::max);
    if !(top > 0.0) {
        return 0;
    }
    let mut count = 0;
    for i in 0..n {
        let prev = profile[(i + n - 1) % n];
        let next = profile[(i + 1) % n];
        if !(profile[i] > prev && profile[i] > next) {
            continue;
        }
        // walk each side down to the valley guarding this peak
        let mut side_mins = [profile[i]; 2];
        for (dir, slot) in [(n - 1, 0usize), (1usize, 1usize)] {
            let mut j = (i + dir) % n;
            let mut low = profile[i];
            while profile[j] < profile[i] && j != i {
                low = low.min(profile[j]);
                j = (j + dir) % n;
            }
            side_mins[slot] = low;
        }
        let prominence = profile[i] - side_mins[0].max(side_mins[1]);
        if prominence >= prominence_frac * top {
            count += 1;
        }
    }
    count
}
