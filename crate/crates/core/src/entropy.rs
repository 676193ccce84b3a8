//! Subsystem linear and Von Neumann entropies.
//!
//! Three independent routes to the same quantities coexist here: generic
//! density-matrix formulas, the diagonal spectrum available for number
//! inputs, and the closed double-sum for coherent inputs. The regression
//! suites hold them against each other.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::{beta_t, CoherentProduct, NumberProduct};
use crate::error::{Error, Result};
use crate::fock::{poisson_cutoff, ModelParams, ReducedDensity};
use crate::math::{ln_binomial, ln_factorials};

/// Eigenvalues below this are treated as truncation noise and clipped to
/// zero; anything more negative is a genuine validity failure.
const EIGENVALUE_CLIP: f64 = -1e-10;

/// One sample of the entropy observables at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySample {
    pub t: f64,
    /// Linear entropy `1 - Tr(rho^2)`.
    pub delta: f64,
    /// Von Neumann entropy in nats.
    pub s_vn: f64,
}

/// `Tr(rho^2)`, evaluated as the squared Frobenius norm of the Hermitian
/// matrix.
pub fn purity(rho: &ReducedDensity) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Subsystem linear entropy `delta = 1 - Tr(rho^2)`.
pub fn linear_entropy(rho: &ReducedDensity) -> f64 {
    1.0 - purity(rho)
}

/// Real eigenvalues of a Hermitian density matrix, ascending.
pub fn hermitian_eigenvalues(rho: &ReducedDensity) -> Vec<f64> {
    let d = rho.cutoff() + 1;
    let m = DMatrix::from_fn(d, d, |r, c| rho.matrix()[(r, c)]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Von Neumann entropy `-sum_i e_i ln e_i` in nats, with `0 ln 0 = 0`.
/// Eigenvalues inside the clipping band `[-1e-10, 0)` count as zero;
/// anything below it is rejected.
pub fn von_neumann_entropy(rho: &ReducedDensity) -> Result<f64> {
    let mut s = 0.0;
    for e in hermitian_eigenvalues(rho) {
        if e < EIGENVALUE_CLIP {
            return Err(Error::numerical(
                "entropy",
                format!("density eigenvalue {e:.3e} below the clipping band"),
            ));
        }
        if e > 0.0 {
            s -= e * e.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Reduced-density eigenvalues for an evolved number product. The reduced
/// operator is diagonal in the Fock basis, so the whole spectrum comes in
/// closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberEntropySpectrum {
    pub eigenvalues: Vec<f64>,
}

impl NumberEntropySpectrum {
    pub fn linear_entropy(&self) -> f64 {
        1.0 - self.eigenvalues.iter().map(|l| l * l).sum::<f64>()
    }

    pub fn von_neumann(&self) -> f64 {
        -self
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l * l.ln())
            .sum::<f64>()
    }
}

/// Spectrum `lambda_l(t)` of the reduced state of an evolved `|n1, n2>`:
/// each eigenvalue collects the amplitudes with fixed mode-1 occupation
/// `l` across the dressed binomial expansion.
pub fn number_entropy_spectrum(
    init: &NumberProduct,
    lambda: f64,
    t: f64,
) -> NumberEntropySpectrum {
    let (n1, n2) = (init.n1, init.n2);
    let total = init.total();
    let lf = ln_factorials(total.max(1));
    let c = C64::new((lambda * t).cos(), 0.0);
    let s = C64::new(0.0, -(lambda * t).sin());
    let mut c_pows = vec![C64::new(1.0, 0.0); total + 1];
    let mut s_pows = vec![C64::new(1.0, 0.0); total + 1];
    for k in 1..=total {
        c_pows[k] = c_pows[k - 1] * c;
        s_pows[k] = s_pows[k - 1] * s;
    }

    let mut eigenvalues = Vec::with_capacity(total + 1);
    for l in 0..=total {
        // i quanta transfer out of mode 1, m into it: i - m = n1 - l.
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..=n1 {
            let shift = i as isize - (n1 as isize - l as isize);
            if shift < 0 || shift as usize > n2 {
                continue;
            }
            let m = shift as usize;
            let ln_mod = ln_binomial(&lf, n1, i) + ln_binomial(&lf, n2, m)
                + 0.5 * (lf[n1 - i + m] + lf[n2 + i - m] - lf[n1] - lf[n2]);
            acc += c_pows[total - (i + m)] * s_pows[i + m] * ln_mod.exp();
        }
        eigenvalues.push(acc.norm_sqr());
    }
    NumberEntropySpectrum { eigenvalues }
}

/// Closed-form subsystem linear entropy for a coherent product:
/// `delta = 1 - e^{-2 x1} sum_{n,m} (x1^n/n!) (x1^m/m!)
///           e^{-4 x2 sin^2(hbar g t (n-m))}`
/// with `x_k = |beta_k(t)|^2` and both sums truncated by the Poisson tail
/// rule. The double sum collapses over the difference `d = n - m`, leaving
/// one correlation profile and a single pass of exponentials.
pub fn sle_coherent_closed(
    init: &CoherentProduct,
    params: &ModelParams,
    t: f64,
    tail_tol: f64,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    let (b1, b2) = beta_t(init, params, t);
    let x1 = b1.norm_sqr();
    let x2 = b2.norm_sqr();
    if x1 == 0.0 {
        // mode 1 sits in the vacuum: pure and disentangled
        return Ok(0.0);
    }
    let cut = poisson_cutoff(x1, tail_tol)?;
    let mut pmf = Vec::with_capacity(cut + 1);
    let mut term = (-x1).exp();
    pmf.push(term);
    for n in 1..=cut {
        term *= x1 / n as f64;
        pmf.push(term);
    }
    // G(d) = sum_n P_n P_{n+d}
    let mut corr = vec![0.0; cut + 1];
    for d in 0..=cut {
        corr[d] = (0..=cut - d).map(|n| pmf[n] * pmf[n + d]).sum();
    }
    let theta = params.omega_g() * t;
    let mut tr_rho_sq = corr[0];
    for d in 1..=cut {
        let s = (theta * d as f64).sin();
        tr_rho_sq += 2.0 * corr[d] * (-4.0 * x2 * s * s).exp();
    }
    Ok((1.0 - tr_rho_sq).max(0.0))
}

/// Trace distance `(1/2) ||a - b||_1` between Hermitian density matrices,
/// padding the smaller cutoff with zeros.
pub fn trace_distance(a: &ReducedDensity, b: &ReducedDensity) -> f64 {
    let d = a.cutoff().max(b.cutoff()) + 1;
    let (pa, pb) = (a.pad_to(d - 1), b.pad_to(d - 1));
    let diff = DMatrix::from_fn(d, d, |r, c| pa.matrix()[(r, c)] - pb.matrix()[(r, c)]);
    0.5 * diff
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .sum::<f64>()
}
