//! Characteristic-time predictors: re-coherence, recurrence, reversibility
//! and the break time separating the rising and oscillating entropy
//! regimes.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{evolve_coherent_product, CoherentProduct, NumberProduct};
use crate::error::{Error, Result};
use crate::fock::{fidelity, ModelParams};

/// Tolerance on `|x - round(x)|` when testing frequency-ratio
/// commensurability.
const INTEGER_RATIO_TOL: f64 = 1e-9;
/// Tolerance on `q1 q2 + p1 p2` for the exchange-driven disentanglement
/// condition.
const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Relative precision of the golden-section break-time refinement.
const BREAK_TIME_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Number,
    Coherent,
}

/// Predicted characteristic times for one initial condition.
#[derive(Debug, Clone, Serialize)]
pub struct TimescaleReport {
    pub family: Family,
    /// Instants at which the subsystems return to purity.
    pub recoherence_times: Vec<f64>,
    /// Instants at which the global state returns to the initial one
    /// (predicted lattice; for coherent inputs this is the integer-ratio
    /// rule, cross-checked separately by `recurrence_check`).
    pub recurrence_times: Vec<f64>,
    /// Reversibility period of the number family.
    pub tau_r: Option<f64>,
    /// Exchange-driven disentanglement instants available when
    /// `q1 q2 + p1 p2 = 0`.
    pub special_times: Vec<f64>,
    /// Estimated break time, when a caller has attached one.
    pub break_time: Option<f64>,
    /// For equal occupation numbers the swap instants already restore the
    /// initial state, collapsing the two time lattices into one.
    pub swap_equals_recurrence: bool,
}

/// Characteristic times of an evolved `|n1, n2>`: swaps at
/// `(l + 1/2) pi / lambda`, recurrences at `l pi / lambda`, reversibility
/// period `pi / lambda`.
pub fn number_state_times(
    init: &NumberProduct,
    lambda: f64,
    l_max: usize,
) -> Result<TimescaleReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let tau_r = PI / lambda;
    let recoherence_times = (0..=l_max).map(|l| tau_r * (l as f64 + 0.5)).collect();
    let recurrence_times = (1..=l_max).map(|l| tau_r * l as f64).collect();
    Ok(TimescaleReport {
        family: Family::Number,
        recoherence_times,
        recurrence_times,
        tau_r: Some(tau_r),
        special_times: Vec::new(),
        break_time: None,
        swap_equals_recurrence: init.n1 == init.n2,
    })
}

/// Positive principal value of `arctan(num / den)` in units of
/// `1 / lambda`, mapped into `(0, pi / lambda]`. A vanishing denominator
/// takes the limit `pi / (2 lambda)`.
fn principal_special_time(num: f64, den: f64, lambda: f64) -> f64 {
    let angle = if den == 0.0 {
        PI / 2.0
    } else {
        let a = (num / den).atan();
        if a <= 0.0 {
            a + PI
        } else {
            a
        }
    };
    angle / lambda
}

/// Re-coherence lattice of a coherent product: Kerr-driven times
/// `T_l = l pi / (hbar g)` plus, when `q1 q2 + p1 p2 = 0`, the two
/// exchange-driven instants. With `g = 0` and no special condition the
/// report is empty — nothing recoheres because nothing entangles.
pub fn coherent_recoherence_times(
    init: &CoherentProduct,
    params: &ModelParams,
    l_max: usize,
) -> TimescaleReport {
    let mut recoherence_times = Vec::new();
    let mut recurrence_times = Vec::new();
    if params.g > 0.0 {
        let t1 = PI / params.omega_g();
        for l in 1..=l_max {
            let t = t1 * l as f64;
            recoherence_times.push(t);
            if integer_ratio_condition(params, l) {
                recurrence_times.push(t);
            }
        }
    }
    let mut special_times = Vec::new();
    if init.orthogonality_defect().abs() <= ORTHOGONALITY_TOL {
        special_times.push(principal_special_time(
            -init.mode1.q,
            init.mode2.p,
            params.lambda,
        ));
        special_times.push(principal_special_time(
            init.mode1.p,
            init.mode2.q,
            params.lambda,
        ));
        special_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    TimescaleReport {
        family: Family::Coherent,
        recoherence_times,
        recurrence_times,
        tau_r: None,
        special_times,
        break_time: None,
        swap_equals_recurrence: false,
    }
}

fn integer_ratio_condition(params: &ModelParams, l: usize) -> bool {
    let wg = params.omega_g();
    [params.omega0, params.lambda].iter().all(|&w| {
        let ratio = l as f64 * w / wg;
        (ratio - ratio.round()).abs() <= INTEGER_RATIO_TOL
    })
}

/// Outcome of probing one Kerr re-coherence time for a global recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceVerdict {
    pub l: usize,
    pub time: f64,
    /// Integer-ratio prediction: `l w0 / w_g` and `l lambda / w_g` both
    /// integral.
    pub predicted: bool,
    /// Whether the evolved state actually matches the initial one.
    pub observed: bool,
    pub fidelity: f64,
}

/// Compare the integer-ratio recurrence prediction at `T_l` against the
/// fidelity of the analytically evolved state. The two verdicts are
/// reported side by side without reconciliation; the prediction ignores a
/// possible sign flip of the coherent labels that the fidelity sees.
pub fn recurrence_check(
    init: &CoherentProduct,
    params: &ModelParams,
    l: usize,
    fid_tol: f64,
) -> Result<RecurrenceVerdict> {
    if l == 0 {
        return Err(Error::invalid("recurrence index l must be at least 1"));
    }
    if params.g == 0.0 {
        return Err(Error::invalid(
            "recurrence times T_l are undefined for g = 0",
        ));
    }
    let time = l as f64 * PI / params.omega_g();
    let tail = 1e-12;
    let initial = evolve_coherent_product(init, params, 0.0, tail)?;
    let evolved = evolve_coherent_product(init, params, time, tail)?;
    let fid = fidelity(&initial, &evolved);
    Ok(RecurrenceVerdict {
        l,
        time,
        predicted: integer_ratio_condition(params, l),
        observed: fid >= 1.0 - fid_tol,
        fidelity: fid,
    })
}

/// Locate the break time of an entropy series: the first strict local
/// maximum of `delta(t)` on a uniform scan of `[t_start, t_end]`, refined
/// by golden-section search to 1e-4 relative precision. Returns `None`
/// when the series never turns over (constant, monotone, or `g = 0`).
pub fn break_time_estimate(
    delta: impl Fn(f64) -> f64,
    t_start: f64,
    t_end: f64,
    samples: usize,
) -> Option<f64> {
    if !(t_end > t_start) || samples < 3 {
        return None;
    }
    let step = (t_end - t_start) / (samples - 1) as f64;
    let ts: Vec<f64> = (0..samples).map(|i| t_start + step * i as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| delta(t)).collect();
    for i in 1..samples - 1 {
        if ys[i] > ys[i - 1] && ys[i] > ys[i + 1] {
            return Some(golden_section_max(&delta, ts[i - 1], ts[i + 1]));
        }
    }
    None
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let scale = b.abs().max(1e-12);
    while (b - a) > BREAK_TIME_REL_TOL * scale {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
