//! Small numeric helpers shared across modules.

/// `ln(k!)` for `k = 0..=n`, by cumulative summation. Accurate to a few
/// ulps for the desk-scale arguments used here and free of the overflow
/// that plain factorials hit past 170!.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub(crate) fn ln_binomial(ln_fact: &[f64], n: usize, k: usize) -> f64 {
    ln_fact[n] - ln_fact[k] - ln_fact[n - k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorials_match_exact_values() {
        let lf = ln_factorials(20);
        assert!((lf[0]).abs() < 1e-15);
        assert!((lf[5] - 120.0f64.ln()).abs() < 1e-12);
        assert!((lf[20] - 2.43290200817664e18f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn binomials() {
        let lf = ln_factorials(10);
        assert!((ln_binomial(&lf, 10, 3).exp() - 120.0).abs() < 1e-9);
        assert!((ln_binomial(&lf, 10, 0).exp() - 1.0).abs() < 1e-12);
    }
}
