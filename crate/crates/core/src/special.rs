//! Small special-function helpers.

/// ln(n!) by direct summation. Exact to rounding for the index ranges used
/// here (a few thousand at most).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomial L_n^{(a)}(x) by the three-term
/// recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Upper tail P(X > k) of a Poisson variable with mean `eta`, summed term by
/// term in the log domain (no 1 − cdf cancellation).
pub fn poisson_tail(eta: f64, k: usize) -> f64 {
    if eta <= 0.0 {
        return 0.0;
    }
    let j0 = k + 1;
    let mut term = (j0 as f64 * eta.ln() - eta - ln_factorial(j0)).exp();
    let mut sum = 0.0;
    let mut j = j0;
    loop {
        sum += term;
        j += 1;
        term *= eta / j as f64;
        if term < 1e-300 || (j as f64 > eta && term <= sum * 1e-17) {
            break;
        }
    }
    sum
}
