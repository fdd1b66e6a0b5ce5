//! Gauss hypergeometric function ₂F₁(a, b; c; z) on 0 ≤ z < 1.

use crate::error::{Error, Result};
use crate::specfun::gamma::{ln_gamma_signed, psi_real, rgamma};

/// Above this point the series is replaced by the z → 1 - z connection formula.
pub const Z_SWITCH: f64 = 0.7;

const MAX_TERMS: usize = 20_000;

fn non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

/// Sum of the hypergeometric series. Terminates exactly when `b` is a
/// non-positive integer.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let limit = if non_positive_integer(b) { (-b) as usize } else { MAX_TERMS };
    for k in 0..limit {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if !non_positive_integer(b) && term.abs() <= 1e-17 * sum.abs() && kf > 2.0 {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    if non_positive_integer(b) {
        return Ok(sum);
    }
    Err(Error::Accuracy {
        message: format!("2F1({a}, {b}; {c}; {z}) series did not converge"),
        best_estimate: sum,
        error_estimate: term.abs(),
    })
}

/// Γ-quotient `Γ(p1) Γ(p2) / (Γ(q1) Γ(q2))`, zero when a denominator has a pole.
fn gamma_quotient(p1: f64, p2: f64, q1: f64, q2: f64) -> f64 {
    let (l1, s1) = ln_gamma_signed(p1);
    let (l2, s2) = ln_gamma_signed(p2);
    let (l3, s3) = ln_gamma_signed(q1);
    let (l4, s4) = ln_gamma_signed(q2);
    if s3 == 0.0 || s4 == 0.0 {
        return 0.0;
    }
    s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp()
}

/// ₂F₁(a, b; c; z) for z ∈ [0, 1).
///
/// Arguments are put in a canonical order first, so the result is exactly
/// symmetric in `a` and `b`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_args(a, b, c, z)?;
    eval(a, b, c, z, 1.0 - z)
}

fn check_args(a: f64, b: f64, c: f64, z: f64) -> Result<()> {
    if !(0.0..1.0).contains(&z) || !z.is_finite() {
        return Err(Error::domain(format!("gauss_2f1 requires z in [0, 1), got {z}")));
    }
    if non_positive_integer(c) || !c.is_finite() {
        return Err(Error::domain(format!("gauss_2f1 requires c not a non-positive integer, got {c}")));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("gauss_2f1 parameters must be finite"));
    }
    Ok(())
}

/// Canonical order: a terminating parameter goes second, otherwise ascending.
fn canonical(a: f64, b: f64) -> (f64, f64) {
    match (non_positive_integer(a), non_positive_integer(b)) {
        (true, false) => (b, a),
        (false, true) => (a, b),
        _ => (a.min(b), a.max(b)),
    }
}

/// `w = 1 - z` is passed separately so callers can keep it exact when tiny.
fn eval(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    let (a, b) = canonical(a, b);
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if non_positive_integer(b) || z <= Z_SWITCH {
        return series(a, b, c, z);
    }
    let d = c - a - b;
    if near_integer(d) {
        return Err(Error::TransformationUnavailable(format!(
            "c - a - b = {d} is an integer and z = {z} > {Z_SWITCH}"
        )));
    }
    let first = gamma_quotient(c, d, c - a, c - b);
    let second = gamma_quotient(c, -d, a, b);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * series(a, b, 1.0 - d, w)?;
    }
    if second != 0.0 {
        value += second * w.powf(d) * series(c - a, c - b, 1.0 + d, w)?;
    }
    Ok(value)
}

/// Like [`gauss_2f1`], but also covers integer `c - a - b` above the switch
/// point with the logarithmic limit forms of the connection formula.
pub fn gauss_2f1_ext(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_args(a, b, c, z)?;
    eval_ext(a, b, c, z, 1.0 - z)
}

/// [`gauss_2f1_ext`] at `z = 1 - w`, for `w ∈ (0, 1]` possibly below the
/// resolution of `1 - z`.
pub fn gauss_2f1_ext_complement(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::domain(format!("complement argument must lie in (0, 1], got {w}")));
    }
    let z = 1.0 - w;
    check_args(a, b, c, z.min(0.5))?;
    eval_ext(a, b, c, z, w)
}

fn eval_ext(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    match eval(a, b, c, z, w) {
        Err(Error::TransformationUnavailable(_)) => {
            let m = (c - a - b).round();
            if m < 0.0 {
                // Euler: F(a,b;c;z) = (1-z)^m F(c-a, c-b; c; z)
                return Ok(w.powf(m) * eval_ext(c - a, c - b, c, z, w)?);
            }
            let (a, b) = (a.min(b), a.max(b));
            logarithmic_case(a, b, w, m as u32)
        }
        other => other,
    }
}

/// c = a + b + m with m a non-negative integer; neither a nor b a non-positive integer.
fn logarithmic_case(a: f64, b: f64, w: f64, m: u32) -> Result<f64> {
    let lw = w.ln();
    let mf = m as f64;
    let mut head = 0.0;
    if m > 0 {
        // Γ(m)Γ(a+b+m)/(Γ(a+m)Γ(b+m)) Σ_{n<m} (a)_n (b)_n / (n! (1-m)_n) w^n
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 0..m {
            let nf = n as f64;
            sum += term;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
        }
        let (l1, s1) = ln_gamma_signed(mf);
        let (l2, s2) = ln_gamma_signed(a + b + mf);
        head = s1 * s2 * (l1 + l2).exp() * rgamma(a + mf) * rgamma(b + mf) * sum;
    }
    // -(z-1)^m Γ(a+b+m)/(Γ(a)Γ(b)) Σ_n (a+m)_n (b+m)_n / (n! (n+m)!) w^n
    //   × [ln w - ψ(n+1) - ψ(n+m+1) + ψ(a+n+m) + ψ(b+n+m)]
    let (lab, sab) = ln_gamma_signed(a + b + mf);
    let (lfm, _) = ln_gamma_signed(mf + 1.0);
    let pref = sab * (lab - lfm).exp() * rgamma(a) * rgamma(b);
    let sign_m = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut term = 1.0; // (a+m)_n (b+m)_n w^n / (n! (n+m)!) × m!
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let bracket = lw - psi_real(nf + 1.0) - psi_real(nf + mf + 1.0) + psi_real(a + nf + mf) + psi_real(b + nf + mf);
        let contrib = term * bracket;
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() && n > 2 {
            return Ok(head - sign_m * w.powi(m as i32) * pref * sum);
        }
        term *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
    }
    Err(Error::Accuracy {
        message: format!("logarithmic 2F1 series did not converge at 1 - z = {w}"),
        best_estimate: head - sign_m * w.powi(m as i32) * pref * sum,
        error_estimate: term.abs(),
    })
}
