//! Double-exponential quadrature.
//!
//! Finite intervals use the tanh-sinh map, `[a, ∞)` and `(-∞, b]` the
//! exp-sinh map, the whole line the sinh-sinh map. Each rule is a
//! trapezoidal sum in the transformed variable whose step is halved until two
//! successive levels agree. Finite panels that do not settle are bisected.
//!
//! Nodes next to a finite endpoint are placed at `endpoint ± distance` with
//! the distance computed directly, so integrable blow-ups at an endpoint of
//! zero are sampled down to the underflow threshold.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// `[a, ∞)`
    UpperInfinite(f64),
    /// `(-∞, b]`
    LowerInfinite(f64),
    WholeLine,
}

/// Tolerances and budget for [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_level: u32,
    pub max_depth: u32,
    pub max_evaluations: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_level: 8,
            max_depth: 14,
            max_evaluations: 2_000_000,
        }
    }
}

impl QuadOptions {
    pub fn abs(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, rel_tol: 0.0, ..Default::default() }
    }

    pub fn rel(tol: f64) -> Self {
        QuadOptions { abs_tol: 0.0, rel_tol: tol, ..Default::default() }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Integrate `f` over `domain` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, domain: Domain, tol: f64) -> Result<QuadratureResult> {
    integrate_with(f, domain, QuadOptions::abs(tol))
}

pub fn integrate_with<F: Fn(f64) -> f64>(
    f: F,
    domain: Domain,
    opts: QuadOptions,
) -> Result<QuadratureResult> {
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) || (opts.abs_tol == 0.0 && opts.rel_tol == 0.0) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    let mut evals = 0usize;
    let res = match domain {
        Domain::Finite(a, b) => {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::domain("finite domain needs finite endpoints"));
            }
            if a == b {
                return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 0 });
            }
            let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
            adaptive_finite(&f, lo, hi, &opts, 0, &mut evals).map(|(v, e)| (sign * v, e))
        }
        Domain::UpperInfinite(a) => {
            if !a.is_finite() {
                return Err(Error::domain("semi-infinite domain needs a finite endpoint"));
            }
            half_line(&|x: f64| f(a + x), &opts, &mut evals)
        }
        Domain::LowerInfinite(b) => {
            if !b.is_finite() {
                return Err(Error::domain("semi-infinite domain needs a finite endpoint"));
            }
            half_line(&|x: f64| f(b - x), &opts, &mut evals)
        }
        Domain::WholeLine => {
            let right = half_line(&|x: f64| f(x), &opts, &mut evals);
            let left = half_line(&|x: f64| f(-x), &opts, &mut evals);
            match (right, left) {
                (Ok((r, er)), Ok((l, el))) => Ok((r + l, er + el)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        }
    };
    match res {
        Ok((value, err)) => {
            if !value.is_finite() {
                return Err(Error::Accuracy {
                    message: "integral is not finite".into(),
                    best_estimate: value,
                    error_estimate: f64::INFINITY,
                });
            }
            Ok(QuadratureResult { value, abs_error_estimate: err, evaluations: evals })
        }
        Err(e) => Err(e),
    }
}

/// One trapezoidal DE rule: `node(t)` returns `f(x(t)) x'(t)` or `None` once
/// the node collapses onto an endpoint or overflows.
struct DeRule<'a> {
    node: &'a dyn Fn(f64) -> Option<f64>,
    t_max: f64,
}

impl DeRule<'_> {
    /// Sum of node values over t = offset + k*step for k ∈ ℤ (both directions),
    /// stopping on each side once terms are negligible.
    fn sweep(&self, step: f64, offset: f64, scale: f64, evals: &mut usize) -> Result<f64> {
        let mut total = 0.0;
        for dir in [1.0, -1.0] {
            let mut k = 0u64;
            let mut small_run = 0;
            loop {
                let t = dir * (offset + k as f64 * step);
                if dir < 0.0 && offset == 0.0 && k == 0 {
                    k += 1;
                    continue;
                }
                if t.abs() > self.t_max {
                    break;
                }
                *evals += 1;
                let v = match (self.node)(t) {
                    Some(v) => v,
                    None => break,
                };
                if !v.is_finite() {
                    if t.abs() > 3.0 {
                        break;
                    }
                    return Err(Error::Accuracy {
                        message: format!("integrand not finite at transformed node t = {t}"),
                        best_estimate: f64::NAN,
                        error_estimate: f64::INFINITY,
                    });
                }
                total += v;
                if v.abs() <= 1e-19 * (scale.abs() + total.abs()) || v == 0.0 {
                    small_run += 1;
                    if small_run >= 3 && t.abs() > 1.0 {
                        break;
                    }
                } else {
                    small_run = 0;
                }
                k += 1;
            }
        }
        Ok(total)
    }

    /// Level-doubling trapezoid. Returns (value, error estimate, converged).
    fn run(&self, opts: &QuadOptions, evals: &mut usize) -> Result<(f64, f64, bool)> {
        let mut step = 0.5;
        let mut sum = self.sweep(step, 0.0, 0.0, evals)?;
        let mut value = sum * step;
        let mut err = f64::INFINITY;
        for level in 1..=opts.max_level {
            let half = step / 2.0;
            sum += self.sweep(step, half, sum, evals)?;
            step = half;
            let next = sum * step;
            err = (next - value).abs();
            value = next;
            if level >= 3 && err <= opts.target(value) {
                return Ok((value, err, true));
            }
            if *evals > opts.max_evaluations {
                break;
            }
        }
        Ok((value, err, false))
    }
}

fn tanh_sinh_panel<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    evals: &mut usize,
) -> Result<(f64, f64, bool)> {
    let half = 0.5 * (b - a);
    let node = |t: f64| -> Option<f64> {
        let u = FRAC_PI_2 * t.sinh();
        // distance from the nearer endpoint: (b-a) / (1 + e^{2|u|})
        let e = (2.0 * u.abs()).exp();
        let dist = (b - a) / (1.0 + e);
        if dist == 0.0 || !e.is_finite() {
            return None;
        }
        let x = if u < 0.0 { a + dist } else { b - dist };
        if x <= a || x >= b {
            return None;
        }
        let cosh_u = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        Some(f(x) * w)
    };
    DeRule { node: &node, t_max: 6.6 }.run(opts, evals)
}

fn adaptive_finite<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    depth: u32,
    evals: &mut usize,
) -> Result<(f64, f64)> {
    let panel_opts = QuadOptions { max_level: opts.max_level.min(7), ..*opts };
    let (value, err, ok) = tanh_sinh_panel(f, a, b, &panel_opts, evals)?;
    if ok {
        return Ok((value, err));
    }
    if depth >= opts.max_depth || *evals > opts.max_evaluations {
        return Err(Error::Accuracy {
            message: format!("tanh-sinh did not converge on [{a}, {b}]"),
            best_estimate: value,
            error_estimate: err,
        });
    }
    let mid = 0.5 * (a + b);
    let sub = QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..*opts };
    let (l, el) = adaptive_finite(f, a, mid, &sub, depth + 1, evals)?;
    let (r, er) = adaptive_finite(f, mid, b, &sub, depth + 1, evals)?;
    Ok((l + r, el + er))
}

/// ∫_0^∞ g(x) dx with the exp-sinh map x = exp(π/2 sinh t).
/// Falls back to `[0, L]` (adaptive) + `[L, ∞)` when the single map fails.
fn half_line(g: &dyn Fn(f64) -> f64, opts: &QuadOptions, evals: &mut usize) -> Result<(f64, f64)> {
    let node = |t: f64| -> Option<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let x = u.exp();
        if x == 0.0 || !x.is_finite() {
            return None;
        }
        let w = x * FRAC_PI_2 * t.cosh();
        if !w.is_finite() {
            return None;
        }
        let v = g(x);
        if v == 0.0 {
            return Some(0.0);
        }
        Some(v * w)
    };
    let (value, err, ok) = DeRule { node: &node, t_max: 6.6 }.run(opts, evals)?;
    if ok {
        return Ok((value, err));
    }
    // Split off a finite head and retry the tail from a shifted origin.
    let mut head_len = 1.0;
    let mut last_err = err;
    let mut last_val = value;
    for _ in 0..6 {
        let head = adaptive_finite(g, 0.0, head_len, &QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..*opts }, 0, evals);
        let tail_node = |t: f64| -> Option<f64> {
            let u = FRAC_PI_2 * t.sinh();
            let x = u.exp();
            if x == 0.0 || !x.is_finite() {
                return None;
            }
            let w = x * FRAC_PI_2 * t.cosh();
            if !w.is_finite() {
                return None;
            }
            Some(g(head_len + x) * w)
        };
        let tail = DeRule { node: &tail_node, t_max: 6.6 }.run(opts, evals)?;
        if let Ok((hv, he)) = head {
            let total = hv + tail.0;
            last_val = total;
            last_err = he + tail.1;
            if tail.2 {
                return Ok((total, last_err));
            }
        }
        head_len *= 8.0;
        if *evals > opts.max_evaluations {
            break;
        }
    }
    Err(Error::Accuracy {
        message: "exp-sinh quadrature did not converge on a half line".into(),
        best_estimate: last_val,
        error_estimate: last_err,
    })
}

/// Gauss–Kronrod-free composite Simpson on a uniform grid of samples;
/// used for quick table integrals where the samples already exist.
pub fn simpson_uniform(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * step * (values[0] + values[1]);
    }
    let (m, tail) = if (n - 1).is_multiple_of(2) { (n, 0.0) } else {
        // trailing interval by the 3-point quadratic through the last three samples
        let (y0, y1, y2) = (values[n - 3], values[n - 2], values[n - 1]);
        (n - 1, step * (-y0 + 8.0 * y1 + 5.0 * y2) / 12.0)
    };
    let mut s = values[0] + values[m - 1];
    for (i, v) in values.iter().enumerate().take(m - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * step / 3.0 + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::EULER_GAMMA;

    #[test]
    fn examples() {
        let r = integrate(|x| x, Domain::Finite(0.0, 1.0), 1e-12).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
        assert!(r.abs_error_estimate >= 0.0);
        let r = integrate(|x: f64| (-x).exp(), Domain::UpperInfinite(0.0), 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn euler_constant_from_exponential_representation() {
        // ∫_{-∞}^0 (e^x - 1 - x) / (|x| (e^{|x|} - 1)) dx = γ
        let f = |x: f64| {
            let y = -x;
            let num = (-y).exp_m1() + y;
            num / (y * y.exp_m1())
        };
        let r = integrate(f, Domain::LowerInfinite(0.0), 1e-13).unwrap();
        assert!((r.value - EULER_GAMMA).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn endpoint_singularities() {
        // ∫_0^1 x^{-3/4} dx = 4
        let r = integrate(|x: f64| x.powf(-0.75), Domain::Finite(0.0, 1.0), 1e-12).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10, "{}", r.value);
        // ∫_0^∞ x^{-1/2} e^{-x} dx = √π
        let r = integrate(|x: f64| x.powf(-0.5) * (-x).exp(), Domain::UpperInfinite(0.0), 1e-12).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // ∫_0^1 ln x dx = -1
        let r = integrate(|x: f64| x.ln(), Domain::Finite(0.0, 1.0), 1e-12).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn whole_line_and_reversed() {
        let r = integrate(|x: f64| (-x * x).exp(), Domain::WholeLine, 1e-12).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let r = integrate(|x: f64| x * x, Domain::Finite(2.0, 0.0), 1e-12).unwrap();
        assert!((r.value + 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kink_forces_bisection() {
        let r = integrate(|x: f64| (x - 0.3).abs(), Domain::Finite(0.0, 1.0), 1e-10).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| (x.sin() + 2.0).ln() * (-x).exp();
        let a = integrate(f, Domain::UpperInfinite(0.0), 1e-12).unwrap();
        let b = integrate(f, Domain::UpperInfinite(0.0), 1e-12).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn non_integrable_reports_accuracy_error() {
        let r = integrate(|x: f64| 1.0 / x, Domain::Finite(0.0, 1.0), 1e-10);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert!((simpson_uniform(&ys, 0.1) - 0.25).abs() < 1e-14);
        let ys: Vec<f64> = xs[..10].iter().map(|x| x * x).collect();
        assert!((simpson_uniform(&ys, 0.1) - 0.729 / 3.0).abs() < 1e-14);
    }
}
