//! Bernstein functions: triplet representation, the explicit constructions
//! for Beta, Gamma and r-gstable moment sequences, and related checks.
//!
//! A Bernstein function is `Φ(λ) = k + dλ + ∫ (1 - e^{-λx}) ρ(x) dx`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::momentseq::{GrowthDiagnostics, GrowthProfile, LogMomentSequence, WindowFit, PROFILE_TOL};
use crate::specfun::gamma::{ln_gamma, ln_gamma_signed, rgamma};
use crate::specfun::hypergeometric::gauss_2f1_ext_complement;
use crate::specfun::quadrature::{integrate_with, Domain, QuadOptions};
use crate::linalg::least_squares;

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ClosedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Points where a closed form and its triplet must agree.
pub const AGREEMENT_POINTS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
const AGREEMENT_TOL: f64 = 1e-7;
/// Slack for monotonicity and concavity checks.
pub const SHAPE_SLACK: f64 = 1e-9;

#[derive(Clone)]
pub struct BernsteinFunction {
    pub killing: f64,
    pub drift: f64,
    levy_density: Option<DensityFn>,
    closed_form: Option<ClosedFn>,
    pub validity_note: String,
}

impl fmt::Debug for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BernsteinFunction")
            .field("killing", &self.killing)
            .field("drift", &self.drift)
            .field("levy_density", &self.levy_density.is_some())
            .field("closed_form", &self.closed_form.is_some())
            .field("validity_note", &self.validity_note)
            .finish()
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-15, rel_tol: 1e-11, ..QuadOptions::default() }
}

impl BernsteinFunction {
    /// Builds and validates a Bernstein function: non-negative killing, drift
    /// and density, `∫ min(1, x) ρ < ∞`, and agreement with `closed_form`.
    pub fn new(
        killing: f64,
        drift: f64,
        levy_density: Option<DensityFn>,
        closed_form: Option<ClosedFn>,
        validity_note: impl Into<String>,
    ) -> Result<Self> {
        if !(killing >= 0.0 && killing.is_finite()) {
            return Err(Error::domain(format!("killing term must be finite and >= 0, got {killing}")));
        }
        if !(drift >= 0.0 && drift.is_finite()) {
            return Err(Error::domain(format!("drift must be finite and >= 0, got {drift}")));
        }
        let phi = BernsteinFunction { killing, drift, levy_density, closed_form, validity_note: validity_note.into() };
        if let Some(rho) = &phi.levy_density {
            for i in 0..=90 {
                let x = 10f64.powf(-6.0 + i as f64 / 10.0);
                let v = rho(x);
                if !(v >= 0.0) {
                    return Err(Error::domain(format!("Levy density is negative or undefined at x = {x}: {v}")));
                }
            }
            let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-6, ..QuadOptions::default() };
            let head = integrate_with(|x| x * rho(x), Domain::Finite(0.0, 1.0), opts);
            let tail = integrate_with(|x| rho(x), Domain::UpperInfinite(1.0), opts);
            match (head, tail) {
                (Ok(_), Ok(_)) => {}
                _ => return Err(Error::domain("integral of min(1, x) times the Levy density is not finite")),
            }
        }
        if phi.closed_form.is_some() {
            for &lam in &AGREEMENT_POINTS {
                let closed = phi.evaluate(lam)?;
                let triplet = phi.evaluate_triplet(lam)?;
                if (closed - triplet).abs() > AGREEMENT_TOL * closed.abs().max(1e-300) {
                    return Err(Error::domain(format!(
                        "closed form {closed} and triplet {triplet} disagree at lambda = {lam}"
                    )));
                }
            }
        }
        Ok(phi)
    }

    /// Φ(λ) = dλ + k with no jumps.
    pub fn linear(killing: f64, drift: f64) -> Result<Self> {
        let closed: ClosedFn = Arc::new(move |l| killing + drift * l);
        BernsteinFunction::new(killing, drift, None, Some(closed), "killing + drift only")
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    pub fn levy_density(&self, x: f64) -> Option<f64> {
        self.levy_density.as_ref().map(|r| r(x))
    }

    /// Φ(λ), from the closed form when present.
    pub fn evaluate(&self, lam: f64) -> Result<f64> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::domain(format!("Bernstein functions are evaluated at lambda > 0, got {lam}")));
        }
        match &self.closed_form {
            Some(f) => Ok(f(lam)),
            None => self.evaluate_triplet(lam),
        }
    }

    /// Φ(λ) from killing, drift and quadrature of the Lévy density.
    pub fn evaluate_triplet(&self, lam: f64) -> Result<f64> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::domain(format!("Bernstein functions are evaluated at lambda > 0, got {lam}")));
        }
        let mut v = self.killing + self.drift * lam;
        if let Some(rho) = &self.levy_density {
            let r = integrate_with(|x| -(-lam * x).exp_m1() * rho(x), Domain::UpperInfinite(0.0), quad_opts())?;
            v += r.value;
        }
        Ok(v)
    }

    /// Positivity, monotonicity and concavity along `grid` (finite differences).
    pub fn shape_check(&self, grid: &[f64]) -> Result<ShapeReport> {
        let vals: Vec<f64> = grid.iter().map(|&l| self.evaluate(l)).collect::<Result<_>>()?;
        Ok(shape_of(grid, &vals))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub positive: bool,
    pub non_decreasing: bool,
    pub concave: bool,
}

fn shape_of(grid: &[f64], vals: &[f64]) -> ShapeReport {
    let positive = vals.iter().all(|v| *v > 0.0);
    let non_decreasing = vals.windows(2).all(|w| w[1] >= w[0] - SHAPE_SLACK * w[0].abs().max(1.0));
    let mut concave = true;
    for i in 1..grid.len().saturating_sub(1) {
        let s1 = (vals[i] - vals[i - 1]) / (grid[i] - grid[i - 1]);
        let s2 = (vals[i + 1] - vals[i]) / (grid[i + 1] - grid[i]);
        if s2 > s1 + SHAPE_SLACK * s1.abs().max(1.0) {
            concave = false;
        }
    }
    ShapeReport { positive, non_decreasing, concave }
}

#[derive(Debug, Clone)]
pub struct BernsteinVerdict {
    pub is_bernstein: bool,
    pub condition: String,
    pub phi: Option<BernsteinFunction>,
    /// λ where the candidate `μ_λ / μ_{λ-1}` is negative, or failing monotonicity/concavity.
    pub counterexample_point: Option<f64>,
    pub jurek_class: Option<bool>,
    pub notes: Vec<String>,
}

/// Product of signed Γ values, `Π Γ(p) / Π Γ(q)`; zero at denominator poles.
fn gamma_ratio(nums: &[f64], dens: &[f64]) -> f64 {
    let mut log = 0.0;
    let mut sign = 1.0;
    for &p in nums {
        let (l, s) = ln_gamma_signed(p);
        if s == 0.0 {
            return f64::INFINITY;
        }
        log += l;
        sign *= s;
    }
    for &q in dens {
        let (l, s) = ln_gamma_signed(q);
        if s == 0.0 {
            return 0.0;
        }
        log -= l;
        sign *= s;
    }
    sign * log.exp()
}

/// First λ on a fine grid where `candidate` is negative, decreasing or convex.
fn first_violation(candidate: &dyn Fn(f64) -> f64) -> Option<(f64, &'static str)> {
    let grid: Vec<f64> = (1..=400).map(|i| i as f64 * 0.05).collect();
    let vals: Vec<f64> = grid.iter().map(|&l| candidate(l)).collect();
    for (l, v) in grid.iter().zip(&vals) {
        if *v < 0.0 {
            return Some((*l, "negative"));
        }
    }
    for i in 1..grid.len() {
        if vals[i] < vals[i - 1] - SHAPE_SLACK * vals[i - 1].abs().max(1.0) {
            return Some((grid[i], "decreasing"));
        }
    }
    for i in 1..grid.len() - 1 {
        let d2 = vals[i + 1] - 2.0 * vals[i] + vals[i - 1];
        if d2 > 1e-7 * vals[i].abs().max(1.0) {
            return Some((grid[i], "convex"));
        }
    }
    None
}

fn not_bernstein(condition: &str, candidate: &dyn Fn(f64) -> f64, jurek: Option<bool>, mut notes: Vec<String>) -> BernsteinVerdict {
    let point = first_violation(candidate).map(|(l, why)| {
        notes.push(format!("candidate ratio is {why} at lambda = {l}"));
        l
    });
    BernsteinVerdict { is_bernstein: false, condition: condition.into(), phi: None, counterexample_point: point, jurek_class: jurek, notes }
}

fn check_positive(names: &[(&str, f64)]) -> Result<()> {
    for (n, v) in names {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{n} must be a finite positive number, got {v}")));
        }
    }
    Ok(())
}

fn beta_rho(a: f64, b: f64, s: f64) -> DensityFn {
    if b == 1.0 {
        return Arc::new(move |x: f64| b * (-a * x / s).exp());
    }
    if s == 1.0 {
        return Arc::new(move |x: f64| b * ((1.0 - a - b) * x).exp());
    }
    Arc::new(move |x: f64| {
        let w = (-x / s).exp();
        if w == 0.0 {
            return 0.0;
        }
        // a terminating parameter keeps the series exact
        if (1.0 - s) <= 0.0 && (1.0 - s) == (1.0 - s).floor() {
            b * ((1.0 - (a + b) / s) * x).exp() * gauss_2f1_ext_complement(1.0 + b, 1.0 - s, 2.0, w).unwrap_or(f64::NAN)
        } else {
            b * (-a * x / s).exp() * gauss_2f1_ext_complement(1.0 + s, 1.0 - b, 2.0, w).unwrap_or(f64::NAN)
        }
    })
}

/// The two hypergeometric forms of the Beta-power Lévy density at `x`.
pub fn rho_crosscheck(a: f64, b: f64, s: f64, x: f64) -> Result<(f64, f64)> {
    check_positive(&[("a", a), ("b", b), ("s", s), ("x", x)])?;
    if !(b.min(s) <= 1.0 && a >= s) {
        return Err(Error::domain(format!("({a}, {b}, {s}) is outside the Bernstein region")));
    }
    let w = (-x / s).exp();
    let f1 = b * (-a * x / s).exp() * gauss_2f1_ext_complement(1.0 + s, 1.0 - b, 2.0, w)?;
    let f2 = b * ((1.0 - (a + b) / s) * x).exp() * gauss_2f1_ext_complement(1.0 + b, 1.0 - s, 2.0, w)?;
    Ok((f1, f2))
}

/// Bernstein character of the Beta-power moments `Γ(a+sn)Γ(a+b)/(Γ(a)Γ(a+b+sn))`.
pub fn beta_bernstein(a: f64, b: f64, s: f64) -> Result<BernsteinVerdict> {
    check_positive(&[("a", a), ("b", b), ("s", s)])?;
    let condition = "min(b, s) <= 1 and a >= s";
    let jurek = 2.0 * a + b + s + b * s >= 1.0;
    let candidate = move |l: f64| gamma_ratio(&[a + s * l, a + b + s * (l - 1.0)], &[a + s * (l - 1.0), a + b + s * l]);
    if !(b.min(s) <= 1.0 && a >= s) {
        return Ok(not_bernstein(condition, &candidate, Some(jurek), Vec::new()));
    }
    let mut notes = Vec::new();
    let killing = if a == s {
        notes.push("a = s: killing term taken as 0 since 1/Gamma(0) = 0".into());
        0.0
    } else {
        (ln_gamma(a) + ln_gamma(a + b - s) - ln_gamma(a + b) - ln_gamma(a - s)).exp()
    };
    let phi = BernsteinFunction::new(
        killing,
        0.0,
        Some(beta_rho(a, b, s)),
        Some(Arc::new(candidate)),
        format!("beta({a}, {b}, {s})"),
    )?;
    Ok(BernsteinVerdict {
        is_bernstein: true,
        condition: condition.into(),
        phi: Some(phi),
        counterexample_point: None,
        jurek_class: Some(jurek),
        notes,
    })
}

/// Bernstein character of the Gamma moments of order one, `Γ(a+sn)/Γ(a)`.
pub fn gamma1_bernstein(a: f64, s: f64) -> Result<BernsteinVerdict> {
    check_positive(&[("a", a), ("s", s)])?;
    let condition = "min(1, a) >= s";
    let candidate = move |l: f64| gamma_ratio(&[a + s * l], &[a + s * (l - 1.0)]);
    if !(a.min(1.0) >= s) {
        return Ok(not_bernstein(condition, &candidate, None, Vec::new()));
    }
    let phi = if s == 1.0 {
        BernsteinFunction::linear(a - 1.0, 1.0)?
    } else {
        let killing = if a == s { 0.0 } else { (ln_gamma(a) - ln_gamma(a - s)).exp() };
        let c = rgamma(1.0 - s);
        let rho: DensityFn = Arc::new(move |x: f64| {
            let base = -(-x / s).exp_m1();
            c * (-a * x / s).exp() / base.powf(1.0 + s)
        });
        BernsteinFunction::new(killing, 0.0, Some(rho), Some(Arc::new(candidate)), format!("gamma1({a}, {s})"))?
    };
    Ok(BernsteinVerdict { is_bernstein: true, condition: condition.into(), phi: Some(phi), counterexample_point: None, jurek_class: None, notes: Vec::new() })
}

/// Bernstein character of the r-gstable(a, m) moments.
///
/// The returned Φ is the function displayed with the triplet, whose closed
/// form is `a^{(m-a)/a} Γ((λ+m-a)/a) / Γ((λ+a-1)/a)`. It reproduces the
/// ratios of [`crate::momentseq::rgstable_seq`] only when `a = 1`.
pub fn rgstable_bernstein(a: f64, m: f64) -> Result<BernsteinVerdict> {
    check_positive(&[("a", a)])?;
    if !m.is_finite() || m <= a {
        return Err(Error::RgstableUndefined(format!("requires 0 < a < m, got a = {a}, m = {m}")));
    }
    let condition = "1 <= a < m <= 3a - 1";
    let scale = ((m - a) / a) * a.ln();
    let candidate = move |l: f64| scale.exp() * gamma_ratio(&[(l + m - a) / a], &[(l + a - 1.0) / a]);
    let boundary = 3.0 * a - 1.0;
    if !(1.0 <= a && m <= boundary + 1e-12) {
        return Ok(not_bernstein(condition, &candidate, None, Vec::new()));
    }
    if (m - boundary).abs() <= 1e-12 {
        let d = a.powf(1.0 - 1.0 / a);
        let phi = BernsteinFunction::linear(d * (a - 1.0), d)?;
        return Ok(BernsteinVerdict { is_bernstein: true, condition: condition.into(), phi: Some(phi), counterexample_point: None, jurek_class: None, notes: Vec::new() });
    }
    let coeff = m + 1.0 - 2.0 * a;
    if coeff < 0.0 {
        let note = format!("m < 2a - 1: the Levy density coefficient m + 1 - 2a = {coeff} is negative");
        return Ok(not_bernstein(condition, &candidate, None, vec![note]));
    }
    let killing = scale.exp() * gamma_ratio(&[m / a - 1.0], &[]) * rgamma(1.0 - 1.0 / a);
    let c = scale.exp() * coeff * rgamma(3.0 - (m + 1.0) / a);
    let expo = (m + 1.0) / a - 1.0;
    let rho: DensityFn = Arc::new(move |x: f64| c * (-(m - a) * x).exp() / (-(-a * x).exp_m1()).powf(expo));
    let phi = BernsteinFunction::new(killing.max(0.0), 0.0, Some(rho), Some(Arc::new(candidate)), format!("rgstable({a}, {m})"))?;
    Ok(BernsteinVerdict { is_bernstein: true, condition: condition.into(), phi: Some(phi), counterexample_point: None, jurek_class: None, notes: Vec::new() })
}

/// `2(2 - 3/(1+λ))`, or its half shift `Φ(λ + 1/2)`.
pub fn catalan_phi(lam: f64, shifted: bool) -> f64 {
    let l = if shifted { lam + 0.5 } else { lam };
    2.0 * (2.0 - 3.0 / (1.0 + l))
}

/// The half-shifted Catalan Φ as a Bernstein function: density `6 e^{-3x/2}`.
pub fn catalan_bernstein() -> Result<BernsteinFunction> {
    BernsteinFunction::new(
        0.0,
        0.0,
        Some(Arc::new(|x: f64| 6.0 * (-1.5 * x).exp())),
        Some(Arc::new(|l| catalan_phi(l, true))),
        "half-shifted Catalan",
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderValue {
    pub value: f64,
    pub representation_value: Option<f64>,
    pub negative: bool,
}

fn remainder_kernel(t: f64, x: f64) -> f64 {
    if x < 1e-6 {
        return -0.5 * t * (1.0 - t);
    }
    // ((1-t)(1-e^{-x}) + e^{-(1-t)x} - 1) / (x (1-e^{-x}))
    let one_minus = -(-x).exp_m1();
    ((1.0 - t) * one_minus + (-(1.0 - t) * x).exp_m1()) / (x * one_minus)
}

/// The remainder candidate for `M_t`: `Γ(1-t+λ)/(λ^{1-t}Γ(λ))` for t < 1,
/// the pseudo-exponent `Γ(1+λt)/(λ^t Γ(1-t+λt))` for t > 1.
pub fn remainder_phi(t: f64, lam: f64) -> Result<RemainderValue> {
    check_positive(&[("t", t), ("lambda", lam)])?;
    if t == 1.0 {
        return Err(Error::domain("remainder_phi requires t != 1"));
    }
    if t < 1.0 {
        let value = (ln_gamma(1.0 - t + lam) - (1.0 - t) * lam.ln() - ln_gamma(lam)).exp();
        let rep = integrate_with(|x| (-lam * x).exp() * remainder_kernel(t, x), Domain::UpperInfinite(0.0), quad_opts())?;
        return Ok(RemainderValue { value, representation_value: Some(rep.value.exp()), negative: value < 0.0 });
    }
    let value = if t == 2.0 {
        (4.0 * lam - 2.0) / lam
    } else {
        gamma_ratio(&[1.0 + lam * t], &[1.0 - t + lam * t]) / lam.powf(t)
    };
    Ok(RemainderValue { value, representation_value: None, negative: value < 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderProbes {
    pub t: f64,
    pub shape: ShapeReport,
    /// the exponent kernel is ≤ 0 everywhere sampled, i.e. 1/Φ is log completely monotone
    pub kernel_nonpositive: bool,
}

/// Numeric probes for the t ∈ (0,1) remainder candidate. These are evidence only.
pub fn remainder_probes(t: f64, grid: &[f64]) -> Result<RemainderProbes> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain("remainder probes need t in (0, 1)"));
    }
    let vals: Vec<f64> = grid.iter().map(|&l| remainder_phi(t, l).map(|r| r.value)).collect::<Result<_>>()?;
    let kernel_nonpositive = (0..=200).all(|i| remainder_kernel(t, 10f64.powf(-4.0 + i as f64 * 0.03)) <= 0.0);
    Ok(RemainderProbes { t, shape: shape_of(grid, &vals), kernel_nonpositive })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub max_abs_log_error: f64,
    pub worst_n: u64,
    pub n_max: u64,
    pub pass: bool,
    /// first k with Φ(k) ≤ 0
    pub failed_k: Option<u64>,
}

/// Compares `Σ_{k≤n} log Φ(k)` with `seq.eval(n)` for n ≤ n_max.
pub fn factorization_check(
    phi: &dyn Fn(f64) -> Result<f64>,
    seq: &LogMomentSequence,
    n_max: u64,
    tol: f64,
) -> Result<FactorizationReport> {
    let mut acc = 0.0;
    let mut worst = 0.0;
    let mut worst_n = 0;
    for k in 1..=n_max {
        let v = phi(k as f64)?;
        if !(v > 0.0) {
            return Ok(FactorizationReport { max_abs_log_error: f64::INFINITY, worst_n: k, n_max, pass: false, failed_k: Some(k) });
        }
        acc += v.ln();
        let err = (acc - seq.try_eval(k)?).abs();
        if err > worst {
            worst = err;
            worst_n = k;
        }
    }
    Ok(FactorizationReport { max_abs_log_error: worst, worst_n, n_max, pass: worst <= tol, failed_k: None })
}

/// Spectral data of Φ'/Φ: the density κ directly, or the Pick density η.
#[derive(Clone, Default)]
pub struct SpectralData {
    pub kappa: Option<DensityFn>,
    pub eta: Option<DensityFn>,
    /// points where η jumps, to split the quadrature
    pub eta_breakpoints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfDecompReport {
    pub kappa_from_eta: Option<Vec<f64>>,
    pub ratio_monotone: bool,
}

/// `κ(x) = x ∫ e^{-xt} η(t) dt`.
pub fn kappa_from_eta(eta: &dyn Fn(f64) -> f64, breakpoints: &[f64], x: f64) -> Result<f64> {
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|b| *b > 0.0 && b.is_finite()).collect();
    pts.sort_by(|p, q| p.total_cmp(q));
    pts.dedup();
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, ..QuadOptions::default() };
    let mut lo = 0.0;
    let mut total = 0.0;
    for &p in &pts {
        total += integrate_with(|t| (-x * t).exp() * eta(t), Domain::Finite(lo, p), opts)?.value;
        lo = p;
    }
    total += integrate_with(|t| (-x * t).exp() * eta(t), Domain::UpperInfinite(lo), opts)?.value;
    Ok(x * total)
}

/// Whether `(e^x - 1)^{-1} κ(x)` is non-increasing along `grid`.
pub fn selfdecomp_check(sd: &SpectralData, grid: &[f64]) -> Result<SelfDecompReport> {
    if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("grid must be positive and strictly increasing"));
    }
    let (kappa, from_eta) = match (&sd.eta, &sd.kappa) {
        (Some(eta), _) => {
            let v: Vec<f64> = grid.iter().map(|&x| kappa_from_eta(eta.as_ref(), &sd.eta_breakpoints, x)).collect::<Result<_>>()?;
            (v.clone(), Some(v))
        }
        (None, Some(k)) => (grid.iter().map(|&x| k(x)).collect(), None),
        (None, None) => return Err(Error::domain("spectral data needs kappa or eta")),
    };
    let ratio: Vec<f64> = grid.iter().zip(&kappa).map(|(x, k)| k / x.exp_m1()).collect();
    let ratio_monotone = ratio.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    Ok(SelfDecompReport { kappa_from_eta: from_eta, ratio_monotone })
}

/// `|log Φ(x) - log Φ(1) - ∫ (e^{-t} - e^{-xt}) κ(t)/t dt|`.
pub fn logphi_representation_check(phi: &dyn Fn(f64) -> f64, kappa: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    check_positive(&[("x", x)])?;
    let lhs = phi(x).ln() - phi(1.0).ln();
    if x == 1.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, ..QuadOptions::default() };
    let r = integrate_with(
        |t| {
            // e^{-t} - e^{-xt} = e^{-t}(1 - e^{-(x-1)t})
            let diff = -(-t).exp() * (-(x - 1.0) * t).exp_m1();
            diff * kappa(t) / t
        },
        Domain::UpperInfinite(0.0),
        opts,
    )?;
    Ok((lhs - r.value).abs())
}

/// Estimates ℓ (limsup) and ℓ̄ (liminf) of `Ψ(x)/(x log x)`, `Ψ(x) = ∫_0^x log Φ`.
///
/// Ψ is fitted as `ℓ x log x + L x + α log x + β` on windows of the tail third
/// of geometric samples; `c_hat = exp(L/ℓ)` when the windows agree.
pub fn growth_of_phi(phi: &dyn Fn(f64) -> f64, x_max: f64) -> Result<GrowthProfile> {
    if !(x_max >= 100.0) || !x_max.is_finite() {
        return Err(Error::domain(format!("growth_of_phi needs x_max >= 100, got {x_max}")));
    }
    let log_phi = |t: f64| {
        let v = phi(t);
        if v > 0.0 { v.ln() } else { f64::NAN }
    };
    let count = 90usize;
    let xs: Vec<f64> = (0..count).map(|i| x_max.powf(i as f64 / (count - 1) as f64)).collect();
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, ..QuadOptions::default() };
    let mut psi = Vec::with_capacity(count);
    let mut acc = 0.0;
    let mut lo = 0.0;
    for &x in &xs {
        if phi(x) <= 0.0 {
            return Err(Error::domain(format!("Phi({x}) <= 0")));
        }
        let r = integrate_with(log_phi, Domain::Finite(lo, x), opts)
            .map_err(|e| match e {
                Error::Accuracy { .. } => Error::domain("Phi <= 0 or log Phi not integrable on the sample range"),
                other => other,
            })?;
        acc += r.value;
        psi.push(acc);
        lo = x;
    }
    let tail_start = 2 * count / 3;
    let width = count - tail_start - 8;
    let mut windows = Vec::new();
    for shift in [8usize, 4, 0] {
        let hi = count - shift;
        let lo_i = hi - width;
        let rows: Vec<Vec<f64>> = xs[lo_i..hi].iter().map(|&x| vec![x * x.ln(), x, x.ln(), 1.0]).collect();
        let beta = least_squares(&rows, &psi[lo_i..hi]).ok_or_else(|| Error::domain("growth fit is rank deficient"))?;
        windows.push(WindowFit { n_lo: xs[lo_i].round() as u64, n_hi: xs[hi - 1].round() as u64, g: beta[0], linear: beta[1], rms_residual: 0.0 });
    }
    let raw_hi = windows.iter().map(|w| w.g).fold(f64::NEG_INFINITY, f64::max);
    let raw_lo = windows.iter().map(|w| w.g).fold(f64::INFINITY, f64::min);
    let g_hi = raw_hi.clamp(0.0, 1.0);
    let g_lo = raw_lo.clamp(0.0, 1.0);
    let linear = windows.last().expect("windows").linear;
    let g = 0.5 * (g_hi + g_lo);
    let c_hat = if (g_hi - g_lo).abs() <= PROFILE_TOL && g > 0.05 { Some((linear / g).exp()) } else { None };
    let xl = x_max;
    Ok(GrowthProfile {
        g_hi,
        g_lo,
        c_hat,
        n_used: count as u64,
        diagnostics: GrowthDiagnostics { windows, raw_ratio: psi[count - 1] / (xl * xl.ln()), linear },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentseq::{beta_power, binomial_family, factorial_power, gamma_order1, rgstable_seq, BinomialKind};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn evaluate_examples() {
        let phi = BernsteinFunction::linear(0.0, 1.0).unwrap();
        assert_eq!(phi.evaluate(2.0).unwrap(), 2.0);
        let phi = BernsteinFunction::new(0.0, 0.0, Some(Arc::new(|x: f64| (-x).exp())), None, "exp").unwrap();
        assert!(rel(phi.evaluate(1.0).unwrap(), 0.5) < 1e-10);
        let phi = BernsteinFunction::linear(1.0, 0.0).unwrap();
        assert_eq!(phi.evaluate(7.0).unwrap(), 1.0);
        assert!(phi.evaluate(0.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_triplets() {
        assert!(BernsteinFunction::new(-1.0, 0.0, None, None, "").is_err());
        assert!(BernsteinFunction::new(0.0, 0.0, Some(Arc::new(|x: f64| -x)), None, "").is_err());
        // ∫ min(1,x) x^{-2.5} diverges at 0
        assert!(BernsteinFunction::new(0.0, 0.0, Some(Arc::new(|x: f64| x.powf(-2.5))), None, "").is_err());
        // closed form inconsistent with the triplet
        let bad: ClosedFn = Arc::new(|l| l);
        assert!(BernsteinFunction::new(0.0, 0.0, Some(Arc::new(|x: f64| (-x).exp())), Some(bad), "").is_err());
    }

    #[test]
    fn beta_examples() {
        let v = beta_bernstein(1.0, 1.0, 1.0).unwrap();
        assert!(v.is_bernstein);
        let phi = v.phi.unwrap();
        assert_eq!(phi.killing, 0.0);
        for n in 1..=5 {
            let nf = n as f64;
            assert!(rel(phi.evaluate_triplet(nf).unwrap(), nf / (nf + 1.0)) < 1e-8);
        }
        let v = beta_bernstein(0.5, 1.5, 1.0).unwrap();
        assert!(!v.is_bernstein && v.phi.is_none());
        let p = v.counterexample_point.unwrap();
        assert!(p < 0.5);
        let v = beta_bernstein(2.0, 3.0, 1.0).unwrap();
        let phi = v.phi.unwrap();
        assert!((phi.killing - 0.25).abs() < 1e-14);
        assert!(rel(phi.levy_density(1.0).unwrap(), 3.0 * (-4.0f64).exp()) < 1e-14);
        for n in 1..=12 {
            let nf = n as f64;
            assert!(rel(phi.evaluate_triplet(nf).unwrap(), (nf + 1.0) / (nf + 4.0)) < 1e-8);
        }
        assert_eq!(v.jurek_class, Some(true));
    }

    #[test]
    fn beta_general_parameters() {
        // neither b nor s equal to 1, including integer b - s
        for &(a, b, s) in &[(1.0, 0.5, 0.5), (2.0, 2.5, 0.5), (0.7, 0.3, 0.6), (3.0, 0.8, 2.0)] {
            let v = beta_bernstein(a, b, s).unwrap();
            assert!(v.is_bernstein, "({a},{b},{s})");
            let seq = beta_power(a, b, s).unwrap();
            let phi = v.phi.unwrap();
            for n in 1..=6u64 {
                let ratio = (seq.eval(n) - seq.eval(n - 1)).exp();
                assert!(rel(phi.evaluate_triplet(n as f64).unwrap(), ratio) < 1e-7, "({a},{b},{s}) n = {n}");
            }
        }
    }

    #[test]
    fn rho_examples() {
        let (f1, f2) = rho_crosscheck(2.0, 3.0, 1.0, 1.0).unwrap();
        assert!(rel(f1, 3.0 * (-4.0f64).exp()) < 1e-13 && rel(f2, f1) < 1e-13);
        let (f1, f2) = rho_crosscheck(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(rel(f1, (-2.0f64).exp()) < 1e-14 && rel(f2, f1) < 1e-14);
        let (f1, f2) = rho_crosscheck(1.0, 2.0, 0.5, 0.5).unwrap();
        assert!(rel(f1, 0.386_942_645_440_640_2) < 1e-13);
        assert!(rel(f2, f1) < 1e-10);
        assert!(rho_crosscheck(0.5, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn gamma1_examples() {
        let phi = gamma1_bernstein(1.0, 1.0).unwrap().phi.unwrap();
        assert_eq!(phi.evaluate(3.0).unwrap(), 3.0);
        let phi = gamma1_bernstein(2.0, 1.0).unwrap().phi.unwrap();
        assert_eq!(phi.evaluate(3.0).unwrap(), 4.0);
        let v = gamma1_bernstein(1.0, 0.5).unwrap();
        let phi = v.phi.unwrap();
        assert!(rel(phi.killing, 0.564_189_583_547_756_3) < 1e-13);
        let seq = gamma_order1(1.0, 0.5).unwrap();
        let triplet = |l: f64| phi.evaluate_triplet(l);
        let rep = factorization_check(&triplet, &seq, 10, 1e-7).unwrap();
        assert!(rep.pass, "{rep:?}");
        let v = gamma1_bernstein(0.5, 0.8).unwrap();
        assert!(!v.is_bernstein);
        assert!(v.counterexample_point.is_some());
    }

    #[test]
    fn rgstable_examples() {
        let v = rgstable_bernstein(1.0, 2.0).unwrap();
        let phi = v.phi.unwrap();
        assert_eq!(phi.evaluate(5.0).unwrap(), 5.0);
        let f = |l: f64| phi.evaluate(l);
        assert!(factorization_check(&f, &rgstable_seq(1.0, 2.0).unwrap(), 30, 1e-12).unwrap().pass);
        let v = rgstable_bernstein(2.0, 4.0).unwrap();
        let phi = v.phi.unwrap();
        let two_over_sqrt_pi = std::f64::consts::FRAC_2_SQRT_PI;
        assert!(rel(phi.killing, two_over_sqrt_pi) < 1e-13);
        let x = 0.7f64;
        let expect = two_over_sqrt_pi * (-2.0 * x).exp() * (1.0 - (-2.0 * x).exp()).powf(-1.5);
        assert!(rel(phi.levy_density(x).unwrap(), expect) < 1e-13);
        assert!(!rgstable_bernstein(1.0, 3.0).unwrap().is_bernstein);
        assert!(matches!(rgstable_bernstein(2.0, 1.0), Err(Error::RgstableUndefined(_))));
        let v = rgstable_bernstein(2.0, 2.5).unwrap();
        assert!(!v.is_bernstein && !v.notes.is_empty());
    }

    #[test]
    fn catalan_examples() {
        assert_eq!(catalan_phi(3.0, false), 2.5);
        assert_eq!(catalan_phi(1.0, false) * catalan_phi(2.0, false) * catalan_phi(3.0, false), 5.0);
        assert!((catalan_phi(0.25, false) + 0.8).abs() < 1e-15);
        assert_eq!(catalan_phi(0.5, true) * catalan_phi(1.5, true), 2.0);
        let phi = catalan_bernstein().unwrap();
        let raney = binomial_family(BinomialKind::Raney, 2.0, 1.0).unwrap();
        let f = |l: f64| Ok(catalan_phi(l, false));
        assert!(factorization_check(&f, &raney, 25, 1e-12).unwrap().pass);
        assert!(rel(phi.evaluate_triplet(2.5).unwrap(), catalan_phi(2.5, true)) < 1e-10);
    }

    #[test]
    fn remainder_examples() {
        let r = remainder_phi(0.5, 1.0).unwrap();
        assert!(rel(r.value, 0.886_226_925_452_758) < 1e-13);
        assert!(rel(r.representation_value.unwrap(), r.value) < 1e-7);
        let r = remainder_phi(2.0, 0.25).unwrap();
        assert!(r.negative && (r.value + 4.0).abs() < 1e-14);
        let r = remainder_phi(2.0, 1.0).unwrap();
        assert!(!r.negative && r.value == 2.0);
        // general t > 1 agrees with the exact t = 2 form
        let g = gamma_ratio(&[1.0 + 2.0 * 0.8], &[1.0 - 2.0 + 2.0 * 0.8]) / 0.64;
        assert!(rel(g, (4.0 * 0.8 - 2.0) / 0.8) < 1e-13);
        assert!(remainder_phi(1.0, 1.0).is_err());
        let p = remainder_probes(0.5, &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(p.shape.positive && p.shape.non_decreasing && p.kernel_nonpositive);
    }

    #[test]
    fn factorization_examples() {
        let id = |l: f64| Ok(l);
        let r = factorization_check(&id, &factorial_power(1.0).unwrap(), 20, 1e-12).unwrap();
        assert!(r.pass && r.max_abs_log_error < 1e-12);
        let r = factorization_check(&id, &factorial_power(2.0).unwrap(), 20, 1e-6).unwrap();
        assert!(!r.pass);
        assert!((r.max_abs_log_error - crate::specfun::ln_gamma(21.0)).abs() < 1e-9);
        let neg = |l: f64| Ok(l - 1.5);
        let r = factorization_check(&neg, &factorial_power(1.0).unwrap(), 5, 1e-6).unwrap();
        assert_eq!(r.failed_k, Some(1));
    }

    #[test]
    fn selfdecomp_examples() {
        let grid: Vec<f64> = (1..=30).map(|i| i as f64 * 0.2).collect();
        let sd = SpectralData { eta: Some(Arc::new(|_| 1.0)), ..Default::default() };
        let r = selfdecomp_check(&sd, &grid).unwrap();
        assert!(r.ratio_monotone);
        assert!(r.kappa_from_eta.unwrap().iter().all(|k| (k - 1.0).abs() < 1e-10));
        let sd = SpectralData { eta: Some(Arc::new(|t| if t < 1.0 { 1.0 } else { 0.0 })), eta_breakpoints: vec![1.0], ..Default::default() };
        let r = selfdecomp_check(&sd, &grid).unwrap();
        assert!(r.ratio_monotone);
        for (x, k) in grid.iter().zip(r.kappa_from_eta.unwrap()) {
            assert!((k - (1.0 - (-x).exp())).abs() < 1e-10);
        }
        let sd = SpectralData { kappa: Some(Arc::new(|x: f64| x * x.exp_m1())), ..Default::default() };
        assert!(!selfdecomp_check(&sd, &grid).unwrap().ratio_monotone);
    }

    #[test]
    fn logphi_examples() {
        let r = logphi_representation_check(&|l| l, &|_| 1.0, 2.0).unwrap();
        assert!(r < 1e-8);
        assert_eq!(logphi_representation_check(&|l| l, &|_| 1.0, 1.0).unwrap(), 0.0);
        let r = logphi_representation_check(&|l| l / (1.0 + l), &|t: f64| -(-t).exp_m1(), 3.0).unwrap();
        assert!(r < 1e-6);
    }

    #[test]
    fn growth_of_phi_examples() {
        let g = growth_of_phi(&|l| l, 1e6).unwrap();
        assert!((g.g_hi - 1.0).abs() < 0.02 && (g.g_lo - 1.0).abs() < 0.02, "{g:?}");
        let g = growth_of_phi(&|l| l / (1.0 + l), 1e6).unwrap();
        assert!(g.g_hi < 0.02);
        let g = growth_of_phi(&|l: f64| l.sqrt(), 1e6).unwrap();
        assert!((g.g() - 0.5).abs() < 0.02);
        assert!(growth_of_phi(&|l| l - 2.0, 1e6).is_err());
    }

    #[test]
    fn shapes() {
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        for phi in [
            beta_bernstein(2.0, 3.0, 1.0).unwrap().phi.unwrap(),
            gamma1_bernstein(1.0, 0.5).unwrap().phi.unwrap(),
            catalan_bernstein().unwrap(),
        ] {
            let s = phi.shape_check(&grid).unwrap();
            assert!(s.positive && s.non_decreasing && s.concave, "{phi:?}");
        }
    }
}
