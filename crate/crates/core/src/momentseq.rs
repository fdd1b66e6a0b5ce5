//! Moment-sequence families in log scale and growth-profile estimation.
//!
//! Everything is stored as `n ↦ log μ_n`: `(n!)^t` leaves binary64 near
//! `n ≈ 170/t`, while its logarithm stays tame far beyond any `n` we use.

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::specfun::gamma::ln_gamma;

/// Closure returning Φ(λ); shared by Bernstein-type sequences.
pub type PhiFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Parameters of `Π Γ(a_i + A_i n)/Γ(a_i) × Π Γ(b_j)/Γ(b_j + B_j n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GammaRatioSpec {
    pub numerators: Vec<(f64, f64)>,
    pub denominators: Vec<(f64, f64)>,
}

impl GammaRatioSpec {
    pub fn new(numerators: Vec<(f64, f64)>, denominators: Vec<(f64, f64)>) -> Result<Self> {
        let spec = GammaRatioSpec { numerators, denominators };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for &(p, q) in self.numerators.iter().chain(&self.denominators) {
            if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
                return Err(Error::domain(format!("gamma ratio parameters must be positive, got ({p}, {q})")));
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
enum Kind {
    FactorialPower { t: f64 },
    BernsteinRising { phi: PhiFn, t: f64, cache: Arc<Mutex<Vec<f64>>> },
    BetaPower { a: f64, b: f64, s: f64 },
    GammaOrder1 { a: f64, s: f64 },
    Binomial { p: f64, r: f64 },
    Raney { p: f64, r: f64 },
    FussCatalan { k: f64 },
    GammaRatio(GammaRatioSpec),
    Mt { t: f64 },
    Rgstable { a: f64, m: f64 },
    Product(Box<LogMomentSequence>, Box<LogMomentSequence>),
    Power(Box<LogMomentSequence>, f64),
    Explicit(Vec<f64>),
    Ones,
}

/// A named evaluator `n ↦ log μ_n`.
#[derive(Clone)]
pub struct LogMomentSequence {
    family: String,
    params: Vec<(String, f64)>,
    kind: Kind,
}

impl fmt::Debug for LogMomentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogMomentSequence")
            .field("family", &self.family)
            .field("params", &self.params)
            .finish()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a finite positive number, got {v}")))
    }
}

fn ln_binom(top: f64, n: f64) -> f64 {
    ln_gamma(top + 1.0) - ln_gamma(n + 1.0) - ln_gamma(top - n + 1.0)
}

impl LogMomentSequence {
    fn new(family: &str, params: &[(&str, f64)], kind: Kind) -> Self {
        LogMomentSequence {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            kind,
        }
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// Largest valid index, when the sequence is finite.
    pub fn max_index(&self) -> Option<u64> {
        match &self.kind {
            Kind::Explicit(v) => Some(v.len() as u64 - 1),
            Kind::Product(x, y) => match (x.max_index(), y.max_index()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            Kind::Power(x, _) => x.max_index(),
            _ => None,
        }
    }

    /// `log μ_n`, or an error when the value is undefined or not finite.
    pub fn try_eval(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let v = self.raw(n)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { n, value: v });
        }
        Ok(v)
    }

    /// `log μ_n`; NaN where [`try_eval`](Self::try_eval) fails.
    pub fn eval(&self, n: u64) -> f64 {
        self.try_eval(n).unwrap_or(f64::NAN)
    }

    pub fn values(&self, n_max: u64) -> Result<Vec<f64>> {
        (0..=n_max).map(|n| self.try_eval(n)).collect()
    }

    fn raw(&self, n: u64) -> Result<f64> {
        let nf = n as f64;
        Ok(match &self.kind {
            Kind::FactorialPower { t } => t * ln_gamma(nf + 1.0),
            Kind::BernsteinRising { phi, t, cache } => {
                let mut c = cache.lock().unwrap_or_else(|e| e.into_inner());
                if c.is_empty() {
                    c.push(0.0);
                }
                while (c.len() as u64) <= n {
                    let k = c.len() as u64;
                    let v = phi(k as f64)?;
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::NotPositiveBernstein { k, value: v });
                    }
                    let last = c[c.len() - 1];
                    c.push(last + v.ln());
                }
                t * c[n as usize]
            }
            Kind::BetaPower { a, b, s } => {
                ln_gamma(a + s * nf) + ln_gamma(a + b) - ln_gamma(*a) - ln_gamma(a + b + s * nf)
            }
            Kind::GammaOrder1 { a, s } => ln_gamma(a + s * nf) - ln_gamma(*a),
            Kind::Binomial { p, r } => ln_binom(p * nf + r, nf),
            Kind::Raney { p, r } => (r / (nf * p + r)).ln() + ln_binom(p * nf + r, nf),
            Kind::FussCatalan { k } => ln_binom((k + 1.0) * nf, nf) - (1.0 + k * nf).ln(),
            Kind::GammaRatio(spec) => {
                let mut v = 0.0;
                for &(a, big_a) in &spec.numerators {
                    v += ln_gamma(a + big_a * nf) - ln_gamma(a);
                }
                for &(b, big_b) in &spec.denominators {
                    v -= ln_gamma(b + big_b * nf) - ln_gamma(b);
                }
                v
            }
            Kind::Mt { t } => {
                if *t < 1.0 {
                    t * ln_gamma(nf + 1.0) - ln_gamma(1.0 + nf * t)
                } else if *t > 1.0 {
                    ln_gamma(1.0 + nf * t) - t * ln_gamma(nf + 1.0)
                } else {
                    0.0
                }
            }
            Kind::Rgstable { a, m } => {
                let mut v = (m - a) / a * nf * a.ln();
                for j in 0..n {
                    let jf = j as f64;
                    v += ln_gamma((m + jf) / a) - ln_gamma((a + jf) / a);
                }
                v
            }
            Kind::Product(x, y) => x.try_eval(n)? + y.try_eval(n)?,
            Kind::Power(x, t) => t * x.try_eval(n)?,
            Kind::Explicit(v) => match v.get(n as usize) {
                Some(x) => *x,
                None => {
                    return Err(Error::domain(format!(
                        "explicit sequence has no entry at n = {n} (length {})",
                        v.len()
                    )))
                }
            },
            Kind::Ones => 0.0,
        })
    }
}

/// `(n!)^t`.
pub fn factorial_power(t: f64) -> Result<LogMomentSequence> {
    positive("t", t)?;
    Ok(LogMomentSequence::new("factorial", &[("t", t)], Kind::FactorialPower { t }))
}

/// `(Φ(1) ⋯ Φ(n))^t`. Non-positive Φ(k) surfaces as an error when `n ≥ k` is evaluated.
pub fn bernstein_rising_fn(name: &str, phi: PhiFn, t: f64) -> Result<LogMomentSequence> {
    positive("t", t)?;
    Ok(LogMomentSequence::new(
        name,
        &[("t", t)],
        Kind::BernsteinRising { phi, t, cache: Arc::new(Mutex::new(Vec::new())) },
    ))
}

pub fn bernstein_rising(phi: &crate::bernstein::BernsteinFunction, t: f64) -> Result<LogMomentSequence> {
    let f = phi.clone();
    bernstein_rising_fn("bernstein", Arc::new(move |lam| f.evaluate(lam)), t)
}

/// Moments of `B_{a,b}^s`.
pub fn beta_power(a: f64, b: f64, s: f64) -> Result<LogMomentSequence> {
    positive("a", a)?;
    positive("b", b)?;
    positive("s", s)?;
    Ok(LogMomentSequence::new("beta", &[("a", a), ("b", b), ("s", s)], Kind::BetaPower { a, b, s }))
}

/// Moments of `G_a^s`.
pub fn gamma_order1(a: f64, s: f64) -> Result<LogMomentSequence> {
    positive("a", a)?;
    positive("s", s)?;
    Ok(LogMomentSequence::new("gamma1", &[("a", a), ("s", s)], Kind::GammaOrder1 { a, s }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinomialKind {
    Binomial,
    Raney,
    FussCatalan,
}

/// Binomial `C(pn+r, n)`, Raney `r/(np+r) C(pn+r, n)` and Fuss-Catalan
/// `C((k+1)n, n)/(1+kn)`. For fuss_catalan, `p` is ignored and `r_or_k` is k.
pub fn binomial_family(kind: BinomialKind, p: f64, r_or_k: f64) -> Result<LogMomentSequence> {
    if !p.is_finite() || !r_or_k.is_finite() {
        return Err(Error::domain("binomial family parameters must be finite"));
    }
    match kind {
        BinomialKind::Binomial => {
            let r = r_or_k;
            if p < 1.0 {
                return Err(Error::NotMomentSequence(format!("binomial requires p >= 1, got p = {p}")));
            }
            if !(-1.0..=p - 1.0).contains(&r) {
                return Err(Error::NotMomentSequence(format!(
                    "binomial requires r in [-1, p-1] = [-1, {}], got r = {r}",
                    p - 1.0
                )));
            }
            if p == 1.0 && r == -1.0 {
                return Err(Error::Degenerate("binomial with p = 1, r = -1 has mu_n = 0 for n >= 1".into()));
            }
            Ok(LogMomentSequence::new("binomial", &[("p", p), ("r", r)], Kind::Binomial { p, r }))
        }
        BinomialKind::Raney => {
            let r = r_or_k;
            if p < 1.0 {
                return Err(Error::NotMomentSequence(format!("raney requires p >= 1, got p = {p}")));
            }
            if !(0.0..=p).contains(&r) {
                return Err(Error::NotMomentSequence(format!("raney requires r in [0, p] = [0, {p}], got r = {r}")));
            }
            if r == 0.0 {
                return Err(Error::Degenerate("raney with r = 0 has mu_n = 0 for n >= 1".into()));
            }
            Ok(LogMomentSequence::new("raney", &[("p", p), ("r", r)], Kind::Raney { p, r }))
        }
        BinomialKind::FussCatalan => {
            let k = r_or_k;
            if k < 1.0 || k != k.floor() {
                return Err(Error::NotMomentSequence(format!("fuss_catalan requires an integer k >= 1, got {k}")));
            }
            Ok(LogMomentSequence::new("fuss_catalan", &[("k", k)], Kind::FussCatalan { k }))
        }
    }
}

pub fn gamma_ratio_seq(spec: GammaRatioSpec) -> Result<LogMomentSequence> {
    spec.validate()?;
    let mut params = Vec::new();
    for (i, (a, b)) in spec.numerators.iter().enumerate() {
        params.push((format!("a{i}"), *a));
        params.push((format!("A{i}"), *b));
    }
    for (j, (a, b)) in spec.denominators.iter().enumerate() {
        params.push((format!("b{j}"), *a));
        params.push((format!("B{j}"), *b));
    }
    Ok(LogMomentSequence { family: "gamma_ratio".into(), params, kind: Kind::GammaRatio(spec) })
}

/// Moments of `M_t`: `(n!)^t/Γ(1+nt)` for t < 1, the reciprocal for t > 1.
pub fn mt_seq(t: f64) -> Result<LogMomentSequence> {
    positive("t", t)?;
    Ok(LogMomentSequence::new("mt", &[("t", t)], Kind::Mt { t }))
}

/// Moments of the r-gstable(a, m) law.
pub fn rgstable_seq(a: f64, m: f64) -> Result<LogMomentSequence> {
    positive("a", a)?;
    if !m.is_finite() || m <= a {
        return Err(Error::RgstableUndefined(format!("requires 0 < a < m, got a = {a}, m = {m}")));
    }
    Ok(LogMomentSequence::new("rgstable", &[("a", a), ("m", m)], Kind::Rgstable { a, m }))
}

/// A sequence given by its log values, `log_values[0]` must be 0.
pub fn explicit_log(log_values: Vec<f64>) -> Result<LogMomentSequence> {
    if log_values.first() != Some(&0.0) {
        return Err(Error::domain("explicit sequence must start with log mu_0 = 0"));
    }
    if let Some((n, v)) = log_values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { n: n as u64, value: *v });
    }
    Ok(LogMomentSequence::new("explicit", &[], Kind::Explicit(log_values)))
}

/// A sequence given by positive values with `values[0] = 1`.
pub fn explicit(values: &[f64]) -> Result<LogMomentSequence> {
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain("explicit values must be positive"));
    }
    explicit_log(values.iter().map(|v| v.ln()).collect())
}

pub fn ones() -> LogMomentSequence {
    LogMomentSequence::new("ones", &[], Kind::Ones)
}

pub fn product(x: &LogMomentSequence, y: &LogMomentSequence) -> LogMomentSequence {
    LogMomentSequence::new("product", &[], Kind::Product(Box::new(x.clone()), Box::new(y.clone())))
}

pub fn power(x: &LogMomentSequence, t: f64) -> Result<LogMomentSequence> {
    positive("t", t)?;
    Ok(LogMomentSequence::new("power", &[("t", t)], Kind::Power(Box::new(x.clone()), t)))
}

/// Second operand of [`combine`].
pub enum CombineWith<'a> {
    Product(&'a LogMomentSequence),
    Power(f64),
}

pub fn combine(x: &LogMomentSequence, with: CombineWith<'_>) -> Result<LogMomentSequence> {
    match with {
        CombineWith::Product(y) => Ok(product(x, y)),
        CombineWith::Power(t) => power(x, t),
    }
}

/// One least-squares window of the growth fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFit {
    pub n_lo: u64,
    pub n_hi: u64,
    pub g: f64,
    /// coefficient of n
    pub linear: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthDiagnostics {
    pub windows: Vec<WindowFit>,
    /// plain ratio `log μ_n / (n log n)` at `n_max`
    pub raw_ratio: f64,
    /// linear coefficient of the widest window
    pub linear: f64,
}

/// Growth of `log μ_n` against `n log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub g_hi: f64,
    pub g_lo: f64,
    pub c_hat: Option<f64>,
    pub n_used: u64,
    pub diagnostics: GrowthDiagnostics,
}

/// |g_hi - g_lo| below which the profile is treated as a limit.
pub const PROFILE_TOL: f64 = 0.02;

impl GrowthProfile {
    pub fn g(&self) -> f64 {
        0.5 * (self.g_hi + self.g_lo)
    }

    pub fn is_stable(&self) -> bool {
        (self.g_hi - self.g_lo).abs() <= PROFILE_TOL
    }
}

/// Fits `log μ_n ≈ g n ln n + L n + α ln n + β + γ/n` on several windows
/// ending at or below `n_max`; `g_hi`/`g_lo` are the extreme window estimates.
pub fn growth_profile(x: &LogMomentSequence, n_max: u64) -> Result<GrowthProfile> {
    if n_max < 16 {
        return Err(Error::domain(format!("growth_profile needs n_max >= 16, got {n_max}")));
    }
    let n_max = match x.max_index() {
        Some(m) if m < n_max => return Err(Error::domain(format!("sequence only defined up to n = {m}"))),
        _ => n_max,
    };
    let vals = x.values(n_max)?;
    let his = [n_max / 2, (3 * n_max) / 4, n_max];
    let mut windows = Vec::new();
    for &hi in &his {
        let lo = (hi / 4).max(2);
        let mut rows = Vec::new();
        let mut ys = Vec::new();
        for n in lo..=hi {
            let nf = n as f64;
            rows.push(vec![nf * nf.ln(), nf, nf.ln(), 1.0, 1.0 / nf]);
            ys.push(vals[n as usize]);
        }
        let beta = least_squares(&rows, &ys)
            .ok_or_else(|| Error::domain("growth fit is rank deficient"))?;
        let rms = (rows
            .iter()
            .zip(&ys)
            .map(|(r, y)| {
                let f: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
                (f - y) * (f - y)
            })
            .sum::<f64>()
            / ys.len() as f64)
            .sqrt();
        windows.push(WindowFit { n_lo: lo, n_hi: hi, g: beta[0], linear: beta[1], rms_residual: rms });
    }
    let g_hi = windows.iter().map(|w| w.g).fold(f64::NEG_INFINITY, f64::max);
    let g_lo = windows.iter().map(|w| w.g).fold(f64::INFINITY, f64::min);
    let last = windows.last().expect("three windows");
    let linear = last.linear;
    let g = 0.5 * (g_hi + g_lo);
    let c_hat = if (g_hi - g_lo).abs() <= PROFILE_TOL && g > 0.05 { Some((linear / g).exp()) } else { None };
    let nf = n_max as f64;
    Ok(GrowthProfile {
        g_hi,
        g_lo,
        c_hat,
        n_used: n_max,
        diagnostics: GrowthDiagnostics { windows, raw_ratio: vals[n_max as usize] / (nf * nf.ln()), linear },
    })
}
