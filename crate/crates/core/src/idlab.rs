//! Infinite-divisibility probes and Lévy-identity checks.
//!
//! Hankel positivity of `{μ_n^t}` is numeric evidence for infinite
//! divisibility, never a proof. Matrices are capped at order 12.

use serde::{Deserialize, Serialize};

use crate::bernstein::{logphi_representation_check, ClosedFn, DensityFn};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, symmetric_eigenvalues};
use crate::momentseq::{power, GammaRatioSpec, LogMomentSequence};
use crate::specfun::gamma::{ln_gamma, EULER_GAMMA};
use crate::specfun::quadrature::{integrate_with, Domain, QuadOptions};

pub const MAX_HANKEL_SIZE: usize = 12;
/// Relative PSD tolerance: min eigenvalue ≥ -tol × largest diagonal entry.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// How Hankel entries are rescaled before the eigen solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HankelScaling {
    /// raw moments
    None,
    /// `μ_n / μ_1^n`
    Geometric,
    /// `D H D` with `D_ii = μ_{2i+shift}^{-1/2}`, unit diagonal
    UnitDiagonal,
}

impl HankelScaling {
    fn describe(self) -> &'static str {
        match self {
            HankelScaling::None => "none: raw moments",
            HankelScaling::Geometric => "geometric: mu_n / mu_1^n",
            HankelScaling::UnitDiagonal => "unit diagonal: H_ij / sqrt(H_ii H_jj), a congruence preserving semi-definiteness",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelReport {
    pub shift: u8,
    pub sizes: Vec<usize>,
    pub min_eigenvalues: Vec<f64>,
    pub normalization: String,
    pub psd: Vec<bool>,
}

impl HankelReport {
    pub fn all_psd(&self) -> bool {
        self.psd.iter().all(|p| *p)
    }
}

/// Hankel positivity with unit-diagonal scaling.
pub fn hankel_psd(seq: &LogMomentSequence, max_size: usize, shift: u8, tol: f64) -> Result<HankelReport> {
    hankel_psd_with(seq, max_size, shift, tol, HankelScaling::UnitDiagonal)
}

pub fn hankel_psd_with(
    seq: &LogMomentSequence,
    max_size: usize,
    shift: u8,
    tol: f64,
    scaling: HankelScaling,
) -> Result<HankelReport> {
    if max_size == 0 || max_size > MAX_HANKEL_SIZE {
        return Err(Error::domain(format!("Hankel order must be in 1..={MAX_HANKEL_SIZE}, got {max_size}")));
    }
    if shift > 1 {
        return Err(Error::domain(format!("shift must be 0 or 1, got {shift}")));
    }
    if !(tol >= 0.0) {
        return Err(Error::domain("PSD tolerance must be non-negative"));
    }
    let s = shift as usize;
    let top = 2 * max_size - 2 + s;
    let logs = seq.values(top.max(1) as u64)?;
    let l1 = logs[1];
    let entry = |i: usize, j: usize| -> f64 {
        let n = i + j + s;
        let v = match scaling {
            HankelScaling::None => logs[n],
            HankelScaling::Geometric => logs[n] - n as f64 * l1,
            HankelScaling::UnitDiagonal => logs[n] - 0.5 * logs[2 * i + s] - 0.5 * logs[2 * j + s],
        };
        v.exp()
    };
    let mut report = HankelReport {
        shift,
        sizes: Vec::new(),
        min_eigenvalues: Vec::new(),
        normalization: scaling.describe().into(),
        psd: Vec::new(),
    };
    for size in 1..=max_size {
        let h: Vec<Vec<f64>> = (0..size).map(|i| (0..size).map(|j| entry(i, j)).collect()).collect();
        if h.iter().flatten().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::Scaling(format!("Hankel entries of order {size} overflow or underflow after scaling")));
        }
        let diag = (0..size).map(|i| h[i][i]).fold(0.0, f64::max);
        let min_eig = symmetric_eigenvalues(&h)[0];
        report.sizes.push(size);
        report.min_eigenvalues.push(min_eig);
        report.psd.push(min_eig >= -tol * diag);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdProbeEntry {
    pub t: f64,
    pub unshifted: HankelReport,
    pub shifted: HankelReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdProbeReport {
    pub entries: Vec<IdProbeEntry>,
    pub all_pass: bool,
    pub note: String,
}

/// Hankel probes of `{μ_n^t}` for each t, both shifts. Entries follow the
/// order of `t_grid`.
pub fn id_probe(seq: &LogMomentSequence, t_grid: &[f64], max_size: usize) -> Result<IdProbeReport> {
    let mut entries = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let p = power(seq, t)?;
        let unshifted = hankel_psd(&p, max_size, 0, DEFAULT_PSD_TOL)?;
        let shifted = hankel_psd(&p, max_size, 1, DEFAULT_PSD_TOL)?;
        let pass = unshifted.all_psd() && shifted.all_psd();
        entries.push(IdProbeEntry { t, unshifted, shifted, pass });
    }
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(IdProbeReport { entries, all_pass, note: "finite-order Hankel evidence, not a proof".into() })
}

/// An exponential representation to verify numerically.
#[derive(Clone)]
pub enum LevyIdentity {
    /// `log Γ(1+s) = -γs + ∫_{-∞}^0 (e^{sx} - 1 - sx) dx / (|x|(e^{|x|} - 1))`, s > -1
    MalmstenGamma,
    /// log-Laplace transform of `log B_{a,b}^s` at λ ≥ 0
    MalmstenBeta { a: f64, b: f64, s: f64 },
    /// `log(Γ(1+s)^t / Γ(1+st))` at s > 0
    MtExponent { t: f64 },
    /// `log Φ(x) = log Φ(1) + ∫ (e^{-t} - e^{-xt}) κ(t)/t dt`
    LogPhiRepr { phi: ClosedFn, kappa: DensityFn },
}

impl std::fmt::Debug for LevyIdentity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevyIdentity::MalmstenGamma => write!(f, "MalmstenGamma"),
            LevyIdentity::MalmstenBeta { a, b, s } => write!(f, "MalmstenBeta({a}, {b}, {s})"),
            LevyIdentity::MtExponent { t } => write!(f, "MtExponent({t})"),
            LevyIdentity::LogPhiRepr { .. } => write!(f, "LogPhiRepr"),
        }
    }
}

/// `e^{-sy} - 1 + sy` without cancellation for small `sy`.
fn compensated_exp(s: f64, y: f64) -> f64 {
    let u = s * y;
    if u.abs() < 1e-4 {
        u * u * (0.5 - u / 6.0 + u * u / 24.0)
    } else {
        (-u).exp_m1() + u
    }
}

/// Absolute residual between the Γ expression and the quadrature of its
/// integral representation.
pub fn levy_identity_check(identity: &LevyIdentity, point: f64) -> Result<f64> {
    levy_identity_check_tol(identity, point, 1e-12)
}

/// As [`levy_identity_check`] with a chosen relative quadrature tolerance.
pub fn levy_identity_check_tol(identity: &LevyIdentity, point: f64, tol: f64) -> Result<f64> {
    if !point.is_finite() {
        return Err(Error::domain("identity point must be finite"));
    }
    let opts = QuadOptions { abs_tol: 1e-300_f64.max(tol * 1e-3), rel_tol: tol, ..QuadOptions::default() };
    match identity {
        LevyIdentity::MalmstenGamma => {
            let s = point;
            if !(s > -1.0) {
                return Err(Error::domain(format!("malmsten_gamma needs s > -1, got {s}")));
            }
            let integrand = |y: f64| {
                if y > 40.0 {
                    // split e^{-sy} off so that s < 0 cannot overflow
                    let d = y * -(-y).exp_m1();
                    (-(s + 1.0) * y).exp() / d + (s * y - 1.0) * (-y).exp() / d
                } else {
                    compensated_exp(s, y) / (y * y.exp_m1())
                }
            };
            let r = integrate_with(integrand, Domain::UpperInfinite(0.0), opts)?;
            Ok((ln_gamma(1.0 + s) - (-EULER_GAMMA * s + r.value)).abs())
        }
        LevyIdentity::MalmstenBeta { a, b, s } => {
            let (a, b, s) = (*a, *b, *s);
            if !(a > 0.0 && b > 0.0 && s > 0.0) {
                return Err(Error::domain("malmsten_beta needs a, b, s > 0"));
            }
            let lam = point;
            if !(lam >= 0.0) {
                return Err(Error::domain(format!("malmsten_beta needs lambda >= 0, got {lam}")));
            }
            let lhs = ln_gamma(a + s * lam) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(a + b + s * lam);
            let kernel = |x: f64| (-a * x).exp() * -(-b * x).exp_m1() / (x * -(-x).exp_m1());
            let r = integrate_with(|x| -(-lam * s * x).exp_m1() * kernel(x), Domain::UpperInfinite(0.0), opts)?;
            Ok((lhs + r.value).abs())
        }
        LevyIdentity::MtExponent { t } => {
            let t = *t;
            let s = point;
            if !(t > 0.0 && s > 0.0) {
                return Err(Error::domain("mt_exponent needs s, t > 0"));
            }
            let lhs = t * ln_gamma(1.0 + s) - ln_gamma(1.0 + s * t);
            let bracket = |y: f64| {
                if y < 1e-8 {
                    // limit of t/(e^y-1) - 1/(e^{y/t}-1) at 0
                    0.5 * (1.0 - t)
                } else {
                    t / y.exp_m1() - 1.0 / (y / t).exp_m1()
                }
            };
            let r = integrate_with(|y| compensated_exp(s, y) * bracket(y) / y, Domain::UpperInfinite(0.0), opts)?;
            Ok((lhs - r.value).abs())
        }
        LevyIdentity::LogPhiRepr { phi, kappa } => logphi_representation_check(phi.as_ref(), kappa.as_ref(), point),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KP16Report {
    pub sum_balanced: bool,
    pub kernel_min: f64,
    pub kernel_argmin: f64,
    pub support_sup: f64,
    /// analytic limit of the kernel at 0+ (meaningful when balanced)
    pub limit_at_zero: f64,
    /// sign of the kernel as x → ∞: 1, 0 or -1
    pub sign_at_infinity: i8,
    /// true when either analytic limit contradicts the grid verdict
    pub limit_warning: bool,
    pub verdict: bool,
}

fn kp16_kernel(spec: &GammaRatioSpec, x: f64) -> f64 {
    let term = |a: f64, big: f64| (-a * x / big).exp() / -(-x / big).exp_m1();
    spec.numerators.iter().map(|&(a, big)| term(a, big)).sum::<f64>()
        - spec.denominators.iter().map(|&(b, big)| term(b, big)).sum::<f64>()
}

/// Geometric grid `[1e-3, 50]` with 200 points.
pub fn default_kp16_grid() -> Vec<f64> {
    (0..200).map(|i| 1e-3 * (5e4f64).powf(i as f64 / 199.0)).collect()
}

/// Compact-support ID criterion for Gamma-ratio sequences.
pub fn kp16_check(spec: &GammaRatioSpec, grid: &[f64]) -> Result<KP16Report> {
    spec.validate()?;
    if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::domain("kp16 grid must be non-empty and positive"));
    }
    let sum_a: f64 = spec.numerators.iter().map(|p| p.1).sum();
    let sum_b: f64 = spec.denominators.iter().map(|p| p.1).sum();
    let sum_balanced = (sum_a - sum_b).abs() <= 1e-12 * sum_a.max(sum_b).max(1.0);
    let mut kernel_min = f64::INFINITY;
    let mut kernel_argmin = f64::NAN;
    for &x in grid {
        let g = kp16_kernel(spec, x);
        if g < kernel_min {
            kernel_min = g;
            kernel_argmin = x;
        }
    }
    // x → 0: Σ (A_i - B_j)/x + (p - q)/2 - Σ a_i/A_i + Σ b_j/B_j
    let half_count = 0.5 * (spec.numerators.len() as f64 - spec.denominators.len() as f64);
    let limit_at_zero = half_count - spec.numerators.iter().map(|p| p.0 / p.1).sum::<f64>()
        + spec.denominators.iter().map(|p| p.0 / p.1).sum::<f64>();
    // x → ∞: the slowest exponential rate dominates; rescale by it
    let rate = spec
        .numerators
        .iter()
        .chain(&spec.denominators)
        .map(|&(a, big)| a / big)
        .fold(f64::INFINITY, f64::min);
    let scale_max = spec.numerators.iter().chain(&spec.denominators).map(|p| p.1).fold(0.0, f64::max);
    let x_far = 60.0 * scale_max.max(1.0) / rate.max(1e-3);
    let term = |a: f64, big: f64| (-(a / big - rate) * x_far).exp() / -(-x_far / big).exp_m1();
    let scaled = spec.numerators.iter().map(|&(a, b)| term(a, b)).sum::<f64>()
        - spec.denominators.iter().map(|&(a, b)| term(a, b)).sum::<f64>();
    let sign_at_infinity = if scaled.abs() <= 1e-12 { 0 } else if scaled > 0.0 { 1 } else { -1 };
    let log_sup: f64 = spec.numerators.iter().map(|&(_, a)| a * a.ln()).sum::<f64>()
        - spec.denominators.iter().map(|&(_, b)| b * b.ln()).sum::<f64>();
    // the limits are reported, the verdict is grid based
    let verdict = sum_balanced && kernel_min >= -1e-10;
    Ok(KP16Report {
        sum_balanced,
        kernel_min,
        kernel_argmin,
        support_sup: log_sup.exp(),
        limit_at_zero,
        sign_at_infinity,
        limit_warning: verdict && (limit_at_zero < -1e-10 || sign_at_infinity < 0),
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    /// right end of the support; absent when unbounded
    pub endpoint: Option<f64>,
    pub unbounded: bool,
    /// fitted growth exponent of log μ_n against n log n
    pub growth: f64,
}

/// Limit of `μ_n^{1/n}` from a fit of `log μ_n ≈ L n + α log n + β + γ/n`.
pub fn support_endpoint(seq: &LogMomentSequence, n_max: u64) -> Result<SupportEstimate> {
    if n_max < 32 {
        return Err(Error::domain(format!("support_endpoint needs n_max >= 32, got {n_max}")));
    }
    let profile = crate::momentseq::growth_profile(seq, n_max)?;
    let g = profile.g();
    if profile.g_hi > 0.02 || profile.g_lo < -0.02 {
        return Ok(SupportEstimate { endpoint: None, unbounded: profile.g_lo > 0.0, growth: g });
    }
    let lo = n_max / 4;
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for n in lo..=n_max {
        let nf = n as f64;
        rows.push(vec![nf, nf.ln(), 1.0, 1.0 / nf]);
        ys.push(seq.try_eval(n)?);
    }
    let beta = least_squares(&rows, &ys).ok_or_else(|| Error::domain("support fit is rank deficient"))?;
    Ok(SupportEstimate { endpoint: Some(beta[0].exp()), unbounded: false, growth: g })
}
