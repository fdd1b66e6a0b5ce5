//! Densities of `L_t` and `M_t` by Mellin inversion.
//!
//! `L_t` has Mellin transform `Γ(1+s)^t`; `M_t` has `Γ(1+s)^t / Γ(1+st)` for
//! t < 1 and `Γ(1+st) / Γ(1+s)^t` for t > 1, with support `[0, t^{-t}]` and
//! `[0, t^t]` respectively.
//!
//! `L_t` is inverted on a vertical line. The transform of `M_t` decays only
//! polynomially on vertical lines, so it is inverted as the Laplace transform
//! of `log(endpoint) - log M_t` along a Talbot contour.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::{inverse_digamma, ln_gamma};
use crate::specfun::quadrature::{integrate_with, Domain, QuadOptions, QuadratureResult};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Stirling correction `Σ B_{2k} / (2k(2k-1) z^{2k-1})`.
fn stirling_tail(z: Complex64) -> Complex64 {
    let w = z.inv();
    let w2 = w * w;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        acc = acc * w2 + c;
    }
    acc * w
}

/// Analytic continuation of `log Γ(z)` from the positive axis (the branch
/// mpmath calls `loggamma`). Poles return an infinite real part.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_gamma_complex(z.conj()).conj();
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re < 0.5 {
        // log Γ(z) = log π - log Γ(1-z) - log sin(πz), with the sine written
        // through e^{2πiz}, which is small in the upper half-plane.
        let w = (Complex64::new(0.0, 2.0 * PI) * z).exp();
        let log_sin = Complex64::new(-std::f64::consts::LN_2, PI / 2.0) - Complex64::new(0.0, PI) * z
            + (Complex64::new(1.0, 0.0) - w).ln();
        return Complex64::new(PI.ln(), 0.0) - ln_gamma_complex(Complex64::new(1.0, 0.0) - z) - log_sin;
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + stirling_tail(w) - shift
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "L_t")]
    Lt,
    #[serde(rename = "M_t")]
    Mt,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Lt => "L_t",
            Target::Mt => "M_t",
        }
    }
}

/// Where the inversion contour runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contour {
    /// vertical line `Re s = c` for every grid point (`L_t` only)
    Fixed(f64),
    /// per-point saddle line for `L_t`, Talbot contour for `M_t`
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub t: f64,
    pub target: Target,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub contour: Contour,
    /// per point: real part of the line for `L_t`, Talbot scale `r` for `M_t`
    pub contour_c: Vec<f64>,
    /// largest `|Im s|` reached on any contour
    pub truncation_u: f64,
    pub error_estimates: Vec<f64>,
    /// true when negative noise was set to zero
    pub clipped: bool,
    pub clipped_max: f64,
    /// true when the grid carries all but a negligible part of the mass
    pub full_support: bool,
}

impl DensityTable {
    /// Total mass, see [`DensityTable::moment`].
    pub fn mass(&self) -> f64 {
        self.moment(0)
    }

    /// `∫ x^n f(x) dx` over the grid.
    ///
    /// `L_t`: trapezoid of `x^{n+1} f` in `log x`. `M_t`: trapezoid in
    /// `log y`, `y = log(endpoint/x)`, plus the mass between the last grid
    /// point and the endpoint from the `y^{β-1}` endpoint law.
    pub fn moment(&self, n: u32) -> f64 {
        let g: Vec<f64> = self.grid.iter().zip(&self.values).map(|(x, f)| x.powi(n as i32 + 1) * f).collect();
        match self.target {
            Target::Lt => self
                .grid
                .windows(2)
                .zip(g.windows(2))
                .map(|(x, v)| 0.5 * (x[1].ln() - x[0].ln()) * (v[0] + v[1]))
                .sum(),
            Target::Mt => {
                let ly = mt_log_endpoint(self.t);
                let pts: Vec<(f64, f64)> = self
                    .grid
                    .iter()
                    .zip(&g)
                    .filter(|(x, _)| x.ln() < ly)
                    .map(|(x, v)| {
                        let y = ly - x.ln();
                        (y.ln(), y * v)
                    })
                    .collect();
                let body: f64 = pts.windows(2).map(|w| 0.5 * (w[0].0 - w[1].0) * (w[0].1 + w[1].1)).sum();
                let y_min = pts.last().map_or(0.0, |p| p.0.exp());
                let (k, beta) = mt_endpoint_law(self.t);
                let end = mt_endpoint(self.t).powi(n as i32);
                body + end * k * y_min.powf(beta) / ln_gamma(beta + 1.0).exp()
            }
        }
    }

    /// CSV with header `x,f,err`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,f,err\n");
        for ((x, f), e) in self.grid.iter().zip(&self.values).zip(&self.error_estimates) {
            out.push_str(&format!("{x:.16e},{f:.16e},{e:.16e}\n"));
        }
        out
    }
}

fn check_t(target: Target, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive and finite, got {t}")));
    }
    if target == Target::Mt && (t - 1.0).abs() < 1e-12 {
        return Err(Error::domain("M_1 is the point mass at 1 and has no density"));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-15..=1e-2).contains(&tol) {
        return Err(Error::domain(format!("tol must lie in [1e-15, 1e-2], got {tol}")));
    }
    Ok(())
}

/// Right end of the support of `M_t`.
pub fn mt_endpoint(t: f64) -> f64 {
    mt_log_endpoint(t).exp()
}

fn mt_log_endpoint(t: f64) -> f64 {
    if t < 1.0 { -t * t.ln() } else { t * t.ln() }
}

/// `log E[M_t^s] - s log(endpoint)`, the log-Laplace transform of
/// `log(endpoint) - log M_t`.
pub fn mt_log_laplace(t: f64, s: Complex64) -> Complex64 {
    let small = t.min(1.0);
    let sign = if t < 1.0 { 1.0 } else { -1.0 };
    let far = s.norm() * small > 40.0 && (s.re > 0.0 || s.im.abs() * small > 10.0);
    if far {
        // Stirling for both Γ factors; the s log s and s log t terms cancel
        let base = (s.ln() + 2.0 * LN_SQRT_2PI) * ((t - 1.0) / 2.0) - 0.5 * t.ln() + stirling_tail(s) * t
            - stirling_tail(s * t);
        return base * sign;
    }
    let one = Complex64::new(1.0, 0.0);
    let lg = ln_gamma_complex(one + s) * t - ln_gamma_complex(one + s * t);
    lg * sign - s * mt_log_endpoint(t)
}

struct LineResult {
    value: f64,
    error: f64,
    u_max: f64,
}

/// `(1/π) ∫_0^∞ Re exp(logf(c + iu)) du` by the trapezoid rule.
///
/// The step comes from the strip bound: shifting the line by `d` changes the
/// peak magnitude by `exp(E(d))`, so the discretisation error is about
/// `exp(E(d) - 2πd/h)` relative to the peak; `d` runs up to `d_left` toward
/// smaller real parts and `d_right` toward larger ones.
fn vertical_line(logf: &dyn Fn(Complex64) -> Complex64, c: f64, d_left: f64, d_right: f64, tol: f64) -> Result<LineResult> {
    let lp = logf(Complex64::new(c, 0.0)).re;
    let budget = -tol.ln() + 2.0;
    let best_step = |dmax: f64, dir: f64| {
        (1..=16)
            .map(|j| {
                let d = dmax * j as f64 / 16.0;
                let e = logf(Complex64::new(c + dir * d, 0.0)).re - lp;
                if e.is_finite() && e + budget > 0.0 { 2.0 * PI * d / (e + budget) } else { 0.0 }
            })
            .fold(0.0, f64::max)
    };
    let h = best_step(d_left, -1.0).min(best_step(d_right, 1.0)).min(1.0);
    if !(h > 1e-6) {
        return Err(Error::Accuracy {
            message: "no usable trapezoid step for the Mellin line".into(),
            best_estimate: f64::NAN,
            error_estimate: f64::INFINITY,
        });
    }
    let peak = lp.exp();
    let stop = tol * 1e-3;
    let mut sum = 0.5 * logf(Complex64::new(c, 0.0)).exp().re;
    let mut abs_sum = sum.abs();
    let mut k = 1usize;
    loop {
        let u = k as f64 * h;
        let g = logf(Complex64::new(c, u)).exp();
        sum += g.re;
        abs_sum += g.norm();
        if g.norm() <= stop * peak || g.norm() == 0.0 {
            break;
        }
        k += 1;
        if k > 200_000 {
            return Err(Error::Accuracy {
                message: format!("Mellin integrand not below tol by u = {u}"),
                best_estimate: h * sum / PI,
                error_estimate: f64::INFINITY,
            });
        }
    }
    Ok(LineResult {
        value: h * sum / PI,
        error: peak * tol / PI + 4.0 * f64::EPSILON * h * abs_sum / PI,
        u_max: k as f64 * h,
    })
}

/// `L_t` density at one point on the line `Re s = c`.
fn lt_point(t: f64, x: f64, c: f64, tol: f64) -> Result<LineResult> {
    let lx = x.ln();
    let one = Complex64::new(1.0, 0.0);
    let logf = |s: Complex64| ln_gamma_complex(one + s) * t - (s + 1.0) * lx;
    vertical_line(&logf, c, 0.95 * (1.0 + c), 8.0, tol)
}

/// Saddle of `Γ(1+s)^t x^{-s}` on the real axis, kept away from the pole.
fn lt_saddle(t: f64, x: f64) -> f64 {
    (inverse_digamma(x.ln() / t) - 1.0).max(-0.5)
}

/// `P(L_t <= x)` on the line `Re s = -1/2`.
pub fn lt_cdf(t: f64, x: f64, tol: f64) -> Result<f64> {
    check_t(Target::Lt, t)?;
    check_tol(tol)?;
    if !(x > 0.0) {
        return Ok(0.0);
    }
    let lx = x.ln();
    let one = Complex64::new(1.0, 0.0);
    let logf = |s: Complex64| ln_gamma_complex(one + s) * t - s * lx + (-s.inv()).ln();
    Ok(vertical_line(&logf, -0.5, 0.45, 0.45, tol)?.value)
}

const TALBOT_M: usize = 28;
const TALBOT_M_CHECK: usize = 22;

/// Fixed Talbot inversion of a log-Laplace transform at `y > 0`.
fn talbot(log_lap: &dyn Fn(Complex64) -> Complex64, y: f64, m: usize) -> (f64, f64) {
    let r = 2.0 * m as f64 / (5.0 * y);
    let mut sum = 0.5 * (log_lap(Complex64::new(r, 0.0)) + r * y).exp().re;
    for k in 1..m {
        let theta = k as f64 * PI / m as f64;
        let cot = 1.0 / theta.tan();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (log_lap(s) + s * y).exp() * Complex64::new(1.0, sigma);
        if term.re.is_finite() {
            sum += term.re;
        }
    }
    (r / m as f64 * sum, r)
}

/// Decay rate of the density of `log(endpoint) - log M_t`: its Laplace
/// transform is singular first at `-1` (t < 1) or `-1/t` (t > 1).
fn mt_decay(t: f64) -> f64 {
    t.recip().min(1.0)
}

/// Density of `log(endpoint) - log M_t` at `y`, with its error estimate and
/// the Talbot scale. The transform is shifted by the decay rate so that the
/// inversion keeps relative accuracy for large `y`.
fn mt_log_density(t: f64, y: f64) -> (f64, f64, f64) {
    if !(y > 1e-200) {
        return (0.0, 0.0, 0.0);
    }
    let sigma = mt_decay(t);
    let lap = |s: Complex64| mt_log_laplace(t, s - sigma);
    let (v, r) = talbot(&lap, y, TALBOT_M);
    let (w, _) = talbot(&lap, y, TALBOT_M_CHECK);
    let damp = (-sigma * y).exp();
    (v * damp, (v - w).abs() * damp, r)
}

/// `g(y) ≈ K y^{β-1} / Γ(β)` as `y → 0`, from `N(s) ≈ K s^{-β}`; returns `(K, β)`.
fn mt_endpoint_law(t: f64) -> (f64, f64) {
    let beta = (t - 1.0).abs() / 2.0;
    let log_k = if t < 1.0 {
        (t - 1.0) * LN_SQRT_2PI - 0.5 * t.ln()
    } else {
        (1.0 - t) * LN_SQRT_2PI + 0.5 * t.ln()
    };
    (log_k.exp(), beta)
}

struct PointValue {
    value: f64,
    error: f64,
    contour: f64,
    u_max: f64,
}

fn density_point(target: Target, t: f64, x: f64, contour: Contour, tol: f64) -> Result<PointValue> {
    match target {
        Target::Lt => {
            let c = match contour {
                Contour::Fixed(c) => c,
                Contour::Auto => lt_saddle(t, x),
            };
            let r = lt_point(t, x, c, tol)?;
            Ok(PointValue { value: r.value, error: r.error, contour: c, u_max: r.u_max })
        }
        Target::Mt => {
            let y = mt_log_endpoint(t) - x.ln();
            if y <= 0.0 {
                return Ok(PointValue { value: 0.0, error: 0.0, contour: 0.0, u_max: 0.0 });
            }
            let (g, err, r) = mt_log_density(t, y);
            Ok(PointValue { value: g / x, error: err / x, contour: r, u_max: r * PI })
        }
    }
}

/// Density of `target` on `grid`.
pub fn mellin_density(target: Target, t: f64, grid: &[f64], contour: Contour, tol: f64) -> Result<DensityTable> {
    mellin_density_threads(target, t, grid, contour, tol, 1)
}

/// As [`mellin_density`], splitting the grid over `threads` workers. The
/// output does not depend on the thread count.
pub fn mellin_density_threads(
    target: Target,
    t: f64,
    grid: &[f64],
    contour: Contour,
    tol: f64,
    threads: usize,
) -> Result<DensityTable> {
    check_t(target, t)?;
    check_tol(tol)?;
    if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::domain("grid must be non-empty, positive and finite"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    match (target, contour) {
        (Target::Lt, Contour::Fixed(c)) if !(c > -1.0) || !c.is_finite() => {
            return Err(Error::domain(format!("contour_c must exceed -1, got {c}")));
        }
        (Target::Mt, Contour::Fixed(_)) => {
            return Err(Error::domain("M_t is inverted on a Talbot contour; use Contour::Auto"));
        }
        _ => {}
    }
    let threads = threads.clamp(1, 64);
    let chunk = grid.len().div_ceil(threads);
    let points: Vec<Result<PointValue>> = if threads == 1 {
        grid.iter().map(|&x| density_point(target, t, x, contour, tol)).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = grid
                .chunks(chunk)
                .map(|xs| scope.spawn(move || xs.iter().map(|&x| density_point(target, t, x, contour, tol)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("density worker panicked")).collect()
        })
    };
    let mut table = DensityTable {
        t,
        target,
        grid: grid.to_vec(),
        values: Vec::with_capacity(grid.len()),
        contour,
        contour_c: Vec::with_capacity(grid.len()),
        truncation_u: 0.0,
        error_estimates: Vec::with_capacity(grid.len()),
        clipped: false,
        clipped_max: 0.0,
        full_support: false,
    };
    for p in points {
        let p = p?;
        let mut v = p.value;
        if v < 0.0 {
            table.clipped = true;
            table.clipped_max = table.clipped_max.max(-v);
            v = 0.0;
        }
        table.values.push(v);
        table.error_estimates.push(p.error);
        table.contour_c.push(p.contour);
        table.truncation_u = table.truncation_u.max(p.u_max);
    }
    table.full_support = covers_support(&table);
    Ok(table)
}

/// Both ends of the table carry negligible mass.
fn covers_support(table: &DensityTable) -> bool {
    let n = table.grid.len();
    if n < 16 {
        return false;
    }
    let g = |i: usize| table.grid[i] * table.values[i];
    let top = (0..n).map(g).fold(0.0, f64::max);
    let right = match table.target {
        Target::Lt => g(n - 1) <= 1e-9 * top,
        Target::Mt => table.grid[n - 1] >= mt_endpoint(table.t) * (1.0 - 1e-4),
    };
    right && g(0) <= 1e-6 * top
}

/// Default table grid.
///
/// `L_t`: geometric from the point where the CDF drops below 1e-10 up to
/// `(100/t)^t`, with at least 400 points and a log step of at most `t/4`.
/// `M_t`: `endpoint · e^{-y}` for geometric `y` from 1e-6 to `30/σ`, σ the
/// decay rate of the density of `log(endpoint/M_t)`.
pub fn default_grid(target: Target, t: f64) -> Result<Vec<f64>> {
    check_t(target, t)?;
    match target {
        Target::Lt => {
            let mut lo = 1e-3f64;
            while lt_cdf(t, lo, 1e-14)? > 1e-10 {
                lo /= 10.0;
                if lo < 1e-300 {
                    return Err(Error::domain("could not bracket the lower tail"));
                }
            }
            let hi = (100.0 / t).powf(t);
            let span = (hi / lo).ln();
            let count = 400usize.max((span / (0.25 * t).min(0.1)).ceil() as usize + 1);
            Ok((0..count).map(|i| lo * (span * i as f64 / (count - 1) as f64).exp()).collect())
        }
        Target::Mt => {
            let end = mt_endpoint(t);
            let count = 400usize;
            let y_max = 30.0 / mt_decay(t);
            let ys: Vec<f64> = (0..count).map(|i| 1e-6 * (y_max / 1e-6).powf(i as f64 / (count - 1) as f64)).collect();
            Ok(ys.iter().rev().map(|y| end * (-y).exp()).collect())
        }
    }
}

/// Table on the default grid with the automatic contour.
pub fn default_table(target: Target, t: f64, tol: f64) -> Result<DensityTable> {
    mellin_density(target, t, &default_grid(target, t)?, Contour::Auto, tol)
}

/// `∫ f` by double-exponential quadrature of pointwise inversions.
pub fn total_mass(target: Target, t: f64, tol: f64) -> Result<QuadratureResult> {
    check_t(target, t)?;
    check_tol(tol)?;
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-9, max_level: 7, ..QuadOptions::default() };
    match target {
        Target::Lt => {
            // ∫ e^v f(e^v) dv; failures surface as NaN and stop the quadrature
            integrate_with(
                |v: f64| {
                    let x = v.exp();
                    lt_point(t, x, lt_saddle(t, x), tol).map(|r| x * r.value).unwrap_or(f64::NAN)
                },
                Domain::Finite(-700.0, (60.0 / t).powf(t).ln().max(1.0)),
                opts,
            )
        }
        Target::Mt => integrate_with(|y: f64| mt_log_density(t, y).0, Domain::UpperInfinite(0.0), opts),
    }
}

/// Nodes (relative to `v_i`) and values of the cubic used on `[v_k, v_{k+1}]`.
fn local_cubic(vs: &[f64], gs: &[f64], k: usize, origin: f64) -> ([f64; 4], [f64; 4]) {
    let n = vs.len();
    let start = k.saturating_sub(1).min(n - 4);
    let mut w = [0.0; 4];
    let mut g = [0.0; 4];
    for j in 0..4 {
        w[j] = vs[start + j] - origin;
        g[j] = gs[start + j];
    }
    (w, g)
}

fn lagrange(w: &[f64; 4], g: &[f64; 4], x: f64) -> f64 {
    (0..4)
        .map(|j| {
            let mut l = 1.0;
            for m in 0..4 {
                if m != j {
                    l *= (x - w[m]) / (w[j] - w[m]);
                }
            }
            l * g[j]
        })
        .sum()
}

/// Monomial coefficients of the interpolating cubic in `w`.
fn monomial(w: &[f64; 4], g: &[f64; 4]) -> [f64; 4] {
    // Newton divided differences, then expand
    let mut d = *g;
    for level in 1..4 {
        for j in (level..4).rev() {
            d[j] = (d[j] - d[j - 1]) / (w[j] - w[j - level]);
        }
    }
    let mut p = [d[3], 0.0, 0.0, 0.0];
    for (deg, j) in (0..3).rev().enumerate() {
        // p <- p·(x - w[j]) + d[j]
        let mut q = [0.0; 4];
        for m in 0..=deg {
            q[m + 1] += p[m];
            q[m] -= w[j] * p[m];
        }
        q[0] += d[j];
        p = q;
    }
    p
}

const GL6: [(f64, f64); 6] = [
    (-0.932_469_514_203_152, 0.171_324_492_379_170_3),
    (-0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (-0.238_619_186_083_196_9, 0.467_913_934_572_691),
    (0.238_619_186_083_196_9, 0.467_913_934_572_691),
    (0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (0.932_469_514_203_152, 0.171_324_492_379_170_3),
];

/// `∫_{v_i}^{∞} G(v) (v - v_i)^{a-1} dv` from the samples `G(v_k)`, by
/// product integration of local cubics plus an exponential tail beyond the
/// last sample.
fn weighted_tail_integral(vs: &[f64], gs: &[f64], i: usize, a: f64) -> f64 {
    let n = vs.len();
    let origin = vs[i];
    let mut total = 0.0;
    for k in i..n - 1 {
        let (w, g) = local_cubic(vs, gs, k, origin);
        let (lo, hi) = (vs[k] - origin, vs[k + 1] - origin);
        if k == i {
            let p = monomial(&w, &g);
            total += (0..4).map(|j| p[j] * hi.powf(a + j as f64) / (a + j as f64)).sum::<f64>();
        } else {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            total += GL6
                .iter()
                .map(|&(z, wt)| {
                    let x = mid + half * z;
                    wt * half * lagrange(&w, &g, x) * x.powf(a - 1.0)
                })
                .sum::<f64>();
        }
    }
    let (g1, g2) = (gs[n - 2], gs[n - 1]);
    if g2 > 0.0 && g1 > g2 {
        let lam = (g1 / g2).ln() / (vs[n - 1] - vs[n - 2]);
        total += g2 * (vs[n - 1] - origin).max(1e-300).powf(a - 1.0) / lam;
    }
    total
}

fn log_samples(table: &DensityTable) -> (Vec<f64>, Vec<f64>) {
    let vs = table.grid.iter().map(|x| x.ln()).collect();
    let gs = table.grid.iter().zip(&table.values).map(|(x, f)| x * f).collect();
    (vs, gs)
}

/// Max over interior points of `|f(x) - Γ(t)^{-1} ∫_x^∞ f(y) (log y - log x)^{t-1} dy|`.
pub fn integral_equation_residual(table: &DensityTable, t: f64) -> Result<f64> {
    if table.target != Target::Lt {
        return Err(Error::domain("the integral equation holds for L_t tables"));
    }
    if (table.t - t).abs() > 1e-12 * t.max(1.0) {
        return Err(Error::domain(format!("table is for t = {}, not {t}", table.t)));
    }
    if !table.full_support || table.grid.len() < 16 {
        return Err(Error::domain("table does not cover the upper tail"));
    }
    let (vs, gs) = log_samples(table);
    let scale = 1.0 / ln_gamma(t).exp();
    let n = vs.len();
    let mut worst: f64 = 0.0;
    for i in 1..n - 4 {
        let rhs = scale * weighted_tail_integral(&vs, &gs, i, t);
        worst = worst.max((table.values[i] - rhs).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// `p̂` in `log P(X > x) ≈ -ĉ x^p̂`
    pub exponent: f64,
    pub coefficient: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    pub mass: f64,
    /// `∫ x^n f` for n = 0..4
    pub moments: Vec<f64>,
    pub tail: Option<TailFit>,
    pub tail_fit_skipped: bool,
    /// `(x, -x f'(x)/f(x))` at interior points with `f > 0`
    pub log_derivative: Vec<(f64, f64)>,
}

/// Survival function `P(X > x_i)` at every grid point.
///
/// `log(x f)` is interpolated by local cubics in `log x`, which keeps
/// relative accuracy in super-exponential tails.
pub fn survival(table: &DensityTable) -> Vec<f64> {
    let (vs, gs) = log_samples(table);
    let n = vs.len();
    let lgs: Vec<f64> = gs.iter().map(|g| if *g > 0.0 { g.ln() } else { f64::NEG_INFINITY }).collect();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n - 1).rev() {
        let (w, lg) = local_cubic(&vs, &lgs, k, 0.0);
        let (mid, half) = (0.5 * (vs[k] + vs[k + 1]), 0.5 * (vs[k + 1] - vs[k]));
        let piece: f64 = if lg.iter().all(|v| v.is_finite()) {
            GL6.iter().map(|&(z, wt)| wt * half * lagrange(&w, &lg, mid + half * z).exp()).sum()
        } else {
            half * (gs[k] + gs[k + 1])
        };
        acc += piece;
        out[k] = acc;
    }
    out
}

pub fn density_diagnostics(table: &DensityTable) -> Result<DensityDiagnostics> {
    if !table.full_support {
        return Err(Error::domain("density diagnostics need a full-support table"));
    }
    let moments: Vec<f64> = (0..=4).map(|n| table.moment(n)).collect();
    let surv = survival(table);
    let n = table.grid.len();
    let x_end = table.grid[n - 1];
    // last decade, restricted to where the tail is established (S < e^{-5})
    let idx: Vec<usize> = (0..n - 4)
        .filter(|&i| table.grid[i] >= x_end / 10.0 && surv[i] > 0.0 && surv[i] < (-5.0f64).exp())
        .collect();
    // -log S ≈ ĉ x^p̂ + α log x + β: the hazard term D1 = d(-log S)/d(log x)
    // = x f / S and D2 = dD1/d(log x) ≈ ĉ p̂² x^p̂ are free of α and β
    let d1 = |i: usize| table.grid[i] * table.values[i] / surv[i];
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for &i in idx.iter().filter(|&&i| i > 0 && surv[i + 1] > 0.0) {
        let d2 = (d1(i + 1) - d1(i - 1)) / (table.grid[i + 1].ln() - table.grid[i - 1].ln());
        if d2 > 0.0 && d2.is_finite() {
            rows.push(vec![1.0, table.grid[i].ln()]);
            ys.push(d2.ln());
        }
    }
    let mut tail = None;
    if rows.len() >= 4 {
        if let Some(b) = crate::linalg::least_squares(&rows, &ys) {
            let p = b[1];
            if p > 0.0 {
                tail = Some(TailFit { exponent: p, coefficient: b[0].exp() / (p * p), points: rows.len() });
            }
        }
    }
    let log_derivative = (1..n - 1)
        .filter(|&i| table.values[i - 1] > 0.0 && table.values[i + 1] > 0.0)
        .map(|i| {
            let d = (table.values[i + 1].ln() - table.values[i - 1].ln()) / (table.grid[i + 1].ln() - table.grid[i - 1].ln());
            (table.grid[i], -d)
        })
        .collect();
    Ok(DensityDiagnostics { mass: moments[0], moments, tail_fit_skipped: tail.is_none(), tail, log_derivative })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_log_gamma_oracles() {
        let cases = [
            (c(-3.3, 0.7), c(-2.482_358_199_542_181_8, -11.009_352_077_495_584)),
            (c(-0.2, -5.0), c(-8.062_770_934_254_811, -1.906_981_547_857_442_5)),
            (c(0.5, 20.0), c(-30.496_988_002_693_26, 39.916_729_108_476_076)),
            (c(-40.0, 3.0), c(-117.796_536_492_697_13, -116.127_781_784_040_07)),
        ];
        for (z, want) in cases {
            let got = ln_gamma_complex(z);
            assert!((got - want).norm() < 1e-12 * want.norm().max(1.0), "{z}: {got} vs {want}");
        }
        for x in [0.3, 1.0, 2.5, 7.0, 30.0] {
            assert!((ln_gamma_complex(c(x, 0.0)).re - ln_gamma(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn lt_closed_forms() {
        for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
            for contour in [Contour::Auto, Contour::Fixed(0.0)] {
                let tab = mellin_density(Target::Lt, 1.0, &[x], contour, 1e-12).unwrap();
                assert!((tab.values[0] - (-x).exp()).abs() < 1e-10, "{x}");
            }
        }
        // 2 K_0(2)
        let tab = mellin_density(Target::Lt, 2.0, &[1.0], Contour::Auto, 1e-12).unwrap();
        assert!((tab.values[0] - 0.227_787_745_499_066_87).abs() < 1e-11);
    }

    #[test]
    fn contour_independence() {
        for t in [0.5, 2.0] {
            for x in [0.3, 1.0, 3.0] {
                let vals: Vec<f64> = [0.0, 0.5, 1.0]
                    .iter()
                    .map(|&cc| mellin_density(Target::Lt, t, &[x], Contour::Fixed(cc), 1e-12).unwrap().values[0])
                    .collect();
                assert!((vals[0] - vals[1]).abs() < 1e-10 && (vals[0] - vals[2]).abs() < 1e-10, "{t} {x} {vals:?}");
            }
        }
    }

    #[test]
    fn mt_support_and_arcsine() {
        let tab = mellin_density(Target::Mt, 0.5, &[1.5, 2.0], Contour::Auto, 1e-10).unwrap();
        assert_eq!(tab.values, vec![0.0, 0.0]);
        // M_2 is the arcsine law on [0, 4]
        for x in [0.5, 1.0, 3.0] {
            let tab = mellin_density(Target::Mt, 2.0, &[x], Contour::Auto, 1e-10).unwrap();
            let want = 1.0 / (PI * (x * (4.0 - x)).sqrt());
            assert!((tab.values[0] - want).abs() < 1e-8 * want, "{x}: {} vs {want}", tab.values[0]);
        }
        assert!(mellin_density(Target::Mt, 0.5, &[1.0], Contour::Fixed(0.0), 1e-10).is_err());
    }

    #[test]
    fn cdf_small_values() {
        // L_1 is exponential
        for x in [1e-8f64, 1e-3, 0.5, 2.0] {
            let want = -(-x).exp_m1();
            assert!((lt_cdf(1.0, x, 1e-14).unwrap() - want).abs() < 1e-13 * want.max(1e-3), "{x}");
        }
    }

    #[test]
    fn cubic_helpers() {
        let w = [0.0, 0.3, 0.7, 1.2];
        let g = w.map(|x| 1.0 - 2.0 * x + 0.5 * x * x * x);
        let p = monomial(&w, &g);
        for (a, b) in p.iter().zip([1.0, -2.0, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((lagrange(&w, &g, 0.5) - (1.0 - 1.0 + 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn default_tables() {
        for t in [0.5, 2.0, 3.0] {
            let tab = default_table(Target::Lt, t, 1e-12).unwrap();
            assert!(tab.full_support && !tab.clipped);
            assert!((tab.mass() - 1.0).abs() < 1e-8, "{t}: {}", tab.mass());
        }
        let tab = default_table(Target::Lt, 1.0, 1e-12).unwrap();
        assert!(integral_equation_residual(&tab, 1.0).unwrap() <= 1e-6);
        let d = density_diagnostics(&tab).unwrap();
        assert!((d.mass - 1.0).abs() < 1e-6 && (d.moments[2] - 2.0).abs() < 2e-6);
        let tab = default_table(Target::Lt, 2.0, 1e-12).unwrap();
        assert!(integral_equation_residual(&tab, 2.0).unwrap() <= 1e-5);
        assert!(integral_equation_residual(&tab, 3.0).is_err());
    }

    #[test]
    fn truncated_tail_is_rejected() {
        let grid: Vec<f64> = (0..100).map(|i| 1e-3 * 2000f64.powf(i as f64 / 99.0)).collect();
        let tab = mellin_density(Target::Lt, 2.0, &grid, Contour::Auto, 1e-12).unwrap();
        assert!(!tab.full_support);
        assert!(integral_equation_residual(&tab, 2.0).is_err());
        assert!(density_diagnostics(&tab).is_err());
    }

    #[test]
    fn tail_law() {
        let tab = default_table(Target::Lt, 0.5, 1e-12).unwrap();
        let tail = density_diagnostics(&tab).unwrap().tail.unwrap();
        assert!((tail.exponent - 2.0).abs() < 0.1 && (tail.coefficient - 0.5).abs() < 0.05, "{tail:?}");
    }

    #[test]
    fn factorial_moments_at_three() {
        let d = density_diagnostics(&default_table(Target::Lt, 3.0, 1e-12).unwrap()).unwrap();
        for (n, want) in [1.0, 1.0, 8.0, 216.0].iter().enumerate() {
            assert!((d.moments[n] / want - 1.0).abs() < 1e-4, "{n}");
        }
    }

    #[test]
    fn mt_mass_and_moments() {
        for t in [0.5, 2.0] {
            assert!((total_mass(Target::Mt, t, 1e-10).unwrap().value - 1.0).abs() < 1e-5);
            let tab = default_table(Target::Mt, t, 1e-10).unwrap();
            assert!(tab.full_support && (tab.mass() - 1.0).abs() < 1e-5);
        }
        // M_2 moments are C(2n, n)
        let tab = default_table(Target::Mt, 2.0, 1e-10).unwrap();
        assert!((tab.moment(2) - 6.0).abs() < 1e-5);
    }

    #[test]
    fn threads_do_not_change_output() {
        let grid = default_grid(Target::Lt, 2.0).unwrap();
        let a = mellin_density(Target::Lt, 2.0, &grid, Contour::Auto, 1e-12).unwrap();
        let b = mellin_density_threads(Target::Lt, 2.0, &grid, Contour::Auto, 1e-12, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn argument_checks() {
        assert!(mellin_density(Target::Lt, 0.0, &[1.0], Contour::Auto, 1e-10).is_err());
        assert!(mellin_density(Target::Lt, 1.0, &[1.0], Contour::Fixed(-1.0), 1e-10).is_err());
        assert!(mellin_density(Target::Lt, 1.0, &[2.0, 1.0], Contour::Auto, 1e-10).is_err());
        assert!(mellin_density(Target::Lt, 1.0, &[1.0], Contour::Auto, 0.5).is_err());
        assert!(mellin_density(Target::Mt, 1.0, &[1.0], Contour::Auto, 1e-10).is_err());
    }
}
