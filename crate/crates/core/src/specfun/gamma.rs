//! Real log-Gamma, signed Gamma and digamma.
//!
//! Arguments below [`SHIFT_TARGET`] are moved up with the recurrence
//! `Γ(x+1) = x Γ(x)` and evaluated with the Stirling series.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler's constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_64;
const SHIFT_TARGET: f64 = 10.0;

/// B_{2k} / (2k (2k-1)), k = 1..8.
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

/// B_{2k} / (2k), k = 1..7.
const DIGAMMA_ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

/// ζ(k) - 1, k = 2..32.
const ZETA_MINUS_ONE: [f64; 31] = [
    0.64493406684822643647e0,
    0.2020569031595942854e0,
    0.082323233711138191516e0,
    0.036927755143369926331e0,
    0.017343061984449139715e0,
    0.0083492773819228268398e0,
    0.0040773561979443393787e0,
    0.0020083928260822144179e0,
    0.00099457512781808533715e0,
    0.0004941886041194645587e0,
    0.00024608655330804829864e0,
    0.00012271334757848914675e0,
    0.000061248135058704829259e0,
    0.000030588236307020493552e0,
    0.000015282259408651871733e0,
    0.0000076371976378997622736e0,
    0.0000038172932649998398565e0,
    0.0000019082127165539389257e0,
    0.00000095396203387279611315e0,
    0.00000047693298678780646312e0,
    0.00000023845050272773299e0,
    0.00000011921992596531107307e0,
    0.000000059608189051259479612e0,
    0.000000029803503514652280186e0,
    0.000000014901554828365041235e0,
    0.000000007450711789835429492e0,
    0.0000000037253340247884570548e0,
    0.0000000018626597235130490064e0,
    0.00000000093132743241966818287e0,
    0.0000000004656629065033784073e0,
    0.0000000002328311833676505492e0,
];

/// log Γ(2+z) for |z| ≤ 1/2: z(1-γ) + Σ (-1)^k (ζ(k)-1) z^k / k.
fn ln_gamma_two_plus(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -z;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate() {
        pow *= -z;
        sum += c * pow / (i + 2) as f64;
    }
    z * (1.0 - EULER_GAMMA) + sum
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// log Γ(x) for finite x > 0; NaN outside the domain.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    // (x-1)! is exact in binary64 up to 22!
    if x == x.floor() && x <= 23.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f.ln();
    }
    if x >= SHIFT_TARGET {
        return stirling_ln_gamma(x);
    }
    // near the zeros at 1 and 2 the shifted product loses relative accuracy
    if (1.5..=2.5).contains(&x) {
        return ln_gamma_two_plus(x - 2.0);
    }
    if (0.5..1.5).contains(&x) {
        return ln_gamma_two_plus(x - 1.0) - (x - 1.0).ln_1p();
    }
    let mut prod = 1.0;
    let mut y = x;
    while y < SHIFT_TARGET {
        prod *= y;
        y += 1.0;
    }
    stirling_ln_gamma(y) - prod.ln()
}

/// Checked log Γ(x).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.floor() {
        return 0.0;
    }
    let r = x - 2.0 * (x / 2.0).floor(); // r in [0, 2)
    let (r, sign) = if r > 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// Returns `(ln|Γ(x)|, sign Γ(x))` for any real x that is not a pole.
/// At non-positive integers returns `(+inf, 0.0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    if x == x.floor() {
        return (f64::INFINITY, 0.0);
    }
    // Γ(x) = π / (sin(πx) Γ(1-x))
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    (lg, s.signum())
}

/// Γ(x) for real x; infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    let (lg, sign) = ln_gamma_signed(x);
    if sign == 0.0 {
        return f64::INFINITY;
    }
    sign * lg.exp()
}

/// 1/Γ(x), zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    let (lg, sign) = ln_gamma_signed(x);
    if sign == 0.0 {
        return 0.0;
    }
    sign * (-lg).exp()
}

/// ψ(x) = Γ'(x)/Γ(x) for finite x > 0; NaN otherwise.
pub fn psi(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_TARGET {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut pow = inv2;
    let mut series = 0.0;
    for c in DIGAMMA_ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    acc + y.ln() - 0.5 / y - series
}

/// ψ on the whole real line via reflection; NaN at the poles.
pub fn psi_real(x: f64) -> f64 {
    if x > 0.0 {
        return psi(x);
    }
    if x == x.floor() || !x.is_finite() {
        return f64::NAN;
    }
    // ψ(x) = ψ(1-x) - π cot(πx)
    let r = x - x.floor();
    psi(1.0 - x) - PI / (PI * r).tan()
}

/// Checked digamma.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("digamma requires finite x > 0, got {x}")));
    }
    Ok(psi(x))
}

/// Inverse of ψ on (0, ∞): the x > 0 with ψ(x) = y.
pub fn inverse_digamma(y: f64) -> f64 {
    // Initial guess from ψ(x) ≈ ln(x - 1/2) for large x and -1/x near 0.
    let mut x = if y >= -2.22 { y.exp() + 0.5 } else { -1.0 / (y + EULER_GAMMA) };
    for _ in 0..40 {
        let f = psi(x) - y;
        let d = trigamma(x);
        let step = f / d;
        let next = x - step;
        x = if next <= 0.0 { x / 2.0 } else { next };
        if step.abs() <= 1e-15 * x {
            break;
        }
    }
    x
}

/// ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    while y < SHIFT_TARGET {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // 1/y + 1/(2y²) + Σ B_{2k}/y^{2k+1}
    let series = inv
        * (1.0
            + inv * 0.5
            + inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
    acc + series
}

/// log of the binomial coefficient C(x, k) for real x ≥ k - 1 > -1 given through Γ.
pub fn ln_binomial(top: f64, k: f64) -> f64 {
    ln_gamma(top + 1.0) - ln_gamma(k + 1.0) - ln_gamma(top - k + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(4.0).unwrap() - 6f64.ln()).abs() < 1e-14);
        let half = 0.5 * PI.ln();
        assert!((log_gamma(0.5).unwrap() - half).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_domain() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn log_gamma_factorials_relative() {
        // ln n! against a direct log-sum, across the shift boundary and far past it.
        let mut lf = 0.0f64;
        for n in 1..=170u32 {
            lf += (n as f64).ln();
            let got = ln_gamma(n as f64 + 1.0);
            assert!((got - lf).abs() <= 1e-13 * lf.abs().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn log_gamma_near_roots() {
        // mpmath oracles
        let cases = [
            (1.001, -5.763_935_982_833_061_5e-4),
            (0.999, 5.780_385_328_913_802_4e-4),
            (2.0001, 4.228_165_811_291_994_6e-5),
            (1.4999, -1.207_858_819_584_939_4e-1),
            (2.6, 3.574_118_635_489_798_4e-1),
        ];
        for (x, expect) in cases {
            let got = ln_gamma(x);
            assert!((got - expect).abs() <= 1e-13 * expect.abs(), "x = {x}: {got} vs {expect}");
        }
        assert_eq!(ln_gamma(2.0), 0.0);
        assert_eq!(ln_gamma(1.0), 0.0);
    }

    #[test]
    fn log_gamma_large_argument() {
        // Stirling leading terms at 1e6, plus the 1/(12x) correction.
        let x = 1e6f64;
        let expect = (x - 0.5) * x.ln() - x + HALF_LN_2PI + 1.0 / (12.0 * x);
        assert!((ln_gamma(x) - expect).abs() / expect < 1e-15);
    }

    #[test]
    fn small_argument_uses_reflection_of_pole() {
        // Γ(x) ~ 1/x - γ near zero.
        let x = 1e-3;
        let expect = (1.0 / x - EULER_GAMMA + 0.989_055_995_327_972_6 * x).ln();
        assert!((ln_gamma(x) - expect).abs() < 1e-9);
    }

    #[test]
    fn digamma_examples() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-13);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-13);
        let expect = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((digamma(0.5).unwrap() - expect).abs() < 1e-13);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-3.0).is_err());
    }

    #[test]
    fn signed_gamma_negative_arguments() {
        // Γ(-1/2) = -2√π, Γ(-3/2) = 4√π/3
        let sp = PI.sqrt();
        assert!((gamma(-0.5) + 2.0 * sp).abs() < 1e-13);
        assert!((gamma(-1.5) - 4.0 * sp / 3.0).abs() < 1e-13);
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!((rgamma(3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn digamma_reflection() {
        // ψ(-1/2) = ψ(1/2) + 2
        assert!((psi_real(-0.5) - (psi(0.5) + 2.0)).abs() < 1e-13);
        assert!((psi_real(-1.5) - (psi(0.5) + 2.0 + 2.0 / 3.0)).abs() < 1e-13);
        assert!(psi_real(-2.0).is_nan());
    }

    #[test]
    fn inverse_digamma_roundtrip() {
        for &x in &[0.05, 0.3, 1.0, 2.5, 17.0, 400.0] {
            let y = psi(x);
            assert!((inverse_digamma(y) - x).abs() < 1e-10 * x.max(1.0), "x = {x}");
        }
    }

    #[test]
    fn trigamma_matches_difference_of_digamma() {
        for &x in &[0.3, 1.0, 4.0, 12.5, 80.0] {
            let h = 1e-5 * x;
            let fd = (psi(x + h) - psi(x - h)) / (2.0 * h);
            assert!((trigamma(x) - fd).abs() < 1e-6 * trigamma(x), "x = {x}");
        }
    }
}
