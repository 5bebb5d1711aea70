//! Analytic low-temperature approximations to the pulsed decoherence factor
//! for 1/f baths, and the cosine/sine integrals they are built from.
//!
//! These run independently of the quadrature path and cross-check it: the
//! zero-temperature part follows from approximating `tan^2 x` by
//! `x^2 (1 - 2x/pi)^(-1)`, the thermal correction from expanding
//! `coth x ~ 1 + 2 exp(-2x)` and letting the cutoffs go to their limits.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::bath::{PulseSchedule, SpectralDensity};
use crate::error::{Error, Result};

/// Euler-Mascheroni constant to 20 digits (rounds to the nearest f64); named
/// to stay visually distinct from bath couplings.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Argument below which Ci/Si use their power series; above it a complex
/// continued fraction for the exponential integral takes over. Both reach
/// ~1e-15 at the switch in under 30 terms.
const SERIES_SWITCH: f64 = 4.0;

const MAX_CF_ITERATIONS: usize = 200;

/// Cosine integral `Ci(x) = euler_gamma + ln x + int_0^x (cos u - 1)/u du`.
///
/// Absolute error stays below 1e-13 across the series/continued-fraction
/// switch at `x = 4`.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Ci requires x > 0, got {x}")));
    }
    if x <= SERIES_SWITCH {
        Ok(ci_series(x))
    } else {
        Ok(cisi_continued_fraction(x).0)
    }
}

/// Sine integral `Si(x) = int_0^x sin(u)/u du`; `Si(0) = 0`,
/// `Si(x) -> pi/2` as `x -> inf`.
pub fn sine_integral(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("Si requires x >= 0, got {x}")));
    }
    if x <= SERIES_SWITCH {
        Ok(si_series(x))
    } else {
        Ok(cisi_continued_fraction(x).1)
    }
}

fn ci_series(x: f64) -> f64 {
    // sum_{k>=1} (-1)^k x^(2k) / (2k * (2k)!)
    let x2 = x * x;
    let mut power_term = 1.0; // (-1)^k x^(2k) / (2k)!
    let mut sum = 0.0;
    for k in 1..=60 {
        let kf = k as f64;
        power_term *= -x2 / ((2.0 * kf - 1.0) * 2.0 * kf);
        let term = power_term / (2.0 * kf);
        sum += term;
        if term.abs() < f64::EPSILON * sum.abs().max(1e-300) {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

fn si_series(x: f64) -> f64 {
    // sum_{k>=0} (-1)^k x^(2k+1) / ((2k+1) * (2k+1)!)
    let x2 = x * x;
    let mut power_term = x; // (-1)^k x^(2k+1) / (2k+1)!
    let mut sum = x;
    for k in 1..=60 {
        let kf = k as f64;
        power_term *= -x2 / (2.0 * kf * (2.0 * kf + 1.0));
        let term = power_term / (2.0 * kf + 1.0);
        sum += term;
        if term.abs() < f64::EPSILON * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Modified-Lentz continued fraction for `E_1(i x)`; then
/// `Ci(x) = -Re E_1(ix)` and `Si(x) = pi/2 + Im E_1(ix)`.
fn cisi_continued_fraction(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    const TINY: f64 = 1e-290;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_CF_ITERATIONS {
        let a = -((i * i) as f64);
        b += Complex64::new(2.0, 0.0);
        d = (a * d + b).inv();
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if (delta.re - 1.0).abs() + delta.im.abs() < f64::EPSILON {
            break;
        }
    }
    let e1 = h * Complex64::new(x.cos(), -x.sin());
    (-e1.re, FRAC_PI_2 + e1.im)
}

/// Validity regime of the closed-form approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Inside the derivation window of every approximation used.
    Valid,
    /// Outside a derivation window but still finite and empirically tracking
    /// the exact curves (the figure-level 1/f runs sit here).
    Marginal,
    /// The zero-temperature form diverges; do not evaluate.
    Invalid,
}

/// Classification of a parameter point with human-readable reasons for any
/// violated condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationValidity {
    pub regime: Regime,
    pub reasons: Vec<String>,
}

/// Classify `(density, schedule, temperature)` against the approximation
/// conditions: the tan^2 replacement needs `uv*dt < pi/2` (the form itself
/// diverges at `uv*dt = pi`), and the thermal expansion of coth needs
/// `ir/(2T) > 1`.
pub fn check_validity(
    density: &SpectralDensity,
    schedule: &PulseSchedule,
    temperature: f64,
) -> ApproximationValidity {
    let x_uv = density.uv_cutoff() * schedule.interval();
    let mut reasons = Vec::new();
    if x_uv >= PI {
        reasons.push(format!(
            "uv_cutoff * dt = {x_uv:.4} >= pi: the filter approximation's logarithm diverges"
        ));
        return ApproximationValidity { regime: Regime::Invalid, reasons };
    }
    let mut regime = Regime::Valid;
    if x_uv >= FRAC_PI_2 {
        regime = Regime::Marginal;
        reasons.push(format!(
            "uv_cutoff * dt = {x_uv:.4} in [pi/2, pi): beyond the tan^2 ~ x^2(1-2x/pi)^-1 window"
        ));
    }
    if temperature > 0.0 {
        let x_ir = density.ir_cutoff() / (2.0 * temperature);
        if x_ir <= 1.0 {
            regime = Regime::Marginal;
            reasons.push(format!(
                "coth expansion 1 + 2exp(-2x) needs x = ir_cutoff/(2T) > 1, got {x_ir:.4}"
            ));
        }
    }
    ApproximationValidity { regime, reasons }
}

/// Zero-temperature closed form of the pulsed decoherence factor for a 1/f
/// density, evaluated at `t_2N = 2*N*dt`:
///
/// `gamma * dt^2 * [ ln(uv/ir) - ln((pi - uv*dt)/(pi - ir*dt))
///                   - Ci(uv*t_2N) + Ci(ir*t_2N) ]`
///
/// The infrared scale inside the first logarithm and the second cosine
/// integral is the IR cutoff, the only such scale in the model (the
/// plateau-level cross-checks back this up). The O(dt) remainder is dropped.
pub fn gamma_pulsed_t0_closed(density: &SpectralDensity, schedule: &PulseSchedule) -> Result<f64> {
    gamma_pulsed_t0_closed_at(density, schedule.interval(), schedule.total_time())
}

/// Same zero-temperature form at an arbitrary elapsed time `t`, for smooth
/// curves between cycle completions.
pub fn gamma_pulsed_t0_closed_at(density: &SpectralDensity, dt: f64, t: f64) -> Result<f64> {
    if density.exponent() != -1.0 {
        return Err(Error::Domain(format!(
            "closed form is derived for the 1/f density (nu = -1), got nu = {}",
            density.exponent()
        )));
    }
    let ir = density.ir_cutoff();
    let uv = density.uv_cutoff();
    let x_uv = uv * dt;
    if x_uv >= PI {
        return Err(Error::Domain(format!(
            "uv_cutoff * dt = {x_uv:.6} >= pi: closed form diverges as the pulse interval \
             approaches the inverse UV cutoff"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("closed form requires t > 0, got {t}")));
    }
    let bracket = (uv / ir).ln() - ((PI - x_uv) / (PI - ir * dt)).ln()
        - cosine_integral(uv * t)?
        + cosine_integral(ir * t)?;
    Ok(density.coupling() * dt * dt * bracket)
}

/// Leading finite-temperature correction (cutoff-free limit):
///
/// `(gamma * dt^2 / 2) * [ ln(1 + T^2 t^2) + (2*dt*T/pi) * (1 - 1/(1 + T^2 t^2)) ]`
///
/// The O(T^2) remainder is dropped. The first term carries the asymptotic
/// power-law decay; the second settles to a t-independent constant.
pub fn gamma_pulsed_thermal_closed(
    coupling: f64,
    dt: f64,
    temperature: f64,
    t: f64,
) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "thermal correction requires T > 0, got {temperature}"
        )));
    }
    if !(coupling > 0.0 && dt > 0.0 && t >= 0.0) {
        return Err(Error::Domain(
            "thermal correction requires coupling > 0, dt > 0, t >= 0".into(),
        ));
    }
    let u = temperature * t;
    let one_plus = 1.0 + u * u;
    let bracket = one_plus.ln() + (2.0 * dt * temperature / PI) * (1.0 - 1.0 / one_plus);
    Ok(0.5 * coupling * dt * dt * bracket)
}

/// Total closed-form pulsed decoherence factor: zero-temperature part plus
/// the thermal correction when `T > 0`.
pub fn gamma_pulsed_closed_total(
    density: &SpectralDensity,
    dt: f64,
    temperature: f64,
    t: f64,
) -> Result<f64> {
    let mut total = gamma_pulsed_t0_closed_at(density, dt, t)?;
    if temperature > 0.0 {
        total += gamma_pulsed_thermal_closed(density.coupling(), dt, temperature, t)?;
    }
    Ok(total)
}
