//! The decoherence exponents `Gamma_0(t)` and `Gamma_P(N, dt)`, coherence
//! elements, and the suppression ratio comparing the two at equal elapsed
//! time.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::bath::{BathSpec, PulseSchedule, QubitSpec};
use crate::error::{Error, Result};
use crate::quadrature::{
    breakpoints, free_integrand_unchecked, integrate, oscillation_mesh,
    pulsed_integrand_unchecked, QuadratureConfig,
};

/// How a decoherence exponent was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    ClosedForm,
}

/// A decoherence exponent at one instant, normalized to unit initial
/// coherence: the retained magnitude is exactly `exp(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceValue {
    pub gamma: f64,
    pub coherence_magnitude: f64,
    pub time: f64,
    pub method: Method,
    /// False when the quadrature hit its subdivision budget; the value is
    /// then the best available estimate.
    pub converged: bool,
    pub error_estimate: f64,
}

impl DecoherenceValue {
    fn from_gamma(gamma: f64, time: f64, method: Method, converged: bool, err: f64) -> Self {
        Self {
            gamma,
            coherence_magnitude: (-gamma).exp(),
            time,
            method,
            converged,
            error_estimate: err,
        }
    }

    /// Exact-zero exponent (used for `t = 0` short circuits).
    pub fn zero(method: Method) -> Self {
        Self::from_gamma(0.0, 0.0, method, true, 0.0)
    }

    /// Wrap a closed-form exponent.
    pub fn closed_form(gamma: f64, time: f64) -> Self {
        Self::from_gamma(gamma, time, Method::ClosedForm, true, 0.0)
    }
}

/// Free-evolution decoherence factor
/// `Gamma_0(t) = int coth(omega/2T) (1 - cos(omega t)) / omega^2 I(omega) domega`
/// over the bath band. `Gamma_0(0) = 0` exactly (the integrand vanishes
/// identically, so no quadrature is run).
pub fn gamma_free(bath: &BathSpec, t: f64, config: &QuadratureConfig) -> Result<DecoherenceValue> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("gamma_free requires t >= 0, got {t}")));
    }
    config.validate()?;
    if t == 0.0 {
        return Ok(DecoherenceValue::zero(Method::Quadrature));
    }
    let d = bath.density();
    let mesh = oscillation_mesh(t, d.ir_cutoff(), d.uv_cutoff(), config.oscillation_resolution);
    let r = integrate(|w| free_integrand_unchecked(w, bath, t), &mesh, config);
    Ok(DecoherenceValue::from_gamma(
        r.value.max(0.0),
        t,
        Method::Quadrature,
        r.converged,
        r.error_estimate,
    ))
}

/// Pulsed decoherence factor after `N` full cycles,
/// `Gamma_P(N, dt) = 4 int coth(omega/2T) (1 - cos(omega t_2N)) / omega^2
///                     I(omega) tan^2(omega dt / 2) domega`,
/// using the regularized integrand and pole-aware panel boundaries.
pub fn gamma_pulsed(
    bath: &BathSpec,
    schedule: &PulseSchedule,
    config: &QuadratureConfig,
) -> Result<DecoherenceValue> {
    config.validate()?;
    let d = bath.density();
    let t_total = schedule.total_time();
    let pts = breakpoints(
        schedule.interval(),
        t_total,
        d.ir_cutoff(),
        d.uv_cutoff(),
        config.oscillation_resolution,
    );
    let r = integrate(|w| pulsed_integrand_unchecked(w, bath, schedule), &pts, config);
    Ok(DecoherenceValue::from_gamma(
        r.value.max(0.0),
        t_total,
        Method::Quadrature,
        r.converged,
        r.error_estimate,
    ))
}

/// Pulsed decoherence factor with the pulse interval decoupled from the
/// elapsed time (`t` need not equal `2*N*dt`). The formula stays well defined
/// only while every filter pole lies above the band, so this requires
/// `dt < pi / uv_cutoff`; it exists for crossover root-finding, where `t` is
/// held fixed while `dt` varies continuously. Physical schedules should use
/// [`gamma_pulsed`].
pub fn gamma_pulsed_continuous(
    bath: &BathSpec,
    interval: f64,
    t: f64,
    config: &QuadratureConfig,
) -> Result<DecoherenceValue> {
    config.validate()?;
    let d = bath.density();
    if !(interval > 0.0) || interval * d.uv_cutoff() >= PI {
        return Err(Error::Domain(format!(
            "continuous-interval evaluation requires 0 < dt < pi/uv_cutoff = {:e}, got {interval:e}",
            PI / d.uv_cutoff()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(DecoherenceValue::zero(Method::Quadrature));
    }
    let mesh = oscillation_mesh(t, d.ir_cutoff(), d.uv_cutoff(), config.oscillation_resolution);
    let f = |w: f64| {
        let s = (0.5 * w * t).sin();
        let tan = (0.5 * w * interval).tan();
        4.0 * bath.thermal_unchecked(w)
            * bath.density().density_unchecked(w)
            * (2.0 * s * s)
            * (tan * tan)
            / (w * w)
    };
    let r = integrate(f, &mesh, config);
    Ok(DecoherenceValue::from_gamma(
        r.value.max(0.0),
        t,
        Method::Quadrature,
        r.converged,
        r.error_estimate,
    ))
}

/// Coherence element at the instant of `value`:
/// `exp(-i * eps * t) * exp(-gamma) * rho01(0)`. The magnitude does not
/// depend on the level splitting.
pub fn coherence(qubit: &QubitSpec, value: &DecoherenceValue) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -qubit.level_splitting * value.time);
    phase * value.coherence_magnitude * qubit.initial_coherence
}

/// Suppression ratio `S = Gamma_P(N, dt) / Gamma_0(t_2N)` at equal elapsed
/// time: `S < 1` means the pulses suppress decoherence, `S > 1` means they
/// enhance it.
pub fn suppression_ratio(
    bath: &BathSpec,
    schedule: &PulseSchedule,
    config: &QuadratureConfig,
) -> Result<f64> {
    let free = gamma_free(bath, schedule.total_time(), config)?;
    let threshold = 10.0 * config.abs_tol;
    if free.gamma <= threshold {
        return Err(Error::UndefinedRatio { gamma_free: free.gamma, threshold });
    }
    let pulsed = gamma_pulsed(bath, schedule, config)?;
    Ok(pulsed.gamma / free.gamma)
}
