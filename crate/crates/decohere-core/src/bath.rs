//! Bath, pulse-schedule and qubit data types, and the pointwise spectral,
//! thermal and pulse-filter factors they induce.
//!
//! Everything here works in natural units (hbar = k_B = 1): temperatures and
//! energies are angular frequencies, times are inverse angular frequencies.
//! All values are immutable after construction and every function is pure, so
//! concurrent use needs no synchronization.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Residual of `pi` after rounding to f64, for Cody-Waite style reduction of
/// pulse phases against odd multiples of pi.
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Power-law spectral density `I(omega) = gamma * omega^nu` supported on the
/// band `[ir_cutoff, uv_cutoff]` with sudden (hard) cutoffs.
///
/// Only `nu = -1` (1/f) and `nu = +1` (Ohmic) are exercised by the test
/// suites, but any real exponent is accepted so 1/f^alpha baths can be
/// explored. Note the units: the coupling `gamma` carries `omega^(1-nu)`,
/// the one assignment that leaves the decoherence exponent dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    exponent: f64,
    coupling: f64,
    ir_cutoff: f64,
    uv_cutoff: f64,
}

impl SpectralDensity {
    /// Build a density, validating `coupling > 0` and `0 < ir < uv`.
    pub fn new(exponent: f64, coupling: f64, ir_cutoff: f64, uv_cutoff: f64) -> Result<Self> {
        if !coupling.is_finite() || coupling <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coupling must be positive, got {coupling}"
            )));
        }
        if !(ir_cutoff > 0.0 && ir_cutoff < uv_cutoff && uv_cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoffs must satisfy 0 < ir < uv, got ir = {ir_cutoff}, uv = {uv_cutoff}"
            )));
        }
        if !exponent.is_finite() {
            return Err(Error::InvalidParameter("exponent must be finite".into()));
        }
        Ok(Self { exponent, coupling, ir_cutoff, uv_cutoff })
    }

    /// 1/f density (`nu = -1`).
    pub fn one_over_f(coupling: f64, ir_cutoff: f64, uv_cutoff: f64) -> Result<Self> {
        Self::new(-1.0, coupling, ir_cutoff, uv_cutoff)
    }

    /// Ohmic density (`nu = +1`).
    pub fn ohmic(coupling: f64, ir_cutoff: f64, uv_cutoff: f64) -> Result<Self> {
        Self::new(1.0, coupling, ir_cutoff, uv_cutoff)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn ir_cutoff(&self) -> f64 {
        self.ir_cutoff
    }

    pub fn uv_cutoff(&self) -> f64 {
        self.uv_cutoff
    }

    /// Same density with the coupling replaced (used by linearity tests and
    /// sweep construction).
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.exponent, coupling, self.ir_cutoff, self.uv_cutoff)
    }

    /// `I(omega)`: `gamma * omega^nu` inside `[ir, uv]`, exactly zero outside.
    ///
    /// Errors on `omega <= 0`; the density is defined on positive frequencies
    /// only.
    pub fn density_at(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!(
                "spectral density requires omega > 0, got {omega}"
            )));
        }
        Ok(self.density_unchecked(omega))
    }

    /// Fast path for integrand loops; caller guarantees `omega > 0`.
    #[inline]
    pub(crate) fn density_unchecked(&self, omega: f64) -> f64 {
        debug_assert!(omega > 0.0);
        if omega < self.ir_cutoff || omega > self.uv_cutoff {
            return 0.0;
        }
        if self.exponent == -1.0 {
            self.coupling / omega
        } else if self.exponent == 1.0 {
            self.coupling * omega
        } else {
            self.coupling * omega.powf(self.exponent)
        }
    }
}

/// A spectral density together with a bath temperature `T >= 0` in angular
/// frequency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    density: SpectralDensity,
    temperature: f64,
}

impl BathSpec {
    pub fn new(density: SpectralDensity, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        Ok(Self { density, temperature })
    }

    /// Zero-temperature bath; the thermal factor is then exactly 1.
    pub fn zero_temperature(density: SpectralDensity) -> Self {
        Self { density, temperature: 0.0 }
    }

    pub fn density(&self) -> &SpectralDensity {
        &self.density
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Thermal time scale `t_beta = 1/T`; `None` at zero temperature.
    pub fn thermal_time(&self) -> Option<f64> {
        (self.temperature > 0.0).then(|| self.temperature.recip())
    }

    #[inline]
    pub(crate) fn thermal_unchecked(&self, omega: f64) -> f64 {
        thermal_factor_unchecked(self.temperature, omega)
    }
}

/// Periodic bang-bang schedule: ideal (zero-width) pi-pulses at `t_n = n*dt`,
/// observed after `N` full cycles at `t_2N = 2*N*dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSchedule {
    interval: f64,
    half_cycles: u32,
}

impl PulseSchedule {
    pub fn new(interval: f64, half_cycles: u32) -> Result<Self> {
        if !(interval > 0.0) || !interval.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pulse interval must be positive, got {interval}"
            )));
        }
        if half_cycles == 0 {
            return Err(Error::InvalidParameter("half_cycles must be >= 1".into()));
        }
        Ok(Self { interval, half_cycles })
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn half_cycles(&self) -> u32 {
        self.half_cycles
    }

    /// Total evolved time `t_2N = 2*N*dt`, exact in f64 (2N is an integer).
    pub fn total_time(&self) -> f64 {
        2.0 * self.half_cycles as f64 * self.interval
    }
}

/// Qubit parameters entering the coherence element only.
///
/// The level splitting contributes the phase `exp(-i*eps*t)`; the coherence
/// magnitude is independent of it. The default initial coherence is 1 for
/// normalized studies (physical states have |rho01| <= 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    pub level_splitting: f64,
    pub initial_coherence: Complex64,
}

impl Default for QubitSpec {
    fn default() -> Self {
        Self { level_splitting: 0.0, initial_coherence: Complex64::new(1.0, 0.0) }
    }
}

/// `coth(omega / 2T)`, the symmetrized-bath occupation factor.
///
/// Exactly 1 at `T = 0` (zero temperature is represented exactly, never as a
/// small positive number). Evaluated as `1 + 2/expm1(omega/T)`, which is
/// stable both deep in the quantum regime (result -> 1) and in the classical
/// regime (result -> 2T/omega).
pub fn thermal_factor(temperature: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "thermal factor requires omega > 0, got {omega}"
        )));
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!(
            "thermal factor requires T >= 0, got {temperature}"
        )));
    }
    Ok(thermal_factor_unchecked(temperature, omega))
}

#[inline]
pub(crate) fn thermal_factor_unchecked(temperature: f64, omega: f64) -> f64 {
    debug_assert!(omega > 0.0 && temperature >= 0.0);
    if temperature == 0.0 {
        return 1.0;
    }
    let x = omega / temperature; // = 2 * (omega / 2T)
    if x > 1420.0 {
        // exp would overflow below; coth is 1 to within 1e-300 here.
        return 1.0;
    }
    1.0 + 2.0 / x.exp_m1()
}

/// Pointwise value of the pulse filter `tan^2(omega*dt/2)`, or a pole marker
/// when `omega*dt` is not machine-distinguishable from an odd multiple of pi.
///
/// The pole is removable only inside the full pulsed integrand (where
/// `1 - cos(omega*t_2N)` vanishes at the same points); standalone evaluation
/// must report it instead of returning garbage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterFactor {
    Finite(f64),
    /// `omega*dt` sits on `(2n+1)*pi` to within roundoff; `n` is the index.
    Pole { index: u64 },
}

impl FilterFactor {
    /// Finite value, panicking on a pole; convenient in tests.
    pub fn unwrap_finite(self) -> f64 {
        match self {
            FilterFactor::Finite(v) => v,
            FilterFactor::Pole { index } => {
                panic!("filter factor evaluated at pole n = {index}")
            }
        }
    }
}

/// Filter factor `tan^2(omega*dt/2)` of the periodic pulse train.
///
/// Values > 1 mark the enhancement windows `(4n+1)pi/2 < omega*dt <
/// (4n+3)pi/2`; values < 1 mark suppression.
pub fn filter_factor(interval: f64, omega: f64) -> Result<FilterFactor> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("filter factor requires omega > 0, got {omega}")));
    }
    if !(interval > 0.0) {
        return Err(Error::Domain(format!(
            "filter factor requires dt > 0, got {interval}"
        )));
    }
    let x = omega * interval;
    if x < FRAC_PI_2 {
        let t = (0.5 * x).tan();
        return Ok(FilterFactor::Finite(t * t));
    }
    let (delta, n) = reduce_odd_pi(x);
    // Machine-resolvable distance from the pole: a few ulps of the phase.
    if delta.abs() <= 8.0 * f64::EPSILON * x.max(PI) {
        return Ok(FilterFactor::Pole { index: n });
    }
    // tan(x/2) = -cot(delta/2) exactly when x = (2n+1)pi + delta.
    let half = 0.5 * delta;
    let cot = half.cos() / half.sin();
    Ok(FilterFactor::Finite(cot * cot))
}

/// Reduce `x > 0` against the nearest odd multiple of pi: returns
/// `(delta, n)` with `x = (2n+1)*pi + delta`, `|delta| <= pi`.
///
/// Double-double arithmetic in pi keeps `delta` accurate to ~`x * 1e-32`
/// absolute, which matters when the caller squares a near-cancellation.
#[inline]
pub(crate) fn reduce_odd_pi(x: f64) -> (f64, u64) {
    debug_assert!(x >= 0.0);
    let n = ((x / PI - 1.0) * 0.5).round().max(0.0);
    let m = 2.0 * n + 1.0;
    let delta = (x - m * PI) - m * PI_LO;
    (delta, n as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn density_invariants_rejected() {
        assert!(SpectralDensity::new(-1.0, 0.0, 1.0, 80.0).is_err());
        assert!(SpectralDensity::new(-1.0, -0.5, 1.0, 80.0).is_err());
        assert!(SpectralDensity::new(-1.0, 0.25, 0.0, 80.0).is_err());
        assert!(SpectralDensity::new(-1.0, 0.25, 80.0, 80.0).is_err());
        assert!(SpectralDensity::new(-1.0, 0.25, 80.0, 1.0).is_err());
    }

    #[test]
    fn density_pointwise_values() {
        // omega^nu = 1 at omega = 1
        let d = SpectralDensity::one_over_f(0.25, 0.5, 80.0).unwrap();
        assert_eq!(d.density_at(1.0).unwrap(), 0.25);
        // Ohmic with the Fig.-1 coupling: gamma*omega
        let d = SpectralDensity::ohmic(0.05, 1.0, 10.0).unwrap();
        assert_eq!(d.density_at(5.0).unwrap(), 0.25);
        // sudden cutoff
        assert_eq!(d.density_at(10.0 * 1.01).unwrap(), 0.0);
        assert_eq!(d.density_at(0.99).unwrap(), 0.0);
        assert!(d.density_at(0.0).is_err());
        assert!(d.density_at(-3.0).is_err());
    }

    #[test]
    fn thermal_factor_limits() {
        // zero-temperature limit is exact
        assert_eq!(thermal_factor(0.0, 3.0).unwrap(), 1.0);
        // deep quantum regime: coth -> 1 within 1e-43 at omega/2T = 50
        let v = thermal_factor(1.0, 100.0).unwrap();
        assert!((v - 1.0).abs() < 1e-43, "coth asymptote violated: {v}");
        // classical regime, frozen from the series oracle coth(x) = 1/x + x/3 - x^3/45:
        // x = 5e-4 -> 2000 + 1.6666666664e-4 (next term ~2.8e-12)
        let v = thermal_factor(10.0, 0.01).unwrap();
        let series = 2000.0 + 5e-4 / 3.0 - 5e-4f64.powi(3) / 45.0;
        assert!(rel_err(v, series) < 1e-12, "v = {v:.12e}, series = {series:.12e}");
        assert!((v - 2000.0001666666664).abs() < 1e-9);
    }

    #[test]
    fn thermal_factor_domain() {
        assert!(thermal_factor(1.0, 0.0).is_err());
        assert!(thermal_factor(-1.0, 1.0).is_err());
    }

    #[test]
    fn filter_factor_values() {
        // omega*dt = pi/2 -> tan^2(pi/4) = 1
        let v = filter_factor(0.5, PI).unwrap().unwrap_finite();
        assert!((v - 1.0).abs() < 1e-14);
        // omega*dt = 2pi/3 -> tan^2(pi/3) = 3
        let v = filter_factor(2.0 * PI / 3.0, 1.0).unwrap().unwrap_finite();
        assert!((v - 3.0).abs() < 1e-13);
        // small angle: tan^2 ~ (omega dt / 2)^2
        let v = filter_factor(1e-5, 1.0).unwrap().unwrap_finite();
        assert!(rel_err(v, 2.5e-11) < 1e-9);
    }

    #[test]
    fn filter_factor_pole_detection() {
        for n in [0u64, 1, 4, 20] {
            let x = (2 * n + 1) as f64 * PI;
            match filter_factor(1.0, x).unwrap() {
                FilterFactor::Pole { index } => assert_eq!(index, n),
                FilterFactor::Finite(v) => panic!("expected pole at n = {n}, got {v}"),
            }
        }
        // just off the pole is finite (guard is a few ulps wide only)
        assert!(matches!(
            filter_factor(1.0, PI + 1e-9).unwrap(),
            FilterFactor::Finite(_)
        ));
    }

    #[test]
    fn reduce_odd_pi_accuracy() {
        // exact phases reconstructed from (2n+1)pi + delta
        for n in 0..50u64 {
            for delta in [-1.0, -1e-4, 0.0, 3e-7, 0.7] {
                let x = (2 * n + 1) as f64 * PI + delta;
                if x <= 0.0 {
                    continue;
                }
                let (d, k) = reduce_odd_pi(x);
                assert_eq!(k, n, "x = {x}");
                assert!(
                    (d - delta).abs() < 1e-10 * (1.0 + x),
                    "n = {n}, delta = {delta}, got {d}"
                );
            }
        }
    }

    #[test]
    fn schedule_total_time_exact() {
        let s = PulseSchedule::new(0.025, 100).unwrap();
        assert_eq!(s.total_time(), 5.0);
        assert!(PulseSchedule::new(0.0, 3).is_err());
        assert!(PulseSchedule::new(0.1, 0).is_err());
    }

    #[test]
    fn thermal_time_only_above_zero() {
        let d = SpectralDensity::one_over_f(0.25, 1.0, 80.0).unwrap();
        assert_eq!(BathSpec::zero_temperature(d).thermal_time(), None);
        let b = BathSpec::new(d, 4.0).unwrap();
        assert_eq!(b.thermal_time(), Some(0.25));
        assert!(BathSpec::new(d, -1.0).is_err());
    }

    /// Median frequency of the density mass: Ohmic piles near the UV cutoff,
    /// 1/f near the IR cutoff. Analytic medians: sqrt((ir^2+uv^2)/2) for
    /// nu = +1 and sqrt(ir*uv) for nu = -1.
    #[test]
    fn density_mass_concentration() {
        let ir = 1.0;
        let uv = 80.0;
        let numeric_median = |d: &SpectralDensity| {
            let n = 200_000;
            let h = (uv - ir) / n as f64;
            let total: f64 = (0..n)
                .map(|i| d.density_unchecked(ir + (i as f64 + 0.5) * h) * h)
                .sum();
            let mut acc = 0.0;
            for i in 0..n {
                acc += d.density_unchecked(ir + (i as f64 + 0.5) * h) * h;
                if acc >= 0.5 * total {
                    return ir + (i as f64 + 1.0) * h;
                }
            }
            uv
        };
        let ohmic = SpectralDensity::ohmic(0.25, ir, uv).unwrap();
        let pink = SpectralDensity::one_over_f(0.25, ir, uv).unwrap();
        let m_ohmic = numeric_median(&ohmic);
        let m_pink = numeric_median(&pink);
        assert!(rel_err(m_ohmic, ((ir * ir + uv * uv) / 2.0).sqrt()) < 1e-3);
        assert!(rel_err(m_pink, (ir * uv).sqrt()) < 1e-3);
        let mid = 0.5 * (ir + uv);
        assert!(m_ohmic > mid && m_pink < mid);
    }

    proptest! {
        /// coth bounds and monotonicity: >= 1 always, decreasing in omega,
        /// increasing in T.
        #[test]
        fn thermal_factor_monotone(
            t in 1e-6f64..1e4,
            omega in 1e-6f64..1e4,
            scale in 1.001f64..10.0,
        ) {
            let v = thermal_factor(t, omega).unwrap();
            prop_assert!(v >= 1.0);
            let v_hot = thermal_factor(t * scale, omega).unwrap();
            let v_high = thermal_factor(t, omega * scale).unwrap();
            prop_assert!(v_hot > v || (v_hot - 1.0).abs() < 1e-15);
            prop_assert!(v_high < v || (v_high - 1.0).abs() < 1e-15);
        }

        /// Enhancement windows: tan^2(x/2) > 1 exactly for
        /// x mod 2pi in (pi/2, 3pi/2).
        #[test]
        fn filter_enhancement_windows(x in 1e-3f64..60.0) {
            let reduced = x.rem_euclid(2.0 * PI);
            let expect_enhanced = reduced > FRAC_PI_2 && reduced < 1.5 * PI;
            // skip the window boundary itself: equality there is exact math,
            // not representable
            prop_assume!((reduced - FRAC_PI_2).abs() > 1e-9);
            prop_assume!((reduced - 1.5 * PI).abs() > 1e-9);
            prop_assume!((reduced - PI).abs() > 1e-9);
            if let FilterFactor::Finite(v) = filter_factor(1.0, x).unwrap() {
                prop_assert_eq!(v > 1.0, expect_enhanced, "x = {}, v = {}", x, v);
            }
        }

        /// Density support: nonnegative everywhere, zero outside the band.
        #[test]
        fn density_support(omega in 1e-9f64..1e3, nu in -1.5f64..1.5) {
            let d = SpectralDensity::new(nu, 0.7, 0.5, 100.0).unwrap();
            let v = d.density_at(omega).unwrap();
            prop_assert!(v >= 0.0);
            if !(0.5..=100.0).contains(&omega) {
                prop_assert_eq!(v, 0.0);
            } else {
                prop_assert!(v > 0.0);
            }
        }
    }
}
