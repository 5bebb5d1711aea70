//! Adaptive, singularity- and oscillation-aware quadrature over the bath
//! band `[ir_cutoff, uv_cutoff]`.
//!
//! The pulsed integrand is evaluated in a regularized form so that the
//! removable singularities of `tan^2(omega*dt/2)` at `omega*dt = (2n+1)*pi`
//! stay finite and continuous; those frequencies are also inserted as panel
//! boundaries so no quadrature node straddles one. Panels use the 15-point
//! Gauss-Kronrod rule with the embedded 7-point Gauss error estimate, and the
//! worst panel is bisected until the global estimate meets tolerance.
//! Refinement order is deterministic for a fixed configuration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::bath::{reduce_odd_pi, BathSpec, PulseSchedule};
use crate::error::{Error, Result};

/// Half-width of the guard band around each removable singularity, in units
/// of the phase `omega*dt`. Inside the band a 4th-order series replaces the
/// direct product, which loses ~12 digits there.
pub const GUARD_BAND_HALF_WIDTH: f64 = 1e-6 * PI;

/// Tolerances and partition policy for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the integral value.
    pub abs_tol: f64,
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Maximum number of adaptive bisections before giving up (the result is
    /// then reported with `converged = false`, never raised as an error).
    pub max_subdivisions: u32,
    /// Minimum quadrature panels per period of the fastest oscillation
    /// `cos(omega * t_2N)` when building the initial mesh.
    pub oscillation_resolution: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1 << 15,
            oscillation_resolution: 8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 1 || self.oscillation_resolution < 1 {
            return Err(Error::InvalidParameter(
                "max_subdivisions and oscillation_resolution must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

/// Pole frequencies `(2n+1)*pi/dt` strictly inside `(ir, uv)`.
pub fn singular_frequencies(interval: f64, ir: f64, uv: f64) -> Vec<f64> {
    debug_assert!(interval > 0.0 && 0.0 < ir && ir < uv);
    // Bounded like the linear mesh: an absurd interval*bandwidth keeps the
    // lowest poles and leaves the rest to adaptive refinement (which will
    // flag non-convergence if it matters).
    const MAX_POLES: usize = 1 << 20;
    let mut out = Vec::new();
    let mut n: u64 = 0;
    while out.len() < MAX_POLES {
        let w = (2 * n + 1) as f64 * PI / interval;
        if w >= uv {
            break;
        }
        if w > ir {
            out.push(w);
        }
        n += 1;
    }
    out
}

/// Uniform mesh over `[ir, uv]` fine enough to resolve `cos(omega * t)`,
/// spacing at most `2*pi / (points_per_period * t)`, merged with a coarse
/// logarithmic seed so wide bands (uv/ir up to many decades) start with
/// panels of bounded dynamic range. Endpoints included, ascending.
pub fn oscillation_mesh(t: f64, ir: f64, uv: f64, points_per_period: u32) -> Vec<f64> {
    debug_assert!(0.0 < ir && ir < uv);
    let mut pts = vec![ir, uv];
    if t > 0.0 {
        let spacing = 2.0 * PI / (points_per_period.max(1) as f64 * t);
        // Hard cap so a pathological (huge t * bandwidth) request degrades to
        // adaptive refinement instead of an unbounded allocation.
        const MAX_LINEAR_PANELS: usize = 1 << 17;
        let n = ((uv - ir) / spacing).ceil() as usize;
        let n = n.clamp(1, MAX_LINEAR_PANELS);
        let h = (uv - ir) / n as f64;
        for k in 1..n {
            pts.push(ir + k as f64 * h);
        }
    }
    // ~4 seeds per decade keep the leftmost panels of steep power-law
    // integrands narrow on a log scale.
    let decades = (uv / ir).log10();
    if decades > 1.0 {
        let n_log = (4.0 * decades).ceil() as usize;
        let ratio = (uv / ir).powf(1.0 / n_log as f64);
        let mut w = ir;
        for _ in 1..n_log {
            w *= ratio;
            pts.push(w);
        }
    }
    sort_dedup(&mut pts, ir, uv);
    pts
}

/// Panel boundaries for the pulsed integrand: the oscillation mesh for
/// `cos(omega * t_total)` merged with every removable singularity of the
/// filter, sorted, endpoints included.
pub fn breakpoints(
    interval: f64,
    t_total: f64,
    ir: f64,
    uv: f64,
    points_per_period: u32,
) -> Vec<f64> {
    let mut pts = oscillation_mesh(t_total, ir, uv, points_per_period);
    pts.extend(singular_frequencies(interval, ir, uv));
    sort_dedup(&mut pts, ir, uv);
    pts
}

fn sort_dedup(pts: &mut Vec<f64>, ir: f64, uv: f64) {
    pts.retain(|&w| (ir..=uv).contains(&w));
    pts.sort_by(f64::total_cmp);
    let min_gap = (uv - ir) * 1e-12;
    pts.dedup_by(|a, b| (*a - *b).abs() <= min_gap);
    if *pts.last().unwrap() != uv {
        pts.push(uv);
    }
}

/// Integrand of the free-evolution decoherence factor:
/// `coth(omega/2T) * (1 - cos(omega*t)) / omega^2 * I(omega)`.
///
/// Finite everywhere on the band (the IR cutoff is positive); errors outside
/// `[ir, uv]` or for `t < 0`.
pub fn free_integrand(omega: f64, bath: &BathSpec, t: f64) -> Result<f64> {
    let d = bath.density();
    if !(omega >= d.ir_cutoff() && omega <= d.uv_cutoff()) {
        return Err(Error::Domain(format!(
            "free integrand requires omega in [{}, {}], got {omega}",
            d.ir_cutoff(),
            d.uv_cutoff()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("free integrand requires t >= 0, got {t}")));
    }
    Ok(free_integrand_unchecked(omega, bath, t))
}

#[inline]
pub(crate) fn free_integrand_unchecked(omega: f64, bath: &BathSpec, t: f64) -> f64 {
    // 1 - cos(x) = 2 sin^2(x/2), exact and cancellation-free
    let s = (0.5 * omega * t).sin();
    let osc = 2.0 * s * s;
    bath.thermal_unchecked(omega) * osc * bath.density().density_unchecked(omega)
        / (omega * omega)
}

/// Regularized integrand of the pulsed decoherence factor:
/// `4 * coth(omega/2T) * I(omega) * (1 - cos(omega*t_2N)) * tan^2(omega*dt/2) / omega^2`
/// with `t_2N = 2*N*dt`, evaluated through the identity
/// `(1 - cos(omega*t_2N)) * tan^2(omega*dt/2) = 2 sin^2(N*delta) cot^2(delta/2)`
/// where `delta = omega*dt - (2n+1)*pi` is the distance to the nearest filter
/// pole. The product stays finite there; its limit is `32 N^2 coth I / omega^2`.
pub fn regularized_pulsed_integrand(
    omega: f64,
    bath: &BathSpec,
    schedule: &PulseSchedule,
) -> Result<f64> {
    let d = bath.density();
    if !(omega >= d.ir_cutoff() && omega <= d.uv_cutoff()) {
        return Err(Error::Domain(format!(
            "pulsed integrand requires omega in [{}, {}], got {omega}",
            d.ir_cutoff(),
            d.uv_cutoff()
        )));
    }
    Ok(pulsed_integrand_unchecked(omega, bath, schedule))
}

#[inline]
pub(crate) fn pulsed_integrand_unchecked(
    omega: f64,
    bath: &BathSpec,
    schedule: &PulseSchedule,
) -> f64 {
    let filter = pulse_cycle_filter(omega * schedule.interval(), schedule.half_cycles());
    4.0 * bath.thermal_unchecked(omega)
        * bath.density().density_unchecked(omega)
        * filter
        / (omega * omega)
}

/// `(1 - cos(2*N*x)) * tan^2(x/2)` for phase `x = omega*dt`, regularized.
///
/// Away from the poles this is `2 (sin(N*delta) * cot(delta/2))^2` with the
/// reduced phase `delta`; the grouping keeps the 0 * inf product well scaled.
/// Inside the guard band a 4th-order series in `delta` takes over:
///
/// `8N^2 - (4/3)N^2(1+2N^2) d^2 + (N^2/30 + 4N^4/9 + 16N^6/45) d^4`
///
/// whose leading term is the removable-singularity limit `8N^2`.
pub(crate) fn pulse_cycle_filter(x: f64, half_cycles: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let nf = half_cycles as f64;
    if x < FRAC_PI_2 {
        // Far below the first pole tan is well conditioned; evaluate directly.
        let g = (nf * x).sin() * (0.5 * x).tan();
        return 2.0 * g * g;
    }
    let (delta, _) = reduce_odd_pi(x);
    if delta.abs() < GUARD_BAND_HALF_WIDTH {
        let n2 = nf * nf;
        let d2 = delta * delta;
        return 8.0 * n2 - (4.0 / 3.0) * n2 * (1.0 + 2.0 * n2) * d2
            + (n2 / 30.0 + (4.0 / 9.0) * n2 * n2 + (16.0 / 45.0) * n2 * n2 * n2) * d2 * d2;
    }
    let half = 0.5 * delta;
    let g = (nf * delta).sin() * (half.cos() / half.sin());
    2.0 * g * g
}

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule
// (standard QUADPACK abscissae).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// 15-point Gauss-Kronrod rule on `[a, b]`: returns `(value, error)`.
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half_len = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    for j in 0..7 {
        let abscissa = half_len * XGK[j];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * sum;
        }
        res_kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half_len;
    let err = rescale_error(
        (res_kronrod - res_gauss) * half_len,
        res_abs * half_len.abs(),
        res_asc * half_len.abs(),
    );
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    seq: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap by error; older panel wins ties so refinement order is
        // deterministic
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Integrate `f` over the partition given by `points` (ascending, at least
/// two entries, typically from [`breakpoints`] or [`oscillation_mesh`]).
///
/// Deterministic for a fixed configuration: panels are refined worst-first
/// with a total order on (error, creation sequence), and the final value is
/// re-summed left to right. Non-convergence after `max_subdivisions`
/// bisections is reported through the `converged` flag.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    config: &QuadratureConfig,
) -> IntegralResult {
    assert!(points.len() >= 2, "need at least two partition points");
    let mut heap = BinaryHeap::with_capacity(points.len() + 64);
    let mut stuck: Vec<Panel> = Vec::new();
    let mut evaluations: u64 = 0;
    let mut seq: u64 = 0;
    let mut value_sum = 0.0;
    let mut err_sum = 0.0;

    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        debug_assert!(b > a, "partition points must be strictly ascending");
        let (value, error) = qk15(&f, a, b);
        evaluations += 15;
        value_sum += value;
        err_sum += error;
        heap.push(Panel { a, b, value, error, seq });
        seq += 1;
    }

    let mut bisections: u32 = 0;
    'refine: loop {
        // inner loop on cheap running sums
        loop {
            if err_sum <= config.tolerance_for(value_sum) {
                break;
            }
            if bisections >= config.max_subdivisions {
                break 'refine;
            }
            let Some(worst) = heap.pop() else { break 'refine };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // panel at floating-point resolution; retire it
                stuck.push(worst);
                continue;
            }
            let (v1, e1) = qk15(&f, worst.a, mid);
            let (v2, e2) = qk15(&f, mid, worst.b);
            evaluations += 30;
            bisections += 1;
            value_sum += v1 + v2 - worst.value;
            err_sum += e1 + e2 - worst.error;
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, seq });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, seq: seq + 1 });
            seq += 2;
        }
        // tentative convergence: replace the drifted running sums with exact
        // ones and either confirm or keep refining
        value_sum = heap.iter().map(|p| p.value).sum::<f64>()
            + stuck.iter().map(|p| p.value).sum::<f64>();
        err_sum = heap.iter().map(|p| p.error).sum::<f64>()
            + stuck.iter().map(|p| p.error).sum::<f64>();
        if err_sum <= config.tolerance_for(value_sum) {
            break;
        }
    }

    // Deterministic final sums, left to right; the convergence flag reports
    // this exact state.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(stuck);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error_estimate: f64 = panels.iter().map(|p| p.error).sum();
    let converged = error_estimate <= config.tolerance_for(value);

    IntegralResult { value, error_estimate, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensity;
    use proptest::prelude::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn integrates_constant() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|_| 1.0, &[1.0, 2.0], &cfg);
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < cfg.abs_tol);
    }

    #[test]
    fn cosine_over_full_period_cancels() {
        let cfg = QuadratureConfig::default();
        let t = 3.0;
        let pts = oscillation_mesh(t, 1.0, 1.0 + 2.0 * PI / t, 8);
        let r = integrate(|w| (w * t).cos(), &pts, &cfg);
        assert!(r.converged);
        assert!(r.value.abs() < cfg.abs_tol, "value = {:e}", r.value);
    }

    #[test]
    fn converged_respects_tolerance_contract() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|w| (50.0 * w).sin().powi(2) / w, &[1.0, 80.0], &cfg);
        assert!(r.converged);
        assert!(r.error_estimate <= cfg.abs_tol.max(cfg.rel_tol * r.value.abs()));
    }

    #[test]
    fn non_convergence_is_flagged_not_fatal() {
        let cfg = QuadratureConfig { max_subdivisions: 2, ..Default::default() };
        // far too oscillatory for one panel and two bisections
        let r = integrate(|w: f64| (1e4 * w).sin(), &[1.0, 2.0], &cfg);
        assert!(!r.converged);
        assert!(r.value.is_finite());
        assert!(r.error_estimate > 0.0);
    }

    /// Singular-point enumeration for the three figure-level parameter sets.
    #[test]
    fn breakpoint_singularities() {
        // dt = 0.025: first pole at pi/0.025 = 125.66 > 80, none interior
        assert!(singular_frequencies(0.025, 1.0, 80.0).is_empty());
        // dt = 0.125: pi/0.125 = 25.13 > 20, none interior
        assert!(singular_frequencies(0.125, 1.0, 20.0).is_empty());
        // dt = 0.1 on (0.01, 100): poles at pi/0.1 and 3pi/0.1
        let poles = singular_frequencies(0.1, 0.01, 100.0);
        assert_eq!(poles.len(), 2);
        assert!(rel_err(poles[0], 10.0 * PI) < 1e-14);
        assert!(rel_err(poles[1], 30.0 * PI) < 1e-14);
    }

    #[test]
    fn breakpoints_sorted_with_endpoints() {
        let pts = breakpoints(0.1, 7.0, 0.01, 100.0, 8);
        assert_eq!(pts[0], 0.01);
        assert_eq!(*pts.last().unwrap(), 100.0);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        // poles present
        for pole in singular_frequencies(0.1, 0.01, 100.0) {
            assert!(pts.iter().any(|&p| rel_err(p, pole) < 1e-12));
        }
        // mesh spacing bound
        let max_gap = 2.0 * PI / (8.0 * 7.0) + 1e-12;
        assert!(pts.windows(2).all(|w| w[1] - w[0] <= max_gap));
    }

    /// Halving rel_tol never moves the result further from a 4x-subdivision
    /// reference.
    #[test]
    fn self_refinement_oracle() {
        let f = |w: f64| (37.0 * w).sin().powi(2) / (w * w);
        let pts: Vec<f64> = (0..=40).map(|k| 1.0 + k as f64 * (79.0 / 40.0)).collect();
        let oracle = integrate(
            f,
            &pts,
            &QuadratureConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                max_subdivisions: 4 << 15,
                ..Default::default()
            },
        );
        assert!(oracle.converged);
        let mut prev_gap = f64::INFINITY;
        for rel_tol in [1e-4, 5e-5, 2.5e-5, 1.25e-5, 1e-6] {
            let r = integrate(f, &pts, &QuadratureConfig { rel_tol, ..Default::default() });
            let gap = (r.value - oracle.value).abs();
            // never increases beyond resummation noise
            assert!(
                gap <= prev_gap + 1e-12 * oracle.value.abs(),
                "rel_tol {rel_tol}: gap {gap:e} > previous {prev_gap:e}"
            );
            // and each run agrees with the oracle within its own tolerance
            assert!(gap <= rel_tol * oracle.value.abs().max(1.0));
            prev_gap = gap;
        }
    }

    /// Doubling the oscillation resolution moves the result by less than the
    /// reported error estimate.
    #[test]
    fn oscillation_resolution_stability() {
        let cfg = QuadratureConfig::default();
        let t = 5.0;
        let f = |w: f64| (1.0 - (w * t).cos()) / (w * w * w);
        let r8 = integrate(f, &oscillation_mesh(t, 1.0, 80.0, 8), &cfg);
        let r16 = integrate(f, &oscillation_mesh(t, 1.0, 80.0, 16), &cfg);
        assert!(r8.converged && r16.converged);
        assert!((r8.value - r16.value).abs() <= r8.error_estimate.max(cfg.abs_tol));
    }

    #[test]
    fn filter_pole_limit_is_8n2() {
        for n in [1u32, 2, 7, 100] {
            let at_pole = pulse_cycle_filter(PI, n);
            let expect = 8.0 * (n as f64).powi(2);
            assert!(rel_err(at_pole, expect) < 1e-12, "N = {n}: {at_pole} vs {expect}");
            // higher poles too
            let at_pole = pulse_cycle_filter(7.0 * PI, n);
            assert!(rel_err(at_pole, expect) < 1e-10);
        }
    }

    /// Series and direct evaluation agree across the guard-band boundary.
    #[test]
    fn guard_band_continuity() {
        for n in [1u32, 3, 50, 200] {
            for pole in [PI, 3.0 * PI, 9.0 * PI] {
                let inside = pulse_cycle_filter(pole + 0.999 * GUARD_BAND_HALF_WIDTH, n);
                let outside = pulse_cycle_filter(pole + 1.001 * GUARD_BAND_HALF_WIDTH, n);
                assert!(
                    rel_err(inside, outside) < 1e-7,
                    "N = {n}, pole = {pole}: {inside} vs {outside}"
                );
            }
        }
    }

    /// Independent series oracle for the removable-singularity prefactor:
    /// 2 sin^2(N d) cot^2(d/2) -> 8 N^2, checked by sampling the exact
    /// product toward the pole, then against the full integrand.
    #[test]
    fn pole_value_against_series_oracle() {
        let n = 1u32;
        // exact product marches toward 8 N^2 = 8
        let mut prev_gap = f64::INFINITY;
        for k in 1..=4 {
            let d = 10f64.powi(-k);
            let exact = 2.0 * ((n as f64) * d).sin().powi(2)
                * ((0.5 * d).cos() / (0.5 * d).sin()).powi(2);
            let gap = (exact - 8.0).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        // full integrand at the pole: 4 * coth * I * 8 N^2 / w^2 = 32 c / w^2
        // at T = 0 with I(w_n) = c
        let dt = 0.1;
        let w_pole = PI / dt;
        let density = SpectralDensity::one_over_f(0.7, 0.01, 100.0).unwrap();
        let bath = BathSpec::zero_temperature(density);
        let sched = PulseSchedule::new(dt, n).unwrap();
        let c = density.density_at(w_pole).unwrap();
        let h = regularized_pulsed_integrand(w_pole, &bath, &sched).unwrap();
        assert!(rel_err(h, 32.0 * c / (w_pole * w_pole)) < 1e-12);
    }

    /// Spec continuity check around each pole: |h(w_n +- 1e-6/dt) - h(w_n)|
    /// stays below 1e-4 relative.
    #[test]
    fn integrand_continuity_near_pole() {
        let dt = 0.1;
        let density = SpectralDensity::one_over_f(0.7, 0.01, 100.0).unwrap();
        let bath = BathSpec::new(density, 2.0).unwrap();
        for n_half in [1u32, 4, 16] {
            let sched = PulseSchedule::new(dt, n_half).unwrap();
            for pole in singular_frequencies(dt, 0.01, 100.0) {
                let h0 = regularized_pulsed_integrand(pole, &bath, &sched).unwrap();
                for sign in [-1.0, 1.0] {
                    let h = regularized_pulsed_integrand(pole + sign * 1e-6 / dt, &bath, &sched)
                        .unwrap();
                    assert!(
                        (h - h0).abs() / h0 < 1e-4,
                        "N = {n_half}, pole = {pole}, sign = {sign}: {h} vs {h0}"
                    );
                }
            }
        }
    }

    #[test]
    fn free_integrand_values() {
        let density = SpectralDensity::one_over_f(0.25, 1.0, 80.0).unwrap();
        let bath = BathSpec::zero_temperature(density);
        // t = 0: vanishes for all omega
        for w in [1.0, 7.7, 80.0] {
            assert_eq!(free_integrand(w, &bath, 0.0).unwrap(), 0.0);
        }
        // omega * t = pi: 1 - cos = 2
        let w = 4.0;
        let t = PI / w;
        let v = free_integrand(w, &bath, t).unwrap();
        assert!(rel_err(v, 2.0 * 0.25 / (w * w * w)) < 1e-12);
        // domain errors
        assert!(free_integrand(0.5, &bath, 1.0).is_err());
        assert!(free_integrand(81.0, &bath, 1.0).is_err());
        assert!(free_integrand(2.0, &bath, -1.0).is_err());
    }

    /// Taylor oracle near the IR cutoff for 1/f at T = 0:
    /// integrand -> gamma * t^2 / (2 * omega) * (1 + O((omega t)^2)).
    #[test]
    fn free_integrand_ir_taylor() {
        let gamma = 0.4;
        let ir = 1e-3;
        let density = SpectralDensity::one_over_f(gamma, ir, 10.0).unwrap();
        let bath = BathSpec::zero_temperature(density);
        let t = 0.05;
        let v = free_integrand(ir, &bath, t).unwrap();
        let leading = gamma * t * t / (2.0 * ir);
        let x2 = (ir * t) * (ir * t);
        assert!(rel_err(v, leading) < x2 / 6.0 + 1e-12, "v = {v}, leading = {leading}");
    }

    /// Small-phase consistency of the pulsed integrand: h matches
    /// 4*coth*I*2sin^2(N w dt)*(w dt/2)^2/w^2 to the tan-series correction.
    #[test]
    fn pulsed_integrand_small_angle() {
        let density = SpectralDensity::one_over_f(0.25, 1.0, 80.0).unwrap();
        let bath = BathSpec::zero_temperature(density);
        let sched = PulseSchedule::new(1e-5, 3).unwrap();
        for w in [1.0, 10.0, 79.0] {
            let x = w * 1e-5;
            let h = regularized_pulsed_integrand(w, &bath, &sched).unwrap();
            let s = (3.0 * x).sin();
            let small = 4.0 * 0.25 / w * 2.0 * s * s * (x / 2.0) * (x / 2.0) / (w * w);
            assert!(rel_err(h, small) < x * x, "w = {w}");
        }
    }

    /// Scale linearity: scaling the coupling scales the integral, within
    /// rel_tol, for c in {2, 10}.
    #[test]
    fn integral_linear_in_coupling() {
        let cfg = QuadratureConfig::default();
        let t = 4.0;
        let sched = PulseSchedule::new(0.125, 16).unwrap();
        for c in [2.0, 10.0] {
            let d1 = SpectralDensity::one_over_f(0.5, 1.0, 20.0).unwrap();
            let d2 = SpectralDensity::one_over_f(0.5 * c, 1.0, 20.0).unwrap();
            let b1 = BathSpec::new(d1, 3.0).unwrap();
            let b2 = BathSpec::new(d2, 3.0).unwrap();
            let pts = breakpoints(0.125, t, 1.0, 20.0, cfg.oscillation_resolution);
            let r1 = integrate(|w| pulsed_integrand_unchecked(w, &b1, &sched), &pts, &cfg);
            let r2 = integrate(|w| pulsed_integrand_unchecked(w, &b2, &sched), &pts, &cfg);
            assert!(r1.converged && r2.converged);
            assert!(rel_err(r2.value, c * r1.value) < cfg.rel_tol * 10.0);
        }
    }

    proptest! {
        /// Both integrands are pointwise nonnegative on the band.
        #[test]
        fn integrands_nonnegative(
            w in 1.0f64..80.0,
            t in 0.0f64..10.0,
            temp in 0.0f64..100.0,
            n in 1u32..64,
            dt in 1e-3f64..0.5,
        ) {
            let density = SpectralDensity::one_over_f(0.25, 1.0, 80.0).unwrap();
            let bath = BathSpec::new(density, temp).unwrap();
            prop_assert!(free_integrand(w, &bath, t).unwrap() >= 0.0);
            let sched = PulseSchedule::new(dt, n).unwrap();
            prop_assert!(regularized_pulsed_integrand(w, &bath, &sched).unwrap() >= 0.0);
        }
    }
}
