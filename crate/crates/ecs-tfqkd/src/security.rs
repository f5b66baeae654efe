//! Secret-key rates: the ideal asymptotic rate, the imperfect-source rate via
//! the quantum-coin phase-error bound, and the finite-size rate with
//! statistical-fluctuation corrections.
//!
//! The imperfect-source analysis treats two flaws at once: the relay source
//! emits the wrong entangled state with probability `1 - F2` (entering
//! through the mixed observables of [`crate::gains::mixed_observables`]), and
//! each sender's X-basis states differ from their Z-basis mixture with
//! fidelity `1 - epsilon` (entering through the quantum-coin imbalance that
//! inflates the phase-error bound).

use crate::gains::{self, MixedObservables};
use crate::model::{self, binary_entropy, SystemParams};
use crate::Error;

/// One evaluated operating point: observables, security quantities, the key
/// rate, and the repeaterless benchmark at the same distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub l_km: f64,
    /// Coherent-state intensity, unset when an optimizer found no positive
    /// rate anywhere in its search range.
    pub mu: Option<f64>,
    /// X-basis selection probability; populated by finite-key evaluations.
    pub p_x: Option<f64>,
    /// Total Z-basis gain.
    pub q_z: f64,
    pub e_z: f64,
    pub e_x: f64,
    /// Phase-error bound entering the privacy-amplification term.
    pub e_ph: f64,
    /// Quantum-coin imbalance.
    pub delta: f64,
    /// Secret-key rate in bits per pulse, clamped at zero.
    pub rate: f64,
    /// Repeaterless rate bound of the same channel.
    pub r_plob: f64,
}

/// Ideal asymptotic rate `Q_Z [1 - f h(E_Z) - h(E_X)]`, clamped at zero.
pub fn asymptotic_rate_ideal(q_z: f64, e_z: f64, e_x: f64, f_ec: f64) -> f64 {
    assert!((0.0..=1.0).contains(&q_z), "gain must lie in [0, 1]");
    (q_z * (1.0 - f_ec * binary_entropy(e_z) - binary_entropy(e_x))).max(0.0)
}

/// Quantum-coin imbalance `Delta = [1 - (1 - epsilon)^2] / (2 Q_Z)`, clamped
/// to [0, 0.5].
///
/// `epsilon` is the per-sender infidelity between the X-basis states and the
/// Z-basis mixture, taken at its worst-case value for both senders; `q_z` is
/// the gain the coin is conditioned on (the mixed Z gain in the realistic
/// pipeline).
pub fn quantum_coin_delta(epsilon: f64, q_z: f64) -> Result<f64, Error> {
    assert!((0.0..=1.0).contains(&epsilon), "infidelity must lie in [0, 1]");
    if q_z <= 0.0 {
        return Err(Error::UndefinedRate(format!(
            "quantum coin undefined at non-positive gain {q_z:.3e}"
        )));
    }
    let one_minus = 1.0 - epsilon;
    Ok(((1.0 - one_minus * one_minus) / (2.0 * q_z)).clamp(0.0, 0.5))
}

/// Largest phase error rate consistent with the coin imbalance:
/// the constraint `1 - 2 Delta <= sqrt((1-E_X)(1-E)) + sqrt(E_X E)` becomes
/// `cos(theta_E - theta_X) >= 1 - 2 Delta` under `E = sin^2(theta_E)`, so the
/// boundary is `E = sin^2(arcsin(sqrt(E_X)) + arccos(1 - 2 Delta))`. The
/// result is clamped to `[E_X, 0.5]`; 0.5 already forces a zero rate.
pub fn phase_error_bound(e_x: f64, delta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&e_x), "error rate must lie in [0, 1]");
    assert!((0.0..=0.5).contains(&delta), "coin imbalance must lie in [0, 0.5]");
    let theta = e_x.sqrt().asin() + (1.0 - 2.0 * delta).acos();
    let raw = if theta >= std::f64::consts::FRAC_PI_2 { 0.5 } else { theta.sin().powi(2) };
    raw.max(e_x).min(0.5)
}

/// Reference solver for the same constraint by bisection; retained as an
/// independent check on [`phase_error_bound`].
pub fn phase_error_bound_bisect(e_x: f64, delta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&e_x), "error rate must lie in [0, 1]");
    assert!((0.0..=0.5).contains(&delta), "coin imbalance must lie in [0, 0.5]");
    let satisfied = |e: f64| {
        ((1.0 - e_x) * (1.0 - e)).sqrt() + (e_x * e).sqrt() >= 1.0 - 2.0 * delta
    };
    if satisfied(1.0) {
        return 0.5;
    }
    let (mut lo, mut hi) = (e_x, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if satisfied(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.max(e_x).min(0.5)
}

/// Mixed observables of the realistic source at the params' operating point.
pub fn mixed_observables_at(
    params: &SystemParams,
    paper_literal: bool,
) -> Result<MixedObservables, Error> {
    let eta = model::total_efficiency(params);
    let per_variant = gains::variant_observables(params.mu, eta, params.p_d, params.e_d)?;
    Ok(gains::mixed_observables(params.f2, &per_variant, params.e_d, paper_literal))
}

/// Asymptotic rate of the ideal protocol (intended source only, no coin
/// penalty) at the params' operating point.
pub fn ideal_rate_point(params: &SystemParams) -> Result<RatePoint, Error> {
    let eta = model::total_efficiency(params);
    let gz = gains::gains_z(gains::EcsVariant::PhiMinus, params.mu, eta, params.p_d);
    let gx = gains::gains_x(gains::EcsVariant::PhiMinus, params.mu, eta, params.p_d);
    let (e_z, e_x) = gains::error_rates(&gz, &gx, params.e_d)?;
    let q_z = gz.total();
    Ok(RatePoint {
        l_km: params.l_km,
        mu: Some(params.mu),
        p_x: None,
        q_z,
        e_z,
        e_x,
        e_ph: e_x,
        delta: 0.0,
        rate: asymptotic_rate_ideal(q_z, e_z, e_x, params.f_ec),
        r_plob: model::plob_reference(params, false),
    })
}

/// Asymptotic rate with both source imperfections:
/// `R = Q_Z [1 - f h(E_Z) - h(E_ph)]` with the phase error bound inflated by
/// the quantum coin. Reduces to the ideal pipeline at `F2 = 1`, `epsilon = 0`.
pub fn asymptotic_rate_imperfect(
    params: &SystemParams,
    mixed: &MixedObservables,
) -> Result<RatePoint, Error> {
    let delta = quantum_coin_delta(params.epsilon, mixed.q_z)?;
    let e_ph = phase_error_bound(mixed.e_x, delta);
    let rate = (mixed.q_z
        * (1.0 - params.f_ec * binary_entropy(mixed.e_z) - binary_entropy(e_ph)))
    .max(0.0);
    Ok(RatePoint {
        l_km: params.l_km,
        mu: Some(params.mu),
        p_x: None,
        q_z: mixed.q_z,
        e_z: mixed.e_z,
        e_x: mixed.e_x,
        e_ph,
        delta,
        rate,
        r_plob: model::plob_reference(params, false),
    })
}

/// Convenience composition of [`mixed_observables_at`] and
/// [`asymptotic_rate_imperfect`].
pub fn imperfect_rate_point(
    params: &SystemParams,
    paper_literal: bool,
) -> Result<RatePoint, Error> {
    let mixed = mixed_observables_at(params, paper_literal)?;
    asymptotic_rate_imperfect(params, &mixed)
}

/// Upper confidence bound on a count whose observed value is `m`, at failure
/// probability `eps`: `m + beta + sqrt(2 beta m + beta^2)` with
/// `beta = ln(1/eps)` (inverse multiplicative Chernoff bound).
pub fn count_upper_bound(m: f64, eps: f64) -> f64 {
    assert!(m >= 0.0, "counts are non-negative");
    assert!(eps > 0.0 && eps < 1.0, "failure probability must lie in (0, 1)");
    let beta = (1.0 / eps).ln();
    m + beta + (2.0 * beta * m + beta * beta).sqrt()
}

/// Random-sampling-without-replacement deviation: having observed error rate
/// `lambda` on a sample of `k` events, the unobserved population of `n`
/// events exceeds rate `lambda + gamma` with probability at most `eps`, where
///
/// ```text
/// gamma = [(1 - 2 lambda) A G / (n + k)
///          + sqrt(A^2 G^2 / (n + k)^2 + 4 lambda (1 - lambda) G)]
///         / [2 + 2 A^2 G / (n + k)^2],
/// A = max(n, k),
/// G = (n + k) / (n k) * ln((n + k) / (2 pi n k lambda (1 - lambda) eps^2)).
/// ```
pub fn sampling_deviation(n: f64, k: f64, lambda: f64, eps: f64) -> f64 {
    assert!(n >= 1.0 && k >= 1.0, "both sample sizes must be at least 1");
    assert!(lambda > 0.0 && lambda < 1.0, "observed rate must lie in (0, 1)");
    assert!(eps > 0.0 && eps < 1.0, "failure probability must lie in (0, 1)");
    let total = n + k;
    let a = n.max(k);
    let g = total / (n * k)
        * (total / (2.0 * std::f64::consts::PI * n * k * lambda * (1.0 - lambda) * eps * eps))
            .ln();
    let ratio = a * g / total;
    let num = (1.0 - 2.0 * lambda) * ratio + (ratio * ratio + 4.0 * lambda * (1.0 - lambda) * g).sqrt();
    num / (2.0 + 2.0 * a * ratio / total)
}

/// Single swap point for the finite-size phase-error statistics.
///
/// The expected number of X-basis errors `e_x * n_x` is first inflated to an
/// upper confidence bound at failure budget `eps_sec / 4`
/// ([`count_upper_bound`]), then the resulting sample rate is carried over to
/// the unobserved Z-basis population with a random-sampling deviation at a
/// second `eps_sec / 4` ([`sampling_deviation`]). Any replacement bound only
/// needs to swap this function's body.
pub fn inflated_phase_error(n_z: f64, n_x: f64, e_x: f64, eps_sec: f64) -> f64 {
    let eps = eps_sec / 4.0;
    let e_up = count_upper_bound(e_x * n_x, eps) / n_x;
    if e_up >= 0.5 {
        return 0.5;
    }
    (e_up + sampling_deviation(n_z, n_x, e_up, eps)).min(0.5)
}

/// Finite-size rate
/// `R = (1/N) { n_Z [1 - h(E_ph)] - f n_Z h(E_Z) - log2(8 / (eps_cor eps_sec^2)) }`.
///
/// By default `n_Z = (1-p_x)^2 N Q_Z` and `n_X = p_x^2 N Q_X` count detected
/// events; `paper_literal` instead uses the originally published
/// `n_Z = (1-p_x)^2 N`, `n_X = p_x^2 N` (sifted pulses, no gain factor). The
/// phase error combines the statistical inflation of
/// [`inflated_phase_error`] with the quantum-coin bound. Fewer than one
/// expected event in either basis yields a zero-rate point with `e_ph` pinned
/// at 0.5.
pub fn finite_key_rate(
    params: &SystemParams,
    mixed: &MixedObservables,
    paper_literal: bool,
) -> Result<RatePoint, Error> {
    let p_x = params.p_x;
    let p_z = 1.0 - p_x;
    let n = params.n_pulses;
    let (n_z, n_x) = if paper_literal {
        (p_z * p_z * n, p_x * p_x * n)
    } else {
        (p_z * p_z * n * mixed.q_z, p_x * p_x * n * mixed.q_x)
    };
    let delta = quantum_coin_delta(params.epsilon, mixed.q_z)?;
    let point = |e_ph: f64, rate: f64| RatePoint {
        l_km: params.l_km,
        mu: Some(params.mu),
        p_x: Some(p_x),
        q_z: mixed.q_z,
        e_z: mixed.e_z,
        e_x: mixed.e_x,
        e_ph,
        delta,
        rate,
        r_plob: model::plob_reference(params, false),
    };
    if n_z < 1.0 || n_x < 1.0 {
        return Ok(point(0.5, 0.0));
    }
    let e_bar = inflated_phase_error(n_z, n_x, mixed.e_x, params.eps_sec);
    let e_ph = phase_error_bound(e_bar, delta);
    let leak_ec = params.f_ec * n_z * binary_entropy(mixed.e_z);
    let pa_term = (8.0 / (params.eps_cor * params.eps_sec * params.eps_sec)).log2();
    let rate = ((n_z * (1.0 - binary_entropy(e_ph)) - leak_ec - pa_term) / n).max(0.0);
    Ok(point(e_ph, rate))
}

/// Convenience composition of [`mixed_observables_at`] and
/// [`finite_key_rate`].
pub fn finite_rate_point(params: &SystemParams, paper_literal: bool) -> Result<RatePoint, Error> {
    let mixed = mixed_observables_at(params, paper_literal)?;
    finite_key_rate(params, &mixed, paper_literal)
}

#[cfg(test)]
// Frozen reference values keep every digit their generator printed.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params_at(l_km: f64, mu: f64) -> SystemParams {
        SystemParams { l_km, mu, ..SystemParams::default() }
    }

    #[test]
    fn ideal_rate_limits() {
        assert_eq!(asymptotic_rate_ideal(0.37, 0.0, 0.0, 1.1), 0.37);
        assert_eq!(asymptotic_rate_ideal(0.37, 0.5, 0.1, 1.1), 0.0);
        assert_eq!(asymptotic_rate_ideal(0.0, 0.1, 0.1, 1.1), 0.0);
    }

    #[test]
    fn coin_delta_limits_and_freeze() {
        assert_eq!(quantum_coin_delta(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(quantum_coin_delta(1.0, 1.0).unwrap(), 0.5);
        assert!(quantum_coin_delta(1e-9, 0.0).is_err());
        let q_z = 5.50797474933021518e-5;
        let delta = quantum_coin_delta(1e-9, q_z).unwrap();
        assert_relative_eq!(delta, 1.81554930301681458e-5, max_relative = 1e-12);
        // first order in epsilon: Delta ~ 2 eps / (2 Q_Z)
        assert_relative_eq!(delta, 1e-9 / q_z, max_relative = 1e-6);
    }

    #[test]
    fn phase_bound_limits_and_freeze() {
        assert_abs_diff_eq!(phase_error_bound(0.07, 0.0), 0.07, epsilon = 1e-14);
        assert_eq!(phase_error_bound(0.0, 0.0), 0.0);
        assert_eq!(phase_error_bound(0.3, 0.4), 0.5);
        assert_relative_eq!(
            phase_error_bound(0.05, 0.01),
            1.70646173893429731e-1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn phase_bound_matches_bisection_on_a_grid() {
        for i in 0..100 {
            for j in 0..100 {
                let e_x = 0.3 * i as f64 / 99.0;
                let delta = 0.1 * j as f64 / 99.0;
                let closed = phase_error_bound(e_x, delta);
                let bisected = phase_error_bound_bisect(e_x, delta);
                // near delta = 0 the constraint has a quadratic maximum, so
                // the bisection stalls within sqrt(ulp) of the closed form
                assert_abs_diff_eq!(closed, bisected, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn phase_bound_is_monotone() {
        let mut prev = 0.0;
        for i in 0..=50 {
            let e = phase_error_bound(0.3 * i as f64 / 50.0, 0.02);
            assert!(e >= prev);
            prev = e;
        }
        let mut prev = 0.0;
        for j in 0..=50 {
            let e = phase_error_bound(0.05, 0.5 * j as f64 / 50.0);
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn ideal_point_matches_freeze() {
        let p = params_at(100.0, 0.05);
        let pt = ideal_rate_point(&p).unwrap();
        assert_relative_eq!(pt.q_z, 6.10750715494449e-3, max_relative = 1e-12);
        assert_relative_eq!(pt.e_z, 3.0005462170377185e-2, max_relative = 1e-12);
        assert_relative_eq!(pt.e_x, 1.4138023604428826e-1, max_relative = 1e-12);
        assert_relative_eq!(pt.rate, 1.2110984069026894e-3, max_relative = 1e-12);
        assert_eq!(pt.e_ph, pt.e_x);
        assert_eq!(pt.delta, 0.0);
    }

    #[test]
    fn imperfect_reduces_to_ideal_at_perfect_source() {
        for l in [0.0, 200.0, 400.0, 700.0] {
            let p = params_at(l, 0.04);
            let ideal = ideal_rate_point(&p).unwrap();
            let imperfect = imperfect_rate_point(&p, false).unwrap();
            assert_abs_diff_eq!(imperfect.rate, ideal.rate, epsilon = 1e-12);
            assert_abs_diff_eq!(imperfect.q_z, ideal.q_z, epsilon = 1e-15);
            assert_abs_diff_eq!(imperfect.e_ph, ideal.e_ph, epsilon = 1e-12);
        }
    }

    #[test]
    fn imperfect_point_matches_freeze() {
        let p = SystemParams { f2: 0.95, epsilon: 1e-9, ..params_at(350.0, 0.03) };
        let pt = imperfect_rate_point(&p, false).unwrap();
        assert_relative_eq!(pt.q_z, 3.524790183624182e-5, max_relative = 1e-12);
        assert_relative_eq!(pt.e_z, 4.723183007719718e-2, max_relative = 1e-12);
        assert_relative_eq!(pt.e_x, 1.068694326774374e-1, max_relative = 1e-12);
        assert_relative_eq!(pt.delta, 2.8370482202429154e-5, max_relative = 1e-12);
        assert_relative_eq!(pt.e_ph, 1.1354048830610973e-1, max_relative = 1e-12);
        assert_relative_eq!(pt.rate, 6.6098594673063105e-6, max_relative = 1e-12);
        // imperfections only cost rate
        let ideal = ideal_rate_point(&p).unwrap();
        assert!(pt.rate < ideal.rate);
    }

    #[test]
    fn coin_penalty_uses_mixed_gain() {
        let p = SystemParams { f2: 0.95, epsilon: 1e-9, ..params_at(400.0, 0.1) };
        let pt = imperfect_rate_point(&p, false).unwrap();
        assert_relative_eq!(pt.delta, 1.8654580588854636e-5, max_relative = 1e-12);
        assert_relative_eq!(pt.e_ph, 2.842742454802877e-1, max_relative = 1e-12);
        assert_eq!(pt.rate, 0.0);
    }

    #[test]
    fn statistical_bounds_match_freezes() {
        assert_relative_eq!(
            count_upper_bound(40.0, 2.5e-11),
            1.14899019436690196e+2,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            sampling_deviation(2000.0, 500.0, 0.12, 2.5e-11),
            1.38544436442921665e-1,
            max_relative = 1e-12
        );
        // tighter failure budgets only widen both bounds
        assert!(count_upper_bound(40.0, 1e-12) > count_upper_bound(40.0, 1e-6));
        assert!(
            sampling_deviation(2000.0, 500.0, 0.12, 1e-12)
                > sampling_deviation(2000.0, 500.0, 0.12, 1e-6)
        );
    }

    #[test]
    fn tiny_samples_saturate_the_phase_estimate() {
        // the confidence inflation alone pushes past 1/2
        assert_eq!(inflated_phase_error(1e6, 10.0, 0.1, 1e-10), 0.5);
    }

    #[test]
    fn finite_point_matches_freeze() {
        let p = SystemParams { p_x: 0.3, n_pulses: 1e12, ..params_at(500.0, 0.03) };
        let pt = finite_rate_point(&p, false).unwrap();
        assert_relative_eq!(pt.e_ph, 1.167124444448255e-1, max_relative = 1e-12);
        assert_relative_eq!(pt.rate, 2.9785315944348396e-7, max_relative = 1e-12);
        assert_eq!(pt.p_x, Some(0.3));
    }

    #[test]
    fn literal_counts_ignore_the_gain() {
        let p = SystemParams { p_x: 0.3, n_pulses: 1e12, ..params_at(500.0, 0.03) };
        let pt = finite_rate_point(&p, true).unwrap();
        assert_relative_eq!(pt.e_ph, 1.0691494532065476e-1, max_relative = 1e-12);
        assert_relative_eq!(pt.rate, 1.4386468647328604e-1, max_relative = 1e-12);
    }

    #[test]
    fn finite_rate_approaches_its_asymptote_from_below() {
        let mut prev = 0.0;
        for n in [1e9, 1e11, 1e13, 1e16, 1e20] {
            let p = SystemParams { p_x: 0.3, n_pulses: n, ..params_at(500.0, 0.03) };
            let pt = finite_rate_point(&p, false).unwrap();
            assert!(pt.rate >= prev);
            prev = pt.rate;
        }
        // the N = 1e20 point sits just under the sifted asymptotic limit
        let p = SystemParams { p_x: 0.3, n_pulses: 1e20, ..params_at(500.0, 0.03) };
        let pt = finite_rate_point(&p, false).unwrap();
        let limit = 3.310463352146566e-7;
        assert!(pt.rate <= limit);
        assert_relative_eq!(pt.rate, limit, max_relative = 1e-4);
    }

    #[test]
    fn starved_detection_yields_zero_rate_diagnostic_point() {
        let p = SystemParams { p_x: 0.3, n_pulses: 1e4, ..params_at(500.0, 0.03) };
        let pt = finite_rate_point(&p, false).unwrap();
        assert_eq!(pt.rate, 0.0);
        assert_eq!(pt.e_ph, 0.5);
    }

    #[test]
    fn finite_never_beats_asymptotic() {
        for n in [1e8, 1e10, 1e12, 1e14] {
            let p = SystemParams { p_x: 0.2, n_pulses: n, ..params_at(300.0, 0.05) };
            let finite = finite_rate_point(&p, false).unwrap();
            let asymptotic = imperfect_rate_point(&p, false).unwrap();
            assert!(finite.rate <= asymptotic.rate + 1e-15);
        }
    }
}
