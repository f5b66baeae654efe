//! Physical parameters and elementary scalar functions.
//!
//! Everything downstream consumes the quantities defined here: the combined
//! per-link detection efficiency, the end-to-end channel transmittance used by
//! the repeaterless benchmark, binary entropy, and the benchmark itself.
//!
//! The protocol splits the Alice-Bob distance into four fiber segments
//! (Alice/Bob to the relay stations, relay source to each station), so the
//! efficiency seen by any one detector is `eta_d * 10^(-beta * (L/4) / 10)`.

use crate::Error;

/// All physical and protocol parameters of one run.
///
/// Distances are kilometers, everything else dimensionless. `Default` is the
/// standard simulation set: `p_d = 1e-7`, `eta_d = 0.85`, `beta = 0.16` dB/km,
/// `f_ec = 1.1`, `e_d = 0.03`, perfect sources, `eps_sec = 1e-10`,
/// `eps_cor = 1e-15`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Coherent-state intensity mu = |alpha|^2 (alpha real, non-negative).
    pub mu: f64,
    /// Dark-count probability per detector per gate.
    pub p_d: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Fiber loss coefficient, dB/km.
    pub beta_db_per_km: f64,
    /// Total Alice-Bob distance, km.
    pub l_km: f64,
    /// Error-correction inefficiency, at least 1.
    pub f_ec: f64,
    /// Z-basis misalignment error.
    pub e_d: f64,
    /// Fidelity of the relay's entangled-coherent-state source.
    pub f2: f64,
    /// Cat-state infidelity of Alice's and Bob's sources (fidelity 1 - epsilon).
    pub epsilon: f64,
    /// Probability of choosing the X basis.
    pub p_x: f64,
    /// Total pulse count for finite-key mode. Held as f64 so values like 1e14
    /// pass through the CLI and the count arithmetic unchanged.
    pub n_pulses: f64,
    /// Secrecy failure bound.
    pub eps_sec: f64,
    /// Correctness failure bound.
    pub eps_cor: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            mu: 0.1,
            p_d: 1e-7,
            eta_d: 0.85,
            beta_db_per_km: 0.16,
            l_km: 0.0,
            f_ec: 1.1,
            e_d: 0.03,
            f2: 1.0,
            epsilon: 0.0,
            p_x: 0.1,
            n_pulses: 1e12,
            eps_sec: 1e-10,
            eps_cor: 1e-15,
        }
    }
}

impl SystemParams {
    /// Checks every field against its physical range. The error names the
    /// offending field so front ends can report it verbatim.
    pub fn validate(&self) -> Result<(), Error> {
        fn probability(name: &str, v: f64) -> Result<(), Error> {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be in [0, 1], got {v}")));
            }
            Ok(())
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::InvalidParam(format!("mu must be > 0, got {}", self.mu)));
        }
        probability("pd", self.p_d)?;
        probability("eta_d", self.eta_d)?;
        if self.beta_db_per_km.is_nan() || self.beta_db_per_km < 0.0 {
            return Err(Error::InvalidParam(format!(
                "beta must be >= 0, got {}",
                self.beta_db_per_km
            )));
        }
        if self.l_km.is_nan() || self.l_km < 0.0 {
            return Err(Error::InvalidParam(format!("L must be >= 0, got {}", self.l_km)));
        }
        if self.f_ec.is_nan() || self.f_ec < 1.0 {
            return Err(Error::InvalidParam(format!("f must be >= 1, got {}", self.f_ec)));
        }
        probability("ed", self.e_d)?;
        probability("F2", self.f2)?;
        probability("epsilon", self.epsilon)?;
        if !(0.0..1.0).contains(&self.p_x) {
            return Err(Error::InvalidParam(format!("px must be in [0, 1), got {}", self.p_x)));
        }
        if self.n_pulses.is_nan() || self.n_pulses < 1.0 {
            return Err(Error::InvalidParam(format!("N must be >= 1, got {}", self.n_pulses)));
        }
        for (name, v) in [("eps_sec", self.eps_sec), ("eps_cor", self.eps_cor)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParam(format!("{name} must be in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Combined transmittance-plus-detector efficiency of one link,
/// `eta_d * 10^(-beta * L / 40)` (each of the four fiber segments spans a
/// quarter of the total distance).
///
/// Monotone non-increasing in `L`.
///
/// # Panics
///
/// Panics on a negative distance.
pub fn total_efficiency(params: &SystemParams) -> f64 {
    assert!(params.l_km >= 0.0, "negative distance");
    params.eta_d * 10f64.powf(-params.beta_db_per_km * params.l_km / 40.0)
}

/// End-to-end Alice-Bob channel transmittance `10^(-beta * L / 10)`.
///
/// # Panics
///
/// Panics on a negative distance.
pub fn channel_transmittance(beta_db_per_km: f64, l_km: f64) -> f64 {
    assert!(l_km >= 0.0, "negative distance");
    10f64.powf(-beta_db_per_km * l_km / 10.0)
}

/// Repeaterless secret-key capacity of a lossy channel,
/// `-log2(1 - eta_ch)` bits per pulse.
///
/// Returns `f64::INFINITY` at `eta_ch = 1` (the bound diverges there).
///
/// # Panics
///
/// Panics when `eta_ch` is outside `[0, 1]`.
pub fn plob_bound(eta_ch: f64) -> f64 {
    assert!((0.0..=1.0).contains(&eta_ch), "transmittance outside [0, 1]");
    if eta_ch == 1.0 {
        return f64::INFINITY;
    }
    // ln_1p keeps the bound positive where 1 - eta_ch would round to 1
    -(-eta_ch).ln_1p() / std::f64::consts::LN_2
}

/// The benchmark rate at the distance in `params`.
///
/// By default the benchmark sees the bare channel `10^(-beta*L/10)`; setting
/// `with_detector` folds the detector efficiency in as well (both conventions
/// appear in the literature, so the choice is a run-time switch).
pub fn plob_reference(params: &SystemParams, with_detector: bool) -> f64 {
    let mut eta_ch = channel_transmittance(params.beta_db_per_km, params.l_km);
    if with_detector {
        eta_ch *= params.eta_d;
    }
    plob_bound(eta_ch)
}

/// Shannon binary entropy `h(x) = -x log2(x) - (1-x) log2(1-x)` in bits, with
/// the `0 * log 0 = 0` limit taken explicitly at the endpoints.
///
/// # Panics
///
/// Panics when `x` is outside `[0, 1]` by more than a rounding-slack of 1e-12.
pub fn binary_entropy(x: f64) -> f64 {
    assert!(
        (-1e-12..=1.0 + 1e-12).contains(&x),
        "entropy argument outside [0, 1]: {x}"
    );
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}
