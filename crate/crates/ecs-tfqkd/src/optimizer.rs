//! Deterministic maximization of the key rate over the free protocol
//! parameters: the coherent-state intensity `mu` per distance, plus the
//! X-basis probability `p_x` in finite-key runs, and distance sweeps built on
//! top of both.
//!
//! Every search is a log-spaced grid seed followed by a golden-section
//! refinement around the best seed — no randomness, so identical inputs give
//! identical outputs. Unimodality is not assumed; the grid guards against
//! plateaus and secondary bumps at long distance.

use crate::model::{self, SystemParams};
use crate::security::{self, RatePoint};
use crate::Error;

/// Which rate the optimizer maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    AsymptoticIdeal,
    AsymptoticImperfect,
    FiniteKey,
}

/// Search configuration for the optimizers.
#[derive(Debug, Clone)]
pub struct OptimizeSpec {
    /// Intensity search range, log-spaced.
    pub mu_range: [f64; 2],
    /// X-basis probability search range, log-spaced (finite-key only).
    pub px_range: [f64; 2],
    /// Seed-grid size per axis.
    pub grid_points: usize,
    /// Relative tolerance on each optimized parameter.
    pub refine_tol: f64,
    pub objective: Objective,
    /// Evaluate rates with the originally published formula set.
    pub paper_literal: bool,
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        OptimizeSpec {
            mu_range: [1e-4, 2.0],
            px_range: [1e-3, 0.5],
            grid_points: 50,
            refine_tol: 1e-4,
            objective: Objective::AsymptoticImperfect,
            paper_literal: false,
        }
    }
}

impl OptimizeSpec {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, range) in [("mu_range", self.mu_range), ("px_range", self.px_range)] {
            if !(range[0] > 0.0 && range[1] > range[0]) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive and ordered, got [{}, {}]",
                    range[0], range[1]
                )));
            }
        }
        if self.grid_points < 8 {
            return Err(Error::InvalidParam(format!(
                "grid_points must be at least 8, got {}",
                self.grid_points
            )));
        }
        if self.refine_tol <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }

    fn evaluate(&self, params: &SystemParams) -> Result<RatePoint, Error> {
        match self.objective {
            Objective::AsymptoticIdeal => security::ideal_rate_point(params),
            Objective::AsymptoticImperfect => {
                security::imperfect_rate_point(params, self.paper_literal)
            }
            Objective::FiniteKey => security::finite_rate_point(params, self.paper_literal),
        }
    }
}

/// Placeholder point reported when no parameter choice yields a positive
/// rate: zeros throughout except the distance and the repeaterless
/// benchmark.
fn zero_point(params: &SystemParams) -> RatePoint {
    RatePoint {
        l_km: params.l_km,
        mu: None,
        p_x: None,
        q_z: 0.0,
        e_z: 0.0,
        e_x: 0.0,
        e_ph: 0.0,
        delta: 0.0,
        rate: 0.0,
        r_plob: model::plob_reference(params, false),
    }
}

/// Golden-section maximization on `[a, b]`; returns the interval midpoint
/// once the bracket is narrower than `tol`.
fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Grid seed plus golden-section refinement of one log-scaled parameter.
/// Returns `(None, zero point)` when the objective vanishes over the whole
/// grid; otherwise the refined maximizer, never worse than the best seed.
fn line_search<E>(
    eval: E,
    range: [f64; 2],
    grid_points: usize,
    tol: f64,
    fallback: &SystemParams,
) -> Result<(Option<f64>, RatePoint), Error>
where
    E: Fn(f64) -> Result<RatePoint, Error>,
{
    let log_lo = range[0].ln();
    let log_hi = range[1].ln();
    let step = (log_hi - log_lo) / (grid_points - 1) as f64;
    let mut best_idx = 0;
    let mut best: Option<RatePoint> = None;
    for i in 0..grid_points {
        let x = (log_lo + step * i as f64).exp();
        let pt = eval(x)?;
        if best.as_ref().is_none_or(|b| pt.rate > b.rate) {
            best = Some(pt);
            best_idx = i;
        }
    }
    let best_pt = best.expect("grid has at least 8 points");
    if best_pt.rate <= 0.0 {
        return Ok((None, zero_point(fallback)));
    }
    let a = log_lo + step * best_idx.saturating_sub(1) as f64;
    let b = log_lo + step * (best_idx + 1).min(grid_points - 1) as f64;
    let refined = golden_max(|t| eval(t.exp()).map(|pt| pt.rate), a, b, tol)?.exp();
    let refined_pt = eval(refined)?;
    let seed = (log_lo + step * best_idx as f64).exp();
    if refined_pt.rate >= best_pt.rate {
        Ok((Some(refined), refined_pt))
    } else {
        Ok((Some(seed), best_pt))
    }
}

/// Maximizes the configured objective over `mu` at the params' distance and
/// basis bias. Returns the maximizer and its rate point, or `(None, zeros)`
/// when the rate vanishes over the whole range.
pub fn optimize_mu(
    params: &SystemParams,
    spec: &OptimizeSpec,
) -> Result<(Option<f64>, RatePoint), Error> {
    spec.validate()?;
    line_search(
        |mu| spec.evaluate(&SystemParams { mu, ..*params }),
        spec.mu_range,
        spec.grid_points,
        spec.refine_tol,
        params,
    )
}

/// Maximizes the finite-key rate over `p_x` alone, holding the params' `mu`
/// fixed. The `objective` field is ignored; only the finite-key rate depends
/// on `p_x`.
pub fn optimize_px(
    params: &SystemParams,
    spec: &OptimizeSpec,
) -> Result<(Option<f64>, RatePoint), Error> {
    spec.validate()?;
    let spec = OptimizeSpec { objective: Objective::FiniteKey, ..spec.clone() };
    line_search(
        |p_x| spec.evaluate(&SystemParams { p_x, ..*params }),
        spec.px_range,
        spec.grid_points,
        spec.refine_tol,
        params,
    )
}

/// Coordinate descent over `(mu, p_x)` for the finite-key rate: a coarse
/// two-dimensional seed grid locates the positive-rate region (single-axis
/// slices through an arbitrary start can miss it entirely), then alternating
/// line searches refine until a full round improves the rate by less than
/// `refine_tol` relatively. The `objective` field is ignored; this entry
/// point always maximizes the finite-key rate.
pub fn optimize_finite(
    params: &SystemParams,
    spec: &OptimizeSpec,
) -> Result<(Option<f64>, Option<f64>, RatePoint), Error> {
    spec.validate()?;
    let spec = OptimizeSpec { objective: Objective::FiniteKey, ..spec.clone() };
    let mut base = *params;
    base.p_x = base.p_x.clamp(spec.px_range[0], spec.px_range[1]);

    const SEEDS: usize = 16;
    let log_axis = |range: [f64; 2], i: usize| {
        let lo = range[0].ln();
        let hi = range[1].ln();
        (lo + (hi - lo) * i as f64 / (SEEDS - 1) as f64).exp()
    };
    let mut best_seed: Option<(f64, f64, f64)> = None;
    for i in 0..SEEDS {
        let mu = log_axis(spec.mu_range, i);
        for j in 0..SEEDS {
            let p_x = log_axis(spec.px_range, j);
            let rate = spec.evaluate(&SystemParams { mu, p_x, ..base })?.rate;
            if rate > best_seed.map_or(0.0, |(_, _, r)| r) {
                best_seed = Some((mu, p_x, rate));
            }
        }
    }
    match best_seed {
        Some((mu, p_x, _)) => {
            base.mu = mu;
            base.p_x = p_x;
        }
        None => return Ok((None, None, zero_point(params))),
    }

    let mut best: Option<(f64, f64, RatePoint)> = None;
    for _round in 0..12 {
        let (mu_new, _) = line_search(
            |mu| spec.evaluate(&SystemParams { mu, ..base }),
            spec.mu_range,
            spec.grid_points,
            spec.refine_tol,
            &base,
        )?;
        if let Some(mu) = mu_new {
            base.mu = mu;
        }
        let (px_new, pt) = line_search(
            |p_x| spec.evaluate(&SystemParams { p_x, ..base }),
            spec.px_range,
            spec.grid_points,
            spec.refine_tol,
            &base,
        )?;
        if let Some(p_x) = px_new {
            base.p_x = p_x;
        }
        if mu_new.is_none() && px_new.is_none() {
            break;
        }
        let prev_rate = best.as_ref().map_or(0.0, |(_, _, b)| b.rate);
        if pt.rate > prev_rate {
            best = Some((base.mu, base.p_x, pt));
        }
        if prev_rate > 0.0 && (pt.rate - prev_rate) <= spec.refine_tol * prev_rate {
            break;
        }
    }
    Ok(match best {
        Some((mu, p_x, pt)) if pt.rate > 0.0 => (Some(mu), Some(p_x), pt),
        _ => (None, None, zero_point(params)),
    })
}

/// One optimized rate point per distance. Zero-rate distances are reported
/// as zero points rather than errors, so sweeps always span the full axis.
pub fn sweep(
    params: &SystemParams,
    l_list: &[f64],
    spec: &OptimizeSpec,
) -> Result<Vec<RatePoint>, Error> {
    let mut out = Vec::with_capacity(l_list.len());
    for &l_km in l_list {
        let p = SystemParams { l_km, ..*params };
        let point = match spec.objective {
            Objective::FiniteKey => optimize_finite(&p, spec)?.2,
            _ => optimize_mu(&p, spec)?.1,
        };
        out.push(point);
    }
    Ok(out)
}
