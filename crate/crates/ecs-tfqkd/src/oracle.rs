//! Brute-force truncated Fock-space simulation of the optical layout: Alice's
//! and Bob's pulses meet the two halves of the relay source on a pair of
//! 50:50 beam splitters watched by four threshold detectors.
//!
//! The simulation enumerates every input the protocol can prepare, evolves it
//! through the beam splitters exactly (up to a photon-number cutoff), applies
//! the threshold-detector POVM, and buckets the sixteen click patterns into
//! correct and error gains. It shares no algebra with the closed forms in
//! [`crate::gains`] — which it exists to validate — beyond the sifting rules.
//!
//! States live in a dense real-amplitude photon-number basis. The beam
//! splitter conserves total photon number, so it acts block-diagonally on
//! each total-photon subspace; blocks reaching past the cutoff are dropped
//! and their weight audited against the truncation budget.

use crate::gains::{
    gains_for, sift_action, Basis, DetectionPattern, EcsVariant, GainSet, SiftAction,
};
use crate::Error;

/// Probability allowed beyond the cutoff in any constituent state.
const TAIL_TOL: f64 = 1e-12;

/// Probability the beam-splitter step may drop in out-of-range blocks before
/// the cutoff is declared too small.
const DROP_TOL: f64 = 1e-10;

/// Truncated photon-number state with real amplitudes over 1, 2, or 4 modes,
/// stored dense and row-major with `n_max + 1` levels per mode.
#[derive(Debug, Clone)]
pub struct FockState {
    n_modes: usize,
    n_max: usize,
    amps: Vec<f64>,
}

impl FockState {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Levels per mode, `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Amplitude of one photon-number basis state; `ns` holds one occupation
    /// number per mode.
    pub fn amp(&self, ns: &[usize]) -> f64 {
        assert_eq!(ns.len(), self.n_modes, "occupation list must cover every mode");
        let d = self.dim();
        let mut idx = 0;
        for &n in ns {
            assert!(n < d, "occupation {n} exceeds cutoff {}", self.n_max);
            idx = idx * d + n;
        }
        self.amps[idx]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Tensor product, `self`'s modes becoming the leading indices.
    pub fn tensor(&self, other: &FockState) -> FockState {
        assert_eq!(self.n_max, other.n_max, "tensor factors must share a cutoff");
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        FockState { n_modes: self.n_modes + other.n_modes, n_max: self.n_max, amps }
    }
}

/// Cutoff such that the Poisson tail of a source of intensity `2 mu` — the
/// total intensity entering either beam splitter — stays below the truncation
/// budget.
pub fn n_max_for(mu: f64) -> usize {
    let intensity = 2.0 * mu;
    (intensity + 10.0 * intensity.sqrt() + 20.0).ceil() as usize
}

/// Coherent state `|alpha>` (real amplitude, intensity `alpha^2`).
pub fn coherent_fock(alpha: f64, n_max: usize) -> Result<FockState, Error> {
    let mut amps = vec![0.0; n_max + 1];
    amps[0] = (-alpha * alpha / 2.0).exp();
    for n in 1..=n_max {
        amps[n] = amps[n - 1] * alpha / (n as f64).sqrt();
    }
    let state = FockState { n_modes: 1, n_max, amps };
    check_tail(state.norm_sq(), n_max, &format!("coherent amplitude {alpha}"))?;
    Ok(state)
}

/// Sign of a cat-state superposition, which doubles as the X-basis raw bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatSign {
    Plus,
    Minus,
}

impl CatSign {
    pub fn factor(self) -> f64 {
        match self {
            CatSign::Plus => 1.0,
            CatSign::Minus => -1.0,
        }
    }
}

/// Cat state `(|alpha> +- |-alpha>)/sqrt(2(1 +- e^(-2 alpha^2)))`; the plus
/// cat holds only even photon numbers, the minus cat only odd.
pub fn cat_fock(alpha: f64, sign: CatSign, n_max: usize) -> Result<FockState, Error> {
    let base = coherent_fock(alpha, n_max)?;
    let s = sign.factor();
    let norm = (2.0 * (1.0 + s * (-2.0 * alpha * alpha).exp())).sqrt();
    let amps: Vec<f64> = base
        .amps
        .iter()
        .enumerate()
        .map(|(n, &a)| {
            let mirror = if n % 2 == 0 { a } else { -a };
            (a + s * mirror) / norm
        })
        .collect();
    let state = FockState { n_modes: 1, n_max, amps };
    check_tail(state.norm_sq(), n_max, &format!("cat amplitude {alpha}"))?;
    Ok(state)
}

/// Two-mode entangled coherent state of the requested variant:
/// `Phi+- = (|a,a> +- |-a,-a>)/sqrt(N)`, `Psi+- = (|a,-a> +- |-a,a>)/sqrt(N)`
/// with `N = 2(1 +- e^(-4 alpha^2))`.
pub fn ecs_fock(alpha: f64, variant: EcsVariant, n_max: usize) -> Result<FockState, Error> {
    let plus = coherent_fock(alpha, n_max)?;
    let minus = coherent_fock(-alpha, n_max)?;
    let (first, second, sign) = match variant {
        EcsVariant::PhiMinus => ((&plus, &plus), (&minus, &minus), -1.0),
        EcsVariant::PhiPlus => ((&plus, &plus), (&minus, &minus), 1.0),
        EcsVariant::PsiMinus => ((&plus, &minus), (&minus, &plus), -1.0),
        EcsVariant::PsiPlus => ((&plus, &minus), (&minus, &plus), 1.0),
    };
    let norm = (2.0 * (1.0 + sign * (-4.0 * alpha * alpha).exp())).sqrt();
    let d = n_max + 1;
    let mut amps = vec![0.0; d * d];
    for n1 in 0..d {
        for n2 in 0..d {
            amps[n1 * d + n2] =
                (first.0.amps[n1] * first.1.amps[n2] + sign * second.0.amps[n1] * second.1.amps[n2])
                    / norm;
        }
    }
    let state = FockState { n_modes: 2, n_max, amps };
    check_tail(state.norm_sq(), n_max, &format!("entangled source amplitude {alpha}"))?;
    Ok(state)
}

fn check_tail(norm_sq: f64, n_max: usize, what: &str) -> Result<(), Error> {
    let deficit = 1.0 - norm_sq;
    if deficit > TAIL_TOL {
        return Err(Error::CutoffTooSmall(format!(
            "{what} keeps {deficit:.3e} probability beyond n_max = {n_max}"
        )));
    }
    Ok(())
}

/// Per-total-photon-number transfer matrices of the 50:50 beam splitter
/// `out1 = (in1 + in2)/sqrt(2)`, `out2 = (in1 - in2)/sqrt(2)`.
struct BsMatrices {
    n_max: usize,
    /// `blocks[n]` is the `(n+1) x (n+1)` matrix of the total-photon-`n`
    /// subspace, row-major over (output, input) with index = photons in the
    /// first mode.
    blocks: Vec<Vec<f64>>,
}

fn bs_matrices(n_max: usize) -> BsMatrices {
    let d = n_max + 1;
    let mut choose = vec![vec![0.0f64; d]; d];
    for n in 0..d {
        choose[n][0] = 1.0;
        for k in 1..=n {
            choose[n][k] = choose[n - 1][k - 1] + if k < n { choose[n - 1][k] } else { 0.0 };
        }
    }
    let mut fact = vec![1.0f64; d];
    for n in 1..d {
        fact[n] = fact[n - 1] * n as f64;
    }
    let inv_sqrt2 = 0.5f64.sqrt();
    let mut blocks = Vec::with_capacity(d);
    for n_tot in 0..d {
        let w = n_tot + 1;
        let scale = inv_sqrt2.powi(n_tot as i32);
        let mut m = vec![0.0; w * w];
        for k in 0..w {
            for p in 0..w {
                let j_lo = p.saturating_sub(n_tot - k);
                let j_hi = k.min(p);
                let mut s = 0.0;
                for j in j_lo..=j_hi {
                    let sign = if (n_tot - k - (p - j)) % 2 == 1 { -1.0 } else { 1.0 };
                    s += sign * choose[k][j] * choose[n_tot - k][p - j];
                }
                let weight = (fact[p] * fact[n_tot - p] / (fact[k] * fact[n_tot - k])).sqrt();
                m[p * w + k] = s * weight * scale;
            }
        }
        blocks.push(m);
    }
    BsMatrices { n_max, blocks }
}

/// Applies the block transform to the two modes addressed by `stride_a` and
/// `stride_b` within `amps`, starting at `offset`. Returns the probability
/// dropped from blocks whose total photon number exceeds the cutoff.
fn bs_transform_sub(
    amps: &mut [f64],
    stride_a: usize,
    stride_b: usize,
    offset: usize,
    mats: &BsMatrices,
    scratch: &mut Vec<f64>,
) -> f64 {
    let n_max = mats.n_max;
    let mut dropped = 0.0;
    for n_tot in 0..=(2 * n_max) {
        if n_tot <= n_max {
            let w = n_tot + 1;
            let m = &mats.blocks[n_tot];
            scratch.clear();
            for k in 0..w {
                scratch.push(amps[offset + k * stride_a + (n_tot - k) * stride_b]);
            }
            for p in 0..w {
                let row = &m[p * w..(p + 1) * w];
                let mut s = 0.0;
                for k in 0..w {
                    s += row[k] * scratch[k];
                }
                amps[offset + p * stride_a + (n_tot - p) * stride_b] = s;
            }
        } else {
            for k in (n_tot - n_max)..=n_max {
                let idx = offset + k * stride_a + (n_tot - k) * stride_b;
                dropped += amps[idx] * amps[idx];
                amps[idx] = 0.0;
            }
        }
    }
    dropped
}

/// Evolves a two-mode state through the 50:50 beam splitter. Unitary on each
/// total-photon block; errors if the support pushed past the cutoff carries
/// non-negligible probability.
pub fn apply_bs(state: &FockState) -> Result<FockState, Error> {
    assert_eq!(state.n_modes, 2, "the beam splitter mixes exactly two modes");
    let mats = bs_matrices(state.n_max);
    let mut out = state.clone();
    let mut scratch = Vec::with_capacity(state.dim());
    let dropped = bs_transform_sub(&mut out.amps, state.dim(), 1, 0, &mats, &mut scratch);
    if dropped > DROP_TOL {
        return Err(Error::CutoffTooSmall(format!(
            "beam splitter dropped {dropped:.3e} probability past n_max = {}",
            state.n_max
        )));
    }
    Ok(out)
}

/// Evolves a four-mode state (Alice, source mode 1, source mode 2, Bob)
/// through both relay beam splitters: one mixes modes (0,1), the other modes
/// (2,3). Output mode order matches the detector order of
/// [`DetectionPattern`].
pub fn apply_relay_bs(state: &FockState) -> Result<FockState, Error> {
    assert_eq!(state.n_modes, 4, "the relay layout has four modes");
    let d = state.dim();
    let mats = bs_matrices(state.n_max);
    let mut out = state.clone();
    let mut scratch = Vec::with_capacity(d);
    let mut dropped = 0.0;
    for tail in 0..d * d {
        dropped += bs_transform_sub(&mut out.amps, d * d * d, d * d, tail, &mats, &mut scratch);
    }
    for head in 0..d * d {
        dropped += bs_transform_sub(&mut out.amps, d, 1, head * d * d, &mats, &mut scratch);
    }
    if dropped > DROP_TOL {
        return Err(Error::CutoffTooSmall(format!(
            "relay beam splitters dropped {dropped:.3e} probability past n_max = {}",
            state.n_max
        )));
    }
    Ok(out)
}

/// Threshold detector: click/no-click POVM with dark counts, the channel
/// transmittance folded into `eta`. The no-click element is diagonal with
/// weight `(1 - p_d)(1 - eta)^n` on `|n>`, and the click element is its
/// complement.
#[derive(Debug, Clone, Copy)]
pub struct DetectorModel {
    pub p_d: f64,
    pub eta: f64,
}

impl DetectorModel {
    pub fn new(p_d: f64, eta: f64) -> Self {
        assert!((0.0..=1.0).contains(&p_d), "dark-count probability must lie in [0, 1]");
        assert!((0.0..=1.0).contains(&eta), "detection efficiency must lie in [0, 1]");
        DetectorModel { p_d, eta }
    }

    /// No-click weights for occupations `0..dim`.
    fn no_click_weights(&self, dim: usize) -> Vec<f64> {
        let mut w = vec![0.0; dim];
        w[0] = 1.0 - self.p_d;
        for n in 1..dim {
            w[n] = w[n - 1] * (1.0 - self.eta);
        }
        w
    }
}

/// Probability of one click pattern on a four-mode state, all four detectors
/// sharing the same model.
pub fn pattern_probability(
    state: &FockState,
    pattern: DetectionPattern,
    det: &DetectorModel,
) -> f64 {
    assert_eq!(state.n_modes, 4, "patterns are read from the four relay detectors");
    let d = state.dim();
    let w = det.no_click_weights(d);
    let clicks = pattern.clicks();
    let mode_w = |m: usize, n: usize| if clicks[m] { 1.0 - w[n] } else { w[n] };
    let mut p = 0.0;
    let mut idx = 0;
    for n1 in 0..d {
        let w1 = mode_w(0, n1);
        for n2 in 0..d {
            let w12 = w1 * mode_w(1, n2);
            for n3 in 0..d {
                let w123 = w12 * mode_w(2, n3);
                for n4 in 0..d {
                    let a = state.amps[idx];
                    idx += 1;
                    p += a * a * w123 * mode_w(3, n4);
                }
            }
        }
    }
    p
}

/// Probabilities of all sixteen click patterns in [`DetectionPattern::all`]
/// order, sharing one pass over the state.
pub fn pattern_table(state: &FockState, det: &DetectorModel) -> [f64; 16] {
    assert_eq!(state.n_modes, 4, "patterns are read from the four relay detectors");
    let d = state.dim();
    let w = det.no_click_weights(d);

    // partial contractions over the last two modes: for each (n1, n2) the
    // sums of amp^2 weighted by {1, w3, w4, w3*w4}
    let mut partial = vec![0.0f64; d * d * 4];
    let mut idx = 0;
    for head in 0..d * d {
        let (mut s0, mut s3, mut s4, mut s34) = (0.0, 0.0, 0.0, 0.0);
        for w3 in w.iter().take(d) {
            let (mut r0, mut r4) = (0.0, 0.0);
            for w4 in w.iter().take(d) {
                let a = state.amps[idx];
                idx += 1;
                let a2 = a * a;
                r0 += a2;
                r4 += a2 * w4;
            }
            s0 += r0;
            s4 += r4;
            s3 += w3 * r0;
            s34 += w3 * r4;
        }
        let o = head * 4;
        partial[o] = s0;
        partial[o + 1] = s3;
        partial[o + 2] = s4;
        partial[o + 3] = s34;
    }

    // no-click-subset sums: bit m of the mask selects the no-click weight on
    // mode m, unset bits leave the mode unweighted
    let mut subset = [0.0f64; 16];
    for (mask, entry) in subset.iter_mut().enumerate() {
        let tail_idx = ((mask >> 2) & 1) + 2 * ((mask >> 3) & 1);
        let mut s = 0.0;
        for n1 in 0..d {
            let w1 = if mask & 1 != 0 { w[n1] } else { 1.0 };
            for n2 in 0..d {
                let w2 = if mask & 2 != 0 { w[n2] } else { 1.0 };
                s += w1 * w2 * partial[(n1 * d + n2) * 4 + tail_idx];
            }
        }
        *entry = s;
    }

    // inclusion-exclusion turns each click set into a pattern probability
    let mut table = [0.0f64; 16];
    for (i, entry) in table.iter_mut().enumerate() {
        let cmask = ((i >> 3) & 1) | (((i >> 2) & 1) << 1) | (((i >> 1) & 1) << 2) | ((i & 1) << 3);
        let nc = !cmask & 0xf;
        let mut p = 0.0;
        let mut t = cmask;
        loop {
            let sign = if (t as u32).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * subset[nc | t];
            if t == 0 {
                break;
            }
            t = (t - 1) & cmask;
        }
        *entry = p;
    }
    table
}

/// One Alice/Bob preparation after the relay: its selection probability,
/// whether the two raw bits agree, and the post-beam-splitter state.
struct PreparedInput {
    weight: f64,
    bits_equal: bool,
    state: FockState,
}

fn prepared_inputs(
    basis: Basis,
    variant: EcsVariant,
    mu: f64,
    n_max: usize,
) -> Result<Vec<PreparedInput>, Error> {
    let alpha = mu.sqrt();
    let ecs = ecs_fock(alpha, variant, n_max)?;
    let mut out = Vec::with_capacity(4);
    match basis {
        Basis::Z => {
            for a_bit in [false, true] {
                let a = coherent_fock(if a_bit { -alpha } else { alpha }, n_max)?;
                for b_bit in [false, true] {
                    let b = coherent_fock(if b_bit { -alpha } else { alpha }, n_max)?;
                    let state = apply_relay_bs(&a.tensor(&ecs).tensor(&b))?;
                    out.push(PreparedInput { weight: 0.25, bits_equal: a_bit == b_bit, state });
                }
            }
        }
        Basis::X => {
            // cat states are drawn with their Born weights (1 +- e^(-2mu))/2
            let born = |s: CatSign| (1.0 + s.factor() * (-2.0 * mu).exp()) / 2.0;
            for a_sign in [CatSign::Plus, CatSign::Minus] {
                let a = cat_fock(alpha, a_sign, n_max)?;
                for b_sign in [CatSign::Plus, CatSign::Minus] {
                    let b = cat_fock(alpha, b_sign, n_max)?;
                    let state = apply_relay_bs(&a.tensor(&ecs).tensor(&b))?;
                    out.push(PreparedInput {
                        weight: born(a_sign) * born(b_sign),
                        bits_equal: a_sign == b_sign,
                        state,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn gains_from_inputs(
    basis: Basis,
    variant: EcsVariant,
    inputs: &[PreparedInput],
    det: &DetectorModel,
) -> GainSet {
    let patterns = DetectionPattern::all();
    let mut q_correct = 0.0;
    let mut q_error = 0.0;
    for input in inputs {
        let table = pattern_table(&input.state, det);
        for (i, &pattern) in patterns.iter().enumerate() {
            let flip = match sift_action(pattern, basis) {
                SiftAction::Discard => continue,
                SiftAction::Flip => true,
                SiftAction::NoFlip => false,
            };
            let p = input.weight * table[i];
            if input.bits_equal ^ flip {
                q_correct += p;
            } else {
                q_error += p;
            }
        }
    }
    GainSet { q_correct, q_error, basis, variant }
}

/// Gains by exhaustive Fock-space enumeration, the independent counterpart of
/// [`crate::gains::gains_for`].
pub fn oracle_gains(
    basis: Basis,
    variant: EcsVariant,
    mu: f64,
    eta: f64,
    p_d: f64,
) -> Result<GainSet, Error> {
    oracle_gains_with_cutoff(basis, variant, mu, eta, p_d, n_max_for(mu))
}

fn oracle_gains_with_cutoff(
    basis: Basis,
    variant: EcsVariant,
    mu: f64,
    eta: f64,
    p_d: f64,
    n_max: usize,
) -> Result<GainSet, Error> {
    let inputs = prepared_inputs(basis, variant, mu, n_max)?;
    let det = DetectorModel::new(p_d, eta);
    Ok(gains_from_inputs(basis, variant, &inputs, &det))
}

/// Intensities of the standard validation grid.
pub const GRID_MU: [f64; 4] = [0.01, 0.05, 0.1, 0.3];
/// Combined efficiencies of the standard validation grid.
pub const GRID_ETA: [f64; 4] = [1e-4, 1e-2, 0.3, 0.8];
/// Dark-count probabilities of the standard validation grid.
pub const GRID_PD: [f64; 3] = [0.0, 1e-7, 1e-3];

/// One comparison point of the validation report.
#[derive(Debug, Clone, Copy)]
pub struct ValidationRow {
    pub variant: EcsVariant,
    pub basis: Basis,
    pub mu: f64,
    pub eta: f64,
    pub p_d: f64,
    pub analytic_correct: f64,
    pub analytic_error: f64,
    pub oracle_correct: f64,
    pub oracle_error: f64,
    /// Larger of the two absolute analytic-vs-oracle deviations.
    pub deviation: f64,
}

impl ValidationRow {
    pub const CSV_HEADER: &'static str = "variant,basis,mu,eta,p_d,analytic_q_correct,\
analytic_q_error,oracle_q_correct,oracle_q_error,max_abs_deviation";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            self.variant,
            self.basis,
            self.mu,
            self.eta,
            self.p_d,
            self.analytic_correct,
            self.analytic_error,
            self.oracle_correct,
            self.oracle_error,
            self.deviation
        )
    }
}

/// Compares an analytic gain function against the enumeration over an
/// arbitrary grid. Post-beam-splitter states are shared across the detector
/// settings, which only enter the POVM contraction.
pub fn run_validation_over<F>(
    mus: &[f64],
    etas: &[f64],
    pds: &[f64],
    analytic: F,
) -> Result<Vec<ValidationRow>, Error>
where
    F: Fn(Basis, EcsVariant, f64, f64, f64) -> GainSet,
{
    let mut rows = Vec::with_capacity(8 * mus.len() * etas.len() * pds.len());
    for &variant in EcsVariant::ALL.iter() {
        for basis in [Basis::Z, Basis::X] {
            for &mu in mus {
                let inputs = prepared_inputs(basis, variant, mu, n_max_for(mu))?;
                for &eta in etas {
                    for &p_d in pds {
                        let det = DetectorModel::new(p_d, eta);
                        let oracle = gains_from_inputs(basis, variant, &inputs, &det);
                        let a = analytic(basis, variant, mu, eta, p_d);
                        let deviation = (a.q_correct - oracle.q_correct)
                            .abs()
                            .max((a.q_error - oracle.q_error).abs());
                        rows.push(ValidationRow {
                            variant,
                            basis,
                            mu,
                            eta,
                            p_d,
                            analytic_correct: a.q_correct,
                            analytic_error: a.q_error,
                            oracle_correct: oracle.q_correct,
                            oracle_error: oracle.q_error,
                            deviation,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Runs the full standard validation grid against [`gains_for`]:
/// 4 variants x 2 bases x [`GRID_MU`] x [`GRID_ETA`] x [`GRID_PD`].
pub fn run_validation_grid() -> Result<Vec<ValidationRow>, Error> {
    run_validation_over(&GRID_MU, &GRID_ETA, &GRID_PD, gains_for)
}
