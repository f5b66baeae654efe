//! Secret-key-rate engine for twin-field QKD with an entangled-coherent-state
//! relay source.
//!
//! The protocol: Alice and Bob encode key bits in coherent states `|+-alpha>`
//! (Z basis) or cat states (X basis) and send them toward two untrusted
//! measurement stations; a middle node distributes the two halves of an
//! entangled coherent state to the same stations. Each station interferes its
//! inputs on a beam splitter and announces which of its two threshold
//! detectors clicked. This crate computes the resulting detection gains and
//! error rates in closed form, validates them against a truncated-Fock-space
//! simulation of the full optical circuit, and turns them into asymptotic and
//! finite-size secret-key rates — including the security penalty for an
//! imperfect source that emits the wrong entangled state with probability
//! `1 - F2`.
//!
//! ## Modules
//!
//! - [`model`] — system parameters, channel/detector efficiency, the
//!   repeaterless (PLOB) benchmark, binary entropy
//! - [`gains`] — closed-form gains and error rates per source variant,
//!   sifting rules, fidelity-weighted source mixing
//! - [`oracle`] — independent Fock-space simulation of the optical circuit
//!   and the validation grid that pins the closed forms against it
//! - [`security`] — quantum-coin phase-error bound, asymptotic rates for
//!   ideal and imperfect sources, finite-key rate with sampling corrections
//! - [`optimizer`] — deterministic intensity / basis-bias optimization and
//!   distance sweeps
//! - [`cli`] — the `rate`, `sweep`, `finite`, and `validate` subcommands
//!   behind the thin binary
//!
//! ## Library use
//!
//! ```
//! use ecs_tfqkd::{optimizer, security, OptimizeSpec, SystemParams};
//!
//! // fixed intensity
//! let params = SystemParams { l_km: 300.0, mu: 0.03, ..SystemParams::default() };
//! let point = security::ideal_rate_point(&params)?;
//! assert!(point.rate > 0.0);
//!
//! // optimized intensity beats any fixed guess
//! let (mu_opt, best) = optimizer::optimize_mu(&params, &OptimizeSpec::default())?;
//! assert!(mu_opt.is_some() && best.rate >= point.rate);
//! # Ok::<(), ecs_tfqkd::Error>(())
//! ```
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! - **`asymptotic_rate`** — key rate at one distance, ideal source
//! - **`plob_crossing`** — sweep that locates where the protocol first beats
//!   the repeaterless bound
//! - **`distance_sweep`** — optimized rate-vs-distance table as CSV
//! - **`misalignment`** — rate degradation as the Z-basis misalignment grows
//! - **`imperfect_source`** — security penalty of a source with `F2 < 1`
//! - **`finite_key`** — finite-size rates across pulse budgets
//! - **`oracle_check`** — closed forms vs. the Fock-space simulation
//!
//! ```bash
//! cargo run --release --example asymptotic_rate
//! cargo run --release --example plob_crossing
//! cargo run --release --example distance_sweep
//! cargo run --release --example misalignment
//! cargo run --release --example imperfect_source
//! cargo run --release --example finite_key
//! cargo run --release --example oracle_check
//! ```
//!
//! The same functionality is scriptable through the binary:
//!
//! ```bash
//! cargo run --release -- rate --L 400 --mu 0.1
//! cargo run --release -- sweep --l-start 0 --l-stop 600 --l-step 10 --out rates.csv
//! cargo run --release -- finite --L 300 --N 1e12
//! cargo run --release -- validate
//! ```

pub mod cli;
pub mod gains;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod security;

pub use gains::{Basis, EcsVariant, GainSet, MixedObservables};
pub use model::SystemParams;
pub use optimizer::OptimizeSpec;
pub use security::RatePoint;

/// Errors surfaced by the engine.
///
/// Numerical functions panic on arguments that violate their documented
/// domains (programming errors); this enum covers the conditions a caller is
/// expected to handle: bad user-supplied parameters, observables that leave a
/// rate undefined, an insufficient Fock cutoff, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("rate undefined: {0}")]
    UndefinedRate(String),
    #[error("Fock cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
