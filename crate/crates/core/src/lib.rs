//! Multifractal spectra of weighted Birkhoff averages.
//!
//! The crate computes the topological entropy of level sets
//!
//! ```text
//! E_w(α) = { i : (1/n) Σ_{k<n} f(w_k, i_k) → α }
//! ```
//!
//! for first-coordinate potentials `f` and frequency-regular weight
//! sequences `w`, through the Legendre transform of the conditional pressure
//!
//! ```text
//! h(α) = inf_p  Σ_j q_j log Σ_i exp(⟨p, f_{j,i} − α⟩)
//! ```
//!
//! and checks the result against brute-force and dynamic-programming
//! word counts.
//!
//! Layout:
//!
//! * [`symbolic`]: alphabets, words, shifts of finite type, word counts.
//! * [`weights`]: weight streams (Möbius, periodic, sampled), frequencies,
//!   and the transport map between streams with equal frequencies.
//! * [`pressure`]: closed-form i.i.d. pressure with derivatives, its
//!   minimization, and partition functions `Z_n` over an SFT.
//! * [`spectrum`]: spectrum points and curves, equilibrium measures,
//!   the Möbius digit closed form.
//! * [`oracle`]: counting oracles for level sets, two-scale and
//!   degenerate-weight experiments.

pub mod bigmath;
pub mod error;
pub mod oracle;
pub mod pressure;
pub mod spectrum;
pub mod symbolic;
pub mod weights;

pub use error::{Error, Result};
pub use oracle::{CountResult, DpConfig, DpMode};
pub use pressure::{MinimizeOptions, MinimizeStatus, PotentialTable, PressureEval};
pub use spectrum::{BernoulliJoint, Entropy, SpectrumPoint, SpectrumStatus};
pub use symbolic::{SftSpec, Word};
pub use weights::{FrequencyVector, WeightStream};
