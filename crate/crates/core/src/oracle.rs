//! Counting oracles for weighted Birkhoff level sets.
//!
//! A word `i ∈ Σ_{A,n}` is counted when its weighted averages
//! `(1/n_c)·Σ_{k<n_c} f(w_k, i_k)` lie within `ε` of `α_c` at every
//! checkpoint `n_c`. Exact mode enumerates words. Bucketed mode runs a
//! dynamic program over (last symbol, quantized partial sum) and tracks the
//! true minimum and maximum sum inside each bucket, so a bucket is only
//! ambiguous when it straddles a window edge.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigmath;
use crate::error::{Error, Result};
use crate::pressure::{mean_range, PotentialTable};
use crate::spectrum::{spectrum_at, SpectrumPoint, SpectrumStatus};
use crate::symbolic::{count_admissible, SftSpec, Word};
use crate::weights::{FrequencyVector, WeightStream};

pub const DEFAULT_STATE_LIMIT: usize = 4_000_000;
pub const DEFAULT_EXACT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DpMode {
    Exact,
    #[serde(alias = "dp")]
    Bucketed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    /// Bucket width `δ`; `None` means `ε/8`.
    pub bucket_width: Option<f64>,
    pub mode: DpMode,
    /// Maximum number of live DP states at any position.
    pub state_limit: usize,
    /// Maximum `#Σ_{A,n}` for exact enumeration.
    pub exact_cap: u64,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            bucket_width: None,
            mode: DpMode::Bucketed,
            state_limit: DEFAULT_STATE_LIMIT,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

impl DpConfig {
    pub fn exact() -> Self {
        DpConfig {
            mode: DpMode::Exact,
            ..Self::default()
        }
    }

    pub fn bucketed(delta: f64) -> Self {
        DpConfig {
            bucket_width: Some(delta),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub n: usize,
    pub epsilon: f64,
    pub count: BigUint,
    /// `(1/n)·log count`, or `-inf` for an empty count.
    pub exponent: f64,
    /// Words counted only because their bucket straddled a window edge.
    /// Always zero in exact mode.
    pub ambiguous: BigUint,
}

impl CountResult {
    fn new(n: usize, epsilon: f64, count: BigUint, ambiguous: BigUint) -> Self {
        let exponent = bigmath::exponent(&count, n).unwrap_or(f64::NEG_INFINITY);
        CountResult {
            n,
            epsilon,
            count,
            exponent,
            ambiguous,
        }
    }
}

/// Target `|S_{len}/len − alpha| ≤ ε` at prefix length `len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub len: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy)]
struct Window {
    len: usize,
    lo: f64,
    hi: f64,
    tol: f64,
}

impl Window {
    fn new(c: Checkpoint, epsilon: f64) -> Self {
        let n = c.len as f64;
        let lo = n * (c.alpha - epsilon);
        let hi = n * (c.alpha + epsilon);
        // Absorbs rounding in the float partial sums.
        let tol = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
        Window {
            len: c.len,
            lo,
            hi,
            tol,
        }
    }

    fn contains(&self, s: f64) -> bool {
        s >= self.lo - self.tol && s <= self.hi + self.tol
    }
}

/// `#{i ∈ Σ_{A,n} : |(1/n) Σ_{k<n} f(w_k, i_k) − α| ≤ ε}`.
#[allow(clippy::too_many_arguments)]
pub fn level_set_count(
    spec: &SftSpec,
    f: &PotentialTable,
    w_prefix: &Word,
    alpha: f64,
    epsilon: f64,
    n: usize,
    cfg: &DpConfig,
) -> Result<CountResult> {
    checkpoint_count(spec, f, w_prefix, &[Checkpoint { len: n, alpha }], epsilon, cfg)
}

/// Words whose average is `ε`-close to `α₁` at `n1` and to `α₂` at `n2`.
#[allow(clippy::too_many_arguments)]
pub fn two_scale_count(
    spec: &SftSpec,
    f: &PotentialTable,
    w_prefix: &Word,
    alpha1: f64,
    alpha2: f64,
    epsilon: f64,
    n1: usize,
    n2: usize,
    cfg: &DpConfig,
) -> Result<CountResult> {
    if n1 >= n2 {
        return Err(Error::Invalid(format!("two-scale counts need n1 < n2, got {n1} and {n2}")));
    }
    let cps = [
        Checkpoint { len: n1, alpha: alpha1 },
        Checkpoint { len: n2, alpha: alpha2 },
    ];
    checkpoint_count(spec, f, w_prefix, &cps, epsilon, cfg)
}

/// Count over arbitrary checkpoints; the word length is the last
/// checkpoint's `len`.
pub fn checkpoint_count(
    spec: &SftSpec,
    f: &PotentialTable,
    w_prefix: &Word,
    checkpoints: &[Checkpoint],
    epsilon: f64,
    cfg: &DpConfig,
) -> Result<CountResult> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch("counting needs a scalar potential".into()));
    }
    if spec.alphabet_size() != f.shift_alphabet() {
        return Err(Error::DimensionMismatch(format!(
            "SFT alphabet {} differs from potential K = {}",
            spec.alphabet_size(),
            f.shift_alphabet()
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let Some(last) = checkpoints.last() else {
        return Err(Error::Invalid("at least one checkpoint is required".into()));
    };
    let n = last.len;
    if n == 0 || checkpoints.windows(2).any(|c| c[0].len >= c[1].len) || checkpoints[0].len == 0 {
        return Err(Error::Invalid("checkpoint lengths must be positive and increasing".into()));
    }
    if w_prefix.len() < n {
        return Err(Error::PrefixTooShort {
            required: n,
            available: w_prefix.len(),
        });
    }
    let w = &w_prefix.symbols()[..n];
    if let Some(&bad) = w.iter().find(|&&s| s >= f.weight_alphabet()) {
        return Err(Error::Invalid(format!(
            "weight symbol {bad} out of range for N = {}",
            f.weight_alphabet()
        )));
    }
    let windows: Vec<Window> = checkpoints.iter().map(|&c| Window::new(c, epsilon)).collect();
    match cfg.mode {
        DpMode::Exact => exact_count(spec, f, w, &windows, epsilon, cfg.exact_cap),
        DpMode::Bucketed => {
            let delta = cfg.bucket_width.unwrap_or(epsilon / 8.0);
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(Error::Invalid(format!("bucket width must be positive, got {delta}")));
            }
            bucketed_count(spec, f, w, &windows, epsilon, delta, cfg.state_limit)
        }
    }
}

fn exact_count(
    spec: &SftSpec,
    f: &PotentialTable,
    w: &[usize],
    windows: &[Window],
    epsilon: f64,
    cap: u64,
) -> Result<CountResult> {
    let n = w.len();
    let total = count_admissible(spec, n);
    if total > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: total.to_string(),
            cap,
        });
    }

    struct Walk<'a> {
        spec: &'a SftSpec,
        f: &'a PotentialTable,
        w: &'a [usize],
        windows: &'a [Window],
    }

    impl Walk<'_> {
        // Words extending a prefix of length `pos` ending in `last` with
        // partial sum `sum`; `next` indexes the first unchecked window.
        fn count(&self, pos: usize, last: usize, sum: f64, next: usize) -> u64 {
            let mut next = next;
            if self.windows[next].len == pos {
                if !self.windows[next].contains(sum) {
                    return 0;
                }
                next += 1;
                if next == self.windows.len() {
                    return 1;
                }
            }
            self.spec
                .successors(last)
                .map(|c| self.count(pos + 1, c, sum + self.f.scalar_value(self.w[pos], c), next))
                .sum()
        }
    }

    let walk = Walk { spec, f, w, windows };
    let count: u64 = (0..spec.alphabet_size())
        .into_par_iter()
        .map(|c| walk.count(1, c, f.scalar_value(w[0], c), 0))
        .sum();
    Ok(CountResult::new(n, epsilon, BigUint::from(count), BigUint::zero()))
}

#[derive(Clone)]
struct Bucket {
    count: BigUint,
    uncertain: BigUint,
    min: f64,
    max: f64,
}

impl Bucket {
    fn merge(&mut self, other: &Bucket, shift: f64) {
        self.count += &other.count;
        self.uncertain += &other.uncertain;
        self.min = self.min.min(other.min + shift);
        self.max = self.max.max(other.max + shift);
    }
}

fn bucketed_count(
    spec: &SftSpec,
    f: &PotentialTable,
    w: &[usize],
    windows: &[Window],
    epsilon: f64,
    delta: f64,
    state_limit: usize,
) -> Result<CountResult> {
    let n = w.len();
    let k = spec.alphabet_size();

    // Quantized cell values and per-position extremes for pruning.
    let quant: Vec<Vec<i64>> = (0..f.weight_alphabet())
        .map(|j| (0..k).map(|i| (f.scalar_value(j, i) / delta).round() as i64).collect())
        .collect();
    let mut suffix_min = vec![0.0; n + 1];
    let mut suffix_max = vec![0.0; n + 1];
    for pos in (0..n).rev() {
        let row = (0..k).map(|i| f.scalar_value(w[pos], i));
        let (mn, mx) = row.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        suffix_min[pos] = suffix_min[pos + 1] + mn;
        suffix_max[pos] = suffix_max[pos + 1] + mx;
    }

    let mut states: HashMap<(usize, i64), Bucket> = HashMap::new();
    for c in 0..k {
        let v = f.scalar_value(w[0], c);
        states.insert(
            (c, quant[w[0]][c]),
            Bucket {
                count: BigUint::from(1u32),
                uncertain: BigUint::zero(),
                min: v,
                max: v,
            },
        );
    }

    let mut next_window = 0;
    let mut pos = 1;
    loop {
        // Apply the checkpoint at this length, then prune against the next.
        if windows[next_window].len == pos {
            let win = windows[next_window];
            states.retain(|_, b| {
                if b.min >= win.lo - win.tol && b.max <= win.hi + win.tol {
                    true
                } else if b.max < win.lo - win.tol || b.min > win.hi + win.tol {
                    false
                } else {
                    b.uncertain = b.count.clone();
                    true
                }
            });
            next_window += 1;
            if next_window == windows.len() {
                break;
            }
        }
        let win = windows[next_window];
        let fut_min = suffix_min[pos] - suffix_min[win.len];
        let fut_max = suffix_max[pos] - suffix_max[win.len];
        states.retain(|_, b| b.min + fut_min <= win.hi + win.tol && b.max + fut_max >= win.lo - win.tol);

        let j = w[pos];
        let mut next: HashMap<(usize, i64), Bucket> = HashMap::with_capacity(states.len() * 2);
        for (&(last, qsum), b) in &states {
            for c in spec.successors(last) {
                let v = f.scalar_value(j, c);
                let key = (c, qsum + quant[j][c]);
                match next.get_mut(&key) {
                    Some(slot) => slot.merge(b, v),
                    None => {
                        next.insert(
                            key,
                            Bucket {
                                count: b.count.clone(),
                                uncertain: b.uncertain.clone(),
                                min: b.min + v,
                                max: b.max + v,
                            },
                        );
                    }
                }
            }
        }
        if next.len() > state_limit {
            return Err(Error::BucketRangeOverflow {
                states: next.len(),
                limit: state_limit,
            });
        }
        states = next;
        pos += 1;
    }

    let mut count = BigUint::zero();
    let mut ambiguous = BigUint::zero();
    for b in states.values() {
        count += &b.count;
        ambiguous += &b.uncertain;
    }
    Ok(CountResult::new(n, epsilon, count, ambiguous))
}

/// One schedule entry of [`empirical_spectrum_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub result: CountResult,
    /// Allowed `|exponent − predicted|`.
    pub slack: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCheck {
    pub predicted: SpectrumPoint,
    pub entries: Vec<CheckEntry>,
}

impl SpectrumCheck {
    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.within)
    }
}

/// Slack band around the predicted entropy at `(n, ε)`.
///
/// The counting upper bound carries `ε·‖p*‖`; the number of occupation
/// types adds `N·K·log(n+1)/n`. Without a finite minimizer the `ε` term is
/// the entropy modulus `ε'(1 + log(1/ε'))` with `ε'` the window relative to
/// the domain width.
pub fn slack_band(predicted: &SpectrumPoint, n_weights: usize, k: usize, domain_width: f64, n: usize, epsilon: f64) -> f64 {
    let n_f = n as f64;
    let types = (n_weights * k) as f64 * (n_f + 1.0).ln() / n_f;
    let window = match (&predicted.status, &predicted.p_star) {
        (SpectrumStatus::Interior | SpectrumStatus::DegenerateVertex, Some(p)) => {
            epsilon * p.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
        _ => {
            let rel = if domain_width > 0.0 { (epsilon / domain_width).min(1.0) } else { 1.0 };
            rel * (1.0 + (1.0 / rel).ln())
        }
    };
    types + window
}

/// Counting exponents along a schedule of `(n, ε)`, compared against the
/// spectrum predicted from `q`. Entries run in parallel.
#[allow(clippy::too_many_arguments)]
pub fn empirical_spectrum_check(
    q: &FrequencyVector,
    f: &PotentialTable,
    w: &WeightStream,
    alpha: f64,
    schedule: &[(usize, f64)],
    cfg: &DpConfig,
) -> Result<SpectrumCheck> {
    let predicted = spectrum_at(q, f, &[alpha])?;
    check_against(&predicted, q, f, w, schedule, cfg)
}

/// As [`empirical_spectrum_check`] with an externally supplied
/// prediction.
pub fn check_against(
    predicted: &SpectrumPoint,
    q: &FrequencyVector,
    f: &PotentialTable,
    w: &WeightStream,
    schedule: &[(usize, f64)],
    cfg: &DpConfig,
) -> Result<SpectrumCheck> {
    if schedule.is_empty() {
        return Err(Error::Invalid("schedule is empty".into()));
    }
    let alpha = *predicted
        .alpha
        .first()
        .ok_or_else(|| Error::DimensionMismatch("prediction has no alpha".into()))?;
    let spec = SftSpec::full_shift(f.shift_alphabet())?;
    let longest = schedule.iter().map(|&(n, _)| n).max().unwrap();
    let prefix = w.word(longest)?;
    let (lo, hi) = mean_range(q, f);
    let entries = schedule
        .par_iter()
        .map(|&(n, eps)| {
            let result = level_set_count(&spec, f, &prefix, alpha, eps, n, cfg)?;
            let slack = slack_band(predicted, f.weight_alphabet(), f.shift_alphabet(), hi - lo, n, eps);
            let within = match predicted.entropy.value() {
                None => result.count.is_zero(),
                Some(h) => result.exponent.is_finite() && (result.exponent - h).abs() <= slack,
            };
            Ok(CheckEntry { result, slack, within })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumCheck {
        predicted: predicted.clone(),
        entries,
    })
}

/// Weights on positions `1..=2·M_last` (1-based): `1` on `(M_j, 2M_j]` with
/// `M_j = growth^j·m0`, `0` elsewhere. Returned 0-based.
pub fn degenerate_weights(n_blocks: usize, growth: usize, m0: usize) -> Result<Vec<usize>> {
    if n_blocks == 0 || growth < 2 || m0 == 0 {
        return Err(Error::Invalid("need n_blocks >= 1, growth >= 2 and M0 >= 1".into()));
    }
    let scales = block_scales(n_blocks, growth, m0)?;
    let len = 2 * scales.last().unwrap();
    let mut w = vec![0; len];
    for &m in &scales {
        w[m..2 * m].iter_mut().for_each(|x| *x = 1);
    }
    Ok(w)
}

fn block_scales(n_blocks: usize, growth: usize, m0: usize) -> Result<Vec<usize>> {
    let mut scales = Vec::with_capacity(n_blocks);
    let mut m = m0;
    for j in 0..n_blocks {
        if j > 0 {
            m = m
                .checked_mul(growth)
                .ok_or_else(|| Error::Invalid("block scales overflow".into()))?;
        }
        scales.push(m);
    }
    Ok(scales)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateScale {
    /// `M_j`.
    pub m: usize,
    /// Word length, `M_j` or `2M_j`.
    pub n: usize,
    pub result: CountResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateReport {
    /// `(1/2)·log 2 + (1/2)·H(p)` with `p = φ₁/(φ₁ − φ₀)`.
    pub h_deg: f64,
    /// Share of constrained positions at the `2M_j` scales in the limit:
    /// `growth/(2·(growth − 1))`, which is `1/2` only as growth → ∞.
    pub constrained_share: f64,
    pub scales: Vec<DegenerateScale>,
    /// For `j ≥ 1`, words within `ε` of `α` at all of `2M_{j−1}`, `M_j` and
    /// `2M_j`. The weights vanish on `(2M_{j−1}, M_j]`, so this is empty for
    /// `α ≠ 0` once `ε` is small.
    pub chained: Vec<DegenerateScale>,
}

impl DegenerateReport {
    /// Entries at the `2M_j` scales.
    pub fn upper_scales(&self) -> impl Iterator<Item = &DegenerateScale> {
        self.scales.iter().filter(|s| s.n == 2 * s.m)
    }
}

/// Level-set counts for the block weight sequence with potential
/// `f(0, i) = 0`, `f(1, i) = φ_i` at `α` (the example's level is `α = 0`).
///
/// `epsilon = None` uses `0.5/√n` at each scale.
pub fn degenerate_weight_example(
    n_blocks: usize,
    growth: usize,
    phi: (f64, f64),
    alpha: f64,
    epsilon: Option<f64>,
    cfg: &DpConfig,
) -> Result<DegenerateReport> {
    let (phi0, phi1) = phi;
    if !(phi0 * phi1 <= 0.0) || phi0 == phi1 {
        return Err(Error::Invalid(format!(
            "need φ₀·φ₁ ≤ 0 and φ₀ ≠ φ₁, got ({phi0}, {phi1})"
        )));
    }
    let p = phi1 / (phi1 - phi0);
    let h_p = if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    };
    let h_deg = 0.5 * std::f64::consts::LN_2 + 0.5 * h_p;

    let scales = block_scales(n_blocks, growth, 1)?;
    let w = Word(degenerate_weights(n_blocks, growth, 1)?);
    let f = PotentialTable::factored(vec![0.0, 1.0], vec![phi0, phi1])?;
    let spec = SftSpec::full_shift(2)?;
    let jobs: Vec<(usize, usize)> = scales.iter().flat_map(|&m| [(m, m), (m, 2 * m)]).collect();
    let results = jobs
        .par_iter()
        .map(|&(m, n)| {
            let eps = epsilon.unwrap_or(0.5 / (n as f64).sqrt());
            let result = level_set_count(&spec, &f, &w, alpha, eps, n, cfg)?;
            Ok(DegenerateScale { m, n, result })
        })
        .collect::<Result<Vec<_>>>()?;
    let chained = scales
        .par_windows(2)
        .map(|pair| {
            let (prev, m) = (pair[0], pair[1]);
            let n = 2 * m;
            let eps = epsilon.unwrap_or(0.5 / (n as f64).sqrt());
            let cps = [2 * prev, m, n].map(|len| Checkpoint { len, alpha });
            let result = checkpoint_count(&spec, &f, &w, &cps, eps, cfg)?;
            Ok(DegenerateScale { m, n, result })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = growth as f64;
    Ok(DegenerateReport {
        h_deg,
        constrained_share: g / (2.0 * (g - 1.0)),
        scales: results,
        chained,
    })
}

/// `|H(ν⊗m) − H(ν) − H(m)|`.
pub fn product_entropy_check(nu: &FrequencyVector, m: &FrequencyVector) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    let joint: f64 = nu
        .as_slice()
        .iter()
        .flat_map(|&a| m.as_slice().iter().map(move |&b| h(a * b)))
        .sum();
    (joint - nu.entropy() - m.entropy()).abs()
}
