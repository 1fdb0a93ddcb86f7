//! Weight sequences over a finite alphabet `0..N`.
//!
//! A [`WeightStream`] is an immutable description of an infinite sequence
//! `w_0 w_1 …`. Sampled streams draw from a counter-based ChaCha generator
//! keyed by `(seed, stream, index)`, so any position can be recomputed
//! without replaying a stateful generator.

mod moebius;
mod transport;

pub use moebius::{moebius, moebius_sieve, moebius_sieve_with_budget, LINEAR_SIEVE_MAX, SIEVE_BUDGET};
pub use transport::{
    transport_apply, transport_gamma, transport_gammas, transport_mn, TransportOptions,
    DEFAULT_HORIZON_FACTOR,
};

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::Word;

const FREQ_TOL: f64 = 1e-12;

/// A probability vector `q` on the weight alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Invalid("frequency vector is empty".into()));
        }
        if q.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::Invalid(format!("frequencies must be finite and >= 0: {q:?}")));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > FREQ_TOL {
            return Err(Error::Invalid(format!("frequencies sum to {total}, not 1")));
        }
        Ok(FrequencyVector(q))
    }

    pub fn uniform(n: usize) -> Self {
        FrequencyVector(vec![1.0 / n as f64; n])
    }

    /// Densities of `μ = +1, −1, 0`: `(3/π², 3/π², 1 − 6/π²)`, listed in the
    /// order of the default Möbius coding.
    pub fn moebius() -> Self {
        let d = 3.0 / (PI * PI);
        FrequencyVector(vec![d, d, 1.0 - 2.0 * d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Shannon entropy in nats, with `0·log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self.0.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
    }
}

impl TryFrom<Vec<f64>> for FrequencyVector {
    type Error = Error;
    fn try_from(q: Vec<f64>) -> Result<Self> {
        FrequencyVector::new(q)
    }
}

impl From<FrequencyVector> for Vec<f64> {
    fn from(q: FrequencyVector) -> Self {
        q.0
    }
}

/// Symbols assigned to `μ = +1`, `μ = −1` and `μ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Default for MoebiusMap {
    fn default() -> Self {
        MoebiusMap {
            plus: 0,
            minus: 1,
            zero: 2,
        }
    }
}

impl MoebiusMap {
    fn code(&self, mu: i8) -> usize {
        match mu {
            1 => self.plus,
            -1 => self.minus,
            _ => self.zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamKind {
    Explicit(Vec<usize>),
    Periodic(Vec<usize>),
    /// Position `k` carries the code of `μ(k + 1)`.
    MoebiusCoded(MoebiusMap),
    BernoulliSampled {
        q: FrequencyVector,
        seed: u64,
    },
    MarkovSampled {
        transition: Vec<Vec<f64>>,
        initial: FrequencyVector,
        seed: u64,
    },
}

/// A deterministic weight sequence over `0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StreamDescriptor", into = "StreamDescriptor")]
pub struct WeightStream {
    kind: StreamKind,
    alphabet: usize,
    // ChaCha stream id; distinct ids give independent draws from one seed.
    stream: u64,
}

impl WeightStream {
    pub fn explicit(symbols: Vec<usize>, alphabet: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Invalid("explicit stream is empty".into()));
        }
        check_symbols(&symbols, alphabet)?;
        Ok(Self::from_kind(StreamKind::Explicit(symbols), alphabet))
    }

    pub fn periodic(pattern: Vec<usize>, alphabet: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Invalid("periodic pattern is empty".into()));
        }
        check_symbols(&pattern, alphabet)?;
        Ok(Self::from_kind(StreamKind::Periodic(pattern), alphabet))
    }

    /// Möbius-coded weights with the default coding `+1→0, −1→1, 0→2`.
    pub fn moebius() -> Self {
        Self::moebius_with(MoebiusMap::default()).expect("default map is valid")
    }

    pub fn moebius_with(map: MoebiusMap) -> Result<Self> {
        let symbols = [map.plus, map.minus, map.zero];
        if symbols[0] == symbols[1] || symbols[0] == symbols[2] || symbols[1] == symbols[2] {
            return Err(Error::Invalid("Möbius coding must use three distinct symbols".into()));
        }
        let alphabet = symbols.iter().max().unwrap() + 1;
        Ok(Self::from_kind(StreamKind::MoebiusCoded(map), alphabet))
    }

    pub fn bernoulli(q: FrequencyVector, seed: u64) -> Self {
        let alphabet = q.len();
        Self::from_kind(StreamKind::BernoulliSampled { q, seed }, alphabet)
    }

    pub fn markov(transition: Vec<Vec<f64>>, initial: FrequencyVector, seed: u64) -> Result<Self> {
        let n = initial.len();
        if transition.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "transition has {} rows, initial distribution has {n} entries",
                transition.len()
            )));
        }
        for row in &transition {
            if row.len() != n {
                return Err(Error::DimensionMismatch("transition matrix must be square".into()));
            }
            FrequencyVector::new(row.clone())?;
        }
        Ok(Self::from_kind(
            StreamKind::MarkovSampled {
                transition,
                initial,
                seed,
            },
            n,
        ))
    }

    fn from_kind(kind: StreamKind, alphabet: usize) -> Self {
        WeightStream {
            kind,
            alphabet,
            stream: 0,
        }
    }

    pub fn kind(&self) -> &StreamKind {
        &self.kind
    }

    /// Weight alphabet size `N`.
    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn is_sampled(&self) -> bool {
        matches!(
            self.kind,
            StreamKind::BernoulliSampled { .. } | StreamKind::MarkovSampled { .. }
        )
    }

    /// An independent draw of the same sampled process. Deterministic kinds
    /// are returned unchanged.
    pub fn resampled(&self, draw: u64) -> Self {
        let mut out = self.clone();
        if self.is_sampled() {
            out.stream = draw;
        }
        out
    }

    /// The same process with a different base seed.
    pub fn reseeded(&self, new_seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out.kind {
            StreamKind::BernoulliSampled { seed, .. } | StreamKind::MarkovSampled { seed, .. } => *seed = new_seed,
            _ => {}
        }
        out
    }

    /// Number of symbols available, `None` for infinite streams.
    pub fn max_len(&self) -> Option<usize> {
        match &self.kind {
            StreamKind::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// `w_k`. Markov streams replay their prefix, so this is O(k) for them.
    pub fn symbol(&self, k: usize) -> Result<usize> {
        match &self.kind {
            StreamKind::Explicit(v) => v.get(k).copied().ok_or(Error::PrefixTooShort {
                required: k + 1,
                available: v.len(),
            }),
            StreamKind::Periodic(p) => Ok(p[k % p.len()]),
            StreamKind::MoebiusCoded(map) => Ok(map.code(moebius(k as u64 + 1))),
            StreamKind::BernoulliSampled { q, seed } => {
                let mut rng = self.rng(*seed);
                rng.set_word_pos(2 * k as u128);
                Ok(inverse_cdf(q.as_slice(), unit(rng.next_u64())))
            }
            StreamKind::MarkovSampled { .. } => Ok(self.prefix(k + 1)?[k]),
        }
    }

    /// `w_0 … w_{len−1}`.
    pub fn prefix(&self, len: usize) -> Result<Vec<usize>> {
        match &self.kind {
            StreamKind::Explicit(v) => {
                if len > v.len() {
                    return Err(Error::PrefixTooShort {
                        required: len,
                        available: v.len(),
                    });
                }
                Ok(v[..len].to_vec())
            }
            StreamKind::Periodic(p) => Ok((0..len).map(|k| p[k % p.len()]).collect()),
            StreamKind::MoebiusCoded(map) => {
                if len == 0 {
                    return Ok(Vec::new());
                }
                let mu = moebius_sieve(len)?;
                Ok(mu[1..].iter().map(|&m| map.code(m)).collect())
            }
            StreamKind::BernoulliSampled { q, seed } => {
                let mut rng = self.rng(*seed);
                Ok((0..len)
                    .map(|_| inverse_cdf(q.as_slice(), unit(rng.next_u64())))
                    .collect())
            }
            StreamKind::MarkovSampled {
                transition,
                initial,
                seed,
            } => {
                let mut rng = self.rng(*seed);
                let mut out = Vec::with_capacity(len);
                let mut state = 0;
                for k in 0..len {
                    let u = unit(rng.next_u64());
                    state = if k == 0 {
                        inverse_cdf(initial.as_slice(), u)
                    } else {
                        inverse_cdf(&transition[state], u)
                    };
                    out.push(state);
                }
                Ok(out)
            }
        }
    }

    pub fn word(&self, len: usize) -> Result<Word> {
        self.prefix(len).map(Word)
    }

    /// The frequency vector the stream is built to realize, when known in
    /// closed form.
    pub fn target_frequency(&self) -> Option<FrequencyVector> {
        let counts_of = |v: &[usize]| {
            let mut c = vec![0.0; self.alphabet];
            for &s in v {
                c[s] += 1.0;
            }
            let n = v.len() as f64;
            FrequencyVector::new(c.into_iter().map(|x| x / n).collect()).ok()
        };
        match &self.kind {
            StreamKind::Explicit(v) | StreamKind::Periodic(v) => counts_of(v),
            StreamKind::MoebiusCoded(map) => {
                let d = FrequencyVector::moebius();
                let mut q = vec![0.0; self.alphabet];
                q[map.plus] = d.0[0];
                q[map.minus] = d.0[1];
                q[map.zero] = d.0[2];
                Some(FrequencyVector(q))
            }
            StreamKind::BernoulliSampled { q, .. } => Some(q.clone()),
            StreamKind::MarkovSampled { transition, .. } => stationary(transition),
        }
    }

    fn rng(&self, seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn check_symbols(symbols: &[usize], alphabet: usize) -> Result<()> {
    if alphabet == 0 {
        return Err(Error::Invalid("weight alphabet is empty".into()));
    }
    match symbols.iter().find(|&&s| s >= alphabet) {
        Some(s) => Err(Error::Invalid(format!(
            "weight symbol {s} out of range for alphabet of size {alphabet}"
        ))),
        None => Ok(()),
    }
}

fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave acc slightly below 1; fall back to the last
    // symbol with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn stationary(transition: &[Vec<f64>]) -> Option<FrequencyVector> {
    let n = transition.len();
    // Lazy chain (P + I)/2 has the same stationary law and is aperiodic.
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for (i, &mass) in pi.iter().enumerate() {
            next[i] += 0.5 * mass;
            for (j, &t) in transition[i].iter().enumerate() {
                next[j] += 0.5 * mass * t;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    FrequencyVector::new(pi).ok()
}

/// Empirical frequencies `#{k < n : w_k = i} / n`.
pub fn empirical_frequency(w: &WeightStream, n: usize) -> Result<FrequencyVector> {
    if n == 0 {
        return Err(Error::Invalid("frequency window must be positive".into()));
    }
    let prefix = w.prefix(n)?;
    let mut counts = vec![0usize; w.alphabet_size()];
    for s in prefix {
        counts[s] += 1;
    }
    let q = counts.into_iter().map(|c| c as f64 / n as f64).collect();
    Ok(FrequencyVector(q))
}

/// JSON form of a [`WeightStream`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StreamDescriptor {
    Explicit {
        symbols: Vec<usize>,
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    Periodic {
        pattern: Vec<usize>,
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    Moebius {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<[usize; 3]>,
        #[serde(default)]
        seed: u64,
    },
    Bernoulli {
        q: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
}

fn inferred_alphabet(symbols: &[usize], n: Option<usize>) -> usize {
    n.unwrap_or_else(|| symbols.iter().max().map_or(1, |m| m + 1))
}

impl TryFrom<StreamDescriptor> for WeightStream {
    type Error = Error;

    fn try_from(d: StreamDescriptor) -> Result<Self> {
        match d {
            StreamDescriptor::Explicit { symbols, n, .. } => {
                let a = inferred_alphabet(&symbols, n);
                WeightStream::explicit(symbols, a)
            }
            StreamDescriptor::Periodic { pattern, n, .. } => {
                let a = inferred_alphabet(&pattern, n);
                WeightStream::periodic(pattern, a)
            }
            StreamDescriptor::Moebius { map, .. } => match map {
                None => Ok(WeightStream::moebius()),
                Some([plus, minus, zero]) => WeightStream::moebius_with(MoebiusMap { plus, minus, zero }),
            },
            StreamDescriptor::Bernoulli { q, seed } => Ok(WeightStream::bernoulli(FrequencyVector::new(q)?, seed)),
            StreamDescriptor::Markov {
                transition,
                initial,
                seed,
            } => WeightStream::markov(transition, FrequencyVector::new(initial)?, seed),
        }
    }
}

impl From<WeightStream> for StreamDescriptor {
    fn from(w: WeightStream) -> Self {
        let a = w.alphabet;
        match w.kind {
            StreamKind::Explicit(symbols) => StreamDescriptor::Explicit {
                symbols,
                n: Some(a),
                seed: 0,
            },
            StreamKind::Periodic(pattern) => StreamDescriptor::Periodic {
                pattern,
                n: Some(a),
                seed: 0,
            },
            StreamKind::MoebiusCoded(m) => StreamDescriptor::Moebius {
                map: Some([m.plus, m.minus, m.zero]),
                seed: 0,
            },
            StreamKind::BernoulliSampled { q, seed } => StreamDescriptor::Bernoulli { q: q.0, seed },
            StreamKind::MarkovSampled {
                transition,
                initial,
                seed,
            } => StreamDescriptor::Markov {
                transition,
                initial: initial.0,
                seed,
            },
        }
    }
}
