//! Occurrence-matching transport between two weight streams.
//!
//! If `w_k` is the m-th occurrence (0-based count m−1) of its symbol in `w`,
//! then `γ(k)` is the position of the m-th occurrence of the same symbol in
//! `w'`. The induced map on shift sequences is
//! `G_{w,w'}(i) = (i_{γ(0)}, i_{γ(1)}, …)`.

use crate::error::{Error, Result};
use crate::symbolic::Word;

use super::WeightStream;

/// Default scan horizon as a multiple of the number of indices requested.
pub const DEFAULT_HORIZON_FACTOR: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct TransportOptions {
    pub horizon_factor: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            horizon_factor: DEFAULT_HORIZON_FACTOR,
        }
    }
}

/// `γ(0), …, γ(count−1)`.
pub fn transport_gammas(
    w: &WeightStream,
    w_prime: &WeightStream,
    count: usize,
    opts: TransportOptions,
) -> Result<Vec<usize>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let alphabet = w.alphabet_size().max(w_prime.alphabet_size());
    let source = w.prefix(count)?;

    // Rank of each position among occurrences of its symbol, and how many
    // occurrences of each symbol we need to find in w'.
    let mut seen = vec![0usize; alphabet];
    let mut ranks = Vec::with_capacity(count);
    for &s in &source {
        ranks.push(seen[s]);
        seen[s] += 1;
    }
    let needed = seen;

    let horizon = count.saturating_mul(opts.horizon_factor.max(1));
    let horizon = w_prime.max_len().map_or(horizon, |m| horizon.min(m));
    let mut len = count.min(horizon);
    let positions = loop {
        let target = w_prime.prefix(len)?;
        let mut positions: Vec<Vec<usize>> = needed.iter().map(|&c| Vec::with_capacity(c)).collect();
        for (pos, &s) in target.iter().enumerate() {
            if positions[s].len() < needed[s] {
                positions[s].push(pos);
            }
        }
        let done = positions.iter().zip(&needed).all(|(p, &c)| p.len() >= c);
        if done {
            break positions;
        }
        if len >= horizon {
            let (symbol, found) = positions
                .iter()
                .zip(&needed)
                .enumerate()
                .find(|(_, (p, &c))| p.len() < c)
                .map(|(s, (p, _))| (s, p.len()))
                .unwrap();
            return Err(Error::SymbolExhausted {
                symbol,
                occurrence: found + 1,
                horizon,
            });
        }
        len = (len * 2).min(horizon);
    };

    Ok(source
        .iter()
        .zip(&ranks)
        .map(|(&s, &r)| positions[s][r])
        .collect())
}

pub fn transport_gamma(w: &WeightStream, w_prime: &WeightStream, k: usize) -> Result<usize> {
    Ok(transport_gammas(w, w_prime, k + 1, TransportOptions::default())?[k])
}

/// `G_{w,w'}(i)` truncated to `out_len` symbols.
pub fn transport_apply(w: &WeightStream, w_prime: &WeightStream, i: &Word, out_len: usize) -> Result<Word> {
    let gammas = transport_gammas(w, w_prime, out_len, TransportOptions::default())?;
    let required = gammas.iter().max().map_or(0, |m| m + 1);
    if i.len() < required {
        return Err(Error::PrefixTooShort {
            required,
            available: i.len(),
        });
    }
    Ok(Word(gammas.into_iter().map(|g| i.0[g]).collect()))
}

/// Smallest `m` with `{0, …, n−1} ⊆ {γ(0), …, γ(m−1)}`.
///
/// The preimage of position `ℓ` under `γ_{w,w'}` is `γ_{w',w}(ℓ)`, so
/// `m_n = 1 + max_{ℓ<n} γ_{w',w}(ℓ)`.
pub fn transport_mn(w: &WeightStream, w_prime: &WeightStream, n: usize) -> Result<usize> {
    let back = transport_gammas(w_prime, w, n, TransportOptions::default())?;
    Ok(back.into_iter().max().map_or(0, |m| m + 1))
}
