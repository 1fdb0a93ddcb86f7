//! Alphabets, words, cylinders and subshifts of finite type.
//!
//! Symbols are `0..K`. A subshift of finite type is described by a 0/1
//! adjacency matrix; the full shift is the all-ones matrix.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const POWER_ITER_TOL: f64 = 1e-12;
const POWER_ITER_MAX: usize = 100_000;

/// Shift alphabet plus 0/1 adjacency matrix.
///
/// The primitivity index is computed once at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SftSpecRepr", into = "SftSpecRepr")]
pub struct SftSpec {
    k: usize,
    adjacency: Vec<Vec<bool>>,
    primitivity: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct SftSpecRepr {
    #[serde(rename = "K")]
    k: usize,
    adjacency: Vec<Vec<u8>>,
}

impl TryFrom<SftSpecRepr> for SftSpec {
    type Error = Error;

    fn try_from(raw: SftSpecRepr) -> Result<Self> {
        if raw.adjacency.len() != raw.k {
            return Err(Error::DimensionMismatch(format!(
                "adjacency has {} rows, K = {}",
                raw.adjacency.len(),
                raw.k
            )));
        }
        let mut rows = Vec::with_capacity(raw.k);
        for row in raw.adjacency {
            if row.len() != raw.k {
                return Err(Error::DimensionMismatch(format!(
                    "adjacency row has {} entries, K = {}",
                    row.len(),
                    raw.k
                )));
            }
            let mut out = Vec::with_capacity(raw.k);
            for x in row {
                match x {
                    0 => out.push(false),
                    1 => out.push(true),
                    other => {
                        return Err(Error::Invalid(format!(
                            "adjacency entries must be 0 or 1, got {other}"
                        )))
                    }
                }
            }
            rows.push(out);
        }
        SftSpec::new(rows)
    }
}

impl From<SftSpec> for SftSpecRepr {
    fn from(spec: SftSpec) -> Self {
        SftSpecRepr {
            k: spec.k,
            adjacency: spec
                .adjacency
                .iter()
                .map(|row| row.iter().map(|&b| b as u8).collect())
                .collect(),
        }
    }
}

impl SftSpec {
    pub fn new(adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let k = adjacency.len();
        if k < 2 {
            return Err(Error::Invalid(format!("alphabet size must be >= 2, got {k}")));
        }
        if adjacency.iter().any(|row| row.len() != k) {
            return Err(Error::DimensionMismatch("adjacency must be square".into()));
        }
        let primitivity = primitivity_index(&adjacency);
        Ok(SftSpec {
            k,
            adjacency,
            primitivity,
        })
    }

    pub fn full_shift(k: usize) -> Result<Self> {
        Self::new(vec![vec![true; k]; k])
    }

    /// The golden-mean shift on `{0, 1}`, forbidding the word `00`.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![false, true], vec![true, true]]).expect("valid 2x2 matrix")
    }

    pub fn from_01(rows: &[&[u8]]) -> Result<Self> {
        SftSpec::try_from(SftSpecRepr {
            k: rows.len(),
            adjacency: rows.iter().map(|r| r.to_vec()).collect(),
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn allowed(&self, from: usize, to: usize) -> bool {
        self.adjacency[from][to]
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn is_full_shift(&self) -> bool {
        self.adjacency.iter().all(|row| row.iter().all(|&b| b))
    }

    /// Cached result of [`is_primitive`].
    pub fn primitivity_index(&self) -> Option<usize> {
        self.primitivity
    }

    /// Successors of `from` in increasing order.
    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[from]
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
    }
}

/// Smallest `r ≤ (K−1)²+1` with `A^r` entrywise positive.
///
/// Powers are taken over the boolean semiring, so nothing overflows.
pub fn is_primitive(spec: &SftSpec) -> Option<usize> {
    spec.primitivity
}

fn primitivity_index(adj: &[Vec<bool>]) -> Option<usize> {
    let k = adj.len();
    let bound = (k - 1) * (k - 1) + 1;
    let mut power = adj.to_vec();
    for r in 1..=bound {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(r);
        }
        power = bool_mul(&power, adj);
    }
    None
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).any(|m| a[i][m] && b[m][j]))
                .collect()
        })
        .collect()
}

/// `#Σ_{A,n}`: the sum of all entries of `A^{n−1}`, exactly.
pub fn count_admissible(spec: &SftSpec, n: usize) -> BigUint {
    assert!(n >= 1, "word length must be positive");
    let k = spec.k;
    let mut ends: Vec<BigUint> = vec![BigUint::one(); k];
    for _ in 1..n {
        let mut next = vec![BigUint::zero(); k];
        for (from, count) in ends.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            for to in spec.successors(from) {
                next[to] += count;
            }
        }
        ends = next;
    }
    ends.into_iter().sum()
}

/// A finite word over `0..K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(symbols: Vec<usize>, alphabet: usize) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(Error::Invalid(format!(
                "symbol {bad} out of range for alphabet of size {alphabet}"
            )));
        }
        Ok(Word(symbols))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn is_admissible(&self, spec: &SftSpec) -> bool {
        self.0.iter().all(|&s| s < spec.k) && self.0.windows(2).all(|p| spec.allowed(p[0], p[1]))
    }

    /// `σ^m` applied to the word: drops the first `m` symbols.
    pub fn shifted(&self, m: usize) -> Word {
        Word(self.0[m.min(self.0.len())..].to_vec())
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Lexicographic iterator over `Σ_{A,n}`.
pub struct AdmissibleWords<'a> {
    spec: &'a SftSpec,
    n: usize,
    word: Vec<usize>,
    started: bool,
    done: bool,
}

impl AdmissibleWords<'_> {
    fn fits(&self, c: usize) -> bool {
        match self.word.last() {
            None => true,
            Some(&prev) => self.spec.allowed(prev, c),
        }
    }

    // Depth-first extension of `word` to length n, starting the search at
    // symbol `start` on the current depth.
    fn fill(&mut self, mut start: usize) -> bool {
        while self.word.len() < self.n {
            match (start..self.spec.k).find(|&c| self.fits(c)) {
                Some(c) => {
                    self.word.push(c);
                    start = 0;
                }
                None => match self.word.pop() {
                    Some(last) => start = last + 1,
                    None => return false,
                },
            }
        }
        true
    }
}

impl Iterator for AdmissibleWords<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let start = if self.started {
            match self.word.pop() {
                Some(last) => last + 1,
                None => {
                    self.done = true;
                    return None;
                }
            }
        } else {
            self.started = true;
            0
        };
        if self.fill(start) {
            Some(Word(self.word.clone()))
        } else {
            self.done = true;
            None
        }
    }
}

/// Every admissible word of length `n`, in lexicographic order.
///
/// Fails with [`Error::CapExceeded`] when `#Σ_{A,n}` is above `cap`.
pub fn enumerate_admissible(spec: &SftSpec, n: usize, cap: u64) -> Result<AdmissibleWords<'_>> {
    let count = count_admissible(spec, n);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    Ok(AdmissibleWords {
        spec,
        n,
        word: Vec::with_capacity(n),
        started: false,
        done: false,
    })
}

/// Topological entropy `log ρ(A)` of a primitive SFT.
pub fn sft_entropy(spec: &SftSpec) -> Result<f64> {
    if spec.primitivity.is_none() {
        return Err(Error::NotPrimitive);
    }
    if spec.is_full_shift() {
        return Ok((spec.k as f64).ln());
    }
    let k = spec.k;
    let mut v = vec![1.0 / k as f64; k];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITER_MAX {
        let mut next = vec![0.0; k];
        for (from, &x) in v.iter().enumerate() {
            for to in spec.successors(from) {
                next[to] += x;
            }
        }
        let norm: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= norm;
        }
        // v is normalized to unit l1 norm, so the new norm is the ratio.
        let converged = (norm - lambda).abs() <= POWER_ITER_TOL * norm;
        lambda = norm;
        v = next;
        if converged {
            break;
        }
    }
    Ok(lambda.ln())
}

/// Distance `e^{−min{n : i_n ≠ j_n}}` between two sequences given by
/// finite prefixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderDistance {
    pub value: f64,
    /// Number of leading symbols the prefixes share.
    pub agreement: usize,
    /// True when no disagreement was seen, so `value` is only the upper
    /// bound `e^{−agreement}`.
    pub upper_bound_only: bool,
}

pub fn cylinder_metric(i: &[usize], j: &[usize]) -> CylinderDistance {
    let common = i.len().min(j.len());
    let first_diff = (0..common).find(|&n| i[n] != j[n]);
    let agreement = first_diff.unwrap_or(common);
    CylinderDistance {
        value: (-(agreement as f64)).exp(),
        agreement,
        upper_bound_only: first_diff.is_none(),
    }
}
