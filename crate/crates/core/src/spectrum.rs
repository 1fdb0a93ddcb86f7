//! Level-set entropy `h(α)` as the Legendre transform of the pressure.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pressure::{
    mean_range, minimize_pressure, MinimizeOptions, MinimizeStatus, PotentialTable, EDGE_REL_TOL,
};
use crate::weights::FrequencyVector;

/// Entropy of a level set. The empty set is a tag, not `-∞` arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entropy {
    Value(f64),
    EmptySet,
}

impl Entropy {
    pub fn value(self) -> Option<f64> {
        match self {
            Entropy::Value(h) => Some(h),
            Entropy::EmptySet => None,
        }
    }

    /// `-inf` for the empty set.
    pub fn to_f64(self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumStatus {
    Interior,
    /// Endpoint of the domain; the entropy is the `|p| → ∞` limit.
    Boundary,
    Outside,
    /// The domain is the single point `α`.
    DegenerateVertex,
}

impl std::fmt::Display for SpectrumStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SpectrumStatus::Interior => "Interior",
            SpectrumStatus::Boundary => "Boundary",
            SpectrumStatus::Outside => "Outside",
            SpectrumStatus::DegenerateVertex => "DegenerateVertex",
        };
        f.write_str(s)
    }
}

/// Joint law `p_{j,i}` of (weight symbol, shift symbol) with weight
/// marginal `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliJoint {
    pub probs: Vec<Vec<f64>>,
}

impl BernoulliJoint {
    /// `−Σ p log p`.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .flatten()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    pub fn marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    /// `Σ_{j,i} p_{j,i} f_{j,i}`.
    pub fn mean(&self, f: &PotentialTable) -> Vec<f64> {
        let mut out = vec![0.0; f.dim()];
        for (j, row) in self.probs.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                for (o, v) in out.iter_mut().zip(f.value(j, i)) {
                    *o += p * v;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub alpha: Vec<f64>,
    pub p_star: Option<Vec<f64>>,
    pub entropy: Entropy,
    pub status: SpectrumStatus,
    pub equilibrium: Option<BernoulliJoint>,
}

pub fn spectrum_at(q: &FrequencyVector, f: &PotentialTable, alpha: &[f64]) -> Result<SpectrumPoint> {
    spectrum_at_with(q, f, alpha, &MinimizeOptions::default())
}

pub fn spectrum_at_with(
    q: &FrequencyVector,
    f: &PotentialTable,
    alpha: &[f64],
    opts: &MinimizeOptions,
) -> Result<SpectrumPoint> {
    let m = minimize_pressure(q, f, alpha, opts)?;
    let point = |p_star, entropy, status, equilibrium| SpectrumPoint {
        alpha: alpha.to_vec(),
        p_star,
        entropy,
        status,
        equilibrium,
    };
    Ok(match m.status {
        MinimizeStatus::Outside => point(None, Entropy::EmptySet, SpectrumStatus::Outside, None),
        MinimizeStatus::Interior => {
            let eq = equilibrium_measure(q, f, &m.p_star, alpha)?;
            let status = if f.dim() == 1 && is_single_point(q, f) {
                SpectrumStatus::DegenerateVertex
            } else {
                SpectrumStatus::Interior
            };
            point(Some(m.p_star), Entropy::Value(m.eval.value), status, Some(eq))
        }
        MinimizeStatus::Boundary => {
            let eq = if f.dim() == 1 {
                Some(boundary_measure(q, f, m.p_star[0] > 0.0))
            } else {
                None
            };
            point(None, Entropy::Value(m.eval.value), SpectrumStatus::Boundary, eq)
        }
    })
}

fn is_single_point(q: &FrequencyVector, f: &PotentialTable) -> bool {
    let (lo, hi) = mean_range(q, f);
    hi - lo <= EDGE_REL_TOL * lo.abs().max(hi.abs()).max(1.0)
}

/// `p_{j,i} = q_j · softmax_i ⟨p*, f_{j,i} − α⟩`.
pub fn equilibrium_measure(
    q: &FrequencyVector,
    f: &PotentialTable,
    p_star: &[f64],
    alpha: &[f64],
) -> Result<BernoulliJoint> {
    if q.len() != f.weight_alphabet() || p_star.len() != f.dim() || alpha.len() != f.dim() {
        return Err(Error::DimensionMismatch("equilibrium inputs disagree with the potential".into()));
    }
    let k = f.shift_alphabet();
    let probs = q
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &qj)| {
            let logits: Vec<f64> = (0..k)
                .map(|i| {
                    f.value(j, i)
                        .iter()
                        .zip(p_star)
                        .zip(alpha)
                        .map(|((v, p), a)| p * (v - a))
                        .sum()
                })
                .collect();
            let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| qj * x / z).collect()
        })
        .collect();
    Ok(BernoulliJoint { probs })
}

/// Limit of the equilibrium as `p → ±∞`: uniform over each row's extremal
/// cells.
fn boundary_measure(q: &FrequencyVector, f: &PotentialTable, upper: bool) -> BernoulliJoint {
    let k = f.shift_alphabet();
    let probs = q
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &qj)| {
            let row: Vec<f64> = (0..k)
                .map(|i| if upper { f.scalar_value(j, i) } else { -f.scalar_value(j, i) })
                .collect();
            let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let tol = EDGE_REL_TOL * top.abs().max(1.0);
            let ties = row.iter().filter(|&&x| x >= top - tol).count() as f64;
            row.iter().map(|&x| if x >= top - tol { qj / ties } else { 0.0 }).collect()
        })
        .collect();
    BernoulliJoint { probs }
}

/// `|H(p*) + Σ q log q − h(α)|` at an interior point.
pub fn duality_gap(q: &FrequencyVector, f: &PotentialTable, alpha: &[f64]) -> Result<f64> {
    let pt = spectrum_at(q, f, alpha)?;
    let (Some(eq), Entropy::Value(h)) = (&pt.equilibrium, pt.entropy) else {
        return Err(Error::Invalid(format!("α is not in the domain (status {})", pt.status)));
    };
    if pt.status != SpectrumStatus::Interior && pt.status != SpectrumStatus::DegenerateVertex {
        return Err(Error::Invalid(format!("duality gap needs an interior point, got {}", pt.status)));
    }
    Ok((eq.entropy() - q.entropy() - h).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
    /// Smallest and largest grid `α` not outside the domain.
    pub domain: Option<(f64, f64)>,
}

pub fn spectrum_curve(q: &FrequencyVector, f: &PotentialTable, alpha_grid: &[f64]) -> Result<SpectrumCurve> {
    spectrum_curve_with(q, f, alpha_grid, true)
}

/// `warm_start = false` solves every point from `p = 0`.
pub fn spectrum_curve_with(
    q: &FrequencyVector,
    f: &PotentialTable,
    alpha_grid: &[f64],
    warm_start: bool,
) -> Result<SpectrumCurve> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch("spectrum curves need a scalar potential".into()));
    }
    if alpha_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Invalid("alpha grid must be sorted".into()));
    }
    let mut opts = MinimizeOptions::default();
    let mut points = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid {
        let pt = spectrum_at_with(q, f, &[a], &opts)?;
        if warm_start {
            opts.warm_start = match (&pt.status, &pt.p_star) {
                (SpectrumStatus::Interior, Some(p)) => Some(p.clone()),
                _ => None,
            };
        }
        points.push(pt);
    }
    let inside: Vec<f64> = points
        .iter()
        .filter(|p| p.status != SpectrumStatus::Outside)
        .map(|p| p.alpha[0])
        .collect();
    let domain = inside.first().map(|&lo| (lo, *inside.last().unwrap()));
    Ok(SpectrumCurve { points, domain })
}

/// `log Σ_{i<N} e^{p i} = log((e^{pN} − 1)/(e^p − 1))` without overflow.
fn log_geometric(n: f64, p: f64) -> f64 {
    if p == 0.0 {
        n.ln()
    } else if p > 0.0 {
        (n - 1.0) * p + (-(-p * n).exp_m1()).ln() - (-(-p).exp_m1()).ln()
    } else {
        (-(p * n).exp_m1()).ln() - (-p.exp_m1()).ln()
    }
}

/// Derivative of [`log_geometric`] in `p`: the mean of the tilted uniform
/// law on `{0, …, N−1}`.
fn log_geometric_prime(n: f64, p: f64) -> f64 {
    if p.abs() < 1e-3 {
        return (n - 1.0) / 2.0 + (n * n - 1.0) / 12.0 * p - (n.powi(4) - 1.0) / 720.0 * p.powi(3);
    }
    if p > 0.0 {
        n / (-(-p * n).exp_m1()) - 1.0 / (-(-p).exp_m1())
    } else {
        // Mirror: mean at −p is (N−1) minus the mean at p.
        (n - 1.0) - log_geometric_prime(n, -p)
    }
}

/// Variance of the tilted uniform law, used only as a Newton slope.
fn log_geometric_second(n: f64, p: f64) -> f64 {
    if p.abs() < 1e-2 {
        return (n * n - 1.0) / 12.0 - (n.powi(4) - 1.0) / 240.0 * p * p;
    }
    let s = (p / 2.0).sinh();
    let t = (p * n / 2.0).sinh();
    1.0 / (4.0 * s * s) - n * n / (4.0 * t * t)
}

/// Closed-form spectrum for Möbius weights `λ = (1, −1, 0)` and digit
/// potential `φ_i = i`, `i < N`. Returns `(h, p)`; at the domain endpoints
/// `p` is `±∞`.
pub fn moebius_digit_spectrum(n: usize, alpha: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Invalid("digit alphabet needs N >= 2".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::Invalid("alpha must be finite".into()));
    }
    let pi2 = PI * PI;
    let nf = n as f64;
    let half = (nf - 1.0) * 3.0 / pi2;
    let edge_tol = EDGE_REL_TOL * half.max(1.0);
    if alpha.abs() > half + edge_tol {
        return Err(Error::OutsideDomain {
            alpha,
            lo: -half,
            hi: half,
        });
    }
    let base = (1.0 - 6.0 / pi2) * nf.ln();
    if (alpha.abs() - half).abs() <= edge_tol {
        return Ok((base, if alpha > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY }));
    }

    // 2 L'(p) − (N − 1) = π² α / 3, with the left side increasing in p.
    let target = pi2 * alpha / 3.0;
    let g = |p: f64| 2.0 * log_geometric_prime(nf, p) - (nf - 1.0) - target;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) > 0.0 {
        lo *= 2.0;
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut p = 0.0f64.clamp(lo, hi);
    for _ in 0..500 {
        let gp = g(p);
        if gp.abs() <= 1e-14 * nf {
            break;
        }
        if gp < 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let slope = 2.0 * log_geometric_second(nf, p);
        let newton = p - gp / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == p || hi - lo <= 1e-15 * p.abs().max(1.0) {
            break;
        }
        p = next;
    }
    let h = base + 6.0 / pi2 * log_geometric(nf, p) - (half + alpha) * p;
    Ok((h, p))
}
