//! Conditional pressure of first-coordinate potentials.
//!
//! For an i.i.d. weight marginal `q` the pressure has the closed form
//!
//! ```text
//! P(p) = Σ_j q_j log Σ_i exp(⟨p, f_{j,i} − α⟩)
//! ```
//!
//! whose gradient is `Σ_j q_j E_{π_j}[f_j − α]` and whose Hessian is
//! `Σ_j q_j Cov_{π_j}(f_j)`, with `π_j(i) ∝ exp⟨p, f_{j,i} − α⟩`. It is
//! convex in `p`, and its infimum over `p` is the spectrum value at `α`.
//!
//! [`log_zn`] evaluates the finite-`n` partition function over a subshift
//! of finite type for a given weight prefix, and [`pressure_estimate`]
//! averages it over sampled weight sequences.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{SftSpec, Word};
use crate::weights::{FrequencyVector, WeightStream};

pub const DEFAULT_GRAD_TOL: f64 = 1e-10;
pub const P_MAX: f64 = 1e3;
pub const DEFAULT_MAX_ITER: usize = 200;

// A minimizer with Hessian eigenvalues below this is treated as sitting at
// infinity (boundary of the domain).
const HESS_FLOOR: f64 = 1e-9;
// Gradient norm that separates a divergent (outside) run from a boundary.
const OUTSIDE_GRAD_FLOOR: f64 = 1e-8;
pub(crate) const EDGE_REL_TOL: f64 = 1e-12;

/// Values `f_{j,i} ∈ R^d` for weight symbol `j` and shift symbol `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub struct PotentialTable {
    n: usize,
    k: usize,
    d: usize,
    values: Vec<f64>,
    factored: Option<Factored>,
}

/// `f_{j,i} = λ_j·φ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factored {
    pub lambda: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PotentialRepr {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(default = "one")]
    d: usize,
    #[serde(default)]
    values: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    factored: Option<Factored>,
}

fn one() -> usize {
    1
}

impl TryFrom<PotentialRepr> for PotentialTable {
    type Error = Error;

    fn try_from(raw: PotentialRepr) -> Result<Self> {
        let table = match (raw.values, raw.factored) {
            (None, None) => return Err(Error::Invalid("potential needs `values` or `factored`".into())),
            (None, Some(fac)) => PotentialTable::factored(fac.lambda, fac.phi)?,
            (Some(values), fac) => {
                let mut t = PotentialTable::dense(raw.d, values)?;
                if let Some(fac) = fac {
                    let from_factors = PotentialTable::factored(fac.lambda, fac.phi)?;
                    let close = from_factors.values.len() == t.values.len()
                        && from_factors
                            .values
                            .iter()
                            .zip(&t.values)
                            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
                    if !close {
                        return Err(Error::Invalid(
                            "dense values disagree with the factored form λ_j·φ_i".into(),
                        ));
                    }
                    t.factored = from_factors.factored;
                }
                t
            }
        };
        if table.n != raw.n || table.k != raw.k || table.d != raw.d {
            return Err(Error::DimensionMismatch(format!(
                "declared N={}, K={}, d={} but data has N={}, K={}, d={}",
                raw.n, raw.k, raw.d, table.n, table.k, table.d
            )));
        }
        Ok(table)
    }
}

impl From<PotentialTable> for PotentialRepr {
    fn from(t: PotentialTable) -> Self {
        let values = (0..t.n)
            .map(|j| (0..t.k).map(|i| t.value(j, i).to_vec()).collect())
            .collect();
        PotentialRepr {
            n: t.n,
            k: t.k,
            d: t.d,
            values: Some(values),
            factored: t.factored,
        }
    }
}

impl PotentialTable {
    /// From nested `values[j][i][c]`.
    pub fn dense(d: usize, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = values.len();
        if n == 0 || d == 0 {
            return Err(Error::Invalid("potential needs N >= 1 and d >= 1".into()));
        }
        let k = values[0].len();
        if k == 0 {
            return Err(Error::Invalid("potential needs K >= 1".into()));
        }
        let mut flat = Vec::with_capacity(n * k * d);
        for row in &values {
            if row.len() != k {
                return Err(Error::DimensionMismatch("ragged potential rows".into()));
            }
            for cell in row {
                if cell.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "potential cell has {} components, d = {d}",
                        cell.len()
                    )));
                }
                flat.extend_from_slice(cell);
            }
        }
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("potential entries must be finite".into()));
        }
        Ok(PotentialTable {
            n,
            k,
            d,
            values: flat,
            factored: None,
        })
    }

    /// Scalar potential from `rows[j][i]`.
    pub fn scalar(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::dense(1, rows.into_iter().map(|r| r.into_iter().map(|x| vec![x]).collect()).collect())
    }

    pub fn factored(lambda: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let rows = lambda
            .iter()
            .map(|&l| phi.iter().map(|&p| l * p).collect())
            .collect();
        let mut t = Self::scalar(rows)?;
        t.factored = Some(Factored { lambda, phi });
        Ok(t)
    }

    pub fn weight_alphabet(&self) -> usize {
        self.n
    }

    pub fn shift_alphabet(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn factors(&self) -> Option<&Factored> {
        self.factored.as_ref()
    }

    pub fn value(&self, j: usize, i: usize) -> &[f64] {
        let at = (j * self.k + i) * self.d;
        &self.values[at..at + self.d]
    }

    /// Scalar value; panics unless `d = 1`.
    pub fn scalar_value(&self, j: usize, i: usize) -> f64 {
        assert_eq!(self.d, 1, "scalar access on a vector potential");
        self.values[j * self.k + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn exponent(&self, j: usize, i: usize, p: &[f64], alpha: &[f64]) -> f64 {
        self.value(j, i)
            .iter()
            .zip(p)
            .zip(alpha)
            .map(|((f, p), a)| p * (f - a))
            .sum()
    }
}

/// Value, gradient and Hessian of the pressure at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

impl PressureEval {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

fn check_dims(q: &FrequencyVector, f: &PotentialTable, p: &[f64], alpha: &[f64]) -> Result<()> {
    if q.len() != f.n {
        return Err(Error::DimensionMismatch(format!(
            "q has {} entries, potential has N = {}",
            q.len(),
            f.n
        )));
    }
    if p.len() != f.d || alpha.len() != f.d {
        return Err(Error::DimensionMismatch(format!(
            "p has {} and alpha has {} components, potential has d = {}",
            p.len(),
            alpha.len(),
            f.d
        )));
    }
    Ok(())
}

/// Closed-form pressure with log-sum-exp stabilization.
pub fn pressure_iid(q: &FrequencyVector, f: &PotentialTable, p: &[f64], alpha: &[f64]) -> Result<PressureEval> {
    check_dims(q, f, p, alpha)?;
    Ok(pressure_unchecked(q, f, p, alpha))
}

fn pressure_unchecked(q: &FrequencyVector, f: &PotentialTable, p: &[f64], alpha: &[f64]) -> PressureEval {
    let (k, d) = (f.k, f.d);
    let mut value = 0.0;
    let mut gradient = vec![0.0; d];
    let mut hessian = vec![vec![0.0; d]; d];
    let mut weights = vec![0.0; k];
    let mut mean = vec![0.0; d];
    for (j, &qj) in q.as_slice().iter().enumerate() {
        if qj == 0.0 {
            continue;
        }
        let mut top = f64::NEG_INFINITY;
        for (i, w) in weights.iter_mut().enumerate() {
            *w = f.exponent(j, i, p, alpha);
            top = top.max(*w);
        }
        let mut z = 0.0;
        for w in weights.iter_mut() {
            *w = (*w - top).exp();
            z += *w;
        }
        value += qj * (top + z.ln());

        mean.iter_mut().for_each(|m| *m = 0.0);
        for (i, w) in weights.iter_mut().enumerate() {
            *w /= z;
            for (m, fv) in mean.iter_mut().zip(f.value(j, i)) {
                *m += *w * fv;
            }
        }
        for c in 0..d {
            gradient[c] += qj * (mean[c] - alpha[c]);
        }
        for (i, &w) in weights.iter().enumerate() {
            let fv = f.value(j, i);
            for a in 0..d {
                let da = fv[a] - mean[a];
                for b in 0..=a {
                    hessian[a][b] += qj * w * da * (fv[b] - mean[b]);
                }
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            hessian[b][a] = hessian[a][b];
        }
    }
    PressureEval {
        value,
        gradient,
        hessian,
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub grad_tol: f64,
    pub p_max: f64,
    pub max_iter: usize,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            grad_tol: DEFAULT_GRAD_TOL,
            p_max: P_MAX,
            max_iter: DEFAULT_MAX_ITER,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimizeStatus {
    /// A finite minimizer with vanishing gradient.
    Interior,
    /// `α` on the edge of the domain: the infimum is approached as
    /// `‖p‖ → ∞` and stays finite.
    Boundary,
    /// `α` outside the domain: the pressure decreases without bound.
    Outside,
}

#[derive(Debug, Clone)]
pub struct Minimizer {
    /// For `Interior` the minimizer; otherwise the last iterate, whose norm
    /// is at or beyond `p_max`.
    pub p_star: Vec<f64>,
    /// For `Boundary` this is the limiting value with zero derivatives.
    pub eval: PressureEval,
    pub status: MinimizeStatus,
    pub iterations: usize,
}

/// Range of achievable means `[Σ_j q_j min_i f_{j,i}, Σ_j q_j max_i f_{j,i}]`
/// for a scalar table. Panics unless `d = 1`.
pub fn mean_range(q: &FrequencyVector, f: &PotentialTable) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (j, &qj) in q.as_slice().iter().enumerate() {
        if qj == 0.0 {
            continue;
        }
        let row = (0..f.k).map(|i| f.scalar_value(j, i));
        let (mn, mx) = row.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        lo += qj * mn;
        hi += qj * mx;
    }
    (lo, hi)
}

/// `inf_p P(p)` over `p ∈ R^d`.
///
/// Scalar potentials use a bracketed Newton iteration on `P'` after the
/// domain edges are located in closed form; vector potentials use damped
/// Newton with a Cholesky solve and diagonal regularization.
pub fn minimize_pressure(
    q: &FrequencyVector,
    f: &PotentialTable,
    alpha: &[f64],
    opts: &MinimizeOptions,
) -> Result<Minimizer> {
    let zero = vec![0.0; f.d];
    check_dims(q, f, &zero, alpha)?;
    if let Some(w) = &opts.warm_start {
        if w.len() != f.d {
            return Err(Error::DimensionMismatch("warm start has the wrong dimension".into()));
        }
    }
    if f.d == 1 {
        minimize_scalar(q, f, alpha[0], opts)
    } else {
        minimize_newton(q, f, alpha, opts)
    }
}

fn minimize_scalar(q: &FrequencyVector, f: &PotentialTable, alpha: f64, opts: &MinimizeOptions) -> Result<Minimizer> {
    let (lo, hi) = mean_range(q, f);
    let edge_tol = EDGE_REL_TOL * lo.abs().max(hi.abs()).max(1.0);
    let eval_at = |p: f64| pressure_unchecked(q, f, &[p], &[alpha]);
    let finish = |p: f64, eval: PressureEval, status, iterations| Minimizer {
        p_star: vec![p],
        eval,
        status,
        iterations,
    };

    if hi - lo <= edge_tol {
        // Every active row is constant: P(p) = log K + p·(lo − α).
        return Ok(if (alpha - lo).abs() <= edge_tol {
            finish(0.0, eval_at(0.0), MinimizeStatus::Interior, 0)
        } else {
            let p = if alpha > lo { -opts.p_max } else { opts.p_max };
            finish(p, eval_at(p), MinimizeStatus::Outside, 0)
        });
    }
    if alpha < lo - edge_tol {
        return Ok(finish(-opts.p_max, eval_at(-opts.p_max), MinimizeStatus::Outside, 0));
    }
    if alpha > hi + edge_tol {
        return Ok(finish(opts.p_max, eval_at(opts.p_max), MinimizeStatus::Outside, 0));
    }
    let boundary = |upper: bool| {
        let p = if upper { opts.p_max } else { -opts.p_max };
        let eval = PressureEval {
            value: boundary_value(q, f, upper),
            gradient: vec![0.0],
            hessian: vec![vec![0.0]],
        };
        finish(p, eval, MinimizeStatus::Boundary, 0)
    };
    if (alpha - hi).abs() <= edge_tol {
        return Ok(boundary(true));
    }
    if (alpha - lo).abs() <= edge_tol {
        return Ok(boundary(false));
    }

    // Bracket the root of the increasing function P'.
    let start = opts.warm_start.as_ref().map_or(0.0, |w| w[0]).clamp(-opts.p_max, opts.p_max);
    let mut p = start;
    let mut e = eval_at(p);
    let (mut a, mut b);
    let mut step = 1.0;
    if e.gradient[0] < 0.0 {
        a = p;
        loop {
            b = (a + step).min(opts.p_max);
            if eval_at(b).gradient[0] >= 0.0 {
                break;
            }
            if b >= opts.p_max {
                return Ok(boundary(true));
            }
            a = b;
            step *= 2.0;
        }
    } else {
        b = p;
        loop {
            a = (b - step).max(-opts.p_max);
            if eval_at(a).gradient[0] <= 0.0 {
                break;
            }
            if a <= -opts.p_max {
                return Ok(boundary(false));
            }
            b = a;
            step *= 2.0;
        }
    }

    for it in 0..opts.max_iter {
        let g = e.gradient[0];
        if g.abs() <= opts.grad_tol {
            return Ok(finish(p, e, MinimizeStatus::Interior, it));
        }
        if g < 0.0 {
            a = p;
        } else {
            b = p;
        }
        let h = e.hessian[0][0];
        let newton = p - g / h;
        let next = if h > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == p || b - a <= 4.0 * f64::EPSILON * p.abs().max(1.0) {
            // Bracket collapsed to adjacent doubles: the root is resolved.
            return Ok(finish(p, e, MinimizeStatus::Interior, it));
        }
        p = next;
        e = eval_at(p);
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        best: vec![p],
        value: e.value,
        grad_norm: e.grad_norm(),
    })
}

/// Limit of `P(p)` as `p → ±∞` when `α` sits at the matching domain edge:
/// `Σ_j q_j log #(arg max_i ±f_{j,i})`.
pub fn boundary_value(q: &FrequencyVector, f: &PotentialTable, upper: bool) -> f64 {
    let mut total = 0.0;
    for (j, &qj) in q.as_slice().iter().enumerate() {
        if qj == 0.0 {
            continue;
        }
        let row: Vec<f64> = (0..f.k)
            .map(|i| if upper { f.scalar_value(j, i) } else { -f.scalar_value(j, i) })
            .collect();
        let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = EDGE_REL_TOL * top.abs().max(1.0);
        let ties = row.iter().filter(|&&x| x >= top - tol).count();
        total += qj * (ties as f64).ln();
    }
    total
}

fn to_matrix(h: &[Vec<f64>]) -> DMatrix<f64> {
    let d = h.len();
    DMatrix::from_fn(d, d, |a, b| h[a][b])
}

fn min_eigenvalue(h: &[Vec<f64>]) -> f64 {
    to_matrix(h).symmetric_eigenvalues().min()
}

fn newton_direction(e: &PressureEval) -> DVector<f64> {
    let h = to_matrix(&e.hessian);
    let g = DVector::from_row_slice(&e.gradient);
    if let Some(chol) = h.clone().cholesky() {
        return -chol.solve(&g);
    }
    // Gershgorin lower bound on the spectrum decides the shift.
    let d = h.nrows();
    let gersh = (0..d)
        .map(|a| h[(a, a)] - (0..d).filter(|&b| b != a).map(|b| h[(a, b)].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let mut eta = (1e-12 - gersh).max(1e-12);
    loop {
        let shifted = &h + DMatrix::identity(d, d) * eta;
        if let Some(chol) = shifted.cholesky() {
            return -chol.solve(&g);
        }
        eta *= 10.0;
    }
}

fn minimize_newton(q: &FrequencyVector, f: &PotentialTable, alpha: &[f64], opts: &MinimizeOptions) -> Result<Minimizer> {
    let d = f.d;
    let mut p = DVector::from_vec(opts.warm_start.clone().unwrap_or_else(|| vec![0.0; d]));
    let eval_at = |p: &DVector<f64>| pressure_unchecked(q, f, p.as_slice(), alpha);
    let mut e = eval_at(&p);
    let mut recent_grads: Vec<f64> = Vec::new();

    for it in 0..opts.max_iter {
        let gnorm = e.grad_norm();
        recent_grads.push(gnorm);
        if recent_grads.len() > 10 {
            recent_grads.remove(0);
        }
        if gnorm <= opts.grad_tol {
            let status = if min_eigenvalue(&e.hessian) >= HESS_FLOOR {
                MinimizeStatus::Interior
            } else {
                MinimizeStatus::Boundary
            };
            return Ok(Minimizer {
                p_star: p.as_slice().to_vec(),
                eval: e,
                status,
                iterations: it,
            });
        }
        if p.norm() > opts.p_max {
            let floor = recent_grads.iter().cloned().fold(f64::INFINITY, f64::min);
            let status = if floor >= OUTSIDE_GRAD_FLOOR {
                MinimizeStatus::Outside
            } else {
                MinimizeStatus::Boundary
            };
            return Ok(Minimizer {
                p_star: p.as_slice().to_vec(),
                eval: e,
                status,
                iterations: it,
            });
        }

        let dir = newton_direction(&e);
        let g = DVector::from_row_slice(&e.gradient);
        let slope = g.dot(&dir);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &p + &dir * t;
            let te = eval_at(&trial);
            if te.value <= e.value + 1e-4 * t * slope {
                accepted = Some((trial, te));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((np, ne)) => {
                p = np;
                e = ne;
            }
            None => {
                // No decrease possible at double precision.
                let status = if min_eigenvalue(&e.hessian) >= HESS_FLOOR && gnorm <= 1e3 * opts.grad_tol {
                    MinimizeStatus::Interior
                } else {
                    return Err(Error::MaxIterations {
                        iterations: it,
                        best: p.as_slice().to_vec(),
                        value: e.value,
                        grad_norm: gnorm,
                    });
                };
                return Ok(Minimizer {
                    p_star: p.as_slice().to_vec(),
                    eval: e,
                    status,
                    iterations: it,
                });
            }
        }
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        best: p.as_slice().to_vec(),
        value: e.value,
        grad_norm: e.grad_norm(),
    })
}

/// The domain interval of the factored potential `λ_j·φ_i`:
/// `[φ_min Σ⁺ + φ_max Σ⁻, φ_max Σ⁺ + φ_min Σ⁻]` with
/// `Σ^± = Σ_{±λ_j > 0} q_j λ_j`.
pub fn domain_interval(q: &FrequencyVector, lambda: &[f64], phi: &[f64]) -> Result<(f64, f64)> {
    if q.len() != lambda.len() {
        return Err(Error::DimensionMismatch(format!(
            "q has {} entries, lambda has {}",
            q.len(),
            lambda.len()
        )));
    }
    if phi.is_empty() {
        return Err(Error::Invalid("phi is empty".into()));
    }
    let phi_max = phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let phi_min = phi.iter().cloned().fold(f64::INFINITY, f64::min);
    if phi_max == phi_min {
        return Err(Error::DegeneratePotential);
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for (&qj, &lj) in q.as_slice().iter().zip(lambda) {
        if lj > 0.0 {
            pos += qj * lj;
        } else if lj < 0.0 {
            neg += qj * lj;
        }
    }
    Ok((phi_min * pos + phi_max * neg, phi_max * pos + phi_min * neg))
}

/// `log Z_n(f, w)` over `Σ_{A,n}` by a forward transfer-matrix pass with
/// per-step renormalization.
pub fn log_zn(
    spec: &SftSpec,
    f: &PotentialTable,
    p: &[f64],
    alpha: &[f64],
    w_prefix: &Word,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Invalid("word length must be positive".into()));
    }
    if w_prefix.len() < n {
        return Err(Error::PrefixTooShort {
            required: n,
            available: w_prefix.len(),
        });
    }
    if spec.alphabet_size() != f.k {
        return Err(Error::DimensionMismatch(format!(
            "SFT alphabet {} differs from potential K = {}",
            spec.alphabet_size(),
            f.k
        )));
    }
    if p.len() != f.d || alpha.len() != f.d {
        return Err(Error::DimensionMismatch("p and alpha must have d components".into()));
    }
    if let Some(&bad) = w_prefix.symbols()[..n].iter().find(|&&s| s >= f.n) {
        return Err(Error::Invalid(format!("weight symbol {bad} out of range for N = {}", f.n)));
    }

    let k = f.k;
    let w = w_prefix.symbols();
    let mut g = vec![0.0; k];
    let local = |j: usize, g: &mut [f64]| -> f64 {
        let mut top = f64::NEG_INFINITY;
        for (i, x) in g.iter_mut().enumerate() {
            *x = f.exponent(j, i, p, alpha);
            top = top.max(*x);
        }
        for x in g.iter_mut() {
            *x = (*x - top).exp();
        }
        top
    };

    let mut log_scale = local(w[0], &mut g);
    let mut v = g.clone();
    let mut next = vec![0.0; k];
    for &wk in &w[1..n] {
        log_scale += local(wk, &mut g);
        next.iter_mut().for_each(|x| *x = 0.0);
        for (from, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for to in spec.successors(from) {
                next[to] += mass;
            }
        }
        let mut top: f64 = 0.0;
        for (x, &gi) in next.iter_mut().zip(&g) {
            *x *= gi;
            top = top.max(*x);
        }
        if top == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        for x in next.iter_mut() {
            *x /= top;
        }
        log_scale += top.ln();
        std::mem::swap(&mut v, &mut next);
    }
    Ok(log_scale + v.iter().sum::<f64>().ln())
}

/// Monte-Carlo estimate of `lim (1/n) ∫ log Z_n dν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Averages `(1/n)·log Z_n` over `samples` independent draws of `nu`.
///
/// Draw `s` uses `nu` reseeded with `seed` on ChaCha stream `s`, so the
/// result depends only on the arguments.
#[allow(clippy::too_many_arguments)]
pub fn pressure_estimate(
    spec: &SftSpec,
    f: &PotentialTable,
    p: &[f64],
    alpha: &[f64],
    nu: &WeightStream,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<PressureEstimate> {
    if !nu.is_sampled() {
        return Err(Error::Invalid("pressure_estimate needs a Bernoulli or Markov sampler".into()));
    }
    if samples == 0 || n == 0 {
        return Err(Error::Invalid("n and samples must be positive".into()));
    }
    let base = nu.reseeded(seed);
    let draws: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let w = base.resampled(s).word(n)?;
            Ok(log_zn(spec, f, p, alpha, &w, n)? / n as f64)
        })
        .collect::<Result<_>>()?;
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let stderr = if draws.len() > 1 {
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(PressureEstimate {
        n,
        samples,
        mean,
        stderr,
    })
}
