//! Generalized continued fractions built from `g_alpha(z) = 1/((1 + 1/z)^alpha - 1)`,
//! the coordinate change `theta` from the shift to `[0, 2^beta - 1]`, its greedy
//! inverse, and the solver for the parameter constraints linking `alpha`, `beta`
//! and `a`.

use std::cmp::Ordering;

use log::warn;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::word::{Block, RunLengthWord, Tail};

/// Default truncation depth.
pub const DEFAULT_DEPTH: usize = 40;
/// Relative remainder below which [`digit_extract`] stops.
pub const REMAINDER_TOL: f64 = 1e-14;
/// Tolerance on both constraint residuals.
pub const RESIDUAL_TOL: f64 = 1e-10;

const BISECTION_STEPS: usize = 200;
const BETA_FLOOR: f64 = 1e-6;

/// `g_alpha(z)`; `g_alpha(0) = 0` and `g_alpha(inf) = inf` by continuity.
pub fn g_alpha(alpha: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    if z.is_infinite() {
        return f64::INFINITY;
    }
    1.0 / (alpha * (1.0 / z).ln_1p()).exp_m1()
}

/// Real inverse of `g_alpha`.
pub fn g_alpha_inverse(alpha: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    1.0 / ((1.0 / y).ln_1p() / alpha).exp_m1()
}

fn check_exponent(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("exponent {alpha} must be positive"));
    }
    Ok(())
}

/// Second differences `g(n+2) - 2 g(n+1) + g(n)` for `n = 1..=nmax`.
pub fn g_convexity_witness(alpha: f64, nmax: u64) -> Result<Vec<f64>> {
    check_exponent(alpha)?;
    if nmax < 3 {
        return domain("nmax must be at least 3");
    }
    Ok((1..=nmax)
        .map(|n| {
            let g = |k: u64| g_alpha(alpha, k as f64);
            g(n + 2) - 2.0 * g(n + 1) + g(n)
        })
        .collect())
}

/// Signs of `values`, with magnitudes up to `tol` reported as equal to zero.
pub fn sign_pattern(values: &[f64], tol: f64) -> Vec<Ordering> {
    values
        .iter()
        .map(|&v| {
            if v.abs() <= tol {
                Ordering::Equal
            } else if v > 0.0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        })
        .collect()
}

/// Parameters `(alpha, beta, a)` of the coordinate change and the Mobius
/// coefficients of the induced map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFParams {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    /// `S - ((1 + 1/(a+1))^alpha - 1)`.
    pub residual1: f64,
    /// `1/alpha - (2^beta - 1)`.
    pub residual2: f64,
    /// Left coefficient `c = -((1 + 1/(a+1))^alpha - 1)`.
    pub c: f64,
    /// Right coefficient, once fitted.
    pub d: Option<f64>,
}

impl CFParams {
    /// `alpha = beta = 1`, `a = 0`: the classical continued fraction.
    pub fn classical() -> Self {
        solve_params(1.0).expect("beta = 1 is admissible")
    }

    /// Upper end `2^beta - 1` of the interval.
    pub fn upper(&self) -> f64 {
        (self.beta * std::f64::consts::LN_2).exp_m1()
    }

    /// Discontinuity `(3/2)^beta - 1` of the induced map.
    pub fn split(&self) -> f64 {
        (self.beta * 1.5f64.ln()).exp_m1()
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = Some(d);
        self
    }
}

/// `1/((3/2)^beta - 1) - 1/(2^beta - 1)`.
fn s_of_beta(beta: f64) -> f64 {
    1.0 / (beta * 1.5f64.ln()).exp_m1() - 1.0 / (beta * std::f64::consts::LN_2).exp_m1()
}

/// Solves the constraint system for `alpha` and `a` given `beta`.
pub fn solve_params(beta: f64) -> Result<CFParams> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta = {beta} outside (0, 1]"));
    }
    let two_b = (beta * std::f64::consts::LN_2).exp_m1();
    let alpha = 1.0 / two_b;
    let s = s_of_beta(beta);
    let a = a_of_beta(beta);
    let lhs = (alpha * (1.0 / (a + 1.0)).ln_1p()).exp_m1();
    let residual1 = s - lhs;
    let residual2 = 1.0 / alpha - two_b;
    if residual1.abs() > RESIDUAL_TOL || residual2.abs() > RESIDUAL_TOL {
        return Err(Error::Solver {
            r1: residual1,
            r2: residual2,
        });
    }
    Ok(CFParams {
        alpha,
        beta,
        a,
        residual1,
        residual2,
        c: -lhs,
        d: None,
    })
}

/// `a(beta)` solving `g_alpha(a + 1) = 1/S` with `alpha = 1/(2^beta - 1)`, unchecked.
pub fn a_of_beta(beta: f64) -> f64 {
    let alpha = 1.0 / (beta * std::f64::consts::LN_2).exp_m1();
    g_alpha_inverse(alpha, 1.0 / s_of_beta(beta)) - 1.0
}

/// `a(beta)` from the closed form `1/((1/S + 1)^(2^beta - 1) - 1) - 1` as printed
/// alongside the monotonicity statement. It agrees with [`solve_params`] only at
/// `beta = 1`.
pub fn a_of_beta_printed(beta: f64) -> f64 {
    let s = s_of_beta(beta);
    let e = (beta * std::f64::consts::LN_2).exp_m1();
    1.0 / (e * (1.0 / s).ln_1p()).exp_m1() - 1.0
}

/// Finds `beta` with `a(beta) = a` by bisection, `a(beta)` being decreasing.
pub fn solve_beta_for_integer_a(a: u64) -> Result<CFParams> {
    solve_beta_for_a(a as f64)
}

pub fn solve_beta_for_a(a: f64) -> Result<CFParams> {
    if !(a >= 0.0 && a.is_finite()) {
        return domain(format!("a = {a} must be non-negative"));
    }
    if a == 0.0 {
        return solve_params(1.0);
    }
    let (mut lo, mut hi) = (BETA_FLOOR, 1.0);
    if a_of_beta(lo) < a {
        return Err(Error::Bracket(format!("a({lo}) is below the target {a}")));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a_of_beta(mid) > a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (a_of_beta(lo) - a).abs() <= (a_of_beta(hi) - a).abs() {
        solve_params(lo)?
    } else {
        solve_params(hi)?
    };
    if (best.a - a).abs() > RESIDUAL_TOL {
        return Err(Error::Bracket(format!(
            "bisection ended at a = {} for target {a}",
            best.a
        )));
    }
    Ok(best)
}

/// Floating-point convergents of `[0; a_1, a_2, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergents {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

impl Convergents {
    /// `u_k = p_{k+1} q_k - p_k q_{k+1}`.
    pub fn determinants(&self) -> Vec<f64> {
        (0..self.p.len().saturating_sub(1))
            .map(|k| self.p[k + 1] * self.q[k] - self.p[k] * self.q[k + 1])
            .collect()
    }
}

/// Convergents `p_0..p_K`, `q_0..q_K` of the first `k` partial quotients.
pub fn convergents(seq: &[f64], k: usize) -> Result<Convergents> {
    if k > seq.len() {
        return domain(format!("{k} quotients requested, {} given", seq.len()));
    }
    if let Some(bad) = seq[..k].iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return domain(format!(
            "partial quotient {bad} must be positive and finite"
        ));
    }
    for (i, &x) in seq[..k].iter().enumerate() {
        if i % 2 == 0 && x < 1.0 {
            warn!("odd-position quotient a_{} = {x} is below 1", i + 1);
        }
    }
    let (mut p, mut q) = (vec![0.0], vec![1.0]);
    let (mut pm, mut qm) = (1.0, 0.0);
    for &x in &seq[..k] {
        let (pk, qk) = (*p.last().unwrap(), *q.last().unwrap());
        p.push(x * pk + pm);
        q.push(x * qk + qm);
        pm = pk;
        qm = qk;
    }
    let r = p.iter().zip(&q).map(|(a, b)| a / b).collect();
    Ok(Convergents { p, q, r })
}

/// Exact numerators and denominators for rational partial quotients.
pub fn convergents_exact(seq: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let (mut p, mut q) = (vec![BigRational::zero()], vec![BigRational::one()]);
    let (mut pm, mut qm) = (BigRational::one(), BigRational::zero());
    for x in seq {
        let (pk, qk) = (p.last().unwrap().clone(), q.last().unwrap().clone());
        p.push(x * &pk + &pm);
        q.push(x * &qk + &qm);
        pm = pk;
        qm = qk;
    }
    (p, q)
}

/// A partial quotient; an infinite one ends the fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quotient {
    Finite(f64),
    Infinite,
}

/// A truncated continued fraction value with a certified error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosed {
    pub value: f64,
    /// Truncation bound `|r_K - r_{K-1}|` plus a rounding allowance.
    pub bound: f64,
    /// `|r_m - r_{m-1}|` for the `m` finite quotients consumed: the width of the
    /// enclosure if the fraction were to continue.
    pub gap: f64,
    /// Number of finite quotients consumed.
    pub depth: usize,
    /// Whether an infinite quotient ended the fraction.
    pub exact: bool,
}

const RESCALE: f64 = 1e100;

/// Evaluates `[0; q_1, q_2, ...]` through at most `k` quotients.
///
/// The recurrence is rescaled whenever denominators grow large; the truncation
/// bound `1/(q_K q_{K-1})` is tracked in log form.
pub fn evaluate(quotients: impl IntoIterator<Item = Quotient>, k: usize) -> Enclosed {
    let (mut p, mut q) = (0.0f64, 1.0f64);
    let (mut pm, mut qm) = (1.0f64, 0.0f64);
    let mut log_scale = 0.0f64;
    let mut depth = 0;
    let mut exact = false;
    for quot in quotients.into_iter().take(k) {
        match quot {
            Quotient::Infinite => {
                exact = true;
                break;
            }
            Quotient::Finite(x) => {
                let (np, nq) = (x * p + pm, x * q + qm);
                pm = p;
                qm = q;
                p = np;
                q = nq;
                depth += 1;
                if q > RESCALE {
                    p /= RESCALE;
                    q /= RESCALE;
                    pm /= RESCALE;
                    qm /= RESCALE;
                    log_scale += RESCALE.ln();
                }
            }
        }
    }
    if depth < k && !exact {
        // the stream ran out: treat as terminated
        exact = true;
    }
    let value = p / q;
    let rounding = 4.0 * (depth as f64 + 1.0) * f64::EPSILON * value.abs();
    let gap = if depth == 0 {
        f64::INFINITY
    } else {
        (-(q.ln() + qm.ln() + 2.0 * log_scale)).exp()
    };
    Enclosed {
        value,
        bound: if exact { rounding } else { gap + rounding },
        gap,
        depth,
        exact,
    }
}

/// Partial quotients `g_beta(n0 + 1), g_alpha(n1 + a), g_beta(n2), g_alpha(n3 + a), ...`.
pub fn theta_quotients<'a>(
    params: &'a CFParams,
    w: &'a RunLengthWord,
) -> impl Iterator<Item = Quotient> + 'a {
    w.block_iter()
        .enumerate()
        .map(move |(i, b)| block_quotient(params, i, b, 0))
}

/// Quotient for block `i`, with `shift` subtracted from the block length.
pub(crate) fn block_quotient(params: &CFParams, i: usize, b: Block, shift: u64) -> Quotient {
    match b {
        Block::Infinite => Quotient::Infinite,
        Block::Finite(n) => {
            let n = (n - shift) as f64;
            Quotient::Finite(if i == 0 {
                g_alpha(params.beta, n + 1.0)
            } else if i % 2 == 1 {
                g_alpha(params.alpha, n + params.a)
            } else {
                g_alpha(params.beta, n)
            })
        }
    }
}

/// `theta_{alpha,beta,a}(w)` truncated at `k` quotients.
pub fn theta(params: &CFParams, w: &RunLengthWord, k: usize) -> Enclosed {
    evaluate(theta_quotients(params, w), k)
}

/// `1/x - g_e(floor(g_e^{-1}(1/x)))`, the remainder map of the expansion.
pub fn gauss_phi(exponent: f64, x: f64) -> Result<f64> {
    check_exponent(exponent)?;
    let upper = (exponent * std::f64::consts::LN_2).exp_m1();
    if !(x > 0.0 && x <= upper) {
        return domain(format!("x = {x} outside (0, {upper}]"));
    }
    let y = 1.0 / x;
    let n = digit(exponent, 0.0, y, 0)?;
    Ok(y - g_alpha(exponent, n as f64))
}

/// Largest integer `n >= lo` with `g_e(n + offset) <= y`.
fn digit(e: f64, offset: f64, y: f64, lo: u64) -> Result<u64> {
    let z = g_alpha_inverse(e, y) - offset;
    if !(z < 9.0e15) {
        return Err(Error::Resource(format!("digit for y = {y} exceeds 2^53")));
    }
    let g = |n: u64| g_alpha(e, n as f64 + offset);
    let mut n = (z.floor().max(0.0) as u64).max(lo);
    while n > lo && g(n) > y {
        n -= 1;
    }
    while g(n + 1) <= y {
        n += 1;
    }
    Ok(n)
}

/// Greedy expansion of `x` into at most `k` blocks.
///
/// A remainder at or below `1e-14 * max(1, y)` ends the word with an infinite block.
/// A value lying within that tolerance below `g(n + 1)` takes the digit `n + 1`
/// with zero remainder, so exact ties resolve to the finite expansion.
/// Without termination the word gets an infinite block after the `k` extracted
/// ones, so its `theta` equals the `k`-th convergent.
pub fn digit_extract(params: &CFParams, x: f64, k: usize) -> Result<RunLengthWord> {
    expand(params, x, k).map(|e| e.word)
}

/// Result of [`expand`].
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub word: RunLengthWord,
    /// Whether a zero remainder ended the expansion before `k` blocks.
    pub terminated: bool,
}

/// [`digit_extract`], also reporting whether the expansion is finite.
pub fn expand(params: &CFParams, x: f64, k: usize) -> Result<Expansion> {
    let upper = params.upper();
    if !(0.0..=upper * (1.0 + 4.0 * f64::EPSILON)).contains(&x) {
        return domain(format!("x = {x} outside [0, {upper}]"));
    }
    if k == 0 {
        return domain("at least one block is needed");
    }
    if x == 0.0 || 1.0 / x > 9.0e15 {
        return Ok(Expansion {
            word: RunLengthWord::zeros(),
            terminated: true,
        });
    }
    let mut blocks = Vec::with_capacity(k);
    let mut y = 1.0 / x;
    for i in 0..k {
        let (e, offset, lo) = if i == 0 {
            (params.beta, 1.0, 0)
        } else if i % 2 == 1 {
            (params.alpha, params.a, 1)
        } else {
            (params.beta, 0.0, 1)
        };
        let g = |n: u64| g_alpha(e, n as f64 + offset);
        let tol = REMAINDER_TOL * y.max(1.0);
        let mut n = digit(e, offset, y, lo)?;
        if g(n + 1) - y <= tol {
            n += 1;
        }
        let r = y - g(n);
        blocks.push(n);
        if r <= tol {
            // next quotient infinite: its block type is that of index i + 1
            let tail = if i % 2 == 0 {
                Tail::AllOnes
            } else {
                Tail::AllZeros
            };
            return Ok(Expansion {
                word: RunLengthWord::new(blocks, tail)?,
                terminated: true,
            });
        }
        y = 1.0 / r;
    }
    let tail = if (k - 1).is_multiple_of(2) {
        Tail::AllOnes
    } else {
        Tail::AllZeros
    };
    Ok(Expansion {
        word: RunLengthWord::new(blocks, tail)?,
        terminated: false,
    })
}
