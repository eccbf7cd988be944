//! The interval map `f_beta = theta o sigma o theta^{-1}` on `[0, 2^beta - 1]`,
//! its Mobius branches, and transport of potentials through a conjugacy.

use crate::cf::{self, block_quotient, CFParams, Enclosed, Quotient};
use crate::error::{domain, Error, Result};
use crate::word::{Block, RunLengthWord};

/// One branch of the induced map in Mobius form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobiusKind {
    /// `x / (1 + c x)`.
    Left { c: f64 },
    /// `(d + (1 - d) x) / (1 + d - d x)`.
    Right { d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusBranch {
    pub kind: MobiusKind,
    pub domain: (f64, f64),
}

impl MobiusBranch {
    pub fn left(params: &CFParams) -> Self {
        Self {
            kind: MobiusKind::Left { c: params.c },
            domain: (0.0, params.split()),
        }
    }

    pub fn right(params: &CFParams, d: f64) -> Self {
        Self {
            kind: MobiusKind::Right { d },
            domain: (params.split(), params.upper()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            MobiusKind::Left { c } => x / (1.0 + c * x),
            MobiusKind::Right { d } => (d + (1.0 - d) * x) / (1.0 + d - d * x),
        }
    }
}

/// `f_beta(theta(w))` from the three-case formulas on the blocks of `w`:
/// `n0 > 0` lowers the first quotient to `g_beta(n0)`; `n0 = 0, n1 > 1` gives
/// `g_beta(1), g_alpha(n1 + a - 1)`; `n0 = 0, n1 = 1` restarts at block 2 with
/// `g_beta(n2 + 1)`.
pub fn fbeta_eval_symbolic(params: &CFParams, w: &RunLengthWord, k: usize) -> Enclosed {
    let blocks = w.block_iter();
    match (w.block(0), w.block(1)) {
        (Some(Block::Infinite), _) => cf::evaluate([Quotient::Infinite], k),
        (Some(Block::Finite(n0)), _) if n0 > 0 => cf::evaluate(
            blocks
                .enumerate()
                .map(|(i, b)| block_quotient(params, i, b, u64::from(i == 0))),
            k,
        ),
        (_, Some(Block::Finite(1))) => cf::evaluate(
            blocks
                .skip(2)
                .enumerate()
                .map(|(i, b)| block_quotient(params, i, b, 0)),
            k,
        ),
        _ => cf::evaluate(
            blocks
                .enumerate()
                .map(|(i, b)| block_quotient(params, i, b, u64::from(i == 1))),
            k,
        ),
    }
}

/// `f_beta(x)` via `digit_extract`, the symbolic shift and `theta`.
///
/// When the expansion of `x` was cut at `k` blocks, the bound is the width of
/// the enclosure of the shifted fraction.
pub fn fbeta_eval_point(params: &CFParams, x: f64, k: usize) -> Result<Enclosed> {
    let e = cf::expand(params, x, k)?;
    let mut v = fbeta_eval_symbolic(params, &e.word, k);
    if !e.terminated {
        v.bound += v.gap;
        v.exact = false;
    }
    Ok(v)
}

/// `x / (1 + c x)` with the closed-form `c` of `params`.
pub fn fbeta_mobius_left(params: &CFParams, x: f64) -> Result<f64> {
    let s = params.split();
    if !(0.0..=s).contains(&x) {
        return domain(format!("x = {x} outside [0, {s}]"));
    }
    Ok(MobiusBranch::left(params).eval(x))
}

/// Least-squares `d` for the right-branch ansatz against `f_beta` at `samples`,
/// with the largest residual of the fitted ansatz.
///
/// The ansatz is linear in `d`: `d (1 - x)(f - 1) = x - f`.
pub fn fit_mobius_right(params: &CFParams, samples: &[f64], k: usize) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!(
            "{} samples; at least 3 are needed",
            samples.len()
        )));
    }
    let (lo, hi) = (params.split(), params.upper());
    let mut pts = Vec::with_capacity(samples.len());
    for &x in samples {
        if !(x > lo && x <= hi) {
            return domain(format!("sample {x} outside ({lo}, {hi}]"));
        }
        pts.push((x, fbeta_eval_point(params, x, k)?.value));
    }
    let (mut sab, mut saa) = (0.0, 0.0);
    for &(x, f) in &pts {
        let a = (1.0 - x) * (f - 1.0);
        sab += a * (x - f);
        saa += a * a;
    }
    if saa == 0.0 {
        return Err(Error::Fit("degenerate samples".into()));
    }
    let d = sab / saa;
    let branch = MobiusBranch::right(params, d);
    let residual = pts
        .iter()
        .map(|&(x, f)| (branch.eval(x) - f).abs())
        .fold(0.0, f64::max);
    Ok((d, residual))
}

/// Relative deviation of the central difference of `f_beta` at `x` from
/// `f_beta(x)^2 / x^2`.
pub fn fbeta_derivative_check(params: &CFParams, x: f64, h: f64, k: usize) -> Result<f64> {
    if !(h > 0.0 && x - h > 0.0 && x + h < params.split()) {
        return domain(format!("stencil around {x} leaves the left branch"));
    }
    let f = |y: f64| fbeta_eval_point(params, y, k).map(|e| e.value);
    let fd = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let fx = f(x)?;
    let expect = fx * fx / (x * x);
    Ok(((fd - expect) / expect).abs())
}

/// `V o conj^{-1}`: a potential on the first space seen on the second.
pub fn transport_potential<X>(
    v: impl Fn(&X) -> Result<f64>,
    conj_inv: impl Fn(f64) -> Result<X>,
) -> impl Fn(f64) -> Result<f64> {
    move |y| v(&conj_inv(y)?)
}

/// `conj o h o conj^{-1}`.
pub fn conjugate_map<X>(
    h: impl Fn(&X) -> Result<X>,
    conj: impl Fn(&X) -> Result<f64>,
    conj_inv: impl Fn(f64) -> Result<X>,
) -> impl Fn(f64) -> Result<f64> {
    move |y| conj(&h(&conj_inv(y)?)?)
}
