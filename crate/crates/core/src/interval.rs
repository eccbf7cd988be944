//! The renormalization operator on interval potentials,
//!
//! ```text
//! R(V)(x) = V(f_t(x / 2^(1/t))) + V(x / 2^(1/t)),
//! ```
//!
//! its fast n-fold iterate as a Birkhoff sum along the left-branch orbit of
//! `x / 2^(n/t)`, and the convergence diagnostics towards `V*`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::mp::{self, LaminarParams};
use crate::numeric::{pow, CompensatedSum};

/// Grids stay at least this far from the singularity of `V*` at `x = 1`.
pub const EDGE_DELTA: f64 = 1e-6;
/// Default cap on the iteration depth of [`iterate`]; the sum has `2^n` terms.
pub const DEFAULT_N_MAX: u32 = 22;
/// Exponent tolerance of [`asymptotic_class_check`].
pub const TOL_EXPONENT: f64 = 0.05;
/// Coefficient tolerance of [`asymptotic_class_check`].
pub const TOL_COEFFICIENT: f64 = 0.1;
/// Number of points of the default convergence grid.
pub const DEFAULT_GRID_POINTS: usize = 64;

pub type Evaluator = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// What a [`Potential1D`] is, as far as the library knows.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `V*(x) = -(1 + 1/t) log(1 - x^t)`.
    FixedPoint,
    /// `coef * x^exponent + perturbation * x^(exponent + pert_exponent)`.
    PowerLaw {
        coef: f64,
        exponent: f64,
        perturbation: f64,
        pert_exponent: f64,
    },
    /// Piecewise-linear interpolation of sampled values.
    GridSampled { nodes: Vec<f64>, values: Vec<f64> },
    /// Anything else, e.g. the image of another potential under `R`.
    Custom,
}

/// A potential on `[0, 1]` together with the laminar parameters of the operator
/// it is meant to be renormalized by.
#[derive(Clone)]
pub struct Potential1D {
    family: Family,
    params: LaminarParams,
    evaluator: Evaluator,
}

impl fmt::Debug for Potential1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential1D")
            .field("family", &self.family)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl Potential1D {
    pub fn fixed_point(params: LaminarParams) -> Self {
        Self {
            family: Family::FixedPoint,
            params,
            evaluator: Arc::new(move |x| mp::fixed_potential(&params, x)),
        }
    }

    pub fn power_law(params: LaminarParams, coef: f64, exponent: f64) -> Result<Self> {
        Self::perturbed_power_law(params, coef, exponent, 0.0, 1.0)
    }

    /// `coef * x^exponent + perturbation * x^(exponent + pert_exponent)`.
    pub fn perturbed_power_law(
        params: LaminarParams,
        coef: f64,
        exponent: f64,
        perturbation: f64,
        pert_exponent: f64,
    ) -> Result<Self> {
        if !(coef >= 0.0 && exponent > 0.0 && pert_exponent > 0.0 && perturbation >= 0.0) {
            return domain(format!(
                "power law needs coef >= 0, exponent > 0, perturbation >= 0, pert_exponent > 0 \
                 (got {coef}, {exponent}, {perturbation}, {pert_exponent})"
            ));
        }
        let evaluator: Evaluator = Arc::new(move |x: f64| {
            if !(0.0..=1.0).contains(&x) {
                return domain(format!("x = {x} outside [0, 1]"));
            }
            Ok(coef * pow(x, exponent) + perturbation * pow(x, exponent + pert_exponent))
        });
        Ok(Self {
            family: Family::PowerLaw {
                coef,
                exponent,
                perturbation,
                pert_exponent,
            },
            params,
            evaluator,
        })
    }

    /// The canonical member of the class: `(1 + 1/t) x^t`.
    pub fn canonical(params: LaminarParams) -> Self {
        Self::power_law(params, params.gamma(), params.t()).expect("gamma and t are positive")
    }

    pub fn zero(params: LaminarParams) -> Self {
        Self::power_law(params, 0.0, 1.0).expect("valid zero power law")
    }

    /// Linear interpolation through `(nodes[i], values[i])`; `nodes` strictly increasing.
    pub fn grid_sampled(params: LaminarParams, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return domain("grid potential needs at least two nodes and one value per node");
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("grid nodes must be strictly increasing");
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("grid values must be finite and non-negative");
        }
        let (n, v) = (nodes.clone(), values.clone());
        let evaluator: Evaluator = Arc::new(move |x: f64| {
            if !(x >= n[0] && x <= n[n.len() - 1]) {
                return domain(format!(
                    "x = {x} outside grid [{}, {}]",
                    n[0],
                    n[n.len() - 1]
                ));
            }
            let i = n.partition_point(|&node| node <= x).clamp(1, n.len() - 1);
            let (x0, x1) = (n[i - 1], n[i]);
            let w = (x - x0) / (x1 - x0);
            Ok(v[i - 1] * (1.0 - w) + v[i] * w)
        });
        Ok(Self {
            family: Family::GridSampled { nodes, values },
            params,
            evaluator,
        })
    }

    pub fn custom(
        params: LaminarParams,
        f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            family: Family::Custom,
            params,
            evaluator: Arc::new(f),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn params(&self) -> &LaminarParams {
        &self.params
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.evaluator)(x)
    }

    /// `R(V)` as a potential in its own right.
    pub fn renormalized(&self) -> Potential1D {
        let v = self.clone();
        Potential1D::custom(self.params, move |x| apply(&v, x))
    }
}

/// One application of the operator: `V(f_t(x / 2^(1/t))) + V(x / 2^(1/t))`.
pub fn apply(v: &Potential1D, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return domain(format!("x = {x} outside [0, 1)"));
    }
    let p = v.params();
    let y = x / pow(2.0, 1.0 / p.t());
    let fy = mp::eval(p, y)?;
    Ok(v.eval(fy)? + v.eval(y)?)
}

/// `R^n(V)(x)` via the closed Birkhoff sum
///
/// ```text
/// sum_{j=0}^{2^n - 1} V((2^n / x^t - j)^(-1/t))
/// ```
///
/// accumulated in ascending `j` with compensation.
pub fn iterate(v: &Potential1D, n: u32, x: f64) -> Result<f64> {
    iterate_with_limit(v, n, x, DEFAULT_N_MAX)
}

pub fn iterate_with_limit(v: &Potential1D, n: u32, x: f64, n_max: u32) -> Result<f64> {
    if n > n_max {
        return Err(Error::Resource(format!(
            "n = {n} exceeds the iteration cap {n_max}"
        )));
    }
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("x = {x} outside (0, 1)"));
    }
    if n == 0 {
        return v.eval(x);
    }
    let t = v.params().t();
    let scale = (1u64 << n) as f64 / pow(x, t);
    let mut acc = CompensatedSum::new();
    for j in 0..(1u64 << n) {
        acc.add(v.eval(pow(scale - j as f64, -1.0 / t))?);
    }
    Ok(acc.value())
}

/// `max_{x in grid} |R^n(V)(x) - V*(x)|`.
pub fn sup_error(v: &Potential1D, n: u32, grid: &[f64]) -> Result<f64> {
    let p = v.params();
    let mut worst = 0.0f64;
    for &x in grid {
        let e = (iterate(v, n, x)? - mp::fixed_potential(p, x)?).abs();
        worst = worst.max(e);
    }
    Ok(worst)
}

/// `points` equispaced nodes covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// 64 equispaced points on `[0.1, 2^(-1/t)]`; every summand of the iterate stays
/// on the left branch there.
pub fn default_grid(p: &LaminarParams) -> Vec<f64> {
    linspace(0.1, p.split().min(1.0 - EDGE_DELTA), DEFAULT_GRID_POINTS)
}

/// Result of the log-log regression near the neutral fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub in_class: bool,
}

/// Fits `log V(x) = log c + s log x` on `x = 10^(-k/4)`, `k = 4..=24`, and reports
/// whether the germ `c x^s` is the one of the class, `(1 + 1/t) x^t`.
pub fn asymptotic_class_check(v: &Potential1D, p: &LaminarParams) -> Result<ClassFit> {
    let mut xs = Vec::with_capacity(21);
    let mut ys = Vec::with_capacity(21);
    for k in 4..=24 {
        let x = 10f64.powf(-(k as f64) / 4.0);
        let val = v.eval(x)?;
        if !(val > 0.0 && val.is_finite()) {
            return Err(Error::Fit(format!(
                "potential is {val} at x = {x}; log-log fit needs positive values"
            )));
        }
        xs.push(x.ln());
        ys.push(val.ln());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = sxy / sxx;
    let coefficient = (my - exponent * mx).exp();
    let in_class = (exponent - p.t()).abs() < TOL_EXPONENT
        && (coefficient - p.gamma()).abs() < TOL_COEFFICIENT;
    Ok(ClassFit {
        exponent,
        coefficient,
        in_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(t: f64) -> LaminarParams {
        LaminarParams::new(t).unwrap()
    }

    #[test]
    fn apply_on_fixed_point_at_one_half() {
        let p = params(1.0);
        let v = Potential1D::fixed_point(p);
        // V*(1/3) + V*(1/4) = -2 log((2/3)(3/4)) = 2 log 2
        let oracle = -2.0 * ((2.0f64 / 3.0) * (3.0 / 4.0)).ln();
        let got = apply(&v, 0.5).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - mp::fixed_potential(&p, 0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn zero_potential_stays_zero() {
        let v = Potential1D::zero(params(2.0));
        for i in 0..10 {
            let x = 0.05 + 0.09 * i as f64;
            assert_eq!(apply(&v, x).unwrap(), 0.0);
            assert_eq!(iterate(&v, 5, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn fixed_point_identity_on_whole_interval() {
        for &t in &[0.5, 1.0, 2.0, 3.0] {
            let p = params(t);
            let v = Potential1D::fixed_point(p);
            for x in linspace(0.0, 1.0 - EDGE_DELTA, 100) {
                let r = apply(&v, x).unwrap();
                let target = v.eval(x).unwrap();
                // x V'(x) times unit roundoff: error already present in V*(x) itself
                let xt = pow(x, t);
                let cond = p.gamma() * t * xt / (1.0 - xt) * f64::EPSILON;
                let tol = 1e-12 * target.max(1.0) + 8.0 * cond;
                assert!(
                    (r - target).abs() < tol,
                    "t={t} x={x} err={}",
                    (r - target).abs()
                );
            }
        }
    }

    #[test]
    fn iterate_zero_steps_is_identity() {
        let v = Potential1D::canonical(params(1.5));
        assert_eq!(iterate(&v, 0, 0.3).unwrap(), v.eval(0.3).unwrap());
    }

    #[test]
    fn iterate_matches_repeated_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &t in &[0.5, 1.0, 2.0, 3.0] {
            let p = params(t);
            let v = Potential1D::perturbed_power_law(p, p.gamma(), t, 0.7, 0.5).unwrap();
            let mut composed = v.clone();
            for n in 1..=6u32 {
                composed = composed.renormalized();
                for _ in 0..10 {
                    let x: f64 = rng.gen_range(0.01..0.99);
                    let a = iterate(&v, n, x).unwrap();
                    let b = composed.eval(x).unwrap();
                    assert!((a - b).abs() < 1e-11, "t={t} n={n} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn iterate_fixed_point_stays_fixed() {
        let p = params(2.0);
        let v = Potential1D::fixed_point(p);
        for n in [1, 4, 10, 16] {
            assert!(sup_error(&v, n, &default_grid(&p)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn iterate_respects_cap() {
        let v = Potential1D::canonical(params(1.0));
        assert!(matches!(iterate(&v, 23, 0.3), Err(Error::Resource(_))));
        assert!(iterate_with_limit(&v, 3, 0.3, 2).is_err());
        assert!(iterate(&v, 3, 0.0).is_err());
    }

    #[test]
    fn iterate_is_deterministic() {
        let v = Potential1D::canonical(params(1.0));
        let a = iterate(&v, 14, 0.37).unwrap();
        let b = iterate(&v, 14, 0.37).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn class_check_examples() {
        let p = params(1.0);
        let fit = asymptotic_class_check(&Potential1D::fixed_point(p), &p).unwrap();
        assert!((fit.exponent - 1.0).abs() < TOL_EXPONENT);
        assert!((fit.coefficient - 2.0).abs() < TOL_COEFFICIENT);
        assert!(fit.in_class);

        let sqrt = Potential1D::power_law(p, 1.0, 0.5).unwrap();
        assert!(!asymptotic_class_check(&sqrt, &p).unwrap().in_class);

        let p2 = params(2.0);
        let pert = Potential1D::perturbed_power_law(p2, 1.5, 2.0, 1.5, 1.0).unwrap();
        assert!(asymptotic_class_check(&pert, &p2).unwrap().in_class);

        let zero = Potential1D::zero(p);
        assert!(matches!(
            asymptotic_class_check(&zero, &p),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn grid_sampled_interpolates() {
        let p = params(1.0);
        let v = Potential1D::grid_sampled(p, vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(v.eval(0.25).unwrap(), 0.5);
        assert_eq!(v.eval(0.75).unwrap(), 2.0);
        assert_eq!(v.eval(1.0).unwrap(), 3.0);
        assert!(v.eval(1.5).is_err());
        assert!(Potential1D::grid_sampled(p, vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Potential1D::grid_sampled(p, vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn apply_propagates_evaluator_errors() {
        let p = params(1.0);
        let v = Potential1D::custom(p, |x| {
            Err(Error::Singularity {
                at: x,
                what: "test",
            })
        });
        assert!(matches!(apply(&v, 0.3), Err(Error::Singularity { .. })));
    }
}
