//! The Baker Manneville-Pomeau map on the square and the two-dimensional
//! renormalization operator (at `t = 1`) with fixed point `log((1+x)/(1-y))`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::mp::{self, Branch, LaminarParams};
use crate::numeric::{CompensatedSum, SINGULAR_GUARD};

/// Cap on the depth of [`baker_renorm_iterate`]; cost is `2^n` evaluations.
pub const N_MAX: u32 = 12;

/// `F_t(x, z) = (f_t(x), f_t^{-1}(z))`, the inverse branch being the one indexed by
/// the branch of `x`, so that `F_t(x, f_t(y)) = (f_t(x), y)` whenever `y` lies on the
/// branch of `x`.
pub fn baker_map(p: &LaminarParams, x: f64, z: f64) -> Result<(f64, f64)> {
    let b = mp::branch_of(p, x);
    Ok((mp::eval(p, x)?, mp::inverse_branch(p, z, b)?))
}

/// Inverse of [`baker_map`].
pub fn baker_map_inverse(p: &LaminarParams, u: f64, y: f64) -> Result<(f64, f64)> {
    let b = mp::branch_of(p, y);
    Ok((mp::inverse_branch(p, u, b)?, mp::eval(p, y)?))
}

type Eval2 = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// A potential on `[0,1) x [0,1)` with the perturbation exponents of its class.
#[derive(Clone)]
pub struct Potential2D {
    evaluator: Eval2,
    pub eps1: f64,
    pub eps2: f64,
}

impl fmt::Debug for Potential2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential2D")
            .field("eps1", &self.eps1)
            .field("eps2", &self.eps2)
            .finish_non_exhaustive()
    }
}

impl Potential2D {
    pub fn new(f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(f),
            eps1: 1.0,
            eps2: 1.0,
        }
    }

    pub fn fixed_point() -> Self {
        Self::new(baker_fixed_potential)
    }

    pub fn zero() -> Self {
        Self::new(|_, _| Ok(0.0))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (self.evaluator)(x, y)
    }

    /// `lambda V + W`.
    pub fn combine(&self, lambda: f64, other: &Potential2D) -> Self {
        let (a, b) = (self.evaluator.clone(), other.evaluator.clone());
        Self {
            evaluator: Arc::new(move |x, y| Ok(lambda * a(x, y)? + b(x, y)?)),
            eps1: self.eps1,
            eps2: self.eps2,
        }
    }
}

/// `V*(x, y) = log((1 + x)/(1 - y))`.
pub fn baker_fixed_potential(x: f64, y: f64) -> Result<f64> {
    if !(-1.0 < x) || !(y < 1.0) {
        if (1.0..f64::INFINITY).contains(&y) {
            return Err(Error::Singularity {
                at: y,
                what: "log(1/(1-y)) diverges at y = 1",
            });
        }
        return domain(format!("({x}, {y}) outside the domain of V*"));
    }
    if 1.0 - y < SINGULAR_GUARD {
        return Err(Error::Singularity {
            at: y,
            what: "log(1/(1-y)) diverges at y = 1",
        });
    }
    Ok(x.ln_1p() - (-y).ln_1p())
}

/// Which first-argument map the operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// `x / (2 + x)`: keeps `V*` fixed.
    #[default]
    Corrected,
    /// `2 / (2 + x)`, as printed in the source formula; does not fix `V*`.
    PaperLiteral,
}

impl Variant {
    fn first_map(self, x: f64) -> f64 {
        match self {
            Variant::Corrected => x / (2.0 + x),
            Variant::PaperLiteral => 2.0 / (2.0 + x),
        }
    }
}

fn check_square(x: f64, y: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
        return domain(format!("({x}, {y}) outside [0,1)^2"));
    }
    Ok(())
}

/// `V(phi(x), y/(2-y)) + V(x/2, y/2)` with `phi` chosen by `variant`.
pub fn baker_renorm_apply(v: &Potential2D, x: f64, y: f64, variant: Variant) -> Result<f64> {
    check_square(x, y)?;
    Ok(v.eval(variant.first_map(x), y / (2.0 - y))? + v.eval(x / 2.0, y / 2.0)?)
}

/// `R^n(V)(x, y)` by unrolling the two-term recursion, `2^n` leaf evaluations
/// summed in depth-first order.
pub fn baker_renorm_iterate(
    v: &Potential2D,
    n: u32,
    x: f64,
    y: f64,
    variant: Variant,
) -> Result<f64> {
    check_square(x, y)?;
    if n > N_MAX {
        return Err(Error::Resource(format!("n = {n} exceeds the cap {N_MAX}")));
    }
    let mut acc = CompensatedSum::new();
    leaves(v, n, x, y, variant, &mut acc)?;
    Ok(acc.value())
}

fn leaves(
    v: &Potential2D,
    n: u32,
    x: f64,
    y: f64,
    variant: Variant,
    acc: &mut CompensatedSum,
) -> Result<()> {
    if n == 0 {
        acc.add(v.eval(x, y)?);
        return Ok(());
    }
    leaves(v, n - 1, variant.first_map(x), y / (2.0 - y), variant, acc)?;
    leaves(v, n - 1, x / 2.0, y / 2.0, variant, acc)
}

/// The branch convention used by [`baker_map`], exposed for callers that need to
/// build points satisfying the defining relation.
pub fn branch(p: &LaminarParams, x: f64) -> Branch {
    mp::branch_of(p, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p1() -> LaminarParams {
        LaminarParams::new(1.0).unwrap()
    }

    #[test]
    fn defining_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &t in &[0.5, 1.0, 2.0] {
            let p = LaminarParams::new(t).unwrap();
            for _ in 0..200 {
                let x: f64 = rng.gen();
                // y on the branch of x
                let u: f64 = rng.gen();
                let y = mp::inverse_branch(&p, u, branch(&p, x)).unwrap();
                let (a, b) = baker_map(&p, x, mp::eval(&p, y).unwrap()).unwrap();
                assert!((a - mp::eval(&p, x).unwrap()).abs() < 1e-12);
                assert!((b - y).abs() < 1e-12, "t={t} x={x} y={y} b={b}");
            }
        }
    }

    #[test]
    fn origin_is_fixed() {
        assert_eq!(baker_map(&p1(), 0.0, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let p = p1();
        for _ in 0..200 {
            let (x, z): (f64, f64) = (rng.gen(), rng.gen());
            let (u, y) = baker_map(&p, x, z).unwrap();
            let (x2, z2) = baker_map_inverse(&p, u, y).unwrap();
            assert!((x - x2).abs() < 1e-12 && (z - z2).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_potential_examples() {
        assert_eq!(baker_fixed_potential(0.0, 0.0).unwrap(), 0.0);
        assert!((baker_fixed_potential(1.0, 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            baker_fixed_potential(0.0, 1.0),
            Err(Error::Singularity { .. })
        ));
        for i in 0..20 {
            for j in 0..20 {
                let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
                let lhs = baker_fixed_potential(x, y).unwrap();
                let rhs =
                    baker_fixed_potential(x, 0.0).unwrap() + baker_fixed_potential(0.0, y).unwrap();
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn corrected_variant_fixes_v_star() {
        let v = Potential2D::fixed_point();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen_range(0.0..0.99));
            let r = baker_renorm_apply(&v, x, y, Variant::Corrected).unwrap();
            assert!((r - baker_fixed_potential(x, y).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn literal_variant_fails_at_origin() {
        let v = Potential2D::fixed_point();
        let r = baker_renorm_apply(&v, 0.0, 0.0, Variant::PaperLiteral).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_and_linearity() {
        let z = Potential2D::zero();
        assert_eq!(
            baker_renorm_apply(&z, 0.3, 0.4, Variant::Corrected).unwrap(),
            0.0
        );
        let v = Potential2D::new(|x, y| Ok(x * x + y));
        let w = Potential2D::fixed_point();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let lambda: f64 = rng.gen_range(0.0..3.0);
            let (x, y): (f64, f64) = (rng.gen(), rng.gen_range(0.0..0.95));
            for variant in [Variant::Corrected, Variant::PaperLiteral] {
                let lhs = baker_renorm_apply(&v.combine(lambda, &w), x, y, variant).unwrap();
                let rhs = lambda * baker_renorm_apply(&v, x, y, variant).unwrap()
                    + baker_renorm_apply(&w, x, y, variant).unwrap();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iterate_consistent_with_apply() {
        let v = Potential2D::new(|x, y| Ok((1.0 + x).ln() + 0.3 * y * y));
        let once = baker_renorm_iterate(&v, 1, 0.4, 0.2, Variant::Corrected).unwrap();
        let direct = baker_renorm_apply(&v, 0.4, 0.2, Variant::Corrected).unwrap();
        assert!((once - direct).abs() < 1e-15);
        assert!(baker_renorm_iterate(&v, 13, 0.4, 0.2, Variant::Corrected).is_err());
    }

    #[test]
    fn perturbed_fixed_point_is_attracted() {
        let v = Potential2D::new(|x, y| Ok(baker_fixed_potential(x, y)? * (1.0 + 0.1 * x * y)));
        let grid: Vec<(f64, f64)> = (0..10)
            .flat_map(|i| (0..10).map(move |j| (0.09 * i as f64, 0.09 * j as f64)))
            .collect();
        let mut prev = f64::INFINITY;
        for n in [2, 4, 6, 8] {
            let err = grid
                .iter()
                .map(|&(x, y)| {
                    (baker_renorm_iterate(&v, n, x, y, Variant::Corrected).unwrap()
                        - baker_fixed_potential(x, y).unwrap())
                    .abs()
                })
                .fold(0.0, f64::max);
            assert!(err < prev, "n={n}: {err} !< {prev}");
            prev = err;
        }
    }
}
