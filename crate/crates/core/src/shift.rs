//! Renormalization on one-sided and two-sided shift potentials that are constant
//! on the cylinders `M_k = [0^k 1]`.
//!
//! One-sided: `R(V)(x) = V(0^{2 c1} 1^{c2} ...) + V(0^{2 c1 + a} 1^{c2} ...)`, so for a
//! cylinder potential `R(V)(M_c) = a_{2c} + a_{2c+a}`. Fixed point for `a = 1`:
//! `a_k = gamma log((k+1)/k)`.
//!
//! Two-sided: `R(V)(zeta, c1) = V(2 zeta - 1, 2 c1 + 1) + V(2 zeta, 2 c1)` with fixed point
//! `log(j (k+1) / ((j-1) k))`.

use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::numeric::CompensatedSum;
use crate::word::{Block, RunLengthWord};

/// Cap on the iteration depth; sums have `2^n` terms.
pub const N_MAX: u32 = 22;

type CylinderFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
type BiCylinderFn = Arc<dyn Fn(u64, u64) -> f64 + Send + Sync>;

/// A potential constant on each `M_k`, `k >= 1`, with value `a_k`.
#[derive(Clone)]
pub struct CylinderPotential {
    gamma: f64,
    eps: f64,
    a: CylinderFn,
    /// Value on `M_0 = [1]`; never enters the operator.
    pub a0: f64,
}

impl fmt::Debug for CylinderPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderPotential")
            .field("gamma", &self.gamma)
            .field("eps", &self.eps)
            .field("a0", &self.a0)
            .finish_non_exhaustive()
    }
}

impl CylinderPotential {
    pub fn new(gamma: f64, eps: f64, a: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            gamma,
            eps,
            a: Arc::new(a),
            a0: 0.0,
        }
    }

    /// `a_k = gamma log((k+1)/k)`.
    pub fn fixed_point(gamma: f64) -> Self {
        Self::new(gamma, 1.0, move |k| shift_fixed_potential(gamma, k))
    }

    /// `a_k = gamma / k`.
    pub fn harmonic(gamma: f64) -> Self {
        Self::new(gamma, 1.0, move |k| gamma / k as f64)
    }

    /// `a_k = gamma / k + gamma / k^(1 + eps)`.
    pub fn perturbed(gamma: f64, eps: f64) -> Self {
        Self::new(gamma, eps, move |k| {
            let k = k as f64;
            gamma / k + gamma / k.powf(1.0 + eps)
        })
    }

    pub fn zero() -> Self {
        Self::new(1.0, 1.0, |_| 0.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn value(&self, k: u64) -> f64 {
        (self.a)(k)
    }

    /// `max_{k <= kmax} |k a_k - gamma| k^eps`; bounded for members of the class.
    pub fn tail_constant(&self, kmax: u64) -> f64 {
        (1..=kmax)
            .map(|k| {
                let kf = k as f64;
                (kf * self.value(k) - self.gamma).abs() * kf.powf(self.eps)
            })
            .fold(0.0, f64::max)
    }

    /// `lambda V + W`, with the class metadata of `self`.
    pub fn combine(&self, lambda: f64, other: &CylinderPotential) -> Self {
        let (a, b) = (self.a.clone(), other.a.clone());
        Self {
            gamma: self.gamma,
            eps: self.eps,
            a: Arc::new(move |k| lambda * a(k) + b(k)),
            a0: lambda * self.a0 + other.a0,
        }
    }
}

/// `gamma log((k+1)/k)`.
pub fn shift_fixed_potential(gamma: f64, k: u64) -> f64 {
    debug_assert!(k >= 1);
    gamma * (1.0 / k as f64).ln_1p()
}

/// `(gamma / a) log((k + a)/k)`, fixed by the operator with offset `a`; equals
/// [`shift_fixed_potential`] for `a = 1`.
pub fn shift_offset_fixed_potential(gamma: f64, a: u64, k: u64) -> f64 {
    debug_assert!(k >= 1 && a >= 1);
    gamma / a as f64 * (a as f64 / k as f64).ln_1p()
}

fn leading_block(w: &RunLengthWord) -> Result<u64> {
    match w.leading_zeros() {
        Block::Finite(0) => domain("the operator is undefined on the cylinder [1] (c1 = 0)"),
        Block::Finite(c1) => Ok(c1),
        Block::Infinite => domain("0^inf lies in no cylinder M_k"),
    }
}

/// `R(V)(w) = a_{2 c1} + a_{2 c1 + a}` where `c1` is the leading 0-block of `w`.
pub fn shift_renorm_apply(v: &CylinderPotential, w: &RunLengthWord, a: u64) -> Result<f64> {
    if a == 0 {
        return domain("the offset a must be at least 1");
    }
    let c1 = leading_block(w)?;
    Ok(v.value(2 * c1) + v.value(2 * c1 + a))
}

fn check_depth(n: u32) -> Result<()> {
    if n > N_MAX {
        Err(Error::Resource(format!("n = {n} exceeds the cap {N_MAX}")))
    } else {
        Ok(())
    }
}

/// `R^n(V)` on `M_{c1}`.
///
/// For `a = 1` this is the Birkhoff sum `sum_{j < 2^n} a_{2^n c1 + j}`. For larger `a`
/// the block-length recursion `c -> {2c, 2c + a}` is unrolled as a binary tree of
/// depth `n` and its `2^n` leaves are summed in depth-first order.
pub fn shift_renorm_iterate(v: &CylinderPotential, c1: u64, n: u32, a: u64) -> Result<f64> {
    check_depth(n)?;
    if c1 == 0 {
        return domain("the operator is undefined on the cylinder [1] (c1 = 0)");
    }
    if a == 0 {
        return domain("the offset a must be at least 1");
    }
    let mut acc = CompensatedSum::new();
    if a == 1 {
        let base = c1 << n;
        for j in 0..(1u64 << n) {
            acc.add(v.value(base + j));
        }
    } else {
        visit_leaves(c1, n, a, &mut |k| acc.add(v.value(k)));
    }
    Ok(acc.value())
}

fn visit_leaves(c: u64, depth: u32, a: u64, f: &mut impl FnMut(u64)) {
    if depth == 0 {
        f(c);
    } else {
        visit_leaves(2 * c, depth - 1, a, f);
        visit_leaves(2 * c + a, depth - 1, a, f);
    }
}

/// `R^n(V)(M_c)` by literal repeated application over any additive value type.
pub fn iterate_by_recursion<T, F>(a_k: &F, c: u64, n: u32, a: u64) -> T
where
    T: Add<Output = T>,
    F: Fn(u64) -> T,
{
    if n == 0 {
        a_k(c)
    } else {
        iterate_by_recursion(a_k, 2 * c, n - 1, a) + iterate_by_recursion(a_k, 2 * c + a, n - 1, a)
    }
}

/// The closed Birkhoff-sum form `sum_{j < 2^n} a_{2^n c + j}` over any additive type.
pub fn iterate_closed_form<T, F>(a_k: &F, c: u64, n: u32) -> T
where
    T: Add<Output = T> + Zero,
    F: Fn(u64) -> T,
{
    (0..(1u64 << n)).fold(T::zero(), |acc, j| acc + a_k((c << n) + j))
}

/// A two-sided potential constant on `M_m | M_n`, value `a2(m, n)`, `m >= 2`.
#[derive(Clone)]
pub struct BiCylinderPotential {
    a2: BiCylinderFn,
}

impl fmt::Debug for BiCylinderPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BiCylinderPotential { .. }")
    }
}

impl BiCylinderPotential {
    pub fn new(a2: impl Fn(u64, u64) -> f64 + Send + Sync + 'static) -> Self {
        Self { a2: Arc::new(a2) }
    }

    pub fn fixed_point() -> Self {
        Self::new(twosided_fixed_potential_unchecked)
    }

    /// `(m + n) / ((m - 1) n)`, the leading term of the class.
    pub fn bare() -> Self {
        Self::new(|m, n| (m + n) as f64 / ((m - 1) as f64 * n as f64))
    }

    pub fn zero() -> Self {
        Self::new(|_, _| 0.0)
    }

    pub fn value(&self, m: u64, n: u64) -> Result<f64> {
        if m < 2 || n < 1 {
            return domain(format!(
                "two-sided potential needs m >= 2, n >= 1 (got {m}, {n})"
            ));
        }
        Ok((self.a2)(m, n))
    }
}

fn check_twosided(zeta: u64, c1: u64) -> Result<()> {
    if zeta < 2 {
        return domain(format!(
            "zeta = {zeta} < 2: the past block must have length >= 2"
        ));
    }
    if c1 < 1 {
        return domain("c1 must be at least 1");
    }
    Ok(())
}

/// `V(2 zeta - 1, 2 c1 + 1) + V(2 zeta, 2 c1)`.
pub fn twosided_renorm_apply(v: &BiCylinderPotential, zeta: u64, c1: u64) -> Result<f64> {
    check_twosided(zeta, c1)?;
    Ok(v.value(2 * zeta - 1, 2 * c1 + 1)? + v.value(2 * zeta, 2 * c1)?)
}

/// `sum_{k < 2^n} V(2^n zeta - 2^n + 1 + k, 2^n c1 + 2^n - 1 - k)`.
pub fn twosided_renorm_iterate(v: &BiCylinderPotential, zeta: u64, c1: u64, n: u32) -> Result<f64> {
    check_twosided(zeta, c1)?;
    check_depth(n)?;
    if n == 0 {
        return v.value(zeta, c1);
    }
    let p = 1u64 << n;
    let mut acc = CompensatedSum::new();
    for k in 0..p {
        acc.add(v.value(p * zeta - p + 1 + k, p * c1 + p - 1 - k)?);
    }
    Ok(acc.value())
}

fn twosided_fixed_potential_unchecked(j: u64, k: u64) -> f64 {
    (1.0 / (j - 1) as f64).ln_1p() + (1.0 / k as f64).ln_1p()
}

/// `log(j (k+1) / ((j-1) k))`.
pub fn twosided_fixed_potential(j: u64, k: u64) -> Result<f64> {
    if j < 2 || k < 1 {
        return domain(format!(
            "fixed potential needs j >= 2, k >= 1 (got {j}, {k})"
        ));
    }
    Ok(twosided_fixed_potential_unchecked(j, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Tail;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn word_c1(c1: u64) -> RunLengthWord {
        RunLengthWord::new(vec![c1, 2, 1], Tail::AllOnes).unwrap()
    }

    #[test]
    fn apply_examples() {
        let v = CylinderPotential::fixed_point(1.0);
        for k in 1..=50 {
            let got = shift_renorm_apply(&v, &word_c1(k), 1).unwrap();
            assert!((got - ((k + 1) as f64 / k as f64).ln()).abs() < 1e-15);
        }
        let z = CylinderPotential::zero();
        assert_eq!(shift_renorm_apply(&z, &word_c1(4), 1).unwrap(), 0.0);
        let h = CylinderPotential::harmonic(1.0);
        let got = shift_renorm_apply(&h, &word_c1(3), 1).unwrap();
        assert!((got - (1.0 / 6.0 + 1.0 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn apply_rejects_words_starting_with_one() {
        let v = CylinderPotential::fixed_point(1.0);
        assert!(shift_renorm_apply(&v, &RunLengthWord::ones(), 1).is_err());
        assert!(shift_renorm_apply(&v, &RunLengthWord::zeros(), 1).is_err());
        assert!(shift_renorm_apply(&v, &word_c1(1), 0).is_err());
    }

    #[test]
    fn fixed_point_exact_for_all_gammas() {
        for &gamma in &[1.0, 1.5, 2.0] {
            let v = CylinderPotential::fixed_point(gamma);
            for c1 in 1..=1000 {
                let got = shift_renorm_apply(&v, &word_c1(c1), 1).unwrap();
                assert!((got - shift_fixed_potential(gamma, c1)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_potential_examples() {
        assert!((shift_fixed_potential(1.0, 1) - 2f64.ln()).abs() < 1e-15);
        assert!((shift_fixed_potential(2.0, 1) - 2.0 * 2f64.ln()).abs() < 1e-15);
        let total: CompensatedSum = (1..=100).map(|k| shift_fixed_potential(1.5, k)).collect();
        assert!((total.value() - 1.5 * 101f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn iterate_examples() {
        let h = CylinderPotential::harmonic(1.0);
        // oracle: direct harmonic block sum
        let oracle: f64 = (0..(1u64 << 16)).map(|j| 1.0 / (65536 + j) as f64).sum();
        let got = shift_renorm_iterate(&h, 1, 16, 1).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 2f64.ln()).abs() < 1e-4);

        let v = CylinderPotential::fixed_point(1.0);
        for n in 0..=16 {
            for c1 in [1, 2, 7] {
                let got = shift_renorm_iterate(&v, c1, n, 1).unwrap();
                assert!((got - shift_fixed_potential(1.0, c1)).abs() < 1e-12);
            }
        }
        assert_eq!(shift_renorm_iterate(&h, 5, 0, 1).unwrap(), 0.2);
        assert_eq!(shift_renorm_iterate(&h, 5, 0, 3).unwrap(), 0.2);
        assert!(shift_renorm_iterate(&h, 1, 23, 1).is_err());
        assert!(shift_renorm_iterate(&h, 0, 3, 1).is_err());
    }

    #[test]
    fn tree_and_closed_form_agree_in_exact_arithmetic() {
        let a_k = |k: u64| BigRational::new(BigInt::from(1), BigInt::from(k));
        for c in 1..=5 {
            for n in 0..=6 {
                let tree: BigRational = iterate_by_recursion(&a_k, c, n, 1);
                let closed: BigRational = iterate_closed_form(&a_k, c, n);
                assert_eq!(tree, closed);
            }
        }
    }

    #[test]
    fn offset_fixed_point() {
        for a in 1..=4u64 {
            let v =
                CylinderPotential::new(1.5, 1.0, move |k| shift_offset_fixed_potential(1.5, a, k));
            for c in 1..=200 {
                let got = shift_renorm_apply(&v, &word_c1(c), a).unwrap();
                assert!((got - shift_offset_fixed_potential(1.5, a, c)).abs() < 1e-12);
            }
            let h = CylinderPotential::harmonic(1.5);
            let lim = shift_renorm_iterate(&h, 3, 16, a).unwrap();
            assert!((lim - shift_offset_fixed_potential(1.5, a, 3)).abs() < 1e-3);
        }
        assert_eq!(
            shift_offset_fixed_potential(2.0, 1, 5),
            shift_fixed_potential(2.0, 5)
        );
    }

    #[test]
    fn general_offset_leaves() {
        // leaves of the a-tree are 2^n c + a j, j ascending
        for a in 2..=4u64 {
            let mut leaves = Vec::new();
            visit_leaves(3, 4, a, &mut |k| leaves.push(k));
            let expect: Vec<u64> = (0..16).map(|j| 48 + a * j).collect();
            assert_eq!(leaves, expect);
            let h = CylinderPotential::harmonic(1.0);
            let rec = iterate_by_recursion(&|k| h.value(k), 3, 4, a);
            assert!((shift_renorm_iterate(&h, 3, 4, a).unwrap() - rec).abs() < 1e-14);
        }
    }

    #[test]
    fn convergence_of_perturbed_potentials() {
        for &gamma in &[1.0, 2.0] {
            for &eps in &[0.5, 1.0] {
                let v = CylinderPotential::perturbed(gamma, eps);
                for c1 in 1..=8 {
                    let got = shift_renorm_iterate(&v, c1, 16, 1).unwrap();
                    let target = shift_fixed_potential(gamma, c1);
                    // sum of 2^n perturbation terms is at most 2^(-n eps) / eps
                    let bound = gamma * (2f64.powf(-16.0 * eps) / eps + 2f64.powi(-16));
                    assert!(
                        (got - target).abs() < bound,
                        "gamma={gamma} eps={eps} c1={c1}"
                    );
                }
            }
        }
    }

    #[test]
    fn class_tail_constant_is_bounded() {
        let v = CylinderPotential::perturbed(1.5, 0.5);
        assert!(v.tail_constant(10_000) <= 1.5 + 1e-9);
        let fp = CylinderPotential::fixed_point(1.0);
        // log(1 + 1/k) = 1/k - 1/(2k^2) + ..., so k^eps |k a_k - 1| stays below 1/2
        assert!(fp.tail_constant(10_000) < 0.5);
    }

    proptest! {
        #[test]
        fn operator_is_linear(lambda in 0.0f64..5.0, s1 in 0.1f64..3.0, s2 in 0.1f64..3.0,
                              c1 in 1u64..500, a in 1u64..4) {
            let v = CylinderPotential::new(1.0, 1.0, move |k| s1 / (k as f64).sqrt());
            let w = CylinderPotential::new(1.0, 1.0, move |k| s2 * (1.0 / k as f64).ln_1p());
            let comb = v.combine(lambda, &w);
            let word = word_c1(c1);
            let lhs = shift_renorm_apply(&comb, &word, a).unwrap();
            let rhs = lambda * shift_renorm_apply(&v, &word, a).unwrap()
                + shift_renorm_apply(&w, &word, a).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn twosided_examples() {
        let fp = BiCylinderPotential::fixed_point();
        for (z, c) in [(2, 1), (3, 2), (10, 7)] {
            let got = twosided_renorm_apply(&fp, z, c).unwrap();
            let target = ((z * (c + 1)) as f64 / ((z - 1) * c) as f64).ln();
            assert!((got - target).abs() < 1e-14);
        }
        assert_eq!(
            twosided_renorm_apply(&BiCylinderPotential::zero(), 4, 4).unwrap(),
            0.0
        );
        let bare = BiCylinderPotential::bare();
        assert!((twosided_renorm_apply(&bare, 2, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!(twosided_renorm_apply(&bare, 1, 1).is_err());
        assert!(bare.value(1, 3).is_err());
    }

    #[test]
    fn twosided_fixed_potential_examples() {
        assert!((twosided_fixed_potential(2, 1).unwrap() - 4f64.ln()).abs() < 1e-15);
        let lhs = twosided_fixed_potential(5, 5).unwrap() + twosided_fixed_potential(6, 4).unwrap();
        assert!((lhs - twosided_fixed_potential(3, 2).unwrap()).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let v = twosided_fixed_potential(2, 1 << i).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!((prev - 2f64.ln()).abs() < 1e-5);
        assert!(twosided_fixed_potential(1, 1).is_err());
    }

    #[test]
    fn twosided_fixed_point_on_grid() {
        let fp = BiCylinderPotential::fixed_point();
        for z in 2..=50 {
            for c in 1..=50 {
                let got = twosided_renorm_apply(&fp, z, c).unwrap();
                assert!((got - twosided_fixed_potential(z, c).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn twosided_iterate_examples() {
        let fp = BiCylinderPotential::fixed_point();
        let bare = BiCylinderPotential::bare();
        assert_eq!(
            twosided_renorm_iterate(&bare, 3, 2, 0).unwrap(),
            bare.value(3, 2).unwrap()
        );
        assert_eq!(
            twosided_renorm_iterate(&bare, 2, 1, 1).unwrap(),
            twosided_renorm_apply(&bare, 2, 1).unwrap()
        );
        for n in 0..=12 {
            let got = twosided_renorm_iterate(&fp, 4, 3, n).unwrap();
            assert!((got - twosided_fixed_potential(4, 3).unwrap()).abs() < 1e-12);
        }
        let got = twosided_renorm_iterate(&bare, 2, 1, 16).unwrap();
        assert!((got - 4f64.ln()).abs() < 1e-3);
    }
}
