//! Small numerical helpers shared by the operators.

/// Distance from a singularity below which evaluation is refused.
pub const SINGULAR_GUARD: f64 = 1e-15;

/// Neumaier-compensated accumulator.
///
/// Terms must be pushed in a fixed order for results to be reproducible;
/// every sum in this crate is accumulated in ascending index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `base^s` for `base >= 0`, computed as `exp(s * ln base)` with `0^s = 0` for `s > 0`.
#[inline]
pub(crate) fn pow(base: f64, s: f64) -> f64 {
    if base == 0.0 {
        if s > 0.0 {
            0.0
        } else if s == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (s * base.ln()).exp()
    }
}
