//! Finite-depth verification that the conjugating map `H` on the one-sided shift
//! is unique.
//!
//! `H` is increasing for the lexicographic order, fixes `0^inf`, sends `1 x'` to
//! `0^a 1 x'`, and satisfies `sigma^2 o H = H o sigma` on words starting with 0.
//! Up to depth `L` such an `H` is described by one output prefix per leading block
//! length: `H(0^{n0} 1 x') = Q_{n0} x'` for `n0 = 0..=L`. The expected survivor is
//! `Q_{n0} = 0^{2 n0 + a} 1`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{domain, Error, Result};

/// A single output digit, possibly not yet assigned.
pub type Slot = Option<u8>;

/// Default node budget of [`enumerate_h`].
pub const NODE_BUDGET: u64 = 100_000_000;
/// Largest depth accepted by [`enumerate_h`].
pub const MAX_DEPTH: usize = 12;

/// A (possibly partial) table for `H` up to depth `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HCandidate {
    a: usize,
    depth: usize,
    /// `rows[n0]` is the output prefix `Q_{n0}` of `H(0^{n0} 1 x')`.
    rows: Vec<Vec<Slot>>,
    /// Prefix of `H(0^inf)`.
    zero_image: Vec<Slot>,
}

impl HCandidate {
    /// A complete table from explicit prefixes `rows[0..=depth]` and `H(0^inf) = 0^inf`.
    pub fn from_rows(a: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        if rows.is_empty() {
            return domain("a candidate needs at least the row for n0 = 0");
        }
        if rows.iter().flatten().any(|&d| d > 1) {
            return domain("digits must be 0 or 1");
        }
        let depth = rows.len() - 1;
        Ok(Self {
            a,
            depth,
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
            zero_image: vec![Some(0); 2 * depth + a + 1],
        })
    }

    /// `n0 -> 0^{2 n0 + a} 1`, the map the proposition predicts.
    pub fn proposition(a: usize, depth: usize) -> Self {
        Self::from_rows(a, (0..=depth).map(|n0| closed_form_row(a, n0)).collect())
            .expect("closed form rows are binary")
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn rows(&self) -> &[Vec<Slot>] {
        &self.rows
    }

    /// Replace the prefix of `H(0^inf)`.
    pub fn with_zero_image(mut self, image: Vec<u8>) -> Self {
        self.zero_image = image.into_iter().map(Some).collect();
        self
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().flatten().all(Option::is_some)
            && self.zero_image.iter().all(Option::is_some)
    }

    /// Number of leading zeros of each row when the row has the form `0^k 1`.
    pub fn zero_run_lengths(&self) -> Vec<Option<usize>> {
        self.rows
            .iter()
            .map(|r| {
                let (last, head) = r.split_last()?;
                (*last == Some(1) && head.iter().all(|d| *d == Some(0))).then_some(head.len())
            })
            .collect()
    }

    /// Whether every row agrees with `0^{2 n0 + a} 1`.
    pub fn matches_proposition(&self) -> bool {
        self.rows.iter().enumerate().all(|(n0, r)| {
            let expect = closed_form_row(self.a, n0);
            r.len() == expect.len() && r.iter().zip(&expect).all(|(s, d)| *s == Some(*d))
        })
    }

    /// Whether `self` agrees with `shorter` on all rows `shorter` has.
    pub fn extends(&self, shorter: &HCandidate) -> bool {
        self.a == shorter.a
            && shorter.depth <= self.depth
            && shorter.rows.iter().zip(&self.rows).all(|(s, l)| s == l)
    }
}

impl fmt::Display for HCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n0, r) in self.rows.iter().enumerate() {
            let s: String = r
                .iter()
                .map(|d| match d {
                    Some(0) => '0',
                    Some(_) => '1',
                    None => '?',
                })
                .collect();
            writeln!(f, "H(0^{n0} 1 x') = {s} x'")?;
        }
        Ok(())
    }
}

fn closed_form_row(a: usize, n0: usize) -> Vec<u8> {
    let mut row = vec![0; 2 * n0 + a];
    row.push(1);
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `H(1 x') = 0^a 1 x'`.
    Anchor,
    /// `sigma^2(H(x)) = H(sigma(x))` for `x` starting with 0.
    SemiConjugacy,
    /// `H(0^inf) = 0^inf`.
    ZeroFixed,
    /// Strictly increasing on distinct leading cylinders (and above `H(0^inf)`).
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not decidable from the determined digits.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub constraint: Constraint,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Outcome of comparing determined digits.
fn merge(a: Status, b: Status) -> Status {
    match (a, b) {
        (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
        (Status::Undetermined, _) | (_, Status::Undetermined) => Status::Undetermined,
        _ => Status::Pass,
    }
}

fn anchor_status(c: &HCandidate) -> Status {
    let expect = closed_form_row(c.a, 0);
    let row = &c.rows[0];
    if row.len() != expect.len() {
        return Status::Fail;
    }
    row.iter().zip(&expect).fold(Status::Pass, |st, (s, d)| {
        merge(
            st,
            match s {
                None => Status::Undetermined,
                Some(v) if v == d => Status::Pass,
                Some(_) => Status::Fail,
            },
        )
    })
}

/// `Q_{n0}[2..] == Q_{n0-1}` digit by digit.
fn semiconj_status(c: &HCandidate, n0: usize) -> Status {
    let (long, short) = (&c.rows[n0], &c.rows[n0 - 1]);
    if long.len() < 2 || long.len() - 2 != short.len() {
        return Status::Fail;
    }
    long[2..]
        .iter()
        .zip(short)
        .fold(Status::Pass, |st, (x, y)| {
            merge(
                st,
                match (x, y) {
                    (Some(p), Some(q)) if p == q => Status::Pass,
                    (Some(_), Some(_)) => Status::Fail,
                    _ => Status::Undetermined,
                },
            )
        })
}

fn zero_fixed_status(c: &HCandidate) -> Status {
    c.zero_image.iter().fold(Status::Pass, |st, d| {
        merge(
            st,
            match d {
                Some(0) => Status::Pass,
                Some(_) => Status::Fail,
                None => Status::Undetermined,
            },
        )
    })
}

/// Whether every extension of `lo` is strictly below every extension of `hi`.
///
/// Both prefixes are followed by arbitrary tails, so the order has to be settled
/// at a determined position before either prefix ends.
fn strictly_below(lo: &[Slot], hi: &[Slot]) -> Status {
    for (x, y) in lo.iter().zip(hi) {
        match (x, y) {
            (Some(p), Some(q)) => match p.cmp(q) {
                Ordering::Equal => continue,
                Ordering::Less => return Status::Pass,
                Ordering::Greater => return Status::Fail,
            },
            _ => return Status::Undetermined,
        }
    }
    Status::Fail
}

fn monotone_pair(c: &HCandidate, n: usize, m: usize) -> Status {
    debug_assert!(n > m);
    // 0^n 1 ... < 0^m 1 ... lexicographically
    strictly_below(&c.rows[n], &c.rows[m])
}

fn monotone_zero(c: &HCandidate, n: usize) -> Status {
    strictly_below(&c.zero_image, &c.rows[n])
}

/// Evaluates every hypothesis of the uniqueness statement on the table.
pub fn check_h_constraints(c: &HCandidate) -> Vec<Verdict> {
    let mut out = Vec::with_capacity(4);

    let st = anchor_status(c);
    out.push(Verdict {
        constraint: Constraint::Anchor,
        status: st,
        detail: format!("H(1x') prefix {:?}", digits_str(&c.rows[0])),
    });

    let mut st = Status::Pass;
    let mut detail = String::from("sigma^2 H(x) = H(sigma x) for n0 = 1..=L");
    for n0 in 1..=c.depth {
        let s = semiconj_status(c, n0);
        if s == Status::Fail && st != Status::Fail {
            detail = format!("fails at n0 = {n0}");
        }
        st = merge(st, s);
    }
    out.push(Verdict {
        constraint: Constraint::SemiConjugacy,
        status: st,
        detail,
    });

    out.push(Verdict {
        constraint: Constraint::ZeroFixed,
        status: zero_fixed_status(c),
        detail: format!("H(0^inf) prefix {:?}", digits_str(&c.zero_image)),
    });

    let mut st = Status::Pass;
    let mut detail = String::from("strict on all cylinder pairs within depth");
    for n in 0..=c.depth {
        let s = monotone_zero(c, n);
        if s == Status::Fail && st != Status::Fail {
            detail = format!("H(0^inf) not below H([0^{n} 1])");
        }
        st = merge(st, s);
        for m in 0..n {
            let s = monotone_pair(c, n, m);
            if s == Status::Fail && st != Status::Fail {
                detail = format!("H([0^{n} 1]) not below H([0^{m} 1])");
            }
            st = merge(st, s);
        }
    }
    out.push(Verdict {
        constraint: Constraint::Monotone,
        status: st,
        detail,
    });
    out
}

fn digits_str(s: &[Slot]) -> String {
    s.iter()
        .map(|d| match d {
            Some(0) => '0',
            Some(_) => '1',
            None => '?',
        })
        .collect()
}

/// Survivors of the exhaustive search and the number of nodes visited.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub survivors: Vec<HCandidate>,
    pub nodes: u64,
}

/// Backtracking search over the `2 n0` leading digits of `H(0^{n0} 1 x')`,
/// `n0 = 1..=depth`, whose remaining digits `0^a 1` follow from the anchor and
/// `sigma^{2 n0} o H = H o sigma^{n0}`.
///
/// Slots are filled row by row; the semi-conjugacy forces every digit beyond the
/// second of a row, and monotonicity against all completed rows prunes the rest.
pub fn enumerate_h(a: usize, depth: usize) -> Result<Enumeration> {
    enumerate_h_with_budget(a, depth, NODE_BUDGET)
}

pub fn enumerate_h_with_budget(a: usize, depth: usize, budget: u64) -> Result<Enumeration> {
    if !(1..=3).contains(&a) {
        return domain(format!("a = {a} outside {{1, 2, 3}}"));
    }
    if depth > MAX_DEPTH {
        return domain(format!("depth = {depth} exceeds {MAX_DEPTH}"));
    }
    let mut rows: Vec<Vec<Slot>> = Vec::with_capacity(depth + 1);
    rows.push(closed_form_row(a, 0).into_iter().map(Some).collect());
    for n0 in 1..=depth {
        let mut r = vec![None; 2 * n0];
        r.extend(std::iter::repeat_n(Some(0), a));
        r.push(Some(1));
        rows.push(r);
    }
    let mut cand = HCandidate {
        a,
        depth,
        rows,
        zero_image: vec![Some(0); 2 * depth + a + 1],
    };
    let slots: Vec<(usize, usize)> = (1..=depth)
        .flat_map(|n0| (0..2 * n0).map(move |i| (n0, i)))
        .collect();
    let mut search = Search {
        budget,
        nodes: 0,
        survivors: Vec::new(),
    };
    search.descend(&mut cand, &slots, 0)?;
    Ok(Enumeration {
        survivors: search.survivors,
        nodes: search.nodes,
    })
}

struct Search {
    budget: u64,
    nodes: u64,
    survivors: Vec<HCandidate>,
}

impl Search {
    fn descend(&mut self, c: &mut HCandidate, slots: &[(usize, usize)], k: usize) -> Result<()> {
        if k == slots.len() {
            if check_h_constraints(c).iter().all(Verdict::passed) {
                self.survivors.push(c.clone());
            }
            return Ok(());
        }
        let (n0, i) = slots[k];
        let choices: &[u8] = if i >= 2 {
            // forced by sigma^2 H = H sigma
            match c.rows[n0 - 1][i - 2] {
                Some(0) => &[0],
                Some(_) => &[1],
                None => &[0, 1],
            }
        } else {
            &[0, 1]
        };
        for &d in choices {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Resource(format!(
                    "search exceeded the node budget of {}",
                    self.budget
                )));
            }
            c.rows[n0][i] = Some(d);
            if self.consistent(c, n0) {
                self.descend(c, slots, k + 1)?;
            }
        }
        c.rows[n0][i] = None;
        Ok(())
    }

    /// Constraints touching row `n0` that are already violated.
    fn consistent(&self, c: &HCandidate, n0: usize) -> bool {
        if semiconj_status(c, n0) == Status::Fail {
            return false;
        }
        if monotone_zero(c, n0) == Status::Fail {
            return false;
        }
        (0..n0).all(|m| monotone_pair(c, n0, m) != Status::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass(c: &HCandidate) -> bool {
        check_h_constraints(c).iter().all(Verdict::passed)
    }

    fn verdict(c: &HCandidate, k: Constraint) -> Status {
        check_h_constraints(c)
            .into_iter()
            .find(|v| v.constraint == k)
            .unwrap()
            .status
    }

    #[test]
    fn proposition_map_passes() {
        for a in 1..=3 {
            assert!(all_pass(&HCandidate::proposition(a, 8)));
        }
    }

    #[test]
    fn off_by_one_fails_semiconjugacy() {
        let a = 1;
        let mut rows = vec![closed_form_row(a, 0)];
        rows.extend((1..=8).map(|n0| closed_form_row(a + 1, n0)));
        let c = HCandidate::from_rows(a, rows).unwrap();
        assert_eq!(verdict(&c, Constraint::SemiConjugacy), Status::Fail);
        assert_eq!(verdict(&c, Constraint::Anchor), Status::Pass);

        // shifted on every row, the anchor is what breaks
        let all = HCandidate::from_rows(a, (0..=8).map(|n0| closed_form_row(a + 1, n0)).collect())
            .unwrap();
        assert_eq!(verdict(&all, Constraint::Anchor), Status::Fail);
    }

    #[test]
    fn identity_fails_anchor() {
        let rows = (0..=8)
            .map(|n0| {
                let mut r = vec![0; n0];
                r.push(1);
                r
            })
            .collect();
        let c = HCandidate::from_rows(1, rows).unwrap();
        assert_eq!(verdict(&c, Constraint::Anchor), Status::Fail);
    }

    #[test]
    fn nonzero_zero_image_fails() {
        let c = HCandidate::proposition(2, 4).with_zero_image(vec![0, 0, 1, 0]);
        assert_eq!(verdict(&c, Constraint::ZeroFixed), Status::Fail);
    }

    #[test]
    fn prefix_rows_violate_monotonicity() {
        assert_eq!(
            strictly_below(&[Some(0), Some(1)], &[Some(0)]),
            Status::Fail
        );
        assert_eq!(
            strictly_below(&[Some(0)], &[Some(0), Some(1)]),
            Status::Fail
        );
        assert_eq!(
            strictly_below(&[None, Some(1)], &[Some(1)]),
            Status::Undetermined
        );
        assert_eq!(
            strictly_below(&[Some(0), Some(0)], &[Some(0), Some(1)]),
            Status::Pass
        );
    }

    #[test]
    fn partial_tables_are_undetermined() {
        let mut c = HCandidate::proposition(1, 3);
        c.rows[2][1] = None;
        assert!(!c.is_complete());
        assert_eq!(verdict(&c, Constraint::SemiConjugacy), Status::Undetermined);
    }

    #[test]
    fn unique_survivor_small_depths() {
        for a in 1..=3 {
            let mut prev: Option<HCandidate> = None;
            for depth in 1..=8 {
                let e = enumerate_h(a, depth).unwrap();
                assert_eq!(e.survivors.len(), 1, "a={a} depth={depth}");
                let s = &e.survivors[0];
                assert!(s.matches_proposition());
                if let Some(p) = &prev {
                    assert!(s.extends(p));
                }
                prev = Some(s.clone());
            }
        }
    }

    #[test]
    fn survivor_zero_runs() {
        let e = enumerate_h(2, 5).unwrap();
        let runs = e.survivors[0].zero_run_lengths();
        assert_eq!(runs, (0..=5).map(|n0| Some(2 * n0 + 2)).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_arguments_and_budget() {
        assert!(enumerate_h(0, 4).is_err());
        assert!(enumerate_h(4, 4).is_err());
        assert!(enumerate_h(1, 13).is_err());
        assert!(matches!(
            enumerate_h_with_budget(1, 6, 3),
            Err(Error::Resource(_))
        ));
    }
}
