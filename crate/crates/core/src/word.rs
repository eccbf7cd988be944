//! Points of `{0,1}^N` in run-length form.
//!
//! A word is the block sequence `(n0, n1, n2, ...)` of alternating 0-blocks and
//! 1-blocks, starting with a (possibly empty) 0-block, followed by an infinite
//! tail. Blocks may be infinite, which ends the sequence.

use std::cmp::Ordering;

use crate::error::{domain, Result};

/// A block of the run-length sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Finite(u64),
    Infinite,
}

/// The infinite suffix following the explicit blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    AllZeros,
    AllOnes,
    /// The listed blocks repeat forever; the period has an even number of blocks,
    /// all at least 1.
    PeriodicPad(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthWord {
    blocks: Vec<u64>,
    tail: Tail,
}

impl RunLengthWord {
    pub fn new(blocks: Vec<u64>, tail: Tail) -> Result<Self> {
        if blocks.iter().skip(1).any(|&b| b == 0) {
            return domain("only the leading 0-block may be empty");
        }
        if let Tail::PeriodicPad(period) = &tail {
            if blocks.is_empty() {
                return domain("a periodic tail needs an explicit leading block");
            }
            if period.is_empty() || period.len() % 2 != 0 || period.contains(&0) {
                return domain("the period needs an even, positive number of non-empty blocks");
            }
        }
        Ok(Self { blocks, tail })
    }

    /// `0^inf`.
    pub fn zeros() -> Self {
        Self {
            blocks: Vec::new(),
            tail: Tail::AllZeros,
        }
    }

    /// `1^inf`.
    pub fn ones() -> Self {
        Self {
            blocks: vec![0],
            tail: Tail::AllOnes,
        }
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Digit of the tail when it is constant.
    fn tail_digit(&self) -> Option<usize> {
        match self.tail {
            Tail::AllZeros => Some(0),
            Tail::AllOnes => Some(1),
            Tail::PeriodicPad(_) => None,
        }
    }

    /// The `i`-th block, `None` once an infinite block has ended the sequence.
    /// Even indices are 0-blocks, odd indices 1-blocks.
    pub fn block(&self, i: usize) -> Option<Block> {
        let len = self.blocks.len();
        match &self.tail {
            Tail::PeriodicPad(period) => Some(Block::Finite(if i < len {
                self.blocks[i]
            } else {
                period[(i - len) % period.len()]
            })),
            _ => {
                let digit = self.tail_digit().expect("constant tail");
                // The tail absorbs the last explicit block when they carry the same digit.
                let absorbed = len > 0 && (len - 1) % 2 == digit;
                let infinite_at = if absorbed { len - 1 } else { len };
                match i.cmp(&infinite_at) {
                    Ordering::Less => Some(Block::Finite(self.blocks[i])),
                    Ordering::Equal => {
                        if i == 0 && digit == 1 {
                            // empty leading 0-block before 1^inf
                            Some(Block::Finite(0))
                        } else {
                            Some(Block::Infinite)
                        }
                    }
                    Ordering::Greater => {
                        if infinite_at == 0 && digit == 1 && i == 1 {
                            Some(Block::Infinite)
                        } else {
                            None
                        }
                    }
                }
            }
        }
    }

    /// Iterator over the block sequence (infinite for periodic tails).
    pub fn block_iter(&self) -> impl Iterator<Item = Block> + '_ {
        (0..).map_while(move |i| self.block(i))
    }

    /// `n0`, the length of the leading 0-block.
    pub fn leading_zeros(&self) -> Block {
        self.block(0).expect("a word always has a leading block")
    }

    /// The first `len` binary digits.
    pub fn digits(&self, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        for (i, b) in self.block_iter().enumerate() {
            let digit = (i % 2) as u8;
            match b {
                Block::Finite(n) => {
                    let take = (n as usize).min(len - out.len());
                    out.extend(std::iter::repeat_n(digit, take));
                }
                Block::Infinite => out.resize(len, digit),
            }
            if out.len() >= len {
                break;
            }
        }
        out
    }

    /// Lexicographic comparison of the first `len` digits.
    pub fn cmp_prefix(&self, other: &Self, len: usize) -> Ordering {
        self.digits(len).cmp(&other.digits(len))
    }

    /// The suffix starting at block `k` (`k` even, so block types are preserved).
    fn drop_blocks(&self, k: usize) -> Self {
        debug_assert!(k.is_multiple_of(2));
        let mut blocks = self.blocks.clone();
        if let Tail::PeriodicPad(period) = &self.tail {
            while blocks.len() <= k {
                blocks.extend_from_slice(period);
            }
        }
        let rest = if k <= blocks.len() {
            blocks[k..].to_vec()
        } else {
            Vec::new()
        };
        Self {
            blocks: rest,
            tail: self.tail.clone(),
        }
    }

    /// The left shift `sigma`.
    pub fn shift_left(&self) -> Self {
        match self.leading_zeros() {
            Block::Infinite => self.clone(),
            Block::Finite(n0) if n0 > 0 => {
                let mut w = self.clone();
                if w.blocks.is_empty() {
                    // only possible for a constant tail absorbing nothing
                    unreachable!("finite leading block is always explicit");
                }
                w.blocks[0] -= 1;
                w
            }
            Block::Finite(_) => match self.block(1) {
                Some(Block::Infinite) | None => self.clone(),
                Some(Block::Finite(n1)) if n1 > 1 => {
                    let mut w = self.clone();
                    if w.blocks.len() < 2 {
                        if let Tail::PeriodicPad(period) = &self.tail {
                            w.blocks.extend_from_slice(period);
                        }
                    }
                    w.blocks[1] -= 1;
                    w
                }
                Some(Block::Finite(_)) => self.drop_blocks(2),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(blocks: &[u64], tail: Tail) -> RunLengthWord {
        RunLengthWord::new(blocks.to_vec(), tail).unwrap()
    }

    #[test]
    fn validation() {
        assert!(RunLengthWord::new(vec![0, 0], Tail::AllZeros).is_err());
        assert!(RunLengthWord::new(vec![1], Tail::PeriodicPad(vec![1])).is_err());
        assert!(RunLengthWord::new(vec![], Tail::PeriodicPad(vec![1, 1])).is_err());
        assert!(RunLengthWord::new(vec![1], Tail::PeriodicPad(vec![1, 0])).is_err());
        assert!(RunLengthWord::new(vec![0, 3], Tail::PeriodicPad(vec![1, 2])).is_ok());
    }

    #[test]
    fn constant_words() {
        assert_eq!(RunLengthWord::zeros().digits(5), vec![0; 5]);
        assert_eq!(RunLengthWord::ones().digits(5), vec![1; 5]);
        assert_eq!(RunLengthWord::zeros().leading_zeros(), Block::Infinite);
        assert_eq!(RunLengthWord::ones().leading_zeros(), Block::Finite(0));
        assert_eq!(RunLengthWord::ones().block(1), Some(Block::Infinite));
        assert_eq!(w(&[0], Tail::AllOnes).digits(4), vec![1; 4]);
        assert_eq!(w(&[0], Tail::AllZeros).leading_zeros(), Block::Infinite);
        assert_eq!(w(&[], Tail::AllOnes).block(1), Some(Block::Infinite));
    }

    #[test]
    fn tail_absorbs_matching_block() {
        // 0 1 1 0 0 0 ... : blocks (1, 2, inf)
        let x = w(&[1, 2, 5], Tail::AllZeros);
        let seq: Vec<_> = x.block_iter().collect();
        assert_eq!(
            seq,
            vec![Block::Finite(1), Block::Finite(2), Block::Infinite]
        );
        let y = w(&[1, 2], Tail::AllZeros);
        assert_eq!(y.block_iter().collect::<Vec<_>>(), seq);
        assert_eq!(x.digits(6), vec![0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn periodic_digits() {
        let x = w(&[2], Tail::PeriodicPad(vec![1, 1]));
        assert_eq!(x.digits(8), vec![0, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn shift_matches_digit_shift() {
        let words = vec![
            w(&[3, 1, 2], Tail::AllOnes),
            w(&[0, 1, 2, 3], Tail::AllZeros),
            w(&[0, 4, 1], Tail::PeriodicPad(vec![2, 3])),
            w(&[0, 1], Tail::PeriodicPad(vec![1, 2])),
            w(&[0], Tail::PeriodicPad(vec![1, 1])),
            w(&[1], Tail::AllOnes),
            w(&[0, 1], Tail::AllZeros),
            RunLengthWord::zeros(),
            RunLengthWord::ones(),
        ];
        for x in words {
            let mut cur = x.clone();
            let mut digits = x.digits(40);
            for _ in 0..10 {
                cur = cur.shift_left();
                digits.remove(0);
                assert_eq!(cur.digits(30), digits[..30].to_vec(), "{x:?} -> {cur:?}");
            }
        }
    }

    #[test]
    fn lexicographic_compare() {
        let a = w(&[2], Tail::AllOnes);
        let b = w(&[1], Tail::AllOnes);
        assert_eq!(a.cmp_prefix(&b, 10), Ordering::Less);
    }
}
