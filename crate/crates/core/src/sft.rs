//! One-sided subshifts of finite type: blocks, enumeration, counting and the metrics d_θ.
//!
//! Symbols are 0-based internally and 1-based in text.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::spectra::TransitionMatrix;

/// Default cap on the number of blocks a single enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block(Vec<usize>);

impl Block {
    /// From 0-based symbols. Allowability is not checked.
    pub fn new(symbols: Vec<usize>) -> Block {
        assert!(!symbols.is_empty(), "blocks are nonempty");
        Block(symbols)
    }

    pub fn from_one_based(symbols: &[usize]) -> Result<Block> {
        if symbols.is_empty() {
            return Err(Error::NotAllowable("empty block".into()));
        }
        symbols
            .iter()
            .map(|&s| {
                s.checked_sub(1)
                    .ok_or(Error::SymbolOutOfRange { symbol: s, dim: 0 })
            })
            .collect::<Result<Vec<_>>>()
            .map(Block)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn child(&self, k: usize) -> Block {
        let mut s = self.0.clone();
        s.push(k);
        Block(s)
    }

    /// The shifted block σ(b), dropping the first symbol.
    pub fn shift(&self) -> Option<Block> {
        (self.0.len() > 1).then(|| Block(self.0[1..].to_vec()))
    }

    pub fn prefix(&self, len: usize) -> Block {
        Block(self.0[..len].to_vec())
    }

    pub fn prepend(&self, j: usize) -> Block {
        let mut s = Vec::with_capacity(self.0.len() + 1);
        s.push(j);
        s.extend_from_slice(&self.0);
        Block(s)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Block> {
        let symbols = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::NotAllowable(format!("cannot parse symbol {:?}", t)))
            })
            .collect::<Result<Vec<_>>>()?;
        Block::from_one_based(&symbols)
    }
}

/// The shift space over a transition matrix, with a metric base θ and a successor order.
#[derive(Debug, Clone)]
pub struct ShiftSpace {
    matrix: TransitionMatrix,
    theta: f64,
    order: Vec<Vec<usize>>,
    cap: u64,
}

impl ShiftSpace {
    pub fn new(matrix: TransitionMatrix, theta: f64) -> Result<ShiftSpace> {
        if !(theta > 1.0) || !theta.is_finite() {
            return Err(Error::InvalidMatrix(format!("metric base θ = {} must exceed 1", theta)));
        }
        let order = (0..matrix.dim()).map(|k| matrix.successors(k).to_vec()).collect();
        Ok(ShiftSpace {
            matrix,
            theta,
            order,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Replace the successor order; `order[k]` must be a permutation of the successors of `k`.
    pub fn with_order(mut self, order: Vec<Vec<usize>>) -> Result<ShiftSpace> {
        if order.len() != self.matrix.dim() {
            return Err(Error::InvalidMatrix(format!(
                "ordering has {} entries, expected {}",
                order.len(),
                self.matrix.dim()
            )));
        }
        for (k, o) in order.iter().enumerate() {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != self.matrix.successors(k) {
                return Err(Error::InvalidMatrix(format!(
                    "ordering for symbol {} is not a permutation of its successors",
                    k + 1
                )));
            }
        }
        self.order = order;
        Ok(self)
    }

    pub fn with_cap(mut self, cap: u64) -> ShiftSpace {
        self.cap = cap;
        self
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Successors of `k` in chart order.
    pub fn ordered_successors(&self, k: usize) -> &[usize] {
        &self.order[k]
    }

    pub fn order(&self) -> &[Vec<usize>] {
        &self.order
    }

    pub fn is_allowable(&self, symbols: &[usize]) -> Result<bool> {
        let d = self.dim();
        if let Some(&s) = symbols.iter().find(|&&s| s >= d) {
            return Err(Error::SymbolOutOfRange { symbol: s + 1, dim: d });
        }
        Ok(symbols.windows(2).all(|w| self.matrix.get(w[0], w[1])))
    }

    pub fn check(&self, b: &Block) -> Result<()> {
        if self.is_allowable(b.symbols())? {
            Ok(())
        } else {
            Err(Error::NotAllowable(b.to_string()))
        }
    }

    pub fn children(&self, b: &Block) -> Vec<Block> {
        self.order[b.last()].iter().map(|&k| b.child(k)).collect()
    }

    /// N⁽ⁿ⁾_j: the number of length-(n+1) blocks ending in `j`.
    pub fn count_blocks_ending_in(&self, n: usize, j: usize) -> BigUint {
        self.matrix.column_sum_counts(n)[j].clone()
    }

    /// Number of allowable blocks of length `n ≥ 1`.
    pub fn count_blocks(&self, n: usize) -> BigUint {
        self.matrix.column_sum_counts(n.saturating_sub(1)).into_iter().sum()
    }

    /// Number of allowable length-`n` blocks extending `prefix`.
    pub fn count_extensions(&self, prefix: &Block, n: usize) -> BigUint {
        if n <= prefix.len() {
            return BigUint::from(u8::from(n == prefix.len()));
        }
        let mut counts = vec![BigUint::from(0u8); self.dim()];
        counts[prefix.last()] = BigUint::from(1u8);
        for _ in prefix.len()..n {
            let mut next = vec![BigUint::from(0u8); self.dim()];
            for (i, c) in counts.iter().enumerate() {
                for &j in self.matrix.successors(i) {
                    next[j] += c;
                }
            }
            counts = next;
        }
        counts.into_iter().sum()
    }

    /// The number of forced steps from `j` before reaching a symbol with two or more successors.
    fn branching_delay(&self, j: usize) -> Option<usize> {
        let mut x = j;
        for m in 0..=self.dim() {
            if self.matrix.successors(x).len() >= 2 {
                return Some(m);
            }
            x = self.matrix.successors(x)[0];
        }
        None
    }

    /// Lower and upper bounds on the d_θ-diameter of `[b]`.
    ///
    /// The upper bound is θ^{1−ℓ}/(θ−1). The lower bound is θ^{−ℓ−m}, where m is the number
    /// of forced steps after the last symbol of `b`; m = 0 whenever that symbol branches.
    pub fn cylinder_diameter_bounds(&self, b: &Block) -> (f64, f64) {
        let l = b.len() as i32;
        let theta = self.theta;
        let upper = theta.powi(1 - l) / (theta - 1.0);
        let lower = match self.branching_delay(b.last()) {
            Some(m) => theta.powi(-l - m as i32),
            None => 0.0,
        };
        (lower, upper)
    }

    /// Exact d_θ-diameter of `[b]`, by value iteration over pairs of continuations.
    pub fn cylinder_diameter(&self, b: &Block) -> f64 {
        let d = self.dim();
        let theta = self.theta;
        let mut w = vec![0.0f64; d * d];
        for _ in 0..10_000 {
            let mut next = vec![0.0f64; d * d];
            let mut change = 0.0f64;
            for x in 0..d {
                for y in 0..d {
                    let mut best = 0.0f64;
                    for &xs in self.matrix.successors(x) {
                        for &ys in self.matrix.successors(y) {
                            let v = (f64::from(u8::from(xs != ys)) + w[xs * d + ys]) / theta;
                            best = best.max(v);
                        }
                    }
                    change = change.max((best - w[x * d + y]).abs());
                    next[x * d + y] = best;
                }
            }
            w = next;
            if change <= 1e-17 {
                break;
            }
        }
        theta.powi(1 - b.len() as i32) * w[b.last() * d + b.last()]
    }

    /// d_θ between two finite sequences, compared over their common length.
    pub fn distance(&self, s: &[usize], t: &[usize]) -> f64 {
        s.iter()
            .zip(t)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| self.theta.powi(-(i as i32)))
            .sum()
    }

    /// Extend `b` to length `len` by always taking the first successor in chart order.
    pub fn first_successor_extension(&self, b: &Block, len: usize) -> Block {
        let mut s = b.symbols().to_vec();
        while s.len() < len {
            let last = s[s.len() - 1];
            s.push(self.order[last][0]);
        }
        Block(s)
    }

    fn check_cap(&self, count: BigUint) -> Result<()> {
        if count > BigUint::from(self.cap) {
            return Err(Error::DepthTooLarge {
                count: count.to_string(),
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Every allowable length-`n` block, lexicographic in chart order (first symbols ascending).
    pub fn enumerate_blocks(&self, n: usize) -> Result<BlockIter<'_>> {
        if n == 0 {
            return Err(Error::NotAllowable("enumeration depth must be at least 1".into()));
        }
        self.check_cap(self.count_blocks(n))?;
        Ok(BlockIter::new(self, Vec::new(), n))
    }

    /// Every allowable length-`n` extension of `prefix`, in chart order.
    pub fn enumerate_extensions(&self, prefix: &Block, n: usize) -> Result<BlockIter<'_>> {
        self.check_cap(self.count_extensions(prefix, n))?;
        Ok(BlockIter::new(self, prefix.symbols().to_vec(), n))
    }

    /// Allocation-free traversal of the length-`n` extensions of `prefix` (all blocks if empty).
    pub fn visit_extensions<F: FnMut(&[usize])>(&self, prefix: &[usize], n: usize, f: &mut F) -> Result<()> {
        let count = if prefix.is_empty() {
            self.count_blocks(n)
        } else {
            self.count_extensions(&Block(prefix.to_vec()), n)
        };
        self.check_cap(count)?;
        let mut buf = prefix.to_vec();
        if buf.is_empty() {
            for j in 0..self.dim() {
                buf.push(j);
                self.visit_rec(&mut buf, n, f);
                buf.pop();
            }
        } else {
            self.visit_rec(&mut buf, n, f);
        }
        Ok(())
    }

    fn visit_rec<F: FnMut(&[usize])>(&self, buf: &mut Vec<usize>, n: usize, f: &mut F) {
        if buf.len() >= n {
            f(buf);
            return;
        }
        let last = buf[buf.len() - 1];
        for &k in &self.order[last] {
            buf.push(k);
            self.visit_rec(buf, n, f);
            buf.pop();
        }
    }

    /// Number of allowable words of each length `1..=max_len` starting with each symbol.
    pub(crate) fn words_from_table(&self, max_len: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut table = vec![vec![0.0; d]; max_len + 1];
        if max_len >= 1 {
            table[1] = vec![1.0; d];
        }
        for m in 2..=max_len {
            for j in 0..d {
                table[m][j] = self.matrix.successors(j).iter().map(|&k| table[m - 1][k]).sum();
            }
        }
        table
    }

    /// Position of `b` in the enumeration order of its length.
    pub fn rank(&self, b: &[usize]) -> usize {
        let n = b.len();
        let table = self.words_from_table(n);
        rank_with_table(&self.order, &table, b)
    }
}

pub(crate) fn rank_with_table(order: &[Vec<usize>], table: &[Vec<f64>], b: &[usize]) -> usize {
    let n = b.len();
    let mut r: f64 = (0..b[0]).map(|c| table[n][c]).sum();
    for i in 1..n {
        for &c in &order[b[i - 1]] {
            if c == b[i] {
                break;
            }
            r += table[n - i][c];
        }
    }
    r as usize
}

/// Streaming enumeration of blocks.
pub struct BlockIter<'a> {
    space: &'a ShiftSpace,
    n: usize,
    base: usize,
    current: Vec<usize>,
    // index into the successor list at each position past the prefix
    cursor: Vec<usize>,
    started: bool,
    done: bool,
}

impl<'a> BlockIter<'a> {
    fn new(space: &'a ShiftSpace, prefix: Vec<usize>, n: usize) -> BlockIter<'a> {
        let base = prefix.len();
        let done = n < base;
        BlockIter {
            space,
            n,
            base,
            current: prefix,
            cursor: Vec::new(),
            started: false,
            done,
        }
    }

    fn choices(&self, pos: usize) -> &[usize] {
        if pos == 0 {
            &ALL_SYMBOLS[..self.space.dim()]
        } else {
            self.space.ordered_successors(self.current[pos - 1])
        }
    }

    fn fill(&mut self) {
        while self.current.len() < self.n {
            let pos = self.current.len();
            let s = self.choices(pos)[0];
            self.current.push(s);
            self.cursor.push(0);
        }
    }

    fn advance(&mut self) -> bool {
        while let Some(c) = self.cursor.pop() {
            let pos = self.current.len() - 1;
            self.current.pop();
            let options = self.choices(pos);
            if c + 1 < options.len() {
                let s = options[c + 1];
                self.current.push(s);
                self.cursor.push(c + 1);
                self.fill();
                return true;
            }
        }
        false
    }
}

const ALL_SYMBOLS: [usize; 256] = {
    let mut a = [0usize; 256];
    let mut i = 0;
    while i < 256 {
        a[i] = i;
        i += 1;
    }
    a
};

impl Iterator for BlockIter<'_> {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill();
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        debug_assert!(self.current.len() == self.n && self.cursor.len() == self.n - self.base);
        Some(Block(self.current.clone()))
    }
}

/// Exact block count as `u64`, saturating.
pub fn count_to_u64(c: &BigUint) -> u64 {
    c.to_u64().unwrap_or(u64::MAX)
}
