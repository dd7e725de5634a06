//! Banded LU with partial pivoting.
//!
//! Nodal matrices of crossbars are banded when nodes are numbered cell by
//! cell, so the factorization costs `n * kl * (kl + ku)` instead of `n^3`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Row {
    start: usize,
    vals: Vec<f64>,
}

impl Row {
    #[inline]
    fn end(&self) -> usize {
        self.start + self.vals.len()
    }

    #[inline]
    fn get(&self, c: usize) -> f64 {
        if c >= self.start && c < self.end() {
            self.vals[c - self.start]
        } else {
            0.0
        }
    }
}

/// Square matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<Row>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let start = i.saturating_sub(kl);
                let end = (i + ku + 1).min(n);
                Row {
                    start,
                    vals: vec![0.0; end - start],
                }
            })
            .collect();
        BandMatrix { n, kl, ku, rows }
    }

    pub fn dense(n: usize) -> Self {
        let b = n.saturating_sub(1);
        Self::new(n, b, b)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Accumulate `v` into entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &mut self.rows[i];
        assert!(
            j >= row.start && j < row.end(),
            "entry ({i}, {j}) outside band (kl={}, ku={})",
            self.kl,
            self.ku
        );
        row.vals[j - row.start] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].get(j)
    }

    pub fn clear(&mut self) {
        for r in &mut self.rows {
            r.vals.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// Solve `A x = b`, consuming the matrix.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut rhs = b.to_vec();
        for k in 0..n {
            let last = (k + self.kl + 1).min(n);
            let mut piv = k;
            let mut best = self.rows[k].get(k).abs();
            for j in k + 1..last {
                let a = self.rows[j].get(k).abs();
                if a > best {
                    best = a;
                    piv = j;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Domain("singular nodal matrix"));
            }
            if piv != k {
                self.rows.swap(k, piv);
                rhs.swap(k, piv);
            }
            let (head, tail) = self.rows.split_at_mut(k + 1);
            let pivot_row = &head[k];
            let akk = pivot_row.get(k);
            for (off, row) in tail.iter_mut().take(last - k - 1).enumerate() {
                if row.start > k {
                    continue;
                }
                let m = row.get(k) / akk;
                if m == 0.0 {
                    continue;
                }
                if row.end() < pivot_row.end() {
                    let new_len = pivot_row.end() - row.start;
                    row.vals.resize(new_len, 0.0);
                }
                for c in k..pivot_row.end() {
                    row.vals[c - row.start] -= m * pivot_row.vals[c - pivot_row.start];
                }
                rhs[k + 1 + off] -= m * rhs[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let row = &self.rows[k];
            let mut acc = rhs[k];
            for c in k + 1..row.end() {
                acc -= row.vals[c - row.start] * x[c];
            }
            x[k] = acc / row.get(k);
        }
        Ok(x)
    }
}
