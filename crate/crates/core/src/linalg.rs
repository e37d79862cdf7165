//! Banded LU with partial pivoting for the stiffness and Newton systems.

use crate::error::{Error, Result};

/// Square matrix with equal lower and upper half-bandwidth `bw`, stored with
/// room for the `bw` extra superdiagonals that row pivoting can fill in.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let width = 3 * bw + 1;
        BandMatrix {
            n,
            bw,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.bw >= i && j <= i + 2 * self.bw);
        i * self.width + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + 2 * self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.bw >= i && j <= i + self.bw,
            "entry ({i},{j}) outside band {}",
            self.bw
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Replaces row and column `i` by the identity (Dirichlet row).
    pub fn pin(&mut self, i: usize) {
        let lo = i.saturating_sub(self.bw);
        let hi = (i + self.bw).min(self.n - 1);
        for j in lo..=hi {
            let s = self.slot(i, j);
            self.data[s] = 0.0;
            let s = self.slot(j, i);
            self.data[s] = 0.0;
        }
        let s = self.slot(i, i);
        self.data[s] = 1.0;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let bw = self.bw;
        let mut pivots = Vec::with_capacity(n);
        let scale = self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for k in 0..n {
            let last_row = (k + bw).min(n - 1);
            let last_col = (k + 2 * bw).min(n - 1);
            let (mut piv, mut best) = (k, self.get(k, k).abs());
            for i in k + 1..=last_row {
                let a = self.get(i, k).abs();
                if a > best {
                    piv = i;
                    best = a;
                }
            }
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(Error::Singular(k));
            }
            if piv != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(piv, j);
                    self.data.swap(a, b);
                }
            }
            pivots.push(piv);
            let d = self.get(k, k);
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let m = self.data[s] / d;
                self.data[s] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let ukj = self.data[self.slot(k, j)];
                        if ukj != 0.0 {
                            let t = self.slot(i, j);
                            self.data[t] -= m * ukj;
                        }
                    }
                }
            }
        }
        Ok(BandLu { a: self, pivots })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    a: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.a.n;
        let bw = self.a.bw;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + bw).min(n - 1) {
                    b[i] -= self.a.data[self.a.slot(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + 2 * bw).min(n - 1) {
                s -= self.a.data[self.a.slot(k, j)] * b[j];
            }
            b[k] = s / self.a.data[self.a.slot(k, k)];
        }
    }
}
