//! Banded LU factorisation with partial pivoting.
//!
//! Storage keeps a fixed window of absolute columns per row position,
//! `[row - kl, row + kl + ku]`, which is exactly wide enough to absorb the
//! fill-in produced by row interchanges.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field element usable by the banded solver.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("banded matrix is singular at pivot {0}")]
pub struct SingularMatrix(pub usize);

#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
    pivots: Vec<usize>,
    factored: bool,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
            pivots: vec![0; n],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.kl >= row && col <= row + self.kl + self.ku);
        row * self.width + (col + self.kl - row)
    }

    /// Adds `value` to entry (row, col). The entry must lie inside the
    /// declared band `row - kl <= col <= row + ku`.
    pub fn add(&mut self, row: usize, col: usize, value: T) {
        assert!(
            col + self.kl >= row && col <= row + self.ku,
            "entry ({row},{col}) outside band"
        );
        let s = self.slot(row, col);
        self.data[s] = self.data[s] + value;
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        if col + self.kl < row || col > row + self.kl + self.ku {
            return T::zero();
        }
        self.data[self.slot(row, col)]
    }

    fn at(&self, row: usize, col: usize) -> T {
        self.data[self.slot(row, col)]
    }

    fn set(&mut self, row: usize, col: usize, v: T) {
        let s = self.slot(row, col);
        self.data[s] = v;
    }

    /// In-place LU factorisation.
    pub fn factor(&mut self) -> Result<(), SingularMatrix> {
        let n = self.n;
        for i in 0..n {
            let last_row = (i + self.kl).min(n - 1);
            let last_col = (i + self.kl + self.ku).min(n - 1);
            let mut p = i;
            let mut best = self.at(i, i).modulus();
            for q in i + 1..=last_row {
                let m = self.at(q, i).modulus();
                if m > best {
                    best = m;
                    p = q;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(SingularMatrix(i));
            }
            self.pivots[i] = p;
            if p != i {
                for c in i..=last_col {
                    let a = self.at(i, c);
                    let b = self.at(p, c);
                    self.set(i, c, b);
                    self.set(p, c, a);
                }
            }
            let pivot = self.at(i, i);
            for q in i + 1..=last_row {
                let m = self.at(q, i) / pivot;
                self.set(q, i, m);
                for c in i + 1..=last_col {
                    let v = self.at(q, c) - m * self.at(i, c);
                    self.set(q, c, v);
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place using the stored factorisation.
    pub fn solve_in_place(&self, b: &mut [T]) {
        assert!(self.factored, "solve called before factor");
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for i in 0..n {
            let p = self.pivots[i];
            if p != i {
                b.swap(i, p);
            }
            let bi = b[i];
            for q in i + 1..=(i + self.kl).min(n - 1) {
                b[q] = b[q] - self.at(q, i) * bi;
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for c in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                acc = acc - self.at(i, c) * b[c];
            }
            b[i] = acc / self.at(i, i);
        }
    }

    /// Dense matrix-vector product with the (unfactored) matrix.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert!(!self.factored);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).fold(T::zero(), |acc, c| acc + self.at(i, c) * x[c])
            })
            .collect()
    }
}
