//! Dense complex square matrices of desk-scale size: determinants, permanents
//! and minors.

use num_complex::Complex64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// Matrix with row `row` and column `col` removed.
    pub fn minor(&self, row: usize, col: usize) -> SquareMatrix {
        let m = self.n - 1;
        let mut data = Vec::with_capacity(m * m);
        for i in (0..self.n).filter(|&i| i != row) {
            for j in (0..self.n).filter(|&j| j != col) {
                data.push(self.get(i, j));
            }
        }
        SquareMatrix { n: m, data }
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))
                .unwrap_or(k);
            if a[pivot * n + k].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                det = -det;
            }
            let akk = a[k * n + k];
            det *= akk;
            for i in (k + 1)..n {
                let factor = a[i * n + k] / akk;
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= factor * akj;
                }
            }
        }
        det
    }

    /// Permanent by Ryser's inclusion-exclusion formula, visiting column
    /// subsets in Gray-code order so each step updates the row sums by one
    /// column. `O(2^n n)`.
    pub fn permanent(&self) -> Complex64 {
        let n = self.n;
        if n == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
        let mut total = Complex64::new(0.0, 0.0);
        let mut subset: u64 = 0;
        for g in 1u64..(1u64 << n) {
            // Gray code g ^ (g >> 1) differs from its predecessor in bit `j`.
            let j = g.trailing_zeros() as usize;
            let entering = subset & (1 << j) == 0;
            subset ^= 1 << j;
            for (i, s) in row_sums.iter_mut().enumerate() {
                let v = self.get(i, j);
                if entering {
                    *s += v;
                } else {
                    *s -= v;
                }
            }
            let prod: Complex64 = row_sums.iter().product();
            // (-1)^{n - |S|}
            if (n - subset.count_ones() as usize).is_multiple_of(2) {
                total += prod;
            } else {
                total -= prod;
            }
        }
        total
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}
