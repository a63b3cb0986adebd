//! Dense matrices over a field and exact nullspace computation.

use crate::field::{Field, PrimeField};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: Field> {
    pub field: F,
    pub rows: usize,
    pub cols: usize,
    data: Vec<F::E>,
}

pub type FpMatrix = Matrix<PrimeField>;

impl<F: Field> Matrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Matrix { field, rows, cols, data }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = m.field.one();
        }
        m
    }

    pub fn from_rows(field: F, rows: Vec<Vec<F::E>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { field, rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::E {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F::E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[F::E]) -> Vec<F::E> {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let f = &self.field;
        let mut out = Matrix::zeros(f.clone(), self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..o.cols {
                    let v = f.add(out.get(i, j), &f.mul(a, o.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !f.is_zero(self.get(i, c))) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in c..cols {
                let v = f.mul(self.get(r, j), &inv);
                self.set(r, j, v);
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for j in c..cols {
                    let v = f.sub(self.get(i, j), &f.mul(&factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel, one vector per free column, in column order.
    pub fn nullspace(&self) -> Vec<Vec<F::E>> {
        let f = &self.field;
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self · x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[F::E]) -> Option<Vec<F::E>> {
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field.clone(), n, self.cols + 1);
        for i in 0..n {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let piv = aug.rref();
        if piv.len() != self.cols || piv.contains(&self.cols) {
            return None;
        }
        Some((0..self.cols).map(|i| aug.get(i, self.cols).clone()).collect())
    }
}

/// Right kernel of `m`; empty iff `m` has full column rank.
pub fn nullspace<F: Field>(m: &Matrix<F>) -> Vec<Vec<F::E>> {
    m.nullspace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_has_trivial_kernel() {
        let f = PrimeField::new(32749).unwrap();
        assert!(Matrix::identity(f, 3).nullspace().is_empty());
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let f = PrimeField::new(32749).unwrap();
        assert_eq!(Matrix::zeros(f, 2, 3).nullspace().len(), 3);
    }

    #[test]
    fn planted_rank_50_of_60() {
        let f = PrimeField::new(32749).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // rows are random combinations of 50 random vectors in a 60-space
        let gen: Vec<Vec<u64>> = (0..50).map(|_| (0..60).map(|_| rng.gen_range(0..32749)).collect()).collect();
        let mix = Matrix::from_rows(f, (0..50).map(|_| (0..50).map(|_| rng.gen_range(0..32749)).collect()).collect());
        let m = mix.mul(&Matrix::from_rows(f, gen));
        assert_eq!(m.rank(), 50);
        let ker = m.nullspace();
        assert_eq!(ker.len(), 10);
        for v in &ker {
            assert!(m.mul_vec(v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn solve_square_system() {
        let f = PrimeField::new(101).unwrap();
        let m = Matrix::from_rows(f, vec![vec![2, 1], vec![1, 3]]);
        let x = m.solve(&[5, 10]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![5, 10]);
    }
}
