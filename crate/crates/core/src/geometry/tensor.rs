use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Dense coordinate tensor with every index ranging over `0..dim`.
///
/// Storage is row-major in the index order as written, e.g. `t[[i, j, k, l]]`.
/// Index positions (up or down) are a matter of convention at each call
/// site; the type only carries the shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorOf<T> {
    dim: usize,
    rank: usize,
    data: Vec<T>,
}

pub type Tensor = TensorOf<f64>;

impl<T: Clone> TensorOf<T> {
    pub fn filled(dim: usize, rank: usize, value: T) -> Self {
        TensorOf {
            dim,
            rank,
            data: vec![value; dim.pow(rank as u32)],
        }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = dim.pow(rank as u32);
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; rank];
        for _ in 0..len {
            data.push(f(&idx));
            for slot in (0..rank).rev() {
                idx[slot] += 1;
                if idx[slot] < dim {
                    break;
                }
                idx[slot] = 0;
            }
        }
        TensorOf { dim, rank, data }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> TensorOf<U> {
        TensorOf {
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> TensorOf<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let k = self.offset(idx);
        &mut self.data[k]
    }
}

impl Tensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Tensor::filled(dim, rank, 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        self.map(|x| x * s)
    }

    /// Elementwise `self - other`.
    pub fn minus(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.data.len(), other.data.len());
        TensorOf {
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        assert_eq!(self.rank, 2);
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Tensor {
        let n = m.nrows();
        Tensor::from_fn(n, 2, |ix| m[(ix[0], ix[1])])
    }
}

impl<T, const R: usize> Index<[usize; R]> for TensorOf<T> {
    type Output = T;

    fn index(&self, idx: [usize; R]) -> &T {
        self.get(&idx)
    }
}

impl<T, const R: usize> IndexMut<[usize; R]> for TensorOf<T> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut T {
        self.get_mut(&idx)
    }
}
