//! Dense row-major tensors for signals, kernels and block stacks.

use crate::error::{structure_err, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Clone + Default> Tensor<T> {
    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![T::default(); n],
        }
    }
}

impl<T> Tensor<T> {
    pub fn new(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n == 0 {
            return Err(structure_err!("tensor dims {dims:?} must be non-empty and positive"));
        }
        if data.len() != n {
            return Err(structure_err!("{} values for dims {dims:?}", data.len()));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            crate::ring::increment(&mut idx, dims);
        }
        Self {
            dims: dims.to_vec(),
            data,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let k = self.flat_index(idx);
        self.data[k] = v;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Full linear convolution, output dims `a_i + b_i - 1`.
pub fn linear_convolution(a: &Tensor<i64>, b: &Tensor<i64>) -> Result<Tensor<i64>> {
    if a.dims.len() != b.dims.len() {
        return Err(structure_err!("rank {} vs {}", a.dims.len(), b.dims.len()));
    }
    let out_dims: Vec<usize> = a.dims.iter().zip(&b.dims).map(|(x, y)| x + y - 1).collect();
    let mut out = Tensor::zeros(&out_dims);
    let mut ia = vec![0; a.dims.len()];
    let mut pos = vec![0; a.dims.len()];
    for &va in &a.data {
        if va != 0 {
            let mut ib = vec![0; b.dims.len()];
            for &vb in &b.data {
                for k in 0..pos.len() {
                    pos[k] = ia[k] + ib[k];
                }
                let f = out.flat_index(&pos);
                out.data[f] += va * vb;
                crate::ring::increment(&mut ib, &b.dims);
            }
        }
        crate::ring::increment(&mut ia, &a.dims);
    }
    Ok(out)
}

/// Full cross-correlation `r[d] = sum_i a[i + d] b[i]`; lag `d` on axis `k`
/// ranges over `-(b_k - 1) ..= a_k - 1` and sits at output index `d + b_k - 1`.
pub fn linear_correlation(a: &Tensor<i64>, b: &Tensor<i64>) -> Result<Tensor<i64>> {
    linear_convolution(a, &reversed(b))
}

/// Index reversal along every axis.
pub fn reversed<T: Clone>(x: &Tensor<T>) -> Tensor<T> {
    Tensor::from_fn(&x.dims, |idx| {
        let r: Vec<usize> = idx.iter().zip(&x.dims).map(|(&i, &d)| d - 1 - i).collect();
        x.get(&r).clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let t = Tensor::new(vec![2, 3], (0..6).collect::<Vec<i64>>()).unwrap();
        assert_eq!(*t.get(&[1, 0]), 3);
        assert_eq!(*t.get(&[0, 2]), 2);
        assert!(Tensor::new(vec![2, 3], vec![0i64; 5]).is_err());
    }

    #[test]
    fn small_convolutions() {
        let a = Tensor::new(vec![3], vec![1i64, 2, 3]).unwrap();
        let b = Tensor::new(vec![2], vec![1i64, -1]).unwrap();
        assert_eq!(linear_convolution(&a, &b).unwrap().data(), &[1, 1, 1, -3]);
        // lags -1, 0, 1, 2
        assert_eq!(linear_correlation(&a, &b).unwrap().data(), &[-1, -1, -1, 3]);
        let x = Tensor::new(vec![2, 2], vec![1i64, 2, 3, 4]).unwrap();
        let one = Tensor::new(vec![1, 1], vec![1i64]).unwrap();
        assert_eq!(linear_convolution(&x, &one).unwrap(), x);
    }
}
