use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::NnError;

/// Dense n-dimensional array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Tensor {
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor, NnError> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(NnError::Shape {
                context: "Tensor::from_vec",
                expected: vec![n],
                actual: vec![data.len()],
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Samples i.i.d. from N(0, std²).
    pub fn randn(shape: &[usize], std: f64, rng: &mut impl Rng) -> Tensor {
        let normal = Normal::new(0.0, std).expect("finite std");
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: (0..n).map(|_| normal.sample(rng)).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Tensor, NnError> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(NnError::Shape {
                context: "Tensor::reshape",
                expected: shape.to_vec(),
                actual: self.shape,
            });
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Stacks equally shaped tensors along a new leading axis.
    pub fn stack(items: &[&Tensor]) -> Result<Tensor, NnError> {
        let first = items.first().ok_or_else(|| NnError::Shape {
            context: "Tensor::stack",
            expected: vec![1],
            actual: vec![0],
        })?;
        let mut shape = vec![items.len()];
        shape.extend_from_slice(first.shape());
        let mut data = Vec::with_capacity(items.len() * first.len());
        for t in items {
            if t.shape() != first.shape() {
                return Err(NnError::Shape {
                    context: "Tensor::stack",
                    expected: first.shape().to_vec(),
                    actual: t.shape().to_vec(),
                });
            }
            data.extend_from_slice(t.data());
        }
        Ok(Tensor { shape, data })
    }
}
