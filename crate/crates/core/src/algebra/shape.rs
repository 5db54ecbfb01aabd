//! The ambient algebra: block dimensions and trace weights.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A finite-dimensional von Neumann algebra `⊕_j M_{n_j}(ℂ)` together with the
/// faithful trace `τ(x) = Σ_j w_j tr(x_j)`, `w_j > 0`.
///
/// `τ(1) = Σ_j w_j n_j` is finite by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraShape {
    #[serde(rename = "dims")]
    block_dims: Vec<usize>,
    #[serde(rename = "weights")]
    trace_weights: Vec<f64>,
    #[serde(skip)]
    tau_unit: f64,
    #[serde(skip)]
    total_dim: usize,
}

impl AlgebraShape {
    /// Build and validate a shape from block dimensions and trace weights.
    pub fn new(dims: Vec<usize>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no blocks".into()));
        }
        if dims.len() != weights.len() {
            return Err(Error::InvalidShape(format!(
                "{} dims vs {} weights",
                dims.len(),
                weights.len()
            )));
        }
        if let Some(j) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("block {j} has dimension 0")));
        }
        if let Some(j) = weights.iter().position(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidShape(format!(
                "weight {j} = {} is not a positive real",
                weights[j]
            )));
        }
        let mut shape = AlgebraShape {
            block_dims: dims,
            trace_weights: weights,
            tau_unit: 0.0,
            total_dim: 0,
        };
        shape.refresh_derived();
        Ok(Arc::new(shape))
    }

    /// The commutative model: `n` atoms of weight `1/n`, so `τ(1) = 1`.
    /// Discretizes `L¹([0,1])` at resolution `1/n`.
    pub fn discretized_interval(atoms: usize) -> Result<Arc<Self>> {
        if atoms == 0 {
            return Err(Error::InvalidShape("no atoms".into()));
        }
        Self::new(vec![1; atoms], vec![1.0 / atoms as f64; atoms])
    }

    pub(crate) fn refresh_derived(&mut self) {
        self.total_dim = self.block_dims.iter().sum();
        self.tau_unit = self
            .block_dims
            .iter()
            .zip(&self.trace_weights)
            .map(|(&n, &w)| w * n as f64)
            .sum();
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn trace_weights(&self) -> &[f64] {
        &self.trace_weights
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// `τ(1)`.
    pub fn tau_unit(&self) -> f64 {
        self.tau_unit
    }

    /// Sum of block dimensions.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// True when every block is one-dimensional (the commutative case); such
    /// elements are stored as a flat diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }
}

/// Value equality of shapes (serde round-trips break pointer identity).
pub fn same_shape(a: &Arc<AlgebraShape>, b: &Arc<AlgebraShape>) -> bool {
    Arc::ptr_eq(a, b) || (a.block_dims == b.block_dims && a.trace_weights == b.trace_weights)
}

pub(crate) fn check_same_shape(a: &Arc<AlgebraShape>, b: &Arc<AlgebraShape>) -> Result<()> {
    if same_shape(a, b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "dims {:?} vs {:?}",
            a.block_dims(),
            b.block_dims()
        )))
    }
}
