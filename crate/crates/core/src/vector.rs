//! Dense real vectors and the cosine measure used throughout the crate.

use alloc::vec::Vec;
use core::ops::Deref;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("component {index} is not finite")]
    NonFinite { index: usize },
}

/// A dense vector whose components are all finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, VectorError> {
        if let Some(index) = components.iter().position(|c| !c.is_finite()) {
            return Err(VectorError::NonFinite { index });
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(alloc::vec![0.0; dim])
    }

    pub(crate) fn from_finite(components: Vec<f64>) -> Self {
        debug_assert!(components.iter().all(|c| c.is_finite()));
        Vector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = VectorError;

    fn try_from(v: Vec<f64>) -> Result<Self, VectorError> {
        Vector::new(v)
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    libm::sqrt(dot(u, u))
}

/// Cosine from precomputed norms. A zero norm on either side yields 0.
#[inline]
pub(crate) fn cosine_with_norms(u: &[f64], v: &[f64], norm_u: f64, norm_v: f64) -> f64 {
    if norm_u == 0.0 || norm_v == 0.0 {
        return 0.0;
    }
    (dot(u, v) / (norm_u * norm_v)).clamp(-1.0, 1.0)
}

/// Cosine similarity `u·v / (|u| |v|)`, clamped to `[-1, 1]`.
///
/// Returns 0 when either vector has zero norm, so all-OOV posts (which pool
/// to the zero vector) stay usable downstream.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, VectorError> {
    if u.len() != v.len() {
        return Err(VectorError::DimMismatch { left: u.len(), right: v.len() });
    }
    Ok(cosine_with_norms(u, v, norm(u), norm(v)))
}

/// `1 - cosine_similarity(u, v)`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64, VectorError> {
    cosine_similarity(u, v).map(|s| 1.0 - s)
}
