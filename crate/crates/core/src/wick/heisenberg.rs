use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// `(w, c)` in `C^n x R` with `(w,c)(w',c') = (w+w', c+c'+Im(conj(w).w'))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize, T::Real: Serialize", deserialize = "T: Deserialize<'de>, T::Real: Deserialize<'de>"))]
pub struct HeisenbergElement<T: Scalar> {
    pub w: Vec<T>,
    pub c: T::Real,
}

impl<T: Scalar> HeisenbergElement<T> {
    pub fn new(w: Vec<T>, c: T::Real) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { w, c })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            w: vec![T::zero(); n],
            c: T::Real::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn inverse(&self) -> Self {
        Self {
            w: self.w.iter().map(|x| -x.clone()).collect(),
            c: -self.c.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        let w = self
            .w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        let c = self.c.clone() + other.c.clone() + cocycle(&self.w, &other.w);
        Ok(Self { w, c })
    }

    /// `(t w, t c)`: the one-parameter subgroup through `self`.
    pub fn scaled(&self, t: &T::Real) -> Self {
        Self {
            w: self.w.iter().map(|x| x.scale(t)).collect(),
            c: self.c.clone() * t.clone(),
        }
    }
}

/// `Im(conj(w) . v)`.
pub fn cocycle<T: Scalar>(w: &[T], v: &[T]) -> T::Real {
    w.iter()
        .zip(v)
        .fold(T::zero(), |acc, (a, b)| acc + a.conj() * b.clone())
        .im()
}
