//! The three-fold coupling λ of a commuting pair.
//!
//! For each point `x`, couple the conditional measures of the two orbit
//! partitions with the point mass at `x`:
//!
//! ```text
//! λ_x = μ_{σ(x)} × μ_{τ(x)} × δ_x ,      λ = ∫ λ_x dμ(x)
//! ```
//!
//! where `σ(x)` is the `S`-orbit block of `x` and `τ(x)` the `T`-orbit
//! block. λ is a probability measure on triples `(z₁, z₂, x)` whose defining
//! property is one-sided invariance: `T×id×T` and `id×S×S` both preserve it
//! — *exactly*, even in floating point, because weight preservation forces
//! the weights to be constant on orbits, so the mapped weight components are
//! bitwise the originals. Equivalently, λ integrates tensors by
//! `∫ f₁⊗f₂⊗f₃ dλ = ∫ E(f₁|I_S) · E(f₂|I_T) · f₃ dμ`.

use crate::action::{CommutingPair, Permutation};
use crate::error::{Error, Result};
use crate::scalar::{acc_sum, Accumulator, Scalar};
use crate::space::{disintegration, Observable};

/// A measure on triples `(z₁, z₂, x)` of points, stored in lexicographic
/// `(x, z₁, z₂)` order of its support.
#[derive(Debug, Clone)]
pub struct TripleMeasure<S: Scalar> {
    base_n: usize,
    support: Vec<(usize, usize, usize)>,
    weights: Vec<S>,
}

impl<S: Scalar> PartialEq for TripleMeasure<S> {
    fn eq(&self, other: &Self) -> bool {
        self.base_n == other.base_n
            && self.support == other.support
            && self.weights == other.weights
    }
}

impl<S: Scalar> TripleMeasure<S> {
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Support triples `(z₁, z₂, x)` in lexicographic `(x, z₁, z₂)` order.
    pub fn support(&self) -> &[(usize, usize, usize)] {
        &self.support
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn total_mass(&self) -> S {
        acc_sum(self.weights.iter().cloned())
    }

    /// The weight of `(z₁, z₂, x)`, if it is in the support.
    pub fn weight_of(&self, z1: usize, z2: usize, x: usize) -> Option<&S> {
        self.support
            .binary_search_by_key(&(x, z1, z2), |&(a, b, c)| (c, a, b))
            .ok()
            .map(|i| &self.weights[i])
    }

    /// `∫ f₁(z₁) f₂(z₂) f₃(x) dλ`.
    pub fn integrate_tensor(
        &self,
        f1: &Observable<S>,
        f2: &Observable<S>,
        f3: &Observable<S>,
    ) -> Result<S> {
        for f in [f1, f2, f3] {
            if f.len() != self.base_n {
                return Err(Error::LengthMismatch {
                    expected: self.base_n,
                    got: f.len(),
                });
            }
        }
        let mut acc = S::Acc::default();
        for (&(z1, z2, x), w) in self.support.iter().zip(&self.weights) {
            acc.add(
                w.clone()
                    * f1.value(z1).clone()
                    * f2.value(z2).clone()
                    * f3.value(x).clone(),
            );
        }
        Ok(acc.finish())
    }

    /// The image measure under `(z₁, z₂, x) ↦ (p₁z₁, p₂z₂, p₃x)`, with the
    /// weights carried along and the support re-sorted canonically. Equal
    /// (by `==`) to the original exactly when the map preserves the measure.
    pub fn pushforward(
        &self,
        p1: &Permutation,
        p2: &Permutation,
        p3: &Permutation,
    ) -> Result<TripleMeasure<S>> {
        for p in [p1, p2, p3] {
            if p.n() != self.base_n {
                return Err(Error::LengthMismatch {
                    expected: self.base_n,
                    got: p.n(),
                });
            }
        }
        let mut entries: Vec<((usize, usize, usize), S)> = self
            .support
            .iter()
            .zip(&self.weights)
            .map(|(&(z1, z2, x), w)| ((p1.apply(z1), p2.apply(z2), p3.apply(x)), w.clone()))
            .collect();
        entries.sort_by_key(|&((z1, z2, x), _)| (x, z1, z2));
        let (support, weights) = entries.into_iter().unzip();
        Ok(TripleMeasure {
            base_n: self.base_n,
            support,
            weights,
        })
    }
}

/// Builds λ for the pair (see the module overview).
pub fn lambda_measure<S: Scalar>(pair: &CommutingPair<S>) -> Result<TripleMeasure<S>> {
    let space = pair.space();
    let dis_s = disintegration(space, &pair.s().orbit_partition())?;
    let dis_t = disintegration(space, &pair.t().orbit_partition())?;
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for x in 0..space.n() {
        let mu_x = space.weight(x);
        for &(z1, ref w1) in dis_s.measure_at(x) {
            for &(z2, ref w2) in dis_t.measure_at(x) {
                support.push((z1, z2, x));
                weights.push(w1.clone() * w2.clone() * mu_x.clone());
            }
        }
    }
    Ok(TripleMeasure {
        base_n: space.n(),
        support,
        weights,
    })
}
