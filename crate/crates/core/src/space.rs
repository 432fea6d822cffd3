//! Finite probability spaces and the conditional-expectation toolkit.
//!
//! A space is a finite set `{0, …, n-1}` carrying strictly positive weights
//! that sum to one. Strict positivity removes every null-set caveat: two
//! observables are equal iff they are equal at every point, and conditioning
//! on a partition is plain block averaging,
//!
//! ```text
//! E(f | P)(x) = Σ_{y ∈ B(x)} μ(y) f(y) / μ(B(x)),
//! ```
//!
//! where `B(x)` is the block containing `x`. The disintegration over a
//! partition assigns to each point the normalized restriction of the measure
//! to its block, and the relative product over a partition `P` couples two
//! copies of the space along `P`:
//!
//! ```text
//! (μ ×_P μ)(w, z) = μ(w) μ(z) / μ(B(w))   whenever B(w) = B(z).
//! ```
//!
//! Together these satisfy `∫ f ⊗ g d(μ ×_P μ) = ∫ E(f|P) E(g|P) dμ`, the
//! identity that powers the exact limit computations in [`crate::averages`].

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{acc_sum, Accumulator, Scalar};

/// Tolerance for "weights sum to one" checks.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A finite probability space with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<S: Scalar> {
    weights: Vec<S>,
}

impl<S: Scalar> FiniteSpace<S> {
    /// Validates positivity and total mass.
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid_parameter("a space needs at least one point"));
        }
        for (index, w) in weights.iter().enumerate() {
            if w.as_positive_real().is_none() {
                return Err(Error::NonPositiveWeight { index });
            }
        }
        let sum = acc_sum(weights.iter().cloned());
        let defect = (sum.clone() - S::one()).abs_sq().sqrt();
        if defect > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightSum {
                sum: sum.to_f64(),
                tol: WEIGHT_SUM_TOLERANCE,
            });
        }
        Ok(Self { weights })
    }

    /// The uniform space on `n` points, with exactly representable weights
    /// where the scalar allows it.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid_parameter("a space needs at least one point"));
        }
        Self::new(vec![S::from_ratio(1, n as i64); n])
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, x: usize) -> &S {
        &self.weights[x]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Mass of an index set, summed in ascending index order.
    pub fn mass(&self, points: impl IntoIterator<Item = usize>) -> S {
        acc_sum(points.into_iter().map(|x| self.weights[x].clone()))
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n(),
                got: len,
            })
        }
    }
}

/// A scalar-valued function on a [`FiniteSpace`]. Complex values are
/// supported via the scalar parameter; real is the common case.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> Observable<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: S) -> Self {
        Self {
            values: vec![value; n],
        }
    }

    /// Indicator of an index set.
    pub fn indicator(n: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut values = vec![S::zero(); n];
        for x in points {
            values[x] = S::one();
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, x: usize) -> &S {
        &self.values[x]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() * b.clone())
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        ))
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self::new(
            self.values
                .iter()
                .map(|v| v.clone() * factor.clone())
                .collect(),
        )
    }
}

/// A set partition of `{0, …, n-1}` with contiguously numbered blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Builds a partition from a block-id vector. Ids must be exactly
    /// `{0, …, k-1}` with every block nonempty.
    pub fn from_block_ids(block_of: Vec<usize>) -> Result<Self> {
        if block_of.is_empty() {
            return Err(Error::InvalidPartition {
                reason: "empty ground set".into(),
            });
        }
        let blocks = block_of.iter().max().copied().unwrap_or(0) + 1;
        let mut seen = vec![false; blocks];
        for &b in &block_of {
            seen[b] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition {
                reason: format!("block id {missing} is unused"),
            });
        }
        Ok(Self { block_of, blocks })
    }

    /// Builds a partition from explicit blocks, which must cover every point
    /// exactly once.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (id, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition {
                    reason: format!("block {id} is empty"),
                });
            }
            for &x in block {
                if x >= n {
                    return Err(Error::InvalidPartition {
                        reason: format!("point {x} is out of range"),
                    });
                }
                if block_of[x] != usize::MAX {
                    return Err(Error::InvalidPartition {
                        reason: format!("point {x} is covered twice"),
                    });
                }
                block_of[x] = id;
            }
        }
        if let Some(x) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition {
                reason: format!("point {x} is uncovered"),
            });
        }
        Ok(Self {
            block_of,
            blocks: blocks.len(),
        })
    }

    /// Every point in its own block.
    pub fn discrete(n: usize) -> Self {
        Self {
            block_of: (0..n).collect(),
            blocks: n,
        }
    }

    /// A single block containing everything.
    pub fn trivial(n: usize) -> Self {
        Self {
            block_of: vec![0; n],
            blocks: if n == 0 { 0 } else { 1 },
        }
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn block_ids(&self) -> &[usize] {
        &self.block_of
    }

    /// Members of each block, in ascending point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (x, &b) in self.block_of.iter().enumerate() {
            out[b].push(x);
        }
        out
    }

    /// True when every block of `self` is contained in a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let mut image: Vec<Option<usize>> = vec![None; self.blocks];
        for (x, &b) in self.block_of.iter().enumerate() {
            match image[b] {
                None => image[b] = Some(other.block_of[x]),
                Some(t) if t == other.block_of[x] => {}
                Some(_) => return false,
            }
        }
        true
    }

    /// Coarsest partition refining both inputs (blockwise intersection).
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        let mut ids = HashMap::new();
        let mut block_of = Vec::with_capacity(self.n());
        for x in 0..self.n() {
            let key = (self.block_of[x], other.block_of[x]);
            let next = ids.len();
            block_of.push(*ids.entry(key).or_insert(next));
        }
        let blocks = ids.len();
        Ok(Partition { block_of, blocks })
    }
}

/// `∫ f dμ`.
pub fn integral<S: Scalar>(space: &FiniteSpace<S>, f: &Observable<S>) -> Result<S> {
    space.check_len(f.len())?;
    Ok(acc_sum(
        (0..space.n()).map(|x| space.weight(x).clone() * f.value(x).clone()),
    ))
}

/// `⟨f, g⟩ = Σ μ(x) f(x) conj(g(x))`.
pub fn inner_product<S: Scalar>(
    space: &FiniteSpace<S>,
    f: &Observable<S>,
    g: &Observable<S>,
) -> Result<S> {
    space.check_len(f.len())?;
    space.check_len(g.len())?;
    Ok(acc_sum((0..space.n()).map(|x| {
        space.weight(x).clone() * f.value(x).clone() * g.value(x).conj()
    })))
}

/// `‖f‖₂ = (Σ μ(x) |f(x)|²)^{1/2}`, as a float for tolerance checks.
pub fn l2_norm<S: Scalar>(space: &FiniteSpace<S>, f: &Observable<S>) -> Result<f64> {
    space.check_len(f.len())?;
    let mut acc = <f64 as Scalar>::Acc::default();
    for x in 0..space.n() {
        acc.add(space.weight(x).to_f64() * f.value(x).abs_sq());
    }
    Ok(acc.finish().max(0.0).sqrt())
}

/// `‖f − g‖₂`.
pub fn l2_distance<S: Scalar>(
    space: &FiniteSpace<S>,
    f: &Observable<S>,
    g: &Observable<S>,
) -> Result<f64> {
    l2_norm(space, &f.sub(g)?)
}

/// Block-averaging conditional expectation `E(f | p)`.
pub fn conditional_expectation<S: Scalar>(
    space: &FiniteSpace<S>,
    f: &Observable<S>,
    p: &Partition,
) -> Result<Observable<S>> {
    space.check_len(f.len())?;
    space.check_len(p.n())?;
    let mut mass: Vec<S::Acc> = (0..p.blocks()).map(|_| S::Acc::default()).collect();
    let mut sum: Vec<S::Acc> = (0..p.blocks()).map(|_| S::Acc::default()).collect();
    for x in 0..space.n() {
        let b = p.block_of(x);
        mass[b].add(space.weight(x).clone());
        sum[b].add(space.weight(x).clone() * f.value(x).clone());
    }
    let means: Vec<S> = sum
        .into_iter()
        .zip(mass)
        .map(|(s, m)| s.finish() / m.finish())
        .collect();
    Ok(Observable::new(
        (0..space.n()).map(|x| means[p.block_of(x)].clone()).collect(),
    ))
}

/// The family of conditional measures `x ↦ μ_{B(x)}`, each the normalized
/// restriction of `μ` to the block of `x`.
#[derive(Debug, Clone)]
pub struct Disintegration<S: Scalar> {
    partition: Partition,
    /// Per block: members in ascending order with their conditional weights.
    block_measures: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> Disintegration<S> {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// The conditional measure at `x`, as `(point, probability)` pairs in
    /// ascending point order.
    pub fn measure_at(&self, x: usize) -> &[(usize, S)] {
        &self.block_measures[self.partition.block_of(x)]
    }

    /// The conditional measure of block `b`.
    pub fn block_measure(&self, b: usize) -> &[(usize, S)] {
        &self.block_measures[b]
    }

    /// `∫ f dμ_{B(x)}`.
    pub fn expect_at(&self, x: usize, f: &Observable<S>) -> S {
        acc_sum(
            self.measure_at(x)
                .iter()
                .map(|(y, p)| p.clone() * f.value(*y).clone()),
        )
    }
}

/// Disintegrates the space over a partition.
pub fn disintegration<S: Scalar>(
    space: &FiniteSpace<S>,
    p: &Partition,
) -> Result<Disintegration<S>> {
    space.check_len(p.n())?;
    let members = p.members();
    let block_measures = members
        .iter()
        .map(|block| {
            let mass = space.mass(block.iter().copied());
            block
                .iter()
                .map(|&y| (y, space.weight(y).clone() / mass.clone()))
                .collect()
        })
        .collect();
    Ok(Disintegration {
        partition: p.clone(),
        block_measures,
    })
}

/// The relative product `μ ×_P μ`: a weighted space of pairs supported on
/// same-block pairs.
#[derive(Debug, Clone)]
pub struct WeightedPairSpace<S: Scalar> {
    base_n: usize,
    support: Vec<(usize, usize)>,
    weights: Vec<S>,
    index: HashMap<(usize, usize), usize>,
}

impl<S: Scalar> WeightedPairSpace<S> {
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Support pairs in lexicographic order.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    pub fn pair(&self, i: usize) -> (usize, usize) {
        self.support[i]
    }

    pub fn weight(&self, i: usize) -> &S {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn index_of(&self, w: usize, z: usize) -> Option<usize> {
        self.index.get(&(w, z)).copied()
    }

    /// The support viewed as a finite space in its own right.
    pub fn as_space(&self) -> Result<FiniteSpace<S>> {
        FiniteSpace::new(self.weights.clone())
    }

    /// `f ⊗ g` restricted to the support: `(w, z) ↦ f(w) g(z)`.
    pub fn tensor(&self, f: &Observable<S>, g: &Observable<S>) -> Result<Observable<S>> {
        if f.len() != self.base_n || g.len() != self.base_n {
            return Err(Error::LengthMismatch {
                expected: self.base_n,
                got: f.len().max(g.len()),
            });
        }
        Ok(Observable::new(
            self.support
                .iter()
                .map(|&(w, z)| f.value(w).clone() * g.value(z).clone())
                .collect(),
        ))
    }

    /// Marginals onto each coordinate; both recover `μ` for a relative
    /// product (tested, not assumed).
    pub fn marginals(&self) -> (Vec<S>, Vec<S>) {
        let mut left: Vec<S::Acc> = (0..self.base_n).map(|_| S::Acc::default()).collect();
        let mut right: Vec<S::Acc> = (0..self.base_n).map(|_| S::Acc::default()).collect();
        for (i, &(w, z)) in self.support.iter().enumerate() {
            left[w].add(self.weights[i].clone());
            right[z].add(self.weights[i].clone());
        }
        (
            left.into_iter().map(Accumulator::finish).collect(),
            right.into_iter().map(Accumulator::finish).collect(),
        )
    }
}

/// Builds the relative product `μ ×_P μ` over a partition.
pub fn relative_product<S: Scalar>(
    space: &FiniteSpace<S>,
    p: &Partition,
) -> Result<WeightedPairSpace<S>> {
    space.check_len(p.n())?;
    let members = p.members();
    let masses: Vec<S> = members
        .iter()
        .map(|block| space.mass(block.iter().copied()))
        .collect();
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for w in 0..space.n() {
        let b = p.block_of(w);
        for &z in &members[b] {
            support.push((w, z));
            weights.push(space.weight(w).clone() * space.weight(z).clone() / masses[b].clone());
        }
    }
    let index = support
        .iter()
        .enumerate()
        .map(|(i, &pair)| (pair, i))
        .collect();
    Ok(WeightedPairSpace {
        base_n: space.n(),
        support,
        weights,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn space(weights: &[(i64, i64)]) -> FiniteSpace<f64> {
        FiniteSpace::new(weights.iter().map(|&(n, d)| f64::from_ratio(n, d)).collect()).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            FiniteSpace::<f64>::new(vec![0.5, 0.0, 0.5]),
            Err(Error::NonPositiveWeight { index: 1 })
        ));
        assert!(matches!(
            FiniteSpace::<f64>::new(vec![0.5, 0.6]),
            Err(Error::WeightSum { .. })
        ));
    }

    #[test]
    fn conditional_expectation_block_averages() {
        // Weights (1/2, 1/4, 1/4), partition {{0}, {1, 2}}, f = (4, 8, 0):
        // the second block has mass 1/2 and mean (2 + 0) / (1/2) = 4.
        let sp = space(&[(1, 2), (1, 4), (1, 4)]);
        let p = Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap();
        let f = Observable::new(vec![4.0, 8.0, 0.0]);
        let e = conditional_expectation(&sp, &f, &p).unwrap();
        assert_eq!(e.values(), &[4.0, 4.0, 4.0]);
    }

    #[test]
    fn conditional_expectation_discrete_and_trivial() {
        let sp = space(&[(1, 2), (1, 4), (1, 4)]);
        let f = Observable::new(vec![4.0, 8.0, 0.0]);
        let id = conditional_expectation(&sp, &f, &Partition::discrete(3)).unwrap();
        assert_eq!(id.values(), f.values());
        let tr = conditional_expectation(&sp, &f, &Partition::trivial(3)).unwrap();
        let mean = integral(&sp, &f).unwrap();
        assert!(tr.values().iter().all(|v| (v - mean).abs() < 1e-15));
    }

    #[test]
    fn conditional_expectation_mismatch_errors() {
        let sp = space(&[(1, 2), (1, 2)]);
        let f = Observable::new(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            conditional_expectation(&sp, &f, &Partition::trivial(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn disintegration_normalizes_blocks() {
        // Same space as above: both points of block {1, 2} see the
        // conditional measure (0, 1/2, 1/2).
        let sp = space(&[(1, 2), (1, 4), (1, 4)]);
        let p = Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap();
        let d = disintegration(&sp, &p).unwrap();
        assert_eq!(d.measure_at(1), &[(1, 0.5), (2, 0.5)]);
        assert_eq!(d.measure_at(2), &[(1, 0.5), (2, 0.5)]);
        assert_eq!(d.measure_at(0), &[(0, 1.0)]);
    }

    #[test]
    fn disintegration_reconstitutes_the_integral() {
        let sp = space(&[(1, 8), (3, 8), (1, 8), (3, 8)]);
        let p = Partition::from_blocks(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        let d = disintegration(&sp, &p).unwrap();
        let f = Observable::new(vec![0.25, -1.5, 3.0, 0.125]);
        let reconstituted = acc_sum(
            (0..4).map(|x| sp.weight(x).clone() * d.expect_at(x, &f)),
        );
        // Equal weights within each block make every conditional weight
        // exactly 1/2, so the identity ∫∫ f dμ_x dμ(x) = ∫ f dμ holds
        // bitwise in floats.
        assert_eq!(reconstituted, integral(&sp, &f).unwrap());
    }

    #[test]
    fn relative_product_over_trivial_partition_is_product_measure() {
        let sp = space(&[(1, 2), (1, 2)]);
        let pairs = relative_product(&sp, &Partition::trivial(2)).unwrap();
        assert_eq!(pairs.len(), 4);
        assert!(pairs.weights().iter().all(|w| *w == 0.25));
        let f = Observable::new(vec![1.0, 3.0]);
        let g = Observable::new(vec![2.0, 5.0]);
        let tensor = pairs.tensor(&f, &g).unwrap();
        let lhs = integral(&pairs.as_space().unwrap(), &tensor).unwrap();
        let sp_int = integral(&sp, &f).unwrap() * integral(&sp, &g).unwrap();
        assert!((lhs - sp_int).abs() < 1e-15);
    }

    #[test]
    fn relative_product_matches_conditioned_integrals() {
        let sp = space(&[(1, 2), (1, 4), (1, 4)]);
        let p = Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap();
        let pairs = relative_product(&sp, &p).unwrap();
        // Support: the singleton block contributes (0,0); the pair block all
        // four combinations.
        assert_eq!(
            pairs.support(),
            &[(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)]
        );
        let f = Observable::new(vec![1.0, 2.0, 4.0]);
        let g = Observable::new(vec![-1.0, 0.5, 0.25]);
        let lhs = integral(
            &pairs.as_space().unwrap(),
            &pairs.tensor(&f, &g).unwrap(),
        )
        .unwrap();
        let ef = conditional_expectation(&sp, &f, &p).unwrap();
        let eg = conditional_expectation(&sp, &g, &p).unwrap();
        let rhs = integral(&sp, &ef.mul(&eg).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-15, "{lhs} vs {rhs}");
    }

    #[test]
    fn inner_product_conjugates_the_second_argument() {
        let sp = space(&[(1, 2), (1, 2)]);
        let f = Observable::new(vec![1.0, -1.0]);
        let g = Observable::new(vec![1.0, 1.0]);
        assert_eq!(inner_product(&sp, &f, &g).unwrap(), 0.0);

        use num::complex::Complex64;
        let csp = FiniteSpace::<Complex64>::uniform(2).unwrap();
        let cf = Observable::new(vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0)]);
        let ip = inner_product(&csp, &cf, &cf).unwrap();
        assert_eq!(ip, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tower_property_exact_in_rationals() {
        type Q = BigRational;
        let sp = FiniteSpace::<Q>::new(vec![
            Q::from_ratio(1, 6),
            Q::from_ratio(1, 3),
            Q::from_ratio(1, 4),
            Q::from_ratio(1, 4),
        ])
        .unwrap();
        let fine = Partition::from_blocks(4, &[vec![0], vec![1], vec![2, 3]]).unwrap();
        let coarse = Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(fine.refines(&coarse));
        let f = Observable::new(vec![
            Q::from_ratio(7, 2),
            Q::from_ratio(-1, 3),
            Q::from_ratio(5, 8),
            Q::from_ratio(0, 1),
        ]);
        let via_fine = conditional_expectation(
            &sp,
            &conditional_expectation(&sp, &f, &fine).unwrap(),
            &coarse,
        )
        .unwrap();
        let direct = conditional_expectation(&sp, &f, &coarse).unwrap();
        assert_eq!(via_fine, direct);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::from_block_ids(vec![0, 2]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_blocks(2, &[vec![0, 1], vec![1]]).is_err());
        let p = Partition::from_block_ids(vec![1, 0, 1]).unwrap();
        assert_eq!(p.blocks(), 2);
        assert_eq!(p.members(), vec![vec![1], vec![0, 2]]);
    }

    #[test]
    fn refinement_relations() {
        let fine = Partition::discrete(4);
        let coarse = Partition::trivial(4);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        let a = Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let b = Partition::from_blocks(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        let meet = a.common_refinement(&b).unwrap();
        assert_eq!(meet.blocks(), 4);
        assert!(meet.refines(&a) && meet.refines(&b));
    }

    #[test]
    fn marginals_of_relative_product_recover_the_measure() {
        let sp = space(&[(1, 2), (1, 4), (1, 4)]);
        let p = Partition::from_blocks(3, &[vec![0], vec![1, 2]]).unwrap();
        let pairs = relative_product(&sp, &p).unwrap();
        let (left, right) = pairs.marginals();
        for x in 0..3 {
            assert!((left[x] - sp.weight(x)).abs() < 1e-15);
            assert!((right[x] - sp.weight(x)).abs() < 1e-15);
        }
    }
}

/// Shared handle used when several structures refer to one space.
pub type SpaceRef<S> = Arc<FiniteSpace<S>>;
