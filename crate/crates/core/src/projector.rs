//! The characteristic subspace of a commuting pair and its orthogonal
//! projector.
//!
//! For a pair `(T, S)` the subspace `W_{T/S} ⊆ L²(μ)` is spanned by the
//! functions
//!
//! ```text
//! k(x) = ∫ H(x, z) φ(z) dμ_{σ(x)}(z)
//! ```
//!
//! where `H` ranges over the `T×T`-invariant functions on the relative
//! product over `I_S` and `φ` over `L²(μ)`. These are exactly the possible
//! limits of the double averages with respect to `f₂ = φ`, so the orthogonal
//! projection `P` onto `W_{T/S}` is what the limit theory factors through;
//! `W_{S/T}` and `Q` are the mirror images under swapping the actions, and
//! the two subspaces coincide.
//!
//! [`wts_subspace`] computes both ranges by sweeping `H` over the orbit
//! indicators (an orthogonal basis of the invariant functions — scaling does
//! not change the span) and `φ` over the point masses, then running modified
//! Gram–Schmidt in the `μ`-inner product. The basis is kept orthogonal but
//! *unnormalized*: normalizing needs square roots, which would force exact
//! rational data out of the field, and the projector
//! `f ↦ Σ_i ⟨f, b_i⟩/⟨b_i, b_i⟩ · b_i` is unchanged.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::{product_action, CommutingPair};
use crate::error::{Error, Result};
use crate::scalar::{Accumulator, Scalar};
use crate::space::{
    disintegration, inner_product, FiniteSpace, Observable, SpaceRef,
    relative_product,
};

/// Gram–Schmidt residuals below this norm are treated as dependent and
/// dropped (the spanning sweep is highly redundant). Exact scalars drop
/// exact zeros only.
pub const RESIDUAL_DROP_TOLERANCE: f64 = 1e-10;

/// Orthogonal (unnormalized) bases of `W_{T/S}` and `W_{S/T}`, with the
/// projections `P` and `Q` onto them.
#[derive(Debug, Clone)]
pub struct CharacteristicProjector<S: Scalar> {
    space: SpaceRef<S>,
    basis_ts: Vec<Observable<S>>,
    norm2_ts: Vec<S>,
    basis_st: Vec<Observable<S>>,
    norm2_st: Vec<S>,
}

impl<S: Scalar> CharacteristicProjector<S> {
    pub fn space(&self) -> &FiniteSpace<S> {
        &self.space
    }

    /// Orthogonal basis of `W_{T/S}` (range of `P`).
    pub fn basis_ts(&self) -> &[Observable<S>] {
        &self.basis_ts
    }

    /// Orthogonal basis of `W_{S/T}` (range of `Q`).
    pub fn basis_st(&self) -> &[Observable<S>] {
        &self.basis_st
    }

    pub fn dim_ts(&self) -> usize {
        self.basis_ts.len()
    }

    pub fn dim_st(&self) -> usize {
        self.basis_st.len()
    }

    /// `P f`: orthogonal projection onto `W_{T/S}`.
    pub fn project_ts(&self, f: &Observable<S>) -> Result<Observable<S>> {
        project(&self.space, &self.basis_ts, &self.norm2_ts, f)
    }

    /// `Q f`: orthogonal projection onto `W_{S/T}`.
    pub fn project_st(&self, f: &Observable<S>) -> Result<Observable<S>> {
        project(&self.space, &self.basis_st, &self.norm2_st, f)
    }

    /// `f − P f`.
    pub fn residual_ts(&self, f: &Observable<S>) -> Result<Observable<S>> {
        f.sub(&self.project_ts(f)?)
    }

    /// Frobenius norm of `P − Q` in measure-weighted coordinates.
    ///
    /// Conjugating by `D^{1/2}` (`D` the diagonal of weights) turns the
    /// `L²(μ)` operator norm into the spectral norm of a symmetric matrix,
    /// which its Frobenius norm bounds from above — so a small value here
    /// certifies a small operator distance.
    pub fn frobenius_distance(&self) -> Result<f64> {
        let (mp, mq) = self.weighted_matrices()?;
        let n = self.space.n();
        let mut acc = <f64 as Scalar>::Acc::default();
        for i in 0..n {
            for j in 0..n {
                let d = mp[i][j] - mq[i][j];
                acc.add(d * d);
            }
        }
        Ok(acc.finish().sqrt())
    }

    /// Power-iteration estimate of the `L²(μ)` operator norm of `P − Q`.
    /// A lower bound in exact arithmetic; reported alongside the Frobenius
    /// upper bound.
    pub fn operator_distance_estimate(&self, iterations: u32, seed: u64) -> Result<f64> {
        let (mp, mq) = self.weighted_matrices()?;
        let n = self.space.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = norm(&v).max(f64::MIN_POSITIVE);
        v.iter_mut().for_each(|x| *x /= scale);
        let mut value = 0.0;
        for _ in 0..iterations {
            let mut w = vec![0.0; n];
            for i in 0..n {
                let mut acc = <f64 as Scalar>::Acc::default();
                for j in 0..n {
                    acc.add((mp[i][j] - mq[i][j]) * v[j]);
                }
                w[i] = acc.finish();
            }
            value = norm(&w);
            if value < f64::MIN_POSITIVE {
                return Ok(0.0);
            }
            w.iter_mut().for_each(|x| *x /= value);
            v = w;
        }
        Ok(value)
    }

    /// Matrices of `P` and `Q` conjugated by `D^{1/2}`.
    fn weighted_matrices(&self) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = self.space.n();
        let roots: Vec<f64> = (0..n)
            .map(|x| {
                self.space
                    .weight(x)
                    .as_positive_real()
                    .map(f64::sqrt)
                    .ok_or_else(|| Error::internal("weights were validated positive"))
            })
            .collect::<Result<_>>()?;
        let mut mp = vec![vec![0.0; n]; n];
        let mut mq = vec![vec![0.0; n]; n];
        for j in 0..n {
            let delta = Observable::indicator(n, [j]);
            let pj = self.project_ts(&delta)?;
            let qj = self.project_st(&delta)?;
            for i in 0..n {
                mp[i][j] = pj.value(i).to_f64() * roots[i] / roots[j];
                mq[i][j] = qj.value(i).to_f64() * roots[i] / roots[j];
            }
        }
        Ok((mp, mq))
    }
}

fn project<S: Scalar>(
    space: &FiniteSpace<S>,
    basis: &[Observable<S>],
    norm2: &[S],
    f: &Observable<S>,
) -> Result<Observable<S>> {
    space.check_len(f.len())?;
    let mut accs: Vec<S::Acc> = (0..space.n()).map(|_| S::Acc::default()).collect();
    for (b, n2) in basis.iter().zip(norm2) {
        let coeff = inner_product(space, f, b)? / n2.clone();
        for (x, acc) in accs.iter_mut().enumerate() {
            acc.add(coeff.clone() * b.value(x).clone());
        }
    }
    Ok(Observable::new(
        accs.into_iter().map(Accumulator::finish).collect(),
    ))
}

/// Feeds candidates through modified Gram–Schmidt (two passes, for float
/// stability), collecting an orthogonal basis. Stops once the basis spans
/// the whole space.
struct GramSchmidt<'a, S: Scalar> {
    space: &'a FiniteSpace<S>,
    basis: Vec<Observable<S>>,
    norm2: Vec<S>,
}

impl<'a, S: Scalar> GramSchmidt<'a, S> {
    fn new(space: &'a FiniteSpace<S>) -> Self {
        Self {
            space,
            basis: Vec::new(),
            norm2: Vec::new(),
        }
    }

    fn is_complete(&self) -> bool {
        self.basis.len() == self.space.n()
    }

    fn offer(&mut self, candidate: Observable<S>) -> Result<()> {
        if self.is_complete() {
            return Ok(());
        }
        let mut v = candidate;
        for _ in 0..2 {
            for (b, n2) in self.basis.iter().zip(&self.norm2) {
                let coeff = inner_product(self.space, &v, b)? / n2.clone();
                v = v.sub(&b.scale(&coeff))?;
            }
        }
        let r2 = inner_product(self.space, &v, &v)?;
        let keep = if S::EXACT {
            !r2.is_zero()
        } else {
            r2.to_f64().max(0.0).sqrt() >= RESIDUAL_DROP_TOLERANCE
        };
        if keep {
            self.basis.push(v);
            self.norm2.push(r2);
        }
        Ok(())
    }
}

/// Sweeps out the candidate functions `k_{O,y}(x) = μ_{σ(x)}(y) · 1_O(x, y)`
/// for one orientation of the pair: `O` runs over the `T×T` orbits of the
/// relative product over `I_S`, `y` over the points.
fn sweep_side<S: Scalar>(pair: &CommutingPair<S>, gs: &mut GramSchmidt<'_, S>) -> Result<()> {
    let space = pair.space();
    let n = space.n();
    let i_s = pair.s().orbit_partition();
    let dis = disintegration(space, &i_s)?;
    let pairs = relative_product(space, &i_s)?;
    let orbits = product_action(pair.t(), pair.t(), &pairs)?.orbit_partition();
    // Conditional weight of y seen from x: μ_{σ(x)}(y), zero off the block.
    // Within a block this is the same value for every x, so precompute per
    // point once.
    let mut cond_weight: Vec<S> = vec![S::zero(); n];
    for x in 0..n {
        for &(z, ref w) in dis.measure_at(x) {
            if z == x {
                cond_weight[x] = w.clone();
            }
        }
    }
    for orbit in 0..orbits.blocks() {
        for y in 0..n {
            if gs.is_complete() {
                return Ok(());
            }
            let mut values = vec![S::zero(); n];
            let mut nonzero = false;
            for x in 0..n {
                if i_s.block_of(x) != i_s.block_of(y) {
                    continue;
                }
                let idx = pairs.index_of(x, y).ok_or_else(|| {
                    Error::internal("relative product support is missing a same-block pair")
                })?;
                if orbits.block_of(idx) == orbit {
                    values[x] = cond_weight[y].clone();
                    nonzero = true;
                }
            }
            if nonzero {
                gs.offer(Observable::new(values))?;
            }
        }
    }
    Ok(())
}

/// Computes the characteristic subspaces `W_{T/S}` and `W_{S/T}` of the
/// pair and returns their orthogonal projectors `P` and `Q`.
///
/// The two ranges always coincide (the subspace is two-sided); the bases
/// are computed independently from either orientation so that tests can
/// verify the coincidence rather than assume it.
pub fn wts_subspace<S: Scalar>(pair: &CommutingPair<S>) -> Result<CharacteristicProjector<S>> {
    let space = pair.space_ref();
    let mut gs_ts = GramSchmidt::new(pair.space());
    sweep_side(pair, &mut gs_ts)?;
    let swapped = pair.swapped();
    let mut gs_st = GramSchmidt::new(pair.space());
    sweep_side(&swapped, &mut gs_st)?;
    Ok(CharacteristicProjector {
        space,
        basis_ts: gs_ts.basis,
        norm2_ts: gs_ts.norm2,
        basis_st: gs_st.basis,
        norm2_st: gs_st.norm2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{Action, Permutation};
    use crate::group::GroupSpec;
    use crate::space::l2_distance;
    use std::sync::Arc;

    fn pair_from(maps: (&[usize], &[usize])) -> CommutingPair<f64> {
        let n = maps.0.len();
        let space: SpaceRef<f64> = Arc::new(FiniteSpace::uniform(n).unwrap());
        let g = GroupSpec::free_abelian(1).unwrap();
        let t = Action::from_generators(
            g.clone(),
            Arc::clone(&space),
            vec![Permutation::new(maps.0.to_vec()).unwrap()],
        )
        .unwrap();
        let s = Action::from_generators(
            g,
            space,
            vec![Permutation::new(maps.1.to_vec()).unwrap()],
        )
        .unwrap();
        CommutingPair::new(t, s).unwrap()
    }

    #[test]
    fn identity_pair_spans_the_full_space() {
        let pair = pair_from((&[0, 1, 2], &[0, 1, 2]));
        let proj = wts_subspace(&pair).unwrap();
        assert_eq!(proj.dim_ts(), 3);
        assert_eq!(proj.dim_st(), 3);
        let f = Observable::new(vec![1.0, -2.0, 0.5]);
        let pf = proj.project_ts(&f).unwrap();
        assert!(l2_distance(pair.space(), &pf, &f).unwrap() < 1e-12);
    }

    #[test]
    fn flip_pair_range_contains_chi_and_constants() {
        let pair = pair_from((&[1, 0], &[1, 0]));
        let proj = wts_subspace(&pair).unwrap();
        assert_eq!(proj.dim_ts(), 2);
        let chi = Observable::new(vec![1.0, -1.0]);
        let p_chi = proj.project_ts(&chi).unwrap();
        assert!(l2_distance(pair.space(), &p_chi, &chi).unwrap() < 1e-9);
        let one = Observable::constant(2, 1.0);
        let p_one = proj.project_ts(&one).unwrap();
        assert!(l2_distance(pair.space(), &p_one, &one).unwrap() < 1e-9);
    }

    #[test]
    fn cyclic_rotation_spans_the_full_space() {
        let pair = pair_from((&[1, 2, 3, 4, 0], &[1, 2, 3, 4, 0]));
        let proj = wts_subspace(&pair).unwrap();
        assert_eq!(proj.dim_ts(), 5);
        assert_eq!(proj.dim_st(), 5);
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint() {
        let pair = pair_from((&[1, 0, 2, 3], &[0, 1, 3, 2]));
        let proj = wts_subspace(&pair).unwrap();
        let f = Observable::new(vec![0.3, -1.1, 2.0, 0.7]);
        let g = Observable::new(vec![1.5, 0.2, -0.4, 1.0]);
        let pf = proj.project_ts(&f).unwrap();
        let ppf = proj.project_ts(&pf).unwrap();
        assert!(l2_distance(pair.space(), &ppf, &pf).unwrap() < 1e-12);
        let lhs = inner_product(pair.space(), &pf, &g).unwrap();
        let rhs = inner_product(pair.space(), &f, &proj.project_ts(&g).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn the_two_ranges_coincide() {
        let pair = pair_from((&[1, 2, 0, 3], &[0, 1, 2, 3]));
        let proj = wts_subspace(&pair).unwrap();
        assert!(proj.frobenius_distance().unwrap() < 1e-9);
        assert!(proj.operator_distance_estimate(50, 11).unwrap() < 1e-9);
    }

    #[test]
    fn projector_reproduces_multi_limits() {
        // Every limit of the double averages lies in the range of P.
        let pair = pair_from((&[1, 2, 0, 3, 4], &[0, 1, 2, 4, 3]));
        let proj = wts_subspace(&pair).unwrap();
        let f1 = Observable::new(vec![0.2, -0.5, 1.0, 0.8, -1.2]);
        let f2 = Observable::new(vec![1.0, 0.1, -0.7, 0.4, 0.9]);
        let f3 = Observable::new(vec![-0.3, 0.6, 0.2, -1.0, 0.5]);
        let lim = crate::averages::multi_limit(&pair, &f1, &f2, &f3).unwrap();
        let residual = proj.residual_ts(&lim).unwrap();
        assert!(l2_distance(pair.space(), &residual, &Observable::constant(5, 0.0)).unwrap() < 1e-9);
    }
}
