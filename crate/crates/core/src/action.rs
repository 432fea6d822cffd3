//! Measure-preserving group actions on finite spaces.
//!
//! An action assigns to each group element a weight-preserving permutation
//! of the points, with `T_g T_h = T_{gh}`. For `ℤ^d` it is determined by
//! `d` pairwise commuting generator permutations; for a finite table group
//! it is a homomorphism, one permutation per element, checked against the
//! table. Weight preservation is required exactly (`μ(T_g x) = μ(x)` as
//! stored values), which forces weights to be constant along orbits — the
//! fact that makes every full-period window average an exact projection.
//!
//! [`CommutingPair`] couples two actions of the same group on the same
//! space whose permutations commute elementwise; it is the input to all the
//! double-average machinery in [`crate::averages`].

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{FolnerSchedule, FolnerSequence, GroupElement, GroupSpec};
use crate::scalar::Scalar;
use crate::space::{FiniteSpace, Observable, Partition, SpaceRef, WeightedPairSpace};
use crate::unionfind::UnionFind;

/// Cap on generated-group enumeration (image groups, full periods).
pub const GROUP_ENUMERATION_CAP: u64 = 1_000_000;

/// A permutation of `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for (i, &y) in map.iter().enumerate() {
            if y >= n {
                return Err(Error::InvalidPermutation {
                    reason: format!("image {y} of {i} is out of range"),
                });
            }
            if seen[y] {
                return Err(Error::InvalidPermutation {
                    reason: format!("image {y} is hit twice"),
                });
            }
            seen[y] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            map: other.map.iter().map(|&x| self.map[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &y) in self.map.iter().enumerate() {
            map[y] = i;
        }
        Permutation { map }
    }

    /// Integer power, negative exponents via the inverse.
    pub fn pow(&self, k: i64) -> Permutation {
        let mut base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut out = Permutation::identity(self.n());
        while e > 0 {
            if e & 1 == 1 {
                out = base.compose(&out);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        out
    }

    /// Order as a permutation: the lcm of its cycle lengths.
    pub fn order(&self) -> u128 {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut order: u128 = 1;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len: u128 = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.map[x];
                len += 1;
            }
            order = num::integer::lcm(order, len);
        }
        order
    }
}

/// Distinct permutations of a window, with multiplicities.
///
/// A window average `(1/|Φ|) Σ_{g∈Φ} F(T_g)` only depends on the image
/// permutations, so windows are collapsed before summation: each distinct
/// permutation appears once, counted with multiplicity, in first-visit
/// (lexicographic window) order. Sums over the collapsed list are
/// deterministic regardless of worker count.
pub struct WindowImages {
    pub perms: Vec<Permutation>,
    pub counts: Vec<u64>,
    pub window_size: u64,
}

/// A measure-preserving action of a [`GroupSpec`] on a [`FiniteSpace`].
#[derive(Debug, Clone)]
pub struct Action<S: Scalar> {
    group: GroupSpec,
    space: SpaceRef<S>,
    gens: Vec<Permutation>,
}

impl<S: Scalar> Action<S> {
    /// Builds and validates an action from generator images.
    ///
    /// For `ℤ^d`: one permutation per axis, pairwise commuting. For a finite
    /// table group: one permutation per element, forming a homomorphism.
    /// Every permutation must preserve the weights exactly.
    pub fn from_generators(
        group: GroupSpec,
        space: SpaceRef<S>,
        gens: Vec<Permutation>,
    ) -> Result<Self> {
        let expected = group.generator_count();
        if gens.len() != expected {
            return Err(Error::GeneratorCount {
                expected,
                got: gens.len(),
            });
        }
        for (index, g) in gens.iter().enumerate() {
            if g.n() != space.n() {
                return Err(Error::LengthMismatch {
                    expected: space.n(),
                    got: g.n(),
                });
            }
            for x in 0..space.n() {
                if space.weight(g.apply(x)) != space.weight(x) {
                    return Err(Error::NotWeightPreserving { index, point: x });
                }
            }
        }
        match &group {
            GroupSpec::FreeAbelian { .. } => {
                for i in 0..gens.len() {
                    for j in (i + 1)..gens.len() {
                        if gens[i].compose(&gens[j]) != gens[j].compose(&gens[i]) {
                            return Err(Error::NonCommutingGenerators { i, j });
                        }
                    }
                }
            }
            GroupSpec::FiniteTable(t) => {
                for i in 0..t.order() {
                    for j in 0..t.order() {
                        if gens[t.mul(i, j)] != gens[i].compose(&gens[j]) {
                            return Err(Error::NotHomomorphism { i, j });
                        }
                    }
                }
            }
        }
        Ok(Self { group, space, gens })
    }

    /// The trivial action of `group` on `space`.
    pub fn identity(group: GroupSpec, space: SpaceRef<S>) -> Result<Self> {
        let id = Permutation::identity(space.n());
        let gens = vec![id; group.generator_count()];
        Self::from_generators(group, space, gens)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn space(&self) -> &FiniteSpace<S> {
        &self.space
    }

    pub fn space_ref(&self) -> SpaceRef<S> {
        Arc::clone(&self.space)
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    /// The permutation `T_g`.
    pub fn permutation_of(&self, g: &GroupElement) -> Result<Permutation> {
        self.group.validate_element(g)?;
        Ok(match g {
            GroupElement::FreeAbelian(coords) => {
                let mut out = Permutation::identity(self.n());
                for (i, &k) in coords.iter().enumerate() {
                    if k != 0 {
                        out = self.gens[i].pow(k).compose(&out);
                    }
                }
                out
            }
            GroupElement::FiniteTable(i) => self.gens[*i].clone(),
        })
    }

    /// `T_g x`.
    pub fn apply(&self, g: &GroupElement, x: usize) -> Result<usize> {
        Ok(self.permutation_of(g)?.apply(x))
    }

    /// The pullback `T_g f = f ∘ T_g`.
    pub fn pullback(&self, g: &GroupElement, f: &Observable<S>) -> Result<Observable<S>> {
        self.space.check_len(f.len())?;
        let p = self.permutation_of(g)?;
        Ok(pullback_by(&p, f))
    }

    /// The orbit partition of the action (blocks numbered by first point).
    pub fn orbit_partition(&self) -> Partition {
        let mut uf = UnionFind::new(self.n());
        for g in &self.gens {
            for x in 0..self.n() {
                uf.union(x, g.apply(x));
            }
        }
        uf.into_partition()
    }

    /// Enumerates the image of the action — the subgroup of permutations
    /// generated by the generator images — in breadth-first order starting
    /// from the identity. Errors out above `cap` elements.
    pub fn image_group(&self, cap: u64) -> Result<Vec<Permutation>> {
        let mut seen: HashMap<Permutation, usize> = HashMap::new();
        let mut out = vec![Permutation::identity(self.n())];
        seen.insert(out[0].clone(), 0);
        let mut head = 0;
        while head < out.len() {
            let current = out[head].clone();
            head += 1;
            for g in &self.gens {
                let next = g.compose(&current);
                if !seen.contains_key(&next) {
                    if out.len() as u64 >= cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    seen.insert(next.clone(), out.len());
                    out.push(next);
                }
            }
        }
        Ok(out)
    }

    /// Collapses the window `Φ_n` to distinct image permutations with
    /// multiplicities (see [`WindowImages`]).
    pub fn window_images(&self, seq: &FolnerSequence, n: u64) -> Result<WindowImages> {
        if seq.group() != &self.group {
            return Err(Error::MismatchedGroups);
        }
        let window_size = seq.size(n)?;
        let mut index: HashMap<Permutation, usize> = HashMap::new();
        let mut perms = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        let mut push = |p: Permutation, index: &mut HashMap<Permutation, usize>| {
            if let Some(&i) = index.get(&p) {
                counts[i] += 1;
            } else {
                index.insert(p.clone(), perms.len());
                perms.push(p);
                counts.push(1);
            }
        };
        match seq.schedule() {
            FolnerSchedule::FullGroup => {
                for p in &self.gens {
                    push(p.clone(), &mut index);
                }
            }
            FolnerSchedule::Boxes(axes) => {
                let lows: Vec<i64> = axes.iter().map(|a| a.lo(n)).collect();
                let his: Vec<i64> = axes.iter().map(|a| a.hi(n)).collect();
                let mut coords = lows.clone();
                // Current permutation, updated incrementally: stepping the
                // last axis is one composition; carries recompute the prefix.
                let mut current = self.box_corner_perm(&coords);
                loop {
                    push(current.clone(), &mut index);
                    let mut axis = axes.len();
                    let mut done = true;
                    while axis > 0 {
                        axis -= 1;
                        coords[axis] += 1;
                        if coords[axis] < his[axis] {
                            if axis == axes.len() - 1 {
                                current = self.gens[axis].compose(&current);
                            } else {
                                current = self.box_corner_perm(&coords);
                            }
                            done = false;
                            break;
                        }
                        coords[axis] = lows[axis];
                    }
                    if done {
                        break;
                    }
                }
            }
        }
        Ok(WindowImages {
            perms,
            counts,
            window_size,
        })
    }

    fn box_corner_perm(&self, coords: &[i64]) -> Permutation {
        let mut out = Permutation::identity(self.n());
        for (i, &k) in coords.iter().enumerate() {
            if k != 0 {
                out = self.gens[i].pow(k).compose(&out);
            }
        }
        out
    }
}

/// `f ∘ π` as a new observable.
pub fn pullback_by<S: Scalar>(p: &Permutation, f: &Observable<S>) -> Observable<S> {
    Observable::new((0..f.len()).map(|x| f.value(p.apply(x)).clone()).collect())
}

/// Two commuting measure-preserving actions of one group on one space.
#[derive(Debug, Clone)]
pub struct CommutingPair<S: Scalar> {
    t: Action<S>,
    s: Action<S>,
}

impl<S: Scalar> CommutingPair<S> {
    pub fn new(t: Action<S>, s: Action<S>) -> Result<Self> {
        if t.group() != s.group() {
            return Err(Error::MismatchedGroups);
        }
        if t.space().weights() != s.space().weights() {
            return Err(Error::MismatchedSpaces);
        }
        for (i, a) in t.generators().iter().enumerate() {
            for (j, b) in s.generators().iter().enumerate() {
                if a.compose(b) != b.compose(a) {
                    return Err(Error::NonCommutingGenerators { i, j });
                }
            }
        }
        Ok(Self { t, s })
    }

    pub fn t(&self) -> &Action<S> {
        &self.t
    }

    pub fn s(&self) -> &Action<S> {
        &self.s
    }

    pub fn group(&self) -> &GroupSpec {
        self.t.group()
    }

    pub fn space(&self) -> &FiniteSpace<S> {
        self.t.space()
    }

    pub fn space_ref(&self) -> SpaceRef<S> {
        self.t.space_ref()
    }

    /// The same pair with the roles of the two actions exchanged.
    pub fn swapped(&self) -> CommutingPair<S> {
        CommutingPair {
            t: self.s.clone(),
            s: self.t.clone(),
        }
    }

    /// Orbit partition of the group generated by both actions together.
    pub fn joint_orbit_partition(&self) -> Partition {
        let mut uf = UnionFind::new(self.t.n());
        for g in self.t.generators().iter().chain(self.s.generators()) {
            for x in 0..self.t.n() {
                uf.union(x, g.apply(x));
            }
        }
        uf.into_partition()
    }

    /// Collapses the window `Φ_n` to distinct pairs `(T_g, S_g)` of image
    /// permutations with multiplicities, in first-visit order — the
    /// diagonal-average analogue of [`Action::window_images`], needed
    /// because both permutations must come from the *same* `g`.
    pub fn window_image_pairs(
        &self,
        seq: &FolnerSequence,
        n: u64,
    ) -> Result<(Vec<(Permutation, Permutation)>, Vec<u64>, u64)> {
        if seq.group() != self.group() {
            return Err(Error::MismatchedGroups);
        }
        let window_size = seq.size(n)?;
        let mut index: HashMap<(Permutation, Permutation), usize> = HashMap::new();
        let mut perms = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        let mut push = |p: (Permutation, Permutation),
                        index: &mut HashMap<(Permutation, Permutation), usize>| {
            if let Some(&i) = index.get(&p) {
                counts[i] += 1;
            } else {
                index.insert(p.clone(), perms.len());
                perms.push(p);
                counts.push(1);
            }
        };
        match seq.schedule() {
            FolnerSchedule::FullGroup => {
                for (tg, sg) in self.t.generators().iter().zip(self.s.generators()) {
                    push((tg.clone(), sg.clone()), &mut index);
                }
            }
            FolnerSchedule::Boxes(axes) => {
                let lows: Vec<i64> = axes.iter().map(|a| a.lo(n)).collect();
                let his: Vec<i64> = axes.iter().map(|a| a.hi(n)).collect();
                let mut coords = lows.clone();
                let mut current = (
                    self.t.box_corner_perm(&coords),
                    self.s.box_corner_perm(&coords),
                );
                loop {
                    push(current.clone(), &mut index);
                    let mut axis = axes.len();
                    let mut done = true;
                    while axis > 0 {
                        axis -= 1;
                        coords[axis] += 1;
                        if coords[axis] < his[axis] {
                            if axis == axes.len() - 1 {
                                current = (
                                    self.t.generators()[axis].compose(&current.0),
                                    self.s.generators()[axis].compose(&current.1),
                                );
                            } else {
                                current = (
                                    self.t.box_corner_perm(&coords),
                                    self.s.box_corner_perm(&coords),
                                );
                            }
                            done = false;
                            break;
                        }
                        coords[axis] = lows[axis];
                    }
                    if done {
                        break;
                    }
                }
            }
        }
        Ok((perms, counts, window_size))
    }

    /// The full period: the smallest `p` such that every generator image of
    /// either action satisfies `π^p = id`. Box windows whose side lengths
    /// are multiples of `p` average over whole image groups, so finite-stage
    /// averages at such stages equal the exact limits. `None` when the
    /// period exceeds [`GROUP_ENUMERATION_CAP`] (convergence-only checks
    /// remain available).
    pub fn full_period(&self) -> Option<u64> {
        match self.group() {
            GroupSpec::FreeAbelian { .. } => {
                let mut p: u128 = 1;
                for g in self.t.generators().iter().chain(self.s.generators()) {
                    p = num::integer::lcm(p, g.order());
                    if p > GROUP_ENUMERATION_CAP as u128 {
                        return None;
                    }
                }
                Some(p as u64)
            }
            // Full-group windows are exact at every stage.
            GroupSpec::FiniteTable(_) => Some(1),
        }
    }
}

/// The product action `a × b` on a weighted pair space:
/// `(w, z) ↦ (a_g w, b_g z)`.
///
/// Passing an identity action for one factor yields the one-sided actions
/// `T × id` and `id × S`. Errors if some generator moves a support pair off
/// the support.
pub fn product_action<S: Scalar>(
    a: &Action<S>,
    b: &Action<S>,
    pairs: &WeightedPairSpace<S>,
) -> Result<Action<S>> {
    if a.group() != b.group() {
        return Err(Error::MismatchedGroups);
    }
    if a.n() != pairs.base_n() || b.n() != pairs.base_n() {
        return Err(Error::LengthMismatch {
            expected: pairs.base_n(),
            got: a.n().max(b.n()),
        });
    }
    let mut gens = Vec::with_capacity(a.generators().len());
    for (ga, gb) in a.generators().iter().zip(b.generators()) {
        let mut map = Vec::with_capacity(pairs.len());
        for &(w, z) in pairs.support() {
            let image = (ga.apply(w), gb.apply(z));
            let idx = pairs
                .index_of(image.0, image.1)
                .ok_or(Error::SupportNotInvariant { w, z })?;
            map.push(idx);
        }
        gens.push(Permutation::new(map)?);
    }
    let pair_space = Arc::new(pairs.as_space()?);
    Action::from_generators(a.group().clone(), pair_space, gens)
}

/// A commuting pair built from a two-cocycle skew product.
///
/// The base is `ℤ_p × ℤ_q × ℤ_r` with uniform weights; with `τ : ℤ_p → ℤ_r`
/// and `σ : ℤ_q → ℤ_r`,
///
/// ```text
/// T(y₀, y₁, k) = (y₀ + 1, y₁, k + τ(y₀))
/// S(y₀, y₁, k) = (y₀, y₁ + 1, k − σ(y₁))
/// ```
///
/// Both act by `ℤ` and commute for every choice of `τ`, `σ` — the two
/// cocycle increments land in the same fiber coordinate and cancel in either
/// order.
pub fn skew_product_pair<S: Scalar>(
    p: usize,
    q: usize,
    r: usize,
    tau: &[i64],
    sigma: &[i64],
) -> Result<CommutingPair<S>> {
    if p == 0 || q == 0 || r == 0 {
        return Err(Error::invalid_parameter("p, q, r must be at least 1"));
    }
    if tau.len() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            got: tau.len(),
        });
    }
    if sigma.len() != q {
        return Err(Error::LengthMismatch {
            expected: q,
            got: sigma.len(),
        });
    }
    for (index, &value) in tau.iter().enumerate() {
        if value < 0 || value >= r as i64 {
            return Err(Error::InvalidCocycle {
                index,
                value,
                modulus: r as i64,
            });
        }
    }
    for (index, &value) in sigma.iter().enumerate() {
        if value < 0 || value >= r as i64 {
            return Err(Error::InvalidCocycle {
                index,
                value,
                modulus: r as i64,
            });
        }
    }
    let n = p * q * r;
    let pack = |y0: usize, y1: usize, k: usize| (y0 * q + y1) * r + k;
    let mut t_map = vec![0; n];
    let mut s_map = vec![0; n];
    for y0 in 0..p {
        for y1 in 0..q {
            for k in 0..r {
                let t_k = (k + tau[y0] as usize) % r;
                t_map[pack(y0, y1, k)] = pack((y0 + 1) % p, y1, t_k);
                let s_k = (k + r - sigma[y1] as usize % r) % r;
                s_map[pack(y0, y1, k)] = pack(y0, (y1 + 1) % q, s_k);
            }
        }
    }
    let space = Arc::new(FiniteSpace::uniform(n)?);
    let group = GroupSpec::free_abelian(1)?;
    let t = Action::from_generators(group.clone(), Arc::clone(&space), vec![Permutation::new(t_map)?])?;
    let s = Action::from_generators(group, space, vec![Permutation::new(s_map)?])?;
    CommutingPair::new(t, s)
}
