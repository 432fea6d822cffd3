//! Finite-stage ergodic averages and their exact limits.
//!
//! The central objects are the double averages
//!
//! ```text
//! A_n(x) = (1/|Φ_n||Ψ_n|) Σ_{g∈Φ_n} Σ_{h∈Ψ_n}
//!          f₁(T_g x) · f₂(S_h x) · f₃(T_g S_h x)
//! ```
//!
//! for a commuting pair `(T, S)`. On a finite system their limit is a
//! closed-form projection, computed by [`multi_limit`]: condition `f₁⊗f₃`
//! onto the `T×T`-orbit partition of the relative product over the
//! `S`-orbit partition `I_S`, then integrate against `f₂` along the fibers.
//! [`multi_limit_dual`] computes the same limit with the roles of the two
//! actions exchanged, and [`iterated_limit`] computes it as an iterated
//! (first `h`, then `g`) limit; all three agree.
//!
//! Finite-stage sums collapse windows to distinct image permutations with
//! multiplicities before evaluating, so a full-period window — a box whose
//! sides are multiples of [`CommutingPair::full_period`] — averages each
//! image subgroup uniformly and reproduces the limit *exactly*, not merely
//! within float tolerance. All per-point sums run in a fixed order through
//! compensated accumulators, so results are bit-stable across worker
//! counts.
//!
//! Alongside the averages live the recurrence bounds ([`four_term_bound`],
//! [`khintchine_bound`]), the diagonal average `φ(T_g x)ψ(S_g T_g x)` and
//! its limit, a weak-mixing decay diagnostic, a van-der-Corput-style double
//! average, and the ergodicity test [`constancy_check`] implementing the
//! criterion: the limit is constant for every triple of observables if and
//! only if `T×T` and `S×S` are both ergodic on the product square.

use std::collections::HashMap;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::action::{
    product_action, pullback_by, Action, CommutingPair, GROUP_ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::group::{FolnerSequence, GroupElement, GroupSpec};
use crate::scalar::{Accumulator, Scalar};
use crate::space::{
    conditional_expectation, disintegration, inner_product, integral, l2_distance, l2_norm,
    relative_product, Disintegration, FiniteSpace, Observable, Partition, WeightedPairSpace,
};

/// Spread below which a limit observable counts as constant.
pub const CONSTANCY_TOLERANCE: f64 = 1e-9;

/// The window average `(1/|Φ_n|) Σ_{g∈Φ_n} f(T_g x)`.
pub fn ergodic_average<S: Scalar>(
    a: &Action<S>,
    f: &Observable<S>,
    seq: &FolnerSequence,
    n: u64,
) -> Result<Observable<S>> {
    a.space().check_len(f.len())?;
    let images = a.window_images(seq, n)?;
    let denom = S::from_int(i64::try_from(images.window_size).map_err(|_| {
        Error::WindowTooLarge {
            stage: n,
            size: images.window_size as u128,
            cap: i64::MAX as u64,
        }
    })?);
    let values = (0..a.n())
        .map(|x| {
            let mut acc = S::Acc::default();
            for (p, &c) in images.perms.iter().zip(&images.counts) {
                acc.add(S::from_int(c as i64) * f.value(p.apply(x)).clone());
            }
            acc.finish() / denom.clone()
        })
        .collect();
    Ok(Observable::new(values))
}

/// The exact limit of the window averages: `E(f | I_T)`, the conditional
/// expectation onto the orbit partition.
pub fn ergodic_limit<S: Scalar>(a: &Action<S>, f: &Observable<S>) -> Result<Observable<S>> {
    conditional_expectation(a.space(), f, &a.orbit_partition())
}

/// The double window average over `Φ_n × Ψ_n` (see the module overview).
///
/// Both windows are collapsed to distinct image permutations with
/// multiplicities before the `(g, h)` sum, so the cost per point is the
/// product of the two image counts, never of the window sizes, and a
/// full-period window yields [`multi_limit`] exactly.
pub fn multi_average<S: Scalar>(
    pair: &CommutingPair<S>,
    f1: &Observable<S>,
    f2: &Observable<S>,
    f3: &Observable<S>,
    seq_t: &FolnerSequence,
    seq_s: &FolnerSequence,
    n: u64,
) -> Result<Observable<S>> {
    let space = pair.space();
    space.check_len(f1.len())?;
    space.check_len(f2.len())?;
    space.check_len(f3.len())?;
    let wt = pair.t().window_images(seq_t, n)?;
    let ws = pair.s().window_images(seq_s, n)?;
    let total = wt.window_size as u128 * ws.window_size as u128;
    let denom = S::from_int(i64::try_from(total).map_err(|_| Error::WindowTooLarge {
        stage: n,
        size: total,
        cap: i64::MAX as u64,
    })?);
    let values: Vec<S> = (0..space.n())
        .into_par_iter()
        .map(|x| {
            let mut acc = S::Acc::default();
            for (pt, &ct) in wt.perms.iter().zip(&wt.counts) {
                let f1_at = f1.value(pt.apply(x)).clone();
                for (ps, &cs) in ws.perms.iter().zip(&ws.counts) {
                    let sx = ps.apply(x);
                    let coeff = S::from_int((ct as u128 * cs as u128) as i64);
                    acc.add(
                        coeff
                            * f1_at.clone()
                            * f2.value(sx).clone()
                            * f3.value(pt.apply(sx)).clone(),
                    );
                }
            }
            acc.finish() / denom.clone()
        })
        .collect();
    Ok(Observable::new(values))
}

/// The limit machinery behind [`multi_limit`], reusable across triples.
///
/// Building the engine constructs everything that depends only on the pair:
/// the `S`-orbit disintegration, the relative product over `I_S`, and the
/// `T×T`-orbit partition of that pair space. Each [`limit`](Self::limit)
/// call then costs one conditional expectation plus one fiber integration,
/// which is what makes witness sweeps over whole observable bases cheap.
pub struct MultiLimitEngine<S: Scalar> {
    dis: Disintegration<S>,
    pairs: WeightedPairSpace<S>,
    pair_space: FiniteSpace<S>,
    orbits: Partition,
}

impl<S: Scalar> MultiLimitEngine<S> {
    pub fn new(pair: &CommutingPair<S>) -> Result<Self> {
        let space = pair.space();
        let i_s = pair.s().orbit_partition();
        let dis = disintegration(space, &i_s)?;
        let pairs = relative_product(space, &i_s)?;
        let tt = product_action(pair.t(), pair.t(), &pairs)?;
        let orbits = tt.orbit_partition();
        let pair_space = pairs.as_space()?;
        Ok(Self {
            dis,
            pairs,
            pair_space,
            orbits,
        })
    }

    /// Number of `T×T` orbits on the relative product — the dimension of
    /// the space the projection `H` lives in.
    pub fn orbit_count(&self) -> usize {
        self.orbits.blocks()
    }

    /// The exact limit for one triple.
    pub fn limit(
        &self,
        f1: &Observable<S>,
        f2: &Observable<S>,
        f3: &Observable<S>,
    ) -> Result<Observable<S>> {
        let h = self.project_tensor(f1, f3)?;
        self.integrate_fibers(f2, &h)
    }

    /// `H`: the conditional expectation of `f1 ⊗ f3` onto the `T×T` orbits
    /// of the relative product, as an observable on the pair support.
    pub fn project_tensor(
        &self,
        f1: &Observable<S>,
        f3: &Observable<S>,
    ) -> Result<Observable<S>> {
        let tensor = self.pairs.tensor(f1, f3)?;
        conditional_expectation(&self.pair_space, &tensor, &self.orbits)
    }

    /// `L(x) = Σ_z μ_{σ(x)}(z) · f2(z) · H(x, z)` over the `S`-orbit block
    /// of `x`.
    pub fn integrate_fibers(&self, f2: &Observable<S>, h: &Observable<S>) -> Result<Observable<S>> {
        let n = self.pairs.base_n();
        let mut values = Vec::with_capacity(n);
        for x in 0..n {
            let mut acc = S::Acc::default();
            for &(z, ref w) in self.dis.measure_at(x) {
                let idx = self.pairs.index_of(x, z).ok_or_else(|| {
                    Error::internal("relative product support is missing a same-block pair")
                })?;
                acc.add(w.clone() * f2.value(z).clone() * h.value(idx).clone());
            }
            values.push(acc.finish());
        }
        Ok(Observable::new(values))
    }
}

/// The exact limit of [`multi_average`] as `n → ∞`.
///
/// Computed as a closed-form projection, never by extrapolation: condition
/// `f1 ⊗ f3` onto the `T×T`-orbit partition of the relative product over
/// `I_S`, then integrate the result against `f2` along the `S`-orbit
/// fibers. Exact for exact scalars.
pub fn multi_limit<S: Scalar>(
    pair: &CommutingPair<S>,
    f1: &Observable<S>,
    f2: &Observable<S>,
    f3: &Observable<S>,
) -> Result<Observable<S>> {
    let space = pair.space();
    space.check_len(f1.len())?;
    space.check_len(f2.len())?;
    space.check_len(f3.len())?;
    MultiLimitEngine::new(pair)?.limit(f1, f2, f3)
}

/// The same limit computed from the other side: condition `f2 ⊗ f3` onto
/// the `S×S` orbits of the relative product over `I_T`, then integrate
/// against `f1` along the `T`-orbit fibers. Equals [`multi_limit`]; the two
/// formulas are the two ways of splitting the double average.
pub fn multi_limit_dual<S: Scalar>(
    pair: &CommutingPair<S>,
    f1: &Observable<S>,
    f2: &Observable<S>,
    f3: &Observable<S>,
) -> Result<Observable<S>> {
    multi_limit(&pair.swapped(), f2, f1, f3)
}

/// The iterated limit: first the `h`-average, then the `g`-average,
///
/// ```text
/// L′(x) = lim_g avg_{Φ} f₁(T_g x) · E(f₂ · (f₃ ∘ T_g) | I_S)(x)
/// ```
///
/// evaluated exactly by averaging uniformly over the image group of `T`
/// (the limit of any Følner box average of a function of `T_g` alone).
/// Agrees with [`multi_limit`]. Errors if the image group of `T` exceeds
/// [`GROUP_ENUMERATION_CAP`].
pub fn iterated_limit<S: Scalar>(
    pair: &CommutingPair<S>,
    f1: &Observable<S>,
    f2: &Observable<S>,
    f3: &Observable<S>,
) -> Result<Observable<S>> {
    let space = pair.space();
    space.check_len(f1.len())?;
    space.check_len(f2.len())?;
    space.check_len(f3.len())?;
    let i_s = pair.s().orbit_partition();
    let image = pair.t().image_group(GROUP_ENUMERATION_CAP)?;
    let n = space.n();
    let mut accs: Vec<S::Acc> = (0..n).map(|_| S::Acc::default()).collect();
    for a in &image {
        let inner = conditional_expectation(space, &f2.mul(&pullback_by(a, f3))?, &i_s)?;
        for (x, acc) in accs.iter_mut().enumerate() {
            acc.add(f1.value(a.apply(x)).clone() * inner.value(x).clone());
        }
    }
    let denom = S::from_int(image.len() as i64);
    Ok(Observable::new(
        accs.into_iter()
            .map(|acc| acc.finish() / denom.clone())
            .collect(),
    ))
}

/// The diagonal window average `(1/|Φ_n|) Σ_{g∈Φ_n} φ(T_g x) ψ(S_g T_g x)`
/// — one group variable driving both actions.
pub fn diagonal_average<S: Scalar>(
    pair: &CommutingPair<S>,
    phi: &Observable<S>,
    psi: &Observable<S>,
    seq: &FolnerSequence,
    n: u64,
) -> Result<Observable<S>> {
    let space = pair.space();
    space.check_len(phi.len())?;
    space.check_len(psi.len())?;
    let (perms, counts, window_size) = pair.window_image_pairs(seq, n)?;
    let denom = S::from_int(i64::try_from(window_size).map_err(|_| Error::WindowTooLarge {
        stage: n,
        size: window_size as u128,
        cap: i64::MAX as u64,
    })?);
    let values: Vec<S> = (0..space.n())
        .map(|x| {
            let mut acc = S::Acc::default();
            for ((pt, ps), &c) in perms.iter().zip(&counts) {
                let tx = pt.apply(x);
                acc.add(
                    S::from_int(c as i64)
                        * phi.value(tx).clone()
                        * psi.value(ps.apply(tx)).clone(),
                );
            }
            acc.finish() / denom.clone()
        })
        .collect();
    Ok(Observable::new(values))
}

/// The exact limit of [`diagonal_average`].
///
/// The term is `(φ ⊗ ψ)(R_g(x, x))` for the graph action
/// `R_g(u, v) = (T_g u, S_g T_g v)` on `X × X`, so the limit is the
/// ergodic limit of `φ ⊗ ψ` under `R` read off along the diagonal — the
/// uniform average of `φ(u)ψ(v)` over the `R`-orbit of `(x, x)`.
pub fn diagonal_limit<S: Scalar>(
    pair: &CommutingPair<S>,
    phi: &Observable<S>,
    psi: &Observable<S>,
) -> Result<Observable<S>> {
    let space = pair.space();
    space.check_len(phi.len())?;
    space.check_len(psi.len())?;
    // g ↦ S_g ∘ T_g is itself an action (the two commute), so R is the
    // product of T with it.
    let composite_gens = pair
        .t()
        .generators()
        .iter()
        .zip(pair.s().generators())
        .map(|(t, s)| s.compose(t))
        .collect();
    let composite = Action::from_generators(
        pair.group().clone(),
        pair.space_ref(),
        composite_gens,
    )?;
    let full = relative_product(space, &Partition::trivial(space.n()))?;
    let graph = product_action(pair.t(), &composite, &full)?;
    let orbits = graph.orbit_partition();
    let tensor = full.tensor(phi, psi)?;
    let h = conditional_expectation(&full.as_space()?, &tensor, &orbits)?;
    let values = (0..space.n())
        .map(|x| {
            full.index_of(x, x)
                .map(|i| h.value(i).clone())
                .ok_or_else(|| Error::internal("full product support is missing a diagonal pair"))
        })
        .collect::<Result<Vec<S>>>()?;
    Ok(Observable::new(values))
}

fn require_nonneg<S: Scalar>(f: &Observable<S>) -> Result<()> {
    for (index, v) in f.values().iter().enumerate() {
        if !v.is_nonneg_real() {
            return Err(Error::NegativeEntry { index });
        }
    }
    Ok(())
}

fn require_group(group: &GroupSpec, seq: &FolnerSequence) -> Result<()> {
    if seq.group() != group {
        return Err(Error::MismatchedGroups);
    }
    Ok(())
}

/// Both sides of the four-term recurrence bound for nonnegative `f`:
///
/// ```text
/// lim_n (1/|Φ_n||Ψ_n|) Σ_{g,h} ∫ f · T_g f · S_h f · T_g S_h f dμ  ≥  (∫ f dμ)⁴
/// ```
///
/// Returns `(left, right)`. The left side is the exact limit
/// `∫ f · multi_limit(f, f, f) dμ`; by the convergence theorem it does not
/// depend on the chosen Følner sequences, which are validated for group
/// compatibility only. Rejects observables with a negative (or non-real)
/// entry.
pub fn four_term_bound<S: Scalar>(
    pair: &CommutingPair<S>,
    f: &Observable<S>,
    seq_t: &FolnerSequence,
    seq_s: &FolnerSequence,
) -> Result<(S, S)> {
    require_nonneg(f)?;
    require_group(pair.group(), seq_t)?;
    require_group(pair.group(), seq_s)?;
    let space = pair.space();
    let limit = multi_limit(pair, f, f, f)?;
    let left = integral(space, &f.mul(&limit)?)?;
    let m = integral(space, f)?;
    let right = m.clone() * m.clone() * m.clone() * m;
    Ok((left, right))
}

/// The finite-stage quantity whose limit [`four_term_bound`] computes:
/// `(1/|Φ_n||Ψ_n|) Σ_{g,h} ∫ f · T_g f · S_h f · T_g S_h f dμ`.
pub fn four_term_average<S: Scalar>(
    pair: &CommutingPair<S>,
    f: &Observable<S>,
    seq_t: &FolnerSequence,
    seq_s: &FolnerSequence,
    n: u64,
) -> Result<S> {
    require_nonneg(f)?;
    let avg = multi_average(pair, f, f, f, seq_t, seq_s, n)?;
    integral(pair.space(), &f.mul(&avg)?)
}

/// Both sides of the single-average recurrence bound for nonnegative `f`:
/// `∫ f · E(f | I_T) dμ ≥ (∫ f dμ)²`. Returns `(left, right)`; the left
/// side is the exact limit of `(1/|Φ_n|) Σ_g ∫ f · T_g f dμ`, independent
/// of the sequence, which is validated for compatibility only.
pub fn khintchine_bound<S: Scalar>(
    a: &Action<S>,
    f: &Observable<S>,
    seq: &FolnerSequence,
) -> Result<(S, S)> {
    require_nonneg(f)?;
    require_group(a.group(), seq)?;
    let space = a.space();
    let limit = ergodic_limit(a, f)?;
    let left = integral(space, &f.mul(&limit)?)?;
    let m = integral(space, f)?;
    let right = m.clone() * m;
    Ok((left, right))
}

/// Weak-mixing decay diagnostic:
/// `(1/|Φ_n|) Σ_{g∈Φ_n} ‖E(f · T_g f | I_S)‖₂`.
///
/// When `f` is orthogonal to the characteristic subspace of the pair, the
/// full-period value vanishes; for other `f` no decay is claimed.
pub fn wm_decay_diagnostic<S: Scalar>(
    pair: &CommutingPair<S>,
    f: &Observable<S>,
    seq: &FolnerSequence,
    n: u64,
) -> Result<f64> {
    let space = pair.space();
    space.check_len(f.len())?;
    let images = pair.t().window_images(seq, n)?;
    let i_s = pair.s().orbit_partition();
    let mut acc = <f64 as Scalar>::Acc::default();
    for (p, &c) in images.perms.iter().zip(&images.counts) {
        let cond = conditional_expectation(space, &f.mul(&pullback_by(p, f))?, &i_s)?;
        acc.add(c as f64 * l2_norm(space, &cond)?);
    }
    Ok(acc.finish() / images.window_size as f64)
}

/// Van-der-Corput-style double average of a bounded family
/// `(g, h) ↦ u_{g,h}`:
///
/// ```text
/// (1/|Φ_m|²|Ψ_m|²) Σ_{j,j'∈Φ_m} Σ_{k,k'∈Ψ_m}
///   (1/|Φ_n||Ψ_n|) Σ_{g∈Φ_n} Σ_{h∈Ψ_n} ⟨ u_{j'g, k'h}, u_{jg, kh} ⟩
/// ```
///
/// A boundedness diagnostic only — no limit claim. Family values are
/// cached by index pair, so the callback runs once per distinct
/// `(translate·window)` element pair.
pub fn vdc_double_average<S: Scalar>(
    space: &FiniteSpace<S>,
    mut family: impl FnMut(&GroupElement, &GroupElement) -> Result<Observable<S>>,
    seq_t: &FolnerSequence,
    seq_s: &FolnerSequence,
    n: u64,
    m: u64,
) -> Result<S> {
    if seq_t.group() != seq_s.group() {
        return Err(Error::MismatchedGroups);
    }
    let group = seq_t.group().clone();
    let phi_n = seq_t.window(n)?;
    let psi_n = seq_s.window(n)?;
    let phi_m = seq_t.window(m)?;
    let psi_m = seq_s.window(m)?;
    let mut cache: HashMap<(GroupElement, GroupElement), Observable<S>> = HashMap::new();
    let mut fetch = |a: GroupElement,
                     b: GroupElement,
                     cache: &mut HashMap<(GroupElement, GroupElement), Observable<S>>|
     -> Result<Observable<S>> {
        if let Some(u) = cache.get(&(a.clone(), b.clone())) {
            return Ok(u.clone());
        }
        let u = family(&a, &b)?;
        space.check_len(u.len())?;
        cache.insert((a, b), u.clone());
        Ok(u)
    };
    let mut acc = S::Acc::default();
    for j in &phi_m {
        for jp in &phi_m {
            for k in &psi_m {
                for kp in &psi_m {
                    for g in &phi_n {
                        for h in &psi_n {
                            let u_left =
                                fetch(group.compose(jp, g)?, group.compose(kp, h)?, &mut cache)?;
                            let u_right =
                                fetch(group.compose(j, g)?, group.compose(k, h)?, &mut cache)?;
                            acc.add(inner_product(space, &u_left, &u_right)?);
                        }
                    }
                }
            }
        }
    }
    let mut out = acc.finish();
    for count in [
        phi_m.len(),
        phi_m.len(),
        psi_m.len(),
        psi_m.len(),
        phi_n.len(),
        psi_n.len(),
    ] {
        out = out / S::from_int(count as i64);
    }
    Ok(out)
}

/// Verdict of [`constancy_check`].
#[derive(Debug, Clone)]
pub enum ConstancyReport<S: Scalar> {
    /// `T×T` and `S×S` are both ergodic on the product square; the limit
    /// was constant (spread ≤ tolerance) on every random trial.
    Constant {
        tt_orbits: usize,
        ss_orbits: usize,
        trials: u32,
        max_spread: f64,
    },
    /// At least one product action is non-ergodic; `witness` is a triple
    /// whose limit visibly varies.
    NonConstant {
        tt_orbits: usize,
        ss_orbits: usize,
        witness: (Observable<S>, Observable<S>, Observable<S>),
        limit: Observable<S>,
        spread: f64,
    },
}

/// Largest pairwise distance between entries — 0 exactly when constant.
fn spread<S: Scalar>(f: &Observable<S>) -> f64 {
    let v = f.values();
    let mut worst = 0.0f64;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d = (v[i].clone() - v[j].clone()).abs_sq().sqrt();
            worst = worst.max(d);
        }
    }
    worst
}

fn random_observable<S: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Observable<S> {
    let dist = Uniform::new_inclusive(-1.0f64, 1.0);
    Observable::new((0..n).map(|_| S::from_f64(dist.sample(rng))).collect())
}

/// Decides whether the limit of the double averages is constant (μ-a.e.,
/// i.e. everywhere here) for *every* triple of observables.
///
/// The criterion: constancy for all triples holds exactly when `T×T` and
/// `S×S` are both ergodic on the product square. The orbit counts of both
/// product actions decide the verdict; the rest is corroboration. In the
/// ergodic case the limit is checked constant on `trials` seeded random
/// triples. In the non-ergodic case a witness triple is produced, trying in
/// order: an indicator of a joint `(T, S)`-orbit (whose limit is its own
/// conditional expectation), then a sweep of point-mass triples `(δ_i, δ_j,
/// δ_k)` — complete, because the limit is multilinear in the triple, so if
/// every point-mass triple had constant limit every triple would — then
/// seeded random triples. Any disagreement between the orbit counts and the
/// observed limits is reported as an internal error rather than papered
/// over.
pub fn constancy_check<S: Scalar>(
    pair: &CommutingPair<S>,
    trials: u32,
    seed: u64,
) -> Result<ConstancyReport<S>> {
    let space = pair.space();
    let n = space.n();
    let full = relative_product(space, &Partition::trivial(n))?;
    let tt_orbits = product_action(pair.t(), pair.t(), &full)?
        .orbit_partition()
        .blocks();
    let ss_orbits = product_action(pair.s(), pair.s(), &full)?
        .orbit_partition()
        .blocks();
    let engine = MultiLimitEngine::new(pair)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if tt_orbits == 1 && ss_orbits == 1 {
        let mut max_spread = 0.0f64;
        for _ in 0..trials {
            let f1 = random_observable::<S>(n, &mut rng);
            let f2 = random_observable::<S>(n, &mut rng);
            let f3 = random_observable::<S>(n, &mut rng);
            let s = spread(&engine.limit(&f1, &f2, &f3)?);
            max_spread = max_spread.max(s);
            if s > CONSTANCY_TOLERANCE {
                return Err(Error::internal(
                    "product actions are ergodic but a limit came out non-constant",
                ));
            }
        }
        return Ok(ConstancyReport::Constant {
            tt_orbits,
            ss_orbits,
            trials,
            max_spread,
        });
    }

    let report = |witness: (Observable<S>, Observable<S>, Observable<S>),
                  limit: Observable<S>,
                  s: f64| ConstancyReport::NonConstant {
        tt_orbits,
        ss_orbits,
        witness,
        limit,
        spread: s,
    };

    // A joint-orbit indicator as f3 (with f1 = f2 = 1) has limit equal to
    // itself, so any non-trivial joint orbit is an immediate witness.
    let joint = pair.joint_orbit_partition();
    if joint.blocks() > 1 {
        let one = Observable::constant(n, S::one());
        let f3 = Observable::indicator(n, joint.members()[0].iter().copied());
        let limit = engine.limit(&one, &one, &f3)?;
        let s = spread(&limit);
        if s > CONSTANCY_TOLERANCE {
            return Ok(report((one.clone(), one, f3), limit, s));
        }
    }

    // Point-mass sweep: complete by multilinearity of the limit.
    for i in 0..n {
        let d_i = Observable::indicator(n, [i]);
        for k in 0..n {
            let d_k = Observable::indicator(n, [k]);
            let h = engine.project_tensor(&d_i, &d_k)?;
            for j in 0..n {
                let d_j = Observable::indicator(n, [j]);
                let limit = engine.integrate_fibers(&d_j, &h)?;
                let s = spread(&limit);
                if s > CONSTANCY_TOLERANCE {
                    return Ok(report((d_i, d_j, d_k), limit, s));
                }
            }
        }
    }

    // Unreachable if the criterion holds; kept as corroboration.
    for _ in 0..trials {
        let f1 = random_observable::<S>(n, &mut rng);
        let f2 = random_observable::<S>(n, &mut rng);
        let f3 = random_observable::<S>(n, &mut rng);
        let limit = engine.limit(&f1, &f2, &f3)?;
        let s = spread(&limit);
        if s > CONSTANCY_TOLERANCE {
            return Ok(report((f1, f2, f3), limit, s));
        }
    }
    Err(Error::internal(
        "a product action is non-ergodic but every probed limit was constant",
    ))
}

/// One stage of a convergence report.
#[derive(Debug, Clone)]
pub struct StageEntry<S: Scalar> {
    pub n: u64,
    pub average: Observable<S>,
    /// `‖A_n − L‖₂` against the exact limit.
    pub deviation: f64,
}

/// Finite stages of the double average next to the exact limit.
#[derive(Debug, Clone)]
pub struct AverageReport<S: Scalar> {
    pub stages: Vec<StageEntry<S>>,
    pub limit: Observable<S>,
}

/// Runs [`multi_average`] at each listed stage (strictly increasing) and
/// measures its `L²` distance from [`multi_limit`].
pub fn average_report<S: Scalar>(
    pair: &CommutingPair<S>,
    f1: &Observable<S>,
    f2: &Observable<S>,
    f3: &Observable<S>,
    seq_t: &FolnerSequence,
    seq_s: &FolnerSequence,
    stages: &[u64],
) -> Result<AverageReport<S>> {
    if stages.is_empty() {
        return Err(Error::InvalidSchedule {
            reason: "no stages given".into(),
        });
    }
    if stages.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule {
            reason: "stages must be strictly increasing".into(),
        });
    }
    let limit = multi_limit(pair, f1, f2, f3)?;
    let space = pair.space();
    let stages = stages
        .iter()
        .map(|&n| {
            let average = multi_average(pair, f1, f2, f3, seq_t, seq_s, n)?;
            let deviation = l2_distance(space, &average, &limit)?;
            Ok(StageEntry {
                n,
                average,
                deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AverageReport { stages, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Permutation;
    use crate::space::SpaceRef;
    use std::sync::Arc;

    fn z_action(weights: Vec<f64>, map: &[usize]) -> Action<f64> {
        let space: SpaceRef<f64> = Arc::new(FiniteSpace::new(weights).unwrap());
        Action::from_generators(
            GroupSpec::free_abelian(1).unwrap(),
            space,
            vec![Permutation::new(map.to_vec()).unwrap()],
        )
        .unwrap()
    }

    /// T = S = the flip on two uniform points.
    fn flip_pair() -> CommutingPair<f64> {
        let t = z_action(vec![0.5, 0.5], &[1, 0]);
        let s = z_action(vec![0.5, 0.5], &[1, 0]);
        CommutingPair::new(t, s).unwrap()
    }

    fn identity_pair(n: usize) -> CommutingPair<f64> {
        let space: SpaceRef<f64> = Arc::new(FiniteSpace::uniform(n).unwrap());
        let g = GroupSpec::free_abelian(1).unwrap();
        let t = Action::identity(g.clone(), Arc::clone(&space)).unwrap();
        let s = Action::identity(g, space).unwrap();
        CommutingPair::new(t, s).unwrap()
    }

    fn chi() -> Observable<f64> {
        Observable::new(vec![1.0, -1.0])
    }

    fn zseq() -> FolnerSequence {
        FolnerSequence::boxes_zero_to_n(&GroupSpec::free_abelian(1).unwrap()).unwrap()
    }

    #[test]
    fn rotation_average_hits_the_mean_at_full_period() {
        let a = z_action(vec![0.25; 4], &[1, 2, 3, 0]);
        let f = Observable::new(vec![1.0, 0.0, 0.0, 0.0]);
        let avg = ergodic_average(&a, &f, &zseq(), 4).unwrap();
        assert_eq!(avg.values(), &[0.25; 4]);
        let lim = ergodic_limit(&a, &f).unwrap();
        assert_eq!(lim.values(), &[0.25; 4]);
    }

    #[test]
    fn ergodic_limit_takes_block_means() {
        let a = z_action(vec![1.0 / 3.0; 3], &[1, 0, 2]);
        let f = Observable::new(vec![6.0, 0.0, 3.0]);
        let lim = ergodic_limit(&a, &f).unwrap();
        assert_eq!(lim.values(), &[3.0, 3.0, 3.0]);
    }

    #[test]
    fn identity_pair_average_is_the_pointwise_product() {
        let pair = identity_pair(3);
        let f1 = Observable::new(vec![1.0, 2.0, -1.0]);
        let f2 = Observable::new(vec![0.5, 0.0, 4.0]);
        let f3 = Observable::new(vec![2.0, 1.0, 1.0]);
        let expected = f1.mul(&f2).unwrap().mul(&f3).unwrap();
        for n in [1, 3, 7] {
            let avg = multi_average(&pair, &f1, &f2, &f3, &zseq(), &zseq(), n).unwrap();
            assert_eq!(avg.values(), expected.values());
        }
        let lim = multi_limit(&pair, &f1, &f2, &f3).unwrap();
        assert_eq!(lim.values(), expected.values());
    }

    #[test]
    fn flip_triple_average_is_chi_at_every_stage() {
        let pair = flip_pair();
        let chi = chi();
        for n in 1..=6 {
            let avg = multi_average(&pair, &chi, &chi, &chi, &zseq(), &zseq(), n).unwrap();
            assert_eq!(avg.values(), chi.values());
        }
        let lim = multi_limit(&pair, &chi, &chi, &chi).unwrap();
        assert_eq!(lim.values(), chi.values());
    }

    #[test]
    fn flip_middle_chi_has_zero_limit() {
        let pair = flip_pair();
        let one = Observable::constant(2, 1.0);
        let lim = multi_limit(&pair, &one, &chi(), &one).unwrap();
        assert_eq!(lim.values(), &[0.0, 0.0]);
    }

    #[test]
    fn the_three_limit_formulas_agree() {
        let pair = flip_pair();
        let chi = chi();
        let one = Observable::constant(2, 1.0);
        for (f1, f2, f3) in [
            (&chi, &chi, &chi),
            (&one, &chi, &one),
            (&chi, &one, &chi),
        ] {
            let a = multi_limit(&pair, f1, f2, f3).unwrap();
            let b = multi_limit_dual(&pair, f1, f2, f3).unwrap();
            let c = iterated_limit(&pair, f1, f2, f3).unwrap();
            assert_eq!(a.values(), b.values());
            assert_eq!(a.values(), c.values());
        }
    }

    #[test]
    fn four_term_bound_on_the_flip_indicator() {
        let pair = flip_pair();
        let f = Observable::new(vec![1.0, 0.0]);
        let (left, right) = four_term_bound(&pair, &f, &zseq(), &zseq()).unwrap();
        assert_eq!(left, 0.125);
        assert_eq!(right, 0.0625);
        // Full-period finite stage reproduces the limit side exactly.
        let stage = four_term_average(&pair, &f, &zseq(), &zseq(), 2).unwrap();
        assert_eq!(stage, left);
    }

    #[test]
    fn four_term_bound_rejects_negative_entries() {
        let pair = flip_pair();
        assert!(matches!(
            four_term_bound(&pair, &chi(), &zseq(), &zseq()),
            Err(Error::NegativeEntry { index: 1 })
        ));
    }

    #[test]
    fn khintchine_bound_is_tight_on_the_flip() {
        let pair = flip_pair();
        let f = Observable::new(vec![1.0, 0.0]);
        let (left, right) = khintchine_bound(pair.t(), &f, &zseq()).unwrap();
        assert_eq!(left, 0.25);
        assert_eq!(right, 0.25);
    }

    #[test]
    fn diagonal_average_on_the_flip_vanishes_at_full_period() {
        let pair = flip_pair();
        let chi = chi();
        let avg = diagonal_average(&pair, &chi, &chi, &zseq(), 2).unwrap();
        assert_eq!(avg.values(), &[0.0, 0.0]);
        let lim = diagonal_limit(&pair, &chi, &chi).unwrap();
        assert_eq!(lim.values(), &[0.0, 0.0]);
    }

    #[test]
    fn diagonal_average_with_unit_psi_is_the_single_average() {
        let pair = flip_pair();
        let phi = Observable::new(vec![3.0, 1.0]);
        let one = Observable::constant(2, 1.0);
        for n in 1..=4 {
            let diag = diagonal_average(&pair, &phi, &one, &zseq(), n).unwrap();
            let single = ergodic_average(pair.t(), &phi, &zseq(), n).unwrap();
            assert_eq!(diag.values(), single.values());
        }
    }

    #[test]
    fn wm_decay_is_zero_for_zero_and_positive_for_constants() {
        let pair = flip_pair();
        let zero = Observable::constant(2, 0.0);
        assert_eq!(wm_decay_diagnostic(&pair, &zero, &zseq(), 4).unwrap(), 0.0);
        let one = Observable::constant(2, 1.0);
        let v = wm_decay_diagnostic(&pair, &one, &zseq(), 4).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vdc_average_of_a_constant_unit_family_is_one() {
        let pair = flip_pair();
        let chi = chi();
        // u_{g,h} = T_g χ · S_h χ · T_g S_h χ = χ for the flip pair.
        let space = pair.space().clone();
        let v = vdc_double_average(
            &space,
            |_, _| Ok(chi.clone()),
            &zseq(),
            &zseq(),
            2,
            2,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constancy_check_flags_the_flip_with_a_witness() {
        let pair = flip_pair();
        match constancy_check(&pair, 5, 7).unwrap() {
            ConstancyReport::NonConstant {
                tt_orbits,
                spread,
                limit,
                ..
            } => {
                assert!(tt_orbits > 1);
                // The sweep finds (δ₀, δ₀, δ₀), whose limit is (1/4, 0).
                assert_eq!(spread, 0.25);
                assert!(crate::space::l2_norm(pair.space(), &limit).unwrap() > 0.0);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn constancy_check_accepts_a_one_point_system() {
        let pair = identity_pair(1);
        match constancy_check(&pair, 5, 7).unwrap() {
            ConstancyReport::Constant {
                tt_orbits,
                ss_orbits,
                ..
            } => {
                assert_eq!(tt_orbits, 1);
                assert_eq!(ss_orbits, 1);
            }
            other => panic!("expected a constant verdict, got {other:?}"),
        }
    }

    #[test]
    fn identity_on_two_points_has_a_trivial_witness() {
        let pair = identity_pair(2);
        match constancy_check(&pair, 5, 7).unwrap() {
            ConstancyReport::NonConstant { witness, limit, .. } => {
                // f1 = f2 = 1, f3 an orbit indicator gives L = f3.
                assert_eq!(limit.values(), witness.2.values());
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn report_requires_increasing_stages_and_sees_exactness() {
        let pair = flip_pair();
        let chi = chi();
        assert!(average_report(&pair, &chi, &chi, &chi, &zseq(), &zseq(), &[2, 2]).is_err());
        let report =
            average_report(&pair, &chi, &chi, &chi, &zseq(), &zseq(), &[1, 2, 4]).unwrap();
        assert_eq!(report.stages.len(), 3);
        for stage in &report.stages {
            assert_eq!(stage.deviation, 0.0);
        }
    }
}
