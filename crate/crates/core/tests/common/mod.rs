//! Seeded generators for random commuting systems, shared across the
//! integration test targets.
//!
//! The recipe never trusts the library's own orbit machinery: commuting
//! permutation generators are drawn first, their joint orbits recomputed
//! here with a plain flood fill, and one random weight constant assigned
//! per joint orbit — exactly the measures a commuting pair on a finite
//! space can preserve without rounding. Construction styles are varied on
//! purpose: per-cycle powers of a shared cycle decomposition, translations
//! on products of cyclic groups, finite-group translation tables, and
//! skew products with integer cocycles.

#![allow(dead_code)]

use std::sync::Arc;

use ergavg::{
    skew_product_pair, Action, CommutingPair, FiniteGroupTable, FiniteSpace, FolnerSequence,
    GroupSpec, Observable, Permutation, Scalar, SpaceRef,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Joint orbit ids under forward applications of all generators (inverses
/// are positive powers on a finite set, so forward closure suffices).
pub fn joint_orbit_ids(n: usize, gens: &[&Permutation]) -> Vec<usize> {
    let mut block = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if block[start] != usize::MAX {
            continue;
        }
        block[start] = next;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for g in gens {
                let y = g.apply(x);
                if block[y] == usize::MAX {
                    block[y] = next;
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    block
}

/// Strictly positive weights, constant on the given blocks, summing to one
/// exactly (in rationals) or to within a few ulps (in floats).
pub fn orbit_constant_weights<S: Scalar>(rng: &mut ChaCha8Rng, block_of: &[usize]) -> Vec<S> {
    let blocks = block_of.iter().max().copied().unwrap_or(0) + 1;
    let numerators: Vec<i64> = (0..blocks).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = block_of.iter().map(|&b| numerators[b]).sum();
    block_of
        .iter()
        .map(|&b| S::from_ratio(numerators[b], total))
        .collect()
}

fn assemble<S: Scalar>(
    rng: &mut ChaCha8Rng,
    group: GroupSpec,
    t_gens: Vec<Permutation>,
    s_gens: Vec<Permutation>,
) -> CommutingPair<S> {
    let n = t_gens[0].n();
    let all: Vec<&Permutation> = t_gens.iter().chain(s_gens.iter()).collect();
    let block_of = joint_orbit_ids(n, &all);
    let weights = orbit_constant_weights::<S>(rng, &block_of);
    let space: SpaceRef<S> = Arc::new(FiniteSpace::new(weights).expect("valid weights"));
    let t = Action::from_generators(group.clone(), space.clone(), t_gens).expect("T action");
    let s = Action::from_generators(group, space, s_gens).expect("S action");
    CommutingPair::new(t, s).expect("commuting pair")
}

/// Both actions act by per-cycle powers of one shared cycle decomposition.
pub fn random_cycle_pair<S: Scalar>(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    rank: usize,
) -> CommutingPair<S> {
    let pool = [1usize, 2, 2, 3, 3, 4, 5, 6];
    let mut lengths: Vec<usize> = Vec::new();
    let mut total = 0;
    while total < 2 || (total < max_n && rng.gen_bool(0.7)) {
        let l = pool[rng.gen_range(0..pool.len())];
        if total + l > max_n {
            if total >= 2 {
                break;
            }
            continue;
        }
        lengths.push(l);
        total += l;
    }
    let n = total;
    let draw = |rng: &mut ChaCha8Rng| -> Permutation {
        let mut map = vec![0usize; n];
        let mut start = 0;
        for &len in &lengths {
            let k = rng.gen_range(0..len);
            for j in 0..len {
                map[start + j] = start + (j + k) % len;
            }
            start += len;
        }
        Permutation::new(map).expect("cycle powers are bijections")
    };
    let t_gens: Vec<Permutation> = (0..rank).map(|_| draw(rng)).collect();
    let s_gens: Vec<Permutation> = (0..rank).map(|_| draw(rng)).collect();
    let group = GroupSpec::free_abelian(rank).expect("positive rank");
    assemble(rng, group, t_gens, s_gens)
}

/// Translations on `ℤ_{m1} × ℤ_{m2}`.
pub fn random_translation_pair<S: Scalar>(rng: &mut ChaCha8Rng, rank: usize) -> CommutingPair<S> {
    let m1 = [2usize, 3, 4, 6][rng.gen_range(0..4)];
    let m2 = [2usize, 3, 4][rng.gen_range(0..3)];
    let n = m1 * m2;
    let translation = |rng: &mut ChaCha8Rng| -> Permutation {
        let a = rng.gen_range(0..m1);
        let b = rng.gen_range(0..m2);
        let map = (0..n)
            .map(|i| {
                let (x, y) = (i / m2, i % m2);
                ((x + a) % m1) * m2 + (y + b) % m2
            })
            .collect();
        Permutation::new(map).expect("translations are bijections")
    };
    let t_gens: Vec<Permutation> = (0..rank).map(|_| translation(rng)).collect();
    let s_gens: Vec<Permutation> = (0..rank).map(|_| translation(rng)).collect();
    let group = GroupSpec::free_abelian(rank).expect("positive rank");
    assemble(rng, group, t_gens, s_gens)
}

/// A cyclic group given by its multiplication table, acting by translations
/// on two disjoint circles of the same length.
pub fn random_table_pair<S: Scalar>(rng: &mut ChaCha8Rng) -> CommutingPair<S> {
    let m = rng.gen_range(2..=8usize);
    let n = 2 * m;
    let homomorphism = |rng: &mut ChaCha8Rng| -> Vec<Permutation> {
        let c0 = rng.gen_range(0..m);
        let c1 = rng.gen_range(0..m);
        (0..m)
            .map(|i| {
                let map = (0..n)
                    .map(|x| {
                        if x < m {
                            (x + i * c0) % m
                        } else {
                            m + (x - m + i * c1) % m
                        }
                    })
                    .collect();
                Permutation::new(map).expect("translations are bijections")
            })
            .collect()
    };
    let t_gens = homomorphism(rng);
    let s_gens = homomorphism(rng);
    let table = FiniteGroupTable::cyclic(m).expect("cyclic table");
    assemble(rng, GroupSpec::FiniteTable(table), t_gens, s_gens)
}

/// A skew product over a two-torus rotation with integer cocycles into a
/// cyclic fiber.
pub fn random_skew_pair<S: Scalar>(rng: &mut ChaCha8Rng) -> CommutingPair<S> {
    let dims = [
        (2usize, 2usize, 2usize),
        (3, 2, 2),
        (2, 3, 2),
        (2, 2, 3),
        (4, 2, 3),
        (3, 2, 4),
        (2, 4, 3),
        (3, 4, 2),
        (4, 3, 2),
        (2, 2, 6),
        (6, 2, 2),
        (2, 2, 4),
    ];
    let (p, q, r) = dims[rng.gen_range(0..dims.len())];
    let tau: Vec<i64> = (0..p).map(|_| rng.gen_range(0..r as i64)).collect();
    let sigma: Vec<i64> = (0..q).map(|_| rng.gen_range(0..r as i64)).collect();
    skew_product_pair::<S>(p, q, r, &tau, &sigma).expect("valid skew data")
}

/// Rotates through all construction styles and both ranks.
pub fn random_system<S: Scalar>(rng: &mut ChaCha8Rng, index: usize) -> CommutingPair<S> {
    match index % 6 {
        0 => random_cycle_pair(rng, 24, 1),
        1 => random_cycle_pair(rng, 24, 2),
        2 => random_translation_pair(rng, 1),
        3 => random_translation_pair(rng, 2),
        4 => random_table_pair(rng),
        _ => random_skew_pair(rng),
    }
}

/// Følner sequences whose stage-`n` windows cover exactly one full period
/// of every generator, together with that stage.
pub fn full_period_window<S: Scalar>(
    pair: &CommutingPair<S>,
) -> (FolnerSequence, FolnerSequence, u64) {
    let period = pair
        .full_period()
        .expect("generated systems stay under the period cap");
    let seq_t = match pair.group() {
        GroupSpec::FreeAbelian { .. } => {
            FolnerSequence::boxes_zero_to_n(pair.group()).expect("box schedule")
        }
        GroupSpec::FiniteTable(_) => FolnerSequence::default_for(pair.group()),
    };
    let seq_s = seq_t.clone();
    (seq_t, seq_s, period)
}

/// Values drawn from small rationals, exact in every scalar mode.
pub fn random_observable<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Observable<S> {
    Observable::new(
        (0..n)
            .map(|_| S::from_ratio(rng.gen_range(-8..=8), rng.gen_range(1..=6)))
            .collect(),
    )
}

/// Nonnegative variant for the recurrence bounds.
pub fn random_nonneg_observable<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Observable<S> {
    Observable::new(
        (0..n)
            .map(|_| S::from_ratio(rng.gen_range(0..=8), rng.gen_range(1..=6)))
            .collect(),
    )
}
