//! Multiple ergodic averages for two commuting actions on a finite
//! measure-preserving system.
//!
//! The central object is the average
//!
//! ```text
//!            1
//! A_n = ─────────── Σ       f1(T_g x) · f2(S_h x) · f3(T_g S_h x)
//!       |Φ_n| |Ψ_n|  (g,h)∈Φ_n×Ψ_n
//! ```
//!
//! for two commuting measure-preserving actions `T`, `S` of an amenable
//! group on the same probability space, with `Φ`, `Ψ` Følner sequences.
//! On a finite space with strictly positive weights everything in the
//! convergence theory — conditional expectations, disintegrations, the
//! relative product, the limit formula, the characteristic projectors, and
//! the three-fold coupling measure — is exactly computable, so the limit
//! theorems become testable identities rather than asymptotic claims. This
//! crate computes both sides of those identities: finite-stage averages by
//! direct summation over group windows, and their limits in closed form.
//!
//! Everything here is a projection of the general theory onto finite
//! systems, not an extrapolation beyond it: window sizes, tolerances, and
//! group-enumeration caps are explicit, and operations that would need a
//! genuinely infinite object (a non-compact orbit, an unbounded window)
//! return errors instead of approximations.
//!
//! The [`combinatorics`] module applies the same bounds to their
//! combinatorial corollaries — density recurrence on ℤ² windows and
//! monochromatic parallelepipeds in ℤ³ colorings.

pub mod action;
pub mod averages;
pub mod combinatorics;
pub mod coupling;
pub mod error;
pub mod grid_io;
pub mod group;
pub mod projector;
pub mod scalar;
pub mod space;

mod unionfind;

pub use action::{
    product_action, pullback_by, skew_product_pair, Action, CommutingPair, Permutation,
    WindowImages, GROUP_ENUMERATION_CAP,
};
pub use averages::{
    average_report, constancy_check, diagonal_average, diagonal_limit, ergodic_average,
    ergodic_limit, four_term_average, four_term_bound, iterated_limit, khintchine_bound,
    multi_average, multi_limit, multi_limit_dual, vdc_double_average, wm_decay_diagnostic,
    AverageReport, ConstancyReport, MultiLimitEngine, StageEntry, CONSTANCY_TOLERANCE,
};
pub use combinatorics::{
    good_pair_set, intersection_count, intersection_density_scan, parallelepiped_search,
    syndeticity_estimate, verify_parallelepiped, window_count, window_density, Coloring3,
    GoodPairs, GridSet, Parallelepiped, Rect,
};
pub use coupling::{lambda_measure, TripleMeasure};
pub use error::{Error, Result};
pub use grid_io::{
    coloring_from_bytes, coloring_to_bytes, grid_from_bytes, grid_to_bytes, read_coloring,
    read_grid, write_coloring, write_grid, GridEncoding,
};
pub use group::{
    AxisSchedule, FiniteGroupTable, FolnerSchedule, FolnerSequence, GroupElement, GroupSpec,
    WINDOW_CAP,
};
pub use projector::{wts_subspace, CharacteristicProjector, RESIDUAL_DROP_TOLERANCE};
pub use scalar::{acc_sum, Accumulator, Scalar};
pub use space::{
    conditional_expectation, disintegration, inner_product, integral, l2_distance, l2_norm,
    relative_product, Disintegration, FiniteSpace, Observable, Partition, SpaceRef,
    WeightedPairSpace,
};
