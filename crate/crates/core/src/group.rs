//! Acting groups and Følner (window) sequences.
//!
//! Two group shapes cover this crate's needs:
//!
//! * [`GroupSpec::FreeAbelian`] — `ℤ^d`, with elements given by integer
//!   vectors. Window sequences are boxes `Π_i [Mᵢ(n), Nᵢ(n))` whose side
//!   lengths grow affinely in the stage `n`; the default is the symmetric
//!   box `[-n, n]^d`.
//! * [`GroupSpec::FiniteTable`] — a finite group given by its multiplication
//!   table (not necessarily abelian). The constant sequence `Φ_n = G` is the
//!   canonical two-sided Følner sequence, and averages over it are exact
//!   projections at every stage.
//!
//! [`FolnerSequence::defect`] reports how far a window is from invariance
//! under a fixed group element: the pair
//! `(|Φ_n ∩ gΦ_n| / |Φ_n|, |Φ_n ∩ Φ_n g| / |Φ_n|)`, which tends to `(1, 1)`
//! as the stage grows.

use crate::error::{Error, Result};

/// Hard cap on enumerated window sizes.
pub const WINDOW_CAP: u64 = 1_000_000;

/// A finite group presented by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupTable {
    order: usize,
    /// Row-major: `table[a * order + b] = a · b`.
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    /// Validates closure, associativity, identity and inverses.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::InvalidGroupTable {
                reason: "empty table".into(),
            });
        }
        let mut table = Vec::with_capacity(order * order);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidGroupTable {
                    reason: format!("row {i} has length {} in a table of order {order}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(Error::InvalidGroupTable {
                        reason: format!("entry ({i}, {j}) = {v} is out of range"),
                    });
                }
                table.push(v);
            }
        }
        let mul = |a: usize, b: usize| table[a * order + b];
        // Identity: the unique element acting trivially on both sides.
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| mul(e, a) == a && mul(a, e) == a))
            .ok_or_else(|| Error::InvalidGroupTable {
                reason: "no identity element".into(),
            })?;
        let mut inverse = vec![usize::MAX; order];
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or_else(|| Error::InvalidGroupTable {
                    reason: format!("element {a} has no inverse"),
                })?;
            inverse[a] = inv;
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(Error::InvalidGroupTable {
                            reason: format!("associativity fails at ({a}, {b}, {c})"),
                        });
                    }
                }
            }
        }
        Ok(Self {
            order,
            table,
            identity,
            inverse,
        })
    }

    /// The cyclic group `ℤ_m` as a table.
    pub fn cyclic(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGroupTable {
                reason: "cyclic group of order zero".into(),
            });
        }
        Self::new(
            (0..m)
                .map(|a| (0..m).map(|b| (a + b) % m).collect())
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

/// The acting group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    /// `ℤ^rank`.
    FreeAbelian { rank: usize },
    /// A finite group given by its multiplication table.
    FiniteTable(FiniteGroupTable),
}

impl GroupSpec {
    pub fn free_abelian(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid_parameter("rank must be at least 1"));
        }
        Ok(GroupSpec::FreeAbelian { rank })
    }

    /// Number of generators an action of this group takes: the rank for
    /// `ℤ^d`, one permutation per element for a finite table.
    pub fn generator_count(&self) -> usize {
        match self {
            GroupSpec::FreeAbelian { rank } => *rank,
            GroupSpec::FiniteTable(t) => t.order(),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::FreeAbelian { rank } => GroupElement::FreeAbelian(vec![0; *rank]),
            GroupSpec::FiniteTable(t) => GroupElement::FiniteTable(t.identity()),
        }
    }

    pub fn validate_element(&self, g: &GroupElement) -> Result<()> {
        match (self, g) {
            (GroupSpec::FreeAbelian { rank }, GroupElement::FreeAbelian(v)) => {
                if v.len() == *rank {
                    Ok(())
                } else {
                    Err(Error::InvalidGroupElement {
                        reason: format!("vector of rank {} in ℤ^{rank}", v.len()),
                    })
                }
            }
            (GroupSpec::FiniteTable(t), GroupElement::FiniteTable(i)) => {
                if *i < t.order() {
                    Ok(())
                } else {
                    Err(Error::InvalidGroupElement {
                        reason: format!("index {i} in a group of order {}", t.order()),
                    })
                }
            }
            _ => Err(Error::InvalidGroupElement {
                reason: "element shape does not match the group".into(),
            }),
        }
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.validate_element(a)?;
        self.validate_element(b)?;
        Ok(match(a, b) {
            (GroupElement::FreeAbelian(u), GroupElement::FreeAbelian(v)) => {
                GroupElement::FreeAbelian(u.iter().zip(v).map(|(x, y)| x + y).collect())
            }
            (GroupElement::FiniteTable(i), GroupElement::FiniteTable(j)) => {
                let GroupSpec::FiniteTable(t) = self else {
                    unreachable!("validated above")
                };
                GroupElement::FiniteTable(t.mul(*i, *j))
            }
            _ => unreachable!("validated above"),
        })
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.validate_element(a)?;
        Ok(match a {
            GroupElement::FreeAbelian(u) => {
                GroupElement::FreeAbelian(u.iter().map(|x| -x).collect())
            }
            GroupElement::FiniteTable(i) => {
                let GroupSpec::FiniteTable(t) = self else {
                    unreachable!("validated above")
                };
                GroupElement::FiniteTable(t.inverse(*i))
            }
        })
    }
}

/// A group element: an integer vector for `ℤ^d`, an index for a table group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    FreeAbelian(Vec<i64>),
    FiniteTable(usize),
}

impl GroupElement {
    pub fn vector(coords: impl Into<Vec<i64>>) -> Self {
        GroupElement::FreeAbelian(coords.into())
    }

    pub fn int(k: i64) -> Self {
        GroupElement::FreeAbelian(vec![k])
    }
}

/// Per-axis affine window bounds: the interval `[lo(n), hi(n))` with
/// `lo(n) = lo_coef·n + lo_off` and `hi(n) = hi_coef·n + hi_off`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisSchedule {
    pub lo_coef: i64,
    pub lo_off: i64,
    pub hi_coef: i64,
    pub hi_off: i64,
}

impl AxisSchedule {
    /// `[0, n)`.
    pub fn zero_to_n() -> Self {
        Self {
            lo_coef: 0,
            lo_off: 0,
            hi_coef: 1,
            hi_off: 0,
        }
    }

    /// The closed symmetric box `[-n, n]`, i.e. `[-n, n+1)`.
    pub fn symmetric() -> Self {
        Self {
            lo_coef: -1,
            lo_off: 0,
            hi_coef: 1,
            hi_off: 1,
        }
    }

    /// `[offset, offset + n)`.
    pub fn translated_by(offset: i64) -> Self {
        Self {
            lo_coef: 0,
            lo_off: offset,
            hi_coef: 1,
            hi_off: offset,
        }
    }

    pub fn lo(&self, n: u64) -> i64 {
        self.lo_coef * n as i64 + self.lo_off
    }

    pub fn hi(&self, n: u64) -> i64 {
        self.hi_coef * n as i64 + self.hi_off
    }

    pub fn width(&self, n: u64) -> i64 {
        self.hi(n) - self.lo(n)
    }
}

/// Window shapes for a Følner sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolnerSchedule {
    /// Boxes `Π_i [loᵢ(n), hiᵢ(n))` in `ℤ^d`.
    Boxes(Vec<AxisSchedule>),
    /// The constant sequence `Φ_n = G` for a finite group.
    FullGroup,
}

/// A validated Følner sequence for a specific group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerSequence {
    group: GroupSpec,
    schedule: FolnerSchedule,
}

impl FolnerSequence {
    pub fn new(group: GroupSpec, schedule: FolnerSchedule) -> Result<Self> {
        match (&group, &schedule) {
            (GroupSpec::FreeAbelian { rank }, FolnerSchedule::Boxes(axes)) => {
                if axes.len() != *rank {
                    return Err(Error::InvalidSchedule {
                        reason: format!("{} axis schedules for ℤ^{rank}", axes.len()),
                    });
                }
                for (i, axis) in axes.iter().enumerate() {
                    if axis.hi_coef <= axis.lo_coef {
                        return Err(Error::InvalidSchedule {
                            reason: format!("axis {i} width does not grow with the stage"),
                        });
                    }
                }
            }
            (GroupSpec::FiniteTable(_), FolnerSchedule::FullGroup) => {}
            (GroupSpec::FreeAbelian { .. }, FolnerSchedule::FullGroup) => {
                return Err(Error::InvalidSchedule {
                    reason: "full-group windows need a finite group".into(),
                });
            }
            (GroupSpec::FiniteTable(_), FolnerSchedule::Boxes(_)) => {
                return Err(Error::InvalidSchedule {
                    reason: "box windows need a free abelian group".into(),
                });
            }
        }
        Ok(Self { group, schedule })
    }

    /// The default sequence: symmetric boxes `[-n, n]^d` for `ℤ^d`, the full
    /// group for a finite table.
    pub fn default_for(group: &GroupSpec) -> Self {
        let schedule = match group {
            GroupSpec::FreeAbelian { rank } => {
                FolnerSchedule::Boxes(vec![AxisSchedule::symmetric(); *rank])
            }
            GroupSpec::FiniteTable(_) => FolnerSchedule::FullGroup,
        };
        Self {
            group: group.clone(),
            schedule,
        }
    }

    /// Boxes `[0, n)^d`; these hit group averages exactly when `n` is a
    /// multiple of the action's period.
    pub fn boxes_zero_to_n(group: &GroupSpec) -> Result<Self> {
        match group {
            GroupSpec::FreeAbelian { rank } => Self::new(
                group.clone(),
                FolnerSchedule::Boxes(vec![AxisSchedule::zero_to_n(); *rank]),
            ),
            GroupSpec::FiniteTable(_) => Self::new(group.clone(), FolnerSchedule::FullGroup),
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn schedule(&self) -> &FolnerSchedule {
        &self.schedule
    }

    /// Exact size of the window at stage `n`.
    pub fn size(&self, n: u64) -> Result<u64> {
        match &self.schedule {
            FolnerSchedule::FullGroup => {
                let GroupSpec::FiniteTable(t) = &self.group else {
                    unreachable!("validated in new")
                };
                Ok(t.order() as u64)
            }
            FolnerSchedule::Boxes(axes) => {
                let mut size: u128 = 1;
                for axis in axes {
                    let w = axis.width(n);
                    if w <= 0 {
                        return Err(Error::EmptyWindow { stage: n });
                    }
                    size = size.saturating_mul(w as u128);
                }
                if size > WINDOW_CAP as u128 {
                    return Err(Error::WindowTooLarge {
                        stage: n,
                        size,
                        cap: WINDOW_CAP,
                    });
                }
                Ok(size as u64)
            }
        }
    }

    /// Enumerates the window at stage `n` in lexicographic order.
    pub fn window(&self, n: u64) -> Result<Vec<GroupElement>> {
        self.size(n)?;
        match &self.schedule {
            FolnerSchedule::FullGroup => {
                let GroupSpec::FiniteTable(t) = &self.group else {
                    unreachable!("validated in new")
                };
                Ok((0..t.order()).map(GroupElement::FiniteTable).collect())
            }
            FolnerSchedule::Boxes(axes) => {
                let mut out = Vec::new();
                let mut coords: Vec<i64> = axes.iter().map(|a| a.lo(n)).collect();
                loop {
                    out.push(GroupElement::FreeAbelian(coords.clone()));
                    // Odometer increment, last axis fastest.
                    let mut axis = axes.len();
                    loop {
                        if axis == 0 {
                            return Ok(out);
                        }
                        axis -= 1;
                        coords[axis] += 1;
                        if coords[axis] < axes[axis].hi(n) {
                            break;
                        }
                        coords[axis] = axes[axis].lo(n);
                    }
                }
            }
        }
    }

    /// Two-sided invariance ratios `(|Φ_n ∩ gΦ_n| / |Φ_n|, |Φ_n ∩ Φ_n g| / |Φ_n|)`.
    pub fn defect(&self, g: &GroupElement, n: u64) -> Result<(f64, f64)> {
        self.group.validate_element(g)?;
        match (&self.schedule, g) {
            (FolnerSchedule::FullGroup, GroupElement::FiniteTable(_)) => Ok((1.0, 1.0)),
            (FolnerSchedule::Boxes(axes), GroupElement::FreeAbelian(shift)) => {
                let mut num: u128 = 1;
                let mut den: u128 = 1;
                for (axis, &s) in axes.iter().zip(shift) {
                    let w = axis.width(n);
                    if w <= 0 {
                        return Err(Error::EmptyWindow { stage: n });
                    }
                    let overlap = (w - s.abs()).max(0);
                    num = num.saturating_mul(overlap as u128);
                    den = den.saturating_mul(w as u128);
                }
                let ratio = num as f64 / den as f64;
                // Translation acts the same on both sides of an abelian group.
                Ok((ratio, ratio))
            }
            _ => unreachable!("element validated against the group"),
        }
    }
}
