//! Brute-force combinatorial scanners on finite windows.
//!
//! These realize the recurrence corollaries as finite, checkable
//! computations: densities of subsets of a ℤ² window, the four-fold
//! intersection `E ∩ (E−(g,0)) ∩ (E−(0,h)) ∩ (E−(g,h))` whose density the
//! four-term bound keeps large, the set of "good" shift pairs and its
//! syndeticity constant, and the monochromatic-parallelepiped search in
//! ℤ³ windows.
//!
//! Finite windows replace upper densities, so every quantity here is a
//! surrogate: the window and sub-box are explicit inputs and travel with
//! each result rather than being hidden behind a limit. Translates are
//! written additively (`E(g, 1)` becomes `E − (g, 0)`), fixing the one
//! convention ℤ² needs.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A subset of the window `[0, w1) × [0, w2)` in ℤ², stored as packed bit
/// rows (`x` along the word bits, one row per `y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    w1: u32,
    w2: u32,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl GridSet {
    pub fn new(w1: u32, w2: u32) -> Result<Self> {
        if w1 == 0 || w2 == 0 {
            return Err(Error::invalid_parameter("window sides must be positive"));
        }
        let words_per_row = ((w1 as usize) + 63) / 64;
        Ok(Self {
            w1,
            w2,
            words_per_row,
            bits: vec![0; words_per_row * w2 as usize],
        })
    }

    pub fn full(w1: u32, w2: u32) -> Result<Self> {
        let mut grid = Self::new(w1, w2)?;
        for y in 0..w2 {
            for x in 0..w1 {
                grid.insert(x, y);
            }
        }
        Ok(grid)
    }

    /// The lattice `{(x, y) : p | x, q | y}` inside the window.
    pub fn lattice(w1: u32, w2: u32, p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid_parameter("lattice periods must be positive"));
        }
        let mut grid = Self::new(w1, w2)?;
        for y in (0..w2).step_by(q as usize) {
            for x in (0..w1).step_by(p as usize) {
                grid.insert(x, y);
            }
        }
        Ok(grid)
    }

    pub fn from_points(
        w1: u32,
        w2: u32,
        points: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut grid = Self::new(w1, w2)?;
        for (x, y) in points {
            if x >= w1 || y >= w2 {
                return Err(Error::OutsideWindow {
                    reason: format!("point ({x}, {y}) is outside the window"),
                });
            }
            grid.insert(x, y);
        }
        Ok(grid)
    }

    pub fn width(&self) -> u32 {
        self.w1
    }

    pub fn height(&self) -> u32 {
        self.w2
    }

    pub fn insert(&mut self, x: u32, y: u32) {
        debug_assert!(x < self.w1 && y < self.w2);
        let row = y as usize * self.words_per_row;
        self.bits[row + (x as usize) / 64] |= 1u64 << (x % 64);
    }

    pub fn remove(&mut self, x: u32, y: u32) {
        debug_assert!(x < self.w1 && y < self.w2);
        let row = y as usize * self.words_per_row;
        self.bits[row + (x as usize) / 64] &= !(1u64 << (x % 64));
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        if x >= self.w1 || y >= self.w2 {
            return false;
        }
        let row = y as usize * self.words_per_row;
        self.bits[row + (x as usize) / 64] >> (x % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn row_words(&self, y: u32) -> &[u64] {
        let start = y as usize * self.words_per_row;
        &self.bits[start..start + self.words_per_row]
    }

    /// Writes `out[bit z] = row[bit z + shift]` (zero where `z + shift`
    /// leaves the row).
    fn shift_row_into(&self, y: u32, shift: i64, out: &mut [u64]) {
        let words = self.row_words(y);
        let wpr = self.words_per_row;
        debug_assert_eq!(out.len(), wpr);
        if shift >= 0 {
            let q = (shift / 64) as usize;
            let r = (shift % 64) as u32;
            for i in 0..wpr {
                let lo = words.get(i + q).copied().unwrap_or(0);
                let hi = words.get(i + q + 1).copied().unwrap_or(0);
                out[i] = if r == 0 { lo } else { (lo >> r) | (hi << (64 - r)) };
            }
        } else {
            let s = -shift;
            let q = (s / 64) as usize;
            let r = (s % 64) as u32;
            for i in 0..wpr {
                let hi = if i >= q { words[i - q] } else { 0 };
                let lo = if i >= q + 1 { words[i - q - 1] } else { 0 };
                out[i] = if r == 0 { hi } else { (hi << r) | (lo >> (64 - r)) };
            }
        }
        // Bits past the row width never hold stale data.
        let tail = self.w1 as usize % 64;
        if tail != 0 {
            out[wpr - 1] &= (1u64 << tail) - 1;
        }
    }
}

/// An axis-aligned sub-box `[x0, x0+width) × [y0, y0+height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, width: u32, height: u32) -> Self {
        Self {
            x0,
            y0,
            width,
            height,
        }
    }

    pub fn cells(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    fn validate_in(&self, grid: &GridSet) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid_parameter("sub-box must be non-empty"));
        }
        if self.x0 as u64 + self.width as u64 > grid.width() as u64
            || self.y0 as u64 + self.height as u64 > grid.height() as u64
        {
            return Err(Error::OutsideWindow {
                reason: format!(
                    "sub-box [{}, {})×[{}, {}) exceeds the {}×{} window",
                    self.x0,
                    self.x0 + self.width,
                    self.y0,
                    self.y0 + self.height,
                    grid.width(),
                    grid.height()
                ),
            });
        }
        Ok(())
    }

    fn validate_shift_in(&self, grid: &GridSet, g: i64, h: i64) -> Result<()> {
        let x_lo = self.x0 as i64 + g;
        let x_hi = (self.x0 + self.width) as i64 + g;
        let y_lo = self.y0 as i64 + h;
        let y_hi = (self.y0 + self.height) as i64 + h;
        if x_lo < 0 || x_hi > grid.width() as i64 || y_lo < 0 || y_hi > grid.height() as i64 {
            return Err(Error::OutsideWindow {
                reason: format!("shift ({g}, {h}) pushes the sub-box outside the window"),
            });
        }
        Ok(())
    }
}

/// Number of set cells of `grid` inside `sub`.
pub fn window_count(grid: &GridSet, sub: &Rect) -> Result<u64> {
    sub.validate_in(grid)?;
    let mut count = 0u64;
    let mut buf = vec![0u64; grid.words_per_row];
    for y in sub.y0..sub.y0 + sub.height {
        grid.shift_row_into(y, 0, &mut buf);
        count += masked_count(&buf, sub.x0, sub.width);
    }
    Ok(count)
}

/// `|E ∩ sub| / |sub|`.
pub fn window_density(grid: &GridSet, sub: &Rect) -> Result<f64> {
    Ok(window_count(grid, sub)? as f64 / sub.cells() as f64)
}

/// Number of cells `(x, y)` of `sub` lying in all four of `E`, `E−(g,0)`,
/// `E−(0,h)`, `E−(g,h)` — that is, with `(x,y)`, `(x+g,y)`, `(x,y+h)`,
/// `(x+g,y+h)` all in `E`. Errors if a shifted copy of `sub` leaves the
/// window.
pub fn intersection_count(grid: &GridSet, shifts: (i64, i64), sub: &Rect) -> Result<u64> {
    sub.validate_in(grid)?;
    let (g, h) = shifts;
    sub.validate_shift_in(grid, g, 0)?;
    sub.validate_shift_in(grid, 0, h)?;
    sub.validate_shift_in(grid, g, h)?;
    let wpr = grid.words_per_row;
    let mut row = vec![0u64; wpr];
    let mut row_g = vec![0u64; wpr];
    let mut row_h = vec![0u64; wpr];
    let mut row_gh = vec![0u64; wpr];
    let mut count = 0u64;
    for y in sub.y0..sub.y0 + sub.height {
        let yh = (y as i64 + h) as u32;
        grid.shift_row_into(y, 0, &mut row);
        grid.shift_row_into(y, g, &mut row_g);
        grid.shift_row_into(yh, 0, &mut row_h);
        grid.shift_row_into(yh, g, &mut row_gh);
        for i in 0..wpr {
            row[i] &= row_g[i] & row_h[i] & row_gh[i];
        }
        count += masked_count(&row, sub.x0, sub.width);
    }
    Ok(count)
}

/// Density over `sub` of the four-fold intersection (see
/// [`intersection_count`]).
pub fn intersection_density_scan(
    grid: &GridSet,
    shifts: (i64, i64),
    sub: &Rect,
) -> Result<f64> {
    Ok(intersection_count(grid, shifts, sub)? as f64 / sub.cells() as f64)
}

/// Population count of `words` restricted to bits `[x0, x0+width)`.
fn masked_count(words: &[u64], x0: u32, width: u32) -> u64 {
    let lo = x0 as usize;
    let hi = lo + width as usize;
    let mut count = 0u64;
    for (i, &w) in words.iter().enumerate() {
        let bit_lo = i * 64;
        let bit_hi = bit_lo + 64;
        if bit_hi <= lo || bit_lo >= hi {
            continue;
        }
        let mut m = w;
        if lo > bit_lo {
            m &= !0u64 << (lo - bit_lo);
        }
        if hi < bit_hi {
            m &= (1u64 << (hi - bit_lo)) - 1;
        }
        count += m.count_ones() as u64;
    }
    count
}

/// The qualifying shift pairs found by [`good_pair_set`]: a bit grid over
/// the scanned shift range, together with the base density `δ` and the
/// threshold `δ⁴ − ε` the scan used.
#[derive(Debug, Clone)]
pub struct GoodPairs {
    g0: i64,
    h0: i64,
    grid: GridSet,
    base_density: f64,
    threshold: f64,
}

impl GoodPairs {
    /// Bit grid over the shift range; bit `(i, j)` is shift
    /// `(g₀ + i, h₀ + j)`.
    pub fn grid(&self) -> &GridSet {
        &self.grid
    }

    pub fn origin(&self) -> (i64, i64) {
        (self.g0, self.h0)
    }

    /// `δ = window_density(E, sub)` at scan time.
    pub fn base_density(&self) -> f64 {
        self.base_density
    }

    /// `δ⁴ − ε`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn contains_shift(&self, g: i64, h: i64) -> bool {
        let i = g - self.g0;
        let j = h - self.h0;
        i >= 0
            && j >= 0
            && i < self.grid.width() as i64
            && j < self.grid.height() as i64
            && self.grid.contains(i as u32, j as u32)
    }

    /// Qualifying shifts in row-major scan order.
    pub fn shifts(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for j in 0..self.grid.height() {
            for i in 0..self.grid.width() {
                if self.grid.contains(i, j) {
                    out.push((self.g0 + i as i64, self.h0 + j as i64));
                }
            }
        }
        out
    }
}

/// Scans the half-open shift ranges `g_range × h_range` and marks every
/// pair `(g, h)` whose four-fold intersection density over `sub` exceeds
/// `δ⁴ − ε`, where `δ` is the density of `E` over `sub`.
///
/// Shifts that push `sub` outside the window cannot be evaluated on this
/// finite surrogate and are left unmarked. The recurrence theory says the
/// marked set of the infinite problem is syndetic; on a window,
/// [`syndeticity_estimate`] of the returned grid is its finite stand-in.
pub fn good_pair_set(
    grid: &GridSet,
    epsilon: f64,
    sub: &Rect,
    g_range: (i64, i64),
    h_range: (i64, i64),
) -> Result<GoodPairs> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid_parameter("epsilon must be positive"));
    }
    if g_range.1 <= g_range.0 || h_range.1 <= h_range.0 {
        return Err(Error::invalid_parameter("shift ranges must be non-empty"));
    }
    sub.validate_in(grid)?;
    let delta = window_density(grid, sub)?;
    let threshold = delta.powi(4) - epsilon;
    let gw = u32::try_from(g_range.1 - g_range.0)
        .map_err(|_| Error::invalid_parameter("shift range too wide"))?;
    let hw = u32::try_from(h_range.1 - h_range.0)
        .map_err(|_| Error::invalid_parameter("shift range too wide"))?;
    let rows: Vec<Vec<u32>> = (0..hw)
        .into_par_iter()
        .map(|j| {
            let h = h_range.0 + j as i64;
            let mut marked = Vec::new();
            for i in 0..gw {
                let g = g_range.0 + i as i64;
                let evaluable = sub.validate_shift_in(grid, g, 0).is_ok()
                    && sub.validate_shift_in(grid, 0, h).is_ok()
                    && sub.validate_shift_in(grid, g, h).is_ok();
                if !evaluable {
                    continue;
                }
                let density = intersection_density_scan(grid, (g, h), sub)?;
                if density > threshold {
                    marked.push(i);
                }
            }
            Ok(marked)
        })
        .collect::<Result<_>>()?;
    let mut out = GridSet::new(gw, hw)?;
    for (j, marked) in rows.iter().enumerate() {
        for &i in marked {
            out.insert(i, j as u32);
        }
    }
    Ok(GoodPairs {
        g0: g_range.0,
        h0: h_range.0,
        grid: out,
        base_density: delta,
        threshold,
    })
}

/// The smallest `L` such that every `L×L` axis-aligned square inside the
/// window meets the set; `None` when even the largest square that fits
/// (side `min(w1, w2)`) can be empty.
///
/// Computed from the largest empty square via dynamic programming: if its
/// side is `M < min(w1, w2)`, then `L = M + 1`.
pub fn syndeticity_estimate(grid: &GridSet) -> Option<u32> {
    let w1 = grid.width();
    let w2 = grid.height();
    let mut prev = vec![0u32; w1 as usize];
    let mut largest_empty = 0u32;
    for y in 0..w2 {
        let mut current = vec![0u32; w1 as usize];
        for x in 0..w1 {
            if grid.contains(x, y) {
                current[x as usize] = 0;
            } else {
                let left = if x > 0 { current[x as usize - 1] } else { 0 };
                let up = prev[x as usize];
                let diag = if x > 0 { prev[x as usize - 1] } else { 0 };
                current[x as usize] = 1 + left.min(up).min(diag);
                largest_empty = largest_empty.max(current[x as usize]);
            }
        }
        prev = current;
    }
    if largest_empty < w1.min(w2) {
        Some(largest_empty + 1)
    } else {
        None
    }
}

/// An `r`-coloring of the window `[0, n)³` in ℤ³, colors in `1..=r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring3 {
    n: u32,
    r: u8,
    color: Vec<u8>,
}

impl Coloring3 {
    pub fn new(n: u32, r: u8, color: Vec<u8>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidColoring {
                reason: "window side must be positive".into(),
            });
        }
        if r == 0 {
            return Err(Error::InvalidColoring {
                reason: "at least one color is required".into(),
            });
        }
        let cells = (n as usize).pow(3);
        if color.len() != cells {
            return Err(Error::InvalidColoring {
                reason: format!("expected {cells} cells, got {}", color.len()),
            });
        }
        if let Some(bad) = color.iter().position(|&c| c == 0 || c > r) {
            return Err(Error::InvalidColoring {
                reason: format!("cell {bad} has color {} outside 1..={r}", color[bad]),
            });
        }
        Ok(Self { n, r, color })
    }

    pub fn constant(n: u32, r: u8, value: u8) -> Result<Self> {
        Self::new(n, r, vec![value; (n as usize).pow(3)])
    }

    pub fn from_fn(n: u32, r: u8, mut f: impl FnMut(u32, u32, u32) -> u8) -> Result<Self> {
        let mut color = Vec::with_capacity((n as usize).pow(3));
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    color.push(f(x, y, z));
                }
            }
        }
        Self::new(n, r, color)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn colors(&self) -> u8 {
        self.r
    }

    pub fn cells(&self) -> &[u8] {
        &self.color
    }

    pub fn color_at(&self, x: u32, y: u32, z: u32) -> u8 {
        debug_assert!(x < self.n && y < self.n && z < self.n);
        self.color[((x as usize * self.n as usize) + y as usize) * self.n as usize + z as usize]
    }
}

/// A monochromatic combinatorial cube found by [`parallelepiped_search`]:
/// all 8 points `base + {0,g}×{0,h}×{0,k}` share `color`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parallelepiped {
    pub color: u8,
    pub base: (u32, u32, u32),
    pub shifts: (u32, u32, u32),
}

/// Scans for a monochromatic parallelepiped with shifts `1 ≤ g, h, k ≤
/// max_shift`, lexicographically in `(g, h, k, a₁, a₂, a₃)`, and returns the
/// first hit in that order (the scan is parallel over `g`, with the
/// lexicographic minimum winning deterministically). `None` if the
/// exhaustive scan finds none — a finite window may simply lack one.
pub fn parallelepiped_search(c: &Coloring3, max_shift: u32) -> Option<Parallelepiped> {
    let n = c.n();
    if n < 2 {
        return None;
    }
    let top = max_shift.min(n - 1);
    let found: Vec<(u32, Parallelepiped)> = (1..=top)
        .into_par_iter()
        .filter_map(|g| search_fixed_g(c, g, top).map(|p| (g, p)))
        .collect();
    found
        .into_iter()
        .min_by_key(|&(g, p)| (g, p.shifts.1, p.shifts.2, p.base.0, p.base.1, p.base.2))
        .map(|(_, p)| p)
}

fn search_fixed_g(c: &Coloring3, g: u32, top: u32) -> Option<Parallelepiped> {
    let n = c.n();
    for h in 1..=top {
        for k in 1..=top {
            for a1 in 0..n - g {
                for a2 in 0..n - h {
                    for a3 in 0..n - k {
                        let color = c.color_at(a1, a2, a3);
                        if c.color_at(a1 + g, a2, a3) == color
                            && c.color_at(a1, a2 + h, a3) == color
                            && c.color_at(a1, a2, a3 + k) == color
                            && c.color_at(a1 + g, a2 + h, a3) == color
                            && c.color_at(a1 + g, a2, a3 + k) == color
                            && c.color_at(a1, a2 + h, a3 + k) == color
                            && c.color_at(a1 + g, a2 + h, a3 + k) == color
                        {
                            return Some(Parallelepiped {
                                color,
                                base: (a1, a2, a3),
                                shifts: (g, h, k),
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Independently validates a claimed parallelepiped: all 8 corners must be
/// inside the window and colored `color`.
pub fn verify_parallelepiped(
    c: &Coloring3,
    color: u8,
    base: (u32, u32, u32),
    shifts: (u32, u32, u32),
) -> bool {
    let n = c.n() as u64;
    let (a1, a2, a3) = base;
    let (g, h, k) = shifts;
    for dx in [0, g as u64] {
        for dy in [0, h as u64] {
            for dz in [0, k as u64] {
                let (x, y, z) = (a1 as u64 + dx, a2 as u64 + dy, a3 as u64 + dz);
                if x >= n || y >= n || z >= n {
                    return false;
                }
                if c.color_at(x as u32, y as u32, z as u32) != color {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_intersection_count(grid: &GridSet, (g, h): (i64, i64), sub: &Rect) -> u64 {
        let mut count = 0;
        for y in sub.y0..sub.y0 + sub.height {
            for x in sub.x0..sub.x0 + sub.width {
                let xs = (x as i64 + g) as u32;
                let ys = (y as i64 + h) as u32;
                if grid.contains(x, y)
                    && grid.contains(xs, y)
                    && grid.contains(x, ys)
                    && grid.contains(xs, ys)
                {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn densities_on_full_empty_and_lattice_windows() {
        let sub = Rect::new(0, 0, 8, 8);
        let full = GridSet::full(8, 8).unwrap();
        assert_eq!(window_density(&full, &sub).unwrap(), 1.0);
        let empty = GridSet::new(8, 8).unwrap();
        assert_eq!(window_density(&empty, &sub).unwrap(), 0.0);
        let even = GridSet::lattice(8, 8, 2, 2).unwrap();
        assert_eq!(window_density(&even, &sub).unwrap(), 0.25);
        // Any aligned 2k×2k box sees exactly a quarter.
        assert_eq!(window_density(&even, &Rect::new(2, 4, 4, 2)).unwrap(), 0.25);
    }

    #[test]
    fn intersection_scan_matches_hand_counts() {
        let even = GridSet::lattice(16, 16, 2, 2).unwrap();
        let sub = Rect::new(0, 0, 8, 8);
        assert_eq!(
            intersection_density_scan(&even, (2, 2), &sub).unwrap(),
            0.25
        );
        assert_eq!(intersection_density_scan(&even, (1, 0), &sub).unwrap(), 0.0);
        // Zero shift reduces to the plain density.
        assert_eq!(
            intersection_density_scan(&even, (0, 0), &sub).unwrap(),
            window_density(&even, &sub).unwrap()
        );
        // Escaping the window errors.
        assert!(matches!(
            intersection_density_scan(&even, (9, 0), &sub),
            Err(Error::OutsideWindow { .. })
        ));
        assert!(matches!(
            intersection_density_scan(&even, (-1, 0), &sub),
            Err(Error::OutsideWindow { .. })
        ));
    }

    #[test]
    fn word_level_counts_match_the_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..25 {
            let w1 = rng.gen_range(65..200);
            let w2 = rng.gen_range(3..40);
            let mut grid = GridSet::new(w1, w2).unwrap();
            for y in 0..w2 {
                for x in 0..w1 {
                    if rng.gen_bool(0.4) {
                        grid.insert(x, y);
                    }
                }
            }
            let sub = Rect::new(
                rng.gen_range(0..w1 / 3),
                rng.gen_range(0..w2 / 3),
                rng.gen_range(1..w1 / 3 + 1),
                rng.gen_range(1..w2 / 3 + 1),
            );
            let g_max = (w1 - sub.x0 - sub.width) as i64;
            let h_max = (w2 - sub.y0 - sub.height) as i64;
            let g = rng.gen_range(-(sub.x0 as i64)..=g_max);
            let h = rng.gen_range(-(sub.y0 as i64)..=h_max);
            assert_eq!(
                intersection_count(&grid, (g, h), &sub).unwrap(),
                naive_intersection_count(&grid, (g, h), &sub),
                "w1={w1} w2={w2} sub={sub:?} g={g} h={h}"
            );
        }
    }

    #[test]
    fn good_pairs_of_the_even_lattice_are_the_even_shifts() {
        let even = GridSet::lattice(40, 40, 2, 2).unwrap();
        let sub = Rect::new(0, 0, 20, 20);
        let good = good_pair_set(&even, 1e-3, &sub, (0, 12), (0, 12)).unwrap();
        assert_eq!(good.base_density(), 0.25);
        for g in 0..12i64 {
            for h in 0..12i64 {
                assert_eq!(
                    good.contains_shift(g, h),
                    g % 2 == 0 && h % 2 == 0,
                    "shift ({g}, {h})"
                );
            }
        }
    }

    #[test]
    fn good_pairs_grow_with_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut grid = GridSet::new(30, 30).unwrap();
        for y in 0..30 {
            for x in 0..30 {
                if rng.gen_bool(0.5) {
                    grid.insert(x, y);
                }
            }
        }
        let sub = Rect::new(0, 0, 15, 15);
        let small = good_pair_set(&grid, 1e-4, &sub, (0, 10), (0, 10)).unwrap();
        let large = good_pair_set(&grid, 0.2, &sub, (0, 10), (0, 10)).unwrap();
        for g in 0..10i64 {
            for h in 0..10i64 {
                if small.contains_shift(g, h) {
                    assert!(large.contains_shift(g, h));
                }
            }
        }
    }

    #[test]
    fn syndeticity_of_basic_sets() {
        assert_eq!(syndeticity_estimate(&GridSet::full(9, 9).unwrap()), Some(1));
        assert_eq!(syndeticity_estimate(&GridSet::new(9, 9).unwrap()), None);
        let even = GridSet::lattice(9, 9, 2, 2).unwrap();
        assert_eq!(syndeticity_estimate(&even), Some(2));
        let coarse = GridSet::lattice(24, 24, 3, 5).unwrap();
        assert_eq!(syndeticity_estimate(&coarse), Some(5));
    }

    #[test]
    fn constant_coloring_yields_the_unit_cube() {
        let c = Coloring3::constant(3, 2, 1).unwrap();
        let p = parallelepiped_search(&c, 2).unwrap();
        assert_eq!(p.color, 1);
        assert_eq!(p.base, (0, 0, 0));
        assert_eq!(p.shifts, (1, 1, 1));
        assert!(verify_parallelepiped(&c, p.color, p.base, p.shifts));
    }

    #[test]
    fn parity_coloring_needs_even_shifts() {
        let c = Coloring3::from_fn(4, 8, |x, y, z| {
            (1 + (x % 2) + 2 * (y % 2) + 4 * (z % 2)) as u8
        })
        .unwrap();
        let p = parallelepiped_search(&c, 3).unwrap();
        assert_eq!(p.shifts, (2, 2, 2));
        assert_eq!(p.base, (0, 0, 0));
        assert_eq!(p.color, 1);
        assert!(verify_parallelepiped(&c, p.color, p.base, p.shifts));
    }

    #[test]
    fn single_cell_window_has_no_parallelepiped() {
        let c = Coloring3::constant(1, 1, 1).unwrap();
        assert_eq!(parallelepiped_search(&c, 3), None);
    }

    #[test]
    fn verify_rejects_wrong_color_and_out_of_window() {
        let c = Coloring3::constant(3, 2, 1).unwrap();
        assert!(!verify_parallelepiped(&c, 2, (0, 0, 0), (1, 1, 1)));
        assert!(!verify_parallelepiped(&c, 1, (2, 2, 2), (1, 1, 1)));
    }

    #[test]
    fn coloring_validation_catches_bad_input() {
        assert!(Coloring3::new(2, 2, vec![1; 7]).is_err());
        assert!(Coloring3::new(2, 2, vec![3; 8]).is_err());
        assert!(Coloring3::new(2, 0, vec![]).is_err());
        assert!(Coloring3::new(2, 2, vec![0; 8]).is_err());
    }
}
