//! Binary codecs for grid sets and window colorings.
//!
//! Grids serialize under the magic `ERGG` with a choice of dense bitmap or
//! run-length encoding; colorings under `ERGC` as dense byte grids. Both
//! headers carry a format version and the window dimensions so files are
//! self-describing. All integers are little-endian.

use std::fs;
use std::path::Path;

use crate::combinatorics::{Coloring3, GridSet};
use crate::error::{Error, Result};

const GRID_MAGIC: &[u8; 4] = b"ERGG";
const COLORING_MAGIC: &[u8; 4] = b"ERGC";
const FORMAT_VERSION: u8 = 1;

/// Payload layout for a serialized [`GridSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridEncoding {
    /// Row-major bitmap, 8 cells per byte (LSB first), rows padded to whole
    /// bytes.
    Dense,
    /// Alternating run lengths over the row-major cell sequence, starting
    /// with a run of unset cells; each length is a `u32`.
    RunLength,
}

impl GridEncoding {
    fn tag(self) -> u8 {
        match self {
            GridEncoding::Dense => 0,
            GridEncoding::RunLength => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(GridEncoding::Dense),
            1 => Ok(GridEncoding::RunLength),
            other => Err(Error::format(format!("unknown grid encoding tag {other}"))),
        }
    }
}

pub fn grid_to_bytes(grid: &GridSet, encoding: GridEncoding) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(GRID_MAGIC);
    out.push(FORMAT_VERSION);
    out.push(encoding.tag());
    out.extend_from_slice(&grid.width().to_le_bytes());
    out.extend_from_slice(&grid.height().to_le_bytes());
    match encoding {
        GridEncoding::Dense => {
            let row_bytes = (grid.width() as usize + 7) / 8;
            for y in 0..grid.height() {
                let mut row = vec![0u8; row_bytes];
                for x in 0..grid.width() {
                    if grid.contains(x, y) {
                        row[(x / 8) as usize] |= 1 << (x % 8);
                    }
                }
                out.extend_from_slice(&row);
            }
        }
        GridEncoding::RunLength => {
            let mut runs: Vec<u32> = Vec::new();
            let mut current = false;
            let mut length = 0u32;
            for y in 0..grid.height() {
                for x in 0..grid.width() {
                    let bit = grid.contains(x, y);
                    if bit == current {
                        length += 1;
                    } else {
                        runs.push(length);
                        current = bit;
                        length = 1;
                    }
                }
            }
            runs.push(length);
            out.extend_from_slice(&(runs.len() as u32).to_le_bytes());
            for run in runs {
                out.extend_from_slice(&run.to_le_bytes());
            }
        }
    }
    out
}

pub fn grid_from_bytes(bytes: &[u8]) -> Result<GridSet> {
    let mut cursor = Cursor::new(bytes);
    let magic = cursor.take(4)?;
    if magic != GRID_MAGIC {
        return Err(Error::format("not a grid file (bad magic)"));
    }
    let version = cursor.u8()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(format!("unsupported grid format version {version}")));
    }
    let encoding = GridEncoding::from_tag(cursor.u8()?)?;
    let w1 = cursor.u32()?;
    let w2 = cursor.u32()?;
    let mut grid = GridSet::new(w1, w2)?;
    match encoding {
        GridEncoding::Dense => {
            let row_bytes = (w1 as usize + 7) / 8;
            for y in 0..w2 {
                let row = cursor.take(row_bytes)?;
                for x in 0..w1 {
                    if row[(x / 8) as usize] >> (x % 8) & 1 == 1 {
                        grid.insert(x, y);
                    }
                }
            }
        }
        GridEncoding::RunLength => {
            let run_count = cursor.u32()? as usize;
            let cells = w1 as u64 * w2 as u64;
            let mut filled = 0u64;
            let mut current = false;
            for _ in 0..run_count {
                let length = cursor.u32()? as u64;
                if current {
                    for offset in filled..filled + length {
                        if offset >= cells {
                            return Err(Error::format("run lengths exceed the window"));
                        }
                        let x = (offset % w1 as u64) as u32;
                        let y = (offset / w1 as u64) as u32;
                        grid.insert(x, y);
                    }
                }
                filled += length;
                current = !current;
            }
            if filled != cells {
                return Err(Error::format(format!(
                    "run lengths cover {filled} cells, window has {cells}"
                )));
            }
        }
    }
    cursor.finish()?;
    Ok(grid)
}

pub fn write_grid(path: impl AsRef<Path>, grid: &GridSet, encoding: GridEncoding) -> Result<()> {
    fs::write(path, grid_to_bytes(grid, encoding))?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridSet> {
    grid_from_bytes(&fs::read(path)?)
}

pub fn coloring_to_bytes(coloring: &Coloring3) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(COLORING_MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&coloring.n().to_le_bytes());
    out.push(coloring.colors());
    out.extend_from_slice(coloring.cells());
    out
}

pub fn coloring_from_bytes(bytes: &[u8]) -> Result<Coloring3> {
    let mut cursor = Cursor::new(bytes);
    let magic = cursor.take(4)?;
    if magic != COLORING_MAGIC {
        return Err(Error::format("not a coloring file (bad magic)"));
    }
    let version = cursor.u8()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(format!(
            "unsupported coloring format version {version}"
        )));
    }
    let n = cursor.u32()?;
    let r = cursor.u8()?;
    let cells = (n as usize)
        .checked_pow(3)
        .ok_or_else(|| Error::format("window side too large"))?;
    let color = cursor.take(cells)?.to_vec();
    cursor.finish()?;
    Coloring3::new(n, r, color)
}

pub fn write_coloring(path: impl AsRef<Path>, coloring: &Coloring3) -> Result<()> {
    fs::write(path, coloring_to_bytes(coloring))?;
    Ok(())
}

pub fn read_coloring(path: impl AsRef<Path>) -> Result<Coloring3> {
    coloring_from_bytes(&fs::read(path)?)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, at: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.at + len > self.bytes.len() {
            return Err(Error::format("file truncated"));
        }
        let slice = &self.bytes[self.at..self.at + len];
        self.at += len;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<()> {
        if self.at != self.bytes.len() {
            return Err(Error::format("trailing bytes after payload"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rng: &mut ChaCha8Rng, w1: u32, w2: u32, fill: f64) -> GridSet {
        let mut grid = GridSet::new(w1, w2).unwrap();
        for y in 0..w2 {
            for x in 0..w1 {
                if rng.gen_bool(fill) {
                    grid.insert(x, y);
                }
            }
        }
        grid
    }

    #[test]
    fn grids_round_trip_in_both_encodings() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(w1, w2, fill) in &[(1, 1, 0.5), (13, 7, 0.3), (130, 5, 0.9), (64, 64, 0.02)] {
            let grid = random_grid(&mut rng, w1, w2, fill);
            for encoding in [GridEncoding::Dense, GridEncoding::RunLength] {
                let bytes = grid_to_bytes(&grid, encoding);
                assert_eq!(grid_from_bytes(&bytes).unwrap(), grid, "{encoding:?}");
            }
        }
    }

    #[test]
    fn run_length_beats_dense_on_sparse_grids() {
        let mut grid = GridSet::new(256, 256).unwrap();
        grid.insert(17, 200);
        let dense = grid_to_bytes(&grid, GridEncoding::Dense);
        let rle = grid_to_bytes(&grid, GridEncoding::RunLength);
        assert!(rle.len() < dense.len());
    }

    #[test]
    fn colorings_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let c = Coloring3::from_fn(6, 4, |_, _, _| rng.gen_range(1..=4)).unwrap();
        let bytes = coloring_to_bytes(&c);
        assert_eq!(coloring_from_bytes(&bytes).unwrap(), c);
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let grid = GridSet::full(4, 4).unwrap();
        let mut bytes = grid_to_bytes(&grid, GridEncoding::Dense);
        bytes[0] = b'X';
        assert!(matches!(grid_from_bytes(&bytes), Err(Error::Format { .. })));

        let mut bytes = grid_to_bytes(&grid, GridEncoding::Dense);
        bytes[4] = 99; // version
        assert!(grid_from_bytes(&bytes).is_err());

        let bytes = grid_to_bytes(&grid, GridEncoding::Dense);
        assert!(grid_from_bytes(&bytes[..bytes.len() - 1]).is_err());

        let c = Coloring3::constant(2, 2, 1).unwrap();
        let mut bytes = coloring_to_bytes(&c);
        bytes[3] = b'G';
        assert!(coloring_from_bytes(&bytes).is_err());
        // An out-of-range color byte fails coloring validation on read.
        let mut bytes = coloring_to_bytes(&c);
        let last = bytes.len() - 1;
        bytes[last] = 9;
        assert!(coloring_from_bytes(&bytes).is_err());
    }
}
