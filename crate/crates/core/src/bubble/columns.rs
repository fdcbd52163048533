//! Index-major coefficient columns for fast triple evaluation.

use super::{check_triple, ClassPair, Triple, TripleStats};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

const KEY_SPACE: usize = 1 << 24;

/// Coefficient columns of the two classes, class-`i` rows first.
#[derive(Debug, Clone)]
pub struct ColumnStore {
    classes: ClassPair,
    rows: usize,
    rows_first: usize,
    /// Column position of each index `1..=bound`, `usize::MAX` if not stored.
    position: Vec<usize>,
    columns: Vec<u8>,
}

/// Reusable per-worker bitmaps for [`ColumnStore::stats_with`].
pub struct Scratch {
    seen: [Vec<u64>; 2],
    touched: [Vec<u32>; 2],
}

impl Default for Scratch {
    fn default() -> Self {
        Self::new()
    }
}

impl Scratch {
    pub fn new() -> Self {
        Self {
            seen: [vec![0; KEY_SPACE / 64], vec![0; KEY_SPACE / 64]],
            touched: [Vec::new(), Vec::new()],
        }
    }
}

#[inline]
fn mark(seen: &mut [u64], touched: &mut Vec<u32>, key: u32) {
    let word = &mut seen[(key >> 6) as usize];
    let bit = 1u64 << (key & 63);
    if *word & bit == 0 {
        *word |= bit;
        touched.push(key);
    }
}

impl ColumnStore {
    /// Stores the columns for `indices` (all of `1..=bound` when empty).
    pub fn new(ds: &Dataset, classes: ClassPair, indices: &[usize]) -> Result<Self> {
        let bound = ds.bound();
        let mut wanted: Vec<usize> = if indices.is_empty() {
            (1..=bound).collect()
        } else {
            indices.to_vec()
        };
        wanted.sort_unstable();
        wanted.dedup();
        for &index in &wanted {
            if index == 0 || index > bound {
                return Err(Error::IndexOutOfRange { index, bound });
            }
        }
        let mut order: Vec<usize> = Vec::new();
        let mut second: Vec<usize> = Vec::new();
        for (row, record) in ds.records().iter().enumerate() {
            match classes.side(record.h) {
                Some(0) => order.push(row),
                Some(_) => second.push(row),
                None => {}
            }
        }
        let rows_first = order.len();
        order.extend(second);
        let rows = order.len();

        let mut position = vec![usize::MAX; bound + 1];
        let mut columns = vec![0u8; wanted.len() * rows];
        for (k, &index) in wanted.iter().enumerate() {
            position[index] = k;
            let column = &mut columns[k * rows..(k + 1) * rows];
            for (slot, &row) in column.iter_mut().zip(&order) {
                *slot = ds.coefficient(row, index);
            }
        }
        Ok(Self {
            classes,
            rows,
            rows_first,
            position,
            columns,
        })
    }

    pub fn classes(&self) -> ClassPair {
        self.classes
    }

    /// Number of rows of each class.
    pub fn class_sizes(&self) -> [usize; 2] {
        [self.rows_first, self.rows - self.rows_first]
    }

    fn column(&self, index: usize) -> Result<&[u8]> {
        let bound = self.position.len() - 1;
        check_triple([index, 1, 1], bound)?;
        match self.position[index] {
            usize::MAX => Err(Error::InvalidArgument(format!(
                "coefficient column {index} was not loaded"
            ))),
            k => Ok(&self.columns[k * self.rows..(k + 1) * self.rows]),
        }
    }

    pub fn stats(&self, triple: Triple) -> Result<TripleStats> {
        self.stats_with(triple, &mut Scratch::new())
    }

    pub fn stats_with(&self, triple: Triple, scratch: &mut Scratch) -> Result<TripleStats> {
        let (a, b, c) = (self.column(triple[0])?, self.column(triple[1])?, self.column(triple[2])?);
        let split = self.rows_first;
        let Scratch { seen, touched } = scratch;
        for side in 0..2 {
            let range = if side == 0 { 0..split } else { split..self.rows };
            let (x, y, z) = (&a[range.clone()], &b[range.clone()], &c[range]);
            let (bits, list) = (&mut seen[side], &mut touched[side]);
            for ((&x, &y), &z) in x.iter().zip(y).zip(z) {
                mark(bits, list, (x as u32) << 16 | (y as u32) << 8 | z as u32);
            }
        }
        let g_i = touched[0].len() as u64;
        let g_j = touched[1].len() as u64;
        let other = &seen[1];
        let g_ij = touched[0]
            .iter()
            .filter(|&&k| other[(k >> 6) as usize] >> (k & 63) & 1 == 1)
            .count() as u64;
        for side in 0..2 {
            for &k in &touched[side] {
                seen[side][(k >> 6) as usize] = 0;
            }
            touched[side].clear();
        }
        Ok(TripleStats::from_counts(triple, g_i, g_j, g_ij))
    }
}
