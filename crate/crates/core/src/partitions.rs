//! Integer partitions and Young-diagram geometry.
//!
//! Partitions index both the domain-wall spin configurations and the
//! exclusion-process state space. Half-integer lattice coordinates are stored
//! as doubled integers throughout, so site labels stay exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition: weakly decreasing positive parts. The empty list is the
/// empty partition.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Self {
        assert!(
            parts.windows(2).all(|w| w[0] >= w[1]) && parts.iter().all(|&p| p > 0),
            "parts must be weakly decreasing and positive"
        );
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Part at 1-based row `i`; 0 past the last part.
    pub fn part(&self, i: usize) -> u32 {
        if i >= 1 && i <= self.parts.len() {
            self.parts[i - 1]
        } else {
            0
        }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|delta|`, the number of boxes.
    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// Conjugate diagram (reflection along the diagonal).
    pub fn transpose(&self) -> Partition {
        if self.parts.is_empty() {
            return Partition::empty();
        }
        let cols = self.parts[0] as usize;
        let mut t = Vec::with_capacity(cols);
        for c in 1..=cols {
            t.push(self.parts.iter().filter(|&&p| p as usize >= c).count() as u32);
        }
        Partition { parts: t }
    }

    /// Rows where a box may be added (1-based; always contains one more row
    /// than `removable`).
    pub fn corners(&self) -> Corners {
        let mut addable = Vec::new();
        let mut removable = Vec::new();
        let r = self.parts.len();
        for i in 1..=r {
            if i == 1 || self.parts[i - 2] > self.parts[i - 1] {
                addable.push(i);
            }
            if self.part(i) > self.part(i + 1) {
                removable.push(i);
            }
        }
        addable.push(r + 1);
        Corners { addable, removable }
    }

    /// Partition with one box added in row `row` (must be addable).
    pub fn add_box(&self, row: usize) -> Partition {
        let mut parts = self.parts.clone();
        if row == parts.len() + 1 {
            parts.push(1);
        } else {
            parts[row - 1] += 1;
        }
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }

    /// Partition with one box removed from row `row` (must be removable).
    pub fn remove_box(&self, row: usize) -> Partition {
        let mut parts = self.parts.clone();
        parts[row - 1] -= 1;
        if parts[row - 1] == 0 {
            parts.remove(row - 1);
        }
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }

    /// Modified Frobenius coordinates.
    pub fn frobenius(&self) -> FrobeniusCoords {
        let t = self.transpose();
        let m = (1..=self.parts.len())
            .take_while(|&i| self.part(i) as usize >= i)
            .count();
        let mut v2 = Vec::with_capacity(m);
        let mut u2 = Vec::with_capacity(m);
        for i in 1..=m {
            v2.push(2 * self.part(i) as i64 - 2 * i as i64 + 1);
            u2.push(-(2 * t.part(i) as i64 - 2 * i as i64 + 1));
        }
        FrobeniusCoords { u2, v2 }
    }

    /// Down-spin coordinates `delta_i - i + 1/2` for `i = 1..=count`, as
    /// doubled integers, strictly decreasing.
    pub fn down_spin_coords(&self, count: usize) -> Result<Vec<i64>> {
        if count < self.parts.len() {
            return Err(Error::CountTooSmall { count, len: self.parts.len() });
        }
        Ok((1..=count)
            .map(|i| 2 * self.part(i) as i64 - 2 * i as i64 + 1)
            .collect())
    }

    /// Whether the domain-wall configuration of this partition has a down
    /// spin at doubled coordinate `x2`.
    pub fn occupies(&self, x2: i64) -> bool {
        // row i would put a down spin at 2*part(i) - 2i + 1
        for (i, &p) in self.parts.iter().enumerate() {
            let c = 2 * p as i64 - 2 * (i as i64 + 1) + 1;
            if c == x2 {
                return true;
            }
            if c < x2 {
                return false;
            }
        }
        // staircase tail: rows past the last part occupy -2i + 1 for i > len
        x2 <= -2 * self.parts.len() as i64 - 1 && x2 % 2 != 0
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Addable and removable corner rows of a diagram, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corners {
    pub addable: Vec<usize>,
    pub removable: Vec<usize>,
}

/// Modified Frobenius coordinates, stored as doubled integers. `v2` holds the
/// arm coordinates (positive, strictly decreasing), `u2` the leg coordinates
/// (negative, strictly increasing toward zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusCoords {
    pub u2: Vec<i64>,
    pub v2: Vec<i64>,
}

impl FrobeniusCoords {
    pub fn diagonal_len(&self) -> usize {
        self.v2.len()
    }

    /// `sum_i (v_i - u_i)`, which equals the weight of the partition.
    pub fn weight(&self) -> u64 {
        self.v2
            .iter()
            .zip(&self.u2)
            .map(|(v, u)| ((v - u) / 2) as u64)
            .sum()
    }
}

/// All partitions fitting in a `p x p` box, graded-lexicographically ordered
/// (weight ascending, then lexicographic on the part lists).
pub fn enumerate_box(p: u32, max_weight: Option<u64>) -> Vec<Partition> {
    let cap = max_weight.unwrap_or(p as u64 * p as u64);
    enumerate_truncated(cap.min(p as u64 * p as u64), p, p)
}

/// All partitions with weight, largest part and length bounded by the given
/// truncation, in graded-lexicographic order.
pub fn enumerate_truncated(max_weight: u64, max_part: u32, max_len: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut acc: Vec<u32> = Vec::new();
    fn rec(
        out: &mut Vec<Partition>,
        acc: &mut Vec<u32>,
        max_next: u32,
        weight_left: u64,
        rows_left: u32,
    ) {
        out.push(Partition { parts: acc.clone() });
        if rows_left == 0 {
            return;
        }
        let cap = (max_next as u64).min(weight_left) as u32;
        for part in 1..=cap {
            acc.push(part);
            rec(out, acc, part, weight_left - part as u64, rows_left - 1);
            acc.pop();
        }
    }
    rec(&mut out, &mut acc, max_part, max_weight, max_len);
    out.sort_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| a.parts.cmp(&b.parts)));
    out
}
