//! Basis-tagged sparse vectors and operators.
//!
//! A [`Basis`] is an explicitly enumerated, ordered state space (a spin
//! sector, the full chain window, or a truncated partition space). Vectors
//! and operators carry a shared handle to their basis; operations across
//! different bases panic, since that is always a programming error.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use serde::Serialize;

use crate::dense::DMat;
use crate::partitions::Partition;
use crate::scalar::{Scalar, C64};

/// Identifies which state space a basis enumerates.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum BasisId {
    /// All `C(n, m)` states of an `n`-site window with `m` down spins.
    SpinSector { n: u32, m: u32 },
    /// Full `2^n`-dimensional window.
    SpinFull { n: u32 },
    /// Partitions inside a `p x p` box.
    PartitionBox { p: u32 },
    /// Partitions bounded by weight, part and length.
    PartitionTrunc { max_weight: u64, max_part: u32, max_len: u32 },
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisId::SpinSector { n, m } => write!(f, "spin(N={n},m={m})"),
            BasisId::SpinFull { n } => write!(f, "spin(N={n})"),
            BasisId::PartitionBox { p } => write!(f, "box({p}x{p})"),
            BasisId::PartitionTrunc { max_weight, max_part, max_len } => {
                write!(f, "partitions(w<={max_weight},part<={max_part},len<={max_len})")
            }
        }
    }
}

pub trait BasisKey: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {
    fn render(&self, id: &BasisId) -> String;
}

/// A spin configuration on an `N`-site window, bit `j` set when site `j + 1`
/// (counted from the left edge) carries a down spin.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinConfig(pub u64);

impl SpinConfig {
    pub fn down_count(self) -> u32 {
        self.0.count_ones()
    }

    /// True when site `j` (1-based) is a down spin.
    pub fn is_down(self, site: usize) -> bool {
        self.0 >> (site - 1) & 1 == 1
    }

    /// Doubled coordinate of site `j` (1-based) on an `n`-site window.
    pub fn site_coord2(site: usize, n: u32) -> i64 {
        2 * site as i64 - n as i64 - 1
    }

    /// 1-based site of a doubled coordinate, if it lies on the window.
    pub fn coord2_site(x2: i64, n: u32) -> Option<usize> {
        let twice = x2 + n as i64 + 1;
        if twice % 2 == 0 && twice >= 2 && twice <= 2 * n as i64 {
            Some((twice / 2) as usize)
        } else {
            None
        }
    }

    /// Doubled down-spin coordinates, strictly increasing.
    pub fn down_coords2(self, n: u32) -> Vec<i64> {
        (1..=n as usize)
            .filter(|&j| self.is_down(j))
            .map(|j| Self::site_coord2(j, n))
            .collect()
    }

    /// Configuration with down spins at the given doubled coordinates.
    pub fn from_down_coords2(coords2: &[i64], n: u32) -> Option<SpinConfig> {
        let mut mask = 0u64;
        for &x2 in coords2 {
            let site = Self::coord2_site(x2, n)?;
            if mask >> (site - 1) & 1 == 1 {
                return None;
            }
            mask |= 1 << (site - 1);
        }
        Some(SpinConfig(mask))
    }
}

impl fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinConfig({:#b})", self.0)
    }
}

impl BasisKey for SpinConfig {
    fn render(&self, id: &BasisId) -> String {
        let n = match id {
            BasisId::SpinSector { n, .. } | BasisId::SpinFull { n } => *n,
            _ => 64,
        };
        (1..=n as usize)
            .map(|j| if self.is_down(j) { 'd' } else { 'u' })
            .collect()
    }
}

impl BasisKey for Partition {
    fn render(&self, _id: &BasisId) -> String {
        self.to_string()
    }
}

/// Ordered enumeration of a state space with constant-time index lookup.
pub struct Basis<K: BasisKey> {
    id: BasisId,
    keys: Vec<K>,
    index: HashMap<K, usize>,
}

impl<K: BasisKey> Basis<K> {
    pub fn new(id: BasisId, keys: Vec<K>) -> Arc<Self> {
        let index = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Arc::new(Basis { id, keys, index })
    }

    pub fn id(&self) -> &BasisId {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn key(&self, i: usize) -> &K {
        &self.keys[i]
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn index_of(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn render(&self, i: usize) -> String {
        self.keys[i].render(&self.id)
    }
}

impl<K: BasisKey> fmt::Debug for Basis<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis({}, dim={})", self.id, self.dim())
    }
}

fn check_same_basis<K: BasisKey>(a: &Basis<K>, b: &Basis<K>) {
    assert!(
        a.id == b.id,
        "basis mismatch: {} vs {}",
        a.id,
        b.id
    );
}

/// Sparse amplitude vector over a basis. Zero amplitudes are never stored.
#[derive(Clone)]
pub struct StateVector<K: BasisKey, S: Scalar> {
    basis: Arc<Basis<K>>,
    amps: BTreeMap<usize, S>,
}

impl<K: BasisKey, S: Scalar> StateVector<K, S> {
    pub fn zero(basis: Arc<Basis<K>>) -> Self {
        StateVector { basis, amps: BTreeMap::new() }
    }

    pub fn basis(&self) -> &Arc<Basis<K>> {
        &self.basis
    }

    pub fn set(&mut self, i: usize, v: S) {
        assert!(i < self.basis.dim());
        if v.is_zero() {
            self.amps.remove(&i);
        } else {
            self.amps.insert(i, v);
        }
    }

    pub fn add_to(&mut self, i: usize, v: S) {
        let cur = self.get(i) + v;
        self.set(i, cur);
    }

    pub fn get(&self, i: usize) -> S {
        self.amps.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> {
        self.amps.iter().map(|(&i, v)| (i, v))
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = StateVector::zero(self.basis.clone());
        for (i, v) in self.iter() {
            out.set(i, v.clone() * s.clone());
        }
        out
    }

    pub fn add_scaled(&self, other: &Self, s: &S) -> Self {
        check_same_basis(&self.basis, &other.basis);
        let mut out = self.clone();
        for (i, v) in other.iter() {
            out.add_to(i, v.clone() * s.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, &-S::one())
    }

    /// Hermitian inner product, conjugating `self`.
    pub fn inner(&self, other: &Self) -> S {
        check_same_basis(&self.basis, &other.basis);
        let mut acc = S::zero();
        for (i, v) in self.iter() {
            if let Some(w) = other.amps.get(&i) {
                acc = acc + v.conj() * w.clone();
            }
        }
        acc
    }

    pub fn norm2(&self) -> S {
        self.inner(self)
    }

    pub fn norm_f64(&self) -> f64 {
        self.amps.values().map(|v| v.mag() * v.mag()).sum::<f64>().sqrt()
    }

    pub fn max_mag(&self) -> f64 {
        self.amps.values().map(|v| v.mag()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.basis.dim()];
        for (i, v) in self.iter() {
            out[i] = v.clone();
        }
        out
    }

    pub fn from_dense(basis: Arc<Basis<K>>, dense: &[S]) -> Self {
        assert_eq!(dense.len(), basis.dim());
        let mut out = StateVector::zero(basis);
        for (i, v) in dense.iter().enumerate() {
            if !v.is_zero() {
                out.set(i, v.clone());
            }
        }
        out
    }
}

impl<K: BasisKey, S: Scalar> fmt::Debug for StateVector<K, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector({}, nnz={})", self.basis.id, self.amps.len())?;
        for (i, v) in self.amps.iter().take(8) {
            write!(f, " [{}]={}", self.basis.render(*i), v)?;
        }
        Ok(())
    }
}

/// Structural metadata carried by an operator.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Symmetry {
    None,
    Hermitian,
    RateMatrix,
}

/// Sparse operator over a basis, stored row-wise.
#[derive(Clone)]
pub struct LinearOperator<K: BasisKey, S: Scalar> {
    basis: Arc<Basis<K>>,
    rows: Vec<BTreeMap<usize, S>>,
    symmetry: Symmetry,
}

impl<K: BasisKey, S: Scalar> LinearOperator<K, S> {
    pub fn new(basis: Arc<Basis<K>>, symmetry: Symmetry) -> Self {
        let rows = vec![BTreeMap::new(); basis.dim()];
        LinearOperator { basis, rows, symmetry }
    }

    pub fn identity(basis: Arc<Basis<K>>) -> Self {
        let mut op = LinearOperator::new(basis, Symmetry::Hermitian);
        for i in 0..op.basis.dim() {
            op.set(i, i, S::one());
        }
        op
    }

    pub fn from_diag(basis: Arc<Basis<K>>, diag: impl Fn(&K) -> S) -> Self {
        let mut op = LinearOperator::new(basis.clone(), Symmetry::Hermitian);
        for i in 0..basis.dim() {
            op.set(i, i, diag(basis.key(i)));
        }
        op
    }

    pub fn basis(&self) -> &Arc<Basis<K>> {
        &self.basis
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn set_symmetry(&mut self, s: Symmetry) {
        self.symmetry = s;
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        if v.is_zero() {
            self.rows[r].remove(&c);
        } else {
            self.rows[r].insert(c, v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: S) {
        let cur = self.entry(r, c) + v;
        self.set(r, c, cur);
    }

    pub fn entry(&self, r: usize, c: usize) -> S {
        self.rows[r].get(&c).cloned().unwrap_or_else(S::zero)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &S)> {
        self.rows[r].iter().map(|(&c, v)| (c, v))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(&c, v)| (r, c, v)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn apply(&self, v: &StateVector<K, S>) -> StateVector<K, S> {
        check_same_basis(&self.basis, v.basis());
        let mut out = StateVector::zero(self.basis.clone());
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = S::zero();
            let mut any = false;
            for (c, a) in row {
                if let Some(x) = v.amps.get(c) {
                    acc = acc + a.clone() * x.clone();
                    any = true;
                }
            }
            if any && !acc.is_zero() {
                out.set(r, acc);
            }
        }
        out
    }

    pub fn apply_dense(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.dim());
        let mut out = vec![S::zero(); self.dim()];
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = S::zero();
            for (c, a) in row {
                if !v[*c].is_zero() {
                    acc = acc + a.clone() * v[*c].clone();
                }
            }
            out[r] = acc;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        check_same_basis(&self.basis, &other.basis);
        let mut out = LinearOperator::new(self.basis.clone(), Symmetry::None);
        for (r, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (c, b) in other.rows[*k].iter() {
                    out.add_to(r, *c, a.clone() * b.clone());
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        check_same_basis(&self.basis, &other.basis);
        let mut out = self.clone();
        out.symmetry = Symmetry::None;
        for (r, c, v) in other.entries() {
            out.add_to(r, c, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = LinearOperator::new(self.basis.clone(), self.symmetry);
        for (r, c, v) in self.entries() {
            out.set(r, c, v.clone() * s.clone());
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = LinearOperator::new(self.basis.clone(), Symmetry::None);
        for (r, c, v) in self.entries() {
            out.set(c, r, v.clone());
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = LinearOperator::new(self.basis.clone(), Symmetry::None);
        for (r, c, v) in self.entries() {
            out.set(c, r, v.conj());
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_mag(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.mag()).fold(0.0, f64::max)
    }

    /// Largest magnitude of the entrywise difference.
    pub fn max_mag_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_mag()
    }

    /// Entrywise exact equality.
    pub fn exact_eq(&self, other: &Self) -> bool {
        self.sub(other).nnz() == 0
    }

    /// Largest deviation from hermiticity, `max |A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.conj_transpose()).max_mag()
    }

    pub fn apply_repeated(&self, v: &StateVector<K, S>, p: usize) -> StateVector<K, S> {
        let mut out = v.clone();
        for _ in 0..p {
            out = self.apply(&out);
        }
        out
    }

    pub fn to_dense_c64(&self) -> DMat {
        let n = self.dim();
        let mut m = DMat::zeros(n);
        for (r, c, v) in self.entries() {
            *m.at_mut(r, c) = v.to_c64();
        }
        m
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }
}

impl<K: BasisKey, S: Scalar> fmt::Debug for LinearOperator<K, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LinearOperator({}, nnz={}, {:?})",
            self.basis.id,
            self.nnz(),
            self.symmetry
        )
    }
}

/// Serializable dump of an operator as basis-id plus entry triplets.
#[derive(Serialize)]
pub struct OperatorDump {
    pub basis: BasisId,
    pub symmetry: Symmetry,
    pub entries: Vec<(usize, usize, String)>,
}

impl OperatorDump {
    pub fn of<K: BasisKey, S: Scalar>(op: &LinearOperator<K, S>) -> Self {
        OperatorDump {
            basis: op.basis().id().clone(),
            symmetry: op.symmetry(),
            entries: op
                .entries()
                .map(|(r, c, v)| (r, c, v.to_string()))
                .collect(),
        }
    }
}

/// Embed a vector defined on one basis into another via key lookup.
///
/// Every key in the support must exist in the target basis.
pub fn reindex<K: BasisKey, S: Scalar>(
    v: &StateVector<K, S>,
    target: &Arc<Basis<K>>,
) -> crate::error::Result<StateVector<K, S>> {
    let mut out = StateVector::zero(target.clone());
    for (i, amp) in v.iter() {
        let key = v.basis().key(i);
        match target.index_of(key) {
            Some(j) => out.set(j, amp.clone()),
            None => {
                return Err(crate::error::Error::BasisMismatch(format!(
                    "key {key:?} missing from target basis {}",
                    target.id()
                )))
            }
        }
    }
    Ok(out)
}

pub type C64Vector<K> = StateVector<K, C64>;
