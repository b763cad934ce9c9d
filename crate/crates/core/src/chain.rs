//! Finite spin-chain state spaces and Hamiltonians.
//!
//! Two concrete Hamiltonians live here: the boundary-field chain on an
//! `N`-site window (which commutes with the quantum-group action built in
//! [`crate::uqsl2`]) and the domain-wall-sector Hamiltonian acting on
//! integer partitions through corner counts and single-box moves. A dense
//! diagonalization front end serves as the oracle for every spectral claim.

use std::sync::Arc;

use crate::algebra::{Basis, BasisId, LinearOperator, SpinConfig, StateVector, Symmetry};
use crate::dense;
use crate::error::{Error, Result};
use crate::partitions::{enumerate_truncated, Partition};
use crate::scalar::{Scalar, C64};

pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Partition-space truncation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Truncation {
    pub max_weight: u64,
    pub max_part: u32,
    pub max_len: u32,
}

impl Truncation {
    /// Truncate by weight alone (parts and length are then bounded by the
    /// weight automatically).
    pub fn by_weight(w: u64) -> Self {
        Truncation { max_weight: w, max_part: w as u32, max_len: w as u32 }
    }

    pub fn contains(&self, d: &Partition) -> bool {
        d.weight() <= self.max_weight
            && d.part(1) <= self.max_part
            && d.len() as u32 <= self.max_len
    }
}

/// All `C(N, m)` configurations with `m` down spins, ordered by bitmask.
pub fn spin_sector_basis(n: u32, m: u32) -> Arc<Basis<SpinConfig>> {
    assert!(n <= 63 && m <= n);
    let mut keys = Vec::new();
    fn rec(keys: &mut Vec<SpinConfig>, mask: u64, next_site: u32, left: u32, n: u32) {
        if left == 0 {
            keys.push(SpinConfig(mask));
            return;
        }
        for j in next_site..=(n - left) {
            rec(keys, mask | 1 << j, j + 1, left - 1, n);
        }
    }
    rec(&mut keys, 0, 0, m, n);
    keys.sort();
    Basis::new(BasisId::SpinSector { n, m }, keys)
}

/// The full `2^N` window.
pub fn spin_full_basis(n: u32, dense_limit: usize) -> Result<Arc<Basis<SpinConfig>>> {
    let dim = 1usize
        .checked_shl(n)
        .filter(|&d| d <= dense_limit)
        .ok_or(Error::Dimension { dim: usize::MAX, limit: dense_limit })?;
    let keys = (0..dim as u64).map(SpinConfig).collect();
    Ok(Basis::new(BasisId::SpinFull { n }, keys))
}

/// Truncated partition space in graded-lexicographic order.
pub fn partition_basis(t: &Truncation) -> Arc<Basis<Partition>> {
    let keys = enumerate_truncated(t.max_weight, t.max_part, t.max_len);
    Basis::new(
        BasisId::PartitionTrunc {
            max_weight: t.max_weight,
            max_part: t.max_part,
            max_len: t.max_len,
        },
        keys,
    )
}

/// Partitions inside a `p x p` box.
pub fn box_basis(p: u32) -> Arc<Basis<Partition>> {
    let keys = crate::partitions::enumerate_box(p, None);
    Basis::new(BasisId::PartitionBox { p }, keys)
}

/// `Delta = (q + 1/q)/2`.
pub fn anisotropy<S: Scalar>(q: &S) -> S {
    (q.clone() + q.inv()) * S::from_ratio(1, 2)
}

fn spin_n(basis: &Basis<SpinConfig>) -> u32 {
    match basis.id() {
        BasisId::SpinSector { n, .. } | BasisId::SpinFull { n } => *n,
        other => panic!("expected a spin basis, got {other}"),
    }
}

/// Open-chain Hamiltonian with the boundary field that makes the chain
/// quantum-group invariant:
/// `-1/2 sum_k [ s1 s1 + s2 s2 + Delta s3 s3 + (q - 1/q)(s3_k - s3_{k+1})/2 - Delta ]`.
///
/// Works on a fixed-m sector or the full window. Hops carry `-1`; the
/// diagonal counts domain walls with weight `Delta` plus the telescoped
/// boundary term. For real `q` the matrix comes out symmetric, and the
/// symmetry tag is set from the measured defect rather than assumed.
pub fn invariant_hamiltonian<S: Scalar>(
    basis: &Arc<Basis<SpinConfig>>,
    q: &S,
) -> LinearOperator<SpinConfig, S> {
    let n = spin_n(basis);
    assert!(n >= 2 && n % 2 == 0, "chain length must be even and at least 2");
    let delta = anisotropy(q);
    let quarter = S::from_ratio(1, 4);
    let boundary = (q.clone() - q.inv()) * quarter;
    let mut op = LinearOperator::new(basis.clone(), Symmetry::None);

    for (idx, key) in basis.keys().iter().enumerate() {
        let mut walls = 0i64;
        for j in 1..n as usize {
            if key.is_down(j) != key.is_down(j + 1) {
                walls += 1;
            }
        }
        let s = |down: bool| if down { -1 } else { 1 };
        let s_first = s(key.is_down(1));
        let s_last = s(key.is_down(n as usize));
        let diag =
            delta.clone() * S::from_int(walls) + boundary.clone() * S::from_int(s_last - s_first);
        op.add_to(idx, idx, diag);

        for j in 1..n as usize {
            if key.is_down(j) != key.is_down(j + 1) {
                let flipped = SpinConfig(key.0 ^ (1 << (j - 1)) ^ (1 << j));
                if let Some(target) = basis.index_of(&flipped) {
                    op.add_to(target, idx, -S::one());
                }
            }
        }
    }
    let sym = if op.hermiticity_defect() == 0.0 { Symmetry::Hermitian } else { Symmetry::None };
    op.set_symmetry(sym);
    op
}

/// Total-`sigma^3` operator on a spin basis (diagonal, `N - 2m`).
pub fn total_sz<S: Scalar>(basis: &Arc<Basis<SpinConfig>>) -> LinearOperator<SpinConfig, S> {
    let n = spin_n(basis);
    LinearOperator::from_diag(basis.clone(), |key| {
        S::from_int(n as i64 - 2 * key.down_count() as i64)
    })
}

/// Domain-wall-sector Hamiltonian on the truncated partition basis.
///
/// Diagonal `q a(delta) + q^{-1} r(delta)` from the full corner counts;
/// off-diagonal `-1` for every single-box move whose target stays inside the
/// truncation. With this normalization the vector `sum q^{|delta|}` is
/// annihilated exactly on every interior row.
pub fn dw_hamiltonian<S: Scalar>(
    basis: &Arc<Basis<Partition>>,
    q: &S,
) -> LinearOperator<Partition, S> {
    let mut op = LinearOperator::new(basis.clone(), Symmetry::None);
    for (idx, d) in basis.keys().iter().enumerate() {
        let corners = d.corners();
        let diag = q.clone() * S::from_int(corners.addable.len() as i64)
            + q.inv() * S::from_int(corners.removable.len() as i64);
        op.add_to(idx, idx, diag);
        for &row in &corners.addable {
            if let Some(t) = basis.index_of(&d.add_box(row)) {
                op.add_to(t, idx, -S::one());
            }
        }
        for &row in &corners.removable {
            if let Some(t) = basis.index_of(&d.remove_box(row)) {
                op.add_to(t, idx, -S::one());
            }
        }
    }
    op.set_symmetry(Symmetry::Hermitian);
    op
}

/// Rows of a truncated partition basis whose full set of single-box
/// neighbours lies inside the basis.
pub fn interior_rows(basis: &Basis<Partition>) -> Vec<bool> {
    basis
        .keys()
        .iter()
        .map(|d| {
            d.corners()
                .addable
                .iter()
                .all(|&row| basis.index_of(&d.add_box(row)).is_some())
        })
        .collect()
}

/// The ground-state candidate `sum q^{|delta|} |delta>` on a partition basis.
pub fn dw_ground_vector<S: Scalar>(
    basis: &Arc<Basis<Partition>>,
    q: &S,
) -> StateVector<Partition, S> {
    let mut v = StateVector::zero(basis.clone());
    for (i, d) in basis.keys().iter().enumerate() {
        v.set(i, q.powi(d.weight() as i64));
    }
    v
}

/// Independent oracle for the partition-sector Hamiltonian: materialize each
/// partition as spins on a window large enough to hold it and apply the
/// infinite-chain interaction (hops plus `Delta` per domain wall, no boundary
/// field). Used to measure the constant diagonal offset between the two
/// presentations.
pub fn dw_window_oracle<S: Scalar>(
    basis: &Arc<Basis<Partition>>,
    q: &S,
) -> LinearOperator<Partition, S> {
    let (mut max_part, mut max_len) = (1i64, 1i64);
    for d in basis.keys() {
        max_part = max_part.max(d.part(1) as i64);
        max_len = max_len.max(d.len() as i64);
    }
    // doubled coordinates in [floor2, ceil2], odd values only
    let ceil2 = 2 * max_part + 3;
    let floor2 = -(2 * max_len + 5);
    let delta = anisotropy(q);

    let mut op = LinearOperator::new(basis.clone(), Symmetry::None);
    for (idx, d) in basis.keys().iter().enumerate() {
        let mut walls = 0i64;
        let mut x2 = floor2;
        while x2 + 2 <= ceil2 {
            if d.occupies(x2) != d.occupies(x2 + 2) {
                walls += 1;
            }
            x2 += 2;
        }
        op.add_to(idx, idx, delta.clone() * S::from_int(walls));

        // single-spin hops; every in-window hop of a domain-wall
        // configuration adds or removes one box
        let rows = d.len() + (ceil2 - floor2) as usize / 2;
        let coords = d.down_spin_coords(rows).unwrap();
        for &c2 in coords.iter().filter(|&&c| c >= floor2 && c <= ceil2) {
            for target in [c2 - 2, c2 + 2] {
                if target < floor2 || target > ceil2 || d.occupies(target) {
                    continue;
                }
                let moved = move_down_spin(d, c2, target);
                if let Some(t) = moved.and_then(|m| basis.index_of(&m)) {
                    op.add_to(t, idx, -S::one());
                }
            }
        }
    }
    op
}

/// Partition obtained by moving the down spin at doubled coordinate `from2`
/// to `to2`, when the result is again a domain-wall configuration.
fn move_down_spin(d: &Partition, from2: i64, to2: i64) -> Option<Partition> {
    // row i has coordinate 2 part(i) - 2i + 1; moving by +-2 shifts the part
    let count = d.len() + ((from2.abs() + to2.abs()) / 2 + 2) as usize;
    let coords = d.down_spin_coords(count).ok()?;
    let row = coords.iter().position(|&c| c == from2)? + 1;
    let part = d.part(row) as i64 + (to2 - from2) / 2;
    if part < 0 {
        return None;
    }
    let mut parts: Vec<u32> = d.parts().to_vec();
    if row <= parts.len() {
        if part == 0 {
            if row != parts.len() {
                return None;
            }
            parts.pop();
        } else {
            parts[row - 1] = part as u32;
        }
    } else if part > 0 {
        if row != parts.len() + 1 {
            return None;
        }
        parts.push(part as u32);
    } else {
        return None;
    }
    if parts.windows(2).all(|w| w[0] >= w[1]) {
        Some(Partition::new(parts))
    } else {
        None
    }
}

/// Full spectral decomposition through the dense oracle.
///
/// Hermitian operators go straight to Jacobi; operators that are hermitian
/// only up to a positive diagonal similarity (rate matrices) are symmetrized
/// first. Eigenvalues come back sorted ascending by real part.
pub fn dense_eigensolve<K: crate::algebra::BasisKey, S: Scalar>(
    op: &LinearOperator<K, S>,
    dense_limit: usize,
) -> Result<(Vec<f64>, Vec<StateVector<K, C64>>)> {
    let dim = op.dim();
    if dim > dense_limit {
        return Err(Error::Dimension { dim, limit: dense_limit });
    }
    let m = op.to_dense_c64();
    let (vals, vecs) = dense::eig_diag_similar(&m)?;
    let basis = op.basis().clone();
    let vectors = (0..dim)
        .map(|col| {
            let column = vecs.column(col);
            StateVector::from_dense(basis.clone(), &column)
        })
        .collect();
    Ok((vals, vectors))
}

/// Relative eigenpair residual `|H v - lambda v| / |v|`.
pub fn eigen_residual<K: crate::algebra::BasisKey, S: Scalar>(
    op: &LinearOperator<K, S>,
    v: &StateVector<K, S>,
    lambda: &S,
) -> f64 {
    let hv = op.apply(v);
    let r = hv.add_scaled(v, &-lambda.clone());
    r.norm_f64() / v.norm_f64()
}

/// Expectation of `sigma^3` at doubled coordinate `x2` in a spin-basis state.
pub fn magnetization_spin<S: Scalar>(v: &StateVector<SpinConfig, S>, x2: i64) -> Result<S> {
    let n = spin_n(v.basis());
    let site = SpinConfig::coord2_site(x2, n)
        .ok_or_else(|| Error::Domain(format!("coordinate {x2}/2 outside the window")))?;
    magnetization_by(v, move |key: &SpinConfig| !key.is_down(site))
}

/// Expectation of `sigma^3` at doubled coordinate `x2` in a partition-basis
/// state (down spins sit at the Maya coordinates of the partition).
pub fn magnetization_partition<S: Scalar>(v: &StateVector<Partition, S>, x2: i64) -> Result<S> {
    if x2 % 2 == 0 {
        return Err(Error::Domain(format!("{x2}/2 is not a lattice site")));
    }
    magnetization_by(v, move |d: &Partition| !d.occupies(x2))
}

fn magnetization_by<K: crate::algebra::BasisKey, S: Scalar>(
    v: &StateVector<K, S>,
    is_up: impl Fn(&K) -> bool,
) -> Result<S> {
    if v.is_exactly_zero() {
        return Err(Error::ZeroVector);
    }
    let mut num = S::zero();
    let mut den = S::zero();
    for (i, amp) in v.iter() {
        let w = amp.conj() * amp.clone();
        den = den + w.clone();
        if is_up(v.basis().key(i)) {
            num = num + w;
        } else {
            num = num - w;
        }
    }
    Ok(num / den)
}
