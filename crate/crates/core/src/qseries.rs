//! q-deformed combinatorial quantities: q-integers, q-factorials, Gaussian
//! binomials, q-Pochhammer symbols and the inverse Euler product.
//!
//! q-integers are evaluated as explicit polynomials `1 + t + ... + t^(n-1)`,
//! never as the ratio `(1 - t^n)/(1 - t)`, so `t = 1` and roots of unity are
//! legal inputs on both scalar backends.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

/// `[n]_t = sum_{j=0}^{n-1} t^j`.
pub fn q_int<S: Scalar>(n: u64, t: &S) -> S {
    let mut acc = S::zero();
    for _ in 0..n {
        acc = acc * t.clone() + S::one();
    }
    acc
}

/// `[n]_t! = [n]_t [n-1]_t ... [1]_t`; the empty product is 1.
pub fn q_factorial<S: Scalar>(n: u64, t: &S) -> S {
    let mut acc = S::one();
    for j in 1..=n {
        acc = acc * q_int(j, t);
    }
    acc
}

/// Gaussian binomial coefficient with parameter `t`.
///
/// Built from the Pascal recurrence
/// `C(n, k) = C(n-1, k-1) + t^k C(n-1, k)`, which keeps every intermediate a
/// polynomial in `t`. Returns 0 for `k < 0` or `k > n`.
pub fn q_binomial<S: Scalar>(n: u64, k: i64, t: &S) -> S {
    if k < 0 || k as u64 > n {
        return S::zero();
    }
    let k = k as u64;
    // row-by-row DP; row[j] = C(i, j)
    let mut row: Vec<S> = vec![S::zero(); k as usize + 1];
    row[0] = S::one();
    for _ in 1..=n {
        for j in (1..=k as usize).rev() {
            let tj = t.powi(j as i64);
            row[j] = row[j - 1].clone() + tj * row[j].clone();
        }
    }
    row[k as usize].clone()
}

/// Finite q-Pochhammer symbol `(a; t)_k = prod_{j=0}^{k-1} (1 - a t^j)`.
pub fn q_pochhammer<S: Scalar>(a: &S, t: &S, k: u64) -> S {
    let mut acc = S::one();
    let mut atj = a.clone();
    for _ in 0..k {
        acc = acc * (S::one() - atj.clone());
        atj = atj * t.clone();
    }
    acc
}

/// Value of a truncated infinite q-Pochhammer symbol together with a bound on
/// the neglected tail.
#[derive(Debug, Clone, Copy)]
pub struct QPochInfinite {
    pub value: C64,
    /// Bound on `|log(true/value)|`: `|a| |t|^K / (1 - |t|)`.
    pub log_tail_bound: f64,
}

/// `(a; t)_inf` truncated after `trunc_k` factors.
///
/// Requires `|t| < 1`; the truncation error bound is returned alongside the
/// value rather than silently dropped.
pub fn q_pochhammer_infinite(a: C64, t: C64, trunc_k: usize) -> Result<QPochInfinite> {
    let abs_t = t.norm();
    if abs_t >= 1.0 {
        return Err(Error::NonConvergent { abs_t });
    }
    let value = q_pochhammer(&a, &t, trunc_k as u64);
    let log_tail_bound = a.norm() * abs_t.powi(trunc_k as i32) / (1.0 - abs_t);
    Ok(QPochInfinite { value, log_tail_bound })
}

/// `prod_{k=1}^{K} 1 / (1 - q^(2k))`, the truncated inverse Euler product.
pub fn euler_inverse_product<S: Scalar>(q: &S, k_max: u64) -> Result<S> {
    if q.as_unit_interval_real().is_none() {
        return Err(Error::Domain(format!(
            "euler_inverse_product requires real q in (0,1), got {q}"
        )));
    }
    if k_max == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let q2 = q.clone() * q.clone();
    let mut acc = S::one();
    let mut q2k = q2.clone();
    for _ in 1..=k_max {
        acc = acc * (S::one() - q2k.clone()).inv();
        q2k = q2k * q2.clone();
    }
    Ok(acc)
}
