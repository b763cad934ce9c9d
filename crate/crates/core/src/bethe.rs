//! Magnon amplitudes, bound states, finite-chain Bethe vectors and their
//! domain-wall limits.
//!
//! Conventions fixed here (each validated by an eigen-residual test):
//! the two-magnon scattering factor is `1 - 2 Delta z_i + z_i z_j` with the
//! earlier argument carrying the `-2 Delta`; the finite-chain sum over
//! permutations and reflections carries sign `sign(pi) * (-1)^#reflections`;
//! amplitude argument tuples are always passed in increasing coordinate
//! order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Basis, BasisId, SpinConfig, StateVector};
use crate::dense::{lu_solve, DMat};
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::scalar::{zpow_half, Scalar, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootContext {
    Infinite,
    Finite { n: u32 },
}

/// An ordered tuple of nonzero Bethe roots with its chain context.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetheRoots {
    pub z: Vec<C64>,
    pub context: RootContext,
}

impl BetheRoots {
    pub fn infinite(z: Vec<C64>) -> Self {
        assert!(z.iter().all(|w| w.norm() > 0.0), "roots must be nonzero");
        BetheRoots { z, context: RootContext::Infinite }
    }

    pub fn finite(z: Vec<C64>, n: u32) -> Self {
        assert!(z.iter().all(|w| w.norm() > 0.0), "roots must be nonzero");
        BetheRoots { z, context: RootContext::Finite { n } }
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    /// `sum_a (2 Delta - z_a - 1/z_a)`.
    pub fn energy(&self, delta: f64) -> C64 {
        self.z
            .iter()
            .map(|z| C64::new(2.0 * delta, 0.0) - z - z.inv())
            .fold(C64::new(0.0, 0.0), |a, b| a + b)
    }
}

/// Iterate permutations of `0..m` with their signs.
fn for_each_permutation(m: usize, mut f: impl FnMut(&[usize], i32)) {
    let mut perm: Vec<usize> = (0..m).collect();
    fn rec(perm: &mut Vec<usize>, k: usize, sign: i32, f: &mut impl FnMut(&[usize], i32)) {
        let m = perm.len();
        if k == m {
            f(perm, sign);
            return;
        }
        for i in k..m {
            perm.swap(k, i);
            let s = if i == k { sign } else { -sign };
            rec(perm, k + 1, s, f);
            perm.swap(k, i);
        }
    }
    rec(&mut perm, 0, 1, &mut f);
}

/// Infinite-chain magnon amplitude
/// `lambda(x|z) = sum_pi eps_pi A(z_pi) z_pi^x` with
/// `A(z) = prod_{i<j} (1 - 2 Delta z_i + z_i z_j)`.
///
/// Coordinates are doubled integers (any parity); the argument tuple is used
/// in the order given.
pub fn magnon_amplitude(x2: &[i64], roots: &BetheRoots, delta: f64) -> C64 {
    let m = roots.m();
    assert_eq!(x2.len(), m);
    let z = &roots.z;
    let mut total = C64::new(0.0, 0.0);
    for_each_permutation(m, |perm, sign| {
        let mut term = C64::new(sign as f64, 0.0);
        for i in 0..m {
            for j in (i + 1)..m {
                term *= C64::new(1.0, 0.0) - 2.0 * delta * z[perm[i]] + z[perm[i]] * z[perm[j]];
            }
        }
        for (a, &x) in x2.iter().enumerate() {
            term *= zpow_half(z[perm[a]], x);
        }
        total += term;
    });
    total
}

/// Maximum residual of the infinite-chain eigenproblem for the amplitude
/// over all `m`-magnon configurations on a window of `window` sites.
///
/// The difference operator hops every magnon to unoccupied neighbours with
/// weight `-1` and carries the diagonal `2 Delta m - 2 Delta (adjacent
/// pairs)`; the residual is normalized by the largest amplitude seen.
pub fn ferro_eigen_residual(roots: &BetheRoots, delta: f64, window: u32) -> Result<f64> {
    let m = roots.m();
    if (window as usize) < 2 * m + 4 {
        return Err(Error::WindowTooSmall { m });
    }
    let energy = roots.energy(delta);
    // doubled odd coordinates on the window
    let sites: Vec<i64> = (0..window as i64).map(|j| 2 * j - window as i64 + 1).collect();

    let mut max_amp = 0.0f64;
    let mut worst = 0.0f64;
    let mut config = vec![0usize; m];

    fn for_each_combo(n: usize, m: usize, config: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        fn rec(
            n: usize,
            m: usize,
            start: usize,
            level: usize,
            config: &mut Vec<usize>,
            f: &mut impl FnMut(&[usize]),
        ) {
            if level == m {
                f(config);
                return;
            }
            for i in start..=(n - (m - level)) {
                config[level] = i;
                rec(n, m, i + 1, level + 1, config, f);
            }
        }
        if m == 0 {
            f(config);
        } else {
            rec(n, m, 0, 0, config, f);
        }
    }

    let lam = |x2: &[i64]| magnon_amplitude(x2, roots, delta);

    for_each_combo(window as usize, m, &mut config, &mut |combo| {
        let x2: Vec<i64> = combo.iter().map(|&i| sites[i]).collect();
        let v = lam(&x2);
        max_amp = max_amp.max(v.norm());
        let adjacent = x2.windows(2).filter(|w| w[1] - w[0] == 2).count() as f64;
        let mut acc = (2.0 * delta * m as f64 - 2.0 * delta * adjacent) * v;
        for a in 0..m {
            for step in [-2i64, 2] {
                let target = x2[a] + step;
                if x2.contains(&target) {
                    continue;
                }
                let mut y2 = x2.clone();
                y2[a] = target;
                y2.sort_unstable();
                acc -= lam(&y2);
            }
        }
        worst = worst.max((acc - energy * v).norm());
    });
    Ok(worst / max_amp.max(1e-300))
}

/// A bound state of `n` magnons with real rapidity `beta` and `eta > 0`
/// fixed by `cosh(eta) = Delta`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundState {
    pub n: u32,
    pub beta: f64,
    pub eta: f64,
}

const RAPIDITY_TOL: f64 = 1e-13;

impl BoundState {
    pub fn delta(&self) -> f64 {
        self.eta.cosh()
    }
}

/// Roots from the rapidity parametrization
/// `z_j = sh(i beta + (n/2 - j + 1) eta) / sh(i beta + (n/2 - j) eta)`.
pub fn bound_state_roots(bs: &BoundState) -> Result<BetheRoots> {
    assert!(bs.n >= 1 && bs.eta > 0.0);
    let ib = C64::new(0.0, bs.beta);
    let mut z = Vec::with_capacity(bs.n as usize);
    for j in 1..=bs.n as i64 {
        let num = (ib + C64::new((bs.n as f64 / 2.0 - j as f64 + 1.0) * bs.eta, 0.0)).sinh();
        let den = (ib + C64::new((bs.n as f64 / 2.0 - j as f64) * bs.eta, 0.0)).sinh();
        if den.norm() < RAPIDITY_TOL {
            return Err(Error::SingularRapidity(den.norm()));
        }
        z.push(num / den);
    }
    Ok(BetheRoots::infinite(z))
}

/// `max_i |z_i - h(z_{i+1})|` with `h(z) = 2 Delta - 1/z`.
pub fn h_orbit_residual(roots: &BetheRoots, delta: f64) -> f64 {
    roots
        .z
        .windows(2)
        .map(|w| (w[0] - (C64::new(2.0 * delta, 0.0) - w[1].inv())).norm())
        .fold(0.0, f64::max)
}

/// Closed-form product `z_1 ... z_n = sh(i beta + n eta/2)/sh(i beta - n eta/2)`.
pub fn bound_state_product(bs: &BoundState) -> Result<C64> {
    let ib = C64::new(0.0, bs.beta);
    let half = bs.n as f64 * bs.eta / 2.0;
    let den = (ib - C64::new(half, 0.0)).sinh();
    if den.norm() < RAPIDITY_TOL {
        return Err(Error::SingularRapidity(den.norm()));
    }
    Ok((ib + C64::new(half, 0.0)).sinh() / den)
}

/// Closed-form bound-state energy
/// `2 sh(eta) sh(n eta) / (ch(n eta) - cos(2 beta))`.
pub fn bound_state_energy(bs: &BoundState) -> Result<f64> {
    let den = (bs.n as f64 * bs.eta).cosh() - (2.0 * bs.beta).cos();
    if den.abs() < RAPIDITY_TOL {
        return Err(Error::SingularRapidity(den.abs()));
    }
    Ok(2.0 * bs.eta.sinh() * (bs.n as f64 * bs.eta).sinh() / den)
}

/// Finite-chain amplitude `lambda^{(N)}(x|z)`: the sum over permutations and
/// reflections with sign `sign(pi) (-1)^#reflections`, boundary factor
/// `beta(z) = (1 - q/z) z^{(N+1)/2}` and pair factor
/// `B(1/z_j, z_l) / z_l`. Coordinates are doubled half-integers in the order
/// given (increasing for on-shell vectors).
pub fn finite_amplitude(x2: &[i64], roots: &BetheRoots, n: u32, q: C64) -> C64 {
    let m = roots.m();
    assert_eq!(x2.len(), m);
    let delta = (q + q.inv()) * 0.5;
    let z = &roots.z;
    let mut total = C64::new(0.0, 0.0);
    let two = 2.0;

    for_each_permutation(m, |perm, psign| {
        // iterate reflection patterns as bitmasks
        for refl in 0..(1u32 << m) {
            let sign = psign * if refl.count_ones() % 2 == 0 { 1 } else { -1 };
            let u: Vec<C64> = (0..m)
                .map(|a| {
                    let w = z[perm[a]];
                    if refl >> a & 1 == 1 {
                        w.inv()
                    } else {
                        w
                    }
                })
                .collect();
            let mut term = C64::new(sign as f64, 0.0);
            for (a, &x) in x2.iter().enumerate() {
                // beta(1/u) u^x = (1 - q u) u^{x - (N+1)/2}
                let e2 = x - n as i64 - 1; // doubled exponent
                term *= (C64::new(1.0, 0.0) - q * u[a]) * zpow_half(u[a], e2);
            }
            for j in 0..m {
                for l in (j + 1)..m {
                    // B(1/u_j, u_l) / u_l
                    let f1 = C64::new(1.0, 0.0) - two * delta * u[l] + u[l] / u[j];
                    let f2 = C64::new(1.0, 0.0) - two * delta * u[j] + u[j] * u[l];
                    term *= f1 * f2 / u[l];
                }
            }
            total += term;
        }
    });
    total
}

/// One-magnon root classes `z = exp(i pi k / N)`, `k = 1..N-1`: the
/// degenerate `z = +-1` never enter and `z <-> 1/z` duplicates are removed
/// by keeping arguments in `(0, pi)`.
pub fn solve_bethe_m1(n: u32) -> Vec<BetheRoots> {
    (1..n)
        .map(|k| {
            let theta = std::f64::consts::PI * k as f64 / n as f64;
            BetheRoots::finite(vec![C64::from_polar(1.0, theta)], n)
        })
        .collect()
}

/// Largest violation of the Bethe equations
/// `z_j^{2N} = prod_{l != j} B(1/z_j, z_l)/B(z_j, z_l)`.
pub fn bethe_equation_residual(roots: &BetheRoots, n: u32, q: C64) -> f64 {
    let delta = ((q + q.inv()) * 0.5).re;
    let m = roots.m();
    let b = |z1: C64, z2: C64| {
        (C64::new(1.0, 0.0) - 2.0 * delta * z2 + z1 * z2)
            * (C64::new(1.0, 0.0) - 2.0 * delta * z1.inv() + z2 * z1.inv())
    };
    let mut worst = 0.0f64;
    for j in 0..m {
        let mut rhs = C64::new(1.0, 0.0);
        for l in 0..m {
            if l != j {
                rhs *= b(roots.z[j].inv(), roots.z[l]) / b(roots.z[j], roots.z[l]);
            }
        }
        let lhs = Scalar::powi(&roots.z[j], 2 * n as i64);
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

/// Newton refinement of root seeds onto the Bethe equations. This is a
/// polish step for externally supplied multi-magnon seeds, not a solver:
/// convergence requires a good starting point.
pub fn refine_on_shell(seed: &BetheRoots, n: u32, q: C64, max_iter: usize) -> Result<BetheRoots> {
    let m = seed.m();
    let delta = ((q + q.inv()) * 0.5).re;
    let b = |z1: C64, z2: C64| {
        (C64::new(1.0, 0.0) - 2.0 * delta * z2 + z1 * z2)
            * (C64::new(1.0, 0.0) - 2.0 * delta * z1.inv() + z2 * z1.inv())
    };
    let residual_vec = |z: &[C64]| -> Vec<C64> {
        (0..m)
            .map(|j| {
                let mut rhs = C64::new(1.0, 0.0);
                for l in 0..m {
                    if l != j {
                        rhs *= b(z[j].inv(), z[l]) / b(z[j], z[l]);
                    }
                }
                Scalar::powi(&z[j], 2 * n as i64) - rhs
            })
            .collect()
    };

    let mut z = seed.z.clone();
    for _ in 0..max_iter {
        let f = residual_vec(&z);
        let worst = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if worst < 1e-14 {
            return Ok(BetheRoots::finite(z, n));
        }
        // numeric Jacobian
        let h = 1e-8;
        let mut jac = DMat::zeros(m);
        for k in 0..m {
            let mut zp = z.clone();
            zp[k] += C64::new(h, 0.0);
            let fp = residual_vec(&zp);
            for r in 0..m {
                *jac.at_mut(r, k) = (fp[r] - f[r]) / h;
            }
        }
        let mut rhs = DMat::zeros(m);
        for r in 0..m {
            *rhs.at_mut(r, 0) = f[r];
        }
        let step = lu_solve(jac, rhs);
        let mut moved = 0.0f64;
        for k in 0..m {
            let dz = step.at(k, 0);
            z[k] -= dz;
            moved = moved.max(dz.norm());
        }
        if moved > 1e3 {
            return Err(Error::ConvergenceFailure(max_iter));
        }
    }
    let final_res = residual_vec(&z).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if final_res < 1e-10 {
        Ok(BetheRoots::finite(z, n))
    } else {
        Err(Error::ConvergenceFailure(max_iter))
    }
}

/// Bethe vector on the `m`-magnon sector of an `N`-site window.
pub fn build_bethe_vector(
    basis: &Arc<Basis<SpinConfig>>,
    roots: &BetheRoots,
    q: C64,
) -> Result<StateVector<SpinConfig, C64>> {
    let n = match basis.id() {
        BasisId::SpinSector { n, m } if *m as usize == roots.m() => *n,
        BasisId::SpinFull { n } => *n,
        other => {
            return Err(Error::BasisMismatch(format!(
                "need the {}-magnon sector, got {other}",
                roots.m()
            )))
        }
    };
    let mut v = StateVector::zero(basis.clone());
    for (idx, key) in basis.keys().iter().enumerate() {
        if key.down_count() as usize != roots.m() {
            continue;
        }
        let x2 = key.down_coords2(n);
        let amp = finite_amplitude(&x2, roots, n, q);
        v.set(idx, amp);
    }
    if v.max_mag() < 1e-10 {
        return Err(Error::ZeroVector);
    }
    Ok(v)
}

/// Coefficients of the half-filled descendant over partitions in the
/// `(N/2) x (N/2)` box:
/// `q^{binom(m+1,2)+|delta|} sum_{l_1<..<l_m} lambda^{(N)}(coords asc | z)
///  / q^{sum(delta_{l_a}+l_a)}`.
pub fn half_filled_coefficients(
    basis: &Arc<Basis<Partition>>,
    roots: &BetheRoots,
    n: u32,
    q: C64,
) -> Result<StateVector<Partition, C64>> {
    let m = roots.m();
    let p_box = n / 2;
    if m as u32 > p_box {
        return Err(Error::SectorOverflow { m, p: p_box as usize, n: n as usize });
    }
    let mut v = StateVector::zero(basis.clone());
    let mut tuple = vec![0u32; m];
    for (idx, d) in basis.keys().iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        // iterate 1 <= l_1 < ... < l_m <= N/2
        fn rec(
            tuple: &mut Vec<u32>,
            level: usize,
            start: u32,
            p_box: u32,
            d: &Partition,
            roots: &BetheRoots,
            n: u32,
            q: C64,
            acc: &mut C64,
        ) {
            let m = tuple.len();
            if level == m {
                // coordinates delta_l - l + 1/2 decrease in l; pass ascending
                let mut x2: Vec<i64> = tuple
                    .iter()
                    .map(|&l| 2 * d.part(l as usize) as i64 - 2 * l as i64 + 1)
                    .collect();
                x2.reverse();
                let lam = finite_amplitude(&x2, roots, n, q);
                let denom_exp: i64 = tuple
                    .iter()
                    .map(|&l| d.part(l as usize) as i64 + l as i64)
                    .sum();
                *acc += lam * Scalar::powi(&q, -denom_exp);
                return;
            }
            for l in start..=(p_box - (m - level - 1) as u32) {
                tuple[level] = l;
                rec(tuple, level + 1, l + 1, p_box, d, roots, n, q, acc);
            }
        }
        if m == 0 {
            acc = C64::new(1.0, 0.0);
        } else {
            rec(&mut tuple, 0, 1, p_box, d, roots, n, q, &mut acc);
        }
        let pref = Scalar::powi(&q, (m as i64) * (m as i64 + 1) / 2 + d.weight() as i64);
        v.set(idx, pref * acc);
    }
    Ok(v)
}

const POLE_TOL: f64 = 1e-12;

/// Analytic continuation of the one-magnon staircase tail
/// `sum_{l>r} (q z)^{-l} = -(z q)^{-r} / (1 - q z)`.
pub fn regularized_tail_m1(r: u32, z: C64, q: C64) -> Result<C64> {
    let pole = C64::new(1.0, 0.0) - q * z;
    if pole.norm() < POLE_TOL {
        return Err(Error::Pole(pole.norm()));
    }
    Ok(-zpow_half((z * q).inv(), 2 * r as i64) / pole)
}

/// Domain-wall eigenvector coefficient at `delta` for infinite-context
/// roots, with every divergent staircase tail replaced by its geometric
/// continuation.
///
/// Amplitude arguments are ordered increasingly, so the deep-staircase
/// variables attach to the leading permutation slots; the tail over `j`
/// such variables evaluates to `prod_{b<=j} W_b/(1-W_b) * W_j^r` with the
/// prefix products `W_b = prod_{a<=b} (q z_{pi(a)})^{-1}`.
pub fn binf_coefficient(d: &Partition, roots: &BetheRoots, q: C64) -> Result<C64> {
    let m = roots.m();
    let delta = ((q + q.inv()) * 0.5).re;
    let r = d.len();
    let z = &roots.z;
    let mut total = C64::new(0.0, 0.0);
    let mut pole: Option<f64> = None;

    for_each_permutation(m, |perm, sign| {
        let zp: Vec<C64> = perm.iter().map(|&p| z[p]).collect();
        let mut a_factor = C64::new(sign as f64, 0.0);
        for i in 0..m {
            for j in (i + 1)..m {
                a_factor *= C64::new(1.0, 0.0) - 2.0 * delta * zp[i] + zp[i] * zp[j];
            }
        }
        let w: Vec<C64> = zp.iter().map(|&zz| (q * zz).inv()).collect();

        let mut acc = C64::new(0.0, 0.0);
        for j in 0..=m {
            // tail factor for the first j variables (all beyond row r)
            let mut tail = C64::new(1.0, 0.0);
            let mut prefix = C64::new(1.0, 0.0);
            let mut bad = false;
            for wb in w.iter().take(j) {
                prefix *= wb;
                let denom = C64::new(1.0, 0.0) - prefix;
                if denom.norm() < POLE_TOL {
                    bad = true;
                    break;
                }
                tail *= prefix / denom;
            }
            if bad {
                pole = Some(0.0);
                continue;
            }
            tail *= Scalar::powi(&prefix, r as i64);

            // finite part: rows r >= k_{j+1} > ... > k_m >= 1 (decreasing)
            let nv = m - j;
            let finite = if nv == 0 {
                C64::new(1.0, 0.0)
            } else if r < nv {
                C64::new(0.0, 0.0)
            } else {
                let mut sum = C64::new(0.0, 0.0);
                let mut combo = vec![0u32; nv];
                fn rec(
                    combo: &mut Vec<u32>,
                    level: usize,
                    max_next: u32,
                    j: usize,
                    d: &Partition,
                    zp: &[C64],
                    q: C64,
                    sum: &mut C64,
                ) {
                    let nv = combo.len();
                    if level == nv {
                        let mut term = C64::new(1.0, 0.0);
                        for (off, &k) in combo.iter().enumerate() {
                            let a = j + off;
                            let part = d.part(k as usize) as i64;
                            term *= zpow_half(zp[a], 2 * (part - k as i64))
                                * Scalar::powi(&q, -(part + k as i64));
                        }
                        *sum += term;
                        return;
                    }
                    let remaining = (nv - level - 1) as u32;
                    let mut k = max_next;
                    while k >= remaining + 1 {
                        combo[level] = k;
                        rec(combo, level + 1, k - 1, j, d, zp, q, sum);
                        if k == 1 {
                            break;
                        }
                        k -= 1;
                    }
                }
                rec(&mut combo, 0, r as u32, j, d, &zp, q, &mut sum);
                sum
            };
            acc += tail * finite;
        }
        total += a_factor * acc;
    });

    if let Some(p) = pole {
        return Err(Error::Pole(p));
    }
    let pref = Scalar::powi(&q, (m as i64) * (m as i64 + 1) / 2 + d.weight() as i64);
    Ok(pref * total)
}

/// Assemble the domain-wall eigenvector on a truncated partition basis.
pub fn binf_vector(
    basis: &Arc<Basis<Partition>>,
    roots: &BetheRoots,
    q: C64,
) -> Result<StateVector<Partition, C64>> {
    let mut v = StateVector::zero(basis.clone());
    for (idx, d) in basis.keys().iter().enumerate() {
        v.set(idx, binf_coefficient(d, roots, q)?);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{
        dense_eigensolve, dw_hamiltonian, eigen_residual, interior_rows,
        invariant_hamiltonian, partition_basis, spin_sector_basis, Truncation,
    };
    use rand::{Rng, SeedableRng};

    const Q: f64 = 0.5;

    fn qc() -> C64 {
        C64::new(Q, 0.0)
    }

    fn delta() -> f64 {
        (Q + 1.0 / Q) / 2.0
    }

    #[test]
    fn one_magnon_amplitude_is_plane_wave() {
        let z = C64::from_polar(1.0, 0.73);
        let roots = BetheRoots::infinite(vec![z]);
        for x2 in [-5i64, -1, 1, 7] {
            let got = magnon_amplitude(&[x2], &roots, delta());
            assert!((got - zpow_half(z, x2)).norm() < 1e-14);
        }
    }

    #[test]
    fn equal_roots_annihilate_amplitude() {
        let z = C64::from_polar(1.0, 1.1);
        let roots = BetheRoots::infinite(vec![z, z]);
        let got = magnon_amplitude(&[0, 2], &roots, delta());
        assert!(got.norm() < 1e-13);
    }

    #[test]
    fn two_magnon_amplitude_expansion() {
        let z1 = C64::from_polar(1.0, 0.4);
        let z2 = C64::from_polar(1.0, 1.9);
        let d = delta();
        let roots = BetheRoots::infinite(vec![z1, z2]);
        let got = magnon_amplitude(&[0, 2], &roots, d);
        let a12 = C64::new(1.0, 0.0) - 2.0 * d * z1 + z1 * z2;
        let a21 = C64::new(1.0, 0.0) - 2.0 * d * z2 + z1 * z2;
        let expect = a12 * z2 - a21 * z1;
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn ferro_residuals() {
        let one = BetheRoots::infinite(vec![C64::from_polar(1.0, 0.9)]);
        assert!(ferro_eigen_residual(&one, delta(), 10).unwrap() < 1e-12);

        let two = BetheRoots::infinite(vec![
            C64::from_polar(1.0, 0.9),
            C64::from_polar(1.0, 2.1),
        ]);
        assert!(ferro_eigen_residual(&two, delta(), 12).unwrap() < 1e-10);

        assert!(matches!(
            ferro_eigen_residual(&two, delta(), 6),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn scrambled_scattering_factor_fails() {
        // negative control: drop the A-product entirely
        let z = [C64::from_polar(1.0, 0.9), C64::from_polar(1.0, 2.1)];
        let d = delta();
        let energy: C64 = z
            .iter()
            .map(|w| C64::new(2.0 * d, 0.0) - w - w.inv())
            .sum();
        let lam = |x2: &[i64]| {
            zpow_half(z[0], x2[0]) * zpow_half(z[1], x2[1])
                - zpow_half(z[1], x2[0]) * zpow_half(z[0], x2[1])
        };
        let sites: Vec<i64> = (0..12).map(|j| 2 * j - 11).collect();
        let mut worst = 0.0f64;
        let mut max_amp = 0.0f64;
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                let x2 = [sites[i], sites[j]];
                let v = lam(&x2);
                max_amp = max_amp.max(v.norm());
                let adjacent = if x2[1] - x2[0] == 2 { 1.0 } else { 0.0 };
                let mut acc = (2.0 * d * 2.0 - 2.0 * d * adjacent) * v;
                for a in 0..2 {
                    for step in [-2i64, 2] {
                        let t = x2[a] + step;
                        if x2.contains(&t) {
                            continue;
                        }
                        let mut y2 = [x2[0], x2[1]];
                        y2[a] = t;
                        y2.sort_unstable();
                        acc -= lam(&y2);
                    }
                }
                worst = worst.max((acc - energy * v).norm());
            }
        }
        assert!(worst / max_amp > 0.1, "negative control too small: {}", worst / max_amp);
    }

    #[test]
    fn bound_state_relations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5u32 {
            for _ in 0..20 {
                let beta: f64 = rng.random_range(0.15..std::f64::consts::PI - 0.15);
                let eta: f64 = rng.random_range(0.2..1.8);
                let bs = BoundState { n, beta, eta };
                let d = bs.delta();
                let roots = bound_state_roots(&bs).unwrap();
                assert!(h_orbit_residual(&roots, d) < 1e-12, "n={n} beta={beta} eta={eta}");
                let prod: C64 = roots.z.iter().product();
                assert!((prod.norm() - 1.0).abs() < 1e-12);
                let closed = bound_state_product(&bs).unwrap();
                assert!((prod - closed).norm() < 1e-11);
                let e_closed = bound_state_energy(&bs).unwrap();
                let e_roots = roots.energy(d);
                assert!((e_roots - C64::new(e_closed, 0.0)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn bound_state_singular_rapidity() {
        // even n with beta = 0 hits sh(0) in a denominator
        let bs = BoundState { n: 2, beta: 0.0, eta: 0.7 };
        assert!(matches!(bound_state_roots(&bs), Err(Error::SingularRapidity(_))));
    }

    #[test]
    fn bound_state_energy_special_values() {
        // n=1: E = 2 sh(eta)^2 / (ch(eta) - cos(2 beta))
        let eta = (1.25f64).acosh();
        for beta in [0.0, std::f64::consts::FRAC_PI_2] {
            let bs = BoundState { n: 1, beta, eta };
            let expect = 2.0 * eta.sinh().powi(2) / (eta.cosh() - (2.0 * beta).cos());
            assert!((bound_state_energy(&bs).unwrap() - expect).abs() < 1e-14);
        }
        // n=1 roots stay on the unit circle
        let bs = BoundState { n: 1, beta: 0.8, eta };
        let roots = bound_state_roots(&bs).unwrap();
        assert!((roots.z[0].norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bound_state_amplitudes_decay_with_separation() {
        let bs = BoundState { n: 2, beta: 0.9, eta: (1.25f64).acosh() };
        let roots = bound_state_roots(&bs).unwrap();
        let d = bs.delta();
        let mut last = f64::INFINITY;
        for sep in [2i64, 6, 12, 20] {
            let amp = magnon_amplitude(&[1, 1 + 2 * sep], &roots, d).norm();
            assert!(amp < last, "no decay at separation {sep}");
            last = amp;
        }
    }

    #[test]
    fn bound_state_satisfies_bulk_eigenproblem() {
        let bs = BoundState { n: 2, beta: 0.9, eta: (1.25f64).acosh() };
        let roots = bound_state_roots(&bs).unwrap();
        assert!(ferro_eigen_residual(&roots, bs.delta(), 14).unwrap() < 1e-10);
    }

    #[test]
    fn m1_solver_roots() {
        let roots = solve_bethe_m1(2);
        assert_eq!(roots.len(), 1);
        assert!((roots[0].z[0] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(solve_bethe_m1(4).len(), 3);
        for r in solve_bethe_m1(8) {
            assert!(bethe_equation_residual(&r, 8, qc()) < 1e-12);
        }
    }

    #[test]
    fn z_equal_one_gives_zero_vector() {
        let basis = spin_sector_basis(4, 1);
        let roots = BetheRoots::finite(vec![C64::new(1.0, 0.0)], 4);
        assert!(matches!(build_bethe_vector(&basis, &roots, qc()), Err(Error::ZeroVector)));
    }

    #[test]
    fn n2_vector_matches_dense_oracle() {
        let basis = spin_sector_basis(2, 1);
        let roots = BetheRoots::finite(vec![C64::new(0.0, 1.0)], 2);
        let v = build_bethe_vector(&basis, &roots, qc()).unwrap();
        // eigenvalue 2 Delta; vector proportional to (1, -1/q) on (du, ud)
        let h = invariant_hamiltonian(&basis, &qc());
        let res = eigen_residual(&h, &v, &C64::new(2.0 * delta(), 0.0));
        assert!(res < 1e-13);
        let ratio = v.get(1) / v.get(0);
        assert!((ratio - C64::new(-1.0 / Q, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn solver_roots_are_eigenvectors_up_to_n8() {
        for n in [2u32, 4, 6, 8] {
            let basis = spin_sector_basis(n, 1);
            let h = invariant_hamiltonian(&basis, &qc());
            for roots in solve_bethe_m1(n) {
                let v = build_bethe_vector(&basis, &roots, qc()).unwrap();
                let energy = roots.energy(delta());
                assert!(energy.im.abs() < 1e-12);
                let res = eigen_residual(&h, &v, &C64::new(energy.re, 0.0));
                assert!(res < 1e-11, "N={n} res={res}");
            }
        }
    }

    #[test]
    fn refine_recovers_two_magnon_roots_n4() {
        // seeds near the known on-shell pairs; refinement must land on shell
        let seeds = [
            BetheRoots::finite(vec![C64::new(0.30, 0.39), C64::new(0.30, -0.39)], 4),
            BetheRoots::finite(vec![C64::new(0.31, 0.95), C64::new(-0.63, 0.77)], 4),
        ];
        let sector = spin_sector_basis(4, 2);
        let h = invariant_hamiltonian(&sector, &qc());
        for seed in &seeds {
            let refined = refine_on_shell(seed, 4, qc(), 100).unwrap();
            assert!(bethe_equation_residual(&refined, 4, qc()) < 1e-12);
            let v = build_bethe_vector(&sector, &refined, qc()).unwrap();
            let energy = refined.energy(delta());
            assert!(energy.im.abs() < 1e-10);
            assert!(eigen_residual(&h, &v, &C64::new(energy.re, 0.0)) < 1e-11);
        }
    }

    #[test]
    fn half_filled_matches_descendant_n4_m1() {
        use crate::uqsl2::{build_generators, descendant};
        let n = 4u32;
        let g = build_generators(n, &qc(), 4096).unwrap();
        let sector = spin_sector_basis(n, 1);
        let box_b = crate::chain::box_basis(n / 2);
        for roots in solve_bethe_m1(n) {
            let bv = build_bethe_vector(&sector, &roots, qc()).unwrap();
            let full = crate::algebra::reindex(&bv, g.basis()).unwrap();
            let desc = descendant(&g, &full, n / 2 - 1).unwrap();
            let hf = half_filled_coefficients(&box_b, &roots, n, qc()).unwrap();
            // compare through the spin<->partition bijection, one global scale
            let mut ratio = None;
            for (i, d) in box_b.keys().iter().enumerate() {
                let coords = d.down_spin_coords((n / 2) as usize).unwrap();
                let key = SpinConfig::from_down_coords2(&coords, n).unwrap();
                let spin_amp = desc.get(g.basis().index_of(&key).unwrap());
                let part_amp = hf.get(i);
                match ratio {
                    None => {
                        if part_amp.norm() > 1e-10 {
                            ratio = Some(spin_amp / part_amp);
                        }
                    }
                    Some(r) => {
                        assert!(
                            (spin_amp - r * part_amp).norm() < 1e-12 * desc.max_mag(),
                            "mismatch at {d}"
                        );
                    }
                }
            }
            let r = ratio.unwrap();
            assert!((r - C64::new(1.0, 0.0)).norm() < 1e-12, "global ratio {r}");
        }
    }

    #[test]
    fn regularized_tail_examples() {
        // q = 1/2, z = 4: -(1)/(1-2) = 1; direct geometric sum gives 1
        let got = regularized_tail_m1(0, C64::new(4.0, 0.0), qc()).unwrap();
        assert!((got - C64::new(1.0, 0.0)).norm() < 1e-14);

        // matches direct summation whenever |qz| > 1
        let z = C64::new(3.0, 1.0);
        for r in 0..=10u32 {
            let reg = regularized_tail_m1(r, z, qc()).unwrap();
            let mut direct = C64::new(0.0, 0.0);
            for l in (r as i64 + 1)..400 {
                direct += Scalar::powi(&(qc() * z).inv(), l);
            }
            assert!((reg - direct).norm() < 1e-12, "r={r}");
        }

        // telescoped two-term form with integer-coordinate plane waves
        let z = C64::from_polar(1.0, 1.2);
        for r in 0..=10i64 {
            let reg = regularized_tail_m1(r as u32, z, qc()).unwrap();
            let num = Scalar::powi(&z, -r) / qc() - Scalar::powi(&z, -r - 1);
            let den = Scalar::powi(&qc(), r) * (z + z.inv() - qc() - qc().inv());
            assert!((reg - num / den).norm() < 1e-12, "r={r}");
        }

        // z -> infinity: tail vanishes
        let far = regularized_tail_m1(3, C64::new(1e8, 0.0), qc()).unwrap();
        assert!(far.norm() < 1e-12);

        // pole at qz = 1
        assert!(matches!(
            regularized_tail_m1(0, C64::new(2.0, 0.0), qc()),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn binf_m0_is_ground_state() {
        let basis = partition_basis(&Truncation::by_weight(10));
        let roots = BetheRoots::infinite(vec![]);
        let v = binf_vector(&basis, &roots, qc()).unwrap();
        for (i, d) in basis.keys().iter().enumerate() {
            let expect = Scalar::powi(&qc(), d.weight() as i64);
            assert!((v.get(i) - expect).norm() < 1e-15, "{d}");
        }
    }

    #[test]
    fn binf_m1_closed_form_at_empty_partition() {
        // coefficient at the empty partition is q * (regularized tail at r=0)
        let z = C64::from_polar(1.0, 1.1);
        let roots = BetheRoots::infinite(vec![z]);
        let got = binf_coefficient(&Partition::empty(), &roots, qc()).unwrap();
        let expect = qc() * regularized_tail_m1(0, z, qc()).unwrap();
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn binf_matches_direct_sum_in_convergent_regime() {
        // for q > 1 the staircase series converges; the regularized value
        // must agree with brute-force summation (m = 1 and m = 2)
        let q = C64::new(2.0, 0.0);
        let zs1 = vec![C64::from_polar(1.0, 0.8)];
        let zs2 = vec![C64::from_polar(1.0, 0.8), C64::from_polar(1.0, 2.0)];
        let delta = ((q + q.inv()) * 0.5).re;
        for parts in [vec![], vec![1], vec![2, 1], vec![3, 3, 1]] {
            let d = Partition::new(parts);
            for zs in [&zs1, &zs2] {
                let roots = BetheRoots::infinite(zs.clone());
                let m = roots.m();
                let reg = binf_coefficient(&d, &roots, q).unwrap();

                // direct: sum over l_1 < ... < l_m up to a large cutoff
                let lmax = 240i64;
                let mut direct = C64::new(0.0, 0.0);
                let mut stack: Vec<i64> = Vec::new();
                fn rec(
                    stack: &mut Vec<i64>,
                    m: usize,
                    lmax: i64,
                    d: &Partition,
                    roots: &BetheRoots,
                    q: C64,
                    delta: f64,
                    acc: &mut C64,
                ) {
                    if stack.len() == m {
                        let mut x2: Vec<i64> = stack
                            .iter()
                            .map(|&l| 2 * (d.part(l as usize) as i64 - l))
                            .collect();
                        x2.reverse();
                        let lam = magnon_amplitude(&x2, roots, delta);
                        let denom: i64 =
                            stack.iter().map(|&l| d.part(l as usize) as i64 + l).sum();
                        *acc += lam * Scalar::powi(&q, -denom);
                        return;
                    }
                    let start = stack.last().map(|&l| l + 1).unwrap_or(1);
                    for l in start..=lmax {
                        stack.push(l);
                        rec(stack, m, lmax, d, roots, q, delta, acc);
                        stack.pop();
                    }
                }
                rec(&mut stack, m, lmax, &d, &roots, q, delta, &mut direct);
                let pref =
                    Scalar::powi(&q, (m as i64) * (m as i64 + 1) / 2 + d.weight() as i64);
                direct = pref * direct;
                assert!(
                    (reg - direct).norm() < 1e-10 * reg.norm().max(1.0),
                    "m={m} {d}: reg {reg} direct {direct}"
                );
            }
        }
    }

    #[test]
    fn binf_is_truncated_dw_eigenvector() {
        // interior eigen-residual on the corner Hamiltonian, m = 1 and m = 2
        let basis = partition_basis(&Truncation::by_weight(16));
        let h = dw_hamiltonian(&basis, &qc());
        let interior = interior_rows(&basis);
        for zs in [
            vec![C64::from_polar(1.0, 0.8)],
            vec![C64::from_polar(1.0, 0.8), C64::from_polar(1.0, 2.0)],
        ] {
            let roots = BetheRoots::infinite(zs);
            let energy = roots.energy(delta());
            let v = binf_vector(&basis, &roots, qc()).unwrap();
            let hv = h.apply(&v);
            let scale = v.max_mag();
            let mut worst = 0.0f64;
            for (i, flag) in interior.iter().enumerate() {
                if *flag {
                    worst = worst.max((hv.get(i) - energy * v.get(i)).norm());
                }
            }
            assert!(worst / scale < 1e-9, "m={} residual {}", roots.m(), worst / scale);
        }
    }

    #[test]
    fn completeness_by_dimension_count_small_n() {
        // the weight-sector highest-weight counts C(N,m) - C(N,m-1), summed
        // with their multiplicities N - 2m + 1, must exhaust 2^N
        for n in [2u32, 4, 6] {
            let mut total = 0i64;
            for m in 0..=(n / 2) {
                let dim = |k: u32| -> i64 {
                    let mut acc = 1i64;
                    for i in 0..k as i64 {
                        acc = acc * (n as i64 - i) / (i + 1);
                    }
                    acc
                };
                let hw = dim(m) - if m == 0 { 0 } else { dim(m - 1) };
                total += hw * (n as i64 - 2 * m as i64 + 1);
            }
            assert_eq!(total, 1i64 << n);
        }
        // and the dense oracle sees the full space at N = 4
        let n = 4u32;
        let full = crate::chain::spin_full_basis(n, 4096).unwrap();
        let h = invariant_hamiltonian(&full, &qc());
        let (vals, _) = dense_eigensolve(&h, 4096).unwrap();
        assert_eq!(vals.len(), 16);
    }
}
