//! Dense complex kernels: cyclic Jacobi diagonalization for hermitian
//! matrices, diagonal symmetrization for detailed-balance-class operators,
//! and a scaling-and-squaring Padé matrix exponential.
//!
//! These serve as the independent numerical oracle for every spectral claim
//! in the crate, so they deliberately avoid sharing code with the sparse
//! operator machinery.

use crate::error::{Error, Result};
use crate::scalar::C64;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct DMat {
    n: usize,
    a: Vec<C64>,
}

impl DMat {
    pub fn zeros(n: usize) -> Self {
        DMat { n, a: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DMat::zeros(n);
        for i in 0..n {
            *m.at_mut(i, i) = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = DMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.a[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.at(i, j)).collect()
    }

    pub fn matmul(&self, other: &DMat) -> DMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.at(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    *out.at_mut(i, j) += aik * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.n {
                acc += self.at(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &DMat) -> DMat {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(&other.a) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &DMat) -> DMat {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(&other.a) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, s: C64) -> DMat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn conj_transpose(&self) -> DMat {
        DMat::from_fn(self.n, |i, j| self.at(j, i).conj())
    }

    pub fn max_mag(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn one_norm(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        worst
    }
}

impl std::fmt::Debug for DMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DMat(n={})", self.n)?;
        if self.n <= 8 {
            for i in 0..self.n {
                for j in 0..self.n {
                    write!(f, " {:+.4}{:+.4}i", self.at(i, j).re, self.at(i, j).im)?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with the matching eigenvectors as
/// the columns of the second result. Fails with `NotSymmetrizable` when the
/// input is not hermitian, and `ConvergenceFailure` if the off-diagonal mass
/// does not vanish within the sweep budget.
pub fn eigh(m: &DMat) -> Result<(Vec<f64>, DMat)> {
    let n = m.dim();
    if n == 0 {
        return Ok((Vec::new(), DMat::zeros(0)));
    }
    let scale = m.max_mag().max(1e-300);
    if m.hermiticity_defect() > 1e-12 * scale {
        return Err(Error::NotSymmetrizable);
    }
    let mut a = m.clone();
    let mut v = DMat::identity(n);

    let off = |a: &DMat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.at(i, j).norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let fro = a.frobenius().max(1e-300);
    let target = 1e-15 * fro;
    let max_sweeps = 60;
    let mut converged = false;
    for _ in 0..max_sweeps {
        if off(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let phase = apq / b;
                let alpha = a.at(p, p).re;
                let gamma = a.at(q, q).re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let se_m = phase.conj() * s; // s e^{-i phi}
                let se_p = phase * s; // s e^{+i phi}

                // columns: B = A J
                for i in 0..n {
                    let aip = a.at(i, p);
                    let aiq = a.at(i, q);
                    *a.at_mut(i, p) = aip * c - aiq * se_m;
                    *a.at_mut(i, q) = aip * se_p + aiq * c;
                }
                // rows: A' = J^dagger B
                for j in 0..n {
                    let apj = a.at(p, j);
                    let aqj = a.at(q, j);
                    *a.at_mut(p, j) = apj * c - aqj * se_p;
                    *a.at_mut(q, j) = apj * se_m + aqj * c;
                }
                // clean the rotated pivot
                *a.at_mut(p, q) = C64::new(0.0, 0.0);
                *a.at_mut(q, p) = C64::new(0.0, 0.0);

                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    *v.at_mut(i, p) = vip * c - viq * se_m;
                    *v.at_mut(i, q) = vip * se_p + viq * c;
                }
            }
        }
    }
    if !converged && off(&a) > 1e-10 * fro {
        return Err(Error::ConvergenceFailure(max_sweeps));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut sorted_vecs = DMat::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            *sorted_vecs.at_mut(i, new_col) = v.at(i, old_col);
        }
    }
    Ok((sorted_vals, sorted_vecs))
}

/// Eigendecomposition of a real-spectrum matrix that is hermitian up to a
/// positive diagonal similarity (the detailed-balance class).
///
/// Finds `d > 0` with `D A D^-1` hermitian by propagating the entry ratios
/// over the sparsity graph, then diagonalizes the symmetrized matrix.
/// Eigenvectors are returned for `A` itself (columns, unit norm).
pub fn eig_diag_similar(m: &DMat) -> Result<(Vec<f64>, DMat)> {
    let n = m.dim();
    let scale = m.max_mag().max(1e-300);
    if m.hermiticity_defect() <= 1e-12 * scale {
        return eigh(m);
    }

    // breadth-first scaling: d_j^2 / d_i^2 = a_ij / conj(a_ji)
    let mut d = vec![0.0f64; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        d[root] = 1.0;
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if seen[j] {
                    continue;
                }
                let aij = m.at(i, j);
                let aji = m.at(j, i);
                if aij.norm() <= 1e-14 * scale || aji.norm() <= 1e-14 * scale {
                    continue;
                }
                let ratio = aij / aji.conj();
                if ratio.im.abs() > 1e-10 * ratio.norm() || ratio.re <= 0.0 {
                    return Err(Error::NotSymmetrizable);
                }
                // m_ij = d_i a_ij / d_j must equal conj(m_ji)
                d[j] = d[i] * ratio.re.sqrt();
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }

    let sym = DMat::from_fn(n, |i, j| m.at(i, j) * (d[i] / d[j]));
    if sym.hermiticity_defect() > 1e-9 * sym.max_mag().max(1e-300) {
        return Err(Error::NotSymmetrizable);
    }
    let (vals, w) = eigh(&sym)?;
    // A = D^-1 (sym) D, so eigenvectors transform as v = D^-1 w
    let mut vecs = DMat::zeros(n);
    for col in 0..n {
        let mut norm2 = 0.0;
        for i in 0..n {
            let x = w.at(i, col) / d[i];
            *vecs.at_mut(i, col) = x;
            norm2 += x.norm_sqr();
        }
        let inv = 1.0 / norm2.sqrt();
        for i in 0..n {
            *vecs.at_mut(i, col) *= inv;
        }
    }
    Ok((vals, vecs))
}

/// Matrix exponential by scaling-and-squaring with a Padé(13) approximant.
pub fn expm(m: &DMat) -> DMat {
    let n = m.dim();
    if n == 0 {
        return DMat::zeros(0);
    }
    let theta13 = 5.371_920_351_148_152e0;
    let norm = m.one_norm();
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = m.scale(C64::new(1.0 / 2f64.powi(s as i32), 0.0));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);
    let id = DMat::identity(n);

    let w1 = a6
        .scale(C64::new(B[13], 0.0))
        .add(&a4.scale(C64::new(B[11], 0.0)))
        .add(&a2.scale(C64::new(B[9], 0.0)));
    let w2 = a6
        .scale(C64::new(B[7], 0.0))
        .add(&a4.scale(C64::new(B[5], 0.0)))
        .add(&a2.scale(C64::new(B[3], 0.0)))
        .add(&id.scale(C64::new(B[1], 0.0)));
    let u = a.matmul(&a6.matmul(&w1).add(&w2));

    let z1 = a6
        .scale(C64::new(B[12], 0.0))
        .add(&a4.scale(C64::new(B[10], 0.0)))
        .add(&a2.scale(C64::new(B[8], 0.0)));
    let v = a6
        .matmul(&z1)
        .add(&a6.scale(C64::new(B[6], 0.0)))
        .add(&a4.scale(C64::new(B[4], 0.0)))
        .add(&a2.scale(C64::new(B[2], 0.0)))
        .add(&id.scale(C64::new(B[0], 0.0)));

    // (V - U) X = (V + U)
    let lhs = v.sub(&u);
    let rhs = v.add(&u);
    let mut x = lu_solve(lhs, rhs);
    for _ in 0..s {
        x = x.matmul(&x);
    }
    x
}

/// Solve `A X = B` by LU decomposition with partial pivoting.
pub fn lu_solve(a: DMat, b: DMat) -> DMat {
    let n = a.dim();
    assert_eq!(b.dim(), n);
    let mut lu = a;
    let mut x = b;
    let mut piv: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut best = k;
        let mut best_mag = lu.at(k, k).norm();
        for i in (k + 1)..n {
            let mag = lu.at(i, k).norm();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        assert!(best_mag > 0.0, "singular matrix in lu_solve");
        if best != k {
            for j in 0..n {
                let tmp = lu.at(k, j);
                *lu.at_mut(k, j) = lu.at(best, j);
                *lu.at_mut(best, j) = tmp;
            }
            piv.swap(k, best);
        }
        let pivot = lu.at(k, k);
        for i in (k + 1)..n {
            let factor = lu.at(i, k) / pivot;
            *lu.at_mut(i, k) = factor;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                let v = lu.at(k, j);
                *lu.at_mut(i, j) -= factor * v;
            }
        }
    }

    // apply row permutation to X
    let orig = x.clone();
    for (row, &src) in piv.iter().enumerate() {
        for j in 0..n {
            *x.at_mut(row, j) = orig.at(src, j);
        }
    }
    // forward substitution (unit lower)
    for k in 0..n {
        for i in (k + 1)..n {
            let factor = lu.at(i, k);
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = x.at(k, j);
                *x.at_mut(i, j) -= factor * v;
            }
        }
    }
    // back substitution
    for k in (0..n).rev() {
        let pivot = lu.at(k, k);
        for j in 0..n {
            *x.at_mut(k, j) /= pivot;
        }
        for i in 0..k {
            let factor = lu.at(i, k);
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = x.at(k, j);
                *x.at_mut(i, j) -= factor * v;
            }
        }
    }
    x
}
