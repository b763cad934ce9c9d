//! Ground-state observables: magnetization profiles, the limit shape, and
//! particle-displacement probabilities, each paired with a brute-force
//! enumeration oracle at desk scale.
//!
//! Site-labeling convention, fixed by exact calibration against the oracle
//! (p = 1..5, rational arithmetic): the closed-form profile evaluated at
//! integer label `x` equals the lattice magnetization at doubled coordinate
//! `site2 = 1 - 2x`, with global sign +1. Displacement probabilities use the
//! corrected outer q-binomials `(l_1, d_1)` for the rows above the pinned
//! particles and `(l_n, d_n)` below; the printed form transposes them, which
//! the enumeration oracle rejects.

use crate::error::{Error, Result};
use crate::partitions::enumerate_box;
use crate::qseries::{q_binomial, q_pochhammer, q_pochhammer_infinite};
use crate::scalar::{Scalar, C64};

/// Frozen result of the site-labeling calibration.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MagnetizationCalibration {
    /// Global sign applied to the closed form.
    pub sign: i8,
    /// Label map in doubled coordinates: `x = (offset2 - site2) / 2`,
    /// i.e. site reflection plus a half-site offset.
    pub offset2: i64,
    pub reflected: bool,
    /// Largest half-filling checked exactly.
    pub verified_up_to_p: u32,
}

pub fn magnetization_calibration() -> MagnetizationCalibration {
    MagnetizationCalibration { sign: 1, offset2: 1, reflected: true, verified_up_to_p: 5 }
}

/// Closed-form label of a doubled site coordinate: `x = (1 - site2)/2`.
pub fn site2_to_label(site2: i64) -> i64 {
    assert!(site2.rem_euclid(2) == 1, "sites live on doubled odd coordinates");
    (1 - site2) / 2
}

/// Doubled site coordinate of a closed-form label: `site2 = 1 - 2x`.
pub fn label_to_site2(x: i64) -> i64 {
    1 - 2 * x
}

/// Closed-form half-filled magnetization at integer label `x`:
/// `1 - 2 sum_{k=0}^p q^{2k(x+p)} (q^{-2p}; q^2)_k / (q^{2+2p}; q^2)_k`.
///
/// Terms are accumulated multiplicatively so the huge intermediate
/// Pochhammer values never materialize.
pub fn magnetization_closed_form<S: Scalar>(p: u32, q: &S, x: i64) -> Result<S> {
    if q.as_unit_interval_real().is_none() {
        return Err(Error::Domain(format!("q must be real in (0,1), got {q}")));
    }
    let mut sum = S::zero();
    let mut term = S::one(); // k = 0
    for k in 0..=p as i64 {
        if k > 0 {
            // ratio term_k / term_{k-1}
            let num = S::one() - q.powi(2 * (k - 1) - 2 * p as i64);
            let den = S::one() - q.powi(2 * p as i64 + 2 * k);
            term = term * q.powi(2 * (x + p as i64)) * num * den.inv();
        }
        sum = sum + term.clone();
    }
    Ok(S::one() - S::from_int(2) * sum)
}

/// Magnetization of the half-filled ground state at doubled site coordinate
/// `site2`, by direct enumeration of the `p x p` box ensemble with weights
/// `q^{2|delta|}`.
pub fn brute_force_magnetization<S: Scalar>(p: u32, q: &S, site2: i64) -> S {
    let mut num = S::zero();
    let mut den = S::zero();
    for d in enumerate_box(p, None) {
        let w = q.powi(2 * d.weight() as i64);
        den = den + w.clone();
        if d.occupies(site2) {
            num = num - w;
        } else {
            num = num + w;
        }
    }
    num / den
}

/// Verify the frozen calibration for a given exact `q` and range of `p`,
/// returning the largest deviation (0 when everything matches exactly).
pub fn verify_magnetization_calibration<S: Scalar>(q: &S, max_p: u32) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in 1..=max_p {
        for site2 in (1 - 2 * p as i64..2 * p as i64).step_by(2) {
            let x = site2_to_label(site2);
            let closed = magnetization_closed_form(p, q, x)?;
            let brute = brute_force_magnetization(p, q, site2);
            let diff = (closed - brute).mag();
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

/// Partial-theta magnetization of the infinite system at real label `x`:
/// `1 - 2 sum_k (-1)^k q^{k(k-1)} q^{2kx}`, truncated at `kmax` terms.
/// Returns the value and a bound on the dropped tail. Numerically sane for
/// `x >= 1/2`; use [`magnetization_infinite_sym`] for the whole line.
pub fn magnetization_infinite(q: f64, x: f64, kmax: usize) -> Result<(f64, f64)> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(format!("q must be in (0,1), got {q}")));
    }
    let mut sum = 0.0f64;
    let mut last = 0.0f64;
    for k in 0..kmax as i64 {
        let expo = (k * (k - 1)) as f64 + 2.0 * k as f64 * x;
        last = q.powf(expo);
        sum += if k % 2 == 0 { last } else { -last };
    }
    // the series alternates with superexponentially shrinking terms once
    // k exceeds -x; past kmax the first dropped term bounds the tail
    let k = kmax as f64;
    let tail = q.powf(k * (k - 1.0) + 2.0 * k * x);
    let _ = last;
    Ok((1.0 - 2.0 * sum, 2.0 * tail))
}

/// Exact-rational partial sum of the same series at integer label `x`.
pub fn magnetization_infinite_exact(q: &crate::scalar::Rat, x: i64, kmax: usize) -> crate::scalar::Rat {
    use crate::scalar::Rat;
    let mut sum = <Rat as num_traits::Zero>::zero();
    for k in 0..kmax as i64 {
        let term = q.powi(k * (k - 1) + 2 * k * x);
        sum = if k % 2 == 0 { sum + term } else { sum - term };
    }
    <Rat as Scalar>::from_int(1) - <Rat as Scalar>::from_int(2) * sum
}

/// Whole-line infinite profile via the site-reflection identity
/// `m(x) = -m(1 - x)`, which holds exactly at integer labels and pins the
/// numerically unstable half-line to the stable one.
pub fn magnetization_infinite_sym(q: f64, x: f64, kmax: usize) -> Result<f64> {
    if x >= 0.5 {
        Ok(magnetization_infinite(q, x, kmax)?.0)
    } else {
        Ok(-magnetization_infinite(q, 1.0 - x, kmax)?.0)
    }
}

/// Scaling-limit profile and limit shape at scaled coordinate `u`:
/// `m(u) = (1 - e^u)/(1 + e^u)` and `mu(u) = 2 log(2 cosh(u/2))`.
pub fn scaled_profile_and_limit_shape(u: f64) -> (f64, f64) {
    let m = -(u / 2.0).tanh();
    // 2 log(2 cosh(u/2)) computed overflow-free as |u| + 2 log(1 + e^{-|u|})
    let mu = u.abs() + 2.0 * (-u.abs()).exp().ln_1p();
    (m, mu)
}

/// Map a scaled coordinate to the lattice label: `x(u) = u / (-2 log q)`.
pub fn scaled_coordinate_to_label(u: f64, q: f64) -> f64 {
    u / (-2.0 * q.ln())
}

/// Largest deviation of the finite-q symmetric profile from the scaling
/// limit over a grid of scaled coordinates.
pub fn scaled_profile_max_error(q: f64, us: &[f64], kmax: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for &u in us {
        let x = scaled_coordinate_to_label(u, q);
        let got = magnetization_infinite_sym(q, x, kmax)?;
        let (target, _) = scaled_profile_and_limit_shape(u);
        worst = worst.max((got - target).abs());
    }
    Ok(worst)
}

/// Closed form of `sum_{a+1 <= y_m < ... < y_1 <= b} q^{2 sum y}` over
/// integers: `q^{2 binom(m+1,2) + 2am} qbinom(b-a, m)_{q^2}`.
pub fn weighted_chain_sum<S: Scalar>(a: i64, b: i64, m: u32, q: &S) -> Result<S> {
    if b < a {
        return Err(Error::Range(format!("need b >= a, got a={a} b={b}")));
    }
    if m as i64 > b - a {
        return Err(Error::Range(format!("need m <= b - a, got m={m} a={a} b={b}")));
    }
    let q2 = q.clone() * q.clone();
    let m_i = m as i64;
    Ok(q.powi(m_i * (m_i + 1) + 2 * a * m_i) * q_binomial((b - a) as u64, m as i64, &q2))
}

/// Finite-chain probability that the `l`-th particle from the right has
/// moved by `d`:
/// `q^{2ld} qbinom(p+d-l, d) qbinom(p-d+l-1, l-1) / qbinom(2p, p)` in base
/// `q^2`. Out-of-range `(l, d)` gives 0.
pub fn prob_single_finite<S: Scalar>(p: u32, q: &S, l: u32, d: u32) -> Result<S> {
    if q.as_unit_interval_real().is_none() {
        return Err(Error::Domain(format!("q must be real in (0,1), got {q}")));
    }
    if l < 1 || l > p || d > p {
        return Ok(S::zero());
    }
    let q2 = q.clone() * q.clone();
    let l_i = l as i64;
    let d_i = d as i64;
    let p_i = p as i64;
    Ok(q.powi(2 * l_i * d_i)
        * q_binomial((p_i + d_i - l_i).max(0) as u64, d_i, &q2)
        * q_binomial((p_i - d_i + l_i - 1).max(0) as u64, l_i - 1, &q2)
        * q_binomial(2 * p as u64, p as i64, &q2).inv())
}

/// Infinite-volume displacement probability
/// `q^{2ld} (q^2; q^2)_inf / [(q^2; q^2)_{l-1} (q^2; q^2)_d]`.
pub fn prob_single_infinite(q: f64, l: u32, d: u32, trunc_k: usize) -> Result<f64> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(format!("q must be in (0,1), got {q}")));
    }
    if l < 1 {
        return Ok(0.0);
    }
    let q2 = C64::new(q * q, 0.0);
    let inf = q_pochhammer_infinite(q2, q2, trunc_k)?.value.re;
    let den_l = q_pochhammer(&q2, &q2, l as u64 - 1).re;
    let den_d = q_pochhammer(&q2, &q2, d as u64).re;
    Ok(q.powi(2 * (l * d) as i32) * inf / (den_l * den_d))
}

fn check_joint_args(ls: &[u32], ds: &[u32]) -> Result<()> {
    if ls.is_empty() || ls.len() != ds.len() {
        return Err(Error::Domain("need equal-length nonempty l and d lists".into()));
    }
    if ls.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("particle indices must increase strictly".into()));
    }
    if ds.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain("displacements must be weakly decreasing".into()));
    }
    Ok(())
}

fn joint_exponent(ls: &[u32], ds: &[u32]) -> i64 {
    let n = ls.len();
    let mut expo = 2 * ds[0] as i64 * ls[0] as i64;
    for i in 0..n - 1 {
        expo += 2 * ds[i + 1] as i64 * (ls[i + 1] as i64 - ls[i] as i64);
    }
    expo
}

/// Joint probability that particle `l_i` moved by `d_i` for every `i`, on
/// the half-filled chain of length `2p`. Equal consecutive displacements are
/// legal: the middle factor degenerates to `qbinom(gap-1, 0) = 1`.
pub fn prob_joint_finite<S: Scalar>(p: u32, q: &S, ls: &[u32], ds: &[u32]) -> Result<S> {
    if q.as_unit_interval_real().is_none() {
        return Err(Error::Domain(format!("q must be real in (0,1), got {q}")));
    }
    check_joint_args(ls, ds)?;
    let n = ls.len();
    if ls[n - 1] > p || ds[0] > p {
        return Ok(S::zero());
    }
    let q2 = q.clone() * q.clone();
    let p_i = p as i64;
    let (l1, d1) = (ls[0] as i64, ds[0] as i64);
    let (ln, dn) = (ls[n - 1] as i64, ds[n - 1] as i64);
    let mut val = q.powi(joint_exponent(ls, ds))
        * q_binomial((p_i - d1 + l1 - 1).max(0) as u64, l1 - 1, &q2)
        * q_binomial((p_i + dn - ln).max(0) as u64, dn, &q2)
        * q_binomial(2 * p as u64, p as i64, &q2).inv();
    for i in 0..n - 1 {
        let top = ds[i] as i64 - ds[i + 1] as i64 + ls[i + 1] as i64 - ls[i] as i64 - 1;
        val = val * q_binomial(top.max(0) as u64, (ds[i] - ds[i + 1]) as i64, &q2);
    }
    Ok(val)
}

/// Infinite-volume joint displacement probability.
pub fn prob_joint_infinite(q: f64, ls: &[u32], ds: &[u32], trunc_k: usize) -> Result<f64> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(format!("q must be in (0,1), got {q}")));
    }
    check_joint_args(ls, ds)?;
    let n = ls.len();
    let q2 = C64::new(q * q, 0.0);
    let inf = q_pochhammer_infinite(q2, q2, trunc_k)?.value.re;
    let den_l = q_pochhammer(&q2, &q2, ls[0] as u64 - 1).re;
    let den_d = q_pochhammer(&q2, &q2, ds[n - 1] as u64).re;
    let mut val = (q.powi(joint_exponent(ls, ds) as i32)) * inf / (den_l * den_d);
    let q2s = q2.re;
    for i in 0..n - 1 {
        let top = ds[i] as i64 - ds[i + 1] as i64 + ls[i + 1] as i64 - ls[i] as i64 - 1;
        let qb: C64 = q_binomial(top.max(0) as u64, (ds[i] - ds[i + 1]) as i64, &C64::new(q2s, 0.0));
        val *= qb.re;
    }
    Ok(val)
}

/// Enumeration oracle for [`prob_single_finite`].
pub fn prob_single_oracle<S: Scalar>(p: u32, q: &S, l: u32, d: u32) -> S {
    let mut num = S::zero();
    let mut den = S::zero();
    for part in enumerate_box(p, None) {
        let w = q.powi(2 * part.weight() as i64);
        den = den + w.clone();
        if l >= 1 && part.part(l as usize) == d {
            num = num + w;
        }
    }
    num / den
}

/// Enumeration oracle for [`prob_joint_finite`].
pub fn prob_joint_oracle<S: Scalar>(p: u32, q: &S, ls: &[u32], ds: &[u32]) -> Result<S> {
    check_joint_args(ls, ds)?;
    let mut num = S::zero();
    let mut den = S::zero();
    for part in enumerate_box(p, None) {
        let w = q.powi(2 * part.weight() as i64);
        den = den + w.clone();
        if ls.iter().zip(ds).all(|(&l, &d)| part.part(l as usize) == d) {
            num = num + w;
        }
    }
    Ok(num / den)
}

/// Reconstruct the lattice magnetization from displacement probabilities:
/// site `s` is occupied when some particle `l` sits there, i.e. moved by
/// `d = s + l - 1/2`.
pub fn magnetization_from_probabilities<S: Scalar>(p: u32, q: &S, site2: i64) -> Result<S> {
    let mut occupied = S::zero();
    for l in 1..=p {
        let d2 = site2 + 2 * l as i64 - 1;
        if d2 % 2 != 0 {
            continue;
        }
        let d = d2 / 2;
        if d >= 0 && d <= p as i64 {
            occupied = occupied + prob_single_finite(p, q, l, d as u32)?;
        }
    }
    Ok(S::one() - S::from_int(2) * occupied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{One, Rat, Zero};

    fn q_rat() -> Rat {
        Rat::from_ratio(1, 2)
    }

    #[test]
    fn calibrated_closed_form_is_exact_up_to_p5() {
        let worst = verify_magnetization_calibration(&q_rat(), 5).unwrap();
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn closed_form_rejects_bad_q() {
        assert!(magnetization_closed_form(2, &Rat::from_ratio(3, 2), 0).is_err());
    }

    #[test]
    fn closed_form_truncates_at_k_equals_p() {
        // the (q^{-2p}; q^2)_k factor vanishes for k > p, so label far to
        // the right saturates at -1 rather than blowing up
        let m = magnetization_closed_form(3, &q_rat(), 40).unwrap();
        assert!((m + Rat::one()).mag() < 1e-15);
    }

    #[test]
    fn brute_force_profile_is_antisymmetric() {
        for p in 1..=5u32 {
            for site2 in (1..2 * p as i64).step_by(2) {
                let plus = brute_force_magnetization(p, &q_rat(), site2);
                let minus = brute_force_magnetization(p, &q_rat(), -site2);
                assert_eq!(plus, -minus);
            }
        }
    }

    #[test]
    fn profile_becomes_step_at_small_q() {
        let q = Rat::from_ratio(1, 1000);
        for site2 in [-5i64, -1, 1, 5] {
            let m = brute_force_magnetization(3, &q, site2);
            let expect = if site2 > 0 { 1.0 } else { -1.0 };
            assert!((m.mag() - 1.0).abs() < 1e-3);
            assert_eq!(m.to_c64().re.signum(), expect);
        }
    }

    #[test]
    fn infinite_profile_far_right_is_down() {
        let (m, tail) = magnetization_infinite(0.5, 30.0, 40).unwrap();
        assert!((m + 1.0).abs() < 1e-15);
        assert!(tail < 1e-15);
    }

    #[test]
    fn infinite_profile_value_q_half_x1() {
        // 1 - 2(1 - q^2 + q^2 q^4 - ...) at q = 1/2, stable by k = 20
        let (m20, _) = magnetization_infinite(0.5, 1.0, 20).unwrap();
        let (m40, _) = magnetization_infinite(0.5, 1.0, 40).unwrap();
        assert!((m20 - m40).abs() < 1e-15);
        let direct: f64 = 1.0
            - 2.0 * (0..20)
                .map(|k: i32| {
                    let e = (k * (k - 1)) as f64 + 2.0 * k as f64;
                    (if k % 2 == 0 { 1.0 } else { -1.0 }) * 0.5f64.powf(e)
                })
                .sum::<f64>();
        assert!((m20 - direct).abs() < 1e-15);
    }

    #[test]
    fn infinite_profile_agrees_with_large_p_closed_form() {
        // exact rational comparison at p = 30 over labels |x| <= 5
        let q = q_rat();
        for x in -5i64..=5 {
            let finite = magnetization_closed_form(30, &q, x).unwrap();
            let infinite = magnetization_infinite_exact(&q, x, 60);
            let diff = (finite - infinite).mag();
            assert!(diff < 1e-10, "x={x}: {diff}");
        }
    }

    #[test]
    fn reflection_identity_exact_at_integer_labels() {
        let q = q_rat();
        for x in -4i64..=5 {
            let lhs = magnetization_infinite_exact(&q, x, 80);
            let rhs = -magnetization_infinite_exact(&q, 1 - x, 80);
            assert!((lhs - rhs).mag() < 1e-20, "x={x}");
        }
    }

    #[test]
    fn scaled_profile_and_shape_values() {
        let (m0, mu0) = scaled_profile_and_limit_shape(0.0);
        assert_eq!(m0, 0.0);
        assert!((mu0 - 2.0 * 2.0f64.ln()).abs() < 1e-15);

        let (_, mu10) = scaled_profile_and_limit_shape(10.0);
        assert!(mu10 - 10.0 < 1e-4);
        assert!(mu10 > 10.0);

        // mu' = -m by central differences
        let h = 1e-5;
        for u in [-3.0f64, -1.5, 0.0, 0.7, 2.9] {
            let (m, _) = scaled_profile_and_limit_shape(u);
            let (_, up) = scaled_profile_and_limit_shape(u + h);
            let (_, dn) = scaled_profile_and_limit_shape(u - h);
            let deriv = (up - dn) / (2.0 * h);
            assert!((deriv + m).abs() < 1e-8, "u={u}");
        }

        // mu >= |u| and mu even
        for u in [0.3f64, 1.7, 4.2] {
            let (_, mu) = scaled_profile_and_limit_shape(u);
            let (_, mu_neg) = scaled_profile_and_limit_shape(-u);
            assert!(mu >= u.abs());
            assert!((mu - mu_neg).abs() < 1e-15);
        }
    }

    #[test]
    fn scaled_profile_error_decreases_toward_q_one() {
        let us: Vec<f64> = (-50..=50).map(|i| i as f64 / 10.0).collect();
        let e1 = scaled_profile_max_error(0.9, &us, 400).unwrap();
        let e2 = scaled_profile_max_error(0.95, &us, 400).unwrap();
        let e3 = scaled_profile_max_error(0.99, &us, 400).unwrap();
        assert!(e1 > e2 && e2 > e3, "{e1} {e2} {e3}");
        assert!(e3 < 0.05);
    }

    #[test]
    fn weighted_chain_sum_matches_enumeration() {
        let q = Rat::from_ratio(2, 5);
        // direct enumeration over subsets
        fn enumerate(a: i64, b: i64, m: u32, q: &Rat) -> Rat {
            fn rec(lo: i64, hi: i64, m: u32, q: &Rat) -> Rat {
                if m == 0 {
                    return Rat::one();
                }
                let mut acc = <Rat as Zero>::zero();
                // smallest element y_m ranges over lo..=hi-m+1
                for y in lo..=(hi - m as i64 + 1) {
                    acc = acc + q.powi(2 * y) * rec(y + 1, hi, m - 1, q);
                }
                acc
            }
            rec(a + 1, b, m, q)
        }
        for (a, b) in [(0i64, 2i64), (1, 4), (-3, 5), (2, 10)] {
            for m in 0..=(b - a).min(4) as u32 {
                let closed = weighted_chain_sum(a, b, m, &q).unwrap();
                assert_eq!(closed, enumerate(a, b, m, &q), "a={a} b={b} m={m}");
            }
        }
        assert_eq!(weighted_chain_sum(3, 7, 0, &q).unwrap(), Rat::one());
        assert!(weighted_chain_sum(3, 2, 0, &q).is_err());
        assert!(weighted_chain_sum(0, 2, 5, &q).is_err());
    }

    #[test]
    fn prob_single_matches_oracle_exactly() {
        let q = q_rat();
        for p in [2u32, 3, 4, 6] {
            for l in 1..=p {
                let mut total = <Rat as Zero>::zero();
                for d in 0..=p {
                    let closed = prob_single_finite(p, &q, l, d).unwrap();
                    let oracle = prob_single_oracle(p, &q, l, d);
                    assert_eq!(closed, oracle, "p={p} l={l} d={d}");
                    total = total + closed;
                }
                assert_eq!(total, Rat::one(), "normalization p={p} l={l}");
            }
        }
        assert!(prob_single_finite(3, &q_rat(), 0, 1).unwrap().is_zero());
        assert!(prob_single_finite(3, &q_rat(), 4, 1).unwrap().is_zero());
        assert!(prob_single_finite(3, &q_rat(), 1, 4).unwrap().is_zero());
    }

    #[test]
    fn frozen_vacuum_probability_at_small_q() {
        let q = 1e-4;
        let p = prob_single_infinite(q, 2, 0, 200).unwrap();
        assert!((p - 1.0).abs() < 1e-6);
    }

    #[test]
    fn prob_joint_matches_oracle_exactly() {
        let q = q_rat();
        for p in [4u32, 5] {
            for ls in [[1u32, 3], [2, 4], [1, 2]] {
                for d1 in 0..=p {
                    for d2 in 0..=d1 {
                        let closed = prob_joint_finite(p, &q, &ls, &[d1, d2]).unwrap();
                        let oracle = prob_joint_oracle(p, &q, &ls, &[d1, d2]).unwrap();
                        assert_eq!(closed, oracle, "p={p} ls={ls:?} d=({d1},{d2})");
                    }
                }
            }
        }
        // n = 1 joint reduces to the single-particle case
        for l in 1..=4u32 {
            for d in 0..=4u32 {
                assert_eq!(
                    prob_joint_finite(4, &q, &[l], &[d]).unwrap(),
                    prob_single_finite(4, &q, l, d).unwrap()
                );
            }
        }
        assert!(prob_joint_finite(4, &q, &[3, 1], &[1, 1]).is_err());
        assert!(prob_joint_finite(4, &q, &[1, 3], &[1, 2]).is_err());
    }

    #[test]
    fn joint_marginalizes_to_single() {
        let q = q_rat();
        let p = 4u32;
        for (l1, l2) in [(1u32, 3u32), (2, 4)] {
            for d1 in 0..=p {
                let mut sum = <Rat as Zero>::zero();
                for d2 in 0..=d1 {
                    sum = sum + prob_joint_finite(p, &q, &[l1, l2], &[d1, d2]).unwrap();
                }
                assert_eq!(sum, prob_single_finite(p, &q, l1, d1).unwrap());
            }
        }
    }

    #[test]
    fn finite_probabilities_converge_to_infinite() {
        let qf = 0.5f64;
        let q40 = C64::new(0.5, 0.0);
        for (l, d) in [(2u32, 3u32), (1, 1), (3, 2)] {
            let fin = prob_single_finite(40, &q40, l, d).unwrap().re;
            let inf = prob_single_infinite(qf, l, d, 400).unwrap();
            assert!((fin - inf).abs() < 1e-8, "l={l} d={d}: {fin} vs {inf}");
        }
        let fin = prob_joint_finite(40, &q40, &[1, 3], &[2, 1]).unwrap().re;
        let inf = prob_joint_infinite(qf, &[1, 3], &[2, 1], 400).unwrap();
        assert!((fin - inf).abs() < 1e-8);
    }

    #[test]
    fn magnetization_reconstructed_from_probabilities() {
        let q = q_rat();
        for p in 1..=5u32 {
            for site2 in (1 - 2 * p as i64..2 * p as i64).step_by(2) {
                let via_probs = magnetization_from_probabilities(p, &q, site2).unwrap();
                let brute = brute_force_magnetization(p, &q, site2);
                assert_eq!(via_probs, brute, "p={p} site2={site2}");
            }
        }
    }

    #[test]
    fn monotone_convergence_in_p_beyond_threshold() {
        // convergence of the displacement probability toward its limit is
        // monotone once p clears 10 (l + d)
        let q = C64::new(0.5, 0.0);
        let (l, d) = (1u32, 1u32);
        let limit = prob_single_infinite(0.5, l, d, 600).unwrap();
        let mut prev_gap = f64::INFINITY;
        for p in [20u32, 30, 40, 50] {
            let fin = prob_single_finite(p, &q, l, d).unwrap().re;
            let gap = (fin - limit).abs();
            assert!(gap <= prev_gap, "p={p}: {gap} > {prev_gap}");
            prev_gap = gap;
        }
    }
}
