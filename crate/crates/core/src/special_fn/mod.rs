//! Complex special functions: the odd theta function, rational, basic and
//! elliptic Pochhammer symbols, and terminating hypergeometric sums.
//!
//! Everything here is double-precision complex. Denominator factors smaller
//! than [`POLE_TOL`] in magnitude are reported as [`Error::Pole`].

pub mod laurent;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance below which a denominator factor counts as zero.
pub const POLE_TOL: f64 = 1e-14;

/// Theta series terms per side before giving up.
const THETA_MAX_TERMS: i64 = 200;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Modular parameter `tau` and crossing parameter `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticContext {
    pub tau: C64,
    pub eta: C64,
}

impl EllipticContext {
    pub fn new(tau: C64, eta: C64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Precondition(format!("Im(tau) must be positive, got tau = {tau}")));
        }
        if eta.norm() == 0.0 {
            return Err(Error::Precondition("eta must be nonzero".into()));
        }
        Ok(Self { tau, eta })
    }

    pub fn theta(&self, z: C64) -> Result<C64> {
        theta1(z, self)
    }
}

fn theta_series(z: C64, tau: C64, derivative: bool) -> Result<C64> {
    if !(tau.im > 0.0) {
        return Err(Error::Precondition(format!("Im(tau) must be positive, got tau = {tau}")));
    }
    let term = |h: f64| -> Result<C64> {
        let e = I * PI * (tau * h * h + 2.0 * h * (z + 0.5));
        if e.re > 700.0 {
            return Err(Error::NonConvergent(format!("theta term overflows at z = {z}, tau = {tau}")));
        }
        let t = e.exp();
        Ok(if derivative { t * (2.0 * PI * I * h) } else { t })
    };
    // start at the index where the Gaussian envelope peaks
    let center = (-z.im / tau.im - 0.5).round() as i64;
    let mut sum = term(center as f64 + 0.5)?;
    let mut biggest = sum.norm();
    for side in [1i64, -1] {
        let mut k = 1;
        loop {
            if k > THETA_MAX_TERMS {
                return Err(Error::NonConvergent(format!(
                    "theta series not converged after {THETA_MAX_TERMS} terms (tau = {tau})"
                )));
            }
            let t = term((center + side * k) as f64 + 0.5)?;
            sum += t;
            let m = t.norm();
            biggest = biggest.max(m);
            if m <= 1e-16 * biggest {
                break;
            }
            k += 1;
        }
    }
    Ok(-sum)
}

/// f(z) = −Σ_j exp(πiτ(j+½)² + 2πi(j+½)(z+½)).
pub fn theta1(z: C64, ctx: &EllipticContext) -> Result<C64> {
    theta_series(z, ctx.tau, false)
}

/// Derivative of [`theta1`] in `z`.
pub fn theta1_prime(z: C64, ctx: &EllipticContext) -> Result<C64> {
    theta_series(z, ctx.tau, true)
}

/// Logarithm of `2 sin(πz)`, accurate for large `|Im z|` where the sine itself overflows.
pub fn ln_two_sin_pi(z: C64) -> C64 {
    if z.im >= 0.0 {
        C64::new(0.0, PI / 2.0) - I * PI * z + (C64::new(1.0, 0.0) - (2.0 * PI * I * z).exp()).ln()
    } else {
        C64::new(0.0, -PI / 2.0) + I * PI * z + (C64::new(1.0, 0.0) - (-2.0 * PI * I * z).exp()).ln()
    }
}

fn check_den(d: C64, what: &str) -> Result<C64> {
    if d.norm() < POLE_TOL {
        Err(Error::Pole(format!("{what}: factor {d} vanishes")))
    } else {
        Ok(d)
    }
}

/// Rising factorial (a)_k; negative k gives Π_{j=1..|k|} 1/(a−j).
pub fn rising(a: C64, k: i64) -> Result<C64> {
    let mut r = C64::new(1.0, 0.0);
    if k >= 0 {
        for j in 0..k {
            r *= a + j as f64;
        }
    } else {
        for j in 1..=-k {
            r /= check_den(a - j as f64, "rising factorial")?;
        }
    }
    Ok(r)
}

/// q-Pochhammer (a;q)_k; negative k gives Π_{j=1..|k|} 1/(1−a q^{−j}).
pub fn qpoch(a: C64, q: C64, k: i64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let mut r = one;
    if k >= 0 {
        let mut t = a;
        for _ in 0..k {
            r *= one - t;
            t *= q;
        }
    } else {
        let qi = one / check_den(q, "q-Pochhammer base")?;
        let mut t = a * qi;
        for _ in 0..-k {
            r /= check_den(one - t, "q-Pochhammer")?;
            t *= qi;
        }
    }
    Ok(r)
}

/// 1/(q;q)_m, taken to be 0 for negative m.
pub fn inv_qfactorial(q: C64, m: i64) -> Result<C64> {
    if m < 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(C64::new(1.0, 0.0) / check_den(qpoch(q, q, m)?, "(q;q)_m")?)
}

/// (a;q)_∞ for |q| < 1.
pub fn qpoch_inf(a: C64, q: C64) -> Result<C64> {
    if q.norm() >= 1.0 {
        return Err(Error::Precondition(format!("infinite q-Pochhammer needs |q| < 1, got {q}")));
    }
    let one = C64::new(1.0, 0.0);
    let mut r = one;
    let mut t = a;
    for _ in 0..100_000 {
        r *= one - t;
        t *= q;
        if t.norm() < 1e-18 {
            return Ok(r);
        }
    }
    Err(Error::NonConvergent(format!("(a;q)_inf with a = {a}, q = {q}")))
}

/// Elliptic Pochhammer [a]_k = Π_{j<k} f(a − 2ηj); negative k gives Π_{j=1..|k|} 1/f(a + 2ηj).
pub fn epoch(a: C64, k: i64, ctx: &EllipticContext) -> Result<C64> {
    let mut r = C64::new(1.0, 0.0);
    if k >= 0 {
        for j in 0..k {
            r *= theta1(a - 2.0 * ctx.eta * j as f64, ctx)?;
        }
    } else {
        for j in 1..=-k {
            r /= check_den(theta1(a + 2.0 * ctx.eta * j as f64, ctx)?, "elliptic Pochhammer")?;
        }
    }
    Ok(r)
}

/// Which Pochhammer symbol to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PochKind {
    Rational,
    Basic { q: C64 },
    Elliptic { ctx: EllipticContext },
}

pub fn pochhammer(kind: PochKind, a: C64, k: i64) -> Result<C64> {
    match kind {
        PochKind::Rational => rising(a, k),
        PochKind::Basic { q } => qpoch(a, q, k),
        PochKind::Elliptic { ctx } => epoch(a, k, &ctx),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesKind {
    Rational,
    Basic { q: C64 },
    Elliptic { ctx: EllipticContext },
    /// Very well-poised elliptic series: `upper[0]` is a1, the rest are a6.. ; `lower` is unused.
    VwpElliptic { ctx: EllipticContext },
}

/// A terminating hypergeometric sum together with the index where it stops.
#[derive(Debug, Clone, PartialEq)]
pub struct HypergeometricSpec {
    pub kind: SeriesKind,
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub argument: C64,
    pub termination_index: usize,
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * b.norm().max(1.0)
}

fn has_witness(params: &[C64], target: C64) -> bool {
    params.iter().any(|&a| close(a, target))
}

pub fn hypergeometric(spec: &HypergeometricSpec) -> Result<C64> {
    let n = spec.termination_index as i64;
    let z = spec.argument;
    let (poch, denom_extra): (PochKind, C64) = match spec.kind {
        SeriesKind::VwpElliptic { ctx } => {
            let (a1, tail) = spec
                .upper
                .split_first()
                .ok_or_else(|| Error::Precondition("very well-poised series needs a1".into()))?;
            return vwp_elliptic(*a1, tail, z, &ctx, spec.termination_index);
        }
        SeriesKind::Rational => {
            if !has_witness(&spec.upper, C64::new(-(n as f64), 0.0)) {
                return Err(Error::NoTermination(format!("no upper parameter equals -{n}")));
            }
            (PochKind::Rational, C64::new(1.0, 0.0))
        }
        SeriesKind::Basic { q } => {
            if !has_witness(&spec.upper, q.powi(-(n as i32))) {
                return Err(Error::NoTermination(format!("no upper parameter equals q^-{n}")));
            }
            (PochKind::Basic { q }, q)
        }
        SeriesKind::Elliptic { ctx } => {
            if !has_witness(&spec.upper, 2.0 * ctx.eta * n as f64) {
                return Err(Error::NoTermination(format!("no upper parameter equals 2*eta*{n}")));
            }
            (PochKind::Elliptic { ctx }, -2.0 * ctx.eta)
        }
    };
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=n {
        let mut num = z.powi(k as i32);
        for &a in &spec.upper {
            num *= pochhammer(poch, a, k)?;
        }
        let mut den = match poch {
            PochKind::Rational => rising(denom_extra, k)?,
            _ => pochhammer(poch, denom_extra, k)?,
        };
        for &b in &spec.lower {
            den *= pochhammer(poch, b, k)?;
        }
        sum += num / check_den(den, "lower parameters")?;
    }
    Ok(sum)
}

/// Very well-poised elliptic sum
/// Σ_{k=0}^{n} z^k [a1]_k/[−2η]_k · f(a1−4ηk)/f(a1) · Π_j [a_j]_k/[a1−a_j−2η]_k.
pub fn vwp_elliptic(a1: C64, tail: &[C64], arg: C64, ctx: &EllipticContext, termination_index: usize) -> Result<C64> {
    let n = termination_index as i64;
    let e = ctx.eta;
    if !has_witness(tail, 2.0 * e * n as f64) {
        return Err(Error::NoTermination(format!("no tail parameter equals 2*eta*{n}")));
    }
    let fa1 = check_den(theta1(a1, ctx)?, "f(a1)")?;
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=n {
        let mut num = arg.powi(k as i32) * epoch(a1, k, ctx)? * theta1(a1 - 4.0 * e * k as f64, ctx)?;
        let mut den = epoch(-2.0 * e, k, ctx)? * fa1;
        for &a in tail {
            num *= epoch(a, k, ctx)?;
            den *= epoch(a1 - a - 2.0 * e, k, ctx)?;
        }
        sum += num / check_den(den, "very well-poised denominators")?;
    }
    Ok(sum)
}

/// Balancing condition (r−5)(a1−2η)/2 = Σ tail − 2η for a tail of r−4 parameters.
pub fn is_balanced(a1: C64, tail: &[C64], r: usize, ctx: &EllipticContext) -> bool {
    if r < 5 || tail.len() != r - 4 {
        return false;
    }
    let lhs = (r as f64 - 5.0) * (a1 - 2.0 * ctx.eta) / 2.0;
    let rhs = tail.iter().sum::<C64>() - 2.0 * ctx.eta;
    (lhs - rhs).norm() <= 1e-10
}

/// (c−b)_k/(c)_k, the closed form of ₂F₁(−k, b; c | 1).
pub fn vandermonde_rhs(k: usize, b: C64, c: C64) -> Result<C64> {
    let den = check_den(rising(c, k as i64)?, "(c)_k")?;
    Ok(rising(c - b, k as i64)? / den)
}

/// ₂φ₁(q^{−k}, b; c | q, z) rewritten through the q-Heine transformation, which
/// trades it for an infinite series in powers of b.
pub fn q_heine_rhs(k: usize, b: C64, c: C64, z: C64, q: C64) -> Result<C64> {
    if b.norm() >= 1.0 || q.norm() >= 1.0 {
        return Err(Error::Precondition("transformed series needs |b| < 1 and |q| < 1".into()));
    }
    let k = k as i64;
    let shifted = q.powi(-(k as i32)) * z;
    let pre = qpoch_inf(b, q)? / check_den(qpoch_inf(c, q)?, "(c;q)_inf")? * qpoch(shifted, q, k)?;
    let cb = c / check_den(b, "b")?;
    let mut sum = C64::new(0.0, 0.0);
    let mut biggest: f64 = 0.0;
    for m in 0..100_000i64 {
        let den = qpoch(shifted, q, m)? * qpoch(q, q, m)?;
        let t = b.powi(m as i32) * qpoch(cb, q, m)? * qpoch(z, q, m)? / check_den(den, "q-Heine denominators")?;
        sum += t;
        biggest = biggest.max(t.norm());
        if m > 0 && t.norm() < 1e-18 * biggest.max(1.0) {
            return Ok(pre * sum);
        }
    }
    Err(Error::NonConvergent("q-Heine series".into()))
}

/// The free parameter that balances the terminating ₁₀v₉ sum with parameters (a; b, c, d, e, 2nη).
pub fn jackson_balancing_e(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> C64 {
    let e2 = 2.0 * ctx.eta;
    2.0 * (a - e2) - b - c - d - e2 * n as f64 + e2
}

/// Product side of the terminating elliptic Jackson summation.
pub fn jackson_rhs(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> Result<C64> {
    let n = n as i64;
    let e2 = 2.0 * ctx.eta;
    let p = |x: C64| epoch(x, n, ctx);
    let num = p(a - e2)? * p(a - b - c - e2)? * p(a - b - d - e2)? * p(a - c - d - e2)?;
    let den = p(a - b - e2)? * p(a - c - e2)? * p(a - d - e2)? * p(a - b - c - d - e2)?;
    Ok(num / check_den(den, "Jackson denominators")?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> EllipticContext {
        EllipticContext::new(C64::new(0.2, 1.1), C64::new(0.0913, 0.0)).unwrap()
    }

    #[test]
    fn theta_vanishes_at_origin() {
        let c = EllipticContext::new(C64::new(0.0, 1.0), C64::new(0.1, 0.0)).unwrap();
        assert!(theta1(C64::new(0.0, 0.0), &c).unwrap().norm() < 1e-15);
    }

    #[test]
    fn theta_antiperiodic_under_unit_shift() {
        let c = ctx();
        let z = C64::new(0.3, 0.1);
        let a = theta1(z + 1.0, &c).unwrap();
        let b = theta1(z, &c).unwrap();
        assert!((a + b).norm() < 1e-13);
    }

    #[test]
    fn theta_matches_sine_at_large_tau() {
        let tau = C64::new(0.0, 20.0);
        let c = EllipticContext::new(tau, C64::new(0.1, 0.0)).unwrap();
        let lhs = (-I * PI * tau / 4.0).exp() * theta1(C64::new(0.3, 0.0), &c).unwrap();
        assert!((lhs - 2.0 * (0.3 * PI).sin()).norm() < 1e-12);
    }

    #[test]
    fn theta_derivative_matches_difference_quotient() {
        let c = ctx();
        let z = C64::new(0.17, -0.2);
        let h = 1e-6;
        let fd = (theta1(z + h, &c).unwrap() - theta1(z - h, &c).unwrap()) / (2.0 * h);
        let d = theta1_prime(z, &c).unwrap();
        assert!((fd - d).norm() < 1e-7 * d.norm());
    }

    #[test]
    fn theta_rejects_real_tau() {
        assert!(EllipticContext::new(C64::new(1.0, 0.0), C64::new(0.1, 0.0)).is_err());
        let bad = EllipticContext { tau: C64::new(0.5, 0.0), eta: C64::new(0.1, 0.0) };
        assert!(theta1(C64::new(0.1, 0.0), &bad).is_err());
    }

    #[test]
    fn log_sine_agrees_with_sine() {
        for z in [C64::new(0.3, 0.7), C64::new(-0.2, -1.4), C64::new(0.41, 0.0)] {
            let direct = 2.0 * (PI * z).sin();
            assert!((ln_two_sin_pi(z).exp() - direct).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn pochhammer_small_cases() {
        let q = C64::new(0.5, 0.0);
        let a = C64::new(0.3, 0.0);
        assert_eq!(qpoch(a, q, 0).unwrap(), C64::new(1.0, 0.0));
        assert!((qpoch(a, q, 2).unwrap() - 0.595).norm() < 1e-15);
        assert!((rising(C64::new(2.0, 0.0), 3).unwrap() - 24.0).norm() < 1e-15);
        assert!((rising(C64::new(2.5, 0.0), -2).unwrap() - 1.0 / (1.5 * 0.5)).norm() < 1e-14);
        assert!(rising(C64::new(2.0, 0.0), -2).unwrap_err().is_pole());
        assert_eq!(inv_qfactorial(q, -1).unwrap(), C64::new(0.0, 0.0));
        assert!(qpoch(q, q, -1).unwrap_err().is_pole());
    }

    #[test]
    fn q_pochhammer_tends_to_rising_factorial() {
        let q = C64::new(1.0 - 1e-6, 0.0);
        let a = 1.7;
        let lhs = qpoch(q.powf(a), q, 3).unwrap() / (C64::new(1.0, 0.0) - q).powi(3);
        let rhs = rising(C64::new(a, 0.0), 3).unwrap();
        assert!((lhs - rhs).norm() < 1e-4 * rhs.norm());
    }

    #[test]
    fn series_without_witness_is_rejected() {
        let spec = HypergeometricSpec {
            kind: SeriesKind::Rational,
            upper: vec![C64::new(-1.5, 0.0)],
            lower: vec![C64::new(1.3, 0.0)],
            argument: C64::new(1.0, 0.0),
            termination_index: 2,
        };
        assert!(matches!(hypergeometric(&spec), Err(Error::NoTermination(_))));
    }

    #[test]
    fn vandermonde_chu_example() {
        let (b, c) = (C64::new(0.4, 0.0), C64::new(1.3, 0.0));
        let spec = HypergeometricSpec {
            kind: SeriesKind::Rational,
            upper: vec![C64::new(-2.0, 0.0), b],
            lower: vec![c],
            argument: C64::new(1.0, 0.0),
            termination_index: 2,
        };
        let lhs = hypergeometric(&spec).unwrap();
        assert!((lhs - vandermonde_rhs(2, b, c).unwrap()).norm() < 1e-14);
        assert!((lhs - 0.5719063545150501).norm() < 1e-12);
    }

    #[test]
    fn q_heine_example() {
        let (q, b, c, z) = (C64::new(0.4, 0.0), C64::new(0.2, 0.0), C64::new(0.7, 0.0), C64::new(0.3, 0.0));
        let spec = HypergeometricSpec {
            kind: SeriesKind::Basic { q },
            upper: vec![q.powi(-3), b],
            lower: vec![c],
            argument: z,
            termination_index: 3,
        };
        let lhs = hypergeometric(&spec).unwrap();
        let rhs = q_heine_rhs(3, b, c, z, q).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        spec_k0_is_one(q, b, c, z);
    }

    fn spec_k0_is_one(q: C64, b: C64, c: C64, z: C64) {
        let spec = HypergeometricSpec {
            kind: SeriesKind::Basic { q },
            upper: vec![C64::new(1.0, 0.0), b],
            lower: vec![c],
            argument: z,
            termination_index: 0,
        };
        assert_eq!(hypergeometric(&spec).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn elliptic_jackson_example() {
        let c = EllipticContext::new(C64::new(0.0, 1.3), C64::new(0.11, 0.0)).unwrap();
        let (a, b, cc, d) = (C64::new(0.9, 0.0), C64::new(0.21, 0.0), C64::new(0.17, 0.0), C64::new(0.13, 0.0));
        let n = 2;
        let e = jackson_balancing_e(a, b, cc, d, n, &c);
        let tail = [b, cc, d, e, 2.0 * c.eta * n as f64];
        assert!(is_balanced(a, &tail, 9, &c));
        let lhs = vwp_elliptic(a, &tail, C64::new(1.0, 0.0), &c, n).unwrap();
        let rhs = jackson_rhs(a, b, cc, d, n, &c).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn balanced_detection() {
        let c = ctx();
        let a1 = C64::new(0.7, 0.1);
        let mut tail = vec![C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(0.05, 0.0), C64::new(0.0, 0.0)];
        let want = 4.0 * (a1 - 2.0 * c.eta) / 2.0 + 2.0 * c.eta - tail.iter().sum::<C64>();
        tail.push(want);
        assert!(is_balanced(a1, &tail, 9, &c));
        tail[0] += 0.1;
        assert!(!is_balanced(a1, &tail, 9, &c));
    }

    #[test]
    fn vwp_trivial_termination() {
        let c = ctx();
        let v = vwp_elliptic(C64::new(0.4, 0.0), &[C64::new(0.0, 0.0), C64::new(0.3, 0.0)], C64::new(1.0, 0.0), &c, 0);
        assert_eq!(v.unwrap(), C64::new(1.0, 0.0));
    }
}
