//! Three-dimensional vertex weights: the R weights solving the tetrahedron
//! equation, their stochastic corrections and dynamical S weights, the q → 1
//! weights T, and the enumeration of both sides of the tetrahedron equation.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{qpoch, POLE_TOL};

/// Distance from q = 1 below which S is evaluated through the transformed series.
pub const NEAR_ONE: f64 = 1e-3;

/// Incoming counts (n1, n2, n3) and outgoing counts (n1p, n2p, n3p) along the three axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TetraConfig {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub n1p: u32,
    pub n2p: u32,
    pub n3p: u32,
}

impl TetraConfig {
    pub const fn new(n1: u32, n2: u32, n3: u32, n1p: u32, n2p: u32, n3p: u32) -> Self {
        Self { n1, n2, n3, n1p, n2p, n3p }
    }

    pub fn supported(&self) -> bool {
        self.n1 + self.n2 == self.n1p + self.n2p && self.n2 + self.n3 == self.n2p + self.n3p
    }

    fn ints(&self) -> [i64; 6] {
        [self.n1, self.n2, self.n3, self.n1p, self.n2p, self.n3p].map(i64::from)
    }
}

/// Auxiliary incoming counts of the frozen vertices used to build the correction ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetraFreeze {
    pub k4: u32,
    pub k5: u32,
    pub k6: u32,
}

/// All supported outgoing configurations for incoming (n1, n2, n3).
pub fn outgoing_tetra(n1: u32, n2: u32, n3: u32) -> Vec<TetraConfig> {
    (0..=n2 + n1.min(n3))
        .filter_map(|b| {
            let a = (n1 + n2).checked_sub(b)?;
            let c = (n2 + n3).checked_sub(b)?;
            Some(TetraConfig::new(n1, n2, n3, a, b, c))
        })
        .collect()
}

fn den(d: C64, what: &str) -> Result<C64> {
    if d.norm() < POLE_TOL {
        Err(Error::Pole(format!("{what} vanishes")))
    } else {
        Ok(d)
    }
}

fn qfac2(q: C64, m: i64) -> Result<C64> {
    let q2 = q * q;
    qpoch(q2, q2, m)
}

/// 1/(a;q)_k for k ≥ 0, rejecting any single vanishing factor.
fn inv_qpoch(a: C64, q: C64, k: i64, what: &str) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let mut r = one;
    let mut t = a;
    for _ in 0..k {
        r /= den(one - t, what)?;
        t *= q;
    }
    Ok(r)
}

/// 1/((q²;q²)_{m1} (q²;q²)_{m2} ⋯).
fn inv_qfac2(q: C64, ms: &[i64]) -> Result<C64> {
    let q2 = q * q;
    ms.iter().try_fold(C64::new(1.0, 0.0), |acc, &m| Ok(acc * inv_qpoch(q2, q2, m, "(q²;q²) factorial")?))
}

/// R weight as the explicit terminating k-sum.
pub fn weight_r(cfg: TetraConfig, q: C64) -> Result<C64> {
    if !cfg.supported() {
        return Ok(C64::new(0.0, 0.0));
    }
    let [n1, n2, n3, a, _, c] = cfg.ints();
    let q2 = q * q;
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=n2 {
        let num = qpoch(q2.powi(-a as i32), q2, n2 - k)? * qpoch(q2.powi(n1 as i32 + 1), q2, k)?;
        sum += num * inv_qfac2(q, &[n2 - k, k])? * q.powi((-2 * k * (a + n3 + 1)) as i32);
    }
    Ok(q.powi((n2 * (n2 + 1) - (n2 - a) * (n2 - c)) as i32) * sum)
}

/// R weight with vanishing first outgoing count, in factored form.
pub fn weight_r_frozen(n1: u32, n2: u32, n3: u32, q: C64) -> Result<C64> {
    let (n1, n2, n3) = (i64::from(n1), i64::from(n2), i64::from(n3));
    Ok(q.powi((-n2 * (n1 + n3 + 1)) as i32) * qfac2(q, n1 + n2)? * inv_qfac2(q, &[n1, n2])?)
}

/// Closed-form stochastic correction as a function of the dynamical parameter v.
pub fn correction_tetra(cfg: TetraConfig, q: C64, v: C64) -> Result<C64> {
    let [n1, n2, n3, a, b, c] = cfg.ints();
    let q2 = q * q;
    let facts = qfac2(q, n1)? * qfac2(q, n2)? * qfac2(q, n3)?;
    let inv = inv_qfac2(q, &[a, b, c])? * inv_qpoch(v, q2, n3, "(v;q²)")?;
    let e = n2 * (n1 + n3 + 1) + a * c - 2 * b * (a + 1);
    Ok(facts * inv * qpoch(q2.powi(-a as i32) * v, q2, c)? * v.powi(b as i32) * q.powi(e as i32))
}

/// Correction as the ratio of six frozen R weights attached along the auxiliary lines.
pub fn correction_tetra_ratio(cfg: TetraConfig, q: C64, freeze: TetraFreeze) -> Result<C64> {
    let [n1, n2, n3, a, b, c] = cfg.ints();
    let (k4, k5, k6) = (i64::from(freeze.k4), i64::from(freeze.k5), i64::from(freeze.k6));
    let derived = [
        k4 + n2,
        k5 + n3,
        k6 - n3,
        k4 + n1 + n2,
        k5 - n1 + n3,
        k6 - n2 - n3,
        k4 + a,
        k5 - a,
        k6 - b,
    ];
    if let Some(bad) = derived.iter().find(|&&d| d < 0) {
        return Err(Error::InvalidIndex(format!("auxiliary count {bad} is negative for {cfg:?} and {freeze:?}")));
    }
    let [a4p, a5p, a6p, _, _, _, b4, b5, b6] = derived;
    let r = |x: i64, y: i64, z: i64| weight_r_frozen(x as u32, y as u32, z as u32, q);
    let num = r(a, k4, k5)? * r(b, b4, k6)? * r(c, b5, b6)?;
    let d = r(n3, k5, k6)? * r(n2, k4, a6p)? * r(n1, a4p, a5p)?;
    Ok(num / den(d, "frozen R weight")?)
}

/// Dynamical stochastic weight S(v) = R · correction.
pub fn weight_s_tetra(cfg: TetraConfig, q: C64, v: C64) -> Result<C64> {
    if !cfg.supported() {
        return Ok(C64::new(0.0, 0.0));
    }
    if (C64::new(1.0, 0.0) - q).norm() < NEAR_ONE {
        return weight_s_tetra_near_one(cfg, q, v);
    }
    Ok(weight_r(cfg, q)? * correction_tetra(cfg, q, v)?)
}

/// S evaluated through the transformed series, where the factors that vanish as
/// q → 1 are cancelled exactly before evaluation.
pub fn weight_s_tetra_near_one(cfg: TetraConfig, q: C64, v: C64) -> Result<C64> {
    if !cfg.supported() {
        return Ok(C64::new(0.0, 0.0));
    }
    let [n1, n2, n3, a, b, c] = cfg.ints();
    let q2 = q * q;
    let one = C64::new(1.0, 0.0);

    // Ratio Π_{j<n2}(1 − q^{2(j−a)}) / Π_{j<b}(1 − q^{2(a−n2+1+j)}), with each
    // factor 1 − q^{2m}, m < 0, rewritten as −q^{2m}(1 − q^{−2m}).
    let mut pref = one;
    let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
    let mut zero_num = false;
    let mut zero_den = false;
    for m in (0..n2).map(|j| j - a) {
        if m < 0 {
            pref *= -q2.powi(m as i32);
        }
        zero_num |= m == 0;
        *counts.entry(m.abs()).or_default() += 1;
    }
    for m in (0..b).map(|j| a - n2 + 1 + j) {
        if m < 0 {
            pref /= -q2.powi(m as i32);
        }
        zero_den |= m == 0;
        *counts.entry(m.abs()).or_default() -= 1;
    }
    match counts.get(&0).copied().unwrap_or(0) {
        e if e < 0 => return Err(Error::Pole("vanishing factor left in the denominator".into())),
        e if e > 0 => return Ok(C64::new(0.0, 0.0)),
        _ => {}
    }
    let mut ratio = if zero_num && zero_den { -pref } else { pref };
    for (&m, &e) in &counts {
        if m != 0 && e != 0 {
            ratio *= den(one - q2.powi(m as i32), "1 − q^{2m}")?.powi(e as i32);
        }
    }

    let e = n2 * (n1 + n3 + a + c + 2) - 2 * b * (a + 1);
    let facts = qfac2(q, n1)? * qfac2(q, n3)? * inv_qfac2(q, &[a, b, c])?;
    let lower = q2.powi(-(n2 + n3) as i32);
    let mut s = q.powi(e as i32) * facts * ratio * qpoch(lower, q2, n2)?;
    s *= v.powi(b as i32) * qpoch(q2.powi(-a as i32) * v, q2, c)? * inv_qpoch(v, q2, n3, "(v;q²)")?;

    let mut series = C64::new(0.0, 0.0);
    for m in 0..=b.min(n3) {
        let num = qpoch(q2.powi(-b as i32), q2, m)? * qpoch(q2.powi(-n3 as i32), q2, m)?;
        let inv = inv_qpoch(lower, q2, m, "transformed series denominator")? * inv_qfac2(q, &[m])?;
        series += num * inv * q2.powi(((n1 + 1) * m) as i32);
    }
    Ok(s * series)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Non-dynamical q → 1 weight: each axis-2 arrow continues with probability v.
pub fn weight_t_tetra(cfg: TetraConfig, v: C64) -> C64 {
    if !cfg.supported() || cfg.n2p > cfg.n2 {
        return C64::new(0.0, 0.0);
    }
    let stay = cfg.n2p;
    v.powi(stay as i32) * (1.0 - v).powi((cfg.n2 - stay) as i32) * binomial(cfg.n2, stay)
}

/// Interior counts on which the per-vertex dynamical parameters depend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mediating {
    pub n2pp: u32,
    pub n3p: u32,
    pub n5: u32,
}

/// Dynamical parameters of the four vertices on each side of the equation,
/// listed in the order the vertices are traversed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetraDynamical {
    pub lhs: [C64; 4],
    pub rhs: [C64; 4],
}

pub fn dyn_params_tetra(v: C64, w: C64, q: C64, m: Mediating) -> TetraDynamical {
    let q2 = q * q;
    TetraDynamical {
        lhs: [q2.powi(m.n5 as i32) * w, w, q2.powi(-(m.n2pp as i32)) * v, v],
        rhs: [v, q2.powi(-(m.n3p as i32)) * v, q2.powi(m.n3p as i32) * w, w],
    }
}

/// Which weights enter the tetrahedron equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TetraEquation {
    PlainR { q: C64 },
    DynamicalS { q: C64, v: C64, w: C64 },
    NonDynamicalT { v: C64, w: C64 },
}

/// Accumulated sums of both sides for one outgoing sextuple.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SideSums {
    pub lhs: C64,
    pub rhs: C64,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    /// Largest magnitude of any single product on either side.
    pub max_term: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

fn eval4(eq: &TetraEquation, side: Side, cfgs: [TetraConfig; 4], m: Mediating) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    match *eq {
        TetraEquation::PlainR { q } => {
            for c in cfgs {
                prod *= weight_r(c, q)?;
            }
        }
        TetraEquation::DynamicalS { q, v, w } => {
            let d = dyn_params_tetra(v, w, q, m);
            let dyn_v = if side == Side::Left { d.lhs } else { d.rhs };
            for (c, dv) in cfgs.into_iter().zip(dyn_v) {
                prod *= weight_s_tetra(c, q, dv)?;
            }
        }
        TetraEquation::NonDynamicalT { v, w } => {
            let rates = if side == Side::Left { [w, w, v, v] } else { [v, v, w, w] };
            for (c, r) in cfgs.into_iter().zip(rates) {
                prod *= weight_t_tetra(c, r);
            }
        }
    }
    Ok(prod)
}

/// Both sides of the tetrahedron equation for incoming counts (n1, …, n6),
/// keyed by the outgoing counts (n1″, n2″, n3″, n4′, n5′, n6′). Interior
/// counts are enumerated through conservation at each vertex.
pub fn tetrahedron_sides(eq: &TetraEquation, incoming: [u32; 6]) -> Result<BTreeMap<[u32; 6], SideSums>> {
    let [n1, n2, n3, n4, n5, n6] = incoming;
    let mut out: BTreeMap<[u32; 6], SideSums> = BTreeMap::new();
    for a in outgoing_tetra(n1, n2, n3) {
        let (p1, p2, p3) = (a.n1p, a.n2p, a.n3p);
        for b in outgoing_tetra(p1, n4, n5) {
            let (pp1, p4, p5) = (b.n1p, b.n2p, b.n3p);
            for d in outgoing_tetra(p2, p4, n6) {
                let (pp2, pp4, p6) = (d.n1p, d.n2p, d.n3p);
                for c in outgoing_tetra(p3, p5, p6) {
                    let key = [pp1, pp2, c.n1p, pp4, c.n2p, c.n3p];
                    let m = Mediating { n2pp: pp2, n3p: p3, n5 };
                    let val = eval4(eq, Side::Left, [a, b, c, d], m)?;
                    let e = out.entry(key).or_default();
                    e.lhs += val;
                    e.lhs_terms += 1;
                    e.max_term = e.max_term.max(val.norm());
                }
            }
        }
    }
    for a in outgoing_tetra(n3, n5, n6) {
        let (p3, p5, p6) = (a.n1p, a.n2p, a.n3p);
        for b in outgoing_tetra(n2, n4, p6) {
            let (p2, p4, pp6) = (b.n1p, b.n2p, b.n3p);
            for c in outgoing_tetra(n1, p4, p5) {
                let (p1, pp4, pp5) = (c.n1p, c.n2p, c.n3p);
                for d in outgoing_tetra(p1, p2, p3) {
                    let key = [d.n1p, d.n2p, d.n3p, pp4, pp5, pp6];
                    let m = Mediating { n2pp: d.n2p, n3p: p3, n5 };
                    let val = eval4(eq, Side::Right, [a, b, c, d], m)?;
                    let e = out.entry(key).or_default();
                    e.rhs += val;
                    e.rhs_terms += 1;
                    e.max_term = e.max_term.max(val.norm());
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn all_configs(cap: u32) -> Vec<TetraConfig> {
        let mut v = Vec::new();
        for n1 in 0..=cap {
            for n2 in 0..=cap {
                for n3 in 0..=cap {
                    v.extend(outgoing_tetra(n1, n2, n3));
                }
            }
        }
        v
    }

    #[test]
    fn r_basic_values() {
        assert_eq!(weight_r(TetraConfig::new(0, 0, 0, 0, 0, 0), c(0.6)).unwrap(), c(1.0));
        assert_eq!(weight_r(TetraConfig::new(1, 0, 0, 0, 0, 0), c(0.6)).unwrap(), c(0.0));
        let f = weight_r_frozen(1, 1, 0, c(0.5)).unwrap();
        assert!((f - 5.0).norm() < 1e-13);
        assert_eq!(weight_r_frozen(3, 0, 2, c(0.5)).unwrap(), c(1.0));
    }

    #[test]
    fn r_with_empty_first_output_is_frozen() {
        let q = c(0.6);
        for cfg in all_configs(3).into_iter().filter(|c| c.n1p == 0) {
            let a = weight_r(cfg, q).unwrap();
            let b = weight_r_frozen(cfg.n1, cfg.n2, cfg.n3, q).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{cfg:?}: {a} vs {b}");
        }
    }

    #[test]
    fn correction_closed_form_matches_ratio() {
        let q = C64::new(0.55, 0.1);
        for cfg in all_configs(3) {
            for k5 in 3..=6u32 {
                let v = q.powi(2 * k5 as i32 + 2);
                let closed = correction_tetra(cfg, q, v).unwrap();
                for freeze in [TetraFreeze { k4: 2, k5, k6: 7 }, TetraFreeze { k4: 7, k5, k6: 9 }] {
                    match correction_tetra_ratio(cfg, q, freeze) {
                        Ok(r) => assert!((r - closed).norm() < 1e-10 * closed.norm().max(1.0), "{cfg:?} {freeze:?}"),
                        Err(e) => assert!(matches!(e, Error::InvalidIndex(_))),
                    }
                }
            }
        }
        let small = TetraFreeze { k4: 0, k5: 0, k6: 9 };
        assert!(correction_tetra_ratio(TetraConfig::new(2, 0, 0, 2, 0, 0), q, small).is_err());
    }

    #[test]
    fn s_is_stochastic() {
        let (q, v) = (c(0.5), c(0.3));
        let sum: C64 = outgoing_tetra(1, 2, 1).into_iter().map(|cfg| weight_s_tetra(cfg, q, v).unwrap()).sum();
        assert!((sum - 1.0).norm() < 1e-10);
        assert_eq!(weight_s_tetra(TetraConfig::new(0, 0, 0, 0, 0, 0), q, v).unwrap(), c(1.0));
    }

    #[test]
    fn s_nonnegative_in_positive_regime() {
        let q = c(0.7);
        for cfg in all_configs(3) {
            let v = c(0.9 * 0.7f64.powi(2 * cfg.n1p as i32));
            let s = weight_s_tetra(cfg, q, v).unwrap();
            assert!(s.re >= -1e-14 && s.im.abs() < 1e-14, "{cfg:?}: {s}");
        }
    }

    #[test]
    fn transformed_series_matches_direct_form() {
        let (q, v) = (C64::new(0.6, 0.05), C64::new(0.3, 0.1));
        for cfg in all_configs(3) {
            let a = weight_r(cfg, q).unwrap() * correction_tetra(cfg, q, v).unwrap();
            let b = weight_s_tetra_near_one(cfg, q, v).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0), "{cfg:?}: {a} vs {b}");
        }
    }

    #[test]
    fn near_one_tends_to_t() {
        let (q, v) = (c(1.0 - 1e-5), C64::new(0.3, 0.1));
        for cfg in all_configs(3) {
            let s = weight_s_tetra(cfg, q, v).unwrap();
            let t = weight_t_tetra(cfg, v);
            assert!((s - t).norm() < 1e-3 * t.norm().max(1.0), "{cfg:?}: {s} vs {t}");
        }
    }

    #[test]
    fn t_examples() {
        assert_eq!(weight_t_tetra(TetraConfig::new(1, 0, 2, 1, 0, 2), c(0.4)), c(1.0));
        assert!((weight_t_tetra(TetraConfig::new(0, 2, 0, 1, 1, 1), c(0.5)) - 0.5).norm() < 1e-15);
        assert_eq!(weight_t_tetra(TetraConfig::new(1, 1, 1, 0, 2, 0), c(0.5)), c(0.0));
    }

    #[test]
    fn dynamical_assignment_examples() {
        let (v, w) = (c(0.3), c(0.7));
        let zero = Mediating { n2pp: 0, n3p: 0, n5: 0 };
        let d = dyn_params_tetra(v, w, c(0.5), zero);
        assert_eq!(d.lhs, [w, w, v, v]);
        assert_eq!(d.rhs, [v, v, w, w]);
        let d = dyn_params_tetra(v, w, c(0.5), Mediating { n5: 1, ..zero });
        assert!((d.lhs[0] - 0.25 * w).norm() < 1e-15);
        let d = dyn_params_tetra(v, w, c(1.0), Mediating { n2pp: 2, n3p: 3, n5: 1 });
        assert_eq!(d.lhs, [w, w, v, v]);
        assert_eq!(d.rhs, [v, v, w, w]);
    }

    fn max_residual(eq: TetraEquation, cap: u32) -> f64 {
        let mut worst: f64 = 0.0;
        for code in 0..(cap + 1).pow(6) {
            let mut n = [0u32; 6];
            let mut r = code;
            for slot in n.iter_mut() {
                *slot = r % (cap + 1);
                r /= cap + 1;
            }
            for s in tetrahedron_sides(&eq, n).unwrap().values() {
                worst = worst.max((s.lhs - s.rhs).norm() / s.max_term.max(1.0));
            }
        }
        worst
    }

    #[test]
    fn tetrahedron_equations_hold() {
        assert!(max_residual(TetraEquation::PlainR { q: c(0.6) }, 1) < 1e-12);
        let (v, w) = (C64::new(0.3, 0.2), C64::new(0.7, -0.1));
        assert!(max_residual(TetraEquation::DynamicalS { q: C64::new(0.45, 0.1), v, w }, 1) < 1e-12);
        assert!(max_residual(TetraEquation::NonDynamicalT { v, w }, 2) < 1e-14);
    }

    #[test]
    fn empty_boundary_gives_unit_sides() {
        let eq = TetraEquation::DynamicalS { q: c(0.5), v: c(0.3), w: c(0.6) };
        let sides = tetrahedron_sides(&eq, [0; 6]).unwrap();
        assert_eq!(sides.len(), 1);
        let s = sides[&[0; 6]];
        assert_eq!((s.lhs, s.rhs), (c(1.0), c(1.0)));
    }
}
