//! Elliptic fused weights W_{J;Λ}, their stochastic corrections C_{J;Λ}, the
//! stochastic weights S_{J;Λ} = W·C, and factored special cases.
//!
//! At integer spins several theta factors vanish in pairs. All evaluators here
//! shift the vertical counts and the horizontal spin by a common ε and take the
//! ε → 0 limit (see [`crate::special_fn::laurent`]), so removable zeros cancel
//! and only genuine poles are reported.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sixvertex::ArrowConfig;
use crate::special_fn::laurent::{epoch_lead, sum_leading, theta_lead, Lead, Lin};
use crate::special_fn::{epoch, ln_two_sin_pi, theta1, EllipticContext, POLE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticVertexParams {
    /// Horizontal spin J.
    pub spin_j: u32,
    /// Vertical spin Λ.
    pub spin_lambda: C64,
    pub lambda: C64,
    pub v: C64,
    pub x: C64,
    pub y: C64,
    /// Spin T of the auxiliary curve (ratio form only).
    pub spin_t: C64,
    /// Occupancy r of the auxiliary curve (ratio form only).
    pub r: u32,
}

impl EllipticVertexParams {
    pub fn new(spin_j: u32, spin_lambda: C64, lambda: C64, v: C64, x: C64, y: C64) -> Self {
        Self { spin_j, spin_lambda, lambda, v, x, y, spin_t: C64::new(1.0, 0.0), r: 0 }
    }

    /// η(J + T − 2r), the value of v produced by the auxiliary curve.
    pub fn curve_v(&self, ctx: &EllipticContext) -> C64 {
        ctx.eta * (self.spin_j as f64 + self.spin_t - 2.0 * self.r as f64)
    }
}

/// Parameters of the very well-poised sum inside the fused weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VWPParameterSet {
    pub a1: C64,
    pub a6: C64,
    pub a7: C64,
    pub a8: C64,
    pub a9: C64,
    pub a10: C64,
    pub a11: C64,
    pub a12: C64,
}

impl VWPParameterSet {
    pub fn tail(&self) -> [C64; 7] {
        [self.a6, self.a7, self.a8, self.a9, self.a10, self.a11, self.a12]
    }
}

/// Perturbed symbolic inputs shared by the fused formulas.
struct Sym<'a> {
    ctx: &'a EllipticContext,
    e: C64,
    lam: Lin,
    x: C64,
    y: C64,
    cap: Lin,
    jj: Lin,
    ii1: Lin,
    ii2: Lin,
    j: i64,
    i1: i64,
    i2: i64,
    j1: i64,
    j2: i64,
}

impl<'a> Sym<'a> {
    fn new(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &'a EllipticContext) -> Self {
        Sym {
            ctx,
            e: ctx.eta,
            lam: Lin::constant(p.lambda),
            x: p.x,
            y: p.y,
            cap: Lin::constant(p.spin_lambda),
            jj: Lin::perturbed(C64::new(p.spin_j as f64, 0.0)),
            ii1: Lin::perturbed(C64::new(cfg.i1 as f64, 0.0)),
            ii2: Lin::perturbed(C64::new(cfg.i2 as f64, 0.0)),
            j: p.spin_j as i64,
            i1: cfg.i1 as i64,
            i2: cfg.i2 as i64,
            j1: cfg.j1 as i64,
            j2: cfg.j2 as i64,
        }
    }

    fn p(&self, a: Lin, k: i64) -> Result<Lead> {
        epoch_lead(a, k, self.ctx)
    }

    fn params(&self) -> (Lin, [Lin; 7]) {
        let (e, lam, cap, jj, ii1, ii2) = (self.e, self.lam, self.cap, self.jj, self.ii1, self.ii2);
        let (j1, j2) = (self.j1 as f64, self.j2 as f64);
        let dxy = self.x - self.y;
        let a1 = lam + 2.0 * e * (Lin::from(2.0 * j1 + j2) - jj);
        let tail = [
            Lin::from(2.0 * e * j1),
            Lin::from(2.0 * e * j2),
            lam + 2.0 * e * j1,
            lam + 2.0 * e * (ii1 + (2.0 * j1 - 1.0) - jj - cap),
            e * (cap - jj) + dxy + 2.0 * e * (Lin::from(j2 - 1.0) - ii1),
            e * (cap - jj) - dxy + 2.0 * e * (Lin::from(j2) - ii1),
            lam + 2.0 * e * (ii2 + (j1 + j2) - jj),
        ];
        (a1, tail)
    }

    fn vwp(&self) -> Result<Lead> {
        let (a1, tail) = self.params();
        let e = self.e;
        let n = self.j1.min(self.j2);
        let mut terms = Vec::with_capacity(n as usize + 1);
        for k in 0..=n {
            let mut t = self.p(a1, k)? / self.p(Lin::from(-2.0 * e), k)?
                * theta_lead(a1 - 4.0 * e * k as f64, self.ctx)?
                / theta_lead(a1, self.ctx)?;
            for &a in &tail {
                t = t * self.p(a, k)? / self.p(a1 - a - 2.0 * e, k)?;
            }
            terms.push(t);
        }
        Ok(sum_leading(&terms))
    }

    /// Factors depending on v; shared by the correction and S.
    fn v_block(&self, v: C64) -> Result<Lead> {
        let (e, lam, cap, jj, ii1, ii2) = (self.e, self.lam, self.cap, self.jj, self.ii1, self.ii2);
        let (j1, j2) = (self.j1 as f64, self.j2 as f64);
        let (x, y) = (self.x, self.y);
        let r = self.p(lam + x - v + 2.0 * e * (2.0 * ii2 + (2.0 * j2 - 1.0) - cap), self.j2)?
            / self.p(lam + x - v + 2.0 * e * (ii1 + (2.0 * j1 - 1.0)), self.j1)?
            * self.p(Lin::from(v - x - 2.0 * e * j2), self.i2)?
            / self.p(-2.0 * e * jj + (v - x), self.i1)?
            * self.p(lam + y - v + 2.0 * e * (2.0 * ii2 + (j2 - 1.0)) + e * (jj - cap), self.i2)?
            / self.p(lam + y - v + 2.0 * e * (2.0 * ii1 + (2.0 * j1 - 1.0)) - e * (cap + jj), self.i1)?
            * self.p(-e * (cap + jj) + (v - y), self.j2)?
            / self.p(e * (cap - jj - 2.0 * ii1) + (v - y), self.j1)?;
        Ok(r)
    }

    fn fused_w(&self) -> Result<Lead> {
        let (e, lam, cap, jj, ii1, ii2) = (self.e, self.lam, self.cap, self.jj, self.ii1, self.ii2);
        let (j1, j2) = (self.j1 as f64, self.j2 as f64);
        let (i1, i2, jn, ja, jb) = (self.i1, self.i2, self.j, self.j1, self.j2);
        let dyx = self.y - self.x;
        let mut p = self.p(2.0 * e * ii2, i2)? / self.p(2.0 * e * ii1, i1)? * self.p(2.0 * e * cap, i1)?
            / self.p(2.0 * e * cap, i2)?
            * self.p(2.0 * e * (jj - j2), ja)?
            / self.p(Lin::from(2.0 * e * j1), ja)?;
        p = p * self.p(2.0 * e * ii1, jb)? * self.p(2.0 * e * (cap - ii1 + j2), ja)?
            / self.p(e * (cap + jj) + dyx, jn)?;
        p = p * self.p(e * (cap + jj) + dyx - 2.0 * e * (ii1 + j1), jn - ja - jb)?
            * self.p(lam - dyx + 2.0 * e * (ii1 + (2.0 * j1 - 1.0)) - e * (cap + jj), ja)?;
        p = p * self.p(lam + 2.0 * e * ii2, jn - ja - jb)?
            * self.p(lam + 2.0 * e * (ii1 + 2.0 * j1 - jj) + e * (jj - cap) + dyx, jb)?
            / (self.p(lam + 2.0 * e * j1, jn - ja)? * self.p(lam + 2.0 * e * (Lin::from(2.0 * j1 + j2 - 1.0) - jj), ja)?);
        Ok(p * self.vwp()?)
    }

    fn correction(&self, v: C64) -> Result<Lead> {
        let (e, lam, cap, jj, ii1, ii2) = (self.e, self.lam, self.cap, self.jj, self.ii1, self.ii2);
        let (j1, j2) = (self.j1 as f64, self.j2 as f64);
        let (i1, i2, jn, ja, jb) = (self.i1, self.i2, self.j, self.j1, self.j2);
        let mut p = self.p(2.0 * e * jj, jb)? / self.p(2.0 * e * jj, ja)? * self.p(2.0 * e * cap, i2)?
            / self.p(2.0 * e * cap, i1)?
            * self.p(2.0 * e * ii1, i1)?
            / self.p(2.0 * e * ii2, i2)?
            * self.p(Lin::from(2.0 * e * j1), ja)?
            / self.p(Lin::from(2.0 * e * j2), jb)?;
        p = p * self.p(lam + 2.0 * e * j1, jn - ja)? * self.p(lam + 2.0 * e * (Lin::from(2.0 * j1 - 1.0) - jj), ja)?
            / (self.p(lam + 2.0 * e * (2.0 * ii2 + j2 - cap), jb)?
                * self.p(lam + 2.0 * e * (2.0 * ii2 - 1.0 - cap), jn - jb)?);
        p = p * self.p(lam + 2.0 * e * (ii1 + 2.0 * j1 - jj), jb)?
            * self.p(lam + 2.0 * e * (ii2 + (j1 - 1.0) - cap), jn - jb)?
            / (self.p(lam + 2.0 * e * ii2, jn - ja)? * self.p(lam + 2.0 * e * (ii2 + (j1 - 1.0) - cap), ja)?);
        Ok(p * self.v_block(v)?)
    }

    fn stochastic(&self, v: C64) -> Result<Lead> {
        let (e, lam, cap, jj, ii1, ii2) = (self.e, self.lam, self.cap, self.jj, self.ii1, self.ii2);
        let (j1, j2) = (self.j1 as f64, self.j2 as f64);
        let (jn, ja, jb) = (self.j, self.j1, self.j2);
        let dyx = self.y - self.x;
        let mut p = self.p(2.0 * e * (jj - j1), jb)? * self.p(2.0 * e * (cap - ii1 + j2), ja)?
            * self.p(2.0 * e * ii1, jb)?
            / self.p(Lin::from(2.0 * e * j2), jb)?
            * self.p(e * (cap + jj) + dyx - 2.0 * e * (ii1 + j1), jn - ja - jb)?
            / self.p(e * (cap + jj) + dyx, jn)?;
        p = p * self.p(lam + 2.0 * e * (ii2 - 1.0 - cap), jn - ja - jb)?
            * self.p(lam + 2.0 * e * (Lin::from(2.0 * j1 - 1.0) - jj), ja)?
            / (self.p(lam + 2.0 * e * (2.0 * ii2 + j2 - cap), jb)?
                * self.p(lam + 2.0 * e * (2.0 * ii2 - 1.0 - cap), jn - jb)?
                * self.p(lam + 2.0 * e * (Lin::from(2.0 * j1 + j2 - 1.0) - jj), ja)?);
        p = p * self.p(lam - dyx + 2.0 * e * (ii1 + (2.0 * j1 - 1.0)) - e * (cap + jj), ja)?
            * self.p(lam + dyx + 2.0 * e * (ii1 + 2.0 * j1 - jj) + e * (jj - cap), jb)?;
        Ok(p * self.v_block(v)? * self.vwp()?)
    }
}

fn in_support(p: &EllipticVertexParams, cfg: ArrowConfig) -> bool {
    cfg.conserving() && cfg.j1 <= p.spin_j && cfg.j2 <= p.spin_j
}

/// Parameters a1, a6..a12 of the very well-poised sum for a configuration.
pub fn vwp_parameters(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> VWPParameterSet {
    let (a1, t) = Sym::new(p, cfg, ctx).params();
    VWPParameterSet {
        a1: a1.value,
        a6: t[0].value,
        a7: t[1].value,
        a8: t[2].value,
        a9: t[3].value,
        a10: t[4].value,
        a11: t[5].value,
        a12: t[6].value,
    }
}

/// Fused weight W_{J;Λ}(i1, j1; i2, j2 | λ; x, y).
pub fn weight_w_fused(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> Result<C64> {
    if !in_support(p, cfg) {
        return Ok(C64::new(0.0, 0.0));
    }
    Sym::new(p, cfg, ctx).fused_w()?.limit()
}

/// Factored W_{J;Λ}(i, j; i+j, 0 | λ; x, y), the weight with no outgoing horizontal arrows.
#[allow(clippy::too_many_arguments)]
pub fn weight_w_frozen(
    spin_j: u32,
    spin_lambda: C64,
    i: u32,
    j: i64,
    lambda: C64,
    x: C64,
    y: C64,
    ctx: &EllipticContext,
) -> Result<C64> {
    if j < 0 || j > spin_j as i64 {
        return Ok(C64::new(0.0, 0.0));
    }
    let e = ctx.eta;
    let jn = spin_j as i64;
    let jj = Lin::perturbed(C64::new(spin_j as f64, 0.0));
    let ii = Lin::perturbed(C64::new(i as f64, 0.0));
    let cap = Lin::constant(spin_lambda);
    let lam = Lin::constant(lambda);
    let jf = j as f64;
    let dyx = y - x;
    let p = |a: Lin, k: i64| epoch_lead(a, k, ctx);
    let r = p(2.0 * e * jj, j)? / p(Lin::from(2.0 * e * jf), j)? * p(2.0 * e * (ii + jf), j)?
        * p(lam + 2.0 * e * (ii + jf), jn - j)?
        / p(e * (cap + jj) + dyx, jn)?
        * p(lam - dyx + 2.0 * e * (ii + (2.0 * jf - 1.0)) - e * (cap + jj), j)?
        * p(e * (cap + jj) - 2.0 * e * (ii + jf) + dyx, jn - j)?
        / (p(lam + 2.0 * e * jf, jn - j)? * p(lam + 2.0 * e * (Lin::from(2.0 * jf - 1.0) - jj), j)?);
    r.limit()
}

/// Closed-form stochastic correction C_{J;Λ}(i1, j1; i2, j2 | λ, v; x, y).
pub fn correction_elliptic(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> Result<C64> {
    if !cfg.conserving() {
        return Err(Error::InvalidIndex(format!("non-conserving configuration {cfg:?}")));
    }
    Sym::new(p, cfg, ctx).correction(p.v)?.limit()
}

fn integer_spin(z: C64, what: &str) -> Result<u32> {
    let r = z.re.round();
    if z.im.abs() > 1e-12 || (z.re - r).abs() > 1e-12 || r < 1.0 {
        return Err(Error::Precondition(format!("{what} must be a positive integer, got {z}")));
    }
    Ok(r as u32)
}

/// Correction as a ratio of four frozen weights of an auxiliary curve with spin
/// T and occupancy r (curve rapidity 0); depends on (T, r) only through v = η(J+T−2r).
pub fn correction_elliptic_ratio(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> Result<C64> {
    let ArrowConfig { i1, j1, i2, j2 } = cfg;
    let cap = integer_spin(p.spin_lambda, "vertical spin")?;
    let (lam, e, t, r) = (p.lambda, ctx.eta, p.spin_t, p.r);
    let zero = C64::new(0.0, 0.0);
    let lam_right = lam + 2.0 * e * (2.0 * i2 as f64 - p.spin_lambda);
    let lam_below = lam + 2.0 * e * (2.0 * j1 as f64 - p.spin_j as f64);
    let num = weight_w_frozen(cap, t, r + j2, i2 as i64, lam, p.y, zero, ctx)?
        * weight_w_frozen(p.spin_j, t, r, j2 as i64, lam_right, p.x, zero, ctx)?;
    let den = weight_w_frozen(cap, t, r, i1 as i64, lam_below, p.y, zero, ctx)?
        * weight_w_frozen(p.spin_j, t, r + i1, j1 as i64, lam, p.x, zero, ctx)?;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(format!("frozen denominator vanishes for {cfg:?}")));
    }
    Ok(num / den)
}

/// Stochastic weight S_{J;Λ}(i1, j1; i2, j2 | λ, v; x, y); sums to one over outgoing (i2, j2).
pub fn weight_s_elliptic(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> Result<C64> {
    if !in_support(p, cfg) {
        return Ok(C64::new(0.0, 0.0));
    }
    Sym::new(p, cfg, ctx).stochastic(p.v)?.limit()
}

/// Outgoing configurations reachable from (i1, j1) with horizontal spin J.
pub fn outgoing_configs(i1: u32, j1: u32, spin_j: u32) -> Vec<ArrowConfig> {
    (0..=spin_j)
        .filter(|&j2| i1 + j1 >= j2)
        .map(|j2| ArrowConfig::new(i1, j1, i1 + j1 - j2, j2))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialKind {
    /// J = Λ = 1.
    OneOne,
    /// J = 1, arbitrary Λ.
    OneLambda,
    /// x = y + η(J − Λ).
    QHahn,
}

/// A weight written as Π f(num)/Π f(den), or a constant.
enum Factored {
    Const(f64),
    Ratio(Vec<C64>, Vec<C64>),
}

fn one_one_factors(cfg: ArrowConfig, lam: C64, v: C64, x: C64, y: C64, e: C64) -> Factored {
    let d = [y - x + 2.0 * e, lam];
    let r = |num: [C64; 4], den: [C64; 2]| Factored::Ratio(num.to_vec(), [d[0], d[1], den[0], den[1]].to_vec());
    match (cfg.i1, cfg.j1, cfg.i2, cfg.j2) {
        (0, 0, 0, 0) | (1, 1, 1, 1) => Factored::Const(1.0),
        (1, 0, 1, 0) => r([y - x, lam - 2.0 * e, lam + y - v + 2.0 * e, x - v], [x - v + 2.0 * e, lam + y - v]),
        (0, 1, 1, 0) => r([lam - y + x, 2.0 * e, lam + y - v + 2.0 * e, x - v], [lam + x - v + 2.0 * e, y - v]),
        (1, 0, 0, 1) => r([lam + y - x, 2.0 * e, y - v + 2.0 * e, lam + x - v], [x - v + 2.0 * e, lam + y - v]),
        (0, 1, 0, 1) => r([y - x, lam + 2.0 * e, lam + x - v, y - v + 2.0 * e], [lam + x - v + 2.0 * e, y - v]),
        _ => Factored::Const(0.0),
    }
}

fn one_lambda_factors(cfg: ArrowConfig, cap: C64, lam: C64, v: C64, x: C64, y: C64, e: C64) -> Factored {
    let k = cfg.i1 as f64;
    let base = y - x + e * (cap + 1.0);
    match (cfg.j1, cfg.j2) {
        (0, 0) if cfg.i2 == cfg.i1 => Factored::Ratio(
            vec![y - x + e * (cap - 2.0 * k + 1.0), lam + 2.0 * e * (k - cap - 1.0), x - v, lam + y + e * (4.0 * k - cap - 1.0) - v],
            vec![base, lam + 2.0 * e * (2.0 * k - cap - 1.0), x + 2.0 * k * e - v, lam + y + e * (2.0 * k - cap - 1.0) - v],
        ),
        (1, 0) if cfg.i2 == cfg.i1 + 1 => Factored::Ratio(
            vec![lam - y + x + e * (2.0 * k - cap + 1.0), 2.0 * e * (cap - k), v - x, lam + y - v + e * (4.0 * k - cap + 3.0)],
            vec![base, lam + 2.0 * e * (2.0 * k - cap + 1.0), lam + x - v + 2.0 * e * (k + 1.0), v - y + e * (cap - 2.0 * k - 1.0)],
        ),
        (0, 1) if cfg.i1 >= 1 && cfg.i2 + 1 == cfg.i1 => Factored::Ratio(
            vec![lam + y - x + e * (2.0 * k - cap - 1.0), 2.0 * e * k, v - y - e * (cap + 1.0), lam - v + x + 2.0 * e * (2.0 * k - cap - 1.0)],
            vec![base, lam + 2.0 * e * (2.0 * k - cap - 1.0), v - x - 2.0 * k * e, lam + y + e * (2.0 * k - cap - 1.0) - v],
        ),
        (1, 1) if cfg.i2 == cfg.i1 => Factored::Ratio(
            vec![y - x + e * (2.0 * k - cap + 1.0), lam + 2.0 * e * (k + 1.0), x + lam + 2.0 * e * (2.0 * k - cap + 1.0) - v, v - y - e * (cap + 1.0)],
            vec![base, lam + 2.0 * e * (2.0 * k - cap + 1.0), lam + x - v + 2.0 * e * (k + 1.0), v - y + e * (cap - 2.0 * k - 1.0)],
        ),
        _ => Factored::Const(0.0),
    }
}

fn eval_theta(f: Factored, ctx: &EllipticContext) -> Result<C64> {
    match f {
        Factored::Const(c) => Ok(C64::new(c, 0.0)),
        Factored::Ratio(num, den) => {
            let mut r = C64::new(1.0, 0.0);
            for a in num {
                r *= theta1(a, ctx)?;
            }
            for a in den {
                let t = theta1(a, ctx)?;
                if t.norm() < POLE_TOL {
                    return Err(Error::Pole(format!("theta factor vanishes at {a}")));
                }
                r /= t;
            }
            Ok(r)
        }
    }
}

fn eval_sine(f: Factored) -> Result<C64> {
    match f {
        Factored::Const(c) => Ok(C64::new(c, 0.0)),
        Factored::Ratio(num, den) => {
            let mut l = C64::new(0.0, 0.0);
            for a in num {
                if (a - a.re.round()).norm() < POLE_TOL {
                    return Ok(C64::new(0.0, 0.0));
                }
                l += ln_two_sin_pi(a);
            }
            for a in den {
                if (a - a.re.round()).norm() < POLE_TOL {
                    return Err(Error::Pole(format!("sine factor vanishes at {a}")));
                }
                l -= ln_two_sin_pi(a);
            }
            Ok(l.exp())
        }
    }
}

fn spin_is(z: C64, n: f64) -> bool {
    (z - n).norm() < 1e-12
}

/// Factored closed forms of S for the J = Λ = 1, J = 1 and q-Hahn specializations.
pub fn weight_s_special(kind: SpecialKind, p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> Result<C64> {
    let (lam, v, x, y, e) = (p.lambda, p.v, p.x, p.y, ctx.eta);
    match kind {
        SpecialKind::OneOne => {
            if p.spin_j != 1 || !spin_is(p.spin_lambda, 1.0) {
                return Err(Error::Precondition("J = Λ = 1 form needs unit spins".into()));
            }
            eval_theta(one_one_factors(cfg, lam, v, x, y, e), ctx)
        }
        SpecialKind::OneLambda => {
            if p.spin_j != 1 {
                return Err(Error::Precondition("J = 1 form needs unit horizontal spin".into()));
            }
            eval_theta(one_lambda_factors(cfg, p.spin_lambda, lam, v, x, y, e), ctx)
        }
        SpecialKind::QHahn => q_hahn(p, cfg, ctx),
    }
}

fn q_hahn(p: &EllipticVertexParams, cfg: ArrowConfig, ctx: &EllipticContext) -> Result<C64> {
    let (lam, v, x, y, e) = (p.lambda, p.v, p.x, p.y, ctx.eta);
    let cap = p.spin_lambda;
    let jf = p.spin_j as f64;
    if (x - y - e * (jf - cap)).norm() > 1e-12 {
        return Err(Error::Precondition("q-Hahn form needs x = y + η(J − Λ)".into()));
    }
    if !in_support(p, cfg) || cfg.i1 < cfg.j2 {
        return Ok(C64::new(0.0, 0.0));
    }
    let (i1, j1, i2, j2) = (cfg.i1 as f64, cfg.j1 as f64, cfg.i2 as f64, cfg.j2 as f64);
    let (ki1, ki2, kj1, kj2, kj) = (cfg.i1 as i64, cfg.i2 as i64, cfg.j1 as i64, cfg.j2 as i64, p.spin_j as i64);
    let pe = |a: C64, k: i64| epoch(a, k, ctx);
    let mut num = pe(2.0 * e * jf, kj2)? * pe(2.0 * e * i1, kj2)? * pe(2.0 * e * (cap - i1), kj - kj2)?;
    let mut den = pe(2.0 * e * j2, kj2)? * pe(2.0 * e * cap, kj)?;
    num *= pe(lam + 2.0 * e * (i1 + 2.0 * j1 - jf), kj2)? * pe(lam + 2.0 * e * (i2 + j1 - cap - 1.0), kj - kj2)?;
    den *= pe(lam + 2.0 * e * (2.0 * i2 + j2 - cap), kj2)? * pe(lam + 2.0 * e * (2.0 * i2 - cap - 1.0), kj - kj2)?;
    num *= pe(lam + x - v + 2.0 * e * (2.0 * i2 + 2.0 * j2 - cap - 1.0), kj2)? * pe(v - x - 2.0 * e * j2, ki2)?;
    den *= pe(lam + x - v + 2.0 * e * (i1 + 2.0 * j1 - 1.0), kj1)? * pe(v - x - 2.0 * e * jf, ki1)?;
    num *= pe(lam + y - v + 2.0 * e * (2.0 * i2 + j2 - 1.0) + e * (jf - cap), ki2)? * pe(v - y - e * (cap + jf), kj2)?;
    den *= pe(lam + y - v + 2.0 * e * (2.0 * i1 + 2.0 * j1 - 1.0) - e * (cap + jf), ki1)?
        * pe(v - y + e * (cap - jf - 2.0 * i1), kj1)?;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(format!("q-Hahn denominator vanishes for {cfg:?}")));
    }
    Ok(num / den)
}

/// J = Λ = 1 weights with every theta factor replaced by 2 sin(π·), evaluated
/// through logarithms so that large |Im v| stays finite.
pub fn weight_s11_sine(cfg: ArrowConfig, lambda: C64, v: C64, x: C64, y: C64, eta: C64) -> Result<C64> {
    eval_sine(one_one_factors(cfg, lambda, v, x, y, eta))
}

/// The v → i∞ limit of [`weight_s11_sine`]: every v-dependent sine ratio tends to 1.
pub fn weight_s11_sine_v_infinity(cfg: ArrowConfig, lambda: C64, x: C64, y: C64, eta: C64) -> Result<C64> {
    let s = |z: C64| 2.0 * (std::f64::consts::PI * z).sin();
    let e2 = 2.0 * eta;
    let d = s(y - x + e2) * s(lambda);
    if d.norm() < POLE_TOL {
        return Err(Error::Pole("trigonometric denominator vanishes".into()));
    }
    Ok(match (cfg.i1, cfg.j1, cfg.i2, cfg.j2) {
        (0, 0, 0, 0) | (1, 1, 1, 1) => C64::new(1.0, 0.0),
        (1, 0, 1, 0) => s(y - x) * s(lambda - e2) / d,
        (0, 1, 1, 0) => s(lambda - y + x) * s(e2) / d,
        (1, 0, 0, 1) => s(lambda + y - x) * s(e2) / d,
        (0, 1, 0, 1) => s(y - x) * s(lambda + e2) / d,
        _ => C64::new(0.0, 0.0),
    })
}

/// Representative of `v` modulo the period lattice Z + τZ with 0 ≤ Im < Im τ.
pub fn reduce_mod_lattice(v: C64, tau: C64) -> C64 {
    let n = (v.im / tau.im).floor();
    let w = v - n * tau;
    w - w.re.floor()
}

/// Dynamical parameters next to a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticNeighbors {
    /// λ at the vertex to the right.
    pub lambda_right: C64,
    /// λ at the vertex below.
    pub lambda_below: C64,
    /// v at the vertex to the left.
    pub v_left: C64,
    /// v at the vertex above.
    pub v_up: C64,
}

pub fn propagate_elliptic(lambda: C64, v: C64, cfg: ArrowConfig, spin_j: u32, spin_lambda: C64, eta: C64) -> EllipticNeighbors {
    EllipticNeighbors {
        lambda_right: lambda + 2.0 * eta * (2.0 * cfg.i2 as f64 - spin_lambda),
        lambda_below: lambda + 2.0 * eta * (2.0 * cfg.j1 as f64 - spin_j as f64),
        v_left: v - 2.0 * eta * cfg.i1 as f64,
        v_up: v - 2.0 * eta * cfg.j2 as f64,
    }
}
