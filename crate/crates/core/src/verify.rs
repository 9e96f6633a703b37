//! Numerical checks of the weight identities: stochasticity, Yang–Baxter and
//! tetrahedron equations, special-function identities, and agreement between
//! closed forms and their limits or alternative constructions.
//!
//! Every check evaluates both sides on a parameter map and returns a
//! [`ResidualReport`]. Grid checks run over every boundary in a family's range
//! and keep the worst report. [`sweep`] draws parameters from seeded streams
//! and runs a plan of checks in parallel.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{
    correction_elliptic, correction_elliptic_ratio, outgoing_configs, reduce_mod_lattice, weight_s11_sine,
    weight_s11_sine_v_infinity, weight_s_elliptic, weight_w_frozen, weight_w_fused, EllipticVertexParams,
};
use crate::error::{Error, Result};
use crate::higher_rank::{
    compositions, correction_rank, correction_rank_ratio, outgoing_colored, weight_s_colored11, weight_s_rank,
    weight_s_rank_l1, weight_u, weight_w_rank, ColoredConfig, Composition,
};
use crate::sixvertex::{weight_chi, weight_s6v, weight_w, ArrowConfig, SPIN_HALF_CONFIGS};
use crate::special_fn::{
    epoch, hypergeometric, jackson_balancing_e, jackson_rhs, q_heine_rhs, qpoch, theta1, vandermonde_rhs,
    vwp_elliptic, EllipticContext, HypergeometricSpec, SeriesKind,
};
use crate::tetrahedron::{
    correction_tetra, correction_tetra_ratio, outgoing_tetra, tetrahedron_sides, weight_s_tetra, weight_t_tetra,
    TetraEquation, TetraFreeze,
};

/// Named parameters of a check; integer parameters are stored as real values.
pub type ParamMap = BTreeMap<String, C64>;

/// Maximum number of parameter redraws after hitting a pole.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: String,
    pub lhs: C64,
    pub rhs: C64,
    pub residual_abs: f64,
    /// |lhs − rhs| / max(1, largest single term).
    pub residual_rel: f64,
    pub term_count: usize,
    pub params: ParamMap,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResidualReport {
    fn failed(equation: &str, params: &ParamMap, err: &Error) -> Self {
        Self {
            equation: equation.to_string(),
            lhs: C64::new(f64::NAN, 0.0),
            rhs: C64::new(f64::NAN, 0.0),
            residual_abs: f64::INFINITY,
            residual_rel: f64::INFINITY,
            term_count: 0,
            params: params.clone(),
            passed: false,
            error: Some(err.to_string()),
        }
    }
}

/// Running sums of both sides of an identity.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    lhs: C64,
    rhs: C64,
    max_term: f64,
    terms: usize,
}

impl Acc {
    fn l(&mut self, t: C64) {
        self.lhs += t;
        self.max_term = self.max_term.max(t.norm());
        self.terms += 1;
    }

    fn r(&mut self, t: C64) {
        self.rhs += t;
        self.max_term = self.max_term.max(t.norm());
        self.terms += 1;
    }

    /// Single-value comparison of `a` against `b`.
    fn pair(a: C64, b: C64) -> Self {
        let mut acc = Acc::default();
        acc.l(a);
        acc.r(b);
        acc
    }

    fn report(self, equation: &str, params: &ParamMap, tol: f64) -> ResidualReport {
        let residual_abs = (self.lhs - self.rhs).norm();
        let residual_rel = residual_abs / self.max_term.max(1.0);
        ResidualReport {
            equation: equation.to_string(),
            lhs: self.lhs,
            rhs: self.rhs,
            residual_abs,
            residual_rel,
            term_count: self.terms,
            params: params.clone(),
            passed: residual_rel <= tol,
            error: None,
        }
    }
}

/// Compares the sums of two lists of terms.
pub fn compare_terms(equation: &str, lhs: &[C64], rhs: &[C64], params: &ParamMap, tol: f64) -> ResidualReport {
    let mut acc = Acc::default();
    lhs.iter().for_each(|&t| acc.l(t));
    rhs.iter().for_each(|&t| acc.r(t));
    acc.report(equation, params, tol)
}

/// Keeps the report with the largest relative residual; term counts add up.
#[derive(Default)]
struct Worst(Option<ResidualReport>, usize, bool);

impl Worst {
    fn push(&mut self, r: ResidualReport) {
        self.1 += r.term_count;
        let all_passed = self.0.is_none() || self.2;
        self.2 = all_passed && r.passed;
        match &self.0 {
            Some(w) if !(r.residual_rel > w.residual_rel) => {}
            _ => self.0 = Some(r),
        }
    }

    fn finish(self, equation: &str, params: &ParamMap, tol: f64) -> ResidualReport {
        match self.0 {
            Some(mut r) => {
                r.term_count = self.1;
                r.passed = self.2;
                r
            }
            None => Acc::default().report(equation, params, tol),
        }
    }
}

fn get(p: &ParamMap, key: &str) -> Result<C64> {
    p.get(key).copied().ok_or_else(|| Error::Precondition(format!("missing parameter `{key}`")))
}

fn get_or(p: &ParamMap, key: &str, default: C64) -> C64 {
    p.get(key).copied().unwrap_or(default)
}

fn get_int(p: &ParamMap, key: &str) -> Result<i64> {
    let z = get(p, key)?;
    let r = z.re.round();
    if z.im != 0.0 || (z.re - r).abs() > 1e-9 {
        return Err(Error::Precondition(format!("parameter `{key}` must be an integer, got {z}")));
    }
    Ok(r as i64)
}

fn get_int_or(p: &ParamMap, key: &str, default: i64) -> Result<i64> {
    if p.contains_key(key) {
        get_int(p, key)
    } else {
        Ok(default)
    }
}

fn get_count(p: &ParamMap, key: &str, default: i64) -> Result<u32> {
    let k = get_int_or(p, key, default)?;
    u32::try_from(k).map_err(|_| Error::Precondition(format!("parameter `{key}` must be nonnegative, got {k}")))
}

fn get_spin(p: &ParamMap, key: &str) -> Result<u32> {
    let k = get_int_or(p, key, 1)?;
    if k < 1 {
        return Err(Error::Precondition(format!("spin `{key}` must be a positive integer, got {k}")));
    }
    Ok(k as u32)
}

fn ctx_of(p: &ParamMap) -> Result<EllipticContext> {
    EllipticContext::new(get(p, "tau")?, get(p, "eta")?)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

// ---------------------------------------------------------------------------
// Families and check kinds

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StochFamily {
    SixVertex,
    Elliptic,
    Rank,
    TetraS,
    TetraT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YbeFamily {
    SixVertexW,
    SixVertexChi,
    SixVertexS,
    EllipticS,
    RankU,
    RankW,
    RankS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TetraKind {
    PlainR,
    DynamicalS,
    NondynT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    ThetaQuartic,
    VandermondeChu,
    QHeine,
    EllipticJackson,
    PochMerge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegenKind {
    /// Six-vertex S at v = 0 against w.
    SixVertexV0,
    /// Elliptic J = Λ = 1 weights at large Im τ against their sine form.
    EllipticTrigLimit,
    /// Tetrahedron S near q = 1 against T.
    TetraQ1,
    /// Rank S with L = 1 against the single-path closed form.
    RankL1ClosedForm,
    /// Rank S with L = M = 1 against the colored table.
    RankM1Table,
    /// Rank S with n = L = M = 1 against the six-vertex S.
    RankN1Reduction,
    /// Fused elliptic W with no outgoing horizontal arrows against the factored form.
    EllipticFrozen,
    /// Closed-form elliptic correction against the frozen-weight ratio.
    CorrectionElliptic,
    /// Closed-form rank correction against the frozen-weight ratio.
    CorrectionRank,
    /// Closed-form tetrahedron correction against the frozen-weight ratio.
    CorrectionTetra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "group", content = "kind", rename_all = "kebab-case")]
pub enum CheckKind {
    Identity(IdentityKind),
    Stochasticity(StochFamily),
    Ybe(YbeFamily),
    Tetrahedron(TetraKind),
    Degeneration(DegenKind),
}

/// Every check with its command-line name.
pub const CHECKS: &[(&str, CheckKind)] = &[
    ("theta-quartic", CheckKind::Identity(IdentityKind::ThetaQuartic)),
    ("vandermonde-chu", CheckKind::Identity(IdentityKind::VandermondeChu)),
    ("q-heine", CheckKind::Identity(IdentityKind::QHeine)),
    ("elliptic-jackson", CheckKind::Identity(IdentityKind::EllipticJackson)),
    ("poch-merge", CheckKind::Identity(IdentityKind::PochMerge)),
    ("stoch-six-vertex", CheckKind::Stochasticity(StochFamily::SixVertex)),
    ("stoch-elliptic", CheckKind::Stochasticity(StochFamily::Elliptic)),
    ("stoch-rank", CheckKind::Stochasticity(StochFamily::Rank)),
    ("stoch-tetra-s", CheckKind::Stochasticity(StochFamily::TetraS)),
    ("stoch-tetra-t", CheckKind::Stochasticity(StochFamily::TetraT)),
    ("ybe-six-vertex-w", CheckKind::Ybe(YbeFamily::SixVertexW)),
    ("ybe-six-vertex-chi", CheckKind::Ybe(YbeFamily::SixVertexChi)),
    ("ybe-six-vertex-s", CheckKind::Ybe(YbeFamily::SixVertexS)),
    ("ybe-elliptic-s", CheckKind::Ybe(YbeFamily::EllipticS)),
    ("ybe-rank-u", CheckKind::Ybe(YbeFamily::RankU)),
    ("ybe-rank-w", CheckKind::Ybe(YbeFamily::RankW)),
    ("ybe-rank-s", CheckKind::Ybe(YbeFamily::RankS)),
    ("tetra-plain", CheckKind::Tetrahedron(TetraKind::PlainR)),
    ("tetra-dynamical", CheckKind::Tetrahedron(TetraKind::DynamicalS)),
    ("tetra-nondyn", CheckKind::Tetrahedron(TetraKind::NondynT)),
    ("six-vertex-v0", CheckKind::Degeneration(DegenKind::SixVertexV0)),
    ("elliptic-trig-limit", CheckKind::Degeneration(DegenKind::EllipticTrigLimit)),
    ("tetra-q1", CheckKind::Degeneration(DegenKind::TetraQ1)),
    ("rank-l1-closed-form", CheckKind::Degeneration(DegenKind::RankL1ClosedForm)),
    ("rank-m1-table", CheckKind::Degeneration(DegenKind::RankM1Table)),
    ("rank-n1-reduction", CheckKind::Degeneration(DegenKind::RankN1Reduction)),
    ("elliptic-frozen", CheckKind::Degeneration(DegenKind::EllipticFrozen)),
    ("correction-elliptic", CheckKind::Degeneration(DegenKind::CorrectionElliptic)),
    ("correction-rank", CheckKind::Degeneration(DegenKind::CorrectionRank)),
    ("correction-tetra", CheckKind::Degeneration(DegenKind::CorrectionTetra)),
];

impl CheckKind {
    pub fn name(&self) -> &'static str {
        CHECKS.iter().find(|(_, k)| k == self).map(|(n, _)| *n).expect("every kind is listed")
    }

    pub fn from_name(name: &str) -> Option<Self> {
        CHECKS.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
    }

    pub fn default_tol(&self) -> f64 {
        use CheckKind::*;
        match self {
            Stochasticity(StochFamily::TetraT) | Tetrahedron(TetraKind::NondynT) => 1e-12,
            Degeneration(DegenKind::SixVertexV0) => 1e-14,
            Degeneration(DegenKind::TetraQ1) => 1e-3,
            Degeneration(DegenKind::EllipticTrigLimit) => 1e-4,
            Degeneration(
                DegenKind::CorrectionElliptic
                | DegenKind::CorrectionRank
                | DegenKind::CorrectionTetra
                | DegenKind::EllipticFrozen,
            ) => 1e-10,
            _ => 1e-9,
        }
    }
}

// ---------------------------------------------------------------------------
// Stochasticity

fn six_vertex_cfg(b: &[i64]) -> Result<Vec<u32>> {
    b.iter()
        .map(|&k| u32::try_from(k).map_err(|_| Error::InvalidIndex(format!("negative count {k}"))))
        .collect()
}

fn expect_len(b: &[i64], n: usize, what: &str) -> Result<()> {
    if b.len() != n {
        return Err(Error::InvalidIndex(format!("{what} expects {n} entries, got {}", b.len())));
    }
    Ok(())
}

fn elliptic_params(p: &ParamMap) -> Result<(EllipticVertexParams, EllipticContext)> {
    let ctx = ctx_of(p)?;
    let spin_j = get_spin(p, "J")?;
    let lam = get_or(p, "Lambda", re(1.0));
    let vp = EllipticVertexParams::new(spin_j, lam, get(p, "lambda")?, get(p, "v")?, get(p, "x")?, get(p, "y")?);
    Ok((vp, ctx))
}

/// Splits `n+1`-long blocks of `b` into compositions.
fn compositions_of(b: &[i64], n: usize, count: usize) -> Result<Vec<Composition>> {
    expect_len(b, count * (n + 1), "colored boundary")?;
    Ok(b.chunks(n + 1).map(|c| Composition(c.to_vec())).collect())
}

/// Sum of the outgoing weights for one incoming configuration, compared against 1.
///
/// `incoming` is (i1, j1) for six-vertex and elliptic, the parts of A then B for
/// rank, and (n1, n2, n3) for the tetrahedron families.
pub fn check_stochasticity(family: StochFamily, incoming: &[i64], params: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let mut acc = Acc::default();
    let name = CheckKind::Stochasticity(family).name();
    match family {
        StochFamily::SixVertex => {
            expect_len(incoming, 2, name)?;
            let c = six_vertex_cfg(incoming)?;
            let (x, y, q, v) = (get(params, "x")?, get(params, "y")?, get(params, "q")?, get(params, "v")?);
            for cfg in SPIN_HALF_CONFIGS.iter().filter(|k| k.i1 == c[0] && k.j1 == c[1]) {
                acc.l(weight_s6v(*cfg, x, y, q, v)?);
            }
        }
        StochFamily::Elliptic => {
            expect_len(incoming, 2, name)?;
            let c = six_vertex_cfg(incoming)?;
            let (vp, ctx) = elliptic_params(params)?;
            for cfg in outgoing_configs(c[0], c[1], vp.spin_j) {
                acc.l(weight_s_elliptic(&vp, cfg, &ctx)?);
            }
        }
        StochFamily::Rank => {
            let n = get_spin(params, "n")? as usize;
            let (l, m) = (get_spin(params, "L")? as i64, get_spin(params, "M")? as i64);
            let ab = compositions_of(incoming, n, 2)?;
            let (x, y, q, v) = (get(params, "x")?, get(params, "y")?, get(params, "q")?, get(params, "v")?);
            for (c, d) in outgoing_colored(&ab[0], &ab[1], l) {
                let cfg = ColoredConfig::new(ab[0].clone(), ab[1].clone(), c, d);
                acc.l(weight_s_rank(l, m, &cfg, x, y, v, q)?);
            }
        }
        StochFamily::TetraS | StochFamily::TetraT => {
            expect_len(incoming, 3, name)?;
            let c = six_vertex_cfg(incoming)?;
            let v = get(params, "v")?;
            for cfg in outgoing_tetra(c[0], c[1], c[2]) {
                acc.l(if family == StochFamily::TetraS {
                    weight_s_tetra(cfg, get(params, "q")?, v)?
                } else {
                    weight_t_tetra(cfg, v)
                });
            }
        }
    }
    acc.r(re(1.0));
    Ok(acc.report(name, params, tol))
}

fn all_incoming(family: StochFamily, p: &ParamMap) -> Result<Vec<Vec<i64>>> {
    Ok(match family {
        StochFamily::SixVertex => vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
        StochFamily::Elliptic => {
            let (j, cap) = (get_spin(p, "J")? as i64, get_int_or(p, "cap", 4)?);
            (0..=cap).flat_map(|i| (0..=j).map(move |jj| vec![i, jj])).collect()
        }
        StochFamily::Rank => {
            let n = get_spin(p, "n")? as usize;
            let (l, m) = (get_spin(p, "L")? as i64, get_spin(p, "M")? as i64);
            let mut out = Vec::new();
            for a in compositions(n, m) {
                for b in compositions(n, l) {
                    out.push(a.0.iter().chain(&b.0).copied().collect());
                }
            }
            out
        }
        StochFamily::TetraS | StochFamily::TetraT => {
            let cap = get_int_or(p, "cap", 4)?;
            let mut out = Vec::new();
            for a in 0..=cap {
                for b in 0..=cap {
                    for c in 0..=cap {
                        out.push(vec![a, b, c]);
                    }
                }
            }
            out
        }
    })
}

// ---------------------------------------------------------------------------
// Yang–Baxter equations

struct EllipticCache<'a> {
    ctx: &'a EllipticContext,
    map: HashMap<(u32, u32, ArrowConfig, [u64; 8]), C64>,
}

impl EllipticCache<'_> {
    #[allow(clippy::too_many_arguments)]
    fn s(&mut self, j: u32, cap: u32, cfg: ArrowConfig, lam: C64, v: C64, x: C64, y: C64) -> Result<C64> {
        let bits = [lam.re, lam.im, v.re, v.im, x.re, x.im, y.re, y.im].map(f64::to_bits);
        let key = (j, cap, cfg, bits);
        if let Some(&w) = self.map.get(&key) {
            return Ok(w);
        }
        let vp = EllipticVertexParams::new(j, re(cap as f64), lam, v, x, y);
        let w = weight_s_elliptic(&vp, cfg, self.ctx)?;
        self.map.insert(key, w);
        Ok(w)
    }
}

fn ybe_elliptic(b: &[u32], p: &ParamMap, cache: &mut EllipticCache) -> Result<Acc> {
    let [i1, j1, k1, i3, j3, k3] = [b[0], b[1], b[2], b[3], b[4], b[5]];
    let (j, cap, t) = (get_spin(p, "J")?, get_spin(p, "Lambda")?, get_spin(p, "T")?);
    let (lam, v, x, y, z) = (get(p, "lambda")?, get(p, "v")?, get(p, "x")?, get(p, "y")?, get(p, "z")?);
    let e = cache.ctx.eta;
    let d = e * (cap as f64 - j as f64);
    let a = ArrowConfig::new;
    let mut acc = Acc::default();
    for j2 in 0..=j {
        let (Some(i2), Some(k2)) = ((i1 + j1).checked_sub(j2), (k1 + j2).checked_sub(j3)) else { continue };
        if k2 + i2 != k3 + i3 {
            continue;
        }
        let w1 = cache.s(j, cap, a(i1, j1, i2, j2), lam, v - 2.0 * e * k1 as f64, x, y)?;
        let w2 = cache.s(j, t, a(k1, j2, k2, j3), lam + 2.0 * e * (2.0 * i2 as f64 - cap as f64), v, x, z)?;
        let w3 = cache.s(cap, t, a(k2, i2, k3, i3), lam, v - 2.0 * e * j3 as f64 + d, y, z)?;
        acc.l(w1 * w2 * w3);
    }
    for j2 in 0..=j {
        let Some(k2) = (k3 + j2).checked_sub(j1) else { continue };
        let Some(i2) = (k1 + i1).checked_sub(k2) else { continue };
        if i2 + j2 != i3 + j3 {
            continue;
        }
        let w1 = cache.s(cap, t, a(k1, i1, k2, i2), lam + 2.0 * e * (2.0 * j1 as f64 - j as f64), v + d, y, z)?;
        let w2 = cache.s(j, t, a(k2, j1, k3, j2), lam, v - 2.0 * e * i2 as f64, x, z)?;
        let w3 = cache.s(j, cap, a(i2, j2, i3, j3), lam + 2.0 * e * (2.0 * k3 as f64 - t as f64), v, x, y)?;
        acc.r(w1 * w2 * w3);
    }
    Ok(acc)
}

fn ybe_six_vertex(family: YbeFamily, b: &[u32], p: &ParamMap) -> Result<Acc> {
    let [i1, j1, k1, i3, j3, k3] = [b[0], b[1], b[2], b[3], b[4], b[5]];
    let (x, y, z, q) = (get(p, "x")?, get(p, "y")?, get(p, "z")?, get(p, "q")?);
    let a = ArrowConfig::new;
    let mut acc = Acc::default();
    match family {
        YbeFamily::SixVertexS => {
            let v = get(p, "v")?;
            let qp = |k: u32| q.powi(k as i32) * v;
            for i2 in 0..2 {
                for j2 in 0..2 {
                    for k2 in 0..2 {
                        acc.l(weight_s6v(a(i1, j1, i2, j2), x, y, q, qp(k1))?
                            * weight_s6v(a(k1, j2, k2, j3), x, z, q, v)?
                            * weight_s6v(a(k2, i2, k3, i3), y, z, q, qp(j3))?);
                        acc.r(weight_s6v(a(k1, i1, k2, i2), y, z, q, v)?
                            * weight_s6v(a(k2, j1, k3, j2), x, z, q, qp(i2))?
                            * weight_s6v(a(i2, j2, i3, j3), x, y, q, v)?);
                    }
                }
            }
        }
        YbeFamily::SixVertexW => {
            for i2 in 0..2 {
                for j2 in 0..2 {
                    for k2 in 0..2 {
                        acc.l(weight_w(a(i1, j1, i2, j2), x, y, q)?
                            * weight_w(a(k1, j2, k2, j3), x, z, q)?
                            * weight_w(a(k2, i2, k3, i3), y, z, q)?);
                        acc.r(weight_w(a(k1, i1, k2, i2), y, z, q)?
                            * weight_w(a(k2, j1, k3, j2), x, z, q)?
                            * weight_w(a(i2, j2, i3, j3), x, y, q)?);
                    }
                }
            }
        }
        YbeFamily::SixVertexChi => {
            let s = get(p, "s")?;
            for i2 in 0..2 {
                for j2 in 0..2 {
                    for k2 in 0..=k1.max(k3) + 1 {
                        acc.l(weight_w(a(i1, j1, i2, j2), x, y, q)?
                            * weight_chi(a(k1, j2, k2, j3), x, z, q, s)?
                            * weight_chi(a(k2, i2, k3, i3), y, z, q, s)?);
                        acc.r(weight_chi(a(k1, i1, k2, i2), y, z, q, s)?
                            * weight_chi(a(k2, j1, k3, j2), x, z, q, s)?
                            * weight_w(a(i2, j2, i3, j3), x, y, q)?);
                    }
                }
            }
        }
        _ => unreachable!("not a six-vertex family"),
    }
    Ok(acc)
}

fn ybe_rank(family: YbeFamily, comps: &[Composition], p: &ParamMap) -> Result<Acc> {
    let n = get_spin(p, "n")? as usize;
    let (l, m, t) = (get_spin(p, "L")? as i64, get_spin(p, "M")? as i64, get_spin(p, "T")? as i64);
    let (x, y, z, q) = (get(p, "x")?, get(p, "y")?, get(p, "z")?, get(p, "q")?);
    let [i1, j1, k1, i3, j3, k3] = [&comps[0], &comps[1], &comps[2], &comps[3], &comps[4], &comps[5]];
    let cc = |a: &Composition, b: &Composition, c: &Composition, d: &Composition| {
        ColoredConfig::new(a.clone(), b.clone(), c.clone(), d.clone())
    };
    let v = get_or(p, "v", re(0.0));
    let qp = |k: i64| q.powi(k as i32) * v;
    let mut acc = Acc::default();
    for i2 in compositions(n, m) {
        for j2 in compositions(n, l) {
            for k2 in compositions(n, t) {
                let (lhs, rhs) = match family {
                    YbeFamily::RankU | YbeFamily::RankW => {
                        let f = if family == YbeFamily::RankU { weight_u } else { weight_w_rank };
                        (
                            f(l, m, &cc(i1, j1, &i2, &j2), x / y, q)?
                                * f(l, t, &cc(k1, &j2, &k2, j3), x / z, q)?
                                * f(m, t, &cc(&k2, &i2, k3, i3), y / z, q)?,
                            f(m, t, &cc(k1, i1, &k2, &i2), y / z, q)?
                                * f(l, t, &cc(&k2, j1, k3, &j2), x / z, q)?
                                * f(l, m, &cc(&i2, &j2, i3, j3), x / y, q)?,
                        )
                    }
                    YbeFamily::RankS => (
                        weight_s_rank(l, m, &cc(i1, j1, &i2, &j2), x, y, qp(t - k1.0[0]), q)?
                            * weight_s_rank(l, t, &cc(k1, &j2, &k2, j3), x, z, v, q)?
                            * weight_s_rank(m, t, &cc(&k2, &i2, k3, i3), y, z, qp(l - j3.0[0]), q)?,
                        weight_s_rank(m, t, &cc(k1, i1, &k2, &i2), y, z, v, q)?
                            * weight_s_rank(l, t, &cc(&k2, j1, k3, &j2), x, z, qp(m - i2.0[0]), q)?
                            * weight_s_rank(l, m, &cc(&i2, &j2, i3, j3), x, y, v, q)?,
                    ),
                    _ => unreachable!("not a rank family"),
                };
                if lhs != C64::new(0.0, 0.0) {
                    acc.l(lhs);
                }
                if rhs != C64::new(0.0, 0.0) {
                    acc.r(rhs);
                }
            }
        }
    }
    Ok(acc)
}

/// Both sides of a Yang–Baxter equation for one boundary.
///
/// `boundary` is (i1, j1, k1, i3, j3, k3) for the uncolored families and the
/// parts of the six compositions I1, J1, K1, I3, J3, K3 for the rank families.
pub fn check_ybe(family: YbeFamily, boundary: &[i64], params: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let name = CheckKind::Ybe(family).name();
    let acc = match family {
        YbeFamily::SixVertexW | YbeFamily::SixVertexChi | YbeFamily::SixVertexS => {
            expect_len(boundary, 6, name)?;
            ybe_six_vertex(family, &six_vertex_cfg(boundary)?, params)?
        }
        YbeFamily::EllipticS => {
            expect_len(boundary, 6, name)?;
            let ctx = ctx_of(params)?;
            let mut cache = EllipticCache { ctx: &ctx, map: HashMap::new() };
            ybe_elliptic(&six_vertex_cfg(boundary)?, params, &mut cache)?
        }
        YbeFamily::RankU | YbeFamily::RankW | YbeFamily::RankS => {
            let n = get_spin(params, "n")? as usize;
            ybe_rank(family, &compositions_of(boundary, n, 6)?, params)?
        }
    };
    Ok(acc.report(name, params, tol))
}

fn product_grid(ranges: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &r in ranges {
        out = out.into_iter().flat_map(|v| (0..=r).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out
}

fn ybe_grid(family: YbeFamily, p: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let name = CheckKind::Ybe(family).name();
    let mut worst = Worst::default();
    match family {
        YbeFamily::SixVertexW | YbeFamily::SixVertexS => {
            for b in product_grid(&[1; 6]) {
                worst.push(ybe_six_vertex(family, &b, p)?.report(name, p, tol));
            }
        }
        YbeFamily::SixVertexChi => {
            let cap = get_count(p, "cap", 6)?;
            for b in product_grid(&[1, 1, cap, 1, 1, cap]) {
                worst.push(ybe_six_vertex(family, &b, p)?.report(name, p, tol));
            }
        }
        YbeFamily::EllipticS => {
            let ctx = ctx_of(p)?;
            let mut cache = EllipticCache { ctx: &ctx, map: HashMap::new() };
            let (j, cap, t) = (get_spin(p, "J")?, get_spin(p, "Lambda")?, get_spin(p, "T")?);
            for b in product_grid(&[cap, j, t, cap, j, t]) {
                worst.push(ybe_elliptic(&b, p, &mut cache)?.report(name, p, tol));
            }
        }
        YbeFamily::RankU | YbeFamily::RankW | YbeFamily::RankS => {
            let n = get_spin(p, "n")? as usize;
            let (l, m, t) = (get_spin(p, "L")? as i64, get_spin(p, "M")? as i64, get_spin(p, "T")? as i64);
            let sets = [m, l, t, m, l, t].map(|s| compositions(n, s));
            let idx = product_grid(&sets.clone().map(|s| s.len() as u32 - 1));
            for ix in idx {
                let comps: Vec<Composition> = ix.iter().zip(&sets).map(|(&i, s)| s[i as usize].clone()).collect();
                worst.push(ybe_rank(family, &comps, p)?.report(name, p, tol));
            }
        }
    }
    Ok(worst.finish(name, p, tol))
}

// ---------------------------------------------------------------------------
// Tetrahedron equations

fn tetra_equation(kind: TetraKind, p: &ParamMap) -> Result<TetraEquation> {
    Ok(match kind {
        TetraKind::PlainR => TetraEquation::PlainR { q: get(p, "q")? },
        TetraKind::DynamicalS => TetraEquation::DynamicalS { q: get(p, "q")?, v: get(p, "v")?, w: get(p, "w")? },
        TetraKind::NondynT => TetraEquation::NonDynamicalT { v: get(p, "v")?, w: get(p, "w")? },
    })
}

/// Both sides of a tetrahedron equation; `boundary` lists the six incoming counts
/// followed by the six outgoing counts.
pub fn check_tetrahedron(kind: TetraKind, boundary: &[i64], params: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let name = CheckKind::Tetrahedron(kind).name();
    expect_len(boundary, 12, name)?;
    let b = six_vertex_cfg(boundary)?;
    let incoming: [u32; 6] = b[..6].try_into().expect("length checked");
    let outgoing: [u32; 6] = b[6..].try_into().expect("length checked");
    let sides = tetrahedron_sides(&tetra_equation(kind, params)?, incoming)?;
    let s = sides.get(&outgoing).copied().unwrap_or_default();
    let acc = Acc { lhs: s.lhs, rhs: s.rhs, max_term: s.max_term, terms: s.lhs_terms + s.rhs_terms };
    Ok(acc.report(name, params, tol))
}

fn tetra_grid(kind: TetraKind, p: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let name = CheckKind::Tetrahedron(kind).name();
    let cap = get_count(p, "cap", if kind == TetraKind::NondynT { 3 } else { 2 })?;
    let eq = tetra_equation(kind, p)?;
    let mut worst = Worst::default();
    for n in product_grid(&[cap; 6]) {
        let incoming: [u32; 6] = n.try_into().expect("six entries");
        for s in tetrahedron_sides(&eq, incoming)?.values() {
            let acc = Acc { lhs: s.lhs, rhs: s.rhs, max_term: s.max_term, terms: s.lhs_terms + s.rhs_terms };
            worst.push(acc.report(name, p, tol));
        }
    }
    Ok(worst.finish(name, p, tol))
}

// ---------------------------------------------------------------------------
// Special-function identities

/// Both sides of a special-function identity.
pub fn check_identity(kind: IdentityKind, params: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let name = CheckKind::Identity(kind).name();
    let p = params;
    match kind {
        IdentityKind::ThetaQuartic => {
            let ctx = EllipticContext::new(get(p, "tau")?, get_or(p, "eta", re(0.1)))?;
            let (w, x, y, z) = (get(p, "w")?, get(p, "x")?, get(p, "y")?, get(p, "z")?);
            let f = |u: C64| theta1(u, &ctx);
            let lhs = f(x + z)? * f(x - z)? * f(y + w)? * f(y - w)?;
            let r1 = f(x + y)? * f(x - y)? * f(z + w)? * f(z - w)?;
            let r2 = f(x + w)? * f(x - w)? * f(y + z)? * f(y - z)?;
            let mut acc = Acc::default();
            acc.l(lhs);
            acc.r(r1);
            acc.r(r2);
            Ok(acc.report(name, p, tol))
        }
        IdentityKind::VandermondeChu => {
            let k = get_count(p, "k", 0)? as usize;
            let (b, c) = (get(p, "b")?, get(p, "c")?);
            let spec = HypergeometricSpec {
                kind: SeriesKind::Rational,
                upper: vec![re(-(k as f64)), b],
                lower: vec![c],
                argument: re(1.0),
                termination_index: k,
            };
            Ok(Acc::pair(hypergeometric(&spec)?, vandermonde_rhs(k, b, c)?).report(name, p, tol))
        }
        IdentityKind::QHeine => {
            let k = get_count(p, "k", 0)? as usize;
            let (b, c, z, q) = (get(p, "b")?, get(p, "c")?, get(p, "z")?, get(p, "q")?);
            let spec = HypergeometricSpec {
                kind: SeriesKind::Basic { q },
                upper: vec![q.powi(-(k as i32)), b],
                lower: vec![c],
                argument: z,
                termination_index: k,
            };
            Ok(Acc::pair(hypergeometric(&spec)?, q_heine_rhs(k, b, c, z, q)?).report(name, p, tol))
        }
        IdentityKind::EllipticJackson => {
            let ctx = ctx_of(p)?;
            let n = get_count(p, "k", 1)? as usize;
            let (a, b, c, d) = (get(p, "a")?, get(p, "b")?, get(p, "c")?, get(p, "d")?);
            let e = jackson_balancing_e(a, b, c, d, n, &ctx);
            let tail = [b, c, d, e, 2.0 * ctx.eta * n as f64];
            let lhs = vwp_elliptic(a, &tail, re(1.0), &ctx, n)?;
            Ok(Acc::pair(lhs, jackson_rhs(a, b, c, d, n, &ctx)?).report(name, p, tol))
        }
        IdentityKind::PochMerge => {
            let ctx = ctx_of(p)?;
            let (a, q) = (get(p, "a")?, get(p, "q")?);
            let mut worst = Worst::default();
            for k in -3i64..=3 {
                for m in -3i64..=3 {
                    // A merge whose factors hit a pole is outside the identity's domain.
                    let basic = qpoch(a, q, k).and_then(|x| Ok(x * qpoch(a * q.powi(k as i32), q, m)?));
                    if let (Ok(lhs), Ok(rhs)) = (basic, qpoch(a, q, k + m)) {
                        worst.push(Acc::pair(lhs, rhs).report(name, p, tol));
                    }
                    let shift = a - 2.0 * ctx.eta * (m - k) as f64;
                    let ell = epoch(a, m, &ctx).and_then(|x| Ok(x / epoch(shift, k, &ctx)?));
                    if let (Ok(rhs), Ok(lhs)) = (ell, epoch(a, m - k, &ctx)) {
                        worst.push(Acc::pair(lhs, rhs).report(name, p, tol));
                    }
                }
            }
            Ok(worst.finish(name, p, tol))
        }
    }
}

// ---------------------------------------------------------------------------
// Degenerations and cross-validation

/// A degenerate or alternative evaluation against its closed form, taking the
/// worst agreement over every configuration in range.
pub fn check_degeneration(kind: DegenKind, params: &ParamMap, tol: f64) -> Result<ResidualReport> {
    let name = CheckKind::Degeneration(kind).name();
    let p = params;
    let mut worst = Worst::default();
    let mut push = |a: C64, b: C64| worst.push(Acc::pair(a, b).report(name, p, tol));
    match kind {
        DegenKind::SixVertexV0 => {
            let (x, y, q) = (get(p, "x")?, get(p, "y")?, get(p, "q")?);
            for cfg in SPIN_HALF_CONFIGS {
                push(weight_s6v(cfg, x, y, q, re(0.0))?, weight_w(cfg, x, y, q)?);
            }
        }
        DegenKind::EllipticTrigLimit => {
            let ctx = EllipticContext::new(get_or(p, "tau", C64::new(0.0, 40.0)), get(p, "eta")?)?;
            let (lam, v, x, y) = (get(p, "lambda")?, get(p, "v")?, get(p, "x")?, get(p, "y")?);
            let far = get_or(p, "v_far", C64::new(1e6, 1e6));
            let near = reduce_mod_lattice(far, ctx.tau);
            for cfg in SPIN_HALF_CONFIGS {
                for at in [v, near] {
                    let vp = EllipticVertexParams::new(1, re(1.0), lam, at, x, y);
                    push(weight_s_elliptic(&vp, cfg, &ctx)?, weight_s11_sine(cfg, lam, at, x, y, ctx.eta)?);
                }
                push(
                    weight_s11_sine(cfg, lam, far, x, y, ctx.eta)?,
                    weight_s11_sine_v_infinity(cfg, lam, x, y, ctx.eta)?,
                );
            }
        }
        DegenKind::TetraQ1 => {
            let q = get_or(p, "q", re(1.0 - 1e-5));
            let v = get(p, "v")?;
            let cap = get_count(p, "cap", 3)?;
            for n in product_grid(&[cap; 3]) {
                for cfg in outgoing_tetra(n[0], n[1], n[2]) {
                    push(weight_s_tetra(cfg, q, v)?, weight_t_tetra(cfg, v));
                }
            }
        }
        DegenKind::RankL1ClosedForm => {
            let n = get_spin(p, "n")? as usize;
            let m = get_spin(p, "M")? as i64;
            let (x, y, q, v) = (get(p, "x")?, get(p, "y")?, get(p, "q")?, get(p, "v")?);
            let qm = q.powi(m as i32);
            for i in compositions(n, m) {
                for b in 0..=n {
                    let bc = Composition::unit(b, 1, n);
                    for (k, d) in outgoing_colored(&i, &bc, 1) {
                        let dc = d.color().expect("unit composition");
                        let cfg = ColoredConfig::new(i.clone(), bc.clone(), k.clone(), d);
                        push(weight_s_rank(1, m, &cfg, x, y, v, q)?, weight_s_rank_l1(qm, &i, b, &k, dc, x, y, v, q)?);
                    }
                }
            }
        }
        DegenKind::RankM1Table => {
            let n = get_spin(p, "n")? as usize;
            let (x, y, q, v) = (get(p, "x")?, get(p, "y")?, get(p, "q")?, get(p, "v")?);
            let u = |c: usize| Composition::unit(c, 1, n);
            for a in 0..=n {
                for b in 0..=n {
                    for (c, d) in outgoing_colored(&u(a), &u(b), 1) {
                        let (ci, di) = (c.color().expect("unit"), d.color().expect("unit"));
                        let cfg = ColoredConfig::new(u(a), u(b), c, d);
                        push(weight_s_rank(1, 1, &cfg, x, y, v, q)?, weight_s_colored11(a, b, ci, di, x, y, v, q)?);
                    }
                }
            }
        }
        DegenKind::RankN1Reduction => {
            let (x, y, q, v) = (get(p, "x")?, get(p, "y")?, get(p, "q")?, get(p, "v")?);
            let e = |k: u32| Composition(vec![1 - k as i64, k as i64]);
            for cfg in SPIN_HALF_CONFIGS {
                let cc = ColoredConfig::new(e(cfg.i1), e(cfg.j1), e(cfg.i2), e(cfg.j2));
                push(weight_s_rank(1, 1, &cc, x, y, v, q)?, weight_s6v(cfg, x, y, q, v)?);
            }
        }
        DegenKind::EllipticFrozen => {
            let ctx = ctx_of(p)?;
            let (vp, _) = elliptic_params(p)?;
            let cap = get_count(p, "cap", 3)?;
            for i in 0..=cap {
                for j in 0..=vp.spin_j {
                    let fused = weight_w_fused(&vp, ArrowConfig::new(i, j, i + j, 0), &ctx)?;
                    let frozen = weight_w_frozen(vp.spin_j, vp.spin_lambda, i, j as i64, vp.lambda, vp.x, vp.y, &ctx)?;
                    push(fused, frozen);
                }
            }
        }
        DegenKind::CorrectionElliptic => {
            let ctx = ctx_of(p)?;
            let (mut vp, _) = elliptic_params(p)?;
            let cap = get_spin(p, "Lambda")?;
            vp.spin_t = get(p, "T")?;
            vp.r = get_count(p, "r", 0)?;
            vp.v = vp.curve_v(&ctx);
            for i1 in 0..=cap {
                for j1 in 0..=vp.spin_j {
                    for cfg in outgoing_configs(i1, j1, vp.spin_j) {
                        push(correction_elliptic(&vp, cfg, &ctx)?, correction_elliptic_ratio(&vp, cfg, &ctx)?);
                    }
                }
            }
        }
        DegenKind::CorrectionRank => {
            let n = get_spin(p, "n")? as usize;
            let (l, m, t) = (get_spin(p, "L")? as i64, get_spin(p, "M")? as i64, get_spin(p, "T")? as i64);
            let (x, y, q, z) = (get(p, "x")?, get(p, "y")?, get(p, "q")?, get(p, "z")?);
            let r = Composition((0..=n).map(|c| get_int(p, &format!("R{c}"))).collect::<Result<_>>()?);
            let v = q.powi(-(r.0[0] as i32)) / z;
            for a in compositions(n, m) {
                for b in compositions(n, l) {
                    for (c, d) in outgoing_colored(&a, &b, l) {
                        let cfg = ColoredConfig::new(a.clone(), b.clone(), c, d);
                        let closed = correction_rank(l, m, &cfg, x, y, v, q)?;
                        push(closed, correction_rank_ratio(l, m, &cfg, x, y, q, t, &r, z)?);
                    }
                }
            }
        }
        DegenKind::CorrectionTetra => {
            let q = get(p, "q")?;
            let cap = get_count(p, "cap", 3)?;
            let k5 = get_count(p, "k5", 6)?;
            let v = q.powi(2 * k5 as i32 + 2);
            let freezes = [
                TetraFreeze { k4: get_count(p, "k4", 2)?, k5, k6: get_count(p, "k6", 9)? },
                TetraFreeze { k4: get_count(p, "k4b", 7)?, k5, k6: get_count(p, "k6b", 12)? },
            ];
            for n in product_grid(&[cap; 3]) {
                for cfg in outgoing_tetra(n[0], n[1], n[2]) {
                    let closed = correction_tetra(cfg, q, v)?;
                    for f in freezes {
                        push(closed, correction_tetra_ratio(cfg, q, f)?);
                    }
                }
            }
        }
    }
    Ok(worst.finish(name, p, tol))
}

// ---------------------------------------------------------------------------
// Grid runner, parameter draws and sweeps

/// Runs a check over its full configuration range and returns the worst report.
pub fn run_check(kind: CheckKind, params: &ParamMap, tol: f64) -> Result<ResidualReport> {
    match kind {
        CheckKind::Identity(k) => check_identity(k, params, tol),
        CheckKind::Stochasticity(f) => {
            let mut worst = Worst::default();
            for inc in all_incoming(f, params)? {
                worst.push(check_stochasticity(f, &inc, params, tol)?);
            }
            Ok(worst.finish(kind.name(), params, tol))
        }
        CheckKind::Ybe(f) => ybe_grid(f, params, tol),
        CheckKind::Tetrahedron(k) => tetra_grid(k, params, tol),
        CheckKind::Degeneration(k) => check_degeneration(k, params, tol),
    }
}

fn uni(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn cplx(rng: &mut ChaCha8Rng, re_lo: f64, re_hi: f64, im: f64) -> C64 {
    let r = uni(rng, re_lo, re_hi);
    let i = if im > 0.0 { uni(rng, -im, im) } else { 0.0 };
    C64::new(r, i)
}

/// Random parameters in the regime used for `kind`. Integer spins default to 1
/// and are meant to be overridden by the plan.
pub fn draw_params(kind: CheckKind, rng: &mut ChaCha8Rng) -> ParamMap {
    use CheckKind::*;
    let mut p = ParamMap::new();
    let mut set = |k: &str, v: C64| {
        p.insert(k.to_string(), v);
    };
    let elliptic = |rng: &mut ChaCha8Rng, set: &mut dyn FnMut(&str, C64)| {
        let taus = [C64::new(0.0, 1.1), C64::new(0.2, 1.3)];
        set("tau", taus[rng.gen_range(0..2)]);
        set("eta", re(uni(rng, 0.05, 0.2)));
        set("lambda", C64::new(uni(rng, 0.2, 0.8), uni(rng, 0.0, 0.1)));
        set("v", C64::new(uni(rng, 0.1, 0.6), uni(rng, 0.0, 0.1)));
        for k in ["x", "y", "z"] {
            set(k, re(uni(rng, 0.0, 0.6)));
        }
    };
    let six = |rng: &mut ChaCha8Rng, set: &mut dyn FnMut(&str, C64)| {
        for k in ["x", "y", "z"] {
            set(k, cplx(rng, 0.2, 2.0, 0.3));
        }
        set("q", cplx(rng, 0.2, 0.8, 0.1));
        set("v", cplx(rng, 0.05, 0.6, 0.1));
        set("s", cplx(rng, 0.1, 0.6, 0.1));
    };
    let rank = |rng: &mut ChaCha8Rng, set: &mut dyn FnMut(&str, C64)| {
        set("q", cplx(rng, 0.2, 0.6, 0.1));
        set("x", cplx(rng, 1.0, 2.0, 0.2));
        set("y", cplx(rng, 0.3, 0.8, 0.1));
        set("z", cplx(rng, 0.5, 1.5, 0.3));
        set("v", cplx(rng, 0.1, 0.5, 0.1));
    };
    let tetra = |rng: &mut ChaCha8Rng, set: &mut dyn FnMut(&str, C64)| {
        set("q", cplx(rng, 0.4, 0.8, 0.1));
        set("v", cplx(rng, 0.1, 0.8, 0.2));
        set("w", cplx(rng, 0.1, 0.8, 0.2));
    };
    match kind {
        Identity(IdentityKind::ThetaQuartic) => {
            let taus = [C64::new(0.0, 1.1), C64::new(0.2, 1.3)];
            set("tau", taus[rng.gen_range(0..2)]);
            for k in ["w", "x", "y", "z"] {
                let (a, b) = (uni(rng, -0.5, 0.5), uni(rng, -0.5, 0.5));
                set(k, C64::new(a, b));
            }
        }
        Identity(IdentityKind::VandermondeChu) => {
            set("k", re(rng.gen_range(0..=5) as f64));
            set("b", cplx(rng, -1.0, 1.0, 0.5));
            set("c", cplx(rng, 0.5, 2.0, 0.5));
        }
        Identity(IdentityKind::QHeine) => {
            set("k", re(rng.gen_range(0..=5) as f64));
            set("q", cplx(rng, 0.2, 0.7, 0.1));
            set("b", cplx(rng, 0.1, 0.6, 0.1));
            set("c", cplx(rng, 0.1, 0.8, 0.1));
            set("z", cplx(rng, 0.1, 0.6, 0.1));
        }
        Identity(IdentityKind::EllipticJackson) => {
            let taus = [C64::new(0.0, 1.1), C64::new(0.2, 1.3)];
            set("tau", taus[rng.gen_range(0..2)]);
            set("eta", re(uni(rng, 0.05, 0.2)));
            set("k", re(rng.gen_range(1..=3) as f64));
            set("a", cplx(rng, 0.5, 1.0, 0.1));
            for k in ["b", "c", "d"] {
                set(k, cplx(rng, 0.05, 0.3, 0.05));
            }
        }
        Identity(IdentityKind::PochMerge) => {
            set("tau", C64::new(0.2, 1.1));
            set("eta", re(uni(rng, 0.05, 0.3)));
            set("a", cplx(rng, 0.1, 0.9, 0.3));
            set("q", cplx(rng, 0.2, 0.8, 0.2));
        }
        Stochasticity(StochFamily::SixVertex)
        | Ybe(YbeFamily::SixVertexW | YbeFamily::SixVertexChi | YbeFamily::SixVertexS)
        | Degeneration(DegenKind::SixVertexV0) => six(rng, &mut set),
        Stochasticity(StochFamily::Elliptic) | Ybe(YbeFamily::EllipticS) => elliptic(rng, &mut set),
        Degeneration(DegenKind::CorrectionElliptic) => {
            elliptic(rng, &mut set);
            set("T", C64::new(uni(rng, 0.5, 2.5), uni(rng, -0.3, 0.3)));
            set("r", re(rng.gen_range(0..=3) as f64));
        }
        Degeneration(DegenKind::EllipticFrozen) => {
            elliptic(rng, &mut set);
            set("Lambda", C64::new(uni(rng, 1.2, 2.8), uni(rng, -0.3, 0.3)));
        }
        Degeneration(DegenKind::EllipticTrigLimit) => {
            set("eta", re(uni(rng, 0.05, 0.2)));
            set("lambda", C64::new(uni(rng, 0.2, 0.8), uni(rng, 0.0, 0.1)));
            set("v", C64::new(uni(rng, 0.1, 0.6), uni(rng, 0.0, 0.1)));
            set("x", re(uni(rng, 0.0, 0.6)));
            set("y", re(uni(rng, 0.0, 0.6)));
        }
        Stochasticity(StochFamily::Rank)
        | Ybe(YbeFamily::RankU | YbeFamily::RankW | YbeFamily::RankS)
        | Degeneration(
            DegenKind::RankL1ClosedForm | DegenKind::RankM1Table | DegenKind::RankN1Reduction | DegenKind::CorrectionRank,
        ) => {
            rank(rng, &mut set);
            // Curve occupancy large enough for every intermediate composition.
            set("R0", re(rng.gen_range(4..=7) as f64));
            for c in 1..=2 {
                set(&format!("R{c}"), re(rng.gen_range(0..=2) as f64));
            }
        }
        Stochasticity(StochFamily::TetraS | StochFamily::TetraT) | Tetrahedron(_) => tetra(rng, &mut set),
        Degeneration(DegenKind::TetraQ1) => {
            tetra(rng, &mut set);
            p.remove("q");
        }
        Degeneration(DegenKind::CorrectionTetra) => {
            set("q", cplx(rng, 0.6, 0.9, 0.1));
            set("k4", re(rng.gen_range(0..=4) as f64));
            set("k4b", re(rng.gen_range(5..=9) as f64));
            set("k5", re(rng.gen_range(6..=9) as f64));
            set("k6", re(rng.gen_range(9..=12) as f64));
            set("k6b", re(rng.gen_range(13..=16) as f64));
        }
    }
    p
}

/// One line of a verification plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanItem {
    pub check: CheckKind,
    pub draws: usize,
    pub seed: u64,
    pub tol: f64,
    /// Values fixed for every draw (spins, caps, or any drawn parameter).
    #[serde(default)]
    pub overrides: ParamMap,
}

impl PlanItem {
    pub fn new(check: CheckKind, draws: usize, seed: u64) -> Self {
        Self { check, draws, seed, tol: check.default_tol(), overrides: ParamMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.overrides.insert(key.to_string(), re(value));
        self
    }
}

/// Runs one draw of a plan item: redraws after poles, at most [`MAX_REDRAWS`] times.
pub fn run_draw(item: &PlanItem, draw: usize) -> ResidualReport {
    let mut rng = ChaCha8Rng::seed_from_u64(item.seed);
    rng.set_stream(draw as u64);
    let name = item.check.name();
    let mut last = None;
    for _ in 0..=MAX_REDRAWS {
        let mut params = draw_params(item.check, &mut rng);
        params.extend(item.overrides.iter().map(|(k, v)| (k.clone(), *v)));
        match run_check(item.check, &params, item.tol) {
            Ok(r) => return r,
            Err(e) if e.is_pole() => last = Some((params, e)),
            Err(e) => return ResidualReport::failed(name, &params, &e),
        }
    }
    let (params, e) = last.expect("at least one attempt");
    ResidualReport::failed(name, &params, &Error::Pole(format!("still hitting poles after {MAX_REDRAWS} redraws: {e}")))
}

/// Runs every draw of every plan item in parallel; reports come back in plan order.
pub fn sweep(plan: &[PlanItem]) -> Vec<ResidualReport> {
    let jobs: Vec<(usize, usize)> =
        plan.iter().enumerate().flat_map(|(i, it)| (0..it.draws).map(move |d| (i, d))).collect();
    jobs.par_iter().map(|&(i, d)| run_draw(&plan[i], d)).collect()
}

/// The full verification plan: identities, stochasticity, Yang–Baxter and
/// tetrahedron equations, cross-validation oracles and degeneration limits.
pub fn default_plan(seed: u64) -> Vec<PlanItem> {
    use CheckKind::*;
    let mut plan = Vec::new();
    let mut next = {
        let mut k = 0u64;
        move || {
            k += 1;
            seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        }
    };
    for k in [
        IdentityKind::ThetaQuartic,
        IdentityKind::VandermondeChu,
        IdentityKind::QHeine,
        IdentityKind::EllipticJackson,
        IdentityKind::PochMerge,
    ] {
        plan.push(PlanItem::new(Identity(k), 100, next()));
    }

    plan.push(PlanItem::new(Stochasticity(StochFamily::SixVertex), 100, next()));
    for j in 1..=3 {
        for cap in 1..=3 {
            plan.push(PlanItem::new(Stochasticity(StochFamily::Elliptic), 25, next()).with("J", j as f64).with("Lambda", cap as f64));
        }
    }
    for n in 1..=2 {
        for l in 1..=2 {
            for m in 1..=2 {
                plan.push(
                    PlanItem::new(Stochasticity(StochFamily::Rank), 25, next())
                        .with("n", n as f64)
                        .with("L", l as f64)
                        .with("M", m as f64),
                );
            }
        }
    }
    plan.push(PlanItem::new(Stochasticity(StochFamily::TetraS), 25, next()));
    plan.push(PlanItem::new(Stochasticity(StochFamily::TetraT), 25, next()));

    for f in [YbeFamily::SixVertexW, YbeFamily::SixVertexChi, YbeFamily::SixVertexS] {
        plan.push(PlanItem::new(Ybe(f), 10, next()));
    }
    plan.push(PlanItem::new(Ybe(YbeFamily::EllipticS), 10, next()));
    for j in 1..=2 {
        for cap in 1..=2 {
            for t in 1..=2 {
                if (j, cap, t) != (1, 1, 1) {
                    plan.push(
                        PlanItem::new(Ybe(YbeFamily::EllipticS), 3, next())
                            .with("J", j as f64)
                            .with("Lambda", cap as f64)
                            .with("T", t as f64),
                    );
                }
            }
        }
    }
    for (n, l, m, t) in [(1, 1, 1, 1), (1, 2, 1, 1), (1, 1, 2, 2), (2, 1, 1, 1), (2, 1, 2, 1)] {
        for f in [YbeFamily::RankU, YbeFamily::RankW] {
            plan.push(
                PlanItem::new(Ybe(f), 2, next())
                    .with("n", n as f64)
                    .with("L", l as f64)
                    .with("M", m as f64)
                    .with("T", t as f64),
            );
        }
    }
    for n in 1..=2 {
        plan.push(PlanItem::new(Ybe(YbeFamily::RankS), 5, next()).with("n", n as f64));
    }

    for k in [TetraKind::PlainR, TetraKind::DynamicalS, TetraKind::NondynT] {
        plan.push(PlanItem::new(Tetrahedron(k), 10, next()));
    }

    for j in 1..=3 {
        for cap in 1..=3 {
            plan.push(
                PlanItem::new(Degeneration(DegenKind::CorrectionElliptic), 4, next())
                    .with("J", j as f64)
                    .with("Lambda", cap as f64),
            );
        }
    }
    for (n, l, m) in [(1, 1, 1), (2, 1, 1), (2, 1, 2), (2, 2, 2)] {
        plan.push(
            PlanItem::new(Degeneration(DegenKind::CorrectionRank), 10, next())
                .with("n", n as f64)
                .with("L", l as f64)
                .with("M", m as f64)
                .with("T", 3.0),
        );
    }
    plan.push(PlanItem::new(Degeneration(DegenKind::CorrectionTetra), 30, next()));
    for j in 1..=3 {
        plan.push(PlanItem::new(Degeneration(DegenKind::EllipticFrozen), 10, next()).with("J", j as f64));
    }
    for n in 1..=2 {
        for m in 1..=3 {
            plan.push(PlanItem::new(Degeneration(DegenKind::RankL1ClosedForm), 10, next()).with("n", n as f64).with("M", m as f64));
        }
        plan.push(PlanItem::new(Degeneration(DegenKind::RankM1Table), 10, next()).with("n", n as f64));
    }
    plan.push(PlanItem::new(Degeneration(DegenKind::RankN1Reduction), 10, next()));
    plan.push(PlanItem::new(Degeneration(DegenKind::SixVertexV0), 30, next()));

    plan.push(PlanItem::new(Degeneration(DegenKind::TetraQ1), 10, next()));
    plan.push(PlanItem::new(Degeneration(DegenKind::EllipticTrigLimit), 10, next()));
    plan
}

/// Counts of reports and failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub failed: usize,
}

pub fn summarize(reports: &[ResidualReport]) -> Summary {
    Summary { total: reports.len(), failed: reports.iter().filter(|r| !r.passed).count() }
}
