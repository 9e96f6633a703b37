//! Colored (rank n) fused weights U and W, their frozen factorization, the
//! stochastic correction and the stochastic weights S_{L;M}.
//!
//! Edge states are compositions of length n+1; slot 0 counts empty places and
//! slots 1..n count paths of each color.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{inv_qfactorial, qpoch, POLE_TOL};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition(pub Vec<i64>);

impl Composition {
    pub fn zero(n: usize) -> Self {
        Composition(vec![0; n + 1])
    }

    /// `k` copies of color `color` in rank `n`.
    pub fn unit(color: usize, k: i64, n: usize) -> Self {
        let mut c = Self::zero(n);
        c.0[color] = k;
        c
    }

    pub fn rank(&self) -> usize {
        self.0.len() - 1
    }

    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Parts of colors 1..n.
    pub fn bar(&self) -> &[i64] {
        &self.0[1..]
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&p| p >= 0)
    }

    pub fn add(&self, o: &Composition) -> Composition {
        Composition(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Composition) -> Composition {
        Composition(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    /// The single nonzero color of a unit composition.
    pub fn color(&self) -> Option<usize> {
        if self.size() != 1 || !self.is_valid() {
            return None;
        }
        self.0.iter().position(|&p| p == 1)
    }
}

impl From<Vec<i64>> for Composition {
    fn from(v: Vec<i64>) -> Self {
        Composition(v)
    }
}

/// All compositions of `size` with n+1 parts.
pub fn compositions(n: usize, size: i64) -> Vec<Composition> {
    fn rec(slots: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Composition>) {
        if slots == 1 {
            cur.push(left);
            out.push(Composition(cur.clone()));
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(slots - 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n + 1, size, &mut Vec::new(), &mut out);
    out
}

/// Incoming vertical A, incoming horizontal B, outgoing vertical C, outgoing horizontal D.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColoredConfig {
    pub a: Composition,
    pub b: Composition,
    pub c: Composition,
    pub d: Composition,
}

impl ColoredConfig {
    pub fn new(a: Composition, b: Composition, c: Composition, d: Composition) -> Self {
        Self { a, b, c, d }
    }

    pub fn supported(&self, l: i64, m: i64) -> bool {
        let ok_len = [&self.b, &self.c, &self.d].iter().all(|x| x.0.len() == self.a.0.len());
        ok_len
            && [&self.a, &self.b, &self.c, &self.d].iter().all(|x| x.is_valid())
            && self.a.add(&self.b) == self.c.add(&self.d)
            && self.a.size() == m
            && self.c.size() == m
            && self.b.size() == l
            && self.d.size() == l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankParams {
    pub n: usize,
    pub l: i64,
    pub m: i64,
    pub q: C64,
    pub x: C64,
    pub y: C64,
    pub z: C64,
    pub v: C64,
    pub t: i64,
    pub r: Composition,
}

impl RankParams {
    /// q^{−R₀}/z, the value of v produced by the auxiliary curve.
    pub fn curve_v(&self) -> C64 {
        self.q.powi(-(self.r.0[0] as i32)) / self.z
    }
}

fn den(d: C64, what: &str) -> Result<C64> {
    if d.norm() < POLE_TOL {
        Err(Error::Pole(format!("{what} vanishes")))
    } else {
        Ok(d)
    }
}

fn qpow(q: C64, k: i64) -> C64 {
    q.powi(k as i32)
}

/// Φ(λ, μ; x, y), zero unless λ ≤ μ componentwise.
pub fn phi(lam: &[i64], mu: &[i64], x: C64, y: C64, q: C64) -> Result<C64> {
    if lam.iter().zip(mu).any(|(l, m)| l > m) || lam.iter().any(|&l| l < 0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let sl: i64 = lam.iter().sum();
    let sm: i64 = mu.iter().sum();
    let yx = y / den(x, "x")?;
    let mut r = qpoch(x, q, sl)? * qpoch(yx, q, sm - sl)? / den(qpoch(y, q, sm)?, "(y;q)_|mu|")? * yx.powi(sl as i32);
    let n = lam.len();
    let mut e = 0;
    for i in 0..n {
        for j in i + 1..n {
            e += (mu[i] - lam[i]) * lam[j];
        }
    }
    r *= qpow(q, e);
    for i in 0..n {
        r *= qpoch(q, q, mu[i])? * inv_qfactorial(q, lam[i])? * inv_qfactorial(q, mu[i] - lam[i])?;
    }
    Ok(r)
}

/// Iterate over all P with 0 ≤ P_i ≤ bound_i.
fn for_each_box(bounds: &[i64], mut f: impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
    if bounds.iter().any(|&b| b < 0) {
        return Ok(());
    }
    let mut p = vec![0i64; bounds.len()];
    loop {
        f(&p)?;
        let mut i = 0;
        loop {
            if i == p.len() {
                return Ok(());
            }
            if p[i] < bounds[i] {
                p[i] += 1;
                break;
            }
            p[i] = 0;
            i += 1;
        }
    }
}

fn minus(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn plus(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Fused colored weight U_{L;M}(A, B; C, D | z).
pub fn weight_u(l: i64, m: i64, cfg: &ColoredConfig, z: C64, q: C64) -> Result<C64> {
    if !cfg.supported(l, m) {
        return Ok(C64::new(0.0, 0.0));
    }
    let (ab, bb, cb, db) = (cfg.a.bar(), cfg.b.bar(), cfg.c.bar(), cfg.d.bar());
    let bounds: Vec<i64> = bb.iter().zip(cb).map(|(b, c)| *b.min(c)).collect();
    let x1 = qpow(q, l - m) * z;
    let y1 = qpow(q, -m) * z;
    let x2 = qpow(q, -l) / den(z, "z")?;
    let y2 = qpow(q, -l);
    let cd = plus(cb, db);
    let mut s = C64::new(0.0, 0.0);
    for_each_box(&bounds, |p| {
        s += phi(&minus(cb, p), &minus(&cd, p), x1, y1, q)? * phi(p, bb, x2, y2, q)?;
        Ok(())
    })?;
    let sa: i64 = ab.iter().sum();
    let sb: i64 = bb.iter().sum();
    let sd: i64 = db.iter().sum();
    Ok(z.powi((sd - sb) as i32) * qpow(q, l * sa - m * sd) * s)
}

/// Transposed weight W(A, B; C, D) = U(C, D; A, B).
pub fn weight_w_rank(l: i64, m: i64, cfg: &ColoredConfig, z: C64, q: C64) -> Result<C64> {
    let t = ColoredConfig::new(cfg.c.clone(), cfg.d.clone(), cfg.a.clone(), cfg.b.clone());
    weight_u(l, m, &t, z, q)
}

/// Factored W_{L;M}(I, J; K, L·e₀ | z).
pub fn weight_w_rank_frozen(l: i64, m: i64, i: &Composition, j: &Composition, k: &Composition, z: C64, q: C64) -> Result<C64> {
    let n = i.rank();
    if i.add(j) != k.add(&Composition::unit(0, l, n)) {
        return Err(Error::InvalidIndex("frozen weight needs I + J = K + L e0".into()));
    }
    if !(i.is_valid() && j.is_valid() && k.is_valid()) {
        return Err(Error::InvalidIndex("negative part in frozen weight".into()));
    }
    let j0 = j.0[0];
    let mut r = z.powi((l - j0) as i32) * qpow(q, (m - l) * (j0 - l)) * qpoch(qpow(q, -k.0[0]) * z, q, j0)?
        * qpoch(qpow(q, -l), q, l - j0)?
        / den(qpoch(qpow(q, -m) * z, q, l)?, "(q^-M z;q)_L")?;
    let mut e = 0;
    for s in 1..=n {
        for t in s + 1..=n {
            e += i.0[t] * j.0[s];
        }
    }
    r *= qpow(q, e);
    for s in 1..=n {
        r *= qpoch(q, q, k.0[s])? / den(qpoch(q, q, i.0[s])? * qpoch(q, q, j.0[s])?, "(q;q) factorials")?;
    }
    Ok(r)
}

/// Shared prefactor of the correction and S: Pochhammer ratios in v and factorials.
fn v_prefactor(l: i64, m: i64, cfg: &ColoredConfig, x: C64, y: C64, v: C64, q: C64) -> Result<C64> {
    let (a, b, c, d) = (&cfg.a.0, &cfg.b.0, &cfg.c.0, &cfg.d.0);
    let mut r = qpoch(qpow(q, l - d[0]) * x * v, q, d[0])?
        / den(qpoch(qpow(q, l + m - a[0] - b[0]) * x * v, q, b[0])?, "x v Pochhammer")?
        * qpoch(qpow(q, l + m - c[0] - d[0]) * y * v, q, c[0])?
        / den(qpoch(qpow(q, m - a[0]) * y * v, q, a[0])?, "y v Pochhammer")?;
    for i in 0..a.len() {
        r *= qpoch(q, q, a[i])? * qpoch(q, q, b[i])? / den(qpoch(q, q, c[i])? * qpoch(q, q, d[i])?, "(q;q) factorials")?;
    }
    Ok(r)
}

fn cross_exponent(cfg: &ColoredConfig) -> i64 {
    let (a, b, c, d) = (&cfg.a.0, &cfg.b.0, &cfg.c.0, &cfg.d.0);
    let n = a.len() - 1;
    let mut e = a[0] * b[0] - c[0] * d[0];
    for i in 1..=n {
        for j in i + 1..=n {
            e += d[j] * c[i] - a[j] * b[i];
        }
    }
    e
}

/// Closed-form correction C_{L;M}(A, B; C, D | x, y; v).
pub fn correction_rank(l: i64, m: i64, cfg: &ColoredConfig, x: C64, y: C64, v: C64, q: C64) -> Result<C64> {
    if !cfg.supported(l, m) {
        return Err(Error::InvalidIndex("correction needs a supported configuration".into()));
    }
    let (b0, d0) = (cfg.b.0[0], cfg.d.0[0]);
    let e = (m - l) * (d0 - b0) + cross_exponent(cfg);
    let yx = y / den(x, "x")?;
    Ok(qpow(q, e) * yx.powi((d0 - b0) as i32) * v_prefactor(l, m, cfg, x, y, v, q)?)
}

/// Correction as a ratio of four frozen weights of an auxiliary curve with
/// spin T, occupancy R and rapidity z.
#[allow(clippy::too_many_arguments)]
pub fn correction_rank_ratio(
    l: i64,
    m: i64,
    cfg: &ColoredConfig,
    x: C64,
    y: C64,
    q: C64,
    t: i64,
    r: &Composition,
    z: C64,
) -> Result<C64> {
    let n = r.rank();
    let (a, b, c, d) = (&cfg.a, &cfg.b, &cfg.c, &cfg.d);
    let le = Composition::unit(0, l, n);
    let me = Composition::unit(0, m, n);
    let lme = Composition::unit(0, l + m, n);
    let (xz, yz) = (x / den(z, "z")?, y / z);
    let rd = r.add(d).sub(&le);
    let ra = r.add(a).sub(&me);
    let num = weight_w_rank_frozen(l, t, r, d, &rd, xz, q)?
        * weight_w_rank_frozen(m, t, &rd, c, &r.add(c).add(d).sub(&lme), yz, q)?;
    let dd = weight_w_rank_frozen(l, t, &ra, b, &r.add(a).add(b).sub(&lme), xz, q)?
        * weight_w_rank_frozen(m, t, r, a, &ra, yz, q)?;
    Ok(num / den(dd, "frozen denominator")?)
}

/// Stochastic weight S_{L;M}(A, B; C, D | x, y; v).
pub fn weight_s_rank(l: i64, m: i64, cfg: &ColoredConfig, x: C64, y: C64, v: C64, q: C64) -> Result<C64> {
    if !cfg.supported(l, m) {
        return Ok(C64::new(0.0, 0.0));
    }
    let (b0, c0, d0) = (cfg.b.0[0], cfg.c.0[0], cfg.d.0[0]);
    let e = m * b0 - l * c0 + (m - l) * (d0 - b0) + cross_exponent(cfg);
    let pre = qpow(q, e) * v_prefactor(l, m, cfg, x, y, v, q)?;
    let (ab, bb, db) = (cfg.a.bar(), cfg.b.bar(), cfg.d.bar());
    let bounds: Vec<i64> = ab.iter().zip(db).map(|(a, d)| *a.min(d)).collect();
    let xy = x / den(y, "y")?;
    let yx = y / den(x, "x")?;
    let (x1, y1, x2, y2) = (qpow(q, l - m) * xy, qpow(q, -m) * xy, qpow(q, -l) * yx, qpow(q, -l));
    let aplusb = plus(ab, bb);
    let mut s = C64::new(0.0, 0.0);
    for_each_box(&bounds, |p| {
        s += phi(&minus(ab, p), &minus(&aplusb, p), x1, y1, q)? * phi(p, db, x2, y2, q)?;
        Ok(())
    })?;
    Ok(pre * s)
}

/// Single-path horizontal weights (L = 1) in closed form; `q_pow_m` stands for q^M
/// and may be any complex number. `b` and `d` are the incoming and outgoing horizontal colors.
#[allow(clippy::too_many_arguments)]
pub fn weight_s_rank_l1(
    q_pow_m: C64,
    i: &Composition,
    b: usize,
    k: &Composition,
    d: usize,
    x: C64,
    y: C64,
    v: C64,
    q: C64,
) -> Result<C64> {
    let n = i.rank();
    if i.add(&Composition::unit(b, 1, n)) != k.add(&Composition::unit(d, 1, n)) || !k.is_valid() {
        return Ok(C64::new(0.0, 0.0));
    }
    let one = C64::new(1.0, 0.0);
    let part = |lo: usize, hi: usize| -> i64 { if lo > hi { 0 } else { i.0[lo..=hi].iter().sum() } };
    let qm = q_pow_m;
    let d1 = den(x - qm * y, "x - q^M y")?;
    let shift = qm * qpow(q, -i.0[0]) * v;
    let dy = den(one - shift * y, "1 - q^(M-I0) v y")?;
    let dx = den(one - shift * x, "1 - q^(M-I0) v x")?;
    Ok(if b > 0 && d > 0 && b > d {
        qpow(q, part(1, d - 1)) * (one - qpow(q, i.0[d])) * x * (one - qm * v * y) / (d1 * dy)
    } else if b > 0 && d > 0 && b < d {
        qpow(q, part(1, d - 1)) * (one - qpow(q, i.0[d])) * y * (one - qm * v * y) / (d1 * dy)
    } else if b > 0 && b == d {
        qpow(q, part(1, b - 1)) * (x - qpow(q, i.0[b]) * y) * (one - qm * v * y) / (d1 * dy)
    } else if b > 0 && d == 0 {
        qpow(q, part(1, n)) * (one - qpow(q, i.0[0])) * y * (one - v * x) / (d1 * dy)
    } else if b == 0 && d > 0 {
        qpow(q, part(1, d - 1)) * (one - qpow(q, i.0[d])) * x * (one - qm * v * y) / (d1 * dx)
    } else {
        qpow(q, part(1, n)) * (x - qpow(q, i.0[0]) * y) * (one - v * x) / (d1 * dx)
    })
}

/// L = M = 1 weights indexed by the colors (0 = empty) of the four edges.
pub fn weight_s_colored11(a: usize, b: usize, c: usize, d: usize, x: C64, y: C64, v: C64, q: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let dd = den(x - q * y, "x - q y")?;
    if a == b && c == a && d == a {
        return Ok(one);
    }
    Ok(if b == 0 && c == 0 && a == d {
        (one - q) * x * (one - q * v * y) / (dd * den(one - q * v * x, "1 - q v x")?)
    } else if b == 0 && d == 0 && a == c {
        q * (x - y) * (one - v * x) / (dd * den(one - q * v * x, "1 - q v x")?)
    } else if a == 0 && c == 0 && b == d {
        (x - y) * (one - q * v * y) / (dd * den(one - v * y, "1 - v y")?)
    } else if a == 0 && d == 0 && b == c {
        (one - q) * y * (one - v * x) / (dd * den(one - v * y, "1 - v y")?)
    } else if a > 0 && b > 0 && a < b && c == b && d == a {
        (one - q) * x / dd
    } else if a > 0 && b > 0 && a > b && c == b && d == a {
        (one - q) * y / dd
    } else if a > 0 && b > 0 && a < b && c == a && d == b {
        (x - y) * q / dd
    } else if a > 0 && b > 0 && a > b && c == a && d == b {
        (x - y) / dd
    } else {
        zero
    })
}

/// Outgoing (C, D) compatible with incoming (A, B) and horizontal spin L.
pub fn outgoing_colored(a: &Composition, b: &Composition, l: i64) -> Vec<(Composition, Composition)> {
    let tot = a.add(b);
    compositions(a.rank(), l)
        .into_iter()
        .filter(|d| d.0.iter().zip(&tot.0).all(|(x, t)| x <= t))
        .map(|d| (tot.sub(&d), d))
        .collect()
}

/// Dynamical parameters of the left and upper neighbours.
pub fn propagate_rank(v: C64, cfg: &ColoredConfig, l: i64, m: i64, q: C64) -> (C64, C64) {
    (qpow(q, m - cfg.a.0[0]) * v, qpow(q, l - cfg.d.0[0]) * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn comp(v: &[i64]) -> Composition {
        Composition(v.to_vec())
    }

    #[test]
    fn composition_basics() {
        assert_eq!(compositions(2, 2).len(), 6);
        let a = comp(&[1, 0, 2]);
        assert_eq!(a.size(), 3);
        assert_eq!(a.bar(), &[0, 2]);
        assert!(!a.sub(&comp(&[2, 0, 0])).is_valid());
        assert_eq!(Composition::unit(2, 1, 2).color(), Some(2));
    }

    #[test]
    fn phi_examples() {
        let (x, y, q) = (c(0.3, 0.0), c(0.5, 0.0), c(0.4, 0.0));
        let lam = [1, 2];
        let got = phi(&lam, &lam, x, y, q).unwrap();
        let want = (y / x).powi(3) * qpoch(x, q, 3).unwrap() / qpoch(y, q, 3).unwrap();
        assert!((got - want).norm() < 1e-13 * want.norm());
        let got = phi(&[0, 0], &[2, 1], x, y, q).unwrap();
        let want = qpoch(y / x, q, 3).unwrap() / qpoch(y, q, 3).unwrap();
        assert!((got - want).norm() < 1e-13 * want.norm());
        assert_eq!(phi(&[2, 0], &[1, 1], x, y, q).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn u_single_path_closed_forms() {
        // The closed forms are stated in the reciprocal spectral parameter w = 1/z.
        let (z, q) = (c(0.7, 0.1), c(0.4, 0.05));
        let (m, n) = (3, 2);
        let w = 1.0 / z;
        let den = 1.0 - q.powi(m as i32) * w;
        let tail = |i: &Composition, j: usize| q.powi(i.0[j + 1..].iter().sum::<i64>() as i32);
        let e = |j: usize| Composition::unit(j, 1, n);
        for i in compositions(n, m) {
            for j in 0..=n {
                let cfg = ColoredConfig::new(i.clone(), e(j), i.clone(), e(j));
                let got = weight_u(1, m, &cfg, z, q).unwrap();
                let want = (1.0 - q.powi(i.0[j] as i32) * w) * tail(&i, j) / den;
                assert!((got - want).norm() < 1e-13, "{i:?} {j}: {got} vs {want}");
            }
            for h in 0..n {
                for j in h + 1..=n {
                    if i.0[j] >= 1 {
                        let k = i.sub(&e(j)).add(&e(h));
                        let got = weight_u(1, m, &ColoredConfig::new(i.clone(), e(h), k, e(j)), z, q).unwrap();
                        let want = (1.0 - q.powi(i.0[j] as i32)) * tail(&i, j) / den;
                        assert!((got - want).norm() < 1e-13, "{i:?} {h}->{j}: {got} vs {want}");
                    }
                    if i.0[h] >= 1 {
                        let k = i.sub(&e(h)).add(&e(j));
                        let got = weight_u(1, m, &ColoredConfig::new(i.clone(), e(j), k, e(h)), z, q).unwrap();
                        let want = (1.0 - q.powi(i.0[h] as i32)) * tail(&i, h) * w / den;
                        assert!((got - want).norm() < 1e-13, "{i:?} {j}->{h}: {got} vs {want}");
                    }
                }
            }
        }
        let bad = ColoredConfig::new(comp(&[1, 0, 0]), comp(&[1, 0, 0]), comp(&[1, 0, 0]), comp(&[1, 0, 0]));
        assert_eq!(weight_u(1, 2, &bad, z, q).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn frozen_matches_general_w() {
        let (z, q) = (c(0.6, -0.1), c(0.45, 0.0));
        let (l, m, n) = (2, 2, 2);
        for i in compositions(n, m) {
            for j in compositions(n, l) {
                let k = i.add(&j).sub(&Composition::unit(0, l, n));
                if !k.is_valid() {
                    continue;
                }
                let cfg = ColoredConfig::new(i.clone(), j.clone(), k.clone(), Composition::unit(0, l, n));
                let a = weight_w_rank(l, m, &cfg, z, q).unwrap();
                let b = weight_w_rank_frozen(l, m, &i, &j, &k, z, q).unwrap();
                assert!((a - b).norm() < 1e-11 * b.norm().max(1.0), "{i:?} {j:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn colored_table_matches_general_s() {
        let (x, y, v, q) = (c(1.4, 0.0), c(0.3, 0.0), c(0.2, 0.0), c(0.45, 0.0));
        let n = 3;
        for a in 0..=n {
            for b in 0..=n {
                for cc in 0..=n {
                    for d in 0..=n {
                        let cfg = ColoredConfig::new(
                            Composition::unit(a, 1, n),
                            Composition::unit(b, 1, n),
                            Composition::unit(cc, 1, n),
                            Composition::unit(d, 1, n),
                        );
                        let s = weight_s_rank(1, 1, &cfg, x, y, v, q).unwrap();
                        let t = weight_s_colored11(a, b, cc, d, x, y, v, q).unwrap();
                        assert!((s - t).norm() < 1e-12, "{a}{b}{cc}{d}: {s} vs {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn s_is_stochastic() {
        let (x, y, v, q) = (c(1.3, 0.1), c(0.55, -0.05), c(0.3, 0.1), c(0.37, 0.05));
        for (l, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            for a in compositions(2, m) {
                for b in compositions(2, l) {
                    let total: C64 = outgoing_colored(&a, &b, l)
                        .into_iter()
                        .map(|(cc, d)| weight_s_rank(l, m, &ColoredConfig::new(a.clone(), b.clone(), cc, d), x, y, v, q).unwrap())
                        .sum();
                    assert!((total - 1.0).norm() < 1e-10, "L={l} M={m} {a:?} {b:?}: {total}");
                }
            }
        }
    }

    #[test]
    fn correction_ratio_matches_closed_form() {
        let (x, y, q, z) = (c(1.3, 0.1), c(0.55, -0.05), c(0.37, 0.05), c(0.8, 0.2));
        let r = comp(&[3, 2, 2]);
        let r2 = comp(&[3, 1, 4]);
        let v = q.powi(-3) / z;
        for (l, m) in [(1, 1), (2, 1), (1, 2)] {
            for a in compositions(2, m) {
                for b in compositions(2, l) {
                    for (cc, d) in outgoing_colored(&a, &b, l) {
                        let cfg = ColoredConfig::new(a.clone(), b.clone(), cc, d);
                        let want = correction_rank(l, m, &cfg, x, y, v, q).unwrap();
                        for rr in [&r, &r2] {
                            let got = correction_rank_ratio(l, m, &cfg, x, y, q, 4, rr, z).unwrap();
                            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{cfg:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn l1_closed_form_matches() {
        let (x, y, v, q) = (c(1.3, 0.1), c(0.55, -0.05), c(0.3, 0.1), c(0.37, 0.05));
        let n = 2;
        for m in 1..=3 {
            for i in compositions(n, m) {
                for b in 0..=n {
                    for d in 0..=n {
                        let k = i.add(&Composition::unit(b, 1, n)).sub(&Composition::unit(d, 1, n));
                        if !k.is_valid() {
                            continue;
                        }
                        let got = weight_s_rank_l1(q.powi(m as i32), &i, b, &k, d, x, y, v, q).unwrap();
                        let cfg = ColoredConfig::new(i.clone(), Composition::unit(b, 1, n), k.clone(), Composition::unit(d, 1, n));
                        let want = weight_s_rank(1, m, &cfg, x, y, v, q).unwrap();
                        assert!((got - want).norm() < 1e-11 * want.norm().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn propagation_examples() {
        let (v, q) = (c(0.7, 0.0), c(0.5, 0.0));
        let cfg = ColoredConfig::new(comp(&[0, 1]), comp(&[0, 1]), comp(&[0, 1]), comp(&[0, 1]));
        assert_eq!(propagate_rank(v, &cfg, 1, 1, q), (q * v, q * v));
        let cfg = ColoredConfig::new(comp(&[1, 2]), comp(&[0, 2]), comp(&[1, 2]), comp(&[0, 2]));
        assert_eq!(propagate_rank(v, &cfg, 2, 3, q), (q * q * v, q * q * v));
    }
}
