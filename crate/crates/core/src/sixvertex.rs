//! Spin-½ six-vertex weights, the higher-spin column weights χ_s, and their
//! stochastic dynamical version S with its lattice propagation rule.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::POLE_TOL;

/// Arrow counts at a vertex: incoming vertical/horizontal, outgoing vertical/horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArrowConfig {
    pub i1: u32,
    pub j1: u32,
    pub i2: u32,
    pub j2: u32,
}

impl ArrowConfig {
    pub const fn new(i1: u32, j1: u32, i2: u32, j2: u32) -> Self {
        Self { i1, j1, i2, j2 }
    }

    pub fn conserving(&self) -> bool {
        self.i1 + self.j1 == self.i2 + self.j2
    }
}

/// The six configurations with unit capacities.
pub const SPIN_HALF_CONFIGS: [ArrowConfig; 6] = [
    ArrowConfig::new(0, 0, 0, 0),
    ArrowConfig::new(1, 0, 1, 0),
    ArrowConfig::new(1, 0, 0, 1),
    ArrowConfig::new(0, 1, 1, 0),
    ArrowConfig::new(0, 1, 0, 1),
    ArrowConfig::new(1, 1, 1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SixVertexParams {
    pub x: C64,
    pub y: C64,
    pub q: C64,
    pub s: C64,
    pub v: C64,
    pub k: u32,
    pub z: C64,
}

impl SixVertexParams {
    /// The dynamical parameter s·q^k/z attached to the curve occupancy k.
    pub fn curve_v(&self) -> C64 {
        self.s * self.q.powi(self.k as i32) / self.z
    }
}

fn den(d: C64, what: &str) -> Result<C64> {
    if d.norm() < POLE_TOL {
        Err(Error::Pole(format!("{what} vanishes")))
    } else {
        Ok(d)
    }
}

pub fn weight_w(cfg: ArrowConfig, x: C64, y: C64, q: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let d = den(x - q * y, "x - q y")?;
    Ok(match (cfg.i1, cfg.j1, cfg.i2, cfg.j2) {
        (0, 0, 0, 0) | (1, 1, 1, 1) => one,
        (1, 0, 1, 0) => q * (x - y) / d,
        (1, 0, 0, 1) => (one - q) * x / d,
        (0, 1, 1, 0) => (one - q) * y / d,
        (0, 1, 0, 1) => (x - y) / d,
        _ => C64::new(0.0, 0.0),
    })
}

/// Column weight with spin parameter `s`; the vertical count `i1` is unbounded.
pub fn weight_chi(cfg: ArrowConfig, x: C64, y: C64, q: C64, s: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let d = den(y - s * x, "y - s x")?;
    let k = cfg.i1 as i32;
    Ok(match (cfg.j1, cfg.j2) {
        (0, 0) if cfg.i2 == cfg.i1 => (y - s * q.powi(k) * x) / d,
        (0, 1) if cfg.i1 >= 1 && cfg.i2 == cfg.i1 - 1 => (one - s * s * q.powi(k - 1)) * x / d,
        (1, 0) if cfg.i2 == cfg.i1 + 1 => (one - q.powi(k + 1)) * y / d,
        (1, 1) if cfg.i2 == cfg.i1 => (x - s * q.powi(k) * y) / d,
        _ => C64::new(0.0, 0.0),
    })
}

/// Stochastic dynamical weight; the outgoing weights at fixed (i1, j1) sum to one.
pub fn weight_s6v(cfg: ArrowConfig, x: C64, y: C64, q: C64, v: C64) -> Result<C64> {
    if cfg.i1 > 1 || cfg.j1 > 1 || cfg.i2 > 1 || cfg.j2 > 1 {
        return Err(Error::InvalidIndex(format!("spin-1/2 configuration expected, got {cfg:?}")));
    }
    let one = C64::new(1.0, 0.0);
    let d = den(x - q * y, "x - q y")?;
    Ok(match (cfg.i1, cfg.j1, cfg.i2, cfg.j2) {
        (0, 0, 0, 0) | (1, 1, 1, 1) => one,
        (1, 0, 1, 0) => q * (x - y) * (one - v * x) / (d * den(one - q * v * x, "1 - q v x")?),
        (1, 0, 0, 1) => (one - q) * x * (one - q * v * y) / (d * den(one - q * v * x, "1 - q v x")?),
        (0, 1, 1, 0) => (one - q) * y * (one - v * x) / (d * den(one - v * y, "1 - v y")?),
        (0, 1, 0, 1) => (x - y) * (one - q * v * y) / (d * den(one - v * y, "1 - v y")?),
        _ => C64::new(0.0, 0.0),
    })
}

/// The weight w multiplied by the ratio of frozen χ_s weights that an auxiliary
/// curve with occupancy `k` and rapidity `z` picks up when pushed through the vertex.
pub fn stochasticize_ratio_6v(cfg: ArrowConfig, x: C64, y: C64, q: C64, s: C64, k: u32, z: C64) -> Result<C64> {
    let ArrowConfig { i1, j1, i2, j2 } = cfg;
    let chi = |a: u32, b: u32, r: C64| weight_chi(ArrowConfig::new(a, b, a + b, 0), r, z, q, s);
    let num = chi(k, j2, x)? * chi(k + j2, i2, y)?;
    let d = chi(k + i1, j1, x)? * chi(k, i1, y)?;
    let d = den(d, "frozen column weight")?;
    Ok(weight_w(cfg, x, y, q)? * num / d)
}

/// Dynamical parameters of the left and upper neighbours.
pub fn propagate_6v(v: C64, q: C64, cfg: ArrowConfig) -> (C64, C64) {
    (q.powi(cfg.i1 as i32) * v, q.powi(cfg.j2 as i32) * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn w_examples() {
        let w = weight_w(ArrowConfig::new(1, 0, 0, 1), c(2.0), c(1.0), c(0.5)).unwrap();
        assert!((w - 2.0 / 3.0).norm() < 1e-15);
        assert_eq!(weight_w(ArrowConfig::new(0, 0, 0, 0), c(2.0), c(1.0), c(0.5)).unwrap(), c(1.0));
        assert_eq!(weight_w(ArrowConfig::new(2, 0, 2, 0), c(2.0), c(1.0), c(0.5)).unwrap(), c(0.0));
        assert!(weight_w(ArrowConfig::new(1, 0, 1, 0), c(0.5), c(1.0), c(0.5)).unwrap_err().is_pole());
    }

    #[test]
    fn chi_examples() {
        let v = weight_chi(ArrowConfig::new(1, 1, 2, 0), c(1.0), c(3.0), c(0.5), c(0.2)).unwrap();
        assert!((v - 0.75 * 3.0 / 2.8).norm() < 1e-14);
        assert_eq!(weight_chi(ArrowConfig::new(0, 0, 0, 0), c(1.0), c(3.0), c(0.5), c(0.2)).unwrap(), c(1.0));
        assert_eq!(weight_chi(ArrowConfig::new(1, 0, 1, 1), c(1.0), c(3.0), c(0.5), c(0.2)).unwrap(), c(0.0));
    }

    #[test]
    fn s_is_stochastic_at_preset() {
        let (x, y, q, v) = (c(1.7), c(0.6), c(0.35), c(0.2));
        let a = weight_s6v(ArrowConfig::new(1, 0, 1, 0), x, y, q, v).unwrap();
        let b = weight_s6v(ArrowConfig::new(1, 0, 0, 1), x, y, q, v).unwrap();
        assert!((a + b - 1.0).norm() < 1e-15);
    }

    #[test]
    fn s_at_zero_is_w() {
        for cfg in SPIN_HALF_CONFIGS {
            let s = weight_s6v(cfg, c(1.3), c(0.4), c(0.3), c(0.0)).unwrap();
            let w = weight_w(cfg, c(1.3), c(0.4), c(0.3)).unwrap();
            assert!((s - w).norm() < 1e-15);
        }
    }

    #[test]
    fn ratio_equals_closed_form() {
        let p = SixVertexParams { x: c(1.3), y: c(0.5), q: c(0.3), s: c(0.15), v: c(0.0), k: 2, z: c(0.9) };
        for cfg in SPIN_HALF_CONFIGS {
            let r = stochasticize_ratio_6v(cfg, p.x, p.y, p.q, p.s, p.k, p.z).unwrap();
            let s = weight_s6v(cfg, p.x, p.y, p.q, p.curve_v()).unwrap();
            assert!((r - s).norm() < 1e-13, "{cfg:?}: {r} vs {s}");
        }
    }

    #[test]
    fn propagation_examples() {
        let v = c(0.7);
        assert_eq!(propagate_6v(v, c(0.5), ArrowConfig::new(0, 0, 0, 0)), (v, v));
        assert_eq!(propagate_6v(v, c(0.5), ArrowConfig::new(1, 0, 0, 1)), (c(0.35), c(0.35)));
        assert_eq!(propagate_6v(v, c(0.5), ArrowConfig::new(0, 1, 1, 0)), (v, v));
    }
}
