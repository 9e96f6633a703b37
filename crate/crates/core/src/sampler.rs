//! Seeded Monte Carlo growth of path ensembles from the stochastic weights.
//!
//! A lattice of `width × height` vertices is swept along the bottom row from left
//! to right, then row by row upward. Each vertex draws its outgoing arrows from the
//! stochastic weights at its dynamical parameters. The spectral parameter v is
//! anchored at the bottom-right vertex and moves left and up; λ (elliptic only) is
//! anchored at the bottom-left vertex and moves right and down. Both are stored as
//! integer offsets, so the propagation rules can be checked exactly.
//!
//! Every vertex has its own ChaCha8 stream derived from (seed, row, col).

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::elliptic::{outgoing_configs, weight_s_elliptic, EllipticVertexParams};
use crate::error::{Error, Result};
use crate::higher_rank::{outgoing_colored, weight_s_rank, ColoredConfig, Composition};
use crate::sixvertex::{weight_s6v, SPIN_HALF_CONFIGS};
use crate::special_fn::EllipticContext;
use crate::tetrahedron::{outgoing_tetra, weight_t_tetra, TetraConfig};

/// Imaginary parts and negative parts below this are treated as rounding.
const ROUNDING_TOL: f64 = 1e-12;
/// Allowed deviation of the total outgoing weight from 1.
const SUM_TOL: f64 = 1e-9;

/// A single vertex with every parameter fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexModel {
    SixVertex { x: C64, y: C64, q: C64, v: C64 },
    Elliptic { params: EllipticVertexParams, ctx: EllipticContext },
    /// Colored weights with L = M = 1; edge labels are colors, 0 meaning empty.
    RankColored { n: usize, x: C64, y: C64, q: C64, v: C64 },
    TetraT { v: C64 },
}

/// The documented six-vertex preset, which keeps every weight in [0, 1] as v shrinks.
pub fn six_vertex_preset() -> VertexModel {
    let c = |r: f64| C64::new(r, 0.0);
    VertexModel::SixVertex { x: c(1.7), y: c(0.6), q: c(0.35), v: c(0.2) }
}

/// The documented colored preset with x > y > 0 and q, v ∈ (0, 1).
pub fn rank_preset(n: usize) -> VertexModel {
    let c = |r: f64| C64::new(r, 0.0);
    VertexModel::RankColored { n, x: c(1.5), y: c(0.5), q: c(0.4), v: c(0.3) }
}

fn unit(color: u32, n: usize) -> Composition {
    Composition::unit(color as usize, 1, n)
}

/// Turns complex weights into probabilities, failing when they are not real,
/// nonnegative and summing to 1.
fn probabilities(weights: Vec<(Vec<u32>, C64)>, context: &str) -> Result<Vec<(Vec<u32>, f64)>> {
    let total: C64 = weights.iter().map(|(_, w)| w).sum();
    let bad = weights.iter().any(|(_, w)| w.im.abs() > ROUNDING_TOL || w.re < -ROUNDING_TOL)
        || (total - 1.0).norm() > SUM_TOL;
    if bad {
        let listed: Vec<String> = weights.iter().map(|(o, w)| format!("{o:?}: {w}")).collect();
        return Err(Error::NonProbabilistic(format!("{context}; weights {}", listed.join(", "))));
    }
    Ok(weights.into_iter().map(|(o, w)| (o, w.re.max(0.0))).collect())
}

/// Outgoing states and their probabilities for the given incoming state.
///
/// Incoming and outgoing states are (vertical, horizontal) counts for the
/// six-vertex and elliptic models, (vertical, horizontal) colors for the
/// colored model, and (n1, n2, n3) for the tetrahedron model.
pub fn vertex_distribution(model: &VertexModel, incoming: &[u32]) -> Result<Vec<(Vec<u32>, f64)>> {
    let want = if matches!(model, VertexModel::TetraT { .. }) { 3 } else { 2 };
    if incoming.len() != want {
        return Err(Error::InvalidIndex(format!("expected {want} incoming entries, got {incoming:?}")));
    }
    let mut weights = Vec::new();
    match model {
        VertexModel::SixVertex { x, y, q, v } => {
            if incoming.iter().any(|&k| k > 1) {
                return Err(Error::InvalidIndex(format!("six-vertex edges carry at most one arrow, got {incoming:?}")));
            }
            for cfg in SPIN_HALF_CONFIGS.iter().filter(|c| c.i1 == incoming[0] && c.j1 == incoming[1]) {
                weights.push((vec![cfg.i2, cfg.j2], weight_s6v(*cfg, *x, *y, *q, *v)?));
            }
        }
        VertexModel::Elliptic { params, ctx } => {
            for cfg in outgoing_configs(incoming[0], incoming[1], params.spin_j) {
                weights.push((vec![cfg.i2, cfg.j2], weight_s_elliptic(params, cfg, ctx)?));
            }
        }
        VertexModel::RankColored { n, x, y, q, v } => {
            if incoming.iter().any(|&c| c as usize > *n) {
                return Err(Error::InvalidIndex(format!("colors must be at most {n}, got {incoming:?}")));
            }
            let (a, b) = (unit(incoming[0], *n), unit(incoming[1], *n));
            for (c, d) in outgoing_colored(&a, &b, 1) {
                let label = vec![c.color().unwrap_or(0) as u32, d.color().unwrap_or(0) as u32];
                let cfg = ColoredConfig::new(a.clone(), b.clone(), c, d);
                weights.push((label, weight_s_rank(1, 1, &cfg, *x, *y, *v, *q)?));
            }
        }
        VertexModel::TetraT { v } => {
            for cfg in outgoing_tetra(incoming[0], incoming[1], incoming[2]) {
                weights.push((vec![cfg.n1p, cfg.n2p, cfg.n3p], weight_t_tetra(cfg, *v)));
            }
        }
    }
    probabilities(weights, &format!("model {model:?}, incoming {incoming:?}"))
}

fn draw<'a>(dist: &'a [(Vec<u32>, f64)], rng: &mut ChaCha8Rng) -> &'a [u32] {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (o, p) in dist {
        acc += p;
        if u < acc {
            return o;
        }
    }
    // Rounding left the total a hair below u; take the last outcome that can occur.
    &dist.iter().rev().find(|(_, p)| *p > 0.0).unwrap_or(&dist[dist.len() - 1]).0
}

fn vertex_rng(seed: u64, row: usize, col: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((row as u64) << 32) | col as u64);
    rng
}

// ---------------------------------------------------------------------------
// Single-vertex statistics

/// Counts of outcomes over independent single-vertex draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    pub draws: u64,
    pub counts: BTreeMap<Vec<u32>, u64>,
}

impl EmpiricalDist {
    pub fn frequency(&self, outcome: &[u32]) -> f64 {
        self.counts.get(outcome).copied().unwrap_or(0) as f64 / self.draws as f64
    }
}

/// `draws` independent draws at one vertex; draw `k` uses stream `k` of `seed`.
pub fn empirical_vertex_dist(model: &VertexModel, incoming: &[u32], draws: u64, seed: u64) -> Result<EmpiricalDist> {
    if draws == 0 {
        return Err(Error::Precondition("need at least one draw".into()));
    }
    let dist = vertex_distribution(model, incoming)?;
    let counts = (0..draws)
        .into_par_iter()
        .fold(BTreeMap::new, |mut m: BTreeMap<Vec<u32>, u64>, k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            *m.entry(draw(&dist, &mut rng).to_vec()).or_default() += 1;
            m
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_default() += c;
            }
            a
        });
    Ok(EmpiricalDist { draws, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of the counts against the exact distribution.
pub fn chi_square_gof(emp: &EmpiricalDist, exact: &[(Vec<u32>, f64)]) -> ChiSquareResult {
    let n = emp.draws as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (o, p) in exact {
        let observed = emp.counts.get(o).copied().unwrap_or(0) as f64;
        if *p > 0.0 {
            statistic += (observed - n * p).powi(2) / (n * p);
            cells += 1;
        } else if observed > 0.0 {
            return ChiSquareResult { statistic: f64::INFINITY, dof: cells, p_value: 0.0 };
        }
    }
    let dof = cells.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        1.0 - chi.cdf(statistic)
    };
    ChiSquareResult { statistic, dof, p_value }
}

// ---------------------------------------------------------------------------
// Two-dimensional lattices

/// Lattice family with its dynamical-parameter-independent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeModel {
    SixVertex { x: C64, y: C64, q: C64 },
    Elliptic { spin_j: u32, spin_lambda: u32, x: C64, y: C64, ctx: EllipticContext },
    /// L = M = 1 colored paths with colors 1..=n.
    RankColored { n: usize, x: C64, y: C64, q: C64 },
}

impl LatticeModel {
    fn vertical_cap(&self) -> u32 {
        match self {
            Self::SixVertex { .. } => 1,
            Self::Elliptic { spin_lambda, .. } => *spin_lambda,
            Self::RankColored { n, .. } => *n as u32,
        }
    }

    fn horizontal_cap(&self) -> u32 {
        match self {
            Self::SixVertex { .. } => 1,
            Self::Elliptic { spin_j, .. } => *spin_j,
            Self::RankColored { n, .. } => *n as u32,
        }
    }

    fn is_colored(&self) -> bool {
        matches!(self, Self::RankColored { .. })
    }
}

/// Lattice shape, incoming boundary and dynamical anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDomain {
    pub width: usize,
    pub height: usize,
    /// Incoming vertical label (count or color) at the bottom of each column.
    pub bottom: Vec<u32>,
    /// Incoming horizontal label at the left of each row, bottom row first.
    pub left: Vec<u32>,
    /// λ at the bottom-left vertex (elliptic only).
    pub lambda0: C64,
    /// v at the bottom-right vertex.
    pub v0: C64,
}

impl LatticeDomain {
    /// A domain with no incoming arrows.
    pub fn empty(width: usize, height: usize, lambda0: C64, v0: C64) -> Self {
        Self { width, height, bottom: vec![0; width], left: vec![0; height], lambda0, v0 }
    }
}

/// Arrow counts at a vertex, with colors for colored models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub i1: u32,
    pub j1: u32,
    pub i2: u32,
    pub j2: u32,
    /// (incoming vertical, incoming horizontal, outgoing vertical, outgoing horizontal).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<[u32; 4]>,
}

/// A sampled lattice configuration; grids are indexed `[row][col]` with row 0 at the bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub width: usize,
    pub height: usize,
    pub vertices: Vec<Vec<VertexRecord>>,
    /// λ = λ0 + 2η·offset (elliptic only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_offset: Option<Vec<Vec<i64>>>,
    /// v = q^offset·v0, or v0 − 2η·offset for the elliptic model.
    pub v_offset: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<C64>>>,
    pub v: Vec<Vec<C64>>,
}

fn arrows(label: u32, colored: bool) -> u32 {
    if colored {
        u32::from(label != 0)
    } else {
        label
    }
}

fn check_domain(model: &LatticeModel, d: &LatticeDomain) -> Result<()> {
    if d.width == 0 || d.height == 0 {
        return Err(Error::Precondition("lattice dimensions must be positive".into()));
    }
    if d.bottom.len() != d.width || d.left.len() != d.height {
        return Err(Error::Precondition(format!(
            "boundary lengths ({}, {}) do not match a {}×{} lattice",
            d.bottom.len(),
            d.left.len(),
            d.width,
            d.height
        )));
    }
    let (vc, hc) = (model.vertical_cap(), model.horizontal_cap());
    if let Some(k) = d.bottom.iter().find(|&&k| k > vc) {
        return Err(Error::InvalidIndex(format!("bottom boundary label {k} exceeds {vc}")));
    }
    if let Some(k) = d.left.iter().find(|&&k| k > hc) {
        return Err(Error::InvalidIndex(format!("left boundary label {k} exceeds {hc}")));
    }
    Ok(())
}

fn lambda_value(model: &LatticeModel, lambda0: C64, offset: i64) -> Option<C64> {
    match model {
        LatticeModel::Elliptic { ctx, .. } => Some(lambda0 + 2.0 * ctx.eta * offset as f64),
        _ => None,
    }
}

fn v_value(model: &LatticeModel, v0: C64, offset: i64) -> C64 {
    match model {
        LatticeModel::SixVertex { q, .. } | LatticeModel::RankColored { q, .. } => q.powi(offset as i32) * v0,
        LatticeModel::Elliptic { ctx, .. } => v0 - 2.0 * ctx.eta * offset as f64,
    }
}

fn local_model(model: &LatticeModel, lambda: Option<C64>, v: C64) -> VertexModel {
    match *model {
        LatticeModel::SixVertex { x, y, q } => VertexModel::SixVertex { x, y, q, v },
        LatticeModel::Elliptic { spin_j, spin_lambda, x, y, ctx } => {
            let lam = lambda.expect("elliptic lattices carry λ");
            let params = EllipticVertexParams::new(spin_j, C64::new(spin_lambda as f64, 0.0), lam, v, x, y);
            VertexModel::Elliptic { params, ctx }
        }
        LatticeModel::RankColored { n, x, y, q } => VertexModel::RankColored { n, x, y, q, v },
    }
}

/// Grows one configuration on the domain; identical inputs give identical output.
pub fn sample_lattice(model: &LatticeModel, domain: &LatticeDomain, seed: u64) -> Result<HeightField> {
    check_domain(model, domain)?;
    let (w, h) = (domain.width, domain.height);
    let colored = model.is_colored();
    let (cap_j, cap_l) = match model {
        LatticeModel::Elliptic { spin_j, spin_lambda, .. } => (*spin_j as i64, *spin_lambda as i64),
        _ => (0, 0),
    };
    let blank = VertexRecord { i1: 0, j1: 0, i2: 0, j2: 0, colors: None };
    let mut vertices = vec![vec![blank; w]; h];
    let mut v_off = vec![vec![0i64; w]; h];
    let mut lam_off = vec![vec![0i64; w]; h];
    let mut lambda = vec![vec![C64::new(0.0, 0.0); w]; h];
    let mut v = vec![vec![C64::new(0.0, 0.0); w]; h];
    let mut up_in = domain.bottom.clone();

    for r in 0..h {
        v_off[r][w - 1] = if r == 0 { 0 } else { v_off[r - 1][w - 1] + vertices[r - 1][w - 1].j2 as i64 };
        for c in (0..w - 1).rev() {
            v_off[r][c] = v_off[r][c + 1] + arrows(up_in[c + 1], colored) as i64;
        }
        let mut h_in = domain.left[r];
        for c in 0..w {
            let (i1, j1) = (arrows(up_in[c], colored), arrows(h_in, colored));
            lam_off[r][c] = match (r, c) {
                (0, 0) => 0,
                (_, 0) => lam_off[r - 1][0] - (2 * j1 as i64 - cap_j),
                _ => lam_off[r][c - 1] + 2 * vertices[r][c - 1].i2 as i64 - cap_l,
            };
            let lam = lambda_value(model, domain.lambda0, lam_off[r][c]);
            v[r][c] = v_value(model, domain.v0, v_off[r][c]);
            lambda[r][c] = lam.unwrap_or_default();
            let local = local_model(model, lam, v[r][c]);
            let dist = vertex_distribution(&local, &[up_in[c], h_in])
                .map_err(|e| match e {
                    Error::NonProbabilistic(m) => Error::NonProbabilistic(format!("vertex (row {r}, col {c}): {m}")),
                    other => other,
                })?;
            let out = draw(&dist, &mut vertex_rng(seed, r, c));
            let (o_v, o_h) = (out[0], out[1]);
            vertices[r][c] = VertexRecord {
                i1,
                j1,
                i2: arrows(o_v, colored),
                j2: arrows(o_h, colored),
                colors: colored.then_some([up_in[c], h_in, o_v, o_h]),
            };
            up_in[c] = o_v;
            h_in = o_h;
        }
    }
    let elliptic = matches!(model, LatticeModel::Elliptic { .. });
    Ok(HeightField {
        width: w,
        height: h,
        vertices,
        lambda_offset: elliptic.then_some(lam_off),
        v_offset: v_off,
        lambda: elliptic.then_some(lambda),
        v,
    })
}

/// Equality up to rounding, so fields survive a text round trip.
fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * b.norm().max(1.0)
}

/// Checks arrow conservation at every vertex, agreement of shared edges with
/// each other and with the boundary, the propagation rules between every pair
/// of neighbouring vertices, and the stored dynamical values against the anchors.
pub fn check_height_field(model: &LatticeModel, domain: &LatticeDomain, f: &HeightField) -> Result<()> {
    let fail = |m: String| Err(Error::Precondition(m));
    let colored = model.is_colored();
    let (cap_j, cap_l) = match model {
        LatticeModel::Elliptic { spin_j, spin_lambda, .. } => (*spin_j as i64, *spin_lambda as i64),
        _ => (0, 0),
    };
    for r in 0..f.height {
        for c in 0..f.width {
            let x = f.vertices[r][c];
            if x.i1 + x.j1 != x.i2 + x.j2 {
                return fail(format!("conservation fails at ({r}, {c}): {x:?}"));
            }
            let below = if r == 0 { domain.bottom[c] } else { label_up(&f.vertices[r - 1][c]) };
            let left = if c == 0 { domain.left[r] } else { label_right(&f.vertices[r][c - 1]) };
            if (label_in_v(&x), label_in_h(&x)) != (below, left) {
                return fail(format!("incoming edges at ({r}, {c}) do not match their neighbours"));
            }
            if colored {
                let [a, b, cv, d] = x.colors.expect("colored records");
                let mut inc = [a, b];
                let mut out = [cv, d];
                inc.sort_unstable();
                out.sort_unstable();
                if inc != out {
                    return fail(format!("colors are not conserved at ({r}, {c}): {x:?}"));
                }
            }
            if c > 0 && f.v_offset[r][c - 1] != f.v_offset[r][c] + x.i1 as i64 {
                return fail(format!("v propagation fails between ({r}, {}) and ({r}, {c})", c - 1));
            }
            if r > 0 && f.v_offset[r][c] != f.v_offset[r - 1][c] + f.vertices[r - 1][c].j2 as i64 {
                return fail(format!("v propagation fails between ({}, {c}) and ({r}, {c})", r - 1));
            }
            if let Some(lo) = &f.lambda_offset {
                if c > 0 && lo[r][c] != lo[r][c - 1] + 2 * f.vertices[r][c - 1].i2 as i64 - cap_l {
                    return fail(format!("λ propagation fails between ({r}, {}) and ({r}, {c})", c - 1));
                }
                if r > 0 && lo[r - 1][c] != lo[r][c] + 2 * x.j1 as i64 - cap_j {
                    return fail(format!("λ propagation fails between ({}, {c}) and ({r}, {c})", r - 1));
                }
                let lam = lambda_value(model, domain.lambda0, lo[r][c]).unwrap_or_default();
                if !f.lambda.as_ref().is_some_and(|g| close(g[r][c], lam)) {
                    return fail(format!("stored λ at ({r}, {c}) differs from the anchor value"));
                }
            }
            if !close(f.v[r][c], v_value(model, domain.v0, f.v_offset[r][c])) {
                return fail(format!("stored v at ({r}, {c}) differs from the anchor value"));
            }
        }
    }
    if f.v_offset[0][f.width - 1] != 0 || f.lambda_offset.as_ref().is_some_and(|lo| lo[0][0] != 0) {
        return fail("anchors are not at zero offset".into());
    }
    Ok(())
}

fn label_in_v(x: &VertexRecord) -> u32 {
    x.colors.map_or(x.i1, |c| c[0])
}

fn label_in_h(x: &VertexRecord) -> u32 {
    x.colors.map_or(x.j1, |c| c[1])
}

fn label_up(x: &VertexRecord) -> u32 {
    x.colors.map_or(x.i2, |c| c[2])
}

fn label_right(x: &VertexRecord) -> u32 {
    x.colors.map_or(x.j2, |c| c[3])
}

impl HeightField {
    /// Rows `row,col,i1,j1,i2,j2`, followed by the four edge colors for colored fields.
    pub fn to_csv(&self) -> String {
        let colored = self.vertices.iter().flatten().any(|x| x.colors.is_some());
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["row", "col", "i1", "j1", "i2", "j2"];
        if colored {
            header.extend(["color_in_v", "color_in_h", "color_out_v", "color_out_h"]);
        }
        wtr.write_record(&header).expect("writing to memory");
        for (r, row) in self.vertices.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                let mut rec = vec![r as u32, c as u32, x.i1, x.j1, x.i2, x.j2];
                rec.extend(x.colors.into_iter().flatten());
                wtr.serialize(rec).expect("writing to memory");
            }
        }
        String::from_utf8(wtr.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("height fields serialize")
    }
}

// ---------------------------------------------------------------------------
// Three-dimensional q → 1 model

/// A sampled box; `vertices[(a·d2 + b)·d3 + c]` is the vertex at (a, b, c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetraField {
    pub dims: [usize; 3],
    pub vertices: Vec<TetraConfig>,
}

impl TetraField {
    pub fn at(&self, a: usize, b: usize, c: usize) -> TetraConfig {
        self.vertices[(a * self.dims[1] + b) * self.dims[2] + c]
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["a", "b", "c", "n1", "n2", "n3", "n1p", "n2p", "n3p"]).expect("writing to memory");
        for a in 0..self.dims[0] {
            for b in 0..self.dims[1] {
                for c in 0..self.dims[2] {
                    let t = self.at(a, b, c);
                    let rec = [a as u32, b as u32, c as u32, t.n1, t.n2, t.n3, t.n1p, t.n2p, t.n3p];
                    wtr.serialize(rec).expect("writing to memory");
                }
            }
        }
        String::from_utf8(wtr.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
    }
}

/// Incoming counts on the three entry faces of a box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetraBoundary {
    /// Axis-1 arrows entering at a = 0, indexed `b·d3 + c`.
    pub face1: Vec<u32>,
    /// Axis-2 arrows entering at b = 0, indexed `a·d3 + c`.
    pub face2: Vec<u32>,
    /// Axis-3 arrows entering at c = 0, indexed `a·d2 + b`.
    pub face3: Vec<u32>,
}

/// Sweeps the box in increasing (a, b, c); at each vertex every incoming axis-2
/// arrow continues with probability v and otherwise turns into one axis-1 and one
/// axis-3 arrow.
pub fn sample_tetra_t(dims: [usize; 3], boundary: &TetraBoundary, v: f64, seed: u64) -> Result<TetraField> {
    let [d1, d2, d3] = dims;
    if dims.contains(&0) {
        return Err(Error::Precondition("box dimensions must be positive".into()));
    }
    if boundary.face1.len() != d2 * d3 || boundary.face2.len() != d1 * d3 || boundary.face3.len() != d1 * d2 {
        return Err(Error::Precondition(format!("boundary face sizes do not match the box {dims:?}")));
    }
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::Precondition(format!("v must lie in (0, 1], got {v}")));
    }
    let idx = |a: usize, b: usize, c: usize| (a * d2 + b) * d3 + c;
    let mut out: Vec<TetraConfig> = vec![TetraConfig::new(0, 0, 0, 0, 0, 0); d1 * d2 * d3];
    for a in 0..d1 {
        for b in 0..d2 {
            for c in 0..d3 {
                let n1 = if a == 0 { boundary.face1[b * d3 + c] } else { out[idx(a - 1, b, c)].n1p };
                let n2 = if b == 0 { boundary.face2[a * d3 + c] } else { out[idx(a, b - 1, c)].n2p };
                let n3 = if c == 0 { boundary.face3[a * d2 + b] } else { out[idx(a, b, c - 1)].n3p };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(idx(a, b, c) as u64);
                let split = (0..n2).filter(|_| rng.gen::<f64>() >= v).count() as u32;
                out[idx(a, b, c)] = TetraConfig::new(n1, n2, n3, n1 + split, n2 - split, n3 + split);
            }
        }
    }
    Ok(TetraField { dims, vertices: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    fn six() -> LatticeModel {
        LatticeModel::SixVertex { x: c(1.7), y: c(0.6), q: c(0.35) }
    }

    fn rank(n: usize) -> LatticeModel {
        LatticeModel::RankColored { n, x: c(1.5), y: c(0.5), q: c(0.4) }
    }

    #[test]
    fn empty_boundary_is_frozen() {
        let d = LatticeDomain::empty(4, 3, c(0.0), c(0.2));
        let f = sample_lattice(&six(), &d, 9).unwrap();
        assert!(f.vertices.iter().flatten().all(|x| (x.i1, x.j1, x.i2, x.j2) == (0, 0, 0, 0)));
        assert!(f.v.iter().flatten().all(|&v| v == c(0.2)));
        check_height_field(&six(), &d, &f).unwrap();
    }

    #[test]
    fn six_vertex_lattice_invariants_and_determinism() {
        let d = LatticeDomain { width: 6, height: 5, bottom: vec![1, 0, 1, 1, 0, 1], left: vec![1, 1, 0, 1, 0], lambda0: c(0.0), v0: c(0.2) };
        let a = sample_lattice(&six(), &d, 7).unwrap();
        check_height_field(&six(), &d, &a).unwrap();
        let b = sample_lattice(&six(), &d, 7).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
        let arrows_in: u32 = d.bottom.iter().chain(&d.left).sum();
        let arrows_out: u32 = a.vertices[4].iter().map(|x| x.i2).sum::<u32>() + a.vertices.iter().map(|r| r[5].j2).sum::<u32>();
        assert_eq!(arrows_in, arrows_out);
    }

    #[test]
    fn colored_lattice_invariants() {
        let d = LatticeDomain { width: 5, height: 4, bottom: vec![1, 2, 0, 2, 1], left: vec![2, 0, 1, 1], lambda0: c(0.0), v0: c(0.3) };
        let f = sample_lattice(&rank(2), &d, 11).unwrap();
        check_height_field(&rank(2), &d, &f).unwrap();
        assert!(f.to_csv().starts_with("row,col,i1,j1,i2,j2,color_in_v,color_in_h,color_out_v,color_out_h\n"));
    }

    #[test]
    fn elliptic_lattice_invariants() {
        let ctx = EllipticContext::new(C64::new(0.0, 1.1), c(0.05)).unwrap();
        let m = LatticeModel::Elliptic { spin_j: 1, spin_lambda: 1, x: c(0.1), y: c(0.3), ctx };
        let d = LatticeDomain { width: 4, height: 4, bottom: vec![1, 0, 1, 0], left: vec![1, 0, 1, 1], lambda0: c(0.3), v0: c(0.6) };
        for seed in 0..5 {
            let f = sample_lattice(&m, &d, seed).unwrap();
            check_height_field(&m, &d, &f).unwrap();
            assert!(f.lambda.is_some());
        }
    }

    #[test]
    fn tampered_field_is_rejected() {
        let d = LatticeDomain { width: 3, height: 3, bottom: vec![1, 1, 0], left: vec![1, 0, 1], lambda0: c(0.0), v0: c(0.2) };
        let mut f = sample_lattice(&six(), &d, 3).unwrap();
        f.v_offset[2][0] += 1;
        assert!(check_height_field(&six(), &d, &f).is_err());
    }

    #[test]
    fn capacity_violation_is_rejected() {
        let d = LatticeDomain { width: 2, height: 1, bottom: vec![2, 0], left: vec![0], lambda0: c(0.0), v0: c(0.2) };
        assert!(matches!(sample_lattice(&six(), &d, 1), Err(Error::InvalidIndex(_))));
    }

    #[test]
    fn non_probabilistic_weights_are_reported() {
        let m = VertexModel::SixVertex { x: c(0.3), y: c(1.2), q: c(0.35), v: c(0.2) };
        let e = vertex_distribution(&m, &[1, 0]).unwrap_err();
        assert!(matches!(e, Error::NonProbabilistic(_)), "{e:?}");
    }

    #[test]
    fn single_draw_has_frequency_one() {
        let e = empirical_vertex_dist(&six_vertex_preset(), &[1, 1], 1, 5).unwrap();
        assert_eq!(e.counts.values().sum::<u64>(), 1);
        assert_eq!(e.counts.len(), 1);
    }

    #[test]
    fn tetra_t_without_axis_two_arrows_passes_through() {
        let b = TetraBoundary { face1: vec![1; 4], face2: vec![0; 4], face3: vec![2; 4] };
        let f = sample_tetra_t([2, 2, 2], &b, 0.4, 1).unwrap();
        assert!(f.vertices.iter().all(|t| t.n1 == t.n1p && t.n3 == t.n3p && t.n2p == 0));
    }

    #[test]
    fn tetra_t_never_splits_at_v_one() {
        let b = TetraBoundary { face1: vec![0; 9], face2: vec![3; 9], face3: vec![1; 9] };
        let f = sample_tetra_t([3, 3, 3], &b, 1.0, 2).unwrap();
        assert!(f.vertices.iter().all(|t| t.n2 == t.n2p));
    }

    #[test]
    fn chi_square_of_exact_counts_is_zero() {
        let exact = vec![(vec![0], 0.25), (vec![1], 0.75)];
        let emp = EmpiricalDist { draws: 100, counts: BTreeMap::from([(vec![0], 25), (vec![1], 75)]) };
        let r = chi_square_gof(&emp, &exact);
        assert_eq!((r.statistic, r.dof, r.p_value), (0.0, 1, 1.0));
    }
}
