//! Command-line front end: evaluate weights, run verification sweeps and samplers.

mod settings;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use stochvertex::elliptic::{outgoing_configs, weight_s_elliptic, weight_w_fused, EllipticVertexParams};
use stochvertex::higher_rank::{outgoing_colored, weight_s_rank, weight_u, weight_w_rank, ColoredConfig, Composition};
use stochvertex::sampler::{
    chi_square_gof, empirical_vertex_dist, sample_lattice, sample_tetra_t, vertex_distribution, LatticeDomain,
    LatticeModel, TetraBoundary, VertexModel,
};
use stochvertex::sixvertex::{weight_chi, weight_s6v, weight_w, ArrowConfig, SPIN_HALF_CONFIGS};
use stochvertex::special_fn::EllipticContext;
use stochvertex::tetrahedron::{outgoing_tetra, weight_r, weight_s_tetra, weight_t_tetra, TetraConfig};
use stochvertex::verify::{default_plan, summarize, sweep, CheckKind, ParamMap, PlanItem, ResidualReport, CHECKS};

use settings::{CliError, CliResult, Settings};

#[derive(Parser)]
#[command(name = "stochvertex", version, about = "Stochastic dynamical vertex weights, identity checks and samplers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print weights for one configuration, or for every outgoing state of an incoming one.
    Weights(Opts),
    /// Run one check (or `all`) and print residual reports.
    Verify(Opts),
    /// Sample a lattice, a 3-D box, or single-vertex statistics.
    Sample(Opts),
    /// Run the full verification plan.
    Selftest(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// JSON object with any of the flags below; flags on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    equation: Option<String>,
    /// Comma-separated arrow counts, colors or composition parts.
    #[arg(long, allow_hyphen_values = true)]
    cfg: Option<String>,
    #[arg(long)]
    cap: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `json` or `csv`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    draws: Option<String>,
    #[arg(long)]
    width: Option<String>,
    #[arg(long)]
    height: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// Incoming labels along the bottom row; one value is repeated across the row.
    #[arg(long)]
    bottom: Option<String>,
    /// Incoming labels along the left column, bottom first.
    #[arg(long)]
    left: Option<String>,
    #[arg(long)]
    face1: Option<String>,
    #[arg(long)]
    face2: Option<String>,
    #[arg(long)]
    face3: Option<String>,
    /// Sample single-vertex statistics instead of a lattice.
    #[arg(long)]
    vertex: bool,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long = "J")]
    spin_j: Option<String>,
    #[arg(long = "Lambda", allow_hyphen_values = true)]
    spin_lambda: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Any other named parameter, e.g. `--param k=3`.
    #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    param: Vec<String>,
}

impl Opts {
    fn settings(self) -> CliResult<Settings> {
        let mut flags: Vec<(String, Option<String>)> = vec![
            ("family".into(), self.family),
            ("equation".into(), self.equation),
            ("cfg".into(), self.cfg),
            ("cap".into(), self.cap),
            ("seed".into(), self.seed),
            ("tol".into(), self.tol),
            ("out".into(), self.out),
            ("format".into(), self.format),
            ("draws".into(), self.draws),
            ("width".into(), self.width),
            ("height".into(), self.height),
            ("depth".into(), self.depth),
            ("bottom".into(), self.bottom),
            ("left".into(), self.left),
            ("face1".into(), self.face1),
            ("face2".into(), self.face2),
            ("face3".into(), self.face3),
            ("vertex".into(), self.vertex.then(|| "true".to_string())),
            ("x".into(), self.x),
            ("y".into(), self.y),
            ("z".into(), self.z),
            ("q".into(), self.q),
            ("s".into(), self.s),
            ("v".into(), self.v),
            ("w".into(), self.w),
            ("lambda".into(), self.lambda),
            ("eta".into(), self.eta),
            ("tau".into(), self.tau),
            ("J".into(), self.spin_j),
            ("Lambda".into(), self.spin_lambda),
            ("L".into(), self.l),
            ("M".into(), self.m),
            ("T".into(), self.t),
            ("n".into(), self.n),
        ];
        for p in self.param {
            let Some((k, v)) = p.split_once('=') else {
                return Err(CliError::Input(format!("`--param` expects KEY=VALUE, got `{p}`")));
            };
            flags.push((k.trim().to_string(), Some(v.trim().to_string())));
        }
        Settings::load(self.config.as_deref(), flags)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Weights(o) => o.settings().and_then(|s| weights(&s)),
        Cmd::Verify(o) => o.settings().and_then(|s| verify(&s)),
        Cmd::Sample(o) => o.settings().and_then(|s| sample(&s)),
        Cmd::Selftest(o) => o.settings().and_then(|s| selftest(&s)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let err = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            print_out(&pretty(&err));
            ExitCode::from(2)
        }
    }
}

fn emit(s: &Settings, text: &str) -> CliResult<()> {
    match s.str("out") {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {path}: {e}"))),
        None => {
            print_out(text);
            Ok(())
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_out(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn need(p: &ParamMap, key: &str) -> CliResult<C64> {
    p.get(key).copied().ok_or_else(|| CliError::Input(format!("missing parameter --{key}")))
}

fn need_int(p: &ParamMap, key: &str, default: i64) -> CliResult<i64> {
    match p.get(key) {
        None => Ok(default),
        Some(z) if z.im == 0.0 && z.re.fract() == 0.0 => Ok(z.re as i64),
        Some(z) => Err(CliError::Input(format!("--{key} must be an integer, got {z}"))),
    }
}

fn need_count(p: &ParamMap, key: &str, default: i64) -> CliResult<u32> {
    u32::try_from(need_int(p, key, default)?).map_err(|_| CliError::Input(format!("--{key} must be nonnegative")))
}

fn counts(cfg: &[i64]) -> CliResult<Vec<u32>> {
    cfg.iter().map(|&k| u32::try_from(k).map_err(|_| CliError::Input(format!("negative entry {k} in --cfg")))).collect()
}

// ---------------------------------------------------------------------------
// weights

/// How many entries an incoming and a full configuration have for a family.
fn cfg_lengths(family: &str, p: &ParamMap) -> CliResult<(usize, usize)> {
    Ok(match family {
        "six-vertex" | "six-vertex-w" | "six-vertex-chi" | "elliptic" | "elliptic-w" => (2, 4),
        "rank" | "rank-u" | "rank-w" => {
            let parts = need_count(p, "n", 1)? as usize + 1;
            (2 * parts, 4 * parts)
        }
        "tetra" | "tetra-r" | "tetra-t" => (3, 6),
        other => {
            return Err(CliError::Input(format!(
                "unknown family `{other}`; expected six-vertex, six-vertex-w, six-vertex-chi, elliptic, elliptic-w, \
                 rank, rank-u, rank-w, tetra, tetra-r or tetra-t"
            )))
        }
    })
}

fn elliptic_setup(p: &ParamMap) -> CliResult<(EllipticVertexParams, EllipticContext)> {
    let ctx = EllipticContext::new(need(p, "tau")?, need(p, "eta")?)?;
    let spin_j = need_count(p, "J", 1)?;
    let cap = p.get("Lambda").copied().unwrap_or(C64::new(1.0, 0.0));
    let vp = EllipticVertexParams::new(spin_j, cap, need(p, "lambda")?, need(p, "v")?, need(p, "x")?, need(p, "y")?);
    Ok((vp, ctx))
}

fn rank_config(cfg: &[i64], parts: usize) -> ColoredConfig {
    let c: Vec<Composition> = cfg.chunks(parts).map(|c| Composition(c.to_vec())).collect();
    ColoredConfig::new(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone())
}

fn weight_of(family: &str, cfg: &[i64], p: &ParamMap) -> CliResult<C64> {
    Ok(match family {
        "six-vertex" | "six-vertex-w" | "six-vertex-chi" | "elliptic" | "elliptic-w" => {
            let k = counts(cfg)?;
            let a = ArrowConfig::new(k[0], k[1], k[2], k[3]);
            match family {
                "six-vertex" => weight_s6v(a, need(p, "x")?, need(p, "y")?, need(p, "q")?, need(p, "v")?)?,
                "six-vertex-w" => weight_w(a, need(p, "x")?, need(p, "y")?, need(p, "q")?)?,
                "six-vertex-chi" => weight_chi(a, need(p, "x")?, need(p, "y")?, need(p, "q")?, need(p, "s")?)?,
                "elliptic" => {
                    let (vp, ctx) = elliptic_setup(p)?;
                    weight_s_elliptic(&vp, a, &ctx)?
                }
                _ => {
                    let (vp, ctx) = elliptic_setup(p)?;
                    weight_w_fused(&vp, a, &ctx)?
                }
            }
        }
        "rank" | "rank-u" | "rank-w" => {
            let parts = need_count(p, "n", 1)? as usize + 1;
            let (l, m) = (need_int(p, "L", 1)?, need_int(p, "M", 1)?);
            let c = rank_config(cfg, parts);
            match family {
                "rank" => weight_s_rank(l, m, &c, need(p, "x")?, need(p, "y")?, need(p, "v")?, need(p, "q")?)?,
                "rank-u" => weight_u(l, m, &c, need(p, "z")?, need(p, "q")?)?,
                _ => weight_w_rank(l, m, &c, need(p, "z")?, need(p, "q")?)?,
            }
        }
        _ => {
            let k = counts(cfg)?;
            let t = TetraConfig::new(k[0], k[1], k[2], k[3], k[4], k[5]);
            match family {
                "tetra" => weight_s_tetra(t, need(p, "q")?, need(p, "v")?)?,
                "tetra-r" => weight_r(t, need(p, "q")?)?,
                _ => weight_t_tetra(t, need(p, "v")?),
            }
        }
    })
}

/// Full configurations reachable from an incoming state.
fn completions(family: &str, inc: &[i64], p: &ParamMap) -> CliResult<Vec<Vec<i64>>> {
    let cat = |a: &[i64], b: &[i64]| [a, b].concat();
    Ok(match family {
        "six-vertex" | "six-vertex-w" | "six-vertex-chi" => SPIN_HALF_CONFIGS
            .iter()
            .filter(|c| c.i1 as i64 == inc[0] && c.j1 as i64 == inc[1])
            .map(|c| cat(inc, &[c.i2 as i64, c.j2 as i64]))
            .collect(),
        "elliptic" | "elliptic-w" => {
            let k = counts(inc)?;
            outgoing_configs(k[0], k[1], need_count(p, "J", 1)?)
                .into_iter()
                .map(|c| cat(inc, &[c.i2 as i64, c.j2 as i64]))
                .collect()
        }
        "rank" | "rank-u" | "rank-w" => {
            let parts = inc.len() / 2;
            let (a, b) = (Composition(inc[..parts].to_vec()), Composition(inc[parts..].to_vec()));
            outgoing_colored(&a, &b, need_int(p, "L", 1)?).into_iter().map(|(c, d)| cat(inc, &cat(&c.0, &d.0))).collect()
        }
        _ => {
            let k = counts(inc)?;
            outgoing_tetra(k[0], k[1], k[2])
                .into_iter()
                .map(|t| cat(inc, &[t.n1p as i64, t.n2p as i64, t.n3p as i64]))
                .collect()
        }
    })
}

fn weights(s: &Settings) -> CliResult<ExitCode> {
    let family = s.str("family").ok_or_else(|| CliError::Input("weights needs --family".into()))?;
    let cfg = s.list("cfg")?.ok_or_else(|| CliError::Input("weights needs --cfg".into()))?;
    let p = s.params()?;
    let (n_in, n_full) = cfg_lengths(family, &p)?;
    let out = if cfg.len() == n_full {
        json!({"family": family, "cfg": cfg, "weight": weight_of(family, &cfg, &p)?})
    } else if cfg.len() == n_in {
        let mut total = C64::new(0.0, 0.0);
        let mut rows = Vec::new();
        for full in completions(family, &cfg, &p)? {
            let w = weight_of(family, &full, &p)?;
            total += w;
            rows.push(json!({"cfg": full, "weight": w}));
        }
        json!({"family": family, "incoming": cfg, "outgoing": rows, "total": total})
    } else {
        return Err(CliError::Input(format!(
            "--cfg for `{family}` takes {n_in} incoming or {n_full} full entries, got {}",
            cfg.len()
        )));
    };
    emit(s, &pretty(&out))?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify and selftest

fn report_json(reports: &[ResidualReport]) -> Value {
    let sum = summarize(reports);
    json!({"runs": reports, "summary": sum})
}

fn exit_for(reports: &[ResidualReport]) -> ExitCode {
    if summarize(reports).failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verify(s: &Settings) -> CliResult<ExitCode> {
    let name = s.str("equation").ok_or_else(|| CliError::Input("verify needs --equation (or `all`)".into()))?;
    let seed = s.int("seed")?.unwrap_or(0) as u64;
    let reports = if name == "all" {
        sweep(&default_plan(seed))
    } else {
        let check = CheckKind::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
            CliError::Input(format!("unknown equation `{name}`; expected one of: all, {}", names.join(", ")))
        })?;
        let draws = s.int("draws")?.unwrap_or(1).max(1) as usize;
        let mut item = PlanItem::new(check, draws, seed);
        if let Some(tol) = s.real("tol")? {
            item.tol = tol;
        }
        item.overrides = s.params()?;
        sweep(&[item])
    };
    emit(s, &pretty(&report_json(&reports)))?;
    Ok(exit_for(&reports))
}

fn selftest(s: &Settings) -> CliResult<ExitCode> {
    let seed = s.int("seed")?.unwrap_or(42) as u64;
    let reports = sweep(&default_plan(seed));
    let mut by_check: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for r in &reports {
        let e = by_check.entry(&r.equation).or_insert((0, 0, 0.0));
        e.0 += 1;
        e.1 += usize::from(!r.passed);
        e.2 = e.2.max(r.residual_rel);
    }
    let checks: Vec<Value> = by_check
        .iter()
        .map(|(k, (runs, failed, worst))| json!({"equation": k, "runs": runs, "failed": failed, "worst_residual_rel": worst}))
        .collect();
    if let Some(path) = s.str("out") {
        std::fs::write(path, pretty(&report_json(&reports)))
            .map_err(|e| CliError::Input(format!("cannot write {path}: {e}")))?;
    }
    print_out(&pretty(&json!({"checks": checks, "summary": summarize(&reports)})));
    Ok(exit_for(&reports))
}

// ---------------------------------------------------------------------------
// sample

fn param_or(p: &ParamMap, key: &str, default: C64) -> C64 {
    p.get(key).copied().unwrap_or(default)
}

fn real(r: f64) -> C64 {
    C64::new(r, 0.0)
}

fn boundary(s: &Settings, key: &str, len: usize) -> CliResult<Vec<u32>> {
    let vals = counts(&s.list(key)?.unwrap_or_else(|| vec![0]))?;
    match vals.len() {
        1 => Ok(vec![vals[0]; len]),
        k if k == len => Ok(vals),
        k => Err(CliError::Input(format!("--{key} needs 1 or {len} entries, got {k}"))),
    }
}

fn vertex_model(family: &str, p: &ParamMap) -> CliResult<VertexModel> {
    Ok(match family {
        "six-vertex" => VertexModel::SixVertex {
            x: param_or(p, "x", real(1.7)),
            y: param_or(p, "y", real(0.6)),
            q: param_or(p, "q", real(0.35)),
            v: param_or(p, "v", real(0.2)),
        },
        "rank" => VertexModel::RankColored {
            n: need_count(p, "n", 1)? as usize,
            x: param_or(p, "x", real(1.5)),
            y: param_or(p, "y", real(0.5)),
            q: param_or(p, "q", real(0.4)),
            v: param_or(p, "v", real(0.3)),
        },
        "elliptic" => {
            let LatticeModel::Elliptic { spin_j, spin_lambda, x, y, ctx } = lattice_model(family, p)? else {
                unreachable!("elliptic family")
            };
            let lam = param_or(p, "lambda", real(0.3));
            let params = EllipticVertexParams::new(spin_j, real(spin_lambda as f64), lam, param_or(p, "v", real(0.6)), x, y);
            VertexModel::Elliptic { params, ctx }
        }
        "tetra-t" => VertexModel::TetraT { v: param_or(p, "v", real(0.5)) },
        other => {
            return Err(CliError::Input(format!("unknown sampling family `{other}`; expected six-vertex, elliptic, rank or tetra-t")))
        }
    })
}

fn lattice_model(family: &str, p: &ParamMap) -> CliResult<LatticeModel> {
    Ok(match family {
        "six-vertex" => LatticeModel::SixVertex {
            x: param_or(p, "x", real(1.7)),
            y: param_or(p, "y", real(0.6)),
            q: param_or(p, "q", real(0.35)),
        },
        "rank" => LatticeModel::RankColored {
            n: need_count(p, "n", 1)? as usize,
            x: param_or(p, "x", real(1.5)),
            y: param_or(p, "y", real(0.5)),
            q: param_or(p, "q", real(0.4)),
        },
        "elliptic" => LatticeModel::Elliptic {
            spin_j: need_count(p, "J", 1)?,
            spin_lambda: need_count(p, "Lambda", 1)?,
            x: param_or(p, "x", real(0.1)),
            y: param_or(p, "y", real(0.3)),
            ctx: EllipticContext::new(param_or(p, "tau", C64::new(0.0, 1.1)), param_or(p, "eta", real(0.05)))?,
        },
        other => return Err(CliError::Input(format!("unknown lattice family `{other}`; expected six-vertex, elliptic or rank"))),
    })
}

fn default_v(family: &str) -> f64 {
    match family {
        "six-vertex" => 0.2,
        "rank" => 0.3,
        "elliptic" => 0.6,
        _ => 0.5,
    }
}

fn sample(s: &Settings) -> CliResult<ExitCode> {
    let family = s.str("family").ok_or_else(|| CliError::Input("sample needs --family".into()))?;
    let p = s.params()?;
    let seed = s.int("seed")?.unwrap_or(0) as u64;
    let format = s.str("format").unwrap_or("csv");
    if !matches!(format, "csv" | "json") {
        return Err(CliError::Input(format!("--format must be csv or json, got `{format}`")));
    }
    let dim = |key: &str| -> CliResult<usize> {
        let k = s.int(key)?.unwrap_or(1);
        usize::try_from(k).ok().filter(|&k| k > 0).ok_or_else(|| CliError::Input(format!("--{key} must be positive")))
    };

    if s.flag("vertex") {
        let model = vertex_model(family, &p)?;
        let inc = counts(&s.list("cfg")?.ok_or_else(|| CliError::Input("vertex sampling needs --cfg".into()))?)?;
        let draws = s.int("draws")?.unwrap_or(100_000).max(1) as u64;
        let exact = vertex_distribution(&model, &inc)?;
        let emp = empirical_vertex_dist(&model, &inc, draws, seed)?;
        let chi = chi_square_gof(&emp, &exact);
        let rows: Vec<Value> = exact
            .iter()
            .map(|(o, pr)| {
                let count = emp.counts.get(o).copied().unwrap_or(0);
                json!({"outgoing": o, "probability": pr, "count": count, "frequency": emp.frequency(o)})
            })
            .collect();
        let out = json!({"family": family, "incoming": inc, "draws": draws, "outcomes": rows, "chi_square": chi});
        emit(s, &pretty(&out))?;
        return Ok(ExitCode::SUCCESS);
    }

    if family == "tetra-t" {
        let dims = [dim("width")?, dim("height")?, dim("depth")?];
        let b = TetraBoundary {
            face1: boundary(s, "face1", dims[1] * dims[2])?,
            face2: boundary(s, "face2", dims[0] * dims[2])?,
            face3: boundary(s, "face3", dims[0] * dims[1])?,
        };
        let v = param_or(&p, "v", real(0.5));
        if v.im != 0.0 {
            return Err(CliError::Input("tetra-t sampling needs a real --v".into()));
        }
        let f = sample_tetra_t(dims, &b, v.re, seed)?;
        let text = if format == "csv" {
            f.to_csv()
        } else {
            serde_json::to_string_pretty(&f).expect("boxes serialize")
        };
        emit(s, text.trim_end())?;
        return Ok(ExitCode::SUCCESS);
    }

    let model = lattice_model(family, &p)?;
    let (w, h) = (dim("width")?, dim("height")?);
    let domain = LatticeDomain {
        width: w,
        height: h,
        bottom: boundary(s, "bottom", w)?,
        left: boundary(s, "left", h)?,
        lambda0: param_or(&p, "lambda", real(0.3)),
        v0: param_or(&p, "v", real(default_v(family))),
    };
    let f = sample_lattice(&model, &domain, seed)?;
    let text = if format == "csv" { f.to_csv() } else { f.to_json() };
    emit(s, text.trim_end())?;
    Ok(ExitCode::SUCCESS)
}
