//! Special parameter values: frozen and extreme spectral parameters, and closed-form specializations.

use stochvertex::elliptic::{outgoing_configs, weight_s_elliptic, weight_s_special, EllipticVertexParams, SpecialKind};
use stochvertex::higher_rank::{compositions, outgoing_colored, weight_s_rank, ColoredConfig};
use stochvertex::sixvertex::{stochasticize_ratio_6v, weight_s6v, SPIN_HALF_CONFIGS};
use stochvertex::special_fn::EllipticContext;
use stochvertex::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn rank_s_at_extreme_v_is_stochastic_and_flat_in_v() {
    let (x, y, q) = (c(1.4, 0.1), c(0.45, -0.05), c(0.35, 0.05));
    for (l, m) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        for a in compositions(2, m) {
            for b in compositions(2, l) {
                for v_pair in [[c(0.0, 0.0), c(1e-12, 0.0)], [c(1e8, 0.0), c(1e9, 1e8)]] {
                    let mut sums = [c(0.0, 0.0); 2];
                    for (cc, d) in outgoing_colored(&a, &b, l) {
                        let cfg = ColoredConfig::new(a.clone(), b.clone(), cc, d);
                        let w: Vec<C64> = v_pair.iter().map(|&v| weight_s_rank(l, m, &cfg, x, y, v, q).unwrap()).collect();
                        assert!((w[0] - w[1]).norm() < 1e-6, "{cfg:?}: {w:?}");
                        sums[0] += w[0];
                        sums[1] += w[1];
                    }
                    for s in sums {
                        assert!((s - 1.0).norm() < 1e-9, "{s}");
                    }
                }
            }
        }
    }
}

#[test]
fn six_vertex_stochastic_weights_come_from_the_auxiliary_ratio() {
    let (x, y, q, s, z) = (c(1.3, 0.2), c(0.7, -0.1), c(0.4, 0.05), c(0.3, 0.1), c(0.9, 0.3));
    for k in 0..5 {
        let v = s * q.powi(k as i32) / z;
        for cfg in SPIN_HALF_CONFIGS {
            let a = stochasticize_ratio_6v(cfg, x, y, q, s, k, z).unwrap();
            let b = weight_s6v(cfg, x, y, q, v).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{cfg:?}, k = {k}");
        }
    }
}

#[test]
fn q_hahn_specialization_matches_general_weights_and_sums_to_one() {
    let ctx = EllipticContext::new(c(0.0, 1.2), c(0.07, 0.0)).unwrap();
    for (spin_j, cap) in [(1u32, 1.0), (1, 2.0), (2, 2.0), (2, 3.0)] {
        let y = c(0.21, 0.0);
        let x = y + ctx.eta * (spin_j as f64 - cap);
        let p = EllipticVertexParams::new(spin_j, c(cap, 0.0), c(0.41, 0.03), c(0.33, 0.02), x, y);
        for i1 in 0..=cap as u32 {
            for j1 in 0..=spin_j {
                let mut sum = c(0.0, 0.0);
                for cfg in outgoing_configs(i1, j1, spin_j) {
                    let special = weight_s_special(SpecialKind::QHahn, &p, cfg, &ctx).unwrap();
                    let general = weight_s_elliptic(&p, cfg, &ctx).unwrap();
                    assert!((special - general).norm() < 1e-9 * general.norm().max(1.0), "{cfg:?}");
                    sum += special;
                }
                assert!((sum - 1.0).norm() < 1e-9, "J = {spin_j}, Λ = {cap}, ({i1}, {j1}): {sum}");
            }
        }
    }
}
