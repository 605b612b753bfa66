mod common;

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use ailimit::dls::{el_gradient, shadow, ShadowConfig};
use ailimit::hyperbolicity::{
    cone_verify, pqr_consistency, stable_vector, standard_blocks, variational_blocks, ConeParams,
    HyperbolicityError, Tier,
};
use ailimit::models::{make_kick_map, KickMapSpec, Profile};
use ailimit::standard_map::{shadow_code, StandardMapParams};
use ailimit::symbolic::StandardCode;
use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{points_of, standard_dls};

#[test]
fn blocks_match_finite_differences_of_the_gradient() {
    let km = make_kick_map(&KickMapSpec::new(
        vec![Profile::TwoWell { amplitude: 1.0, period: TAU }, Profile::neg_cos(1.0, TAU)],
        0.003,
    ))
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let code = km.random_code(12, &mut rng).unwrap();
    let orbit = shadow(&km.system, &code, &ShadowConfig::default()).unwrap();
    let blocks = variational_blocks(&km.system, &orbit).unwrap();
    let h = 1e-6;
    for row in &blocks.rows {
        for (slot, block) in [(row.prev, &row.g_minus), (row.index, &row.g), (row.next, &row.g_plus)] {
            for j in 0..2 {
                let shifted = |s: f64| {
                    let mut x = orbit.points.clone();
                    x[slot][j] += s;
                    el_gradient(&km.system, &code, &x, row.index)
                };
                let col = (shifted(h) - shifted(-h)) / (2.0 * h);
                for i in 0..2 {
                    let scale = block[(i, j)].abs().max(1.0);
                    assert!((col[i] - block[(i, j)]).abs() <= 1e-6 * scale, "{} vs {}", col[i], block[(i, j)]);
                }
            }
        }
    }
    assert!(pqr_consistency(&blocks, 20, 1) < 1e-8);
}

#[test]
fn general_blocks_agree_with_closed_form() {
    let sc = StandardCode::periodic(vec![0, 1, 1, 2, 2, 1]);
    let km = standard_dls(15.0);
    let code = km.code_from_points(&points_of(&sc), true).unwrap();
    let orbit = shadow(&km.system, &code, &ShadowConfig::default()).unwrap();
    let general = variational_blocks(&km.system, &orbit).unwrap();
    let closed = standard_blocks(&shadow_code(&sc, &StandardMapParams::new(15.0, FRAC_PI_4, 2.0 * PI).unwrap()).unwrap()).unwrap();
    for (a, b) in general.rows.iter().zip(&closed.rows) {
        for (x, y) in [(&a.g_minus, &b.g_minus), (&a.g, &b.g), (&a.g_plus, &b.g_plus), (&a.p, &b.p), (&a.q, &b.q), (&a.r, &b.r)] {
            assert_abs_diff_eq!(x[(0, 0)], y[(0, 0)], epsilon = 1e-10);
        }
    }
}

#[test]
fn constant_pi_blocks() {
    let p = StandardMapParams::new(12.0, FRAC_PI_4, PI).unwrap();
    let orbit = shadow_code(&StandardCode::periodic(vec![1; 4]), &p).unwrap();
    let blocks = standard_blocks(&orbit).unwrap();
    for r in &blocks.rows {
        assert_abs_diff_eq!(r.g[(0, 0)], 2.0 / 12.0 - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.g_minus[(0, 0)].abs(), 1.0 / 12.0, epsilon = 1e-15);
    }
    let report = cone_verify(&blocks, &ConeParams::default()).unwrap();
    assert!(report.pass && report.tier == Tier::Exact && report.mu.unwrap() >= 2.0);
}

#[test]
fn uncoupled_limit_is_degenerate_pass() {
    let km = make_kick_map(&KickMapSpec::new(vec![Profile::neg_cos(1.0, TAU)], 0.0)).unwrap();
    let code = km.random_code(10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let orbit = shadow(&km.system, &code, &ShadowConfig::default()).unwrap();
    let blocks = variational_blocks(&km.system, &orbit).unwrap();
    for r in &blocks.rows {
        assert_eq!(r.p[(0, 0)], 0.0);
        assert_eq!(r.q[(0, 0)], 0.0);
        assert_eq!(r.r[(0, 0)], 0.0);
    }
    let report = cone_verify(&blocks, &ConeParams::default()).unwrap();
    assert!(report.pass);
    assert_eq!(report.tier, Tier::AiLimitDegenerate);
}

#[test]
fn two_degrees_of_freedom_use_norm_tier() {
    let km = make_kick_map(&KickMapSpec::new(vec![Profile::neg_cos(1.0, TAU), Profile::neg_cos(1.0, TAU)], 0.002)).unwrap();
    let code = km.random_code(16, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let orbit = shadow(&km.system, &code, &ShadowConfig::default()).unwrap();
    let report = cone_verify(&variational_blocks(&km.system, &orbit).unwrap(), &ConeParams::default()).unwrap();
    assert!(report.pass);
    assert_eq!(report.tier, Tier::Norm);
}

#[test]
fn singular_twist_is_reported() {
    let mut spec = KickMapSpec::new(vec![Profile::neg_cos(1.0, TAU), Profile::neg_cos(1.0, TAU)], 0.0);
    spec.b_matrix = Some(vec![vec![0.002, 0.0], vec![0.0, 0.0]]);
    let km = make_kick_map(&spec).unwrap();
    assert!(!km.twist_nondegenerate);
    let code = km.random_code(8, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let orbit = shadow(&km.system, &code, &ShadowConfig::default()).unwrap();
    let err = cone_verify(&variational_blocks(&km.system, &orbit).unwrap(), &ConeParams::default()).unwrap_err();
    assert!(matches!(err, HyperbolicityError::TwistFailure(_)));
    assert!(err.to_string().starts_with("twist failure at index"));
}

#[test]
fn stable_vector_edge_cases() {
    let p = StandardMapParams::new(12.0, FRAC_PI_4, PI).unwrap();
    let orbit = shadow_code(&StandardCode::periodic(vec![1; 200]), &p).unwrap();
    let blocks = standard_blocks(&orbit).unwrap();
    let zero = stable_vector(&blocks, 0, &DVector::zeros(1), 30, 2.0).unwrap();
    assert!(zero.iter().all(|v| v[0] == 0.0));

    let short = stable_vector(&blocks, 0, &DVector::from_element(1, 1.0), 30, 2.0).unwrap();
    let long = stable_vector(&blocks, 0, &DVector::from_element(1, 1.0), 60, 2.0).unwrap();
    for j in 1..=15 {
        assert!((short[j][0] - long[j][0]).abs() < 1e-9);
    }
    let root = 5.0 - 24f64.sqrt();
    for j in 1..10 {
        assert_abs_diff_eq!((long[j][0] / long[j - 1][0]).abs(), root, epsilon = 1e-6);
    }
}

#[test]
fn certified_growth_is_at_least_mu_per_step() {
    use rand::Rng;
    let p = StandardMapParams::new(20.0, FRAC_PI_4, PI).unwrap();
    let orbit = shadow_code(&StandardCode::periodic(vec![0, 0, 1, 1, 0, -1, -1, 0]), &p).unwrap();
    let blocks = standard_blocks(&orbit).unwrap();
    let report = cone_verify(&blocks, &ConeParams::default()).unwrap();
    let mu = report.mu.unwrap();
    let n = blocks.rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        // (u_{i−1}, u_i) in the horizontal cone, then forward along the variational equation.
        let start = rng.gen_range(0..n);
        let (mut prev, mut cur): (f64, f64) = (rng.gen_range(-0.5..0.5), 1.0);
        let first = f64::max(prev.abs(), cur);
        for j in 1..=12 {
            let r = &blocks.rows[(start + j - 1) % n];
            let next = -(r.g_minus[(0, 0)] * prev + r.g[(0, 0)] * cur) / r.g_plus[(0, 0)];
            (prev, cur) = (cur, next);
            let pair = f64::max(prev.abs(), cur.abs());
            assert!(pair >= mu.powi(j as i32) * first * (1.0 - 1e-9), "step {j}");
            assert!(prev.abs() <= 0.5 * cur.abs());
        }
    }
}
