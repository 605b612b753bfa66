mod common;

use std::f64::consts::{FRAC_PI_4, LN_2, PI, TAU};

use ailimit::entropy::{tmc_entropy, word_count_entropy};
use ailimit::io::{read_orbit_csv, read_sweep_csv, write_orbit_csv, write_sweep_csv, OrbitRow, SweepRow};
use ailimit::standard_map::{decay_check, quotient_project, shadow_code, StandardMapParams};
use ailimit::symbolic::{count_words, is_admissible, Code, EdgeId, StandardCode, TransitionGraph, VertexId};
use std::sync::Arc;

use ailimit::dls::{
    residual, shadow, DiscreteLagrangian, DlsSystem, DomainBox, FnField1, HessianBlocks,
    LagrangianPiece, ScalarField, ShadowConfig,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, FileFailurePersistence, RngSeed};

fn config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: Some(Box::new(FileFailurePersistence::Off)),
        ..Config::default()
    }
}

/// Random graph on `n` vertices from an adjacency multiplicity list.
fn graph_strategy() -> impl Strategy<Value = TransitionGraph> {
    (1usize..5).prop_flat_map(|n| {
        prop::collection::vec(0u64..3, n * n).prop_map(move |mult| {
            let mut g = TransitionGraph::with_vertices(n);
            for (k, &c) in mult.iter().enumerate() {
                for _ in 0..c {
                    g.add_edge(VertexId(k / n), VertexId(k % n));
                }
            }
            g
        })
    })
}

fn brute_force_words(g: &TransitionGraph, n: usize) -> u128 {
    // Extend every path one edge at a time.
    let mut paths: Vec<VertexId> = (0..g.vertex_count()).map(VertexId).collect();
    for _ in 1..n {
        paths = paths
            .iter()
            .flat_map(|&v| g.out_edges(v).iter().map(|&e| g.edge(e).unwrap().dst).collect::<Vec<_>>())
            .collect();
    }
    paths.len() as u128
}

/// Standard codes with bounded second differences, as windows starting at 0, 0.
fn standard_code_strategy(len: std::ops::Range<usize>) -> impl Strategy<Value = StandardCode> {
    prop::collection::vec(-1i64..=1, len).prop_map(|d| StandardCode::from_second_differences(0, 0, &d))
}

proptest! {
    #![proptest_config(config(64, 1))]

    #[test]
    fn word_counts_match_enumeration(g in graph_strategy(), n in 1usize..6) {
        prop_assert_eq!(count_words(&g, n).unwrap(), brute_force_words(&g, n));
    }

    #[test]
    fn admissibility_is_rotation_invariant(g in graph_strategy(), len in 1usize..12, seed in any::<u64>(), k in 0usize..12) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        prop_assume!(g.edge_count() > 0);
        let edges: Vec<EdgeId> = (0..len).map(|_| EdgeId(rng.gen_range(0..g.edge_count()))).collect();
        let code = Code::Periodic(edges);
        prop_assert_eq!(is_admissible(&code, &g).unwrap(), is_admissible(&code.rotated(k), &g).unwrap());
    }

    #[test]
    fn word_count_entropy_bounded_by_tmc(g in graph_strategy()) {
        let h = tmc_entropy(&g).unwrap().entropy;
        let rates = word_count_entropy(&g, 30).unwrap();
        // Counts over all start vertices: θ_n ≤ |V|·ρⁿ⁻¹·C, so the rate approaches h from above at worst by log|V|/n.
        prop_assert!(rates[29] <= h + (g.vertex_count() as f64 * 64.0).ln() / 30.0 + 1e-9);
    }

    #[test]
    fn complete_graph_entropy(q in 1usize..12) {
        let h = tmc_entropy(&TransitionGraph::complete(q)).unwrap().entropy;
        prop_assert!((h - (q as f64).ln()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(config(48, 2))]

    #[test]
    fn shadow_bounds_hold(code in standard_code_strategy(4..40), lambda in 12.0f64..200.0, periodic in any::<bool>()) {
        let code = StandardCode { periodic, ..code };
        let p = StandardMapParams::new(lambda, FRAC_PI_4, PI).unwrap();
        let orbit = shadow_code(&code, &p);
        if periodic && !ailimit::symbolic::standard_code_check(&code, PI) {
            prop_assert!(orbit.is_err());
            return Ok(());
        }
        let orbit = orbit.unwrap();
        prop_assert!(orbit.rho < FRAC_PI_4);
        prop_assert!(orbit.residual <= 1e-10 * (1.0 + lambda));
        let cap = 4.0 / (lambda * FRAC_PI_4.cos());
        prop_assert!(orbit.contraction_estimate <= cap.min(0.5) + 1e-9, "{} > {}", orbit.contraction_estimate, cap);
    }

    #[test]
    fn locality_decay(base in prop::collection::vec(-1i64..=1, 36), left in prop::collection::vec(-1i64..=1, 12),
                      right in prop::collection::vec(-1i64..=1, 12), lambda in 40.0f64..200.0) {
        // Same centre block, tails regrown outward with independent second differences.
        let a = StandardCode::from_second_differences(0, 0, &base);
        let (n, center) = (a.len(), a.len() / 2);
        let mut m = a.multiples.clone();
        for (j, k) in (center + 9..n).enumerate() {
            m[k] = 2 * m[k - 1] - m[k - 2] + right[j];
        }
        for (j, k) in (0..center - 8).rev().enumerate() {
            m[k] = 2 * m[k + 1] - m[k + 2] + left[j];
        }
        let b = StandardCode::window(m);
        let p = StandardMapParams::new(lambda, FRAC_PI_4, PI).unwrap();
        let report = decay_check(&a, &b, center, 8, &p).unwrap();
        prop_assert!(report.pass, "ratio {}", report.ratio);
    }

    #[test]
    fn quotient_is_translation_invariant(x in prop::collection::vec(-50.0f64..50.0, 2..20), shift in -5i32..5) {
        let moved: Vec<f64> = x.iter().map(|v| v + TAU * shift as f64).collect();
        for ((a, b), (c, d)) in quotient_project(&x).into_iter().zip(quotient_project(&moved)) {
            prop_assert!((0.0..TAU).contains(&a) && (0.0..TAU).contains(&b));
            let close = |u: f64, v: f64| { let e = (u - v).abs(); e < 1e-9 || (TAU - e).abs() < 1e-9 };
            prop_assert!(close(a, c) && close(b, d));
        }
    }

    #[test]
    fn orbit_csv_round_trips(rows in prop::collection::vec((prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 2), 0.0f64..1.0), 1..20)) {
        let rows: Vec<OrbitRow> = rows.into_iter().enumerate()
            .map(|(index, (x, r))| OrbitRow { index, x, local_residual: r })
            .collect();
        let text = write_orbit_csv(&rows).unwrap();
        let back = read_orbit_csv(&text).unwrap();
        prop_assert_eq!(&back, &rows);
        prop_assert_eq!(write_orbit_csv(&back).unwrap(), text);
    }

    #[test]
    fn sweep_csv_round_trips(vals in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), any::<bool>(), prop::option::of(0.0f64..1e3)), 1..20)) {
        let rows: Vec<SweepRow> = vals.into_iter()
            .map(|(param, converged, v)| SweepRow { param, converged, residual: v, rho: v, contraction: None, mu: v, entropy_bound: Some(LN_2) })
            .collect();
        let text = write_sweep_csv(&rows).unwrap();
        prop_assert_eq!(&read_sweep_csv(&text).unwrap(), &rows);
    }
}

/// `(ε/2)(y − x)² + cos x + g(f(x) − f(y))` with `f = sin`.
struct Gauged {
    eps: f64,
    minus: FnField1,
    plus: FnField1,
}

impl Gauged {
    fn new(eps: f64, g: f64) -> Self {
        Self {
            eps,
            minus: FnField1::new(move |x| x.cos() + g * x.sin(), move |x| -x.sin() + g * x.cos(), move |x| -x.cos() - g * x.sin()),
            plus: FnField1::new(move |y| -g * y.sin(), move |y| -g * y.cos(), move |y| g * y.sin()),
        }
    }
}

impl DiscreteLagrangian for Gauged {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        0.5 * self.eps * (y[0] - x[0]).powi(2) + self.minus.value(x) + self.plus.value(y)
    }
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.eps * (x[0] - y[0])) + self.minus.gradient(x)
    }
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.eps * (y[0] - x[0])) + self.plus.gradient(y)
    }
    fn hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks {
        let e = |v| DMatrix::from_element(1, 1, v);
        HessianBlocks { xx: e(self.eps) + self.minus.hessian(x), xy: e(-self.eps), yy: e(self.eps) + self.plus.hessian(y) }
    }
    fn v_minus(&self) -> &dyn ScalarField {
        &self.minus
    }
    fn v_plus(&self) -> &dyn ScalarField {
        &self.plus
    }
}

/// One piece, one edge per critical point in {0, π, 2π}.
fn gauged_system(lambda: f64, g: f64) -> DlsSystem {
    let domain = DomainBox::cube(DVector::from_element(1, PI), 4.5);
    let mut graph = TransitionGraph::with_vertices(1);
    let seeds: Vec<DVector<f64>> = (0..3)
        .map(|k| {
            graph.add_edge(VertexId(0), VertexId(0));
            DVector::from_element(1, PI * k as f64)
        })
        .collect();
    let piece = LagrangianPiece::new(Arc::new(Gauged::new(1.0 / lambda, g)), domain.clone(), domain);
    DlsSystem::from_seeds(graph, vec![piece], &seeds).unwrap()
}

proptest! {
    #![proptest_config(config(24, 4))]

    #[test]
    fn gauge_leaves_orbits_unchanged(steps in prop::collection::vec(-1i64..=1, 4..24), lambda in 15.0f64..100.0, periodic in any::<bool>()) {
        // Neighbouring sites at most π apart.
        let edges: Vec<usize> = steps.iter().scan(1i64, |s, d| { *s = (*s + d).clamp(0, 2); Some(*s as usize) }).collect();
        let periodic = periodic && edges[0].abs_diff(edges[edges.len() - 1]) <= 1;
        let code = if periodic { Code::Periodic(edges.into_iter().map(EdgeId).collect()) } else { Code::Window(edges.into_iter().map(EdgeId).collect()) };
        let plain = gauged_system(lambda, 0.0);
        let gauged = gauged_system(lambda, 0.3);
        let x = shadow(&plain, &code, &ShadowConfig::default()).unwrap();
        let y = shadow(&gauged, &code, &ShadowConfig::default()).unwrap();
        prop_assert!(residual(&gauged, &code, &x.points) <= 1e-9);
        prop_assert!(residual(&plain, &code, &y.points) <= 1e-9);
        for (a, b) in x.points.iter().zip(&y.points) {
            prop_assert!((a[0] - b[0]).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(config(12, 3))]

    #[test]
    fn cli_runs_are_deterministic(seed in any::<u64>(), lambda in 12.0f64..60.0) {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("kick.json");
        std::fs::write(&spec, r#"{"model":"kick","potential":[{"kind":"neg_cos","amplitude":1.0,"period":6.283185307179586}],"mass":0.01}"#).unwrap();
        let run = |args: Vec<String>| {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = ailimit::cli::run(args, &mut out, &mut err);
            (code, out, err)
        };
        let kick = vec!["ailimit".into(), "verify".into(), "--model".into(), spec.display().to_string(), "--seed".into(), seed.to_string()];
        let first = run(kick.clone());
        prop_assert_eq!(first.0, 0, "{}", String::from_utf8_lossy(&first.2));
        prop_assert_eq!(&first, &run(kick));
        let std_run = vec!["ailimit".into(), "entropy".into(), "--model".into(), "standard".into(), "--lambda".into(), lambda.to_string()];
        prop_assert_eq!(run(std_run.clone()), run(std_run));
    }
}

proptest! {
    #![proptest_config(config(64, 5))]

    #[test]
    fn word_counts_are_submultiplicative(g in graph_strategy(), n in 1usize..6, m in 1usize..6) {
        // Words are counted by vertices, so a word on n + m vertices splits into
        // words on n + 1 and m vertices sharing one vertex.
        prop_assert!(count_words(&g, n + m).unwrap() <= count_words(&g, n + 1).unwrap() * count_words(&g, m).unwrap());
    }

    #[test]
    fn adding_an_edge_never_lowers_entropy(g in graph_strategy(), s in 0usize..4, d in 0usize..4) {
        let n = g.vertex_count();
        let mut more = g.clone();
        more.add_edge(VertexId(s % n), VertexId(d % n));
        prop_assert!(tmc_entropy(&more).unwrap().entropy >= tmc_entropy(&g).unwrap().entropy - 1e-10);
    }

    #[test]
    fn entropy_bound_nondecreasing_in_lambda(l in 12.0f64..1e5, dl in 0.0f64..1e4) {
        let a = ailimit::entropy::standard_map_entropy_bound(l, FRAC_PI_4).unwrap();
        let b = ailimit::entropy::standard_map_entropy_bound(l + dl, FRAC_PI_4).unwrap();
        prop_assert!(b.bound_nats >= a.bound_nats);
    }

    #[test]
    fn map_and_lagrangian_forms_agree(x0 in -10.0f64..10.0, x1 in -10.0f64..10.0, lambda in -50.0f64..50.0) {
        use ailimit::standard_map::{map_forward, step_lagrangian};
        let (x2, y2) = map_forward(x1, x1 - x0, lambda);
        prop_assert!((x2 - step_lagrangian(x0, x1, lambda)).abs() <= 1e-12 * (1.0 + x2.abs()));
        prop_assert!((y2 - (x2 - x1)).abs() <= 1e-12 * (1.0 + x2.abs()));
    }

    #[test]
    fn map_preserves_area(x in -10.0f64..10.0, y in -10.0f64..10.0, lambda in -20.0f64..20.0) {
        use ailimit::standard_map::map_forward;
        let h = 1e-6;
        let dx = |dx: f64, dy: f64| map_forward(x + dx, y + dy, lambda);
        let (a1, b1) = dx(h, 0.0);
        let (a0, b0) = dx(-h, 0.0);
        let (c1, d1) = dx(0.0, h);
        let (c0, d0) = dx(0.0, -h);
        let det = ((a1 - a0) * (d1 - d0) - (b1 - b0) * (c1 - c0)) / (4.0 * h * h);
        prop_assert!((det - 1.0).abs() < 1e-7 * (1.0 + lambda.abs()));
    }

    #[test]
    fn shadowing_is_unique_and_a_fixed_point(code in standard_code_strategy(6..30), lambda in 12.0f64..100.0, seed in any::<u64>()) {
        use ailimit::standard_map::shadow_code_from;
        use rand::{Rng, SeedableRng};
        let p = StandardMapParams::new(lambda, FRAC_PI_4, PI).unwrap();
        let x = shadow_code(&code, &p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let start: Vec<f64> = (0..code.len()).map(|k| code.value(k) + rng.gen_range(-0.5..0.5) * FRAC_PI_4).collect();
        let y = shadow_code_from(&code, &p, start).unwrap();
        let again = shadow_code_from(&code, &p, x.points.clone()).unwrap();
        for k in 0..code.len() {
            prop_assert!((x.points[k] - y.points[k]).abs() <= 1e-12);
            prop_assert!((x.points[k] - again.points[k]).abs() <= 1e-13);
        }
    }
}

#[test]
fn exponent_grows_like_log_lambda() {
    use ailimit::hyperbolicity::{cone_verify, standard_blocks, ConeParams};
    let code = StandardCode::periodic(vec![0, 0, 1, 1]);
    let log_mu: Vec<f64> = [20.0, 200.0, 2000.0]
        .iter()
        .map(|&l| {
            let orbit = shadow_code(&code, &StandardMapParams::new(l, FRAC_PI_4, PI).unwrap()).unwrap();
            cone_verify(&standard_blocks(&orbit).unwrap(), &ConeParams::default()).unwrap().log_mu.unwrap()
        })
        .collect();
    let offsets: Vec<f64> = log_mu.iter().zip([20f64, 200.0, 2000.0]).map(|(m, l)| l.ln() - m).collect();
    // log μ − log λ stays bounded below by a common constant.
    let c = offsets.iter().cloned().fold(f64::MIN, f64::max);
    assert!(c < 3.0, "{offsets:?}");
    assert!(log_mu.windows(2).all(|w| w[1] > w[0] + 2.0), "{log_mu:?}");
}
