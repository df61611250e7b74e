mod common;

use approx::assert_abs_diff_eq;
use nalgebra::{DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;

use tenure_graph::case_study::{self, FieldOptions};
use tenure_graph::model::{laplacian, CommitteeGraph, Matrix};
use tenure_graph::spectral::{eigendecompose, embed, positive_area_fraction, sample_field, Bounds};
use tenure_graph::voting::{self, laplacian_quadratic, solve_votes, SolveMode};

use common::{max_abs, random_laplacian, random_vector, rng};

fn weights(max_n: usize) -> impl Strategy<Value = Matrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.01f64..10.0, n * (n - 1) / 2).prop_map(move |upper| {
            let mut w = Matrix::zeros(n, n);
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    w[(i, j)] = upper[k];
                    w[(j, i)] = upper[k];
                    k += 1;
                }
            }
            w
        })
    })
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut g = rng(7);
    for _ in 0..50 {
        let n = g.random_range(2..=50);
        let l = random_laplacian(&mut g, n);
        let ours = eigendecompose(&l, 1e-12).unwrap();
        let mut oracle: Vec<f64> = SymmetricEigen::new(l.clone()).eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let scale = l.amax();
        for (a, b) in ours.eigenvalues.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10 * scale);
        }
        // Residual of every pair.
        for k in 0..n {
            let v = ours.eigenvectors.column(k);
            let r = &l * v - v * ours.eigenvalues[k];
            assert!(r.amax() <= 1e-9 * scale);
        }
    }
}

#[test]
fn case_study_eigenvectors_match_nalgebra_up_to_sign() {
    let cs = case_study::load_case_study();
    let l = cs.graph(&cs.params).unwrap().laplacian;
    let ours = eigendecompose(&l, 1e-12).unwrap();
    let oracle = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..l.nrows()).collect();
    order.sort_by(|&a, &b| oracle.eigenvalues[a].total_cmp(&oracle.eigenvalues[b]));
    // lambda_2 and lambda_3 are simple, so their vectors are unique up to sign.
    for k in 1..3 {
        let a = ours.eigenvectors.column(k);
        let b = oracle.eigenvectors.column(order[k]);
        assert_abs_diff_eq!(a.dot(&b).abs(), 1.0, epsilon = 1e-9);
    }
}

#[test]
fn decomposition_is_bit_reproducible() {
    let cs = case_study::load_case_study();
    let l = cs.graph(&cs.params).unwrap().laplacian;
    let a = embed(&eigendecompose(&l, 1e-12).unwrap()).unwrap();
    let b = embed(&eigendecompose(&l, 1e-12).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn default_case_study_weights_are_strictly_positive() {
    let cs = case_study::load_case_study();
    let w = cs.graph(&cs.params).unwrap().weights;
    for i in 0..w.nrows() {
        assert_eq!(w[(i, i)], 0.0);
        for j in 0..w.ncols() {
            assert_eq!(w[(i, j)], w[(j, i)]);
            if i != j {
                assert!(w[(i, j)] > 0.0);
            }
        }
    }
}

#[test]
fn high_eta_low_pmax_is_rejected() {
    let cs = case_study::load_case_study();
    let params = tenure_graph::ModelParams {
        eta: 0.9,
        p_max: 1.0,
        ..cs.params.clone()
    };
    let err = CommitteeGraph::build(&cs.department, &params).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn field_fraction_is_stable_under_grid_refinement() {
    let cs = case_study::load_case_study();
    let coarse = case_study::reproduce_figure3(&cs, &FieldOptions::default()).unwrap().1;
    let fine = case_study::reproduce_figure3(
        &cs,
        &FieldOptions {
            resolution: 400,
            ..Default::default()
        },
    )
    .unwrap()
    .1;
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a.positive_fraction - b.positive_fraction).abs() < 0.02);
    }
}

#[test]
fn regularization_keeps_sweep_signs() {
    // Small epsilon pulls every vote slightly toward -1; signs of the case-study
    // means must not flip at the smallest value tried.
    let cs = case_study::load_case_study();
    let graph = cs.graph(&cs.params).unwrap();
    let base = voting::monte_carlo_votes(&graph, &cs.scenario, 200, 42).unwrap();
    let eps = voting::monte_carlo_votes(
        &graph,
        &tenure_graph::VotingScenario {
            epsilon: 1e-4,
            ..cs.scenario.clone()
        },
        200,
        42,
    )
    .unwrap();
    for (a, b) in base.mean.iter().zip(&eps.mean) {
        assert_eq!(a.signum(), b.signum());
    }
}

#[test]
fn clamped_solve_keeps_decided_agents_fixed() {
    let cs = case_study::load_case_study();
    let graph = cs.graph(&cs.params).unwrap();
    let scenario = tenure_graph::VotingScenario {
        solve_mode: SolveMode::Clamped,
        ..cs.scenario.clone()
    };
    let solver =
        voting::VoteSolver::clamped(&graph.laplacian, scenario.mu, scenario.epsilon, &scenario.v_undecided).unwrap();
    let m_c = voting::candidate_merit(&graph.productivity, scenario.candidate, 7.0, scenario.merit).unwrap();
    let x0 = voting::initialize_votes(&scenario, &graph.productivity, 7.0, m_c, voting::RngSpec::new(42, 0)).unwrap();
    let out = solver.solve(&x0).unwrap();
    for i in 0..x0.len() {
        if !scenario.v_undecided.contains(&i) {
            assert_eq!(out.x[i], x0[i]);
        }
    }
    assert!(out.gradient_norm <= 1e-9);
}

#[test]
#[ignore = "the narrative signs (x2, x3 < 0 < x5 at gamma = 0.25) are not reached by any solve mode \
            or candidate assignment with the printed data; kept as a record"]
fn narrative_signs_at_default_gamma() {
    let cs = case_study::load_case_study();
    let graph = cs.graph(&cs.params).unwrap();
    let stats = voting::monte_carlo_votes(&graph, &cs.scenario, 1000, 42).unwrap();
    assert!(stats.mean_of(1).unwrap() < 0.0);
    assert!(stats.mean_of(2).unwrap() < 0.0);
    assert!(stats.mean_of(4).unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_psd_with_constant_null_vector(w in weights(15), seed in any::<u64>()) {
        let l = laplacian(&w).unwrap();
        let n = l.nrows();
        let ones = DVector::from_element(n, 1.0);
        prop_assert!((&l * ones).amax() <= 1e-12 * l.amax().max(1.0));
        let mut g = rng(seed);
        for _ in 0..20 {
            let x = DVector::from_vec(random_vector(&mut g, n));
            prop_assert!(x.dot(&(&l * &x)) >= -1e-12 * l.amax());
        }
    }

    #[test]
    fn quadratic_form_matches_pairwise_sum(w in weights(12), seed in any::<u64>()) {
        let l = laplacian(&w).unwrap();
        let x = random_vector(&mut rng(seed), l.nrows());
        let xv = DVector::from_column_slice(&x);
        let q = laplacian_quadratic(&w, &x);
        prop_assert!((q - xv.dot(&(&l * &xv))).abs() <= 1e-10 * q.abs().max(1.0));
    }

    #[test]
    fn solve_is_odd(w in weights(10), seed in any::<u64>(), mu in 0.01f64..10.0, eps in 0.0f64..1.0) {
        let l = laplacian(&w).unwrap();
        let x0 = random_vector(&mut rng(seed), l.nrows());
        let neg: Vec<f64> = x0.iter().map(|v| -v).collect();
        let a = solve_votes(&l, &x0, mu, eps).unwrap();
        let b = solve_votes(&l, &neg, mu, eps).unwrap();
        for (p, q) in a.x.iter().zip(&b.x) {
            prop_assert!((p + q).abs() <= 1e-12);
        }
    }

    #[test]
    fn larger_influence_smooths_votes(w in weights(10), seed in any::<u64>(), mu in 0.01f64..5.0, factor in 1.0f64..10.0) {
        let l = laplacian(&w).unwrap();
        let x0 = random_vector(&mut rng(seed), l.nrows());
        let variance = |x: &[f64]| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m).powi(2)).sum::<f64>()
        };
        let low = solve_votes(&l, &x0, mu, 0.0).unwrap();
        let high = solve_votes(&l, &x0, mu * factor, 0.0).unwrap();
        prop_assert!(variance(&high.x) <= variance(&low.x) + 1e-12);
    }

    #[test]
    fn raising_one_value_never_shrinks_positive_area(agent in 0usize..11, bump in 0.0f64..2.0) {
        let cs = case_study::load_case_study();
        let diagram = case_study::reproduce_figure2(&cs).unwrap();
        let n = diagram.len();
        let x = case_study::figure3_assignments(&cs.scenario, n, 0.0, 0.0);
        let sigma = vec![case_study::SIGMA; n];
        let bounds = Bounds::square_around(&diagram.points, 0.1);
        let mut raised = x.clone();
        raised[agent] += bump;
        let before = positive_area_fraction(&sample_field(&diagram, &x, &sigma, bounds, 40).unwrap()).unwrap();
        let after = positive_area_fraction(&sample_field(&diagram, &raised, &sigma, bounds, 40).unwrap()).unwrap();
        prop_assert!(after >= before);
    }
}

#[test]
fn random_laplacians_reconstruct() {
    let mut g = rng(11);
    for _ in 0..20 {
        let n = g.random_range(3..=30);
        let l = random_laplacian(&mut g, n);
        let d = eigendecompose(&l, 1e-12).unwrap();
        assert!(max_abs(&(d.reconstruct() - &l)) <= 1e-9 * l.amax());
    }
}
