//! The library checked against independent second routes.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::{all_dags, density_matrix_joint, dsep_by_paths, local_chsh, TSIRELSON};
use eprb_causal::amplitude::{entangled_amplitude, wing_amplitude};
use eprb_causal::audit::trial_rng;
use eprb_causal::eprb::{
    common_cause_model, model_chsh, retrocausal_model, CommonCauseParams, ModelJoints, SettingPriors,
};
use eprb_causal::{chsh, AmplitudeKernel, Dag, EprbGeometry, Intermediary, SettingJoints, Sign};
use itertools::Itertools;
use rand::Rng;

fn random_geometry<R: Rng>(rng: &mut R) -> EprbGeometry {
    EprbGeometry {
        alpha: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)],
        beta: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)],
        eta: rng.gen_range(0.0..=FRAC_PI_2),
    }
}

#[test]
fn dseparation_agrees_with_path_enumeration_on_small_graphs() {
    let mut checked = 0;
    for n in 1..=4 {
        let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        for edges in all_dags(n) {
            let e: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let dag = Dag::binary(&refs, &e).unwrap();
            for (i, j) in (0..n).tuple_combinations() {
                let rest: Vec<&str> = (0..n).filter(|&k| k != i && k != j).map(|k| refs[k]).collect();
                for size in 0..=rest.len() {
                    for z in rest.iter().copied().combinations(size) {
                        let lib = dag.d_separated(&[refs[i]], &[refs[j]], &z).unwrap();
                        let oracle = dsep_by_paths(&dag, &[refs[i]], &[refs[j]], &z);
                        assert_eq!(lib, oracle, "{edges:?} {i} {j} {z:?}");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn dseparation_agrees_with_path_enumeration_on_random_six_vertex_graphs() {
    let names = ["V0", "V1", "V2", "V3", "V4", "V5"];
    let mut rng = trial_rng(17, 0);
    for _ in 0..200 {
        let edges: Vec<(&str, &str)> = (0..6)
            .tuple_combinations()
            .filter(|_| rng.gen_bool(0.4))
            .map(|(a, b): (usize, usize)| (names[a], names[b]))
            .collect();
        let dag = Dag::binary(&names, &edges).unwrap();
        let mut order: Vec<&str> = names.to_vec();
        for k in (1..6).rev() {
            order.swap(k, rng.gen_range(0..=k));
        }
        let x = &order[..1];
        let y = &order[1..3];
        let z = &order[3..3 + rng.gen_range(0..=3)];
        assert_eq!(
            dag.d_separated(x, y, z).unwrap(),
            dsep_by_paths(&dag, x, y, z),
            "{edges:?} {x:?} {y:?} {z:?}"
        );
    }
}

#[test]
fn retrocausal_graph_example_by_path_enumeration() {
    let dag = eprb_causal::eprb::retrocausal_dag();
    assert!(!dsep_by_paths(&dag, &["A"], &["β"], &["α"]));
    assert!(!dag.d_separated(&["A"], &["β"], &["α"]).unwrap());
}

#[test]
fn joint_probability_matches_density_matrix_channel() {
    let mut rng = trial_rng(5, 0);
    for _ in 0..500 {
        let geom = random_geometry(&mut rng);
        let kappa = rng.gen_range(0.0..=1.0);
        let intermediary = if rng.gen_bool(0.5) {
            Intermediary::Unmeasured
        } else {
            Intermediary::Fixed {
                alpha: rng.gen_range(0.0..2.0 * PI),
                beta: rng.gen_range(0.0..2.0 * PI),
            }
        };
        let k = AmplitudeKernel::new(geom, intermediary, kappa).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let oracle = density_matrix_joint(
                    geom.eta,
                    (geom.alpha[i], geom.beta[j]),
                    k.intermediary_angles(i, j),
                    kappa,
                );
                for (p, q) in k.joint(i, j).iter().zip(oracle) {
                    assert!((p - q).abs() < 1e-12, "{p} vs {q}");
                }
            }
        }
    }
}

#[test]
fn chsh_is_quadratic_in_kappa_at_standard_geometry() {
    let geom = EprbGeometry::standard();
    for step in 0..=20 {
        let kappa = step as f64 / 20.0;
        let k = AmplitudeKernel::new(geom, Intermediary::Unmeasured, kappa).unwrap();
        let mut e = [[0.0; 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let o = density_matrix_joint(geom.eta, (geom.alpha[i], geom.beta[j]), k.intermediary_angles(i, j), kappa);
                *cell = o[0] - o[1] - o[2] + o[3];
            }
        }
        let oracle = (e[0][0] - e[0][1] + e[1][0] + e[1][1]).abs();
        let s = chsh(&k).unwrap();
        assert!((s - oracle).abs() < 1e-12);
        assert!((s - TSIRELSON * kappa * kappa).abs() < 1e-12);
    }
}

#[test]
fn projective_limit_matches_incoherent_closed_form() {
    let mut rng = trial_rng(6, 0);
    for _ in 0..200 {
        let geom = random_geometry(&mut rng);
        let k = AmplitudeKernel::new(geom, Intermediary::Unmeasured, 0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let (ia, ib) = k.intermediary_angles(i, j);
                for a in Sign::BOTH {
                    for b in Sign::BOTH {
                        let closed: f64 = Sign::BOTH
                            .iter()
                            .cartesian_product(Sign::BOTH.iter())
                            .map(|(&mu, &nu)| {
                                wing_amplitude(ia, mu, geom.alpha[i], a).norm_sqr()
                                    * wing_amplitude(ib, nu, geom.beta[j], b).norm_sqr()
                                    * entangled_amplitude(geom.eta, mu, nu, (ia, ib)).norm_sqr()
                            })
                            .sum();
                        assert!((k.joint_probability(i, j, a, b) - closed).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn outcome_marginals_match_partial_trace_for_every_remote_setting() {
    let mut rng = trial_rng(8, 0);
    for _ in 0..300 {
        let geom = random_geometry(&mut rng);
        let kappa = rng.gen_range(0.0..=1.0);
        let k = AmplitudeKernel::new(geom, Intermediary::Unmeasured, kappa).unwrap();
        for i in 0..2 {
            // Reduced state of wing A: only the local dephasing matters.
            let reference = density_matrix_joint(geom.eta, (geom.alpha[i], 0.0), (k.intermediary_angles(i, 0).0, 0.0), kappa);
            let p_plus = reference[0] + reference[1];
            for j in 0..2 {
                let joint = k.joint(i, j);
                assert!((joint[0] + joint[1] - p_plus).abs() < 1e-12);
            }
        }
        assert!(k.no_signalling() < 1e-12);
    }
}

#[test]
fn non_maximal_retrocausal_model_reproduces_born_statistics() {
    let geom = EprbGeometry::standard().with_eta(PI / 3.0);
    let m = retrocausal_model(&geom, SettingPriors::default()).unwrap();
    let joints = ModelJoints::new(&m).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let oracle = density_matrix_joint(geom.eta, (geom.alpha[i], geom.beta[j]), (0.0, 0.0), 1.0);
            for (p, q) in joints.setting_joint(i, j).unwrap().iter().zip(oracle) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }
    // E = -cos a cos b - sin 2η sin a sin b at the standard angles.
    let s2 = (2.0 * geom.eta).sin();
    let expected = 2.0 * std::f64::consts::FRAC_1_SQRT_2 * (1.0 + s2);
    assert!((model_chsh(&m).unwrap() - expected).abs() < 1e-12);
    assert!(expected > 2.0);
}

#[test]
fn common_cause_chsh_matches_response_function_formula() {
    let mut rng = trial_rng(9, 0);
    for _ in 0..300 {
        let card = rng.gen_range(1..=8);
        let params = CommonCauseParams::random(&mut rng, card);
        let m = common_cause_model(card, &params).unwrap();
        let oracle = local_chsh(&params.lambda, &params.a_plus, &params.b_plus);
        assert!((model_chsh(&m).unwrap() - oracle).abs() < 1e-12);
        assert!(oracle <= 2.0 + 1e-12);
    }
}

#[test]
fn factorized_joint_returns_its_own_tables() {
    let mut rng = trial_rng(10, 0);
    for n in 1..=4 {
        for edges in all_dags(n).into_iter().step_by(7) {
            let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
            let vars: Vec<eprb_causal::Variable> = names
                .iter()
                .enumerate()
                .map(|(i, v)| eprb_causal::Variable::new(v.clone(), &["x", "y", "z"][..1 + i % 3]))
                .collect();
            let dag = Dag::new(vars, &edges).unwrap();
            let model = eprb_causal::prob::random_model(&dag, &mut rng, None);
            let joint = model.factorize();
            for cpd in model.cpds() {
                let parent_vars: Vec<&eprb_causal::Variable> =
                    cpd.parents.iter().map(|p| dag.variable(p).unwrap()).collect();
                let assignments = parent_vars
                    .iter()
                    .map(|v| v.domain.iter())
                    .multi_cartesian_product()
                    .collect::<Vec<_>>();
                let assignments = if parent_vars.is_empty() { vec![vec![]] } else { assignments };
                for (row, values) in cpd.rows.iter().zip(assignments) {
                    let evidence: Vec<(&str, &str)> = cpd
                        .parents
                        .iter()
                        .map(String::as_str)
                        .zip(values.iter().map(|s| s.as_str()))
                        .collect();
                    let got = joint.conditional_vector(&cpd.child, &evidence).unwrap();
                    for (p, q) in got.iter().zip(row) {
                        assert!((p - q).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn some_paths_cancel_at_standard_geometry() {
    let k = AmplitudeKernel::new(EprbGeometry::standard(), Intermediary::Unmeasured, 1.0).unwrap();
    let mut witnessed = false;
    for i in 0..2 {
        for j in 0..2 {
            for a in Sign::BOTH {
                for b in Sign::BOTH {
                    let terms: Vec<f64> = k.path_terms(i, j, a, b).iter().flatten().map(|t| t.re).collect();
                    let total: f64 = terms.iter().sum();
                    let largest = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                    let opposite = terms.iter().any(|&t| t > 1e-12) && terms.iter().any(|&t| t < -1e-12);
                    witnessed |= opposite && total.abs() < largest - 1e-12;
                }
            }
        }
    }
    assert!(witnessed);
}
