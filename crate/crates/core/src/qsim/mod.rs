//! A small exact quantum simulator for the two-party disambiguation
//! circuit: states, gates, the variational ansatz with total-variation
//! training, word-state extraction, and entanglement measures.

pub mod ansatz;
pub mod entangle;
pub mod gates;
pub mod state;

pub use ansatz::{
    build_ansatz, causal_check, circuit_model, circuit_model_sampled, circuit_state,
    finite_diff_gradient, outcome_distribution, party_unitary, readout_state, recombine,
    state_overlap, target_from_222, total_variation, train, word_state, AnsatzParams, CircuitOp,
    Party, Shape, TrainConfig, TrainResult, WordState,
};
pub use entangle::{binary_entropy, concurrence, entanglement_entropy, entanglement_of_formation};
pub use gates::{standard_gate, GateName};
pub use state::{embed_gate, partial_trace, DensityMatrix, StateVector, Unitary};

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::state::{C_ONE, C_ZERO};
    use super::*;
    use crate::fractions::{build_222_model, causal_fraction_222, minimal_cost, Direction};

    #[test]
    fn rx_of_zero_is_identity() {
        let u = standard_gate(GateName::Rx, Some(0.0), None).unwrap();
        assert_eq!(u, Unitary::identity(2));
    }

    #[test]
    fn rx_and_rz_need_angles() {
        assert!(standard_gate(GateName::Rx, None, None).is_err());
        assert!(standard_gate(GateName::Rz, None, None).is_err());
        assert!(standard_gate(GateName::Cu, None, None).is_err());
    }

    #[test]
    fn cz_flips_the_sign_of_eleven() {
        let mut state = StateVector::basis(&[1, 1]);
        state.apply_unitary(&gates::cz(), &[0, 1]).unwrap();
        assert!((state.amplitudes()[3] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rz_pi_squared_is_identity_up_to_phase() {
        let u = gates::rz(std::f64::consts::PI);
        let sq = u.matmul(&u);
        assert!((sq.at(0, 0) - C_ONE).norm() < 1e-12);
        assert!((sq.at(1, 1) - C_ONE).norm() < 1e-12);
        assert!(sq.at(0, 1).norm() < 1e-12 && sq.at(1, 0).norm() < 1e-12);
    }

    #[test]
    fn all_gates_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let theta = rng.gen::<f64>() * 7.0 - 3.5;
            for u in [gates::rx(theta), gates::rz(theta)] {
                assert!(u.unitarity_defect() < 1e-12);
            }
        }
        for u in [
            gates::pauli_x(),
            gates::pauli_y(),
            gates::pauli_z(),
            gates::hadamard(),
            gates::cz(),
            gates::controlled(&gates::hadamard()).unwrap(),
        ] {
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn hadamard_makes_the_plus_state() {
        let mut state = StateVector::basis(&[0]);
        state.apply_unitary(&gates::hadamard(), &[0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((state.amplitudes()[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn identity_application_leaves_states_unchanged() {
        let mut state = StateVector::basis(&[1, 0]);
        let before = state.clone();
        state.apply_unitary(&Unitary::identity(2), &[1]).unwrap();
        assert_eq!(state, before);
    }

    #[test]
    fn conjugating_cz_by_hadamard_fixes_zero_zero() {
        // Path A: apply gates one by one.
        let mut state = StateVector::basis(&[0, 0]);
        state.apply_unitary(&gates::hadamard(), &[0]).unwrap();
        state.apply_unitary(&gates::cz(), &[0, 1]).unwrap();
        state.apply_unitary(&gates::hadamard(), &[0]).unwrap();
        // Path B: the explicit 4x4 product as an oracle.
        let h_full = embed_gate(&gates::hadamard(), &[0], 2).unwrap();
        let composite = h_full.matmul(&gates::cz()).matmul(&h_full);
        let mut oracle = StateVector::basis(&[0, 0]);
        oracle.apply_unitary(&composite, &[0, 1]).unwrap();
        for (a, b) in state.amplitudes().iter().zip(oracle.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((state.amplitudes()[0] - C_ONE).norm() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let params = AnsatzParams::seeded_uniform(2, rng.gen());
            let state = circuit_state(&params, 1, 0);
            assert!((state.norm_sq() - 1.0).abs() < 1e-12);
            let rho = readout_state(&params, 1, 0);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(rho.trace().im.abs() < 1e-12);
        }
    }

    #[test]
    fn bell_partial_trace_is_maximally_mixed() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(
            2,
            vec![
                Complex64::new(r, 0.0),
                C_ZERO,
                C_ZERO,
                Complex64::new(r, 0.0),
            ],
        )
        .unwrap();
        let reduced = partial_trace(&bell.density_matrix(), &[0]).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { 0.5 } else { 0.0 };
                assert!((reduced.at(r, c) - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn product_state_partial_trace_recovers_the_factor() {
        let mut one = StateVector::basis(&[1]);
        one.apply_unitary(&gates::rx(0.7), &[0]).unwrap();
        let rho = one.density_matrix();
        let sigma = StateVector::basis(&[0]).density_matrix();
        let joint = rho.tensor(&sigma);
        let back = partial_trace(&joint, &[0]).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((back.at(r, c) - rho.at(r, c)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reduced_eigenvalues_match_schmidt_coefficients() {
        // Oracle: SVD of the amplitude matrix of a random 2-qubit pure state.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let mut amps: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for a in &mut amps {
                *a /= norm;
            }
            let psi = StateVector::from_amplitudes(2, amps.clone()).unwrap();
            let reduced = partial_trace(&psi.density_matrix(), &[0]).unwrap();
            let m = nalgebra::DMatrix::from_fn(2, 2, |r, c| reduced.at(r, c));
            let mut eigs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let amp_matrix = nalgebra::DMatrix::from_fn(2, 2, |r, c| amps[r * 2 + c]);
            let mut schmidt_sq: Vec<f64> = amp_matrix
                .svd(false, false)
                .singular_values
                .iter()
                .map(|s| s * s)
                .collect();
            schmidt_sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (e, s) in eigs.iter().zip(&schmidt_sq) {
                assert!((e - s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn partial_trace_needs_a_kept_qubit() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn zero_angle_party_unitary_is_cz() {
        let u = party_unitary(&[[[0.0; 3]; 2]]);
        for r in 0..4 {
            for c in 0..4 {
                assert!((u.at(r, c) - gates::cz().at(r, c)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ansatz_parameter_and_gate_counts() {
        let params = AnsatzParams::seeded_uniform(2, 3);
        assert_eq!(params.n_parameters(), 24);
        let ops = build_ansatz(&params.noun);
        let singles = ops.iter().filter(|op| op.targets.len() == 1).count();
        let entanglers = ops.iter().filter(|op| op.targets.len() == 2).count();
        assert_eq!(singles, 6 * 2);
        assert_eq!(entanglers, 2);
    }

    #[test]
    fn flatten_round_trips() {
        let params = AnsatzParams::seeded_uniform(3, 17);
        let theta = params.flatten();
        let back = AnsatzParams::from_flat(3, &theta).unwrap();
        assert_eq!(back.noun, params.noun);
        assert_eq!(back.verb, params.verb);
    }

    #[test]
    fn zero_angle_circuit_is_deterministic() {
        let params = AnsatzParams::zeros(1);
        for i in 0..2u8 {
            for j in 0..2u8 {
                let row = outcome_distribution(&params, i, j);
                let expect = (i * 2 + j) as usize;
                for (k, &p) in row.iter().enumerate() {
                    let want = if k == expect { 1.0 } else { 0.0 };
                    assert!((p - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn circuit_models_are_normalized_and_causal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let params = AnsatzParams::seeded_uniform(1, rng.gen());
            let model = circuit_model(&params, Shape::SubjectVerb);
            for dist in model.distributions() {
                assert!((dist.total_mass() - 1.0).abs() < 1e-9);
            }
            let cf = causal_fraction_222(&model, Direction::FirstBeforeSecond).unwrap();
            assert!((cf - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn total_variation_basic_values() {
        let params = AnsatzParams::seeded_uniform(1, 99);
        let model = circuit_model(&params, Shape::VerbObject);
        assert_eq!(total_variation(&model, &model).unwrap(), 0.0);

        let basechsh = build_222_model(&[
            [0.5, 0.0, 0.0, 0.5],
            [0.375, 0.125, 0.125, 0.375],
            [0.375, 0.125, 0.125, 0.375],
            [0.125, 0.375, 0.375, 0.125],
        ])
        .unwrap();
        let uniform = crate::fractions::uniform_222_model();
        let tv = total_variation(&basechsh, &uniform).unwrap();
        assert!((tv - 0.5).abs() < 1e-12);
        let back = total_variation(&uniform, &basechsh).unwrap();
        assert_eq!(tv, back);
        // Mismatched scenarios are rejected.
        assert!(total_variation(&model, &uniform).is_err());
    }

    #[test]
    fn finite_differences_are_exact_on_quadratics() {
        let cost = |theta: &[f64]| theta.iter().map(|t| t * t).sum::<f64>();
        let grad = finite_diff_gradient(cost, &[1.0, 0.0], 1e-2);
        assert!((grad[0] - 2.0).abs() < 1e-9);
        assert!(grad[1].abs() < 1e-9);

        let constant = |_: &[f64]| 3.5;
        for g in finite_diff_gradient(constant, &[0.3, -0.2, 0.9], 1e-2) {
            assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn finite_differences_refine_quadratically_on_the_tv_cost() {
        let target = circuit_model(&AnsatzParams::seeded_uniform(1, 41), Shape::SubjectVerb);
        let cost = |theta: &[f64]| {
            let params = AnsatzParams::from_flat(1, theta).unwrap();
            total_variation(&circuit_model(&params, Shape::SubjectVerb), &target).unwrap()
        };
        let theta = AnsatzParams::seeded_uniform(1, 42).flatten();
        let coarse = finite_diff_gradient(cost, &theta, 1e-2);
        let fine = finite_diff_gradient(cost, &theta, 1e-3);
        for (c, f) in coarse.iter().zip(&fine) {
            assert!((c - f).abs() < 1e-3, "coarse {c} vs fine {f}");
        }
    }

    #[test]
    fn training_is_deterministic_and_non_increasing() {
        let target = circuit_model(&AnsatzParams::seeded_uniform(1, 61), Shape::SubjectVerb);
        let config = TrainConfig {
            steps: 40,
            seed: 62,
            ..TrainConfig::default()
        };
        let a = train(&target, Shape::SubjectVerb, 1, &config).unwrap();
        let b = train(&target, Shape::SubjectVerb, 1, &config).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.trace, b.trace);
        assert!(a.final_cost <= a.trace[0]);
        assert_eq!(a.trace.len(), 41);
    }

    #[test]
    fn training_approaches_a_self_generated_target() {
        let target = circuit_model(&AnsatzParams::seeded_uniform(1, 7), Shape::SubjectVerb);
        let config = TrainConfig {
            steps: 700,
            seed: 8,
            ..TrainConfig::default()
        };
        let result = train(&target, Shape::SubjectVerb, 1, &config).unwrap();
        assert!(result.final_cost <= 0.05, "cost {}", result.final_cost);
    }

    fn rebuild_on_circuit_scenario(
        rows: &[[f64; 4]; 4],
        shape: Shape,
    ) -> crate::scenario::EmpiricalModel {
        let probe = circuit_model(&AnsatzParams::zeros(1), shape);
        let scenario = probe.scenario().clone();
        let table = rows
            .iter()
            .map(|row| {
                crate::scenario::Distribution::from_pairs(
                    2,
                    vec![
                        (vec![0, 0], row[0]),
                        (vec![0, 1], row[1]),
                        (vec![1, 0], row[2]),
                        (vec![1, 1], row[3]),
                    ],
                )
                .unwrap()
            })
            .collect();
        crate::scenario::EmpiricalModel::new(scenario, table).unwrap()
    }

    #[test]
    fn training_respects_the_minimal_cost_bound() {
        // A signalling target: the trained causal circuit cannot reach it.
        let rows = [
            [0.9, 0.0, 0.1, 0.0],
            [0.2, 0.0, 0.8, 0.0],
            [0.5, 0.0, 0.5, 0.0],
            [0.5, 0.0, 0.5, 0.0],
        ];
        let circuit_target = rebuild_on_circuit_scenario(&rows, Shape::SubjectVerb);
        let bound = minimal_cost(&circuit_target).unwrap();
        assert!(bound > 0.0);
        let config = TrainConfig {
            steps: 150,
            seed: 3,
            ..TrainConfig::default()
        };
        let result = train(&circuit_target, Shape::SubjectVerb, 1, &config).unwrap();
        assert!(result.final_cost >= bound - 1e-9);
    }

    #[test]
    fn sampled_models_are_deterministic_per_seed() {
        let params = AnsatzParams::seeded_uniform(1, 13);
        let mut rng1 = ChaCha8Rng::seed_from_u64(1);
        let mut rng2 = ChaCha8Rng::seed_from_u64(1);
        let a = circuit_model_sampled(&params, Shape::SubjectVerb, 256, &mut rng1);
        let b = circuit_model_sampled(&params, Shape::SubjectVerb, 256, &mut rng2);
        assert_eq!(a, b);
        for dist in a.distributions() {
            assert!((dist.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_recombination_reproduces_the_model() {
        let params = AnsatzParams::seeded_uniform(2, 77);
        let combined = recombine(&params, &params).unwrap();
        let a = circuit_model(&params, Shape::SubjectVerb);
        let b = circuit_model(&combined, Shape::SubjectVerb);
        assert_eq!(a, b);
    }

    #[test]
    fn recombination_mixes_parties_and_checks_rounds() {
        let a = AnsatzParams::seeded_uniform(1, 1);
        let b = AnsatzParams::seeded_uniform(1, 2);
        let mixed = recombine(&a, &b).unwrap();
        assert_eq!(mixed.noun, a.noun);
        assert_eq!(mixed.verb, b.verb);
        let model = circuit_model(&mixed, Shape::VerbObject);
        for dist in model.distributions() {
            assert!((dist.total_mass() - 1.0).abs() < 1e-9);
        }
        assert!(
            (causal_fraction_222(&model, Direction::FirstBeforeSecond).unwrap() - 1.0).abs() < 1e-9
        );
        let c = AnsatzParams::seeded_uniform(2, 3);
        assert!(recombine(&a, &c).is_err());
    }

    #[test]
    fn word_states_are_well_formed() {
        let params = AnsatzParams::seeded_uniform(2, 19);
        let WordState::Pure(noun) = word_state(&params, Party::Noun, 1).unwrap() else {
            panic!("noun states are pure")
        };
        assert!((noun.norm_sq() - 1.0).abs() < 1e-12);
        let WordState::Mixed(verb) = word_state(&params, Party::Verb, 0).unwrap() else {
            panic!("verb states are mixed")
        };
        assert!((verb.trace().re - 1.0).abs() < 1e-12);
        let eigs = nalgebra::DMatrix::from_fn(2, 2, |r, c| verb.at(r, c))
            .symmetric_eigen()
            .eigenvalues;
        for v in eigs.iter() {
            assert!(*v >= -1e-9);
        }
        assert!(word_state(&params, Party::Noun, 2).is_err());
    }

    #[test]
    fn zero_angle_noun_state_is_the_input_basis_state() {
        let params = AnsatzParams::zeros(2);
        let WordState::Pure(noun) = word_state(&params, Party::Noun, 1).unwrap() else {
            panic!()
        };
        assert_eq!(noun, StateVector::basis(&[1, 0]));
    }

    #[test]
    fn overlaps_follow_the_born_rule() {
        let zero = WordState::Pure(StateVector::basis(&[0]));
        let one = WordState::Pure(StateVector::basis(&[1]));
        assert_eq!(state_overlap(&zero, &one).unwrap(), 0.0);
        assert_eq!(state_overlap(&zero, &zero).unwrap(), 1.0);
        let mixed = WordState::Mixed(DensityMatrix::maximally_mixed(1));
        assert!((state_overlap(&mixed, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(state_overlap(&zero, &mixed).is_err());
    }

    #[test]
    fn formation_matches_entropy_on_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let params = AnsatzParams::seeded_uniform(1, rng.gen());
            let WordState::Pure(psi) = word_state(&params, Party::Noun, 0).unwrap() else {
                panic!()
            };
            let entropy = entanglement_entropy(&psi, &[0]).unwrap();
            let formation = entanglement_of_formation(&psi.density_matrix()).unwrap();
            assert!(
                (entropy - formation).abs() < 1e-6,
                "{entropy} vs {formation}"
            );
            assert!((0.0..=1.0 + 1e-9).contains(&entropy));
        }
    }

    #[test]
    fn shot_based_training_is_deterministic() {
        let target = circuit_model(&AnsatzParams::seeded_uniform(1, 81), Shape::VerbObject);
        let config = TrainConfig {
            steps: 10,
            seed: 82,
            shots: 128,
            ..TrainConfig::default()
        };
        let a = train(&target, Shape::VerbObject, 1, &config).unwrap();
        let b = train(&target, Shape::VerbObject, 1, &config).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.params, b.params);
    }
}
