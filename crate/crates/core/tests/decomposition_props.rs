use markovkit_core::cost::markovianizing_cost;
use markovkit_core::kidecomp::{
    ki_of_pure, planted_ki_state, random_preserving_isometry, state_preserving_channel,
};
use markovkit_core::markov::{markov_decompose, nearest_markov_tilde, planted_markov_state};
use markovkit_core::protocols::random_markov_blocks;
use markovkit_core::qcore::random::{random_pure, random_unitary, trial_rng};
use markovkit_core::qcore::{mutual_information, qcmi, qcmi_pure, trace_distance, trace_norm};
use markovkit_core::{PureState, SystemLayout, Tolerances, Tripartition};
use proptest::prelude::*;

fn pure_dims() -> impl Strategy<Value = (usize, usize, usize)> {
    prop_oneof![
        Just((2, 2, 2)),
        Just((3, 2, 2)),
        Just((2, 3, 2)),
        Just((2, 2, 3))
    ]
}

fn random_psi(d: (usize, usize, usize), seed: u64) -> PureState {
    let mut rng = trial_rng(seed, 0);
    random_pure(SystemLayout::abc(d.0, d.1, d.2).unwrap(), &mut rng).unwrap()
}

fn ki_blocks() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1usize..=2, 1usize..=2), 1..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ki_reconstructs_and_preserving_channels_fix_the_state(blocks in ki_blocks(), seed in any::<u64>()) {
        let dc = 2;
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = trial_rng(seed, 0);
        let psi = planted_ki_state(&blocks, dc, &mut rng).unwrap();
        let ki = ki_of_pure(&psi, &g, &tol).unwrap();
        let ac = psi.reduce(&["A", "C"]).unwrap();
        prop_assert!(trace_norm(&(&ki.reconstruct() - ac.matrix())) <= 1e-8);
        prop_assert!(ki.residual <= 1e-8);
        let mut planted: Vec<_> = blocks.iter().map(|&(m, n)| (n, m)).collect();
        planted.sort_unstable();
        let mut found: Vec<_> = ki.blocks.iter().map(|b| (b.n, b.m)).collect();
        found.sort_unstable();
        prop_assert_eq!(found, planted);

        let isos: Vec<_> = ki.blocks.iter().map(|b| random_preserving_isometry(&b.omega, 2, &mut rng)).collect();
        let ch = state_preserving_channel(&ki, &isos, &tol).unwrap();
        let out = ch.apply(&ac, &["A"]).unwrap();
        prop_assert!(trace_distance(&out, &ac).unwrap() <= 1e-8);
        prop_assert_eq!(ki_of_pure(&psi, &g, &tol).unwrap(), ki);
    }

    #[test]
    fn markov_decomposition_round_trip(da in 1usize..=2, dc in 1usize..=2, db in 1usize..=4, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = trial_rng(seed, 0);
        let blocks = random_markov_blocks(db, &mut rng);
        let rho = planted_markov_state(da, dc, &blocks, &mut rng).unwrap();
        let md = markov_decompose(&rho, &g, &tol).unwrap();
        prop_assert!(trace_norm(&(&md.reconstruct() - rho.matrix())) <= 1e-8);
        prop_assert!(qcmi(&md.reconstruct_state().unwrap(), &g, &tol).unwrap() <= 1e-10);
    }

    #[test]
    fn tilde_keeps_marginal_and_carries_the_cost(d in pure_dims(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let psi = random_psi(d, seed);
        let tilde = nearest_markov_tilde(&psi, &g, &tol).unwrap();
        let a = tilde.partial_trace(&["A"]).unwrap();
        prop_assert!((a.matrix() - psi.reduce(&["A"]).unwrap().matrix()).max_abs() <= 1e-12);
        let info = mutual_information(&tilde, &["A"], &["B", "C"], &tol).unwrap();
        let cost = markovianizing_cost(&psi, &g, &tol).unwrap();
        prop_assert!((info - cost.m_dec_bits).abs() <= 1e-9);
        prop_assert!(cost.qcmi_lower_bits <= cost.m_dec_bits + 1e-9);
    }

    #[test]
    fn cost_is_invariant_under_local_unitaries(d in pure_dims(), which in 0usize..3, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let psi = random_psi(d, seed);
        let mut rng = trial_rng(seed, 1);
        let dims = [d.0, d.1, d.2];
        let mut u = markovkit_core::Matrix::identity(1);
        for (k, &dk) in dims.iter().enumerate() {
            let f = if k == which { random_unitary(dk, &mut rng) } else { markovkit_core::Matrix::identity(dk) };
            u = u.kron(&f);
        }
        let rotated = PureState::new(psi.layout().clone(), u.mul_vec(psi.vector()), 1e-10).unwrap();
        let m0 = markovianizing_cost(&psi, &g, &tol).unwrap().m_dec_bits;
        let m1 = markovianizing_cost(&rotated, &g, &tol).unwrap().m_dec_bits;
        prop_assert!((m0 - m1).abs() <= 1e-9);
        let q0 = qcmi_pure(&psi, &g, &tol).unwrap();
        prop_assert!((q0 - qcmi_pure(&rotated, &g, &tol).unwrap()).abs() <= 1e-9);
    }
}
