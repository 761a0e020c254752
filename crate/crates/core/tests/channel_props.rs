use markovkit_core::channels::{
    dephase, heisenberg_weyl, petz_recovery, recovery_error, stinespring, Direction, PetzMode,
    RandomUnitaryEnsemble,
};
use markovkit_core::kidecomp::{ki_of_pure, random_preserving_isometry, state_preserving_channel};
use markovkit_core::markov::{markov_decompose, planted_markov_state, recovery_from_decomposition};
use markovkit_core::qcore::random::{random_pure, random_state, random_unitary, trial_rng};
use markovkit_core::qcore::{trace_distance, von_neumann_entropy};
use markovkit_core::{SystemLayout, Tolerances, Tripartition};
use proptest::prelude::*;

const COMPLETENESS: f64 = 1e-8;

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=3, 1usize..=3, 1usize..=3)
}

fn ensemble(da: usize, k: usize, seed: u64) -> RandomUnitaryEnsemble {
    let mut rng = trial_rng(seed, 7);
    let us = (0..k).map(|_| random_unitary(da, &mut rng)).collect();
    RandomUnitaryEnsemble::new(SystemLayout::single("A", da).unwrap(), us, 1e-10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn random_unitary_channels_do_not_decrease_entropy(d in dims(), k in 1usize..=4, rank in 1usize..=27, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let layout = SystemLayout::abc(d.0, d.1, d.2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let rho = random_state(layout.clone(), rank.min(layout.total_dim()), &mut rng).unwrap();
        let ens = ensemble(d.0, k, seed);
        prop_assert!(ens.to_channel().completeness_defect() <= COMPLETENESS);
        let out = ens.apply(&rho, &["A"]).unwrap();
        let before = von_neumann_entropy(&rho, &tol).unwrap();
        let after = von_neumann_entropy(&out, &tol).unwrap();
        prop_assert!(after >= before - 1e-9, "{before} -> {after}");
        let bc = out.partial_trace(&["B", "C"]).unwrap();
        prop_assert!(trace_distance(&bc, &rho.partial_trace(&["B", "C"]).unwrap()).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn constructed_channels_are_trace_preserving(d in dims(), rank in 1usize..=27, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let layout = SystemLayout::abc(d.0, d.1, d.2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let rho = random_state(layout.clone(), rank.min(layout.total_dim()), &mut rng).unwrap();
        let ab = rho.partial_trace(&["A", "B"]).unwrap();
        for mode in [PetzMode::Plain, PetzMode::Rotated(0.7), PetzMode::Averaged] {
            let ch = petz_recovery(&ab, &["A"], mode, &tol).unwrap();
            prop_assert!(ch.completeness_defect() <= COMPLETENESS);
        }
        let u = random_unitary(d.0, &mut rng);
        let basis: Vec<_> = (0..d.0).map(|c| u.column(c)).collect();
        let deph = dephase(SystemLayout::single("A", d.0).unwrap(), &basis, 1e-10).unwrap();
        prop_assert!(deph.completeness_defect() <= COMPLETENESS);
        let hw = RandomUnitaryEnsemble::new(SystemLayout::single("A", d.0).unwrap(), heisenberg_weyl(d.0), 1e-12).unwrap();
        prop_assert!(hw.to_channel().completeness_defect() <= COMPLETENESS);
        prop_assert!(stinespring(&hw).isometry_defect() <= 1e-12);

        let psi = random_pure(layout, &mut rng).unwrap();
        let ki = ki_of_pure(&psi, &Tripartition::abc(), &tol).unwrap();
        let isos: Vec<_> = ki.blocks.iter().map(|b| random_preserving_isometry(&b.omega, 2, &mut rng)).collect();
        let ch = state_preserving_channel(&ki, &isos, &tol).unwrap();
        prop_assert!(ch.completeness_defect() <= COMPLETENESS);

        let planted = planted_markov_state(d.0, d.2, &[(1, 1), (1, 2)], &mut rng).unwrap();
        let md = markov_decompose(&planted, &Tripartition::abc(), &tol).unwrap();
        for dir in [Direction::FromBC, Direction::FromAB] {
            let ch = recovery_from_decomposition(&md, dir, &tol).unwrap();
            prop_assert!(ch.completeness_defect() <= COMPLETENESS);
        }
    }

    #[test]
    fn rotated_petz_at_zero_is_plain(d in dims(), rank in 1usize..=27, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let layout = SystemLayout::abc(d.0, d.1, d.2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let rho = random_state(layout.clone(), rank.min(layout.total_dim()), &mut rng).unwrap();
        let g = Tripartition::abc();
        for dir in [Direction::FromBC, Direction::FromAB] {
            let plain = recovery_error(&rho, &g, dir, PetzMode::Plain, &tol).unwrap();
            let rot = recovery_error(&rho, &g, dir, PetzMode::Rotated(0.0), &tol).unwrap();
            prop_assert!((plain - rot).abs() <= 1e-12);
        }
        let bc = rho.partial_trace(&["B", "C"]).unwrap();
        let a = petz_recovery(&bc, &["C"], PetzMode::Plain, &tol).unwrap();
        let b = petz_recovery(&bc, &["C"], PetzMode::Rotated(0.0), &tol).unwrap();
        let x = rho.partial_trace(&["B"]).unwrap();
        let ya = a.apply(&x, &["B"]).unwrap();
        let yb = b.apply(&x, &["B"]).unwrap();
        prop_assert!((ya.matrix() - yb.matrix()).max_abs() <= 1e-12);
    }
}
