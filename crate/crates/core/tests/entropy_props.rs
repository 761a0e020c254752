use markovkit_core::qcore::random::{random_full_rank, random_state, trial_rng};
use markovkit_core::qcore::{
    binary_entropy, conditional_entropy, eta, eta0, fidelity, qcmi, trace_distance,
    von_neumann_entropy,
};
use markovkit_core::{DensityState, SystemLayout, Tolerances, Tripartition};
use proptest::prelude::*;

fn state(dims: (usize, usize, usize), rank: usize, seed: u64) -> DensityState {
    let layout = SystemLayout::abc(dims.0, dims.1, dims.2).unwrap();
    let d = layout.total_dim();
    let mut rng = trial_rng(seed, 0);
    random_state(layout, rank.clamp(1, d), &mut rng).unwrap()
}

/// `ρ` and a mixture `(1 − λ)ρ + λτ` at trace distance at most `max_eps`.
fn nearby_pair(layout: SystemLayout, max_eps: f64, seed: u64) -> (DensityState, DensityState, f64) {
    let mut rng = trial_rng(seed, 1);
    let rho = random_state(
        layout.clone(),
        1 + (seed as usize) % layout.total_dim(),
        &mut rng,
    )
    .unwrap();
    let tau = random_full_rank(layout, &mut rng).unwrap();
    let gap = trace_distance(&rho, &tau).unwrap();
    let lambda = (max_eps / gap).min(1.0);
    let sigma = rho.mix(&tau, lambda).unwrap();
    let eps = trace_distance(&rho, &sigma).unwrap();
    (rho, sigma, eps)
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=3, 1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn strong_subadditivity(d in dims(), rank in 1usize..=27, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let rho = state(d, rank, seed);
        let i = qcmi(&rho, &Tripartition::abc(), &tol).unwrap();
        prop_assert!(i >= -1e-9, "qcmi {i}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fannes_inequality(d in 2usize..=8, eps in 0.0f64..0.3, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let layout = SystemLayout::single("X", d).unwrap();
        let (rho, sigma, e) = nearby_pair(layout, eps, seed);
        let gap = (von_neumann_entropy(&rho, &tol).unwrap() - von_neumann_entropy(&sigma, &tol).unwrap()).abs();
        let log_d = (d as f64).log2();
        prop_assert!(gap <= e * log_d + eta0(e) + 1e-12);
        prop_assert!(e * log_d + eta0(e) <= eta(e) * log_d + 1e-12);
    }

    #[test]
    fn alicki_fannes_inequality(da in 2usize..=3, db in 1usize..=3, eps in 0.0f64..0.9, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let layout = SystemLayout::new([("A", da), ("B", db)]).unwrap();
        let (rho, sigma, e) = nearby_pair(layout, eps, seed);
        let s = |x: &DensityState| conditional_entropy(x, &["A"], &["B"], &tol).unwrap();
        let gap = (s(&rho) - s(&sigma)).abs();
        let log_da = (da as f64).log2();
        let bound = 4.0 * e * log_da + 2.0 * binary_entropy(e);
        prop_assert!(gap <= bound + 1e-12, "gap {gap} bound {bound}");
        prop_assert!(gap <= 4.0 * eta(e) * log_da + 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(d in dims(), s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (x, y, z) = (state(d, 27, s1), state(d, 2, s2), state(d, 1, s3));
        let dxy = trace_distance(&x, &y).unwrap();
        let dyz = trace_distance(&y, &z).unwrap();
        let dxz = trace_distance(&x, &z).unwrap();
        prop_assert!(dxz <= dxy + dyz + 1e-12);
        prop_assert!((dxy - trace_distance(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(trace_distance(&x, &x).unwrap() < 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&dxy));
    }

    #[test]
    fn fuchs_van_de_graaf(d in dims(), r1 in 1usize..=27, r2 in 1usize..=27, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (state(d, r1, s1), state(d, r2, s2));
        let f = fidelity(&x, &y).unwrap();
        let t = trace_distance(&x, &y).unwrap() / 2.0;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f), "fidelity {f}");
        let f = f.clamp(0.0, 1.0);
        prop_assert!(1.0 - f.sqrt() <= t + 1e-9);
        prop_assert!(t * t <= 1.0 - f + 1e-12);
    }

    #[test]
    fn partial_trace_commutes_with_reordering(d in dims(), seed in any::<u64>()) {
        let rho = state(d, 27, seed);
        let ordered = rho.reduce_ordered(&["C", "A"]).unwrap();
        let sorted = rho.partial_trace(&["C", "A"]).unwrap();
        prop_assert_eq!(sorted.layout().labels().collect::<Vec<_>>(), vec!["A", "C"]);
        let swapped = sorted.permute(&["C", "A"]).unwrap();
        prop_assert!((ordered.matrix() - swapped.matrix()).max_abs() < 1e-14);
        let via_perm = rho.permute(&["B", "C", "A"]).unwrap().partial_trace(&["C", "A"]).unwrap();
        prop_assert!((via_perm.matrix() - ordered.matrix()).max_abs() < 1e-14);
    }
}
