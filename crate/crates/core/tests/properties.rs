use incompat_core::corpus;
use incompat_core::incompat::depolarising_robustness;
use incompat_core::linalg::{haar_subspace, haar_unitary, rng_from_seed, Hermitian};
use incompat_core::povm::{validate, Assemblage, Povm};
use incompat_core::steering::{choi_apply, BipartiteState};
use proptest::prelude::*;

fn random_pair(seed: u64, dim: usize, rank: usize, ma: usize, mb: usize) -> Assemblage {
    let mut rng = rng_from_seed(seed);
    let a = Povm::random(dim, ma, rank, &mut rng);
    let b = Povm::random(dim, mb, rank, &mut rng);
    Assemblage::pair(a, b).unwrap()
}

fn eta(a: &Assemblage) -> f64 {
    depolarising_robustness(a).unwrap().eta
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn robustness_ignores_labels(seed in 0u64..10_000, ma in 2usize..4, mb in 2usize..4) {
        let a = random_pair(seed, 2, 1, ma, mb);
        let base = eta(&a);
        prop_assume!(base < 0.999);
        let m0 = a.measurement(0);
        let rev: Vec<usize> = (0..m0.outcomes()).rev().collect();
        let relabelled = Assemblage::pair(
            a.measurement(1).clone(),
            m0.permute_outcomes(&rev).unwrap(),
        ).unwrap();
        prop_assert!((eta(&relabelled) - base).abs() < 1e-6);
    }

    #[test]
    fn robustness_is_unitarily_invariant(seed in 0u64..10_000) {
        let a = random_pair(seed, 2, 1, 2, 3);
        let u = haar_unitary(2, &mut rng_from_seed(seed ^ 0x55));
        let rotated = Assemblage::new(
            a.measurements()
                .iter()
                .map(|m| {
                    Povm::new(m.elements().iter().map(|e| e.conjugate_by(&u)).collect()).unwrap()
                })
                .collect(),
        ).unwrap();
        prop_assert!((eta(&rotated) - eta(&a)).abs() < 1e-6);
    }

    #[test]
    fn robustness_rescales_under_noise(t in 0.75f64..1.0) {
        let noisy = corpus::sigma_xz().depolarise(t).unwrap();
        let expected = std::f64::consts::FRAC_1_SQRT_2 / t;
        prop_assert!((eta(&noisy) - expected).abs() < 1e-6);
    }

    #[test]
    fn truncation_yields_povms(seed in 0u64..10_000, n in 1usize..3) {
        let a = random_pair(seed, 3, 3, 3, 2);
        let p = haar_subspace(3, n, seed).unwrap();
        let t = a.truncate(&p).unwrap();
        prop_assert_eq!(t.dim(), n);
        prop_assert!(validate(&t).valid);
    }

    #[test]
    fn choi_channel_is_unital(seed in 0u64..10_000, p in 0.0f64..1.0) {
        let a = random_pair(seed, 3, 3, 3, 3);
        let rho = BipartiteState::isotropic(3, p).unwrap();
        let out = choi_apply(&rho, &a).unwrap();
        prop_assert!(validate(&out).valid);
        let sum = out.measurement(0).elements().iter().fold(Hermitian::zeros(3), |s, e| s.add(e));
        prop_assert!(sum.max_abs_diff(&Hermitian::identity(3)) < 1e-9);
    }

    #[test]
    fn haar_subspaces_are_projectors(seed in 0u64..10_000, n in 1usize..4) {
        let p = haar_subspace(4, n, seed).unwrap();
        prop_assert_eq!(p.rank(), n);
        let (idem, trace) = p.defect();
        prop_assert!(idem < 1e-10 && trace < 1e-10);
    }
}
