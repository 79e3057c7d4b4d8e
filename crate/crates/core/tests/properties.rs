mod common;

use common::*;
use entrolab_core::entropy::{mutual_information, relative_entropy, ExtendedReal};
use entrolab_core::linalg::{
    c, frobenius, identity, operator_norm, partial_trace, tensor, trace_norm, BipartiteDims, CMatrix,
    DensityOperator, HermitianOperator, RealFunction, Subsystem,
};
use entrolab_core::statesgen::{
    classical_diagonal_pair, ginibre_density, random_observable, EnsembleKind, EnsembleSpec,
};
use entrolab_core::superops::{
    h_operator, l_operator, modular_average_channel, pinching_channel, tg_kernel, tg_quadrature,
    QuadratureSpec,
};
use entrolab_core::verify::{
    check_classical_suite, check_golden_thompson, check_lieb, check_main_theorem, check_pinsker,
    check_step4, run_breakdown, Checker,
};
use entrolab_core::wlp::{check_l1_contraction, duality_witness_l1, WeightedSpace};
use proptest::prelude::*;

fn dims_strategy() -> impl Strategy<Value = BipartiteDims> {
    (1usize..=3, 1usize..=3).prop_map(|(a, b)| BipartiteDims::new(a, b).unwrap())
}

fn state(d: usize, seed: u64) -> DensityOperator {
    ginibre_density(d, seed).unwrap().state
}

fn observable(d: usize, seed: u64) -> HermitianOperator {
    random_observable(d, seed, 2.0).unwrap()
}

fn ginibre_pair(dims: BipartiteDims, seed: u64) -> (DensityOperator, DensityOperator) {
    let spec = EnsembleSpec {
        kind: EnsembleKind::GinibreFullRank,
        dims,
        epsilon: 0.0,
        seed,
    };
    let pair = spec.sample(0).unwrap();
    (pair.rho, pair.sigma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_matches_index_sums(dims in dims_strategy(), seed in any::<u64>()) {
        let x = state(dims.total(), seed).matrix().clone() * c(0.3, 0.7);
        for (keep, keep_a) in [(Subsystem::A, true), (Subsystem::B, false)] {
            let ours = partial_trace(&x, dims, keep).unwrap();
            let oracle = partial_trace_loops(&x, dims.dim_a, dims.dim_b, keep_a);
            prop_assert!(frobenius(&(ours - oracle)) < 1e-13);
        }
    }

    #[test]
    fn partial_trace_is_adjoint_to_tensoring(dims in dims_strategy(), seed in any::<u64>()) {
        let y = state(dims.total(), seed).into_op();
        let xa = observable(dims.dim_a, seed ^ 1);
        let lhs = y.trace_product(&tensor(xa.matrix(), &identity(dims.dim_b)));
        let ya = y.partial_trace(dims, Subsystem::A).unwrap();
        let rhs = ya.trace_product(xa.matrix());
        prop_assert!((lhs - rhs).norm() < 1e-12);

        let z = state(dims.total(), seed ^ 2).into_op();
        let combo = y.scale(0.4).add(&z.scale(-1.7)).unwrap();
        let split = y.partial_trace(dims, Subsystem::B).unwrap().scale(0.4)
            .add(&z.partial_trace(dims, Subsystem::B).unwrap().scale(-1.7)).unwrap();
        let direct = combo.partial_trace(dims, Subsystem::B).unwrap();
        prop_assert!(frobenius(&(direct.matrix() - split.matrix())) < 1e-13);
    }

    #[test]
    fn norms_match_oracles(d in 1usize..=6, seed in any::<u64>()) {
        let x = observable(d, seed);
        let y = observable(d, seed ^ 3);
        let general: CMatrix = x.matrix() * y.matrix();
        let op = operator_norm(&general).unwrap();
        prop_assert!((op - power_iteration_norm(&general)).abs() < 1e-8 * op.max(1.0));
        prop_assert!((x.operator_norm().unwrap() - power_iteration_norm(x.matrix())).abs() < 1e-8);
        prop_assert!((x.trace_norm().unwrap() - trace_norm(x.matrix()).unwrap()).abs() < 1e-12);
        // Hölder
        let pairing = y.trace_product(x.matrix()).norm();
        prop_assert!(pairing <= x.operator_norm().unwrap() * y.trace_norm().unwrap() + 1e-12);
    }

    #[test]
    fn exp_and_log(d in 1usize..=6, seed in any::<u64>()) {
        let x = observable(d, seed);
        let e = x.apply(RealFunction::Exp).unwrap();
        let oracle = expm_taylor(x.matrix());
        prop_assert!(frobenius(&(e.matrix() - &oracle)) < 1e-11 * frobenius(&oracle));
        let back = e.apply(RealFunction::Log).unwrap();
        prop_assert!(frobenius(&(back.matrix() - x.matrix())) < 1e-11);
    }

    #[test]
    fn relative_entropy_matches_double_sum(dims in dims_strategy(), seed in any::<u64>()) {
        let (rho, sigma) = ginibre_pair(dims, seed);
        let ours = relative_entropy(&rho, &sigma).unwrap().require_finite().unwrap();
        prop_assert!((ours - relative_entropy_double_sum(&rho, &sigma)).abs() < 1e-10);
        prop_assert!(ours >= -1e-10);
    }

    #[test]
    fn classical_suite_holds(dims in dims_strategy(), seed in any::<u64>()) {
        let (rho, sigma) = ginibre_pair(dims, seed);
        for r in check_classical_suite(&rho, &sigma, dims).unwrap() {
            prop_assert!(r.pass, "{:?}", r);
        }
        prop_assert!(check_pinsker(&rho, &sigma).unwrap().pass);
    }

    #[test]
    fn diagonal_states_reduce_to_scalars(dims in dims_strategy(), seed in any::<u64>()) {
        let (rho, sigma) = classical_diagonal_pair(dims, seed).unwrap();
        let (p, q) = (diagonal(&rho), diagonal(&sigma));
        let ent = relative_entropy(&rho, &sigma).unwrap().to_f64();
        prop_assert!((ent - kl(&p, &q)).abs() < 1e-12);
        let (da, db) = (dims.dim_a, dims.dim_b);
        let pa: Vec<f64> = (0..da).map(|i| (0..db).map(|k| p[i * db + k]).sum()).collect();
        let pb: Vec<f64> = (0..db).map(|k| (0..da).map(|i| p[i * db + k]).sum()).collect();
        let product: Vec<f64> = (0..da * db).map(|n| pa[n / db] * pb[n % db]).collect();
        let mi = mutual_information(&rho, dims).unwrap().to_f64();
        prop_assert!((mi - kl(&p, &product)).abs() < 1e-12);
    }

    #[test]
    fn lieb_kernel_agrees_with_oracles(d in 1usize..=5, seed in any::<u64>()) {
        let g = state(d, seed);
        let f = observable(d, seed ^ 5);
        let kernel = tg_kernel(g.op(), f.matrix()).unwrap();
        let quad = tg_quadrature(g.op(), f.matrix(), &QuadratureSpec::default()).unwrap();
        let scale = frobenius(&kernel).max(1.0);
        prop_assert!(frobenius(&(&kernel - &quad)) < 1e-8 * scale);
        let fd = log_derivative_fd(g.matrix(), f.matrix(), 1e-5 * g.eig().unwrap().min_eigenvalue());
        prop_assert!(frobenius(&(&kernel - fd)) < 1e-5 * scale);
    }

    #[test]
    fn lieb_kernel_is_positive(d in 1usize..=5, seed in any::<u64>()) {
        let g = state(d, seed);
        let f = state(d, seed ^ 7);
        let t = HermitianOperator::new(tg_kernel(g.op(), f.matrix()).unwrap()).unwrap();
        prop_assert!(t.eig().unwrap().min_eigenvalue() >= -1e-10 * t.operator_norm().unwrap());
    }

    #[test]
    fn trace_inequalities(d in 1usize..=5, seed in any::<u64>()) {
        let (a, b, h) = (observable(d, seed), observable(d, seed ^ 11), observable(d, seed ^ 13));
        prop_assert!(check_golden_thompson(&a, &b).unwrap().pass);
        prop_assert!(check_lieb(&a, &b, &h).unwrap().pass);
    }

    #[test]
    fn correction_operator_is_orthogonal_to_marginals(dims in dims_strategy(), seed in any::<u64>()) {
        let sigma = state(dims.total(), seed);
        let (sa, sb) = sigma.marginals(dims).unwrap();
        let l = l_operator(&sigma, dims).unwrap();
        let oa = observable(dims.dim_a, seed ^ 17);
        let ob = observable(dims.dim_b, seed ^ 19);
        prop_assert!(l.trace_product(sa.op().tensor(&ob).matrix()).norm() <= 1e-9);
        prop_assert!(l.trace_product(oa.tensor(sb.op()).matrix()).norm() <= 1e-9);
    }

    #[test]
    fn step4_and_trace_distance_bounds(dims in dims_strategy(), seed in any::<u64>()) {
        let sigma = state(dims.total(), seed);
        let r = check_step4(&sigma, dims).unwrap();
        prop_assert!(r.pass && !r.any_failure(), "{:?}", r);
    }

    #[test]
    fn improvement_regime_is_consistent(dims in dims_strategy(), seed in any::<u64>(), eps in 0.0f64..0.2) {
        let spec = EnsembleSpec { kind: EnsembleKind::ProductPerturbed, dims, epsilon: eps, seed };
        let pair = spec.sample(0).unwrap();
        let b = run_breakdown(&pair.rho, &pair.sigma, dims).unwrap();
        if b.h_norm <= 0.5 - 1e-9 {
            prop_assert!(b.alpha <= 2.0);
            prop_assert!(b.alpha * b.d_full <= 2.0 * b.d_full + 1e-12);
        }
        prop_assert_eq!(b.improvement_regime, b.alpha < 2.0);
    }

    #[test]
    fn weighted_norms(d in 1usize..=5, seed in any::<u64>()) {
        let rho = state(d, seed);
        let f = observable(d, seed ^ 23);
        let mut last = 0.0;
        for p in [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, f64::INFINITY] {
            let n = WeightedSpace::new(rho.clone(), p).unwrap().norm(&f).unwrap();
            prop_assert!(n >= last - 1e-12, "p = {}: {} < {}", p, n, last);
            last = n;
        }
        prop_assert_eq!(last, f.operator_norm().unwrap());
        let l1 = WeightedSpace::new(rho.clone(), 1.0).unwrap();
        let (y, value) = duality_witness_l1(&f, &rho).unwrap();
        prop_assert!((value - l1.norm(&f).unwrap()).abs() < 1e-10);
        prop_assert!(y.operator_norm().unwrap() <= 1.0 + 1e-12);
        // any contraction pairs below the witness
        let other = observable(d, seed ^ 29);
        let other = other.scale(1.0 / other.operator_norm().unwrap().max(1e-300));
        prop_assert!(l1.inner(&other, &f).unwrap() <= value + 1e-10);
    }

    #[test]
    fn channels_contract_weighted_l1(d in 1usize..=4, seed in any::<u64>()) {
        let rho = state(d, seed);
        let x = observable(d, seed ^ 31);
        let pinch = pinching_channel(&rho).unwrap();
        let r = check_l1_contraction(&pinch, &rho, &x).unwrap();
        prop_assert!(r.pass, "{:?}", r);
        let modular = modular_average_channel(&rho, &QuadratureSpec::default()).unwrap();
        let r = check_l1_contraction(&modular, &rho, &x).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn theorem_and_chain_hold(dims in dims_strategy(), seed in any::<u64>(), kind_index in 0usize..5) {
        let spec = EnsembleSpec { kind: EnsembleKind::ALL[kind_index], dims, epsilon: 0.5, seed };
        let pair = spec.sample(3).unwrap();
        prop_assert!(check_main_theorem(&pair.rho, &pair.sigma, dims).unwrap().pass);
        let b = Checker::default().breakdown(&pair.rho, &pair.sigma, dims).unwrap();
        prop_assert!(b.chain_sound);
        for (name, r) in b.reports() {
            prop_assert!(r.pass, "{}: {:?}", name, r);
        }
    }

    #[test]
    fn sampling_is_reproducible(dims in dims_strategy(), seed in any::<u64>(), kind_index in 0usize..5, trial in 0u64..100) {
        let spec = EnsembleSpec { kind: EnsembleKind::ALL[kind_index], dims, epsilon: 0.25, seed };
        let (a, b) = (spec.sample(trial).unwrap(), spec.sample(trial).unwrap());
        prop_assert_eq!(a.rho.matrix(), b.rho.matrix());
        prop_assert_eq!(a.sigma.matrix(), b.sigma.matrix());
    }
}

#[test]
fn h_operator_of_bell_state() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let bell = DensityOperator::pure(&[c(s, 0.0), z, z, c(s, 0.0)]).unwrap();
    let dims = BipartiteDims::new(2, 2).unwrap();
    let h = h_operator(&bell, dims).unwrap();
    assert!((power_iteration_norm(h.matrix()) - 3.0).abs() < 1e-10);
    assert_eq!(relative_entropy(&DensityOperator::maximally_mixed(4), &bell).unwrap(), ExtendedReal::PosInfinity);
}
