use measdiv::closed_form::{fidelity, sandwiched_renyi};
use measdiv::generator::FGenerator;
use measdiv::linalg::random::{haar_unitary, random_density};
use measdiv::linalg::{partial_trace, BipartiteShape, Keep, PositiveOperator};
use measdiv::measurement::{measurement_value, search_povm};
use measdiv::uhlmann::{solve_extension, Direction, ExtensionProblem, Order};
use measdiv::variational::{measured_f_divergence, measured_renyi, witness_measurement, SolveOptions};
use proptest::prelude::*;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn witness_measurement_attains_the_value_on_qutrits() {
    for seed in 0..4 {
        let rho = random_density(3, 3, 10 + seed);
        let sigma = random_density(3, 2 + seed as usize % 2, 20 + seed);
        for g in [FGenerator::kl(), FGenerator::renyi(0.5).unwrap(), FGenerator::renyi(2.0).unwrap()] {
            let r = measured_f_divergence(&rho, &sigma, &g, &opts()).unwrap();
            let m = witness_measurement(&r).unwrap();
            let v = measurement_value(&rho, &sigma, &g, &m).unwrap();
            if r.finite {
                assert!((v - r.value).abs() < 1e-7, "{g}: {v} vs {}", r.value);
            } else {
                assert!(v.is_infinite());
            }
            let (best, _) = search_povm(&rho, &sigma, &g, 9, 200, seed).unwrap();
            assert!(best <= r.value + 1e-7);
        }
    }
}

#[test]
fn scaling_the_second_argument_shifts_renyi_by_log() {
    let rho = random_density(3, 3, 31);
    let sigma = random_density(3, 3, 32);
    let scaled = sigma.scale(2.5).unwrap();
    for alpha in [0.3, 0.5, 1.0, 2.0] {
        let d = measured_renyi(&rho, &sigma, alpha, &opts()).unwrap();
        let ds = measured_renyi(&rho, &scaled, alpha, &opts()).unwrap();
        assert!((ds - (d - 2.5f64.ln())).abs() < 1e-7, "alpha {alpha}");
    }
}

#[test]
fn half_order_extension_matches_marginal_fidelity() {
    let shape = BipartiteShape::new(2, 2).unwrap();
    let sigma = random_density(4, 3, 41);
    let rho_a = random_density(2, 2, 42);
    let order = Order::renyi(0.5).unwrap();
    let p = ExtensionProblem::new(Direction::ExtendRho, sigma.clone(), rho_a.clone(), shape, order).unwrap();
    let r = solve_extension(&p, &opts()).unwrap();
    let sigma_a = PositiveOperator::new(partial_trace(sigma.op(), shape, Keep::A).unwrap()).unwrap();
    let oracle = -2.0 * fidelity(&rho_a, &sigma_a).unwrap().ln();
    assert!((r.achieved - oracle).abs() < 1e-6, "{} vs {oracle}", r.achieved);
    let back = partial_trace(r.extension.op(), shape, Keep::A).unwrap();
    assert!(back.max_abs_diff(rho_a.op()) < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn common_unitary_leaves_measured_divergence_unchanged(seed in 0u64..1000) {
        let rho = random_density(3, 3, seed);
        let sigma = random_density(3, 3, seed + 5000);
        let u = haar_unitary(3, seed + 9000);
        let ru = PositiveOperator::new(rho.op().conjugate_by(&u)).unwrap();
        let su = PositiveOperator::new(sigma.op().conjugate_by(&u)).unwrap();
        for alpha in [0.5, 2.0] {
            let a = measured_renyi(&rho, &sigma, alpha, &opts()).unwrap();
            let b = measured_renyi(&ru, &su, alpha, &opts()).unwrap();
            prop_assert!((a - b).abs() < 1e-7);
            prop_assert!(a <= sandwiched_renyi(&rho, &sigma, alpha).unwrap() + 1e-7);
        }
    }
}
