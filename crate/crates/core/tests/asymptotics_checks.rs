use gausspen_core::asymptotics::{
    ridge_rootn_bias, run_bias_experiment, run_consistency_experiment, simulate_linear_data, theoretical_rootn_bias,
    LambdaRule, SimError, SimSpec,
};
use gausspen_core::linalg::Matrix;
use gausspen_core::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimizes `V(u) = uᵀCu + 2λ₀κ Σ uⱼβⱼe^{−κβⱼ²}` (W = 0) by Gauss-Seidel sweeps.
fn minimize_v(c: &Matrix, beta: &[f64], lambda0: f64, kappa: f64) -> Vec<f64> {
    let p = beta.len();
    let linear: Vec<f64> = beta.iter().map(|&b| 2.0 * lambda0 * kappa * b * (-kappa * b * b).exp()).collect();
    let mut u = vec![0.0; p];
    for _ in 0..10_000 {
        let mut change: f64 = 0.0;
        for j in 0..p {
            // ∂V/∂uⱼ = 2(Cu)ⱼ + linearⱼ = 0 solved for uⱼ.
            let off: f64 = (0..p).filter(|&k| k != j).map(|k| c[(j, k)] * u[k]).sum();
            let next = -(linear[j] / 2.0 + off) / c[(j, j)];
            change = change.max((next - u[j]).abs());
            u[j] = next;
        }
        if change < 1e-16 {
            break;
        }
    }
    u
}

fn random_spd(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
    let a = Matrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let mut c = a.matmul_t(&a).unwrap();
    for i in 0..p {
        c[(i, i)] += 0.5;
    }
    c
}

#[test]
fn closed_form_bias_matches_direct_minimization_of_v() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let p = rng.random_range(1..5);
        let c = random_spd(&mut rng, p);
        let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lambda0 = rng.random_range(0.0..3.0);
        let kappa = rng.random_range(0.1..5.0);
        let closed = theoretical_rootn_bias(&c, &beta, lambda0, kappa).unwrap();
        let direct = minimize_v(&c, &beta, lambda0, kappa);
        for (a, b) in closed.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-8, "{closed:?} vs {direct:?}");
        }
    }
}

#[test]
fn bias_examples() {
    let one = Matrix::identity(1);
    let b = theoretical_rootn_bias(&one, &[1.0], 1.0, 1.0).unwrap();
    assert!((b[0] + (-1f64).exp()).abs() < 1e-15);
    assert!((b[0] + 0.36788).abs() < 1e-5);
    let tiny = theoretical_rootn_bias(&one, &[5.0], 1.0, 10.0).unwrap();
    assert!(tiny[0].abs() <= 1e-100);
    let zero = theoretical_rootn_bias(&Matrix::identity(3), &[0.0; 3], 2.0, 4.0).unwrap();
    assert_eq!(zero, vec![0.0; 3]);
}

#[test]
fn bias_decays_like_beta_times_gaussian_factor() {
    let ratios: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&b: &f64| {
            let bias = theoretical_rootn_bias(&Matrix::identity(1), &[b], 1.3, 1.0).unwrap()[0];
            bias.abs() / (b * (-b * b).exp())
        })
        .collect();
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn ridge_bias_grows_while_gaussian_bias_vanishes() {
    let c = Matrix::identity(1);
    let g_small = theoretical_rootn_bias(&c, &[0.3], 1.0, 10.0).unwrap()[0].abs();
    let g_large = theoretical_rootn_bias(&c, &[3.0], 1.0, 10.0).unwrap()[0].abs();
    assert!(g_small / g_large > 1e10);
    let r_small = ridge_rootn_bias(&c, &[0.3], 1.0).unwrap()[0].abs();
    let r_large = ridge_rootn_bias(&c, &[3.0], 1.0).unwrap()[0].abs();
    assert!((r_large / r_small - 10.0).abs() < 1e-12);
}

#[test]
fn simulated_design_follows_its_covariance() {
    let spec = SimSpec::isotropic(vec![0.5, -1.0, 2.0], 1.0, 10_000, 0.0, 1.0);
    let problem = simulate_linear_data(&spec, 0).unwrap();
    let mut gram = problem.x().gram();
    gram.scale(1.0 / 10_000.0);
    assert!(gram.frobenius_distance(&Matrix::identity(3)) < 0.05);
    assert!(problem.is_centered());
}

#[test]
fn pure_noise_response() {
    let n = 4_000;
    let spec = SimSpec::isotropic(vec![0.0, 0.0], 2.0, n, 0.0, 1.0);
    let problem = simulate_linear_data(&spec, 7).unwrap();
    let y = problem.y();
    assert!(stats::mean(y).abs() < 1e-10);
    let var = stats::sample_sd(y).powi(2);
    assert!((var / 4.0 - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{var}");
}

#[test]
fn simulation_is_deterministic() {
    let spec = SimSpec { seed: 5, ..SimSpec::isotropic(vec![1.0, 2.0], 1.0, 300, 1.0, 1.0) };
    let a = simulate_linear_data(&spec, 3).unwrap();
    let b = simulate_linear_data(&spec, 3).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate_linear_data(&spec, 4).unwrap());
    let report_spec = SimSpec { replicates: 20, ..spec };
    assert_eq!(run_bias_experiment(&report_spec).unwrap(), run_bias_experiment(&report_spec).unwrap());
}

#[test]
fn invalid_covariance_is_a_configuration_error() {
    let mut spec = SimSpec::isotropic(vec![1.0, 2.0], 1.0, 50, 1.0, 1.0);
    spec.c = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    assert!(matches!(simulate_linear_data(&spec, 0), Err(SimError::Covariance(_))));
    spec.c = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
    assert!(matches!(simulate_linear_data(&spec, 0), Err(SimError::InvalidSpec(_))));
}

#[test]
fn unpenalized_bias_is_centered() {
    let spec = SimSpec { replicates: 200, ..SimSpec::isotropic(vec![1.0, -0.5], 1.0, 400, 0.0, 10.0) };
    let report = run_bias_experiment(&spec).unwrap();
    assert_eq!(report.theoretical_bias, vec![0.0, 0.0]);
    assert!(report.z_scores.iter().all(|&z| z <= 3.0), "{:?}", report.z_scores);
    assert!(report.empirical_se.iter().all(|&s| s > 0.0));
}

#[test]
fn unpenalized_error_halves_when_n_quadruples() {
    let template = SimSpec {
        replicates: 200,
        lambda_rule: LambdaRule::Power { exponent: 0.5 },
        ..SimSpec::isotropic(vec![1.0, -2.0], 1.0, 100, 0.0, 10.0)
    };
    let rows = run_consistency_experiment(&template, &[200, 800, 3200]).unwrap();
    for w in rows.windows(2) {
        let ratio = w[1].median_error / w[0].median_error;
        assert!((ratio - 0.5).abs() <= 0.15, "{ratio}");
    }
}

#[test]
fn linear_growth_of_lambda_leaves_an_error_floor() {
    let template = SimSpec {
        replicates: 50,
        lambda_rule: LambdaRule::Power { exponent: 1.0 },
        ..SimSpec::isotropic(vec![1.0, -2.0], 1.0, 100, 5.0, 10.0)
    };
    let rows = run_consistency_experiment(&template, &[100, 400, 1600]).unwrap();
    for row in &rows {
        assert!(row.median_error > 1.0, "{row:?}");
    }
}
