use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scbec::ensemble::CoupledEnsembleSpec;
use scbec::mc_stats::{fit_critical_phase, FitOptions, TrialBatchResult, TrialConfig, TrialRecord};
use scbec::scaling::{fpt_pdf_check, mean_fpt, ou_simulate, ou_stationary_series, OUParameters, SimOptions};

/// Unit stationary variance, so the boundary ratio s / sqrt(b/Theta) is `z`.
fn unit(z: f64, theta: f64) -> OUParameters {
    OUParameters::new(z, 1.0, theta, 1.0, 1.0, 0.0).unwrap()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn quadrature_matches_simulated_mean_fpt() {
    for (i, z) in [1.0, 1.5, 2.0].into_iter().enumerate() {
        let p = unit(z, 2.0);
        let mu0 = mean_fpt(&p).unwrap();
        let t = ou_simulate(&p, SimOptions::default(), 20_000, 100 + i as u64).unwrap();
        let m = mean(&t);
        assert!((m / mu0 - 1.0).abs() < 0.05, "z = {z}: simulated {m}, quadrature {mu0}");
    }
}

#[test]
fn halving_dt_moves_mean_fpt_little() {
    let p = unit(1.5, 2.0);
    let coarse = mean(&ou_simulate(&p, SimOptions::default(), 20_000, 7).unwrap());
    let fine_opts = SimOptions {
        dt: 5e-4,
        ..SimOptions::default()
    };
    let fine = mean(&ou_simulate(&p, fine_opts, 20_000, 7).unwrap());
    assert!((coarse / fine - 1.0).abs() < 0.02, "{coarse} vs {fine}");
}

#[test]
fn large_ratio_fpt_is_exponential() {
    let p = unit(3.0, 2.0);
    let mu0 = mean_fpt(&p).unwrap();
    let opts = SimOptions {
        dt: 2e-3,
        ..SimOptions::default()
    };
    let t = ou_simulate(&p, opts, 4000, 11).unwrap();
    let ks = fpt_pdf_check(&t, mu0).unwrap();
    assert!(ks.statistic < 0.05, "{ks:?}");
}

#[test]
fn tiny_ratio_fpt_is_not_exponential() {
    // most paths cross almost at once; the exponential law only holds for
    // large boundary ratios
    let p = unit(0.1, 2.0);
    let mu0 = mean_fpt(&p).unwrap();
    let t = ou_simulate(&p, SimOptions::default(), 4000, 12).unwrap();
    let ks = fpt_pdf_check(&t, mu0).unwrap();
    assert!(ks.statistic > 0.1, "{ks:?}");
}

#[test]
fn fit_recovers_synthetic_ou_parameters() {
    let (gamma, delta, theta) = (5.0, 0.8, 2.0);
    let (eps_star, eps, m) = (0.488, 0.45, 4000usize);
    let gap = eps_star - eps;
    let p = OUParameters::new(gamma, delta, theta, eps_star, m as f64, eps).unwrap();
    let spec = CoupledEnsembleSpec::protograph(3, 6, 50).unwrap();
    let steps = 80;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let records: Vec<TrialRecord> = (0..1000)
        .map(|_| {
            let mut lde = vec![0.0];
            lde.extend(ou_stationary_series(&p, gap, steps, &mut rng));
            let c1 = lde.iter().map(|x| x * 1.05).collect();
            TrialRecord {
                c1,
                lde,
                success: true,
                upper_bound_ok: true,
                remaining: 0,
            }
        })
        .collect();
    let batch = TrialBatchResult::from_records(TrialConfig::new(spec, m, eps, 1000, 0), &records).unwrap();
    let fit = fit_critical_phase(&batch, eps_star, FitOptions::default()).unwrap();
    for (name, got, want) in [("gamma", fit.gamma, gamma), ("delta", fit.delta, delta), ("Theta", fit.theta, theta)] {
        assert!((got / want - 1.0).abs() < 0.1, "{name}: {got} vs {want}");
    }
    assert!((fit.alpha_delta_eps / (gamma / delta.sqrt()) - 1.0).abs() < 0.1);
}
