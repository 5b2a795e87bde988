use selfosc_core::dynamics::evolve_single;
use selfosc_core::oracle::{compare, evolve_exact, sample_bath, ExactOptions};
use selfosc_core::transport::{
    asymptotic_occupation, coefficients, IntegralOptions, KernelConfig, TimeGrid,
};
use selfosc_core::{BathSpec, SystemSpec};

#[test]
fn weak_coupling_master_equation_matches_exact_evolution() {
    let bath = BathSpec::bosonic(0.01, 10.0, 1.0).unwrap();
    let spec = SystemSpec::new(1.0, bath, bath).unwrap();
    let grid = TimeGrid::covering(10.0, 0.01).unwrap();
    let coeffs = coefficients(&spec, grid, &KernelConfig::default()).unwrap();
    let master = evolve_single(&coeffs, 0.0, 10.0).unwrap();

    let modes = sample_bath(&bath, 400, 200.0).unwrap();
    let exact = evolve_exact(&spec, [&modes, &modes], 10.0, &ExactOptions::default()).unwrap();
    assert!(exact.recurrence_time > 10.0);
    let report = compare(&master, 0, &exact).unwrap();
    assert!(report.passes(0.03), "{report:?}");
}

#[test]
fn long_time_exact_average_approaches_asymptotic_occupation() {
    // The finite cutoff shifts the effective frequency renormalization, so
    // the cutoff is taken well above gamma; t_max stays below the revival time.
    let bath = BathSpec::bosonic(0.05, 2.0, 1.0).unwrap();
    let spec = SystemSpec::new(1.0, bath, bath).unwrap();
    let modes = sample_bath(&bath, 1000, 100.0).unwrap();
    let t_max = 60.0;
    let exact = evolve_exact(
        &spec,
        [&modes, &modes],
        t_max,
        &ExactOptions {
            output_dt: 0.05,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(exact.recurrence_time > t_max);
    let period = 2.0 * std::f64::consts::PI / spec.omega_renormalized();
    let tail: Vec<f64> = exact
        .time
        .iter()
        .zip(&exact.n)
        .filter(|(t, _)| **t >= t_max - period)
        .map(|(_, n)| *n)
        .collect();
    let average = tail.iter().sum::<f64>() / tail.len() as f64;
    let asymptote = asymptotic_occupation(&spec, &IntegralOptions::default()).unwrap();
    assert!(
        (average - asymptote).abs() <= 0.05 * asymptote,
        "average {average}, asymptote {asymptote}"
    );
}

#[test]
fn deviation_does_not_grow_under_mode_refinement() {
    let bath = BathSpec::bosonic(0.01, 10.0, 1.0).unwrap();
    let spec = SystemSpec::new(1.0, bath, bath).unwrap();
    let grid = TimeGrid::covering(10.0, 0.01).unwrap();
    let coeffs = coefficients(&spec, grid, &KernelConfig::default()).unwrap();
    let master = evolve_single(&coeffs, 0.0, 10.0).unwrap();
    let deviation = |n: usize| {
        let modes = sample_bath(&bath, n, 200.0).unwrap();
        let exact = evolve_exact(&spec, [&modes, &modes], 10.0, &ExactOptions::default()).unwrap();
        compare(&master, 0, &exact).unwrap().max_abs_deviation
    };
    let d: Vec<f64> = [200, 400, 800].iter().map(|&n| deviation(n)).collect();
    assert!(d[1] <= d[0] * 1.05 && d[2] <= d[1] * 1.05, "{d:?}");
}
