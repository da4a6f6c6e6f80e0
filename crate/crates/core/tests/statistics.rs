use proptest::prelude::*;

use upblock::observables::{
    number_variance, photon_distribution, poisson_probs, quadrature_variance, OutputStatistics,
};
use upblock::sweep::{resolve_preset, with_input_polarization, ArrowPreset, WaveplateScan};
use upblock::{OutputProjection, SolverSettings, SteadySolution, SystemParams};

fn solution(theta_in: f64) -> SteadySolution {
    SteadySolution::solve(
        &with_input_polarization(&SystemParams::reference_defaults(), theta_in),
        &SolverSettings::default(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factorial_moments_match_operator_expectations(
        theta in 0.0f64..3.14,
        chi in 0.0f64..1.5708,
        psi in 0.0f64..6.2832,
    ) {
        let sol = solution(theta);
        let c = OutputProjection::from_angles(chi, psi);
        let dist = photon_distribution(&sol.rho, &c).unwrap();
        prop_assert!((dist.mean() - sol.moments.mean_photons(&c)).abs() < 1e-8);
        prop_assert!((dist.second_factorial_moment() - sol.moments.second_factorial(&c)).abs() < 1e-8);
        prop_assert!(dist.probs.iter().all(|&p| (-1e-10..=1.0).contains(&p)));
        prop_assert!(dist.residual.abs() < 1e-6);
    }

    #[test]
    fn quadratures_respect_uncertainty(
        theta in 0.0f64..3.14,
        chi in 0.0f64..1.5708,
        psi in 0.0f64..6.2832,
        lam in 0.0f64..3.1416,
    ) {
        let sol = solution(theta);
        let c = OutputProjection::from_angles(chi, psi);
        let a = quadrature_variance(&sol.rho, &c, lam).unwrap();
        let b = quadrature_variance(&sol.rho, &c, lam + std::f64::consts::FRAC_PI_2).unwrap();
        prop_assert!(a * b >= 1.0 / 16.0 - 1e-9);
    }
}

#[test]
fn blockade_point_suppresses_two_photon_events() {
    let p = SystemParams::reference_defaults();
    let s = SolverSettings { workers: 1, ..Default::default() };
    let d = resolve_preset(ArrowPreset::D, &p, &WaveplateScan::default(), &s).unwrap();
    let sol = SteadySolution::solve(&with_input_polarization(&p, d.theta_in), &s).unwrap();
    let dist = photon_distribution(&sol.rho, &d.projection).unwrap();
    let poisson = poisson_probs(dist.mean(), dist.probs.len());
    assert!(dist.probs[2] < poisson[2]);
    assert!(number_variance(&dist) < dist.mean());
    let stats = OutputStatistics::new(&sol.rho, &d.projection).unwrap();
    assert!(stats.min_quadrature_variance < 0.25);
}
