//! Closed-form and brute-force oracle checks runnable from an installed
//! binary.

use num_complex::Complex64;
use upblock::dynamics::{convolve_detector, g2_tau, g2_zero};
use upblock::hilbert::{Ladder, SpaceLayout};
use upblock::liouvillian::{build_liouvillian, steady_state, vec_identity};
use upblock::model::{build_hamiltonian, collapse_operators};
use upblock::observables::{
    displaced_squeezed_fock_probs, photon_distribution, poisson_probs, squeezing_db, two_photon_amplitude_approx,
    QuadratureStats, SqueezeSpec,
};
use upblock::sweep::with_input_polarization;
use upblock::{Matrix, OutputProjection, SolverSettings, SteadySolution, SystemParams};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> upblock::Result<(bool, String)>) -> Check {
    match run() {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn weak_uncoupled() -> SystemParams {
    let mut p = SystemParams::reference_defaults();
    p.g = 0.0;
    let eta = SystemParams::eta_total_for_input_photons(p.kappa_mean(), 1e-4);
    with_input_polarization(&p.with_drive(eta, 0.0, 0.0), 0.5)
}

fn coherent_state() -> upblock::Result<(bool, String)> {
    let p = weak_uncoupled();
    let sol = SteadySolution::solve(&p, &SolverSettings::default())?;
    let l = Ladder::new(sol.layout);
    let mut err = 0.0f64;
    for (delta, kappa, eps, a) in [
        (p.omega_l - p.omega_c_h, p.kappa_h, Complex64::new(p.eta_h, 0.0), &l.a_h),
        (p.omega_l - p.omega_c_v, p.kappa_v, Complex64::from_polar(p.eta_v, p.drive_phase_v), &l.a_v),
    ] {
        let alpha = -Complex64::i() * eps / Complex64::new(kappa / 2.0, delta);
        err = err.max((sol.rho.expect(a) - alpha).norm());
    }
    let g2 = g2_zero(&sol.rho, &OutputProjection::from_angles(0.7, 1.3))?;
    Ok((err < 1e-8 && (g2 - 1.0).abs() < 1e-6, format!("amplitude error {err:.1e}, g2 {g2:.9}")))
}

fn poisson_output() -> upblock::Result<(bool, String)> {
    let sol = SteadySolution::solve(&weak_uncoupled(), &SolverSettings::default())?;
    let c = OutputProjection::from_angles(0.4, 2.0);
    let dist = photon_distribution(&sol.rho, &c)?;
    let poisson = poisson_probs(dist.mean(), dist.probs.len());
    let err = dist
        .probs
        .iter()
        .zip(&poisson)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((err < 1e-8, format!("max |P(n) - Poisson| {err:.1e}")))
}

fn regression_theorem() -> upblock::Result<(bool, String)> {
    let lay = SpaceLayout::new(1)?;
    let p = SystemParams::reference_defaults();
    let l = build_liouvillian(&build_hamiltonian(&p, lay), &collapse_operators(&p, lay))?;
    let rho = steady_state(&l)?;
    let c = OutputProjection::from_angles(0.9, 1.7);
    let taus: Vec<f64> = (0..16).map(|k| k as f64 * 0.1).collect();
    let curve = g2_tau(&l, &rho, &c, &taus)?;
    let dense = l.matrix().to_dense();
    let op = c.operator(&Ladder::new(lay));
    let d = lay.dim();
    let seed = op.matrix().matmul(rho.matrix()).matmul(&op.matrix().adjoint());
    let v0: Vec<Complex64> = (0..d * d).map(|k| seed[(k % d, k / d)]).collect();
    let num = op.adjoint().matrix().matmul(op.matrix());
    let n = rho.expect(&(&op.adjoint() * &op)).re;
    let mut err = 0.0f64;
    for (k, &t) in taus.iter().enumerate() {
        let v = dense.scale_real(t).expm().matvec(&v0);
        let y = Matrix::from_fn(d, d, |i, j| v[i + d * j]);
        let brute = num.matmul(&y).trace().re / (n * n);
        err = err.max((brute - curve.values[taus.len() - 1 + k]).abs());
    }
    Ok((err < 1e-8, format!("max deviation from exp(L tau) {err:.1e}")))
}

fn two_photon_cancellation() -> upblock::Result<(bool, String)> {
    let spec = SqueezeSpec::real(0.1, 0.005)?;
    let exact: f64 = displaced_squeezed_fock_probs(&spec, 12)?.probs[2];
    let approx = two_photon_amplitude_approx(&spec)?;
    let rel = (approx - exact).abs() / exact;
    let zero = two_photon_amplitude_approx(&SqueezeSpec::real(0.1, 0.1 * 0.1)?)?;
    Ok((rel < 0.05 && zero == 0.0, format!("relative error {rel:.4} at alpha 0.1, r 0.005")))
}

fn squeezing_figure() -> upblock::Result<(bool, String)> {
    let db = squeezing_db(0.004);
    Ok((format!("{db:.4}") == "-0.0347", format!("{db:.6} dB")))
}

fn default_state_invariants() -> upblock::Result<(bool, String)> {
    let lay = SpaceLayout::new(3)?;
    let p = SystemParams::reference_defaults();
    let l = build_liouvillian(&build_hamiltonian(&p, lay), &collapse_operators(&p, lay))?;
    let rho = steady_state(&l)?;
    let leak = l
        .matrix()
        .left_matvec(&vec_identity(lay.dim()))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    let min_eig = rho.min_eigenvalue()?;
    let mut heis = f64::INFINITY;
    for k in 0..8 {
        let q = QuadratureStats::new(&rho, &OutputProjection::from_angles(0.2 * k as f64, 0.9 * k as f64))?;
        for j in 0..8 {
            let lam = 0.4 * j as f64;
            heis = heis.min(q.variance(lam) * q.variance(lam + std::f64::consts::FRAC_PI_2));
        }
    }
    let pass = leak < 1e-10
        && rho.hermiticity_error() < 1e-10
        && (rho.trace().re - 1.0).abs() < 1e-10
        && min_eig > -1e-8
        && heis >= 1.0 / 16.0 - 1e-9;
    Ok((pass, format!("trace leak {leak:.1e}, min eigenvalue {min_eig:.1e}, min Var*Var {heis:.6}")))
}

fn convolution_floor() -> upblock::Result<(bool, String)> {
    let s = SolverSettings::default();
    let sol = SteadySolution::solve(&SystemParams::reference_defaults(), &s)?;
    let c = OutputProjection::from_angles(1.0, 2.5);
    let bare = g2_tau(&sol.liouvillian, &sol.rho, &c, &sol.tau_grid(&s))?;
    let conv = convolve_detector(&bare, s.detector_fwhm, s.kernel)?;
    Ok((
        conv.min() >= bare.min() - 1e-9 && conv.max() <= bare.max() + 1e-9,
        format!("bare [{:.4}, {:.4}], convolved [{:.4}, {:.4}]", bare.min(), bare.max(), conv.min(), conv.max()),
    ))
}

/// Runs every check.
pub fn run_all() -> Vec<Check> {
    vec![
        check("coherent steady state", coherent_state),
        check("poisson statistics of coherent output", poisson_output),
        check("regression theorem vs exp(L tau)", regression_theorem),
        check("two-photon cancellation", two_photon_cancellation),
        check("squeezing in dB", squeezing_figure),
        check("steady-state invariants", default_state_invariants),
        check("convolution stays within bare extremes", convolution_floor),
    ]
}
