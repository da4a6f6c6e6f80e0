//! Physical parameters and the driven two-mode Jaynes-Cummings model.
//!
//! Units: angular frequencies and rates in rad/ns, time in ns. All
//! frequencies are measured from a common rotating-frame reference, so only
//! their differences enter the Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Ladder, Operator, SpaceLayout};
use crate::scalar::{cis, re, Real};

/// Converts an ordinary frequency in GHz to an angular frequency in rad/ns.
pub fn ghz_to_rad_per_ns<T: Real>(ghz: T) -> T {
    ghz * T::TAU()
}

/// All symbols of the Hamiltonian and the dissipators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Laser angular frequency.
    pub omega_l: T,
    /// H cavity-mode angular frequency.
    pub omega_c_h: T,
    /// V cavity-mode angular frequency.
    pub omega_c_v: T,
    /// Quantum-dot transition angular frequency.
    pub omega_qd: T,
    /// Dot-cavity coupling rate.
    pub g: T,
    /// Dipole angle measured from the V cavity axis, radians.
    pub phi: T,
    /// Drive amplitude into the H mode (non-negative).
    pub eta_h: T,
    /// Drive amplitude into the V mode (non-negative).
    pub eta_v: T,
    /// Phase of the V drive relative to the H drive, radians.
    pub drive_phase_v: T,
    /// H-mode energy decay rate.
    pub kappa_h: T,
    /// V-mode energy decay rate.
    pub kappa_v: T,
    /// Dot population decay rate.
    pub gamma_par: T,
    /// Dot pure dephasing rate.
    pub gamma_star: T,
    /// Purcell factor; carried as metadata only.
    pub purcell_f_p: T,
}

impl<T: Real> SystemParams<T> {
    /// Default operating point: g/2π = 12 GHz, κ/2π = 40 GHz,
    /// γ∥/2π = γ*/2π = 1 GHz, φ = 94°, 10 GHz cavity splitting, laser and
    /// dot on the mean cavity frequency, 45° linear input scaled to
    /// ⟨n_in⟩ = 0.06.
    pub fn reference_defaults() -> Self {
        let kappa = ghz_to_rad_per_ns(T::lit(40.0));
        let eta_total = Self::eta_total_for_input_photons(kappa, T::lit(DEFAULT_INPUT_PHOTONS));
        let eta = eta_total * T::FRAC_1_SQRT_2();
        let split = ghz_to_rad_per_ns(T::lit(10.0));
        let half = T::lit(0.5);
        Self {
            omega_l: T::zero(),
            omega_c_h: split * half,
            omega_c_v: -split * half,
            omega_qd: T::zero(),
            g: ghz_to_rad_per_ns(T::lit(12.0)),
            phi: T::lit(94.0).to_radians(),
            eta_h: eta,
            eta_v: eta,
            drive_phase_v: T::zero(),
            kappa_h: kappa,
            kappa_v: kappa,
            gamma_par: ghz_to_rad_per_ns(T::one()),
            gamma_star: ghz_to_rad_per_ns(T::one()),
            purcell_f_p: T::lit(11.2),
        }
    }

    /// Total drive amplitude that gives `n_in` input photons for a 45° linear
    /// input (η_H = η_V), the reference configuration of the drive scale.
    pub fn eta_total_for_input_photons(kappa_mean: T, n_in: T) -> T {
        kappa_mean * n_in.sqrt() * T::FRAC_1_SQRT_2()
    }

    pub fn validate(&self) -> Result<()> {
        let fields: [(&'static str, T); 14] = [
            ("omega_l", self.omega_l),
            ("omega_c_h", self.omega_c_h),
            ("omega_c_v", self.omega_c_v),
            ("omega_qd", self.omega_qd),
            ("g", self.g),
            ("phi", self.phi),
            ("eta_h", self.eta_h),
            ("eta_v", self.eta_v),
            ("drive_phase_v", self.drive_phase_v),
            ("kappa_h", self.kappa_h),
            ("kappa_v", self.kappa_v),
            ("gamma_par", self.gamma_par),
            ("gamma_star", self.gamma_star),
            ("purcell_f_p", self.purcell_f_p),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        for (field, value) in [
            ("g", self.g),
            ("eta_h", self.eta_h),
            ("eta_v", self.eta_v),
            ("gamma_par", self.gamma_par),
            ("gamma_star", self.gamma_star),
        ] {
            if value < T::zero() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be non-negative, got {value}"),
                });
            }
        }
        for (field, value) in [("kappa_h", self.kappa_h), ("kappa_v", self.kappa_v)] {
            if value <= T::zero() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be positive, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// κ = (κ_H + κ_V)/2.
    pub fn kappa_mean(&self) -> T {
        (self.kappa_h + self.kappa_v) * T::lit(0.5)
    }

    /// ⟨n_in⟩ = ((η_H + η_V)/κ)².
    pub fn mean_input_photons(&self) -> T {
        let r = (self.eta_h + self.eta_v) / self.kappa_mean();
        r * r
    }

    /// Cavity splitting ω_c^H − ω_c^V.
    pub fn cavity_splitting(&self) -> T {
        self.omega_c_h - self.omega_c_v
    }

    /// `sqrt(η_H² + η_V²)`, proportional to the square root of laser power.
    pub fn eta_total(&self) -> T {
        (self.eta_h * self.eta_h + self.eta_v * self.eta_v).sqrt()
    }

    /// g < min(κ_H, κ_V).
    pub fn is_weak_coupling(&self) -> bool {
        self.g < self.kappa_h.min(self.kappa_v)
    }

    /// Same parameters with the cavity modes placed symmetrically about their
    /// current mean frequency, separated by `splitting` (rad/ns).
    pub fn with_cavity_splitting(mut self, splitting: T) -> Self {
        let half = T::lit(0.5);
        let mean = (self.omega_c_h + self.omega_c_v) * half;
        self.omega_c_h = mean + splitting * half;
        self.omega_c_v = mean - splitting * half;
        self
    }

    pub fn with_drive(mut self, eta_h: T, eta_v: T, drive_phase_v: T) -> Self {
        self.eta_h = eta_h;
        self.eta_v = eta_v;
        self.drive_phase_v = drive_phase_v;
        self
    }

    /// Smallest non-zero decay or dephasing rate.
    pub fn slowest_rate(&self) -> T {
        [self.kappa_h, self.kappa_v, self.gamma_par, self.gamma_star]
            .into_iter()
            .filter(|r| *r > T::zero())
            .fold(T::infinity(), T::min)
    }
}

/// ⟨n_in⟩ of the default drive.
pub const DEFAULT_INPUT_PHOTONS: f64 = 0.06;

/// Cavity mode along the dipole: `b = cos φ·a_V + sin φ·a_H`.
pub fn qd_mode_operator<T: Real>(phi: T, layout: SpaceLayout) -> Operator<T> {
    let l = Ladder::new(layout);
    dipole_mode(phi, &l)
}

fn dipole_mode<T: Real>(phi: T, l: &Ladder<T>) -> Operator<T> {
    &l.a_v.scale_real(phi.cos()) + &l.a_h.scale_real(phi.sin())
}

/// Rotating-frame Hamiltonian
/// `Δ_V a†_V a_V + Δ_H a†_H a_H + Δ_QD σ†σ + g(σ b† + σ† b) + η_H(a_H + a†_H) + η_V(e^{-iϕ} a_V + e^{iϕ} a†_V)`
/// with detunings `Δ_X = ω_L − ω_X`.
pub fn build_hamiltonian<T: Real>(params: &SystemParams<T>, layout: SpaceLayout) -> Operator<T> {
    let l = Ladder::new(layout);
    let (ah, av, s) = (&l.a_h, &l.a_v, &l.sigma);
    let (ahd, avd, sd) = (ah.adjoint(), av.adjoint(), s.adjoint());
    let b = dipole_mode(params.phi, &l);
    let bd = b.adjoint();

    let mut h = (&avd * av).scale_real(params.omega_l - params.omega_c_v);
    h = &h + &(&ahd * ah).scale_real(params.omega_l - params.omega_c_h);
    h = &h + &(&sd * s).scale_real(params.omega_l - params.omega_qd);
    let coupling = &(s * &bd) + &(&sd * &b);
    h = &h + &coupling.scale_real(params.g);
    h = &h + &(ah + &ahd).scale_real(params.eta_h);
    let drive_v = cis(params.drive_phase_v) * params.eta_v;
    h = &h + &(&av.scale(drive_v.conj()) + &avd.scale(drive_v));
    h
}

/// Collapse operators `√κ_H a_H`, `√κ_V a_V`, `√γ∥ σ`, `√(2γ*) σ†σ`, omitting
/// any with zero rate.
pub fn collapse_operators<T: Real>(params: &SystemParams<T>, layout: SpaceLayout) -> Vec<Operator<T>> {
    let l = Ladder::new(layout);
    let proj = &l.sigma.adjoint() * &l.sigma;
    let two = T::lit(2.0);
    [
        (params.kappa_h, l.a_h.clone()),
        (params.kappa_v, l.a_v.clone()),
        (params.gamma_par, l.sigma.clone()),
        (two * params.gamma_star, proj),
    ]
    .into_iter()
    .filter(|(rate, _)| *rate > T::zero())
    .map(|(rate, op)| op.scale(re(rate.sqrt())))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Ladder, Space};

    fn layout(n: usize) -> SpaceLayout {
        SpaceLayout::new(n).unwrap()
    }

    #[test]
    fn dipole_mode_limits() {
        let lay = layout(2);
        let l = Ladder::<f64>::new(lay);
        assert!((&qd_mode_operator(0.0, lay) - &l.a_v).max_abs() < 1e-15);
        assert!((&qd_mode_operator(std::f64::consts::FRAC_PI_2, lay) - &l.a_h).max_abs() < 1e-15);
        let b = qd_mode_operator(94f64.to_radians(), lay);
        let expect = &l.a_h.scale_real(0.997_564_050_259_824_2) + &l.a_v.scale_real(-0.069_756_473_744_125_3);
        assert!((&b - &expect).max_abs() < 1e-15);
        // rounded coefficients quoted for the 94° dipole
        assert!((94f64.to_radians().sin() - 0.99756).abs() < 5e-6);
        assert!((94f64.to_radians().cos() + 0.06976).abs() < 5e-6);
    }

    #[test]
    fn hamiltonian_vanishes_without_couplings() {
        let mut p = SystemParams::<f64>::reference_defaults();
        p.g = 0.0;
        p.eta_h = 0.0;
        p.eta_v = 0.0;
        p.omega_c_h = 0.0;
        p.omega_c_v = 0.0;
        let h = build_hamiltonian(&p, layout(2));
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let mut p = SystemParams::<f64>::reference_defaults();
        p.drive_phase_v = 1.3;
        p.omega_qd = 4.2;
        let h = build_hamiltonian(&p, layout(3));
        assert!(h.hermiticity_error() < 1e-14);
    }

    #[test]
    fn coupling_matrix_element_matches_hand_expansion() {
        // oracle: ⟨1,0,g| σ b† |0,0,e⟩ = sin φ; σ† b does not connect these
        let lay = layout(1);
        let mut p = SystemParams::<f64>::reference_defaults();
        p.eta_h = 0.0;
        p.eta_v = 0.0;
        let h = build_hamiltonian(&p, lay);
        let elem = h.get(lay.index(1, 0, 0), lay.index(0, 0, 1));
        assert!((elem.re - p.g * p.phi.sin()).abs() < 1e-13);
        assert!(elem.im.abs() < 1e-15);
        let elem_v = h.get(lay.index(0, 1, 0), lay.index(0, 0, 1));
        assert!((elem_v.re - p.g * p.phi.cos()).abs() < 1e-13);
    }

    #[test]
    fn coupling_conserves_excitations() {
        let mut p = SystemParams::<f64>::reference_defaults();
        p.eta_h = 0.0;
        p.eta_v = 0.0;
        let lay = layout(3);
        let h = build_hamiltonian(&p, lay);
        let n = Ladder::new(lay).excitation_number();
        let err = h.commutator(&n).max_abs();
        assert!(err < 1e-14 * h.max_abs(), "{err}");
    }

    #[test]
    fn drive_phase_enters_v_term() {
        let lay = layout(1);
        let mut p = SystemParams::<f64>::reference_defaults();
        p.g = 0.0;
        p.drive_phase_v = std::f64::consts::FRAC_PI_2;
        let h = build_hamiltonian(&p, lay);
        // ⟨0,1,g|H|0,0,g⟩ = η_V e^{iϕ}
        let e = h.get(lay.index(0, 1, 0), lay.index(0, 0, 0));
        assert!(e.re.abs() < 1e-14);
        assert!((e.im - p.eta_v).abs() < 1e-14);
    }

    #[test]
    fn collapse_operator_selection() {
        let lay = layout(2);
        let l = Ladder::<f64>::new(lay);
        let mut p = SystemParams::<f64>::reference_defaults();
        p.gamma_par = 0.0;
        p.gamma_star = 0.0;
        let c = collapse_operators(&p, lay);
        assert_eq!(c.len(), 2);

        let mut only_h = p;
        only_h.kappa_v = 0.0;
        let c = collapse_operators(&only_h, lay);
        assert_eq!(c.len(), 1);
        assert!((&c[0] - &l.a_h.scale_real(only_h.kappa_h.sqrt())).max_abs() < 1e-15);

        let full = collapse_operators(&SystemParams::<f64>::reference_defaults(), lay);
        assert_eq!(full.len(), 4);
        for op in &full {
            assert_eq!(op.space(), Space::Composite(lay));
            // prefactors are square roots, hence non-negative on every stored entry
            assert!(op.matrix().as_slice().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
        }
        let deph = &full[3];
        let gs = SystemParams::<f64>::reference_defaults().gamma_star;
        assert!((deph.get(lay.index(0, 0, 1), lay.index(0, 0, 1)).re - (2.0 * gs).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn defaults_are_consistent() {
        let p = SystemParams::<f64>::reference_defaults();
        p.validate().unwrap();
        assert!((p.mean_input_photons() - 0.06).abs() < 1e-14);
        assert!(p.is_weak_coupling());
        assert!((p.cavity_splitting() - 2.0 * std::f64::consts::PI * 10.0).abs() < 1e-12);
        assert!((p.slowest_rate() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_rates() {
        let mut p = SystemParams::<f64>::reference_defaults();
        p.kappa_h = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { field: "kappa_h", .. })));
        let mut p = SystemParams::<f64>::reference_defaults();
        p.gamma_star = -1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::<f64>::reference_defaults();
        p.g = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn splitting_keeps_mean() {
        let p = SystemParams::<f64>::reference_defaults().with_cavity_splitting(3.0);
        assert!((p.omega_c_h + p.omega_c_v).abs() < 1e-14);
        assert!((p.cavity_splitting() - 3.0).abs() < 1e-14);
    }
}
