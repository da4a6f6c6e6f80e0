//! Jones calculus for the input polarization and the output analyzer.
//!
//! Phase convention: a retarder with fast axis along H is
//! `diag(1, e^{iδ})`, so `HWP(0) = diag(1, −1)` and `QWP(0) = diag(1, i)`.
//! Rotated elements are `R(θ)·J(0)·R(−θ)`.

use serde::{Deserialize, Serialize};

use crate::hilbert::{Ladder, Operator, Slot};
use crate::scalar::{cis, cone, czero, imag_unit, re, Cplx, Real};

/// 2×2 complex matrix in the `(H, V)` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesMatrix<T>(pub [[Cplx<T>; 2]; 2]);

impl<T: Real> JonesMatrix<T> {
    pub fn identity() -> Self {
        Self([[cone(), czero()], [czero(), cone()]])
    }

    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self([[re(c), re(-s)], [re(s), re(c)]])
    }

    /// Linear retarder of retardance `delta` with its fast axis at `theta`.
    pub fn retarder(delta: T, theta: T) -> Self {
        let diag = Self([[cone(), czero()], [czero(), cis(delta)]]);
        Self::rotation(theta).mul(&diag).mul(&Self::rotation(-theta))
    }

    /// Ideal linear polarizer passing `axis`.
    pub fn polarizer(axis: Axis) -> Self {
        match axis {
            Axis::H => Self([[cone(), czero()], [czero(), czero()]]),
            Axis::V => Self([[czero(), czero()], [czero(), cone()]]),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[czero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    pub fn adjoint(&self) -> Self {
        let a = &self.0;
        Self([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn apply(&self, e: [Cplx<T>; 2]) -> [Cplx<T>; 2] {
        let a = &self.0;
        [a[0][0] * e[0] + a[0][1] * e[1], a[1][0] * e[0] + a[1][1] * e[1]]
    }

    /// `max |J†J − I|`.
    pub fn unitarity_error(&self) -> T {
        let p = self.adjoint().mul(self);
        let id = Self::identity();
        let mut err = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((p.0[i][j] - id.0[i][j]).norm());
            }
        }
        err
    }
}

/// Half-wave plate with fast axis at `theta` from H.
pub fn hwp<T: Real>(theta: T) -> JonesMatrix<T> {
    JonesMatrix::retarder(T::PI(), theta)
}

/// Quarter-wave plate with fast axis at `theta` from H.
pub fn qwp<T: Real>(theta: T) -> JonesMatrix<T> {
    JonesMatrix::retarder(T::FRAC_PI_2(), theta)
}

/// Transmission axis of the final polarizer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[default]
    H,
    V,
}

/// Order of the two wave plates along the beam after the cavity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateOrder {
    /// cavity → HWP → QWP → polarizer
    #[default]
    HwpThenQwp,
    /// cavity → QWP → HWP → polarizer
    QwpThenHwp,
}

/// Detected mode `c = u·a_H + v·a_V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputProjection<T> {
    pub u: Cplx<T>,
    pub v: Cplx<T>,
}

impl<T: Real> OutputProjection<T> {
    /// Normalizes `(u, v)` to unit norm.
    pub fn new(u: Cplx<T>, v: Cplx<T>) -> Self {
        let n = (u.norm_sqr() + v.norm_sqr()).sqrt();
        Self { u: u / n, v: v / n }
    }

    /// Linear analyzer at `theta` from H: `cos θ·a_H + sin θ·a_V`.
    pub fn linear(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self { u: re(c), v: re(s) }
    }

    /// `cos χ·a_H + sin χ·e^{iψ}·a_V`.
    pub fn from_angles(chi: T, psi: T) -> Self {
        let (s, c) = chi.sin_cos();
        Self {
            u: re(c),
            v: cis(psi) * s,
        }
    }

    pub fn coefficient(&self, slot: Slot) -> Cplx<T> {
        match slot {
            Slot::H => self.u,
            Slot::V => self.v,
            Slot::Qd => czero(),
        }
    }

    pub fn as_array(&self) -> [Cplx<T>; 2] {
        [self.u, self.v]
    }

    pub fn norm_sqr(&self) -> T {
        self.u.norm_sqr() + self.v.norm_sqr()
    }

    /// Mode operator on the composite space.
    pub fn operator(&self, ladder: &Ladder<T>) -> Operator<T> {
        ladder.superposition(self.u, self.v)
    }
}

/// Drive amplitudes produced by a linear input polarization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveAmplitudes<T> {
    pub eta_h: T,
    pub eta_v: T,
    /// Phase of the V component relative to H.
    pub relative_phase: T,
}

/// Splits a linearly polarized drive at `theta_in` from H into
/// non-negative mode amplitudes and a relative phase (0 or π).
pub fn input_drive<T: Real>(theta_in: T, eta_total: T) -> DriveAmplitudes<T> {
    // θ and θ+π differ by a global phase only
    let mut theta = theta_in % T::PI();
    if theta < T::zero() {
        theta += T::PI();
    }
    let (s, c) = theta.sin_cos();
    let relative_phase = if c < T::zero() && s > T::zero() {
        T::PI()
    } else {
        T::zero()
    };
    DriveAmplitudes {
        eta_h: eta_total * c.abs(),
        eta_v: eta_total * s.abs(),
        relative_phase,
    }
}

/// Mode seen behind the plates and the final polarizer.
///
/// With the product `J = J_pol·J_2·J_1` (first element after the cavity on
/// the right), the polarizer row of `J` gives `(u, v)`.
pub fn output_mode<T: Real>(hwp_angle: T, qwp_angle: T, axis: Axis, order: PlateOrder) -> OutputProjection<T> {
    let half = hwp(hwp_angle);
    let quarter = qwp(qwp_angle);
    let plates = match order {
        PlateOrder::HwpThenQwp => quarter.mul(&half),
        PlateOrder::QwpThenHwp => half.mul(&quarter),
    };
    let j = JonesMatrix::polarizer(axis).mul(&plates);
    let row = match axis {
        Axis::H => j.0[0],
        Axis::V => j.0[1],
    };
    OutputProjection { u: row[0], v: row[1] }
}

/// Jones vector `(1, i)/√2`-style helper used in tests and presets.
pub fn circular<T: Real>() -> [Cplx<T>; 2] {
    let s = T::FRAC_1_SQRT_2();
    [re(s), imag_unit::<T>() * s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn close(a: [Complex64; 2], b: [Complex64; 2], tol: f64) -> bool {
        (a[0] - b[0]).norm() < tol && (a[1] - b[1]).norm() < tol
    }

    fn equal_up_to_phase(a: [Complex64; 2], b: [Complex64; 2]) -> bool {
        let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
        (overlap.norm() - 1.0).abs() < 1e-12
    }

    const H: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];

    #[test]
    fn plate_conventions_at_zero() {
        let h = hwp(0.0f64);
        assert!((h.0[0][0] - 1.0).norm() < 1e-15 && (h.0[1][1] + 1.0).norm() < 1e-15);
        let q = qwp(0.0f64);
        assert!((q.0[1][1] - Complex64::i()).norm() < 1e-15);
        assert!(close(hwp(0.0).apply(H), H, 1e-15));
    }

    #[test]
    fn half_wave_at_22_5_makes_diagonal() {
        let out = hwp(FRAC_PI_8).apply(H);
        let s = 0.5f64.sqrt();
        assert!(close(out, [Complex64::new(s, 0.0), Complex64::new(s, 0.0)], 1e-15));
    }

    #[test]
    fn quarter_wave_at_45_makes_circular() {
        let out = qwp(FRAC_PI_4).apply(H);
        let c = circular::<f64>();
        assert!(equal_up_to_phase(out, c) || equal_up_to_phase(out, [c[0], c[1].conj()]));
    }

    #[test]
    fn input_drive_cases() {
        let d = input_drive(0.0f64, 2.0);
        assert_eq!((d.eta_h, d.eta_v, d.relative_phase), (2.0, 0.0, 0.0));
        let d = input_drive(FRAC_PI_4, 2.0);
        assert!((d.eta_h - 2f64.sqrt()).abs() < 1e-15 && (d.eta_v - 2f64.sqrt()).abs() < 1e-15);
        let d = input_drive(FRAC_PI_2, 2.0);
        assert!(d.eta_h.abs() < 1e-15 && (d.eta_v - 2.0).abs() < 1e-15);
        assert_eq!(d.relative_phase, 0.0);
        let d = input_drive(3.0 * FRAC_PI_4, 1.0);
        assert!(d.eta_h > 0.0 && d.eta_v > 0.0);
        assert_eq!(d.relative_phase, PI);
        let d = input_drive(PI + FRAC_PI_4, 1.0);
        assert!((d.eta_h - d.eta_v).abs() < 1e-15 && d.relative_phase == 0.0);
    }

    #[test]
    fn output_mode_examples() {
        let c = output_mode(0.0f64, 0.0, Axis::H, PlateOrder::HwpThenQwp);
        assert!(close(c.as_array(), H, 1e-15));
        let c = output_mode(FRAC_PI_4, 0.0f64, Axis::H, PlateOrder::HwpThenQwp);
        assert!(c.u.norm() < 1e-15 && (c.v.norm() - 1.0).abs() < 1e-15);
        let c = output_mode(0.0f64, 0.0, Axis::V, PlateOrder::HwpThenQwp);
        assert!(c.u.norm() < 1e-15 && (c.v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn output_mode_is_normalized_on_grid() {
        for order in [PlateOrder::HwpThenQwp, PlateOrder::QwpThenHwp] {
            for i in 0..32 {
                for j in 0..32 {
                    let h = PI * i as f64 / 32.0;
                    let q = PI * j as f64 / 32.0;
                    for axis in [Axis::H, Axis::V] {
                        let c = output_mode(h, q, axis, order);
                        assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn waveplates_are_unitary_and_polarizer_is_projector() {
        for k in 0..50 {
            let t = 0.37 * k as f64;
            assert!(hwp(t).unitarity_error() < 1e-14);
            assert!(qwp(t).unitarity_error() < 1e-14);
            assert!(qwp(t).mul(&hwp(0.3 * t)).unitarity_error() < 1e-13);
        }
        let p = JonesMatrix::<f64>::polarizer(Axis::H);
        assert_eq!(p.mul(&p), p);
    }

    #[test]
    fn output_moduli_are_180_degree_periodic() {
        for k in 0..20 {
            let h = 0.11 * k as f64;
            let q = 0.07 * k as f64 + 0.3;
            let a = output_mode(h, q, Axis::H, PlateOrder::HwpThenQwp);
            let b = output_mode(h + PI, q, Axis::H, PlateOrder::HwpThenQwp);
            let c = output_mode(h, q + PI, Axis::H, PlateOrder::HwpThenQwp);
            for other in [b, c] {
                assert!((a.u.norm() - other.u.norm()).abs() < 1e-13);
                assert!((a.v.norm() - other.v.norm()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn plate_order_switch_changes_projection() {
        let a = output_mode(0.3f64, 0.9, Axis::H, PlateOrder::HwpThenQwp);
        let b = output_mode(0.3f64, 0.9, Axis::H, PlateOrder::QwpThenHwp);
        assert!(!equal_up_to_phase(a.as_array(), b.as_array()));
    }
}
