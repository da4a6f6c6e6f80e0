//! Time evolution, two-time intensity correlations via the quantum
//! regression theorem, and the detector-response convolution.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Ladder, Operator, Slot, Space, SpaceLayout};
use crate::integrator::{integrate, IntegrationStats, IntegratorOptions};
use crate::liouvillian::{DensityMatrix, Superoperator};
use crate::linalg::Matrix;
use crate::polarization::OutputProjection;
use crate::scalar::{czero, Cplx, Real};

/// Mean photon numbers below this are treated as no signal.
pub const PHOTON_FLOOR: f64 = 1e-12;

/// Default detector timing jitter (FWHM), ns.
pub const DEFAULT_DETECTOR_FWHM_NS: f64 = 0.530;

/// Number of delay samples of the default correlation grid.
pub const DEFAULT_TAU_POINTS: usize = 2048;

/// Propagates a vectorized state under `L`, reporting it at every time in
/// `times` (ascending, non-negative).
pub fn propagate<T: Real, O>(
    l: &Superoperator<T>,
    v0: &[Cplx<T>],
    times: &[T],
    opts: &IntegratorOptions<T>,
    on_output: O,
) -> Result<IntegrationStats>
where
    O: FnMut(usize, &[Cplx<T>]),
{
    let m = l.matrix();
    integrate(
        |_t, y: &[Cplx<T>], dy: &mut [Cplx<T>]| m.matvec_into(y, dy),
        T::zero(),
        v0,
        times,
        opts,
        on_output,
    )
}

/// `ρ(τ) = exp(Lτ)·ρ₀`.
pub fn evolve<T: Real>(l: &Superoperator<T>, rho0: &DensityMatrix<T>, tau: T) -> Result<DensityMatrix<T>> {
    evolve_with(l, rho0, tau, &IntegratorOptions::default())
}

pub fn evolve_with<T: Real>(
    l: &Superoperator<T>,
    rho0: &DensityMatrix<T>,
    tau: T,
    opts: &IntegratorOptions<T>,
) -> Result<DensityMatrix<T>> {
    if !(tau >= T::zero()) {
        return Err(Error::InvalidGrid(format!("evolution time must be non-negative, got {tau}")));
    }
    if rho0.space() != l.space() {
        return Err(Error::LayoutMismatch(format!("{} vs {}", rho0.space(), l.space())));
    }
    let mut out = rho0.vectorize();
    propagate(l, &rho0.vectorize(), &[tau], opts, |_, y| out.copy_from_slice(y))?;
    DensityMatrix::from_vectorized(l.space(), &out)
}

fn composite_layout(space: Space) -> Result<SpaceLayout> {
    match space {
        Space::Composite(l) => Ok(l),
        other => Err(Error::LayoutMismatch(format!("expected the composite space, got {other}"))),
    }
}

/// ⟨c†c⟩ for the detected mode.
pub fn mean_photons<T: Real>(rho: &DensityMatrix<T>, c: &OutputProjection<T>) -> Result<T> {
    let ladder = Ladder::new(composite_layout(rho.space())?);
    let op = c.operator(&ladder);
    Ok(rho.expect(&(&op.adjoint() * &op)).re)
}

/// `g²(0) = ⟨c†c†cc⟩/⟨c†c⟩²`, evaluated with explicit operator products.
pub fn g2_zero<T: Real>(rho: &DensityMatrix<T>, c: &OutputProjection<T>) -> Result<T> {
    let ladder = Ladder::new(composite_layout(rho.space())?);
    let op = c.operator(&ladder);
    let cd = op.adjoint();
    let n_op = &cd * &op;
    let n = rho.expect(&n_op).re;
    if !(n >= T::lit(PHOTON_FLOOR)) {
        return Err(Error::LowIntensity { mean: n.to_f64_lossy() });
    }
    let g2_op = &(&cd * &cd) * &(&op * &op);
    Ok(rho.expect(&g2_op).re / (n * n))
}

/// Normally ordered first and second moments of the two cavity modes.
///
/// `first[i][j] = ⟨a_i† a_j⟩` and `second[i][j][k][l] = ⟨a_i† a_j† a_k a_l⟩`
/// with index 0 = H, 1 = V; any projected mode's statistics follow by
/// contraction with its coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMoments<T> {
    pub first: [[Cplx<T>; 2]; 2],
    pub second: [[[[Cplx<T>; 2]; 2]; 2]; 2],
    /// `⟨a_i⟩`.
    pub amplitude: [Cplx<T>; 2],
}

impl<T: Real> ProjectionMoments<T> {
    pub fn new(rho: &DensityMatrix<T>) -> Result<Self> {
        let ladder = Ladder::new(composite_layout(rho.space())?);
        let modes = [ladder.mode(Slot::H).clone(), ladder.mode(Slot::V).clone()];
        let daggers = [modes[0].adjoint(), modes[1].adjoint()];
        let mut first = [[czero(); 2]; 2];
        let mut second = [[[[czero(); 2]; 2]; 2]; 2];
        // ρ·a_k·a_l is reused across (i, j)
        for i in 0..2 {
            for j in 0..2 {
                first[i][j] = rho.expect(&(&daggers[i] * &modes[j]));
            }
        }
        for k in 0..2 {
            for l in 0..2 {
                let kl = &modes[k] * &modes[l];
                for i in 0..2 {
                    for j in 0..2 {
                        let op = &(&daggers[i] * &daggers[j]) * &kl;
                        second[i][j][k][l] = rho.expect(&op);
                    }
                }
            }
        }
        let amplitude = [rho.expect(&modes[0]), rho.expect(&modes[1])];
        Ok(Self {
            first,
            second,
            amplitude,
        })
    }

    pub fn mean_photons(&self, c: &OutputProjection<T>) -> T {
        let w = c.as_array();
        let mut acc = czero();
        for i in 0..2 {
            for j in 0..2 {
                acc += w[i].conj() * w[j] * self.first[i][j];
            }
        }
        acc.re
    }

    /// `⟨c†c†cc⟩`.
    pub fn second_factorial(&self, c: &OutputProjection<T>) -> T {
        let w = c.as_array();
        let mut acc = czero();
        for i in 0..2 {
            for j in 0..2 {
                let left = w[i].conj() * w[j].conj();
                for k in 0..2 {
                    for l in 0..2 {
                        acc += left * w[k] * w[l] * self.second[i][j][k][l];
                    }
                }
            }
        }
        acc.re
    }

    /// `⟨c⟩`.
    pub fn amplitude(&self, c: &OutputProjection<T>) -> Cplx<T> {
        c.u * self.amplitude[0] + c.v * self.amplitude[1]
    }

    /// `(⟨c†c⟩, g²(0))`; `g²` is NaN below the photon floor.
    pub fn intensity_and_g2(&self, c: &OutputProjection<T>) -> (T, T) {
        let n = self.mean_photons(c);
        if !(n >= T::lit(PHOTON_FLOOR)) {
            return (n, T::nan());
        }
        (n, self.second_factorial(c) / (n * n))
    }
}

/// Normalized intensity correlation sampled on a delay grid symmetric about
/// zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve<T> {
    /// Delays in ns, ascending, symmetric about 0.
    pub tau: Vec<T>,
    pub values: Vec<T>,
    /// ⟨c†c⟩ used to normalize.
    pub mean_n: T,
}

impl<T: Real> CorrelationCurve<T> {
    /// Builds a symmetric curve from samples on a non-negative grid starting
    /// at 0, using `g²(−τ) = g²(τ)`.
    pub fn from_nonnegative(tau: &[T], values: &[T], mean_n: T) -> Result<Self> {
        if tau.is_empty() || tau.len() != values.len() || !tau[0].is_zero() {
            return Err(Error::InvalidGrid("grid must start at 0 and match the values".into()));
        }
        let mut t = Vec::with_capacity(2 * tau.len() - 1);
        let mut v = Vec::with_capacity(2 * tau.len() - 1);
        for k in (1..tau.len()).rev() {
            t.push(-tau[k]);
            v.push(values[k]);
        }
        t.extend_from_slice(tau);
        v.extend_from_slice(values);
        Ok(Self {
            tau: t,
            values: v,
            mean_n,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Value at the sample closest to zero delay.
    pub fn at_zero(&self) -> T {
        let idx = self
            .tau
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.values[idx]
    }

    /// Uniform spacing of the grid.
    pub fn spacing(&self) -> Result<T> {
        uniform_spacing(&self.tau)
    }
}

fn uniform_spacing<T: Real>(tau: &[T]) -> Result<T> {
    if tau.len() < 2 {
        return Err(Error::InvalidGrid("need at least two samples".into()));
    }
    let h = tau[1] - tau[0];
    if !(h > T::zero()) {
        return Err(Error::InvalidGrid("grid must be increasing".into()));
    }
    let tol = h * T::lit(1e-6);
    if tau.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
        return Err(Error::InvalidGrid("grid is not uniform".into()));
    }
    Ok(h)
}

/// Uniform grid `[0, 10/slowest rate]` with `points` samples.
pub fn default_tau_grid<T: Real>(slowest_rate: T, points: usize) -> Vec<T> {
    let span = T::lit(10.0) / slowest_rate;
    let step = span / T::from_count(points.max(2) - 1);
    (0..points.max(2)).map(|k| step * T::from_count(k)).collect()
}

fn observable_entries<T: Real>(op: &Operator<T>) -> Vec<(usize, Cplx<T>)> {
    // Tr(O·Y) = Σ_ij O_ij Y_ji = Σ_ij O_ij vec(Y)[j + d·i]
    let d = op.dim();
    op.matrix()
        .nonzeros()
        .into_iter()
        .map(|(i, j, v)| (j + d * i, v))
        .collect()
}

fn trace_against<T>(entries: &[(usize, Cplx<T>)], y: &[Cplx<T>]) -> Cplx<T>
where
    T: Real,
{
    entries.iter().map(|&(k, v)| v * y[k]).sum()
}

fn vectorize_matrix<T: Real>(m: &Matrix<T>) -> Vec<Cplx<T>> {
    let d = m.rows();
    let mut v = vec![czero(); d * d];
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = m[(i, j)];
        }
    }
    v
}

/// `g²(τ)` by the quantum regression theorem:
/// `G²(τ) = Tr[c†c·exp(Lτ)(c ρ c†)]`, normalized by `⟨c†c⟩²`.
///
/// `tau_grid` must start at 0 and be ascending; the returned curve is
/// reflected to negative delays.
pub fn g2_tau<T: Real>(
    l: &Superoperator<T>,
    rho_ss: &DensityMatrix<T>,
    c: &OutputProjection<T>,
    tau_grid: &[T],
) -> Result<CorrelationCurve<T>> {
    g2_tau_with(l, rho_ss, c, tau_grid, &IntegratorOptions::default())
}

pub fn g2_tau_with<T: Real>(
    l: &Superoperator<T>,
    rho_ss: &DensityMatrix<T>,
    c: &OutputProjection<T>,
    tau_grid: &[T],
    opts: &IntegratorOptions<T>,
) -> Result<CorrelationCurve<T>> {
    let layout = composite_layout(rho_ss.space())?;
    if tau_grid.is_empty() || !tau_grid[0].is_zero() {
        return Err(Error::InvalidGrid("delay grid must start at 0".into()));
    }
    let ladder = Ladder::new(layout);
    let op = c.operator(&ladder);
    let n_op = &op.adjoint() * &op;
    let n = rho_ss.expect(&n_op).re;
    if !(n >= T::lit(PHOTON_FLOOR)) {
        return Err(Error::LowIntensity { mean: n.to_f64_lossy() });
    }
    let y0 = vectorize_matrix(&rho_ss.sandwich(&op));
    let entries = observable_entries(&n_op);
    let mut values = vec![T::zero(); tau_grid.len()];
    let norm = n * n;
    propagate(l, &y0, tau_grid, opts, |k, y| {
        values[k] = trace_against(&entries, y).re / norm;
    })?;
    CorrelationCurve::from_nonnegative(tau_grid, &values, n)
}

/// Shape of the detector timing response.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKernel {
    #[default]
    Gaussian,
    TwoSidedExponential,
}

/// Symmetric unit-sum kernel samples `w[0..=M]` (w[m] is the weight at lag
/// ±m) for the given grid spacing, or `None` for the delta-kernel limit.
pub fn kernel_weights<T: Real>(spacing: T, fwhm: T, kernel: DetectorKernel) -> Result<Option<Vec<T>>> {
    if fwhm <= spacing / T::lit(100.0) {
        return Ok(None);
    }
    if spacing > fwhm / T::lit(10.0) {
        return Err(Error::GridTooCoarse {
            spacing: spacing.to_f64_lossy(),
            fwhm: fwhm.to_f64_lossy(),
        });
    }
    let two = T::lit(2.0);
    let sigma = fwhm / (two * (two * T::LN_2()).sqrt());
    let (reach, weight): (T, Box<dyn Fn(T) -> T>) = match kernel {
        DetectorKernel::Gaussian => (
            T::lit(4.0) * sigma,
            Box::new(move |t: T| (-(t * t) / (two * sigma * sigma)).exp()),
        ),
        DetectorKernel::TwoSidedExponential => {
            let decay = fwhm / (two * T::LN_2());
            (T::lit(8.0) * decay, Box::new(move |t: T| (-t.abs() / decay).exp()))
        }
    };
    let m = (reach / spacing).floor().to_usize().unwrap_or(0);
    let mut w: Vec<T> = (0..=m).map(|k| weight(spacing * T::from_count(k))).collect();
    let total = w[0] + two * w[1..].iter().copied().sum::<T>();
    for x in &mut w {
        *x = *x / total;
    }
    Ok(Some(w))
}

/// Convolves a correlation curve with the detector response of the given
/// FWHM. Samples beyond the grid are taken as the asymptote 1.
pub fn convolve_detector<T: Real>(
    curve: &CorrelationCurve<T>,
    fwhm: T,
    kernel: DetectorKernel,
) -> Result<CorrelationCurve<T>> {
    let spacing = curve.spacing()?;
    let weights = match kernel_weights(spacing, fwhm, kernel)? {
        None => return Ok(curve.clone()),
        Some(w) => w,
    };
    let n = curve.values.len() as isize;
    let value = |i: isize| {
        if i < 0 || i >= n {
            T::one()
        } else {
            curve.values[i as usize]
        }
    };
    let values = (0..n)
        .map(|i| {
            let mut acc = weights[0] * value(i);
            for (m, &w) in weights.iter().enumerate().skip(1) {
                let m = m as isize;
                acc += w * (value(i - m) + value(i + m));
            }
            acc
        })
        .collect();
    Ok(CorrelationCurve {
        tau: curve.tau.clone(),
        values,
        mean_n: curve.mean_n,
    })
}

/// Renders bare and convolved curves as CSV with columns
/// `tau_ns,g2_bare,g2_convolved`.
pub fn curves_to_csv<T: Real>(bare: &CorrelationCurve<T>, convolved: &CorrelationCurve<T>) -> String {
    let mut s = String::from("tau_ns,g2_bare,g2_convolved\n");
    for ((t, b), c) in bare.tau.iter().zip(&bare.values).zip(&convolved.values) {
        let _ = writeln!(s, "{t},{b},{c}");
    }
    s
}

/// Two-time correlation functions of every mode pair.
///
/// `values[τ][k][l][i][j] = Tr[a_k† a_l · exp(Lτ)(a_i ρ a_j†)]`, from which
/// `G²(τ)` of any detected mode `c = Σ u_i a_i` follows as
/// `Σ ū_k u_l u_i ū_j · values[τ][k][l][i][j]`. Four propagations serve an
/// entire map of output projections.
#[derive(Clone, Debug)]
pub struct CorrelationBasis<T> {
    tau: Vec<T>,
    values: Vec<[[[[Cplx<T>; 2]; 2]; 2]; 2]>,
    moments: ProjectionMoments<T>,
}

impl<T: Real> CorrelationBasis<T> {
    pub fn new(
        l: &Superoperator<T>,
        rho_ss: &DensityMatrix<T>,
        tau_grid: &[T],
        opts: &IntegratorOptions<T>,
    ) -> Result<Self> {
        let layout = composite_layout(rho_ss.space())?;
        if tau_grid.is_empty() || !tau_grid[0].is_zero() {
            return Err(Error::InvalidGrid("delay grid must start at 0".into()));
        }
        let ladder = Ladder::new(layout);
        let modes = [ladder.a_h.clone(), ladder.a_v.clone()];
        let observables: Vec<Vec<Vec<(usize, Cplx<T>)>>> = (0..2)
            .map(|k| {
                (0..2)
                    .map(|l| observable_entries(&(&modes[k].adjoint() * &modes[l])))
                    .collect()
            })
            .collect();
        let mut values = vec![[[[[czero(); 2]; 2]; 2]; 2]; tau_grid.len()];
        for i in 0..2 {
            for j in 0..2 {
                let seed = modes[i]
                    .matrix()
                    .matmul(rho_ss.matrix())
                    .matmul(&modes[j].matrix().adjoint());
                let y0 = vectorize_matrix(&seed);
                propagate(l, &y0, tau_grid, opts, |t, y| {
                    for k in 0..2 {
                        for m in 0..2 {
                            values[t][k][m][i][j] = trace_against(&observables[k][m], y);
                        }
                    }
                })?;
            }
        }
        Ok(Self {
            tau: tau_grid.to_vec(),
            values,
            moments: ProjectionMoments::new(rho_ss)?,
        })
    }

    pub fn tau(&self) -> &[T] {
        &self.tau
    }

    pub fn moments(&self) -> &ProjectionMoments<T> {
        &self.moments
    }

    fn contract(entry: &[[[[Cplx<T>; 2]; 2]; 2]; 2], w: [Cplx<T>; 2]) -> T {
        let mut acc = czero();
        for k in 0..2 {
            for l in 0..2 {
                let kl = w[k].conj() * w[l];
                for i in 0..2 {
                    for j in 0..2 {
                        acc += kl * w[i] * w[j].conj() * entry[k][l][i][j];
                    }
                }
            }
        }
        acc.re
    }

    /// Unnormalized `G²(τ)` on the non-negative grid.
    pub fn unnormalized(&self, c: &OutputProjection<T>) -> Vec<T> {
        let w = c.as_array();
        self.values.iter().map(|e| Self::contract(e, w)).collect()
    }

    pub fn g2_curve(&self, c: &OutputProjection<T>) -> Result<CorrelationCurve<T>> {
        let n = self.moments.mean_photons(c);
        if !(n >= T::lit(PHOTON_FLOOR)) {
            return Err(Error::LowIntensity { mean: n.to_f64_lossy() });
        }
        let vals: Vec<T> = self.unnormalized(c).into_iter().map(|g| g / (n * n)).collect();
        CorrelationCurve::from_nonnegative(&self.tau, &vals, n)
    }

    /// Folds the detector kernel into the basis so that the convolved
    /// `g²(0)` of any projection costs one contraction.
    pub fn detector_weighted(&self, fwhm: T, kernel: DetectorKernel) -> Result<ConvolvedZero<T>> {
        let spacing = uniform_spacing(&self.tau)?;
        let weights = kernel_weights(spacing, fwhm, kernel)?;
        let mut folded = [[[[czero(); 2]; 2]; 2]; 2];
        let mut outside = T::zero();
        match weights {
            None => folded = self.values[0],
            Some(w) => {
                for (m, &wm) in w.iter().enumerate() {
                    let factor = if m == 0 { wm } else { wm * T::lit(2.0) };
                    if m < self.tau.len() {
                        let e = &self.values[m];
                        for a in 0..2 {
                            for b in 0..2 {
                                for c in 0..2 {
                                    for d in 0..2 {
                                        folded[a][b][c][d] += e[a][b][c][d] * factor;
                                    }
                                }
                            }
                        }
                    } else {
                        outside += factor;
                    }
                }
            }
        }
        Ok(ConvolvedZero {
            folded,
            outside,
            moments: self.moments.clone(),
        })
    }
}

/// Detector-convolved `g²(0)` evaluator produced by
/// [`CorrelationBasis::detector_weighted`].
#[derive(Clone, Debug)]
pub struct ConvolvedZero<T> {
    folded: [[[[Cplx<T>; 2]; 2]; 2]; 2],
    outside: T,
    moments: ProjectionMoments<T>,
}

impl<T: Real> ConvolvedZero<T> {
    /// NaN below the photon floor.
    pub fn g2(&self, c: &OutputProjection<T>) -> T {
        let n = self.moments.mean_photons(c);
        if !(n >= T::lit(PHOTON_FLOOR)) {
            return T::nan();
        }
        CorrelationBasis::contract(&self.folded, c.as_array()) / (n * n) + self.outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(values: Vec<f64>, spacing: f64) -> CorrelationCurve<f64> {
        let n = values.len();
        let half = (n / 2) as f64;
        CorrelationCurve {
            tau: (0..n).map(|k| (k as f64 - half) * spacing).collect(),
            values,
            mean_n: 1.0,
        }
    }

    #[test]
    fn delta_kernel_limit_is_identity() {
        let c = curve((0..101).map(|k| 1.0 - (-(k as f64 - 50.0).powi(2) / 50.0).exp()).collect(), 0.01);
        let out = convolve_detector(&c, 0.01 / 200.0, DetectorKernel::Gaussian).unwrap();
        for (a, b) in out.values.iter().zip(&c.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_curve_is_unchanged() {
        let c = curve(vec![1.0; 401], 0.01);
        for kernel in [DetectorKernel::Gaussian, DetectorKernel::TwoSidedExponential] {
            let out = convolve_detector(&c, 0.53, kernel).unwrap();
            for v in out.values {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let c = curve(vec![1.0; 11], 0.1);
        assert!(matches!(
            convolve_detector(&c, 0.53, DetectorKernel::Gaussian),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn kernel_is_unit_area_and_truncated_at_four_sigma() {
        let w = kernel_weights(0.001f64, 0.53, DetectorKernel::Gaussian).unwrap().unwrap();
        let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
        assert!((total - 1.0).abs() < 1e-14);
        let sigma = 0.53 / (2.0 * (2.0 * 2f64.ln()).sqrt());
        assert_eq!(w.len() - 1, (4.0 * sigma / 0.001f64).floor() as usize);
    }

    #[test]
    fn narrow_dip_is_filled_in() {
        // 5 ps wide dip under a 530 ps response
        let spacing = 0.001;
        let values: Vec<f64> = (0..4001)
            .map(|k| {
                let t = (k as f64 - 2000.0) * spacing;
                1.0 - 0.995 * (-t.abs() / 0.005).exp()
            })
            .collect();
        let c = curve(values, spacing);
        let out = convolve_detector(&c, 0.53, DetectorKernel::Gaussian).unwrap();
        assert!(out.min() > 0.9);
        assert!(out.min() >= c.min());
    }

    #[test]
    fn nonnegative_grid_is_reflected() {
        let c = CorrelationCurve::from_nonnegative(&[0.0, 1.0, 2.0], &[0.1, 0.5, 0.9], 2.0).unwrap();
        assert_eq!(c.tau, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(c.values, vec![0.9, 0.5, 0.1, 0.5, 0.9]);
        assert_eq!(c.at_zero(), 0.1);
        assert!(CorrelationCurve::from_nonnegative(&[0.5, 1.0], &[0.1, 0.5], 2.0).is_err());
    }

    #[test]
    fn default_grid_spans_ten_lifetimes() {
        let g = default_tau_grid(2.0f64, 2048);
        assert_eq!(g.len(), 2048);
        assert_eq!(g[0], 0.0);
        assert!((g[2047] - 5.0).abs() < 1e-12);
    }
}
