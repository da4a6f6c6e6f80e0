//! Photon statistics of the projected output mode and the displaced
//! squeezed-state analysis of the two-photon amplitude.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{fock_annihilation, Ladder, Operator, Space, SpaceLayout};
use crate::liouvillian::DensityMatrix;
use crate::linalg::{one_hot, Matrix};
use crate::polarization::OutputProjection;
use crate::scalar::{cis, czero, imag_unit, re, Cplx, Real};

/// Residual above which a projected distribution is flagged as truncated.
pub const DISTRIBUTION_RESIDUAL_WARNING: f64 = 1e-4;

/// Residual tolerated by [`displaced_squeezed_fock_probs`].
pub const SQUEEZED_RESIDUAL_TOL: f64 = 1e-8;

/// Displacement `α = ᾱe^{iϑ}` and squeezing `ξ = re^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeSpec<T> {
    pub alpha_bar: T,
    pub vartheta: T,
    pub r: T,
    pub theta: T,
}

fn wrap_phase<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let w = x % two_pi;
    if w < T::zero() {
        w + two_pi
    } else {
        w
    }
}

impl<T: Real> SqueezeSpec<T> {
    pub fn new(alpha_bar: T, vartheta: T, r: T, theta: T) -> Result<Self> {
        if !(alpha_bar >= T::zero()) || !alpha_bar.is_finite() {
            return Err(Error::InvalidParameter {
                field: "alpha_bar",
                reason: format!("must be finite and non-negative, got {alpha_bar}"),
            });
        }
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                field: "r",
                reason: format!("must be finite and non-negative, got {r}"),
            });
        }
        if !vartheta.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                field: "phase",
                reason: "phases must be finite".into(),
            });
        }
        Ok(Self {
            alpha_bar,
            vartheta: wrap_phase(vartheta),
            r,
            theta: wrap_phase(theta),
        })
    }

    /// Zero phases.
    pub fn real(alpha_bar: T, r: T) -> Result<Self> {
        Self::new(alpha_bar, T::zero(), r, T::zero())
    }

    pub fn alpha(&self) -> Cplx<T> {
        cis(self.vartheta) * self.alpha_bar
    }

    pub fn xi(&self) -> Cplx<T> {
        cis(self.theta) * self.r
    }
}

/// Photon-number probabilities of a single mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution<T> {
    pub probs: Vec<T>,
    /// `1 − Σ P(n)`.
    pub residual: T,
}

impl<T: Real> PhotonDistribution<T> {
    pub fn from_probs(probs: Vec<T>) -> Self {
        let total: T = probs.iter().copied().sum();
        Self {
            probs,
            residual: T::one() - total,
        }
    }

    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| T::from_count(n) * p)
            .sum()
    }

    /// `Σ n(n−1) P(n)`.
    pub fn second_factorial_moment(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| T::from_count(n * n.saturating_sub(1)) * p)
            .sum()
    }

    pub fn truncation_warning(&self) -> bool {
        self.residual.abs() > T::lit(DISTRIBUTION_RESIDUAL_WARNING)
    }

    /// `P(n) − Poisson(n; mean)` for every stored n.
    pub fn poisson_deviation(&self) -> Vec<T> {
        let poisson = poisson_probs(self.mean(), self.probs.len());
        self.probs.iter().zip(poisson).map(|(&p, q)| p - q).collect()
    }

    /// CSV with columns `n,P_n`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,P_n\n");
        for (n, p) in self.probs.iter().enumerate() {
            let _ = writeln!(s, "{n},{p}");
        }
        s
    }

    pub fn summary(&self) -> DistributionSummary<T> {
        DistributionSummary {
            mean: self.mean(),
            variance: number_variance(self),
            second_factorial_moment: self.second_factorial_moment(),
            poisson_deviation: self.poisson_deviation(),
            residual: self.residual,
        }
    }
}

/// JSON-friendly digest of a distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary<T> {
    pub mean: T,
    pub variance: T,
    pub second_factorial_moment: T,
    pub poisson_deviation: Vec<T>,
    pub residual: T,
}

/// `e^{−m} mⁿ/n!` for `n < len`.
pub fn poisson_probs<T: Real>(mean: T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-mean).exp();
    for n in 0..len {
        if n > 0 {
            p = p * mean / T::from_count(n);
        }
        out.push(p);
    }
    out
}

/// `Var(n) = Σn²P(n) − (ΣnP(n))²`.
pub fn number_variance<T: Real>(dist: &PhotonDistribution<T>) -> T {
    let mean = dist.mean();
    let second: T = dist
        .probs
        .iter()
        .enumerate()
        .map(|(n, &p)| T::from_count(n * n) * p)
        .sum();
    second - mean * mean
}

fn composite_layout(space: Space) -> Result<SpaceLayout> {
    match space {
        Space::Composite(l) => Ok(l),
        other => Err(Error::LayoutMismatch(format!("expected the composite space, got {other}"))),
    }
}

/// Unitary on the cavity modes with `U† a_H U = u·a_H + v·a_V`.
///
/// Built as `exp(iβ n_H)·exp(α(a_H†a_V − a_V†a_H))·exp(i(γ−β) n_V)` with
/// `u = cos α·e^{iβ}`, `v = sin α·e^{iγ}`. The relation is exact on every
/// total-photon block that fits inside the truncation.
pub fn mode_rotation<T: Real>(c: &OutputProjection<T>, layout: SpaceLayout) -> Result<Operator<T>> {
    let ladder = Ladder::<T>::new(layout);
    let space = Space::Composite(layout);
    let (ah, av) = (&ladder.a_h, &ladder.a_v);
    let n_h = &ah.adjoint() * ah;
    let n_v = &av.adjoint() * av;
    let alpha = c.v.norm().atan2(c.u.norm());
    let beta = if c.u.norm() > T::zero() { c.u.arg() } else { T::zero() };
    let gamma = if c.v.norm() > T::zero() { c.v.arg() } else { T::zero() };
    let i = imag_unit::<T>();
    let phase_h = n_h.scale(i * beta).matrix().expm();
    let mixer = (&(&ah.adjoint() * av) - &(&av.adjoint() * ah)).scale_real(alpha);
    let rot = mixer.matrix().expm();
    let phase_v = n_v.scale(i * (gamma - beta)).matrix().expm();
    Operator::new(space, phase_h.matmul(&rot).matmul(&phase_v))
}

/// Photon-number distribution of the detected mode `c`, read off as the H
/// occupation of `UρU†` with `U = mode_rotation(c)`.
///
/// `ρ` is first embedded in a layout with twice the photon cutoff so that
/// every populated total-photon block rotates exactly. The distribution
/// therefore runs over `0..=2·n_max`.
pub fn photon_distribution<T: Real>(rho: &DensityMatrix<T>, c: &OutputProjection<T>) -> Result<PhotonDistribution<T>> {
    let layout = composite_layout(rho.space())?;
    let wide = SpaceLayout::new(2 * layout.n_max())?;
    let map: Vec<usize> = (0..layout.dim())
        .map(|idx| {
            let (n_h, n_v, qd) = layout.decompose(idx);
            wide.index(n_h, n_v, qd)
        })
        .collect();
    let mut padded = Matrix::zeros(wide.dim(), wide.dim());
    for (i, &wi) in map.iter().enumerate() {
        for (j, &wj) in map.iter().enumerate() {
            padded[(wi, wj)] = rho.matrix()[(i, j)];
        }
    }
    let u = mode_rotation(c, wide)?;
    let rotated = u.matrix().matmul(&padded).matmul(&u.matrix().adjoint());
    let mut probs = vec![T::zero(); wide.fock_dim()];
    for idx in 0..wide.dim() {
        let (n_h, _, _) = wide.decompose(idx);
        probs[n_h] += rotated[(idx, idx)].re;
    }
    Ok(PhotonDistribution::from_probs(probs))
}

/// `|⟨n|D(α)S(ξ)|0⟩|²` for `n ≤ n_max`, from matrix exponentials of the
/// squeeze and displacement generators on a padded single-mode space.
pub fn displaced_squeezed_fock_probs<T: Real>(spec: &SqueezeSpec<T>, n_max: usize) -> Result<PhotonDistribution<T>> {
    let work = 2 * n_max + 40;
    let a = fock_annihilation::<T>(work)?;
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let xi = spec.xi();
    let alpha = spec.alpha();
    let half = T::lit(0.5);
    // S(ξ) = exp(½(ξ* a² − ξ a†²)), D(α) = exp(α a† − α* a)
    let squeeze_gen = &a2.scale(xi.conj() * half) - &ad2.scale(xi * half);
    let disp_gen = &ad.scale(alpha) - &a.scale(alpha.conj());
    let vac = one_hot::<T>(work + 1, 0);
    let ket = disp_gen.matrix().expm().matvec(&squeeze_gen.matrix().expm().matvec(&vac));
    let probs: Vec<T> = ket.iter().take(n_max + 1).map(|z| z.norm_sqr()).collect();
    let dist = PhotonDistribution::from_probs(probs);
    if dist.residual.abs() > T::lit(SQUEEZED_RESIDUAL_TOL) {
        return Err(Error::TruncationResidual {
            residual: dist.residual.to_f64_lossy(),
            tolerance: SQUEEZED_RESIDUAL_TOL,
        });
    }
    Ok(dist)
}

/// Leading-order two-photon probability `(ᾱ² − r)²/2`, valid for zero
/// displacement and squeeze phases.
pub fn two_photon_amplitude_approx<T: Real>(spec: &SqueezeSpec<T>) -> Result<T> {
    if !spec.theta.is_zero() || !spec.vartheta.is_zero() {
        return Err(Error::NonZeroPhase);
    }
    let d = spec.alpha_bar * spec.alpha_bar - spec.r;
    Ok(d * d / T::lit(2.0))
}

/// Squeezing of the reduced quadrature in dB, `10·log10(e^{−2r})`.
pub fn squeezing_db<T: Real>(r: T) -> T {
    T::lit(10.0) * (-(T::lit(2.0) * r)).exp().log10()
}

/// Squeeze parameter implied by a minimum quadrature variance,
/// `r̂ = −½·ln(4·Var_min)`.
pub fn squeeze_estimate<T: Real>(min_variance: T) -> T {
    -(T::lit(4.0) * min_variance).ln() / T::lit(2.0)
}

/// Variance of `X(λ) = (c e^{−iλ} + c† e^{iλ})/2`.
///
/// `X²` is normally ordered with `[c, c†] = 1` before taking the trace, so the
/// result is that of the untruncated oscillator in state `ρ`.
pub fn quadrature_variance<T: Real>(rho: &DensityMatrix<T>, c: &OutputProjection<T>, angle: T) -> Result<T> {
    let ladder = Ladder::new(composite_layout(rho.space())?);
    let op = c.operator(&ladder);
    let cd = op.adjoint();
    let half = T::lit(0.5);
    let x = &op.scale(cis(-angle) * half) + &cd.scale(cis(angle) * half);
    let mean = rho.expect(&x).re;
    let quarter = T::lit(0.25);
    let x2 = &(&(&op * &op).scale(cis(-angle - angle) * quarter) + &(&cd * &cd).scale(cis(angle + angle) * quarter))
        + &(&cd * &op).scale_real(half);
    Ok(rho.expect(&x2).re + quarter - mean * mean)
}

/// Which quadrature of the detected field carries the reduced noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezingCharacter {
    /// Reduced noise along the mean-field direction.
    Amplitude,
    /// Reduced noise orthogonal to the mean field.
    Phase,
}

/// Second-order quadrature statistics of the detected mode; the variance at
/// every angle follows in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats<T> {
    /// `⟨c⟩`.
    pub mean_field: Cplx<T>,
    /// `⟨c²⟩ − ⟨c⟩²`.
    pub anomalous: Cplx<T>,
    /// `⟨c c† + c† c⟩ − 2|⟨c⟩|²`, with `c c† = c† c + 1`.
    pub symmetric: T,
}

impl<T: Real> QuadratureStats<T> {
    pub fn new(rho: &DensityMatrix<T>, c: &OutputProjection<T>) -> Result<Self> {
        let ladder = Ladder::new(composite_layout(rho.space())?);
        let op = c.operator(&ladder);
        let cd = op.adjoint();
        let mean_field = rho.expect(&op);
        let c2 = rho.expect(&(&op * &op));
        let sym = T::lit(2.0) * rho.expect(&(&cd * &op)).re + T::one();
        Ok(Self {
            mean_field,
            anomalous: c2 - mean_field * mean_field,
            symmetric: sym - T::lit(2.0) * mean_field.norm_sqr(),
        })
    }

    pub fn variance(&self, angle: T) -> T {
        let two = T::lit(2.0);
        (two * (self.anomalous * cis(-two * angle)).re + self.symmetric) / T::lit(4.0)
    }

    /// `(angle, variance)` of the least noisy quadrature.
    pub fn min(&self) -> (T, T) {
        let angle = (self.anomalous.arg() + T::PI()) / T::lit(2.0);
        (angle, (self.symmetric - T::lit(2.0) * self.anomalous.norm()) / T::lit(4.0))
    }

    pub fn max(&self) -> (T, T) {
        let angle = self.anomalous.arg() / T::lit(2.0);
        (angle, (self.symmetric + T::lit(2.0) * self.anomalous.norm()) / T::lit(4.0))
    }

    /// Quadrature angle parallel to the mean field.
    pub fn amplitude_angle(&self) -> T {
        self.mean_field.arg()
    }

    pub fn character(&self) -> SqueezingCharacter {
        let along = self.variance(self.amplitude_angle());
        let across = self.variance(self.amplitude_angle() + T::FRAC_PI_2());
        if along < across {
            SqueezingCharacter::Amplitude
        } else {
            SqueezingCharacter::Phase
        }
    }
}

/// Number and quadrature statistics of the detected mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputStatistics<T> {
    pub distribution: DistributionSummary<T>,
    pub quadrature: QuadratureStats<T>,
    pub min_quadrature_variance: T,
    pub squeeze_estimate: T,
    pub squeezing_db: T,
    pub character: SqueezingCharacter,
}

impl<T: Real> OutputStatistics<T> {
    pub fn new(rho: &DensityMatrix<T>, c: &OutputProjection<T>) -> Result<Self> {
        let dist = photon_distribution(rho, c)?;
        let quadrature = QuadratureStats::new(rho, c)?;
        let (_, min_var) = quadrature.min();
        let r_hat = squeeze_estimate(min_var);
        Ok(Self {
            distribution: dist.summary(),
            quadrature,
            min_quadrature_variance: min_var,
            squeeze_estimate: r_hat,
            squeezing_db: squeezing_db(r_hat),
            character: quadrature.character(),
        })
    }
}

/// Truncated coherent-state ket `e^{−|α|²/2} Σ αⁿ/√n! |n⟩`, not renormalized.
pub fn coherent_ket<T: Real>(alpha: Cplx<T>, n_max: usize) -> Vec<Cplx<T>> {
    let mut out = vec![czero(); n_max + 1];
    let mut amp = re((-alpha.norm_sqr() / T::lit(2.0)).exp());
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            amp = amp * alpha / T::from_count(n).sqrt();
        }
        *slot = amp;
    }
    out
}
