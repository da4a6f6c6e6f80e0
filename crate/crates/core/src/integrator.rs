//! Adaptive Dormand–Prince 5(4) integrator with continuous output for
//! complex linear systems.
//!
//! Output times are served from the fourth-order dense interpolant, so the
//! step-size sequence is independent of how finely the output is sampled.
//! A running estimate of `h·|λ|` along the dominant direction flags stiffness
//! in the returned statistics.

use crate::error::{Error, Result};
use crate::scalar::{czero, Cplx, Real};

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; chosen automatically when `None`.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-8).max(T::epsilon() * T::lit(10.0)),
            atol: T::lit(1e-12).max(T::epsilon() * T::lit(1e-3)),
            initial_step: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Set once the stability-boundary test fired 15 times in a row.
    pub stiffness_detected: bool,
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Tableau<T> {
    c: [T; 5],
    a: [[T; 6]; 6],
    e: [T; 7],
    d: [T; 7],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let l = T::lit;
        let z = T::zero();
        Self {
            c: [l(C2), l(C3), l(C4), l(C5), T::one()],
            a: [
                [l(A21), z, z, z, z, z],
                [l(A31), l(A32), z, z, z, z],
                [l(A41), l(A42), l(A43), z, z, z],
                [l(A51), l(A52), l(A53), l(A54), z, z],
                [l(A61), l(A62), l(A63), l(A64), l(A65), z],
                [l(A71), z, l(A73), l(A74), l(A75), l(A76)],
            ],
            e: [l(E1), z, l(E3), l(E4), l(E5), l(E6), l(E7)],
            d: [l(D1), z, l(D3), l(D4), l(D5), l(D6), l(D7)],
        }
    }
}

/// Integrates `y' = f(t, y)` from `t0` and reports the solution at each of
/// the ascending times `t_out` (all `>= t0`) through `on_output(k, y)`.
pub fn integrate<T, F, O>(
    mut f: F,
    t0: T,
    y0: &[Cplx<T>],
    t_out: &[T],
    opts: &IntegratorOptions<T>,
    mut on_output: O,
) -> Result<IntegrationStats>
where
    T: Real,
    F: FnMut(T, &[Cplx<T>], &mut [Cplx<T>]),
    O: FnMut(usize, &[Cplx<T>]),
{
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidGrid("output times must be ascending and not before t0".into()));
    }
    let mut next_out = 0usize;
    while next_out < t_out.len() && t_out[next_out] <= t0 {
        on_output(next_out, y0);
        next_out += 1;
    }
    if next_out == t_out.len() {
        return Ok(stats);
    }
    let t_end = *t_out.last().expect("non-empty");
    let tab = Tableau::<T>::new();

    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Cplx<T>>> = (0..7).map(|_| vec![czero(); n]).collect();
    let mut stage = vec![czero(); n];
    let mut y_new = vec![czero(); n];
    let mut y_stiff = vec![czero(); n];
    let mut rcont: Vec<Vec<Cplx<T>>> = (0..5).map(|_| vec![czero(); n]).collect();
    let mut interp = vec![czero(); n];

    let mut t = t0;
    f(t, &y, &mut k[0]);
    stats.rhs_evals += 1;

    let mut h = match opts.initial_step {
        Some(h) => h,
        None => initial_step(&mut f, t, &y, &k[0], opts, &mut stats),
    }
    .min(t_end - t);

    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let mut fac_max = T::lit(10.0);
    let mut stiff_hits = 0usize;
    let mut non_stiff = 0usize;
    let steps_total = |s: &IntegrationStats| s.accepted + s.rejected;

    loop {
        if steps_total(&stats) >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t: t.to_f64_lossy(),
                step: h.to_f64_lossy(),
                steps: steps_total(&stats),
                reason: "maximum number of steps exceeded",
            });
        }
        if h <= T::epsilon() * T::lit(10.0) * t.abs().max(T::one()) {
            return Err(Error::IntegrationFailure {
                t: t.to_f64_lossy(),
                step: h.to_f64_lossy(),
                steps: steps_total(&stats),
                reason: "step size underflow",
            });
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = czero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = tab.a[s - 1][j];
                    if !a.is_zero() {
                        acc += kj[i] * a;
                    }
                }
                stage[i] = y[i] + acc * h;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            } else if s == 5 {
                y_stiff.copy_from_slice(&stage);
            }
            let ts = if s < 6 { t + tab.c[s - 1] * h } else { t + h };
            f(ts, &stage, &mut k[s]);
            stats.rhs_evals += 1;
        }

        let mut err_sq = T::zero();
        for i in 0..n {
            let mut e = czero();
            for (j, kj) in k.iter().enumerate() {
                let c = tab.e[j];
                if !c.is_zero() {
                    e += kj[i] * c;
                }
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e * h).norm_sqr() / (sc * sc);
        }
        let err = (err_sq / T::from_count(n.max(1))).sqrt();

        if err <= T::one() {
            stats.accepted += 1;

            let mut num = T::zero();
            let mut den = T::zero();
            for i in 0..n {
                num += (k[6][i] - k[5][i]).norm_sqr();
                den += (y_new[i] - y_stiff[i]).norm_sqr();
            }
            if den > T::zero() {
                if h * (num / den).sqrt() > T::lit(3.25) {
                    non_stiff = 0;
                    stiff_hits += 1;
                    if stiff_hits >= 15 {
                        stats.stiffness_detected = true;
                    }
                } else {
                    non_stiff += 1;
                    if non_stiff >= 6 {
                        stiff_hits = 0;
                    }
                }
            }

            let t_new = t + h;
            if next_out < t_out.len() && t_out[next_out] <= t_new {
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = k[0][i] * h - ydiff;
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - k[6][i] * h - bspl;
                    let mut acc = czero();
                    for (j, kj) in k.iter().enumerate() {
                        let dj = tab.d[j];
                        if !dj.is_zero() {
                            acc += kj[i] * dj;
                        }
                    }
                    rcont[4][i] = acc * h;
                }
                while next_out < t_out.len() && t_out[next_out] <= t_new {
                    let theta = (t_out[next_out] - t) / h;
                    let theta1 = T::one() - theta;
                    for i in 0..n {
                        interp[i] = rcont[0][i]
                            + (rcont[1][i]
                                + (rcont[2][i] + (rcont[3][i] + rcont[4][i] * theta1) * theta) * theta1)
                                * theta;
                    }
                    on_output(next_out, &interp);
                    next_out += 1;
                }
            }

            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            t = t_new;
            if next_out == t_out.len() {
                return Ok(stats);
            }
            let fac = if err.is_zero() {
                fac_max
            } else {
                (safety * err.powf(T::lit(-0.2))).max(fac_min).min(fac_max)
            };
            h = (h * fac).min(t_end - t);
            fac_max = T::lit(10.0);
        } else {
            stats.rejected += 1;
            let fac = (safety * err.powf(T::lit(-0.2))).max(fac_min).min(T::one());
            h = h * fac;
            fac_max = T::one();
        }
    }
}

fn initial_step<T, F>(
    f: &mut F,
    t: T,
    y: &[Cplx<T>],
    f0: &[Cplx<T>],
    opts: &IntegratorOptions<T>,
    stats: &mut IntegrationStats,
) -> T
where
    T: Real,
    F: FnMut(T, &[Cplx<T>], &mut [Cplx<T>]),
{
    let n = y.len();
    let nn = T::from_count(n.max(1));
    let sc: Vec<T> = y.iter().map(|z| opts.atol + opts.rtol * z.norm()).collect();
    let d0 = (y.iter().zip(&sc).map(|(z, s)| (z.norm() / *s).powi(2)).sum::<T>() / nn).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(z, s)| (z.norm() / *s).powi(2)).sum::<T>() / nn).sqrt();
    let mut h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    if !h0.is_finite() || h0.is_zero() {
        h0 = T::lit(1e-6);
    }
    let y1: Vec<Cplx<T>> = y.iter().zip(f0).map(|(a, b)| *a + *b * h0).collect();
    let mut f1 = vec![czero(); n];
    f(t + h0, &y1, &mut f1);
    stats.rhs_evals += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((*a - *b).norm() / *s).powi(2))
        .sum::<T>()
        / nn)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn harmonic_oscillator_matches_analytic() {
        // y' = i·ω·y  → y = e^{iωt}
        let w = 3.0;
        let times: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); times.len()];
        let stats = integrate(
            |_t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::new(0.0, w) * y[0],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &times,
            &IntegratorOptions::default(),
            |k, y| out[k] = y[0],
        )
        .unwrap();
        for (t, y) in times.iter().zip(&out) {
            assert!((y - Complex64::from_polar(1.0, w * t)).norm() < 1e-7, "t={t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn decay_is_accurate_at_requested_times() {
        let times = [0.0, 0.5, 1.0, 2.0];
        let mut out = [0.0; 4];
        integrate(
            |_t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = -y[0],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &times,
            &IntegratorOptions::default(),
            |k, y| out[k] = y[0].re,
        )
        .unwrap();
        for (t, y) in times.iter().zip(out) {
            assert!((y - (-t).exp()).abs() < 1e-8);
        }
        assert_eq!(out[0], 1.0);
    }

    #[test]
    fn stiff_problem_is_flagged() {
        let times = [0.0, 10.0];
        let stats = integrate(
            |_t, y: &[Complex64], dy: &mut [Complex64]| {
                dy[0] = -1e4 * (y[0] - Complex64::new(1.0, 0.0));
                dy[1] = -y[1];
            },
            0.0,
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            &times,
            &IntegratorOptions::default(),
            |_, _| {},
        )
        .unwrap();
        assert!(stats.stiffness_detected);
    }

    #[test]
    fn step_budget_exhaustion_is_an_error() {
        let opts = IntegratorOptions {
            max_steps: 5,
            ..IntegratorOptions::default()
        };
        let err = integrate(
            |_t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::new(0.0, 100.0) * y[0],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &[100.0],
            &opts,
            |_, _| {},
        )
        .unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }));
    }

    #[test]
    fn rejects_descending_output() {
        let r = integrate(
            |_t, _y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::new(0.0, 0.0),
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &[1.0, 0.5],
            &IntegratorOptions::default(),
            |_, _| {},
        );
        assert!(matches!(r, Err(Error::InvalidGrid(_))));
    }
}
