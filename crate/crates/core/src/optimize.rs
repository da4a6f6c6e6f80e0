//! Derivative-free Nelder–Mead simplex minimization.

use crate::scalar::Real;

/// Convergence requires the objective spread over the simplex to fall below
/// `f_tol` with every vertex within `x_tol` of the best one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions<T> {
    pub f_tol: T,
    pub x_tol: T,
    pub max_evals: usize,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            f_tol: T::lit(1e-6),
            x_tol: T::lit(1e-6),
            max_evals: 4000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from an explicit initial simplex of `n + 1` vertices.
/// Non-finite objective values are treated as `+∞`.
pub fn nelder_mead_simplex<T: Real, F>(mut f: F, simplex: Vec<Vec<T>>, opts: &NelderMeadOptions<T>) -> Minimum<T>
where
    F: FnMut(&[T]) -> T,
{
    let n = simplex.len().saturating_sub(1);
    assert!(n >= 1 && simplex.iter().all(|v| v.len() == n), "simplex needs n + 1 vertices of length n");
    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };
    let mut pts: Vec<(Vec<T>, T)> = simplex
        .into_iter()
        .map(|x| {
            let v = eval(&x, &mut evals);
            (x, v)
        })
        .collect();
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut converged = false;
    while evals < opts.max_evals {
        // stable sort keeps earlier vertices ahead on ties
        pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = pts[0].1;
        let worst = pts[n].1;
        let spread = if worst.is_finite() { worst - best } else { T::infinity() };
        let size = pts[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&pts[0].0)
                    .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
            })
            .fold(T::zero(), T::max);
        if spread <= opts.f_tol && size <= opts.x_tol {
            converged = true;
            break;
        }
        let centroid: Vec<T> = (0..n)
            .map(|k| pts[..n].iter().map(|(x, _)| x[k]).sum::<T>() / T::from_count(n))
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&pts[n].0)
                .map(|(c, w)| *c + t * (*c - *w))
                .collect()
        };
        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < pts[0].1 {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < pts[n].1 {
                let xc = along(rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < pts[n].1.min(fr) {
                pts[n] = (xc, fc);
            } else {
                let x0 = pts[0].0.clone();
                for p in pts.iter_mut().skip(1) {
                    let shrunk: Vec<T> = x0.iter().zip(&p.0).map(|(a, b)| *a + sigma * (*b - *a)).collect();
                    let v = eval(&shrunk, &mut evals);
                    *p = (shrunk, v);
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, value) = pts.swap_remove(0);
    Minimum {
        x,
        value,
        evals,
        converged,
    }
}

/// Minimizes `f` from an axis-aligned simplex around `x0` with edge lengths
/// `steps`.
pub fn nelder_mead<T: Real, F>(f: F, x0: &[T], steps: &[T], opts: &NelderMeadOptions<T>) -> Minimum<T>
where
    F: FnMut(&[T]) -> T,
{
    let mut simplex = vec![x0.to_vec()];
    for (k, &s) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[k] += s;
        simplex.push(v);
    }
    nelder_mead_simplex(f, simplex, opts)
}
