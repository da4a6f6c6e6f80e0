//! Parameter sweeps over input and output polarization, the per-state output
//! optimizer, brightness curves and the named operating points.
//!
//! Every distinct drive needs one steady-state solve; all output projections
//! of that state are then evaluated from its moments, so a waveplate map costs
//! a single solve.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    default_tau_grid, kernel_weights, ConvolvedZero, CorrelationBasis, DetectorKernel, ProjectionMoments,
    DEFAULT_DETECTOR_FWHM_NS, DEFAULT_TAU_POINTS, PHOTON_FLOOR,
};
use crate::error::{Error, Result};
use crate::hilbert::SpaceLayout;
use crate::integrator::IntegratorOptions;
use crate::liouvillian::{build_liouvillian, steady_state_with, DensityMatrix, SteadyStateOptions, Superoperator};
use crate::model::{build_hamiltonian, collapse_operators, SystemParams};
use crate::optimize::{nelder_mead, nelder_mead_simplex, NelderMeadOptions};
use crate::polarization::{input_drive, output_mode, Axis, OutputProjection, PlateOrder};
use crate::scalar::Real;

/// Numerical settings shared by all sweeps.
#[derive(Clone, Copy, Debug)]
pub struct SolverSettings<T> {
    pub n_max: usize,
    /// Detector timing jitter (FWHM), ns.
    pub detector_fwhm: T,
    pub kernel: DetectorKernel,
    /// Samples of the default delay grid.
    pub tau_points: usize,
    pub steady: SteadyStateOptions<T>,
    pub integrator: IntegratorOptions<T>,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            n_max: 3,
            detector_fwhm: T::lit(DEFAULT_DETECTOR_FWHM_NS),
            kernel: DetectorKernel::Gaussian,
            tau_points: DEFAULT_TAU_POINTS,
            steady: SteadyStateOptions::default(),
            integrator: IntegratorOptions::default(),
            workers: 0,
        }
    }
}

impl<T: Real> SolverSettings<T> {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParameter {
                field: "workers",
                reason: e.to_string(),
            })
    }
}

/// Steady state of one parameter set together with its generator.
#[derive(Clone, Debug)]
pub struct SteadySolution<T> {
    pub params: SystemParams<T>,
    pub layout: SpaceLayout,
    pub liouvillian: Superoperator<T>,
    pub rho: DensityMatrix<T>,
    pub moments: ProjectionMoments<T>,
}

impl<T: Real> SteadySolution<T> {
    pub fn solve(params: &SystemParams<T>, settings: &SolverSettings<T>) -> Result<Self> {
        params.validate()?;
        let layout = SpaceLayout::new(settings.n_max)?;
        let h = build_hamiltonian(params, layout);
        let l = build_liouvillian(&h, &collapse_operators(params, layout))?;
        let rho = steady_state_with(&l, settings.steady)?;
        let moments = ProjectionMoments::new(&rho)?;
        Ok(Self {
            params: *params,
            layout,
            liouvillian: l,
            rho,
            moments,
        })
    }

    /// Default delay grid: `settings.tau_points` samples over ten times the
    /// slowest relaxation time.
    pub fn tau_grid(&self, settings: &SolverSettings<T>) -> Vec<T> {
        default_tau_grid(self.params.slowest_rate(), settings.tau_points)
    }

    /// Prefix of the default delay grid covering the detector kernel.
    pub fn detector_tau_grid(&self, settings: &SolverSettings<T>) -> Result<Vec<T>> {
        let full = self.tau_grid(settings);
        let spacing = full[1] - full[0];
        let reach = kernel_weights(spacing, settings.detector_fwhm, settings.kernel)?
            .map(|w| w.len())
            .unwrap_or(1);
        let len = (reach + 1).max(2);
        if len <= full.len() {
            Ok(full[..len].to_vec())
        } else {
            Ok((0..len).map(|k| spacing * T::from_count(k)).collect())
        }
    }

    pub fn correlation_basis(&self, tau_grid: &[T], settings: &SolverSettings<T>) -> Result<CorrelationBasis<T>> {
        CorrelationBasis::new(&self.liouvillian, &self.rho, tau_grid, &settings.integrator)
    }

    /// Evaluator for the detector-convolved `g²(0)` of any projection.
    pub fn detector_response(&self, settings: &SolverSettings<T>) -> Result<ConvolvedZero<T>> {
        let grid = self.detector_tau_grid(settings)?;
        self.correlation_basis(&grid, settings)?
            .detector_weighted(settings.detector_fwhm, settings.kernel)
    }
}

/// Parameters with the drive split according to the linear input
/// polarization `theta_in`, keeping the total drive strength.
pub fn with_input_polarization<T: Real>(params: &SystemParams<T>, theta_in: T) -> SystemParams<T> {
    let d = input_drive(theta_in, params.eta_total());
    params.with_drive(d.eta_h, d.eta_v, d.relative_phase)
}

/// `points` angles evenly covering `[0, π)`.
pub fn default_angle_grid<T: Real>(points: usize) -> Vec<T> {
    (0..points)
        .map(|k| T::PI() * T::from_count(k) / T::from_count(points))
        .collect()
}

/// Outcome class of one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    LowIntensity,
    SolverFailed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::LowIntensity => "low_intensity",
            PointStatus::SolverFailed => "solver_failed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord<T> {
    pub mean_n_out: T,
    pub g2_bare: T,
    pub g2_convolved: T,
    pub status: PointStatus,
}

impl<T: Real> PointRecord<T> {
    fn failed() -> Self {
        Self {
            mean_n_out: T::nan(),
            g2_bare: T::nan(),
            g2_convolved: T::nan(),
            status: PointStatus::SolverFailed,
        }
    }

    /// Observables of projection `c`.
    pub fn evaluate(moments: &ProjectionMoments<T>, detector: DetectorColumn<'_, T>, c: &OutputProjection<T>) -> Self {
        let (n, g2) = moments.intensity_and_g2(c);
        if !(n >= T::lit(PHOTON_FLOOR)) {
            return Self {
                mean_n_out: n,
                g2_bare: T::nan(),
                g2_convolved: T::nan(),
                status: PointStatus::LowIntensity,
            };
        }
        let (g2c, conv_ok) = match detector {
            DetectorColumn::Skipped => (T::nan(), true),
            DetectorColumn::Failed => (T::nan(), false),
            DetectorColumn::Ready(z) => {
                let v = z.g2(c);
                (v, v >= T::zero())
            }
        };
        let status = if g2 >= T::zero() && g2.is_finite() && conv_ok {
            PointStatus::Ok
        } else {
            PointStatus::SolverFailed
        };
        Self {
            mean_n_out: n,
            g2_bare: g2,
            g2_convolved: g2c,
            status,
        }
    }
}

/// Source of the detector-convolved column of a record.
#[derive(Clone, Copy, Debug)]
pub enum DetectorColumn<'a, T> {
    /// Not requested; left as NaN without affecting the status.
    Skipped,
    /// Requested but the correlation propagation failed.
    Failed,
    Ready(&'a ConvolvedZero<T>),
}

impl<'a, T> DetectorColumn<'a, T> {
    fn from_result<E>(r: &'a std::result::Result<ConvolvedZero<T>, E>) -> Self {
        match r {
            Ok(z) => DetectorColumn::Ready(z),
            Err(_) => DetectorColumn::Failed,
        }
    }
}

/// One sweep dimension; samples are stored in `unit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis<T> {
    pub name: String,
    pub unit: String,
    pub samples: Vec<T>,
}

impl<T: Real> GridAxis<T> {
    pub fn degrees(name: &str, radians: &[T]) -> Self {
        Self {
            name: name.to_string(),
            unit: "deg".into(),
            samples: radians.iter().map(|x| x.to_degrees()).collect(),
        }
    }
}

/// Records of a two-axis sweep, first axis outermost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid<T> {
    pub axes: Vec<GridAxis<T>>,
    pub records: Vec<PointRecord<T>>,
}

impl<T: Real> SweepGrid<T> {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.samples.len()).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> &PointRecord<T> {
        &self.records[i * self.axes[1].samples.len() + j]
    }

    /// Grid coordinates of flat index `k`.
    pub fn coords(&self, k: usize) -> (usize, usize) {
        let n = self.axes[1].samples.len();
        (k / n, k % n)
    }

    fn extreme(&self, better: impl Fn(T, T) -> bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, r) in self.records.iter().enumerate() {
            if r.status != PointStatus::Ok {
                continue;
            }
            if best.map_or(true, |b| better(r.g2_bare, self.records[b].g2_bare)) {
                best = Some(k);
            }
        }
        best
    }

    /// Flat index of the smallest bare `g²(0)` among valid points.
    pub fn argmin_g2(&self) -> Option<usize> {
        self.extreme(|a, b| a < b)
    }

    pub fn argmax_g2(&self) -> Option<usize> {
        self.extreme(|a, b| a > b)
    }

    fn header(&self) -> String {
        self.axes
            .iter()
            .map(|a| format!("{}_{}", a.name, a.unit))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn rows(&self, columns: &[&str]) -> String {
        let mut s = self.header();
        for c in columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (k, r) in self.records.iter().enumerate() {
            let (i, j) = self.coords(k);
            let _ = write!(s, "{},{}", self.axes[0].samples[i], self.axes[1].samples[j]);
            for c in columns {
                let _ = match *c {
                    "mean_n_out" => write!(s, ",{}", r.mean_n_out),
                    "g2_bare" => write!(s, ",{}", r.g2_bare),
                    "g2_convolved" => write!(s, ",{}", r.g2_convolved),
                    _ => write!(s, ",{}", r.status.as_str()),
                };
            }
            s.push('\n');
        }
        s
    }

    /// One row per point: axis values, `mean_n_out`, `g2_bare`,
    /// `g2_convolved`, `status`.
    pub fn to_csv(&self) -> String {
        self.rows(&["mean_n_out", "g2_bare", "g2_convolved", "status"])
    }

    /// Intensity map only.
    pub fn intensity_csv(&self) -> String {
        self.rows(&["mean_n_out", "status"])
    }

    /// Correlation map only.
    pub fn g2_csv(&self) -> String {
        self.rows(&["g2_bare", "g2_convolved", "status"])
    }
}

fn check_grid<T>(name: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    Ok(())
}

/// Map over linear input and linear detected polarization; the detected
/// mode is `cos θ_out·a_H + sin θ_out·a_V`.
pub fn sweep_linear<T: Real>(
    params: &SystemParams<T>,
    theta_in_grid: &[T],
    theta_out_grid: &[T],
    settings: &SolverSettings<T>,
) -> Result<SweepGrid<T>> {
    check_grid("theta_in", theta_in_grid)?;
    check_grid("theta_out", theta_out_grid)?;
    let pool = settings.pool()?;
    let rows: Vec<Vec<PointRecord<T>>> = pool.install(|| {
        theta_in_grid
            .par_iter()
            .map(|&theta_in| {
                let p = with_input_polarization(params, theta_in);
                let sol = match SteadySolution::solve(&p, settings) {
                    Ok(s) => s,
                    Err(_) => return vec![PointRecord::failed(); theta_out_grid.len()],
                };
                let conv = sol.detector_response(settings);
                theta_out_grid
                    .iter()
                    .map(|&t| {
                        PointRecord::evaluate(&sol.moments, DetectorColumn::from_result(&conv), &OutputProjection::linear(t))
                    })
                    .collect()
            })
            .collect()
    });
    Ok(SweepGrid {
        axes: vec![
            GridAxis::degrees("theta_in", theta_in_grid),
            GridAxis::degrees("theta_out", theta_out_grid),
        ],
        records: rows.into_iter().flatten().collect(),
    })
}

/// Detection path behind the waveplates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analyzer {
    pub axis: Axis,
    pub order: PlateOrder,
}

impl Analyzer {
    pub fn projection<T: Real>(&self, hwp: T, qwp: T) -> OutputProjection<T> {
        output_mode(hwp, qwp, self.axis, self.order)
    }
}

/// Waveplate map definition.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveplateScan<T> {
    pub theta_in: T,
    pub hwp_grid: Vec<T>,
    pub qwp_grid: Vec<T>,
    pub analyzer: Analyzer,
}

impl<T: Real> Default for WaveplateScan<T> {
    fn default() -> Self {
        Self {
            theta_in: T::FRAC_PI_4(),
            hwp_grid: default_angle_grid(121),
            qwp_grid: default_angle_grid(121),
            analyzer: Analyzer::default(),
        }
    }
}

/// Map over half- and quarter-wave plate angles at fixed input
/// polarization. `with_convolution` toggles the detector-convolved column.
pub fn sweep_waveplates<T: Real>(
    params: &SystemParams<T>,
    scan: &WaveplateScan<T>,
    settings: &SolverSettings<T>,
    with_convolution: bool,
) -> Result<SweepGrid<T>> {
    check_grid("hwp", &scan.hwp_grid)?;
    check_grid("qwp", &scan.qwp_grid)?;
    let axes = vec![
        GridAxis::degrees("hwp", &scan.hwp_grid),
        GridAxis::degrees("qwp", &scan.qwp_grid),
    ];
    let p = with_input_polarization(params, scan.theta_in);
    let solved = SteadySolution::solve(&p, settings);
    let sol = match solved {
        Ok(s) => s,
        Err(_) => {
            return Ok(SweepGrid {
                axes,
                records: vec![PointRecord::failed(); scan.hwp_grid.len() * scan.qwp_grid.len()],
            })
        }
    };
    let conv = if with_convolution {
        Some(sol.detector_response(settings))
    } else {
        None
    };
    let column = match &conv {
        None => DetectorColumn::Skipped,
        Some(r) => DetectorColumn::from_result(r),
    };
    let pool = settings.pool()?;
    let rows: Vec<Vec<PointRecord<T>>> = pool.install(|| {
        scan.hwp_grid
            .par_iter()
            .map(|&h| {
                scan.qwp_grid
                    .iter()
                    .map(|&q| PointRecord::evaluate(&sol.moments, column, &scan.analyzer.projection(h, q)))
                    .collect()
            })
            .collect()
    });
    Ok(SweepGrid {
        axes,
        records: rows.into_iter().flatten().collect(),
    })
}

/// Quantity minimized by the output optimizer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    BareG2,
    ConvolvedG2,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerSettings<T> {
    /// Coarse samples of the amplitude angle χ ∈ [0, π/2].
    pub chi_points: usize,
    /// Coarse samples of the relative phase ψ ∈ [0, 2π).
    pub psi_points: usize,
    pub simplex: NelderMeadOptions<T>,
    /// Objective values closer than this count as ties.
    pub tie_tol: T,
}

impl<T: Real> Default for OptimizerSettings<T> {
    fn default() -> Self {
        Self {
            chi_points: 64,
            psi_points: 64,
            simplex: NelderMeadOptions::default(),
            tie_tol: T::lit(1e-9),
        }
    }
}

/// Result of the projection search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizedOutput<T> {
    pub projection: OutputProjection<T>,
    pub chi: T,
    pub psi: T,
    /// Objective at the returned projection.
    pub value: T,
    pub g2_bare: T,
    pub mean_n: T,
    /// Best objective on the coarse grid.
    pub coarse_value: T,
}

struct ProjectionObjective<'a, T> {
    moments: &'a ProjectionMoments<T>,
    conv: Option<&'a ConvolvedZero<T>>,
    objective: Objective,
}

impl<T: Real> ProjectionObjective<'_, T> {
    fn eval(&self, chi: T, psi: T) -> T {
        let c = OutputProjection::from_angles(chi, psi);
        let (_, g2) = self.moments.intensity_and_g2(&c);
        match self.objective {
            Objective::BareG2 => g2,
            Objective::ConvolvedG2 => {
                if g2.is_nan() {
                    g2
                } else {
                    self.conv.map(|z| z.g2(&c)).unwrap_or_else(T::nan)
                }
            }
        }
    }

    fn finish(&self, chi: T, psi: T, value: T, coarse_value: T) -> OptimizedOutput<T> {
        let projection = OutputProjection::from_angles(chi, psi);
        let (mean_n, g2_bare) = self.moments.intensity_and_g2(&projection);
        OptimizedOutput {
            projection,
            chi,
            psi,
            value,
            g2_bare,
            mean_n,
            coarse_value,
        }
    }

    /// Best coarse point; ties go to the smallest ψ, then the smallest χ.
    fn coarse(&self, s: &OptimizerSettings<T>) -> Result<(T, T, T)> {
        let nc = s.chi_points.max(2);
        let np = s.psi_points.max(1);
        let mut best: Option<(T, T, T)> = None;
        for j in 0..np {
            let psi = T::TAU() * T::from_count(j) / T::from_count(np);
            for i in 0..nc {
                let chi = T::FRAC_PI_2() * T::from_count(i) / T::from_count(nc - 1);
                let v = self.eval(chi, psi);
                if !v.is_finite() {
                    continue;
                }
                if best.map_or(true, |b| v < b.2 - s.tie_tol) {
                    best = Some((chi, psi, v));
                }
            }
        }
        best.ok_or(Error::NoFeasibleOutput)
    }

    fn steps(s: &OptimizerSettings<T>) -> (T, T) {
        (
            T::FRAC_PI_2() / T::from_count(s.chi_points.max(2) - 1),
            T::TAU() / T::from_count(s.psi_points.max(1)),
        )
    }
}

/// Minimizes the objective over unit-norm projections `(cos χ, sin χ·e^{iψ})`:
/// a coarse grid scan followed by simplex refinement. The returned value is
/// never worse than the best coarse point.
pub fn optimize_projection<T: Real>(
    moments: &ProjectionMoments<T>,
    conv: Option<&ConvolvedZero<T>>,
    objective: Objective,
    settings: &OptimizerSettings<T>,
) -> Result<OptimizedOutput<T>> {
    let obj = ProjectionObjective {
        moments,
        conv,
        objective,
    };
    let (chi0, psi0, v0) = obj.coarse(settings)?;
    let (dc, dp) = ProjectionObjective::<T>::steps(settings);
    let m = nelder_mead(|x| obj.eval(x[0], x[1]), &[chi0, psi0], &[dc, dp], &settings.simplex);
    if m.value < v0 - settings.tie_tol {
        Ok(obj.finish(m.x[0], m.x[1], m.value, v0))
    } else {
        Ok(obj.finish(chi0, psi0, v0, v0))
    }
}

/// Repeats the refinement from `starts` randomly oriented simplices around
/// the coarse optimum.
pub fn optimize_projection_multistart<T: Real>(
    moments: &ProjectionMoments<T>,
    conv: Option<&ConvolvedZero<T>>,
    objective: Objective,
    settings: &OptimizerSettings<T>,
    seed: u64,
    starts: usize,
) -> Result<Vec<OptimizedOutput<T>>> {
    let obj = ProjectionObjective {
        moments,
        conv,
        objective,
    };
    let (chi0, psi0, v0) = obj.coarse(settings)?;
    let (dc, dp) = ProjectionObjective::<T>::steps(settings);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(starts);
    for _ in 0..starts {
        let simplex: Vec<Vec<T>> = (0..3)
            .map(|_| {
                let a: f64 = rng.gen_range(-1.0..1.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                vec![chi0 + dc * T::lit(a), psi0 + dp * T::lit(b)]
            })
            .collect();
        let m = nelder_mead_simplex(|x| obj.eval(x[0], x[1]), simplex, &settings.simplex);
        out.push(if m.value < v0 - settings.tie_tol {
            obj.finish(m.x[0], m.x[1], m.value, v0)
        } else {
            obj.finish(chi0, psi0, v0, v0)
        });
    }
    Ok(out)
}

/// Best output projection for linear input polarization `theta_in`.
pub fn optimize_output<T: Real>(
    params: &SystemParams<T>,
    theta_in: T,
    objective: Objective,
    settings: &SolverSettings<T>,
    opt: &OptimizerSettings<T>,
) -> Result<OptimizedOutput<T>> {
    let sol = SteadySolution::solve(&with_input_polarization(params, theta_in), settings)?;
    let conv = match objective {
        Objective::BareG2 => None,
        Objective::ConvolvedG2 => Some(sol.detector_response(settings)?),
    };
    optimize_projection(&sol.moments, conv.as_ref(), objective, opt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightnessRow<T> {
    pub splitting_ghz: T,
    pub theta_in_deg: T,
    /// ⟨n_out⟩ at the optimized projection.
    pub mean_n_out: T,
    pub g2_bare: T,
    pub chi: T,
    pub psi: T,
    /// ⟨n_out⟩ detected orthogonally to the input polarization.
    pub cross_polarized_n: T,
    pub status: PointStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightnessTable<T> {
    pub rows: Vec<BrightnessRow<T>>,
}

impl<T: Real> BrightnessTable<T> {
    /// Rows of one splitting in input-angle order.
    pub fn curve(&self, splitting_ghz: T) -> Vec<BrightnessRow<T>> {
        self.rows
            .iter()
            .filter(|r| (r.splitting_ghz - splitting_ghz).abs() <= T::lit(1e-9))
            .copied()
            .collect()
    }

    /// `⟨n_out⟩(θ_a)/⟨n_out⟩(θ_b)` on one curve.
    pub fn enhancement(&self, splitting_ghz: T, theta_a_deg: T, theta_b_deg: T) -> Option<T> {
        let c = self.curve(splitting_ghz);
        let find = |t: T| {
            c.iter()
                .find(|r| (r.theta_in_deg - t).abs() <= T::lit(1e-9) && r.status == PointStatus::Ok)
                .map(|r| r.mean_n_out)
        };
        Some(find(theta_a_deg)? / find(theta_b_deg)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("splitting_ghz,theta_in_deg,mean_n_out,g2_bare,chi_rad,psi_rad,cross_polarized_n,status\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.splitting_ghz,
                r.theta_in_deg,
                r.mean_n_out,
                r.g2_bare,
                r.chi,
                r.psi,
                r.cross_polarized_n,
                r.status.as_str()
            );
        }
        s
    }
}

/// Optimized output brightness versus input polarization for each cavity
/// splitting (GHz), at constant total drive.
pub fn brightness_curve<T: Real>(
    params: &SystemParams<T>,
    theta_in_grid: &[T],
    splittings_ghz: &[T],
    settings: &SolverSettings<T>,
    opt: &OptimizerSettings<T>,
) -> Result<BrightnessTable<T>> {
    check_grid("theta_in", theta_in_grid)?;
    check_grid("splitting", splittings_ghz)?;
    let jobs: Vec<(T, T)> = splittings_ghz
        .iter()
        .flat_map(|&s| theta_in_grid.iter().map(move |&t| (s, t)))
        .collect();
    let pool = settings.pool()?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(split, theta)| {
                let base = params.with_cavity_splitting(crate::model::ghz_to_rad_per_ns(split));
                let p = with_input_polarization(&base, theta);
                let mut row = BrightnessRow {
                    splitting_ghz: split,
                    theta_in_deg: theta.to_degrees(),
                    mean_n_out: T::nan(),
                    g2_bare: T::nan(),
                    chi: T::nan(),
                    psi: T::nan(),
                    cross_polarized_n: T::nan(),
                    status: PointStatus::SolverFailed,
                };
                let sol = match SteadySolution::solve(&p, settings) {
                    Ok(s) => s,
                    Err(_) => return row,
                };
                row.cross_polarized_n = sol
                    .moments
                    .mean_photons(&OutputProjection::linear(theta + T::FRAC_PI_2()));
                match optimize_projection(&sol.moments, None, Objective::BareG2, opt) {
                    Ok(o) => {
                        row.mean_n_out = o.mean_n;
                        row.g2_bare = o.g2_bare;
                        row.chi = o.chi;
                        row.psi = o.psi;
                        row.status = PointStatus::Ok;
                    }
                    Err(Error::NoFeasibleOutput) => row.status = PointStatus::LowIntensity,
                    Err(_) => {}
                }
                row
            })
            .collect()
    });
    Ok(BrightnessTable { rows })
}

/// Named operating points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArrowPreset {
    /// H drive, V detection.
    #[serde(rename = "arrow-A")]
    A,
    /// 45° drive, best linear detection.
    #[serde(rename = "arrow-B")]
    B,
    /// Bunching maximum of the waveplate map.
    #[serde(rename = "arrow-C")]
    C,
    /// Antibunching minimum of the waveplate map.
    #[serde(rename = "arrow-D")]
    D,
}

impl ArrowPreset {
    pub const ALL: [ArrowPreset; 4] = [ArrowPreset::A, ArrowPreset::B, ArrowPreset::C, ArrowPreset::D];

    pub fn name(self) -> &'static str {
        match self {
            ArrowPreset::A => "arrow-A",
            ArrowPreset::B => "arrow-B",
            ArrowPreset::C => "arrow-C",
            ArrowPreset::D => "arrow-D",
        }
    }
}

impl FromStr for ArrowPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ArrowPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter {
                field: "preset",
                reason: format!("unknown preset '{s}'"),
            })
    }
}

/// Input polarization and detected mode of an operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint<T> {
    pub preset: ArrowPreset,
    pub theta_in: T,
    pub projection: OutputProjection<T>,
    /// Linear detection angle, when defined by one.
    pub theta_out: Option<T>,
    /// Plate angles, when defined by a waveplate setting.
    pub hwp: Option<T>,
    pub qwp: Option<T>,
    pub mean_n: T,
    pub g2_bare: T,
}

/// Resolves a preset for the given parameters. C and D come from the
/// waveplate map of `scan`: C is its largest valid `g²(0)`, D its smallest,
/// refined by a simplex search over the plate angles.
pub fn resolve_preset<T: Real>(
    preset: ArrowPreset,
    params: &SystemParams<T>,
    scan: &WaveplateScan<T>,
    settings: &SolverSettings<T>,
) -> Result<OperatingPoint<T>> {
    let theta_in = match preset {
        ArrowPreset::A => T::zero(),
        ArrowPreset::B => T::FRAC_PI_4(),
        ArrowPreset::C | ArrowPreset::D => scan.theta_in,
    };
    let sol = SteadySolution::solve(&with_input_polarization(params, theta_in), settings)?;
    let m = &sol.moments;
    let point = |projection: OutputProjection<T>, theta_out, hwp, qwp| {
        let (mean_n, g2_bare) = m.intensity_and_g2(&projection);
        OperatingPoint {
            preset,
            theta_in,
            projection,
            theta_out,
            hwp,
            qwp,
            mean_n,
            g2_bare,
        }
    };
    match preset {
        ArrowPreset::A => {
            let t = T::FRAC_PI_2();
            Ok(point(OutputProjection::linear(t), Some(t), None, None))
        }
        ArrowPreset::B => {
            let grid: Vec<T> = default_angle_grid(720);
            let f = |t: T| m.intensity_and_g2(&OutputProjection::linear(t)).1;
            let (t0, v0) = grid
                .iter()
                .map(|&t| (t, f(t)))
                .filter(|(_, v)| v.is_finite())
                .fold((T::nan(), T::infinity()), |b, x| if x.1 < b.1 { x } else { b });
            if !v0.is_finite() {
                return Err(Error::NoFeasibleOutput);
            }
            let r = nelder_mead(|x| f(x[0]), &[t0], &[T::PI() / T::lit(720.0)], &NelderMeadOptions::default());
            let t = if r.value < v0 { r.x[0] } else { t0 };
            Ok(point(OutputProjection::linear(t), Some(t), None, None))
        }
        ArrowPreset::C | ArrowPreset::D => {
            let grid = SweepGrid {
                axes: vec![
                    GridAxis::degrees("hwp", &scan.hwp_grid),
                    GridAxis::degrees("qwp", &scan.qwp_grid),
                ],
                records: scan
                    .hwp_grid
                    .iter()
                    .flat_map(|&h| {
                        scan.qwp_grid
                            .iter()
                            .map(move |&q| PointRecord::evaluate(m, DetectorColumn::Skipped, &scan.analyzer.projection(h, q)))
                    })
                    .collect(),
            };
            let k = if preset == ArrowPreset::C {
                grid.argmax_g2()
            } else {
                grid.argmin_g2()
            }
            .ok_or(Error::NoFeasibleOutput)?;
            let (i, j) = grid.coords(k);
            let (mut h, mut q) = (scan.hwp_grid[i], scan.qwp_grid[j]);
            if preset == ArrowPreset::D {
                let f = |x: &[T]| m.intensity_and_g2(&scan.analyzer.projection(x[0], x[1])).1;
                let v0 = grid.records[k].g2_bare;
                let step = T::PI() / T::from_count(scan.hwp_grid.len().max(scan.qwp_grid.len()).max(2));
                let r = nelder_mead(f, &[h, q], &[step, step], &NelderMeadOptions::default());
                if r.value < v0 {
                    h = r.x[0];
                    q = r.x[1];
                }
            }
            Ok(point(scan.analyzer.projection(h, q), None, Some(h), Some(q)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SolverSettings<f64> {
        SolverSettings {
            n_max: 3,
            workers: 1,
            ..SolverSettings::default()
        }
    }

    /// Uncoupled dot and a drive weak enough that three photons bound the
    /// truncation error well below the test tolerances.
    fn uncoupled_weak() -> SystemParams<f64> {
        let mut p = SystemParams::<f64>::reference_defaults();
        p.g = 0.0;
        let eta = SystemParams::eta_total_for_input_photons(p.kappa_mean(), 1e-4);
        p.with_drive(eta, 0.0, 0.0)
    }

    #[test]
    fn status_strings() {
        assert_eq!(PointStatus::Ok.as_str(), "ok");
        assert_eq!(PointStatus::LowIntensity.as_str(), "low_intensity");
        assert_eq!(PointStatus::SolverFailed.as_str(), "solver_failed");
        assert_eq!(serde_json::to_string(&PointStatus::LowIntensity).unwrap(), "\"low_intensity\"");
    }

    #[test]
    fn preset_names_round_trip() {
        for p in ArrowPreset::ALL {
            assert_eq!(p.name().parse::<ArrowPreset>().unwrap(), p);
        }
        assert!("arrow-E".parse::<ArrowPreset>().is_err());
    }

    #[test]
    fn empty_grid_is_rejected() {
        let p = SystemParams::<f64>::reference_defaults();
        assert!(sweep_linear(&p, &[], &[0.0], &quick()).is_err());
    }

    #[test]
    fn coherent_light_is_flat() {
        let p = uncoupled_weak();
        let grid = [0.0, 0.4, 1.1];
        let out = sweep_linear(&p, &grid, &grid, &quick()).unwrap();
        assert_eq!(out.records.len(), 9);
        for i in 0..3 {
            let r = out.get(i, i);
            assert_eq!(r.status, PointStatus::Ok);
            assert!((r.g2_bare - 1.0).abs() < 1e-6, "{}", r.g2_bare);
            assert!((r.g2_convolved - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn dark_port_is_flagged() {
        // g = 0, H drive, V detection: no light at all
        let mut p = SystemParams::<f64>::reference_defaults();
        p.g = 0.0;
        let out = sweep_linear(&p, &[0.0], &[std::f64::consts::FRAC_PI_2], &quick()).unwrap();
        let r = out.records[0];
        assert_eq!(r.status, PointStatus::LowIntensity);
        assert!(r.g2_bare.is_nan());
        assert!(out.to_csv().contains("low_intensity"));
    }

    #[test]
    fn csv_layout() {
        let grid = SweepGrid {
            axes: vec![GridAxis::degrees("a", &[0.0f64]), GridAxis::degrees("b", &[0.0, std::f64::consts::PI])],
            records: vec![PointRecord::failed(); 2],
        };
        let csv = grid.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("a_deg,b_deg,mean_n_out,g2_bare,g2_convolved,status"));
        assert_eq!(lines.next(), Some("0,0,NaN,NaN,NaN,solver_failed"));
        assert_eq!(lines.next(), Some("0,180,NaN,NaN,NaN,solver_failed"));
    }

    #[test]
    fn coherent_optimizer_prefers_zero_phase() {
        let p = uncoupled_weak();
        let o = optimize_output(&p, 0.3, Objective::BareG2, &quick(), &OptimizerSettings::default()).unwrap();
        assert!((o.value - 1.0).abs() < 1e-6);
        assert_eq!(o.psi, 0.0);
    }

    #[test]
    fn angle_grid_is_half_open() {
        let g: Vec<f64> = default_angle_grid(4);
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 0.0);
        assert!((g[3] - 0.75 * std::f64::consts::PI).abs() < 1e-15);
    }
}
