//! Run configuration: a TOML file in laboratory units (GHz, degrees, ps),
//! optionally patched by `key.path=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use upblock::dynamics::DetectorKernel;
use upblock::model::ghz_to_rad_per_ns;
use upblock::optimize::NelderMeadOptions;
use upblock::polarization::{Axis, PlateOrder};
use upblock::sweep::{Analyzer, ArrowPreset, OptimizerSettings, WaveplateScan};
use upblock::{SolverSettings, SystemParams};

use crate::CliError;

/// Physical parameters. Frequencies and rates are ordinary frequencies
/// (ω/2π) in GHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub laser_ghz: f64,
    pub cavity_h_ghz: f64,
    pub cavity_v_ghz: f64,
    pub qd_ghz: f64,
    pub g_ghz: f64,
    /// Dipole angle from the V cavity axis.
    pub dipole_angle_deg: f64,
    pub kappa_h_ghz: f64,
    pub kappa_v_ghz: f64,
    pub gamma_par_ghz: f64,
    pub gamma_star_ghz: f64,
    pub purcell_factor: f64,
    /// ⟨n_in⟩ = ((η_H + η_V)/κ)² of a 45° input; fixes the total drive.
    pub input_photons: f64,
    /// Linear input polarization used by single-state commands.
    pub theta_in_deg: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            laser_ghz: 0.0,
            cavity_h_ghz: 5.0,
            cavity_v_ghz: -5.0,
            qd_ghz: 0.0,
            g_ghz: 12.0,
            dipole_angle_deg: 94.0,
            kappa_h_ghz: 40.0,
            kappa_v_ghz: 40.0,
            gamma_par_ghz: 1.0,
            gamma_star_ghz: 1.0,
            purcell_factor: 11.2,
            input_photons: 0.06,
            theta_in_deg: 45.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub n_max: usize,
    /// Detector timing jitter, FWHM.
    pub detector_fwhm_ps: f64,
    pub kernel: DetectorKernel,
    pub tau_points: usize,
    /// 0 uses every available core.
    pub workers: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            n_max: 3,
            detector_fwhm_ps: 530.0,
            kernel: DetectorKernel::Gaussian,
            tau_points: 2048,
            workers: 0,
        }
    }
}

/// Detected mode for `g2zero` and `g2tau`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OutputSelection {
    /// Projection minimizing the bare g²(0).
    #[default]
    Optimized,
    Linear { theta_out_deg: f64 },
    Waveplates { hwp_deg: f64, qwp_deg: f64 },
    /// Named operating point; sets its own input polarization.
    Preset { preset: ArrowPreset },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Section {
    /// Samples per axis over [0°, 180°).
    pub points: usize,
    pub splitting_ghz: f64,
}

impl Default for Fig2Section {
    fn default() -> Self {
        Self {
            points: 121,
            splitting_ghz: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Section {
    pub theta_in_deg: f64,
    pub hwp_points: usize,
    pub qwp_points: usize,
    pub polarizer: Axis,
    pub plate_order: PlateOrder,
}

impl Default for Fig3Section {
    fn default() -> Self {
        Self {
            theta_in_deg: 45.0,
            hwp_points: 121,
            qwp_points: 121,
            polarizer: Axis::H,
            plate_order: PlateOrder::HwpThenQwp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrightnessSection {
    /// Input angles, evenly spaced over [0°, theta_max_deg].
    pub theta_points: usize,
    pub theta_max_deg: f64,
    pub splittings_ghz: Vec<f64>,
}

impl Default for BrightnessSection {
    fn default() -> Self {
        Self {
            theta_points: 19,
            theta_max_deg: 90.0,
            splittings_ghz: vec![0.0, 10.0, 20.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub chi_points: usize,
    pub psi_points: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evals: usize,
    /// Random restarts reported alongside an optimized projection.
    pub restarts: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            chi_points: 64,
            psi_points: 64,
            f_tol: 1e-6,
            x_tol: 1e-6,
            max_evals: 4000,
            restarts: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Seed of the optimizer restarts.
    pub seed: u64,
    pub system: SystemSection,
    pub solver: SolverSection,
    pub output: OutputSelection,
    pub fig2: Fig2Section,
    pub fig3: Fig3Section,
    pub brightness: BrightnessSection,
    pub optimizer: OptimizerSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            seed: 0,
            system: SystemSection::default(),
            solver: SolverSection::default(),
            output: OutputSelection::default(),
            fig2: Fig2Section::default(),
            fig3: Fig3Section::default(),
            brightness: BrightnessSection::default(),
            optimizer: OptimizerSection::default(),
        }
    }
}

fn config_error(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `a.b.c=value` to a parsed document.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error(assignment, "override must have the form key=value"))?;
    let key = key.trim();
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_error(key, "empty key segment"));
    }
    let mut table = doc;
    for seg in &path[..path.len() - 1] {
        let entry = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_error(key, format!("`{seg}` is not a table")))?;
    }
    table.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Reads `path` (defaults when `None`), applies overrides in order and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_table(doc)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let doc = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_table(doc)
    }

    fn from_table(doc: toml::Table) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.system;
        if !(s.input_photons >= 0.0 && s.input_photons.is_finite()) {
            return Err(config_error("system.input_photons", "must be finite and non-negative"));
        }
        for (field, v) in [
            ("system.theta_in_deg", s.theta_in_deg),
            ("fig3.theta_in_deg", self.fig3.theta_in_deg),
            ("fig2.splitting_ghz", self.fig2.splitting_ghz),
            ("brightness.theta_max_deg", self.brightness.theta_max_deg),
        ] {
            if !v.is_finite() {
                return Err(config_error(field, "must be finite"));
            }
        }
        for (field, v) in [
            ("system.laser_ghz", s.laser_ghz),
            ("system.cavity_h_ghz", s.cavity_h_ghz),
            ("system.cavity_v_ghz", s.cavity_v_ghz),
            ("system.qd_ghz", s.qd_ghz),
            ("system.dipole_angle_deg", s.dipole_angle_deg),
            ("system.purcell_factor", s.purcell_factor),
        ] {
            if !v.is_finite() {
                return Err(config_error(field, format!("must be finite, got {v}")));
            }
        }
        for (field, v) in [
            ("system.g_ghz", s.g_ghz),
            ("system.gamma_par_ghz", s.gamma_par_ghz),
            ("system.gamma_star_ghz", s.gamma_star_ghz),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(config_error(field, format!("must be finite and non-negative, got {v}")));
            }
        }
        for (field, v) in [("system.kappa_h_ghz", s.kappa_h_ghz), ("system.kappa_v_ghz", s.kappa_v_ghz)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_error(field, format!("must be finite and positive, got {v}")));
            }
        }
        if let Err(upblock::Error::InvalidParameter { field, reason }) = self.params().validate() {
            return Err(config_error(system_key(field), reason));
        }
        if self.solver.n_max < 1 {
            return Err(config_error("solver.n_max", "must be at least 1"));
        }
        if !(self.solver.detector_fwhm_ps >= 0.0 && self.solver.detector_fwhm_ps.is_finite()) {
            return Err(config_error("solver.detector_fwhm_ps", "must be finite and non-negative"));
        }
        if self.solver.tau_points < 2 {
            return Err(config_error("solver.tau_points", "must be at least 2"));
        }
        for (field, n) in [
            ("fig2.points", self.fig2.points),
            ("fig3.hwp_points", self.fig3.hwp_points),
            ("fig3.qwp_points", self.fig3.qwp_points),
            ("brightness.theta_points", self.brightness.theta_points),
            ("optimizer.psi_points", self.optimizer.psi_points),
        ] {
            if n < 1 {
                return Err(config_error(field, "must be at least 1"));
            }
        }
        if self.optimizer.chi_points < 2 {
            return Err(config_error("optimizer.chi_points", "must be at least 2"));
        }
        if self.brightness.splittings_ghz.is_empty() || self.brightness.splittings_ghz.iter().any(|x| !x.is_finite()) {
            return Err(config_error("brightness.splittings_ghz", "must be a non-empty list of finite values"));
        }
        match self.output {
            OutputSelection::Linear { theta_out_deg } if !theta_out_deg.is_finite() => {
                Err(config_error("output.theta_out_deg", "must be finite"))
            }
            OutputSelection::Waveplates { hwp_deg, qwp_deg } if !(hwp_deg.is_finite() && qwp_deg.is_finite()) => {
                Err(config_error("output", "plate angles must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Model parameters in rad/ns with the drive split for
    /// `system.theta_in_deg`.
    pub fn params(&self) -> SystemParams {
        let s = &self.system;
        let mut p = SystemParams::reference_defaults();
        p.omega_l = ghz_to_rad_per_ns(s.laser_ghz);
        p.omega_c_h = ghz_to_rad_per_ns(s.cavity_h_ghz);
        p.omega_c_v = ghz_to_rad_per_ns(s.cavity_v_ghz);
        p.omega_qd = ghz_to_rad_per_ns(s.qd_ghz);
        p.g = ghz_to_rad_per_ns(s.g_ghz);
        p.phi = s.dipole_angle_deg.to_radians();
        p.kappa_h = ghz_to_rad_per_ns(s.kappa_h_ghz);
        p.kappa_v = ghz_to_rad_per_ns(s.kappa_v_ghz);
        p.gamma_par = ghz_to_rad_per_ns(s.gamma_par_ghz);
        p.gamma_star = ghz_to_rad_per_ns(s.gamma_star_ghz);
        p.purcell_f_p = s.purcell_factor;
        let eta = SystemParams::eta_total_for_input_photons(p.kappa_mean(), s.input_photons);
        let p = p.with_drive(eta, 0.0, 0.0);
        upblock::sweep::with_input_polarization(&p, s.theta_in_deg.to_radians())
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            n_max: self.solver.n_max,
            detector_fwhm: self.solver.detector_fwhm_ps * 1e-3,
            kernel: self.solver.kernel,
            tau_points: self.solver.tau_points,
            workers: self.solver.workers,
            ..SolverSettings::default()
        }
    }

    pub fn optimizer_settings(&self) -> OptimizerSettings<f64> {
        OptimizerSettings {
            chi_points: self.optimizer.chi_points,
            psi_points: self.optimizer.psi_points,
            simplex: NelderMeadOptions {
                f_tol: self.optimizer.f_tol,
                x_tol: self.optimizer.x_tol,
                max_evals: self.optimizer.max_evals,
            },
            ..OptimizerSettings::default()
        }
    }

    pub fn waveplate_scan(&self) -> WaveplateScan<f64> {
        WaveplateScan {
            theta_in: self.fig3.theta_in_deg.to_radians(),
            hwp_grid: upblock::sweep::default_angle_grid(self.fig3.hwp_points),
            qwp_grid: upblock::sweep::default_angle_grid(self.fig3.qwp_points),
            analyzer: Analyzer {
                axis: self.fig3.polarizer,
                order: self.fig3.plate_order,
            },
        }
    }
}

/// Config key of a model parameter field.
fn system_key(field: &str) -> &'static str {
    match field {
        "omega_l" => "system.laser_ghz",
        "omega_c_h" => "system.cavity_h_ghz",
        "omega_c_v" => "system.cavity_v_ghz",
        "omega_qd" => "system.qd_ghz",
        "g" => "system.g_ghz",
        "phi" => "system.dipole_angle_deg",
        "eta_h" | "eta_v" | "drive_phase_v" => "system.input_photons",
        "kappa_h" => "system.kappa_h_ghz",
        "kappa_v" => "system.kappa_v_ghz",
        "gamma_par" => "system.gamma_par_ghz",
        "gamma_star" => "system.gamma_star_ghz",
        "purcell_f_p" => "system.purcell_factor",
        _ => "system",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_model_preset() {
        let p = RunConfig::default().params();
        let q = SystemParams::reference_defaults();
        for (a, b) in [
            (p.g, q.g),
            (p.kappa_h, q.kappa_h),
            (p.omega_c_h, q.omega_c_h),
            (p.omega_c_v, q.omega_c_v),
            (p.eta_h, q.eta_h),
            (p.eta_v, q.eta_v),
            (p.phi, q.phi),
            (p.gamma_star, q.gamma_star),
        ] {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!((p.mean_input_photons() - 0.06).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.output = OutputSelection::Preset { preset: ArrowPreset::D };
        cfg.system.g_ghz = 7.25;
        cfg.brightness.splittings_ghz = vec![0.0, 2.5];
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.to_toml_string().unwrap(), text);
    }

    #[test]
    fn overrides_set_nested_values() {
        let mut doc = toml::Table::new();
        apply_override(&mut doc, "solver.n_max=4").unwrap();
        apply_override(&mut doc, "output={kind=\"linear\", theta_out_deg=90}").unwrap();
        apply_override(&mut doc, "output_dir=results/run1").unwrap();
        let cfg = RunConfig::from_table(doc).unwrap();
        assert_eq!(cfg.solver.n_max, 4);
        assert_eq!(cfg.output, OutputSelection::Linear { theta_out_deg: 90.0 });
        assert_eq!(cfg.output_dir, PathBuf::from("results/run1"));
    }

    #[test]
    fn invalid_fields_are_named() {
        let err = RunConfig::load(None, &["system.kappa_v_ghz=-1".into()]).unwrap_err();
        assert!(err.to_string().contains("system.kappa_v_ghz"), "{err}");
        let err = RunConfig::load(None, &["solver.n_max=0".into()]).unwrap_err();
        assert!(err.to_string().contains("solver.n_max"), "{err}");
        let err = RunConfig::load(None, &["system.bogus=1".into()]).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(RunConfig::load(None, &["novalue".into()]).is_err());
    }
}
