//! Subcommand implementations. Each returns the files it wrote.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::{json, Value};
use upblock::dynamics::{convolve_detector, curves_to_csv, g2_tau, CorrelationCurve};
use upblock::hilbert::Ladder;
use upblock::model::ghz_to_rad_per_ns;
use upblock::observables::{
    displaced_squeezed_fock_probs, number_variance, photon_distribution, poisson_probs, squeezing_db,
    two_photon_amplitude_approx, OutputStatistics, PhotonDistribution, SqueezeSpec,
};
use upblock::sweep::{
    brightness_curve, default_angle_grid, optimize_projection, optimize_projection_multistart, resolve_preset,
    sweep_linear, sweep_waveplates, with_input_polarization, ArrowPreset, Objective, OperatingPoint,
};
use upblock::{OutputProjection, SteadySolution, SweepGrid};

use crate::artifacts::ArtifactWriter;
use crate::config::{OutputSelection, RunConfig};
use crate::CliError;

/// Detected mode chosen for a single-state command.
struct Selection {
    label: String,
    theta_in: f64,
    projection: OutputProjection,
    detail: Value,
}

fn select_output(cfg: &RunConfig) -> Result<Selection, CliError> {
    let settings = cfg.solver_settings();
    let theta_in = cfg.system.theta_in_deg.to_radians();
    match &cfg.output {
        OutputSelection::Optimized => {
            let sol = SteadySolution::solve(&cfg.params(), &settings)?;
            let opt = cfg.optimizer_settings();
            let best = optimize_projection(&sol.moments, None, Objective::BareG2, &opt)?;
            let restarts = optimize_projection_multistart(
                &sol.moments,
                None,
                Objective::BareG2,
                &opt,
                cfg.seed,
                cfg.optimizer.restarts,
            )?;
            let spread = restarts
                .iter()
                .map(|r| (r.value - best.value).abs())
                .fold(0.0, f64::max);
            Ok(Selection {
                label: "optimized".into(),
                theta_in,
                projection: best.projection,
                detail: json!({
                    "chi_rad": best.chi,
                    "psi_rad": best.psi,
                    "coarse_value": best.coarse_value,
                    "restart_values": restarts.iter().map(|r| r.value).collect::<Vec<_>>(),
                    "restart_spread": spread,
                }),
            })
        }
        OutputSelection::Linear { theta_out_deg } => Ok(Selection {
            label: format!("linear-{theta_out_deg}"),
            theta_in,
            projection: OutputProjection::linear(theta_out_deg.to_radians()),
            detail: json!({ "theta_out_deg": theta_out_deg }),
        }),
        OutputSelection::Waveplates { hwp_deg, qwp_deg } => {
            let scan = cfg.waveplate_scan();
            Ok(Selection {
                label: format!("plates-{hwp_deg}-{qwp_deg}"),
                theta_in,
                projection: scan.analyzer.projection(hwp_deg.to_radians(), qwp_deg.to_radians()),
                detail: json!({ "hwp_deg": hwp_deg, "qwp_deg": qwp_deg }),
            })
        }
        OutputSelection::Preset { preset } => {
            let point = resolve_preset(*preset, &cfg.params(), &cfg.waveplate_scan(), &settings)?;
            Ok(Selection {
                label: preset.name().into(),
                theta_in: point.theta_in,
                projection: point.projection,
                detail: operating_point_json(&point),
            })
        }
    }
}

fn operating_point_json(p: &OperatingPoint<f64>) -> Value {
    json!({
        "preset": p.preset,
        "theta_in_deg": p.theta_in.to_degrees(),
        "theta_out_deg": p.theta_out.map(f64::to_degrees),
        "hwp_deg": p.hwp.map(f64::to_degrees),
        "qwp_deg": p.qwp.map(f64::to_degrees),
        "projection": p.projection,
        "mean_n_out": p.mean_n,
        "g2_bare": p.g2_bare,
    })
}

fn solve_at(cfg: &RunConfig, theta_in: f64) -> Result<SteadySolution, CliError> {
    Ok(SteadySolution::solve(
        &with_input_polarization(&cfg.params(), theta_in),
        &cfg.solver_settings(),
    )?)
}

/// Mean photon numbers and amplitudes of the steady state.
pub fn steady(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sol = solve_at(cfg, cfg.system.theta_in_deg.to_radians())?;
    let ladder = Ladder::new(sol.layout);
    let n = |op: &upblock::Operator| sol.rho.expect(&(&op.adjoint() * op)).re;
    let amp = |op: &upblock::Operator| {
        let z = sol.rho.expect(op);
        [z.re, z.im]
    };
    let result = json!({
        "theta_in_deg": cfg.system.theta_in_deg,
        "n_max": cfg.solver.n_max,
        "mean_photons_h": n(&ladder.a_h),
        "mean_photons_v": n(&ladder.a_v),
        "qd_excited_population": n(&ladder.sigma),
        "amplitude_h": amp(&ladder.a_h),
        "amplitude_v": amp(&ladder.a_v),
        "qd_coherence": amp(&ladder.sigma),
        "input_photons": sol.params.mean_input_photons(),
        "min_eigenvalue": sol.rho.min_eigenvalue()?,
    });
    println!("{}", serde_json::to_string_pretty(&result).unwrap_or_default());
    let mut w = ArtifactWriter::new("steady", cfg)?;
    w.json("steady.json", result)?;
    Ok(w.written().to_vec())
}

/// Bare and detector-convolved g²(0) of the selected output mode.
pub fn g2zero(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sel = select_output(cfg)?;
    let settings = cfg.solver_settings();
    let sol = solve_at(cfg, sel.theta_in)?;
    let (mean_n, g2_bare) = sol.moments.intensity_and_g2(&sel.projection);
    let g2_convolved = sol.detector_response(&settings)?.g2(&sel.projection);
    let result = json!({
        "output": sel.label,
        "theta_in_deg": sel.theta_in.to_degrees(),
        "projection": sel.projection,
        "mean_n_out": mean_n,
        "g2_bare": g2_bare,
        "g2_convolved": g2_convolved,
        "selection": sel.detail,
    });
    println!(
        "{}: <n_out> = {mean_n:.6e}, g2(0) bare = {g2_bare:.6}, convolved = {g2_convolved:.6}",
        sel.label
    );
    let mut w = ArtifactWriter::new("g2zero", cfg)?;
    w.json("g2zero.json", result)?;
    Ok(w.written().to_vec())
}

fn curve_pair(
    cfg: &RunConfig,
    theta_in: f64,
    c: &OutputProjection,
) -> Result<(CorrelationCurve<f64>, CorrelationCurve<f64>), CliError> {
    let settings = cfg.solver_settings();
    let sol = solve_at(cfg, theta_in)?;
    let bare = g2_tau(&sol.liouvillian, &sol.rho, c, &sol.tau_grid(&settings))?;
    let conv = convolve_detector(&bare, settings.detector_fwhm, settings.kernel)?;
    Ok((bare, conv))
}

fn curve_summary(bare: &CorrelationCurve<f64>, conv: &CorrelationCurve<f64>) -> Value {
    json!({
        "mean_n_out": bare.mean_n,
        "g2_bare_at_zero": bare.at_zero(),
        "g2_convolved_at_zero": conv.at_zero(),
        "g2_bare_min": bare.min(),
        "g2_convolved_min": conv.min(),
        "g2_bare_max": bare.max(),
        "g2_convolved_max": conv.max(),
        "points": bare.len(),
    })
}

/// g²(τ) of the selected output mode, bare and convolved.
pub fn g2tau(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sel = select_output(cfg)?;
    let (bare, conv) = curve_pair(cfg, sel.theta_in, &sel.projection)?;
    let mut summary = curve_summary(&bare, &conv);
    summary["output"] = json!(sel.label);
    summary["selection"] = sel.detail;
    println!(
        "{}: g2 min bare {:.6}, convolved {:.6}",
        sel.label,
        bare.min(),
        conv.min()
    );
    let name = match cfg.output {
        OutputSelection::Preset { preset } => format!("g2tau_{}.csv", preset.name()),
        _ => "g2tau.csv".to_string(),
    };
    let mut w = ArtifactWriter::new("g2tau", cfg)?;
    w.csv(&name, &curves_to_csv(&bare, &conv), summary)?;
    Ok(w.written().to_vec())
}

fn grid_summary(grid: &SweepGrid) -> Value {
    let extreme = |k: Option<usize>| {
        k.map(|k| {
            let (i, j) = grid.coords(k);
            let mut m = serde_json::Map::new();
            for (axis, idx) in grid.axes.iter().zip([i, j]) {
                m.insert(format!("{}_{}", axis.name, axis.unit), json!(axis.samples[idx]));
            }
            m.insert("g2_bare".into(), json!(grid.records[k].g2_bare));
            m.insert("mean_n_out".into(), json!(grid.records[k].mean_n_out));
            Value::Object(m)
        })
    };
    let failed = grid
        .records
        .iter()
        .filter(|r| r.status != upblock::sweep::PointStatus::Ok)
        .count();
    json!({
        "shape": grid.shape(),
        "non_ok_points": failed,
        "g2_min": extreme(grid.argmin_g2()),
        "g2_max": extreme(grid.argmax_g2()),
    })
}

/// g²(0) versus linear input and detected polarization.
pub fn fig2(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let base = cfg.params().with_cavity_splitting(ghz_to_rad_per_ns(cfg.fig2.splitting_ghz));
    let grid = default_angle_grid(cfg.fig2.points);
    let map = sweep_linear(&base, &grid, &grid, &cfg.solver_settings())?;
    let mut summary = grid_summary(&map);
    summary["splitting_ghz"] = json!(cfg.fig2.splitting_ghz);
    println!("fig2: {} x {} points", grid.len(), grid.len());
    let mut w = ArtifactWriter::new("fig2", cfg)?;
    w.csv("fig2.csv", &map.to_csv(), summary)?;
    Ok(w.written().to_vec())
}

/// Waveplate maps of intensity and g²(0), plus g²(τ) at the bunching
/// maximum and antibunching minimum.
pub fn fig3(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.params();
    let settings = cfg.solver_settings();
    let scan = cfg.waveplate_scan();
    let map = sweep_waveplates(&params, &scan, &settings, true)?;
    let summary = grid_summary(&map);
    let mut w = ArtifactWriter::new("fig3", cfg)?;
    w.csv("fig3_n_out.csv", &map.intensity_csv(), summary.clone())?;
    w.csv("fig3_g2.csv", &map.g2_csv(), summary)?;
    for (preset, name) in [(ArrowPreset::C, "fig3_g2tau_C.csv"), (ArrowPreset::D, "fig3_g2tau_D.csv")] {
        let point = resolve_preset(preset, &params, &scan, &settings)?;
        let (bare, conv) = curve_pair(cfg, point.theta_in, &point.projection)?;
        let mut s = curve_summary(&bare, &conv);
        s["operating_point"] = operating_point_json(&point);
        println!(
            "{}: hwp {:.2} deg, qwp {:.2} deg, g2(0) bare {:.4}, convolved {:.4}",
            preset.name(),
            point.hwp.unwrap_or(f64::NAN).to_degrees(),
            point.qwp.unwrap_or(f64::NAN).to_degrees(),
            bare.at_zero(),
            conv.at_zero()
        );
        w.csv(name, &curves_to_csv(&bare, &conv), s)?;
    }
    Ok(w.written().to_vec())
}

/// Optimized output brightness versus input polarization per splitting.
pub fn brightness(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let b = &cfg.brightness;
    let thetas: Vec<f64> = if b.theta_points == 1 {
        vec![0.0]
    } else {
        (0..b.theta_points)
            .map(|k| (b.theta_max_deg * k as f64 / (b.theta_points - 1) as f64).to_radians())
            .collect()
    };
    let table = brightness_curve(
        &cfg.params(),
        &thetas,
        &b.splittings_ghz,
        &cfg.solver_settings(),
        &cfg.optimizer_settings(),
    )?;
    let enhancement: Vec<Value> = b
        .splittings_ghz
        .iter()
        .map(|&s| {
            let e = table.enhancement(s, 45.0, 0.0);
            println!("splitting {s} GHz: <n_out>(45)/<n_out>(0) = {}", e.map_or("n/a".into(), |e| format!("{e:.3}")));
            json!({ "splitting_ghz": s, "ratio_45_over_0": e })
        })
        .collect();
    let mut w = ArtifactWriter::new("brightness", cfg)?;
    w.csv("brightness.csv", &table.to_csv(), json!({ "enhancement": enhancement }))?;
    Ok(w.written().to_vec())
}

fn distribution_column(d: &PhotonDistribution<f64>, n: usize) -> f64 {
    d.probs.get(n).copied().unwrap_or(0.0)
}

/// Two-photon cancellation table and output photon statistics at the
/// bunching and antibunching operating points.
pub fn squeeze(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut table = String::from("alpha_bar,r,r_over_alpha_sq,p2_exact,p2_approx,relative_error,squeezing_db\n");
    let mut worst = 0.0f64;
    for alpha in [0.02, 0.05, 0.1, 0.2] {
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let r = frac * alpha * alpha;
            let spec = SqueezeSpec::real(alpha, r)?;
            let exact: f64 = displaced_squeezed_fock_probs(&spec, 12)?.probs[2];
            let approx = two_photon_amplitude_approx(&spec)?;
            let rel = (approx - exact).abs() / exact;
            if frac < 1.0 {
                worst = worst.max(rel);
            }
            let _ = writeln!(table, "{alpha},{r},{frac},{exact},{approx},{rel},{}", squeezing_db(r));
        }
    }
    let mut w = ArtifactWriter::new("squeeze", cfg)?;
    w.csv(
        "squeeze_two_photon.csv",
        &table,
        json!({ "max_relative_error_below_cancellation": worst }),
    )?;

    let params = cfg.params();
    let settings = cfg.solver_settings();
    let scan = cfg.waveplate_scan();
    let mut states = Vec::new();
    for preset in [ArrowPreset::C, ArrowPreset::D] {
        let point = resolve_preset(preset, &params, &scan, &settings)?;
        let sol = solve_at(cfg, point.theta_in)?;
        let dist = photon_distribution(&sol.rho, &point.projection)?;
        let stats = OutputStatistics::new(&sol.rho, &point.projection)?;
        states.push((preset.name(), dist, Some(stats), point.g2_bare));
    }
    // coherent reference at the antibunching point's intensity
    let mean = states[1].1.mean();
    let len = states[1].1.probs.len();
    states.insert(0, ("coherent", PhotonDistribution::from_probs(poisson_probs(mean, len)), None, 1.0));

    let mut dist_csv = String::from("n");
    for (name, ..) in &states {
        let _ = write!(dist_csv, ",{name}");
    }
    dist_csv.push('\n');
    for n in 0..len {
        let _ = write!(dist_csv, "{n}");
        for (_, d, ..) in &states {
            let _ = write!(dist_csv, ",{}", distribution_column(d, n));
        }
        dist_csv.push('\n');
    }
    let mut stats_csv = String::from(
        "state,mean_n,variance,fano,g2_bare,min_quadrature_variance,squeeze_estimate,squeezing_db,character\n",
    );
    let mut summary = Vec::new();
    for (name, d, stats, g2) in &states {
        let var = number_variance(d);
        let mean = d.mean();
        let (minvar, r, db, character) = match stats {
            Some(s) => (
                s.min_quadrature_variance,
                s.squeeze_estimate,
                s.squeezing_db,
                format!("{:?}", s.character).to_lowercase(),
            ),
            None => (0.25, 0.0, 0.0, "none".into()),
        };
        let _ = writeln!(
            stats_csv,
            "{name},{mean},{var},{},{g2},{minvar},{r},{db},{character}",
            var / mean
        );
        println!("{name}: <n> {mean:.4e}, Var(n)/<n> {:.6}, min Var X {minvar:.6}, {character}", var / mean);
        summary.push(json!({ "state": name, "residual": d.residual }));
    }
    w.csv("photon_distribution.csv", &dist_csv, json!({ "states": summary }))?;
    w.csv("photon_statistics.csv", &stats_csv, Value::Null)?;
    Ok(w.written().to_vec())
}
