//! Experiment orchestration: the five pipelines behind the CLI subcommands,
//! each returning a manifest with configuration echo, diagnostics and a
//! digest-carrying file inventory.

use crate::blob::{self, init_from_curve, kh_perturb, zone_overlay, KhConfig, SimConfig};
use crate::config::{field_sample_grid, ExperimentConfig};
use crate::curve::{ClosedCurve, ScalarField};
use crate::dissipation::{
    an_cn_f64, expansion_rate, fan_dissipation_rate, initial_dissipation_density, lambda_grid,
    w_functional, w_lower_bound, w_max, FanOrder,
};
use crate::numerics::loglog_slope;
use crate::output::{
    curve_csv, diagnostics_csv, field_csv, parse_curve_csv, trajectory_csv, vector_field_csv,
    FileEntry, OutputSink, SvgChart, SvgFigure,
};
use crate::subsolution::SheetFamily;
use crate::{Complex, Error, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Dissipation,
    Construct,
    Simulate,
    Field,
    Report,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Dissipation => "dissipation",
            Pipeline::Construct => "construct",
            Pipeline::Simulate => "simulate",
            Pipeline::Field => "field",
            Pipeline::Report => "report",
        }
    }
}

/// Manifest of a completed run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub pipeline: String,
    pub config: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub diagnostics: BTreeMap<String, Value>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    fn new(pipeline: Pipeline, config: &ExperimentConfig) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("vortexzone".into(), env!("CARGO_PKG_VERSION").into());
        Self {
            pipeline: pipeline.name().into(),
            config: config.echo(),
            versions,
            diagnostics: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    fn finish(mut self, sink: OutputSink) -> Result<Self> {
        let dir = sink.dir().to_path_buf();
        self.files = sink.into_files();
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n";
        crate::output::write_file(&dir.join("manifest.json"), &text)?;
        Ok(self)
    }
}

/// Run one pipeline end to end, writing outputs into `config.out_dir`.
pub fn run_experiment(pipeline: Pipeline, config: &ExperimentConfig) -> Result<RunManifest> {
    match pipeline {
        Pipeline::Dissipation => run_dissipation(config),
        Pipeline::Construct => run_construct(config),
        Pipeline::Simulate => run_simulate(config),
        Pipeline::Field => run_field(config),
        Pipeline::Report => run_report(config),
    }
}

struct Setup {
    z0: ClosedCurve,
    wt0: ScalarField,
    c: ScalarField,
    eps: f64,
    c_degenerate: bool,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    let z0 = config.curve.build(config.resolution)?;
    let wt0 = config.strength.build(z0.grid().clone())?;
    let eps = config.eps_for(z0.grid().length());
    let (c, c_degenerate) = expansion_rate(&wt0, config.n_pairs, config.fraction, eps)?;
    Ok(Setup {
        z0,
        wt0,
        c,
        eps,
        c_degenerate,
    })
}

fn run_dissipation(config: &ExperimentConfig) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(Pipeline::Dissipation, config);
    let mut sink = OutputSink::new(&config.out_dir);
    let s = setup(config)?;
    let ell = s.z0.grid().length();
    let n = config.n_pairs;
    let (a_n, c_n) = an_cn_f64(n)?;

    let w_value = w_functional(&s.wt0, &s.c, n, (0.0, ell))?;
    let (c_max, w_max_value) = w_max(&s.wt0, n)?;
    let lower = w_lower_bound(&s.wt0, n, config.fraction, s.eps, ell / 8.0)?;
    let density = initial_dissipation_density(&s.z0, &s.wt0, &s.c, n)?;

    sink.emit("c_field.csv", "field", &field_csv(&s.c))?;
    sink.emit("c_max.csv", "field", &field_csv(&c_max))?;
    let density_field = ScalarField::new(s.z0.grid().clone(), density.combined.clone())?;
    sink.emit("density.csv", "field", &field_csv(&density_field))?;

    // Fan rate against c for the configured N and the rarefaction limit.
    let mut rate_csv = String::from("c,rate_finite,rate_infinite\n");
    let mut finite_pts = Vec::new();
    let mut infinite_pts = Vec::new();
    for k in 0..=110 {
        let c = 0.005 * k as f64;
        let rf = fan_dissipation_rate(FanOrder::Finite(n), c)?;
        let ri = fan_dissipation_rate(FanOrder::Infinite, c)?;
        let _ = writeln!(rate_csv, "{c},{rf},{ri}");
        finite_pts.push((c, rf));
        infinite_pts.push((c, ri));
    }
    sink.emit("rate_vs_c.csv", "rate", &rate_csv)?;
    let mut chart = SvgChart::new();
    chart.add_series(&format!("fan rate, N = {n}"), "#1f77b4", finite_pts);
    chart.add_series("rarefaction limit", "#d62728", infinite_pts);
    sink.emit("rate_vs_c.svg", "figure", &chart.render())?;

    let diag = &mut manifest.diagnostics;
    diag.insert("a_N".into(), json!(a_n));
    diag.insert("c_N".into(), json!(c_n));
    diag.insert("W_full_period".into(), json!(w_value));
    diag.insert("W_max".into(), json!(w_max_value));
    diag.insert(
        "W_max_closed_form".into(),
        json!((1.0 / 48.0) * (1.0 - 1.0 / (2.0 * n as f64).powi(2))
            * s.wt0.map(|w| w.abs().powi(3))?.integrate()),
    );
    diag.insert("lower_bound_eps".into(), json!(lower.eps));
    diag.insert(
        "lower_bound_intervals_checked".into(),
        json!(lower.intervals.len()),
    );
    diag.insert(
        "density_integral_vs_W".into(),
        json!((density.integral - w_value).abs()),
    );
    diag.insert(
        "degenerate_strength_nodes".into(),
        json!(density.degenerate_nodes),
    );
    diag.insert(
        "fan_opt_rate".into(),
        json!(fan_dissipation_rate(FanOrder::Finite(n), c_n)?),
    );
    diag.insert("c_degenerate".into(), json!(s.c_degenerate));

    manifest.finish(sink)
}

fn run_construct(config: &ExperimentConfig) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(Pipeline::Construct, config);
    let mut sink = OutputSink::new(&config.out_dir);
    let s = setup(config)?;
    let family = SheetFamily::construct(&s.z0, &s.wt0, &s.c, config.n_pairs)?;

    for k in 0..4 {
        sink.emit(
            &format!("taylor_z{k}.csv"),
            "curve",
            &curve_csv(family.taylor().z_coeff(k)),
        )?;
    }
    sink.emit(
        "taylor_wt2.csv",
        "field",
        &field_csv(family.taylor().wt_coeff(2)),
    )?;
    sink.emit(
        "taylor_wt3.csv",
        "field",
        &field_csv(family.taylor().wt_coeff(3)),
    )?;

    // Residual study: the pointwise condition decays like t³.
    let residual_times = [4e-2, 2e-2, 1e-2];
    let mut residual_csv = String::from("t,residual\n");
    let mut pts = Vec::new();
    for &t in &residual_times {
        let r = family.pointwise_residual(t)?;
        let _ = writeln!(residual_csv, "{t},{r}");
        pts.push((t, r));
    }
    let slope = loglog_slope(&pts);
    sink.emit("residual.csv", "data", &residual_csv)?;

    // Equi-chord-arc margins over the snapshot times.
    let mut margin_csv = String::from("t,margin\n");
    let mut margins = Vec::new();
    for &t in &[0.05, 0.1, 0.15, 0.2, 0.25] {
        let m = family.equi_chord_arc_margin(t)?;
        let _ = writeln!(margin_csv, "{t},{m}");
        margins.push(json!({ "t": t, "margin": m }));
    }
    sink.emit("margin.csv", "data", &margin_csv)?;

    // Boundary data and zone overlay figure at the largest certified time.
    let t_plot = 0.25;
    let bd = family.boundary_data(1e-2)?;
    let mut boundary_csv = String::from("s,mean_x,mean_y,dev_x,dev_y\n");
    for (i, node) in s.z0.grid().nodes().enumerate() {
        let _ = writeln!(
            boundary_csv,
            "{node},{},{},{},{}",
            bd.mean[i].re, bd.mean[i].im, bd.dev[i].re, bd.dev[i].im
        );
    }
    sink.emit("boundary.csv", "data", &boundary_csv)?;

    let z_t = family.taylor().curve_at(t_plot)?;
    let outer = family.zone_map(t_plot, -1.0)?;
    let inner = family.zone_map(t_plot, 1.0)?;
    sink.emit("zone_center.csv", "curve", &curve_csv(&z_t))?;
    sink.emit("zone_outer.csv", "curve", &curve_csv(&outer))?;
    sink.emit("zone_inner.csv", "curve", &curve_csv(&inner))?;
    let mut fig = SvgFigure::fit(&[outer.points(), inner.points(), z_t.points()]);
    fig.add_curve("interface z(t)", "#000000", z_t.points());
    fig.add_curve("zone boundary x+", "#1f3fbf", inner.points());
    fig.add_curve("zone boundary x-", "#1f3fbf", outer.points());
    sink.emit("zone.svg", "figure", &fig.render())?;

    let (offdiag, trace) =
        crate::subsolution::reynolds_leading(&s.c, &s.wt0, config.n_pairs, 1.0)?;
    let offdiag_max = offdiag.iter().cloned().fold(0.0, f64::max);
    let trace_min = trace.iter().cloned().fold(f64::INFINITY, f64::min);

    let diag = &mut manifest.diagnostics;
    diag.insert("residual_slope".into(), json!(slope));
    diag.insert("margins".into(), json!(margins));
    diag.insert(
        "chord_arc".into(),
        json!(s.z0.chord_arc_constant()?),
    );
    diag.insert("reynolds_offdiag_max".into(), json!(offdiag_max));
    diag.insert("reynolds_trace_min".into(), json!(trace_min));
    diag.insert("c_degenerate".into(), json!(s.c_degenerate));

    manifest.finish(sink)
}

fn run_simulate(config: &ExperimentConfig) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(Pipeline::Simulate, config);
    let mut sink = OutputSink::new(&config.out_dir);
    let s = setup(config)?;

    let sim = SimConfig {
        h: config.step_h,
        steps: config.steps,
        integrator: config.integrator,
        s_count: config.s_count,
        delta: config.delta,
        energy_stride: 10,
    };
    let kh = KhConfig {
        amplitude: config.kh_amplitude,
        frequency: config.kh_frequency,
    };

    let tmax = sim.final_time();
    let bad_times: Vec<String> = config
        .times
        .iter()
        .filter(|t| **t > tmax + 1e-12)
        .map(|t| format!("key 'times': snapshot {t} outside the run [0, {tmax}]"))
        .collect();
    if !bad_times.is_empty() {
        return Err(Error::Config(bad_times));
    }

    let center_state = init_from_curve(&s.z0, &s.wt0, config.s_count, config.delta)?;
    let center = blob::run(center_state, &sim, None)?;
    let perturbed_state =
        init_from_curve(&kh_perturb(&s.z0, &kh)?, &s.wt0, config.s_count, config.delta)?;
    let perturbed = blob::run(perturbed_state, &sim, None)?;

    let node_stride = (config.s_count / 512).max(1);
    let step_stride = (config.steps / 20).max(1);
    sink.emit(
        "trajectory_center.csv",
        "trajectory",
        &trajectory_csv(&center, step_stride, node_stride),
    )?;
    sink.emit(
        "trajectory_perturbed.csv",
        "trajectory",
        &trajectory_csv(&perturbed, step_stride, node_stride),
    )?;
    sink.emit(
        "diagnostics_center.csv",
        "data",
        &diagnostics_csv(&center),
    )?;
    sink.emit(
        "diagnostics_perturbed.csv",
        "data",
        &diagnostics_csv(&perturbed),
    )?;

    // Zone overlays and containment at the snapshot times.
    let mut containment = Vec::new();
    for (k, &t) in config.times.iter().enumerate() {
        let overlay = zone_overlay(
            &center,
            &s.z0,
            &s.wt0,
            config.beta,
            s.eps,
            t,
            &perturbed.state_at(t)?.positions,
        )?;
        sink.emit(
            &format!("zone_inner_t{k}.csv"),
            "curve",
            &curve_csv(&overlay.x_plus),
        )?;
        sink.emit(
            &format!("zone_outer_t{k}.csv"),
            "curve",
            &curve_csv(&overlay.x_minus),
        )?;
        let kh_curve = ClosedCurve::new(
            overlay.x_plus.grid().clone(),
            perturbed.state_at(t)?.positions.clone(),
        )?;
        let center_curve = ClosedCurve::new(
            overlay.x_plus.grid().clone(),
            center.state_at(t)?.positions.clone(),
        )?;
        let mut fig = SvgFigure::fit(&[
            overlay.x_minus.points(),
            overlay.x_plus.points(),
            kh_curve.points(),
        ]);
        fig.add_curve("kelvin-helmholtz sheet", "#7fbfff", kh_curve.points());
        fig.add_curve("center interface", "#000000", center_curve.points());
        fig.add_curve("zone boundary x+", "#1f3fbf", overlay.x_plus.points());
        fig.add_curve("zone boundary x-", "#1f3fbf", overlay.x_minus.points());
        // Strength zeros travel with the parameter grid.
        let zeros: Vec<Complex> = strength_zero_nodes(&s.wt0)
            .into_iter()
            .map(|frac| {
                let idx = (frac * center_curve.points().len() as f64) as usize
                    % center_curve.points().len();
                center_curve.points()[idx]
            })
            .collect();
        if !zeros.is_empty() {
            fig.add_markers("#d62728", &zeros);
        }
        sink.emit(&format!("overlay_t{k}.svg"), "figure", &fig.render())?;
        containment.push(json!({ "t": t, "containment": overlay.containment }));
    }

    let circ_drift = center
        .diagnostics
        .iter()
        .map(|d| (d.circulation - center.diagnostics[0].circulation).abs())
        .fold(0.0, f64::max);
    let energy0 = center.diagnostics[0].energy.unwrap_or(0.0);
    let energy1 = center
        .diagnostics
        .iter()
        .rev()
        .find_map(|d| d.energy)
        .unwrap_or(energy0);

    let diag = &mut manifest.diagnostics;
    diag.insert("circulation_drift".into(), json!(circ_drift));
    diag.insert(
        "impulse_relative_drift".into(),
        json!(center.impulse_relative_drift()),
    );
    diag.insert("energy_drift".into(), json!((energy1 - energy0).abs()));
    diag.insert("zone_containment".into(), json!(containment));
    diag.insert(
        "below_resolution".into(),
        json!(center.initial().below_resolution),
    );

    manifest.finish(sink)
}

fn strength_zero_nodes(wt0: &ScalarField) -> Vec<f64> {
    let n = wt0.grid().len();
    let mut fractions = Vec::new();
    for i in 0..n {
        let a = wt0.values()[i];
        let b = wt0.values()[(i + 1) % n];
        if a == 0.0 || a * b < 0.0 {
            fractions.push(i as f64 / n as f64);
        }
    }
    fractions
}

fn run_field(config: &ExperimentConfig) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(Pipeline::Field, config);
    let mut sink = OutputSink::new(&config.out_dir);
    let s = setup(config)?;

    let t = config.times.last().copied().unwrap_or(0.0);
    let steps = (t / config.step_h).round() as usize;
    let sim = SimConfig {
        h: config.step_h,
        steps,
        integrator: config.integrator,
        s_count: config.s_count,
        delta: config.delta,
        energy_stride: 0,
    };
    let center_state = init_from_curve(&s.z0, &s.wt0, config.s_count, config.delta)?;
    let center = blob::run(center_state, &sim, None)?;

    // Zone coefficient field and the displaced sheet family.
    let c = s.wt0.map(f64::abs)?.mollify(s.eps)?.map(|v| config.beta * v)?;
    let lam = lambda_grid(config.n_pairs)?;
    let states = blob::family_states(center.last(), &s.z0, &c, t, &lam)?;

    let extent = 2.0;
    let points = field_sample_grid(extent, 24);
    let values = blob::macroscopic_field(&states, &points);
    sink.emit("field.csv", "vector_field", &vector_field_csv(&points, &values))?;

    let mut fig = SvgFigure::fit(&[&points]);
    let sheet_grid = crate::curve::PeriodicGrid::new(
        s.z0.grid().length(),
        center.last().positions.len(),
    );
    if let Ok(grid) = sheet_grid {
        if let Ok(curve) = ClosedCurve::new(grid, center.last().positions.clone()) {
            fig.add_curve("interface", "#000000", curve.points());
        }
    }
    let speed_max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = if speed_max > 0.0 {
        0.5 * (2.0 * extent / 24.0) / speed_max * 4.0
    } else {
        1.0
    };
    // Down-sample the quiver to every other grid point.
    let mut qp = Vec::new();
    let mut qv = Vec::new();
    for (i, (p, v)) in points.iter().zip(&values).enumerate() {
        if i % 2 == 0 {
            qp.push(*p);
            qv.push(*v);
        }
    }
    fig.add_quiver(&qp, &qv, scale);
    sink.emit("field.svg", "figure", &fig.render())?;

    let far = Complex::new(50.0, 0.0);
    let far_value = blob::macroscopic_field(&states, &[far])[0];
    let total = s.wt0.integrate();
    let diag = &mut manifest.diagnostics;
    diag.insert("time".into(), json!(t));
    diag.insert("far_field_speed".into(), json!(far_value.norm()));
    diag.insert(
        "far_field_expected".into(),
        json!(total.abs() / (std::f64::consts::TAU * far.norm())),
    );
    manifest.finish(sink)
}

/// Re-render figures from the data files listed in a previous run's
/// manifest (no numerics re-run).
fn run_report(config: &ExperimentConfig) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(Pipeline::Report, config);
    let dir = Path::new(&config.out_dir);
    let stored_text = crate::output::read_file(&dir.join("manifest.json"))?;
    let stored: Value = serde_json::from_str(&stored_text)
        .map_err(|e| Error::Config(vec![format!("manifest.json: {e}")]))?;
    let files = stored["files"]
        .as_array()
        .ok_or_else(|| Error::Config(vec!["manifest.json: missing files array".into()]))?;

    let mut sink = OutputSink::new(dir);
    let mut curves: Vec<(String, ClosedCurve)> = Vec::new();
    for entry in files {
        let (path, kind) = (
            entry["path"].as_str().unwrap_or_default().to_string(),
            entry["kind"].as_str().unwrap_or_default(),
        );
        if kind == "curve" {
            let text = crate::output::read_file(&dir.join(&path))?;
            // Period is immaterial for re-plotting; use 2π.
            if let Ok(curve) = parse_curve_csv(&text, std::f64::consts::TAU) {
                curves.push((path, curve));
            }
        }
    }
    if !curves.is_empty() {
        let sets: Vec<&[Complex]> = curves.iter().map(|(_, c)| c.points()).collect();
        let mut fig = SvgFigure::fit(&sets);
        let palette = ["#000000", "#1f3fbf", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
        for (k, (name, curve)) in curves.iter().enumerate() {
            fig.add_curve(name, palette[k % palette.len()], curve.points());
        }
        sink.emit("report.svg", "figure", &fig.render())?;
    }
    manifest
        .diagnostics
        .insert("curves_rerendered".into(), json!(curves.len()));
    manifest.finish(sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, preset};

    fn desk_config(out: &Path) -> ExperimentConfig {
        let mut cfg = preset("appendixB-const").unwrap();
        cfg.resolution = 128;
        cfg.s_count = 200;
        cfg.steps = 8;
        cfg.times = vec![0.0, 0.1, 0.2];
        cfg.out_dir = out.display().to_string();
        cfg
    }

    #[test]
    fn dissipation_pipeline_reports_w_max() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = desk_config(dir.path());
        cfg.strength = crate::config::StrengthSpec::Const { value: 2.0 };
        cfg.n_pairs = 1;
        let manifest = run_experiment(Pipeline::Dissipation, &cfg).unwrap();
        // W_max per unit length = 1/8 for ϖ₀ = 2, N = 1.
        let w_max = manifest.diagnostics["W_max"].as_f64().unwrap();
        let per_len = w_max / std::f64::consts::TAU;
        assert!((per_len - 0.125).abs() < 1e-12, "W_max/ℓ = {per_len}");
        assert!(dir.path().join("manifest.json").exists());
        assert!(dir.path().join("rate_vs_c.svg").exists());
    }

    #[test]
    fn simulate_pipeline_emits_everything() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = desk_config(dir.path());
        let manifest = run_experiment(Pipeline::Simulate, &cfg).unwrap();
        assert_eq!(
            manifest.diagnostics["circulation_drift"].as_f64().unwrap(),
            0.0
        );
        for entry in &manifest.files {
            assert!(dir.path().join(&entry.path).exists(), "{}", entry.path);
        }
        assert!(manifest.diagnostics.contains_key("zone_containment"));
    }

    #[test]
    fn manifest_digest_tracks_content() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let cfg1 = desk_config(dir1.path());
        let mut cfg2 = desk_config(dir2.path());
        let m1 = run_experiment(Pipeline::Simulate, &cfg1).unwrap();
        // Identical config (different directory): identical digests.
        let m2 = run_experiment(Pipeline::Simulate, &cfg2).unwrap();
        for (a, b) in m1.files.iter().zip(&m2.files) {
            assert_eq!(a.sha256, b.sha256, "{}", a.path);
        }
        // A changed parameter changes at least the trajectory digests.
        cfg2.steps = 9;
        let m3 = run_experiment(Pipeline::Simulate, &cfg2).unwrap();
        let d2: Vec<_> = m2.files.iter().map(|f| &f.sha256).collect();
        let d3: Vec<_> = m3.files.iter().map(|f| &f.sha256).collect();
        assert_ne!(d2, d3);
    }

    #[test]
    fn report_rerenders_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = desk_config(dir.path());
        run_experiment(Pipeline::Simulate, &cfg).unwrap();
        let report = run_experiment(Pipeline::Report, &cfg).unwrap();
        assert!(report.diagnostics["curves_rerendered"].as_u64().unwrap() > 0);
        assert!(dir.path().join("report.svg").exists());
    }

    #[test]
    fn unknown_preset_surfaces_as_config_error() {
        let err = parse_config("preset = nope\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
