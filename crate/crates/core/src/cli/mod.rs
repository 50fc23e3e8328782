//! Reproducible runs driven by a JSON config.
//!
//! A run writes its artifacts into one output directory: field CSVs (see
//! [`io`] for the column contract), `report.json`, and `manifest.json`.
//! Reports contain no timings, so identical configs give byte-identical
//! reports and CSVs; the manifest alone records wall-clock time.
//! `--check` rebuilds every report from the stored fields (never
//! re-solving the hierarchy), compares it byte-for-byte with the stored
//! report and re-applies the tolerances.

pub mod config;
pub mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{parse_config, RunConfig, RunKind};

use crate::berry::{
    angle_distance, berry_report, sample_two_level_loop, two_level_ground_phase, BerryReport,
    StateLoop,
};
use crate::error::{Result, WkbError};
use crate::hj::{build_phase, hj_residual_samples, PhaseField};
use crate::model::{AmplitudeField, Interval};
use crate::multidim::{
    build_phase_d, continuity_residual_d, order_sweep_d, solve_hierarchy_d, tensor_product,
    transport_residual_d, AmplitudeFieldD, GridD, SeparablePhaseD,
};
use crate::series::{assemble_psi, order_sweep_from_fields, ResidualReport};
use crate::transport::{continuity_residual, solve_hierarchy, transport_residual};

pub const MANIFEST: &str = "manifest.json";
pub const REPORT: &str = "report.json";

/// Process exit code for an error.
pub fn exit_code(err: &WkbError) -> i32 {
    match err {
        WkbError::Config(_) => 2,
        WkbError::Tolerance(_) | WkbError::Numeric(_) | WkbError::Consistency(_) => 3,
        WkbError::Domain(_)
        | WkbError::Horizon { .. }
        | WkbError::Range { .. }
        | WkbError::Resolution { .. } => 4,
        WkbError::Invalid(_) | WkbError::Shape(_) => 2,
        WkbError::Io(_) => 1,
    }
}

/// Short machine-readable class of an error.
pub fn error_class(err: &WkbError) -> &'static str {
    match err {
        WkbError::Range { .. } => "range",
        WkbError::Domain(_) => "domain",
        WkbError::Horizon { .. } => "horizon",
        WkbError::Shape(_) => "shape",
        WkbError::Consistency(_) => "consistency",
        WkbError::Resolution { .. } => "resolution",
        WkbError::Numeric(_) => "numeric",
        WkbError::Invalid(_) => "invalid",
        WkbError::Tolerance(_) => "tolerance",
        WkbError::Config(_) => "config",
        WkbError::Io(_) => "io",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStatus {
    pub stage: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub reason: String,
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub files: Vec<FileEntry>,
    pub versions: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
    pub stages: Vec<StageStatus>,
    pub failure: Option<Failure>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, |f| f.exit_code)
    }
}

struct Runner<'a> {
    out: &'a Path,
    files: Vec<FileEntry>,
    stages: Vec<StageStatus>,
    failed: Option<(String, WkbError)>,
    verbose: bool,
}

impl<'a> Runner<'a> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        io::write_atomic(&self.out.join(name), contents.as_bytes())?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len() as u64,
        });
        if self.verbose {
            eprintln!("  wrote {name} ({} bytes)", contents.len());
        }
        Ok(())
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        if self.verbose {
            eprintln!("[{name}]");
        }
        let r = f(self);
        match &r {
            Ok(_) => self.stages.push(StageStatus {
                stage: name.into(),
                ok: true,
                detail: None,
            }),
            Err(e) => {
                self.stages.push(StageStatus {
                    stage: name.into(),
                    ok: false,
                    detail: Some(e.to_string()),
                });
                if self.failed.is_none() {
                    self.failed = Some((name.into(), e.clone()));
                }
            }
        }
        r
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Execute a validated config, writing into `out`. Failures are recorded
/// in the returned (and written) manifest.
pub fn run(cfg: &RunConfig, out: &Path, verbose: bool) -> RunManifest {
    let start = Instant::now();
    let mut runner = Runner {
        out,
        files: vec![],
        stages: vec![],
        failed: None,
        verbose,
    };
    let prepared = std::fs::create_dir_all(out).map_err(WkbError::from);
    if let Err(e) = prepared {
        runner.failed = Some(("prepare".into(), e));
    } else {
        let _ = match cfg.kind {
            RunKind::Phase => run_phase(cfg, &mut runner),
            RunKind::Transport => run_transport(cfg, &mut runner),
            RunKind::Sweep => run_sweep(cfg, &mut runner),
            RunKind::Multidim => run_multidim(cfg, &mut runner),
            RunKind::Berry => run_berry(cfg, &mut runner),
        };
    }
    let mut versions = BTreeMap::new();
    versions.insert(
        "wkb-core".to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    );
    let manifest = RunManifest {
        config: cfg.clone(),
        files: runner.files,
        versions,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        stages: runner.stages,
        failure: runner.failed.map(|(stage, e)| Failure {
            stage,
            reason: error_class(&e).into(),
            exit_code: exit_code(&e),
            message: e.to_string(),
        }),
    };
    if out.is_dir() {
        // a manifest that cannot be written leaves the run without a record;
        // the caller still gets the in-memory manifest
        let _ = io::write_atomic(&out.join(MANIFEST), to_json(&manifest).as_bytes());
    }
    manifest
}

fn check_max(values: &[f64], tol: f64, what: &str) -> Result<()> {
    let bad: Vec<String> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !(**v <= tol))
        .map(|(k, v)| format!("{what}[{k}] = {v:e} > {tol:e}"))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(WkbError::Tolerance(bad.join("; ")))
    }
}

fn phase_1d(cfg: &RunConfig) -> Result<PhaseField> {
    let spec = cfg.potential.as_ref().expect("validated").build()?;
    build_phase(
        &spec,
        cfg.mass,
        cfg.beta.expect("validated"),
        &config::grid_1d(cfg),
        cfg.anchor,
        cfg.margin,
    )
}

// ---------------------------------------------------------------- phase

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub kind: String,
    pub hj_residual: f64,
    pub tol_hj: f64,
    pub window: Interval,
    pub anchor: f64,
    pub passed: bool,
}

fn phase_report(cfg: &RunConfig, phase: &PhaseField, xs: &[f64], s_x: &[f64]) -> PhaseReport {
    let hj = hj_residual_samples(phase.spec(), phase.mass(), phase.beta(), xs, s_x);
    PhaseReport {
        kind: "phase".into(),
        hj_residual: hj,
        tol_hj: cfg.tolerances.tol_hj,
        window: phase.window(),
        anchor: phase.anchor(),
        passed: hj <= cfg.tolerances.tol_hj,
    }
}

fn run_phase(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let phase = r.stage("phase", |_| phase_1d(cfg))?;
    let report = phase_report(cfg, &phase, &phase.samples().xs, &phase.samples().s_x);
    r.stage("write", |r| {
        r.write("phase.csv", &io::phase_csv(phase.samples()))?;
        r.write(REPORT, &to_json(&report))
    })?;
    r.stage("verify", |_| {
        check_max(&[report.hj_residual], cfg.tolerances.tol_hj, "hj_residual")
    })
}

fn check_phase(cfg: &RunConfig, out: &Path) -> Result<String> {
    let phase = phase_1d(cfg)?;
    let rows = io::read_table(
        &read(out, "phase.csv")?,
        &["x", "w", "s_x", "s_xx", "time_of_flight"],
    )?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let s_x: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let report = phase_report(cfg, &phase, &xs, &s_x);
    compare_report(out, &to_json(&report))?;
    check_max(&[report.hj_residual], cfg.tolerances.tol_hj, "hj_residual")?;
    Ok(format!("hj residual {:e}", report.hj_residual))
}

// ------------------------------------------------------------ transport

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub kind: String,
    pub order: usize,
    pub transport_residuals: Vec<f64>,
    pub continuity_residual: f64,
    /// continuity_residual / (hx^2 + ht^2).
    pub continuity_constant: f64,
    pub tol_ode: f64,
    pub passed: bool,
}

fn transport_report(
    cfg: &RunConfig,
    phase: &PhaseField,
    fields: &[AmplitudeField],
) -> Result<TransportReport> {
    let order = cfg.transport.diff_order;
    let res = transport_residual(phase, fields, order)?;
    let cont = continuity_residual(phase, &fields[0], order)?;
    let passed = res.iter().all(|v| *v <= cfg.tolerances.tol_ode);
    let g = fields[0].grid;
    Ok(TransportReport {
        kind: "transport".into(),
        order: fields.len() - 1,
        transport_residuals: res,
        continuity_residual: cont,
        continuity_constant: cont / (g.hx().powi(2) + g.ht().powi(2)),
        tol_ode: cfg.tolerances.tol_ode,
        passed,
    })
}

fn solve_fields_1d(cfg: &RunConfig, r: &mut Runner) -> Result<(PhaseField, Vec<AmplitudeField>)> {
    let phase = r.stage("phase", |_| phase_1d(cfg))?;
    let fields = r.stage("transport", |_| {
        let profile = cfg.profile.build()?;
        let h = solve_hierarchy(
            &phase,
            &profile,
            &config::grid_1d(cfg),
            cfg.order,
            cfg.transport,
        )?;
        Ok(h.report_fields())
    })?;
    r.stage("write fields", |r| {
        for f in &fields {
            r.write(&format!("a{}.csv", f.order), &io::field_csv(f))?;
        }
        Ok(())
    })?;
    Ok((phase, fields))
}

fn read_fields_1d(cfg: &RunConfig, out: &Path) -> Result<Vec<AmplitudeField>> {
    let grid = config::grid_1d(cfg);
    (0..=cfg.order)
        .map(|k| io::read_field_csv(&read(out, &format!("a{k}.csv"))?, k, grid))
        .collect()
}

fn run_transport(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let (phase, fields) = solve_fields_1d(cfg, r)?;
    let report = r.stage("residuals", |_| transport_report(cfg, &phase, &fields))?;
    r.stage("write report", |r| r.write(REPORT, &to_json(&report)))?;
    r.stage("verify", |_| {
        check_max(
            &report.transport_residuals,
            cfg.tolerances.tol_ode,
            "transport_residual",
        )
    })
}

fn check_transport(cfg: &RunConfig, out: &Path) -> Result<String> {
    let phase = phase_1d(cfg)?;
    let fields = read_fields_1d(cfg, out)?;
    let report = transport_report(cfg, &phase, &fields)?;
    compare_report(out, &to_json(&report))?;
    check_max(
        &report.transport_residuals,
        cfg.tolerances.tol_ode,
        "transport_residual",
    )?;
    Ok(format!(
        "transport residuals {:?}",
        report.transport_residuals
    ))
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: String,
    pub hj_residual: f64,
    pub residual: ResidualReport,
    pub tol_identity: f64,
    pub passed: bool,
}

fn sweep_report(
    cfg: &RunConfig,
    phase: &PhaseField,
    fields: &[AmplitudeField],
) -> Result<SweepReport> {
    let residual = order_sweep_from_fields(phase, fields, &cfg.hbar, cfg.transport.diff_order)?;
    let s = phase.samples();
    Ok(SweepReport {
        kind: "sweep".into(),
        hj_residual: hj_residual_samples(phase.spec(), phase.mass(), phase.beta(), &s.xs, &s.s_x),
        passed: residual.max_identity_error() <= cfg.tolerances.tol_identity,
        residual,
        tol_identity: cfg.tolerances.tol_identity,
    })
}

fn run_sweep(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let (phase, fields) = solve_fields_1d(cfg, r)?;
    let report = r.stage("order sweep", |_| sweep_report(cfg, &phase, &fields))?;
    r.stage("write report", |r| {
        for (i, &hbar) in cfg.hbar.iter().enumerate() {
            let psi = assemble_psi(&phase, &fields, hbar)?;
            r.write(
                &format!("psi_{i}.csv"),
                &io::complex_csv(psi.grid(), &psi.psi_field()),
            )?;
        }
        r.write(REPORT, &to_json(&report))
    })?;
    r.stage("verify", |_| {
        report.residual.check(cfg.tolerances.tol_identity)
    })
}

fn check_sweep(cfg: &RunConfig, out: &Path) -> Result<String> {
    let phase = phase_1d(cfg)?;
    let fields = read_fields_1d(cfg, out)?;
    let report = sweep_report(cfg, &phase, &fields)?;
    compare_report(out, &to_json(&report))?;
    report.residual.check(cfg.tolerances.tol_identity)?;
    Ok(format!(
        "slope {}, max identity error {:e}",
        report
            .residual
            .slope()
            .map_or("none (exact solution)".to_string(), |s| format!("{s:.4}")),
        report.residual.max_identity_error()
    ))
}

// ------------------------------------------------------------- multidim

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiDimReport {
    pub kind: String,
    pub dim: usize,
    pub order: usize,
    pub hj_residual: f64,
    pub transport_residuals: Vec<f64>,
    pub continuity_residual: f64,
    /// max |a_0 - product of 1-D a_0| on the report grid.
    pub separability_error: f64,
    pub sweep: Option<ResidualReport>,
    pub tol_ode: f64,
    pub tol_identity: f64,
    pub passed: bool,
}

fn multidim_setup(cfg: &RunConfig) -> Result<(SeparablePhaseD, GridD)> {
    let md = cfg.multidim.as_ref().expect("validated");
    let grid = md.grid()?;
    let specs = md
        .axes
        .iter()
        .map(|a| a.potential.build())
        .collect::<Result<Vec<_>>>()?;
    let betas: Vec<f64> = md.axes.iter().map(|a| a.beta).collect();
    let anchors: Vec<Option<f64>> = md.axes.iter().map(|a| a.anchor).collect();
    let phase = build_phase_d(&specs, cfg.mass, &betas, &grid, &anchors, cfg.margin)?;
    Ok((phase, grid))
}

/// Product of per-axis 1-D order-0 solves on the report grid.
fn product_a0(cfg: &RunConfig, phase: &SeparablePhaseD, grid: &GridD) -> Result<AmplitudeFieldD> {
    let md = cfg.multidim.as_ref().expect("validated");
    let per_axis = (0..grid.dim())
        .map(|i| {
            let profile = md.axes[i].profile.build()?;
            let h = solve_hierarchy(
                &phase.axes[i],
                &profile,
                &grid.axis_grid(i),
                0,
                cfg.transport,
            )
            .map_err(|e| e.with_axis(i))?;
            Ok(h.report_fields().remove(0))
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&AmplitudeField> = per_axis.iter().collect();
    tensor_product(&refs, grid)
}

fn multidim_report(
    cfg: &RunConfig,
    phase: &SeparablePhaseD,
    grid: &GridD,
    fields: &[AmplitudeFieldD],
) -> Result<MultiDimReport> {
    let order = cfg.transport.diff_order;
    let res = transport_residual_d(phase, fields, order)?;
    let cont = continuity_residual_d(phase, &fields[0], order)?;
    let product = product_a0(cfg, phase, grid)?;
    let sep = (fields[0].values() - product.values())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let sweep = if cfg.hbar.is_empty() {
        None
    } else {
        Some(order_sweep_d(phase, fields, &cfg.hbar, order)?)
    };
    let t = cfg.tolerances;
    let passed = res.iter().all(|v| *v <= t.tol_ode)
        && sep <= t.tol_ode
        && sweep
            .as_ref()
            .is_none_or(|s| s.max_identity_error() <= t.tol_identity);
    Ok(MultiDimReport {
        kind: "multidim".into(),
        dim: grid.dim(),
        order: fields.len() - 1,
        hj_residual: phase.hj_residual(),
        transport_residuals: res,
        continuity_residual: cont,
        separability_error: sep,
        sweep,
        tol_ode: t.tol_ode,
        tol_identity: t.tol_identity,
        passed,
    })
}

fn verify_multidim(cfg: &RunConfig, rep: &MultiDimReport) -> Result<()> {
    let t = cfg.tolerances;
    check_max(&rep.transport_residuals, t.tol_ode, "transport_residual")?;
    check_max(&[rep.separability_error], t.tol_ode, "separability_error")?;
    if let Some(s) = &rep.sweep {
        s.check(t.tol_identity)?;
    }
    Ok(())
}

fn run_multidim(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let (phase, grid) = r.stage("phase", |_| multidim_setup(cfg))?;
    let fields = r.stage("transport", |_| {
        let md = cfg.multidim.as_ref().expect("validated");
        let profiles = md
            .axes
            .iter()
            .map(|a| a.profile.build())
            .collect::<Result<Vec<_>>>()?;
        let h = solve_hierarchy_d(&phase, &profiles, &grid, cfg.order, cfg.transport)?;
        Ok(h.report_fields())
    })?;
    r.stage("write fields", |r| {
        for f in &fields {
            r.write(&format!("a{}.csv", f.order), &io::field_d_csv(f))?;
        }
        Ok(())
    })?;
    let report = r.stage("residuals", |_| {
        multidim_report(cfg, &phase, &grid, &fields)
    })?;
    r.stage("write report", |r| r.write(REPORT, &to_json(&report)))?;
    r.stage("verify", |_| verify_multidim(cfg, &report))
}

fn check_multidim(cfg: &RunConfig, out: &Path) -> Result<String> {
    let (phase, grid) = multidim_setup(cfg)?;
    let fields = (0..=cfg.order)
        .map(|k| io::read_field_d_csv(&read(out, &format!("a{k}.csv"))?, k, &grid))
        .collect::<Result<Vec<_>>>()?;
    let report = multidim_report(cfg, &phase, &grid, &fields)?;
    compare_report(out, &to_json(&report))?;
    verify_multidim(cfg, &report)?;
    Ok(format!(
        "transport residuals {:?}",
        report.transport_residuals
    ))
}

// ---------------------------------------------------------------- berry

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryRunReport {
    pub kind: String,
    pub berry: BerryReport,
    /// Continuum phase of the two-level loop, when that family is used.
    pub expected: Option<f64>,
    pub error: Option<f64>,
    pub tol_berry: f64,
    pub passed: bool,
}

fn berry_run_report(cfg: &RunConfig, lp: &StateLoop) -> Result<BerryRunReport> {
    let b = cfg.berry.as_ref().expect("validated");
    let berry = berry_report(lp)?;
    let expected = b.theta.map(two_level_ground_phase);
    let error = expected.map(|e| angle_distance(berry.gamma, e));
    Ok(BerryRunReport {
        kind: "berry".into(),
        passed: error.is_none_or(|e| e <= cfg.tolerances.tol_berry),
        berry,
        expected,
        error,
        tol_berry: cfg.tolerances.tol_berry,
    })
}

fn verify_berry(cfg: &RunConfig, rep: &BerryRunReport) -> Result<()> {
    match rep.error {
        Some(e) => check_max(&[e], cfg.tolerances.tol_berry, "berry_phase_error"),
        None => Ok(()),
    }
}

fn run_berry(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let b = cfg.berry.as_ref().expect("validated");
    let lp = r.stage("loop", |_| match (&b.loop_file, b.theta, b.states) {
        (Some(path), _, _) => StateLoop::from_file(Path::new(path)),
        (None, Some(theta), Some(k)) => sample_two_level_loop(theta, k),
        _ => Err(WkbError::Config(vec!["berry: no loop source".into()])),
    })?;
    let report = r.stage("berry phase", |_| berry_run_report(cfg, &lp))?;
    r.stage("write", |r| {
        r.write("loop.csv", &lp.to_csv())?;
        r.write(REPORT, &to_json(&report))
    })?;
    r.stage("verify", |_| verify_berry(cfg, &report))
}

fn check_berry(cfg: &RunConfig, out: &Path) -> Result<String> {
    let lp = StateLoop::from_csv(&read(out, "loop.csv")?)?;
    let report = berry_run_report(cfg, &lp)?;
    compare_report(out, &to_json(&report))?;
    verify_berry(cfg, &report)?;
    Ok(format!("gamma {}", report.berry.gamma))
}

// ---------------------------------------------------------------- check

fn read(out: &Path, name: &str) -> Result<String> {
    std::fs::read_to_string(out.join(name))
        .map_err(|e| WkbError::Io(format!("{}: {e}", out.join(name).display())))
}

fn compare_report(out: &Path, rebuilt: &str) -> Result<()> {
    let stored = read(out, REPORT)?;
    if stored != rebuilt {
        return Err(WkbError::Consistency(
            "report rebuilt from the stored fields differs from the stored report".into(),
        ));
    }
    Ok(())
}

/// Re-verify a finished run from its stored artifacts.
pub fn check(out: &Path) -> Result<String> {
    let manifest: RunManifest = serde_json::from_str(&read(out, MANIFEST)?)
        .map_err(|e| WkbError::Io(format!("manifest: {e}")))?;
    if let Some(f) = &manifest.failure {
        return Err(WkbError::Consistency(format!(
            "run failed at stage '{}': {}",
            f.stage, f.message
        )));
    }
    for f in &manifest.files {
        let p: PathBuf = out.join(&f.path);
        let len = std::fs::metadata(&p).map(|m| m.len()).unwrap_or(0);
        if len == 0 {
            return Err(WkbError::Io(format!("{} is missing or empty", p.display())));
        }
        if len != f.bytes {
            return Err(WkbError::Consistency(format!(
                "{} has {len} bytes, manifest lists {}",
                p.display(),
                f.bytes
            )));
        }
    }
    let cfg = &manifest.config;
    let issues = config::validate(cfg);
    if !issues.is_empty() {
        return Err(WkbError::Config(issues));
    }
    match cfg.kind {
        RunKind::Phase => check_phase(cfg, out),
        RunKind::Transport => check_transport(cfg, out),
        RunKind::Sweep => check_sweep(cfg, out),
        RunKind::Multidim => check_multidim(cfg, out),
        RunKind::Berry => check_berry(cfg, out),
    }
}

/// Output directory: explicit flag, then the config, then `wkb-out`.
pub fn output_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wkb-out"))
}
