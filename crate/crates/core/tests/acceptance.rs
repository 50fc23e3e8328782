//! Acceptance suite: one PASS/FAIL line per criterion, driven by the
//! configs under `experiments/`. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

use wkb_core::berry::{
    angle_distance, discrete_berry_phase, sample_two_level_loop, two_level_ground_phase, StateLoop,
};
use wkb_core::cli::{config::RunConfig, parse_config};
use wkb_core::hj::build_phase;
use wkb_core::multidim::{build_phase_d, order_sweep_d, solve_hierarchy_d, tensor_product, GridD};
use wkb_core::series::{apply_l_algebraic, apply_l_direct, assemble_psi, order_sweep_from_fields};
use wkb_core::transport::{
    continuity_residual, harmonic_a0_oracle, harmonic_a0_substitution_residual, solve_hierarchy,
};
use wkb_core::{
    hj_residual, AmplitudeField, DiffOrder, InitialProfile, PotentialSpec, Result, SpaceTimeGrid,
};

fn experiments() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

fn config(name: &str) -> RunConfig {
    let path = experiments().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome>;

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", items.join(", "))
}

fn grid(cfg: &RunConfig) -> SpaceTimeGrid {
    cfg.grid.expect("1-D config has a grid")
}

/// Phase and report fields a_0..a_order for a 1-D config.
fn solve_1d(cfg: &RunConfig) -> Result<(wkb_core::PhaseField, Vec<AmplitudeField>)> {
    let g = grid(cfg);
    let spec = cfg.potential.as_ref().unwrap().build()?;
    let phase = build_phase(
        &spec,
        cfg.mass,
        cfg.beta.unwrap(),
        &g,
        cfg.anchor,
        cfg.margin,
    )?;
    let h = solve_hierarchy(&phase, &cfg.profile.build()?, &g, cfg.order, cfg.transport)?;
    Ok((phase, h.report_fields()))
}

fn hj_benchmark() -> Result<Outcome> {
    let cfg = config("01_hj_harmonic.json");
    let g = grid(&cfg);
    let spec = cfg.potential.as_ref().unwrap().build()?;
    let phase = build_phase(
        &spec,
        cfg.mass,
        cfg.beta.unwrap(),
        &g,
        cfg.anchor,
        cfg.margin,
    )?;
    let r = hj_residual(&phase, &spec);
    outcome(
        r <= 1e-10,
        format!("max HJ residual {r:.2e} (tol 1e-10, nx {})", g.nx),
    )
}

fn harmonic_oracle() -> Result<Outcome> {
    let cfg = config("02_transport_harmonic_a0.json");
    let g = grid(&cfg);
    let profile = cfg.profile.build()?;
    let (_, fields) = solve_1d(&cfg)?;
    let (m, beta) = (cfg.mass, cfg.beta.unwrap());
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    let (mut sub_minus, mut sub_plus) = (0.0f64, 0.0f64);
    for i in 0..g.nx {
        for n in 0..g.nt {
            let (x, t) = (g.x(i), g.t(n));
            let exact = harmonic_a0_oracle(m, beta, &profile, x, t)?;
            err = err.max((fields[0].values()[[i, n]] - exact).abs());
            scale = scale.max(exact.abs());
            sub_minus = sub_minus
                .max(harmonic_a0_substitution_residual(m, beta, &profile, -0.25, x, t)?.abs());
            sub_plus = sub_plus
                .max(harmonic_a0_substitution_residual(m, beta, &profile, 0.25, x, t)?.abs());
        }
    }
    let rel = err / scale;
    outcome(
        rel <= 1e-8 && sub_minus <= 1e-10 && sub_plus >= 0.1,
        format!(
            "oracle rel err {rel:.2e} (tol 1e-8); substitution residual exponent -1/4: {sub_minus:.2e} (tol 1e-10), +1/4: {sub_plus:.2e} (need >= 0.1)"
        ),
    )
}

fn sweep_configs() -> Vec<RunConfig> {
    (0..=2)
        .map(|n| config(&format!("03_04_sweep_harmonic_n{n}.json")))
        .collect()
}

fn remainder_identity() -> Result<Outcome> {
    let mut errs = vec![];
    for cfg in sweep_configs() {
        let (phase, fields) = solve_1d(&cfg)?;
        let psi = assemble_psi(&phase, &fields, 0.05)?;
        let spec = cfg.potential.as_ref().unwrap().build()?;
        let lpsi = apply_l_algebraic(&psi, &spec, cfg.transport.diff_order)?;
        let rem = wkb_core::series::predicted_remainder(&psi, cfg.transport.diff_order);
        errs.push(lpsi.relative_deviation(&rem)?);
    }
    let worst = errs.iter().fold(0.0f64, |m, e| m.max(*e));
    outcome(
        worst <= 1e-6,
        format!(
            "identity error at hbar 0.05 for N=0,1,2: {} (tol 1e-6)",
            sci(&errs)
        ),
    )
}

fn order_scaling() -> Result<Outcome> {
    let start = Instant::now();
    let mut slopes = vec![];
    let mut ok = true;
    for cfg in sweep_configs() {
        let (phase, fields) = solve_1d(&cfg)?;
        let rep = order_sweep_from_fields(&phase, &fields, &cfg.hbar, cfg.transport.diff_order)?;
        let slope = rep.slope().unwrap_or(f64::NAN);
        ok &= (slope - (cfg.order as f64 + 2.0)).abs() <= 0.1;
        slopes.push(slope);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok && secs <= 30.0,
        format!("slopes for N=0,1,2: {slopes:.4?} (expect N+2 +- 0.1); runtime {secs:.2} s (limit 30 s)"),
    )
}

fn plane_wave() -> Result<Outcome> {
    // algebraic path on the committed fixture
    let cfg = config("05_plane_wave.json");
    let (phase, fields) = solve_1d(&cfg)?;
    let spec = PotentialSpec::Free;
    let mut alg = 0.0f64;
    for &hbar in &cfg.hbar {
        let psi = assemble_psi(&phase, &fields, hbar)?;
        alg = alg.max(apply_l_algebraic(&psi, &spec, cfg.transport.diff_order)?.max_abs());
    }
    // direct path needs hx, ht resolving the carrier wavelength and period
    let (m, beta, hbar) = (cfg.mass, cfg.beta.unwrap(), 0.05);
    let g = SpaceTimeGrid::new(-0.1, 0.1, 41, 0.1, 11)?;
    let phase = build_phase(&spec, m, beta, &g, Some(0.0), cfg.margin)?;
    let h = solve_hierarchy(&phase, &InitialProfile::Constant(1.0), &g, 0, cfg.transport)?;
    let psi = assemble_psi(&phase, &h.report_fields(), hbar)?;
    let direct = apply_l_direct(&psi, &spec)?.max_abs();
    let p = (2.0 * m * beta).sqrt();
    let (k, w) = (p / hbar, beta / hbar);
    let amp = p.powf(-0.5);
    let bound = amp
        * (hbar * hbar / (2.0 * m) * k.powi(4) * g.hx().powi(2) / 12.0
            + hbar * w.powi(3) * g.ht().powi(2) / 6.0);
    outcome(
        alg == 0.0 && direct <= bound,
        format!("algebraic max |L Psi| = {alg:e} (need exactly 0); direct {direct:.3e} <= bound {bound:.3e}"),
    )
}

fn free_a1() -> Result<Outcome> {
    let cfg = config("06_free_a1.json");
    let g = grid(&cfg);
    let (phase, fields) = solve_1d(&cfg)?;
    let profile = cfg.profile.build()?;
    let (m, beta) = (cfg.mass, cfg.beta.unwrap());
    let p = (2.0 * m * beta).sqrt();
    // a_0 = p^{-1/2} phi(u), so the oracle carries the same factor
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for i in 0..g.nx {
        for n in 0..g.nt {
            let (x, t) = (g.x(i), g.t(n));
            let u = t - phase.time_of_flight(x)?;
            let exact = p.powf(-0.5) * t * profile.eval3(u).2 / (4.0 * beta);
            err = err.max((fields[1].values()[[i, n]] - exact).abs());
            scale = scale.max(exact.abs());
        }
    }
    let rel = err / scale;
    outcome(
        rel <= 1e-6,
        format!("max rel err {rel:.2e} (tol 1e-6, nx {} nt {})", g.nx, g.nt),
    )
}

fn continuity() -> Result<Outcome> {
    let mut res = vec![];
    let mut consts = vec![];
    for name in ["07_continuity_coarse.json", "07_continuity_fine.json"] {
        let cfg = config(name);
        let g = grid(&cfg);
        let (phase, fields) = solve_1d(&cfg)?;
        let r = continuity_residual(&phase, &fields[0], DiffOrder::SECOND)?;
        consts.push(r / (g.hx().powi(2) + g.ht().powi(2)));
        res.push(r);
    }
    let ratio = res[0] / res[1];
    outcome(
        (ratio - 4.0).abs() <= 0.5,
        format!(
            "residuals {}, C = {consts:.4?}, refinement ratio {ratio:.3} (expect 4 +- 0.5)",
            sci(&res)
        ),
    )
}

fn multidim() -> Result<Outcome> {
    let cfg = config("08_multidim_free_2d.json");
    let md = cfg.multidim.as_ref().unwrap();
    let grid: GridD = md.grid()?;
    let specs = md
        .axes
        .iter()
        .map(|a| a.potential.build())
        .collect::<Result<Vec<_>>>()?;
    let betas: Vec<f64> = md.axes.iter().map(|a| a.beta).collect();
    let anchors: Vec<Option<f64>> = md.axes.iter().map(|a| a.anchor).collect();
    let profiles = md
        .axes
        .iter()
        .map(|a| a.profile.build())
        .collect::<Result<Vec<_>>>()?;
    let phase = build_phase_d(&specs, cfg.mass, &betas, &grid, &anchors, cfg.margin)?;
    let fields =
        solve_hierarchy_d(&phase, &profiles, &grid, cfg.order, cfg.transport)?.report_fields();

    let per_axis = (0..grid.dim())
        .map(|i| {
            let h = solve_hierarchy(
                &phase.axes[i],
                &profiles[i],
                &grid.axis_grid(i),
                0,
                cfg.transport,
            )?;
            Ok(h.report_fields().remove(0))
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&AmplitudeField> = per_axis.iter().collect();
    let product = tensor_product(&refs, &grid)?;
    let sep = (fields[0].values() - product.values())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));

    let mut ids = vec![];
    let mut slope0 = f64::NAN;
    for n in 0..=cfg.order {
        let rep = order_sweep_d(&phase, &fields[..=n], &cfg.hbar, cfg.transport.diff_order)?;
        let at = rep
            .entries
            .iter()
            .find(|e| e.hbar == 0.05)
            .expect("sweep includes hbar 0.05");
        ids.push(at.identity_error);
        if n == 0 {
            slope0 = rep.slope().unwrap_or(f64::NAN);
        }
    }
    let worst = ids.iter().fold(0.0f64, |m, e| m.max(*e));
    outcome(
        sep <= 1e-8 && worst <= 1e-6 && (slope0 - 2.0).abs() <= 0.15,
        format!(
            "2-D separability {sep:.2e} (tol 1e-8); identity error at hbar 0.05 for N=0..{}: {} (tol 1e-6); N=0 slope {slope0:.4} (expect 2 +- 0.15)",
            cfg.order,
            sci(&ids)
        ),
    )
}

fn berry() -> Result<Outcome> {
    let cfg = config("09_berry_two_level.json");
    let b = cfg.berry.as_ref().unwrap();
    let (theta, k) = (b.theta.unwrap(), b.states.unwrap());
    let lp = sample_two_level_loop(theta, k)?;
    let gamma = discrete_berry_phase(&lp)?;
    let err = angle_distance(gamma, two_level_ground_phase(theta));

    let mut rng = StdRng::seed_from_u64(7);
    let chi: Vec<f64> = (0..k).map(|_| rng.random_range(-10.0..10.0)).collect();
    let gauge = angle_distance(discrete_berry_phase(&lp.regauged(&chi)?)?, gamma);

    let v = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    let constant = discrete_berry_phase(&StateLoop::new(vec![v; 16])?)?;
    outcome(
        err <= 1e-3 && gauge <= 1e-12 && constant == 0.0,
        format!(
            "theta pi/2, K {k}: gamma {gamma:.6}, error {err:.2e} (tol 1e-3); regauge shift {gauge:.1e} (tol 1e-12); constant loop {constant}"
        ),
    )
}

fn determinism() -> Result<Outcome> {
    let cfg = experiments().join("03_04_sweep_harmonic_n2.json");
    let dir = tempfile::tempdir().expect("tempdir");
    let mut reports = vec![];
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_wkb"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .expect("run wkb");
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        reports.push(std::fs::read(out.join("report.json")).expect("report"));
    }
    outcome(
        reports[0] == reports[1],
        format!(
            "two runs of the harmonic sweep: report.json {} bytes, identical: {}",
            reports[0].len(),
            reports[0] == reports[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("1 hamilton-jacobi residual", hj_benchmark),
        ("2 harmonic transport oracle", harmonic_oracle),
        ("3 remainder identity", remainder_identity),
        ("4 order scaling", order_scaling),
        ("5 plane wave", plane_wave),
        ("6 free a1 closed form", free_a1),
        ("7 continuity law", continuity),
        ("8 multi-dimensional", multidim),
        ("9 berry phase", berry),
        ("10 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "[{}] {name}: {detail} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
