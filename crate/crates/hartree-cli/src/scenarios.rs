use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hartree_core::evolution::{self, StopReason, ThetaProfile, Trajectory, Window};
use hartree_core::functionals::{self, natural_profile, DEFAULT_TAIL_TOL};
use hartree_core::ground_state::{self, GroundStateResult};
use hartree_core::{hartree, ComplexRadialField, LabError, ModelParams, RadialGrid};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{Profile, RunConfig, Scenario};
use crate::io::{self, GroundStateFile};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.to_string(), pass, detail }
    }
}

/// What a run leaves behind: checks, headline numbers and written files.
#[derive(Default)]
struct Run {
    checks: Vec<Check>,
    results: Map<String, Value>,
    artifacts: Vec<String>,
}

impl Run {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check::new(name, pass, detail));
    }

    fn set(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), String> {
        fs::write(dir.join(name), contents).map_err(|e| format!("writing {name}: {e}"))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

pub struct Outcome {
    pub pass: bool,
    pub summary: Value,
}

/// Run the configured scenario, write its artifacts and `summary.json`.
pub fn run(cfg: &RunConfig) -> Outcome {
    let dir = cfg.out.clone();
    let mut run = Run::default();
    let result = fs::create_dir_all(&dir).map_err(|e| format!("creating {}: {e}", dir.display())).and_then(|_| {
        match cfg.scenario {
            Scenario::GroundState => ground_state_scenario(cfg, &dir, &mut run),
            Scenario::Evolve => evolve_scenario(cfg, &dir, &mut run).map(|_| ()),
            Scenario::Blowup => blowup_scenario(cfg, &dir, &mut run),
            Scenario::Concentrate => concentrate_scenario(cfg, &dir, &mut run),
            Scenario::Verify => verify_scenario(cfg, &dir, &mut run),
            Scenario::Sweep => sweep_scenario(cfg, &dir, &mut run),
        }
    });
    let error = result.err();
    let pass = error.is_none() && run.checks.iter().all(|c| c.pass);
    let checks: Vec<Value> =
        run.checks.iter().map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail })).collect();
    run.artifacts.push("summary.json".into());
    let summary = json!({
        "scenario": cfg.scenario.name(),
        "pass": pass,
        "error": error,
        "config": cfg.resolved,
        "config_hash": cfg.hash(),
        "checks": checks,
        "results": Value::Object(run.results),
        "artifacts": run.artifacts,
    });
    if let Err(e) = io::write_json(&dir.join("summary.json"), &summary) {
        eprintln!("could not write summary: {e}");
        return Outcome { pass: false, summary };
    }
    Outcome { pass, summary }
}

fn lab(e: LabError) -> String {
    e.to_string()
}

fn make_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>, String> {
    RadialGrid::new(cfg.params, cfg.n, cfg.r_max).map(Arc::new).map_err(lab)
}

fn solve(cfg: &RunConfig, grid: &Arc<RadialGrid>) -> Result<GroundStateResult, String> {
    ground_state::solve_ground_state(grid, &cfg.ground_state).map_err(|e| format!("ground state: {e}"))
}

fn with_mass(u: &ComplexRadialField, m: f64) -> Result<ComplexRadialField, String> {
    let m0 = functionals::mass(u);
    if !(m0 > 0.0) {
        return Err("cannot rescale the zero field".into());
    }
    Ok(u.scaled(Complex64::new((m / m0).sqrt(), 0.0)))
}

/// Initial data for the named profile.
pub fn initial_field(cfg: &RunConfig, grid: &Arc<RadialGrid>, gs: &GroundStateResult) -> Result<ComplexRadialField, String> {
    let spec = &cfg.initial;
    let amp = spec.amplitude;
    let u = match &spec.profile {
        Profile::Gaussian { sigma } => {
            let s2 = 2.0 * sigma * sigma;
            natural_profile(grid.clone(), |r| amp * (-r * r / s2).exp()).map_err(lab)?
        }
        Profile::Shell { s0, width } => {
            let w2 = 2.0 * width * width;
            ComplexRadialField::from_real_fn(grid.clone(), |r| amp * (-(r - s0).powi(2) / w2).exp()).map_err(lab)?
        }
        Profile::GroundState { mu, nu_s } => {
            return functionals::rescale(&gs.q, *mu, *nu_s, DEFAULT_TAIL_TOL).map_err(|e| format!("initial data: {e}"))
        }
        Profile::PseudoConformal { t_star, theta, t0, omega } => {
            return evolution::pseudo_conformal_family(&gs.q, *t_star, *theta, *omega, *t0)
                .map_err(|e| format!("initial data: {e}"))
        }
        Profile::File(path) => read_field_file(path, grid)?,
    };
    match spec.mass_fraction {
        Some(f) if matches!(spec.profile, Profile::Gaussian { .. } | Profile::Shell { .. } | Profile::File(_)) => {
            with_mass(&u, f * gs.m_gs)
        }
        _ => Ok(u),
    }
}

/// Load a ground-state text file and resample it onto `grid` through the
/// mode expansion of its own grid.
fn read_field_file(path: &Path, grid: &Arc<RadialGrid>) -> Result<ComplexRadialField, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file = GroundStateFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if file.d != grid.d() || file.a != grid.params.a {
        return Err(format!(
            "{}: field is for (d, a) = ({}, {}), run is ({}, {})",
            path.display(),
            file.d,
            file.a,
            grid.d(),
            grid.params.a
        ));
    }
    let src = Arc::new(RadialGrid::new(ModelParams::new(file.d, file.a).map_err(lab)?, file.n, file.r_max).map_err(lab)?);
    let vals: Vec<Complex64> = file.q.iter().map(|&q| Complex64::new(q, 0.0)).collect();
    let resampled = src.evaluate_at(&vals, &grid.nodes);
    ComplexRadialField::new(grid.clone(), resampled).map_err(lab)
}

fn ground_state_scenario(cfg: &RunConfig, dir: &Path, run: &mut Run) -> Result<(), String> {
    let grid = make_grid(cfg)?;
    let gs = solve(cfg, &grid)?;
    let file = GroundStateFile {
        d: cfg.params.d,
        a: cfg.params.a,
        n: cfg.n,
        r_max: cfg.r_max,
        m_gs: gs.m_gs,
        residual: gs.residual,
        r: grid.nodes.clone(),
        q: gs.q.real_parts(),
    };
    run.write(dir, "ground_state.txt", &file.render())?;
    let [h_lv, m_lv, m_h] = gs.pohozaev();
    run.set("M_gs", json!(gs.m_gs));
    run.set("residual", json!(gs.residual));
    run.set("iterations", json!(gs.iterations));
    run.set("quantities", json!(gs.quantities));
    run.set("pohozaev", json!({ "H-L_V": h_lv, "M-L_V": m_lv, "M-H": m_h }));
    run.check("pohozaev |H - L_V| / M_gs < 1e-6", h_lv < 1e-6, format!("{h_lv:e}"));
    run.check("pohozaev |M - L_V| / M_gs < 1e-6", m_lv < 1e-6, format!("{m_lv:e}"));
    run.check("pohozaev |M - H| / M_gs < 1e-6", m_h < 1e-6, format!("{m_h:e}"));
    run.check("Euler-Lagrange residual < 1e-6", gs.residual < 1e-6, format!("{:e}", gs.residual));
    Ok(())
}

struct Evolved {
    traj: Trajectory,
    gs: GroundStateResult,
    grid: Arc<RadialGrid>,
}

fn evolve_scenario(cfg: &RunConfig, dir: &Path, run: &mut Run) -> Result<Evolved, String> {
    evolve_with(cfg, dir, run, cfg.windows.clone())
}

fn evolve_with(cfg: &RunConfig, dir: &Path, run: &mut Run, windows: Vec<Window>) -> Result<Evolved, String> {
    let grid = make_grid(cfg)?;
    let gs = solve(cfg, &grid)?;
    let u0 = initial_field(cfg, &grid, &gs)?;
    let icfg = evolution::IntegratorConfig { windows, ..cfg.integrator.clone() };
    let traj = evolution::evolve(&u0, &icfg).map_err(|e| format!("evolution: {e}"))?;
    run.write(dir, "trajectory.csv", &io::trajectory_csv(&traj))?;
    io::write_json(&dir.join("trajectory.json"), &io::trajectory_sidecar(cfg, &traj)).map_err(|e| e.to_string())?;
    run.artifacts.push("trajectory.json".into());

    let q0 = traj.samples[0].q;
    let last = traj.last();
    let mass_drift = traj.max_drift(|s| s.q.m);
    let energy_drift = traj.max_drift(|s| s.q.e);
    run.set("M_gs", json!(gs.m_gs));
    run.set("initial", json!(q0));
    run.set("final", json!({ "t": last.t, "quantities": last.q, "Gamma": last.gamma, "GammaPrime": last.gamma_prime }));
    run.set("mass_over_M_gs", json!(q0.m / gs.m_gs));
    run.set("stop_reason", json!(traj.stop_reason));
    run.set("steps", json!(traj.steps));
    run.set("mass_drift", json!(mass_drift));
    run.set("energy_drift", json!(energy_drift));

    let tol = 1e-11 * last.t.max(1.0);
    run.check("mass drift < 1e-11 per unit time", mass_drift < tol, format!("{mass_drift:e}"));

    if traj.samples.len() >= 3 {
        let ts = traj.times();
        // relative to 16 E(u0), floored so that zero-energy data (Q itself) stays meaningful
        let scale = 16.0 * q0.e.abs().max(1e-3 * q0.h);
        let mut worst: f64 = 0.0;
        for k in 1..ts.len() - 1 {
            let (h1, h2) = (ts[k] - ts[k - 1], ts[k + 1] - ts[k]);
            let (g0, g1, g2) = (traj.samples[k - 1].gamma, traj.samples[k].gamma, traj.samples[k + 1].gamma);
            let second = 2.0 * (h1 * g2 - (h1 + h2) * g1 + h2 * g0) / (h1 * h2 * (h1 + h2));
            worst = worst.max((second - 16.0 * q0.e).abs() / scale);
        }
        let flagged = traj.samples.iter().filter(|s| s.boundary_flag).count();
        run.set("virial_max_rel_error", json!(worst));
        run.check(
            "virial: finite-difference Gamma'' = 16 E(u0) within 1%",
            worst < 1e-2,
            format!("{worst:e} ({flagged} boundary-flagged samples)"),
        );
    }
    if q0.m < gs.m_gs * (1.0 - 1e-6) {
        let factor = 1.0 - q0.m / gs.m_gs;
        let worst = traj.samples.iter().map(|s| s.q.h * factor).fold(0.0, f64::max);
        let bound = q0.e * (1.0 + 1e-3);
        run.check(
            "below threshold: H (1 - M/M_gs) <= E(u0) (1 + 1e-3)",
            worst <= bound,
            format!("max {worst:e} vs {bound:e}"),
        );
    }
    Ok(Evolved { traj, gs, grid })
}

fn blowup_scenario(cfg: &RunConfig, dir: &Path, run: &mut Run) -> Result<(), String> {
    let ev = evolve_scenario(cfg, dir, run)?;
    let e0 = ev.traj.samples[0].q.e;
    let last = ev.traj.last();
    let cells = (last.q.m / last.q.h).sqrt() / ev.grid.origin_spacing();
    run.set("final_scale_cells", json!(cells));
    match evolution::fit_blowup(&ev.traj) {
        Ok(fit) => {
            let gamma_err = (fit.gamma_c / (8.0 * e0) - 1.0).abs();
            run.set("fit", json!(fit));
            run.set("gamma_constant_vs_8E", json!({ "fit": fit.gamma_c, "8E": 8.0 * e0, "rel_error": gamma_err }));
            run.check("H growth exponent 2 +- 0.1", (fit.p - 2.0).abs() <= 0.1, format!("p = {}", fit.p));
            run.check("at least one decade of H growth", fit.h_decades >= 1.0, format!("{} decades", fit.h_decades));
            run.check(
                "Gamma / (T* - t)^2 = 8 E(u0) within 2%",
                gamma_err < 0.02 && fit.gamma_spread < 0.02,
                format!("constant error {gamma_err:e}, spread {:e}", fit.gamma_spread),
            );
            if let Profile::PseudoConformal { t_star, .. } = cfg.initial.profile {
                let err = (fit.t_star / t_star - 1.0).abs();
                run.check("fitted T* within 2% of the constructed T*", err < 0.02, format!("{} vs {t_star}", fit.t_star));
            }
            if ev.traj.stop_reason == StopReason::Completed {
                run.check("trajectory reached the blow-up regime", false, "completed without a stop event".into());
            }
        }
        Err(e) => run.check("blow-up fit", false, e.to_string()),
    }
    Ok(())
}

fn concentrate_scenario(cfg: &RunConfig, dir: &Path, run: &mut Run) -> Result<(), String> {
    let mut windows = cfg.windows.clone();
    if windows.is_empty() {
        let t_star = cfg.resolved["concentration.t_star"].parse().unwrap_or(1.0);
        windows.push(Window::SqrtToBlowup { t_star });
    }
    let ev = evolve_with(cfg, dir, run, windows.clone())?;
    let last = ev.traj.last();
    let mut per = Map::new();
    for (w, (label, c)) in windows.iter().zip(ev.traj.window_labels.iter().zip(&last.conc)) {
        per.insert(label.clone(), json!({ "mass": c, "over_M_gs": c / ev.gs.m_gs, "radius": w.radius(last.t) }));
        if let Window::SqrtToBlowup { .. } = w {
            run.check(
                &format!("{label} holds >= 0.95 M_gs at the last sample"),
                *c >= 0.95 * ev.gs.m_gs,
                format!("{} M_gs at t = {}", c / ev.gs.m_gs, last.t),
            );
        }
    }
    run.set("concentration", Value::Object(per));
    Ok(())
}

fn verify_scenario(cfg: &RunConfig, dir: &Path, run: &mut Run) -> Result<(), String> {
    let grid = make_grid(cfg)?;
    let gs = solve(cfg, &grid)?;
    let theta = ThetaProfile { radius: cfg.verify.theta_radius };
    let s = cfg.verify.theta_s;
    let d = cfg.params.d;
    let hardy_bound = functionals::hardy_bound(d);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from(
        "field,hardy_ratio,J_over_M_gs,rearr_mass_rel,rearr_grad_ratio,rearr_lv_ratio,hls_ratio,rotated_mismatch_rel,discriminant\n",
    );
    let (mut hardy_bad, mut gn_bad, mut rearr_bad, mut rot_bad, mut disc_bad) = (0, 0, 0, 0, 0);
    let mut hls_max: f64 = 0.0;
    let mut hls_finite = true;
    let mut min_j = f64::INFINITY;
    for k in 0..cfg.verify.fields {
        let u = ground_state::random_smooth_field(&grid, &mut rng, true).map_err(lab)?;
        let w = ground_state::random_smooth_field(&grid, &mut rng, true).map_err(lab)?;

        let hardy = functionals::hardy_ratio(&u).map_err(lab)?;
        hardy_bad += usize::from(hardy > hardy_bound);

        let q = functionals::functionals(&u).map_err(lab)?;
        let j = q.j.map(|j| j / gs.m_gs).unwrap_or(f64::NAN);
        min_j = min_j.min(j);
        gn_bad += usize::from(!(j >= 1.0 - 1e-6));

        let star = functionals::rearrange_decreasing(&u).map_err(lab)?;
        let dm = (functionals::mass(&star) / q.m - 1.0).abs();
        let gr = functionals::gradient_sq(&star) / functionals::gradient_sq(&u);
        let lr = hartree::lv_value(&star) / q.lv;
        rearr_bad += usize::from(dm > 1e-12 || gr > 1.0 + 1e-9 || lr < 1.0 - 1e-9);

        let v = ComplexRadialField::new(grid.clone(), u.values().iter().zip(w.values()).map(|(a, b)| a + 1e-2 * b).collect())
            .map_err(lab)?;
        let hls = functionals::lv_continuity_ratio(&u, &v).map_err(lab)?.unwrap_or(0.0);
        hls_finite &= hls.is_finite();
        hls_max = hls_max.max(hls);

        let rot = evolution::rotated_energy_check(&u, theta, s, None).map_err(lab)?;
        let rel = rot.mismatch / (rot.lhs.abs() + rot.quadratic * s * s).max(1e-300);
        rot_bad += usize::from(rel > 1e-6);
        let at_threshold = with_mass(&u, gs.m_gs)?;
        let at = evolution::rotated_energy_check(&at_threshold, theta, s, Some(gs.m_gs)).map_err(lab)?;
        let disc = at.discriminant.unwrap_or(f64::NAN);
        let scale = at.linear.powi(2) + 2.0 * at.energy.abs() * at.quadratic;
        disc_bad += usize::from(!(disc <= 1e-9 * scale));

        csv.push_str(&format!("{k},{hardy:e},{j:e},{dm:e},{gr:e},{lr:e},{hls:e},{rel:e},{disc:e}\n"));
    }
    run.write(dir, "verify.csv", &csv)?;
    let n = cfg.verify.fields;
    run.set("M_gs", json!(gs.m_gs));
    run.set("fields", json!(n));
    run.set("min_J_over_M_gs", json!(min_j));
    run.set("hls_fitted_constant", json!(hls_max));
    run.check(&format!("Hardy ratio <= (2/(d-2))^2 = {hardy_bound}"), hardy_bad == 0, format!("{hardy_bad}/{n} violations"));
    run.check("sharp GN: J(u) >= M_gs (1 - 1e-6)", gn_bad == 0, format!("{gn_bad}/{n} violations, min J/M_gs {min_j}"));
    run.check("rearrangement: M kept, gradient down, L_V up", rearr_bad == 0, format!("{rearr_bad}/{n} violations"));
    run.check("HLS continuity: finite fitted constant", hls_finite, format!("C = {hls_max:e}"));
    run.check("rotated-energy identity within 1e-6", rot_bad == 0, format!("{rot_bad}/{n} mismatches"));
    run.check("rotated-energy discriminant <= 0 at M_gs", disc_bad == 0, format!("{disc_bad}/{n} violations"));
    Ok(())
}

fn sweep_scenario(cfg: &RunConfig, dir: &Path, run: &mut Run) -> Result<(), String> {
    let sw = &cfg.sweep;
    let jobs: Vec<(usize, String, PathBuf)> =
        sw.values.iter().enumerate().map(|(i, v)| (i, v.clone(), dir.join(format!("sweep-{i:03}")))).collect();
    let run_one = |(_, value, sub_dir): &(usize, String, PathBuf)| -> Value {
        let out = sub_dir.to_string_lossy().into_owned();
        match cfg.with(&[(sw.key.as_str(), value.as_str()), ("scenario", sw.scenario.name()), ("output.dir", out.as_str())]) {
            Ok(sub) => {
                let o = self::run(&sub);
                json!({ "value": value, "dir": sub_dir.file_name().map(|s| s.to_string_lossy().into_owned()), "pass": o.pass,
                        "error": o.summary["error"], "results": o.summary["results"] })
            }
            Err(e) => json!({ "value": value, "pass": false, "error": e.to_string() }),
        }
    };
    let mut rows: Vec<Value> = vec![Value::Null; jobs.len()];
    let threads = sw.threads.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let jobs = &jobs;
                let run_one = &run_one;
                scope.spawn(move || jobs.iter().skip(t).step_by(threads).map(|j| (j.0, run_one(j))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (i, row) in h.join().expect("sweep worker panicked") {
                rows[i] = row;
            }
        }
    });
    let failed = rows.iter().filter(|r| r["pass"] != json!(true)).count();
    run.check("every sweep run passed", failed == 0, format!("{failed}/{} failed", rows.len()));
    run.set("key", json!(sw.key));
    run.set("runs", Value::Array(rows));
    Ok(())
}
