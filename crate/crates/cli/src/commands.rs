use cavelim::classical::{
    integrate_effective_classical, integrate_full_classical, polariton_analysis, transmission_spectrum,
    transmission_spectrum_laser_frame, ClassicalState, DriveSpec, SpectrumMode, SpectrumPoint,
};
use cavelim::dipole::coupling_map;
use cavelim::elimination::{
    coupling_modification, diagonalize_dissipator, linewidth_modification, validity_report, ValidityOptions,
    ValidityReport, Verdict,
};
use cavelim::ode::Rk4Options;
use cavelim::quantum::{build_effective_model, build_full_model, evolve, HilbertSpec, InitialState};
use cavelim::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, Config, System};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, fmt_f64, json_bytes, OutputDir, PointStatus, MANIFEST_NAME};
use crate::{
    sweep, Cli, Command, DipoleMapArgs, DynamicsArgs, Globals, InitialArg, ModelArg, SolverArg, SpectrumArgs,
    SpectrumModeArg, ValidityArgs,
};

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Eliminate(a) => eliminate(g, a),
        Command::Validate(a) => validate(g, a),
        Command::Spectrum(a) => spectrum(g, a),
        Command::Dynamics(a) => dynamics(g, a),
        Command::Sweep => run_sweep(g),
        Command::DipoleMap(a) => dipole_map(g, a),
    }
}

fn load_config(g: &Globals) -> CliResult<Config> {
    let path = g.config.as_ref().ok_or_else(|| CliError::config("--config is required for this command"))?;
    config::load(path)
}

fn snapshot<A: Serialize>(g: &Globals, cfg: Option<&Config>, args: &A) -> Value {
    json!({
        "file": g.config,
        "resolved": cfg,
        "options": args,
    })
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn report_written(out: OutputDir, command: &str, config: Value, warnings: Vec<String>) -> CliResult<()> {
    let path = out.finish(command, config, vec![PointStatus { index: 0, status: "ok".into() }], warnings)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn verdict_check(g: &Globals, report: &ValidityReport, warnings: &mut Vec<String>) -> CliResult<()> {
    match report.verdict {
        Verdict::Pass => Ok(()),
        Verdict::Marginal => {
            warnings.push("elimination validity is marginal".into());
            Ok(())
        }
        Verdict::Fail if g.strict => Err(CliError::Validity(format!(
            "verdict fail (dipole ratio {:.3e}, max coupling ratio {:.3e})",
            report.dipole_ratio, report.max_coupling_ratio
        ))),
        Verdict::Fail => {
            warnings.push("elimination validity verdict is fail; results are unreliable".into());
            Ok(())
        }
    }
}

fn system_of(cfg: &Config, what: &str) -> CliResult<System> {
    if cfg.effective.is_some() {
        return Err(CliError::config(format!("{what} needs a physical system, not [effective] parameters")));
    }
    cfg.system()
}

fn eliminate(g: &Globals, a: &ValidityArgs) -> CliResult<()> {
    let cfg = load_config(g)?;
    let sys = system_of(&cfg, "eliminate")?;
    let mut warnings = sys.warnings.clone();
    let params = cavelim::elimination::effective_params(&sys.couplings, &sys.sub)?;
    let opts = ValidityOptions { n_bar: a.n_bar, ..ValidityOptions::default() };
    let report = validity_report(&sys.couplings, &sys.sub, &opts)?;
    let dissipator = diagonalize_dissipator(&params).ok();
    let single = (sys.couplings.n() == 1).then(|| {
        json!({
            "coupling": coupling_modification(&sys.couplings).ok(),
            "linewidth": linewidth_modification(&sys.couplings).ok(),
        })
    });
    let strict_result = verdict_check(g, &report, &mut warnings);
    let doc = json!({
        "manifest": MANIFEST_NAME,
        "effective": params,
        "validity": report,
        "dissipator": dissipator,
        "single_emitter": single,
        "warnings": warnings,
    });
    let bytes = json_bytes(&doc)?;
    let mut out = OutputDir::new(&g.out_dir);
    out.write("eliminate.json", &bytes)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    warn_all(&warnings);
    report_written(out, "eliminate", snapshot(g, Some(&cfg), a), warnings)?;
    strict_result
}

fn validate(g: &Globals, a: &ValidityArgs) -> CliResult<()> {
    let cfg = load_config(g)?;
    let sys = system_of(&cfg, "validate")?;
    let mut warnings = sys.warnings.clone();
    let opts = ValidityOptions { n_bar: a.n_bar, ..ValidityOptions::default() };
    let report = validity_report(&sys.couplings, &sys.sub, &opts)?;
    let strict_result = verdict_check(g, &report, &mut warnings);
    let doc = json!({
        "manifest": MANIFEST_NAME,
        "verdict": report.verdict,
        "validity": report,
        "warnings": warnings,
    });
    let mut out = OutputDir::new(&g.out_dir);
    out.write("validate.json", &json_bytes(&doc)?)?;
    println!("verdict: {}", doc["verdict"].as_str().unwrap_or("?"));
    warn_all(&warnings);
    report_written(out, "validate", snapshot(g, Some(&cfg), a), warnings)?;
    strict_result
}

fn spectrum(g: &Globals, a: &SpectrumArgs) -> CliResult<()> {
    let cfg = load_config(g)?;
    let r = cfg.resolve()?;
    let warnings = r.system.as_ref().map(|s| s.warnings.clone()).unwrap_or_default();
    let omegas = a.grid.values();
    let points: Vec<SpectrumPoint> = match a.mode {
        SpectrumModeArg::Exact => transmission_spectrum(&r.params, r.kappa_bare, a.eta, &omegas, SpectrumMode::Exact)?,
        SpectrumModeArg::Polariton => {
            transmission_spectrum(&r.params, r.kappa_bare, a.eta, &omegas, SpectrumMode::Polariton)?
        }
        SpectrumModeArg::LaserFrame => {
            let sys = r.system.as_ref().ok_or_else(|| CliError::config("laser-frame mode needs a physical system"))?;
            transmission_spectrum_laser_frame(&sys.sub, &sys.couplings, a.eta, &omegas)?
        }
    };
    let rows: Vec<Vec<String>> = points.iter().map(|p| vec![fmt_f64(p.omega_l), fmt_f64(p.t_c)]).collect();
    let sidecar = json!({
        "manifest": MANIFEST_NAME,
        "mode": a.mode,
        "eta": a.eta,
        "kappa_bare": r.kappa_bare,
        "effective": r.params,
        "polariton": polariton_analysis(&r.params).ok(),
    });
    let mut out = OutputDir::new(&g.out_dir);
    out.write("spectrum.csv", &csv_bytes(&["omega_L", "T_c"], &rows)?)?;
    out.write("spectrum.json", &json_bytes(&sidecar)?)?;
    warn_all(&warnings);
    report_written(out, "spectrum", snapshot(g, Some(&cfg), a), warnings)
}

const DYNAMICS_HEADER: [&str; 9] =
    ["t", "re_a", "im_a", "re_sigma_a", "im_sigma_a", "photon_number", "excited_a", "excited_b", "trace"];

fn dynamics(g: &Globals, a: &DynamicsArgs) -> CliResult<()> {
    let cfg = load_config(g)?;
    let r = cfg.resolve()?;
    let mut warnings = r.system.as_ref().map(|s| s.warnings.clone()).unwrap_or_default();
    let drive = match (a.eta, a.omega_l) {
        (Some(eta), Some(w)) => Some(DriveSpec::new(eta, w)?),
        _ => None,
    };
    let opts = match a.rel_tol {
        Some(tol) => Rk4Options::adaptive(a.dt, a.t_end, tol),
        None => Rk4Options::fixed(a.dt, a.t_end),
    };
    let full_system = || {
        r.system.as_ref().ok_or_else(|| CliError::config("the full model needs a physical system, not [effective]"))
    };
    let alpha = C64::new(a.alpha_re, a.alpha_im);
    let f = fmt_f64;

    let rows: Vec<Vec<String>> = match a.solver {
        SolverArg::Quantum => {
            let model = match a.model {
                ModelArg::Full => {
                    let sys = full_system()?;
                    let h = HilbertSpec::with_cap(a.n_max, sys.couplings.n(), a.dim_cap)?;
                    build_full_model(&sys.sub, &sys.couplings, h, drive.as_ref())?
                }
                ModelArg::Effective => build_effective_model(&r.params, a.n_max, drive.as_ref())?,
            };
            let initial = match a.initial {
                InitialArg::Vacuum => InitialState::Vacuum,
                InitialArg::AExcited => InitialState::AExcited,
                InitialArg::Coherent => InitialState::Coherent(alpha),
            };
            let traj = evolve(&model, &initial.density_matrix(&model.hilbert)?, &opts)?;
            warnings.extend(traj.warnings);
            traj.observables
                .iter()
                .map(|o| {
                    vec![
                        f(o.t),
                        f(o.a.re),
                        f(o.a.im),
                        f(o.sigma_a.re),
                        f(o.sigma_a.im),
                        f(o.photon_number),
                        f(o.excited_a),
                        f(o.excited_b),
                        f(o.trace),
                    ]
                })
                .collect()
        }
        SolverArg::Classical => {
            let (alpha0, beta_a0) = match a.initial {
                InitialArg::Vacuum => (C64::from(0.0), C64::from(0.0)),
                InitialArg::AExcited => (C64::from(0.0), C64::from(1.0)),
                InitialArg::Coherent => (alpha, C64::from(0.0)),
            };
            let traj = match a.model {
                ModelArg::Full => {
                    let sys = full_system()?;
                    let init = ClassicalState::subsystem(alpha0, beta_a0, sys.couplings.n());
                    integrate_full_classical(&sys.sub, &sys.couplings, &init, drive.as_ref(), &opts)?
                }
                ModelArg::Effective => {
                    integrate_effective_classical(&r.params, alpha0, beta_a0, drive.as_ref(), &opts)?
                }
            };
            warnings.extend(traj.warnings);
            traj.times
                .iter()
                .zip(&traj.states)
                .map(|(&t, s)| {
                    vec![
                        f(t),
                        f(s.alpha.re),
                        f(s.alpha.im),
                        f(s.beta_a.re),
                        f(s.beta_a.im),
                        f(s.alpha.norm_sqr()),
                        f(s.beta_a.norm_sqr()),
                        f(s.beta.norm_squared()),
                        f(s.norm_sqr()),
                    ]
                })
                .collect()
        }
    };
    let mut out = OutputDir::new(&g.out_dir);
    out.write("dynamics.csv", &csv_bytes(&DYNAMICS_HEADER, &rows)?)?;
    warn_all(&warnings);
    report_written(out, "dynamics", snapshot(g, Some(&cfg), a), warnings)
}

fn dipole_map(g: &Globals, a: &DipoleMapArgs) -> CliResult<()> {
    let points = coupling_map(&a.theta.values(), &a.xi.values())?;
    let rows: Vec<Vec<String>> = points
        .into_iter()
        .map(|p| if a.clamp { p.display() } else { p })
        .map(|p| vec![fmt_f64(p.theta), fmt_f64(p.xi), fmt_f64(p.g), fmt_f64(p.f)])
        .collect();
    let mut out = OutputDir::new(&g.out_dir);
    out.write("dipole_map.csv", &csv_bytes(&["theta", "xi", "g", "f"], &rows)?)?;
    report_written(out, "dipole-map", snapshot(g, None, a), Vec::new())
}

fn run_sweep(g: &Globals) -> CliResult<()> {
    let path = g.config.as_ref().ok_or_else(|| CliError::config("--config must name a sweep file"))?;
    let plan = sweep::load(path)?;
    let threads = g.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::config("--threads must be positive"));
    }
    let rows = plan.run(threads)?;
    let header = plan.header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = OutputDir::new(&g.out_dir);
    out.write("sweep.csv", &csv_bytes(&header, &plan.csv_rows(&rows))?)?;

    let points: Vec<PointStatus> = rows
        .iter()
        .enumerate()
        .map(|(index, r)| PointStatus {
            index,
            status: match &r.result {
                Ok(_) => "ok".into(),
                Err(e) => format!("error: {e}"),
            },
        })
        .collect();
    let failed = points.iter().filter(|p| p.status != "ok").count();
    let mut warnings = Vec::new();
    if failed > 0 {
        warnings.push(format!("{failed} of {} sweep points failed", points.len()));
    }
    warn_all(&warnings);
    let config = json!({
        "file": g.config,
        "sweep": plan.spec,
        "base": plan.base,
        "threads": threads,
    });
    let path = out.finish("sweep", config, points, warnings)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
