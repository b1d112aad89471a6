//! Configuration-driven entry point: continuation runs, exact sweeps,
//! Riccati flow tables, mesh export and the verification suites.
//!
//! Exit codes: 0 success, 1 invalid configuration or usage, 2 solver
//! abort, 3 verification failure.

mod config;

use clap::{Parser, Subcommand};
use config::{ConfigError, CoreChoice, RunConfig, RunMode};
use ksurf::continuation::{
    continue_to, ContinuationState, DetLaw, ForcingMode, SolverConfig,
};
use ksurf::equiflow::{classify_branch, evolve_eigen};
use ksurf::foliation::{
    convergence_sweep, exact_fuchsian_leaf, CoreDescriptor, LeafRecord,
};
use ksurf::hypgeo::to_ball;
use ksurf::surfcalc::{BasePlaneChart, FermiGraph, ImmersionField};
use ksurf::verify;
use ksurf::Error as KsurfError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ksurf",
    about = "Constant-curvature foliations outside convex cores in hyperbolic 3-space"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the sweep or continuation described by a config file.
    Run { config: PathBuf },
    /// Tabulate closed-form vs RK4 eigenvalue evolution under
    /// equidistant flow, as CSV.
    Flow {
        /// First seed eigenvalue (>= 0).
        #[arg(long)]
        lambda1: f64,
        /// Second seed eigenvalue (>= 0).
        #[arg(long)]
        lambda2: f64,
        /// Flow time to integrate to.
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the exact constant-curvature leaf at the given k as a
    /// polygon mesh in Poincare ball coordinates (OFF format).
    ExportMesh {
        config: PathBuf,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named verification suite
    /// (riccati | bounds | fuchsian | continuation | wedge | foliation).
    Verify {
        suite: String,
        /// Override the continuation step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Write the report lines to this file as well.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Command::Run { config } => cmd_run(&config),
        Command::Flow {
            lambda1,
            lambda2,
            t_max,
            out,
        } => cmd_flow(lambda1, lambda2, t_max, out.as_deref()),
        Command::ExportMesh { config, k, out } => cmd_export_mesh(&config, k, &out),
        Command::Verify { suite, dt, report } => cmd_verify(&suite, dt, report.as_deref()),
    };
    ExitCode::from(code)
}

fn solver_exit(e: &KsurfError) -> u8 {
    match e {
        KsurfError::Abort(_) | KsurfError::SolverFailure(_) | KsurfError::Solvability(_) => {
            EXIT_SOLVER
        }
        _ => EXIT_CONFIG,
    }
}

/// Write a file through a temporary sibling and rename, so a failed run
/// never leaves a partial artifact behind.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn load_config(path: &Path) -> Result<RunConfig, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_CONFIG
    })?;
    RunConfig::from_text(&text).map_err(|e: ConfigError| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

fn chart_of(cfg: &RunConfig) -> Result<BasePlaneChart, u8> {
    BasePlaneChart::new(cfg.rho_min, cfg.rho_max, cfg.n_rho, cfg.n_theta).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

fn records_csv(records: &[LeafRecord]) -> String {
    let mut out = String::from("k,t,det_min,det_max,dist_min,dist_max,area,volume\n");
    for r in records {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.k, r.t, r.det_min, r.det_max, r.dist_min, r.dist_max, r.area, r.volume_to_core
        );
    }
    out
}

fn mesh_off(imm: &ImmersionField) -> String {
    let grid = imm.grid;
    let (n1, n2) = (grid.n1, grid.n2);
    let mut out = String::from("OFF\n");
    let _ = writeln!(out, "{} {} 0", n1 * n2, (n1 - 1) * n2);
    for p in &imm.points {
        let b = to_ball(p);
        let _ = writeln!(out, "{:.8e} {:.8e} {:.8e}", b[0], b[1], b[2]);
    }
    for i in 0..n1 - 1 {
        for j in 0..n2 {
            let jn = (j + 1) % n2;
            let _ = writeln!(
                out,
                "4 {} {} {} {}",
                grid.idx(i, j),
                grid.idx(i + 1, j),
                grid.idx(i + 1, jn),
                grid.idx(i, jn)
            );
        }
    }
    out
}

fn export_graph_mesh(graph: &FermiGraph, path: &Path) -> Result<(), u8> {
    let imm = ksurf::surfcalc::immerse(graph).map_err(|e| {
        eprintln!("error: {e}");
        solver_exit(&e)
    })?;
    write_atomic(path, &mesh_off(&imm)).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn cmd_run(config_path: &Path) -> u8 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let chart = match chart_of(&cfg) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let CoreChoice::Wedge { .. } = cfg.core {
        eprintln!(
            "error: run drives plane-core sweeps and continuations; wedge equidistants are covered by `ksurf verify wedge`"
        );
        return EXIT_CONFIG;
    }
    match cfg.mode {
        RunMode::Sweep => run_sweep(&cfg, chart),
        RunMode::Continue => run_continue(&cfg, chart),
    }
}

fn run_sweep(cfg: &RunConfig, chart: BasePlaneChart) -> u8 {
    let mut ks = Vec::new();
    let mut k = cfg.k_start;
    while k <= cfg.k_end + 1e-12 {
        ks.push(k);
        k += cfg.k_step;
    }
    let core = CoreDescriptor::base_plane();
    let table = match convergence_sweep(&ks, &core, chart) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return solver_exit(&e);
        }
    };
    let mut records = Vec::new();
    let mut failures = 0usize;
    for row in &table.rows {
        match &row.outcome {
            Ok(r) => records.push(r.clone()),
            Err(msg) => {
                eprintln!("row k = {} failed: {msg}", row.k);
                failures += 1;
            }
        }
    }
    if let Some(csv) = &cfg.csv {
        if let Err(e) = write_atomic(Path::new(csv), &records_csv(&records)) {
            eprintln!("error: cannot write {csv}: {e}");
            return EXIT_CONFIG;
        }
    }
    if let Some(prefix) = &cfg.mesh_prefix {
        for (idx, row) in table.rows.iter().enumerate() {
            if row.outcome.is_err() {
                continue;
            }
            let (graph, _, _) = match exact_fuchsian_leaf(chart, row.k) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return solver_exit(&e);
                }
            };
            let path = PathBuf::from(format!("{prefix}_{idx:02}.off"));
            if let Err(code) = export_graph_mesh(&graph, &path) {
                return code;
            }
        }
    }
    if let Some(report) = &cfg.report {
        let line = verify_line("sweep_rows_failed", failures as f64, 0.0, failures == 0);
        if let Err(e) = write_atomic(Path::new(report), &format!("{line}\n")) {
            eprintln!("error: cannot write {report}: {e}");
            return EXIT_CONFIG;
        }
    }
    if failures > 0 {
        EXIT_SOLVER
    } else {
        EXIT_OK
    }
}

fn run_continue(cfg: &RunConfig, chart: BasePlaneChart) -> u8 {
    let forcing = if cfg.paper_literal {
        ForcingMode::PaperLiteral
    } else {
        ForcingMode::DetNormalized
    };
    let state = if cfg.perturb_amplitude != 0.0 {
        ContinuationState::perturbed(
            chart,
            cfg.k_start,
            forcing,
            cfg.perturb_amplitude,
            cfg.perturb_frequency,
        )
    } else {
        ContinuationState::fuchsian(chart, cfg.k_start, forcing)
    };
    let state = match state {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return solver_exit(&e);
        }
    };
    let solver = SolverConfig {
        dt: cfg.dt,
        det_assert: cfg.track_det_law.then_some(DetLaw::KPlusT),
        ..SolverConfig::default()
    };
    let (final_state, records) = match continue_to(state, cfg.k_end, &solver) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return solver_exit(&e);
        }
    };
    if let Some(csv) = &cfg.csv {
        if let Err(e) = write_atomic(Path::new(csv), &records_csv(&records)) {
            eprintln!("error: cannot write {csv}: {e}");
            return EXIT_CONFIG;
        }
    }
    if let Some(prefix) = &cfg.mesh_prefix {
        let graph = match final_state.graph() {
            Ok(g) => g,
            Err(e) => {
                eprintln!("error: {e}");
                return solver_exit(&e);
            }
        };
        let path = PathBuf::from(format!("{prefix}_final.off"));
        if let Err(code) = export_graph_mesh(&graph, &path) {
            return code;
        }
    }
    if let Some(report) = &cfg.report {
        let (lo, hi) = final_state.det_range_interior();
        let gap = (lo - cfg.k_end).abs().max((hi - cfg.k_end).abs());
        let line = verify_line("final_det_gap", gap, solver.tol_det, gap <= solver.tol_det);
        if let Err(e) = write_atomic(Path::new(report), &format!("{line}\n")) {
            eprintln!("error: cannot write {report}: {e}");
            return EXIT_CONFIG;
        }
    }
    EXIT_OK
}

fn verify_line(name: &str, measured: f64, bound: f64, pass: bool) -> String {
    format!(
        "{name} {measured:.6e} {bound:.6e} {}",
        if pass { "PASS" } else { "FAIL" }
    )
}

fn cmd_flow(lambda1: f64, lambda2: f64, t_max: f64, out: Option<&Path>) -> u8 {
    if !(t_max > 0.0) {
        eprintln!("error: t_max must be positive");
        return EXIT_CONFIG;
    }
    let branches = match (classify_branch(lambda1), classify_branch(lambda2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let rhs = |y: f64| 1.0 - y * y;
    let rk4_step = |y: f64, dt: f64| {
        let k1 = rhs(y);
        let k2 = rhs(y + 0.5 * dt * k1);
        let k3 = rhs(y + 0.5 * dt * k2);
        let k4 = rhs(y + dt * k3);
        y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let dt = 1e-3;
    let out_every = 10usize; // one row per 0.01 in t
    let steps = (t_max / dt).ceil() as usize;
    let (mut y1, mut y2) = (lambda1, lambda2);
    let mut worst = 0.0f64;
    let mut csv = String::from("t,lambda1_closed,lambda2_closed,lambda1_rk4,lambda2_rk4,max_gap\n");
    for step_idx in 0..=steps {
        let t = dt * step_idx as f64;
        if step_idx % out_every == 0 || step_idx == steps {
            let c1 = evolve_eigen(&branches.0, t);
            let c2 = evolve_eigen(&branches.1, t);
            let gap = (c1 - y1).abs().max((c2 - y2).abs());
            worst = worst.max(gap);
            let _ = writeln!(
                csv,
                "{t:.6},{c1:.12e},{c2:.12e},{y1:.12e},{y2:.12e},{gap:.3e}"
            );
        }
        if step_idx < steps {
            y1 = rk4_step(y1, dt);
            y2 = rk4_step(y2, dt);
        }
    }
    match out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        }
        None => print!("{csv}"),
    }
    if worst > 1e-8 {
        eprintln!("error: closed form and RK4 disagree by {worst:.3e} > 1e-8");
        return EXIT_VERIFY;
    }
    EXIT_OK
}

fn cmd_export_mesh(config_path: &Path, k: f64, out: &Path) -> u8 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let chart = match chart_of(&cfg) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (graph, _, _) = match exact_fuchsian_leaf(chart, k) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match export_graph_mesh(&graph, out) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

fn cmd_verify(suite: &str, dt: Option<f64>, report: Option<&Path>) -> u8 {
    let Some(lines) = verify::suite(suite, dt) else {
        eprintln!(
            "error: unknown suite `{suite}`; valid suites: {}",
            verify::SUITES.join(", ")
        );
        return EXIT_CONFIG;
    };
    let mut text = String::new();
    let mut all_pass = true;
    for line in &lines {
        let rendered = line.to_string();
        println!("{rendered}");
        let _ = writeln!(text, "{rendered}");
        all_pass &= line.pass;
    }
    if let Some(path) = report {
        if let Err(e) = write_atomic(path, &text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}
