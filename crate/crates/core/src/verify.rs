//! Named verification suites.
//!
//! Each check compares a measured quantity against a fixed bound and
//! reports one line in the format `name measured bound PASS|FAIL`. The
//! suites are what the CLI `verify` subcommand runs and what the
//! acceptance test target asserts on; the bounds live here, pinned.

use crate::continuation::{
    assemble_operator, consistency_report, continue_to, det_reference, solve_f, step,
    trace_coefficient, BoundaryMode, ContinuationState, ForcingMode, SolverConfig,
};
use crate::equiflow::{
    classify_branch, curvature_bound, evolve_eigen, phi, CurvatureBoundParams,
};
use crate::error::Error;
use crate::foliation::{
    convergence_sweep, fuchsian_exact_distance, leaf_core_distance, nesting_check,
    wedge_equidistant_curvature_check, CoreDescriptor, WedgeSampling,
};
use crate::hypgeo::WedgeCore;
use crate::surfcalc::{
    gaussian_curvature, immerse, induced_metric, intrinsic_curvature, shape_operator,
    BasePlaneChart, FermiGraph,
};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// One verification line: `measured` compared against `bound`.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckLine {
    fn le(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            bound,
            pass: measured <= bound,
        }
    }

    fn ge(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            bound,
            pass: measured >= bound,
        }
    }

    fn failed(name: &str, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            measured: f64::NAN,
            bound,
            pass: false,
        }
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:.6e} {:.6e} {}",
            self.name,
            self.measured,
            self.bound,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

fn standard_chart(n: usize) -> BasePlaneChart {
    BasePlaneChart::new(0.1, 1.0, n, n).expect("standard chart")
}

/// Riccati closed forms against an independent RK4 integration of
/// `y' = 1 - y^2` for 100 random seeds in (0, 3].
pub fn riccati_closed_forms() -> Vec<CheckLine> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_gap = 0.0f64;
    for _ in 0..100 {
        let seed: f64 = rng.random_range(1e-6..3.0);
        let branch = classify_branch(seed).expect("positive seed");
        let mut y = seed;
        let dt = 1e-3;
        let rhs = |y: f64| 1.0 - y * y;
        for step_idx in 1..=2000 {
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * dt * k1);
            let k3 = rhs(y + 0.5 * dt * k2);
            let k4 = rhs(y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if step_idx % 100 == 0 {
                let t = dt * step_idx as f64;
                max_gap = max_gap.max((evolve_eigen(&branch, t) - y).abs());
            }
        }
    }
    vec![
        CheckLine::le("riccati_closed_vs_rk4_max_gap", max_gap, 1e-8),
        CheckLine::le(
            "riccati_runtime_seconds",
            start.elapsed().as_secs_f64(),
            10.0,
        ),
    ]
}

/// Brute-force domination of the evolved determinant by the curvature
/// bound over 10^4 admissible seeds, plus monotonicity and the limit.
pub fn curvature_bound_domination() -> Vec<CheckLine> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_violation = f64::NEG_INFINITY;
    let mut min_increment = f64::INFINITY;
    let mut limit_gap = 0.0f64;
    for _ in 0..10_000 {
        let k: f64 = rng.random_range(0.02..0.98);
        let a: f64 = rng.random_range(1e-3..k.sqrt());
        let p = CurvatureBoundParams::new(a, k).expect("admissible params");
        let l1: f64 = rng.random_range(a..k.sqrt());
        let l2 = k / l1;
        let b1 = classify_branch(l1).expect("seed");
        let b2 = classify_branch(l2).expect("seed");
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=50 {
            let t = 0.1 * i as f64;
            let det = evolve_eigen(&b1, t) * evolve_eigen(&b2, t);
            let bound = curvature_bound(&p, t);
            worst_violation = worst_violation.max(det - bound);
            if prev.is_finite() {
                min_increment = min_increment.min(bound - prev);
            }
            prev = bound;
        }
        limit_gap = limit_gap.max((curvature_bound(&p, 20.0) - 1.0).abs());
    }
    vec![
        CheckLine::le("bound_domination_excess", worst_violation, 1e-12),
        CheckLine::ge("bound_min_increment", min_increment, -1e-15),
        CheckLine::le("bound_limit_gap_at_t20", limit_gap, 1e-6),
        CheckLine::le(
            "bounds_runtime_seconds",
            start.elapsed().as_secs_f64(),
            30.0,
        ),
    ]
}

/// The phi derivative closed form against central differences on a
/// 50x50 grid, plus positivity.
pub fn phi_derivative_identity() -> Vec<CheckLine> {
    let mut max_gap = 0.0f64;
    let mut min_deriv = f64::INFINITY;
    let eps = 1e-5;
    for ci in 1..=50 {
        let c = 0.05 * ci as f64;
        for ti in 1..=50 {
            let t = 0.1 * ti as f64;
            let (_, deriv) = phi(c, t);
            let fd = (phi(c, t + eps).0 - phi(c, t - eps).0) / (2.0 * eps);
            max_gap = max_gap.max((deriv - fd).abs());
            min_deriv = min_deriv.min(deriv);
        }
    }
    vec![
        CheckLine::le("phi_derivative_fd_max_gap", max_gap, 1e-6),
        CheckLine::ge("phi_derivative_min_value", min_deriv, 0.0),
    ]
}

fn equidistant_errors(n: usize, d: f64) -> (f64, f64) {
    let chart = standard_chart(n);
    let graph = FermiGraph::constant(chart, d).expect("graph");
    let imm = immerse(&graph).expect("immersion");
    let g = induced_metric(&imm).expect("metric");
    let a = shape_operator(&imm, &g).expect("shape");
    let target = Matrix2::identity() * d.tanh();
    let mut shape_gap = 0.0f64;
    let mut det_gap = 0.0f64;
    for m in &a.m {
        shape_gap = shape_gap.max((m - target).abs().max());
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        det_gap = det_gap.max((det - d.tanh().powi(2)).abs());
    }
    (shape_gap, det_gap)
}

/// Discrete-geometry oracle: the equidistant graph at tanh(d) = 1/2 must
/// reproduce its closed-form shape operator, at second order.
pub fn discrete_geometry_oracle() -> Vec<CheckLine> {
    let d = 0.5f64.atanh();
    let (gap64, det64) = equidistant_errors(64, d);
    let (gap128, det128) = equidistant_errors(128, d);
    let order = (gap64 / gap128).log2();
    let _ = det128;
    vec![
        CheckLine::le("equidistant_shape_max_gap_64", gap64, 1e-3),
        CheckLine::le("equidistant_det_max_gap_64", det64, 1e-3),
        CheckLine::ge("equidistant_convergence_order", order, 1.9),
    ]
}

fn gauss_residual(n: usize) -> f64 {
    let chart = standard_chart(n);
    let graph =
        FermiGraph::from_fn(chart, |rho, th| 0.3 + 0.05 * th.cos() * (rho - 0.1)).expect("graph");
    let imm = immerse(&graph).expect("immersion");
    let g = induced_metric(&imm).expect("metric");
    let a = shape_operator(&imm, &g).expect("shape");
    let ka = gaussian_curvature(&a);
    let ki = intrinsic_curvature(&g);
    let grid = chart.grid();
    grid.nodes()
        .filter(|&(i, _)| chart.rho(i) >= 0.25 && chart.rho(i) <= 0.85)
        .map(|(i, j)| {
            let k = grid.idx(i, j);
            (ki.vals[k] - (ka.vals[k] - 1.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// Gauss-equation cross-check on a bent graph: intrinsic curvature from
/// the metric alone versus `det A - 1`, with its convergence order under
/// the same 64 -> 128 refinement as the shape-operator oracle.
pub fn gauss_equation_cross_check() -> Vec<CheckLine> {
    let err64 = gauss_residual(64);
    let err128 = gauss_residual(128);
    let order = (err64 / err128).log2();
    let chart = standard_chart(64);
    let h2 = chart.h_rho().powi(2) + chart.h_theta().powi(2);
    vec![
        CheckLine::le("gauss_residual_64", err64, 2.0 * h2),
        CheckLine::ge("gauss_equation_order", order, 1.9),
    ]
}

/// Trace identity `Tr(A - A^{-1}) = (k-1)(l^2+k)/(l k)` on 1000 random
/// positive matrices with determinant in (0, 1).
pub fn trace_identity() -> Vec<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut max_gap = 0.0f64;
    let mut max_value = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let l1: f64 = rng.random_range(0.05..1.5);
        let l2: f64 = rng.random_range(0.05..(0.95 / l1).min(1.5));
        let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (sn, cs) = th.sin_cos();
        let q = Matrix2::new(cs, -sn, sn, cs);
        let a = q * Matrix2::new(l1, 0.0, 0.0, l2) * q.transpose();
        let k = l1 * l2;
        let lambda = l1.min(l2);
        let direct = trace_coefficient(&a).expect("valid matrix");
        let formula = (k - 1.0) * (lambda * lambda + k) / (lambda * k);
        max_gap = max_gap.max((direct - formula).abs());
        max_value = max_value.max(direct);
    }
    vec![
        CheckLine::le("trace_identity_max_gap", max_gap, 1e-12),
        CheckLine::le("trace_coefficient_max_value", max_value, -f64::MIN_POSITIVE),
    ]
}

/// Homogeneous elliptic solve at k = 1/4 under the literal forcing:
/// the speed must be the constant 1/3.
pub fn homogeneous_elliptic_solve() -> Vec<CheckLine> {
    let chart = standard_chart(32);
    let state = match ContinuationState::fuchsian(chart, 0.25, ForcingMode::PaperLiteral) {
        Ok(s) => s,
        Err(_) => return vec![CheckLine::failed("homogeneous_speed_max_gap", 1e-6)],
    };
    let op = match assemble_operator(&state.g, &state.a, state.mode) {
        Ok(op) => op,
        Err(_) => return vec![CheckLine::failed("homogeneous_speed_max_gap", 1e-6)],
    };
    let c = 1.0 / 3.0;
    let bc = BoundaryMode::Prescribed(vec![c; 32], vec![c; 32]);
    match solve_f(&op, &bc, 1e-9) {
        Ok(f) => {
            let grid = chart.grid();
            let gap = grid
                .interior_nodes()
                .map(|(i, j)| (f.vals[grid.idx(i, j)] - c).abs())
                .fold(0.0, f64::max);
            vec![CheckLine::le("homogeneous_speed_max_gap", gap, 1e-6)]
        }
        Err(_) => vec![CheckLine::failed("homogeneous_speed_max_gap", 1e-6)],
    }
}

/// Determinant laws over a t-span of 0.5 on homogeneous runs: the
/// literal forcing tracks `k exp(t)`, the det-normalized `k + t`.
pub fn determinant_law(dt: f64) -> Vec<CheckLine> {
    let start = Instant::now();
    let chart = standard_chart(16);
    let mut lines = Vec::new();
    for (mode, name) in [
        (ForcingMode::PaperLiteral, "det_law_paper_literal"),
        (ForcingMode::DetNormalized, "det_law_det_normalized"),
    ] {
        let k0 = 0.25;
        let mut state = match ContinuationState::fuchsian(chart, k0, mode) {
            Ok(s) => s,
            Err(_) => {
                lines.push(CheckLine::failed(name, 1e-6));
                continue;
            }
        };
        let cfg = SolverConfig {
            dt,
            // The law gap is measured below; don't let the runtime
            // tolerance abort the measurement first.
            tol_det: f64::INFINITY,
            ..SolverConfig::default()
        };
        let mut max_gap = 0.0f64;
        let mut failed = false;
        while state.t < 0.5 - 1e-12 {
            let h = cfg.dt.min(0.5 - state.t);
            if let Err(e) = step(&mut state, h, &cfg) {
                let _ = e;
                failed = true;
                break;
            }
            let reference = det_reference(mode, k0, state.t);
            let (lo, hi) = state.det_range_interior();
            max_gap = max_gap
                .max((lo - reference).abs())
                .max((hi - reference).abs());
        }
        if failed {
            lines.push(CheckLine::failed(name, 1e-6));
        } else {
            lines.push(CheckLine::le(name, max_gap, 1e-6));
        }
    }
    lines.push(CheckLine::le(
        "det_law_runtime_seconds",
        start.elapsed().as_secs_f64(),
        60.0,
    ));
    lines
}

/// Fuchsian continuation k: 0.25 -> 0.5 against the exact leaf family.
pub fn continuation_vs_exact(dt: f64) -> Vec<CheckLine> {
    let start = Instant::now();
    let chart = standard_chart(64);
    let k_target = 0.5;
    let state = match ContinuationState::fuchsian(chart, 0.25, ForcingMode::DetNormalized) {
        Ok(s) => s,
        Err(_) => {
            return vec![
                CheckLine::failed("continuation_height_max_gap", 5e-3),
                CheckLine::failed("continuation_distance_gap", 5e-3),
            ]
        }
    };
    let cfg = SolverConfig {
        dt,
        ..SolverConfig::default()
    };
    match continue_to(state, k_target, &cfg) {
        Ok((state, _records)) => {
            let want_u = fuchsian_exact_distance(k_target).expect("k in range");
            let grid = chart.grid();
            let graph = state.graph().expect("graph");
            // Interior half-annulus in rho.
            let span = chart.rho_max - chart.rho_min;
            let (lo, hi) = (chart.rho_min + span / 4.0, chart.rho_max - span / 4.0);
            let height_gap = grid
                .nodes()
                .filter(|&(i, _)| chart.rho(i) >= lo && chart.rho(i) <= hi)
                .map(|(i, j)| (graph.u[grid.idx(i, j)] - want_u).abs())
                .fold(0.0, f64::max);
            let core = CoreDescriptor::base_plane();
            let (dmin, dmax) = leaf_core_distance(&state.imm, &core).expect("distances");
            let dist_gap = (dmin - want_u).abs().max((dmax - want_u).abs());
            vec![
                CheckLine::le("continuation_height_max_gap", height_gap, 5e-3),
                CheckLine::le("continuation_distance_gap", dist_gap, 5e-3),
                CheckLine::le(
                    "continuation_runtime_seconds",
                    start.elapsed().as_secs_f64(),
                    120.0,
                ),
            ]
        }
        Err(Error::Abort(info)) => vec![
            CheckLine::le(&info.assertion, info.measured, info.bound),
            CheckLine::failed("continuation_height_max_gap", 5e-3),
        ],
        Err(_) => vec![CheckLine::failed("continuation_height_max_gap", 5e-3)],
    }
}

/// Perturbed-start continuation: determinant dispersion stays within
/// 1e-4 throughout and the final leaves at k = 0.3 < 0.4 nest.
pub fn perturbation_robustness(dt: f64) -> Vec<CheckLine> {
    let chart = standard_chart(48);
    let state = match ContinuationState::perturbed(
        chart,
        0.25,
        ForcingMode::DetNormalized,
        0.01,
        3,
    ) {
        Ok(s) => s,
        Err(_) => {
            return vec![
                CheckLine::failed("det_dispersion_max", 1e-4),
                CheckLine::failed("nesting_margin", 0.0),
            ]
        }
    };
    let cfg = SolverConfig {
        dt,
        ..SolverConfig::default()
    };
    let run = (|| -> crate::error::Result<(f64, f64, f64)> {
        let (state3, records3) = continue_to(state, 0.3, &cfg)?;
        let graph3 = state3.graph()?;
        let (state4, records4) = continue_to(state3, 0.4, &cfg)?;
        let graph4 = state4.graph()?;
        let mut dispersion = 0.0f64;
        for r in records3.iter().chain(records4.iter()) {
            dispersion = dispersion
                .max((r.det_min - r.k).abs())
                .max((r.det_max - r.k).abs());
        }
        // Distance to the core stays below the arctanh(sqrt(k)) upper
        // bound, up to the perturbation amplitude and discretization.
        let core = CoreDescriptor::base_plane();
        let (_, dist_max) = leaf_core_distance(&state4.imm, &core)?;
        let excess = dist_max - fuchsian_exact_distance(0.4)?;
        let (ok, margin) = nesting_check(&graph3, &graph4)?;
        Ok((dispersion, if ok { margin } else { -margin.abs() }, excess))
    })();
    match run {
        Ok((dispersion, margin, dist_excess)) => vec![
            CheckLine::le("det_dispersion_max", dispersion, 1e-4),
            CheckLine::ge("nesting_margin", margin, f64::MIN_POSITIVE),
            CheckLine::le("perturbed_dist_max_excess", dist_excess, 0.02),
        ],
        Err(Error::Abort(info)) => vec![
            CheckLine::le(&info.assertion, info.measured, info.bound),
            CheckLine::failed("nesting_margin", 0.0),
        ],
        Err(_) => vec![
            CheckLine::failed("det_dispersion_max", 1e-4),
            CheckLine::failed("nesting_margin", 0.0),
        ],
    }
}

/// Weak curvature bound of the wedge equidistants across distances and
/// bend angles.
pub fn wedge_weak_bound() -> Vec<CheckLine> {
    let mut deficit = f64::NEG_INFINITY;
    let mut band_gap = 0.0f64;
    let mut tube_gap = 0.0f64;
    let mut dist_gap = 0.0f64;
    for &d in &[0.1, 0.5, 1.0, 2.0] {
        for &bend in &[
            std::f64::consts::PI / 6.0,
            std::f64::consts::PI / 3.0,
            std::f64::consts::PI / 2.0,
        ] {
            let w = match WedgeCore::symmetric(bend) {
                Ok(w) => w,
                Err(_) => return vec![CheckLine::failed("wedge_min_det_deficit", 1e-6)],
            };
            match wedge_equidistant_curvature_check(&w, d, &WedgeSampling::default()) {
                Ok(check) => {
                    deficit = deficit.max(d.tanh().powi(2) - check.min_det);
                    band_gap = band_gap.max(check.band_det_gap);
                    tube_gap = tube_gap.max(check.tube_det_gap);
                    dist_gap = dist_gap.max(check.max_dist_gap);
                }
                Err(_) => return vec![CheckLine::failed("wedge_min_det_deficit", 1e-6)],
            }
        }
    }
    vec![
        CheckLine::le("wedge_min_det_deficit", deficit, 1e-6),
        CheckLine::le("wedge_band_det_gap", band_gap, 1e-6),
        CheckLine::le("wedge_tube_det_gap", tube_gap, 1e-6),
        CheckLine::le("wedge_sample_distance_gap", dist_gap, 1e-8),
    ]
}

/// Convergence sweep proxies over the plane core.
pub fn convergence_sweep_proxies() -> Vec<CheckLine> {
    let ks: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let chart = standard_chart(64);
    let core = CoreDescriptor::base_plane();
    let table = match convergence_sweep(&ks, &core, chart) {
        Ok(t) => t,
        Err(_) => return vec![CheckLine::failed("sweep_dist_max_gap", 1e-8)],
    };
    let base_area = std::f64::consts::TAU * (1.0f64.cosh() - 0.1f64.cosh());
    let mut dist_gap = 0.0f64;
    let mut min_dist_increment = f64::INFINITY;
    let mut min_gap_decrement = f64::INFINITY;
    let mut area_law_dev = 0.0f64;
    let mut prev_dist = 0.0;
    let mut prev_ball = f64::INFINITY;
    let mut first_dist_max = f64::NAN;
    for (idx, row) in table.rows.iter().enumerate() {
        let rec = match &row.outcome {
            Ok(r) => r,
            Err(_) => return vec![CheckLine::failed("sweep_dist_max_gap", 1e-8)],
        };
        let exact = fuchsian_exact_distance(row.k).expect("k in range");
        dist_gap = dist_gap
            .max((rec.dist_min - exact).abs())
            .max((rec.dist_max - exact).abs());
        if idx == 0 {
            first_dist_max = rec.dist_max;
        } else {
            min_dist_increment = min_dist_increment.min(rec.dist_max - prev_dist);
            min_gap_decrement = min_gap_decrement.min(prev_ball - row.ball_gap);
        }
        prev_dist = rec.dist_max;
        prev_ball = row.ball_gap;
        area_law_dev = area_law_dev.max((rec.area * (1.0 - row.k) - base_area).abs() / base_area);
    }
    let h_theta2 = chart.h_theta().powi(2);
    vec![
        CheckLine::le("sweep_dist_max_gap", dist_gap, 1e-8),
        CheckLine::ge("sweep_dist_min_increment", min_dist_increment, f64::MIN_POSITIVE),
        CheckLine::le("sweep_dist_max_at_k005", first_dist_max, 0.23),
        CheckLine::ge("sweep_ball_gap_min_decrement", min_gap_decrement, f64::MIN_POSITIVE),
        CheckLine::le("sweep_area_law_rel_dev", area_law_dev, 2.0 * h_theta2),
    ]
}

/// Fuchsian volume column against the separable closed form.
pub fn volume_closed_form() -> Vec<CheckLine> {
    let ks: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let chart = standard_chart(64);
    let core = CoreDescriptor::base_plane();
    let table = match convergence_sweep(&ks, &core, chart) {
        Ok(t) => t,
        Err(_) => return vec![CheckLine::failed("volume_closed_form_rel_gap", 1e-3)],
    };
    let base_area = std::f64::consts::TAU * (1.0f64.cosh() - 0.1f64.cosh());
    let mut rel_gap = 0.0f64;
    for row in &table.rows {
        let rec = match &row.outcome {
            Ok(r) => r,
            Err(_) => return vec![CheckLine::failed("volume_closed_form_rel_gap", 1e-3)],
        };
        let d = fuchsian_exact_distance(row.k).expect("k in range");
        let exact = (0.5 * d + 0.25 * (2.0 * d).sinh()) * base_area;
        rel_gap = rel_gap.max((rec.volume_to_core - exact).abs() / exact);
    }
    vec![CheckLine::le("volume_closed_form_rel_gap", rel_gap, 1e-3)]
}

/// Extra consistency probe used by the continuation suite: the evolved
/// fields against the fields recomputed from the evolved immersion.
pub fn continuation_self_consistency(dt: f64) -> Vec<CheckLine> {
    let chart = standard_chart(32);
    let mut state = match ContinuationState::fuchsian(chart, 0.25, ForcingMode::DetNormalized) {
        Ok(s) => s,
        Err(_) => return vec![CheckLine::failed("consistency_a_gap", 1e-2)],
    };
    let cfg = SolverConfig {
        dt,
        ..SolverConfig::default()
    };
    for _ in 0..10 {
        if step(&mut state, cfg.dt, &cfg).is_err() {
            return vec![CheckLine::failed("consistency_a_gap", 1e-2)];
        }
    }
    match consistency_report(&state) {
        Ok(r) => vec![
            CheckLine::le("consistency_a_gap", r.a_gap, 1e-2),
            CheckLine::le("consistency_law_gap", r.law_gap, 1e-6),
        ],
        Err(_) => vec![CheckLine::failed("consistency_a_gap", 1e-2)],
    }
}

/// Run a named suite. `dt` overrides the step size of the continuation
/// runs (criteria that march in time); `None` uses the default 1e-2.
pub fn suite(name: &str, dt: Option<f64>) -> Option<Vec<CheckLine>> {
    let dt = dt.unwrap_or(1e-2);
    let lines = match name {
        "riccati" => riccati_closed_forms(),
        "bounds" => {
            let mut v = curvature_bound_domination();
            v.extend(phi_derivative_identity());
            v
        }
        "fuchsian" => {
            let mut v = discrete_geometry_oracle();
            v.extend(gauss_equation_cross_check());
            v
        }
        "continuation" => {
            let mut v = trace_identity();
            v.extend(homogeneous_elliptic_solve());
            v.extend(determinant_law(dt));
            v.extend(continuation_vs_exact(dt));
            v.extend(perturbation_robustness(dt));
            v.extend(continuation_self_consistency(dt));
            v
        }
        "wedge" => wedge_weak_bound(),
        "foliation" => {
            let mut v = convergence_sweep_proxies();
            v.extend(volume_closed_form());
            v
        }
        _ => return None,
    };
    Some(lines)
}

/// All suite names, in reporting order.
pub const SUITES: [&str; 6] = [
    "riccati",
    "bounds",
    "fuchsian",
    "continuation",
    "wedge",
    "foliation",
];
