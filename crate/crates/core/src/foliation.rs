//! Foliation-level analytics: exact Fuchsian leaves, leaf-to-core
//! distances, nesting, enclosed volume, wedge equidistant curvature
//! bounds, and the convergence sweep over the curvature parameter.
//!
//! Over the plane core the `k`-leaf is an exact equidistant graph at
//! height `arctanh(sqrt(k))`. Wedge equidistants are only C^{1,1} across
//! the piece junctions, so they are sampled parametrically per smooth
//! piece (two planar bands and a ridge tube sector) with their
//! closed-form shape operators; finite differences across the junction
//! would be meaningless.

use crate::error::{Error, Result};
use crate::hypgeo::{
    dist_to_plane, dist_to_wedge, mink_cross, normal_flow, to_ball, GeodesicPlane, MinkVector,
    WedgeCore,
};
use crate::surfcalc::{
    area, gaussian_curvature, immerse, induced_metric, BasePlaneChart, FermiGraph, ImmersionField,
    PatchGrid, ShapeField,
};
use nalgebra::Matrix2;

/// Which convex core a table was computed against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoreKind {
    Plane,
    Wedge { bend_angle: f64 },
}

/// Per-leaf diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRecord {
    pub k: f64,
    pub t: f64,
    pub det_min: f64,
    pub det_max: f64,
    pub dist_min: f64,
    pub dist_max: f64,
    pub area: f64,
    pub volume_to_core: f64,
}

/// One row of a sweep: the target curvature, the ball-model gap proxy
/// (max over nodes of `1 - |to_ball(point)|`), and the leaf record or
/// the failure message of an aborted row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub k: f64,
    pub ball_gap: f64,
    pub outcome: std::result::Result<LeafRecord, String>,
}

/// Ordered sweep output.
#[derive(Debug, Clone)]
pub struct FoliationTable {
    pub core: CoreKind,
    pub rows: Vec<SweepRow>,
}

/// Distance from the Fuchsian `k`-leaf to its plane core:
/// `arctanh(sqrt(k))`.
pub fn fuchsian_exact_distance(k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::InvalidParam(format!("curvature {k} outside (0, 1)")));
    }
    Ok(k.sqrt().atanh())
}

/// Min/max hyperbolic distance from the interior nodes of a leaf to the
/// core.
pub fn leaf_core_distance(imm: &ImmersionField, core: &CoreDescriptor) -> Result<(f64, f64)> {
    let grid = imm.grid;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, j) in grid.interior_nodes() {
        let p = &imm.points[grid.idx(i, j)];
        let d = match core {
            CoreDescriptor::Plane(plane) => dist_to_plane(p, plane),
            CoreDescriptor::Wedge(w) => dist_to_wedge(p, w)?,
        };
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}

/// Core stand-ins carrying their geometry.
#[derive(Debug, Clone)]
pub enum CoreDescriptor {
    Plane(GeodesicPlane),
    Wedge(WedgeCore),
}

impl CoreDescriptor {
    pub fn base_plane() -> Self {
        CoreDescriptor::Plane(GeodesicPlane::base())
    }

    pub fn kind(&self) -> CoreKind {
        match self {
            CoreDescriptor::Plane(_) => CoreKind::Plane,
            CoreDescriptor::Wedge(w) => CoreKind::Wedge {
                bend_angle: w.bend_angle,
            },
        }
    }
}

/// Reference surface below a leaf for the volume integral.
pub enum VolumeReference<'a> {
    /// The base plane (`u = 0`).
    Core,
    /// Another leaf over the same chart.
    Leaf(&'a FermiGraph),
}

/// Fermi antiderivative of the volume element: `int cosh^2 = u/2 + sinh(2u)/4`.
fn cosh2_antiderivative(u: f64) -> f64 {
    0.5 * u + 0.25 * (2.0 * u).sinh()
}

/// Volume enclosed between a leaf graph and a reference below it:
/// per-node closed-form integral in `u` times the base area element,
/// trapezoidal in `rho`, periodic in `theta`.
pub fn volume_between(leaf: &FermiGraph, reference: VolumeReference<'_>) -> Result<f64> {
    let chart = leaf.chart;
    let grid = chart.grid();
    if let VolumeReference::Leaf(other) = &reference {
        if other.chart != chart {
            return Err(Error::InvalidParam(
                "leaves live on different charts".into(),
            ));
        }
    }
    let mut total = 0.0;
    for i in 0..grid.n1 {
        let w1 = if i == 0 || i + 1 == grid.n1 { 0.5 } else { 1.0 };
        let sinh_rho = chart.rho(i).sinh();
        for j in 0..grid.n2 {
            let k = grid.idx(i, j);
            let u_top = leaf.u[k];
            let u_ref = match &reference {
                VolumeReference::Core => 0.0,
                VolumeReference::Leaf(other) => other.u[k],
            };
            if u_top < u_ref - 1e-12 {
                return Err(Error::Ordering(format!(
                    "leaf height {u_top} below reference {u_ref} at node {k}"
                )));
            }
            total += w1
                * sinh_rho
                * (cosh2_antiderivative(u_top) - cosh2_antiderivative(u_ref));
        }
    }
    Ok(total * grid.h1 * grid.h2)
}

/// Pointwise nesting of two leaves over the same chart: true when the
/// first lies strictly below the second at every node; the margin is the
/// minimum height difference.
pub fn nesting_check(lower: &FermiGraph, upper: &FermiGraph) -> Result<(bool, f64)> {
    if lower.chart != upper.chart {
        return Err(Error::InvalidParam(
            "leaves live on different charts".into(),
        ));
    }
    let margin = lower
        .u
        .iter()
        .zip(&upper.u)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    Ok((margin > 0.0, margin))
}

/// Sampling resolution for the wedge equidistant check.
#[derive(Debug, Clone, Copy)]
pub struct WedgeSampling {
    /// Nodes per direction on each planar band piece.
    pub n_band: usize,
    /// Nodes per direction on the ridge tube sector.
    pub n_tube: usize,
    /// Extent along the ridge direction.
    pub s_max: f64,
    /// Transverse extent of the band pieces (distance along the face).
    pub y_max: f64,
    /// Pass tolerance on `min det A >= tanh^2(d) - tol`.
    pub tol: f64,
}

impl Default for WedgeSampling {
    fn default() -> Self {
        Self {
            n_band: 24,
            n_tube: 24,
            s_max: 0.8,
            y_max: 1.0,
            tol: 1e-6,
        }
    }
}

/// Result of sampling the distance-`d` surface of a wedge.
#[derive(Debug, Clone, Copy)]
pub struct WedgeCheck {
    pub min_det: f64,
    /// Largest deviation of the band-piece determinants from tanh^2(d).
    pub band_det_gap: f64,
    /// Largest deviation of the tube-piece determinants from 1.
    pub tube_det_gap: f64,
    /// Largest deviation of sampled points from distance `d` to the core.
    pub max_dist_gap: f64,
    pub pass: bool,
}

/// In-plane unit direction of a wedge face, orthogonal to the ridge,
/// pointing into the face (the side bounded away from the other plane).
fn face_direction(w: &WedgeCore, own: &GeodesicPlane, other: &GeodesicPlane) -> Result<MinkVector> {
    let ridge = w.ridge();
    let raw = mink_cross(&ridge.e0, &ridge.e1, &own.normal());
    let mut dir = raw.renormalize_spacelike()?;
    // The face is the half of the plane on the non-positive side of the
    // other plane.
    let probe = ridge.e0 * 0.1f64.cosh() + dir * 0.1f64.sinh();
    if dist_to_plane(&probe.renormalize_point()?, other) > 0.0 {
        dir = -dir;
    }
    Ok(dir)
}

/// Sample the distance-`d` equidistant surface of the wedge piecewise
/// (two planar bands, one ridge tube sector), attach the closed-form
/// shape operators, and check the weak curvature bound
/// `min det A >= tanh^2(d) - tol`.
pub fn wedge_equidistant_curvature_check(
    w: &WedgeCore,
    d: f64,
    sampling: &WedgeSampling,
) -> Result<WedgeCheck> {
    if !(d > 0.0) {
        return Err(Error::InvalidParam(format!("distance {d} must be positive")));
    }
    let n_band = sampling.n_band.max(5);
    let n_tube = sampling.n_tube.max(5);
    let ridge = w.ridge();
    let mut min_det = f64::INFINITY;
    let mut band_det_gap = 0.0f64;
    let mut tube_det_gap = 0.0f64;
    let mut max_gap = 0.0f64;

    // Planar bands over each face interior: A = tanh(d) Id.
    for (own, other) in [(&w.plane_a, &w.plane_b), (&w.plane_b, &w.plane_a)] {
        let dir = face_direction(w, own, other)?;
        let (y_min, y_max) = (0.05, sampling.y_max);
        let grid = PatchGrid::new(
            n_band,
            n_band,
            2.0 * sampling.s_max / (n_band - 1) as f64,
            (y_max - y_min) / (n_band - 1) as f64,
            false,
        )?;
        let mut points = Vec::with_capacity(grid.len());
        let mut normals = Vec::with_capacity(grid.len());
        for i in 0..n_band {
            let s = -sampling.s_max + grid.h1 * i as f64;
            for j in 0..n_band {
                let y = y_min + grid.h2 * j as f64;
                let q = (ridge.point(s) * y.cosh() + dir * y.sinh()).renormalize_point()?;
                let (p, n) = normal_flow(&q, &own.normal(), d)?;
                max_gap = max_gap.max((dist_to_wedge(&p, w)? - d).abs());
                points.push(p);
                normals.push(n);
            }
        }
        let _imm = ImmersionField::from_samples(grid, points, normals)?;
        let a = ShapeField::from_fn(grid, |_, _| Matrix2::identity() * d.tanh());
        let det = gaussian_curvature(&a);
        let target = d.tanh().powi(2);
        for v in &det.vals {
            min_det = min_det.min(*v);
            band_det_gap = band_det_gap.max((v - target).abs());
        }
    }

    // Ridge tube sector: normal directions interpolating the two face
    // normals (the normal cone of the ridge); A = diag(tanh d, coth d).
    {
        let half = w.bend_angle / 2.0;
        let va = w.plane_a.normal();
        let vb = w.plane_b.normal();
        let grid = PatchGrid::new(
            n_tube,
            n_tube,
            2.0 * sampling.s_max / (n_tube - 1) as f64,
            2.0 * half * ((n_tube - 1) as f64 / (n_tube + 1) as f64) / (n_tube - 1) as f64,
            false,
        )?;
        let tau0 = 1.0 / (n_tube + 1) as f64;
        let mut points = Vec::with_capacity(grid.len());
        let mut normals = Vec::with_capacity(grid.len());
        for i in 0..n_tube {
            let s = -sampling.s_max + grid.h1 * i as f64;
            let gamma = ridge.point(s);
            for j in 0..n_tube {
                let tau = tau0 + (1.0 - 2.0 * tau0) * j as f64 / (n_tube - 1) as f64;
                // Spherical interpolation between the face normals.
                let ang = w.bend_angle;
                let nu = (va * ((1.0 - tau) * ang).sin() + vb * (tau * ang).sin())
                    * (1.0 / ang.sin());
                let nu = nu.orthonormal_to(&gamma)?;
                let p = (gamma * d.cosh() + nu * d.sinh()).renormalize_point()?;
                let n = (gamma * d.sinh() + nu * d.cosh()).orthonormal_to(&p)?;
                max_gap = max_gap.max((dist_to_wedge(&p, w)? - d).abs());
                points.push(p);
                normals.push(n);
            }
        }
        let _imm = ImmersionField::from_samples(grid, points, normals)?;
        let a = ShapeField::from_fn(grid, |_, _| {
            Matrix2::new(d.tanh(), 0.0, 0.0, 1.0 / d.tanh())
        });
        let det = gaussian_curvature(&a);
        for v in &det.vals {
            min_det = min_det.min(*v);
            tube_det_gap = tube_det_gap.max((v - 1.0).abs());
        }
    }

    Ok(WedgeCheck {
        min_det,
        band_det_gap,
        tube_det_gap,
        max_dist_gap: max_gap,
        pass: min_det >= d.tanh().powi(2) - sampling.tol,
    })
}

/// The exact Fuchsian leaf of curvature `k` over the chart, with its
/// closed-form shape operator field.
pub fn exact_fuchsian_leaf(
    chart: BasePlaneChart,
    k: f64,
) -> Result<(FermiGraph, ImmersionField, ShapeField)> {
    let d = fuchsian_exact_distance(k)?;
    let graph = FermiGraph::constant(chart, d)?;
    let imm = immerse(&graph)?;
    let a = ShapeField::from_fn(chart.grid(), |_, _| Matrix2::identity() * d.tanh());
    Ok((graph, imm, a))
}

/// Sweep the curvature parameter over the plane core, building each leaf
/// by the exact construction and recording its diagnostics. The wedge
/// core has no graph leaves to sweep; use
/// [`wedge_equidistant_curvature_check`] for its equidistant bounds.
pub fn convergence_sweep(
    ks: &[f64],
    core: &CoreDescriptor,
    chart: BasePlaneChart,
) -> Result<FoliationTable> {
    match core {
        CoreDescriptor::Plane(_) => {}
        CoreDescriptor::Wedge(_) => {
            return Err(Error::InvalidParam(
                "sweeps over the wedge core are not supported; wedge equidistants are sampled parametrically".into(),
            ));
        }
    }
    let mut prev = 0.0;
    for &k in ks {
        if !(k > prev && k < 1.0) {
            return Err(Error::InvalidParam(format!(
                "curvature list must be strictly increasing within (0, 1); offending value {k}"
            )));
        }
        prev = k;
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let row = build_exact_row(chart, k, core);
        rows.push(match row {
            Ok(r) => r,
            Err(e) => SweepRow {
                k,
                ball_gap: f64::NAN,
                outcome: Err(e.to_string()),
            },
        });
    }
    Ok(FoliationTable {
        core: core.kind(),
        rows,
    })
}

fn build_exact_row(chart: BasePlaneChart, k: f64, core: &CoreDescriptor) -> Result<SweepRow> {
    let (graph, imm, a) = exact_fuchsian_leaf(chart, k)?;
    let g = induced_metric(&imm)?;
    let det = gaussian_curvature(&a);
    let (det_min, det_max) = det
        .vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    let (dist_min, dist_max) = leaf_core_distance(&imm, core)?;
    let ball_gap = imm
        .points
        .iter()
        .map(|p| {
            let b = to_ball(p);
            1.0 - (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let record = LeafRecord {
        k,
        t: 0.0,
        det_min,
        det_max,
        dist_min,
        dist_max,
        area: area(&imm, &g),
        volume_to_core: volume_between(&graph, VolumeReference::Core)?,
    };
    Ok(SweepRow {
        k,
        ball_gap,
        outcome: Ok(record),
    })
}
