//! Discrete surface calculus on Fermi-coordinate graph patches.
//!
//! A surface is stored as node samples over a uniform 2D grid: either a
//! height function `u` over the polar chart of the base geodesic plane
//! (a [`FermiGraph`]), or raw point/normal samples over a generic patch
//! (used for the wedge equidistant pieces, which are not graphs over a
//! single plane). All derivatives are second-order finite differences:
//! central in the interior, one-sided second-order at non-periodic edges,
//! wrapping in the periodic direction.

use crate::error::{Error, Result};
use crate::hypgeo::{mink_cross, MinkVector};
use nalgebra::{Matrix2, Vector2};

/// A uniform rectangular grid. Axis 1 is never periodic (the radial
/// direction of the chart); axis 2 wraps when `periodic2` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGrid {
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub periodic2: bool,
}

impl PatchGrid {
    pub fn new(n1: usize, n2: usize, h1: f64, h2: f64, periodic2: bool) -> Result<Self> {
        if n1 < 5 || n2 < 5 {
            return Err(Error::InvalidParam(format!(
                "grid {n1}x{n2} too small for second-order stencils"
            )));
        }
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::InvalidParam("grid spacings must be positive".into()));
        }
        Ok(Self {
            n1,
            n2,
            h1,
            h2,
            periodic2,
        })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Interior along axis 1, and along axis 2 unless periodic.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let ok1 = i > 0 && i + 1 < self.n1;
        let ok2 = self.periodic2 || (j > 0 && j + 1 < self.n2);
        ok1 && ok2
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n1).flat_map(move |i| (0..self.n2).map(move |j| (i, j)))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes().filter(move |&(i, j)| self.is_interior(i, j))
    }

    /// At least `depth` nodes away from every non-periodic edge. Second
    /// derivatives of already-differenced fields are uniformly
    /// second-order accurate only here: at depth 1 the stencil straddles
    /// the one-sided/central error-constant jump of the edge rows.
    pub fn is_deep_interior(&self, i: usize, j: usize, depth: usize) -> bool {
        let ok1 = i >= depth && i + depth < self.n1;
        let ok2 = self.periodic2 || (j >= depth && j + depth < self.n2);
        ok1 && ok2
    }

    pub fn deep_interior_nodes(&self, depth: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes()
            .filter(move |&(i, j)| self.is_deep_interior(i, j, depth))
    }
}

/// Data that finite-difference stencils can combine linearly.
pub trait LinearData: Copy {
    fn lin_zero() -> Self;
    /// `self + c * x`
    fn lin_axpy(self, c: f64, x: Self) -> Self;
    /// `self - x`; stencils are built from node differences so that
    /// constant fields annihilate exactly in floating point.
    fn lin_sub(self, x: Self) -> Self;
}

impl LinearData for f64 {
    fn lin_zero() -> Self {
        0.0
    }
    fn lin_axpy(self, c: f64, x: Self) -> Self {
        self + c * x
    }
    fn lin_sub(self, x: Self) -> Self {
        self - x
    }
}

impl LinearData for MinkVector {
    fn lin_zero() -> Self {
        MinkVector::zero()
    }
    fn lin_axpy(self, c: f64, x: Self) -> Self {
        self + x * c
    }
    fn lin_sub(self, x: Self) -> Self {
        self - x
    }
}

impl LinearData for Matrix2<f64> {
    fn lin_zero() -> Self {
        Matrix2::zeros()
    }
    fn lin_axpy(self, c: f64, x: Self) -> Self {
        self + x * c
    }
    fn lin_sub(self, x: Self) -> Self {
        self - x
    }
}

/// One-dimensional stencils in node-difference form. `fm..fp` denote
/// consecutive nodes in stencil order.
mod stencil {
    use super::LinearData;

    /// Central first derivative `(fp - fm) / (2h)`.
    pub fn d1_central<T: LinearData>(fm: T, fp: T, h: f64) -> T {
        T::lin_zero().lin_axpy(0.5 / h, fp.lin_sub(fm))
    }

    /// One-sided first derivative at the low end,
    /// `(-3 f0 + 4 f1 - f2) / (2h) = (4 (f1 - f0) - (f2 - f0)) / (2h)`.
    pub fn d1_low<T: LinearData>(f0: T, f1: T, f2: T, h: f64) -> T {
        let a = f1.lin_sub(f0);
        let b = f2.lin_sub(f0);
        T::lin_zero()
            .lin_axpy(2.0 / h, a)
            .lin_axpy(-0.5 / h, b)
    }

    /// Mirror of [`d1_low`] at the high end (`f0` is the edge node,
    /// `f1`, `f2` its inward neighbours).
    pub fn d1_high<T: LinearData>(f0: T, f1: T, f2: T, h: f64) -> T {
        let a = f0.lin_sub(f1);
        let b = f0.lin_sub(f2);
        T::lin_zero()
            .lin_axpy(2.0 / h, a)
            .lin_axpy(-0.5 / h, b)
    }

    /// Central second derivative `((fp - f) - (f - fm)) / h^2`.
    pub fn d2_central<T: LinearData>(fm: T, f: T, fp: T, h: f64) -> T {
        let a = fp.lin_sub(f);
        let b = f.lin_sub(fm);
        T::lin_zero().lin_axpy(1.0 / (h * h), a.lin_sub(b))
    }

    /// One-sided second derivative,
    /// `(2 f0 - 5 f1 + 4 f2 - f3) / h^2
    ///  = (2 (f0 - f1) - 3 (f1 - f2) + (f2 - f3)) / h^2`.
    /// Symmetric in direction, so it serves both ends.
    pub fn d2_edge<T: LinearData>(f0: T, f1: T, f2: T, f3: T, h: f64) -> T {
        let h2 = h * h;
        T::lin_zero()
            .lin_axpy(2.0 / h2, f0.lin_sub(f1))
            .lin_axpy(-3.0 / h2, f1.lin_sub(f2))
            .lin_axpy(1.0 / h2, f2.lin_sub(f3))
    }
}

/// First derivative along axis 1 of a node field.
pub(crate) fn deriv1_axis1<T: LinearData>(grid: &PatchGrid, f: &[T]) -> Vec<T> {
    let (n1, n2, h) = (grid.n1, grid.n2, grid.h1);
    let mut out = vec![T::lin_zero(); f.len()];
    for j in 0..n2 {
        for i in 0..n1 {
            let v = if i == 0 {
                stencil::d1_low(f[grid.idx(0, j)], f[grid.idx(1, j)], f[grid.idx(2, j)], h)
            } else if i + 1 == n1 {
                stencil::d1_high(
                    f[grid.idx(n1 - 1, j)],
                    f[grid.idx(n1 - 2, j)],
                    f[grid.idx(n1 - 3, j)],
                    h,
                )
            } else {
                stencil::d1_central(f[grid.idx(i - 1, j)], f[grid.idx(i + 1, j)], h)
            };
            out[grid.idx(i, j)] = v;
        }
    }
    out
}

/// First derivative along axis 2 (wrapping when periodic).
pub(crate) fn deriv1_axis2<T: LinearData>(grid: &PatchGrid, f: &[T]) -> Vec<T> {
    let (n1, n2, h) = (grid.n1, grid.n2, grid.h2);
    let mut out = vec![T::lin_zero(); f.len()];
    for i in 0..n1 {
        for j in 0..n2 {
            let v = if grid.periodic2 {
                let jp = (j + 1) % n2;
                let jm = (j + n2 - 1) % n2;
                stencil::d1_central(f[grid.idx(i, jm)], f[grid.idx(i, jp)], h)
            } else if j == 0 {
                stencil::d1_low(f[grid.idx(i, 0)], f[grid.idx(i, 1)], f[grid.idx(i, 2)], h)
            } else if j + 1 == n2 {
                stencil::d1_high(
                    f[grid.idx(i, n2 - 1)],
                    f[grid.idx(i, n2 - 2)],
                    f[grid.idx(i, n2 - 3)],
                    h,
                )
            } else {
                stencil::d1_central(f[grid.idx(i, j - 1)], f[grid.idx(i, j + 1)], h)
            };
            out[grid.idx(i, j)] = v;
        }
    }
    out
}

/// Second derivative along axis 1.
pub(crate) fn deriv2_axis1<T: LinearData>(grid: &PatchGrid, f: &[T]) -> Vec<T> {
    let (n1, n2, h) = (grid.n1, grid.n2, grid.h1);
    let mut out = vec![T::lin_zero(); f.len()];
    for j in 0..n2 {
        for i in 0..n1 {
            let v = if i == 0 {
                stencil::d2_edge(
                    f[grid.idx(0, j)],
                    f[grid.idx(1, j)],
                    f[grid.idx(2, j)],
                    f[grid.idx(3, j)],
                    h,
                )
            } else if i + 1 == n1 {
                stencil::d2_edge(
                    f[grid.idx(n1 - 1, j)],
                    f[grid.idx(n1 - 2, j)],
                    f[grid.idx(n1 - 3, j)],
                    f[grid.idx(n1 - 4, j)],
                    h,
                )
            } else {
                stencil::d2_central(f[grid.idx(i - 1, j)], f[grid.idx(i, j)], f[grid.idx(i + 1, j)], h)
            };
            out[grid.idx(i, j)] = v;
        }
    }
    out
}

/// Second derivative along axis 2 (wrapping when periodic).
pub(crate) fn deriv2_axis2<T: LinearData>(grid: &PatchGrid, f: &[T]) -> Vec<T> {
    let (n1, n2, h) = (grid.n1, grid.n2, grid.h2);
    let mut out = vec![T::lin_zero(); f.len()];
    for i in 0..n1 {
        for j in 0..n2 {
            let v = if grid.periodic2 {
                let jp = (j + 1) % n2;
                let jm = (j + n2 - 1) % n2;
                stencil::d2_central(f[grid.idx(i, jm)], f[grid.idx(i, j)], f[grid.idx(i, jp)], h)
            } else if j == 0 {
                stencil::d2_edge(
                    f[grid.idx(i, 0)],
                    f[grid.idx(i, 1)],
                    f[grid.idx(i, 2)],
                    f[grid.idx(i, 3)],
                    h,
                )
            } else if j + 1 == n2 {
                stencil::d2_edge(
                    f[grid.idx(i, n2 - 1)],
                    f[grid.idx(i, n2 - 2)],
                    f[grid.idx(i, n2 - 3)],
                    f[grid.idx(i, n2 - 4)],
                    h,
                )
            } else {
                stencil::d2_central(f[grid.idx(i, j - 1)], f[grid.idx(i, j)], f[grid.idx(i, j + 1)], h)
            };
            out[grid.idx(i, j)] = v;
        }
    }
    out
}

/// Mixed second derivative: axis-2 derivative of the axis-1 derivative.
/// The two composition orders agree exactly (the stencils commute).
pub(crate) fn deriv_mixed<T: LinearData>(grid: &PatchGrid, f: &[T]) -> Vec<T> {
    deriv1_axis2(grid, &deriv1_axis1(grid, f))
}

/// Polar annulus chart on the base geodesic plane `{x3 = 0}`:
/// `b(rho, theta) = (cosh rho, sinh rho cos theta, sinh rho sin theta, 0)`
/// with metric `d rho^2 + sinh^2(rho) d theta^2`. The pole is excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePlaneChart {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_theta: usize,
}

impl BasePlaneChart {
    pub fn new(rho_min: f64, rho_max: f64, n_rho: usize, n_theta: usize) -> Result<Self> {
        if !(rho_min > 0.0 && rho_max > rho_min) {
            return Err(Error::InvalidParam(format!(
                "chart radii ({rho_min}, {rho_max}) invalid; need 0 < rho_min < rho_max"
            )));
        }
        if n_rho < 5 || n_theta < 8 {
            return Err(Error::InvalidParam(format!(
                "chart resolution {n_rho}x{n_theta} below minimum 5x8"
            )));
        }
        Ok(Self {
            rho_min,
            rho_max,
            n_rho,
            n_theta,
        })
    }

    pub fn h_rho(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.n_rho - 1) as f64
    }

    pub fn h_theta(&self) -> f64 {
        std::f64::consts::TAU / self.n_theta as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho_min + self.h_rho() * i as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.h_theta() * j as f64
    }

    pub fn grid(&self) -> PatchGrid {
        PatchGrid {
            n1: self.n_rho,
            n2: self.n_theta,
            h1: self.h_rho(),
            h2: self.h_theta(),
            periodic2: true,
        }
    }

    pub fn base_point(&self, i: usize, j: usize) -> MinkVector {
        let (rho, theta) = (self.rho(i), self.theta(j));
        MinkVector::new(
            rho.cosh(),
            rho.sinh() * theta.cos(),
            rho.sinh() * theta.sin(),
            0.0,
        )
    }

    /// Closed-form base metric `diag(1, sinh^2 rho)` at row `i`.
    pub fn base_metric(&self, i: usize) -> Matrix2<f64> {
        Matrix2::new(1.0, 0.0, 0.0, self.rho(i).sinh().powi(2))
    }
}

/// Point of the Fermi chart: distance `u` along the normal geodesic
/// through the base-plane point `b(rho, theta)`.
pub fn fermi_point(rho: f64, theta: f64, u: f64) -> MinkVector {
    let b = MinkVector::new(
        rho.cosh(),
        rho.sinh() * theta.cos(),
        rho.sinh() * theta.sin(),
        0.0,
    );
    b * u.cosh() + MinkVector::spatial(3) * u.sinh()
}

/// Height function over the chart: the discrete surface representation.
#[derive(Debug, Clone)]
pub struct FermiGraph {
    pub chart: BasePlaneChart,
    pub u: Vec<f64>,
}

impl FermiGraph {
    pub fn new(chart: BasePlaneChart, u: Vec<f64>) -> Result<Self> {
        if u.len() != chart.grid().len() {
            return Err(Error::InvalidParam(format!(
                "height field has {} values for a {} node chart",
                u.len(),
                chart.grid().len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(
                "height field has non-finite values".into(),
            ));
        }
        Ok(Self { chart, u })
    }

    pub fn constant(chart: BasePlaneChart, d: f64) -> Result<Self> {
        Self::new(chart, vec![d; chart.grid().len()])
    }

    pub fn from_fn(chart: BasePlaneChart, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let grid = chart.grid();
        let mut u = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                u.push(f(chart.rho(i), chart.theta(j)));
            }
        }
        Self::new(chart, u)
    }
}

/// Node samples of an immersed surface patch: points on the hyperboloid
/// and exterior unit normals.
#[derive(Debug, Clone)]
pub struct ImmersionField {
    pub grid: PatchGrid,
    pub points: Vec<MinkVector>,
    pub normals: Vec<MinkVector>,
}

impl ImmersionField {
    /// Wrap externally sampled points and normals (used for parametric
    /// patches such as the wedge equidistant pieces).
    pub fn from_samples(
        grid: PatchGrid,
        points: Vec<MinkVector>,
        normals: Vec<MinkVector>,
    ) -> Result<Self> {
        if points.len() != grid.len() || normals.len() != grid.len() {
            return Err(Error::InvalidParam(
                "sample count does not match the grid".into(),
            ));
        }
        Ok(Self {
            grid,
            points,
            normals,
        })
    }
}

/// First fundamental form in chart coordinates, one 2x2 matrix per node.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub grid: PatchGrid,
    pub m: Vec<Matrix2<f64>>,
}

impl MetricField {
    pub fn from_fn(grid: PatchGrid, f: impl Fn(usize, usize) -> Matrix2<f64>) -> Self {
        let mut m = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                m.push(f(i, j));
            }
        }
        Self { grid, m }
    }
}

/// Weingarten endomorphism in chart coordinates, one 2x2 matrix per node.
#[derive(Debug, Clone)]
pub struct ShapeField {
    pub grid: PatchGrid,
    pub m: Vec<Matrix2<f64>>,
}

impl ShapeField {
    pub fn from_fn(grid: PatchGrid, f: impl Fn(usize, usize) -> Matrix2<f64>) -> Self {
        let mut m = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                m.push(f(i, j));
            }
        }
        Self { grid, m }
    }
}

/// Scalar node field.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: PatchGrid,
    pub vals: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: PatchGrid, v: f64) -> Self {
        Self {
            grid,
            vals: vec![v; grid.len()],
        }
    }
}

/// 2x2 inverse by the adjugate, for deterministic assembly.
pub(crate) fn inv2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}

pub(crate) fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Immersion of a Fermi graph: points from [`fermi_point`], tangents by
/// finite differences, normal as the unit Minkowski-orthogonal complement
/// of (point, tangents) oriented to the positive-`u` side.
pub fn immerse(graph: &FermiGraph) -> Result<ImmersionField> {
    let grid = graph.chart.grid();
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            points.push(fermi_point(
                graph.chart.rho(i),
                graph.chart.theta(j),
                graph.u[grid.idx(i, j)],
            ));
        }
    }
    let t1 = deriv1_axis1(&grid, &points);
    let t2 = deriv1_axis2(&grid, &points);
    let mut normals = Vec::with_capacity(grid.len());
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let k = grid.idx(i, j);
            // Degenerate tangents: reject when the angle between them
            // falls below 1e-6 rad (sin^2 measured through the metric).
            let g11 = t1[k].inner(&t1[k]);
            let g22 = t2[k].inner(&t2[k]);
            let g12 = t1[k].inner(&t2[k]);
            let det = g11 * g22 - g12 * g12;
            if !(g11 > 0.0 && g22 > 0.0) || det / (g11 * g22) < 1e-12 {
                return Err(Error::SingularImmersion(format!(
                    "tangents nearly parallel at node ({i}, {j})"
                )));
            }
            let raw = mink_cross(&points[k], &t1[k], &t2[k]);
            let mut n = raw.renormalize_spacelike().map_err(|_| {
                Error::SingularImmersion(format!("no spacelike normal at node ({i}, {j})"))
            })?;
            // Orient towards increasing u.
            let u = graph.u[k];
            let b = graph.chart.base_point(i, j);
            let up = b * u.sinh() + MinkVector::spatial(3) * u.cosh();
            if n.inner(&up) < 0.0 {
                n = -n;
            }
            normals.push(n);
        }
    }
    Ok(ImmersionField {
        grid,
        points,
        normals,
    })
}

/// First fundamental form `g_ij = <d_i Phi, d_j Phi>`.
pub fn induced_metric(imm: &ImmersionField) -> Result<MetricField> {
    let grid = imm.grid;
    let t1 = deriv1_axis1(&grid, &imm.points);
    let t2 = deriv1_axis2(&grid, &imm.points);
    let mut m = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let g = Matrix2::new(
            t1[k].inner(&t1[k]),
            t1[k].inner(&t2[k]),
            t2[k].inner(&t1[k]),
            t2[k].inner(&t2[k]),
        );
        if !(g[(0, 0)] > 0.0) || det2(&g) <= 1e-12 {
            return Err(Error::DegenerateMetric(format!(
                "metric not positive definite at node {k}"
            )));
        }
        m.push(g);
    }
    Ok(MetricField { grid, m })
}

/// Weingarten operator `A = g^{-1} h` with the second fundamental form
/// taken from first derivatives of the computed fields,
/// `h_ij = <d_i N, d_j Phi>`. With the exterior (positive-`u`) normal
/// this makes `A` positive definite on convex equidistant graphs.
pub fn shape_operator(imm: &ImmersionField, g: &MetricField) -> Result<ShapeField> {
    let grid = imm.grid;
    if g.grid != grid {
        return Err(Error::InvalidParam("metric grid mismatch".into()));
    }
    let t1 = deriv1_axis1(&grid, &imm.points);
    let t2 = deriv1_axis2(&grid, &imm.points);
    let dn1 = deriv1_axis1(&grid, &imm.normals);
    let dn2 = deriv1_axis2(&grid, &imm.normals);
    let mut m = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let h = Matrix2::new(
            dn1[k].inner(&t1[k]),
            dn1[k].inner(&t2[k]),
            dn2[k].inner(&t1[k]),
            dn2[k].inner(&t2[k]),
        );
        m.push(inv2(&g.m[k]) * h);
    }
    Ok(ShapeField { grid, m })
}

/// Test oracle for the second fundamental form: `-<N, d_i d_j Phi>`,
/// built from second derivatives of the immersion instead of first
/// derivatives of the normal. Agrees with the production route to O(h^2).
pub fn shape_operator_via_second_derivatives(
    imm: &ImmersionField,
    g: &MetricField,
) -> Result<ShapeField> {
    let grid = imm.grid;
    if g.grid != grid {
        return Err(Error::InvalidParam("metric grid mismatch".into()));
    }
    let p11 = deriv2_axis1(&grid, &imm.points);
    let p22 = deriv2_axis2(&grid, &imm.points);
    let p12 = deriv_mixed(&grid, &imm.points);
    let mut m = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let n = &imm.normals[k];
        let h = Matrix2::new(
            -n.inner(&p11[k]),
            -n.inner(&p12[k]),
            -n.inner(&p12[k]),
            -n.inner(&p22[k]),
        );
        m.push(inv2(&g.m[k]) * h);
    }
    Ok(ShapeField { grid, m })
}

/// Extrinsic Gaussian curvature `det A` per node.
pub fn gaussian_curvature(a: &ShapeField) -> ScalarField {
    ScalarField {
        grid: a.grid,
        vals: a.m.iter().map(det2).collect(),
    }
}

/// Intrinsic Gauss curvature of the metric by the finite-difference
/// Brioschi formula.
pub fn intrinsic_curvature(g: &MetricField) -> ScalarField {
    let grid = g.grid;
    let e: Vec<f64> = g.m.iter().map(|m| m[(0, 0)]).collect();
    let f: Vec<f64> = g.m.iter().map(|m| m[(0, 1)]).collect();
    let gg: Vec<f64> = g.m.iter().map(|m| m[(1, 1)]).collect();
    let e_u = deriv1_axis1(&grid, &e);
    let e_v = deriv1_axis2(&grid, &e);
    let e_vv = deriv2_axis2(&grid, &e);
    let f_u = deriv1_axis1(&grid, &f);
    let f_v = deriv1_axis2(&grid, &f);
    let f_uv = deriv_mixed(&grid, &f);
    let g_u = deriv1_axis1(&grid, &gg);
    let g_v = deriv1_axis2(&grid, &gg);
    let g_uu = deriv2_axis1(&grid, &gg);
    let det3 = |r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]| -> f64 {
        r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
            + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
    };
    let mut vals = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let m1 = det3(
            [
                -0.5 * e_vv[k] + f_uv[k] - 0.5 * g_uu[k],
                0.5 * e_u[k],
                f_u[k] - 0.5 * e_v[k],
            ],
            [f_v[k] - 0.5 * g_u[k], e[k], f[k]],
            [0.5 * g_v[k], f[k], gg[k]],
        );
        let m2 = det3(
            [0.0, 0.5 * e_v[k], 0.5 * g_u[k]],
            [0.5 * e_v[k], e[k], f[k]],
            [0.5 * g_u[k], f[k], gg[k]],
        );
        let den = e[k] * gg[k] - f[k] * f[k];
        vals.push((m1 - m2) / (den * den));
    }
    ScalarField { grid, vals }
}

/// Christoffel symbols of the metric from finite-difference derivatives:
/// returns `(Gamma^1, Gamma^2)` where `Gamma^k[(i,j)]` is `Gamma^k_ij`.
pub(crate) fn christoffel_fields(g: &MetricField) -> (Vec<Matrix2<f64>>, Vec<Matrix2<f64>>) {
    let grid = g.grid;
    let dg1 = deriv1_axis1(&grid, &g.m);
    let dg2 = deriv1_axis2(&grid, &g.m);
    let mut gamma1 = Vec::with_capacity(grid.len());
    let mut gamma2 = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let ginv = inv2(&g.m[k]);
        let dg = [&dg1[k], &dg2[k]];
        // lowered symbols: [ij,l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
        let lowered = |i: usize, j: usize, l: usize| -> f64 {
            0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])
        };
        let mut g1 = Matrix2::zeros();
        let mut g2 = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                g1[(i, j)] = ginv[(0, 0)] * lowered(i, j, 0) + ginv[(0, 1)] * lowered(i, j, 1);
                g2[(i, j)] = ginv[(1, 0)] * lowered(i, j, 0) + ginv[(1, 1)] * lowered(i, j, 1);
            }
        }
        gamma1.push(g1);
        gamma2.push(g2);
    }
    (gamma1, gamma2)
}

/// Covariant Hessian of `f` with one index raised by the metric:
/// `g^{-1} (d^2 f - Gamma^k df_k)`, one endomorphism per node.
pub fn hessian_endomorphism(g: &MetricField, f: &ScalarField) -> Result<Vec<Matrix2<f64>>> {
    let grid = g.grid;
    if f.grid != grid {
        return Err(Error::InvalidParam("scalar field grid mismatch".into()));
    }
    let df1 = deriv1_axis1(&grid, &f.vals);
    let df2 = deriv1_axis2(&grid, &f.vals);
    let d11 = deriv2_axis1(&grid, &f.vals);
    let d22 = deriv2_axis2(&grid, &f.vals);
    let d12 = deriv_mixed(&grid, &f.vals);
    let (gamma1, gamma2) = christoffel_fields(g);
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let hess = Matrix2::new(
            d11[k] - gamma1[k][(0, 0)] * df1[k] - gamma2[k][(0, 0)] * df2[k],
            d12[k] - gamma1[k][(0, 1)] * df1[k] - gamma2[k][(0, 1)] * df2[k],
            d12[k] - gamma1[k][(1, 0)] * df1[k] - gamma2[k][(1, 0)] * df2[k],
            d22[k] - gamma1[k][(1, 1)] * df1[k] - gamma2[k][(1, 1)] * df2[k],
        );
        out.push(inv2(&g.m[k]) * hess);
    }
    Ok(out)
}

/// Surface gradient in chart coordinates: `g^{ij} d_j f` per node.
pub fn surface_gradient(g: &MetricField, f: &ScalarField) -> Result<Vec<Vector2<f64>>> {
    let grid = g.grid;
    if f.grid != grid {
        return Err(Error::InvalidParam("scalar field grid mismatch".into()));
    }
    let df1 = deriv1_axis1(&grid, &f.vals);
    let df2 = deriv1_axis2(&grid, &f.vals);
    Ok((0..grid.len())
        .map(|k| inv2(&g.m[k]) * Vector2::new(df1[k], df2[k]))
        .collect())
}

/// Surface area: `sum sqrt(det g) h1 h2` with trapezoidal weights in the
/// non-periodic direction(s).
pub fn area(imm: &ImmersionField, g: &MetricField) -> f64 {
    let grid = imm.grid;
    let mut total = 0.0;
    for i in 0..grid.n1 {
        let w1 = if i == 0 || i + 1 == grid.n1 { 0.5 } else { 1.0 };
        for j in 0..grid.n2 {
            let w2 = if grid.periodic2 || (j > 0 && j + 1 < grid.n2) {
                1.0
            } else {
                0.5
            };
            total += w1 * w2 * det2(&g.m[grid.idx(i, j)]).max(0.0).sqrt();
        }
    }
    total * grid.h1 * grid.h2
}

/// Divergence-form Laplace-Beltrami discretization,
/// `(1/sqrt g) d_i (sqrt g g^{ij} d_j f)`. Independent of the
/// Hessian-trace route; used as a cross-check oracle.
pub fn laplacian_divergence(g: &MetricField, f: &ScalarField) -> Result<ScalarField> {
    let grid = g.grid;
    if f.grid != grid {
        return Err(Error::InvalidParam("scalar field grid mismatch".into()));
    }
    let df1 = deriv1_axis1(&grid, &f.vals);
    let df2 = deriv1_axis2(&grid, &f.vals);
    let mut flux1 = vec![0.0; grid.len()];
    let mut flux2 = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let ginv = inv2(&g.m[k]);
        let sq = det2(&g.m[k]).max(0.0).sqrt();
        flux1[k] = sq * (ginv[(0, 0)] * df1[k] + ginv[(0, 1)] * df2[k]);
        flux2[k] = sq * (ginv[(1, 0)] * df1[k] + ginv[(1, 1)] * df2[k]);
    }
    let d1 = deriv1_axis1(&grid, &flux1);
    let d2 = deriv1_axis2(&grid, &flux2);
    let vals = (0..grid.len())
        .map(|k| (d1[k] + d2[k]) / det2(&g.m[k]).max(0.0).sqrt())
        .collect();
    Ok(ScalarField { grid, vals })
}
