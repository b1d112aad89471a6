//! Evolution of the Weingarten operator under equidistant flow.
//!
//! Flowing a surface distance `t` along its unit normals transforms the
//! shape operator by the matrix Riccati equation `dA/dt = Id - A^2`. In
//! a frame of frozen eigenvectors each eigenvalue follows one of three
//! closed-form branches (tanh, coth, or the fixed point 1). On top of
//! the branches sits the curvature bound `K(a, k; t)`: an explicit
//! function dominating the Gaussian curvature of every equidistant
//! surface pushed off a convex `k`-surface whose shape operator starts
//! at or above `a * Id`.

use crate::error::{Error, Result};
use nalgebra::Matrix2;

/// Closed-form eigenvalue branch of the Riccati flow `y' = 1 - y^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiBranch {
    /// `y(t) = tanh(T0 + t)`, seeds in [0, 1).
    Tanh { t0: f64 },
    /// `y(t) = coth(T0 + t)`, seeds above 1.
    Coth { t0: f64 },
    /// The fixed point `y = 1`.
    Unit,
}

/// Hypothesis data for the curvature bound: the leaf has constant
/// curvature `det A = k` and its eigenvalues are bounded below by `a`.
/// Consistency requires `0 < a <= sqrt(k)` and `k` in (0, 1).
#[derive(Debug, Clone, Copy)]
pub struct CurvatureBoundParams {
    a: f64,
    k: f64,
}

impl CurvatureBoundParams {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidParam(format!("curvature {k} outside (0, 1)")));
        }
        if !(a > 0.0 && a <= k.sqrt() + 1e-12) {
            return Err(Error::InvalidParam(format!(
                "eigenvalue floor {a} outside (0, sqrt({k})]"
            )));
        }
        Ok(Self { a, k })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

fn arccoth(x: f64) -> f64 {
    (1.0 / x).atanh()
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Right-hand side of the equidistant-flow Riccati equation: `Id - A^2`.
pub fn riccati_rhs(a: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::identity() - a * a
}

/// Branch selection for a seed eigenvalue. Seeds within 1e-12 of 1 are
/// the fixed point; negative seeds are outside the convex setting.
pub fn classify_branch(lambda0: f64) -> Result<RiccatiBranch> {
    if lambda0 < 0.0 {
        return Err(Error::NonConvexSeed(format!(
            "negative seed eigenvalue {lambda0}"
        )));
    }
    if (lambda0 - 1.0).abs() <= 1e-12 {
        Ok(RiccatiBranch::Unit)
    } else if lambda0 < 1.0 {
        Ok(RiccatiBranch::Tanh {
            t0: lambda0.atanh(),
        })
    } else {
        Ok(RiccatiBranch::Coth {
            t0: arccoth(lambda0),
        })
    }
}

/// Closed-form eigenvalue at flow time `t >= 0`.
pub fn evolve_eigen(branch: &RiccatiBranch, t: f64) -> f64 {
    match branch {
        RiccatiBranch::Tanh { t0 } => (t0 + t).tanh(),
        RiccatiBranch::Coth { t0 } => coth(t0 + t),
        RiccatiBranch::Unit => 1.0,
    }
}

/// 2x2 Cholesky factor (lower triangular) of a positive definite matrix.
fn cholesky2(g: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let g11 = g[(0, 0)];
    if g11 <= 0.0 {
        return Err(Error::DegenerateMetric("g11 <= 0".into()));
    }
    let l11 = g11.sqrt();
    let l21 = g[(1, 0)] / l11;
    let rest = g[(1, 1)] - l21 * l21;
    if rest <= 0.0 {
        return Err(Error::DegenerateMetric("metric not positive definite".into()));
    }
    Ok(Matrix2::new(l11, 0.0, l21, rest.sqrt()))
}

/// Eigen-decomposition of a symmetric 2x2: returns eigenvalues (ascending)
/// and the rotation whose columns are the eigenvectors.
fn sym_eigen2(m: &Matrix2<f64>) -> ([f64; 2], Matrix2<f64>) {
    let a = m[(0, 0)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let c = m[(1, 1)];
    if b.abs() <= 1e-300 {
        if a <= c {
            return ([a, c], Matrix2::identity());
        }
        return ([c, a], Matrix2::new(0.0, 1.0, 1.0, 0.0));
    }
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (sn, cs) = theta.sin_cos();
    let l1 = a * cs * cs + 2.0 * b * cs * sn + c * sn * sn;
    let l2 = a * sn * sn - 2.0 * b * cs * sn + c * cs * cs;
    if l1 <= l2 {
        ([l1, l2], Matrix2::new(cs, -sn, sn, cs))
    } else {
        ([l2, l1], Matrix2::new(-sn, cs, cs, sn))
    }
}

/// Evolve a g-self-adjoint positive shape operator by the closed-form
/// branches: eigenvectors frozen in a g-orthonormal frame, eigenvalues
/// evolved individually.
pub fn evolve_shape(a0: &Matrix2<f64>, g: &Matrix2<f64>, t: f64) -> Result<Matrix2<f64>> {
    let l = cholesky2(g)?;
    let l_inv = Matrix2::new(
        1.0 / l[(0, 0)],
        0.0,
        -l[(1, 0)] / (l[(0, 0)] * l[(1, 1)]),
        1.0 / l[(1, 1)],
    );
    // Congruence to a g-orthonormal frame: a_hat = L^T A L^{-T}.
    let a_hat = l.transpose() * a0 * l_inv.transpose();
    let asym = (a_hat[(0, 1)] - a_hat[(1, 0)]).abs();
    let scale = 1.0 + a_hat.abs().max();
    if asym > 1e-8 * scale {
        return Err(Error::NonSymmetric(format!(
            "asymmetry {asym:.3e} in the g-orthonormal frame"
        )));
    }
    let sym = Matrix2::new(
        a_hat[(0, 0)],
        0.5 * (a_hat[(0, 1)] + a_hat[(1, 0)]),
        0.5 * (a_hat[(0, 1)] + a_hat[(1, 0)]),
        a_hat[(1, 1)],
    );
    let (evals, q) = sym_eigen2(&sym);
    let b1 = classify_branch(evals[0])?;
    let b2 = classify_branch(evals[1])?;
    let lam = Matrix2::new(evolve_eigen(&b1, t), 0.0, 0.0, evolve_eigen(&b2, t));
    let evolved_hat = q * lam * q.transpose();
    Ok(l_inv.transpose() * evolved_hat * l.transpose())
}

/// Shape-operator rate under a normal deformation with speed `f`:
/// `f Id - Hess(f) - f A^2`, with `Hess(f)` the raised Hessian.
pub fn normal_deformation_rhs(
    a: &Matrix2<f64>,
    f: f64,
    hess_f: &Matrix2<f64>,
) -> Matrix2<f64> {
    Matrix2::identity() * f - hess_f - a * a * f
}

/// Metric rate under the same deformation: `f (gA + (gA)^T)`.
pub fn metric_deformation_rhs(g: &Matrix2<f64>, a: &Matrix2<f64>, f: f64) -> Matrix2<f64> {
    let ga = g * a;
    (ga + ga.transpose()) * f
}

/// The comparison function `phi(c, t) = coth(c + t) tanh(t)` and its
/// time derivative `sinh(c) cosh(c + 2t) / (cosh(t) sinh(c + t))^2`.
/// The value is strictly increasing in `t` and tends to 1.
pub fn phi(c: f64, t: f64) -> (f64, f64) {
    let value = coth(c + t) * t.tanh();
    let deriv = c.sinh() * (c + 2.0 * t).cosh() / (t.cosh() * (c + t).sinh()).powi(2);
    (value, deriv)
}

/// Upper bound for the Gaussian curvature of the surface at flow time
/// `t` off a convex `k`-leaf with eigenvalue floor `a`: the clamped
/// maximum of the three case bounds.
///
/// Case (i) applies when the seed can split past the fixed point
/// (`a < k`, one coth branch); case (ii) is the seed on the fixed point;
/// case (iii) covers two tanh branches, where the second factor falls
/// back to 1 when `k / a >= 1` makes its arctanh undefined.
pub fn curvature_bound(p: &CurvatureBoundParams, t: f64) -> f64 {
    let (a, k) = (p.a, p.k);
    let k2 = (k.atanh() + t).tanh();
    let mut best = k2;
    if a < k {
        let a1 = k.atanh();
        let a2 = arccoth(k / a);
        best = best.max((a1 + t).tanh() * coth(a2 + t));
    }
    let factor = if a > k { ((k / a).atanh() + t).tanh() } else { 1.0 };
    best = best.max((k.sqrt().atanh() + t).tanh() * factor);
    best.min(1.0)
}
