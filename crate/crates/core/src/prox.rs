//! Closed-form proximal operators and the projections used by the block updates.
//!
//! Every prox here minimizes `f(z) + (γ/2)‖v − z‖²` for the stated `f`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, SpdFactor};
use crate::problem::{PenaltyFamily, PenaltySpec};

/// ST(t, k) = sign(t)(|t| − k)₊. Panics on a negative threshold.
#[inline]
pub fn soft_threshold(t: f64, k: f64) -> f64 {
    assert!(k >= 0.0, "soft threshold must be nonnegative, got {k}");
    if t > k {
        t - k
    } else if t < -k {
        t + k
    } else {
        0.0
    }
}

#[inline]
fn pos(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Prox of the check loss at one coordinate: [v − τ/γ]₊ − [−v + (τ−1)/γ]₊.
#[inline]
pub fn prox_check_scalar(v: f64, tau: f64, gamma: f64) -> f64 {
    pos(v - tau / gamma) - pos(-v + (tau - 1.0) / gamma)
}

pub fn prox_check(v: &DVector<f64>, tau: f64, gamma: f64) -> DVector<f64> {
    debug_assert!(tau > 0.0 && tau < 1.0 && gamma > 0.0);
    v.map(|vi| prox_check_scalar(vi, tau, gamma))
}

/// Scalar penalty prox. Assumes the concavity condition was checked by the caller.
#[inline]
pub fn prox_penalty_scalar(delta: f64, pen: &PenaltySpec, gamma: f64) -> f64 {
    let lam = pen.lambda;
    match pen.family {
        PenaltyFamily::Lasso => soft_threshold(delta, lam / gamma),
        PenaltyFamily::Scad => {
            let xi = pen.xi;
            let a = delta.abs();
            if a <= lam + lam / gamma {
                soft_threshold(delta, lam / gamma)
            } else if a <= xi * lam {
                let k = (xi - 1.0) * gamma;
                soft_threshold(delta, xi * lam / k) / (1.0 - 1.0 / k)
            } else {
                delta
            }
        }
        PenaltyFamily::Mcp => {
            let xi = pen.xi;
            if delta.abs() <= xi * lam {
                soft_threshold(delta, lam / gamma) / (1.0 - 1.0 / (xi * gamma))
            } else {
                delta
            }
        }
    }
}

/// Componentwise minimizer of pλ(z) + (γ/2)(δ − z)².
pub fn prox_penalty(delta: &DVector<f64>, pen: &PenaltySpec, gamma: f64) -> Result<DVector<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
    }
    pen.check_concavity(gamma)?;
    Ok(delta.map(|d| prox_penalty_scalar(d, pen, gamma)))
}

pub fn project_nonneg(v: &DVector<f64>) -> DVector<f64> {
    v.map(pos)
}

/// Result of one projection solve.
#[derive(Clone, Debug)]
pub struct ProjectionOutcome {
    pub point: DVector<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean projection onto `{w : Cw ≥ d, Ew = f}`.
///
/// Solves `min ½‖w − v‖²` with an inner two-block ADMM over `(w, t)` where
/// `Cw − t = d, t ≥ 0, Ew = f`. The factorization of `I + ρ(CᵀC + EᵀE)` is
/// computed once; the primal slack and scaled duals persist between calls so
/// consecutive projections of nearby points start warm.
#[derive(Clone, Debug)]
pub struct PolyhedronProjector {
    c: DMatrix<f64>,
    d: DVector<f64>,
    e: DMatrix<f64>,
    f: DVector<f64>,
    rho: f64,
    factor: Option<SpdFactor>,
    w: DVector<f64>,
    t: DVector<f64>,
    mu_ineq: DVector<f64>,
    mu_eq: DVector<f64>,
}

impl PolyhedronProjector {
    pub fn new(c: DMatrix<f64>, d: DVector<f64>, e: DMatrix<f64>, f: DVector<f64>) -> Result<Self> {
        let p = c.ncols();
        if e.ncols() != p || d.len() != c.nrows() || f.len() != e.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "projection set: C is {}x{}, d {}, E is {}x{}, f {}",
                c.nrows(),
                c.ncols(),
                d.len(),
                e.nrows(),
                e.ncols(),
                f.len()
            )));
        }
        let rho = 1.0;
        let factor = if c.nrows() + e.nrows() == 0 {
            None
        } else {
            let mut m = c.tr_mul(&c) + e.tr_mul(&e);
            m *= rho;
            for i in 0..p {
                m[(i, i)] += 1.0;
            }
            Some(SpdFactor::new(m)?)
        };
        let q = c.nrows();
        let s = e.nrows();
        Ok(Self {
            c,
            d,
            e,
            f,
            rho,
            factor,
            w: DVector::zeros(p),
            t: DVector::zeros(q),
            mu_ineq: DVector::zeros(q),
            mu_eq: DVector::zeros(s),
        })
    }

    pub fn dim(&self) -> usize {
        self.c.ncols()
    }

    /// Seed the warm start with a previous projection.
    pub fn warm_start(&mut self, w: &DVector<f64>) {
        self.w.copy_from(w);
        self.t = project_nonneg(&(&self.c * w - &self.d));
    }

    /// Project `v`; returns the last iterate even when `tol` was not reached.
    pub fn project(&mut self, v: &DVector<f64>, tol: f64, max_iters: usize) -> Result<ProjectionOutcome> {
        let factor = match &self.factor {
            None => {
                return Ok(ProjectionOutcome {
                    point: v.clone(),
                    kkt_residual: 0.0,
                    iterations: 0,
                    converged: true,
                })
            }
            Some(f) => f,
        };
        let rho = self.rho;
        let mut kkt = f64::INFINITY;
        for it in 1..=max_iters {
            let rhs = v
                + (self.c.tr_mul(&(&self.t + &self.d - &self.mu_ineq))
                    + self.e.tr_mul(&(&self.f - &self.mu_eq)))
                    * rho;
            let w = factor.solve(&rhs);
            let cw = &self.c * &w;
            self.t = project_nonneg(&(&cw - &self.d + &self.mu_ineq));
            let dmu_ineq = &cw - &self.t - &self.d;
            let dmu_eq = &self.e * &w - &self.f;
            self.mu_ineq += &dmu_ineq;
            self.mu_eq += &dmu_eq;
            self.w = w;

            kkt = self.kkt_residual(v, &cw);
            if kkt <= tol {
                return Ok(ProjectionOutcome {
                    point: self.w.clone(),
                    kkt_residual: kkt,
                    iterations: it,
                    converged: true,
                });
            }
            if it >= 50 && it % 10 == 0 && self.infeasibility_certificate(&dmu_ineq, &dmu_eq) {
                return Err(Error::InfeasiblePolyhedron);
            }
        }
        Ok(ProjectionOutcome {
            point: self.w.clone(),
            kkt_residual: kkt,
            iterations: max_iters,
            converged: false,
        })
    }

    /// Largest violation among stationarity, primal feasibility, multiplier sign
    /// and complementarity of the projection QP at the current iterate.
    fn kkt_residual(&self, v: &DVector<f64>, cw: &DVector<f64>) -> f64 {
        let rho = self.rho;
        let stationarity =
            &self.w - v + (self.c.tr_mul(&self.mu_ineq) + self.e.tr_mul(&self.mu_eq)) * rho;
        let mut worst = norm_inf(&stationarity);
        if self.e.nrows() > 0 {
            worst = worst.max(norm_inf(&(&self.e * &self.w - &self.f)));
        }
        for i in 0..self.c.nrows() {
            let slack = cw[i] - self.d[i];
            let multiplier = -rho * self.mu_ineq[i];
            worst = worst
                .max(pos(-slack))
                .max(pos(-multiplier))
                .max(pos(multiplier).min(pos(slack)));
        }
        worst
    }

    /// Farkas certificate from the dual increments: a ≥ 0, Cᵀa + Eᵀb ≈ 0, aᵀd + bᵀf > 0.
    fn infeasibility_certificate(&self, dmu_ineq: &DVector<f64>, dmu_eq: &DVector<f64>) -> bool {
        let a = dmu_ineq * (-self.rho);
        let b = dmu_eq * (-self.rho);
        let scale = norm_inf(&a).max(norm_inf(&b));
        if scale < 1e-9 {
            return false;
        }
        let tol = 1e-6 * scale;
        let combo = self.c.tr_mul(&a) + self.e.tr_mul(&b);
        let gap = a.dot(&self.d) + b.dot(&self.f);
        norm_inf(&combo) <= tol && a.iter().all(|&ai| ai >= -tol) && gap > tol
    }
}

/// Project `v` onto `{w : Cw ≥ d, Ew = f}` to KKT tolerance `tol`.
pub fn project_polyhedron(
    v: &DVector<f64>,
    c: &DMatrix<f64>,
    d: &DVector<f64>,
    e: &DMatrix<f64>,
    f: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<DVector<f64>> {
    if v.len() != c.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "v.len = {} but C has {} columns",
            v.len(),
            c.ncols()
        )));
    }
    let mut proj = PolyhedronProjector::new(c.clone(), d.clone(), e.clone(), f.clone())?;
    proj.warm_start(v);
    let out = proj.project(v, tol, max_iters)?;
    if out.converged {
        Ok(out.point)
    } else {
        Err(Error::ProjectionNotConverged { kkt_residual: out.kkt_residual })
    }
}
