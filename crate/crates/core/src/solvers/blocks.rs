//! Block subproblem solvers shared by the four formulations. Each one reads its
//! own row segment of the engine's anchor `v = c − Σ_{j≠l} A_j x_j − u`.

use std::cell::Cell;
use std::rc::Rc;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::SpdFactor;
use crate::multiblock::{BlockMatrix, BlockProx};
use crate::problem::{check_loss_sum, PenaltySpec};
use crate::prox::{project_nonneg, prox_check_scalar, prox_penalty, PolyhedronProjector};

/// How often (in β-updates) the cached factor is compared against a fresh solve.
pub const REFRESH_EVERY: usize = 100;

/// Running maximum of the cached-vs-fresh relative solve gap.
#[derive(Clone, Debug, Default)]
pub struct FactorAudit(Rc<Cell<Option<f64>>>);

impl FactorAudit {
    pub fn get(&self) -> Option<f64> {
        self.0.get()
    }

    fn check(&self, factor: &SpdFactor, rhs: &DVector<f64>, cached: &DVector<f64>) {
        if let Some(fresh) = factor.fresh_solve(rhs) {
            let gap = (cached - &fresh).norm() / fresh.norm().max(f64::MIN_POSITIVE);
            let worst = self.0.get().map_or(gap, |g| g.max(gap));
            self.0.set(Some(worst));
        }
    }
}

/// `argmin (γ/2)‖A β − v‖²` with `AᵀA` factored once.
pub struct LeastSquaresBlock {
    a: BlockMatrix,
    factor: SpdFactor,
    calls: usize,
    audit: FactorAudit,
}

impl LeastSquaresBlock {
    pub fn new(a: BlockMatrix, normal: DMatrix<f64>, audit: FactorAudit) -> Result<Self> {
        Ok(Self { a, factor: SpdFactor::new(normal)?, calls: 0, audit })
    }
}

impl BlockProx for LeastSquaresBlock {
    fn prox(&mut self, anchor: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        let rhs = self.a.apply_t(anchor);
        self.prox_normal(&rhs, gamma)
    }

    fn takes_normal_rhs(&self) -> bool {
        true
    }

    fn prox_normal(&mut self, rhs: &DVector<f64>, _gamma: f64) -> Result<DVector<f64>> {
        let beta = self.factor.solve(rhs);
        self.calls += 1;
        if self.calls % REFRESH_EVERY == 0 {
            self.audit.check(&self.factor, rhs, &beta);
        }
        Ok(beta)
    }
}

/// Check-loss block with coefficient `+I` on segment `[offset, offset+len)`.
pub struct CheckBlock {
    pub tau: f64,
    pub offset: usize,
    pub len: usize,
}

impl BlockProx for CheckBlock {
    fn prox(&mut self, anchor: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        Ok(anchor.rows(self.offset, self.len).map(|v| prox_check_scalar(v, self.tau, gamma)))
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        Some(check_loss_sum(x, self.tau))
    }
}

/// Penalty block with coefficient `−I`: returns `prox_penalty(−v_seg)`.
pub struct PenaltyBlock {
    pub pen: PenaltySpec,
    pub offset: usize,
    pub len: usize,
}

impl BlockProx for PenaltyBlock {
    fn prox(&mut self, anchor: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        prox_penalty(&-anchor.rows(self.offset, self.len).into_owned(), &self.pen, gamma)
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        Some(self.pen.total(x))
    }
}

/// Nonnegative slack with coefficient `−I`: `(−v_seg)₊`.
pub struct NonnegBlock {
    pub offset: usize,
    pub len: usize,
}

impl BlockProx for NonnegBlock {
    fn prox(&mut self, anchor: &DVector<f64>, _gamma: f64) -> Result<DVector<f64>> {
        Ok(project_nonneg(&-anchor.rows(self.offset, self.len).into_owned()))
    }

    fn value(&self, _x: &DVector<f64>) -> Option<f64> {
        Some(0.0)
    }
}

/// Polyhedron-indicator block with coefficient `−I`: `Proj_𝒞(−v_seg)`.
pub struct ProjectionBlock {
    pub projector: PolyhedronProjector,
    pub offset: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub unconverged: Rc<Cell<usize>>,
}

impl BlockProx for ProjectionBlock {
    fn prox(&mut self, anchor: &DVector<f64>, _gamma: f64) -> Result<DVector<f64>> {
        let len = self.projector.dim();
        let target = -anchor.rows(self.offset, len).into_owned();
        let out = self.projector.project(&target, self.tol, self.max_iters)?;
        if !out.converged {
            self.unconverged.set(self.unconverged.get() + 1);
        }
        Ok(out.point)
    }

    fn value(&self, _x: &DVector<f64>) -> Option<f64> {
        Some(0.0)
    }
}

/// `argmin P(Dβ) + (γ/2)‖A β − v‖²` for the three-block formulations.
///
/// Inner scaled ADMM on the split `Dβ = ζ` with penalty `ρ = γκ`:
///   β ← (AᵀA + κDᵀD)⁻¹ (Aᵀv + κDᵀ(ζ − η))
///   ζ ← prox_P(Dβ + η; ρ)
///   η ← η + Dβ − ζ
/// with ζ, η carried over between outer iterations. When the penalty is
/// inactive the least-squares solution is returned directly.
pub struct GeneralizedLassoBlock {
    a: BlockMatrix,
    d: DMatrix<f64>,
    pen: PenaltySpec,
    kappa: f64,
    plain: SpdFactor,
    split: Option<SpdFactor>,
    zeta: DVector<f64>,
    eta: DVector<f64>,
    tol: f64,
    max_iters: usize,
    calls: usize,
    audit: FactorAudit,
    pub inner_iterations: Rc<Cell<usize>>,
}

impl GeneralizedLassoBlock {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: BlockMatrix,
        normal: DMatrix<f64>,
        d: DMatrix<f64>,
        pen: PenaltySpec,
        beta0: &DVector<f64>,
        tol: f64,
        max_iters: usize,
        audit: FactorAudit,
    ) -> Result<Self> {
        let active = pen.lambda > 0.0 && d.nrows() > 0;
        let dtd = d.tr_mul(&d);
        let kappa = if active {
            (normal.trace() / dtd.trace().max(f64::MIN_POSITIVE)).max(1.0)
        } else {
            1.0
        };
        let split = if active { Some(SpdFactor::new(&normal + &dtd * kappa)?) } else { None };
        let zeta = &d * beta0;
        let eta = DVector::zeros(d.nrows());
        Ok(Self {
            a,
            plain: SpdFactor::new(normal)?,
            split,
            d,
            pen,
            kappa,
            zeta,
            eta,
            tol,
            max_iters,
            calls: 0,
            audit,
            inner_iterations: Rc::new(Cell::new(0)),
        })
    }
}

impl BlockProx for GeneralizedLassoBlock {
    fn prox(&mut self, anchor: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        let atv = self.a.apply_t(anchor);
        self.prox_normal(&atv, gamma)
    }

    fn takes_normal_rhs(&self) -> bool {
        true
    }

    fn prox_normal(&mut self, atv: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        self.calls += 1;
        let audit_now = self.calls % REFRESH_EVERY == 0;
        let factor = match &self.split {
            None => {
                let beta = self.plain.solve(atv);
                if audit_now {
                    self.audit.check(&self.plain, atv, &beta);
                }
                return Ok(beta);
            }
            Some(f) => f,
        };
        let rho = gamma * self.kappa;
        let m = self.d.nrows() as f64;
        let p = self.d.ncols() as f64;
        let mut beta = DVector::zeros(self.d.ncols());
        for it in 1..=self.max_iters {
            let rhs = atv + self.d.tr_mul(&(&self.zeta - &self.eta)) * self.kappa;
            beta = factor.solve(&rhs);
            if audit_now && it == 1 {
                self.audit.check(factor, &rhs, &beta);
            }
            let db = &self.d * &beta;
            let zeta_new = prox_penalty(&(&db + &self.eta), &self.pen, rho)?;
            let r = &db - &zeta_new;
            self.eta += &r;
            let s = self.d.tr_mul(&(&zeta_new - &self.zeta)) * rho;
            self.zeta = zeta_new;
            self.inner_iterations.set(self.inner_iterations.get() + 1);
            let eps_pri = m.sqrt() * self.tol + self.tol * db.norm().max(self.zeta.norm());
            let eps_dual = p.sqrt() * self.tol + self.tol * rho * self.d.tr_mul(&self.eta).norm();
            if r.norm() <= eps_pri && s.norm() <= eps_dual {
                break;
            }
        }
        Ok(beta)
    }
}
