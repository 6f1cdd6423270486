//! Krylov solution of the screen problems, with and without block Calderón
//! preconditioning, and dense spectral diagnostics.

mod diagnostics;
mod gmres;
mod precond;

use num_complex::Complex64 as c64;

pub use diagnostics::{effective_condition_number, Diagnostics, DENSE_LIMIT};
pub use gmres::{gmres, GmresOutcome};
pub use precond::{make_calderon_preconditioner, BlockDiagonal, CalderonPreconditioner, Identity, Preconditioner};

use crate::assembly::{
    assemble_duality, assemble_hypersingular, assemble_rhs, assemble_single_layer, Form, GalerkinMatrix, IncidentWave,
    KernelConfig, QuadratureConfig, SpaceTag,
};
use crate::error::{Error, Result};
use crate::geometry::MultiScreen;
use crate::spaces::{multitrace_space, FunctionSpace, Problem, Reduction, Side};
use crate::vec3::Vec3;

/// Tolerances, iteration caps, quadrature and excitation of a solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Quadrature of the system matrix.
    pub quadrature: QuadratureConfig,
    /// Quadrature of the preconditioner blocks.
    pub precond_quadrature: QuadratureConfig,
    pub direction: Vec3,
    pub amplitude: c64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            outer_tol: 2.0e-5,
            inner_tol: 2.0e-12,
            max_outer: 2000,
            max_inner: 2000,
            quadrature: QuadratureConfig::default(),
            precond_quadrature: QuadratureConfig::preconditioner(),
            direction: [0.0, 0.0, 1.0],
            amplitude: c64::new(1.0, 0.0),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.inner_tol && self.inner_tol < self.outer_tol && self.outer_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must satisfy 0 < inner ({:e}) < outer ({:e}) < 1",
                self.inner_tol, self.outer_tol
            )));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidConfig("iteration caps must be positive".into()));
        }
        self.quadrature.validate()?;
        self.precond_quadrature.validate()
    }

    pub fn wave(&self, kappa: c64) -> Result<IncidentWave> {
        Ok(IncidentWave::new(self.direction, kappa)?.with_amplitude(self.amplitude))
    }
}

/// Outcome of one (outer) solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub coefficients: Vec<c64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub inner_iteration_total: usize,
    pub converged: bool,
    pub preconditioned: bool,
    pub diagnostics: Option<Diagnostics>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Assembled system of one problem on one (possibly reduced) multi-trace space.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub problem: Problem,
    pub reduction: Reduction,
    pub kappa: c64,
    pub space: FunctionSpace,
    pub system: GalerkinMatrix,
    pub rhs: Vec<c64>,
}

impl Discretization {
    /// Builds the primal space, the system matrix (V or W) and the load vector.
    pub fn assemble(screen: &MultiScreen, problem: Problem, kappa: c64, reduction: Reduction, cfg: &SolveConfig) -> Result<Self> {
        cfg.validate()?;
        let kc = KernelConfig::new(kappa)?;
        let space = multitrace_space(screen, problem, Side::Primal, reduction)?;
        let system = match problem {
            Problem::Dirichlet => assemble_single_layer(&space, &space, &kc, &cfg.quadrature)?,
            Problem::Neumann => assemble_hypersingular(&space, &space, &kc, &cfg.quadrature)?,
        };
        let rhs = assemble_rhs(&space, &cfg.wave(kappa)?, problem)?;
        Ok(Discretization {
            problem,
            reduction,
            kappa,
            space,
            system,
            rhs,
        })
    }

    /// The same problem on a reduced space, by restricting a full
    /// discretisation: reduced basis functions are a subset of the full ones.
    pub fn restrict(&self, screen: &MultiScreen, reduction: Reduction) -> Result<Self> {
        let space = multitrace_space(screen, self.problem, Side::Primal, reduction)?;
        let idx = space.embedding_in(&self.space)?;
        let entries = self.system.slice(&idx, &idx);
        let tag = SpaceTag::of(&space);
        Ok(Discretization {
            problem: self.problem,
            reduction,
            kappa: self.kappa,
            rhs: idx.iter().map(|&i| self.rhs[i]).collect(),
            system: GalerkinMatrix {
                entries,
                form: self.system.form,
                test: tag,
                trial: tag,
            },
            space,
        })
    }

    pub fn ndof(&self) -> usize {
        self.space.dim()
    }

    /// Block Calderón preconditioner: the opposite-order operator on each
    /// panel's dual space, paired with the primal space through the Gram matrix.
    pub fn preconditioner(&self, screen: &MultiScreen, cfg: &SolveConfig) -> Result<CalderonPreconditioner> {
        let dual = multitrace_space(screen, self.problem, Side::Dual, self.reduction)?;
        let kc = KernelConfig::new(self.kappa)?;
        let blocks = (0..dual.blocks().len())
            .map(|b| {
                let sub = dual.block_space(b)?;
                let mut g = match self.problem {
                    Problem::Dirichlet => assemble_hypersingular(&sub, &sub, &kc, &cfg.precond_quadrature)?,
                    Problem::Neumann => assemble_single_layer(&sub, &sub, &kc, &cfg.precond_quadrature)?,
                };
                g.form = Form::PreconditionerBlock;
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        let m = assemble_duality(&dual, &self.space)?;
        make_calderon_preconditioner(BlockDiagonal::new(blocks)?, m, cfg)
    }

    /// GMRES on `A x = b`, or on `P A x = P b` with a preconditioner.
    pub fn solve(&self, precond: Option<&CalderonPreconditioner>, cfg: &SolveConfig) -> Result<SolveReport> {
        cfg.validate()?;
        let out = match precond {
            None => gmres(|x: &[c64]| Ok(self.system.apply(x)), &self.rhs, cfg.outer_tol, cfg.max_outer)?,
            Some(p) => {
                if p.dim() != self.ndof() {
                    return Err(Error::DimensionMismatch {
                        what: "preconditioner",
                        left: p.dim(),
                        right: self.ndof(),
                    });
                }
                p.reset_counter();
                let b = p.apply(&self.rhs)?;
                gmres(|x: &[c64]| p.apply(&self.system.apply(x)), &b, cfg.outer_tol, cfg.max_outer)?
            }
        };
        Ok(SolveReport {
            coefficients: out.x,
            iterations: out.iterations,
            residual_history: out.residual_history,
            inner_iteration_total: precond.map_or(0, |p| p.inner_iterations()),
            converged: out.converged,
            preconditioned: precond.is_some(),
            diagnostics: None,
        })
    }
}

fn solve_problem(screen: &MultiScreen, problem: Problem, kappa: c64, reduction: Reduction, precondition: bool, cfg: &SolveConfig) -> Result<SolveReport> {
    let d = Discretization::assemble(screen, problem, kappa, reduction, cfg)?;
    let p = if precondition { Some(d.preconditioner(screen, cfg)?) } else { None };
    d.solve(p.as_ref(), cfg)
}

/// Sound-soft scattering: single-layer equation on the primal Dirichlet space.
pub fn solve_dirichlet(screen: &MultiScreen, kappa: c64, reduction: Reduction, precondition: bool, cfg: &SolveConfig) -> Result<SolveReport> {
    solve_problem(screen, Problem::Dirichlet, kappa, reduction, precondition, cfg)
}

/// Sound-hard scattering: hypersingular equation on the primal Neumann space.
pub fn solve_neumann(screen: &MultiScreen, kappa: c64, reduction: Reduction, precondition: bool, cfg: &SolveConfig) -> Result<SolveReport> {
    solve_problem(screen, Problem::Neumann, kappa, reduction, precondition, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_junction_screen;

    #[test]
    fn tolerances_validated() {
        let mut c = SolveConfig::default();
        assert!(c.validate().is_ok());
        c.inner_tol = 1e-3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_excitation_gives_zero_solution() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let cfg = SolveConfig {
            amplitude: c64::new(0.0, 0.0),
            ..SolveConfig::default()
        };
        for p in [true, false] {
            let r = solve_neumann(&s, c64::new(1.0, 0.0), Reduction::Full, p, &cfg).unwrap();
            assert_eq!(r.iterations, 0);
            assert!(r.coefficients.iter().all(|x| *x == c64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn restriction_matches_direct_assembly() {
        let s = make_junction_screen(3, 1.0, 0.25).unwrap();
        let cfg = SolveConfig::default();
        let k = c64::new(1.0, 0.0);
        for p in [Problem::Dirichlet, Problem::Neumann] {
            let full = Discretization::assemble(&s, p, k, Reduction::Full, &cfg).unwrap();
            let direct = Discretization::assemble(&s, p, k, Reduction::SingleStrip, &cfg).unwrap();
            let sliced = full.restrict(&s, Reduction::SingleStrip).unwrap();
            let scale = direct.system.entries.norm_max();
            let mut diff = 0.0f64;
            for i in 0..direct.ndof() {
                for j in 0..direct.ndof() {
                    diff = diff.max((direct.system.entries[(i, j)] - sliced.system.entries[(i, j)]).norm());
                }
                diff = diff.max((direct.rhs[i] - sliced.rhs[i]).norm() / scale);
            }
            assert!(diff < 1e-12 * scale, "{p}: {diff}");
        }
    }
}
