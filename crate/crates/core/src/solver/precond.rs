//! Block-diagonal Calderón preconditioner `P = M⁻¹ B M⁻ᵀ`.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as c64;

use crate::assembly::{GalerkinMatrix, GramMatrix};
use crate::error::{Error, Result};
use crate::solver::gmres::gmres;
use crate::solver::SolveConfig;

/// A linear map applied to residuals before GMRES sees them.
pub trait Preconditioner {
    fn dim(&self) -> usize;

    fn apply(&self, r: &[c64]) -> Result<Vec<c64>>;

    /// `P A`, column by column unless overridden.
    fn materialize(&self, a: &Mat<c64>) -> Result<Mat<c64>> {
        let mut out = Mat::<c64>::zeros(a.nrows(), a.ncols());
        for j in 0..a.ncols() {
            let y = self.apply(a.col_as_slice(j))?;
            out.col_as_slice_mut(j).copy_from_slice(&y);
        }
        Ok(out)
    }
}

/// Square dense blocks placed along the diagonal.
#[derive(Clone, Debug)]
pub struct BlockDiagonal {
    blocks: Vec<(Range<usize>, GalerkinMatrix)>,
    dim: usize,
}

impl BlockDiagonal {
    /// Blocks in order; each must be square and they tile `0..dim`.
    pub fn new(blocks: Vec<GalerkinMatrix>) -> Result<Self> {
        let mut out = Vec::with_capacity(blocks.len());
        let mut start = 0;
        for b in blocks {
            if b.nrows() != b.ncols() {
                return Err(Error::DimensionMismatch {
                    what: "preconditioner block",
                    left: b.nrows(),
                    right: b.ncols(),
                });
            }
            let end = start + b.nrows();
            out.push((start..end, b));
            start = end;
        }
        Ok(BlockDiagonal { blocks: out, dim: start })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Range<usize>, &GalerkinMatrix)> {
        self.blocks.iter().map(|(r, b)| (r, b))
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); self.dim];
        for (r, b) in &self.blocks {
            y[r.clone()].copy_from_slice(&b.apply(&x[r.clone()]));
        }
        y
    }

    fn apply_dense(&self, x: &Mat<c64>) -> Mat<c64> {
        let mut y = Mat::<c64>::zeros(self.dim, x.ncols());
        for (r, b) in &self.blocks {
            let prod = &b.entries * x.subrows(r.start, r.len());
            y.subrows_mut(r.start, r.len()).copy_from(&prod);
        }
        y
    }
}

/// `r ↦ M⁻¹ B M⁻ᵀ r` with both Gram solves done by inner GMRES.
#[derive(Debug)]
pub struct CalderonPreconditioner {
    b: BlockDiagonal,
    m: GramMatrix,
    inner_tol: f64,
    max_inner: usize,
    inner_total: AtomicUsize,
}

/// Builds the preconditioner after checking that `B` and `M` fit together.
pub fn make_calderon_preconditioner(b: BlockDiagonal, m: GramMatrix, cfg: &SolveConfig) -> Result<CalderonPreconditioner> {
    cfg.validate()?;
    if m.nrows() != m.ncols() || m.nrows() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "Gram and preconditioner blocks",
            left: m.nrows(),
            right: b.dim(),
        });
    }
    Ok(CalderonPreconditioner {
        b,
        m,
        inner_tol: cfg.inner_tol,
        max_inner: cfg.max_inner,
        inner_total: AtomicUsize::new(0),
    })
}

impl CalderonPreconditioner {
    /// Inner GMRES iterations spent so far.
    pub fn inner_iterations(&self) -> usize {
        self.inner_total.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.inner_total.store(0, Ordering::Relaxed);
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.m
    }

    pub fn blocks(&self) -> &BlockDiagonal {
        &self.b
    }

    fn inner_solve(&self, transpose: bool, rhs: &[c64]) -> Result<Vec<c64>> {
        let out = gmres(
            |x: &[c64]| Ok(if transpose { self.m.apply_transpose(x) } else { self.m.apply(x) }),
            rhs,
            self.inner_tol,
            self.max_inner,
        )?;
        self.inner_total.fetch_add(out.iterations, Ordering::Relaxed);
        if !out.converged {
            return Err(Error::InnerSolveFailed {
                tol: self.inner_tol,
                iterations: out.iterations,
                residual: out.final_residual(),
            });
        }
        Ok(out.x)
    }
}

impl Preconditioner for CalderonPreconditioner {
    fn dim(&self) -> usize {
        self.b.dim()
    }

    fn apply(&self, r: &[c64]) -> Result<Vec<c64>> {
        let y = self.inner_solve(true, r)?;
        let z = self.b.apply(&y);
        self.inner_solve(false, &z)
    }

    /// Uses a direct LU factorisation of the (real) Gram matrix, which is
    /// equivalent to the inner solves up to round-off and far cheaper for
    /// many right-hand sides.
    fn materialize(&self, a: &Mat<c64>) -> Result<Mat<c64>> {
        let n = self.m.nrows();
        let dense = Mat::<f64>::from_fn(n, n, |i, j| self.m.get(i, j));
        let lu = dense.partial_piv_lu();
        let solve = |x: &Mat<c64>, transpose: bool| -> Mat<c64> {
            let k = x.ncols();
            let mut rhs = Mat::<f64>::from_fn(n, 2 * k, |i, j| if j < k { x[(i, j)].re } else { x[(i, j - k)].im });
            if transpose {
                lu.solve_transpose_in_place(rhs.as_mut());
            } else {
                lu.solve_in_place(rhs.as_mut());
            }
            Mat::from_fn(n, k, |i, j| c64::new(rhs[(i, j)], rhs[(i, j + k)]))
        };
        let y = solve(a, true);
        let z = self.b.apply_dense(&y);
        let out = solve(&z, false);
        if out.col_iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
            return Err(Error::LinearAlgebra("Gram matrix is singular".into()));
        }
        Ok(out)
    }
}

/// The identity map, for unpreconditioned runs through the same code path.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[c64]) -> Result<Vec<c64>> {
        Ok(r.to_vec())
    }

    fn materialize(&self, a: &Mat<c64>) -> Result<Mat<c64>> {
        Ok(a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{Form, SpaceTag};
    use crate::spaces::SpaceKind;

    fn gm(a: Mat<c64>) -> GalerkinMatrix {
        let tag = SpaceTag {
            kind: SpaceKind::DualP1,
            dim: a.nrows(),
        };
        GalerkinMatrix {
            entries: a,
            form: Form::PreconditionerBlock,
            test: tag,
            trial: tag,
        }
    }

    #[test]
    fn identity_blocks_and_gram() {
        let b = BlockDiagonal::new(vec![gm(Mat::identity(2, 2)), gm(Mat::identity(3, 3))]).unwrap();
        let m = GramMatrix::from_triplets(5, 5, (0..5).map(|i| (i, i, 1.0)).collect());
        let p = make_calderon_preconditioner(b, m, &SolveConfig::default()).unwrap();
        let r: Vec<c64> = (0..5).map(|i| c64::new(i as f64, 1.0)).collect();
        let z = p.apply(&r).unwrap();
        for (a, b) in z.iter().zip(&r) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_gram_closed_form() {
        let d = [2.0, 4.0, 0.5];
        let bmat = Mat::from_fn(3, 3, |i, j| c64::new((i + 2 * j) as f64, (i as f64) - 1.0));
        let b = BlockDiagonal::new(vec![gm(bmat.clone())]).unwrap();
        let m = GramMatrix::from_triplets(3, 3, (0..3).map(|i| (i, i, d[i])).collect());
        let p = make_calderon_preconditioner(b, m, &SolveConfig::default()).unwrap();
        let r = vec![c64::new(1.0, 0.0), c64::new(0.0, 2.0), c64::new(-1.0, 1.0)];
        let z = p.apply(&r).unwrap();
        for i in 0..3 {
            let expect: c64 = (0..3).map(|j| bmat[(i, j)] * r[j] / d[j]).sum::<c64>() / d[i];
            assert!((z[i] - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
        // The dense path agrees with the iterative one.
        let a = Mat::from_fn(3, 2, |i, j| r[i] * (j as f64 + 1.0));
        let pa = p.materialize(&a).unwrap();
        for i in 0..3 {
            assert!((pa[(i, 0)] - z[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let b = BlockDiagonal::new(vec![gm(Mat::identity(2, 2))]).unwrap();
        let m = GramMatrix::from_triplets(3, 3, vec![]);
        assert!(make_calderon_preconditioner(b, m, &SolveConfig::default()).is_err());
    }
}
