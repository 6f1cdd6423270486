//! Full (unrestarted) GMRES with modified Gram–Schmidt and Givens rotations.

use num_complex::Complex64 as c64;

use crate::error::Result;

/// Result of a GMRES run started from the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<c64>,
    pub iterations: usize,
    /// Relative residual norms, starting with 1 for the initial guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl GmresOutcome {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
fn dotc(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `A x = b` for the linear map `apply` until the relative residual
/// drops to `tol` or `maxit` iterations have been spent.
///
/// Singular but consistent systems are fine: the iterate stays in the Krylov
/// space of `b`. A subdiagonal Hessenberg entry below `1e-14 ‖b‖` means the
/// Krylov space is invariant and the current least-squares solution is exact.
pub fn gmres<F>(mut apply: F, b: &[c64], tol: f64, maxit: usize) -> Result<GmresOutcome>
where
    F: FnMut(&[c64]) -> Result<Vec<c64>>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![c64::new(0.0, 0.0); n],
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
        });
    }
    let mut basis: Vec<Vec<c64>> = vec![b.iter().map(|x| x / bnorm).collect()];
    // Columns of the upper Hessenberg matrix after rotation.
    let mut h: Vec<Vec<c64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<c64> = Vec::new();
    let mut g = vec![c64::new(bnorm, 0.0)];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut k = 0;
    while k < maxit {
        let mut w = apply(&basis[k])?;
        let mut col = Vec::with_capacity(k + 2);
        for v in &basis {
            let hij = dotc(v, &w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hij * vi;
            }
            col.push(hij);
        }
        let hnext = norm(&w);
        col.push(c64::new(hnext, 0.0));
        for i in 0..k {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i].conj() * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        // Rotation annihilating col[k + 1].
        let (a, bb) = (col[k], col[k + 1]);
        let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, c64::new(0.0, 0.0))
        } else if a.norm() == 0.0 {
            (0.0, bb.conj() / bb.norm())
        } else {
            let c = a.norm() / r;
            (c, (a / a.norm()) * bb.conj() / r)
        };
        col[k] = c * a + s * bb;
        col[k + 1] = c64::new(0.0, 0.0);
        cs.push(c);
        sn.push(s);
        g.push(-s.conj() * g[k]);
        g[k] *= c;
        h.push(col);
        k += 1;
        let rel = g[k].norm() / bnorm;
        history.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        if hnext < 1e-14 * bnorm {
            converged = true;
            break;
        }
        basis.push(w.iter().map(|x| x / hnext).collect());
    }
    // Back substitution for the k×k triangular system.
    let mut y = vec![c64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in (i + 1)..k {
            s -= h[j][i] * y[j];
        }
        y[i] = if h[i][i] == c64::new(0.0, 0.0) { c64::new(0.0, 0.0) } else { s / h[i][i] };
    }
    let mut x = vec![c64::new(0.0, 0.0); n];
    for (yi, v) in y.iter().zip(&basis) {
        for (xj, vj) in x.iter_mut().zip(v) {
            *xj += yi * vj;
        }
    }
    Ok(GmresOutcome {
        x,
        iterations: k,
        residual_history: history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64]) -> Vec<c64> {
        v.iter().map(|&x| c64::new(x, 0.0)).collect()
    }

    fn diag(d: Vec<c64>) -> impl FnMut(&[c64]) -> Result<Vec<c64>> {
        move |x: &[c64]| Ok(x.iter().zip(&d).map(|(a, b)| a * b).collect())
    }

    #[test]
    fn identity_in_one_step() {
        let b = vec![c64::new(1.0, 2.0), c64::new(-3.0, 0.5)];
        let out = gmres(|x: &[c64]| Ok(x.to_vec()), &b, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        for (x, y) in out.x.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_within_three() {
        let out = gmres(diag(c(&[1.0, 2.0, 3.0])), &c(&[1.0, 2.0, 3.0]), 1e-12, 10).unwrap();
        assert!(out.iterations <= 3 && out.converged);
        for x in &out.x {
            assert!((x - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn consistent_singular_system() {
        let out = gmres(diag(c(&[1.0, 1.0, 0.0])), &c(&[1.0, 1.0, 0.0]), 1e-10, 10).unwrap();
        assert!(out.converged);
        assert!(out.final_residual() <= 1e-10);
        assert_eq!(out.x[2], c64::new(0.0, 0.0));
    }

    #[test]
    fn zero_rhs_and_iteration_cap() {
        let out = gmres(diag(c(&[1.0, 2.0])), &c(&[0.0, 0.0]), 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
        let d: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let out = gmres(diag(c(&d)), &c(&[1.0; 50]), 1e-14, 5).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
        assert!(out.residual_history.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn complex_nonnormal() {
        let a = [[c64::new(2.0, 1.0), c64::new(1.0, 0.0)], [c64::new(0.0, 0.0), c64::new(0.5, -1.0)]];
        let b = vec![c64::new(1.0, 0.0), c64::new(0.0, 1.0)];
        let out = gmres(
            |x: &[c64]| Ok(vec![a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]),
            &b,
            1e-13,
            5,
        )
        .unwrap();
        let r0 = a[0][0] * out.x[0] + a[0][1] * out.x[1] - b[0];
        let r1 = a[1][1] * out.x[1] - b[1];
        assert!(r0.norm() < 1e-12 && r1.norm() < 1e-12);
    }
}
