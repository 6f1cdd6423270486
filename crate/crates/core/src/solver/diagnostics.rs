use faer::Mat;
use num_complex::Complex64 as c64;

use crate::assembly::GalerkinMatrix;
use crate::error::{Error, Result};
use crate::solver::precond::Preconditioner;

/// Largest dimension for which dense singular values are computed.
pub const DENSE_LIMIT: usize = 4000;

/// Relative threshold below which singular values count as nullspace.
const NULL_THRESHOLD: f64 = 1e-8;

/// Effective condition number and numerical nullity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub cond: f64,
    pub nullity: usize,
}

/// `σ_max / σ_min` over singular values above `1e-8 σ_max` of `P A` (or `A`),
/// and the number of singular values below that threshold.
pub fn effective_condition_number(a: &GalerkinMatrix, p: Option<&dyn Preconditioner>) -> Result<Diagnostics> {
    let n = a.nrows();
    if n > DENSE_LIMIT || a.ncols() > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: n.max(a.ncols()), limit: DENSE_LIMIT });
    }
    let m: Mat<c64> = match p {
        Some(p) => p.materialize(&a.entries)?,
        None => a.entries.clone(),
    };
    singular_value_diagnostics(&m)
}

pub(crate) fn singular_value_diagnostics(m: &Mat<c64>) -> Result<Diagnostics> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::EmptySpace("condition number of an empty matrix".into()));
    }
    let s = m
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("singular value decomposition failed: {e:?}")))?;
    let smax = s[0];
    if smax == 0.0 {
        return Ok(Diagnostics {
            cond: f64::INFINITY,
            nullity: s.len(),
        });
    }
    let cut = NULL_THRESHOLD * smax;
    let kept: Vec<f64> = s.iter().copied().filter(|&x| x >= cut).collect();
    Ok(Diagnostics {
        cond: smax / kept.last().copied().unwrap_or(smax),
        nullity: s.len() - kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{Form, SpaceTag};
    use crate::spaces::SpaceKind;

    fn gm(d: &[f64]) -> GalerkinMatrix {
        let n = d.len();
        let tag = SpaceTag {
            kind: SpaceKind::PwConstant,
            dim: n,
        };
        GalerkinMatrix {
            entries: Mat::from_fn(n, n, |i, j| if i == j { c64::new(d[i], 0.0) } else { c64::new(0.0, 0.0) }),
            form: Form::SingleLayer,
            test: tag,
            trial: tag,
        }
    }

    #[test]
    fn identity_and_singular_diagonal() {
        let d = effective_condition_number(&gm(&[1.0; 5]), None).unwrap();
        assert!((d.cond - 1.0).abs() < 1e-14);
        assert_eq!(d.nullity, 0);
        let d = effective_condition_number(&gm(&[4.0, 2.0, 1.0, 0.0]), None).unwrap();
        assert!((d.cond - 4.0).abs() < 1e-12);
        assert_eq!(d.nullity, 1);
    }
}
