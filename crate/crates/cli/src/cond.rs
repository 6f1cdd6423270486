//! `cond`: effective condition numbers with and without preconditioning.

use std::path::Path;

use anyhow::bail;
use faer::Mat;
use log::info;
use msbem::assembly::{Form, GalerkinMatrix, SpaceTag};
use msbem::solver::{effective_condition_number, Discretization, Identity};
use msbem::spaces::{multitrace_space, Side, SpaceKind};
use num_complex::Complex64 as c64;

use crate::output::{list, num, CsvReport};
use crate::sweep::{describe_solver, SweepSpec};

/// Growth of `(1 + |log h|)²` when the mesh width is halved from `2h` to `h`.
pub fn predicted_growth(h: f64) -> f64 {
    ((1.0 + h.ln().abs()) / (1.0 + (2.0 * h).ln().abs())).powi(2)
}

const HEADER: [&str; 9] = [
    "h",
    "ndof",
    "cond_np",
    "cond_cp",
    "nullity_np",
    "nullity_cp",
    "ratio_np",
    "ratio_cp",
    "predicted_growth",
];

pub fn run(spec: &SweepSpec, out: Option<&Path>) -> anyhow::Result<()> {
    spec.validate()?;
    let reduction = spec.reductions[0];
    let mut report = CsvReport::new(&HEADER.map(String::from))?;
    report.config("command", "cond");
    report.config("version", env!("CARGO_PKG_VERSION"));
    report.config("problem", spec.problem);
    report.config("kappa", spec.kappa);
    report.config("geometry", spec.geometry);
    report.config("h_list", list(&spec.h_list));
    report.config("reduction", reduction);
    describe_solver(&mut report, &spec.cfg);

    let mut prev: Option<(f64, f64)> = None;
    for &h in &spec.h_list {
        let screen = spec.geometry.build(h)?;
        let full = Discretization::assemble(&screen, spec.problem, spec.kappa.0, msbem::spaces::Reduction::Full, &spec.cfg)?;
        let d = full.restrict(&screen, reduction)?;
        let p = d.preconditioner(&screen, &spec.cfg)?;
        let np = effective_condition_number(&d.system, None)?;
        let cp = effective_condition_number(&d.system, Some(&p))?;
        info!("h={h}: dimension {}, cond {} unpreconditioned, {} preconditioned", d.ndof(), np.cond, cp.cond);
        let ratios = prev.map(|(a, b)| (num(np.cond / a), num(cp.cond / b))).unwrap_or_default();
        report.row(&[
            num(h),
            d.ndof().to_string(),
            num(np.cond),
            num(cp.cond),
            np.nullity.to_string(),
            cp.nullity.to_string(),
            ratios.0,
            ratios.1,
            num(predicted_growth(h)),
        ])?;
        prev = Some((np.cond, cp.cond));
    }
    report.write(out)
}

fn identity_system(n: usize) -> GalerkinMatrix {
    let tag = SpaceTag {
        kind: SpaceKind::PwConstant,
        dim: n,
    };
    GalerkinMatrix {
        entries: Mat::<c64>::identity(n, n),
        form: Form::Gram,
        test: tag,
        trial: tag,
    }
}

/// Runs the estimator on identity systems sized like the real ones; every
/// condition number must come out as one with nothing in the nullspace.
pub fn self_test(spec: &SweepSpec, out: Option<&Path>) -> anyhow::Result<()> {
    spec.validate()?;
    let reduction = spec.reductions[0];
    let mut report = CsvReport::new(&HEADER.map(String::from))?;
    report.config("command", "cond");
    report.config("self_test", true);
    report.config("problem", spec.problem);
    report.config("geometry", spec.geometry);
    report.config("h_list", list(&spec.h_list));
    report.config("reduction", reduction);
    let mut failures = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &h in &spec.h_list {
        let screen = spec.geometry.build(h)?;
        let n = multitrace_space(&screen, spec.problem, Side::Primal, reduction)?.dim();
        let a = identity_system(n);
        let id = Identity(n);
        let np = effective_condition_number(&a, None)?;
        let cp = effective_condition_number(&a, Some(&id))?;
        for (label, d) in [("off", np), ("on", cp)] {
            if (d.cond - 1.0).abs() > 1e-12 || d.nullity != 0 {
                failures.push(format!("h={h} precond={label}: cond {} nullity {}", d.cond, d.nullity));
            }
        }
        let ratios = prev.map(|(a, b)| (num(np.cond / a), num(cp.cond / b))).unwrap_or_default();
        report.row(&[
            num(h),
            n.to_string(),
            num(np.cond),
            num(cp.cond),
            np.nullity.to_string(),
            cp.nullity.to_string(),
            ratios.0,
            ratios.1,
            num(predicted_growth(h)),
        ])?;
        prev = Some((np.cond, cp.cond));
    }
    report.write(out)?;
    if !failures.is_empty() {
        bail!("self-test failed: {}", failures.join("; "));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_formula() {
        let g = predicted_growth(0.25);
        let want = ((1.0 + 4f64.ln()) / (1.0 + 2f64.ln())).powi(2);
        assert!((g - want).abs() < 1e-14);
        // The ratio tends to one as h shrinks.
        assert!(predicted_growth(1e-3) < predicted_growth(0.1));
    }
}
