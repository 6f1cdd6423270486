//! `sweep` and `probe`: solves over h, reductions and preconditioning.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use log::info;
use msbem::excitation::{scattered_field, ProbeSet};
use msbem::geometry::MultiScreen;
use msbem::solver::{effective_condition_number, CalderonPreconditioner, Discretization, Preconditioner, SolveConfig, SolveReport};
use msbem::spaces::{Problem, Reduction};
use num_complex::Complex64 as c64;

use crate::args::{check_decreasing, Geometry, Kappa, PrecondArg};
use crate::output::{ensure_dir, list, num, opt_num, CsvReport};

/// Everything a sweep needs, with defaults already applied.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub problem: Problem,
    pub kappa: Kappa,
    pub geometry: Geometry,
    pub h_list: Vec<f64>,
    pub reductions: Vec<Reduction>,
    pub precond: PrecondArg,
    pub cfg: SolveConfig,
    pub points: Option<Vec<[f64; 3]>>,
    pub cond: bool,
    pub export_matrix: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        check_decreasing(&self.h_list)?;
        if self.reductions.is_empty() {
            anyhow::bail!("no reductions given");
        }
        Ok(())
    }
}

pub fn probes(screen: &MultiScreen, points: &Option<Vec<[f64; 3]>>) -> anyhow::Result<ProbeSet> {
    Ok(match points {
        Some(p) => ProbeSet::new(screen, p.clone()).context("probe points")?,
        None => ProbeSet::cube_corners(screen)?,
    })
}

pub fn describe_solver(r: &mut CsvReport, cfg: &SolveConfig) {
    r.config("tol", cfg.outer_tol);
    r.config("inner_tol", cfg.inner_tol);
    r.config("max_outer", cfg.max_outer);
    r.config("max_inner", cfg.max_inner);
    r.config("order", cfg.quadrature.order);
    r.config("regular_order", cfg.quadrature.regular_order);
    r.config("near_threshold", cfg.quadrature.near_threshold);
    r.config("far_threshold", opt_num(cfg.quadrature.far_threshold));
    r.config("precond_order", cfg.precond_quadrature.order);
    r.config("precond_regular_order", cfg.precond_quadrature.regular_order);
    r.config("precond_far_threshold", opt_num(cfg.precond_quadrature.far_threshold));
    r.config("direction", list(&cfg.direction));
    r.config("amplitude", cfg.amplitude);
    r.config("threads", msbem::par::threads());
    r.config("deterministic", !msbem::par::is_parallel());
}

/// Solves one cell; the dense diagnostics are opt-in since they cost an SVD.
fn solve(d: &Discretization, cp: Option<&CalderonPreconditioner>, cfg: &SolveConfig, cond: bool) -> anyhow::Result<SolveReport> {
    let mut report = d.solve(cp, cfg)?;
    if cond {
        report.diagnostics = Some(effective_condition_number(&d.system, cp.map(|p| p as &dyn Preconditioner))?);
    }
    Ok(report)
}

pub fn solve_cells(screen: &MultiScreen, spec: &SweepSpec, h: f64, mut emit: impl FnMut(&Discretization, bool, &SolveReport) -> anyhow::Result<()>) -> anyhow::Result<()> {
    let t = Instant::now();
    let full = Discretization::assemble(screen, spec.problem, spec.kappa.0, Reduction::Full, &spec.cfg)?;
    info!("h={h}: full system of dimension {} assembled in {:.2?}", full.ndof(), t.elapsed());
    for &reduction in &spec.reductions {
        let d = if reduction == Reduction::Full { full.clone() } else { full.restrict(screen, reduction)? };
        if let Some(dir) = &spec.export_matrix {
            let dir = ensure_dir(dir)?;
            let name = format!("system_{}_h{}_{}.csv", spec.problem, h, reduction.label().replace(':', "_"));
            std::fs::write(dir.join(&name), d.system.to_csv()).with_context(|| format!("exporting {name}"))?;
        }
        let precond = if spec.precond.modes().contains(&true) {
            let t = Instant::now();
            let p = d.preconditioner(screen, &spec.cfg)?;
            info!("h={h} {reduction}: preconditioner built in {:.2?}", t.elapsed());
            Some(p)
        } else {
            None
        };
        for &on in spec.precond.modes() {
            let t = Instant::now();
            let cp = if on { precond.as_ref() } else { None };
            let report = solve(&d, cp, &spec.cfg, spec.cond)?;
            info!(
                "h={h} {reduction} precond={}: {} iterations ({} inner) in {:.2?}",
                if on { "on" } else { "off" },
                report.iterations,
                report.inner_iteration_total,
                t.elapsed()
            );
            emit(&d, on, &report)?;
        }
    }
    Ok(())
}

pub fn header(nprobes: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "problem",
        "kappa",
        "geometry",
        "reduction",
        "h",
        "ndof",
        "nullity",
        "precond",
        "outer_iters",
        "inner_iters_total",
        "final_residual",
        "cond_est",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for k in 1..=nprobes {
        h.push(format!("probe_re_{k}"));
        h.push(format!("probe_im_{k}"));
    }
    h
}

pub fn run(spec: &SweepSpec, out: Option<&Path>) -> anyhow::Result<()> {
    spec.validate()?;
    // Probe count is fixed by the coarsest screen; all screens share the box.
    let first = spec.geometry.build(spec.h_list[0])?;
    let nprobes = probes(&first, &spec.points)?.len();
    let mut report = CsvReport::new(&header(nprobes))?;
    report.config("command", "sweep");
    report.config("version", env!("CARGO_PKG_VERSION"));
    report.config("problem", spec.problem);
    report.config("kappa", spec.kappa);
    report.config("geometry", spec.geometry);
    report.config("h_list", list(&spec.h_list));
    report.config("reductions", list(&spec.reductions));
    report.config("precond", format!("{:?}", spec.precond).to_lowercase());
    report.config("cond", spec.cond);
    describe_solver(&mut report, &spec.cfg);
    let mut probe_note = None;

    for &h in &spec.h_list {
        let screen = spec.geometry.build(h)?;
        let ps = probes(&screen, &spec.points)?;
        probe_note.get_or_insert_with(|| ps.points().iter().map(|p| format!("({})", list(p))).collect::<Vec<_>>().join(" "));
        solve_cells(&screen, spec, h, |d, on, r| {
            let field = scattered_field(r, &d.space, spec.problem, spec.kappa.0, &ps)?;
            let diag = r.diagnostics;
            let mut row = vec![
                spec.problem.to_string(),
                spec.kappa.to_string(),
                spec.geometry.to_string(),
                d.reduction.label(),
                num(h),
                d.ndof().to_string(),
                diag.map(|x| x.nullity.to_string()).unwrap_or_default(),
                if on { "on" } else { "off" }.to_string(),
                r.iterations.to_string(),
                r.inner_iteration_total.to_string(),
                num(r.final_residual()),
                diag.map(|x| num(x.cond)).unwrap_or_default(),
            ];
            for u in field {
                row.push(num(u.re));
                row.push(num(u.im));
            }
            report.row(&row)
        })?;
    }
    if let Some(p) = probe_note {
        report.config("probes", p);
    }
    report.write(out)
}

/// `probe`: one solve, field values listed per point.
pub fn run_probe(spec: &SweepSpec, out: Option<&Path>) -> anyhow::Result<()> {
    spec.validate()?;
    let h = spec.h_list[0];
    let screen = spec.geometry.build(h)?;
    let ps = probes(&screen, &spec.points)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut summary = Vec::new();
    solve_cells(&screen, spec, h, |d, on, r| {
        let field: Vec<c64> = scattered_field(r, &d.space, spec.problem, spec.kappa.0, &ps)?;
        summary.push(format!(
            "precond={} ndof={} outer_iters={} inner_iters_total={} converged={} final_residual={}",
            if on { "on" } else { "off" },
            d.ndof(),
            r.iterations,
            r.inner_iteration_total,
            r.converged,
            num(r.final_residual())
        ));
        for (k, (p, u)) in ps.points().iter().zip(field).enumerate() {
            rows.push(vec![
                (k + 1).to_string(),
                if on { "on" } else { "off" }.to_string(),
                num(p[0]),
                num(p[1]),
                num(p[2]),
                num(u.re),
                num(u.im),
            ]);
        }
        Ok(())
    })?;
    let header: Vec<String> = ["probe", "precond", "x", "y", "z", "re", "im"].iter().map(|s| s.to_string()).collect();
    let mut report = CsvReport::new(&header)?;
    report.config("command", "probe");
    report.config("version", env!("CARGO_PKG_VERSION"));
    report.config("problem", spec.problem);
    report.config("kappa", spec.kappa);
    report.config("geometry", spec.geometry);
    report.config("h", h);
    report.config("reduction", spec.reductions[0]);
    describe_solver(&mut report, &spec.cfg);
    for s in summary {
        report.config("solve", s);
    }
    for r in rows {
        report.row(&r)?;
    }
    report.write(out)
}
