use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{MultiScreen, ScreenKind, TriMesh, VertexTags};
use crate::spaces::function_space::{
    continuous_p1_space, dual_constant_space, dual_p1_space, pw_constant_space, Anchor, FunctionSpace, ShapeKind,
    SpaceKind,
};

/// Boundary value problem on the screen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    /// Sound-soft: weakly singular equation for a jump of normal derivatives.
    Dirichlet,
    /// Sound-hard: hypersingular equation for a jump of values.
    Neumann,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Dirichlet => "dirichlet",
            Problem::Neumann => "neumann",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Primal (unknown / test) or dual (preconditioner) side of a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Dual,
}

/// Which redundant multi-trace degrees of freedom to drop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reduction {
    Full,
    /// Keep panels 1, 2, 4, 6, ... (one-based).
    Partial,
    /// Partial, and panel 1 keeps only the strip of its second sheet touching the junction.
    SingleStrip,
    /// Partial, and panel 1 keeps its second sheet only within `delta` of the junction.
    FixedOverlap(f64),
}

impl Reduction {
    pub fn label(&self) -> String {
        match self {
            Reduction::Full => "full".into(),
            Reduction::Partial => "partial".into(),
            Reduction::SingleStrip => "single-strip".into(),
            Reduction::FixedOverlap(d) => format!("fixed-overlap:{d}"),
        }
    }

    /// Kept panels (zero-based) of an `m`-sheet junction.
    pub fn kept_panels(&self, m: usize) -> Vec<usize> {
        match self {
            Reduction::Full => (0..m).collect(),
            _ => std::iter::once(0).chain((1..=m / 2).map(|i| 2 * i - 1)).collect(),
        }
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Reduction::Full),
            "partial" => Ok(Reduction::Partial),
            "single-strip" => Ok(Reduction::SingleStrip),
            _ => {
                let d = s
                    .strip_prefix("fixed-overlap:")
                    .ok_or_else(|| Error::Parse(format!("unknown reduction '{s}'")))?;
                let d: f64 = d
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad fixed-overlap distance '{d}'")))?;
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::Parse(format!("fixed-overlap distance must be positive, got {d}")));
                }
                Ok(Reduction::FixedOverlap(d))
            }
        }
    }
}

/// Mesh of panel `l` after applying the reduction, with the primal DoFs to keep
/// on it already implied (all triangles, or all interior vertices).
fn supporting_mesh(screen: &MultiScreen, l: usize, problem: Problem, reduction: Reduction) -> Result<TriMesh> {
    let full = screen.panel_mesh(l)?;
    let delta = match reduction {
        Reduction::SingleStrip => None,
        Reduction::FixedOverlap(d) => Some(d),
        Reduction::Full | Reduction::Partial => return Ok(full),
    };
    if l != 0 {
        return Ok(full);
    }
    let strip_sheet = screen.panels()[0].parts[1].sheet;
    let tol = 1e-9 * screen.side_length();
    let on_junction = |v: usize| full.tags()[v].contains(VertexTags::JUNCTION);
    let near = |p| delta.is_some_and(|d| screen.distance_to_junction(p) <= d + tol);
    let kept_tris: Vec<usize> = match problem {
        Problem::Dirichlet => (0..full.num_triangles())
            .filter(|&t| {
                full.sheet_of(t) != strip_sheet
                    || full.triangles()[t].iter().any(|&v| on_junction(v))
                    || near(full.centroid(t))
            })
            .collect(),
        Problem::Neumann => {
            let bnd = full.boundary_vertex_mask();
            let stars = full.vertex_triangles();
            let mut keep = vec![false; full.num_triangles()];
            for v in 0..full.num_vertices() {
                if bnd[v] {
                    continue;
                }
                let drop = stars[v].iter().all(|&t| full.sheet_of(t) == strip_sheet)
                    && !on_junction(v)
                    && !near(full.vertices()[v]);
                if !drop {
                    for &t in &stars[v] {
                        keep[t] = true;
                    }
                }
            }
            (0..full.num_triangles()).filter(|&t| keep[t]).collect()
        }
    };
    full.submesh(&kept_tris)
}

fn check_reduction(screen: &MultiScreen, reduction: Reduction) -> Result<()> {
    if reduction == Reduction::Full {
        return Ok(());
    }
    match screen.kind() {
        ScreenKind::Junction { .. } if screen.is_type_a() => Ok(()),
        _ => Err(Error::UnsupportedSpace(format!(
            "reduction {reduction} needs a type A junction screen"
        ))),
    }
}

/// Panel-wise product space of a problem.
///
/// Dirichlet: piecewise constants (primal) and dual linears (dual). Neumann:
/// continuous linears vanishing on the panel boundary (primal) and dual-cell
/// constants (dual). Reduced panels use their supporting mesh for both sides.
pub fn multitrace_space(screen: &MultiScreen, problem: Problem, side: Side, reduction: Reduction) -> Result<FunctionSpace> {
    check_reduction(screen, reduction)?;
    let panels = reduction.kept_panels(screen.num_panels());
    let mut parts = Vec::with_capacity(panels.len());
    for &l in &panels {
        let mesh = supporting_mesh(screen, l, problem, reduction)?;
        let mut sp = match (problem, side) {
            (Problem::Dirichlet, Side::Primal) => pw_constant_space(&mesh)?,
            (Problem::Dirichlet, Side::Dual) => dual_p1_space(&mesh)?,
            (Problem::Neumann, Side::Primal) => continuous_p1_space(&mesh, true)?,
            (Problem::Neumann, Side::Dual) => dual_constant_space(&mesh)?,
        };
        sp.set_panel(l);
        parts.push(sp);
    }
    let mut sp = FunctionSpace::product(parts)?;
    sp.reduction = Some(reduction);
    Ok(sp)
}

/// Sparse real coefficient columns spanning a subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientColumns {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, f64)>>,
}

impl CoefficientColumns {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.rows];
        for &(i, w) in &self.columns[j] {
            c[i] = w;
        }
        c
    }
}

/// Basis of the discrete single-trace space inside a full multi-trace space.
///
/// DoFs are grouped by geometric anchor. Value-type data (hat spaces) pair
/// copies with equal coefficients; at a junction vertex all copies enter with
/// weight one. Normal-type data (indicator spaces) pair the two copies of a
/// sheet triangle with opposite coefficients, since the copies carry opposite
/// outward normals.
pub fn singletrace_basis(screen: &MultiScreen, space: &FunctionSpace) -> Result<CoefficientColumns> {
    if !screen.is_type_a() {
        return Err(Error::UnsupportedSpace("single-trace basis needs an exact (type A) covering".into()));
    }
    if space.reduction() != Some(Reduction::Full) {
        return Err(Error::UnsupportedSpace(
            "single-trace basis is only defined for full (unreduced) multi-trace spaces".into(),
        ));
    }
    if !matches!(space.kind(), SpaceKind::PwConstant | SpaceKind::ContinuousP1) {
        return Err(Error::UnsupportedSpace("single-trace basis needs a primal space".into()));
    }
    let mut groups: BTreeMap<Anchor, Vec<usize>> = BTreeMap::new();
    for (i, m) in space.meta().iter().enumerate() {
        groups.entry(m.anchor).or_default().push(i);
    }
    let mut columns: Vec<Vec<(usize, f64)>> = Vec::new();
    for (_, dofs) in groups {
        if dofs.len() < 2 {
            continue;
        }
        match space.shape() {
            ShapeKind::Hat => columns.push(dofs.iter().map(|&i| (i, 1.0)).collect()),
            ShapeKind::Indicator => {
                if dofs.len() != 2 {
                    return Err(Error::InvalidGeometry("sheet triangle shared by more than two panels".into()));
                }
                columns.push(vec![(dofs[0], 1.0), (dofs[1], -1.0)]);
            }
        }
    }
    columns.sort_by_key(|c| c[0].0);
    Ok(CoefficientColumns {
        rows: space.dim(),
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_junction_screen, make_typeb_screen};

    #[test]
    fn trijunction_dimensions() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let d = |p, side, r| multitrace_space(&s, p, side, r).unwrap().dim();
        assert_eq!(d(Problem::Dirichlet, Side::Primal, Reduction::Full), 48);
        assert_eq!(d(Problem::Dirichlet, Side::Primal, Reduction::Partial), 32);
        assert_eq!(d(Problem::Neumann, Side::Primal, Reduction::Full), 9);
        for r in [Reduction::Full, Reduction::Partial, Reduction::SingleStrip, Reduction::FixedOverlap(0.25)] {
            for p in [Problem::Dirichlet, Problem::Neumann] {
                assert_eq!(d(p, Side::Primal, r), d(p, Side::Dual, r), "{p} {r}");
            }
        }
    }

    #[test]
    fn blocks_are_contiguous_in_panel_order() {
        let s = make_junction_screen(5, 1.0, 0.25).unwrap();
        let sp = multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Partial).unwrap();
        let panels: Vec<usize> = sp.blocks().iter().map(|b| b.panel).collect();
        assert_eq!(panels, vec![0, 1, 3]);
        let mut next = 0;
        for b in sp.blocks() {
            assert_eq!(b.dofs.start, next);
            next = b.dofs.end;
            assert!(sp.meta()[b.dofs.clone()].iter().all(|m| m.panel == b.panel));
        }
        assert_eq!(next, sp.dim());
    }

    #[test]
    fn singletrace_counts() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let d = multitrace_space(&s, Problem::Dirichlet, Side::Primal, Reduction::Full).unwrap();
        assert_eq!(singletrace_basis(&s, &d).unwrap().len(), 24);
        let n = multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Full).unwrap();
        assert_eq!(singletrace_basis(&s, &n).unwrap().len(), 4);
        let r = multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Partial).unwrap();
        assert!(singletrace_basis(&s, &r).is_err());
    }

    #[test]
    fn reductions_are_subspaces() {
        let s = make_junction_screen(3, 1.0, 0.2).unwrap();
        for p in [Problem::Dirichlet, Problem::Neumann] {
            let full = multitrace_space(&s, p, Side::Primal, Reduction::Full).unwrap();
            let mut dims = Vec::new();
            for r in [Reduction::Partial, Reduction::FixedOverlap(0.45), Reduction::SingleStrip] {
                let sp = multitrace_space(&s, p, Side::Primal, r).unwrap();
                sp.embedding_in(&full).unwrap();
                dims.push(sp.dim());
            }
            assert!(dims[0] > dims[1] && dims[1] > dims[2], "{p}: {dims:?}");
        }
    }

    #[test]
    fn typeb_rejects_reductions() {
        let s = make_typeb_screen(0.25).unwrap();
        multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Full).unwrap();
        assert!(multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Partial).is_err());
    }

    #[test]
    fn parse_reduction() {
        assert_eq!("fixed-overlap:0.3".parse::<Reduction>().unwrap(), Reduction::FixedOverlap(0.3));
        assert!("fixed-overlap:0".parse::<Reduction>().is_err());
        assert!("nope".parse::<Reduction>().is_err());
    }
}
