//! Incident plane waves and scattered fields at probe points.

use num_complex::Complex64 as c64;

use crate::assembly::{eval_potential, KernelConfig, Layer};
use crate::error::{Error, Result};
use crate::geometry::MultiScreen;
use crate::solver::SolveReport;
use crate::spaces::{FunctionSpace, Problem};
use crate::vec3::{self, Vec3};

pub use crate::assembly::{plane_wave, plane_wave_traces, IncidentWave};

/// Relative (to the screen diameter) clearance every probe must keep.
pub const PROBE_CLEARANCE: f64 = 1e-3;

/// Evaluation points kept away from the screen.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSet {
    points: Vec<Vec3>,
}

impl ProbeSet {
    /// Checks that every point is at least `1e-3` screen diameters away
    /// from every sheet.
    pub fn new(screen: &MultiScreen, points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("probe set is empty".into()));
        }
        let limit = PROBE_CLEARANCE * screen.diameter();
        for p in &points {
            let d = distance_to_screen(screen, *p);
            if !(d > limit) {
                return Err(Error::PointTooClose { distance: d, limit });
            }
        }
        Ok(ProbeSet { points })
    }

    /// The eight corners of a cube of side four diameters around the centroid.
    pub fn cube_corners(screen: &MultiScreen) -> Result<Self> {
        let c = screen.centroid();
        let a = 2.0 * screen.diameter();
        let mut pts = Vec::with_capacity(8);
        for i in 0..8 {
            let s = |b: usize| if i >> b & 1 == 1 { a } else { -a };
            pts.push(vec3::add(c, [s(0), s(1), s(2)]));
        }
        Self::new(screen, pts)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Smallest distance from `p` to any sheet triangle.
pub fn distance_to_screen(screen: &MultiScreen, p: Vec3) -> f64 {
    screen
        .sheets()
        .iter()
        .flat_map(|s| (0..s.num_triangles()).map(move |t| s.triangle_points(t)))
        .map(|[a, b, c]| vec3::point_triangle_distance(p, a, b, c))
        .fold(f64::INFINITY, f64::min)
}

/// Field radiated by a multi-trace density: the single layer for sound-soft
/// problems and the negated double layer for sound-hard ones, so that the
/// total field satisfies the boundary condition with the load vectors built
/// by [`crate::assembly::assemble_rhs`].
pub fn radiated_field(coeffs: &[c64], space: &FunctionSpace, problem: Problem, kappa: c64, probes: &ProbeSet) -> Result<Vec<c64>> {
    let cfg = KernelConfig::new(kappa)?;
    match problem {
        Problem::Dirichlet => eval_potential(coeffs, space, &cfg, probes.points(), Layer::Single),
        Problem::Neumann => {
            let u = eval_potential(coeffs, space, &cfg, probes.points(), Layer::Double)?;
            Ok(u.into_iter().map(|v| -v).collect())
        }
    }
}

/// Scattered field of a solve at the probes.
pub fn scattered_field(report: &SolveReport, space: &FunctionSpace, problem: Problem, kappa: c64, probes: &ProbeSet) -> Result<Vec<c64>> {
    radiated_field(&report.coefficients, space, problem, kappa, probes)
}

/// Largest pointwise difference relative to the larger field's maximum.
pub fn relative_difference(a: &[c64], b: &[c64]) -> f64 {
    let scale = a.iter().chain(b).map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_junction_screen, make_typeb_screen};
    use crate::spaces::{multitrace_space, Reduction, Side};

    #[test]
    fn cube_corners_are_clear_of_the_screen() {
        for s in [make_junction_screen(3, 1.0, 0.5).unwrap(), make_typeb_screen(0.5).unwrap()] {
            let p = ProbeSet::cube_corners(&s).unwrap();
            assert_eq!(p.len(), 8);
            for x in p.points() {
                assert!(distance_to_screen(&s, *x) > s.diameter());
            }
        }
    }

    #[test]
    fn probes_on_the_screen_rejected() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let on = s.sheet(1).vertices()[4];
        assert!(matches!(ProbeSet::new(&s, vec![on]), Err(Error::PointTooClose { .. })));
        assert!(ProbeSet::new(&s, vec![]).is_err());
    }

    #[test]
    fn zero_coefficients_give_zero_field() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let probes = ProbeSet::cube_corners(&s).unwrap();
        for p in [Problem::Dirichlet, Problem::Neumann] {
            let sp = multitrace_space(&s, p, Side::Primal, Reduction::Full).unwrap();
            let u = radiated_field(&vec![c64::new(0.0, 0.0); sp.dim()], &sp, p, c64::new(1.0, 0.0), &probes).unwrap();
            assert!(u.iter().all(|v| *v == c64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn relative_difference_basics() {
        let a = [c64::new(1.0, 0.0), c64::new(0.0, 2.0)];
        assert_eq!(relative_difference(&a, &a), 0.0);
        let b = [c64::new(1.0, 0.0), c64::new(0.0, 1.0)];
        assert!((relative_difference(&a, &b) - 0.5).abs() < 1e-15);
    }
}
