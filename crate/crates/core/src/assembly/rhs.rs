//! Plane-wave excitation and the load vectors of both screen problems.

use num_complex::Complex64 as c64;

use crate::assembly::operators::geo_views;
use crate::error::{Error, Result};
use crate::spaces::{FunctionSpace, Problem};
use crate::vec3::{self, Vec3};

/// Gauss order per dimension of the load-vector rule.
const RHS_ORDER: usize = 6;

/// Incident plane wave `A exp(iκ d·x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncidentWave {
    pub direction: Vec3,
    pub kappa: c64,
    pub amplitude: c64,
}

impl IncidentWave {
    pub fn new(direction: Vec3, kappa: c64) -> Result<Self> {
        let n = vec3::norm(direction);
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidConfig(format!("plane-wave direction must be a unit vector, |d| = {n}")));
        }
        Ok(IncidentWave {
            direction,
            kappa,
            amplitude: c64::new(1.0, 0.0),
        })
    }

    /// The default excitation travelling along `+z`.
    pub fn along_z(kappa: c64) -> Self {
        IncidentWave {
            direction: [0.0, 0.0, 1.0],
            kappa,
            amplitude: c64::new(1.0, 0.0),
        }
    }

    pub fn with_amplitude(mut self, amplitude: c64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn value(&self, x: Vec3) -> c64 {
        self.amplitude * plane_wave(self.direction, self.kappa, x)
    }

    /// `(u, ∂u/∂n)` at `x` for the unit normal `n`.
    pub fn traces(&self, x: Vec3, n: Vec3) -> (c64, c64) {
        let (u, dn) = plane_wave_traces(self.direction, self.kappa, x, n);
        (self.amplitude * u, self.amplitude * dn)
    }
}

/// `exp(iκ d·x)`.
pub fn plane_wave(direction: Vec3, kappa: c64, x: Vec3) -> c64 {
    (c64::new(0.0, 1.0) * kappa * vec3::dot(direction, x)).exp()
}

/// Dirichlet and Neumann traces `(u, iκ (d·n) u)` of the unit plane wave.
pub fn plane_wave_traces(direction: Vec3, kappa: c64, x: Vec3, normal: Vec3) -> (c64, c64) {
    let u = plane_wave(direction, kappa, x);
    (u, c64::new(0.0, 1.0) * kappa * vec3::dot(direction, normal) * u)
}

/// Load vector `⟨datum, φ_i⟩` of the scattered-field problem.
///
/// The datum cancels the incident wave: `-u_inc` for the sound-soft problem
/// and `-∂u_inc/∂n` (carrier normals) for the sound-hard one. Integrals are
/// computed once per geometric triangle in a canonical vertex order, so
/// front and back copies receive identical (Dirichlet) or opposite (Neumann)
/// contributions.
pub fn assemble_rhs(space: &FunctionSpace, wave: &IncidentWave, problem: Problem) -> Result<Vec<c64>> {
    let (table, views) = geo_views(space, RHS_ORDER)?;
    let moments: Vec<[c64; 3]> = table
        .tris
        .iter()
        .map(|g| {
            let mut m = [c64::new(0.0, 0.0); 3];
            for (x, l, w) in &g.near {
                let u = wave.value(*x) * *w;
                for k in 0..3 {
                    m[k] += u * l[k];
                }
            }
            m
        })
        .collect();
    let i = c64::new(0.0, 1.0);
    let mut b = vec![c64::new(0.0, 0.0); space.dim()];
    for e in &views {
        let g = &table.tris[e.geo];
        let factor = match problem {
            Problem::Dirichlet => c64::new(-1.0, 0.0),
            Problem::Neumann => -i * wave.kappa * vec3::dot(wave.direction, g.normal) * e.sign,
        };
        let m = &moments[e.geo];
        for (dof, c) in &e.dofs {
            b[*dof] += factor * (m[0] * c[0] + m[1] * c[1] + m[2] * c[2]);
        }
    }
    Ok(b)
}
