//! Single- and double-layer potentials of discrete densities.

use num_complex::Complex64 as c64;

use crate::assembly::kernel::{double_layer_kernel, greens_r, KernelConfig};
use crate::assembly::operators::geo_views;
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::FunctionSpace;
use crate::vec3::{self, Vec3};

const POTENTIAL_ORDER: usize = 6;

/// Which layer potential to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Single,
    Double,
}

/// `U(x) = Σ_j c_j ∫ G(x - y) φ_j(y) dσ(y)` (single layer) or the same with
/// `∂G(x - y)/∂n(y)` and carrier normals (double layer).
///
/// Points closer to the screen than `1e-6` times the carrier diameter are
/// rejected.
pub fn eval_potential(coeffs: &[c64], space: &FunctionSpace, cfg: &KernelConfig, points: &[Vec3], layer: Layer) -> Result<Vec<c64>> {
    if coeffs.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            what: "density coefficients",
            left: coeffs.len(),
            right: space.dim(),
        });
    }
    let (table, views) = geo_views(space, POTENTIAL_ORDER)?;
    // Nodal density per geometric triangle; copies with opposite carrier
    // orientation enter the double layer with opposite signs.
    let mut dens = vec![[c64::new(0.0, 0.0); 3]; table.tris.len()];
    for e in &views {
        let s = match layer {
            Layer::Single => 1.0,
            Layer::Double => e.sign,
        };
        for (i, c) in &e.dofs {
            for k in 0..3 {
                dens[e.geo][k] += coeffs[*i] * (c[k] * s);
            }
        }
    }
    let limit = 1e-6 * space.carrier().diameter();
    for x in points {
        let d = table
            .tris
            .iter()
            .map(|g| vec3::point_triangle_distance(*x, g.p[0], g.p[1], g.p[2]))
            .fold(f64::INFINITY, f64::min);
        if !(d > limit) {
            return Err(Error::PointTooClose { distance: d, limit });
        }
    }
    let kappa = cfg.kappa;
    Ok(par::map_slice(points, |x| {
        let mut u = c64::new(0.0, 0.0);
        for (g, rho) in table.tris.iter().zip(&dens) {
            if rho.iter().all(|r| *r == c64::new(0.0, 0.0)) {
                continue;
            }
            for (y, l, w) in &g.near {
                let k = match layer {
                    Layer::Single => greens_r(kappa, vec3::dist(*x, *y)),
                    Layer::Double => double_layer_kernel(kappa, vec3::sub(*y, *x), g.normal),
                };
                u += k * (rho[0] * l[0] + rho[1] * l[1] + rho[2] * l[2]) * *w;
            }
        }
        u
    }))
}
