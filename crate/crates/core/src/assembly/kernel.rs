use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

const INV_4PI: f64 = 0.25 * std::f64::consts::FRAC_1_PI;

/// Wavenumber of the Helmholtz kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    pub kappa: c64,
}

impl KernelConfig {
    pub fn new(kappa: c64) -> Result<Self> {
        if !(kappa.re >= 0.0) || !kappa.im.is_finite() || !kappa.re.is_finite() {
            return Err(Error::InvalidConfig(format!("wavenumber needs Re κ ≥ 0, got {kappa}")));
        }
        Ok(KernelConfig { kappa })
    }

    pub fn real(kappa: f64) -> Result<Self> {
        Self::new(c64::new(kappa, 0.0))
    }
}

/// `exp(iκr) / (4πr)` for `r > 0`.
#[inline]
pub fn greens_r(kappa: c64, r: f64) -> c64 {
    // exp(iκr) = exp(-Im κ r) (cos(Re κ r) + i sin(Re κ r))
    let decay = if kappa.im == 0.0 { 1.0 } else { (-kappa.im * r).exp() };
    let (s, c) = (kappa.re * r).sin_cos();
    let scale = decay * INV_4PI / r;
    c64::new(c * scale, s * scale)
}

/// The radiating fundamental solution `G_κ(z) = exp(iκ|z|) / (4π|z|)`.
pub fn greens(cfg: &KernelConfig, z: Vec3) -> Result<c64> {
    let r = vec3::norm(z);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(greens_r(cfg.kappa, r))
}

/// Double-layer kernel `n(y) · ∇_y G_κ(x - y)` with `d = y - x`.
#[inline]
pub fn double_layer_kernel(kappa: c64, d: Vec3, n_y: Vec3) -> c64 {
    let r = vec3::norm(d);
    let g = greens_r(kappa, r);
    // ∇_y G(x - y) = G (iκ r - 1) d / r²
    let i = c64::new(0.0, 1.0);
    g * (i * kappa * r - 1.0) * (vec3::dot(n_y, d) / (r * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn static_kernel() {
        let cfg = KernelConfig::real(0.0).unwrap();
        let g = greens(&cfg, [0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(g.re, 0.0795774715459477, epsilon = 1e-12);
        assert_eq!(g.im, 0.0);
    }

    #[test]
    fn unit_wavenumber() {
        let cfg = KernelConfig::real(1.0).unwrap();
        let g = greens(&cfg, [1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g.re, 1f64.cos() / (4.0 * std::f64::consts::PI), epsilon = 1e-15);
        assert_relative_eq!(g.im, 1f64.sin() / (4.0 * std::f64::consts::PI), epsilon = 1e-15);
        assert_eq!(greens(&cfg, [0.3, -0.2, 0.7]).unwrap(), greens(&cfg, [-0.3, 0.2, -0.7]).unwrap());
    }

    #[test]
    fn complex_wavenumber_decays() {
        let k = c64::new(1.0, 0.5);
        let g = greens_r(k, 2.0);
        let expect = (c64::new(0.0, 1.0) * k * 2.0).exp() / (8.0 * std::f64::consts::PI);
        assert_relative_eq!(g.re, expect.re, epsilon = 1e-15);
        assert_relative_eq!(g.im, expect.im, epsilon = 1e-15);
    }

    #[test]
    fn zero_separation_is_an_error() {
        let cfg = KernelConfig::real(1.0).unwrap();
        assert!(matches!(greens(&cfg, [0.0; 3]), Err(Error::Singularity)));
        assert!(KernelConfig::real(-1.0).is_err());
    }

    #[test]
    fn double_layer_matches_finite_difference() {
        let k = c64::new(2.0, 0.0);
        let x = [0.1, 0.2, 0.3];
        let y = [1.0, -0.5, 0.4];
        let n = [0.0, 0.6, 0.8];
        let eps = 1e-6;
        let gp = greens_r(k, vec3::dist(x, vec3::axpy(y, eps, n)));
        let gm = greens_r(k, vec3::dist(x, vec3::axpy(y, -eps, n)));
        let fd = (gp - gm) / (2.0 * eps);
        let dl = double_layer_kernel(k, vec3::sub(y, x), n);
        assert!((fd - dl).norm() < 1e-8);
    }
}
