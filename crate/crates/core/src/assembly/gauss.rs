//! Gauss–Legendre rules on `[0, 1]` and collapsed rules on the reference triangle.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        // Map [-1, 1] to [0, 1].
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

/// Quadrature rule on the reference triangle `{a, b ≥ 0, a + b ≤ 1}` (area 1/2).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed (Duffy) tensor Gauss rule with `n²` points, exact for
    /// polynomials of degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (i, &s) in x.iter().enumerate() {
            for (j, &t) in x.iter().enumerate() {
                points.push([s, (1.0 - s) * t]);
                weights.push(w[i] * w[j] * (1.0 - s));
            }
        }
        TriangleRule { points, weights }
    }

    /// Edge-midpoint rule, exact for quadratics.
    pub fn midpoints() -> Self {
        TriangleRule {
            points: vec![[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]],
            weights: vec![1.0 / 6.0; 3],
        }
    }

    /// Centroid rule.
    pub fn centroid() -> Self {
        TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Barycentric coordinates `(1 - a - b, a, b)` of a reference point.
#[inline]
pub fn bary(p: [f64; 2]) -> [f64; 3] {
    [1.0 - p[0] - p[1], p[0], p[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert_relative_eq!(q, 1.0 / (deg as f64 + 1.0), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let (x, _) = gauss_legendre(7);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        assert_relative_eq!(x[3], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn triangle_rules_exact() {
        // ∫ a^i b^j over the reference triangle = i! j! / (i + j + 2)!
        let fact = |k: u32| (1..=k).product::<u32>() as f64;
        let exact = |i: u32, j: u32| fact(i) * fact(j) / fact(i + j + 2);
        let rule = TriangleRule::collapsed(4);
        for i in 0..4 {
            for j in 0..(7 - i) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(i as i32) * p[1].powi(j as i32))
                    .sum();
                assert_relative_eq!(q, exact(i, j), epsilon = 1e-15);
            }
        }
        let mid = TriangleRule::midpoints();
        for (i, j) in [(0, 0), (1, 0), (1, 1), (2, 0), (0, 2)] {
            let q: f64 = mid
                .points
                .iter()
                .zip(&mid.weights)
                .map(|(p, w)| w * p[0].powi(i) * p[1].powi(j))
                .sum();
            assert_relative_eq!(q, exact(i as u32, j as u32), epsilon = 1e-15);
        }
    }
}
