//! Regularised (Sauter–Schwab type) quadrature for triangle pairs.
//!
//! All rules work on the reference triangle `{a, b ≥ 0, a + b ≤ 1}` with
//! barycentric coordinates `(1 - a - b, a, b)`. Singular pairs are
//! transformed so that the Jacobian cancels the `1/r` singularity of the
//! kernel, after which tensor Gauss rules converge exponentially.

use num_complex::Complex64 as c64;

use crate::assembly::gauss::{bary, gauss_legendre, TriangleRule};
use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Orders and thresholds of the pair quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss order per dimension for singular and near-singular pairs.
    pub order: usize,
    /// Gauss order per dimension of the collapsed rule for separated pairs.
    pub regular_order: usize,
    /// Separated pairs with centroid distance below this multiple of the
    /// larger diameter use `order`.
    pub near_threshold: f64,
    /// Pairs beyond this multiple use a one-point centroid rule.
    pub far_threshold: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            order: 5,
            regular_order: 3,
            near_threshold: 1.5,
            far_threshold: None,
        }
    }
}

impl QuadratureConfig {
    /// Cheaper rules for preconditioner blocks, which only need to be
    /// spectrally equivalent rather than accurate.
    pub fn preconditioner() -> Self {
        QuadratureConfig {
            order: 4,
            regular_order: 2,
            near_threshold: 1.5,
            far_threshold: Some(4.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 || self.regular_order < 1 {
            return Err(Error::InvalidConfig("quadrature orders must be at least 1".into()));
        }
        if !(self.near_threshold >= 0.0) {
            return Err(Error::InvalidConfig("near threshold must be nonnegative".into()));
        }
        if let Some(f) = self.far_threshold {
            if !(f >= self.near_threshold) {
                return Err(Error::InvalidConfig("far threshold must not be below the near threshold".into()));
            }
        }
        Ok(())
    }
}

/// Relative position of two triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    Coincident,
    Edge,
    Vertex,
    Disjoint,
}

/// `full = ∫∫ k`, `lin[a][b] = ∫∫ k λ_a(x) λ_b(y)` over a triangle pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairMoments {
    pub full: c64,
    pub lin: [[c64; 3]; 3],
}

impl PairMoments {
    pub const ZERO: PairMoments = PairMoments {
        full: c64::new(0.0, 0.0),
        lin: [[c64::new(0.0, 0.0); 3]; 3],
    };

    pub fn transpose(&self) -> PairMoments {
        let mut lin = self.lin;
        for (a, row) in lin.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.lin[b][a];
            }
        }
        PairMoments { full: self.full, lin }
    }

    /// `cᵀ lin d`: the integral against linear shapes with nodal values `c`, `d`.
    #[inline]
    pub fn bilinear(&self, c: &[f64; 3], d: &[f64; 3]) -> c64 {
        let mut s = c64::new(0.0, 0.0);
        for a in 0..3 {
            if c[a] == 0.0 {
                continue;
            }
            let row = &self.lin[a];
            s += (row[0] * d[0] + row[1] * d[1] + row[2] * d[2]) * c[a];
        }
        s
    }
}

/// A triangle in canonical vertex order with cached geometry and quadrature points.
#[derive(Clone, Debug)]
pub(crate) struct GeoTri {
    pub p: [Vec3; 3],
    pub id: [u32; 3],
    pub area: f64,
    pub centroid: Vec3,
    pub diam: f64,
    pub normal: Vec3,
    /// Surface gradients of the barycentric coordinates.
    pub grad: [Vec3; 3],
    /// Physical points, barycentrics and weights (including the Jacobian) of
    /// the regular and near rules.
    pub regular: Vec<(Vec3, [f64; 3], f64)>,
    pub near: Vec<(Vec3, [f64; 3], f64)>,
}

impl GeoTri {
    pub fn new(p: [Vec3; 3], id: [u32; 3], rules: &Rules) -> Result<Self> {
        let an = vec3::cross(vec3::sub(p[1], p[0]), vec3::sub(p[2], p[0]));
        let twice = vec3::norm(an);
        let diam = vec3::dist(p[0], p[1]).max(vec3::dist(p[1], p[2])).max(vec3::dist(p[2], p[0]));
        if !(twice > 1e-14 * diam * diam) {
            return Err(Error::DegenerateTriangle(0.5 * twice));
        }
        let normal = vec3::scale(an, 1.0 / twice);
        let grad = std::array::from_fn(|a| {
            let e = vec3::sub(p[(a + 2) % 3], p[(a + 1) % 3]);
            vec3::scale(vec3::cross(normal, e), 1.0 / twice)
        });
        let centroid = vec3::scale(vec3::add(vec3::add(p[0], p[1]), p[2]), 1.0 / 3.0);
        let pts = |rule: &TriangleRule| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(q, &w)| {
                    let l = bary(*q);
                    (Self::point(&p, &l), l, w * twice)
                })
                .collect()
        };
        Ok(GeoTri {
            p,
            id,
            area: 0.5 * twice,
            centroid,
            diam,
            normal,
            grad,
            regular: pts(&rules.regular),
            near: pts(&rules.near),
        })
    }

    #[inline]
    fn point(p: &[Vec3; 3], l: &[f64; 3]) -> Vec3 {
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            l[0] * p[0][2] + l[1] * p[1][2] + l[2] * p[2][2],
        ]
    }

    pub fn classify(&self, other: &GeoTri) -> (PairClass, usize) {
        let shared = self.id.iter().filter(|i| other.id.contains(i)).count();
        let class = match shared {
            3 => PairClass::Coincident,
            2 => PairClass::Edge,
            1 => PairClass::Vertex,
            _ => PairClass::Disjoint,
        };
        (class, shared)
    }
}

/// Precomputed rules for a [`QuadratureConfig`].
#[derive(Clone, Debug)]
pub(crate) struct Rules {
    pub cfg: QuadratureConfig,
    pub gl: (Vec<f64>, Vec<f64>),
    pub gl2: (Vec<f64>, Vec<f64>),
    pub tri: TriangleRule,
    pub mid: TriangleRule,
    pub regular: TriangleRule,
    pub near: TriangleRule,
}

impl Rules {
    pub fn new(cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Rules {
            cfg: *cfg,
            gl: gauss_legendre(cfg.order),
            gl2: gauss_legendre(2),
            tri: TriangleRule::collapsed(cfg.order),
            mid: TriangleRule::midpoints(),
            regular: TriangleRule::collapsed(cfg.regular_order),
            near: TriangleRule::collapsed(cfg.order),
        })
    }
}

/// Accumulates kernel samples into pair moments (in some local vertex order).
struct Acc {
    full: c64,
    lin: [[c64; 3]; 3],
    need_lin: bool,
}

impl Acc {
    fn new(need_lin: bool) -> Self {
        Acc {
            full: c64::new(0.0, 0.0),
            lin: [[c64::new(0.0, 0.0); 3]; 3],
            need_lin,
        }
    }

    #[inline]
    fn add(&mut self, g: c64, lu: &[f64; 3], lv: &[f64; 3]) {
        self.full += g;
        if self.need_lin {
            for a in 0..3 {
                let ga = g * lu[a];
                for b in 0..3 {
                    self.lin[a][b] += ga * lv[b];
                }
            }
        }
    }

    /// Scales and reorders local moments into canonical order.
    fn finish(self, scale: f64, pu: [usize; 3], pv: [usize; 3]) -> PairMoments {
        let mut m = PairMoments {
            full: self.full * scale,
            lin: [[c64::new(0.0, 0.0); 3]; 3],
        };
        if self.need_lin {
            for a in 0..3 {
                for b in 0..3 {
                    m.lin[pu[a]][pv[b]] = self.lin[a][b] * scale;
                }
            }
        }
        m
    }
}

#[inline]
fn lam(u: [f64; 2]) -> [f64; 3] {
    bary(u)
}

fn coincident<K: Fn(Vec3) -> c64>(t: &GeoTri, r: &Rules, k: &K, acc: &mut Acc) {
    const E: [[f64; 2]; 6] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, -1.0]];
    let a1 = vec3::sub(t.p[1], t.p[0]);
    let a2 = vec3::sub(t.p[2], t.p[0]);
    let (x, w) = &r.gl;
    // Each hexagon side is split at its midpoint: the kernel along a side is
    // analytic but has complex poles close enough to slow plain Gauss down.
    for (s, half) in (0..6).flat_map(|s| [(s, 0.0), (s, 0.5)]) {
        let (e0, e1) = (E[s], E[(s + 1) % 6]);
        for (&xi, &wxi) in x.iter().zip(w) {
            let om = 1.0 - xi;
            for (&t, &wt) in x.iter().zip(w) {
                let (eta, weta) = (half + 0.5 * t, 0.5 * wt);
                let z = [xi * (e0[0] + eta * (e1[0] - e0[0])), xi * (e0[1] + eta * (e1[1] - e0[1]))];
                let g = k(vec3::add(vec3::scale(a1, z[0]), vec3::scale(a2, z[1]))) * (wxi * weta * xi * om * om);
                let m = [(-z[0]).max(0.0), (-z[1]).max(0.0)];
                if !acc.need_lin {
                    acc.full += g * 0.5;
                    continue;
                }
                for (q, &wq) in r.mid.points.iter().zip(&r.mid.weights) {
                    let v = [m[0] + om * q[0], m[1] + om * q[1]];
                    let u = [v[0] + z[0], v[1] + z[1]];
                    acc.add(g * wq, &lam(u), &lam(v));
                }
            }
        }
    }
}

/// `t`, `s` in local order with the shared edge as vertices 0 and 1.
///
/// With `d = u1 - v1` the singular set is `d = u2 = v2 = 0`. The pair
/// `(|d|, u2, v2)` is written in polar form for the gauge
/// `N = max(v2, |d| + u2)` (or its mirror for `d < 0`), whose unit sphere
/// is a triangle and a square. This keeps every Jacobian polynomial.
fn edge<K: Fn(Vec3) -> c64>(t: &[Vec3; 3], s: &[Vec3; 3], r: &Rules, k: &K, acc: &mut Acc) {
    let e = vec3::sub(t[1], t[0]);
    let a = vec3::sub(t[2], t[0]);
    let b = vec3::sub(s[2], t[0]);
    let (x, w) = &r.gl;
    let (tx, tw) = &r.gl2;
    let mut faces: Vec<([f64; 3], f64)> = Vec::with_capacity(r.tri.len() + x.len() * x.len());
    for (q, &wq) in r.tri.points.iter().zip(&r.tri.weights) {
        faces.push(([q[0], q[1], 1.0], wq));
    }
    for (&p, &wp) in x.iter().zip(w) {
        for (&q, &wq) in x.iter().zip(w) {
            faces.push(([p, 1.0 - p, q], wp * wq));
        }
    }
    for positive in [true, false] {
        for &(q, wq) in &faces {
            // q = (|d|, near, far) on the unit gauge sphere
            let (dd, qu, qv) = if positive { (q[0], q[1], q[2]) } else { (q[0], q[2], q[1]) };
            let sd = if positive { dd } else { -dd };
            let dir = vec3::sub(vec3::add(vec3::scale(e, sd), vec3::scale(a, qu)), vec3::scale(b, qv));
            for (&xi, &wxi) in x.iter().zip(w) {
                let g = k(vec3::scale(dir, xi)) * (wq * wxi * xi * xi * (1.0 - xi));
                let (u2, v2) = (xi * qu, xi * qv);
                for (&tt, &wt) in tx.iter().zip(tw) {
                    let lo = (1.0 - xi) * tt;
                    let (u1, v1) = if positive { (lo + xi * dd, lo) } else { (lo, lo + xi * dd) };
                    acc.add(g * wt, &lam([u1, u2]), &lam([v1, v2]));
                }
            }
        }
    }
}

/// `t`, `s` in local order with the shared vertex first.
fn vertex<K: Fn(Vec3) -> c64>(t: &[Vec3; 3], s: &[Vec3; 3], r: &Rules, k: &K, acc: &mut Acc) {
    let a1 = vec3::sub(t[1], t[0]);
    let a2 = vec3::sub(t[2], t[0]);
    let b1 = vec3::sub(s[1], s[0]);
    let b2 = vec3::sub(s[2], s[0]);
    let (x, w) = &r.gl;
    for first in [true, false] {
        for (&sig, &wsig) in x.iter().zip(w) {
            let edge = [1.0 - sig, sig];
            for (q, &wq) in r.tri.points.iter().zip(&r.tri.weights) {
                let (ub, vb) = if first { (edge, *q) } else { (*q, edge) };
                let dir = vec3::sub(
                    vec3::add(vec3::scale(a1, ub[0]), vec3::scale(a2, ub[1])),
                    vec3::add(vec3::scale(b1, vb[0]), vec3::scale(b2, vb[1])),
                );
                for (&xi, &wxi) in x.iter().zip(w) {
                    let g = k(vec3::scale(dir, xi)) * (wsig * wq * wxi * xi * xi * xi);
                    acc.add(g, &lam([xi * ub[0], xi * ub[1]]), &lam([xi * vb[0], xi * vb[1]]));
                }
            }
        }
    }
}

type Points = [(Vec3, [f64; 3], f64)];

fn tensor<K: Fn(Vec3) -> c64>(tp: &Points, sp: &Points, k: &K, acc: &mut Acc) {
    for (x, lx, wx) in tp {
        for (y, ly, wy) in sp {
            acc.add(k(vec3::sub(*x, *y)) * (wx * wy), lx, ly);
        }
    }
}

/// Local order putting the `shared` ids first, as index permutations
/// (local position -> canonical position) for both triangles.
fn shared_first(t: &GeoTri, s: &GeoTri) -> ([usize; 3], [usize; 3]) {
    let mut pt = [0usize; 3];
    let mut ps = [0usize; 3];
    let mut n = 0;
    for (i, id) in t.id.iter().enumerate() {
        if let Some(j) = s.id.iter().position(|x| x == id) {
            pt[n] = i;
            ps[n] = j;
            n += 1;
        }
    }
    let (mut nt, mut ns) = (n, n);
    for i in 0..3 {
        if !pt[..n].contains(&i) {
            pt[nt] = i;
            nt += 1;
        }
        if !ps[..n].contains(&i) {
            ps[ns] = i;
            ns += 1;
        }
    }
    (pt, ps)
}

/// Pair moments of `(t, s)` in the canonical vertex order of each triangle.
pub(crate) fn integrate_pair<K: Fn(Vec3) -> c64>(t: &GeoTri, s: &GeoTri, r: &Rules, k: &K, need_lin: bool) -> PairMoments {
    let (class, _) = t.classify(s);
    let mut acc = Acc::new(need_lin);
    let ident = [0, 1, 2];
    match class {
        PairClass::Coincident => {
            coincident(t, r, k, &mut acc);
            acc.finish(4.0 * t.area * s.area, ident, ident)
        }
        PairClass::Edge | PairClass::Vertex => {
            let (pt, ps) = shared_first(t, s);
            let tl = [t.p[pt[0]], t.p[pt[1]], t.p[pt[2]]];
            let sl = [s.p[ps[0]], s.p[ps[1]], s.p[ps[2]]];
            if class == PairClass::Edge {
                edge(&tl, &sl, r, k, &mut acc);
            } else {
                vertex(&tl, &sl, r, k, &mut acc);
            }
            acc.finish(4.0 * t.area * s.area, pt, ps)
        }
        PairClass::Disjoint => {
            let ratio = vec3::dist(t.centroid, s.centroid) / t.diam.max(s.diam);
            if r.cfg.far_threshold.is_some_and(|f| ratio >= f) {
                let g = k(vec3::sub(t.centroid, s.centroid)) * (t.area * s.area);
                let l = [1.0 / 3.0; 3];
                acc.add(g, &l, &l);
            } else if ratio < r.cfg.near_threshold {
                tensor(&t.near, &s.near, k, &mut acc);
            } else {
                tensor(&t.regular, &s.regular, k, &mut acc);
            }
            acc.finish(1.0, ident, ident)
        }
    }
}

/// Regularised integral of `kernel(x - y)` over a triangle pair.
///
/// The pair is classified by bitwise equality of vertex coordinates. The
/// returned `lin[a][b]` weights the integrand with the barycentric
/// coordinate of vertex `a` of `test` and vertex `b` of `trial` (in the given
/// order); `full` is the unweighted integral. The result is symmetric under
/// swapping the triangles for even kernels.
pub fn sauter_schwab_integral<K: Fn(Vec3) -> c64>(
    kernel: K,
    test: [Vec3; 3],
    trial: [Vec3; 3],
    cfg: &QuadratureConfig,
) -> Result<PairMoments> {
    let rules = Rules::new(cfg)?;
    let bits = |p: &Vec3| p.map(f64::to_bits);
    let mut keys: Vec<[u64; 3]> = test.iter().chain(trial.iter()).map(bits).collect();
    keys.sort_unstable();
    keys.dedup();
    let id = |p: &Vec3| keys.binary_search(&bits(p)).unwrap() as u32;
    let canon = |tri: &[Vec3; 3]| -> Result<(GeoTri, [usize; 3])> {
        let mut order = [0usize, 1, 2];
        order.sort_by_key(|&i| id(&tri[i]));
        let ids = order.map(|i| id(&tri[i]));
        if ids[0] == ids[1] || ids[1] == ids[2] {
            return Err(Error::DegenerateTriangle(0.0));
        }
        Ok((GeoTri::new(order.map(|i| tri[i]), ids, &rules)?, order))
    };
    let (gt, ot) = canon(&test)?;
    let (gs, os) = canon(&trial)?;
    let m = if gt.id <= gs.id {
        integrate_pair(&gt, &gs, &rules, &kernel, true)
    } else {
        integrate_pair(&gs, &gt, &rules, &kernel, true).transpose()
    };
    // Back from canonical to the caller's vertex order.
    let mut lin = [[c64::new(0.0, 0.0); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            lin[ot[a]][os[b]] = m.lin[a][b];
        }
    }
    Ok(PairMoments { full: m.full, lin })
}

/// Classifies a pair by bitwise vertex equality.
pub fn classify_pair(test: &[Vec3; 3], trial: &[Vec3; 3]) -> PairClass {
    let shared = test
        .iter()
        .filter(|p| trial.iter().any(|q| p.map(f64::to_bits) == q.map(f64::to_bits)))
        .count();
    match shared {
        3 => PairClass::Coincident,
        2 => PairClass::Edge,
        1 => PairClass::Vertex,
        _ => PairClass::Disjoint,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: Vec3) -> c64 {
        c64::new(1.0, 0.0)
    }

    const T0: [Vec3; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

    #[test]
    fn constant_kernel_gives_area_products() {
        let cfg = QuadratureConfig::default();
        let pairs: [[Vec3; 3]; 4] = [
            T0,
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.3]],
            [[0.0, 0.0, 0.0], [-1.0, 0.2, 0.0], [-0.4, -1.0, 0.5]],
            [[3.0, 0.0, 0.0], [4.0, 0.0, 0.0], [3.0, 1.0, 1.0]],
        ];
        let at = 0.5;
        for s in pairs {
            let m = sauter_schwab_integral(one, T0, s, &cfg).unwrap();
            let as_ = 0.5 * vec3::norm(vec3::cross(vec3::sub(s[1], s[0]), vec3::sub(s[2], s[0])));
            assert!((m.full.re - at * as_).abs() < 1e-13, "{:?}", classify_pair(&T0, &s));
            // ∫ λ_a = area / 3
            for a in 0..3 {
                for b in 0..3 {
                    assert!((m.lin[a][b].re - at * as_ / 9.0).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn polynomial_kernel_moments() {
        // k(z) = |z|² is a polynomial of degree 2 in (x, y); all rules integrate it exactly.
        let k = |z: Vec3| c64::new(vec3::dot(z, z), 0.0);
        let s_edge = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.7, 0.8, 0.4]];
        let s_vert = [[0.0, 0.0, 0.0], [-1.0, 0.2, 0.3], [-0.4, -1.0, 0.5]];
        let cfg = QuadratureConfig {
            order: 6,
            regular_order: 6,
            ..Default::default()
        };
        for s in [T0, s_edge, s_vert] {
            let m = sauter_schwab_integral(k, T0, s, &cfg).unwrap();
            let brute = brute_force(k, &T0, &s, 8);
            assert!((m.full - brute.full).norm() < 1e-12, "{:?}", classify_pair(&T0, &s));
            for a in 0..3 {
                for b in 0..3 {
                    assert!((m.lin[a][b] - brute.lin[a][b]).norm() < 1e-12);
                }
            }
        }
    }

    fn brute_force<K: Fn(Vec3) -> c64>(k: K, t: &[Vec3; 3], s: &[Vec3; 3], n: usize) -> PairMoments {
        let rule = TriangleRule::collapsed(n);
        let jt = vec3::norm(vec3::cross(vec3::sub(t[1], t[0]), vec3::sub(t[2], t[0])));
        let js = vec3::norm(vec3::cross(vec3::sub(s[1], s[0]), vec3::sub(s[2], s[0])));
        let mut m = PairMoments::ZERO;
        for (p, wp) in rule.points.iter().zip(&rule.weights) {
            let lp = bary(*p);
            let x = GeoTri::point(t, &lp);
            for (q, wq) in rule.points.iter().zip(&rule.weights) {
                let lq = bary(*q);
                let y = GeoTri::point(s, &lq);
                let g = k(vec3::sub(x, y)) * (wp * wq * jt * js);
                m.full += g;
                for a in 0..3 {
                    for b in 0..3 {
                        m.lin[a][b] += g * lp[a] * lq[b];
                    }
                }
            }
        }
        m
    }

    #[test]
    fn swap_symmetry() {
        let k = |z: Vec3| crate::assembly::kernel::greens_r(c64::new(2.0, 0.0), vec3::norm(z));
        let cfg = QuadratureConfig::default();
        let s = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.7, 0.8, 0.4]];
        let a = sauter_schwab_integral(k, T0, s, &cfg).unwrap();
        let b = sauter_schwab_integral(k, s, T0, &cfg).unwrap();
        assert_eq!(a.full, b.full);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.lin[i][j], b.lin[j][i]);
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        let bad = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(sauter_schwab_integral(one, T0, bad, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn far_tier_is_centroid_rule() {
        let cfg = QuadratureConfig {
            far_threshold: Some(2.0),
            ..Default::default()
        };
        let s = [[10.0, 0.0, 0.0], [11.0, 0.0, 0.0], [10.0, 1.0, 0.0]];
        let k = |z: Vec3| c64::new(vec3::norm(z), 0.0);
        let m = sauter_schwab_integral(k, T0, s, &cfg).unwrap();
        assert!((m.full.re - 0.25 * 10.0).abs() < 1e-12);
    }
}
