//! Independent reference integrals shared by the integration tests.
#![allow(dead_code)]

use msbem::assembly::gauss::{bary, TriangleRule};
use msbem::vec3::{self, Vec3};

fn tri_area(t: &[Vec3; 3]) -> f64 {
    0.5 * vec3::norm(vec3::cross(vec3::sub(t[1], t[0]), vec3::sub(t[2], t[0])))
}

fn map(t: &[Vec3; 3], p: [f64; 2]) -> Vec3 {
    let l = bary(p);
    let mut x = [0.0; 3];
    for k in 0..3 {
        x = vec3::axpy(x, l[k], t[k]);
    }
    x
}

/// `∫_T 1/|x - y| dy` in closed form (edge-wise log and arctangent terms).
pub fn laplace_potential(x: Vec3, t: &[Vec3; 3]) -> f64 {
    let an = vec3::cross(vec3::sub(t[1], t[0]), vec3::sub(t[2], t[0]));
    let n = vec3::scale(an, 1.0 / vec3::norm(an));
    let w = vec3::dot(vec3::sub(x, t[0]), n);
    let rho = vec3::axpy(x, -w, n);
    let aw = w.abs();
    let mut log_part = 0.0;
    let mut atan_part = 0.0;
    for i in 0..3 {
        let (p, q) = (t[i], t[(i + 1) % 3]);
        let e = vec3::sub(q, p);
        let s = vec3::scale(e, 1.0 / vec3::norm(e));
        let m = vec3::cross(s, n);
        let t0 = vec3::dot(vec3::sub(p, rho), m);
        let lm = vec3::dot(vec3::sub(p, rho), s);
        let lp = vec3::dot(vec3::sub(q, rho), s);
        let r0sq = t0 * t0 + w * w;
        if r0sq == 0.0 {
            continue;
        }
        let rm = vec3::dist(x, p);
        let rp = vec3::dist(x, q);
        // R + l without cancellation when l is negative.
        let f = |r: f64, l: f64| if l >= 0.0 { r + l } else { r0sq / (r - l) };
        if t0 != 0.0 {
            log_part += t0 * (f(rp, lp) / f(rm, lm)).ln();
        }
        atan_part += (t0 * lp / (r0sq + aw * rp)).atan() - (t0 * lm / (r0sq + aw * rm)).atan();
    }
    log_part - aw * atan_part
}

fn rule_on(s: &[Vec3; 3], rule: &TriangleRule, f: &dyn Fn(Vec3) -> f64) -> f64 {
    let jac = 2.0 * tri_area(s);
    rule.points.iter().zip(&rule.weights).map(|(p, w)| f(map(s, *p)) * w * jac).sum()
}

fn children(s: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let m = |a: Vec3, b: Vec3| vec3::scale(vec3::add(a, b), 0.5);
    let (m01, m12, m20) = (m(s[0], s[1]), m(s[1], s[2]), m(s[2], s[0]));
    [[s[0], m01, m20], [m01, s[1], m12], [m20, m12, s[2]], [m01, m12, m20]]
}

/// Adaptive 4-way subdivision of `s` until a rule and its refinement agree
/// within `tol` scaled by the piece's diameter relative to the root.
pub fn adaptive(s: &[Vec3; 3], f: &dyn Fn(Vec3) -> f64, tol: f64) -> f64 {
    fn go(s: &[Vec3; 3], f: &dyn Fn(Vec3) -> f64, rule: &TriangleRule, coarse: f64, tol: f64, depth: usize) -> f64 {
        let kids = children(s);
        let parts: Vec<f64> = kids.iter().map(|k| rule_on(k, rule, f)).collect();
        let fine: f64 = parts.iter().sum();
        if (fine - coarse).abs() <= tol || depth == 0 {
            return fine;
        }
        kids.iter()
            .zip(parts)
            .map(|(k, c)| go(k, f, rule, c, 0.5 * tol, depth - 1))
            .sum()
    }
    let rule = TriangleRule::collapsed(7);
    go(s, f, &rule, rule_on(s, &rule, f), tol, 14)
}

/// Reference value of `∫_S ∫_T 1/(4π|x - y|) dy dx`: the inner integral in
/// closed form, the outer one adaptively.
pub fn laplace_pair_oracle(s: &[Vec3; 3], t: &[Vec3; 3], tol: f64) -> f64 {
    let f = |x: Vec3| laplace_potential(x, t) / (4.0 * std::f64::consts::PI);
    adaptive(s, &f, tol)
}

/// Plain tensor Gauss on a triangle pair with the `n²`-point collapsed rule.
pub fn plain_gauss<K: Fn(Vec3) -> num_complex::Complex64>(s: &[Vec3; 3], t: &[Vec3; 3], n: usize, k: K) -> num_complex::Complex64 {
    let rule = TriangleRule::collapsed(n);
    let (js, jt) = (2.0 * tri_area(s), 2.0 * tri_area(t));
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for (p, wp) in rule.points.iter().zip(&rule.weights) {
        let x = map(s, *p);
        for (q, wq) in rule.points.iter().zip(&rule.weights) {
            acc += k(vec3::sub(x, map(t, *q))) * (wp * wq * js * jt);
        }
    }
    acc
}

/// `1/(4π|z|)`.
pub fn laplace_kernel(z: Vec3) -> num_complex::Complex64 {
    num_complex::Complex64::new(1.0 / (4.0 * std::f64::consts::PI * vec3::norm(z)), 0.0)
}

pub const T0: [Vec3; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

/// Unit triangle pairs in each singular configuration, coplanar and folded.
pub fn singular_pairs() -> Vec<(&'static str, [Vec3; 3], [Vec3; 3])> {
    vec![
        ("coincident", T0, T0),
        ("edge, coplanar", T0, [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]),
        ("edge, folded", T0, [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, -0.5, 0.8]]),
        ("vertex, coplanar", T0, [[0.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]),
        ("vertex, folded", T0, [[0.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    ]
}
