//! Dense Galerkin matrices of the single-layer and hypersingular operators.
//!
//! Carrier triangles of both spaces are mapped to geometric triangles through
//! their node keys, so front and back copies of a sheet triangle share one
//! set of quadrature moments. Each geometric pair is integrated once, in a
//! canonical vertex order, and scattered to all carrier copies.

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64 as c64;

use crate::assembly::kernel::{greens_r, KernelConfig};
use crate::assembly::quadrature::{integrate_pair, GeoTri, PairMoments, QuadratureConfig, Rules};
use crate::error::{Error, Result};
use crate::geometry::NodeKey;
use crate::par;
use crate::spaces::{FunctionSpace, ShapeKind, SpaceKind};
use crate::vec3::{self, Vec3};

/// Which bilinear form a matrix represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    SingleLayer,
    Hypersingular,
    Gram,
    PreconditionerBlock,
}

impl Form {
    pub fn as_str(self) -> &'static str {
        match self {
            Form::SingleLayer => "V",
            Form::Hypersingular => "W",
            Form::Gram => "Gram",
            Form::PreconditionerBlock => "B-block",
        }
    }
}

/// Kind and dimension of a space a matrix was assembled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceTag {
    pub kind: SpaceKind,
    pub dim: usize,
}

impl SpaceTag {
    pub fn of(s: &FunctionSpace) -> Self {
        SpaceTag {
            kind: s.kind(),
            dim: s.dim(),
        }
    }
}

/// A dense complex Galerkin matrix, rows indexed by the test space.
#[derive(Clone, Debug)]
pub struct GalerkinMatrix {
    pub entries: Mat<c64>,
    pub form: Form,
    pub test: SpaceTag,
    pub trial: SpaceTag,
}

impl GalerkinMatrix {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        matvec(&self.entries, x)
    }

    /// Restriction to the given rows and columns.
    pub fn slice(&self, rows: &[usize], cols: &[usize]) -> Mat<c64> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.entries[(rows[i], cols[j])])
    }

    /// Frobenius norm of `A - Aᵀ` relative to that of `A`.
    pub fn symmetry_defect(&self) -> f64 {
        let a = &self.entries;
        if a.nrows() != a.ncols() {
            return f64::INFINITY;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                num += (a[(i, j)] - a[(j, i)]).norm_sqr();
                den += a[(i, j)].norm_sqr();
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Plain-text export, one row per line with `re,im` pairs separated by commas.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.entries)
    }
}

/// `re,im` CSV of a complex matrix.
pub fn matrix_csv(a: &Mat<c64>) -> String {
    use std::fmt::Write as _;
    let mut s = String::with_capacity(a.nrows() * a.ncols() * 24);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if j > 0 {
                s.push(',');
            }
            let v = a[(i, j)];
            let _ = write!(s, "{:e},{:e}", v.re, v.im);
        }
        s.push('\n');
    }
    s
}

/// Reads a matrix written by [`matrix_csv`].
pub fn parse_matrix_csv(text: &str) -> Result<Mat<c64>> {
    let mut rows: Vec<Vec<c64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
        if nums.len() % 2 != 0 {
            return Err(Error::Parse(format!("line {}: odd number of values", ln + 1)));
        }
        rows.push(nums.chunks(2).map(|p| c64::new(p[0], p[1])).collect());
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub(crate) fn matvec(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.ncols(), x.len(), "matvec dimension");
    let mut y = Mat::<c64>::zeros(a.nrows(), 1);
    faer::linalg::matmul::matmul(
        y.as_mut(),
        faer::Accum::Replace,
        a.as_ref(),
        faer::ColRef::from_slice(x).as_mat(),
        c64::new(1.0, 0.0),
        faer::get_global_parallelism(),
    );
    y.col_as_slice(0).to_vec()
}

/// A carrier triangle seen through its geometric triangle.
#[derive(Clone, Debug)]
pub(crate) struct ElemView {
    pub geo: usize,
    /// +1 if the carrier orientation agrees with the canonical one.
    pub sign: f64,
    /// Basis functions with nodal values in canonical vertex order.
    pub dofs: Vec<(usize, [f64; 3])>,
}

/// Geometric triangles of one or two carrier meshes.
pub(crate) struct GeoTable {
    pub tris: Vec<GeoTri>,
}

/// Canonical data of a carrier mesh: geometric key per triangle, plus the
/// permutation from local to canonical vertex positions.
struct CarrierMap {
    geo_key: Vec<[u32; 3]>,
    pos: Vec<[usize; 3]>,
    sign: Vec<f64>,
}

impl GeoTable {
    /// Builds the table over the carriers of `spaces`, returning per-space
    /// element views.
    pub fn build(spaces: &[&[Vec<(usize, [f64; 3])>]], meshes: &[&crate::geometry::TriMesh], rules: &Rules) -> Result<(Self, Vec<Vec<ElemView>>)> {
        let mut points: HashMap<NodeKey, Vec3> = HashMap::new();
        for m in meshes {
            for (k, p) in m.keys().iter().zip(m.vertices()) {
                points.entry(*k).or_insert(*p);
            }
        }
        let mut keys: Vec<NodeKey> = points.keys().copied().collect();
        keys.sort_unstable();
        let id_of = |k: &NodeKey| keys.binary_search(k).expect("key present") as u32;

        let maps: Vec<CarrierMap> = meshes
            .iter()
            .map(|m| {
                let n = m.num_triangles();
                let mut cm = CarrierMap {
                    geo_key: Vec::with_capacity(n),
                    pos: Vec::with_capacity(n),
                    sign: Vec::with_capacity(n),
                };
                for t in 0..n {
                    let ids = m.triangle_keys(t).map(|k| id_of(&k));
                    let mut order = [0usize, 1, 2];
                    order.sort_by_key(|&i| ids[i]);
                    let mut pos = [0usize; 3];
                    for (c, &l) in order.iter().enumerate() {
                        pos[l] = c;
                    }
                    // Parity of the local -> canonical permutation.
                    let even = matches!(order, [0, 1, 2] | [1, 2, 0] | [2, 0, 1]);
                    cm.geo_key.push(order.map(|i| ids[i]));
                    cm.pos.push(pos);
                    cm.sign.push(if even { 1.0 } else { -1.0 });
                }
                cm
            })
            .collect();

        let mut geo_keys: Vec<[u32; 3]> = maps.iter().flat_map(|m| m.geo_key.iter().copied()).collect();
        geo_keys.sort_unstable();
        geo_keys.dedup();
        let tris = geo_keys
            .iter()
            .map(|g| {
                let p = g.map(|i| points[&keys[i as usize]]);
                GeoTri::new(p, *g, rules)
            })
            .collect::<Result<Vec<_>>>()?;

        let views = spaces
            .iter()
            .zip(&maps)
            .map(|(elems, cm)| {
                elems
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| !e.is_empty())
                    .map(|(t, e)| ElemView {
                        geo: geo_keys.binary_search(&cm.geo_key[t]).unwrap(),
                        sign: cm.sign[t],
                        dofs: e
                            .iter()
                            .map(|(i, c)| {
                                let mut cc = [0.0; 3];
                                for k in 0..3 {
                                    cc[cm.pos[t][k]] = c[k];
                                }
                                (*i, cc)
                            })
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        Ok((GeoTable { tris }, views))
    }
}

/// Geometric triangles of one space with a single-triangle Gauss rule of
/// order `order` (as `GeoTri::near`), and its basis-level element views.
pub(crate) fn geo_views(space: &FunctionSpace, order: usize) -> Result<(GeoTable, Vec<ElemView>)> {
    let rules = Rules::new(&QuadratureConfig {
        order,
        regular_order: 1,
        ..QuadratureConfig::default()
    })?;
    let elems = space.element_dofs();
    let (table, mut views) = GeoTable::build(&[&elems], &[space.carrier()], &rules)?;
    Ok((table, views.pop().unwrap()))
}

/// Elementary shapes of a space, with an optional projection onto its basis.
///
/// Spaces whose basis functions combine many shapes per triangle (dual-p1)
/// are assembled on the shapes first and projected afterwards; all other
/// spaces scatter directly into basis functions.
struct Side {
    elems: Vec<Vec<(usize, [f64; 3])>>,
    nshape: usize,
    projection: Option<Vec<Vec<(usize, f64)>>>,
}

impl Side {
    fn new(space: &FunctionSpace) -> Self {
        let elems = space.element_dofs();
        let crowded = elems.iter().any(|e| e.len() > 3);
        if crowded && space.shape() == ShapeKind::Hat {
            let mesh = space.carrier();
            let shapes = mesh
                .triangles()
                .iter()
                .map(|tri| (0..3).map(|k| {
                    let mut c = [0.0; 3];
                    c[k] = 1.0;
                    (tri[k], c)
                }).collect())
                .collect();
            let proj = (0..space.dim()).map(|i| space.basis(i).to_vec()).collect();
            Side {
                elems: shapes,
                nshape: mesh.num_vertices(),
                projection: Some(proj),
            }
        } else {
            Side {
                elems,
                nshape: space.dim(),
                projection: None,
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Kernel {
    Single,
    Hyper { kappa2: c64 },
}

/// Rows of geometric triangles processed per parallel batch; bounds the
/// memory held in triplets before they are scattered.
const BATCH: usize = 64;

fn assemble(test: &FunctionSpace, trial: &FunctionSpace, kappa: c64, q: &QuadratureConfig, kernel: Kernel, same: bool) -> Result<Mat<c64>> {
    let rules = Rules::new(q)?;
    let ts = Side::new(test);
    let rs = if same { None } else { Some(Side::new(trial)) };
    let rs_ref = rs.as_ref().unwrap_or(&ts);
    let (table, views) = if same {
        GeoTable::build(&[&ts.elems], &[test.carrier()], &rules)?
    } else {
        GeoTable::build(&[&ts.elems, &rs_ref.elems], &[test.carrier(), trial.carrier()], &rules)?
    };
    let tv = &views[0];
    let rv = if same { &views[0] } else { &views[1] };

    let ngeo = table.tris.len();
    let group = |v: &[ElemView]| {
        let mut g: Vec<Vec<usize>> = vec![Vec::new(); ngeo];
        for (e, ev) in v.iter().enumerate() {
            g[ev.geo].push(e);
        }
        g
    };
    let tg = group(tv);
    let rg = if same { tg.clone() } else { group(rv) };
    let test_geos: Vec<usize> = (0..ngeo).filter(|&g| !tg[g].is_empty()).collect();
    let trial_geos: Vec<usize> = (0..ngeo).filter(|&g| !rg[g].is_empty()).collect();

    let need_lin = !(kernel_is_single(kernel) && test.shape() == ShapeKind::Indicator && trial.shape() == ShapeKind::Indicator);
    let kfun = |z: Vec3| greens_r(kappa, vec3::norm(z));

    // Per-element curls (∇v × n with the canonical normal) for W.
    let curls = |v: &[ElemView]| -> Vec<Vec<Vec3>> {
        v.iter()
            .map(|e| {
                let g = &table.tris[e.geo];
                e.dofs
                    .iter()
                    .map(|(_, c)| {
                        let grad = (0..3).fold([0.0; 3], |acc, k| vec3::axpy(acc, c[k], g.grad[k]));
                        vec3::cross(grad, g.normal)
                    })
                    .collect()
            })
            .collect()
    };
    let (tc, rc) = match kernel {
        Kernel::Hyper { .. } => {
            let tc = curls(tv);
            let rc = if same { tc.clone() } else { curls(rv) };
            (tc, rc)
        }
        Kernel::Single => (Vec::new(), Vec::new()),
    };

    // `emit(p, j, v)`: value `v` for dof `p` (local to element `ea`) and trial dof `j`.
    let form_value = |m: &PairMoments, ea: usize, eb: usize, emit: &mut dyn FnMut(usize, usize, c64)| {
        let (a, b) = (&tv[ea], &rv[eb]);
        match kernel {
            Kernel::Single => {
                for (p, (_, c)) in a.dofs.iter().enumerate() {
                    for (j, d) in &b.dofs {
                        let v = if need_lin { m.bilinear(c, d) } else { m.full * (c[0] * d[0]) };
                        emit(p, *j, v);
                    }
                }
            }
            Kernel::Hyper { kappa2 } => {
                let s = a.sign * b.sign;
                let nn = vec3::dot(table.tris[a.geo].normal, table.tris[b.geo].normal);
                for (p, (_, c)) in a.dofs.iter().enumerate() {
                    for (r, (j, d)) in b.dofs.iter().enumerate() {
                        let cc = vec3::dot(tc[ea][p], rc[eb][r]);
                        emit(p, *j, (m.full * cc - kappa2 * nn * m.bilinear(c, d)) * s);
                    }
                }
            }
        }
    };

    // Rows touched by each test triangle, and the local row of every element dof.
    let rows_of: Vec<Vec<usize>> = tg
        .iter()
        .map(|es| {
            let mut r: Vec<usize> = es.iter().flat_map(|&e| tv[e].dofs.iter().map(|d| d.0)).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    let local: Vec<Vec<usize>> = tv
        .iter()
        .map(|e| e.dofs.iter().map(|d| rows_of[e.geo].binary_search(&d.0).unwrap()).collect())
        .collect();

    // Each test triangle fills a dense block of its rows; blocks are added
    // into a row-major accumulator in a fixed order. In symmetric mode only
    // pairs with gb >= ga are integrated, off-diagonal ones with weight 2,
    // and the result is symmetrised below.
    let (nrows, ncols) = (ts.nshape, rs_ref.nshape);
    let zero = c64::new(0.0, 0.0);
    let mut acc = vec![zero; nrows * ncols];
    for batch in test_geos.chunks(BATCH) {
        let parts = par::map_slice(batch, |&ga| {
            let mut buf = vec![zero; rows_of[ga].len() * ncols];
            let gt = &table.tris[ga];
            for &gb in &trial_geos {
                if same && gb < ga {
                    continue;
                }
                let gs = &table.tris[gb];
                let m = if ga <= gb {
                    integrate_pair(gt, gs, &rules, &kfun, need_lin)
                } else {
                    integrate_pair(gs, gt, &rules, &kfun, need_lin).transpose()
                };
                let w = if same && gb != ga { 2.0 } else { 1.0 };
                for &ea in &tg[ga] {
                    let rows = &local[ea];
                    for &eb in &rg[gb] {
                        form_value(&m, ea, eb, &mut |p, j, v| buf[rows[p] * ncols + j] += v * w);
                    }
                }
            }
            buf
        });
        for (&ga, buf) in batch.iter().zip(parts) {
            for (r, &i) in rows_of[ga].iter().enumerate() {
                let dst = &mut acc[i * ncols..(i + 1) * ncols];
                for (d, s) in dst.iter_mut().zip(&buf[r * ncols..(r + 1) * ncols]) {
                    *d += s;
                }
            }
        }
    }
    let a = if same {
        Mat::from_fn(nrows, ncols, |i, j| (acc[i * ncols + j] + acc[j * ncols + i]) * 0.5)
    } else {
        Mat::from_fn(nrows, ncols, |i, j| acc[i * ncols + j])
    };
    drop(acc);

    match (&ts.projection, &rs_ref.projection) {
        (None, None) => Ok(a),
        (pt, pr) => {
            let pr = if same { pt } else { pr };
            let a = match pr {
                Some(p) => right_project(&a, p),
                None => a,
            };
            Ok(match pt {
                Some(p) => left_project(&a, p),
                None => a,
            })
        }
    }
}

fn kernel_is_single(k: Kernel) -> bool {
    matches!(k, Kernel::Single)
}

/// `A C` for a sparse coefficient matrix given by columns.
fn right_project(a: &Mat<c64>, cols: &[Vec<(usize, f64)>]) -> Mat<c64> {
    let mut out = Mat::<c64>::zeros(a.nrows(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        let dst = out.col_as_slice_mut(j);
        for &(u, w) in c {
            for (d, s) in dst.iter_mut().zip(a.col_as_slice(u)) {
                *d += s * w;
            }
        }
    }
    out
}

/// `Cᵀ A` for a sparse coefficient matrix given by columns.
fn left_project(a: &Mat<c64>, cols: &[Vec<(usize, f64)>]) -> Mat<c64> {
    let mut out = Mat::<c64>::zeros(cols.len(), a.ncols());
    for j in 0..a.ncols() {
        let src = a.col_as_slice(j);
        let dst = out.col_as_slice_mut(j);
        for (i, c) in cols.iter().enumerate() {
            dst[i] = c.iter().map(|&(v, w)| src[v] * w).sum();
        }
    }
    out
}

fn same_space(a: &FunctionSpace, b: &FunctionSpace) -> bool {
    std::ptr::eq(a, b)
}

/// Galerkin matrix of the single-layer operator, `A[i, j] = ⟨V φ_j, ψ_i⟩`.
pub fn assemble_single_layer(test: &FunctionSpace, trial: &FunctionSpace, cfg: &KernelConfig, q: &QuadratureConfig) -> Result<GalerkinMatrix> {
    let same = same_space(test, trial);
    let entries = assemble(test, trial, cfg.kappa, q, Kernel::Single, same)?;
    Ok(GalerkinMatrix {
        entries,
        form: Form::SingleLayer,
        test: SpaceTag::of(test),
        trial: SpaceTag::of(trial),
    })
}

/// Galerkin matrix of the hypersingular operator in its integrated-by-parts
/// form: surface curls minus `κ² (n_x · n_y)` times the densities.
pub fn assemble_hypersingular(test: &FunctionSpace, trial: &FunctionSpace, cfg: &KernelConfig, q: &QuadratureConfig) -> Result<GalerkinMatrix> {
    if test.shape() != ShapeKind::Hat || trial.shape() != ShapeKind::Hat {
        return Err(Error::UnsupportedSpace("hypersingular requires continuous densities".into()));
    }
    let same = same_space(test, trial);
    let kappa2 = cfg.kappa * cfg.kappa;
    let entries = assemble(test, trial, cfg.kappa, q, Kernel::Hyper { kappa2 }, same)?;
    Ok(GalerkinMatrix {
        entries,
        form: Form::Hypersingular,
        test: SpaceTag::of(test),
        trial: SpaceTag::of(trial),
    })
}
