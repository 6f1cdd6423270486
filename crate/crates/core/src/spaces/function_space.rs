use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{barycentric_refine, dual_cells, tri_key, NodeKey, TriKey, TriMesh};
use crate::vec3::Vec3;

/// Family of a boundary-element space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Piecewise constants on the primal mesh.
    PwConstant,
    /// Continuous piecewise linears on the primal mesh.
    ContinuousP1,
    /// Indicators of dual cells, realised on the barycentric refinement.
    DualConstant,
    /// Buffa–Christiansen type continuous linears on the barycentric refinement.
    DualP1,
}

impl SpaceKind {
    pub fn shape(self) -> ShapeKind {
        match self {
            SpaceKind::PwConstant | SpaceKind::DualConstant => ShapeKind::Indicator,
            SpaceKind::ContinuousP1 | SpaceKind::DualP1 => ShapeKind::Hat,
        }
    }

    pub fn is_dual(self) -> bool {
        matches!(self, SpaceKind::DualConstant | SpaceKind::DualP1)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::PwConstant => "pw-constant",
            SpaceKind::ContinuousP1 => "continuous-p1",
            SpaceKind::DualConstant => "dual-constant",
            SpaceKind::DualP1 => "dual-p1",
        }
    }
}

/// Elementary shapes basis functions are built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    /// Indicator of a carrier triangle; shape index = triangle index.
    Indicator,
    /// Nodal hat of a carrier vertex; shape index = vertex index.
    Hat,
}

/// Geometric object a degree of freedom is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Vertex(NodeKey),
    Triangle(TriKey),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofMeta {
    pub anchor: Anchor,
    pub panel: usize,
    /// Sheet of the support if it lies in a single sheet.
    pub sheet: Option<usize>,
    pub position: Vec3,
}

/// Contiguous per-panel part of a (product) space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub panel: usize,
    pub dofs: Range<usize>,
    pub vertices: Range<usize>,
    pub triangles: Range<usize>,
}

/// Basis functions written as weighted sums of elementary shapes on a carrier mesh.
#[derive(Clone, Debug)]
pub struct FunctionSpace {
    pub(crate) kind: SpaceKind,
    pub(crate) carrier: TriMesh,
    pub(crate) coeffs: Vec<Vec<(usize, f64)>>,
    pub(crate) meta: Vec<DofMeta>,
    pub(crate) blocks: Vec<Block>,
    pub(crate) reduction: Option<crate::spaces::Reduction>,
}

/// Basis functions touching one carrier triangle with their values at its
/// three vertices (constant shapes repeat the weight).
pub type ElementDofs = Vec<(usize, [f64; 3])>;

impl FunctionSpace {
    pub(crate) fn new(kind: SpaceKind, carrier: TriMesh, coeffs: Vec<Vec<(usize, f64)>>, meta: Vec<DofMeta>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySpace(format!("{} space has no basis functions", kind.as_str())));
        }
        let nshape = match kind.shape() {
            ShapeKind::Indicator => carrier.num_triangles(),
            ShapeKind::Hat => carrier.num_vertices(),
        };
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_empty() || c.iter().any(|&(s, w)| s >= nshape || !w.is_finite()) {
                return Err(Error::InvalidConfig(format!("basis function {i} is malformed")));
            }
        }
        let blocks = vec![Block {
            panel: 0,
            dofs: 0..coeffs.len(),
            vertices: 0..carrier.num_vertices(),
            triangles: 0..carrier.num_triangles(),
        }];
        Ok(FunctionSpace {
            kind,
            carrier,
            coeffs,
            meta,
            blocks,
            reduction: None,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn shape(&self) -> ShapeKind {
        self.kind.shape()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn carrier(&self) -> &TriMesh {
        &self.carrier
    }

    pub fn basis(&self, i: usize) -> &[(usize, f64)] {
        &self.coeffs[i]
    }

    pub fn meta(&self) -> &[DofMeta] {
        &self.meta
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn reduction(&self) -> Option<crate::spaces::Reduction> {
        self.reduction
    }

    /// Basis functions supported on each carrier triangle.
    pub fn element_dofs(&self) -> Vec<ElementDofs> {
        let mesh = &self.carrier;
        let mut out: Vec<ElementDofs> = vec![Vec::new(); mesh.num_triangles()];
        match self.shape() {
            ShapeKind::Indicator => {
                for (i, c) in self.coeffs.iter().enumerate() {
                    for &(t, w) in c {
                        out[t].push((i, [w; 3]));
                    }
                }
            }
            ShapeKind::Hat => {
                let mut at_vertex: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mesh.num_vertices()];
                for (i, c) in self.coeffs.iter().enumerate() {
                    for &(v, w) in c {
                        at_vertex[v].push((i, w));
                    }
                }
                for (t, tri) in mesh.triangles().iter().enumerate() {
                    let e = &mut out[t];
                    for (k, &v) in tri.iter().enumerate() {
                        for &(i, w) in &at_vertex[v] {
                            match e.iter_mut().find(|(j, _)| *j == i) {
                                Some((_, c)) => c[k] += w,
                                None => {
                                    let mut c = [0.0; 3];
                                    c[k] = w;
                                    e.push((i, c));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Integral of every basis function.
    pub fn integrals(&self) -> Vec<f64> {
        let mesh = &self.carrier;
        self.coeffs
            .iter()
            .map(|c| match self.shape() {
                ShapeKind::Indicator => c.iter().map(|&(t, w)| w * mesh.area(t)).sum(),
                ShapeKind::Hat => {
                    let vt = &self.vertex_area_third();
                    c.iter().map(|&(v, w)| w * vt[v]).sum()
                }
            })
            .collect()
    }

    /// `∫ hat_v = |star(v)| / 3` for every carrier vertex.
    fn vertex_area_third(&self) -> Vec<f64> {
        let mesh = &self.carrier;
        let mut a = vec![0.0; mesh.num_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let s = mesh.area(t) / 3.0;
            for &v in tri {
                a[v] += s;
            }
        }
        a
    }

    /// Values of `Σ_i x_i φ_i` at the carrier vertices (hat spaces only).
    pub fn nodal_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.shape() != ShapeKind::Hat {
            return Err(Error::UnsupportedSpace("nodal values need a hat-based space".into()));
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                left: x.len(),
                right: self.dim(),
            });
        }
        let mut out = vec![0.0; self.carrier.num_vertices()];
        for (c, &xi) in self.coeffs.iter().zip(x) {
            for &(v, w) in c {
                out[v] += xi * w;
            }
        }
        Ok(out)
    }

    /// Values of `Σ_i x_i φ_i` on each carrier triangle (indicator spaces only).
    pub fn triangle_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.shape() != ShapeKind::Indicator {
            return Err(Error::UnsupportedSpace("triangle values need an indicator-based space".into()));
        }
        let mut out = vec![0.0; self.carrier.num_triangles()];
        for (c, &xi) in self.coeffs.iter().zip(x) {
            for &(t, w) in c {
                out[t] += xi * w;
            }
        }
        Ok(out)
    }

    /// Carrier triangles in the support of basis function `i`.
    pub fn support(&self, i: usize) -> Vec<usize> {
        let mut s: Vec<usize> = match self.shape() {
            ShapeKind::Indicator => self.coeffs[i].iter().map(|&(t, _)| t).collect(),
            ShapeKind::Hat => {
                let vs: Vec<usize> = self.coeffs[i].iter().filter(|(_, w)| *w != 0.0).map(|&(v, _)| v).collect();
                self.carrier
                    .triangles()
                    .iter()
                    .enumerate()
                    .filter(|(_, tri)| tri.iter().any(|v| vs.contains(v)))
                    .map(|(t, _)| t)
                    .collect()
            }
        };
        s.sort_unstable();
        s.dedup();
        s
    }

    /// The part of the space belonging to block `b`, as a standalone space.
    pub fn block_space(&self, b: usize) -> Result<FunctionSpace> {
        let blk = &self.blocks[b];
        let v0 = blk.vertices.start;
        let t0 = blk.triangles.start;
        let vertices = self.carrier.vertices()[blk.vertices.clone()].to_vec();
        let keys = self.carrier.keys()[blk.vertices.clone()].to_vec();
        let tags = self.carrier.tags()[blk.vertices.clone()].to_vec();
        let triangles = self.carrier.triangles()[blk.triangles.clone()]
            .iter()
            .map(|t| [t[0] - v0, t[1] - v0, t[2] - v0])
            .collect();
        let sheet = self.carrier.sheets()[blk.triangles.clone()].to_vec();
        let carrier = TriMesh::from_parts(vertices, triangles, keys, sheet)?.with_tags(tags);
        let shift = match self.shape() {
            ShapeKind::Indicator => t0,
            ShapeKind::Hat => v0,
        };
        let coeffs = self.coeffs[blk.dofs.clone()]
            .iter()
            .map(|c| c.iter().map(|&(s, w)| (s - shift, w)).collect())
            .collect();
        let mut sp = FunctionSpace::new(self.kind, carrier, coeffs, self.meta[blk.dofs.clone()].to_vec())?;
        sp.blocks[0].panel = blk.panel;
        Ok(sp)
    }

    /// Block concatenation. Carriers are joined as a disjoint union.
    pub fn product(parts: Vec<FunctionSpace>) -> Result<FunctionSpace> {
        let first = parts
            .first()
            .ok_or_else(|| Error::EmptySpace("product of no spaces".into()))?;
        let kind = first.kind;
        if parts.iter().any(|p| p.kind != kind) {
            return Err(Error::UnsupportedSpace("product of spaces of different kinds".into()));
        }
        let carriers: Vec<&TriMesh> = parts.iter().map(|p| &p.carrier).collect();
        let carrier = TriMesh::disjoint_union(&carriers)?;
        let (mut coeffs, mut meta, mut blocks) = (Vec::new(), Vec::new(), Vec::new());
        let (mut nv, mut nt) = (0, 0);
        for p in &parts {
            let shift = match kind.shape() {
                ShapeKind::Indicator => nt,
                ShapeKind::Hat => nv,
            };
            for b in &p.blocks {
                blocks.push(Block {
                    panel: b.panel,
                    dofs: b.dofs.start + coeffs.len()..b.dofs.end + coeffs.len(),
                    vertices: b.vertices.start + nv..b.vertices.end + nv,
                    triangles: b.triangles.start + nt..b.triangles.end + nt,
                });
            }
            coeffs.extend(p.coeffs.iter().map(|c| c.iter().map(|&(s, w)| (s + shift, w)).collect::<Vec<_>>()));
            meta.extend(p.meta.iter().cloned());
            nv += p.carrier.num_vertices();
            nt += p.carrier.num_triangles();
        }
        Ok(FunctionSpace {
            kind,
            carrier,
            coeffs,
            meta,
            blocks,
            reduction: None,
        })
    }

    pub(crate) fn set_panel(&mut self, panel: usize) {
        for b in &mut self.blocks {
            b.panel = panel;
        }
        for m in &mut self.meta {
            m.panel = panel;
        }
    }

    /// Plain-text description: kind, dimension and block ranges.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind {}", self.kind.as_str());
        let _ = writeln!(s, "dim {}", self.dim());
        let _ = writeln!(
            s,
            "carrier {} vertices {} triangles",
            self.carrier.num_vertices(),
            self.carrier.num_triangles()
        );
        if let Some(r) = self.reduction {
            let _ = writeln!(s, "reduction {r}");
        }
        for b in &self.blocks {
            let _ = writeln!(s, "block panel {} dofs {}..{}", b.panel, b.dofs.start, b.dofs.end);
        }
        s
    }

    /// Position of DoF `i` within the product ordering of `full`, matched by
    /// panel and anchor. Used to embed reduced spaces in their full parent.
    pub fn embedding_in(&self, full: &FunctionSpace) -> Result<Vec<usize>> {
        if self.kind != full.kind {
            return Err(Error::UnsupportedSpace("embedding between spaces of different kinds".into()));
        }
        let index: std::collections::HashMap<(usize, Anchor), usize> =
            full.meta.iter().enumerate().map(|(i, m)| ((m.panel, m.anchor), i)).collect();
        self.meta
            .iter()
            .map(|m| {
                index
                    .get(&(m.panel, m.anchor))
                    .copied()
                    .ok_or_else(|| Error::UnsupportedSpace("space is not a subspace of the given one".into()))
            })
            .collect()
    }
}

fn vertex_sheet(mesh: &TriMesh, star: &[usize]) -> Option<usize> {
    let s = mesh.sheet_of(*star.first()?);
    star.iter().all(|&t| mesh.sheet_of(t) == s).then_some(s)
}

fn triangle_anchor(mesh: &TriMesh, t: usize) -> Anchor {
    Anchor::Triangle(tri_key(mesh.triangle_keys(t)))
}

/// One indicator per triangle.
pub fn pw_constant_space(mesh: &TriMesh) -> Result<FunctionSpace> {
    let coeffs = (0..mesh.num_triangles()).map(|t| vec![(t, 1.0)]).collect();
    let meta = (0..mesh.num_triangles())
        .map(|t| DofMeta {
            anchor: triangle_anchor(mesh, t),
            panel: 0,
            sheet: Some(mesh.sheet_of(t)),
            position: mesh.centroid(t),
        })
        .collect();
    FunctionSpace::new(SpaceKind::PwConstant, mesh.clone(), coeffs, meta)
}

/// One hat per vertex, or per interior vertex with `zero_boundary`.
pub fn continuous_p1_space(mesh: &TriMesh, zero_boundary: bool) -> Result<FunctionSpace> {
    let bnd = mesh.boundary_vertex_mask();
    let stars = mesh.vertex_triangles();
    let verts: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| !(zero_boundary && bnd[v])).collect();
    let coeffs = verts.iter().map(|&v| vec![(v, 1.0)]).collect();
    let meta = verts
        .iter()
        .map(|&v| DofMeta {
            anchor: Anchor::Vertex(mesh.key(v)),
            panel: 0,
            sheet: vertex_sheet(mesh, &stars[v]),
            position: mesh.vertices()[v],
        })
        .collect();
    FunctionSpace::new(SpaceKind::ContinuousP1, mesh.clone(), coeffs, meta)
}

/// One dual-cell indicator per interior vertex of `mesh`.
pub fn dual_constant_space(mesh: &TriMesh) -> Result<FunctionSpace> {
    let bnd = mesh.boundary_vertex_mask();
    let stars = mesh.vertex_triangles();
    let (fine, cells) = dual_cells(mesh)?;
    let verts: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| !bnd[v]).collect();
    if verts.is_empty() {
        return Err(Error::EmptySpace("dual-constant space needs an interior vertex".into()));
    }
    let coeffs = verts.iter().map(|&v| cells[v].iter().map(|&t| (t, 1.0)).collect()).collect();
    let meta = verts
        .iter()
        .map(|&v| DofMeta {
            anchor: Anchor::Vertex(mesh.key(v)),
            panel: 0,
            sheet: vertex_sheet(mesh, &stars[v]),
            position: mesh.vertices()[v],
        })
        .collect();
    FunctionSpace::new(SpaceKind::DualConstant, fine, coeffs, meta)
}

/// One function per primal triangle, continuous and piecewise linear on the
/// barycentric refinement.
///
/// Nodal weights for triangle `τ`: 1 at its barycenter, 1/2 at midpoints of
/// its interior edges and 1 at midpoints of boundary edges, and `1/valence`
/// at its vertices. The functions sum to one everywhere.
pub fn dual_p1_space(mesh: &TriMesh) -> Result<FunctionSpace> {
    let fine = barycentric_refine(mesh)?;
    let topo = mesh.edge_topology();
    let valence = mesh.valences();
    let nv = mesh.num_vertices();
    let ne = topo.edges.len();
    let coeffs = (0..mesh.num_triangles())
        .map(|t| {
            let mut c = Vec::with_capacity(7);
            c.push((nv + ne + t, 1.0));
            for &e in &topo.triangle_edges[t] {
                c.push((nv + e, if topo.is_boundary(e) { 1.0 } else { 0.5 }));
            }
            for &v in &mesh.triangles()[t] {
                c.push((v, 1.0 / valence[v] as f64));
            }
            c
        })
        .collect();
    let meta = (0..mesh.num_triangles())
        .map(|t| DofMeta {
            anchor: triangle_anchor(mesh, t),
            panel: 0,
            sheet: Some(mesh.sheet_of(t)),
            position: mesh.centroid(t),
        })
        .collect();
    FunctionSpace::new(SpaceKind::DualP1, fine, coeffs, meta)
}
