use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Geometric identity of a mesh node.
///
/// Front and back copies of a sheet, and the meshes of different panels, share
/// nodes by key. Keys of refined nodes are built from the keys of the primal
/// nodes they are derived from, so identical geometry always gets identical keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Vertex(u32),
    /// Midpoint of the edge between two primal vertices (sorted ids).
    Midpoint(u32, u32),
    /// Barycenter of a primal triangle (sorted ids).
    Centroid(u32, u32, u32),
}

impl NodeKey {
    pub fn midpoint(a: u32, b: u32) -> Self {
        NodeKey::Midpoint(a.min(b), a.max(b))
    }

    pub fn centroid(a: u32, b: u32, c: u32) -> Self {
        let mut s = [a, b, c];
        s.sort_unstable();
        NodeKey::Centroid(s[0], s[1], s[2])
    }

    pub fn primal_id(&self) -> Option<u32> {
        match *self {
            NodeKey::Vertex(i) => Some(i),
            _ => None,
        }
    }
}

/// Canonical identity of a geometric triangle: its sorted node keys.
pub type TriKey = [NodeKey; 3];

pub fn tri_key(keys: [NodeKey; 3]) -> TriKey {
    let mut k = keys;
    k.sort_unstable();
    k
}

/// Per-vertex labels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexTags(u8);

impl VertexTags {
    pub const JUNCTION: VertexTags = VertexTags(1);
    pub const SHEET_BOUNDARY: VertexTags = VertexTags(2);
    pub const IRREGULAR: VertexTags = VertexTags(4);

    pub fn contains(self, other: VertexTags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: VertexTags) {
        self.0 |= other.0;
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(b: u8) -> Self {
        VertexTags(b & 7)
    }
}

/// Where a vertex of a barycentric refinement comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeProvenance {
    Primal(usize),
    EdgeMidpoint(usize, usize),
    Barycenter(usize),
}

/// Parent data recorded by [`crate::geometry::barycentric_refine`].
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    /// Sub-triangle -> parent triangle.
    pub parent: Vec<usize>,
    /// Refined vertex -> origin in the parent mesh.
    pub provenance: Vec<NodeProvenance>,
}

/// Oriented triangle surface mesh.
///
/// The vertex order of each triangle fixes its unit normal by the right-hand rule.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    keys: Vec<NodeKey>,
    sheet: Vec<usize>,
    tags: Vec<VertexTags>,
    refinement: Option<Refinement>,
}

/// Edge incidence of a [`TriMesh`].
#[derive(Clone, Debug)]
pub struct EdgeTopology {
    /// Vertex pairs, smaller index first.
    pub edges: Vec<[usize; 2]>,
    /// Incident triangles per edge (one or two).
    pub edge_triangles: Vec<Vec<usize>>,
    /// Edge ids of each triangle, edge `k` opposite local vertex `k`.
    pub triangle_edges: Vec<[usize; 3]>,
}

impl EdgeTopology {
    pub fn is_boundary(&self, e: usize) -> bool {
        self.edge_triangles[e].len() == 1
    }
}

impl TriMesh {
    /// Mesh with keys `Vertex(i)`, every triangle on sheet 0 and no tags.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let keys = (0..vertices.len()).map(|i| NodeKey::Vertex(i as u32)).collect();
        let sheet = vec![0; triangles.len()];
        Self::from_parts(vertices, triangles, keys, sheet)
    }

    /// Full constructor; validates indices, areas, edge manifoldness and orientation.
    pub fn from_parts(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        keys: Vec<NodeKey>,
        sheet: Vec<usize>,
    ) -> Result<Self> {
        if keys.len() != vertices.len() {
            return Err(Error::InvalidMesh("one node key per vertex required".into()));
        }
        if sheet.len() != triangles.len() {
            return Err(Error::InvalidMesh("one sheet label per triangle required".into()));
        }
        let tags = vec![VertexTags::default(); vertices.len()];
        let mesh = TriMesh {
            vertices,
            triangles,
            keys,
            sheet,
            tags,
            refinement: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub(crate) fn with_tags(mut self, tags: Vec<VertexTags>) -> Self {
        debug_assert_eq!(tags.len(), self.vertices.len());
        self.tags = tags;
        self
    }

    pub(crate) fn with_refinement(mut self, r: Refinement) -> Self {
        self.refinement = Some(r);
        self
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a vertex out of range")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let a = self.area(t);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidMesh(format!("triangle {t} has nonpositive area {a:e}")));
            }
        }
        // Directed edges: each may occur once; a shared edge must be traversed
        // in opposite directions by its two triangles.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if let Some(other) = directed.insert(e, t) {
                    return Err(Error::InvalidMesh(format!(
                        "edge {:?} traversed in the same direction by triangles {other} and {t} (inconsistent orientation or non-manifold)",
                        e
                    )));
                }
            }
        }
        let topo = self.edge_topology();
        if let Some(e) = topo.edge_triangles.iter().position(|ts| ts.len() > 2) {
            return Err(Error::InvalidMesh(format!("edge {:?} shared by more than two triangles", topo.edges[e])));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn keys(&self) -> &[NodeKey] {
        &self.keys
    }

    pub fn key(&self, v: usize) -> NodeKey {
        self.keys[v]
    }

    pub fn sheets(&self) -> &[usize] {
        &self.sheet
    }

    pub fn sheet_of(&self, t: usize) -> usize {
        self.sheet[t]
    }

    pub fn tags(&self) -> &[VertexTags] {
        &self.tags
    }

    pub fn refinement(&self) -> Option<&Refinement> {
        self.refinement.as_ref()
    }

    pub fn triangle_points(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_keys(&self, t: usize) -> [NodeKey; 3] {
        let [a, b, c] = self.triangles[t];
        [self.keys[a], self.keys[b], self.keys[c]]
    }

    /// Non-normalised normal: twice the area times the unit normal.
    pub fn area_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle_points(t);
        vec3::cross(vec3::sub(b, a), vec3::sub(c, a))
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * vec3::norm(self.area_normal(t))
    }

    pub fn normal(&self, t: usize) -> Vec3 {
        let n = self.area_normal(t);
        vec3::scale(n, 1.0 / vec3::norm(n))
    }

    pub fn centroid(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle_points(t);
        vec3::scale(vec3::add(vec3::add(a, b), c), 1.0 / 3.0)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn edge_topology(&self) -> EdgeTopology {
        let mut index: HashMap<[usize; 2], usize> = HashMap::with_capacity(self.triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for (k, slot) in te.iter_mut().enumerate() {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = [a.min(b), a.max(b)];
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_triangles.push(Vec::new());
                    edges.len() - 1
                });
                edge_triangles[e].push(t);
                *slot = e;
            }
            triangle_edges.push(te);
        }
        EdgeTopology {
            edges,
            edge_triangles,
            triangle_edges,
        }
    }

    /// Edges incident to exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let topo = self.edge_topology();
        topo.edges
            .iter()
            .zip(&topo.edge_triangles)
            .filter(|(_, ts)| ts.len() == 1)
            .map(|(e, _)| *e)
            .collect()
    }

    /// Flags vertices lying on a boundary edge.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vertices()];
        for [a, b] in self.boundary_edges() {
            mask[a] = true;
            mask[b] = true;
        }
        mask
    }

    /// Number of triangles containing each vertex.
    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0; self.num_vertices()];
        for tri in &self.triangles {
            for &v in tri {
                val[v] += 1;
            }
        }
        val
    }

    /// Triangles incident to each vertex, in increasing order.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut vt = vec![Vec::new(); self.num_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                vt[v].push(t);
            }
        }
        vt
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_topology()
            .edges
            .iter()
            .map(|&[a, b]| vec3::dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_topology()
            .edges
            .iter()
            .map(|&[a, b]| vec3::dist(self.vertices[a], self.vertices[b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between any two vertices.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        vec3::dist(lo, hi)
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Sub-mesh made of the listed triangles, with vertices renumbered in order
    /// of first appearance. Keys, sheet labels and tags are carried over.
    pub fn submesh(&self, tris: &[usize]) -> Result<TriMesh> {
        let mut map = vec![usize::MAX; self.num_vertices()];
        let mut vertices = Vec::new();
        let mut keys = Vec::new();
        let mut tags = Vec::new();
        let mut triangles = Vec::with_capacity(tris.len());
        let mut sheet = Vec::with_capacity(tris.len());
        for &t in tris {
            let mut nt = [0; 3];
            for (k, &v) in self.triangles[t].iter().enumerate() {
                if map[v] == usize::MAX {
                    map[v] = vertices.len();
                    vertices.push(self.vertices[v]);
                    keys.push(self.keys[v]);
                    tags.push(self.tags[v]);
                }
                nt[k] = map[v];
            }
            triangles.push(nt);
            sheet.push(self.sheet[t]);
        }
        Ok(TriMesh::from_parts(vertices, triangles, keys, sheet)?.with_tags(tags))
    }

    /// Disjoint union of meshes (no vertex merging).
    pub fn disjoint_union(parts: &[&TriMesh]) -> Result<TriMesh> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut keys = Vec::new();
        let mut sheet = Vec::new();
        let mut tags = Vec::new();
        for m in parts {
            let off = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            keys.extend_from_slice(&m.keys);
            tags.extend_from_slice(&m.tags);
            sheet.extend_from_slice(&m.sheet);
            triangles.extend(m.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        }
        Ok(TriMesh::from_parts(vertices, triangles, keys, sheet)?.with_tags(tags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TriMesh {
        TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn square_topology() {
        let m = square();
        assert_eq!(m.edge_topology().edges.len(), 5);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.valences(), vec![2, 1, 2, 1]);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert_eq!(m.normal(0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = TriMesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 3]]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_degenerate_triangle() {
        let err = TriMesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], vec![[0, 1, 2]]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let err = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 3, 2]],
        );
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let err = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 1.0, 0.0], [0.5, -1.0, 0.0], [0.5, 0.0, 1.0]],
            vec![[0, 1, 2], [1, 0, 3], [1, 0, 4]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn submesh_keeps_keys() {
        let m = square();
        let s = m.submesh(&[1]).unwrap();
        assert_eq!(s.num_vertices(), 3);
        assert_eq!(s.keys(), &[NodeKey::Vertex(0), NodeKey::Vertex(2), NodeKey::Vertex(3)]);
    }
}
