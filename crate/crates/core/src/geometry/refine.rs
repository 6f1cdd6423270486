use crate::error::{Error, Result};
use crate::geometry::mesh::{NodeKey, NodeProvenance, Refinement, TriMesh, VertexTags};
use crate::vec3;

/// Barycentric refinement: every triangle `(v0, v1, v2)` is split into the six
/// triangles `(v0, m01, b)`, `(m01, v1, b)`, `(v1, m12, b)`, `(m12, v2, b)`,
/// `(v2, m20, b)`, `(m20, v0, b)`, which keep the parent orientation.
///
/// Refined vertices are ordered: primal vertices, then one midpoint per edge
/// (in [`TriMesh::edge_topology`] order), then one barycenter per triangle.
/// Sub-triangle `6t + k` has parent `t`. New nodes get keys derived from the
/// primal keys, so refinements of different meshes sharing geometry agree.
pub fn barycentric_refine(mesh: &TriMesh) -> Result<TriMesh> {
    let primal: Vec<u32> = mesh
        .keys()
        .iter()
        .map(|k| {
            k.primal_id()
                .ok_or_else(|| Error::InvalidMesh("nested barycentric refinement is not supported".into()))
        })
        .collect::<Result<_>>()?;

    let nv = mesh.num_vertices();
    let topo = mesh.edge_topology();
    let ne = topo.edges.len();
    let nt = mesh.num_triangles();
    let pts = mesh.vertices();

    let mut vertices = pts.to_vec();
    let mut keys = mesh.keys().to_vec();
    let mut tags = mesh.tags().to_vec();
    let mut provenance: Vec<NodeProvenance> = (0..nv).map(NodeProvenance::Primal).collect();
    vertices.reserve(ne + nt);

    let inherit = VertexTags::from_bits(VertexTags::JUNCTION.bits() | VertexTags::SHEET_BOUNDARY.bits());
    for &[a, b] in &topo.edges {
        // Sum in key order so the coordinate does not depend on local numbering.
        let (p, q) = if primal[a] < primal[b] { (a, b) } else { (b, a) };
        vertices.push(vec3::scale(vec3::add(pts[p], pts[q]), 0.5));
        keys.push(NodeKey::midpoint(primal[a], primal[b]));
        tags.push(VertexTags::from_bits(tags[a].bits() & tags[b].bits() & inherit.bits()));
        provenance.push(NodeProvenance::EdgeMidpoint(a, b));
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let mut s = *tri;
        s.sort_by_key(|&v| primal[v]);
        let c = vec3::add(vec3::add(pts[s[0]], pts[s[1]]), pts[s[2]]);
        vertices.push(vec3::scale(c, 1.0 / 3.0));
        keys.push(NodeKey::centroid(primal[tri[0]], primal[tri[1]], primal[tri[2]]));
        tags.push(VertexTags::default());
        provenance.push(NodeProvenance::Barycenter(t));
    }

    let mut triangles = Vec::with_capacity(6 * nt);
    let mut sheet = Vec::with_capacity(6 * nt);
    let mut parent = Vec::with_capacity(6 * nt);
    for (t, &[v0, v1, v2]) in mesh.triangles().iter().enumerate() {
        // Edge k of the topology is opposite local vertex k.
        let [e0, e1, e2] = topo.triangle_edges[t];
        let (m12, m20, m01) = (nv + e0, nv + e1, nv + e2);
        let b = nv + ne + t;
        for tri in [
            [v0, m01, b],
            [m01, v1, b],
            [v1, m12, b],
            [m12, v2, b],
            [v2, m20, b],
            [m20, v0, b],
        ] {
            triangles.push(tri);
            sheet.push(mesh.sheet_of(t));
            parent.push(t);
        }
    }

    Ok(TriMesh::from_parts(vertices, triangles, keys, sheet)?
        .with_tags(tags)
        .with_refinement(Refinement { parent, provenance }))
}

/// Local sub-triangle offsets (within `6t..6t+6`) touching local vertex k.
pub(crate) const CORNER_CHILDREN: [[usize; 2]; 3] = [[0, 5], [1, 2], [3, 4]];

/// Dual cells of a mesh: for each primal vertex the sub-triangles of the
/// barycentric refinement incident to it. Returns the refinement with the cells.
pub fn dual_cells(mesh: &TriMesh) -> Result<(TriMesh, Vec<Vec<usize>>)> {
    let fine = barycentric_refine(mesh)?;
    let mut cells = vec![Vec::new(); mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for (k, &v) in tri.iter().enumerate() {
            for off in CORNER_CHILDREN[k] {
                cells[v].push(6 * t + off);
            }
        }
    }
    for c in cells.iter_mut() {
        c.sort_unstable();
    }
    Ok((fine, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_junction_screen;

    fn single() -> TriMesh {
        TriMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn counts_and_area() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let m = s.sheet(0);
        let f = barycentric_refine(m).unwrap();
        assert_eq!(f.num_triangles(), 48);
        let e = m.edge_topology().edges.len();
        assert_eq!(f.num_vertices(), m.num_vertices() + e + m.num_triangles());
        assert!((f.total_area() - m.total_area()).abs() <= 1e-12 * m.total_area());
        let r = f.refinement().unwrap();
        for t in 0..m.num_triangles() {
            assert_eq!(r.parent.iter().filter(|&&p| p == t).count(), 6);
        }
    }

    #[test]
    fn orientation_preserved() {
        let s = make_junction_screen(3, 1.0, 0.5).unwrap();
        let m = s.panel_mesh(1).unwrap();
        let f = barycentric_refine(&m).unwrap();
        let r = f.refinement().unwrap();
        for t in 0..f.num_triangles() {
            let d = vec3::dot(f.normal(t), m.normal(r.parent[t]));
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_triangle_dual_cells_equal() {
        let (f, cells) = dual_cells(&single()).unwrap();
        let areas: Vec<f64> = cells.iter().map(|c| c.iter().map(|&t| f.area(t)).sum()).collect();
        for a in &areas {
            assert!((a - areas[0]).abs() < 1e-15);
        }
        assert!((areas.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dual_cells_partition() {
        let s = make_junction_screen(3, 1.0, 0.25).unwrap();
        let m = s.panel_mesh(0).unwrap();
        let (f, cells) = dual_cells(&m).unwrap();
        let mut seen = vec![0; f.num_triangles()];
        for c in &cells {
            for &t in c {
                seen[t] += 1;
            }
        }
        assert!(seen.iter().all(|&k| k == 1));
        let val = m.valences();
        let bnd = m.boundary_vertex_mask();
        for v in 0..m.num_vertices() {
            if !bnd[v] {
                assert_eq!(cells[v].len(), 2 * val[v]);
            }
        }
        let total: f64 = cells.iter().flatten().map(|&t| f.area(t)).sum();
        assert!((total - m.total_area()).abs() <= 1e-12 * m.total_area());
    }

    #[test]
    fn nested_refinement_rejected() {
        let f = barycentric_refine(&single()).unwrap();
        assert!(barycentric_refine(&f).is_err());
    }
}
