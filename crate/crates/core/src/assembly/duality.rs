//! Sparse Gram matrix of the duality pairing between a dual and a primal space.

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::geometry::{tri_key, NodeKey, TriKey};
use crate::spaces::FunctionSpace;

/// Real sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl GramMatrix {
    /// Builds from unsorted triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        GramMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `M x`.
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.ncols, "Gram apply dimension");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }

    /// `Mᵀ x`.
    pub fn apply_transpose(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.nrows, "Gram transpose apply dimension");
        let mut y = vec![c64::new(0.0, 0.0); self.ncols];
        for (i, xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += xi * v;
            }
        }
        y
    }

    pub fn transpose(&self) -> GramMatrix {
        let t = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)))
            .collect();
        GramMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut a = Mat::<c64>::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                a[(i, j)] = c64::new(v, 0.0);
            }
        }
        a
    }
}

/// Primal barycentric coordinate of primal vertex `v` at a refined node.
fn primal_bary(node: NodeKey, v: u32) -> f64 {
    match node {
        NodeKey::Vertex(a) => (a == v) as u8 as f64,
        NodeKey::Midpoint(a, b) => 0.5 * ((a == v) as u8 + (b == v) as u8) as f64,
        NodeKey::Centroid(a, b, c) => ((a == v) as u8 + (b == v) as u8 + (c == v) as u8) as f64 / 3.0,
    }
}

/// `M[i, j] = ∫ ψ_i φ_j` for `ψ_i` in `test` (a dual space on the barycentric
/// refinement) and `φ_j` in `trial` (the primal space of the same panels).
///
/// Both spaces must have one block per panel in the same order; the result is
/// block-diagonal. Products of linear functions on every refined triangle are
/// integrated exactly with the edge-midpoint rule.
pub fn assemble_duality(test: &FunctionSpace, trial: &FunctionSpace) -> Result<GramMatrix> {
    if test.dim() != trial.dim() {
        return Err(Error::DimensionMismatch {
            what: "duality pairing",
            left: test.dim(),
            right: trial.dim(),
        });
    }
    if !test.kind().is_dual() || trial.kind().is_dual() {
        return Err(Error::UnsupportedSpace("duality pairing expects a dual test space and a primal trial space".into()));
    }
    let (tb, rb) = (test.blocks(), trial.blocks());
    if tb.len() != rb.len() || tb.iter().zip(rb).any(|(a, b)| a.panel != b.panel || a.dofs.len() != b.dofs.len()) {
        return Err(Error::DimensionMismatch {
            what: "duality pairing blocks",
            left: tb.len(),
            right: rb.len(),
        });
    }
    let fine = test.carrier();
    let coarse = trial.carrier();
    let fine_elems = test.element_dofs();
    let coarse_elems = trial.element_dofs();
    let mut triplets = Vec::new();
    for (bt, br) in tb.iter().zip(rb) {
        let index: HashMap<TriKey, usize> = br
            .triangles
            .clone()
            .map(|t| (tri_key(coarse.triangle_keys(t)), t))
            .collect();
        for f in bt.triangles.clone() {
            if fine_elems[f].is_empty() {
                continue;
            }
            let fk = fine.triangle_keys(f);
            let parent = fk
                .iter()
                .find_map(|k| match *k {
                    NodeKey::Centroid(a, b, c) => Some(tri_key([NodeKey::Vertex(a), NodeKey::Vertex(b), NodeKey::Vertex(c)])),
                    _ => None,
                })
                .ok_or_else(|| Error::UnsupportedSpace("dual carrier is not a barycentric refinement".into()))?;
            let Some(&t) = index.get(&parent) else {
                return Err(Error::UnsupportedSpace("dual and primal spaces live on different meshes".into()));
            };
            if coarse_elems[t].is_empty() {
                continue;
            }
            let ck = coarse.triangle_keys(t);
            // Primal shape values at the three refined vertices.
            let at_fine = |c: &[f64; 3]| -> [f64; 3] {
                std::array::from_fn(|j| {
                    (0..3)
                        .map(|k| primal_bary(fk[j], ck[k].primal_id().expect("primal key")) * c[k])
                        .sum()
                })
            };
            let w = fine.area(f) / 3.0;
            let mid = |v: &[f64; 3]| [0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2]), 0.5 * (v[2] + v[0])];
            for (i, d) in &fine_elems[f] {
                let dm = mid(d);
                for (j, c) in &coarse_elems[t] {
                    let pm = mid(&at_fine(c));
                    let v = w * (dm[0] * pm[0] + dm[1] * pm[1] + dm[2] * pm[2]);
                    if v != 0.0 {
                        triplets.push((*i, *j, v));
                    }
                }
            }
        }
    }
    Ok(GramMatrix::from_triplets(test.dim(), trial.dim(), triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_junction_screen;
    use crate::spaces::{multitrace_space, Problem, Reduction, Side};

    #[test]
    fn triplets_merge_and_transpose() {
        let m = GramMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        let x = [c64::new(1.0, 0.0), c64::new(0.0, 1.0)];
        assert_eq!(m.apply_transpose(&x), m.transpose().apply(&x));
    }

    #[test]
    fn neumann_gram_rows_integrate_hats_over_cells() {
        // Dual-constant indicators sum to the union of dual cells; pairing a hat
        // with all of them gives the integral of the hat over that union.
        let s = make_junction_screen(3, 1.0, 0.25).unwrap();
        let p = multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Full).unwrap();
        let d = multitrace_space(&s, Problem::Neumann, Side::Dual, Reduction::Full).unwrap();
        let g = assemble_duality(&d, &p).unwrap();
        assert_eq!(g.nrows(), p.dim());
        for (i, m) in d.meta().iter().enumerate() {
            let j = p.meta().iter().position(|x| x.anchor == m.anchor && x.panel == m.panel).unwrap();
            assert!(g.get(i, j) > 0.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = make_junction_screen(3, 1.0, 0.25).unwrap();
        let p = multitrace_space(&s, Problem::Neumann, Side::Primal, Reduction::Full).unwrap();
        let d = multitrace_space(&s, Problem::Dirichlet, Side::Dual, Reduction::Full).unwrap();
        assert!(matches!(assemble_duality(&d, &p), Err(Error::DimensionMismatch { .. })));
    }
}
