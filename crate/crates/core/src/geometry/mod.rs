//! Multi-screen geometries, structured triangle meshes and barycentric refinement.

pub mod io;
mod mesh;
mod refine;
mod screen;

pub use mesh::{tri_key, EdgeTopology, NodeKey, NodeProvenance, Refinement, TriKey, TriMesh, VertexTags};
pub use refine::{barycentric_refine, dual_cells};
pub use screen::{
    make_junction_screen, make_typeb_screen, CoveringKind, MultiScreen, Overlap, Panel, PanelPart, ScreenKind,
};
