use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::mesh::{NodeKey, TriMesh, VertexTags};
use crate::vec3::{self, Vec3};

/// Whether the panels cover the inflated screen exactly once or with overlaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoveringKind {
    /// Type A screens: every sheet face belongs to exactly one panel.
    Exact,
    /// Type B screens: some faces are covered by more than one panel.
    Overlapping,
}

impl CoveringKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoveringKind::Exact => "exact",
            CoveringKind::Overlapping => "overlapping",
        }
    }
}

/// Which generator produced a screen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScreenKind {
    Junction { num_sheets: usize },
    TypeB,
}

/// A sheet used by a panel, with the orientation of that panel's copy.
///
/// `sign = +1` keeps the sheet normal, `-1` flips it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanelPart {
    pub sheet: usize,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Panel {
    pub parts: Vec<PanelPart>,
}

impl Panel {
    pub fn contains_sheet(&self, sheet: usize) -> bool {
        self.parts.iter().any(|p| p.sheet == sheet)
    }

    pub fn sign_of(&self, sheet: usize) -> Option<i8> {
        self.parts.iter().find(|p| p.sheet == sheet).map(|p| p.sign)
    }
}

/// A sheet lying in more than two panels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub sheet: usize,
    pub panels: Vec<usize>,
}

/// Flat sheets joined along junction lines, with a panel covering of the
/// inflated screen.
///
/// Vertices are numbered globally; every sheet mesh carries the global number
/// of each of its vertices as [`NodeKey::Vertex`], so shared junction vertices
/// are the same node in every sheet.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiScreen {
    pub(crate) kind: ScreenKind,
    pub(crate) covering: CoveringKind,
    pub(crate) side_length: f64,
    pub(crate) h: f64,
    pub(crate) points: Vec<Vec3>,
    pub(crate) tags: Vec<VertexTags>,
    pub(crate) sheets: Vec<TriMesh>,
    pub(crate) junctions: Vec<Vec<u32>>,
    pub(crate) panels: Vec<Panel>,
    pub(crate) overlaps: Vec<Overlap>,
}

/// Orientation-preserving split of the grid cell with corners `a,b,c,d`
/// (counter-clockwise in sheet coordinates) along the `a`–`c` diagonal.
fn push_cell(tris: &mut Vec<[usize; 3]>, a: usize, b: usize, c: usize, d: usize) {
    tris.push([a, b, c]);
    tris.push([a, c, d]);
}

fn grid_count(extent: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGeometry(format!("mesh width must be positive, got {h}")));
    }
    let n = (extent / h - 1e-12).ceil().max(1.0);
    if n > 4096.0 {
        return Err(Error::InvalidGeometry(format!("mesh width {h} too small")));
    }
    Ok(n as usize)
}

/// Screen of `num_sheets` square sheets of side `side_length` sharing the
/// junction segment from the origin to `(side_length, 0, 0)`, spread at equal
/// dihedral angles.
///
/// Sheet `i` lies in the half-plane spanned by the x axis and
/// `(0, cos θ_i, sin θ_i)` with `θ_i = 2πi/m`; its normal is
/// `(0, -sin θ_i, cos θ_i)`. Panel `l` bounds the wedge between sheets `l`
/// and `l+1` and uses outward normals, so it contains sheet `l` flipped and
/// sheet `l+1` as is.
pub fn make_junction_screen(num_sheets: usize, side_length: f64, h: f64) -> Result<MultiScreen> {
    if num_sheets < 3 {
        return Err(Error::InvalidGeometry(format!(
            "a junction needs at least 3 sheets, got {num_sheets}"
        )));
    }
    if !(side_length > 0.0) || !side_length.is_finite() {
        return Err(Error::InvalidGeometry(format!("side length must be positive, got {side_length}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGeometry(format!("mesh width must be positive, got {h}")));
    }
    if h > side_length {
        return Err(Error::InvalidGeometry(format!("mesh width {h} exceeds side length {side_length}")));
    }
    let n = grid_count(side_length, h)?;
    let m = num_sheets;
    let step = side_length / n as f64;

    let mut points: Vec<Vec3> = (0..=n).map(|j| [j as f64 * step, 0.0, 0.0]).collect();
    let mut jt = VertexTags::JUNCTION;
    jt.insert(VertexTags::SHEET_BOUNDARY);
    let mut tags = vec![jt; n + 1];
    tags[0].insert(VertexTags::IRREGULAR);
    tags[n].insert(VertexTags::IRREGULAR);

    let mut sheets = Vec::with_capacity(m);
    for i in 0..m {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
        let (s, c) = theta.sin_cos();
        // Global id of grid node (j, k); k = 0 is the junction.
        let mut gid = vec![0u32; (n + 1) * (n + 1)];
        for k in 0..=n {
            for j in 0..=n {
                let id = if k == 0 {
                    j
                } else {
                    let r = k as f64 * step;
                    points.push([j as f64 * step, r * c, r * s]);
                    let mut t = VertexTags::default();
                    if j == 0 || j == n || k == n {
                        t.insert(VertexTags::SHEET_BOUNDARY);
                    }
                    tags.push(t);
                    points.len() - 1
                };
                gid[k * (n + 1) + j] = id as u32;
            }
        }
        let mut tris = Vec::with_capacity(2 * n * n);
        let loc = |j: usize, k: usize| k * (n + 1) + j;
        for k in 0..n {
            for j in 0..n {
                push_cell(&mut tris, loc(j, k), loc(j + 1, k), loc(j + 1, k + 1), loc(j, k + 1));
            }
        }
        sheets.push(sheet_mesh(&points, &tags, &gid, tris, i)?);
    }

    let panels = (0..m)
        .map(|l| Panel {
            parts: vec![
                PanelPart { sheet: l, sign: -1 },
                PanelPart {
                    sheet: (l + 1) % m,
                    sign: 1,
                },
            ],
        })
        .collect();

    let screen = MultiScreen {
        kind: ScreenKind::Junction { num_sheets: m },
        covering: CoveringKind::Exact,
        side_length,
        h,
        points,
        tags,
        sheets,
        junctions: vec![(0..=n as u32).collect()],
        panels,
        overlaps: Vec::new(),
    };
    screen.validate()?;
    Ok(screen)
}

/// Horizontal square `[-1/2, 1/2]² × {0}` with a vertical half-sheet
/// `{0} × [-1/2, 0] × [0, 1/2]` standing on the junction segment from
/// `(0,0,0)` to `(0,-1/2,0)`. The junction ends at the centre of the square,
/// which is therefore an irregular point interior to a sheet.
///
/// Sheets: 0 = square part with x < 0, 1 = x > 0 and y < 0, 2 = x > 0 and
/// y > 0 (all with normal +z), 3 = the vertical sheet (normal +x).
/// Panels: 0 = lower face of the square; 1 = upper faces of sheets 0 and 2
/// plus the x < 0 face of the vertical sheet; 2 = upper faces of sheets 1 and 2
/// plus its x > 0 face. Sheet 2 is therefore covered three times.
pub fn make_typeb_screen(h: f64) -> Result<MultiScreen> {
    let mut n = grid_count(1.0, h)?;
    if n % 2 == 1 {
        n += 1;
    }
    let half = n / 2;
    let step = 1.0 / n as f64;
    let coord = |j: usize| j as f64 * step - 0.5;

    // Square grid (j, k) along (x, y); junction lies on j = half, k <= half.
    let mut points = Vec::with_capacity((n + 1) * (n + 1) + half * (half + 1));
    let mut tags = Vec::with_capacity(points.capacity());
    let hid = |j: usize, k: usize| k * (n + 1) + j;
    for k in 0..=n {
        for j in 0..=n {
            points.push([coord(j), coord(k), 0.0]);
            let mut t = VertexTags::default();
            if j == 0 || j == n || k == 0 || k == n {
                t.insert(VertexTags::SHEET_BOUNDARY);
            }
            if j == half && k <= half {
                t.insert(VertexTags::JUNCTION);
            }
            if j == half && k == half {
                t.insert(VertexTags::IRREGULAR);
            }
            tags.push(t);
        }
    }
    tags[hid(half, 0)].insert(VertexTags::IRREGULAR);

    // Vertical grid (k, q) along (y, z), k in 0..=half, q in 0..=half; q = 0 on the junction.
    let mut vid = vec![0u32; (half + 1) * (half + 1)];
    for q in 0..=half {
        for k in 0..=half {
            let id = if q == 0 {
                hid(half, k)
            } else {
                points.push([0.0, coord(k), q as f64 * step]);
                tags.push(VertexTags::SHEET_BOUNDARY);
                points.len() - 1
            };
            vid[q * (half + 1) + k] = id as u32;
        }
    }
    // Interior vertical vertices are not on the sheet boundary.
    for q in 1..half {
        for k in 1..half {
            tags[vid[q * (half + 1) + k] as usize] = VertexTags::default();
        }
    }

    let square_part = |j0: usize, j1: usize, k0: usize, k1: usize, sheet: usize| -> Result<TriMesh> {
        let w = j1 - j0 + 1;
        let mut gid = Vec::new();
        for k in k0..=k1 {
            for j in j0..=j1 {
                gid.push(hid(j, k) as u32);
            }
        }
        let loc = |j: usize, k: usize| (k - k0) * w + (j - j0);
        let mut tris = Vec::new();
        for k in k0..k1 {
            for j in j0..j1 {
                push_cell(&mut tris, loc(j, k), loc(j + 1, k), loc(j + 1, k + 1), loc(j, k + 1));
            }
        }
        sheet_mesh(&points, &tags, &gid, tris, sheet)
    };
    let s1 = square_part(0, half, 0, n, 0)?;
    let s2 = square_part(half, n, 0, half, 1)?;
    let s3 = square_part(half, n, half, n, 2)?;
    // Vertical sheet: (y, z) grid with normal e_y × e_z = +x.
    let mut vtris = Vec::new();
    let vloc = |k: usize, q: usize| q * (half + 1) + k;
    for q in 0..half {
        for k in 0..half {
            push_cell(&mut vtris, vloc(k, q), vloc(k + 1, q), vloc(k + 1, q + 1), vloc(k, q + 1));
        }
    }
    let v = sheet_mesh(&points, &tags, &vid, vtris, 3)?;

    let part = |sheet, sign| PanelPart { sheet, sign };
    let panels = vec![
        Panel {
            parts: vec![part(0, 1), part(1, 1), part(2, 1)],
        },
        Panel {
            parts: vec![part(0, -1), part(2, -1), part(3, 1)],
        },
        Panel {
            parts: vec![part(1, -1), part(2, -1), part(3, -1)],
        },
    ];
    // Junction ordered from the irregular interior point outwards.
    let junction = (0..=half).rev().map(|k| hid(half, k) as u32).collect();

    let mut screen = MultiScreen {
        kind: ScreenKind::TypeB,
        covering: CoveringKind::Overlapping,
        side_length: 1.0,
        h,
        points,
        tags,
        sheets: vec![s1, s2, s3, v],
        junctions: vec![junction],
        panels,
        overlaps: Vec::new(),
    };
    screen.overlaps = screen.compute_overlaps();
    screen.validate()?;
    Ok(screen)
}

fn sheet_mesh(
    points: &[Vec3],
    tags: &[VertexTags],
    gid: &[u32],
    tris: Vec<[usize; 3]>,
    sheet: usize,
) -> Result<TriMesh> {
    let vertices = gid.iter().map(|&g| points[g as usize]).collect();
    let keys = gid.iter().map(|&g| NodeKey::Vertex(g)).collect();
    let t = gid.iter().map(|&g| tags[g as usize]).collect();
    let nt = tris.len();
    Ok(TriMesh::from_parts(vertices, tris, keys, vec![sheet; nt])?.with_tags(t))
}

impl MultiScreen {
    /// Assemble a screen from parts, validating every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        kind: ScreenKind,
        covering: CoveringKind,
        side_length: f64,
        h: f64,
        points: Vec<Vec3>,
        tags: Vec<VertexTags>,
        sheets: Vec<TriMesh>,
        junctions: Vec<Vec<u32>>,
        panels: Vec<Panel>,
    ) -> Result<Self> {
        let mut s = MultiScreen {
            kind,
            covering,
            side_length,
            h,
            points,
            tags,
            sheets,
            junctions,
            panels,
            overlaps: Vec::new(),
        };
        s.overlaps = s.compute_overlaps();
        s.validate()?;
        Ok(s)
    }

    fn compute_overlaps(&self) -> Vec<Overlap> {
        (0..self.sheets.len())
            .filter_map(|s| {
                let panels: Vec<usize> = (0..self.panels.len())
                    .filter(|&l| self.panels[l].contains_sheet(s))
                    .collect();
                (panels.len() > 2).then_some(Overlap { sheet: s, panels })
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let np = self.points.len();
        if self.tags.len() != np {
            return Err(Error::InvalidGeometry("one tag per global vertex required".into()));
        }
        for (i, sheet) in self.sheets.iter().enumerate() {
            for (v, key) in sheet.keys().iter().enumerate() {
                let g = match key.primal_id() {
                    Some(g) if (g as usize) < np => g as usize,
                    _ => return Err(Error::InvalidGeometry(format!("sheet {i} has a vertex without a valid global id"))),
                };
                if sheet.vertices()[v].map(f64::to_bits) != self.points[g].map(f64::to_bits) {
                    return Err(Error::InvalidGeometry(format!(
                        "sheet {i} vertex {v} does not match global vertex {g} bit-exactly"
                    )));
                }
            }
        }
        for (c, chain) in self.junctions.iter().enumerate() {
            if chain.len() < 2 {
                return Err(Error::InvalidGeometry(format!("junction {c} has fewer than two vertices")));
            }
            let incident = self
                .sheets
                .iter()
                .filter(|s| chain.iter().all(|g| s.keys().contains(&NodeKey::Vertex(*g))))
                .count();
            if incident < 2 {
                return Err(Error::InvalidGeometry(format!("junction {c} is not shared by the sheets")));
            }
        }
        let ns = self.sheets.len();
        for (l, p) in self.panels.iter().enumerate() {
            if p.parts.is_empty() {
                return Err(Error::InvalidGeometry(format!("panel {l} is empty")));
            }
            if p.parts.iter().any(|q| q.sheet >= ns || (q.sign != 1 && q.sign != -1)) {
                return Err(Error::InvalidGeometry(format!("panel {l} has an invalid part")));
            }
        }
        for s in 0..ns {
            let signs: Vec<i8> = self.panels.iter().filter_map(|p| p.sign_of(s)).collect();
            let front = signs.iter().filter(|&&x| x == 1).count();
            let back = signs.len() - front;
            let ok = match self.covering {
                CoveringKind::Exact => front == 1 && back == 1,
                CoveringKind::Overlapping => front >= 1 && back >= 1,
            };
            if !ok {
                return Err(Error::InvalidGeometry(format!(
                    "sheet {s} has {front} front and {back} back panel copies, which does not cover both faces as required"
                )));
            }
        }
        for l in 0..self.panels.len() {
            self.panel_mesh(l)?;
        }
        Ok(())
    }

    pub fn kind(&self) -> ScreenKind {
        self.kind
    }

    pub fn covering_kind(&self) -> CoveringKind {
        self.covering
    }

    pub fn is_type_a(&self) -> bool {
        self.covering == CoveringKind::Exact
    }

    /// Nominal target mesh width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn vertex_tags(&self) -> &[VertexTags] {
        &self.tags
    }

    pub fn num_sheets(&self) -> usize {
        self.sheets.len()
    }

    pub fn sheets(&self) -> &[TriMesh] {
        &self.sheets
    }

    pub fn sheet(&self, i: usize) -> &TriMesh {
        &self.sheets[i]
    }

    pub fn num_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn junctions(&self) -> &[Vec<u32>] {
        &self.junctions
    }

    pub fn overlaps(&self) -> &[Overlap] {
        &self.overlaps
    }

    /// Number of panels containing a sheet (2 for every sheet of a type A screen).
    pub fn coverage(&self, sheet: usize) -> usize {
        self.panels.iter().filter(|p| p.contains_sheet(sheet)).count()
    }

    /// Junction polylines as coordinate lists.
    pub fn junction_polylines(&self) -> Vec<Vec<Vec3>> {
        self.junctions
            .iter()
            .map(|c| c.iter().map(|&g| self.points[g as usize]).collect())
            .collect()
    }

    /// Euclidean distance from `p` to the nearest junction polyline.
    pub fn distance_to_junction(&self, p: Vec3) -> f64 {
        let mut d = f64::INFINITY;
        for line in self.junction_polylines() {
            for w in line.windows(2) {
                d = d.min(vec3::point_segment_distance(p, w[0], w[1]));
            }
        }
        d
    }

    /// Global vertex ids lying on some junction.
    pub fn is_junction_vertex(&self, g: u32) -> bool {
        self.tags[g as usize].contains(VertexTags::JUNCTION)
    }

    /// Oriented mesh of panel `l`: its sheets, flipped where the panel uses
    /// the back face, glued along shared vertices.
    pub fn panel_mesh(&self, l: usize) -> Result<TriMesh> {
        let panel = &self.panels[l];
        let mut local: HashMap<u32, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut keys = Vec::new();
        let mut tags = Vec::new();
        let mut triangles = Vec::new();
        let mut sheet_of = Vec::new();
        for part in &panel.parts {
            let sheet = &self.sheets[part.sheet];
            let ids: Vec<usize> = sheet
                .keys()
                .iter()
                .map(|k| {
                    let g = k.primal_id().expect("sheet keys are primal");
                    *local.entry(g).or_insert_with(|| {
                        vertices.push(self.points[g as usize]);
                        keys.push(*k);
                        tags.push(self.tags[g as usize]);
                        vertices.len() - 1
                    })
                })
                .collect();
            for &[a, b, c] in sheet.triangles() {
                let t = if part.sign > 0 {
                    [ids[a], ids[b], ids[c]]
                } else {
                    [ids[a], ids[c], ids[b]]
                };
                triangles.push(t);
                sheet_of.push(part.sheet);
            }
        }
        TriMesh::from_parts(vertices, triangles, keys, sheet_of)
            .map(|m| m.with_tags(tags))
            .map_err(|e| Error::InvalidGeometry(format!("panel {l}: {e}")))
    }

    pub fn panel_meshes(&self) -> Result<Vec<TriMesh>> {
        (0..self.num_panels()).map(|l| self.panel_mesh(l)).collect()
    }

    /// Centroid of the vertex cloud.
    pub fn centroid(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for p in &self.points {
            c = vec3::add(c, *p);
        }
        vec3::scale(c, 1.0 / self.points.len() as f64)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        vec3::dist(lo, hi)
    }

    /// Measured (max, min) edge length over all sheets.
    pub fn edge_length_range(&self) -> (f64, f64) {
        self.sheets.iter().fold((0.0, f64::INFINITY), |(hi, lo), s| {
            (hi.max(s.max_edge_length()), lo.min(s.min_edge_length()))
        })
    }

    pub fn total_triangles(&self) -> usize {
        self.sheets.iter().map(|s| s.num_triangles()).sum()
    }

    /// Short label such as `trijunction`, `mjunction:5` or `typeb`.
    pub fn label(&self) -> String {
        match self.kind {
            ScreenKind::Junction { num_sheets: 3 } => "trijunction".into(),
            ScreenKind::Junction { num_sheets } => format!("mjunction:{num_sheets}"),
            ScreenKind::TypeB => "typeb".into(),
        }
    }
}
