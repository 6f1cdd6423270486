//! ASCII OFF meshes and a plain-text manifest for multi-screens.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! back an exported screen reproduces it bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::mesh::{NodeKey, TriMesh, VertexTags};
use crate::geometry::screen::{CoveringKind, MultiScreen, Panel, PanelPart, ScreenKind};

pub const MANIFEST_NAME: &str = "manifest.txt";
const MANIFEST_HEADER: &str = "# msbem screen manifest v1";

pub fn off_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(48 * mesh.num_vertices());
    s.push_str("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_triangles());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

/// Parses an OFF mesh. Comment lines starting with `#` are ignored.
pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("OFF") {
        return Err(Error::Parse("missing OFF header".into()));
    }
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of OFF data reading {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
    };
    let nv = next_usize("vertex count")?;
    let nf = next_usize("face count")?;
    let _ne = next_usize("edge count")?;
    drop(next_usize);
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut p = [0.0; 3];
        for c in p.iter_mut() {
            *c = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("vertex {i} truncated")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("vertex {i}: {e}")))?;
        }
        vertices.push(p);
    }
    let mut triangles = Vec::with_capacity(nf);
    for f in 0..nf {
        let mut vals = [0usize; 4];
        for v in vals.iter_mut() {
            *v = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("face {f} truncated")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("face {f}: {e}")))?;
        }
        if vals[0] != 3 {
            return Err(Error::Parse(format!("face {f} is not a triangle")));
        }
        triangles.push([vals[1], vals[2], vals[3]]);
    }
    TriMesh::new(vertices, triangles)
}

pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<()> {
    fs::write(path, off_string(mesh))?;
    Ok(())
}

pub fn read_off(path: &Path) -> Result<TriMesh> {
    parse_off(&fs::read_to_string(path)?)
}

fn sheet_file(i: usize) -> String {
    format!("sheet_{i}.off")
}

pub fn manifest_string(screen: &MultiScreen) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MANIFEST_HEADER}");
    let _ = writeln!(s, "kind {}", screen.label());
    let _ = writeln!(s, "covering_kind {}", screen.covering_kind().as_str());
    let _ = writeln!(s, "side_length {}", screen.side_length());
    let _ = writeln!(s, "h {}", screen.h());
    let _ = writeln!(s, "points {}", screen.points().len());
    for (i, sheet) in screen.sheets().iter().enumerate() {
        let _ = write!(s, "sheet {i} {} ids", sheet_file(i));
        for k in sheet.keys() {
            let _ = write!(s, " {}", k.primal_id().expect("sheet keys are primal"));
        }
        s.push('\n');
    }
    for (l, p) in screen.panels().iter().enumerate() {
        let _ = write!(s, "panel {l}");
        for part in &p.parts {
            let _ = write!(s, " {}{}", part.sheet, if part.sign > 0 { '+' } else { '-' });
        }
        s.push('\n');
    }
    for chain in screen.junctions() {
        s.push_str("junction");
        for g in chain {
            let _ = write!(s, " {g}");
        }
        s.push('\n');
    }
    for o in screen.overlaps() {
        let _ = write!(s, "overlap sheet {} panels", o.sheet);
        for l in &o.panels {
            let _ = write!(s, " {l}");
        }
        s.push('\n');
    }
    for (g, t) in screen.vertex_tags().iter().enumerate() {
        if t.bits() != 0 {
            let _ = writeln!(s, "tag {g} {}", t.bits());
        }
    }
    s
}

/// Writes one OFF file per sheet plus `manifest.txt` into `dir` (created if needed).
pub fn write_screen(screen: &MultiScreen, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, sheet) in screen.sheets().iter().enumerate() {
        write_off(sheet, &dir.join(sheet_file(i)))?;
    }
    fs::write(dir.join(MANIFEST_NAME), manifest_string(screen))?;
    Ok(())
}

fn parse_kind(s: &str) -> Result<ScreenKind> {
    match s {
        "trijunction" => Ok(ScreenKind::Junction { num_sheets: 3 }),
        "typeb" => Ok(ScreenKind::TypeB),
        _ => s
            .strip_prefix("mjunction:")
            .and_then(|m| m.parse().ok())
            .map(|num_sheets| ScreenKind::Junction { num_sheets })
            .ok_or_else(|| Error::Parse(format!("unknown screen kind '{s}'"))),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("manifest: missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("manifest: bad {what}")))
}

/// Reads a screen written by [`write_screen`].
pub fn read_screen(dir: &Path) -> Result<MultiScreen> {
    let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(Error::Parse("manifest: missing header".into()));
    }
    let mut kind = None;
    let mut covering = None;
    let mut side_length = None;
    let mut h = None;
    let mut npoints = None;
    let mut sheets: Vec<(String, Vec<u32>)> = Vec::new();
    let mut panels = Vec::new();
    let mut junctions = Vec::new();
    let mut tag_lines = Vec::new();
    for line in lines {
        let mut tok = line.split_whitespace();
        match tok.next() {
            None => {}
            Some(c) if c.starts_with('#') => {}
            Some("kind") => kind = Some(parse_kind(tok.next().unwrap_or(""))?),
            Some("covering_kind") => {
                covering = Some(match tok.next() {
                    Some("exact") => CoveringKind::Exact,
                    Some("overlapping") => CoveringKind::Overlapping,
                    other => return Err(Error::Parse(format!("manifest: bad covering_kind {other:?}"))),
                })
            }
            Some("side_length") => side_length = Some(num::<f64>(tok.next(), "side_length")?),
            Some("h") => h = Some(num::<f64>(tok.next(), "h")?),
            Some("points") => npoints = Some(num::<usize>(tok.next(), "points")?),
            Some("sheet") => {
                let i: usize = num(tok.next(), "sheet index")?;
                if i != sheets.len() {
                    return Err(Error::Parse("manifest: sheets out of order".into()));
                }
                let file = tok.next().ok_or_else(|| Error::Parse("manifest: sheet file".into()))?;
                if tok.next() != Some("ids") {
                    return Err(Error::Parse("manifest: sheet ids".into()));
                }
                let ids = tok.map(|t| num(Some(t), "vertex id")).collect::<Result<Vec<u32>>>()?;
                sheets.push((file.to_string(), ids));
            }
            Some("panel") => {
                let _l: usize = num(tok.next(), "panel index")?;
                let parts = tok
                    .map(|t| {
                        let (idx, sign) = t.split_at(t.len().saturating_sub(1));
                        let sign = match sign {
                            "+" => 1,
                            "-" => -1,
                            _ => return Err(Error::Parse(format!("manifest: bad panel part '{t}'"))),
                        };
                        Ok(PanelPart {
                            sheet: num(Some(idx), "panel sheet")?,
                            sign,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                panels.push(Panel { parts });
            }
            Some("junction") => {
                junctions.push(tok.map(|t| num(Some(t), "junction vertex")).collect::<Result<Vec<u32>>>()?);
            }
            Some("overlap") => {}
            Some("tag") => {
                let g: usize = num(tok.next(), "tag vertex")?;
                let b: u8 = num(tok.next(), "tag bits")?;
                tag_lines.push((g, b));
            }
            Some(other) => return Err(Error::Parse(format!("manifest: unknown record '{other}'"))),
        }
    }
    let npoints = npoints.ok_or_else(|| Error::Parse("manifest: missing points".into()))?;
    let mut tags = vec![VertexTags::default(); npoints];
    for (g, b) in tag_lines {
        *tags
            .get_mut(g)
            .ok_or_else(|| Error::Parse(format!("manifest: tag vertex {g} out of range")))? = VertexTags::from_bits(b);
    }
    let mut points = vec![None; npoints];
    let mut meshes = Vec::with_capacity(sheets.len());
    for (i, (file, ids)) in sheets.into_iter().enumerate() {
        let raw = read_off(&dir.join(&file))?;
        if ids.len() != raw.num_vertices() {
            return Err(Error::Parse(format!("manifest: sheet {i} id count does not match {file}")));
        }
        for (v, &g) in ids.iter().enumerate() {
            let slot = points
                .get_mut(g as usize)
                .ok_or_else(|| Error::Parse(format!("manifest: vertex id {g} out of range")))?;
            slot.get_or_insert(raw.vertices()[v]);
        }
        let keys = ids.iter().map(|&g| NodeKey::Vertex(g)).collect();
        let t = ids.iter().map(|&g| tags[g as usize]).collect();
        let nt = raw.num_triangles();
        meshes.push(
            TriMesh::from_parts(raw.vertices().to_vec(), raw.triangles().to_vec(), keys, vec![i; nt])?.with_tags(t),
        );
    }
    let points = points
        .into_iter()
        .enumerate()
        .map(|(g, p)| p.ok_or_else(|| Error::Parse(format!("manifest: vertex {g} belongs to no sheet"))))
        .collect::<Result<Vec<_>>>()?;
    MultiScreen::from_parts(
        kind.ok_or_else(|| Error::Parse("manifest: missing kind".into()))?,
        covering.ok_or_else(|| Error::Parse("manifest: missing covering_kind".into()))?,
        side_length.ok_or_else(|| Error::Parse("manifest: missing side_length".into()))?,
        h.ok_or_else(|| Error::Parse("manifest: missing h".into()))?,
        points,
        tags,
        meshes,
        junctions,
        panels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_junction_screen, make_typeb_screen};

    #[test]
    fn off_round_trip() {
        let s = make_junction_screen(3, 1.0, 0.3).unwrap();
        let m = s.sheet(1);
        let back = parse_off(&off_string(m)).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
    }

    #[test]
    fn screen_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for s in [make_junction_screen(3, 1.0, 0.3).unwrap(), make_typeb_screen(0.25).unwrap()] {
            write_screen(&s, dir.path()).unwrap();
            assert_eq!(read_screen(dir.path()).unwrap(), s);
        }
    }

    #[test]
    fn malformed_off() {
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n").is_err());
        assert!(parse_off("PLY\n").is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 2\n").is_err());
    }
}
