use std::path::Path;

use anyhow::Context;
use log::info;
use msbem::geometry::io::write_screen;

use crate::args::Geometry;

pub fn run(geometry: Geometry, h: f64, out: &Path) -> anyhow::Result<()> {
    let screen = geometry.build(h)?;
    write_screen(&screen, out).with_context(|| format!("writing mesh to {}", out.display()))?;
    let (hmax, hmin) = screen.edge_length_range();
    info!(
        "{geometry}: {} sheets, {} panels, {} triangles, edge lengths {hmin:.4}..{hmax:.4}, written to {}",
        screen.num_sheets(),
        screen.num_panels(),
        screen.total_triangles(),
        out.display()
    );
    Ok(())
}
