//! Raster (portable graymap) and SVG figure output.
//!
//! 2-D cell sets render directly. 1-D relations render as rasters over the
//! product of the space with itself (source on the horizontal axis, target
//! upward). 2-D relations render only as the row image of a chosen source
//! cell; their four-dimensional graphs cannot be drawn.

use std::path::Path;

use anyhow::{bail, Result};

use multiflow::{CellSet, FiniteRelation, GridSpace};

use crate::report::write_atomic;

fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Cell set as a graymap: members black. 1-D sets render one pixel tall;
/// 2-D sets put row 0 at the top (largest y).
pub fn cellset_pgm(path: &Path, set: &CellSet) -> Result<()> {
    let space = set.space();
    match space.dimension() {
        1 => {
            let n = space.ncells();
            let mut pixels = vec![255u8; n];
            for c in set.iter() {
                pixels[c] = 0;
            }
            write_atomic(path, &pgm_bytes(n, 1, &pixels))
        }
        2 => {
            let (nx, ny) = (space.resolution()[0], space.resolution()[1]);
            let mut pixels = vec![255u8; nx * ny];
            for c in set.iter() {
                let idx = space.multi_index(c);
                pixels[(ny - 1 - idx[1]) * nx + idx[0]] = 0;
            }
            write_atomic(path, &pgm_bytes(nx, ny, &pixels))
        }
        d => bail!("raster output of cell sets supports 1-D and 2-D spaces, not {d}-D"),
    }
}

/// 1-D relation as a graymap over source x target.
pub fn relation_1d_pgm(path: &Path, f: &FiniteRelation) -> Result<()> {
    let space = f.space();
    if space.dimension() != 1 {
        bail!("relation rasters are drawn for 1-D spaces only");
    }
    let n = space.ncells();
    let mut pixels = vec![255u8; n * n];
    for (s, t) in f.pairs() {
        pixels[(n - 1 - t) * n + s] = 0;
    }
    write_atomic(path, &pgm_bytes(n, n, &pixels))
}

fn svg_header(space: &GridSpace, flip_y: bool) -> (String, f64, f64, f64, f64) {
    let b = space.bounds();
    let (x0, x1) = b[0];
    let (y0, y1) = if space.dimension() > 1 { b[1] } else { b[0] };
    let w = x1 - x0;
    let h = y1 - y0;
    let transform = if flip_y {
        format!("translate(0,{}) scale(1,-1)", y1 + y0)
    } else {
        String::new()
    };
    let head = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0} {y0} {w} {h}\" width=\"640\" height=\"640\">\n\
         <rect x=\"{x0}\" y=\"{y0}\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <g fill=\"#1f3d7a\" transform=\"{transform}\">\n"
    );
    (head, x0, y0, w, h)
}

/// 2-D cell set as an SVG, merging runs of cells along each row.
pub fn cellset_svg(path: &Path, set: &CellSet) -> Result<()> {
    let space = set.space();
    if space.dimension() != 2 {
        bail!("vector output of cell sets needs a 2-D space");
    }
    let (head, ..) = svg_header(space, true);
    let mut out = head;
    let (nx, ny) = (space.resolution()[0], space.resolution()[1]);
    let wx = space.cell_width(0);
    let wy = space.cell_width(1);
    let b = space.bounds();
    for j in 0..ny {
        let mut i = 0;
        while i < nx {
            if set.contains(j * nx + i) {
                let run_start = i;
                while i < nx && set.contains(j * nx + i) {
                    i += 1;
                }
                let x = b[0].0 + run_start as f64 * wx;
                let y = b[1].0 + j as f64 * wy;
                out.push_str(&format!(
                    "<rect x=\"{x:.6}\" y=\"{y:.6}\" width=\"{:.6}\" height=\"{wy:.6}\"/>\n",
                    (i - run_start) as f64 * wx
                ));
            } else {
                i += 1;
            }
        }
    }
    out.push_str("</g>\n</svg>\n");
    write_atomic(path, out.as_bytes())
}

/// 1-D relation as an SVG over source x target coordinates.
pub fn relation_1d_svg(path: &Path, f: &FiniteRelation) -> Result<()> {
    let space = f.space();
    if space.dimension() != 1 {
        bail!("relation vector plots are drawn for 1-D spaces only");
    }
    let b = space.bounds()[0];
    let w = space.cell_width(0);
    let span = b.1 - b.0;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {span} {span}\" width=\"640\" height=\"640\">\n\
         <rect x=\"{}\" y=\"{}\" width=\"{span}\" height=\"{span}\" fill=\"white\"/>\n\
         <g fill=\"#1f3d7a\" transform=\"translate(0,{}) scale(1,-1)\">\n",
        b.0,
        b.0,
        b.0,
        b.0,
        b.1 + b.0,
    );
    // Merge runs of targets within each source column.
    let n = space.ncells();
    for s in 0..n {
        let mut targets = f.row_targets(s).peekable();
        while let Some(t0) = targets.next() {
            let mut t1 = t0;
            while matches!(targets.peek(), Some(&t) if t == t1 + 1) {
                t1 = targets.next().unwrap();
            }
            let x = b.0 + s as f64 * w;
            let y = b.0 + t0 as f64 * w;
            out.push_str(&format!(
                "<rect x=\"{x:.6}\" y=\"{y:.6}\" width=\"{w:.6}\" height=\"{:.6}\"/>\n",
                (t1 - t0 + 1) as f64 * w
            ));
        }
    }
    out.push_str("</g>\n</svg>\n");
    write_atomic(path, out.as_bytes())
}
