//! Geometric regions and their cell covers.
//!
//! Regions give named cell sets to experiments: axis-aligned box unions,
//! metric balls, axis-aligned ellipses, and the logarithmic-spiral heart
//! region used by the contraction examples. Membership is decided per cell
//! either by box intersection or by the cell center.

use std::sync::Arc;

use crate::cellset::CellSet;
use crate::geom::AxisBox;
use crate::grid::GridSpace;

/// How a region is turned into cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverMode {
    /// Cells whose closed box intersects the region.
    #[default]
    Intersect,
    /// Cells whose center lies in the region.
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Union of closed axis-aligned boxes.
    Boxes(Vec<AxisBox>),
    /// Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned quadratic region `sum_k coeffs[k] (x_k - center_k)^2 <= rhs`.
    Ellipse { coeffs: Vec<f64>, rhs: f64, center: Vec<f64> },
    /// Spiral-bounded heart `r <= exp(-|angle|) + margin` in the plane,
    /// with `angle` measured in `[-pi, pi]` from the positive x-axis.
    Heart { margin: f64 },
}

impl Region {
    /// Exact signed test where possible; the heart boundary is sampled on a
    /// fine sub-grid of the cell box, which is adequate for set definition
    /// (soundness-critical covers go through the evaluator path instead).
    pub fn cells(&self, space: &Arc<GridSpace>, mode: CoverMode) -> CellSet {
        match self {
            Region::Boxes(boxes) => {
                let mut out = CellSet::empty(space);
                for b in boxes {
                    match mode {
                        CoverMode::Intersect => {
                            if let Some(range) = space.cover_closed(b) {
                                out.insert_range(&range);
                            }
                        }
                        CoverMode::Center => {
                            for c in 0..space.ncells() {
                                let p = space.center_of(c);
                                if p.iter().enumerate().all(|(k, &x)| b.lo[k] <= x && x <= b.hi[k]) {
                                    out.insert(c);
                                }
                            }
                        }
                    }
                }
                out
            }
            Region::Ball { center, radius } => CellSet::from_fn(space, |c| match mode {
                CoverMode::Intersect => {
                    quad_min_over_box(&space.box_of(c), center, None) <= radius * radius
                }
                CoverMode::Center => {
                    let p = space.center_of(c);
                    p.iter().zip(center).map(|(x, m)| (x - m) * (x - m)).sum::<f64>()
                        <= radius * radius
                }
            }),
            Region::Ellipse { coeffs, rhs, center } => CellSet::from_fn(space, |c| match mode {
                CoverMode::Intersect => {
                    quad_min_over_box(&space.box_of(c), center, Some(coeffs)) <= *rhs
                }
                CoverMode::Center => {
                    let p = space.center_of(c);
                    p.iter()
                        .zip(center)
                        .zip(coeffs)
                        .map(|((x, m), a)| a * (x - m) * (x - m))
                        .sum::<f64>()
                        <= *rhs
                }
            }),
            Region::Heart { margin } => CellSet::from_fn(space, |c| {
                let inside = |x: f64, y: f64| {
                    let r = x.hypot(y);
                    let phi = y.atan2(x).abs();
                    r <= (-phi).exp() + margin
                };
                match mode {
                    CoverMode::Center => {
                        let p = space.center_of(c);
                        inside(p[0], p[1])
                    }
                    CoverMode::Intersect => {
                        let b = space.box_of(c);
                        const K: usize = 6;
                        (0..=K).any(|i| {
                            (0..=K).any(|j| {
                                let x = b.lo[0] + (b.hi[0] - b.lo[0]) * i as f64 / K as f64;
                                let y = b.lo[1] + (b.hi[1] - b.lo[1]) * j as f64 / K as f64;
                                inside(x, y)
                            })
                        })
                    }
                }
            }),
        }
    }
}

/// Exact minimum of `sum_k a_k (x_k - m_k)^2` over a box (per-axis clamp;
/// coefficients default to 1).
fn quad_min_over_box(b: &AxisBox, center: &[f64], coeffs: Option<&[f64]>) -> f64 {
    let mut acc = 0.0;
    for k in 0..b.dim() {
        let m = center.get(k).copied().unwrap_or(0.0);
        let x = m.clamp(b.lo[k], b.hi[k]);
        let a = coeffs.map(|c| c[k]).unwrap_or(1.0);
        acc += a * (x - m) * (x - m);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_region_covers_expected_cells() {
        let g = GridSpace::line(0.0, 3.0, 300).unwrap();
        let r = Region::Boxes(vec![AxisBox::from_intervals(&[(1.0, 2.0)])]);
        let cells = r.cells(&g, CoverMode::Intersect);
        // Closed cover picks up the boundary-touching cells 99 and 200 too.
        assert!(cells.contains(100) && cells.contains(199));
        assert!(cells.contains(99) && cells.contains(200));
        assert!(!cells.contains(98) && !cells.contains(201));
    }

    #[test]
    fn ellipse_region_is_symmetric() {
        let g = GridSpace::plane((-5.0, 5.0), (-5.0, 5.0), 128, 128).unwrap();
        let r = Region::Ellipse { coeffs: vec![4.0, 1.0], rhs: 16.0, center: vec![0.0, 0.0] };
        let cells = r.cells(&g, CoverMode::Center);
        // Point reflection is an exact symmetry of grid and region.
        let n = g.resolution()[0];
        for c in cells.iter() {
            let idx = g.multi_index(c);
            let mirrored = g.linear_index(&[n - 1 - idx[0], n - 1 - idx[1]]);
            assert!(cells.contains(mirrored));
        }
        assert!(cells.contains(g.cell_of(&[0.0, 3.9]).unwrap()));
        assert!(!cells.contains(g.cell_of(&[3.0, 0.0]).unwrap()));
    }

    #[test]
    fn heart_region_contains_origin_and_tip() {
        let g = GridSpace::plane((-1.6, 1.6), (-1.6, 1.6), 64, 64).unwrap();
        let r = Region::Heart { margin: 0.0 };
        let cells = r.cells(&g, CoverMode::Intersect);
        assert!(cells.contains(g.cell_of(&[0.0, 0.0]).unwrap()));
        assert!(cells.contains(g.cell_of(&[0.95, 0.0]).unwrap()));
        assert!(!cells.contains(g.cell_of(&[0.0, 1.2]).unwrap()));
    }
}
