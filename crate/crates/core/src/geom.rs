//! Axis-aligned boxes and exact box-to-box distances.
//!
//! All set geometry in this crate reduces to closed axis-aligned boxes, so
//! distances can be computed exactly from per-axis interval gaps instead of
//! sampled points. The product metric on pairs of boxes treats a pair
//! `(S, T)` as a single box in twice the dimension.

use crate::error::{Error, Result};

/// Metric used for box distances and relation fattening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    /// `sqrt(sum of squared per-axis gaps)` (the default product metric).
    #[default]
    Euclidean,
    /// Maximum per-axis gap. Fattening under it is separable per axis.
    Chebyshev,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Chebyshev => "chebyshev",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "chebyshev" => Ok(Metric::Chebyshev),
            other => Err(Error::Precondition(format!("unknown metric `{other}`"))),
        }
    }
}

/// A closed axis-aligned box `[lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}]`.
///
/// Degenerate boxes (`lo == hi` on some axis) are allowed; they arise as
/// single-point images of deterministic dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        debug_assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b));
        AxisBox { lo, hi }
    }

    pub fn point(p: &[f64]) -> Self {
        AxisBox { lo: p.to_vec(), hi: p.to_vec() }
    }

    pub fn from_intervals(iv: &[(f64, f64)]) -> Self {
        AxisBox {
            lo: iv.iter().map(|&(a, _)| a).collect(),
            hi: iv.iter().map(|&(_, b)| b).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Intersection with another box, `None` if the closed boxes are disjoint.
    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let a = self.lo[k].max(other.lo[k]);
            let b = self.hi[k].min(other.hi[k]);
            if a > b {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some(AxisBox { lo, hi })
    }

    /// Smallest box containing both operands.
    pub fn hull(&self, other: &AxisBox) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    /// Box dilated by `r >= 0` on every axis.
    pub fn dilate(&self, r: f64) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().map(|a| a - r).collect(),
            hi: self.hi.iter().map(|b| b + r).collect(),
        }
    }
}

/// Gap between the closed intervals `[a1, b1]` and `[a2, b2]` (0 if they meet).
#[inline]
pub fn interval_gap(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    (a2 - b1).max(a1 - b2).max(0.0)
}

/// Exact distance between two closed boxes under `metric`.
#[inline]
pub fn box_distance(metric: Metric, a: &AxisBox, b: &AxisBox) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    match metric {
        Metric::Euclidean => {
            let mut acc = 0.0;
            for k in 0..a.dim() {
                let g = interval_gap(a.lo[k], a.hi[k], b.lo[k], b.hi[k]);
                acc += g * g;
            }
            acc.sqrt()
        }
        Metric::Chebyshev => {
            let mut acc: f64 = 0.0;
            for k in 0..a.dim() {
                acc = acc.max(interval_gap(a.lo[k], a.hi[k], b.lo[k], b.hi[k]));
            }
            acc
        }
    }
}

/// Distance between pair-boxes `s1 x t1` and `s2 x t2` in the product metric
/// on `X x X`.
#[inline]
pub fn product_distance(
    metric: Metric,
    s1: &AxisBox,
    t1: &AxisBox,
    s2: &AxisBox,
    t2: &AxisBox,
) -> f64 {
    let ds = box_distance(metric, s1, s2);
    let dt = box_distance(metric, t1, t2);
    combine_product(metric, ds, dt)
}

/// Combine source- and target-side distances into a product-metric distance.
#[inline]
pub fn combine_product(metric: Metric, ds: f64, dt: f64) -> f64 {
    match metric {
        Metric::Euclidean => (ds * ds + dt * dt).sqrt(),
        Metric::Chebyshev => ds.max(dt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_of_overlapping_intervals_is_zero() {
        assert_eq!(interval_gap(0.0, 1.0, 0.5, 2.0), 0.0);
        assert_eq!(interval_gap(0.0, 1.0, 1.0, 2.0), 0.0); // shared endpoint
    }

    #[test]
    fn diagonal_unit_boxes() {
        // (1,1)..(2,2) corner gap: sqrt(2) euclidean, 1 chebyshev.
        let a = AxisBox::from_intervals(&[(0.0, 1.0), (0.0, 1.0)]);
        let b = AxisBox::from_intervals(&[(2.0, 3.0), (2.0, 3.0)]);
        assert!((box_distance(Metric::Euclidean, &a, &b) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(box_distance(Metric::Chebyshev, &a, &b), 1.0);
    }

    #[test]
    fn product_distance_factorizes() {
        let s1 = AxisBox::from_intervals(&[(0.0, 1.0)]);
        let t1 = AxisBox::from_intervals(&[(0.0, 1.0)]);
        let s2 = AxisBox::from_intervals(&[(2.0, 3.0)]);
        let t2 = AxisBox::from_intervals(&[(1.0, 2.0)]);
        let d = product_distance(Metric::Euclidean, &s1, &t1, &s2, &t2);
        assert!((d - 1.0).abs() < 1e-12);
        let d = product_distance(Metric::Chebyshev, &s1, &t1, &s2, &t2);
        assert!((d - 1.0).abs() < 1e-12);
    }
}
