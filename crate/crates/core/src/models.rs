//! Built-in multiflow models and the piecewise-affine table format.
//!
//! Each model is an evaluator `(t, box) -> boxes` returning a finite list of
//! closed boxes whose union contains the time-`t` reachable set of the box.
//! The built-ins come from closed-form solutions, so their images are exact
//! up to the bounding boxes of linear images (kept tight by slicing the
//! source box before mapping it).

use crate::error::{Error, Result};
use crate::geom::AxisBox;

/// Number of strips a source box is cut into before a non-axis-aligned
/// linear map is applied. Keeps the bounding-box slack of a mapped cell
/// around 1/16 of a cell width.
const LINEAR_SLICES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// dx/dt = |x|^(1/2) on the line: deterministic off the rest point,
    /// set-valued through it (the origin is a sliding point).
    SqrtAbs,
    /// Planar piecewise-constant field with the x-axis a sliding region:
    /// (1, 1) above, (1, -1) below, (1, 0) available on the axis.
    FilippovWedge,
    /// Rigid rotation about the origin with period 2 pi.
    Rotation,
    /// exp(-t) times a rotation: a global spiral contraction.
    SpiralContraction,
    /// dx/dt = 1 restricted to [-1, 1]; mass reaching the right end exits.
    RestrictedDrift,
    /// User-supplied piecewise-affine set-valued table.
    PiecewiseAffine(PwaTable),
}

/// An evaluable description of a multiflow.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiflowModel {
    name: String,
    dim: usize,
    space_hint: Vec<(f64, f64)>,
    exact: bool,
    kind: ModelKind,
}

impl MultiflowModel {
    pub fn sqrt_abs() -> MultiflowModel {
        MultiflowModel {
            name: "sqrt-abs".into(),
            dim: 1,
            space_hint: vec![(-30.0, 40.0)],
            exact: true,
            kind: ModelKind::SqrtAbs,
        }
    }

    pub fn filippov_wedge() -> MultiflowModel {
        MultiflowModel {
            name: "filippov-wedge".into(),
            dim: 2,
            space_hint: vec![(-4.0, 4.0), (-4.0, 4.0)],
            exact: true,
            kind: ModelKind::FilippovWedge,
        }
    }

    pub fn rotation() -> MultiflowModel {
        MultiflowModel {
            name: "rotation".into(),
            dim: 2,
            space_hint: vec![(-5.0, 5.0), (-5.0, 5.0)],
            exact: true,
            kind: ModelKind::Rotation,
        }
    }

    pub fn spiral_contraction() -> MultiflowModel {
        MultiflowModel {
            name: "spiral-contraction".into(),
            dim: 2,
            space_hint: vec![(-1.6, 1.6), (-1.6, 1.6)],
            exact: true,
            kind: ModelKind::SpiralContraction,
        }
    }

    pub fn restricted_drift() -> MultiflowModel {
        MultiflowModel {
            name: "restricted-drift".into(),
            dim: 1,
            space_hint: vec![(-1.0, 1.0)],
            exact: true,
            kind: ModelKind::RestrictedDrift,
        }
    }

    pub fn piecewise_affine(name: &str, table: PwaTable) -> MultiflowModel {
        MultiflowModel {
            name: name.into(),
            dim: table.dim,
            space_hint: table
                .branches
                .iter()
                .fold(None::<AxisBox>, |acc, b| {
                    Some(match acc {
                        None => b.domain.clone(),
                        Some(h) => h.hull(&b.domain),
                    })
                })
                .map(|h| h.lo.iter().zip(&h.hi).map(|(&a, &b)| (a, b)).collect())
                .unwrap_or_default(),
            exact: false,
            kind: ModelKind::PiecewiseAffine(table),
        }
    }

    pub fn by_name(name: &str) -> Option<MultiflowModel> {
        match name {
            "sqrt-abs" => Some(MultiflowModel::sqrt_abs()),
            "filippov-wedge" => Some(MultiflowModel::filippov_wedge()),
            "rotation" => Some(MultiflowModel::rotation()),
            "spiral-contraction" => Some(MultiflowModel::spiral_contraction()),
            "restricted-drift" => Some(MultiflowModel::restricted_drift()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Recommended bounds for a grid hosting this model.
    pub fn space_hint(&self) -> &[(f64, f64)] {
        &self.space_hint
    }

    /// Whether the evaluator comes from a closed-form reachable set.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Outer bound on the time-`t` image of `source`. Requires `t > 0`;
    /// backward dynamics go through the transpose of a sampled relation.
    pub fn images(&self, t: f64, source: &AxisBox) -> Result<Vec<AxisBox>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::EvaluatorDomain(format!(
                "model `{}` requires a finite positive time, got {t}",
                self.name
            )));
        }
        if source.dim() != self.dim {
            return Err(Error::EvaluatorDomain(format!(
                "model `{}` is {}-dimensional, queried with a {}-dimensional box",
                self.name,
                self.dim,
                source.dim()
            )));
        }
        Ok(match &self.kind {
            ModelKind::SqrtAbs => sqrt_abs_images(t, source),
            ModelKind::FilippovWedge => wedge_images(t, source),
            ModelKind::Rotation => linear_images(rotation_matrix(t), source),
            ModelKind::SpiralContraction => linear_images(spiral_matrix(t), source),
            ModelKind::RestrictedDrift => drift_images(t, source),
            ModelKind::PiecewiseAffine(table) => table.images(t, source),
        })
    }
}

/// The five built-in models.
pub fn builtin_models() -> Vec<MultiflowModel> {
    vec![
        MultiflowModel::sqrt_abs(),
        MultiflowModel::filippov_wedge(),
        MultiflowModel::rotation(),
        MultiflowModel::spiral_contraction(),
        MultiflowModel::restricted_drift(),
    ]
}

fn sqrt_abs_images(t: f64, source: &AxisBox) -> Vec<AxisBox> {
    let (a, b) = (source.lo[0], source.hi[0]);
    let split = -t * t / 4.0;
    let mut out = Vec::with_capacity(3);
    // x <= -t^2/4: unique path, still negative at time t.
    if a < split {
        let hi = b.min(split);
        let m = |x: f64| -((-x).sqrt() - t / 2.0).powi(2);
        out.push(AxisBox::new(vec![m(a)], vec![m(hi)]));
    }
    // -t^2/4 <= x <= 0: reaches the sliding point; the image is an interval.
    if b >= split && a <= 0.0 {
        let hi = b.min(0.0).max(split);
        let u = (t / 2.0 - (-hi).sqrt()).powi(2);
        out.push(AxisBox::new(vec![0.0], vec![u]));
    }
    // x > 0: unique increasing path.
    if b > 0.0 {
        let lo = a.max(0.0);
        let p = |x: f64| (t / 2.0 + x.sqrt()).powi(2);
        out.push(AxisBox::new(vec![p(lo)], vec![p(b)]));
    }
    out
}

fn wedge_images(t: f64, source: &AxisBox) -> Vec<AxisBox> {
    let (a, b) = (source.lo[0], source.hi[0]);
    let (c, d) = (source.lo[1], source.hi[1]);
    let mut out = Vec::with_capacity(3);
    // Off-axis starts translate rigidly away from the axis.
    if d > 0.0 {
        out.push(AxisBox::new(vec![a + t, c.max(0.0) + t], vec![b + t, d + t]));
    }
    if c < 0.0 {
        out.push(AxisBox::new(vec![a + t, c - t], vec![b + t, d.min(0.0) - t]));
    }
    // Axis starts may slide for any sub-interval of the available time.
    if c <= 0.0 && d >= 0.0 {
        out.push(AxisBox::new(vec![a + t, -t], vec![b + t, t]));
    }
    out
}

fn drift_images(t: f64, source: &AxisBox) -> Vec<AxisBox> {
    let lo = source.lo[0] + t;
    let hi = source.hi[0] + t;
    if lo > 1.0 {
        return Vec::new();
    }
    vec![AxisBox::new(vec![lo.max(-1.0)], vec![hi.min(1.0)])]
}

fn rotation_matrix(t: f64) -> [f64; 4] {
    // [x'; y'] = [cos t, sin t; -sin t, cos t] [x; y]
    [t.cos(), t.sin(), -t.sin(), t.cos()]
}

fn spiral_matrix(t: f64) -> [f64; 4] {
    // exp(-t) [cos t, -sin t; sin t, cos t]
    let e = (-t).exp();
    [e * t.cos(), -e * t.sin(), e * t.sin(), e * t.cos()]
}

/// Image of a 2-D box under a linear map, as bounding boxes of mapped
/// strips. The source is sliced along its wider axis so the per-strip
/// bounding-box slack stays a small fraction of the box size.
fn linear_images(m: [f64; 4], source: &AxisBox) -> Vec<AxisBox> {
    let (a, b) = (source.lo[0], source.hi[0]);
    let (c, d) = (source.lo[1], source.hi[1]);
    let slice_x = (b - a) >= (d - c);
    let mut out = Vec::with_capacity(LINEAR_SLICES);
    for i in 0..LINEAR_SLICES {
        let (f0, f1) = (i as f64 / LINEAR_SLICES as f64, (i + 1) as f64 / LINEAR_SLICES as f64);
        let (sa, sb, sc, sd) = if slice_x {
            (a + f0 * (b - a), a + f1 * (b - a), c, d)
        } else {
            (a, b, c + f0 * (d - c), c + f1 * (d - c))
        };
        let corners = [(sa, sc), (sa, sd), (sb, sc), (sb, sd)];
        let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in corners {
            let xm = m[0] * x + m[1] * y;
            let ym = m[2] * x + m[3] * y;
            xlo = xlo.min(xm);
            xhi = xhi.max(xm);
            ylo = ylo.min(ym);
            yhi = yhi.max(ym);
        }
        out.push(AxisBox::new(vec![xlo, ylo], vec![xhi, yhi]));
    }
    out
}

/// One branch of a piecewise-affine table: sources in `domain` map to
/// `matrix * x + offset`, fattened by `radius` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PwaBranch {
    pub domain: AxisBox,
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
    pub radius: f64,
}

/// A piecewise-affine set-valued table. Time is interpreted through the
/// declared `step`: a query at time `t` applies the table
/// `max(1, round(t / step))` times, so the family satisfies the semigroup
/// law only up to that rounding (which `check_semigroup` can audit).
#[derive(Debug, Clone, PartialEq)]
pub struct PwaTable {
    pub dim: usize,
    pub step: f64,
    pub branches: Vec<PwaBranch>,
}

/// Box lists longer than this are merged into their hull to keep
/// multi-step table images bounded.
const PWA_MAX_BOXES: usize = 64;

impl PwaTable {
    fn apply_once(&self, boxes: &[AxisBox]) -> Vec<AxisBox> {
        let mut out = Vec::new();
        for bx in boxes {
            for branch in &self.branches {
                let Some(part) = bx.intersect(&branch.domain) else { continue };
                out.push(affine_image(&branch.matrix, &branch.offset, self.dim, &part).dilate(branch.radius));
            }
        }
        if out.len() > PWA_MAX_BOXES {
            let hull = out.iter().skip(1).fold(out[0].clone(), |acc, b| acc.hull(b));
            return vec![hull];
        }
        out
    }

    fn images(&self, t: f64, source: &AxisBox) -> Vec<AxisBox> {
        let steps = ((t / self.step).round() as usize).max(1);
        let mut boxes = vec![source.clone()];
        for _ in 0..steps {
            boxes = self.apply_once(&boxes);
            if boxes.is_empty() {
                break;
            }
        }
        boxes
    }

    /// Parse the text table format:
    ///
    /// ```text
    /// dim 2
    /// step 0.5
    /// branch
    ///   domain -1 1 -1 1      # per-axis lo hi
    ///   matrix 0 1 -1 0       # row-major dim x dim
    ///   offset 0 0
    ///   radius 0.05
    /// ```
    pub fn parse(text: &str) -> Result<PwaTable> {
        let bad = |line: usize, msg: String| Error::MalformedTable(format!("line {}: {msg}", line + 1));
        let mut dim: Option<usize> = None;
        let mut step: Option<f64> = None;
        let mut branches: Vec<PwaBranch> = Vec::new();
        type PartialBranch = (Option<AxisBox>, Option<Vec<f64>>, Option<Vec<f64>>, Option<f64>);
        let mut current: Option<PartialBranch> = None;

        fn finish(
            current: &mut Option<PartialBranch>,
            branches: &mut Vec<PwaBranch>,
        ) -> std::result::Result<(), String> {
            if let Some((d, m, o, r)) = current.take() {
                branches.push(PwaBranch {
                    domain: d.ok_or("branch missing `domain`")?,
                    matrix: m.ok_or("branch missing `matrix`")?,
                    offset: o.ok_or("branch missing `offset`")?,
                    radius: r.ok_or("branch missing `radius`")?,
                });
            }
            Ok(())
        }

        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap();
            let nums: std::result::Result<Vec<f64>, _> = toks.map(str::parse::<f64>).collect();
            let nums = nums.map_err(|e| bad(ln, format!("{e}")))?;
            match key {
                "dim" => dim = Some(nums.first().copied().ok_or_else(|| bad(ln, "dim needs a value".into()))? as usize),
                "step" => step = Some(nums.first().copied().ok_or_else(|| bad(ln, "step needs a value".into()))?),
                "branch" => finish(&mut current, &mut branches).map_err(|m| bad(ln, m.to_string())).map(|_| current = Some((None, None, None, None)))?,
                "domain" | "matrix" | "offset" | "radius" => {
                    let d = dim.ok_or_else(|| bad(ln, "declare `dim` before branches".into()))?;
                    let slot = current.as_mut().ok_or_else(|| bad(ln, "field outside a `branch`".into()))?;
                    match key {
                        "domain" => {
                            if nums.len() != 2 * d {
                                return Err(bad(ln, format!("domain needs {} numbers", 2 * d)));
                            }
                            let lo = nums.iter().step_by(2).copied().collect();
                            let hi = nums.iter().skip(1).step_by(2).copied().collect();
                            slot.0 = Some(AxisBox::new(lo, hi));
                        }
                        "matrix" => {
                            if nums.len() != d * d {
                                return Err(bad(ln, format!("matrix needs {} numbers", d * d)));
                            }
                            slot.1 = Some(nums);
                        }
                        "offset" => {
                            if nums.len() != d {
                                return Err(bad(ln, format!("offset needs {d} numbers")));
                            }
                            slot.2 = Some(nums);
                        }
                        _ => slot.3 = Some(nums.first().copied().ok_or_else(|| bad(ln, "radius needs a value".into()))?),
                    }
                }
                other => return Err(bad(ln, format!("unknown key `{other}`"))),
            }
        }
        finish(&mut current, &mut branches).map_err(|m| Error::MalformedTable(m.to_string()))?;
        let dim = dim.ok_or_else(|| Error::MalformedTable("missing `dim`".into()))?;
        let step = step.ok_or_else(|| Error::MalformedTable("missing `step`".into()))?;
        if !(step > 0.0) {
            return Err(Error::MalformedTable("step must be positive".into()));
        }
        if branches.is_empty() {
            return Err(Error::MalformedTable("table has no branches".into()));
        }
        Ok(PwaTable { dim, step, branches })
    }
}

fn affine_image(matrix: &[f64], offset: &[f64], dim: usize, source: &AxisBox) -> AxisBox {
    // Interval arithmetic row by row: exact bounding box of the affine image.
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for r in 0..dim {
        let (mut acc_lo, mut acc_hi) = (offset[r], offset[r]);
        for c in 0..dim {
            let m = matrix[r * dim + c];
            let (x0, x1) = (m * source.lo[c], m * source.hi[c]);
            acc_lo += x0.min(x1);
            acc_hi += x0.max(x1);
        }
        lo.push(acc_lo);
        hi.push(acc_hi);
    }
    AxisBox::new(lo, hi)
}
