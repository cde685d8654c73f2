//! Experiment configuration: a single JSON file describing the grid, the
//! model, the time grid, named cell sets, and per-command parameters.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use multiflow::{
    AxisBox, CellSet, CoverMode, GridSpace, MultiflowModel, PwaTable, Region, TimeGrid,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimesConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, SetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub find_block: Option<FindBlockParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuation: Option<ContinuationParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Path to a piecewise-affine table, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformTimes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformTimes {
    pub count: usize,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetMode {
    /// Cells whose closed box intersects the region.
    #[default]
    Intersect,
    /// Cells whose center lies in the region.
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "box")]
    pub box_: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipse: Option<EllipseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heart: Option<HeartConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub full: bool,
    #[serde(default, skip_serializing_if = "is_default_mode")]
    pub mode: SetMode,
}

fn is_default_mode(m: &SetMode) -> bool {
    *m == SetMode::Intersect
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseConfig {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeartConfig {
    #[serde(default)]
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaParams {
    pub set: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub set: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleParams {
    pub t: f64,
    /// For 2-D spaces, the source whose row is rendered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupParams {
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockParams {
    pub set: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spot_checks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindBlockParams {
    pub attractor: String,
    pub neighborhood: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationParams {
    pub block: String,
    pub relation: RelationConfig,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationConfig {
    /// Sample the configured model at this time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_model: Option<f64>,
    /// Geometric pairs: each entry is a source box and a target box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_pairs: Option<Vec<BoxPair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxPair {
    pub source: Vec<[f64; 2]>,
    pub target: Vec<[f64; 2]>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("failed to parse the experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.space.bounds.len() != self.space.resolution.len() {
            bail!("space bounds and resolution must have the same dimension");
        }
        for (name, set) in &self.sets {
            let shapes = [
                set.box_.is_some(),
                set.boxes.is_some(),
                set.ball.is_some(),
                set.ellipse.is_some(),
                set.heart.is_some(),
                set.cells.is_some(),
                set.full,
            ];
            if shapes.iter().filter(|&&b| b).count() != 1 {
                bail!("set `{name}` must declare exactly one shape");
            }
            let dim = self.space.bounds.len();
            for bx in set.box_.iter().chain(set.boxes.iter().flatten()) {
                if bx.len() != dim {
                    bail!("set `{name}` has a box of the wrong dimension");
                }
                for (axis, (iv, sb)) in bx.iter().zip(&self.space.bounds).enumerate() {
                    if iv[0] > iv[1] || iv[0] < sb[0] || iv[1] > sb[1] {
                        bail!("set `{name}` box leaves the space bounds on axis {axis}");
                    }
                }
            }
            if let Some(b) = &set.ball {
                if b.center.len() != dim {
                    bail!("set `{name}` ball center has the wrong dimension");
                }
            }
            if let Some(e) = &set.ellipse {
                if e.coeffs.len() != dim
                    || e.center.as_ref().is_some_and(|c| c.len() != dim)
                {
                    bail!("set `{name}` ellipse coefficients or center have the wrong dimension");
                }
            }
            if set.heart.is_some() && dim != 2 {
                bail!("set `{name}`: the heart region is planar");
            }
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<Arc<GridSpace>> {
        let bounds: Vec<(f64, f64)> =
            self.space.bounds.iter().map(|&[a, b]| (a, b)).collect();
        Ok(GridSpace::new(&bounds, &self.space.resolution)?)
    }

    pub fn build_model(&self, config_dir: &Path) -> Result<MultiflowModel> {
        let Some(mc) = &self.model else { bail!("this command needs a `model` section") };
        match (&mc.builtin, &mc.table) {
            (Some(name), None) => MultiflowModel::by_name(name)
                .with_context(|| format!("unknown builtin model `{name}`")),
            (None, Some(path)) => {
                let full = config_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .with_context(|| format!("reading model table {}", full.display()))?;
                let table = PwaTable::parse(&text)?;
                Ok(MultiflowModel::piecewise_affine(
                    full.file_stem().and_then(|s| s.to_str()).unwrap_or("table"),
                    table,
                ))
            }
            _ => bail!("model must declare exactly one of `builtin` or `table`"),
        }
    }

    pub fn build_times(&self) -> Result<TimeGrid> {
        let Some(tc) = &self.times else { bail!("this command needs a `times` section") };
        let grid = match (&tc.samples, &tc.uniform) {
            (Some(samples), None) => TimeGrid::new(samples.clone(), tc.threshold)?,
            (None, Some(u)) => {
                let g = TimeGrid::uniform(u.count, u.max)?;
                match tc.threshold {
                    Some(th) => g.with_threshold(th)?,
                    None => g,
                }
            }
            _ => bail!("times must declare exactly one of `samples` or `uniform`"),
        };
        Ok(grid)
    }

    pub fn resolve_set(&self, space: &Arc<GridSpace>, name: &str) -> Result<CellSet> {
        let set = self
            .sets
            .get(name)
            .with_context(|| format!("set `{name}` is not defined in the config"))?;
        let mode = match set.mode {
            SetMode::Intersect => CoverMode::Intersect,
            SetMode::Center => CoverMode::Center,
        };
        let region = if let Some(b) = &set.box_ {
            Region::Boxes(vec![boxes_from(b)])
        } else if let Some(bs) = &set.boxes {
            Region::Boxes(bs.iter().map(|b| boxes_from(b)).collect())
        } else if let Some(b) = &set.ball {
            Region::Ball { center: b.center.clone(), radius: b.radius }
        } else if let Some(e) = &set.ellipse {
            Region::Ellipse {
                coeffs: e.coeffs.clone(),
                rhs: e.rhs,
                center: e.center.clone().unwrap_or_else(|| vec![0.0; space.dimension()]),
            }
        } else if let Some(h) = &set.heart {
            Region::Heart { margin: h.margin }
        } else if let Some(cells) = &set.cells {
            return Ok(CellSet::from_cells(space, cells.iter().copied())?);
        } else {
            return Ok(CellSet::full(space));
        };
        Ok(region.cells(space, mode))
    }

    pub fn build_relation(
        &self,
        space: &Arc<GridSpace>,
        config_dir: &Path,
        rc: &RelationConfig,
    ) -> Result<multiflow::FiniteRelation> {
        match (&rc.from_model, &rc.box_pairs) {
            (Some(t), None) => {
                let model = self.build_model(config_dir)?;
                Ok(multiflow::sample_relation(&model, space, *t)?)
            }
            (None, Some(pairs)) => {
                let pairs: Vec<(AxisBox, AxisBox)> = pairs
                    .iter()
                    .map(|p| (boxes_from(&p.source), boxes_from(&p.target)))
                    .collect();
                Ok(multiflow::FiniteRelation::from_box_pairs(space, &pairs))
            }
            _ => bail!("relation must declare exactly one of `from_model` or `box_pairs`"),
        }
    }
}

fn boxes_from(iv: &[[f64; 2]]) -> AxisBox {
    AxisBox::from_intervals(&iv.iter().map(|&[a, b]| (a, b)).collect::<Vec<_>>())
}
