use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{clip, Dataset};
use crate::error::{Error, Result};
use crate::models::{ComponentFunction, LinearClassifier, Model, PwsModel, SwitchingModel};
use crate::{rng, HALF_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Mode chosen by a linear classifier of the input.
    Pws,
    /// Mode drawn uniformly at random for every point.
    ArbitrarySwitching,
}

/// Data-generating process: inputs uniform on the cube
/// `[-R_x/√d, R_x/√d]^d` (so `‖x‖ ≤ R_x`), targets
/// `clip(⟨w_mode, x⟩ + u, 1/2)` with `u` uniform on `[-noise, noise]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    /// True component weights, one row per mode.
    pub weights: Vec<Vec<f64>>,
    /// Classifier weights for the PWS kind; defaults to the component
    /// weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<Vec<Vec<f64>>>,
    pub noise: f64,
    pub n: usize,
    #[serde(default = "unit")]
    pub r_x: f64,
    #[serde(default)]
    pub seed: u64,
}

fn unit() -> f64 {
    1.0
}

/// A generated sample with its hidden ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    pub model: Model,
    pub modes: Vec<usize>,
}

impl SyntheticSpec {
    pub fn modes(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SyntheticSpec { seed, ..self.clone() }
    }

    pub fn with_n(&self, n: usize) -> Self {
        SyntheticSpec { n, ..self.clone() }
    }

    /// `R_w`: the largest true component norm.
    pub fn weight_radius(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| w.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.weights.is_empty() || d == 0 {
            return Err(Error::param("synthetic spec needs at least one nonempty weight vector"));
        }
        if self.weights.iter().any(|w| w.len() != d) {
            return Err(Error::param("true weights differ in dimension"));
        }
        if let Some(g) = &self.classifier {
            if g.len() != self.modes() || g.iter().any(|w| w.len() != d) {
                return Err(Error::param("classifier shape does not match the weights"));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::param(format!("noise half-width must be >= 0, got {}", self.noise)));
        }
        if self.n == 0 {
            return Err(Error::param("n must be >= 1"));
        }
        if !(self.r_x > 0.0 && self.r_x.is_finite()) {
            return Err(Error::param(format!("R_x must be positive, got {}", self.r_x)));
        }
        Ok(())
    }

    fn true_model(&self) -> Result<Model> {
        let components = self.weights.iter().cloned().map(ComponentFunction::linear).collect();
        Ok(match self.kind {
            SyntheticKind::Pws => {
                let g = self.classifier.clone().unwrap_or_else(|| self.weights.clone());
                Model::Pws(PwsModel::new(LinearClassifier::new(g)?, components, HALF_RANGE)?)
            }
            SyntheticKind::ArbitrarySwitching => Model::Switching(SwitchingModel::new(components, HALF_RANGE)?),
        })
    }
}

/// Draws a sample; a pure function of the spec (including its seed).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.validate()?;
    let model = spec.true_model()?;
    let d = spec.dim();
    let half_side = spec.r_x / (d as f64).sqrt();
    let mut rng = rng::stream(spec.seed, &[]);
    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    let mut modes = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-half_side..=half_side)).collect();
        let mode = match &model {
            Model::Pws(m) => m.classifier().classify(&x)?,
            Model::Switching(_) => rng.random_range(0..spec.modes()),
        };
        let u = if spec.noise > 0.0 {
            rng.random_range(-spec.noise..=spec.noise)
        } else {
            0.0
        };
        let clean: f64 = spec.weights[mode].iter().zip(&x).map(|(a, b)| a * b).sum();
        ys.push(clip(clean + u, HALF_RANGE)?);
        xs.push(x);
        modes.push(mode);
    }
    Ok(Synthetic {
        data: Dataset::with_half_range(xs, ys, HALF_RANGE)?,
        model,
        modes,
    })
}
