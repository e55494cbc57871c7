//! PWS and switching predictors over linear-classifier partitions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{clip_unchecked, Dataset, ScaleInfo};
use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::input(format!(
            "input dimension {got} does not match model dimension {expected}"
        )));
    }
    Ok(())
}

/// Built-in reproducing kernels, serialized by name and parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Kernel {
    /// `exp(-‖x - x'‖² / (2 bandwidth²))`
    Gaussian { bandwidth: f64 },
    /// `(⟨x, x'⟩ + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
}

impl Kernel {
    pub fn linear() -> Self {
        Kernel::Polynomial {
            degree: 1,
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Gaussian { bandwidth } if !(bandwidth > 0.0 && bandwidth.is_finite()) => {
                Err(Error::param("gaussian bandwidth must be positive"))
            }
            Kernel::Polynomial { degree, offset } if degree == 0 || offset < 0.0 => Err(
                Error::param("polynomial kernel needs degree >= 1 and offset >= 0"),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Gaussian { bandwidth } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
            Kernel::Polynomial { degree, offset } => (dot(a, b) + offset).powi(degree as i32),
        }
    }

    pub fn gram(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let m = xs.len();
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = self.eval(&xs[i], &xs[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Parses `gaussian:<bandwidth>`, `poly:<degree>[:<offset>]` or `linear`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::param(format!("bad kernel parameter {s:?}")))
        };
        let k = match parts.as_slice() {
            ["linear"] => Kernel::linear(),
            ["gaussian", bw] => Kernel::Gaussian { bandwidth: num(bw)? },
            ["poly", deg] => Kernel::Polynomial {
                degree: num(deg)? as u32,
                offset: 0.0,
            },
            ["poly", deg, off] => Kernel::Polynomial {
                degree: num(deg)? as u32,
                offset: num(off)?,
            },
            _ => return Err(Error::param(format!("unknown kernel {spec:?}"))),
        };
        k.validate()?;
        Ok(k)
    }
}

/// `g(x) = argmax_k ⟨w_k, x⟩`, ties to the lowest index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearClassifier {
    weights: Vec<Vec<f64>>,
}

impl LinearClassifier {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("classifier needs at least one mode"));
        }
        let d = weights[0].len();
        if weights.iter().any(|w| w.len() != d) {
            return Err(Error::input("classifier weight vectors differ in dimension"));
        }
        Ok(LinearClassifier { weights })
    }

    /// Classifier that sends everything to the first mode.
    pub fn trivial(modes: usize, dim: usize) -> Self {
        LinearClassifier {
            weights: vec![vec![0.0; dim]; modes.max(1)],
        }
    }

    pub fn modes(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Zero-based mode index.
    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.dim(), x.len())?;
        Ok(self.classify_unchecked(x))
    }

    pub(crate) fn classify_unchecked(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (k, w) in self.weights.iter().enumerate() {
            let s = dot(w, x);
            if s > best_score {
                best = k;
                best_score = s;
            }
        }
        best
    }
}

/// A single component function `f_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentFunction {
    Linear {
        w: Vec<f64>,
    },
    Kernel {
        kernel: Kernel,
        support: Vec<Vec<f64>>,
        coef: Vec<f64>,
    },
}

impl ComponentFunction {
    pub fn linear(w: Vec<f64>) -> Self {
        ComponentFunction::Linear { w }
    }

    pub fn kernel(kernel: Kernel, support: Vec<Vec<f64>>, coef: Vec<f64>) -> Result<Self> {
        kernel.validate()?;
        if support.len() != coef.len() {
            return Err(Error::input("kernel expansion: support and coefficients differ in length"));
        }
        if let Some(first) = support.first() {
            if support.iter().any(|s| s.len() != first.len()) {
                return Err(Error::input("kernel support points differ in dimension"));
            }
        }
        Ok(ComponentFunction::Kernel {
            kernel,
            support,
            coef,
        })
    }

    /// Input dimension, when the component determines one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ComponentFunction::Linear { w } => Some(w.len()),
            ComponentFunction::Kernel { support, .. } => support.first().map(Vec::len),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            ComponentFunction::Linear { w } => dot(w, x),
            ComponentFunction::Kernel {
                kernel,
                support,
                coef,
            } => support
                .iter()
                .zip(coef)
                .map(|(s, a)| a * kernel.eval(s, x))
                .sum(),
        }
    }

    /// `‖w‖₂` for linear components, the RKHS norm for kernel expansions.
    pub fn norm(&self) -> Result<f64> {
        match self {
            ComponentFunction::Linear { w } => Ok(dot(w, w).sqrt()),
            ComponentFunction::Kernel { .. } => rkhs_norm(self),
        }
    }
}

/// `sqrt(αᵀ K α)` for a kernel expansion.
///
/// Fails when the Gram matrix of the support points has an eigenvalue below
/// `-1e-10` (relative to its largest diagonal entry, floored at 1).
pub fn rkhs_norm(c: &ComponentFunction) -> Result<f64> {
    let ComponentFunction::Kernel {
        kernel,
        support,
        coef,
    } = c
    else {
        return Err(Error::param("rkhs_norm expects a kernel component"));
    };
    if support.is_empty() {
        return Ok(0.0);
    }
    let g = kernel.gram(support);
    let scale = g.diagonal().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let min_eig = g
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    if min_eig < -1e-10 * scale {
        return Err(Error::Numerical(format!(
            "Gram matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
        )));
    }
    let a = DVector::from_column_slice(coef);
    let q = a.dot(&(&g * &a));
    Ok(q.max(0.0).sqrt())
}

fn check_components(components: &[ComponentFunction]) -> Result<Option<usize>> {
    if components.is_empty() {
        return Err(Error::param("model needs at least one component"));
    }
    let mut dim = None;
    for c in components {
        match (dim, c.dim()) {
            (None, d) => dim = d,
            (Some(a), Some(b)) if a != b => {
                return Err(Error::input("components differ in input dimension"))
            }
            _ => {}
        }
    }
    Ok(dim)
}

fn check_half_range(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("clip level M must be positive"));
    }
    Ok(())
}

/// `x ↦ clip(f_{g(x)}(x), M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PwsModel {
    classifier: LinearClassifier,
    components: Vec<ComponentFunction>,
    half_range: f64,
}

impl PwsModel {
    pub fn new(
        classifier: LinearClassifier,
        components: Vec<ComponentFunction>,
        half_range: f64,
    ) -> Result<Self> {
        check_half_range(half_range)?;
        let dim = check_components(&components)?;
        if classifier.modes() != components.len() {
            return Err(Error::input(format!(
                "classifier has {} modes but {} components were given",
                classifier.modes(),
                components.len()
            )));
        }
        if let Some(d) = dim {
            if d != classifier.dim() {
                return Err(Error::input("classifier and components differ in input dimension"));
            }
        }
        Ok(PwsModel {
            classifier,
            components,
            half_range,
        })
    }

    pub fn classifier(&self) -> &LinearClassifier {
        &self.classifier
    }

    pub fn components(&self) -> &[ComponentFunction] {
        &self.components
    }

    pub fn modes(&self) -> usize {
        self.components.len()
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let k = self.classifier.classify(x)?;
        Ok(clip_unchecked(self.components[k].eval(x)?, self.half_range))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        data.xs().iter().map(|x| self.predict(x)).collect()
    }

    /// Mode chosen by the classifier for every sample point.
    pub fn partition(&self, data: &Dataset) -> Result<Vec<usize>> {
        data.xs().iter().map(|x| self.classifier.classify(x)).collect()
    }
}

/// `x ↦ (clip(f_k(x), M))_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingModel {
    components: Vec<ComponentFunction>,
    half_range: f64,
}

impl SwitchingModel {
    pub fn new(components: Vec<ComponentFunction>, half_range: f64) -> Result<Self> {
        check_half_range(half_range)?;
        check_components(&components)?;
        Ok(SwitchingModel {
            components,
            half_range,
        })
    }

    pub fn components(&self) -> &[ComponentFunction] {
        &self.components
    }

    pub fn modes(&self) -> usize {
        self.components.len()
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| Ok(clip_unchecked(c.eval(x)?, self.half_range)))
            .collect()
    }

    /// Clipped predictions arranged per mode: `out[k][i] = clip(f_k(x_i))`.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        if let Some(d) = self.components[0].dim() {
            check_dim(d, data.dim())?;
        }
        Ok(self
            .components
            .iter()
            .map(|c| {
                data.xs()
                    .iter()
                    .map(|x| clip_unchecked(c.eval_unchecked(x), self.half_range))
                    .collect()
            })
            .collect())
    }
}

pub fn predict_pws(m: &PwsModel, x: &[f64]) -> Result<f64> {
    m.predict(x)
}

pub fn predict_switching(m: &SwitchingModel, x: &[f64]) -> Result<Vec<f64>> {
    m.predict(x)
}

pub fn classify(g: &LinearClassifier, x: &[f64]) -> Result<usize> {
    g.classify(x)
}

/// A learned model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Pws(PwsModel),
    Switching(SwitchingModel),
}

/// On-disk JSON layout of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "C")]
    pub modes: usize,
    #[serde(rename = "M")]
    pub half_range: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<Vec<Vec<f64>>>,
    pub components: Vec<ComponentFunction>,
    /// Target scaling of the training data, so risks can be re-expressed in raw units.
    #[serde(default)]
    pub scale: ScaleInfo,
    /// Whether a constant feature was appended to inputs before fitting.
    #[serde(default)]
    pub bias_feature: bool,
}

impl Model {
    pub fn modes(&self) -> usize {
        match self {
            Model::Pws(m) => m.modes(),
            Model::Switching(m) => m.modes(),
        }
    }

    pub fn to_json(&self, scale: ScaleInfo, bias_feature: bool) -> ModelJson {
        match self {
            Model::Pws(m) => ModelJson {
                kind: "pws".into(),
                modes: m.modes(),
                half_range: m.half_range,
                classifier: Some(m.classifier.weights.clone()),
                components: m.components.clone(),
                scale,
                bias_feature,
            },
            Model::Switching(m) => ModelJson {
                kind: "switching".into(),
                modes: m.modes(),
                half_range: m.half_range,
                classifier: None,
                components: m.components.clone(),
                scale,
                bias_feature,
            },
        }
    }

    pub fn from_json(j: &ModelJson) -> Result<Self> {
        if j.modes != j.components.len() {
            return Err(Error::input(format!(
                "model declares C = {} but has {} components",
                j.modes,
                j.components.len()
            )));
        }
        match j.kind.as_str() {
            "pws" => {
                let w = j
                    .classifier
                    .clone()
                    .ok_or_else(|| Error::input("pws model without classifier"))?;
                Ok(Model::Pws(PwsModel::new(
                    LinearClassifier::new(w)?,
                    j.components.clone(),
                    j.half_range,
                )?))
            }
            "switching" => Ok(Model::Switching(SwitchingModel::new(
                j.components.clone(),
                j.half_range,
            )?)),
            other => Err(Error::input(format!("unknown model type {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LossParams;
    use proptest::prelude::*;

    #[test]
    fn classify_examples() {
        let g = LinearClassifier::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(classify(&g, &[2.0, 1.0]).unwrap(), 0);
        let tie = LinearClassifier::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(tie.classify(&[0.3, -2.0]).unwrap(), 0);
        let single = LinearClassifier::new(vec![vec![5.0, -1.0]]).unwrap();
        assert_eq!(single.classify(&[-4.0, 9.0]).unwrap(), 0);
        assert!(matches!(g.classify(&[1.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn predict_pws_examples() {
        let g = LinearClassifier::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let comps = vec![
            ComponentFunction::linear(vec![0.1, 0.1]),
            ComponentFunction::linear(vec![0.0, 0.0]),
        ];
        let m = PwsModel::new(g.clone(), comps, 0.5).unwrap();
        assert!((predict_pws(&m, &[2.0, 1.0]).unwrap() - 0.3).abs() < 1e-15);

        let big = PwsModel::new(
            g,
            vec![
                ComponentFunction::linear(vec![0.3, 0.3]),
                ComponentFunction::linear(vec![0.0, 0.0]),
            ],
            0.5,
        )
        .unwrap();
        assert_eq!(big.predict(&[2.0, 1.0]).unwrap(), 0.5);

        let one = PwsModel::new(
            LinearClassifier::trivial(1, 1),
            vec![ComponentFunction::linear(vec![-2.0])],
            0.5,
        )
        .unwrap();
        assert_eq!(one.predict(&[0.1]).unwrap(), -0.2);
        assert_eq!(one.predict(&[1.0]).unwrap(), -0.5);
        assert!(one.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn predict_switching_examples() {
        let m = SwitchingModel::new(
            vec![
                ComponentFunction::linear(vec![0.4]),
                ComponentFunction::linear(vec![-0.4]),
            ],
            0.5,
        )
        .unwrap();
        assert_eq!(predict_switching(&m, &[1.0]).unwrap(), vec![0.4, -0.4]);
        assert_eq!(m.predict(&[3.0]).unwrap(), vec![0.5, -0.5]);
        let zero = SwitchingModel::new(vec![ComponentFunction::linear(vec![0.0, 0.0]); 3], 0.5)
            .unwrap();
        assert_eq!(zero.predict(&[1.0, 2.0]).unwrap(), vec![0.0; 3]);
        assert!(zero.predict(&[1.0]).is_err());
    }

    #[test]
    fn rkhs_norm_examples() {
        let k = Kernel::Gaussian { bandwidth: 1.0 };
        let one = ComponentFunction::kernel(k, vec![vec![0.3]], vec![1.0]).unwrap();
        assert!((rkhs_norm(&one).unwrap() - 1.0).abs() < 1e-15);
        let zero = ComponentFunction::kernel(k, vec![vec![0.3], vec![1.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(rkhs_norm(&zero).unwrap(), 0.0);
        // orthogonal support points under the linear kernel give the identity Gram matrix
        let two = ComponentFunction::kernel(
            Kernel::linear(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!((rkhs_norm(&two).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(rkhs_norm(&ComponentFunction::linear(vec![1.0])).is_err());
    }

    #[test]
    fn kernel_parse() {
        assert_eq!(Kernel::parse("linear").unwrap(), Kernel::linear());
        assert_eq!(
            Kernel::parse("gaussian:0.5").unwrap(),
            Kernel::Gaussian { bandwidth: 0.5 }
        );
        assert_eq!(
            Kernel::parse("poly:3:1").unwrap(),
            Kernel::Polynomial { degree: 3, offset: 1.0 }
        );
        assert!(Kernel::parse("gaussian:-1").is_err());
        assert!(Kernel::parse("sigmoid").is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = Model::Pws(
            PwsModel::new(
                LinearClassifier::new(vec![vec![1.0, -1.0], vec![0.5, 2.0]]).unwrap(),
                vec![
                    ComponentFunction::linear(vec![0.1, 0.2]),
                    ComponentFunction::kernel(
                        Kernel::Gaussian { bandwidth: 0.7 },
                        vec![vec![0.0, 1.0]],
                        vec![0.25],
                    )
                    .unwrap(),
                ],
                0.5,
            )
            .unwrap(),
        );
        let j = m.to_json(ScaleInfo { offset: 1.0, factor: 3.0 }, true);
        let text = serde_json::to_string(&j).unwrap();
        let back: ModelJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
        assert_eq!(Model::from_json(&back).unwrap(), m);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["type", "C", "M", "classifier", "components"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    proptest! {
        #[test]
        fn classify_invariant_to_positive_scaling(
            w in proptest::collection::vec(-1.0f64..1.0, 6),
            x in proptest::collection::vec(-1.0f64..1.0, 2),
            s in 0.01f64..100.0,
        ) {
            let g = LinearClassifier::new(w.chunks(2).map(|c| c.to_vec()).collect()).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
            // scaling changes rounding only; compare the scores that decide the argmax
            let k1 = g.classify(&x).unwrap();
            let k2 = g.classify(&xs).unwrap();
            let s1 = dot(&g.weights()[k1], &x);
            let s2 = dot(&g.weights()[k2], &x);
            prop_assert!((s1 - s2).abs() <= 1e-12);
        }

        #[test]
        fn switching_loss_lower_bounds_pws_loss(
            w in proptest::collection::vec(-1.0f64..1.0, 6),
            v in proptest::collection::vec(-2.0f64..2.0, 6),
            x in proptest::collection::vec(-1.0f64..1.0, 2),
            y in -0.5f64..0.5,
            p in 1.0f64..4.0,
        ) {
            let comps: Vec<_> = v.chunks(2).map(|c| ComponentFunction::linear(c.to_vec())).collect();
            let sw = SwitchingModel::new(comps.clone(), 0.5).unwrap();
            let pws = PwsModel::new(
                LinearClassifier::new(w.chunks(2).map(|c| c.to_vec()).collect()).unwrap(),
                comps,
                0.5,
            ).unwrap();
            let l = LossParams::new(p).unwrap();
            let out = pws.predict(&x).unwrap();
            prop_assert!(out.abs() <= 0.5);
            prop_assert!(l.switching_loss(y, &sw.predict(&x).unwrap()) <= l.loss(y, out));
        }
    }
}
