//! Samples, clipping, ℓp risks and empirical pseudo-metrics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::HALF_RANGE;

/// A function evaluated on the points of a sample.
pub type FunctionValues = Vec<f64>;

/// Affine map from stored targets back to raw units: `raw = offset + factor * y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleInfo {
    pub offset: f64,
    pub factor: f64,
}

impl Default for ScaleInfo {
    fn default() -> Self {
        ScaleInfo {
            offset: 0.0,
            factor: 1.0,
        }
    }
}

impl ScaleInfo {
    pub fn to_raw(&self, y: f64) -> f64 {
        self.offset + self.factor * y
    }

    pub fn from_raw(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.factor
    }

    /// Converts an ℓp quantity computed in stored units to raw units.
    pub fn lp_to_raw(&self, value: f64, p: f64) -> f64 {
        value * self.factor.abs().powf(p)
    }
}

/// Immutable regression sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    half_range: f64,
    scale: ScaleInfo,
}

impl Dataset {
    /// Builds a sample whose half-range is the largest `|y|` (or 1/2 when all
    /// targets vanish).
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        let m = ys.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
        let m = if m > 0.0 { m } else { HALF_RANGE };
        Self::with_half_range(xs, ys, m)
    }

    pub fn with_half_range(xs: Vec<Vec<f64>>, ys: Vec<f64>, half_range: f64) -> Result<Self> {
        if ys.is_empty() {
            return Err(Error::input("dataset must contain at least one sample"));
        }
        if xs.len() != ys.len() {
            return Err(Error::input(format!(
                "{} inputs but {} outputs",
                xs.len(),
                ys.len()
            )));
        }
        if !(half_range > 0.0 && half_range.is_finite()) {
            return Err(Error::param("half-range M must be positive"));
        }
        let d = xs[0].len();
        for (i, x) in xs.iter().enumerate() {
            if x.len() != d {
                return Err(Error::input(format!(
                    "input {i} has dimension {} (expected {d})",
                    x.len()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("input {i} is not finite")));
            }
        }
        for (i, y) in ys.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::input(format!("output {i} is not finite")));
            }
            if y.abs() > half_range {
                return Err(Error::input(format!(
                    "output {i} = {y} exceeds half-range {half_range}"
                )));
            }
        }
        Ok(Dataset {
            xs,
            ys,
            half_range,
            scale: ScaleInfo::default(),
        })
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs[0].len()
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn scale(&self) -> ScaleInfo {
        self.scale
    }

    /// Largest input norm `max_i ‖x_i‖₂`.
    pub fn input_radius(&self) -> f64 {
        self.xs
            .iter()
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Copy with a constant feature `1` appended to every input.
    pub fn with_bias_feature(&self) -> Dataset {
        let xs = self
            .xs
            .iter()
            .map(|x| {
                let mut x = x.clone();
                x.push(1.0);
                x
            })
            .collect();
        Dataset {
            xs,
            ..self.clone()
        }
    }

    /// Keeps the listed rows, in order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            xs: rows.iter().map(|&i| self.xs[i].clone()).collect(),
            ys: rows.iter().map(|&i| self.ys[i]).collect(),
            half_range: self.half_range,
            scale: self.scale,
        }
    }

    /// Targets mapped back to raw units.
    pub fn raw_ys(&self) -> Vec<f64> {
        self.ys.iter().map(|&y| self.scale.to_raw(y)).collect()
    }

    /// Reads a `x1,...,xd,y` CSV file.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Data {
                line: 1,
                msg: e.to_string(),
            })?
            .clone();
        if headers.len() < 2 || headers.get(headers.len() - 1) != Some("y") {
            return Err(Error::Data {
                line: 1,
                msg: "header must be x1,...,xd,y".into(),
            });
        }
        let d = headers.len() - 1;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Data {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != d + 1 {
                return Err(Error::Data {
                    line,
                    msg: format!("expected {} fields, found {}", d + 1, rec.len()),
                });
            }
            let mut row = Vec::with_capacity(d + 1);
            for field in rec.iter() {
                let v: f64 = field.parse().map_err(|_| Error::Data {
                    line,
                    msg: format!("cannot parse {field:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Data {
                        line,
                        msg: "NaN and infinite values are not allowed".into(),
                    });
                }
                row.push(v);
            }
            ys.push(row.pop().unwrap());
            xs.push(row);
        }
        if ys.is_empty() {
            return Err(Error::input("CSV file has no data rows"));
        }
        Dataset::new(xs, ys)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        w.write_record(&header).map_err(csv_io)?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            let row: Vec<String> = x
                .iter()
                .chain(std::iter::once(y))
                .map(|v| format!("{v:?}"))
                .collect();
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// ℓp loss exponent, `p ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    p: f64,
}

impl LossParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::param(format!("loss exponent p must be in [1, inf), got {p}")));
        }
        Ok(LossParams { p })
    }

    pub fn squared() -> Self {
        LossParams { p: 2.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn loss(&self, y: f64, t: f64) -> f64 {
        let r = (y - t).abs();
        if self.p == 2.0 {
            r * r
        } else if self.p == 1.0 {
            r
        } else {
            r.powf(self.p)
        }
    }

    /// Switching loss `min_k |y - t_k|^p`.
    #[inline]
    pub fn switching_loss(&self, y: f64, ts: &[f64]) -> f64 {
        ts.iter()
            .map(|&t| self.loss(y, t))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Truncation of `t` to `[-m, m]`.
pub fn clip(t: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::param(format!("clip level M must be positive, got {m}")));
    }
    Ok(clip_unchecked(t, m))
}

#[inline]
pub(crate) fn clip_unchecked(t: f64, m: f64) -> f64 {
    if t < -m {
        -m
    } else if t > m {
        m
    } else {
        t
    }
}

/// Maps targets affinely onto `[-1/2, 1/2]` (midrange to 0, range to 1).
///
/// A constant target vector maps to 0 with factor 1. The returned
/// [`ScaleInfo`] composes with any scaling already recorded on `raw`.
pub fn rescale_dataset(raw: &Dataset) -> Result<Dataset> {
    if raw.is_empty() {
        return Err(Error::input("cannot rescale an empty dataset"));
    }
    let (lo, hi) = raw
        .ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let center = 0.5 * (lo + hi);
    let range = hi - lo;
    let factor = if range > 0.0 { range } else { 1.0 };
    let ys = raw
        .ys
        .iter()
        .map(|&y| clip_unchecked((y - center) / factor, HALF_RANGE))
        .collect();
    let prev = raw.scale;
    Ok(Dataset {
        xs: raw.xs.clone(),
        ys,
        half_range: HALF_RANGE,
        scale: ScaleInfo {
            offset: prev.offset + prev.factor * center,
            factor: prev.factor * factor,
        },
    })
}

/// `(1/n) Σ |y_i - f_i|^p`; values are used as given (no clipping).
pub fn empirical_lp_risk(fvals: &[f64], data: &Dataset, loss: LossParams) -> Result<f64> {
    if fvals.len() != data.len() {
        return Err(Error::input(format!(
            "{} function values for {} samples",
            fvals.len(),
            data.len()
        )));
    }
    let total: f64 = fvals
        .iter()
        .zip(&data.ys)
        .map(|(&f, &y)| loss.loss(y, f))
        .sum();
    Ok(total / data.len() as f64)
}

/// `(1/n) Σ_i min_k |y_i - f_k(x_i)|^p` for `C` value lists.
pub fn empirical_switching_risk(
    fvals_per_mode: &[FunctionValues],
    data: &Dataset,
    loss: LossParams,
) -> Result<f64> {
    if fvals_per_mode.is_empty() {
        return Err(Error::input("switching risk needs at least one mode"));
    }
    for (k, f) in fvals_per_mode.iter().enumerate() {
        if f.len() != data.len() {
            return Err(Error::input(format!(
                "mode {k}: {} function values for {} samples",
                f.len(),
                data.len()
            )));
        }
    }
    let total: f64 = data
        .ys
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            fvals_per_mode
                .iter()
                .map(|f| loss.loss(y, f[i]))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / data.len() as f64)
}

/// Exponent of an empirical pseudo-metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// `d_q` for finite `q ≥ 1`.
    Lq(f64),
    /// `d_∞`, the maximum absolute deviation.
    Inf,
}

impl Norm {
    pub fn new(q: f64) -> Result<Self> {
        if q == f64::INFINITY {
            Ok(Norm::Inf)
        } else if q >= 1.0 && q.is_finite() {
            Ok(Norm::Lq(q))
        } else {
            Err(Error::param(format!("pseudo-metric exponent q must be >= 1, got {q}")))
        }
    }

    /// `C^{1/q}` (1 for `q = ∞`).
    pub fn mode_factor(&self, c: usize) -> f64 {
        match *self {
            Norm::Lq(q) => (c as f64).powf(1.0 / q),
            Norm::Inf => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Norm::Lq(q) if !(q >= 1.0 && q.is_finite()) => Err(Error::param(format!(
                "pseudo-metric exponent q must be >= 1, got {q}"
            ))),
            _ => Ok(()),
        }
    }

    /// Distance without validation; lengths must already agree.
    #[inline]
    pub(crate) fn dist(&self, f: &[f64], g: &[f64]) -> f64 {
        match *self {
            Norm::Inf => f
                .iter()
                .zip(g)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            Norm::Lq(q) => {
                let n = f.len() as f64;
                if q == 2.0 {
                    (f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n).sqrt()
                } else if q == 1.0 {
                    f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>() / n
                } else {
                    (f.iter().zip(g).map(|(a, b)| (a - b).abs().powf(q)).sum::<f64>() / n)
                        .powf(1.0 / q)
                }
            }
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::Lq(q) => write!(f, "{q}"),
            Norm::Inf => write!(f, "inf"),
        }
    }
}

/// Empirical pseudo-metric `d_q(f, g)` on a shared sample.
pub fn pseudo_metric(f: &[f64], g: &[f64], q: Norm) -> Result<f64> {
    q.validate()?;
    if f.len() != g.len() {
        return Err(Error::input(format!(
            "function value lists differ in length ({} vs {})",
            f.len(),
            g.len()
        )));
    }
    if f.is_empty() {
        return Err(Error::input("pseudo-metric needs at least one point"));
    }
    Ok(q.dist(f, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(ys: &[f64]) -> Dataset {
        Dataset::new(ys.iter().map(|_| vec![1.0]).collect(), ys.to_vec()).unwrap()
    }

    #[test]
    fn clip_branches() {
        assert_eq!(clip(0.7, 0.5).unwrap(), 0.5);
        assert_eq!(clip(0.3, 0.5).unwrap(), 0.3);
        assert_eq!(clip(-0.7, 0.5).unwrap(), -0.5);
        assert!(matches!(clip(0.1, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(clip(0.1, -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn rescale_examples() {
        let r = rescale_dataset(&ds(&[-2.0, 2.0])).unwrap();
        assert_eq!(r.ys(), &[-0.5, 0.5]);
        assert_eq!(r.scale(), ScaleInfo { offset: 0.0, factor: 4.0 });
        assert_eq!(r.half_range(), 0.5);

        let r = rescale_dataset(&ds(&[0.0, 1.0])).unwrap();
        assert_eq!(r.ys(), &[-0.5, 0.5]);
        assert_eq!(r.scale(), ScaleInfo { offset: 0.5, factor: 1.0 });

        let r = rescale_dataset(&ds(&[0.1])).unwrap();
        assert_eq!(r.ys(), &[0.0]);
        assert_eq!(r.scale().factor, 1.0);
        assert!((r.raw_ys()[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rescale_composes_with_previous_scaling() {
        let once = rescale_dataset(&ds(&[3.0, 5.0, 11.0])).unwrap();
        let twice = rescale_dataset(&once).unwrap();
        for (a, b) in twice.raw_ys().iter().zip([3.0, 5.0, 11.0]) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(matches!(
            Dataset::new(vec![], vec![]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn lp_risk_examples() {
        let l2 = LossParams::squared();
        let d = ds(&[0.4]);
        assert!((empirical_lp_risk(&[0.1], &d, l2).unwrap() - 0.09).abs() < 1e-15);
        let d = ds(&[0.4, -0.2]);
        let l1 = LossParams::new(1.0).unwrap();
        assert!((empirical_lp_risk(&[0.1, -0.2], &d, l1).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(empirical_lp_risk(&[0.4, -0.2], &d, l1).unwrap(), 0.0);
        assert!(matches!(
            empirical_lp_risk(&[0.1], &d, l1),
            Err(Error::InvalidInput(_))
        ));
        assert!(LossParams::new(0.5).is_err());
    }

    #[test]
    fn switching_risk_examples() {
        let d = ds(&[0.4, -0.2]);
        let l2 = LossParams::squared();
        let modes = vec![vec![0.1, 0.0], vec![0.5, -0.2]];
        let r = empirical_switching_risk(&modes, &d, l2).unwrap();
        assert!((r - 0.005).abs() < 1e-15);

        let single = vec![vec![0.1, 0.0]];
        assert_eq!(
            empirical_switching_risk(&single, &d, l2).unwrap(),
            empirical_lp_risk(&single[0], &d, l2).unwrap()
        );
        let twin = vec![vec![0.1, 0.0], vec![0.1, 0.0]];
        assert_eq!(
            empirical_switching_risk(&twin, &d, l2).unwrap(),
            empirical_lp_risk(&twin[0], &d, l2).unwrap()
        );
        assert!(matches!(
            empirical_switching_risk(&[], &d, l2),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn pseudo_metric_examples() {
        let z = [0.0; 3];
        let o = [1.0; 3];
        assert_eq!(pseudo_metric(&z, &o, Norm::Lq(2.0)).unwrap(), 1.0);
        assert_eq!(pseudo_metric(&z, &o, Norm::Inf).unwrap(), 1.0);
        let d = pseudo_metric(&[0.0, 1.0], &[0.0, 0.0], Norm::Lq(2.0)).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        for q in [Norm::Lq(1.0), Norm::Lq(3.5), Norm::Inf] {
            assert_eq!(pseudo_metric(&o, &o, q).unwrap(), 0.0);
        }
        assert!(matches!(
            pseudo_metric(&z, &[0.0], Norm::Inf),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            pseudo_metric(&z, &o, Norm::Lq(0.5)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(Norm::new(f64::INFINITY).unwrap() == Norm::Inf);
    }

    #[test]
    fn csv_rejects_nan_with_line_number() {
        let text = "x1,x2,y\n1,2,0.5\n1,NaN,0.1\n";
        match Dataset::from_csv_reader(text.as_bytes()) {
            Err(Error::Data { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_header = "a,b\n1,2\n";
        assert!(matches!(
            Dataset::from_csv_reader(bad_header.as_bytes()),
            Err(Error::Data { line: 1, .. })
        ));
        let ok = Dataset::from_csv_reader("x1,y\n1,0.25\n-2,0.5\n".as_bytes()).unwrap();
        assert_eq!(ok.dim(), 1);
        assert_eq!(ok.ys(), &[0.25, 0.5]);
        let mut buf = Vec::new();
        ok.write_csv(&mut buf).unwrap();
        assert_eq!(Dataset::from_csv_reader(buf.as_slice()).unwrap(), ok);
    }

    proptest! {
        #[test]
        fn clipping_never_increases_loss(y in -0.5f64..=0.5, t in -5.0f64..5.0, p in 1.0f64..6.0) {
            let l = LossParams::new(p).unwrap();
            prop_assert!(l.loss(y, clip_unchecked(t, 0.5)) <= l.loss(y, t));
        }

        #[test]
        fn switching_loss_is_clippable(y in -0.5f64..=0.5, ts in proptest::collection::vec(-3.0f64..3.0, 1..6), p in 1.0f64..4.0) {
            let l = LossParams::new(p).unwrap();
            let clipped: Vec<f64> = ts.iter().map(|&t| clip_unchecked(t, 0.5)).collect();
            prop_assert!(l.switching_loss(y, &clipped) <= l.switching_loss(y, &ts));
        }

        #[test]
        fn pseudo_metric_axioms(
            f in proptest::collection::vec(-1.0f64..1.0, 5),
            g in proptest::collection::vec(-1.0f64..1.0, 5),
            h in proptest::collection::vec(-1.0f64..1.0, 5),
            q in 1.0f64..8.0,
        ) {
            let norm = Norm::Lq(q);
            let fg = pseudo_metric(&f, &g, norm).unwrap();
            prop_assert!(fg >= 0.0);
            prop_assert!((fg - pseudo_metric(&g, &f, norm).unwrap()).abs() < 1e-12);
            let fh = pseudo_metric(&f, &h, norm).unwrap();
            let hg = pseudo_metric(&h, &g, norm).unwrap();
            prop_assert!(fg <= fh + hg + 1e-12);
            prop_assert!(fg <= pseudo_metric(&f, &g, Norm::Inf).unwrap() + 1e-12);
        }

        #[test]
        fn rescale_round_trips(ys in proptest::collection::vec(-1e3f64..1e3, 1..30)) {
            let raw = ds_any(&ys);
            let r = rescale_dataset(&raw).unwrap();
            prop_assert!(r.ys().iter().all(|y| y.abs() <= 0.5));
            let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
            for (a, b) in r.raw_ys().iter().zip(&ys) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    fn ds_any(ys: &[f64]) -> Dataset {
        Dataset::new(ys.iter().map(|_| vec![0.0]).collect(), ys.to_vec()).unwrap()
    }
}
