//! Monte Carlo summaries, log-log order fits and one-dimensional W2.

use crate::error::{Error, Result};
use crate::samplers::Snapshot;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean with a 95% CLT half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub ci: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let ci = if n > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            Z95 * (var / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, ci, n })
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.ci
    }
}

/// Least-squares line through `(ln h, ln err)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for &(h, err) in points {
        if !(err > 0.0 && err.is_finite()) {
            return Err(Error::NonPositiveError { h, err });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stepsize {h} must be positive"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "order fit needs distinct stepsizes".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(OrderFit {
        slope,
        intercept,
        r2,
        points: points.to_vec(),
    })
}

/// Quantile-coupling estimate of W2 between the empirical law of `samples`
/// and the law with quantile function `quantile`, using the midpoints
/// `(i - 1/2)/M` as quantile levels.
pub fn w2_1d(samples: &[f64], quantile: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let q = quantile((i as f64 + 0.5) / m);
            (x - q) * (x - q)
        })
        .sum();
    Ok((sum / m).sqrt())
}

/// One row of a second-moment trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPoint {
    pub n: u64,
    pub t: f64,
    pub mean_sq: f64,
    pub ci: f64,
}

/// Per-time mean of `|Y_n|^2` across chains with a 95% CI. All chains must
/// share the recording schedule.
pub fn second_moment_trace<S: AsRef<[Snapshot]>>(chains: &[S]) -> Result<Vec<MomentPoint>> {
    let first = chains.first().ok_or(Error::EmptyInput)?.as_ref();
    for chain in chains {
        let c = chain.as_ref();
        if c.len() != first.len() || c.iter().zip(first).any(|(a, b)| a.n != b.n) {
            return Err(Error::RaggedSchedule);
        }
    }
    let mut values = vec![0.0; chains.len()];
    first
        .iter()
        .enumerate()
        .map(|(k, snap)| {
            for (v, chain) in values.iter_mut().zip(chains) {
                *v = chain.as_ref()[k].x.iter().map(|x| x * x).sum();
            }
            let s = MeanCi::from_slice(&values)?;
            Ok(MomentPoint {
                n: snap.n,
                t: snap.t,
                mean_sq: s.mean,
                ci: s.ci,
            })
        })
        .collect()
}
