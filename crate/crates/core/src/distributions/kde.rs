use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{invalid, Distribution, DistributionError};

/// Inclusive bounds of an ordinal response scale, e.g. 1..=7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalScale {
    pub lo: i64,
    pub hi: i64,
}

impl Default for OrdinalScale {
    fn default() -> Self {
        OrdinalScale { lo: 1, hi: 7 }
    }
}

impl OrdinalScale {
    pub fn new(lo: i64, hi: i64) -> Result<OrdinalScale, DistributionError> {
        if hi <= lo {
            return Err(invalid("scale", format!("upper bound {hi} must exceed lower bound {lo}")));
        }
        Ok(OrdinalScale { lo, hi })
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.lo..=self.hi).contains(&k)
    }

    /// Affine map onto [-1, 1] with the scale midpoint at 0.
    pub fn to_utility(&self, k: i64) -> f64 {
        (2 * k - self.lo - self.hi) as f64 / (self.hi - self.lo) as f64
    }
}

/// One respondent's answers on the two issues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub response_1: i64,
    pub response_2: i64,
}

/// Kernel bandwidth choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Scott's rule per axis: σ · n^(-1/6).
    Auto,
    Fixed(f64),
}

/// Product-Gaussian kernel density truncated to the square and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    /// Kernel centres `[x, y, weight]`, weights summing to one, sorted.
    centers: Vec<[f64; 3]>,
    bandwidth: [f64; 2],
    norm: f64,
    cumulative: Vec<f64>,
}

fn normal_cdf(t: f64) -> f64 {
    0.5 * (1.0 + libm::erf(t / SQRT_2))
}

impl Kde {
    /// Builds a truncated KDE from weighted centres inside the square.
    pub fn new(centers: Vec<[f64; 3]>, bandwidth: [f64; 2]) -> Result<Kde, DistributionError> {
        if centers.is_empty() {
            return Err(DistributionError::TooFewRecords(0));
        }
        if bandwidth.iter().any(|h| !h.is_finite() || *h <= 0.0) {
            return Err(invalid("bandwidth", format!("must be positive, got {bandwidth:?}")));
        }
        if centers
            .iter()
            .any(|c| c[0].abs() > 1.0 || c[1].abs() > 1.0 || !(c[2] >= 0.0))
        {
            return Err(invalid("centers", "centres must lie in [-1,1]^2 with nonnegative weight"));
        }
        let total: f64 = centers.iter().map(|c| c[2]).sum();
        if total <= 0.0 {
            return Err(invalid("centers", "total kernel weight is zero"));
        }
        let mut centers: Vec<[f64; 3]> = centers.into_iter().map(|c| [c[0], c[1], c[2] / total]).collect();
        centers.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let [hx, hy] = bandwidth;
        // Mass each kernel keeps inside the square.
        let inside: f64 = centers
            .iter()
            .map(|&[cx, cy, w]| {
                let mx = normal_cdf((1.0 - cx) / hx) - normal_cdf((-1.0 - cx) / hx);
                let my = normal_cdf((1.0 - cy) / hy) - normal_cdf((-1.0 - cy) / hy);
                w * mx * my
            })
            .sum();
        let mut acc = 0.0;
        let cumulative = centers
            .iter()
            .map(|c| {
                acc += c[2];
                acc
            })
            .collect();
        Ok(Kde {
            centers,
            bandwidth,
            norm: 1.0 / inside,
            cumulative,
        })
    }

    pub fn bandwidth(&self) -> [f64; 2] {
        self.bandwidth
    }

    pub fn centers(&self) -> &[[f64; 3]] {
        &self.centers
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let [hx, hy] = self.bandwidth;
        let sum: f64 = self
            .centers
            .iter()
            .map(|&[cx, cy, w]| {
                let dx = (x - cx) / hx;
                let dy = (y - cy) / hy;
                w * (-0.5 * (dx * dx + dy * dy)).exp()
            })
            .sum();
        self.norm * sum / (2.0 * PI * hx * hy)
    }

    pub(super) fn transposed(&self) -> Kde {
        let centers = self.centers.iter().map(|&[x, y, w]| [y, x, w]).collect();
        Kde::new(centers, [self.bandwidth[1], self.bandwidth[0]]).expect("transpose of a valid KDE")
    }

    pub(super) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let [hx, hy] = self.bandwidth;
        loop {
            let u: f64 = rng.random();
            let k = self.cumulative.partition_point(|&c| c <= u).min(self.centers.len() - 1);
            let [cx, cy, _] = self.centers[k];
            let zx: f64 = StandardNormal.sample(rng);
            let zy: f64 = StandardNormal.sample(rng);
            let (x, y) = (cx + hx * zx, cy + hy * zy);
            if x.abs() <= 1.0 && y.abs() <= 1.0 {
                return [x, y];
            }
        }
    }
}

/// Gaussian KDE of discrete survey responses mapped onto [-1,1]².
///
/// Identical responses are pooled into one weighted kernel and centres are
/// sorted, so the estimate does not depend on record order.
pub fn kde_from_survey(
    records: &[SurveyRecord],
    bandwidth: Bandwidth,
    scale: OrdinalScale,
) -> Result<Distribution, DistributionError> {
    if records.len() < 2 {
        return Err(DistributionError::TooFewRecords(records.len()));
    }
    let mut counts: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        for v in [r.response_1, r.response_2] {
            if !scale.contains(v) {
                return Err(DistributionError::OutOfScale {
                    line: i + 1,
                    value: v,
                    lo: scale.lo,
                    hi: scale.hi,
                });
            }
        }
        *counts.entry((r.response_1, r.response_2)).or_default() += 1;
    }
    let h = match bandwidth {
        Bandwidth::Fixed(h) => {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid("bandwidth", format!("must be positive, got {h}")));
            }
            [h, h]
        }
        Bandwidth::Auto => {
            let n = records.len() as f64;
            let factor = n.powf(-1.0 / 6.0);
            let mut h = [0.0; 2];
            for (axis, slot) in h.iter_mut().enumerate() {
                let values = counts.iter().map(|(&(a, b), &c)| {
                    let k = if axis == 0 { a } else { b };
                    (scale.to_utility(k), c as f64)
                });
                let mean = values.clone().map(|(v, c)| v * c).sum::<f64>() / n;
                let var = values.map(|(v, c)| c * (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                if var <= 0.0 {
                    return Err(DistributionError::ZeroVariance { issue: axis + 1 });
                }
                *slot = var.sqrt() * factor;
            }
            h
        }
    };
    let centers = counts
        .iter()
        .map(|(&(a, b), &c)| [scale.to_utility(a), scale.to_utility(b), c as f64])
        .collect();
    Ok(Distribution::Kde(Kde::new(centers, h)?))
}
