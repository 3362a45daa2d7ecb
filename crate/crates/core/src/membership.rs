//! Pairwise membership providers.
//!
//! Raw route metrics (delay, load, lifetime) are normalized into benefits in
//! `[0, 1]`, where larger is always better. From there two providers build a
//! [`PairwiseMatrix`]:
//!
//! * desirability-ratio: a fuzzy rule system scores each route, and
//!   `p[i][j] = s_j / max(s_i, s_j)`. Preferences are transitive.
//! * metric-majority: `p[i][j]` is the share of metrics on which route `j`
//!   beats route `i` (ties count half). Preferences can cycle.
//!
//! A third provider passes an explicit matrix through unchanged.

use crate::error::{Error, Result};
use crate::rank::{PairwiseMatrix, RouteId};

#[derive(Debug, Clone, PartialEq)]
pub struct RouteMetrics {
    pub route_id: RouteId,
    /// Milliseconds.
    pub delay_ms: f64,
    /// Utilization fraction in `[0, 1]`.
    pub load: f64,
    /// Seconds.
    pub lifetime_s: f64,
}

impl RouteMetrics {
    pub fn new(
        route_id: impl Into<RouteId>,
        delay_ms: f64,
        load: f64,
        lifetime_s: f64,
    ) -> Result<Self> {
        let m = RouteMetrics {
            route_id: route_id.into(),
            delay_ms,
            load,
            lifetime_s,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let id = &self.route_id;
        if !(self.delay_ms.is_finite() && self.delay_ms >= 0.0) {
            return Err(Error::invariant(format!(
                "route {id}: delay {} must be finite and non-negative",
                self.delay_ms
            )));
        }
        if !(0.0..=1.0).contains(&self.load) {
            return Err(Error::invariant(format!(
                "route {id}: load {} is outside [0, 1]",
                self.load
            )));
        }
        if !(self.lifetime_s.is_finite() && self.lifetime_s >= 0.0) {
            return Err(Error::invariant(format!(
                "route {id}: lifetime {} must be finite and non-negative",
                self.lifetime_s
            )));
        }
        Ok(())
    }
}

/// Normalization ranges for the metrics that are not already fractions.
///
/// Load needs no bounds: its benefit is `1 - load`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricBounds {
    pub delay_ms: (f64, f64),
    pub lifetime_s: (f64, f64),
}

impl MetricBounds {
    pub fn new(delay_ms: (f64, f64), lifetime_s: (f64, f64)) -> Result<Self> {
        for (name, (lo, hi)) in [("delay", delay_ms), ("lifetime", lifetime_s)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invariant(format!(
                    "{name} bounds ({lo}, {hi}) need finite min < max"
                )));
            }
        }
        Ok(MetricBounds {
            delay_ms,
            lifetime_s,
        })
    }

    /// Bounds spanning a candidate set, widened by 10% of the span on each
    /// side. A zero span is widened by 10% of the magnitude (at least 0.1).
    pub fn fitted(metrics: &[RouteMetrics]) -> Result<Self> {
        if metrics.is_empty() {
            return Err(Error::invariant("cannot fit bounds to an empty route set"));
        }
        let widen = |values: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            let span = hi - lo;
            let pad = if span > 0.0 {
                0.1 * span
            } else {
                0.1 * hi.abs().max(1.0)
            };
            (lo - pad, hi + pad)
        };
        let delay = widen(&mut metrics.iter().map(|m| m.delay_ms));
        let lifetime = widen(&mut metrics.iter().map(|m| m.lifetime_s));
        Self::new(delay, lifetime)
    }
}

/// Per-metric benefits in `[0, 1]`; 1 is always best.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenefitVector {
    pub delay: f64,
    pub load: f64,
    pub lifetime: f64,
}

impl BenefitVector {
    pub fn new(delay: f64, load: f64, lifetime: f64) -> Result<Self> {
        let v = BenefitVector {
            delay,
            load,
            lifetime,
        };
        if v.to_array().iter().all(|x| (0.0..=1.0).contains(x)) {
            Ok(v)
        } else {
            Err(Error::invariant(format!(
                "benefit vector {:?} has a component outside [0, 1]",
                v.to_array()
            )))
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.delay, self.load, self.lifetime]
    }
}

pub fn normalize(m: &RouteMetrics, b: &MetricBounds) -> BenefitVector {
    let (dmin, dmax) = b.delay_ms;
    let (lmin, lmax) = b.lifetime_s;
    BenefitVector {
        delay: ((dmax - m.delay_ms) / (dmax - dmin)).clamp(0.0, 1.0),
        load: (1.0 - m.load).clamp(0.0, 1.0),
        lifetime: ((m.lifetime_s - lmin) / (lmax - lmin)).clamp(0.0, 1.0),
    }
}

/// Triangular fuzzy set. `left == peak` or `peak == right` gives a shoulder.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Triangle {
    left: f64,
    peak: f64,
    right: f64,
}

impl Triangle {
    const fn new(left: f64, peak: f64, right: f64) -> Self {
        Triangle { left, peak, right }
    }

    fn degree(&self, x: f64) -> f64 {
        if x == self.peak {
            1.0
        } else if x <= self.left || x >= self.right {
            0.0
        } else if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }

    fn scaled(&self, k: f64) -> Self {
        Triangle::new(self.left * k, self.peak * k, self.right * k)
    }
}

/// Linguistic level of a benefit component, ordered `Low < Medium < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    fn set(self) -> Triangle {
        match self {
            Level::Low => Triangle::new(0.0, 0.0, 0.5),
            Level::Medium => Triangle::new(0.0, 0.5, 1.0),
            Level::High => Triangle::new(0.5, 1.0, 1.0),
        }
    }

    fn quality(self) -> Quality {
        match self {
            Level::Low => Quality::Poor,
            Level::Medium => Quality::Fair,
            Level::High => Quality::Good,
        }
    }
}

/// Output term of the desirability system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    Poor,
    Fair,
    Good,
}

impl Quality {
    const ALL: [Quality; 3] = [Quality::Poor, Quality::Fair, Quality::Good];

    fn set(self) -> Triangle {
        match self {
            Quality::Poor => Triangle::new(0.0, 0.0, 0.4),
            Quality::Fair => Triangle::new(0.2, 0.5, 0.8),
            Quality::Good => Triangle::new(0.6, 1.0, 1.0),
        }
    }
}

/// Degrees of `x` in LOW, MEDIUM and HIGH, in that order.
pub fn fuzzify(x: f64) -> [f64; 3] {
    Level::ALL.map(|level| level.set().degree(x))
}

/// The 27 rules over (delay, load, lifetime) levels. Each rule concludes the
/// quality matching the median of its three antecedent levels.
pub fn rule_base() -> Vec<([Level; 3], Quality)> {
    let mut rules = Vec::with_capacity(27);
    for d in Level::ALL {
        for l in Level::ALL {
            for t in Level::ALL {
                let mut sorted = [d, l, t];
                sorted.sort();
                rules.push(([d, l, t], sorted[1].quality()));
            }
        }
    }
    rules
}

/// Samples per unit of the output universe.
const RESOLUTION: usize = 1000;

/// Fuzzy desirability of a benefit vector, in `(0, 1)`.
///
/// Rule strength is the product of the antecedent degrees, each consequent
/// set is scaled by its rule strength and the scaled sets are summed. The
/// result is the discrete centroid of that sum over `[0, 1]`, sampled every
/// 0.001.
///
/// Because LOW/MEDIUM/HIGH partition `[0, 1]`, raising one benefit moves rule
/// weight only toward higher medians, and the centroid of the additive
/// aggregate follows. The result is therefore non-decreasing in every
/// component. Min firing with clipped, max-aggregated consequents is not:
/// at `(0, 0, 0.25)` only POOR fires, at half strength, and the clipped
/// POOR set has a higher centroid than the full one reached at `(0, 0, 0.5)`.
pub fn desirability(v: &BenefitVector) -> f64 {
    let degrees = v.to_array().map(fuzzify);
    let mut weight = [0.0f64; 3];
    for (antecedent, quality) in rule_base() {
        let strength: f64 = antecedent
            .iter()
            .zip(&degrees)
            .map(|(level, d)| d[*level as usize])
            .product();
        weight[quality as usize] += strength;
    }
    let total: f64 = weight.iter().sum();
    let weight = weight.map(|w| w / total);

    // The centroid of sum_q w_q * set_q is assembled from per-set masses and
    // moments about the midpoint of the universe.
    let mut mass = 0.0;
    let mut moment = 0.0;
    for (quality, w) in Quality::ALL.iter().zip(weight) {
        if w > 0.0 {
            let (m, mo) = quality.discrete_moments();
            mass += w * m;
            moment += w * mo;
        }
    }
    0.5 + moment / (mass * RESOLUTION as f64)
}

impl Quality {
    /// Sample mass of the set and its first moment about the midpoint, in
    /// sample units. Sets are evaluated in sample units so that mirror-image
    /// samples of a symmetric set get bit-identical degrees, and the moment
    /// is summed over mirror pairs so it vanishes exactly for such a set.
    fn discrete_moments(self) -> (f64, f64) {
        let set = self.set().scaled(RESOLUTION as f64);
        let degree = |k: usize| set.degree(k as f64);
        let mid = RESOLUTION / 2;
        let mass = (0..=RESOLUTION).map(degree).sum();
        let moment = (1..=mid)
            .map(|d| d as f64 * (degree(mid + d) - degree(mid - d)))
            .sum();
        (mass, moment)
    }
}

/// Desirability-ratio construction: `p[i][j] = s_j / max(s_i, s_j)`.
pub fn pairwise_from_scores(scores: &[f64], ids: &[RouteId]) -> Result<PairwiseMatrix> {
    if scores.len() != ids.len() {
        return Err(Error::invariant(format!(
            "{} scores for {} routes",
            scores.len(),
            ids.len()
        )));
    }
    if let Some((index, &value)) = scores
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(Error::NonPositiveScore { index, value });
    }
    let rows = (0..scores.len())
        .map(|i| {
            (0..scores.len())
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        scores[j] / scores[i].max(scores[j])
                    }
                })
                .collect()
        })
        .collect();
    PairwiseMatrix::new(ids.to_vec(), rows)
}

/// Metric-majority construction: `p[i][j]` is the fraction of metrics on
/// which route `j` has the strictly larger benefit, ties counting one half.
pub fn pairwise_majority(table: &[BenefitVector], ids: &[RouteId]) -> Result<PairwiseMatrix> {
    if table.len() != ids.len() {
        return Err(Error::invariant(format!(
            "{} benefit vectors for {} routes",
            table.len(),
            ids.len()
        )));
    }
    let rows = table
        .iter()
        .enumerate()
        .map(|(i, vi)| {
            table
                .iter()
                .enumerate()
                .map(|(j, vj)| {
                    if i == j {
                        return 1.0;
                    }
                    let (a, b) = (vi.to_array(), vj.to_array());
                    let points: f64 = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| {
                            if y > x {
                                1.0
                            } else if y == x {
                                0.5
                            } else {
                                0.0
                            }
                        })
                        .sum();
                    points / a.len() as f64
                })
                .collect()
        })
        .collect();
    PairwiseMatrix::new(ids.to_vec(), rows)
}

/// Source of pairwise memberships for a set of candidate routes.
#[derive(Debug, Clone, PartialEq)]
pub enum MembershipProvider {
    /// A fixed matrix aligned by position with the candidates.
    Explicit(PairwiseMatrix),
    /// Desirability scores turned into ratios. `None` fits the bounds to the
    /// candidate set each time.
    DesirabilityRatio(Option<MetricBounds>),
    /// Per-metric pairwise majority. `None` fits the bounds as above.
    MetricMajority(Option<MetricBounds>),
}

impl MembershipProvider {
    pub fn name(&self) -> &'static str {
        match self {
            MembershipProvider::Explicit(_) => "explicit",
            MembershipProvider::DesirabilityRatio(_) => "ratio",
            MembershipProvider::MetricMajority(_) => "majority",
        }
    }

    /// Pairwise matrix over `metrics`, labelled with their route ids.
    pub fn pairwise(&self, metrics: &[RouteMetrics]) -> Result<PairwiseMatrix> {
        let ids: Vec<RouteId> = metrics.iter().map(|m| m.route_id.clone()).collect();
        match self {
            MembershipProvider::Explicit(p) => {
                if p.len() != metrics.len() {
                    return Err(Error::invariant(format!(
                        "explicit matrix covers {} routes but {} were offered",
                        p.len(),
                        metrics.len()
                    )));
                }
                p.clone().relabel(ids)
            }
            MembershipProvider::DesirabilityRatio(bounds) => {
                let scores = desirability_scores(metrics, bounds.as_ref())?;
                pairwise_from_scores(&scores, &ids)
            }
            MembershipProvider::MetricMajority(bounds) => {
                let benefits = benefits(metrics, bounds.as_ref())?;
                pairwise_majority(&benefits, &ids)
            }
        }
    }
}

/// Benefit vectors under the given bounds, or bounds fitted to `metrics`.
pub fn benefits(
    metrics: &[RouteMetrics],
    bounds: Option<&MetricBounds>,
) -> Result<Vec<BenefitVector>> {
    let bounds = match bounds {
        Some(b) => *b,
        None => MetricBounds::fitted(metrics)?,
    };
    Ok(metrics.iter().map(|m| normalize(m, &bounds)).collect())
}

pub fn desirability_scores(
    metrics: &[RouteMetrics],
    bounds: Option<&MetricBounds>,
) -> Result<Vec<f64>> {
    Ok(benefits(metrics, bounds)?
        .iter()
        .map(desirability)
        .collect())
}
