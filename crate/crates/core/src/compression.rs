//! The compression map `x -> m/x` and the scalar functionals built on it:
//! mass, gap, the squared-gap expansion and the two-sided integer estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative tolerance for [`gap_identity_residual`].
pub const GAP_IDENTITY_REL_TOL: f64 = 1e-10;

/// A tuple of nonzero, pairwise distinct reals, `n >= 2`.
///
/// Distinctness is an exact bitwise comparison; two coordinates that differ
/// in the last ulp are distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PointN {
    coords: Vec<f64>,
}

impl PointN {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension must be at least 2, got {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        if coords.contains(&0.0) {
            return Err(Error::InvalidInput("zero coordinate".into()));
        }
        let mut sorted = coords.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "duplicate coordinate {}",
                w[0]
            )));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        compensated_sum(self.coords.iter().map(|c| c * c)).sqrt()
    }

    fn min(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max(&self) -> f64 {
        self.coords
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every coordinate is a positive integer.
    pub fn is_positive_integer(&self) -> bool {
        self.coords.iter().all(|&c| c > 0.0 && c.fract() == 0.0)
    }
}

impl TryFrom<Vec<f64>> for PointN {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        PointN::new(coords)
    }
}

impl From<PointN> for Vec<f64> {
    fn from(p: PointN) -> Self {
        p.coords
    }
}

/// Where a compression scale came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScaleOrigin {
    Explicit,
    DerivedFromS { s: usize },
}

/// Compression scale `m` with `0 < m <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    m: f64,
    origin: ScaleOrigin,
}

impl Scale {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0 && m <= 1.0) {
            return Err(Error::InvalidInput(format!("scale m = {m} outside (0, 1]")));
        }
        Ok(Self {
            m,
            origin: ScaleOrigin::Explicit,
        })
    }

    /// `m = ln(s)^2 / (4 s)`, the scale used by the circle construction.
    pub fn from_s(s: usize) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidInput(format!("s = {s} gives a zero scale")));
        }
        let ln = (s as f64).ln();
        let m = ln * ln / (4.0 * s as f64);
        let mut scale = Self::new(m)?;
        scale.origin = ScaleOrigin::DerivedFromS { s };
        Ok(scale)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn origin(&self) -> ScaleOrigin {
        self.origin
    }

    /// The same origin with `m` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.m * factor)
    }
}

/// `(m/x_1, ..., m/x_n)`.
///
/// Fails if rounding merges two image coordinates.
pub fn compress(x: &PointN, m: Scale) -> Result<PointN> {
    PointN::new(compressed_coords(x, m))
}

pub(crate) fn compressed_coords(x: &PointN, m: Scale) -> Vec<f64> {
    x.coords.iter().map(|&c| m.m / c).collect()
}

/// `m * sum(1/x_i)`.
pub fn mass(x: &PointN, m: Scale) -> f64 {
    m.m * compensated_sum(x.coords.iter().map(|c| 1.0 / c))
}

/// Squared Euclidean norm of `x - m/x`.
pub fn gap_squared(x: &PointN, m: Scale) -> f64 {
    compensated_sum(x.coords.iter().map(|&c| {
        let d = c - m.m / c;
        d * d
    }))
}

/// Euclidean norm of `x - m/x`.
pub fn gap(x: &PointN, m: Scale) -> f64 {
    gap_squared(x, m).sqrt()
}

/// `sum(x_i^2) - 2 m n + m^2 sum(1/x_i^2)`, the expanded form of `gap^2`.
pub fn gap_squared_expanded(x: &PointN, m: Scale) -> f64 {
    let n = x.dim() as f64;
    let sq = compensated_sum(x.coords.iter().map(|c| c * c));
    let inv_sq = compensated_sum(x.coords.iter().map(|c| 1.0 / (c * c)));
    compensated_sum([sq, -2.0 * m.m * n, m.m * m.m * inv_sq])
}

/// `gap^2` minus its expansion.
pub fn gap_identity_residual(x: &PointN, m: Scale) -> f64 {
    gap_squared(x, m) - gap_squared_expanded(x, m)
}

/// Coefficients `(c0, c1, c2)` of `gap^2` as the polynomial `c0 + c1 m + c2 m^2`.
pub fn gap_squared_coefficients(x: &PointN) -> (f64, f64, f64) {
    let sq = compensated_sum(x.coords.iter().map(|c| c * c));
    let inv_sq = compensated_sum(x.coords.iter().map(|c| 1.0 / (c * c)));
    (sq, -2.0 * x.dim() as f64, inv_sq)
}

/// Exact mass next to the logarithmic lower and upper estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub mass: f64,
    /// False when computed for a tuple outside the positive-integer hypothesis.
    pub in_hypothesis: bool,
}

impl MassBoundsResult {
    pub fn lower_ratio(&self) -> f64 {
        self.mass / self.lower
    }

    pub fn upper_ratio(&self) -> f64 {
        self.mass / self.upper
    }
}

/// Two-sided estimate of `gap^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub gap_squared: f64,
    pub in_hypothesis: bool,
}

impl GapBoundsResult {
    pub fn sandwiched(&self) -> bool {
        self.lower <= self.gap_squared && self.gap_squared <= self.upper
    }
}

fn require_positive_integers(x: &PointN) -> Result<()> {
    if x.is_positive_integer() {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "estimate requires distinct positive integer coordinates".into(),
        ))
    }
}

fn require_positive(x: &PointN) -> Result<()> {
    if x.coords.iter().all(|&c| c > 0.0) {
        Ok(())
    } else {
        Err(Error::Domain(
            "estimate requires positive coordinates".into(),
        ))
    }
}

fn mass_bounds_inner(x: &PointN, m: Scale, in_hypothesis: bool) -> Result<MassBoundsResult> {
    let spread = (x.dim() - 1) as f64;
    let sup = x.max();
    let inf = x.min();
    if sup <= spread {
        return Err(Error::Domain(format!(
            "sup(x) = {sup} must exceed n - 1 = {spread}"
        )));
    }
    Ok(MassBoundsResult {
        lower: -m.m * (1.0 - spread / sup).ln(),
        upper: m.m * (1.0 + spread / inf).ln(),
        mass: mass(x, m),
        in_hypothesis,
    })
}

/// `m log(1 - (n-1)/sup)^-1` and `m log(1 + (n-1)/inf)` next to the mass.
///
/// The estimates hide unknown constants; callers compare ratios.
pub fn mass_bounds(x: &PointN, m: Scale) -> Result<MassBoundsResult> {
    require_positive_integers(x)?;
    mass_bounds_inner(x, m, true)
}

/// [`mass_bounds`] for positive real tuples, flagged out of hypothesis.
pub fn mass_bounds_relaxed(x: &PointN, m: Scale) -> Result<MassBoundsResult> {
    require_positive(x)?;
    mass_bounds_inner(x, m, x.is_positive_integer())
}

fn gap_bounds_inner(x: &PointN, m: Scale, in_hypothesis: bool) -> Result<GapBoundsResult> {
    let n = x.dim() as f64;
    let spread = n - 1.0;
    let inf = x.min();
    let sup = x.max();
    let (inf_sq, sup_sq) = (inf * inf, sup * sup);
    if sup_sq <= spread {
        return Err(Error::Domain(format!(
            "sup(x^2) = {sup_sq} must exceed n - 1 = {spread}"
        )));
    }
    let m2 = m.m * m.m;
    let upper = n * sup_sq + m2 * (1.0 + spread / inf_sq).ln() - 2.0 * m.m * n;
    let lower = n * inf_sq - m2 * (1.0 - spread / sup_sq).ln() - 2.0 * m.m * n;
    Ok(GapBoundsResult {
        lower,
        upper,
        gap_squared: gap_squared(x, m),
        in_hypothesis,
    })
}

/// Term-wise bracket of `gap^2` for distinct positive integer tuples.
pub fn gap_bounds(x: &PointN, m: Scale) -> Result<GapBoundsResult> {
    require_positive_integers(x)?;
    gap_bounds_inner(x, m, true)
}

/// [`gap_bounds`] for positive real tuples, flagged out of hypothesis.
pub fn gap_bounds_relaxed(x: &PointN, m: Scale) -> Result<GapBoundsResult> {
    require_positive(x)?;
    gap_bounds_inner(x, m, x.is_positive_integer())
}

/// Harmonic partial sum against `ln x + gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEstimate {
    pub sum: f64,
    pub approx: f64,
    pub error: f64,
}

impl HarmonicEstimate {
    /// `|error| <= 1/x`.
    pub fn within_bound(&self, x: u64) -> bool {
        self.error.abs() <= 1.0 / x as f64
    }
}

/// `H(x) = sum_{k<=x} 1/k`, compared with `ln x + gamma`.
pub fn harmonic_estimate(x: u64) -> Result<HarmonicEstimate> {
    if x == 0 {
        return Err(Error::InvalidInput("harmonic estimate needs x >= 1".into()));
    }
    let sum = compensated_sum((1..=x).map(|k| 1.0 / k as f64));
    let approx = (x as f64).ln() + EULER_GAMMA;
    Ok(HarmonicEstimate {
        sum,
        approx,
        error: sum - approx,
    })
}
