//! Balls induced by compression, boundary (admissible) points, and tallying
//! checkers for the ball theorems.
//!
//! The theorems are measured rather than assumed: each `check_*` evaluates
//! both sides of a claim and reports whether they agree, and [`AuditRecord`]
//! accumulates those outcomes with a capped list of counterexamples.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::compression::{compressed_coords, gap, gap_squared, PointN, Scale};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Absolute tolerance used when comparing two induced balls or two gaps.
pub const BALL_MATCH_TOL: f64 = 1e-9;

/// Counterexamples kept per record; later ones are dropped.
pub const MAX_COUNTEREXAMPLES: usize = 16;

/// The open ball centred at `(x + m/x)/2` with radius `gap(x, m)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedBall {
    source: PointN,
    scale: Scale,
    center: Vec<f64>,
    radius: f64,
}

pub fn induce_ball(x: &PointN, m: Scale) -> InducedBall {
    let image = compressed_coords(x, m);
    let center = x
        .coords()
        .iter()
        .zip(&image)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    InducedBall {
        source: x.clone(),
        scale: m,
        center,
        radius: 0.5 * gap(x, m),
    }
}

impl InducedBall {
    pub fn source(&self) -> &PointN {
        &self.source
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            })
        }
    }

    pub fn distance_to_center(&self, z: &[f64]) -> Result<f64> {
        self.check_dim(z)?;
        Ok(euclidean(z, &self.center))
    }

    /// Strict membership `||z - center|| < radius`. Points within the
    /// admissible band of the sphere count as boundary, not interior, so the
    /// source point and its image are never contained.
    pub fn contains(&self, z: &[f64]) -> Result<bool> {
        Ok(self.distance_to_center(z)? < self.radius - self.admissible_tolerance())
    }

    /// Tolerance for [`Self::is_admissible`]: `1e-9 * max(1, radius)`.
    pub fn admissible_tolerance(&self) -> f64 {
        1e-9 * self.radius.max(1.0)
    }

    /// Whether `y` lies on the boundary sphere, up to [`Self::admissible_tolerance`].
    pub fn is_admissible(&self, y: &[f64]) -> Result<bool> {
        let d = self.distance_to_center(y)?;
        Ok((d - self.radius).abs() <= self.admissible_tolerance())
    }

    /// Same centre and radius within [`BALL_MATCH_TOL`].
    pub fn matches(&self, other: &InducedBall) -> bool {
        self.dim() == other.dim()
            && self
                .center
                .iter()
                .zip(&other.center)
                .all(|(a, b)| (a - b).abs() <= BALL_MATCH_TOL)
            && (self.radius - other.radius).abs() <= BALL_MATCH_TOL
    }

    /// A point drawn uniformly from the ball: Gaussian direction, radius `r U^(1/n)`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim();
        let dir: Vec<f64> = loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|c| c / norm).collect();
            }
        };
        let u: f64 = rng.random();
        let rho = self.radius * u.powf(1.0 / n as f64);
        self.center
            .iter()
            .zip(dir)
            .map(|(c, d)| c + rho * d)
            .collect()
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(p, q)| (p - q) * (p - q))).sqrt()
}

/// `k` boundary points of the planar induced circle, spaced so that together
/// with `x` (at angle `theta0`) and its image (at `theta0 + pi`) all `k + 2`
/// points are equally spaced. Returned in increasing angle from `theta0`.
pub fn admissible_points_on_circle(x: &PointN, m: Scale, k: usize) -> Result<Vec<[f64; 2]>> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        });
    }
    if k == 0 || !k.is_multiple_of(2) {
        return Err(Error::PlacementConflict { k });
    }
    let ball = induce_ball(x, m);
    if ball.radius == 0.0 {
        return Err(Error::DegenerateBall);
    }
    let [cx, cy] = [ball.center[0], ball.center[1]];
    let theta0 = (x.coords()[1] - cy).atan2(x.coords()[0] - cx);
    let total = k + 2;
    let half = total / 2;
    Ok((1..total)
        .filter(|&j| j != half)
        .map(|j| {
            let theta = theta0 + 2.0 * PI * j as f64 / total as f64;
            [
                cx + ball.radius * theta.cos(),
                cy + ball.radius * theta.sin(),
            ]
        })
        .collect())
}

/// True when `p` could be a [`PointN`]: nonzero, pairwise distinct coordinates.
pub fn has_distinct_nonzero_coords(p: &[f64]) -> bool {
    PointN::new(p.to_vec()).is_ok()
}

/// `pi * gap^2 / 4`, the area of the planar induced circle.
pub fn induced_circle_area(x: &PointN, m: Scale) -> Result<f64> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        });
    }
    Ok(PI * gap_squared(x, m) / 4.0)
}

/// Tally of a theorem check over many samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub samples: u64,
    pub passes: u64,
    pub failures: u64,
    /// Inputs of the first failing samples, each a list of tuples.
    pub counterexamples: Vec<Vec<Vec<f64>>>,
}

impl AuditRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one outcome; `witness` is only built for failures that fit under the cap.
    pub fn tally(&mut self, pass: bool, witness: impl FnOnce() -> Vec<Vec<f64>>) {
        self.samples += 1;
        if pass {
            self.passes += 1;
        } else {
            self.failures += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(witness());
            }
        }
    }

    /// Appends `other` after `self`; counterexamples keep that order.
    pub fn merge(&mut self, other: AuditRecord) {
        self.samples += other.samples;
        self.passes += other.passes;
        self.failures += other.failures;
        let room = MAX_COUNTEREXAMPLES.saturating_sub(self.counterexamples.len());
        self.counterexamples
            .extend(other.counterexamples.into_iter().take(room));
    }

    pub fn is_consistent(&self) -> bool {
        self.passes + self.failures == self.samples
    }

    pub fn pass_rate(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.passes as f64 / self.samples as f64
        }
    }
}

/// Both sides of "z in ball(y) iff gap(z) < gap(y)".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeciderCheck {
    pub in_ball: bool,
    pub gap_smaller: bool,
}

impl DeciderCheck {
    pub fn holds(&self) -> bool {
        self.in_ball == self.gap_smaller
    }
}

/// Evaluates membership of `z` in the ball of `x` and the gap comparison.
pub fn check_decider(x: &PointN, z: &PointN, m: Scale) -> Result<DeciderCheck> {
    let ball = induce_ball(x, m);
    let in_ball = ball.contains(z.coords())?;
    Ok(DeciderCheck {
        in_ball,
        gap_smaller: gap_squared(z, m) < gap_squared(x, m),
    })
}

/// Monte Carlo containment of ball(y) in ball(x).
#[derive(Debug, Clone, PartialEq)]
pub struct NestingCheck {
    /// One entry per sampled point of ball(y): pass if it lies in ball(x).
    pub record: AuditRecord,
    /// ball(y) has radius 0, so it is empty and trivially nested.
    pub vacuous: bool,
}

impl NestingCheck {
    pub fn nested(&self) -> bool {
        self.record.failures == 0
    }
}

/// Samples `sample_count` points uniformly from ball(y) and counts those inside ball(x).
///
/// `y` must lie strictly inside ball(x).
pub fn check_nesting<R: Rng + ?Sized>(
    x: &PointN,
    y: &PointN,
    m: Scale,
    sample_count: usize,
    rng: &mut R,
) -> Result<NestingCheck> {
    let outer = induce_ball(x, m);
    if !outer.contains(y.coords())? {
        return Err(Error::Precondition(
            "y is not strictly inside the ball induced by x".into(),
        ));
    }
    let inner = induce_ball(y, m);
    let mut record = AuditRecord::new();
    if inner.radius == 0.0 {
        return Ok(NestingCheck {
            record,
            vacuous: true,
        });
    }
    for _ in 0..sample_count {
        let z = inner.sample_uniform(rng);
        let inside = outer.contains(&z)?;
        record.tally(inside, || vec![z.clone()]);
    }
    Ok(NestingCheck {
        record,
        vacuous: false,
    })
}

/// Both sides of "y admissible for ball(x) iff ball(y) = ball(x) and gap(y) = gap(x)".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissibleCheck {
    pub admissible: bool,
    pub same_ball: bool,
    pub same_gap: bool,
}

impl AdmissibleCheck {
    pub fn holds(&self) -> bool {
        self.admissible == (self.same_ball && self.same_gap)
    }
}

pub fn check_admissible_equivalence(x: &PointN, y: &PointN, m: Scale) -> Result<AdmissibleCheck> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let bx = induce_ball(x, m);
    let by = induce_ball(y, m);
    Ok(AdmissibleCheck {
        admissible: bx.is_admissible(y.coords())?,
        same_ball: bx.matches(&by),
        same_gap: (gap(y, m) - gap(x, m)).abs() <= BALL_MATCH_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::compress;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> PointN {
        PointN::new(c.to_vec()).unwrap()
    }

    fn one() -> Scale {
        Scale::new(1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        crate::numeric::relative_diff(a, b)
    }

    #[test]
    fn induce_ball_examples() {
        let b = induce_ball(&p(&[2.0, 4.0]), one());
        assert_eq!(b.center(), &[1.25, 2.125]);
        assert!((b.radius() - 2.019437).abs() < 1e-6);
        assert!(rel(b.distance_to_center(&[2.0, 4.0]).unwrap(), b.radius()) <= 1e-12);

        let degenerate = induce_ball(&p(&[1.0, -1.0]), one());
        assert_eq!(degenerate.radius(), 0.0);
    }

    #[test]
    fn contains_examples() {
        let b = induce_ball(&p(&[2.0, 4.0]), one());
        assert!(b.contains(&[1.25, 2.125]).unwrap());
        assert!(!b.contains(&[2.0, 4.0]).unwrap());
        // distance = 2.015 < 2.019437
        assert!((b.distance_to_center(&[1.25, 4.14]).unwrap() - 2.015).abs() < 1e-12);
        assert!(b.contains(&[1.25, 4.14]).unwrap());
        assert!(matches!(
            b.contains(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn admissible_examples() {
        let x = p(&[2.0, 4.0]);
        let b = induce_ball(&x, one());
        assert!(b.is_admissible(x.coords()).unwrap());
        assert!(b
            .is_admissible(compress(&x, one()).unwrap().coords())
            .unwrap());
        assert!(!b.is_admissible(b.center()).unwrap());
        assert!(b.is_admissible(&[1.0]).is_err());
    }

    #[test]
    fn circle_points_for_k_two_are_perpendicular() {
        let x = p(&[2.0, 4.0]);
        let b = induce_ball(&x, one());
        let pts = admissible_points_on_circle(&x, one(), 2).unwrap();
        let theta0 = (4.0 - b.center()[1]).atan2(2.0 - b.center()[0]);
        for (pt, sign) in pts.iter().zip([1.0, -1.0]) {
            let expect = theta0 + sign * PI / 2.0;
            let got = (pt[1] - b.center()[1]).atan2(pt[0] - b.center()[0]);
            let diff = (got - expect).rem_euclid(2.0 * PI);
            assert!(diff < 1e-12 || 2.0 * PI - diff < 1e-12);
        }
    }

    #[test]
    fn circle_points_equal_chords() {
        let x = p(&[1.3, 2.9]);
        let m = Scale::new(0.7).unwrap();
        for k in [2, 4, 6, 10, 40] {
            let pts = admissible_points_on_circle(&x, m, k).unwrap();
            assert_eq!(pts.len(), k);
            let b = induce_ball(&x, m);
            let image = compress(&x, m).unwrap();
            let mut ring = vec![[x.coords()[0], x.coords()[1]]];
            ring.extend_from_slice(&pts[..k / 2]);
            ring.push([image.coords()[0], image.coords()[1]]);
            ring.extend_from_slice(&pts[k / 2..]);
            let chords: Vec<f64> = (0..ring.len())
                .map(|i| euclidean(&ring[i], &ring[(i + 1) % ring.len()]))
                .collect();
            for c in &chords {
                assert!(rel(*c, chords[0]) <= 1e-12, "k={k} chords {chords:?}");
            }
            assert!(pts.iter().all(|q| b.is_admissible(q).unwrap()));
        }
    }

    #[test]
    fn circle_points_errors() {
        let x = p(&[2.0, 4.0]);
        assert_eq!(
            admissible_points_on_circle(&x, one(), 3),
            Err(Error::PlacementConflict { k: 3 })
        );
        assert_eq!(
            admissible_points_on_circle(&x, one(), 0),
            Err(Error::PlacementConflict { k: 0 })
        );
        assert_eq!(
            admissible_points_on_circle(&p(&[1.0, -1.0]), one(), 2),
            Err(Error::DegenerateBall)
        );
        assert!(admissible_points_on_circle(&p(&[1.0, 2.0, 3.0]), one(), 2).is_err());
    }

    #[test]
    fn circle_area_examples() {
        // gap = 2 for x = (1 + sqrt2, -1 + sqrt2)? Use x with x - 1/x = (sqrt2, sqrt2):
        // x = (sqrt2 + sqrt6)/2 solves x^2 - sqrt2 x - 1 = 0.
        let r = (2f64.sqrt() + 6f64.sqrt()) / 2.0;
        let x = p(&[r, -1.0 / r]);
        assert!((gap(&x, one()) - 2.0).abs() < 1e-14);
        assert!((induced_circle_area(&x, one()).unwrap() - PI).abs() < 1e-13);

        let x = p(&[2.0, 4.0]);
        let area = induced_circle_area(&x, one()).unwrap();
        assert!((area - PI * 16.3125 / 4.0).abs() < 1e-13);
        assert!((area - 12.8118).abs() < 1e-4);
        let b = induce_ball(&x, one());
        assert!(rel(area, PI * b.radius() * b.radius()) <= 1e-12);
        assert!(induced_circle_area(&p(&[1.0, 2.0, 3.0]), one()).is_err());
    }

    #[test]
    fn decider_examples() {
        let x = p(&[2.0, 5.0]);
        let reflexive = check_decider(&x, &x, one()).unwrap();
        assert!(!reflexive.in_ball && !reflexive.gap_smaller && reflexive.holds());

        // ball of (2,5): center (1.25, 2.6), radius^2 = (1.5^2 + 4.8^2)/4 = 6.32;
        // |(3,4) - c|^2 = 3.0625 + 1.96 = 5.0225 < 6.32, inside.
        // gap^2(3,4) = (8/3)^2 + (15/4)^2 = 21.17 < gap^2(2,5) = 25.29.
        let c = check_decider(&x, &p(&[3.0, 4.0]), one()).unwrap();
        assert_eq!(
            c,
            DeciderCheck {
                in_ball: true,
                gap_smaller: true
            }
        );
        assert!(c.holds());
    }

    #[test]
    fn decider_can_fail() {
        // z = (1, 2) is inside ball(2, 5) but far from the ball's source:
        // |(1,2) - (1.25,2.6)|^2 = 0.4225 < 6.32 and gap^2(1,2) = 2.25 < 25.29, holds.
        // z = (4, 1): |(4,1) - c|^2 = 7.5625 + 2.56 = 10.12 > 6.32, outside, yet
        // gap^2(4,1) = 14.0625 < 25.29, so the biconditional fails.
        let c = check_decider(&p(&[2.0, 5.0]), &p(&[4.0, 1.0]), one()).unwrap();
        assert_eq!(
            c,
            DeciderCheck {
                in_ball: false,
                gap_smaller: true
            }
        );
        assert!(!c.holds());
    }

    #[test]
    fn nesting_rejects_boundary_point() {
        let x = p(&[2.0, 9.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            check_nesting(&x, &x, one(), 10, &mut rng),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn nesting_degenerate_inner_ball_is_vacuous() {
        // (1, -1) is a fixed point of m = 1 and lies inside ball(2, -9):
        // center (1.25, -4.5556), radius^2 = (1.5^2 + 8.8889^2)/4 = 20.31,
        // |(1,-1) - c|^2 = 0.0625 + 12.64 = 12.70.
        let x = p(&[2.0, -9.0]);
        let y = p(&[1.0, -1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = check_nesting(&x, &y, one(), 100, &mut rng).unwrap();
        assert!(c.vacuous && c.nested());
        assert_eq!(c.record.samples, 0);
    }

    #[test]
    fn nesting_tally_is_consistent_and_deterministic() {
        let x = p(&[2.0, 9.0]);
        let y = p(&[3.0, 7.0]);
        assert!(induce_ball(&x, one()).contains(y.coords()).unwrap());
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            check_nesting(&x, &y, one(), 10_000, &mut rng).unwrap()
        };
        let a = run(3);
        assert_eq!(a.record.samples, 10_000);
        assert!(a.record.is_consistent());
        assert_eq!(a, run(3));
    }

    #[test]
    fn admissible_equivalence_examples() {
        let x = p(&[2.0, 4.0]);
        let same = check_admissible_equivalence(&x, &x, one()).unwrap();
        assert!(same.admissible && same.same_ball && same.same_gap && same.holds());

        let image = compress(&x, one()).unwrap();
        let anti = check_admissible_equivalence(&x, &image, one()).unwrap();
        assert!(anti.admissible && anti.same_ball && anti.same_gap && anti.holds());

        assert!(check_admissible_equivalence(&x, &p(&[1.0, 2.0, 3.0]), one()).is_err());
    }

    #[test]
    fn sampling_stays_in_ball() {
        let b = induce_ball(&p(&[0.3, -2.0, 5.0]), Scale::new(0.4).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let z = b.sample_uniform(&mut rng);
            assert!(b.distance_to_center(&z).unwrap() <= b.radius());
        }
    }

    #[test]
    fn record_merge_caps_counterexamples() {
        let mut a = AuditRecord::new();
        for i in 0..20 {
            a.tally(i % 2 == 0, || vec![vec![i as f64]]);
        }
        assert_eq!(a.counterexamples.len(), 10);
        let mut b = AuditRecord::new();
        for i in 0..20 {
            b.tally(false, || vec![vec![100.0 + i as f64]]);
        }
        a.merge(b);
        assert_eq!((a.samples, a.passes, a.failures), (40, 10, 30));
        assert!(a.is_consistent());
        assert_eq!(a.counterexamples.len(), MAX_COUNTEREXAMPLES);
        assert_eq!(a.counterexamples[10], vec![vec![100.0]]);
    }

    #[test]
    fn record_json_fields() {
        let mut r = AuditRecord::new();
        r.tally(false, || vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["samples"], 1);
        assert_eq!(v["passes"], 0);
        assert_eq!(v["failures"], 1);
        assert_eq!(v["counterexamples"][0][1][0], 3.0);
    }
}
