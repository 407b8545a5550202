//! Point-configuration generators: the induced-circle construction and the
//! random, lattice and equispaced baselines.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{admissible_points_on_circle, induce_ball, InducedBall};
use crate::compression::{compress, gap, PointN, Scale};
use crate::configuration::{normalize_to_unit_disc, Configuration, Point2, Provenance, Transform};
use crate::error::{Error, Result};
use crate::oracle::triangle_area;

pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Parameters of the induced-circle construction for `s` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub s: usize,
    pub m: Scale,
    /// Smallest coordinate of the source point, `1 + ln(s)/sqrt(s)`.
    pub inf_coord: f64,
    pub epsilon: f64,
    /// Offset separating the two source coordinates.
    pub delta: f64,
}

impl ConstructionParams {
    pub fn new(s: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if s < 5 {
            return Err(Error::InvalidInput(format!(
                "construction needs s >= 5, got {s}"
            )));
        }
        if !(s - 3).is_multiple_of(2) {
            return Err(Error::Parity { s });
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {epsilon} must be positive"
            )));
        }
        if !(delta > 0.0 && delta < epsilon) {
            return Err(Error::InvalidInput(format!(
                "delta = {delta} must be positive and below epsilon = {epsilon}"
            )));
        }
        let ln = (s as f64).ln();
        Ok(Self {
            s,
            m: Scale::from_s(s)?,
            inf_coord: 1.0 + ln / (s as f64).sqrt(),
            epsilon,
            delta,
        })
    }

    /// Replaces the derived scale.
    pub fn with_scale(mut self, m: Scale) -> Self {
        self.m = m;
        self
    }

    /// `(inf_coord, inf_coord + delta)`.
    pub fn source_point(&self) -> Result<PointN> {
        PointN::new(vec![self.inf_coord, self.inf_coord + self.delta])
    }
}

/// The raw construction: `s - 1` points on the induced circle in angular
/// order starting at the source point, and the circle's centre.
#[derive(Debug, Clone)]
pub struct CircleConstruction {
    pub params: ConstructionParams,
    pub source: PointN,
    pub ball: InducedBall,
    pub circle: Vec<Point2>,
    pub gap: f64,
}

impl CircleConstruction {
    pub fn build(params: ConstructionParams) -> Result<Self> {
        let source = params.source_point()?;
        let m = params.m;
        let image = compress(&source, m)?;
        let ball = induce_ball(&source, m);
        let k = params.s - 3;
        let others = admissible_points_on_circle(&source, m, k)?;
        let mut circle = Vec::with_capacity(k + 2);
        circle.push([source.coords()[0], source.coords()[1]]);
        circle.extend_from_slice(&others[..k / 2]);
        circle.push([image.coords()[0], image.coords()[1]]);
        circle.extend_from_slice(&others[k / 2..]);
        Ok(Self {
            params,
            gap: gap(&source, m),
            source,
            ball,
            circle,
        })
    }

    pub fn center(&self) -> Point2 {
        [self.ball.center()[0], self.ball.center()[1]]
    }

    pub fn gap_below_one(&self) -> bool {
        self.gap < 1.0
    }

    fn provenance(&self) -> Provenance {
        Provenance::PaperConstruction {
            s: self.params.s,
            m: self.params.m.m(),
            epsilon: self.params.epsilon,
            delta: self.params.delta,
        }
    }

    /// Circle points followed by the centre, in raw coordinates.
    pub fn raw_configuration(&self) -> Result<Configuration> {
        let mut points = self.circle.clone();
        points.push(self.center());
        Configuration::new(points, self.provenance())
    }

    /// The raw configuration if it already lies in the unit disc, else
    /// recentred on the circle centre and scaled by `1/radius`.
    pub fn configuration(&self) -> Result<Configuration> {
        let raw = self.raw_configuration()?;
        if raw.max_norm() <= 1.0 {
            return Ok(raw);
        }
        let c = self.center();
        raw.transformed(&Transform {
            tx: -c[0],
            ty: -c[1],
            lambda: 1.0 / self.ball.radius(),
        })
    }

    /// Areas of the `s - 1` sectors cut by consecutive circle points, from
    /// their measured angular spacing.
    pub fn sector_areas(&self) -> Vec<f64> {
        let c = self.center();
        let r = self.ball.radius();
        let angles: Vec<f64> = self
            .circle
            .iter()
            .map(|p| (p[1] - c[1]).atan2(p[0] - c[0]))
            .collect();
        (0..angles.len())
            .map(|j| {
                let next = angles[(j + 1) % angles.len()];
                let sweep = (next - angles[j]).rem_euclid(2.0 * PI);
                0.5 * r * r * sweep
            })
            .collect()
    }

    /// Areas of the `s - 1` triangles (centre, circle point j, circle point j+1).
    pub fn center_triangle_areas(&self) -> Vec<f64> {
        center_triangles(&self.circle, self.center())
    }
}

fn center_triangles(circle: &[Point2], center: Point2) -> Vec<f64> {
    (0..circle.len())
        .map(|j| triangle_area(center, circle[j], circle[(j + 1) % circle.len()]))
        .collect()
}

/// For a construction laid out as circle points then centre, the areas of
/// the centre triangles. `None` for any other layout.
pub fn center_triangle_areas_of(config: &Configuration) -> Option<Vec<f64>> {
    match config.provenance() {
        Provenance::PaperConstruction { .. } => {
            let (center, circle) = config.points().split_last()?;
            Some(center_triangles(circle, *center))
        }
        _ => None,
    }
}

/// The induced-circle configuration for `s` points, normalized into the unit
/// disc. The source gap is typically above 1 for the derived scale; see
/// [`construct_configuration_strict`] to reject that case.
pub fn construct_configuration(s: usize, epsilon: f64, delta: f64) -> Result<Configuration> {
    CircleConstruction::build(ConstructionParams::new(s, epsilon, delta)?)?.configuration()
}

/// As [`construct_configuration`] but fails with [`Error::GapTooLarge`]
/// unless the induced circle has gap below 1.
pub fn construct_configuration_strict(s: usize, epsilon: f64, delta: f64) -> Result<Configuration> {
    let built = CircleConstruction::build(ConstructionParams::new(s, epsilon, delta)?)?;
    if !built.gap_below_one() {
        return Err(Error::GapTooLarge { gap: built.gap });
    }
    built.configuration()
}

/// `pi gap^2 / (4 (s - 1))`.
pub fn sector_area(s: usize, gap_value: f64) -> Result<f64> {
    if s < 4 {
        return Err(Error::InvalidInput(format!(
            "sector area needs s >= 4, got {s}"
        )));
    }
    if !(gap_value >= 0.0 && gap_value.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "gap = {gap_value} must be nonnegative"
        )));
    }
    Ok(PI * gap_value * gap_value / (4.0 * (s - 1) as f64))
}

/// `s` points uniform in the unit disc, `r = sqrt(U)`, `theta = 2 pi V`.
pub fn random_disc(s: usize, seed: u64) -> Result<Configuration> {
    if s < 3 {
        return Err(Error::InvalidInput(format!("need s >= 3, got {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point2> = Vec::with_capacity(s);
    while points.len() < s {
        let p = sample_disc(&mut rng);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    Configuration::new(points, Provenance::RandomDisc { seed })
}

pub(crate) fn sample_disc<R: Rng + ?Sized>(rng: &mut R) -> Point2 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let r = u.sqrt();
    let t = 2.0 * PI * v;
    [r * t.cos(), r * t.sin()]
}

/// `s` points at angles `2 pi j / s` on the circle of radius `r`.
pub fn circle_equispaced(s: usize, r: f64) -> Result<Configuration> {
    if s < 3 {
        return Err(Error::InvalidInput(format!("need s >= 3, got {s}")));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!("radius {r} outside (0, 1]")));
    }
    let points = (0..s)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / s as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    Configuration::new(points, Provenance::CircleEquispaced { r })
}

/// `(r^2/2)(2 sin t - sin 2t)` with `t = 2 pi / s`: the smallest triangle of
/// an equispaced `s`-gon of radius `r`. Evaluated as `2 r^2 sin t sin^2(t/2)`,
/// which avoids the cancellation at large `s`.
pub fn circle_equispaced_min_area(s: usize, r: f64) -> f64 {
    let t = 2.0 * PI / s as f64;
    let h = (0.5 * t).sin();
    2.0 * r * r * t.sin() * h * h
}

/// The first `s` nodes, row by row from the bottom, of the smallest `g x g`
/// lattice on `[-1, 1]^2` (`g >= ceil(sqrt s)`) with at least `s` nodes in
/// the closed unit disc; then normalized.
pub fn grid_disc(s: usize) -> Result<Configuration> {
    if s < 3 {
        return Err(Error::InvalidInput(format!("need s >= 3, got {s}")));
    }
    let mut g = ((s as f64).sqrt().ceil() as usize).max(2);
    loop {
        let step = 2.0 / (g - 1) as f64;
        let nodes: Vec<Point2> = (0..g)
            .flat_map(|row| {
                (0..g).map(move |col| [-1.0 + col as f64 * step, -1.0 + row as f64 * step])
            })
            .filter(|p| p[0] * p[0] + p[1] * p[1] <= 1.0)
            .take(s)
            .collect();
        if nodes.len() == s {
            let config = Configuration::new(nodes, Provenance::GridDisc)?;
            return normalize_to_unit_disc(&config);
        }
        g += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_diff;

    #[test]
    fn params_follow_formulas() {
        let p = ConstructionParams::new(101, DEFAULT_EPSILON, DEFAULT_DELTA).unwrap();
        let ln = 101f64.ln();
        assert_eq!(p.m.m(), ln * ln / 404.0);

        // s = 100 itself is even (s - 3 odd); the formulas at s = 100:
        let ln = 100f64.ln();
        assert!((ln * ln / 400.0 - 0.0530).abs() < 1e-4);
        assert!((1.0 + ln / 10.0 - 1.4605).abs() < 1e-4);
        assert!((Scale::from_s(100).unwrap().m() - 0.0530).abs() < 1e-4);
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            ConstructionParams::new(4, 1e-2, 1e-6),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(
            ConstructionParams::new(10, 1e-2, 1e-6),
            Err(Error::Parity { s: 10 })
        );
        assert!(ConstructionParams::new(9, 0.0, 1e-6).is_err());
        assert!(ConstructionParams::new(9, 1e-2, 0.0).is_err());
        assert!(ConstructionParams::new(9, 1e-2, 1e-1).is_err());
    }

    #[test]
    fn nine_point_construction() {
        let built =
            CircleConstruction::build(ConstructionParams::new(9, DEFAULT_EPSILON, 1e-6).unwrap())
                .unwrap();
        assert_eq!(built.circle.len(), 8);
        for p in &built.circle {
            assert!(built.ball.is_admissible(p).unwrap());
        }
        let config = built.configuration().unwrap();
        assert_eq!(config.s(), 9);
        assert_eq!(config.points()[8], [0.0, 0.0]);

        let tri = built.center_triangle_areas();
        assert_eq!(tri.len(), 8);
        for t in &tri {
            assert!(relative_diff(*t, tri[0]) <= 1e-9);
        }
        let expect = sector_area(9, built.gap).unwrap();
        for a in built.sector_areas() {
            assert!(relative_diff(a, expect) <= 1e-9);
        }
    }

    #[test]
    fn gap_exceeds_one_for_derived_scale() {
        for s in [5, 9, 65, 513, 100_001] {
            let built = CircleConstruction::build(
                ConstructionParams::new(s, DEFAULT_EPSILON, DEFAULT_DELTA).unwrap(),
            )
            .unwrap();
            assert!(!built.gap_below_one(), "s={s} gap={}", built.gap);
            assert!(matches!(
                construct_configuration_strict(s, DEFAULT_EPSILON, DEFAULT_DELTA),
                Err(Error::GapTooLarge { .. })
            ));
        }
    }

    #[test]
    fn normalized_construction_lies_on_unit_circle() {
        let config = construct_configuration(33, DEFAULT_EPSILON, DEFAULT_DELTA).unwrap();
        let (center, circle) = config.points().split_last().unwrap();
        assert_eq!(*center, [0.0, 0.0]);
        for p in circle {
            assert!((p[0].hypot(p[1]) - 1.0).abs() <= 1e-12);
        }
        let raw = config.raw_points();
        let built = CircleConstruction::build(
            ConstructionParams::new(33, DEFAULT_EPSILON, DEFAULT_DELTA).unwrap(),
        )
        .unwrap();
        assert!((raw[0][0] - built.source.coords()[0]).abs() < 1e-12);
    }

    #[test]
    fn center_triangles_below_sectors_and_converge() {
        let mut last_ratio = 0.0;
        for s in [9, 17, 33, 65, 129] {
            let built = CircleConstruction::build(
                ConstructionParams::new(s, DEFAULT_EPSILON, DEFAULT_DELTA).unwrap(),
            )
            .unwrap();
            let tri = built.center_triangle_areas();
            let sec = built.sector_areas();
            assert!(tri.iter().zip(&sec).all(|(t, a)| t < a));
            let ratio = tri[0] / sec[0];
            assert!(ratio > last_ratio && ratio < 1.0);
            last_ratio = ratio;
        }
        assert!(last_ratio > 0.999);
    }

    #[test]
    fn sector_area_examples() {
        assert!((sector_area(5, 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((sector_area(5, 1.0).unwrap() - 0.19635).abs() < 1e-5);
        assert!(sector_area(3, 1.0).is_err());
        assert!(sector_area(5, -1.0).is_err());
        let x = PointN::new(vec![2.0, 4.0]).unwrap();
        let m = Scale::new(1.0).unwrap();
        let g = gap(&x, m);
        let total = sector_area(11, g).unwrap() * 10.0;
        let circle = crate::ball::induced_circle_area(&x, m).unwrap();
        assert!(relative_diff(total, circle) <= 1e-14);
    }

    #[test]
    fn random_disc_is_reproducible() {
        let a = random_disc(3, 7).unwrap();
        assert_eq!(a, random_disc(3, 7).unwrap());
        assert_ne!(a, random_disc(3, 8).unwrap());
        let big = random_disc(500, 1).unwrap();
        assert!(big.points().iter().all(|p| p[0].hypot(p[1]) <= 1.0));
        assert!(random_disc(2, 1).is_err());
    }

    #[test]
    fn random_disc_golden() {
        // Frozen under rand_chacha 0.9 / ChaCha8, seed 20240101.
        let c = random_disc(3, 20240101).unwrap();
        let golden: [[f64; 2]; 3] = GOLDEN_RANDOM_DISC;
        assert_eq!(c.points(), &golden);
    }

    const GOLDEN_RANDOM_DISC: [[f64; 2]; 3] = [
        [-0.9045915461355789, 0.11762511316504183],
        [-0.659548378758836, -0.24725164389359747],
        [0.287336071411014, -0.6698086722300025],
    ];

    #[test]
    fn circle_examples() {
        let sq = circle_equispaced(4, 1.0).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in sq.points().iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
        }
        assert!((circle_equispaced_min_area(3, 1.0) - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-15);
        let tri = circle_equispaced(3, 1.0).unwrap();
        let p = tri.points();
        assert!((triangle_area(p[0], p[1], p[2]) - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(circle_equispaced(5, 0.0).is_err());
        assert!(circle_equispaced(5, 1.5).is_err());
    }

    #[test]
    fn grid_examples() {
        let g3 = grid_disc(3).unwrap();
        assert_eq!(g3.s(), 3);
        let p = g3.points();
        assert!(triangle_area(p[0], p[1], p[2]) > 0.0);
        let g4 = grid_disc(4).unwrap();
        assert_eq!(g4.s(), 4);
        assert_eq!(g4, grid_disc(4).unwrap());
        for s in [3, 4, 10, 50, 200] {
            let g = grid_disc(s).unwrap();
            assert_eq!(g.s(), s);
            assert!((g.max_norm() - 1.0).abs() <= 1e-12);
        }
    }
}
