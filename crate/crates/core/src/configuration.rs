//! Planar point configurations, their unit-disc normalization and file formats.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

/// How a configuration was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    PaperConstruction {
        s: usize,
        m: f64,
        epsilon: f64,
        delta: f64,
    },
    RandomDisc {
        seed: u64,
    },
    GridDisc,
    CircleEquispaced {
        r: f64,
    },
    Optimizer {
        run_id: String,
    },
}

impl Provenance {
    /// Short label used in CSV rows.
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::PaperConstruction { .. } => "paper",
            Provenance::RandomDisc { .. } => "random",
            Provenance::GridDisc => "grid",
            Provenance::CircleEquispaced { .. } => "circle",
            Provenance::Optimizer { .. } => "optimizer",
        }
    }
}

/// `p_stored = lambda * (p_raw + (tx, ty))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub tx: f64,
    pub ty: f64,
    pub lambda: f64,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        tx: 0.0,
        ty: 0.0,
        lambda: 1.0,
    };

    pub fn apply(&self, p: Point2) -> Point2 {
        [
            self.lambda * (p[0] + self.tx),
            self.lambda * (p[1] + self.ty),
        ]
    }

    pub fn invert(&self, p: Point2) -> Point2 {
        [p[0] / self.lambda - self.tx, p[1] / self.lambda - self.ty]
    }

    /// `then` applied after `self`.
    pub fn compose(&self, then: &Transform) -> Transform {
        // then(self(p)) = l2 (l1 (p + t1) + t2) = l1 l2 (p + t1 + t2 / l1)
        Transform {
            tx: self.tx + then.tx / self.lambda,
            ty: self.ty + then.ty / self.lambda,
            lambda: self.lambda * then.lambda,
        }
    }
}

/// An ordered set of `s >= 3` distinct planar points plus the transform that
/// took the raw construction coordinates to the stored ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationFile", into = "ConfigurationFile")]
pub struct Configuration {
    points: Vec<Point2>,
    transform: Transform,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationFile {
    provenance: Provenance,
    s: usize,
    transform: Transform,
    points: Vec<Point2>,
}

impl TryFrom<ConfigurationFile> for Configuration {
    type Error = Error;

    fn try_from(f: ConfigurationFile) -> Result<Self> {
        if f.s != f.points.len() {
            return Err(Error::InvalidInput(format!(
                "s = {} but {} points listed",
                f.s,
                f.points.len()
            )));
        }
        if !(f.transform.lambda.is_finite() && f.transform.lambda > 0.0) {
            return Err(Error::InvalidInput(
                "transform lambda must be positive".into(),
            ));
        }
        Configuration::with_transform(f.points, f.transform, f.provenance)
    }
}

impl From<Configuration> for ConfigurationFile {
    fn from(c: Configuration) -> Self {
        ConfigurationFile {
            provenance: c.provenance,
            s: c.points.len(),
            transform: c.transform,
            points: c.points,
        }
    }
}

impl Configuration {
    pub fn new(points: Vec<Point2>, provenance: Provenance) -> Result<Self> {
        Self::with_transform(points, Transform::IDENTITY, provenance)
    }

    pub fn with_transform(
        points: Vec<Point2>,
        transform: Transform,
        provenance: Provenance,
    ) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a configuration needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "coincident points at {:?}",
                w[0]
            )));
        }
        Ok(Self {
            points,
            transform,
            provenance,
        })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn s(&self) -> usize {
        self.points.len()
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Points in the coordinates they were constructed in.
    pub fn raw_points(&self) -> Vec<Point2> {
        self.points
            .iter()
            .map(|&p| self.transform.invert(p))
            .collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max)
    }

    /// A copy with every point mapped by `t`; the transform is composed.
    pub fn transformed(&self, t: &Transform) -> Result<Self> {
        let points = self.points.iter().map(|&p| t.apply(p)).collect();
        Self::with_transform(points, self.transform.compose(t), self.provenance.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed configuration: {e}")))
    }

    /// `x,y` per row with a header. Drops provenance and transform.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        out
    }
}

/// Circle through the boundary points of a smallest enclosing disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    fn from_two(a: Point2, b: Point2) -> Circle {
        let center = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        Circle {
            center,
            radius: dist(center, a).max(dist(center, b)),
        }
    }

    fn from_three(a: Point2, b: Point2, c: Point2) -> Option<Circle> {
        let (bx, by) = (b[0] - a[0], b[1] - a[1]);
        let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
        let d = 2.0 * (bx * cy - by * cx);
        if d == 0.0 {
            return None;
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = [a[0] + ux, a[1] + uy];
        let radius = dist(center, a).max(dist(center, b)).max(dist(center, c));
        Some(Circle { center, radius })
    }

    /// Containment with a relative slack for rounding.
    pub fn covers(&self, p: Point2) -> bool {
        dist(self.center, p) <= self.radius * (1.0 + 1e-12) + 1e-300
    }
}

fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn circle_from_boundary(boundary: &[Point2]) -> Circle {
    match boundary {
        [a, b] => Circle::from_two(*a, *b),
        [a, b, c] => Circle::from_three(*a, *b, *c).unwrap_or_else(|| {
            // Collinear support: the widest pair spans it.
            let pairs = [(*a, *b), (*a, *c), (*b, *c)];
            pairs.into_iter().map(|(p, q)| Circle::from_two(p, q)).fold(
                Circle::from_two(*a, *b),
                |best, c| {
                    if c.radius > best.radius {
                        c
                    } else {
                        best
                    }
                },
            )
        }),
        _ => unreachable!("boundary holds two or three points"),
    }
}

/// Smallest enclosing circle (Welzl, iterative move-to-front form) on a
/// deterministically shuffled copy of the points.
pub fn smallest_enclosing_circle(points: &[Point2]) -> Option<Circle> {
    if points.is_empty() {
        return None;
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5ec));
    let mut c = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.covers(pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.covers(pts[j]) {
                continue;
            }
            c = circle_from_boundary(&[pts[i], pts[j]]);
            for k in 0..j {
                if !c.covers(pts[k]) {
                    c = circle_from_boundary(&[pts[i], pts[j], pts[k]]);
                }
            }
        }
    }
    Some(c)
}

/// Moves the smallest-enclosing-disc centre to the origin and scales by `1/R`.
pub fn normalize_to_unit_disc(config: &Configuration) -> Result<Configuration> {
    let circle = smallest_enclosing_circle(config.points()).expect("configuration is non-empty");
    if circle.radius == 0.0 {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let lambda = 1.0 / circle.radius;
    let step = Transform {
        tx: -circle.center[0],
        ty: -circle.center[1],
        lambda,
    };
    let mut out = config.transformed(&step)?;
    // Rounding can leave a boundary point a few ulps outside.
    let max = out.max_norm();
    if max > 1.0 {
        let shrink = Transform {
            tx: 0.0,
            ty: 0.0,
            lambda: 1.0 / max,
        };
        out = out.transformed(&shrink)?;
    }
    Ok(out)
}
