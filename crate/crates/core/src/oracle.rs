//! Minimal triangle area over all triples, and the bound ratios reported
//! alongside it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, Point2, Provenance};
use crate::error::{Error, Result};
use crate::generators::center_triangle_areas_of;
use crate::numeric::{diff_of_products, two_diff};

pub const ERDOS: &str = "erdos_1_over_s2";
pub const KPS: &str = "kps_logs_over_s2";
pub const CONSTRUCTION: &str = "construction_logs_over_s_sqrt_s";

/// Twice the signed area of `pqr`, from exact coordinate differences and an
/// fma-corrected 2x2 determinant.
#[inline]
pub fn cross_compensated(p: Point2, q: Point2, r: Point2) -> f64 {
    let (ax, eax) = two_diff(q[0], p[0]);
    let (ay, eay) = two_diff(q[1], p[1]);
    let (bx, ebx) = two_diff(r[0], p[0]);
    let (by, eby) = two_diff(r[1], p[1]);
    let head = diff_of_products(ax, by, ay, bx);
    let tail = (ax * eby + eax * by) - (ay * ebx + eay * bx) + (eax * eby - eay * ebx);
    head + tail
}

/// Unsigned triangle area.
#[inline]
pub fn triangle_area(p: Point2, q: Point2, r: Point2) -> f64 {
    0.5 * cross_compensated(p, q, r).abs()
}

/// The smallest triangle and its index triple `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinTriangle {
    pub area: f64,
    pub triple: [usize; 3],
}

impl MinTriangle {
    /// Area first, then lexicographic triple.
    pub fn key_cmp(&self, other: &MinTriangle) -> Ordering {
        self.area
            .total_cmp(&other.area)
            .then_with(|| self.triple.cmp(&other.triple))
    }

    fn pick(a: Option<MinTriangle>, b: Option<MinTriangle>) -> Option<MinTriangle> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.key_cmp(&a) == Ordering::Less {
                b
            } else {
                a
            }),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

/// Every triple through [`triangle_area`], sequentially. Reference path.
pub fn min_triangle_naive(points: &[Point2]) -> MinTriangle {
    assert!(points.len() >= 3, "need at least three points");
    let n = points.len();
    let mut best = MinTriangle {
        area: f64::INFINITY,
        triple: [0, 1, 2],
    };
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let area = triangle_area(points[i], points[j], points[k]);
                if area < best.area {
                    best = MinTriangle {
                        area,
                        triple: [i, j, k],
                    };
                }
            }
        }
    }
    best
}

/// Minimum over all triples, identical to [`min_triangle_naive`].
///
/// Each triple is first screened with the line form `a x + b y + c` of the
/// pair `(i, j)`; only triples within a rounding margin of the running
/// minimum are recomputed with [`cross_compensated`]. Outer indices run in
/// parallel and merge by (area, triple).
pub fn min_triangle(points: &[Point2]) -> MinTriangle {
    let n = points.len();
    assert!(n >= 3, "need at least three points");
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let extent = points
        .iter()
        .flat_map(|p| [p[0].abs(), p[1].abs()])
        .fold(0.0, f64::max);
    // Bounds |screen - exact| for doubled areas, coordinates within `extent`.
    let margin = 32.0 * f64::EPSILON * extent * extent;
    let seed = (0..n - 2)
        .map(|i| cross_compensated(points[i], points[i + 1], points[i + 2]).abs())
        .fold(f64::INFINITY, f64::min);

    let scan = |i: usize| -> Option<MinTriangle> {
        let mut best: Option<(f64, [usize; 3])> = None;
        let mut threshold = seed;
        for j in i + 1..n {
            let a = ys[i] - ys[j];
            let b = xs[j] - xs[i];
            let c = xs[i] * ys[j] - xs[j] * ys[i];
            for k in j + 1..n {
                let screen = (a * xs[k] + b * ys[k] + c).abs();
                if screen - margin <= threshold {
                    let exact = cross_compensated(points[i], points[j], points[k]).abs();
                    if best.is_none_or(|(v, _)| exact < v) {
                        best = Some((exact, [i, j, k]));
                        threshold = threshold.min(exact);
                    }
                }
            }
        }
        best.map(|(v, triple)| MinTriangle {
            area: 0.5 * v,
            triple,
        })
    };

    (0..n - 2)
        .into_par_iter()
        .map(scan)
        .reduce(|| None, MinTriangle::pick)
        .expect("the seed triple is always within threshold")
}

/// Minimal triangle area with argmin, bound ratios and timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub s: usize,
    pub min_area: f64,
    pub argmin: [usize; 3],
    /// Smallest centre triangle, for induced-circle constructions.
    pub center_min_area: Option<f64>,
    pub bound_ratios: BTreeMap<String, f64>,
    pub provenance: Provenance,
    pub runtime_ms: f64,
}

pub const REPORT_CSV_HEADER: &str =
    "s,provenance,min_area,i,j,k,ratio_erdos,ratio_kps,ratio_construction,runtime_ms";

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed report: {e}")))
    }

    fn ratio(&self, key: &str) -> String {
        self.bound_ratios
            .get(key)
            .map(|v| v.to_string())
            .unwrap_or_default()
    }

    /// One row matching [`REPORT_CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.s,
            self.provenance.label(),
            self.min_area,
            self.argmin[0],
            self.argmin[1],
            self.argmin[2],
            self.ratio(ERDOS),
            self.ratio(KPS),
            self.ratio(CONSTRUCTION),
            self.runtime_ms
        )
    }

    /// Header and row.
    pub fn to_csv(&self) -> String {
        format!("{REPORT_CSV_HEADER}\n{}\n", self.to_csv_row())
    }
}

/// Exact minimum over all `C(s, 3)` triples of the configuration.
pub fn min_triangle_area(config: &Configuration) -> EvaluationReport {
    let start = Instant::now();
    let best = min_triangle(config.points());
    let center_min_area = center_triangle_areas_of(config)
        .map(|areas| areas.into_iter().fold(f64::INFINITY, f64::min));
    let bound_ratios = bound_comparison(config.s(), best.area).expect("configurations have s >= 3");
    EvaluationReport {
        s: config.s(),
        min_area: best.area,
        argmin: best.triple,
        center_min_area,
        bound_ratios,
        provenance: config.provenance().clone(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// `min_area` divided by `1/s^2`, `ln s/s^2` and `ln s/(s sqrt s)`.
///
/// Ratios only; the implied constants of the asymptotic bounds are unknown.
pub fn bound_comparison(s: usize, min_area: f64) -> Result<BTreeMap<String, f64>> {
    if s < 3 {
        return Err(Error::InvalidInput(format!(
            "bound comparison needs s >= 3, got {s}"
        )));
    }
    let sf = s as f64;
    let ln = sf.ln();
    Ok(BTreeMap::from([
        (ERDOS.to_string(), min_area / (1.0 / (sf * sf))),
        (KPS.to_string(), min_area / (ln / (sf * sf))),
        (CONSTRUCTION.to_string(), min_area / (ln / (sf * sf.sqrt()))),
    ]))
}

/// Least-squares slope of `ln(area)` against `ln(s)`.
pub fn decay_exponent(areas: &[(usize, f64)]) -> Result<f64> {
    let excluded: Vec<(usize, f64)> = areas
        .iter()
        .copied()
        .filter(|&(_, a)| a <= 0.0 || a.is_nan())
        .collect();
    if !excluded.is_empty() {
        return Err(Error::NonPositiveAreas { excluded });
    }
    if areas.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 points to fit, got {}",
            areas.len()
        )));
    }
    let n = areas.len() as f64;
    let xs: Vec<f64> = areas.iter().map(|&(s, _)| (s as f64).ln()).collect();
    let ys: Vec<f64> = areas.iter().map(|&(_, a)| a.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all s values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
