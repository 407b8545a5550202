//! Simulated annealing over point positions in the unit disc, maximizing the
//! smallest triangle area.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, Point2, Provenance};
use crate::error::{Error, Result};
use crate::generators::sample_disc;
use crate::oracle::{
    min_triangle_area, min_triangle_naive, triangle_area, EvaluationReport, MinTriangle,
};

/// Accepted moves between full recomputations of the cached minimum.
pub const AUDIT_EVERY: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub iterations: u64,
    pub initial_temp: f64,
    /// Geometric cooling factor per iteration.
    pub cooling: f64,
    /// Standard deviation of the Gaussian displacement.
    pub step_scale: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl AnnealParams {
    /// `10^5` iterations from `T0 = 0.1/s^2`, cooling 0.9995.
    pub fn defaults_for(s: usize, seed: u64) -> Self {
        Self {
            iterations: 100_000,
            initial_temp: 0.1 / (s * s) as f64,
            cooling: 0.9995,
            step_scale: 0.1,
            seed,
            restarts: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be positive".into()));
        }
        if !(self.initial_temp > 0.0 && self.initial_temp.is_finite()) {
            return Err(Error::InvalidInput(
                "initial temperature must be positive".into(),
            ));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidInput(format!(
                "cooling {} outside (0, 1)",
                self.cooling
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "step scale {} outside (0, 1]",
                self.step_scale
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be positive".into()));
        }
        Ok(())
    }
}

/// Cached areas of every triple plus a tournament tree over them, so a
/// single-point move costs `O(s^2 log s)` instead of `O(s^3)`.
///
/// Triples are stored in lexicographic order; the tree picks the smallest
/// (area, position), which is the same tie-break as the full enumeration.
#[derive(Debug, Clone)]
pub struct IncrementalMinArea {
    points: Vec<Point2>,
    triples: Vec<[usize; 3]>,
    areas: Vec<f64>,
    by_point: Vec<Vec<usize>>,
    leaves: usize,
    tree: Vec<usize>,
    pending: Option<Pending>,
}

#[derive(Debug, Clone)]
struct Pending {
    index: usize,
    old_position: Point2,
    old_areas: Vec<f64>,
}

const EMPTY: usize = usize::MAX;

impl IncrementalMinArea {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        let n = points.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 points, got {n}"
            )));
        }
        let mut triples = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
        let mut by_point = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let t = triples.len();
                    triples.push([i, j, k]);
                    by_point[i].push(t);
                    by_point[j].push(t);
                    by_point[k].push(t);
                }
            }
        }
        let areas = triples
            .iter()
            .map(|&[i, j, k]| triangle_area(points[i], points[j], points[k]))
            .collect();
        let leaves = triples.len().next_power_of_two();
        let mut state = Self {
            points,
            triples,
            areas,
            by_point,
            leaves,
            tree: vec![EMPTY; 2 * leaves],
            pending: None,
        };
        for t in 0..state.triples.len() {
            state.tree[leaves + t] = t;
        }
        for node in (1..leaves).rev() {
            state.tree[node] = state.better(state.tree[2 * node], state.tree[2 * node + 1]);
        }
        Ok(state)
    }

    fn better(&self, a: usize, b: usize) -> usize {
        match (a, b) {
            (EMPTY, _) => b,
            (_, EMPTY) => a,
            _ => {
                if self.areas[b] < self.areas[a] || (self.areas[b] == self.areas[a] && b < a) {
                    b
                } else {
                    a
                }
            }
        }
    }

    fn refresh(&mut self, t: usize) {
        let mut node = (self.leaves + t) / 2;
        while node >= 1 {
            self.tree[node] = self.better(self.tree[2 * node], self.tree[2 * node + 1]);
            node /= 2;
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn min(&self) -> MinTriangle {
        let t = self.tree[1];
        MinTriangle {
            area: self.areas[t],
            triple: self.triples[t],
        }
    }

    /// Moves point `index` tentatively and returns the new minimum. Any
    /// earlier uncommitted move is rolled back first.
    pub fn propose(&mut self, index: usize, position: Point2) -> Result<MinTriangle> {
        if index >= self.points.len() {
            return Err(Error::InvalidInput(format!(
                "point index {index} out of range"
            )));
        }
        self.rollback();
        let old_position = std::mem::replace(&mut self.points[index], position);
        let touched = std::mem::take(&mut self.by_point[index]);
        let mut old_areas = Vec::with_capacity(touched.len());
        for &t in &touched {
            let [i, j, k] = self.triples[t];
            old_areas.push(self.areas[t]);
            self.areas[t] = triangle_area(self.points[i], self.points[j], self.points[k]);
            self.refresh(t);
        }
        self.by_point[index] = touched;
        self.pending = Some(Pending {
            index,
            old_position,
            old_areas,
        });
        Ok(self.min())
    }

    pub fn commit(&mut self) {
        self.pending = None;
    }

    pub fn rollback(&mut self) {
        let Some(p) = self.pending.take() else {
            return;
        };
        self.points[p.index] = p.old_position;
        let touched = std::mem::take(&mut self.by_point[p.index]);
        for (&t, &area) in touched.iter().zip(&p.old_areas) {
            self.areas[t] = area;
            self.refresh(t);
        }
        self.by_point[p.index] = touched;
    }

    /// Compares the cached minimum with a full `O(s^3)` recomputation.
    pub fn audit(&self) -> Result<()> {
        let full = min_triangle_naive(&self.points);
        let cached = self.min();
        if full == cached {
            Ok(())
        } else {
            Err(Error::CacheInconsistent {
                cached: cached.area,
                full: full.area,
            })
        }
    }
}

/// Moves `moved_index` to `new_position`, commits, and returns the new
/// minimal area.
pub fn incremental_min_area(
    state: &mut IncrementalMinArea,
    moved_index: usize,
    new_position: Point2,
) -> Result<f64> {
    let best = state.propose(moved_index, new_position)?;
    state.commit();
    Ok(best.area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u64,
    pub current_area: f64,
    pub best_area: f64,
    pub temperature: f64,
}

pub const TRACE_CSV_HEADER: &str = "iteration,current_area,best_area,temperature";

pub fn trace_to_csv(trace: &[TracePoint]) -> String {
    let mut out = format!("{TRACE_CSV_HEADER}\n");
    for t in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.iteration, t.current_area, t.best_area, t.temperature
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub config: Configuration,
    pub report: EvaluationReport,
    pub trace: Vec<TracePoint>,
}

struct RestartResult {
    best_area: f64,
    best_points: Vec<Point2>,
    trace: Vec<TracePoint>,
}

/// Radial projection onto the closed unit disc. The result has
/// `hypot <= 1`, so clamping is idempotent.
fn clamp_to_disc(p: Point2) -> Point2 {
    let norm = p[0].hypot(p[1]);
    if norm <= 1.0 {
        return p;
    }
    let mut q = [p[0] / norm, p[1] / norm];
    while q[0].hypot(q[1]) > 1.0 {
        q = [q[0] * (1.0 - f64::EPSILON), q[1] * (1.0 - f64::EPSILON)];
    }
    q
}

fn run_restart(
    s: usize,
    params: &AnnealParams,
    init: Option<&[Point2]>,
    restart: usize,
) -> Result<RestartResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(restart as u64);
    let start: Vec<Point2> = match init {
        Some(points) => points.iter().map(|&p| clamp_to_disc(p)).collect(),
        None => (0..s).map(|_| sample_disc(&mut rng)).collect(),
    };
    let mut state = IncrementalMinArea::new(start)?;
    let mut current = state.min().area;
    let mut best_area = current;
    let mut best_points = state.points().to_vec();
    let mut temperature = params.initial_temp;
    let trace_every = (params.iterations / 1000).max(1);
    let mut trace = Vec::new();
    let mut accepted = 0u64;

    for iteration in 0..params.iterations {
        let index = rng.random_range(0..s);
        let from = state.points()[index];
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        let to = clamp_to_disc([
            from[0] + params.step_scale * dx,
            from[1] + params.step_scale * dy,
        ]);
        let candidate = state.propose(index, to)?.area;
        let u: f64 = rng.random();
        let accept = candidate >= current || u < ((candidate - current) / temperature).exp();
        if accept {
            state.commit();
            current = candidate;
            accepted += 1;
            if accepted.is_multiple_of(AUDIT_EVERY) {
                state.audit()?;
            }
            if current > best_area {
                best_area = current;
                best_points.copy_from_slice(state.points());
            }
        } else {
            state.rollback();
        }
        if iteration % trace_every == 0 || iteration + 1 == params.iterations {
            trace.push(TracePoint {
                iteration,
                current_area: current,
                best_area,
                temperature,
            });
        }
        temperature *= params.cooling;
    }
    Ok(RestartResult {
        best_area,
        best_points,
        trace,
    })
}

/// Anneals `s` points in the unit disc; restarts run in parallel and the best
/// one (earliest restart on ties) is returned.
pub fn optimize(
    s: usize,
    params: &AnnealParams,
    init: Option<&Configuration>,
) -> Result<AnnealOutcome> {
    if s < 3 {
        return Err(Error::InvalidInput(format!("need s >= 3, got {s}")));
    }
    params.validate()?;
    if let Some(c) = init {
        if c.s() != s {
            return Err(Error::InvalidInput(format!(
                "initial configuration has {} points, expected {s}",
                c.s()
            )));
        }
    }
    let init_points = init.map(|c| c.points());
    let results: Vec<RestartResult> = (0..params.restarts)
        .into_par_iter()
        .map(|r| run_restart(s, params, init_points, r))
        .collect::<Result<_>>()?;
    let winner = results
        .into_iter()
        .reduce(|a, b| if b.best_area > a.best_area { b } else { a })
        .expect("at least one restart");
    let config = Configuration::new(
        winner.best_points,
        Provenance::Optimizer {
            run_id: format!("anneal-s{s}-seed{}", params.seed),
        },
    )?;
    let report = min_triangle_area(&config);
    Ok(AnnealOutcome {
        config,
        report,
        trace: winner.trace,
    })
}
