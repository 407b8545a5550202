//! Seeded sweeps that tally the compression identities, the integer
//! estimates and the three ball theorems.
//!
//! Every sweep is split into fixed-size chunks; chunk `c` draws from its own
//! ChaCha stream `c`, and chunk records are merged in chunk order, so the
//! result does not depend on the number of worker threads.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{
    admissible_points_on_circle, check_admissible_equivalence, check_decider, check_nesting,
    has_distinct_nonzero_coords, induce_ball, AuditRecord,
};
use crate::compression::{
    compress, gap_bounds, gap_identity_residual, gap_squared, harmonic_estimate, mass_bounds,
    PointN, Scale, GAP_IDENTITY_REL_TOL,
};
use crate::error::Result;

const CHUNK: usize = 1024;

/// Relative per-coordinate tolerance of the involution check.
pub const INVOLUTION_REL_TOL: f64 = 1e-12;

/// Sample sizes and ranges for [`validate_claims`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub seed: u64,
    pub m: f64,
    pub decider_samples: usize,
    /// Integer coordinates are drawn from `1..=coord_max`.
    pub coord_max: u32,
    pub nesting_trials: usize,
    pub nesting_points: usize,
    pub admissible_samples: usize,
    pub identity_samples: usize,
    pub harmonic_max: u64,
    pub harmonic_extra: Vec<u64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            m: 1.0,
            decider_samples: 100_000,
            coord_max: 50,
            nesting_trials: 1_000,
            nesting_points: 100,
            admissible_samples: 1_000,
            identity_samples: 10_000,
            harmonic_max: 10_000,
            harmonic_extra: vec![100_000, 1_000_000],
        }
    }
}

/// Smallest and largest observed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn merge(&mut self, o: Range) {
        self.min = self.min.min(o.min);
        self.max = self.max.max(o.max);
    }
}

/// `mass / lower` and `mass / upper` over the integer sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRatioSummary {
    pub samples: u64,
    pub mass_over_lower: Range,
    pub mass_over_upper: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsReport {
    pub config: AuditConfig,
    pub involution: AuditRecord,
    pub gap_identity: AuditRecord,
    pub gap_bounds: AuditRecord,
    pub mass_bound_ratios: MassRatioSummary,
    pub harmonic: AuditRecord,
    pub decider_integer: AuditRecord,
    pub decider_real: AuditRecord,
    /// One sample per trial: pass when every sampled point of ball(y) lies in ball(x).
    pub nesting: AuditRecord,
    /// Per sampled point, pooled over all trials.
    pub nesting_points: AuditRecord,
    pub nesting_vacuous: u64,
    pub admissible: AuditRecord,
    /// Generated circle points skipped for repeated or zero coordinates.
    pub admissible_flagged_non_distinct: u64,
}

impl ClaimsReport {
    pub fn records(&self) -> Vec<(&'static str, &AuditRecord)> {
        vec![
            ("involution", &self.involution),
            ("gap_identity", &self.gap_identity),
            ("gap_bounds", &self.gap_bounds),
            ("harmonic", &self.harmonic),
            ("decider_integer", &self.decider_integer),
            ("decider_real", &self.decider_real),
            ("nesting", &self.nesting),
            ("nesting_points", &self.nesting_points),
            ("admissible", &self.admissible),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("claims report serializes")
    }
}

/// Coordinates with log-uniform magnitude in `[1e-3, 1e3]` and random sign.
pub fn random_valid_tuple<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PointN {
    loop {
        let coords = (0..n)
            .map(|_| {
                let magnitude = 10f64.powf(rng.random_range(-3.0..=3.0));
                if rng.random::<bool>() {
                    -magnitude
                } else {
                    magnitude
                }
            })
            .collect();
        if let Ok(p) = PointN::new(coords) {
            return p;
        }
    }
}

/// `m` uniform in `(0, 1]`.
pub fn random_scale<R: Rng + ?Sized>(rng: &mut R) -> Scale {
    let u: f64 = rng.random();
    Scale::new(1.0 - u).expect("1 - U lies in (0, 1]")
}

/// `n` distinct integers from `1..=max`.
pub fn random_distinct_integers<R: Rng + ?Sized>(rng: &mut R, n: usize, max: u32) -> PointN {
    let coords = sample(rng, max as usize, n)
        .into_iter()
        .map(|i| (i + 1) as f64)
        .collect();
    PointN::new(coords).expect("sampled without replacement")
}

/// `n` distinct reals uniform in `(0, max]`.
pub fn random_distinct_reals<R: Rng + ?Sized>(rng: &mut R, n: usize, max: f64) -> PointN {
    loop {
        let coords = (0..n).map(|_| max * (1.0 - rng.random::<f64>())).collect();
        if let Ok(p) = PointN::new(coords) {
            return p;
        }
    }
}

fn chunk_rng(seed: u64, tag: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `body(rng, count)` over `total` samples in seeded chunks and
/// combines the chunk results in order.
fn chunked<T, F, M>(total: usize, seed: u64, tag: u64, body: F, mut merge: M) -> Result<Option<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Result<T> + Sync,
    M: FnMut(&mut T, T),
{
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(total - c * CHUNK);
            body(&mut chunk_rng(seed, tag, c), count)
        })
        .collect::<Result<_>>()?;
    let mut iter = parts.into_iter();
    let Some(mut acc) = iter.next() else {
        return Ok(None);
    };
    for part in iter {
        merge(&mut acc, part);
    }
    Ok(Some(acc))
}

fn record_sweep<F>(total: usize, seed: u64, tag: u64, body: F) -> Result<AuditRecord>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<AuditRecord> + Sync,
{
    Ok(chunked(total, seed, tag, body, |a, b| a.merge(b))?.unwrap_or_default())
}

/// `compress(compress(x)) == x` per coordinate within [`INVOLUTION_REL_TOL`].
pub fn audit_involution(samples: usize, seed: u64) -> Result<AuditRecord> {
    record_sweep(samples, seed, 1, |rng, count| {
        let mut rec = AuditRecord::new();
        for _ in 0..count {
            let n = rng.random_range(2..=16);
            let x = random_valid_tuple(rng, n);
            let m = random_scale(rng);
            let pass = compress(&x, m)
                .and_then(|img| compress(&img, m))
                .map(|back| {
                    back.coords()
                        .iter()
                        .zip(x.coords())
                        .all(|(b, a)| (b - a).abs() <= INVOLUTION_REL_TOL * a.abs())
                })
                .unwrap_or(false);
            rec.tally(pass, || vec![x.coords().to_vec(), vec![m.m()]]);
        }
        Ok(rec)
    })
}

/// Relative residual of the squared-gap expansion within [`GAP_IDENTITY_REL_TOL`].
///
/// Uses the same seed and stream layout as [`audit_involution`], so both
/// sweeps see the same tuples.
pub fn audit_gap_identity(samples: usize, seed: u64) -> Result<AuditRecord> {
    record_sweep(samples, seed, 1, |rng, count| {
        let mut rec = AuditRecord::new();
        for _ in 0..count {
            let n = rng.random_range(2..=16);
            let x = random_valid_tuple(rng, n);
            let m = random_scale(rng);
            let g2 = gap_squared(&x, m);
            let pass = gap_identity_residual(&x, m).abs() <= GAP_IDENTITY_REL_TOL * g2;
            rec.tally(pass, || vec![x.coords().to_vec(), vec![m.m()]]);
        }
        Ok(rec)
    })
}

/// `lower <= gap^2 <= upper` on distinct positive integers (`n <= 10`,
/// coordinates `<= 10^6`), plus the mass-estimate ratios on the same tuples.
pub fn audit_integer_bounds(samples: usize, seed: u64) -> Result<(AuditRecord, MassRatioSummary)> {
    let merged = chunked(
        samples,
        seed,
        2,
        |rng, count| {
            let mut rec = AuditRecord::new();
            let mut ratios = MassRatioSummary {
                samples: 0,
                mass_over_lower: Range::empty(),
                mass_over_upper: Range::empty(),
            };
            for _ in 0..count {
                let n = rng.random_range(2..=10);
                let x = random_distinct_integers(rng, n, 1_000_000);
                let m = random_scale(rng);
                let bounds = gap_bounds(&x, m)?;
                rec.tally(bounds.sandwiched(), || {
                    vec![x.coords().to_vec(), vec![m.m()]]
                });
                let mb = mass_bounds(&x, m)?;
                ratios.samples += 1;
                ratios.mass_over_lower.add(mb.lower_ratio());
                ratios.mass_over_upper.add(mb.upper_ratio());
            }
            Ok((rec, ratios))
        },
        |(ra, sa), (rb, sb)| {
            ra.merge(rb);
            sa.samples += sb.samples;
            sa.mass_over_lower.merge(sb.mass_over_lower);
            sa.mass_over_upper.merge(sb.mass_over_upper);
        },
    )?;
    Ok(merged.unwrap_or((
        AuditRecord::new(),
        MassRatioSummary {
            samples: 0,
            mass_over_lower: Range::empty(),
            mass_over_upper: Range::empty(),
        },
    )))
}

/// `|H(x) - ln x - gamma| <= 1/x` for `x = 1..=max` and each of `extra`.
pub fn audit_harmonic(max: u64, extra: &[u64]) -> Result<AuditRecord> {
    let xs: Vec<u64> = (1..=max).chain(extra.iter().copied()).collect();
    let parts: Vec<AuditRecord> = xs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut rec = AuditRecord::new();
            for &x in chunk {
                let h = harmonic_estimate(x)?;
                rec.tally(h.within_bound(x), || vec![vec![x as f64, h.error]]);
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let mut out = AuditRecord::new();
    for p in parts {
        out.merge(p);
    }
    Ok(out)
}

/// Decider biconditional on planar pairs, integer coordinates from
/// `1..=coord_max` and, separately, reals from `(0, coord_max]`.
pub fn audit_decider(
    samples: usize,
    coord_max: u32,
    m: Scale,
    seed: u64,
) -> Result<(AuditRecord, AuditRecord)> {
    let integer = record_sweep(samples, seed, 3, |rng, count| {
        let mut rec = AuditRecord::new();
        for _ in 0..count {
            let x = random_distinct_integers(rng, 2, coord_max);
            let z = random_distinct_integers(rng, 2, coord_max);
            let check = check_decider(&x, &z, m)?;
            rec.tally(check.holds(), || {
                vec![x.coords().to_vec(), z.coords().to_vec()]
            });
        }
        Ok(rec)
    })?;
    let real = record_sweep(samples, seed, 4, |rng, count| {
        let mut rec = AuditRecord::new();
        for _ in 0..count {
            let x = random_distinct_reals(rng, 2, coord_max as f64);
            let z = random_distinct_reals(rng, 2, coord_max as f64);
            let check = check_decider(&x, &z, m)?;
            rec.tally(check.holds(), || {
                vec![x.coords().to_vec(), z.coords().to_vec()]
            });
        }
        Ok(rec)
    })?;
    Ok((integer, real))
}

/// Nesting trials: integer `x`, `y` drawn uniformly from ball(x), then
/// `points` samples of ball(y) tested against ball(x).
///
/// Returns (per-trial record, pooled per-point record, vacuous trial count).
pub fn audit_nesting(
    trials: usize,
    points: usize,
    coord_max: u32,
    m: Scale,
    seed: u64,
) -> Result<(AuditRecord, AuditRecord, u64)> {
    let merged = chunked(
        trials,
        seed,
        5,
        |rng, count| {
            let mut per_trial = AuditRecord::new();
            let mut pooled = AuditRecord::new();
            let mut vacuous = 0u64;
            for _ in 0..count {
                let x = random_distinct_integers(rng, 2, coord_max);
                let ball = induce_ball(&x, m);
                let y = loop {
                    let candidate = ball.sample_uniform(rng);
                    if let Ok(y) = PointN::new(candidate) {
                        if ball.contains(y.coords())? {
                            break y;
                        }
                    }
                };
                let check = check_nesting(&x, &y, m, points, rng)?;
                vacuous += u64::from(check.vacuous);
                let first_escape = check.record.counterexamples.first().cloned();
                per_trial.tally(check.nested(), || {
                    let mut w = vec![x.coords().to_vec(), y.coords().to_vec()];
                    w.extend(first_escape.into_iter().flatten());
                    w
                });
                pooled.merge(check.record);
            }
            Ok((per_trial, pooled, vacuous))
        },
        |(ta, pa, va), (tb, pb, vb)| {
            ta.merge(tb);
            pa.merge(pb);
            *va += vb;
        },
    )?;
    Ok(merged.unwrap_or_default())
}

/// Admissible-point equivalence on points placed by
/// [`admissible_points_on_circle`] around integer `x`.
///
/// Returns the record and the number of generated points skipped because
/// their coordinates were not distinct and nonzero.
pub fn audit_admissible(
    samples: usize,
    coord_max: u32,
    m: Scale,
    seed: u64,
) -> Result<(AuditRecord, u64)> {
    let merged = chunked(
        samples,
        seed,
        6,
        |rng, count| {
            let mut rec = AuditRecord::new();
            let mut flagged = 0u64;
            let mut done = 0;
            while done < count {
                let x = random_distinct_integers(rng, 2, coord_max);
                let k = 2 * rng.random_range(1..=4);
                let pts = admissible_points_on_circle(&x, m, k)?;
                let pick = pts[rng.random_range(0..k)];
                if !has_distinct_nonzero_coords(&pick) {
                    flagged += 1;
                    continue;
                }
                let y = PointN::new(pick.to_vec())?;
                let check = check_admissible_equivalence(&x, &y, m)?;
                rec.tally(check.holds(), || {
                    vec![x.coords().to_vec(), y.coords().to_vec()]
                });
                done += 1;
            }
            Ok((rec, flagged))
        },
        |(ra, fa), (rb, fb)| {
            ra.merge(rb);
            *fa += fb;
        },
    )?;
    Ok(merged.unwrap_or_default())
}

/// Every audit in one report.
pub fn validate_claims(config: &AuditConfig) -> Result<ClaimsReport> {
    let m = Scale::new(config.m)?;
    let seed = config.seed;
    let involution = audit_involution(config.identity_samples, seed)?;
    let gap_identity = audit_gap_identity(config.identity_samples, seed)?;
    let (gap_bounds, mass_bound_ratios) = audit_integer_bounds(config.identity_samples, seed)?;
    let harmonic = audit_harmonic(config.harmonic_max, &config.harmonic_extra)?;
    let (decider_integer, decider_real) =
        audit_decider(config.decider_samples, config.coord_max, m, seed)?;
    let (nesting, nesting_points, nesting_vacuous) = audit_nesting(
        config.nesting_trials,
        config.nesting_points,
        config.coord_max,
        m,
        seed,
    )?;
    let (admissible, admissible_flagged_non_distinct) =
        audit_admissible(config.admissible_samples, config.coord_max, m, seed)?;
    Ok(ClaimsReport {
        config: config.clone(),
        involution,
        gap_identity,
        gap_bounds,
        mass_bound_ratios,
        harmonic,
        decider_integer,
        decider_real,
        nesting,
        nesting_points,
        nesting_vacuous,
        admissible,
        admissible_flagged_non_distinct,
    })
}
