//! Seeded sampling and the two batch experiments: the discontinuity of the
//! naive field across `ℓ = 3ε`, and coverage of the thick part by Bers boxes.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{Chart, FnPoint};
use crate::error::{Error, Result};
use crate::gradient::{vector_field_v, FieldMode, MetricModel};
use crate::systole::{in_bers_box, systole, BersBox, EnumerationConfig};

/// Shortest length drawn by the samplers.
pub const MIN_SAMPLE_LENGTH: f64 = 0.002;

/// Longest length drawn for flow starts.
pub const MAX_SAMPLE_LENGTH: f64 = 1.5;

fn twists_for(lengths: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    lengths
        .iter()
        .map(|l| rng.random_range(-0.5..=0.5) * l)
        .collect()
}

/// A point with at least one length below `eps`. Each length is drawn from
/// `[0.002, 3ε]` or `[3ε, 1.5]` with equal odds; twists are `α·ℓ`, `|α| ≤ 1/2`.
pub fn random_thin_point(chart: &Arc<Chart>, eps: f64, rng: &mut ChaCha8Rng) -> Result<FnPoint> {
    let d = chart.curve_count();
    let mut lengths: Vec<f64> = (0..d)
        .map(|_| {
            if rng.random_bool(0.5) {
                rng.random_range(MIN_SAMPLE_LENGTH..3.0 * eps)
            } else {
                rng.random_range(3.0 * eps..MAX_SAMPLE_LENGTH)
            }
        })
        .collect();
    if lengths.iter().all(|&l| l >= eps) {
        let j = rng.random_range(0..d);
        lengths[j] = rng.random_range(MIN_SAMPLE_LENGTH..eps);
    }
    let twists = twists_for(&lengths, rng);
    FnPoint::new(chart.clone(), lengths, twists)
}

/// A point with every length in `[3ε, 1.5]`, hence `Λ ≥ 3ε`.
pub fn random_thick_point(chart: &Arc<Chart>, eps: f64, rng: &mut ChaCha8Rng) -> Result<FnPoint> {
    let lengths: Vec<f64> = (0..chart.curve_count())
        .map(|_| rng.random_range(3.0 * eps..MAX_SAMPLE_LENGTH))
        .collect();
    let twists = twists_for(&lengths, rng);
    FnPoint::new(chart.clone(), lengths, twists)
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuityConfig {
    /// Distance of each straddling point from `ℓ₀ = 3ε`.
    pub offset: f64,
    /// Separation of the pairs used for the Lipschitz estimate.
    pub h: f64,
    pub calibration_pairs: usize,
    pub test_pairs: usize,
    /// Safety factor between the calibrated quotient and `K`.
    pub safety: f64,
    /// The naive jump must exceed this fraction of the largest naive field norm.
    pub jump_fraction: f64,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        ContinuityConfig {
            offset: 1e-4,
            h: 1e-4,
            calibration_pairs: 1000,
            test_pairs: 1000,
            safety: 2.0,
            jump_fraction: 0.1,
        }
    }
}

impl ContinuityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.offset > 0.0 && self.h > 0.0 && self.h <= 1e-4 && self.safety >= 1.0) {
            return Err(Error::InvalidParameter(
                "continuity demo needs offset > 0, 0 < h ≤ 1e-4 and safety ≥ 1".into(),
            ));
        }
        if self.calibration_pairs == 0 {
            return Err(Error::InvalidParameter(
                "calibration_pairs must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub eps: f64,
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub separation: f64,
    pub naive_jump: f64,
    pub naive_max_norm: f64,
    pub naive_discontinuous: bool,
    pub blended_delta: f64,
    pub calibration_max_quotient: f64,
    /// Lipschitz constant `K` of the blended field used for all bounds.
    pub lipschitz_k: f64,
    pub blended_bound: f64,
    pub test_pairs: usize,
    pub test_max_quotient: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Region sampled around the straddle: `ℓ₀ ∈ [2ε, 4ε]`, `ℓ₁ ∈ [0.3ε, 2.5ε]`.
fn demo_point(chart: &Arc<Chart>, eps: f64, rng: &mut ChaCha8Rng) -> Result<FnPoint> {
    let l0 = rng.random_range(2.0 * eps..4.0 * eps);
    let l1 = rng.random_range(0.3 * eps..2.5 * eps);
    let lengths = vec![l0, l1];
    let twists = twists_for(&lengths, rng);
    FnPoint::new(chart.clone(), lengths, twists)
}

/// Compare naive and blended fields across `ℓ₀ = 3ε` on a two-curve chart.
pub fn continuity_demo(
    chart: &Arc<Chart>,
    eps: f64,
    metric: &MetricModel,
    enumeration: &EnumerationConfig,
    cfg: &ContinuityConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ContinuityReport> {
    cfg.validate()?;
    if chart.curve_count() != 2 {
        return Err(Error::ChartMismatch(
            "the continuity demo uses a two-curve chart".into(),
        ));
    }
    let field = |x: &FnPoint, mode| vector_field_v(x, eps, mode, metric, enumeration);

    let l1 = 0.5 * eps;
    let x_minus = FnPoint::new(
        chart.clone(),
        vec![3.0 * eps - cfg.offset, l1],
        vec![0.3 * (3.0 * eps), 0.2 * l1],
    )?;
    let x_plus = FnPoint::new(
        chart.clone(),
        vec![3.0 * eps + cfg.offset, l1],
        x_minus.twists.clone(),
    )?;
    let separation = x_minus.distance(&x_plus)?;
    let naive_minus = field(&x_minus, FieldMode::Naive)?;
    let naive_plus = field(&x_plus, FieldMode::Naive)?;
    let naive_jump = naive_minus.distance(&naive_plus);
    let blended_delta =
        field(&x_minus, FieldMode::Blended)?.distance(&field(&x_plus, FieldMode::Blended)?);
    let mut naive_max_norm = naive_minus.norm().max(naive_plus.norm());

    let mut quotients = |pairs: usize, rng: &mut ChaCha8Rng| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(pairs);
        while out.len() < pairs {
            let x = demo_point(chart, eps, rng)?;
            let u = random_unit(x.dim() * 2, rng);
            let yc: Vec<f64> = x
                .coords()
                .iter()
                .zip(&u)
                .map(|(a, b)| a + cfg.h * b)
                .collect();
            let y = x.with_coords(&yc)?;
            let dist = x.distance(&y)?;
            let vx = field(&x, FieldMode::Blended)?;
            let vy = field(&y, FieldMode::Blended)?;
            naive_max_norm = naive_max_norm.max(field(&x, FieldMode::Naive)?.norm());
            out.push(vx.distance(&vy) / dist);
        }
        Ok(out)
    };
    let calibration = quotients(cfg.calibration_pairs, rng)?;
    let calibration_max_quotient = calibration.iter().copied().fold(0.0, f64::max);
    let lipschitz_k = cfg.safety * calibration_max_quotient;
    let tests = quotients(cfg.test_pairs, rng)?;
    let test_max_quotient = tests.iter().copied().fold(0.0, f64::max);
    let violations = tests.iter().filter(|&&q| q > lipschitz_k).count();

    let blended_bound = lipschitz_k * separation;
    let naive_discontinuous = naive_jump > cfg.jump_fraction * naive_max_norm;
    Ok(ContinuityReport {
        eps,
        x_minus: x_minus.coords(),
        x_plus: x_plus.coords(),
        separation,
        naive_jump,
        naive_max_norm,
        naive_discontinuous,
        blended_delta,
        calibration_max_quotient,
        lipschitz_k,
        blended_bound,
        test_pairs: tests.len(),
        test_max_quotient,
        violations,
        pass: naive_discontinuous && blended_delta <= blended_bound && violations == 0,
    })
}

/// One box of a cover family; the floor defaults to the run's ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub c: f64,
    pub theta0: f64,
    #[serde(default)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub samples: usize,
    /// Lengths are drawn from `(0, length_max]`.
    pub length_max: f64,
    /// Twists are drawn from `[-twist_max, twist_max]`.
    pub twist_max: f64,
    /// Give up after this many rejected draws.
    #[serde(default = "default_max_draws")]
    pub max_draws: usize,
    pub boxes: Vec<BoxSpec>,
}

fn default_max_draws() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverSample {
    pub point: Vec<f64>,
    /// Point after Dehn twists bring each `|θ_i|` to at most `ℓ_i/2`.
    pub reduced: Vec<f64>,
    pub twist_powers: Vec<i64>,
    pub systole: f64,
    /// First box containing the reduced point.
    pub box_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub eps: f64,
    pub boxes: Vec<BoxSpec>,
    pub draws: usize,
    pub samples: Vec<CoverSample>,
    pub uncovered: usize,
    pub pass: bool,
}

/// Draw points of the thick part and locate each, modulo twists about the
/// pants curves, in the first box of the family that contains it.
pub fn cover_check(
    chart: &Arc<Chart>,
    eps: f64,
    enumeration: &EnumerationConfig,
    cfg: &CoverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CoverReport> {
    if !(cfg.length_max > 0.0 && cfg.twist_max >= 0.0) || cfg.boxes.is_empty() {
        return Err(Error::InvalidParameter(
            "cover check needs length_max > 0, twist_max ≥ 0 and at least one box".into(),
        ));
    }
    let boxes: Vec<BersBox> = cfg
        .boxes
        .iter()
        .map(|b| BersBox::new(chart.clone(), b.c, b.theta0, Some(b.eps.unwrap_or(eps))))
        .collect::<Result<_>>()?;
    let d = chart.curve_count();
    let mut samples = Vec::with_capacity(cfg.samples);
    let mut draws = 0;
    while samples.len() < cfg.samples {
        if draws >= cfg.max_draws {
            return Err(Error::InvalidParameter(format!(
                "only {} thick samples in {draws} draws",
                samples.len()
            )));
        }
        draws += 1;
        let lengths: Vec<f64> = (0..d)
            .map(|_| cfg.length_max * (1.0 - rng.random::<f64>()))
            .collect();
        let twists: Vec<f64> = (0..d)
            .map(|_| rng.random_range(-cfg.twist_max..=cfg.twist_max))
            .collect();
        let x = FnPoint::new(chart.clone(), lengths, twists)?;
        let lambda = systole(&x, enumeration)?.value;
        if lambda < eps {
            continue;
        }
        let twist_powers: Vec<i64> = (0..d)
            .map(|i| (x.twists[i] / x.lengths[i]).round() as i64)
            .collect();
        let mut reduced = x.clone();
        for i in 0..d {
            reduced.twists[i] -= twist_powers[i] as f64 * x.lengths[i];
        }
        let mut box_index = None;
        for (k, b) in boxes.iter().enumerate() {
            if in_bers_box(&reduced, b)? {
                box_index = Some(k);
                break;
            }
        }
        samples.push(CoverSample {
            point: x.coords(),
            reduced: reduced.coords(),
            twist_powers,
            systole: lambda,
            box_index,
        });
    }
    let uncovered = samples.iter().filter(|s| s.box_index.is_none()).count();
    Ok(CoverReport {
        eps,
        boxes: cfg.boxes.clone(),
        draws,
        samples,
        uncovered,
        pass: uncovered == 0,
    })
}
