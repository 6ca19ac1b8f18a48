//! Dehn twists about pants curves acting on Fenchel–Nielsen coordinates,
//! and flow checks against that action.

use serde::{Deserialize, Serialize};

use crate::chart::FnPoint;
use crate::error::{Error, Result};
use crate::flow::{flow, retract, FlowConfig};
use crate::holonomy::{build_holonomy, curve_length};
use crate::systole::systole;
use crate::word::CurveClass;

/// Largest accepted discrepancy in the equivariance and locus checks.
pub const CHECK_TOL: f64 = 1e-6;

/// Length equalities at the start of a locus check must hold to this tolerance.
pub const LOCUS_START_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistFactor {
    pub curve: usize,
    pub count: i64,
}

/// A product of Dehn twists about pants curves, applied first to last.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MappingClass {
    pub factors: Vec<TwistFactor>,
}

impl MappingClass {
    pub fn twist(curve: usize, count: i64) -> MappingClass {
        MappingClass {
            factors: vec![TwistFactor { curve, count }],
        }
    }

    pub fn inverse(&self) -> MappingClass {
        MappingClass {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| TwistFactor {
                    curve: f.curve,
                    count: -f.count,
                })
                .collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &MappingClass) -> MappingClass {
        MappingClass {
            factors: self.factors.iter().chain(&other.factors).copied().collect(),
        }
    }
}

/// `θ_i ← θ_i + k·ℓ_i` for each factor `(i, k)`.
pub fn apply(mc: &MappingClass, x: &FnPoint) -> Result<FnPoint> {
    let mut y = x.clone();
    for f in &mc.factors {
        if f.curve >= x.dim() {
            return Err(Error::ChartMismatch(format!(
                "twist about curve {} on a chart with {} curves",
                f.curve,
                x.dim()
            )));
        }
        if f.count != 0 {
            y.twists[f.curve] += f.count as f64 * y.lengths[f.curve];
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub mapping_class: MappingClass,
    pub start: Vec<f64>,
    /// `retract(apply(mc, x0))`.
    pub retract_of_image: Vec<f64>,
    /// `apply(mc, retract(x0))`.
    pub image_of_retract: Vec<f64>,
    pub discrepancy: f64,
    pub systole: f64,
    pub systole_of_image: f64,
    pub systole_invariant: bool,
    pub pass: bool,
}

pub fn equivariance_check(
    mc: &MappingClass,
    x0: &FnPoint,
    cfg: &FlowConfig,
) -> Result<EquivarianceReport> {
    let image = apply(mc, x0)?;
    let lhs = retract(&image, cfg.eps, cfg)?;
    let rhs = apply(mc, &retract(x0, cfg.eps, cfg)?)?;
    let discrepancy = lhs.distance(&rhs)?;
    let systole0 = systole(x0, &cfg.enumeration)?.value;
    let systole1 = systole(&image, &cfg.enumeration)?.value;
    Ok(EquivarianceReport {
        mapping_class: mc.clone(),
        start: x0.coords(),
        retract_of_image: lhs.coords(),
        image_of_retract: rhs.coords(),
        discrepancy,
        systole: systole0,
        systole_of_image: systole1,
        systole_invariant: systole0 == systole1,
        pass: discrepancy <= CHECK_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusRelation {
    pub left: CurveClass,
    pub right: CurveClass,
    pub start_gap: f64,
    /// Largest `|ℓ_left − ℓ_right|` over all samples.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusReport {
    pub start: Vec<f64>,
    pub relations: Vec<LocusRelation>,
    pub samples: usize,
    /// Whether the field vanished along the whole trajectory.
    pub stationary: bool,
    pub pass: bool,
}

/// Check that each length equality at `x0` persists along the flow.
pub fn symmetric_locus_check(
    x0: &FnPoint,
    relations: &[(CurveClass, CurveClass)],
    cfg: &FlowConfig,
) -> Result<LocusReport> {
    let lengths = |x: &FnPoint| -> Result<Vec<(f64, f64)>> {
        if relations.is_empty() {
            return Ok(vec![]);
        }
        let rep = build_holonomy(x)?;
        relations
            .iter()
            .map(|(a, b)| Ok((curve_length(&rep, a)?, curve_length(&rep, b)?)))
            .collect()
    };
    let start: Vec<f64> = lengths(x0)?.iter().map(|(a, b)| (a - b).abs()).collect();
    if let Some(k) = start.iter().position(|g| *g > LOCUS_START_TOL) {
        return Err(Error::InvalidParameter(format!(
            "relation {} = {} does not hold at the start (gap {:e})",
            relations[k].0, relations[k].1, start[k]
        )));
    }
    let traj = flow(x0, cfg)?;
    let mut max_gap = start.clone();
    for s in &traj.samples {
        for (k, (a, b)) in lengths(&s.point)?.into_iter().enumerate() {
            max_gap[k] = max_gap[k].max((a - b).abs());
        }
    }
    let pass = max_gap.iter().all(|g| *g <= CHECK_TOL);
    Ok(LocusReport {
        start: x0.coords(),
        relations: relations
            .iter()
            .zip(start.iter().zip(&max_gap))
            .map(|((a, b), (s, m))| LocusRelation {
                left: a.clone(),
                right: b.clone(),
                start_gap: *s,
                max_gap: *m,
            })
            .collect(),
        samples: traj.samples.len(),
        stationary: traj.samples.iter().all(|s| s.speed == 0.0),
        pass,
    })
}
