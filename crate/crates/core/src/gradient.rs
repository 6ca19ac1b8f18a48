//! Length differentials, model inner products, the Gram system and the field `V`.
//!
//! Inner products are diagonal in the coframe `(dℓ_i, η_i)` with
//! `η_i = dθ_i − (θ_i/ℓ_i)·dℓ_i`. The twist `θ_i ↦ θ_i + ℓ_i` preserves
//! `η_i`, so both metrics and the resulting field commute with Dehn twists
//! about pants curves. On length differentials `η_i` plays no role:
//! `⟨dℓ_i, dℓ_j⟩` is `δ_ij·2ℓ_i/π` for the model metric and `δ_ij` for the
//! Euclidean one.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chart::FnPoint;
use crate::error::{Error, Result};
use crate::flow::cutoff_phi;
use crate::holonomy::{build_holonomy, curve_length};
use crate::systole::{short_set, EnumerationConfig, ShortSet};
use crate::word::CurveClass;

/// Condition estimates above this are rejected.
pub const CONDITION_GUARD: f64 = 1e12;

/// Largest accepted `‖Gκ − r‖∞`.
pub const SOLVE_TOL: f64 = 1e-9;

/// Components `dℓ_i` and `dθ_i` of a covector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub dl: Vec<f64>,
    pub dt: Vec<f64>,
}

/// Components along `∂/∂ℓ_i` and `∂/∂θ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub dl: Vec<f64>,
    pub dt: Vec<f64>,
}

impl Covector {
    pub fn zero(d: usize) -> Covector {
        Covector {
            dl: vec![0.0; d],
            dt: vec![0.0; d],
        }
    }

    /// `dℓ_i`.
    pub fn unit_length(d: usize, i: usize) -> Covector {
        let mut c = Covector::zero(d);
        c.dl[i] = 1.0;
        c
    }

    pub fn apply(&self, v: &TangentVector) -> f64 {
        dot(&self.dl, &v.dl) + dot(&self.dt, &v.dt)
    }
}

impl TangentVector {
    pub fn zero(d: usize) -> TangentVector {
        TangentVector {
            dl: vec![0.0; d],
            dt: vec![0.0; d],
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        self.dl.iter().chain(&self.dt).copied().collect()
    }

    pub fn from_coords(c: &[f64]) -> TangentVector {
        let d = c.len() / 2;
        TangentVector {
            dl: c[..d].to_vec(),
            dt: c[d..].to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.dl.iter().chain(&self.dt).all(|&v| v == 0.0)
    }

    pub fn distance(&self, other: &TangentVector) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MetricKind {
    EuclidFn,
    ModelWp,
}

/// Inner product on covectors at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricModel {
    pub kind: MetricKind,
    /// Ratio of the twist-block to the length-block scale (model metric only).
    #[serde(default = "one")]
    pub twist_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MetricModel {
    fn default() -> Self {
        MetricModel::MODEL_WP
    }
}

impl MetricModel {
    pub const MODEL_WP: MetricModel = MetricModel {
        kind: MetricKind::ModelWp,
        twist_scale: 1.0,
    };
    pub const EUCLID_FN: MetricModel = MetricModel {
        kind: MetricKind::EuclidFn,
        twist_scale: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.twist_scale > 0.0 && self.twist_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "twist_scale {} must be positive",
                self.twist_scale
            )));
        }
        Ok(())
    }

    /// Scales `(s_ℓ, s_η)` of curve `i` at `x`.
    fn scales(&self, x: &FnPoint, i: usize) -> (f64, f64) {
        match self.kind {
            MetricKind::EuclidFn => (1.0, 1.0),
            MetricKind::ModelWp => {
                let s = 2.0 * x.lengths[i] / std::f64::consts::PI;
                (s, self.twist_scale * s)
            }
        }
    }

    /// Components of a covector in the coframe `(dℓ_i, η_i)`.
    fn split(x: &FnPoint, a: &Covector, i: usize) -> (f64, f64) {
        (a.dl[i] + a.dt[i] * x.twists[i] / x.lengths[i], a.dt[i])
    }

    pub fn inner(&self, x: &FnPoint, a: &Covector, b: &Covector) -> f64 {
        (0..x.dim())
            .map(|i| {
                let (sl, se) = self.scales(x, i);
                let (al, ae) = Self::split(x, a, i);
                let (bl, be) = Self::split(x, b, i);
                sl * al * bl + se * ae * be
            })
            .sum()
    }

    /// Metric dual of a covector: the `v` with `b(v) = ⟨b, a⟩` for every `b`.
    pub fn raise(&self, x: &FnPoint, a: &Covector) -> TangentVector {
        let d = x.dim();
        let mut v = TangentVector::zero(d);
        for i in 0..d {
            let (sl, se) = self.scales(x, i);
            let (al, ae) = Self::split(x, a, i);
            v.dl[i] = sl * al;
            v.dt[i] = sl * al * x.twists[i] / x.lengths[i] + se * ae;
        }
        v
    }
}

/// Default finite-difference step for `x`: `10⁻³`, reduced on very thin points.
pub fn default_step(x: &FnPoint) -> f64 {
    let min = x.lengths.iter().copied().fold(f64::INFINITY, f64::min);
    (1e-3f64).min(0.25 * min)
}

/// `dℓ_c` at `x`. Exact for pants curves; otherwise central differences of
/// step `h` and `h/2` combined by Richardson extrapolation.
pub fn length_differential(x: &FnPoint, c: &CurveClass, h: f64) -> Result<Covector> {
    let d = x.dim();
    if let CurveClass::Pants(i) = c {
        if *i >= d {
            return Err(Error::ChartMismatch(format!(
                "pants curve {i} on a chart with {d} curves"
            )));
        }
        return Ok(Covector::unit_length(d, *i));
    }
    let min = x.lengths.iter().copied().fold(f64::INFINITY, f64::min);
    if !(h > 0.0) || min <= 2.0 * h || h < 1e-10 {
        return Err(Error::StepUnderflow(h));
    }
    let base = x.coords();
    let f = |k: usize, delta: f64| -> Result<f64> {
        let mut y = base.clone();
        y[k] += delta;
        let p = x.with_coords(&y)?;
        curve_length(&build_holonomy(&p)?, c)
    };
    let mut grad = vec![0.0; 2 * d];
    for (k, g) in grad.iter_mut().enumerate() {
        let coarse = (f(k, h)? - f(k, -h)?) / (2.0 * h);
        let fine = (f(k, 0.5 * h)? - f(k, -0.5 * h)?) / h;
        *g = (4.0 * fine - coarse) / 3.0;
    }
    Ok(Covector {
        dl: grad[..d].to_vec(),
        dt: grad[d..].to_vec(),
    })
}

/// `G[σ,σ'] = ⟨dℓ_σ, dℓ_σ'⟩` for the short set, whose entries must all be pants curves.
pub fn gram_matrix(x: &FnPoint, s: &ShortSet, m: &MetricModel) -> Result<Vec<Vec<f64>>> {
    if s.is_empty() {
        return Err(Error::InvalidParameter(
            "Gram matrix of an empty short set".into(),
        ));
    }
    let idx = s.pants_indices()?;
    let d = x.dim();
    let covs: Vec<Covector> = idx.iter().map(|&i| Covector::unit_length(d, i)).collect();
    Ok(covs
        .iter()
        .map(|a| covs.iter().map(|b| m.inner(x, a, b)).collect())
        .collect())
}

/// Solution of `G·κ = targets` with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaSolve {
    pub kappa: Vec<f64>,
    /// `‖Gκ − targets‖∞`.
    pub residual: f64,
    /// `‖G‖₁·‖G⁻¹‖₁`.
    pub condition: f64,
}

/// Cholesky solve with one step of iterative refinement.
pub fn solve_kappa(g: &[Vec<f64>], targets: &[f64]) -> Result<KappaSolve> {
    let n = targets.len();
    if g.len() != n || g.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter(format!(
            "Gram matrix shape does not match {n} targets"
        )));
    }
    if n == 0 {
        return Ok(KappaSolve {
            kappa: vec![],
            residual: 0.0,
            condition: 1.0,
        });
    }
    let gm = DMatrix::from_fn(n, n, |i, j| g[i][j]);
    let b = DVector::from_column_slice(targets);
    let scale = (0..n).map(|i| gm[(i, i)].abs()).fold(0.0, f64::max);
    let chol = gm
        .clone()
        .cholesky()
        .ok_or(Error::SingularGram { pivot: f64::NAN })?;
    let pivot = (0..n)
        .map(|i| chol.l_dirty()[(i, i)].powi(2))
        .fold(f64::INFINITY, f64::min);
    if pivot <= 1e-12 * scale {
        return Err(Error::SingularGram { pivot });
    }
    let inv = chol.inverse();
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let condition = norm1(&gm) * norm1(&inv);
    if condition > CONDITION_GUARD {
        return Err(Error::IllConditioned { condition });
    }
    let mut kappa = chol.solve(&b);
    let r = &b - &gm * &kappa;
    kappa += chol.solve(&r);
    let residual = (&b - &gm * &kappa).amax();
    if !(residual <= SOLVE_TOL) {
        return Err(Error::SolveResidual { residual });
    }
    Ok(KappaSolve {
        kappa: kappa.iter().copied().collect(),
        residual,
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FieldMode {
    /// Ramped targets and systole cutoff: continuous.
    Blended,
    /// Target 1 for every curve of length `≤ 3ε`, no cutoff: jumps across `ℓ = 3ε`.
    Naive,
}

/// The field at one point together with the linear-system diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldEval {
    pub eps: f64,
    pub mode: FieldMode,
    pub short_set: ShortSet,
    /// Λ when the short set is nonempty (then Λ ≤ 3ε), `None` otherwise.
    pub systole: Option<f64>,
    /// `φ(Λ)` for the blended field, 1 for the naive one.
    pub cutoff: f64,
    pub targets: Vec<f64>,
    pub gram: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
    pub v: TangentVector,
}

impl FieldEval {
    /// Prescribed derivative `V ℓ_σ` for each short-set entry.
    pub fn expected_derivatives(&self) -> Vec<f64> {
        self.targets.iter().map(|r| self.cutoff * r).collect()
    }
}

/// Evaluate the field `V` at `x`.
pub fn vector_field(
    x: &FnPoint,
    eps: f64,
    mode: FieldMode,
    m: &MetricModel,
    enumeration: &EnumerationConfig,
) -> Result<FieldEval> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ε = {eps} must be positive"
        )));
    }
    m.validate()?;
    let d = x.dim();
    let s = short_set(x, 3.0 * eps, enumeration)?;
    if s.is_empty() {
        return Ok(FieldEval {
            eps,
            mode,
            short_set: s,
            systole: None,
            cutoff: 0.0,
            targets: vec![],
            gram: vec![],
            kappa: vec![],
            residual: 0.0,
            condition: 1.0,
            v: TangentVector::zero(d),
        });
    }
    let idx = s.pants_indices()?;
    // Every geodesic of length ≤ 3ε is in the set, so its first entry realizes Λ.
    let lambda = s.entries[0].length;
    let (targets, cutoff): (Vec<f64>, f64) = match mode {
        FieldMode::Blended => (
            s.entries
                .iter()
                .map(|e| cutoff_phi(e.length, eps))
                .collect(),
            cutoff_phi(lambda, eps),
        ),
        FieldMode::Naive => (vec![1.0; s.len()], 1.0),
    };
    let gram = gram_matrix(x, &s, m)?;
    let sol = solve_kappa(&gram, &targets)?;
    let mut covector = Covector::zero(d);
    for (k, &i) in idx.iter().enumerate() {
        covector.dl[i] += cutoff * sol.kappa[k];
    }
    let v = m.raise(x, &covector);
    Ok(FieldEval {
        eps,
        mode,
        short_set: s,
        systole: Some(lambda),
        cutoff,
        targets,
        gram,
        kappa: sol.kappa,
        residual: sol.residual,
        condition: sol.condition,
        v,
    })
}

/// `V(x)` without diagnostics.
pub fn vector_field_v(
    x: &FnPoint,
    eps: f64,
    mode: FieldMode,
    m: &MetricModel,
    enumeration: &EnumerationConfig,
) -> Result<TangentVector> {
    Ok(vector_field(x, eps, mode, m, enumeration)?.v)
}
