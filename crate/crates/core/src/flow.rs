//! The cutoff `φ`, the flow of `V` and the time-ε retraction.

use serde::{Deserialize, Serialize};

use crate::chart::FnPoint;
use crate::error::{Error, Result};
use crate::gradient::{vector_field, FieldEval, FieldMode, MetricModel};
use crate::systole::{in_truncated, systole, EnumerationConfig, TIE_TOL};
use crate::word::CurveClass;

/// Quintic smoothstep `6u⁵ − 15u⁴ + 10u³` on `[0, 1]`, clamped outside.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// Equal to 1 for `ℓ ≤ 2ε`, 0 for `ℓ ≥ 3ε`, C² and nonincreasing in between.
pub fn cutoff_phi(l: f64, eps: f64) -> f64 {
    1.0 - smoothstep((l - 2.0 * eps) / eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; defaults to 1% of the duration.
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            min_step: 1e-14,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub eps: f64,
    /// Defaults to `eps`.
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default = "blended")]
    pub mode: FieldMode,
    #[serde(default)]
    pub metric: MetricModel,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub enumeration: EnumerationConfig,
    /// Largest admissible `eps`.
    #[serde(default = "default_eps_bound")]
    pub eps_bound: f64,
}

fn blended() -> FieldMode {
    FieldMode::Blended
}

fn default_eps_bound() -> f64 {
    0.1
}

impl FlowConfig {
    pub fn new(eps: f64) -> FlowConfig {
        FlowConfig {
            eps,
            duration: None,
            mode: FieldMode::Blended,
            metric: MetricModel::MODEL_WP,
            integrator: IntegratorConfig::default(),
            enumeration: EnumerationConfig::default(),
            eps_bound: default_eps_bound(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration.unwrap_or(self.eps)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.eps > 0.0 && self.eps <= self.eps_bound) {
            return bad(format!(
                "ε = {} must lie in (0, {}]",
                self.eps, self.eps_bound
            ));
        }
        let d = self.duration();
        if !(d > 0.0 && d.is_finite()) {
            return bad(format!("duration {d} must be positive"));
        }
        let i = &self.integrator;
        if !(i.rtol > 0.0 && i.atol > 0.0 && i.min_step > 0.0 && i.max_steps > 0) {
            return bad("integrator tolerances, min_step and max_steps must be positive".into());
        }
        if let Some(h) = i.initial_step {
            if !(h > 0.0) {
                return bad(format!("initial_step {h} must be positive"));
            }
        }
        self.metric.validate()?;
        self.enumeration.validate()
    }

    fn field(&self, x: &FnPoint) -> Result<FieldEval> {
        vector_field(x, self.eps, self.mode, &self.metric, &self.enumeration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub point: FnPoint,
    pub systole: f64,
    /// Classes of length `≤ 3ε`.
    pub active: Vec<CurveClass>,
    /// `min V ℓ_σ` over the realizers of Λ.
    pub dsystole_dt: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub field_evaluations: usize,
}

impl Trajectory {
    pub fn start(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn end(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }
}

fn sample(t: f64, x: &FnPoint, f: &FieldEval, cfg: &FlowConfig) -> Result<Sample> {
    let (lambda, rate) = match f.systole {
        Some(lambda) => {
            let rate = f
                .short_set
                .entries
                .iter()
                .filter(|e| e.length <= lambda + TIE_TOL)
                .map(|e| match e.class {
                    CurveClass::Pants(i) => f.v.dl[i],
                    CurveClass::Word(_) => f64::NAN,
                })
                .fold(f64::INFINITY, f64::min);
            (lambda, rate)
        }
        None => (systole(x, &cfg.enumeration)?.value, 0.0),
    };
    Ok(Sample {
        t,
        point: x.clone(),
        systole: lambda,
        active: f.short_set.classes(),
        dsystole_dt: rate,
        speed: f.v.norm(),
    })
}

// Dormand–Prince 5(4) tableau. The field is autonomous, so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `dx/dt = V(x)` from `x0` for the configured duration.
pub fn flow(x0: &FnPoint, cfg: &FlowConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let duration = cfg.duration();
    let ic = cfg.integrator;
    let mut y = x0.coords();
    let n = y.len();
    let f0 = cfg.field(x0)?;
    let mut evals = 1;
    let mut samples = vec![sample(0.0, x0, &f0, cfg)?];
    let mut k1 = f0.v.coords();
    let mut t = 0.0;
    let mut h = ic.initial_step.unwrap_or(0.01 * duration).min(duration);
    let (mut accepted, mut rejected) = (0usize, 0usize);

    while t < duration {
        if accepted + rejected >= ic.max_steps {
            return Err(Error::TooManySteps(ic.max_steps));
        }
        let last = t + h >= duration;
        let step = if last { duration - t } else { h };
        if step < ic.min_step && !last {
            return Err(Error::IntegratorUnderflow { t, h: step });
        }

        // Stages 2..7; stage 7 is the field at the new point (FSAL).
        let mut k: Vec<Vec<f64>> = vec![k1.clone()];
        let mut end_eval: Option<(FnPoint, FieldEval)> = None;
        let mut domain_failure = false;
        for s in 1..7 {
            let ys: Vec<f64> = (0..n)
                .map(|j| y[j] + step * (0..s).map(|r| A[s][r] * k[r][j]).sum::<f64>())
                .collect();
            let p = match x0.with_coords(&ys) {
                Ok(p) => p,
                Err(Error::NonpositiveLength { .. }) => {
                    domain_failure = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let fe = cfg.field(&p)?;
            evals += 1;
            k.push(fe.v.coords());
            if s == 6 {
                end_eval = Some((p, fe));
            }
        }
        let err = if domain_failure {
            f64::INFINITY
        } else {
            let (p, _) = end_eval.as_ref().unwrap();
            let y_new = p.coords();
            let sq: f64 = (0..n)
                .map(|j| {
                    let e = step * (0..7).map(|s| E[s] * k[s][j]).sum::<f64>();
                    let sc = ic.atol + ic.rtol * y[j].abs().max(y_new[j].abs());
                    (e / sc).powi(2)
                })
                .sum();
            (sq / n.max(1) as f64).sqrt()
        };

        if err <= 1.0 {
            let (p, fe) = end_eval.unwrap();
            t = if last { duration } else { t + step };
            y = p.coords();
            k1 = k.pop().unwrap();
            samples.push(sample(t, &p, &fe, cfg)?);
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else if err.is_finite() {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            0.2
        };
        h = step * factor;
        if !last && err > 1.0 && h < ic.min_step {
            return Err(Error::IntegratorUnderflow { t, h });
        }
    }
    Ok(Trajectory {
        samples,
        accepted_steps: accepted,
        rejected_steps: rejected,
        field_evaluations: evals,
    })
}

/// Endpoint of the time-ε flow. Points of the thick part `Λ ≥ 3ε` are returned unchanged.
pub fn retract(x0: &FnPoint, eps: f64, cfg: &FlowConfig) -> Result<FnPoint> {
    let cfg = FlowConfig {
        eps,
        duration: Some(eps),
        ..*cfg
    };
    cfg.validate()?;
    if systole(x0, &cfg.enumeration)?.value >= 3.0 * eps {
        return Ok(x0.clone());
    }
    Ok(flow(x0, &cfg)?.end().point.clone())
}

/// Start and end of a trajectory with membership flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub eps: f64,
    pub duration: f64,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub systole_start: f64,
    pub systole_end: f64,
    pub start_in_truncated: bool,
    pub end_in_truncated: bool,
    /// Largest drop of Λ between consecutive samples (0 when monotone).
    pub max_systole_decrease: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub field_evaluations: usize,
}

pub fn summarize(traj: &Trajectory, cfg: &FlowConfig) -> Result<FlowSummary> {
    let (s, e) = (traj.start(), traj.end());
    let max_systole_decrease = traj
        .samples
        .windows(2)
        .map(|w| w[0].systole - w[1].systole)
        .fold(0.0, f64::max);
    Ok(FlowSummary {
        eps: cfg.eps,
        duration: cfg.duration(),
        start: s.point.coords(),
        end: e.point.coords(),
        systole_start: s.systole,
        systole_end: e.systole,
        start_in_truncated: in_truncated(&s.point, cfg.eps, &cfg.enumeration)?,
        end_in_truncated: in_truncated(&e.point, cfg.eps, &cfg.enumeration)?,
        max_systole_decrease,
        samples: traj.samples.len(),
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        field_evaluations: traj.field_evaluations,
    })
}
