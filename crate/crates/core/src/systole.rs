//! The systole, short sets, membership in the thick part and truncated Bers boxes.
//!
//! Three routes compute the short curves, tried in order:
//!
//! 1. Collar certificate. A closed geodesic that is not a pants curve either
//!    self-intersects (length > 4·asinh 1) or crosses some pants curve `σ_j`
//!    and so traverses its collar (length ≥ 2·asinh(1/sinh(ℓ_j/2))). Below
//!    the smaller of these bounds only pants curves exist.
//! 2. For the once-punctured torus, descent on the Markov topograph of
//!    trace triples finds the shortest simple curves exactly.
//! 3. Otherwise, enumeration of reduced words up to a length cap, confirmed
//!    by a second enumeration with a longer cap.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, FnPoint};
use crate::error::{Error, Result};
use crate::holonomy::{build_holonomy, enumerate_short_geodesics, normalize_class, Holonomy};
use crate::mat2::{trace_to_length_dd, Mat2, Real, TwoFloat};
use crate::word::{CurveClass, Letter, Word};

/// Realizers of the systole are the classes within this distance of Λ.
pub const TIE_TOL: f64 = 1e-9;

/// Slack in the closed inequality `Λ ≥ ε`.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortEntry {
    pub class: CurveClass,
    pub length: f64,
}

/// Curves at a point with length at most `threshold`, sorted by `(length, class)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortSet {
    #[serde(skip)]
    pub point: FnPoint,
    pub threshold: f64,
    pub entries: Vec<ShortEntry>,
}

impl ShortSet {
    pub fn new(point: FnPoint, threshold: f64, mut entries: Vec<ShortEntry>) -> ShortSet {
        entries.sort_by(|a, b| {
            a.length
                .total_cmp(&b.length)
                .then_with(|| a.class.cmp(&b.class))
        });
        ShortSet {
            point,
            threshold,
            entries,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn classes(&self) -> Vec<CurveClass> {
        self.entries.iter().map(|e| e.class.clone()).collect()
    }

    /// Pants indices of the entries, failing on the first non-pants class.
    pub fn pants_indices(&self) -> Result<Vec<usize>> {
        self.entries
            .iter()
            .map(|e| {
                e.class.pants_index().ok_or_else(|| Error::ChartViolation {
                    class: e.class.to_string(),
                    length: e.length,
                })
            })
            .collect()
    }
}

/// Word-enumeration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnumerationConfig {
    /// Cap on word length. Defaults to 12 for two-generator groups and 8 otherwise.
    pub max_word_length: Option<usize>,
    /// Re-enumerate with a longer cap and fail if anything below the bound changes.
    pub convergence_check: bool,
    /// Largest number of candidate words the confirming pass may visit.
    pub check_budget: u64,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            max_word_length: None,
            convergence_check: true,
            check_budget: 4_000_000,
        }
    }
}

impl EnumerationConfig {
    pub fn word_length(&self, rank: usize) -> usize {
        self.max_word_length
            .unwrap_or(if rank <= 2 { 12 } else { 8 })
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_word_length == Some(0) {
            return Err(Error::InvalidParameter(
                "max_word_length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Number of words the candidate search visits for `rank` generators and cap `len`.
pub fn candidate_count(rank: usize, len: usize) -> f64 {
    (0..rank)
        .map(|g0| {
            let branch = (2 * (rank - g0) - 1) as f64;
            (0..len).map(|n| branch.powi(n as i32)).sum::<f64>()
        })
        .sum()
}

/// Cap for the confirming pass: the largest value in `(len, 2·len]` within
/// the budget, and at least `len + 1`.
pub fn check_length(len: usize, rank: usize, budget: u64) -> usize {
    (len + 1..=2 * len)
        .filter(|&n| candidate_count(rank, n) <= budget as f64)
        .max()
        .unwrap_or(len + 1)
}

/// Lower bound on the length of every closed geodesic that is not a pants curve.
pub fn collar_bound(x: &FnPoint) -> f64 {
    x.lengths
        .iter()
        .map(|&l| 2.0 * (1.0 / (0.5 * l).sinh()).asinh())
        .fold(4.0 * 1f64.asinh(), f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Systole {
    pub value: f64,
    pub realizers: Vec<CurveClass>,
}

fn unsupported_if_rigid(x: &FnPoint) -> Result<()> {
    if x.dim() == 0 {
        let s = x.chart.surface();
        return Err(Error::UnsupportedSurface {
            genus: s.genus,
            punctures: s.punctures,
            reason: "no pants curves".into(),
        });
    }
    Ok(())
}

fn min_length(x: &FnPoint) -> f64 {
    x.lengths.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Λ and every class within [`TIE_TOL`] of it.
pub fn systole(x: &FnPoint, cfg: &EnumerationConfig) -> Result<Systole> {
    unsupported_if_rigid(x)?;
    cfg.validate()?;
    let min = min_length(x);
    if min + TIE_TOL < collar_bound(x) {
        let realizers = (0..x.dim())
            .filter(|&i| x.lengths[i] <= min + TIE_TOL)
            .map(CurveClass::Pants)
            .collect();
        return Ok(Systole {
            value: min,
            realizers,
        });
    }
    let rep = build_holonomy(x)?;
    let s = x.chart.surface();
    if (s.genus, s.punctures) == (1, 1) && rep.rank() == 2 {
        return markov_descent(&rep);
    }
    enumerated_systole(&rep, cfg)
}

fn systole_from(set: &ShortSet) -> Systole {
    let value = set.entries[0].length;
    let realizers = set
        .entries
        .iter()
        .filter(|e| e.length <= value + TIE_TOL)
        .map(|e| e.class.clone())
        .collect();
    Systole { value, realizers }
}

fn enumerated_systole(rep: &Holonomy, cfg: &EnumerationConfig) -> Result<Systole> {
    // Λ never exceeds the shortest pants curve.
    let bound = min_length(rep.point()) + 2.0 * TIE_TOL;
    let len = cfg.word_length(rep.rank());
    let first = systole_from(&enumerate_short_geodesics(rep, bound, len)?);
    if cfg.convergence_check {
        let longer = check_length(len, rep.rank(), cfg.check_budget);
        let second = systole_from(&enumerate_short_geodesics(rep, bound, longer)?);
        // Equal-length classes reached through different words differ by rounding only.
        if (second.value - first.value).abs() > TIE_TOL {
            return Err(Error::EnumerationNotConverged(format!(
                "systole {} with words ≤ {len} but {} with words ≤ {longer}",
                first.value, second.value
            )));
        }
        return Ok(second);
    }
    Ok(first)
}

/// Descent on the topograph of the once-punctured torus.
///
/// A pair `(p, q)` of generators carries the trace triple
/// `(tr p, tr q, tr pq)`. Replacing the largest entry by its flip lowers
/// it while possible. At the sink the smallest entry is the shortest simple
/// curve, which on this surface is the systole.
fn markov_descent(rep: &Holonomy) -> Result<Systole> {
    let positive = |m: Mat2<TwoFloat>| if m.trace() < 0.0 { m.neg() } else { m };
    let mut p = (
        Word::letter(Letter::new(0, false)),
        positive(rep.generators()[0]),
    );
    let mut q = (
        Word::letter(Letter::new(1, false)),
        positive(rep.generators()[1]),
    );
    let tr = |m: &Mat2<TwoFloat>| m.trace().abs();
    let prod =
        |a: &(Word, Mat2<TwoFloat>), b: &(Word, Mat2<TwoFloat>)| (a.0.concat(&b.0), a.1 * b.1);
    let inverse = |a: &(Word, Mat2<TwoFloat>)| (a.0.inverse(), a.1.inv());

    const MAX_FLIPS: usize = 100_000;
    let mut flips = 0;
    loop {
        let pq = prod(&p, &q);
        let (x, y, z) = (tr(&p.1), tr(&q.1), tr(&pq.1));
        let max = Real::max(Real::max(x, y), z);
        let next = if z == max {
            (p.clone(), inverse(&q))
        } else if x == max {
            (q.clone(), pq.clone())
        } else {
            (p.clone(), pq.clone())
        };
        // The new pair's product carries the flipped value.
        let flipped = tr(&prod(&next.0, &next.1).1);
        if flipped >= max {
            let candidates = [
                p.clone(),
                q.clone(),
                pq,
                prod(&p, &inverse(&q)),
                prod(&q, &prod(&p, &q)),
                prod(&p, &prod(&p, &q)),
            ];
            return Ok(descent_result(rep, &candidates));
        }
        (p, q) = next;
        flips += 1;
        if flips > MAX_FLIPS {
            return Err(Error::EnumerationNotConverged(format!(
                "topograph descent exceeded {MAX_FLIPS} flips"
            )));
        }
    }
}

fn descent_result(rep: &Holonomy, candidates: &[(Word, Mat2<TwoFloat>)]) -> Systole {
    let mut found: Vec<(f64, CurveClass)> = Vec::new();
    for (w, m) in candidates {
        let Ok(class) = CurveClass::word(w) else {
            continue;
        };
        let class = normalize_class(rep, class);
        let length = match class {
            CurveClass::Pants(i) => rep.point().lengths[i],
            CurveClass::Word(_) => trace_to_length_dd(m.trace()),
        };
        if !found.iter().any(|(_, c)| *c == class) {
            found.push((length, class));
        }
    }
    let value = found.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
    let mut realizers: Vec<(f64, CurveClass)> = found
        .into_iter()
        .filter(|f| f.0 <= value + TIE_TOL)
        .collect();
    realizers.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Systole {
        value,
        realizers: realizers.into_iter().map(|f| f.1).collect(),
    }
}

/// All classes of length at most `t`.
pub fn short_set(x: &FnPoint, t: f64, cfg: &EnumerationConfig) -> Result<ShortSet> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "short-set threshold {t} must be positive"
        )));
    }
    cfg.validate()?;
    if t < collar_bound(x) {
        let entries = (0..x.dim())
            .filter(|&i| x.lengths[i] <= t)
            .map(|i| ShortEntry {
                class: CurveClass::Pants(i),
                length: x.lengths[i],
            })
            .collect();
        return Ok(ShortSet::new(x.clone(), t, entries));
    }
    let rep = build_holonomy(x)?;
    let len = cfg.word_length(rep.rank());
    let first = enumerate_short_geodesics(&rep, t, len)?;
    if cfg.convergence_check {
        let longer = check_length(len, rep.rank(), cfg.check_budget);
        let second = enumerate_short_geodesics(&rep, t, longer)?;
        if second.classes() != first.classes() {
            return Err(Error::EnumerationNotConverged(format!(
                "{} classes below {t} with words ≤ {len} but {} with words ≤ {longer}",
                first.len(),
                second.len()
            )));
        }
    }
    Ok(first)
}

/// Whether `Λ(x) ≥ ε` (closed inequality).
pub fn in_truncated(x: &FnPoint, eps: f64, cfg: &EnumerationConfig) -> Result<bool> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ε = {eps} must be positive"
        )));
    }
    Ok(systole(x, cfg)?.value >= eps - MEMBERSHIP_SLACK)
}

/// A (truncated) Bers box `ε ≤ ℓ_i ≤ C, |θ_i| ≤ θ₀` in a chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BersBox {
    pub chart: Arc<Chart>,
    pub c: f64,
    pub theta0: f64,
    pub eps: Option<f64>,
}

impl BersBox {
    pub fn new(chart: Arc<Chart>, c: f64, theta0: f64, eps: Option<f64>) -> Result<BersBox> {
        let floor = eps.unwrap_or(0.0);
        if !(floor >= 0.0 && c > floor && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Bers box needs C > ε ≥ 0 (C = {c}, ε = {floor})"
            )));
        }
        if !(theta0 > 0.0 && theta0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Bers box needs θ₀ > 0 (θ₀ = {theta0})"
            )));
        }
        Ok(BersBox {
            chart,
            c,
            theta0,
            eps,
        })
    }
}

pub fn in_bers_box(x: &FnPoint, b: &BersBox) -> Result<bool> {
    if *x.chart != *b.chart {
        return Err(Error::ChartMismatch(
            "point and Bers box use different charts".into(),
        ));
    }
    let floor = b.eps.unwrap_or(0.0);
    Ok(x.lengths.iter().all(|&l| floor <= l && l <= b.c)
        && x.twists.iter().all(|t| t.abs() <= b.theta0))
}
