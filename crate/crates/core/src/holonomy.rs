//! Holonomy representations built from Fenchel–Nielsen coordinates.
//!
//! Each pair of pants gets a normal-form representation with prescribed
//! boundary traces. Pieces are then glued along the pants curves. Curves on
//! a spanning tree of the piece graph are glued by amalgamation: the child
//! piece is conjugated so that its boundary element is the inverse of the
//! parent's. The remaining curves add a stable letter (HNN extension). Both
//! gluings go through canonical boundary frames. In a frame the boundary
//! element is diagonal with attracting fixed point `∞`, and the point `i` is
//! the foot of the perpendicular to the next boundary of the same piece. The
//! gluing map is `F_u · J · A(τ) · F_v⁻¹`, where `J` is the half turn about `i`
//! and `A(τ)` translates by the twist `τ` along the axis. Twisting by the
//! full length multiplies the gluing map by the inverse boundary element,
//! which is the Dehn twist.
//!
//! Redundant generators are removed by Tietze moves where a gluing relation
//! expresses a generator directly. Punctured surfaces end with a free
//! generating set. Closed surfaces keep one relator.

use serde::Serialize;

use crate::chart::{FnPoint, Slot};
use crate::error::{Error, Result};
use crate::mat2::{length_to_trace, trace_to_length_dd, Mat2, Real, TwoFloat};
use crate::systole::{ShortEntry, ShortSet};
use crate::word::{CurveClass, Letter, Word};

/// Tolerance on trace invariants (relative for traces above 1).
pub const TRACE_TOL: f64 = 1e-9;

/// Classes with `|trace| ≤ 2 + PARABOLIC_SLACK` are not hyperbolic.
pub const PARABOLIC_SLACK: f64 = 1e-12;

/// A representation of the surface group into SL(2,ℝ), defined up to sign.
///
/// Generators are kept in double-double precision. Thin surfaces need
/// generators with entries of order `1/ℓ²`, and words in them lose most of
/// their digits in plain `f64`. The `f64` copies serve bulk enumeration,
/// where only long hyperbolic words matter.
#[derive(Debug, Clone)]
pub struct Holonomy {
    point: FnPoint,
    generators: Vec<Mat2<TwoFloat>>,
    fast: Vec<Mat2>,
    pants_words: Vec<Word>,
    pants_elements: Vec<Mat2<TwoFloat>>,
    puncture_words: Vec<Word>,
    relators: Vec<Word>,
}

/// Result of checking the holonomy invariants.
#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub max_pants_residual: f64,
    pub max_puncture_residual: f64,
    pub max_relator_residual: f64,
}

impl Holonomy {
    pub fn point(&self) -> &FnPoint {
        &self.point
    }

    pub fn generators(&self) -> &[Mat2<TwoFloat>] {
        &self.generators
    }

    /// Generators rounded to `f64`.
    pub fn generators_f64(&self) -> &[Mat2] {
        &self.fast
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Canonical word of pants curve `i`.
    pub fn pants_word(&self, i: usize) -> &Word {
        &self.pants_words[i]
    }

    /// Matrix of pants curve `i` built directly from the gluing, without its word.
    pub fn pants_element(&self, i: usize) -> Mat2<TwoFloat> {
        self.pants_elements[i]
    }

    pub fn puncture_words(&self) -> &[Word] {
        &self.puncture_words
    }

    /// Relators left after generator elimination (empty for punctured surfaces).
    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn eval(&self, w: &Word) -> Mat2<TwoFloat> {
        w.0.iter()
            .fold(Mat2::identity(), |m, &l| m * self.letter_matrix(l))
    }

    pub fn letter_matrix(&self, l: Letter) -> Mat2<TwoFloat> {
        let g = self.generators[l.generator()];
        if l.is_inverse() {
            g.inv()
        } else {
            g
        }
    }

    pub fn letter_matrix_f64(&self, l: Letter) -> Mat2 {
        let g = self.fast[l.generator()];
        if l.is_inverse() {
            g.inv()
        } else {
            g
        }
    }

    pub fn trace_dd(&self, w: &Word) -> TwoFloat {
        self.eval(w).trace()
    }

    pub fn trace(&self, w: &Word) -> f64 {
        self.trace_dd(w).to_f64()
    }

    /// Length of the geodesic of a word, `2·arccosh(|tr|/2)`, computed from matrices.
    pub fn word_length(&self, w: &Word) -> Result<f64> {
        let t = self.trace_dd(w);
        if (t.abs() - 2.0).to_f64() <= PARABOLIC_SLACK {
            return Err(Error::NonHyperbolic {
                class: w.to_string(),
                trace: t.abs().to_f64(),
            });
        }
        Ok(trace_to_length_dd(t))
    }

    /// Check the trace invariants: pants curves have `|tr| = 2cosh(ℓ/2)`,
    /// puncture loops are parabolic, relators evaluate to `±I`.
    pub fn trace_report(&self) -> TraceReport {
        let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1.0);
        let max_pants_residual = self
            .pants_words
            .iter()
            .zip(&self.point.lengths)
            .map(|(w, &l)| rel(self.trace(w).abs(), length_to_trace(l)))
            .fold(0.0, f64::max);
        let max_puncture_residual = self
            .puncture_words
            .iter()
            .map(|w| (self.trace_dd(w).abs() - 2.0).to_f64().abs())
            .fold(0.0, f64::max);
        let max_relator_residual = self
            .relators
            .iter()
            .map(|w| self.eval(w).projective_distance(&Mat2::identity()))
            .fold(0.0, f64::max);
        TraceReport {
            max_pants_residual,
            max_puncture_residual,
            max_relator_residual,
        }
    }
}

/// Normal form for a pair of pants with boundary lengths `l` (0 for a cusp).
///
/// Returns `[c0, c1, c2]` with `c0·c1·c2 = I`, `tr c0 = 2cosh(l0/2)`,
/// `tr c1 = 2cosh(l1/2)` and `tr c2 = −2cosh(l2/2)`.
pub fn pants_normal_form<T: Real>(l: [f64; 3]) -> [Mat2<T>; 3] {
    let trace = |l: f64| T::from(2.0) * T::from(0.5 * l).cosh();
    let x = trace(l[0]);
    let y = trace(l[1]);
    let s = -T::from(0.5 * l[2]).exp();
    let (zero, one) = (T::zero(), T::one());
    let c0 = Mat2::new(x, -one, one, zero);
    let c1 = Mat2::new(zero, s, -s.recip(), y);
    let c2 = (c0 * c1).inv();
    [c0, c1, c2]
}

/// Canonical frame of boundary slot `s` of a piece.
///
/// `F⁻¹·c_s·F` is diagonal with attracting fixed point `∞`, and `F(i)` is the
/// foot of the common perpendicular to the boundary `s+1`. Also returns the
/// side (sign of the real line) on which that neighbour sits in the frame.
pub fn slot_frame<T: Real>(slots: &[Mat2<T>; 3], cusp: [bool; 3], s: usize) -> (Mat2<T>, f64) {
    let c = slots[s];
    let (attract, repel) = c.hyperbolic_fixed_points();
    let mut f0 = Mat2::new(attract[0], repel[0], attract[1], repel[1]);
    if f0.det() < T::zero() {
        f0 = Mat2::new(-attract[0], repel[0], -attract[1], repel[1]);
    }
    let f0 = f0.normalized();
    let f0_inv = f0.inv();

    let n = (s + 1) % 3;
    let to_real = |v: [T; 2]| {
        let w = f0_inv.apply_vec(v);
        w[0] * w[1].recip()
    };
    let (r1, r2) = if cusp[n] {
        let r = to_real(slots[n].parabolic_fixed_point());
        (r, r)
    } else {
        let (p, q) = slots[n].hyperbolic_fixed_points();
        (to_real(p), to_real(q))
    };
    let h = (r1 * r2).abs().sqrt();
    (f0 * Mat2::diag(h.sqrt()), r1.signum())
}

struct Piece {
    local: [Mat2<TwoFloat>; 3],
    cusp: [bool; 3],
    frames: [Option<Mat2<TwoFloat>>; 3],
}

/// Build the holonomy of a validated point.
pub fn build_holonomy(x: &FnPoint) -> Result<Holonomy> {
    let chart = x.chart.clone();
    let surface = chart.surface();
    if chart.curve_count() > 6 {
        return Err(Error::UnsupportedSurface {
            genus: surface.genus,
            punctures: surface.punctures,
            reason: "more than 6 pants curves is beyond desk scale".into(),
        });
    }
    let pieces_spec = chart.pieces();

    let pieces: Vec<Piece> = pieces_spec
        .iter()
        .map(|slots| {
            let mut l = [0.0; 3];
            let mut cusp = [false; 3];
            for (s, slot) in slots.iter().enumerate() {
                match *slot {
                    Slot::Curve(i) => l[s] = x.lengths[i],
                    Slot::Puncture => cusp[s] = true,
                }
            }
            let local = pants_normal_form(l);
            let mut frames = [None; 3];
            for s in 0..3 {
                if !cusp[s] {
                    frames[s] = Some(slot_frame(&local, cusp, s).0);
                }
            }
            Piece {
                local,
                cusp,
                frames,
            }
        })
        .collect();

    let np = pieces.len();
    let mut conj: Vec<Option<Mat2<TwoFloat>>> = vec![None; np];
    let mut slot_words: Vec<[Word; 3]> = vec![Default::default(); np];
    let mut letters: Vec<Mat2<TwoFloat>> = Vec::new();
    let mut tree_curve = vec![false; chart.curve_count()];

    let new_letter = |m: Mat2<TwoFloat>, letters: &mut Vec<Mat2<TwoFloat>>| {
        letters.push(m);
        Word::letter(Letter::new(letters.len() - 1, false))
    };

    // Root piece.
    conj[0] = Some(Mat2::identity());
    let w0 = new_letter(pieces[0].local[0], &mut letters);
    let w1 = new_letter(pieces[0].local[1], &mut letters);
    let w2 = w0.concat(&w1).inverse();
    slot_words[0] = [w0, w1, w2];

    // Spanning tree grown across the longest available curve first. Long
    // curves have narrow collars, which keeps the generators well conditioned.
    let global_frame = |conj: &[Option<Mat2<TwoFloat>>], k: usize, s: usize| -> Mat2<TwoFloat> {
        conj[k].expect("piece placed") * pieces[k].frames[s].expect("glued slot has a frame")
    };
    loop {
        let mut best: Option<(usize, usize, usize, usize, usize)> = None;
        for p in (0..np).filter(|&p| conj[p].is_some()) {
            for s in 0..3 {
                let Slot::Curve(i) = pieces_spec[p][s] else {
                    continue;
                };
                let occ = chart.curve_slots(i);
                let (q, v) = if occ[0] == (p, s) { occ[1] } else { occ[0] };
                if conj[q].is_some() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((j, ..)) => x.lengths[i] > x.lengths[j],
                };
                if better {
                    best = Some((i, p, s, q, v));
                }
            }
        }
        let Some((i, p, s, q, v)) = best else {
            break;
        };
        let glue = global_frame(&conj, p, s)
            * Mat2::half_turn()
            * Mat2::axial(x.twists[i])
            * pieces[q].frames[v].expect("glued slot has a frame").inv();
        conj[q] = Some(glue);
        tree_curve[i] = true;
        // Slot words satisfy W_v·W_{v+1}·W_{v+2} = 1. The new letter goes on
        // a curve slot when there is one, so puncture words stay short.
        let wv = slot_words[p][s].inverse();
        let n1 = (v + 1) % 3;
        let n2 = (v + 2) % 3;
        let mut ws: [Word; 3] = Default::default();
        if pieces[q].cusp[n1] && !pieces[q].cusp[n2] {
            let wn2 = new_letter(glue * pieces[q].local[n2] * glue.inv(), &mut letters);
            ws[n1] = wn2.concat(&wv).inverse();
            ws[n2] = wn2;
        } else {
            let wn1 = new_letter(glue * pieces[q].local[n1] * glue.inv(), &mut letters);
            ws[n2] = wv.concat(&wn1).inverse();
            ws[n1] = wn1;
        }
        ws[v] = wv;
        slot_words[q] = ws;
    }
    debug_assert!(conj.iter().all(Option::is_some));

    // Stable letters for the remaining curves, with Tietze elimination.
    let mut eliminated = vec![false; 0];
    let mut relators: Vec<Word> = Vec::new();
    for i in 0..chart.curve_count() {
        if tree_curve[i] {
            continue;
        }
        let [(p, u), (q, v)] = chart.curve_slots(i);
        let t = global_frame(&conj, p, u)
            * Mat2::half_turn()
            * Mat2::axial(x.twists[i])
            * global_frame(&conj, q, v).inv();
        let tw = new_letter(t, &mut letters);
        eliminated.resize(letters.len(), false);
        let wu = slot_words[p][u].clone();
        let wv = slot_words[q][v].clone();
        // Relation: t · W_v · t⁻¹ = W_u⁻¹.
        let tinv = tw.inverse();
        // When either side could go, drop the letter with the larger entries.
        let can_u = wu.len() == 1 && !wv.uses_generator(wu.0[0].generator());
        let can_v = wv.len() == 1 && !wu.uses_generator(wv.0[0].generator());
        let prefer_v = can_u
            && can_v
            && letters[wv.0[0].generator()].max_abs() > letters[wu.0[0].generator()].max_abs();
        let elimination = if can_u && !prefer_v {
            let l = wu.0[0];
            // W_u = t W_v⁻¹ t⁻¹
            let image = tw.concat(&wv.inverse()).concat(&tinv);
            Some((l, image))
        } else if can_v {
            let l = wv.0[0];
            // W_v = t⁻¹ W_u⁻¹ t
            let image = tinv.concat(&wu.inverse()).concat(&tw);
            Some((l, image))
        } else {
            None
        };
        match elimination {
            Some((l, image)) => {
                let g = l.generator();
                let image = if l.is_inverse() {
                    image.inverse()
                } else {
                    image
                };
                for ws in slot_words.iter_mut() {
                    for w in ws.iter_mut() {
                        *w = w.substitute(g, &image);
                    }
                }
                for r in relators.iter_mut() {
                    *r = r.substitute(g, &image).cyclically_reduced();
                }
                eliminated[g] = true;
            }
            None => {
                let r = tw
                    .concat(&wv)
                    .concat(&tinv)
                    .concat(&wu)
                    .cyclically_reduced();
                relators.push(r);
            }
        }
    }
    eliminated.resize(letters.len(), false);

    // Renumber surviving generators.
    let mut map = vec![None; letters.len()];
    let mut generators = Vec::new();
    for (g, m) in letters.iter().enumerate() {
        if !eliminated[g] {
            map[g] = Some(generators.len());
            generators.push(*m);
        }
    }
    for ws in slot_words.iter_mut() {
        for w in ws.iter_mut() {
            *w = w.renumber(&map);
        }
    }
    let relators: Vec<Word> = relators.iter().map(|r| r.renumber(&map)).collect();

    let mut pants_words = Vec::with_capacity(chart.curve_count());
    let mut pants_elements = Vec::with_capacity(chart.curve_count());
    for i in 0..chart.curve_count() {
        let (p, u) = chart.curve_slots(i)[0];
        pants_words.push(slot_words[p][u].canonical());
        let c = conj[p].unwrap();
        pants_elements.push(c * pieces[p].local[u] * c.inv());
    }
    let mut puncture_words = Vec::new();
    for (k, piece) in pieces.iter().enumerate() {
        for s in 0..3 {
            if piece.cusp[s] {
                puncture_words.push(slot_words[k][s].clone());
            }
        }
    }

    let hol = Holonomy {
        point: x.clone(),
        fast: generators.iter().map(Mat2::to_f64).collect(),
        generators,
        pants_words,
        pants_elements,
        puncture_words,
        relators,
    };
    let report = hol.trace_report();
    if report.max_pants_residual > TRACE_TOL {
        return Err(Error::TraceInvariant {
            what: "pants curve".into(),
            residual: report.max_pants_residual,
        });
    }
    if report.max_puncture_residual > TRACE_TOL {
        return Err(Error::TraceInvariant {
            what: "puncture loop".into(),
            residual: report.max_puncture_residual,
        });
    }
    Ok(hol)
}

/// Length of the geodesic in a curve class. Pants curves return their
/// coordinate directly.
pub fn curve_length(rep: &Holonomy, c: &CurveClass) -> Result<f64> {
    match c {
        CurveClass::Pants(i) => rep.point.lengths.get(*i).copied().ok_or_else(|| {
            Error::ChartMismatch(format!(
                "pants curve {i} on a chart with {} curves",
                rep.point.lengths.len()
            ))
        }),
        CurveClass::Word(w) => rep.word_length(w),
    }
}

/// Visit every cyclically reduced word of length `1..=max_len` whose letters
/// use only generators `≥ g` where `g` is the generator of its (positive)
/// first letter. Every canonical word is among them. The visitor receives
/// the word and its matrix.
pub fn for_each_candidate<F: FnMut(&[Letter], &Mat2)>(
    rep: &Holonomy,
    max_len: usize,
    mut visit: F,
) {
    let r = rep.rank();
    let mats: Vec<Mat2> = (0..2 * r)
        .map(|code| rep.letter_matrix_f64(Letter::from_code(code)))
        .collect();
    let mut word: Vec<Letter> = Vec::with_capacity(max_len);
    for g0 in 0..r {
        let first = Letter::new(g0, false);
        word.clear();
        word.push(first);
        extend(
            &mats,
            2 * g0,
            max_len,
            &mut word,
            mats[first.code()],
            &mut visit,
        );
    }
}

fn extend<F: FnMut(&[Letter], &Mat2)>(
    mats: &[Mat2],
    min_code: usize,
    max_len: usize,
    word: &mut Vec<Letter>,
    m: Mat2,
    visit: &mut F,
) {
    let last = word[word.len() - 1];
    if word.len() == 1 || last != word[0].inv() {
        visit(word, &m);
    }
    if word.len() == max_len {
        return;
    }
    for code in min_code..mats.len() {
        let l = Letter::from_code(code);
        if l == last.inv() {
            continue;
        }
        word.push(l);
        extend(mats, min_code, max_len, word, m * mats[code], visit);
        word.pop();
    }
}

/// Deterministic nearby chart points used to tell curve classes apart by
/// their length functions.
fn probe_points(x: &FnPoint) -> Result<[FnPoint; 2]> {
    let p1 = FnPoint::new(
        x.chart.clone(),
        x.lengths
            .iter()
            .enumerate()
            .map(|(i, l)| l * (1.0 + 0.173 * (i + 1) as f64))
            .collect(),
        x.twists
            .iter()
            .zip(&x.lengths)
            .enumerate()
            .map(|(i, (t, l))| t + 0.291 * l * (i + 2) as f64)
            .collect(),
    )?;
    let p2 = FnPoint::new(
        x.chart.clone(),
        x.lengths
            .iter()
            .enumerate()
            .map(|(i, l)| l / (1.0 + 0.119 * (i + 1) as f64))
            .collect(),
        x.twists
            .iter()
            .zip(&x.lengths)
            .enumerate()
            .map(|(i, (t, l))| t - 0.377 * l * (i + 1) as f64)
            .collect(),
    )?;
    Ok([p1, p2])
}

/// Identifies words with pants curves and with each other through their
/// length functions at the base point and two probe points.
pub(crate) struct ClassIdentifier {
    probes: Vec<Holonomy>,
    pants_lengths: Vec<[f64; 3]>,
    accepted: Vec<[f64; 3]>,
}

impl ClassIdentifier {
    pub(crate) fn new(rep: &Holonomy) -> Result<ClassIdentifier> {
        let [p1, p2] = probe_points(&rep.point)?;
        let probes = vec![build_holonomy(&p1)?, build_holonomy(&p2)?];
        let pants_lengths = (0..rep.point.lengths.len())
            .map(|i| {
                [
                    rep.point.lengths[i],
                    probes[0].point.lengths[i],
                    probes[1].point.lengths[i],
                ]
            })
            .collect();
        Ok(ClassIdentifier {
            probes,
            pants_lengths,
            accepted: Vec::new(),
        })
    }

    fn signature(&self, w: &Word, len: f64) -> Option<[f64; 3]> {
        let a = self.probes[0].word_length(w).ok()?;
        let b = self.probes[1].word_length(w).ok()?;
        Some([len, a, b])
    }

    fn is_multiple(sig: &[f64; 3], base: &[f64; 3]) -> bool {
        let k = (sig[0] / base[0]).round();
        if k < 1.0 {
            return false;
        }
        sig.iter()
            .zip(base)
            .all(|(s, b)| (s - k * b).abs() <= 1e-7 * s.abs().max(1.0))
    }

    /// True when `w` names a class not seen before: neither a power of a
    /// pants curve nor of an accepted class. New classes are remembered.
    pub(crate) fn is_new(&mut self, w: &Word, len: f64) -> bool {
        let Some(sig) = self.signature(w, len) else {
            return true;
        };
        let known = self
            .pants_lengths
            .iter()
            .chain(&self.accepted)
            .any(|base| Self::is_multiple(&sig, base));
        if !known {
            self.accepted.push(sig);
        }
        !known
    }
}

/// All primitive classes of length `≤ length_bound` among words of length
/// `≤ max_word_length`, plus every pants curve under the bound. Sorted by
/// `(length, class)`.
///
/// Punctured surfaces have free fundamental groups, so canonical words name
/// classes exactly. Closed surfaces keep a relator, and there distinct words
/// of the same class are merged by comparing length functions at probe points.
pub fn enumerate_short_geodesics(
    rep: &Holonomy,
    length_bound: f64,
    max_word_length: usize,
) -> Result<ShortSet> {
    let mut entries: Vec<ShortEntry> = Vec::new();
    if length_bound <= 0.0 {
        return Ok(ShortSet::new(rep.point.clone(), length_bound, entries));
    }
    for (i, &l) in rep.point.lengths.iter().enumerate() {
        if l <= length_bound {
            entries.push(ShortEntry {
                class: CurveClass::Pants(i),
                length: l,
            });
        }
    }

    let punctures: Vec<Word> = rep.puncture_words.iter().map(Word::canonical).collect();
    let trace_bound = length_to_trace(length_bound);
    let mut candidates: Vec<(Word, f64)> = Vec::new();
    let mut degenerate = 0usize;
    for_each_candidate(rep, max_word_length, |word, m| {
        // The f64 trace only screens; survivors are re-evaluated in double-double.
        let t = m.trace().abs();
        if t > trace_bound * (1.0 + 1e-6) + 1e-6 {
            return;
        }
        let w = Word(word.to_vec());
        if !w.is_canonical() || !w.is_primitive() || rep.pants_words.contains(&w) {
            return;
        }
        if punctures.contains(&w) {
            degenerate += 1;
            return;
        }
        match rep.word_length(&w) {
            Ok(len) if len <= length_bound => candidates.push((w, len)),
            Ok(_) => {}
            Err(_) => degenerate += 1,
        }
    });
    if degenerate > 0 {
        log::debug!("enumeration skipped {degenerate} non-hyperbolic words");
    }
    if rep.relators.is_empty() {
        entries.extend(candidates.into_iter().map(|(w, length)| ShortEntry {
            class: CurveClass::Word(w),
            length,
        }));
    } else if !candidates.is_empty() {
        // Shortest words first so each class keeps its shortest representative.
        candidates.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        let mut ident = ClassIdentifier::new(rep)?;
        for (w, len) in candidates {
            if ident.is_new(&w, len) {
                entries.push(ShortEntry {
                    class: CurveClass::Word(w),
                    length: len,
                });
            }
        }
    }
    Ok(ShortSet::new(rep.point.clone(), length_bound, entries))
}

/// Map a class to its pants index when its word is a pants curve word.
pub fn normalize_class(rep: &Holonomy, c: CurveClass) -> CurveClass {
    match c {
        CurveClass::Word(w) => match rep.pants_words.iter().position(|p| *p == w) {
            Some(i) => CurveClass::Pants(i),
            None => CurveClass::Word(w),
        },
        pants => pants,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Chart, SurfaceType};
    use std::sync::Arc;

    fn point(g: u32, n: u32, lengths: &[f64], twists: &[f64]) -> FnPoint {
        let chart = Arc::new(Chart::standard(SurfaceType::new(g, n).unwrap()).unwrap());
        FnPoint::new(chart, lengths.to_vec(), twists.to_vec()).unwrap()
    }

    #[test]
    fn pants_normal_form_traces() {
        let [c0, c1, c2] = pants_normal_form::<f64>([1.0, 2.0, 0.0]);
        assert!((c0.trace() - length_to_trace(1.0)).abs() < 1e-14);
        assert!((c1.trace() - length_to_trace(2.0)).abs() < 1e-14);
        assert!((c2.trace() + 2.0).abs() < 1e-12);
        assert!((c0 * c1 * c2).projective_distance(&Mat2::IDENTITY) < 1e-12);
    }

    #[test]
    fn frames_put_every_boundary_on_the_same_side() {
        for l in [
            [0.3, 1.1, 2.5],
            [0.01, 0.02, 0.0],
            [4.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
        ] {
            let cusp = [l[0] == 0.0, l[1] == 0.0, l[2] == 0.0];
            let slots = pants_normal_form::<f64>(l);
            let sides: Vec<f64> = (0..3)
                .filter(|&s| !cusp[s])
                .map(|s| slot_frame(&slots, cusp, s).1)
                .collect();
            assert!(sides.windows(2).all(|p| p[0] == p[1]), "{l:?}: {sides:?}");
            for s in (0..3).filter(|&s| !cusp[s]) {
                let (f, _) = slot_frame(&slots, cusp, s);
                let d = f.inv() * slots[s] * f;
                assert!(d.b.abs() < 1e-9 && d.c.abs() < 1e-9, "not diagonal: {d:?}");
                assert!(d.a.abs() > 1.0);
            }
        }
    }

    #[test]
    fn once_punctured_torus_generators() {
        let x = point(1, 1, &[2.0], &[0.3]);
        let h = build_holonomy(&x).unwrap();
        assert_eq!(h.rank(), 2);
        assert_eq!(h.pants_word(0).to_string(), "a");
        assert!((h.trace(&"a".parse().unwrap()).abs() - 2.0 * 1f64.cosh()).abs() < 1e-9);
        let comm: Word = "abAB".parse().unwrap();
        assert!((h.trace(&comm) + 2.0).abs() < 1e-9);
        assert!(h.relators().is_empty());
    }

    #[test]
    fn ranks_and_relators_per_type() {
        let cases = [
            (0, 4, vec![1.0], vec![0.2], 3, 0),
            (1, 2, vec![1.0, 0.7], vec![0.2, -0.1], 3, 0),
            (2, 0, vec![1.0, 0.7, 1.3], vec![0.2, -0.1, 0.4], 4, 1),
        ];
        for (g, n, l, t, rank, rels) in cases {
            let h = build_holonomy(&point(g, n, &l, &t)).unwrap();
            assert_eq!(h.rank(), rank, "({g},{n})");
            assert_eq!(h.relators().len(), rels, "({g},{n})");
            let rep = h.trace_report();
            assert!(rep.max_relator_residual < 1e-9, "{rep:?}");
        }
    }

    #[test]
    fn pants_word_shortcut_matches_matrices() {
        let x = point(2, 0, &[0.5, 1.5, 0.9], &[0.1, 0.2, -0.3]);
        let h = build_holonomy(&x).unwrap();
        for i in 0..3 {
            let via = h.word_length(h.pants_word(i)).unwrap();
            assert!((via - x.lengths[i]).abs() < 1e-9);
            assert!((trace_to_length_dd(h.pants_elements[i].trace()) - x.lengths[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn candidate_enumeration_counts() {
        let h = build_holonomy(&point(1, 1, &[1.0], &[0.0])).unwrap();
        let mut n = 0;
        let mut canonical = 0;
        for_each_candidate(&h, 4, |w, _| {
            n += 1;
            if Word(w.to_vec()).is_canonical() {
                canonical += 1;
            }
        });
        // Brute force: all cyclically reduced words of length ≤ 4 over a, A, b, B.
        let mut brute = 0;
        let mut brute_can = 0;
        for len in 1..=4u32 {
            for code in 0..4usize.pow(len) {
                let w = Word(
                    (0..len)
                        .map(|k| Letter::from_code(code / 4usize.pow(k) % 4))
                        .collect(),
                );
                if w.is_cyclically_reduced() {
                    brute += 1;
                    if w.is_canonical() {
                        brute_can += 1;
                    }
                }
            }
        }
        assert!(n < brute);
        assert_eq!(canonical, brute_can);
    }
}
