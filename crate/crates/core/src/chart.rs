//! Surface types, pants decompositions and Fenchel–Nielsen points.
//!
//! A [`Chart`] is a pants decomposition given combinatorially: a list of
//! pairs of pants, each with three boundary slots. A slot is either a
//! puncture or one side of a pants curve; every curve index appears in
//! exactly two slots. An [`FnPoint`] attaches a length and a twist to each
//! curve. Twists are measured in length units along the curve, and a full
//! Dehn twist about curve `i` shifts its twist by `ℓ_i`.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Genus and number of punctures of a finite-area hyperbolic surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceType {
    pub genus: u32,
    pub punctures: u32,
}

impl SurfaceType {
    pub fn new(genus: u32, punctures: u32) -> Result<Self> {
        if 2 * genus + punctures <= 2 {
            return Err(Error::NotHyperbolic { genus, punctures });
        }
        Ok(SurfaceType { genus, punctures })
    }

    /// Number of pants curves, `3g - 3 + n`.
    pub fn curve_count(&self) -> usize {
        (3 * self.genus + self.punctures) as usize - 3
    }

    /// Number of pairs of pants, `2g - 2 + n`.
    pub fn pants_count(&self) -> usize {
        (2 * self.genus + self.punctures) as usize - 2
    }

    /// Real dimension of Teichmüller space, `6g - 6 + 2n`.
    pub fn dimension(&self) -> usize {
        2 * self.curve_count()
    }
}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.genus, self.punctures)
    }
}

/// One boundary slot of a pair of pants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Curve(usize),
    Puncture,
}

/// Combinatorial gluing data as read from configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gluing {
    pub pieces: Vec<Vec<Slot>>,
}

/// A validated pants decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ChartRepr", into = "ChartRepr")]
pub struct Chart {
    surface: SurfaceType,
    pieces: Vec<[Slot; 3]>,
    /// For each curve, its two `(piece, slot)` occurrences in scan order.
    curve_slots: Vec<[(usize, usize); 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartRepr {
    surface: SurfaceType,
    pieces: Vec<Vec<Slot>>,
}

impl TryFrom<ChartRepr> for Chart {
    type Error = Error;
    fn try_from(r: ChartRepr) -> Result<Chart> {
        make_chart(r.surface, &Gluing { pieces: r.pieces })
    }
}

impl From<Chart> for ChartRepr {
    fn from(c: Chart) -> ChartRepr {
        ChartRepr {
            surface: c.surface,
            pieces: c.pieces.iter().map(|p| p.to_vec()).collect(),
        }
    }
}

/// Validate gluing data against a surface type.
pub fn make_chart(surface: SurfaceType, gluing: &Gluing) -> Result<Chart> {
    let surface = SurfaceType::new(surface.genus, surface.punctures)?;
    let d = surface.curve_count();
    let expected_pieces = surface.pants_count();

    let mut pieces = Vec::with_capacity(gluing.pieces.len());
    for (k, piece) in gluing.pieces.iter().enumerate() {
        let slots: [Slot; 3] = piece.as_slice().try_into().map_err(|_| {
            Error::InconsistentGluing(format!(
                "piece {k} has {} boundary slots; a pair of pants has 3",
                piece.len()
            ))
        })?;
        pieces.push(slots);
    }
    if pieces.len() != expected_pieces {
        return Err(Error::InconsistentGluing(format!(
            "surface {surface} needs {expected_pieces} pairs of pants, got {}",
            pieces.len()
        )));
    }

    let mut occurrences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); d];
    let mut puncture_count = 0usize;
    for (k, piece) in pieces.iter().enumerate() {
        for (s, slot) in piece.iter().enumerate() {
            match *slot {
                Slot::Puncture => puncture_count += 1,
                Slot::Curve(i) => {
                    if i >= d {
                        return Err(Error::InconsistentGluing(format!(
                            "curve index {i} out of range; surface {surface} has {d} pants curves"
                        )));
                    }
                    occurrences[i].push((k, s));
                }
            }
        }
    }
    if puncture_count != surface.punctures as usize {
        return Err(Error::InconsistentGluing(format!(
            "gluing has {puncture_count} punctures, surface {surface} has {}",
            surface.punctures
        )));
    }
    let mut curve_slots = Vec::with_capacity(d);
    for (i, occ) in occurrences.iter().enumerate() {
        if occ.len() != 2 {
            return Err(Error::InconsistentGluing(format!(
                "curve {i} bounds {} slots; every pants curve bounds exactly 2",
                occ.len()
            )));
        }
        curve_slots.push([occ[0], occ[1]]);
    }

    // The pieces must form a connected surface.
    if !pieces.is_empty() {
        let mut seen = vec![false; pieces.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(k) = queue.pop_front() {
            for slot in &pieces[k] {
                if let Slot::Curve(i) = *slot {
                    for &(q, _) in &curve_slots[i] {
                        if !seen[q] {
                            seen[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InconsistentGluing(format!(
                "piece {k} is not connected to piece 0"
            )));
        }
    }

    Ok(Chart {
        surface,
        pieces,
        curve_slots,
    })
}

impl Chart {
    pub fn surface(&self) -> SurfaceType {
        self.surface
    }

    pub fn curve_count(&self) -> usize {
        self.curve_slots.len()
    }

    pub fn pieces(&self) -> &[[Slot; 3]] {
        &self.pieces
    }

    pub fn curve_slots(&self, curve: usize) -> [(usize, usize); 2] {
        self.curve_slots[curve]
    }

    /// Standard chart for a supported surface type.
    pub fn standard(surface: SurfaceType) -> Result<Chart> {
        use Slot::{Curve as C, Puncture as P};
        let pieces: Vec<Vec<Slot>> = match (surface.genus, surface.punctures) {
            (0, 3) => vec![vec![P, P, P]],
            // One-holed torus piece: the curve is glued to itself.
            (1, 1) => vec![vec![C(0), C(0), P]],
            // Curve 0 separates the punctures in pairs.
            (0, 4) => vec![vec![P, P, C(0)], vec![C(0), P, P]],
            // Two non-separating curves, one puncture on each piece.
            (1, 2) => vec![vec![C(0), C(1), P], vec![C(0), C(1), P]],
            // Theta-graph decomposition of the genus-two surface.
            (2, 0) => vec![vec![C(0), C(1), C(2)], vec![C(0), C(1), C(2)]],
            _ => {
                return Err(Error::UnsupportedSurface {
                    genus: surface.genus,
                    punctures: surface.punctures,
                    reason: "no standard chart; supply gluing data".into(),
                })
            }
        };
        make_chart(surface, &Gluing { pieces })
    }
}

/// A point of Teichmüller space in Fenchel–Nielsen coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnPoint {
    pub chart: Arc<Chart>,
    pub lengths: Vec<f64>,
    pub twists: Vec<f64>,
}

impl FnPoint {
    /// Build and validate a point.
    pub fn new(chart: Arc<Chart>, lengths: Vec<f64>, twists: Vec<f64>) -> Result<FnPoint> {
        validate_point(FnPoint {
            chart,
            lengths,
            twists,
        })
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    /// Coordinates flattened as `[ℓ_0..ℓ_{d-1}, θ_0..θ_{d-1}]`.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.lengths.clone();
        v.extend_from_slice(&self.twists);
        v
    }

    /// Inverse of [`FnPoint::coords`], validated.
    pub fn with_coords(&self, coords: &[f64]) -> Result<FnPoint> {
        let d = self.dim();
        if coords.len() != 2 * d {
            return Err(Error::ChartMismatch(format!(
                "expected {} coordinates, got {}",
                2 * d,
                coords.len()
            )));
        }
        FnPoint::new(
            self.chart.clone(),
            coords[..d].to_vec(),
            coords[d..].to_vec(),
        )
    }

    /// Euclidean distance between coordinate vectors of two points on the same chart.
    pub fn distance(&self, other: &FnPoint) -> Result<f64> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch("points on different charts".into()));
        }
        Ok(self
            .coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Accept a point iff every length is finite and strictly positive and every
/// twist is finite. Nothing is normalized.
pub fn validate_point(x: FnPoint) -> Result<FnPoint> {
    let d = x.chart.curve_count();
    if x.lengths.len() != d || x.twists.len() != d {
        return Err(Error::ChartMismatch(format!(
            "chart has {d} curves, point has {} lengths and {} twists",
            x.lengths.len(),
            x.twists.len()
        )));
    }
    for (i, &l) in x.lengths.iter().enumerate() {
        if !l.is_finite() {
            return Err(Error::NonFinite {
                what: "length",
                index: i,
                value: l,
            });
        }
        if l <= 0.0 {
            return Err(Error::NonpositiveLength { index: i, value: l });
        }
    }
    for (i, &t) in x.twists.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::NonFinite {
                what: "twist",
                index: i,
                value: t,
            });
        }
    }
    Ok(x)
}
