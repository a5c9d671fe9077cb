//! The STIT cell-division process `Y ∧ W`.
//!
//! Every cell lives for an exponential time and is then split by a random
//! hyperplane hitting it. Two equivalent constructions are provided:
//!
//! * [`Method::Direct`] draws the lifetime from `Exp(Λ([C]))` and the split
//!   from `Λ^C`.
//! * [`Method::Rejection`] lets hyperplanes from `Λ^W` rain on the cell at
//!   rate `Λ([W])`; the first that hits the cell splits it, the others are
//!   recorded as rejected.
//!
//! Node ids follow birth order. The root is 0 and the `k`-th split creates
//! the `Plus` child `2k + 1` and the `Minus` child `2k + 2`, so the zero
//! cell lineage always runs through odd ids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::geometry::{dot, hits, ConvexBody, HalfSpace, Hyperplane, Polytope, Side, EPS};
use crate::measure::DrivingMeasure;
use crate::rng::RandomStream;
use crate::tessellation::Tessellation;

/// Hard cap on the number of divisions in one trajectory.
pub const EVENT_CAP: usize = 10_000_000;
const RESAMPLE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rejection,
    #[default]
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedHyperplane {
    pub time: f64,
    pub plane: Hyperplane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellNode {
    pub id: usize,
    pub polytope: Polytope,
    pub birth: f64,
    /// `None` while the cell is alive at the current time.
    pub death: Option<f64>,
    pub parent: Option<usize>,
    /// `(plus, minus)` children.
    pub children: Option<(usize, usize)>,
    pub hyperplane: Option<Hyperplane>,
    /// Drops of the rejection rain that missed this cell, in time order.
    pub rejected: Vec<TimedHyperplane>,
}

impl CellNode {
    pub fn alive_at(&self, s: f64) -> bool {
        self.birth <= s && self.death.is_none_or(|d| d > s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellTree {
    pub window: Polytope,
    pub measure: DrivingMeasure,
    pub method: Method,
    pub nodes: Vec<CellNode>,
    pub current_time: f64,
    pub jump_times: Vec<f64>,
}

/// Rejects configurations outside the two supported geometry regimes.
pub fn check_regime(measure: &DrivingMeasure, window: &Polytope) -> Result<()> {
    if measure.dim() != window.dim() {
        return Err(StitError::RegimeMismatch(format!(
            "measure of dimension {} with a window of dimension {}",
            measure.dim(),
            window.dim()
        )));
    }
    if window.dim() != 2 && !measure.is_axis_parallel() {
        return Err(StitError::RegimeMismatch(
            "windows outside the plane need a measure on the coordinate axes".into(),
        ));
    }
    Ok(())
}

enum Cut {
    Split(Polytope, Polytope),
    Degenerate,
    Miss,
}

fn cut(cell: &Polytope, h: &Hyperplane) -> Result<Cut> {
    let plus = cell.clip(&h.half_space(Side::Plus));
    let minus = cell.clip(&h.half_space(Side::Minus));
    match (plus, minus) {
        (Ok(Some(a)), Ok(Some(b))) => Ok(Cut::Split(a, b)),
        (Err(StitError::DegenerateCut), _) | (_, Err(StitError::DegenerateCut)) => Ok(Cut::Degenerate),
        (Err(e), _) | (_, Err(e)) => Err(e),
        _ => Ok(Cut::Miss),
    }
}

/// Side of `h` holding `body` (assumed not hit by `h`).
pub fn side_of<B: ConvexBody + ?Sized>(body: &B, h: &Hyperplane) -> Side {
    let (n, c) = h.half_space(Side::Plus).inequality();
    if body.support(&n) <= c + EPS {
        Side::Plus
    } else {
        Side::Minus
    }
}

fn point_side(x: &[f64], h: &Hyperplane) -> Side {
    let (n, c) = h.half_space(Side::Plus).inequality();
    if dot(&n, x) <= c {
        Side::Plus
    } else {
        Side::Minus
    }
}

struct Split {
    time: f64,
    plane: Hyperplane,
    plus: Polytope,
    minus: Polytope,
}

/// Draws a split of `cell` from `Λ^cell`, resampling degenerate cuts.
fn direct_split(
    measure: &DrivingMeasure,
    cell: &Polytope,
    rng: &mut RandomStream,
) -> Result<(Hyperplane, Polytope, Polytope)> {
    for _ in 0..RESAMPLE_CAP {
        let h = measure.sample_hitting(cell, rng)?;
        if let Cut::Split(a, b) = cut(cell, &h)? {
            return Ok((h, a, b));
        }
    }
    Err(StitError::SamplerStall(RESAMPLE_CAP))
}

/// One drop of the rain on `window`, tested against `cell`. Degenerate
/// cuts are redrawn at the same time.
fn rain_drop(
    measure: &DrivingMeasure,
    window: &Polytope,
    cell: &Polytope,
    rng: &mut RandomStream,
) -> Result<(Hyperplane, Option<(Polytope, Polytope)>)> {
    for _ in 0..RESAMPLE_CAP {
        let h = measure.sample_hitting(window, rng)?;
        if !hits(&h, cell) {
            return Ok((h, None));
        }
        match cut(cell, &h)? {
            Cut::Split(a, b) => return Ok((h, Some((a, b)))),
            Cut::Degenerate | Cut::Miss => continue,
        }
    }
    Err(StitError::SamplerStall(RESAMPLE_CAP))
}

struct Event {
    time: f64,
    id: usize,
    split: Split,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed so that the max-heap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.id.cmp(&self.id))
    }
}

impl CellTree {
    /// A tree holding only the window at time 0.
    pub fn new(measure: &DrivingMeasure, window: &Polytope, method: Method) -> Result<Self> {
        check_regime(measure, window)?;
        if !(measure.hitting(window)? > 0.0) {
            return Err(StitError::InvalidMeasure("window has zero hitting mass".into()));
        }
        let root = CellNode {
            id: 0,
            polytope: window.clone(),
            birth: 0.0,
            death: None,
            parent: None,
            children: None,
            hyperplane: None,
            rejected: Vec::new(),
        };
        Ok(Self {
            window: window.clone(),
            measure: measure.clone(),
            method,
            nodes: vec![root],
            current_time: 0.0,
            jump_times: Vec::new(),
        })
    }

    fn schedule(&mut self, id: usize, from: f64, horizon: f64, rng: &mut RandomStream) -> Result<Option<Split>> {
        match self.method {
            Method::Direct => {
                let cell = &self.nodes[id].polytope;
                let time = from + rng.exponential(self.measure.hitting(cell)?);
                if time > horizon {
                    return Ok(None);
                }
                let (plane, plus, minus) = direct_split(&self.measure, cell, rng)?;
                Ok(Some(Split {
                    time,
                    plane,
                    plus,
                    minus,
                }))
            }
            Method::Rejection => {
                let rate = self.measure.hitting(&self.window)?;
                let mut time = from;
                loop {
                    time += rng.exponential(rate);
                    if time > horizon {
                        return Ok(None);
                    }
                    let (plane, pieces) = rain_drop(&self.measure, &self.window, &self.nodes[id].polytope, rng)?;
                    match pieces {
                        Some((plus, minus)) => {
                            return Ok(Some(Split {
                                time,
                                plane,
                                plus,
                                minus,
                            }))
                        }
                        None => self.nodes[id].rejected.push(TimedHyperplane { time, plane }),
                    }
                }
            }
        }
    }

    /// Continues the division process for `dt` time units.
    pub fn advance(&mut self, dt: f64, rng: &mut RandomStream) -> Result<()> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(StitError::InvalidParameter(format!(
                "time step must be non-negative, got {dt}"
            )));
        }
        let from = self.current_time;
        let horizon = from + dt;
        let live: Vec<usize> = self.nodes.iter().filter(|n| n.death.is_none()).map(|n| n.id).collect();
        let mut heap = BinaryHeap::new();
        for id in live {
            if let Some(split) = self.schedule(id, from, horizon, rng)? {
                heap.push(Event {
                    time: split.time,
                    id,
                    split,
                });
            }
        }
        while let Some(Event { time, id, split }) = heap.pop() {
            if self.jump_times.len() >= EVENT_CAP {
                return Err(StitError::ExplosionGuard(EVENT_CAP));
            }
            let plus_id = self.nodes.len();
            let minus_id = plus_id + 1;
            let node = &mut self.nodes[id];
            node.death = Some(time);
            node.children = Some((plus_id, minus_id));
            node.hyperplane = Some(split.plane);
            for (cid, poly) in [(plus_id, split.plus), (minus_id, split.minus)] {
                self.nodes.push(CellNode {
                    id: cid,
                    polytope: poly,
                    birth: time,
                    death: None,
                    parent: Some(id),
                    children: None,
                    hyperplane: None,
                    rejected: Vec::new(),
                });
            }
            self.jump_times.push(time);
            for cid in [plus_id, minus_id] {
                if let Some(s) = self.schedule(cid, time, horizon, rng)? {
                    heap.push(Event {
                        time: s.time,
                        id: cid,
                        split: s,
                    });
                }
            }
        }
        self.current_time = horizon;
        Ok(())
    }

    pub fn slice(&self, s: f64) -> Result<Tessellation> {
        if !(s > 0.0 && s <= self.current_time) {
            return Err(StitError::OutOfRange(s));
        }
        Ok(Tessellation {
            window: self.window.clone(),
            cells: self
                .nodes
                .iter()
                .filter(|n| n.alive_at(s))
                .map(|n| n.polytope.clone())
                .collect(),
        })
    }

    /// The tessellation at the current time.
    pub fn live(&self) -> Tessellation {
        Tessellation {
            window: self.window.clone(),
            cells: self
                .nodes
                .iter()
                .filter(|n| n.death.is_none())
                .map(|n| n.polytope.clone())
                .collect(),
        }
    }

    pub fn cell_count_at(&self, s: f64) -> usize {
        1 + self.jump_times.iter().filter(|t| **t <= s).count()
    }

    /// Ids of the cells that contained the origin, from the root down.
    pub fn zero_lineage(&self) -> Result<Vec<usize>> {
        let mut out = vec![0];
        let mut node = &self.nodes[0];
        while let (Some((plus, _)), Some(h)) = (node.children, &node.hyperplane) {
            if h.offset().abs() <= EPS {
                return Err(StitError::AmbiguousZeroCell);
            }
            out.push(plus);
            node = &self.nodes[plus];
        }
        Ok(out)
    }

    /// Zero cell at time `s`.
    pub fn zero_cell_at(&self, s: f64) -> Result<&Polytope> {
        let lineage = self.zero_lineage()?;
        let id = lineage
            .into_iter()
            .take_while(|id| self.nodes[*id].birth <= s)
            .last()
            .unwrap_or(0);
        Ok(&self.nodes[id].polytope)
    }

    /// `(birth time, cell)` along the zero cell lineage.
    pub fn zero_cells(&self) -> Result<Vec<(f64, &Polytope)>> {
        Ok(self
            .zero_lineage()?
            .into_iter()
            .map(|id| (self.nodes[id].birth, &self.nodes[id].polytope))
            .collect())
    }

    /// Writes cell `id` as `W ∩ H_1 ∩ ... ∩ H_k` using ancestor splits and all
    /// recorded rejected hyperplanes.
    pub fn halfspace_representation(&self, id: usize) -> Result<Vec<HalfSpace>> {
        if self.method != Method::Rejection {
            return Err(StitError::MethodMismatch);
        }
        let cell = self
            .nodes
            .get(id)
            .ok_or_else(|| StitError::InvalidParameter(format!("no cell with id {id}")))?;
        let mut path = vec![id];
        let mut cur = cell;
        while let Some(p) = cur.parent {
            path.push(p);
            cur = &self.nodes[p];
        }
        path.reverse();
        let inside = cell.polytope.centroid();
        let mut out = Vec::new();
        for (k, nid) in path.iter().enumerate() {
            let node = &self.nodes[*nid];
            for r in &node.rejected {
                out.push(r.plane.half_space(point_side(&inside, &r.plane)));
            }
            if let (Some(next), Some(h), Some((plus, _))) = (path.get(k + 1), &node.hyperplane, node.children) {
                let side = if *next == plus { Side::Plus } else { Side::Minus };
                out.push(h.half_space(side));
            }
        }
        Ok(out)
    }

    /// All rain drops seen by the zero cell lineage (rejected and splitting),
    /// in time order. They form a Poisson process on `[0, t] × [W]` with
    /// intensity `dt ⊗ Λ`.
    pub fn zero_cell_rain(&self) -> Result<Vec<TimedHyperplane>> {
        if self.method != Method::Rejection {
            return Err(StitError::MethodMismatch);
        }
        let mut out = Vec::new();
        for id in self.zero_lineage()? {
            let node = &self.nodes[id];
            out.extend(node.rejected.iter().cloned());
            if let (Some(time), Some(plane)) = (node.death, &node.hyperplane) {
                out.push(TimedHyperplane {
                    time,
                    plane: plane.clone(),
                });
            }
        }
        Ok(out)
    }

    /// True iff no cell boundary of `Y_s ∧ W` meets `body` (which must lie in `W`).
    pub fn body_uncut<B: ConvexBody + ?Sized>(&self, body: &B, s: f64) -> bool {
        let mut node = &self.nodes[0];
        loop {
            match (node.death, &node.hyperplane, node.children) {
                (Some(d), Some(h), Some((plus, minus))) if d <= s => {
                    if hits(h, body) {
                        return false;
                    }
                    node = match side_of(body, h) {
                        Side::Plus => &self.nodes[plus],
                        Side::Minus => &self.nodes[minus],
                    };
                }
                _ => return true,
            }
        }
    }

    /// Checks `Λ([C']) + Λ([C'']) >= Λ([C])` on every recorded split.
    pub fn splits_are_subadditive(&self) -> Result<bool> {
        for n in &self.nodes {
            if let Some((a, b)) = n.children {
                let whole = self.measure.hitting(&n.polytope)?;
                let parts =
                    self.measure.hitting(&self.nodes[a].polytope)? + self.measure.hitting(&self.nodes[b].polytope)?;
                if parts < whole * (1.0 - 1e-12) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Simulates `Y_t ∧ W`.
pub fn simulate(
    measure: &DrivingMeasure,
    window: &Polytope,
    t: f64,
    rng: &mut RandomStream,
    method: Method,
) -> Result<CellTree> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(StitError::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let mut tree = CellTree::new(measure, window, method)?;
    tree.advance(t, rng)?;
    Ok(tree)
}

/// The zero cell process alone: cheaper than a full tree when only the cell
/// containing the origin matters.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCellPath {
    pub window: Polytope,
    pub horizon: f64,
    /// `(birth time, cell)`, starting with `(0, W)`.
    pub cells: Vec<(f64, Polytope)>,
    /// Every drop of the rain on `W` up to the horizon (rejection method only).
    pub rain: Option<Vec<TimedHyperplane>>,
}

impl ZeroCellPath {
    pub fn zero_cells(&self) -> Vec<(f64, &Polytope)> {
        self.cells.iter().map(|(t, c)| (*t, c)).collect()
    }

    pub fn zero_cell_at(&self, s: f64) -> &Polytope {
        &self
            .cells
            .iter()
            .take_while(|(b, _)| *b <= s)
            .last()
            .unwrap_or(&self.cells[0])
            .1
    }
}

/// Simulates the zero cell of `Y ∧ W` on `[0, t]`.
pub fn simulate_zero_cell(
    measure: &DrivingMeasure,
    window: &Polytope,
    t: f64,
    rng: &mut RandomStream,
    method: Method,
) -> Result<ZeroCellPath> {
    check_regime(measure, window)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(StitError::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if !window.contains_point(&vec![0.0; window.dim()], true) {
        return Err(StitError::AmbiguousZeroCell);
    }
    let mut cells = vec![(0.0, window.clone())];
    let mut rain = Vec::new();
    let mut time = 0.0;
    let rate_w = measure.hitting(window)?;
    loop {
        if cells.len() > EVENT_CAP {
            return Err(StitError::ExplosionGuard(EVENT_CAP));
        }
        let cell = &cells.last().expect("non-empty").1;
        let split = match method {
            Method::Direct => {
                time += rng.exponential(measure.hitting(cell)?);
                if time > t {
                    break;
                }
                let (h, plus, _) = direct_split(measure, cell, rng)?;
                Some((h, plus))
            }
            Method::Rejection => {
                time += rng.exponential(rate_w);
                if time > t {
                    break;
                }
                let (h, pieces) = rain_drop(measure, window, cell, rng)?;
                rain.push(TimedHyperplane { time, plane: h.clone() });
                pieces.map(|(plus, _)| (h, plus))
            }
        };
        if let Some((h, plus)) = split {
            if h.offset().abs() <= EPS {
                return Err(StitError::AmbiguousZeroCell);
            }
            cells.push((time, plus));
        }
    }
    Ok(ZeroCellPath {
        window: window.clone(),
        horizon: t,
        cells,
        rain: (method == Method::Rejection).then_some(rain),
    })
}
