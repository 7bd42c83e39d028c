//! Event-driven cell-division construction of `Y(t, W)`.
//!
//! Every cell draws an exponential lifetime with rate `Λ([cell])` when it is
//! born. Cells are processed in order of death time; a dying cell is split by
//! a hyperplane from the normalized hitting law and the two pieces are born
//! at that instant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, StitError};
use crate::geometry::{ConvexPolytope, FacetPolygon, GeometryError, Tolerance, Window};
use crate::measures::HyperplaneMeasureSpec;
use crate::scalar::{lit, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Keep the final cells in the result.
    pub record_cells: bool,
    /// Keep every I-facet in the result. Summary counters are kept regardless.
    pub record_facets: bool,
    pub max_cells: usize,
    /// Consecutive failed split attempts tolerated for one event.
    pub max_resamples: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_cells: true,
            record_facets: true,
            max_cells: 10_000_000,
            max_resamples: 1000,
        }
    }
}

impl RunOptions {
    /// Counters only; for large replicate runs.
    pub fn summary_only() -> Self {
        Self {
            record_cells: false,
            record_facets: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CellRecord<T> {
    pub id: u64,
    pub polytope: ConvexPolytope<T>,
    pub birth_time: T,
    /// `+∞` (serialized as `null`) for cells alive at the end of the run.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub death_time: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IFacetRecord<T> {
    /// The section of the parent cell; `facet.carrier` is the splitting hyperplane.
    pub facet: FacetPolygon<T>,
    pub birth_time: T,
    pub parent_cell: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Checkpoint<T> {
    pub time: T,
    /// Total `(d-1)`-volume inside the window of facets born up to `time`.
    pub surface: T,
}

/// Counters accumulated during the run (available even when records are dropped).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RunSummary<T> {
    pub cell_count: u64,
    pub facet_count: u64,
    /// `Σ Vol_{d-1}(facet ∩ W)`.
    pub total_surface: T,
    /// Facet vertices strictly inside `W` (each tessellation vertex once).
    pub interior_vertex_count: u64,
    /// Facets whose lexicographically smallest vertex lies strictly inside `W`.
    pub reference_facet_count: u64,
    pub resampled_splits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Tessellation<T> {
    pub dim: usize,
    pub window: Window<T>,
    /// The polytope that was subdivided (equals the window unless it is a ball).
    pub domain: ConvexPolytope<T>,
    pub t_end: T,
    pub cells: Vec<CellRecord<T>>,
    pub i_facets: Vec<IFacetRecord<T>>,
    pub checkpoints: Vec<Checkpoint<T>>,
    pub summary: RunSummary<T>,
}

fn ser_inf<T: Real, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_none()
    } else {
        s.serialize_some(v)
    }
}

fn de_inf<'de, T: Real, D: Deserializer<'de>>(d: D) -> std::result::Result<T, D::Error> {
    Ok(Option::<T>::deserialize(d)?.unwrap_or_else(T::infinity))
}

struct Pending<T> {
    death: T,
    id: u64,
    birth: T,
    cell: ConvexPolytope<T>,
}

impl<T: Real> PartialEq for Pending<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Pending<T> {}

impl<T: Real> PartialOrd for Pending<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Pending<T> {
    // reversed: BinaryHeap is a max-heap and we want the earliest death first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .death
            .partial_cmp(&self.death)
            .unwrap_or(Ordering::Equal)
            .then(other.id.cmp(&self.id))
    }
}

/// Per-run state shared by [`run`] and [`iterate`].
struct Engine<'a, T: Real, R: Rng + ?Sized> {
    spec: &'a HyperplaneMeasureSpec<T>,
    window: &'a Window<T>,
    tol: Tolerance<T>,
    opts: &'a RunOptions,
    rng: &'a mut R,
    next_id: u64,
    summary: RunSummary<T>,
    facets: Vec<IFacetRecord<T>>,
}

impl<'a, T: Real, R: Rng + ?Sized> Engine<'a, T, R> {
    fn lifetime(&mut self, cell: &ConvexPolytope<T>) -> T {
        let rate = self.spec.measure_hitting(cell);
        let e: f64 = Exp1.sample(&mut *self.rng);
        lit::<T>(e) / rate
    }

    fn record_facet(&mut self, facet: FacetPolygon<T>, birth: T, parent: u64) -> T {
        let inside = self.window.facet_measure(&facet);
        self.summary.facet_count += 1;
        self.summary.total_surface += inside;
        let eps = self.tol.geom;
        self.summary.interior_vertex_count += facet
            .vertices
            .iter()
            .filter(|v| self.window.depth(v) > eps)
            .count() as u64;
        if self.window.depth(&facet.lexmin_vertex()) > eps {
            self.summary.reference_facet_count += 1;
        }
        if self.opts.record_facets {
            self.facets.push(IFacetRecord {
                facet,
                birth_time: birth,
                parent_cell: parent,
            });
        }
        inside
    }

    /// Runs the construction inside `root` from time 0 to `t_end`; returns the
    /// final cells and the checkpoint totals (relative to this run).
    fn subdivide(
        &mut self,
        root: ConvexPolytope<T>,
        t_end: T,
        time_offset: T,
        checkpoints: &[T],
    ) -> Result<(Vec<CellRecord<T>>, Vec<T>)> {
        let mut heap = BinaryHeap::new();
        let first = self.lifetime(&root);
        let id = self.take_id();
        heap.push(Pending {
            death: first,
            id,
            birth: T::zero(),
            cell: root,
        });
        let mut running = T::zero();
        let mut cp_values = Vec::with_capacity(checkpoints.len());
        while let Some(top) = heap.peek() {
            if top.death > t_end {
                break;
            }
            let Pending {
                death, id, cell, ..
            } = heap.pop().unwrap();
            while cp_values.len() < checkpoints.len() && checkpoints[cp_values.len()] < death {
                cp_values.push(running);
            }
            let split = self.split_cell(&cell)?;
            running += self.record_facet(split.facet, death + time_offset, id);
            for child in [split.plus, split.minus] {
                let life = self.lifetime(&child);
                let cid = self.take_id();
                heap.push(Pending {
                    death: death + life,
                    id: cid,
                    birth: death,
                    cell: child,
                });
            }
            if heap.len() > self.opts.max_cells {
                return Err(StitError::CellLimit(self.opts.max_cells));
            }
        }
        while cp_values.len() < checkpoints.len() {
            cp_values.push(running);
        }
        self.summary.cell_count += heap.len() as u64;
        let mut cells = Vec::new();
        if self.opts.record_cells {
            cells = heap
                .into_vec()
                .into_iter()
                .map(|p| CellRecord {
                    id: p.id,
                    polytope: p.cell,
                    birth_time: p.birth + time_offset,
                    death_time: T::infinity(),
                })
                .collect();
            cells.sort_by_key(|c| c.id);
        }
        Ok((cells, cp_values))
    }

    fn take_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn split_cell(&mut self, cell: &ConvexPolytope<T>) -> Result<crate::geometry::Split<T>> {
        for _ in 0..self.opts.max_resamples {
            let h = self.spec.sample_hitting(cell, &mut *self.rng)?;
            match cell.split(&h, &self.tol) {
                Ok(s) => return Ok(s),
                Err(GeometryError::DegenerateSplit) | Err(GeometryError::NoIntersection) => {
                    self.summary.resampled_splits += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(StitError::ResampleLimit(self.opts.max_resamples))
    }
}

fn check_checkpoints<T: Real>(checkpoints: &[T], t_end: T) -> Result<()> {
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(StitError::InvalidArgument(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let mut prev = T::zero();
    for &c in checkpoints {
        if !(c > prev) || c > t_end {
            return Err(StitError::InvalidArgument(
                "checkpoints must be sorted and lie in (0, t_end]".into(),
            ));
        }
        prev = c;
    }
    Ok(())
}

/// Simulates `Y(t_end, W)` driven by `spec`.
pub fn run<T: Real, R: Rng + ?Sized>(
    spec: &HyperplaneMeasureSpec<T>,
    t_end: T,
    window: &Window<T>,
    checkpoints: &[T],
    opts: &RunOptions,
    rng: &mut R,
) -> Result<Tessellation<T>> {
    check_checkpoints(checkpoints, t_end)?;
    if spec.dim != window.dim() {
        return Err(StitError::InvalidArgument(format!(
            "measure dimension {} does not match window dimension {}",
            spec.dim,
            window.dim()
        )));
    }
    let domain = window.domain();
    let mut engine = Engine {
        spec,
        window,
        tol: window.tolerance(),
        opts,
        rng,
        next_id: 0,
        summary: RunSummary::default(),
        facets: Vec::new(),
    };
    let (cells, cp) = engine.subdivide(domain.clone(), t_end, T::zero(), checkpoints)?;
    Ok(Tessellation {
        dim: window.dim(),
        window: window.clone(),
        domain,
        t_end,
        cells,
        i_facets: engine.facets,
        checkpoints: checkpoints
            .iter()
            .zip(cp)
            .map(|(&time, surface)| Checkpoint { time, surface })
            .collect(),
        summary: engine.summary,
    })
}

/// `Y₁ ⊞ Y(u)`: every final cell of `y1` is subdivided by an independent run
/// of duration `u`. Nested birth times are offset by `y1.t_end`;
/// `checkpoints` are relative to that offset.
pub fn iterate<T: Real, R: Rng + ?Sized>(
    y1: &Tessellation<T>,
    spec: &HyperplaneMeasureSpec<T>,
    u: T,
    checkpoints: &[T],
    opts: &RunOptions,
    rng: &mut R,
) -> Result<Tessellation<T>> {
    check_checkpoints(checkpoints, u)?;
    if y1.cells.is_empty() || y1.cells.len() as u64 != y1.summary.cell_count {
        return Err(StitError::InvalidArgument(
            "iterate needs the frame's cells to be recorded".into(),
        ));
    }
    let mut engine = Engine {
        spec,
        window: &y1.window,
        tol: y1.window.tolerance(),
        opts,
        rng,
        next_id: 0,
        summary: RunSummary::default(),
        facets: Vec::new(),
    };
    let mut cells = Vec::new();
    let mut nested_cp = vec![T::zero(); checkpoints.len()];
    for c in &y1.cells {
        let (mut sub, cp) = engine.subdivide(c.polytope.clone(), u, y1.t_end, checkpoints)?;
        cells.append(&mut sub);
        for (acc, v) in nested_cp.iter_mut().zip(cp) {
            *acc += v;
        }
    }
    let base = y1.summary.clone();
    let nested = engine.summary;
    let mut i_facets = y1.i_facets.clone();
    i_facets.extend(engine.facets);
    let mut cps = y1.checkpoints.clone();
    cps.extend(checkpoints.iter().zip(nested_cp).map(|(&s, v)| Checkpoint {
        time: y1.t_end + s,
        surface: base.total_surface + v,
    }));
    Ok(Tessellation {
        dim: y1.dim,
        window: y1.window.clone(),
        domain: y1.domain.clone(),
        t_end: y1.t_end + u,
        cells,
        i_facets,
        checkpoints: cps,
        summary: RunSummary {
            cell_count: nested.cell_count,
            facet_count: base.facet_count + nested.facet_count,
            total_surface: base.total_surface + nested.total_surface,
            interior_vertex_count: base.interior_vertex_count + nested.interior_vertex_count,
            reference_facet_count: base.reference_facet_count + nested.reference_facet_count,
            resampled_splits: base.resampled_splits + nested.resampled_splits,
        },
    })
}

/// `m · Y`: coordinates scale by `m`, construction times by `1/m`
/// (so that `m · Y(t) ≐ Y(t/m)`).
pub fn rescale<T: Real>(y: &Tessellation<T>, m: T) -> Result<Tessellation<T>> {
    if !(m > T::zero()) || !m.is_finite() {
        return Err(StitError::InvalidArgument(format!(
            "scale factor must be positive, got {m}"
        )));
    }
    let d = y.dim;
    let surf = m.powi(d as i32 - 1);
    let cells = y
        .cells
        .iter()
        .map(|c| CellRecord {
            id: c.id,
            polytope: c.polytope.scaled(m),
            birth_time: c.birth_time / m,
            death_time: c.death_time / m,
        })
        .collect();
    let i_facets = y
        .i_facets
        .iter()
        .map(|f| IFacetRecord {
            facet: f.facet.scaled(m, d),
            birth_time: f.birth_time / m,
            parent_cell: f.parent_cell,
        })
        .collect();
    let mut summary = y.summary.clone();
    summary.total_surface = summary.total_surface * surf;
    Ok(Tessellation {
        dim: d,
        window: y.window.scaled(m),
        domain: y.domain.scaled(m),
        t_end: y.t_end / m,
        cells,
        i_facets,
        checkpoints: y
            .checkpoints
            .iter()
            .map(|c| Checkpoint {
                time: c.time / m,
                surface: c.surface * surf,
            })
            .collect(),
        summary,
    })
}

impl<T: Real> Tessellation<T> {
    pub fn total_surface(&self) -> T {
        self.summary.total_surface
    }

    /// `(time, cumulative surface)` pairs.
    pub fn checkpoint_totals(&self) -> Vec<(T, T)> {
        self.checkpoints
            .iter()
            .map(|c| (c.time, c.surface))
            .collect()
    }

    /// Sum of recorded cell volumes.
    pub fn cell_volume_sum(&self) -> T {
        self.cells.iter().map(|c| c.polytope.volume()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
