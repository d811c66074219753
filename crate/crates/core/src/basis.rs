//! Change of basis from lazy generators to a true cohomology basis.
//!
//! Every thinned-current lane traces a closed cycle on the dual complex:
//! submerged cycles run through conductor-interior dual cells, while the
//! surface cycles are realized by thinning the same surface cocycles into
//! the insulator, which routes them through insulator-interior dual cells
//! only. The two families are therefore disjoint point sets and their
//! linking numbers are well defined. Linking numbers are computed by exact
//! rational projection-crossing counts, and the Smith normal form of the
//! linking matrix selects integer combinations of lazy lanes forming a
//! basis.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::complex::{Cochain, Subcomplex};
use crate::ds::{thin_currents, LazyGeneratorSet, ThinnedCurrentSet};
use crate::dual::DualComplex;
use crate::error::BasisError;
use crate::geometry::{height_at, points_equal, segment_crossing, Crossing, Point, Rat};
use crate::mesh::RegionSplit;
use crate::snf::{snf, SparseIntMat};
use crate::surface::SurfaceGeneratorSet;

/// Where a dual cycle came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleSource {
    /// push-off of a surface generator, routed through insulator dual cells
    SurfaceGenerator { component: usize, lane: usize },
    /// core of a thinned current, routed through conductor dual cells
    ThinnedCurrent { component: usize, lane: usize },
}

/// A closed polyline through dual-cell barycenters with exact coordinates.
#[derive(Clone, Debug)]
pub struct DualCycle {
    /// closed: the first point equals the last
    pub polyline: Vec<Point>,
    pub source: CycleSource,
}

impl DualCycle {
    pub fn segments(&self) -> usize {
        self.polyline.len().saturating_sub(1)
    }
}

/// One oriented dual step: crossing `face` from tetrahedron `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct DualStep {
    face: u32,
    from: u32,
    to: u32,
}

/// Decompose a directed multigraph of dual steps into edge-disjoint closed
/// walks (Hierholzer). Every node must have equal in- and out-degree.
fn eulerian_rings(steps: &[DualStep]) -> Result<Vec<Vec<DualStep>>, BasisError> {
    let mut out_adj: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut degree: BTreeMap<u32, i64> = BTreeMap::new();
    for (i, s) in steps.iter().enumerate() {
        out_adj.entry(s.from).or_default().push(i);
        *degree.entry(s.from).or_default() += 1;
        *degree.entry(s.to).or_default() -= 1;
    }
    if degree.values().any(|d| *d != 0) {
        return Err(BasisError::NotARing { lane: usize::MAX });
    }
    for adj in out_adj.values_mut() {
        // deterministic traversal order: by face id, then target
        adj.sort_by_key(|&i| (steps[i].face, steps[i].to));
        adj.reverse(); // pop from the back gives ascending order
    }

    let mut used = vec![false; steps.len()];
    let mut rings = Vec::new();
    loop {
        // lowest node with an unused outgoing step
        let start = out_adj
            .iter()
            .find(|(_, adj)| adj.iter().any(|&i| !used[i]))
            .map(|(&n, _)| n);
        let Some(start) = start else { break };
        // Hierholzer: walk until the start closes, splicing in detours
        let mut stack = vec![start];
        let mut circuit: Vec<usize> = Vec::new();
        let mut path: Vec<usize> = Vec::new();
        while let Some(&node) = stack.last() {
            let next = out_adj
                .get_mut(&node)
                .and_then(|adj| {
                    while let Some(&i) = adj.last() {
                        if used[i] {
                            adj.pop();
                        } else {
                            return adj.pop();
                        }
                    }
                    None
                });
            match next {
                Some(i) => {
                    used[i] = true;
                    path.push(i);
                    stack.push(steps[i].to);
                }
                None => {
                    stack.pop();
                    if let Some(i) = path.pop() {
                        circuit.push(i);
                    }
                }
            }
        }
        circuit.reverse();
        if !circuit.is_empty() {
            rings.push(circuit.into_iter().map(|i| steps[i]).collect());
        }
    }
    Ok(rings)
}

/// Oriented dual steps of one thinned-current lane. The crossing direction
/// of each support face follows the current sign against the coherent
/// 3-cell orientation.
fn lane_steps(
    t: &ThinnedCurrentSet,
    lane: usize,
    dual: &DualComplex,
    target: &Subcomplex,
) -> Result<Vec<DualStep>, BasisError> {
    let complex = dual.complex();
    let mut steps = Vec::new();
    for (&face, vals) in &t.currents.values {
        let coeff = vals[lane];
        if coeff == 0 {
            continue;
        }
        let inside: Vec<_> = complex
            .face_tets(face)
            .as_slice()
            .iter()
            .filter(|s| target.contains(3, s.id()))
            .collect();
        if inside.len() != 2 {
            return Err(BasisError::SupportNotInterior { face });
        }
        // the "to" side sees rho * kappa opposite to the current sign
        let sign0 = dual.orientation(inside[0].id()) * inside[0].sign();
        debug_assert_eq!(sign0 + dual.orientation(inside[1].id()) * inside[1].sign(), 0);
        let (from, to) = if sign0 * coeff.signum() > 0 {
            (inside[0].id(), inside[1].id())
        } else {
            (inside[1].id(), inside[0].id())
        };
        for _ in 0..coeff.unsigned_abs() {
            steps.push(DualStep { face, from, to });
        }
    }
    Ok(steps)
}

fn ring_to_cycle(
    ring: &[DualStep],
    dual: &DualComplex,
    source: CycleSource,
) -> Result<DualCycle, BasisError> {
    if ring.len() < 3 {
        return Err(BasisError::DegenerateRing { len: ring.len() });
    }
    let mut polyline = Vec::with_capacity(ring.len() * 2 + 1);
    for s in ring {
        polyline.push(dual.dual_node(s.from).clone());
        polyline.push(dual.face_barycenter(s.face).clone());
    }
    polyline.push(dual.dual_node(ring[0].from).clone());
    for w in polyline.windows(2) {
        if points_equal(&w[0], &w[1]) {
            return Err(BasisError::DegenerateRing { len: ring.len() });
        }
    }
    Ok(DualCycle { polyline, source })
}

/// Chain the support of one lane into a single closed dual cycle.
pub fn order_thinned_cells(
    t: &ThinnedCurrentSet,
    lane: usize,
    dual: &DualComplex,
    target: &Subcomplex,
) -> Result<DualCycle, BasisError> {
    let steps = lane_steps(t, lane, dual, target)?;
    if steps.is_empty() {
        return Err(BasisError::EmptySupport { lane });
    }
    let rings = eulerian_rings(&steps).map_err(|e| match e {
        BasisError::NotARing { .. } => BasisError::NotARing { lane },
        other => other,
    })?;
    if rings.len() != 1 {
        return Err(BasisError::NotARing { lane });
    }
    ring_to_cycle(
        &rings[0],
        dual,
        CycleSource::ThinnedCurrent {
            component: t.component,
            lane,
        },
    )
}

/// All closed dual cycles of one lane; more than one means the support was
/// split into edge-disjoint rings whose linking numbers add up.
pub fn dual_cycles_for_lane(
    t: &ThinnedCurrentSet,
    lane: usize,
    dual: &DualComplex,
    target: &Subcomplex,
    source: CycleSource,
) -> Result<Vec<DualCycle>, BasisError> {
    let steps = lane_steps(t, lane, dual, target)?;
    if steps.is_empty() {
        return Ok(Vec::new());
    }
    let rings = eulerian_rings(&steps)?;
    rings
        .iter()
        .map(|ring| ring_to_cycle(ring, dual, source))
        .collect()
}

const MAX_PROJECTIONS: u32 = 32;

/// Exact Gauss linking number of two disjoint closed polylines by signed
/// projection crossings: project along a direction, count each proper
/// crossing where `a` passes over `b` with the sign of the planar turn.
/// Inadmissible projections (touching or collinear images) are retried with
/// fresh directions; the result is independent of the projection.
pub fn linking_number(a: &DualCycle, b: &DualCycle) -> Result<i64, BasisError> {
    linking_number_with_retries(a, b).map(|(v, _)| v)
}

pub fn linking_number_with_retries(a: &DualCycle, b: &DualCycle) -> Result<(i64, u32), BasisError> {
    for attempt in 0..MAX_PROJECTIONS {
        // an orientation-reversing frame negates every crossing sign
        let (pa, pb, det_sign) = if attempt == 0 {
            (a.polyline.clone(), b.polyline.clone(), 1)
        } else {
            let (m, det_sign) = projection_matrix(attempt);
            (
                transform(&a.polyline, &m),
                transform(&b.polyline, &m),
                det_sign,
            )
        };
        match crossings_sum(&pa, &pb) {
            Ok(sum) => return Ok((det_sign * sum, attempt)),
            Err(BasisError::DegenerateProjection { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(BasisError::DegenerateProjection {
        retries: MAX_PROJECTIONS,
    })
}

/// Deterministic integer projection basis with nonzero determinant, plus
/// the sign of that determinant.
fn projection_matrix(attempt: u32) -> ([[i64; 3]; 3], i64) {
    let mut state = 0x9E3779B97F4A7C15u64 ^ (attempt as u64).wrapping_mul(0xBF58476D1CE4E5B9);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        ((state >> 8) % 19) as i64 - 9
    };
    loop {
        let m = [
            [next(), next(), next()],
            [next(), next(), next()],
            [next(), next(), next()],
        ];
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if det != 0 {
            return (m, det.signum());
        }
    }
}

fn transform(points: &[Point], m: &[[i64; 3]; 3]) -> Vec<Point> {
    points
        .iter()
        .map(|p| {
            let mut out = [Rat::zero(), Rat::zero(), Rat::zero()];
            for (row, slot) in m.iter().zip(out.iter_mut()) {
                let mut acc = Rat::zero();
                for (coef, coord) in row.iter().zip(p.iter()) {
                    if *coef != 0 {
                        acc += coord * Rat::from_integer(BigInt::from(*coef));
                    }
                }
                *slot = acc;
            }
            out
        })
        .collect()
}

/// Sum of crossing signs where `a` passes over `b` in the current frame.
fn crossings_sum(a: &[Point], b: &[Point]) -> Result<i64, BasisError> {
    let mut sum = 0i64;
    for i in 0..a.len() - 1 {
        let (p1, p2) = (&a[i], &a[i + 1]);
        for j in 0..b.len() - 1 {
            let (q1, q2) = (&b[j], &b[j + 1]);
            match segment_crossing(p1, p2, q1, q2) {
                Crossing::None => {}
                Crossing::Degenerate => {
                    return Err(BasisError::DegenerateProjection { retries: 0 });
                }
                Crossing::Proper { t, u, turn } => {
                    let za = height_at(p1, p2, &t);
                    let zb = height_at(q1, q2, &u);
                    match za.cmp(&zb) {
                        std::cmp::Ordering::Equal => return Err(BasisError::CyclesIntersect),
                        // over-crossing: the Gauss-map degree counts the
                        // planar turn of the two directions
                        std::cmp::Ordering::Greater => sum += turn as i64,
                        std::cmp::Ordering::Less => {}
                    }
                }
            }
        }
    }
    Ok(sum)
}

/// The integer linking matrix between submerged and surface cycles, with
/// bookkeeping about projection retries and ring splitting.
#[derive(Clone, Debug)]
pub struct LinkingMatrix {
    /// rows: submerged (conductor) lanes; columns: surface (insulator
    /// push-off) lanes; both in global lane order
    pub entries: Vec<Vec<i64>>,
    /// projection retries used per entry
    pub retries: Vec<Vec<u32>>,
    /// lanes whose support needed Eulerian splitting into several rings
    pub split_lanes: Vec<usize>,
}

impl LinkingMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn to_matrix(&self) -> SparseIntMat {
        let n = self.entries.len();
        let m = self.entries.first().map_or(0, |r| r.len());
        let mut out = SparseIntMat::zero(n, m);
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out.set(i, j, BigInt::from(v));
            }
        }
        out
    }
}

/// Dual cycles of every lane: submerged cycles from the conductor-side
/// thinned currents, surface cycles by thinning the same cocycles into the
/// insulator. A lane with empty support yields no cycles and a zero
/// row/column.
pub fn build_linking_matrix(
    dual: &DualComplex,
    split: &RegionSplit,
    surface_sets: &[SurfaceGeneratorSet],
    thinned: &[ThinnedCurrentSet],
) -> Result<LinkingMatrix, BasisError> {
    let mut submerged: Vec<Vec<DualCycle>> = Vec::new();
    let mut split_lanes = Vec::new();
    for t in thinned {
        for lane in 0..t.currents.lanes {
            let cycles = dual_cycles_for_lane(
                t,
                lane,
                dual,
                &split.k_c,
                CycleSource::ThinnedCurrent {
                    component: t.component,
                    lane,
                },
            )?;
            if cycles.len() > 1 {
                split_lanes.push(submerged.len());
            }
            submerged.push(cycles);
        }
    }

    let mut surface: Vec<Vec<DualCycle>> = Vec::new();
    for set in surface_sets {
        let shifted = thin_currents(set, &split.k_a);
        for lane in 0..set.lanes() {
            let cycles = dual_cycles_for_lane(
                &shifted,
                lane,
                dual,
                &split.k_a,
                CycleSource::SurfaceGenerator {
                    component: set.component,
                    lane,
                },
            )?;
            if cycles.len() > 1 {
                split_lanes.push(surface.len());
            }
            surface.push(cycles);
        }
    }

    let n = submerged.len();
    let m = surface.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let computed: Result<Vec<(i64, u32)>, BasisError> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut total = 0i64;
            let mut retries = 0u32;
            for a in &submerged[i] {
                for b in &surface[j] {
                    let (v, r) = linking_number_with_retries(a, b)?;
                    total += v;
                    retries = retries.max(r);
                }
            }
            Ok((total, retries))
        })
        .collect();
    let computed = computed?;

    let mut entries = vec![vec![0i64; m]; n];
    let mut retries = vec![vec![0u32; m]; n];
    for (&(i, j), &(v, r)) in cells.iter().zip(&computed) {
        entries[i][j] = v;
        retries[i][j] = r;
    }
    split_lanes.sort_unstable();
    split_lanes.dedup();
    Ok(LinkingMatrix {
        entries,
        retries,
        split_lanes,
    })
}

/// Integer combinations of lazy lanes forming a true cohomology basis.
#[derive(Clone, Debug)]
pub struct BasisSelection {
    /// rank x lane-count integer matrix: each row combines lazy lanes
    pub combination: Vec<Vec<i64>>,
    pub rank: usize,
}

impl BasisSelection {
    /// Fail with `RankMismatch` when the selected rank differs from the
    /// oracle Betti number.
    pub fn require_rank(&self, expected: usize) -> Result<(), BasisError> {
        if self.rank == expected {
            Ok(())
        } else {
            Err(BasisError::RankMismatch {
                got: self.rank,
                expected,
            })
        }
    }

    /// Materialize the combined generators as single-lane cochains.
    pub fn combined_generators(&self, lazy: &LazyGeneratorSet) -> Vec<Cochain> {
        let lanes = lazy.lane_cochains();
        self.combination
            .iter()
            .map(|row| {
                let mut acc = Cochain::new(1, 1);
                for (coeff, lane) in row.iter().zip(&lanes) {
                    if *coeff == 0 {
                        continue;
                    }
                    for (&cell, vals) in &lane.values {
                        acc.add_lane(cell, 0, coeff * vals[0]);
                    }
                }
                acc.prune();
                acc
            })
            .collect()
    }
}

/// Change of basis: the Smith normal form of the linking matrix exposes
/// which integer combinations of lazy lanes survive as a basis — the rows
/// of the transform whose images span the row lattice.
pub fn change_of_basis(
    lazy: &LazyGeneratorSet,
    link: &LinkingMatrix,
) -> Result<BasisSelection, BasisError> {
    let l = link.to_matrix();
    let d = snf(&l, [true, false, false, false]);
    let rank = d.rank();
    let u = d.u.as_ref().unwrap();
    let lanes = lazy.count();
    debug_assert_eq!(lanes, l.nrows());
    let mut combination = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut row = vec![0i64; lanes];
        for (&c, v) in u.row(i) {
            row[c as usize] = v.to_i64().ok_or(BasisError::RankMismatch {
                got: rank,
                expected: rank,
            })?;
        }
        combination.push(row);
    }
    Ok(BasisSelection { combination, rank })
}
