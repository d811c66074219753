//! Thinned currents and their extension to lazy cohomology generators.
//!
//! Surface cocycles are pushed to 2-cochains supported inside the conductor
//! (one accumulation per incident 2-cell), extended simultaneously across
//! all lanes to global 1-cocycles solving `dh = t` by spanning-tree
//! back-substitution with an exact integer fallback solve, and finally
//! restricted to the insulator subcomplex.

use std::collections::VecDeque;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::complex::{CellComplex, Cochain, Subcomplex};
use crate::error::{DsError, Error};
use crate::mesh::RegionSplit;
use crate::snf::{snf, SparseIntMat};
use crate::surface::{
    build_tree_cotree, close_generators, extract_components, SurfaceComponent,
    SurfaceGeneratorSet, TreeCotree,
};

/// Multi-lane 2-cochain of unit currents inside a subcomplex.
#[derive(Clone, Debug)]
pub struct ThinnedCurrentSet {
    pub component: usize,
    /// dim-2 cochain, one lane per surface generator
    pub currents: Cochain,
}

/// Push the surface cocycles of one component to thinned currents in the
/// target subcomplex: every 2-cell incident to a support edge accumulates
/// the edge coefficient times the incidence sign.
pub fn thin_currents(surf: &SurfaceGeneratorSet, target: &Subcomplex) -> ThinnedCurrentSet {
    let complex = target.parent();
    let lanes = surf.cocycles.lanes;
    let mut currents = Cochain::new(2, lanes);
    for (&edge, coeffs) in &surf.cocycles.values {
        for fs in complex.edge_faces(edge) {
            if !target.contains(2, fs.id()) {
                continue;
            }
            let entry = currents
                .values
                .entry(fs.id())
                .or_insert_with(|| vec![0; lanes]);
            for (slot, c) in entry.iter_mut().zip(coeffs) {
                *slot += fs.sign() * c;
            }
        }
    }
    currents.prune();
    ThinnedCurrentSet {
        component: surf.component,
        currents,
    }
}

/// First (3-cell, lane) where the thinned current fails to be a cocycle on
/// the subcomplex, if any.
pub fn cocycle_defect(t: &ThinnedCurrentSet, target: &Subcomplex) -> Option<(u32, usize)> {
    let complex = target.parent();
    let lanes = t.currents.lanes;
    for tet in target.cells(3) {
        let mut sums = vec![0i64; lanes];
        for fs in complex.tet_faces(tet) {
            if let Some(vals) = t.currents.values.get(&fs.id()) {
                for (s, v) in sums.iter_mut().zip(vals) {
                    *s += fs.sign() * v;
                }
            }
        }
        if let Some(lane) = sums.iter().position(|s| *s != 0) {
            return Some((tet, lane));
        }
    }
    None
}

/// Result of extending one component's thinned currents.
#[derive(Clone, Debug)]
pub struct ExtensionResult {
    /// restriction to insulator edges, dim-1 cochain with all lanes
    pub restricted: Cochain,
    /// the full cocycle on every edge of the mesh, kept only on request
    pub full: Option<Cochain>,
    /// number of edges the back-substitution could not reach, solved exactly
    pub fallback_edges: usize,
}

/// Solve `dh = t` over the whole mesh simultaneously for all lanes: fix
/// h = 0 on a spanning tree of the 1-skeleton, back-substitute through face
/// equations with a single unknown, and hand any remaining unknowns to an
/// exact integer solve. The result is restricted to the insulator.
pub fn extend_to_cocycle(
    t: &ThinnedCurrentSet,
    split: &RegionSplit,
    keep_full: bool,
) -> Result<ExtensionResult, DsError> {
    let complex = split.complex();
    let lanes = t.currents.lanes;
    let n_edges = complex.edge_count();
    let n_faces = complex.face_count();

    // dense right-hand side
    let mut t_dense = vec![0i64; n_faces * lanes];
    for (&f, vals) in &t.currents.values {
        t_dense[f as usize * lanes..(f as usize + 1) * lanes].copy_from_slice(vals);
    }

    let mut h = vec![0i64; n_edges * lanes];
    let mut determined = FixedBitSet::with_capacity(n_edges);

    // spanning forest of the 1-skeleton, breadth-first from lowest ids
    let mut visited = FixedBitSet::with_capacity(complex.vertex_count());
    let mut queue = VecDeque::new();
    for seed in 0..complex.vertex_count() {
        if visited.contains(seed) {
            continue;
        }
        visited.insert(seed);
        queue.push_back(seed as u32);
        while let Some(v) = queue.pop_front() {
            for es in complex.vertex_edges(v) {
                let [a, b] = complex.edge_vertices(es.id());
                let other = if a == v { b } else { a };
                if !visited.contains(other as usize) {
                    visited.insert(other as usize);
                    determined.insert(es.id() as usize);
                    queue.push_back(other);
                }
            }
        }
    }

    // face equations with one unknown left propagate a forced value
    let mut undet: Vec<u8> = vec![0; n_faces];
    let mut worklist = VecDeque::new();
    for f in 0..n_faces as u32 {
        let mut n = 0u8;
        for es in complex.face_edges(f) {
            if !determined.contains(es.id() as usize) {
                n += 1;
            }
        }
        undet[f as usize] = n;
        if n == 1 {
            worklist.push_back(f);
        }
    }

    let check_face = |f: u32, h: &[i64]| -> bool {
        let base = f as usize * lanes;
        for lane in 0..lanes {
            let mut sum = 0i64;
            for es in complex.face_edges(f) {
                sum += es.sign() * h[es.id() as usize * lanes + lane];
            }
            if sum != t_dense[base + lane] {
                return false;
            }
        }
        true
    };

    while let Some(f) = worklist.pop_front() {
        if undet[f as usize] != 1 {
            continue;
        }
        let mut missing = None;
        let base = f as usize * lanes;
        let mut partial = t_dense[base..base + lanes].to_vec();
        for es in complex.face_edges(f) {
            if determined.contains(es.id() as usize) {
                for (p, lane) in partial.iter_mut().zip(0..lanes) {
                    *p -= es.sign() * h[es.id() as usize * lanes + lane];
                }
            } else {
                missing = Some(es);
            }
        }
        let es = missing.expect("counted one unknown");
        let eb = es.id() as usize * lanes;
        for lane in 0..lanes {
            h[eb + lane] = es.sign() * partial[lane];
        }
        determined.insert(es.id() as usize);
        undet[f as usize] = 0;
        for nf in complex.edge_faces(es.id()) {
            if nf.id() == f {
                continue;
            }
            let slot = &mut undet[nf.id() as usize];
            if *slot > 0 {
                *slot -= 1;
                match *slot {
                    1 => worklist.push_back(nf.id()),
                    0 if !check_face(nf.id(), &h) => {
                        return Err(DsError::ExtensionFailed(format!(
                            "face {} equation inconsistent during back-substitution",
                            nf.id()
                        )));
                    }
                    _ => {}
                }
            }
        }
    }

    // residual exact solve on whatever back-substitution could not reach
    let leftover: Vec<u32> = (0..n_edges as u32)
        .filter(|&e| !determined.contains(e as usize))
        .collect();
    let fallback_edges = leftover.len();
    if !leftover.is_empty() {
        solve_residual(complex, &leftover, &mut h, &t_dense, lanes, &determined)?;
    }

    // final validation of every face equation
    for f in 0..n_faces as u32 {
        if !check_face(f, &h) {
            return Err(DsError::ExtensionFailed(format!(
                "face {f} equation violated after extension"
            )));
        }
    }

    let collect = |keep: &dyn Fn(u32) -> bool| -> Cochain {
        let mut c = Cochain::new(1, lanes);
        for e in 0..n_edges as u32 {
            let base = e as usize * lanes;
            if keep(e) && h[base..base + lanes].iter().any(|v| *v != 0) {
                c.values.insert(e, h[base..base + lanes].to_vec());
            }
        }
        c
    };

    let restricted = collect(&|e| split.k_a.contains(1, e));
    let full = keep_full.then(|| collect(&|_| true));

    Ok(ExtensionResult {
        restricted,
        full,
        fallback_edges,
    })
}

fn solve_residual(
    complex: &CellComplex,
    leftover: &[u32],
    h: &mut [i64],
    t_dense: &[i64],
    lanes: usize,
    determined: &FixedBitSet,
) -> Result<(), DsError> {
    // equations: all faces touching an undetermined edge
    let col_of: std::collections::BTreeMap<u32, usize> =
        leftover.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut face_rows: Vec<u32> = leftover
        .iter()
        .flat_map(|&e| complex.edge_faces(e).iter().map(|fs| fs.id()))
        .collect();
    face_rows.sort_unstable();
    face_rows.dedup();

    let mut a = SparseIntMat::zero(face_rows.len(), leftover.len());
    let mut rhs: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); face_rows.len()]; lanes];
    for (row, &f) in face_rows.iter().enumerate() {
        let base = f as usize * lanes;
        for lane in 0..lanes {
            rhs[lane][row] = BigInt::from(t_dense[base + lane]);
        }
        for es in complex.face_edges(f) {
            if let Some(&col) = col_of.get(&es.id()) {
                let cur = a.get(row, col) + es.sign();
                a.set(row, col, cur);
            } else {
                debug_assert!(determined.contains(es.id() as usize));
                for lane in 0..lanes {
                    rhs[lane][row] -= es.sign() * h[es.id() as usize * lanes + lane];
                }
            }
        }
    }

    let d = snf(&a, [true, false, true, false]);
    let u = d.u.as_ref().unwrap();
    let v = d.v.as_ref().unwrap();
    let rank = d.rank();
    for lane in 0..lanes {
        // y = S^{-1} U rhs, valid only if the divisions are exact
        let mut y = vec![BigInt::zero(); leftover.len()];
        for (i, yi) in y.iter_mut().enumerate().take(leftover.len().min(u.nrows())) {
            let mut dot = BigInt::zero();
            for (&c, val) in u.row(i) {
                dot += val * &rhs[lane][c as usize];
            }
            if i < rank {
                let f = &d.factors[i];
                if (&dot % f).is_zero() {
                    *yi = dot / f;
                } else {
                    return Err(DsError::ExtensionFailed(
                        "residual system has no integer solution".into(),
                    ));
                }
            } else if !dot.is_zero() {
                return Err(DsError::ExtensionFailed(
                    "residual system is inconsistent".into(),
                ));
            }
        }
        // consistency rows beyond the solution length
        for i in leftover.len()..u.nrows() {
            let mut dot = BigInt::zero();
            for (&c, val) in u.row(i) {
                dot += val * &rhs[lane][c as usize];
            }
            if !dot.is_zero() {
                return Err(DsError::ExtensionFailed(
                    "residual system is inconsistent".into(),
                ));
            }
        }
        // x = V y
        for (r, &e) in leftover.iter().enumerate() {
            let mut x = BigInt::zero();
            for (&c, val) in v.row(r) {
                if (c as usize) < y.len() {
                    x += val * &y[c as usize];
                }
            }
            h[e as usize * lanes + lane] = x.to_i64().ok_or_else(|| {
                DsError::ExtensionFailed("residual solution exceeds 64-bit range".into())
            })?;
        }
    }
    Ok(())
}

/// The lazy cohomology generators: per boundary component, all of its
/// surface lanes extended and restricted to the insulator.
#[derive(Clone, Debug)]
pub struct LazyGeneratorSet {
    /// one multi-lane dim-1 cochain per component, supported in the insulator
    pub per_component: Vec<Cochain>,
    /// flattened (component index, closing edge id) per lane
    pub provenance: Vec<(usize, u32)>,
}

impl LazyGeneratorSet {
    pub fn count(&self) -> usize {
        self.provenance.len()
    }

    /// All lanes as single-lane cochains, in provenance order.
    pub fn lane_cochains(&self) -> Vec<Cochain> {
        let mut out = Vec::with_capacity(self.count());
        for c in &self.per_component {
            for lane in 0..c.lanes {
                out.push(c.lane(lane));
            }
        }
        out
    }
}

/// Per-stage wall-clock timings in milliseconds.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageTimings {
    pub extract_ms: f64,
    pub surface_ms: f64,
    pub thin_ms: f64,
    pub extend_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ComponentSummary {
    pub genus: usize,
    pub faces: usize,
    pub lanes: usize,
    pub closing_edges: Vec<u32>,
}

/// Debug view of one component's trees and generators.
#[derive(Clone, Debug)]
pub struct SurfaceDebug {
    pub tree_edges: Vec<u32>,
    pub cotree_edges: Vec<u32>,
    pub leftover_edges: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// verify cocycle conditions exhaustively while running
    pub validate: bool,
    /// keep the pre-restriction cocycles (memory heavy on large meshes)
    pub keep_full: bool,
    /// collect tree/cotree debug data
    pub debug_surface: bool,
}

#[derive(Clone, Debug)]
pub struct DsOutput {
    pub lazy: LazyGeneratorSet,
    pub components: Vec<ComponentSummary>,
    pub surface_sets: Vec<SurfaceGeneratorSet>,
    pub thinned: Vec<ThinnedCurrentSet>,
    pub full_cocycles: Vec<Option<Cochain>>,
    pub timings: StageTimings,
    pub fallback_edges: usize,
    pub debug: Option<Vec<SurfaceDebug>>,
}

/// The whole pipeline for one region split: extract boundary components,
/// compute surface generators, thin, extend, restrict. Components are
/// independent and run in parallel; lane order is fixed by component index.
pub fn run_ds(split: &RegionSplit, options: &RunOptions) -> Result<DsOutput, Error> {
    let t0 = Instant::now();
    let components = extract_components(split)?;
    let extract_ms = ms_since(t0);

    let t1 = Instant::now();
    let with_trees: Vec<(usize, &SurfaceComponent, TreeCotree)> = components
        .par_iter()
        .enumerate()
        .map(|(i, comp)| build_tree_cotree(comp).map(|tc| (i, comp, tc)))
        .collect::<Result<_, _>>()?;
    let surface_sets: Vec<SurfaceGeneratorSet> = with_trees
        .par_iter()
        .map(|(i, comp, tc)| close_generators(comp, tc, *i))
        .collect();
    let surface_ms = ms_since(t1);

    if options.validate {
        for (set, (_, comp, _)) in surface_sets.iter().zip(&with_trees) {
            if set.lanes() > 0 && !comp.is_surface_cocycle(&set.cocycles) {
                return Err(Error::Surface(crate::error::SurfaceError::Internal(
                    "closed generator is not a surface cocycle".into(),
                )));
            }
        }
    }

    let t2 = Instant::now();
    let thinned: Vec<ThinnedCurrentSet> = surface_sets
        .par_iter()
        .map(|s| thin_currents(s, &split.k_c))
        .collect();
    let thin_ms = ms_since(t2);

    if options.validate {
        for t in &thinned {
            if let Some((tet, lane)) = cocycle_defect(t, &split.k_c) {
                return Err(Error::Ds(DsError::ExtensionFailed(format!(
                    "thinned current lane {lane} not a cocycle at 3-cell {tet}"
                ))));
            }
        }
    }

    let t3 = Instant::now();
    let extended: Vec<ExtensionResult> = thinned
        .par_iter()
        .map(|t| extend_to_cocycle(t, split, options.keep_full))
        .collect::<Result<_, _>>()
        .map_err(Error::Ds)?;
    let extend_ms = ms_since(t3);

    let mut per_component = Vec::with_capacity(extended.len());
    let mut provenance = Vec::new();
    let mut full_cocycles = Vec::with_capacity(extended.len());
    let mut summaries = Vec::with_capacity(extended.len());
    let mut fallback_edges = 0;
    for ((ext, set), (_, comp, tc)) in extended.into_iter().zip(&surface_sets).zip(&with_trees) {
        fallback_edges += ext.fallback_edges;
        for &ce in &set.closing_edges {
            provenance.push((set.component, ce));
        }
        summaries.push(ComponentSummary {
            genus: comp.genus,
            faces: comp.face_count(),
            lanes: set.lanes(),
            closing_edges: set.closing_edges.clone(),
        });
        let _ = tc;
        per_component.push(ext.restricted);
        full_cocycles.push(ext.full);
    }

    let debug = options.debug_surface.then(|| {
        with_trees
            .iter()
            .map(|(_, _, tc)| SurfaceDebug {
                tree_edges: tc.tree_edges.clone(),
                cotree_edges: tc.cotree_edges.clone(),
                leftover_edges: tc.leftover_edges.clone(),
            })
            .collect()
    });

    Ok(DsOutput {
        lazy: LazyGeneratorSet {
            per_component,
            provenance,
        },
        components: summaries,
        surface_sets,
        thinned,
        full_cocycles,
        timings: StageTimings {
            extract_ms,
            surface_ms,
            thin_ms,
            extend_ms,
            total_ms: ms_since(t0),
        },
        fallback_edges,
        debug,
    })
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
