//! Oriented cell complexes built from conforming tetrahedral meshes.
//!
//! Cells of every dimension are stored with sorted vertex lists; incidence
//! signs come from the parity of the omitted position, so the chain-complex
//! identity (boundary of boundary vanishes) holds by construction. All
//! algorithms downstream are local graph traversals over the incidence
//! relations kept here in both directions.

use std::collections::BTreeMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::ComplexError;
use crate::geometry::{Point, point_to_f64};

/// A cell id with an incidence sign packed into the high bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SignedId(u32);

const SIGN_BIT: u32 = 1 << 31;

impl SignedId {
    #[inline]
    pub fn new(id: u32, sign: i8) -> Self {
        debug_assert!(id < SIGN_BIT);
        debug_assert!(sign == 1 || sign == -1);
        SignedId(if sign < 0 { id | SIGN_BIT } else { id })
    }
    #[inline]
    pub fn id(self) -> u32 {
        self.0 & !SIGN_BIT
    }
    #[inline]
    pub fn sign(self) -> i64 {
        if self.0 & SIGN_BIT != 0 {
            -1
        } else {
            1
        }
    }
}

/// Compressed sparse adjacency from cells of one dimension to signed
/// incident cells of an adjacent dimension.
#[derive(Clone, Debug, Default)]
struct Csr {
    offsets: Vec<u32>,
    entries: Vec<SignedId>,
}

impl Csr {
    fn row(&self, i: u32) -> &[SignedId] {
        let lo = self.offsets[i as usize] as usize;
        let hi = self.offsets[i as usize + 1] as usize;
        &self.entries[lo..hi]
    }

    fn from_pairs(n_rows: usize, pairs: impl Iterator<Item = (u32, SignedId)> + Clone) -> Csr {
        let mut counts = vec![0u32; n_rows + 1];
        for (r, _) in pairs.clone() {
            counts[r as usize + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut entries = vec![SignedId(0); counts[n_rows] as usize];
        let mut cursor = counts.clone();
        for (r, e) in pairs {
            entries[cursor[r as usize] as usize] = e;
            cursor[r as usize] += 1;
        }
        Csr {
            offsets: counts,
            entries,
        }
    }
}

/// The up-to-two 3-cell cofaces of a 2-cell.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cofaces {
    pair: [SignedId; 2],
    len: u8,
}

impl Cofaces {
    pub fn as_slice(&self) -> &[SignedId] {
        &self.pair[..self.len as usize]
    }
    pub fn len(&self) -> usize {
        self.len as usize
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
    fn push(&mut self, s: SignedId) {
        self.pair[self.len as usize] = s;
        self.len += 1;
    }
}

/// Immutable oriented 3-complex with signed incidence in both directions.
#[derive(Clone, Debug)]
pub struct CellComplex {
    coords: Vec<Point>,
    edges: Vec<[u32; 2]>,
    faces: Vec<[u32; 3]>,
    tets: Vec<[u32; 4]>,
    region: Vec<i32>,
    face_edges: Vec<[SignedId; 3]>,
    tet_faces: Vec<[SignedId; 4]>,
    face_tets: Vec<Cofaces>,
    edge_faces: Csr,
    vert_edges: Csr,
}

impl CellComplex {
    /// Build the complex of a labeled tetrahedral mesh. Faces and edges are
    /// deduplicated and stored with sorted vertex ids.
    pub fn build(coords: Vec<Point>, tets: &[([u32; 4], i32)]) -> Result<CellComplex, ComplexError> {
        let n_verts = coords.len();
        let mut sorted_tets = Vec::with_capacity(tets.len());
        let mut region = Vec::with_capacity(tets.len());
        for (i, (vs, tag)) in tets.iter().enumerate() {
            let mut t = *vs;
            for &v in &t {
                if v as usize >= n_verts {
                    return Err(ComplexError::VertexOutOfRange {
                        vertex: v as u64,
                        count: n_verts,
                    });
                }
            }
            t.sort_unstable();
            if t[0] == t[1] || t[1] == t[2] || t[2] == t[3] {
                return Err(ComplexError::DegenerateCell { tet: i });
            }
            sorted_tets.push(t);
            region.push(*tag);
        }

        // deduplicate faces; the sign of the t-th coface is (-1)^k where k is
        // the omitted position in the sorted tet
        let mut face_records: Vec<([u32; 3], u32, u8)> = Vec::with_capacity(sorted_tets.len() * 4);
        for (ti, t) in sorted_tets.iter().enumerate() {
            for k in 0..4u8 {
                let mut f = [0u32; 3];
                let mut w = 0;
                for (j, &v) in t.iter().enumerate() {
                    if j != k as usize {
                        f[w] = v;
                        w += 1;
                    }
                }
                face_records.push((f, ti as u32, k));
            }
        }
        face_records.sort_unstable();

        let mut faces: Vec<[u32; 3]> = Vec::new();
        let mut face_tets: Vec<Cofaces> = Vec::new();
        let mut tet_faces = vec![[SignedId(0); 4]; sorted_tets.len()];
        for &(f, ti, k) in &face_records {
            if faces.last() != Some(&f) {
                faces.push(f);
                face_tets.push(Cofaces::default());
            }
            let fi = (faces.len() - 1) as u32;
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let cof = &mut face_tets[fi as usize];
            if cof.len() == 2 {
                return Err(ComplexError::NonConformingMesh {
                    face: f,
                    count: cof.len() + 1,
                });
            }
            cof.push(SignedId::new(ti, sign));
            tet_faces[ti as usize][k as usize] = SignedId::new(fi, sign);
        }

        // deduplicate edges of faces; boundary of [a,b,c] is [b,c]-[a,c]+[a,b]
        let mut edge_records: Vec<([u32; 2], u32, u8)> = Vec::with_capacity(faces.len() * 3);
        for (fi, f) in faces.iter().enumerate() {
            edge_records.push(([f[1], f[2]], fi as u32, 0));
            edge_records.push(([f[0], f[2]], fi as u32, 1));
            edge_records.push(([f[0], f[1]], fi as u32, 2));
        }
        edge_records.sort_unstable();

        let mut edges: Vec<[u32; 2]> = Vec::new();
        let mut face_edges = vec![[SignedId(0); 3]; faces.len()];
        let mut edge_face_pairs: Vec<(u32, SignedId)> = Vec::with_capacity(edge_records.len());
        for &(e, fi, j) in &edge_records {
            if edges.last() != Some(&e) {
                edges.push(e);
            }
            let ei = (edges.len() - 1) as u32;
            let sign = if j % 2 == 0 { 1 } else { -1 };
            face_edges[fi as usize][j as usize] = SignedId::new(ei, sign);
            edge_face_pairs.push((ei, SignedId::new(fi, sign)));
        }
        let edge_faces = Csr::from_pairs(edges.len(), edge_face_pairs.iter().copied());

        let vert_edge_pairs: Vec<(u32, SignedId)> = edges
            .iter()
            .enumerate()
            .flat_map(|(ei, e)| {
                [
                    (e[0], SignedId::new(ei as u32, -1)),
                    (e[1], SignedId::new(ei as u32, 1)),
                ]
            })
            .collect();
        let vert_edges = Csr::from_pairs(n_verts, vert_edge_pairs.iter().copied());

        Ok(CellComplex {
            coords,
            edges,
            faces,
            tets: sorted_tets,
            region,
            face_edges,
            tet_faces,
            face_tets,
            edge_faces,
            vert_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }
    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn cell_count(&self, dim: u8) -> usize {
        match dim {
            0 => self.coords.len(),
            1 => self.edges.len(),
            2 => self.faces.len(),
            3 => self.tets.len(),
            _ => 0,
        }
    }

    pub fn total_cells(&self) -> usize {
        (0..4).map(|d| self.cell_count(d)).sum()
    }

    pub fn vertex(&self, v: u32) -> &Point {
        &self.coords[v as usize]
    }
    pub fn vertex_f64(&self, v: u32) -> [f64; 3] {
        point_to_f64(&self.coords[v as usize])
    }
    pub fn edge_vertices(&self, e: u32) -> [u32; 2] {
        self.edges[e as usize]
    }
    pub fn face_vertices(&self, f: u32) -> [u32; 3] {
        self.faces[f as usize]
    }
    pub fn tet_vertices(&self, t: u32) -> [u32; 4] {
        self.tets[t as usize]
    }
    pub fn region(&self, t: u32) -> i32 {
        self.region[t as usize]
    }
    pub fn regions(&self) -> &[i32] {
        &self.region
    }

    /// The three boundary edges of a face, with incidence signs.
    pub fn face_edges(&self, f: u32) -> &[SignedId; 3] {
        &self.face_edges[f as usize]
    }
    /// The four boundary faces of a tetrahedron, with incidence signs.
    pub fn tet_faces(&self, t: u32) -> &[SignedId; 4] {
        &self.tet_faces[t as usize]
    }
    /// The 3-cell cofaces of a face (one or two).
    pub fn face_tets(&self, f: u32) -> &Cofaces {
        &self.face_tets[f as usize]
    }
    /// The 2-cell cofaces of an edge, with signs kappa(face, edge).
    pub fn edge_faces(&self, e: u32) -> &[SignedId] {
        self.edge_faces.row(e)
    }
    /// The edges incident to a vertex, with signs kappa(edge, vertex).
    pub fn vertex_edges(&self, v: u32) -> &[SignedId] {
        self.vert_edges.row(v)
    }

    /// Locate an edge by its (unordered) endpoints.
    pub fn find_edge(&self, mut pair: [u32; 2]) -> Option<u32> {
        pair.sort_unstable();
        self.edges.binary_search(&pair).ok().map(|i| i as u32)
    }

    /// Locate a face by its (unordered) vertices.
    pub fn find_face(&self, mut tri: [u32; 3]) -> Option<u32> {
        tri.sort_unstable();
        self.faces.binary_search(&tri).ok().map(|i| i as u32)
    }

    /// Signed boundary of a chain via the incidence relation.
    pub fn boundary(&self, c: &Chain) -> Result<Chain, ComplexError> {
        if c.dim == 0 || c.dim > 3 {
            return Err(ComplexError::DimensionMismatch {
                expected: 1,
                got: c.dim,
            });
        }
        let mut out = Chain::new(c.dim - 1);
        for (&cell, &coeff) in &c.values {
            match c.dim {
                1 => {
                    let [a, b] = self.edges[cell as usize];
                    out.add(a, -coeff);
                    out.add(b, coeff);
                }
                2 => {
                    for s in self.face_edges[cell as usize] {
                        out.add(s.id(), coeff * s.sign());
                    }
                }
                _ => {
                    for s in self.tet_faces[cell as usize] {
                        out.add(s.id(), coeff * s.sign());
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Coboundary of a cochain: `<dc, a> = sum_b kappa(a, b) <c, b>`.
    pub fn coboundary(&self, c: &Cochain) -> Result<Cochain, ComplexError> {
        if c.dim > 2 {
            return Err(ComplexError::DimensionMismatch {
                expected: 2,
                got: c.dim,
            });
        }
        let mut out = Cochain::new(c.dim + 1, c.lanes);
        for (&cell, vals) in &c.values {
            match c.dim {
                0 => {
                    for s in self.vert_edges.row(cell) {
                        out.add_scaled(s.id(), vals, s.sign());
                    }
                }
                1 => {
                    for s in self.edge_faces.row(cell) {
                        out.add_scaled(s.id(), vals, s.sign());
                    }
                }
                _ => {
                    for s in self.face_tets[cell as usize].as_slice() {
                        out.add_scaled(s.id(), vals, s.sign());
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Verify the two-coface identity for every (3-cell, boundary 1-cell)
    /// pair: each edge of a tetrahedron lies in exactly two of its faces and
    /// the signed contributions cancel.
    pub fn check_massey(&self) -> Result<(), (u32, u32)> {
        let mut acc: BTreeMap<u32, (i64, u8)> = BTreeMap::new();
        for t in 0..self.tets.len() as u32 {
            acc.clear();
            for fs in self.tet_faces[t as usize] {
                for es in self.face_edges[fs.id() as usize] {
                    let slot = acc.entry(es.id()).or_insert((0, 0));
                    slot.0 += fs.sign() * es.sign();
                    slot.1 += 1;
                }
            }
            for (&e, &(sum, count)) in &acc {
                if count != 2 || sum != 0 {
                    return Err((t, e));
                }
            }
        }
        Ok(())
    }

    /// Exhaustive check that the boundary of every single-cell chain has zero
    /// boundary, in both composite dimensions.
    pub fn check_boundary_squared(&self) -> bool {
        for t in 0..self.tets.len() as u32 {
            let c = Chain::singleton(3, t, 1);
            let bb = self
                .boundary(&self.boundary(&c).unwrap())
                .unwrap();
            if !bb.is_zero() {
                return false;
            }
        }
        for f in 0..self.faces.len() as u32 {
            let c = Chain::singleton(2, f, 1);
            let bb = self
                .boundary(&self.boundary(&c).unwrap())
                .unwrap();
            if !bb.is_zero() {
                return false;
            }
        }
        true
    }

    /// Exhaustive check of the dual identity on single-cell cochains.
    pub fn check_coboundary_squared(&self) -> bool {
        for v in 0..self.coords.len() as u32 {
            let c = Cochain::singleton(0, 1, v, 1);
            let dd = self
                .coboundary(&self.coboundary(&c).unwrap())
                .unwrap();
            if !dd.is_zero() {
                return false;
            }
        }
        for e in 0..self.edges.len() as u32 {
            let c = Cochain::singleton(1, 1, e, 1);
            let dd = self
                .coboundary(&self.coboundary(&c).unwrap())
                .unwrap();
            if !dd.is_zero() {
                return false;
            }
        }
        true
    }

    /// Coherently orient a set of tetrahedra by flood fill over interior
    /// faces: adjacent cells must induce opposite signs on the shared face.
    /// Returns one sign per tetrahedron of the complex (zero outside the
    /// set), or the face where propagation found a conflict.
    pub fn coherent_orientation(&self, in_set: impl Fn(u32) -> bool) -> Result<Vec<i8>, u32> {
        let mut rho = vec![0i8; self.tets.len()];
        let mut queue = std::collections::VecDeque::new();
        for seed in 0..self.tets.len() as u32 {
            if rho[seed as usize] != 0 || !in_set(seed) {
                continue;
            }
            rho[seed as usize] = 1;
            queue.push_back(seed);
            while let Some(t) = queue.pop_front() {
                for fs in self.tet_faces[t as usize] {
                    for other in self.face_tets[fs.id() as usize].as_slice() {
                        if other.id() == t || !in_set(other.id()) {
                            continue;
                        }
                        let want = -(rho[t as usize] as i64 * fs.sign() * other.sign()) as i8;
                        let cur = rho[other.id() as usize];
                        if cur == 0 {
                            rho[other.id() as usize] = want;
                            queue.push_back(other.id());
                        } else if cur != want {
                            return Err(fs.id());
                        }
                    }
                }
            }
        }
        Ok(rho)
    }
}

/// Sparse integer chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub dim: u8,
    pub values: BTreeMap<u32, i64>,
}

impl Chain {
    pub fn new(dim: u8) -> Chain {
        Chain {
            dim,
            values: BTreeMap::new(),
        }
    }

    pub fn singleton(dim: u8, cell: u32, coeff: i64) -> Chain {
        let mut c = Chain::new(dim);
        c.add(cell, coeff);
        c
    }

    pub fn from_entries(dim: u8, entries: impl IntoIterator<Item = (u32, i64)>) -> Chain {
        let mut c = Chain::new(dim);
        for (cell, coeff) in entries {
            c.add(cell, coeff);
        }
        c.prune();
        c
    }

    pub fn add(&mut self, cell: u32, coeff: i64) {
        *self.values.entry(cell).or_insert(0) += coeff;
    }

    pub fn coeff(&self, cell: u32) -> i64 {
        self.values.get(&cell).copied().unwrap_or(0)
    }

    pub fn prune(&mut self) {
        self.values.retain(|_, v| *v != 0);
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|v| *v == 0)
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }
}

/// Sparse integer cochain with one coefficient lane per simultaneous
/// generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub dim: u8,
    pub lanes: usize,
    pub values: BTreeMap<u32, Vec<i64>>,
}

impl Cochain {
    pub fn new(dim: u8, lanes: usize) -> Cochain {
        Cochain {
            dim,
            lanes,
            values: BTreeMap::new(),
        }
    }

    pub fn singleton(dim: u8, lanes: usize, cell: u32, coeff: i64) -> Cochain {
        let mut c = Cochain::new(dim, lanes);
        let mut v = vec![0; lanes];
        v[0] = coeff;
        c.values.insert(cell, v);
        c
    }

    pub fn from_lane_entries(dim: u8, entries: impl IntoIterator<Item = (u32, i64)>) -> Cochain {
        let mut c = Cochain::new(dim, 1);
        for (cell, coeff) in entries {
            c.add_lane(cell, 0, coeff);
        }
        c.prune();
        c
    }

    pub fn add_lane(&mut self, cell: u32, lane: usize, coeff: i64) {
        let v = self.values.entry(cell).or_insert_with(|| vec![0; self.lanes]);
        v[lane] += coeff;
    }

    fn add_scaled(&mut self, cell: u32, vals: &[i64], sign: i64) {
        let v = self.values.entry(cell).or_insert_with(|| vec![0; self.lanes]);
        for (slot, x) in v.iter_mut().zip(vals) {
            *slot += sign * x;
        }
    }

    pub fn lane_coeff(&self, cell: u32, lane: usize) -> i64 {
        self.values.get(&cell).map(|v| v[lane]).unwrap_or(0)
    }

    pub fn prune(&mut self) {
        self.values.retain(|_, v| v.iter().any(|x| *x != 0));
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|v| v.iter().all(|x| *x == 0))
    }

    /// Extract one lane as a single-lane cochain.
    pub fn lane(&self, lane: usize) -> Cochain {
        let mut out = Cochain::new(self.dim, 1);
        for (&cell, vals) in &self.values {
            if vals[lane] != 0 {
                out.values.insert(cell, vec![vals[lane]]);
            }
        }
        out
    }
}

/// Dot product between a cochain and a chain of equal dimension, one result
/// per lane.
pub fn pairing(c: &Cochain, chain: &Chain) -> Result<Vec<i64>, ComplexError> {
    if c.dim != chain.dim {
        return Err(ComplexError::DimensionMismatch {
            expected: c.dim,
            got: chain.dim,
        });
    }
    let mut out = vec![0i64; c.lanes];
    for (&cell, vals) in &c.values {
        let coeff = chain.coeff(cell);
        if coeff != 0 {
            for (o, v) in out.iter_mut().zip(vals) {
                *o += coeff * v;
            }
        }
    }
    Ok(out)
}

/// A subcomplex closed under the face relation, tracked as per-dimension
/// membership bitsets over a shared parent complex.
#[derive(Clone, Debug)]
pub struct Subcomplex {
    parent: Arc<CellComplex>,
    cells: [FixedBitSet; 4],
}

impl Subcomplex {
    /// The closure of the selected tetrahedra.
    pub fn from_tets(parent: Arc<CellComplex>, select: impl Fn(u32) -> bool) -> Subcomplex {
        let mut cells = [
            FixedBitSet::with_capacity(parent.vertex_count()),
            FixedBitSet::with_capacity(parent.edge_count()),
            FixedBitSet::with_capacity(parent.face_count()),
            FixedBitSet::with_capacity(parent.tet_count()),
        ];
        for t in 0..parent.tet_count() as u32 {
            if select(t) {
                cells[3].insert(t as usize);
                for fs in parent.tet_faces(t) {
                    cells[2].insert(fs.id() as usize);
                }
            }
        }
        let mut sub = Subcomplex { parent, cells };
        sub.close_downward_from_faces();
        sub
    }

    /// Extend the subcomplex with the closure of extra faces.
    pub fn add_face_closure(&mut self, faces: impl IntoIterator<Item = u32>) {
        for f in faces {
            self.cells[2].insert(f as usize);
        }
        self.close_downward_from_faces();
    }

    fn close_downward_from_faces(&mut self) {
        let parent = self.parent.clone();
        for f in self.cells[2].ones().collect::<Vec<_>>() {
            for es in parent.face_edges(f as u32) {
                self.cells[1].insert(es.id() as usize);
            }
        }
        for e in self.cells[1].ones().collect::<Vec<_>>() {
            let [a, b] = parent.edge_vertices(e as u32);
            self.cells[0].insert(a as usize);
            self.cells[0].insert(b as usize);
        }
    }

    pub fn parent(&self) -> &Arc<CellComplex> {
        &self.parent
    }

    pub fn contains(&self, dim: u8, id: u32) -> bool {
        self.cells[dim as usize].contains(id as usize)
    }

    pub fn cells(&self, dim: u8) -> impl Iterator<Item = u32> + '_ {
        self.cells[dim as usize].ones().map(|i| i as u32)
    }

    pub fn count(&self, dim: u8) -> usize {
        self.cells[dim as usize].count_ones(..)
    }

    pub fn total_cells(&self) -> usize {
        (0..4).map(|d| self.count(d)).sum()
    }

    /// Check closure under the face relation.
    pub fn is_closed(&self) -> bool {
        for t in self.cells(3) {
            for fs in self.parent.tet_faces(t) {
                if !self.contains(2, fs.id()) {
                    return false;
                }
            }
        }
        for f in self.cells(2) {
            for es in self.parent.face_edges(f) {
                if !self.contains(1, es.id()) {
                    return false;
                }
            }
        }
        for e in self.cells(1) {
            let [a, b] = self.parent.edge_vertices(e);
            if !self.contains(0, a) || !self.contains(0, b) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_i64;

    fn unit_coords(n: usize) -> Vec<Point> {
        // arbitrary distinct lattice points
        (0..n)
            .map(|i| point_i64(i as i64, (i * i % 7) as i64, (i * 3 % 5) as i64))
            .collect()
    }

    pub(crate) fn single_tet() -> CellComplex {
        CellComplex::build(
            vec![
                point_i64(0, 0, 0),
                point_i64(1, 0, 0),
                point_i64(0, 1, 0),
                point_i64(0, 0, 1),
            ],
            &[([0, 1, 2, 3], 1)],
        )
        .unwrap()
    }

    #[test]
    fn single_tet_counts() {
        let k = single_tet();
        assert_eq!(
            [k.vertex_count(), k.edge_count(), k.face_count(), k.tet_count()],
            [4, 6, 4, 1]
        );
        assert!(k.check_boundary_squared());
        assert!(k.check_coboundary_squared());
        assert!(k.check_massey().is_ok());
    }

    #[test]
    fn two_tets_sharing_a_face() {
        let k = CellComplex::build(
            unit_coords(5),
            &[([0, 1, 2, 3], 1), ([1, 2, 3, 4], 2)],
        )
        .unwrap();
        assert_eq!(
            [k.vertex_count(), k.edge_count(), k.face_count(), k.tet_count()],
            [5, 9, 7, 2]
        );
        let shared = k.find_face([1, 2, 3]).unwrap();
        assert_eq!(k.face_tets(shared).len(), 2);
        assert!(k.check_massey().is_ok());
    }

    #[test]
    fn degenerate_and_nonconforming_rejected() {
        let err = CellComplex::build(unit_coords(4), &[([0, 1, 2, 2], 1)]).unwrap_err();
        assert_eq!(err, ComplexError::DegenerateCell { tet: 0 });

        let err = CellComplex::build(
            unit_coords(6),
            &[([0, 1, 2, 3], 1), ([0, 1, 2, 4], 1), ([0, 1, 2, 5], 1)],
        )
        .unwrap_err();
        assert!(matches!(err, ComplexError::NonConformingMesh { .. }));

        let err = CellComplex::build(unit_coords(3), &[([0, 1, 2, 9], 1)]).unwrap_err();
        assert!(matches!(err, ComplexError::VertexOutOfRange { .. }));
    }

    #[test]
    fn triangle_boundary_signs() {
        let k = single_tet();
        // face [0,1,2]: d[a,b,c] = [b,c] - [a,c] + [a,b]
        let f = k.find_face([0, 1, 2]).unwrap();
        let b = k.boundary(&Chain::singleton(2, f, 1)).unwrap();
        assert_eq!(b.coeff(k.find_edge([1, 2]).unwrap()), 1);
        assert_eq!(b.coeff(k.find_edge([0, 2]).unwrap()), -1);
        assert_eq!(b.coeff(k.find_edge([0, 1]).unwrap()), 1);
        // and the boundary is a cycle
        assert!(k.boundary(&b).unwrap().is_zero());
    }

    #[test]
    fn dimension_errors() {
        let k = single_tet();
        assert!(k.boundary(&Chain::new(0)).is_err());
        assert!(k.coboundary(&Cochain::new(3, 1)).is_err());
        assert!(pairing(&Cochain::new(1, 1), &Chain::new(2)).is_err());
    }

    #[test]
    fn pairing_with_zero_chain_is_zero() {
        let k = single_tet();
        let mut c = Cochain::new(1, 2);
        for e in 0..k.edge_count() as u32 {
            c.add_lane(e, 0, 3);
            c.add_lane(e, 1, -1);
        }
        assert_eq!(pairing(&c, &Chain::new(1)).unwrap(), vec![0, 0]);
    }

    #[test]
    fn subcomplex_closure() {
        let k = Arc::new(
            CellComplex::build(unit_coords(5), &[([0, 1, 2, 3], 1), ([1, 2, 3, 4], 2)]).unwrap(),
        );
        let sub = Subcomplex::from_tets(k.clone(), |t| k.region(t) == 1);
        assert!(sub.is_closed());
        assert_eq!(sub.count(3), 1);
        assert_eq!(sub.count(2), 4);
        assert_eq!(sub.count(0), 4);
    }

    #[test]
    fn coherent_orientation_two_tets() {
        let k = Arc::new(
            CellComplex::build(unit_coords(5), &[([0, 1, 2, 3], 1), ([1, 2, 3, 4], 1)]).unwrap(),
        );
        let rho = k.coherent_orientation(|_| true).unwrap();
        assert!(rho.iter().all(|&s| s != 0));
        let shared = k.find_face([1, 2, 3]).unwrap();
        let cof = k.face_tets(shared).as_slice();
        let s0 = rho[cof[0].id() as usize] as i64 * cof[0].sign();
        let s1 = rho[cof[1].id() as usize] as i64 * cof[1].sign();
        assert_eq!(s0 + s1, 0);
    }
}
