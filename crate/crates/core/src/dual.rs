//! Barycentric dual complex.
//!
//! The dual map sends a k-cell to a (3-k)-cell through cell barycenters:
//! dual nodes sit at tetrahedron barycenters, the dual edge of a face is the
//! polyline through the face barycenter joining its cofaces' dual nodes, the
//! dual face of an edge is the fan of those polylines around it, and the
//! dual volume of a vertex is bounded by the dual faces of its edges. The
//! index sets coincide per dimension, so the dual map is the identity on
//! ids. A coherent orientation of the 3-cells fixes crossing directions for
//! the linking-number stage.

use std::sync::Arc;

use crate::complex::CellComplex;
use crate::error::ComplexError;
use crate::geometry::{barycenter, Point};

#[derive(Clone, Debug)]
pub struct DualComplex {
    complex: Arc<CellComplex>,
    tet_barycenters: Vec<Point>,
    face_barycenters: Vec<Point>,
    /// coherent orientation of the 3-cells, +1 on the lowest cell of each
    /// connected component
    rho: Vec<i8>,
}

impl DualComplex {
    pub fn build(complex: Arc<CellComplex>) -> Result<DualComplex, ComplexError> {
        let rho = complex
            .coherent_orientation(|_| true)
            .map_err(|face| ComplexError::NonConformingMesh {
                face: complex.face_vertices(face),
                count: complex.face_tets(face).len(),
            })?;
        let tet_barycenters = (0..complex.tet_count() as u32)
            .map(|t| {
                let vs = complex.tet_vertices(t);
                barycenter(&[
                    complex.vertex(vs[0]),
                    complex.vertex(vs[1]),
                    complex.vertex(vs[2]),
                    complex.vertex(vs[3]),
                ])
            })
            .collect();
        let face_barycenters = (0..complex.face_count() as u32)
            .map(|f| {
                let vs = complex.face_vertices(f);
                barycenter(&[complex.vertex(vs[0]), complex.vertex(vs[1]), complex.vertex(vs[2])])
            })
            .collect();
        Ok(DualComplex {
            complex,
            tet_barycenters,
            face_barycenters,
            rho,
        })
    }

    pub fn complex(&self) -> &Arc<CellComplex> {
        &self.complex
    }

    /// Number of dual cells per dual dimension (0..=3).
    pub fn dual_cell_count(&self, dual_dim: u8) -> usize {
        self.complex.cell_count(3 - dual_dim)
    }

    /// Dual 0-cell of a tetrahedron: its barycenter.
    pub fn dual_node(&self, tet: u32) -> &Point {
        &self.tet_barycenters[tet as usize]
    }

    pub fn face_barycenter(&self, face: u32) -> &Point {
        &self.face_barycenters[face as usize]
    }

    /// Dual 1-cell of a face: for interior faces the two-segment polyline
    /// through the barycenters of coface, face, coface; for boundary faces a
    /// single segment ending at the face barycenter.
    pub fn dual_edge_polyline(&self, face: u32) -> Vec<Point> {
        let cofaces = self.complex.face_tets(face);
        match cofaces.as_slice() {
            [a, b] => vec![
                self.tet_barycenters[a.id() as usize].clone(),
                self.face_barycenters[face as usize].clone(),
                self.tet_barycenters[b.id() as usize].clone(),
            ],
            [a] => vec![
                self.face_barycenters[face as usize].clone(),
                self.tet_barycenters[a.id() as usize].clone(),
            ],
            _ => unreachable!("faces have one or two cofaces"),
        }
    }

    /// Dual 2-cell of an edge, as the ids of the faces whose dual 1-cells
    /// bound it.
    pub fn dual_face_boundary(&self, edge: u32) -> Vec<u32> {
        self.complex.edge_faces(edge).iter().map(|s| s.id()).collect()
    }

    /// Dual 3-cell of a vertex, as the ids of the edges whose dual 2-cells
    /// bound it.
    pub fn dual_volume_boundary(&self, vertex: u32) -> Vec<u32> {
        self.complex.vertex_edges(vertex).iter().map(|s| s.id()).collect()
    }

    /// Coherent orientation sign of a tetrahedron.
    pub fn orientation(&self, tet: u32) -> i64 {
        self.rho[tet as usize] as i64
    }
}
