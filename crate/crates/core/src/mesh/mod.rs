//! Mesh input/output, region splitting, and canonical test-mesh generation.

pub mod generate;
pub mod gmsh;
pub mod tetgen;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use crate::complex::{CellComplex, Subcomplex};
use crate::error::MeshError;
use crate::geometry::Point;

/// A labeled tetrahedral mesh as read from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshFile {
    pub vertices: Vec<Point>,
    pub tets: Vec<([u32; 4], i32)>,
}

impl MeshFile {
    pub fn build_complex(&self) -> Result<CellComplex, MeshError> {
        Ok(CellComplex::build(self.vertices.clone(), &self.tets)?)
    }

    /// All region tags present, sorted.
    pub fn region_tags(&self) -> BTreeSet<i32> {
        self.tets.iter().map(|(_, tag)| *tag).collect()
    }
}

/// Supported mesh file formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    GmshV2Ascii,
    TetgenNodeEle,
}

impl MeshFormat {
    /// Guess the format from a path extension (`.msh` or `.node`/`.ele`).
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => Some(MeshFormat::GmshV2Ascii),
            Some("node") | Some("ele") => Some(MeshFormat::TetgenNodeEle),
            _ => None,
        }
    }
}

/// Parse a mesh file. For the TetGen format, `path` may point at either the
/// `.node` or the `.ele` file of the pair.
pub fn parse_mesh(path: &Path, format: MeshFormat) -> Result<MeshFile, MeshError> {
    match format {
        MeshFormat::GmshV2Ascii => gmsh::parse(path),
        MeshFormat::TetgenNodeEle => tetgen::parse(path),
    }
}

/// Write a mesh file. For TetGen, `path` is the `.node` path; the `.ele` is
/// written next to it.
pub fn write_mesh(mesh: &MeshFile, path: &Path, format: MeshFormat) -> Result<(), MeshError> {
    match format {
        MeshFormat::GmshV2Ascii => gmsh::write(mesh, path),
        MeshFormat::TetgenNodeEle => tetgen::write(mesh, path),
    }
}

/// The conductor/insulator decomposition of a mesh.
#[derive(Clone, Debug)]
pub struct RegionSplit {
    pub conductor_tags: BTreeSet<i32>,
    pub k_c: Subcomplex,
    pub k_a: Subcomplex,
    /// The 2-cells of the conductor boundary, after outer-boundary exclusion.
    pub boundary_faces: Vec<u32>,
    pub exclude_outer_boundary: bool,
}

impl RegionSplit {
    pub fn complex(&self) -> &Arc<CellComplex> {
        self.k_c.parent()
    }
}

/// Split a complex into the conductor subcomplex (closure of the tagged
/// tetrahedra) and the insulator subcomplex (closure of the rest, plus the
/// closure of the outer boundary). The conductor boundary is the set of
/// 2-cells with exactly one 3-cell coface in the conductor; faces on the
/// outer mesh boundary are excluded when `exclude_outer_boundary` is set.
pub fn split_regions(
    complex: Arc<CellComplex>,
    conductor_tags: &BTreeSet<i32>,
    exclude_outer_boundary: bool,
) -> Result<RegionSplit, MeshError> {
    if conductor_tags.is_empty() {
        return Err(MeshError::UnknownRegionTag { tag: 0 });
    }
    let present: BTreeSet<i32> = complex.regions().iter().copied().collect();
    for tag in conductor_tags {
        if !present.contains(tag) {
            return Err(MeshError::UnknownRegionTag { tag: *tag });
        }
    }

    let is_conductor = |t: u32| conductor_tags.contains(&complex.region(t));
    let k_c = Subcomplex::from_tets(complex.clone(), is_conductor);
    let mut k_a = Subcomplex::from_tets(complex.clone(), |t| !is_conductor(t));
    // the outer boundary always belongs to the insulating side
    let outer: Vec<u32> = (0..complex.face_count() as u32)
        .filter(|&f| complex.face_tets(f).len() == 1)
        .collect();
    k_a.add_face_closure(outer.iter().copied());

    let mut boundary_faces = Vec::new();
    for f in 0..complex.face_count() as u32 {
        let cofaces = complex.face_tets(f);
        let in_c = cofaces
            .as_slice()
            .iter()
            .filter(|s| is_conductor(s.id()))
            .count();
        if in_c != 1 {
            continue;
        }
        if exclude_outer_boundary && cofaces.len() == 1 {
            continue;
        }
        boundary_faces.push(f);
    }

    Ok(RegionSplit {
        conductor_tags: conductor_tags.clone(),
        k_c,
        k_a,
        boundary_faces,
        exclude_outer_boundary,
    })
}
