//! Machine-readable outputs: the generator file (JSON and binary) and the
//! run/verification reports.
//!
//! Generator files are reproducible byte for byte: keys are emitted in
//! sorted order, support maps iterate in edge order, and no floating-point
//! values appear. Reports carry timings and may contain floats.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::basis::BasisSelection;
use crate::complex::{CellComplex, Cochain};
use crate::ds::{DsOutput, LazyGeneratorSet};

/// One lazy generator lane: provenance plus sparse support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneRecord {
    pub closing_edge: u64,
    pub component: u64,
    pub support: Vec<(u64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisGenerator {
    pub support: Vec<(u64, i64)>,
}

/// The optional true-basis section: how the basis combines lazy lanes, and
/// the combined generators themselves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSection {
    pub combination: Vec<Vec<i64>>,
    pub generators: Vec<BasisGenerator>,
}

/// The generator file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSection>,
    pub lanes: Vec<LaneRecord>,
}

fn support_of(c: &Cochain) -> Vec<(u64, i64)> {
    c.values
        .iter()
        .map(|(&cell, vals)| (cell as u64, vals[0]))
        .collect()
}

impl GeneratorFile {
    pub fn from_lazy(lazy: &LazyGeneratorSet, basis: Option<(&BasisSelection, &LazyGeneratorSet)>) -> GeneratorFile {
        let lanes = lazy
            .lane_cochains()
            .iter()
            .zip(&lazy.provenance)
            .map(|(c, &(component, closing_edge))| LaneRecord {
                closing_edge: closing_edge as u64,
                component: component as u64,
                support: support_of(c),
            })
            .collect();
        let basis = basis.map(|(sel, lazy)| BasisSection {
            combination: sel.combination.clone(),
            generators: sel
                .combined_generators(lazy)
                .iter()
                .map(|g| BasisGenerator {
                    support: support_of(g),
                })
                .collect(),
        });
        GeneratorFile { basis, lanes }
    }

    /// Canonical JSON rendering: sorted keys, integers only, one trailing
    /// newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<GeneratorFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Binary rendering: magic `DSH1`, little-endian u64 counts and i64
    /// pairs.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"DSH1");
        push_u64(&mut out, self.lanes.len() as u64);
        for lane in &self.lanes {
            push_u64(&mut out, lane.component);
            push_u64(&mut out, lane.closing_edge);
            push_u64(&mut out, lane.support.len() as u64);
            for &(e, c) in &lane.support {
                push_i64(&mut out, e as i64);
                push_i64(&mut out, c);
            }
        }
        match &self.basis {
            None => push_u64(&mut out, 0),
            Some(b) => {
                push_u64(&mut out, b.generators.len() as u64);
                for (row, gen) in b.combination.iter().zip(&b.generators) {
                    push_u64(&mut out, row.len() as u64);
                    for &v in row {
                        push_i64(&mut out, v);
                    }
                    push_u64(&mut out, gen.support.len() as u64);
                    for &(e, c) in &gen.support {
                        push_i64(&mut out, e as i64);
                        push_i64(&mut out, c);
                    }
                }
            }
        }
        out
    }

    pub fn from_binary(mut data: &[u8]) -> io::Result<GeneratorFile> {
        let mut magic = [0u8; 4];
        data.read_exact(&mut magic)?;
        if &magic != b"DSH1" {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
        }
        let n_lanes = read_u64(&mut data)?;
        let mut lanes = Vec::with_capacity(n_lanes as usize);
        for _ in 0..n_lanes {
            let component = read_u64(&mut data)?;
            let closing_edge = read_u64(&mut data)?;
            let n = read_u64(&mut data)?;
            let mut support = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let e = read_i64(&mut data)?;
                let c = read_i64(&mut data)?;
                support.push((e as u64, c));
            }
            lanes.push(LaneRecord {
                closing_edge,
                component,
                support,
            });
        }
        let n_basis = read_u64(&mut data)?;
        let basis = if n_basis == 0 {
            None
        } else {
            let mut combination = Vec::with_capacity(n_basis as usize);
            let mut generators = Vec::with_capacity(n_basis as usize);
            for _ in 0..n_basis {
                let w = read_u64(&mut data)?;
                let mut row = Vec::with_capacity(w as usize);
                for _ in 0..w {
                    row.push(read_i64(&mut data)?);
                }
                combination.push(row);
                let n = read_u64(&mut data)?;
                let mut support = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let e = read_i64(&mut data)?;
                    let c = read_i64(&mut data)?;
                    support.push((e as u64, c));
                }
                generators.push(BasisGenerator { support });
            }
            Some(BasisSection {
                combination,
                generators,
            })
        };
        Ok(GeneratorFile { basis, lanes })
    }

    /// Parse either rendering, sniffing the binary magic.
    pub fn from_bytes(data: &[u8]) -> io::Result<GeneratorFile> {
        if data.starts_with(b"DSH1") {
            GeneratorFile::from_binary(data)
        } else {
            let text = std::str::from_utf8(data)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            GeneratorFile::from_json(text)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
        }
    }

    /// Rebuild the lanes as single-lane cochains for verification.
    pub fn lane_cochains(&self) -> Vec<Cochain> {
        self.lanes
            .iter()
            .map(|lane| {
                Cochain::from_lane_entries(
                    1,
                    lane.support.iter().map(|&(e, c)| (e as u32, c)),
                )
            })
            .collect()
    }

    /// Rebuild the combined basis generators, when present.
    pub fn basis_cochains(&self) -> Vec<Cochain> {
        self.basis
            .as_ref()
            .map(|b| {
                b.generators
                    .iter()
                    .map(|g| {
                        Cochain::from_lane_entries(
                            1,
                            g.support.iter().map(|&(e, c)| (e as u32, c)),
                        )
                    })
                    .collect()
            })
            .unwrap_or_default()
    }
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}
fn push_i64(out: &mut Vec<u8>, v: i64) {
    out.extend_from_slice(&v.to_le_bytes());
}
fn read_u64(data: &mut &[u8]) -> io::Result<u64> {
    let mut b = [0u8; 8];
    data.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
fn read_i64(data: &mut &[u8]) -> io::Result<i64> {
    let mut b = [0u8; 8];
    data.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

/// Cell counts per dimension.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CellStats {
    pub edges: usize,
    pub faces: usize,
    pub tets: usize,
    pub vertices: usize,
}

impl CellStats {
    pub fn of(complex: &CellComplex) -> CellStats {
        CellStats {
            edges: complex.edge_count(),
            faces: complex.face_count(),
            tets: complex.tet_count(),
            vertices: complex.vertex_count(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentReport {
    pub faces: usize,
    pub genus: usize,
    pub lanes: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TimingsReport {
    pub extend_ms: f64,
    pub extract_ms: f64,
    pub surface_ms: f64,
    pub thin_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanCheckReport {
    pub factors: Vec<String>,
    pub lanes: usize,
    pub pass: bool,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisCheckReport {
    pub pairing_determinant: String,
    pub pass: bool,
    pub rank: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisCheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SpanCheckReport>,
    pub warnings: Vec<String>,
}

/// The per-run report written next to the generator file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub cells: CellStats,
    pub components: Vec<ComponentReport>,
    pub fallback_edges: usize,
    pub lazy_lanes: usize,
    pub timings: TimingsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl RunReport {
    pub fn new(complex: &CellComplex, out: &DsOutput) -> RunReport {
        RunReport {
            cells: CellStats::of(complex),
            components: out
                .components
                .iter()
                .map(|c| ComponentReport {
                    faces: c.faces,
                    genus: c.genus,
                    lanes: c.lanes,
                })
                .collect(),
            fallback_edges: out.fallback_edges,
            lazy_lanes: out.lazy.count(),
            timings: TimingsReport {
                extend_ms: out.timings.extend_ms,
                extract_ms: out.timings.extract_ms,
                surface_ms: out.timings.surface_ms,
                thin_ms: out.timings.thin_ms,
                total_ms: out.timings.total_ms,
            },
            verification: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Debug export of the tree-cotree data, keyed by global edge ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceDebugFile {
    pub components: Vec<SurfaceDebugRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceDebugRecord {
    pub cotree: Vec<u64>,
    pub generators: Vec<LaneRecord>,
    pub leftover: Vec<u64>,
    pub tree: Vec<u64>,
}

pub fn surface_debug_file(out: &DsOutput) -> Option<SurfaceDebugFile> {
    let debug = out.debug.as_ref()?;
    let mut components = Vec::with_capacity(debug.len());
    for (d, set) in debug.iter().zip(&out.surface_sets) {
        let generators = (0..set.lanes())
            .map(|lane| LaneRecord {
                closing_edge: set.closing_edges[lane] as u64,
                component: set.component as u64,
                support: support_of(&set.cocycles.lane(lane)),
            })
            .collect();
        components.push(SurfaceDebugRecord {
            cotree: d.cotree_edges.iter().map(|&e| e as u64).collect(),
            generators,
            leftover: d.leftover_edges.iter().map(|&e| e as u64).collect(),
            tree: d.tree_edges.iter().map(|&e| e as u64).collect(),
        });
    }
    Some(SurfaceDebugFile { components })
}

/// Write a file atomically enough for our purposes.
pub fn write_bytes(path: &std::path::Path, data: &[u8]) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(data)
}
