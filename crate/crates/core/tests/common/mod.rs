//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset
#![allow(clippy::type_complexity)]

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use dsforge_core::basis::DualCycle;
use dsforge_core::complex::CellComplex;
use dsforge_core::geometry::point_to_f64;
use dsforge_core::mesh::generate::{generate_canonical, CanonicalShape};
use dsforge_core::mesh::{split_regions, RegionSplit};

/// A generated canonical mesh with its complex and region split.
pub struct Fixture {
    pub shape: CanonicalShape,
    pub refinement: u32,
    pub complex: Arc<CellComplex>,
    pub split: RegionSplit,
}

static CACHE: OnceLock<Mutex<BTreeMap<(&'static str, u32), Arc<Fixture>>>> = OnceLock::new();

/// Build (once per process) the canonical fixture for a shape/refinement.
pub fn fixture(shape: CanonicalShape, refinement: u32) -> Arc<Fixture> {
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let key = (shape.name(), refinement);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let mesh = generate_canonical(shape, refinement);
    let complex = Arc::new(mesh.build_complex().expect("canonical meshes build"));
    let split = split_regions(complex.clone(), &shape.conductor_tags(), true)
        .expect("canonical split");
    let fx = Arc::new(Fixture {
        shape,
        refinement,
        complex,
        split,
    });
    cache.lock().unwrap().insert(key, fx.clone());
    fx
}

/// Numeric Gauss linking number: a double sum over quadrature points on one
/// curve and analytically integrated straight segments of the other. This
/// route never looks at crossings, so it is an independent check of the
/// exact projection count.
pub fn gauss_linking_numeric(a: &DualCycle, b: &DualCycle) -> f64 {
    let pa: Vec<[f64; 3]> = a.polyline.iter().map(point_to_f64).collect();
    let pb: Vec<[f64; 3]> = b.polyline.iter().map(point_to_f64).collect();
    let mut m = 4usize;
    let mut prev = f64::NAN;
    loop {
        let value = circulation(&pa, &pb, m) / (4.0 * std::f64::consts::PI);
        if (value - prev).abs() < 5e-3 || m >= 1024 {
            return value;
        }
        prev = value;
        m *= 2;
    }
}

/// Midpoint-rule circulation of the segment-summed field of `b` along `a`.
fn circulation(a: &[[f64; 3]], b: &[[f64; 3]], m: usize) -> f64 {
    let mut total = 0.0;
    for seg in a.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        let dl = [
            (q[0] - p[0]) / m as f64,
            (q[1] - p[1]) / m as f64,
            (q[2] - p[2]) / m as f64,
        ];
        for i in 0..m {
            let s = (i as f64 + 0.5) / m as f64;
            let x = [
                p[0] + s * (q[0] - p[0]),
                p[1] + s * (q[1] - p[1]),
                p[2] + s * (q[2] - p[2]),
            ];
            let field = segment_field_sum(b, x);
            total += field[0] * dl[0] + field[1] * dl[1] + field[2] * dl[2];
        }
    }
    total
}

/// Field of unit current along the closed polyline `b`, evaluated at `x`;
/// each straight segment contributes its closed-form integral.
fn segment_field_sum(b: &[[f64; 3]], x: [f64; 3]) -> [f64; 3] {
    let mut field = [0.0; 3];
    for seg in b.windows(2) {
        let r1 = sub(x, seg[0]);
        let r2 = sub(x, seg[1]);
        let n1 = norm(r1);
        let n2 = norm(r2);
        let denom = n1 * n2 * (n1 * n2 + dot(r1, r2));
        if denom.abs() < 1e-300 {
            continue; // on the segment line; quadrature points avoid this
        }
        let scale = (n1 + n2) / denom;
        let c = cross(r1, r2);
        field[0] += scale * c[0];
        field[1] += scale * c[1];
        field[2] += scale * c[2];
    }
    field
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
