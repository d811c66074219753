//! The genmesh, compute and oracle subcommands.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use num_traits::Signed;

use dsforge_core::basis::{build_linking_matrix, change_of_basis, BasisSelection};
use dsforge_core::complex::CellComplex;
use dsforge_core::ds::{run_ds, DsOutput, RunOptions};
use dsforge_core::dual::DualComplex;
use dsforge_core::error::Error;
use dsforge_core::mesh::generate::{generate_canonical, CanonicalShape};
use dsforge_core::mesh::{parse_mesh, split_regions, write_mesh, MeshFormat};
use dsforge_core::oracle::{
    betti_numbers, homology, pairing_matrix, verify_span, CellSelection, HomologyBasis,
};
use dsforge_core::report::{
    surface_debug_file, write_bytes, BasisCheckReport, GeneratorFile, RunReport,
    SpanCheckReport, VerificationReport,
};
use dsforge_core::snf::determinant;

use crate::EXIT_VERIFICATION_FAILURE;

pub type CmdResult = Result<u8, Box<dyn std::error::Error>>;

pub fn parse_shape(name: &str) -> Result<CanonicalShape, String> {
    CanonicalShape::from_name(name).ok_or_else(|| {
        let names: Vec<&str> = CanonicalShape::ALL.iter().map(|s| s.name()).collect();
        format!("unknown shape {name:?}; expected one of {}", names.join(", "))
    })
}

fn parse_format(name: &str) -> Result<MeshFormat, String> {
    match name {
        "gmsh" | "msh" => Ok(MeshFormat::GmshV2Ascii),
        "tetgen" | "node-ele" => Ok(MeshFormat::TetgenNodeEle),
        other => Err(format!("unknown format {other:?}; expected gmsh or tetgen")),
    }
}

#[derive(Args)]
pub struct GenmeshArgs {
    /// solid-torus-in-box | hopf-link-in-box | trefoil-tube-in-box |
    /// genus2-handlebody-in-box
    #[arg(long, value_parser = parse_shape)]
    pub shape: CanonicalShape,
    /// refinement level, >= 1; tetrahedron count grows 8x per step
    #[arg(long, default_value_t = 1)]
    pub refine: u32,
    /// output path (.msh, or .node/.ele base for --format tetgen)
    #[arg(long)]
    pub out: PathBuf,
    /// gmsh (MSH 2.2 ASCII) or tetgen (.node/.ele)
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MeshFormat>,
}

pub fn cmd_genmesh(args: &GenmeshArgs) -> CmdResult {
    if args.refine == 0 {
        return Err("refinement must be at least 1".into());
    }
    let format = args
        .format
        .or_else(|| MeshFormat::from_path(&args.out))
        .unwrap_or(MeshFormat::GmshV2Ascii);
    let mesh = generate_canonical(args.shape, args.refine);
    write_mesh(&mesh, &args.out, format)?;
    println!(
        "wrote {} ({} vertices, {} tetrahedra, conductor tags {:?})",
        args.out.display(),
        mesh.vertices.len(),
        mesh.tets.len(),
        args.shape.conductor_tags()
    );
    Ok(0)
}

fn load_complex(path: &Path, format: Option<MeshFormat>) -> Result<Arc<CellComplex>, Box<dyn std::error::Error>> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or("cannot infer mesh format from extension; pass --format")?;
    let mesh = parse_mesh(path, format)?;
    Ok(Arc::new(mesh.build_complex()?))
}

fn parse_regions(list: &str) -> Result<BTreeSet<i32>, Box<dyn std::error::Error>> {
    let mut tags = BTreeSet::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        tags.insert(part.parse::<i32>().map_err(|_| format!("bad region tag {part:?}"))?);
    }
    if tags.is_empty() {
        return Err("no conductor region tags given".into());
    }
    Ok(tags)
}

fn thread_count(cli_threads: Option<usize>) -> Option<usize> {
    if let Ok(env) = std::env::var("DSFORGE_THREADS") {
        if let Ok(n) = env.parse::<usize>() {
            return Some(n);
        }
    }
    cli_threads
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match threads {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(job),
    }
}

#[derive(Args)]
pub struct ComputeArgs {
    /// input mesh path
    #[arg(long)]
    pub mesh: PathBuf,
    /// gmsh or tetgen; inferred from the extension when omitted
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MeshFormat>,
    /// comma-separated conductor region tags
    #[arg(long = "conductor-regions")]
    pub conductor_regions: String,
    /// generator output path
    #[arg(long, default_value = "generators.json")]
    pub out: PathBuf,
    /// run report path (defaults to <out>.report.json)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// verify the output against the exact homology oracle
    #[arg(long)]
    pub verify: bool,
    /// extract a true cohomology basis via linking numbers
    #[arg(long = "true-basis")]
    pub true_basis: bool,
    /// write the generator file in the binary DSH1 format
    #[arg(long)]
    pub binary: bool,
    /// keep conductor faces on the outer mesh boundary in the surface
    #[arg(long = "include-outer-boundary")]
    pub include_outer_boundary: bool,
    /// write tree-cotree debug JSON to this path
    #[arg(long = "debug-surface")]
    pub debug_surface: Option<PathBuf>,
    /// worker threads for component-level parallelism
    #[arg(long)]
    pub threads: Option<usize>,
    /// skip oracle checks above this many total cells
    #[arg(long = "oracle-cap", default_value_t = 50_000)]
    pub oracle_cap: usize,
}

pub fn cmd_compute(args: &ComputeArgs) -> CmdResult {
    let complex = load_complex(&args.mesh, args.format)?;
    let tags = parse_regions(&args.conductor_regions)?;
    let split = split_regions(complex.clone(), &tags, !args.include_outer_boundary)?;

    let options = RunOptions {
        validate: args.verify,
        keep_full: false,
        debug_surface: args.debug_surface.is_some(),
    };
    let threads = thread_count(args.threads);
    let out: Result<DsOutput, Error> = in_pool(threads, || run_ds(&split, &options));
    let out = out?;

    let mut report = RunReport::new(&complex, &out);
    let mut exit = 0u8;
    let mut verification = VerificationReport::default();
    let mut oracle_basis: Option<HomologyBasis> = None;

    if args.verify {
        if complex.total_cells() > args.oracle_cap {
            let note = format!(
                "oracle disabled: {} cells exceed the cap of {} (raise with --oracle-cap)",
                complex.total_cells(),
                args.oracle_cap
            );
            eprintln!("{note}");
            verification.warnings.push(note);
        } else {
            let whole = CellSelection::whole(&complex);
            let betti = betti_numbers(&complex, &whole);
            if betti[1] != 0 || betti[2] != 0 {
                let note = format!(
                    "mesh is not topologically trivial (beta = {betti:?}); results carry no guarantee"
                );
                eprintln!("warning: {note}");
                verification.warnings.push(note);
            }
            let sel = CellSelection::from_subcomplex(&split.k_a);
            let h1 = homology(&complex, &sel, 1);
            verification.beta1 = Some(h1.betti);
            let span = verify_span(&out.lazy.lane_cochains(), &h1);
            verification.span = Some(SpanCheckReport {
                factors: span.factors.iter().map(|f| f.to_string()).collect(),
                lanes: span.lanes,
                pass: span.pass,
                rank: span.rank,
            });
            if !span.pass {
                exit = EXIT_VERIFICATION_FAILURE;
            }
            oracle_basis = Some(h1);
        }
    }

    let basis_selection: Option<BasisSelection> = if args.true_basis {
        let dual = DualComplex::build(complex.clone())?;
        let link = build_linking_matrix(&dual, &split, &out.surface_sets, &out.thinned)?;
        let selection = change_of_basis(&out.lazy, &link)?;
        if let Some(h1) = &oracle_basis {
            let rank_ok = selection.require_rank(h1.betti);
            let gens = selection.combined_generators(&out.lazy);
            let p = pairing_matrix(&gens, h1);
            let det = determinant(&p);
            let pass = rank_ok.is_ok() && det.abs() == 1.into();
            if let Err(e) = &rank_ok {
                eprintln!("verification: {e}");
            }
            verification.basis = Some(BasisCheckReport {
                pairing_determinant: det.to_string(),
                pass,
                rank: selection.rank,
            });
            if !pass {
                exit = EXIT_VERIFICATION_FAILURE;
            }
        }
        Some(selection)
    } else {
        None
    };

    if args.verify || verification.basis.is_some() || !verification.warnings.is_empty() {
        report.verification = Some(verification);
    }

    let file = GeneratorFile::from_lazy(
        &out.lazy,
        basis_selection.as_ref().map(|sel| (sel, &out.lazy)),
    );
    if args.binary {
        write_bytes(&args.out, &file.to_binary())?;
    } else {
        write_bytes(&args.out, file.to_json().as_bytes())?;
    }

    if let Some(path) = &args.debug_surface {
        if let Some(debug) = surface_debug_file(&out) {
            let mut text = serde_json::to_string_pretty(&debug)?;
            text.push('\n');
            write_bytes(path, text.as_bytes())?;
        }
    }

    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| default_report_path(&args.out));
    write_bytes(&report_path, report.to_json().as_bytes())?;

    println!(
        "{} lazy lanes across {} components; wrote {} and {}",
        out.lazy.count(),
        out.components.len(),
        args.out.display(),
        report_path.display()
    );
    Ok(exit)
}

fn default_report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    out.with_file_name(format!("{stem}.report.json"))
}

#[derive(Args)]
pub struct OracleArgs {
    /// input mesh path
    #[arg(long)]
    pub mesh: PathBuf,
    /// gmsh or tetgen; inferred from the extension when omitted
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MeshFormat>,
    /// comma-separated conductor region tags
    #[arg(long = "conductor-regions")]
    pub conductor_regions: String,
    /// generator file to verify (JSON or DSH1 binary)
    #[arg(long)]
    pub check: PathBuf,
    /// verification report output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_oracle(args: &OracleArgs) -> CmdResult {
    let complex = load_complex(&args.mesh, args.format)?;
    let tags = parse_regions(&args.conductor_regions)?;
    let split = split_regions(complex.clone(), &tags, true)?;

    let data = std::fs::read(&args.check)?;
    let file = GeneratorFile::from_bytes(&data)?;

    let mut verification = VerificationReport::default();
    let whole = CellSelection::whole(&complex);
    let betti = betti_numbers(&complex, &whole);
    if betti[1] != 0 || betti[2] != 0 {
        verification
            .warnings
            .push(format!("mesh is not topologically trivial (beta = {betti:?})"));
    }

    let sel = CellSelection::from_subcomplex(&split.k_a);
    let h1 = homology(&complex, &sel, 1);
    verification.beta1 = Some(h1.betti);

    let lanes = file.lane_cochains();
    let span = verify_span(&lanes, &h1);
    let mut pass = span.pass;
    verification.span = Some(SpanCheckReport {
        factors: span.factors.iter().map(|f| f.to_string()).collect(),
        lanes: span.lanes,
        pass: span.pass,
        rank: span.rank,
    });

    let basis = file.basis_cochains();
    if !basis.is_empty() {
        let p = pairing_matrix(&basis, &h1);
        let det = determinant(&p);
        let basis_pass = basis.len() == h1.betti && det.abs() == 1.into();
        pass &= basis_pass;
        verification.basis = Some(BasisCheckReport {
            pairing_determinant: det.to_string(),
            pass: basis_pass,
            rank: basis.len(),
        });
    }

    let mut text = serde_json::to_string_pretty(&verification)?;
    text.push('\n');
    match &args.out {
        Some(path) => write_bytes(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(if pass { 0 } else { EXIT_VERIFICATION_FAILURE })
}
