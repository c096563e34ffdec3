use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use contig::complex::{barycentric_subdivision, ordered_product};
use contig::contiguity::{verify_chain, verify_cover};
use contig::covering::CoverParams;
use contig::io::{
    chain_table, load_chain, load_complex, load_cover, read_json, write_json, ComplexFile, ComplexRef,
    CoverFile, LoadedComplex, MapSpec,
};
use contig::planner::{
    estimate_distance_subdivided, plan_path, plan_path_with_part, BarycentricPoint, PlannerSystem, Square,
    SubdivisionTower, DEFAULT_MAX_FACETS,
};
use contig::search::seeded_rng;
use contig::{Complex, SearchParams, SimplicialMap, Variant};

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "contig", version, about = "Randomized contiguity-distance bounds and motion planners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate simplicial complexity, LS-category or a contiguity distance
    Estimate {
        #[command(subcommand)]
        kind: EstimateKind,
    },
    /// Check a contiguity chain or a cover certificate
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
    /// Write an ordered product or an iterated barycentric subdivision
    Build {
        #[command(subcommand)]
        kind: BuildKind,
    },
    /// Evaluate the planner system of a cover of K × K at a pair of points
    Plan(PlanArgs),
    /// Print a chain as a tab-separated table, one row per map
    ExportTable {
        chain: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EstimateKind {
    /// Distance between the projections of K × K
    Sc {
        complex: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Distance between the axial inclusions K → K × K
    Cat {
        complex: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: u32,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Distance between two maps given in a cover file without parts
    Distance {
        maps: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Iterations per local search
    #[arg(long = "M", default_value_t = 1000)]
    m: usize,
    /// Probability of accepting a non-improving step
    #[arg(long = "r", default_value_t = 0.1)]
    r: f64,
    /// Optimization rounds
    #[arg(long = "N", default_value_t = 500)]
    n: usize,
    /// Stop once the cover has at most this many parts
    #[arg(long = "t", default_value_t = 2)]
    t: usize,
    /// Barycentric subdivisions of the domain
    #[arg(long, default_value_t = 0)]
    depth: usize,
    /// Seeds, e.g. `1,2,7` or `1..5`; a random seed when omitted
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_enum, default_value_t = VariantArg::Neighborhood)]
    variant: VariantArg,
    /// Wall-clock budget per seed, e.g. `90s`, `10m`
    #[arg(long, value_parser = humantime::parse_duration)]
    time_budget: Option<Duration>,
    /// Continue from the previous chain when enlarging a part
    #[arg(long)]
    warm_start: bool,
    /// Where to write the best cover
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the run reports (defaults next to --out)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Basic,
    Neighborhood,
}

#[derive(Subcommand)]
enum VerifyKind {
    /// Check consecutive contiguity, and the endpoints when given
    Chain {
        file: PathBuf,
        /// Expected first map (a map name or JSON array)
        #[arg(long)]
        start: Option<String>,
        /// Expected last map
        #[arg(long)]
        end: Option<String>,
    },
    Cover { file: PathBuf },
}

#[derive(Subcommand)]
enum BuildKind {
    Product {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Subdivide {
        complex: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PlanArgs {
    /// Cover of K × K for the projections
    #[arg(long)]
    system: PathBuf,
    /// Initial point: a vertex or `v:w,v:w,...`
    #[arg(long)]
    a: String,
    /// Final point
    #[arg(long)]
    b: String,
    /// Use this part instead of the lowest-index one containing (a, b)
    #[arg(long)]
    part: Option<usize>,
    /// Vertex coordinates `[[x, y, ...], ...]` indexed by label
    #[arg(long)]
    coords: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with a chosen exit status; anything else exits with 2.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn fail(code: u8, msg: impl Into<String>) -> anyhow::Error {
    Exit(code, msg.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let code = err.downcast_ref::<Exit>().map_or(EXIT_INPUT, |e| e.0);
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Estimate { kind } => estimate(kind),
        Command::Verify { kind } => verify(kind),
        Command::Build { kind } => build(kind),
        Command::Plan(args) => plan(args),
        Command::ExportTable { chain, out } => {
            let (chain, domain) = load_chain(&chain)?;
            emit(out.as_deref(), &chain_table(&chain, domain.codec))?;
            Ok(0)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn max_facets() -> anyhow::Result<u128> {
    match std::env::var("CONTIG_MAX_FACETS") {
        Ok(v) => v.trim().parse().with_context(|| format!("CONTIG_MAX_FACETS={v:?} is not a number")),
        Err(_) => Ok(DEFAULT_MAX_FACETS),
    }
}

fn parse_seeds(spec: Option<&str>) -> anyhow::Result<Vec<u64>> {
    let Some(spec) = spec else {
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_nanos();
        return Ok(vec![(nanos % 1_000_000_007) as u64]);
    };
    let mut seeds = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let (lo, hi): (u64, u64) = (lo.parse()?, hi.trim_start_matches('=').parse()?);
            if lo > hi {
                bail!("empty seed range {item}");
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(item.parse().with_context(|| format!("bad seed {item:?}"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn cover_params(run: &RunArgs, seed: u64) -> CoverParams {
    CoverParams {
        search: SearchParams {
            max_iterations: run.m,
            acceptance: run.r,
            variant: match run.variant {
                VariantArg::Basic => Variant::Basic,
                VariantArg::Neighborhood => Variant::Neighborhood,
            },
            seed,
        },
        max_rounds: run.n,
        target_parts: run.t,
        time_budget_ms: run.time_budget.map(|d| d.as_millis() as u64),
        warm_start: run.warm_start,
    }
}

/// What a cover file should record about the maps being compared.
struct Problem {
    start: SimplicialMap,
    end: SimplicialMap,
    domain: ComplexFile,
    codomain: ComplexFile,
    start_spec: MapSpec,
    end_spec: MapSpec,
}

fn product_file(square: &Square) -> ComplexFile {
    let factor = ComplexRef::inline(ComplexFile::from_complex(&square.base));
    ComplexFile::from_product(&square.product, square.codec, [factor.clone(), factor])
}

fn problem(kind: &EstimateKind) -> anyhow::Result<Problem> {
    Ok(match kind {
        EstimateKind::Sc { complex, .. } => {
            let k = load_complex(complex)?.complex;
            let square = Square::new(k.clone())?;
            let (start, end) = square.projections();
            Problem {
                start,
                end,
                domain: product_file(&square),
                codomain: ComplexFile::from_complex(&k),
                start_spec: MapSpec::Named("pi1".into()),
                end_spec: MapSpec::Named("pi2".into()),
            }
        }
        EstimateKind::Cat { complex, base, .. } => {
            let k = load_complex(complex)?.complex;
            let square = Square::new(k.clone())?;
            let (start, end) = square.axial_inclusions(*base)?;
            Problem {
                start,
                end,
                domain: ComplexFile::from_complex(&k),
                codomain: product_file(&square),
                start_spec: MapSpec::Named(format!("iota1:{base}")),
                end_spec: MapSpec::Named(format!("iota2:{base}")),
            }
        }
        EstimateKind::Distance { maps, .. } => {
            let file: CoverFile = read_json(maps)?;
            let loaded = file.resolve(maps.parent().unwrap_or(Path::new("")))?;
            Problem {
                domain: ComplexFile::from_complex(&loaded.domain.complex),
                codomain: ComplexFile::from_complex(&loaded.codomain.complex),
                start_spec: MapSpec::images_of(&loaded.start),
                end_spec: MapSpec::images_of(&loaded.end),
                start: loaded.start,
                end: loaded.end,
            }
        }
    })
}

#[derive(Serialize)]
struct SeedOutcome {
    seed: u64,
    parts: usize,
    bound: usize,
    verified: bool,
    report: contig::RunReport,
}

fn estimate(kind: EstimateKind) -> anyhow::Result<u8> {
    let run = match &kind {
        EstimateKind::Sc { run, .. } | EstimateKind::Cat { run, .. } | EstimateKind::Distance { run, .. } => run,
    };
    let seeds = parse_seeds(run.seeds.as_deref())?;
    cover_params(run, 0).validate()?;
    let mut problem = problem(&kind)?;
    let limit = max_facets()?;
    if run.depth > 0 {
        let tower = SubdivisionTower::build(problem.start.domain().clone(), run.depth, limit)?;
        let sd = tower.subdivision(run.depth);
        let base = ComplexRef::inline(ComplexFile::from_complex(tower.complex(run.depth - 1)));
        problem.domain = ComplexFile::from_subdivision(sd, base);
    }
    println!("seeds: {}", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));

    let results: Vec<anyhow::Result<(SeedOutcome, contig::CoverCertificate)>> = seeds
        .par_iter()
        .map(|&seed| {
            let params = cover_params(run, seed);
            let report =
                estimate_distance_subdivided(&problem.start, &problem.end, run.depth, limit, &params, &mut seeded_rng(seed))?;
            let verified = verify_cover(&report.certificate).is_ok();
            Ok((
                SeedOutcome {
                    seed,
                    parts: report.parts(),
                    bound: report.bound,
                    verified,
                    report: report.report,
                },
                report.certificate,
            ))
        })
        .collect();
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.push(r?);
    }
    for (o, cert) in &outcomes {
        println!(
            "seed {}: parts {} bound {} sizes {:?} rounds {} {} ms{}{}",
            o.seed,
            o.parts,
            o.bound,
            cert.part_sizes(),
            o.report.iterations_used,
            o.report.elapsed_ms,
            if o.report.budget_exhausted { " (budget exhausted)" } else { "" },
            if o.verified { "" } else { " UNVERIFIED" },
        );
    }

    let best = outcomes
        .iter()
        .filter(|(o, _)| o.verified)
        .min_by_key(|(o, _)| (o.parts, o.seed));
    let report_path = run.report.clone().or_else(|| run.out.as_ref().map(|p| p.with_extension("report.json")));
    if let Some(path) = &report_path {
        let reports: Vec<&SeedOutcome> = outcomes.iter().map(|(o, _)| o).collect();
        write_json(path, &reports)?;
    }
    let Some((best, cert)) = best else {
        return Err(fail(EXIT_FAILED, "no run produced a verified cover"));
    };
    println!("best: seed {} bound {} parts {:?}", best.seed, best.bound, cert.part_sizes());
    if let Some(out) = &run.out {
        let (start, end) = if run.depth == 0 {
            (problem.start_spec.clone(), problem.end_spec.clone())
        } else {
            (MapSpec::images_of(&cert.start), MapSpec::images_of(&cert.end))
        };
        let file = CoverFile::from_certificate(
            cert,
            ComplexRef::inline(problem.domain.clone()),
            ComplexRef::inline(problem.codomain.clone()),
            start,
            end,
        );
        write_json(out, &file)?;
    }
    if best.report.budget_exhausted && best.parts > run.t {
        eprintln!("time budget exhausted before reaching {} parts", run.t);
        return Ok(EXIT_BUDGET);
    }
    Ok(0)
}

fn resolve_spec(spec: &str, domain: &LoadedComplex, codomain: &LoadedComplex) -> anyhow::Result<SimplicialMap> {
    let spec: MapSpec = if spec.trim_start().starts_with('[') {
        MapSpec::Images(serde_json::from_str(spec).context("map array")?)
    } else {
        MapSpec::Named(spec.to_string())
    };
    Ok(spec.resolve(domain, codomain)?)
}

fn verify(kind: VerifyKind) -> anyhow::Result<u8> {
    let verdict = match kind {
        VerifyKind::Chain { file, start, end } => {
            let (chain, domain) = load_chain(&file)?;
            let codomain = LoadedComplex::plain(chain.codomain().clone());
            let start = match start {
                Some(s) => resolve_spec(&s, &domain, &codomain)?,
                None => chain.first().clone(),
            };
            let end = match end {
                Some(s) => resolve_spec(&s, &domain, &codomain)?,
                None => chain.last().clone(),
            };
            let verdict = verify_chain(&chain, &start, &end);
            if verdict.is_ok() {
                println!("ok: chain of length {}", chain.length());
            }
            verdict
        }
        VerifyKind::Cover { file } => {
            let cert = load_cover(&file)?.certificate();
            let verdict = verify_cover(&cert);
            if verdict.is_ok() {
                println!("ok: {} parts {:?}, bound {}", cert.parts.len(), cert.part_sizes(), cert.bound());
            }
            verdict
        }
    };
    if verdict.is_ok() {
        Ok(0)
    } else {
        eprintln!("verification failed:\n{verdict}");
        Ok(EXIT_FAILED)
    }
}

fn build(kind: BuildKind) -> anyhow::Result<u8> {
    match kind {
        BuildKind::Product { left, right, out } => {
            let (a, b) = (load_complex(&left)?.complex, load_complex(&right)?.complex);
            let (product, codec) = ordered_product(&a, &b);
            let refs = [
                ComplexRef::inline(ComplexFile::from_complex(&a)),
                ComplexRef::inline(ComplexFile::from_complex(&b)),
            ];
            write_json(&out, &ComplexFile::from_product(&product, codec, refs))?;
            println!("{} vertices, {} facets", product.num_vertices(), product.num_facets());
        }
        BuildKind::Subdivide { complex, depth, out } => {
            if depth == 0 {
                bail!("--depth must be at least 1");
            }
            let k = load_complex(&complex)?.complex;
            let tower = SubdivisionTower::build(k, depth - 1, max_facets()?)?;
            let below: &Arc<Complex> = tower.complex(depth - 1);
            let facets = contig::complex::subdivision_facet_count(below);
            let limit = max_facets()?;
            if facets > limit {
                return Err(contig::Error::ResourceLimit { facets, limit }.into());
            }
            let sd = barycentric_subdivision(below);
            let file = ComplexFile::from_subdivision(&sd, ComplexRef::inline(ComplexFile::from_complex(below)));
            write_json(&out, &file)?;
            println!("{} vertices, {} facets", sd.complex.num_vertices(), sd.complex.num_facets());
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct Waypoint {
    carrier: Vec<u32>,
    weights: Vec<f64>,
    exact: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<f64>>,
}

fn plan(args: PlanArgs) -> anyhow::Result<u8> {
    let cert = load_cover(&args.system)?.certificate();
    let sys = PlannerSystem::new(cert).map_err(|e| fail(EXIT_FAILED, e.to_string()))?;
    let a: BarycentricPoint = args.a.parse()?;
    let b: BarycentricPoint = args.b.parse()?;
    let planned = match args.part {
        Some(part) => plan_path_with_part(&sys, part, &a, &b),
        None => plan_path(&sys, &a, &b),
    };
    let path = match planned {
        Ok(path) => path,
        Err(e @ (contig::Error::NotCovered { .. } | contig::Error::Uncovered(_))) => {
            return Err(fail(EXIT_FAILED, e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let coords: Option<Vec<Vec<f64>>> = args.coords.as_deref().map(read_json).transpose()?;
    let waypoints = path
        .waypoints
        .iter()
        .map(|p| {
            let place = coords
                .as_ref()
                .map(|table| -> anyhow::Result<Vec<f64>> {
                    let mut acc: Vec<f64> = Vec::new();
                    for (&v, w) in p.carrier().vertices().iter().zip(p.weights_f64()) {
                        let row = table.get(v as usize).with_context(|| format!("no coordinates for vertex {v}"))?;
                        if acc.is_empty() {
                            acc = vec![0.0; row.len()];
                        }
                        if row.len() != acc.len() {
                            bail!("coordinate rows differ in length");
                        }
                        for (x, c) in acc.iter_mut().zip(row) {
                            *x += w * c;
                        }
                    }
                    Ok(acc)
                })
                .transpose()?;
            Ok(Waypoint {
                carrier: p.carrier().vertices().to_vec(),
                weights: p.weights_f64(),
                exact: p.weights().iter().map(ToString::to_string).collect(),
                coords: place,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    eprintln!("part {}, product carrier {}", path.part, path.product_point.carrier());
    let mut text = serde_json::to_string_pretty(&waypoints)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(0)
}
