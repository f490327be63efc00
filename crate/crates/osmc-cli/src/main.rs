//! `osmc`: generate instances, build and query compressed encodings, and
//! verify the structural properties they rely on.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on I/O
//! or format errors.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use osmc_core::encoding::{build_encoding, deserialize, serialize, size_report, ModeRequest};
use osmc_core::generate::{
    gen_cycle, gen_grid, gen_halin, gen_random_planar, gen_shalin_lower, TerminalPolicy,
};
use osmc_core::instance::{load_osg, save_osg, OSInstance};
use osmc_core::verify::{
    baseline_sizes, loglog_slope, probe_instance, verify_instance, ProbeRow, VerifyOptions,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "osmc", version, about = "Source-face distance compression for planar graphs")]
struct Cli {
    /// Seed for anything randomized (generation, sampling, hashing).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Machine-readable JSON output where supported.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a generated instance as a `.osg` file.
    Generate(GenerateArgs),
    /// Build an encoding from a `.osg` instance.
    Compress(CompressArgs),
    /// Query one terminal-to-source distance from an encoding.
    Query(QueryArgs),
    /// Run every structural property suite against an instance.
    Verify(VerifyArgs),
    /// Per-instance pattern statistics as CSV.
    Analyze(AnalyzeArgs),
    /// Sweep a family and record distinct-pattern growth as CSV.
    Probe(ProbeArgs),
    /// Compare encoding size against the naive schemes.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cycle,
    Grid,
    RandomPlanar,
    Halin,
    ShalinLower,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Grid => "grid",
            Family::RandomPlanar => "random-planar",
            Family::Halin => "halin",
            Family::ShalinLower => "shalin-lower",
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Source-face size (cycle, shalin-lower).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    /// Leaf count (halin).
    #[arg(long)]
    leaves: Option<usize>,
    /// Interior edge deletion rate (random-planar).
    #[arg(long, default_value_t = 0.3)]
    rate: f64,
    /// all | boundary | `random:<fraction>` | `blob:<fraction>`
    #[arg(long, default_value = "all")]
    terminals: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    enc: PathBuf,
    #[arg(long)]
    terminal: u32,
    /// 1-based source index.
    #[arg(long)]
    source: usize,
    /// Interpret --source over the subdivided source cycle (midpoints
    /// included) and return subdivided hop counts.
    #[arg(long)]
    include_midpoints: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Additive slack over k/2 for the pairwise crossing bound.
    #[arg(long, default_value_t = 2.0)]
    crossing_slack: f64,
    /// Sampled (u, i) pairs for the containment checks.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Cap on enumerated bisector pairs.
    #[arg(long)]
    pair_cap: Option<usize>,
    /// Column-subset budget for the shattering checks before sampling.
    #[arg(long, default_value_t = 200_000)]
    shatter_budget: u64,
    /// Skip the quadratic crossing suites.
    #[arg(long)]
    no_crossings: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Instance files.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Emit the crossing-focused schema instead of the pattern one.
    #[arg(long)]
    crossings: bool,
    #[arg(long, default_value_t = 2.0)]
    crossing_slack: f64,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Comma-separated k values, e.g. 8,16,32,64.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    /// Skip crossing enumeration (cheaper sweeps).
    #[arg(long)]
    no_crossings: bool,
    #[arg(long)]
    pair_cap: Option<usize>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

fn parse_policy(s: &str) -> anyhow::Result<TerminalPolicy> {
    if s == "all" {
        return Ok(TerminalPolicy::All);
    }
    if s == "boundary" {
        return Ok(TerminalPolicy::Boundary);
    }
    if let Some(f) = s.strip_prefix("random:") {
        return Ok(TerminalPolicy::RandomFraction(f.parse()?));
    }
    if let Some(f) = s.strip_prefix("blob:") {
        return Ok(TerminalPolicy::ConnectedBlob(f.parse()?));
    }
    bail!("unknown terminal policy {s:?} (all | boundary | random:<f> | blob:<f>)")
}

fn generate_instance(family: Family, args: &GenerateArgs, seed: u64) -> anyhow::Result<OSInstance> {
    let policy = parse_policy(&args.terminals)?;
    Ok(match family {
        Family::Cycle => {
            let k = args.k.context("--k required for cycle")?;
            let mut inst = gen_cycle(k);
            apply_policy(&mut inst, policy, seed);
            inst
        }
        Family::Grid => {
            let w = args.w.context("--w required for grid")?;
            let h = args.h.context("--h required for grid")?;
            gen_grid(w, h, policy, seed)
        }
        Family::RandomPlanar => {
            let w = args.w.context("--w required for random-planar")?;
            let h = args.h.context("--h required for random-planar")?;
            gen_random_planar(seed, w, h, args.rate, policy)
        }
        Family::Halin => {
            let leaves = args.leaves.context("--leaves required for halin")?;
            gen_halin(seed, leaves, policy)
        }
        Family::ShalinLower => {
            let k = args.k.context("--k required for shalin-lower")?;
            gen_shalin_lower(k, policy)?
        }
    })
}

/// Re-apply a terminal policy to an already built instance (cycle only).
fn apply_policy(inst: &mut OSInstance, policy: TerminalPolicy, _seed: u64) {
    match policy {
        TerminalPolicy::All => {
            inst.terminals = (0..inst.graph.n() as u32).collect();
        }
        TerminalPolicy::Boundary => {
            let mut t = inst.sources.clone();
            t.sort_unstable();
            inst.terminals = t;
        }
        _ => {}
    }
}

fn probe_family(family: Family, args: &ProbeArgs, seed: u64) -> anyhow::Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for &k in &args.k {
        for s in 0..args.samples {
            let sample_seed = seed.wrapping_add(s);
            let inst = match family {
                Family::Cycle => gen_cycle(k),
                Family::Grid => {
                    let side = (k + 4).div_ceil(4).max(2);
                    gen_grid(side, side, TerminalPolicy::All, sample_seed)
                }
                Family::RandomPlanar => {
                    let side = (k + 4).div_ceil(4).max(2);
                    gen_random_planar(sample_seed, side, side, 0.3, TerminalPolicy::All)
                }
                Family::Halin => gen_halin(sample_seed, k, TerminalPolicy::All),
                Family::ShalinLower => gen_shalin_lower(k, TerminalPolicy::All)?,
            };
            let id = format!("{}-k{}-s{}", family.name(), inst.k(), sample_seed);
            rows.push(probe_instance(
                &id,
                family.name(),
                &inst,
                !args.no_crossings,
                args.pair_cap,
                sample_seed,
            )?);
        }
    }
    Ok(rows)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }

    match &cli.command {
        Command::Generate(args) => {
            let inst = generate_instance(args.family, args, cli.seed)?;
            save_osg(&inst, &args.out)?;
            eprintln!(
                "wrote {} (n = {}, m = {}, k = {}, |T| = {})",
                args.out.display(),
                inst.graph.n(),
                inst.graph.m(),
                inst.k(),
                inst.terminals.len()
            );
        }
        Command::Compress(args) => {
            let inst = load_osg(&args.input)?;
            let mode = match args.mode.as_str() {
                "auto" => ModeRequest::Auto,
                "general" => ModeRequest::General,
                "connected" => ModeRequest::ConnectedT,
                "face" => ModeRequest::SingleFaceT,
                other => bail!("unknown mode {other:?} (auto | general | connected | face)"),
            };
            let enc = build_encoding(&inst, mode, cli.seed)?;
            let report = size_report(&enc);
            std::fs::write(&args.out, serialize(&enc))?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "mode": format!("{:?}", enc.mode),
                        "k": enc.k,
                        "x": enc.x,
                        "terminals": enc.terminals.len(),
                        "words": report.total(),
                        "size": report,
                    })
                );
            } else {
                eprintln!(
                    "wrote {} ({:?}, {} words: {} index, {} versions, {} terminals)",
                    args.out.display(),
                    enc.mode,
                    report.total(),
                    report.index_node_words,
                    report.version_words,
                    report.terminal_words
                );
            }
        }
        Command::Query(args) => {
            let bytes = std::fs::read(&args.enc)?;
            let enc = deserialize(&bytes)?;
            let d = if args.include_midpoints {
                enc.query_subdivided(args.terminal, args.source)?
            } else {
                enc.query(args.terminal, args.source)?
            };
            println!("{d}");
        }
        Command::Verify(args) => {
            let inst = load_osg(&args.input)?;
            let opts = VerifyOptions {
                crossing_slack: args.crossing_slack,
                containment_samples: args.samples,
                pair_cap: args.pair_cap,
                shatter_budget: args.shatter_budget,
                crossings: !args.no_crossings,
                seed: cli.seed,
                ..VerifyOptions::default()
            };
            let label = args.input.display().to_string();
            let report = verify_instance(&inst, &label, &opts);
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for c in &report.checks {
                    println!(
                        "{} {:<32} {}",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
                println!(
                    "x = {}, x_ternary = {}, t = {:?}, max_r = {:?}, words = {:?}",
                    report.metrics.x,
                    report.metrics.x_ternary,
                    report.metrics.crossings_total,
                    report.metrics.max_r,
                    report.metrics.encoding_words
                );
            }
            if !report.ok {
                return Ok(1);
            }
        }
        Command::Analyze(args) => {
            if args.crossings {
                println!("instance_id,k,t,max_r,k_over_2_plus_slack_ok,x,2t_plus_2k,x_over_k2,x_over_k3");
            } else {
                println!("instance_id,n,m,k,|T|,x,max_pattern_class_size");
            }
            for path in &args.inputs {
                let inst = load_osg(path)?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                if args.crossings {
                    let row = probe_instance(&id, "file", &inst, true, None, cli.seed)?;
                    let ok = (row.max_r as f64) <= inst.k() as f64 / 2.0 + args.crossing_slack;
                    println!(
                        "{},{},{},{},{},{},{},{:.6},{:.6}",
                        id,
                        row.k,
                        row.t,
                        row.max_r,
                        ok,
                        row.x,
                        2 * row.t as usize + 2 * row.k,
                        row.x_over_k2,
                        row.x_over_k3
                    );
                } else {
                    let sub = osmc_core::instance::subdivide(&inst)?;
                    let pats = osmc_core::pattern::compute_binary_patterns(&sub)?;
                    let d = osmc_core::pattern::distinct_patterns(&pats);
                    println!(
                        "{},{},{},{},{},{},{}",
                        id,
                        inst.graph.n(),
                        inst.graph.m(),
                        inst.k(),
                        inst.terminals.len(),
                        d.count,
                        d.max_class_size
                    );
                }
            }
        }
        Command::Probe(args) => {
            let rows = probe_family(args.family, args, cli.seed)?;
            println!("instance_id,family,n,m,k,x,t,max_r,x_over_k2,x_over_k3");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{},{},{:.6},{:.6}",
                    r.instance_id,
                    r.family,
                    r.n,
                    r.m,
                    r.k,
                    r.x,
                    r.t,
                    r.max_r,
                    r.x_over_k2,
                    r.x_over_k3
                );
            }
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, r.x as f64)).collect();
            println!("# loglog_slope_x_vs_k,{:.4}", loglog_slope(&pts));
        }
        Command::Baseline(args) => {
            let inst = load_osg(&args.input)?;
            let rep = baseline_sizes(&inst, cli.seed)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                println!("scheme,words");
                println!("full_matrix,{}", rep.naive_matrix_words);
                println!("pattern_tables,{}", rep.pattern_table_words);
                println!("encoding_{},{}", rep.encoding_mode.to_lowercase(), rep.encoding_words);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
