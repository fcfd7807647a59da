//! `cnds`: builds transition graphs and writes decomposition artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use conley_nds::config::RunConfig;
use conley_nds::conley::chain_exists;
use conley_nds::lyapunov::{lyapunov_trace, OrbitSettings};
use conley_nds::oracle::run_oracle_suite;
use conley_nds::pipeline::{
    build_map, conley_summary, decompose, fiber_boxes, lyapunov_field, run_pullback, write_condensation_dot, write_nodes_csv,
    write_pullback_csv,
};
use conley_nds::transition::{load_graph, save_graph, TransitionGraph};
use conley_nds::{Error, Result};

#[derive(Parser)]
#[command(name = "cnds", version, about = "Chain recurrence, attractor-repeller pairs and Lyapunov functions on box graphs")]
struct Cli {
    /// Run configuration (TOML with dotted keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the graph build.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_defaults: bool,
    /// Builtin whose defaults `--print-defaults` shows when no config is given.
    #[arg(long, global = true)]
    system: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the transition graph and write `<name>.cnds`.
    BuildMap,
    /// Decompose a graph: node CSV, condensation DOT and JSON summary.
    Conley { graph: PathBuf },
    /// Complete Lyapunov function on a graph, with an optional continuous trace.
    Lyapunov {
        graph: PathBuf,
        /// Start state for a `t,lambda,g,l_partial` trace (needs --config).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        trace: Option<Vec<f64>>,
        /// Pair (1-based) whose attractor and repeller the trace uses.
        #[arg(long, default_value_t = 1)]
        pair: usize,
    },
    /// Pullback images of U and their limit.
    Pullback,
    /// Shortest graph walk between two boxes.
    Chain {
        graph: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// Fiber of `from` (and of `to` unless --to-fiber is given).
        #[arg(long, default_value_t = 0)]
        fiber: usize,
        #[arg(long)]
        to_fiber: Option<usize>,
    },
    /// Check the decomposition of a graph file, or run the random-graph oracle with `oracle`.
    Verify {
        target: String,
        #[arg(long, default_value_t = 500)]
        graphs: usize,
        #[arg(long, default_value_t = 8)]
        max_nodes: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.system) {
        (Some(p), _) => RunConfig::from_path(p)?,
        (None, Some(name)) => RunConfig::defaults_for(name)?,
        (None, None) => RunConfig::defaults_for("double-well")?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn require_config(cli: &Cli) -> Result<RunConfig> {
    if cli.config.is_none() && cli.system.is_none() {
        return Err(Error::Config("this command needs --config (or --system for builtin defaults)".into()));
    }
    load_config(cli)
}

fn out_dir(cli: &Cli, fallback: &Path) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| fallback.to_path_buf());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn graph_dir(graph: &Path) -> PathBuf {
    graph.parent().filter(|p| !p.as_os_str().is_empty()).map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn stem(graph: &Path) -> String {
    graph.file_stem().map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<()> {
    if cli.print_defaults {
        print!("{}", load_config(&cli)?.to_toml_string());
        return Ok(());
    }
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let Some(command) = &cli.command else {
        return Err(Error::Config("no subcommand given; see --help".into()));
    };
    match command {
        Command::BuildMap => {
            let cfg = require_config(&cli)?;
            let dir = out_dir(&cli, Path::new(&cfg.output_dir))?;
            let tg = build_map(&cfg, workers)?;
            let path = dir.join(format!("{}.cnds", cfg.name));
            save_graph(&tg, &path)?;
            println!("{}: {} nodes, {} edges", path.display(), tg.node_count(), tg.graph.edge_count());
        }
        Command::Conley { graph } => {
            let tg: TransitionGraph<f64> = load_graph(graph)?;
            let dir = out_dir(&cli, &graph_dir(graph))?;
            let name = stem(graph);
            let dec = decompose(&tg);
            let summary = conley_summary(&tg, &dec);
            write_nodes_csv(&tg, &dec, None, create(&dir.join(format!("{name}.nodes.csv")))?)?;
            write_condensation_dot(&dec, create(&dir.join(format!("{name}.condensation.dot")))?)?;
            write_json(&dir.join(format!("{name}.conley.json")), &summary)?;
            println!(
                "{} SCCs, {} cyclic, chain recurrent fraction {}, {} pairs, residuals {}/{}",
                summary.scc_count,
                summary.cyclic_sccs,
                summary.cyclic_fraction,
                summary.pairs.len(),
                summary.union_residual,
                summary.intersection_residual
            );
        }
        Command::Lyapunov { graph, trace, pair } => {
            let tg: TransitionGraph<f64> = load_graph(graph)?;
            let dir = out_dir(&cli, &graph_dir(graph))?;
            let name = stem(graph);
            let dec = decompose(&tg);
            let (field, summary) = lyapunov_field(&tg, &dec)?;
            write_nodes_csv(&tg, &dec, Some(&field), create(&dir.join(format!("{name}.lyapunov.csv")))?)?;
            write_json(&dir.join(format!("{name}.lyapunov.json")), &summary)?;
            println!(
                "{} pairs; (a) {} (b) {} (c) {} (d) {}",
                summary.properties.pairs, summary.a_holds, summary.b_holds, summary.c_holds, summary.d_holds
            );
            if let Some(x) = trace {
                let cfg = require_config(&cli)?;
                let sys = cfg.system()?;
                if x.len() != sys.dim {
                    return Err(Error::InvalidInput(format!("--trace needs {} coordinates", sys.dim)));
                }
                let p = dec.pairs.get(pair.wrapping_sub(1)).ok_or_else(|| {
                    Error::InvalidInput(format!("--pair must be in 1..={}", dec.pairs.len()))
                })?;
                let a = fiber_boxes(&tg, &p.attractor, 0);
                let r = fiber_boxes(&tg, &p.repeller, 0);
                let orbit = OrbitSettings { horizon: cfg.lyapunov_horizon, dt: cfg.lyapunov_dt };
                let points = lyapunov_trace(&sys, &tg.grid, tg.sampling.samples[0], x, orbit, &a, &r)?;
                let mut w = create(&dir.join(format!("{name}.trace.csv")))?;
                writeln!(w, "t,lambda,g,l_partial")?;
                for q in &points {
                    writeln!(w, "{},{},{},{}", q.t, q.lambda, q.g, q.l_partial)?;
                }
                w.flush()?;
            }
        }
        Command::Pullback => {
            let cfg = require_config(&cli)?;
            let dir = out_dir(&cli, Path::new(&cfg.output_dir))?;
            let run = run_pullback(&cfg)?;
            write_json(&dir.join(format!("{}.pullback.json", cfg.name)), &run.summary)?;
            write_pullback_csv(&run.summary, create(&dir.join(format!("{}.pullback.csv", cfg.name)))?)?;
            let s = &run.summary;
            println!(
                "nested={} converged={} a_approx={} boxes final_distance={}",
                s.nested,
                s.converged,
                s.a_approx_boxes,
                s.final_distance.map_or("n/a".into(), |d| d.to_string())
            );
        }
        Command::Chain { graph, from, to, fiber, to_fiber } => {
            let tg: TransitionGraph<f64> = load_graph(graph)?;
            let n = tg.grid.box_count();
            let fibers = tg.sampling.len();
            let tf = to_fiber.unwrap_or(*fiber);
            if *from >= n || *to >= n || *fiber >= fibers || tf >= fibers {
                return Err(Error::InvalidInput(format!("boxes must be < {n}, fibers < {fibers}")));
            }
            let q = chain_exists(&tg.graph, tg.node(*fiber, *from), tg.node(tf, *to));
            match q.path {
                Some(path) => {
                    let shown: Vec<String> = path
                        .iter()
                        .map(|&v| tg.split(v).map_or("OUTSIDE".into(), |(f, b)| format!("{f}:{b}")))
                        .collect();
                    println!("path ({} edges): {}", path.len() - 1, shown.join(" -> "));
                }
                None => println!("not found"),
            }
        }
        Command::Verify { target, graphs, max_nodes } => {
            if target == "oracle" {
                let report = run_oracle_suite(*graphs, *max_nodes, cli.seed.unwrap_or(0));
                println!("{} graphs, {} pairs, {} failures", report.graphs, report.pairs, report.failures.len());
                for f in report.failures.iter().take(20) {
                    println!("  {f}");
                }
                if !report.passed() {
                    return Err(Error::InvalidInput("oracle disagreement".into()));
                }
            } else {
                let tg: TransitionGraph<f64> = load_graph(Path::new(target))?;
                let dec = decompose(&tg);
                let (_, l) = lyapunov_field(&tg, &dec)?;
                let holds = dec.report.holds() && l.all_hold;
                println!(
                    "identities {}; Lyapunov properties {}",
                    if dec.report.holds() { "hold" } else { "FAIL" },
                    if l.all_hold { "hold" } else { "FAIL" }
                );
                if !holds {
                    return Err(Error::InvalidInput("verification failed".into()));
                }
            }
        }
    }
    Ok(())
}
