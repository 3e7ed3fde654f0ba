use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use vipsim::analysis::{check_stability, drift_bound, max_uniform_slack, BoundedArrivals, RateMatrix, Stability};
use vipsim::error::Error;
use vipsim::harness::{emit_results, run_experiment, ExperimentConfig, SweepResult};
use vipsim::model::{LinkId, Topology, TopologyFile};

#[derive(Parser)]
#[command(name = "sim", version, about = "VIP forwarding and caching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment, optionally narrowed to one policy or seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Reduced profile: 100 objects of 10 chunks, 10 s, 20-object caches.
        #[arg(long)]
        scale: bool,
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `output` or ./results.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (policy, lambda, seed) cell of an experiment.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scale: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test a rate matrix against the stability region.
    Analyze {
        #[arg(long)]
        topology: PathBuf,
        /// Lines `node object rate` or `all node rate`, in VIPs per slot.
        #[arg(long)]
        rates: PathBuf,
        /// Virtual slot length in seconds.
        #[arg(long, default_value_t = 0.08)]
        slot: f64,
        /// Per-slot arrival cap used for the backlog bound.
        #[arg(long, default_value_t = 10)]
        cap: u32,
        /// Seed for random source placement, if the topology uses it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, scale, policy, seed, out } => {
            experiment(&config, scale, out, |c| {
                if let Some(p) = policy {
                    c.policies = vec![p];
                }
                if let Some(s) = seed {
                    c.seeds = vec![s];
                }
            })
        }
        Command::Sweep { config, scale, out } => experiment(&config, scale, out, |_| {}),
        Command::Analyze { topology, rates, slot, cap, seed } => analyze(&topology, &rates, slot, cap, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Watchdog { .. } | Error::Stalled { .. }) => 3,
        Some(
            Error::Parse { .. }
            | Error::Topology(_)
            | Error::Demand(_)
            | Error::Config(_)
            | Error::UnknownPolicy(_)
            | Error::Io(_)
            | Error::Unreachable { .. },
        ) => 2,
        _ => 1,
    }
}

fn experiment(path: &Path, scale: bool, out: Option<PathBuf>, adjust: impl FnOnce(&mut ExperimentConfig)) -> Result<ExitCode> {
    let mut config = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if scale {
        config.apply_scale()?;
    }
    adjust(&mut config);
    config.validate()?;
    let dir = out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let result = run_experiment(&config)?;
    emit_results(&result, &config.policies, &dir).with_context(|| format!("writing {}", dir.display()))?;
    print_summary(&result, &config.policies);
    println!("results written to {}", dir.display());
    for f in &result.failures {
        eprintln!("cell policy={} lambda={} seed={} aborted: {}", f.cell.policy, f.cell.lambda, f.cell.seed, f.error);
    }
    Ok(if result.watchdog_tripped() {
        ExitCode::from(3)
    } else if result.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn print_summary(result: &SweepResult, policies: &[String]) {
    println!("{:<12} {:>10} {:>14} {:>12} {:>16}", "policy", "lambda", "mean_delay_s", "std", "hit_bytes");
    for p in policies {
        for r in result.rows(p) {
            println!(
                "{:<12} {:>10} {:>14.6} {:>12.6} {:>16.0}",
                p, r.lambda, r.mean_delay.mean, r.mean_delay.std, r.hit_bytes.mean
            );
        }
    }
}

fn link_name(t: &Topology, l: LinkId) -> String {
    let link = t.link(l);
    format!("{}-{}", t.label(link.from), t.label(link.to))
}

fn analyze(topology: &Path, rates: &Path, slot: f64, cap: u32, seed: u64) -> Result<ExitCode> {
    let text = std::fs::read_to_string(topology).with_context(|| format!("reading {}", topology.display()))?;
    let topo = TopologyFile::parse(&text)?.build(seed)?;
    let text = std::fs::read_to_string(rates).with_context(|| format!("reading {}", rates.display()))?;
    let rates = RateMatrix::parse(&text, &topo)?;
    match check_stability(&topo, &rates, slot)? {
        Stability::Outside => {
            println!("Outside");
            return Ok(ExitCode::SUCCESS);
        }
        Stability::Inside(w) => {
            println!("Inside");
            println!("witness flows (link object f):");
            for l in topo.link_ids() {
                for k in topo.objects() {
                    let f = w.flow(l, k);
                    if f > 1e-12 {
                        println!("  {} {} {:.6}", link_name(&topo, l), k.label(), f);
                    }
                }
            }
            println!("witness caching (node object fraction):");
            for n in topo.nodes() {
                for k in topo.objects() {
                    let c = w.cache_fraction(n, k);
                    if c > 1e-12 {
                        println!("  {} {} {:.6}", topo.label(n), k.label(), c);
                    }
                }
            }
        }
    }
    match max_uniform_slack(&topo, &rates, slot)? {
        Some((eps, _)) if eps > 0.0 => {
            let mut slack = RateMatrix::for_topology(&topo);
            for n in topo.nodes() {
                for k in topo.objects() {
                    slack.set(n, k, eps);
                }
            }
            let a_max = BoundedArrivals::new(&rates, &topo, cap).node_caps(topo.node_count());
            let b = drift_bound(&topo, slot, &a_max, &slack)?;
            println!("epsilon {eps:.6}");
            println!("B {:.6}", b.b);
            println!("N*B/epsilon {:.6}", b.bound());
        }
        _ => println!("on the boundary: no positive uniform slack, the backlog bound is infinite"),
    }
    Ok(ExitCode::SUCCESS)
}
