use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netcap::antenna::{self, AntennaModel, DEFAULT_EPS_ANG};
use netcap::flow::{concurrent_flow_approx_with, max_flow, CommoditySet, FlowNetwork};
use netcap::geometry::{build_graph, count_cut_edges, generate_instance, NetworkInstance, XiMode};
use netcap::harness::{
    flow_to_json, format_sig, network_from_json, network_to_json, run_experiment, sweep_solver_options,
    ExperimentConfig, FlowFile, Metric, SWEEP_SCANS_PER_ARC,
};
use netcap::routing::{achievable_throughput, build_grid, compute_loads, DEFAULT_C_GRID};
use netcap::Result;

#[derive(Parser)]
#[command(
    name = "netcap",
    version,
    about = "Capacity scaling experiments on random unit-disk networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as a network file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// loglog, const:<xi> or grid:<c_grid>.
        #[arg(long, default_value = "loglog")]
        xi: XiMode,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count edges straddling the center cut and the strip populations.
    CutCount(Source),
    /// Maximum flow from the left half to the right half.
    Maxflow(Source),
    /// Approximate maximum concurrent flow of the instance's commodities.
    Mcf {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Keep only commodities crossing the cut from left to right.
        #[arg(long)]
        left_right: bool,
        /// Work budget in shortest-path arc scans per arc.
        #[arg(long, default_value_t = f64::INFINITY)]
        scans_per_arc: f64,
        /// Write the flow file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid routing of the left-to-right commodities.
    Route {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = DEFAULT_C_GRID)]
        c_grid: f64,
        /// Write the per-link load profile here as CSV.
        #[arg(long)]
        loads_out: Option<PathBuf>,
    },
    /// Simultaneous cut crossings under an antenna model.
    Antenna {
        #[command(flatten)]
        source: Source,
        /// omni, single-beam or multi-beam.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = DEFAULT_EPS_ANG)]
        eps_ang: f64,
        /// Write the schedule here as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a metric over sizes and seeds and write CSV rows.
    Scaling {
        #[arg(long)]
        metric: Metric,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Base seed; trial k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_C_GRID)]
        c_grid: f64,
        #[arg(long, default_value = "loglog")]
        xi: XiMode,
        #[arg(long, default_value_t = DEFAULT_EPS_ANG)]
        eps_ang: f64,
        #[arg(long, default_value_t = SWEEP_SCANS_PER_ARC)]
        scans_per_arc: f64,
    },
}

/// A network file, or the parameters to generate one.
#[derive(Args)]
struct Source {
    /// Network file written by `gen`.
    #[arg(long, conflicts_with_all = ["n", "seed", "xi"])]
    network: Option<PathBuf>,
    #[arg(long, required_unless_present = "network")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    xi: Option<XiMode>,
}

impl Source {
    fn load(&self) -> Result<NetworkInstance> {
        match &self.network {
            Some(path) => network_from_json(&std::fs::read_to_string(path)?),
            None => generate_instance(
                self.n.expect("clap requires n"),
                self.seed.unwrap_or(0),
                self.xi.unwrap_or_default(),
            ),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Gen { n, seed, xi, out: path } => {
            let text = network_to_json(&generate_instance(n, seed, xi)?)?;
            match path {
                Some(p) => writeln!(create(&p)?, "{text}")?,
                None => writeln!(out, "{text}")?,
            }
        }
        Command::CutCount(source) => {
            let inst = source.load()?;
            let stats = count_cut_edges(&build_graph(&inst, 1.0)?, &inst);
            writeln!(out, "n,d,straddling_edges,left_strip,right_strip")?;
            writeln!(
                out,
                "{},{},{},{},{}",
                inst.n,
                format_sig(inst.d),
                stats.straddling_edges,
                stats.left_strip,
                stats.right_strip
            )?;
        }
        Command::Maxflow(source) => {
            let inst = source.load()?;
            let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0)?);
            let (left, right): (Vec<usize>, Vec<usize>) = (0..inst.n).partition(|&i| inst.nodes[i].is_left());
            let r = max_flow(&net, &left, &right)?;
            writeln!(out, "value {}", format_sig(r.value))?;
            writeln!(out, "cut_links {}", r.cut_links.len())?;
            writeln!(out, "per_node {}", format_sig(r.value / inst.n as f64))?;
        }
        Command::Mcf {
            source,
            eps,
            left_right,
            scans_per_arc,
            out: path,
        } => {
            let inst = source.load()?;
            let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0)?);
            let comm = CommoditySet::from_instance(&inst, left_right);
            let r = concurrent_flow_approx_with(&net, &comm, eps, &sweep_solver_options(scans_per_arc))?;
            writeln!(out, "commodities {}", comm.len())?;
            writeln!(out, "lambda {}", format_sig(r.lambda))?;
            writeln!(out, "upper_bound {}", format_sig(r.upper_bound))?;
            writeln!(out, "certified {}", r.certified)?;
            writeln!(out, "phases {}", r.iterations)?;
            if !r.disconnected.is_empty() {
                writeln!(out, "disconnected {:?}", r.disconnected)?;
            }
            if let Some(p) = path {
                writeln!(create(&p)?, "{}", flow_to_json(&FlowFile::from_result(&r, &net))?)?;
            }
        }
        Command::Route {
            source,
            c_grid,
            loads_out,
        } => {
            let inst = source.load()?;
            let grid = build_grid(&inst, c_grid)?;
            writeln!(out, "cells_per_side {}", grid.m)?;
            writeln!(out, "occupancy {}..{}", grid.min_occupancy, grid.max_occupancy)?;
            writeln!(out, "d_grid {}", format_sig(grid.d_grid))?;
            if inst.d < grid.d_grid {
                writeln!(out, "warning radius {} is below the grid range", format_sig(inst.d))?;
            }
            let loads = compute_loads(&grid, &inst, &CommoditySet::from_instance(&inst, true))?;
            writeln!(out, "max_load {}", loads.max_load)?;
            writeln!(out, "center_cut_load {}", loads.center_cut_load)?;
            writeln!(out, "center_dominates {}", loads.center_dominates())?;
            writeln!(out, "gamma {}", format_sig(achievable_throughput(&loads, 1.0)?))?;
            if let Some(p) = loads_out {
                loads.write_csv(&grid, create(&p)?)?;
            }
        }
        Command::Antenna {
            source,
            model,
            eps_ang,
            out: path,
        } => {
            let inst = source.load()?;
            let model = AntennaModel::parse(&model, eps_ang)?;
            let sched = antenna::schedule(&inst, model)?;
            if let Err(e) = antenna::check_schedule(&inst, &sched) {
                return Err(netcap::Error::InvalidNetwork(format!(
                    "schedule failed its certificate: {e}"
                )));
            }
            writeln!(out, "model {model}")?;
            writeln!(out, "edges {}", sched.len())?;
            if model == AntennaModel::Omni {
                writeln!(out, "upper_bound {}", format_sig(antenna::omni_cut_upper(inst.d)?))?;
            }
            if let Some(p) = path {
                sched.write_csv(&inst, create(&p)?)?;
            }
        }
        Command::Scaling {
            metric,
            n_list,
            trials,
            seed,
            out: path,
            eps,
            c_grid,
            xi,
            eps_ang,
            scans_per_arc,
        } => {
            let cfg = ExperimentConfig {
                trials,
                base_seed: seed,
                eps,
                c_grid,
                xi_mode: xi,
                eps_ang,
                scans_per_arc,
                output: path.clone(),
                ..ExperimentConfig::new(metric, n_list)
            };
            let result = run_experiment(&cfg)?;
            if path.is_none() {
                result.write_csv(&mut out)?;
            }
            if let Some(fit) = &result.fit_normalized {
                eprintln!(
                    "normalized slope {} (r2 {})",
                    format_sig(fit.slope),
                    format_sig(fit.r_squared)
                );
            }
            let failed = result.rows.iter().filter(|r| r.failed).count();
            if failed > 0 {
                eprintln!("{failed} failed trials");
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
