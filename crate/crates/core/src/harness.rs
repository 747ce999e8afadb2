//! Experiment sweeps over `n` and seeds, the per-instance sandwich check, and
//! the CSV and JSON formats.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::antenna::{self, AntennaModel, DEFAULT_EPS_ANG};
use crate::error::{invalid, Error, Result};
use crate::flow::{
    concurrent_flow_approx_with, max_flow, verify_solution, CommoditySet, ConcurrentFlowResult, FlowNetwork,
    SolverOptions,
};
use crate::geometry::{build_graph, count_cut_edges, generate_instance, NetworkInstance, XiMode};
use crate::routing::{achievable_throughput, build_grid, compute_loads, DEFAULT_C_GRID};
use crate::stats::{loglog_fit, FitResult};

pub const CSV_HEADER: &str = "n,seed,metric,raw,normalized,failed,wall_ms";

/// Disconnected instances are retried this many times before the row is
/// flagged.
pub const MAX_RETRIES: u64 = 10;

/// Offset between a trial seed and its retries. Large enough that retries
/// never collide with the seeds of other trials.
pub const RETRY_STRIDE: u64 = 1 << 32;

/// Sizes needed before a sweep reports a fit.
pub const MIN_FIT_SIZES: usize = 4;

/// Default work budget of the concurrent-flow solver in sweeps, in arc scans
/// per arc. Large instances stop on it, uncertified; small ones certify
/// first.
pub const SWEEP_SCANS_PER_ARC: f64 = 5000.0;

/// Relative slack for comparing the three sandwich quantities.
pub const SANDWICH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Edges straddling the center cut.
    CutEdges,
    /// Left-half to right-half maximum flow divided by `n`.
    MaxflowNu,
    /// Approximate maximum concurrent rate of the left-to-right commodities.
    ConcurrentLambda,
    /// Grid-routing throughput of the left-to-right commodities.
    RoutingGamma,
    /// Omnidirectional schedule size across the cut.
    OmniSchedule,
    /// Single-beam cut edges.
    SingleBeam,
    /// Multi-beam cut edges.
    MultiBeam,
    /// Expected beam count `n pi d^2`.
    Beta,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::CutEdges,
        Metric::MaxflowNu,
        Metric::ConcurrentLambda,
        Metric::RoutingGamma,
        Metric::OmniSchedule,
        Metric::SingleBeam,
        Metric::MultiBeam,
        Metric::Beta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::CutEdges => "cut-edges",
            Metric::MaxflowNu => "maxflow-nu",
            Metric::ConcurrentLambda => "concurrent-lambda",
            Metric::RoutingGamma => "routing-gamma",
            Metric::OmniSchedule => "omni-schedule",
            Metric::SingleBeam => "single-beam",
            Metric::MultiBeam => "multi-beam",
            Metric::Beta => "beta",
        }
    }

    /// The growth law the raw value is divided by, as printed in the CSV.
    pub fn normalizer_label(&self) -> &'static str {
        match self {
            Metric::CutEdges => "(2/3)*n^2*d^3",
            Metric::MaxflowNu | Metric::ConcurrentLambda | Metric::RoutingGamma => "ln(n)^1.5/sqrt(n)",
            Metric::OmniSchedule => "sqrt(n/ln(n))",
            Metric::SingleBeam => "n*d",
            Metric::MultiBeam => "n^2*d^3",
            Metric::Beta => "ln(n)+xi_n",
        }
    }

    /// Value of the growth law for `n` nodes at radius `d`.
    pub fn normalizer(&self, n: usize, d: f64) -> f64 {
        let nf = n as f64;
        let ln = nf.ln();
        match self {
            Metric::CutEdges => 2.0 / 3.0 * nf * nf * d.powi(3),
            Metric::MaxflowNu | Metric::ConcurrentLambda | Metric::RoutingGamma => ln.powf(1.5) / nf.sqrt(),
            Metric::OmniSchedule => (nf / ln).sqrt(),
            Metric::SingleBeam => nf * d,
            Metric::MultiBeam => nf * nf * d.powi(3),
            // pi d^2 = (ln n + xi_n) / n
            Metric::Beta => std::f64::consts::PI * d * d * nf,
        }
    }

    /// Flow metrics share the grid-consistent radius so that routing and
    /// the flow solvers see the same graph.
    pub fn uses_grid_radius(&self) -> bool {
        matches!(
            self,
            Metric::MaxflowNu | Metric::ConcurrentLambda | Metric::RoutingGamma
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub metric: Metric,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub eps: f64,
    pub c_grid: f64,
    /// Radius rule for the metrics that do not use the grid radius.
    pub xi_mode: XiMode,
    pub eps_ang: f64,
    /// Concurrent-flow work budget, see [`SWEEP_SCANS_PER_ARC`].
    pub scans_per_arc: f64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(metric: Metric, n_list: Vec<usize>) -> Self {
        ExperimentConfig {
            metric,
            n_list,
            trials: 20,
            base_seed: 0,
            eps: 0.05,
            c_grid: DEFAULT_C_GRID,
            xi_mode: XiMode::LogLog,
            eps_ang: DEFAULT_EPS_ANG,
            scans_per_arc: SWEEP_SCANS_PER_ARC,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return invalid("n list is empty");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n list must be strictly increasing");
        }
        if self.n_list[0] < 2 {
            return invalid("every n must be at least 2");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1), got {}", self.eps));
        }
        if !(self.c_grid > 0.0) || !self.c_grid.is_finite() {
            return invalid(format!("c_grid must be positive, got {}", self.c_grid));
        }
        if !(self.scans_per_arc > 0.0) {
            return invalid(format!("work budget must be positive, got {}", self.scans_per_arc));
        }
        if !(self.eps_ang >= 0.0) {
            return invalid(format!("angular tolerance must be non-negative, got {}", self.eps_ang));
        }
        Ok(())
    }

    /// Radius rule actually used for `self.metric`.
    pub fn effective_xi_mode(&self) -> XiMode {
        if self.metric.uses_grid_radius() {
            XiMode::Grid(self.c_grid)
        } else {
            self.xi_mode
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    /// Seed of the instance that produced the row, after any retries.
    pub seed: u64,
    pub metric: Metric,
    pub raw: f64,
    pub normalized: f64,
    pub failed: bool,
    pub failure: Option<String>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub mean_raw: f64,
    pub mean_normalized: f64,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<ScalingRow>,
    pub summaries: Vec<SizeSummary>,
    /// Log-log fit of the mean raw value against `n`.
    pub fit_raw: Option<FitResult>,
    /// Log-log fit of the mean normalized value against `n`.
    pub fit_normalized: Option<FitResult>,
}

impl ExperimentResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_csv(self.config.metric, &self.rows, w)
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Runs every trial of `cfg` in `(n, seed)` order, writes the CSV when an
/// output path is configured, and fits the per-size means.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_list.len() * cfg.trials);
    for &n in &cfg.n_list {
        for trial in 0..cfg.trials {
            rows.push(run_trial(cfg, n, cfg.base_seed.wrapping_add(trial as u64)));
        }
    }
    let summaries = summarize(&cfg.n_list, &rows);
    let usable: Vec<&SizeSummary> = summaries.iter().filter(|s| s.successes > 0).collect();
    let (fit_raw, fit_normalized) = if usable.len() >= MIN_FIT_SIZES {
        let xs: Vec<f64> = usable.iter().map(|s| s.n as f64).collect();
        let raw: Vec<f64> = usable.iter().map(|s| s.mean_raw).collect();
        let norm: Vec<f64> = usable.iter().map(|s| s.mean_normalized).collect();
        (loglog_fit(&xs, &raw).ok(), loglog_fit(&xs, &norm).ok())
    } else {
        (None, None)
    };
    let result = ExperimentResult {
        config: cfg.clone(),
        rows,
        summaries,
        fit_raw,
        fit_normalized,
    };
    if let Some(path) = &cfg.output {
        let file = std::fs::File::create(path)?;
        result.write_csv(std::io::BufWriter::new(file))?;
    }
    Ok(result)
}

fn summarize(n_list: &[usize], rows: &[ScalingRow]) -> Vec<SizeSummary> {
    n_list
        .iter()
        .map(|&n| {
            let ok: Vec<&ScalingRow> = rows.iter().filter(|r| r.n == n && !r.failed).collect();
            let failures = rows.iter().filter(|r| r.n == n && r.failed).count();
            let k = ok.len().max(1) as f64;
            SizeSummary {
                n,
                mean_raw: ok.iter().map(|r| r.raw).sum::<f64>() / k,
                mean_normalized: ok.iter().map(|r| r.normalized).sum::<f64>() / k,
                successes: ok.len(),
                failures,
            }
        })
        .collect()
}

/// One row: the metric on the instance with `seed`, or on a retry seed when
/// a flow metric meets a disconnected graph.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, seed: u64) -> ScalingRow {
    let start = Instant::now();
    let outcome = trial_value(cfg, n, seed);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((used_seed, raw, d)) => ScalingRow {
            n,
            seed: used_seed,
            metric: cfg.metric,
            raw,
            normalized: raw / cfg.metric.normalizer(n, d),
            failed: false,
            failure: None,
            wall_ms,
        },
        Err((used_seed, e)) => ScalingRow {
            n,
            seed: used_seed,
            metric: cfg.metric,
            raw: f64::NAN,
            normalized: f64::NAN,
            failed: true,
            failure: Some(e.to_string()),
            wall_ms,
        },
    }
}

type TrialOutcome = std::result::Result<(u64, f64, f64), (u64, Error)>;

fn trial_value(cfg: &ExperimentConfig, n: usize, seed: u64) -> TrialOutcome {
    let xi_mode = cfg.effective_xi_mode();
    let inst = if cfg.metric.uses_grid_radius() {
        connected_instance(n, seed, xi_mode)?
    } else {
        generate_instance(n, seed, xi_mode).map_err(|e| (seed, e))?
    };
    metric_value(cfg, &inst)
        .map(|v| (inst.seed, v, inst.d))
        .map_err(|e| (inst.seed, e))
}

/// The first connected instance among `seed`, `seed + RETRY_STRIDE`, ... with
/// at most `MAX_RETRIES` retries. On failure, returns the last seed tried.
pub fn connected_instance(n: usize, seed: u64, xi_mode: XiMode) -> std::result::Result<NetworkInstance, (u64, Error)> {
    let mut last = seed;
    for r in 0..=MAX_RETRIES {
        let s = seed.wrapping_add(r.wrapping_mul(RETRY_STRIDE));
        last = s;
        let inst = generate_instance(n, s, xi_mode).map_err(|e| (s, e))?;
        if build_graph(&inst, 1.0).map_err(|e| (s, e))?.is_connected() {
            return Ok(inst);
        }
    }
    Err((
        last,
        Error::InvalidNetwork(format!("graph disconnected for seed {seed} and {MAX_RETRIES} retries")),
    ))
}

/// Raw value of `cfg.metric` on `inst`, recomputable from the row's
/// `(n, seed)`.
pub fn metric_value(cfg: &ExperimentConfig, inst: &NetworkInstance) -> Result<f64> {
    let n = inst.n;
    match cfg.metric {
        Metric::CutEdges => {
            let g = build_graph(inst, 1.0)?;
            Ok(count_cut_edges(&g, inst).straddling_edges as f64)
        }
        Metric::MaxflowNu => {
            let g = build_graph(inst, 1.0)?;
            let net = FlowNetwork::from_graph(&g);
            let (left, right): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| inst.nodes[i].is_left());
            if left.is_empty() || right.is_empty() {
                return invalid("one side of the cut holds no nodes");
            }
            Ok(max_flow(&net, &left, &right)?.value / n as f64)
        }
        Metric::ConcurrentLambda => Ok(left_to_right_flow(inst, cfg.eps, cfg.scans_per_arc)?.lambda),
        Metric::RoutingGamma => routing_gamma(inst, cfg.c_grid),
        Metric::OmniSchedule => Ok(antenna::omni_schedule(inst)?.len() as f64),
        Metric::SingleBeam => {
            Ok(antenna::beam_cut_edges(inst, AntennaModel::SingleBeam { eps_ang: cfg.eps_ang })?.len() as f64)
        }
        Metric::MultiBeam => {
            Ok(antenna::beam_cut_edges(inst, AntennaModel::MultiBeam { eps_ang: cfg.eps_ang })?.len() as f64)
        }
        Metric::Beta => antenna::beam_count(n, inst.d),
    }
}

fn left_to_right(inst: &NetworkInstance) -> Result<CommoditySet> {
    let comm = CommoditySet::from_instance(inst, true);
    if comm.is_empty() {
        return invalid("instance has no left-to-right commodity");
    }
    Ok(comm)
}

/// Solver settings used by sweeps and sandwich checks.
pub fn sweep_solver_options(scans_per_arc: f64) -> SolverOptions {
    SolverOptions {
        scans_per_arc,
        ..SolverOptions::default()
    }
}

fn left_to_right_flow(inst: &NetworkInstance, eps: f64, scans_per_arc: f64) -> Result<ConcurrentFlowResult> {
    let g = build_graph(inst, 1.0)?;
    let net = FlowNetwork::from_graph(&g);
    concurrent_flow_approx_with(&net, &left_to_right(inst)?, eps, &sweep_solver_options(scans_per_arc))
}

fn routing_gamma(inst: &NetworkInstance, c_grid: f64) -> Result<f64> {
    let grid = build_grid(inst, c_grid)?;
    let loads = compute_loads(&grid, inst, &left_to_right(inst)?)?;
    achievable_throughput(&loads, 1.0)
}

/// Center-cut capacity per left-to-right commodity.
pub fn cut_capacity_bound(inst: &NetworkInstance) -> Result<f64> {
    let g = build_graph(inst, 1.0)?;
    let k = left_to_right(inst)?.len();
    Ok(count_cut_edges(&g, inst).straddling_edges as f64 * g.capacity / k as f64)
}

/// Outcome of one sandwich check on the left-to-right commodities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub gamma: f64,
    pub lambda_hat: f64,
    pub nu_bar: f64,
    pub epsilon: f64,
    /// Upper bound on the optimum reported by the flow solver.
    pub lambda_upper: f64,
    pub certified: bool,
    /// The flow behind `lambda_hat` passed [`verify_solution`], so the
    /// optimum is at least `lambda_hat`.
    pub flow_verified: bool,
    /// `gamma <= lambda_hat / (1 - eps)`.
    pub lower_holds: bool,
    /// `lambda_hat / (1 - eps) <= nu_bar`.
    pub upper_holds: bool,
    /// `lambda_hat <= nu_bar`, the weaker cut relaxation.
    pub relaxation_holds: bool,
    /// Full instance as a network file when an inequality fails.
    pub dump: Option<String>,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Sandwich check with the grid parameter taken from the instance's radius
/// rule when it is grid based, the default otherwise, and the sweep work
/// budget.
pub fn sandwich_check(inst: &NetworkInstance, eps: f64) -> Result<SandwichReport> {
    let c_grid = match inst.xi_mode {
        XiMode::Grid(c) => c,
        _ => DEFAULT_C_GRID,
    };
    sandwich_check_with(inst, eps, c_grid, SWEEP_SCANS_PER_ARC)
}

pub fn sandwich_check_with(
    inst: &NetworkInstance,
    eps: f64,
    c_grid: f64,
    scans_per_arc: f64,
) -> Result<SandwichReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("epsilon must lie in (0, 1), got {eps}"));
    }
    let g = build_graph(inst, 1.0)?;
    if !g.is_connected() {
        return Err(Error::InvalidNetwork(
            "sandwich check needs a connected instance".into(),
        ));
    }
    let gamma = routing_gamma(inst, c_grid)?;
    let flow = left_to_right_flow(inst, eps, scans_per_arc)?;
    let flow_verified = verify_solution(&flow.solution, &FlowNetwork::from_graph(&g))?;
    let nu_bar = cut_capacity_bound(inst)?;
    let scaled = flow.lambda / (1.0 - eps);
    let lower_holds = gamma <= scaled * (1.0 + SANDWICH_TOL);
    let upper_holds = scaled <= nu_bar * (1.0 + SANDWICH_TOL);
    let relaxation_holds = flow.lambda <= nu_bar * (1.0 + SANDWICH_TOL);
    let dump = if lower_holds && upper_holds && relaxation_holds {
        None
    } else {
        Some(network_to_json(inst)?)
    };
    Ok(SandwichReport {
        gamma,
        lambda_hat: flow.lambda,
        nu_bar,
        epsilon: eps,
        lambda_upper: flow.upper_bound,
        certified: flow.certified,
        flow_verified,
        lower_holds,
        upper_holds,
        relaxation_holds,
        dump,
    })
}

/// Formats like C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    format_g(x, 12)
}

fn format_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the normalizer comment, the header and one line per row.
pub fn write_csv<W: Write>(metric: Metric, rows: &[ScalingRow], mut w: W) -> Result<()> {
    writeln!(w, "# normalizer: {} / ({})", metric.name(), metric.normalizer_label())?;
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.seed,
            r.metric.name(),
            format_sig(r.raw),
            format_sig(r.normalized),
            u8::from(r.failed),
            format_sig(r.wall_ms)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Drops the wall-time column so two runs can be compared byte for byte.
pub fn strip_wall_time(csv: &str) -> String {
    let mut out = String::with_capacity(csv.len());
    for line in csv.lines() {
        if line.starts_with('#') {
            out.push_str(line);
        } else {
            out.push_str(line.rsplit_once(',').map_or(line, |(head, _)| head));
        }
        out.push('\n');
    }
    out
}

/// Byte offset of a 1-based line and column in `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn parse_error(text: &str, e: serde_json::Error) -> Error {
    if e.is_data() {
        if let Some(inner) = std::error::Error::source(&e).and_then(|s| s.downcast_ref::<Error>()) {
            return inner.clone();
        }
    }
    Error::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    }
}

pub fn network_to_json(inst: &NetworkInstance) -> Result<String> {
    serde_json::to_string_pretty(inst).map_err(|e| Error::InvalidNetwork(e.to_string()))
}

/// Parses and validates a network file.
pub fn network_from_json(text: &str) -> Result<NetworkInstance> {
    serde_json::from_str(text).map_err(|e| parse_error(text, e))
}

/// Flow file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowFile {
    pub lambda: f64,
    pub epsilon: f64,
    pub edge_loads: Vec<(usize, usize, f64)>,
}

impl FlowFile {
    pub fn from_result(r: &ConcurrentFlowResult, net: &FlowNetwork) -> Self {
        FlowFile {
            lambda: r.lambda,
            epsilon: r.epsilon,
            edge_loads: r.solution.edge_loads(net),
        }
    }
}

pub fn flow_to_json(f: &FlowFile) -> Result<String> {
    serde_json::to_string_pretty(f).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn flow_from_json(text: &str) -> Result<FlowFile> {
    serde_json::from_str(text).map_err(|e| parse_error(text, e))
}
