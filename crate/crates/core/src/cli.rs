//! Command-line front end: JSON-configured runs of the enumeration,
//! verification, and correlation pipelines with reproducible CSV or
//! JSON-lines output.
//!
//! Exit codes: 0 success, 2 validation error, 3 resource cap, 4 a verify
//! command found a violated assertion.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    decay_constant_a, nubar1_d1, theorem8_check, BoundParams,
};
use crate::combinatorics::{
    aux_sum_identity_sides, forest_count_formula, forest_count_recursion, m_sums, m_sums_closed,
    partition_identity_sides, remarkable_identity_sides, ForestCountQuery,
};
use crate::configurations::{ClusterFamily, PointConfiguration, VolumeCutoff};
use crate::correlations::{
    ptcf_forest_series, ptcf_mobius, resummation_check, rho_direct, tcf_series, CorrelationResult,
    Route, SeriesSpec,
};
use crate::error::{Error, Result};
use crate::forests::{count_forests, enumerate_forests};
use crate::kernels::{compare_t_q, kernel_t};
use crate::potentials::{compute_summary, Kind, PairPotential, PotentialSummary};
use crate::quadrature::QuadratureSpec;

#[derive(Parser)]
#[command(name = "clustergas", version, about = "Cluster-expansion toolkit for correlation functions of a classical gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// List every admissible forest graph for given cluster sizes.
    EnumerateForests(RunArgs),
    /// Compare enumerated forest counts against the closed formula.
    CountForests(RunArgs),
    /// Check the combinatorial identities over desk-scale sweeps.
    VerifyIdentities(RunArgs),
    /// Evaluate the correlation kernel and its majorant on one instance.
    EvalKernel(RunArgs),
    /// Compute a partially truncated correlation by a chosen route.
    ComputePtcf(RunArgs),
    /// Evaluate the decay constants and their validity margins.
    ComputeBounds(RunArgs),
    /// Check the polynomial decay bound over a separation sweep.
    CheckDecay(RunArgs),
    /// Check the resummation identity on seeded random test functions.
    ResumCheck(RunArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (CSV or JSON lines, per command).
    #[arg(long)]
    pub output: PathBuf,
    /// Override the configured activity.
    #[arg(long)]
    pub z: Option<f64>,
    /// Override the configured inverse temperature.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Override the configured truncation order.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Override the configured Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Thread cap, recorded in the output header; execution is serial.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub kind: Kind,
    pub d: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxBlock {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub beta: f64,
    pub z: f64,
    /// Stability constant; defaults to 0 for repulsive potentials and is
    /// required otherwise.
    pub b: Option<f64>,
    #[serde(rename = "box")]
    pub volume: Option<BoxBlock>,
    /// Decay exponent for the polynomial-domination checks.
    pub polydecay_alpha: Option<f64>,
}

fn default_n_max() -> usize {
    3
}

fn default_vertex_cap() -> usize {
    12
}

fn default_points() -> usize {
    32
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsBlock {
    pub n_max: usize,
    pub vertex_cap: usize,
    pub points_per_axis: usize,
    /// Switches quadrature to Monte Carlo when set.
    pub mc_samples: Option<usize>,
    pub seed: u64,
    /// Recorded only; runs are serial.
    pub threads: Option<usize>,
}

impl Default for CapsBlock {
    fn default() -> Self {
        CapsBlock {
            n_max: default_n_max(),
            vertex_cap: default_vertex_cap(),
            points_per_axis: default_points(),
            mc_samples: None,
            seed: 0,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceBlock {
    /// Cluster point lists, one inner list per cluster.
    pub clusters: Option<Vec<Vec<Vec<f64>>>>,
    /// Fixed external points for kernel evaluation.
    pub gamma: Option<Vec<Vec<f64>>>,
    /// Cluster sizes for the counting commands.
    pub sizes: Option<Vec<usize>>,
    /// External point count for the counting commands.
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub route: Option<Route>,
    pub separations: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialBlock>,
    pub model: Option<ModelBlock>,
    #[serde(default)]
    pub caps: CapsBlock,
    #[serde(default)]
    pub instance: InstanceBlock,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource(_) => 3,
                _ => 2,
            }
        }
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Domain(format!("cannot read config {:?}: {e}", args.config)))?;
    let mut config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Domain(format!("config {:?}: {e}", args.config)))?;
    if let Some(z) = args.z {
        match &mut config.model {
            Some(m) => m.z = z,
            None => return Err(Error::Domain("--z given but the config has no model block".into())),
        }
    }
    if let Some(beta) = args.beta {
        match &mut config.model {
            Some(m) => m.beta = beta,
            None => {
                return Err(Error::Domain("--beta given but the config has no model block".into()))
            }
        }
    }
    if let Some(n_max) = args.n_max {
        config.caps.n_max = n_max;
    }
    if let Some(seed) = args.seed {
        config.caps.seed = seed;
    }
    if let Some(threads) = args.threads {
        config.caps.threads = Some(threads);
    }
    Ok(config)
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(command: &str, config: &RunConfig) -> Result<Vec<String>> {
    let resolved = serde_json::to_string(config)
        .map_err(|e| Error::Structural(format!("config serialization: {e}")))?;
    Ok(vec![
        format!("# clustergas {}", env!("CARGO_PKG_VERSION")),
        format!("# command: {command}"),
        format!("# config: {resolved}"),
    ])
}

fn write_output(path: &PathBuf, lines: &[String]) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::Domain(format!("cannot write {path:?}: {e}")))?;
    for line in lines {
        writeln!(file, "{line}").map_err(|e| Error::Domain(format!("write {path:?}: {e}")))?;
    }
    Ok(())
}

struct Resolved {
    pot: PairPotential,
    summary: PotentialSummary,
    spec: SeriesSpec,
    b: f64,
}

fn resolve_model(config: &RunConfig) -> Result<Resolved> {
    let pb = config
        .potential
        .as_ref()
        .ok_or_else(|| Error::Domain("missing config block: potential".into()))?;
    let mb = config
        .model
        .as_ref()
        .ok_or_else(|| Error::Domain("missing config block: model".into()))?;
    let pot = PairPotential::new(pb.kind.clone(), pb.d)?;
    let summary = compute_summary(&pot, mb.beta, mb.b, mb.polydecay_alpha)?;
    let bb = mb
        .volume
        .as_ref()
        .ok_or_else(|| Error::Domain("missing config field: model.box".into()))?;
    let cutoff = VolumeCutoff::new(bb.lo.clone(), bb.hi.clone())?;
    if cutoff.dim() != pb.d {
        return Err(Error::Domain(format!(
            "model.box dimension {} does not match potential.d {}",
            cutoff.dim(),
            pb.d
        )));
    }
    let quadrature = match config.caps.mc_samples {
        Some(samples) => QuadratureSpec::MonteCarlo { samples, seed: config.caps.seed },
        None => QuadratureSpec::midpoint(config.caps.points_per_axis),
    };
    let spec = SeriesSpec {
        n_max: config.caps.n_max,
        quadrature,
        cutoff,
        z: mb.z,
        beta: mb.beta,
    };
    spec.validate()?;
    Ok(Resolved { pot, summary: summary.clone(), spec, b: summary.stability_b })
}

fn instance_family(config: &RunConfig, d: usize) -> Result<ClusterFamily> {
    let clusters = config
        .instance
        .clusters
        .as_ref()
        .ok_or_else(|| Error::Domain("missing config field: instance.clusters".into()))?;
    let built: Vec<PointConfiguration> = clusters
        .iter()
        .map(|pts| PointConfiguration::new(pts.clone(), d))
        .collect::<Result<_>>()?;
    ClusterFamily::new(built)
}

fn sizes_and_orders(config: &RunConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    let sizes = config
        .instance
        .sizes
        .clone()
        .ok_or_else(|| Error::Domain("missing config field: instance.sizes".into()))?;
    let orders = if let Some(list) = config.instance.n_list.clone() {
        list
    } else if let Some(n) = config.instance.n {
        vec![n]
    } else {
        return Err(Error::Domain("missing config field: instance.n or instance.n_list".into()));
    };
    Ok((sizes, orders))
}

fn cmd_enumerate_forests(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let (sizes, orders) = sizes_and_orders(config)?;
    let mut lines = header("enumerate-forests", config)?;
    lines.push("n,index,edges".into());
    for &n in &orders {
        let forests = enumerate_forests(&sizes, n, config.caps.vertex_cap)?;
        for (idx, f) in forests.iter().enumerate() {
            let edges: Vec<String> =
                f.edges().iter().map(|&(a, b)| format!("{a}-{b}")).collect();
            lines.push(format!("{n},{idx},\"{}\"", edges.join("|")));
        }
    }
    write_output(out, &lines)?;
    Ok(0)
}

fn cmd_count_forests(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let (sizes, orders) = sizes_and_orders(config)?;
    let mut lines = header("count-forests", config)?;
    lines.push("m,sizes,n,enumerated,formula".into());
    let sizes_str: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    for &n in &orders {
        let enumerated = count_forests(&sizes, n, config.caps.vertex_cap)?;
        let formula = forest_count_formula(&ForestCountQuery::new(sizes.clone(), n)?)?;
        lines.push(format!(
            "{},\"{}\",{n},{enumerated},{formula}",
            sizes.len(),
            sizes_str.join(",")
        ));
    }
    write_output(out, &lines)?;
    Ok(0)
}

fn cmd_verify_identities(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let mut lines = header("verify-identities", config)?;
    lines.push("identity,params,lhs,rhs,ok".into());
    let mut all_ok = true;
    let mut push = |lines: &mut Vec<String>, name: &str, params: String, lhs: String, rhs: String| {
        let ok = lhs == rhs;
        all_ok &= ok;
        lines.push(format!("{name},\"{params}\",{lhs},{rhs},{ok}"));
    };
    // forest count: enumeration vs formula vs recursion
    let size_sets: Vec<Vec<usize>> =
        vec![vec![1], vec![2], vec![1, 1], vec![2, 1], vec![2, 2], vec![1, 1, 1], vec![2, 1, 2]];
    for sizes in &size_sets {
        for n in 0..=2usize {
            let q = ForestCountQuery::new(sizes.clone(), n)?;
            let formula = forest_count_formula(&q)?;
            let enumerated = count_forests(sizes, n, config.caps.vertex_cap)?;
            let recursion = forest_count_recursion(&q)?;
            let params = format!("sizes={sizes:?} n={n}");
            push(&mut lines, "forest-count-enumeration", params.clone(), enumerated.to_string(), formula.to_string());
            push(&mut lines, "forest-count-recursion", params, recursion.to_string(), formula.to_string());
        }
    }
    // tree-function identity
    for l in 1..=4usize {
        for n in 0..=6usize {
            let (lhs, rhs) = remarkable_identity_sides(n, l);
            push(
                &mut lines,
                "single-cluster-composition",
                format!("n={n} l={l}"),
                lhs.to_string(),
                rhs.to_string(),
            );
        }
    }
    // partition identity over block sizes
    for sizes in [vec![1, 2, 1], vec![2, 2, 2, 1], vec![1, 1, 1, 1, 3]] {
        for sigma in 2..=sizes.len() {
            let (lhs, rhs) = partition_identity_sides(&sizes, sigma)?;
            push(
                &mut lines,
                "partition-identity",
                format!("sizes={sizes:?} sigma={sigma}"),
                lhs.to_string(),
                rhs.to_string(),
            );
        }
    }
    // binomial auxiliary sum
    for l in 1..=4usize {
        for n in 1..=6usize {
            let (lhs, rhs) = aux_sum_identity_sides(n, l)?;
            push(
                &mut lines,
                "binomial-aux-sum",
                format!("n={n} l={l}"),
                lhs.to_string(),
                rhs.to_string(),
            );
        }
    }
    // the three split sums against their closed forms
    for sizes in [vec![1, 1], vec![2, 1, 2], vec![3, 2, 1]] {
        for n in 1..=3usize {
            let (m1, m2, m3, total) = m_sums(&sizes, n)?;
            let (c1, c2, c3) = m_sums_closed(&sizes, n)?;
            let params = format!("sizes={sizes:?} n={n}");
            push(&mut lines, "split-sum-1", params.clone(), m1.to_string(), c1.to_string());
            push(&mut lines, "split-sum-2", params.clone(), m2.to_string(), c2.to_string());
            push(&mut lines, "split-sum-3", params.clone(), m3.to_string(), c3.to_string());
            let closed_total = c1 + c2 + c3;
            push(&mut lines, "split-sum-total", params, total.to_string(), closed_total.to_string());
        }
    }
    write_output(out, &lines)?;
    Ok(if all_ok { 0 } else { 4 })
}

fn cmd_eval_kernel(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let resolved = resolve_model(config)?;
    let family = instance_family(config, resolved.spec.cutoff.dim())?;
    let gamma_pts = config.instance.gamma.clone().unwrap_or_default();
    let gamma = PointConfiguration::new(gamma_pts, resolved.spec.cutoff.dim())?;
    let t = kernel_t(&family, &gamma, &resolved.pot, resolved.spec.beta, resolved.spec.z, resolved.b)?;
    let (t_abs, q, ok) =
        compare_t_q(&family, &gamma, &resolved.pot, resolved.spec.beta, resolved.spec.z, resolved.b)?;
    let mut lines = header("eval-kernel", config)?;
    lines.push("quantity,value".into());
    lines.push(format!("t,{}", sci(t)));
    lines.push(format!("t_abs,{}", sci(t_abs)));
    lines.push(format!("q,{}", sci(q)));
    lines.push(format!("domination_ok,{ok}"));
    write_output(out, &lines)?;
    Ok(if ok { 0 } else { 4 })
}

fn cmd_compute_ptcf(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let resolved = resolve_model(config)?;
    let family = instance_family(config, resolved.spec.cutoff.dim())?;
    let route = config.instance.route.unwrap_or(Route::ForestSeries);
    let result: CorrelationResult = match route {
        Route::ForestSeries => {
            ptcf_forest_series(&family, &resolved.pot, &resolved.spec, &resolved.summary)?
        }
        Route::Mobius => ptcf_mobius(&family, &resolved.pot, &resolved.spec)?,
        Route::Direct => rho_direct(&family.pooled(), &resolved.pot, &resolved.spec)?,
        Route::UrsellSeries => tcf_series(
            &family.pooled(),
            &resolved.pot,
            &resolved.spec,
            &resolved.summary,
            config.caps.vertex_cap.min(7),
        )?,
    };
    let resolved_json = serde_json::to_value(config)
        .map_err(|e| Error::Structural(format!("config serialization: {e}")))?;
    let record = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "compute-ptcf",
        "config": resolved_json,
        "value": result.value,
        "error": result.truncation_error,
        "rigorous": result.rigorous,
        "route": result.route,
        "inside_convergence_region": result.inside_convergence_region,
    });
    let line = serde_json::to_string(&record)
        .map_err(|e| Error::Structural(format!("output serialization: {e}")))?;
    write_output(out, &[line])?;
    Ok(0)
}

fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn cmd_compute_bounds(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let resolved = resolve_model(config)?;
    let sizes = if let Some(s) = config.instance.sizes.clone() {
        s
    } else {
        instance_family(config, resolved.spec.cutoff.dim())?.sizes()
    };
    let (c, alpha) = resolved.summary.polydecay.ok_or_else(|| {
        Error::Domain("compute-bounds needs model.polydecay_alpha and a dominated potential".into())
    })?;
    let h = resolved.spec.z * (2.0 * resolved.spec.beta * resolved.b).exp();
    let nubar1 = nubar1_d1(alpha, alpha == 2.0)?.value;
    let mut params = BoundParams {
        h,
        nu1: resolved.summary.nu1,
        nubar1,
        c,
        alpha,
        sizes: sizes.clone(),
        sigma: 1,
    };
    let params_hash = fnv1a(&format!(
        "{h:.17e}|{:.17e}|{nubar1:.17e}|{c:.17e}|{alpha:.17e}|{sizes:?}",
        resolved.summary.nu1
    ));
    let mut lines = header("compute-bounds", config)?;
    lines.push("m,sigma,params_hash,a_value,condition_margin".into());
    let m = sizes.len();
    for sigma in 1..=m {
        params.sigma = sigma;
        let margin = if m >= 4 && sigma >= 3 { params.margin_general() } else { params.margin_pair() };
        let a_str = match decay_constant_a(&params) {
            Ok(a) => sci(a),
            Err(Error::Divergence(_)) => "nan".into(),
            Err(e) => return Err(e),
        };
        lines.push(format!("{m},{sigma},{params_hash:016x},{a_str},{}", sci(margin)));
    }
    write_output(out, &lines)?;
    Ok(0)
}

fn cmd_check_decay(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let resolved = resolve_model(config)?;
    let d = resolved.spec.cutoff.dim();
    if d != 1 {
        return Err(Error::Domain("check-decay supports one dimension".into()));
    }
    let raw = config
        .instance
        .clusters
        .as_ref()
        .ok_or_else(|| Error::Domain("missing config field: instance.clusters".into()))?;
    if raw.len() != 2 || raw.iter().any(|c| c.is_empty()) {
        return Err(Error::Domain("check-decay needs exactly two nonempty clusters".into()));
    }
    let separations = config
        .instance
        .separations
        .clone()
        .ok_or_else(|| Error::Domain("missing config field: instance.separations".into()))?;
    let mut lines = header("check-decay", config)?;
    lines.push("separation,ptcf_abs,bound,condition_ok,ok".into());
    let mut all_ok = true;
    // cluster shapes re-centered and placed symmetrically at each separation
    let shapes: Vec<Vec<Vec<f64>>> = raw
        .iter()
        .map(|c| {
            let mean: f64 = c.iter().map(|p| p[0]).sum::<f64>() / c.len() as f64;
            c.iter().map(|p| vec![p[0] - mean]).collect()
        })
        .collect();
    for &sep in &separations {
        if sep <= 0.0 {
            return Err(Error::Domain(format!("separations must be positive, got {sep}")));
        }
        let placed = ClusterFamily::new(vec![
            PointConfiguration::new(
                shapes[0].iter().map(|p| vec![p[0] - sep / 2.0]).collect(),
                1,
            )?,
            PointConfiguration::new(
                shapes[1].iter().map(|p| vec![p[0] + sep / 2.0]).collect(),
                1,
            )?,
        ])?;
        let report = theorem8_check(&placed, &resolved.pot, &resolved.spec, &resolved.summary, 7)?;
        let ok = report.bound_holds;
        if ok == Some(false) {
            all_ok = false;
        }
        lines.push(format!(
            "{},{},{},{},{}",
            sci(sep),
            sci(report.ptcf_abs),
            if report.condition_ok { sci(report.bound) } else { "nan".into() },
            report.condition_ok,
            ok.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    write_output(out, &lines)?;
    Ok(if all_ok { 0 } else { 4 })
}

fn cmd_resum_check(config: &RunConfig, out: &PathBuf) -> Result<i32> {
    let resolved = resolve_model(config)?;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.caps.seed);
    let mut lines = header("resum-check", config)?;
    lines.push("case,lhs,rhs,diff,ok".into());
    let mut all_ok = true;
    for case in 0..3 {
        let (a0, a1, a2) = (rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3));
        let (b1, b2) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let f = move |pts: &[Vec<f64>]| {
            a0 + pts
                .iter()
                .map(|p| {
                    let s: f64 = p.iter().sum();
                    a1 * s + a2 * s * s
                })
                .sum::<f64>()
        };
        let h = move |eta: &[Vec<f64>], gamma: &[Vec<f64>]| {
            let se: f64 = eta.iter().map(|p| p.iter().sum::<f64>()).sum();
            let sg: f64 = gamma.iter().map(|p| p.iter().sum::<f64>()).sum();
            (1.0 + b1 * se) * (1.0 + b2 * sg)
        };
        let (lhs, rhs) = resummation_check(&resolved.spec, &f, &h)?;
        let diff = (lhs - rhs).abs();
        let ok = diff <= 1e-9 * lhs.abs().max(1.0);
        all_ok &= ok;
        lines.push(format!("{case},{},{},{},{ok}", sci(lhs), sci(rhs), sci(diff)));
    }
    write_output(out, &lines)?;
    Ok(if all_ok { 0 } else { 4 })
}

pub fn dispatch(command: &Command) -> Result<i32> {
    let (args, runner): (&RunArgs, fn(&RunConfig, &PathBuf) -> Result<i32>) = match command {
        Command::EnumerateForests(a) => (a, cmd_enumerate_forests),
        Command::CountForests(a) => (a, cmd_count_forests),
        Command::VerifyIdentities(a) => (a, cmd_verify_identities),
        Command::EvalKernel(a) => (a, cmd_eval_kernel),
        Command::ComputePtcf(a) => (a, cmd_compute_ptcf),
        Command::ComputeBounds(a) => (a, cmd_compute_bounds),
        Command::CheckDecay(a) => (a, cmd_check_decay),
        Command::ResumCheck(a) => (a, cmd_resum_check),
    };
    let config = load_config(args)?;
    runner(&config, &args.output)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{"caps": {"n_max": 2}, "bogus": 1}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
        let text = r#"{"caps": {"n_max": 2, "bogus": 1}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn config_defaults_fill_in() {
        let config: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config.caps.n_max, 3);
        assert_eq!(config.caps.points_per_axis, 32);
        assert!(config.instance.clusters.is_none());
    }

    #[test]
    fn potential_block_parses_tagged_kind() {
        let text = r#"{"kind": {"family": "lennard_jones", "phi0": 1.0, "r0": 1.0}, "d": 1}"#;
        let block: PotentialBlock = serde_json::from_str(text).unwrap();
        assert_eq!(block.d, 1);
        assert!(matches!(block.kind, Kind::LennardJones { .. }));
    }

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a("abc"), fnv1a("abc"));
        assert_ne!(fnv1a("abc"), fnv1a("abd"));
    }
}
