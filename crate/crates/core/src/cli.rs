//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    branch_trace, compact_eigenvalues, default_u_grid, estimate_h, log_grid, n_eps_curve, torus_zeros_2d, weyl_fit,
};
use crate::error::{Error, Result};
use crate::finder::{band_depth, find_resonances, FinderConfig, SearchRegion};
use crate::graph::{catalog, compute_invariants, load_graph, MetricGraph};
use crate::poly::symbolic_secular;
use crate::scattering::SecularFunction;
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Scattering resonances of quantum graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Graph document (JSON).
    graph: Option<PathBuf>,
    /// Named graph instead of a document.
    #[arg(long)]
    catalog: Option<String>,
    /// Catalog parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Vec<f64>,
    /// Edge lengths overriding the defaults, comma separated.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<f64>>,
}

impl GraphArgs {
    fn load(&self) -> Result<MetricGraph> {
        match (&self.graph, &self.catalog) {
            (Some(_), Some(_)) => Err(Error::InvalidParameter("give either a graph document or --catalog, not both".into())),
            (None, None) => Err(Error::InvalidParameter("no graph: pass a document path or --catalog NAME".into())),
            (None, Some(name)) => catalog(name, &self.params, self.lengths.as_deref()),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                let g = load_graph(&text)?;
                match &self.lengths {
                    Some(l) => g.with_lengths(l),
                    None => Ok(g),
                }
            }
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma_min: f64,
    #[arg(long, default_value_t = 10.0)]
    sigma_max: f64,
    /// Bottom of the search strip; defaults to a computed band depth.
    #[arg(long, allow_negative_numbers = true)]
    tau_min: Option<f64>,
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    tau_cap: f64,
    /// Newton step tolerance (relative).
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

impl SearchArgs {
    fn config(&self) -> Result<FinderConfig> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!("--tol must lie in (0, 1), got {}", self.tol)));
        }
        Ok(FinderConfig { tau_cap: self.tau_cap, newton_tol: self.tol, ..Default::default() })
    }
}

#[derive(Debug, Args)]
struct EpsArgs {
    #[arg(long, default_value_t = 1e-3)]
    eps_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    eps_max: f64,
    #[arg(long, default_value_t = 9)]
    eps_steps: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type, g(G), |L| and the d(G) bounds as JSON.
    Classify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalised secular polynomial as a term list.
    SecularPoly {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resonances in a rectangle as CSV.
    Resonances {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the graph without leads up to --sigma-max.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slope of the resonance counting function on [K/4, K], K = --sigma-max.
    Weyl {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// N(eps) per unit frequency on a logarithmic eps grid, K = --sigma-max.
    Neps {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        eps: EpsArgs,
        /// Full report as JSON instead of CSV.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resonance gap of a type I graph over sampled lengths (|L| = 1).
    EstimateH {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// τ(u) along the resonance branch through a real torus zero (two edges).
    BranchTrace {
        #[command(flatten)]
        graph: GraphArgs,
        /// Base point angles "alpha,beta"; defaults to the first zero found.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        base: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        u_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        u_step: f64,
        /// Full trace as JSON instead of CSV.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the acceptance checks and prints one line per criterion.
    Verify {
        /// Criterion numbers to run, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

// Floats rounded to 15 significant digits.
fn round_floats(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.14e}").parse().expect("formatted float");
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let value = round_floats(serde_json::to_value(v).expect("serialisable report"));
    let mut s = serde_json::to_string_pretty(&value).expect("serialisable report");
    s.push('\n');
    s
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn region(sf: &SecularFunction, s: &SearchArgs, cfg: &FinderConfig) -> Result<SearchRegion> {
    let tau_min = match s.tau_min {
        Some(t) => t,
        None => -band_depth(sf, cfg)?,
    };
    SearchRegion::new(s.sigma_min, s.sigma_max, tau_min, s.tau_cap)
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Classify { graph, out } => {
            emit(&out, &json(&compute_invariants(&graph.load()?)))?;
        }
        Command::SecularPoly { graph, out } => {
            emit(&out, &symbolic_secular(&graph.load()?)?.to_term_list())?;
        }
        Command::Resonances { graph, search, out } => {
            let cfg = search.config()?;
            let sf = SecularFunction::from_graph(&graph.load()?, true);
            let rep = find_resonances(&sf, &region(&sf, &search, &cfg)?, &cfg)?;
            let mut s = String::from("sigma,tau,residual,multiplicity,t_norm\n");
            for r in &rep.resonances {
                let t = r.state.as_ref().map_or(f64::NAN, |st| st.t_norm);
                let _ = writeln!(s, "{},{},{},{},{}", num(r.k.re), num(r.k.im), num(r.residual), r.multiplicity, num(t));
            }
            emit(&out, &s)?;
        }
        Command::Spectrum { graph, search, out } => {
            let cfg = search.config()?;
            let ev = compact_eigenvalues(&graph.load()?, search.sigma_max, &cfg)?;
            let mut s = String::from("k,multiplicity\n");
            for (k, m) in ev {
                let _ = writeln!(s, "{},{m}", num(k));
            }
            emit(&out, &s)?;
        }
        Command::Weyl { graph, search, out } => {
            let cfg = search.config()?;
            let sf = SecularFunction::from_graph(&graph.load()?, true);
            let region = SearchRegion { sigma_min: cfg.k_floor.min(search.sigma_max), ..region(&sf, &search, &cfg)? };
            let rep = find_resonances(&sf, &region, &cfg)?;
            emit(&out, &json(&weyl_fit(&rep.resonances, search.sigma_max, sf.total_length())?))?;
        }
        Command::Neps { graph, search, eps, json: as_json, out } => {
            let cfg = FinderConfig { extract_states: false, ..search.config()? };
            let grid = log_grid(eps.eps_min, eps.eps_max, eps.eps_steps)?;
            let sf = SecularFunction::from_graph(&graph.load()?, true);
            let (report, _) = n_eps_curve(&sf, search.sigma_max, &grid, &cfg)?;
            if as_json {
                emit(&out, &json(&report))?;
            } else {
                let mut s = String::from("eps,count,density\n");
                for p in &report.eps_grid {
                    let _ = writeln!(s, "{},{},{}", num(p.eps), p.count, num(p.density));
                }
                emit(&out, &s)?;
            }
        }
        Command::EstimateH { graph, search, samples, seed, out } => {
            let cfg = search.config()?;
            let est = estimate_h(&graph.load()?, samples, search.sigma_max, seed, &cfg)?;
            let per: Vec<String> = est.per_sample.iter().map(|&h| num(h)).collect();
            let text = format!(
                "{{\n  \"h\": \"{}\",\n  \"spread\": \"{}\",\n  \"samples\": {},\n  \"seed\": {},\n  \"k_max\": \"{}\",\n  \"per_sample\": [{}]\n}}\n",
                num(est.h),
                num(est.spread),
                samples,
                seed,
                num(est.k_max),
                per.iter().map(|p| format!("\"{p}\"")).collect::<Vec<_>>().join(", ")
            );
            emit(&out, &text)?;
        }
        Command::BranchTrace { graph, base, u_max, u_step, json: as_json, out } => {
            let g = graph.load()?;
            if !(u_max > 0.0 && u_step > 0.0 && u_step <= u_max) {
                return Err(Error::InvalidParameter("need 0 < --u-step <= --u-max".into()));
            }
            let base = match base {
                Some(b) if b.len() == 2 => [b[0], b[1]],
                Some(b) => return Err(Error::InvalidParameter(format!("--base needs 2 angles, got {}", b.len()))),
                None => {
                    if g.num_edges() != 2 {
                        return Err(Error::Unsupported("branch tracing needs exactly 2 edges".into()));
                    }
                    *torus_zeros_2d(&symbolic_secular(&g)?.poly, 64)
                        .first()
                        .ok_or_else(|| Error::InvalidParameter("secular polynomial has no real torus zero".into()))?
                }
            };
            let tr = branch_trace(&g, base, &default_u_grid(u_max, u_step))?;
            if as_json {
                emit(&out, &json(&tr))?;
            } else {
                let mut s = String::from("u,b,tau\n");
                for p in &tr.samples {
                    let _ = writeln!(s, "{},{},{}", num(p.u), num(p.b), num(p.tau));
                }
                emit(&out, &s)?;
                eprintln!("c = {}, dtau/du(0) = {}, m = ({}, {})", num(tr.c), num(tr.fitted_slope), num(tr.weights[0]), num(tr.weights[1]));
            }
        }
        Command::Verify { only, out } => {
            if let Some(bad) = only.iter().find(|&&id| id == 0 || id as usize > verify::CRITERIA.len()) {
                return Err(Error::InvalidParameter(format!("no criterion {bad}")));
            }
            let results = verify::run(&only, &FinderConfig::default());
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(s, "{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            let _ = writeln!(s, "{} of {} criteria passed", results.len() - failed, results.len());
            emit(&out, &s)?;
            return Ok(if failed == 0 { 0 } else { 2 });
        }
    }
    Ok(0)
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() { 2 } else { 1 }
        }
    }
}
