//! Command-line front end: construct, solve, verify, knot, export.
//!
//! Machine-readable output goes to files only (written to a temporary
//! sibling and renamed into place); standard output gets a short summary.
//! Exit status: 0 success, 1 a FAIL verdict or runtime failure, 2 usage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::construction::{build_x, ConstructionParams};
use crate::error::{Error, Result};
use crate::exec::{with_jobs, Exec};
use crate::geometry::Point3;
use crate::graph::{EmbeddedGraph, Role};
use crate::knot::{certify, Verdict};
use crate::lemmas::{verify, LemmaParams, LemmaReport, LEMMA_IDS};
use crate::opt::{solve_decomposed, solve_minimal_tree, ClusterSpec, OptOptions, TerminalSet};

#[derive(Debug, Parser)]
#[command(name = "ksmt", version, about = "Steiner minimal trees on the sphere and the knotted tree construction")]
pub struct Cli {
    /// Seed for every random choice (perturbation trials, projection directions).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// key=value file with gamma, delta, eps, seed, jobs, trials. Flags win.
    #[arg(long, global = true)]
    pub params_file: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ParamArgs {
    /// Split parameter (default 0.1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Offset of the arc ends from the equator (default 0.05).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Chain spacing scale (default 0.05).
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the terminal set X as a points file.
    Construct {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        output: PathBuf,
        /// Also check the tree structure at the given and at halved parameters.
        #[arg(long)]
        strict: bool,
    },
    /// Solve a points file (or X for the parameters) and write the tree.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// Points file from `construct`; X is built from the parameters if absent.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Perturbation trials in the local optimality report (default 200).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run lemma checks.
    Verify {
        /// Lemma id or `all`.
        #[arg(long, default_value = "all")]
        lemma: String,
        /// Report file (JSON array of reports).
        #[arg(long)]
        json: Option<PathBuf>,
        /// gamma,delta,eps
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Certify a tree file as knotted or unknotted.
    Knot {
        #[arg(long)]
        tree: PathBuf,
        /// Points file whose labels name the tree's terminals.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Diagram of the witness closure.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Convert a tree file to another format.
    Export {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Obj)]
        format: ExportFormat,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Obj,
    Json,
}

/// Effective settings after merging defaults, the params file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub construction: ConstructionParams,
    pub seed: u64,
    pub jobs: usize,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { construction: ConstructionParams::default(), seed: 0, jobs: 0, trials: 200 }
    }
}

impl RunConfig {
    fn lemma_params(&self) -> LemmaParams {
        LemmaParams {
            gamma: self.construction.gamma,
            delta: self.construction.delta,
            eps: self.construction.eps,
            seed: self.seed,
            trials: self.trials,
            exec: Exec::Parallel,
        }
    }
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_params_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("params file line {}: expected key=value", no + 1)))?;
        let k = k.trim().to_string();
        if !["gamma", "delta", "eps", "seed", "jobs", "trials"].contains(&k.as_str()) {
            return Err(Error::Usage(format!("params file line {}: unknown key `{k}`", no + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Usage(format!("bad value `{v}` for {key}")))
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.params_file {
        let file = parse_params_file(&fs::read_to_string(path)?)?;
        for (k, v) in &file {
            match k.as_str() {
                "gamma" => cfg.construction.gamma = parse_value(k, v)?,
                "delta" => cfg.construction.delta = parse_value(k, v)?,
                "eps" => cfg.construction.eps = parse_value(k, v)?,
                "seed" => cfg.seed = parse_value(k, v)?,
                "jobs" => cfg.jobs = parse_value(k, v)?,
                "trials" => cfg.trials = parse_value(k, v)?,
                _ => unreachable!("keys checked while parsing"),
            }
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    let (params, trials) = match &cli.command {
        Command::Construct { params, .. } => (Some(params.clone()), None),
        Command::Solve { params, trials, .. } => (Some(params.clone()), *trials),
        Command::Verify { params, trials, .. } => {
            if params.as_ref().is_some_and(|v| v.len() != 3) {
                return Err(Error::Usage("--params takes gamma,delta,eps".into()));
            }
            let p = params.as_ref().map(|v| ParamArgs { gamma: Some(v[0]), delta: Some(v[1]), eps: Some(v[2]) });
            (p, *trials)
        }
        _ => (None, None),
    };
    if let Some(p) = params {
        if let Some(g) = p.gamma {
            cfg.construction.gamma = g;
        }
        if let Some(d) = p.delta {
            cfg.construction.delta = d;
        }
        if let Some(e) = p.eps {
            cfg.construction.eps = e;
        }
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    cfg.construction.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| -> Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub label: String,
    pub xyz: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    pub n: usize,
}

/// Points file: terminals in order, the chain labels, and the parameters
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsFile {
    pub points: Vec<LabeledPoint>,
    pub chain: Vec<String>,
    pub provenance: Option<Provenance>,
}

impl PointsFile {
    pub fn for_params(params: &ConstructionParams) -> Result<Self> {
        let (x, named) = build_x(params)?;
        Ok(PointsFile {
            points: x.points.iter().map(|(l, p)| LabeledPoint { label: l.clone(), xyz: *p }).collect(),
            chain: named.chain.clone(),
            provenance: Some(Provenance { gamma: params.gamma, delta: params.delta, eps: params.eps, n: named.n() }),
        })
    }

    pub fn terminal_set(&self) -> Result<TerminalSet> {
        TerminalSet::new(self.points.iter().map(|p| (p.label.clone(), p.xyz)).collect(), vec![])
    }
}

fn read_points(path: &Path) -> Result<PointsFile> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn read_tree(path: &Path) -> Result<EmbeddedGraph> {
    EmbeddedGraph::from_json(&fs::read_to_string(path)?)
}

/// Wavefront OBJ: one `v` per vertex and one `l` per edge (1-based).
pub fn to_obj(g: &EmbeddedGraph) -> String {
    let mut s = format!("# {} vertices, {} edges, length {:.12}\n", g.vertices.len(), g.edges.len(), g.length);
    for v in &g.vertices {
        s.push_str(&format!("v {:.15} {:.15} {:.15}\n", v.xyz.x, v.xyz.y, v.xyz.z));
    }
    for &(a, b) in &g.edges {
        s.push_str(&format!("l {} {}\n", a + 1, b + 1));
    }
    s
}

/// Parses argv (including the program name) and runs; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return 2;
        }
    };
    let jobs = cfg.jobs;
    match with_jobs(jobs, || {
        let mut buf = Vec::new();
        let r = execute(&cli.command, &cfg, &mut buf);
        (r, buf)
    }) {
        (Ok(code), buf) => {
            let _ = out.write_all(&buf);
            code
        }
        (Err(e), buf) => {
            let _ = out.write_all(&buf);
            let _ = writeln!(out, "error: {e}");
            if matches!(e, Error::Usage(_) | Error::UnknownLemma(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cmd: &Command, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<i32> {
    let opts = OptOptions::default();
    match cmd {
        Command::Construct { output, strict, .. } => {
            let mut runs = vec![cfg.construction];
            if *strict {
                runs.push(cfg.construction.halved());
            }
            let file = PointsFile::for_params(&cfg.construction)?;
            write_json(output, &file)?;
            writeln!(out, "wrote {} points (n = {}) to {}", file.points.len(), file.chain.len(), output.display())?;
            let mut code = 0;
            if *strict {
                for p in runs {
                    let (x, named) = build_x(&p)?;
                    let sol = solve_decomposed(&x, &ClusterSpec::for_chain(named.n()), cfg.trials, cfg.seed, &opts)?;
                    let ok = sol.graph.steiner_count() == 6 && sol.report.pass;
                    writeln!(
                        out,
                        "strict gamma={} delta={} eps={}: {} branch points, local optimality {}",
                        p.gamma,
                        p.delta,
                        p.eps,
                        sol.graph.steiner_count(),
                        if ok { "PASS" } else { "FAIL" }
                    )?;
                    if !ok {
                        code = 1;
                    }
                }
            }
            Ok(code)
        }
        Command::Solve { points, output, .. } => {
            let file = match points {
                Some(p) => read_points(p)?,
                None => PointsFile::for_params(&cfg.construction)?,
            };
            let ts = file.terminal_set()?;
            if file.chain.len() >= 3 {
                let sol = solve_decomposed(&ts, &ClusterSpec::for_chain(file.chain.len()), cfg.trials, cfg.seed, &opts)?;
                write_json(output, &sol.graph)?;
                let r = &sol.report;
                writeln!(out, "length {:.10}, {} branch points", sol.graph.length, sol.graph.steiner_count())?;
                writeln!(
                    out,
                    "local optimality {}: direction sums {:.2e}, best improvement {:.2e} over {} trials",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.max_direction_sum,
                    r.best_improvement(),
                    r.trials
                )?;
                Ok(if r.pass { 0 } else { 1 })
            } else {
                let sol = solve_minimal_tree(&ts.coords(), &opts)?;
                write_json(output, &sol.graph)?;
                writeln!(
                    out,
                    "length {:.10}, {} branch points, {} topologies",
                    sol.length(),
                    sol.graph.steiner_count(),
                    sol.topologies_tried
                )?;
                Ok(0)
            }
        }
        Command::Verify { lemma, json, .. } => {
            let params = cfg.lemma_params();
            let reports: Vec<LemmaReport> = if lemma == "all" {
                params.exec.map(&LEMMA_IDS, |id| verify(id, &params)).into_iter().collect::<Result<_>>()?
            } else {
                vec![verify(lemma, &params)?]
            };
            for r in &reports {
                let verdict = if r.passed() { "PASS" } else { "FAIL" };
                writeln!(out, "{verdict} {:<12} margin {:.3e}  {}", r.id, r.margin, r.claim)?;
                for c in r.failed_checks() {
                    writeln!(out, "     failed: {} (value {:.10}, bound {:.10})", c.name, c.value, c.bound)?;
                }
                for d in &r.diagnostics {
                    writeln!(out, "     error: {d}")?;
                }
            }
            if let Some(path) = json {
                write_json(path, &reports)?;
            }
            Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 1 })
        }
        Command::Knot { tree, points, output, svg } => {
            let g = read_tree(tree)?;
            let labels: Option<Vec<String>> = match points {
                Some(p) => {
                    let file = read_points(p)?;
                    let terminals = g.vertices.iter().take_while(|v| v.role == Role::Terminal).count();
                    if file.points.len() != terminals {
                        return Err(Error::Usage(format!(
                            "points file has {} labels, tree has {terminals} leading terminals",
                            file.points.len()
                        )));
                    }
                    let mut l: Vec<String> = file.points.into_iter().map(|p| p.label).collect();
                    l.extend((l.len()..g.vertices.len()).map(|i| format!("s{i}")));
                    Some(l)
                }
                None => None,
            };
            let (cert, witness) = certify(&g, labels.as_deref(), cfg.seed, Exec::Parallel)?;
            if let Some(path) = output {
                write_json(path, &cert)?;
            }
            if let Some(path) = svg {
                let pic = witness.as_ref().and_then(|w| w.diagram.to_svg());
                match pic {
                    Some(s) => write_atomic(path, s.as_bytes())?,
                    None => writeln!(out, "no diagram to draw (planar tree)")?,
                }
            }
            writeln!(out, "{}", cert.verdict)?;
            if cert.verdict != Verdict::PlanarUnknotted {
                let pair = cert.leaf_pair.as_ref().map(|p| format!("{}-{}", p[0], p[1])).unwrap_or_default();
                writeln!(
                    out,
                    "leaf pair {pair}: {} crossings, determinant {}, {} pairs checked",
                    cert.crossings, cert.determinant, cert.pairs_checked
                )?;
            }
            Ok(0)
        }
        Command::Export { tree, format, output } => {
            let g = read_tree(tree)?;
            match format {
                ExportFormat::Obj => write_atomic(output, to_obj(&g).as_bytes())?,
                ExportFormat::Json => write_json(output, &g)?,
            }
            writeln!(out, "wrote {} vertices, {} edges to {}", g.vertices.len(), g.edges.len(), output.display())?;
            Ok(0)
        }
    }
}
