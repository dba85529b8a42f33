//! Command-line front end. Every command builds a JSON value first; the text
//! format is rendered from that value.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{analyze, distance_d, internal_qualified_edges, SearchCaps};
use crate::bounds::{certify, evaluate_bounds, Verdict};
use crate::construct::{construct_rate1, construct_theorem4, Theorem4Options};
use crate::error::{Error, Result};
use crate::fixtures::fixtures;
use crate::graph::{CdsGraph, EdgeRef};
use crate::scheme::LinearScheme;
use crate::verify::{verify, Method};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cdskit",
    version,
    about = "Analyze CDS graphs, build and verify linear schemes"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rank,
    Exhaustive,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rank => Method::Rank,
            MethodArg::Exhaustive => Method::Exhaustive,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct CapArgs {
    /// Residing paths enumerated per internal edge.
    #[arg(long, env = "CDS_PATH_CAP", default_value_t = SearchCaps::default().path_cap as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub path_cap: u64,

    /// Search nodes expanded by the cover and component searches.
    #[arg(long, env = "CDS_WORK_CAP", default_value_t = SearchCaps::default().work_cap,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub work_cap: u64,
}

impl CapArgs {
    fn caps(&self) -> SearchCaps {
        SearchCaps {
            path_cap: self.path_cap as usize,
            work_cap: self.work_cap,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Rank)]
    pub method: MethodArg,

    /// Largest p^(L+Lz) the exhaustive method may enumerate per edge.
    #[arg(long, env = "CDS_EXHAUSTIVE_LIMIT", default_value_t = crate::verify::DEFAULT_EXHAUSTIVE_LIMIT,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub limit: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute d, rho, Q and the resulting noise-rate bounds.
    Analyze {
        graph: PathBuf,
        /// Also report the bound for schemes with N = L.
        #[arg(long)]
        assert_n_eq_l: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Build a scheme.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Check correctness and security of a scheme on every edge.
    Verify {
        graph: PathBuf,
        scheme: PathBuf,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Verify a scheme and compare its noise rate with the graph's bounds.
    Certify {
        graph: PathBuf,
        scheme: PathBuf,
        #[command(flatten)]
        verify: VerifyArgs,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Write the bundled example instances.
    Fixtures {
        #[arg(long, value_name = "DIR")]
        emit: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConstructKind {
    /// Rate-1 scheme for a graph without internal qualified edges.
    Rate1 {
        graph: PathBuf,
        #[arg(long)]
        p: Option<u64>,
        /// Directory for scheme.json and recipe.json; stdout when absent.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// The cyclic (k, d) instance and its (d-1)/d scheme.
    Thm4 {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: Option<u64>,
        /// Directory for graph.json, scheme.json and recipe.json; stdout when absent.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Result of one command before rendering.
struct Outcome {
    value: Value,
    text: String,
    code: i32,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, format!("{contents}\n")).map_err(|e| io_err(path, e))
}

pub fn load_graph(path: &Path) -> Result<CdsGraph> {
    let text = read(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Json {
        context: format!("{}: graph field {}", path.display(), e.path()),
        source: e.into_inner(),
    })
}

pub fn load_scheme(path: &Path) -> Result<LinearScheme> {
    let text = read(path)?;
    LinearScheme::from_json(&text).map_err(|e| match e {
        Error::Json { context, source } => Error::Json {
            context: format!("{}: {context}", path.display()),
            source,
        },
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn distinct(a: &Path, b: &Path) -> Result<()> {
    if a == b {
        return Err(Error::input(format!(
            "graph and scheme paths must differ, both are {}",
            a.display()
        )));
    }
    Ok(())
}

fn s(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn edge_list(v: &Value) -> String {
    match v.as_array() {
        Some(a) if !a.is_empty() => a
            .iter()
            .map(|e| format!("{{{},{}}}", s(&e["a"]), s(&e["b"])))
            .collect::<Vec<_>>()
            .join(" "),
        _ => "none".into(),
    }
}

fn render_analysis(v: &Value) -> String {
    let p = &v["params"];
    let b = &v["bounds"];
    let mut out = String::new();
    out += &format!(
        "graph: {}+{} nodes, {} edges\n",
        s(&v["graph"]["a_count"]),
        s(&v["graph"]["b_count"]),
        s(&v["graph"]["edges"])
    );
    for w in v["violations"].as_array().into_iter().flatten() {
        out += &format!("warning: {}\n", s(w));
    }
    out += &format!(
        "internal qualified edges: {}\n",
        edge_list(&p["internal_edges"])
    );
    out += &format!("d = {}\n", s(&p["d"]));
    out += &format!("rho = {}\n", s(&p["rho"]));
    out += &format!("Q = {}\n", s(&p["q"]));
    out += &format!("bound = {} ({})\n", s(&b["thm2_bound"]), s(&b["thm2_case"]));
    if !b["thm3_bound"].is_null() {
        out += &format!("bound (N = L) = {}\n", s(&b["thm3_bound"]));
    }
    out += &format!("capacity one: {}\n", s(&b["capacity_one"]));
    if p["path_cap_hit"] == Value::Bool(true) {
        out += "note: path cap reached; rho and Q are upper bounds\n";
    }
    out
}

fn render_report(v: &Value) -> String {
    let mut out = String::new();
    for e in v["verdicts"].as_array().into_iter().flatten() {
        let h = if e["rank_entropy"].is_null() {
            &e["exhaustive_entropy"]
        } else {
            &e["rank_entropy"]
        };
        out += &format!(
            "{{{},{}}} {} H = {} {}\n",
            s(&e["edge"]["a"]),
            s(&e["edge"]["b"]),
            s(&e["label"]),
            s(h),
            if e["pass"] == Value::Bool(true) {
                "pass"
            } else {
                "FAIL"
            }
        );
        if !e["note"].is_null() {
            out += &format!("  {}\n", s(&e["note"]));
        }
    }
    for n in v["h_rank_deficient"].as_array().into_iter().flatten() {
        out += &format!("noise matrix of {} is rank deficient\n", s(n));
    }
    for n in v["inconsistencies"].as_array().into_iter().flatten() {
        out += &format!("inconsistency: {}\n", s(n));
    }
    out += &format!(
        "noise rate = {}, communication rate = {}\n",
        s(&v["rates"]["noise_rate"]),
        s(&v["rates"]["comm_rate"])
    );
    let failing: Vec<String> = v["verdicts"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|e| e["pass"] != Value::Bool(true))
        .map(|e| format!("{{{},{}}}", s(&e["edge"]["a"]), s(&e["edge"]["b"])))
        .collect();
    if v["pass"] == Value::Bool(true) {
        out += "overall: pass\n";
    } else if failing.is_empty() {
        out += "overall: FAIL\n";
    } else {
        out += &format!("overall: FAIL ({})\n", failing.join(" "));
    }
    out
}

fn render_certificate(v: &Value) -> String {
    let c = &v["certificate"];
    let verdict = &c["verdict"];
    let mut out = format!(
        "noise rate = {}\nbound = {} ({})\nverdict: {}",
        s(&c["rates"]["noise_rate"]),
        s(&c["bound"]),
        s(&c["bound_source"]),
        s(&verdict["kind"])
    );
    if !verdict["gap"].is_null() {
        out += &format!(" {}", s(&verdict["gap"]));
    }
    if !verdict["excess"].is_null() {
        out += &format!(
            " (excess {}; analyzer and verifier disagree)",
            s(&verdict["excess"])
        );
    }
    out.push('\n');
    out
}

fn render_construct(v: &Value) -> String {
    let r = &v["recipe"];
    let mut out = format!(
        "{} scheme over F_{} ({})\n",
        s(&r["kind"]),
        s(&r["prime"]["p"]),
        s(&r["prime"]["source"])
    );
    let sc = &v["scheme"];
    out += &format!(
        "L = {}, Lz = {}, N = {}\n",
        s(&sc["L"]),
        s(&sc["Lz"]),
        s(&sc["N"])
    );
    for f in v["files"].as_array().into_iter().flatten() {
        out += &format!("wrote {}\n", s(f));
    }
    out += &format!("verification sha256 {}\n", s(&r["verification_sha256"]));
    out
}

fn cmd_analyze(graph: &Path, assert_n_eq_l: bool, caps: SearchCaps) -> Result<Outcome> {
    let g = load_graph(graph)?;
    let violations: Vec<String> = g.validate().iter().map(|v| v.to_string()).collect();
    let summary = json!({
        "a_count": g.a_count(),
        "b_count": g.b_count(),
        "edges": g.edges().len(),
    });
    let params = match analyze(&g, &caps) {
        Ok(p) => p,
        Err(Error::Budget { reason, best }) => {
            let (d, _) = distance_d(&g);
            let internal: Vec<EdgeRef> = internal_qualified_edges(&g)
                .iter()
                .map(EdgeRef::from)
                .collect();
            let value = json!({
                "graph": summary,
                "budget_exceeded": reason,
                "partial": {
                    "internal_edges": internal,
                    "d": d,
                    "rho_upper_bound": best,
                },
            });
            let text = format!(
                "budget exceeded: {reason}\nd = {}\nbest rho found = {}\n",
                s(&value["partial"]["d"]),
                s(&value["partial"]["rho_upper_bound"])
            );
            return Ok(Outcome {
                value,
                text,
                code: EXIT_BUDGET,
            });
        }
        Err(e) => return Err(e),
    };
    let bounds = evaluate_bounds(&params, assert_n_eq_l);
    let value = json!({
        "graph": summary,
        "violations": violations,
        "params": to_value(&params),
        "bounds": to_value(&bounds),
    });
    let text = render_analysis(&value);
    Ok(Outcome {
        value,
        text,
        code: EXIT_OK,
    })
}

fn cmd_verify(graph: &Path, scheme: &Path, args: &VerifyArgs) -> Result<Outcome> {
    distinct(graph, scheme)?;
    let g = load_graph(graph)?;
    let sc = load_scheme(scheme)?;
    let report = verify(&g, &sc, args.method.into(), args.limit)?;
    let value = to_value(&report);
    let text = render_report(&value);
    Ok(Outcome {
        value,
        text,
        code: if report.pass { EXIT_OK } else { EXIT_FAIL },
    })
}

fn cmd_certify(
    graph: &Path,
    scheme: &Path,
    args: &VerifyArgs,
    caps: SearchCaps,
) -> Result<Outcome> {
    distinct(graph, scheme)?;
    let g = load_graph(graph)?;
    let sc = load_scheme(scheme)?;
    let report = verify(&g, &sc, args.method.into(), args.limit)?;
    if !report.pass {
        let value = json!({ "report": to_value(&report) });
        let text = format!(
            "{}refused: scheme fails verification\n",
            render_report(&value["report"])
        );
        return Ok(Outcome {
            value,
            text,
            code: EXIT_FAIL,
        });
    }
    let params = analyze(&g, &caps)?;
    let cert = certify(&g, &params, &sc, &report)?;
    let code = match cert.verdict {
        Verdict::BoundViolating { .. } => EXIT_FAIL,
        _ => EXIT_OK,
    };
    let value = json!({ "certificate": to_value(&cert) });
    let text = render_certificate(&value);
    Ok(Outcome { value, text, code })
}

fn emit_construction(
    out_dir: Option<&Path>,
    graph: Option<&CdsGraph>,
    scheme: &LinearScheme,
    recipe: &crate::construct::ConstructionRecipe,
) -> Result<Outcome> {
    let mut files = Vec::new();
    let mut value = json!({
        "scheme": to_value(scheme),
        "recipe": to_value(recipe),
    });
    if let Some(g) = graph {
        value["graph"] = to_value(g);
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        if let Some(g) = graph {
            let p = dir.join("graph.json");
            write_file(&p, &pretty(g))?;
            files.push(p.display().to_string());
        }
        for (name, body) in [
            ("scheme.json", pretty(scheme)),
            ("recipe.json", pretty(recipe)),
        ] {
            let p = dir.join(name);
            write_file(&p, &body)?;
            files.push(p.display().to_string());
        }
    }
    value["files"] = to_value(&files);
    let text = render_construct(&value);
    Ok(Outcome {
        value,
        text,
        code: EXIT_OK,
    })
}

fn cmd_construct(kind: &ConstructKind) -> Result<Outcome> {
    match kind {
        ConstructKind::Rate1 { graph, p, out_dir } => {
            let g = load_graph(graph)?;
            let (scheme, recipe) = construct_rate1(&g, *p)?;
            emit_construction(out_dir.as_deref(), None, &scheme, &recipe)
        }
        ConstructKind::Thm4 { k, d, p, out_dir } => {
            let opts = Theorem4Options {
                p: *p,
                ..Default::default()
            };
            let (g, scheme, recipe) = construct_theorem4(*k, *d, &opts)?;
            emit_construction(out_dir.as_deref(), Some(&g), &scheme, &recipe)
        }
    }
}

fn cmd_fixtures(dir: &Path) -> Result<Outcome> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    for fx in fixtures()? {
        let mut put = |suffix: &str, body: String| -> Result<()> {
            let p = dir.join(format!("{}.{suffix}.json", fx.name));
            write_file(&p, &body)?;
            files.push(p.display().to_string());
            Ok(())
        };
        put("graph", pretty(&fx.graph))?;
        if let Some(sc) = &fx.scheme {
            put("scheme", pretty(sc))?;
        }
        put("expected", pretty(&fx.expected))?;
    }
    let text = files.iter().map(|f| format!("wrote {f}\n")).collect();
    Ok(Outcome {
        value: json!({ "files": files }),
        text,
        code: EXIT_OK,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Refusal(_) => EXIT_FAIL,
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Input(_) | Error::Json { .. } | Error::Io { .. } => EXIT_INPUT,
    }
}

pub fn execute(cli: &Cli) -> Result<(Value, String, i32)> {
    let o = match &cli.command {
        Command::Analyze {
            graph,
            assert_n_eq_l,
            caps,
        } => cmd_analyze(graph, *assert_n_eq_l, caps.caps())?,
        Command::Construct { kind } => cmd_construct(kind)?,
        Command::Verify {
            graph,
            scheme,
            verify,
        } => cmd_verify(graph, scheme, verify)?,
        Command::Certify {
            graph,
            scheme,
            verify,
            caps,
        } => cmd_certify(graph, scheme, verify, caps.caps())?,
        Command::Fixtures { emit } => cmd_fixtures(emit)?,
    };
    Ok((o.value, o.text, o.code))
}

/// Parses `args`, runs the command and writes its output. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok((value, text, code)) => {
            let _ = match cli.format {
                Format::Json => writeln!(out, "{}", pretty(&value)),
                Format::Text => write!(out, "{text}"),
            };
            code
        }
        Err(e) => {
            let code = exit_code(&e);
            if cli.format == Format::Json {
                let _ = writeln!(
                    out,
                    "{}",
                    pretty(&json!({ "error": e.to_string(), "exit_code": code }))
                );
            }
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}
