//! `recsum`: analyze a recurrence, certify a bound, search for solutions, verify them.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration error,
//! 3 hypothesis refusal, 4 verification failure.

mod config;
mod report;

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use recsum_core::bounds::{check_hypotheses, final_bound_capped, CertificateBounds};
use recsum_core::recurrence::{binet_decomposition_capped, degeneracy_witness, spectral_analysis, Dominance};
use recsum_core::search::{search, SearchOptions, SolutionRecord};
use recsum_core::{verify_solution, Error};

use config::{ConfigError, Overrides, RunConfig};

const EXIT_INTERNAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_REFUSED: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "recsum", version, about = "S-unit sums of linear recurrence terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic roots, dominance, degeneracy and Binet coefficients.
    Analyze(Common),
    /// Explicit bound certificate for all solutions.
    Certify(Common),
    /// Exhaustive search in a box; solutions as JSON lines.
    Search(Common),
    /// Re-check a solutions file, optionally against a certificate.
    Verify {
        #[command(flatten)]
        common: Common,
        /// JSON-lines file produced by `search`.
        #[arg(long)]
        solutions: PathBuf,
        /// Certificate report produced by `certify`.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long)]
    zmax: Option<String>,
    /// Comma-separated, pairwise coprime.
    #[arg(long, value_delimiter = ',')]
    moduli: Option<Vec<u64>>,
    #[arg(long)]
    precision_cap: Option<u32>,
    #[arg(long)]
    strict_dominance: Option<bool>,
    /// Report only solutions satisfying the dominance condition.
    #[arg(long)]
    dominance_only: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// A failed run: exit code plus message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: format!("config error: {e}"),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        message: format!("internal error: {e}"),
    }
}

impl Common {
    fn load(&self) -> Result<RunConfig, Failure> {
        let o = Overrides {
            nmax: self.nmax,
            zmax: self.zmax.clone(),
            moduli: self.moduli.clone(),
            precision_cap: self.precision_cap,
            strict_dominance: self.strict_dominance,
            dominance_only: self.dominance_only,
        };
        Ok(RunConfig::load(&self.config)?.resolve(&o))
    }

    fn render(&self, v: &Value) -> String {
        match self.format {
            Format::Json => serde_json::to_string_pretty(v).expect("json") + "\n",
            Format::Text => report::render_text(v),
        }
    }

    fn emit(&self, v: &Value) -> Result<(), Failure> {
        write_out(self.out.as_deref(), &self.render(v))
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| internal(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(internal)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(c) => analyze(c),
        Command::Certify(c) => certify(c),
        Command::Search(c) => run_search(c),
        Command::Verify {
            common,
            solutions,
            certificate,
        } => verify(common, solutions, certificate.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn analyze(c: &Common) -> Result<(), Failure> {
    let cfg = c.load()?;
    let inst = cfg.instance()?;
    let cap = cfg.precision_cap();
    let rec = &inst.rec;
    let spec = spectral_analysis(rec, cap).map_err(internal)?;
    let witness = degeneracy_witness(rec).map_err(internal)?;
    let dominant = spec.dominant_index();
    let binet = match spec.dominance {
        Dominance::Dominant(_) => match binet_decomposition_capped(rec, &spec, cap) {
            Ok(bf) => json!({
                "precision": bf.precision,
                "eta1": report::ball(&bf.eta1, 20),
                "coefficients": bf.coeff_polys.iter()
                    .map(|v| v.iter().map(|b| report::ball(b, 20)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
            Err(e) => json!({ "error": e.reason_code() }),
        },
        _ => Value::Null,
    };
    let known = |b: bool| if dominant.is_some() { json!(b) } else { Value::Null };
    let verdict = match check_hypotheses(&inst, cap) {
        Ok(_) => "ok".to_string(),
        Err(e) => e.reason_code().to_string(),
    };
    let mut m = report::envelope("analysis", &cfg);
    m.insert("characteristic_polynomial".into(), json!(report::poly_string(&spec.char_poly)));
    m.insert("gamma".into(), json!(rec.gamma().to_string()));
    m.insert(
        "roots".into(),
        serde_json::to_value(spec.roots.iter().map(|r| r.to_json(20)).collect::<Vec<_>>()).expect("json"),
    );
    m.insert("dominance".into(), json!(spec.dominance.label()));
    m.insert("dominant_index".into(), json!(dominant));
    m.insert("degenerate".into(), json!(witness.is_some()));
    m.insert("degeneracy_witness".into(), json!(witness));
    m.insert("dominant_is_integer_gt1".into(), known(spec.dominant_is_integer_gt1));
    m.insert("binet".into(), binet);
    m.insert(
        "hypotheses".into(),
        json!({
            "non_degenerate": witness.is_none(),
            "dominant_root": dominant.is_some(),
            "dominant_root_simple": known(spec.dominant_is_simple),
            "dominant_root_real": known(spec.dominant_is_real),
            "dominant_root_not_integer_gt1": known(!spec.dominant_is_integer_gt1),
            "verdict": verdict,
        }),
    );
    c.emit(&Value::Object(m))
}

fn certify(c: &Common) -> Result<(), Failure> {
    let cfg = c.load()?;
    let inst = cfg.instance()?;
    let mut m = report::envelope("certificate", &cfg);
    let outcome = final_bound_capped(&inst, cfg.precision_cap());
    let refusal = match outcome {
        Ok(cert) => {
            m.insert("status".into(), json!("certified"));
            m.insert("certificate".into(), cert.to_json());
            None
        }
        Err(e) => {
            m.insert("status".into(), json!("refused"));
            m.insert("reason".into(), json!(e.reason_code()));
            m.insert("message".into(), json!(e.to_string()));
            Some(e)
        }
    };
    c.emit(&Value::Object(m))?;
    match refusal {
        None => Ok(()),
        Some(e) => Err(Failure {
            code: EXIT_REFUSED,
            message: format!("refused ({}): {e}", e.reason_code()),
        }),
    }
}

fn run_search(c: &Common) -> Result<(), Failure> {
    let cfg = c.load()?;
    let inst = cfg.instance()?;
    let opts = SearchOptions::new(cfg.nmax()?, cfg.zmax()?)
        .with_moduli(cfg.moduli.clone().unwrap_or_default())
        .with_dominance_only(cfg.dominance_only.unwrap_or(false))
        .with_index_cap(cfg.index_cap());
    let start = Instant::now();
    let outcome = search(&inst, &opts).map_err(|e| match e {
        Error::SearchLimits(_) | Error::Domain(_) => Failure {
            code: EXIT_CONFIG,
            message: format!("config error: {e}"),
        },
        e => internal(e),
    })?;
    let elapsed = start.elapsed();
    let mut lines = String::new();
    for s in &outcome.solutions {
        lines.push_str(&s.to_json_line());
        lines.push('\n');
    }
    write_out(c.out.as_deref(), &lines)?;
    let mut m = report::envelope("search_summary", &cfg);
    m.insert("count".into(), json!(outcome.solutions.len()));
    m.insert("elapsed_ms".into(), json!(elapsed.as_millis() as u64));
    m.insert("stats".into(), serde_json::to_value(&outcome.stats).expect("json"));
    eprint!("{}", c.render(&Value::Object(m)));
    Ok(())
}

fn load_certificate(path: &Path) -> Result<CertificateBounds, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    // Accept a full certify report or the bare certificate object.
    let cert = v.get("certificate").unwrap_or(&v);
    CertificateBounds::from_json(cert).map_err(|e| Failure::from(ConfigError(format!("{}: {e}", path.display()))))
}

fn verify(c: &Common, solutions: &Path, certificate: Option<&Path>) -> Result<(), Failure> {
    let cfg = c.load()?;
    let inst = cfg.instance()?;
    let bounds = certificate.map(load_certificate).transpose()?;
    let file = std::fs::File::open(solutions)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", solutions.display())))?;
    let mut records = 0u64;
    let mut failures = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(internal)?;
        if line.trim().is_empty() {
            continue;
        }
        records += 1;
        let lineno = i + 1;
        let rec = match SolutionRecord::parse_json_line(&line, &inst.primes) {
            Ok(r) => r,
            Err(e) => {
                failures.push(json!({"line": lineno, "reason": format!("malformed: {e}")}));
                continue;
            }
        };
        if !verify_solution(&inst, &rec) {
            failures.push(json!({"line": lineno, "reason": "record does not verify"}));
            continue;
        }
        if let Some(b) = &bounds {
            let zr = rec.summands.last().expect("r >= 1").value();
            for v in b.violations(rec.n, rec.m, zr) {
                failures.push(json!({"line": lineno, "reason": v}));
            }
        }
    }
    let mut m = report::envelope("verification", &cfg);
    m.insert("records".into(), json!(records));
    m.insert("failed".into(), json!(failures.len()));
    m.insert("failures".into(), Value::Array(failures.clone()));
    m.insert(
        "certificate".into(),
        match &bounds {
            Some(b) => json!({ "N0": b.n0.to_string(), "checked": true }),
            None => Value::Null,
        },
    );
    c.emit(&Value::Object(m))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("{} of {records} records failed verification", failures.len()),
        })
    }
}
