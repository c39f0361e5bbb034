//! Command-line driver: abstract simulation with probability queries,
//! benchmark generation and oracle comparison.
//!
//! Exit codes: 0 success, 1 oracle containment failure, 2 parse or usage
//! error, 3 unsupported gate, 70 internal invariant breach.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use abstraqt::bench::{generate, BenchFamily, BenchSpec};
use abstraqt::circuit::{emit, parse, Circuit, GateKind, ParseError};
use abstraqt::oracle::{max_abs_diff, DenseState, SumState};
use abstraqt::state::{AbstractState, SimOptions};
use abstraqt::Interval;

const EXIT_PARSE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "abstraqt", version, about = "Abstract stabilizer simulation of quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the abstract simulator on a circuit file and answer queries.
    Simulate {
        /// Circuit file in the qreg/gate text format.
        file: PathBuf,
        /// Prove that this qubit ends in |0> (repeatable).
        #[arg(long = "check-zero", value_name = "QUBIT")]
        check_zero: Vec<usize>,
        /// Report the probability interval of measuring 1 on this qubit (repeatable).
        #[arg(long = "prob-one", value_name = "QUBIT")]
        prob_one: Vec<usize>,
        /// Summands kept before compression merges the overflow.
        #[arg(long = "max-summands", default_value_t = 1)]
        max_summands: usize,
        /// Machine-readable JSON output.
        #[arg(long)]
        json: bool,
        /// Include run statistics in the text output.
        #[arg(long)]
        stats: bool,
        /// Evaluate independent queries on this many threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Generate a benchmark circuit.
    Bench {
        /// Family id, e.g. cliff-cliff or measure-ghz.
        family: String,
        #[arg(long, default_value_t = 16)]
        qubits: usize,
        #[arg(long, default_value_t = 500)]
        gates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Measurement rounds (measure-ghz only).
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        /// Output file; the circuit goes to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the abstract pipeline against both exact oracles.
    OracleCompare {
        /// Circuit file (at most 8 qubits).
        file: PathBuf,
    },
}

fn json_real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn json_interval(iv: &Interval) -> Value {
    json!({ "lo": json_real(iv.lo), "hi": json_real(iv.hi) })
}

fn format_interval(iv: &Interval) -> String {
    if iv.lo == 0.0 && iv.hi == 0.0 {
        return "[0, 0] (exact zero)".to_string();
    }
    format!("[{:.6}, {:.6}]", iv.lo, iv.hi)
}

fn clamp_unit(iv: &Interval) -> Interval {
    Interval::new(iv.lo.clamp(0.0, 1.0), iv.hi.clamp(0.0, 1.0))
}

fn peak_rss_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: f64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
            return Some(kb / 1024.0);
        }
    }
    None
}

struct CommandFailure {
    code: u8,
    message: String,
}

impl CommandFailure {
    fn new(code: u8, message: impl Into<String>) -> CommandFailure {
        CommandFailure { code, message: message.into() }
    }
}

fn read_circuit(file: &PathBuf) -> Result<Circuit, CommandFailure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CommandFailure::new(EXIT_PARSE, format!("cannot read {}: {e}", file.display())))?;
    parse(&text).map_err(|e| {
        let code = match e {
            ParseError::UnknownGate { .. } => EXIT_UNSUPPORTED,
            _ => EXIT_PARSE,
        };
        CommandFailure::new(code, e.to_string())
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum QueryKind {
    CheckZero,
    ProbOne,
}

struct QueryResult {
    kind: QueryKind,
    qubit: usize,
    raw: Interval,
}

fn gate_counts(circuit: &Circuit) -> (usize, usize, usize) {
    let mut unitary = 0;
    let mut measure = 0;
    let mut project = 0;
    for gate in circuit.instructions() {
        match gate.kind {
            GateKind::Unitary => unitary += 1,
            GateKind::MeasureBoth => measure += 1,
            GateKind::Project(_) => project += 1,
        }
    }
    (unitary, measure, project)
}

fn run_queries(
    state: &AbstractState,
    queries: &[(QueryKind, usize)],
    jobs: usize,
) -> Vec<QueryResult> {
    let jobs = jobs.max(1);
    let mut results: Vec<Option<QueryResult>> = Vec::new();
    results.resize_with(queries.len(), || None);
    std::thread::scope(|scope| {
        let chunks = queries.len().div_ceil(jobs).max(1);
        for (slot_chunk, query_chunk) in results.chunks_mut(chunks).zip(queries.chunks(chunks)) {
            scope.spawn(move || {
                for (slot, &(kind, qubit)) in slot_chunk.iter_mut().zip(query_chunk) {
                    let raw = state.prob_one(qubit);
                    *slot = Some(QueryResult { kind, qubit, raw });
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("query evaluated")).collect()
}

fn cmd_simulate(
    file: PathBuf,
    check_zero: Vec<usize>,
    prob_one: Vec<usize>,
    max_summands: usize,
    json_out: bool,
    stats: bool,
    jobs: usize,
) -> Result<(), CommandFailure> {
    let started = Instant::now();
    let circuit = read_circuit(&file)?;
    for &q in check_zero.iter().chain(&prob_one) {
        if q >= circuit.num_qubits() {
            return Err(CommandFailure::new(
                EXIT_PARSE,
                format!("query qubit {q} out of range for {} qubits", circuit.num_qubits()),
            ));
        }
    }
    let options = SimOptions { max_summands: max_summands.max(1) };
    let state = AbstractState::run(&circuit, options).map_err(|e| {
        CommandFailure::new(EXIT_UNSUPPORTED, e.to_string())
    })?;

    let queries: Vec<(QueryKind, usize)> = prob_one
        .iter()
        .map(|&q| (QueryKind::ProbOne, q))
        .chain(check_zero.iter().map(|&q| (QueryKind::CheckZero, q)))
        .collect();
    let results = run_queries(&state, &queries, jobs);
    let trace = state.trace();
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let (unitary, measure, project) = gate_counts(&circuit);
    let summands = state.summand_count();

    if json_out {
        let queries_json: Vec<Value> = results
            .iter()
            .map(|r| {
                let clamped = clamp_unit(&r.raw);
                let mut entry = json!({
                    "kind": match r.kind { QueryKind::CheckZero => "check-zero", QueryKind::ProbOne => "prob-one" },
                    "qubit": r.qubit,
                    "raw": json_interval(&r.raw),
                    "clamped": json_interval(&clamped),
                    "exact_zero": r.raw.lo == 0.0 && r.raw.hi == 0.0,
                });
                if r.kind == QueryKind::CheckZero {
                    entry["verdict"] = json!(if clamped.hi <= 0.0 { "proved" } else { "unknown" });
                }
                entry
            })
            .collect();
        let report = json!({
            "schema_version": 1,
            "file": file.display().to_string(),
            "num_qubits": circuit.num_qubits(),
            "gates": { "unitary": unitary, "measure": measure, "project": project },
            "summands": summands.to_string(),
            "abstract_summand_lists": state.summands().len(),
            "trace": { "raw": json_interval(&trace), "clamped": json_interval(&clamp_unit(&trace)) },
            "queries": queries_json,
            "wall_ms": wall_ms,
            "peak_mem_mb": peak_rss_mb(),
            "state_bytes": state.approx_bytes(),
        });
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!(
            "circuit {}: {} qubits, {} gates ({} unitary, {} measure, {} project)",
            file.display(),
            circuit.num_qubits(),
            circuit.instructions().len(),
            unitary,
            measure,
            project
        );
        println!(
            "trace (branch probability mass): raw {} clamped {}",
            format_interval(&trace),
            format_interval(&clamp_unit(&trace))
        );
        for r in &results {
            let clamped = clamp_unit(&r.raw);
            match r.kind {
                QueryKind::ProbOne => println!(
                    "prob-one q[{}]: raw {} clamped {}",
                    r.qubit,
                    format_interval(&r.raw),
                    format_interval(&clamped)
                ),
                QueryKind::CheckZero => println!(
                    "check-zero q[{}]: raw {} clamped {} -> {}",
                    r.qubit,
                    format_interval(&r.raw),
                    format_interval(&clamped),
                    if clamped.hi <= 0.0 { "Proved" } else { "Unknown" }
                ),
            }
        }
        if stats {
            println!("summands r = {summands}");
            println!("state bytes ~ {}", state.approx_bytes());
            println!("wall time = {wall_ms:.2} ms");
            if let Some(mb) = peak_rss_mb() {
                println!("peak memory = {mb:.1} MB");
            }
        }
    }
    Ok(())
}

fn cmd_bench(
    family: String,
    qubits: usize,
    gates: usize,
    seed: u64,
    rounds: usize,
    output: Option<PathBuf>,
) -> Result<(), CommandFailure> {
    let family: BenchFamily = family
        .parse()
        .map_err(|e: String| CommandFailure::new(EXIT_PARSE, e))?;
    let seed = match std::env::var("ABSTRAQT_SEED") {
        Ok(value) => value
            .parse()
            .map_err(|_| CommandFailure::new(EXIT_PARSE, format!("bad ABSTRAQT_SEED `{value}`")))?,
        Err(_) => seed,
    };
    let spec = BenchSpec { family, n_total: qubits, gates_per_block: gates, seed, rounds };
    let circuit = generate(&spec).map_err(|e| CommandFailure::new(EXIT_PARSE, e.to_string()))?;
    let text = emit(&circuit);
    match output {
        Some(path) => {
            std::fs::write(&path, &text)
                .map_err(|e| CommandFailure::new(EXIT_PARSE, format!("cannot write {}: {e}", path.display())))?;
            let metadata = json!({
                "schema_version": 1,
                "family": family.id(),
                "qubits": qubits,
                "gates_per_block": gates,
                "seed": seed,
                "rounds": if family == BenchFamily::MeasureGhz { Some(rounds) } else { None },
                "instructions": circuit.instructions().len(),
            });
            let meta_path = path.with_extension("json");
            std::fs::write(&meta_path, serde_json::to_string_pretty(&metadata).expect("metadata"))
                .map_err(|e| CommandFailure::new(EXIT_PARSE, format!("cannot write {}: {e}", meta_path.display())))?;
            eprintln!("wrote {} and {}", path.display(), meta_path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_oracle_compare(file: PathBuf) -> Result<(), CommandFailure> {
    let circuit = read_circuit(&file)?;
    let n = circuit.num_qubits();
    if n > 8 {
        return Err(CommandFailure::new(
            EXIT_PARSE,
            format!("oracle comparison supports at most 8 qubits, got {n}"),
        ));
    }
    let state = AbstractState::run(&circuit, SimOptions::default())
        .map_err(|e| CommandFailure::new(EXIT_UNSUPPORTED, e.to_string()))?;
    let sum = SumState::run(&circuit).map_err(|e| CommandFailure::new(EXIT_PARSE, e.to_string()))?;
    let dense = DenseState::run(&circuit).map_err(|e| CommandFailure::new(EXIT_PARSE, e.to_string()))?;

    let oracle_diff = max_abs_diff(
        &sum.to_dense().map_err(|e| CommandFailure::new(EXIT_PARSE, e.to_string()))?,
        dense.rho(),
    );
    println!("oracle agreement: max |dense - sum| = {oracle_diff:.3e}");

    let mut all_contained = true;
    for q in 0..n {
        let interval = state.prob_one(q);
        let dense_p = dense.prob_one(q);
        let sum_p = sum.prob_one(q);
        let contained = interval.lo - 1e-9 <= dense_p && dense_p <= interval.hi + 1e-9;
        all_contained &= contained;
        println!(
            "q[{q}]: abstract {} dense {:.6} sum {:.6} containment {}",
            format_interval(&interval),
            dense_p,
            sum_p,
            if contained { "ok" } else { "VIOLATED" }
        );
    }
    let trace_interval = state.trace();
    let sum_trace = sum.trace();
    let trace_ok = trace_interval.lo - 1e-9 <= sum_trace && sum_trace <= trace_interval.hi + 1e-9;
    all_contained &= trace_ok;
    println!(
        "trace: abstract {} oracle {:.6} containment {}",
        format_interval(&trace_interval),
        sum_trace,
        if trace_ok { "ok" } else { "VIOLATED" }
    );
    if oracle_diff > 1e-8 {
        return Err(CommandFailure::new(1, "oracle disagreement exceeds 1e-8".to_string()));
    }
    if !all_contained {
        return Err(CommandFailure::new(1, "abstract interval containment violated".to_string()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Simulate { file, check_zero, prob_one, max_summands, json, stats, jobs } => {
            cmd_simulate(file, check_zero, prob_one, max_summands, json, stats, jobs)
        }
        Command::Bench { family, qubits, gates, seed, rounds, output } => {
            cmd_bench(family, qubits, gates, seed, rounds, output)
        }
        Command::OracleCompare { file } => cmd_oracle_compare(file),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(failure)) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
        Err(_) => {
            eprintln!("error: internal invariant breach");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
