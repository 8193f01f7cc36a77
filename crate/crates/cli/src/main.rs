use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use lnnqec::canonical::SynthesisOptions;
use lnnqec::experiments::{
    epsilon_step, reproduce_table2, reproduce_table3, sample_cycles, write_rows, write_to_path, Evaluator, Format,
};
use lnnqec::pauli::{exact_epsilon_final, exact_syndrome_distribution};
use lnnqec::qec_circuit::{CycleLayout, CYCLE_OVERHEAD};
use lnnqec::{
    canonical_invariants, derive_syndrome_table, standard_gate, synthesize_from_interaction, u_d, Error, ErrorModel,
    Unitary4, C64,
};

/// Environment variable naming the directory that table output goes to when
/// `--out` is not given.
const OUT_DIR_VAR: &str = "LNNQEC_OUT_DIR";

/// Data-qubit actions of the published syndrome table, by syndrome value.
const PUBLISHED_TABLE: [&str; 16] = [
    "I", "I", "Z", "I", "I", "X", "Z", "X", "Z", "I", "X", "X", "Z", "X", "XZ", "Z",
];

#[derive(Parser)]
#[command(
    name = "lnnqec",
    version,
    about = "Five-qubit error correction on a linear nearest-neighbour array",
    after_help = "Output goes to --out, else to $LNNQEC_OUT_DIR/<command>.<ext> when that is set, else to stdout.\nExit status: 0 success, 1 I/O failure, 2 usage or validation error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Discrete,
    Continuous,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Oracle,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cycle length and report epsilon_final, epsilon_step and the
    /// syndrome histogram.
    Cycle {
        #[arg(long, value_enum, default_value = "discrete")]
        model: ModelKind,
        /// Per-step error probability (discrete model).
        #[arg(long)]
        p: Option<f64>,
        /// Angle standard deviation (continuous model).
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 11)]
        t_wait: usize,
        #[arg(long, value_enum, default_value = "mc")]
        method: MethodArg,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal cycle length and per-step error for the discrete model.
    Table2 {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1e-2,1.6e-3,1e-3,1e-4,1e-5,1e-6,1e-7,1e-8"
        )]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value = "oracle")]
        method: MethodArg,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo cycle-length scan for the continuous model.
    Table3 {
        #[arg(long, value_delimiter = ',', default_value = "1e-1")]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the syndrome table and compare it with the published one.
    SyndromeTable,
    /// Canonical coordinates of a two-qubit gate.
    ///
    /// GATE is a gate name (CNOT, CZ, SWAP) or a file holding a 4x4 matrix:
    /// four lines of four whitespace-separated entries such as `0.5+0.5i`.
    Kak { gate: String },
    /// Build GATE from single-qubit layers and an interaction gate.
    Synth {
        gate: String,
        /// `pi8` for the canonical gate with angles (pi/8, pi/8, 0), or any
        /// value accepted as GATE.
        #[arg(long, default_value = "pi8")]
        interaction: String,
        #[arg(long, default_value_t = 3)]
        max_layers: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Io(_)) { 1 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    let mut cmd = Cli::command();
    let rendered = cmd.render_usage();
    Failure {
        code: 2,
        message: format!("{}\n\n{rendered}", message.into()),
    }
}

/// Three significant figures.
fn sig(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&x.abs()) {
        let digits = (2 - x.abs().log10().floor() as i32).max(0) as usize;
        format!("{x:.digits$}")
    } else {
        format!("{x:.2e}")
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), sig)
}

fn select_model(kind: ModelKind, p: Option<f64>, sigma: Option<f64>) -> Result<ErrorModel, Failure> {
    match (kind, p, sigma) {
        (ModelKind::Discrete, Some(p), None) => Ok(ErrorModel::discrete(p)?),
        (ModelKind::Continuous, None, Some(s)) => Ok(ErrorModel::continuous(s)?),
        (ModelKind::Discrete, _, _) => Err(usage("the discrete model takes --p and not --sigma")),
        (ModelKind::Continuous, _, _) => Err(usage("the continuous model takes --sigma and not --p")),
    }
}

/// Writes `content` to `out`, to the output directory from the environment,
/// or to stdout, in that order of preference.
fn emit(out: Option<&Path>, default_name: &str, content: &[u8]) -> Result<(), Failure> {
    let target = out
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(|d| Path::new(&d).join(default_name)));
    match target {
        Some(path) => {
            write_to_path(&path, |mut f| Ok(std::io::Write::write_all(&mut f, content)?)).map_err(|e| Failure {
                code: 1,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", String::from_utf8_lossy(content)),
    }
    Ok(())
}

fn encode<T: serde::Serialize>(rows: &[T], key: &str, format: Format) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_rows(rows, key, format, &mut buf)?;
    Ok(buf)
}

fn bits(s: usize) -> String {
    CycleLayout::unpack(s as u8)
        .iter()
        .map(|b| char::from(b'0' + b))
        .collect()
}

#[derive(serde::Serialize)]
struct CycleReport {
    model: &'static str,
    param: f64,
    #[serde(rename = "T")]
    t_total: u64,
    t_wait: u64,
    epsilon_final: f64,
    epsilon_step: f64,
    std_err: f64,
    trials: usize,
    method: &'static str,
    /// Probabilities (oracle) or counts (Monte Carlo), indexed by syndrome.
    syndromes: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_cycle(
    kind: ModelKind,
    p: Option<f64>,
    sigma: Option<f64>,
    t_wait: usize,
    method: MethodArg,
    trials: usize,
    seed: u64,
    format: FormatArg,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let model = select_model(kind, p, sigma)?;
    let t_total = (t_wait + CYCLE_OVERHEAD) as u64;
    let report = match (method, model) {
        (MethodArg::Oracle, ErrorModel::Continuous(_)) => {
            return Err(usage("--method oracle supports only the discrete model"))
        }
        (MethodArg::Oracle, ErrorModel::Discrete(m)) => {
            let eps = exact_epsilon_final(m.p(), t_wait)?;
            CycleReport {
                model: model.kind(),
                param: m.p(),
                t_total,
                t_wait: t_wait as u64,
                epsilon_final: eps,
                epsilon_step: epsilon_step(eps, t_total)?,
                std_err: 0.0,
                trials: 0,
                method: "oracle",
                syndromes: exact_syndrome_distribution(m.p(), t_wait)?.to_vec(),
            }
        }
        (MethodArg::Mc, _) => {
            let stats = sample_cycles(&model, t_wait, trials, seed)?;
            CycleReport {
                model: model.kind(),
                param: model.param(),
                t_total,
                t_wait: t_wait as u64,
                epsilon_final: stats.estimate.mean,
                epsilon_step: epsilon_step(stats.estimate.mean, t_total)?,
                std_err: stats.estimate.std_err,
                trials,
                method: "montecarlo",
                syndromes: stats.syndrome_counts.iter().map(|&c| c as f64).collect(),
            }
        }
    };
    let content = match format {
        FormatArg::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "model          {} ({})", report.model, sig(report.param));
            let _ = writeln!(s, "T              {} (t_wait {})", report.t_total, report.t_wait);
            let _ = writeln!(s, "epsilon_final  {}", sig(report.epsilon_final));
            let _ = writeln!(s, "epsilon_step   {}", sig(report.epsilon_step));
            if report.method == "montecarlo" {
                let _ = writeln!(
                    s,
                    "std_err        {} ({} trials, seed {seed})",
                    sig(report.std_err),
                    report.trials
                );
            }
            let _ = writeln!(
                s,
                "syndrome  {}",
                if report.method == "oracle" {
                    "probability"
                } else {
                    "count"
                }
            );
            for (i, v) in report.syndromes.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{}      {}",
                    bits(i),
                    if report.method == "oracle" {
                        sig(*v)
                    } else {
                        format!("{v}")
                    }
                );
            }
            s.into_bytes()
        }
        FormatArg::Csv => {
            let mut s = String::from("syndrome,value\n");
            for (i, v) in report.syndromes.iter().enumerate() {
                let _ = writeln!(s, "{},{v}", bits(i));
            }
            let head = encode(&[CycleSummary::from(&report)], "cycle", Format::Csv)?;
            [head, s.into_bytes()].concat()
        }
        FormatArg::Json => encode(&[report], "cycle", Format::Json)?,
    };
    emit(out, "cycle", &content)
}

#[derive(serde::Serialize)]
struct CycleSummary {
    model: &'static str,
    param: f64,
    #[serde(rename = "T")]
    t_total: u64,
    t_wait: u64,
    epsilon_final: f64,
    epsilon_step: f64,
    std_err: f64,
    trials: usize,
    method: &'static str,
}

impl From<&CycleReport> for CycleSummary {
    fn from(r: &CycleReport) -> Self {
        Self {
            model: r.model,
            param: r.param,
            t_total: r.t_total,
            t_wait: r.t_wait,
            epsilon_final: r.epsilon_final,
            epsilon_step: r.epsilon_step,
            std_err: r.std_err,
            trials: r.trials,
            method: r.method,
        }
    }
}

fn extension(format: FormatArg) -> &'static str {
    match format {
        FormatArg::Text => "txt",
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
    }
}

fn data_format(format: FormatArg) -> Format {
    if format == FormatArg::Json {
        Format::Json
    } else {
        Format::Csv
    }
}

fn cmd_table2(
    ps: &[f64],
    method: MethodArg,
    trials: usize,
    seed: u64,
    format: FormatArg,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if let Some(p) = ps.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(usage(format!("--p {p}: every p must lie in (0, 1]")));
    }
    let evaluator = match method {
        MethodArg::Oracle => Evaluator::Oracle,
        MethodArg::Mc => Evaluator::MonteCarlo { trials, seed },
    };
    let rows = reproduce_table2(ps, evaluator)?;
    let content = match format {
        FormatArg::Text => {
            let mut s =
                String::from("p          T_opt   eps_step   eps_step/p  | reference T_opt  eps_step   eps_step/p\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<10} {:<7} {:<10} {:<11} | {:<15}  {:<10} {}{}",
                    sig(r.record.param),
                    r.record.t_total,
                    sig(r.record.epsilon_step),
                    sig(r.improvement),
                    r.ref_t_opt.map_or_else(|| "-".into(), |t| t.to_string()),
                    opt_sig(r.ref_epsilon_step),
                    opt_sig(r.ref_improvement),
                    if r.interior {
                        ""
                    } else {
                        "  (no interior minimum; longest-T grid point)"
                    }
                );
            }
            s.push_str("reference columns are published values, shown for comparison\n");
            s.into_bytes()
        }
        f => encode(&rows, "table2", data_format(f))?,
    };
    emit(out, &format!("table2.{}", extension(format)), &content)
}

fn cmd_table3(sigmas: &[f64], trials: usize, seed: u64, format: FormatArg, out: Option<&Path>) -> Result<(), Failure> {
    if let Some(s) = sigmas.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(usage(format!("--sigma {s}: every sigma must be positive")));
    }
    let rows = reproduce_table3(sigmas, trials, seed)?;
    let content = match format {
        FormatArg::Text => {
            let mut s = String::from(
                "sigma      T      p (1 qubit)  eps_step   std_err    ratio     | reference T  p          eps_step   ratio\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<10} {:<6} {:<12} {:<10} {:<10} {:<9} | {:<11}  {:<10} {:<10} {}",
                    sig(r.record.param),
                    r.record.t_total,
                    sig(r.baseline_p),
                    sig(r.record.epsilon_step),
                    sig(r.record.std_err / r.record.t_total as f64),
                    opt_sig(r.improvement),
                    r.ref_t_opt.map_or_else(|| "-".into(), |t| t.to_string()),
                    opt_sig(r.ref_p),
                    opt_sig(r.ref_epsilon_step),
                    opt_sig(r.ref_improvement),
                );
            }
            let _ = writeln!(
                s,
                "{trials} trials per point, seed {seed}; reference columns are published values"
            );
            s.into_bytes()
        }
        f => encode(&rows, "table3", data_format(f))?,
    };
    emit(out, &format!("table3.{}", extension(format)), &content)
}

fn cmd_syndrome_table() -> Result<(), Failure> {
    let table = derive_syndrome_table()?;
    let mut s = String::from("syndrome  action      cause             published  same\n");
    let mut same = 0;
    for (syn, corr, src) in table.rows() {
        let b = bits(syn as usize);
        let reset: String = b.chars().map(|c| if c == '1' { 'X' } else { 'I' }).collect();
        let cause = src.map_or_else(|| "none".into(), |(e, q)| format!("{} on qubit {q}", e.name()));
        let published = PUBLISHED_TABLE[syn as usize];
        let agree = published == corr.name();
        same += usize::from(agree);
        let _ = writeln!(
            s,
            "{b}      {:<11} {cause:<17} {published:<10} {}",
            format!("{}⊗{reset}", corr.name()),
            if agree { "yes" } else { "no" }
        );
    }
    let _ = writeln!(
        s,
        "{same}/16 rows agree with the published table; bit i is ancilla qubit i+1, data qubit 0.\n\
         The table depends on the encoder and bit order, so row agreement is informational."
    );
    print!("{s}");
    Ok(())
}

fn parse_matrix(text: &str) -> Result<Unitary4, Failure> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.len() != 4 {
        return Err(usage(format!("matrix file needs 4 rows, found {}", rows.len())));
    }
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != 4 {
            return Err(usage(format!(
                "matrix row {} needs 4 entries, found {}",
                i + 1,
                entries.len()
            )));
        }
        for (j, e) in entries.iter().enumerate() {
            m[i][j] = C64::from_str(e).map_err(|_| usage(format!("row {}: cannot read entry `{e}`", i + 1)))?;
        }
    }
    Ok(Unitary4::from_rows(m)?)
}

/// A two-qubit gate by name, or from a matrix file.
fn load_gate(name: &str) -> Result<Unitary4, Failure> {
    if name.eq_ignore_ascii_case("pi8") {
        return Ok(u_d(std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_8, 0.0));
    }
    match standard_gate(name) {
        Ok(g) => g.two().ok_or_else(|| usage(format!("{name} is a single-qubit gate"))),
        Err(_) if Path::new(name).exists() => {
            let text = std::fs::read_to_string(name).map_err(|e| Failure {
                code: 1,
                message: format!("cannot read {name}: {e}"),
            })?;
            parse_matrix(&text)
        }
        Err(e) => Err(usage(format!("{e}; expected a gate name or a matrix file"))),
    }
}

fn cmd_kak(gate: &str) -> Result<(), Failure> {
    let class = canonical_invariants(&load_gate(gate)?)?;
    let [x, y, z] = class.as_array();
    println!("{class}");
    println!("alpha = ({}, {}, {})", sig(x), sig(y), sig(z));
    Ok(())
}

fn fmt_c(z: C64) -> String {
    let z = C64::new(
        if z.re.abs() < 5e-4 { 0.0 } else { z.re },
        if z.im.abs() < 5e-4 { 0.0 } else { z.im },
    );
    format!("{:.3}{:+.3}i", z.re, z.im)
}

fn cmd_synth(gate: &str, interaction: &str, max_layers: usize, starts: usize, seed: u64) -> Result<(), Failure> {
    let target = load_gate(gate)?;
    let inter = load_gate(interaction)?;
    let opts = SynthesisOptions {
        starts,
        seed,
        ..SynthesisOptions::default()
    };
    let r = synthesize_from_interaction(&target, &inter, max_layers, &opts)?;
    println!("layers     {}", r.layer_count);
    println!("infidelity {}", sig(r.residual_infidelity));
    for (k, (a, b)) in r.local_unitaries.iter().enumerate() {
        let show = |u: &lnnqec::Unitary2| {
            format!(
                "[[{}, {}], [{}, {}]]",
                fmt_c(u.get(0, 0)),
                fmt_c(u.get(0, 1)),
                fmt_c(u.get(1, 0)),
                fmt_c(u.get(1, 1))
            )
        };
        println!("L{k}  {} ⊗ {}", show(a), show(b));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Cycle {
            model,
            p,
            sigma,
            t_wait,
            method,
            trials,
            seed,
            format,
            out,
        } => cmd_cycle(model, p, sigma, t_wait, method, trials, seed, format, out.as_deref()),
        Command::Table2 {
            p,
            method,
            trials,
            seed,
            format,
            out,
        } => cmd_table2(&p, method, trials, seed, format, out.as_deref()),
        Command::Table3 {
            sigma,
            trials,
            seed,
            format,
            out,
        } => cmd_table3(&sigma, trials, seed, format, out.as_deref()),
        Command::SyndromeTable => cmd_syndrome_table(),
        Command::Kak { gate } => cmd_kak(&gate),
        Command::Synth {
            gate,
            interaction,
            max_layers,
            starts,
            seed,
        } => cmd_synth(&gate, &interaction, max_layers, starts, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
