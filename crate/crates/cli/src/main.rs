use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use seusim::campaign::{run_campaign, CampaignConfig, ErrorMatrix, Threads};
use seusim::elaborate::elaborate;
use seusim::faults::{enumerate_faults, fault_for};
use seusim::metrics::{TotalMode, VulnReport, Weights};
use seusim::netlist::{parse_verilog, read_ir, write_ir, ErrorClass, Netlist, NetlistError};
use seusim::scalar::{format_rational, parse_rational};
use seusim::sim::{self, FaultOverlay};
use seusim::stimuli::{exhaustive, pseudo_random, Provenance, StimulusSet};

mod exit {
    pub const IO: u8 = 1;
    pub const SYNTAX: u8 = 2;
    pub const UNSUPPORTED: u8 = 3;
    pub const CONNECTIVITY: u8 = 4;
    pub const ELABORATION: u8 = 5;
    pub const CONFIG: u8 = 6;
    pub const SCHEMA: u8 = 7;
}

/// A failed command: exit code, diagnostic class and message.
struct Failure {
    code: u8,
    class: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, class: &'static str, message: impl ToString) -> Self {
        Failure {
            code,
            class,
            message: message.to_string(),
        }
    }

    fn config(message: impl ToString) -> Self {
        Failure::new(exit::CONFIG, "config", message)
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(exit::IO, "io", format!("{}: {e}", path.display()))
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "seusim", version, about = "Soft-error vulnerability analysis of LUT netlists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a structural Verilog netlist and write the JSON IR.
    Parse {
        netlist: PathBuf,
        /// Output path for the IR (stdout if omitted).
        #[arg(long)]
        ir: Option<PathBuf>,
    },
    /// Fault universe queries.
    Faults {
        #[command(subcommand)]
        command: FaultsCommand,
    },
    /// Stimulus generation.
    Stimuli {
        #[command(subcommand)]
        command: StimuliCommand,
    },
    /// Run the golden design and every single-LUT fault.
    Campaign(CampaignArgs),
    /// Turn campaign results into per-cycle tables, histograms and scores.
    Report(ReportArgs),
    /// Simulate one stimulus run and print the output trace.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum FaultsCommand {
    /// List one fault per LUT as `index,cell_id,kind`.
    List {
        design: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StimuliCommand {
    /// Write a stimulus file, one run per line.
    Gen {
        #[command(flatten)]
        source: StimulusArgs,
        /// Number of data inputs; taken from `--design` when omitted.
        #[arg(long)]
        inputs: Option<usize>,
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StimulusMode {
    Exhaustive,
    Random,
}

#[derive(Args)]
struct StimulusArgs {
    #[arg(long = "stimuli", value_enum, default_value = "random")]
    mode: StimulusMode,
    /// Read runs from a stimulus file instead of generating them.
    #[arg(long, conflicts_with = "mode")]
    stimuli_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    runs: usize,
    #[arg(long, default_value_t = 10)]
    cycles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hold each input vector constant across all cycles.
    #[arg(long)]
    hold: bool,
}

#[derive(Args)]
struct CampaignArgs {
    /// JSON IR or structural Verilog.
    design: PathBuf,
    #[command(flatten)]
    stimulus: StimulusArgs,
    /// CSV of `output,weight` lines.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Worker threads, or `auto`.
    #[arg(long, default_value = "auto")]
    threads: String,
    #[arg(short, long, default_value = "results.json")]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    AtLeastOnce,
    Max,
    Mean,
}

impl From<ModeArg> for TotalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AtLeastOnce => TotalMode::AtLeastOnce,
            ModeArg::Max => TotalMode::MaxCycle,
            ModeArg::Mean => TotalMode::MeanCycle,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    results: PathBuf,
    #[arg(long, value_enum, default_value = "at-least-once")]
    mode: ModeArg,
    #[arg(long, default_value = "0.1")]
    bin_width: String,
    /// Per-cycle possibilities, one row per LUT and output bit.
    #[arg(long)]
    table3: bool,
    #[arg(long)]
    histogram: bool,
    /// Full JSON report.
    #[arg(long)]
    json: bool,
    /// Overrides the weights stored in the results file.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Output file; with several formats, a prefix for `.table3.csv`,
    /// `.histogram.csv` and `.json`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    design: PathBuf,
    #[command(flatten)]
    stimulus: StimulusArgs,
    /// Index of the stimulus run to simulate.
    #[arg(long, default_value_t = 0)]
    run: usize,
    /// Complement the function of this LUT.
    #[arg(long)]
    fault: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn netlist_failure(path: &Path, e: NetlistError, from_ir: bool) -> Failure {
    let (code, class) = match e.class() {
        ErrorClass::Syntax => (exit::SYNTAX, "syntax"),
        ErrorClass::Unsupported => (exit::UNSUPPORTED, "unsupported"),
        ErrorClass::Connectivity => (exit::CONNECTIVITY, "connectivity"),
        ErrorClass::Schema if from_ir => (exit::SCHEMA, "schema"),
        ErrorClass::Schema => (exit::SYNTAX, "syntax"),
    };
    Failure::new(code, class, format!("{}: {e}", path.display()))
}

/// Loads a design from JSON IR or, failing that shape, structural Verilog.
fn load_design(path: &Path) -> Result<(Netlist, String), Failure> {
    let text = read(path)?;
    let from_ir = text.trim_start().starts_with('{');
    let n = if from_ir { read_ir(&text) } else { parse_verilog(&text) }
        .map_err(|e| netlist_failure(path, e, from_ir))?;
    Ok((n, text))
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn build_stimuli(args: &StimulusArgs, inputs: usize) -> Result<StimulusSet, Failure> {
    if let Some(path) = &args.stimuli_file {
        let set = StimulusSet::from_text(&read(path)?).map_err(Failure::config)?;
        if set.inputs() != inputs {
            return Err(Failure::config(format!(
                "{}: runs have {} inputs, design has {inputs}",
                path.display(),
                set.inputs()
            )));
        }
        return Ok(set);
    }
    match args.mode {
        StimulusMode::Exhaustive => exhaustive(inputs, args.cycles, args.hold),
        StimulusMode::Random => pseudo_random(inputs, args.cycles, args.runs, args.seed, args.hold),
    }
    .map_err(Failure::config)
}

fn provenance_json(p: &Provenance, file: Option<&Path>) -> Value {
    match p {
        Provenance::Exhaustive { hold } => json!({ "mode": "exhaustive", "hold": hold }),
        Provenance::Random { seed, algorithm, hold } => {
            json!({ "mode": "random", "seed": seed, "algorithm": algorithm, "hold": hold })
        }
        Provenance::File => json!({
            "mode": "file",
            "path": file.map(|p| p.display().to_string()),
        }),
    }
}

fn parse_threads(s: &str) -> Result<Threads, Failure> {
    match s {
        "auto" => Ok(Threads::Auto),
        n => n
            .parse()
            .map(Threads::Fixed)
            .map_err(|_| Failure::config(format!("--threads {s}: expected a count or `auto`"))),
    }
}

fn weights_json(w: &Weights, outputs: &[String]) -> Value {
    Value::Object(
        outputs
            .iter()
            .zip(&w.0)
            .map(|(o, w)| (o.clone(), json!(format_rational(w))))
            .collect(),
    )
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn manifest_path(results: &Path) -> PathBuf {
    let mut s = results.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn cmd_parse(netlist: &Path, ir: Option<&Path>) -> CmdResult {
    let text = read(netlist)?;
    let n = parse_verilog(&text).map_err(|e| netlist_failure(netlist, e, false))?;
    write(ir, &write_ir(&n))
}

fn cmd_faults_list(design: &Path, output: Option<&Path>) -> CmdResult {
    let (n, _) = load_design(design)?;
    write(output, &enumerate_faults(&n).to_csv())
}

fn cmd_stimuli_gen(source: &StimulusArgs, inputs: Option<usize>, design: Option<&Path>, output: Option<&Path>) -> CmdResult {
    let inputs = match (inputs, design) {
        (Some(k), _) => k,
        (None, Some(path)) => {
            let (n, _) = load_design(path)?;
            elaborate(&n)
                .map_err(|e| Failure::new(exit::ELABORATION, "elaboration", e))?
                .num_inputs()
        }
        (None, None) => return Err(Failure::config("either --inputs or --design is required")),
    };
    write(output, &build_stimuli(source, inputs)?.to_text())
}

fn cmd_campaign(args: &CampaignArgs) -> CmdResult {
    let started = unix_now();
    let (n, text) = load_design(&args.design)?;
    let g = elaborate(&n).map_err(|e| Failure::new(exit::ELABORATION, "elaboration", e))?;
    let stim = build_stimuli(&args.stimulus, g.num_inputs())?;
    let outputs = g.output_names().to_vec();
    let weights = match &args.weights {
        Some(path) => Some(Weights::from_csv(&read(path)?, &outputs).map_err(Failure::config)?),
        None => None,
    };
    let threads = parse_threads(&args.threads)?;
    let cfg = CampaignConfig {
        cycles: stim.cycles(),
        weights: weights.clone(),
        threads,
    };
    let workers = threads.resolve().map_err(Failure::config)?;
    let m = run_campaign(&g, &enumerate_faults(&n), &stim, &cfg).map_err(Failure::config)?;

    let mut results = m.to_json_value();
    let obj = results.as_object_mut().expect("matrix is an object");
    obj.insert(
        "stimulus".into(),
        provenance_json(stim.provenance(), args.stimulus.stimuli_file.as_deref()),
    );
    if let Some(w) = &weights {
        obj.insert("weights".into(), weights_json(w, &outputs));
    }
    let mut body = serde_json::to_string(&results).expect("serializes");
    body.push('\n');
    write(Some(&args.output), &body)?;

    let seed = match stim.provenance() {
        Provenance::Random { seed, .. } => json!(seed),
        _ => Value::Null,
    };
    let manifest = json!({
        "tool": "seusim",
        "version": env!("CARGO_PKG_VERSION"),
        "design": args.design.display().to_string(),
        "design_sha256": sha256_hex(text.as_bytes()),
        "results_sha256": sha256_hex(body.as_bytes()),
        "stimulus": provenance_json(stim.provenance(), args.stimulus.stimuli_file.as_deref()),
        "seed": seed,
        "cycles": stim.cycles(),
        "runs": stim.len(),
        "threads": workers,
        "started_unix": started,
        "finished_unix": unix_now(),
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializes");
    text.push('\n');
    write(Some(&manifest_path(&args.output)), &text)
}

fn schema(path: &Path, msg: impl std::fmt::Display) -> Failure {
    Failure::new(exit::SCHEMA, "schema", format!("{}: {msg}", path.display()))
}

fn cmd_report(args: &ReportArgs) -> CmdResult {
    let text = read(&args.results)?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| schema(&args.results, e))?;
    let obj = value.as_object_mut().ok_or_else(|| schema(&args.results, "not a JSON object"))?;
    let stimulus = obj.remove("stimulus");
    let stored_weights = obj.remove("weights");
    let m = ErrorMatrix::from_json_value(value).map_err(|e| schema(&args.results, e))?;

    let weights = match (&args.weights, stored_weights) {
        (Some(path), _) => Weights::from_csv(&read(path)?, &m.outputs).map_err(Failure::config)?,
        (None, Some(Value::Object(map))) => {
            let mut w = Weights::uniform(m.num_outputs());
            for (name, v) in map {
                let b = m
                    .outputs
                    .iter()
                    .position(|o| *o == name)
                    .ok_or_else(|| schema(&args.results, format!("weight for unknown output `{name}`")))?;
                w.0[b] = v
                    .as_str()
                    .and_then(parse_rational)
                    .ok_or_else(|| schema(&args.results, format!("bad weight for `{name}`")))?;
            }
            w
        }
        (None, Some(_)) => return Err(schema(&args.results, "`weights` must be an object")),
        (None, None) => Weights::uniform(m.num_outputs()),
    };
    let width: BigRational = parse_rational(&args.bin_width)
        .ok_or_else(|| Failure::config(format!("--bin-width {}: not a number", args.bin_width)))?;
    let report = VulnReport::<f64>::build(&m, args.mode.into(), weights, width).map_err(Failure::config)?;

    let mut formats: Vec<(&str, String)> = Vec::new();
    let table = args.table3 || !(args.histogram || args.json);
    if table {
        formats.push(("table3.csv", report.table_csv()));
    }
    if args.histogram {
        formats.push(("histogram.csv", report.histogram_csv()));
    }
    if args.json {
        let mut extra = Map::new();
        if let Some(s) = stimulus {
            extra.insert("seed".into(), s.get("seed").cloned().unwrap_or(Value::Null));
            extra.insert("stimulus".into(), s);
        }
        extra.insert("results".into(), json!(args.results.display().to_string()));
        let mut j = serde_json::to_string_pretty(&report.to_json(extra)).expect("serializes");
        j.push('\n');
        formats.push(("json", j));
    }
    match (&args.output, formats.len()) {
        (Some(path), 1) => write(Some(path), &formats[0].1),
        (Some(prefix), _) => {
            for (ext, body) in &formats {
                let mut p = prefix.as_os_str().to_owned();
                p.push(format!(".{ext}"));
                write(Some(Path::new(&p)), body)?;
            }
            Ok(())
        }
        (None, _) => {
            for (_, body) in &formats {
                write(None, body)?;
            }
            Ok(())
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let (n, _) = load_design(&args.design)?;
    let g = elaborate(&n).map_err(|e| Failure::new(exit::ELABORATION, "elaboration", e))?;
    let stim = build_stimuli(&args.stimulus, g.num_inputs())?;
    if args.run >= stim.len() {
        return Err(Failure::config(format!("--run {} but only {} runs", args.run, stim.len())));
    }
    let fault = match &args.fault {
        Some(id) => {
            fault_for(&n, id).map_err(Failure::config)?;
            FaultOverlay::for_cell(&g, id).map_err(Failure::config)?
        }
        None => FaultOverlay::NONE,
    };
    let trace = sim::run(&g, &stim.run(args.run), fault).map_err(Failure::config)?;
    let mut buf = Vec::new();
    trace.write_csv(g.output_names(), &mut buf).expect("writes to memory");
    write(args.output.as_deref(), &String::from_utf8(buf).expect("ascii"))
}

fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Parse { netlist, ir } => cmd_parse(&netlist, ir.as_deref()),
        Command::Faults {
            command: FaultsCommand::List { design, output },
        } => cmd_faults_list(&design, output.as_deref()),
        Command::Stimuli {
            command: StimuliCommand::Gen {
                source,
                inputs,
                design,
                output,
            },
        } => cmd_stimuli_gen(&source, inputs, design.as_deref(), output.as_deref()),
        Command::Campaign(args) => cmd_campaign(&args),
        Command::Report(args) => cmd_report(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("seusim: error[usage]: {}", one_line(first));
            return ExitCode::from(exit::CONFIG);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("seusim: error[{}]: {}", f.class, one_line(&f.message));
            ExitCode::from(f.code)
        }
    }
}
