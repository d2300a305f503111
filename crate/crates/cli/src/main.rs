use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linebreaker::harness::{
    self, ablation_configs, find_disproof_setup, potential_trace, run_experiment, scaling_study,
    setup_position, support_set, technique_configs, ExperimentSpec, RulesSpec, RunRecord, Setup,
};
use linebreaker::rulesets::{describe_line, generate_trunc7, verify_block_coverage};
use linebreaker::{Coefficients, Config, Features, Limits, MoveOrder, Search, Side, SolveValue};

const EXIT_SOLVED: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_LIMIT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "linebreaker", version, about = "Solve maker-breaker line games with proof number search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one position.
    Solve(SolveArgs),
    /// Run a flag matrix over board sizes and print size/time ratios.
    Experiment(ExperimentArgs),
    /// Solve every member of the root support and report the breaker-win share.
    Support(SolveArgs),
    /// Solve a range of board sizes and fit ln(nodes) against n.
    Scaling(ScalingArgs),
    /// Check that the truncated edges cover every 7-line of a tiling.
    VerifyTiling {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search for a 2 maker + 1 breaker start that breaker wins.
    FindDisproof(FindDisproofArgs),
    /// Solve and write one CSV row per solved node.
    ExportTraining(SolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Mnk,
    Trunc7,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn apply(self, flag: &mut bool) {
        *flag = self == Switch::On;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Order {
    Rowmajor,
    Contribution,
}

#[derive(Args, Debug, Clone)]
struct BoardArgs {
    #[arg(long, value_enum, default_value = "trunc7")]
    rules: Family,
    /// Rows (mnk only).
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Line length (mnk only).
    #[arg(long, default_value_t = 7)]
    k: usize,
    /// proof, disproof or file:<path>.
    #[arg(long, default_value = "proof")]
    setup: String,
    /// Directory holding disproof starts.
    #[arg(long, default_value = "setups")]
    setup_dir: PathBuf,
}

impl BoardArgs {
    fn spec(&self) -> RulesSpec {
        match self.rules {
            Family::Mnk => RulesSpec::Mnk { m: self.m, n: self.n, k: self.k },
            Family::Trunc7 => RulesSpec::Trunc7 { n: self.n },
        }
    }

    fn setup(&self) -> Result<Setup, String> {
        self.setup.parse().map_err(|e: linebreaker::Error| e.to_string())
    }
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    #[arg(long, value_enum)]
    heuristic_pn: Option<Switch>,
    #[arg(long, value_enum)]
    heuristic_dn: Option<Switch>,
    #[arg(long, value_enum)]
    forced_move: Option<Switch>,
    #[arg(long, value_enum)]
    dead_squares: Option<Switch>,
    #[arg(long, value_enum)]
    dominated: Option<Switch>,
    #[arg(long, value_enum)]
    breaker_stop: Option<Switch>,
    #[arg(long, value_enum)]
    components: Option<Switch>,
    #[arg(long, value_enum)]
    isomorphy: Option<Switch>,
    #[arg(long, value_enum)]
    mobility: Option<Switch>,
    /// Start from the plain baseline instead of all techniques.
    #[arg(long)]
    baseline: bool,
    #[arg(long, value_enum, default_value = "rowmajor")]
    order: Order,
    #[arg(long, default_value_t = 1000.0)]
    alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    beta: f64,
    /// Logistic coefficients as `file:<path>` to a JSON object.
    #[arg(long)]
    coeffs: Option<String>,
    /// Seconds per solve.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Bytes of search memory per solve.
    #[arg(long)]
    mem_limit: Option<u64>,
}

impl EngineArgs {
    fn config(&self) -> Result<Config, String> {
        let mut f = if self.baseline { Features::BASELINE } else { Features::ALL };
        let switches = [
            (self.heuristic_pn, &mut f.heuristic_pn),
            (self.heuristic_dn, &mut f.heuristic_dn),
            (self.forced_move, &mut f.forced_move),
            (self.dead_squares, &mut f.dead_squares),
            (self.dominated, &mut f.dominated),
            (self.breaker_stop, &mut f.breaker_stop),
            (self.components, &mut f.components),
            (self.isomorphy, &mut f.isomorphy),
            (self.mobility, &mut f.mobility),
        ];
        for (s, flag) in switches {
            if let Some(s) = s {
                s.apply(flag);
            }
        }
        let mut c = Config::with_features(f);
        c.alpha = self.alpha;
        c.beta = self.beta;
        c.order = match self.order {
            Order::Rowmajor => MoveOrder::RowMajor,
            Order::Contribution => MoveOrder::Contribution,
        };
        if let Some(spec) = &self.coeffs {
            let path = spec.strip_prefix("file:").ok_or("--coeffs expects file:<path>")?;
            c.coefficients = Coefficients::from_json_file(Path::new(path)).map_err(|e| e.to_string())?;
        }
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }

    fn limits(&self) -> Result<Limits, String> {
        let time = match self.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => return Err("--time-limit must be positive".into()),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        Ok(Limits::new(time, self.mem_limit))
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    board: BoardArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the potential along the principal line after solving.
    #[arg(long)]
    trace_potential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Matrix {
    /// Each technique alone on top of the baseline.
    Techniques,
    /// All techniques, then each one removed.
    Ablation,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    board: BoardArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Further board sizes besides --n.
    #[arg(long, value_delimiter = ',')]
    more_n: Vec<usize>,
    #[arg(long, value_enum, default_value = "ablation")]
    matrix: Matrix,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[command(flatten)]
    board: BoardArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Largest board size; --n is the smallest.
    #[arg(long)]
    n_to: usize,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FindDisproofArgs {
    #[command(flatten)]
    board: BoardArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Total seconds across all candidates; --time-limit applies to each
    /// candidate and defaults to 20.
    #[arg(long, default_value_t = 1800.0)]
    budget: f64,
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Limit,
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

impl From<&str> for Failure {
    fn from(s: &str) -> Self {
        Failure::Usage(s.to_string())
    }
}

impl From<linebreaker::Error> for Failure {
    fn from(e: linebreaker::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn write_json<T: serde::Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    if let Some(p) = path {
        let f = File::create(p)?;
        serde_json::to_writer_pretty(f, value).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn limited(solved: bool) -> Result<(), Failure> {
    if solved {
        Ok(())
    } else {
        Err(Failure::Limit)
    }
}

fn solve_cmd(args: &SolveArgs, export: bool) -> Result<(), Failure> {
    let config = args.engine.config()?;
    let limits = args.engine.limits()?;
    let spec = args.board.spec();
    let setup = args.board.setup()?;
    let pos = setup_position(&spec, &setup, &args.board.setup_dir)?;
    let mut search = Search::new(config.clone(), limits);
    let r = search.solve(&pos);
    let record = RunRecord::new(&spec, &setup, &config, &r);
    println!("{}", serde_json::to_string(&record).expect("record serializes"));
    if args.trace_potential {
        for (i, (side, pot)) in potential_trace(&search).iter().enumerate() {
            let who = if *side == Side::Maker { "M" } else { "B" };
            println!("{i}\t{who}\t{pot}");
        }
    }
    write_json(&args.json, &record)?;
    if export {
        let path = args.csv.as_ref().ok_or("export-training needs --csv")?;
        let rows = search.export_training_rows(File::create(path)?)?;
        eprintln!("{rows} rows written to {}", path.display());
    }
    limited(r.value != SolveValue::Unknown)
}

fn experiment_cmd(args: &ExperimentArgs) -> Result<(), Failure> {
    let config = args.engine.config()?;
    let mut ns = vec![args.board.n];
    ns.extend(&args.more_n);
    let spec = ExperimentSpec {
        rules: args.board.spec(),
        ns,
        setup: args.board.setup()?,
        setup_dir: args.board.setup_dir.clone(),
        configs: match args.matrix {
            Matrix::Ablation => ablation_configs(&config),
            Matrix::Techniques => technique_configs(&config),
        },
        limits: args.engine.limits()?,
    };
    let report = run_experiment(&spec)?;
    print!("{}", report.ratio_table());
    if let Some(p) = &args.csv {
        report.write_csv(File::create(p)?)?;
    }
    write_json(&args.json, &report)?;
    Ok(())
}

fn support_cmd(args: &SolveArgs) -> Result<(), Failure> {
    let config = args.engine.config()?;
    let pos = setup_position(&args.board.spec(), &args.board.setup()?, &args.board.setup_dir)?;
    let report = support_set(&pos, &config, args.engine.limits()?);
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    write_json(&args.json, &report)?;
    limited(report.unknown == 0)
}

fn scaling_cmd(args: &ScalingArgs) -> Result<(), Failure> {
    if args.n_to < args.board.n {
        return Err(Failure::Usage("--n-to must be at least --n".into()));
    }
    let config = args.engine.config()?;
    let report = scaling_study(
        &args.board.spec(),
        args.board.n..=args.n_to,
        &args.board.setup()?,
        &args.board.setup_dir,
        &config,
        args.engine.limits()?,
    )?;
    for r in &report.rows {
        println!("{}\t{}\t{:.3}\t{}", r.n, r.nodes, r.seconds, harness::value_name(r.value));
    }
    println!("slope {:.4} intercept {:.4} r2 {:.4}", report.slope, report.intercept, report.r_squared);
    if let Some(p) = &args.csv {
        report.write_csv(File::create(p)?)?;
    }
    write_json(&args.json, &report)?;
    limited(report.rows.iter().all(|r| !r.limited))
}

fn verify_cmd(n: usize, json: &Option<PathBuf>) -> Result<(), Failure> {
    let rules = generate_trunc7(n)?;
    let report = verify_block_coverage(&rules, n);
    println!("checked {} passed {}", report.checked, report.passed);
    for l in &report.uncovered {
        println!("uncovered {}", describe_line(l));
    }
    write_json(json, &report)?;
    if report.uncovered.is_empty() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{} lines uncovered", report.uncovered.len())))
    }
}

fn find_disproof_cmd(args: &FindDisproofArgs) -> Result<(), Failure> {
    let config = args.engine.config()?;
    if !(args.budget > 0.0 && args.budget.is_finite()) {
        return Err(Failure::Usage("--budget must be positive".into()));
    }
    let mut per_candidate = args.engine.limits()?;
    per_candidate.time.get_or_insert(Duration::from_secs(20));
    let found = find_disproof_setup(
        &args.board.spec(),
        &config,
        per_candidate,
        Duration::from_secs_f64(args.budget),
        &args.board.setup_dir,
    );
    match found {
        Ok(d) => {
            print!("{}", d.position.to_text());
            println!("saved {} after {} candidates, {} nodes", d.path.display(), d.tried + 1, d.result.nodes_created);
            let record = RunRecord::new(&args.board.spec(), &Setup::File(d.path.clone()), &config, &d.result);
            write_json(&args.json, &record)
        }
        Err(linebreaker::Error::BudgetExhausted(msg)) => {
            eprintln!("{msg}");
            Err(Failure::Limit)
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve(a) => solve_cmd(a, false),
        Command::ExportTraining(a) => solve_cmd(a, true),
        Command::Experiment(a) => experiment_cmd(a),
        Command::Support(a) => support_cmd(a),
        Command::Scaling(a) => scaling_cmd(a),
        Command::VerifyTiling { n, json } => verify_cmd(*n, json),
        Command::FindDisproof(a) => find_disproof_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_SOLVED };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_SOLVED),
        Err(Failure::Limit) => ExitCode::from(EXIT_LIMIT),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
