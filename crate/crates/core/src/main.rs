use std::fs;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use qunion::bounds::{
    check_conservation, check_first_step, check_gentle, check_kmw, check_telescoping, check_theorem1,
    check_union_bound, Margin,
};
use qunion::error::Error;
use qunion::harness::criteria;
use qunion::harness::fuzz::{fuzz, CheckId, Execution, FuzzConfig};
use qunion::harness::gen::Seed;
use qunion::harness::sweep::{rows_to_csv, tightness_sweep, SweepGrid, SweepKind};
use qunion::linalg::CMatrix;
use qunion::qstate::{DensityMatrix, Projector};
use qunion::seqmeas::run_sequence;
use qunion::tightness::qubit_family;

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qunion", version, about = "Numerical checks of quantum union bounds and gentle sequential measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check over seeded random instances and report minimum margins.
    Fuzz(FuzzArgs),
    /// Sweep an extremal family over a grid and write CSV.
    Tightness(TightnessArgs),
    /// Walk through the two-step qubit example with every intermediate quantity.
    Demo,
    /// Run the acceptance criteria.
    Selftest {
        /// Seed for the fuzz campaign.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct FuzzArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 6, 8])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    m_min: usize,
    #[arg(long, default_value_t = 6)]
    m_max: usize,
    /// Trials per (dimension, m) pair.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated check names, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    checks: Vec<String>,
    /// Exponents for the refined union bound.
    #[arg(long, value_delimiter = ',', default_values_t = [1.1, 2.0, 5.0])]
    p_values: Vec<f64>,
    /// Inequality margins below this are violations.
    #[arg(long, default_value_t = -1e-9, allow_negative_numbers = true)]
    threshold: f64,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<String>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
    /// Leave the timestamp out of JSON reports.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Qubit,
    Club,
    Qutrit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    /// The family's usual grid.
    Standard,
    /// No grid points; only the header is written.
    Empty,
}

#[derive(clap::Args)]
struct TightnessArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Comma-separated numbers of measurements; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Comma-separated angles in radians; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    /// Weight ratio a_{t+1}/a_t for the weighted family.
    #[arg(long, default_value_t = 1.0)]
    a_ratio: f64,
    #[arg(long, value_enum, default_value = "standard")]
    grid: Grid,
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fuzz(args) => run_fuzz(args),
        Command::Tightness(args) => run_tightness(args),
        Command::Demo => run_demo(),
        Command::Selftest { seed } => run_selftest(seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn emit(out: &Option<String>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::InvalidParameter(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_fuzz(args: FuzzArgs) -> Result<ExitCode, Error> {
    let checks = if args.checks.iter().any(|c| c == "all") {
        CheckId::ALL.to_vec()
    } else {
        args.checks.iter().map(|c| c.parse()).collect::<Result<Vec<CheckId>, _>>()?
    };
    let cfg = FuzzConfig {
        dims: args.dims,
        m_min: args.m_min,
        m_max: args.m_max,
        trials: args.trials,
        checks,
        kmw_p_values: args.p_values,
        seed: Seed(args.seed),
        violation_threshold: args.threshold,
    };
    let exec = if args.serial { Execution::Serial } else { Execution::Parallel };
    let mut report = fuzz(&cfg, exec)?;
    if args.csv {
        emit(&args.out, &report.to_csv())?;
    } else {
        if !args.no_timestamp {
            report.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
        }
        emit(&args.out, &(report.to_json() + "\n"))?;
    }
    for c in report.per_check.iter().filter(|c| !c.pass) {
        eprintln!("violation: {} min margin {:e} at seed {}", c.name, c.min_margin, c.worst_seed.0);
    }
    for e in &report.errors {
        eprintln!("instance error at seed {}: {}", e.seed.0, e.error);
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VIOLATION) })
}

fn run_tightness(args: TightnessArgs) -> Result<ExitCode, Error> {
    let kind = match args.kind {
        Kind::Qubit => SweepKind::Qubit,
        Kind::Club => SweepKind::Club,
        Kind::Qutrit => SweepKind::Qutrit,
    };
    let mut grid = match args.grid {
        Grid::Standard => SweepGrid::standard(kind),
        Grid::Empty => SweepGrid { ms: vec![], deltas: vec![], a_ratio: 1.0 },
    };
    if let Some(ms) = args.m {
        grid.ms = ms;
    }
    if let Some(deltas) = args.delta {
        grid.deltas = deltas;
    }
    if !args.a_ratio.is_finite() || args.a_ratio <= 0.0 {
        return Err(Error::InvalidParameter(format!("weight ratio {} must be positive", args.a_ratio)));
    }
    grid.a_ratio = args.a_ratio;
    emit(&args.out, &rows_to_csv(&tightness_sweep(kind, &grid)))?;
    Ok(ExitCode::SUCCESS)
}

fn show_matrix(m: &CMatrix) -> String {
    (0..m.dim())
        .map(|i| {
            let row: Vec<String> = (0..m.dim()).map(|j| format!("{:+.6}", m[(i, j)].re)).collect();
            format!("    [{}]", row.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn show_margin(m: &Margin) {
    println!("  {:<28} lhs {:.9}  rhs {:.9}  margin {:+.3e}", m.name, m.lhs, m.rhs, m.margin);
}

fn run_demo() -> Result<ExitCode, Error> {
    let delta: f64 = 0.1;
    println!("Two measurements on a qubit, δ = {delta}");
    println!("ρ = |0⟩⟨0|; A_t projects onto the line at angle (−1)^t·δ\n");
    let rho = DensityMatrix::basis(2, 0);
    let ps: Vec<Projector> = [-delta, delta]
        .iter()
        .map(|t| Projector::onto_real_span(2, &[&[t.cos(), t.sin()]]))
        .collect::<Result<_, _>>()?;
    for (i, p) in ps.iter().enumerate() {
        println!("A_{} =\n{}", i + 1, show_matrix(p.herm().matrix()));
    }
    let traj = run_sequence(&rho, &ps)?;
    println!("\n  t   p_t          ε_t          q_t          r_t          F(ρ, ρ_t)");
    for t in 0..=traj.m() {
        let (eps, q) = if t == 0 { (String::new(), String::new()) } else {
            (format!("{:.9}", traj.eps[t - 1]), format!("{:.9}", traj.q[t - 1]))
        };
        let f = traj.fidelity_at(t).map(|f| format!("{f:.9}")).unwrap_or_default();
        println!("  {t}   {:.9}  {eps:<11}  {q:<11}  {:.9}  {f}", traj.p[t], traj.r[t]);
    }
    let closed = qubit_family(2, delta)?;
    println!("\nSucc {:.9}  Fail {:.9}  Loss {:.9}", traj.succ, traj.fail, traj.loss);
    println!("closed form Fail = 1 − cos²δ·cos²2δ = {:.9}", closed.fail_exact);
    println!("Fail/Loss = {:.6} (limit (4m−3)/m = {})\n", closed.ratio, closed.limit_ratio);
    println!("margins (rhs − lhs):");
    show_margin(&check_theorem1(&traj)?);
    let (sharp, plain) = check_union_bound(&traj);
    sharp.iter().for_each(show_margin);
    show_margin(&plain);
    let (infid, td) = check_gentle(&traj)?;
    show_margin(&infid);
    show_margin(&td);
    show_margin(&check_kmw(&traj, 2.0)?);
    let (sum, cs) = check_telescoping(&traj)?;
    show_margin(&sum);
    show_margin(&cs);
    show_margin(&check_conservation(&traj));
    show_margin(&check_first_step(&traj));
    Ok(ExitCode::SUCCESS)
}

fn run_selftest(seed: u64) -> Result<ExitCode, Error> {
    let results = criteria::run_all(seed);
    for r in &results {
        println!("{r}");
    }
    let pass = results.iter().all(|r| r.pass);
    println!("{}", if pass { "all criteria passed" } else { "some criteria failed" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VIOLATION) })
}
