use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperkloos::bilinear::SampleSet;
use hyperkloos::energy::{CountMethod, EnergyReport};
use hyperkloos::kloosterman::spectral_table;
use hyperkloos::sweep::{run_diag, run_sweep, DiagConfig, SweepConfig, SweepError};
use hyperkloos::{deligne_excess, Budget, Error, KloostermanTable, Method, PrimeField};

#[derive(Parser)]
#[command(name = "hyperkloos", version, about = "Hyper-Kloosterman sums, bilinear bounds and energy counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the table n,re,im of K_{r,p}(n) for n = 1..p-1.
    Table {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = Method::Spectral)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = Budget::DEFAULT.0)]
        budget: u64,
    },
    /// Check the Deligne bound and the character-sum identity for every
    /// prime 3 <= p <= p-max and 1 <= r <= r-max.
    Verify {
        #[arg(long = "p-max")]
        p_max: u64,
        #[arg(long = "r-max")]
        r_max: u32,
        #[arg(long, default_value_t = 1e-9)]
        deligne_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        identity_tol: f64,
    },
    /// Run a bilinear sweep from a JSON config.
    Bilinear {
        #[arg(long)]
        config: PathBuf,
    },
    /// Count J(H, M) and evaluate the energy bounds.
    Energy {
        #[arg(long)]
        p: u64,
        #[arg(long = "H")]
        h: u32,
        /// `1,2,3` | `random:SIZE:SEED` | `interval:START:END` | `all`
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "fast")]
        method: CountMethod,
        #[arg(long)]
        grh: bool,
        #[arg(long, default_value_t = Budget::DEFAULT.0)]
        budget: u64,
    },
    /// Proof diagnostics for one instance, as JSON.
    Diag {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Infeasible(String),
    Violation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) | Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = format!("{}: {e}", e.kind());
        match e {
            Error::Infeasible { .. } => Failure::Infeasible(msg),
            _ => Failure::Validation(msg),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Validation(_) => Failure::Validation(e.to_string()),
            SweepError::Infeasible(_) => Failure::Infeasible(e.to_string()),
            SweepError::Invariant(_) => Failure::Violation(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Validation(format!("config error in {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn cmd_table(p: u64, r: u32, method: Method, out: &Path, budget: u64) -> Result<(), Failure> {
    let field = PrimeField::new(p)?;
    let table = KloostermanTable::build(&field, r, method, Budget(budget))?;
    let file = fs::File::create(out).map_err(|e| io_err(out, e))?;
    let mut w = BufWriter::new(file);
    table.write_csv(&mut w).map_err(|e| io_err(out, e))?;
    w.flush().map_err(|e| io_err(out, e))
}

fn cmd_verify(p_max: u64, r_max: u32, deligne_tol: f64, identity_tol: f64) -> Result<(), Failure> {
    if r_max < 1 {
        return Err(Failure::Validation("r-max >= 1 violated".into()));
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut worst_excess = 0.0f64;
    let mut worst_defect = 0.0f64;
    let mut tables = 0u64;
    let mut failures = Vec::new();
    for p in (3..=p_max).filter(|&p| hyperkloos::field::is_prime(p)) {
        let field = PrimeField::new(p)?;
        for r in 1..=r_max {
            let table = spectral_table(&field, r)?;
            let excess = deligne_excess(&table);
            let defect = table.character_sum_defect();
            worst_excess = worst_excess.max(excess);
            worst_defect = worst_defect.max(defect);
            tables += 1;
            if excess > deligne_tol || defect > identity_tol {
                failures.push(format!("p = {p}, r = {r}: deligne_excess = {excess:e}, identity defect = {defect:e}"));
            }
        }
    }
    let _ = writeln!(out, "tables={tables} max_deligne_excess={worst_excess:e} max_identity_defect={worst_defect:e}");
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(failures.join("\n")))
    }
}

fn cmd_bilinear(config: &Path) -> Result<(), Failure> {
    let cfg: SweepConfig = read_json(config)?;
    let output = run_sweep(&cfg)?;
    let csv = output.csv();
    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serializes");
    match &cfg.output.csv {
        Some(path) => write_file(Path::new(path), csv.as_bytes())?,
        None => print!("{csv}"),
    }
    match &cfg.output.summary {
        Some(path) => write_file(Path::new(path), format!("{summary}\n").as_bytes())?,
        None => eprintln!("{summary}"),
    }
    let missing = output.rows.iter().filter(|r| r.delta.is_none()).count();
    if missing > 0 {
        eprintln!("note: {missing} rows miss the length hypothesis N >= p^(3/(2l)); delta left blank");
    }
    Ok(())
}

fn parse_set(spec: &str, p: u32) -> Result<SampleSet, Failure> {
    let bad = || Failure::Validation(format!("bad --set spec {spec:?}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let set = match parts.as_slice() {
        ["all"] => SampleSet::new(p, (1..p).collect())?,
        ["random", size, seed] => SampleSet::random(p, num(size)? as usize, num(seed)?)?,
        ["interval", start, end] => {
            let (a, b) = (num(start)?, num(end)?);
            if a < 1 || a > b || b >= p as u64 {
                return Err(Failure::Validation(format!(
                    "interval {a}..={b} must satisfy 1 <= start <= end <= p - 1 = {}",
                    p - 1
                )));
            }
            SampleSet::new(p, (a as u32..=b as u32).collect())?
        }
        [list] => {
            let elems = list
                .split(',')
                .map(|s| num(s).and_then(|v| u32::try_from(v).map_err(|_| bad())))
                .collect::<Result<Vec<_>, _>>()?;
            SampleSet::new(p, elems)?
        }
        _ => return Err(bad()),
    };
    Ok(set)
}

fn cmd_energy(p: u64, h: u32, set: &str, method: CountMethod, grh: bool, budget: u64) -> Result<(), Failure> {
    let field = PrimeField::new(p)?;
    let set = parse_set(set, field.p())?;
    let report = EnergyReport::compute(&field, h, &set, method, grh, Budget(budget))?;
    println!("{}", EnergyReport::CSV_HEADER);
    println!("{}", report.csv_row());
    if !report.lower_bounds_hold() {
        return Err(Failure::Violation(format!("J = {} is below a lower bound", report.j)));
    }
    Ok(())
}

fn cmd_diag(config: &Path) -> Result<(), Failure> {
    let cfg: DiagConfig = read_json(config)?;
    let report = run_diag(&cfg)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cfg.output {
        Some(path) => write_file(Path::new(path), format!("{json}\n").as_bytes())?,
        None => println!("{json}"),
    }
    if !report.checks.all() {
        return Err(Failure::Violation(format!("diagnostic checks failed: {:?}", report.checks)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table { p, r, method, out, budget } => cmd_table(p, r, method, &out, budget),
        Command::Verify { p_max, r_max, deligne_tol, identity_tol } => {
            cmd_verify(p_max, r_max, deligne_tol, identity_tol)
        }
        Command::Bilinear { config } => cmd_bilinear(&config),
        Command::Energy { p, h, set, method, grh, budget } => cmd_energy(p, h, &set, method, grh, budget),
        Command::Diag { config } => cmd_diag(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Validation(m) | Failure::Infeasible(m) | Failure::Violation(m) | Failure::Io(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
