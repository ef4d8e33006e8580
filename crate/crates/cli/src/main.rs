use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use octagon::analyzer::{self, Format, ReportOptions};
use octagon::bench::{self, Impl, RunOptions};
use octagon::constraint::format_triples;
use octagon::{parse_constraints, Bound, ConstraintSet, DenseDbm, Mode, SparseDbm, WidenConfig};

#[derive(Parser)]
#[command(name = "octagon", version, about = "Sparse octagon domain tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Close a constraint file with the dense reference matrices.
    Oracle(OracleArgs),
    /// Close a constraint file into a weakly closed sparse matrix.
    Sparse(SparseArgs),
    /// Run the abstract interpreter on a program.
    Analyze(AnalyzeArgs),
    /// Time packed workloads and write a CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(id = "oracle_op", required = true, multiple = false)]
struct OracleOp {
    /// Shortest-path closure of the matrix as written.
    #[arg(long)]
    close: bool,
    /// Coherent closure followed by strengthening.
    #[arg(long)]
    strong_close: bool,
    /// Integer closure: close, tighten, strengthen.
    #[arg(long)]
    tight_close: bool,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    #[command(flatten)]
    op: OracleOp,
}

#[derive(Args)]
#[group(id = "sparse_op", multiple = false)]
struct SparseOp {
    /// Print the stored cells (default).
    #[arg(long)]
    weak_close: bool,
    /// Print the strengthened matrix.
    #[arg(long)]
    strengthen: bool,
    /// Print the number of stored cells.
    #[arg(long)]
    nnz: bool,
}

#[derive(Args)]
struct SparseArgs {
    file: PathBuf,
    #[command(flatten)]
    op: SparseOp,
    /// Variables range over the integers.
    #[arg(long)]
    int: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Tsv,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    /// Variables range over the integers.
    #[arg(long)]
    int: bool,
    /// List every stored cell at each point.
    #[arg(long)]
    cells: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: OutFormat,
    /// Loop iterations that join before widening.
    #[arg(long, default_value_t = WidenConfig::default().delay)]
    widen_delay: usize,
    /// Iteration from which growing variables are dropped.
    #[arg(long, default_value_t = WidenConfig::default().max_iterations)]
    max_iter: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of packs; a comma-separated list sweeps.
    #[arg(long, value_delimiter = ',', required = true)]
    packs: Vec<usize>,
    /// Variables per pack; a comma-separated list sweeps.
    #[arg(long, value_delimiter = ',', required = true)]
    pack_size: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "sparse,dense")]
    impls: Vec<String>,
}

fn read_constraints(path: &PathBuf) -> Result<ConstraintSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_constraints(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Prints the cells or `EMPTY`; exit code 0 or 1.
fn print_matrix(m: Option<DenseDbm>, cs: &ConstraintSet) -> ExitCode {
    let mut out = io::stdout().lock();
    match m {
        Some(d) => {
            let _ = out.write_all(format_triples(d.finite_cells(), &cs.vars).as_bytes());
            ExitCode::SUCCESS
        }
        None => {
            let _ = writeln!(out, "EMPTY");
            ExitCode::from(1)
        }
    }
}

fn oracle(args: &OracleArgs) -> Result<ExitCode> {
    let cs = read_constraints(&args.file)?;
    let d = DenseDbm::from_constraints(cs.n_vars(), &cs.constraints);
    let m = if args.op.close {
        d.close()
    } else if args.op.strong_close {
        d.strong_close()
    } else {
        d.tight_close()?
    };
    Ok(print_matrix(m, &cs))
}

fn sparse(args: &SparseArgs) -> Result<ExitCode> {
    let cs = read_constraints(&args.file)?;
    let mode = if args.int { Mode::Integer } else { Mode::Rational };
    let m = SparseDbm::from_constraints(&cs.constraints, cs.n_vars(), mode)?;
    if args.op.nnz {
        match &m {
            Some(m) => println!("{}", m.nnz()),
            None => println!("EMPTY"),
        }
        return Ok(if m.is_some() { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    if args.op.strengthen {
        return Ok(print_matrix(m.map(|m| m.strengthen_export()), &cs));
    }
    let Some(m) = m else { return Ok(print_matrix(None, &cs)) };
    let cells: Vec<_> = m.cells().map(|(u, v, c)| (u, v, Bound::Finite(c.clone()))).collect();
    print!("{}", format_triples(cells.iter().map(|(u, v, b)| (*u, *v, b)), &cs.vars));
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: &AnalyzeArgs) -> ExitCode {
    let run = || -> Result<bool> {
        let text = fs::read_to_string(&args.file)
            .with_context(|| format!("reading {}", args.file.display()))?;
        let program = analyzer::parse_program(&text)
            .with_context(|| format!("parsing {}", args.file.display()))?;
        let cfg = WidenConfig::new(args.widen_delay, args.max_iter)?;
        let mode = if args.int { Mode::Integer } else { Mode::Rational };
        let res = analyzer::analyze(&program, &cfg, mode)?;
        let opts = ReportOptions {
            format: match args.format {
                OutFormat::Text => Format::Text,
                OutFormat::Tsv => Format::Tsv,
            },
            cells: args.cells,
        };
        print!("{}", analyzer::render(&res, &opts));
        Ok(res.all_proven())
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn bench_cmd(args: &BenchArgs) -> Result<ExitCode> {
    let impls = args.impls.iter().map(|s| s.parse::<Impl>()).collect::<octagon::Result<Vec<_>>>()?;
    let mut all = Vec::new();
    for &k in &args.packs {
        for &p in &args.pack_size {
            let w = bench::gen_workload(k, p, args.seed)?;
            let ms = bench::run(&w, &impls, &RunOptions::default())?;
            for m in &ms {
                eprintln!(
                    "{:<13} {:<8} k={:<4} p={:<4} {:>12.2} us  nnz {} -> {}",
                    m.implementation, m.op, m.k, m.p, m.micros, m.nnz_before, m.nnz_after
                );
            }
            all.extend(ms);
        }
    }
    match &args.out {
        Some(path) => bench::emit_csv(&all, path)?,
        None => bench::write_csv(&all, io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Oracle(a) => oracle(a),
        Cmd::Sparse(a) => sparse(a),
        Cmd::Analyze(a) => return analyze(a),
        Cmd::Bench(a) => bench_cmd(a).or_else(|e| {
            eprintln!("error: {e:#}");
            Ok(ExitCode::from(1))
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
