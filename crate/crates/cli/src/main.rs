use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elf_bench::bench::{render_ndjson, render_table};
use elf_bench::{
    bench_series, compress_file, dataset_name, decompress_file, read_csv, verify, BenchConfig,
    CliError, Column, IngestOptions,
};
use elf_codec::{Algorithm, IeeeFloat};

/// Compress, benchmark and verify floating-point time series.
#[derive(Debug, Parser)]
#[command(name = "elfc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress one CSV column into a .elfc file
    Compress {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgoArg::Elfplus)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 1000)]
        block_size: usize,
        #[command(flatten)]
        input_args: InputArgs,
    },
    /// Print the values of a .elfc file, one per line
    Decompress {
        input: PathBuf,
        /// Write to a file instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Measure compression ratio and time per block
    Bench {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Algorithms to run (comma separated); all by default
        #[arg(long, value_enum, value_delimiter = ',')]
        algo: Vec<AlgoArg>,
        #[arg(long, default_value_t = 1000)]
        block_size: usize,
        #[arg(long, default_value_t = 100)]
        max_blocks: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        report: ReportFormat,
        #[command(flatten)]
        input_args: InputArgs,
    },
    /// Check that every block decompresses to the original bits
    Verify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',')]
        algo: Vec<AlgoArg>,
        #[arg(long, default_value_t = 1000)]
        block_size: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        report: ReportFormat,
        #[command(flatten)]
        input_args: InputArgs,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    /// Column to read: 0-based index or header name
    #[arg(long, default_value = "0")]
    column: Column,
    /// First row is a header (implied by a named column)
    #[arg(long)]
    has_header: bool,
    /// Skip rows whose cell is not a number instead of failing
    #[arg(long)]
    skip_bad_rows: bool,
}

impl InputArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            column: self.column.clone(),
            has_header: self.has_header,
            skip_bad_rows: self.skip_bad_rows,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Elf,
    Elfplus,
    Gorilla,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Elf => Algorithm::Elf,
            AlgoArg::Elfplus => Algorithm::ElfPlus,
            AlgoArg::Gorilla => Algorithm::Gorilla,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Ndjson,
}

fn algorithms(args: &[AlgoArg]) -> Vec<Algorithm> {
    if args.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.iter().map(|&a| a.into()).collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("elfc: {} error: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Compress {
            input,
            output,
            algo,
            block_size,
            input_args,
        } => {
            let opts = input_args.options();
            let summary = match input_args.precision {
                PrecisionArg::Double => {
                    compress_file::<f64>(&input, &output, &opts, algo.into(), block_size)?
                }
                PrecisionArg::Single => {
                    compress_file::<f32>(&input, &output, &opts, algo.into(), block_size)?
                }
            };
            eprintln!(
                "{} values in {} blocks, {} bytes{}",
                summary.values,
                summary.blocks,
                summary.bytes,
                skipped_note(summary.skipped_rows)
            );
            Ok(())
        }
        Command::Decompress { input, output } => {
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    let mut writer = io::BufWriter::new(file);
                    decompress_file(&input, &mut writer)?;
                    writer
                        .flush()
                        .map_err(|source| CliError::Io { path, source })?;
                }
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    decompress_file(&input, &mut lock)?;
                }
            }
            Ok(())
        }
        Command::Bench {
            paths,
            algo,
            block_size,
            max_blocks,
            report,
            input_args,
        } => {
            let cfg = BenchConfig {
                block_size,
                max_blocks,
            };
            let algos = algorithms(&algo);
            let mut rows = Vec::new();
            for path in &paths {
                rows.extend(match input_args.precision {
                    PrecisionArg::Double => bench_file::<f64>(path, &input_args, &algos, &cfg)?,
                    PrecisionArg::Single => bench_file::<f32>(path, &input_args, &algos, &cfg)?,
                });
            }
            print!(
                "{}",
                match report {
                    ReportFormat::Table => render_table(&rows),
                    ReportFormat::Ndjson => render_ndjson(&rows),
                }
            );
            Ok(())
        }
        Command::Verify {
            paths,
            algo,
            block_size,
            report,
            input_args,
        } => {
            let algos = algorithms(&algo);
            let mut failures = 0;
            for path in &paths {
                failures += match input_args.precision {
                    PrecisionArg::Double => {
                        verify_file::<f64>(path, &input_args, &algos, block_size, report)?
                    }
                    PrecisionArg::Single => {
                        verify_file::<f32>(path, &input_args, &algos, block_size, report)?
                    }
                };
            }
            if failures > 0 {
                return Err(CliError::Verification(format!(
                    "{failures} round trip(s) failed"
                )));
            }
            Ok(())
        }
    }
}

fn skipped_note(skipped: usize) -> String {
    if skipped == 0 {
        String::new()
    } else {
        format!(" ({skipped} bad rows skipped)")
    }
}

fn bench_file<F: IeeeFloat>(
    path: &Path,
    input_args: &InputArgs,
    algos: &[Algorithm],
    cfg: &BenchConfig,
) -> Result<Vec<elf_bench::BenchRow>, CliError> {
    let series = read_csv::<F>(path, &input_args.options())?;
    if series.skipped_rows > 0 {
        eprintln!("{}:{}", path.display(), skipped_note(series.skipped_rows));
    }
    Ok(bench_series(&dataset_name(path), &series.values, algos, cfg)?)
}

fn verify_file<F: IeeeFloat>(
    path: &Path,
    input_args: &InputArgs,
    algos: &[Algorithm],
    block_size: usize,
    report: ReportFormat,
) -> Result<usize, CliError> {
    let series = read_csv::<F>(path, &input_args.options())?;
    let name = dataset_name(path);
    let mut failures = 0;
    for &algorithm in algos {
        let result = verify(&name, &series.values, algorithm, block_size)?;
        if !result.passed() {
            failures += 1;
        }
        match report {
            ReportFormat::Table => println!("{result}"),
            ReportFormat::Ndjson => println!(
                "{}",
                serde_json::to_string(&result).unwrap_or_default()
            ),
        }
    }
    Ok(failures)
}
