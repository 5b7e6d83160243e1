use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use factorforge::catalog::{Catalog, Generators, GroupSpecRecord, Kind};
use factorforge::recognize::{alternating_order, search_factor_subgroup};
use factorforge::report::{exit, parse_rows, read_cases, table1_cases, Harness};
use factorforge::{BigCount, Error};

#[derive(Parser)]
#[command(name = "factorforge", version, about = "Verify group factorizations G = HK")]
struct Cli {
    /// Asset directory containing groups/ and cases/ (default: $FACTORFORGE_DATA or the bundled data)
    #[arg(long, global = true, value_name = "DIR")]
    data: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the case(s) in a case file
    Verify {
        case_file: PathBuf,
        /// Print the full JSON report after the verdict lines
        #[arg(long)]
        json: bool,
        /// Maximum number of cosets to explore (default: twice the index)
        #[arg(long)]
        budget_cap: Option<BigCount>,
    },
    /// Run the Table 1 suite
    Table1 {
        /// Rows to run, e.g. 1,4,5-8 (default: all)
        #[arg(long)]
        rows: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        budget_cap: Option<BigCount>,
    },
    /// Seeded random search for H ≅ A_n with G = HK
    Search {
        /// Group record name
        group: String,
        /// Record name of K
        k: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        attempts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the discovered H as a group record to this file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the transcript here instead of stdout
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let catalog = match &cli.data {
        Some(dir) => Catalog::new(dir),
        None => Catalog::from_env(),
    };
    let code = match run(cli.command, catalog) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::INPUT
        }
    };
    ExitCode::from(code as u8)
}

fn run(command: Command, catalog: Catalog) -> Result<i32, Error> {
    match command {
        Command::Verify { case_file, json, budget_cap } => {
            let cases = read_cases(&case_file)?;
            let stem = case_file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let labelled: Vec<_> = cases.into_iter().enumerate().map(|(i, c)| (format!("{stem}.{}", i + 1), c)).collect();
            let mut harness = Harness::new(catalog);
            harness.budget_cap = budget_cap;
            let report = harness.run_suite(&labelled);
            for c in &report.cases {
                println!("{}", c.verdict_line());
            }
            if json {
                println!("{}", report.to_json());
            }
            Ok(report.exit_code())
        }
        Command::Table1 { rows, format, out, threads, budget_cap } => {
            let rows = match rows {
                Some(r) => parse_rows(&r)?,
                None => (1..=factorforge::report::TABLE1_ROWS).collect(),
            };
            let cases = table1_cases(&catalog, &rows)?;
            let mut harness = Harness::new(catalog);
            harness.budget_cap = budget_cap;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Unsupported(e.to_string()))?;
            let report = pool.install(|| harness.run_suite(&cases));
            for c in &report.cases {
                eprintln!("{}", c.verdict_line());
            }
            let text = match format {
                Format::Json => report.to_json(),
                Format::Md => report.to_markdown(),
            };
            emit(out.as_deref(), &text)?;
            Ok(report.exit_code())
        }
        Command::Search { group, k, n, attempts, seed, out, transcript } => {
            let g = catalog.load(&group)?;
            let k = catalog.load(&k)?;
            let t = search_factor_subgroup(&g, &k.gens, n, attempts, seed)?;
            emit(transcript.as_deref(), &serde_json::to_string_pretty(&t).expect("transcript serializes"))?;
            let Some(found) = t.success else {
                eprintln!("no A{n} factor found in {attempts} attempts (seed {seed})");
                return Ok(exit::SEARCH_EXHAUSTED);
            };
            eprintln!("found A{n} factor at attempt {} (seed {seed})", found.attempt);
            if let Some(path) = out {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("{group}_h_a{n}"));
                let record = GroupSpecRecord {
                    name,
                    kind: Kind::PermAsset,
                    degree: g.degree(),
                    expected_order: alternating_order(n).to_string(),
                    generators: Some(Generators::Cycles(found.generators)),
                    params: None,
                    claims: None,
                    provenance: format!("seeded search in {group}: seed {seed}, attempt {}", found.attempt),
                };
                emit(Some(&path), &serde_json::to_string_pretty(&record).expect("record serializes"))?;
            }
            Ok(exit::PASS)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|source| Error::Io { path: p.display().to_string(), source }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
