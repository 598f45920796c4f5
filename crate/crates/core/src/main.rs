use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inferfl::causal::MatchingStrategy;
use inferfl::driver::{
    cmd_corpus_gen, cmd_evaluate, cmd_localize, cmd_trace, EvaluateArgs, LocalizeArgs,
    PipelineConfig,
};
use inferfl::evaluation::Technique;
use inferfl::infotheory::Phi;
use inferfl::spectrum::SpectrumMode;
use inferfl::Result;

#[derive(Parser)]
#[command(
    name = "inferfl",
    version,
    about = "Fault localization with causal inference over slice spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a program on a test suite and export spectra, PDG and verdicts.
    Trace {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also export the per-test dynamic dependence graphs.
        #[arg(long)]
        ddg: bool,
    },
    /// Rank statements from a spectrum and static PDG.
    Localize {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        pdg: PathBuf,
        /// Spectrum for the causal stage (defaults to --spectrum).
        #[arg(long)]
        effect_spectrum: Option<PathBuf>,
        #[arg(long)]
        prior_file: Option<PathBuf>,
        #[arg(long, default_value = "inference")]
        technique: Technique,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Aligned text table instead of JSON.
        #[arg(long)]
        text: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Compare techniques over a corpus directory.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated technique list.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "inference,ochiai,o,gp19,dstar"
        )]
        techniques: Vec<Technique>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write the golden case and the seeded-fault corpus.
    CorpusGen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Coverage,
    Slice,
}

#[derive(Args)]
struct PipelineArgs {
    /// Spectrum mode used when a corpus case does not fix one.
    #[arg(long, value_enum, default_value = "slice")]
    mode: ModeArg,
    #[arg(long, default_value = "shannon")]
    phi: Phi,
    #[arg(long, default_value_t = 0.30)]
    delta_fraction: f64,
    #[arg(long, default_value_t = 5)]
    chain_cap: usize,
    #[arg(long, default_value = "nearest")]
    matching: MatchingStrategy,
    #[arg(long, default_value_t = 1e-4)]
    ridge: f64,
    #[arg(long, default_value_t = 0.2)]
    caliper: f64,
    /// Accepted for symmetry with the fixture tools; the pipeline is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

impl PipelineArgs {
    fn config(&self, techniques: Vec<Technique>) -> PipelineConfig {
        PipelineConfig {
            mode: match self.mode {
                ModeArg::Coverage => SpectrumMode::Coverage,
                ModeArg::Slice => SpectrumMode::Slice,
            },
            phi: self.phi,
            delta_fraction: self.delta_fraction,
            chain_cap: self.chain_cap,
            matching: self.matching,
            ridge: self.ridge,
            caliper: self.caliper,
            techniques,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match cli.command {
        Command::Trace {
            program,
            tests,
            out,
            ddg,
        } => {
            let t = cmd_trace(&program, &tests, &out, ddg)?;
            let _ = writeln!(
                stdout,
                "{} statements, {} tests ({} failing) -> {}",
                t.program.len(),
                t.executed.len(),
                t.failing(),
                out.display()
            );
        }
        Command::Localize {
            spectrum,
            pdg,
            effect_spectrum,
            prior_file,
            technique,
            out,
            text,
            pipeline,
        } => {
            let cfg = pipeline.config(vec![technique]);
            let rendered = cmd_localize(
                &LocalizeArgs {
                    spectrum: &spectrum,
                    pdg: &pdg,
                    effect_spectrum: effect_spectrum.as_deref(),
                    prior_file: prior_file.as_deref(),
                    technique,
                    out: out.as_deref(),
                    text,
                },
                &cfg,
            )?;
            if out.is_none() {
                let _ = stdout.write_all(rendered.as_bytes());
            }
        }
        Command::Evaluate {
            corpus,
            techniques,
            json,
            out,
            pipeline,
        } => {
            let cfg = pipeline.config(techniques);
            let output = cmd_evaluate(
                &EvaluateArgs {
                    corpus: &corpus,
                    json: json.as_deref(),
                    out: out.as_deref(),
                },
                &cfg,
            )?;
            for s in &output.skipped {
                eprintln!("warning: skipped case `{}`: {}", s.name, s.reason);
            }
            if out.is_none() {
                let _ = stdout.write_all(output.to_text().as_bytes());
            }
        }
        Command::CorpusGen { out, seed } => {
            let cases = cmd_corpus_gen(&out, seed)?;
            let _ = writeln!(stdout, "wrote {} cases to {}", cases.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
