use clap::{Args, Parser, Subcommand};

use curvebound::report::{
    cmd_bound, cmd_cheeger, cmd_curvature, cmd_shells, cmd_spectrum, cmd_verify, EnvelopeMode,
    OutputFormat, ReportDocument, RunConfig,
};

/// Curvature, Cheeger constants, growth envelopes, and verified spectral
/// bounds on finite graphs.
#[derive(Parser)]
#[command(name = "curvebound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Graph source: a file in the text format, or `gen:<family>` such as
    /// gen:cycle:6, gen:hypercube:4, gen:torus:8,2, gen:tree:3,5,
    /// gen:complete:4, gen:product:cycle:3,cycle:3
    source: String,
    /// Walk laziness as an exact rational in [0, 1)
    #[arg(long, default_value = "1/2")]
    laziness: String,
    /// Growth side of the envelope
    #[arg(long, value_enum, default_value = "empirical")]
    envelope: EnvelopeArg,
    /// Envelope table for --envelope file (rows `k,nu` or `k nu`)
    #[arg(long)]
    envelope_file: Option<String>,
    /// Cut set: `auto`, `middle-slice`, `sphere:<x>,<r>`, or a vertex list
    /// file
    #[arg(long, default_value = "auto")]
    sigma: String,
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
    /// Seed for sampled checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertex cap for the dense eigensolver
    #[arg(long, default_value_t = 1500)]
    max_dense: usize,
    /// Restrict curvature output to edges away from truncation boundaries
    #[arg(long)]
    interior_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Per-edge curvature table and global lower bound
    Curvature(Common),
    /// Cheeger constant with optimizing witness
    Cheeger {
        #[command(flatten)]
        common: Common,
        /// Boundary kind
        #[arg(long, default_value = "outer")]
        kind: String,
        /// Higher-order constant over partitions into N cells
        #[arg(long)]
        higher: Option<usize>,
    },
    /// Shell profile around a cut set
    Shells(Common),
    /// Envelope-driven eigenvalue bounds against the true spectrum
    Bound(Common),
    /// Laplacian spectrum
    Spectrum(Common),
    /// Full verification pipeline with one verdict per check
    Verify(Common),
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EnvelopeArg {
    Curvature,
    Empirical,
    Constant,
    File,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Human,
}

fn build_config(command: &str, common: &Common) -> RunConfig {
    RunConfig {
        command: command.into(),
        source: common.source.clone(),
        laziness: common.laziness.clone(),
        envelope: match common.envelope {
            EnvelopeArg::Curvature => EnvelopeMode::Curvature,
            EnvelopeArg::Empirical => EnvelopeMode::Empirical,
            EnvelopeArg::Constant => EnvelopeMode::Constant,
            EnvelopeArg::File => EnvelopeMode::File,
        },
        envelope_file: common.envelope_file.clone(),
        sigma: common.sigma.clone(),
        format: match common.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Human => OutputFormat::Human,
        },
        seed: common.seed,
        max_dense: common.max_dense,
        interior_only: common.interior_only,
        cheeger_kind: "outer".into(),
        higher_order: None,
    }
}

fn main() {
    let cli = Cli::parse();
    let result: curvebound::Result<ReportDocument> = match &cli.command {
        Command::Curvature(c) => cmd_curvature(&build_config("curvature", c)),
        Command::Cheeger {
            common,
            kind,
            higher,
        } => {
            let mut config = build_config("cheeger", common);
            config.cheeger_kind = kind.clone();
            config.higher_order = *higher;
            cmd_cheeger(&config)
        }
        Command::Shells(c) => cmd_shells(&build_config("shells", c)),
        Command::Bound(c) => cmd_bound(&build_config("bound", c)),
        Command::Spectrum(c) => cmd_spectrum(&build_config("spectrum", c)),
        Command::Verify(c) => cmd_verify(&build_config("verify", c)),
    };
    match result {
        Ok(doc) => {
            print!("{}", doc.emit());
            std::process::exit(doc.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
