use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grafield::generators::{GeneratorSpec, Model};
use grafield::graphon::{GraphonOptions, MarginalMode, ScaleConvention, SelectionMode};
use grafield::pipeline::{
    run_analyze, run_diagnose, run_generate, run_graphon, AnalyzeConfig, DiagnoseConfig,
    GraphFormat, GraphInput, GraphonConfig, InputSource, TestKind,
};
use grafield::{Error, Result};

#[derive(Parser)]
#[command(
    name = "grafield",
    version,
    about = "LP graph transform, correlation density fields and graphon estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph (or its expected adjacency) and write it out.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, value_enum, default_value_t = Format::Edges)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Basis, coefficients, selection and the reconstructed field.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        max_degree: Option<usize>,
        /// Use all |support| - 1 basis functions per axis.
        #[arg(long, conflicts_with = "max_degree")]
        full_rank: bool,
        /// Keep every coefficient instead of the penalized selection.
        #[arg(long)]
        no_select: bool,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// Do not clip negative field values on the grid.
        #[arg(long)]
        no_clip: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Correlogram and chi-square test against the independence null.
    Diagnose {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, num_args = 2, value_names = ["J", "K"])]
        grid: Option<Vec<usize>>,
        /// Square `d x d` grid; same as `--grid d d`.
        #[arg(long, conflicts_with = "grid")]
        max_degree: Option<usize>,
        #[arg(long, value_enum, default_value_t = TestArg::Full)]
        test: TestArg,
        #[arg(long)]
        null_band: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Smooth graphon estimate on a midpoint grid.
    Graphon {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long, value_enum, default_value_t = MarginalArg::Smoothed)]
        marginals: MarginalArg,
        #[arg(long, value_enum, default_value_t = SelectionArg::Selected)]
        selection: SelectionArg,
        /// Report p(x,y)-scale values instead of edge probabilities.
        #[arg(long)]
        raw_density: bool,
        /// Contiguous block sizes for block averages, e.g. 40,60.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
        /// Leave self-pairs out of block averages.
        #[arg(long)]
        zero_diagonal: bool,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edges,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Full,
    Selected,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarginalArg {
    Empirical,
    Smoothed,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Full,
    Selected,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Er,
    Bipartite,
    Sbm,
    Null,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Block sizes (sbm) or the two side sizes (bipartite).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Row-major block probabilities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    prob_matrix: Option<Vec<f64>>,
    /// Number of edge draws for the null model.
    #[arg(long)]
    edges: Option<u64>,
    /// Emit edge probabilities instead of a sample.
    #[arg(long)]
    expected: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    directed: bool,
}

#[derive(Args)]
struct InputArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with_all = ["adjacency", "kind"])]
    input: Option<PathBuf>,
    /// Dense adjacency CSV.
    #[arg(long, conflicts_with = "kind")]
    adjacency: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    /// Relabel nodes by descending degree before analysis.
    #[arg(long)]
    order_by_degree: bool,
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("--kind {kind} requires --{flag}")))
}

impl GenArgs {
    fn spec(&self) -> Result<GeneratorSpec> {
        let kind = self.kind.ok_or_else(|| {
            Error::InvalidParameter("no input: give --input, --adjacency or --kind".into())
        })?;
        let model = match kind {
            Kind::Er => Model::ErdosRenyi {
                n: need(self.n, "n", "er")?,
                p: need(self.p, "p", "er")?,
                directed: self.directed,
            },
            Kind::Bipartite => {
                let p = need(self.p, "p", "bipartite")?;
                let (n1, n2) = match (&self.sizes, self.n) {
                    (Some(s), _) if s.len() == 2 => (s[0], s[1]),
                    (Some(_), _) => {
                        return Err(Error::InvalidParameter(
                            "--kind bipartite takes exactly two --sizes".into(),
                        ))
                    }
                    (None, Some(n)) => (n / 2, n - n / 2),
                    (None, None) => {
                        return Err(Error::InvalidParameter(
                            "--kind bipartite requires --sizes or --n".into(),
                        ))
                    }
                };
                Model::Bipartite { n1, n2, p }
            }
            Kind::Sbm => {
                let sizes = need(self.sizes.clone(), "sizes", "sbm")?;
                let flat = need(self.prob_matrix.clone(), "prob-matrix", "sbm")?;
                let b = sizes.len();
                if flat.len() != b * b {
                    return Err(Error::InvalidParameter(format!(
                        "--prob-matrix needs {} entries for {b} blocks, got {}",
                        b * b,
                        flat.len()
                    )));
                }
                Model::Sbm {
                    sizes,
                    probs: flat.chunks(b).map(<[f64]>::to_vec).collect(),
                    directed: self.directed,
                }
            }
            Kind::Null => Model::Null {
                n: need(self.n, "n", "null")?,
                edges: need(self.edges, "edges", "null")?,
            },
        };
        model.validate()?;
        Ok(GeneratorSpec {
            model,
            seed: self.seed,
        })
    }
}

impl InputArgs {
    fn resolve(&self) -> Result<GraphInput> {
        let source = match (&self.input, &self.adjacency) {
            (Some(p), None) => InputSource::EdgeList(p.clone()),
            (None, Some(p)) => InputSource::Adjacency(p.clone()),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter("give only one input source".into()))
            }
            (None, None) => InputSource::Generator {
                spec: self.gen.spec()?,
                expected: self.gen.expected,
            },
        };
        Ok(GraphInput {
            source,
            directed: self.gen.directed,
            order_by_degree: self.order_by_degree,
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { gen, format, out } => {
            let format = match format {
                Format::Edges => GraphFormat::EdgeList,
                Format::Csv => GraphFormat::AdjacencyCsv,
            };
            run_generate(&gen.spec()?, gen.expected, format, &out)?;
        }
        Command::Analyze {
            input,
            max_degree,
            full_rank,
            no_select,
            resolution,
            no_clip,
            out_dir,
        } => {
            let r = run_analyze(&AnalyzeConfig {
                input: input.resolve()?,
                max_degree,
                full_rank,
                select: !no_select,
                resolution,
                clip: !no_clip,
                out_dir,
            })?;
            eprintln!(
                "k* = {}, LPINFOR full = {:.6}, selected = {:.6}",
                r.k_star, r.lpinfor_full, r.lpinfor_selected
            );
        }
        Command::Diagnose {
            input,
            grid,
            max_degree,
            test,
            null_band,
            out_dir,
        } => {
            let r = run_diagnose(&DiagnoseConfig {
                input: input.resolve()?,
                grid: grid.map(|g| (g[0], g[1])).or(max_degree.map(|d| (d, d))),
                test: match test {
                    TestArg::Full => TestKind::Full,
                    TestArg::Selected => TestKind::Selected,
                },
                null_band,
                out_dir,
            })?;
            eprintln!(
                "outside band: {:.4}, p-value = {:.6}{}",
                r.outside_fraction,
                r.p_value,
                if r.reject_at_5pct {
                    " (reject at 5%)"
                } else {
                    ""
                }
            );
        }
        Command::Graphon {
            input,
            max_degree,
            marginals,
            selection,
            raw_density,
            blocks,
            zero_diagonal,
            resolution,
            out_dir,
        } => {
            let options = GraphonOptions {
                marginal_mode: match marginals {
                    MarginalArg::Empirical => MarginalMode::Empirical,
                    MarginalArg::Smoothed => MarginalMode::Smoothed,
                },
                selection_mode: match selection {
                    SelectionArg::Full => SelectionMode::Full,
                    SelectionArg::Selected => SelectionMode::Selected,
                },
                scale_convention: if raw_density {
                    ScaleConvention::Raw
                } else {
                    ScaleConvention::TotalWeight
                },
                max_degree,
            };
            run_graphon(&GraphonConfig {
                input: input.resolve()?,
                options,
                resolution,
                blocks,
                zero_diagonal,
                out_dir,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("grafield: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
