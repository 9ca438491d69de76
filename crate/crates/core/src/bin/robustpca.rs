use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use robustpca::eval::{self, LabeledDataset, SynthConfig, Table2Config};
use robustpca::io::{self, Categorical, DatasetManifest, Encoding, Keyword, LabelColumn};
use robustpca::linalg::{EigenOrder, Matrix};
use robustpca::reducers::{HuberOptions, KernelSpec, MethodSpec, RobustScale};
use robustpca::robust::Influence;
use robustpca::Result;

#[derive(Parser)]
#[command(
    name = "robustpca",
    version,
    about = "Robust PCA, baselines and 1-NN evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a reducer and write it as a JSON model file.
    Fit(FitArgs),
    /// Project data with a saved model and write the result as CSV.
    Transform(TransformArgs),
    /// Cross-validate a reducer with 1-NN and write a report TSV.
    Eval(EvalArgs),
    /// Write the synthetic outlier-line dataset as CSV.
    Synth(SynthArgs),
    /// Run the dataset x dimension x method benchmark grid.
    Table2(Table2Args),
    /// Write first principal directions of 2-D data as plot TSV.
    Eigendirs(EigendirsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pca,
    Hpca,
    DchpcaSmad,
    DchpcaSn,
    KpcaGauss,
    KpcaPoly,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Desc,
    Asc,
}

#[derive(Clone, Copy, ValueEnum)]
enum InfluenceArg {
    Linear,
    Bounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Ordinal,
    OneHot,
}

#[derive(Args, Clone)]
struct MethodOpts {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Percentile of sample norms used as the Huber threshold.
    #[arg(long, default_value_t = 90, value_parser = clap::value_parser!(u8).range(0..=100))]
    c: u8,
    #[arg(long, value_enum, default_value = "desc")]
    eigen_order: OrderArg,
    /// How Huber weights enter the scatter matrix.
    #[arg(long, value_enum, default_value = "bounded")]
    influence: InfluenceArg,
    /// Gaussian kernel width; defaults to the median pairwise distance.
    #[arg(long)]
    kernel_sigma: Option<f64>,
    #[arg(long, default_value_t = 2)]
    poly_degree: u32,
    #[arg(long, default_value_t = 1.0)]
    poly_coef: f64,
}

impl MethodOpts {
    fn huber(&self) -> HuberOptions {
        HuberOptions {
            percentile: self.c,
            eigen_order: match self.eigen_order {
                OrderArg::Desc => EigenOrder::Descending,
                OrderArg::Asc => EigenOrder::Ascending,
            },
            influence: match self.influence {
                InfluenceArg::Linear => Influence::Linear,
                InfluenceArg::Bounded => Influence::Bounded,
            },
        }
    }

    fn spec(&self) -> MethodSpec {
        spec_for(self.method, self)
    }
}

fn spec_for(method: MethodArg, o: &MethodOpts) -> MethodSpec {
    match method {
        MethodArg::Pca => MethodSpec::Pca,
        MethodArg::Hpca => MethodSpec::Hpca(o.huber()),
        MethodArg::DchpcaSmad => MethodSpec::DcHpca(RobustScale::Smad, o.huber()),
        MethodArg::DchpcaSn => MethodSpec::DcHpca(RobustScale::Sn, o.huber()),
        MethodArg::KpcaGauss => MethodSpec::Kpca(KernelSpec::Gaussian {
            sigma: o.kernel_sigma,
        }),
        MethodArg::KpcaPoly => MethodSpec::Kpca(KernelSpec::Polynomial {
            degree: o.poly_degree,
            coef: o.poly_coef,
        }),
    }
}

#[derive(Args, Clone)]
struct InputOpts {
    /// Input CSV file.
    #[arg(long = "in", value_name = "PATH", required_unless_present = "manifest")]
    input: Option<PathBuf>,
    /// TOML dataset manifest; replaces --in and the column flags.
    #[arg(long, conflicts_with = "input")]
    manifest: Option<PathBuf>,
    /// Label column index or "last".
    #[arg(long)]
    label_col: Option<LabelColumn>,
    #[arg(long, overrides_with = "no_header")]
    header: bool,
    #[arg(long, overrides_with = "header")]
    no_header: bool,
    #[arg(long, value_enum, default_value = "ordinal")]
    encoding: EncodingArg,
}

impl InputOpts {
    fn manifest(&self) -> Result<DatasetManifest> {
        if let Some(m) = &self.manifest {
            return DatasetManifest::load(m);
        }
        let path = self
            .input
            .clone()
            .expect("clap requires --in or --manifest");
        let mut m = DatasetManifest::for_file(path);
        m.has_header = !self.no_header;
        m.label_column = self
            .label_col
            .unwrap_or(LabelColumn::Keyword(Keyword::Last));
        m.categorical = Categorical::Keyword(Keyword::Auto);
        m.encoding = match self.encoding {
            EncodingArg::Ordinal => Encoding::Ordinal,
            EncodingArg::OneHot => Encoding::OneHot,
        };
        Ok(m)
    }

    fn labeled(&self) -> Result<LabeledDataset> {
        io::load_csv(&self.manifest()?)
    }

    /// Feature matrix: labelled loading when a manifest or label column is
    /// given, otherwise every column is read as a number.
    fn features(&self) -> Result<Matrix> {
        if self.manifest.is_some() || self.label_col.is_some() {
            return Ok(self.labeled()?.features);
        }
        let path = self
            .input
            .as_deref()
            .expect("clap requires --in or --manifest");
        io::read_matrix_csv(path, !self.no_header)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    method: MethodOpts,
    #[arg(long)]
    d: usize,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: InputOpts,
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    method: MethodOpts,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Use plain instead of stratified folds.
    #[arg(long)]
    unstratified: bool,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    n_line: usize,
    #[arg(long, default_value_t = 3)]
    n_outliers: usize,
    #[arg(long, default_value_t = 3.0)]
    spread: f64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 5.0)]
    outlier_factor: f64,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct Table2Args {
    /// Dataset manifests, one per dataset, in output order.
    #[arg(long = "manifest", value_name = "PATH", required = true)]
    manifests: Vec<PathBuf>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "pca,kpca-gauss,kpca-poly,dchpca-smad,dchpca-sn"
    )]
    methods: Vec<MethodArg>,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    dims: Vec<usize>,
    /// Percentiles tried for Huber-weighted methods; the best mean is
    /// reported, ties going to the smallest value.
    #[arg(long, value_delimiter = ',', default_value = "85,90,95")]
    sweep: Vec<u8>,
    /// Use --c as given instead of sweeping.
    #[arg(long)]
    no_sweep: bool,
    #[command(flatten)]
    opts: GridMethodOpts,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    unstratified: bool,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

/// Method options shared by every grid column.
#[derive(Args)]
struct GridMethodOpts {
    #[arg(long, default_value_t = 90, value_parser = clap::value_parser!(u8).range(0..=100))]
    c: u8,
    #[arg(long, value_enum, default_value = "desc")]
    eigen_order: OrderArg,
    #[arg(long, value_enum, default_value = "bounded")]
    influence: InfluenceArg,
    #[arg(long)]
    kernel_sigma: Option<f64>,
    #[arg(long, default_value_t = 2)]
    poly_degree: u32,
    #[arg(long, default_value_t = 1.0)]
    poly_coef: f64,
}

impl GridMethodOpts {
    fn as_method_opts(&self, method: MethodArg) -> MethodOpts {
        MethodOpts {
            method,
            c: self.c,
            eigen_order: self.eigen_order,
            influence: self.influence,
            kernel_sigma: self.kernel_sigma,
            poly_degree: self.poly_degree,
            poly_coef: self.poly_coef,
        }
    }
}

#[derive(Args)]
struct EigendirsArgs {
    /// 2-D points as CSV (for example the output of `synth`).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[arg(long, overrides_with = "no_header")]
    header: bool,
    #[arg(long, overrides_with = "header")]
    no_header: bool,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "pca,hpca,dchpca-smad,dchpca-sn"
    )]
    methods: Vec<MethodArg>,
    #[command(flatten)]
    opts: GridMethodOpts,
    /// Reference direction, x component.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, allow_negative_numbers = true)]
    ref_x: f64,
    /// Reference direction, y component.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, allow_negative_numbers = true)]
    ref_y: f64,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let x = a.input.features()?;
            let model = a.method.spec().fit(&x, a.d)?;
            io::save_model(&model, &a.out)?;
            log::info!(
                "wrote {} ({} -> {} dims)",
                a.out.display(),
                model.input_dim(),
                model.output_dim()
            );
        }
        Command::Transform(a) => {
            let model = io::load_model(&a.model)?;
            let x = a.input.features()?;
            let z = model.transform(&x)?;
            io::write_matrix_csv(&z, "z", &a.out)?;
        }
        Command::Eval(a) => {
            let ds = a.input.labeled()?;
            let plan = eval::make_folds(&ds.labels, a.k, a.seed, !a.unstratified)?;
            let report = eval::cross_validate(&ds, &a.method.spec(), a.d, &plan)?;
            println!(
                "{}\t{}\td={}\tmean={:.2}",
                report.dataset, report.method, report.d, report.mean_accuracy
            );
            io::emit_report_tsv(&[eval::CellOutcome::Done(report)], &a.out)?;
        }
        Command::Synth(a) => {
            let cfg = SynthConfig {
                n_line: a.n_line,
                n_outliers: a.n_outliers,
                spread: a.spread,
                noise: a.noise,
                outlier_factor: a.outlier_factor,
                ..SynthConfig::default()
            };
            let x = eval::synth_line_dataset(&cfg, a.seed)?;
            write_points(&x, &a.out)?;
        }
        Command::Table2(a) => {
            let datasets = a
                .manifests
                .iter()
                .map(|m| DatasetManifest::load(m).and_then(|m| io::load_csv(&m)))
                .collect::<Result<Vec<_>>>()?;
            let methods: Vec<MethodSpec> = a
                .methods
                .iter()
                .map(|&m| a.opts.as_method_opts(m).spec())
                .collect();
            let cfg = Table2Config {
                dims: a.dims,
                k: a.k,
                seed: a.seed,
                stratified: !a.unstratified,
                sweep: if a.no_sweep { Vec::new() } else { a.sweep },
            };
            let cells = eval::run_table2(&datasets, &methods, &cfg);
            for c in &cells {
                match c {
                    eval::CellOutcome::Done(r) => {
                        println!(
                            "{}\t{}\td={}\t{:.2}\t{}",
                            r.dataset, r.method, r.d, r.mean_accuracy, r.params
                        )
                    }
                    eval::CellOutcome::Failed {
                        dataset,
                        method,
                        d,
                        error,
                    } => {
                        println!("{dataset}\t{method}\td={d}\tFAILED\t{error}")
                    }
                }
            }
            io::emit_report_tsv(&cells, &a.out)?;
        }
        Command::Eigendirs(a) => {
            let x = io::read_matrix_csv(&a.input, !a.no_header)?;
            let methods: Vec<MethodSpec> = a
                .methods
                .iter()
                .map(|&m| a.opts.as_method_opts(m).spec())
                .collect();
            let dirs = eval::eigendirection_report(&x, &methods, [a.ref_x, a.ref_y])?;
            io::emit_plot_tsv(&dirs, &a.out)?;
        }
    }
    Ok(())
}

fn write_points(x: &Matrix, path: &Path) -> Result<()> {
    let mut out = String::from("x,y\n");
    for r in x.row_iter() {
        out.push_str(&format!("{},{}\n", r[0], r[1]));
    }
    io::write_atomic(path, out.as_bytes())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
