//! Command-line front end.
//!
//! Exit codes: `0` success, `2` input or usage error, `3` fit failure,
//! `4` internal invariant violation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distribution::KappaParams;
use crate::error::{domain, Error, Result};
use crate::estimation::{fit, FitConfig};
use crate::gof::{gof_report, ks_pvalue, ks_statistic, qq_points, BootstrapConfig};
use crate::inequality::{coeff_variation, empirical_gini, empirical_lorenz, gini, lorenz};
use crate::ingest::{load_csv, preprocess, ColumnSpec, PreprocessOptions, Schema, WeightedSample};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FIT: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::FitFailure { .. } => EXIT_FIT,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "kappa", version, about = "Fit and analyse the kappa-generalized income distribution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Preprocess a CSV, fit the model and report goodness of fit as JSON.
    Fit(FitArgs),
    /// Draw a unit-mean sample and write it as CSV.
    Sample(SampleArgs),
    /// Emit TSV columns for CCDF, histogram, Lorenz or Q-Q plots.
    Plotdata(PlotArgs),
    /// Goodness-of-fit report for given parameters as JSON.
    Gof(GofArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "income")]
    pub income_col: String,
    /// Sampling-weight column; a column named `weight` is used if present.
    #[arg(long)]
    pub weight_col: Option<String>,
    /// Household-size column; a column named `household_size` is used if present.
    #[arg(long)]
    pub size_col: Option<String>,
    /// Skip division by the square root of household size.
    #[arg(long)]
    pub no_equivalize: bool,
}

impl InputArgs {
    pub fn schema(&self) -> Schema {
        let col = |explicit: &Option<String>, default: &str| match explicit {
            Some(name) => ColumnSpec::Required(name.clone()),
            None => ColumnSpec::IfPresent(default.to_string()),
        };
        Schema {
            income: self.income_col.clone(),
            weight: col(&self.weight_col, "weight"),
            household_size: col(&self.size_col, "household_size"),
        }
    }

    pub fn options(&self) -> PreprocessOptions {
        PreprocessOptions {
            equivalize: !self.no_equivalize,
        }
    }

    fn load(&self) -> Result<WeightedSample> {
        let records = load_csv(&self.input, &self.schema())?;
        preprocess(&records, &self.options())
    }
}

#[derive(Debug, Clone, Args)]
pub struct BootstrapArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap_reps: usize,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
}

impl BootstrapArgs {
    fn config(&self) -> BootstrapConfig {
        BootstrapConfig {
            replications: self.bootstrap_reps,
            level: self.ci_level,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// A fit JSON document (or any JSON object with alpha, beta, kappa).
    #[arg(long, conflicts_with_all = ["alpha", "kappa", "beta"])]
    pub params_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Defaults to the unit-mean value implied by alpha and kappa.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<KappaParams> {
        if let Some(path) = &self.params_file {
            let text = std::fs::read_to_string(path)?;
            return Ok(serde_json::from_str(&text)?);
        }
        match (self.alpha, self.kappa, self.beta) {
            (Some(a), Some(k), Some(b)) => KappaParams::new(a, b, k),
            (Some(a), Some(k), None) => KappaParams::with_unit_mean(a, k),
            _ => domain("either --params-file or both --alpha and --kappa are required"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Ccdf,
    PdfHist,
    Lorenz,
    Qq,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Number of logarithmic bins for `pdf-hist`.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GofArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<PathBuf>,
    pub schema: Option<Schema>,
    pub preprocessing: Option<PreprocessOptions>,
    pub fit_config: Option<FitConfig>,
    pub bootstrap: Option<BootstrapConfig>,
    pub params: Option<KappaParams>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            input: None,
            schema: None,
            preprocessing: None,
            fit_config: None,
            bootstrap: None,
            params: None,
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    fn with_input(mut self, input: &InputArgs) -> Self {
        self.input = Some(input.input.clone());
        self.schema = Some(input.schema());
        self.preprocessing = Some(input.options());
        self
    }
}

/// The JSON document written by `kappa fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub log_likelihood: f64,
    pub n_kept: usize,
    pub raw_mean: f64,
    pub ks_d_plus: f64,
    pub ks_p_value: f64,
    pub gini_theoretical: f64,
    pub gini_empirical: f64,
    pub gini_ci_low: f64,
    pub gini_ci_high: f64,
    pub cv_theoretical: Option<f64>,
    pub manifest: RunManifest,
}

/// A command's primary output plus the manifest to place beside it when it
/// is not embedded.
pub struct CommandOutput {
    pub body: String,
    pub sidecar: Option<RunManifest>,
}

pub fn run(cli: &Cli) -> Result<()> {
    let (out, path) = match &cli.command {
        Command::Fit(a) => (cmd_fit(a)?, &a.output),
        Command::Sample(a) => (cmd_sample(a)?, &a.output),
        Command::Plotdata(a) => (cmd_plotdata(a)?, &a.output),
        Command::Gof(a) => (cmd_gof(a)?, &a.output),
    };
    write_output(&out, path.as_deref())
}

fn write_output(out: &CommandOutput, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, &out.body)?;
            if let Some(m) = &out.sidecar {
                std::fs::write(sidecar_path(p), serde_json::to_string_pretty(m)? + "\n")?;
            }
        }
        None => {
            print!("{}", out.body);
            if let Some(m) = &out.sidecar {
                eprintln!("{}", serde_json::to_string(m)?);
            }
        }
    }
    Ok(())
}

/// `<output>.manifest.json`
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn cmd_fit(args: &FitArgs) -> Result<CommandOutput> {
    let sample = args.input.load()?;
    let cfg = FitConfig::default();
    let result = fit(&sample, &cfg)?;
    if !(result.constraint_residual < 1e-8) {
        return Err(Error::Invariant(format!(
            "fitted mean deviates from 1 by {}",
            result.constraint_residual
        )));
    }
    let p = result.params;
    let boot = args.bootstrap.config();
    let d = ks_statistic(&p, &sample);
    let (ci_low, ci_high) = crate::gof::bootstrap_gini_ci(&sample, boot.replications, boot.level, boot.seed)?;

    let mut manifest = RunManifest::new("fit").with_input(&args.input);
    manifest.fit_config = Some(cfg);
    manifest.bootstrap = Some(boot);
    manifest.seed = Some(boot.seed);

    let doc = FitDocument {
        alpha: p.alpha,
        beta: p.beta,
        kappa: p.k(),
        log_likelihood: result.log_likelihood,
        n_kept: sample.n_kept(),
        raw_mean: sample.raw_mean(),
        ks_d_plus: d,
        ks_p_value: ks_pvalue(d, sample.len()),
        gini_theoretical: gini(&p)?,
        gini_empirical: empirical_gini(&sample),
        gini_ci_low: ci_low,
        gini_ci_high: ci_high,
        cv_theoretical: coeff_variation(&p).ok(),
        manifest,
    };
    Ok(CommandOutput {
        body: serde_json::to_string_pretty(&doc)? + "\n",
        sidecar: None,
    })
}

pub fn cmd_sample(args: &SampleArgs) -> Result<CommandOutput> {
    let p = KappaParams::with_unit_mean(args.alpha, args.kappa)?;
    let draws = p.sample(args.n, args.seed)?;
    let mut body = String::with_capacity(20 * draws.len() + 8);
    body.push_str("income\n");
    for x in draws {
        let _ = writeln!(body, "{}", fmt_num(x));
    }
    let mut manifest = RunManifest::new("sample");
    manifest.params = Some(p);
    manifest.seed = Some(args.seed);
    Ok(CommandOutput {
        body,
        sidecar: Some(manifest),
    })
}

pub fn cmd_plotdata(args: &PlotArgs) -> Result<CommandOutput> {
    let p = args.params.resolve()?;
    let sample = args.input.load()?;
    let body = match args.kind {
        PlotKind::Ccdf => ccdf_table(&p, &sample),
        PlotKind::PdfHist => histogram_table(&p, &sample, args.bins)?,
        PlotKind::Lorenz => lorenz_table(&p, &sample)?,
        PlotKind::Qq => {
            let mut out = String::from("sample_quantile\tmodel_quantile\n");
            for (a, b) in qq_points(&p, &sample)? {
                let _ = writeln!(out, "{}\t{}", fmt_num(a), fmt_num(b));
            }
            out
        }
    };
    let mut manifest = RunManifest::new("plotdata").with_input(&args.input);
    manifest.params = Some(p);
    Ok(CommandOutput {
        body,
        sidecar: Some(manifest),
    })
}

pub fn cmd_gof(args: &GofArgs) -> Result<CommandOutput> {
    let p = args.params.resolve()?;
    let sample = args.input.load()?;
    let boot = args.bootstrap.config();
    let report = gof_report(&p, &sample, &boot)?;
    let mut manifest = RunManifest::new("gof").with_input(&args.input);
    manifest.params = Some(p);
    manifest.bootstrap = Some(boot);
    manifest.seed = Some(boot.seed);

    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        report: &'a crate::gof::GofReport,
        manifest: RunManifest,
    }
    let doc = Doc {
        report: &report,
        manifest,
    };
    Ok(CommandOutput {
        body: serde_json::to_string_pretty(&doc)? + "\n",
        sidecar: None,
    })
}

/// Empirical CCDF at the i-th smallest income is the weight share strictly
/// above it: `(n - i) / n` for unit weights.
pub fn ccdf_table(p: &KappaParams, s: &WeightedSample) -> String {
    let total: f64 = s.weights().iter().sum();
    let mut cum = 0.0;
    let mut out = String::from("x\tempirical_ccdf\tmodel_ccdf\n");
    for (&x, &w) in s.incomes().iter().zip(s.weights()) {
        cum += w;
        let emp = ((total - cum) / total).max(0.0);
        let _ = writeln!(out, "{}\t{}\t{}", fmt_num(x), fmt_num(emp), fmt_num(p.ccdf_at(x)));
    }
    out
}

/// Weighted histogram on logarithmically spaced bins from the smallest to the
/// largest income. The model column is the bin-averaged density.
pub fn histogram_table(p: &KappaParams, s: &WeightedSample, bins: usize) -> Result<String> {
    if bins == 0 {
        return domain("at least one bin is required");
    }
    let xs = s.incomes();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(hi > lo) {
        return domain("cannot bin a sample whose incomes are all equal");
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| match i {
            0 => lo,
            i if i == bins => hi,
            i => (ln_lo + i as f64 * step).exp(),
        })
        .collect();
    let mut mass = vec![0.0; bins];
    for (&x, &w) in xs.iter().zip(s.weights()) {
        let i = edges[1..].partition_point(|&e| e <= x).min(bins - 1);
        mass[i] += w;
    }
    let total: f64 = s.weights().iter().sum();
    let mut out = String::from("bin_left\tbin_right\tempirical_density\tmodel_density\n");
    for i in 0..bins {
        let (l, r) = (edges[i], edges[i + 1]);
        let width = r - l;
        let emp = mass[i] / (total * width);
        let model = (p.cdf_at(r) - p.cdf_at(l)) / width;
        let _ = writeln!(out, "{}\t{}\t{}\t{}", fmt_num(l), fmt_num(r), fmt_num(emp), fmt_num(model));
    }
    Ok(out)
}

pub fn lorenz_table(p: &KappaParams, s: &WeightedSample) -> Result<String> {
    let mut out = String::from("u\tL_empirical\tL_model\n");
    for (u, l) in empirical_lorenz(s).points {
        let _ = writeln!(out, "{}\t{}\t{}", fmt_num(u), fmt_num(l), fmt_num(lorenz(p, u)?));
    }
    Ok(out)
}

/// Round-trip decimal, switching to exponent notation for very small or
/// large magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
