use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use causal_triage::data::{load_csv, summarize, Dataset};
use causal_triage::graph::{MixedGraph, StyleConfig};
use causal_triage::pipeline::{
    write_report, write_step1, write_step2, write_step3, Pipeline, PipelineConfig, Step3Report,
};
use causal_triage::tree::MetricSummary;
use causal_triage::synth::{
    clinical_prior_knowledge, make_clinical_synth, sample_bn, sample_sem, write_dataset, DiscreteBn, LinearSem,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "causal-triage", version, about = "Causal feature selection and interpretable triage trees for tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-column availability, means and level counts.
    Summarize {
        #[command(flatten)]
        input: Input,
        /// Split every count by outcome class.
        #[arg(long)]
        by_outcome: bool,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-category graphs and outcome-linked feature selection.
    Step1(StepArgs),
    /// Integrated graph, bivariate tests and the interpretable tree.
    Step2 {
        #[command(flatten)]
        args: StepArgs,
        /// Features to integrate (comma separated); step 1 is run when omitted.
        #[arg(long, value_delimiter = ',')]
        selected: Vec<String>,
    },
    /// Cross-validation of the tree features against random feature draws.
    Step3 {
        #[command(flatten)]
        args: StepArgs,
        /// Tree features (comma separated); steps 1 and 2 are run when omitted.
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
    },
    /// All three steps; writes report.json plus DOT and CSV artifacts.
    Run(StepArgs),
    /// Generate synthetic data.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// 265-row clinical-style cohort and its ground-truth DAG.
    Clinical {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Linear Gaussian SEM sample from a TOML model.
    Sem {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Discrete Bayesian network sample from a TOML model.
    Bn {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Input {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Schema TOML describing every column.
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Args)]
struct StepArgs {
    #[command(flatten)]
    input: Input,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// TOML config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Query d-separation in this DAG (graph JSON) instead of running statistical tests.
    #[arg(long)]
    oracle_dag: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Default)]
struct Overrides {
    /// Reassign a column's category, as COLUMN=CATEGORY (repeatable).
    #[arg(long = "category", value_parser = parse_assignment)]
    categories: Vec<(String, String)>,
    #[arg(long)]
    outcome: Option<String>,
    /// Prior-knowledge TOML.
    #[arg(long)]
    prior_knowledge: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest conditioning set; 0 tests marginal independence only.
    #[arg(long)]
    max_cond_size: Option<usize>,
    /// Remove the conditioning-set cap.
    #[arg(long, conflicts_with = "max_cond_size")]
    unlimited_cond_size: bool,
    #[arg(long)]
    possible_dsep: Option<bool>,
    #[arg(long)]
    orientation_rules: Option<bool>,
    #[arg(long)]
    outcome_is_sink: Option<bool>,
    #[arg(long)]
    hops: Option<usize>,
    #[arg(long)]
    tree_max_depth: Option<usize>,
    #[arg(long)]
    min_samples_leaf: Option<usize>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    permutation_trials: Option<usize>,
    #[arg(long)]
    permutation_features: Option<usize>,
    #[arg(long)]
    permutation_tolerance: Option<f64>,
    #[arg(long)]
    permutation_max_draws: Option<usize>,
    #[arg(long)]
    histogram_bin_width: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected COLUMN=CATEGORY, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl Overrides {
    fn apply(self, cfg: &mut PipelineConfig) {
        cfg.categories.extend(self.categories);
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = v; } )* };
        }
        set!(alpha, possible_dsep, orientation_rules, outcome_is_sink, hops, tree_max_depth, min_samples_leaf, cv_folds,
            permutation_trials, permutation_tolerance, permutation_max_draws, histogram_bin_width, seed);
        if self.outcome.is_some() {
            cfg.outcome = self.outcome;
        }
        if self.prior_knowledge.is_some() {
            cfg.prior_knowledge = self.prior_knowledge;
        }
        if self.permutation_features.is_some() {
            cfg.permutation_features = self.permutation_features;
        }
        if self.max_cond_size.is_some() {
            cfg.max_cond_size = self.max_cond_size;
        }
        if self.unlimited_cond_size {
            cfg.max_cond_size = None;
        }
    }
}

fn load(input: &Input) -> Result<Dataset> {
    load_csv(&input.data, &input.schema).with_context(|| format!("loading {}", input.data.display()))
}

struct Session {
    data: Dataset,
    cfg: PipelineConfig,
    oracle: Option<MixedGraph>,
    out: PathBuf,
}

impl Session {
    fn open(args: StepArgs) -> Result<Self> {
        let data = load(&args.input)?;
        let mut cfg = match &args.config {
            Some(p) => PipelineConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        args.overrides.apply(&mut cfg);
        let oracle = args.oracle_dag.as_deref().map(MixedGraph::load_json).transpose().context("reading oracle DAG")?;
        std::fs::create_dir_all(&args.out)?;
        Ok(Self { data, cfg, oracle, out: args.out })
    }

    fn pipeline(&self) -> Result<Pipeline<'_>> {
        let p = Pipeline::new(&self.data, self.cfg.clone())?;
        Ok(match &self.oracle {
            Some(dag) => p.with_oracle(dag.clone()),
            None => p,
        })
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Summarize { input, by_outcome, out } => {
            let table = summarize(&load(&input)?, by_outcome)?;
            match out {
                Some(p) => std::fs::write(p, table.to_json())?,
                None => println!("{}", table.to_json()),
            }
        }
        Command::Step1(args) => {
            let s = Session::open(args)?;
            let p = s.pipeline()?;
            let r = p.step1()?;
            write_json(&s.out.join("step1.json"), &r)?;
            write_step1(&s.out, &p.outcome, &r)?;
            println!("selected: {}", r.selected.join(", "));
        }
        Command::Step2 { args, selected } => {
            let s = Session::open(args)?;
            let p = s.pipeline()?;
            let selected = if selected.is_empty() { p.step1()?.selected } else { selected };
            let r = p.step2(&selected)?;
            write_json(&s.out.join("step2.json"), &r)?;
            write_step2(&s.out, &p.outcome, &r)?;
            for row in &r.fisher {
                println!("{}", row.render());
            }
            println!("tree features: {}", r.tree_features.join(", "));
            println!("training: {}", fmt_metrics(&r.train.summary()));
        }
        Command::Step3 { args, features } => {
            let s = Session::open(args)?;
            let p = s.pipeline()?;
            let features = if features.is_empty() { p.step2(&p.step1()?.selected)?.tree_features } else { features };
            let r = p.step3(&features)?;
            write_json(&s.out.join("step3.json"), &r)?;
            write_step3(&s.out, &r)?;
            print_step3(&r);
        }
        Command::Run(args) => {
            let s = Session::open(args)?;
            let r = s.pipeline()?.run()?;
            write_report(&s.out, &r)?;
            println!("selected: {}", r.step1.selected.join(", "));
            println!("tree features: {}", r.step2.tree_features.join(", "));
            println!("training: {}", fmt_metrics(&r.step2.train.summary()));
            print_step3(&r.step3);
            println!("report: {}", s.out.join("report.json").display());
        }
        Command::Synth(cmd) => synth(cmd)?,
    }
    Ok(())
}

fn fmt_metrics(m: &MetricSummary) -> String {
    format!("accuracy {:.3} sensitivity {:.3} specificity {:.3} f1 {:.3}", m.accuracy, m.sensitivity, m.specificity, m.f1)
}

fn print_step3(r: &Step3Report) {
    println!("cv ({} rows): {}", r.n_rows, fmt_metrics(&r.cv.mean));
    if let Some(c) = &r.permutation {
        println!("random draws ({}): {}", c.baseline.trials.len(), fmt_metrics(&c.baseline.mean));
        println!("misclassification quantile of the tree features: {:.3}", c.reference_quantile);
    }
}

fn synth(cmd: SynthCommand) -> Result<()> {
    let (d, dag, out) = match cmd {
        SynthCommand::Clinical { seed, out } => {
            let (d, dag) = make_clinical_synth(seed);
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("knowledge.toml"), clinical_prior_knowledge().to_toml_string())?;
            (d, dag, out)
        }
        SynthCommand::Sem { model, n, seed, out } => {
            let m = LinearSem::load(&model)?;
            let d = sample_sem(&m, n, seed)?;
            (d, m.dag().clone(), out)
        }
        SynthCommand::Bn { model, n, seed, out } => {
            let m = DiscreteBn::load(&model)?;
            let d = sample_bn(&m, n, seed)?;
            (d, m.dag().clone(), out)
        }
    };
    std::fs::create_dir_all(&out)?;
    write_dataset(&d, out.join("data.csv"), out.join("schema.toml"))?;
    std::fs::write(out.join("truth.json"), dag.to_json())?;
    std::fs::write(out.join("truth.dot"), dag.to_dot(&StyleConfig { show_strength: false, ..Default::default() }))?;
    println!("{} rows x {} columns -> {}", d.n_rows(), d.n_cols(), out.display());
    Ok(())
}
