//! Command-line front end. `run` is the whole program minus process setup,
//! so tests can drive it with argument vectors and capture the output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dims::{affinity_dimension, lyapunov_dim_root, lyapunov_dimension, LyapunovProfile};
use crate::disintegration::{
    convolution_check, h_rw_finite, kappa_estimate, ConvolutionConfig, GammaPartition, Granularity, HrwFinite,
};
use crate::error::{Error, Result};
use crate::experiments::{
    self, coordinate_separation, entropy_dimension, sample_for_band, svg_scatter, CounterexampleConfig,
    EntropyIncreaseConfig, MainTheoremConfig, Report, SuperexpConfig, Table, TypicalSweepConfig, Verdict,
    EVIDENCE_BUDGET,
};
use crate::fixtures;
use crate::ifs::WeightedModel;
use crate::scalar::Mode;
use crate::separation::{coordinate_kernel_check, separation_report, OverlapStatus, DEFAULT_BUDGET};

#[derive(Debug, Parser)]
#[command(name = "safd", version, about = "Dimension and entropy computations for diagonal self-affine measures")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print only the tables, as CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Also write one CSV file per table into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Write a scatter plot of the sampled points.
    #[arg(long, global = true, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Read model numbers as exact rationals.
    #[arg(long, global = true)]
    exact: bool,
    /// Largest enumeration allowed.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lyapunov and affinity dimensions of a model.
    Dim { model: String },
    /// Separation table of one coordinate system.
    Sep {
        model: String,
        /// Coordinate, counted from 1.
        #[arg(long, default_value_t = 1)]
        coord: usize,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
    /// Entropy dimension of a sampled measure.
    Estimate {
        model: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        depth: Option<usize>,
        /// Dyadic levels as `a:b`.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Grouping by linear part, random-walk entropy and the convolution check.
    Disint {
        model: String,
        /// Block length.
        #[arg(long = "N", default_value_t = 2)]
        block_len: usize,
        /// Number of blocks.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GranularityArg::Linear)]
        granularity: GranularityArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// A canned experiment.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        /// Model path or bundled model name.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// Contraction for the counterexample, e.g. `3/4`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "N")]
        block_len: Option<usize>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Dyadic levels as `a:b`.
        #[arg(long)]
        levels: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GranularityArg {
    Linear,
    Word,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentName {
    Counterexample,
    MainTheorem,
    FullDim,
    TypicalSweep,
    EntropyIncrease,
    Superexp,
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code: 0 on success, 1 when a verdict failed, 2 on usage or input errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        },
        None => execute(&cli),
    };
    match outcome.and_then(|r| emit(&cli, &r, out).map(|_| r)) {
        Ok(report) => i32::from(!report.passed()),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn emit(cli: &Cli, report: &Report, out: &mut dyn Write) -> Result<()> {
    if cli.json {
        out.write_all(report.to_json()?.as_bytes())?;
    } else if cli.csv {
        for t in &report.tables {
            writeln!(out, "# {}", t.name)?;
            out.write_all(t.to_csv()?.as_bytes())?;
        }
    } else {
        out.write_all(report.to_text()?.as_bytes())?;
    }
    if let Some(dir) = &cli.out_dir {
        report.write_csv(dir)?;
    }
    if let Some(path) = &cli.svg {
        match &report.cloud {
            Some(cloud) => std::fs::write(path, svg_scatter(cloud))?,
            None => log::warn!("{} produced no point cloud; no SVG written", report.experiment),
        }
    }
    Ok(())
}

fn load_model(spec: &str, exact: bool) -> Result<WeightedModel> {
    let mode = exact.then_some(Mode::Exact);
    if Path::new(spec).exists() {
        return WeightedModel::load(spec, mode);
    }
    match fixtures::json(spec) {
        Some(text) => WeightedModel::from_json(text, mode),
        None => Err(Error::InvalidArgument(format!("{spec:?} is neither a file nor a bundled model"))),
    }
}

fn parse_levels(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("levels must look like a:b, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a == 0 || b <= a {
        return Err(bad());
    }
    Ok((a, b))
}

fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Dim { model } => dim_report(&load_model(model, cli.exact)?),
        Command::Sep { model, coord, max_n } => sep_report(&load_model(model, cli.exact)?, *coord, *max_n, cli.budget),
        Command::Estimate { model, samples, depth, levels } => {
            let model = load_model(model, cli.exact)?;
            let band = levels.as_deref().map(parse_levels).transpose()?;
            estimate_report(&model, *samples, *depth, band, cli.seed)
        }
        Command::Disint { model, block_len, n, granularity, samples } => {
            let model = load_model(model, cli.exact)?;
            let g = match granularity {
                GranularityArg::Linear => Granularity::Linear,
                GranularityArg::Word => Granularity::Word,
            };
            disint_report(&model, *block_len, *n, g, *samples, cli.budget, cli.seed)
        }
        Command::Experiment { name, model, samples, lambda, n, block_len, m, trials, levels } => {
            let model = model.as_deref().map(|m| load_model(m, cli.exact)).transpose()?;
            let band = levels.as_deref().map(parse_levels).transpose()?;
            let seed = cli.seed;
            match name {
                ExperimentName::Counterexample => {
                    let mut cfg = CounterexampleConfig { seed, band, ..Default::default() };
                    if let Some(l) = lambda {
                        cfg.lambda = l.clone();
                    }
                    cfg.n = n.unwrap_or(cfg.n);
                    cfg.samples = samples.unwrap_or(cfg.samples);
                    experiments::run_counterexample(&cfg)
                }
                ExperimentName::MainTheorem => {
                    let mut cfg = MainTheoremConfig { seed, band, ..Default::default() };
                    cfg.samples = samples.unwrap_or(cfg.samples);
                    match model {
                        Some(m) => experiments::run_main_theorem_check(&m, &cfg),
                        None => {
                            let mut all = Report::new("main-theorem", &cfg, seed);
                            for name in ["cantor", "mcmullen", "example_ab"] {
                                let r = experiments::run_main_theorem_check(&fixtures::model(name)?, &cfg)?;
                                all.absorb(r, name);
                            }
                            Ok(all)
                        }
                    }
                }
                ExperimentName::FullDim => {
                    let m = match model {
                        Some(m) => m,
                        None => fixtures::model("swapped")?,
                    };
                    experiments::run_full_dim_measures(&m)
                }
                ExperimentName::TypicalSweep => {
                    let mut cfg = TypicalSweepConfig { seed, ..Default::default() };
                    cfg.trials = trials.unwrap_or(cfg.trials);
                    cfg.samples = samples.unwrap_or(cfg.samples);
                    experiments::run_typical_sweep(&cfg)
                }
                ExperimentName::EntropyIncrease => {
                    let mut cfg = EntropyIncreaseConfig { seed, ..Default::default() };
                    cfg.n = n.unwrap_or(cfg.n);
                    cfg.block_len = block_len.unwrap_or(cfg.block_len);
                    cfg.samples = samples.unwrap_or(cfg.samples);
                    let m = match model {
                        Some(m) => m,
                        None => fixtures::model("mcmullen")?,
                    };
                    experiments::run_entropy_increase(&m, &cfg)
                }
                ExperimentName::Superexp => {
                    let mut cfg = SuperexpConfig { seed, exact_budget: cli.budget.min(DEFAULT_BUDGET), ..Default::default() };
                    cfg.n_max = n.unwrap_or(cfg.n_max);
                    cfg.block_len = block_len.unwrap_or(cfg.block_len);
                    cfg.m = m.unwrap_or(cfg.m);
                    cfg.samples = samples.unwrap_or(cfg.samples);
                    let model = match model {
                        Some(m) => m,
                        None => fixtures::model("remark13")?,
                    };
                    experiments::run_superexp_concentration(&model, &cfg)
                }
            }
        }
    }
}

fn dim_report(model: &WeightedModel) -> Result<Report> {
    let mut report = Report::new("dim", &json!({ "d": model.dim(), "maps": model.ifs().len() }), 0);
    let mut t = Table::new("dimensions", &["quantity", "value"]);
    t.push(vec![json!("mode"), json!(model.mode())]);
    t.push(vec![json!("entropy"), json!(model.entropy())]);
    for (j, chi) in model.lyapunov_exponents().iter().enumerate() {
        t.push(vec![json!(format!("chi_{}", j + 1)), json!(chi)]);
    }
    t.push(vec![json!("coordinate_order"), json!(model.coord_order().iter().map(|j| j + 1).collect::<Vec<_>>())]);
    let dim_l = lyapunov_dimension(model);
    t.push(vec![json!("lyapunov_dimension"), json!(dim_l)]);
    t.push(vec![json!("lyapunov_dimension_root"), json!(lyapunov_dim_root(model)?)]);
    t.push(vec![json!("min_d_lyapunov"), json!(dim_l.min(model.dim() as f64))]);
    let aff = affinity_dimension(&model.user_ifs())?;
    t.push(vec![json!("affinity_dimension"), json!(aff.value)]);
    t.push(vec![json!("affinity_residual"), json!(aff.residual)]);
    let maximizers: Vec<Vec<usize>> = aff.maximizers.iter().map(|s| s.iter().map(|j| j + 1).collect()).collect();
    t.push(vec![json!("affinity_maximizers"), json!(maximizers)]);
    for w in model.warnings() {
        t.push(vec![json!("warning"), json!(w.to_string())]);
    }
    report.tables.push(t);
    Ok(report)
}

fn sep_report(model: &WeightedModel, coord: usize, max_n: usize, budget: u64) -> Result<Report> {
    let ifs = model.user_ifs();
    if coord == 0 || coord > ifs.dim() {
        return Err(Error::CoordinateOutOfRange { coord, dim: ifs.dim() });
    }
    let sep = separation_report(&ifs.induce_on_coords(&[coord - 1])?, max_n, budget)?;
    let mut report = Report::new("sep", &json!({ "coord": coord, "max_n": max_n, "budget": budget }), 0);
    let mut t = Table::new("levels", &["n", "delta_n", "s_n", "status", "overlap_witness", "distinct_maps"]);
    for l in &sep.levels {
        let (status, witness) = match &l.overlap {
            OverlapStatus::None => ("none", String::new()),
            OverlapStatus::Exact { witness } => ("exact", format!("{} {}", witness.0, witness.1)),
            OverlapStatus::Indeterminate { smallest_gap } => ("indeterminate", format!("gap {smallest_gap}")),
            OverlapStatus::SingleWord => ("single_word", String::new()),
        };
        t.push(vec![
            json!(l.n),
            json!(l.delta.to_string()),
            json!(l.s.to_string()),
            json!(status),
            json!(witness),
            json!(l.distinct_maps),
        ]);
    }
    report.tables.push(t);
    let mut s = Table::new("summary", &["quantity", "value"]);
    s.push(vec![json!("c_hat_min"), json!(sep.c_hat_min)]);
    s.push(vec![json!("c_hat_fit"), json!(sep.c_hat_fit)]);
    s.push(vec![json!("c_hat_diophantine"), json!(sep.c_hat_diophantine)]);
    s.push(vec![json!("unreliable"), json!(sep.unreliable)]);
    s.push(vec![json!("no_exact_overlaps"), json!(sep.no_exact_overlaps)]);
    s.push(vec![json!("first_overlap_level"), json!(sep.first_overlap_level)]);
    s.push(vec![json!("note"), json!(sep.note)]);
    if ifs.dim() > 1 {
        let kernel = coordinate_kernel_check(&ifs, max_n, budget)?;
        s.push(vec![json!("coordinate_kernel_holds"), json!(kernel.holds)]);
    }
    report.tables.push(s);
    Ok(report)
}

fn estimate_report(
    model: &WeightedModel,
    samples: usize,
    depth: Option<usize>,
    band: Option<(usize, usize)>,
    seed: u64,
) -> Result<Report> {
    let d = model.dim();
    let (cloud, band, depth) = sample_for_band(model, samples, band, depth, seed)?;
    let est = entropy_dimension(&cloud, band.clone());
    let cfg = json!({ "samples": samples, "depth": depth, "levels": [band.start(), band.end()] });
    let mut report = Report::new("estimate", &cfg, seed);
    let mut t = Table::new("entropy_levels", &["t", "entropy", "occupied", "entropy_per_level"]);
    for &(lvl, h, occ) in &est.levels {
        t.push(vec![json!(lvl), json!(h), json!(occ), json!(h / lvl as f64)]);
    }
    report.tables.push(t);
    report.verdicts.push(Verdict::observation("entropy_dimension", est.slope, samples));
    report.verdicts.push(Verdict::observation("entropy_dimension_stderr", est.stderr, samples));
    report.verdicts.push(Verdict::observation("normalized_entropy", est.normalized, samples));
    report.verdicts.push(Verdict::observation("min_d_lyapunov", lyapunov_dimension(model).min(d as f64), 0));
    report.cloud = Some(cloud);
    Ok(report)
}

fn disint_report(
    model: &WeightedModel,
    block_len: usize,
    n_max: usize,
    granularity: Granularity,
    samples: usize,
    budget: u64,
    seed: u64,
) -> Result<Report> {
    let gamma = GammaPartition::build(model, block_len, granularity, budget)?;
    let cfg = json!({ "N": block_len, "n": n_max, "granularity": granularity, "samples": samples, "budget": budget });
    let mut report = Report::new("disint", &cfg, seed);

    let mut classes = Table::new("gamma", &["class", "first_word", "linear", "mass", "exact_mass"]);
    for (k, c) in gamma.classes().iter().enumerate() {
        classes.push(vec![
            json!(k),
            json!(c.first_word.to_string()),
            json!(c.linear.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
            json!(c.mass),
            json!(c.exact_mass.as_ref().map(|m| m.to_string())),
        ]);
    }
    report.tables.push(classes);

    let evidence = coordinate_separation(model, 4, EVIDENCE_BUDGET)?.iter().any(|r| r.no_exact_overlaps);
    let mut h_table = Table::new("h_rw", &["n", "value", "method", "injective"]);
    let mut last: Option<HrwFinite> = None;
    for n in 1..=n_max {
        match h_rw_finite(model, &gamma, n, budget, evidence) {
            Ok(h) => {
                h_table.push(vec![json!(n), json!(h.value), json!(h.method), json!(h.injective)]);
                last = Some(h);
            }
            Err(Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    report.tables.push(h_table);
    report.verdicts.push(Verdict::observation("gamma_entropy", gamma.entropy(), 0));

    if let Some(h) = &last {
        let profile = LyapunovProfile::of_model(model);
        let predicted = crate::dims::f_phi(&profile, h.value)?.min(model.dim() as f64);
        let k = kappa_estimate(model, predicted, Some(h.value))?;
        let mut kt = Table::new("kappa", &["quantity", "value"]);
        kt.push(vec![json!("h_rw"), json!(h.value)]);
        kt.push(vec![json!("predicted_dim"), json!(k.predicted_dim)]);
        kt.push(vec![json!("kappa"), json!(k.kappa)]);
        report.tables.push(kt);
        report.verdicts.push(Verdict::observation("h_rw", h.value, 0));
    }

    let conv = convolution_check(&gamma, &ConvolutionConfig { n: n_max, samples, seed, ..Default::default() })?;
    let mut ct = Table::new("convolution", &["level", "direct", "convolved", "gap"]);
    for l in &conv.levels {
        ct.push(vec![json!(l.level), json!(l.direct), json!(l.convolved), json!(l.gap)]);
    }
    report.tables.push(ct);
    report.verdicts.push(Verdict::at_most("convolution_max_gap", conv.max_gap, conv.tolerance, samples));
    report.verdicts.push(Verdict::observation("convolution_sliced_w1", conv.sliced_w1, samples));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("safd").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["dim"]).0, 2);
        assert_eq!(call(&["dim", "no-such-model"]).0, 2);
        assert_eq!(call(&["sep", "cantor", "--coord", "2"]).0, 2);
        assert_eq!(call(&["estimate", "cantor", "--levels", "5"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn dim_on_bundled_model() {
        let (code, out, _) = call(&["dim", "cantor"]);
        assert_eq!(code, 0);
        assert!(out.contains("lyapunov_dimension,0.63"), "{out}");
    }

    #[test]
    fn sep_prints_csv() {
        let (code, out, _) = call(&["sep", "overlapping", "--max-n", "2", "--csv", "--exact"]);
        assert_eq!(code, 0);
        assert!(out.contains("2,0,1/4,exact,02 10,7"), "{out}");
    }

    #[test]
    fn hypothesis_violation_is_a_usage_error() {
        let (code, _, err) = call(&["experiment", "counterexample", "--n", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("hypothesis"));
    }

    #[test]
    fn parse_levels_forms() {
        assert_eq!(parse_levels("8:13").unwrap(), (8, 13));
        assert!(parse_levels("13:8").is_err());
        assert!(parse_levels("x").is_err());
    }
}
