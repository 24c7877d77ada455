//! Desk-scale looks at entropy growth under convolution and at the
//! concentration of `ν^ω_n` across scales. These runs report observations;
//! only sign statements carry a pass/fail verdict.

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{Report, Table, Verdict};
use crate::disintegration::{
    h_rw_finite, kappa_estimate, nu_omega_n, sample_mu_omega, sample_omega, tail_blocks, GammaPartition, Granularity,
    NuMode, OmegaPrefix,
};
use crate::error::{Error, Result};
use crate::ifs::WeightedModel;
use crate::measure::{conditional_entropy, entropy, sample_points, DiscreteMeasure, Grid};
use crate::rng::derive_seed;
use crate::separation::DEFAULT_BUDGET;

#[derive(Clone, Debug, Serialize)]
pub struct EntropyIncreaseConfig {
    pub block_len: usize,
    pub n: usize,
    /// Number of sampled `ω`.
    pub omegas: usize,
    pub samples: usize,
    /// Side of the cube carrying the uniform `θ`.
    pub theta_side: f64,
    /// Allowed negative gap attributed to sampling noise.
    pub noise: f64,
    pub self_convolution: Vec<usize>,
    pub seed: u64,
}

impl Default for EntropyIncreaseConfig {
    fn default() -> Self {
        EntropyIncreaseConfig {
            block_len: 1,
            n: 8,
            omegas: 8,
            samples: 100_000,
            theta_side: 1.0,
            noise: 0.05,
            self_convolution: vec![1, 2, 4, 8],
            seed: 0,
        }
    }
}

fn omega_for_scale(gamma: &GammaPartition, n: usize, seed: u64) -> Result<OmegaPrefix> {
    let finest = -((n * gamma.block_len()) as f64) * gamma.ifs().r_min().log2();
    let blocks = tail_blocks(gamma, finest.ceil() as usize).max(n);
    sample_omega(gamma, blocks, seed)
}

fn add_clouds(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let pts = a.points().iter().zip(b.points()).map(|(x, y)| x + y).collect();
    DiscreteMeasure::uniform(a.dim(), pts)
}

fn grid_entropy(theta: &DiscreteMeasure, grid: &Grid) -> f64 {
    entropy(theta, &grid.partition(theta))
}

fn coordinate(theta: &DiscreteMeasure, j: usize) -> Result<DiscreteMeasure> {
    let d = theta.dim();
    DiscreteMeasure::uniform(1, theta.points().iter().skip(j).step_by(d).copied().collect())
}

/// Compares `(1/n) H(θ * μ^ω, E^ω_n)` with `(1/n) H(μ^ω, E^ω_n)` over sampled `ω`.
pub fn run_entropy_increase(model: &WeightedModel, cfg: &EntropyIncreaseConfig) -> Result<Report> {
    if cfg.n == 0 || cfg.omegas == 0 || cfg.samples == 0 {
        return Err(Error::InvalidArgument("n, omegas and samples must be positive".into()));
    }
    let gamma = GammaPartition::build(model, cfg.block_len, Granularity::Linear, DEFAULT_BUDGET)?;
    let d = model.dim();
    let mut report = Report::new("entropy-increase", cfg, cfg.seed);
    let mut table = Table::new("gaps", &["omega", "entropy_mu", "entropy_theta_mu", "gap", "point_mass_gap"]);
    let mut gaps = Vec::new();
    let mut point_gaps = Vec::new();
    let mut first_cloud = None;
    let mut first_omega = None;
    let n = cfg.n as f64;
    for i in 0..cfg.omegas as u64 {
        let omega = omega_for_scale(&gamma, cfg.n, derive_seed(cfg.seed, i))?;
        let grid = gamma.omega_scale(&omega.prefix(cfg.n)).grid();
        let mu = sample_mu_omega(&gamma, &omega, cfg.samples, derive_seed(cfg.seed, 1000 + i))?;
        let side = cfg.theta_side;
        let theta = DiscreteMeasure::uniform(
            d,
            sample_points(cfg.samples, d, derive_seed(cfg.seed, 2000 + i), |rng, row| {
                row.iter_mut().for_each(|x| *x = side * rng.gen::<f64>())
            }),
        )?;
        let h_mu = grid_entropy(&mu, &grid) / n;
        let h_conv = grid_entropy(&add_clouds(&theta, &mu)?, &grid) / n;
        let shift: Vec<f64> = (0..d).map(|j| side * (0.37 + 0.11 * j as f64)).collect();
        let h_shift = grid_entropy(&mu.affine_image(&vec![1.0; d], &shift), &grid) / n;
        gaps.push(h_conv - h_mu);
        point_gaps.push(h_shift - h_mu);
        table.push(vec![
            json!(omega.prefix(cfg.n).0),
            json!(h_mu),
            json!(h_conv),
            json!(h_conv - h_mu),
            json!(h_shift - h_mu),
        ]);
        if i == 0 {
            first_cloud = Some(mu);
            first_omega = Some(omega);
        }
    }
    report.tables.push(table);

    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let mean_point = point_gaps.iter().sum::<f64>() / point_gaps.len() as f64;
    report.verdicts.push(Verdict::at_least("min_gap", min_gap, -cfg.noise, cfg.samples));
    report.verdicts.push(Verdict::at_least("mean_gap_positive", mean_gap, 0.0, cfg.samples));
    report.verdicts.push(Verdict::observation("mean_point_mass_gap", mean_point, cfg.samples));

    let h = h_rw_finite(model, &gamma, 1, DEFAULT_BUDGET, false)?;
    let kappa = kappa_estimate(model, d as f64, Some(h.value))?;
    if let Some(k) = kappa.predicted_kappa {
        report.verdicts.push(Verdict::observation("block_kappa_prediction", cfg.block_len as f64 * k, 0));
    }

    // Self-convolutions of one μ^ω sample against the per-coordinate rate of E^ω_n.
    let mu = first_cloud.expect("at least one omega");
    let omega = first_omega.expect("at least one omega");
    let scale = gamma.omega_scale(&omega.prefix(cfg.n));
    let mut conv_table = Table::new("self_convolution", &["k", "coord", "entropy_per_step", "full_rate", "ratio"]);
    let mut sum = mu.clone();
    let mut have = 1usize;
    for &k in &cfg.self_convolution {
        while have < k {
            let extra = sample_mu_omega(&gamma, &omega, cfg.samples, derive_seed(cfg.seed, 3000 + have as u64))?;
            sum = add_clouds(&sum, &extra)?;
            have += 1;
        }
        if have != k {
            continue;
        }
        for j in 0..d {
            let proj = coordinate(&sum, j)?;
            let rate = scale.chi[j] / n;
            let e = grid_entropy(&proj, &Grid::cells(vec![scale.lambda[j]])) / n;
            conv_table.push(vec![json!(k), json!(j + 1), json!(e), json!(rate), json!(e / rate)]);
        }
    }
    report.tables.push(conv_table);
    report.cloud = Some(mu);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperexpConfig {
    pub block_len: usize,
    /// Ratio `M` between the fine and coarse scales.
    pub m: usize,
    pub n_max: usize,
    pub exact_budget: u64,
    /// Atoms drawn when `ν^ω_n` is too large to enumerate.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuperexpConfig {
    fn default() -> Self {
        SuperexpConfig { block_len: 1, m: 2, n_max: 4, exact_budget: 2_000_000, samples: 100_000, seed: 0 }
    }
}

/// `(1/n) H(ν^ω_n, E^ω_{Mn} | E^ω_n)` for `n = 1..=n_max` along one sampled `ω`.
pub fn run_superexp_concentration(model: &WeightedModel, cfg: &SuperexpConfig) -> Result<Report> {
    if cfg.m == 0 || cfg.n_max == 0 {
        return Err(Error::InvalidArgument("M and n_max must be positive".into()));
    }
    let gamma = GammaPartition::build(model, cfg.block_len, Granularity::Linear, DEFAULT_BUDGET)?;
    let omega = sample_omega(&gamma, cfg.m * cfg.n_max, derive_seed(cfg.seed, 1))?;
    let mut report = Report::new("superexp", cfg, cfg.seed);
    let mut table = Table::new("concentration", &["n", "atoms", "exact", "value"]);
    let mut last = 0.0;
    for n in 1..=cfg.n_max {
        let head = omega.prefix(n);
        let nu = match nu_omega_n(&gamma, &head, NuMode::Exact { budget: cfg.exact_budget }) {
            Ok(nu) => nu,
            Err(Error::BudgetExceeded { .. }) => nu_omega_n(
                &gamma,
                &head,
                NuMode::Sampled { count: cfg.samples, seed: derive_seed(cfg.seed, 100 + n as u64) },
            )?,
            Err(e) => return Err(e),
        };
        let exact = nu.len() < cfg.samples || nu.provenance().is_some_and(|w| w.len() != cfg.samples);
        let coarse = gamma.omega_scale(&head).grid().partition(&nu);
        let fine = gamma.omega_scale(&omega.prefix(cfg.m * n)).grid().partition(&nu);
        last = conditional_entropy(&nu, &fine, &coarse) / n as f64;
        table.push(vec![json!(n), json!(nu.len()), json!(exact), json!(last)]);
    }
    report.tables.push(table);
    report.verdicts.push(Verdict::observation("final_value", last, 0));
    report.verdicts.push(Verdict::observation("block_entropy", model.entropy() * cfg.block_len as f64, 0));
    Ok(report)
}
