//! Monte Carlo discrimination experiments.
//!
//! Each trial draws the true hypothesis from `truth_prior`, then measurement
//! outcomes from the exact Born distribution by inverse CDF. Trial `i` uses
//! its own ChaCha stream `i` under the configured seed, so tallies do not
//! depend on how trials are scheduled across threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asym::{
    check_epsilon, neg_log2_beta_ncopy, product_strategy_asym, sandwich_from_exponent,
    ProductStrategy,
};
use crate::divergence::{d_omega, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, HermitianMatrix};
use crate::povm::{Outcome, ThreeOutcomePovm};
use crate::random::rng_from_seed;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489;

/// Tolerance on the Born distribution of each hypothesis.
const BORN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: u64,
    pub seed: u64,
    /// Probability that the source emits ρ.
    pub truth_prior: f64,
    pub n_copies: usize,
}

impl ExperimentConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            truth_prior: 0.5,
            n_copies: 1,
        }
    }

    pub fn with_prior(mut self, p: f64) -> Self {
        self.truth_prior = p;
        self
    }

    pub fn with_copies(mut self, n: usize) -> Self {
        self.n_copies = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.n_copies == 0 {
            return Err(Error::BadCopies);
        }
        if !(0.0..=1.0).contains(&self.truth_prior) {
            return Err(Error::InvalidConfig(format!(
                "truth prior {} outside [0, 1]",
                self.truth_prior
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub guess_rho: u64,
    pub guess_sigma: u64,
    pub inconclusive: u64,
}

impl Counts {
    fn record(&mut self, o: Outcome) {
        match o {
            Outcome::GuessRho => self.guess_rho += 1,
            Outcome::GuessSigma => self.guess_sigma += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            guess_rho: self.guess_rho + other.guess_rho,
            guess_sigma: self.guess_sigma + other.guess_sigma,
            inconclusive: self.inconclusive + other.inconclusive,
        }
    }

    pub fn total(&self) -> u64 {
        self.guess_rho + self.guess_sigma + self.inconclusive
    }

    pub fn conclusive(&self) -> u64 {
        self.guess_rho + self.guess_sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Wilson score interval for `k` successes in `m` trials.
pub fn wilson_interval(k: u64, m: u64, z: f64) -> Option<Interval> {
    if m == 0 {
        return None;
    }
    let m = m as f64;
    let p = k as f64 / m;
    let z2 = z * z;
    let denom = 1.0 + z2 / m;
    let center = (p + z2 / (2.0 * m)) / denom;
    let half = z / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
    Some(Interval {
        lo: (center - half).max(0.0),
        hi: (center + half).min(1.0),
    })
}

/// A conditional frequency with its exact target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    /// `None` when the target has no conclusive mass.
    pub exact: Option<f64>,
    /// `None` when no trial was conclusive.
    pub estimate: Option<f64>,
    pub ci: Option<Interval>,
    pub errors: u64,
    pub conclusive: u64,
}

impl Estimate {
    fn new(exact: Option<f64>, errors: u64, conclusive: u64) -> Self {
        Self {
            exact,
            estimate: (conclusive > 0).then(|| errors as f64 / conclusive as f64),
            ci: wilson_interval(errors, conclusive, Z_99),
            errors,
            conclusive,
        }
    }

    pub fn covers_exact(&self) -> bool {
        matches!((self.ci, self.exact), (Some(ci), Some(x)) if ci.contains(x))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub counts_rho: Counts,
    pub counts_sigma: Counts,
    pub alpha_bar: Estimate,
    pub beta_bar: Estimate,
    pub perr_bar: Estimate,
}

impl ExperimentResult {
    pub fn conclusive_rate(&self) -> f64 {
        let c = self.counts_rho.conclusive() + self.counts_sigma.conclusive();
        c as f64 / self.config.trials as f64
    }

    /// Rows `(quantity, n, exact, estimate, ci_lo, ci_hi, conclusive_rate)`.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let n = self.config.n_copies;
        let rate = |c: &Counts| {
            if c.total() == 0 {
                None
            } else {
                Some(c.conclusive() as f64 / c.total() as f64)
            }
        };
        let row = |quantity: &'static str, e: &Estimate, r: Option<f64>| CsvRow {
            quantity,
            n,
            exact: e.exact,
            estimate: e.estimate,
            ci_lo: e.ci.map(|c| c.lo),
            ci_hi: e.ci.map(|c| c.hi),
            conclusive_rate: r,
        };
        vec![
            row("alpha_bar", &self.alpha_bar, rate(&self.counts_rho)),
            row("beta_bar", &self.beta_bar, rate(&self.counts_sigma)),
            row("perr_bar", &self.perr_bar, Some(self.conclusive_rate())),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub quantity: &'static str,
    pub n: usize,
    pub exact: Option<f64>,
    pub estimate: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub conclusive_rate: Option<f64>,
}

fn check_born(p: [f64; 3], who: &str) -> Result<()> {
    let total: f64 = p.iter().sum();
    if p.iter().any(|&x| x < -BORN_TOL) || (total - 1.0).abs() > BORN_TOL {
        return Err(Error::InvalidPovm(format!(
            "outcome probabilities under {who} are {p:?}"
        )));
    }
    Ok(())
}

fn draw<R: Rng>(p: &[f64; 3], rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    if u < p[0] {
        Outcome::GuessRho
    } else if u < p[0] + p[1] {
        Outcome::GuessSigma
    } else {
        Outcome::Inconclusive
    }
}

/// Exact decision probabilities under both hypotheses.
fn exact_estimates(
    dist_rho: [f64; 3],
    dist_sigma: [f64; 3],
    prior: f64,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
    let q = 1.0 - prior;
    (
        ratio(dist_rho[1], dist_rho[0] + dist_rho[1]),
        ratio(dist_sigma[0], dist_sigma[0] + dist_sigma[1]),
        ratio(
            prior * dist_rho[1] + q * dist_sigma[0],
            prior * (dist_rho[0] + dist_rho[1]) + q * (dist_sigma[0] + dist_sigma[1]),
        ),
    )
}

fn run<F>(
    cfg: &ExperimentConfig,
    exact: (Option<f64>, Option<f64>, Option<f64>),
    sample: F,
) -> ExperimentResult
where
    F: Fn(bool, &mut ChaCha8Rng) -> Outcome + Sync,
{
    let base = rng_from_seed(cfg.seed);
    let (counts_rho, counts_sigma) = (0..cfg.trials)
        .into_par_iter()
        .fold(
            || (Counts::default(), Counts::default()),
            |(mut cr, mut cs), i| {
                let mut rng = base.clone();
                rng.set_stream(i);
                let truth_is_rho = rng.random::<f64>() < cfg.truth_prior;
                let o = sample(truth_is_rho, &mut rng);
                if truth_is_rho {
                    cr.record(o);
                } else {
                    cs.record(o);
                }
                (cr, cs)
            },
        )
        .reduce(
            || (Counts::default(), Counts::default()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
        );
    let (ea, eb, ep) = exact;
    ExperimentResult {
        config: *cfg,
        alpha_bar: Estimate::new(ea, counts_rho.guess_sigma, counts_rho.conclusive()),
        beta_bar: Estimate::new(eb, counts_sigma.guess_rho, counts_sigma.conclusive()),
        perr_bar: Estimate::new(
            ep,
            counts_rho.guess_sigma + counts_sigma.guess_rho,
            counts_rho.conclusive() + counts_sigma.conclusive(),
        ),
        counts_rho,
        counts_sigma,
    }
}

/// Single-copy experiment with a given measurement.
pub fn run_povm_experiment(
    povm: &ThreeOutcomePovm,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if rho.dim() != povm.dim() || sigma.dim() != povm.dim() {
        return Err(Error::DimMismatch(
            "measurement and states differ in dimension".into(),
        ));
    }
    let pr = povm.probabilities(rho);
    let ps = povm.probabilities(sigma);
    check_born(pr, "rho")?;
    check_born(ps, "sigma")?;
    let exact = exact_estimates(pr, ps, cfg.truth_prior);
    Ok(run(cfg, exact, |truth_is_rho, rng| {
        draw(if truth_is_rho { &pr } else { &ps }, rng)
    }))
}

/// `cfg.n_copies` copies measured one at a time with the per-copy optimum,
/// combined by the unanimity rule.
pub fn run_product_strategy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let strategy = product_strategy_asym(rho, sigma, eps, cfg.n_copies)?;
    run_strategy(&strategy, rho, sigma, cfg)
}

pub fn run_strategy(
    strategy: &ProductStrategy,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let pr = strategy.povm.probabilities(rho);
    let ps = strategy.povm.probabilities(sigma);
    check_born(pr, "rho")?;
    check_born(ps, "sigma")?;
    let exact = exact_estimates(
        strategy.decision_probabilities(rho),
        strategy.decision_probabilities(sigma),
        cfg.truth_prior,
    );
    let n = strategy.copies;
    Ok(run(cfg, exact, |truth_is_rho, rng| {
        let p = if truth_is_rho { &pr } else { &ps };
        let first = draw(p, rng);
        if !first.is_conclusive() {
            return Outcome::Inconclusive;
        }
        // later copies are still drawn so the per-copy model stays literal
        let mut agree = true;
        for _ in 1..n {
            agree &= draw(p, rng) == first;
        }
        if agree {
            first
        } else {
            Outcome::Inconclusive
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    /// `-(1/n)·log2 β̄_ε(ρ⊗ⁿ, σ⊗ⁿ)`
    pub rate: ExtendedReal,
    pub lower: ExtendedReal,
    pub upper: ExtendedReal,
}

/// Exact per-copy rates with the sandwich bounds, from the closed form only.
pub fn exponent_scan(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    ns: &[usize],
) -> Result<Vec<ScanRow>> {
    check_epsilon(eps)?;
    let d = d_omega(rho, sigma)?;
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::BadCopies);
            }
            let nf = n as f64;
            let (lo, hi) = sandwich_from_exponent(d, eps, n);
            let rate = d.map(|x| neg_log2_beta_ncopy(x, eps, n) / nf);
            Ok(ScanRow {
                n,
                rate,
                lower: lo.map(|v| v / nf),
                upper: hi.map(|v| v / nf),
            })
        })
        .collect()
}
