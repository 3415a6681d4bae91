//! Independent numerical checks: direct evaluation of conditional errors,
//! random measurement search, dual witnesses, and adaptive channel strategies.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asym::{beta_from_omega, check_epsilon, optimal_povm_asym};
use crate::channels::{channel_omega, max_entangled, QuantumChannel};
use crate::divergence::{omega, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{permutation_unitary, DensityMatrix, HermitianMatrix};
use crate::povm::ThreeOutcomePovm;
use crate::random::{random_channel, random_density, random_psd, rng_from_seed};
use crate::sym::{check_prior, optimal_povm_sym, postselected_perr};

/// Conclusive probabilities below this make a conditional error undefined.
pub const CONCLUSIVE_FLOOR: f64 = 1e-12;

/// Born probabilities of a three-outcome measurement under both hypotheses.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionalErrors {
    /// `(Tr M₁ρ, Tr M₂ρ, Tr M?ρ)`
    pub rho: [f64; 3],
    /// `(Tr M₁σ, Tr M₂σ, Tr M?σ)`
    pub sigma: [f64; 3],
}

impl ConditionalErrors {
    pub fn from_probabilities(rho: [f64; 3], sigma: [f64; 3]) -> Self {
        Self { rho, sigma }
    }

    /// Conclusive rate under ρ.
    pub fn conc_rho(&self) -> f64 {
        self.rho[0] + self.rho[1]
    }

    pub fn conc_sigma(&self) -> f64 {
        self.sigma[0] + self.sigma[1]
    }

    /// `ᾱ = Tr(M₂ρ) / Tr((M₁+M₂)ρ)`.
    pub fn alpha_bar(&self) -> Result<f64> {
        let den = self.conc_rho();
        if den <= CONCLUSIVE_FLOOR {
            return Err(Error::NoConclusiveMass("rho"));
        }
        Ok(self.rho[1] / den)
    }

    /// `β̄ = Tr(M₁σ) / Tr((M₁+M₂)σ)`.
    pub fn beta_bar(&self) -> Result<f64> {
        let den = self.conc_sigma();
        if den <= CONCLUSIVE_FLOOR {
            return Err(Error::NoConclusiveMass("sigma"));
        }
        Ok(self.sigma[0] / den)
    }

    /// Prior-weighted conditional error.
    pub fn perr_bar(&self, p: f64) -> Result<f64> {
        let q = 1.0 - p;
        let den = p * self.conc_rho() + q * self.conc_sigma();
        if den <= CONCLUSIVE_FLOOR {
            return Err(Error::NoConclusiveMass("both"));
        }
        Ok((p * self.rho[1] + q * self.sigma[0]) / den)
    }
}

pub fn conditional_errors(
    povm: &ThreeOutcomePovm,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
) -> Result<ConditionalErrors> {
    if rho.dim() != povm.dim() || sigma.dim() != povm.dim() {
        return Err(Error::DimMismatch(
            "measurement and states differ in dimension".into(),
        ));
    }
    Ok(ConditionalErrors::from_probabilities(
        povm.probabilities(rho),
        povm.probabilities(sigma),
    ))
}

/// Random measurement with full-rank Gaussian effects `AᵢAᵢ†`, jointly
/// rescaled under the identity.
pub fn random_povm3(dim: usize, seed: u64) -> Result<ThreeOutcomePovm> {
    let mut rng = rng_from_seed(seed);
    let m1 = random_psd(dim, dim, &mut rng);
    let m2 = random_psd(dim, dim, &mut rng);
    ThreeOutcomePovm::rescaled(&m1, &m2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConverseMode {
    /// Minimize `β̄` subject to `ᾱ ≤ ε`.
    Asymmetric { eps: f64 },
    /// Minimize `p̄err` with prior `p` on ρ.
    Symmetric { p: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConverseResult {
    /// Smallest conditional error over admissible samples.
    pub best: f64,
    pub closed_form: f64,
    pub samples: usize,
    /// Samples with enough conclusive mass to define the error.
    pub admissible: usize,
}

impl ConverseResult {
    /// Whether no sample beat the closed form by more than `tol`.
    pub fn respects_bound(&self, tol: f64) -> bool {
        self.best >= self.closed_form - tol
    }
}

/// Samples random measurements, a fifth of them perturbations of the
/// analytic optimum, and records the smallest conditional error.
///
/// Each sample is scaled by `‖M₁ + M₂‖∞` before scoring. In asymmetric mode a
/// sample with `ᾱ > ε` has `M₂` shrunk until `ᾱ = ε`, which keeps it a
/// valid measurement.
pub fn converse_search(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    mode: ConverseMode,
    samples: usize,
    seed: u64,
) -> Result<ConverseResult> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let (closed_form, anchor) = match mode {
        ConverseMode::Asymmetric { eps } => {
            check_epsilon(eps)?;
            let w = omega(rho, sigma)?;
            let anchor = if w.is_finite() {
                Some(optimal_povm_asym(rho, sigma, eps)?)
            } else {
                None
            };
            (beta_from_omega(eps, w), anchor)
        }
        ConverseMode::Symmetric { p } => {
            check_prior(p)?;
            (
                postselected_perr(rho, sigma, p)?.perr_bar,
                Some(optimal_povm_sym(rho, sigma, p)?),
            )
        }
    };
    let dim = rho.dim();
    let base = rng_from_seed(seed);
    let (best, admissible) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng: ChaCha8Rng = base.clone();
            rng.set_stream(i as u64);
            let (m1, m2) = sample_effects(&mut rng, dim, anchor.as_ref(), i);
            score(&m1, &m2, rho, sigma, mode)
        })
        .fold(
            || (f64::INFINITY, 0usize),
            |(b, n), s| match s {
                Some(v) => (b.min(v), n + 1),
                None => (b, n),
            },
        )
        .reduce(|| (f64::INFINITY, 0usize), |a, b| (a.0.min(b.0), a.1 + b.1));
    Ok(ConverseResult {
        best,
        closed_form,
        samples,
        admissible,
    })
}

fn sample_effects<R: Rng>(
    rng: &mut R,
    dim: usize,
    anchor: Option<&ThreeOutcomePovm>,
    index: usize,
) -> (HermitianMatrix, HermitianMatrix) {
    match anchor {
        Some(opt) if index.is_multiple_of(5) => {
            let noise = 10f64.powf(rng.random_range(-6.0..-1.0));
            let bump = |rng: &mut R| {
                let g = random_psd(dim, dim, rng);
                let n = g.max_eigenvalue();
                g.scale(noise / n)
            };
            let m1 = opt.m1().add(&bump(rng));
            let m2 = opt.m2().add(&bump(rng));
            (m1, m2)
        }
        _ => {
            let r1 = rng.random_range(1..=dim);
            let r2 = rng.random_range(1..=dim);
            (random_psd(dim, r1, rng), random_psd(dim, r2, rng))
        }
    }
}

fn score(
    m1: &HermitianMatrix,
    m2: &HermitianMatrix,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    mode: ConverseMode,
) -> Option<f64> {
    let (r1, r2) = (m1.inner(rho), m2.inner(rho));
    let (s1, s2) = (m1.inner(sigma), m2.inner(sigma));
    let norm = m1.add(m2).max_eigenvalue();
    let (r1, r2, s1, s2) = (r1 / norm, r2 / norm, s1 / norm, s2 / norm);
    match mode {
        ConverseMode::Asymmetric { eps } => {
            if r1 + r2 <= CONCLUSIVE_FLOOR {
                return None;
            }
            let alpha = r2 / (r1 + r2);
            let shrink = if alpha > eps {
                eps * r1 / ((1.0 - eps) * r2)
            } else {
                1.0
            };
            let den = s1 + shrink * s2;
            if den <= CONCLUSIVE_FLOOR {
                return None;
            }
            Some(s1 / den)
        }
        ConverseMode::Symmetric { p } => {
            let q = 1.0 - p;
            let den = p * (r1 + r2) + q * (s1 + s2);
            if den <= CONCLUSIVE_FLOOR {
                return None;
            }
            Some((p * r2 + q * s1) / den)
        }
    }
}

/// Dual pair `A = (1-ε)M₂`, `B = εM₁` derived from a measurement.
#[derive(Debug, Clone)]
pub struct DualWitness {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    /// `Tr(Aρ)/Tr(Bρ)`, at most one for a feasible witness.
    pub ratio_on_rho: f64,
    /// `Tr(Aσ)/Tr(Bσ)`, a lower bound on `Ω(ρ‖σ)`.
    pub value: ExtendedReal,
}

impl DualWitness {
    /// The conditional type II error the witness certifies.
    pub fn beta_bar(&self, eps: f64) -> f64 {
        beta_from_omega(eps, self.value)
    }
}

pub fn dual_witness_from_povm(
    povm: &ThreeOutcomePovm,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    eps: f64,
) -> Result<DualWitness> {
    check_epsilon(eps)?;
    if rho.dim() != povm.dim() || sigma.dim() != povm.dim() {
        return Err(Error::DimMismatch(
            "measurement and states differ in dimension".into(),
        ));
    }
    let a = povm.m2().scale(1.0 - eps);
    let b = povm.m1().scale(eps);
    let (ar, br) = (a.inner(rho), b.inner(rho));
    if br <= CONCLUSIVE_FLOOR {
        return Err(Error::InfeasiblePovm(
            "no weight on the first outcome under rho".into(),
        ));
    }
    let ratio_on_rho = ar / br;
    if ratio_on_rho > 1.0 + 1e-9 {
        return Err(Error::InfeasiblePovm(format!(
            "conditional type I error exceeds budget (ratio {ratio_on_rho})"
        )));
    }
    let (as_, bs) = (a.inner(sigma), b.inner(sigma));
    let value = if bs <= CONCLUSIVE_FLOOR {
        if as_ <= CONCLUSIVE_FLOOR {
            return Err(Error::NoConclusiveMass("sigma"));
        }
        ExtendedReal::Infinite
    } else {
        ExtendedReal::Finite(as_ / bs)
    };
    Ok(DualWitness {
        a,
        b,
        ratio_on_rho,
        value,
    })
}

/// Two-use strategy: prepare a state on `R ⊗ A`, send `A` through the
/// channel, process `R ⊗ B → R' ⊗ A`, and send `A` through again. The final
/// state lives on `R' ⊗ B`.
#[derive(Debug, Clone)]
pub struct AdaptiveStrategy {
    pub ancilla_dim: usize,
    pub memory_dim: usize,
    pub input: DensityMatrix,
    pub processor: QuantumChannel,
}

impl AdaptiveStrategy {
    /// Random input and random CPTP processor (full Kraus rank).
    pub fn random(dim_in: usize, dim_out: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let ancilla_dim = dim_in;
        let memory_dim = dim_in;
        let input = random_density(ancilla_dim * dim_in, 1, &mut rng);
        let p_in = ancilla_dim * dim_out;
        let p_out = memory_dim * dim_in;
        let processor = random_channel(p_in, p_out, p_out, &mut rng);
        Self {
            ancilla_dim,
            memory_dim,
            input,
            processor,
        }
    }

    /// Parallel use on two maximally entangled inputs, written as an adaptive
    /// strategy: the second input rides along in `R` and the processor only
    /// permutes registers. The output is `J_M ⊗ J_M` up to ordering.
    pub fn parallel(dim_in: usize, dim_out: usize) -> Result<Self> {
        let (da, db) = (dim_in, dim_out);
        let phi = max_entangled(da);
        // (R1, A1, R2, A2) -> (R1, R2, A2, A1)
        let pair = phi.tensor(&phi)?;
        let input = DensityMatrix::from_matrix(crate::linalg::permute_subsystems(
            pair.matrix(),
            &[da, da, da, da],
            &[0, 2, 3, 1],
        )?)?;
        // (R1, R2, A2, B1) -> (R1, B1, R2, A2)
        let swap = permutation_unitary(&[da, da, da, db], &[0, 3, 1, 2])?;
        Ok(Self {
            ancilla_dim: da * da * da,
            memory_dim: da * db * da,
            input,
            processor: QuantumChannel::from_kraus(vec![swap])?,
        })
    }

    pub fn run(&self, ch: &QuantumChannel) -> Result<DensityMatrix> {
        if self.processor.dim_in() != self.ancilla_dim * ch.dim_out()
            || self.processor.dim_out() != self.memory_dim * ch.dim_in()
        {
            return Err(Error::DimMismatch(
                "strategy does not fit the channel".into(),
            ));
        }
        let first = ch.apply_on_second(&self.input, self.ancilla_dim)?;
        let mid = self.processor.apply(&first)?;
        let out = ch.apply_on_second(&mid, self.memory_dim)?;
        DensityMatrix::normalized(&out)
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveSample {
    pub omega_out: ExtendedReal,
    /// `Ω(J_M‖J_N)²`.
    pub bound: ExtendedReal,
}

/// Runs one random two-use strategy on both channels and compares the
/// output `Ω` with the squared Choi value.
pub fn adaptive_strategy_sample(
    m: &QuantumChannel,
    n: &QuantumChannel,
    seed: u64,
) -> Result<AdaptiveSample> {
    let strat = AdaptiveStrategy::random(m.dim_in(), m.dim_out(), seed);
    adaptive_strategy_eval(&strat, m, n)
}

pub fn adaptive_strategy_eval(
    strat: &AdaptiveStrategy,
    m: &QuantumChannel,
    n: &QuantumChannel,
) -> Result<AdaptiveSample> {
    let single = channel_omega(m, n)?;
    let omega_out = omega(strat.run(m)?.as_hermitian(), strat.run(n)?.as_hermitian())?;
    Ok(AdaptiveSample {
        omega_out,
        bound: single.map(|w| w * w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asym::postselected_beta;
    use crate::random::random_full_rank_density;

    #[test]
    fn conditional_error_floor() {
        let ce = ConditionalErrors::from_probabilities([0.0, 0.0, 1.0], [0.3, 0.1, 0.6]);
        assert_eq!(ce.alpha_bar().unwrap_err(), Error::NoConclusiveMass("rho"));
        assert!((ce.beta_bar().unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn random_povm_is_valid_and_reproducible() {
        let a = random_povm3(3, 4).unwrap();
        let b = random_povm3(3, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.m_inconclusive().min_eigenvalue() > -1e-12);
    }

    #[test]
    fn converse_search_respects_closed_form() {
        let mut rng = rng_from_seed(40);
        let rho = random_full_rank_density(2, &mut rng);
        let sigma = random_full_rank_density(2, &mut rng);
        let asym =
            converse_search(&rho, &sigma, ConverseMode::Asymmetric { eps: 0.2 }, 2000, 1).unwrap();
        assert!(asym.respects_bound(1e-9), "{asym:?}");
        assert!(asym.best - asym.closed_form < 1e-3);
        let sym =
            converse_search(&rho, &sigma, ConverseMode::Symmetric { p: 0.5 }, 2000, 1).unwrap();
        assert!(sym.respects_bound(1e-9), "{sym:?}");
    }

    #[test]
    fn converse_search_is_deterministic() {
        let rho = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let mode = ConverseMode::Asymmetric { eps: 0.5 };
        let a = converse_search(&rho, &sigma, mode, 500, 9).unwrap();
        let b = converse_search(&rho, &sigma, mode, 500, 9).unwrap();
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn dual_witness_of_optimum_is_tight() {
        let rho = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let r = postselected_beta(&rho, &sigma, 0.3).unwrap();
        let w =
            dual_witness_from_povm(r.achieving_povm.as_ref().unwrap(), &rho, &sigma, 0.3).unwrap();
        assert!((w.value.to_f64() - r.omega_value.to_f64()).abs() < 1e-10);
        assert!((w.beta_bar(0.3) - r.beta_bar).abs() < 1e-12);
    }

    #[test]
    fn dual_witness_rejects_over_budget() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let m1 = HermitianMatrix::from_real_diagonal(&[0.1, 0.0]);
        let m2 = HermitianMatrix::from_real_diagonal(&[0.0, 0.9]);
        let povm = ThreeOutcomePovm::from_conclusive(m1, m2).unwrap();
        assert!(matches!(
            dual_witness_from_povm(&povm, &rho, &rho, 0.1),
            Err(Error::InfeasiblePovm(_))
        ));
    }

    #[test]
    fn parallel_strategy_yields_choi_tensor() {
        let m = QuantumChannel::depolarizing(2, 0.5).unwrap();
        let n = QuantumChannel::depolarizing(2, 0.25).unwrap();
        let strat = AdaptiveStrategy::parallel(2, 2).unwrap();
        let s = adaptive_strategy_eval(&strat, &m, &n).unwrap();
        assert!((s.omega_out.to_f64() - s.bound.to_f64()).abs() < 1e-10);
        let jj = m.choi().tensor(m.choi()).unwrap();
        let out = strat.run(&m).unwrap();
        // registers come out as (R1, B1, R2, B2)
        assert!(out.approx_eq(&jj, 1e-12));
    }

    #[test]
    fn random_adaptive_below_square() {
        let m = QuantumChannel::depolarizing(2, 0.5).unwrap();
        let n = QuantumChannel::depolarizing(2, 0.25).unwrap();
        for seed in 0..5 {
            let s = adaptive_strategy_sample(&m, &n, seed).unwrap();
            assert!(s.omega_out.to_f64() <= s.bound.to_f64() + 1e-8);
        }
    }
}
