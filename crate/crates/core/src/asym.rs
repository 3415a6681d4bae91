//! Asymmetric postselected hypothesis testing.
//!
//! The optimal conditional type II error under a conditional type I budget
//! `ε ∈ (0,1)` is `β̄_ε(ρ,σ) = (ε/(1-ε)·Ω(ρ‖σ) + 1)^{-1}`, where `Ω` is the
//! non-logarithmic Hilbert projective metric. This module evaluates that
//! closed form, synthesizes a measurement attaining it, and builds the
//! per-copy product strategy that attains it on `n` copies.

use serde::Serialize;

use crate::divergence::{d_omega_tol, omega_tol, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, pinv_sqrt, support_basis, support_contained, DensityMatrix, HermitianMatrix,
    Spectrum, DEFAULT_TOL,
};
use crate::povm::{Outcome, ThreeOutcomePovm};

/// Support eigenvalue spread of ρ beyond which a conditioning warning is emitted.
pub const CONDITIONING_LIMIT: f64 = 1e12;

/// Relative gap under which two eigenvalues count as degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::BadEpsilon(eps))
    }
}

/// Closed form `(ε/(1-ε)·Ω + 1)^{-1}`; zero when `Ω = ∞`.
pub fn beta_from_omega(eps: f64, omega: ExtendedReal) -> f64 {
    match omega {
        // Ω = 1 is the indistinguishable case; keep 1-ε exact there
        ExtendedReal::Finite(1.0) => 1.0 - eps,
        ExtendedReal::Finite(w) => 1.0 / (eps / (1.0 - eps) * w + 1.0),
        ExtendedReal::Infinite => 0.0,
    }
}

/// `-log2 β̄_ε` for `n` copies, given `D_Ω` of a single copy. Evaluated
/// without forming `Ωⁿ`, so it stays finite for large `n`.
pub fn neg_log2_beta_ncopy(d_omega: f64, eps: f64, n: usize) -> f64 {
    let x = n as f64 * d_omega + (eps / (1.0 - eps)).log2();
    // log2(2^x + 1)
    if x > 0.0 {
        x + (-x).exp2().ln_1p() / std::f64::consts::LN_2
    } else {
        x.exp2().ln_1p() / std::f64::consts::LN_2
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymReport {
    pub epsilon: f64,
    pub beta_bar: f64,
    pub omega_value: ExtendedReal,
    #[serde(skip)]
    pub achieving_povm: Option<ThreeOutcomePovm>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AsymReport {
    /// Re-evaluates the optimal error for another budget without
    /// recomputing any eigensystem.
    pub fn beta_at(&self, eps: f64) -> Result<f64> {
        check_epsilon(eps)?;
        Ok(beta_from_omega(eps, self.omega_value))
    }
}

pub fn postselected_beta(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
) -> Result<AsymReport> {
    postselected_beta_tol(rho, sigma, eps, DEFAULT_TOL)
}

pub fn postselected_beta_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    tol: f64,
) -> Result<AsymReport> {
    check_epsilon(eps)?;
    let omega_value = omega_tol(rho, sigma, tol)?;
    let mut warnings = Vec::new();
    let achieving_povm = if omega_value.is_finite() {
        let (_, support_eigs) = support_basis(rho, tol)?;
        let spread = support_eigs.last().copied().unwrap_or(1.0) / support_eigs[0];
        if spread > CONDITIONING_LIMIT {
            warnings.push(format!(
                "support of rho is ill-conditioned (eigenvalue ratio {spread:.3e}); the measurement may be inaccurate"
            ));
        }
        Some(optimal_povm_asym_tol(rho, sigma, eps, tol)?)
    } else {
        None
    };
    Ok(AsymReport {
        epsilon: eps,
        beta_bar: beta_from_omega(eps, omega_value),
        omega_value,
        achieving_povm,
        warnings,
    })
}

/// Optimal conditional type II error at `ε = 0`: 1 if `supp σ ⊆ supp ρ`,
/// otherwise 0. Unlike `ε > 0`, this is not symmetric in its arguments.
pub fn beta_zero(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(if support_contained(sigma, rho, DEFAULT_TOL)? {
        1.0
    } else {
        0.0
    })
}

/// Extreme eigenvectors of `ρ^{-1/2} σ ρ^{-1/2}` on the support of ρ.
struct Extremes {
    whitener: HermitianMatrix,
    spectrum: Spectrum,
    min_index: usize,
    max_index: usize,
}

fn extremes(rho: &HermitianMatrix, sigma: &HermitianMatrix, tol: f64) -> Result<Extremes> {
    let whitener = pinv_sqrt(rho, tol)?;
    let spectrum = herm_eig(&sigma.conjugate(whitener.matrix()));
    let thr = spectrum.support_threshold(tol);
    let ev = &spectrum.eigenvalues;
    let min_index = ev
        .iter()
        .position(|&x| x > thr)
        .ok_or(Error::InfiniteOmega)?;
    let top = ev[ev.len() - 1];
    let max_index = ev
        .iter()
        .position(|&x| x >= top - DEGENERACY_TOL * top.abs())
        .expect("top eigenvalue present");
    Ok(Extremes {
        whitener,
        spectrum,
        min_index,
        max_index,
    })
}

fn whitened_projector(ex: &Extremes, index: usize, denom: f64) -> HermitianMatrix {
    let v = ex.whitener.matrix() * ex.spectrum.vector(index);
    HermitianMatrix::outer(&v).scale(1.0 / denom)
}

pub fn optimal_povm_asym(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
) -> Result<ThreeOutcomePovm> {
    optimal_povm_asym_tol(rho, sigma, eps, DEFAULT_TOL)
}

/// Measurement attaining `β̄_ε`: rank-one effects aligned with the extreme
/// eigenvectors of `ρ^{-1/2} σ ρ^{-1/2}`, jointly rescaled under the identity.
pub fn optimal_povm_asym_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    tol: f64,
) -> Result<ThreeOutcomePovm> {
    check_epsilon(eps)?;
    if !omega_tol(rho, sigma, tol)?.is_finite() {
        return Err(Error::InfiniteOmega);
    }
    per_copy_povm(rho, sigma, eps, 1.0 - eps, tol)
}

fn per_copy_povm(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    denom1: f64,
    denom2: f64,
    tol: f64,
) -> Result<ThreeOutcomePovm> {
    let ex = extremes(rho, sigma, tol)?;
    let m1 = whitened_projector(&ex, ex.min_index, denom1);
    let m2 = whitened_projector(&ex, ex.max_index, denom2);
    ThreeOutcomePovm::rescaled(&m1, &m2)
}

/// Per-copy measurement plus the unanimity rule: all outcomes `1` guess ρ,
/// all outcomes `2` guess σ, anything else is inconclusive.
#[derive(Debug, Clone)]
pub struct ProductStrategy {
    pub povm: ThreeOutcomePovm,
    pub copies: usize,
}

impl ProductStrategy {
    pub fn decide(&self, outcomes: &[Outcome]) -> Outcome {
        match outcomes.first() {
            Some(&first) if first.is_conclusive() && outcomes.iter().all(|&o| o == first) => first,
            _ => Outcome::Inconclusive,
        }
    }

    /// Probability of each final decision `(guess ρ, guess σ, inconclusive)`
    /// when every copy is in `state`.
    pub fn decision_probabilities(&self, state: &HermitianMatrix) -> [f64; 3] {
        let [a1, a2, _] = self.povm.probabilities(state);
        let n = self.copies as i32;
        let (p1, p2) = (a1.max(0.0).powi(n), a2.max(0.0).powi(n));
        [p1, p2, (1.0 - p1 - p2).max(0.0)]
    }

    /// Exact conditional errors `(ᾱ, β̄)` of the n-copy strategy.
    pub fn conditional_errors(
        &self,
        rho: &HermitianMatrix,
        sigma: &HermitianMatrix,
    ) -> Result<(f64, f64)> {
        let ratio = |a: f64, b: f64, who: &'static str| -> Result<f64> {
            // a^n / (a^n + b^n), computed as 1/(1 + (b/a)^n)
            if a <= 0.0 && b <= 0.0 {
                return Err(Error::NoConclusiveMass(who));
            }
            if a <= 0.0 {
                return Ok(0.0);
            }
            Ok(1.0 / (1.0 + (b / a).powi(self.copies as i32)))
        };
        let [r1, r2, _] = self.povm.probabilities(rho);
        let [s1, s2, _] = self.povm.probabilities(sigma);
        Ok((ratio(r2, r1, "rho")?, ratio(s1, s2, "sigma")?))
    }
}

/// Product strategy for `n` copies: the single-copy recipe with denominators
/// `ε^{1/n}` and `(1-ε)^{1/n}`.
pub fn product_strategy_asym(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    n: usize,
) -> Result<ProductStrategy> {
    check_epsilon(eps)?;
    if n == 0 {
        return Err(Error::BadCopies);
    }
    if !omega_tol(rho, sigma, DEFAULT_TOL)?.is_finite() {
        return Err(Error::InfiniteOmega);
    }
    let root = 1.0 / n as f64;
    let povm = per_copy_povm(
        rho,
        sigma,
        eps.powf(root),
        (1.0 - eps).powf(root),
        DEFAULT_TOL,
    )?;
    Ok(ProductStrategy { povm, copies: n })
}

/// Asymptotic exponent `lim -(1/n) log2 β̄_ε(ρ⊗ⁿ, σ⊗ⁿ) = D_Ω(ρ‖σ)`.
pub fn exponent_asym(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    d_omega_tol(rho, sigma, DEFAULT_TOL)
}

/// Exact `β̄_ε(ρ⊗ⁿ, σ⊗ⁿ)` from additivity of `D_Ω`.
pub fn postselected_beta_ncopy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    n: usize,
) -> Result<f64> {
    check_epsilon(eps)?;
    if n == 0 {
        return Err(Error::BadCopies);
    }
    Ok(match exponent_asym(rho, sigma)? {
        ExtendedReal::Finite(d) => (-neg_log2_beta_ncopy(d, eps, n)).exp2(),
        ExtendedReal::Infinite => 0.0,
    })
}

/// Bounds `(n·D_Ω + log2(ε/(1-ε)), n·D_Ω + log2(1/(1-ε)))` on
/// `-log2 β̄_ε(ρ⊗ⁿ, σ⊗ⁿ)`.
pub fn sandwich_bounds(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    n: usize,
) -> Result<(ExtendedReal, ExtendedReal)> {
    check_epsilon(eps)?;
    let d = exponent_asym(rho, sigma)?;
    Ok(sandwich_from_exponent(d, eps, n))
}

pub fn sandwich_from_exponent(
    d_omega: ExtendedReal,
    eps: f64,
    n: usize,
) -> (ExtendedReal, ExtendedReal) {
    let scaled = d_omega.map(|d| n as f64 * d);
    (
        scaled + (eps / (1.0 - eps)).log2(),
        scaled + (1.0 / (1.0 - eps)).log2(),
    )
}
