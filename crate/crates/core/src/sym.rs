//! Symmetric postselected hypothesis testing.
//!
//! With priors `p` on ρ and `q = 1-p` on σ, the optimal conditional error is
//! `p̄err = (Ξ(pρ‖qσ) + 1)^{-1}`. The optimum is attained by a measurement
//! with a single conclusive outcome on the dominant side.

use serde::Serialize;

use crate::divergence::{dmax_both, ExtendedReal, WeightedPair};
use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, pinv, pinv_sqrt, support_projector, DensityMatrix, HermitianMatrix, DEFAULT_TOL,
};
use crate::povm::ThreeOutcomePovm;

pub(crate) fn check_prior(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::BadPrior(p))
    }
}

/// Which weighted max-divergence attains `D_Ξ(pρ‖qσ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantSide {
    /// `D_max(pρ‖qσ) ≥ D_max(qσ‖pρ)`: conclude ρ only.
    RhoOverSigma,
    /// Conclude σ only.
    SigmaOverRho,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymReport {
    pub p: f64,
    pub perr_bar: f64,
    pub xi_weighted: ExtendedReal,
    pub dominant_side: DominantSide,
    #[serde(skip)]
    pub achieving_povm: Option<ThreeOutcomePovm>,
}

/// `(Ξ + 1)^{-1}`; zero when `Ξ = ∞`.
pub fn perr_from_xi(xi: ExtendedReal) -> f64 {
    match xi {
        ExtendedReal::Finite(x) => 1.0 / (x + 1.0),
        ExtendedReal::Infinite => 0.0,
    }
}

/// `p̄err(ρ⊗ⁿ, σ⊗ⁿ)` from the single-copy max-divergences, evaluated in the
/// log domain.
pub fn perr_from_dmax(p: f64, fwd: ExtendedReal, bwd: ExtendedReal, n: usize) -> f64 {
    let bias = (p / (1.0 - p)).log2();
    let n = n as f64;
    let d = (fwd.map(|x| n * x) + bias).max(bwd.map(|x| n * x) + (-bias));
    match d {
        ExtendedReal::Finite(x) => 1.0 / (x.exp2() + 1.0),
        ExtendedReal::Infinite => 0.0,
    }
}

fn dominant(p: f64, fwd: ExtendedReal, bwd: ExtendedReal) -> DominantSide {
    let bias = (p / (1.0 - p)).log2();
    if fwd + bias >= bwd + (-bias) {
        DominantSide::RhoOverSigma
    } else {
        DominantSide::SigmaOverRho
    }
}

pub fn postselected_perr(rho: &DensityMatrix, sigma: &DensityMatrix, p: f64) -> Result<SymReport> {
    postselected_perr_tol(rho, sigma, p, DEFAULT_TOL)
}

pub fn postselected_perr_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    p: f64,
    tol: f64,
) -> Result<SymReport> {
    let wp = WeightedPair::new(rho.clone(), sigma.clone(), p)?;
    let (fwd, bwd) = dmax_both(&wp.rho, &wp.sigma, tol)?;
    let bias = (p / (1.0 - p)).log2();
    let xi_weighted = (fwd + bias).max(bwd + (-bias)).exp2();
    let achieving_povm = Some(povm_for(rho, sigma, p, fwd, bwd, tol)?);
    Ok(SymReport {
        p,
        perr_bar: perr_from_xi(xi_weighted),
        xi_weighted,
        dominant_side: dominant(p, fwd, bwd),
        achieving_povm,
    })
}

/// Measurement attaining `p̄err`.
pub fn optimal_povm_sym(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    p: f64,
) -> Result<ThreeOutcomePovm> {
    check_prior(p)?;
    let (fwd, bwd) = dmax_both(rho, sigma, DEFAULT_TOL)?;
    povm_for(rho, sigma, p, fwd, bwd, DEFAULT_TOL)
}

fn povm_for(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    p: f64,
    fwd: ExtendedReal,
    bwd: ExtendedReal,
    tol: f64,
) -> Result<ThreeOutcomePovm> {
    let d = rho.dim();
    let zero = HermitianMatrix::zeros(d);
    // Perfect conditional discrimination: project off the other support.
    if !fwd.is_finite() {
        let m1 = HermitianMatrix::identity(d).sub(&support_projector(sigma, tol)?);
        return ThreeOutcomePovm::rescaled(&m1, &zero);
    }
    if !bwd.is_finite() {
        let m2 = HermitianMatrix::identity(d).sub(&support_projector(rho, tol)?);
        return ThreeOutcomePovm::rescaled(&zero, &m2);
    }
    let effect = |num: &HermitianMatrix, den: &HermitianMatrix| -> Result<HermitianMatrix> {
        let x = pinv_sqrt(den, tol)?;
        let spec = herm_eig(&num.conjugate(x.matrix()));
        let psi = spec.vector(spec.len() - 1);
        let w = HermitianMatrix::outer(&psi).conjugate(x.matrix());
        let norm = (psi.adjoint() * pinv(den, tol)?.matrix() * &psi)[(0, 0)].re;
        Ok(w.scale(1.0 / norm))
    };
    match dominant(p, fwd, bwd) {
        DominantSide::RhoOverSigma => ThreeOutcomePovm::from_conclusive(effect(rho, sigma)?, zero),
        DominantSide::SigmaOverRho => ThreeOutcomePovm::from_conclusive(zero, effect(sigma, rho)?),
    }
}

/// Asymptotic symmetric exponent `D_Ξ(ρ‖σ)`, independent of the prior.
pub fn exponent_sym(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    let (fwd, bwd) = dmax_both(rho, sigma, DEFAULT_TOL)?;
    Ok(fwd.max(bwd))
}

/// Exact `p̄err(ρ⊗ⁿ, σ⊗ⁿ)` from additivity of `D_max`.
pub fn postselected_perr_ncopy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    p: f64,
    n: usize,
) -> Result<f64> {
    check_prior(p)?;
    if n == 0 {
        return Err(Error::BadCopies);
    }
    let (fwd, bwd) = dmax_both(rho, sigma, DEFAULT_TOL)?;
    Ok(perr_from_dmax(p, fwd, bwd, n))
}
