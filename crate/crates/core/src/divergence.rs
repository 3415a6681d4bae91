//! Max-relative entropy and the two projective metrics built from it.
//!
//! All logarithms are base 2. `Ω = 2^{D_Ω}` and `Ξ = 2^{D_Ξ}` denote the
//! non-logarithmic Hilbert and Thompson quantities.

use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    pinv_sqrt, support_contained, trace_norm, DensityMatrix, HermitianMatrix, DEFAULT_TOL,
};

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);
    pub const ONE: ExtendedReal = ExtendedReal::Finite(1.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the infinite case.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn exp2(self) -> Self {
        self.map(f64::exp2)
    }

    pub fn log2(self) -> Self {
        self.map(f64::log2)
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(f(x)),
            ExtendedReal::Infinite => ExtendedReal::Infinite,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl Add<f64> for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: f64) -> Self {
        self.map(|x| x + rhs)
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => fmt::Display::fmt(x, f),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Two states with prior probabilities `p` (for `rho`) and `q = 1 - p`.
#[derive(Debug, Clone)]
pub struct WeightedPair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    p: f64,
}

impl WeightedPair {
    pub fn new(rho: DensityMatrix, sigma: DensityMatrix, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadPrior(p));
        }
        if rho.dim() != sigma.dim() {
            return Err(Error::DimMismatch(format!(
                "{} vs {}",
                rho.dim(),
                sigma.dim()
            )));
        }
        Ok(Self { rho, sigma, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

fn check_nonzero(h: &HermitianMatrix) -> Result<()> {
    if h.max_abs_entry() == 0.0 || !(h.trace() > 0.0) {
        return Err(Error::ZeroOperator);
    }
    Ok(())
}

/// `D_max(ρ‖σ) = log2 inf{λ : ρ ≤ λσ}`; accepts unnormalized PSD operators.
pub fn dmax(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    dmax_tol(rho, sigma, DEFAULT_TOL)
}

pub fn dmax_tol(rho: &HermitianMatrix, sigma: &HermitianMatrix, tol: f64) -> Result<ExtendedReal> {
    check_nonzero(rho)?;
    check_nonzero(sigma)?;
    if !support_contained(rho, sigma, tol)? {
        return Ok(ExtendedReal::Infinite);
    }
    if rho == sigma {
        return Ok(ExtendedReal::ZERO);
    }
    let x = pinv_sqrt(sigma, tol)?;
    let whitened = rho.conjugate(x.matrix());
    Ok(ExtendedReal::Finite(whitened.max_eigenvalue().log2()))
}

/// Both directions `(D_max(ρ‖σ), D_max(σ‖ρ))`.
pub fn dmax_both(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    tol: f64,
) -> Result<(ExtendedReal, ExtendedReal)> {
    Ok((dmax_tol(rho, sigma, tol)?, dmax_tol(sigma, rho, tol)?))
}

/// Hilbert projective metric `D_Ω`.
pub fn d_omega(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    d_omega_tol(rho, sigma, DEFAULT_TOL)
}

pub fn d_omega_tol(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    tol: f64,
) -> Result<ExtendedReal> {
    let (fwd, bwd) = dmax_both(rho, sigma, tol)?;
    // nonnegative in exact arithmetic; clip rounding noise
    Ok((fwd + bwd).map(|d| d.max(0.0)))
}

pub fn omega(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    omega_tol(rho, sigma, DEFAULT_TOL)
}

pub fn omega_tol(rho: &HermitianMatrix, sigma: &HermitianMatrix, tol: f64) -> Result<ExtendedReal> {
    Ok(d_omega_tol(rho, sigma, tol)?.exp2())
}

/// Thompson metric `D_Ξ`.
pub fn d_xi(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    d_xi_tol(rho, sigma, DEFAULT_TOL)
}

pub fn d_xi_tol(rho: &HermitianMatrix, sigma: &HermitianMatrix, tol: f64) -> Result<ExtendedReal> {
    let (fwd, bwd) = dmax_both(rho, sigma, tol)?;
    Ok(fwd.max(bwd))
}

pub fn xi(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<ExtendedReal> {
    xi_tol(rho, sigma, DEFAULT_TOL)
}

pub fn xi_tol(rho: &HermitianMatrix, sigma: &HermitianMatrix, tol: f64) -> Result<ExtendedReal> {
    Ok(d_xi_tol(rho, sigma, tol)?.exp2())
}

/// `D_Ξ(pρ‖qσ)`, using `D_max(pρ‖qσ) = log2(p/q) + D_max(ρ‖σ)`.
pub fn d_xi_weighted(wp: &WeightedPair) -> Result<ExtendedReal> {
    d_xi_weighted_tol(wp, DEFAULT_TOL)
}

pub fn d_xi_weighted_tol(wp: &WeightedPair, tol: f64) -> Result<ExtendedReal> {
    let (fwd, bwd) = dmax_both(&wp.rho, &wp.sigma, tol)?;
    let bias = (wp.p() / wp.q()).log2();
    Ok((fwd + bias).max(bwd + (-bias)))
}

pub fn xi_weighted(wp: &WeightedPair) -> Result<ExtendedReal> {
    Ok(d_xi_weighted(wp)?.exp2())
}

pub fn xi_weighted_tol(wp: &WeightedPair, tol: f64) -> Result<ExtendedReal> {
    Ok(d_xi_weighted_tol(wp, tol)?.exp2())
}

/// Optimal conventional symmetric error `(1 - ‖pρ - qσ‖₁)/2`.
pub fn helstrom_error(wp: &WeightedPair) -> f64 {
    let diff = wp.rho.scale(wp.p()).sub(&wp.sigma.scale(wp.q()));
    (0.5 * (1.0 - trace_norm(&diff))).clamp(0.0, 0.5)
}

/// Conjugates `ρ = diag(2/3, 1/3)` and `σ = I/2` by `diag(√γ, 1/√γ)`,
/// renormalizes, and returns `(Ξ of the outputs, Ξ of the inputs)`.
///
/// The first value equals `(2γ²+1)/(γ²+1)`, which exceeds `3/2`: the
/// Thompson quantity of normalized outputs is not monotone under positive maps.
pub fn dilation_counterexample(gamma: f64) -> Result<(ExtendedReal, ExtendedReal)> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::BadGamma(gamma));
    }
    let rho = DensityMatrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0])?;
    let sigma = DensityMatrix::maximally_mixed(2);
    let d = HermitianMatrix::from_real_diagonal(&[gamma.sqrt(), gamma.sqrt().recip()]);
    let out_rho = DensityMatrix::normalized(&rho.conjugate(d.matrix()))?;
    let out_sigma = DensityMatrix::normalized(&sigma.conjugate(d.matrix()))?;
    Ok((xi(&out_rho, &out_sigma)?, xi(&rho, &sigma)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c, CVector};

    fn qubit_pair() -> (DensityMatrix, DensityMatrix) {
        (
            DensityMatrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap(),
            DensityMatrix::maximally_mixed(2),
        )
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::pure(&basis_vector(2, 0)).unwrap()
    }

    fn ket1() -> DensityMatrix {
        DensityMatrix::pure(&basis_vector(2, 1)).unwrap()
    }

    #[test]
    fn dmax_examples() {
        let (rho, sigma) = qubit_pair();
        assert_eq!(dmax(&rho, &rho).unwrap(), ExtendedReal::ZERO);
        let v = dmax(&rho, &sigma).unwrap().finite().unwrap();
        assert!((v - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        assert_eq!(dmax(&ket0(), &ket1()).unwrap(), ExtendedReal::Infinite);
    }

    #[test]
    fn dmax_rejects_zero() {
        let z = HermitianMatrix::zeros(2);
        assert_eq!(
            dmax(&z, &HermitianMatrix::identity(2)),
            Err(Error::ZeroOperator)
        );
        assert_eq!(
            dmax(&HermitianMatrix::identity(2), &z),
            Err(Error::ZeroOperator)
        );
    }

    #[test]
    fn dmax_scaling_rule() {
        let (rho, sigma) = qubit_pair();
        let base = dmax(&rho, &sigma).unwrap().finite().unwrap();
        let scaled = dmax(&rho.scale(3.0), &sigma.scale(0.2))
            .unwrap()
            .finite()
            .unwrap();
        assert!((scaled - (base + (3.0f64 / 0.2).log2())).abs() < 1e-12);
    }

    #[test]
    fn omega_examples() {
        let (rho, sigma) = qubit_pair();
        assert!((omega(&rho, &rho).unwrap().to_f64() - 1.0).abs() < 1e-15);
        assert!((omega(&rho, &sigma).unwrap().to_f64() - 2.0).abs() < 1e-12);
        let scaled = omega(&rho.scale(3.0), &sigma.scale(0.2)).unwrap().to_f64();
        assert!((scaled - 2.0).abs() < 1e-12);
        // nested supports are still infinite in one direction
        assert_eq!(omega(&ket0(), &sigma).unwrap(), ExtendedReal::Infinite);
    }

    #[test]
    fn xi_examples() {
        let (rho, sigma) = qubit_pair();
        assert!((xi(&rho, &sigma).unwrap().to_f64() - 1.5).abs() < 1e-12);
        let same = WeightedPair::new(rho.clone(), rho.clone(), 0.5).unwrap();
        assert!((xi_weighted(&same).unwrap().to_f64() - 1.0).abs() < 1e-12);
        let tilted = WeightedPair::new(rho.clone(), rho, 2.0 / 3.0).unwrap();
        assert!((xi_weighted(&tilted).unwrap().to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn helstrom_examples() {
        let (rho, sigma) = qubit_pair();
        let same = WeightedPair::new(rho.clone(), rho.clone(), 0.5).unwrap();
        assert!((helstrom_error(&same) - 0.5).abs() < 1e-15);
        let orth = WeightedPair::new(ket0(), ket1(), 0.5).unwrap();
        assert!(helstrom_error(&orth).abs() < 1e-15);
        let wp = WeightedPair::new(rho, sigma, 0.5).unwrap();
        assert!((helstrom_error(&wp) - 5.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn dilation_values() {
        let (out, orig) = dilation_counterexample(2.0).unwrap();
        assert!((out.to_f64() - 9.0 / 5.0).abs() < 1e-12);
        assert!((orig.to_f64() - 1.5).abs() < 1e-12);
        let (out, _) = dilation_counterexample(3.0).unwrap();
        assert!((out.to_f64() - 19.0 / 10.0).abs() < 1e-12);
        let (out, _) = dilation_counterexample(1.0 + 1e-9).unwrap();
        assert!((out.to_f64() - 1.5).abs() < 1e-6);
        assert!(matches!(
            dilation_counterexample(1.0),
            Err(Error::BadGamma(_))
        ));
        assert!(matches!(
            dilation_counterexample(0.5),
            Err(Error::BadGamma(_))
        ));
    }

    #[test]
    fn weighted_pair_validation() {
        let (rho, sigma) = qubit_pair();
        assert!(matches!(
            WeightedPair::new(rho.clone(), sigma.clone(), 0.0),
            Err(Error::BadPrior(_))
        ));
        assert!(matches!(
            WeightedPair::new(rho, sigma, 1.0),
            Err(Error::BadPrior(_))
        ));
    }

    #[test]
    fn extended_real_arithmetic() {
        let inf = ExtendedReal::Infinite;
        let one = ExtendedReal::ONE;
        assert_eq!(inf + one, inf);
        assert_eq!(one + one, ExtendedReal::Finite(2.0));
        assert!(one < inf);
        assert_eq!(inf.to_string(), "inf");
        assert_eq!(ExtendedReal::from(f64::INFINITY), inf);
    }

    #[test]
    fn off_diagonal_pair_is_finite() {
        let r = 2f64.sqrt().recip();
        let plus = DensityMatrix::pure(&CVector::from_vec(vec![c(r, 0.0), c(r, 0.0)])).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        // |+⟩⟨+| ≤ 2·I/2, and I/2 is never below a multiple of a rank-one state
        assert!((dmax(&plus, &mixed).unwrap().to_f64() - 1.0).abs() < 1e-12);
        assert_eq!(dmax(&mixed, &plus).unwrap(), ExtendedReal::Infinite);
    }
}
