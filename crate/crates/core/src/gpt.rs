//! Cone-ordered divergences for general probabilistic theories.
//!
//! A model is a cone `C` in a real vector space with a unit effect `U`.
//! `D_max(x‖y) = log2 inf{λ : λy - x ∈ C}` and the postselected closed forms
//! carry over with `Tr(M·)` replaced by `⟨M, ·⟩`. Polyhedral cones are given
//! by their facets, `C = {x : ⟨wᵢ, x⟩ ≥ 0}`, which turns `D_max` into a
//! maximum of ratios.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::asym::{beta_from_omega, check_epsilon};
use crate::divergence::{dmax_tol, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, DEFAULT_TOL};
use crate::sym::{check_prior, perr_from_dmax};

/// Relative tolerance for cone membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Tolerance on `⟨U, x⟩ = 1`.
pub const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ConeModel {
    Quantum {
        dim: usize,
    },
    Classical {
        dim: usize,
    },
    Polyhedral {
        dual_generators: Vec<Vec<f64>>,
        unit_effect: Vec<f64>,
    },
}

impl ConeModel {
    /// Square state space (boxworld gbit): states `(a, b, 1)` with
    /// `|a|, |b| ≤ 1`.
    pub fn boxworld() -> Self {
        ConeModel::Polyhedral {
            dual_generators: vec![
                vec![1.0, 0.0, 1.0],
                vec![-1.0, 0.0, 1.0],
                vec![0.0, 1.0, 1.0],
                vec![0.0, -1.0, 1.0],
            ],
            unit_effect: vec![0.0, 0.0, 1.0],
        }
    }

    /// Positive orthant written by facets.
    pub fn orthant(dim: usize) -> Self {
        ConeModel::Polyhedral {
            dual_generators: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            unit_effect: vec![1.0; dim],
        }
    }

    /// Checks dimensions and that the facet normals span the dual space.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConeModel::Quantum { dim } | ConeModel::Classical { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidCone("dimension must be positive".into()));
                }
            }
            ConeModel::Polyhedral {
                dual_generators,
                unit_effect,
            } => {
                let n = unit_effect.len();
                if n == 0 || dual_generators.is_empty() {
                    return Err(Error::InvalidCone("empty polyhedral cone".into()));
                }
                if dual_generators.iter().any(|w| w.len() != n) {
                    return Err(Error::InvalidCone(
                        "dual generators differ in length".into(),
                    ));
                }
                let all = dual_generators.iter().chain([unit_effect]);
                if all.flatten().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidCone("non-finite coordinate".into()));
                }
                let m = DMatrix::from_fn(dual_generators.len(), n, |i, j| dual_generators[i][j]);
                if m.rank(1e-10 * m.amax().max(1.0)) < n {
                    return Err(Error::InvalidCone(
                        "dual generators do not span the dual space".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the real vector space.
    pub fn vector_dim(&self) -> usize {
        match self {
            ConeModel::Quantum { dim } => dim * dim,
            ConeModel::Classical { dim } => *dim,
            ConeModel::Polyhedral { unit_effect, .. } => unit_effect.len(),
        }
    }
}

#[derive(Debug, Clone)]
enum Coords {
    Real(Vec<f64>),
    Quantum(DensityMatrix),
}

/// A normalized state of a cone model.
#[derive(Debug, Clone)]
pub struct GptState {
    cone: ConeModel,
    coords: Coords,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl GptState {
    pub fn quantum(rho: DensityMatrix) -> Self {
        Self {
            cone: ConeModel::Quantum { dim: rho.dim() },
            coords: Coords::Quantum(rho),
        }
    }

    pub fn classical(p: Vec<f64>) -> Result<Self> {
        Self::new(ConeModel::Classical { dim: p.len() }, p)
    }

    /// Real coordinates in a classical or polyhedral model.
    pub fn new(cone: ConeModel, x: Vec<f64>) -> Result<Self> {
        cone.validate()?;
        if x.len() != cone.vector_dim() {
            return Err(Error::InvalidState(format!(
                "{} coordinates for a {}-dimensional model",
                x.len(),
                cone.vector_dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite coordinate".into()));
        }
        let scale = norm(&x).max(1.0);
        match &cone {
            ConeModel::Quantum { .. } => {
                return Err(Error::UnsupportedVariant(
                    "quantum states are built from density matrices",
                ));
            }
            ConeModel::Classical { .. } => {
                if let Some(v) = x.iter().find(|&&v| v < -MEMBERSHIP_TOL * scale) {
                    return Err(Error::InvalidState(format!("negative entry {v}")));
                }
                let total: f64 = x.iter().sum();
                if (total - 1.0).abs() > UNIT_TOL {
                    return Err(Error::InvalidState(format!("entries sum to {total}")));
                }
            }
            ConeModel::Polyhedral {
                dual_generators,
                unit_effect,
            } => {
                for w in dual_generators {
                    let v = dot(w, &x);
                    if v < -MEMBERSHIP_TOL * scale * norm(w) {
                        return Err(Error::InvalidState(format!(
                            "outside the cone (facet value {v})"
                        )));
                    }
                }
                let u = dot(unit_effect, &x);
                if (u - 1.0).abs() > UNIT_TOL {
                    return Err(Error::InvalidState(format!("unit effect gives {u}")));
                }
            }
        }
        Ok(Self {
            cone,
            coords: Coords::Real(x),
        })
    }

    pub fn cone(&self) -> &ConeModel {
        &self.cone
    }

    /// Real coordinates (none for quantum states).
    pub fn coords(&self) -> Option<&[f64]> {
        match &self.coords {
            Coords::Real(v) => Some(v),
            Coords::Quantum(_) => None,
        }
    }

    pub fn density(&self) -> Option<&DensityMatrix> {
        match &self.coords {
            Coords::Quantum(r) => Some(r),
            Coords::Real(_) => None,
        }
    }

    /// `x⊗y` for classical and quantum models.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        match (&self.coords, &other.coords) {
            (Coords::Quantum(a), Coords::Quantum(b)) => Ok(Self::quantum(a.tensor(b)?)),
            (Coords::Real(a), Coords::Real(b))
                if is_classical(&self.cone) && is_classical(&other.cone) =>
            {
                let p = a
                    .iter()
                    .flat_map(|x| b.iter().map(move |y| x * y))
                    .collect();
                Self::classical(p)
            }
            _ => Err(Error::UnsupportedVariant(
                "no canonical tensor cone for polyhedral models",
            )),
        }
    }

    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadCopies);
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }
}

fn is_classical(c: &ConeModel) -> bool {
    matches!(c, ConeModel::Classical { .. })
}

/// `log2 max ⟨w, x⟩/⟨w, y⟩` over functionals `w`; infinite when some `w`
/// sees `x` but not `y`.
fn ratio_dmax<'a>(funcs: impl Iterator<Item = (f64, f64)> + 'a, tol: f64) -> ExtendedReal {
    let mut best = 0.0f64;
    for (wx, wy) in funcs {
        if wy <= tol {
            if wx > tol {
                return ExtendedReal::Infinite;
            }
            continue;
        }
        best = best.max(wx / wy);
    }
    ExtendedReal::Finite(best.log2())
}

pub fn cone_dmax(x: &GptState, y: &GptState) -> Result<ExtendedReal> {
    cone_dmax_tol(x, y, DEFAULT_TOL)
}

pub fn cone_dmax_tol(x: &GptState, y: &GptState, tol: f64) -> Result<ExtendedReal> {
    if x.cone != y.cone {
        return Err(Error::ConeMismatch);
    }
    match (&x.coords, &y.coords) {
        (Coords::Quantum(a), Coords::Quantum(b)) => dmax_tol(a, b, tol),
        (Coords::Real(a), Coords::Real(b)) => {
            if a == b {
                return Ok(ExtendedReal::ZERO);
            }
            Ok(match &x.cone {
                ConeModel::Polyhedral {
                    dual_generators, ..
                } => ratio_dmax(dual_generators.iter().map(|w| (dot(w, a), dot(w, b))), tol),
                _ => ratio_dmax(a.iter().copied().zip(b.iter().copied()), tol),
            })
        }
        _ => Err(Error::ConeMismatch),
    }
}

fn dmax_pair(x: &GptState, y: &GptState) -> Result<(ExtendedReal, ExtendedReal)> {
    Ok((cone_dmax(x, y)?, cone_dmax(y, x)?))
}

pub fn cone_omega(x: &GptState, y: &GptState) -> Result<ExtendedReal> {
    let (a, b) = dmax_pair(x, y)?;
    Ok((a + b).exp2())
}

pub fn cone_xi(x: &GptState, y: &GptState) -> Result<ExtendedReal> {
    let (a, b) = dmax_pair(x, y)?;
    Ok(a.max(b).exp2())
}

pub fn cone_postselected_beta(x: &GptState, y: &GptState, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    Ok(beta_from_omega(eps, cone_omega(x, y)?))
}

pub fn cone_postselected_perr(x: &GptState, y: &GptState, p: f64) -> Result<f64> {
    check_prior(p)?;
    let (a, b) = dmax_pair(x, y)?;
    Ok(perr_from_dmax(p, a, b, 1))
}

/// `(D_max(x⊗ⁿ‖y⊗ⁿ), n·D_max(x‖y))`.
pub fn cone_additivity_check(
    x: &GptState,
    y: &GptState,
    n: usize,
) -> Result<(ExtendedReal, ExtendedReal)> {
    if x.cone != y.cone {
        return Err(Error::ConeMismatch);
    }
    if matches!(x.cone, ConeModel::Polyhedral { .. }) {
        return Err(Error::UnsupportedVariant(
            "no canonical tensor cone for polyhedral models",
        ));
    }
    let lhs = cone_dmax(&x.tensor_power(n)?, &y.tensor_power(n)?)?;
    let rhs = cone_dmax(x, y)?.map(|d| n as f64 * d);
    Ok((lhs, rhs))
}
