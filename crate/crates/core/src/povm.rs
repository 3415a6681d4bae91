//! Three-outcome measurements `{M₁, M₂, M?}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// PSD and completeness tolerance for measurement effects.
pub const POVM_TOL: f64 = 1e-10;

/// Outcome of a three-outcome measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Outcome `1`: guess the null hypothesis ρ.
    GuessRho,
    /// Outcome `2`: guess the alternative σ.
    GuessSigma,
    Inconclusive,
}

impl Outcome {
    pub fn is_conclusive(self) -> bool {
        self != Outcome::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeOutcomePovm {
    m1: HermitianMatrix,
    m2: HermitianMatrix,
    m_inconclusive: HermitianMatrix,
}

impl ThreeOutcomePovm {
    pub fn new(
        m1: HermitianMatrix,
        m2: HermitianMatrix,
        m_inconclusive: HermitianMatrix,
    ) -> Result<Self> {
        let d = m1.dim();
        if m2.dim() != d || m_inconclusive.dim() != d {
            return Err(Error::DimMismatch(
                "POVM effects differ in dimension".into(),
            ));
        }
        for (name, e) in [("M1", &m1), ("M2", &m2), ("M?", &m_inconclusive)] {
            let lo = e.min_eigenvalue();
            if lo < -POVM_TOL {
                return Err(Error::InvalidPovm(format!("{name} has eigenvalue {lo:e}")));
            }
        }
        let total = m1.add(&m2).add(&m_inconclusive);
        let dev = total.sub(&HermitianMatrix::identity(d)).max_abs_entry();
        if dev > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {dev:e}"
            )));
        }
        Ok(Self {
            m1,
            m2,
            m_inconclusive,
        })
    }

    /// Completes `{M₁, M₂}` with `M? = I - M₁ - M₂`.
    pub fn from_conclusive(m1: HermitianMatrix, m2: HermitianMatrix) -> Result<Self> {
        let rest = HermitianMatrix::identity(m1.dim()).sub(&m1).sub(&m2);
        Self::new(m1, m2, rest)
    }

    /// Divides two PSD operators by `‖M̃₁ + M̃₂‖∞` so that they fit under the
    /// identity, and completes the measurement.
    pub fn rescaled(m1: &HermitianMatrix, m2: &HermitianMatrix) -> Result<Self> {
        let norm = m1.add(m2).max_eigenvalue();
        if !(norm > 0.0) {
            return Err(Error::InvalidPovm("conclusive effects vanish".into()));
        }
        Self::from_conclusive(m1.scale(1.0 / norm), m2.scale(1.0 / norm))
    }

    pub fn dim(&self) -> usize {
        self.m1.dim()
    }

    pub fn m1(&self) -> &HermitianMatrix {
        &self.m1
    }

    pub fn m2(&self) -> &HermitianMatrix {
        &self.m2
    }

    pub fn m_inconclusive(&self) -> &HermitianMatrix {
        &self.m_inconclusive
    }

    pub fn effect(&self, o: Outcome) -> &HermitianMatrix {
        match o {
            Outcome::GuessRho => &self.m1,
            Outcome::GuessSigma => &self.m2,
            Outcome::Inconclusive => &self.m_inconclusive,
        }
    }

    /// Born probabilities `(p₁, p₂, p?)` for a state.
    pub fn probabilities(&self, state: &HermitianMatrix) -> [f64; 3] {
        [
            self.m1.inner(state),
            self.m2.inner(state),
            self.m_inconclusive.inner(state),
        ]
    }
}
