//! Quantum channels and postselected channel discrimination.
//!
//! Choi states use the ancilla-first convention
//! `J_M = (1/d_A) Σ_{ij} |i⟩⟨j| ⊗ M(|i⟩⟨j|)`, so `J_M` is a density matrix on
//! `A ⊗ B` with `Tr_B J_M = I/d_A`.

use serde::Serialize;

use crate::asym::{beta_from_omega, check_epsilon, neg_log2_beta_ncopy};
use crate::composite::{omega_min, CompositeOptions, CompositeReport, ConvexStateSet};
use crate::divergence::{dmax_both, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, kron, partial_trace, CMatrix, CVector, DensityMatrix, HermitianMatrix, Subsystem,
    DEFAULT_DIM_CAP, DEFAULT_TOL,
};
use crate::sym::check_prior;

/// Deviation from `Σ K†K = I` (and from `Tr_B J = I/d_A`) tolerated on input.
pub const CHANNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Option<Vec<CMatrix>>,
    choi: DensityMatrix,
}

impl QuantumChannel {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidKraus("no Kraus operators".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidKraus("empty Kraus operator".into()));
        }
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::InvalidKraus(
                "Kraus operators differ in shape".into(),
            ));
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (sum - CMatrix::identity(dim_in, dim_in)).camax();
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidKraus(format!(
                "sum of K†K deviates from identity by {dev:e}"
            )));
        }
        let d = dim_in * dim_out;
        if d > DEFAULT_DIM_CAP {
            return Err(Error::DimOverflow {
                dim: d,
                cap: DEFAULT_DIM_CAP,
            });
        }
        let mut j = CMatrix::zeros(d, d);
        for k in &kraus {
            let v = vectorize(k);
            j += &v * v.adjoint();
        }
        let choi = DensityMatrix::normalized(&HermitianMatrix::hermitian_part(&j))
            .map_err(|e| Error::InvalidKraus(e.to_string()))?;
        Ok(Self {
            dim_in,
            dim_out,
            kraus: Some(kraus),
            choi,
        })
    }

    /// Validates a Choi state: PSD, unit trace, and `Tr_B J = I/d_A`.
    pub fn from_choi(choi: HermitianMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 || choi.dim() != dim_in * dim_out {
            return Err(Error::InvalidChoi(format!(
                "Choi matrix of size {} does not match {dim_in} x {dim_out}",
                choi.dim()
            )));
        }
        let reduced = partial_trace(&choi, Subsystem::B, (dim_in, dim_out))?;
        let target = HermitianMatrix::identity(dim_in).scale(1.0 / dim_in as f64);
        let dev = reduced.sub(&target).max_abs_entry();
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidChoi(format!(
                "not trace preserving (deviation {dev:e})"
            )));
        }
        let choi = DensityMatrix::new(choi).map_err(|e| Error::InvalidChoi(e.to_string()))?;
        Ok(Self {
            dim_in,
            dim_out,
            kraus: None,
            choi,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(vec![CMatrix::identity(dim, dim)]).expect("identity is a channel")
    }

    /// `M_t(X) = (1-t)X + t·Tr(X)·I/d` for `t ∈ [0, 1]`.
    pub fn depolarizing(dim: usize, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || dim == 0 {
            return Err(Error::InvalidKraus(format!(
                "depolarizing parameter {t} outside [0, 1]"
            )));
        }
        let d = dim as f64;
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let w = if a == 0 && b == 0 {
                    (1.0 - t + t / (d * d)).sqrt()
                } else {
                    t.sqrt() / d
                };
                if w > 0.0 {
                    kraus.push(weyl(dim, a, b) * num_complex::Complex64::new(w, 0.0));
                }
            }
        }
        Self::from_kraus(kraus)
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidKraus(format!(
                "damping parameter {gamma} outside [0, 1]"
            )));
        }
        let k0 = CMatrix::from_diagonal(&CVector::from_vec(vec![
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new((1.0 - gamma).sqrt(), 0.0),
        ]));
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = num_complex::Complex64::new(gamma.sqrt(), 0.0);
        Self::from_kraus(vec![k0, k1])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn choi(&self) -> &DensityMatrix {
        &self.choi
    }

    /// Stored Kraus operators, or a minimal set read off the Choi state.
    pub fn kraus_operators(&self) -> Vec<CMatrix> {
        if let Some(k) = &self.kraus {
            return k.clone();
        }
        let spec = herm_eig(&self.choi);
        let thr = spec.support_threshold(DEFAULT_TOL);
        let scale = self.dim_in as f64;
        (0..spec.len())
            .filter(|&i| spec.eigenvalues[i] > thr)
            .map(|i| {
                let v = spec.vector(i)
                    * num_complex::Complex64::new((scale * spec.eigenvalues[i]).sqrt(), 0.0);
                unvectorize(&v, self.dim_in, self.dim_out)
            })
            .collect()
    }

    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.dim() != self.dim_in {
            return Err(Error::DimMismatch(format!(
                "channel input {} vs operator {}",
                self.dim_in,
                x.dim()
            )));
        }
        match &self.kraus {
            Some(ks) => {
                let mut acc = CMatrix::zeros(self.dim_out, self.dim_out);
                for k in ks {
                    acc += k * x.matrix() * k.adjoint();
                }
                Ok(HermitianMatrix::hermitian_part(&acc))
            }
            None => self.apply_via_choi(x),
        }
    }

    /// `M(X) = d_A · Tr_A[(Xᵀ ⊗ I) J]`.
    pub fn apply_via_choi(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.dim() != self.dim_in {
            return Err(Error::DimMismatch(
                "operator does not match channel input".into(),
            ));
        }
        let (da, db) = (self.dim_in, self.dim_out);
        let lifted = kron(&x.matrix().transpose(), &CMatrix::identity(db, db)) * self.choi.matrix();
        let mut out = CMatrix::zeros(db, db);
        for a in 0..da {
            out += lifted.view((a * db, a * db), (db, db));
        }
        Ok(HermitianMatrix::hermitian_part(
            &(out * num_complex::Complex64::new(da as f64, 0.0)),
        ))
    }

    /// `(id_R ⊗ M)(X)` for `X` on `R ⊗ A`.
    pub fn apply_on_second(
        &self,
        x: &HermitianMatrix,
        dim_first: usize,
    ) -> Result<HermitianMatrix> {
        if x.dim() != dim_first * self.dim_in {
            return Err(Error::DimMismatch("operator does not match R ⊗ A".into()));
        }
        let id = CMatrix::identity(dim_first, dim_first);
        let d_out = dim_first * self.dim_out;
        let mut acc = CMatrix::zeros(d_out, d_out);
        for k in self.kraus_operators() {
            let big = kron(&id, &k);
            acc += &big * x.matrix() * big.adjoint();
        }
        Ok(HermitianMatrix::hermitian_part(&acc))
    }

    /// `M ⊗ N`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut kraus = Vec::new();
        for a in self.kraus_operators() {
            for b in other.kraus_operators() {
                kraus.push(kron(&a, &b));
            }
        }
        Self::from_kraus(kraus)
    }
}

/// `|K⟩⟩ = Σᵢ |i⟩ ⊗ K|i⟩`, entry `i·d_B + b` equal to `K[b, i]`.
fn vectorize(k: &CMatrix) -> CVector {
    let (db, da) = k.shape();
    CVector::from_fn(da * db, |idx, _| k[(idx % db, idx / db)])
}

fn unvectorize(v: &CVector, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(db, da, |b, i| v[i * db + b])
}

/// Weyl operator `XᵃZᵇ` in dimension `d`.
fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let phase = num_complex::Complex64::from_polar(1.0, omega * ((b * j) % d) as f64);
        m[((j + a) % d, j)] = phase;
    }
    m
}

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = d^{-1/2} Σ |ii⟩`.
pub fn max_entangled(dim: usize) -> DensityMatrix {
    let s = (dim as f64).sqrt().recip();
    let v = CVector::from_fn(dim * dim, |idx, _| {
        if idx / dim == idx % dim {
            num_complex::Complex64::new(s, 0.0)
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix::pure(&v).expect("unit vector")
}

pub fn choi_of(ch: &QuantumChannel) -> DensityMatrix {
    ch.choi.clone()
}

fn check_pair(m: &QuantumChannel, n: &QuantumChannel) -> Result<()> {
    if m.dim_in != n.dim_in || m.dim_out != n.dim_out {
        return Err(Error::DimMismatch(format!(
            "channels {}→{} and {}→{}",
            m.dim_in, m.dim_out, n.dim_in, n.dim_out
        )));
    }
    Ok(())
}

/// `n` copies of a channel must keep the Choi state under the dimension cap.
fn check_copies(m: &QuantumChannel, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::BadCopies);
    }
    let dim = crate::linalg::checked_pow(m.dim_in * m.dim_out, n);
    if dim > DEFAULT_DIM_CAP {
        return Err(Error::DimOverflow {
            dim,
            cap: DEFAULT_DIM_CAP,
        });
    }
    Ok(())
}

/// `(D_max(J_M‖J_N), D_max(J_N‖J_M))`.
pub fn channel_dmax_both(
    m: &QuantumChannel,
    n: &QuantumChannel,
) -> Result<(ExtendedReal, ExtendedReal)> {
    check_pair(m, n)?;
    dmax_both(&m.choi, &n.choi, DEFAULT_TOL)
}

pub fn channel_omega(m: &QuantumChannel, n: &QuantumChannel) -> Result<ExtendedReal> {
    let (a, b) = channel_dmax_both(m, n)?;
    Ok((a + b).exp2())
}

pub fn channel_xi(m: &QuantumChannel, n: &QuantumChannel) -> Result<ExtendedReal> {
    let (a, b) = channel_dmax_both(m, n)?;
    Ok(a.max(b).exp2())
}

/// `β̄_ε` for `n` uses of the channel pair, over all adaptive strategies.
pub fn channel_beta(m: &QuantumChannel, n_ch: &QuantumChannel, eps: f64, n: usize) -> Result<f64> {
    check_epsilon(eps)?;
    check_copies(m, n)?;
    let (a, b) = channel_dmax_both(m, n_ch)?;
    Ok(match a + b {
        ExtendedReal::Finite(d) if n == 1 => beta_from_omega(eps, ExtendedReal::Finite(d.exp2())),
        ExtendedReal::Finite(d) => (-neg_log2_beta_ncopy(d, eps, n)).exp2(),
        ExtendedReal::Infinite => 0.0,
    })
}

/// `p̄err` for `n` uses with prior `p` on `M`.
pub fn channel_perr(m: &QuantumChannel, n_ch: &QuantumChannel, p: f64, n: usize) -> Result<f64> {
    check_prior(p)?;
    check_copies(m, n)?;
    let (a, b) = channel_dmax_both(m, n_ch)?;
    Ok(crate::sym::perr_from_dmax(p, a, b, n))
}

/// Asymptotic exponents `(D_Ω(J_M‖J_N), D_Ξ(J_M‖J_N))`.
pub fn channel_exponents(
    m: &QuantumChannel,
    n: &QuantumChannel,
) -> Result<(ExtendedReal, ExtendedReal)> {
    let (a, b) = channel_dmax_both(m, n)?;
    Ok((a + b, a.max(b)))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub dim_in: usize,
    pub dim_out: usize,
    pub d_omega: ExtendedReal,
    pub d_xi: ExtendedReal,
    pub omega: ExtendedReal,
    pub xi: ExtendedReal,
}

pub fn channel_report(m: &QuantumChannel, n: &QuantumChannel) -> Result<ChannelReport> {
    let (d_omega, d_xi) = channel_exponents(m, n)?;
    Ok(ChannelReport {
        dim_in: m.dim_in,
        dim_out: m.dim_out,
        d_omega,
        d_xi,
        omega: d_omega.exp2(),
        xi: d_xi.exp2(),
    })
}

/// `min_{N ∈ conv F} Ω(J_M‖J_N)`, mixing channels through their Choi states.
pub fn channel_composite_omega(
    m: &QuantumChannel,
    family: &[QuantumChannel],
    opts: &CompositeOptions,
) -> Result<CompositeReport> {
    for f in family {
        check_pair(m, f)?;
    }
    let set = ConvexStateSet::new(family.iter().map(choi_of).collect())?;
    omega_min(&m.choi, &set, opts)
}
