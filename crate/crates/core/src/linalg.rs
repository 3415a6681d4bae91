//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on small dense matrices (desk-scale dimensions).
//! Eigendecompositions are delegated to `nalgebra`'s Hermitian solver and
//! re-sorted into ascending order.

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative threshold used to decide numerical support.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default cap on the dimension of tensor products.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Absolute tolerance for the Hermiticity check on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below `-NEGATIVITY_TOL * max(|H|, 1)` make an operator non-PSD.
pub const NEGATIVITY_TOL: f64 = 1e-8;

/// Which factor of a bipartite system to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.m)
    }
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl HermitianMatrix {
    /// Validates symmetry within [`HERMITIAN_TOL`] and stores the exact
    /// Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::DimMismatch("empty matrix".into()));
        }
        let asym = max_asymmetry(&m);
        if !(asym <= HERMITIAN_TOL) {
            return Err(Error::NonHermitian(asym));
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(m + m†) / 2`, with no validation.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        let h = (m + m.adjoint()).scale(0.5);
        Self { m: h }
    }

    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_row_slice(dim, &entries)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self {
            m: CMatrix::from_diagonal(&v),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    /// `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &CVector) -> Self {
        Self { m: v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: &self.m - &other.m,
        }
    }

    /// `X H X†` for an arbitrary (possibly rectangular) `X`.
    pub fn conjugate(&self, x: &CMatrix) -> Self {
        Self::hermitian_part(&(x * &self.m * x.adjoint()))
    }

    /// `Re Tr(self · other)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// Largest entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eig(&self) -> Spectrum {
        herm_eig(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Operator (spectral) norm.
    pub fn operator_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    /// True if all entries agree within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.sub(other).max_abs_entry() <= tol
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.eigenvectors.column(i).into_owned()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.len();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let s = f(self.eigenvalues[j]);
            scaled.column_mut(j).scale_mut(s);
        }
        HermitianMatrix::hermitian_part(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }

    /// Relative support threshold `tol * max(λmax, 1)`.
    pub fn support_threshold(&self, tol: f64) -> f64 {
        let top = self.eigenvalues.last().copied().unwrap_or(0.0);
        tol * top.max(1.0)
    }

    fn check_psd(&self) -> Result<()> {
        let lo = self.eigenvalues[0];
        let hi = self.eigenvalues[self.len() - 1];
        let scale = lo.abs().max(hi.abs()).max(1.0);
        if lo < -NEGATIVITY_TOL * scale {
            return Err(Error::NotPsd(lo));
        }
        Ok(())
    }
}

pub fn herm_eig(h: &HermitianMatrix) -> Spectrum {
    let se = SymmetricEigen::new(h.m.clone());
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Orthonormal basis (as columns) of the numerical support together with the
/// corresponding eigenvalues.
pub fn support_basis(h: &HermitianMatrix, tol: f64) -> Result<(CMatrix, Vec<f64>)> {
    let spec = herm_eig(h);
    spec.check_psd()?;
    let thr = spec.support_threshold(tol);
    let keep: Vec<usize> = (0..spec.len())
        .filter(|&i| spec.eigenvalues[i] > thr)
        .collect();
    let mut basis = CMatrix::zeros(h.dim(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &spec.eigenvectors.column(src));
    }
    Ok((basis, keep.iter().map(|&i| spec.eigenvalues[i]).collect()))
}

pub fn support_projector(h: &HermitianMatrix, tol: f64) -> Result<HermitianMatrix> {
    let spec = herm_eig(h);
    spec.check_psd()?;
    let thr = spec.support_threshold(tol);
    Ok(spec.map(|x| if x > thr { 1.0 } else { 0.0 }))
}

/// Pseudo-inverse square root: eigenvalues on the support map to `λ^{-1/2}`,
/// the rest to zero.
pub fn pinv_sqrt(h: &HermitianMatrix, tol: f64) -> Result<HermitianMatrix> {
    let spec = herm_eig(h);
    spec.check_psd()?;
    let thr = spec.support_threshold(tol);
    Ok(spec.map(|x| if x > thr { x.sqrt().recip() } else { 0.0 }))
}

/// Moore-Penrose pseudo-inverse of a PSD operator.
pub fn pinv(h: &HermitianMatrix, tol: f64) -> Result<HermitianMatrix> {
    let spec = herm_eig(h);
    spec.check_psd()?;
    let thr = spec.support_threshold(tol);
    Ok(spec.map(|x| if x > thr { x.recip() } else { 0.0 }))
}

/// Whether `supp(rho) ⊆ supp(sigma)`.
pub fn support_contained(rho: &HermitianMatrix, sigma: &HermitianMatrix, tol: f64) -> Result<bool> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    herm_eig(rho).check_psd()?;
    let proj = support_projector(sigma, tol)?;
    let complement = HermitianMatrix::identity(rho.dim()).sub(&proj);
    let leak = rho.conjugate(complement.matrix());
    let scale = rho.operator_norm().max(1.0);
    Ok(leak.operator_norm() <= tol * scale)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    cap: usize,
) -> Result<HermitianMatrix> {
    let dim = a.dim().saturating_mul(b.dim());
    if dim > cap {
        return Err(Error::DimOverflow { dim, cap });
    }
    Ok(HermitianMatrix {
        m: kron(&a.m, &b.m),
    })
}

pub fn tensor_power(a: &HermitianMatrix, n: usize) -> Result<HermitianMatrix> {
    tensor_power_with_cap(a, n, DEFAULT_DIM_CAP)
}

pub fn tensor_power_with_cap(a: &HermitianMatrix, n: usize, cap: usize) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::BadCopies);
    }
    let dim = checked_pow(a.dim(), n);
    if dim > cap {
        return Err(Error::DimOverflow { dim, cap });
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = tensor_with_cap(&out, a, cap)?;
    }
    Ok(out)
}

pub(crate) fn checked_pow(base: usize, n: usize) -> usize {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Partial trace of a (not necessarily Hermitian) matrix on `A ⊗ B`.
pub fn partial_trace_matrix(
    x: &CMatrix,
    traced: Subsystem,
    dims: (usize, usize),
) -> Result<CMatrix> {
    let (da, db) = dims;
    if x.nrows() != da * db || x.ncols() != da * db {
        return Err(Error::DimMismatch(format!(
            "matrix is {}x{}, subsystems {da}x{db}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(match traced {
        Subsystem::B => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| x[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::A => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| x[(k * db + i, k * db + j)]).sum()
        }),
    })
}

pub fn partial_trace(
    x: &HermitianMatrix,
    traced: Subsystem,
    dims: (usize, usize),
) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::hermitian_part(&partial_trace_matrix(
        &x.m, traced, dims,
    )?))
}

/// Output-to-input flat index map for a subsystem permutation.
fn permutation_lookup(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    if perm.len() != dims.len() {
        return Err(Error::DimMismatch(
            "permutation does not fit the matrix".into(),
        ));
    }
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::DimMismatch("not a permutation".into()));
        }
        seen[p] = true;
    }
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map_index = |idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = idx;
        for k in (0..new_dims.len()).rev() {
            digits[k] = rem % new_dims[k];
            rem /= new_dims[k];
        }
        let mut orig = vec![0usize; dims.len()];
        for (k, &p) in perm.iter().enumerate() {
            orig[p] = digits[k];
        }
        orig.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
    };
    Ok((0..total).map(map_index).collect())
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems(x: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if x.nrows() != total || x.ncols() != total {
        return Err(Error::DimMismatch(
            "permutation does not fit the matrix".into(),
        ));
    }
    let lookup = permutation_lookup(dims, perm)?;
    Ok(CMatrix::from_fn(total, total, |i, j| {
        x[(lookup[i], lookup[j])]
    }))
}

/// Unitary `P` with `P X P† = permute_subsystems(X, dims, perm)`.
pub fn permutation_unitary(dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let lookup = permutation_lookup(dims, perm)?;
    let total = lookup.len();
    let mut p = CMatrix::zeros(total, total);
    for (i, &j) in lookup.iter().enumerate() {
        p[(i, j)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(a: &HermitianMatrix) -> f64 {
    a.eigenvalues().iter().map(|x| x.abs()).sum()
}

/// A positive semidefinite Hermitian matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
}

/// Eigenvalue floor for density matrices.
pub const DENSITY_EIG_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;

impl DensityMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let lo = base.min_eigenvalue();
        if lo < -DENSITY_EIG_TOL {
            return Err(Error::NotDensity(format!("eigenvalue {lo}")));
        }
        Ok(Self { base })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    /// Normalizes a PSD operator to unit trace.
    pub fn normalized(h: &HermitianMatrix) -> Result<Self> {
        let tr = h.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroOperator);
        }
        Self::new(h.scale(1.0 / tr))
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroOperator);
        }
        Self::new(HermitianMatrix::outer(&psi.unscale(n)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            base: HermitianMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            base: tensor(&self.base, &other.base)?,
        })
    }

    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        Ok(Self {
            base: tensor_power(&self.base, n)?,
        })
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;

    fn deref(&self) -> &HermitianMatrix {
        &self.base
    }
}

impl AsRef<HermitianMatrix> for DensityMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.base
    }
}

impl AsRef<HermitianMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        self
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Computational basis vector `|i⟩` in dimension `dim`.
pub fn basis_vector(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = c(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn plus() -> CVector {
        CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).unscale(2f64.sqrt())
    }

    #[test]
    fn eig_identity_and_diagonal() {
        assert_eq!(HermitianMatrix::identity(2).eigenvalues(), vec![1.0, 1.0]);
        let ev = HermitianMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]).eigenvalues();
        assert!((ev[0] - 1.0 / 3.0).abs() < 1e-15 && (ev[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eig_pauli_x_matches_analytic_eigenvectors() {
        let s = herm_eig(&pauli_x());
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        let r = 2f64.sqrt().recip();
        let minus = CVector::from_vec(vec![c(r, 0.0), c(-r, 0.0)]);
        // eigenvectors are defined up to a phase
        assert!((s.vector(0).dotc(&minus).norm() - 1.0).abs() < 1e-12);
        assert!((s.vector(1).dotc(&plus()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NonHermitian(_))
        ));
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn support_projector_cases() {
        let p = support_projector(
            &HermitianMatrix::from_real_diagonal(&[0.5, 0.5, 0.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(p.approx_eq(
            &HermitianMatrix::from_real_diagonal(&[1.0, 1.0, 0.0]),
            1e-12
        ));
        let full = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!(support_projector(&full, DEFAULT_TOL)
            .unwrap()
            .approx_eq(&HermitianMatrix::identity(2), 1e-12));
        let pp = HermitianMatrix::outer(&plus());
        assert!(support_projector(&pp, DEFAULT_TOL)
            .unwrap()
            .approx_eq(&pp, 1e-12));
        let neg = HermitianMatrix::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(
            support_projector(&neg, DEFAULT_TOL),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn pinv_sqrt_cases() {
        let i2 = HermitianMatrix::identity(2);
        assert!(pinv_sqrt(&i2, DEFAULT_TOL).unwrap().approx_eq(&i2, 1e-14));
        let x = pinv_sqrt(
            &HermitianMatrix::from_real_diagonal(&[4.0, 0.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(x.approx_eq(&HermitianMatrix::from_real_diagonal(&[0.5, 0.0]), 1e-14));
        let x = pinv_sqrt(
            &HermitianMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        let want = HermitianMatrix::from_real_diagonal(&[1.5f64.sqrt(), 3f64.sqrt()]);
        assert!(x.approx_eq(&want, 1e-12));
    }

    #[test]
    fn support_containment() {
        let zero = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        let mixed = HermitianMatrix::identity(2).scale(0.5);
        assert!(support_contained(&zero, &mixed, DEFAULT_TOL).unwrap());
        assert!(!support_contained(&mixed, &zero, DEFAULT_TOL).unwrap());
        let pp = HermitianMatrix::outer(&plus());
        assert!(!support_contained(&pp, &zero, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn tensor_cases() {
        let i2 = HermitianMatrix::identity(2);
        assert!(tensor(&i2, &i2)
            .unwrap()
            .approx_eq(&HermitianMatrix::identity(4), 0.0));
        let ab = tensor(
            &HermitianMatrix::from_real_diagonal(&[2.0, 3.0]),
            &HermitianMatrix::from_real_diagonal(&[5.0, 7.0]),
        )
        .unwrap();
        assert!(ab.approx_eq(
            &HermitianMatrix::from_real_diagonal(&[10.0, 14.0, 15.0, 21.0]),
            0.0
        ));
        let sq = tensor_power(
            &HermitianMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]),
            2,
        )
        .unwrap();
        let want =
            HermitianMatrix::from_real_diagonal(&[4.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0, 1.0 / 9.0]);
        assert!(sq.approx_eq(&want, 1e-15));
        assert!(matches!(
            tensor_power_with_cap(&i2, 5, 16),
            Err(Error::DimOverflow { dim: 32, cap: 16 })
        ));
    }

    #[test]
    fn partial_trace_cases() {
        let r = 2f64.sqrt().recip();
        let phi = CVector::from_vec(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]);
        let pt = partial_trace(&HermitianMatrix::outer(&phi), Subsystem::B, (2, 2)).unwrap();
        assert!(pt.approx_eq(&HermitianMatrix::identity(2).scale(0.5), 1e-15));

        let rho = HermitianMatrix::from_real_diagonal(&[0.25, 0.75]);
        let sigma = HermitianMatrix::from_real_diagonal(&[0.1, 0.2, 0.7]);
        let pt = partial_trace(&tensor(&rho, &sigma).unwrap(), Subsystem::B, (2, 3)).unwrap();
        assert!(pt.approx_eq(&rho, 1e-15));

        // |01⟩ + |10⟩, traced over A, by explicit sum over the first index
        let psi = CVector::from_vec(vec![c(0.0, 0.0), c(r, 0.0), c(r, 0.0), c(0.0, 0.0)]);
        let pt = partial_trace(&HermitianMatrix::outer(&psi), Subsystem::A, (2, 2)).unwrap();
        assert!(pt.approx_eq(&HermitianMatrix::identity(2).scale(0.5), 1e-15));

        assert!(matches!(
            partial_trace(&HermitianMatrix::identity(4), Subsystem::A, (2, 3)),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn permute_swaps_factors() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianMatrix::from_real_diagonal(&[3.0, 5.0, 7.0]);
        let ab = tensor(&a, &b).unwrap();
        let ba = tensor(&b, &a).unwrap();
        let swapped = permute_subsystems(ab.matrix(), &[2, 3], &[1, 0]).unwrap();
        assert_eq!(&swapped, ba.matrix());
    }

    #[test]
    fn trace_norm_cases() {
        assert_eq!(trace_norm(&HermitianMatrix::identity(2)), 2.0);
        let d = HermitianMatrix::from_real_diagonal(&[1.0 / 12.0, -1.0 / 12.0]);
        assert!((trace_norm(&d) - 1.0 / 6.0).abs() < 1e-15);
        let rho = DensityMatrix::pure(&plus()).unwrap();
        assert!((trace_norm(&rho) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::from_diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityMatrix::from_diagonal(&[0.5, 0.5]).is_ok());
    }
}
