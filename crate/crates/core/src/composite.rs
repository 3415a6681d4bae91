//! Composite postselected testing against a convex hull of alternatives.
//!
//! `min_{σ ∈ F} Ω(ρ‖σ)` is quasiconvex in the mixing weights: the level set
//! `{Ω ≤ t}` is the projection of `{u ≥ 0 : ρ ⪯ Σ uᵢσᵢ ⪯ tρ}` onto the
//! simplex. We bisect on `log2 t` and decide each level set with a projected
//! subgradient method on
//!
//! ```text
//! g(u) = max{ λmax(ρ - A(u)), λmax(A(u) - tρ) },   A(u) = Σ uᵢ σᵢ,
//! ```
//!
//! evaluated after whitening by `ρ^{-1/2}` on the support of ρ, where the two
//! constraints become `I ⪯ S(u) ⪯ tI`. Every reported value is the exact
//! `Ω(ρ‖σ(w))` at the returned weights.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::asym::{beta_from_omega, check_epsilon};
use crate::divergence::{omega_tol, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, support_basis, support_contained, CMatrix, DensityMatrix, HermitianMatrix,
    DEFAULT_TOL,
};
use crate::random::rng_from_seed;

/// Convex hull of finitely many states.
#[derive(Debug, Clone)]
pub struct ConvexStateSet {
    generators: Vec<DensityMatrix>,
}

impl ConvexStateSet {
    pub fn new(generators: Vec<DensityMatrix>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::DimMismatch("convex set needs at least one generator".into()))?;
        let d = first.dim();
        if generators.iter().any(|g| g.dim() != d) {
            return Err(Error::DimMismatch("generators differ in dimension".into()));
        }
        Ok(Self { generators })
    }

    pub fn singleton(state: DensityMatrix) -> Self {
        Self {
            generators: vec![state],
        }
    }

    pub fn generators(&self) -> &[DensityMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// `Σ wᵢ σᵢ` for weights on the simplex.
    pub fn mixture(&self, weights: &[f64]) -> Result<DensityMatrix> {
        if weights.len() != self.len() {
            return Err(Error::DimMismatch(format!(
                "{} weights for {} generators",
                weights.len(),
                self.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || !(total > 0.0) {
            return Err(Error::DimMismatch(
                "weights must be nonnegative and not all zero".into(),
            ));
        }
        let mut support = weights.iter().enumerate().filter(|(_, &w)| w > 0.0);
        if let (Some((i, _)), None) = (support.next(), support.next()) {
            return Ok(self.generators[i].clone());
        }
        let mut acc = HermitianMatrix::zeros(self.dim());
        for (w, g) in weights.iter().zip(&self.generators) {
            if *w > 0.0 {
                acc = acc.add(&g.scale(*w / total));
            }
        }
        DensityMatrix::normalized(&acc)
    }

    /// Tensor-product family member: all products `σ_{i₁} ⊗ … ⊗ σ_{iₙ}`.
    pub fn iid_products(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadCopies);
        }
        let mut gens = self.generators.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(gens.len() * self.len());
            for g in &gens {
                for h in &self.generators {
                    next.push(g.tensor(h)?);
                }
            }
            gens = next;
        }
        Self::new(gens)
    }
}

#[derive(Debug, Clone)]
pub struct CompositeOptions {
    /// Target precision on `log2 Ω`; also the feasibility threshold for `g`.
    pub tol: f64,
    pub support_tol: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub max_bisections: usize,
    pub seed: u64,
}

impl Default for CompositeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            support_tol: DEFAULT_TOL,
            restarts: 8,
            max_iter: 2000,
            max_bisections: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositeReport {
    pub omega_min: ExtendedReal,
    /// Simplex weights over the generators attaining `omega_min`.
    pub weights: Vec<f64>,
    /// Whether the bisection bracket closed to within `tol`.
    pub converged: bool,
    pub bisection_steps: usize,
}

impl CompositeReport {
    pub fn beta_at(&self, eps: f64) -> Result<f64> {
        check_epsilon(eps)?;
        Ok(beta_from_omega(eps, self.omega_min))
    }

    pub fn d_omega_min(&self) -> ExtendedReal {
        self.omega_min.log2()
    }
}

/// Whitened problem data on the support of ρ.
struct Whitened {
    /// `ρ^{-1/2}` restricted to its support, as an `r x d` map.
    map: CMatrix,
    /// Indices (into the generator list) with `supp σᵢ ⊆ supp ρ`.
    admissible: Vec<usize>,
    blocks: Vec<HermitianMatrix>,
}

impl Whitened {
    fn new(rho: &DensityMatrix, set: &ConvexStateSet, support_tol: f64) -> Result<Self> {
        let (basis, eigs) = support_basis(rho, support_tol)?;
        let mut map = basis.adjoint();
        for (i, lam) in eigs.iter().enumerate() {
            map.row_mut(i).scale_mut(lam.sqrt().recip());
        }
        let mut admissible = Vec::new();
        let mut blocks = Vec::new();
        for (i, g) in set.generators().iter().enumerate() {
            if support_contained(g, rho, support_tol)? {
                admissible.push(i);
                blocks.push(g.conjugate(&map));
            }
        }
        Ok(Self {
            map,
            admissible,
            blocks,
        })
    }

    fn rank(&self) -> usize {
        self.map.nrows()
    }

    fn combine(&self, u: &[f64]) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.rank());
        for (ui, b) in u.iter().zip(&self.blocks) {
            if *ui != 0.0 {
                acc = acc.add(&b.scale(*ui));
            }
        }
        acc
    }

    /// `(g(u), subgradient)` for level `t`.
    fn violation(&self, u: &[f64], t: f64) -> (f64, Vec<f64>) {
        let spec = herm_eig(&self.combine(u));
        let lo = spec.eigenvalues[0];
        let hi = spec.eigenvalues[spec.len() - 1];
        let lower_gap = 1.0 - lo;
        let upper_gap = hi - t;
        if lower_gap >= upper_gap {
            let v = spec.vector(0);
            let grad = self.blocks.iter().map(|b| -quad(b, &v)).collect();
            (lower_gap, grad)
        } else {
            let v = spec.vector(spec.len() - 1);
            let grad = self.blocks.iter().map(|b| quad(b, &v)).collect();
            (upper_gap, grad)
        }
    }

    /// Rescales `u` to balance the two constraints at level `t`.
    fn balance(&self, u: &mut [f64], t: f64) {
        let ev = self.combine(u).eigenvalues();
        let (a, b) = (ev[0], ev[ev.len() - 1]);
        if a + b > 0.0 {
            let s = (1.0 + t) / (a + b);
            u.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// Projected subgradient search for `u ≥ 0` with `g(u) ≤ tol`.
    fn feasible(
        &self,
        t: f64,
        warm: Option<&[f64]>,
        opts: &CompositeOptions,
        stream: u64,
    ) -> Option<Vec<f64>> {
        let k = self.blocks.len();
        let mut rng = rng_from_seed(opts.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let starts = opts.restarts.max(1);
        for attempt in 0..starts {
            let mut u: Vec<f64> = match (attempt, warm) {
                (0, Some(w)) => w.to_vec(),
                _ => dirichlet(k, &mut rng),
            };
            self.balance(&mut u, t);
            for _ in 0..opts.max_iter {
                let (g, grad) = self.violation(&u, t);
                if g <= opts.tol {
                    return Some(u);
                }
                let norm2: f64 = grad.iter().map(|x| x * x).sum();
                if !(norm2 > 0.0) {
                    break;
                }
                // Polyak step towards the level g = 0
                let step = g / norm2;
                for (ui, gi) in u.iter_mut().zip(&grad) {
                    *ui = (*ui - step * gi).max(0.0);
                }
                if u.iter().all(|&x| x == 0.0) {
                    break;
                }
                self.balance(&mut u, t);
            }
        }
        None
    }
}

impl Whitened {
    /// Condition number of `S(w)` and a normal to its sublevel set at `w`
    /// (a subgradient of `λmax - κ·λmin`, or of `-λmin` when `S(w)` is singular).
    fn level_normal(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let spec = herm_eig(&self.combine(w));
        let (lo, hi) = (spec.eigenvalues[0], spec.eigenvalues[spec.len() - 1]);
        let vmin = spec.vector(0);
        let vmax = spec.vector(spec.len() - 1);
        if lo <= hi * 1e-300 || lo <= 0.0 {
            let g = self.blocks.iter().map(|b| -quad(b, &vmin)).collect();
            return (f64::INFINITY, g);
        }
        let kappa = hi / lo;
        let g = self
            .blocks
            .iter()
            .map(|b| quad(b, &vmax) - kappa * quad(b, &vmin))
            .collect();
        (kappa, g)
    }

    /// Central-cut ellipsoid method for `min κ(S(w))` over the simplex, in
    /// the coordinates `w = (z, 1 - Σz)`.
    fn ellipsoid_min(&self, max_iter: usize) -> (f64, Vec<f64>) {
        let k = self.blocks.len();
        let m = k - 1;
        let to_w = |z: &[f64]| -> Vec<f64> {
            let mut w = z.to_vec();
            w.push(1.0 - z.iter().sum::<f64>());
            w
        };
        let mut z = vec![1.0 / k as f64; m];
        let mut shape = nalgebra::DMatrix::<f64>::identity(m, m);
        let mut best = (f64::INFINITY, to_w(&z));
        for _ in 0..max_iter {
            let total: f64 = z.iter().sum();
            let a: Vec<f64> = if let Some(i) = z.iter().position(|&x| x < 0.0) {
                (0..m).map(|j| if j == i { -1.0 } else { 0.0 }).collect()
            } else if total > 1.0 {
                vec![1.0; m]
            } else {
                let w = to_w(&z);
                let (kappa, g) = self.level_normal(&w);
                if kappa < best.0 {
                    best = (kappa, w);
                }
                (0..m).map(|j| g[j] - g[m]).collect()
            };
            let a = nalgebra::DVector::from_vec(a);
            let pa = &shape * &a;
            let width2 = a.dot(&pa);
            if !(width2 > 1e-30) {
                break;
            }
            let step = pa / width2.sqrt();
            let mf = m as f64;
            if m == 1 {
                z[0] -= 0.5 * step[0];
                shape *= 0.25;
            } else {
                for j in 0..m {
                    z[j] -= step[j] / (mf + 1.0);
                }
                shape = (shape - (&step * step.transpose()) * (2.0 / (mf + 1.0)))
                    * (mf * mf / (mf * mf - 1.0));
            }
        }
        best
    }
}

fn quad(b: &HermitianMatrix, v: &crate::linalg::CVector) -> f64 {
    (v.adjoint() * b.matrix() * v)[(0, 0)].re
}

fn dirichlet<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn normalize(u: &[f64]) -> Vec<f64> {
    let s: f64 = u.iter().sum();
    u.iter().map(|x| x / s).collect()
}

/// `min_{σ ∈ conv F} Ω(ρ‖σ)` with attaining weights.
pub fn omega_min(
    rho: &DensityMatrix,
    set: &ConvexStateSet,
    opts: &CompositeOptions,
) -> Result<CompositeReport> {
    if rho.dim() != set.dim() {
        return Err(Error::DimMismatch(format!(
            "state {} vs set {}",
            rho.dim(),
            set.dim()
        )));
    }
    let wh = Whitened::new(rho, set, opts.support_tol)?;
    if wh.admissible.is_empty() {
        return Err(Error::NoFiniteValue);
    }
    let full_weights = |local: &[f64]| -> Vec<f64> {
        let mut w = vec![0.0; set.len()];
        for (&i, &x) in wh.admissible.iter().zip(local) {
            w[i] = x;
        }
        normalize(&w)
    };
    let evaluate = |local: &[f64]| -> Result<(ExtendedReal, Vec<f64>)> {
        let w = full_weights(local);
        let sigma = set.mixture(&w)?;
        Ok((omega_tol(rho, &sigma, opts.support_tol)?, w))
    };

    // Upper bracket: best admissible generator, or the admissible centroid,
    // which has the largest support inside supp ρ.
    let k = wh.admissible.len();
    let mut best = ExtendedReal::Infinite;
    let mut best_local = vec![1.0 / k as f64; k];
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let (v, _) = evaluate(&e)?;
        if v < best {
            best = v;
            best_local = e;
        }
    }
    let centroid = vec![1.0 / k as f64; k];
    let (vc, _) = evaluate(&centroid)?;
    if vc < best {
        best = vc;
        best_local = centroid;
    }
    let Some(upper) = best.finite() else {
        return Err(Error::NoFiniteValue);
    };

    let mut lo = 0.0f64;
    let mut hi = upper.max(1.0).log2();
    let mut steps = 0;
    if k > 1 {
        while hi - lo > opts.tol && steps < opts.max_bisections {
            let mid = 0.5 * (lo + hi);
            let t = mid.exp2();
            let warm: Vec<f64> = best_local.clone();
            match wh.feasible(t, Some(&warm), opts, steps as u64 + 1) {
                Some(u) => {
                    let local = normalize(&u);
                    let (v, _) = evaluate(&local)?;
                    if v < best {
                        best = v;
                        best_local = local;
                    }
                    hi = mid.min(best.to_f64().log2());
                }
                None => lo = mid,
            }
            steps += 1;
        }
        // Refine directly on the quasiconvex objective; also covers level
        // tests that the subgradient search failed to certify.
        let (kappa, local) = wh.ellipsoid_min(opts.max_iter);
        if kappa.is_finite() {
            let (v, _) = evaluate(&local)?;
            if v < best {
                best = v;
                best_local = local;
            }
            hi = hi.min(best.to_f64().log2());
            lo = lo.min(hi);
        }
    } else {
        lo = hi;
    }
    let weights = full_weights(&best_local);
    Ok(CompositeReport {
        omega_min: best,
        weights,
        converged: hi - lo <= opts.tol,
        bisection_steps: steps,
    })
}

/// Whether the level set `{Ω ≤ t}` meets the hull, with a witness mixture.
pub fn level_set_feasible(
    rho: &DensityMatrix,
    set: &ConvexStateSet,
    t: f64,
    opts: &CompositeOptions,
) -> Result<Option<Vec<f64>>> {
    let wh = Whitened::new(rho, set, opts.support_tol)?;
    if wh.admissible.is_empty() {
        return Ok(None);
    }
    Ok(wh.feasible(t, None, opts, 0).map(|u| {
        let mut w = vec![0.0; set.len()];
        for (&i, &x) in wh.admissible.iter().zip(&u) {
            w[i] = x;
        }
        normalize(&w)
    }))
}

/// `β̄_{ε,F}(ρ) = (ε/(1-ε)·min Ω + 1)^{-1}`; zero when no alternative has
/// the support of ρ.
pub fn composite_beta(rho: &DensityMatrix, set: &ConvexStateSet, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    match omega_min(rho, set, &CompositeOptions::default()) {
        Ok(r) => r.beta_at(eps),
        Err(Error::NoFiniteValue) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// `(n, (1/n)·log2 min_{σ ∈ Fₙ} Ω(ρ⊗ⁿ‖σ))` for `n = 1..=n_max`.
pub fn regularized_exponent_estimate<F>(
    rho: &DensityMatrix,
    family: F,
    n_max: usize,
    opts: &CompositeOptions,
) -> Result<Vec<(usize, ExtendedReal)>>
where
    F: Fn(usize) -> Result<ConvexStateSet>,
{
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let rho_n = rho.tensor_power(n)?;
        let set = family(n)?;
        let value = match omega_min(&rho_n, &set, opts) {
            Ok(r) => r.d_omega_min().map(|d| d / n as f64),
            Err(Error::NoFiniteValue) => ExtendedReal::Infinite,
            Err(e) => return Err(e),
        };
        out.push((n, value));
    }
    Ok(out)
}

/// Exhaustive search over a regular grid on the simplex (at most three
/// generators). Slow; used as an independent check.
pub fn grid_omega_min(
    rho: &DensityMatrix,
    set: &ConvexStateSet,
    step: f64,
) -> Result<(ExtendedReal, Vec<f64>)> {
    let k = set.len();
    if k > 3 {
        return Err(Error::UnsupportedVariant(
            "grid search supports at most three generators",
        ));
    }
    let m = (1.0 / step).round() as usize;
    let mut best = (ExtendedReal::Infinite, vec![0.0; k]);
    let mut consider = |w: Vec<f64>| -> Result<()> {
        let v = omega_tol(rho, set.mixture(&w)?.as_hermitian(), DEFAULT_TOL)?;
        if v < best.0 {
            best = (v, w);
        }
        Ok(())
    };
    match k {
        1 => consider(vec![1.0])?,
        2 => {
            for i in 0..=m {
                let a = i as f64 / m as f64;
                consider(vec![a, 1.0 - a])?;
            }
        }
        _ => {
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let a = i as f64 / m as f64;
                    let b = j as f64 / m as f64;
                    consider(vec![a, b, (1.0 - a - b).max(0.0)])?;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::omega;
    use crate::linalg::{basis_vector, c, CVector};
    use crate::random::{random_full_rank_density, rng_from_seed};

    fn ket(i: usize) -> DensityMatrix {
        DensityMatrix::pure(&basis_vector(2, i)).unwrap()
    }

    #[test]
    fn member_gives_one() {
        let rho = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let set =
            ConvexStateSet::new(vec![DensityMatrix::maximally_mixed(2), rho.clone()]).unwrap();
        let r = omega_min(&rho, &set, &CompositeOptions::default()).unwrap();
        assert_eq!(r.omega_min, ExtendedReal::ONE);
        assert!((composite_beta(&rho, &set, 0.3).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn singleton_reduces_to_pair() {
        let rho = DensityMatrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let set = ConvexStateSet::singleton(DensityMatrix::maximally_mixed(2));
        let r = omega_min(&rho, &set, &CompositeOptions::default()).unwrap();
        assert!((r.omega_min.to_f64() - 2.0).abs() < 1e-12);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn segment_example_attains_at_mixed_endpoint() {
        let rho = DensityMatrix::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let set = ConvexStateSet::new(vec![ket(0), DensityMatrix::maximally_mixed(2)]).unwrap();
        let r = omega_min(&rho, &set, &CompositeOptions::default()).unwrap();
        assert!((r.omega_min.to_f64() - 2.0).abs() < 1e-9);
        assert!(r.weights[0] < 1e-6 && (r.weights[1] - 1.0).abs() < 1e-6);
        let (g, _) = grid_omega_min(&rho, &set, 1e-4).unwrap();
        assert!((g.to_f64() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_set_cannot_match_off_diagonal_pure_state() {
        let r = 2f64.sqrt().recip();
        let plus = DensityMatrix::pure(&CVector::from_vec(vec![c(r, 0.0), c(r, 0.0)])).unwrap();
        let set = ConvexStateSet::new(vec![ket(0), ket(1)]).unwrap();
        assert_eq!(
            omega_min(&plus, &set, &CompositeOptions::default()).unwrap_err(),
            Error::NoFiniteValue
        );
        assert_eq!(composite_beta(&plus, &set, 0.4).unwrap(), 0.0);
        let (g, _) = grid_omega_min(&plus, &set, 1e-2).unwrap();
        assert_eq!(g, ExtendedReal::Infinite);
    }

    #[test]
    fn mixing_rank_deficient_generators_can_be_finite() {
        // neither pure generator has the support of I/2, but their mixture does
        let rho = DensityMatrix::maximally_mixed(2);
        let set = ConvexStateSet::new(vec![ket(0), ket(1)]).unwrap();
        let r = omega_min(&rho, &set, &CompositeOptions::default()).unwrap();
        assert!((r.omega_min.to_f64() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn two_generators_agree_with_grid() {
        let mut rng = rng_from_seed(21);
        for _ in 0..5 {
            let rho = random_full_rank_density(3, &mut rng);
            let set = ConvexStateSet::new(vec![
                random_full_rank_density(3, &mut rng),
                random_full_rank_density(3, &mut rng),
            ])
            .unwrap();
            let r = omega_min(&rho, &set, &CompositeOptions::default()).unwrap();
            let (g, _) = grid_omega_min(&rho, &set, 1e-3).unwrap();
            let rel = (r.omega_min.to_f64() - g.to_f64()).abs() / g.to_f64();
            assert!(rel < 1e-3, "solver {} grid {}", r.omega_min, g);
            assert!(r.omega_min.to_f64() <= g.to_f64() * (1.0 + 1e-9));
            let at_weights = omega(&rho, &set.mixture(&r.weights).unwrap()).unwrap();
            assert!((at_weights.to_f64() - r.omega_min.to_f64()).abs() <= 1e-6);
        }
    }

    #[test]
    fn iid_products_family() {
        let set = ConvexStateSet::new(vec![ket(0), DensityMatrix::maximally_mixed(2)]).unwrap();
        let sq = set.iid_products(2).unwrap();
        assert_eq!(sq.len(), 4);
        assert_eq!(sq.dim(), 4);
    }

    #[test]
    fn regularized_sequence_for_fixed_product() {
        let rho = DensityMatrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let seq = regularized_exponent_estimate(
            &rho,
            |n| Ok(ConvexStateSet::singleton(sigma.tensor_power(n)?)),
            3,
            &CompositeOptions::default(),
        )
        .unwrap();
        for (_, v) in seq {
            assert!((v.to_f64() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dim_mismatch() {
        let rho = DensityMatrix::maximally_mixed(3);
        let set = ConvexStateSet::singleton(DensityMatrix::maximally_mixed(2));
        assert!(matches!(
            omega_min(&rho, &set, &CompositeOptions::default()),
            Err(Error::DimMismatch(_))
        ));
        assert!(ConvexStateSet::new(vec![]).is_err());
    }
}
