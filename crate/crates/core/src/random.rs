//! Seeded random instances: states, unitaries, channels.
//!
//! All samplers take an explicit RNG so callers control reproducibility.

use nalgebra::QR;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::QuantumChannel;
use crate::linalg::{c, CMatrix, DensityMatrix, HermitianMatrix};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    random_isometry(dim, dim, rng)
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random Hermitian matrix (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::hermitian_part(&ginibre(dim, dim, rng))
}

/// Random PSD operator `A†A` of the requested rank (unnormalized).
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
    let a = ginibre(rank, dim, rng);
    HermitianMatrix::hermitian_part(&(a.adjoint() * a))
}

/// Induced-measure random state of the given rank.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::normalized(&random_psd(dim, rank.clamp(1, dim), rng)).expect("nonzero")
}

pub fn random_full_rank_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    random_density(dim, dim, rng)
}

pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    random_density(dim, 1, rng)
}

/// Random diagonal (classical) state with entries bounded away from zero.
pub fn random_diagonal_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let w: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    DensityMatrix::from_diagonal(&w.iter().map(|x| x / s).collect::<Vec<_>>()).expect("valid")
}

/// Two random states sharing a common support of dimension `rank` inside a
/// `dim`-dimensional space.
pub fn random_equal_support_pair<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> (DensityMatrix, DensityMatrix) {
    let rank = rank.clamp(1, dim);
    let iso = random_isometry(dim, rank, rng);
    // normalize before embedding so rank-one pairs come out bit-identical
    let block = |rng: &mut R| {
        let m = random_psd(rank, rank, rng);
        m.scale(1.0 / m.trace()).conjugate(&iso)
    };
    let a = block(rng);
    let b = block(rng);
    (
        DensityMatrix::normalized(&a).expect("nonzero"),
        DensityMatrix::normalized(&b).expect("nonzero"),
    )
}

/// Random CPTP map via a Stinespring isometry.
pub fn random_channel<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    rng: &mut R,
) -> QuantumChannel {
    let n_kraus = n_kraus.max(1);
    let rows = dim_out * n_kraus;
    let v = if rows >= dim_in {
        random_isometry(rows, dim_in, rng)
    } else {
        // Too few Kraus operators to be trace preserving; bump the count.
        return random_channel(dim_in, dim_out, dim_in.div_ceil(dim_out), rng);
    };
    let kraus = (0..n_kraus)
        .map(|k| v.rows(k * dim_out, dim_out).into_owned())
        .collect();
    QuantumChannel::from_kraus(kraus).expect("isometry yields a valid channel")
}
