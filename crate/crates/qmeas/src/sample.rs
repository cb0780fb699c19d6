//! Seeded random states, observables and measures for sweeps and tests.
//!
//! Everything here is driven by an explicit RNG so sweeps are reproducible;
//! callers record the seed alongside the results.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::ComplexMatrix;
use crate::spin::BlochState;
use crate::state::{DensityMatrix, Observable, Pvm};

/// The deterministic RNG used throughout; one seed, one stream.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random matrix with entries uniform in the complex unit square.
pub fn random_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| random_complex(rng))
}

/// Random hermitian matrix `(G + G^H)/2`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = random_matrix(dim, rng);
    g.add(&g.adjoint()).scale(0.5)
}

/// Random full-rank density matrix `G G^H / tr`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = random_matrix(dim, rng);
    let w = g.mul(&g.adjoint());
    let tr = w.trace().re;
    DensityMatrix::new(w.scale(1.0 / tr)).expect("wishart construction is a valid state")
}

/// Random rank-`r` density matrix supported on a random subspace.
pub fn random_density_of_rank(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    assert!(rank >= 1 && rank <= dim);
    let eig = random_hermitian(dim, rng).hermitian_eigen();
    let mut mat = ComplexMatrix::zeros(dim);
    let mut weights = Vec::with_capacity(rank);
    let mut total = 0.0;
    for _ in 0..rank {
        let w: f64 = rng.gen_range(0.1..1.0);
        weights.push(w);
        total += w;
    }
    for (k, w) in weights.iter().enumerate() {
        mat = mat.add(&eig.projector(k).scale(w / total));
    }
    DensityMatrix::new(mat).expect("spectral construction is a valid state")
}

/// Random PVM with `outcomes` eigenspaces on dimension `dim`, eigenvalues
/// sorted and pairwise separated by at least ~0.1.
pub fn random_pvm(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Pvm {
    assert!(outcomes >= 1 && outcomes <= dim);
    let eig = random_hermitian(dim, rng).hermitian_eigen();
    // Split the eigenvector columns into `outcomes` contiguous groups with at
    // least one vector each.
    let mut cuts: Vec<usize> = (1..dim).collect();
    for i in (1..cuts.len()).rev() {
        cuts.swap(i, rng.gen_range(0..=i));
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(outcomes - 1).collect();
    cuts.sort_unstable();
    cuts.push(dim);
    let mut projectors = Vec::with_capacity(outcomes);
    let mut start = 0;
    for &end in &cuts {
        let mut p = ComplexMatrix::zeros(dim);
        for k in start..end {
            p = p.add(&eig.projector(k));
        }
        projectors.push(p);
        start = end;
    }
    let mut eigenvalues = Vec::with_capacity(outcomes);
    let mut lambda: f64 = rng.gen_range(-1.0..0.0);
    for _ in 0..outcomes {
        eigenvalues.push(lambda);
        lambda += rng.gen_range(0.1..1.0);
    }
    Pvm::new(projectors, eigenvalues).expect("grouped eigenprojectors form a valid measure")
}

/// Bloch vector uniform in the unit ball.
pub fn random_bloch(rng: &mut impl Rng) -> BlochState {
    let dir = random_unit_direction(rng);
    let r = rng.gen_range(0.0f64..1.0).cbrt();
    BlochState::new([r * dir[0], r * dir[1], r * dir[2]]).expect("sampled inside the ball")
}

/// Uniformly random direction on the unit sphere.
pub fn random_unit_direction(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0f64..1.0),
            rng.gen_range(-1.0f64..1.0),
            rng.gen_range(-1.0f64..1.0),
        ];
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random observable wrapper around [`random_hermitian`].
pub fn random_observable(dim: usize, rng: &mut impl Rng) -> Observable {
    Observable::new(random_hermitian(dim, rng)).expect("hermitian by construction")
}
