//! Seeded samplers for algebra elements. Every random quantity in the crate
//! flows through a [`ChaCha8Rng`] built from an explicit seed.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraSpec, OperatorElement};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre_matrix(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// I.i.d. standard complex Gaussian entries in every block.
pub fn ginibre(algebra: &Arc<AlgebraSpec>, rng: &mut impl Rng) -> OperatorElement {
    let blocks = algebra.blocks().iter().map(|b| ginibre_matrix(b.dim, rng)).collect();
    OperatorElement::from_blocks(algebra, blocks).expect("shapes match the algebra")
}

/// `g*g` for Ginibre `g`.
pub fn positive(algebra: &Arc<AlgebraSpec>, rng: &mut impl Rng) -> OperatorElement {
    let g = ginibre(algebra, rng);
    &g.adjoint() * &g
}

/// `(g + g*)/2` for Ginibre `g`.
pub fn self_adjoint(algebra: &Arc<AlgebraSpec>, rng: &mut impl Rng) -> OperatorElement {
    ginibre(algebra, rng).real_part()
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn haar_unitary_matrix(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let qr = ginibre_matrix(dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(algebra: &Arc<AlgebraSpec>, rng: &mut impl Rng) -> OperatorElement {
    let blocks = algebra
        .blocks()
        .iter()
        .map(|b| haar_unitary_matrix(b.dim, rng))
        .collect();
    OperatorElement::from_blocks(algebra, blocks).expect("shapes match the algebra")
}

/// A random algebra with `blocks` blocks of dimension `1..=max_dim` and trace
/// weights in `[0.25, 2)`.
pub fn algebra(blocks: usize, max_dim: usize, rng: &mut impl Rng) -> AlgebraSpec {
    let blocks = (0..blocks.max(1))
        .map(|_| crate::algebra::Block {
            dim: rng.random_range(1..=max_dim.max(1)),
            weight: rng.random_range(0.25..2.0),
        })
        .collect();
    AlgebraSpec::new(blocks).expect("positive dims and weights")
}
