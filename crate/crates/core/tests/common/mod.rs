//! Independent oracles: plain dense arithmetic on the blocks, with nalgebra's
//! SVD standing in for the library's Jacobi solver.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use ncerg_core::ds::{DsOperator, Recipe};
use ncerg_core::OperatorElement;

pub type Blocks = Vec<DMatrix<Complex64>>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Mixture terms `(p_i, u_i)` of a mixed-unitary (or unitary) operator.
pub fn mixture(op: &DsOperator) -> Vec<(f64, Blocks)> {
    match op.recipe() {
        Recipe::MixedUnitary { terms } => terms.iter().map(|(p, u)| (*p, u.blocks().to_vec())).collect(),
        Recipe::UnitaryConjugation { u } => vec![(1.0, u.blocks().to_vec())],
        other => panic!("oracle handles unitary mixtures only, got {other:?}"),
    }
}

/// `Σ p_i u_i x u_i*`, block by block.
pub fn apply(terms: &[(f64, Blocks)], x: &Blocks) -> Blocks {
    x.iter()
        .enumerate()
        .map(|(b, xb)| {
            let mut acc = DMatrix::zeros(xb.nrows(), xb.ncols());
            for (p, u) in terms {
                acc += (&u[b] * xb * u[b].adjoint()) * c(*p);
            }
            acc
        })
        .collect()
}

/// `T^k(x)` by `k` fresh applications.
pub fn power(terms: &[(f64, Blocks)], x: &Blocks, k: u64) -> Blocks {
    let mut y = x.clone();
    for _ in 0..k {
        y = apply(terms, &y);
    }
    y
}

/// `(1/n) Σ_{j<n} β(k_j) T^{k_j}(x)` from plain block products; `ks` must be
/// increasing.
pub fn naive_average(terms: &[(f64, Blocks)], x: &Blocks, ks: &[u64], beta: impl Fn(u64) -> Complex64) -> Blocks {
    let n = ks.len() as f64;
    let mut acc: Blocks = x.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect();
    let mut p = x.clone();
    let mut at = 0;
    for &k in ks {
        assert!(k >= at, "terms must increase");
        p = power(terms, &p, k - at);
        at = k;
        for (a, pb) in acc.iter_mut().zip(&p) {
            *a += pb * beta(k);
        }
    }
    acc.iter().map(|a| a / c(n)).collect()
}

/// Operator norm: largest singular value over the blocks.
pub fn op_norm(x: &Blocks) -> f64 {
    x.iter()
        .map(|b| b.clone().singular_values().iter().cloned().fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// `Σ_b w_b Σ σ^p`, raised to `1/p`.
pub fn schatten(x: &Blocks, weights: &[f64], p: f64) -> f64 {
    x.iter()
        .zip(weights)
        .map(|(b, w)| w * b.clone().singular_values().iter().map(|s| s.powf(p)).sum::<f64>())
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn diff_norm(a: &Blocks, b: &Blocks) -> f64 {
    op_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect())
}

pub fn blocks_of(x: &OperatorElement) -> Blocks {
    x.blocks().to_vec()
}

/// `min over diagonal projections e with Σ_{i ∉ e} w_i ≤ ε of max_{i ∈ e} b_i`,
/// by enumerating every subset.
pub fn brute_force_cut(b: &[f64], w: &[f64], eps: f64) -> f64 {
    let d = b.len();
    assert!(d <= 20);
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << d) {
        let removed: f64 = (0..d).filter(|i| mask & (1 << i) == 0).map(|i| w[i]).sum();
        if removed > eps {
            continue;
        }
        let kept = (0..d).filter(|i| mask & (1 << i) != 0).map(|i| b[i]).fold(0.0, f64::max);
        best = best.min(kept);
    }
    best
}

pub fn is_square(k: u64) -> bool {
    let r = (k as f64).sqrt().round() as u64;
    r * r == k
}

/// `{k : k ∉ {0, 1, 4, 9, ...}}` by trial.
pub fn non_squares(n: usize) -> Vec<u64> {
    (0u64..).filter(|&k| !is_square(k)).take(n).collect()
}

/// Terms of `∪_m [m², m² + m]` with the interval index of each, by trial.
pub fn square_blocks(n: usize) -> (Vec<u64>, Vec<usize>) {
    let mut k = Vec::with_capacity(n);
    let mut idx = Vec::with_capacity(n);
    let mut m = 0u64;
    while k.len() < n {
        for t in m * m..=m * m + m {
            if k.len() < n {
                k.push(t);
                idx.push(m as usize);
            }
        }
        m += 1;
    }
    (k, idx)
}

/// Return times of `ω ↦ ω + α mod 1` to `[u, v)`, in floating point.
pub fn return_times(alpha: f64, (u, v): (f64, f64), omega0: f64, n: usize) -> Vec<u64> {
    (0u64..)
        .filter(|&j| {
            let p = (omega0 + j as f64 * alpha).rem_euclid(1.0);
            u <= p && p < v
        })
        .take(n)
        .collect()
}
