//! Finite-dimensional model of a von Neumann algebra with a faithful trace:
//! a direct sum of full matrix algebras `M_{d_1} ⊕ ... ⊕ M_{d_r}` with
//! `τ(x) = Σ_i t_i Tr(x_i)` for strictly positive weights `t_i`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigen, HermitianEigen};
use crate::error::{invalid, Error, Result};

/// `‖x − x*‖_∞ ≤ SELF_ADJOINT_TOL · (1 + ‖x‖_∞)` counts as self-adjoint.
pub const SELF_ADJOINT_TOL: f64 = 1e-8;
/// Absolute slack added to both ends of a spectral window.
pub const SPECTRAL_SLACK: f64 = 1e-9;
/// `e = e* = e²` is checked to this tolerance.
pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraSpecRaw {
    blocks: Vec<Block>,
}

/// Block structure and trace weights; fixes `τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraSpecRaw")]
pub struct AlgebraSpec {
    blocks: Vec<Block>,
}

impl TryFrom<AlgebraSpecRaw> for AlgebraSpec {
    type Error = Error;

    fn try_from(raw: AlgebraSpecRaw) -> Result<Self> {
        AlgebraSpec::new(raw.blocks)
    }
}

impl AlgebraSpec {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("algebra needs at least one block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::InvalidAlgebra(format!("block {i} has dimension 0")));
            }
            if !(b.weight.is_finite() && b.weight > 0.0) {
                return Err(Error::InvalidAlgebra(format!(
                    "block {i} has non-positive trace weight {}",
                    b.weight
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// `M_d` with the standard trace.
    pub fn full(dim: usize) -> Result<Self> {
        Self::new(vec![Block { dim, weight: 1.0 }])
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Real dimension count of the algebra as a vector space over ℂ.
    pub fn vector_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// `τ(1) = Σ t_i d_i`.
    pub fn tau_one(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.dim as f64).sum()
    }

    /// Start offset of every block in the total basis.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.dim;
        }
        off
    }

    /// Maps a total-basis index to `(block, local index)`.
    pub fn locate(&self, index: usize) -> Option<(usize, usize)> {
        let mut acc = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            if index < acc + b.dim {
                return Some((i, index - acc));
            }
            acc += b.dim;
        }
        None
    }
}

/// Serialized element: per block, row-major interleaved `re, im` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementData {
    pub blocks: Vec<Vec<f64>>,
}

/// An element of the algebra.
#[derive(Clone, Debug)]
pub struct OperatorElement {
    algebra: Arc<AlgebraSpec>,
    blocks: Vec<DMatrix<Complex64>>,
}

impl OperatorElement {
    pub fn zeros(algebra: &Arc<AlgebraSpec>) -> Self {
        let blocks = algebra
            .blocks()
            .iter()
            .map(|b| DMatrix::zeros(b.dim, b.dim))
            .collect();
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn identity(algebra: &Arc<AlgebraSpec>) -> Self {
        let blocks = algebra
            .blocks()
            .iter()
            .map(|b| DMatrix::identity(b.dim, b.dim))
            .collect();
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn from_blocks(algebra: &Arc<AlgebraSpec>, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::InvalidParameter {
                name: "blocks",
                reason: format!(
                    "expected {} blocks, got {}",
                    algebra.num_blocks(),
                    blocks.len()
                ),
            });
        }
        for (i, (m, b)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::BlockShape {
                    block: i,
                    expected: b.dim,
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    /// Diagonal element from one real entry per total-basis index.
    pub fn from_diagonal(algebra: &Arc<AlgebraSpec>, diag: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = diag.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        Self::from_complex_diagonal(algebra, &c)
    }

    pub fn from_complex_diagonal(algebra: &Arc<AlgebraSpec>, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != algebra.total_dim() {
            return Err(invalid(
                "diagonal",
                format!("expected {} entries, got {}", algebra.total_dim(), diag.len()),
            ));
        }
        let mut x = Self::zeros(algebra);
        let mut idx = 0;
        for m in &mut x.blocks {
            for i in 0..m.nrows() {
                m[(i, i)] = diag[idx];
                idx += 1;
            }
        }
        Ok(x)
    }

    pub fn from_data(algebra: &Arc<AlgebraSpec>, data: &ElementData) -> Result<Self> {
        if data.blocks.len() != algebra.num_blocks() {
            return Err(invalid(
                "blocks",
                format!("expected {} blocks, got {}", algebra.num_blocks(), data.blocks.len()),
            ));
        }
        let mut blocks = Vec::with_capacity(data.blocks.len());
        for (i, (raw, b)) in data.blocks.iter().zip(algebra.blocks()).enumerate() {
            if raw.len() != 2 * b.dim * b.dim {
                return Err(invalid(
                    "blocks",
                    format!(
                        "block {i} needs {} numbers (interleaved re/im), got {}",
                        2 * b.dim * b.dim,
                        raw.len()
                    ),
                ));
            }
            let entries: Vec<Complex64> = raw
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect();
            blocks.push(DMatrix::from_row_slice(b.dim, b.dim, &entries));
        }
        Self::from_blocks(algebra, blocks)
    }

    pub fn to_data(&self) -> ElementData {
        let blocks = self
            .blocks
            .iter()
            .map(|m| {
                let mut out = Vec::with_capacity(2 * m.len());
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        out.push(m[(i, j)].re);
                        out.push(m[(i, j)].im);
                    }
                }
                out
            })
            .collect();
        ElementData { blocks }
    }

    pub fn algebra(&self) -> &Arc<AlgebraSpec> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [DMatrix<Complex64>] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<DMatrix<Complex64>> {
        self.blocks
    }

    pub fn in_algebra(&self, algebra: &AlgebraSpec) -> bool {
        std::ptr::eq(self.algebra.as_ref(), algebra) || *self.algebra == *algebra
    }

    pub fn same_algebra(&self, other: &OperatorElement) -> bool {
        self.in_algebra(&other.algebra)
    }

    pub fn check_algebra(&self, algebra: &AlgebraSpec) -> Result<()> {
        if self.in_algebra(algebra) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn map_blocks(&self, mut f: impl FnMut(usize, &DMatrix<Complex64>) -> DMatrix<Complex64>) -> Self {
        let blocks = self.blocks.iter().enumerate().map(|(i, m)| f(i, m)).collect();
        Self {
            algebra: self.algebra.clone(),
            blocks,
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|_, m| m.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_blocks(|_, m| m * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: Complex64, other: &OperatorElement) {
        assert!(self.same_algebra(other), "algebra mismatch in axpy");
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.zip_apply(b, |x, y| *x += s * y);
        }
    }

    /// `τ(x) = Σ t_i Tr(x_i)`.
    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    /// `(x + x*) / 2`.
    pub fn real_part(&self) -> Self {
        self.map_blocks(|_, m| (m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `(x − x*) / 2i`.
    pub fn imag_part(&self) -> Self {
        self.map_blocks(|_, m| (m - m.adjoint()) * Complex64::new(0.0, -0.5))
    }

    /// Unweighted Frobenius norm over all blocks.
    pub fn frobenius(&self) -> f64 {
        self.blocks.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// Per-block eigendecomposition of the Hermitian part.
    fn hermitian_blocks_eigen(&self) -> Result<Vec<HermitianEigen>> {
        self.blocks.iter().map(hermitian_eigen).collect()
    }

    /// Singular values of each block, ascending.
    pub fn singular_values(&self) -> Result<Vec<Vec<f64>>> {
        self.blocks
            .iter()
            .map(|m| {
                let gram = m.adjoint() * m;
                let e = hermitian_eigen(&gram)?;
                Ok(e.values.iter().map(|&l| l.max(0.0).sqrt()).collect())
            })
            .collect()
    }

    /// Operator norm `‖x‖_∞`, the largest singular value.
    pub fn op_norm(&self) -> Result<f64> {
        let sv = self.singular_values()?;
        Ok(sv
            .iter()
            .flat_map(|b| b.last().copied())
            .fold(0.0, f64::max))
    }

    /// `‖x‖_p = τ(|x|^p)^{1/p}`; `p = ∞` gives the operator norm, where the
    /// trace weights play no role.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(invalid("p", format!("Schatten exponent must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return self.op_norm();
        }
        let sv = self.singular_values()?;
        let mut acc = 0.0;
        for (vals, b) in sv.iter().zip(self.algebra.blocks()) {
            acc += b.weight * vals.iter().map(|s| s.powf(p)).sum::<f64>();
        }
        Ok(acc.powf(1.0 / p))
    }

    /// `‖x − x*‖_∞`.
    pub fn self_adjoint_deviation(&self) -> Result<f64> {
        (self - &self.adjoint()).op_norm()
    }

    pub fn is_self_adjoint(&self) -> Result<bool> {
        Ok(self.self_adjoint_deviation()? <= SELF_ADJOINT_TOL * (1.0 + self.op_norm()?))
    }

    /// Validates self-adjointness and returns `(x + x*)/2`.
    pub fn symmetrized(&self) -> Result<Self> {
        let deviation = self.self_adjoint_deviation()?;
        if deviation > SELF_ADJOINT_TOL * (1.0 + self.op_norm()?) {
            return Err(Error::NotSelfAdjoint { deviation });
        }
        Ok(self.real_part())
    }

    /// Spectral decomposition of a self-adjoint element, one eigensystem per block.
    pub fn spectral_decomposition(&self) -> Result<Spectrum> {
        let a = self.symmetrized()?;
        Ok(Spectrum {
            algebra: self.algebra.clone(),
            blocks: a.hermitian_blocks_eigen()?,
        })
    }

    /// `|x| = (x*x)^{1/2}`.
    pub fn abs(&self) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|m| {
                let e = hermitian_eigen(&(m.adjoint() * m))?;
                Ok(e.reconstruct_with(|l| l.max(0.0).sqrt()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks,
        })
    }

    /// Spectral projection of a self-adjoint element on the closed window
    /// `[lo, hi]`, widened by [`SPECTRAL_SLACK`] on both sides.
    pub fn spectral_projection(&self, lo: f64, hi: f64) -> Result<Projection> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(invalid("interval", format!("[{lo}, {hi}] is not an interval")));
        }
        Ok(self.spectral_decomposition()?.projection(lo, hi))
    }

    /// Largest entrywise deviation from `other` in operator norm.
    pub fn distance(&self, other: &OperatorElement) -> Result<f64> {
        (self - other).op_norm()
    }
}

/// Eigensystems of a self-adjoint element, block by block.
#[derive(Clone, Debug)]
pub struct Spectrum {
    algebra: Arc<AlgebraSpec>,
    blocks: Vec<HermitianEigen>,
}

impl Spectrum {
    pub fn blocks(&self) -> &[HermitianEigen] {
        &self.blocks
    }

    /// `(eigenvalue, trace weight)` pairs over the whole algebra.
    pub fn weighted_eigenvalues(&self) -> Vec<(f64, f64)> {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .flat_map(|(e, b)| e.values.iter().map(move |&l| (l, b.weight)))
            .collect()
    }

    pub fn projection(&self, lo: f64, hi: f64) -> Projection {
        let lo = lo - SPECTRAL_SLACK;
        let hi = hi + SPECTRAL_SLACK;
        let mut ranks = Vec::with_capacity(self.blocks.len());
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for e in &self.blocks {
            let (p, r) = e.projector(|l| l >= lo && l <= hi);
            blocks.push(p);
            ranks.push(r);
        }
        Projection {
            element: OperatorElement {
                algebra: self.algebra.clone(),
                blocks,
            },
            ranks,
        }
    }

    /// `Σ λ_i e_i` rebuilt from the eigensystems.
    pub fn reconstruct(&self) -> OperatorElement {
        OperatorElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(|e| e.reconstruct_with(|l| l)).collect(),
        }
    }
}

/// A projection `e = e* = e²` together with its rank in every block, so that
/// `τ(e)` is computed exactly from the weights.
#[derive(Clone, Debug)]
pub struct Projection {
    element: OperatorElement,
    ranks: Vec<usize>,
}

impl Projection {
    pub fn identity(algebra: &Arc<AlgebraSpec>) -> Self {
        Self {
            element: OperatorElement::identity(algebra),
            ranks: algebra.blocks().iter().map(|b| b.dim).collect(),
        }
    }

    pub fn zero(algebra: &Arc<AlgebraSpec>) -> Self {
        Self {
            element: OperatorElement::zeros(algebra),
            ranks: vec![0; algebra.num_blocks()],
        }
    }

    /// Validates `e = e* = e²` to [`PROJECTION_TOL`].
    pub fn from_element(e: OperatorElement) -> Result<Self> {
        let adj = e.self_adjoint_deviation()?;
        let idem = (&(&e * &e) - &e).op_norm()?;
        let deviation = adj.max(idem);
        if deviation > PROJECTION_TOL {
            return Err(Error::NotProjection { deviation });
        }
        let ranks = e
            .blocks()
            .iter()
            .map(|m| m.trace().re.round().max(0.0) as usize)
            .collect();
        Ok(Self { element: e, ranks })
    }

    pub fn element(&self) -> &OperatorElement {
        &self.element
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `τ(e)`.
    pub fn trace(&self) -> f64 {
        self.ranks
            .iter()
            .zip(self.element.algebra().blocks())
            .map(|(&r, b)| r as f64 * b.weight)
            .sum()
    }

    /// `τ(e⊥) = τ(1 − e)`.
    pub fn complement_trace(&self) -> f64 {
        self.ranks
            .iter()
            .zip(self.element.algebra().blocks())
            .map(|(&r, b)| (b.dim - r) as f64 * b.weight)
            .sum()
    }

    pub fn complement(&self) -> Projection {
        let alg = self.element.algebra().clone();
        Projection {
            element: &OperatorElement::identity(&alg) - &self.element,
            ranks: alg
                .blocks()
                .iter()
                .zip(&self.ranks)
                .map(|(b, &r)| b.dim - r)
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.ranks
            .iter()
            .zip(self.element.algebra().blocks())
            .all(|(&r, b)| r == b.dim)
    }

    /// `e x e`.
    pub fn compress(&self, x: &OperatorElement) -> OperatorElement {
        &(&self.element * x) * &self.element
    }
}

/// Outcome of the spectral construction for `V(ε, δ)`.
#[derive(Clone, Debug)]
pub enum BallMembership {
    /// `‖xe‖_∞ ≤ ε` and `τ(e⊥) ≤ δ`.
    Accepted { witness: Projection, complement_trace: f64 },
    /// The spectral projection of `|x|` on `[0, ε]` needs `τ(e⊥) > δ`. This is
    /// not a proof that `x ∉ V(ε, δ)`.
    Refused { complement_trace: f64 },
}

impl BallMembership {
    pub fn is_accepted(&self) -> bool {
        matches!(self, BallMembership::Accepted { .. })
    }
}

/// Tries to place `x` in the measure-topology neighborhood `V(ε, δ)` using
/// `e = 1_{[0, ε]}(|x|)`, so that `‖xe‖_∞² = ‖e|x|²e‖_∞ ≤ ε²`.
pub fn measure_ball_membership(x: &OperatorElement, eps: f64, delta: f64) -> Result<BallMembership> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("epsilon", format!("must be positive, got {eps}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    let e = x.abs()?.spectral_projection(f64::NEG_INFINITY, eps)?;
    let complement_trace = e.complement_trace();
    Ok(if complement_trace <= delta {
        BallMembership::Accepted {
            witness: e,
            complement_trace,
        }
    } else {
        BallMembership::Refused { complement_trace }
    })
}

fn assert_same(a: &OperatorElement, b: &OperatorElement) {
    assert!(a.same_algebra(b), "operator elements belong to different algebras");
}

impl Add for &OperatorElement {
    type Output = OperatorElement;

    fn add(self, rhs: &OperatorElement) -> OperatorElement {
        assert_same(self, rhs);
        OperatorElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &OperatorElement {
    type Output = OperatorElement;

    fn sub(self, rhs: &OperatorElement) -> OperatorElement {
        assert_same(self, rhs);
        OperatorElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &OperatorElement {
    type Output = OperatorElement;

    fn mul(self, rhs: &OperatorElement) -> OperatorElement {
        assert_same(self, rhs);
        OperatorElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a * b).collect(),
        }
    }
}

impl Neg for &OperatorElement {
    type Output = OperatorElement;

    fn neg(self) -> OperatorElement {
        self.map_blocks(|_, m| -m)
    }
}

impl AddAssign<&OperatorElement> for OperatorElement {
    fn add_assign(&mut self, rhs: &OperatorElement) {
        self.axpy(Complex64::new(1.0, 0.0), rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m2() -> Arc<AlgebraSpec> {
        AlgebraSpec::full(2).unwrap().shared()
    }

    fn two_blocks() -> Arc<AlgebraSpec> {
        AlgebraSpec::new(vec![
            Block { dim: 2, weight: 1.0 },
            Block { dim: 2, weight: 0.5 },
        ])
        .unwrap()
        .shared()
    }

    #[test]
    fn rejects_empty_and_degenerate_algebras() {
        assert!(AlgebraSpec::new(vec![]).is_err());
        assert!(AlgebraSpec::new(vec![Block { dim: 0, weight: 1.0 }]).is_err());
        assert!(AlgebraSpec::new(vec![Block { dim: 2, weight: 0.0 }]).is_err());
        assert!(AlgebraSpec::new(vec![Block { dim: 1, weight: 2.0 }]).is_ok());
    }

    #[test]
    fn algebra_json_shape() {
        let a: AlgebraSpec =
            serde_json::from_str(r#"{"blocks":[{"dim":2,"weight":1.0},{"dim":1,"weight":0.5}]}"#).unwrap();
        assert_eq!(a.total_dim(), 3);
        assert_eq!(a.tau_one(), 2.5);
        assert!(serde_json::from_str::<AlgebraSpec>(r#"{"blocks":[]}"#).is_err());
        assert!(serde_json::from_str::<AlgebraSpec>(r#"{"blocks":[{"dim":2,"weight":-1}]}"#).is_err());
    }

    #[test]
    fn trace_examples() {
        let a = m2();
        assert_eq!(OperatorElement::identity(&a).trace(), c(2.0, 0.0));
        let d = OperatorElement::from_diagonal(&a, &[1.0, -1.0]).unwrap();
        assert_eq!(d.trace(), c(0.0, 0.0));
        let b = two_blocks();
        assert_eq!(OperatorElement::identity(&b).trace(), c(3.0, 0.0));
    }

    #[test]
    fn schatten_examples() {
        let a = m2();
        let d = OperatorElement::from_diagonal(&a, &[3.0, -4.0]).unwrap();
        assert!((d.schatten_norm(1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((d.schatten_norm(f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
        let nil = OperatorElement::from_blocks(
            &a,
            vec![DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])],
        )
        .unwrap();
        assert!((nil.schatten_norm(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(d.schatten_norm(0.5).is_err());
    }

    #[test]
    fn weights_only_enter_finite_p() {
        let b = two_blocks();
        let x = OperatorElement::from_diagonal(&b, &[0.0, 0.0, 2.0, 0.0]).unwrap();
        assert!((x.schatten_norm(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((x.schatten_norm(f64::INFINITY).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn absolute_value_examples() {
        let a = m2();
        let d = OperatorElement::from_diagonal(&a, &[-2.0, 5.0]).unwrap();
        let abs = d.abs().unwrap();
        let want = OperatorElement::from_diagonal(&a, &[2.0, 5.0]).unwrap();
        assert!(abs.distance(&want).unwrap() < 1e-12);
        assert!(OperatorElement::zeros(&a).abs().unwrap().frobenius() == 0.0);
        let h = 1.0 / 2f64.sqrt();
        let u = OperatorElement::from_blocks(
            &a,
            vec![DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)])],
        )
        .unwrap();
        assert!(u.abs().unwrap().distance(&OperatorElement::identity(&a)).unwrap() < 1e-12);
    }

    #[test]
    fn spectral_projection_examples() {
        let a = m2();
        let d = OperatorElement::from_diagonal(&a, &[1.0, 3.0]).unwrap();
        let e = d.spectral_projection(0.0, 2.0).unwrap();
        let want = OperatorElement::from_diagonal(&a, &[1.0, 0.0]).unwrap();
        assert!(e.element().distance(&want).unwrap() < 1e-12);
        assert_eq!(e.trace(), 1.0);
        assert!(d.spectral_projection(-10.0, 10.0).unwrap().is_identity());
        assert_eq!(d.spectral_projection(5.0, 6.0).unwrap().trace(), 0.0);
    }

    #[test]
    fn spectral_projection_rejects_non_self_adjoint() {
        let a = m2();
        let nil = OperatorElement::from_blocks(
            &a,
            vec![DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])],
        )
        .unwrap();
        assert!(matches!(
            nil.spectral_projection(0.0, 1.0),
            Err(Error::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn ball_membership_examples() {
        let a = m2();
        let zero = OperatorElement::zeros(&a);
        match measure_ball_membership(&zero, 0.1, 0.1).unwrap() {
            BallMembership::Accepted { witness, .. } => assert!(witness.is_identity()),
            other => panic!("unexpected {other:?}"),
        }
        let x = OperatorElement::from_diagonal(&a, &[5.0, 0.1]).unwrap();
        match measure_ball_membership(&x, 5.0, 0.01).unwrap() {
            BallMembership::Accepted { witness, .. } => assert!(witness.is_identity()),
            other => panic!("unexpected {other:?}"),
        }
        match measure_ball_membership(&x, 0.2, 1.0).unwrap() {
            BallMembership::Accepted {
                witness,
                complement_trace,
            } => {
                assert_eq!(complement_trace, 1.0);
                let want = OperatorElement::from_diagonal(&a, &[0.0, 1.0]).unwrap();
                assert!(witness.element().distance(&want).unwrap() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(!measure_ball_membership(&x, 0.2, 0.5).unwrap().is_accepted());
        assert!(measure_ball_membership(&x, 0.0, 0.5).is_err());
        assert!(measure_ball_membership(&x, 1.0, -1.0).is_err());
    }

    #[test]
    fn element_data_round_trip_and_shape_errors() {
        let b = two_blocks();
        let x = OperatorElement::from_complex_diagonal(&b, &[c(1.0, 2.0), c(3.0, 0.0), c(0.0, -1.0), c(4.0, 4.0)]).unwrap();
        let data = x.to_data();
        let y = OperatorElement::from_data(&b, &data).unwrap();
        assert_eq!(x.distance(&y).unwrap(), 0.0);
        let bad = ElementData { blocks: vec![vec![0.0; 8]] };
        assert!(OperatorElement::from_data(&b, &bad).is_err());
        assert!(OperatorElement::from_blocks(&b, vec![DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)]).is_err());
    }

    #[test]
    fn projection_validation() {
        let a = m2();
        let p = OperatorElement::from_diagonal(&a, &[1.0, 0.0]).unwrap();
        let e = Projection::from_element(p).unwrap();
        assert_eq!(e.ranks(), &[1]);
        assert_eq!(e.complement().trace(), 1.0);
        let not = OperatorElement::from_diagonal(&a, &[0.5, 0.0]).unwrap();
        assert!(Projection::from_element(not).is_err());
    }
}
