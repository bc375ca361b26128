//! Positive Dunford-Schwartz maps built from recipes that are unital, trace
//! preserving and positivity preserving by construction.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, ElementData, OperatorElement};
use crate::error::{Error, Result};
use crate::random;

/// Unitaries are accepted when `‖u*u − 1‖_∞ ≤ UNITARY_TOL`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Mixture probabilities must sum to one within this tolerance.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Singular values of `I − T` at or below this value span the fixed space.
pub const FIXED_SPACE_WINDOW: f64 = 1e-8;

/// A linear map on the elements of one algebra.
pub trait AlgebraMap {
    fn algebra(&self) -> &Arc<AlgebraSpec>;
    fn apply(&self, x: &OperatorElement) -> Result<OperatorElement>;
}

#[derive(Clone, Debug)]
pub enum Recipe {
    /// `x ↦ u x u*`.
    UnitaryConjugation { u: OperatorElement },
    /// `x ↦ Σ p_i u_i x u_i*`.
    MixedUnitary { terms: Vec<(f64, OperatorElement)> },
    /// `x ↦ P x P*` with `P e_i = e_{σ(i)}` on the total basis.
    PermutationConjugation { perm: Vec<usize> },
    /// Pinching onto diagonal sub-blocks; `partition[b]` lists the sub-block
    /// sizes of block `b`.
    BlockConditionalExpectation { partition: Vec<Vec<usize>> },
    /// Parts applied in list order.
    Composition(Vec<DsOperator>),
}

#[derive(Clone, Debug)]
pub struct DsOperator {
    algebra: Arc<AlgebraSpec>,
    recipe: Recipe,
}

fn check_unitary(u: &OperatorElement, what: &str) -> Result<()> {
    let id = OperatorElement::identity(u.algebra());
    let dev = (&(&u.adjoint() * u) - &id).op_norm()?;
    if dev > UNITARY_TOL {
        return Err(Error::InvalidRecipe(format!(
            "{what} is not unitary (|u*u - 1| = {dev:e})"
        )));
    }
    Ok(())
}

impl DsOperator {
    pub fn unitary_conjugation(algebra: &Arc<AlgebraSpec>, u: OperatorElement) -> Result<Self> {
        u.check_algebra(algebra)?;
        check_unitary(&u, "u")?;
        Ok(Self {
            algebra: algebra.clone(),
            recipe: Recipe::UnitaryConjugation { u },
        })
    }

    pub fn mixed_unitary(algebra: &Arc<AlgebraSpec>, terms: Vec<(f64, OperatorElement)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidRecipe("mixed unitary needs at least one term".into()));
        }
        let mut total = 0.0;
        for (i, (p, u)) in terms.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidRecipe(format!("term {i}: probability {p} is not positive")));
            }
            u.check_algebra(algebra)?;
            check_unitary(u, &format!("term {i}"))?;
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidRecipe(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            algebra: algebra.clone(),
            recipe: Recipe::MixedUnitary { terms },
        })
    }

    /// The identity map, as a one-term mixture with `u = 1`.
    pub fn identity(algebra: &Arc<AlgebraSpec>) -> Self {
        Self {
            algebra: algebra.clone(),
            recipe: Recipe::MixedUnitary {
                terms: vec![(1.0, OperatorElement::identity(algebra))],
            },
        }
    }

    /// The permutation must carry every block onto a block of equal
    /// dimension and trace weight.
    pub fn permutation(algebra: &Arc<AlgebraSpec>, perm: Vec<usize>) -> Result<Self> {
        let n = algebra.total_dim();
        if perm.len() != n {
            return Err(Error::InvalidRecipe(format!(
                "permutation has length {}, algebra has total dimension {n}",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidRecipe(format!("{perm:?} is not a permutation of 0..{n}")));
            }
            seen[p] = true;
        }
        let offsets = algebra.offsets();
        for (b, block) in algebra.blocks().iter().enumerate() {
            let start = offsets[b];
            let (target, _) = algebra.locate(perm[start]).expect("index in range");
            let tb = algebra.blocks()[target];
            if tb.dim != block.dim || tb.weight != block.weight {
                return Err(Error::InvalidRecipe(format!(
                    "permutation maps block {b} onto block {target} with a different dimension or weight"
                )));
            }
            for i in start..start + block.dim {
                match algebra.locate(perm[i]) {
                    Some((t, _)) if t == target => {}
                    _ => {
                        return Err(Error::InvalidRecipe(format!(
                            "permutation splits block {b} across several blocks"
                        )))
                    }
                }
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            recipe: Recipe::PermutationConjugation { perm },
        })
    }

    pub fn conditional_expectation(algebra: &Arc<AlgebraSpec>, partition: Vec<Vec<usize>>) -> Result<Self> {
        if partition.len() != algebra.num_blocks() {
            return Err(Error::InvalidRecipe(format!(
                "partition lists {} blocks, algebra has {}",
                partition.len(),
                algebra.num_blocks()
            )));
        }
        for (b, (sizes, block)) in partition.iter().zip(algebra.blocks()).enumerate() {
            if sizes.contains(&0) || sizes.iter().sum::<usize>() != block.dim {
                return Err(Error::InvalidRecipe(format!(
                    "sub-block sizes {sizes:?} do not partition block {b} of dimension {}",
                    block.dim
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            recipe: Recipe::BlockConditionalExpectation { partition },
        })
    }

    /// Conditional expectation onto the diagonal of every block.
    pub fn diagonal_expectation(algebra: &Arc<AlgebraSpec>) -> Self {
        let partition = algebra.blocks().iter().map(|b| vec![1; b.dim]).collect();
        Self::conditional_expectation(algebra, partition).expect("unit sizes partition every block")
    }

    pub fn composition(algebra: &Arc<AlgebraSpec>, parts: Vec<DsOperator>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidRecipe("composition needs at least one part".into()));
        }
        for p in &parts {
            if *p.algebra != **algebra {
                return Err(Error::AlgebraMismatch);
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            recipe: Recipe::Composition(parts),
        })
    }

    /// Mixture of `terms` Haar unitaries with probabilities drawn uniformly
    /// and normalized.
    pub fn random_mixed_unitary(algebra: &Arc<AlgebraSpec>, terms: usize, rng: &mut impl Rng) -> Self {
        let terms = terms.max(1);
        let raw: Vec<f64> = (0..terms).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut probs: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let head: f64 = probs[..terms - 1].iter().sum();
        probs[terms - 1] = 1.0 - head;
        let terms = probs
            .into_iter()
            .map(|p| (p, random::haar_unitary(algebra, rng)))
            .collect();
        Self::mixed_unitary(algebra, terms).expect("Haar samples are unitary")
    }

    pub fn recipe(&self) -> &Recipe {
        &self.recipe
    }

    fn apply_unchecked(&self, x: &OperatorElement) -> OperatorElement {
        match &self.recipe {
            Recipe::UnitaryConjugation { u } => &(u * x) * &u.adjoint(),
            Recipe::MixedUnitary { terms } => {
                let mut out = OperatorElement::zeros(&self.algebra);
                for (p, u) in terms {
                    let y = &(u * x) * &u.adjoint();
                    out.axpy(Complex64::new(*p, 0.0), &y);
                }
                out
            }
            Recipe::PermutationConjugation { perm } => {
                let alg = &self.algebra;
                let offsets = alg.offsets();
                let mut out = OperatorElement::zeros(alg);
                for (b, m) in x.blocks().iter().enumerate() {
                    let d = m.nrows();
                    let (target, _) = alg.locate(perm[offsets[b]]).expect("validated");
                    let local: Vec<usize> = (0..d)
                        .map(|i| perm[offsets[b] + i] - offsets[target])
                        .collect();
                    let dst = &mut out.blocks_mut()[target];
                    for i in 0..d {
                        for j in 0..d {
                            dst[(local[i], local[j])] = m[(i, j)];
                        }
                    }
                }
                out
            }
            Recipe::BlockConditionalExpectation { partition } => x.map_blocks(|b, m| {
                let mut label = Vec::with_capacity(m.nrows());
                for (s, &size) in partition[b].iter().enumerate() {
                    label.extend(std::iter::repeat_n(s, size));
                }
                DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                    if label[i] == label[j] {
                        m[(i, j)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }),
            Recipe::Composition(parts) => {
                let mut y = x.clone();
                for p in parts {
                    y = p.apply_unchecked(&y);
                }
                y
            }
        }
    }

    pub fn to_data(&self) -> RecipeData {
        match &self.recipe {
            Recipe::UnitaryConjugation { u } => RecipeData::UnitaryConjugation { u: u.to_data() },
            Recipe::MixedUnitary { terms } => RecipeData::MixedUnitary {
                terms: terms
                    .iter()
                    .map(|(p, u)| MixtureTerm { p: *p, u: u.to_data() })
                    .collect(),
            },
            Recipe::PermutationConjugation { perm } => RecipeData::Permutation { perm: perm.clone() },
            Recipe::BlockConditionalExpectation { partition } => RecipeData::ConditionalExpectation {
                partition: partition.clone(),
            },
            Recipe::Composition(parts) => RecipeData::Composition {
                parts: parts.iter().map(DsOperator::to_data).collect(),
            },
        }
    }

    pub fn from_data(algebra: &Arc<AlgebraSpec>, data: &RecipeData) -> Result<Self> {
        match data {
            RecipeData::Identity => Ok(Self::identity(algebra)),
            RecipeData::UnitaryConjugation { u } => {
                Self::unitary_conjugation(algebra, OperatorElement::from_data(algebra, u)?)
            }
            RecipeData::MixedUnitary { terms } => {
                let terms = terms
                    .iter()
                    .map(|t| Ok((t.p, OperatorElement::from_data(algebra, &t.u)?)))
                    .collect::<Result<Vec<_>>>()?;
                Self::mixed_unitary(algebra, terms)
            }
            RecipeData::Permutation { perm } => Self::permutation(algebra, perm.clone()),
            RecipeData::ConditionalExpectation { partition } => {
                Self::conditional_expectation(algebra, partition.clone())
            }
            RecipeData::Composition { parts } => {
                let parts = parts
                    .iter()
                    .map(|p| Self::from_data(algebra, p))
                    .collect::<Result<Vec<_>>>()?;
                Self::composition(algebra, parts)
            }
        }
    }
}

impl AlgebraMap for DsOperator {
    fn algebra(&self) -> &Arc<AlgebraSpec> {
        &self.algebra
    }

    fn apply(&self, x: &OperatorElement) -> Result<OperatorElement> {
        x.check_algebra(&self.algebra)?;
        Ok(self.apply_unchecked(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureTerm {
    pub p: f64,
    pub u: ElementData,
}

/// JSON form of a recipe; unitaries use the interleaved element layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecipeData {
    Identity,
    UnitaryConjugation { u: ElementData },
    MixedUnitary { terms: Vec<MixtureTerm> },
    Permutation { perm: Vec<usize> },
    ConditionalExpectation { partition: Vec<Vec<usize>> },
    Composition { parts: Vec<RecipeData> },
}

/// `x ↦ factor·x`. Not a DS⁺ recipe; exists so that the verifier can be
/// exercised on a map that fails it.
#[derive(Clone, Debug)]
pub struct ScalingHook {
    algebra: Arc<AlgebraSpec>,
    factor: f64,
}

impl ScalingHook {
    pub fn new(algebra: &Arc<AlgebraSpec>, factor: f64) -> Self {
        Self {
            algebra: algebra.clone(),
            factor,
        }
    }
}

impl AlgebraMap for ScalingHook {
    fn algebra(&self) -> &Arc<AlgebraSpec> {
        &self.algebra
    }

    fn apply(&self, x: &OperatorElement) -> Result<OperatorElement> {
        x.check_algebra(&self.algebra)?;
        Ok(x.scale_real(self.factor))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsReport {
    pub samples: usize,
    pub tol: f64,
    /// `max ‖T(x)‖_1 / ‖x‖_1`.
    pub max_ratio_l1: f64,
    /// `max ‖T(x)‖_∞ / ‖x‖_∞`.
    pub max_ratio_inf: f64,
    /// Smallest eigenvalue of `T(a)` over sampled positive `a`.
    pub min_eigenvalue: f64,
    pub passed: bool,
}

/// Samples Ginibre `x` and positive `g*g`, and checks the two contraction
/// ratios and positivity.
pub fn verify_ds_plus<M: AlgebraMap + ?Sized>(map: &M, sample_count: usize, tol: f64, seed: u64) -> Result<DsReport> {
    if sample_count == 0 {
        return Err(crate::error::invalid("sample_count", "must be at least 1"));
    }
    let alg = map.algebra().clone();
    let mut rng = random::rng(seed);
    let mut max_l1: f64 = 0.0;
    let mut max_inf: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for _ in 0..sample_count {
        let x = random::ginibre(&alg, &mut rng);
        let tx = map.apply(&x)?;
        max_l1 = max_l1.max(tx.schatten_norm(1.0)? / x.schatten_norm(1.0)?);
        max_inf = max_inf.max(tx.op_norm()? / x.op_norm()?);

        let a = random::positive(&alg, &mut rng);
        let ta = map.apply(&a)?.real_part();
        let spec = ta.spectral_decomposition()?;
        for (l, _) in spec.weighted_eigenvalues() {
            min_eig = min_eig.min(l);
        }
    }
    let passed = max_l1 <= 1.0 + tol && max_inf <= 1.0 + tol && min_eig >= -tol;
    Ok(DsReport {
        samples: sample_count,
        tol,
        max_ratio_l1: max_l1,
        max_ratio_inf: max_inf,
        min_eigenvalue: min_eig,
        passed,
    })
}

/// Coordinates of `x` in the orthonormal basis `E_ij / √t_b` of `L_2(M, τ)`,
/// blocks in order, entries row-major.
pub fn weighted_coordinates(x: &OperatorElement) -> DVector<Complex64> {
    let alg = x.algebra();
    let mut out = Vec::with_capacity(alg.vector_dim());
    for (m, b) in x.blocks().iter().zip(alg.blocks()) {
        let s = b.weight.sqrt();
        for i in 0..b.dim {
            for j in 0..b.dim {
                out.push(m[(i, j)] * s);
            }
        }
    }
    DVector::from_vec(out)
}

pub fn from_weighted_coordinates(algebra: &Arc<AlgebraSpec>, v: &DVector<Complex64>) -> Result<OperatorElement> {
    if v.len() != algebra.vector_dim() {
        return Err(crate::error::invalid(
            "coordinates",
            format!("expected {} entries, got {}", algebra.vector_dim(), v.len()),
        ));
    }
    let mut idx = 0;
    let mut blocks = Vec::with_capacity(algebra.num_blocks());
    for b in algebra.blocks() {
        let s = 1.0 / b.weight.sqrt();
        let m = DMatrix::from_fn(b.dim, b.dim, |i, j| v[idx + i * b.dim + j] * s);
        idx += b.dim * b.dim;
        blocks.push(m);
    }
    OperatorElement::from_blocks(algebra, blocks)
}

/// Matrix of `T` in the weighted orthonormal basis; `D × D` with
/// `D = Σ d_b²`.
pub fn superoperator_matrix<M: AlgebraMap + ?Sized>(map: &M) -> Result<DMatrix<Complex64>> {
    let alg = map.algebra().clone();
    let dim = alg.vector_dim();
    let mut s = DMatrix::<Complex64>::zeros(dim, dim);
    for c in 0..dim {
        let mut unit = DVector::<Complex64>::zeros(dim);
        unit[c] = Complex64::new(1.0, 0.0);
        let basis = from_weighted_coordinates(&alg, &unit)?;
        let image = weighted_coordinates(&map.apply(&basis)?);
        s.set_column(c, &image);
    }
    Ok(s)
}

/// Orthogonal projection onto `{x : T(x) = x}` in `L_2(M, τ)`. For an
/// `L_2`-contraction this is the mean-ergodic limit of the Cesàro averages.
#[derive(Clone, Debug)]
pub struct FixedSpaceProjector {
    algebra: Arc<AlgebraSpec>,
    /// Orthonormal basis of the fixed space, as columns.
    basis: DMatrix<Complex64>,
}

impl FixedSpaceProjector {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn apply(&self, x: &OperatorElement) -> Result<OperatorElement> {
        x.check_algebra(&self.algebra)?;
        let v = weighted_coordinates(x);
        let proj = &self.basis * (self.basis.adjoint() * v);
        from_weighted_coordinates(&self.algebra, &proj)
    }
}

impl AlgebraMap for FixedSpaceProjector {
    fn algebra(&self) -> &Arc<AlgebraSpec> {
        &self.algebra
    }

    fn apply(&self, x: &OperatorElement) -> Result<OperatorElement> {
        FixedSpaceProjector::apply(self, x)
    }
}

/// Null space of `I − S` from its singular value decomposition, keeping the
/// right singular vectors with `σ ≤ FIXED_SPACE_WINDOW`.
pub fn fixed_space_projector<M: AlgebraMap + ?Sized>(map: &M) -> Result<FixedSpaceProjector> {
    let alg = map.algebra().clone();
    let s = superoperator_matrix(map)?;
    let dim = s.nrows();
    let gap = DMatrix::<Complex64>::identity(dim, dim) - s;
    let svd = gap
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD of I - T did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD returned no right singular vectors".into()))?;
    let keep: Vec<usize> = (0..dim)
        .filter(|&k| svd.singular_values[k] <= FIXED_SPACE_WINDOW)
        .collect();
    let mut basis = DMatrix::<Complex64>::zeros(dim, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).adjoint());
    }
    Ok(FixedSpaceProjector { algebra: alg, basis })
}
