//! Streaming evaluation of
//! `M_n^{β,k}(T)(x) = (1/n) Σ_{j<n} β_{k_j} T^{k_j}(x)`
//! and of the algebraic transfer identities between the families.
//!
//! `β ≡ 1` and `k = ℕ₀` recover `M_n^k`, `M_n^β` and `M_n`.

use serde::{Deserialize, Serialize};

use crate::algebra::OperatorElement;
use crate::ds::AlgebraMap;
use crate::error::{Error, Result};
use crate::subsequence::{counting, SubsequenceSpec, Terms};
use crate::weights::{WeightCursor, WeightSequence};

/// Streams `M_1, ..., M_N`. The running power `T^{k_j}(x)` is advanced by
/// `k_j − k_{j−1}` single applications, so memory does not depend on `N`.
pub struct AverageStream<'a> {
    op: &'a dyn AlgebraMap,
    terms: Terms<'a>,
    weights: WeightCursor<'a>,
    power: OperatorElement,
    power_index: u64,
    sum: OperatorElement,
    emitted: usize,
    horizon: usize,
}

impl<'a> AverageStream<'a> {
    pub fn new(
        op: &'a dyn AlgebraMap,
        x: &OperatorElement,
        weights: &'a WeightSequence,
        seq: &'a SubsequenceSpec,
        horizon: usize,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(crate::error::invalid("N", "horizon must be at least 1"));
        }
        x.check_algebra(op.algebra())?;
        if !weights.bound().is_finite() {
            return Err(Error::InvalidWeights("unbounded weights".into()));
        }
        seq.validate()?;
        Ok(Self {
            op,
            terms: seq.terms(),
            weights: weights.cursor(),
            power: x.clone(),
            power_index: 0,
            sum: OperatorElement::zeros(op.algebra()),
            emitted: 0,
            horizon,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn advance(&mut self) -> Result<(usize, OperatorElement)> {
        let k = match self.terms.next() {
            Some(t) => t?,
            None => {
                return Err(Error::SequenceExhausted {
                    requested: self.horizon,
                    available: self.emitted,
                })
            }
        };
        while self.power_index < k {
            self.power = self.op.apply(&self.power)?;
            self.power_index += 1;
        }
        let beta = self.weights.value_at(k)?;
        self.sum.axpy(beta, &self.power);
        self.emitted += 1;
        let n = self.emitted;
        Ok((n, self.sum.scale_real(1.0 / n as f64)))
    }

    /// The last emitted average `M_N`.
    pub fn terminal(self) -> Result<OperatorElement> {
        let mut last = None;
        for item in self {
            last = Some(item?.1);
        }
        Ok(last.expect("horizon >= 1"))
    }

    /// Averages at the requested `n` (ascending, each in `1..=N`).
    pub fn collect_at(self, ns: &[usize]) -> Result<Vec<(usize, OperatorElement)>> {
        let mut want = ns.iter().copied().peekable();
        let mut out = Vec::with_capacity(ns.len());
        for item in self {
            let (n, m) = item?;
            while want.next_if_eq(&n).is_some() {
                out.push((n, m.clone()));
            }
            if want.peek().is_none() {
                break;
            }
        }
        Ok(out)
    }

    /// Keeps only the averages selected by `stride` (the final one always).
    pub fn checkpoints(self, stride: Stride) -> impl Iterator<Item = Result<(usize, OperatorElement)>> + 'a {
        let horizon = self.horizon;
        self.filter(move |item| match item {
            Ok((n, _)) => stride.selects(*n, horizon),
            Err(_) => true,
        })
    }
}

impl Iterator for AverageStream<'_> {
    type Item = Result<(usize, OperatorElement)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.emitted >= self.horizon {
            return None;
        }
        let item = self.advance();
        if item.is_err() {
            self.horizon = self.emitted;
        }
        Some(item)
    }
}

/// Which `n` a checkpointed stream emits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stride {
    /// Powers of two, plus the horizon.
    #[default]
    Geometric,
    /// Multiples of `every`, plus the horizon.
    Every { every: usize },
}

impl Stride {
    pub fn selects(&self, n: usize, horizon: usize) -> bool {
        n == horizon
            || match self {
                Stride::Geometric => n.is_power_of_two(),
                Stride::Every { every } => *every > 0 && n.is_multiple_of(*every),
            }
    }

    /// All selected `n` in `1..=horizon`.
    pub fn grid(&self, horizon: usize) -> Vec<usize> {
        (1..=horizon).filter(|&n| self.selects(n, horizon)).collect()
    }
}

/// `M_N` of the requested family; a convenience over [`AverageStream`].
pub fn average(
    op: &dyn AlgebraMap,
    x: &OperatorElement,
    weights: &WeightSequence,
    seq: &SubsequenceSpec,
    n: usize,
) -> Result<OperatorElement> {
    AverageStream::new(op, x, weights, seq, n)?.terminal()
}

/// Plain Cesàro average `M_n(T)(x)`.
pub fn cesaro_average(op: &dyn AlgebraMap, x: &OperatorElement, n: usize) -> Result<OperatorElement> {
    average(op, x, &WeightSequence::ones(), &SubsequenceSpec::Full, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferIdentity {
    /// `M_n^{β,k} = ((k_{n−1}+1)/n) · M_{k_{n−1}+1}^{cβ}` with `c = χ_k`.
    Prop31,
    /// `M_n^{γβ} = (c(n−1)/n) · M_{c(n−1)}^{β,k}` with `c(n) = max{j : k_j ≤ n} + 1`.
    Prop32,
}

/// `‖LHS − RHS‖_∞` of a transfer identity, each side computed by its own
/// stream.
pub fn transfer_identity_check(
    variant: TransferIdentity,
    op: &dyn AlgebraMap,
    beta: &WeightSequence,
    k: &SubsequenceSpec,
    x: &OperatorElement,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::IndexUnderflow("n must be at least 1".into()));
    }
    let indicator_beta = WeightSequence::product(WeightSequence::indicator(k.clone())?, beta.clone());
    let full = SubsequenceSpec::Full;
    let (lhs, rhs) = match variant {
        TransferIdentity::Prop31 => {
            let prefix = k.prefix(n).map_err(|e| match e {
                Error::SequenceExhausted { requested, available } => Error::IndexUnderflow(format!(
                    "k has {available} terms, {requested} needed for n = {n}"
                )),
                other => other,
            })?;
            let m = prefix[n - 1] as usize + 1;
            let lhs = average(op, x, beta, k, n)?;
            let rhs = average(op, x, &indicator_beta, &full, m)?.scale_real(m as f64 / n as f64);
            (lhs, rhs)
        }
        TransferIdentity::Prop32 => {
            let below = k.terms_up_to(n as u64 - 1)?;
            let c = counting(&below, n as u64 - 1);
            if c == 0 {
                return Err(Error::IndexUnderflow(format!("c(n - 1) = 0 for n = {n}: no term of k below n")));
            }
            let lhs = average(op, x, &indicator_beta, &full, n)?;
            let rhs = average(op, x, beta, k, c)?.scale_real(c as f64 / n as f64);
            (lhs, rhs)
        }
    };
    lhs.distance(&rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    pub n: usize,
    pub k_n: u64,
    /// `‖M_{k_n}^β(T)(x) − A_n(T)(x)‖_∞`.
    pub measured: f64,
    /// `((k_n − n)/k_n) ‖β‖_∞ ‖x‖_∞`.
    pub bound: f64,
}

/// Gap between the full weighted average at `k_n` and
/// `A_n(T)(x) = (1/k_n) Σ_{j<n} β_{k_j} T^{k_j}(x)`.
pub fn theorem31_gap(
    op: &dyn AlgebraMap,
    beta: &WeightSequence,
    k: &SubsequenceSpec,
    x: &OperatorElement,
    n: usize,
) -> Result<GapBound> {
    let prefix = k.prefix(n + 1)?;
    let k_n = prefix[n];
    if k_n == 0 {
        return Err(Error::IndexUnderflow("k_n must be at least 1".into()));
    }
    let full_avg = average(op, x, beta, &SubsequenceSpec::Full, k_n as usize)?;
    let a_n = if n == 0 {
        OperatorElement::zeros(x.algebra())
    } else {
        average(op, x, beta, k, n)?.scale_real(n as f64 / k_n as f64)
    };
    let measured = full_avg.distance(&a_n)?;
    let bound = (k_n - n as u64) as f64 / k_n as f64 * beta.bound() * x.op_norm()?;
    Ok(GapBound {
        n,
        k_n,
        measured,
        bound,
    })
}

/// Residual tolerance of the exact identities, relative to `1 + ‖x‖_∞`.
pub fn identity_tolerance(x: &OperatorElement) -> Result<f64> {
    Ok(1e-10 * (1.0 + x.op_norm()?))
}
