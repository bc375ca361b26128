//! Bounded complex weight sequences `β = {β_k}`: constants, explicit lists,
//! trigonometric polynomials (optionally plus a decaying perturbation),
//! subsequence indicators and pointwise products.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subsequence::{SubsequenceData, SubsequenceSpec, Terms};

/// Frequencies must satisfy `||λ| − 1| ≤ UNIT_MODULUS_TOL`.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Streamed phases are renormalized to modulus one this often.
pub const RENORMALIZE_EVERY: u64 = 10_000;

/// `P(k) = Σ_j r_j λ_j^k` with `λ_j = exp(iθ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    coefficients: Vec<Complex64>,
    args: Vec<f64>,
    frequencies: Vec<Complex64>,
}

impl TrigPolynomial {
    /// From coefficients and frequency arguments `θ_j`.
    pub fn from_args(coefficients: Vec<Complex64>, args: Vec<f64>) -> Result<Self> {
        if coefficients.len() != args.len() {
            return Err(Error::InvalidWeights(format!(
                "{} coefficients but {} frequencies",
                coefficients.len(),
                args.len()
            )));
        }
        if args.iter().any(|t| !t.is_finite()) || coefficients.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidWeights("non-finite trigonometric polynomial data".into()));
        }
        let frequencies = args.iter().map(|&t| Complex64::cis(t)).collect();
        Ok(Self {
            coefficients,
            args,
            frequencies,
        })
    }

    /// From coefficients and unit-modulus frequencies `λ_j`.
    pub fn from_frequencies(coefficients: Vec<Complex64>, frequencies: Vec<Complex64>) -> Result<Self> {
        if let Some(l) = frequencies.iter().find(|l| (l.norm() - 1.0).abs() > UNIT_MODULUS_TOL) {
            return Err(Error::InvalidWeights(format!("frequency {l} is not unimodular")));
        }
        let args = frequencies.iter().map(|l| l.arg()).collect();
        let mut p = Self::from_args(coefficients, args)?;
        p.frequencies = frequencies;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self::from_args(vec![], vec![]).expect("empty polynomial is valid")
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn frequencies(&self) -> &[Complex64] {
        &self.frequencies
    }

    pub fn args(&self) -> &[f64] {
        &self.args
    }

    /// `Σ |r_j|`, an upper bound for `sup_k |P(k)|`.
    pub fn coefficient_bound(&self) -> f64 {
        self.coefficients.iter().map(|r| r.norm()).sum()
    }

    /// `P(k)` via binary powering of each `λ_j`.
    pub fn eval(&self, k: u64) -> Complex64 {
        self.coefficients
            .iter()
            .zip(&self.frequencies)
            .map(|(r, l)| r * unit_pow(*l, k))
            .sum()
    }

    /// Streams `P(0), P(1), ...` by repeated multiplication with periodic
    /// renormalization.
    pub fn stream(&self) -> TrigStream<'_> {
        TrigStream {
            poly: self,
            phases: vec![Complex64::new(1.0, 0.0); self.frequencies.len()],
            position: 0,
        }
    }
}

fn unit_pow(base: Complex64, mut e: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b = b * b;
        b /= b.norm();
        e >>= 1;
    }
    acc / acc.norm()
}

/// Incremental evaluator of a trigonometric polynomial at nondecreasing `k`.
#[derive(Clone, Debug)]
pub struct TrigStream<'a> {
    poly: &'a TrigPolynomial,
    phases: Vec<Complex64>,
    position: u64,
}

impl TrigStream<'_> {
    pub fn position(&self) -> u64 {
        self.position
    }

    fn step(&mut self) {
        for (z, l) in self.phases.iter_mut().zip(&self.poly.frequencies) {
            *z *= l;
        }
        self.position += 1;
        if self.position.is_multiple_of(RENORMALIZE_EVERY) {
            for z in &mut self.phases {
                *z /= z.norm();
            }
        }
    }

    /// Advances to `k ≥ position` and returns `P(k)`.
    pub fn value_at(&mut self, k: u64) -> Complex64 {
        assert!(k >= self.position, "trigonometric stream cannot move backwards");
        while self.position < k {
            self.step();
        }
        self.phases
            .iter()
            .zip(&self.poly.coefficients)
            .map(|(z, r)| r * z)
            .sum()
    }
}

impl Iterator for TrigStream<'_> {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        let v = self.value_at(self.position);
        self.step();
        Some(v)
    }
}

/// Named decaying perturbations added to a trigonometric polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecayRule {
    /// `1/(k + 1)`.
    Harmonic,
    /// `ratio^k` with `|ratio| < 1`.
    Geometric { ratio: f64 },
}

impl DecayRule {
    fn validate(&self) -> Result<()> {
        match self {
            DecayRule::Geometric { ratio } if !(ratio.abs() < 1.0) => Err(Error::InvalidWeights(format!(
                "geometric decay needs |ratio| < 1, got {ratio}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, k: u64) -> f64 {
        match self {
            DecayRule::Harmonic => 1.0 / (k as f64 + 1.0),
            DecayRule::Geometric { ratio } => ratio.powf(k as f64),
        }
    }

    /// `sup_k |decay(k)|`, attained at `k = 0`.
    pub fn bound(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    Constant(Complex64),
    Explicit(Vec<Complex64>),
    TrigPoly(TrigPolynomial),
    TrigPolyPlusDecay(TrigPolynomial, DecayRule),
    /// `c_j = 1` iff `j ∈ k`.
    Indicator(SubsequenceSpec),
    Product(Box<WeightSequence>, Box<WeightSequence>),
}

/// A weight sequence together with a cached upper bound for `‖β‖_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    kind: WeightKind,
    bound: f64,
}

impl WeightSequence {
    pub fn new(kind: WeightKind) -> Result<Self> {
        let bound = match &kind {
            WeightKind::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::InvalidWeights("non-finite constant".into()));
                }
                c.norm()
            }
            WeightKind::Explicit(v) => {
                if v.iter().any(|z| !z.is_finite()) {
                    return Err(Error::InvalidWeights("non-finite explicit weight".into()));
                }
                v.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            WeightKind::TrigPoly(p) => p.coefficient_bound(),
            WeightKind::TrigPolyPlusDecay(p, d) => {
                d.validate()?;
                p.coefficient_bound() + d.bound()
            }
            WeightKind::Indicator(k) => {
                k.validate()?;
                1.0
            }
            WeightKind::Product(a, b) => a.bound * b.bound,
        };
        Ok(Self { kind, bound })
    }

    /// `β ≡ 1`.
    pub fn ones() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(WeightKind::Constant(c)).expect("finite constant")
    }

    pub fn explicit(values: Vec<Complex64>) -> Result<Self> {
        Self::new(WeightKind::Explicit(values))
    }

    pub fn trig_poly(p: TrigPolynomial) -> Self {
        Self::new(WeightKind::TrigPoly(p)).expect("trigonometric polynomials are bounded")
    }

    pub fn trig_poly_plus_decay(p: TrigPolynomial, decay: DecayRule) -> Result<Self> {
        Self::new(WeightKind::TrigPolyPlusDecay(p, decay))
    }

    pub fn indicator(k: SubsequenceSpec) -> Result<Self> {
        Self::new(WeightKind::Indicator(k))
    }

    pub fn product(a: WeightSequence, b: WeightSequence) -> Self {
        Self::new(WeightKind::Product(Box::new(a), Box::new(b))).expect("products of bounded sequences are bounded")
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Cached upper bound for `sup_k |β_k|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self.kind, WeightKind::Constant(c) if c == Complex64::new(1.0, 0.0))
    }

    pub fn cursor(&self) -> WeightCursor<'_> {
        let state = match &self.kind {
            WeightKind::Constant(c) => CursorState::Constant(*c),
            WeightKind::Explicit(v) => CursorState::Explicit(v),
            WeightKind::TrigPoly(p) => CursorState::Trig(p.stream(), None),
            WeightKind::TrigPolyPlusDecay(p, d) => CursorState::Trig(p.stream(), Some(*d)),
            WeightKind::Indicator(k) => CursorState::Indicator {
                terms: k.terms(),
                next: None,
                exhausted: false,
            },
            WeightKind::Product(a, b) => CursorState::Product(Box::new(a.cursor()), Box::new(b.cursor())),
        };
        WeightCursor { state, last: None }
    }

    /// `β_0, ..., β_{n−1}`.
    pub fn prefix(&self, n: usize) -> Result<Vec<Complex64>> {
        let mut c = self.cursor();
        (0..n as u64).map(|k| c.value_at(k)).collect()
    }

    pub fn value_at(&self, k: u64) -> Result<Complex64> {
        self.cursor().value_at(k)
    }
}

enum CursorState<'a> {
    Constant(Complex64),
    Explicit(&'a [Complex64]),
    Trig(TrigStream<'a>, Option<DecayRule>),
    Indicator {
        terms: Terms<'a>,
        next: Option<u64>,
        exhausted: bool,
    },
    Product(Box<WeightCursor<'a>>, Box<WeightCursor<'a>>),
}

/// Evaluates a weight sequence at nondecreasing indices in amortized
/// constant memory.
pub struct WeightCursor<'a> {
    state: CursorState<'a>,
    last: Option<u64>,
}

impl WeightCursor<'_> {
    pub fn value_at(&mut self, k: u64) -> Result<Complex64> {
        if let Some(last) = self.last {
            if k < last {
                return Err(Error::InvalidWeights(format!(
                    "weight cursor moved backwards from {last} to {k}"
                )));
            }
        }
        self.last = Some(k);
        match &mut self.state {
            CursorState::Constant(c) => Ok(*c),
            CursorState::Explicit(v) => v.get(k as usize).copied().ok_or_else(|| {
                Error::InvalidWeights(format!("explicit weights have {} entries, index {k} requested", v.len()))
            }),
            CursorState::Trig(s, decay) => {
                let p = s.value_at(k);
                Ok(match decay {
                    Some(d) => p + d.eval(k),
                    None => p,
                })
            }
            CursorState::Indicator { terms, next, exhausted } => {
                loop {
                    match *next {
                        Some(t) if t >= k => break,
                        _ if *exhausted => break,
                        _ => match terms.next() {
                            Some(t) => *next = Some(t?),
                            None => {
                                *exhausted = true;
                                *next = None;
                            }
                        },
                    }
                }
                Ok(if *next == Some(k) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                })
            }
            CursorState::Product(a, b) => Ok(a.value_at(k)? * b.value_at(k)?),
        }
    }
}

/// `(1/n) Σ_{k<n} |β_k − P(k)|`.
pub fn besicovich_deviation(beta: &WeightSequence, p: &TrigPolynomial, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(crate::error::invalid("n", "must be at least 1"));
    }
    let mut c = beta.cursor();
    let mut s = p.stream();
    let mut total = 0.0;
    for k in 0..n as u64 {
        total += (c.value_at(k)? - s.value_at(k)).norm();
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesicovichCertificate {
    pub epsilon: f64,
    /// `(n, deviation)` along `n_start, 2 n_start, ...` up to `n_max`.
    pub checkpoints: Vec<(usize, f64)>,
    /// Deviation stayed below `epsilon` at every checkpoint. This is an
    /// empirical check on a prefix, not a proof of the limsup condition.
    pub sustained: bool,
}

pub fn besicovich_certificate(
    beta: &WeightSequence,
    p: &TrigPolynomial,
    epsilon: f64,
    n_start: usize,
    n_max: usize,
) -> Result<BesicovichCertificate> {
    if n_start == 0 || n_max < n_start {
        return Err(crate::error::invalid("n_start", "need 1 <= n_start <= n_max"));
    }
    let mut checkpoints = Vec::new();
    let mut n = n_start;
    while n <= n_max {
        checkpoints.push((n, besicovich_deviation(beta, p, n)?));
        n *= 2;
    }
    let sustained = checkpoints.iter().all(|&(_, d)| d < epsilon);
    Ok(BesicovichCertificate {
        epsilon,
        checkpoints,
        sustained,
    })
}

/// Finite-`n` estimate `(1/(n+1)) Σ_{k=0}^{n} conj(α_k) α_{k+m}`; negative
/// `m` uses `γ(−m) = conj(γ(m))`.
pub fn correlation_estimate(alpha: &WeightSequence, m: i64, n: usize) -> Result<Complex64> {
    let shift = m.unsigned_abs();
    let mut lead = alpha.cursor();
    let mut lag = alpha.cursor();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..=n as u64 {
        total += lead.value_at(k)?.conj() * lag.value_at(k + shift)?;
    }
    let g = total / (n as f64 + 1.0);
    Ok(if m < 0 { g.conj() } else { g })
}

/// Weights derived from other sequences.
#[derive(Clone, Debug)]
pub enum DerivedWeights {
    Indicator(SubsequenceSpec),
    Product(WeightSequence, WeightSequence),
}

pub fn derive_weights(kind: DerivedWeights, n: usize) -> Result<(WeightSequence, Vec<Complex64>)> {
    let w = match kind {
        DerivedWeights::Indicator(k) => WeightSequence::indicator(k)?,
        DerivedWeights::Product(a, b) => WeightSequence::product(a, b),
    };
    let prefix = w.prefix(n)?;
    Ok((w, prefix))
}

/// A complex number in JSON: a bare real or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexData {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexData> for Complex64 {
    fn from(c: ComplexData) -> Self {
        match c {
            ComplexData::Real(r) => Complex64::new(r, 0.0),
            ComplexData::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexData {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            ComplexData::Real(c.re)
        } else {
            ComplexData::Pair([c.re, c.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightData {
    Constant {
        c: ComplexData,
    },
    Explicit {
        values: Vec<ComplexData>,
    },
    TrigPoly {
        r: Vec<ComplexData>,
        lambda_args: Vec<f64>,
    },
    TrigPolyPlusDecay {
        r: Vec<ComplexData>,
        lambda_args: Vec<f64>,
        decay: DecayRule,
    },
    Indicator {
        sequence: SubsequenceData,
    },
    Product {
        left: Box<WeightData>,
        right: Box<WeightData>,
    },
}

fn complex_vec(v: &[ComplexData]) -> Vec<Complex64> {
    v.iter().map(|&c| c.into()).collect()
}

impl TryFrom<&WeightData> for WeightSequence {
    type Error = Error;

    fn try_from(d: &WeightData) -> Result<Self> {
        match d {
            WeightData::Constant { c } => WeightSequence::new(WeightKind::Constant((*c).into())),
            WeightData::Explicit { values } => WeightSequence::explicit(complex_vec(values)),
            WeightData::TrigPoly { r, lambda_args } => Ok(WeightSequence::trig_poly(TrigPolynomial::from_args(
                complex_vec(r),
                lambda_args.clone(),
            )?)),
            WeightData::TrigPolyPlusDecay { r, lambda_args, decay } => WeightSequence::trig_poly_plus_decay(
                TrigPolynomial::from_args(complex_vec(r), lambda_args.clone())?,
                *decay,
            ),
            WeightData::Indicator { sequence } => WeightSequence::indicator(SubsequenceSpec::try_from(sequence)?),
            WeightData::Product { left, right } => Ok(WeightSequence::product(
                WeightSequence::try_from(left.as_ref())?,
                WeightSequence::try_from(right.as_ref())?,
            )),
        }
    }
}

impl From<&WeightSequence> for WeightData {
    fn from(w: &WeightSequence) -> Self {
        let cd = |v: &[Complex64]| v.iter().map(|&c| c.into()).collect::<Vec<ComplexData>>();
        match &w.kind {
            WeightKind::Constant(c) => WeightData::Constant { c: (*c).into() },
            WeightKind::Explicit(v) => WeightData::Explicit { values: cd(v) },
            WeightKind::TrigPoly(p) => WeightData::TrigPoly {
                r: cd(&p.coefficients),
                lambda_args: p.args.clone(),
            },
            WeightKind::TrigPolyPlusDecay(p, d) => WeightData::TrigPolyPlusDecay {
                r: cd(&p.coefficients),
                lambda_args: p.args.clone(),
                decay: *d,
            },
            WeightKind::Indicator(k) => WeightData::Indicator { sequence: k.into() },
            WeightKind::Product(a, b) => WeightData::Product {
                left: Box::new(a.as_ref().into()),
                right: Box::new(b.as_ref().into()),
            },
        }
    }
}

impl Serialize for WeightSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WeightData::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = WeightData::deserialize(d)?;
        WeightSequence::try_from(&data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn alternating() -> TrigPolynomial {
        TrigPolynomial::from_frequencies(vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]).unwrap()
    }

    #[test]
    fn trig_poly_examples() {
        let one = TrigPolynomial::from_frequencies(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        assert!((0..10).all(|k| one.eval(k) == c(1.0, 0.0)));
        assert!((alternating().eval(3) - c(-1.0, 0.0)).norm() < 1e-15);
        let pm = TrigPolynomial::from_frequencies(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!(pm.eval(1).norm() < 1e-15);
        assert!(TrigPolynomial::from_frequencies(vec![c(1.0, 0.0)], vec![c(1.1, 0.0)]).is_err());
    }

    #[test]
    fn stream_matches_direct_powering_far_out() {
        let p = TrigPolynomial::from_args(vec![c(0.7, 0.1), c(-0.3, 0.4)], vec![2.0 * PI * 0.618_033_988_7, 1.234]).unwrap();
        let mut s = p.stream();
        let streamed = s.value_at(1_000_000);
        assert!((streamed - p.eval(1_000_000)).norm() <= 1e-10);
    }

    #[test]
    fn stream_iterator_agrees_with_value_at() {
        let p = TrigPolynomial::from_args(vec![c(1.0, 0.0)], vec![0.3]).unwrap();
        let it: Vec<_> = p.stream().take(5).collect();
        for (k, v) in it.iter().enumerate() {
            assert!((v - p.eval(k as u64)).norm() < 1e-14);
        }
    }

    #[test]
    fn besicovich_examples() {
        let p = TrigPolynomial::from_args(vec![c(0.5, 0.0), c(0.0, 1.0)], vec![0.4, 2.2]).unwrap();
        let beta = WeightSequence::trig_poly(p.clone());
        assert!(besicovich_deviation(&beta, &p, 500).unwrap() < 1e-12);

        let alt = WeightSequence::trig_poly(alternating());
        for n in [1, 7, 100] {
            let d = besicovich_deviation(&alt, &TrigPolynomial::zero(), n).unwrap();
            assert!((d - 1.0).abs() < 1e-12);
        }

        // Oracle: the deviation is exactly the harmonic number H_n over n.
        let perturbed = WeightSequence::trig_poly_plus_decay(alternating(), DecayRule::Harmonic).unwrap();
        let harmonic: f64 = (1..=1000).map(|j| 1.0 / j as f64).sum();
        let d = besicovich_deviation(&perturbed, &alternating(), 1000).unwrap();
        assert!((d - harmonic / 1000.0).abs() < 1e-12);
        assert!((d - 0.0075).abs() < 1e-4);

        let cert = besicovich_certificate(&perturbed, &alternating(), 0.05, 128, 4096).unwrap();
        assert!(cert.sustained);
        assert_eq!(cert.checkpoints.len(), 6);
        assert!(!besicovich_certificate(&perturbed, &alternating(), 0.05, 1, 4096).unwrap().sustained);
    }

    #[test]
    fn correlation_examples() {
        let ones = WeightSequence::ones();
        assert_eq!(correlation_estimate(&ones, 5, 10).unwrap(), c(1.0, 0.0));
        let lambda = Complex64::cis(0.77);
        let geo = WeightSequence::trig_poly(TrigPolynomial::from_frequencies(vec![c(1.0, 0.0)], vec![lambda]).unwrap());
        for n in [0, 3, 50] {
            assert!((correlation_estimate(&geo, 4, n).unwrap() - lambda.powu(4)).norm() < 1e-12);
            assert!((correlation_estimate(&geo, -4, n).unwrap() - lambda.powu(4).conj()).norm() < 1e-12);
        }
        let alt = WeightSequence::trig_poly(alternating());
        assert!((correlation_estimate(&alt, 3, 20).unwrap() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn correlation_of_trig_poly_converges_like_one_over_n() {
        let r = [c(1.0, 0.0), c(0.5, -0.5)];
        let args = [0.9, 2.4];
        let p = WeightSequence::trig_poly(TrigPolynomial::from_args(r.to_vec(), args.to_vec()).unwrap());
        let m = 3;
        let limit: Complex64 = r
            .iter()
            .zip(args)
            .map(|(rj, t)| rj.norm_sqr() * Complex64::cis(t * m as f64))
            .sum();
        for n in [100, 1000, 10_000] {
            let err = (correlation_estimate(&p, m, n).unwrap() - limit).norm();
            assert!(err * n as f64 <= 20.0, "n = {n}, err = {err}");
        }
    }

    #[test]
    fn derived_weights() {
        let (_, ind) = derive_weights(DerivedWeights::Indicator(SubsequenceSpec::evens()), 6).unwrap();
        let re: Vec<f64> = ind.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);

        let evens = WeightSequence::indicator(SubsequenceSpec::evens()).unwrap();
        let (w, same) = derive_weights(DerivedWeights::Product(evens.clone(), WeightSequence::ones()), 6).unwrap();
        assert_eq!(same, ind);
        assert_eq!(w.bound(), 1.0);

        let beta = WeightSequence::explicit((0..10).map(|j| c(j as f64, 1.0)).collect()).unwrap();
        let (w, vals) = derive_weights(DerivedWeights::Product(evens, beta.clone()), 10).unwrap();
        for j in 0..10 {
            let want = if j % 2 == 0 { beta.value_at(j as u64).unwrap() } else { c(0.0, 0.0) };
            assert_eq!(vals[j], want);
        }
        assert_eq!(w.bound(), beta.bound());
    }

    #[test]
    fn bounds_dominate_materialized_prefixes() {
        let seqs = vec![
            WeightSequence::constant(c(0.0, -2.0)),
            WeightSequence::trig_poly(TrigPolynomial::from_args(vec![c(1.0, 1.0), c(-0.5, 0.0)], vec![0.3, 1.9]).unwrap()),
            WeightSequence::trig_poly_plus_decay(alternating(), DecayRule::Geometric { ratio: -0.9 }).unwrap(),
            WeightSequence::indicator(SubsequenceSpec::Blocks(crate::subsequence::IntervalBlocks::Squares)).unwrap(),
        ];
        for w in seqs {
            let max = w.prefix(2000).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(max <= w.bound() + 1e-12, "{w:?}");
        }
    }

    #[test]
    fn explicit_weights_run_out() {
        let w = WeightSequence::explicit(vec![c(1.0, 0.0); 3]).unwrap();
        assert!(w.prefix(4).is_err());
        assert!(WeightSequence::trig_poly_plus_decay(alternating(), DecayRule::Geometric { ratio: 1.0 }).is_err());
    }

    #[test]
    fn cursor_rejects_backward_moves() {
        let w = WeightSequence::ones();
        let mut cur = w.cursor();
        cur.value_at(3).unwrap();
        assert!(cur.value_at(2).is_err());
    }

    #[test]
    fn json_forms() {
        let w: WeightSequence = serde_json::from_str(r#"{"kind":"trig_poly","r":[1.0,[0.0,0.5]],"lambda_args":[0.0,3.14]}"#).unwrap();
        assert_eq!(w.bound(), 1.5);
        let w: WeightSequence = serde_json::from_str(
            r#"{"kind":"product","left":{"kind":"indicator","sequence":{"kind":"arithmetic","stride":2}},"right":{"kind":"constant","c":2.0}}"#,
        )
        .unwrap();
        assert_eq!(w.prefix(3).unwrap(), vec![c(2.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<WeightSequence>(&json).unwrap(), w);
        assert!(serde_json::from_str::<WeightSequence>(r#"{"kind":"constant","c":1.0,"x":0}"#).is_err());
    }
}
