//! Strictly increasing subsequences `k_0 < k_1 < ...` of `ℕ₀`: explicit lists,
//! arithmetic progressions, complements of sparse sets, block sequences and
//! return times of an irrational rotation to an arc.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cap on rotation steps while searching for return times.
pub const ROTATION_ITERATION_CAP: u64 = 1_000_000_000;
/// Slack toward inclusion at the left end of an arc.
pub const ARC_BOUNDARY_SLACK: f64 = 1e-12;
/// Asserted angles within this distance of `p/q`, `q ≤ RATIONAL_DENOMINATOR_LIMIT`,
/// are rejected as rational.
pub const RATIONAL_TOL: f64 = 1e-12;
pub const RATIONAL_DENOMINATOR_LIMIT: u64 = 10_000;

/// Enumerable sets that are removed from `ℕ₀` by
/// [`SubsequenceSpec::ComplementOfSparse`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseRule {
    Empty,
    Squares,
    PowersOfTwo,
    /// `{0, m, 2m, ...}`; density `1/m`, so not sparse for any `m`.
    Multiples(u64),
    Explicit(Vec<u64>),
}

impl SparseRule {
    /// Whether the removed set has density zero, i.e. the complement is a
    /// density-one sequence.
    pub fn has_density_zero(&self) -> bool {
        !matches!(self, SparseRule::Multiples(_))
    }

    fn validate(&self) -> Result<()> {
        match self {
            SparseRule::Multiples(0) => Err(Error::InvalidSequence("multiples of 0".into())),
            SparseRule::Explicit(v) if !strictly_increasing(v) => Err(Error::InvalidSequence(
                "explicit sparse set must be strictly increasing".into(),
            )),
            _ => Ok(()),
        }
    }

    fn members(&self) -> Box<dyn Iterator<Item = u64> + Send + '_> {
        match self {
            SparseRule::Empty => Box::new(std::iter::empty()),
            SparseRule::Squares => Box::new((0u64..).map(|j| j * j)),
            SparseRule::PowersOfTwo => Box::new((0u32..64).map(|e| 1u64 << e)),
            SparseRule::Multiples(m) => Box::new((0u64..).map(move |j| j * m)),
            SparseRule::Explicit(v) => Box::new(v.iter().copied()),
        }
    }
}

/// Disjoint integer intervals `I_n = [a_n, b_n]` with `b_n < a_{n+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntervalBlocks {
    /// `I_n = [n², n² + n]`.
    Squares,
    Explicit { intervals: Vec<[u64; 2]> },
}

impl IntervalBlocks {
    pub fn explicit(intervals: Vec<[u64; 2]>) -> Result<Self> {
        let blocks = IntervalBlocks::Explicit { intervals };
        blocks.validate()?;
        Ok(blocks)
    }

    fn validate(&self) -> Result<()> {
        if let IntervalBlocks::Explicit { intervals } = self {
            if intervals.is_empty() {
                return Err(Error::InvalidSequence("no intervals given".into()));
            }
            for (n, iv) in intervals.iter().enumerate() {
                if iv[0] > iv[1] {
                    return Err(Error::InvalidSequence(format!(
                        "interval {n} = [{}, {}] is empty",
                        iv[0], iv[1]
                    )));
                }
            }
            for (n, w) in intervals.windows(2).enumerate() {
                if w[0][1] >= w[1][0] {
                    return Err(Error::InvalidSequence(format!(
                        "b_{n} = {} is not below a_{} = {}",
                        w[0][1],
                        n + 1,
                        w[1][0]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn intervals(&self) -> Box<dyn Iterator<Item = (u64, u64)> + Send + '_> {
        match self {
            IntervalBlocks::Squares => Box::new((0u64..).map(|n| (n * n, n * n + n))),
            IntervalBlocks::Explicit { intervals } => Box::new(intervals.iter().map(|iv| (iv[0], iv[1]))),
        }
    }

    /// `(interval index, term)` pairs in increasing order of the term.
    fn indexed_terms(&self) -> impl Iterator<Item = (usize, u64)> + Send + '_ {
        self.intervals()
            .enumerate()
            .flat_map(|(n, (a, b))| (a..=b).map(move |k| (n, k)))
    }
}

/// How the irrationality of a rotation angle is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attestation {
    Golden,
    SqrtTwoMinusOne,
    UserAsserted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationAngle {
    value: f64,
    attestation: Attestation,
}

impl RotationAngle {
    /// `(√5 − 1)/2`.
    pub fn golden() -> Self {
        Self {
            value: (5f64.sqrt() - 1.0) / 2.0,
            attestation: Attestation::Golden,
        }
    }

    /// `√2 − 1`.
    pub fn sqrt_two_minus_one() -> Self {
        Self {
            value: std::f64::consts::SQRT_2 - 1.0,
            attestation: Attestation::SqrtTwoMinusOne,
        }
    }

    /// A caller-asserted irrational angle. Irrationality cannot be decided
    /// from a double; values in `(0, 1)` that sit within `RATIONAL_TOL` of a
    /// fraction with a small denominator are still rejected.
    pub fn asserted(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0 && value < 1.0) {
            return Err(Error::InvalidApparatus {
                field: "alpha",
                reason: format!("{value} is not in (0, 1)"),
            });
        }
        if let Some((p, q)) = nearby_fraction(value) {
            return Err(Error::InvalidApparatus {
                field: "alpha",
                reason: format!("{value} is numerically the rational {p}/{q}"),
            });
        }
        Ok(Self {
            value,
            attestation: Attestation::UserAsserted,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn attestation(&self) -> Attestation {
        self.attestation
    }
}

fn nearby_fraction(x: f64) -> Option<(u64, u64)> {
    (1..=RATIONAL_DENOMINATOR_LIMIT).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= RATIONAL_TOL).then_some((p as u64, q))
    })
}

/// Rotation `ω ↦ ω + α mod 1` of the circle with Lebesgue measure, the arc
/// `Y = [u, v)` and the base point `ω₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Apparatus {
    alpha: RotationAngle,
    arc: (f64, f64),
    omega0: f64,
}

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

fn to_fixed(x: f64) -> u64 {
    // x in [0, 1); the product is exact and the cast truncates below 2^-64.
    (x * TWO_POW_64) as u64
}

impl Apparatus {
    /// `0 ≤ u < v ≤ 1`; the full circle `[0, 1)` is allowed.
    pub fn new(alpha: RotationAngle, arc: (f64, f64), omega0: f64) -> Result<Self> {
        let (u, v) = arc;
        if !(u.is_finite() && v.is_finite() && 0.0 <= u && u < v && v <= 1.0) {
            return Err(Error::InvalidApparatus {
                field: "Y",
                reason: format!("[{u}, {v}) is not an arc with 0 <= u < v <= 1"),
            });
        }
        if !(omega0.is_finite() && (0.0..1.0).contains(&omega0)) {
            return Err(Error::InvalidApparatus {
                field: "omega0",
                reason: format!("{omega0} is not in [0, 1)"),
            });
        }
        Ok(Self { alpha, arc, omega0 })
    }

    pub fn alpha(&self) -> RotationAngle {
        self.alpha
    }

    pub fn arc(&self) -> (f64, f64) {
        self.arc
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// `μ(Y) = v − u`.
    pub fn arc_length(&self) -> f64 {
        self.arc.1 - self.arc.0
    }

    /// `χ_Y(p)` for `p ∈ [0, 1]`, measured along the circle from `u`.
    pub fn contains(&self, p: f64) -> bool {
        let (u, v) = self.arc;
        let mut d = p - u;
        if d < 0.0 {
            d += 1.0;
        }
        if d >= 1.0 - ARC_BOUNDARY_SLACK {
            d = 0.0;
        }
        d < v - u
    }

    /// Orbit points `φ^k(ω₀)` in 64-bit fixed point, where addition modulo 1
    /// is wrapping addition.
    pub fn orbit(&self) -> impl Iterator<Item = f64> + Send {
        let step = to_fixed(self.alpha.value);
        let mut w = to_fixed(self.omega0);
        std::iter::from_fn(move || {
            let p = w as f64 / TWO_POW_64;
            w = w.wrapping_add(step);
            Some(p)
        })
    }

    fn return_times(&self) -> impl Iterator<Item = Result<u64>> + Send {
        let this = *self;
        let mut orbit = self.orbit();
        let mut k: u64 = 0;
        let mut found = 0usize;
        let mut failed = false;
        std::iter::from_fn(move || {
            if failed {
                return None;
            }
            while k < ROTATION_ITERATION_CAP {
                let p = orbit.next().expect("orbit is infinite");
                let t = k;
                k += 1;
                if this.contains(p) {
                    found += 1;
                    return Some(Ok(t));
                }
            }
            failed = true;
            Some(Err(Error::IterationCap {
                cap: ROTATION_ITERATION_CAP,
                found,
            }))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubsequenceSpec {
    Explicit(Vec<u64>),
    Full,
    ArithmeticProgression { stride: u64, offset: u64 },
    ComplementOfSparse(SparseRule),
    Blocks(IntervalBlocks),
    RotationReturnTimes(Apparatus),
}

fn strictly_increasing(v: &[u64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub type Terms<'a> = Box<dyn Iterator<Item = Result<u64>> + Send + 'a>;

impl SubsequenceSpec {
    pub fn explicit(terms: Vec<u64>) -> Result<Self> {
        let s = SubsequenceSpec::Explicit(terms);
        s.validate()?;
        Ok(s)
    }

    pub fn evens() -> Self {
        SubsequenceSpec::ArithmeticProgression { stride: 2, offset: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SubsequenceSpec::Explicit(v) if !strictly_increasing(v) => Err(Error::InvalidSequence(
                "explicit terms must be strictly increasing".into(),
            )),
            SubsequenceSpec::ArithmeticProgression { stride: 0, .. } => {
                Err(Error::InvalidSequence("stride must be at least 1".into()))
            }
            SubsequenceSpec::ComplementOfSparse(rule) => rule.validate(),
            SubsequenceSpec::Blocks(b) => b.validate(),
            _ => Ok(()),
        }
    }

    /// Lazily generated terms. Only rotation return times can fail, when the
    /// iteration cap is hit.
    pub fn terms(&self) -> Terms<'_> {
        match self {
            SubsequenceSpec::Explicit(v) => Box::new(v.iter().copied().map(Ok)),
            SubsequenceSpec::Full => Box::new((0u64..).map(Ok)),
            SubsequenceSpec::ArithmeticProgression { stride, offset } => {
                let (s, o) = (*stride, *offset);
                Box::new((0u64..).map(move |j| Ok(o + j * s)))
            }
            SubsequenceSpec::ComplementOfSparse(rule) => {
                let mut sparse = rule.members().peekable();
                Box::new((0u64..).filter_map(move |j| {
                    while sparse.next_if(|&s| s < j).is_some() {}
                    if sparse.next_if_eq(&j).is_some() {
                        None
                    } else {
                        Some(Ok(j))
                    }
                }))
            }
            SubsequenceSpec::Blocks(b) => Box::new(b.indexed_terms().map(|(_, k)| Ok(k))),
            SubsequenceSpec::RotationReturnTimes(a) => Box::new(a.return_times()),
        }
    }

    /// The first `n` terms.
    pub fn prefix(&self, n: usize) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(n);
        for t in self.terms().take(n) {
            out.push(t?);
        }
        if out.len() < n {
            return Err(Error::SequenceExhausted {
                requested: n,
                available: out.len(),
            });
        }
        Ok(out)
    }

    /// Every term `≤ max`.
    pub fn terms_up_to(&self, max: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for t in self.terms() {
            let t = t?;
            if t > max {
                break;
            }
            out.push(t);
        }
        Ok(out)
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self {
            SubsequenceSpec::Explicit(v) => format!("explicit({} terms)", v.len()),
            SubsequenceSpec::Full => "full".into(),
            SubsequenceSpec::ArithmeticProgression { stride, offset } => format!("{offset} + {stride}j"),
            SubsequenceSpec::ComplementOfSparse(r) => format!("complement of {r:?}").to_lowercase(),
            SubsequenceSpec::Blocks(IntervalBlocks::Squares) => "blocks [n^2, n^2+n]".into(),
            SubsequenceSpec::Blocks(IntervalBlocks::Explicit { intervals }) => {
                format!("blocks({} intervals)", intervals.len())
            }
            SubsequenceSpec::RotationReturnTimes(a) => format!(
                "rotation alpha={} Y=[{}, {}) omega0={}",
                a.alpha.value, a.arc.0, a.arc.1, a.omega0
            ),
        }
    }
}

/// `c(n) = card({k_j} ∩ {0..n}) = max{j : k_j ≤ n} + 1` over a sorted prefix.
pub fn counting(prefix: &[u64], n: u64) -> usize {
    prefix.partition_point(|&k| k <= n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub n: u64,
    /// `card({0..n} ∩ k) / (n + 1)`.
    pub partial_density: f64,
    /// Minimum of the partial densities over `[window_start, n]`, a proxy for
    /// the lower density.
    pub lower_estimate: f64,
    pub window_start: u64,
}

/// Partial density at `n` and the running-minimum lower-density proxy over
/// `[window_start, n]` (default window start `n / 10`).
pub fn partial_density(k: &SubsequenceSpec, n: u64, window_start: Option<u64>) -> Result<DensityEstimate> {
    let window_start = window_start.unwrap_or(n / 10).min(n);
    let mut terms = k.terms().peekable();
    let mut count: u64 = 0;
    let mut lower = f64::INFINITY;
    for m in 0..=n {
        while let Some(t) = terms.next_if(|t| matches!(t, Ok(v) if *v <= m) || t.is_err()) {
            t?;
            count += 1;
        }
        if m >= window_start {
            lower = lower.min(count as f64 / (m + 1) as f64);
        }
    }
    Ok(DensityEstimate {
        n,
        partial_density: count as f64 / (n + 1) as f64,
        lower_estimate: lower,
        window_start,
    })
}

/// `max_{1 ≤ n ≤ N} k_n / n`; a bound that stays finite as `N` grows certifies
/// positive lower density.
pub fn sup_ratio(k: &SubsequenceSpec, big_n: usize) -> Result<f64> {
    if big_n == 0 {
        return Err(crate::error::invalid("N", "must be at least 1"));
    }
    let prefix = k.prefix(big_n + 1)?;
    Ok((1..=big_n)
        .map(|n| prefix[n] as f64 / n as f64)
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPrefix {
    pub k: Vec<u64>,
    /// `N_I(n)`: index of the interval containing `k_n`.
    pub interval_index: Vec<usize>,
    /// Endpoints `(a_m, b_m)` of every interval touched by the prefix.
    pub intervals: Vec<(u64, u64)>,
}

/// First `N` terms of a block sequence together with `N_I`.
pub fn block_sequence(blocks: &IntervalBlocks, big_n: usize) -> Result<BlockPrefix> {
    if big_n == 0 {
        return Err(crate::error::invalid("N", "must be at least 1"));
    }
    blocks.validate()?;
    let mut k = Vec::with_capacity(big_n);
    let mut interval_index = Vec::with_capacity(big_n);
    for (n, t) in blocks.indexed_terms().take(big_n) {
        k.push(t);
        interval_index.push(n);
    }
    if k.len() < big_n {
        return Err(Error::SequenceExhausted {
            requested: big_n,
            available: k.len(),
        });
    }
    let used = interval_index.last().map_or(0, |&n| n + 1);
    let intervals = blocks.intervals().take(used).collect();
    Ok(BlockPrefix {
        k,
        interval_index,
        intervals,
    })
}

/// First `N` return times of the orbit of `ω₀` to `Y`.
pub fn uniform_sequence_from_rotation(apparatus: &Apparatus, big_n: usize) -> Result<Vec<u64>> {
    SubsequenceSpec::RotationReturnTimes(*apparatus).prefix(big_n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplementPrefix {
    pub terms: Vec<u64>,
    /// False when the removed set has positive density, so the complement
    /// does not satisfy a density-one hypothesis.
    pub density_one: bool,
}

/// Increasing enumeration of `ℕ₀` minus the sparse set.
pub fn density_one_complement(rule: &SparseRule, big_n: usize) -> Result<ComplementPrefix> {
    rule.validate()?;
    let terms = SubsequenceSpec::ComplementOfSparse(rule.clone()).prefix(big_n)?;
    Ok(ComplementPrefix {
        terms,
        density_one: rule.has_density_zero(),
    })
}

/// JSON form of a rotation angle: a named constant, or an explicit value
/// carrying an irrationality assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaData {
    Named(String),
    Asserted { value: f64, irrational: bool },
    Bare(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubsequenceData {
    Explicit {
        terms: Vec<u64>,
    },
    Full {},
    Arithmetic {
        stride: u64,
        #[serde(default)]
        offset: u64,
    },
    Complement {
        sparse: SparseRule,
    },
    Blocks {
        rule: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervals: Option<Vec<[u64; 2]>>,
    },
    Rotation {
        alpha: AlphaData,
        #[serde(rename = "Y")]
        arc: [f64; 2],
        #[serde(default)]
        omega0: f64,
    },
}

impl TryFrom<&AlphaData> for RotationAngle {
    type Error = Error;

    fn try_from(a: &AlphaData) -> Result<Self> {
        match a {
            AlphaData::Named(n) => match n.as_str() {
                "golden" => Ok(RotationAngle::golden()),
                "sqrt2_minus_1" | "silver" => Ok(RotationAngle::sqrt_two_minus_one()),
                other => Err(Error::InvalidApparatus {
                    field: "alpha",
                    reason: format!("unknown named angle `{other}`"),
                }),
            },
            AlphaData::Asserted { value, irrational: true } => RotationAngle::asserted(*value),
            AlphaData::Asserted { value, irrational: false } => Err(Error::InvalidApparatus {
                field: "alpha",
                reason: format!("{value} is declared rational; return times need an irrational rotation"),
            }),
            AlphaData::Bare(v) => Err(Error::InvalidApparatus {
                field: "alpha",
                reason: format!(
                    "bare number {v} carries no irrationality attestation; use a named angle or {{\"value\": {v}, \"irrational\": true}}"
                ),
            }),
        }
    }
}

impl From<RotationAngle> for AlphaData {
    fn from(a: RotationAngle) -> Self {
        match a.attestation {
            Attestation::Golden => AlphaData::Named("golden".into()),
            Attestation::SqrtTwoMinusOne => AlphaData::Named("sqrt2_minus_1".into()),
            Attestation::UserAsserted => AlphaData::Asserted {
                value: a.value,
                irrational: true,
            },
        }
    }
}

impl TryFrom<&SubsequenceData> for SubsequenceSpec {
    type Error = Error;

    fn try_from(d: &SubsequenceData) -> Result<Self> {
        let spec = match d {
            SubsequenceData::Explicit { terms } => SubsequenceSpec::Explicit(terms.clone()),
            SubsequenceData::Full {} => SubsequenceSpec::Full,
            SubsequenceData::Arithmetic { stride, offset } => SubsequenceSpec::ArithmeticProgression {
                stride: *stride,
                offset: *offset,
            },
            SubsequenceData::Complement { sparse } => SubsequenceSpec::ComplementOfSparse(sparse.clone()),
            SubsequenceData::Blocks { rule, intervals } => match (rule.as_str(), intervals) {
                ("squares", None) => SubsequenceSpec::Blocks(IntervalBlocks::Squares),
                ("explicit", Some(iv)) => SubsequenceSpec::Blocks(IntervalBlocks::Explicit { intervals: iv.clone() }),
                (r, _) => {
                    return Err(Error::InvalidSequence(format!(
                        "block rule `{r}` needs `squares` (no intervals) or `explicit` with intervals"
                    )))
                }
            },
            SubsequenceData::Rotation { alpha, arc, omega0 } => SubsequenceSpec::RotationReturnTimes(
                Apparatus::new(RotationAngle::try_from(alpha)?, (arc[0], arc[1]), *omega0)?,
            ),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&SubsequenceSpec> for SubsequenceData {
    fn from(s: &SubsequenceSpec) -> Self {
        match s {
            SubsequenceSpec::Explicit(v) => SubsequenceData::Explicit { terms: v.clone() },
            SubsequenceSpec::Full => SubsequenceData::Full {},
            SubsequenceSpec::ArithmeticProgression { stride, offset } => SubsequenceData::Arithmetic {
                stride: *stride,
                offset: *offset,
            },
            SubsequenceSpec::ComplementOfSparse(r) => SubsequenceData::Complement { sparse: r.clone() },
            SubsequenceSpec::Blocks(IntervalBlocks::Squares) => SubsequenceData::Blocks {
                rule: "squares".into(),
                intervals: None,
            },
            SubsequenceSpec::Blocks(IntervalBlocks::Explicit { intervals }) => SubsequenceData::Blocks {
                rule: "explicit".into(),
                intervals: Some(intervals.clone()),
            },
            SubsequenceSpec::RotationReturnTimes(a) => SubsequenceData::Rotation {
                alpha: a.alpha.into(),
                arc: [a.arc.0, a.arc.1],
                omega0: a.omega0,
            },
        }
    }
}

impl Serialize for SubsequenceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubsequenceData::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubsequenceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = SubsequenceData::deserialize(d)?;
        SubsequenceSpec::try_from(&data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_half() -> Apparatus {
        Apparatus::new(RotationAngle::golden(), (0.0, 0.5), 0.0).unwrap()
    }

    #[test]
    fn full_and_evens_densities() {
        let d = partial_density(&SubsequenceSpec::Full, 57, None).unwrap();
        assert_eq!(d.partial_density, 1.0);
        assert_eq!(d.lower_estimate, 1.0);
        let d = partial_density(&SubsequenceSpec::evens(), 9, None).unwrap();
        assert_eq!(d.partial_density, 0.5);
    }

    #[test]
    fn sup_ratio_examples() {
        assert_eq!(sup_ratio(&SubsequenceSpec::Full, 100).unwrap(), 1.0);
        let two_j = SubsequenceSpec::ArithmeticProgression { stride: 2, offset: 0 };
        assert_eq!(sup_ratio(&two_j, 100).unwrap(), 2.0);
        assert!(sup_ratio(&SubsequenceSpec::Full, 0).is_err());
    }

    #[test]
    fn square_blocks_prefix_and_interval_index() {
        let p = block_sequence(&IntervalBlocks::Squares, 11).unwrap();
        assert_eq!(p.k, vec![0, 1, 2, 4, 5, 6, 9, 10, 11, 12, 16]);
        assert_eq!(&p.interval_index[..7], &[0, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn single_interval_block() {
        let b = IntervalBlocks::explicit(vec![[0, 9]]).unwrap();
        let p = block_sequence(&b, 10).unwrap();
        assert_eq!(p.k, (0..10).collect::<Vec<_>>());
        assert!(p.interval_index.iter().all(|&n| n == 0));
        assert!(matches!(block_sequence(&b, 11), Err(Error::SequenceExhausted { .. })));
    }

    #[test]
    fn overlapping_intervals_are_rejected() {
        assert!(IntervalBlocks::explicit(vec![[0, 3], [3, 5]]).is_err());
        assert!(IntervalBlocks::explicit(vec![[4, 3]]).is_err());
        assert!(IntervalBlocks::explicit(vec![[0, 3], [4, 5]]).is_ok());
    }

    #[test]
    fn rotation_examples() {
        let a = golden_half();
        assert_eq!(uniform_sequence_from_rotation(&a, 1).unwrap(), vec![0]);
        let full = Apparatus::new(RotationAngle::golden(), (0.0, 1.0), 0.3).unwrap();
        assert_eq!(uniform_sequence_from_rotation(&full, 50).unwrap(), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn apparatus_validation() {
        assert!(RotationAngle::asserted(0.5).is_err());
        assert!(RotationAngle::asserted(1.0 / 3.0).is_err());
        assert!(RotationAngle::asserted(std::f64::consts::PI - 3.0).is_ok());
        assert!(Apparatus::new(RotationAngle::golden(), (0.5, 0.5), 0.0).is_err());
        assert!(Apparatus::new(RotationAngle::golden(), (0.0, 1.5), 0.0).is_err());
        assert!(Apparatus::new(RotationAngle::golden(), (0.0, 0.5), 1.0).is_err());
    }

    #[test]
    fn arc_membership_wraps_with_slack_at_the_left_end() {
        let a = Apparatus::new(RotationAngle::golden(), (0.0, 0.5), 0.0).unwrap();
        assert!(a.contains(0.0));
        assert!(a.contains(1.0 - 1e-13));
        assert!(!a.contains(0.5));
        assert!(!a.contains(0.75));
        let b = Apparatus::new(RotationAngle::golden(), (0.25, 0.5), 0.0).unwrap();
        assert!(b.contains(0.25 - 1e-13));
        assert!(!b.contains(0.2));
    }

    #[test]
    fn complement_examples() {
        let sq = density_one_complement(&SparseRule::Squares, 10).unwrap();
        assert_eq!(sq.terms, vec![2, 3, 5, 6, 7, 8, 10, 11, 12, 13]);
        assert!(sq.density_one);
        let ev = density_one_complement(&SparseRule::Multiples(2), 5).unwrap();
        assert_eq!(ev.terms, vec![1, 3, 5, 7, 9]);
        assert!(!ev.density_one);
        let none = density_one_complement(&SparseRule::Empty, 6).unwrap();
        assert_eq!(none.terms, SubsequenceSpec::Full.prefix(6).unwrap());
        let p2 = density_one_complement(&SparseRule::PowersOfTwo, 6).unwrap();
        assert_eq!(p2.terms, vec![0, 3, 5, 6, 7, 9]);
    }

    #[test]
    fn complement_of_squares_is_nearly_full() {
        // {0..10^6} holds the 1001 squares 0^2..1000^2.
        let d = partial_density(&SubsequenceSpec::ComplementOfSparse(SparseRule::Squares), 1_000_000, None).unwrap();
        assert_eq!(d.partial_density, 999_000.0 / 1_000_001.0);
        assert!(d.partial_density > 0.9989);
    }

    #[test]
    fn counting_matches_definition() {
        let k = [0, 2, 3, 7];
        assert_eq!(counting(&k, 0), 1);
        assert_eq!(counting(&k, 1), 1);
        assert_eq!(counting(&k, 6), 3);
        assert_eq!(counting(&k, 100), 4);
    }

    #[test]
    fn explicit_must_increase() {
        assert!(SubsequenceSpec::explicit(vec![1, 1]).is_err());
        assert!(matches!(
            SubsequenceSpec::explicit(vec![1, 4]).unwrap().prefix(3),
            Err(Error::SequenceExhausted { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn json_forms() {
        let s: SubsequenceSpec =
            serde_json::from_str(r#"{"kind":"rotation","alpha":"golden","Y":[0.0,0.5],"omega0":0.0}"#).unwrap();
        assert_eq!(s, SubsequenceSpec::RotationReturnTimes(golden_half()));
        let s: SubsequenceSpec = serde_json::from_str(r#"{"kind":"blocks","rule":"squares"}"#).unwrap();
        assert_eq!(s, SubsequenceSpec::Blocks(IntervalBlocks::Squares));
        let s: SubsequenceSpec =
            serde_json::from_str(r#"{"kind":"blocks","rule":"explicit","intervals":[[0,2],[5,6]]}"#).unwrap();
        assert_eq!(s.prefix(5).unwrap(), vec![0, 1, 2, 5, 6]);
        let s: SubsequenceSpec = serde_json::from_str(r#"{"kind":"complement","sparse":"squares"}"#).unwrap();
        assert_eq!(s, SubsequenceSpec::ComplementOfSparse(SparseRule::Squares));
        let s: SubsequenceSpec = serde_json::from_str(r#"{"kind":"complement","sparse":{"multiples":2}}"#).unwrap();
        assert_eq!(s, SubsequenceSpec::ComplementOfSparse(SparseRule::Multiples(2)));

        let err = serde_json::from_str::<SubsequenceSpec>(r#"{"kind":"rotation","alpha":0.5,"Y":[0.0,0.5]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("alpha"), "{err}");
        assert!(serde_json::from_str::<SubsequenceSpec>(
            r#"{"kind":"rotation","alpha":{"value":0.25,"irrational":true},"Y":[0.0,0.5]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<SubsequenceSpec>(r#"{"kind":"full","extra":1}"#).is_err());

        for spec in [
            SubsequenceSpec::Full,
            SubsequenceSpec::evens(),
            SubsequenceSpec::Blocks(IntervalBlocks::Squares),
            SubsequenceSpec::RotationReturnTimes(golden_half()),
        ] {
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<SubsequenceSpec>(&json).unwrap(), spec);
        }
    }
}
