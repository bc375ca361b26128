//! Projection witnesses for (bilateral) almost-uniform convergence and for
//! equicontinuity in measure at zero.
//!
//! Everything here works on finitely many terms, so a "converging" verdict is
//! empirical: it says a witness with small residual exists on the sampled
//! tail, nothing about the infinite tail.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{ElementData, OperatorElement, Projection};
use crate::averages::{AverageStream, Stride};
use crate::ds::{self, AlgebraMap};
use crate::error::{invalid, Error, Result};
use crate::random;
use crate::subsequence::{block_sequence, sup_ratio, SubsequenceSpec};
use crate::weights::WeightSequence;

pub const DEFAULT_DELTA: f64 = 1e-2;
pub const DEFAULT_TAIL_BASE: usize = 16;
/// Tolerance for the witness guarantees `‖e y e‖_∞ ≤ λ` and `‖y e‖_∞ ≤ λ`.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `‖e y_n e‖_∞`, for b.a.u. convergence.
    #[default]
    Bilateral,
    /// `‖y_n e‖_∞`, for a.u. convergence.
    Onesided,
}

/// A projection `e` with `τ(e⊥) ≤ ε` that bounds every member of a family by
/// `λ`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub projection: Projection,
    pub lambda: f64,
    pub complement_trace: f64,
}

/// Bilateral: `b = Σ |y_n|` (self-adjoint `y_n` only), `e = 1_{[0, λ]}(b)`, and
/// then `−e b e ≤ e y_n e ≤ e b e` gives `‖e y_n e‖_∞ ≤ λ`.
/// One-sided: `b = Σ y_n* y_n`, `e = 1_{[0, λ²]}(b)`, so `‖y_n e‖_∞² ≤ ‖e b e‖_∞ ≤ λ²`.
/// `λ` is the smallest spectral threshold whose cut keeps `τ(e⊥) ≤ ε`.
pub fn find_witness(ys: &[OperatorElement], eps: f64, mode: Mode) -> Result<Witness> {
    let first = ys.first().ok_or_else(|| invalid("ys", "family is empty"))?;
    let alg = first.algebra().clone();
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("epsilon", format!("must be positive, got {eps}")));
    }
    if eps >= alg.tau_one() {
        return Err(invalid(
            "epsilon",
            format!("budget {eps} >= tau(1) = {} makes every family trivially bounded", alg.tau_one()),
        ));
    }
    let mut b = OperatorElement::zeros(&alg);
    for y in ys {
        y.check_algebra(&alg)?;
        match mode {
            Mode::Bilateral => b += &y.symmetrized()?.abs()?,
            Mode::Onesided => b += &(&y.adjoint() * y),
        }
    }
    let spectrum = b.real_part().spectral_decomposition()?;
    let mut eig = spectrum.weighted_eigenvalues();
    eig.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Remove the largest eigenvalues while the removed weight fits the budget.
    let mut removed = 0.0;
    let mut cut = 0;
    while cut < eig.len() && removed + eig[cut].1 <= eps {
        removed += eig[cut].1;
        cut += 1;
    }
    let threshold = eig.get(cut).map_or(0.0, |e| e.0.max(0.0));
    let projection = spectrum.projection(f64::NEG_INFINITY, threshold);
    let lambda = match mode {
        Mode::Bilateral => threshold,
        Mode::Onesided => threshold.sqrt(),
    };
    let complement_trace = projection.complement_trace();
    Ok(Witness {
        projection,
        lambda,
        complement_trace,
    })
}

/// `b.a.u.` splits every term into its self-adjoint real and imaginary parts.
fn witness_family(ys: &[OperatorElement], mode: Mode) -> Vec<OperatorElement> {
    match mode {
        Mode::Bilateral => ys.iter().flat_map(|y| [y.real_part(), y.imag_part()]).collect(),
        Mode::Onesided => ys.to_vec(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Converging,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    /// First `n` of the tail.
    pub m: usize,
    pub r_bilateral: f64,
    pub r_onesided: f64,
    /// `τ(e⊥)` of the witness in the report's mode.
    pub trace_complement: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// A tail residual below this counts as converging.
    pub delta: f64,
    /// Tails start at `base, 2·base, 4·base, ...`.
    pub tail_base: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            tail_base: DEFAULT_TAIL_BASE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportWitness {
    pub tail_start: usize,
    pub lambda: f64,
    pub complement_trace: f64,
    pub ranks: Vec<usize>,
    pub projection: ElementData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub epsilon: f64,
    pub delta: f64,
    pub horizon: usize,
    pub family: String,
    /// Sampled `n` (powers of two and the horizon).
    pub grid: Vec<usize>,
    /// Raw `(m, r_m)` in the report's mode.
    pub residuals: Vec<(usize, f64)>,
    /// Running minimum of `residuals`.
    pub envelope: Vec<(usize, f64)>,
    pub tail: Vec<TailPoint>,
    /// First tail whose residual falls below `delta`, or the last tail.
    pub witness: ReportWitness,
    pub decision: Decision,
}

impl ConvergenceReport {
    /// Columns `n, r_bilateral, r_onesided, trace_complement`, one row per
    /// tail start.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "r_bilateral", "r_onesided", "trace_complement"])?;
        for p in &self.tail {
            w.write_record([
                p.m.to_string(),
                p.r_bilateral.to_string(),
                p.r_onesided.to_string(),
                p.trace_complement.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().map_or(f64::INFINITY, |r| r.1)
    }
}

fn tail_starts(grid: &[usize], base: usize) -> Vec<usize> {
    let starts: Vec<usize> = grid.iter().copied().filter(|&n| n >= base.max(1)).collect();
    if starts.is_empty() {
        vec![*grid.last().expect("grid is nonempty")]
    } else {
        starts
    }
}

/// Tail witnesses for an explicit family `(n, y_n)` sorted by `n`.
pub fn au_report_from_family(
    family: &[(usize, OperatorElement)],
    eps: f64,
    mode: Mode,
    options: ReportOptions,
    description: impl Into<String>,
) -> Result<ConvergenceReport> {
    if family.is_empty() {
        return Err(invalid("family", "no terms"));
    }
    if !(options.delta.is_finite() && options.delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    let grid: Vec<usize> = family.iter().map(|(n, _)| *n).collect();
    let mut tail = Vec::new();
    let mut witnesses = Vec::new();
    for m in tail_starts(&grid, options.tail_base) {
        let ys: Vec<OperatorElement> = family
            .iter()
            .filter(|(n, _)| *n >= m)
            .map(|(_, y)| y.clone())
            .collect();
        let bi = find_witness(&witness_family(&ys, Mode::Bilateral), eps, Mode::Bilateral)?;
        let one = find_witness(&ys, eps, Mode::Onesided)?;
        let chosen = match mode {
            Mode::Bilateral => bi.clone(),
            Mode::Onesided => one.clone(),
        };
        tail.push(TailPoint {
            m,
            r_bilateral: bi.lambda,
            r_onesided: one.lambda,
            trace_complement: chosen.complement_trace,
        });
        witnesses.push((m, chosen));
    }
    let residuals: Vec<(usize, f64)> = tail
        .iter()
        .map(|p| {
            (
                p.m,
                match mode {
                    Mode::Bilateral => p.r_bilateral,
                    Mode::Onesided => p.r_onesided,
                },
            )
        })
        .collect();
    let mut best = f64::INFINITY;
    let envelope = residuals
        .iter()
        .map(|&(m, r)| {
            best = best.min(r);
            (m, best)
        })
        .collect();
    let hit = residuals.iter().position(|&(_, r)| r < options.delta);
    let decision = if hit.is_some() {
        Decision::Converging
    } else {
        Decision::Inconclusive
    };
    let (tail_start, w) = &witnesses[hit.unwrap_or(witnesses.len() - 1)];
    Ok(ConvergenceReport {
        mode,
        epsilon: eps,
        delta: options.delta,
        horizon: *grid.last().expect("nonempty"),
        family: description.into(),
        grid,
        residuals,
        envelope,
        tail,
        witness: ReportWitness {
            tail_start: *tail_start,
            lambda: w.lambda,
            complement_trace: w.complement_trace,
            ranks: w.projection.ranks().to_vec(),
            projection: w.projection.element().to_data(),
        },
        decision,
    })
}

/// The inputs of an average stream.
#[derive(Clone, Copy)]
pub struct StreamSpec<'a> {
    pub op: &'a dyn AlgebraMap,
    pub x: &'a OperatorElement,
    pub weights: &'a WeightSequence,
    pub seq: &'a SubsequenceSpec,
}

impl StreamSpec<'_> {
    pub fn stream(&self, horizon: usize) -> Result<AverageStream<'_>> {
        AverageStream::new(self.op, self.x, self.weights, self.seq, horizon)
    }

    fn describe(&self) -> String {
        let weights = if self.weights.is_constant_one() {
            "beta = 1".to_string()
        } else {
            format!("beta bounded by {}", self.weights.bound())
        };
        format!("k = {}, {}", self.seq.describe(), weights)
    }
}

/// `y_n = M_n − x̂` on the geometric grid up to `N`, then tail witnesses.
pub fn au_report(
    spec: StreamSpec<'_>,
    x_hat: &OperatorElement,
    eps: f64,
    horizon: usize,
    mode: Mode,
    options: ReportOptions,
) -> Result<ConvergenceReport> {
    x_hat.check_algebra(spec.op.algebra())?;
    let grid = Stride::Geometric.grid(horizon);
    let family: Vec<(usize, OperatorElement)> = spec
        .stream(horizon)?
        .collect_at(&grid)?
        .into_iter()
        .map(|(n, m)| (n, &m - x_hat))
        .collect();
    au_report_from_family(&family, eps, mode, options, spec.describe())
}

/// `γ = ε^{1/p} δ / (4^{1/p} · 48 C)`: inputs with `‖x‖_p < γ` admit a
/// projection with `τ(e⊥) ≤ ε` and `sup_n ‖e M_n^β(x) e‖_∞ ≤ δ`.
pub fn buem_gamma(p: f64, eps: f64, delta: f64, c: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(invalid("p", format!("need finite p >= 1, got {p}")));
    }
    for (name, v) in [("epsilon", eps), ("delta", delta), ("C", c)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    Ok(eps.powf(1.0 / p) * delta / (4f64.powf(1.0 / p) * 48.0 * c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuemProbeConfig {
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Averages `M_1 .. M_N` are controlled.
    pub horizon: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Samples are drawn at `γ(δ)` but judged against `check_scale · δ`;
    /// values below one probe the sensitivity of the check.
    #[serde(default = "one")]
    pub check_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuemProbeResult {
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// `C = ‖β‖_∞` (the cached bound of the weights).
    pub c: f64,
    pub gamma: f64,
    /// `K = sup_n k_n / n` for subsequential probes, else 1.
    pub k_scale: f64,
    /// Each sample needs `sup_n ‖e M_n e‖ ≤ threshold = K · check_scale · δ`.
    pub threshold: f64,
    pub samples_attempted: usize,
    pub samples_passed: usize,
    pub worst_sup_norm: f64,
    pub worst_complement_trace: f64,
    /// Samples whose rescaling to `‖x‖_p < γ` underflowed to zero.
    pub underflow: usize,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub sup_norm: f64,
    pub complement_trace: f64,
    pub lambda: f64,
}

/// Witness for one input: built from the averages on the geometric grid,
/// then `sup_n ‖e M_n e‖_∞` (bilateral) or `sup_n ‖M_n e‖_∞` (one-sided) is
/// measured over every `n ≤ N`.
pub fn probe_sample(
    op: &dyn AlgebraMap,
    weights: &WeightSequence,
    seq: &SubsequenceSpec,
    x: &OperatorElement,
    eps: f64,
    horizon: usize,
    mode: Mode,
) -> Result<SampleOutcome> {
    let grid = Stride::Geometric.grid(horizon);
    let avgs: Vec<OperatorElement> = AverageStream::new(op, x, weights, seq, horizon)?
        .collect_at(&grid)?
        .into_iter()
        .map(|(_, m)| m)
        .collect();
    let w = find_witness(&witness_family(&avgs, mode), eps, mode)?;
    let e = w.projection.element();
    let mut sup: f64 = 0.0;
    for item in AverageStream::new(op, x, weights, seq, horizon)? {
        let (_, m) = item?;
        let v = match mode {
            Mode::Bilateral => (&(e * &m) * e).op_norm()?,
            Mode::Onesided => (&m * e).op_norm()?,
        };
        sup = sup.max(v);
    }
    Ok(SampleOutcome {
        sup_norm: sup,
        complement_trace: w.complement_trace,
        lambda: w.lambda,
    })
}

/// Draws Ginibre inputs rescaled to `‖x‖_p ∈ [γ/2, γ)` and checks that each
/// admits a witness within the `ε` budget controlling all averages.
pub fn buem_probe(
    op: &dyn AlgebraMap,
    weights: &WeightSequence,
    seq: Option<&SubsequenceSpec>,
    config: &BuemProbeConfig,
) -> Result<BuemProbeResult> {
    if config.samples == 0 || config.horizon == 0 {
        return Err(invalid("samples", "samples and horizon must be at least 1"));
    }
    if !(config.check_scale.is_finite() && config.check_scale > 0.0) {
        return Err(invalid("check_scale", "must be positive"));
    }
    let c = weights.bound();
    let gamma = buem_gamma(config.p, config.epsilon, config.delta, c)?;
    let full = SubsequenceSpec::Full;
    let seq = seq.unwrap_or(&full);
    let k_scale = match seq {
        SubsequenceSpec::Full => 1.0,
        other => sup_ratio(other, config.horizon)?.max(1.0),
    };
    let threshold = k_scale * config.check_scale * config.delta;
    let alg = op.algebra().clone();
    let mut rng = random::rng(config.seed);
    let mut passed = 0;
    let mut underflow = 0;
    let mut worst_sup: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for _ in 0..config.samples {
        let g = random::ginibre(&alg, &mut rng);
        let target = gamma * rand::Rng::random_range(&mut rng, 0.5..1.0);
        let norm = g.schatten_norm(config.p)?;
        let x = g.scale_real(target / norm);
        let scaled = x.schatten_norm(config.p)?;
        if !(scaled > 0.0) || !scaled.is_finite() {
            underflow += 1;
            continue;
        }
        let out = probe_sample(op, weights, seq, &x, config.epsilon, config.horizon, config.mode)?;
        worst_sup = worst_sup.max(out.sup_norm);
        worst_trace = worst_trace.max(out.complement_trace);
        if out.complement_trace <= config.epsilon && out.sup_norm <= threshold {
            passed += 1;
        }
    }
    Ok(BuemProbeResult {
        p: config.p,
        epsilon: config.epsilon,
        delta: config.delta,
        c,
        gamma,
        k_scale,
        threshold,
        samples_attempted: config.samples,
        samples_passed: passed,
        worst_sup_norm: worst_sup,
        worst_complement_trace: worst_trace,
        underflow,
        passed: underflow == 0 && passed == config.samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVariant {
    /// `‖M_N^{γβ} − d · M_N^{β,k}‖_∞` with `d` the partial density of `k`.
    Prop32Limits,
    /// `‖M_N^{β,k} − M_N^β‖_∞`.
    Remark32SharedLimit,
    /// `M_n^k(y − T y)` against `2‖y‖_∞ (N_I(n−1)+1)/n` on a block sequence,
    /// and `M_n^k(z) = z` for a fixed point `z`.
    Thm51Decomposition,
}

pub struct LimitInstance<'a> {
    pub op: &'a dyn AlgebraMap,
    pub weights: &'a WeightSequence,
    pub seq: &'a SubsequenceSpec,
    /// For the decomposition check this is the coboundary generator `y`.
    pub x: &'a OperatorElement,
    pub horizon: usize,
    pub fixed_point: Option<&'a OperatorElement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoboundaryPoint {
    pub n: usize,
    pub interval_index: usize,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCheckResult {
    pub variant: LimitVariant,
    /// Distance for the two limit comparisons; for the decomposition check,
    /// the largest bound violation `max(0, measured − bound)` or fixed-point
    /// deviation.
    pub residual: f64,
    pub density: Option<f64>,
    pub coboundary: Vec<CoboundaryPoint>,
    pub fixed_point_residual: Option<f64>,
}

pub fn limit_check(variant: LimitVariant, inst: &LimitInstance<'_>) -> Result<LimitCheckResult> {
    let n = inst.horizon;
    if n == 0 {
        return Err(invalid("N", "horizon must be at least 1"));
    }
    let op = inst.op;
    let full = SubsequenceSpec::Full;
    match variant {
        LimitVariant::Prop32Limits => {
            let prefix = inst.seq.prefix(n)?;
            let below = inst.seq.terms_up_to(n as u64 - 1)?;
            let d = below.len() as f64 / n as f64;
            let gamma_beta =
                WeightSequence::product(WeightSequence::indicator(inst.seq.clone())?, inst.weights.clone());
            let lhs = crate::averages::average(op, inst.x, &gamma_beta, &full, n)?;
            let sub = crate::averages::average(op, inst.x, inst.weights, inst.seq, prefix.len())?;
            let residual = lhs.distance(&sub.scale_real(d))?;
            Ok(LimitCheckResult {
                variant,
                residual,
                density: Some(d),
                coboundary: vec![],
                fixed_point_residual: None,
            })
        }
        LimitVariant::Remark32SharedLimit => {
            let sub = crate::averages::average(op, inst.x, inst.weights, inst.seq, n)?;
            let all = crate::averages::average(op, inst.x, inst.weights, &full, n)?;
            Ok(LimitCheckResult {
                variant,
                residual: sub.distance(&all)?,
                density: None,
                coboundary: vec![],
                fixed_point_residual: None,
            })
        }
        LimitVariant::Thm51Decomposition => {
            let blocks = match inst.seq {
                SubsequenceSpec::Blocks(b) => b,
                _ => {
                    return Err(invalid(
                        "seq",
                        "the decomposition check needs a block sequence to define N_I",
                    ))
                }
            };
            let prefix = block_sequence(blocks, n)?;
            let y = inst.x;
            let coboundary = y - &op.apply(y)?;
            let y_norm = y.op_norm()?;
            let ones = WeightSequence::ones();
            let grid = Stride::Geometric.grid(n);
            let mut points = Vec::with_capacity(grid.len());
            let mut violation: f64 = 0.0;
            for (m, avg) in AverageStream::new(op, &coboundary, &ones, inst.seq, n)?.collect_at(&grid)? {
                let ni = prefix.interval_index[m - 1];
                let bound = 2.0 * y_norm * (ni as f64 + 1.0) / m as f64;
                let measured = avg.op_norm()?;
                violation = violation.max(measured - bound);
                points.push(CoboundaryPoint {
                    n: m,
                    interval_index: ni,
                    measured,
                    bound,
                });
            }
            let fixed_point_residual = match inst.fixed_point {
                Some(z) => {
                    let drift = z.distance(&op.apply(z)?)?;
                    if drift > crate::averages::identity_tolerance(z)? {
                        return Err(invalid("fixed_point", format!("T(z) differs from z by {drift:e}")));
                    }
                    let mut worst: f64 = 0.0;
                    for (_, avg) in AverageStream::new(op, z, &ones, inst.seq, n)?.collect_at(&grid)? {
                        worst = worst.max(avg.distance(z)?);
                    }
                    Some(worst)
                }
                None => None,
            };
            Ok(LimitCheckResult {
                variant,
                residual: violation.max(0.0).max(fixed_point_residual.unwrap_or(0.0)),
                density: None,
                coboundary: points,
                fixed_point_residual,
            })
        }
    }
}

/// `x = E(x) + (y − T y)` with `y` a least-squares solution of
/// `(I − T) y = x − E(x)`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub fixed: OperatorElement,
    pub generator: OperatorElement,
    /// `‖E(x) + (y − T y) − x‖_∞`.
    pub residual: f64,
}

pub fn coboundary_decomposition<M: AlgebraMap + ?Sized>(op: &M, x: &OperatorElement) -> Result<Decomposition> {
    let alg = op.algebra().clone();
    x.check_algebra(&alg)?;
    let e = ds::fixed_space_projector(op)?;
    let fixed = e.apply(x)?;
    let s = ds::superoperator_matrix(op)?;
    let dim = s.nrows();
    let gap = DMatrix::<Complex64>::identity(dim, dim) - s;
    let rhs = ds::weighted_coordinates(&(x - &fixed));
    let svd = gap
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD of I - T did not converge".into()))?;
    let sol = svd
        .solve(&rhs, ds::FIXED_SPACE_WINDOW)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let generator = ds::from_weighted_coordinates(&alg, &sol)?;
    let rebuilt = &fixed + &(&generator - &op.apply(&generator)?);
    let residual = rebuilt.distance(x)?;
    Ok(Decomposition {
        fixed,
        generator,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraSpec, Block};
    use crate::ds::DsOperator;
    use std::sync::Arc;

    fn m(n: usize) -> Arc<AlgebraSpec> {
        AlgebraSpec::full(n).unwrap().shared()
    }

    #[test]
    fn zero_family_gets_identity_witness() {
        let a = m(3);
        for mode in [Mode::Bilateral, Mode::Onesided] {
            let w = find_witness(&[OperatorElement::zeros(&a)], 0.5, mode).unwrap();
            assert!(w.projection.is_identity());
            assert_eq!(w.lambda, 0.0);
        }
    }

    #[test]
    fn single_diagonal_family() {
        let a = m(2);
        let y = OperatorElement::from_diagonal(&a, &[10.0, 0.01]).unwrap();
        let w = find_witness(&[y], 1.0, Mode::Bilateral).unwrap();
        assert!((w.lambda - 0.01).abs() < 1e-15);
        assert_eq!(w.complement_trace, 1.0);
        let want = OperatorElement::from_diagonal(&a, &[0.0, 1.0]).unwrap();
        assert!(w.projection.element().distance(&want).unwrap() < 1e-14);
    }

    #[test]
    fn witness_rejects_bad_budgets_and_non_self_adjoint_terms() {
        let a = m(2);
        let y = OperatorElement::identity(&a);
        assert!(find_witness(std::slice::from_ref(&y), 0.0, Mode::Bilateral).is_err());
        assert!(find_witness(std::slice::from_ref(&y), 2.0, Mode::Bilateral).is_err());
        assert!(find_witness(&[], 0.5, Mode::Bilateral).is_err());
        let g = random::ginibre(&a, &mut random::rng(1));
        assert!(matches!(
            find_witness(std::slice::from_ref(&g), 0.5, Mode::Bilateral),
            Err(Error::NotSelfAdjoint { .. })
        ));
        assert!(find_witness(&[g], 0.5, Mode::Onesided).is_ok());
    }

    #[test]
    fn witness_soundness_on_random_families() {
        let mut rng = random::rng(2);
        for trial in 0..20 {
            let alg = random::algebra(1 + trial % 3, 5, &mut rng).shared();
            let ys: Vec<_> = (0..4).map(|_| random::self_adjoint(&alg, &mut rng)).collect();
            let eps = 0.3 * alg.tau_one();
            for mode in [Mode::Bilateral, Mode::Onesided] {
                let w = find_witness(&ys, eps, mode).unwrap();
                assert!(w.complement_trace <= eps);
                let e = w.projection.element();
                for y in &ys {
                    let v = match mode {
                        Mode::Bilateral => (&(e * y) * e).op_norm().unwrap(),
                        Mode::Onesided => (y * e).op_norm().unwrap(),
                    };
                    assert!(v <= w.lambda + WITNESS_TOL, "{mode:?}: {v} > {}", w.lambda);
                }
                // Chebyshev: λ ε ≤ τ(b) in the bilateral case.
                if mode == Mode::Bilateral {
                    let mut b = OperatorElement::zeros(&alg);
                    for y in &ys {
                        b += &y.abs().unwrap();
                    }
                    assert!(w.lambda * eps <= b.trace().re + 1e-9);
                }
            }
        }
    }

    #[test]
    fn weighted_blocks_change_the_budget() {
        let a = AlgebraSpec::new(vec![Block { dim: 1, weight: 0.2 }, Block { dim: 1, weight: 5.0 }])
            .unwrap()
            .shared();
        let y = OperatorElement::from_diagonal(&a, &[3.0, 1.0]).unwrap();
        // Only the light block fits the budget.
        let w = find_witness(std::slice::from_ref(&y), 1.0, Mode::Bilateral).unwrap();
        assert_eq!(w.lambda, 1.0);
        let y = OperatorElement::from_diagonal(&a, &[1.0, 3.0]).unwrap();
        let w = find_witness(&[y], 1.0, Mode::Bilateral).unwrap();
        assert_eq!(w.lambda, 3.0);
    }

    #[test]
    fn gamma_examples() {
        assert!((buem_gamma(1.0, 4.0, 48.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((buem_gamma(2.0, 4.0, 96.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let base = buem_gamma(1.5, 1.0, 1.0, 1.0).unwrap();
        assert!(buem_gamma(1.5, 2.0, 1.0, 1.0).unwrap() > base);
        assert!(buem_gamma(1.5, 1.0, 2.0, 1.0).unwrap() > base);
        assert!(buem_gamma(1.5, 1.0, 1.0, 2.0).unwrap() < base);
        assert!(buem_gamma(0.5, 1.0, 1.0, 1.0).is_err());
        assert!(buem_gamma(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(buem_gamma(1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn identity_operator_report_converges() {
        let a = m(2);
        let t = DsOperator::identity(&a);
        let x = random::ginibre(&a, &mut random::rng(3));
        let ones = WeightSequence::ones();
        let spec = StreamSpec {
            op: &t,
            x: &x,
            weights: &ones,
            seq: &SubsequenceSpec::Full,
        };
        let r = au_report(spec, &x, 0.2, 64, Mode::Bilateral, ReportOptions::default()).unwrap();
        assert_eq!(r.decision, Decision::Converging);
        assert!(r.tail.iter().all(|p| p.r_bilateral < 1e-14 && p.r_onesided < 1e-14));
    }

    #[test]
    fn alternating_family_is_inconclusive() {
        let a = m(2);
        let base = OperatorElement::from_diagonal(&a, &[1.0, 0.5]).unwrap();
        let family: Vec<_> = Stride::Geometric
            .grid(1000)
            .into_iter()
            .map(|n| (n, base.scale_real(if n % 2 == 0 { 1.0 } else { -1.0 })))
            .collect();
        for mode in [Mode::Bilateral, Mode::Onesided] {
            let r = au_report_from_family(&family, 0.5, mode, ReportOptions::default(), "alternating").unwrap();
            assert_eq!(r.decision, Decision::Inconclusive);
            assert!(r.final_residual() >= 0.5);
            assert!(r.envelope.windows(2).all(|w| w[1].1 <= w[0].1));
        }
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let a = m(2);
        let family = vec![(16, OperatorElement::zeros(&a)), (32, OperatorElement::zeros(&a))];
        let r = au_report_from_family(&family, 0.5, Mode::Bilateral, ReportOptions::default(), "zero").unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,r_bilateral,r_onesided,trace_complement");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("16,0,0,0"));
    }

    #[test]
    fn zero_sample_passes_trivially() {
        let a = m(3);
        let t = DsOperator::random_mixed_unitary(&a, 2, &mut random::rng(4));
        let out = probe_sample(
            &t,
            &WeightSequence::ones(),
            &SubsequenceSpec::Full,
            &OperatorElement::zeros(&a),
            0.3,
            32,
            Mode::Bilateral,
        )
        .unwrap();
        assert_eq!(out.sup_norm, 0.0);
        assert_eq!(out.complement_trace, 0.0);
    }

    #[test]
    fn fixed_point_reproduces_itself() {
        let a = m(3);
        let t = DsOperator::random_mixed_unitary(&a, 3, &mut random::rng(5));
        let one = OperatorElement::identity(&a);
        let ones = WeightSequence::ones();
        let seq = SubsequenceSpec::Blocks(crate::subsequence::IntervalBlocks::Squares);
        let y = random::ginibre(&a, &mut random::rng(6));
        let inst = LimitInstance {
            op: &t,
            weights: &ones,
            seq: &seq,
            x: &y,
            horizon: 500,
            fixed_point: Some(&one),
        };
        let r = limit_check(LimitVariant::Thm51Decomposition, &inst).unwrap();
        assert!(r.fixed_point_residual.unwrap() <= 1e-10);
        assert!(r.residual <= 1e-10);

        let not_blocks = LimitInstance {
            seq: &SubsequenceSpec::Full,
            ..inst
        };
        assert!(limit_check(LimitVariant::Thm51Decomposition, &not_blocks).is_err());
    }

    #[test]
    fn decomposition_reconstructs_random_elements() {
        let mut rng = random::rng(7);
        for d in [2, 3, 4] {
            let a = m(d);
            let t = DsOperator::random_mixed_unitary(&a, 2, &mut rng);
            let x = random::ginibre(&a, &mut rng);
            let dec = coboundary_decomposition(&t, &x).unwrap();
            assert!(dec.residual <= 1e-8, "d = {d}: {}", dec.residual);
        }
    }
}
