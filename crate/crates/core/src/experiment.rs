//! Config-driven experiment runner.
//!
//! A run resolves an [`ExperimentConfig`], streams the averages of the
//! configured family once, and writes a bundle of three files:
//!
//! * `manifest.json` — the resolved config plus the library version; it can be
//!   fed back to [`load_config`] to reproduce the bundle,
//! * `averages.csv` — `n, residual` on the output stride,
//! * `report.json` — the convergence report, the b.u.e.m. probe and the
//!   transfer-identity residuals.
//!
//! Nothing here reads ambient randomness or the clock, so two runs with the
//! same config produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, Block, OperatorElement};
use crate::averages::{self, AverageStream, GapBound, Stride, TransferIdentity};
use crate::convergence::{self, BuemProbeConfig, BuemProbeResult, ConvergenceReport, Mode, ReportOptions};
use crate::ds::{self, AlgebraMap, DsOperator, RecipeData};
use crate::error::{Error, Result};
use crate::random;
use crate::subsequence::{SubsequenceData, SubsequenceSpec};
use crate::weights::{WeightData, WeightSequence};

pub const CONFIG_VERSION: u32 = 1;
/// Largest `n` at which the transfer identities are checked in a run.
pub const IDENTITY_N_CAP: usize = 200;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const AVERAGES_FILE: &str = "averages.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub blocks: Vec<Block>,
}

/// Either a literal recipe or a seeded random one.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorConfig {
    Recipe(RecipeData),
    /// `x ↦ Σ_i p_i u_i x u_i*` with Haar unitaries and normalized uniform weights,
    /// drawn from the input seed.
    RandomMixedUnitary { terms: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RandomOperatorData {
    RandomMixedUnitary { terms: usize },
}

impl Serialize for OperatorConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OperatorConfig::Recipe(r) => r.serialize(s),
            OperatorConfig::RandomMixedUnitary { terms } => {
                RandomOperatorData::RandomMixedUnitary { terms: *terms }.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for OperatorConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        // Dispatch on `kind` by hand so that recipe errors stay specific.
        let v = serde_json::Value::deserialize(d)?;
        if v.get("kind").and_then(|k| k.as_str()) == Some("random_mixed_unitary") {
            let RandomOperatorData::RandomMixedUnitary { terms } =
                serde_json::from_value(v).map_err(D::Error::custom)?;
            Ok(OperatorConfig::RandomMixedUnitary { terms })
        } else {
            serde_json::from_value(v).map(OperatorConfig::Recipe).map_err(D::Error::custom)
        }
    }
}

/// Schatten exponent in JSON: a number `>= 1` or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent(p)),
            Raw::Str(s) if s == "inf" => Ok(Exponent(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{s}\""))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub seed: u64,
    /// The Ginibre draw is rescaled to `‖x‖_p = norm_target`.
    pub norm_target: f64,
    pub p: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub epsilon: f64,
    pub delta: f64,
    pub p: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Horizon of the b.u.e.m. probe; defaults to the run horizon capped
    /// at 1024.
    #[serde(default)]
    pub horizon: Option<usize>,
}

fn default_samples() -> usize {
    10
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub stride: Stride,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub algebra: AlgebraConfig,
    pub operator: OperatorConfig,
    pub sequence: SubsequenceData,
    pub weights: WeightData,
    pub input: InputConfig,
    pub horizon: usize,
    pub probe: ProbeSection,
    #[serde(default)]
    pub outputs: OutputConfig,
}

/// `manifest.json`: what was run, and by which library version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub ncerg_version: String,
    pub config: ExperimentConfig,
}

/// Parses a config, or the `config` of a manifest.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    if v.get("ncerg_version").is_some() {
        let m: Manifest = serde_json::from_value(v)?;
        if m.ncerg_version != crate::VERSION {
            log::warn!(
                "manifest was written by version {}, running {}",
                m.ncerg_version,
                crate::VERSION
            );
        }
        Ok(m.config)
    } else {
        Ok(serde_json::from_value(v)?)
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&fs::read_to_string(path)?)
}

/// A validated config with its components built.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub algebra: Arc<AlgebraSpec>,
    pub operator: DsOperator,
    pub sequence: SubsequenceSpec,
    pub weights: WeightSequence,
    pub x: OperatorElement,
}

impl ExperimentConfig {
    /// Validates every component and builds it; all problems are reported
    /// together.
    pub fn resolve(&self) -> Result<Resolved> {
        let mut errors = Vec::new();
        let mut note = |field: &str, e: &dyn std::fmt::Display| errors.push(format!("{field}: {e}"));

        if self.version != CONFIG_VERSION {
            note("version", &format!("unsupported version {} (expected {CONFIG_VERSION})", self.version));
        }
        let algebra = match AlgebraSpec::new(self.algebra.blocks.clone()) {
            Ok(a) => Some(a.shared()),
            Err(e) => {
                note("algebra", &e);
                None
            }
        };
        let sequence = SubsequenceSpec::try_from(&self.sequence)
            .and_then(|s| s.validate().map(|_| s))
            .map_err(|e| note("sequence", &e))
            .ok();
        let weights = WeightSequence::try_from(&self.weights).map_err(|e| note("weights", &e)).ok();
        if self.horizon == 0 {
            note("horizon", &"must be at least 1");
        }
        let input = &self.input;
        if !(input.norm_target.is_finite() && input.norm_target > 0.0) {
            note("input.norm_target", &format!("must be positive, got {}", input.norm_target));
        }
        if input.p.0.is_nan() || input.p.0 < 1.0 {
            note("input.p", &format!("Schatten exponent must be >= 1, got {}", input.p.0));
        }
        let probe = &self.probe;
        if !(probe.epsilon.is_finite() && probe.epsilon > 0.0) {
            note("probe.epsilon", &format!("must be positive, got {}", probe.epsilon));
        } else if let Some(a) = &algebra {
            if probe.epsilon >= a.tau_one() {
                note(
                    "probe.epsilon",
                    &format!("must be below tau(1) = {}, got {}", a.tau_one(), probe.epsilon),
                );
            }
        }
        if !(probe.delta.is_finite() && probe.delta > 0.0) {
            note("probe.delta", &format!("must be positive, got {}", probe.delta));
        }
        if !(probe.p.is_finite() && probe.p >= 1.0) {
            note("probe.p", &format!("need finite p >= 1, got {}", probe.p));
        }
        if probe.samples == 0 {
            note("probe.samples", &"must be at least 1");
        }
        if probe.horizon == Some(0) {
            note("probe.horizon", &"must be at least 1");
        }
        if let Stride::Every { every: 0 } = self.outputs.stride {
            note("outputs.stride", &"`every` must be at least 1");
        }
        if let OperatorConfig::RandomMixedUnitary { terms: 0 } = self.operator {
            note("operator", &"random_mixed_unitary needs at least one term");
        }

        let mut rng = random::rng(input.seed);
        let operator = match (&algebra, &self.operator) {
            (None, _) => None,
            (Some(a), OperatorConfig::Recipe(r)) => DsOperator::from_data(a, r).map_err(|e| note("operator", &e)).ok(),
            (Some(_), OperatorConfig::RandomMixedUnitary { terms: 0 }) => None,
            (Some(a), OperatorConfig::RandomMixedUnitary { terms }) => {
                Some(DsOperator::random_mixed_unitary(a, *terms, &mut rng))
            }
        };
        if !errors.is_empty() {
            return Err(Error::InvalidConfig(errors));
        }
        let (algebra, operator, sequence, weights) = (
            algebra.expect("checked"),
            operator.expect("checked"),
            sequence.expect("checked"),
            weights.expect("checked"),
        );
        let g = random::ginibre(&algebra, &mut rng);
        let norm = g.schatten_norm(input.p.0)?;
        let x = g.scale_real(input.norm_target / norm);
        Ok(Resolved {
            config: self.clone(),
            algebra,
            operator,
            sequence,
            weights,
            x,
        })
    }

    pub fn probe_horizon(&self) -> usize {
        self.probe.horizon.unwrap_or(self.horizon.min(1024))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub variant: TransferIdentity,
    pub n: usize,
    pub residual: Option<f64>,
    pub tolerance: f64,
    /// Why the identity was skipped (e.g. `c(n − 1) = 0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub ncerg_version: String,
    pub horizon: usize,
    pub x_norm_inf: f64,
    /// Rank of the fixed space of `T`.
    pub fixed_rank: usize,
    /// `‖M_N^{β,k}(x) − E(x)‖_∞`.
    pub terminal_residual: f64,
    /// `‖M_N^{β,k}(x) − M_N^β(x)‖_∞`.
    pub shared_limit_residual: f64,
    pub convergence: ConvergenceReport,
    pub probe: BuemProbeResult,
    pub identities: Vec<IdentityResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapBound>,
}

/// The files of a finished run.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub directory: PathBuf,
    pub report: RunReport,
}

/// Runs `config` (the seed and directory may be overridden) and writes the
/// bundle.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>, seed: Option<u64>) -> Result<Bundle> {
    let mut config = config.clone();
    if let Some(s) = seed {
        config.input.seed = s;
    }
    if let Some(o) = out {
        config.outputs.directory = Some(o.to_path_buf());
    }
    let directory = config
        .outputs
        .directory
        .clone()
        .ok_or_else(|| Error::InvalidConfig(vec!["outputs.directory: no output directory given".into()]))?;
    let resolved = config.resolve()?;
    info!(
        "running {} on {} blocks, N = {}",
        resolved.sequence.describe(),
        resolved.algebra.num_blocks(),
        config.horizon
    );
    let report = compute_report(&resolved)?;

    fs::create_dir_all(&directory)?;
    // The manifest does not record where it was written, so that a bundle
    // can be moved and re-run elsewhere.
    let mut stored = config.clone();
    stored.outputs.directory = None;
    write_json(
        &directory.join(MANIFEST_FILE),
        &Manifest {
            ncerg_version: crate::VERSION.to_string(),
            config: stored,
        },
    )?;
    write_averages(&directory.join(AVERAGES_FILE), &resolved, &report.1)?;
    write_json(&directory.join(REPORT_FILE), &report.0)?;
    Ok(Bundle {
        directory,
        report: report.0,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn write_averages(path: &Path, r: &Resolved, rows: &[(usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "residual"])?;
    let stride = r.config.outputs.stride;
    for (n, res) in rows.iter().filter(|(n, _)| stride.selects(*n, r.config.horizon)) {
        w.write_record([n.to_string(), res.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// The report plus `(n, ‖M_n − E(x)‖_∞)` on the union of the output stride
/// and the geometric grid.
pub fn compute_report(r: &Resolved) -> Result<(RunReport, Vec<(usize, f64)>)> {
    let cfg = &r.config;
    let n = cfg.horizon;
    let op: &dyn AlgebraMap = &r.operator;
    let projector = ds::fixed_space_projector(&r.operator)?;
    let x_hat = projector.apply(&r.x)?;

    let geometric = Stride::Geometric.grid(n);
    let mut wanted = cfg.outputs.stride.grid(n);
    wanted.extend(&geometric);
    wanted.sort_unstable();
    wanted.dedup();

    let mut rows = Vec::with_capacity(wanted.len());
    let mut family = Vec::with_capacity(geometric.len());
    let mut terminal = None;
    for (m, avg) in AverageStream::new(op, &r.x, &r.weights, &r.sequence, n)?.collect_at(&wanted)? {
        let y = &avg - &x_hat;
        rows.push((m, y.op_norm()?));
        if geometric.binary_search(&m).is_ok() {
            family.push((m, y));
        }
        if m == n {
            terminal = Some(avg);
        }
    }
    let terminal = terminal.expect("the horizon is always collected");
    debug!("streamed {} checkpoints", rows.len());

    let description = format!("k = {}, N = {}", r.sequence.describe(), n);
    let convergence = convergence::au_report_from_family(
        &family,
        cfg.probe.epsilon,
        cfg.probe.mode,
        ReportOptions {
            delta: cfg.probe.delta,
            ..ReportOptions::default()
        },
        description,
    )?;

    let full = averages::average(op, &r.x, &r.weights, &SubsequenceSpec::Full, n)?;
    let shared_limit_residual = terminal.distance(&full)?;

    let probe = convergence::buem_probe(
        op,
        &r.weights,
        Some(&r.sequence),
        &BuemProbeConfig {
            p: cfg.probe.p,
            epsilon: cfg.probe.epsilon,
            delta: cfg.probe.delta,
            horizon: cfg.probe_horizon(),
            samples: cfg.probe.samples,
            seed: cfg.input.seed,
            mode: cfg.probe.mode,
            check_scale: 1.0,
        },
    )?;

    let id_n = n.min(IDENTITY_N_CAP);
    let tolerance = averages::identity_tolerance(&r.x)?;
    let mut identities = Vec::new();
    for variant in [TransferIdentity::Prop31, TransferIdentity::Prop32] {
        let (residual, skipped) =
            match averages::transfer_identity_check(variant, op, &r.weights, &r.sequence, &r.x, id_n) {
                Ok(v) => (Some(v), None),
                Err(e @ (Error::IndexUnderflow(_) | Error::SequenceExhausted { .. })) => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
        identities.push(IdentityResidual {
            variant,
            n: id_n,
            residual,
            tolerance,
            skipped,
        });
    }
    let gap = match averages::theorem31_gap(op, &r.weights, &r.sequence, &r.x, id_n) {
        Ok(g) => Some(g),
        Err(Error::IndexUnderflow(_) | Error::SequenceExhausted { .. }) => None,
        Err(e) => return Err(e),
    };

    let report = RunReport {
        ncerg_version: crate::VERSION.to_string(),
        horizon: n,
        x_norm_inf: r.x.op_norm()?,
        fixed_rank: projector.rank(),
        terminal_residual: rows.last().map_or(0.0, |r| r.1),
        shared_limit_residual,
        convergence,
        probe,
        identities,
        gap,
    };
    Ok((report, rows))
}

/// Summary of [`sweep_identities`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySweep {
    pub seed: u64,
    pub instances: usize,
    pub prop31_checked: usize,
    pub prop32_checked: usize,
    /// Identity evaluations skipped because an index underflowed.
    pub skipped: usize,
    /// `max residual / (1 + ‖x‖_∞)` over both identities.
    pub max_scaled_residual: f64,
    /// `max (measured − bound)` of the gap estimate.
    pub max_gap_excess: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Subsequences exercised by the identity sweep.
pub fn sweep_sequences() -> Vec<SubsequenceSpec> {
    vec![
        SubsequenceSpec::evens(),
        SubsequenceSpec::Blocks(crate::subsequence::IntervalBlocks::Squares),
        SubsequenceSpec::ComplementOfSparse(crate::subsequence::SparseRule::Squares),
    ]
}

/// Bounded random weights: a trigonometric polynomial with up to three
/// frequencies, sometimes times a constant phase.
pub fn random_weights(rng: &mut impl rand::Rng) -> WeightSequence {
    use num_complex::Complex64;
    let terms = rng.random_range(1..=3);
    let coefficients = (0..terms)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let args = (0..terms).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    let p = crate::weights::TrigPolynomial::from_args(coefficients, args).expect("finite data");
    let poly = WeightSequence::trig_poly(p);
    if rng.random_bool(0.3) {
        WeightSequence::product(WeightSequence::constant(Complex64::cis(rng.random_range(0.0..6.0))), poly)
    } else {
        poly
    }
}

/// Both transfer identities and the gap estimate over seeded random
/// instances: block dimensions up to 8, `n ≤ 200`, each sequence of
/// [`sweep_sequences`] in turn.
pub fn sweep_identities(seed: u64, instances: usize) -> Result<IdentitySweep> {
    const TOL: f64 = 1e-10;
    let mut rng = random::rng(seed);
    let sequences = sweep_sequences();
    let mut out = IdentitySweep {
        seed,
        instances,
        prop31_checked: 0,
        prop32_checked: 0,
        skipped: 0,
        max_scaled_residual: 0.0,
        max_gap_excess: f64::NEG_INFINITY,
        tolerance: TOL,
        passed: false,
    };
    for i in 0..instances {
        let alg = random::algebra(rand::Rng::random_range(&mut rng, 1..=3), 8, &mut rng).shared();
        let terms = rand::Rng::random_range(&mut rng, 1..=4);
        let op = DsOperator::random_mixed_unitary(&alg, terms, &mut rng);
        let scale = rand::Rng::random_range(&mut rng, 0.1..10.0);
        let x = random::ginibre(&alg, &mut rng).scale_real(scale);
        let beta = random_weights(&mut rng);
        let k = &sequences[i % sequences.len()];
        let n = rand::Rng::random_range(&mut rng, 1..=200);
        let denom = 1.0 + x.op_norm()?;
        for variant in [TransferIdentity::Prop31, TransferIdentity::Prop32] {
            match averages::transfer_identity_check(variant, &op, &beta, k, &x, n) {
                Ok(r) => {
                    out.max_scaled_residual = out.max_scaled_residual.max(r / denom);
                    match variant {
                        TransferIdentity::Prop31 => out.prop31_checked += 1,
                        TransferIdentity::Prop32 => out.prop32_checked += 1,
                    }
                }
                Err(Error::IndexUnderflow(reason)) => {
                    debug!("instance {i}: {variant:?} skipped: {reason}");
                    out.skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
        let g = averages::theorem31_gap(&op, &beta, k, &x, n)?;
        out.max_gap_excess = out.max_gap_excess.max(g.measured - g.bound);
    }
    out.passed = out.max_scaled_residual <= TOL && out.max_gap_excess <= TOL;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{
            "version": 1,
            "algebra": {"blocks": [{"dim": 2, "weight": 1.0}]},
            "operator": {"kind": "identity"},
            "sequence": {"kind": "full"},
            "weights": {"kind": "constant", "c": 1.0},
            "input": {"seed": 3, "norm_target": 1.0, "p": "inf"},
            "horizon": 10,
            "probe": {"epsilon": 0.5, "delta": 0.01, "p": 1.0, "samples": 2}
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_has_zero_residuals() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(&minimal()).unwrap();
        let b = run_experiment(&cfg, Some(dir.path()), None).unwrap();
        // Zero up to the rounding of (1/n)·Σ x and of the fixed-space projector.
        assert!(b.report.terminal_residual < 1e-14);
        assert!(b.report.convergence.residuals.iter().all(|r| r.1 < 1e-13));
        let csv = fs::read_to_string(dir.path().join(AVERAGES_FILE)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,residual"));
        for l in lines {
            let r: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
            assert!(r < 1e-14, "{l}");
        }
        assert!((b.report.x_norm_inf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rational_angle_names_the_field() {
        let text = minimal().replace(
            r#"{"kind": "full"}"#,
            r#"{"kind": "rotation", "alpha": {"value": 0.5, "irrational": true}, "Y": [0.0, 0.5]}"#,
        );
        let err = parse_config(&text).unwrap().resolve().err().unwrap();
        match err {
            Error::InvalidConfig(items) => {
                assert_eq!(items.len(), 1);
                assert!(items[0].starts_with("sequence") && items[0].contains("`alpha`"), "{items:?}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn validation_is_itemized() {
        let mut cfg = parse_config(&minimal()).unwrap();
        cfg.horizon = 0;
        cfg.input.norm_target = -1.0;
        cfg.probe.epsilon = 5.0;
        match cfg.resolve() {
            Err(Error::InvalidConfig(items)) => {
                assert_eq!(items.len(), 3, "{items:?}");
                assert!(items[0].starts_with("horizon"));
                assert!(items[2].contains("tau(1)"));
            }
            other => panic!("expected itemized errors, got {:?}", other.err()),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = minimal().replace(r#""horizon": 10"#, r#""horizon": 10, "colour": "blue""#);
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn manifest_reproduces_the_bundle() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let text = minimal().replace(r#"{"kind": "identity"}"#, r#"{"kind": "random_mixed_unitary", "terms": 3}"#);
        run_experiment(&parse_config(&text).unwrap(), Some(a.path()), Some(9)).unwrap();
        let again = load_config(&a.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(again.input.seed, 9);
        run_experiment(&again, Some(b.path()), None).unwrap();
        for f in [MANIFEST_FILE, AVERAGES_FILE, REPORT_FILE] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{f} differs"
            );
        }
    }

    #[test]
    fn identity_sweep_is_exact() {
        let s = sweep_identities(0, 12).unwrap();
        assert!(s.passed, "{s:?}");
        assert_eq!(s.prop31_checked, 12);
    }
}
