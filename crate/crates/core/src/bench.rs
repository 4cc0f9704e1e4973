//! Instance generation and seeded trial batches.
//!
//! Every random choice in a trial comes from a ChaCha20 stream keyed by the
//! batch seed, with the stream number derived from the trial index and the
//! purpose of the draw. Trials can therefore run in any order, or in
//! parallel, and still reproduce bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{
    lindecomp_attack_decrypt, lindecomp_attack_kex, span_attack_decrypt, AttackMethod,
};
use crate::error::{Error, Result};
use crate::factor_scheme::{encrypt, kex_shared, kex_token, keygen, ExponentRange, Role};
use crate::gfp::PrimeField;
use crate::matgfp::{Matrix, MAX_DIMENSION};
use crate::span::cyclic_span_basis;

/// Rejections allowed before [`gen_instance`] gives up.
pub const MAX_REJECTIONS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneratorFamily {
    #[serde(rename = "general-linear")]
    GeneralLinear,
    #[serde(rename = "upper-unitriangular")]
    UpperUnitriangular,
}

impl GeneratorFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorFamily::GeneralLinear => "general-linear",
            GeneratorFamily::UpperUnitriangular => "upper-unitriangular",
        }
    }
}

impl fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general-linear" | "gl" => Ok(GeneratorFamily::GeneralLinear),
            "upper-unitriangular" | "ut" => Ok(GeneratorFamily::UpperUnitriangular),
            other => Err(Error::InvalidSpec(format!(
                "unknown generator family {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub p: u64,
    pub n: usize,
    pub family: GeneratorFamily,
    pub exponent_bound: u64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<PrimeField> {
        let field = PrimeField::new(self.p)?;
        if self.n < 2 || self.n > MAX_DIMENSION {
            return Err(Error::InvalidDimension(self.n));
        }
        if self.exponent_bound == 0 {
            return Err(Error::InvalidSpec("exponent bound must be positive".into()));
        }
        Ok(field)
    }

    pub fn exponent_range(&self) -> Result<ExponentRange> {
        ExponentRange::up_to(self.exponent_bound)
    }

    /// Stream for one purpose within one trial.
    pub fn rng(&self, trial: u64, purpose: StreamPurpose) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(trial * StreamPurpose::COUNT + purpose as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    /// Generators, keys, message and blinding.
    Instance = 0,
    /// Coefficient draws of the span attack.
    Sampling = 1,
    /// Key-exchange exponents.
    Exchange = 2,
}

impl StreamPurpose {
    const COUNT: u64 = 3;
}

/// A public generator pair, plus how it was produced when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub g: Matrix,
    pub h: Matrix,
    pub family: Option<GeneratorFamily>,
    pub seed: Option<u64>,
}

fn random_element<R: Rng + ?Sized>(
    field: PrimeField,
    n: usize,
    family: GeneratorFamily,
    rng: &mut R,
) -> Matrix {
    let mut m = Matrix::random(field, n, n, rng);
    if family == GeneratorFamily::UpperUnitriangular {
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, field.elem(i64::from(i == j)));
            }
        }
    }
    m
}

/// Draws a non-commuting pair of invertible generators from the spec's
/// family. Every singular draw and every commuting pair counts as one
/// rejection.
pub fn gen_instance<R: Rng + ?Sized>(spec: &InstanceSpec, rng: &mut R) -> Result<(Matrix, Matrix)> {
    let field = spec.validate()?;
    let mut rejections = 0;
    let draw = |rng: &mut R, rejections: &mut u32| -> Option<Matrix> {
        while *rejections < MAX_REJECTIONS {
            let m = random_element(field, spec.n, spec.family, rng);
            if m.is_invertible() {
                return Some(m);
            }
            *rejections += 1;
        }
        None
    };
    while rejections < MAX_REJECTIONS {
        let Some(g) = draw(rng, &mut rejections) else {
            break;
        };
        let Some(h) = draw(rng, &mut rejections) else {
            break;
        };
        if !g.commutes_with(&h)? {
            return Ok((g, h));
        }
        rejections += 1;
    }
    Err(Error::GenerationExhausted(MAX_REJECTIONS))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum Outcome {
    Recovered,
    WrongResult,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub outcomes: BTreeMap<AttackMethod, Outcome>,
    /// `dim Lin(<g>)`.
    pub cyclic_dim: Option<usize>,
    /// `dim Lin(<g> c <h>)`, from the lindecomp attack.
    pub closure_dim: Option<usize>,
    /// `dim Lin(<g><h>)`, from the key-exchange attack.
    pub kex_dim: Option<usize>,
    pub sampling_attempts: Option<u32>,
    /// Span and lindecomp recovered the same matrix (when both ran).
    pub methods_agree: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodStats {
    pub attempted: usize,
    pub successes: usize,
    pub wrong: usize,
    pub errors: usize,
}

impl MethodStats {
    pub fn success_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.successes as f64 / self.attempted as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DimStats {
    pub samples: usize,
    pub mean: f64,
    pub max: usize,
    /// Trials whose dimension exceeded the bound this field is paired with.
    pub over_bound: usize,
}

impl DimStats {
    fn collect(values: impl Iterator<Item = usize>, bound: usize) -> Self {
        let v: Vec<usize> = values.collect();
        if v.is_empty() {
            return Self::default();
        }
        Self {
            samples: v.len(),
            mean: v.iter().sum::<usize>() as f64 / v.len() as f64,
            max: *v.iter().max().unwrap(),
            over_bound: v.iter().filter(|&&d| d > bound).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub mean_trial_ms: f64,
    pub max_trial_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub spec: InstanceSpec,
    pub trials: usize,
    pub methods: BTreeMap<AttackMethod, MethodStats>,
    /// Against `n`.
    pub cyclic_dim: DimStats,
    /// Against `n − 1`; logged only.
    pub cyclic_dim_sharp: DimStats,
    /// Against `n²`.
    pub closure_dim: DimStats,
    /// Against `(n − 1)²`; logged only.
    pub closure_dim_sharp: DimStats,
    /// Against `n²`.
    pub kex_dim: DimStats,
    pub mean_sampling_attempts: Option<f64>,
    pub max_sampling_attempts: Option<u32>,
    /// Invertible draws over all draws made by the span attack.
    pub invertibility_frequency: Option<f64>,
    pub method_disagreements: usize,
    pub timing: Timing,
    pub records: Vec<TrialRecord>,
}

impl TrialSummary {
    pub fn all_succeeded(&self) -> bool {
        self.methods.values().all(|s| s.successes == s.attempted) && self.method_disagreements == 0
    }
}

fn outcome<T>(r: &Result<T>, ok: impl FnOnce(&T) -> bool) -> Outcome {
    match r {
        Ok(v) if ok(v) => Outcome::Recovered,
        Ok(_) => Outcome::WrongResult,
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Runs one trial. Generation failures are recorded against every method.
pub fn run_trial(spec: &InstanceSpec, index: u64, methods: &[AttackMethod]) -> TrialRecord {
    let mut record = TrialRecord {
        index,
        outcomes: BTreeMap::new(),
        cyclic_dim: None,
        closure_dim: None,
        kex_dim: None,
        sampling_attempts: None,
        methods_agree: None,
    };
    if let Err(e) = run_trial_inner(spec, index, methods, &mut record) {
        for &m in methods {
            record
                .outcomes
                .entry(m)
                .or_insert_with(|| Outcome::Error(e.to_string()));
        }
    }
    record
}

fn run_trial_inner(
    spec: &InstanceSpec,
    index: u64,
    methods: &[AttackMethod],
    record: &mut TrialRecord,
) -> Result<()> {
    let field = spec.validate()?;
    let range = spec.exponent_range()?;
    let mut rng = spec.rng(index, StreamPurpose::Instance);
    let (g, h) = gen_instance(spec, &mut rng)?;
    record.cyclic_dim = Some(cyclic_span_basis(&g)?.dim());

    let wants = |m| methods.contains(&m);
    if wants(AttackMethod::Span) || wants(AttackMethod::Lindecomp) {
        let (public, _private) = keygen(&g, &h, range, &mut rng)?;
        let m = Matrix::random(field, spec.n, spec.n, &mut rng);
        let ct = encrypt(&public, &m, range, &mut rng)?;

        let mut span_out = None;
        if wants(AttackMethod::Span) {
            let mut sampling = spec.rng(index, StreamPurpose::Sampling);
            let r = span_attack_decrypt(&public, &ct, &mut sampling);
            if let Ok(rep) = &r {
                record.sampling_attempts = Some(rep.sampling_attempts);
            }
            record
                .outcomes
                .insert(AttackMethod::Span, outcome(&r, |rep| rep.recovered == m));
            span_out = r.ok().map(|rep| rep.recovered);
        }
        if wants(AttackMethod::Lindecomp) {
            let r = lindecomp_attack_decrypt(&public, &ct);
            if let Ok(rep) = &r {
                record.closure_dim = Some(rep.span_dimension);
                if let Some(s) = &span_out {
                    record.methods_agree = Some(*s == rep.recovered);
                }
            }
            record.outcomes.insert(
                AttackMethod::Lindecomp,
                outcome(&r, |rep| rep.recovered == m),
            );
        }
    }

    if wants(AttackMethod::LindecompKex) {
        let mut rng = spec.rng(index, StreamPurpose::Exchange);
        let [x1, y1, x2, y2] = [(); 4].map(|_| range.sample(&mut rng));
        let a = kex_token(&g, &h, x1, y1, Role::Initiator)?;
        let b = kex_token(&g, &h, x2, y2, Role::Responder)?;
        let k_alice = kex_shared(x1, y1, &b, &g, &h)?;
        let k_bob = kex_shared(x2, y2, &a, &g, &h)?;
        let r = lindecomp_attack_kex(&g, &h, &a, &b);
        if let Ok(rep) = &r {
            record.kex_dim = Some(rep.span_dimension);
        }
        record.outcomes.insert(
            AttackMethod::LindecompKex,
            outcome(&r, |rep| rep.recovered == k_alice && rep.recovered == k_bob),
        );
    }
    Ok(())
}

/// Checks a batch request before any trial runs.
pub fn validate_request(spec: &InstanceSpec, count: usize, methods: &[AttackMethod]) -> Result<()> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidSpec("trial count must be at least 1".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidSpec("no attack method requested".into()));
    }
    if methods.contains(&AttackMethod::Span) && spec.p <= spec.n as u64 {
        return Err(Error::InvalidSpec(format!(
            "span method needs p > n (p = {}, n = {})",
            spec.p, spec.n
        )));
    }
    Ok(())
}

/// Runs `count` trials in parallel and aggregates them in index order.
pub fn run_trials(
    spec: &InstanceSpec,
    count: usize,
    methods: &[AttackMethod],
) -> Result<TrialSummary> {
    validate_request(spec, count, methods)?;
    let start = Instant::now();
    let timed: Vec<(TrialRecord, Duration)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let t = Instant::now();
            let r = run_trial(spec, i, methods);
            (r, t.elapsed())
        })
        .collect();
    let total = start.elapsed();
    let (records, durations): (Vec<_>, Vec<_>) = timed.into_iter().unzip();
    let mut summary = summarize(spec, methods, records);
    let ms = |d: &Duration| d.as_secs_f64() * 1e3;
    summary.timing = Timing {
        total_ms: ms(&total),
        mean_trial_ms: durations.iter().map(ms).sum::<f64>() / durations.len() as f64,
        max_trial_ms: durations.iter().map(ms).fold(0.0, f64::max),
    };
    Ok(summary)
}

/// Aggregates records. Order-independent apart from the stored record list.
pub fn summarize(
    spec: &InstanceSpec,
    methods: &[AttackMethod],
    mut records: Vec<TrialRecord>,
) -> TrialSummary {
    records.sort_by_key(|r| r.index);
    let n = spec.n;
    let mut stats: BTreeMap<AttackMethod, MethodStats> = methods
        .iter()
        .map(|&m| (m, MethodStats::default()))
        .collect();
    for r in &records {
        for (m, o) in &r.outcomes {
            let s = stats.entry(*m).or_default();
            s.attempted += 1;
            match o {
                Outcome::Recovered => s.successes += 1,
                Outcome::WrongResult => s.wrong += 1,
                Outcome::Error(_) => s.errors += 1,
            }
        }
    }
    let attempts: Vec<u32> = records.iter().filter_map(|r| r.sampling_attempts).collect();
    let (mean_attempts, max_attempts, frequency) = if attempts.is_empty() {
        (None, None, None)
    } else {
        let total: u64 = attempts.iter().map(|&a| a as u64).sum();
        (
            Some(total as f64 / attempts.len() as f64),
            attempts.iter().copied().max(),
            Some(attempts.len() as f64 / total as f64),
        )
    };
    let sharp = (n - 1) * (n - 1);
    TrialSummary {
        spec: *spec,
        trials: records.len(),
        methods: stats,
        cyclic_dim: DimStats::collect(records.iter().filter_map(|r| r.cyclic_dim), n),
        cyclic_dim_sharp: DimStats::collect(records.iter().filter_map(|r| r.cyclic_dim), n - 1),
        closure_dim: DimStats::collect(records.iter().filter_map(|r| r.closure_dim), n * n),
        closure_dim_sharp: DimStats::collect(records.iter().filter_map(|r| r.closure_dim), sharp),
        kex_dim: DimStats::collect(records.iter().filter_map(|r| r.kex_dim), n * n),
        mean_sampling_attempts: mean_attempts,
        max_sampling_attempts: max_attempts,
        invertibility_frequency: frequency,
        method_disagreements: records
            .iter()
            .filter(|r| r.methods_agree == Some(false))
            .count(),
        timing: Timing::default(),
        records,
    }
}

impl fmt::Display for TrialSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.spec;
        writeln!(
            f,
            "p={} n={} family={} seed={} trials={}",
            s.p, s.n, s.family, s.seed, self.trials
        )?;
        for (m, st) in &self.methods {
            writeln!(
                f,
                "  {:<14} {}/{} recovered ({} wrong, {} errors)",
                m.as_str(),
                st.successes,
                st.attempted,
                st.wrong,
                st.errors
            )?;
        }
        let dim = |d: &DimStats| format!("mean {:.2}, max {}", d.mean, d.max);
        if self.cyclic_dim.samples > 0 {
            writeln!(
                f,
                "  dim Lin<g>        {} (> n-1 in {} trials)",
                dim(&self.cyclic_dim),
                self.cyclic_dim_sharp.over_bound
            )?;
        }
        if self.closure_dim.samples > 0 {
            writeln!(
                f,
                "  dim Lin<g>c<h>    {} (> (n-1)^2 in {} trials)",
                dim(&self.closure_dim),
                self.closure_dim_sharp.over_bound
            )?;
        }
        if self.kex_dim.samples > 0 {
            writeln!(f, "  dim Lin<g><h>     {}", dim(&self.kex_dim))?;
        }
        if let (Some(mean), Some(freq)) =
            (self.mean_sampling_attempts, self.invertibility_frequency)
        {
            writeln!(
                f,
                "  sampling attempts mean {mean:.3}, invertible-draw frequency {freq:.4}"
            )?;
        }
        if self.method_disagreements > 0 {
            writeln!(
                f,
                "  span/lindecomp disagreements: {}",
                self.method_disagreements
            )?;
        }
        write!(
            f,
            "  time total {:.1} ms, per trial mean {:.2} ms, max {:.2} ms",
            self.timing.total_ms, self.timing.mean_trial_ms, self.timing.max_trial_ms
        )
    }
}
