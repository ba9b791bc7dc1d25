//! Seeded Monte Carlo runs of photon-pair experiments.
//!
//! Every trial draws from its own ChaCha8 stream, selected by the trial
//! index under the master seed. A trial's outcome therefore depends only on
//! `(seed, index)`, and serial and parallel execution produce the same log.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{InequalityReport, SettingTriple};
use crate::lhv::StrategyCensus;
use crate::quantum::{conditional_remote_state, transmit_probability, Angle, Outcome, PairState};

/// Stated on every empirical inequality estimate: the three setting pairs are
/// measured on different subensembles.
pub const FAIR_SAMPLING_NOTE: &str = "rates for (a,c), (a,b) and (b,c) come from three independent \
     subensembles of equal size; comparing them assumes each is a fair sample of one common ensemble";

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Quantum { visibility: f64 },
    Lhv(StrategyCensus),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Spacelike,
    Timelike,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingPair {
    pub a: Angle,
    pub b: Angle,
}

impl SettingPair {
    pub fn new(a: Angle, b: Angle) -> Self {
        SettingPair { a, b }
    }

    pub fn from_degrees(a: f64, b: f64) -> Result<Self> {
        Ok(SettingPair::new(Angle::new(a)?, Angle::new(b)?))
    }

    /// The `(a,c)`, `(a,b)`, `(b,c)` pairs that enter the inequality.
    pub fn wigner_pairs(triple: &SettingTriple) -> Vec<SettingPair> {
        vec![
            SettingPair::new(triple.a, triple.c),
            SettingPair::new(triple.a, triple.b),
            SettingPair::new(triple.b, triple.c),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub ordering: Ordering,
    /// Who measures first in time-like runs.
    pub first_observer: Side,
    pub setting_pairs: Vec<SettingPair>,
    pub pairs_per_setting: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn quantum(setting_pairs: Vec<SettingPair>, pairs_per_setting: u64, seed: u64) -> Self {
        ExperimentConfig {
            source: Source::Quantum { visibility: 1.0 },
            ordering: Ordering::Spacelike,
            first_observer: Side::A,
            setting_pairs,
            pairs_per_setting,
            seed,
        }
    }

    pub fn lhv(
        census: StrategyCensus,
        setting_pairs: Vec<SettingPair>,
        pairs_per_setting: u64,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            source: Source::Lhv(census),
            ..ExperimentConfig::quantum(setting_pairs, pairs_per_setting, seed)
        }
    }

    pub fn timelike(mut self, first: Side) -> Self {
        self.ordering = Ordering::Timelike;
        self.first_observer = first;
        self
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        if let Source::Quantum { visibility: v } = &mut self.source {
            *v = visibility;
        }
        self
    }

    pub fn total_trials(&self) -> u64 {
        self.pairs_per_setting * self.setting_pairs.len() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.setting_pairs.is_empty() {
            return Err(Error::NoSettingPairs);
        }
        if self.pairs_per_setting == 0 {
            return Err(Error::ZeroPairs);
        }
        self.pairs_per_setting
            .checked_mul(self.setting_pairs.len() as u64)
            .ok_or_else(|| Error::InvalidParameter("total trial count overflows".into()))?;
        match &self.source {
            Source::Quantum { visibility } => {
                PairState::with_visibility(*visibility)?;
            }
            Source::Lhv(census) => {
                if census.total() == 0 {
                    return Err(Error::EmptyCensus);
                }
                for p in &self.setting_pairs {
                    census.menu().require_position(p.a)?;
                    census.menu().require_position(p.b)?;
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_file(&self) -> ConfigFile {
        let (mode, census, visibility) = match &self.source {
            Source::Quantum { visibility } => (Mode::Quantum, None, *visibility),
            Source::Lhv(c) => (Mode::Lhv, Some(c.clone()), 1.0),
        };
        ConfigFile {
            mode,
            census,
            ordering: self.ordering,
            first_observer: self.first_observer,
            setting_pairs: self
                .setting_pairs
                .iter()
                .map(|p| [p.a.degrees(), p.b.degrees()])
                .collect(),
            pairs_per_setting: self.pairs_per_setting,
            seed: self.seed,
            visibility,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Quantum,
    Lhv,
}

/// JSON layout of an [`ExperimentConfig`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<StrategyCensus>,
    #[serde(default = "default_ordering")]
    pub ordering: Ordering,
    #[serde(default = "default_first")]
    pub first_observer: Side,
    pub setting_pairs: Vec<[f64; 2]>,
    pub pairs_per_setting: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_visibility")]
    pub visibility: f64,
}

fn default_ordering() -> Ordering {
    Ordering::Spacelike
}

fn default_first() -> Side {
    Side::A
}

fn default_visibility() -> f64 {
    1.0
}

impl TryFrom<ConfigFile> for ExperimentConfig {
    type Error = Error;

    fn try_from(file: ConfigFile) -> Result<Self> {
        let source = match (file.mode, file.census) {
            (Mode::Quantum, None) => Source::Quantum {
                visibility: file.visibility,
            },
            (Mode::Quantum, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "a census is only meaningful in lhv mode".into(),
                ))
            }
            (Mode::Lhv, Some(c)) => Source::Lhv(c),
            (Mode::Lhv, None) => {
                return Err(Error::InvalidParameter("lhv mode requires a census".into()))
            }
        };
        let setting_pairs = file
            .setting_pairs
            .iter()
            .map(|&[a, b]| SettingPair::from_degrees(a, b))
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            source,
            ordering: file.ordering,
            first_observer: file.first_observer,
            setting_pairs,
            pairs_per_setting: file.pairs_per_setting,
            seed: file.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasurementOrder {
    #[serde(rename = "A-first")]
    AFirst,
    #[serde(rename = "B-first")]
    BFirst,
    #[serde(rename = "simultaneous")]
    Simultaneous,
}

impl MeasurementOrder {
    pub fn label(self) -> &'static str {
        match self {
            MeasurementOrder::AFirst => "A-first",
            MeasurementOrder::BFirst => "B-first",
            MeasurementOrder::Simultaneous => "simultaneous",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub setting_a: Angle,
    pub outcome_a: Outcome,
    pub setting_b: Angle,
    pub outcome_b: Outcome,
    pub order: MeasurementOrder,
    /// Partner state announced by the first observer (time-like only).
    pub message: Option<Angle>,
    /// Whether the second observer's result agreed with the message; only
    /// set when both sides measured the same axis.
    pub verified: Option<bool>,
}

/// Coincidence counts for one setting pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCounts {
    pub settings: SettingPair,
    counts: [[u64; 2]; 2],
}

impl PairCounts {
    pub fn new(settings: SettingPair) -> Self {
        PairCounts {
            settings,
            counts: [[0; 2]; 2],
        }
    }

    pub fn record(&mut self, a: Outcome, b: Outcome) {
        self.counts[a.index()][b.index()] += 1;
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> u64 {
        self.counts[a.index()][b.index()]
    }

    pub fn pairs(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn rate(&self, a: Outcome, b: Outcome) -> f64 {
        self.get(a, b) as f64 / self.pairs() as f64
    }

    /// Pairs in which `side` transmitted.
    pub fn transmits(&self, side: Side) -> u64 {
        use Outcome::{Reflect as R, Transmit as T};
        match side {
            Side::A => self.get(T, T) + self.get(T, R),
            Side::B => self.get(T, T) + self.get(R, T),
        }
    }

    pub fn transmit_rate(&self, side: Side) -> f64 {
        self.transmits(side) as f64 / self.pairs() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialLog {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    /// One entry per configured setting pair, in configuration order.
    pub aggregates: Vec<PairCounts>,
}

impl TrialLog {
    /// Rebuild the aggregates from the records.
    pub fn recount(&self) -> Vec<PairCounts> {
        let mut out: Vec<PairCounts> = self
            .config
            .setting_pairs
            .iter()
            .map(|&p| PairCounts::new(p))
            .collect();
        for r in &self.records {
            let slot = (r.trial / self.config.pairs_per_setting) as usize;
            out[slot].record(r.outcome_a, r.outcome_b);
        }
        out
    }

    /// `(same-basis time-like trials, of which verified)`.
    pub fn verification_tally(&self) -> (u64, u64) {
        self.records
            .iter()
            .filter_map(|r| r.verified)
            .fold((0, 0), |(n, ok), v| (n + 1, ok + v as u64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialLog> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, execution: Execution) -> Result<TrialLog> {
    config.validate()?;
    let sampler = TrialSampler::new(config)?;
    let total = config.total_trials();
    let records: Vec<TrialRecord> = match execution {
        Execution::Serial => (0..total).map(|i| sampler.trial(i)).collect::<Result<_>>()?,
        Execution::Parallel => (0..total)
            .into_par_iter()
            .map(|i| sampler.trial(i))
            .collect::<Result<_>>()?,
    };
    let mut log = TrialLog {
        config: config.clone(),
        records,
        aggregates: Vec::new(),
    };
    log.aggregates = log.recount();
    Ok(log)
}

/// Independent generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct TrialSampler<'a> {
    config: &'a ExperimentConfig,
    /// Menu positions of each setting pair's `(a, b)` in lhv mode.
    positions: Vec<(usize, usize)>,
}

impl<'a> TrialSampler<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        let positions = match &config.source {
            Source::Lhv(census) => config
                .setting_pairs
                .iter()
                .map(|p| {
                    Ok((
                        census.menu().require_position(p.a)?,
                        census.menu().require_position(p.b)?,
                    ))
                })
                .collect::<Result<_>>()?,
            Source::Quantum { .. } => Vec::new(),
        };
        Ok(TrialSampler { config, positions })
    }

    fn trial(&self, index: u64) -> Result<TrialRecord> {
        let slot = (index / self.config.pairs_per_setting) as usize;
        let settings = self.config.setting_pairs[slot];
        let first = match self.config.ordering {
            Ordering::Timelike => self.config.first_observer,
            Ordering::Spacelike => Side::A,
        };
        let (first_setting, second_setting) = match first {
            Side::A => (settings.a, settings.b),
            Side::B => (settings.b, settings.a),
        };
        let mut rng = trial_rng(self.config.seed, index);

        let (first_outcome, second_outcome) = match &self.config.source {
            Source::Quantum { visibility } => {
                let first_outcome = coin(&mut rng, 0.5);
                let axis = conditional_remote_state(first_setting, first_outcome);
                // White-noise admixture: with probability 1 - V the partner is unpolarized.
                let coherent = rng.random::<f64>() < *visibility;
                let p = if coherent {
                    transmit_probability(second_setting, axis)
                } else {
                    0.5
                };
                (first_outcome, coin(&mut rng, p))
            }
            Source::Lhv(census) => {
                let strategy = census.sample_pair(&mut rng)?;
                let (pa, pb) = self.positions[slot];
                let (oa, ob) = (strategy.outcome_at(pa), strategy.outcome_at(pb));
                match first {
                    Side::A => (oa, ob),
                    Side::B => (ob, oa),
                }
            }
        };

        let (outcome_a, outcome_b) = match first {
            Side::A => (first_outcome, second_outcome),
            Side::B => (second_outcome, first_outcome),
        };
        let (order, message, verified) = match self.config.ordering {
            Ordering::Spacelike => (MeasurementOrder::Simultaneous, None, None),
            Ordering::Timelike => {
                let message = conditional_remote_state(first_setting, first_outcome);
                let verified = first_setting.same_axis(second_setting).then(|| {
                    let predicted = if second_setting.same_axis(message) {
                        Outcome::Transmit
                    } else {
                        Outcome::Reflect
                    };
                    predicted == second_outcome
                });
                let order = match first {
                    Side::A => MeasurementOrder::AFirst,
                    Side::B => MeasurementOrder::BFirst,
                };
                (order, Some(message), verified)
            }
        };
        Ok(TrialRecord {
            trial: index,
            setting_a: settings.a,
            outcome_a,
            setting_b: settings.b,
            outcome_b,
            order,
            message,
            verified,
        })
    }
}

fn coin(rng: &mut ChaCha8Rng, p_transmit: f64) -> Outcome {
    if rng.random::<f64>() < p_transmit {
        Outcome::Transmit
    } else {
        Outcome::Reflect
    }
}

/// Fraction of same-basis time-like trials whose announced state was confirmed.
pub fn verification_rate(log: &TrialLog) -> Result<f64> {
    match log.verification_tally() {
        (0, _) => Err(Error::NoSameBasisTrials),
        (n, ok) => Ok(ok as f64 / n as f64),
    }
}

/// Inequality estimated from three finite runs, with binomial standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalWigner {
    #[serde(flatten)]
    pub report: InequalityReport,
    pub lhs_sigma: f64,
    pub rhs_sigma: f64,
    pub margin_sigma: f64,
    pub pairs_per_setting: u64,
    pub assumption: &'static str,
}

/// `lhs = 2·[rate(T,T at a,c) + rate(R,T at a,b)]`, `rhs = 2·rate(T,T at b,c)`.
pub fn empirical_wigner_counts(
    ac: &PairCounts,
    ab: &PairCounts,
    bc: &PairCounts,
) -> Result<EmpiricalWigner> {
    let n = ac.pairs();
    if ab.pairs() != n || bc.pairs() != n {
        return Err(Error::MismatchedAllocation(format!(
            "(a,c) has {n} pairs, (a,b) has {}, (b,c) has {}",
            ab.pairs(),
            bc.pairs()
        )));
    }
    if n == 0 {
        return Err(Error::ZeroPairs);
    }
    let consistent = ac.settings.a.same_axis(ab.settings.a)
        && ab.settings.b.same_axis(bc.settings.a)
        && ac.settings.b.same_axis(bc.settings.b);
    if !consistent {
        return Err(Error::InvalidParameter(
            "setting pairs are not (a,c), (a,b), (b,c) of one triple".into(),
        ));
    }
    let triple = SettingTriple::new(ac.settings.a, ab.settings.b, ac.settings.b)?;

    use Outcome::{Reflect as R, Transmit as T};
    let (p1, p2, p3) = (ac.rate(T, T), ab.rate(R, T), bc.rate(T, T));
    let var = |p: f64| p * (1.0 - p) / n as f64;
    let lhs_sigma = 2.0 * (var(p1) + var(p2)).sqrt();
    let rhs_sigma = 2.0 * var(p3).sqrt();
    Ok(EmpiricalWigner {
        report: InequalityReport::normalized(triple, 2.0 * (p1 + p2), 2.0 * p3),
        lhs_sigma,
        rhs_sigma,
        margin_sigma: lhs_sigma.hypot(rhs_sigma),
        pairs_per_setting: n,
        assumption: FAIR_SAMPLING_NOTE,
    })
}

/// Takes three single-pair logs at `(a,c)`, `(a,b)`, `(b,c)`.
pub fn empirical_wigner(logs: [&TrialLog; 3]) -> Result<EmpiricalWigner> {
    let [ac, ab, bc] = logs.map(single_pair);
    empirical_wigner_counts(ac?, ab?, bc?)
}

fn single_pair(log: &TrialLog) -> Result<&PairCounts> {
    match log.aggregates.as_slice() {
        [one] => Ok(one),
        other => Err(Error::NotSingleSettingPair(other.len())),
    }
}

/// If the log's setting pairs are exactly `(a,c)`, `(a,b)`, `(b,c)` of some
/// triple, estimate the inequality from them.
pub fn empirical_wigner_from_log(log: &TrialLog) -> Option<Result<EmpiricalWigner>> {
    match log.aggregates.as_slice() {
        [ac, ab, bc]
            if ac.settings.a.same_axis(ab.settings.a)
                && ab.settings.b.same_axis(bc.settings.a)
                && ac.settings.b.same_axis(bc.settings.b) =>
        {
            Some(empirical_wigner_counts(ac, ab, bc))
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalRow {
    pub remote_setting_deg: f64,
    pub pairs: u64,
    pub local_transmit_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoSignalingReport {
    pub local_setting_deg: f64,
    pub rows: Vec<MarginalRow>,
    /// Largest pairwise difference between the rows' local rates.
    pub max_deviation: f64,
    /// Binomial standard error of a single rate at the smallest group size,
    /// using the pooled rate.
    pub sigma: f64,
}

/// Side-B Transmit rate for each side-A setting, with side B held fixed.
///
/// Groups sharing a side-A setting are merged.
pub fn no_signaling_test(groups: &[PairCounts]) -> Result<NoSignalingReport> {
    let Some(first) = groups.first() else {
        return Err(Error::TooFewGroups(0));
    };
    let local = first.settings.b;
    if groups.iter().any(|g| !g.settings.b.same_axis(local)) {
        return Err(Error::MixedLocalSettings);
    }
    let mut merged: Vec<(Angle, u64, u64)> = Vec::new();
    for g in groups {
        let transmits = g.transmits(Side::B);
        match merged.iter_mut().find(|(s, ..)| s.same_axis(g.settings.a)) {
            Some((_, n, t)) => {
                *n += g.pairs();
                *t += transmits;
            }
            None => merged.push((g.settings.a, g.pairs(), transmits)),
        }
    }
    if merged.len() < 2 {
        return Err(Error::TooFewGroups(merged.len()));
    }
    let rows: Vec<MarginalRow> = merged
        .iter()
        .map(|&(s, n, t)| MarginalRow {
            remote_setting_deg: s.degrees(),
            pairs: n,
            local_transmit_rate: t as f64 / n as f64,
        })
        .collect();
    let rates = rows.iter().map(|r| r.local_transmit_rate);
    let max = rates.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.fold(f64::INFINITY, f64::min);
    let pairs: u64 = rows.iter().map(|r| r.pairs).sum();
    let pooled = merged.iter().map(|m| m.2).sum::<u64>() as f64 / pairs as f64;
    let n_min = rows.iter().map(|r| r.pairs).min().unwrap_or(1);
    Ok(NoSignalingReport {
        local_setting_deg: local.degrees(),
        rows,
        max_deviation: max - min,
        sigma: (pooled * (1.0 - pooled) / n_min as f64).sqrt(),
    })
}

#[derive(Serialize)]
struct CsvRow {
    trial: u64,
    setting_a_deg: f64,
    outcome_a: char,
    setting_b_deg: f64,
    outcome_b: char,
    order: &'static str,
    message_deg: Option<f64>,
    verified: Option<bool>,
}

/// Write the log as CSV with header
/// `trial,setting_a_deg,outcome_a,setting_b_deg,outcome_b,order,message_deg,verified`.
pub fn write_csv<W: Write>(log: &TrialLog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &log.records {
        w.serialize(CsvRow {
            trial: r.trial,
            setting_a_deg: r.setting_a.degrees(),
            outcome_a: r.outcome_a.symbol(),
            setting_b_deg: r.setting_b.degrees(),
            outcome_b: r.outcome_b.symbol(),
            order: r.order.label(),
            message_deg: r.message.map(Angle::degrees),
            verified: r.verified,
        })?;
    }
    if log.records.is_empty() {
        w.write_record([
            "trial",
            "setting_a_deg",
            "outcome_a",
            "setting_b_deg",
            "outcome_b",
            "order",
            "message_deg",
            "verified",
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OutcomeTable<T> {
    #[serde(rename = "TT")]
    tt: T,
    #[serde(rename = "TR")]
    tr: T,
    #[serde(rename = "RT")]
    rt: T,
    #[serde(rename = "RR")]
    rr: T,
}

impl<T> OutcomeTable<T> {
    fn build(f: impl Fn(Outcome, Outcome) -> T) -> Self {
        use Outcome::{Reflect as R, Transmit as T};
        OutcomeTable {
            tt: f(T, T),
            tr: f(T, R),
            rt: f(R, T),
            rr: f(R, R),
        }
    }
}

#[derive(Serialize)]
struct AggregateSummary {
    setting_a_deg: f64,
    setting_b_deg: f64,
    pairs: u64,
    counts: OutcomeTable<u64>,
    rates: OutcomeTable<f64>,
    a_transmit_rate: f64,
    b_transmit_rate: f64,
}

#[derive(Serialize)]
struct VerificationSummary {
    same_basis_trials: u64,
    verified: u64,
    verification_rate: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    config: ConfigFile,
    trials: u64,
    setting_pairs: Vec<AggregateSummary>,
    verification: Option<VerificationSummary>,
    wigner: Option<EmpiricalWigner>,
}

/// JSON summary of a log: config echo, aggregate counts, time-like
/// verification and, when the setting pairs form `(a,c)`, `(a,b)`, `(b,c)`,
/// the empirical inequality.
pub fn summary_json(log: &TrialLog) -> Result<serde_json::Value> {
    let setting_pairs = log
        .aggregates
        .iter()
        .map(|p| AggregateSummary {
            setting_a_deg: p.settings.a.degrees(),
            setting_b_deg: p.settings.b.degrees(),
            pairs: p.pairs(),
            counts: OutcomeTable::build(|a, b| p.get(a, b)),
            rates: OutcomeTable::build(|a, b| p.rate(a, b)),
            a_transmit_rate: p.transmit_rate(Side::A),
            b_transmit_rate: p.transmit_rate(Side::B),
        })
        .collect();
    let verification = (log.config.ordering == Ordering::Timelike).then(|| {
        let (n, ok) = log.verification_tally();
        VerificationSummary {
            same_basis_trials: n,
            verified: ok,
            verification_rate: verification_rate(log).ok(),
        }
    });
    let wigner = empirical_wigner_from_log(log).transpose()?;
    let summary = Summary {
        config: log.config.to_file(),
        trials: log.records.len() as u64,
        setting_pairs,
        verification,
        wigner,
    };
    Ok(serde_json::to_value(summary)?)
}
