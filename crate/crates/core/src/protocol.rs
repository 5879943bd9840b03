//! Simulated-teacher evaluation of open-ended category learning.
//!
//! The teacher introduces one category at a time, then keeps asking the
//! learner about unseen instances of known categories, correcting every
//! mistake. Once the accuracy over a sliding window of recent questions
//! reaches the introduction threshold a new category is introduced. A run
//! ends when every category has been learned, when the learner stalls
//! (no introduction within the stall budget), or when the data runs out.

use std::collections::{BTreeMap, VecDeque};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::GlobalFeature;
use crate::error::{Error, Result};
use crate::memory::{CategoryMemory, Metric};

pub const DEFAULT_CONTEXT: &str = "default";
pub const DEFAULT_INTRO_THRESHOLD: f64 = 0.67;
pub const DEFAULT_WINDOW_FACTOR: usize = 3;
pub const DEFAULT_STALL_FACTOR: usize = 100;
pub const MIN_CATEGORIES: usize = 2;
pub const MIN_INSTANCES: usize = 3;

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    /// Restricts the instance to one context; `None` means any context.
    pub context: Option<String>,
    pub feature: GlobalFeature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryData {
    pub label: String,
    pub instances: Vec<Instance>,
}

/// Labeled global features, the teacher's source of instances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureDataset {
    pub categories: Vec<CategoryData>,
}

impl FeatureDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: &str, instance: Instance) {
        match self.categories.iter_mut().find(|c| c.label == label) {
            Some(c) => c.instances.push(instance),
            None => self.categories.push(CategoryData {
                label: label.to_owned(),
                instances: vec![instance],
            }),
        }
    }

    pub fn total_instances(&self) -> usize {
        self.categories.iter().map(|c| c.instances.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.len() < MIN_CATEGORIES {
            return Err(Error::DatasetTooSmall(format!(
                "{} categories, at least {MIN_CATEGORIES} required",
                self.categories.len()
            )));
        }
        if let Some(c) = self.categories.iter().find(|c| c.instances.len() < MIN_INSTANCES) {
            return Err(Error::DatasetTooSmall(format!(
                "category `{}` has {} instances, at least {MIN_INSTANCES} required",
                c.label,
                c.instances.len()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSwitch {
    pub context_id: String,
    /// Number of questions asked before this context becomes active.
    pub start_iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub intro_threshold: f64,
    /// Window length is `window_factor × known categories` questions.
    pub window_factor: usize,
    /// Stall budget is `max_stall × known categories` questions.
    pub max_stall: usize,
    pub seed: u64,
    pub metric: Metric,
    #[serde(with = "float_or_inf")]
    pub tau_unknown: f64,
    #[serde(default)]
    pub context_schedule: Vec<ContextSwitch>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            intro_threshold: DEFAULT_INTRO_THRESHOLD,
            window_factor: DEFAULT_WINDOW_FACTOR,
            max_stall: DEFAULT_STALL_FACTOR,
            seed: 0,
            metric: Metric::Cosine,
            tau_unknown: f64::INFINITY,
            context_schedule: Vec::new(),
        }
    }
}

impl ProtocolConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intro_threshold > 0.0 && self.intro_threshold <= 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "intro_threshold {} outside (0, 1]",
                self.intro_threshold
            )));
        }
        if self.window_factor == 0 || self.max_stall == 0 {
            return Err(Error::ConfigInvalid(
                "window_factor and max_stall must be positive".into(),
            ));
        }
        if self.tau_unknown.is_nan() || self.tau_unknown < 0.0 {
            return Err(Error::ConfigInvalid(format!("tau_unknown {}", self.tau_unknown)));
        }
        for pair in self.context_schedule.windows(2) {
            if pair[1].start_iteration <= pair[0].start_iteration {
                return Err(Error::ConfigInvalid(
                    "context schedule start iterations must be strictly increasing".into(),
                ));
            }
        }
        if self.context_schedule.iter().any(|c| c.context_id.is_empty()) {
            return Err(Error::ConfigInvalid("empty context id".into()));
        }
        Ok(())
    }

    /// Context active once `asked` questions have been posed.
    pub fn context_at(&self, asked: usize) -> &str {
        self.context_schedule
            .iter()
            .rev()
            .find(|c| c.start_iteration <= asked)
            .map_or(DEFAULT_CONTEXT, |c| c.context_id.as_str())
    }

    pub fn window_len(&self, known: usize) -> usize {
        self.window_factor * known
    }

    pub fn stall_budget(&self, known: usize) -> usize {
        self.max_stall * known
    }
}

mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or `inf`, got `{t}`"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Events and reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Introduce,
    Teach,
    Ask,
    Correct,
    ContextSwitch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeachingEvent {
    pub index: usize,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    pub context_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    AllLearned,
    BreakpointStall,
    DataExhausted,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::AllLearned => "all_learned",
            Termination::BreakpointStall => "breakpoint_stall",
            Termination::DataExhausted => "data_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub dataset_categories: usize,
    pub learned_categories: usize,
    pub qc_iterations: usize,
    pub avg_instances_per_category: f64,
    /// Absent when no question was asked.
    pub gca: Option<f64>,
    /// Absent when no accuracy window was completed.
    pub apa: Option<f64>,
    pub termination: Termination,
    pub per_context_gca: BTreeMap<String, f64>,
    pub config: ProtocolConfig,
    pub events: Vec<TeachingEvent>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn write_events_jsonl<W: Write>(events: &[TeachingEvent], mut out: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_events_jsonl<R: BufRead>(input: R) -> Result<Vec<TeachingEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

fn asks(events: &[TeachingEvent]) -> impl Iterator<Item = &TeachingEvent> {
    events.iter().filter(|e| e.kind == EventKind::Ask)
}

/// Fraction of correct answers over all questions.
pub fn compute_gca(events: &[TeachingEvent]) -> Result<f64> {
    let (correct, total) = asks(events).fold((0usize, 0usize), |(c, t), e| {
        (c + usize::from(e.correct == Some(true)), t + 1)
    });
    if total == 0 {
        return Err(Error::NoPredictions);
    }
    Ok(correct as f64 / total as f64)
}

/// Per-context accuracy over the questions tagged with each context.
pub fn compute_per_context_gca(events: &[TeachingEvent]) -> BTreeMap<String, f64> {
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for e in asks(events) {
        let entry = tally.entry(e.context_id.clone()).or_default();
        entry.0 += usize::from(e.correct == Some(true));
        entry.1 += 1;
    }
    tally.into_iter().map(|(k, (c, t))| (k, c as f64 / t as f64)).collect()
}

/// Tracks the sliding accuracy window the way the teacher does.
#[derive(Debug, Default)]
struct AccuracyWindow {
    since_intro: Vec<bool>,
    accuracies: Vec<f64>,
}

impl AccuracyWindow {
    fn introduce(&mut self) {
        self.since_intro.clear();
    }

    /// Records an answer; returns the window accuracy once the window is full.
    fn record(&mut self, correct: bool, window: usize) -> Option<f64> {
        self.since_intro.push(correct);
        if self.since_intro.len() < window {
            return None;
        }
        let hits = self.since_intro[self.since_intro.len() - window..]
            .iter()
            .filter(|c| **c)
            .count();
        let acc = hits as f64 / window as f64;
        self.accuracies.push(acc);
        Some(acc)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Window accuracies the teacher computed, recovered by replaying `events`.
pub fn window_accuracies(events: &[TeachingEvent], config: &ProtocolConfig) -> Vec<f64> {
    let mut known = 0usize;
    let mut window = AccuracyWindow::default();
    for e in events {
        match e.kind {
            EventKind::Introduce => {
                known += 1;
                window.introduce();
            }
            EventKind::Ask => {
                window.record(e.correct == Some(true), config.window_len(known));
            }
            _ => {}
        }
    }
    window.accuracies
}

/// Mean of every window accuracy computed during the run.
pub fn compute_apa(events: &[TeachingEvent], config: &ProtocolConfig) -> Result<f64> {
    let accuracies = window_accuracies(events, config);
    if accuracies.is_empty() {
        return Err(Error::NoWindows);
    }
    Ok(mean(&accuracies))
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct Teacher<'a> {
    dataset: &'a FeatureDataset,
    config: &'a ProtocolConfig,
    memory: CategoryMemory,
    events: Vec<TeachingEvent>,
    /// Unseen instance indices per category, in presentation order.
    pools: Vec<VecDeque<usize>>,
    context: String,
}

impl<'a> Teacher<'a> {
    fn usable(&self, instance: &Instance) -> bool {
        self.config.context_schedule.is_empty() || instance.context.as_deref().is_none_or(|c| c == self.context)
    }

    fn has_unseen(&self, category: usize) -> bool {
        let instances = &self.dataset.categories[category].instances;
        self.pools[category].iter().any(|&i| self.usable(&instances[i]))
    }

    fn draw(&mut self, category: usize) -> Option<&'a Instance> {
        let instances = &self.dataset.categories[category].instances;
        let pos = self.pools[category].iter().position(|&i| self.usable(&instances[i]))?;
        let index = self.pools[category].remove(pos)?;
        Some(&instances[index])
    }

    fn log(&mut self, kind: EventKind, label: Option<&str>, instance: Option<&Instance>) -> &mut TeachingEvent {
        let index = self.events.len();
        self.events.push(TeachingEvent {
            index,
            kind,
            true_label: label.map(str::to_owned),
            instance_id: instance.map(|i| i.id.clone()),
            predicted_label: None,
            correct: None,
            context_id: self.context.clone(),
        });
        self.events.last_mut().expect("just pushed")
    }

    /// Introduces a category with one taught instance. Returns false when the
    /// category has nothing left to show.
    fn introduce(&mut self, category: usize) -> Result<bool> {
        let Some(instance) = self.draw(category) else {
            return Ok(false);
        };
        let label = self.dataset.categories[category].label.as_str();
        self.log(EventKind::Introduce, Some(label), None);
        self.log(EventKind::Teach, Some(label), Some(instance));
        self.memory.teach(label, instance.feature.clone())?;
        Ok(true)
    }

    fn switch_context(&mut self, asked: usize) {
        let active = self.config.context_at(asked);
        if active != self.context {
            self.context = active.to_owned();
            self.log(EventKind::ContextSwitch, None, None);
        }
    }
}

/// Runs one simulated-teacher experiment. Deterministic in
/// `(dataset, config)`.
pub fn run_experiment(dataset: &FeatureDataset, config: &ProtocolConfig) -> Result<ExperimentReport> {
    config.validate()?;
    dataset.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.categories.len()).collect();
    order.shuffle(&mut rng);
    let pools = dataset
        .categories
        .iter()
        .map(|c| {
            let mut idx: Vec<usize> = (0..c.instances.len()).collect();
            idx.shuffle(&mut rng);
            VecDeque::from(idx)
        })
        .collect();

    let mut teacher = Teacher {
        dataset,
        config,
        memory: CategoryMemory::new(),
        events: Vec::new(),
        pools,
        context: config.context_at(0).to_owned(),
    };

    let mut known: Vec<usize> = Vec::new();
    let mut asked_since_intro = vec![false; dataset.categories.len()];
    let mut window = AccuracyWindow::default();
    let mut asks_since_intro = 0usize;
    let mut asked = 0usize;
    let mut cursor = 0usize;
    let mut next = 0usize;

    let termination = 'run: {
        if !teacher.introduce(order[next])? {
            break 'run Termination::DataExhausted;
        }
        known.push(order[next]);
        next += 1;
        window.introduce();

        loop {
            teacher.switch_context(asked);

            // Round-robin over known categories that still have unseen data.
            let Some(step) = (0..known.len()).find(|j| teacher.has_unseen(known[(cursor + j) % known.len()])) else {
                break 'run Termination::DataExhausted;
            };
            let category = known[(cursor + step) % known.len()];
            cursor = (cursor + step + 1) % known.len();

            let instance = teacher.draw(category).expect("availability checked");
            let label = dataset.categories[category].label.as_str();
            let prediction = teacher
                .memory
                .classify(&instance.feature, config.metric, config.tau_unknown)?;
            let predicted = prediction.label().map(str::to_owned);
            let correct = predicted.as_deref() == Some(label);
            let event = teacher.log(EventKind::Ask, Some(label), Some(instance));
            event.predicted_label = predicted;
            event.correct = Some(correct);
            asked += 1;
            asks_since_intro += 1;
            asked_since_intro[category] = true;
            if !correct {
                teacher.log(EventKind::Correct, Some(label), Some(instance));
                teacher.memory.teach(label, instance.feature.clone())?;
            }

            if let Some(acc) = window.record(correct, config.window_len(known.len())) {
                let covered = known.iter().all(|&c| asked_since_intro[c] || !teacher.has_unseen(c));
                if covered && acc >= config.intro_threshold {
                    if next == order.len() {
                        break 'run Termination::AllLearned;
                    }
                    if !teacher.introduce(order[next])? {
                        break 'run Termination::DataExhausted;
                    }
                    log::debug!(
                        "introduced `{}` after {asked} questions",
                        dataset.categories[order[next]].label
                    );
                    known.push(order[next]);
                    next += 1;
                    window.introduce();
                    asks_since_intro = 0;
                    asked_since_intro.iter_mut().for_each(|a| *a = false);
                    continue;
                }
            }
            if asks_since_intro >= config.stall_budget(known.len()) {
                break 'run Termination::BreakpointStall;
            }
        }
    };

    let events = teacher.events;
    let stats = teacher.memory.stats();
    let apa = (!window.accuracies.is_empty()).then(|| mean(&window.accuracies));
    Ok(ExperimentReport {
        seed: config.seed,
        dataset_categories: dataset.categories.len(),
        learned_categories: known.len(),
        qc_iterations: asked,
        avg_instances_per_category: stats.average_instances,
        gca: compute_gca(&events).ok(),
        apa,
        termination,
        per_context_gca: compute_per_context_gca(&events),
        config: config.clone(),
        events,
    })
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

impl MeanStd {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let m = mean(values);
        let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
        Some(Self {
            mean: m,
            std: var.sqrt(),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub learned_categories: MeanStd,
    pub qc_iterations: MeanStd,
    pub avg_instances_per_category: MeanStd,
    pub gca: Option<MeanStd>,
    pub apa: Option<MeanStd>,
}

impl Summary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn summarize(reports: &[ExperimentReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::EmptyReports);
    }
    let collect = |f: &dyn Fn(&ExperimentReport) -> Option<f64>| -> Vec<f64> { reports.iter().filter_map(f).collect() };
    let always = |v: Vec<f64>| MeanStd::of(&v).expect("reports is non-empty");
    Ok(Summary {
        runs: reports.len(),
        learned_categories: always(collect(&|r| Some(r.learned_categories as f64))),
        qc_iterations: always(collect(&|r| Some(r.qc_iterations as f64))),
        avg_instances_per_category: always(collect(&|r| Some(r.avg_instances_per_category))),
        gca: MeanStd::of(&collect(&|r| r.gca)),
        apa: MeanStd::of(&collect(&|r| r.apa)),
    })
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    seed: u64,
    termination: &'a str,
    learned_categories: usize,
    qc_iterations: usize,
    avg_instances_per_category: f64,
    gca: Option<f64>,
    apa: Option<f64>,
}

/// One CSV row per run.
pub fn write_summary_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(SummaryRow {
            seed: r.seed,
            termination: r.termination.name(),
            learned_categories: r.learned_categories,
            qc_iterations: r.qc_iterations,
            avg_instances_per_category: r.avg_instances_per_category,
            gca: r.gca,
            apa: r.apa,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ask(correct: bool) -> TeachingEvent {
        TeachingEvent {
            index: 0,
            kind: EventKind::Ask,
            true_label: Some("a".into()),
            instance_id: None,
            predicted_label: Some(if correct { "a" } else { "b" }.into()),
            correct: Some(correct),
            context_id: DEFAULT_CONTEXT.into(),
        }
    }

    fn introduce() -> TeachingEvent {
        TeachingEvent {
            kind: EventKind::Introduce,
            predicted_label: None,
            correct: None,
            ..ask(true)
        }
    }

    #[test]
    fn gca_examples() {
        let events = vec![ask(true), ask(true), ask(false), ask(true)];
        assert_eq!(compute_gca(&events).unwrap(), 0.75);
        assert_eq!(compute_gca(&[ask(true), ask(true)]).unwrap(), 1.0);
        assert!(matches!(compute_gca(&[introduce()]), Err(Error::NoPredictions)));
    }

    #[test]
    fn apa_examples() {
        let config = ProtocolConfig {
            window_factor: 2,
            ..Default::default()
        };
        // One category, window of 2: accuracies [0.5, 1.0], then a second
        // category makes the window 4: accuracy 0.75.
        let mut events = vec![introduce(), ask(false), ask(true), ask(true)];
        events.push(introduce());
        events.extend([ask(true), ask(false), ask(true), ask(true)]);
        assert_eq!(window_accuracies(&events, &config), vec![0.5, 1.0, 0.75]);
        assert_eq!(compute_apa(&events, &config).unwrap(), 0.75);

        let single = vec![introduce(), ask(true), ask(true)];
        assert_eq!(compute_apa(&single, &config).unwrap(), 1.0);
        let short = vec![introduce(), ask(true)];
        assert!(matches!(compute_apa(&short, &config), Err(Error::NoWindows)));
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::default().validate().is_ok());
        let bad = ProtocolConfig {
            intro_threshold: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::ConfigInvalid(_))));
        let bad = ProtocolConfig {
            window_factor: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ProtocolConfig {
            context_schedule: vec![
                ContextSwitch {
                    context_id: "a".into(),
                    start_iteration: 5,
                },
                ContextSwitch {
                    context_id: "b".into(),
                    start_iteration: 5,
                },
            ],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn context_lookup() {
        let config = ProtocolConfig {
            context_schedule: vec![
                ContextSwitch {
                    context_id: "kitchen".into(),
                    start_iteration: 10,
                },
                ContextSwitch {
                    context_id: "office".into(),
                    start_iteration: 20,
                },
            ],
            ..Default::default()
        };
        assert_eq!(config.context_at(0), DEFAULT_CONTEXT);
        assert_eq!(config.context_at(10), "kitchen");
        assert_eq!(config.context_at(19), "kitchen");
        assert_eq!(config.context_at(500), "office");
    }

    #[test]
    fn config_json_keeps_infinite_tau() {
        let config = ProtocolConfig::default();
        let text = serde_json::to_string(&config).unwrap();
        assert!(text.contains("\"inf\""));
        let back: ProtocolConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn summarize_examples() {
        assert!(matches!(summarize(&[]), Err(Error::EmptyReports)));
        let base = ExperimentReport {
            seed: 1,
            dataset_categories: 2,
            learned_categories: 2,
            qc_iterations: 10,
            avg_instances_per_category: 2.0,
            gca: Some(0.8),
            apa: Some(0.9),
            termination: Termination::AllLearned,
            per_context_gca: BTreeMap::new(),
            config: ProtocolConfig::default(),
            events: vec![],
        };
        let one = summarize(std::slice::from_ref(&base)).unwrap();
        assert_eq!(one.gca.unwrap().std, 0.0);
        let other = ExperimentReport {
            gca: Some(1.0),
            ..base.clone()
        };
        let two = summarize(&[base, other]).unwrap();
        assert!((two.gca.unwrap().mean - 0.9).abs() < 1e-15);
        assert!((two.gca.unwrap().std - 0.1).abs() < 1e-15);
    }

    #[test]
    fn dataset_validation() {
        let f = GlobalFeature::from_unnormalized(vec![1.0], "t").unwrap();
        let inst = |id: &str| Instance {
            id: id.into(),
            context: None,
            feature: f.clone(),
        };
        let mut d = FeatureDataset::new();
        for i in 0..3 {
            d.push("a", inst(&format!("a{i}")));
        }
        assert!(matches!(d.validate(), Err(Error::DatasetTooSmall(_))));
        d.push("b", inst("b0"));
        assert!(matches!(d.validate(), Err(Error::DatasetTooSmall(_))));
        d.push("b", inst("b1"));
        d.push("b", inst("b2"));
        assert!(d.validate().is_ok());
        assert_eq!(d.total_instances(), 6);
    }
}
