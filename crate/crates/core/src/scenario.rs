//! Measurement scenarios, distributions and empirical models.
//!
//! A scenario fixes a set of observables with finite outcome alphabets and a
//! cover of measurement contexts. An empirical model attaches one probability
//! distribution per context. All other modules consume these types.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::{Error, Result};

/// Tolerance used when clipping tiny negative probabilities at ingest.
pub const CLIP_EPSILON: f64 = 1e-9;

/// A measurement scenario: observables, their outcome alphabets, and the
/// cover of contexts. Parties are an optional partition of the observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    observables: Vec<String>,
    /// Outcome alphabet per observable, aligned with `observables`.
    outcomes: Vec<Vec<String>>,
    /// Contexts as ordered lists of observable indices.
    contexts: Vec<Vec<usize>>,
    /// Party name -> observable indices, sorted by party name.
    parties: Vec<(String, Vec<usize>)>,
}

impl Scenario {
    /// Builds a scenario and checks its structural invariants: contexts are
    /// non-empty, repeat-free, and jointly cover the observable set; party
    /// members exist.
    pub fn new(
        observables: Vec<String>,
        outcomes: Vec<Vec<String>>,
        context_names: Vec<Vec<String>>,
        parties: Vec<(String, Vec<String>)>,
    ) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::Schema("scenario has no observables".into()));
        }
        let mut seen = BTreeSet::new();
        for o in &observables {
            if !seen.insert(o.clone()) {
                return Err(Error::Schema(format!("duplicate observable `{o}`")));
            }
        }
        if outcomes.len() != observables.len() {
            return Err(Error::Schema(
                "outcome alphabets misaligned with observables".into(),
            ));
        }
        for (o, alpha) in observables.iter().zip(&outcomes) {
            if alpha.is_empty() {
                return Err(Error::Schema(format!("empty outcome alphabet for `{o}`")));
            }
            if alpha.len() > u8::MAX as usize {
                return Err(Error::Schema(format!(
                    "outcome alphabet of `{o}` too large"
                )));
            }
        }
        if context_names.is_empty() {
            return Err(Error::Schema("scenario has no contexts".into()));
        }
        let index_of = |name: &str| -> Result<usize> {
            observables
                .iter()
                .position(|o| o == name)
                .ok_or_else(|| Error::Schema(format!("unknown observable `{name}`")))
        };
        let mut contexts = Vec::with_capacity(context_names.len());
        let mut covered = vec![false; observables.len()];
        for ctx in &context_names {
            if ctx.is_empty() {
                return Err(Error::Schema("empty context".into()));
            }
            let mut indices = Vec::with_capacity(ctx.len());
            for name in ctx {
                let i = index_of(name)?;
                if indices.contains(&i) {
                    return Err(Error::Schema(format!(
                        "observable `{name}` repeated in context"
                    )));
                }
                indices.push(i);
                covered[i] = true;
            }
            contexts.push(indices);
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::Schema(format!(
                "observable `{}` is not in any context",
                observables[i]
            )));
        }
        let mut party_list = Vec::with_capacity(parties.len());
        for (party, members) in parties {
            let mut indices = Vec::with_capacity(members.len());
            for name in &members {
                indices.push(index_of(name)?);
            }
            party_list.push((party, indices));
        }
        party_list.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Scenario {
            observables,
            outcomes,
            contexts,
            parties: party_list,
        })
    }

    /// Convenience constructor for all-binary scenarios with outcomes `0`/`1`.
    pub fn binary(
        observables: Vec<String>,
        context_names: Vec<Vec<String>>,
        parties: Vec<(String, Vec<String>)>,
    ) -> Result<Self> {
        let outcomes = vec![vec!["0".to_string(), "1".to_string()]; observables.len()];
        Scenario::new(observables, outcomes, context_names, parties)
    }

    pub fn observables(&self) -> &[String] {
        &self.observables
    }

    pub fn outcome_alphabet(&self, observable: usize) -> &[String] {
        &self.outcomes[observable]
    }

    pub fn observable_index(&self, name: &str) -> Option<usize> {
        self.observables.iter().position(|o| o == name)
    }

    pub fn n_contexts(&self) -> usize {
        self.contexts.len()
    }

    /// Observable indices of context `c`, in declaration order.
    pub fn context(&self, c: usize) -> &[usize] {
        &self.contexts[c]
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    /// Parties sorted by name, each with its observable indices.
    pub fn parties(&self) -> &[(String, Vec<usize>)] {
        &self.parties
    }

    /// Human-readable key of context `c`: names joined with `|`, with an
    /// `@k` suffix distinguishing repeated observable sets.
    pub fn context_key(&self, c: usize) -> String {
        let base: String = self.contexts[c]
            .iter()
            .map(|&i| self.observables[i].as_str())
            .collect::<Vec<_>>()
            .join("|");
        let repeat = self.contexts[..c]
            .iter()
            .filter(|prev| **prev == self.contexts[c])
            .count();
        if repeat == 0 {
            base
        } else {
            format!("{base}@{}", repeat + 1)
        }
    }

    /// Number of joint outcome tuples of context `c`.
    pub fn context_size(&self, c: usize) -> usize {
        self.contexts[c]
            .iter()
            .map(|&i| self.outcomes[i].len())
            .product()
    }

    /// Enumerates the outcome tuples of context `c` in lexicographic index
    /// order.
    pub fn context_tuples(&self, c: usize) -> Vec<Vec<u8>> {
        let sizes: Vec<usize> = self.contexts[c]
            .iter()
            .map(|&i| self.outcomes[i].len())
            .collect();
        enumerate_tuples(&sizes)
    }

    /// Total number of deterministic global assignments, saturating at
    /// `u128::MAX`.
    pub fn global_assignment_count(&self) -> u128 {
        let mut n: u128 = 1;
        for alpha in &self.outcomes {
            n = n.saturating_mul(alpha.len() as u128);
        }
        n
    }
}

/// Enumerates index tuples over per-position alphabet sizes, lexicographic,
/// first position most significant.
pub(crate) fn enumerate_tuples(sizes: &[usize]) -> Vec<Vec<u8>> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut tuple = vec![0u8; sizes.len()];
    loop {
        out.push(tuple.clone());
        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (tuple[pos] as usize) + 1 < sizes[pos] {
                tuple[pos] += 1;
                for t in tuple.iter_mut().skip(pos + 1) {
                    *t = 0;
                }
                break;
            }
        }
    }
}

/// A probability distribution over the joint outcome tuples of one context.
///
/// Tuples hold outcome indices into the per-observable alphabets. Absent
/// tuples carry probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    arity: usize,
    probs: BTreeMap<Vec<u8>, f64>,
}

impl Distribution {
    pub fn new(arity: usize) -> Self {
        Distribution {
            arity,
            probs: BTreeMap::new(),
        }
    }

    /// Builds a distribution from `(tuple, probability)` pairs. Probabilities
    /// in `[-1e-9, 0)` are clipped to zero.
    pub fn from_pairs<I>(arity: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, f64)>,
    {
        let mut probs = BTreeMap::new();
        for (tuple, p) in pairs {
            if tuple.len() != arity {
                return Err(Error::Schema(format!(
                    "outcome tuple arity {} does not match context arity {arity}",
                    tuple.len()
                )));
            }
            let p = if (-CLIP_EPSILON..0.0).contains(&p) {
                0.0
            } else {
                p
            };
            if probs.insert(tuple, p).is_some() {
                return Err(Error::Schema("duplicate outcome tuple".into()));
            }
        }
        Ok(Distribution { arity, probs })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn prob(&self, tuple: &[u8]) -> f64 {
        self.probs.get(tuple).copied().unwrap_or(0.0)
    }

    /// Stored `(tuple, probability)` entries in lexicographic tuple order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u8>, f64)> {
        self.probs.iter().map(|(t, &p)| (t, p))
    }

    /// Tuples with non-zero stored probability.
    pub fn support(&self) -> impl Iterator<Item = (&Vec<u8>, f64)> {
        self.probs
            .iter()
            .filter(|(_, &p)| p != 0.0)
            .map(|(t, &p)| (t, p))
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Marginal over the tuple positions in `keep` (in the given order).
    pub fn marginal_positions(&self, keep: &[usize]) -> Distribution {
        let mut probs: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (tuple, p) in &self.probs {
            let sub: Vec<u8> = keep.iter().map(|&k| tuple[k]).collect();
            *probs.entry(sub).or_insert(0.0) += p;
        }
        Distribution {
            arity: keep.len(),
            probs,
        }
    }
}

/// Restricts a distribution over `context` to `subset`, summing matching
/// tuples. The subset keeps its own order; it must be contained in the
/// context.
pub fn marginalize(
    dist: &Distribution,
    context: &[String],
    subset: &[String],
) -> Result<Distribution> {
    if dist.arity() != context.len() {
        return Err(Error::InvalidArgument(
            "distribution arity does not match context length".into(),
        ));
    }
    let mut keep = Vec::with_capacity(subset.len());
    for name in subset {
        let pos = context
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::InvalidArgument(format!("`{name}` is not in the context")))?;
        keep.push(pos);
    }
    Ok(dist.marginal_positions(&keep))
}

/// Computes the expectation of the product of coded outcomes.
///
/// `signs[k][v]` is the value in `{+1, -1}` assigned to outcome index `v` of
/// tuple position `k`.
pub fn correlator_with_signs(dist: &Distribution, signs: &[Vec<f64>]) -> Result<f64> {
    if signs.len() != dist.arity() {
        return Err(Error::InvalidArgument("coding arity mismatch".into()));
    }
    let mut acc = 0.0;
    for (tuple, p) in dist.entries() {
        let mut prod = 1.0;
        for (k, &v) in tuple.iter().enumerate() {
            let row = &signs[k];
            let v = v as usize;
            if v >= row.len() {
                return Err(Error::InvalidArgument(
                    "coding does not cover outcome".into(),
                ));
            }
            prod *= row[v];
        }
        acc += prod * p;
    }
    Ok(acc)
}

/// The default coding: outcome index 0 maps to +1, index 1 to -1. Fails on
/// alphabets that are not binary.
pub fn default_signs(scenario: &Scenario, context: usize) -> Result<Vec<Vec<f64>>> {
    scenario
        .context(context)
        .iter()
        .map(|&obs| {
            let n = scenario.outcome_alphabet(obs).len();
            if n != 2 {
                Err(Error::InvalidArgument(format!(
                    "observable `{}` is not binary; provide an explicit coding",
                    scenario.observables()[obs]
                )))
            } else {
                Ok(vec![1.0, -1.0])
            }
        })
        .collect()
}

/// An empirical model: a scenario plus one distribution per context.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    scenario: Scenario,
    table: Vec<Distribution>,
}

impl EmpiricalModel {
    /// Pairs a scenario with its per-context distributions. Only structural
    /// properties are enforced here; use [`EmpiricalModel::validate`] for the
    /// numeric invariants.
    pub fn new(scenario: Scenario, table: Vec<Distribution>) -> Result<Self> {
        if table.len() != scenario.n_contexts() {
            return Err(Error::Schema(format!(
                "{} distributions for {} contexts",
                table.len(),
                scenario.n_contexts()
            )));
        }
        for (c, dist) in table.iter().enumerate() {
            if dist.arity() != scenario.context(c).len() {
                return Err(Error::Schema(format!(
                    "distribution arity mismatch in context `{}`",
                    scenario.context_key(c)
                )));
            }
            for (tuple, _) in dist.entries() {
                for (pos, &v) in tuple.iter().enumerate() {
                    let obs = scenario.context(c)[pos];
                    if v as usize >= scenario.outcome_alphabet(obs).len() {
                        return Err(Error::Schema(format!(
                            "outcome index {v} outside the alphabet of `{}`",
                            scenario.observables()[obs]
                        )));
                    }
                }
            }
        }
        Ok(EmpiricalModel { scenario, table })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn distribution(&self, context: usize) -> &Distribution {
        &self.table[context]
    }

    pub fn distributions(&self) -> &[Distribution] {
        &self.table
    }

    /// Marginal of context `c` over a subset of its observables, given by
    /// observable indices.
    pub fn marginal(&self, c: usize, observables: &[usize]) -> Result<Distribution> {
        let ctx = self.scenario.context(c);
        let mut keep = Vec::with_capacity(observables.len());
        for &obs in observables {
            let pos = ctx.iter().position(|&o| o == obs).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "observable `{}` not in context `{}`",
                    self.scenario.observables()[obs],
                    self.scenario.context_key(c)
                ))
            })?;
            keep.push(pos);
        }
        Ok(self.table[c].marginal_positions(&keep))
    }

    /// Product-of-coded-outcomes expectation for context `c` with the default
    /// coding (0 -> +1, 1 -> -1) unless an explicit coding is given.
    pub fn correlator(&self, c: usize, signs: Option<&[Vec<f64>]>) -> Result<f64> {
        match signs {
            Some(s) => correlator_with_signs(&self.table[c], s),
            None => {
                let s = default_signs(&self.scenario, c)?;
                correlator_with_signs(&self.table[c], &s)
            }
        }
    }
}

/// One violation found by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Context key the violation occurred in, when applicable.
    pub context: Option<String>,
    /// Outcome key, when applicable.
    pub outcome: Option<String>,
    /// Magnitude of the violation.
    pub magnitude: f64,
    /// Short description.
    pub message: String,
}

/// Checks the numeric invariants of a model within `tol` and reports every
/// violation. Never fails: an empty report means the model is valid.
pub fn validate_model(model: &EmpiricalModel, tol: f64) -> Vec<Violation> {
    let mut report = Vec::new();
    let scenario = model.scenario();
    for c in 0..scenario.n_contexts() {
        let key = scenario.context_key(c);
        let dist = model.distribution(c);
        for (tuple, p) in dist.entries() {
            if p < -tol {
                report.push(Violation {
                    context: Some(key.clone()),
                    outcome: Some(outcome_key(scenario, c, tuple)),
                    magnitude: -p,
                    message: format!("negative probability {p}"),
                });
            }
        }
        let mass = dist.total_mass();
        if (mass - 1.0).abs() > tol {
            let deficit = 1.0 - mass;
            report.push(Violation {
                context: Some(key),
                outcome: None,
                magnitude: deficit.abs(),
                message: if deficit > 0.0 {
                    format!("mass deficit {deficit:.6}")
                } else {
                    format!("mass excess {:.6}", -deficit)
                },
            });
        }
    }
    report
}

/// Renders the outcome tuple of context `c` as comma-joined labels.
pub fn outcome_key(scenario: &Scenario, c: usize, tuple: &[u8]) -> String {
    let mut out = String::new();
    for (pos, &v) in tuple.iter().enumerate() {
        if pos > 0 {
            out.push(',');
        }
        let obs = scenario.context(c)[pos];
        let _ = write!(out, "{}", scenario.outcome_alphabet(obs)[v as usize]);
    }
    out
}

/// Result of the no-signalling check.
#[derive(Debug, Clone)]
pub struct NoSignallingReport {
    pub ok: bool,
    /// Largest marginal disagreement found.
    pub worst_violation: f64,
    /// Where the worst disagreement occurs: context pair, shared subset and
    /// outcome key.
    pub worst_location: Option<String>,
}

/// Checks that the marginals of every pair of contexts agree, within `tol`,
/// on every non-empty subset of their intersection. Agreement on single
/// observables only (consistent connectedness) is strictly weaker, so the
/// subsets are checked explicitly.
pub fn is_no_signalling(model: &EmpiricalModel, tol: f64) -> NoSignallingReport {
    let scenario = model.scenario();
    let mut worst = 0.0f64;
    let mut location = None;
    for i in 0..scenario.n_contexts() {
        for j in (i + 1)..scenario.n_contexts() {
            let shared: Vec<usize> = scenario
                .context(i)
                .iter()
                .copied()
                .filter(|o| scenario.context(j).contains(o))
                .collect();
            if shared.is_empty() {
                continue;
            }
            for subset in non_empty_subsets(&shared) {
                let mi = model.marginal(i, &subset).expect("subset of context");
                let mj = model.marginal(j, &subset).expect("subset of context");
                let mut tuples: BTreeSet<Vec<u8>> = BTreeSet::new();
                tuples.extend(mi.entries().map(|(t, _)| t.clone()));
                tuples.extend(mj.entries().map(|(t, _)| t.clone()));
                for tuple in tuples {
                    let gap = (mi.prob(&tuple) - mj.prob(&tuple)).abs();
                    if gap > worst {
                        worst = gap;
                        let names: Vec<&str> = subset
                            .iter()
                            .map(|&o| scenario.observables()[o].as_str())
                            .collect();
                        location = Some(format!(
                            "contexts `{}` and `{}`, subset {{{}}}",
                            scenario.context_key(i),
                            scenario.context_key(j),
                            names.join(",")
                        ));
                    }
                }
            }
        }
    }
    NoSignallingReport {
        ok: worst <= tol,
        worst_violation: worst,
        worst_location: location,
    }
}

fn non_empty_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << items.len()) {
        let subset: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &o)| o)
            .collect();
        out.push(subset);
    }
    out
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Parses a probability literal: a JSON number, or a fraction string such as
/// `"29/30"` evaluated as an exact rational before conversion to binary64.
fn parse_probability(value: &serde_json::Value) -> Result<f64> {
    match value {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Schema(format!("non-finite probability {n}"))),
        serde_json::Value::String(s) => {
            let (num, den) = s
                .split_once('/')
                .ok_or_else(|| Error::Schema(format!("malformed fraction `{s}`")))?;
            let num: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("malformed fraction `{s}`")))?;
            let den: i64 = den
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("malformed fraction `{s}`")))?;
            if den == 0 {
                return Err(Error::Schema(format!("zero denominator in `{s}`")));
            }
            Ok(num as f64 / den as f64)
        }
        other => Err(Error::Schema(format!(
            "probability must be number or fraction, got {other}"
        ))),
    }
}

fn split_context_key(key: &str) -> (&str, usize) {
    if let Some((base, rep)) = key.rsplit_once('@') {
        if let Ok(k) = rep.parse::<usize>() {
            if k >= 2 {
                return (base, k);
            }
        }
    }
    (key, 1)
}

/// Parsed form of a model document: the model plus the optional `cyclic`
/// flag used by the CbD layer.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub model: EmpiricalModel,
    pub cyclic: bool,
}

/// Parses an empirical-model JSON document.
///
/// Layout: `{"scenario": {"observables", "outcomes"?, "contexts",
/// "parties"?}, "distributions": {context-key: {outcome-key: prob}},
/// "cyclic"?}` where context keys join observable names with `|` (plus `@k`
/// for repeated contexts) and outcome keys join labels with `,`.
pub fn parse_model(text: &[u8]) -> Result<ModelDocument> {
    let doc: serde_json::Value =
        serde_json::from_slice(text).map_err(|e| Error::Schema(format!("invalid JSON: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Schema("top level must be an object".into()))?;
    let scen = obj
        .get("scenario")
        .and_then(|s| s.as_object())
        .ok_or_else(|| Error::Schema("missing `scenario` object".into()))?;

    let observables: Vec<String> = scen
        .get("observables")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Schema("missing `observables` list".into()))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Schema("observable names must be strings".into()))
        })
        .collect::<Result<_>>()?;

    let default_alphabet = vec!["0".to_string(), "1".to_string()];
    let outcomes: Vec<Vec<String>> = match scen.get("outcomes") {
        None => vec![default_alphabet; observables.len()],
        Some(v) => {
            let map = v
                .as_object()
                .ok_or_else(|| Error::Schema("`outcomes` must be an object".into()))?;
            for key in map.keys() {
                if !observables.iter().any(|o| o == key) {
                    return Err(Error::Schema(format!(
                        "outcomes given for unknown observable `{key}`"
                    )));
                }
            }
            observables
                .iter()
                .map(|o| match map.get(o) {
                    None => Ok(default_alphabet.clone()),
                    Some(alpha) => alpha
                        .as_array()
                        .ok_or_else(|| Error::Schema("alphabet must be a list".into()))?
                        .iter()
                        .map(|s| {
                            s.as_str().map(str::to_string).ok_or_else(|| {
                                Error::Schema("outcome labels must be strings".into())
                            })
                        })
                        .collect(),
                })
                .collect::<Result<_>>()?
        }
    };

    let contexts: Vec<Vec<String>> = scen
        .get("contexts")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Schema("missing `contexts` list".into()))?
        .iter()
        .map(|ctx| {
            ctx.as_array()
                .ok_or_else(|| Error::Schema("context must be a list".into()))?
                .iter()
                .map(|s| {
                    s.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::Schema("context members must be strings".into()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let parties: Vec<(String, Vec<String>)> = match scen.get("parties") {
        None => Vec::new(),
        Some(v) => v
            .as_object()
            .ok_or_else(|| Error::Schema("`parties` must be an object".into()))?
            .iter()
            .map(|(party, members)| {
                let members = members
                    .as_array()
                    .ok_or_else(|| Error::Schema("party members must be a list".into()))?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| Error::Schema("party members must be strings".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((party.clone(), members))
            })
            .collect::<Result<_>>()?,
    };

    let scenario = Scenario::new(observables, outcomes, contexts, parties)?;

    let dists_obj = obj
        .get("distributions")
        .and_then(|v| v.as_object())
        .ok_or_else(|| Error::Schema("missing `distributions` object".into()))?;

    // Resolve each distribution key to a context index.
    let mut table: Vec<Option<Distribution>> = vec![None; scenario.n_contexts()];
    for (key, rows) in dists_obj {
        let (base, repeat) = split_context_key(key);
        let names: Vec<&str> = base.split('|').collect();
        let mut matches = (0..scenario.n_contexts()).filter(|&c| {
            let ctx_names: Vec<&str> = scenario
                .context(c)
                .iter()
                .map(|&i| scenario.observables()[i].as_str())
                .collect();
            ctx_names == names
        });
        let context = matches
            .nth(repeat - 1)
            .ok_or_else(|| Error::Schema(format!("distribution key `{key}` matches no context")))?;
        if table[context].is_some() {
            return Err(Error::Schema(format!(
                "duplicate distribution for context `{key}`"
            )));
        }
        let rows = rows
            .as_object()
            .ok_or_else(|| Error::Schema(format!("distribution `{key}` must be an object")))?;
        let mut pairs = Vec::with_capacity(rows.len());
        for (outcome, prob) in rows {
            let labels: Vec<&str> = outcome.split(',').collect();
            if labels.len() != scenario.context(context).len() {
                return Err(Error::Schema(format!(
                    "outcome `{outcome}` arity mismatch in context `{key}`"
                )));
            }
            let mut tuple = Vec::with_capacity(labels.len());
            for (pos, label) in labels.iter().enumerate() {
                let obs = scenario.context(context)[pos];
                let v = scenario
                    .outcome_alphabet(obs)
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| {
                        Error::Schema(format!(
                            "outcome label `{label}` not in the alphabet of `{}`",
                            scenario.observables()[obs]
                        ))
                    })?;
                tuple.push(v as u8);
            }
            pairs.push((tuple, parse_probability(prob)?));
        }
        table[context] = Some(Distribution::from_pairs(
            scenario.context(context).len(),
            pairs,
        )?);
    }
    let table: Vec<Distribution> = table
        .into_iter()
        .enumerate()
        .map(|(c, d)| {
            d.ok_or_else(|| {
                Error::Schema(format!(
                    "no distribution for context `{}`",
                    scenario.context_key(c)
                ))
            })
        })
        .collect::<Result<_>>()?;

    let cyclic = obj.get("cyclic").and_then(|v| v.as_bool()).unwrap_or(false);
    let model = EmpiricalModel::new(scenario, table)?;
    Ok(ModelDocument { model, cyclic })
}

/// Serializes a model to canonical JSON: fixed key order, contexts in
/// declaration order, outcome keys in alphabet-index order. The output is
/// deterministic and `parse_model` inverts it up to float formatting.
pub fn serialize_model(model: &EmpiricalModel, cyclic: bool) -> Vec<u8> {
    use serde_json::{json, Map, Value};
    let scenario = model.scenario();

    let mut scen = Map::new();
    scen.insert("observables".into(), json!(scenario.observables()));
    let mut outcomes = Map::new();
    for (i, obs) in scenario.observables().iter().enumerate() {
        outcomes.insert(obs.clone(), json!(scenario.outcome_alphabet(i)));
    }
    scen.insert("outcomes".into(), Value::Object(outcomes));
    let contexts: Vec<Vec<String>> = scenario
        .contexts()
        .iter()
        .map(|ctx| {
            ctx.iter()
                .map(|&i| scenario.observables()[i].clone())
                .collect()
        })
        .collect();
    scen.insert("contexts".into(), json!(contexts));
    if !scenario.parties().is_empty() {
        let mut parties = Map::new();
        for (party, members) in scenario.parties() {
            let names: Vec<String> = members
                .iter()
                .map(|&i| scenario.observables()[i].clone())
                .collect();
            parties.insert(party.clone(), json!(names));
        }
        scen.insert("parties".into(), Value::Object(parties));
    }

    let mut dists = Map::new();
    for c in 0..scenario.n_contexts() {
        let mut rows = Map::new();
        for (tuple, p) in model.distribution(c).entries() {
            rows.insert(outcome_key(scenario, c, tuple), json!(p));
        }
        dists.insert(scenario.context_key(c), Value::Object(rows));
    }

    let mut top = Map::new();
    top.insert("scenario".into(), Value::Object(scen));
    top.insert("distributions".into(), Value::Object(dists));
    if cyclic {
        top.insert("cyclic".into(), json!(true));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
    text.push('\n');
    text.into_bytes()
}
