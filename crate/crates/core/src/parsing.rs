//! Incremental dependency parsing and the garden-path pipeline.
//!
//! A parse of a sentence fragment maps each word position to the position
//! of its head; a root points to itself, and a head may point past the end
//! of the fragment, encoding a predicted future attachment. Distributions
//! over parses are aggregated from masked-prediction files, restricted along
//! prefixes, turned into per-word signalling fractions, and regressed
//! against self-paced reading times.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::{Distribution, EmpiricalModel, Scenario};
use crate::{Error, Result};

/// A dependency parse as 1-based head indices, one per word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parse {
    heads: Vec<u32>,
}

impl Parse {
    pub fn new(heads: Vec<u32>) -> Result<Self> {
        if heads.contains(&0) {
            return Err(Error::Schema("head indices are 1-based".into()));
        }
        Ok(Parse { heads })
    }

    pub fn heads(&self) -> &[u32] {
        &self.heads
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }
}

/// Truncates a parse to its first `prefix_len` words. Head values are kept
/// as they are, even when they point past the prefix.
pub fn restrict_parse(parse: &Parse, prefix_len: usize) -> Result<Parse> {
    if prefix_len == 0 || prefix_len > parse.len() {
        return Err(Error::InvalidArgument(format!(
            "prefix length {prefix_len} out of range for a {}-word parse",
            parse.len()
        )));
    }
    Ok(Parse {
        heads: parse.heads[..prefix_len].to_vec(),
    })
}

/// A probability distribution over parses of a fixed fragment length.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseDistribution {
    length: usize,
    probs: BTreeMap<Parse, f64>,
}

impl ParseDistribution {
    pub fn new(length: usize, pairs: Vec<(Parse, f64)>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (parse, p) in pairs {
            if parse.len() != length {
                return Err(Error::Schema(format!(
                    "parse of length {} in a distribution of length {length}",
                    parse.len()
                )));
            }
            if p < 0.0 {
                return Err(Error::Schema("negative parse probability".into()));
            }
            *probs.entry(parse).or_insert(0.0) += p;
        }
        Ok(ParseDistribution { length, probs })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn prob(&self, parse: &Parse) -> f64 {
        self.probs.get(parse).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Parse, f64)> {
        self.probs.iter().map(|(k, &v)| (k, v))
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Restriction to a prefix, summing parses that coincide there.
    pub fn restricted(&self, prefix_len: usize) -> Result<ParseDistribution> {
        let mut probs: BTreeMap<Parse, f64> = BTreeMap::new();
        for (parse, p) in &self.probs {
            *probs
                .entry(restrict_parse(parse, prefix_len)?)
                .or_insert(0.0) += p;
        }
        Ok(ParseDistribution {
            length: prefix_len,
            probs,
        })
    }

    /// Drops parses below `threshold` and renormalizes the remainder.
    pub fn pruned(&self, threshold: f64) -> Result<ParseDistribution> {
        let kept: Vec<(Parse, f64)> = self
            .probs
            .iter()
            .filter(|(_, &p)| p >= threshold)
            .map(|(k, &v)| (k.clone(), v))
            .collect();
        let mass: f64 = kept.iter().map(|(_, p)| p).sum();
        if mass <= 0.0 {
            return Err(Error::InvalidArgument(
                "pruning removed the whole distribution".into(),
            ));
        }
        ParseDistribution::new(
            self.length,
            kept.into_iter().map(|(k, p)| (k, p / mass)).collect(),
        )
    }

    /// Reads the `{"length": k, "parses": [{"heads": [...], "prob": p}]}`
    /// document.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            heads: Vec<u32>,
            prob: f64,
        }
        #[derive(Deserialize)]
        struct Doc {
            length: usize,
            parses: Vec<Row>,
        }
        let doc: Doc = serde_json::from_slice(bytes)
            .map_err(|e| Error::Schema(format!("invalid parse-distribution file: {e}")))?;
        ParseDistribution::new(
            doc.length,
            doc.parses
                .into_iter()
                .map(|row| Ok((Parse::new(row.heads)?, row.prob)))
                .collect::<Result<_>>()?,
        )
    }

    pub fn to_json(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Row<'a> {
            heads: &'a [u32],
            prob: f64,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            length: usize,
            parses: Vec<Row<'a>>,
        }
        let doc = Doc {
            length: self.length,
            parses: self
                .probs
                .iter()
                .map(|(parse, &prob)| Row {
                    heads: parse.heads(),
                    prob,
                })
                .collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("serializable");
        bytes.push(b'\n');
        bytes
    }
}

/// One masked-prediction record: the completion tokens, the model's logit
/// score for it, and the dependency heads of the completed sentence.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct PredictionRecord {
    pub completion: Vec<String>,
    pub logit: f64,
    pub heads: Vec<u32>,
}

/// A prediction file: the full token list of a sentence plus the per-
/// prediction records for one masking of it.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct PredictionFile {
    pub tokens: Vec<String>,
    pub predictions: Vec<PredictionRecord>,
}

impl PredictionFile {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let doc: PredictionFile = serde_json::from_slice(bytes)
            .map_err(|e| Error::Schema(format!("invalid prediction file: {e}")))?;
        for record in &doc.predictions {
            if record.heads.len() != doc.tokens.len() {
                return Err(Error::Schema(format!(
                    "prediction parse length {} does not match the {} tokens",
                    record.heads.len(),
                    doc.tokens.len()
                )));
            }
        }
        Ok(doc)
    }
}

fn logistic(sigma: f64) -> f64 {
    1.0 / (1.0 + (-sigma).exp())
}

/// True when no completion token contains an alphanumeric character; such
/// punctuation-only predictions are dropped before normalization.
fn is_punctuation_only(record: &PredictionRecord) -> bool {
    !record
        .completion
        .iter()
        .any(|token| token.chars().any(|c| c.is_alphanumeric()))
}

/// Aggregates prediction records into the parse distribution of a prefix:
/// logit scores become probabilities through the logistic function, the
/// surviving predictions are renormalized, and full parses that restrict to
/// the same partial parse pool their probability.
pub fn aggregate_partial_distribution(
    file: &PredictionFile,
    prefix_len: usize,
) -> Result<ParseDistribution> {
    let kept: Vec<&PredictionRecord> = file
        .predictions
        .iter()
        .filter(|r| !is_punctuation_only(r))
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidArgument(
            "no text predictions left after dropping punctuation".into(),
        ));
    }
    let weights: Vec<f64> = kept.iter().map(|r| logistic(r.logit)).collect();
    let total: f64 = weights.iter().sum();
    let mut pairs = Vec::with_capacity(kept.len());
    for (record, w) in kept.iter().zip(weights) {
        let full = Parse::new(record.heads.clone())?;
        pairs.push((restrict_parse(&full, prefix_len)?, w / total));
    }
    ParseDistribution::new(prefix_len, pairs)
}

/// Signalling fraction of a nested pair of parse distributions:
/// `1 - sum_parse min(longer|_shorter, shorter)`.
pub fn prefix_sf(shorter: &ParseDistribution, longer: &ParseDistribution) -> Result<f64> {
    if longer.length() != shorter.length() + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected consecutive lengths, got {} and {}",
            shorter.length(),
            longer.length()
        )));
    }
    let restricted = longer.restricted(shorter.length())?;
    let mut overlap = 0.0;
    for (parse, p) in restricted.entries() {
        overlap += p.min(shorter.prob(parse));
    }
    Ok(1.0 - overlap)
}

/// Per-word signalling fractions of a chain of prefix distributions of
/// consecutive lengths `1..=L`; entry `k` is the SF of word `k + 2`.
pub fn word_sf_sequence(dists: &[ParseDistribution]) -> Result<Vec<f64>> {
    if dists.len() < 2 {
        return Err(Error::InvalidArgument("need at least two prefixes".into()));
    }
    for (k, d) in dists.iter().enumerate() {
        if d.length() != dists[0].length() + k {
            return Err(Error::InvalidArgument(format!(
                "prefix lengths must be consecutive; position {k} has length {}",
                d.length()
            )));
        }
    }
    dists.windows(2).map(|w| prefix_sf(&w[0], &w[1])).collect()
}

/// Expresses a nested pair of parse distributions as a two-context
/// empirical model, for cross-checking the prefix formula against the
/// no-signalling LP. Word positions become observables; the head values
/// occurring at each position form its outcome alphabet.
pub fn prefix_pair_model(
    shorter: &ParseDistribution,
    longer: &ParseDistribution,
) -> Result<EmpiricalModel> {
    if longer.length() <= shorter.length() {
        return Err(Error::InvalidArgument(
            "distributions must be nested".into(),
        ));
    }
    let long_len = longer.length();
    let mut alphabets: Vec<Vec<u32>> = vec![Vec::new(); long_len];
    let mut note = |parse: &Parse| {
        for (pos, &head) in parse.heads().iter().enumerate() {
            if !alphabets[pos].contains(&head) {
                alphabets[pos].push(head);
            }
        }
    };
    for (parse, _) in shorter.entries() {
        note(parse);
    }
    for (parse, _) in longer.entries() {
        note(parse);
    }
    for alpha in &mut alphabets {
        alpha.sort_unstable();
    }
    let observables: Vec<String> = (1..=long_len).map(|k| format!("w{k}")).collect();
    let outcome_labels: Vec<Vec<String>> = alphabets
        .iter()
        .map(|alpha| alpha.iter().map(|h| h.to_string()).collect())
        .collect();
    let contexts = vec![
        observables[..shorter.length()].to_vec(),
        observables.clone(),
    ];
    let scenario = Scenario::new(observables, outcome_labels, contexts, vec![])?;
    let encode = |parse: &Parse| -> Vec<u8> {
        parse
            .heads()
            .iter()
            .enumerate()
            .map(|(pos, head)| alphabets[pos].iter().position(|h| h == head).unwrap() as u8)
            .collect()
    };
    let short_pairs: Vec<(Vec<u8>, f64)> = shorter
        .entries()
        .map(|(parse, p)| (encode(parse), p))
        .collect();
    let long_pairs: Vec<(Vec<u8>, f64)> = longer
        .entries()
        .map(|(parse, p)| (encode(parse), p))
        .collect();
    let table = vec![
        Distribution::from_pairs(shorter.length(), short_pairs)?,
        Distribution::from_pairs(long_len, long_pairs)?,
    ];
    EmpiricalModel::new(scenario, table)
}

/// A named region of word positions, inclusive bounds, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub first_word: usize,
    pub last_word: usize,
}

/// Per-region totals and per-word means of a word-SF sequence.
#[derive(Debug, Clone)]
pub struct RegionSf {
    pub name: String,
    pub total: f64,
    pub mean: f64,
}

/// Sums the per-word signalling fractions over each region, and averages
/// them per word. `sf` holds the values for words `2..=L` as produced by
/// [`word_sf_sequence`]; word 1 carries no signalling fraction and
/// contributes zero.
pub fn region_sf_sum(sf: &[f64], sentence_len: usize, regions: &[Region]) -> Result<Vec<RegionSf>> {
    if sf.len() + 1 != sentence_len {
        return Err(Error::InvalidArgument(format!(
            "{} SF values do not cover a {sentence_len}-word sentence",
            sf.len()
        )));
    }
    let mut covered = vec![false; sentence_len];
    for region in regions {
        if region.first_word == 0
            || region.last_word > sentence_len
            || region.first_word > region.last_word
        {
            return Err(Error::InvalidArgument(format!(
                "region `{}` out of range",
                region.name
            )));
        }
        for w in region.first_word..=region.last_word {
            if covered[w - 1] {
                return Err(Error::InvalidArgument(format!(
                    "regions overlap at word {w}"
                )));
            }
            covered[w - 1] = true;
        }
    }
    if !covered.iter().all(|&c| c) {
        return Err(Error::InvalidArgument(
            "regions do not cover the sentence".into(),
        ));
    }
    Ok(regions
        .iter()
        .map(|region| {
            let mut total = 0.0;
            let mut count = 0usize;
            for w in region.first_word..=region.last_word {
                if w >= 2 {
                    total += sf[w - 2];
                    count += 1;
                }
            }
            let mean = if count > 0 { total / count as f64 } else { 0.0 };
            RegionSf {
                name: region.name.clone(),
                total,
                mean,
            }
        })
        .collect())
}

/// A fitted linear reading-time model `rt = alpha * x + beta` (milliseconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub alpha: f64,
    pub beta: f64,
}

/// Ordinary least squares on `(sf_statistic, reading_time)` points, plus
/// the sample Pearson correlation.
pub fn fit_regression(points: &[(f64, f64)]) -> Result<(RegressionModel, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let n = points.len() as f64;
    let mean_x: f64 = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y: f64 = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points
        .iter()
        .map(|(x, _)| (x - mean_x) * (x - mean_x))
        .sum();
    let syy: f64 = points
        .iter()
        .map(|(_, y)| (y - mean_y) * (y - mean_y))
        .sum();
    let sxy: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("degenerate x variance".into()));
    }
    let alpha = sxy / sxx;
    let beta = mean_y - alpha * mean_x;
    let rho = if syy > 0.0 {
        sxy / (sxx.sqrt() * syy.sqrt())
    } else {
        0.0
    };
    Ok((RegressionModel { alpha, beta }, rho))
}

/// Predicted reading time in milliseconds.
pub fn predict_rt(model: &RegressionModel, sf_statistic: f64) -> f64 {
    model.alpha * sf_statistic + model.beta
}

/// Mean reading times per `(sentence type, region)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingTimeTable {
    rows: BTreeMap<(String, u32), f64>,
}

impl ReadingTimeTable {
    /// Reads the `sentence_type,region,rt_ms` CSV (with a header line).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("sentence_type")) {
                continue;
            }
            let mut parts = line.split(',');
            let (Some(kind), Some(region), Some(rt)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::Schema(format!("malformed CSV line {}", lineno + 1)));
            };
            let region: u32 = region
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("bad region on line {}", lineno + 1)))?;
            let rt: f64 = rt
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("bad reading time on line {}", lineno + 1)))?;
            if rt <= 0.0 {
                return Err(Error::Schema("reading times must be positive".into()));
            }
            rows.insert((kind.trim().to_string(), region), rt);
        }
        if rows.is_empty() {
            return Err(Error::Schema("empty reading-time table".into()));
        }
        Ok(ReadingTimeTable { rows })
    }

    pub fn get(&self, sentence_type: &str, region: u32) -> Option<f64> {
        self.rows.get(&(sentence_type.to_string(), region)).copied()
    }
}

/// Garden-path effect: reading time of the ambiguous variant's critical
/// region minus that of the unambiguous variant's. The two variants may
/// place their critical region at different indices.
pub fn garden_path_effect(
    table: &ReadingTimeTable,
    ambiguous_type: &str,
    ambiguous_region: u32,
    unambiguous_type: &str,
    unambiguous_region: u32,
) -> Result<f64> {
    let amb = table.get(ambiguous_type, ambiguous_region).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "missing row `{ambiguous_type}`, region {ambiguous_region}"
        ))
    })?;
    let unamb = table
        .get(unambiguous_type, unambiguous_region)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "missing row `{unambiguous_type}`, region {unambiguous_region}"
            ))
        })?;
    Ok(amb - unamb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> Vec<u8> {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read(path).unwrap()
    }

    fn employees_prefix(len: usize) -> ParseDistribution {
        ParseDistribution::from_json(&fixture(&format!("parse_employees_len{len}.json"))).unwrap()
    }

    #[test]
    fn restriction_truncates_and_keeps_head_values() {
        let parse = Parse::new(vec![2, 3, 3]).unwrap();
        assert_eq!(restrict_parse(&parse, 2).unwrap().heads(), &[2, 3]);
        assert_eq!(restrict_parse(&parse, 3).unwrap(), parse);
        let future = Parse::new(vec![2, 3, 7]).unwrap();
        assert_eq!(restrict_parse(&future, 3).unwrap().heads(), &[2, 3, 7]);
        assert!(restrict_parse(&parse, 0).is_err());
        assert!(restrict_parse(&parse, 4).is_err());
    }

    #[test]
    fn restriction_is_functorial() {
        let parse = Parse::new(vec![2, 3, 3, 5, 7, 7, 3]).unwrap();
        for j in 1..=parse.len() {
            let once = restrict_parse(&parse, j).unwrap();
            for i in 1..=j {
                let twice = restrict_parse(&once, i).unwrap();
                assert_eq!(twice, restrict_parse(&parse, i).unwrap());
            }
        }
    }

    fn record(completion: &[&str], logit: f64, heads: &[u32]) -> PredictionRecord {
        PredictionRecord {
            completion: completion.iter().map(|s| s.to_string()).collect(),
            logit,
            heads: heads.to_vec(),
        }
    }

    #[test]
    fn coinciding_restrictions_pool_their_mass() {
        let file = PredictionFile {
            tokens: "The employees understood x y z w"
                .split(' ')
                .map(String::from)
                .collect(),
            predictions: vec![
                record(
                    &["that", "their", "salaries", "varied"],
                    1.0,
                    &[2, 3, 3, 5, 7, 7, 3],
                ),
                record(
                    &["the", "risks", "in", "advance"],
                    0.3,
                    &[2, 3, 3, 5, 3, 7, 5],
                ),
                record(
                    &["they", "also", "had", "freedom"],
                    -0.5,
                    &[2, 3, 3, 7, 7, 7, 3],
                ),
            ],
        };
        let dist = aggregate_partial_distribution(&file, 3).unwrap();
        let merged = Parse::new(vec![2, 3, 3]).unwrap();
        assert!((dist.prob(&merged) - 1.0).abs() < 1e-12);
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_record_normalizes_to_one() {
        let file = PredictionFile {
            tokens: vec!["a".into(), "b".into()],
            predictions: vec![record(&["b"], 0.0, &[2, 2])],
        };
        let dist = aggregate_partial_distribution(&file, 1).unwrap();
        assert_eq!(dist.prob(&Parse::new(vec![2]).unwrap()), 1.0);
    }

    #[test]
    fn equal_logits_split_evenly() {
        let file = PredictionFile {
            tokens: vec!["a".into(), "b".into()],
            predictions: vec![record(&["b"], 1.3, &[2, 2]), record(&["c"], 1.3, &[1, 1])],
        };
        let dist = aggregate_partial_distribution(&file, 1).unwrap();
        assert!((dist.prob(&Parse::new(vec![2]).unwrap()) - 0.5).abs() < 1e-12);
        assert!((dist.prob(&Parse::new(vec![1]).unwrap()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn punctuation_predictions_are_dropped() {
        let file = PredictionFile {
            tokens: vec!["a".into(), "b".into()],
            predictions: vec![
                record(&["..."], 5.0, &[2, 2]),
                record(&["!?"], 2.0, &[1, 1]),
                record(&["word"], 0.0, &[2, 2]),
            ],
        };
        let dist = aggregate_partial_distribution(&file, 2).unwrap();
        assert_eq!(dist.prob(&Parse::new(vec![2, 2]).unwrap()), 1.0);

        let all_punct = PredictionFile {
            tokens: vec!["a".into()],
            predictions: vec![record(&["..."], 5.0, &[1])],
        };
        assert!(aggregate_partial_distribution(&all_punct, 1).is_err());
    }

    #[test]
    fn aggregation_commutes_with_restriction() {
        let file = PredictionFile {
            tokens: "a b c d".split(' ').map(String::from).collect(),
            predictions: vec![
                record(&["x"], 0.7, &[2, 3, 3, 3]),
                record(&["y"], -0.2, &[2, 3, 5, 5]),
                record(&["z"], 1.1, &[2, 4, 4, 2]),
            ],
        };
        let at3 = aggregate_partial_distribution(&file, 3).unwrap();
        let at2 = aggregate_partial_distribution(&file, 2).unwrap();
        assert_eq!(at3.restricted(2).unwrap(), at2);
    }

    #[test]
    fn critical_sf_values_from_the_prefix_chain() {
        // The M3 pair reproduces 0.05 exactly; the M5 pair evaluates to
        // 0.88 on the shipped truncated tables (the originating analysis
        // reports 0.79 for its full distributions).
        let sf3 = prefix_sf(&employees_prefix(3), &employees_prefix(4)).unwrap();
        assert!((sf3 - 0.05).abs() < 1e-12);
        let sf5 = prefix_sf(&employees_prefix(5), &employees_prefix(6)).unwrap();
        assert!((sf5 - 0.88).abs() < 1e-12);
    }

    #[test]
    fn sf_is_zero_for_consistent_prefixes() {
        let longer = employees_prefix(6);
        let shorter = longer.restricted(5).unwrap();
        assert!(prefix_sf(&shorter, &longer).unwrap().abs() < 1e-12);
    }

    #[test]
    fn word_sf_sequence_runs_over_the_whole_chain() {
        let dists: Vec<ParseDistribution> = (1..=7).map(employees_prefix).collect();
        let sf = word_sf_sequence(&dists).unwrap();
        assert_eq!(sf.len(), 6);
        for v in &sf {
            assert!((0.0..=1.0 + 1e-12).contains(v));
        }
        // Word 4 is the M3 value; word 6 the critical-region value.
        assert!((sf[2] - 0.05).abs() < 1e-12);
        assert!((sf[4] - 0.88).abs() < 1e-12);
        // A gap in the chain is rejected.
        let gappy = vec![employees_prefix(1), employees_prefix(3)];
        assert!(word_sf_sequence(&gappy).is_err());
    }

    #[test]
    fn prefix_pair_model_agrees_with_the_formula() {
        let shorter = employees_prefix(3);
        let longer = employees_prefix(4);
        let model = prefix_pair_model(&shorter, &longer).unwrap();
        let lp = crate::fractions::nosignalling_fraction(&model).unwrap();
        let formula = prefix_sf(&shorter, &longer).unwrap();
        assert!((lp.complement - formula).abs() < 1e-9);
    }

    #[test]
    fn compatible_prefix_chains_are_never_contextual() {
        let longer = employees_prefix(6);
        let shorter = longer.restricted(5).unwrap();
        let model = prefix_pair_model(&shorter, &longer).unwrap();
        let res = crate::fractions::noncontextual_fraction(&model).unwrap();
        assert!(res.complement.abs() < 1e-9);
    }

    #[test]
    fn pruning_renormalizes() {
        let dist = employees_prefix(5);
        let pruned = dist.pruned(1e-4).unwrap();
        assert!((pruned.total_mass() - 1.0).abs() < 1e-12);
        assert!(dist.pruned(2.0).is_err());
    }

    #[test]
    fn region_sums_and_means() {
        let sf = [0.1, 0.2, 0.3];
        let single: Vec<Region> = (1..=4)
            .map(|w| Region {
                name: format!("r{w}"),
                first_word: w,
                last_word: w,
            })
            .collect();
        let per_word = region_sf_sum(&sf, 4, &single).unwrap();
        assert_eq!(per_word[0].total, 0.0);
        assert_eq!(per_word[1].total, 0.1);
        assert_eq!(per_word[3].total, 0.3);

        let uniform = [0.1, 0.1, 0.1];
        let one_region = vec![Region {
            name: "all".into(),
            first_word: 1,
            last_word: 4,
        }];
        let sums = region_sf_sum(&uniform, 4, &one_region).unwrap();
        assert!((sums[0].total - 0.3).abs() < 1e-12);
        assert!((sums[0].mean - 0.1).abs() < 1e-12);

        // Partition additivity: region totals sum to the sentence total.
        let split = vec![
            Region {
                name: "head".into(),
                first_word: 1,
                last_word: 2,
            },
            Region {
                name: "tail".into(),
                first_word: 3,
                last_word: 4,
            },
        ];
        let parts = region_sf_sum(&sf, 4, &split).unwrap();
        let total: f64 = parts.iter().map(|r| r.total).sum();
        assert!((total - sf.iter().sum::<f64>()).abs() < 1e-12);

        let overlapping = vec![
            Region {
                name: "x".into(),
                first_word: 1,
                last_word: 3,
            },
            Region {
                name: "y".into(),
                first_word: 3,
                last_word: 4,
            },
        ];
        assert!(region_sf_sum(&sf, 4, &overlapping).is_err());
    }

    #[test]
    fn regression_recovers_planted_coefficients() {
        let xs = [0.0, 0.2, 0.5, 0.8, 1.3];
        let points: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 295.0 * x + 664.0)).collect();
        let (model, rho) = fit_regression(&points).unwrap();
        assert!((model.alpha - 295.0).abs() < 1e-9);
        assert!((model.beta - 664.0).abs() < 1e-9);
        assert!((rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_points_interpolate_exactly() {
        let (model, _) = fit_regression(&[(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(predict_rt(&model, 0.0), 1.0);
        assert_eq!(predict_rt(&model, 1.0), 3.0);
    }

    #[test]
    fn anticorrelated_data_has_rho_minus_one() {
        let points: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 10.0 - 2.0 * k as f64)).collect();
        let (_, rho) = fit_regression(&points).unwrap();
        assert!((rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_rejects_degenerate_inputs() {
        assert!(fit_regression(&[(1.0, 2.0)]).is_err());
        assert!(fit_regression(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn residuals_are_orthogonal_to_x() {
        let points = [
            (0.1, 400.0),
            (0.3, 470.0),
            (0.4, 420.0),
            (0.9, 650.0),
            (1.2, 700.0),
        ];
        let (model, _) = fit_regression(&points).unwrap();
        let dot: f64 = points
            .iter()
            .map(|&(x, y)| x * (y - predict_rt(&model, x)))
            .sum();
        assert!(dot.abs() < 1e-9);
    }

    #[test]
    fn predict_rt_is_linear() {
        let model = RegressionModel {
            alpha: 77.0,
            beta: 381.0,
        };
        assert_eq!(predict_rt(&model, 1.0), 458.0);
        let base = RegressionModel {
            alpha: 295.0,
            beta: 664.0,
        };
        assert_eq!(predict_rt(&base, 0.0), 664.0);
        let x = 0.37;
        assert!((predict_rt(&base, 2.0 * x) - predict_rt(&base, x) - base.alpha * x).abs() < 1e-12);
    }

    #[test]
    fn sturt_garden_path_effects() {
        let table =
            ReadingTimeTable::from_csv(std::str::from_utf8(&fixture("sturt_rt.csv")).unwrap())
                .unwrap();
        let nps = garden_path_effect(&table, "nps_ambiguous", 3, "nps_unambiguous", 3).unwrap();
        assert_eq!(nps, 87.0);
        let npz = garden_path_effect(&table, "npz_ambiguous", 3, "npz_unambiguous", 3).unwrap();
        assert_eq!(npz, 400.0);
        // Identical variants cancel.
        let zero = garden_path_effect(&table, "nps_ambiguous", 3, "nps_ambiguous", 3).unwrap();
        assert_eq!(zero, 0.0);
        // Missing variants are reported.
        assert!(garden_path_effect(&table, "nps_ambiguous", 3, "zzz", 3).is_err());
    }

    #[test]
    fn grodner_garden_path_effects() {
        let table =
            ReadingTimeTable::from_csv(std::str::from_utf8(&fixture("grodner_rt.csv")).unwrap())
                .unwrap();
        // Unmodified NP/S: critical region 4 (ambiguous) vs 5 (unambiguous).
        let nps_unmod =
            garden_path_effect(&table, "nps_unmod_ambiguous", 4, "nps_unmod_unambiguous", 5)
                .unwrap();
        assert_eq!(nps_unmod, 14.0);
        let nps_mod =
            garden_path_effect(&table, "nps_mod_ambiguous", 5, "nps_mod_unambiguous", 6).unwrap();
        assert_eq!(nps_mod, 28.0);
        let npz_unmod =
            garden_path_effect(&table, "npz_unmod_ambiguous", 4, "npz_unmod_unambiguous", 4)
                .unwrap();
        assert_eq!(npz_unmod, 69.0);
        let npz_mod =
            garden_path_effect(&table, "npz_mod_ambiguous", 5, "npz_mod_unambiguous", 5).unwrap();
        assert_eq!(npz_mod, 37.0);
    }
}
