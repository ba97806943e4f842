//! Sheaf-theoretic fractions of empirical models.
//!
//! Every fraction is the maximal weight `lambda` in a convex decomposition
//! `e = lambda * e_good + (1 - lambda) * e_rest`, where `e_good` ranges over
//! the non-contextual models, the no-signalling models, or the models
//! consistent with a definite causal order. Each maximization is a small
//! exact linear program over deterministic strategies or sub-distributions;
//! closed-form fast paths cover the two-context prefix case and the
//! (2,2,2) causal case.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::scenario::{is_no_signalling, Distribution, EmpiricalModel, Scenario};
use crate::simplex::{self, LinearProgram, Sense};
use crate::{Error, Result};

/// Default cap on the number of deterministic global assignments the exact
/// LP will enumerate.
pub const DEFAULT_ASSIGNMENT_CAP: u128 = 1_000_000;

/// Result of a fraction computation. `lambda` is the maximal weight of the
/// well-behaved part; `complement = 1 - lambda` is the contextual,
/// signalling, or non-causal fraction.
#[derive(Debug, Clone)]
pub struct FractionResult {
    pub lambda: f64,
    pub complement: f64,
    /// The sub-model achieving `lambda`, normalized, when `lambda > 0`.
    pub witness: Option<EmpiricalModel>,
}

impl FractionResult {
    fn new(lambda: f64, witness: Option<EmpiricalModel>) -> Self {
        let lambda = lambda.clamp(0.0, 1.0);
        FractionResult {
            lambda,
            complement: 1.0 - lambda,
            witness,
        }
    }
}

/// A definite causal order over the two parties of a scenario, or the
/// absence of one. Parties are addressed by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalOrderSpec {
    /// `(earlier, later)` pairs; must form a strict partial order.
    pub relation: Vec<(String, String)>,
}

impl CausalOrderSpec {
    pub fn no_signalling() -> Self {
        CausalOrderSpec {
            relation: Vec::new(),
        }
    }

    pub fn before(earlier: &str, later: &str) -> Self {
        CausalOrderSpec {
            relation: vec![(earlier.to_string(), later.to_string())],
        }
    }

    /// Checks that the relation is irreflexive and acyclic and that every
    /// named party exists in the scenario.
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let party_names: Vec<&str> = scenario
            .parties()
            .iter()
            .map(|(name, _)| name.as_str())
            .collect();
        for (a, b) in &self.relation {
            if a == b {
                return Err(Error::Schema(format!("party `{a}` ordered before itself")));
            }
            for p in [a, b] {
                if !party_names.contains(&p.as_str()) {
                    return Err(Error::Schema(format!(
                        "unknown party `{p}` in causal order"
                    )));
                }
            }
        }
        // Cycle check by repeated removal of minimal elements.
        let mut edges = self.relation.clone();
        let mut nodes: Vec<String> = party_names.iter().map(|s| s.to_string()).collect();
        loop {
            if edges.is_empty() {
                return Ok(());
            }
            let minimal = nodes
                .iter()
                .position(|n| !edges.iter().any(|(_, later)| later == n))
                .ok_or_else(|| Error::Schema("causal order contains a cycle".into()))?;
            let removed = nodes.remove(minimal);
            edges.retain(|(a, _)| *a != removed);
        }
    }
}

/// Direction of a two-party causal order; `FirstBeforeSecond` means the
/// alphabetically first party can influence the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FirstBeforeSecond,
    SecondBeforeFirst,
}

// ---------------------------------------------------------------------------
// Two-party global-cover bookkeeping
// ---------------------------------------------------------------------------

/// A two-party scenario with the global cover: one context per joint input
/// choice. Inputs are the parties' observables in declaration order.
pub(crate) struct TwoPartyCover {
    /// Observable indices of the first party's inputs.
    pub inputs_a: Vec<usize>,
    pub inputs_b: Vec<usize>,
    /// `context_of[i][j]` is the context measuring `(inputs_a[i],
    /// inputs_b[j])` plus the tuple positions of the two observables in it.
    pub context_of: Vec<Vec<(usize, usize, usize)>>,
}

impl TwoPartyCover {
    pub fn build(scenario: &Scenario) -> Result<Self> {
        if scenario.parties().len() != 2 {
            return Err(Error::UnsupportedScenario(format!(
                "need exactly two parties, got {}",
                scenario.parties().len()
            )));
        }
        let inputs_a = scenario.parties()[0].1.clone();
        let inputs_b = scenario.parties()[1].1.clone();
        if inputs_a.is_empty() || inputs_b.is_empty() {
            return Err(Error::UnsupportedScenario("a party has no inputs".into()));
        }
        if scenario.n_contexts() != inputs_a.len() * inputs_b.len() {
            return Err(Error::UnsupportedScenario(
                "cover is not the global cover (one context per joint input)".into(),
            ));
        }
        let mut context_of = vec![vec![(usize::MAX, 0, 0); inputs_b.len()]; inputs_a.len()];
        for c in 0..scenario.n_contexts() {
            let ctx = scenario.context(c);
            if ctx.len() != 2 {
                return Err(Error::UnsupportedScenario(
                    "global-cover contexts must pair one input per party".into(),
                ));
            }
            let a_pos = ctx.iter().position(|o| inputs_a.contains(o));
            let b_pos = ctx.iter().position(|o| inputs_b.contains(o));
            let (Some(a_pos), Some(b_pos)) = (a_pos, b_pos) else {
                return Err(Error::UnsupportedScenario(
                    "context does not pair the two parties".into(),
                ));
            };
            let i = inputs_a.iter().position(|&o| o == ctx[a_pos]).unwrap();
            let j = inputs_b.iter().position(|&o| o == ctx[b_pos]).unwrap();
            if context_of[i][j].0 != usize::MAX {
                return Err(Error::UnsupportedScenario(
                    "duplicate joint input context".into(),
                ));
            }
            context_of[i][j] = (c, a_pos, b_pos);
        }
        Ok(TwoPartyCover {
            inputs_a,
            inputs_b,
            context_of,
        })
    }

    /// Checks the (2,2,2) shape: two inputs per party, binary outcomes.
    pub fn require_222(&self, scenario: &Scenario) -> Result<()> {
        if self.inputs_a.len() != 2 || self.inputs_b.len() != 2 {
            return Err(Error::UnsupportedScenario(
                "need two inputs per party".into(),
            ));
        }
        for &obs in self.inputs_a.iter().chain(&self.inputs_b) {
            if scenario.outcome_alphabet(obs).len() != 2 {
                return Err(Error::UnsupportedScenario("need binary outcomes".into()));
            }
        }
        Ok(())
    }
}

/// Marginal probability that the first party's input `i` yields outcome `o`
/// in the context where the second party measures input `j`.
fn a_marginal(model: &EmpiricalModel, cover: &TwoPartyCover, i: usize, j: usize, o: u8) -> f64 {
    let (c, a_pos, _) = cover.context_of[i][j];
    model
        .distribution(c)
        .marginal_positions(&[a_pos])
        .prob(&[o])
}

fn b_marginal(model: &EmpiricalModel, cover: &TwoPartyCover, i: usize, j: usize, o: u8) -> f64 {
    let (c, _, b_pos) = cover.context_of[i][j];
    model
        .distribution(c)
        .marginal_positions(&[b_pos])
        .prob(&[o])
}

// ---------------------------------------------------------------------------
// Non-contextual fraction
// ---------------------------------------------------------------------------

/// Computes the non-contextual fraction by the exact LP over deterministic
/// global assignments, with the default assignment cap.
pub fn noncontextual_fraction(model: &EmpiricalModel) -> Result<FractionResult> {
    noncontextual_fraction_with_cap(model, DEFAULT_ASSIGNMENT_CAP)
}

/// As [`noncontextual_fraction`] with an explicit cap on the number of
/// deterministic global assignments.
pub fn noncontextual_fraction_with_cap(
    model: &EmpiricalModel,
    cap: u128,
) -> Result<FractionResult> {
    let scenario = model.scenario();

    // Vorob'ev short circuit: a chain of nested contexts that is already
    // no-signalling has its top distribution as a global section.
    if contexts_form_chain(scenario) && is_no_signalling(model, 1e-9).ok {
        return Ok(FractionResult::new(1.0, Some(model.clone())));
    }

    let count = scenario.global_assignment_count();
    if count > cap {
        return Err(Error::LpCapExceeded {
            assignments: count,
            cap,
        });
    }

    // Deterministic global assignments that never hit a zero-probability
    // tuple; the others are forced to weight zero anyway.
    let sizes: Vec<usize> = (0..scenario.observables().len())
        .map(|i| scenario.outcome_alphabet(i).len())
        .collect();
    let assignments: Vec<Vec<u8>> = crate::scenario::enumerate_tuples(&sizes)
        .into_iter()
        .filter(|g| {
            (0..scenario.n_contexts()).all(|c| {
                let tuple: Vec<u8> = scenario.context(c).iter().map(|&o| g[o]).collect();
                model.distribution(c).prob(&tuple) > 0.0
            })
        })
        .collect();

    if assignments.is_empty() {
        return Ok(FractionResult::new(0.0, None));
    }

    // One inequality row per (context, support tuple).
    let mut row_index: BTreeMap<(usize, Vec<u8>), usize> = BTreeMap::new();
    let mut bounds: Vec<f64> = Vec::new();
    for c in 0..scenario.n_contexts() {
        for (tuple, p) in model.distribution(c).support() {
            row_index.insert((c, tuple.clone()), bounds.len());
            bounds.push(p);
        }
    }

    let mut lp = LinearProgram::new(assignments.len());
    lp.objective = vec![1.0; assignments.len()];
    let mut coeffs = vec![vec![0.0; assignments.len()]; bounds.len()];
    for (v, g) in assignments.iter().enumerate() {
        for c in 0..scenario.n_contexts() {
            let tuple: Vec<u8> = scenario.context(c).iter().map(|&o| g[o]).collect();
            coeffs[row_index[&(c, tuple)]][v] = 1.0;
        }
    }
    for (row, rhs) in coeffs.into_iter().zip(bounds) {
        lp.constrain(row, Sense::Le, rhs);
    }

    let sol = simplex::solve(&lp)?;
    let lambda = sol.objective;
    let witness = if lambda > 1e-12 {
        let mut table = Vec::with_capacity(scenario.n_contexts());
        for c in 0..scenario.n_contexts() {
            let mut probs: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
            for (v, g) in assignments.iter().enumerate() {
                if sol.x[v] > 0.0 {
                    let tuple: Vec<u8> = scenario.context(c).iter().map(|&o| g[o]).collect();
                    *probs.entry(tuple).or_insert(0.0) += sol.x[v] / lambda;
                }
            }
            table.push(Distribution::from_pairs(scenario.context(c).len(), probs)?);
        }
        Some(EmpiricalModel::new(scenario.clone(), table)?)
    } else {
        None
    };
    Ok(FractionResult::new(lambda, witness))
}

fn contexts_form_chain(scenario: &Scenario) -> bool {
    let mut sets: Vec<Vec<usize>> = scenario
        .contexts()
        .iter()
        .map(|ctx| {
            let mut s = ctx.clone();
            s.sort_unstable();
            s
        })
        .collect();
    sets.sort_by_key(|s| s.len());
    sets.windows(2)
        .all(|w| w[0].iter().all(|o| w[1].contains(o)))
}

// ---------------------------------------------------------------------------
// No-signalling fraction
// ---------------------------------------------------------------------------

/// Computes the no-signalling fraction: the largest `t` such that a family
/// of sub-distributions below `e`, of equal mass `t`, has agreeing marginals
/// on every shared subset of observables.
pub fn nosignalling_fraction(model: &EmpiricalModel) -> Result<FractionResult> {
    let scenario = model.scenario();
    let n_ctx = scenario.n_contexts();

    // Variables: one per support tuple of each context, plus the mass t.
    let mut var_of: Vec<BTreeMap<Vec<u8>, usize>> = vec![BTreeMap::new(); n_ctx];
    let mut bounds: Vec<f64> = Vec::new();
    for c in 0..n_ctx {
        for (tuple, p) in model.distribution(c).support() {
            var_of[c].insert(tuple.clone(), bounds.len());
            bounds.push(p);
        }
    }
    let n_sub = bounds.len();
    let t_var = n_sub;
    let mut lp = LinearProgram::new(n_sub + 1);
    lp.objective[t_var] = 1.0;

    for (v, &p) in bounds.iter().enumerate() {
        let mut row = vec![0.0; n_sub + 1];
        row[v] = 1.0;
        lp.constrain(row, Sense::Le, p);
    }
    for c in 0..n_ctx {
        let mut row = vec![0.0; n_sub + 1];
        for &v in var_of[c].values() {
            row[v] = 1.0;
        }
        row[t_var] = -1.0;
        lp.constrain(row, Sense::Eq, 0.0);
    }
    // Marginal agreement on the full intersection of every context pair;
    // agreement on subsets follows by further marginalization.
    for i in 0..n_ctx {
        for j in (i + 1)..n_ctx {
            let shared: Vec<usize> = scenario
                .context(i)
                .iter()
                .copied()
                .filter(|o| scenario.context(j).contains(o))
                .collect();
            if shared.is_empty() {
                continue;
            }
            let restrict = |c: usize, tuple: &[u8]| -> Vec<u8> {
                shared
                    .iter()
                    .map(|&obs| {
                        let pos = scenario.context(c).iter().position(|&o| o == obs).unwrap();
                        tuple[pos]
                    })
                    .collect()
            };
            let mut outcomes: Vec<Vec<u8>> = Vec::new();
            for tuple in var_of[i].keys() {
                let o = restrict(i, tuple);
                if !outcomes.contains(&o) {
                    outcomes.push(o);
                }
            }
            for tuple in var_of[j].keys() {
                let o = restrict(j, tuple);
                if !outcomes.contains(&o) {
                    outcomes.push(o);
                }
            }
            for o in outcomes {
                let mut row = vec![0.0; n_sub + 1];
                for (tuple, &v) in &var_of[i] {
                    if restrict(i, tuple) == o {
                        row[v] += 1.0;
                    }
                }
                for (tuple, &v) in &var_of[j] {
                    if restrict(j, tuple) == o {
                        row[v] -= 1.0;
                    }
                }
                lp.constrain(row, Sense::Eq, 0.0);
            }
        }
    }

    let sol = simplex::solve(&lp)?;
    let t = sol.objective;
    let witness = if t > 1e-12 {
        let mut table = Vec::with_capacity(n_ctx);
        for c in 0..n_ctx {
            let pairs: Vec<(Vec<u8>, f64)> = var_of[c]
                .iter()
                .map(|(tuple, &v)| (tuple.clone(), sol.x[v] / t))
                .collect();
            table.push(Distribution::from_pairs(scenario.context(c).len(), pairs)?);
        }
        Some(EmpiricalModel::new(scenario.clone(), table)?)
    } else {
        None
    };
    Ok(FractionResult::new(t, witness))
}

// ---------------------------------------------------------------------------
// Causal fractions
// ---------------------------------------------------------------------------

fn direction_of(model: &EmpiricalModel, order: &CausalOrderSpec) -> Result<Option<Direction>> {
    order.validate(model.scenario())?;
    let parties = model.scenario().parties();
    if parties.len() != 2 {
        return Err(Error::UnsupportedScenario(
            "need exactly two parties".into(),
        ));
    }
    match order.relation.as_slice() {
        [] => Ok(None),
        [(earlier, _)] => {
            if *earlier == parties[0].0 {
                Ok(Some(Direction::FirstBeforeSecond))
            } else {
                Ok(Some(Direction::SecondBeforeFirst))
            }
        }
        _ => Err(Error::UnsupportedScenario(
            "two-party orders have at most one relation".into(),
        )),
    }
}

/// Computes the causal fraction with respect to a definite two-party causal
/// order (or the no-signalling "order") by the LP over deterministic causal
/// strategies.
///
/// For `A` before `B` the strategies are pairs `(f_A: I_A -> O, f_B: I_A x
/// I_B -> O)`; with no order they are products of local strategies.
pub fn causal_fraction_lp(
    model: &EmpiricalModel,
    order: &CausalOrderSpec,
) -> Result<FractionResult> {
    let direction = direction_of(model, order)?;
    let scenario = model.scenario();
    let cover = TwoPartyCover::build(scenario)?;

    // Work with a "sender" whose input may influence the "receiver". For
    // SecondBeforeFirst the roles swap; with no order the receiver ignores
    // the sender.
    let (inputs_s, inputs_r, swapped) = match direction {
        Some(Direction::SecondBeforeFirst) => (&cover.inputs_b, &cover.inputs_a, true),
        _ => (&cover.inputs_a, &cover.inputs_b, false),
    };
    let receiver_sees_sender = direction.is_some();

    let s_alpha: Vec<usize> = inputs_s
        .iter()
        .map(|&o| scenario.outcome_alphabet(o).len())
        .collect();
    let r_alpha: Vec<usize> = inputs_r
        .iter()
        .map(|&o| scenario.outcome_alphabet(o).len())
        .collect();

    let sender_strategies = crate::scenario::enumerate_tuples(&s_alpha);
    let receiver_sizes: Vec<usize> = if receiver_sees_sender {
        (0..inputs_s.len())
            .flat_map(|_| r_alpha.iter().copied())
            .collect()
    } else {
        r_alpha.clone()
    };
    let receiver_count: u128 = receiver_sizes.iter().map(|&s| s as u128).product();
    let total = (sender_strategies.len() as u128).saturating_mul(receiver_count);
    if total > DEFAULT_ASSIGNMENT_CAP {
        return Err(Error::LpCapExceeded {
            assignments: total,
            cap: DEFAULT_ASSIGNMENT_CAP,
        });
    }
    let receiver_strategies = crate::scenario::enumerate_tuples(&receiver_sizes);

    // Tuple a strategy produces in the context of sender input i, receiver
    // input j.
    let locate = |i: usize, j: usize| -> (usize, usize, usize) {
        if swapped {
            cover.context_of[j][i]
        } else {
            cover.context_of[i][j]
        }
    };
    let strategy_tuple = |fs: &[u8], fr: &[u8], i: usize, j: usize| -> (usize, Vec<u8>) {
        let s_out = fs[i];
        let r_out = if receiver_sees_sender {
            fr[i * inputs_r.len() + j]
        } else {
            fr[j]
        };
        let (c, a_pos, b_pos) = locate(i, j);
        let mut tuple = vec![0u8; 2];
        // a_pos/b_pos address the first/second party in scenario order.
        let (s_pos, r_pos) = if swapped {
            (b_pos, a_pos)
        } else {
            (a_pos, b_pos)
        };
        tuple[s_pos] = s_out;
        tuple[r_pos] = r_out;
        (c, tuple)
    };

    // Strategies hitting any zero-probability tuple are forced to zero.
    let mut strategies: Vec<(usize, usize)> = Vec::new();
    for (si, fs) in sender_strategies.iter().enumerate() {
        'next: for (ri, fr) in receiver_strategies.iter().enumerate() {
            for i in 0..inputs_s.len() {
                for j in 0..inputs_r.len() {
                    let (c, tuple) = strategy_tuple(fs, fr, i, j);
                    if model.distribution(c).prob(&tuple) <= 0.0 {
                        continue 'next;
                    }
                }
            }
            strategies.push((si, ri));
        }
    }
    if strategies.is_empty() {
        return Ok(FractionResult::new(0.0, None));
    }

    let mut row_index: BTreeMap<(usize, Vec<u8>), usize> = BTreeMap::new();
    let mut bounds: Vec<f64> = Vec::new();
    for c in 0..scenario.n_contexts() {
        for (tuple, p) in model.distribution(c).support() {
            row_index.insert((c, tuple.clone()), bounds.len());
            bounds.push(p);
        }
    }
    let mut lp = LinearProgram::new(strategies.len());
    lp.objective = vec![1.0; strategies.len()];
    let mut coeffs = vec![vec![0.0; strategies.len()]; bounds.len()];
    for (v, &(si, ri)) in strategies.iter().enumerate() {
        let fs = &sender_strategies[si];
        let fr = &receiver_strategies[ri];
        for i in 0..inputs_s.len() {
            for j in 0..inputs_r.len() {
                let (c, tuple) = strategy_tuple(fs, fr, i, j);
                coeffs[row_index[&(c, tuple)]][v] = 1.0;
            }
        }
    }
    for (row, rhs) in coeffs.into_iter().zip(bounds) {
        lp.constrain(row, Sense::Le, rhs);
    }

    let sol = simplex::solve(&lp)?;
    let lambda = sol.objective;
    let witness = if lambda > 1e-12 {
        let mut table: Vec<BTreeMap<Vec<u8>, f64>> = vec![BTreeMap::new(); scenario.n_contexts()];
        for (v, &(si, ri)) in strategies.iter().enumerate() {
            if sol.x[v] <= 0.0 {
                continue;
            }
            let fs = &sender_strategies[si];
            let fr = &receiver_strategies[ri];
            for i in 0..inputs_s.len() {
                for j in 0..inputs_r.len() {
                    let (c, tuple) = strategy_tuple(fs, fr, i, j);
                    *table[c].entry(tuple).or_insert(0.0) += sol.x[v] / lambda;
                }
            }
        }
        let table: Vec<Distribution> = table
            .into_iter()
            .enumerate()
            .map(|(c, probs)| Distribution::from_pairs(scenario.context(c).len(), probs))
            .collect::<Result<_>>()?;
        Some(EmpiricalModel::new(scenario.clone(), table)?)
    } else {
        None
    };
    Ok(FractionResult::new(lambda, witness))
}

/// Closed form for the causal fraction of a (2,2,2) global-cover model:
/// the minimum over the earlier party's inputs and outcomes of one minus
/// the cross-context marginal gap.
pub fn causal_fraction_222(model: &EmpiricalModel, direction: Direction) -> Result<f64> {
    let cover = TwoPartyCover::build(model.scenario())?;
    cover.require_222(model.scenario())?;
    let mut best = f64::INFINITY;
    for i in 0..2 {
        for o in 0..2u8 {
            let gap = match direction {
                Direction::FirstBeforeSecond => {
                    (a_marginal(model, &cover, i, 0, o) - a_marginal(model, &cover, i, 1, o)).abs()
                }
                Direction::SecondBeforeFirst => {
                    (b_marginal(model, &cover, 0, i, o) - b_marginal(model, &cover, 1, i, o)).abs()
                }
            };
            best = best.min(1.0 - gap);
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Prefix signalling fraction
// ---------------------------------------------------------------------------

/// Signalling fraction of a two-context model whose contexts are nested:
/// `SF = 1 - sum_o min(e_long|_short(o), e_short(o))`.
pub fn sf_prefix(model: &EmpiricalModel) -> Result<f64> {
    let scenario = model.scenario();
    if scenario.n_contexts() != 2 {
        return Err(Error::UnsupportedScenario(
            "prefix SF needs exactly two contexts".into(),
        ));
    }
    let (short, long) = if scenario.context(0).len() <= scenario.context(1).len() {
        (0usize, 1usize)
    } else {
        (1, 0)
    };
    let short_obs = scenario.context(short);
    if !short_obs.iter().all(|o| scenario.context(long).contains(o)) {
        return Err(Error::UnsupportedScenario("contexts are not nested".into()));
    }
    let restricted = model.marginal(long, short_obs)?;
    let short_dist = model.distribution(short);
    let mut overlap = 0.0;
    for (tuple, p) in restricted.support() {
        overlap += p.min(short_dist.prob(tuple));
    }
    Ok(1.0 - overlap)
}

// ---------------------------------------------------------------------------
// Minimal cost bound
// ---------------------------------------------------------------------------

/// Lower bound on the total-variation distance from `model` to any model
/// compatible with the first-before-second causal order:
/// `(1 - CausF)/CausF * m(e)`.
///
/// The earlier party's input attaining the causal fraction is selected
/// first (ties: lowest input index), then the later party's inputs are
/// relabelled so that the attaining marginal difference is nonnegative.
pub fn minimal_cost(model: &EmpiricalModel) -> Result<f64> {
    let cover = TwoPartyCover::build(model.scenario())?;
    cover.require_222(model.scenario())?;
    let causf = causal_fraction_222(model, Direction::FirstBeforeSecond)?;
    if causf <= 1e-12 {
        return Err(Error::InvalidArgument(
            "causal fraction is zero; the minimal-cost bound is undefined".into(),
        ));
    }
    let gap =
        |i: usize| (a_marginal(model, &cover, i, 0, 0) - a_marginal(model, &cover, i, 1, 0)).abs();
    let a_star = if gap(0) >= gap(1) { 0 } else { 1 };
    let m0 = a_marginal(model, &cover, a_star, 0, 0);
    let m1 = a_marginal(model, &cover, a_star, 1, 0);
    // Relabel the later party's inputs so alpha0 >= alpha1.
    let (alpha0, alpha1) = if m0 >= m1 { (m0, m1) } else { (m1, m0) };
    let m_e = (1.0 - alpha0).min(alpha1);
    Ok((1.0 - causf) / causf * m_e)
}

// ---------------------------------------------------------------------------
// Bell inequality values
// ---------------------------------------------------------------------------

/// CHSH expression `|<ab> + <ab'> + <a'b> - <a'b'>|` of a (2,2,2) model.
pub fn chsh_value(model: &EmpiricalModel, signs: Option<&[Vec<f64>]>) -> Result<f64> {
    let cover = TwoPartyCover::build(model.scenario())?;
    cover.require_222(model.scenario())?;
    let mut e = [[0.0f64; 2]; 2];
    for (i, row) in e.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (c, a_pos, b_pos) = cover.context_of[i][j];
            *cell = match signs {
                Some(s) => {
                    // Reorder the per-party coding to tuple positions.
                    let mut ordered = vec![Vec::new(); 2];
                    ordered[a_pos] = s[0].clone();
                    ordered[b_pos] = s[1].clone();
                    crate::scenario::correlator_with_signs(model.distribution(c), &ordered)?
                }
                None => model.correlator(c, None)?,
            };
        }
    }
    Ok((e[0][0] + e[0][1] + e[1][0] - e[1][1]).abs())
}

/// The (2,2,2) probability table realizing the quantum CHSH correlators
/// `(1/sqrt2, 1/sqrt2, 1/sqrt2, -1/sqrt2)` with uniform marginals; its CHSH
/// value is `2*sqrt(2)`.
pub fn chsh_quantum_model() -> EmpiricalModel {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let hi = (1.0 + r) / 4.0;
    let lo = (1.0 - r) / 4.0;
    let rows = [
        [hi, lo, lo, hi],
        [hi, lo, lo, hi],
        [hi, lo, lo, hi],
        [lo, hi, hi, lo],
    ];
    build_222_model(&rows).expect("static table")
}

/// The uniform (2,2,2) model: every context is the uniform distribution.
pub fn uniform_222_model() -> EmpiricalModel {
    build_222_model(&[[0.25; 4]; 4]).expect("static table")
}

/// Builds a (2,2,2) model from four rows ordered `(a1,b1), (a1,b2), (a2,b1),
/// (a2,b2)` with outcome columns `(0,0), (0,1), (1,0), (1,1)`.
pub fn build_222_model(rows: &[[f64; 4]; 4]) -> Result<EmpiricalModel> {
    let scenario = Scenario::binary(
        vec!["a1".into(), "a2".into(), "b1".into(), "b2".into()],
        vec![
            vec!["a1".into(), "b1".into()],
            vec!["a1".into(), "b2".into()],
            vec!["a2".into(), "b1".into()],
            vec!["a2".into(), "b2".into()],
        ],
        vec![
            ("A".into(), vec!["a1".into(), "a2".into()]),
            ("B".into(), vec!["b1".into(), "b2".into()]),
        ],
    )?;
    let table = rows
        .iter()
        .map(|row| {
            Distribution::from_pairs(
                2,
                vec![
                    (vec![0, 0], row[0]),
                    (vec![0, 1], row[1]),
                    (vec![1, 0], row[2]),
                    (vec![1, 1], row[3]),
                ],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalModel::new(scenario, table)
}

/// Sum of the five cyclically adjacent correlators of a KCBS experiment.
/// Deterministic +-1 assignments obey `sum >= -3`.
pub fn kcbs_value(correlators: &[f64]) -> Result<f64> {
    if correlators.len() != 5 {
        return Err(Error::InvalidArgument(format!(
            "KCBS needs five correlators, got {}",
            correlators.len()
        )));
    }
    Ok(correlators.iter().sum())
}

/// Builds the five qutrit states of the KCBS construction, checks that
/// cyclically adjacent pairs are orthogonal, and returns the five
/// expectation values `<psi| P_k P_{k+1} |psi>` for `psi = |2>` with
/// `P_k = 2|v_k><v_k| - I`. Each equals `(1 - 3cos(pi/5)) / (2cos^2(pi/10))`.
pub fn kcbs_quantum_correlators() -> Result<[f64; 5]> {
    let pi = std::f64::consts::PI;
    let c = (pi / 5.0).cos();
    let z = c.sqrt();
    let raw: [[f64; 3]; 5] = [
        [1.0, 0.0, z],
        [(4.0 * pi / 5.0).cos(), (4.0 * pi / 5.0).sin(), z],
        [(2.0 * pi / 5.0).cos(), -(2.0 * pi / 5.0).sin(), z],
        [(2.0 * pi / 5.0).cos(), (2.0 * pi / 5.0).sin(), z],
        [(4.0 * pi / 5.0).cos(), -(4.0 * pi / 5.0).sin(), z],
    ];
    let vectors: Vec<[Complex64; 3]> = raw
        .iter()
        .map(|v| {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [
                Complex64::new(v[0] / norm, 0.0),
                Complex64::new(v[1] / norm, 0.0),
                Complex64::new(v[2] / norm, 0.0),
            ]
        })
        .collect();
    for k in 0..5 {
        let u = &vectors[k];
        let w = &vectors[(k + 1) % 5];
        let inner: Complex64 = (0..3).map(|d| u[d].conj() * w[d]).sum();
        if inner.norm() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "KCBS states {k} and {} not orthogonal (|<u|w>| = {:.3e})",
                (k + 1) % 5,
                inner.norm()
            )));
        }
    }
    let psi = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ];
    let projector = |v: &[Complex64; 3]| -> [[Complex64; 3]; 3] {
        let mut p = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (r, row) in p.iter_mut().enumerate() {
            for (cidx, cell) in row.iter_mut().enumerate() {
                *cell = 2.0 * v[r] * v[cidx].conj();
                if r == cidx {
                    *cell -= 1.0;
                }
            }
        }
        p
    };
    let mut out = [0.0f64; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        let p1 = projector(&vectors[k]);
        let p2 = projector(&vectors[(k + 1) % 5]);
        let mut p2psi = [Complex64::new(0.0, 0.0); 3];
        for r in 0..3 {
            for cidx in 0..3 {
                p2psi[r] += p2[r][cidx] * psi[cidx];
            }
        }
        let mut p1p2psi = [Complex64::new(0.0, 0.0); 3];
        for r in 0..3 {
            for cidx in 0..3 {
                p1p2psi[r] += p1[r][cidx] * p2psi[cidx];
            }
        }
        let val: Complex64 = (0..3).map(|d| psi[d].conj() * p1p2psi[d]).sum();
        *slot = val.re;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Causal fraction upper bound
// ---------------------------------------------------------------------------

/// Upper bound on the causal fraction for the given order, from marginal
/// overlaps on context intersections. For a definite order only the earlier
/// party's shared marginals constrain the bound (later-party intersections
/// are not sub-scenarios of the order); with no order every shared subset
/// constrains it.
pub fn causal_upper_bound(model: &EmpiricalModel, order: &CausalOrderSpec) -> Result<f64> {
    let scenario = model.scenario();
    let direction = if order.relation.is_empty() {
        None
    } else {
        direction_of(model, order)?
    };
    let earlier_party: Option<&[usize]> = match direction {
        Some(Direction::FirstBeforeSecond) => Some(&scenario.parties()[0].1),
        Some(Direction::SecondBeforeFirst) => Some(&scenario.parties()[1].1),
        None => None,
    };
    let mut bound = 1.0f64;
    for i in 0..scenario.n_contexts() {
        for j in (i + 1)..scenario.n_contexts() {
            let mut shared: Vec<usize> = scenario
                .context(i)
                .iter()
                .copied()
                .filter(|o| scenario.context(j).contains(o))
                .collect();
            if let Some(earlier) = earlier_party {
                shared.retain(|o| earlier.contains(o));
            }
            if shared.is_empty() {
                continue;
            }
            let mi = model.marginal(i, &shared)?;
            let mj = model.marginal(j, &shared)?;
            let mut overlap = 0.0;
            for (tuple, p) in mi.support() {
                overlap += p.min(mj.prob(tuple));
            }
            bound = bound.min(overlap);
        }
    }
    Ok(bound)
}
