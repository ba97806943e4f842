//! Contextuality-by-Default measures on cyclic systems.
//!
//! A cyclic system of rank `n` has `n` contents (questions) and `n`
//! contexts, each context joining exactly two contents and each content
//! appearing in exactly two contexts, with all outcomes coded as +-1. The
//! module provides the `s_odd` criterion, the degree of signalling `Delta`,
//! the `NCNT2` measure, per-content direct influences, and the
//! consistentification construction that turns a signalling cyclic system
//! into a no-signalling empirical model with the same contextuality verdict.

use crate::scenario::{Distribution, EmpiricalModel, Scenario};
use crate::{Error, Result};

/// A rank-`n` cyclic system of +-1-valued random variables.
///
/// Outcome index 0 stands for +1 and index 1 for -1 throughout.
#[derive(Debug, Clone)]
pub struct CyclicSystem {
    contents: Vec<String>,
    context_ids: Vec<String>,
    /// Per context: the two content indices and the joint distribution
    /// `probs[u][v]` of the first content taking outcome `u` and the second
    /// `v` (0 = +1, 1 = -1).
    contexts: Vec<([usize; 2], [[f64; 2]; 2])>,
}

impl CyclicSystem {
    pub fn rank(&self) -> usize {
        self.contents.len()
    }

    pub fn contents(&self) -> &[String] {
        &self.contents
    }

    pub fn context_ids(&self) -> &[String] {
        &self.context_ids
    }

    pub fn context_contents(&self, j: usize) -> [usize; 2] {
        self.contexts[j].0
    }

    pub fn context_probs(&self, j: usize) -> [[f64; 2]; 2] {
        self.contexts[j].1
    }

    /// The two contexts containing content `q`, in context order.
    pub fn contexts_of_content(&self, q: usize) -> [usize; 2] {
        let mut found = [usize::MAX; 2];
        let mut k = 0;
        for (j, (pair, _)) in self.contexts.iter().enumerate() {
            if pair.contains(&q) {
                // Rank-2 systems have both contents in both contexts; count
                // each context once.
                found[k] = j;
                k += 1;
                if k == 2 {
                    break;
                }
            }
        }
        found
    }

    /// `P[R^j_q = v]` with v indexed 0 for +1, 1 for -1.
    pub fn content_marginal(&self, j: usize, q: usize) -> [f64; 2] {
        let (pair, probs) = &self.contexts[j];
        let pos = pair
            .iter()
            .position(|&c| c == q)
            .expect("content in context");
        let mut out = [0.0; 2];
        for u in 0..2 {
            for v in 0..2 {
                let idx = if pos == 0 { u } else { v };
                out[idx] += probs[u][v];
            }
        }
        out
    }

    /// Expectation of the content `q` in context `j`.
    pub fn content_expectation(&self, j: usize, q: usize) -> f64 {
        let m = self.content_marginal(j, q);
        m[0] - m[1]
    }

    /// Expectation of the product of the two contents of context `j`.
    pub fn product_expectation(&self, j: usize) -> f64 {
        let (_, probs) = &self.contexts[j];
        probs[0][0] + probs[1][1] - probs[0][1] - probs[1][0]
    }
}

/// Builds a cyclic system from an empirical model. Every context must hold
/// exactly two observables, every observable must occur in exactly two
/// contexts, and the content-context incidence graph must be one cycle.
///
/// `signs` optionally recodes outcomes per observable; by default outcome
/// index 0 maps to +1 and index 1 to -1.
pub fn from_empirical(model: &EmpiricalModel, signs: Option<&[Vec<f64>]>) -> Result<CyclicSystem> {
    let scenario = model.scenario();
    let n_obs = scenario.observables().len();
    if scenario.n_contexts() != n_obs {
        return Err(Error::UnsupportedScenario(format!(
            "cyclic systems need as many contexts as contents ({} contents, {} contexts)",
            n_obs,
            scenario.n_contexts()
        )));
    }
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n_obs];
    for c in 0..scenario.n_contexts() {
        let ctx = scenario.context(c);
        if ctx.len() != 2 {
            return Err(Error::UnsupportedScenario(format!(
                "context `{}` has {} contents, need exactly 2",
                scenario.context_key(c),
                ctx.len()
            )));
        }
        for &obs in ctx {
            incidence[obs].push(c);
        }
    }
    for (q, ctxs) in incidence.iter().enumerate() {
        if ctxs.len() != 2 {
            return Err(Error::UnsupportedScenario(format!(
                "content `{}` appears in {} contexts, need exactly 2",
                scenario.observables()[q],
                ctxs.len()
            )));
        }
    }
    // Walk the content-context cycle; it must close after visiting all
    // contexts exactly once.
    let mut visited_ctx = vec![false; scenario.n_contexts()];
    let mut q = 0usize;
    let mut steps = 0usize;
    loop {
        let next_ctx = incidence[q].iter().copied().find(|&c| !visited_ctx[c]);
        let Some(c) = next_ctx else { break };
        visited_ctx[c] = true;
        steps += 1;
        let pair = scenario.context(c);
        q = if pair[0] == q { pair[1] } else { pair[0] };
    }
    if steps != scenario.n_contexts() || q != 0 {
        let missing = visited_ctx.iter().position(|&v| !v).unwrap_or(0);
        return Err(Error::UnsupportedScenario(format!(
            "content-context incidence is not a single cycle (context `{}` unreachable from `{}`)",
            scenario.context_key(missing),
            scenario.observables()[0]
        )));
    }

    let coding: Vec<Vec<f64>> = match signs {
        Some(s) => s.to_vec(),
        None => (0..n_obs)
            .map(|obs| {
                if scenario.outcome_alphabet(obs).len() != 2 {
                    Err(Error::UnsupportedScenario(format!(
                        "observable `{}` is not binary; provide an explicit coding",
                        scenario.observables()[obs]
                    )))
                } else {
                    Ok(vec![1.0, -1.0])
                }
            })
            .collect::<Result<_>>()?,
    };

    let mut contexts = Vec::with_capacity(scenario.n_contexts());
    for c in 0..scenario.n_contexts() {
        let ctx = scenario.context(c);
        let mut probs = [[0.0f64; 2]; 2];
        for (tuple, p) in model.distribution(c).entries() {
            let u = sign_index(coding[ctx[0]][tuple[0] as usize])?;
            let v = sign_index(coding[ctx[1]][tuple[1] as usize])?;
            probs[u][v] += p;
        }
        contexts.push(([ctx[0], ctx[1]], probs));
    }
    // Context ids are positional; the scenario's own keys may contain the
    // `|`/`@` separators and cannot be embedded in observable names.
    Ok(CyclicSystem {
        contents: scenario.observables().to_vec(),
        context_ids: (1..=scenario.n_contexts())
            .map(|c| format!("c{c}"))
            .collect(),
        contexts,
    })
}

fn sign_index(sign: f64) -> Result<usize> {
    if sign == 1.0 {
        Ok(0)
    } else if sign == -1.0 {
        Ok(1)
    } else {
        Err(Error::InvalidArgument(format!(
            "coding value {sign} is not +-1"
        )))
    }
}

/// Maximum of `sigma . x` over sign vectors with an odd number of -1
/// entries: the sum of absolute values, minus twice the smallest one when
/// the count of negative entries is even.
pub fn s_odd(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidArgument(
            "s_odd needs at least one argument".into(),
        ));
    }
    let negatives = x.iter().filter(|&&v| v < 0.0).count();
    let total: f64 = x.iter().map(|v| v.abs()).sum();
    if negatives % 2 == 1 {
        Ok(total)
    } else {
        let smallest = x.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        Ok(total - 2.0 * smallest)
    }
}

/// Degree of signalling: the sum over contents of the absolute difference
/// of their expectations in the two contexts containing them. Zero exactly
/// for consistently connected systems.
pub fn degree_of_signalling(sys: &CyclicSystem) -> f64 {
    (0..sys.rank())
        .map(|q| {
            let [j1, j2] = sys.contexts_of_content(q);
            (sys.content_expectation(j1, q) - sys.content_expectation(j2, q)).abs()
        })
        .sum()
}

/// The CbD contextuality criterion: `s_odd` of the within-context product
/// expectations exceeds `n - 2 + Delta`.
pub fn is_cbd_contextual(sys: &CyclicSystem) -> bool {
    criterion_margin(sys) > 0.0
}

/// Margin of the criterion, positive iff contextual:
/// `s_odd({<R R>}) - (n - 2 + Delta)`.
pub fn criterion_margin(sys: &CyclicSystem) -> f64 {
    let products: Vec<f64> = (0..sys.rank())
        .map(|j| sys.product_expectation(j))
        .collect();
    let lhs = s_odd(&products).expect("rank >= 2");
    lhs - (sys.rank() as f64 - 2.0 + degree_of_signalling(sys))
}

/// The `NCNT2` non-contextuality measure: `min(n - 2 + Delta - s_odd({<R
/// R>}), m)` where `m` scans the per-context expressions built from the
/// product expectation and the two +1-marginals. Negative exactly when the
/// system is CbD-contextual.
///
/// The first argument is the negated criterion margin; the `n - 2` term
/// vanishes on the rank-2 systems this measure is usually quoted for.
pub fn ncnt2(sys: &CyclicSystem) -> f64 {
    let products: Vec<f64> = (0..sys.rank())
        .map(|j| sys.product_expectation(j))
        .collect();
    let lhs = s_odd(&products).expect("rank >= 2");
    let bound = sys.rank() as f64 - 2.0 + degree_of_signalling(sys);
    let mut m = f64::INFINITY;
    for j in 0..sys.rank() {
        let [q1, q2] = sys.context_contents(j);
        let rr = sys.product_expectation(j);
        let p1 = sys.content_marginal(j, q1)[0];
        let p2 = sys.content_marginal(j, q2)[0];
        let first = rr - 2.0 * (p1 + p2 - 1.0).abs() + 1.0;
        let second = 1.0 - (p1 - p2).abs() - rr;
        m = m.min(first.min(second));
    }
    (bound - lhs).min(m)
}

/// Minimal direct influence of the context change `ctx_a -> ctx_b` on
/// `content`: one minus the overlap of the content's two marginals.
pub fn direct_influence(
    sys: &CyclicSystem,
    content: usize,
    ctx_a: usize,
    ctx_b: usize,
) -> Result<f64> {
    for j in [ctx_a, ctx_b] {
        if !sys.context_contents(j).contains(&content) {
            return Err(Error::InvalidArgument(format!(
                "content `{}` is not in context `{}`",
                sys.contents()[content],
                sys.context_ids()[j]
            )));
        }
    }
    let ma = sys.content_marginal(ctx_a, content);
    let mb = sys.content_marginal(ctx_b, content);
    Ok(1.0 - (ma[0].min(mb[0]) + ma[1].min(mb[1])))
}

/// Per-content minimal direct influences, over each content's own context
/// pair.
pub fn direct_influences(sys: &CyclicSystem) -> Vec<f64> {
    (0..sys.rank())
        .map(|q| {
            let [j1, j2] = sys.contexts_of_content(q);
            direct_influence(sys, q, j1, j2).expect("content in its own contexts")
        })
        .collect()
}

/// Full CbD report of a cyclic system.
#[derive(Debug, Clone)]
pub struct CbdReport {
    pub s_odd_value: f64,
    pub delta: f64,
    pub contextual: bool,
    pub ncnt2: f64,
    /// `(content name, minimal direct influence)` per content.
    pub direct_influences: Vec<(String, f64)>,
}

pub fn report(sys: &CyclicSystem) -> CbdReport {
    let products: Vec<f64> = (0..sys.rank())
        .map(|j| sys.product_expectation(j))
        .collect();
    CbdReport {
        s_odd_value: s_odd(&products).expect("rank >= 2"),
        delta: degree_of_signalling(sys),
        contextual: is_cbd_contextual(sys),
        ncnt2: ncnt2(sys),
        direct_influences: sys
            .contents()
            .iter()
            .cloned()
            .zip(direct_influences(sys))
            .collect(),
    }
}

/// The maximal coupling of two distributions over the same alphabet:
/// diagonal mass `min(p[v], q[v])`, remaining mass moved by northwest-corner
/// transport over the residuals in descending size (ties by index).
pub fn maximal_coupling(p: &[f64], q: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut joint = vec![vec![0.0; n]; n];
    let mut res_p = vec![0.0; n];
    let mut res_q = vec![0.0; n];
    for v in 0..n {
        let d = p[v].min(q[v]);
        joint[v][v] = d;
        res_p[v] = p[v] - d;
        res_q[v] = q[v] - d;
    }
    let mut rows: Vec<usize> = (0..n).filter(|&v| res_p[v] > 0.0).collect();
    let mut cols: Vec<usize> = (0..n).filter(|&v| res_q[v] > 0.0).collect();
    rows.sort_by(|&a, &b| res_p[b].partial_cmp(&res_p[a]).unwrap().then(a.cmp(&b)));
    cols.sort_by(|&a, &b| res_q[b].partial_cmp(&res_q[a]).unwrap().then(a.cmp(&b)));
    let (mut ri, mut ci) = (0, 0);
    while ri < rows.len() && ci < cols.len() {
        let (r, c) = (rows[ri], cols[ci]);
        let moved = res_p[r].min(res_q[c]);
        joint[r][c] += moved;
        res_p[r] -= moved;
        res_q[c] -= moved;
        if res_p[r] <= 1e-15 {
            ri += 1;
        }
        if res_q[c] <= 1e-15 {
            ci += 1;
        }
    }
    joint
}

/// Consistentification: re-expresses the cyclic system as a no-signalling
/// empirical model over the observables `(content, context)`.
///
/// The original rows become the context family indexed by contexts; each
/// content contributes one more context holding the maximal coupling of its
/// two marginals. Outcome index 0 again stands for +1.
pub fn consistentify(sys: &CyclicSystem) -> Result<EmpiricalModel> {
    let n = sys.rank();
    // Observable (q, c) exists for every content q of context c; named
    // "content@context".
    let mut names = Vec::with_capacity(2 * n);
    let mut index_of = std::collections::BTreeMap::new();
    for j in 0..n {
        for &q in &sys.context_contents(j) {
            let name = format!("{}@{}", sys.contents()[q], sys.context_ids()[j]);
            index_of.insert((q, j), names.len());
            names.push(name);
        }
    }
    let mut contexts: Vec<Vec<String>> = Vec::with_capacity(2 * n);
    for j in 0..n {
        let [q1, q2] = sys.context_contents(j);
        contexts.push(vec![
            names[index_of[&(q1, j)]].clone(),
            names[index_of[&(q2, j)]].clone(),
        ]);
    }
    for q in 0..n {
        let [j1, j2] = sys.contexts_of_content(q);
        contexts.push(vec![
            names[index_of[&(q, j1)]].clone(),
            names[index_of[&(q, j2)]].clone(),
        ]);
    }
    let scenario = Scenario::binary(names.clone(), contexts, vec![])?;

    let mut table = Vec::with_capacity(2 * n);
    for j in 0..n {
        let probs = sys.context_probs(j);
        let pairs = (0..2)
            .flat_map(|u| (0..2).map(move |v| (vec![u as u8, v as u8], probs[u][v])))
            .collect::<Vec<_>>();
        table.push(Distribution::from_pairs(2, pairs)?);
    }
    for q in 0..n {
        let [j1, j2] = sys.contexts_of_content(q);
        let ma = sys.content_marginal(j1, q);
        let mb = sys.content_marginal(j2, q);
        let joint = maximal_coupling(&ma, &mb);
        let mut pairs = Vec::with_capacity(4);
        for u in 0..2 {
            for v in 0..2 {
                pairs.push((vec![u as u8, v as u8], joint[u][v]));
            }
        }
        table.push(Distribution::from_pairs(2, pairs)?);
    }
    EmpiricalModel::new(scenario, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{is_no_signalling, parse_model};

    fn fixture(name: &str) -> CyclicSystem {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        let doc = parse_model(&std::fs::read(path).unwrap()).unwrap();
        assert!(doc.cyclic);
        from_empirical(&doc.model, None).unwrap()
    }

    fn boxer_adopt() -> CyclicSystem {
        fixture("corpus_boxer_adopt.json")
    }

    fn pitcher_throw() -> CyclicSystem {
        fixture("corpus_pitcher_throw.json")
    }

    fn basechsh_rank4() -> CyclicSystem {
        let path = format!(
            "{}/../../fixtures/basechsh.json",
            env!("CARGO_MANIFEST_DIR")
        );
        let doc = parse_model(&std::fs::read(path).unwrap()).unwrap();
        from_empirical(&doc.model, None).unwrap()
    }

    #[test]
    fn corpus_models_are_rank_two() {
        assert_eq!(boxer_adopt().rank(), 2);
        assert_eq!(pitcher_throw().rank(), 2);
    }

    #[test]
    fn basechsh_is_rank_four() {
        assert_eq!(basechsh_rank4().rank(), 4);
    }

    #[test]
    fn broken_cycles_are_rejected_with_the_content_named() {
        // A near-cycle where `a` sits in one context and `b` in three.
        let scenario = Scenario::binary(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                vec!["a".into(), "b".into()],
                vec!["b".into(), "c".into()],
                vec!["c".into(), "d".into()],
                vec!["d".into(), "b".into()],
            ],
            vec![],
        )
        .unwrap();
        let dist =
            || Distribution::from_pairs(2, vec![(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        let model = EmpiricalModel::new(scenario, vec![dist(), dist(), dist(), dist()]).unwrap();
        let err = from_empirical(&model, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`a`"), "error should name the offending content: {msg}");
    }

    #[test]
    fn three_context_chains_are_rejected() {
        let scenario = Scenario::binary(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                vec!["a".into(), "b".into()],
                vec!["b".into(), "c".into()],
                vec!["c".into(), "d".into()],
            ],
            vec![],
        )
        .unwrap();
        let dist =
            || Distribution::from_pairs(2, vec![(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        let model = EmpiricalModel::new(scenario, vec![dist(), dist(), dist()]).unwrap();
        assert!(from_empirical(&model, None).is_err());
    }

    #[test]
    fn s_odd_matches_hand_values() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s_odd(&[r, r, r, -r]).unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(s_odd(&[1.0, -1.0]).unwrap(), 2.0);
        assert_eq!(s_odd(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 2.0);
        assert!(s_odd(&[]).is_err());
    }

    #[test]
    fn s_odd_linear_time_equals_brute_force() {
        // Brute force over the odd-parity sign vectors.
        let brute = |x: &[f64]| -> f64 {
            let n = x.len();
            let mut best = f64::NEG_INFINITY;
            for mask in 0..(1u32 << n) {
                if mask.count_ones() % 2 == 1 {
                    let dot: f64 = (0..n)
                        .map(|k| if mask & (1 << k) != 0 { -x[k] } else { x[k] })
                        .sum();
                    best = best.max(dot);
                }
            }
            best
        };
        let cases: Vec<Vec<f64>> = vec![
            vec![0.3],
            vec![0.2, -0.7],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![0.1, -0.2, 0.3, -0.4, 0.5],
            vec![0.0, 0.4, -0.6],
            vec![-0.25; 12],
        ];
        for x in cases {
            assert!((s_odd(&x).unwrap() - brute(&x)).abs() < 1e-12, "case {x:?}");
        }
    }

    #[test]
    fn boxer_adopt_delta_is_28_over_15() {
        let delta = degree_of_signalling(&boxer_adopt());
        assert!((delta - 28.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn pitcher_throw_delta_is_13_over_15() {
        let delta = degree_of_signalling(&pitcher_throw());
        assert!((delta - 13.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn consistently_connected_system_has_zero_delta() {
        assert!(degree_of_signalling(&basechsh_rank4()).abs() < 1e-12);
    }

    #[test]
    fn corpus_models_are_contextual() {
        assert!(is_cbd_contextual(&boxer_adopt()));
        assert!(is_cbd_contextual(&pitcher_throw()));
    }

    #[test]
    fn basechsh_rank4_is_contextual() {
        let sys = basechsh_rank4();
        assert!(is_cbd_contextual(&sys));
        // s_odd of (1, 1/2, 1/2, -1/2) with zero signalling.
        let products: Vec<f64> = (0..4).map(|j| sys.product_expectation(j)).collect();
        assert!((s_odd(&products).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ncnt2_signs_and_ordering_match_the_criterion() {
        let boxer = ncnt2(&boxer_adopt());
        let pitcher = ncnt2(&pitcher_throw());
        assert!(boxer < 0.0);
        assert!(pitcher < 0.0);
        assert!(pitcher < boxer);
        // Direct evaluation of the formula; magnitudes reported under
        // other conventions differ by a constant factor.
        assert!((boxer - (-2.0 / 15.0)).abs() < 1e-12);
        assert!((pitcher - (-14.0 / 15.0)).abs() < 1e-12);
    }

    #[test]
    fn ncnt2_nonnegative_for_consistent_noncontextual_systems() {
        // A consistently connected rank-2 system with a global distribution.
        let scenario = Scenario::binary(
            vec!["x".into(), "y".into()],
            vec![vec!["x".into(), "y".into()], vec!["x".into(), "y".into()]],
            vec![],
        )
        .unwrap();
        let d = || {
            Distribution::from_pairs(
                2,
                vec![
                    (vec![0, 0], 0.4),
                    (vec![0, 1], 0.2),
                    (vec![1, 0], 0.3),
                    (vec![1, 1], 0.1),
                ],
            )
            .unwrap()
        };
        let model = EmpiricalModel::new(scenario, vec![d(), d()]).unwrap();
        let sys = from_empirical(&model, None).unwrap();
        assert!(!is_cbd_contextual(&sys));
        assert!(ncnt2(&sys) >= 0.0);
    }

    #[test]
    fn boxer_adopt_direct_influences() {
        let sys = boxer_adopt();
        let noun = direct_influence(&sys, 0, 0, 1).unwrap();
        let verb = direct_influence(&sys, 1, 0, 1).unwrap();
        assert!((noun - 43.0 / 60.0).abs() < 1e-12);
        assert!((verb - 13.0 / 60.0).abs() < 1e-12);
        // Prop: Delta = 2 * sum of minimal direct influences.
        let delta = degree_of_signalling(&sys);
        assert!((delta - 2.0 * (noun + verb)).abs() < 1e-12);
    }

    #[test]
    fn identical_contexts_have_zero_direct_influence() {
        let scenario = Scenario::binary(
            vec!["x".into(), "y".into()],
            vec![vec!["x".into(), "y".into()], vec!["x".into(), "y".into()]],
            vec![],
        )
        .unwrap();
        let d = || Distribution::from_pairs(2, vec![(vec![0, 0], 1.0)]).unwrap();
        let model = EmpiricalModel::new(scenario, vec![d(), d()]).unwrap();
        let sys = from_empirical(&model, None).unwrap();
        assert_eq!(direct_influence(&sys, 0, 0, 1).unwrap(), 0.0);
        assert!(direct_influence(&sys, 0, 0, 0).is_ok());
    }

    #[test]
    fn direct_influence_requires_shared_content() {
        let sys = basechsh_rank4();
        // Content a1 (index 0) is in contexts 0 and 1, not in context 3.
        assert!(direct_influence(&sys, 0, 0, 3).is_err());
    }

    #[test]
    fn consistentified_output_is_no_signalling() {
        for sys in [boxer_adopt(), pitcher_throw(), basechsh_rank4()] {
            let model = consistentify(&sys).unwrap();
            assert!(is_no_signalling(&model, 1e-9).ok);
            for dist in model.distributions() {
                assert!((dist.total_mass() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn consistentified_contextuality_matches_the_criterion() {
        let model = consistentify(&boxer_adopt()).unwrap();
        let res = crate::fractions::noncontextual_fraction(&model).unwrap();
        assert!(
            res.lambda < 1.0 - 1e-9,
            "contextual input must stay contextual"
        );
    }

    #[test]
    fn consistentified_consistent_system_is_noncontextual() {
        let scenario = Scenario::binary(
            vec!["x".into(), "y".into()],
            vec![vec!["x".into(), "y".into()], vec!["x".into(), "y".into()]],
            vec![],
        )
        .unwrap();
        let d = || {
            Distribution::from_pairs(
                2,
                vec![
                    (vec![0, 0], 0.4),
                    (vec![0, 1], 0.2),
                    (vec![1, 0], 0.3),
                    (vec![1, 1], 0.1),
                ],
            )
            .unwrap()
        };
        let model = EmpiricalModel::new(scenario, vec![d(), d()]).unwrap();
        let sys = from_empirical(&model, None).unwrap();
        let cons = consistentify(&sys).unwrap();
        let res = crate::fractions::noncontextual_fraction(&cons).unwrap();
        assert!(res.complement.abs() < 1e-9);
    }

    #[test]
    fn maximal_coupling_keeps_marginals_and_diagonal_mass() {
        let p = [0.7, 0.3];
        let q = [0.2, 0.8];
        let joint = maximal_coupling(&p, &q);
        for v in 0..2 {
            let row: f64 = joint[v].iter().sum();
            let col: f64 = (0..2).map(|u| joint[u][v]).sum();
            assert!((row - p[v]).abs() < 1e-12);
            assert!((col - q[v]).abs() < 1e-12);
            assert!((joint[v][v] - p[v].min(q[v])).abs() < 1e-12);
        }
    }
}
