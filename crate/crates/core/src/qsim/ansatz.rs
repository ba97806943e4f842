//! The two-party variational circuit, its empirical model, and training.
//!
//! Layout: qubit 0 carries the noun-side input and is its readout; qubit 1
//! starts as the ancilla `|0>`, leaves the noun gate as the shared wire into
//! the verb gate, and is discarded at the end; qubit 2 carries the verb
//! input and is the verb readout. Each party gate acts on two qubits and
//! consists of `rounds` repetitions of per-qubit `RX, RZ, RX` rotations
//! followed by one CZ, so a full circuit trains `12 * rounds` angles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gates::{cz, rx, rz};
use super::state::{partial_trace, DensityMatrix, StateVector, Unitary};
use crate::fractions::{causal_fraction_222, minimal_cost, Direction};
use crate::scenario::{Distribution, EmpiricalModel, Scenario};
use crate::{Error, Result};

/// Which phrase shape a circuit models; fixes the party names of the
/// emitted empirical model (subject-verb or verb-object). In both shapes the
/// noun party acts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    SubjectVerb,
    VerbObject,
}

impl Shape {
    /// `(noun party, verb party)` names; the noun party sorts first so the
    /// exactly-causal direction is always `FirstBeforeSecond`.
    fn party_names(self) -> (&'static str, &'static str) {
        match self {
            Shape::SubjectVerb => ("S", "V"),
            Shape::VerbObject => ("O", "V"),
        }
    }
}

/// Per-qubit Euler angles of one round, in application order `RX, RZ, RX`.
pub type RoundAngles = [[f64; 3]; 2];

/// Trained (or trainable) parameters of the two party gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub rounds: usize,
    pub noun: Vec<RoundAngles>,
    pub verb: Vec<RoundAngles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AnsatzParams {
    /// All-zero angles; each party gate degenerates to `CZ^rounds`.
    pub fn zeros(rounds: usize) -> Self {
        AnsatzParams {
            rounds,
            noun: vec![[[0.0; 3]; 2]; rounds],
            verb: vec![[[0.0; 3]; 2]; rounds],
            seed: None,
        }
    }

    /// Draws all `12 * rounds` angles uniformly from `[0, 2*pi)` with a
    /// seeded generator.
    pub fn seeded_uniform(rounds: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |_: usize| -> Vec<RoundAngles> {
            (0..rounds)
                .map(|_| {
                    let mut round = [[0.0; 3]; 2];
                    for qubit in &mut round {
                        for angle in qubit.iter_mut() {
                            *angle = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                        }
                    }
                    round
                })
                .collect()
        };
        let noun = draw(0);
        let verb = draw(1);
        AnsatzParams {
            rounds,
            noun,
            verb,
            seed: Some(seed),
        }
    }

    pub fn n_parameters(&self) -> usize {
        12 * self.rounds
    }

    /// Flattens to `noun` angles then `verb` angles, rounds outermost.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_parameters());
        for side in [&self.noun, &self.verb] {
            for round in side {
                for qubit in round {
                    out.extend_from_slice(qubit);
                }
            }
        }
        out
    }

    pub fn from_flat(rounds: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != 12 * rounds {
            return Err(Error::InvalidArgument(format!(
                "expected {} angles, got {}",
                12 * rounds,
                theta.len()
            )));
        }
        let mut params = AnsatzParams::zeros(rounds);
        let mut it = theta.iter();
        for side in [&mut params.noun, &mut params.verb] {
            for round in side.iter_mut() {
                for qubit in round.iter_mut() {
                    for angle in qubit.iter_mut() {
                        *angle = *it.next().unwrap();
                    }
                }
            }
        }
        Ok(params)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("serializable");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let params: AnsatzParams = serde_json::from_slice(bytes)
            .map_err(|e| Error::Schema(format!("invalid parameter file: {e}")))?;
        if params.noun.len() != params.rounds || params.verb.len() != params.rounds {
            return Err(Error::Schema(
                "round count does not match angle lists".into(),
            ));
        }
        Ok(params)
    }
}

/// One gate application in a circuit description.
#[derive(Debug, Clone)]
pub struct CircuitOp {
    pub gate: Unitary,
    pub targets: Vec<usize>,
}

/// Expands one party's rounds into the gate sequence on qubits `(0, 1)`:
/// per round `RX, RZ, RX` on each qubit, then a CZ across the pair.
pub fn build_ansatz(rounds: &[RoundAngles]) -> Vec<CircuitOp> {
    let mut ops = Vec::with_capacity(rounds.len() * 7);
    for round in rounds {
        for (qubit, angles) in round.iter().enumerate() {
            ops.push(CircuitOp {
                gate: rx(angles[0]),
                targets: vec![qubit],
            });
            ops.push(CircuitOp {
                gate: rz(angles[1]),
                targets: vec![qubit],
            });
            ops.push(CircuitOp {
                gate: rx(angles[2]),
                targets: vec![qubit],
            });
        }
        ops.push(CircuitOp {
            gate: cz(),
            targets: vec![0, 1],
        });
    }
    ops
}

/// Composes one party's rounds into a single 4x4 unitary on its two qubits.
pub fn party_unitary(rounds: &[RoundAngles]) -> Unitary {
    let mut state_ops = Unitary::identity(4);
    for op in build_ansatz(rounds) {
        let full = if op.targets.len() == 2 {
            op.gate
        } else {
            super::state::embed_gate(&op.gate, &op.targets, 2).expect("two-qubit embedding")
        };
        state_ops = full.matmul(&state_ops);
    }
    state_ops
}

/// Runs the three-qubit circuit for one joint input and returns the final
/// pure state.
pub fn circuit_state(params: &AnsatzParams, noun_input: u8, verb_input: u8) -> StateVector {
    let mut state = StateVector::basis(&[noun_input, 0, verb_input]);
    let noun_gate = party_unitary(&params.noun);
    let verb_gate = party_unitary(&params.verb);
    state.apply_unitary(&noun_gate, &[0, 1]).expect("noun gate");
    state.apply_unitary(&verb_gate, &[1, 2]).expect("verb gate");
    state
}

/// Exact outcome distribution over `(noun readout, verb readout)` for one
/// joint input, tracing the shared wire.
pub fn outcome_distribution(params: &AnsatzParams, noun_input: u8, verb_input: u8) -> [f64; 4] {
    let state = circuit_state(params, noun_input, verb_input);
    let mut out = [0.0f64; 4];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let o_noun = (idx >> 2) & 1;
        let o_verb = idx & 1;
        out[o_noun * 2 + o_verb] += amp.norm_sqr();
    }
    out
}

/// The empirical model of the circuit over the four joint inputs. The model
/// is exactly causal for the noun-before-verb order by construction.
pub fn circuit_model(params: &AnsatzParams, shape: Shape) -> EmpiricalModel {
    circuit_model_inner(params, shape, None)
}

/// As [`circuit_model`] but estimating each row from `shots` samples drawn
/// with the given generator instead of exact Born probabilities.
pub fn circuit_model_sampled(
    params: &AnsatzParams,
    shape: Shape,
    shots: u32,
    rng: &mut ChaCha8Rng,
) -> EmpiricalModel {
    circuit_model_inner(params, shape, Some((shots, rng)))
}

fn circuit_model_inner(
    params: &AnsatzParams,
    shape: Shape,
    sampling: Option<(u32, &mut ChaCha8Rng)>,
) -> EmpiricalModel {
    let (noun_party, verb_party) = shape.party_names();
    let noun_obs = [
        format!("{}0", noun_party.to_lowercase()),
        format!("{}1", noun_party.to_lowercase()),
    ];
    let verb_obs = [
        format!("{}0", verb_party.to_lowercase()),
        format!("{}1", verb_party.to_lowercase()),
    ];
    let contexts: Vec<Vec<String>> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| vec![noun_obs[i].clone(), verb_obs[j].clone()])
        .collect();
    let scenario = Scenario::binary(
        vec![
            noun_obs[0].clone(),
            noun_obs[1].clone(),
            verb_obs[0].clone(),
            verb_obs[1].clone(),
        ],
        contexts,
        vec![
            (
                noun_party.to_string(),
                vec![noun_obs[0].clone(), noun_obs[1].clone()],
            ),
            (
                verb_party.to_string(),
                vec![verb_obs[0].clone(), verb_obs[1].clone()],
            ),
        ],
    )
    .expect("static scenario");

    let mut sampling = sampling;
    let mut table = Vec::with_capacity(4);
    for i in 0..2u8 {
        for j in 0..2u8 {
            let mut row = outcome_distribution(params, i, j);
            if let Some((shots, rng)) = sampling.as_mut() {
                row = sample_row(&row, *shots, rng);
            }
            let pairs = vec![
                (vec![0u8, 0u8], row[0]),
                (vec![0, 1], row[1]),
                (vec![1, 0], row[2]),
                (vec![1, 1], row[3]),
            ];
            table.push(Distribution::from_pairs(2, pairs).expect("valid row"));
        }
    }
    EmpiricalModel::new(scenario, table).expect("matching table")
}

fn sample_row(row: &[f64; 4], shots: u32, rng: &mut ChaCha8Rng) -> [f64; 4] {
    let mut counts = [0u32; 4];
    for _ in 0..shots {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = 3;
        for (k, &p) in row.iter().enumerate() {
            acc += p;
            if r < acc {
                chosen = k;
                break;
            }
        }
        counts[chosen] += 1;
    }
    let mut out = [0.0f64; 4];
    for k in 0..4 {
        out[k] = counts[k] as f64 / shots as f64;
    }
    out
}

/// Total variation between two models on the same scenario: half the
/// largest per-context L1 distance.
pub fn total_variation(a: &EmpiricalModel, b: &EmpiricalModel) -> Result<f64> {
    if a.scenario() != b.scenario() {
        return Err(Error::InvalidArgument(
            "models live on different scenarios".into(),
        ));
    }
    let mut worst = 0.0f64;
    for c in 0..a.scenario().n_contexts() {
        let da = a.distribution(c);
        let db = b.distribution(c);
        let mut tuples: Vec<Vec<u8>> = da.entries().map(|(t, _)| t.clone()).collect();
        for (t, _) in db.entries() {
            if !tuples.contains(t) {
                tuples.push(t.clone());
            }
        }
        let l1: f64 = tuples.iter().map(|t| (da.prob(t) - db.prob(t)).abs()).sum();
        worst = worst.max(0.5 * l1);
    }
    Ok(worst)
}

/// Central finite differences `(L(theta + d e_i) - L(theta - d e_i)) / 2d`.
pub fn finite_diff_gradient<F>(cost: F, theta: &[f64], delta: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut grad = Vec::with_capacity(theta.len());
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        probe[i] = theta[i] + delta;
        let up = cost(&probe);
        probe[i] = theta[i] - delta;
        let down = cost(&probe);
        probe[i] = theta[i];
        grad.push((up - down) / (2.0 * delta));
    }
    grad
}

/// Training configuration. `shots = 0` evaluates exact Born probabilities.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub gamma: f64,
    pub delta: f64,
    pub steps: usize,
    pub seed: u64,
    pub shots: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 1e-2,
            delta: 1e-2,
            steps: 500,
            seed: 0,
            shots: 0,
        }
    }
}

/// Outcome of a training run. `params` is the lowest-cost iterate seen, so
/// the reported cost never exceeds the initial one; non-convergence shows up
/// in the trace rather than as an error.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: AnsatzParams,
    pub final_cost: f64,
    /// Cost of the iterate at every step, starting with the initial draw.
    pub trace: Vec<f64>,
}

/// Trains the ansatz against a target model by plain fixed-step gradient
/// descent on the total-variation cost, with central-difference gradients.
/// Deterministic for a fixed `(target, shape, rounds, config)`.
pub fn train(
    target: &EmpiricalModel,
    shape: Shape,
    rounds: usize,
    config: &TrainConfig,
) -> Result<TrainResult> {
    if config.gamma <= 0.0 || config.delta <= 0.0 {
        return Err(Error::InvalidArgument(
            "gamma and delta must be positive".into(),
        ));
    }
    // The target must live on the circuit's own scenario so costs compare
    // like with like.
    let probe = circuit_model(&AnsatzParams::zeros(rounds), shape);
    if probe.scenario() != target.scenario() {
        return Err(Error::InvalidArgument(
            "target scenario does not match the circuit scenario for this shape".into(),
        ));
    }

    let mut shot_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let cost_of = |theta: &[f64], rng: &mut ChaCha8Rng| -> f64 {
        let params = AnsatzParams::from_flat(rounds, theta).expect("flat length");
        let model = if config.shots == 0 {
            circuit_model(&params, shape)
        } else {
            circuit_model_sampled(&params, shape, config.shots, rng)
        };
        total_variation(&model, target).expect("same scenario")
    };

    let init = AnsatzParams::seeded_uniform(rounds, config.seed);
    let mut theta = init.flatten();
    let mut trace = Vec::with_capacity(config.steps + 1);
    let mut best_theta = theta.clone();
    let mut best_cost = cost_of(&theta, &mut shot_rng);
    trace.push(best_cost);

    for _ in 0..config.steps {
        let grad = {
            let mut grad = Vec::with_capacity(theta.len());
            let mut probe = theta.clone();
            for i in 0..theta.len() {
                probe[i] = theta[i] + config.delta;
                let up = cost_of(&probe, &mut shot_rng);
                probe[i] = theta[i] - config.delta;
                let down = cost_of(&probe, &mut shot_rng);
                probe[i] = theta[i];
                grad.push((up - down) / (2.0 * config.delta));
            }
            grad
        };
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= config.gamma * g;
        }
        let cost = cost_of(&theta, &mut shot_rng);
        trace.push(cost);
        if cost < best_cost {
            best_cost = cost;
            best_theta = theta.clone();
        }
    }

    // The minimal-cost lower bound applies to every model that is exactly
    // causal for the noun-before-verb order, which the circuit is by
    // construction.
    if let Ok(bound) = minimal_cost(target) {
        assert!(
            best_cost >= bound - 1e-9,
            "training cost {best_cost} undercuts the minimal-cost bound {bound}"
        );
    }

    let mut params = AnsatzParams::from_flat(rounds, &best_theta)?;
    params.seed = Some(config.seed);
    Ok(TrainResult {
        params,
        final_cost: best_cost,
        trace,
    })
}

/// Combines the noun gate of one trained circuit with the verb gate of
/// another. Both must use the same number of rounds.
pub fn recombine(noun_from: &AnsatzParams, verb_from: &AnsatzParams) -> Result<AnsatzParams> {
    if noun_from.rounds != verb_from.rounds {
        return Err(Error::InvalidArgument(format!(
            "round mismatch: {} vs {}",
            noun_from.rounds, verb_from.rounds
        )));
    }
    Ok(AnsatzParams {
        rounds: noun_from.rounds,
        noun: noun_from.noun.clone(),
        verb: verb_from.verb.clone(),
        seed: None,
    })
}

/// Which party a word state is extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Noun,
    Verb,
}

/// A word state: pure for nouns, mixed for verbs.
#[derive(Debug, Clone)]
pub enum WordState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

/// Extracts the quantum state representing one word.
///
/// Nouns: the two-qubit pure state `U_noun |input, 0>`. Verbs: the verb gate
/// applied to the maximally mixed state on the shared wire tensored with
/// `|input><input|`, with the discarded wire traced out, leaving a one-qubit
/// density matrix on the readout.
pub fn word_state(params: &AnsatzParams, party: Party, input: u8) -> Result<WordState> {
    if input > 1 {
        return Err(Error::InvalidArgument("input must be 0 or 1".into()));
    }
    match party {
        Party::Noun => {
            let mut state = StateVector::basis(&[input, 0]);
            state.apply_unitary(&party_unitary(&params.noun), &[0, 1])?;
            Ok(WordState::Pure(state))
        }
        Party::Verb => {
            let input_dm = StateVector::basis(&[input]).density_matrix();
            let mut rho = DensityMatrix::maximally_mixed(1).tensor(&input_dm);
            rho.apply_unitary(&party_unitary(&params.verb), &[0, 1])?;
            let reduced = partial_trace(&rho, &[1])?;
            Ok(WordState::Mixed(reduced))
        }
    }
}

/// Overlap of two word states of the same kind: the Born rule
/// `|<psi|phi>|^2` for pure states, `Tr(rho sigma)` for mixed ones.
pub fn state_overlap(a: &WordState, b: &WordState) -> Result<f64> {
    match (a, b) {
        (WordState::Pure(x), WordState::Pure(y)) => {
            if x.n_qubits() != y.n_qubits() {
                return Err(Error::InvalidArgument("dimension mismatch".into()));
            }
            let inner: num_complex::Complex64 = x
                .amplitudes()
                .iter()
                .zip(y.amplitudes())
                .map(|(ax, ay)| ax.conj() * ay)
                .sum();
            Ok(inner.norm_sqr())
        }
        (WordState::Mixed(x), WordState::Mixed(y)) => x.product_trace(y),
        _ => Err(Error::InvalidArgument(
            "cannot compare pure and mixed word states".into(),
        )),
    }
}

/// The mixed state of the two readout qubits for one joint input: the full
/// circuit state with the shared wire traced out.
pub fn readout_state(params: &AnsatzParams, noun_input: u8, verb_input: u8) -> DensityMatrix {
    let state = circuit_state(params, noun_input, verb_input);
    partial_trace(&state.density_matrix(), &[0, 2]).expect("keep readouts")
}

/// Structural causality check: the circuit model is exactly causal for the
/// noun-before-verb order.
pub fn causal_check(params: &AnsatzParams, shape: Shape) -> Result<f64> {
    causal_fraction_222(&circuit_model(params, shape), Direction::FirstBeforeSecond)
}

/// Re-lays an arbitrary (2,2,2) global-cover model onto the circuit's own
/// scenario for `shape`, so it can serve as a training target. Inputs map by
/// declaration order within each party.
pub fn target_from_222(model: &EmpiricalModel, shape: Shape) -> Result<EmpiricalModel> {
    let cover = crate::fractions::TwoPartyCover::build(model.scenario())?;
    cover.require_222(model.scenario())?;
    let probe = circuit_model(&AnsatzParams::zeros(1), shape);
    let scenario = probe.scenario().clone();
    // The probe's contexts enumerate (i, j) row-major, matching cover order.
    let mut table = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let (c, a_pos, b_pos) = cover.context_of[i][j];
            let src = model.distribution(c);
            let mut pairs = Vec::with_capacity(4);
            for (tuple, p) in src.entries() {
                pairs.push((vec![tuple[a_pos], tuple[b_pos]], p));
            }
            pairs.sort_by(|a, b| a.0.cmp(&b.0));
            table.push(Distribution::from_pairs(2, pairs)?);
        }
    }
    EmpiricalModel::new(scenario, table)
}
