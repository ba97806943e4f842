#![allow(dead_code)] // each test target uses a different subset
#![allow(clippy::needless_range_loop)]

//! Shared generators and independent oracles for the integration and
//! acceptance suites. Everything here is deliberately reimplemented from
//! first principles so it can cross-check the library.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ctx_core::scenario::{Distribution, EmpiricalModel, Scenario};
use ctx_core::simplex::{self, LinearProgram, Sense};

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

pub fn fixture_model(name: &str) -> EmpiricalModel {
    ctx_core::scenario::parse_model(&fixture_bytes(name))
        .unwrap()
        .model
}

/// A random probability row of the given width.
pub fn random_row(rng: &mut ChaCha8Rng, width: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..width).map(|_| rng.gen::<f64>().max(1e-9)).collect();
    let total: f64 = row.iter().sum();
    for v in &mut row {
        *v /= total;
    }
    row
}

/// A random (2,2,2) global-cover model with parties A and B.
pub fn random_222_model(rng: &mut ChaCha8Rng) -> EmpiricalModel {
    let mut rows = [[0.0; 4]; 4];
    for row in &mut rows {
        let r = random_row(rng, 4);
        row.copy_from_slice(&r);
    }
    ctx_core::fractions::build_222_model(&rows).unwrap()
}

/// A random cyclic system of the given rank as an empirical model with the
/// `cyclic` content-context incidence: contexts `{q_i, q_{i+1 mod n}}`.
/// Rank 2 uses two contexts over the same two contents.
pub fn random_cyclic_model(rng: &mut ChaCha8Rng, rank: usize) -> EmpiricalModel {
    assert!(rank >= 2);
    let contents: Vec<String> = (0..rank).map(|i| format!("q{i}")).collect();
    let contexts: Vec<Vec<String>> = if rank == 2 {
        vec![
            vec![contents[0].clone(), contents[1].clone()],
            vec![contents[0].clone(), contents[1].clone()],
        ]
    } else {
        (0..rank)
            .map(|i| vec![contents[i].clone(), contents[(i + 1) % rank].clone()])
            .collect()
    };
    let scenario = Scenario::binary(contents, contexts, vec![]).unwrap();
    let table: Vec<Distribution> = (0..rank)
        .map(|_| {
            let row = random_row(rng, 4);
            Distribution::from_pairs(
                2,
                vec![
                    (vec![0, 0], row[0]),
                    (vec![0, 1], row[1]),
                    (vec![1, 0], row[2]),
                    (vec![1, 1], row[3]),
                ],
            )
            .unwrap()
        })
        .collect();
    EmpiricalModel::new(scenario, table).unwrap()
}

/// A random nested two-context model: a prefix chain of lengths
/// `(len - 1, len)` over small head alphabets, as parse distributions.
pub fn random_prefix_pair(
    rng: &mut ChaCha8Rng,
    len: usize,
) -> (
    ctx_core::parsing::ParseDistribution,
    ctx_core::parsing::ParseDistribution,
) {
    use ctx_core::parsing::{Parse, ParseDistribution};
    let alphabet = |pos: usize| -> Vec<u32> { vec![pos as u32 + 1, pos as u32 + 2] };
    let random_parse = |rng: &mut ChaCha8Rng, n: usize| -> Parse {
        Parse::new(
            (0..n)
                .map(|pos| alphabet(pos)[rng.gen_range(0..2)])
                .collect(),
        )
        .unwrap()
    };
    let build = |rng: &mut ChaCha8Rng, n: usize, support: usize| -> ParseDistribution {
        let weights = random_row(rng, support);
        let pairs: Vec<(Parse, f64)> = weights
            .into_iter()
            .map(|w| (random_parse(rng, n), w))
            .collect();
        ParseDistribution::new(n, pairs).unwrap()
    };
    (build(rng, len - 1, 3), build(rng, len, 4))
}

/// Maximum over contents of the minimal direct influence, computed straight
/// from marginal overlaps over every context pair sharing the content.
pub fn max_direct_influence(model: &EmpiricalModel) -> f64 {
    let scenario = model.scenario();
    let mut worst = 0.0f64;
    for obs in 0..scenario.observables().len() {
        let holders: Vec<usize> = (0..scenario.n_contexts())
            .filter(|&c| scenario.context(c).contains(&obs))
            .collect();
        for i in 0..holders.len() {
            for j in (i + 1)..holders.len() {
                let mi = model.marginal(holders[i], &[obs]).unwrap();
                let mj = model.marginal(holders[j], &[obs]).unwrap();
                let alphabet = scenario.outcome_alphabet(obs).len();
                let overlap: f64 = (0..alphabet as u8)
                    .map(|v| mi.prob(&[v]).min(mj.prob(&[v])))
                    .sum();
                worst = worst.max(1.0 - overlap);
            }
        }
    }
    worst
}

/// Feasibility oracle for the CbD criterion: does a joint coupling of all
/// `(content, context)` variables exist that reproduces every context row
/// and attains the maximal coincidence probability for every content?
/// Infeasibility is the definition of CbD contextuality.
pub fn coupling_oracle_contextual(model: &EmpiricalModel) -> bool {
    let scenario = model.scenario();
    let n_ctx = scenario.n_contexts();
    let n_obs = scenario.observables().len();
    // One +-1 variable per (context, slot in context); atoms enumerate all
    // their sign patterns.
    let mut slot_of = vec![[usize::MAX; 2]; n_ctx];
    let mut n_slots = 0;
    for c in 0..n_ctx {
        for k in 0..2 {
            slot_of[c][k] = n_slots;
            n_slots += 1;
        }
    }
    let n_atoms = 1usize << n_slots;
    let bit = |atom: usize, slot: usize| -> u8 { ((atom >> slot) & 1) as u8 };

    let mut lp = LinearProgram::new(n_atoms);
    // Context rows must be reproduced.
    for c in 0..n_ctx {
        for u in 0..2u8 {
            for v in 0..2u8 {
                let mut row = vec![0.0; n_atoms];
                for (atom, cell) in row.iter_mut().enumerate() {
                    if bit(atom, slot_of[c][0]) == u && bit(atom, slot_of[c][1]) == v {
                        *cell = 1.0;
                    }
                }
                lp.constrain(row, Sense::Eq, model.distribution(c).prob(&[u, v]));
            }
        }
    }
    // Each content's coincidence probability must attain its maximum.
    for obs in 0..n_obs {
        let holders: Vec<(usize, usize)> = (0..n_ctx)
            .flat_map(|c| {
                scenario
                    .context(c)
                    .iter()
                    .enumerate()
                    .filter(move |(_, &o)| o == obs)
                    .map(move |(k, _)| (c, k))
            })
            .collect();
        assert_eq!(
            holders.len(),
            2,
            "cyclic systems have two holders per content"
        );
        let (c1, k1) = holders[0];
        let (c2, k2) = holders[1];
        let m1 = model.marginal(c1, &[obs]).unwrap();
        let m2 = model.marginal(c2, &[obs]).unwrap();
        let best: f64 = (0..2u8).map(|v| m1.prob(&[v]).min(m2.prob(&[v]))).sum();
        let mut row = vec![0.0; n_atoms];
        for (atom, cell) in row.iter_mut().enumerate() {
            if bit(atom, slot_of[c1][k1]) == bit(atom, slot_of[c2][k2]) {
                *cell = 1.0;
            }
        }
        lp.constrain(row, Sense::Eq, best);
    }
    !simplex::is_feasible(&lp).unwrap()
}

/// Coarse grid search over exactly causal (first-before-second) models,
/// returning the smallest total variation to `model`. An upper bound on the
/// true distance, hence an upper check for the minimal-cost bound.
pub fn grid_min_tv_to_causal(model: &EmpiricalModel) -> f64 {
    let scenario = model.scenario();
    assert_eq!(scenario.n_contexts(), 4);
    // Row order (a_i, b_j) row-major by party inputs.
    let cover: Vec<(usize, usize, usize)> = {
        let parties = scenario.parties();
        let a_obs = &parties[0].1;
        let b_obs = &parties[1].1;
        let mut out = Vec::new();
        for &a in a_obs {
            for &b in b_obs {
                let c = (0..4)
                    .find(|&c| scenario.context(c).contains(&a) && scenario.context(c).contains(&b))
                    .unwrap();
                let a_pos = scenario.context(c).iter().position(|&o| o == a).unwrap();
                out.push((c, a_pos, 1 - a_pos));
            }
        }
        out
    };
    let levelsx = [0.0, 0.25, 0.5, 0.75, 1.0];
    let levelsy = [0.0, 0.5, 1.0];
    let mut best = f64::INFINITY;
    // x[a] = P(o_A = 0 | a); y[a][b][o_A] = P(o_B = 0 | a, b, o_A).
    for &x0 in &levelsx {
        for &x1 in &levelsx {
            let x = [x0, x1];
            let mut y_idx = [0usize; 8];
            loop {
                let y = |a: usize, b: usize, oa: usize| levelsy[y_idx[a * 4 + b * 2 + oa]];
                let mut tv = 0.0f64;
                for a in 0..2 {
                    for b in 0..2 {
                        let (c, a_pos, _) = cover[a * 2 + b];
                        let mut l1 = 0.0;
                        for oa in 0..2 {
                            for ob in 0..2 {
                                let pa = if oa == 0 { x[a] } else { 1.0 - x[a] };
                                let pb = if ob == 0 {
                                    y(a, b, oa)
                                } else {
                                    1.0 - y(a, b, oa)
                                };
                                let mut tuple = [0u8; 2];
                                tuple[a_pos] = oa as u8;
                                tuple[1 - a_pos] = ob as u8;
                                l1 += (pa * pb - model.distribution(c).prob(&tuple)).abs();
                            }
                        }
                        tv = tv.max(0.5 * l1);
                    }
                }
                best = best.min(tv);
                // Advance the mixed-radix counter over y.
                let mut pos = 0;
                loop {
                    if pos == 8 {
                        break;
                    }
                    y_idx[pos] += 1;
                    if y_idx[pos] < levelsy.len() {
                        break;
                    }
                    y_idx[pos] = 0;
                    pos += 1;
                }
                if pos == 8 {
                    break;
                }
            }
        }
    }
    best
}
