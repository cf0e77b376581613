//! Shared helpers for the integration tests: random molecules and a
//! loop-based MPNN forward pass that reads the network's parameters but none
//! of its batching, grouping or tape code.

#![allow(dead_code)]

pub mod suites;

use dgnn::autodiff::{ParamId, ParamStore};
use dgnn::dataset::ReactionSample;
use dgnn::molgraph::{join, Atom, Bond, Element, JoinStrategy, MolecularGraph, Role};
use dgnn::mpnn::{Mpnn, Readout};
use dgnn::nn::{FeedForward, Linear};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const ELEMENTS: [Element; 6] = [Element::C, Element::N, Element::O, Element::Cl, Element::Br, Element::H];

/// Random connected molecule: a random tree plus at most one extra bond.
pub fn random_molecule(rng: &mut impl Rng, max_atoms: usize) -> MolecularGraph {
    let n = rng.gen_range(1..=max_atoms);
    let atoms: Vec<Atom> = (0..n)
        .map(|_| {
            let a = Atom::new(ELEMENTS[rng.gen_range(0..ELEMENTS.len())]);
            if rng.gen_bool(0.15) {
                a.with_charge(rng.gen_range(-1..=1))
            } else {
                a
            }
        })
        .collect();
    let mut bonds: Vec<Bond> = (1..n)
        .map(|i| Bond {
            a: rng.gen_range(0..i),
            b: i,
            order: rng.gen_range(1..=2),
        })
        .collect();
    if n >= 3 && rng.gen_bool(0.3) {
        let (a, b) = (0, n - 1);
        if !bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            bonds.push(Bond { a, b, order: 1 });
        }
    }
    MolecularGraph::new(atoms, bonds, Role::Unknown).expect("random molecule is valid")
}

pub fn random_sample(rng: &mut impl Rng, id: usize, max_atoms: usize) -> ReactionSample {
    let a = random_molecule(rng, max_atoms);
    let h = random_molecule(rng, max_atoms);
    ReactionSample::new(id, a, h, rng.gen_range(-5.0..5.0))
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn matrix(store: &ParamStore, id: ParamId) -> Vec<Vec<f64>> {
    let t = store.get(id);
    (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
}

/// `x W + b`, entry by entry.
fn dense(store: &ParamStore, layer: &Linear, x: &[f64]) -> Vec<f64> {
    let w = matrix(store, layer.weight);
    let b = store.get(layer.bias).row(0).to_vec();
    let mut y = b;
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj += xi * w[i][j];
        }
    }
    y
}

fn feed_forward(store: &ParamStore, net: &FeedForward, x: &[f64]) -> Vec<f64> {
    let layers = net.layers();
    let mut h = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        h = dense(store, layer, &h);
        if i + 1 < layers.len() {
            h.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
    h
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `v M` for a row vector `v`.
fn vecmat(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; m[0].len()];
    for (i, vi) in v.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += vi * m[i][j];
        }
    }
    out
}

fn gru(store: &ParamStore, model: &Mpnn, h: &[f64], m: &[f64]) -> Vec<f64> {
    let [w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h] = model.gru().ids().map(|id| matrix(store, id));
    let gate = |w: &[Vec<f64>], u: &[Vec<f64>], b: &[Vec<f64>], state: &[f64]| -> Vec<f64> {
        let (mw, su) = (vecmat(m, w), vecmat(state, u));
        (0..h.len()).map(|k| mw[k] + su[k] + b[0][k]).collect()
    };
    let z: Vec<f64> = gate(&w_z, &u_z, &b_z, h).into_iter().map(sigmoid).collect();
    let r: Vec<f64> = gate(&w_r, &u_r, &b_r, h).into_iter().map(sigmoid).collect();
    let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
    let cand: Vec<f64> = gate(&w_h, &u_h, &b_h, &rh).into_iter().map(f64::tanh).collect();
    (0..h.len()).map(|k| (1.0 - z[k]) * h[k] + z[k] * cand[k]).collect()
}

/// Initial node features, normalized by hand when the model normalizes.
fn node_features(model: &Mpnn, sample: &ReactionSample) -> Vec<Vec<f64>> {
    let joined = join(&sample.alcohol, &sample.acyl_halide, model.config().strategy);
    let x = &joined.node_features;
    let mut rows: Vec<Vec<f64>> = (0..x.rows()).map(|r| x.row(r).to_vec()).collect();
    if model.config().normalize {
        let n = model.normalizer();
        let (mean, std) = (n.mean().expect("fitted"), n.std().expect("fitted"));
        for (v, row) in rows.iter_mut().enumerate() {
            if Some(v) == joined.global_node {
                row.fill(0.0);
                continue;
            }
            for k in 0..row.len() {
                if std[k] >= 1e-8 {
                    row[k] = (row[k] - mean[k]) / std[k];
                }
            }
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|a| *a /= norm);
            }
        }
    }
    rows
}

/// Prediction for one sample in normalized label units, computed edge by
/// edge with a separate matrix for every edge.
pub fn oracle_predict(model: &Mpnn, sample: &ReactionSample) -> f64 {
    let store = model.store();
    let cfg = model.config();
    let d = cfg.hidden_dim;
    let joined = join(&sample.alcohol, &sample.acyl_halide, cfg.strategy);
    let x = node_features(model, sample);
    let n = x.len();

    let mut states: Vec<Vec<Vec<f64>>> = vec![x.iter().map(|row| dense(store, model.embed(), row)).collect()];
    let edge_mats: Vec<Vec<f64>> = joined
        .edges
        .iter()
        .map(|e| feed_forward(store, model.edge_net(), &e.features()))
        .collect();
    for _ in 0..cfg.steps {
        let h = states.last().unwrap();
        let mut m = vec![vec![0.0; d]; n];
        for (e, a) in joined.edges.iter().zip(&edge_mats) {
            for i in 0..d {
                for j in 0..d {
                    m[e.dst][i] += a[i * d + j] * h[e.src][j];
                }
            }
        }
        let next = (0..n).map(|v| gru(store, model, &h[v], &m[v])).collect();
        states.push(next);
    }

    let h0 = &states[0];
    let ht = states.last().unwrap();
    let gated = |gate_in: &[f64], h: &[f64]| -> Vec<f64> {
        let i = feed_forward(store, model.i_net(), gate_in);
        let j = feed_forward(store, model.j_net(), h);
        i.iter().zip(&j).map(|(a, b)| sigmoid(*a) * b).collect()
    };
    let node_out = |v: usize| -> Vec<f64> {
        match cfg.readout {
            Readout::Concat => {
                let input: Vec<f64> = states.iter().flat_map(|s| s[v].iter().copied()).collect();
                gated(&input, &ht[v])
            }
            _ => gated(&[ht[v].clone(), h0[v].clone()].concat(), &ht[v]),
        }
    };
    let sum_over = |nodes: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
        let mut acc = vec![0.0; cfg.readout_dim];
        for v in nodes {
            for (a, o) in acc.iter_mut().zip(node_out(v)) {
                *a += o;
            }
        }
        acc
    };
    let pooled = match (cfg.readout, cfg.strategy) {
        (Readout::GlobalNode, _) => node_out(joined.global_node.expect("global node")),
        (_, JoinStrategy::Disjoint) => {
            let first = sum_over(&mut (0..joined.boundary));
            let second = sum_over(&mut (joined.boundary..n));
            [first, second].concat()
        }
        _ => sum_over(&mut (0..n)),
    };
    dense(store, model.head(), &pooled)[0]
}
