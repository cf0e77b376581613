use std::collections::BTreeSet;

use crate::hash::Fnv1a;
use crate::molgraph::MolecularGraph;

pub const DEFAULT_RADIUS: usize = 3;
pub const DEFAULT_BITS: usize = 1024;

/// Fixed-length bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
}

impl Fingerprint {
    pub fn empty(nbits: usize) -> Self {
        Self {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
        }
    }

    pub fn len(&self) -> usize {
        self.nbits
    }

    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.nbits && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&b| self.get(b))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.nbits).map(|b| if self.get(b) { 1.0 } else { 0.0 }).collect()
    }
}

/// Circular atom-environment identifiers of a molecule, after removing
/// environments that cover the same bond set as an earlier one.
pub fn environment_ids(g: &MolecularGraph, radius: usize) -> Vec<u64> {
    let n = g.num_atoms();
    let mut ids: Vec<u64> = (0..n)
        .map(|v| {
            let atom = &g.atoms()[v];
            Fnv1a::new()
                .bytes(b"atom")
                .u64(atom.element.index() as u64)
                .i64(i64::from(atom.formal_charge))
                .u64(g.degree(v) as u64)
                .finish()
        })
        .collect();
    let mut kept = ids.clone();

    let bond_index = |a: usize, b: usize| {
        g.bonds()
            .iter()
            .position(|bd| (bd.a, bd.b) == (a, b) || (bd.a, bd.b) == (b, a))
            .expect("neighbor is bonded")
    };
    let mut envs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    // the empty bond set belongs to the radius-0 environments
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::from([Vec::new()]);

    for round in 1..=radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_envs = Vec::with_capacity(n);
        for v in 0..n {
            let mut nbrs: Vec<(u8, u64)> = g.neighbors(v).iter().map(|&(w, order)| (order, ids[w])).collect();
            nbrs.sort_unstable();
            let mut h = Fnv1a::new().u64(round as u64).u64(ids[v]);
            for (order, id) in &nbrs {
                h = h.u64(u64::from(*order)).u64(*id);
            }
            next_ids.push(h.finish());
            let mut env = envs[v].clone();
            for &(w, _) in g.neighbors(v) {
                env.insert(bond_index(v, w));
                env.extend(&envs[w]);
            }
            next_envs.push(env);
        }
        let mut candidates: Vec<(Vec<usize>, u64)> = next_envs
            .iter()
            .zip(&next_ids)
            .map(|(e, &id)| (e.iter().copied().collect(), id))
            .collect();
        // among equal bond sets from the same round the smaller id wins
        candidates.sort_unstable();
        for (env, id) in candidates {
            if seen.insert(env) {
                kept.push(id);
            }
        }
        ids = next_ids;
        envs = next_envs;
    }
    kept
}

/// Morgan-style circular fingerprint folded to `nbits`.
pub fn morgan_fingerprint(g: &MolecularGraph, radius: usize, nbits: usize) -> Fingerprint {
    let mut fp = Fingerprint::empty(nbits);
    for id in environment_ids(g, radius) {
        fp.set((id % nbits as u64) as usize);
    }
    fp
}
