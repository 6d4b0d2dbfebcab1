//! Independent reference implementations used as test oracles. They work on
//! plain indices and vectors and share no code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod fso;

use std::collections::BTreeSet;

use fso_core::mutualism::{ActionCorrespondence, ActionSystem, Evaluation};
use rand::Rng;

/// Action names sort in index order for up to 10 actions.
pub fn action_name(side: char, i: usize) -> String {
    format!("{side}{i}")
}

pub fn eval_of(v: i8) -> Evaluation {
    Evaluation::try_from(i64::from(v)).unwrap()
}

pub fn system(id: &str, side: char, evals: &[i8]) -> ActionSystem {
    ActionSystem::new(
        id,
        evals
            .iter()
            .enumerate()
            .map(|(i, &e)| (action_name(side, i), eval_of(e))),
    )
}

pub fn correspondence(source: &str, target: &str, pairs: &[(usize, usize)]) -> ActionCorrespondence {
    ActionCorrespondence::new(
        source,
        target,
        pairs.iter().map(|&(a, b)| (action_name('d', a), action_name('r', b))),
    )
    .unwrap()
}

/// Reference check by exhaustive search over the pair list. Returns the
/// least `a` of `D` and the least `b` of `R` satisfying the two clauses.
pub fn brute_witness(d: &[i8], r: &[i8], pairs: &[(usize, usize)], extended: bool) -> Option<(usize, usize)> {
    let actor_ok = |e: i8| extended || e >= 0;
    let mut best_a = None;
    let mut best_b = None;
    for a in 0..d.len() {
        for &(pa, pb) in pairs {
            if pa == a && actor_ok(d[a]) && r[pb] == 1 && best_a.is_none() {
                best_a = Some(a);
            }
        }
    }
    for b in 0..r.len() {
        for &(pa, pb) in pairs {
            if pb == b && actor_ok(r[b]) && d[pa] == 1 && best_b.is_none() {
                best_b = Some(b);
            }
        }
    }
    Some((best_a?, best_b?))
}

/// Every evaluation vector of length `n`.
pub fn all_evals(n: usize) -> Vec<Vec<i8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1i8, 0, 1].into_iter().map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every injective partial map from `0..m` to `0..n`.
pub fn all_partial_bijections(m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(a: usize, m: usize, n: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if a == m {
            out.push(cur.clone());
            return;
        }
        go(a + 1, m, n, used, cur, out);
        for b in 0..n {
            if !used[b] {
                used[b] = true;
                cur.push((a, b));
                go(a + 1, m, n, used, cur, out);
                cur.pop();
                used[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, m, n, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// Random instance: up to `max` actions per side and a random partial
/// bijection between them.
pub fn random_instance<R: Rng>(rng: &mut R, max: usize) -> (Vec<i8>, Vec<i8>, Vec<(usize, usize)>) {
    let m = rng.gen_range(0..=max);
    let n = rng.gen_range(0..=max);
    let d: Vec<i8> = (0..m).map(|_| rng.gen_range(-1..=1)).collect();
    let r: Vec<i8> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
    let mut targets: Vec<usize> = (0..n).collect();
    let mut pairs = Vec::new();
    for a in 0..m {
        if !targets.is_empty() && rng.gen_bool(0.6) {
            let b = targets.swap_remove(rng.gen_range(0..targets.len()));
            pairs.push((a, b));
        }
    }
    (d, r, pairs)
}

/// Reflexive-transitive closure by Floyd–Warshall.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(c, p) in edges {
        reach[c][p] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Random DAG: edges only go from a higher index to a lower one.
pub fn random_dag<R: Rng>(rng: &mut R, max_nodes: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=max_nodes);
    let density = rng.gen_range(0.0..0.2);
    let mut edges = Vec::new();
    for c in 1..n {
        for p in 0..c {
            if rng.gen_bool(density) {
                edges.push((c, p));
            }
        }
    }
    (n, edges)
}

pub fn type_name(i: usize) -> String {
    format!("T{i}")
}

/// Whether `roles` can be staffed by distinct members, by trying every
/// assignment. `can[r]` lists the members able to play role `r`.
pub fn staffable(can: &[Vec<usize>]) -> bool {
    fn go(r: usize, can: &[Vec<usize>], used: &mut BTreeSet<usize>) -> bool {
        if r == can.len() {
            return true;
        }
        for &m in &can[r] {
            if used.insert(m) {
                if go(r + 1, can, used) {
                    return true;
                }
                used.remove(&m);
            }
        }
        false
    }
    go(0, can, &mut BTreeSet::new())
}

/// Knowledge diffusion replayed with plain vectors, for cross-checking the
/// simulator against a recorded RNG stream.
pub struct ReplayNet {
    pub edges: Vec<(usize, usize)>,
    pub knows: Vec<BTreeSet<usize>>,
}

impl ReplayNet {
    pub fn new(n: usize, k: usize, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort();
        ReplayNet {
            edges,
            knows: (0..n).map(|i| BTreeSet::from([i % k])).collect(),
        }
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R, p: f64) {
        let before = self.knows.clone();
        for &(u, v) in &self.edges {
            for (s, t) in [(u, v), (v, u)] {
                let fire = rng.gen::<f64>() < p;
                if !fire {
                    continue;
                }
                let missing: Vec<usize> = before[s].difference(&before[t]).copied().collect();
                if !missing.is_empty() {
                    let pick = missing[rng.gen_range(0..missing.len())];
                    self.knows[t].insert(pick);
                }
            }
        }
    }

    pub fn measure(&self, k: usize) -> f64 {
        let total: usize = self.knows.iter().map(BTreeSet::len).sum();
        total as f64 / (self.knows.len() * k) as f64
    }
}

fn random_word<R: Rng>(rng: &mut R, first: &[u8], rest: &[u8], max: usize) -> String {
    let mut s = String::new();
    s.push(first[rng.gen_range(0..first.len())] as char);
    for _ in 0..rng.gen_range(0..max) {
        s.push(rest[rng.gen_range(0..rest.len())] as char);
    }
    s
}

const UPPER: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
const LOWER: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
const WORD: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";

fn random_timestamp<R: Rng>(rng: &mut R) -> fso_core::descriptions::Timestamp {
    let text = format!(
        "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}",
        rng.gen_range(2000..2030),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
        rng.gen_range(0..24),
        rng.gen_range(0..60),
        rng.gen_range(0..60)
    );
    fso_core::descriptions::parse_timestamp(&text).unwrap()
}

fn random_type<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..3) {
        0 => random_word(rng, UPPER, WORD, 10),
        1 => format!("http://example.org/{}#{}", random_word(rng, LOWER, LOWER, 6), random_word(rng, UPPER, WORD, 6)),
        _ => format!("urn:type:{}", random_word(rng, LOWER, WORD, 8)),
    }
}

fn random_iri<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.5) {
        format!("http://example.org/user/{}#this", rng.gen_range(0..1_000_000))
    } else {
        format!("urn:member:{}", random_word(rng, LOWER, LOWER, 9))
    }
}

/// A valid description with random fields.
pub fn random_description<R: Rng>(rng: &mut R) -> fso_core::ServiceDescription {
    use fso_core::{LocationSpec, ServiceDescription};
    let (a, b) = (random_timestamp(rng), random_timestamp(rng));
    let mut builder = ServiceDescription::builder(random_iri(rng)).window(random_timestamp(rng), a.min(b), a.max(b));
    if rng.gen_bool(0.5) {
        let located_in = rng.gen_bool(0.5).then(|| random_iri(rng));
        builder = builder.location(LocationSpec {
            place_class: random_iri(rng),
            located_in,
        });
    }
    match rng.gen_range(0..3) {
        0 => builder = builder.provide(random_type(rng)),
        1 => builder = builder.request(random_type(rng)),
        _ => builder = builder.provide(random_type(rng)).request(random_type(rng)),
    }
    builder.build().unwrap()
}
