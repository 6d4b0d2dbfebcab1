//! Action systems and the mutualistic precondition.
//!
//! Two systems `D` and `R` each evaluate their own actions as beneficial
//! (+1), insignificant (0) or disadvantageous (-1). An
//! [`ActionCorrespondence`] says which action of `R` is the counterpart of
//! an action of `D`. The pair is *mutualistic* when
//!
//! - some `a` that `D` does not mind doing (`eval_D(a) >= 0`) is beneficial
//!   to `R` (`eval_R(act(a)) > 0`), and
//! - some `b` that `R` does not mind doing is beneficial to `D` through
//!   `act⁻¹(b)`.
//!
//! The *extended* check drops the "does not mind" clauses, so actions with a
//! cost for the actor still count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutualismError {
    #[error("correspondence {source_id}->{target_id} does not connect systems {d}->{r}")]
    CorrespondenceMismatch {
        source_id: String,
        target_id: String,
        d: String,
        r: String,
    },
    #[error("action `{action}` is not part of system `{system}`")]
    UnknownAction { system: String, action: String },
    #[error("action `{0}` is mapped twice")]
    NotInjective(String),
    #[error("evaluation {0} is not one of -1, 0, 1")]
    BadEvaluation(i64),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("invalid document: {0}")]
    Document(String),
}

/// The three evaluation classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Evaluation {
    Negative,
    Neutral,
    Positive,
}

impl Evaluation {
    pub const ALL: [Evaluation; 3] = [Evaluation::Negative, Evaluation::Neutral, Evaluation::Positive];

    pub fn value(self) -> i8 {
        match self {
            Evaluation::Negative => -1,
            Evaluation::Neutral => 0,
            Evaluation::Positive => 1,
        }
    }
}

impl TryFrom<i64> for Evaluation {
    type Error = MutualismError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Evaluation::Negative),
            0 => Ok(Evaluation::Neutral),
            1 => Ok(Evaluation::Positive),
            other => Err(MutualismError::BadEvaluation(other)),
        }
    }
}

impl Serialize for Evaluation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Evaluation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Evaluation::try_from(v).map_err(serde::de::Error::custom)
    }
}

/// A system with its action set and a total evaluation of those actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSystem {
    id: String,
    eval: BTreeMap<String, Evaluation>,
}

impl ActionSystem {
    pub fn new<I, S>(id: impl Into<String>, actions: I) -> Self
    where
        I: IntoIterator<Item = (S, Evaluation)>,
        S: Into<String>,
    {
        ActionSystem {
            id: id.into(),
            eval: actions.into_iter().map(|(a, e)| (a.into(), e)).collect(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn actions(&self) -> impl Iterator<Item = &str> {
        self.eval.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.eval.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eval.is_empty()
    }

    pub fn eval(&self, action: &str) -> Option<Evaluation> {
        self.eval.get(action).copied()
    }

    pub fn contains(&self, action: &str) -> bool {
        self.eval.contains_key(action)
    }
}

/// Partial bijection between the actions of two systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCorrespondence {
    source: String,
    target: String,
    forward: BTreeMap<String, String>,
    backward: BTreeMap<String, String>,
}

impl ActionCorrespondence {
    /// Fails with [`MutualismError::NotInjective`] if any action appears in
    /// two pairs on the same side.
    pub fn new<I, A, B>(
        source: impl Into<String>,
        target: impl Into<String>,
        pairs: I,
    ) -> Result<Self, MutualismError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut corr = ActionCorrespondence {
            source: source.into(),
            target: target.into(),
            forward: BTreeMap::new(),
            backward: BTreeMap::new(),
        };
        for (a, b) in pairs {
            corr.insert(a.into(), b.into())?;
        }
        Ok(corr)
    }

    /// Adds a pair. Re-adding an identical pair is a no-op.
    pub fn insert(&mut self, a: String, b: String) -> Result<(), MutualismError> {
        match (self.forward.get(&a), self.backward.get(&b)) {
            (Some(x), Some(_)) if *x == b => return Ok(()),
            (Some(_), _) => return Err(MutualismError::NotInjective(a)),
            (_, Some(_)) => return Err(MutualismError::NotInjective(b)),
            _ => {}
        }
        self.forward.insert(a.clone(), b.clone());
        self.backward.insert(b, a);
        Ok(())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.forward.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `act(a)`
    pub fn act(&self, a: &str) -> Option<&str> {
        self.forward.get(a).map(String::as_str)
    }

    /// `act⁻¹(b)`
    pub fn act_inv(&self, b: &str) -> Option<&str> {
        self.backward.get(b).map(String::as_str)
    }

    /// Same pairs with source and target swapped.
    pub fn inverse(&self) -> ActionCorrespondence {
        ActionCorrespondence {
            source: self.target.clone(),
            target: self.source.clone(),
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    /// True when every action of both systems is mapped, i.e. the
    /// correspondence is a total bijection between the two action sets.
    pub fn is_total(&self, d: &ActionSystem, r: &ActionSystem) -> bool {
        self.forward.len() == d.len() && self.backward.len() == r.len()
    }

    fn validate(&self, d: &ActionSystem, r: &ActionSystem) -> Result<(), MutualismError> {
        if self.source != d.id || self.target != r.id {
            return Err(MutualismError::CorrespondenceMismatch {
                source_id: self.source.clone(),
                target_id: self.target.clone(),
                d: d.id.clone(),
                r: r.id.clone(),
            });
        }
        for (a, b) in self.pairs() {
            if !d.contains(a) {
                return Err(MutualismError::UnknownAction {
                    system: d.id.clone(),
                    action: a.to_owned(),
                });
            }
            if !r.contains(b) {
                return Err(MutualismError::UnknownAction {
                    system: r.id.clone(),
                    action: b.to_owned(),
                });
            }
        }
        Ok(())
    }
}

/// The `(a, b)` pair that makes a precondition hold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MutualisticWitness {
    /// Action of `D` that benefits `R`.
    pub forward_action: String,
    /// Action of `R` that benefits `D`.
    pub backward_action: String,
}

impl fmt::Display for MutualisticWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.forward_action, self.backward_action)
    }
}

/// Which form of the precondition to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    /// Both actors evaluate their own action as non-negative.
    Strict,
    /// The actor-side clauses are dropped.
    Extended,
}

fn first_witness(
    d: &ActionSystem,
    r: &ActionSystem,
    corr: &ActionCorrespondence,
    mode: Precondition,
) -> Option<MutualisticWitness> {
    let actor_ok = |e: Evaluation| mode == Precondition::Extended || e >= Evaluation::Neutral;
    // BTreeMap iteration is in action-id order, so the first hit is the least.
    let forward = corr.forward.iter().find(|(a, b)| {
        actor_ok(d.eval[a.as_str()]) && r.eval[b.as_str()] == Evaluation::Positive
    })?;
    let backward = corr.backward.iter().find(|(b, a)| {
        actor_ok(r.eval[b.as_str()]) && d.eval[a.as_str()] == Evaluation::Positive
    })?;
    Some(MutualisticWitness {
        forward_action: forward.0.clone(),
        backward_action: backward.0.clone(),
    })
}

/// Checks the mutualistic precondition between `d` and `r`, returning the
/// lexicographically least witness when it holds.
pub fn check_precondition(
    d: &ActionSystem,
    r: &ActionSystem,
    corr: &ActionCorrespondence,
) -> Result<Option<MutualisticWitness>, MutualismError> {
    check(d, r, corr, Precondition::Strict)
}

/// Checks the extended precondition (actor-side costs allowed).
pub fn check_extended(
    d: &ActionSystem,
    r: &ActionSystem,
    corr: &ActionCorrespondence,
) -> Result<Option<MutualisticWitness>, MutualismError> {
    check(d, r, corr, Precondition::Extended)
}

pub fn check(
    d: &ActionSystem,
    r: &ActionSystem,
    corr: &ActionCorrespondence,
    mode: Precondition,
) -> Result<Option<MutualisticWitness>, MutualismError> {
    corr.validate(d, r)?;
    Ok(first_witness(d, r, corr, mode))
}

/// Mutualistic chain over many systems.
///
/// A direct edge `(D, R)` exists when the chosen precondition holds for some
/// correspondence between `D` and `R`, in either stored orientation. The
/// result is the transitive closure of those edges, without self-pairs.
pub fn mutualistic_closure(
    systems: &[ActionSystem],
    corrs: &[ActionCorrespondence],
    extended: bool,
) -> Result<BTreeSet<(String, String)>, MutualismError> {
    let mode = if extended {
        Precondition::Extended
    } else {
        Precondition::Strict
    };
    let index: BTreeMap<&str, usize> = systems
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id(), i))
        .collect();
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| MutualismError::UnknownSystem(id.to_owned()))
    };

    let n = systems.len();
    let mut reach = vec![vec![false; n]; n];
    for corr in corrs {
        let (i, j) = (lookup(corr.source())?, lookup(corr.target())?);
        if i == j {
            continue;
        }
        if check(&systems[i], &systems[j], corr, mode)?.is_some() {
            reach[i][j] = true;
        }
        if check(&systems[j], &systems[i], &corr.inverse(), mode)?.is_some() {
            reach[j][i] = true;
        }
    }

    // BFS from every node; n is small and this keeps the code obvious.
    let mut out = BTreeSet::new();
    for start in 0..n {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&k| reach[start][k]).collect();
        while let Some(k) = stack.pop() {
            if seen[k] {
                continue;
            }
            seen[k] = true;
            stack.extend((0..n).filter(|&m| reach[k][m] && !seen[m]));
        }
        for (k, &hit) in seen.iter().enumerate() {
            if hit && k != start {
                out.insert((systems[start].id.clone(), systems[k].id.clone()));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct RawCorrespondence {
    source: String,
    target: String,
    pairs: Vec<(String, String)>,
}

#[derive(Debug, Deserialize)]
struct RawDocument {
    systems: BTreeMap<String, BTreeMap<String, Evaluation>>,
    #[serde(default)]
    correspondences: Vec<RawCorrespondence>,
}

/// Systems and correspondences loaded from JSON:
///
/// ```json
/// {
///   "systems": { "animals": { "exhaleCO2": 0, "inhaleO2": 1 }, "plants": { ... } },
///   "correspondences": [ { "source": "animals", "target": "plants",
///                          "pairs": [["exhaleCO2", "absorbCO2"]] } ]
/// }
/// ```
#[derive(Debug, Clone)]
pub struct MutualismDocument {
    pub systems: Vec<ActionSystem>,
    pub correspondences: Vec<ActionCorrespondence>,
}

impl MutualismDocument {
    pub fn from_json(text: &str) -> Result<Self, MutualismError> {
        let raw: RawDocument =
            serde_json::from_str(text).map_err(|e| MutualismError::Document(e.to_string()))?;
        let systems: Vec<ActionSystem> = raw
            .systems
            .into_iter()
            .map(|(id, actions)| ActionSystem::new(id, actions))
            .collect();
        let mut correspondences = Vec::new();
        for rc in raw.correspondences {
            let corr = ActionCorrespondence::new(rc.source, rc.target, rc.pairs)?;
            let find = |id: &str| {
                systems
                    .iter()
                    .find(|s| s.id == id)
                    .ok_or_else(|| MutualismError::UnknownSystem(id.to_owned()))
            };
            corr.validate(find(corr.source())?, find(corr.target())?)?;
            correspondences.push(corr);
        }
        Ok(MutualismDocument {
            systems,
            correspondences,
        })
    }

    pub fn system(&self, id: &str) -> Option<&ActionSystem> {
        self.systems.iter().find(|s| s.id == id)
    }

    pub fn closure(&self, extended: bool) -> Result<BTreeSet<(String, String)>, MutualismError> {
        mutualistic_closure(&self.systems, &self.correspondences, extended)
    }
}
