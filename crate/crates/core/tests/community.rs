mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::closure;
use fso_core::community::{
    match_pair, Community, CommunityEvent, DescriptionId, Direction, MatchKind, MatchPolicy,
    MemberKind,
};
use fso_core::descriptions::{parse_descriptions, parse_timestamp, serialize_description, ServiceDescription};
use fso_core::taxonomy::Taxonomy;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TYPES: [&str; 5] = ["Fitness", "Walking", "Jogging", "Location", "Park"];
const EDGES: [(usize, usize); 3] = [(1, 0), (2, 0), (4, 3)];

fn taxonomy() -> Taxonomy {
    let mut t = Taxonomy::new();
    for (c, p) in EDGES {
        t.add_subclass(TYPES[c], TYPES[p]).unwrap();
    }
    t
}

#[derive(Debug, Clone)]
struct Spec {
    provide: Option<usize>,
    request: Option<usize>,
    start: u32,
    end: u32,
}

impl Spec {
    fn build(&self) -> ServiceDescription {
        let at = |h: u32| parse_timestamp(&format!("2013-05-12T{h:02}:00:00")).unwrap();
        let mut b = ServiceDescription::builder("urn:test:someone").window(at(0), at(self.start), at(self.end));
        if let Some(p) = self.provide {
            b = b.provide(TYPES[p]);
        }
        if let Some(r) = self.request {
            b = b.request(TYPES[r]);
        }
        b.build().unwrap()
    }
}

fn random_spec<R: Rng>(rng: &mut R) -> Spec {
    let (provide, request) = match rng.gen_range(0..3) {
        0 => (Some(rng.gen_range(0..5)), None),
        1 => (None, Some(rng.gen_range(0..5))),
        _ => (Some(rng.gen_range(0..5)), Some(rng.gen_range(0..5))),
    };
    let start = rng.gen_range(0..20);
    Spec {
        provide,
        request,
        start,
        end: start + rng.gen_range(0..4),
    }
}

fn spec_strategy() -> impl Strategy<Value = Spec> {
    any::<u64>().prop_map(|s| random_spec(&mut ChaCha8Rng::seed_from_u64(s)))
}

/// Oracle matching rule on type indices.
fn oracle_kind(a: &Spec, b: &Spec, reach: &[Vec<bool>], spec_ok: bool, overlap: bool) -> Option<String> {
    if overlap && (a.end < b.start || b.end < a.start) {
        return None;
    }
    let flow = |p: Option<usize>, r: Option<usize>| -> Option<usize> {
        let (p, r) = (p?, r?);
        if reach[p][r] {
            Some(p)
        } else if spec_ok && reach[r][p] {
            Some(r)
        } else {
            None
        }
    };
    match (flow(a.provide, b.request), flow(b.provide, a.request)) {
        (Some(x), Some(y)) if x == y => Some(format!("group {}", TYPES[x])),
        (Some(x), Some(y)) => Some(format!("mutual {} {}", TYPES[x], TYPES[y])),
        (Some(x), None) => Some(format!("service first {}", TYPES[x])),
        (None, Some(y)) => Some(format!("service second {}", TYPES[y])),
        (None, None) => None,
    }
}

fn event_key(c: &Community, ev: &CommunityEvent) -> (usize, usize, String) {
    match ev {
        CommunityEvent::Service {
            provider,
            service_type,
            descriptions: [a, b],
            ..
        } => {
            let side = if c.publication(*a).member == *provider { "first" } else { "second" };
            (a.0, b.0, format!("service {side} {service_type}"))
        }
        CommunityEvent::Mutualistic {
            x,
            y,
            descriptions: [a, b],
            ..
        } => (a.0, b.0, format!("mutual {x} {y}")),
        CommunityEvent::Group {
            shared_type,
            descriptions: [a, b],
            ..
        } => (a.0, b.0, format!("group {shared_type}")),
        other => panic!("unexpected event without promotion: {other:?}"),
    }
}

#[test]
fn publish_agrees_with_rescan_oracle() {
    let reach = closure(TYPES.len(), &EDGES);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..2000 {
        let policy = MatchPolicy {
            allow_specialization: rng.gen_bool(0.5),
            require_time_overlap: rng.gen_bool(0.7),
        };
        let mut c = Community::new("c", taxonomy(), policy).with_group_promotion(false);
        let members = rng.gen_range(1..=4);
        for m in 0..members {
            c.add_member(format!("m{m}"), MemberKind::Person).unwrap();
        }

        let mut got = BTreeSet::new();
        let mut want = BTreeSet::new();
        let mut log: Vec<(usize, Spec, bool)> = Vec::new();
        for _ in 0..rng.gen_range(0..=10) {
            let member = rng.gen_range(0..members);
            let spec = random_spec(&mut rng);
            for ev in c.publish(&format!("m{member}"), spec.build()).unwrap() {
                got.insert(event_key(&c, &ev));
            }
            log.push((member, spec, false));

            // re-scan every pair, later description first, until none matches
            'rescan: loop {
                for j in 0..log.len() {
                    for i in 0..j {
                        let (a, b) = (&log[i], &log[j]);
                        if a.2 || b.2 || a.0 == b.0 {
                            continue;
                        }
                        if let Some(k) = oracle_kind(&a.1, &b.1, &reach, policy.allow_specialization, policy.require_time_overlap) {
                            want.insert((i, j, k));
                            log[i].2 = true;
                            log[j].2 = true;
                            continue 'rescan;
                        }
                    }
                }
                break;
            }
        }
        assert_eq!(got, want);
        let pending: Vec<usize> = c.pending().iter().map(|p| p.id.0).collect();
        let open: Vec<usize> = (0..log.len()).filter(|&i| !log[i].2).collect();
        assert_eq!(pending, open);
    }
}

#[test]
fn pending_is_published_minus_consumed() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..2000 {
        let mut c = Community::new("c", taxonomy(), MatchPolicy::default());
        for m in 0..4 {
            c.add_member(format!("m{m}"), MemberKind::Person).unwrap();
        }
        let mut log = Vec::new();
        for _ in 0..rng.gen_range(0..=12) {
            let member = format!("m{}", rng.gen_range(0..4));
            log.extend(c.publish(&member, random_spec(&mut rng).build()).unwrap());
        }
        let mut consumed = BTreeSet::new();
        for ev in &log {
            for d in ev.consumed() {
                assert!(consumed.insert(d), "{d} consumed twice");
            }
            match ev {
                CommunityEvent::Service { provider, requester, .. } => assert_ne!(provider, requester),
                CommunityEvent::Mutualistic { first, second, .. } => assert_ne!(first, second),
                CommunityEvent::Group { members, .. } => assert_ne!(members[0], members[1]),
                _ => {}
            }
        }
        let want: Vec<DescriptionId> = c
            .publications()
            .iter()
            .map(|p| p.id)
            .filter(|id| !consumed.contains(id))
            .collect();
        let got: Vec<DescriptionId> = c.pending().iter().map(|p| p.id).collect();
        assert_eq!(got, want);

        let mut per_type = BTreeMap::new();
        for a in c.activities() {
            *per_type.entry(a.activity_type.clone()).or_insert(0) += 1;
            assert!(a.participants.len() >= 2);
            let d = &c.publication(a.description).description;
            let again = parse_descriptions(&serialize_description(d)).unwrap();
            assert_eq!(&again[0], d);
        }
        assert!(per_type.values().all(|&n| n == 1));
    }
}

fn walk(provide: Option<&str>, request: Option<&str>) -> ServiceDescription {
    Spec {
        provide: provide.map(|p| TYPES.iter().position(|t| *t == p).unwrap()),
        request: request.map(|r| TYPES.iter().position(|t| *t == r).unwrap()),
        start: 17,
        end: 21,
    }
    .build()
}

#[test]
fn walking_activity_with_park() {
    let mut c = Community::new("neighbourhood", taxonomy(), MatchPolicy::default());
    for m in ["1", "2", "3", "4"] {
        c.add_member(m, MemberKind::Person).unwrap();
    }
    c.publish("1", walk(Some("Walking"), Some("Walking"))).unwrap();
    c.publish("2", walk(Some("Walking"), Some("Walking"))).unwrap();
    c.publish("3", walk(None, Some("Walking"))).unwrap();
    c.publish("4", walk(Some("Location"), None)).unwrap();

    let [activity] = c.activities() else {
        panic!("expected one activity, got {:?}", c.activities());
    };
    let participants: Vec<&str> = activity.participants.iter().map(String::as_str).collect();
    assert_eq!(participants, ["1", "2", "3"]);
    let binding = activity.binding.as_ref().unwrap();
    assert_eq!(binding.provider, "4");
    assert_eq!(binding.service_type, "Location");
    assert!(!activity.is_pending());
}

#[test]
fn unbound_activity_stays_pending() {
    let mut c = Community::new("c", taxonomy(), MatchPolicy::default());
    for m in ["1", "2"] {
        c.add_member(m, MemberKind::Person).unwrap();
    }
    c.publish("1", walk(Some("Walking"), Some("Walking"))).unwrap();
    c.publish("2", walk(Some("Walking"), Some("Walking"))).unwrap();
    let a = &c.activities()[0];
    assert_eq!(a.residual.as_deref(), Some("Location"));
    assert!(c.pending().iter().any(|p| p.member == a.id));
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[test]
fn one_activity_per_type_in_every_order() {
    let script: [(&str, Option<&str>, Option<&str>); 5] = [
        ("1", Some("Walking"), Some("Walking")),
        ("2", Some("Walking"), Some("Walking")),
        ("3", Some("Walking"), Some("Walking")),
        ("4", Some("Walking"), Some("Walking")),
        ("5", None, Some("Walking")),
    ];
    for order in permutations(&[0, 1, 2, 3, 4]) {
        let mut c = Community::new("c", taxonomy(), MatchPolicy::default());
        for (m, ..) in script {
            c.add_member(m, MemberKind::Person).unwrap();
        }
        for &i in &order {
            let (m, p, r) = script[i];
            c.publish(m, walk(p, r)).unwrap();
        }
        let walking: Vec<_> = c.activities().iter().filter(|a| a.activity_type == "Walking").collect();
        assert_eq!(walking.len(), 1, "order {order:?}");
        assert_eq!(c.activities().len(), 1);
    }
}

#[test]
fn the_three_matching_cases() {
    let tax = taxonomy();
    let strict = MatchPolicy::default();
    let lenient = MatchPolicy {
        allow_specialization: true,
        ..strict
    };
    assert_eq!(
        match_pair(&walk(Some("Walking"), None), &walk(None, Some("Fitness")), &tax, &strict),
        MatchKind::Service {
            direction: Direction::FirstToSecond,
            service_type: "Walking".into()
        }
    );
    let up = (walk(Some("Fitness"), None), walk(None, Some("Walking")));
    assert_eq!(match_pair(&up.0, &up.1, &tax, &strict), MatchKind::NoMatch);
    assert!(matches!(match_pair(&up.0, &up.1, &tax, &lenient), MatchKind::Service { .. }));
    let beach = &parse_descriptions(include_str!("../../../data/descriptions/beach_walk.ttl")).unwrap()[0];
    assert_eq!(
        match_pair(beach, beach, &tax, &strict),
        MatchKind::Group {
            shared_type: "Walking".into()
        }
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symmetric_up_to_role_reversal(a in spec_strategy(), b in spec_strategy(), spec_ok: bool, overlap: bool) {
        let tax = taxonomy();
        let pol = MatchPolicy { allow_specialization: spec_ok, require_time_overlap: overlap };
        let (da, db) = (a.build(), b.build());
        prop_assert_eq!(match_pair(&da, &db, &tax, &pol), match_pair(&db, &da, &tax, &pol).swapped());
    }

    #[test]
    fn exact_types_ignore_specialization(t in 0usize..5, u in 0usize..5, overlap: bool) {
        let tax = taxonomy();
        let a = Spec { provide: Some(t), request: Some(u), start: 1, end: 3 };
        let b = Spec { provide: Some(u), request: Some(t), start: 2, end: 4 };
        let off = MatchPolicy { allow_specialization: false, require_time_overlap: overlap };
        let on = MatchPolicy { allow_specialization: true, ..off };
        prop_assert_eq!(
            match_pair(&a.build(), &b.build(), &tax, &off),
            match_pair(&a.build(), &b.build(), &tax, &on)
        );
    }

    #[test]
    fn agrees_with_oracle_rule(a in spec_strategy(), b in spec_strategy(), spec_ok: bool, overlap: bool) {
        let reach = closure(TYPES.len(), &EDGES);
        let pol = MatchPolicy { allow_specialization: spec_ok, require_time_overlap: overlap };
        let got = match_pair(&a.build(), &b.build(), &taxonomy(), &pol);
        let want = oracle_kind(&a, &b, &reach, spec_ok, overlap);
        let got = match got {
            MatchKind::NoMatch => None,
            MatchKind::Service { direction: Direction::FirstToSecond, service_type } => Some(format!("service first {service_type}")),
            MatchKind::Service { direction: Direction::SecondToFirst, service_type } => Some(format!("service second {service_type}")),
            MatchKind::Mutualistic { x, y } => Some(format!("mutual {x} {y}")),
            MatchKind::Group { shared_type } => Some(format!("group {shared_type}")),
        };
        prop_assert_eq!(got, want);
    }
}
