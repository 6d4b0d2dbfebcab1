//! A single service-oriented community: members publish descriptions, and
//! every new description is matched against the outstanding ones.
//!
//! Matching is greedy in publication order. A pair whose provided and
//! requested types coincide in both directions is a *group* match; when
//! promotion is enabled the group becomes a member of its own, an
//! activity that provides the shared type and requests a residual service
//! (a `Location` by default). Later requesters of the shared type join that
//! activity, and the first provider of the residual service binds it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::descriptions::{ServiceDescription, Timestamp};
use crate::taxonomy::Taxonomy;

pub type MemberId = String;

/// Residual request of a newly formed group activity unless configured
/// otherwise with [`Community::set_residual_request`].
pub const DEFAULT_RESIDUAL: &str = "Location";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommunityError {
    #[error("unknown member `{0}`")]
    UnknownMember(MemberId),
    #[error("member `{0}` is already registered")]
    DuplicateMember(MemberId),
    #[error("only group events can be promoted to activities")]
    NotAGroupEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct DescriptionId(pub usize);

impl fmt::Display for DescriptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Person,
    GroupActivity,
    CommunityProxy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Member {
    pub id: MemberId,
    pub kind: MemberKind,
    pub published: Vec<DescriptionId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatchPolicy {
    /// Lets a provider of a supertype satisfy a request for a subtype.
    pub allow_specialization: bool,
    /// Requires the `[start, end]` windows of both descriptions to intersect.
    pub require_time_overlap: bool,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            allow_specialization: false,
            require_time_overlap: true,
        }
    }
}

impl MatchPolicy {
    /// Type of the service exchanged when `provided` satisfies `requested`:
    /// the more specific of the two, or `None` if they do not match.
    pub fn satisfies<'a>(&self, tax: &Taxonomy, provided: &'a str, requested: &'a str) -> Option<&'a str> {
        if tax.is_subtype(provided, requested) {
            Some(provided)
        } else if self.allow_specialization && tax.is_subtype(requested, provided) {
            Some(requested)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The first description provides, the second requests.
    FirstToSecond,
    SecondToFirst,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::FirstToSecond => Direction::SecondToFirst,
            Direction::SecondToFirst => Direction::FirstToSecond,
        }
    }
}

/// Outcome of comparing two descriptions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchKind {
    NoMatch,
    Service { direction: Direction, service_type: String },
    /// `x` flows from the first description to the second, `y` back.
    Mutualistic { x: String, y: String },
    Group { shared_type: String },
}

impl MatchKind {
    pub fn is_match(&self) -> bool {
        !matches!(self, MatchKind::NoMatch)
    }

    /// The same outcome seen with the two descriptions swapped.
    pub fn swapped(&self) -> MatchKind {
        match self {
            MatchKind::Service { direction, service_type } => MatchKind::Service {
                direction: direction.reversed(),
                service_type: service_type.clone(),
            },
            MatchKind::Mutualistic { x, y } => MatchKind::Mutualistic { x: y.clone(), y: x.clone() },
            other => other.clone(),
        }
    }
}

pub fn match_pair(
    d1: &ServiceDescription,
    d2: &ServiceDescription,
    tax: &Taxonomy,
    pol: &MatchPolicy,
) -> MatchKind {
    if pol.require_time_overlap && !d1.overlaps(d2) {
        return MatchKind::NoMatch;
    }
    let flow = |from: &ServiceDescription, to: &ServiceDescription| -> Option<String> {
        pol.satisfies(tax, from.provide()?, to.request()?).map(str::to_owned)
    };
    match (flow(d1, d2), flow(d2, d1)) {
        (Some(x), Some(y)) if x == y => MatchKind::Group { shared_type: x },
        (Some(x), Some(y)) => MatchKind::Mutualistic { x, y },
        (Some(t), None) => MatchKind::Service {
            direction: Direction::FirstToSecond,
            service_type: t,
        },
        (None, Some(t)) => MatchKind::Service {
            direction: Direction::SecondToFirst,
            service_type: t,
        },
        (None, None) => MatchKind::NoMatch,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Publication {
    pub id: DescriptionId,
    pub member: MemberId,
    pub description: ServiceDescription,
    pub consumed: bool,
}

/// Where a group activity takes place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActivityBinding {
    pub provider: MemberId,
    pub description: DescriptionId,
    pub service_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupActivity {
    pub id: MemberId,
    pub activity_type: String,
    pub participants: BTreeSet<MemberId>,
    /// The activity's own published description.
    pub description: DescriptionId,
    /// Open residual request, `None` once bound or if none was configured.
    pub residual: Option<String>,
    pub binding: Option<ActivityBinding>,
}

impl GroupActivity {
    pub fn is_pending(&self) -> bool {
        self.residual.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommunityEvent {
    Service {
        provider: MemberId,
        requester: MemberId,
        service_type: String,
        descriptions: [DescriptionId; 2],
    },
    /// `first` provides `x` to `second`, which provides `y` back.
    Mutualistic {
        first: MemberId,
        second: MemberId,
        x: String,
        y: String,
        descriptions: [DescriptionId; 2],
    },
    Group {
        members: [MemberId; 2],
        shared_type: String,
        descriptions: [DescriptionId; 2],
    },
    ActivityFormed {
        activity: MemberId,
        activity_type: String,
        participants: Vec<MemberId>,
    },
    Joined {
        activity: MemberId,
        member: MemberId,
        description: DescriptionId,
    },
    Bound {
        activity: MemberId,
        provider: MemberId,
        service_type: String,
        description: DescriptionId,
    },
}

impl CommunityEvent {
    /// Descriptions this event took out of circulation.
    pub fn consumed(&self) -> Vec<DescriptionId> {
        match self {
            CommunityEvent::Service { descriptions, .. }
            | CommunityEvent::Mutualistic { descriptions, .. }
            | CommunityEvent::Group { descriptions, .. } => descriptions.to_vec(),
            CommunityEvent::Joined { description, .. } | CommunityEvent::Bound { description, .. } => {
                vec![*description]
            }
            CommunityEvent::ActivityFormed { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Community {
    id: String,
    taxonomy: Taxonomy,
    policy: MatchPolicy,
    promote_groups: bool,
    residuals: BTreeMap<String, Option<String>>,
    members: BTreeMap<MemberId, Member>,
    publications: Vec<Publication>,
    activities: Vec<GroupActivity>,
}

impl Community {
    pub fn new(id: impl Into<String>, taxonomy: Taxonomy, policy: MatchPolicy) -> Self {
        Community {
            id: id.into(),
            taxonomy,
            policy,
            promote_groups: true,
            residuals: BTreeMap::new(),
            members: BTreeMap::new(),
            publications: Vec::new(),
            activities: Vec::new(),
        }
    }

    /// Turns automatic promotion of group matches into activities on or off.
    pub fn with_group_promotion(mut self, on: bool) -> Self {
        self.promote_groups = on;
        self
    }

    /// Residual request for activities of `activity_type`; `None` means the
    /// activity requests nothing further.
    pub fn set_residual_request(&mut self, activity_type: &str, residual: Option<String>) {
        self.residuals.insert(activity_type.to_owned(), residual);
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn policy(&self) -> &MatchPolicy {
        &self.policy
    }

    pub fn add_member(&mut self, id: impl Into<MemberId>, kind: MemberKind) -> Result<(), CommunityError> {
        let id = id.into();
        if self.members.contains_key(&id) {
            return Err(CommunityError::DuplicateMember(id));
        }
        self.members.insert(
            id.clone(),
            Member {
                id,
                kind,
                published: Vec::new(),
            },
        );
        Ok(())
    }

    pub fn member(&self, id: &str) -> Option<&Member> {
        self.members.get(id)
    }

    pub fn members(&self) -> impl Iterator<Item = &Member> {
        self.members.values()
    }

    pub fn publication(&self, id: DescriptionId) -> &Publication {
        &self.publications[id.0]
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn activities(&self) -> &[GroupActivity] {
        &self.activities
    }

    /// Unconsumed descriptions in publication order.
    pub fn pending(&self) -> Vec<&Publication> {
        self.publications.iter().filter(|p| !p.consumed).collect()
    }

    fn push_publication(&mut self, member: &str, d: ServiceDescription) -> DescriptionId {
        let id = DescriptionId(self.publications.len());
        self.publications.push(Publication {
            id,
            member: member.to_owned(),
            description: d,
            consumed: false,
        });
        self.members.get_mut(member).unwrap().published.push(id);
        id
    }

    fn activity_index(&self, desc: DescriptionId) -> Option<usize> {
        self.activities.iter().position(|a| a.description == desc)
    }

    /// Publishes `d` on behalf of `member` and returns the events it caused.
    pub fn publish(&mut self, member: &str, d: ServiceDescription) -> Result<Vec<CommunityEvent>, CommunityError> {
        if !self.members.contains_key(member) {
            return Err(CommunityError::UnknownMember(member.to_owned()));
        }
        let id = self.push_publication(member, d);
        let mut events = self.match_new(id);
        if self.promote_groups {
            if let Some(group) = events.iter().find(|e| matches!(e, CommunityEvent::Group { .. })).cloned() {
                let (more, _) = self.form_group_activity(&group)?;
                events.extend(more);
            }
        }
        Ok(events)
    }

    /// Matches a freshly published ordinary description against the
    /// outstanding ones; the first match wins.
    fn match_new(&mut self, new: DescriptionId) -> Vec<CommunityEvent> {
        let new_member = self.publications[new.0].member.clone();
        for j in 0..new.0 {
            let other = &self.publications[j];
            if other.consumed || other.member == new_member {
                continue;
            }
            if let Some(a) = self.activity_index(other.id) {
                let evs = self.match_activity_with(a, new);
                if !evs.is_empty() {
                    return evs;
                }
                continue;
            }
            let kind = match_pair(
                &other.description,
                &self.publications[new.0].description,
                &self.taxonomy,
                &self.policy,
            );
            if !kind.is_match() {
                continue;
            }
            let first = other.member.clone();
            let descriptions = [other.id, new];
            self.publications[j].consumed = true;
            self.publications[new.0].consumed = true;
            let ev = match kind {
                MatchKind::Service { direction, service_type } => {
                    let (provider, requester) = match direction {
                        Direction::FirstToSecond => (first, new_member),
                        Direction::SecondToFirst => (new_member, first),
                    };
                    CommunityEvent::Service {
                        provider,
                        requester,
                        service_type,
                        descriptions,
                    }
                }
                MatchKind::Mutualistic { x, y } => CommunityEvent::Mutualistic {
                    first,
                    second: new_member,
                    x,
                    y,
                    descriptions,
                },
                MatchKind::Group { shared_type } => CommunityEvent::Group {
                    members: [first, new_member],
                    shared_type,
                    descriptions,
                },
                MatchKind::NoMatch => unreachable!(),
            };
            log::debug!("community {}: {:?}", self.id, ev);
            return vec![ev];
        }
        Vec::new()
    }

    /// Lets the description `other` join and/or bind activity `a`.
    ///
    /// Joining leaves the activity's description open for further
    /// participants; binding closes its residual request.
    fn match_activity_with(&mut self, a: usize, other: DescriptionId) -> Vec<CommunityEvent> {
        let act = &self.activities[a];
        let act_desc = act.description;
        let pub_other = &self.publications[other.0];
        if pub_other.consumed || pub_other.member == act.id || self.activity_index(other).is_some() {
            return Vec::new();
        }
        let kind = match_pair(
            &self.publications[act_desc.0].description,
            &pub_other.description,
            &self.taxonomy,
            &self.policy,
        );
        let (join, bind) = match kind {
            MatchKind::NoMatch => return Vec::new(),
            MatchKind::Service {
                direction: Direction::FirstToSecond,
                service_type,
            } => (Some(service_type), None),
            MatchKind::Service {
                direction: Direction::SecondToFirst,
                service_type,
            } => (None, Some(service_type)),
            MatchKind::Mutualistic { x, y } => (Some(x), Some(y)),
            MatchKind::Group { shared_type } => (Some(shared_type.clone()), Some(shared_type)),
        };
        let member = pub_other.member.clone();
        let activity = act.id.clone();
        self.publications[other.0].consumed = true;

        let mut events = Vec::new();
        if join.is_some() {
            self.activities[a].participants.insert(member.clone());
            events.push(CommunityEvent::Joined {
                activity: activity.clone(),
                member: member.clone(),
                description: other,
            });
        }
        if let Some(service_type) = bind {
            let closed = self.publications[act_desc.0]
                .description
                .without_request()
                .expect("activities always provide their type");
            self.publications[act_desc.0].description = closed;
            let act = &mut self.activities[a];
            act.residual = None;
            act.binding = Some(ActivityBinding {
                provider: member.clone(),
                description: other,
                service_type: service_type.clone(),
            });
            events.push(CommunityEvent::Bound {
                activity,
                provider: member,
                service_type,
                description: other,
            });
        }
        log::debug!("community {}: {:?}", self.id, events);
        events
    }

    /// Promotes a group match to an activity member, or merges its members
    /// into the existing activity of the same type.
    ///
    /// A new activity publishes a description providing the shared type and
    /// requesting the residual service, and is immediately matched against
    /// every outstanding description: requesters of the shared type join,
    /// and the first residual provider binds it.
    pub fn form_group_activity(
        &mut self,
        event: &CommunityEvent,
    ) -> Result<(Vec<CommunityEvent>, MemberId), CommunityError> {
        let CommunityEvent::Group {
            members,
            shared_type,
            descriptions,
        } = event
        else {
            return Err(CommunityError::NotAGroupEvent);
        };
        for m in members {
            if !self.members.contains_key(m) {
                return Err(CommunityError::UnknownMember(m.clone()));
            }
        }

        if let Some(a) = self.activities.iter().position(|a| a.activity_type == *shared_type) {
            let mut events = Vec::new();
            for (m, d) in members.iter().zip(descriptions) {
                if self.activities[a].participants.insert(m.clone()) {
                    events.push(CommunityEvent::Joined {
                        activity: self.activities[a].id.clone(),
                        member: m.clone(),
                        description: *d,
                    });
                }
            }
            return Ok((events, self.activities[a].id.clone()));
        }

        let d1 = &self.publications[descriptions[0].0].description;
        let d2 = &self.publications[descriptions[1].0].description;
        let residual = self
            .residuals
            .get(shared_type)
            .cloned()
            .unwrap_or_else(|| Some(DEFAULT_RESIDUAL.to_owned()));
        let id = format!("activity-{}", self.activities.len() + 1);
        let (start, end) = shared_window(d1, d2);
        let mut builder = ServiceDescription::builder(format!("urn:fso:{}:{}", self.id_for_iri(), id))
            .window(d1.creation_time().max(d2.creation_time()), start, end)
            .provide(shared_type.clone());
        if let Some(r) = &residual {
            builder = builder.request(r.clone());
        }
        let description = builder
            .build()
            .expect("derived activity descriptions are valid");

        self.add_member(id.clone(), MemberKind::GroupActivity)?;
        let desc_id = self.push_publication(&id, description);
        let participants: BTreeSet<MemberId> = members.iter().cloned().collect();
        self.activities.push(GroupActivity {
            id: id.clone(),
            activity_type: shared_type.clone(),
            participants: participants.clone(),
            description: desc_id,
            residual,
            binding: None,
        });
        let a = self.activities.len() - 1;

        let mut events = vec![CommunityEvent::ActivityFormed {
            activity: id.clone(),
            activity_type: shared_type.clone(),
            participants: participants.into_iter().collect(),
        }];
        for j in 0..desc_id.0 {
            events.extend(self.match_activity_with(a, DescriptionId(j)));
        }
        Ok((events, id))
    }

    fn id_for_iri(&self) -> String {
        self.id
            .chars()
            .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
            .collect()
    }
}

/// Intersection of the two windows, or their hull when they are disjoint.
fn shared_window(d1: &ServiceDescription, d2: &ServiceDescription) -> (Timestamp, Timestamp) {
    let start = d1.start_time().max(d2.start_time());
    let end = d1.end_time().min(d2.end_time());
    if start <= end {
        (start, end)
    } else {
        (d1.start_time().min(d2.start_time()), d1.end_time().max(d2.end_time()))
    }
}
