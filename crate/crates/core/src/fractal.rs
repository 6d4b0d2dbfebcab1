//! Fractal social organization: communities nested in communities.
//!
//! A triggering condition fires in one community and needs a set of roles
//! staffed. The origin searches its own subtree first. Roles it cannot fill
//! are reported in an [`ExceptionRecord`] and the search moves to the
//! parent, whose scope adds its own members and the subtrees of its other
//! children. Escalation stops at the root. A fully staffed condition yields
//! an active [`SocialOverlayNetwork`]; its members stay booked until the
//! overlay is dissolved.
//!
//! Within the accumulated scope roles are staffed by maximum bipartite
//! matching (augmenting paths), so a role assigned at a lower level is never
//! unassigned later, although its member may be swapped for another
//! candidate to make room for a new role.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{MemberId, MemberKind};
use crate::taxonomy::{parse_taxonomy, Taxonomy, TaxonomyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractalError {
    #[error("unknown community `{0}`")]
    UnknownCommunity(String),
    #[error("community `{0}` appears twice in the tree")]
    DuplicateCommunity(String),
    #[error("member `{0}` appears twice in the tree")]
    DuplicateMember(MemberId),
    #[error("overlay for condition `{0}` is already dissolved")]
    AlreadyDissolved(String),
    #[error("taxonomy: {0}")]
    Taxonomy(#[from] TaxonomyError),
    #[error("invalid fixture: {0}")]
    Fixture(String),
}

/// A member together with the service types it can play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsoMember {
    pub id: MemberId,
    #[serde(default)]
    pub offers: Vec<String>,
}

impl FsoMember {
    pub fn new<I, S>(id: impl Into<MemberId>, offers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FsoMember {
            id: id.into(),
            offers: offers.into_iter().map(Into::into).collect(),
        }
    }
}

/// Tree form of a community and its nested communities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityNode {
    pub id: String,
    #[serde(default)]
    pub members: Vec<FsoMember>,
    #[serde(default)]
    pub children: Vec<CommunityNode>,
}

impl CommunityNode {
    pub fn new(id: impl Into<String>) -> Self {
        CommunityNode {
            id: id.into(),
            members: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_member(mut self, m: FsoMember) -> Self {
        self.members.push(m);
        self
    }

    pub fn with_child(mut self, c: CommunityNode) -> Self {
        self.children.push(c);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggeringCondition {
    pub id: String,
    pub origin: String,
    /// Multiset of role types; a type listed twice needs two members.
    pub roles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RoleAssignment {
    pub role: String,
    pub member: MemberId,
    pub community: String,
}

/// Raised by a community that could not staff every role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExceptionRecord {
    pub condition: String,
    pub community: String,
    pub missing: Vec<String>,
    /// Partial assignment forwarded to the parent.
    pub assigned: Vec<RoleAssignment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayStatus {
    Active,
    Dissolved,
}

/// Temporary cross-community team serving one condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SocialOverlayNetwork {
    pub condition: String,
    /// One entry per required role, in the condition's role order.
    pub assignments: Vec<RoleAssignment>,
    pub status: OverlayStatus,
}

impl SocialOverlayNetwork {
    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.assignments.iter().map(|a| a.member.as_str())
    }

    /// Home communities of the overlay's members.
    pub fn communities(&self) -> BTreeSet<&str> {
        self.assignments.iter().map(|a| a.community.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Resolution {
    Complete {
        overlay: SocialOverlayNetwork,
        exceptions: Vec<ExceptionRecord>,
    },
    Incomplete {
        condition: String,
        missing: Vec<String>,
        assigned: Vec<RoleAssignment>,
        exceptions: Vec<ExceptionRecord>,
    },
}

impl Resolution {
    pub fn exceptions(&self) -> &[ExceptionRecord] {
        match self {
            Resolution::Complete { exceptions, .. } | Resolution::Incomplete { exceptions, .. } => exceptions,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, Resolution::Complete { .. })
    }

    pub fn overlay(&self) -> Option<&SocialOverlayNetwork> {
        match self {
            Resolution::Complete { overlay, .. } => Some(overlay),
            Resolution::Incomplete { .. } => None,
        }
    }

    pub fn into_overlay(self) -> Option<SocialOverlayNetwork> {
        match self {
            Resolution::Complete { overlay, .. } => Some(overlay),
            Resolution::Incomplete { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: String,
    parent: Option<usize>,
    children: Vec<usize>,
    depth: usize,
    /// Sorted by member id.
    members: Vec<FsoMember>,
}

/// Arena-backed community tree with member bookings.
#[derive(Debug, Clone)]
pub struct FractalOrganization {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    taxonomy: Taxonomy,
    single_booking: bool,
    bookings: BTreeMap<MemberId, String>,
}

impl FractalOrganization {
    pub fn new(root: CommunityNode, taxonomy: Taxonomy) -> Result<Self, FractalError> {
        let mut org = FractalOrganization {
            nodes: Vec::new(),
            index: HashMap::new(),
            taxonomy,
            single_booking: true,
            bookings: BTreeMap::new(),
        };
        let mut seen_members = BTreeSet::new();
        org.insert(root, None, 0, &mut seen_members)?;
        Ok(org)
    }

    fn insert(
        &mut self,
        node: CommunityNode,
        parent: Option<usize>,
        depth: usize,
        seen: &mut BTreeSet<MemberId>,
    ) -> Result<usize, FractalError> {
        if self.index.contains_key(&node.id) {
            return Err(FractalError::DuplicateCommunity(node.id));
        }
        for m in &node.members {
            if !seen.insert(m.id.clone()) {
                return Err(FractalError::DuplicateMember(m.id.clone()));
            }
        }
        let mut members = node.members;
        members.sort_by(|a, b| a.id.cmp(&b.id));
        let idx = self.nodes.len();
        self.index.insert(node.id.clone(), idx);
        self.nodes.push(Node {
            id: node.id,
            parent,
            children: Vec::new(),
            depth,
            members,
        });
        for child in node.children {
            let c = self.insert(child, Some(idx), depth + 1, seen)?;
            self.nodes[idx].children.push(c);
        }
        Ok(idx)
    }

    /// Allows members to serve several active overlays at once.
    pub fn with_single_booking(mut self, on: bool) -> Self {
        self.single_booking = on;
        self
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn root(&self) -> &str {
        &self.nodes[0].id
    }

    pub fn communities(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    fn node(&self, id: &str) -> Result<usize, FractalError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| FractalError::UnknownCommunity(id.to_owned()))
    }

    /// Root has depth 0.
    pub fn depth(&self, community: &str) -> Result<usize, FractalError> {
        Ok(self.nodes[self.node(community)?].depth)
    }

    pub fn parent(&self, community: &str) -> Result<Option<&str>, FractalError> {
        Ok(self.nodes[self.node(community)?]
            .parent
            .map(|p| self.nodes[p].id.as_str()))
    }

    /// Direct members of a community: its people first (by id), then one
    /// proxy per child community.
    pub fn direct_members(&self, community: &str) -> Result<Vec<(String, MemberKind)>, FractalError> {
        let n = &self.nodes[self.node(community)?];
        Ok(n.members
            .iter()
            .map(|m| (m.id.clone(), MemberKind::Person))
            .chain(
                n.children
                    .iter()
                    .map(|&c| (self.nodes[c].id.clone(), MemberKind::CommunityProxy)),
            )
            .collect())
    }

    /// Adds a member to an existing community.
    pub fn add_member(&mut self, community: &str, member: FsoMember) -> Result<(), FractalError> {
        let idx = self.node(community)?;
        if self.nodes.iter().any(|n| n.members.iter().any(|m| m.id == member.id)) {
            return Err(FractalError::DuplicateMember(member.id));
        }
        let members = &mut self.nodes[idx].members;
        let pos = members.partition_point(|m| m.id < member.id);
        members.insert(pos, member);
        Ok(())
    }

    pub fn booking(&self, member: &str) -> Option<&str> {
        self.bookings.get(member).map(String::as_str)
    }

    fn preorder(&self, start: usize, out: &mut Vec<usize>) {
        out.push(start);
        for &c in &self.nodes[start].children {
            self.preorder(c, out);
        }
    }

    fn offers_role(&self, m: &FsoMember, role: &str) -> bool {
        m.offers.iter().any(|o| self.taxonomy.is_subtype(o, role))
    }

    /// Staffs `cond`, escalating from its origin towards the root.
    pub fn resolve(&mut self, cond: &TriggeringCondition) -> Result<Resolution, FractalError> {
        let origin = self.node(&cond.origin)?;
        let roles = &cond.roles;

        // candidates are (community, member index) in scan order
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); roles.len()];
        let mut role_of: Vec<Option<usize>> = Vec::new();
        let mut member_of: Vec<Option<usize>> = vec![None; roles.len()];
        let mut scanned = vec![false; self.nodes.len()];
        let mut exceptions = Vec::new();
        let mut level = origin;

        loop {
            let mut order = Vec::new();
            self.preorder(level, &mut order);
            for community in order {
                if std::mem::replace(&mut scanned[community], true) {
                    continue;
                }
                for (mi, m) in self.nodes[community].members.iter().enumerate() {
                    if self.single_booking && self.bookings.contains_key(&m.id) {
                        continue;
                    }
                    let c = candidates.len();
                    candidates.push((community, mi));
                    role_of.push(None);
                    for (r, role) in roles.iter().enumerate() {
                        if self.offers_role(m, role) {
                            adj[r].push(c);
                        }
                    }
                }
            }

            for r in 0..roles.len() {
                if member_of[r].is_none() {
                    let mut visited = vec![false; candidates.len()];
                    augment(r, &adj, &mut role_of, &mut member_of, &mut visited);
                }
            }

            let assigned = self.assignments(roles, &candidates, &member_of);
            let missing: Vec<String> = (0..roles.len())
                .filter(|&r| member_of[r].is_none())
                .map(|r| roles[r].clone())
                .collect();

            if missing.is_empty() {
                if self.single_booking {
                    for a in &assigned {
                        self.bookings.insert(a.member.clone(), cond.id.clone());
                    }
                }
                return Ok(Resolution::Complete {
                    overlay: SocialOverlayNetwork {
                        condition: cond.id.clone(),
                        assignments: assigned,
                        status: OverlayStatus::Active,
                    },
                    exceptions,
                });
            }

            match self.nodes[level].parent {
                Some(parent) => {
                    log::debug!(
                        "condition {}: {} raises exception, missing {:?}",
                        cond.id,
                        self.nodes[level].id,
                        missing
                    );
                    exceptions.push(ExceptionRecord {
                        condition: cond.id.clone(),
                        community: self.nodes[level].id.clone(),
                        missing,
                        assigned,
                    });
                    level = parent;
                }
                None => {
                    return Ok(Resolution::Incomplete {
                        condition: cond.id.clone(),
                        missing,
                        assigned,
                        exceptions,
                    })
                }
            }
        }
    }

    fn assignments(
        &self,
        roles: &[String],
        candidates: &[(usize, usize)],
        member_of: &[Option<usize>],
    ) -> Vec<RoleAssignment> {
        member_of
            .iter()
            .enumerate()
            .filter_map(|(r, c)| {
                let (community, mi) = candidates[(*c)?];
                Some(RoleAssignment {
                    role: roles[r].clone(),
                    member: self.nodes[community].members[mi].id.clone(),
                    community: self.nodes[community].id.clone(),
                })
            })
            .collect()
    }

    /// Ends an overlay and releases its members' bookings.
    pub fn dissolve(&mut self, mut overlay: SocialOverlayNetwork) -> Result<SocialOverlayNetwork, FractalError> {
        if overlay.status == OverlayStatus::Dissolved {
            return Err(FractalError::AlreadyDissolved(overlay.condition));
        }
        for a in &overlay.assignments {
            if self.bookings.get(&a.member) == Some(&overlay.condition) {
                self.bookings.remove(&a.member);
            }
        }
        overlay.status = OverlayStatus::Dissolved;
        Ok(overlay)
    }
}

/// Kuhn's augmenting step for role `r`. Free candidates are preferred so
/// that existing assignments move only when necessary.
fn augment(
    r: usize,
    adj: &[Vec<usize>],
    role_of: &mut [Option<usize>],
    member_of: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    if let Some(&c) = adj[r].iter().find(|&&c| role_of[c].is_none() && !visited[c]) {
        visited[c] = true;
        role_of[c] = Some(r);
        member_of[r] = Some(c);
        return true;
    }
    for &c in &adj[r] {
        if visited[c] {
            continue;
        }
        visited[c] = true;
        let holder = role_of[c].expect("non-free candidate");
        if augment(holder, adj, role_of, member_of, visited) {
            role_of[c] = Some(r);
            member_of[r] = Some(c);
            return true;
        }
    }
    false
}

/// JSON fixture: a taxonomy, a community tree, and conditions to resolve.
///
/// ```json
/// {
///   "taxonomy": ["Nurse subClassOf Carer"],
///   "root": { "id": "city", "members": [{ "id": "ann", "offers": ["Nurse"] }],
///             "children": [] },
///   "conditions": [{ "id": "fall-1", "origin": "city", "roles": ["Carer"] }]
/// }
/// ```
#[derive(Debug, Clone, Deserialize)]
pub struct FsoFixture {
    #[serde(default)]
    pub taxonomy: Vec<String>,
    pub root: CommunityNode,
    #[serde(default)]
    pub conditions: Vec<TriggeringCondition>,
    #[serde(default = "default_true")]
    pub single_booking: bool,
}

fn default_true() -> bool {
    true
}

impl FsoFixture {
    pub fn from_json(text: &str) -> Result<Self, FractalError> {
        serde_json::from_str(text).map_err(|e| FractalError::Fixture(e.to_string()))
    }

    pub fn build(&self) -> Result<FractalOrganization, FractalError> {
        let taxonomy = parse_taxonomy(&self.taxonomy.join("\n"))?;
        Ok(FractalOrganization::new(self.root.clone(), taxonomy)?.with_single_booking(self.single_booking))
    }

    /// Resolves every condition in order against one organization; overlays
    /// stay active, so later conditions see earlier bookings.
    pub fn run(&self) -> Result<Vec<Resolution>, FractalError> {
        let mut org = self.build()?;
        for c in &self.conditions {
            org.node(&c.origin)?;
        }
        self.conditions.iter().map(|c| org.resolve(c)).collect()
    }
}
