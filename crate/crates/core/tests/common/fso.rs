//! Random community trees mirrored in plain vectors.

use fso_core::fractal::{CommunityNode, FractalOrganization, FsoMember, TriggeringCondition};
use fso_core::taxonomy::Taxonomy;
use rand::Rng;

use super::staffable;

pub const TYPES: [&str; 6] = ["Care", "Nurse", "Doctor", "Transport", "Driver", "Cook"];
pub const EDGES: [(usize, usize); 3] = [(1, 0), (2, 0), (4, 3)];

pub fn taxonomy() -> Taxonomy {
    let mut t = Taxonomy::new();
    for (c, p) in EDGES {
        t.add_subclass(TYPES[c], TYPES[p]).unwrap();
    }
    t
}

/// Plain mirror of a random tree.
#[derive(Debug, Clone)]
pub struct Tree {
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// (member name, offered type indices) per community
    pub members: Vec<Vec<(String, Vec<usize>)>>,
}

impl Tree {
    pub fn random<R: Rng>(rng: &mut R) -> Tree {
        let mut t = Tree {
            parent: vec![None],
            depth: vec![0],
            members: vec![Vec::new()],
        };
        let communities = rng.gen_range(1..=10);
        while t.parent.len() < communities {
            let p = rng.gen_range(0..t.parent.len());
            if t.depth[p] < 3 {
                t.parent.push(Some(p));
                t.depth.push(t.depth[p] + 1);
                t.members.push(Vec::new());
            }
        }
        for m in 0..rng.gen_range(0..=30) {
            let c = rng.gen_range(0..communities);
            let offers = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..TYPES.len())).collect();
            t.members[c].push((format!("m{m:02}"), offers));
        }
        t
    }

    pub fn node(&self, c: usize) -> CommunityNode {
        let mut n = CommunityNode::new(format!("c{c}"));
        for (id, offers) in &self.members[c] {
            n = n.with_member(FsoMember::new(id.clone(), offers.iter().map(|&o| TYPES[o])));
        }
        for child in (0..self.parent.len()).filter(|&k| self.parent[k] == Some(c)) {
            n = n.with_child(self.node(child));
        }
        n
    }

    pub fn org(&self) -> FractalOrganization {
        FractalOrganization::new(self.node(0), taxonomy()).unwrap()
    }

    pub fn in_subtree(&self, mut c: usize, root: usize) -> bool {
        loop {
            if c == root {
                return true;
            }
            match self.parent[c] {
                Some(p) => c = p,
                None => return false,
            }
        }
    }

    /// Can the members of the given communities staff `roles`?
    pub fn can_staff(&self, scope: impl Fn(usize) -> bool, roles: &[usize], reach: &[Vec<bool>]) -> bool {
        let pool: Vec<&Vec<usize>> = (0..self.parent.len())
            .filter(|&c| scope(c))
            .flat_map(|c| self.members[c].iter().map(|(_, o)| o))
            .collect();
        let can: Vec<Vec<usize>> = roles
            .iter()
            .map(|&r| (0..pool.len()).filter(|&i| pool[i].iter().any(|&o| reach[o][r])).collect())
            .collect();
        staffable(&can)
    }

    /// Number of exceptions the escalation should raise, or `None` if even
    /// the whole tree cannot staff the roles.
    pub fn expected_trail(&self, origin: usize, roles: &[usize], reach: &[Vec<bool>]) -> Option<usize> {
        let mut level = origin;
        let mut trail = 0;
        loop {
            if self.can_staff(|c| self.in_subtree(c, level), roles, reach) {
                return Some(trail);
            }
            level = self.parent[level]?;
            trail += 1;
        }
    }
}

pub fn condition(origin: usize, roles: &[usize]) -> TriggeringCondition {
    TriggeringCondition {
        id: "cond".into(),
        origin: format!("c{origin}"),
        roles: roles.iter().map(|&r| TYPES[r].to_string()).collect(),
    }
}
