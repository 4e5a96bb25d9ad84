//! All runs up to the horizon as one arena, plus per-coalition partitions of
//! it into indiscernibility classes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use super::OracleError;
use crate::system::{ActionId, InterpretedSystem, Run, StateId};

pub type NodeId = u32;

/// Largest run tree the evaluator will build.
pub const TREE_LIMIT: usize = 1 << 22;

/// Runs of length `0..=horizon` in breadth-first order. The children of a
/// node are contiguous and indexed by joint action.
#[derive(Debug, Clone)]
pub struct RunTree {
    horizon: usize,
    n_actions: usize,
    level_start: Vec<usize>,
    state: Vec<StateId>,
    parent: Vec<NodeId>,
    action: Vec<ActionId>,
    depth: Vec<u16>,
}

pub const NO_PARENT: NodeId = NodeId::MAX;

impl RunTree {
    pub fn build(is: &InterpretedSystem, horizon: usize) -> Result<RunTree, OracleError> {
        let n_actions = is.action_count();
        let roots = is.initial().len();
        let mut total = 0usize;
        let mut width = roots;
        for _ in 0..=horizon {
            total = total.saturating_add(width);
            width = width.saturating_mul(n_actions);
        }
        if total > TREE_LIMIT || horizon > u16::MAX as usize {
            return Err(OracleError::TreeTooLarge { runs: total, limit: TREE_LIMIT });
        }
        let mut t = RunTree {
            horizon,
            n_actions,
            level_start: Vec::with_capacity(horizon + 2),
            state: Vec::with_capacity(total),
            parent: Vec::with_capacity(total),
            action: Vec::with_capacity(total),
            depth: Vec::with_capacity(total),
        };
        t.level_start.push(0);
        for &s in is.initial() {
            t.push(s, NO_PARENT, 0, 0);
        }
        for d in 0..horizon {
            t.level_start.push(t.state.len());
            let range = t.level_start[d]..t.level_start[d + 1];
            for n in range {
                let s = t.state[n];
                for a in 0..n_actions as ActionId {
                    let next = is.successor(s, a).map_err(OracleError::System)?;
                    t.push(next, n as NodeId, a, (d + 1) as u16);
                }
            }
        }
        t.level_start.push(t.state.len());
        Ok(t)
    }

    fn push(&mut self, s: StateId, parent: NodeId, a: ActionId, depth: u16) {
        self.state.push(s);
        self.parent.push(parent);
        self.action.push(a);
        self.depth.push(depth);
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn state(&self, n: NodeId) -> StateId {
        self.state[n as usize]
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        let p = self.parent[n as usize];
        (p != NO_PARENT).then_some(p)
    }

    /// Joint action on the edge into `n` (meaningless for roots).
    pub fn action(&self, n: NodeId) -> ActionId {
        self.action[n as usize]
    }

    pub fn depth(&self, n: NodeId) -> usize {
        self.depth[n as usize] as usize
    }

    pub fn level(&self, d: usize) -> Range<NodeId> {
        self.level_start[d] as NodeId..self.level_start[d + 1] as NodeId
    }

    pub fn roots(&self) -> Range<NodeId> {
        self.level(0)
    }

    /// Only for nodes below the horizon.
    pub fn child(&self, n: NodeId, a: ActionId) -> NodeId {
        let d = self.depth(n);
        debug_assert!(d < self.horizon);
        let offset = n as usize - self.level_start[d];
        (self.level_start[d + 1] + offset * self.n_actions + a as usize) as NodeId
    }

    pub fn run(&self, n: NodeId) -> Run {
        let mut states = Vec::with_capacity(self.depth(n) + 1);
        let mut actions = Vec::with_capacity(self.depth(n));
        let mut cur = n;
        loop {
            states.push(self.state(cur));
            match self.parent(cur) {
                Some(p) => {
                    actions.push(self.action(cur));
                    cur = p;
                }
                None => break,
            }
        }
        states.reverse();
        actions.reverse();
        Run { states, actions }
    }

    pub fn find(&self, r: &Run) -> Option<NodeId> {
        if r.len() > self.horizon || r.states.len() != r.actions.len() + 1 {
            return None;
        }
        let mut n = self.roots().find(|&x| self.state(x) == r.states[0])?;
        for (j, &a) in r.actions.iter().enumerate() {
            if a as usize >= self.n_actions {
                return None;
            }
            n = self.child(n, a);
            if self.state(n) != r.states[j + 1] {
                return None;
            }
        }
        Some(n)
    }
}

/// `∼_Γ` restricted to the tree: class ids per node and members per class.
#[derive(Debug, Clone)]
pub struct Partition {
    pub members: Vec<usize>,
    class_of: Vec<u32>,
    classes: Vec<Vec<NodeId>>,
    level_classes: Vec<Range<u32>>,
    /// Γ-part of every joint action, numbered in Γ's own radix.
    pub gamma_of_action: Vec<u32>,
    /// Joint actions grouped by their Γ-part.
    pub actions_by_gamma: Vec<Vec<ActionId>>,
}

impl Partition {
    pub fn build(is: &InterpretedSystem, tree: &RunTree, members: &[usize]) -> Partition {
        let ar = is.action_radix();
        let sr = is.state_radix();
        let n_gamma = ar.sub_total(members);
        let gamma_of_action: Vec<u32> = (0..is.action_count()).map(|a| ar.sub_index(a, members) as u32).collect();
        let mut actions_by_gamma = alloc::vec![Vec::new(); n_gamma];
        for (a, &g) in gamma_of_action.iter().enumerate() {
            actions_by_gamma[g as usize].push(a as ActionId);
        }
        let mut class_of = alloc::vec![0u32; tree.len()];
        let mut classes: Vec<Vec<NodeId>> = Vec::new();
        let mut level_classes = Vec::with_capacity(tree.horizon() + 1);
        for d in 0..=tree.horizon() {
            let first = classes.len() as u32;
            let mut index: BTreeMap<(u32, u32, usize), u32> = BTreeMap::new();
            for n in tree.level(d) {
                let key = match tree.parent(n) {
                    None => (u32::MAX, 0, sr.sub_index(tree.state(n) as usize, members)),
                    Some(p) => (
                        class_of[p as usize],
                        gamma_of_action[tree.action(n) as usize],
                        sr.sub_index(tree.state(n) as usize, members),
                    ),
                };
                let id = *index.entry(key).or_insert_with(|| {
                    classes.push(Vec::new());
                    (classes.len() - 1) as u32
                });
                class_of[n as usize] = id;
                classes[id as usize].push(n);
            }
            level_classes.push(first..classes.len() as u32);
        }
        Partition { members: members.to_vec(), class_of, classes, level_classes, gamma_of_action, actions_by_gamma }
    }

    pub fn class_of(&self, n: NodeId) -> u32 {
        self.class_of[n as usize]
    }

    pub fn class(&self, c: u32) -> &[NodeId] {
        &self.classes[c as usize]
    }

    pub fn classes_at(&self, d: usize) -> Range<u32> {
        self.level_classes[d].clone()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn gamma_count(&self) -> usize {
        self.actions_by_gamma.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::tests::toy;

    #[test]
    fn tree_matches_run_enumeration() {
        let is = toy(2);
        let tree = RunTree::build(&is, 3).unwrap();
        let runs = is.runs_up_to(3).unwrap();
        assert_eq!(tree.len(), runs.len());
        for r in &runs {
            let n = tree.find(r).unwrap();
            assert_eq!(&tree.run(n), r);
        }
    }

    #[test]
    fn partition_agrees_with_projection() {
        let is = toy(2);
        let tree = RunTree::build(&is, 2).unwrap();
        for members in [&[][..], &[0], &[1], &[0, 1]] {
            let part = Partition::build(&is, &tree, members);
            for x in 0..tree.len() as NodeId {
                for y in 0..tree.len() as NodeId {
                    let same = part.class_of(x) == part.class_of(y);
                    let expected = is.indistinguishable(&tree.run(x), &tree.run(y), members);
                    assert_eq!(same, expected);
                }
            }
        }
    }

    #[test]
    fn oversized_trees_are_refused() {
        let is = toy(2);
        assert!(matches!(RunTree::build(&is, 40), Err(OracleError::TreeTooLarge { .. })));
    }
}
