//! Proof obligations and the policy-ordered worklist.

use super::policy::PoOrder;
use crate::lits::Cube;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::rc::Rc;

/// Trailing steps of the counterexample carried by the root CTI node:
/// `step_inputs` drives the CTI state into its bad successor (absent for a
/// state that is bad in place), `firing_inputs` is the input frame under
/// which the bad literal fires.
#[derive(Debug, Clone)]
pub struct CtiTail {
    pub step_inputs: Option<Vec<bool>>,
    pub firing_inputs: Vec<bool>,
}

/// One node of the predecessor chain. `state` is the concrete latch
/// valuation from the SAT model that produced the cube; `inputs_to_parent`
/// drives any state inside `cube` into the parent's cube.
#[derive(Debug)]
pub struct PoNode {
    pub cube: Cube,
    pub state: Vec<bool>,
    pub inputs_to_parent: Option<Vec<bool>>,
    pub parent: Option<Rc<PoNode>>,
    pub tail: Option<CtiTail>,
    /// Predecessor hops from the original CTI.
    pub depth: usize,
}

/// A schedulable (cube, frame) pair. Re-inserted obligations keep their
/// node (cube identity) and bump `age`.
#[derive(Debug, Clone)]
pub struct Obligation {
    pub node: Rc<PoNode>,
    pub frame: usize,
    pub age: u32,
}

struct Entry {
    key: (u64, u64, u64, u64),
    ob: Obligation,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

/// Min-queue of proof obligations under a fixed selection policy.
/// Selection is deterministic given contents and policy: ties always fall
/// back to insertion order.
pub struct ObligationQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    order: PoOrder,
    seq: u64,
}

impl ObligationQueue {
    pub fn new(order: PoOrder) -> Self {
        ObligationQueue {
            heap: BinaryHeap::new(),
            order,
            seq: 0,
        }
    }

    pub fn push(&mut self, ob: Obligation) {
        let seq = self.seq;
        self.seq += 1;
        let frame = ob.frame as u64;
        let key = match self.order {
            PoOrder::BestFirst => (frame, ob.node.depth as u64, ob.node.cube.len() as u64, seq),
            PoOrder::MinFrameThenSize => (frame, ob.node.cube.len() as u64, seq, 0),
            PoOrder::Dfs => (frame, u64::MAX - seq, 0, 0),
        };
        self.heap.push(Reverse(Entry { key, ob }));
    }

    /// Remove and return the obligation the policy ranks first.
    pub fn pop(&mut self) -> Option<Obligation> {
        self.heap.pop().map(|Reverse(e)| e.ob)
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lits::StateLit;

    fn ob(frame: usize, depth: usize, size: usize) -> Obligation {
        let cube = Cube::new((0..size).map(|i| StateLit::new(i, true)).collect());
        Obligation {
            node: Rc::new(PoNode {
                cube,
                state: vec![],
                inputs_to_parent: None,
                parent: None,
                tail: None,
                depth,
            }),
            frame,
            age: 0,
        }
    }

    #[test]
    fn singleton_queue_returns_it() {
        let mut q = ObligationQueue::new(PoOrder::BestFirst);
        q.push(ob(3, 1, 2));
        assert_eq!(q.pop().unwrap().frame, 3);
        assert!(q.pop().is_none());
    }

    #[test]
    fn min_frame_then_size_tiebreaks_by_insertion() {
        let mut q = ObligationQueue::new(PoOrder::MinFrameThenSize);
        q.push(ob(2, 9, 3)); // first inserted, frame 2, size 3
        q.push(ob(2, 0, 3)); // same frame and size: loses by insertion order
        q.push(ob(2, 5, 1)); // smaller cube wins the frame tie
        q.push(ob(1, 7, 8)); // smallest frame wins outright
        assert_eq!(q.pop().unwrap().frame, 1);
        let a = q.pop().unwrap();
        assert_eq!(a.node.cube.len(), 1);
        let b = q.pop().unwrap();
        assert_eq!(b.node.depth, 9);
        assert_eq!(q.pop().unwrap().node.depth, 0);
    }

    #[test]
    fn dfs_is_lifo_within_frame() {
        let mut q = ObligationQueue::new(PoOrder::Dfs);
        q.push(ob(1, 0, 1));
        q.push(ob(1, 1, 1));
        q.push(ob(2, 2, 1));
        assert_eq!(q.pop().unwrap().node.depth, 1);
        assert_eq!(q.pop().unwrap().node.depth, 0);
        assert_eq!(q.pop().unwrap().frame, 2);
    }

    #[test]
    fn best_first_orders_by_frame_depth_size() {
        let mut q = ObligationQueue::new(PoOrder::BestFirst);
        q.push(ob(1, 2, 1));
        q.push(ob(1, 1, 5));
        q.push(ob(1, 1, 2));
        let first = q.pop().unwrap();
        assert_eq!((first.node.depth, first.node.cube.len()), (1, 2));
    }
}
