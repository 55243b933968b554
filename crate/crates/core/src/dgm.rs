//! Time-indexed dependency graph of the UTM tapes over `t` cycles.
//!
//! Every tape square, staging square, the simulated state and the UTM
//! state gets one node per timestep it changes (or every timestep, before
//! collapsing identities). The description squares `σ'`, `q'`, `d` are the
//! only symbolic leaves; the keys `σ`, `q` enter the update functions as
//! constants.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::machine::{Direction, MachineSpec};
use crate::noisy::{block_of, block_parts, domain_size, SquareKind};
use crate::utm::{period, UtmState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    Desc(usize),
    Stage(u8),
    State,
    Work(i32),
    Phi,
    Blank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Update {
    /// Symbolic description square (block index).
    Leaf(usize),
    /// Initial work cell, filled from the input word.
    Input(i32),
    Const(usize),
    /// `[p]`.
    Identity,
    /// `[work0]`: compare the head symbol with the key.
    CompSymbol(usize),
    /// `[phi, state]`: compare the simulated state with the key.
    CompState(usize),
    /// `[desc, stage, phi]`: copy the square when `phi` is `active`.
    Copy(UtmState),
    /// `[phi]`: `active` goes to `on`, anything else to `off`.
    Advance {
        active: UtmState,
        on: UtmState,
        off: UtmState,
    },
    /// `[s0, work0]`: write unless the staged symbol is `X`.
    WriteWork,
    /// `[s1, state]`: set unless the staged state is `X`.
    SetState,
    /// `[s2, left, here, right]`: new content of a cell after the head moves.
    Shift,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub var: VarId,
    pub time: usize,
    pub update: Update,
    pub parents: Vec<usize>,
    pub domain: usize,
    /// Whether a symbolic leaf is among the ancestors.
    pub random: bool,
}

#[derive(Clone, Debug)]
pub struct UnrolledDGM {
    pub nodes: Vec<Node>,
    pub final_state: usize,
    pub leaves: Vec<usize>,
    pub t: usize,
    pub period: usize,
    pub half_width: i32,
    pub input_len: usize,
    n: usize,
    m: usize,
}

struct Builder<'a> {
    spec: &'a MachineSpec,
    nodes: Vec<Node>,
    cur: std::collections::BTreeMap<VarId, usize>,
    n: usize,
    m: usize,
}

impl Builder<'_> {
    fn domain(&self, var: VarId) -> usize {
        match var {
            VarId::Desc(b) => domain_size(self.spec, block_parts(b).1),
            VarId::Stage(0) => self.n + 1,
            VarId::Stage(1) => self.m + 1,
            VarId::Stage(_) => 4,
            VarId::State => self.m,
            VarId::Work(_) | VarId::Blank => self.n,
            VarId::Phi => UtmState::ALL.len(),
        }
    }

    fn push(&mut self, var: VarId, time: usize, update: Update, parents: Vec<usize>) -> usize {
        let random = matches!(update, Update::Leaf(_)) || parents.iter().any(|&p| self.nodes[p].random);
        let domain = self.domain(var);
        self.nodes.push(Node { var, time, update, parents, domain, random });
        self.nodes.len() - 1
    }

    fn get(&self, var: VarId) -> usize {
        self.cur[&var]
    }
}

/// Value used for `X` on staging square `slot`.
pub fn stage_x(slot: u8, n: usize, m: usize) -> usize {
    match slot {
        0 => n,
        1 => m,
        _ => 3,
    }
}

impl UnrolledDGM {
    /// Unrolls `t` cycles with an identity node for every unchanged variable
    /// at every timestep.
    pub fn unroll(spec: &MachineSpec, t: usize, input_len: usize) -> Self {
        Self::build(spec, t, input_len, true)
    }

    /// Same graph with identity chains already collapsed.
    pub fn unroll_collapsed(spec: &MachineSpec, t: usize, input_len: usize) -> Self {
        Self::build(spec, t, input_len, false)
    }

    fn build(spec: &MachineSpec, t: usize, input_len: usize, full: bool) -> Self {
        let (n, m) = (spec.n(), spec.m());
        let big_n = spec.tuple_count();
        let p = period(big_n);
        let h = crate::machine::window_extent(input_len, t) as i32;
        let mut b = Builder { spec, nodes: Vec::new(), cur: Default::default(), n, m };

        let mut leaves = Vec::new();
        for blk in 0..3 * big_n {
            let id = b.push(VarId::Desc(blk), 0, Update::Leaf(blk), vec![]);
            b.cur.insert(VarId::Desc(blk), id);
            leaves.push(id);
        }
        let blank = b.push(VarId::Blank, 0, Update::Const(0), vec![]);
        for slot in 0..3u8 {
            let id = b.push(VarId::Stage(slot), 0, Update::Const(stage_x(slot, n, m)), vec![]);
            b.cur.insert(VarId::Stage(slot), id);
        }
        let id = b.push(VarId::State, 0, Update::Const(spec.init_state), vec![]);
        b.cur.insert(VarId::State, id);
        for i in -h..=h {
            let id = b.push(VarId::Work(i), 0, Update::Input(i), vec![]);
            b.cur.insert(VarId::Work(i), id);
        }
        let id = b.push(VarId::Phi, 0, Update::Const(UtmState::CompSymbol.index()), vec![]);
        b.cur.insert(VarId::Phi, id);

        for step in 1..=t * p {
            let mu = (step - 1) % p + 1;
            let mut changes: Vec<(VarId, Update, Vec<usize>)> = Vec::new();
            let phi = b.get(VarId::Phi);
            let konst = |s: UtmState| Update::Const(s.index());
            if mu <= 5 * big_n {
                let j = (mu - 1) / 5;
                let (sigma, q) = spec.key(j);
                match (mu - 1) % 5 {
                    0 => changes.push((VarId::Phi, Update::CompSymbol(sigma), vec![b.get(VarId::Work(0))])),
                    1 => changes.push((VarId::Phi, Update::CompState(q), vec![phi, b.get(VarId::State)])),
                    r => {
                        let (kind, slot, active, on, off) = match r {
                            2 => (
                                SquareKind::Symbol,
                                0,
                                UtmState::CopySymbol,
                                UtmState::CopyState,
                                UtmState::NotCopyState,
                            ),
                            3 => (SquareKind::State, 1, UtmState::CopyState, UtmState::CopyDir, UtmState::NotCopyDir),
                            _ => (SquareKind::Dir, 2, UtmState::CopyDir, UtmState::CompSymbol, UtmState::CompSymbol),
                        };
                        let desc = b.get(VarId::Desc(block_of(j, kind)));
                        let stage = b.get(VarId::Stage(slot));
                        changes.push((VarId::Stage(slot), Update::Copy(active), vec![desc, stage, phi]));
                        if on == off {
                            changes.push((VarId::Phi, konst(on), vec![]));
                        } else {
                            changes.push((VarId::Phi, Update::Advance { active, on, off }, vec![phi]));
                        }
                    }
                }
            } else if mu == 5 * big_n + 1 {
                changes.push((VarId::Phi, konst(UtmState::UpdateSymbol), vec![]));
            } else if mu == 5 * big_n + 2 {
                let w0 = b.get(VarId::Work(0));
                changes.push((VarId::Work(0), Update::WriteWork, vec![b.get(VarId::Stage(0)), w0]));
                changes.push((VarId::Stage(0), Update::Const(stage_x(0, n, m)), vec![]));
                changes.push((VarId::Phi, konst(UtmState::UpdateState), vec![]));
            } else if mu == 5 * big_n + 3 {
                let st = b.get(VarId::State);
                changes.push((VarId::State, Update::SetState, vec![b.get(VarId::Stage(1)), st]));
                changes.push((VarId::Stage(1), Update::Const(stage_x(1, n, m)), vec![]));
                changes.push((VarId::Phi, konst(UtmState::UpdateDir), vec![]));
            } else if mu == 5 * big_n + 4 {
                let s2 = b.get(VarId::Stage(2));
                for i in -h..=h {
                    let left = if i > -h { b.get(VarId::Work(i - 1)) } else { blank };
                    let right = if i < h { b.get(VarId::Work(i + 1)) } else { blank };
                    changes.push((VarId::Work(i), Update::Shift, vec![s2, left, b.get(VarId::Work(i)), right]));
                }
                changes.push((VarId::Stage(2), Update::Const(stage_x(2, n, m)), vec![]));
                changes.push((VarId::Phi, konst(UtmState::ResetDescr), vec![]));
            } else if mu == p {
                changes.push((VarId::Phi, konst(UtmState::CompSymbol), vec![]));
            }

            let mut next = b.cur.clone();
            let changed: std::collections::BTreeSet<VarId> = changes.iter().map(|c| c.0).collect();
            for (var, update, parents) in changes {
                let id = b.push(var, step, update, parents);
                next.insert(var, id);
            }
            if full {
                let vars: Vec<VarId> = b.cur.keys().copied().collect();
                for var in vars {
                    if !changed.contains(&var) {
                        let prev = b.get(var);
                        let id = b.push(var, step, Update::Identity, vec![prev]);
                        next.insert(var, id);
                    }
                }
            }
            b.cur = next;
        }
        let final_state = b.get(VarId::State);
        UnrolledDGM { nodes: b.nodes, final_state, leaves, t, period: p, half_width: h, input_len, n, m }
    }

    /// Removes identity nodes, pointing their children at the nearest
    /// non-identity ancestor.
    pub fn collapse(&self) -> Self {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.update == Update::Identity {
                map[i] = map[node.parents[0]];
            } else {
                let mut nn = node.clone();
                nn.parents = node.parents.iter().map(|&p| map[p]).collect();
                nodes.push(nn);
                map[i] = nodes.len() - 1;
            }
        }
        UnrolledDGM {
            nodes,
            final_state: map[self.final_state],
            leaves: self.leaves.iter().map(|&l| map[l]).collect(),
            t: self.t,
            period: self.period,
            half_width: self.half_width,
            input_len: self.input_len,
            n: self.n,
            m: self.m,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.m
    }

    /// Number of directed paths from each node to `target`.
    pub fn paths_to(&self, target: usize) -> Vec<BigUint> {
        let mut paths = vec![BigUint::zero(); self.nodes.len()];
        paths[target] = BigUint::one();
        for i in (0..=target).rev() {
            if paths[i].is_zero() {
                continue;
            }
            let c = paths[i].clone();
            for &p in &self.nodes[i].parents {
                paths[p] += &c;
            }
        }
        paths
    }

    /// Reads of each description square along paths to the final state,
    /// indexed by block.
    pub fn block_path_counts(&self) -> Vec<BigUint> {
        let paths = self.paths_to(self.final_state);
        self.leaves.iter().map(|&l| paths[l].clone()).collect()
    }

    /// All ancestors of a node, itself included.
    pub fn ancestors(&self, node: usize) -> Vec<usize> {
        let mut mark = vec![false; self.nodes.len()];
        mark[node] = true;
        for i in (0..=node).rev() {
            if mark[i] {
                for &p in &self.nodes[i].parents {
                    mark[p] = true;
                }
            }
        }
        (0..self.nodes.len()).filter(|&i| mark[i]).collect()
    }

    /// Value of a node given the values of its parents.
    pub fn apply(&self, node: usize, x: &[usize], pv: &[usize]) -> usize {
        let n = self.n;
        let m = self.m;
        match self.nodes[node].update {
            Update::Leaf(_) => unreachable!("leaves have no update"),
            Update::Input(i) => {
                if i >= 0 && (i as usize) < x.len() {
                    x[i as usize]
                } else {
                    0
                }
            }
            Update::Const(v) => v,
            Update::Identity => pv[0],
            Update::CompSymbol(key) => {
                if pv[0] == key {
                    UtmState::CompState.index()
                } else {
                    UtmState::NotCompState.index()
                }
            }
            Update::CompState(key) => {
                if pv[0] == UtmState::CompState.index() && pv[1] == key {
                    UtmState::CopySymbol.index()
                } else {
                    UtmState::NotCopySymbol.index()
                }
            }
            Update::Copy(active) => {
                if pv[2] == active.index() {
                    pv[0]
                } else {
                    pv[1]
                }
            }
            Update::Advance { active, on, off } => {
                if pv[0] == active.index() {
                    on.index()
                } else {
                    off.index()
                }
            }
            Update::WriteWork => {
                if pv[0] == n {
                    pv[1]
                } else {
                    pv[0]
                }
            }
            Update::SetState => {
                if pv[0] == m {
                    pv[1]
                } else {
                    pv[0]
                }
            }
            Update::Shift => match Direction::from_index(pv[0]) {
                Some(Direction::Left) => pv[1],
                Some(Direction::Right) => pv[3],
                _ => pv[2],
            },
        }
    }

    /// Plain evaluation with every description square at the given value.
    pub fn evaluate(&self, x: &[usize], leaf_values: &[usize]) -> Vec<usize> {
        let mut val = vec![0usize; self.nodes.len()];
        for i in 0..self.nodes.len() {
            val[i] = match self.nodes[i].update {
                Update::Leaf(b) => leaf_values[b],
                _ => {
                    let pv: Vec<usize> = self.nodes[i].parents.iter().map(|&p| val[p]).collect();
                    self.apply(i, x, &pv)
                }
            };
        }
        val
    }
}
